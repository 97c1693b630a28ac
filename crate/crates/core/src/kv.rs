//! `key = value` text files with `#` comments.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: u64,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u64 + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("expected `key = value`, got `{body}`")))?;
        let key = key.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(Error::parse(line, "empty key"));
        }
        if out.iter().any(|e| e.key == key) {
            return Err(Error::config(key, format!("duplicate key on line {line}")));
        }
        out.push(Entry { line, key, value: value.trim().to_string() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let e = parse("# header\n\nbeta = 0.4  # trained\nGamma=0\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0], Entry { line: 3, key: "beta".into(), value: "0.4".into() });
        assert_eq!(e[1].key, "gamma");
    }

    #[test]
    fn missing_equals() {
        assert!(matches!(parse("beta 0.4"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn duplicate_key() {
        assert!(parse("a = 1\na = 2").is_err());
    }
}
