/// Keyword sets used to attribute a post to a brand. All phrases are matched
/// case-insensitively on whole words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BrandKeywords {
    pub id: String,
    pub brand_names: Vec<String>,
    pub products: Vec<String>,
    pub key_people: Vec<String>,
}

impl BrandKeywords {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into(), ..Self::default() }
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.brand_names.iter().chain(&self.products).chain(&self.key_people).map(String::as_str)
    }
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty() && haystack.windows(phrase.len()).any(|w| w == phrase)
}

/// The single brand whose keywords occur in `text`. Posts matching no brand,
/// or more than one, are not attributed.
pub fn match_brand<'a>(text: &str, brands: &'a [BrandKeywords]) -> Option<&'a str> {
    let tokens = words(text);
    let mut hit: Option<&str> = None;
    for brand in brands {
        if brand.keywords().any(|k| contains_phrase(&tokens, &words(k))) {
            match hit {
                Some(id) if id != brand.id => return None,
                _ => hit = Some(&brand.id),
            }
        }
    }
    hit
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brands() -> Vec<BrandKeywords> {
        vec![
            BrandKeywords { brand_names: vec!["brandia".into()], key_people: vec!["jane roe".into()], ..BrandKeywords::new("Brandia") },
            BrandKeywords { brand_names: vec!["motorco".into()], products: vec!["roadster x".into()], ..BrandKeywords::new("Motorco") },
        ]
    }

    #[test]
    fn direct_hit() {
        assert_eq!(match_brand("new model from Brandia is great", &brands()), Some("Brandia"));
    }

    #[test]
    fn no_match() {
        assert_eq!(match_brand("nothing relevant here", &brands()), None);
    }

    #[test]
    fn ambiguous() {
        assert_eq!(match_brand("Brandia vs Motorco, who wins?", &brands()), None);
    }

    #[test]
    fn whole_words_only() {
        assert_eq!(match_brand("brandiathon tickets", &brands()), None);
        assert_eq!(match_brand("Test drove the ROADSTER X today!", &brands()), Some("Motorco"));
        assert_eq!(match_brand("roadster xl is out", &brands()), None);
        assert_eq!(match_brand("Interview with Jane Roe.", &brands()), Some("Brandia"));
    }
}
