use std::collections::BTreeSet;

use chrono::{DateTime, Datelike, Duration, LocalResult, NaiveDate, NaiveTime, TimeZone, Utc, Weekday};
use chrono_tz::Tz;

use super::ticks::PriceTick;
use crate::error::{Error, Result};
use crate::kv;

/// Local opening hours for one weekday.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TradingHours {
    pub open: NaiveTime,
    pub close: NaiveTime,
}

/// Exchange calendar: a timezone, per-weekday opening hours, and holidays.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketCalendar {
    timezone: Tz,
    hours: [Option<TradingHours>; 7],
    holidays: BTreeSet<NaiveDate>,
}

const DAY_NAMES: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

fn parse_time(s: &str, field: &str) -> Result<NaiveTime> {
    NaiveTime::parse_from_str(s, "%H:%M").map_err(|_| Error::config(field, format!("expected HH:MM, got `{s}`")))
}

fn parse_weekday(s: &str) -> Option<usize> {
    let s = s.trim().to_ascii_lowercase();
    DAY_NAMES.iter().position(|d| s.starts_with(d))
}

impl MarketCalendar {
    /// Monday-to-Friday calendar with the same hours every day.
    pub fn weekdays(timezone: Tz, open: NaiveTime, close: NaiveTime) -> Result<Self> {
        let hours = TradingHours { open, close };
        Self::check(&hours, "open")?;
        let mut all = [None; 7];
        all[..5].fill(Some(hours));
        Ok(Self { timezone, hours: all, holidays: BTreeSet::new() })
    }

    fn check(h: &TradingHours, field: &str) -> Result<()> {
        if h.open >= h.close {
            return Err(Error::config(field, format!("market open {} must precede close {}", h.open, h.close)));
        }
        Ok(())
    }

    pub fn with_holidays(mut self, holidays: impl IntoIterator<Item = NaiveDate>) -> Self {
        self.holidays.extend(holidays);
        self
    }

    pub fn add_holiday(&mut self, date: NaiveDate) {
        self.holidays.insert(date);
    }

    pub fn set_hours(&mut self, day: Weekday, hours: Option<TradingHours>) -> Result<()> {
        if let Some(h) = &hours {
            Self::check(h, DAY_NAMES[day.num_days_from_monday() as usize])?;
        }
        self.hours[day.num_days_from_monday() as usize] = hours;
        Ok(())
    }

    pub fn timezone(&self) -> Tz {
        self.timezone
    }

    /// Parse the plain-text form:
    ///
    /// ```text
    /// timezone = America/New_York
    /// open = 09:30
    /// close = 16:00
    /// holidays = 2012-07-04, 2012-09-03
    /// weekdays = mon,tue,wed,thu,fri     # optional
    /// hours.fri = 09:30-13:00            # optional override, or `closed`
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let entries = kv::parse(text)?;
        let get = |k: &str| entries.iter().find(|e| e.key == k).map(|e| e.value.as_str());
        for e in &entries {
            let known = matches!(e.key.as_str(), "timezone" | "open" | "close" | "holidays" | "weekdays")
                || e.key.strip_prefix("hours.").is_some_and(|d| parse_weekday(d).is_some());
            if !known {
                return Err(Error::config(&e.key, "unknown calendar key"));
            }
        }
        let tz_name = get("timezone").ok_or_else(|| Error::config("timezone", "missing"))?;
        let timezone: Tz = tz_name.parse().map_err(|_| Error::config("timezone", format!("unknown timezone `{tz_name}`")))?;
        let open = parse_time(get("open").ok_or_else(|| Error::config("open", "missing"))?, "open")?;
        let close = parse_time(get("close").ok_or_else(|| Error::config("close", "missing"))?, "close")?;
        let mut cal = Self::weekdays(timezone, open, close)?;

        if let Some(days) = get("weekdays") {
            let mut hours = [None; 7];
            for d in days.split(',').filter(|d| !d.trim().is_empty()) {
                let idx = parse_weekday(d).ok_or_else(|| Error::config("weekdays", format!("unknown weekday `{d}`")))?;
                hours[idx] = Some(TradingHours { open, close });
            }
            cal.hours = hours;
        }
        for e in entries.iter().filter(|e| e.key.starts_with("hours.")) {
            let idx = parse_weekday(&e.key["hours.".len()..]).expect("checked above");
            cal.hours[idx] = if e.value.eq_ignore_ascii_case("closed") {
                None
            } else {
                let (o, c) = e.value.split_once('-').ok_or_else(|| Error::config(&e.key, "expected HH:MM-HH:MM or `closed`"))?;
                let h = TradingHours { open: parse_time(o.trim(), &e.key)?, close: parse_time(c.trim(), &e.key)? };
                Self::check(&h, &e.key)?;
                Some(h)
            };
        }
        if let Some(list) = get("holidays") {
            for d in list.split(',').map(str::trim).filter(|d| !d.is_empty()) {
                let date = NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|_| Error::config("holidays", format!("bad date `{d}`")))?;
                cal.holidays.insert(date);
            }
        }
        Ok(cal)
    }

    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        self.hours[date.weekday().num_days_from_monday() as usize].is_some() && !self.holidays.contains(&date)
    }

    fn to_utc(&self, date: NaiveDate, time: NaiveTime) -> Option<DateTime<Utc>> {
        match self.timezone.from_local_datetime(&date.and_time(time)) {
            LocalResult::Single(t) => Some(t.with_timezone(&Utc)),
            LocalResult::Ambiguous(t, _) => Some(t.with_timezone(&Utc)),
            LocalResult::None => None,
        }
    }

    /// Market open and close for `date`, in UTC. `None` on weekends and holidays.
    pub fn trading_window(&self, date: NaiveDate) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        if !self.is_trading_day(date) {
            return None;
        }
        let h = self.hours[date.weekday().num_days_from_monday() as usize]?;
        Some((self.to_utc(date, h.open)?, self.to_utc(date, h.close)?))
    }

    pub fn local_date(&self, t: DateTime<Utc>) -> NaiveDate {
        t.with_timezone(&self.timezone).date_naive()
    }
}

/// Effective prices of one trading day, sampled `offset` inside the open and close.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyPrice {
    pub date: NaiveDate,
    pub open_price: f64,
    pub close_price: f64,
    pub open_time: DateTime<Utc>,
    pub close_time: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DailyPrices {
    pub days: Vec<DailyPrice>,
    pub warnings: Vec<String>,
}

/// Latest tick in `[from, at]`.
fn latest_at_or_before(ticks: &[PriceTick], from: DateTime<Utc>, at: DateTime<Utc>) -> Option<&PriceTick> {
    let end = ticks.partition_point(|t| t.timestamp <= at);
    ticks[..end].last().filter(|t| t.timestamp >= from)
}

/// Sample each trading day's effective open (market open + offset) and
/// effective close (market close - offset) prices. Only ticks from the same
/// session count; a day without one is dropped with a warning.
pub fn session_prices(ticks: &[PriceTick], calendar: &MarketCalendar, offset_minutes: u32) -> DailyPrices {
    let mut out = DailyPrices::default();
    let (Some(first), Some(last)) = (ticks.first(), ticks.last()) else {
        return out;
    };
    let offset = Duration::minutes(offset_minutes as i64);
    let last_date = calendar.local_date(last.timestamp);
    let mut date = calendar.local_date(first.timestamp);
    while date <= last_date {
        if let Some((open, close)) = calendar.trading_window(date) {
            let eff_open = open + offset;
            let eff_close = close - offset;
            if eff_open >= eff_close {
                out.warnings.push(format!("{date}: offset of {offset_minutes} min leaves no trading interval; day dropped"));
            } else {
                match (latest_at_or_before(ticks, open, eff_open), latest_at_or_before(ticks, open, eff_close)) {
                    (Some(o), Some(c)) => out.days.push(DailyPrice {
                        date,
                        open_price: o.price,
                        close_price: c.price,
                        open_time: eff_open,
                        close_time: eff_close,
                    }),
                    _ => out.warnings.push(format!("{date}: no tick between market open and {eff_open}; day dropped")),
                }
            }
        }
        date = date.succ_opt().expect("date in range");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: u32, m: u32) -> NaiveTime {
        NaiveTime::from_hms_opt(h, m, 0).unwrap()
    }

    fn at(d: u32, h: u32, m: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2012, 6, d, h, m, 0).unwrap()
    }

    fn utc_cal() -> MarketCalendar {
        MarketCalendar::weekdays(chrono_tz::UTC, t(9, 30), t(16, 0)).unwrap()
    }

    #[test]
    fn ticks_exactly_at_offsets() {
        let ticks = [PriceTick { timestamp: at(18, 10, 0), price: 100.0 }, PriceTick { timestamp: at(18, 15, 30), price: 102.0 }];
        let out = session_prices(&ticks, &utc_cal(), 30);
        assert_eq!(out.days.len(), 1);
        let d = out.days[0];
        assert_eq!((d.open_price, d.close_price), (100.0, 102.0));
        assert_eq!((d.open_time, d.close_time), (at(18, 10, 0), at(18, 15, 30)));
    }

    #[test]
    fn premarket_tick_only_drops_day() {
        let ticks = [PriceTick { timestamp: at(18, 9, 0), price: 100.0 }];
        let out = session_prices(&ticks, &utc_cal(), 30);
        assert!(out.days.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn latest_at_or_before_rule() {
        let ticks = [
            PriceTick { timestamp: at(18, 9, 59), price: 99.0 },
            PriceTick { timestamp: at(18, 10, 1), price: 101.0 },
        ];
        let out = session_prices(&ticks, &utc_cal(), 30);
        assert_eq!(out.days[0].open_price, 99.0);
        assert_eq!(out.days[0].close_price, 101.0);
    }

    #[test]
    fn offset_is_configurable() {
        let ticks = [PriceTick { timestamp: at(18, 9, 45), price: 50.0 }, PriceTick { timestamp: at(18, 15, 40), price: 51.0 }];
        let out = session_prices(&ticks, &utc_cal(), 15);
        assert_eq!(out.days[0].open_time, at(18, 9, 45));
        assert_eq!(out.days[0].close_price, 51.0);
    }

    #[test]
    fn weekend_and_holiday_skipped() {
        let cal = utc_cal().with_holidays([NaiveDate::from_ymd_opt(2012, 6, 19).unwrap()]);
        // Fri 15th .. Wed 20th
        let ticks: Vec<PriceTick> = (15..=20).map(|d| PriceTick { timestamp: at(d, 10, 0), price: d as f64 }).collect();
        let out = session_prices(&ticks, &cal, 30);
        let dates: Vec<u32> = out.days.iter().map(|d| d.date.day()).collect();
        assert_eq!(dates, vec![15, 18, 20]);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn new_york_hours_convert_to_utc() {
        let cal = MarketCalendar::parse("timezone = America/New_York\nopen = 09:30\nclose = 16:00\n").unwrap();
        let (open, close) = cal.trading_window(NaiveDate::from_ymd_opt(2012, 6, 18).unwrap()).unwrap();
        assert_eq!(open, at(18, 13, 30));
        assert_eq!(close, at(18, 20, 0));
    }

    #[test]
    fn parse_full_calendar() {
        let text = "timezone = UTC\nopen = 09:00\nclose = 17:00\nholidays = 2012-07-04, 2012-09-03\nhours.fri = 09:00-13:00\nhours.wed = closed\n";
        let cal = MarketCalendar::parse(text).unwrap();
        assert!(!cal.is_trading_day(NaiveDate::from_ymd_opt(2012, 7, 4).unwrap()));
        assert!(!cal.is_trading_day(NaiveDate::from_ymd_opt(2012, 6, 20).unwrap()));
        let (_, close) = cal.trading_window(NaiveDate::from_ymd_opt(2012, 6, 22).unwrap()).unwrap();
        assert_eq!(close, at(22, 13, 0));
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(MarketCalendar::parse("open = 09:00\nclose = 17:00").is_err());
        assert!(MarketCalendar::parse("timezone = Mars/Base\nopen = 09:00\nclose = 17:00").is_err());
        assert!(MarketCalendar::parse("timezone = UTC\nopen = 17:00\nclose = 09:00").is_err());
        assert!(MarketCalendar::parse("timezone = UTC\nopen = 09:00\nclose = 17:00\nlunch = 12:00").is_err());
    }
}
