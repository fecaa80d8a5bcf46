//! Trading-calendar date arithmetic.
//!
//! Historical calendars come from the observed trade dates of a series.
//! Future horizons beyond observed data use a Mon-Fri weekday rule with an
//! optional holiday-exclusion file.

use std::collections::BTreeSet;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use crate::error::{Error, Result};
use crate::market::PriceSeries;

#[derive(Debug, Clone)]
pub enum TradingCalendar {
    /// Explicit strictly-increasing list of trade dates.
    Observed(Vec<NaiveDate>),
    /// Every Monday-Friday, minus the listed holidays.
    WeekdayRule { holidays: BTreeSet<NaiveDate> },
}

impl TradingCalendar {
    pub fn from_series(series: &PriceSeries) -> Self {
        TradingCalendar::Observed(series.dates().collect())
    }

    pub fn weekdays() -> Self {
        TradingCalendar::WeekdayRule {
            holidays: BTreeSet::new(),
        }
    }

    pub fn weekdays_except(holidays: BTreeSet<NaiveDate>) -> Self {
        TradingCalendar::WeekdayRule { holidays }
    }

    /// The first `count` trade dates strictly after `after`.
    pub fn next_trade_dates(&self, after: NaiveDate, count: usize) -> Result<Vec<NaiveDate>> {
        match self {
            TradingCalendar::Observed(dates) => {
                let out: Vec<NaiveDate> =
                    dates.iter().copied().filter(|d| *d > after).take(count).collect();
                if out.len() < count {
                    return Err(Error::CalendarExhausted(
                        out.last().copied().unwrap_or(after),
                    ));
                }
                Ok(out)
            }
            TradingCalendar::WeekdayRule { holidays } => {
                let mut out = Vec::with_capacity(count);
                let mut day = after;
                while out.len() < count {
                    day = day + Days::new(1);
                    let wd = day.weekday();
                    if wd != Weekday::Sat && wd != Weekday::Sun && !holidays.contains(&day) {
                        out.push(day);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Trade dates in `[start, end]`, inclusive.
    pub fn trade_dates_between(&self, start: NaiveDate, end: NaiveDate) -> Result<Vec<NaiveDate>> {
        if end < start {
            return Err(Error::Config(format!("end {end} before start {start}")));
        }
        let mut out = Vec::new();
        let mut dates = self.next_trade_dates(start - Days::new(1), 1)?;
        while let Some(d) = dates.pop() {
            if d > end {
                break;
            }
            out.push(d);
            dates = match self.next_trade_dates(d, 1) {
                Ok(v) => v,
                Err(Error::CalendarExhausted(_)) => break,
                Err(e) => return Err(e),
            };
        }
        Ok(out)
    }
}

/// Holiday file: one `YYYY-MM-DD` per line, `#` comments and blanks allowed.
pub fn parse_holiday_file(text: &str) -> Result<BTreeSet<NaiveDate>> {
    let mut out = BTreeSet::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.split('#').next().unwrap_or("").trim();
        if trimmed.is_empty() {
            continue;
        }
        let date = NaiveDate::parse_from_str(trimmed, "%Y-%m-%d").map_err(|e| Error::Parse {
            line: n + 1,
            msg: format!("bad holiday date '{trimmed}': {e}"),
        })?;
        out.insert(date);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn weekday_rule_skips_weekend() {
        let cal = TradingCalendar::weekdays();
        let next = cal.next_trade_dates(d("2016-09-16"), 1).unwrap();
        assert_eq!(next, vec![d("2016-09-19")]);
    }

    #[test]
    fn nineteen_weekdays_after_sep_14() {
        let cal = TradingCalendar::weekdays();
        let dates = cal.next_trade_dates(d("2016-09-14"), 19).unwrap();
        assert_eq!(dates.len(), 19);
        assert_eq!(dates[0], d("2016-09-15"));
        assert_eq!(*dates.last().unwrap(), d("2016-10-11"));
    }

    #[test]
    fn count_zero_is_empty() {
        let cal = TradingCalendar::weekdays();
        assert!(cal.next_trade_dates(d("2016-09-14"), 0).unwrap().is_empty());
    }

    #[test]
    fn observed_calendar_exhaustion() {
        let cal = TradingCalendar::Observed(vec![d("2016-09-14"), d("2016-09-15")]);
        assert_eq!(
            cal.next_trade_dates(d("2016-09-14"), 1).unwrap(),
            vec![d("2016-09-15")]
        );
        assert!(matches!(
            cal.next_trade_dates(d("2016-09-14"), 2),
            Err(Error::CalendarExhausted(_))
        ));
    }

    #[test]
    fn holidays_are_skipped() {
        let holidays = parse_holiday_file("# golden week\n2016-10-03\n2016-10-04\n").unwrap();
        let cal = TradingCalendar::weekdays_except(holidays);
        let dates = cal.next_trade_dates(d("2016-09-30"), 2).unwrap();
        assert_eq!(dates, vec![d("2016-10-05"), d("2016-10-06")]);
    }

    #[test]
    fn holiday_file_rejects_garbage() {
        assert!(matches!(
            parse_holiday_file("2016-10-03\nnot-a-date\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn trade_dates_between_inclusive() {
        let cal = TradingCalendar::weekdays();
        let dates = cal
            .trade_dates_between(d("2016-09-15"), d("2016-10-11"))
            .unwrap();
        assert_eq!(dates.len(), 19);
    }
}
