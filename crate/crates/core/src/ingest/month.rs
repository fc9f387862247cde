use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

const MONTH_ABBR: [&str; 12] = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

/// Calendar month. Parses `YYYY-MM` and the vendor export form `Mon-YYYY`;
/// always displays as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month {
    year: i32,
    month: u8,
}

impl Month {
    pub fn new(year: i32, month: u8) -> Result<Self, Error> {
        if (1..=12).contains(&month) {
            Ok(Self { year, month })
        } else {
            Err(Error::BadMonth(format!("{year}-{month}")))
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    /// Months elapsed since January of year 0.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ord: i64) -> Self {
        Self { year: ord.div_euclid(12) as i32, month: (ord.rem_euclid(12) + 1) as u8 }
    }

    pub fn succ(self) -> Self {
        Self::from_ordinal(self.ordinal() + 1)
    }

    pub fn plus(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn abbreviated(self) -> String {
        format!("{}-{}", MONTH_ABBR[self.month as usize - 1], self.year)
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::BadMonth(s.to_string());
        let t = s.trim();
        let (a, b) = t.split_once('-').ok_or_else(bad)?;
        if let Some(idx) = MONTH_ABBR.iter().position(|m| m.eq_ignore_ascii_case(a)) {
            let year: i32 = b.parse().map_err(|_| bad())?;
            if b.len() != 4 {
                return Err(bad());
            }
            return Month::new(year, idx as u8 + 1);
        }
        // Tolerate a trailing day component (YYYY-MM-DD).
        let month_part = b.split('-').next().ok_or_else(bad)?;
        if a.len() != 4 || month_part.is_empty() || month_part.len() > 2 {
            return Err(bad());
        }
        let year: i32 = a.parse().map_err(|_| bad())?;
        let month: u8 = month_part.parse().map_err(|_| bad())?;
        Month::new(year, month).map_err(|_| bad())
    }
}

impl Serialize for Month {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Month {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
