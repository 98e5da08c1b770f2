//! Calendar months and market labels.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A calendar month, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    /// 1..=12
    pub fn month(self) -> u32 {
        self.month
    }

    /// Months since year 0, used for arithmetic.
    pub fn index(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    pub fn from_index(index: i64) -> Self {
        let year = index.div_euclid(12);
        let month = index.rem_euclid(12) + 1;
        Self {
            year: year as i32,
            month: month as u32,
        }
    }

    pub fn add_months(self, delta: i64) -> Self {
        Self::from_index(self.index() + delta)
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn days(self) -> u32 {
        let next = self.add_months(1).first_day();
        (next - self.first_day()).num_days() as u32
    }

    /// Same calendar month in `year`.
    pub fn with_year(self, year: i32) -> Self {
        Self {
            year,
            month: self.month,
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidArgument(format!("expected YYYY-MM month, got {s:?}"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month).ok_or_else(bad)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Corridor {
    Destination,
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TravelType {
    Domestic,
    International,
}

impl Corridor {
    pub fn as_str(self) -> &'static str {
        match self {
            Corridor::Destination => "destination",
            Corridor::Origin => "origin",
        }
    }
}

impl TravelType {
    pub fn as_str(self) -> &'static str {
        match self {
            TravelType::Domestic => "domestic",
            TravelType::International => "international",
        }
    }
}

impl FromStr for Corridor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "destination" => Ok(Corridor::Destination),
            "origin" => Ok(Corridor::Origin),
            other => Err(format!("unknown corridor {other:?}")),
        }
    }
}

impl FromStr for TravelType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "domestic" => Ok(TravelType::Domestic),
            "international" => Ok(TravelType::International),
            other => Err(format!("unknown travel_type {other:?}")),
        }
    }
}

/// Market key: (city, corridor, travel type). Ordering follows that tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Market {
    pub city: String,
    pub corridor: Corridor,
    pub travel_type: TravelType,
}

impl Market {
    pub fn new(city: impl Into<String>, corridor: Corridor, travel_type: TravelType) -> Self {
        Self {
            city: city.into(),
            corridor,
            travel_type,
        }
    }

    /// File-name friendly label.
    pub fn slug(&self) -> String {
        let city: String = self
            .city
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
            .collect();
        format!("{city}_{}_{}", self.corridor.as_str(), self.travel_type.as_str())
    }
}

/// Rendered as `city/corridor/travel_type`.
impl fmt::Display for Market {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}",
            self.city,
            self.corridor.as_str(),
            self.travel_type.as_str()
        )
    }
}

impl FromStr for Market {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.rsplitn(3, '/');
        let (travel, corridor, city) = match (parts.next(), parts.next(), parts.next()) {
            (Some(t), Some(c), Some(city)) if !city.is_empty() => (t, c, city),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "expected city/corridor/travel_type, got {s:?}"
                )))
            }
        };
        Ok(Market {
            city: city.to_string(),
            corridor: corridor.parse().map_err(Error::InvalidArgument)?,
            travel_type: travel.parse().map_err(Error::InvalidArgument)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn month_arithmetic_wraps_years() {
        let m = YearMonth::new(2019, 11).unwrap();
        assert_eq!(m.add_months(3).to_string(), "2020-02");
        assert_eq!(m.add_months(-12), YearMonth::new(2018, 11).unwrap());
        assert_eq!(YearMonth::new(2020, 2).unwrap().days(), 29);
    }

    #[test]
    fn parses_labels() {
        let m: Market = "San Francisco/origin/international".parse().unwrap();
        assert_eq!(m.city, "San Francisco");
        assert_eq!(m.to_string(), "San Francisco/origin/international");
        assert_eq!(m.slug(), "san-francisco_origin_international");
        assert!("Austin/sideways/domestic".parse::<Market>().is_err());
        assert!("2020-13".parse::<YearMonth>().is_err());
    }
}
