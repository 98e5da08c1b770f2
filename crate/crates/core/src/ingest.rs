//! Booking CSV parsing and monthly cohort grouping.
//!
//! Input header is exactly `booking_date,checkin_date,nights,city,corridor,travel_type`
//! with ISO dates. Each row is one realized stay.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result, RowError};
use crate::market::{Corridor, Market, TravelType, YearMonth};

pub const CSV_HEADER: [&str; 6] = [
    "booking_date",
    "checkin_date",
    "nights",
    "city",
    "corridor",
    "travel_type",
];

/// Default truncation of the lead-time domain (0..=365 days).
pub const DEFAULT_LEAD_CAP: u32 = 365;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BookingRecord {
    pub booking_date: NaiveDate,
    pub checkin_date: NaiveDate,
    pub nights: u32,
    pub city: String,
    pub corridor: Corridor,
    pub travel_type: TravelType,
}

impl BookingRecord {
    /// Calendar days between booking and check-in. Never negative for a parsed record.
    pub fn lead_time(&self) -> u32 {
        (self.checkin_date - self.booking_date).num_days() as u32
    }

    pub fn checkin_month(&self) -> YearMonth {
        YearMonth::of(self.checkin_date)
    }

    pub fn market(&self) -> Market {
        Market::new(self.city.clone(), self.corridor, self.travel_type)
    }

    fn market_ref(&self) -> MarketRef<'_> {
        (&self.city, self.corridor, self.travel_type)
    }
}

type MarketRef<'a> = (&'a str, Corridor, TravelType);

/// How [`parse_bookings`] treats invalid rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Fail on the first invalid row.
    #[default]
    Strict,
    /// Skip invalid rows and report them.
    Lenient,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedBookings {
    pub records: Vec<BookingRecord>,
    /// 1-based data row of each record, parallel to `records`.
    pub rows: Vec<usize>,
    pub errors: Vec<RowError>,
}

fn row_err(row: usize, field: &str, message: impl Into<String>) -> RowError {
    RowError {
        row,
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_row(row: usize, rec: &csv::StringRecord) -> std::result::Result<BookingRecord, RowError> {
    if rec.len() != CSV_HEADER.len() {
        return Err(row_err(
            row,
            "row",
            format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
        ));
    }
    let date = |i: usize| {
        NaiveDate::parse_from_str(rec[i].trim(), "%Y-%m-%d")
            .map_err(|_| row_err(row, CSV_HEADER[i], format!("malformed date {:?}", &rec[i])))
    };
    let booking_date = date(0)?;
    let checkin_date = date(1)?;
    let nights: u32 = rec[2]
        .trim()
        .parse()
        .map_err(|_| row_err(row, "nights", format!("not a positive integer: {:?}", &rec[2])))?;
    if nights < 1 {
        return Err(row_err(row, "nights", "nights must be at least 1"));
    }
    let city = rec[3].trim();
    if city.is_empty() {
        return Err(row_err(row, "city", "empty city"));
    }
    let corridor = rec[4].trim().parse().map_err(|m| row_err(row, "corridor", m))?;
    let travel_type = rec[5].trim().parse().map_err(|m| row_err(row, "travel_type", m))?;
    if checkin_date < booking_date {
        return Err(row_err(row, "checkin_date", "negative lead time"));
    }
    Ok(BookingRecord {
        booking_date,
        checkin_date,
        nights,
        city: city.to_string(),
        corridor,
        travel_type,
    })
}

pub fn parse_bookings<R: Read>(source: R, mode: ParseMode) -> Result<ParsedBookings> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .flexible(true)
        .from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().map(str::trim).ne(CSV_HEADER.iter().copied()) {
        return Err(Error::InvalidArgument(format!(
            "bad header {:?}, expected {}",
            header.iter().collect::<Vec<_>>().join(","),
            CSV_HEADER.join(",")
        )));
    }
    let mut out = ParsedBookings::default();
    let mut rec = csv::StringRecord::new();
    let mut row = 0;
    while reader.read_record(&mut rec)? {
        row += 1;
        match parse_row(row, &rec) {
            Ok(b) => {
                out.records.push(b);
                out.rows.push(row);
            }
            Err(e) => match mode {
                ParseMode::Strict => return Err(Error::Row(e)),
                ParseMode::Lenient => out.errors.push(e),
            },
        }
    }
    Ok(out)
}

pub fn write_bookings<W: Write>(sink: W, records: &[BookingRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.booking_date.to_string().as_str(),
            r.checkin_date.to_string().as_str(),
            r.nights.to_string().as_str(),
            r.city.as_str(),
            r.corridor.as_str(),
            r.travel_type.as_str(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<bookings>", e))?;
    Ok(())
}

/// All bookings of one market whose check-in falls in `month`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyCohort {
    pub month: YearMonth,
    pub market: Market,
    pub records: Vec<BookingRecord>,
}

impl MonthlyCohort {
    pub fn total_nights(&self) -> u64 {
        self.records.iter().map(|r| u64::from(r.nights)).sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Grouping {
    /// Sorted by (month, market).
    pub cohorts: Vec<MonthlyCohort>,
    pub excluded_over_cap: usize,
}

impl Grouping {
    pub fn kept(&self) -> usize {
        self.cohorts.iter().map(|c| c.records.len()).sum()
    }
}

/// Partition records by (check-in month, market), dropping and counting those
/// with lead time above `lead_cap`.
pub fn group_by_month(records: &[BookingRecord], lead_cap: u32) -> Result<Grouping> {
    if lead_cap < 1 {
        return Err(Error::InvalidArgument("lead cap must be at least 1".into()));
    }
    let mut groups: BTreeMap<(YearMonth, MarketRef<'_>), Vec<BookingRecord>> = BTreeMap::new();
    let mut excluded = 0;
    for r in records {
        if r.lead_time() > lead_cap {
            excluded += 1;
            continue;
        }
        groups
            .entry((r.checkin_month(), r.market_ref()))
            .or_default()
            .push(r.clone());
    }
    let cohorts = groups
        .into_iter()
        .map(|((month, (city, corridor, travel_type)), records)| MonthlyCohort {
            month,
            market: Market::new(city, corridor, travel_type),
            records,
        })
        .collect();
    Ok(Grouping {
        cohorts,
        excluded_over_cap: excluded,
    })
}

/// Summary emitted by `ingest-check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusionReport {
    pub total: usize,
    pub kept: usize,
    pub excluded_over_cap: usize,
    pub errors: Vec<RowError>,
}

impl ExclusionReport {
    pub fn new(parsed: &ParsedBookings, grouping: &Grouping) -> Self {
        Self {
            total: parsed.records.len() + parsed.errors.len(),
            kept: grouping.kept(),
            excluded_over_cap: grouping.excluded_over_cap,
            errors: parsed.errors.clone(),
        }
    }
}
