//! Synthetic booking streams for exercising the full pipeline.
//!
//! A scenario is a grid of (market, check-in month) cells. Each cell has a
//! target lead-time shape (the base mixture, reshaped by any shocks covering
//! that month) and a nights budget; bookings are drawn until the budget is met.
//! Every cell draws from its own sub-seeded stream, so the output does not
//! depend on how cells are scheduled. The JSON layout is documented in
//! `docs/scenario.md`.

use chrono::Duration;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{rng_for, sub_seed};
use crate::error::{Error, FieldError, Result};
use crate::exec::{self, Execution};
use crate::ingest::{BookingRecord, DEFAULT_LEAD_CAP};
use crate::market::{Market, YearMonth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Mixture of normals discretized and truncated to `0..=lead_cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadShape {
    pub components: Vec<NormalComponent>,
}

impl LeadShape {
    /// Target probability vector over `0..=lead_cap`. Each component is
    /// normalized over the truncated support before weighting.
    pub fn mass(&self, lead_cap: u32) -> Vec<f64> {
        let n = lead_cap as usize + 1;
        let mut out = vec![0.0; n];
        let total_weight: f64 = self.components.iter().map(|c| c.weight).sum();
        for c in &self.components {
            let raw: Vec<f64> = (0..n)
                .map(|x| (-0.5 * ((x as f64 - c.mean) / c.sd).powi(2)).exp())
                .collect();
            let z: f64 = raw.iter().sum();
            for (o, r) in out.iter_mut().zip(raw) {
                *o += c.weight / total_weight * r / z;
            }
        }
        out
    }
}

/// Multiplicative reshaping of a lead-time shape, renormalized afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeTransform {
    /// Multiply the mass at leads `from..=to` by `factor`.
    Scale { from: u32, to: u32, factor: f64 },
    /// Multiply the mass at lead Δ by `exp(rate·Δ)`. Negative rates shift mass
    /// toward short lead times.
    Tilt { rate: f64 },
}

impl ShapeTransform {
    pub fn apply(&self, mass: &mut [f64]) {
        match *self {
            ShapeTransform::Scale { from, to, factor } => {
                let hi = (to as usize).min(mass.len().saturating_sub(1));
                for m in mass.iter_mut().take(hi + 1).skip(from as usize) {
                    *m *= factor;
                }
            }
            ShapeTransform::Tilt { rate } => {
                for (d, m) in mass.iter_mut().enumerate() {
                    *m *= (rate * d as f64).exp();
                }
            }
        }
        let total: f64 = mass.iter().sum();
        for m in mass.iter_mut() {
            *m /= total;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shock {
    /// First affected check-in month.
    pub start: YearMonth,
    /// Last affected check-in month (inclusive).
    pub end: YearMonth,
    pub transform: ShapeTransform,
    /// Restrict to these markets (`city/corridor/travel_type`); all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markets: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Volume {
    /// Nights per market and check-in month before growth and seasonality.
    pub nights_per_month: f64,
    /// Compound growth per year, e.g. 0.05 for +5%.
    #[serde(default)]
    pub annual_growth: f64,
    /// Multipliers for January..December.
    #[serde(default = "flat_season")]
    pub seasonal: [f64; 12],
}

fn flat_season() -> [f64; 12] {
    [1.0; 12]
}

/// Nights per booking, uniform on `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NightsSpec {
    pub min: u32,
    pub max: u32,
}

impl Default for NightsSpec {
    fn default() -> Self {
        Self { min: 1, max: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub start: YearMonth,
    pub months: usize,
    #[serde(default = "default_cap")]
    pub lead_cap: u32,
    pub markets: Vec<String>,
    pub base_distribution: LeadShape,
    #[serde(default)]
    pub shocks: Vec<Shock>,
    pub volume: Volume,
    #[serde(default)]
    pub nights: NightsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_cap() -> u32 {
    DEFAULT_LEAD_CAP
}

fn field(errors: &mut Vec<FieldError>, name: impl Into<String>, message: impl Into<String>) {
    errors.push(FieldError {
        field: name.into(),
        message: message.into(),
    });
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn end(&self) -> YearMonth {
        self.start.add_months(self.months as i64 - 1)
    }

    pub fn month_list(&self) -> Vec<YearMonth> {
        (0..self.months as i64).map(|i| self.start.add_months(i)).collect()
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<Vec<Market>> {
        let mut errors = Vec::new();
        if self.months == 0 {
            field(&mut errors, "months", "must be at least 1");
        }
        if self.lead_cap == 0 {
            field(&mut errors, "lead_cap", "must be at least 1");
        }
        let mut markets = Vec::new();
        if self.markets.is_empty() {
            field(&mut errors, "markets", "at least one market is required");
        }
        for (i, m) in self.markets.iter().enumerate() {
            match m.parse::<Market>() {
                Ok(m) if markets.contains(&m) => field(&mut errors, format!("markets[{i}]"), "duplicate market"),
                Ok(m) => markets.push(m),
                Err(e) => field(&mut errors, format!("markets[{i}]"), e.to_string()),
            }
        }
        if self.base_distribution.components.is_empty() {
            field(&mut errors, "base_distribution.components", "at least one component is required");
        }
        for (i, c) in self.base_distribution.components.iter().enumerate() {
            let at = |f: &str| format!("base_distribution.components[{i}].{f}");
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                field(&mut errors, at("weight"), "must be positive");
            }
            if !c.mean.is_finite() {
                field(&mut errors, at("mean"), "must be finite");
            }
            if !(c.sd > 0.0 && c.sd.is_finite()) {
                field(&mut errors, at("sd"), "must be positive");
            }
        }
        let end = self.end();
        for (i, s) in self.shocks.iter().enumerate() {
            let at = |f: &str| format!("shocks[{i}].{f}");
            if s.start < self.start || s.start > end {
                field(&mut errors, at("start"), format!("{} outside {}..={}", s.start, self.start, end));
            }
            if s.end < s.start || s.end > end {
                field(&mut errors, at("end"), format!("{} outside {}..={}", s.end, s.start, end));
            }
            match s.transform {
                ShapeTransform::Scale { from, to, factor } => {
                    if from > to || to > self.lead_cap {
                        field(&mut errors, at("transform"), format!("lead range {from}..={to} not within 0..={}", self.lead_cap));
                    }
                    if !(factor > 0.0 && factor.is_finite()) {
                        field(&mut errors, at("transform.factor"), "must be positive");
                    }
                }
                ShapeTransform::Tilt { rate } => {
                    if !rate.is_finite() || (rate * self.lead_cap as f64).abs() > 700.0 {
                        field(&mut errors, at("transform.rate"), "must be finite and keep exp(rate·lead_cap) representable");
                    }
                }
            }
            for (j, m) in s.markets.iter().flatten().enumerate() {
                match m.parse::<Market>() {
                    Ok(m) if !markets.contains(&m) => {
                        field(&mut errors, format!("shocks[{i}].markets[{j}]"), "not listed in markets")
                    }
                    Ok(_) => {}
                    Err(e) => field(&mut errors, format!("shocks[{i}].markets[{j}]"), e.to_string()),
                }
            }
        }
        let v = &self.volume;
        if !(v.nights_per_month > 0.0 && v.nights_per_month.is_finite()) {
            field(&mut errors, "volume.nights_per_month", "must be positive");
        }
        if !(v.annual_growth > -1.0 && v.annual_growth.is_finite()) {
            field(&mut errors, "volume.annual_growth", "must be greater than -1");
        }
        if v.seasonal.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            field(&mut errors, "volume.seasonal", "multipliers must be positive");
        }
        if self.nights.min == 0 || self.nights.min > self.nights.max {
            field(&mut errors, "nights", "need 1 <= min <= max");
        }
        if self.seed.is_none() {
            field(&mut errors, "seed", "required; generation is never unseeded");
        }
        if errors.is_empty() {
            Ok(markets)
        } else {
            Err(Error::InvalidSpec(errors))
        }
    }

    /// Target lead-time shape of one cell, after all shocks covering it.
    pub fn target_mass(&self, market: &Market, month: YearMonth) -> Vec<f64> {
        let mut mass = self.base_distribution.mass(self.lead_cap);
        for s in &self.shocks {
            let covers_market = s
                .markets
                .as_ref()
                .is_none_or(|ms| ms.iter().any(|m| m.parse::<Market>().is_ok_and(|m| &m == market)));
            if covers_market && s.start <= month && month <= s.end {
                s.transform.apply(&mut mass);
            }
        }
        mass
    }

    /// Nights budget of one cell.
    pub fn target_nights(&self, offset: usize, month: YearMonth) -> f64 {
        let v = &self.volume;
        v.nights_per_month
            * (1.0 + v.annual_growth).powf(offset as f64 / 12.0)
            * v.seasonal[month.month() as usize - 1]
    }
}

fn generate_cell(spec: &ScenarioSpec, market: &Market, offset: usize, seed: u64) -> Vec<BookingRecord> {
    let month = spec.start.add_months(offset as i64);
    let mass = spec.target_mass(market, month);
    let mut cdf = Vec::with_capacity(mass.len());
    let mut acc = 0.0;
    for m in &mass {
        acc += m;
        cdf.push(acc);
    }
    let budget = spec.target_nights(offset, month);
    let first = month.first_day();
    let days = month.days();
    let mut rng = rng_for(seed);
    let mut out = Vec::new();
    let mut booked = 0.0;
    while booked < budget {
        let u: f64 = rng.random::<f64>() * acc;
        let lead = cdf.partition_point(|c| *c <= u).min(mass.len() - 1);
        let nights = rng.random_range(spec.nights.min..=spec.nights.max);
        let checkin = first + Duration::days(rng.random_range(0..days) as i64);
        out.push(BookingRecord {
            booking_date: checkin - Duration::days(lead as i64),
            checkin_date: checkin,
            nights,
            city: market.city.clone(),
            corridor: market.corridor,
            travel_type: market.travel_type,
        });
        booked += nights as f64;
    }
    out
}

/// Draws the booking stream described by `spec`, ordered by market (in spec
/// order) then check-in month.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Vec<BookingRecord>> {
    generate_scenario_with(spec, Execution::available())
}

pub fn generate_scenario_with(spec: &ScenarioSpec, mode: Execution) -> Result<Vec<BookingRecord>> {
    let markets = spec.validate()?;
    let seed = spec.seed.expect("validated");
    let cells = markets.len() * spec.months;
    let chunks = exec::map_range(mode, cells, |i| {
        let (mi, offset) = (i / spec.months, i % spec.months);
        generate_cell(spec, &markets[mi], offset, sub_seed(seed, mi as u64, offset as u64))
    });
    Ok(chunks.into_iter().flatten().collect())
}
