//! Nights-weighted lead-time distributions and their descriptive statistics.
//!
//! For the bookings of one (month, market) cohort, `w(Δ)` is the total number of
//! nights booked exactly `Δ` days ahead and the distribution is `w(Δ) / Σ w`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::MonthlyCohort;
use crate::market::{Market, YearMonth};

/// Absolute tolerance on `Σ mass = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadTimeDistribution {
    pub month: Option<YearMonth>,
    pub market: Option<Market>,
    /// Indexed by lead time `Δ = 0..=lead_cap`.
    pub mass: Vec<f64>,
    pub total_nights: f64,
}

/// Checks that `v` is non-negative, finite, and sums to one.
pub fn check_probability_vector(which: &'static str, v: &[f64]) -> Result<()> {
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
        return Err(Error::NotNormalized {
            which,
            detail: format!("entry {i} is {x}"),
        });
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized {
            which,
            detail: format!("sums to {sum}"),
        });
    }
    Ok(())
}

impl LeadTimeDistribution {
    /// Wraps an already-normalized mass vector (fixtures, CSV input).
    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::InvalidArgument(
                "a lead-time distribution needs at least two bins".into(),
            ));
        }
        check_probability_vector("distribution", &mass)?;
        Ok(Self {
            month: None,
            market: None,
            mass,
            total_nights: 1.0,
        })
    }

    pub fn lead_cap(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            delta: usize,
            mass: f64,
        }
        let mut rdr = csv::Reader::from_reader(source);
        let mut mass = Vec::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row?;
            if row.delta != i {
                return Err(Error::InvalidArgument(format!(
                    "distribution rows must list delta 0,1,2,... in order; row {} has delta {}",
                    i + 1,
                    row.delta
                )));
            }
            mass.push(row.mass);
        }
        Self::from_mass(mass)
    }

    /// Writes `delta,mass` rows at full precision.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["delta", "mass"])?;
        for (d, m) in self.mass.iter().enumerate() {
            w.write_record([d.to_string(), m.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<distribution>", e))?;
        Ok(())
    }
}

/// Builds the nights-weighted distribution of one cohort over `0..=lead_cap`.
///
/// Records with a lead time above the cap are ignored (grouping already
/// excludes them).
pub fn build_distribution(cohort: &MonthlyCohort, lead_cap: u32) -> Result<LeadTimeDistribution> {
    let mut weights = vec![0u64; lead_cap as usize + 1];
    for r in &cohort.records {
        let d = r.lead_time();
        if d <= lead_cap {
            weights[d as usize] += u64::from(r.nights);
        }
    }
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCohort);
    }
    let total = total as f64;
    Ok(LeadTimeDistribution {
        month: Some(cohort.month),
        market: Some(cohort.market.clone()),
        mass: weights.iter().map(|&w| w as f64 / total).collect(),
        total_nights: total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsMode {
    /// Each night counts once (consistent with the distribution).
    #[default]
    Weighted,
    /// Each booking counts once, sample SD with the n-1 denominator.
    PerTrip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub weighted: bool,
    /// Set when a sample SD was requested for a single observation; `sd` is then 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

/// Weighted statistics of a mass vector: mean, lower weighted median
/// (smallest Δ with cumulative mass ≥ 0.5), and population SD.
pub fn describe(dist: &LeadTimeDistribution) -> DescriptiveStats {
    describe_mass(&dist.mass)
}

pub fn describe_mass(mass: &[f64]) -> DescriptiveStats {
    let mean: f64 = mass.iter().enumerate().map(|(d, m)| d as f64 * m).sum();
    let var: f64 = mass
        .iter()
        .enumerate()
        .map(|(d, m)| (d as f64 - mean).powi(2) * m)
        .sum();
    let mut cum = 0.0;
    let mut median = mass.len() - 1;
    for (d, m) in mass.iter().enumerate() {
        cum += m;
        // half-ulp slack so exact halves (0.25 + 0.25) land on the lower bin
        if cum >= 0.5 - 1e-12 {
            median = d;
            break;
        }
    }
    DescriptiveStats {
        mean,
        median: median as f64,
        sd: var.max(0.0).sqrt(),
        weighted: true,
        degenerate: false,
    }
}

/// Per-trip statistics over a list of lead times: arithmetic mean, middle value
/// (mean of the two middle values for even n), and sample SD with n-1.
pub fn describe_lead_times(leads: &[f64]) -> Result<DescriptiveStats> {
    if leads.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let n = leads.len();
    let mean = leads.iter().sum::<f64>() / n as f64;
    let mut sorted = leads.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let (sd, degenerate) = if n == 1 {
        log::warn!("sample SD of a single lead time is undefined; reporting 0");
        (0.0, true)
    } else {
        let ss: f64 = leads.iter().map(|x| (x - mean).powi(2)).sum();
        ((ss / (n - 1) as f64).sqrt(), false)
    };
    Ok(DescriptiveStats {
        mean,
        median,
        sd,
        weighted: false,
        degenerate,
    })
}

/// Statistics of a cohort in either mode. Weighted mode goes through the
/// distribution, so it shares its truncation at `lead_cap`.
pub fn describe_cohort(cohort: &MonthlyCohort, mode: StatsMode, lead_cap: u32) -> Result<DescriptiveStats> {
    match mode {
        StatsMode::Weighted => Ok(describe(&build_distribution(cohort, lead_cap)?)),
        StatsMode::PerTrip => {
            let leads: Vec<f64> = cohort
                .records
                .iter()
                .map(|r| r.lead_time())
                .filter(|&d| d <= lead_cap)
                .map(f64::from)
                .collect();
            describe_lead_times(&leads)
        }
    }
}

/// Cumulative mass `C(Δ) = Σ_{δ≤Δ} mass[δ]`, indexed by window position.
pub fn pickup_curve(dist: &LeadTimeDistribution) -> Vec<f64> {
    cumulative(&dist.mass)
}

pub fn cumulative(mass: &[f64]) -> Vec<f64> {
    mass.iter()
        .scan(0.0, |acc, m| {
            *acc += m;
            Some(*acc)
        })
        .collect()
}

/// Window position reached `days_before` days ahead of check-in in a window of
/// `window` days. Returns `None` when `days_before > window`.
pub fn elapsed_index(days_before: usize, window: usize) -> Option<usize> {
    window.checked_sub(days_before)
}

/// Inverse of [`elapsed_index`].
pub fn days_before(elapsed: usize, window: usize) -> Option<usize> {
    window.checked_sub(elapsed)
}
