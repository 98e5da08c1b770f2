//! End-to-end analysis: bookings in, report bundle out.
//!
//! Each market runs independently (in parallel when available) and the results
//! are assembled in market order, so the bundle never depends on scheduling.

mod bundle;
mod tables;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use bundle::{verify_bundle, Manifest, ManifestFile, VerifyReport};
pub use tables::{annual_divergence_summary, yoy_ratio_table, AnnualDivergence, RatioMode, RatioRow, RatioTable};

use crate::decompose::{decompose_divergence, DecomposedSeries, StlParams};
use crate::distribution::{build_distribution, describe_cohort, describe_lead_times, describe_mass, DescriptiveStats, LeadTimeDistribution, StatsMode};
use crate::divergence::{
    baseline_series, correlation_matrix, early_warning, partial_series, yoy_series, CorrelationMatrix,
    DivergenceMode, DivergenceSeries, Flag, MonthlyDistributions,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::ingest::{group_by_month, write_bookings, BookingRecord, MonthlyCohort, DEFAULT_LEAD_CAP};
use crate::market::{Market, YearMonth};
use crate::pickup::{evaluate_horizon_sweep, ForecastEvaluation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub lead_cap: u32,
    /// Reference year for baseline divergence and ratios. Defaults to the
    /// first calendar year with all twelve months present for every market.
    pub baseline_year: Option<i32>,
    pub stl: StlParams,
    pub partial_horizons: Vec<usize>,
    /// Markets to keep (`city/corridor/travel_type`); all when absent.
    pub markets: Option<Vec<String>>,
    pub weighted_stats: bool,
    /// Prior years averaged into the partial-horizon reference; all when absent.
    pub reference_years: Option<usize>,
    pub correlation_lag: i64,
    /// Early-warning threshold on the partial-horizon series.
    pub warning_threshold: Option<f64>,
    /// Divergence used for the forecast-error bound in the sweeps. Defaults to
    /// the largest year-over-year divergence observed in the market.
    pub forecast_d: Option<f64>,
    pub output_dir: Option<PathBuf>,
    /// Bookings CSV, when the config is used from the command line.
    pub input: Option<PathBuf>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            lead_cap: DEFAULT_LEAD_CAP,
            baseline_year: None,
            stl: StlParams::default(),
            partial_horizons: vec![30],
            markets: None,
            weighted_stats: true,
            reference_years: None,
            correlation_lag: 0,
            warning_threshold: None,
            forecast_d: None,
            output_dir: None,
            input: None,
        }
    }
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.lead_cap < 1 {
            return bad("lead_cap must be at least 1".into());
        }
        if let Some(h) = self.partial_horizons.iter().find(|h| **h > self.lead_cap as usize) {
            return bad(format!("partial horizon {h} exceeds lead_cap {}", self.lead_cap));
        }
        if self.reference_years == Some(0) {
            return bad("reference_years must be at least 1".into());
        }
        if let Some(t) = self.warning_threshold {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("warning_threshold must lie in (0, 1), got {t}"));
            }
        }
        if let Some(d) = self.forecast_d {
            if !(0.0..=1.0).contains(&d) {
                return bad(format!("forecast_d must lie in [0, 1], got {d}"));
            }
        }
        self.stl.validate()
    }

    fn stats_mode(&self) -> StatsMode {
        if self.weighted_stats {
            StatsMode::Weighted
        } else {
            StatsMode::PerTrip
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthlyStats {
    pub month: YearMonth,
    pub bookings: usize,
    pub nights: u64,
    pub stats: DescriptiveStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnualStats {
    pub year: i32,
    pub months: usize,
    pub bookings: usize,
    pub nights: u64,
    pub stats: DescriptiveStats,
}

/// Horizon sweep of one check-in month forecast from the same month a year earlier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthSweep {
    pub month: YearMonth,
    pub d: f64,
    pub sweep: Vec<ForecastEvaluation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketReport {
    pub market: Market,
    pub monthly: Vec<MonthlyStats>,
    pub annual: Vec<AnnualStats>,
    pub ratios: Vec<RatioTable>,
    pub series: Vec<DivergenceSeries>,
    pub summaries: Vec<(String, Vec<AnnualDivergence>)>,
    pub stl: Vec<(String, DecomposedSeries)>,
    pub forecasts: Vec<MonthSweep>,
    pub flags: Vec<Flag>,
    pub notes: Vec<String>,
}

impl MarketReport {
    pub fn series(&self, mode: &str) -> Option<&DivergenceSeries> {
        self.series.iter().find(|s| s.mode.to_string() == mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub version: String,
    pub config: AnalysisConfig,
    pub baseline_year: Option<i32>,
    /// SHA-256 of the bookings in canonical CSV form.
    pub input_sha256: String,
    pub input_records: usize,
    pub excluded_over_cap: usize,
    pub markets: Vec<MarketReport>,
    /// Cross-market correlation matrices keyed by series mode.
    pub correlations: Vec<(String, CorrelationMatrix)>,
    pub notes: Vec<String>,
}

impl ReportBundle {
    pub fn market(&self, market: &Market) -> Option<&MarketReport> {
        self.markets.iter().find(|m| &m.market == market)
    }
}

pub fn bookings_sha256(records: &[BookingRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_bookings(&mut buf, records)?;
    Ok(hex::encode(Sha256::digest(&buf)))
}

/// Nights-weighted distributions per market and check-in month.
pub fn monthly_distributions(
    bookings: &[BookingRecord],
    lead_cap: u32,
) -> Result<BTreeMap<Market, MonthlyDistributions>> {
    let mut out: BTreeMap<Market, MonthlyDistributions> = BTreeMap::new();
    for c in group_by_month(bookings, lead_cap)?.cohorts {
        let mut d = build_distribution(&c, lead_cap).map_err(|e| e.context(format!("{} {}", c.market, c.month)))?;
        d.market = Some(c.market.clone());
        out.entry(c.market).or_default().insert(c.month, d);
    }
    Ok(out)
}

fn first_full_year(by_market: &BTreeMap<Market, Vec<MonthlyCohort>>) -> Option<i32> {
    let years: Vec<BTreeMap<i32, usize>> = by_market
        .values()
        .map(|cs| {
            let mut n = BTreeMap::new();
            for c in cs {
                *n.entry(c.month.year()).or_insert(0) += 1;
            }
            n
        })
        .collect();
    let first = years.first()?;
    first
        .iter()
        .filter(|(_, n)| **n == 12)
        .map(|(y, _)| *y)
        .find(|y| years.iter().all(|m| m.get(y) == Some(&12)))
}

/// Nights-weighted distribution pooled over several months.
fn pooled(cohorts: &[&MonthlyCohort], lead_cap: u32) -> Result<LeadTimeDistribution> {
    let mut records = Vec::new();
    for c in cohorts {
        records.extend(c.records.iter().cloned());
    }
    let pool = MonthlyCohort {
        month: cohorts[0].month,
        market: cohorts[0].market.clone(),
        records,
    };
    build_distribution(&pool, lead_cap)
}

fn annual_stats(cohorts: &[MonthlyCohort], config: &AnalysisConfig) -> Result<Vec<AnnualStats>> {
    let mut by_year: BTreeMap<i32, Vec<&MonthlyCohort>> = BTreeMap::new();
    for c in cohorts {
        by_year.entry(c.month.year()).or_default().push(c);
    }
    by_year
        .into_iter()
        .map(|(year, cs)| {
            let stats = match config.stats_mode() {
                StatsMode::Weighted => describe_mass(&pooled(&cs, config.lead_cap)?.mass),
                StatsMode::PerTrip => {
                    let leads: Vec<f64> = cs
                        .iter()
                        .flat_map(|c| c.records.iter().map(|r| f64::from(r.lead_time())))
                        .collect();
                    describe_lead_times(&leads)?
                }
            };
            Ok(AnnualStats {
                year,
                months: cs.len(),
                bookings: cs.iter().map(|c| c.records.len()).sum(),
                nights: cs.iter().map(|c| c.total_nights()).sum(),
                stats,
            })
        })
        .collect::<Result<_>>()
        .map_err(|e: Error| e.context("annual statistics"))
}

/// Recoverable shortfalls (too little history for a table) become notes;
/// anything else is an error.
fn soft<T>(r: Result<T>, what: &str, notes: &mut Vec<String>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::InsufficientHistory(_) | Error::SeriesTooShort { .. } | Error::GappedSeries { .. })) => {
            notes.push(format!("{what} skipped: {e}"));
            Ok(None)
        }
        Err(e) => Err(e.context(what.to_string())),
    }
}

fn analyze_market(
    market: &Market,
    cohorts: &[MonthlyCohort],
    baseline_year: Option<i32>,
    config: &AnalysisConfig,
) -> Result<MarketReport> {
    let mut notes = Vec::new();
    let mut dists = MonthlyDistributions::new();
    let mut monthly = Vec::with_capacity(cohorts.len());
    for c in cohorts {
        let ctx = |e: Error| e.context(format!("{market} {}", c.month));
        let mut d = build_distribution(c, config.lead_cap).map_err(ctx)?;
        d.market = Some(market.clone());
        monthly.push(MonthlyStats {
            month: c.month,
            bookings: c.records.len(),
            nights: c.total_nights(),
            stats: describe_cohort(c, config.stats_mode(), config.lead_cap).map_err(ctx)?,
        });
        dists.insert(c.month, d);
    }
    let annual = annual_stats(cohorts, config).map_err(|e| e.context(market.to_string()))?;
    let year_stats: BTreeMap<i32, DescriptiveStats> = annual.iter().map(|a| (a.year, a.stats)).collect();

    let mut ratios = Vec::new();
    let mut modes = vec![RatioMode::PriorYear];
    modes.extend(baseline_year.map(|year| RatioMode::Baseline { year }));
    for mode in modes {
        if let Some(t) = soft(yoy_ratio_table(&year_stats, mode), &format!("{mode} ratios"), &mut notes)? {
            ratios.push(t);
        }
    }

    let mut series = Vec::new();
    series.extend(soft(yoy_series(&dists), "yoy divergence", &mut notes)?);
    if let Some(year) = baseline_year {
        series.extend(soft(baseline_series(&dists, year), "baseline divergence", &mut notes)?);
    }
    for &h in &config.partial_horizons {
        series.extend(soft(
            partial_series(&dists, h, config.reference_years),
            &format!("partial:{h} divergence"),
            &mut notes,
        )?);
    }

    let mut summaries = Vec::new();
    let mut stl = Vec::new();
    for s in &series {
        let label = s.mode.to_string();
        summaries.push((label.clone(), annual_divergence_summary(s)?));
        if matches!(s.mode, DivergenceMode::Partial { .. }) {
            continue;
        }
        if let Some(d) = soft(decompose_divergence(s, &config.stl), &format!("{label} STL"), &mut notes)? {
            stl.push((label, d));
        }
    }

    let mut flags = Vec::new();
    if let Some(t) = config.warning_threshold {
        for s in series.iter().filter(|s| matches!(s.mode, DivergenceMode::Partial { .. })) {
            flags.extend(early_warning(s, t)?);
        }
    }

    let mut forecasts = Vec::new();
    if let Some(yoy) = series.iter().find(|s| s.mode == DivergenceMode::Yoy) {
        let d = config
            .forecast_d
            .unwrap_or_else(|| yoy.values().into_iter().fold(0.0, f64::max));
        for (month, _) in &yoy.points {
            let hist = &dists[&month.add_months(-12)];
            let actual = &dists[month];
            let sweep = evaluate_horizon_sweep(hist, actual, actual.total_nights, d)
                .map_err(|e| e.context(format!("{market} {month} forecast sweep")))?;
            forecasts.push(MonthSweep { month: *month, d, sweep });
        }
    }

    Ok(MarketReport {
        market: market.clone(),
        monthly,
        annual,
        ratios,
        series,
        summaries,
        stl,
        forecasts,
        flags,
        notes,
    })
}

pub fn run_analysis(bookings: &[BookingRecord], config: &AnalysisConfig) -> Result<ReportBundle> {
    run_analysis_with(bookings, config, Execution::available())
}

pub fn run_analysis_with(bookings: &[BookingRecord], config: &AnalysisConfig, mode: Execution) -> Result<ReportBundle> {
    config.validate()?;
    if bookings.is_empty() {
        return Err(Error::InvalidArgument("no bookings to analyze".into()));
    }
    let filter: Option<Vec<Market>> = config
        .markets
        .as_ref()
        .map(|ms| ms.iter().map(|m| m.parse()).collect::<Result<_>>())
        .transpose()?;
    let grouping = group_by_month(bookings, config.lead_cap)?;
    let mut by_market: BTreeMap<Market, Vec<MonthlyCohort>> = BTreeMap::new();
    for c in grouping.cohorts {
        if filter.as_ref().is_none_or(|f| f.contains(&c.market)) {
            by_market.entry(c.market.clone()).or_default().push(c);
        }
    }
    if let Some(f) = &filter {
        let missing: Vec<String> = f.iter().filter(|m| !by_market.contains_key(m)).map(ToString::to_string).collect();
        if !missing.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "market filter matched no bookings for: {}",
                missing.join(", ")
            )));
        }
    }
    if by_market.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no bookings within lead cap {}",
            config.lead_cap
        )));
    }

    let mut notes = Vec::new();
    let baseline_year = match config.baseline_year {
        Some(y) => {
            if let Some((m, _)) = by_market.iter().find(|(_, cs)| !cs.iter().any(|c| c.month.year() == y)) {
                return Err(Error::MissingBaseline(y).context(m.to_string()));
            }
            Some(y)
        }
        None => {
            let y = first_full_year(&by_market);
            if y.is_none() {
                notes.push("no calendar year is complete in every market; baseline tables skipped".into());
            }
            y
        }
    };

    let markets: Vec<(&Market, &Vec<MonthlyCohort>)> = by_market.iter().collect();
    let reports = exec::map(mode, &markets, |(m, cs)| analyze_market(m, cs, baseline_year, config))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut correlations = Vec::new();
    let mut labels: Vec<String> = reports.iter().flat_map(|r| r.series.iter().map(|s| s.mode.to_string())).collect();
    labels.sort();
    labels.dedup();
    for mode in labels {
        let named: Vec<(String, DivergenceSeries)> = reports
            .iter()
            .filter_map(|r| r.series(&mode).map(|s| (r.market.to_string(), s.clone())))
            .collect();
        correlations.push((mode, correlation_matrix(&named, config.correlation_lag)));
    }

    Ok(ReportBundle {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        baseline_year,
        input_sha256: bookings_sha256(bookings)?,
        input_records: bookings.len(),
        excluded_over_cap: grouping.excluded_over_cap,
        markets: reports,
        correlations,
        notes,
    })
}
