//! Bundle rendering, atomic writes, and spot-check verification.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{AnalysisConfig, ReportBundle};
use crate::distribution::{build_distribution, describe_cohort};
use crate::divergence::{baseline_series, partial_series, write_series_csv, yoy_series, DivergenceMode, MonthlyDistributions};
use crate::error::{Error, Result};
use crate::ingest::{group_by_month, BookingRecord};
use crate::simulate::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestFile {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: String,
    pub config: AnalysisConfig,
    pub baseline_year: Option<i32>,
    pub input_sha256: String,
    pub input_records: usize,
    pub excluded_over_cap: usize,
    pub markets: Vec<String>,
    pub files: Vec<ManifestFile>,
    pub notes: Vec<String>,
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        fill(&mut w)?;
        w.flush().map_err(|e| Error::io("<bundle>", e))?;
    }
    Ok(buf)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn file_label(mode: &str) -> String {
    mode.replace(':', "-")
}

impl ReportBundle {
    /// Every bundle file as `(relative path, contents)`, manifest last.
    pub fn render(&self) -> Result<Vec<(String, Vec<u8>)>> {
        let mut files = Vec::new();

        files.push((
            "stats/monthly.csv".to_string(),
            csv_bytes(&["market", "month", "bookings", "nights", "mean", "median", "sd", "weighted"], |w| {
                for r in &self.markets {
                    for m in &r.monthly {
                        w.write_record([
                            r.market.to_string(),
                            m.month.to_string(),
                            m.bookings.to_string(),
                            m.nights.to_string(),
                            m.stats.mean.to_string(),
                            m.stats.median.to_string(),
                            m.stats.sd.to_string(),
                            m.stats.weighted.to_string(),
                        ])?;
                    }
                }
                Ok(())
            })?,
        ));
        files.push((
            "stats/annual.csv".to_string(),
            csv_bytes(&["market", "year", "months", "bookings", "nights", "mean", "median", "sd", "weighted"], |w| {
                for r in &self.markets {
                    for a in &r.annual {
                        w.write_record([
                            r.market.to_string(),
                            a.year.to_string(),
                            a.months.to_string(),
                            a.bookings.to_string(),
                            a.nights.to_string(),
                            a.stats.mean.to_string(),
                            a.stats.median.to_string(),
                            a.stats.sd.to_string(),
                            a.stats.weighted.to_string(),
                        ])?;
                    }
                }
                Ok(())
            })?,
        ));
        files.push((
            "stats/ratios.csv".to_string(),
            csv_bytes(&["market", "mode", "year", "reference_year", "mean", "median", "sd"], |w| {
                for r in &self.markets {
                    for t in &r.ratios {
                        for row in &t.rows {
                            w.write_record([
                                r.market.to_string(),
                                t.mode.to_string(),
                                row.year.to_string(),
                                row.reference_year.to_string(),
                                opt(row.mean),
                                opt(row.median),
                                opt(row.sd),
                            ])?;
                        }
                    }
                }
                Ok(())
            })?,
        ));

        let mut series = Vec::new();
        write_series_csv(&mut series, self.markets.iter().flat_map(|r| &r.series))?;
        files.push(("divergence/series.csv".to_string(), series));
        files.push((
            "divergence/summary.csv".to_string(),
            csv_bytes(&["market", "mode", "year", "n", "mean", "median", "q025", "q0975"], |w| {
                for r in &self.markets {
                    for (mode, rows) in &r.summaries {
                        for s in rows {
                            w.write_record([
                                r.market.to_string(),
                                mode.clone(),
                                s.year.to_string(),
                                s.n.to_string(),
                                s.mean.to_string(),
                                s.median.to_string(),
                                s.q025.to_string(),
                                s.q0975.to_string(),
                            ])?;
                        }
                    }
                }
                Ok(())
            })?,
        ));
        if self.config.warning_threshold.is_some() {
            files.push((
                "divergence/flags.csv".to_string(),
                csv_bytes(&["market", "month", "value", "threshold"], |w| {
                    for r in &self.markets {
                        for f in &r.flags {
                            w.write_record([
                                r.market.to_string(),
                                f.month.to_string(),
                                f.value.to_string(),
                                f.threshold.to_string(),
                            ])?;
                        }
                    }
                    Ok(())
                })?,
            ));
        }

        for r in &self.markets {
            for (mode, d) in &r.stl {
                let mut buf = Vec::new();
                d.write_csv(&mut buf)?;
                files.push((format!("stl/{}_{}.csv", r.market.slug(), file_label(mode)), buf));
            }
        }
        for (mode, m) in &self.correlations {
            let mut buf = Vec::new();
            m.write_csv(&mut buf)?;
            files.push((format!("correlation/{}.csv", file_label(mode)), buf));
        }
        for r in self.markets.iter().filter(|r| !r.forecasts.is_empty()) {
            let header = ["month", "d", "delta", "B_obs", "C_hist", "forecast", "actual", "rel_error", "bound"];
            let buf = csv_bytes(&header, |w| {
                for f in &r.forecasts {
                    for e in &f.sweep {
                        w.write_record([
                            f.month.to_string(),
                            f.d.to_string(),
                            e.elapsed_index.to_string(),
                            e.observed_bookings.to_string(),
                            e.hist_cumulative.to_string(),
                            opt(e.forecast),
                            opt(e.actual),
                            opt(e.relative_error),
                            opt(e.bound),
                        ])?;
                    }
                }
                Ok(())
            })?;
            files.push((format!("forecast/{}.csv", r.market.slug()), buf));
        }

        let mut notes = self.notes.clone();
        for r in &self.markets {
            notes.extend(r.notes.iter().map(|n| format!("{}: {n}", r.market)));
        }
        // paths are left out so the same analysis is byte-identical wherever it is written
        let config = AnalysisConfig {
            output_dir: None,
            input: None,
            ..self.config.clone()
        };
        let manifest = Manifest {
            version: self.version.clone(),
            config,
            baseline_year: self.baseline_year,
            input_sha256: self.input_sha256.clone(),
            input_records: self.input_records,
            excluded_over_cap: self.excluded_over_cap,
            markets: self.markets.iter().map(|r| r.market.to_string()).collect(),
            files: files
                .iter()
                .map(|(path, bytes)| ManifestFile {
                    path: path.clone(),
                    bytes: bytes.len(),
                    sha256: hex::encode(Sha256::digest(bytes)),
                })
                .collect(),
            notes,
        };
        let mut json = serde_json::to_vec_pretty(&manifest)?;
        json.push(b'\n');
        files.push(("manifest.json".to_string(), json));
        Ok(files)
    }

    /// Writes the bundle under `dir`. Each file goes to a temporary name first
    /// and is renamed into place, so an interrupted run never leaves a
    /// truncated report. Returns the relative paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        let files = self.render()?;
        for (rel, bytes) in &files {
            write_atomic(&dir.join(rel), bytes)?;
        }
        log::info!("wrote {} files to {}", files.len(), dir.display());
        Ok(files.into_iter().map(|f| f.0).collect())
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

/// Recomputes `checks` randomly chosen bundle cells by calling the underlying
/// modules directly on the raw bookings and lists any cell that disagrees.
pub fn verify_bundle(
    bookings: &[BookingRecord],
    bundle: &ReportBundle,
    checks: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let config = &bundle.config;
    let grouping = group_by_month(bookings, config.lead_cap)?;
    let mut rng = rng_for(seed);
    let mut mismatches = Vec::new();
    let mut checked = 0;
    let reports: Vec<_> = bundle.markets.iter().filter(|r| !r.monthly.is_empty()).collect();
    if reports.is_empty() {
        return Ok(VerifyReport { checked, mismatches });
    }
    for _ in 0..checks {
        let r = reports[rng.random_range(0..reports.len())];
        let cohorts: Vec<_> = grouping.cohorts.iter().filter(|c| c.market == r.market).collect();
        let row = &r.monthly[rng.random_range(0..r.monthly.len())];
        let Some(cohort) = cohorts.iter().find(|c| c.month == row.month) else {
            mismatches.push(format!("{} {}: month not in input", r.market, row.month));
            continue;
        };
        let direct = describe_cohort(cohort, config.stats_mode(), config.lead_cap)?;
        checked += 1;
        if direct != row.stats {
            mismatches.push(format!("{} {}: monthly stats differ", r.market, row.month));
        }

        if r.series.is_empty() {
            continue;
        }
        let s = &r.series[rng.random_range(0..r.series.len())];
        let mut dists = MonthlyDistributions::new();
        for c in &cohorts {
            let mut d = build_distribution(c, config.lead_cap)?;
            d.market = Some(r.market.clone());
            dists.insert(c.month, d);
        }
        let direct = match s.mode {
            DivergenceMode::Yoy => yoy_series(&dists)?,
            DivergenceMode::Baseline { year } => baseline_series(&dists, year)?,
            DivergenceMode::Partial { horizon } => partial_series(&dists, horizon, config.reference_years)?,
        };
        let (month, value) = s.points[rng.random_range(0..s.points.len())];
        checked += 1;
        if direct.get(month) != Some(value) {
            mismatches.push(format!("{} {} {month}: divergence differs", r.market, s.mode));
        }
    }
    Ok(VerifyReport { checked, mismatches })
}
