//! Summary tables: per-year statistics ratios and per-year divergence quantiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distribution::DescriptiveStats;
use crate::divergence::DivergenceSeries;
use crate::error::{Error, Result};
use crate::stats::{mean, quantile_sorted, sorted};

/// Which year a ratio row divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    PriorYear,
    Baseline { year: i32 },
}

impl std::fmt::Display for RatioMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RatioMode::PriorYear => f.write_str("prior_year"),
            RatioMode::Baseline { year } => write!(f, "baseline:{year}"),
        }
    }
}

/// `stat(year) / stat(reference)`; `None` where the reference statistic is 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub year: i32,
    pub reference_year: i32,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioTable {
    pub mode: RatioMode,
    pub rows: Vec<RatioRow>,
    /// Omitted rows and undefined cells, in words.
    pub notes: Vec<String>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

pub fn yoy_ratio_table(stats: &BTreeMap<i32, DescriptiveStats>, mode: RatioMode) -> Result<RatioTable> {
    if stats.len() < 2 {
        return Err(Error::InsufficientHistory(format!(
            "ratio table needs two years of statistics, got {}",
            stats.len()
        )));
    }
    if let RatioMode::Baseline { year } = mode {
        if !stats.contains_key(&year) {
            return Err(Error::MissingBaseline(year));
        }
    }
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (&year, s) in stats {
        let reference_year = match mode {
            RatioMode::PriorYear => year - 1,
            RatioMode::Baseline { year: b } if b == year => continue,
            RatioMode::Baseline { year: b } => b,
        };
        let Some(r) = stats.get(&reference_year) else {
            if year != *stats.keys().next().expect("non-empty") {
                notes.push(format!("{year}: no statistics for {reference_year}, row omitted"));
            }
            continue;
        };
        let row = RatioRow {
            year,
            reference_year,
            mean: ratio(s.mean, r.mean),
            median: ratio(s.median, r.median),
            sd: ratio(s.sd, r.sd),
        };
        for (name, cell) in [("mean", row.mean), ("median", row.median), ("sd", row.sd)] {
            if cell.is_none() {
                notes.push(format!("{year}: {name} of {reference_year} is 0, ratio undefined"));
            }
        }
        rows.push(row);
    }
    Ok(RatioTable { mode, rows, notes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnualDivergence {
    pub year: i32,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q025: f64,
    pub q0975: f64,
}

/// Calendar-year mean, median and 2.5%/97.5% quantiles (linear interpolation
/// between order statistics) of a monthly series.
pub fn annual_divergence_summary(series: &DivergenceSeries) -> Result<Vec<AnnualDivergence>> {
    if series.points.is_empty() {
        return Err(Error::InsufficientHistory(format!("series {} is empty", series.label())));
    }
    let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for (m, v) in &series.points {
        by_year.entry(m.year()).or_default().push(*v);
    }
    Ok(by_year
        .into_iter()
        .map(|(year, values)| {
            let s = sorted(&values);
            AnnualDivergence {
                year,
                n: s.len(),
                mean: mean(&s),
                median: quantile_sorted(&s, 0.5),
                q025: quantile_sorted(&s, 0.025),
                q0975: quantile_sorted(&s, 0.975),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::DivergenceMode;
    use crate::market::YearMonth;

    fn st(mean: f64, median: f64, sd: f64) -> DescriptiveStats {
        DescriptiveStats {
            mean,
            median,
            sd,
            weighted: true,
            degenerate: false,
        }
    }

    #[test]
    fn identical_years_give_unit_ratios() {
        let stats: BTreeMap<_, _> = (2019..=2021).map(|y| (y, st(40.0, 20.0, 30.0))).collect();
        let t = yoy_ratio_table(&stats, RatioMode::PriorYear).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.mean == Some(1.0) && r.median == Some(1.0) && r.sd == Some(1.0)));
        assert!(t.notes.is_empty());
    }

    #[test]
    fn hand_ratio_and_gaps() {
        let stats: BTreeMap<_, _> = [(2019, st(44.0, 0.0, 30.0)), (2020, st(46.0, 10.0, 30.0)), (2022, st(1.0, 1.0, 1.0))]
            .into_iter()
            .collect();
        let t = yoy_ratio_table(&stats, RatioMode::PriorYear).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!((t.rows[0].mean.unwrap() - 46.0 / 44.0).abs() < 1e-15);
        assert!((t.rows[0].mean.unwrap() - 1.045).abs() < 5e-4);
        assert_eq!(t.rows[0].median, None);
        assert_eq!(t.notes.len(), 2);
        let b = yoy_ratio_table(&stats, RatioMode::Baseline { year: 2019 }).unwrap();
        assert_eq!(b.rows.iter().map(|r| r.year).collect::<Vec<_>>(), [2020, 2022]);
        assert!(yoy_ratio_table(&stats, RatioMode::Baseline { year: 2018 }).is_err());
        assert!(yoy_ratio_table(&BTreeMap::new(), RatioMode::PriorYear).is_err());
    }

    fn series(values: &[f64]) -> DivergenceSeries {
        let start = YearMonth::new(2020, 1).unwrap();
        DivergenceSeries {
            mode: DivergenceMode::Yoy,
            market: None,
            points: values.iter().enumerate().map(|(i, v)| (start.add_months(i as i64), *v)).collect(),
            gaps: vec![],
        }
    }

    #[test]
    fn constant_and_single_point_years() {
        let mut v = vec![0.04; 12];
        v.push(0.3);
        let s = annual_divergence_summary(&series(&v)).unwrap();
        assert_eq!(s.len(), 2);
        let a = s[0];
        assert!([a.mean, a.median, a.q025, a.q0975].iter().all(|x| (x - 0.04).abs() < 1e-15));
        let b = s[1];
        assert_eq!((b.n, b.mean, b.median, b.q025, b.q0975), (1, 0.3, 0.3, 0.3, 0.3));
    }

    #[test]
    fn matches_brute_force_order_statistics() {
        // shuffled 0.01..=0.12
        let v: Vec<f64> = [7, 3, 12, 1, 9, 5, 11, 2, 8, 4, 10, 6].iter().map(|k| *k as f64 / 100.0).collect();
        let s = annual_divergence_summary(&series(&v)).unwrap()[0];
        let mut o = v.clone();
        o.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // h = 11p: 0.275 and 10.725
        let q025 = o[0] + 0.275 * (o[1] - o[0]);
        let q0975 = o[10] + 0.725 * (o[11] - o[10]);
        assert!((s.q025 - q025).abs() < 1e-15);
        assert!((s.q0975 - q0975).abs() < 1e-15);
        assert!((s.median - 0.065).abs() < 1e-15);
        assert!((s.mean - 0.065).abs() < 1e-15);
        assert!(annual_divergence_summary(&series(&[])).is_err());
    }
}
