//! Multiplicative pickup forecasting and the L1-based bound on its relative error.
//!
//! With `C_hist(Δ)` the historical cumulative booking share at window position
//! `Δ`, the forecast is `B_obs / C_hist(Δ)`. When historical and actual
//! distributions differ by normalized L1 distance `D`, the relative error is
//! bounded by `2D(1 − Δ/Δmax) / C_hist(Δ)` under the assumption that the
//! divergence is spread uniformly over the window. The assumption matters:
//! see [`find_bound_violation`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;

use serde::Serialize;

use crate::distribution::{cumulative, pickup_curve, LeadTimeDistribution};
use crate::divergence::l1_distance;
use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sorted};

pub fn pickup_forecast(observed: f64, hist_cumulative: f64) -> Result<f64> {
    if !(observed >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "observed bookings must be non-negative, got {observed}"
        )));
    }
    if !(hist_cumulative > 0.0) {
        return Err(Error::ZeroHistoricalMass);
    }
    if hist_cumulative > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "historical cumulative share {hist_cumulative} exceeds 1"
        )));
    }
    Ok(observed / hist_cumulative)
}

/// `(forecast − actual) / actual`; negative means the forecast was low.
pub fn relative_error(forecast: f64, actual: f64) -> Result<f64> {
    if !(actual > 0.0) {
        return Err(Error::InvalidArgument(format!("actual total must be positive, got {actual}")));
    }
    Ok((forecast - actual) / actual)
}

pub fn error_bound(d: f64, delta: usize, delta_max: usize, hist_cumulative: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::InvalidArgument(format!("D must lie in [0, 1], got {d}")));
    }
    if delta_max == 0 || delta > delta_max {
        return Err(Error::InvalidArgument(format!(
            "window position {delta} outside 0..={delta_max}"
        )));
    }
    if !(hist_cumulative > 0.0) {
        return Err(Error::ZeroHistoricalMass);
    }
    if delta == delta_max {
        return Ok(0.0);
    }
    let remaining = 1.0 - delta as f64 / delta_max as f64;
    Ok(2.0 * d * remaining / hist_cumulative)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastEvaluation {
    pub elapsed_index: usize,
    pub window_length: usize,
    pub observed_bookings: f64,
    pub hist_cumulative: f64,
    /// `None` where no historical mass has accrued yet.
    pub forecast: Option<f64>,
    pub actual: Option<f64>,
    pub relative_error: Option<f64>,
    pub bound: Option<f64>,
}

/// Evaluates the pickup forecast at every window position `0..=Δmax`, with the
/// observed bookings taken from the actual cumulative curve.
pub fn evaluate_horizon_sweep(
    hist: &LeadTimeDistribution,
    actual: &LeadTimeDistribution,
    total_actual: f64,
    d: f64,
) -> Result<Vec<ForecastEvaluation>> {
    if hist.mass.len() != actual.mass.len() {
        return Err(Error::LengthMismatch {
            left: hist.mass.len(),
            right: actual.mass.len(),
        });
    }
    if !(total_actual > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "actual total must be positive, got {total_actual}"
        )));
    }
    let delta_max = hist.lead_cap();
    let c_hist = pickup_curve(hist);
    let c_actual = pickup_curve(actual);
    (0..=delta_max)
        .map(|delta| {
            let observed = c_actual[delta] * total_actual;
            let ch = c_hist[delta];
            let (forecast, rel, bound) = if ch > 0.0 {
                let f = pickup_forecast(observed, ch.min(1.0))?;
                (
                    Some(f),
                    Some(relative_error(f, total_actual)?),
                    Some(error_bound(d, delta, delta_max, ch.min(1.0))?),
                )
            } else {
                (None, None, None)
            };
            Ok(ForecastEvaluation {
                elapsed_index: delta,
                window_length: delta_max,
                observed_bookings: observed,
                hist_cumulative: ch,
                forecast,
                actual: Some(total_actual),
                relative_error: rel,
                bound,
            })
        })
        .collect()
}

/// `delta,B_obs,C_hist,forecast,actual,rel_error,bound`; undefined cells are empty.
pub fn write_sweep_csv<W: Write>(sink: W, sweep: &[ForecastEvaluation]) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["delta", "B_obs", "C_hist", "forecast", "actual", "rel_error", "bound"])?;
    for e in sweep {
        w.write_record([
            e.elapsed_index.to_string(),
            e.observed_bookings.to_string(),
            e.hist_cumulative.to_string(),
            opt(e.forecast),
            opt(e.actual),
            opt(e.relative_error),
            opt(e.bound),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<sweep>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DScenarioSummary {
    #[serde(rename = "max_D")]
    pub max_d: f64,
    #[serde(rename = "mean_D")]
    pub mean_d: f64,
    pub quantiles: std::collections::BTreeMap<String, f64>,
}

/// Summarizes the divergence of historical (hist, actual) pairs, as input for
/// scenario analysis with [`error_bound`].
pub fn estimate_d_scenarios(
    history: &[(LeadTimeDistribution, LeadTimeDistribution)],
) -> Result<DScenarioSummary> {
    if history.is_empty() {
        return Err(Error::InsufficientHistory("no distribution pairs".into()));
    }
    let ds = history
        .iter()
        .map(|(h, a)| l1_distance(&h.mass, &a.mass))
        .collect::<Result<Vec<f64>>>()?;
    let s = sorted(&ds);
    let quantiles = [("q025", 0.025), ("q05", 0.05), ("q50", 0.5), ("q95", 0.95), ("q975", 0.975)]
        .into_iter()
        .map(|(k, p)| (k.to_string(), quantile_sorted(&s, p)))
        .collect();
    Ok(DScenarioSummary {
        max_d: s[s.len() - 1],
        mean_d: ds.iter().sum::<f64>() / ds.len() as f64,
        quantiles,
    })
}

/// A window position where the relative error exceeds the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    pub elapsed_index: usize,
    pub relative_error: f64,
    pub bound: f64,
}

/// Scans a pair of mass vectors for positions where `|ε(Δ)|` exceeds the
/// uniform-divergence bound. Divergence concentrated in the last window
/// positions (the longest lead times) produces such positions; uniform per-bin
/// divergence never does.
pub fn find_bound_violation(hist: &[f64], actual: &[f64]) -> Result<Option<BoundViolation>> {
    let d = l1_distance(hist, actual)?;
    let delta_max = hist.len() - 1;
    let ch = cumulative(hist);
    let ca = cumulative(actual);
    for delta in 0..=delta_max {
        if ch[delta] <= 0.0 {
            continue;
        }
        let eps = ca[delta] / ch[delta] - 1.0;
        let bound = error_bound(d, delta, delta_max, ch[delta].min(1.0))?;
        if eps.abs() > bound + 1e-12 {
            return Ok(Some(BoundViolation {
                elapsed_index: delta,
                relative_error: eps,
                bound,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_forecast() {
        let f = pickup_forecast(723.0, 0.69).unwrap();
        assert!((f - 1047.826).abs() < 1e-3);
        let e = relative_error(f, 1200.0).unwrap();
        assert!((e + 0.12681).abs() < 1e-4);
        assert_eq!(pickup_forecast(512.0, 1.0).unwrap(), 512.0);
        assert_eq!(pickup_forecast(0.0, 0.4).unwrap(), 0.0);
        assert!(matches!(pickup_forecast(10.0, 0.0), Err(Error::ZeroHistoricalMass)));
    }

    #[test]
    fn relative_error_cases() {
        assert_eq!(relative_error(5.0, 5.0).unwrap(), 0.0);
        assert_eq!(relative_error(8.0, 4.0).unwrap(), 1.0);
        assert!(relative_error(1.0, 0.0).is_err());
    }

    #[test]
    fn worked_bounds() {
        // 0.2156 * 2 * 13/30 / 0.69 = 0.270753...
        let b = error_bound(0.2156, 17, 30, 0.69).unwrap();
        assert!((b - 0.2156 * 2.0 * 13.0 / 30.0 / 0.69).abs() < 1e-15);
        assert!((b - 0.2708).abs() < 5e-4);
        let b = error_bound(0.215, 25, 30, 0.90).unwrap();
        assert!((b - 0.0796).abs() < 5e-4);
        assert_eq!(error_bound(0.7, 30, 30, 0.3).unwrap(), 0.0);
        assert!(error_bound(0.2, 31, 30, 0.5).is_err());
        assert!(matches!(error_bound(0.2, 3, 30, 0.0), Err(Error::ZeroHistoricalMass)));
    }

    #[test]
    fn identical_sweep_has_no_error() {
        let d = LeadTimeDistribution::from_mass(vec![0.0, 0.1, 0.2, 0.3, 0.4]).unwrap();
        let sweep = evaluate_horizon_sweep(&d, &d, 100.0, 0.0).unwrap();
        assert_eq!(sweep.len(), 5);
        assert!(sweep[0].forecast.is_none());
        for e in &sweep[1..] {
            assert!(e.relative_error.unwrap().abs() < 1e-12);
        }
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &sweep).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("delta,B_obs,C_hist,forecast,actual,rel_error,bound\n0,0,0,,100,,\n"));
    }

    #[test]
    fn scenario_summary() {
        let pair = |a: f64| {
            (
                LeadTimeDistribution::from_mass(vec![1.0, 0.0]).unwrap(),
                LeadTimeDistribution::from_mass(vec![1.0 - a, a]).unwrap(),
            )
        };
        let s = estimate_d_scenarios(&[pair(0.3)]).unwrap();
        assert!((s.max_d - 0.3).abs() < 1e-15 && (s.mean_d - 0.3).abs() < 1e-15);
        let s = estimate_d_scenarios(&[pair(0.1), pair(0.2), pair(0.3)]).unwrap();
        assert!((s.max_d - 0.3).abs() < 1e-15);
        assert!((s.mean_d - 0.2).abs() < 1e-15);
        assert!(estimate_d_scenarios(&[]).is_err());
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"max_D\"") && json.contains("\"q975\""));
    }

    #[test]
    fn divergence_in_final_positions_breaks_the_bound() {
        // half the mass moves between the last two positions of a ten-step window
        let mut hist = vec![0.0625; 11];
        hist[0] = 0.0;
        hist[9] = 0.0;
        hist[10] = 0.5;
        let mut actual = hist.clone();
        actual[9] = 0.5;
        actual[10] = 0.0;
        let v = find_bound_violation(&hist, &actual).unwrap().expect("violation");
        assert_eq!(v.elapsed_index, 9);
        assert!((v.relative_error - 1.0).abs() < 1e-12);
        assert!((v.bound - 0.2).abs() < 1e-12);
    }
}
