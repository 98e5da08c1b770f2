//! Seasonal-trend decomposition by loess, following Cleveland et al. (1990).
//!
//! Inner loop: detrend, smooth each cycle-subseries (extended one step past
//! both ends), low-pass filter the result, remove it to get the seasonal,
//! then smooth the deseasonalized series for the trend. Outer loop: bisquare
//! robustness weights from the remainder.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::loess::fit_at;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeasonalWindow {
    /// Cycle-subseries means: the seasonal pattern repeats exactly.
    Periodic,
    /// Loess span (odd, ≥ 7) along each cycle-subseries.
    Span(usize),
}

impl fmt::Display for SeasonalWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeasonalWindow::Periodic => f.write_str("periodic"),
            SeasonalWindow::Span(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for SeasonalWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "periodic" {
            return Ok(SeasonalWindow::Periodic);
        }
        s.parse()
            .map(SeasonalWindow::Span)
            .map_err(|_| Error::InvalidArgument(format!("seasonal window must be `periodic` or an odd integer, got {s:?}")))
    }
}

impl Serialize for SeasonalWindow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SeasonalWindow::Periodic => s.serialize_str("periodic"),
            SeasonalWindow::Span(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for SeasonalWindow {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Span(usize),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Span(n) => Ok(SeasonalWindow::Span(n)),
            Raw::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// STL tuning. Unset windows take Cleveland's recommended values for the period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StlParams {
    pub period: usize,
    pub seasonal_window: SeasonalWindow,
    pub trend_window: Option<usize>,
    pub low_pass_window: Option<usize>,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub seasonal_degree: usize,
    pub trend_degree: usize,
    pub low_pass_degree: usize,
}

impl Default for StlParams {
    fn default() -> Self {
        Self::new(12)
    }
}

fn next_odd(x: f64) -> usize {
    let n = x.ceil() as usize;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

impl StlParams {
    pub fn new(period: usize) -> Self {
        Self {
            period,
            seasonal_window: SeasonalWindow::Periodic,
            trend_window: None,
            low_pass_window: None,
            inner_iterations: 2,
            outer_iterations: 1,
            seasonal_degree: 1,
            trend_degree: 1,
            low_pass_degree: 1,
        }
    }

    /// Smallest odd integer ≥ 1.5·period / (1 − 1.5/seasonal_window), with a
    /// periodic seasonal treated as an infinite window.
    pub fn effective_trend_window(&self) -> usize {
        self.trend_window.unwrap_or_else(|| {
            let np = self.period as f64;
            match self.seasonal_window {
                SeasonalWindow::Periodic => next_odd(1.5 * np),
                SeasonalWindow::Span(ns) => next_odd(1.5 * np / (1.0 - 1.5 / ns as f64)),
            }
        })
    }

    pub fn effective_low_pass_window(&self) -> usize {
        self.low_pass_window
            .unwrap_or_else(|| next_odd(self.period as f64))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.period < 2 {
            return bad(format!("period must be at least 2, got {}", self.period));
        }
        if let SeasonalWindow::Span(ns) = self.seasonal_window {
            if ns < 7 || ns % 2 == 0 {
                return bad(format!("seasonal window must be odd and at least 7, got {ns}"));
            }
        }
        for (name, w) in [
            ("trend", self.effective_trend_window()),
            ("low-pass", self.effective_low_pass_window()),
        ] {
            if w == 0 || w % 2 == 0 {
                return bad(format!("{name} window must be odd and positive, got {w}"));
            }
        }
        if self.inner_iterations < 1 {
            return bad("inner iterations must be at least 1".into());
        }
        for (name, d) in [
            ("seasonal", self.seasonal_degree),
            ("trend", self.trend_degree),
            ("low-pass", self.low_pass_degree),
        ] {
            if d > 2 {
                return bad(format!("{name} degree must be 0, 1 or 2, got {d}"));
            }
        }
        if self.effective_trend_window() < self.trend_degree + 1
            || self.effective_low_pass_window() < self.low_pass_degree + 1
        {
            return bad("smoothing window smaller than degree + 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StlResult {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub remainder: Vec<f64>,
    /// Weights used in the final pass; all ones without robustness iterations.
    pub robustness_weights: Vec<f64>,
}

impl StlResult {
    pub fn len(&self) -> usize {
        self.trend.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trend.is_empty()
    }

    /// `trend + seasonal + remainder`, summed in that order.
    pub fn reconstruct(&self, i: usize) -> f64 {
        self.trend[i] + self.seasonal[i] + self.remainder[i]
    }

    /// `y − T − S − R` evaluated left to right. The remainder is defined as
    /// `(y − T) − S`, so this is exactly zero for the series that was
    /// decomposed. `reconstruct` can still be off by an ulp when `y` is much
    /// smaller than `T + S`.
    pub fn additivity_gap(&self, y: &[f64], i: usize) -> f64 {
        y[i] - self.trend[i] - self.seasonal[i] - self.remainder[i]
    }
}

pub fn stl_decompose(series: &[f64], params: &StlParams) -> Result<StlResult> {
    params.validate()?;
    let n = series.len();
    let np = params.period;
    if n < 2 * np {
        return Err(Error::SeriesTooShort { len: n, min: 2 * np });
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }

    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut weights: Option<Vec<f64>> = None;
    let mut pass = 0;
    loop {
        inner_loop(series, params, weights.as_deref(), &mut seasonal, &mut trend);
        pass += 1;
        if pass > params.outer_iterations {
            break;
        }
        let fit: Vec<f64> = trend.iter().zip(&seasonal).map(|(t, s)| t + s).collect();
        weights = Some(robustness_weights(series, &fit));
    }

    let remainder = series
        .iter()
        .zip(trend.iter().zip(&seasonal))
        .map(|(&y, (&t, &s))| y - t - s)
        .collect();
    Ok(StlResult {
        trend,
        seasonal,
        remainder,
        robustness_weights: weights.unwrap_or_else(|| vec![1.0; n]),
    })
}

fn inner_loop(
    y: &[f64],
    p: &StlParams,
    rw: Option<&[f64]>,
    seasonal: &mut [f64],
    trend: &mut [f64],
) {
    let n = y.len();
    let np = p.period;
    let nt = p.effective_trend_window();
    let nl = p.effective_low_pass_window();
    let positions: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    for _ in 0..p.inner_iterations {
        let detrended: Vec<f64> = y.iter().zip(trend.iter()).map(|(a, b)| a - b).collect();
        let cycle = cycle_subseries(&detrended, p, rw);
        let low = low_pass(&cycle, np, nl, p.low_pass_degree, &positions);
        for i in 0..n {
            seasonal[i] = cycle[np + i] - low[i];
        }
        let deseasonalized: Vec<f64> = y.iter().zip(seasonal.iter()).map(|(a, b)| a - b).collect();
        for i in 0..n {
            trend[i] = fit_at(&positions, &deseasonalized, rw, positions[i], nt, p.trend_degree).0;
        }
    }
}

/// Smoothed cycle-subseries laid out over `n + 2·period` positions: one
/// extrapolated cycle before and after the data.
fn cycle_subseries(detrended: &[f64], p: &StlParams, rw: Option<&[f64]>) -> Vec<f64> {
    let n = detrended.len();
    let np = p.period;
    let mut out = vec![0.0; n + 2 * np];
    for j in 0..np {
        let idx: Vec<usize> = (j..n).step_by(np).collect();
        let k = idx.len();
        let ys: Vec<f64> = idx.iter().map(|&i| detrended[i]).collect();
        let ws: Option<Vec<f64>> = rw.map(|w| idx.iter().map(|&i| w[i]).collect());
        let smoothed: Vec<f64> = match p.seasonal_window {
            SeasonalWindow::Periodic => {
                let m = weighted_mean(&ys, ws.as_deref());
                vec![m; k + 2]
            }
            SeasonalWindow::Span(ns) => {
                let xs: Vec<f64> = (1..=k).map(|i| i as f64).collect();
                (0..k + 2)
                    .map(|pos| fit_at(&xs, &ys, ws.as_deref(), pos as f64, ns, p.seasonal_degree).0)
                    .collect()
            }
        };
        for (m, v) in smoothed.into_iter().enumerate() {
            out[m * np + j] = v;
        }
    }
    out
}

fn weighted_mean(ys: &[f64], ws: Option<&[f64]>) -> f64 {
    if let Some(w) = ws {
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return ys.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / total;
        }
    }
    ys.iter().sum::<f64>() / ys.len() as f64
}

/// Moving averages of length period, period, 3, then a loess pass.
fn low_pass(cycle: &[f64], np: usize, nl: usize, degree: usize, positions: &[f64]) -> Vec<f64> {
    let a = moving_average(cycle, np);
    let b = moving_average(&a, np);
    let c = moving_average(&b, 3);
    (0..c.len())
        .map(|i| fit_at(positions, &c, None, positions[i], nl, degree).0)
        .collect()
}

fn moving_average(x: &[f64], len: usize) -> Vec<f64> {
    let n = x.len() - len + 1;
    let mut out = Vec::with_capacity(n);
    let mut sum: f64 = x[..len].iter().sum();
    out.push(sum / len as f64);
    for i in 1..n {
        sum += x[i + len - 1] - x[i - 1];
        out.push(sum / len as f64);
    }
    out
}

/// Bisquare weights on `|y − fit|` scaled by six times its median.
fn robustness_weights(y: &[f64], fit: &[f64]) -> Vec<f64> {
    let resid: Vec<f64> = y.iter().zip(fit).map(|(a, b)| (a - b).abs()).collect();
    let mut sorted = resid.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let cmad = 6.0 * median;
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if cmad <= 1e-12 * scale {
        // remainder is numerically zero: nothing to downweight
        return vec![1.0; n];
    }
    let (c1, c9) = (0.001 * cmad, 0.999 * cmad);
    resid
        .iter()
        .map(|&r| {
            if r <= c1 {
                1.0
            } else if r <= c9 {
                (1.0 - (r / cmad).powi(2)).powi(2)
            } else {
                0.0
            }
        })
        .collect()
}
