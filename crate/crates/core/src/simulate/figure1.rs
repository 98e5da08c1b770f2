//! Two lead-time distributions with equal mean and SD but different shapes.

use crate::divergence::l1_distance;
use crate::error::{Error, Result};

pub const FIGURE1_MEAN: f64 = 188.0;
pub const FIGURE1_SD: f64 = 30.0;
pub const FIGURE1_L1: f64 = 0.25;
const SUPPORT: usize = 366;

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Pair {
    /// Discretized normal(188, 30) on 0..=365.
    pub a: Vec<f64>,
    /// Equal-weight mixture of normals at `188 ± offset` with `component_sd`.
    pub b: Vec<f64>,
    pub offset: f64,
    pub component_sd: f64,
}

fn discretized_normal(mean: f64, sd: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..SUPPORT)
        .map(|x| (-0.5 * ((x as f64 - mean) / sd).powi(2)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Symmetric two-normal mixture with total variance `FIGURE1_SD²`.
fn bimodal(offset: f64) -> (Vec<f64>, f64) {
    let sd = (FIGURE1_SD * FIGURE1_SD - offset * offset).sqrt();
    let lo = discretized_normal(FIGURE1_MEAN - offset, sd);
    let hi = discretized_normal(FIGURE1_MEAN + offset, sd);
    (lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect(), sd)
}

/// Solves for the mixture separation whose L1 distance to the unimodal
/// distribution is 0.25. The distance grows monotonically with the offset, so
/// bisection on `(0, σ)` converges.
pub fn make_figure1_pair() -> Result<Figure1Pair> {
    let a = discretized_normal(FIGURE1_MEAN, FIGURE1_SD);
    let gap = |offset: f64| -> Result<f64> { Ok(l1_distance(&a, &bimodal(offset).0)? - FIGURE1_L1) };
    let (mut lo, mut hi) = (0.0, 0.99 * FIGURE1_SD);
    let (g_lo, g_hi) = (gap(lo)?, gap(hi)?);
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::NoConvergence(format!(
            "target L1 not bracketed: gap {g_lo} at offset {lo}, {g_hi} at offset {hi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let offset = 0.5 * (lo + hi);
    let (b, component_sd) = bimodal(offset);
    Ok(Figure1Pair {
        a,
        b,
        offset,
        component_sd,
    })
}
