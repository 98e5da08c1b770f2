//! Locally weighted polynomial regression with tricube neighborhood weights.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LoessOutput {
    pub fitted: Vec<f64>,
    /// Points whose neighborhood had zero total weight and were refit unweighted.
    pub fallback_points: Vec<usize>,
}

/// Fits every `x[i]` from its `span` nearest neighbors.
///
/// `weights` multiplies the tricube weights (robustness weights in STL).
pub fn loess_smooth(
    x: &[f64],
    y: &[f64],
    span: usize,
    degree: usize,
    weights: Option<&[f64]>,
) -> Result<LoessOutput> {
    validate(x, y, span, degree, weights)?;
    let mut fitted = Vec::with_capacity(x.len());
    let mut fallback_points = Vec::new();
    for (i, &x0) in x.iter().enumerate() {
        let (v, fell_back) = fit_at(x, y, weights, x0, span, degree);
        if fell_back {
            fallback_points.push(i);
        }
        fitted.push(v);
    }
    Ok(LoessOutput {
        fitted,
        fallback_points,
    })
}

pub(crate) fn validate(
    x: &[f64],
    y: &[f64],
    span: usize,
    degree: usize,
    weights: Option<&[f64]>,
) -> Result<()> {
    if degree > 2 {
        return Err(Error::InvalidArgument(format!("loess degree {degree} not in 0..=2")));
    }
    if span < degree + 1 {
        return Err(Error::InvalidArgument(format!(
            "loess span {span} is smaller than degree + 1 = {}",
            degree + 1
        )));
    }
    if x.is_empty() || x.len() != y.len() || weights.is_some_and(|w| w.len() != x.len()) {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::InvalidArgument("loess abscissae must be strictly increasing".into()));
    }
    Ok(())
}

/// Index range `[lo, hi)` of the `q` points nearest to `x0`.
fn neighborhood(x: &[f64], x0: f64, q: usize) -> (usize, usize) {
    let n = x.len();
    if q >= n {
        return (0, n);
    }
    let mut hi = x.partition_point(|&v| v < x0);
    let mut lo = hi;
    while hi - lo < q {
        if lo == 0 {
            hi += 1;
        } else if hi == n || x0 - x[lo - 1] <= x[hi] - x0 {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    (lo, hi)
}

/// Local fit evaluated at `x0` (which may lie outside the data range).
/// Returns the value and whether the unweighted fallback was used.
pub(crate) fn fit_at(
    x: &[f64],
    y: &[f64],
    rw: Option<&[f64]>,
    x0: f64,
    q: usize,
    degree: usize,
) -> (f64, bool) {
    let n = x.len();
    let (lo, hi) = neighborhood(x, x0, q);
    let mut h = (x0 - x[lo]).max(x[hi - 1] - x0);
    if q > n {
        let spacing = if n > 1 { (x[n - 1] - x[0]) / (n - 1) as f64 } else { 1.0 };
        h += (q - n) as f64 / 2.0 * spacing;
    }
    let mut w: Vec<f64> = (lo..hi)
        .map(|j| {
            let base = tricube((x[j] - x0).abs(), h);
            base * rw.map_or(1.0, |r| r[j])
        })
        .collect();
    let mut fell_back = false;
    if w.iter().sum::<f64>() <= 0.0 {
        fell_back = true;
        w.iter_mut().for_each(|v| *v = 1.0);
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let xs = &x[lo..hi];
    let ys = &y[lo..hi];
    let range = x[n - 1] - x[0];
    let value = match degree {
        0 => dot(&w, ys),
        1 => local_linear(xs, ys, &w, x0, range),
        _ => local_quadratic(xs, ys, &w, x0, h).unwrap_or_else(|| local_linear(xs, ys, &w, x0, range)),
    };
    (value, fell_back)
}

fn tricube(r: f64, h: f64) -> f64 {
    if r <= 0.001 * h {
        1.0
    } else if r <= 0.999 * h {
        let u = r / h;
        (1.0 - u * u * u).powi(3)
    } else {
        0.0
    }
}

fn dot(w: &[f64], y: &[f64]) -> f64 {
    w.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Weighted linear fit at `x0`, folded into modified weights. Drops to a local
/// constant when the weighted abscissae have (nearly) no spread.
fn local_linear(xs: &[f64], ys: &[f64], w: &[f64], x0: f64, range: f64) -> f64 {
    let center = dot(w, xs);
    let c: f64 = xs.iter().zip(w).map(|(x, wi)| wi * (x - center).powi(2)).sum();
    if c.sqrt() > 0.001 * range {
        let b = (x0 - center) / c;
        xs.iter()
            .zip(ys)
            .zip(w)
            .map(|((x, y), wi)| wi * (b * (x - center) + 1.0) * y)
            .sum()
    } else {
        dot(w, ys)
    }
}

/// Weighted quadratic fit in the scaled coordinate `u = (x - x0) / h`; the
/// intercept is the fitted value. `None` when the normal equations are singular.
fn local_quadratic(xs: &[f64], ys: &[f64], w: &[f64], x0: f64, h: f64) -> Option<f64> {
    let h = if h > 0.0 { h } else { 1.0 };
    let mut s = [0.0; 5];
    let mut t = [0.0; 3];
    for ((x, y), wi) in xs.iter().zip(ys).zip(w) {
        let u = (x - x0) / h;
        let mut p = *wi;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += p;
            if k < 3 {
                t[k] += p * y;
            }
            p *= u;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    solve3(m, t).map(|c| c[0])
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (k, v) in a[row].iter_mut().enumerate().skip(col) {
                *v -= f * pivot_row[k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}
