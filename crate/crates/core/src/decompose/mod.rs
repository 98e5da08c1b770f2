//! Loess smoothing and STL decomposition of divergence series.

mod loess;
mod stl;

use serde::Serialize;

pub use loess::{loess_smooth, LoessOutput};
pub use stl::{stl_decompose, SeasonalWindow, StlParams, StlResult};

use crate::divergence::DivergenceSeries;
use crate::error::{Error, Result};
use crate::market::YearMonth;

/// STL components of a monthly series with its month labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposedSeries {
    pub months: Vec<YearMonth>,
    pub observed: Vec<f64>,
    pub components: StlResult,
}

impl DecomposedSeries {
    /// `month,observed,trend,seasonal,remainder`
    pub fn write_csv<W: std::io::Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["month", "observed", "trend", "seasonal", "remainder"])?;
        let c = &self.components;
        for i in 0..self.months.len() {
            w.write_record([
                self.months[i].to_string(),
                self.observed[i].to_string(),
                c.trend[i].to_string(),
                c.seasonal[i].to_string(),
                c.remainder[i].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<stl>", e))?;
        Ok(())
    }
}

/// Months missing between the first and last point of `series`.
pub fn missing_months(series: &DivergenceSeries) -> Vec<YearMonth> {
    let mut missing = Vec::new();
    for pair in series.points.windows(2) {
        let (a, b) = (pair[0].0, pair[1].0);
        let mut m = a.add_months(1);
        while m < b {
            missing.push(m);
            m = m.add_months(1);
        }
    }
    missing
}

pub fn decompose_divergence(series: &DivergenceSeries, params: &StlParams) -> Result<DecomposedSeries> {
    let missing = missing_months(series);
    if !missing.is_empty() {
        return Err(Error::GappedSeries { missing });
    }
    let observed = series.values();
    let components = stl_decompose(&observed, params)?;
    Ok(DecomposedSeries {
        months: series.months(),
        observed,
        components,
    })
}
