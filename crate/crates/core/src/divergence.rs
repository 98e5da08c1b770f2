//! Normalized L1 distance between lead-time distributions and the series built
//! from it: year-over-year, fixed-baseline, and partial-horizon early warning.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::{check_probability_vector, LeadTimeDistribution, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};
use crate::ingest::MonthlyCohort;
use crate::market::{Market, YearMonth};

/// `½ Σ |p − q|`: the fraction of probability mass that differs between `p` and `q`.
pub fn l1_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    check_probability_vector("p", p)?;
    check_probability_vector("q", q)?;
    Ok(half_l1(p, q))
}

fn half_l1(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    (0.5 * s).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DivergenceMode {
    /// Against the same calendar month one year earlier.
    Yoy,
    /// Against the same calendar month of a fixed reference year.
    Baseline { year: i32 },
    /// In-progress distribution over leads `0..=horizon` against the average of
    /// prior years.
    Partial { horizon: usize },
}

/// `yoy`, `baseline:<year>`, `partial:<horizon>`.
impl fmt::Display for DivergenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceMode::Yoy => f.write_str("yoy"),
            DivergenceMode::Baseline { year } => write!(f, "baseline:{year}"),
            DivergenceMode::Partial { horizon } => write!(f, "partial:{horizon}"),
        }
    }
}

impl FromStr for DivergenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown divergence mode {s:?}"));
        match s.split_once(':') {
            None if s == "yoy" => Ok(DivergenceMode::Yoy),
            Some(("baseline", y)) => Ok(DivergenceMode::Baseline {
                year: y.parse().map_err(|_| bad())?,
            }),
            Some(("partial", h)) => Ok(DivergenceMode::Partial {
                horizon: h.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSeries {
    pub mode: DivergenceMode,
    pub market: Option<Market>,
    /// Strictly increasing months, values in [0, 1].
    pub points: Vec<(YearMonth, f64)>,
    /// Months that had a distribution but no comparison partner.
    pub gaps: Vec<YearMonth>,
}

impl DivergenceSeries {
    pub fn months(&self) -> Vec<YearMonth> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn get(&self, month: YearMonth) -> Option<f64> {
        self.points
            .binary_search_by_key(&month, |p| p.0)
            .ok()
            .map(|i| self.points[i].1)
    }

    pub fn label(&self) -> String {
        match &self.market {
            Some(m) => format!("{m} {}", self.mode),
            None => self.mode.to_string(),
        }
    }
}

/// Distributions of a single market keyed by month.
pub type MonthlyDistributions = BTreeMap<YearMonth, LeadTimeDistribution>;

fn market_of(dists: &MonthlyDistributions) -> Option<Market> {
    dists.values().find_map(|d| d.market.clone())
}

fn distance_between(a: &LeadTimeDistribution, b: &LeadTimeDistribution, month: YearMonth) -> Result<f64> {
    l1_distance(&a.mass, &b.mass).map_err(|e| e.context(format!("month {month}")))
}

pub fn yoy_series(dists: &MonthlyDistributions) -> Result<DivergenceSeries> {
    let mut points = Vec::new();
    let mut gaps = Vec::new();
    for (&month, dist) in dists {
        match dists.get(&month.add_months(-12)) {
            Some(prev) => points.push((month, distance_between(dist, prev, month)?)),
            None => gaps.push(month),
        }
    }
    if points.is_empty() {
        return Err(Error::InsufficientHistory(
            "no month has a distribution twelve months earlier".into(),
        ));
    }
    Ok(DivergenceSeries {
        mode: DivergenceMode::Yoy,
        market: market_of(dists),
        points,
        gaps,
    })
}

/// Every month outside `baseline_year` compared with the same calendar month of
/// the baseline year.
pub fn baseline_series(dists: &MonthlyDistributions, baseline_year: i32) -> Result<DivergenceSeries> {
    if !dists.keys().any(|m| m.year() == baseline_year) {
        return Err(Error::MissingBaseline(baseline_year));
    }
    let mut points = Vec::new();
    let mut gaps = Vec::new();
    for (&month, dist) in dists.iter().filter(|(m, _)| m.year() != baseline_year) {
        match dists.get(&month.with_year(baseline_year)) {
            Some(base) => points.push((month, distance_between(dist, base, month)?)),
            None => gaps.push(month),
        }
    }
    if points.is_empty() {
        return Err(Error::InsufficientHistory(format!(
            "no month outside {baseline_year} has a baseline counterpart"
        )));
    }
    Ok(DivergenceSeries {
        mode: DivergenceMode::Baseline { year: baseline_year },
        market: market_of(dists),
        points,
        gaps,
    })
}

/// Lead-time distribution restricted to `0..=horizon` and renormalized over the
/// nights observed there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialDistribution {
    pub horizon: usize,
    pub mass: Vec<f64>,
    pub observed_nights: f64,
}

/// Builds a partial distribution from `(lead_time, nights)` observations;
/// bookings with lead above `horizon` are outside the window.
pub fn build_partial<I>(observations: I, horizon: usize) -> Result<PartialDistribution>
where
    I: IntoIterator<Item = (u32, u32)>,
{
    let mut w = vec![0u64; horizon + 1];
    for (lead, nights) in observations {
        if (lead as usize) <= horizon {
            w[lead as usize] += u64::from(nights);
        }
    }
    let total: u64 = w.iter().sum();
    if total == 0 {
        return Err(Error::InsufficientHistory(format!(
            "no nights observed within {horizon} days"
        )));
    }
    let total = total as f64;
    Ok(PartialDistribution {
        horizon,
        mass: w.iter().map(|&x| x as f64 / total).collect(),
        observed_nights: total,
    })
}

pub fn build_partial_from_cohort(cohort: &MonthlyCohort, horizon: usize) -> Result<PartialDistribution> {
    build_partial(cohort.records.iter().map(|r| (r.lead_time(), r.nights)), horizon)
}

impl PartialDistribution {
    /// Same result as [`build_partial_from_cohort`] on the cohort the
    /// distribution came from.
    pub fn from_distribution(dist: &LeadTimeDistribution, horizon: usize) -> Result<Self> {
        if horizon > dist.lead_cap() {
            return Err(Error::InvalidArgument(format!(
                "horizon {horizon} exceeds lead cap {}",
                dist.lead_cap()
            )));
        }
        let head = &dist.mass[..=horizon];
        let share: f64 = head.iter().sum();
        if share <= 0.0 {
            return Err(Error::InsufficientHistory(format!(
                "no nights observed within {horizon} days"
            )));
        }
        Ok(Self {
            horizon,
            mass: head.iter().map(|m| m / share).collect(),
            observed_nights: share * dist.total_nights,
        })
    }
}

/// Historical reference: arithmetic mean of the mass vectors, renormalized.
pub fn reference_partial(partials: &[PartialDistribution]) -> Result<PartialDistribution> {
    let first = partials
        .first()
        .ok_or_else(|| Error::InsufficientHistory("no prior partial distributions".into()))?;
    let horizon = first.horizon;
    let mut mass = vec![0.0; horizon + 1];
    for p in partials {
        if p.horizon != horizon {
            return Err(Error::HorizonMismatch {
                left: horizon,
                right: p.horizon,
            });
        }
        for (acc, m) in mass.iter_mut().zip(&p.mass) {
            *acc += m;
        }
    }
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    Ok(PartialDistribution {
        horizon,
        mass,
        observed_nights: partials.iter().map(|p| p.observed_nights).sum(),
    })
}

pub fn partial_l1(current: &PartialDistribution, historical: &PartialDistribution) -> Result<f64> {
    if current.horizon != historical.horizon || current.mass.len() != historical.mass.len() {
        return Err(Error::HorizonMismatch {
            left: current.horizon,
            right: historical.horizon,
        });
    }
    check_probability_vector("current partial", &current.mass)?;
    check_probability_vector("historical partial", &historical.mass)?;
    Ok(half_l1(&current.mass, &historical.mass))
}

/// `D_H(t)` for every month that has at least one prior same-calendar-month
/// partial. `reference_years` limits how many prior years are averaged
/// (`None` = all available).
pub fn partial_series(
    dists: &MonthlyDistributions,
    horizon: usize,
    reference_years: Option<usize>,
) -> Result<DivergenceSeries> {
    if reference_years == Some(0) {
        return Err(Error::InvalidArgument("reference_years must be at least 1".into()));
    }
    let partials: BTreeMap<YearMonth, PartialDistribution> = dists
        .iter()
        .filter_map(|(m, d)| PartialDistribution::from_distribution(d, horizon).ok().map(|p| (*m, p)))
        .collect();
    if let Some(d) = dists.values().next() {
        if horizon > d.lead_cap() {
            return Err(Error::InvalidArgument(format!(
                "horizon {horizon} exceeds lead cap {}",
                d.lead_cap()
            )));
        }
    }
    let first_year = partials.keys().next().map(|m| m.year());
    let mut points = Vec::new();
    let mut gaps = Vec::new();
    for (&month, current) in &partials {
        let prior: Vec<PartialDistribution> = (1..)
            .map(|k| month.add_months(-12 * k))
            .take_while(|m| Some(m.year()) >= first_year)
            .filter_map(|m| partials.get(&m).cloned())
            .take(reference_years.unwrap_or(usize::MAX))
            .collect();
        if prior.is_empty() {
            gaps.push(month);
            continue;
        }
        let reference = reference_partial(&prior)?;
        points.push((month, partial_l1(current, &reference)?));
    }
    if points.is_empty() {
        return Err(Error::InsufficientHistory(
            "no month has a prior-year partial distribution".into(),
        ));
    }
    Ok(DivergenceSeries {
        mode: DivergenceMode::Partial { horizon },
        market: market_of(dists),
        points,
        gaps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub month: YearMonth,
    pub value: f64,
    pub threshold: f64,
}

/// Months whose partial-horizon divergence exceeds `threshold`, in order.
pub fn early_warning(series: &DivergenceSeries, threshold: f64) -> Result<Vec<Flag>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if !matches!(series.mode, DivergenceMode::Partial { .. }) {
        return Err(Error::InvalidArgument(format!(
            "early warning needs a partial-horizon series, got {}",
            series.mode
        )));
    }
    Ok(series
        .points
        .iter()
        .filter(|(_, v)| *v > threshold)
        .map(|&(month, value)| Flag {
            month,
            value,
            threshold,
        })
        .collect())
}

/// Pearson correlation of `a(t)` with `b(t − lag)` over the months both have.
pub fn correlate(a: &DivergenceSeries, b: &DivergenceSeries, lag: i64) -> Result<f64> {
    let shifted: BTreeMap<YearMonth, f64> = b
        .points
        .iter()
        .map(|&(m, v)| (m.add_months(lag), v))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .points
        .iter()
        .filter_map(|(m, x)| shifted.get(m).map(|y| (*x, *y)))
        .unzip();
    pearson(&xs, &ys)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("only {n} overlapping points, need 3")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // relative to the data scale; constant series leave only rounding noise
    let scale = |m: f64| (m * m * n as f64).max(f64::MIN_POSITIVE) * 1e-24;
    if sxx <= scale(mx) {
        return Err(Error::Degenerate("first series has zero variance".into()));
    }
    if syy <= scale(my) {
        return Err(Error::Degenerate("second series has zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// `None` where the pair has too little overlap or no variance.
    pub r: Vec<Vec<Option<f64>>>,
    pub lag: i64,
}

pub fn correlation_matrix(series: &[(String, DivergenceSeries)], lag: i64) -> CorrelationMatrix {
    let n = series.len();
    let mut r = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if lag == 0 && j < i {
                r[i][j] = r[j][i];
                continue;
            }
            r[i][j] = correlate(&series[i].1, &series[j].1, lag).ok();
        }
    }
    CorrelationMatrix {
        labels: series.iter().map(|s| s.0.clone()).collect(),
        r,
        lag,
    }
}

impl CorrelationMatrix {
    /// Square CSV with labels along the first row and column; empty cells are undefined.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.r) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<correlation>", e))?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesRow {
    month: YearMonth,
    market: String,
    mode: String,
    value: f64,
}

/// Writes `month,market,mode,value` rows for each series in order.
pub fn write_series_csv<'a, W, I>(sink: W, series: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a DivergenceSeries>,
{
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["month", "market", "mode", "value"])?;
    for s in series {
        let market = s.market.as_ref().map(ToString::to_string).unwrap_or_default();
        let mode = s.mode.to_string();
        for (m, v) in &s.points {
            w.write_record([m.to_string(), market.clone(), mode.clone(), v.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<series>", e))?;
    Ok(())
}

/// Reads a series CSV back, one series per (market, mode) in first-seen order.
pub fn read_series_csv<R: Read>(source: R) -> Result<Vec<DivergenceSeries>> {
    let mut rdr = csv::Reader::from_reader(source);
    let mut out: Vec<DivergenceSeries> = Vec::new();
    for row in rdr.deserialize::<SeriesRow>() {
        let row = row?;
        let market = if row.market.is_empty() {
            None
        } else {
            Some(row.market.parse::<Market>()?)
        };
        let mode: DivergenceMode = row.mode.parse()?;
        if !(0.0..=1.0 + NORMALIZATION_TOLERANCE).contains(&row.value) {
            return Err(Error::InvalidArgument(format!(
                "divergence value {} at {} outside [0, 1]",
                row.value, row.month
            )));
        }
        let idx = match out.iter().position(|s| s.market == market && s.mode == mode) {
            Some(i) => i,
            None => {
                out.push(DivergenceSeries {
                    mode,
                    market,
                    points: Vec::new(),
                    gaps: Vec::new(),
                });
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        if let Some((last, _)) = s.points.last() {
            if *last >= row.month {
                return Err(Error::InvalidArgument(format!(
                    "months must be strictly increasing within a series ({} after {last})",
                    row.month
                )));
            }
        }
        s.points.push((row.month, row.value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ym(y: i32, m: u32) -> YearMonth {
        YearMonth::new(y, m).unwrap()
    }

    fn dist(mass: Vec<f64>) -> LeadTimeDistribution {
        LeadTimeDistribution::from_mass(mass).unwrap()
    }

    fn series(values: &[f64]) -> DivergenceSeries {
        DivergenceSeries {
            mode: DivergenceMode::Partial { horizon: 30 },
            market: None,
            points: values
                .iter()
                .enumerate()
                .map(|(i, v)| (ym(2020, 1).add_months(i as i64), *v))
                .collect(),
            gaps: vec![],
        }
    }

    #[test]
    fn l1_hand_values() {
        assert_eq!(l1_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(l1_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((l1_distance(&[0.6, 0.4], &[0.4, 0.6]).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn l1_rejects_bad_inputs() {
        assert!(matches!(
            l1_distance(&[1.0], &[0.5, 0.5]),
            Err(Error::LengthMismatch { .. })
        ));
        match l1_distance(&[0.5, 0.5], &[0.5, 0.6]) {
            Err(Error::NotNormalized { which, .. }) => assert_eq!(which, "q"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn yoy_constant_history_is_zero() {
        let dists: MonthlyDistributions = (0..24)
            .map(|i| (ym(2018, 1).add_months(i), dist(vec![0.2, 0.3, 0.5])))
            .collect();
        let s = yoy_series(&dists).unwrap();
        assert_eq!(s.points.len(), 12);
        assert!(s.values().iter().all(|v| *v == 0.0));
        assert_eq!(s.gaps.len(), 12);
        assert_eq!(s.points[0].0, ym(2019, 1));
    }

    #[test]
    fn yoy_disjoint_year_is_one() {
        let dists: MonthlyDistributions = (0..24)
            .map(|i| {
                let mass = if i < 12 { vec![1.0, 0.0] } else { vec![0.0, 1.0] };
                (ym(2018, 1).add_months(i), dist(mass))
            })
            .collect();
        assert!(yoy_series(&dists).unwrap().values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn yoy_without_history_errors() {
        let dists: MonthlyDistributions = (0..6)
            .map(|i| (ym(2018, 1).add_months(i), dist(vec![1.0, 0.0])))
            .collect();
        assert!(matches!(yoy_series(&dists), Err(Error::InsufficientHistory(_))));
    }

    #[test]
    fn baseline_flags_only_the_changed_month() {
        let mut dists: MonthlyDistributions = (0..36)
            .map(|i| (ym(2018, 1).add_months(i), dist(vec![0.5, 0.5, 0.0])))
            .collect();
        dists.insert(ym(2019, 4), dist(vec![0.0, 0.0, 1.0]));
        let s = baseline_series(&dists, 2018).unwrap();
        assert_eq!(s.points.len(), 24);
        for (m, v) in &s.points {
            assert_eq!(*v, if *m == ym(2019, 4) { 1.0 } else { 0.0 });
        }
        assert!(matches!(baseline_series(&dists, 2015), Err(Error::MissingBaseline(2015))));
    }

    #[test]
    fn partial_hand_values() {
        let p = |m: Vec<f64>| PartialDistribution {
            horizon: m.len() - 1,
            mass: m,
            observed_nights: 1.0,
        };
        assert_eq!(partial_l1(&p(vec![1.0, 0.0]), &p(vec![0.0, 1.0])).unwrap(), 1.0);
        let d = partial_l1(&p(vec![0.5, 0.3, 0.2]), &p(vec![0.2, 0.3, 0.5])).unwrap();
        assert!((d - 0.3).abs() < 1e-15);
        assert!(matches!(
            partial_l1(&p(vec![1.0, 0.0]), &p(vec![0.5, 0.3, 0.2])),
            Err(Error::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn build_partial_ratios() {
        let p = build_partial([(0, 3), (1, 1), (5, 10)], 1).unwrap();
        assert_eq!(p.mass, vec![0.75, 0.25]);
        assert_eq!(p.observed_nights, 4.0);
        let at_h = build_partial([(3, 2), (3, 1)], 3).unwrap();
        assert_eq!(at_h.mass, vec![0.0, 0.0, 0.0, 1.0]);
        assert!(build_partial([(5, 1)], 3).is_err());
    }

    #[test]
    fn reference_is_renormalized_mean() {
        let a = build_partial([(0, 1), (1, 3)], 1).unwrap();
        let b = build_partial([(0, 1)], 1).unwrap();
        let r = reference_partial(&[a, b]).unwrap();
        assert_eq!(r.mass, vec![0.625, 0.375]);
    }

    #[test]
    fn early_warning_thresholds() {
        assert!(early_warning(&series(&[0.0, 0.0, 0.0]), 0.1).unwrap().is_empty());
        let flags = early_warning(&series(&[0.05, 0.2, 0.15]), 0.1).unwrap();
        let months: Vec<_> = flags.iter().map(|f| f.month).collect();
        assert_eq!(months, vec![ym(2020, 2), ym(2020, 3)]);
        assert!(early_warning(&series(&[0.5, 0.995]), 0.99).unwrap().len() == 1);
        assert!(early_warning(&series(&[0.5]), 1.0).is_err());
        assert!(early_warning(&series(&[0.5]), 0.0).is_err());
        let mut yoy = series(&[0.5]);
        yoy.mode = DivergenceMode::Yoy;
        assert!(early_warning(&yoy, 0.1).is_err());
    }

    #[test]
    fn correlation_cases() {
        let a = series(&[1.0, 2.0, 3.0, 4.0]);
        let b = series(&[2.0, 4.0, 6.0, 8.0]);
        assert!((correlate(&a, &b, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((correlate(&a, &a, 0).unwrap() - 1.0).abs() < 1e-12);
        let neg = series(&[4.0, 3.0, 2.0, 1.0]);
        assert!((correlate(&a, &neg, 0).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(correlate(&a, &b, 2), Err(Error::Degenerate(_))));
        assert!(matches!(
            correlate(&a, &series(&[0.1, 0.1, 0.1, 0.1]), 0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn lag_pairs_a_with_earlier_b() {
        // b leads a by one month
        let b = series(&[1.0, 5.0, 2.0, 8.0, 3.0, 0.0]);
        let a = series(&[9.0, 1.0, 5.0, 2.0, 8.0, 3.0]);
        assert!((correlate(&a, &b, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_csv_round_trip() {
        let mut s = series(&[0.1, 0.25]);
        s.market = Some("Austin/destination/domestic".parse().unwrap());
        let mut buf = Vec::new();
        write_series_csv(&mut buf, [&s]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("month,market,mode,value\n2020-01,Austin/destination/domestic,partial:30,0.1\n"));
        let back = read_series_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].points, s.points);
        assert_eq!(back[0].mode, s.mode);
    }

    #[test]
    fn mode_strings() {
        for m in [
            DivergenceMode::Yoy,
            DivergenceMode::Baseline { year: 2018 },
            DivergenceMode::Partial { horizon: 30 },
        ] {
            assert_eq!(m.to_string().parse::<DivergenceMode>().unwrap(), m);
        }
        assert!("weekly".parse::<DivergenceMode>().is_err());
    }
}
