//! Independent oracles shared by the integration tests. Nothing here calls the
//! code under test for the quantity being checked.

#![allow(dead_code)]

use chrono::{Duration, NaiveDate};
use leadtime_core::ingest::MonthlyCohort;
use leadtime_core::simulate::ScenarioSpec;
use leadtime_core::{BookingRecord, Corridor, Market, TravelType, YearMonth};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/scenarios/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn scenario(name: &str, seed: u64) -> ScenarioSpec {
    let mut s = ScenarioSpec::from_json(&fixture(name)).unwrap();
    s.seed = Some(seed);
    s
}

pub fn month(s: &str) -> YearMonth {
    s.parse().unwrap()
}

pub fn market() -> Market {
    Market::new("Testville", Corridor::Destination, TravelType::Domestic)
}

/// Cohort of bookings `(lead, nights)` all checking in on 2020-03-15.
pub fn cohort(bookings: &[(u32, u32)]) -> MonthlyCohort {
    let checkin = NaiveDate::from_ymd_opt(2020, 3, 15).unwrap();
    let m = market();
    MonthlyCohort {
        month: YearMonth::of(checkin),
        market: m.clone(),
        records: bookings
            .iter()
            .map(|&(lead, nights)| BookingRecord {
                booking_date: checkin - Duration::days(lead as i64),
                checkin_date: checkin,
                nights,
                city: m.city.clone(),
                corridor: m.corridor,
                travel_type: m.travel_type,
            })
            .collect(),
    }
}

/// Random point in the open simplex with `n` coordinates.
pub fn simplex(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Brute-force weighted statistics: every night becomes one observation.
/// Returns (mean, lower median, population SD).
pub fn expanded_stats(bookings: &[(u32, u32)]) -> (f64, f64, f64) {
    let mut obs: Vec<f64> = bookings
        .iter()
        .flat_map(|&(lead, nights)| std::iter::repeat_n(lead as f64, nights as usize))
        .collect();
    obs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = obs.len() as f64;
    let mean = obs.iter().sum::<f64>() / n;
    let var = obs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let median = obs[obs.len().div_ceil(2) - 1];
    (mean, median, var.sqrt())
}

/// Monte-Carlo sampling-noise oracle: the L1 distance between the empirical
/// nights-weighted distributions of two independent samples drawn from `mass`,
/// each filled to `nights_budget` with nights uniform on `nights`. Optionally
/// restricted to leads `0..=horizon` and renormalized. Uses its own RNG and
/// inverse-CDF sampling, independent of the scenario generator.
pub fn noise_draws(
    mass: &[f64],
    nights_budget: f64,
    nights: (u32, u32),
    horizon: Option<usize>,
    draws: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut cdf = Vec::with_capacity(mass.len());
    let mut acc = 0.0;
    for m in mass {
        acc += m;
        cdf.push(acc);
    }
    let sample = |rng: &mut StdRng| -> Vec<f64> {
        let mut w = vec![0.0; mass.len()];
        let mut total = 0.0;
        while total < nights_budget {
            let u = rng.random::<f64>() * acc;
            let lead = cdf.partition_point(|c| *c <= u).min(mass.len() - 1);
            let n = rng.random_range(nights.0..=nights.1) as f64;
            w[lead] += n;
            total += n;
        }
        let w = match horizon {
            Some(h) => w[..=h].to_vec(),
            None => w,
        };
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    };
    (0..draws)
        .map(|_| {
            let a = sample(&mut rng);
            let b = sample(&mut rng);
            0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>()
        })
        .collect()
}

pub fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
