mod common;

use approx::assert_relative_eq;
use common::{expanded_stats, month, scenario};
use leadtime_core::ingest::{parse_bookings, write_bookings, ParseMode};
use leadtime_core::pipeline::{run_analysis, run_analysis_with, verify_bundle, AnalysisConfig};
use leadtime_core::simulate::{generate_scenario, generate_scenario_with};
use leadtime_core::{Error, Execution, Market};

fn small() -> Vec<leadtime_core::BookingRecord> {
    generate_scenario(&scenario("small_multi_market.json", 3)).unwrap()
}

#[test]
fn csv_round_trip_is_lossless() {
    let records = small();
    let mut buf = Vec::new();
    write_bookings(&mut buf, &records).unwrap();
    let parsed = parse_bookings(buf.as_slice(), ParseMode::Strict).unwrap();
    assert_eq!(parsed.records, records);
    assert!(parsed.errors.is_empty());
}

#[test]
fn lenient_parse_skips_and_reports_bad_rows() {
    let text = "booking_date,checkin_date,nights,city,corridor,travel_type\n\
                2020-01-01,2020-01-10,2,Faro,destination,domestic\n\
                2020-01-05,2020-01-01,2,Faro,destination,domestic\n\
                2020-01-01,2020-01-10,0,Faro,destination,domestic\n\
                2020-02-30,2020-03-10,1,Faro,destination,domestic\n";
    assert!(matches!(parse_bookings(text.as_bytes(), ParseMode::Strict), Err(Error::Row(r)) if r.row == 2));
    let p = parse_bookings(text.as_bytes(), ParseMode::Lenient).unwrap();
    assert_eq!(p.records.len(), 1);
    let fields: Vec<&str> = p.errors.iter().map(|e| e.field.as_str()).collect();
    assert_eq!(fields, ["checkin_date", "nights", "booking_date"]);
}

#[test]
fn sequential_and_parallel_agree() {
    let spec = scenario("small_multi_market.json", 11);
    let a = generate_scenario_with(&spec, Execution::Sequential).unwrap();
    let b = generate_scenario_with(&spec, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let config = AnalysisConfig {
        warning_threshold: Some(0.15),
        ..AnalysisConfig::default()
    };
    let x = run_analysis_with(&a, &config, Execution::Sequential).unwrap();
    let y = run_analysis_with(&a, &config, Execution::Parallel).unwrap();
    assert_eq!(x, y);
}

#[test]
fn bundle_cells_match_direct_computation() {
    let records = small();
    let bundle = run_analysis(&records, &AnalysisConfig::default()).unwrap();
    let report = verify_bundle(&records, &bundle, 200, 42).unwrap();
    assert!(report.checked >= 200);
    assert!(report.mismatches.is_empty(), "{:?}", report.mismatches);
}

#[test]
fn annual_stats_match_per_stay_expansion() {
    let records = small();
    let bundle = run_analysis(&records, &AnalysisConfig::default()).unwrap();
    let lisbon: Market = "Lisbon/destination/domestic".parse().unwrap();
    let r = bundle.market(&lisbon).unwrap();
    let a = r.annual.iter().find(|a| a.year == 2020).unwrap();
    let stays: Vec<(u32, u32)> = records
        .iter()
        .filter(|b| b.market() == lisbon && b.checkin_date.format("%Y").to_string() == "2020")
        .map(|b| (b.lead_time(), b.nights))
        .collect();
    let (mean, median, sd) = expanded_stats(&stays);
    assert_relative_eq!(a.stats.mean, mean, max_relative = 1e-12);
    assert_eq!(a.stats.median, median);
    assert_relative_eq!(a.stats.sd, sd, max_relative = 1e-9);
}

#[test]
fn baseline_defaults_to_first_full_year() {
    let bundle = run_analysis(&small(), &AnalysisConfig::default()).unwrap();
    assert_eq!(bundle.baseline_year, Some(2019));
    for r in &bundle.markets {
        let base = r.series("baseline:2019").unwrap();
        assert!(base.points.iter().all(|(m, _)| m.year() >= 2020));
        let yoy = r.series("yoy").unwrap();
        assert_eq!(yoy.points.first().unwrap().0, month("2020-01"));
    }
}

#[test]
fn config_errors_are_reported() {
    let records = small();
    let missing = AnalysisConfig {
        baseline_year: Some(1999),
        ..AnalysisConfig::default()
    };
    assert!(run_analysis(&records, &missing).is_err());
    let nobody = AnalysisConfig {
        markets: Some(vec!["Atlantis/destination/domestic".into()]),
        ..AnalysisConfig::default()
    };
    assert!(run_analysis(&records, &nobody).is_err());
    assert!(AnalysisConfig::from_json(r#"{"partial_horizons":[400]}"#).is_err());
    assert!(AnalysisConfig::from_json(r#"{"lead_cap":90,"bogus":1}"#).is_err());
}

#[test]
fn identical_years_have_zero_yoy_divergence() {
    let mut records = small();
    let first: Vec<_> = records.iter().filter(|r| r.checkin_date.format("%Y").to_string() == "2019").cloned().collect();
    records.retain(|r| r.checkin_date.format("%Y").to_string() == "2019");
    let shifted = first.iter().map(|r| {
        let mut r = r.clone();
        let lead = chrono::Duration::days(r.lead_time().into());
        r.checkin_date = r.checkin_date.checked_add_months(chrono::Months::new(12)).unwrap();
        r.booking_date = r.checkin_date - lead;
        r
    });
    records.extend(shifted);
    let bundle = run_analysis(&records, &AnalysisConfig::default()).unwrap();
    for r in &bundle.markets {
        let yoy = r.series("yoy").unwrap();
        assert!(!yoy.points.is_empty());
        assert!(yoy.points.iter().all(|(_, v)| *v == 0.0), "{yoy:?}");
    }
}
