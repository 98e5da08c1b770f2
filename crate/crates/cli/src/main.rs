//! `leadtime-lab`: booking lead-time distributions, divergence, STL and pickup
//! forecast bounds from the command line.
//!
//! Exit status is 0 on success, 1 for bad input (flags, files, specs) and 2
//! when a computation fails on well-formed input.

mod output;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use leadtime_core::decompose::{decompose_divergence, SeasonalWindow, StlParams};
use leadtime_core::distribution::{describe, describe_cohort, LeadTimeDistribution, StatsMode};
use leadtime_core::divergence::{
    baseline_series, early_warning, l1_distance, partial_series, read_series_csv, write_series_csv, yoy_series,
    DivergenceSeries,
};
use leadtime_core::ingest::{group_by_month, parse_bookings, write_bookings, ExclusionReport, ParseMode, DEFAULT_LEAD_CAP};
use leadtime_core::pickup::{error_bound, evaluate_horizon_sweep, write_sweep_csv};
use leadtime_core::pipeline::{monthly_distributions, run_analysis, verify_bundle, AnalysisConfig};
use leadtime_core::simulate::{fixture_sha256, generate_scenario, make_bville_fixture, make_figure1_pair, ScenarioSpec};
use leadtime_core::{BookingRecord, Error as CoreError, Market, YearMonth};

use output::{report, sig6, CliError};

type CliResult<T = ()> = Result<T, CliError>;

/// Lead-time distribution analytics for short-term rental bookings.
#[derive(Parser, Debug)]
#[command(name = "leadtime-lab", about)]
struct Cli {
    /// Print errors to stderr as one JSON object
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a bookings CSV and report exclusions
    IngestCheck(IngestCheck),
    /// Mean, median and SD of lead times
    Describe(Describe),
    /// L1 divergence series (or the distance between two distribution files)
    Divergence(Divergence),
    /// STL decomposition of a divergence series
    Stl(Stl),
    /// Pickup forecast sweep over the booking window
    Pickup(Pickup),
    /// Forecast-error bound 2D(1 - delta/delta_max)/C_hist
    Bound(Bound),
    /// Seeded synthetic data
    #[command(subcommand)]
    Simulate(Simulate),
    /// Early-warning flags from partial-horizon divergence
    Monitor(Monitor),
    /// Full analysis bundle
    Analyze(Analyze),
}

#[derive(Args, Debug)]
struct BookingsInput {
    /// Bookings CSV, `-` for stdin
    #[arg(short, long, default_value = "-")]
    input: PathBuf,

    /// Largest lead time kept, in days
    #[arg(long, default_value_t = DEFAULT_LEAD_CAP)]
    lead_cap: u32,

    /// Skip malformed rows instead of failing
    #[arg(long)]
    lenient: bool,
}

#[derive(Args, Debug)]
struct IngestCheck {
    #[command(flatten)]
    bookings: BookingsInput,

    /// Print the report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct Describe {
    /// A `delta,mass` distribution file instead of bookings
    #[arg(long, conflicts_with = "input")]
    dist: Option<PathBuf>,

    #[command(flatten)]
    bookings: BookingsInput,

    /// Only this market (`city/corridor/travel_type`)
    #[arg(long)]
    market: Option<Market>,

    /// Only this check-in month (`YYYY-MM`)
    #[arg(long)]
    month: Option<YearMonth>,

    /// Count each booking once instead of weighting by nights
    #[arg(long)]
    per_trip: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Yoy,
    Baseline,
    Partial,
}

#[derive(Args, Debug)]
struct Divergence {
    /// First distribution file; with `--q`, prints their L1 distance
    #[arg(long, requires = "q", conflicts_with = "input")]
    p: Option<PathBuf>,

    /// Second distribution file
    #[arg(long, requires = "p")]
    q: Option<PathBuf>,

    #[command(flatten)]
    bookings: BookingsInput,

    #[arg(long, value_enum, default_value = "yoy")]
    mode: ModeArg,

    /// Reference year for `--mode baseline`
    #[arg(long)]
    baseline_year: Option<i32>,

    /// Horizon in days for `--mode partial`
    #[arg(long)]
    horizon: Option<usize>,

    /// Prior years averaged into the partial reference (default: all)
    #[arg(long)]
    reference_years: Option<usize>,

    /// Only this market
    #[arg(long)]
    market: Option<Market>,

    /// Series CSV destination (default stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Stl {
    /// Series CSV as written by `divergence`, `-` for stdin
    #[arg(short, long, default_value = "-")]
    input: PathBuf,

    /// Which series in the file, by market label; required when the file holds several
    #[arg(long)]
    market: Option<String>,

    #[arg(long, default_value_t = 12)]
    period: usize,

    /// `periodic` or an odd window length of at least 7
    #[arg(long, default_value = "periodic")]
    seasonal_window: SeasonalWindow,

    #[arg(long)]
    trend_window: Option<usize>,

    #[arg(long)]
    low_pass_window: Option<usize>,

    #[arg(long, default_value_t = 2)]
    inner: usize,

    /// Robustness iterations
    #[arg(long, default_value_t = 1)]
    outer: usize,

    /// Components CSV destination (default stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Pickup {
    /// Historical `delta,mass` distribution
    #[arg(long)]
    hist: PathBuf,

    /// Actual `delta,mass` distribution of the period being forecast
    #[arg(long)]
    actual: PathBuf,

    /// Final total of the period being forecast
    #[arg(long)]
    total: f64,

    /// Divergence for the bound (default: L1 distance of the two files)
    #[arg(long)]
    d: Option<f64>,

    /// Print forecast, error and bound at this window position
    #[arg(long)]
    at: Option<usize>,

    /// Sweep CSV destination (default stdout unless `--at` is given)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Bound {
    #[arg(long)]
    d: f64,

    #[arg(long)]
    delta: usize,

    #[arg(long)]
    delta_max: usize,

    #[arg(long)]
    c_hist: f64,
}

#[derive(Subcommand, Debug)]
enum Simulate {
    /// The 30-day toy market: two years of lead-time shares
    Bville {
        #[arg(long)]
        seed: Option<u64>,

        /// Directory for `year1.csv` and `year2.csv`
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Two distributions with equal mean and SD but L1 distance 0.25
    Figure1 {
        /// Directory for `a.csv` and `b.csv`
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Booking stream from a JSON scenario spec
    Scenario {
        #[arg(long)]
        spec: PathBuf,

        #[arg(long)]
        seed: Option<u64>,

        /// Bookings CSV destination (default stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Monitor {
    #[command(flatten)]
    bookings: BookingsInput,

    #[arg(long, default_value_t = 30)]
    horizon: usize,

    #[arg(long)]
    threshold: f64,

    #[arg(long)]
    reference_years: Option<usize>,

    #[arg(long)]
    market: Option<Market>,
}

#[derive(Args, Debug)]
struct Analyze {
    /// JSON analysis config (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Bookings CSV, `-` for stdin; overrides the config
    #[arg(short, long)]
    input: Option<PathBuf>,

    /// Bundle directory; overrides the config
    #[arg(long)]
    output_dir: Option<PathBuf>,

    /// Spot-check this many bundle cells against direct module calls
    #[arg(long, value_name = "CHECKS")]
    verify: Option<usize>,

    #[arg(long)]
    lenient: bool,
}

fn open_input(path: &Path) -> CliResult<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    let f = File::open(path).map_err(|e| CoreError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(Box::new(BufReader::new(f)))
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) if p.as_os_str() == "-" => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            let f = File::create(p).map_err(|e| io_err(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn io_err(path: &Path, source: io::Error) -> CliError {
    CliError::Core(CoreError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    let mut s = String::new();
    open_input(path)?.read_to_string(&mut s).map_err(|e| io_err(path, e))?;
    Ok(s)
}

fn read_dist(path: &Path) -> CliResult<LeadTimeDistribution> {
    LeadTimeDistribution::read_csv(open_input(path)?).map_err(|e| e.context(path.display().to_string()).into())
}

fn load_bookings(path: &Path, lenient: bool) -> CliResult<Vec<BookingRecord>> {
    let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
    let parsed = parse_bookings(open_input(path)?, mode)?;
    for e in &parsed.errors {
        log::warn!("skipped {e}");
    }
    Ok(parsed.records)
}

fn flush(mut w: Box<dyn Write>) -> CliResult {
    w.flush().map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn need_seed(seed: Option<u64>) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Usage("--seed is required; generators never pick a seed on their own".into()))
}

fn ingest_check(a: IngestCheck) -> CliResult {
    let mode = if a.bookings.lenient { ParseMode::Lenient } else { ParseMode::Strict };
    let parsed = parse_bookings(open_input(&a.bookings.input)?, mode)?;
    let grouping = group_by_month(&parsed.records, a.bookings.lead_cap)?;
    let rep = ExclusionReport::new(&parsed, &grouping);
    let mut out = open_output(None)?;
    let w = |out: &mut Box<dyn Write>, s: String| writeln!(out, "{s}").map_err(|e| io_err(Path::new("<stdout>"), e));
    if a.json {
        w(&mut out, serde_json::to_string_pretty(&rep).map_err(CoreError::from)?)?;
    } else {
        w(&mut out, format!("rows {}", rep.total))?;
        w(&mut out, format!("kept {}", rep.kept))?;
        w(&mut out, format!("excluded_over_cap {}", rep.excluded_over_cap))?;
        w(&mut out, format!("invalid {}", rep.errors.len()))?;
        w(&mut out, format!("cohorts {}", grouping.cohorts.len()))?;
        for e in &rep.errors {
            w(&mut out, format!("  {e}"))?;
        }
    }
    flush(out)
}

fn describe_cmd(a: Describe) -> CliResult {
    let mut out = open_output(None)?;
    let mut line = |s: String| writeln!(out, "{s}").map_err(|e| io_err(Path::new("<stdout>"), e));
    if let Some(path) = &a.dist {
        let s = describe(&read_dist(path)?);
        line("mean,median,sd".into())?;
        line(format!("{},{},{}", sig6(s.mean), sig6(s.median), sig6(s.sd)))?;
        return flush(out);
    }
    let records = load_bookings(&a.bookings.input, a.bookings.lenient)?;
    let grouping = group_by_month(&records, a.bookings.lead_cap)?;
    let mode = if a.per_trip { StatsMode::PerTrip } else { StatsMode::Weighted };
    line("market,month,bookings,mean,median,sd".into())?;
    let mut any = false;
    for c in &grouping.cohorts {
        if a.market.as_ref().is_some_and(|m| m != &c.market) || a.month.is_some_and(|m| m != c.month) {
            continue;
        }
        any = true;
        let s = describe_cohort(c, mode, a.bookings.lead_cap)
            .map_err(|e| e.context(format!("{} {}", c.market, c.month)))?;
        line(format!(
            "{},{},{},{},{},{}",
            c.market,
            c.month,
            c.records.len(),
            sig6(s.mean),
            sig6(s.median),
            sig6(s.sd)
        ))?;
    }
    if !any {
        return Err(CliError::Usage("no cohort matches the market/month filter".into()));
    }
    flush(out)
}

fn divergence_cmd(a: Divergence) -> CliResult {
    if let (Some(p), Some(q)) = (&a.p, &a.q) {
        let d = l1_distance(&read_dist(p)?.mass, &read_dist(q)?.mass)?;
        let mut out = open_output(None)?;
        writeln!(out, "{}", sig6(d)).map_err(|e| io_err(Path::new("<stdout>"), e))?;
        return flush(out);
    }
    match a.mode {
        ModeArg::Baseline if a.baseline_year.is_none() => {
            return Err(CliError::Usage("--mode baseline needs --baseline-year".into()))
        }
        ModeArg::Partial if a.horizon.is_none() => return Err(CliError::Usage("--mode partial needs --horizon".into())),
        _ => {}
    }
    let records = load_bookings(&a.bookings.input, a.bookings.lenient)?;
    let by_market = monthly_distributions(&records, a.bookings.lead_cap)?;
    let mut series: Vec<DivergenceSeries> = Vec::new();
    for (market, dists) in &by_market {
        if a.market.as_ref().is_some_and(|m| m != market) {
            continue;
        }
        let s = match a.mode {
            ModeArg::Yoy => yoy_series(dists),
            ModeArg::Baseline => baseline_series(dists, a.baseline_year.expect("checked")),
            ModeArg::Partial => partial_series(dists, a.horizon.expect("checked"), a.reference_years),
        };
        series.push(s.map_err(|e| e.context(market.to_string()))?);
    }
    if series.is_empty() {
        return Err(CliError::Usage("no market matches the filter".into()));
    }
    let out = open_output(a.output.as_deref())?;
    write_series_csv(out, &series)?;
    Ok(())
}

fn stl_cmd(a: Stl) -> CliResult {
    let all = read_series_csv(open_input(&a.input)?)?;
    let chosen: Vec<&DivergenceSeries> = all
        .iter()
        .filter(|s| {
            a.market
                .as_ref()
                .is_none_or(|m| s.market.as_ref().is_some_and(|sm| &sm.to_string() == m))
        })
        .collect();
    let series = match chosen.as_slice() {
        [one] => *one,
        [] => return Err(CliError::Usage("no series in the input matches".into())),
        _ => {
            return Err(CliError::Usage(format!(
                "input holds {} series; pick one with --market",
                chosen.len()
            )))
        }
    };
    let params = StlParams {
        period: a.period,
        seasonal_window: a.seasonal_window,
        trend_window: a.trend_window,
        low_pass_window: a.low_pass_window,
        inner_iterations: a.inner,
        outer_iterations: a.outer,
        ..StlParams::new(a.period)
    };
    params.validate()?;
    let d = decompose_divergence(series, &params)?;
    d.write_csv(open_output(a.output.as_deref())?)?;
    Ok(())
}

fn pickup_cmd(a: Pickup) -> CliResult {
    let hist = read_dist(&a.hist)?;
    let actual = read_dist(&a.actual)?;
    let d = match a.d {
        Some(d) => d,
        None => l1_distance(&hist.mass, &actual.mass)?,
    };
    let sweep = evaluate_horizon_sweep(&hist, &actual, a.total, d)?;
    if a.output.is_some() || a.at.is_none() {
        write_sweep_csv(open_output(a.output.as_deref())?, &sweep)?;
    }
    if let Some(at) = a.at {
        let e = sweep
            .get(at)
            .ok_or_else(|| CliError::Usage(format!("--at {at} is beyond the window 0..={}", hist.lead_cap())))?;
        let opt = |v: Option<f64>| v.map(sig6).unwrap_or_else(|| "undefined".into());
        let mut out = open_output(None)?;
        writeln!(
            out,
            "delta,B_obs,C_hist,forecast,rel_error,bound\n{},{},{},{},{},{}",
            at,
            sig6(e.observed_bookings),
            sig6(e.hist_cumulative),
            opt(e.forecast),
            opt(e.relative_error),
            opt(e.bound)
        )
        .map_err(|e| io_err(Path::new("<stdout>"), e))?;
        flush(out)?;
    }
    Ok(())
}

fn bound_cmd(a: Bound) -> CliResult {
    let b = error_bound(a.d, a.delta, a.delta_max, a.c_hist)?;
    println!("{}", sig6(b));
    Ok(())
}

fn write_dist(dir: &Path, name: &str, mass: &[f64]) -> CliResult {
    let dist = LeadTimeDistribution::from_mass(mass.to_vec())?;
    dist.write_csv(open_output(Some(&dir.join(name)))?)?;
    Ok(())
}

fn simulate_cmd(s: Simulate) -> CliResult {
    match s {
        Simulate::Bville { seed, out_dir } => {
            let seed = need_seed(seed)?;
            let f = make_bville_fixture(seed)?;
            let c = f.compare();
            if let Some(dir) = out_dir {
                write_dist(&dir, "year1.csv", &f.year1_distribution().mass)?;
                write_dist(&dir, "year2.csv", &f.year2_distribution().mass)?;
            }
            println!("seed {seed}");
            println!("bookings {} {}", f.bookings_year1, f.bookings_year2);
            println!("mean {} {} change {}", sig6(c.year1.mean), sig6(c.year2.mean), sig6(c.mean_change));
            println!("median {} {} change {}", sig6(c.year1.median), sig6(c.year2.median), sig6(c.median_change));
            println!("sd {} {} change {}", sig6(c.year1.sd), sig6(c.year2.sd), sig6(c.sd_change));
            println!("l1 {}", sig6(c.l1));
            println!("c_hist_17 {}", sig6(c.hist_cumulative_mid));
            println!("forecast_17 {}", sig6(c.mid_window_forecast));
            println!("rel_error_17 {}", sig6(c.mid_window_error));
            println!("within_bands {}", c.within_bands());
        }
        Simulate::Figure1 { out_dir } => {
            let p = make_figure1_pair()?;
            if let Some(dir) = out_dir {
                write_dist(&dir, "a.csv", &p.a)?;
                write_dist(&dir, "b.csv", &p.b)?;
            }
            let (sa, sb) = (
                describe(&LeadTimeDistribution::from_mass(p.a.clone())?),
                describe(&LeadTimeDistribution::from_mass(p.b.clone())?),
            );
            println!("mean {} {}", sig6(sa.mean), sig6(sb.mean));
            println!("sd {} {}", sig6(sa.sd), sig6(sb.sd));
            println!("l1 {}", sig6(l1_distance(&p.a, &p.b)?));
            println!("offset {}", sig6(p.offset));
            println!("component_sd {}", sig6(p.component_sd));
        }
        Simulate::Scenario { spec, seed, output } => {
            let seed = need_seed(seed)?;
            let text = read_text(&spec)?;
            let mut spec = ScenarioSpec::from_json(&text).map_err(|e| e.context(spec.display().to_string()))?;
            spec.seed = Some(seed);
            let records = generate_scenario(&spec)?;
            write_bookings(open_output(output.as_deref())?, &records)?;
            log::info!("generated {} bookings", records.len());
        }
    }
    Ok(())
}

fn monitor_cmd(a: Monitor) -> CliResult {
    let records = load_bookings(&a.bookings.input, a.bookings.lenient)?;
    let by_market = monthly_distributions(&records, a.bookings.lead_cap)?;
    let mut out = open_output(None)?;
    let mut line = |s: String| writeln!(out, "{s}").map_err(|e| io_err(Path::new("<stdout>"), e));
    line("market,month,value,threshold".into())?;
    let mut seen = false;
    for (market, dists) in &by_market {
        if a.market.as_ref().is_some_and(|m| m != market) {
            continue;
        }
        seen = true;
        let series =
            partial_series(dists, a.horizon, a.reference_years).map_err(|e| e.context(market.to_string()))?;
        for f in early_warning(&series, a.threshold)? {
            line(format!("{market},{},{},{}", f.month, sig6(f.value), sig6(f.threshold)))?;
        }
    }
    if !seen {
        return Err(CliError::Usage("no market matches the filter".into()));
    }
    flush(out)
}

fn analyze_cmd(a: Analyze) -> CliResult {
    let mut config = match &a.config {
        Some(p) => AnalysisConfig::from_json(&read_text(p)?).map_err(|e| e.context(p.display().to_string()))?,
        None => AnalysisConfig::default(),
    };
    if let Some(i) = a.input {
        config.input = Some(i);
    }
    if let Some(o) = a.output_dir {
        config.output_dir = Some(o);
    }
    let out_dir = config
        .output_dir
        .clone()
        .ok_or_else(|| CliError::Usage("no output directory: pass --output-dir or set output_dir".into()))?;
    let input = config.input.clone().unwrap_or_else(|| PathBuf::from("-"));
    let records = load_bookings(&input, a.lenient)?;
    let bundle = run_analysis(&records, &config)?;
    let files = bundle.write(&out_dir)?;
    println!("markets {}", bundle.markets.len());
    println!("files {}", files.len());
    println!("manifest {}", out_dir.join("manifest.json").display());
    if let Some(checks) = a.verify {
        let v = verify_bundle(&records, &bundle, checks, 0)?;
        println!("verified {} cells, {} mismatches", v.checked, v.mismatches.len());
        if !v.mismatches.is_empty() {
            for m in &v.mismatches {
                eprintln!("mismatch: {m}");
            }
            return Err(CliError::Core(CoreError::Degenerate(
                "bundle disagrees with direct module calls".into(),
            )));
        }
    }
    Ok(())
}

fn configure_threads() -> CliResult {
    let Ok(raw) = std::env::var("LEADTIME_LAB_THREADS") else {
        return Ok(());
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => {
            leadtime_core::exec::configure_threads(n);
            Ok(())
        }
        _ => Err(CliError::Usage(format!(
            "LEADTIME_LAB_THREADS must be a positive integer, got {raw:?}"
        ))),
    }
}

fn version() -> String {
    format!("{} (fixtures sha256:{})", env!("CARGO_PKG_VERSION"), &fixture_sha256()[..16])
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match cli.command {
        Command::IngestCheck(a) => ingest_check(a),
        Command::Describe(a) => describe_cmd(a),
        Command::Divergence(a) => divergence_cmd(a),
        Command::Stl(a) => stl_cmd(a),
        Command::Pickup(a) => pickup_cmd(a),
        Command::Bound(a) => bound_cmd(a),
        Command::Simulate(s) => simulate_cmd(s),
        Command::Monitor(a) => monitor_cmd(a),
        Command::Analyze(a) => analyze_cmd(a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let matches = match Cli::command().version(version()).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            if json_errors {
                report(&CliError::Usage(e.to_string().trim().to_string()), true);
            } else {
                let _ = e.print();
            }
            std::process::exit(1);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    let json = cli.json_errors;
    if let Err(e) = run(cli) {
        report(&e, json);
        std::process::exit(e.exit_code());
    }
}
