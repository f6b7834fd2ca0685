//! `heilbronn`: solve, verify and report on Heilbronn configurations.

mod plot;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heilbronn_core::bnb::{self, SearchParams, Termination};
use heilbronn_core::bounds::{bound_table, bound_table_csv, bound_table_svg, erdos_config, roth_upper};
use heilbronn_core::corpus::{self, get_entry, validate_entry, Provenance, ValidationMode};
use heilbronn_core::geometry::{area_distribution, cluster_areas, Configuration, DEFAULT_CLUSTER_GAP};
use heilbronn_core::heuristic::multistart;
use heilbronn_core::model::{build_baseline, build_final};
use heilbronn_core::structure::{
    extract_structure, verify_exact, ExactConfig, ResidueStatus, DEFAULT_COINC_TOL, DEFAULT_CRIT_TOL, DEFAULT_EDGE_TOL,
};
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_LIMIT: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

/// Largest `n` the solver accepts.
const MAX_SOLVE_N: usize = 17;

#[derive(Parser, Debug)]
#[command(name = "heilbronn", version, about = "Heilbronn triangle problem in the unit square")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Heuristic warm start followed by certified branch-and-bound.
    Solve(SolveArgs),
    /// Exact verification of a corpus entry or an exact configuration file.
    Verify(VerifyArgs),
    /// Table of best-known values against classical upper bounds.
    Bounds(BoundsArgs),
    /// Parabola construction modulo a prime with its guaranteed area.
    Erdos(ErdosArgs),
    /// Degeneracy plot and area cluster summary.
    Report(ReportArgs),
    /// Validation summary of the embedded corpus, optionally exported.
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelChoice {
    Baseline,
    Final,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "final")]
    model: ModelChoice,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Heuristic starts when no warm start file is given.
    #[arg(long, default_value_t = 200)]
    starts: usize,
    #[arg(long)]
    warm_start: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bound trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Corpus entry.
    #[arg(long)]
    n: Option<usize>,
    /// Configuration or solution JSON.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// `lo:hi`, both within 3..16.
    #[arg(long, default_value = "3:16")]
    range: String,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ErdosArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    degeneracy_svg: Option<PathBuf>,
    /// Cluster summary.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Relative gap separating area clusters.
    #[arg(long, default_value_t = DEFAULT_CLUSTER_GAP)]
    gap: f64,
}

#[derive(Args, Debug)]
struct CorpusArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let out = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Bounds(a) => cmd_bounds(a),
        Cmd::Erdos(a) => cmd_erdos(a),
        Cmd::Report(a) => cmd_report(a),
        Cmd::Corpus(a) => cmd_corpus(a),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Floating points from a `points` or `coordinates` array.
fn read_points(v: &Value) -> Result<Configuration, Failure> {
    let arr = v
        .get("points")
        .or_else(|| v.get("coordinates"))
        .and_then(Value::as_array)
        .ok_or_else(|| usage("expected a \"points\" or \"coordinates\" array"))?;
    let pts = arr
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([x, y]) => x.as_f64().zip(y.as_f64()).ok_or_else(|| usage("coordinates must be numbers")),
            _ => Err(usage("points must be [x, y] pairs")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(n) = v.get("n").and_then(Value::as_u64) {
        if n as usize != pts.len() {
            return Err(usage(format!("n = {n} but {} points given", pts.len())));
        }
    }
    Configuration::new(pts).map_err(|e| usage(e.to_string()))
}

fn points_json(c: &Configuration) -> Value {
    c.points().iter().map(|&(x, y)| json!([x, y])).collect()
}

/// Objective bound for the final model: the previous optimum where it is
/// proven, otherwise `1/(n-3)`.
fn previous_delta(n: usize) -> f64 {
    if n <= 4 {
        return 0.5;
    }
    match get_entry(n - 1) {
        Ok(e) if e.provenance == Provenance::ProvenOptimal => e.delta_f64(),
        _ => roth_upper(n - 1).expect("n - 1 >= 3").to_f64().expect("finite"),
    }
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    if a.n < 3 || a.n > MAX_SOLVE_N {
        return Err(usage(format!("--n must lie in 3..={MAX_SOLVE_N}")));
    }
    if !(a.eps > 0.0 && a.eps.is_finite()) {
        return Err(usage(format!("--eps must be positive, got {}", a.eps)));
    }
    let time_limit = match a.time_limit {
        Some(t) if !(t > 0.0 && t.is_finite()) => return Err(usage(format!("--time-limit must be positive, got {t}"))),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    if a.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let model = match a.model {
        ModelChoice::Baseline => build_baseline(a.n),
        ModelChoice::Final => build_final(a.n, previous_delta(a.n)),
    }
    .map_err(|e| usage(e.to_string()))?;
    let warm = match &a.warm_start {
        Some(p) => {
            let c = read_points(&read_json(p)?)?;
            if c.n() != a.n {
                return Err(usage(format!("warm start has {} points, expected {}", c.n(), a.n)));
            }
            c
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            multistart(a.n, a.starts, 50, &mut rng).map_err(|e| usage(e.to_string()))?
        }
    };
    let params = SearchParams {
        epsilon: a.eps,
        time_limit,
        node_limit: a.node_limit,
        workers: a.workers,
        seed: a.seed,
        ..Default::default()
    };
    let cert = bnb::solve(&model, &params, Some(&warm)).map_err(|e| usage(e.to_string()))?;
    let closed = cert.termination == Termination::GapClosed;
    let mut sol = json!({
        "n": a.n,
        "model": format!("{:?}", a.model).to_lowercase(),
        "coordinates": points_json(&cert.incumbent),
        "z_lb": cert.z_lb,
        "z_ub": cert.z_ub,
        "gap": cert.gap,
        "nodes": cert.nodes,
        "time": cert.wall_time.as_secs_f64(),
        "termination": cert.termination.to_string(),
    });
    if closed {
        sol["structure"] = match extract_structure(&cert.incumbent, cert.z_lb, DEFAULT_CRIT_TOL, DEFAULT_EDGE_TOL, DEFAULT_COINC_TOL) {
            Ok(r) => r.to_json(),
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    println!(
        "n={} z in [{:.10}, {:.10}] gap {:.3e} nodes {} time {:.2}s {}",
        a.n,
        cert.z_lb,
        cert.z_ub,
        cert.gap,
        cert.nodes,
        cert.wall_time.as_secs_f64(),
        cert.termination
    );
    match &a.out {
        Some(p) => write_file(p, &pretty(&sol))?,
        None => print!("{}", pretty(&sol)),
    }
    if let Some(p) = &a.trace {
        let mut buf = Vec::new();
        cert.write_trace_csv(&mut buf).expect("writing to memory");
        write_file(p, &String::from_utf8(buf).expect("ascii"))?;
    }
    Ok(if closed { EXIT_OK } else { EXIT_LIMIT })
}

fn describe_status(s: &ResidueStatus) -> String {
    match s {
        ResidueStatus::Zero => "zero".into(),
        ResidueStatus::Positive(v) => format!("nonzero (+{v:.3e})"),
        ResidueStatus::Negative(v) => format!("nonzero ({v:.3e})"),
    }
}

fn verify_exact_config(x: &ExactConfig) -> CmdResult {
    let r = match verify_exact(x) {
        Ok(r) => r,
        Err(e) => {
            println!("verification failed: {e}");
            return Ok(EXIT_VERIFY_FAILED);
        }
    };
    println!("n = {}, claimed minimum area {} ~ {:.12}", x.n(), x.delta, x.delta.to_f64());
    println!("points inside the unit square: {}", r.in_square);
    println!("minimum area equals the claim: {}", r.min_area_match);
    println!("critical triangles: {}", r.critical_count);
    for eq in &r.equations {
        let (a, b) = (eq.lhs, eq.rhs);
        println!(
            "  A({},{},{}) = A({},{},{}): {}",
            a.0,
            a.1,
            a.2,
            b.0,
            b.1,
            b.2,
            describe_status(&eq.status)
        );
    }
    let ok = r.passed();
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    if let Some(n) = a.source.n {
        let e = get_entry(n).map_err(|e| usage(e.to_string()))?;
        if e.mode == ValidationMode::Exact {
            return verify_exact_config(e.exact().expect("exact entries carry exact data"));
        }
        let line = validate_entry(&e);
        println!("n = {n}: {}", line.detail);
        println!("no collinear triple: {}", line.no_collinear);
        println!("{}", if line.passed { "PASS" } else { "FAIL" });
        return Ok(if line.passed { EXIT_OK } else { EXIT_VERIFY_FAILED });
    }
    let path = a.source.file.expect("clap enforces one source");
    let v = read_json(&path)?;
    let x = ExactConfig::from_json(&v).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    verify_exact_config(&x)
}

fn parse_range(s: &str) -> Result<(usize, usize), Failure> {
    let (a, b) = s.split_once(':').ok_or_else(|| usage(format!("range {s:?} is not lo:hi")))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| usage(format!("range {s:?} is not lo:hi")));
    Ok((p(a)?, p(b)?))
}

fn cmd_bounds(a: BoundsArgs) -> CmdResult {
    let (lo, hi) = parse_range(&a.range)?;
    let rows = bound_table(lo, hi).map_err(|e| usage(e.to_string()))?;
    let csv = bound_table_csv(&rows);
    print!("{csv}");
    if let Some(p) = &a.csv {
        write_file(p, &csv)?;
    }
    if let Some(p) = &a.svg {
        write_file(p, &bound_table_svg(&rows))?;
    }
    Ok(EXIT_OK)
}

fn cmd_erdos(a: ErdosArgs) -> CmdResult {
    let e = erdos_config(a.n).map_err(|e| usage(e.to_string()))?;
    let text = pretty(&e.to_json());
    match &a.out {
        Some(p) => {
            write_file(p, &text)?;
            println!(
                "n = {}, p = {}, min area {} >= guarantee {}",
                a.n, e.p, e.min_area, e.guarantee
            );
        }
        None => print!("{text}"),
    }
    Ok(if e.guarantee_holds() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_report(a: ReportArgs) -> CmdResult {
    let config = match (a.source.n, &a.source.file) {
        (Some(n), _) => get_entry(n).map_err(|e| usage(e.to_string()))?.configuration(),
        (None, Some(p)) => read_points(&read_json(p)?)?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    let dist = area_distribution(&config);
    let clusters = cluster_areas(&dist, a.gap).map_err(|e| usage(e.to_string()))?;
    let mut csv = String::from("level,multiplicity,critical\n");
    for (k, c) in clusters.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", c.level, c.multiplicity, k == 0));
    }
    println!("n = {}, {} triangles, minimum area {:.12}", config.n(), dist.len(), dist.min_area);
    print!("{csv}");
    if let Some(p) = &a.csv {
        write_file(p, &csv)?;
    }
    if let Some(p) = &a.degeneracy_svg {
        let critical = clusters.first().map_or(0, |c| c.multiplicity);
        write_file(p, &plot::degeneracy_svg(&dist, critical))?;
    }
    Ok(EXIT_OK)
}

fn cmd_corpus(a: CorpusArgs) -> CmdResult {
    let lines = corpus::validate_corpus();
    for l in &lines {
        println!(
            "n = {:2} {:7} min area {:.8} {}",
            l.n,
            if l.passed { "PASS" } else { "FAIL" },
            l.min_area,
            l.detail
        );
    }
    if let Some(p) = &a.out {
        write_file(p, &pretty(&corpus::corpus_json()))?;
    }
    Ok(if lines.iter().all(|l| l.passed) { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
