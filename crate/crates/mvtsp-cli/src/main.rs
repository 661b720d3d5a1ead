//! Command-line front end: instance generation, validation, solving and
//! batch benchmarking.
//!
//! Exit codes: 0 success, 1 domain failure (metric violations, infeasible or
//! capped solves), 2 usage or parse errors. Machine-readable failure reasons
//! go to stderr as one JSON object.

use clap::{Parser, Subcommand};
use mvtsp::instance::{decompose_closed, decompose_path_cycles, Instance, TourSolution};
use mvtsp::instgen::{generate, MetricKind};
use mvtsp::lp::held_karp_mv;
use mvtsp::oracle::{exact_mvtsp_cycle, exact_mvtsp_path, exact_single_visit_path, OracleCaps};
use mvtsp::pathtsp::{approx_15, mvtsp_15};
use mvtsp::rational::{format_rat, parse_int, Int, Rat};
use mvtsp::transport::approx_25;
use num_traits::{One, Signed};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "mvtsp", about = "Metric many-visits path TSP toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file: structure and metric invariants.
    Validate { file: PathBuf },
    /// Solve an instance and emit tour JSON.
    Solve {
        /// exact | tp25 | zk15 | mvtsp15
        #[arg(long)]
        algo: String,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional pipeline report path (zk15/mvtsp15 only).
        #[arg(long)]
        report: Option<PathBuf>,
        file: PathBuf,
    },
    /// Generate a random metric instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rmax: u64,
        #[arg(long)]
        seed: u64,
        /// euclidean | random-metric
        #[arg(long, default_value = "euclidean")]
        metric: String,
        /// Generate a closed-tour instance (no endpoints).
        #[arg(long, default_value_t = false)]
        cycle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run algorithms over a directory of instances and write a CSV report.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated list of algorithms.
        #[arg(long)]
        algos: String,
        #[arg(long)]
        report: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Domain failure carrying a machine-readable kind.
struct Failure {
    kind: &'static str,
    message: String,
    exit: i32,
}

impl Failure {
    fn domain(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
            exit: 1,
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        Failure {
            kind: "parse",
            message: message.into(),
            exit: 2,
        }
    }
}

impl From<mvtsp::Error> for Failure {
    fn from(e: mvtsp::Error) -> Self {
        match &e {
            mvtsp::Error::Parse(_) => Failure::parse(e.to_string()),
            mvtsp::Error::CapsExceeded(_) => Failure::domain("caps-exceeded", e.to_string()),
            mvtsp::Error::Infeasible(_) => Failure::domain("infeasible", e.to_string()),
            _ => Failure::domain("error", e.to_string()),
        }
    }
}

fn oracle_caps_from_env() -> OracleCaps {
    match std::env::var("MVTSP_ORACLE_CAPS") {
        Ok(spec) => {
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() == 2 {
                if let (Ok(n), Ok(r)) = (parts[0].trim().parse::<usize>(), parse_int(parts[1])) {
                    return OracleCaps {
                        max_n: n,
                        max_request: r,
                    };
                }
            }
            eprintln!("warning: ignoring malformed MVTSP_ORACLE_CAPS={spec:?}");
            OracleCaps::default()
        }
        Err(_) => OracleCaps::default(),
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    Ok(Instance::from_json(&text)?)
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::domain("io", format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn cmd_validate(file: &Path) -> Result<(), Failure> {
    let inst = read_instance(file)?;
    let report = inst.validate_metric();
    if report.is_empty() {
        println!("ok: {} cities, metric invariants hold", inst.n());
        Ok(())
    } else {
        for v in &report {
            match v {
                mvtsp::instance::MetricViolation::Triangle { u, v, w } => {
                    println!("triangle violation: c({u},{w}) > c({u},{v}) + c({v},{w})");
                }
                mvtsp::instance::MetricViolation::SelfLoop { v } => {
                    println!("self-loop violation at {v}: c({v},{v}) > 2 min incident cost");
                }
            }
        }
        Err(Failure::domain(
            "metric-violation",
            format!("{} metric violations", report.len()),
        ))
    }
}

/// Tour JSON with optional certification fields.
fn tour_json(tour: &TourSolution, lower_bound: Option<&Rat>) -> String {
    let edges: Vec<_> = tour
        .multigraph
        .edges()
        .map(|(u, v, m)| json!([u, v, m.to_string()]))
        .collect();
    let mut obj = json!({
        "edges": edges,
        "cost": format_rat(&tour.total_cost),
    });
    if let Some(lb) = lower_bound {
        obj["lower_bound"] = json!(format_rat(lb));
        if lb.is_positive() {
            obj["ratio_to_lb"] = json!(format_rat(&(&tour.total_cost / lb)));
        }
    }
    serde_json::to_string_pretty(&obj).expect("tour serialization cannot fail")
}

struct SolveOutcome {
    tour: TourSolution,
    lower_bound: Option<Rat>,
    report: Option<String>,
}

fn run_algo(inst: &Instance, algo: &str, caps: &OracleCaps) -> Result<SolveOutcome, Failure> {
    match algo {
        "exact" => {
            let (cost, graph) = if inst.t().is_some() {
                exact_mvtsp_path(inst, caps)?
            } else {
                exact_mvtsp_cycle(inst, caps)?
            };
            let decomposition = if let Some(t) = inst.t() {
                decompose_path_cycles(&graph, inst.s(), t)?
            } else {
                decompose_closed(&graph)?
            };
            Ok(SolveOutcome {
                tour: TourSolution {
                    multigraph: graph,
                    decomposition,
                    total_cost: cost,
                },
                lower_bound: None,
                report: None,
            })
        }
        "tp25" => {
            let unit = Instance::new(
                (0..inst.n())
                    .map(|u| (0..inst.n()).map(|v| inst.cost(u, v).clone()).collect())
                    .collect(),
                vec![Int::one(); inst.n()],
                inst.s(),
                inst.t(),
            )?;
            let (_, path) = exact_single_visit_path(&unit, 12)?;
            let tour = approx_25(inst, &path)?;
            let (_, hk, _) = held_karp_mv(inst)?;
            Ok(SolveOutcome {
                tour,
                lower_bound: Some(hk),
                report: None,
            })
        }
        "zk15" => {
            let run = approx_15(inst)?;
            Ok(SolveOutcome {
                report: Some(run.report_json(None)),
                lower_bound: Some(run.hk_value.clone()),
                tour: run.tour,
            })
        }
        "mvtsp15" => {
            let (tour, run) = mvtsp_15(inst)?;
            Ok(SolveOutcome {
                report: Some(run.report_json(None)),
                lower_bound: Some(run.hk_value.clone()),
                tour,
            })
        }
        other => Err(Failure::parse(format!("unknown algorithm {other:?}"))),
    }
}

fn cmd_solve(
    algo: &str,
    file: &Path,
    out: Option<&PathBuf>,
    report: Option<&PathBuf>,
) -> Result<(), Failure> {
    let inst = read_instance(file)?;
    let violations = inst.validate_metric();
    if !violations.is_empty() {
        return Err(Failure::domain(
            "metric-violation",
            format!("{} metric violations; refusing to solve", violations.len()),
        ));
    }
    let caps = oracle_caps_from_env();
    let outcome = run_algo(&inst, algo, &caps)?;
    write_output(out, &tour_json(&outcome.tour, outcome.lower_bound.as_ref()))?;
    if let Some(path) = report {
        match &outcome.report {
            Some(r) => std::fs::write(path, r).map_err(|e| {
                Failure::domain("io", format!("cannot write {}: {e}", path.display()))
            })?,
            None => {
                return Err(Failure::parse(format!(
                    "--report is only available for zk15/mvtsp15, not {algo}"
                )))
            }
        }
    }
    Ok(())
}

fn cmd_gen(
    n: usize,
    rmax: u64,
    seed: u64,
    metric: &str,
    cycle: bool,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    if n < 2 {
        return Err(Failure::parse("need at least two cities".to_string()));
    }
    let kind: MetricKind = metric.parse().map_err(Failure::parse)?;
    let inst = generate(n, rmax, seed, kind, !cycle);
    debug_assert!(inst.validate_metric().is_empty());
    write_output(out, &inst.to_json())
}

fn cmd_bench(dir: &Path, algos: &str, report: &Path, jobs: Option<usize>) -> Result<(), Failure> {
    let algos: Vec<String> = algos
        .split(',')
        .map(|a| a.trim().to_string())
        .filter(|a| !a.is_empty())
        .collect();
    if algos.is_empty() {
        return Err(Failure::parse("no algorithms given".to_string()));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();

    let caps = oracle_caps_from_env();
    let mut work: Vec<(PathBuf, String)> = Vec::new();
    for f in &files {
        for a in &algos {
            work.push((f.clone(), a.clone()));
        }
    }
    let queue = Mutex::new(work.into_iter());
    let results: Mutex<Vec<(String, String, String)>> = Mutex::new(Vec::new());
    let workers = jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1))
        .max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().next();
                let Some((file, algo)) = job else { break };
                let name = file
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let row = bench_row(&file, &algo, &caps);
                results.lock().unwrap().push((name, algo, row));
            });
        }
    });

    let mut rows = results.into_inner().unwrap();
    rows.sort();
    let mut csv = String::from("instance,algo,status,cost,lower_bound,oracle_cost,ratio,wall_ms\n");
    for (name, algo, rest) in rows {
        csv.push_str(&format!("{name},{algo},{rest}\n"));
    }
    std::fs::write(report, csv)
        .map_err(|e| Failure::domain("io", format!("cannot write {}: {e}", report.display())))?;
    Ok(())
}

/// One CSV row tail: status,cost,lower_bound,oracle_cost,ratio,wall_ms.
fn bench_row(file: &Path, algo: &str, caps: &OracleCaps) -> String {
    let started = Instant::now();
    let inst = match read_instance(file) {
        Ok(i) => i,
        Err(f) => return format!("error:{},,,,,{}", f.kind, started.elapsed().as_millis()),
    };
    let outcome = match run_algo(&inst, algo, caps) {
        Ok(o) => o,
        Err(f) => return format!("error:{},,,,,{}", f.kind, started.elapsed().as_millis()),
    };
    let wall = started.elapsed().as_millis();
    let cost = format_rat(&outcome.tour.total_cost);
    let lb = outcome
        .lower_bound
        .as_ref()
        .map(format_rat)
        .unwrap_or_default();
    let oracle = if algo == "exact" {
        Some(outcome.tour.total_cost.clone())
    } else {
        let res = if inst.t().is_some() {
            exact_mvtsp_path(&inst, caps)
        } else {
            exact_mvtsp_cycle(&inst, caps)
        };
        res.ok().map(|(c, _)| c)
    };
    let oracle_str = oracle.as_ref().map(format_rat).unwrap_or_default();
    let ratio = match (&oracle, &outcome.lower_bound) {
        (Some(o), _) if o.is_positive() => format_rat(&(&outcome.tour.total_cost / o)),
        (_, Some(lb)) if lb.is_positive() => format_rat(&(&outcome.tour.total_cost / lb)),
        _ => String::new(),
    };
    format!("ok,{cost},{lb},{oracle_str},{ratio},{wall}")
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { file } => cmd_validate(file),
        Command::Solve {
            algo,
            out,
            report,
            file,
        } => cmd_solve(algo, file, out.as_ref(), report.as_ref()),
        Command::Gen {
            n,
            rmax,
            seed,
            metric,
            cycle,
            out,
        } => cmd_gen(*n, *rmax, *seed, metric, *cycle, out.as_ref()),
        Command::Bench {
            dir,
            algos,
            report,
            jobs,
        } => cmd_bench(dir, algos, report, *jobs),
    };
    if let Err(f) = result {
        eprintln!(
            "{}",
            json!({"error": f.kind, "message": f.message})
        );
        std::process::exit(f.exit);
    }
}
