use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use coupled_fp::conditions::{check_banach_k, check_samet, check_strict_contraction, check_symmetric_mk};
use coupled_fp::problems::Instance;
use coupled_fp::space::DEFAULT_TAU_METRIC;
use coupled_fp::{
    audit_space, builtin, check_mixed_monotone, estimate_delta_curve, multi_start_uniqueness, probe_comparability,
    solve, FiniteSpace, OrderedMetricSpace, PairPoint, Problem, RealLine, Scalar, SolveOptions, SCHEMA_VERSION,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const THREADS_ENV: &str = "COUPLED_FP_THREADS";

/// Coupled fixed points of mixed monotone operators: solve, verify
/// contractive conditions, estimate δ(ε), probe uniqueness, audit spaces.
#[derive(Parser)]
#[command(name = "coupled-fp", version)]
struct Cli {
    #[command(subcommand)]
    command: Invocation,
}

#[derive(Subcommand)]
enum Invocation {
    /// Picard iteration from the problem's start (or --start).
    Solve(RunArgs),
    /// Mixed monotone, Banach, Meir–Keeler, symmetric Meir–Keeler and strict
    /// contraction checks.
    Verify(RunArgs),
    /// Largest δ(ε) found for the symmetric Meir–Keeler condition.
    DeltaCurve(RunArgs),
    /// Multi-start endpoint comparison, comparability rate and diagonal check.
    Uniqueness(RunArgs),
    /// Metric and partial-order axioms of the base space.
    AuditSpace(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Command {
    Solve,
    Verify,
    DeltaCurve,
    Uniqueness,
    AuditSpace,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Built-in name, `linear(a,b,c)`, `finite_poset(<file>)` or a `.json` file.
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "1e-10")]
    tol: String,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated ε values; defaults depend on the problem.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    eps_grid: Option<Vec<String>>,
    /// Directory for output files; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// `verify` uses δ(ε) = factor·ε for the band conditions.
    #[arg(long, default_value = "0.125")]
    delta_factor: String,
    /// Starting pair `x,y` (element names or indices on finite problems);
    /// repeat for several starts.
    #[arg(long, allow_hyphen_values = true)]
    start: Vec<String>,
    /// Number of seeded admissible starts for `uniqueness` when no --start is given.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    starts: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let (command, args) = match Cli::parse().command {
        Invocation::Solve(a) => (Command::Solve, a),
        Invocation::Verify(a) => (Command::Verify, a),
        Invocation::DeltaCurve(a) => (Command::DeltaCurve, a),
        Invocation::Uniqueness(a) => (Command::Uniqueness, a),
        Invocation::AuditSpace(a) => (Command::AuditSpace, a),
    };
    match run(command, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Input problems exit with status 2, everything else with 1.
enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

fn classify(e: coupled_fp::Error) -> Failure {
    if e.is_input_error() {
        Failure::Input(e.into())
    } else {
        Failure::Runtime(e.into())
    }
}

fn run(command: Command, args: &RunArgs) -> Result<(), Failure> {
    configure_threads().map_err(Failure::Input)?;
    let problem = builtin(&args.problem).map_err(classify)?;
    let artifacts = match &problem {
        Problem::Real(inst) => execute(command, args, inst),
        Problem::Finite(inst) => execute(command, args, inst),
    }?;
    emit(args, &artifacts).map_err(Failure::Runtime)
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring the thread pool")
}

/// What a command produced: the primary document (printed when no output
/// directory is given) and the files to write otherwise.
struct Artifacts {
    stdout: String,
    files: Vec<(String, String)>,
}

fn emit(args: &RunArgs, artifacts: &Artifacts) -> anyhow::Result<()> {
    if let Some(dir) = &args.output {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, body) in &artifacts.files {
            write_file(&dir.join(name), body)?;
        }
    }
    print!("{}", artifacts.stdout);
    Ok(())
}

fn write_file(path: &Path, body: &str) -> anyhow::Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Point syntax for `--start`.
trait PointSyntax: OrderedMetricSpace {
    fn parse_point(&self, text: &str) -> Option<Self::Point>;
}

impl PointSyntax for RealLine {
    fn parse_point(&self, text: &str) -> Option<f64> {
        text.trim().parse::<f64>().ok().filter(|v| v.is_finite())
    }
}

impl PointSyntax for FiniteSpace {
    fn parse_point(&self, text: &str) -> Option<usize> {
        let text = text.trim();
        self.index_of(text).or_else(|| text.parse::<usize>().ok().filter(|&i| i < self.len()))
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(anyhow!(msg.into()))
}

fn scalar<S: Scalar>(flag: &str, text: &str) -> Result<S, Failure> {
    S::parse(text)
        .filter(|v| v.is_strictly_positive())
        .ok_or_else(|| input(format!("--{flag} must be a positive number, got `{text}`")))
}

fn parse_pair<S: PointSyntax>(space: &S, text: &str) -> Result<PairPoint<S::Point>, Failure> {
    let parsed =
        text.split_once(',').and_then(|(a, b)| Some(PairPoint::new(space.parse_point(a)?, space.parse_point(b)?)));
    parsed.ok_or_else(|| {
        input(format!("--start expects `x,y` with both points in {}, got `{text}`", space.description()))
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Runtime(e.into()))
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let runtime = |e: csv::Error| Failure::Runtime(e.into());
    out.write_record(header).map_err(runtime)?;
    for row in rows {
        out.write_record(row).map_err(runtime)?;
    }
    let bytes = out.into_inner().map_err(|e| Failure::Runtime(anyhow!(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Failure::Runtime(e.into()))
}

fn point_text<P: Serialize>(p: &P) -> String {
    serde_json::to_string(p).map(|s| s.trim_matches('"').to_string()).unwrap_or_default()
}

fn execute<S>(command: Command, args: &RunArgs, inst: &Instance<S>) -> Result<Artifacts, Failure>
where
    S: PointSyntax,
{
    let tol: S::Scalar = scalar("tol", &args.tol)?;
    let samples = args.samples as usize;
    let max_iter = args.max_iter as usize;
    let epsilon_grid: Vec<S::Scalar> = match &args.eps_grid {
        Some(values) => values.iter().map(|v| scalar("eps-grid", v)).collect::<Result<_, _>>()?,
        None => inst.default_epsilon_grid.clone(),
    };
    if epsilon_grid.is_empty() {
        return Err(input("--eps-grid must not be empty"));
    }
    let starts: Vec<PairPoint<S::Point>> =
        args.start.iter().map(|s| parse_pair(&inst.space, s)).collect::<Result<_, _>>()?;
    let op = inst.operator.as_ref();
    let space = &inst.space;
    let header = |cmd: &str| {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": cmd,
            "problem": inst.name,
            "space": space.description(),
            "operator": op.description(),
        })
    };

    match command {
        Command::Solve => {
            let start = match starts.as_slice() {
                [] => inst.default_start.clone(),
                [one] => one.clone(),
                _ => return Err(input("solve takes a single --start")),
            };
            let trace = solve(space, op, &start, &SolveOptions::new(tol, max_iter)).map_err(classify)?;
            let mut summary = header("solve");
            merge(&mut summary, &trace.summary())?;
            let summary = to_json(&summary)?;
            let mut csv = Vec::new();
            trace.write_csv(&mut csv).map_err(classify)?;
            let csv = String::from_utf8(csv).map_err(|e| Failure::Runtime(e.into()))?;
            let (trace_name, trace_body) = match args.format {
                Format::Csv => ("trace.csv", csv.clone()),
                Format::Json => ("trace.json", to_json(&trace)?),
            };
            let stdout = match (args.format, &args.output) {
                (Format::Csv, None) => csv,
                _ => summary.clone(),
            };
            Ok(Artifacts { stdout, files: vec![("summary.json".into(), summary), (trace_name.into(), trace_body)] })
        }
        Command::Verify => {
            let factor: S::Scalar = scalar("delta-factor", &args.delta_factor)?;
            let delta = move |eps: &S::Scalar| factor.clone() * eps.clone();
            let mut reports = vec![serde_json::to_value(
                check_mixed_monotone(space, op, samples.max(2), args.seed).map_err(classify)?,
            )
            .map_err(|e| Failure::Runtime(e.into()))?];
            if let Some((a, b)) = op.lipschitz() {
                // 2·max(a, b) bounds d(F(x,y), F(u,v)) by k·d₂; probe just
                // below 1 when that bound gives nothing.
                let bound = 2.0 * a.max(b);
                let k = if bound < 1.0 { bound } else { 1.0 - 1e-9 };
                let k = S::Scalar::from_f64(k).ok_or_else(|| input("invalid Banach constant"))?;
                reports.push(value(&check_banach_k(space, op, &k, samples, args.seed).map_err(classify)?)?);
            }
            reports.push(value(&check_samet(space, op, &epsilon_grid, &delta, samples, args.seed).map_err(classify)?)?);
            reports.push(value(
                &check_symmetric_mk(space, op, &epsilon_grid, &delta, samples, args.seed).map_err(classify)?,
            )?);
            reports.push(value(&check_strict_contraction(space, op, samples, args.seed).map_err(classify)?)?);
            let mut doc = header("verify");
            let obj = doc.as_object_mut().expect("object");
            obj.insert("seed".into(), json!(args.seed));
            obj.insert("samples".into(), json!(samples));
            obj.insert("delta_rule".into(), json!(format!("delta(eps) = {} * eps", args.delta_factor)));
            obj.insert("reports".into(), Value::Array(reports.clone()));
            let rows = verify_rows(&reports);
            let header_row = [
                "condition_id",
                "verdict",
                "exhaustive",
                "k",
                "epsilon",
                "delta",
                "band_samples",
                "violations",
                "samples_used",
                "comparable_pairs_used",
            ];
            finish(args, "verify", to_json(&doc)?, to_csv(&header_row, &rows)?)
        }
        Command::DeltaCurve => {
            let curve = estimate_delta_curve(space, op, &epsilon_grid, samples, args.seed).map_err(classify)?;
            let mut doc = header("delta-curve");
            let obj = doc.as_object_mut().expect("object");
            obj.insert("seed".into(), json!(args.seed));
            obj.insert("samples".into(), json!(samples));
            obj.insert("curve".into(), value(&curve)?);
            let rows: Vec<Vec<String>> =
                curve.iter().map(|d| vec![d.epsilon.repr(), d.delta_max.repr(), d.exhaustive.to_string()]).collect();
            finish(args, "delta_curve", to_json(&doc)?, to_csv(&["epsilon", "delta_max", "exhaustive"], &rows)?)
        }
        Command::Uniqueness => {
            let starts = if starts.is_empty() {
                inst.admissible_starts(args.starts as usize, args.seed).map_err(classify)?
            } else {
                starts
            };
            let options = SolveOptions::new(tol, max_iter);
            let mut report = multi_start_uniqueness(space, op, &starts, &options).map_err(classify)?;
            report.comparability_rate =
                Some(probe_comparability(space, samples, args.seed, inst.bound_search.as_deref()).map_err(classify)?);
            let mut doc = header("uniqueness");
            merge(&mut doc, &report)?;
            let rows: Vec<Vec<String>> = report
                .runs
                .iter()
                .map(|r| {
                    let endpoint = r.endpoint.as_ref();
                    vec![
                        point_text(&r.start.first),
                        point_text(&r.start.second),
                        r.termination.map(|t| point_text(&t)).unwrap_or_default(),
                        r.iterations.to_string(),
                        endpoint.map(|e| point_text(&e.first)).unwrap_or_default(),
                        endpoint.map(|e| point_text(&e.second)).unwrap_or_default(),
                        r.residual.as_ref().map(Scalar::repr).unwrap_or_default(),
                        r.error.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            let header_row = ["x0", "y0", "termination", "iterations", "x_end", "y_end", "residual", "error"];
            finish(args, "uniqueness", to_json(&doc)?, to_csv(&header_row, &rows)?)
        }
        Command::AuditSpace => {
            let report = audit_space(space, samples, args.seed, DEFAULT_TAU_METRIC).map_err(classify)?;
            let mut doc = header("audit-space");
            doc.as_object_mut().expect("object").remove("operator");
            merge(&mut doc, &report)?;
            let rows: Vec<Vec<String>> = report
                .axioms
                .iter()
                .map(|a| {
                    vec![
                        point_text(&a.axiom),
                        a.passed.to_string(),
                        a.checked.to_string(),
                        a.counterexample
                            .as_ref()
                            .map(|c| format!("{}: {}", point_text(&c.points), c.detail))
                            .unwrap_or_default(),
                    ]
                })
                .collect();
            finish(
                args,
                "audit_space",
                to_json(&doc)?,
                to_csv(&["axiom", "passed", "checked", "counterexample"], &rows)?,
            )
        }
    }
}

fn value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Runtime(e.into()))
}

/// Appends the fields of `extra` (an object) to `doc`, keeping `doc`'s keys first.
fn merge<T: Serialize>(doc: &mut Value, extra: &T) -> Result<(), Failure> {
    let Value::Object(fields) = value(extra)? else {
        return Err(Failure::Runtime(anyhow!("expected an object")));
    };
    let obj = doc.as_object_mut().expect("object");
    for (k, v) in fields {
        if k != "schema_version" {
            obj.insert(k, v);
        }
    }
    Ok(())
}

fn finish(args: &RunArgs, stem: &str, json: String, csv: String) -> Result<Artifacts, Failure> {
    let (name, body) = match args.format {
        Format::Json => (format!("{stem}.json"), json),
        Format::Csv => (format!("{stem}.csv"), csv),
    };
    let stdout = if args.output.is_some() { String::new() } else { body.clone() };
    Ok(Artifacts { stdout, files: vec![(name, body)] })
}

fn verify_rows(reports: &[Value]) -> Vec<Vec<String>> {
    let text = |v: &Value| match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let mut rows = Vec::new();
    for r in reports {
        let base = |eps: &Value| {
            vec![
                text(&r["condition_id"]),
                text(&r["verdict"]),
                text(&r["exhaustive"]),
                text(&r["k"]),
                text(&eps["epsilon"]),
                text(&eps["delta"]),
                text(&eps["band_samples"]),
                text(&eps["violations"]),
                text(&r["samples_used"]),
                text(&r["comparable_pairs_used"]),
            ]
        };
        match r["epsilon_grid"].as_array() {
            Some(probes) if !probes.is_empty() => rows.extend(probes.iter().map(base)),
            _ => rows.push(base(&Value::Null)),
        }
    }
    rows
}
