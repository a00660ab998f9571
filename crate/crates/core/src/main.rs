use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use sclift_core::abcode::{alist_string, parse_alist, AbBase};
use sclift_core::abscount::{count_abs_brute, count_abs_general, CountReport};
use sclift_core::coupler::{
    AssignmentMatrixBm, AssignmentSpec, BaseSpec, CuttingVector, LambdaPolicy, Mode, SCCodeSpec,
};
use sclift_core::optimize::{best_cutting_vector, optimize_bm, ColumnOrder, Objective, SearchConfig};
use sclift_core::windowed::{count_abs_windowed, count_abs_windowed_brute, WindowReport, WindowSpec};
use sclift_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_DISAGREE: u8 = 3;

#[derive(Parser)]
#[command(name = "sclift", version, about = "Spatially coupled LDPC codes from algebraic lifts")]
struct Cli {
    /// Worker threads for counting and search; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an SC parity-check matrix; writes PREFIX.alist, PREFIX.spec, PREFIX.manifest.json.
    Construct(ConstructArgs),
    /// Count (3,3)-absorbing sets of a spec.
    Count(CountArgs),
    /// Count absorbing sets seen by a sliding window.
    Window(WindowArgs),
    /// Search cutting vectors or B_m matrices.
    Optimize(OptimizeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    CuttingVector,
    Bm,
    RandomI,
    RandomIi,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, default_value_t = 3)]
    gamma: usize,
    #[arg(long)]
    p: Option<usize>,
    /// Explicit base matrix in alist format instead of an array-based one.
    #[arg(long, conflicts_with = "p")]
    base: Option<PathBuf>,
    #[arg(long = "L")]
    l: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "J", default_value_t = 1)]
    j: usize,
    #[arg(long, default_value = "terminated")]
    mode: Mode,
    #[arg(long, value_enum)]
    method: Method,
    /// Cutting vector, comma separated.
    #[arg(long)]
    xi: Option<String>,
    /// B_m grid file.
    #[arg(long)]
    bm: Option<PathBuf>,
    /// identity | cyclic:L | file:PATH
    #[arg(long, default_value = "identity")]
    lambda: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep the tailbiting matrix in lift order.
    #[arg(long)]
    no_reorder: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountMethod {
    Brute,
    Line,
    Both,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "line")]
    method: CountMethod,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WindowMethod {
    Class,
    Brute,
    Both,
}

#[derive(Args)]
struct WindowArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "S")]
    s: usize,
    /// Window placement memory; defaults to the code's memory.
    #[arg(long)]
    memory_mode: Option<usize>,
    #[arg(long, value_enum, default_value = "class")]
    method: WindowMethod,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Bm,
    CuttingVector,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    p: usize,
    #[arg(long = "L")]
    l: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// full | window:S
    #[arg(long, default_value = "full")]
    target: String,
    #[arg(long, value_enum, default_value = "bm")]
    space: Space,
    /// Search configuration in key=value form; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long)]
    backtrack: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// ltr | rtl | comma-separated permutation
    #[arg(long)]
    column_order: Option<String>,
    #[arg(long)]
    no_symmetry: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Validation(String),
    Disagreement(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    argv: Vec<String>,
    params: Value,
    seed: u64,
    version: String,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

fn digest(path: &Path) -> Result<FileDigest, Failure> {
    let bytes = fs::read(path)?;
    Ok(FileDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

fn write_manifest(
    prefix: &Path,
    command: &str,
    params: Value,
    seed: u64,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Outcome {
    let manifest = Manifest {
        command: command.into(),
        argv: std::env::args().collect(),
        params,
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
        inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?,
        outputs: outputs.iter().map(|p| digest(p)).collect::<Result<_, _>>()?,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(with_suffix(prefix, "manifest.json"), text + "\n")?;
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_spec(path: &Path) -> Result<SCCodeSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    Ok(SCCodeSpec::parse(&text, path.parent())?)
}

fn parse_lambda(arg: &str, gamma: usize, j: usize) -> Result<LambdaPolicy, Failure> {
    if arg == "identity" {
        Ok(LambdaPolicy::Identity)
    } else if let Some(ell) = arg.strip_prefix("cyclic:") {
        let ell = ell.parse().map_err(|_| Failure::Usage(format!("--lambda cyclic:L needs an integer, got {ell:?}")))?;
        Ok(LambdaPolicy::Cyclic(ell))
    } else if let Some(path) = arg.strip_prefix("file:") {
        let text = fs::read_to_string(path)?;
        let table = LambdaPolicy::parse_table(&text, j)?;
        if let LambdaPolicy::Table(t) = &table {
            if t.len() != gamma {
                return Err(Failure::Validation(format!("lambda table has {} rows, expected {gamma}", t.len())));
            }
        }
        Ok(table)
    } else {
        Err(Failure::Usage(format!("--lambda must be identity, cyclic:L or file:PATH, got {arg:?}")))
    }
}

fn cmd_construct(a: &ConstructArgs) -> Outcome {
    match a.method {
        Method::CuttingVector if a.xi.is_none() => {
            return Err(Failure::Usage("--method cutting-vector requires --xi \"a,b,c\"".into()))
        }
        Method::Bm if a.bm.is_none() => return Err(Failure::Usage("--method bm requires --bm FILE".into())),
        _ => {}
    }
    if a.xi.is_some() && !matches!(a.method, Method::CuttingVector) {
        return Err(Failure::Usage("--xi only applies to --method cutting-vector".into()));
    }
    if a.bm.is_some() && !matches!(a.method, Method::Bm) {
        return Err(Failure::Usage("--bm only applies to --method bm".into()));
    }
    if a.p.is_none() && a.base.is_none() {
        return Err(Failure::Usage("give --p for an array-based base or --base FILE".into()));
    }
    let mut inputs: Vec<PathBuf> = Vec::new();
    let base = match (&a.base, a.p) {
        (Some(path), _) => {
            if matches!(a.method, Method::CuttingVector | Method::Bm) {
                return Err(Failure::Usage("cutting vectors and B_m grids need --p, not --base".into()));
            }
            let matrix = parse_alist(&fs::read_to_string(path)?)?;
            inputs.push(path.clone());
            let source = fs::canonicalize(path)?.display().to_string();
            BaseSpec::Explicit { matrix, source }
        }
        (None, Some(p)) => BaseSpec::ArrayBased(AbBase::new(a.gamma, p)?),
        (None, None) => unreachable!(),
    };
    let gamma = match &base {
        BaseSpec::ArrayBased(ab) => ab.gamma(),
        BaseSpec::Explicit { matrix, .. } => matrix.rows(),
    };
    let assignment = match a.method {
        Method::CuttingVector => {
            let xi = a
                .xi
                .as_deref()
                .unwrap()
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| Failure::Usage(format!("bad --xi entry {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            AssignmentSpec::CuttingVector(CuttingVector::new(xi, a.p.unwrap(), false)?)
        }
        Method::Bm => {
            let path = a.bm.as_ref().unwrap();
            inputs.push(path.clone());
            AssignmentSpec::Bm(AssignmentMatrixBm::parse_grid(&fs::read_to_string(path)?, a.m)?)
        }
        Method::RandomI => AssignmentSpec::RandomI,
        Method::RandomIi => AssignmentSpec::RandomII,
    };
    let m = match (&assignment, a.m) {
        (_, Some(m)) => m,
        (AssignmentSpec::CuttingVector(xi), None) => xi.to_bm(a.p.unwrap()).memory(),
        (AssignmentSpec::Bm(bm), None) => bm.memory(),
        _ => return Err(Failure::Usage("random spreading needs --m".into())),
    };
    if let Some(path) = a.lambda.strip_prefix("file:") {
        inputs.push(PathBuf::from(path));
    }
    let lambda = parse_lambda(&a.lambda, gamma, a.j)?;
    let spec = SCCodeSpec {
        base,
        l: a.l,
        m,
        j: a.j,
        mode: a.mode,
        assignment,
        lambda,
        seed: a.seed,
        reordered: !a.no_reorder || a.mode == Mode::Terminated,
    };
    spec.validate()?;
    let h = spec.build_binary()?;
    let alist = with_suffix(&a.out, "alist");
    let spec_path = with_suffix(&a.out, "spec");
    fs::write(&alist, alist_string(&h))?;
    fs::write(&spec_path, spec.to_text())?;
    let params = json!({
        "rows": h.rows(),
        "cols": h.cols(),
        "spec": spec.to_text(),
    });
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    write_manifest(&a.out, "construct", params, a.seed, &inputs, &[&alist, &spec_path])?;
    eprintln!("wrote {} ({} x {})", alist.display(), h.rows(), h.cols());
    Ok(())
}

fn count_csv(reports: &[&CountReport]) -> String {
    let mut s = String::from("method,L,m,total,mu\n");
    for r in reports {
        let mu: Vec<String> = r.mu.iter().map(u64::to_string).collect();
        s.push_str(&format!("{},{},{},{},{}\n", r.method, r.l, r.m, r.total, mu.join(";")));
    }
    s
}

fn count_diff(a: &CountReport, b: &CountReport) -> Vec<Value> {
    let mut diff = Vec::new();
    if a.total != b.total {
        diff.push(json!({"field": "total", a.method.clone(): a.total, b.method.clone(): b.total}));
    }
    if !a.mu.is_empty() && !b.mu.is_empty() && a.mu != b.mu {
        diff.push(json!({"field": "mu", a.method.clone(): a.mu, b.method.clone(): b.mu}));
    }
    diff
}

fn cmd_count(a: &CountArgs) -> Outcome {
    let spec = read_spec(&a.spec)?;
    let (out, reports, disagreement) = match a.method {
        CountMethod::Brute => {
            let r = count_abs_brute(&spec)?;
            (r.to_json(), vec![r], None)
        }
        CountMethod::Line => {
            let r = count_abs_general(&spec)?;
            for note in &r.notes {
                eprintln!("note: {note}");
            }
            (r.to_json(), vec![r], None)
        }
        CountMethod::Both => {
            let brute = count_abs_brute(&spec)?;
            let line = count_abs_general(&spec)?;
            let diff = count_diff(&brute, &line);
            let out = serde_json::to_string_pretty(&json!({"brute": brute, "line": line, "diff": diff}))
                .expect("report serializes");
            let bad = (!diff.is_empty()).then(|| format!("brute and line counts differ: {}", Value::Array(diff)));
            (out, vec![brute, line], bad)
        }
    };
    emit(&a.out, &out)?;
    if let Some(csv) = &a.csv {
        fs::write(csv, count_csv(&reports.iter().collect::<Vec<_>>()))?;
    }
    match disagreement {
        Some(msg) => Err(Failure::Disagreement(msg)),
        None => Ok(()),
    }
}

fn window_csv(r: &WindowReport) -> String {
    let mut s = String::from("position,row_start,row_end,col_start,col_end,count\n");
    for (i, (w, c)) in r.positions.iter().zip(&r.per_position).enumerate() {
        s.push_str(&format!("{i},{},{},{},{},{c}\n", w.rows.0, w.rows.1, w.cols.0, w.cols.1));
    }
    s
}

fn cmd_window(a: &WindowArgs) -> Outcome {
    let spec = read_spec(&a.spec)?;
    let mode = a.memory_mode.unwrap_or(spec.m);
    if mode != spec.m {
        return Err(Failure::Validation(format!(
            "memory-mode {mode} does not match the code's memory m = {}",
            spec.m
        )));
    }
    let w = WindowSpec::new(a.s, mode)?;
    let (out, report, bad) = match a.method {
        WindowMethod::Class => {
            let r = count_abs_windowed(&spec, &w)?;
            (r.to_json(), r, None)
        }
        WindowMethod::Brute => {
            let r = count_abs_windowed_brute(&spec, &w)?;
            (r.to_json(), r, None)
        }
        WindowMethod::Both => {
            let c = count_abs_windowed(&spec, &w)?;
            let b = count_abs_windowed_brute(&spec, &w)?;
            let mut diff = Vec::new();
            if c.per_position != b.per_position {
                diff.push(json!({"field": "per_position", "class": c.per_position, "brute": b.per_position}));
            }
            if c.standard_total != b.standard_total {
                diff.push(json!({"field": "standard_total", "class": c.standard_total, "brute": b.standard_total}));
            }
            let out = serde_json::to_string_pretty(&json!({"class": c, "brute": b, "diff": diff}))
                .expect("report serializes");
            let bad = (!diff.is_empty()).then(|| format!("class and brute window counts differ: {}", Value::Array(diff)));
            (out, c, bad)
        }
    };
    emit(&a.out, &out)?;
    if let Some(csv) = &a.csv {
        fs::write(csv, window_csv(&report))?;
    }
    match bad {
        Some(msg) => Err(Failure::Disagreement(msg)),
        None => Ok(()),
    }
}

fn parse_target(t: &str, p: usize, l: usize, m: usize) -> Result<Objective, Failure> {
    if t == "full" {
        return Ok(Objective::full(p, l, m));
    }
    let s = t
        .strip_prefix("window:")
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Failure::Usage(format!("--target must be full or window:S, got {t:?}")))?;
    Ok(Objective::windowed(p, l, WindowSpec::new(s, m)?))
}

fn cmd_optimize(a: &OptimizeArgs) -> Outcome {
    let objective = parse_target(&a.target, a.p, a.l, a.m)?;
    let mut inputs = Vec::new();
    let mut config = match &a.config {
        Some(path) => {
            inputs.push(path.clone());
            SearchConfig::parse(&fs::read_to_string(path)?)?
        }
        None => SearchConfig::default(),
    };
    if let Some(v) = a.beam {
        config.beam = v;
    }
    if let Some(v) = a.backtrack {
        config.backtrack = v;
    }
    if let Some(v) = a.budget {
        config.budget = v;
    }
    if let Some(v) = a.seed {
        config.seed = v;
    }
    if let Some(v) = a.restarts {
        config.restarts = v;
    }
    if a.no_symmetry {
        config.symmetry = false;
    }
    if let Some(order) = &a.column_order {
        config.column_order = match order.as_str() {
            "ltr" => ColumnOrder::LeftToRight,
            "rtl" => ColumnOrder::RightToLeft,
            v => ColumnOrder::Custom(
                v.split(',')
                    .map(|x| x.trim().parse().map_err(|_| Failure::Usage(format!("bad --column-order entry {x:?}"))))
                    .collect::<Result<_, _>>()?,
            ),
        };
    }
    config.validate()?;
    let json_path = with_suffix(&a.out, "json");
    let spec_path = with_suffix(&a.out, "spec");
    let ab = AbBase::new(3, a.p)?;
    let mut outputs = vec![json_path.clone(), spec_path.clone()];
    let (result, assignment) = match a.space {
        Space::CuttingVector => {
            let (xi, report) = best_cutting_vector(&objective)?;
            let value = objective.evaluate(&xi.to_bm(a.p))?;
            (json!({"xi": xi.xi(), "value": value, "report": report}), AssignmentSpec::CuttingVector(xi))
        }
        Space::Bm => {
            let r = optimize_bm(&objective, &config)?;
            if r.budget_exhausted {
                eprintln!("note: evaluation budget exhausted; result is best effort");
            }
            let bm_path = with_suffix(&a.out, "bm");
            fs::write(&bm_path, r.bm.to_grid_string())?;
            outputs.push(bm_path);
            if let Some(csv) = &a.csv {
                let mut s = String::from("evaluations,value,phase\n");
                for t in &r.trace {
                    s.push_str(&format!("{},{},{}\n", t.evaluations, t.value, t.phase));
                }
                fs::write(csv, s)?;
            }
            let bm = r.bm.clone();
            (serde_json::to_value(&r).expect("result serializes"), AssignmentSpec::Bm(bm))
        }
    };
    let spec = SCCodeSpec::ab(ab, a.l, assignment)?;
    fs::write(&json_path, serde_json::to_string_pretty(&result).expect("result serializes") + "\n")?;
    fs::write(&spec_path, spec.to_text())?;
    let params = json!({"objective": objective, "config": config.to_text()});
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let outputs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(&a.out, "optimize", params, config.seed, &inputs, &outputs)?;
    println!("{}", result["value"]);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool is set once");
    }
    let outcome = match &cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Count(a) => cmd_count(a),
        Command::Window(a) => cmd_window(a),
        Command::Optimize(a) => cmd_optimize(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Disagreement(m)) => {
            eprintln!("disagreement: {m}");
            ExitCode::from(EXIT_DISAGREE)
        }
    }
}
