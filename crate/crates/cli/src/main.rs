use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use succmin::exactnum::{parse_rational, rat, GaugeValue, Rational};
use succmin::geometry::{BodySpec, GaugeBody};
use succmin::lattice::{Lattice, DEFAULT_NODE_CAP};
use succmin::oracles::{random_instance, RandomSpec};
use succmin::periodic::{
    beta, blichfeldt_witness, dirichlet_approx, gamma_with_mode, minima_pair, successive_minima, successive_minima_tilde,
    validate, AxisBox, GammaMode, GammaStatus, InstanceSpec, PeriodicInstance,
};
use succmin::verify::{
    exit_code, sharpness_search, verify_all, CheckId, Context, InequalityReport, SharpnessOptions, Verdict, VerifyOptions,
    ViolationBundle,
};
use succmin::Error;

const OK: u8 = 0;
const VIOLATED: u8 = 1;
const INVALID: u8 = 2;
const INCONCLUSIVE: u8 = 3;
const INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "succmin", version, about = "Exact successive minima of periodic lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Enumeration node cap.
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: u64,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Statement)]
    gamma_mode: Mode,
    /// Bits for interval enclosures when an exact comparison is impossible.
    #[arg(long, global = true, default_value_t = 128)]
    precision_bits: u32,
    /// Leave timestamps and wall times out of the meta object.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Statement,
    ProofRadius,
}

impl From<Mode> for GammaMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Statement => GammaMode::Statement,
            Mode::ProofRadius => GammaMode::ProofRadius,
        }
    }
}

#[derive(clap::Args, Debug)]
struct InstanceArgs {
    /// Instance JSON file, `-` for stdin.
    #[arg(short, long)]
    instance: String,
    /// `cube`, `ball`, a body JSON object, or `@file`.
    #[arg(long, default_value = "cube")]
    body: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Best approximation λ₁ with a witness.
    Beta(InstanceArgs),
    /// Successive minima of Λ(α,Q).
    Minima(InstanceArgs),
    /// Minima with independence of the lifts (q, b).
    MinimaTilde(InstanceArgs),
    /// The dual factor γ of the lower bound.
    Gamma(InstanceArgs),
    /// Run every inequality check.
    Verify {
        /// One or more instance files.
        #[arg(short, long, required = true, num_args = 1..)]
        instance: Vec<String>,
        #[arg(long, default_value = "cube")]
        body: String,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Where violation bundles go.
        #[arg(long, env = "SUCCMIN_BUNDLE_DIR")]
        bundle_dir: Option<PathBuf>,
    },
    /// Dirichlet approximation in the max-norm on ℤⁿ.
    Dirichlet {
        /// Comma separated rationals or decimals.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        alpha: Vec<String>,
        #[arg(long = "Q")]
        q_max: u64,
    },
    /// Two box points differing by a periodic lattice vector.
    Blichfeldt {
        #[arg(short, long)]
        instance: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        lo: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        hi: Vec<String>,
    },
    /// Print a seeded random instance.
    Random {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "Q-max", default_value_t = 10)]
        q_max: u64,
        #[arg(long, default_value_t = 9)]
        denominator_bound: u64,
        #[arg(long, default_value_t = 10)]
        entry_bound: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random search for large λ₁² Q Δ(K)/det on ℤ².
    Sharpness {
        #[arg(long, default_value = "ball")]
        body: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        denominator_bound: u64,
        #[arg(long = "Q-cap", default_value_t = 20)]
        q_cap: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Known fixtures.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Beta(_) => "beta",
            Command::Minima(_) => "minima",
            Command::MinimaTilde(_) => "minima-tilde",
            Command::Gamma(_) => "gamma",
            Command::Verify { .. } => "verify",
            Command::Dirichlet { .. } => "dirichlet",
            Command::Blichfeldt { .. } => "blichfeldt",
            Command::Random { .. } => "random",
            Command::Sharpness { .. } => "sharpness",
            Command::Selftest => "selftest",
        }
    }
}

/// What a command produced: JSON for machines, lines for people, an exit code.
struct Outcome {
    result: Value,
    table: Vec<String>,
    code: u8,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => INCONCLUSIVE,
        Error::Internal(_) => INTERNAL,
        _ => INVALID,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::SingularBasis => "singular_basis",
        Error::InvalidBody(_) => "invalid_body",
        Error::AssumptionViolated { .. } => "assumption_violated",
        Error::CapExceeded { .. } => "cap_exceeded",
        Error::BoxTooSmall { .. } => "box_too_small",
        Error::Precondition(_) => "precondition",
        Error::NotAPacking(_) => "not_a_packing",
        Error::ResampleExhausted { .. } => "resample_exhausted",
        Error::Parse(_) => "parse",
        Error::Internal(_) => "internal",
    }
}

fn read_source(path: &str) -> Result<String, Error> {
    if path == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Error::Parse(format!("stdin: {e}")))
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))
    }
}

fn load_instance(path: &str, node_cap: u64) -> Result<PeriodicInstance, Error> {
    let text = read_source(path)?;
    let spec: InstanceSpec = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
    Ok(PeriodicInstance::from_spec(&spec)?.with_node_cap(node_cap))
}

fn parse_body(s: &str, n: usize) -> Result<GaugeBody, Error> {
    let spec = match s.trim() {
        "cube" => BodySpec::cube(),
        "ball" => BodySpec::ball(),
        t => {
            let text = match t.strip_prefix('@') {
                Some(path) => read_source(path)?,
                None if t.starts_with('{') => t.to_owned(),
                None => return Err(Error::InvalidBody(format!("unknown body {t:?}"))),
            };
            serde_json::from_str(&text).map_err(|e| Error::InvalidBody(format!("body: {e}")))?
        }
    };
    GaugeBody::from_spec(&spec, n)
}

fn parse_list(v: &[String]) -> Result<Vec<Rational>, Error> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn strings(v: &[Rational]) -> String {
    v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
}

fn instance_pair(a: &InstanceArgs, cap: u64) -> Result<(PeriodicInstance, GaugeBody), Error> {
    let inst = load_instance(&a.instance, cap)?;
    let body = parse_body(&a.body, inst.dim())?;
    Ok((inst, body))
}

fn minima_table(values: &[GaugeValue], label: &str) -> Vec<String> {
    values.iter().enumerate().map(|(i, v)| format!("{label}_{} = {v}  (~{:.6})", i + 1, v.to_f64())).collect()
}

fn report_lines(reports: &[InequalityReport]) -> Vec<String> {
    reports
        .iter()
        .map(|r| {
            let verdict = match &r.verdict {
                Verdict::Holds => "holds".to_owned(),
                Verdict::Violated => "VIOLATED".to_owned(),
                Verdict::Inconclusive => "inconclusive".to_owned(),
                Verdict::Skipped { reason } => format!("skipped ({reason})"),
                Verdict::Advisory { holds } => format!("advisory, holds = {holds}"),
            };
            let sides = match (&r.lhs_exact, &r.rhs_exact) {
                (Some(l), Some(rh)) => format!("  {l} {} {rh}", if r.equality { "=" } else { "vs" }),
                _ => String::new(),
            };
            format!("{:<20} {verdict}{sides}", r.check_id.name())
        })
        .collect()
}

fn worse(a: u8, b: u8) -> u8 {
    let rank = |c: u8| match c {
        OK => 0,
        INCONCLUSIVE => 1,
        INVALID => 2,
        VIOLATED => 3,
        _ => 4,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn write_bundle(dir: Option<&Path>, bundle: Option<ViolationBundle>) -> Result<(), Error> {
    if let (Some(dir), Some(b)) = (dir, bundle) {
        let path = b.write(dir).map_err(|e| Error::Internal(format!("bundle: {e}")))?;
        eprintln!("violation bundle written to {}", path.display());
    }
    Ok(())
}

type VerifyRun = Result<(Vec<InequalityReport>, Option<ViolationBundle>), Error>;

fn verify_one(path: &str, body: &str, opts: VerifyOptions, cap: u64) -> VerifyRun {
    let inst = load_instance(path, cap)?;
    let body = parse_body(body, inst.dim())?;
    let ctx = Context::new(&inst, &body, opts)?;
    let reports = verify_all(&ctx)?;
    let bundle = (exit_code(&reports) == VIOLATED as i32).then(|| ViolationBundle::new(&ctx, &reports));
    Ok((reports, bundle))
}

/// Results come back in input order whatever the worker count.
fn verify_many(paths: &[String], body: &str, opts: VerifyOptions, cap: u64, workers: usize) -> Vec<VerifyRun> {
    let workers = workers.clamp(1, paths.len().max(1));
    let chunk = paths.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = paths
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|p| verify_one(p, body, opts, cap)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let cap = cli.node_cap;
    match &cli.command {
        Command::Beta(a) => {
            let (inst, body) = instance_pair(a, cap)?;
            let (value, witness) = beta(&inst, &body)?;
            let table = vec![
                format!("beta = {value}  (~{:.6})", value.to_f64()),
                format!("q = {}, b = {:?}, x = ({})", witness.q, witness.b, strings(&witness.x)),
            ];
            Ok(Outcome { result: json!({ "value": value, "witness": witness }), table, code: OK })
        }
        Command::Minima(a) => {
            let (inst, body) = instance_pair(a, cap)?;
            let m = successive_minima(&inst, &body)?;
            let table = minima_table(&m.values, "lambda");
            Ok(Outcome { result: to_value(&m), table, code: OK })
        }
        Command::MinimaTilde(a) => {
            let (inst, body) = instance_pair(a, cap)?;
            let m = successive_minima_tilde(&inst, &body)?;
            let table = minima_table(&m.values, "lambda~");
            Ok(Outcome { result: to_value(&m), table, code: OK })
        }
        Command::Gamma(a) => {
            let (inst, body) = instance_pair(a, cap)?;
            // the cap bounds the γ search; the minima it starts from get at least the default
            let wide = inst.clone().with_node_cap(cap.max(DEFAULT_NODE_CAP));
            let m = successive_minima(&wide, &body)?;
            let g = gamma_with_mode(&inst, &m, cli.gamma_mode.into())?;
            let code = if g.status == GammaStatus::SkippedCapExceeded { INCONCLUSIVE } else { OK };
            let table = vec![
                format!("status = {}", to_value(&g.status).as_str().unwrap_or_default()),
                match &g.value {
                    Some(v) => format!("gamma = {v}"),
                    None => "gamma = none".to_owned(),
                },
                format!("radius in {}", g.radius),
            ];
            Ok(Outcome { result: to_value(&g), table, code })
        }
        Command::Verify { instance, body, workers, bundle_dir } => {
            let opts = VerifyOptions { precision_bits: cli.precision_bits, gamma_mode: cli.gamma_mode.into(), with_gamma: true };
            let mut runs = verify_many(instance, body, opts, cap, *workers);
            if runs.len() == 1 {
                let (reports, bundle) = runs.remove(0)?;
                write_bundle(bundle_dir.as_deref(), bundle)?;
                let code = exit_code(&reports) as u8;
                return Ok(Outcome { result: to_value(&reports), table: report_lines(&reports), code });
            }
            let mut code = OK;
            let mut results = Vec::new();
            let mut table = Vec::new();
            for (path, run) in instance.iter().zip(runs) {
                match run {
                    Ok((reports, bundle)) => {
                        code = worse(code, exit_code(&reports) as u8);
                        write_bundle(bundle_dir.as_deref(), bundle)?;
                        table.push(format!("# {path}"));
                        table.extend(report_lines(&reports));
                        results.push(json!({ "instance": path, "reports": reports }));
                    }
                    Err(e) => {
                        code = worse(code, error_code(&e));
                        table.push(format!("# {path}: {e}"));
                        results.push(json!({ "instance": path, "error": { "kind": kind(&e), "message": e.to_string() } }));
                    }
                }
            }
            Ok(Outcome { result: Value::Array(results), table, code })
        }
        Command::Dirichlet { alpha, q_max } => {
            let alpha = parse_list(alpha)?;
            let d = dirichlet_approx(&alpha, *q_max)?;
            let n = alpha.len();
            let bound = if n <= 2 {
                let q = Rational::from_integer((*q_max).into());
                if n == 1 { GaugeValue::plain(q.recip()) } else { GaugeValue::sqrt_of(q.recip()) }.to_string()
            } else {
                format!("Q^(-1/{n})")
            };
            let check = format!("{} < {bound}", d.max_residual);
            let z: Vec<String> = d.z.iter().map(|z| z.to_string()).collect();
            let table = vec![format!("q = {}", d.q), format!("z = ({})", z.join(",")), format!("bound check: {check}")];
            Ok(Outcome { result: json!({ "approximation": d, "bound_check": check }), table, code: OK })
        }
        Command::Blichfeldt { instance, lo, hi } => {
            let inst = load_instance(instance, cap)?;
            let bx = AxisBox::new(parse_list(lo)?, parse_list(hi)?)?;
            let w = blichfeldt_witness(&inst, &bx)?;
            let table = match &w {
                Some(w) => vec![format!("x1 = ({})", strings(&w.x1)), format!("x2 = ({})", strings(&w.x2)), format!("q = {}", w.q)],
                None => vec!["no witness found".to_owned()],
            };
            let code = if w.is_some() { OK } else { INCONCLUSIVE };
            Ok(Outcome { result: to_value(&w), table, code })
        }
        Command::Random { n, q_max, denominator_bound, entry_bound, seed } => {
            let spec = RandomSpec {
                n: *n,
                q_max: *q_max,
                denominator_bound: *denominator_bound,
                basis_entry_bound: *entry_bound,
                seed: *seed,
            };
            let inst = random_instance(&spec)?.spec();
            let table = vec![serde_json::to_string(&inst).expect("instance serializes")];
            Ok(Outcome { result: to_value(&inst), table, code: OK })
        }
        Command::Sharpness { body, trials, seed, denominator_bound, q_cap, workers } => {
            let body = parse_body(body, 2)?;
            let opts = SharpnessOptions { trials: *trials, seed: *seed, denominator_bound: *denominator_bound, q_cap: *q_cap };
            let rec = sharpness_search(&body, opts, *workers)?;
            let code = if rec.covolume_bound_failures > 0 { VIOLATED } else { OK };
            let mut table = vec![format!("evaluated = {}", rec.evaluated)];
            if let Some(b) = &rec.best {
                table.push(format!("best rho = {}  (~{:.6}) at trial {}", b.rho, b.rho.to_f64(), b.trial));
                table.push(format!("alpha = ({}), Q = {}, lambda_1 = {}", strings(&b.alpha), b.q_max, b.lambda1));
            }
            table.push(format!("covolume bound failures = {}", rec.covolume_bound_failures));
            Ok(Outcome { result: to_value(&rec), table, code })
        }
        Command::Selftest => {
            let checks = selftest();
            let code = if checks.iter().all(|(_, ok)| *ok) { OK } else { INTERNAL };
            let table = checks.iter().map(|(name, ok)| format!("{name:<20} {}", if *ok { "pass" } else { "FAIL" })).collect();
            let result = checks.iter().map(|(name, ok)| json!({ "fixture": name, "passed": ok })).collect();
            Ok(Outcome { result: Value::Array(result), table, code })
        }
    }
}

fn cross_equality(n: usize, m: i64) -> Result<bool, Error> {
    let mut alpha = vec![rat(0, 1); n];
    alpha[0] = rat(1, m);
    let inst = validate(Lattice::integer(n), alpha, (m - 1) as u64)?;
    let mut scales = vec![rat(1, 1); n];
    scales[0] = rat(1, m);
    let body = GaugeBody::cross(scales)?;
    let ctx = Context::new(&inst, &body, VerifyOptions::default())?;
    let reports = verify_all(&ctx)?;
    let lower = reports.iter().find(|r| r.check_id == CheckId::ThmIiLower);
    let ones = ctx.minima.values.iter().all(|v| *v == GaugeValue::plain(rat(1, 1)));
    let gamma = ctx.gamma.as_ref().and_then(|g| g.value.clone()) == Some(rat(1, m));
    Ok(ones && gamma && lower.is_some_and(|r| r.verdict == Verdict::Holds && r.equality) && exit_code(&reports) == 0)
}

fn degenerate_lattice() -> Result<bool, Error> {
    let inst = validate(Lattice::integer(2), vec![rat(1, 3), rat(1, 3)], 2)?;
    let lat = inst.as_lattice().ok_or(Error::Internal("not a lattice".into()))?;
    let cube = GaugeBody::cube(2);
    let periodic = successive_minima(&inst, &cube)?;
    let classical = successive_minima(&PeriodicInstance::classical(lat.clone()), &cube)?;
    let g = gamma_with_mode(&inst, &periodic, GammaMode::Statement)?;
    Ok(lat.det() == &rat(1, 3)
        && periodic.values == classical.values
        && periodic.values == vec![GaugeValue::plain(rat(1, 3)), GaugeValue::plain(rat(2, 3))]
        && g.value.is_some_and(|v| v >= rat(1, 3)))
}

fn classical_cube() -> Result<bool, Error> {
    let q0 = PeriodicInstance::classical(Lattice::integer(2));
    let cube = GaugeBody::cube(2);
    let ctx = Context::new(&q0, &cube, VerifyOptions::default())?;
    let reports = verify_all(&ctx)?;
    let (_, tilde) = minima_pair(&q0, &cube)?;
    let upper = reports.iter().find(|r| r.check_id == CheckId::Minkowski14Upper);
    Ok(upper.is_some_and(|r| r.equality) && tilde.values == ctx.classical.values && exit_code(&reports) == 0)
}

fn selftest() -> Vec<(&'static str, bool)> {
    vec![
        ("cross_equality_n2_m5", cross_equality(2, 5).unwrap_or(false)),
        ("cross_equality_n3_m7", cross_equality(3, 7).unwrap_or(false)),
        ("degenerate_lattice", degenerate_lattice().unwrap_or(false)),
        ("classical_q0_cube", classical_cube().unwrap_or(false)),
    ]
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = run(&cli);
    let mut meta = json!({
        "command": cli.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "node_cap": cli.node_cap,
        "precision_bits": cli.precision_bits,
    });
    if !cli.no_timestamp {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        meta["timestamp_unix"] = json!(now);
        meta["wall_ms"] = json!(started.elapsed().as_millis() as u64);
    }
    let code = match outcome {
        Ok(o) => {
            match cli.format {
                Format::Json => {
                    let doc = json!({ "result": o.result, "meta": meta });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
                }
                Format::Table => o.table.iter().for_each(|l| println!("{l}")),
            }
            o.code
        }
        Err(e) => {
            if cli.format == Format::Json {
                let doc = json!({ "error": { "kind": kind(&e), "message": e.to_string() }, "meta": meta });
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            }
            eprintln!("error: {e}");
            error_code(&e)
        }
    };
    ExitCode::from(code)
}
