use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use hecke_core::algebra::{parse_rational, FieldElement};
use hecke_core::hecke::{identity_suite, HeckeContext, HeckeScalar, DEFAULT_EPS};
use hecke_core::intervalmaps::geodesic_code;
use hecke_core::orbit::{orbit, random_start, Orbit, OrbitKind};
use hecke_core::sampling::sample_rng;
use hecke_core::verify::{run_suite, Suite};

const VERSION: &str = env!("CARGO_PKG_VERSION");

const ORBIT_HELP: &str = "\
Record k holds the state after step k (k = 1..N) and the index of the piece
the step was taken on. Columns:
  cf         step,x,y,sector
  bcz        step,a,b,index,roof      (roof = return time of the step)
  farey      step,a,branch
  gauss      step,a,branch
  farey-ext  step,a,s,branch
  gauss-ext  step,a,s,branch
The first line is metadata (`# hecke ...` in CSV, a {\"meta\": ...} object in
JSONL). An orbit that reaches a point where the map is undefined ends with a
terminal record (`# terminal step=K reason=...` or {\"terminal\": ...}).";

#[derive(Parser)]
#[command(name = "hecke", version, about = "Dynamics of Hecke triangle groups G_q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Hecke group index, q >= 3.
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
    q: u32,
    /// Seed recorded in output metadata and used by sampled suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Float tolerance for boundary tests.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    tolerance: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact identity suite for G_q.
    Identities {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate an orbit and export it as CSV or JSON Lines.
    #[command(after_help = ORBIT_HELP)]
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Start point: `x,y` (cf), `a,b` (bcz), `a` (farey, gauss) or `a,s`
        /// (extensions). Decimals and p/q fractions are accepted. If omitted,
        /// a random start is drawn with `--seed`.
        #[arg(long, allow_hyphen_values = true)]
        start: Option<String>,
        #[arg(long)]
        steps: usize,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Iterate in exact arithmetic in Q(λ_q) (not available for bcz).
        #[arg(long)]
        exact: bool,
    },
    /// Run a sampled verification suite and print a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Number of samples (iterates for `histogram`).
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Report file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the geodesic code of (a, s): n symbols in {0, ..., q-2}.
    Code {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long)]
        n: usize,
        /// Compute in exact arithmetic.
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cf,
    Bcz,
    Farey,
    Gauss,
    FareyExt,
    GaussExt,
}

impl From<Kind> for OrbitKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Cf => OrbitKind::Cf,
            Kind::Bcz => OrbitKind::Bcz,
            Kind::Farey => OrbitKind::Farey,
            Kind::Gauss => OrbitKind::Gauss,
            Kind::FareyExt => OrbitKind::FareyExt,
            Kind::GaussExt => OrbitKind::GaussExt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    BczOracle,
    Markov,
    Jacobian,
    Transfer,
    Histogram,
    Slabs,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::BczOracle => Suite::BczOracle,
            SuiteArg::Markov => Suite::Markov,
            SuiteArg::Jacobian => Suite::Jacobian,
            SuiteArg::Transfer => Suite::Transfer,
            SuiteArg::Histogram => Suite::Histogram,
            SuiteArg::Slabs => Suite::Slabs,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

enum Failure {
    Usage(String),
    Check,
    Runtime(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn context(c: &Common) -> Result<HeckeContext, Failure> {
    if !(c.tolerance > 0.0) {
        return Err(Failure::Usage(format!("tolerance must be positive, got {}", c.tolerance)));
    }
    let ctx = HeckeContext::new(c.q).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(ctx.with_eps(c.tolerance))
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Identities { common } => identities(&common),
        Command::Orbit { common, kind, start, steps, out, format, exact } => {
            orbit_cmd(&common, kind.into(), &start, steps, &out, format, exact)
        }
        Command::Verify { common, suite, samples, out } => verify(&common, suite.into(), samples, &out),
        Command::Code { common, a, s, n, exact } => code(&common, &a, &s, n, exact),
    }
}

fn identities(common: &Common) -> Outcome {
    let ctx = context(common)?;
    let checks = identity_suite(&ctx);
    let mut out = io::stdout().lock();
    for c in &checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        writeln!(out, "{status}  {}  ({})", c.name, c.detail)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(out, "q={}: {} identity families, {failed} failed", common.q, checks.len())?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn parse_coords(text: &str) -> Result<Vec<BigRational>, Failure> {
    text.split(',')
        .map(|t| parse_rational(t).ok_or_else(|| Failure::Usage(format!("cannot parse coordinate {t:?}"))))
        .collect()
}

fn orbit_cmd(
    common: &Common,
    kind: OrbitKind,
    start: &Option<String>,
    steps: usize,
    out: &Option<PathBuf>,
    format: Format,
    exact: bool,
) -> Outcome {
    let ctx = context(common)?;
    let coords = match start {
        Some(text) => parse_coords(text)?,
        None => {
            let mut rng = sample_rng(common.seed, 0);
            random_start(&ctx, kind, &mut rng).into_iter().map(|x| BigRational::from_float(x).expect("finite")).collect()
        }
    };
    if coords.len() != kind.dimension() {
        return Err(Failure::Usage(format!("{kind} expects {} start coordinate(s)", kind.dimension())));
    }
    if exact && kind == OrbitKind::Bcz {
        return Err(Failure::Usage("the bcz map is computed in floats only".into()));
    }
    let result = if exact {
        let xs: Vec<FieldElement> = coords.iter().map(|r| FieldElement::from_rational(ctx.field(), r.clone())).collect();
        run_orbit(&ctx, kind, &xs, steps)?
    } else {
        let xs: Vec<f64> = coords.iter().map(rational_to_f64).collect();
        run_orbit(&ctx, kind, &xs, steps)?
    };
    write_orbit(common, &result, output(out)?, format)
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn run_orbit<T: HeckeScalar>(ctx: &HeckeContext, kind: OrbitKind, start: &[T], steps: usize) -> Result<Orbit, Failure> {
    hecke_core::orbit::check_start(ctx, kind, start).map_err(|e| Failure::Usage(format!("invalid start: {e}")))?;
    orbit(ctx, kind, start, steps).map_err(|e| Failure::Runtime(e.to_string()))
}

fn metadata(common: &Common, kind: OrbitKind) -> Value {
    json!({
        "tool": "hecke",
        "version": VERSION,
        "q": common.q,
        "seed": common.seed,
        "tolerance": common.tolerance,
        "kind": kind.name(),
    })
}

fn write_orbit(common: &Common, orbit: &Orbit, mut w: Box<dyn Write>, format: Format) -> Outcome {
    let columns = orbit.kind.columns();
    match format {
        Format::Csv => {
            writeln!(
                w,
                "# hecke {VERSION} q={} seed={} tolerance={:e} kind={}",
                common.q, common.seed, common.tolerance, orbit.kind
            )?;
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(columns)?;
            for r in &orbit.records {
                csv.write_record(r.values())?;
            }
            let mut w = csv.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
            if let Some(t) = &orbit.terminal {
                writeln!(w, "# terminal step={} reason={}", t.step, t.reason)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            writeln!(w, "{}", json!({ "meta": metadata(common, orbit.kind) }))?;
            for r in &orbit.records {
                let mut m = Map::new();
                m.insert(columns[0].into(), json!(r.step));
                for (name, x) in columns[1..].iter().zip(&r.coords) {
                    m.insert((*name).into(), json!(x));
                }
                m.insert(columns[1 + r.coords.len()].into(), json!(r.index));
                if let Some(roof) = r.roof {
                    m.insert("roof".into(), json!(roof));
                }
                writeln!(w, "{}", Value::Object(m))?;
            }
            if let Some(t) = &orbit.terminal {
                writeln!(w, "{}", json!({ "terminal": { "step": t.step, "reason": t.reason } }))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn verify(common: &Common, suite: Suite, samples: usize, out: &Option<PathBuf>) -> Outcome {
    let ctx = context(common)?;
    if samples == 0 {
        return Err(Failure::Usage("samples must be at least 1".into()));
    }
    let report = run_suite(&ctx, suite, samples, common.seed).map_err(|e| Failure::Runtime(e.to_string()))?;
    let doc = json!({
        "meta": {
            "tool": "hecke",
            "version": VERSION,
            "q": common.q,
            "seed": common.seed,
            "tolerance": suite.tolerance(),
            "suite": suite.name(),
        },
        "report": report,
    });
    let mut w = output(out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&doc).map_err(|e| Failure::Runtime(e.to_string()))?)?;
    w.flush()?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn code(common: &Common, a: &str, s: &str, n: usize, exact: bool) -> Outcome {
    let ctx = context(common)?;
    let coords = parse_coords(&format!("{a},{s}"))?;
    let result = if exact {
        let x: Vec<FieldElement> = coords.iter().map(|r| FieldElement::from_rational(ctx.field(), r.clone())).collect();
        geodesic_code(&ctx, &x[0], &x[1], n)
    } else {
        let x: Vec<f64> = coords.iter().map(rational_to_f64).collect();
        geodesic_code(&ctx, &x[0], &x[1], n)
    };
    let code = result.map_err(|e| Failure::Usage(e.to_string()))?;
    let text: Vec<String> = code.symbols.iter().map(usize::to_string).collect();
    let mut out = io::stdout().lock();
    writeln!(out, "{}", text.join(" "))?;
    if code.terminated && code.symbols.len() < n {
        eprintln!("orbit reached a = 1 after {} symbols", code.symbols.len());
    }
    Ok(())
}
