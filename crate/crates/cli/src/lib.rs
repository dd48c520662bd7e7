//! Argument parsing and dispatch for the `delpezzo` binary.
//!
//! Every subcommand produces a list of [`CountRecord`]s which are rendered
//! in one go, so the bytes written never depend on scheduling.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use delpezzo_core::report::render;
use delpezzo_core::surface::{self, representations_by_value};
use delpezzo_core::ternary::{self, dyadic_grid, max_ratio_up_to};
use delpezzo_core::twists::{self, delta_exponent, enumerate_points_bruteforce, n_cutoff};
use delpezzo_core::verify::run_suite;
use delpezzo_core::{
    descent, Budget, CountRecord, Error, Format, QuadForm, Suite, SurfaceMethod, SurfaceSpec,
    TernaryInstance, TwistFamily, TwistMethod, DEFAULT_BUDGET, DEFAULT_EPS,
};

/// Environment variable holding the default operation budget.
pub const BUDGET_ENV: &str = "DELPEZZO_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

fn parse_vec<T: std::str::FromStr, const N: usize>(s: &str) -> Result<[T; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated values, got '{s}'"));
    }
    let vals: Vec<T> = parts
        .iter()
        .map(|p| {
            p.parse::<T>()
                .map_err(|_| format!("'{p}' is not a valid number in '{s}'"))
        })
        .collect::<Result<_, _>>()?;
    vals.try_into().map_err(|_| unreachable!())
}

fn vec3_i64(s: &str) -> Result<[i64; 3], String> {
    parse_vec(s)
}

fn vec3_u64(s: &str) -> Result<[u64; 3], String> {
    parse_vec(s)
}

fn dyadic(s: &str) -> Result<u32, String> {
    let k = s
        .strip_prefix("dyadic:")
        .ok_or_else(|| format!("grid must look like dyadic:KMAX, got '{s}'"))?;
    let k: u32 = k
        .parse()
        .map_err(|_| format!("'{k}' is not a valid KMAX"))?;
    if k > 20 {
        return Err(format!("dyadic KMAX = {k} is too large (at most 20)"));
    }
    Ok(k)
}

#[derive(Parser, Debug)]
#[command(
    name = "delpezzo",
    version,
    about = "Point counts on the degree-1 del Pezzo surfaces y^2 = (x - e1 Q)(x - e2 Q)(x - e3 Q) and on the quadratic twists E_{n,e}"
)]
struct Cli {
    /// Output format: json-lines or csv.
    #[arg(long, global = true, default_value = "json-lines")]
    format: String,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Zero elapsed_ms so identical runs give identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Operation budget per command (default from DELPEZZO_BUDGET, else 10^9).
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// key=value file presetting e, Q and budget.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct FamilyArg {
    /// Distinct integers e1,e2,e3.
    #[arg(long = "e", value_parser = vec3_i64, allow_hyphen_values = true)]
    e: Option<[i64; 3]>,
}

#[derive(Args, Debug, Clone)]
struct FormArg {
    /// Coefficients q11,q12,q22 of Q = q11 u^2 + q12 uv + q22 v^2.
    #[arg(long = "Q", value_parser = vec3_i64, allow_hyphen_values = true)]
    q: Option<[i64; 3]>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Descent tuple (d, w, a, b) of a solution of y^2 = x1 x2 x3.
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        y: i128,
        #[arg(long, allow_hyphen_values = true)]
        x1: i128,
        #[arg(long, allow_hyphen_values = true)]
        x2: i128,
        #[arg(long, allow_hyphen_values = true)]
        x3: i128,
    },
    /// Non-trivial integral points of naive height <= B on the twist E_{n,e}.
    TwistEnum {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long = "n")]
        n: i128,
        #[arg(long = "B")]
        b: u64,
    },
    /// Sum over n of #{P in E*_{n,e}(Z) : naive height <= B}.
    TwistCount {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long = "B")]
        b: u64,
        /// brute or descent.
        #[arg(long, default_value = "descent")]
        method: String,
        /// Also list every point.
        #[arg(long)]
        points: bool,
    },
    /// N_{U,H}(B): rational points of anticanonical height <= B on the open surface U_{e,Q}.
    SurfaceCount {
        #[command(flatten)]
        family: FamilyArg,
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "B")]
        b: u64,
        /// brute or fibration.
        #[arg(long, default_value = "fibration")]
        method: String,
        /// Also list every point.
        #[arg(long)]
        points: bool,
    },
    /// beta(B) = log N_{U,H}(B) / log B, the empirical growth exponent.
    Beta {
        #[command(flatten)]
        family: FamilyArg,
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "B")]
        b: u64,
        /// brute or fibration.
        #[arg(long, default_value = "fibration")]
        method: String,
    },
    /// Coprime solutions of f1 u1 v1^2 + f2 u2 v2^2 + f3 u3 v3^2 = 0 in a box,
    /// with the bound (U1U2U3)^(2/3) (V1V2V3)^(1/3) M_eps(U) and their ratio.
    Ternary {
        #[arg(long = "f", value_parser = vec3_i64, allow_hyphen_values = true)]
        f: [i64; 3],
        #[arg(long = "U", value_parser = vec3_u64)]
        u: [u64; 3],
        #[arg(long = "V", value_parser = vec3_u64)]
        v: [u64; 3],
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Ratio of ternary solution counts to the bound over dyadic boxes U = V.
    TernaryScan {
        #[arg(long = "f", value_parser = vec3_i64, allow_hyphen_values = true)]
        f: [i64; 3],
        /// dyadic:KMAX, all sides 2^0..2^KMAX.
        #[arg(long, value_parser = dyadic)]
        grid: u32,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Density of twists n <= N with a point of height <= n^(1/2) (log n)^(-A)
    /// among those known to have a non-trivial integral point.
    Density {
        #[command(flatten)]
        family: FamilyArg,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "A")]
        a: f64,
        /// Height cap for the per-n search.
        #[arg(long, default_value_t = 300)]
        cap: u64,
    },
    /// Cross-method consistency suites; exits 3 on any mismatch.
    Verify {
        /// small or full.
        #[arg(long, default_value = "small")]
        suite: String,
    },
}

#[derive(Debug, Default)]
struct Config {
    e: Option<[i64; 3]>,
    q: Option<[i64; 3]>,
    budget: Option<u64>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn load_config(path: &PathBuf) -> Result<Config, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = Config::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        let bad = |m: String| usage(format!("config line {}: {m}", lineno + 1));
        match k {
            "e" => cfg.e = Some(vec3_i64(v).map_err(bad)?),
            "Q" => cfg.q = Some(vec3_i64(v).map_err(bad)?),
            "budget" => {
                cfg.budget = Some(
                    v.parse()
                        .map_err(|_| bad(format!("'{v}' is not a budget")))?,
                )
            }
            other => return Err(bad(format!("unknown key '{other}'"))),
        }
    }
    Ok(cfg)
}

fn env_budget() -> Result<Option<u64>, Error> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{BUDGET_ENV}='{v}' is not a budget"))),
        Err(_) => Ok(None),
    }
}

struct Ctx {
    cfg: Config,
    budget: Budget,
}

impl Ctx {
    fn family(&self, arg: &FamilyArg) -> Result<TwistFamily, Error> {
        let e = arg
            .e
            .or(self.cfg.e)
            .ok_or_else(|| usage("--e is required (or set e in the config file)"))?;
        TwistFamily::from_array(e)
    }

    fn form(&self, arg: &FormArg) -> Result<QuadForm, Error> {
        let [a, b, c] = arg
            .q
            .or(self.cfg.q)
            .ok_or_else(|| usage("--Q is required (or set Q in the config file)"))?;
        QuadForm::new(a, b, c)
    }

    fn base(&self, command: &str, count: u64) -> CountRecord {
        CountRecord::new(command, count).param("budget", self.budget.limit())
    }
}

fn positive_bound(b: u64) -> Result<u64, Error> {
    if b == 0 {
        Err(usage("height bound B must be at least 1"))
    } else {
        Ok(b)
    }
}

#[derive(Default)]
struct Outcome {
    records: Vec<CountRecord>,
    mismatch: bool,
    warnings: Vec<String>,
}

fn dispatch(cmd: &Command, ctx: &Ctx) -> Result<Outcome, Error> {
    let mut records = Vec::new();
    let mut mismatch = false;
    let mut warnings = Vec::new();
    match cmd {
        Command::Decompose { y, x1, x2, x3 } => {
            let t = descent::decompose(*y, *x1, *x2, *x3)?;
            let mut r = ctx
                .base("decompose", 1)
                .param("y", y)
                .param("x1", x1)
                .param("x2", x2)
                .param("x3", x3)
                .extra("w", t.w);
            for i in 0..3 {
                r = r
                    .extra(&format!("d{}", i + 1), t.d[i])
                    .extra(&format!("a{}", i + 1), t.a[i])
                    .extra(&format!("b{}", i + 1), t.b[i]);
            }
            records.push(r);
        }
        Command::TwistEnum { family, n, b } => {
            let fam = ctx.family(family)?;
            let b = positive_bound(*b)?;
            if *n < 1 {
                return Err(usage(format!("twist parameter n = {n} must be at least 1")));
            }
            ctx.budget.check(2 * (b as u128) * (b as u128) + 1)?;
            let pts = enumerate_points_bruteforce(&fam, *n, b);
            for &(x, y) in &pts {
                records.push(
                    point_record(&fam, b)
                        .extra("n", *n)
                        .extra("x", x)
                        .extra("y", y),
                );
            }
            records.push(
                ctx.base("twist-enum", pts.len() as u64)
                    .param("e", fam)
                    .param("n", n)
                    .param("B", b),
            );
        }
        Command::TwistCount {
            family,
            b,
            method,
            points,
        } => {
            let fam = ctx.family(family)?;
            let b = positive_bound(*b)?;
            let method: TwistMethod = method.parse()?;
            let census = twists::aggregate_census(&fam, b, method, ctx.budget)?;
            if *points {
                for p in census.points() {
                    records.push(
                        point_record(&fam, b)
                            .extra("n", p.n)
                            .extra("x", p.x)
                            .extra("y", p.y),
                    );
                }
            }
            let family_lower = twists::twist_lower_family(&fam, b)?.len() as u64;
            records.push(
                ctx.base("twist-count", census.total)
                    .param("e", fam)
                    .param("B", b)
                    .param("method", method)
                    .extra("n_cutoff", n_cutoff(&fam, b))
                    .extra("twists_with_points", census.per_n.len() as u64)
                    .extra("family_lower", family_lower)
                    .extra("delta", u64::from(delta_exponent(&fam))),
            );
        }
        Command::SurfaceCount {
            family,
            form,
            b,
            method,
            points,
        } => {
            let spec = SurfaceSpec::new(ctx.family(family)?, ctx.form(form)?);
            let b = positive_bound(*b)?;
            let method: SurfaceMethod = method.parse()?;
            let census = surface::count(&spec, b, method, ctx.budget)?;
            if *points {
                for p in &census.points {
                    records.push(
                        CountRecord::new("surface-point", 1)
                            .param("e", spec.family)
                            .param("Q", spec.form)
                            .param("B", b)
                            .extra("y", p.y)
                            .extra("x", p.x)
                            .extra("u", p.u)
                            .extra("v", p.v)
                            .extra("n", spec.form.eval(p.u, p.v))
                            .extra("h_le_b", u64::from(surface::height_leq(p, b))),
                    );
                }
            }
            let fibres = representations_by_value(&spec.form, b).len() as u64;
            records.push(
                ctx.base("surface-count", census.count)
                    .param("e", spec.family)
                    .param("Q", spec.form)
                    .param("B", b)
                    .param("method", method)
                    .extra("fibres", fibres),
            );
        }
        Command::Beta {
            family,
            form,
            b,
            method,
        } => {
            let spec = SurfaceSpec::new(ctx.family(family)?, ctx.form(form)?);
            let method: SurfaceMethod = method.parse()?;
            let out = surface::beta(&spec, *b, method, ctx.budget)?;
            records.push(
                ctx.base("beta", out.count)
                    .param("e", spec.family)
                    .param("Q", spec.form)
                    .param("B", b)
                    .param("method", method)
                    .extra("beta", out.beta),
            );
        }
        Command::Ternary { f, u, v, eps } => {
            let inst = TernaryInstance::new(*f, *u, *v)?;
            let bound = ternary::box_bound(&inst, *eps)?;
            let count = ternary::count_solutions(&inst, ctx.budget)?;
            records.push(
                ternary_record(ctx.base("ternary", count), f, u, v, *eps)
                    .extra("bound", bound)
                    .extra("ratio", count as f64 / bound),
            );
        }
        Command::TernaryScan { f, grid, eps } => {
            let rows = ternary::ratio_scan(*f, &dyadic_grid(*grid), *eps, ctx.budget)?;
            for r in &rows {
                records.push(
                    ternary_record(ctx.base("ternary", r.count), f, &r.u, &r.v, *eps)
                        .extra("bound", r.bound)
                        .extra("ratio", r.ratio),
                );
            }
            warnings.extend(scan_warning(&rows, *grid));
            let max = max_ratio_up_to(&rows, 1 << grid).unwrap_or(0.0);
            records.push(
                ctx.base("ternary-scan", rows.len() as u64)
                    .param("f", fmt3(f))
                    .param("grid", format!("dyadic:{grid}"))
                    .param("eps", eps)
                    .extra("max_ratio", max),
            );
        }
        Command::Density { family, n, a, cap } => {
            let fam = ctx.family(family)?;
            let out = twists::density_experiment(&fam, *n, *a, *cap, ctx.budget)?;
            let ratio = if out.denominator_lower == 0 {
                0.0
            } else {
                out.numerator as f64 / out.denominator_lower as f64
            };
            records.push(
                ctx.base("density", out.numerator)
                    .param("e", fam)
                    .param("N", n)
                    .param("A", a)
                    .param("cap", cap)
                    .extra("denominator_lower", out.denominator_lower)
                    .extra("family_lower", out.family_lower)
                    .extra("capped", out.capped)
                    .extra("tie_discrepancies", out.tie_discrepancies)
                    .extra("ratio", ratio),
            );
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            for c in run_suite(suite, ctx.budget)? {
                mismatch |= !c.passed();
                records.push(
                    ctx.base("verify", c.cases)
                        .param("suite", suite)
                        .param("check", c.name)
                        .extra("mismatches", c.mismatches),
                );
            }
        }
    }
    Ok(Outcome {
        records,
        mismatch,
        warnings,
    })
}

fn point_record(fam: &TwistFamily, b: u64) -> CountRecord {
    CountRecord::new("twist-point", 1)
        .param("e", fam)
        .param("B", b)
}

fn fmt3<T: std::fmt::Display>(v: &[T; 3]) -> String {
    format!("{},{},{}", v[0], v[1], v[2])
}

fn ternary_record(
    r: CountRecord,
    f: &[i64; 3],
    u: &[u64; 3],
    v: &[u64; 3],
    eps: f64,
) -> CountRecord {
    r.param("f", fmt3(f))
        .param("U", fmt3(u))
        .param("V", fmt3(v))
        .param("eps", eps)
}

/// Warns when the largest ratio is still growing at the last doubling.
fn scan_warning(rows: &[ternary::RatioRow], grid: u32) -> Option<String> {
    if grid == 0 {
        return None;
    }
    let last = max_ratio_up_to(rows, 1 << grid)?;
    let prev = max_ratio_up_to(rows, 1 << (grid - 1))?;
    (last > prev).then(|| {
        format!("WARNING: max ratio still growing at the last doubling ({prev:.4} -> {last:.4})")
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// the report to `out` (or `--output`). Returns the process exit status.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let format: Format = cli.format.parse()?;
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => Config::default(),
    };
    let limit = match (cli.budget, cfg.budget) {
        (Some(b), _) | (None, Some(b)) => b,
        (None, None) => env_budget()?.unwrap_or(DEFAULT_BUDGET),
    };
    let ctx = Ctx {
        cfg,
        budget: Budget::new(limit),
    };

    let start = Instant::now();
    let Outcome {
        mut records,
        mismatch,
        warnings,
    } = match cli.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| usage(format!("cannot start {n} threads: {e}")))?
            .install(|| dispatch(&cli.command, &ctx))?,
        None => dispatch(&cli.command, &ctx)?,
    };
    let elapsed = if cli.deterministic {
        0
    } else {
        start.elapsed().as_millis() as u64
    };
    for r in &mut records {
        r.elapsed_ms = elapsed;
    }

    for w in &warnings {
        let _ = writeln!(err, "{w}");
    }

    let bytes = render(&records, format)?;
    let io_err = |e: std::io::Error| usage(format!("cannot write report: {e}"));
    match &cli.output {
        Some(path) => fs::write(path, &bytes).map_err(io_err)?,
        None => out.write_all(&bytes).map_err(io_err)?,
    }
    if mismatch {
        let _ = writeln!(err, "verification mismatch");
        return Ok(EXIT_MISMATCH);
    }
    Ok(EXIT_OK)
}
