//! The `solve`, `params` and `bench` subcommands, as functions from parsed
//! options to output text.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use num_traits::Signed;
use pivp_core::numeric::{ceil_u64, ln2_lower, parse_rational, rat, rat_int, to_decimal};
use pivp_core::solver::{
    choose_parameters, solve_guaranteed_with, ParameterSchedule, SolveRequest, SolveResult, SolverOptions,
};
use pivp_core::taylor::PivpProblem;
use pivp_core::{BigRational, Execution};
use serde::Serialize;

use crate::parser::{parse_system, ParseError};
use crate::reference::{ReferenceProblem, NAMES};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Solver(#[from] pivp_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Solver(pivp_core::Error::GuaranteeCheck { .. } | pivp_core::Error::PrecisionExhausted(_)) => 4,
            CliError::Solver(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    File(PathBuf),
    Problem(String),
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub label: String,
    pub problem: PivpProblem,
    pub reference: Option<ReferenceProblem>,
}

pub fn load(input: &Input) -> CliResult<Loaded> {
    match input {
        Input::File(path) => {
            let shown = path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: shown.clone(), source })?;
            let system = parse_system(&text).map_err(|source| CliError::Parse { path: shown.clone(), source })?;
            Ok(Loaded { label: shown, problem: system.to_problem(), reference: None })
        }
        Input::Problem(name) => {
            let r = ReferenceProblem::by_name(name).ok_or_else(|| {
                CliError::Usage(format!("unknown problem '{name}' (available: {})", NAMES.join(", ")))
            })?;
            Ok(Loaded { label: name.clone(), problem: r.problem.clone(), reference: Some(r) })
        }
    }
}

pub fn parse_rational_arg(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

impl Loaded {
    /// The caller's `Y`, or the reference problem's bound for horizon `t`.
    pub fn y_bound(&self, y: Option<&BigRational>, t: &BigRational) -> CliResult<BigRational> {
        if let Some(y) = y {
            if y.is_negative() {
                return Err(CliError::Precondition(format!("Y must be nonnegative, got {y}")));
            }
            return Ok(y.clone());
        }
        match &self.reference {
            Some(r) => r.y_bound(&t.abs()).ok_or_else(|| {
                CliError::Precondition(format!("{} has no solution on a horizon of length {}", r.name, t.abs()))
            }),
            None => Err(CliError::Precondition("-Y is required for system files".into())),
        }
    }

    fn request(&self, t: &BigRational, mu: u64, y: Option<&BigRational>) -> CliResult<SolveRequest> {
        Ok(SolveRequest { problem: self.problem.clone(), t: t.clone(), mu, y_bound: self.y_bound(y, t)? })
    }
}

/// Decimal places covering `ceil(mu / ln 2) + 2` bits.
pub fn decimal_digits(mu: u64) -> usize {
    let bits = ceil_u64(&(rat_int(mu as i64) / ln2_lower())) + 2;
    // log10(2) < 30103/100000
    ceil_u64(&(rat_int(bits as i64) * rat(30103, 100000))) as usize
}

/// The same schedule `solve` would use for these inputs.
pub fn schedule_for(problem: &PivpProblem, t: &BigRational, mu: u64, y: &BigRational) -> CliResult<ParameterSchedule> {
    if mu < 2 {
        return Err(pivp_core::Error::PrecisionTooLow(mu).into());
    }
    Ok(choose_parameters(problem.dim(), problem.p.degree(), &problem.p.sigma(), &t.abs(), mu, y)?)
}

fn fmt_schedule(s: &ParameterSchedule) -> String {
    format!("M={} A={} N={} Δ={} B={} ω={} η={}", s.m, s.a, s.n, s.delta, s.b, s.omega, s.eta)
}

#[derive(Debug, Serialize)]
struct ScheduleReport {
    m: String,
    a: String,
    n: u64,
    delta: String,
    b: String,
    omega: u64,
    eta: String,
}

impl From<&ParameterSchedule> for ScheduleReport {
    fn from(s: &ParameterSchedule) -> Self {
        Self {
            m: s.m.to_string(),
            a: s.a.to_string(),
            n: s.n,
            delta: s.delta.to_string(),
            b: s.b.to_string(),
            omega: s.omega,
            eta: s.eta.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SolveReport {
    problem: String,
    t0: String,
    horizon: String,
    mu: u64,
    y_bound: String,
    value: Vec<String>,
    decimal: Vec<String>,
    guaranteed_error: String,
    accumulated_bound: Option<String>,
    schedule: Option<ScheduleReport>,
    steps: u64,
    max_order: u64,
    wall_ms: f64,
    peak_bits: u64,
}

pub struct SolveArgs {
    pub input: Input,
    pub t: BigRational,
    pub mu: u64,
    pub y: Option<BigRational>,
    pub json: bool,
}

pub fn solve(args: &SolveArgs) -> CliResult<Output> {
    let loaded = load(&args.input)?;
    let req = loaded.request(&args.t, args.mu, args.y.as_ref())?;
    let options = SolverOptions { execution: Execution::available(), ..Default::default() };
    let r = solve_guaranteed_with(&req, options)?;
    let digits = decimal_digits(args.mu);
    let decimal: Vec<String> = r.value.iter().map(|v| to_decimal(v, digits)).collect();
    let mut out = Output { stderr: solve_summary(&r), ..Default::default() };
    if args.json {
        let report = SolveReport {
            problem: loaded.label,
            t0: req.problem.t0.to_string(),
            horizon: req.t.to_string(),
            mu: req.mu,
            y_bound: req.y_bound.to_string(),
            value: r.value.iter().map(|v| v.to_string()).collect(),
            decimal,
            guaranteed_error: r.guaranteed_error.to_string(),
            accumulated_bound: r.accumulated_bound.as_ref().map(|b| b.to_string()),
            schedule: r.schedule.as_ref().map(ScheduleReport::from),
            steps: r.stats.steps,
            max_order: r.stats.max_order,
            wall_ms: millis(r.stats.wall_time),
            peak_bits: r.stats.peak_bits,
        };
        out.stdout = serde_json::to_string_pretty(&report).expect("plain data") + "\n";
    } else {
        for (i, d) in decimal.iter().enumerate() {
            out.stdout += &format!("y{} = {d}\n", i + 1);
        }
        out.stdout += &format!(
            "guarantee: |y - y(t0 + {})|_inf <= {} (upper bound on e^-{}, about {})\n",
            req.t,
            r.guaranteed_error,
            req.mu,
            scientific(&r.guaranteed_error),
        );
    }
    Ok(out)
}

fn solve_summary(r: &SolveResult) -> String {
    match &r.schedule {
        Some(s) => format!(
            "N={} ω={} η={} steps={} peak_bits={} wall_ms={:.3}\n",
            s.n,
            s.omega,
            s.eta,
            r.stats.steps,
            r.stats.peak_bits,
            millis(r.stats.wall_time)
        ),
        None => format!("closed form, no steps; wall_ms={:.3}\n", millis(r.stats.wall_time)),
    }
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// `x` as `d.ddde-N` for `0 < x < 1`.
fn scientific(x: &BigRational) -> String {
    let mut exp = 0;
    let mut v = x.clone();
    while v < rat_int(1) && exp < 100_000 {
        v *= rat_int(10);
        exp += 1;
    }
    format!("{}e-{exp}", to_decimal(&v, 3))
}

pub struct ParamsArgs {
    pub input: Input,
    pub t: BigRational,
    pub mu: u64,
    pub y: Option<BigRational>,
    pub json: bool,
}

pub fn params(args: &ParamsArgs) -> CliResult<Output> {
    let loaded = load(&args.input)?;
    let y = loaded.y_bound(args.y.as_ref(), &args.t)?;
    let s = schedule_for(&loaded.problem, &args.t, args.mu, &y)?;
    let stdout = if args.json {
        serde_json::to_string_pretty(&ScheduleReport::from(&s)).expect("plain data") + "\n"
    } else {
        fmt_schedule(&s) + "\n"
    };
    Ok(Output { stdout, stderr: String::new() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    T,
    Mu,
    Y,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::T => "T",
            SweepParam::Mu => "mu",
            SweepParam::Y => "Y",
        }
    }
}

pub struct BenchArgs {
    pub input: Input,
    pub sweep: SweepParam,
    pub values: Vec<String>,
    pub t: BigRational,
    pub mu: u64,
    pub y: Option<BigRational>,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub sweep_param: String,
    pub value: String,
    pub wall_ms: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub omega: u64,
    pub peak_bits: u64,
}

/// Minimum wall time over repeated runs; fast solves are repeated until the
/// total reaches `MIN_TOTAL`.
const MIN_TOTAL: Duration = Duration::from_millis(300);
const MAX_REPS: usize = 25;

fn time_solve(req: &SolveRequest) -> CliResult<SolveResult> {
    let options = SolverOptions { execution: Execution::Sequential, ..Default::default() };
    let mut best = solve_guaranteed_with(req, options)?;
    let mut total = best.stats.wall_time;
    let mut reps = 1;
    while total < MIN_TOTAL && reps < MAX_REPS {
        let r = solve_guaranteed_with(req, options)?;
        total += r.stats.wall_time;
        if r.stats.wall_time < best.stats.wall_time {
            best = r;
        }
        reps += 1;
    }
    Ok(best)
}

pub fn bench_rows(args: &BenchArgs) -> CliResult<Vec<BenchRow>> {
    let loaded = load(&args.input)?;
    if args.values.is_empty() {
        return Err(CliError::Usage("--values needs at least one value".into()));
    }
    let mut requests = Vec::with_capacity(args.values.len());
    for v in &args.values {
        let bad = |e: String| CliError::Usage(format!("bad sweep value '{v}': {e}"));
        let (t, mu, y) = match args.sweep {
            SweepParam::T => (parse_rational_arg(v).map_err(bad)?, args.mu, args.y.clone()),
            SweepParam::Mu => {
                (args.t.clone(), v.trim().parse::<u64>().map_err(|e| bad(e.to_string()))?, args.y.clone())
            }
            SweepParam::Y => (args.t.clone(), args.mu, Some(parse_rational_arg(v).map_err(bad)?)),
        };
        requests.push((v.trim().to_string(), loaded.request(&t, mu, y.as_ref())?));
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CliResult<BenchRow>>>> = Mutex::new((0..requests.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..args.threads.clamp(1, requests.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((value, req)) = requests.get(i) else { break };
                let row = time_solve(req).map(|r| {
                    let (n, omega) = r.schedule.as_ref().map_or((0, 0), |s| (s.n, s.omega));
                    BenchRow {
                        sweep_param: args.sweep.name().to_string(),
                        value: value.clone(),
                        wall_ms: (millis(r.stats.wall_time) * 1e3).round() / 1e3,
                        n,
                        omega,
                        peak_bits: r.stats.peak_bits,
                    }
                });
                results.lock().expect("no panics while holding the lock")[i] = Some(row);
            });
        }
    });
    results.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every row computed")).collect()
}

pub fn bench(args: &BenchArgs) -> CliResult<Output> {
    let rows = bench_rows(args)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Output { stdout: String::from_utf8(bytes).expect("csv output is utf-8"), stderr: String::new() })
}

/// `PIVP_THREADS`, defaulting to 1.
pub fn bench_threads() -> usize {
    std::env::var("PIVP_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n >= 1).unwrap_or(1)
}
