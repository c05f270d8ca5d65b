//! The `dynbc` command line.
//!
//! Settings resolve as flag, then config file, then built-in default. The
//! seed additionally honours `DYNBC_SEED`, which sits between the flag and
//! the file. Exit status: 0 success, 1 failed check or numerical failure,
//! 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::calibration::DEFAULT_SEED;
use crate::data::{parse_data_spec, DataSpec};
use crate::domain::Geometry;
use crate::error::{Error, Result};
use crate::experiments::lower_bound::LowerBoundSetup;
use crate::experiments::rate::{powers_of_two, ProbeSpacing, RateStudy};
use crate::experiments::{
    run_bound_suite, run_lower_bound_check, run_oracle_suite, run_quadrature_checks, run_rate_study, ResidualInstance,
    SuiteConfig,
};
use crate::operators::ProblemData;
use crate::picard::{solve, SolverConfig};

pub const SEED_ENV: &str = "DYNBC_SEED";

#[derive(Debug, Parser)]
#[command(name = "dynbc", version, about = "Heat equation with a dynamical boundary condition in the large diffusion limit")]
pub struct Cli {
    /// Worker threads [default: logical cores].
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for CSV files [default: .].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance override `name=value` (oracle, residual, quadrature, slope-min, slope-max, fit-residual).
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and dump `(x, t, v, w, u)` to solution.csv.
    Solve(SolveArgs),
    /// Deviation sweep over ε with a log-log fit, written to rate.csv.
    Rate(RateArgs),
    /// Pointwise lower bound `u ≥ C√ε` on the compact set K.
    LowerBound(LowerBoundArgs),
    /// Run a verification suite and write suite.csv.
    Verify(VerifyArgs),
    /// Shorthand for `verify --suite oracle-check`.
    OracleCheck,
}

#[derive(Debug, Default, Args)]
pub struct ProblemArgs {
    /// halfline or ball.
    #[arg(long)]
    pub geometry: Option<String>,
    /// Initial data: const:<c>, indicator:b=<b>, scaled-indicator:b=<b>, csv:<path>.
    #[arg(long)]
    pub phi: Option<String>,
    /// Constant boundary datum.
    #[arg(long, allow_negative_numbers = true)]
    pub phib: Option<f64>,
    /// ε values: `0.05`, `0.1,0.01` or `2^-4..2^-12`.
    #[arg(long)]
    pub eps: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Final time.
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Output points in space.
    #[arg(long)]
    pub nx: Option<usize>,
    /// Output points in time.
    #[arg(long)]
    pub nt: Option<usize>,
    /// Right end of the output interval.
    #[arg(long)]
    pub x_max: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub tau1: Option<f64>,
    #[arg(long)]
    pub tau2: Option<f64>,
    /// Probe set K = [k-min, k-max].
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long)]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Default, Args)]
pub struct LowerBoundArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub tau2: Option<f64>,
    /// Override the calibrated C̃.
    #[arg(long)]
    pub c_tilde: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: Option<Suite>,
    /// Restrict to one geometry [default: both].
    #[arg(long)]
    pub geometry: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    #[default]
    Uniform,
    Geometric,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    OracleCheck,
    Bounds,
    Quadrature,
    Residual,
    #[default]
    All,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Spacing as ValueEnum>::from_str(s, true).map_err(Error::Config)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Suite as ValueEnum>::from_str(s, true).map_err(Error::Config)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    Rate,
    LowerBound,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub oracle: f64,
    pub residual: f64,
    pub quadrature: f64,
    pub slope: (f64, f64),
    pub fit_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { oracle: 1e-8, residual: 1e-3, quadrature: 1e-8, slope: (0.45, 0.55), fit_residual: 0.1 }
    }
}

impl Tolerances {
    fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "oracle" => self.oracle = value,
            "residual" => self.residual = value,
            "quadrature" => self.quadrature = value,
            "slope-min" => self.slope.0 = value,
            "slope-max" => self.slope.1 = value,
            "fit-residual" => self.fit_residual = value,
            other => return Err(Error::Config(format!("unknown tolerance `{other}`"))),
        }
        Ok(())
    }
}

/// Fully resolved settings; every value has passed validation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    /// `None` only for `verify`, meaning both geometries.
    pub geometry: Option<Geometry>,
    pub phi: Option<DataSpec>,
    pub phi_b: f64,
    pub eps: Vec<f64>,
    pub tau1: f64,
    pub tau2: f64,
    pub horizon: f64,
    pub probe_range: (f64, f64),
    pub spacing: ProbeSpacing,
    pub output_points: (usize, usize),
    pub c_tilde: Option<f64>,
    pub suite: Suite,
    pub output: PathBuf,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub jobs: Option<usize>,
}

/// Parsed `key = value` file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

const CONFIG_KEYS: &[&str] = &[
    "geometry", "phi", "phib", "eps", "T", "tau1", "tau2", "k-min", "k-max", "spacing", "nx", "nt", "x-max", "c-tilde",
    "suite", "seed", "jobs", "out", "tol-oracle", "tol-residual", "tol-quadrature", "tol-slope-min", "tol-slope-max",
    "tol-fit-residual",
];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", n + 1)));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        ConfigFile::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.entries
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("`{key} = {v}` does not parse"))))
            .transpose()
    }
}

/// `0.05`, `0.1,0.01`, `2^-6` or `2^-a..2^-b`.
pub fn parse_eps_list(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("`{s}` is not an eps list"));
    let power = |t: &str| -> Result<i32> { t.trim().strip_prefix("2^").ok_or_else(bad)?.parse().map_err(|_| bad()) };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (power(a)?, power(b)?);
        if a >= 0 || b >= 0 {
            return Err(bad());
        }
        let (hi, lo) = (a.max(b), a.min(b));
        return Ok(powers_of_two(-hi, -lo));
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if t.starts_with("2^") {
                Ok(2f64.powi(power(t)?))
            } else {
                t.parse::<f64>().map_err(|_| bad())
            }
        })
        .collect()
}

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(file.get(key)?.unwrap_or(default)),
    }
}

fn pick_opt<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn seed_from(flag: Option<u64>, env: Option<String>, file: &ConfigFile) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(v) = env {
        return v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}=`{v}` is not an integer")));
    }
    Ok(file.get("seed")?.unwrap_or(DEFAULT_SEED))
}

impl RunConfig {
    /// Resolves flags against `file` and the built-in defaults.
    pub fn resolve(cli: Cli, file: &ConfigFile, seed_env: Option<String>) -> Result<Self> {
        let empty = ProblemArgs::default();
        let (kind, problem) = match &cli.command {
            Command::Solve(a) => (CommandKind::Solve, &a.problem),
            Command::Rate(a) => (CommandKind::Rate, &a.problem),
            Command::LowerBound(a) => (CommandKind::LowerBound, &a.problem),
            Command::Verify(_) | Command::OracleCheck => (CommandKind::Verify, &empty),
        };
        let geometry_flag = match &cli.command {
            Command::Verify(v) => v.geometry.clone(),
            _ => problem.geometry.clone(),
        };
        let geometry: Option<Geometry> = match pick_opt(geometry_flag, file, "geometry")? {
            Some(g) => Some(g.parse()?),
            None if kind == CommandKind::Verify => None,
            None => Some(Geometry::half_line()),
        };
        let g = geometry.unwrap_or_else(Geometry::half_line);
        let phi = match pick_opt(problem.phi.clone(), file, "phi")? {
            Some(s) => Some(parse_data_spec(&s)?),
            None => None,
        };
        let default_eps = match kind {
            CommandKind::Solve => "0.05",
            CommandKind::LowerBound => "2^-6..2^-12",
            _ => "2^-4..2^-12",
        };
        let eps = parse_eps_list(&pick(problem.eps.clone(), file, "eps", default_eps.to_string())?)?;
        let default_range = if g.is_ball() { (1.0, 200.0) } else { (0.0, 3.0) };
        let mut tolerances = Tolerances::default();
        for name in ["oracle", "residual", "quadrature", "slope-min", "slope-max", "fit-residual"] {
            if let Some(v) = file.get::<f64>(&format!("tol-{name}"))? {
                tolerances.set(name, v)?;
            }
        }
        for t in &cli.tolerances {
            let (name, value) = t.split_once('=').ok_or_else(|| Error::Config(format!("`--tol {t}`: expected NAME=VALUE")))?;
            let value = value.trim().parse().map_err(|_| Error::Config(format!("`--tol {t}`: not a number")))?;
            tolerances.set(name.trim(), value)?;
        }

        let mut cfg = RunConfig {
            command: kind,
            geometry,
            phi,
            phi_b: pick(problem.phib, file, "phib", 0.0)?,
            eps,
            tau1: file.get("tau1")?.unwrap_or(0.05),
            tau2: file.get("tau2")?.unwrap_or(0.2),
            horizon: file.get("T")?.unwrap_or(0.2),
            probe_range: default_range,
            spacing: if g.is_ball() { ProbeSpacing::Geometric } else { ProbeSpacing::Uniform },
            output_points: (file.get("nx")?.unwrap_or(64), file.get("nt")?.unwrap_or(16)),
            c_tilde: file.get("c-tilde")?,
            suite: file.get("suite")?.unwrap_or_default(),
            output: pick(cli.out, file, "out", PathBuf::from("."))?,
            tolerances,
            seed: seed_from(cli.seed, seed_env, file)?,
            jobs: pick_opt(cli.jobs, file, "jobs")?,
        };
        let k = (file.get::<f64>("k-min")?, file.get::<f64>("k-max")?, file.get::<Spacing>("spacing")?);
        let mut k = (k.0.unwrap_or(cfg.probe_range.0), k.1.unwrap_or(cfg.probe_range.1), k.2);
        let mut x_max = file.get::<f64>("x-max")?;
        match cli.command {
            Command::Solve(a) => {
                cfg.horizon = a.horizon.unwrap_or(cfg.horizon);
                cfg.output_points = (a.nx.unwrap_or(cfg.output_points.0), a.nt.unwrap_or(cfg.output_points.1));
                x_max = a.x_max.or(x_max);
            }
            Command::Rate(a) => {
                cfg.tau1 = a.tau1.unwrap_or(cfg.tau1);
                cfg.tau2 = a.tau2.unwrap_or(cfg.tau2);
                k = (a.k_min.unwrap_or(k.0), a.k_max.unwrap_or(k.1), a.spacing.or(k.2));
            }
            Command::LowerBound(a) => {
                cfg.tau2 = a.tau2.unwrap_or(file.get("tau2")?.unwrap_or(0.1));
                cfg.c_tilde = a.c_tilde.or(cfg.c_tilde);
            }
            Command::Verify(v) => cfg.suite = v.suite.unwrap_or(cfg.suite),
            Command::OracleCheck => cfg.suite = Suite::OracleCheck,
        }
        cfg.probe_range = (k.0, k.1);
        if let Some(s) = k.2 {
            cfg.spacing = if s == Spacing::Geometric { ProbeSpacing::Geometric } else { ProbeSpacing::Uniform };
        }
        if kind == CommandKind::Solve {
            let x0 = g.boundary_coordinate();
            cfg.probe_range = (x0, x_max.unwrap_or(x0 + 3.0 + cfg.phi.as_ref().map_or(0.0, |p| p.feature_location() - x0).max(0.0)));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn geometry(&self) -> Geometry {
        self.geometry.unwrap_or_else(Geometry::half_line)
    }

    /// Default data: `χ_{x>1}` on the half-line, `(1/r)χ_{r>2}` on the ball.
    pub fn data(&self) -> DataSpec {
        self.phi.clone().unwrap_or(if self.geometry().is_ball() {
            DataSpec::ScaledIndicator { b: 2.0 }
        } else {
            DataSpec::Indicator { b: 1.0 }
        })
    }

    fn rate_study(&self) -> RateStudy {
        RateStudy {
            spacing: self.spacing,
            ..RateStudy::new(self.geometry(), self.data(), self.phi_b, self.eps.clone(), (self.tau1, self.tau2), self.probe_range)
        }
    }

    fn lower_bound_setup(&self) -> LowerBoundSetup {
        let base = if self.geometry().is_ball() { LowerBoundSetup::ball_default() } else { LowerBoundSetup::halfline_default() };
        LowerBoundSetup {
            data: self.data(),
            eps: self.eps.clone(),
            tau2: self.tau2,
            c_tilde: self.c_tilde.unwrap_or(base.c_tilde),
            ..base
        }
    }

    /// Fails fast on anything the numerical modules would reject later.
    pub fn validate(&self) -> Result<()> {
        if self.jobs == Some(0) {
            return Err(Error::Config("--jobs must be positive".into()));
        }
        let g = self.geometry();
        match self.command {
            CommandKind::Solve => {
                if self.eps.len() != 1 {
                    return Err(Error::invalid("solve takes exactly one eps"));
                }
                let eps = self.eps[0];
                if !(eps > 0.0 && eps < g.eps_limit()) {
                    return Err(Error::invalid(format!("eps must lie in (0, {:.6})", g.eps_limit())));
                }
                if !(self.horizon > 0.0 && self.horizon.is_finite()) {
                    return Err(Error::invalid("T must be positive"));
                }
                if self.output_points.0 < 2 || self.output_points.1 < 1 {
                    return Err(Error::invalid("need nx >= 2 and nt >= 1"));
                }
                if !(self.probe_range.1 > self.probe_range.0) {
                    return Err(Error::invalid("x-max must lie beyond the boundary"));
                }
                if g.is_ball() {
                    self.data().require_decay(g)?;
                }
                Ok(())
            }
            CommandKind::Rate => self.rate_study().validate(),
            CommandKind::LowerBound => self.lower_bound_setup().validate(),
            CommandKind::Verify => Ok(()),
        }
    }
}

fn usage_error(e: &Error) -> bool {
    matches!(e, Error::InvalidArgument(_) | Error::DataSpec { .. } | Error::DecayCondition(_) | Error::Config(_))
}

/// Outcome of a command: the human-readable report and whether every check held.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

fn write_csv(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| Error::Io { path: path.clone(), source })?;
    Ok(path)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_solve(cfg: &RunConfig) -> Result<Outcome> {
    let g = cfg.geometry();
    let data = cfg.data();
    let eps = cfg.eps[0];
    let (a, b) = cfg.probe_range;
    let phi = data.materialize(g, data.feature_location().max(b) + 10.0)?;
    let problem = ProblemData::new(g, eps, phi, cfg.phi_b)?;
    let pair = solve(&problem, &SolverConfig::new(cfg.horizon))?;
    let (nx, nt) = cfg.output_points;
    let mut csv = String::from("x,t,v,w,u\n");
    for j in 1..=nt {
        let t = cfg.horizon * j as f64 / nt as f64;
        for i in 0..nx {
            let x = a + (b - a) * i as f64 / (nx - 1) as f64;
            let (v, w) = (pair.v(x, t)?, pair.w(x, t)?);
            let _ = writeln!(csv, "{},{},{},{},{}", num(x), num(t), num(v), num(w), num(v + w));
        }
    }
    let file = write_csv(&cfg.output, "solution.csv", &csv)?;
    let report = format!(
        "solve {g} phi={data} phi_b={} eps={eps} T={}: {} Picard iterations, q = {:.4}, observed step ratio {:.4}, |v|_XT = {:.6}\nwrote {}",
        cfg.phi_b,
        cfg.horizon,
        pair.iterations(),
        pair.q_bound(),
        pair.q_observed(),
        pair.xt_norm()?,
        file.display()
    );
    Ok(Outcome { report, passed: true, files: vec![file] })
}

fn run_rate(cfg: &RunConfig) -> Result<Outcome> {
    let study = cfg.rate_study();
    let report = run_rate_study(&study)?;
    let fit = report.fit;
    let mut csv = String::from("eps,deviation,fitted\n");
    for p in &report.points {
        let _ = writeln!(csv, "{},{},{}", num(p.eps), num(p.deviation), num(fit.predict(p.eps)));
    }
    let _ = writeln!(csv, "# fit slope={} intercept={} max_residual={}", num(fit.slope), num(fit.intercept), num(fit.max_residual));
    let file = write_csv(&cfg.output, "rate.csv", &csv)?;
    let tol = cfg.tolerances;
    let slope_ok = fit.slope >= tol.slope.0 && fit.slope <= tol.slope.1;
    let residual_ok = fit.max_residual < tol.fit_residual;
    let mut text = format!("rate {} phi={} phi_b={} window=({}, {}) K=[{}, {}]\n", study.geometry, study.data, study.phi_b, study.tau1, study.tau2, study.probe_range.0, study.probe_range.1);
    for p in &report.points {
        let _ = writeln!(text, "  eps={:<12.6e} deviation={:.6e} at (x={:.4}, t={:.4})", p.eps, p.deviation, p.argmax.0, p.argmax.1);
    }
    let _ = writeln!(
        text,
        "slope {:.4} in [{}, {}]: {}\nmax residual {:.4} < {}: {}\nmonotone: {}\nprobe doubling change: {:.3e}",
        fit.slope,
        tol.slope.0,
        tol.slope.1,
        if slope_ok { "yes" } else { "no" },
        fit.max_residual,
        tol.fit_residual,
        if residual_ok { "yes" } else { "no" },
        report.monotone,
        report.max_doubling_change().unwrap_or(0.0)
    );
    let _ = write!(text, "wrote {}", file.display());
    Ok(Outcome { report: text, passed: slope_ok && residual_ok, files: vec![file] })
}

fn run_lower_bound(cfg: &RunConfig) -> Result<Outcome> {
    let setup = cfg.lower_bound_setup();
    let report = run_lower_bound_check(&setup)?;
    let mut csv = String::from("eps,observed_constant,recipe_constant,i_min,violations\n");
    for p in &report.points {
        let _ = writeln!(csv, "{},{},{},{},{}", num(p.eps), num(p.observed_constant), num(report.constant), num(p.i_min), p.violations);
    }
    let file = write_csv(&cfg.output, "lower_bound.csv", &csv)?;
    let mut text = if report.skipped {
        format!("lower-bound {}: zero data, check skipped\n", setup.geometry)
    } else {
        format!(
            "lower-bound {} phi={} K=[{}, {}]x[{}, {}] tau2={} C~={:.6}\nrecipe margin {:.6} ({}), C = {:.6}, eps0 = {:.4e}\n",
            setup.geometry,
            setup.data,
            setup.x_range.0,
            setup.x_range.1,
            setup.t_range.0,
            setup.t_range.1,
            setup.tau2,
            report.c_tilde,
            report.recipe_margin,
            if report.admissible() { "admissible" } else { "not admissible" },
            report.constant,
            report.eps0
        )
    };
    for p in &report.points {
        let _ = writeln!(text, "  eps={:<12.6e} min u/sqrt(eps)={:.6} I_min={:.4} violations={}", p.eps, p.observed_constant, p.i_min, p.violations);
    }
    if let Some((e, x, t, u)) = report.witness {
        let _ = writeln!(text, "first violation: eps={e:e} x={x} t={t} u={u:e}");
    }
    let _ = write!(text, "{}\nwrote {}", if report.passed() { "PASS" } else { "FAIL" }, file.display());
    Ok(Outcome { report: text, passed: report.passed(), files: vec![file] })
}

struct Row {
    id: String,
    margin: f64,
    pass: bool,
}

fn margin(tol: f64, measured: f64) -> f64 {
    if measured == 0.0 {
        f64::INFINITY
    } else {
        tol / measured
    }
}

fn geometries(cfg: &RunConfig) -> Vec<Geometry> {
    cfg.geometry.map_or_else(|| vec![Geometry::half_line(), Geometry::exterior_ball()], |g| vec![g])
}

fn suite_rows(cfg: &RunConfig, suite: Suite, rows: &mut Vec<Row>) -> Result<()> {
    let tol = cfg.tolerances;
    match suite {
        Suite::OracleCheck => {
            for c in run_oracle_suite()? {
                let m = margin(tol.oracle, c.max_relative_error);
                rows.push(Row { id: format!("oracle/{}", c.name), margin: m, pass: m >= 1.0 });
            }
        }
        Suite::Bounds => {
            for g in geometries(cfg) {
                let report = run_bound_suite(g, &SuiteConfig::new(cfg.seed))?;
                for r in &report.inequalities {
                    rows.push(Row { id: format!("{g}/{}", r.id), margin: r.worst_margin, pass: r.pass });
                }
                for c in &report.contraction {
                    let worst = c.measured.max(c.picard_ratio);
                    rows.push(Row { id: format!("{g}/contraction eps={} T={}", c.eps, c.horizon), margin: margin(c.q_bound, worst), pass: c.pass });
                }
                if let Some(n) = report.non_decay {
                    rows.push(Row { id: format!("{g}/non-decay"), margin: margin(1e-2, (n.value - n.limit).abs()), pass: n.pass });
                }
            }
        }
        Suite::Quadrature => {
            for c in run_quadrature_checks()? {
                let m = margin(tol.quadrature, c.max_change);
                rows.push(Row { id: format!("quadrature/{}", c.label), margin: m, pass: m > 1.0 });
            }
        }
        Suite::Residual => {
            for g in geometries(cfg) {
                let r = ResidualInstance::for_geometry(g).run()?;
                let m = margin(tol.residual, r.worst());
                rows.push(Row { id: format!("{g}/pde-residual"), margin: m, pass: m > 1.0 });
            }
        }
        Suite::All => {
            for s in [Suite::OracleCheck, Suite::Bounds, Suite::Quadrature, Suite::Residual] {
                suite_rows(cfg, s, rows)?;
            }
        }
    }
    Ok(())
}

fn run_verify(cfg: &RunConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    suite_rows(cfg, cfg.suite, &mut rows)?;
    let mut csv = String::from("id,worst_margin,pass\n");
    let mut text = String::new();
    for r in &rows {
        let _ = writeln!(csv, "{},{},{}", r.id, num(r.margin), r.pass);
        let _ = writeln!(text, "{} {:<48} margin {:.4e}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.margin);
    }
    let file = write_csv(&cfg.output, "suite.csv", &csv)?;
    let passed = rows.iter().all(|r| r.pass);
    let _ = write!(text, "{} of {} checks passed (seed {})\nwrote {}", rows.iter().filter(|r| r.pass).count(), rows.len(), cfg.seed, file.display());
    Ok(Outcome { report: text, passed, files: vec![file] })
}

/// Executes a resolved configuration on its own worker pool.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.command {
        CommandKind::Solve => run_solve(cfg),
        CommandKind::Rate => run_rate(cfg),
        CommandKind::LowerBound => run_lower_bound(cfg),
        CommandKind::Verify => run_verify(cfg),
    })
}

/// Parses `args`, runs, prints, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("dynbc: {e}");
            return 2;
        }
    };
    let outcome = RunConfig::resolve(cli, &file, std::env::var(SEED_ENV).ok()).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) => {
            println!("{}", o.report);
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("dynbc: {e}");
            if usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str], file: &str, env: Option<&str>) -> Result<RunConfig> {
        let cli = Cli::try_parse_from(std::iter::once("dynbc").chain(args.iter().copied())).unwrap();
        RunConfig::resolve(cli, &ConfigFile::parse(file)?, env.map(String::from))
    }

    #[test]
    fn eps_lists() {
        assert_eq!(parse_eps_list("2^-4..2^-6").unwrap(), vec![0.0625, 0.03125, 0.015625]);
        assert_eq!(parse_eps_list("2^-6..2^-4").unwrap(), vec![0.0625, 0.03125, 0.015625]);
        assert_eq!(parse_eps_list("0.1, 2^-3").unwrap(), vec![0.1, 0.125]);
        for bad in ["", "x", "2^a..2^-3", "2^2..2^-3"] {
            assert!(parse_eps_list(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_file_grammar() {
        let f = ConfigFile::parse("# comment\ngeometry = ball   # trailing\n\ntau_1 = 0.1\n").unwrap_err();
        assert!(matches!(f, Error::Config(_)));
        let f = ConfigFile::parse("# comment\ngeometry = ball   # trailing\n\ntau1 = 0.1\n").unwrap();
        assert_eq!(f.get::<String>("geometry").unwrap().as_deref(), Some("ball"));
        assert_eq!(f.get::<f64>("tau1").unwrap(), Some(0.1));
        assert!(ConfigFile::parse("geometry ball").is_err());
        assert!(f.get::<f64>("geometry").is_err());
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let cfg = resolve(&["rate", "--tau2", "0.3"], "tau1 = 0.1\ntau2 = 0.25\ngeometry = ball", None).unwrap();
        assert_eq!((cfg.tau1, cfg.tau2), (0.1, 0.3));
        assert_eq!(cfg.geometry, Some(Geometry::exterior_ball()));
        assert_eq!(cfg.probe_range, (1.0, 200.0));
        assert_eq!(cfg.eps.len(), 9);
        assert_eq!(cfg.data(), DataSpec::ScaledIndicator { b: 2.0 });
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve(&["verify"], "", None).unwrap().seed, DEFAULT_SEED);
        assert_eq!(resolve(&["verify"], "seed = 5", None).unwrap().seed, 5);
        assert_eq!(resolve(&["verify"], "seed = 5", Some("7")).unwrap().seed, 7);
        assert_eq!(resolve(&["verify", "--seed", "9"], "seed = 5", Some("7")).unwrap().seed, 9);
        assert!(resolve(&["verify"], "", Some("x")).is_err());
    }

    #[test]
    fn fail_fast_on_bad_input() {
        let decay = resolve(&["rate", "--geometry", "ball", "--phi", "indicator:b=2"], "", None).unwrap_err();
        assert!(matches!(decay, Error::DecayCondition(_)));
        assert!(usage_error(&resolve(&["solve", "--eps", "2"], "", None).unwrap_err()));
        assert!(usage_error(&resolve(&["rate", "--eps", "0.1,0.2,0.05,0.01"], "", None).unwrap_err()));
        assert!(usage_error(&resolve(&["solve", "--phi", "wave:1"], "", None).unwrap_err()));
        assert!(usage_error(&resolve(&["solve", "--tol", "bogus=1"], "", None).unwrap_err()));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with_args(["dynbc", "frobnicate"]), 2);
        assert_eq!(main_with_args(["dynbc", "solve", "--geometry", "torus"]), 2);
    }

    #[test]
    fn solve_writes_the_field_dump() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let args = ["dynbc", "solve", "--eps", "0.05", "--phi", "indicator:b=1", "--T", "0.2", "--nx", "5", "--nt", "2", "--out", out];
        assert_eq!(main_with_args(args), 0);
        let text = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,t,v,w,u");
        assert_eq!(lines.len(), 11);
        let cols: Vec<f64> = lines[10].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 5);
        assert!((cols[2] + cols[3] - cols[4]).abs() < 1e-15);
        assert_eq!(main_with_args(args), 0);
        assert_eq!(fs::read_to_string(dir.path().join("solution.csv")).unwrap(), text);
    }

    #[test]
    fn oracle_check_passes() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(main_with_args(["dynbc", "verify", "--suite", "oracle-check", "--out", dir.path().to_str().unwrap()]), 0);
        let text = fs::read_to_string(dir.path().join("suite.csv")).unwrap();
        assert!(text.starts_with("id,worst_margin,pass\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn ball_s2_matches_the_exact_profile() {
        let v = crate::experiments::rate::s2_constant(Geometry::exterior_ball(), 1.0, 2.0, 0.5).unwrap();
        assert!((v - (-0.5f64).exp() / 2.0).abs() < 1e-15);
    }
}
