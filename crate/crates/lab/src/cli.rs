use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gtl_core::bilinear::{gtl_tau_residual, intermediate_residual, toda_bilinear_residual, BilinearVariant, SeriesFn};
use gtl_core::dynamics::{
    gtl_printed_discrepancy, integrate, lax_matrix, CdwCoupling, FlowId, IntegratorConfig, Monitors, RhsOptions,
    Trajectory, DEFAULT_MAX_STEPS,
};
use gtl_core::lax::{build_lax, spectrum, LaxInput, LaxRep};
use gtl_core::model::RepParams;
use gtl_core::State;
use serde::Serialize;

use crate::doc::{read_state, BilinearDoc, TauDoc};
use crate::errata::{errata, errata_table};
use crate::export::{drifts, fmt_f64, stats_json, trajectory_csv};
use crate::report::{CheckReport, Status};
use crate::suite::{run_suites, Suite, DEFAULT_SEED};
use crate::LabError;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "GTL_LAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "gtl-lab", version, about = "Generalized Toda lattice: simulation, verification and errata")]
pub struct Cli {
    /// Seed of the randomized checks (overridden by GTL_LAB_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a flow and export the trajectory.
    Simulate(SimulateArgs),
    /// Run verification suites and write a JSON report.
    Check(CheckArgs),
    /// Print the sorted spectrum of a state's Lax matrix.
    Spectrum(SpectrumArgs),
    /// Per-coefficient residuals of a tau-function description.
    TauCheck(TauCheckArgs),
    /// Printed-equation discrepancies with the adopted forms.
    Errata(ErrataArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Corrected,
    Printed,
    Intermediate,
}

impl From<CouplingArg> for CdwCoupling {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Corrected => CdwCoupling::Corrected,
            CouplingArg::Printed => CdwCoupling::Printed,
            CouplingArg::Intermediate => CdwCoupling::IntermediateSystem,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Flow id: tl-qp, tl-alpha-beta, tl-ab, gtl, n3, n3q, cdw.
    #[arg(long)]
    pub flow: String,
    /// Initial state document.
    #[arg(long, required_unless_present = "sweep")]
    pub state: Option<PathBuf>,
    /// Several initial states integrated concurrently, one output pair each.
    #[arg(long, num_args = 1.., conflicts_with = "state")]
    pub sweep: Vec<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    /// Fixed RK4 step; selects the fixed-step integrator.
    #[arg(long, conflicts_with = "rk45")]
    pub dt: Option<f64>,
    /// Adaptive Dormand-Prince 5(4) (the default when --dt is absent).
    #[arg(long)]
    pub rk45: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Use the printed generalized-lattice equations instead of the commutator projection.
    #[arg(long)]
    pub as_printed: bool,
    /// Coupling of the squared-variable flow.
    #[arg(long, value_enum, default_value_t = CouplingArg::Corrected)]
    pub coupling: CouplingArg,
    /// Hard bound on the drift of H1, H2, H3; exceeding it exits with status 1.
    #[arg(long)]
    pub max_drift: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Comma-separated suites or groups (lax, poisson, tau, rmatrix, all, or a suite name).
    #[arg(long, default_value = "all")]
    pub check: String,
    /// Report path; the report goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RepArg {
    /// The matrix the integrator monitors for this state kind.
    Auto,
    N3Sym,
    N3Q,
    GtlBanded,
    Cdw,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_enum, default_value_t = RepArg::Auto)]
    pub rep: RepArg,
}

#[derive(Debug, Args)]
pub struct TauCheckArgs {
    /// Tau description (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail (status 1) if any residual coefficient exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ErrataArgs {
    /// Also write the ledger as JSON to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    pub json: bool,
}

/// Seed precedence: environment, then flag, then the built-in default.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, LabError> {
    match env {
        Some(v) => v.trim().parse().map_err(|_| LabError::Config(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        None => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), LabError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| LabError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| LabError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Output sink: collects what the command prints so tests can inspect it.
pub struct Output<'a> {
    pub stdout: &'a mut dyn std::io::Write,
}

impl Output<'_> {
    fn line(&mut self, s: &str) {
        let _ = writeln!(self.stdout, "{s}");
    }
}

fn parse_flow(name: &str) -> Result<FlowId, LabError> {
    FlowId::parse(name).ok_or_else(|| {
        let known: Vec<&str> = FlowId::ALL.iter().map(|f| f.name()).collect();
        LabError::Config(format!("unknown flow `{name}` (known: {})", known.join(", ")))
    })
}

fn integrator(a: &SimulateArgs) -> Result<(IntegratorConfig, String), LabError> {
    let mut cfg = match a.dt {
        Some(dt) => IntegratorConfig::rk4_fixed(dt, a.t_end),
        None => IntegratorConfig::rk45(a.atol, a.rtol, a.t_end),
    };
    cfg.max_steps = a.max_steps;
    cfg.validate().map_err(|e| LabError::from_core("integrator", e))?;
    let tag = cfg.method.to_string();
    Ok((cfg, tag))
}

struct RunOutput {
    label: String,
    trajectory: Trajectory,
}

fn run_one(
    state: &State,
    flow: FlowId,
    opts: &RhsOptions,
    cfg: &IntegratorConfig,
    label: String,
) -> Result<RunOutput, LabError> {
    if state.kind().name() != flow.state_kind() {
        return Err(LabError::Config(format!(
            "{label}: flow {} needs a {} state, got {}",
            flow.name(),
            flow.state_kind(),
            state.kind().name()
        )));
    }
    let trajectory =
        integrate(state, flow, opts, cfg, Monitors::default()).map_err(|e| LabError::from_core(&label, e))?;
    Ok(RunOutput { label, trajectory })
}

fn simulate(a: &SimulateArgs, out: &mut Output<'_>) -> Result<(), LabError> {
    let flow = parse_flow(&a.flow)?;
    let (cfg, method) = integrator(a)?;
    if a.as_printed && flow != FlowId::Gtl {
        return Err(LabError::Config("--as-printed applies to the gtl flow only".into()));
    }
    let opts = RhsOptions { gtl_as_printed: a.as_printed, cdw_coupling: a.coupling.into() };
    let inputs: Vec<(String, PathBuf)> = match &a.state {
        Some(p) => vec![("trajectory".to_string(), p.clone())],
        None => a
            .sweep
            .iter()
            .map(|p| (p.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()), p.clone()))
            .collect(),
    };
    let mut labels: Vec<&str> = inputs.iter().map(|(l, _)| l.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != inputs.len() {
        return Err(LabError::Config("sweep inputs must have distinct file stems".into()));
    }
    let states = inputs
        .iter()
        .map(|(_, p)| read_state(p))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<Result<RunOutput, LabError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .iter()
            .zip(&states)
            .map(|((label, _), s)| {
                let (opts, cfg, label) = (&opts, &cfg, label.clone());
                scope.spawn(move || run_one(s, flow, opts, cfg, label))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("integration thread panicked")).collect()
    });
    let mut violations = Vec::new();
    for (r, s) in results.into_iter().zip(&states) {
        let r = r?;
        let tr = &r.trajectory;
        write_file(&a.out.join(format!("{}.csv", r.label)), &trajectory_csv(tr))?;
        let stats_name = if r.label == "trajectory" { "stats.json".to_string() } else { format!("{}.stats.json", r.label) };
        write_file(&a.out.join(stats_name), &stats_json(tr, &method))?;
        out.line(&format!(
            "{}: {} samples, {} steps, {} rejections",
            r.label,
            tr.times.len(),
            tr.stats.steps,
            tr.stats.rejections
        ));
        for (name, d) in drifts(tr) {
            out.line(&format!("  max drift {name} = {}", fmt_f64(d)));
            if let Some(bound) = a.max_drift {
                if ["H1", "H2", "H3"].contains(&name.as_str()) && (d.is_nan() || d > bound) {
                    violations.push(format!("{}: {name} drift {} exceeds {bound:e}", r.label, fmt_f64(d)));
                }
            }
        }
        if a.as_printed {
            if let State::Gtl(g) = s {
                let rows = gtl_printed_discrepancy(g).map_err(|e| LabError::from_core("discrepancy", e))?;
                let mut csv = String::from("field,printed,oracle,difference\n");
                out.line("  printed vs oracle right-hand side at t = 0:");
                for (name, p, o) in rows {
                    csv.push_str(&format!("{name},{},{},{}\n", fmt_f64(p), fmt_f64(o), fmt_f64(p - o)));
                    out.line(&format!("    {name}: printed {} oracle {}", fmt_f64(p), fmt_f64(o)));
                }
                write_file(&a.out.join(format!("{}.printed_discrepancy.csv", r.label)), &csv)?;
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(LabError::Failed(violations.join("; ")))
    }
}

/// Parses `--check`; an empty selection is a configuration error.
pub fn parse_checks(list: &str) -> Result<Vec<Suite>, LabError> {
    let mut out: Vec<Suite> = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let suites = Suite::parse_list(name).ok_or_else(|| {
            let known: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            LabError::Config(format!("unknown check `{name}` (known: lax, poisson, tau, all, {})", known.join(", ")))
        })?;
        for s in suites {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    if out.is_empty() {
        return Err(LabError::Config("empty check list".into()));
    }
    Ok(out)
}

/// Runs the selected suites; the errata ledger is always attached.
pub fn check_report(suites: &[Suite], seed: u64) -> CheckReport {
    CheckReport { seed, checks: run_suites(suites, seed), errata: errata() }
}

fn check(a: &CheckArgs, seed: u64, out: &mut Output<'_>) -> Result<(), LabError> {
    let suites = parse_checks(&a.check)?;
    let report = check_report(&suites, seed);
    let json = report.to_json();
    match &a.out {
        Some(p) => {
            write_file(p, &json)?;
            for c in &report.checks {
                let status = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::Measured => "measured",
                };
                out.line(&format!("{status:8} {} = {}", c.name, fmt_f64(c.residual)));
            }
        }
        None => out.line(&json),
    }
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(LabError::Failed(format!("failed checks: {}", names.join(", "))))
    }
}

#[derive(Serialize)]
struct SpectrumDoc {
    method: &'static str,
    eigenvalues: Vec<f64>,
    /// Imaginary parts, present only for a complex spectrum.
    #[serde(skip_serializing_if = "Option::is_none")]
    imag: Option<Vec<f64>>,
}

fn spectrum_cmd(a: &SpectrumArgs, out: &mut Output<'_>) -> Result<(), LabError> {
    let state = read_state(&a.state)?;
    let params = RepParams::default();
    let l = match (a.rep, &state) {
        (RepArg::Auto, s) => lax_matrix(s).ok_or_else(|| LabError::Config("state has no Lax matrix".into()))?,
        (rep, s) => {
            let input = match s {
                State::N3(n) => LaxInput::N3(n),
                State::N3Q(q) => LaxInput::N3Q(q),
                State::Gtl(g) => LaxInput::Gtl(g),
                State::Cdw(c) => LaxInput::Cdw(c),
                other => return Err(LabError::Config(format!("--rep is not available for {} states", other.kind().name()))),
            };
            let rep = match rep {
                RepArg::N3Sym => LaxRep::N3Sym,
                RepArg::N3Q => LaxRep::N3Q,
                RepArg::GtlBanded => LaxRep::GtlBanded,
                RepArg::Cdw => LaxRep::Cdw,
                RepArg::Auto => unreachable!(),
            };
            build_lax(input, rep, &params).map_err(|e| LabError::from_core("lax matrix", e))?.l
        }
    };
    let sp = spectrum(&l).map_err(|e| LabError::from_core("spectrum", e))?;
    let complex = sp.max_imag() > 0.0;
    let doc = SpectrumDoc {
        method: sp.method.tag(),
        eigenvalues: sp.real_parts(),
        imag: complex.then(|| sp.eigenvalues.iter().map(|z| z.im).collect()),
    };
    out.line(&serde_json::to_string(&doc).expect("spectrum serializes"));
    Ok(())
}

fn residual_rows(csv: &mut String, line: &str, s: &SeriesFn, worst: &mut f64) {
    for (k, c) in s.coeffs().iter().enumerate() {
        *worst = worst.max(c.abs());
        csv.push_str(&format!("{line},{k},{}\n", fmt_f64(*c)));
    }
}

fn tau_check(a: &TauCheckArgs, out: &mut Output<'_>) -> Result<(), LabError> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", a.input.display())))?;
    let doc = TauDoc::parse(&text)?;
    let mut csv = String::from("line,k,residual\n");
    let mut worst = 0.0f64;
    match &doc {
        TauDoc::Gtl { t0, tau2, tau3, f, constants, form } => {
            let tt = TauDoc::triple(*t0, tau2, tau3, f, constants)?;
            let full = gtl_tau_residual(&tt, (*form).into()).map_err(|e| LabError::from_core("residual", e))?;
            let inter = intermediate_residual(&tt, (*form).into()).map_err(|e| LabError::from_core("residual", e))?;
            for (i, s) in full.iter().enumerate() {
                residual_rows(&mut csv, &format!("r{}", i + 1), s, &mut worst);
            }
            for (i, s) in inter.iter().enumerate() {
                residual_rows(&mut csv, &format!("s{}", i + 1), s, &mut worst);
            }
        }
        TauDoc::Toda { t0, prev, tau, next, variant } => {
            let mk = |c: &[f64], w: &str| {
                SeriesFn::new(*t0, c.to_vec()).map_err(|e| LabError::Config(format!("{w}: {e}")))
            };
            let v = match variant {
                BilinearDoc::Printed => BilinearVariant::Printed,
                BilinearDoc::Standard => BilinearVariant::Standard,
            };
            let r = toda_bilinear_residual(&mk(prev, "prev")?, &mk(tau, "tau")?, &mk(next, "next")?, v)
                .map_err(|e| LabError::from_core("residual", e))?;
            residual_rows(&mut csv, "bilinear", &r, &mut worst);
        }
    }
    match &a.out {
        Some(p) => {
            write_file(p, &csv)?;
            out.line(&format!("max residual coefficient {}", fmt_f64(worst)));
        }
        None => {
            let _ = write!(out.stdout, "{csv}");
        }
    }
    match a.tol {
        Some(tol) if worst.is_nan() || worst > tol => {
            Err(LabError::Failed(format!("max residual {} exceeds {tol:e}", fmt_f64(worst))))
        }
        _ => Ok(()),
    }
}

fn errata_cmd(a: &ErrataArgs, out: &mut Output<'_>) -> Result<(), LabError> {
    let rows = errata();
    let json = serde_json::to_string_pretty(&rows).expect("errata serialize");
    if let Some(p) = &a.out {
        write_file(p, &json)?;
    }
    if a.json {
        out.line(&json);
    } else {
        let _ = write!(out.stdout, "{}", errata_table(&rows));
    }
    Ok(())
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli, env_seed: Option<&str>, out: &mut Output<'_>) -> Result<(), LabError> {
    let seed = resolve_seed(cli.seed, env_seed)?;
    match &cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Check(a) => check(a, seed, out),
        Command::Spectrum(a) => spectrum_cmd(a, out),
        Command::TauCheck(a) => tau_check(a, out),
        Command::Errata(a) => errata_cmd(a, out),
    }
}

/// Entry point shared by the binary: parses, runs and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let mut out = Output { stdout: &mut lock };
    match execute(&cli, env_seed.as_deref(), &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gtl-lab: {e}");
            e.exit_code()
        }
    }
}
