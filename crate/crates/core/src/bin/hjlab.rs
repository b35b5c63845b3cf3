use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hjlab::experiment::{fit_rate, run_convergence, ExperimentConfig};
use hjlab::free_energy::{
    approximate_hj_residual_check, estimate_k_from_fields, derivative_bounds, nishimori_check, Evaluator,
    McmcParams, NishimoriStatistic, ReplicaFields, ResidualOptions, Sampler,
};
use hjlab::hj::hopf::{DEFAULT_DUAL_POINTS, DEFAULT_PRIMAL_POINTS};
use hjlab::hj::{fd_solve_initial, hopf_weak_checks, HopfSolution, InitialCondition, WeakOptions};
use hjlab::model::ModelFile;
use hjlab::{CheckReport, GridSpec3, Result, ScalarField3};

#[derive(Parser)]
#[command(name = "hjlab", version, about = "Free energies of rank-one matrix inference and their Hamilton-Jacobi limit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Disorder-averaged free energy on a grid.
    FreeEnergy(FreeEnergyArgs),
    /// Hopf-formula solution on a grid.
    Hopf(SolveArgs),
    /// Lax-Friedrichs solution on a grid.
    FdSolve(FdArgs),
    /// Identity and property suites; exits nonzero if any check fails.
    Check(CheckArgs),
    /// Convergence experiment from a JSON config.
    Converge(ConvergeArgs),
    /// Power-law fit of (n, value) pairs.
    Fit(FitArgs),
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1.0)]
    h_max: f64,
    #[arg(long, default_value_t = 9)]
    n_t: usize,
    #[arg(long, default_value_t = 9)]
    n_h: usize,
}

impl GridArgs {
    fn grid(self) -> Result<GridSpec3> {
        GridSpec3::new(self.t_max, self.h_max, self.n_t, self.n_h)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EvaluatorArg {
    Auto,
    Exact,
    Integration,
}

impl From<EvaluatorArg> for Evaluator {
    fn from(e: EvaluatorArg) -> Self {
        match e {
            EvaluatorArg::Auto => Evaluator::Auto,
            EvaluatorArg::Exact => Evaluator::Exact,
            EvaluatorArg::Integration => Evaluator::Integration,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Model JSON: prior, alpha, n and optional seed.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 200)]
    n_disorder: usize,
    /// Overrides the seed in the model file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = EvaluatorArg::Auto)]
    evaluator: EvaluatorArg,
    /// Sampler settings as JSON.
    #[arg(long)]
    mcmc: Option<PathBuf>,
}

impl ModelArgs {
    fn load(&self) -> Result<(ModelFile, u64, McmcParams)> {
        let file = ModelFile::from_json(&std::fs::read_to_string(&self.model)?)?;
        let seed = self.seed.unwrap_or(file.seed);
        let mcmc = match &self.mcmc {
            Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
            None => McmcParams::default(),
        };
        Ok((file, seed, mcmc))
    }

    fn fields(&self, grid: &GridSpec3) -> Result<ReplicaFields> {
        let (file, seed, mcmc) = self.load()?;
        ReplicaFields::compute(
            &file.model_config(),
            &file.prior_spec(),
            grid,
            self.n_disorder,
            seed,
            &mcmc,
            self.evaluator.into(),
        )
    }
}

#[derive(Args)]
struct FreeEnergyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Output stem for `<stem>.csv` and `<stem>.json`; CSV goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PsiArgs {
    /// zero | linear:a1,a2 | spherical:alpha | iid:<model.json>
    #[arg(long, conflicts_with = "psi_csv")]
    psi: Option<String>,
    /// CSV with columns h, psi1, psi2 on a uniform grid from 0.
    #[arg(long)]
    psi_csv: Option<PathBuf>,
}

impl PsiArgs {
    fn initial(&self) -> Result<InitialCondition> {
        match (&self.psi, &self.psi_csv) {
            (_, Some(path)) => InitialCondition::from_csv(path),
            (Some(spec), None) => InitialCondition::parse(spec),
            (None, None) => Err(hjlab::Error::InvalidConfig("give --psi or --psi-csv".into())),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    psi: PsiArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_DUAL_POINTS)]
    dual: usize,
    #[arg(long, default_value_t = DEFAULT_PRIMAL_POINTS)]
    primal: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FdArgs {
    #[command(flatten)]
    psi: PsiArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0.45)]
    cfl: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Nishimori,
    /// Residual of the limiting equation for the averaged free energy.
    #[value(name = "lemma31")]
    Residual,
    /// Sign and size bounds on derivatives of the averaged free energy.
    #[value(name = "lemma32")]
    Derivatives,
    WeakSolution,
}

#[derive(Args)]
struct CheckArgs {
    /// Suites to run; all four by default.
    #[arg(long, value_enum)]
    suite: Vec<Suite>,
    /// Model JSON, needed by every suite except weak-solution.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    n_disorder: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    grid: GridArgs,
    /// Initial condition for the weak-solution suite.
    #[arg(long, default_value = "spherical:1")]
    psi: String,
    /// Writes the combined report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with header and columns n, value.
    #[arg(long, conflicts_with = "pairs")]
    input: Option<PathBuf>,
    /// Inline pairs such as 4:0.5,8:0.35,16:0.25.
    #[arg(long)]
    pairs: Option<String>,
}

fn emit(field: &ScalarField3, out: Option<&Path>) -> Result<()> {
    match out {
        Some(stem) => field.save(stem),
        None => field.write_csv(std::io::stdout().lock()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn free_energy(args: &FreeEnergyArgs) -> Result<bool> {
    let grid = args.grid.grid()?;
    let fields = args.model.fields(&grid)?;
    let k = estimate_k_from_fields(&fields);
    let mut mean = fields.mean_field()?;
    mean.provenance.notes.push(format!("K on grid {:.6e} ± {:.2e}", k.estimate.mean, k.estimate.std_error));
    emit(&mean, args.out.as_deref())?;
    if args.out.is_some() {
        print_json(&serde_json::json!({ "method": fields.method, "k": k }))?;
    }
    Ok(true)
}

fn hopf(args: &SolveArgs) -> Result<bool> {
    let grid = args.grid.grid()?;
    let ic = args.psi.initial()?;
    let field = HopfSolution::from_initial(&ic, grid.h_max, grid.t_max, args.primal, args.dual)?.field(&grid)?;
    emit(&field, args.out.as_deref())?;
    Ok(true)
}

fn fd(args: &FdArgs) -> Result<bool> {
    let g = args.grid;
    let ic = args.psi.initial()?;
    let field = fd_solve_initial(&ic, g.h_max, g.n_h, g.t_max, g.n_t, args.cfl)?;
    emit(&field, args.out.as_deref())?;
    Ok(true)
}

fn check(args: &CheckArgs) -> Result<bool> {
    let suites = if args.suite.is_empty() {
        vec![Suite::Nishimori, Suite::Residual, Suite::Derivatives, Suite::WeakSolution]
    } else {
        args.suite.clone()
    };
    let grid = args.grid.grid()?;
    let mut report = CheckReport::new("hjlab check");
    let needs_model = suites.iter().any(|s| *s != Suite::WeakSolution);
    let model = match (&args.model, needs_model) {
        (Some(path), _) => Some(ModelFile::from_json(&std::fs::read_to_string(path)?)?),
        (None, true) => return Err(hjlab::Error::InvalidConfig("--model is required for these suites".into())),
        (None, false) => None,
    };
    let mut fields = None;
    for suite in suites {
        match suite {
            Suite::Nishimori => {
                let file = model.as_ref().unwrap();
                let seed = args.seed.unwrap_or(file.seed);
                let sampler = if hjlab::free_energy::is_enumerable(&file.model_config(), &file.prior_spec()) {
                    Sampler::Exact
                } else {
                    Sampler::Mcmc(McmcParams::default())
                };
                let (t, h) = (0.5 * grid.t_max, [0.25 * grid.h_max, 0.75 * grid.h_max]);
                for s in NishimoriStatistic::ALL {
                    report.merge(nishimori_check(
                        &file.model_config(),
                        &file.prior_spec(),
                        t,
                        h,
                        s,
                        4.0,
                        args.n_disorder,
                        seed,
                        &sampler,
                    )?);
                }
            }
            Suite::Residual | Suite::Derivatives => {
                let file = model.as_ref().unwrap();
                if fields.is_none() {
                    fields = Some(ReplicaFields::compute(
                        &file.model_config(),
                        &file.prior_spec(),
                        &grid,
                        args.n_disorder,
                        args.seed.unwrap_or(file.seed),
                        &McmcParams::default(),
                        Evaluator::Auto,
                    )?);
                }
                let f = fields.as_ref().unwrap();
                if suite == Suite::Residual {
                    report.merge(approximate_hj_residual_check(f, ResidualOptions::default())?);
                } else {
                    report.merge(derivative_bounds(f, grid.t_max.max(grid.h_max), None)?);
                }
            }
            Suite::WeakSolution => {
                let ic = InitialCondition::parse(&args.psi)?;
                let s = HopfSolution::from_initial(&ic, grid.h_max, grid.t_max, DEFAULT_PRIMAL_POINTS, DEFAULT_DUAL_POINTS)?;
                let field = s.field(&grid)?;
                report.merge(hopf_weak_checks(&s, &field, WeakOptions::default())?);
            }
        }
    }
    println!("{report}");
    if let Some(path) = &args.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report.passed)
}

fn converge(args: &ConvergeArgs) -> Result<bool> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(dir) = &args.out {
        config.output_dir = Some(dir.clone());
    }
    let report = run_convergence(&config)?;
    for r in &report.records {
        match (&r.gap, &r.error) {
            (Some(g), _) => println!(
                "n={:>4}  sup gap {:.6e}  K {:.4e}  L {:.3e}",
                r.n,
                g.sup,
                r.k.map(|k| k.mean).unwrap_or(f64::NAN),
                r.l.unwrap_or(f64::NAN)
            ),
            (None, Some(e)) => println!("n={:>4}  failed: {e}", r.n),
            (None, None) => {}
        }
    }
    println!("{}", report.checks);
    if config.output_dir.is_none() {
        print_json(&report)?;
    }
    Ok(report.checks.passed)
}

fn fit(args: &FitArgs) -> Result<bool> {
    let bad = |s: &str| hjlab::Error::InvalidFit(format!("cannot parse '{s}'"));
    let mut pairs = Vec::new();
    if let Some(path) = &args.input {
        let mut reader = csv::Reader::from_path(path)?;
        for record in reader.records() {
            let record = record?;
            let get = |i: usize| record.get(i).and_then(|s| s.trim().parse::<f64>().ok());
            match (get(0), get(1)) {
                (Some(n), Some(v)) => pairs.push((n, v)),
                _ => return Err(bad(&format!("{record:?}"))),
            }
        }
    }
    if let Some(inline) = &args.pairs {
        for item in inline.split(',') {
            let (n, v) = item.split_once(':').ok_or_else(|| bad(item))?;
            pairs.push((n.trim().parse().map_err(|_| bad(item))?, v.trim().parse().map_err(|_| bad(item))?));
        }
    }
    let fit = fit_rate(&pairs)?;
    print_json(&serde_json::json!({ "fit": fit, "ci": fit.ci() }))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::FreeEnergy(a) => free_energy(a),
        Command::Hopf(a) => hopf(a),
        Command::FdSolve(a) => fd(a),
        Command::Check(a) => check(a),
        Command::Converge(a) => converge(a),
        Command::Fit(a) => fit(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
