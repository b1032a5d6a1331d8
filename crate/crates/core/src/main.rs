use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use heston_pf::calibrate::{calibrate, CalibrationOptions};
use heston_pf::experiments::{
    experiment_exemplary, experiment_pf_budget, experiment_prior_shift, experiment_sigma_dispersion, StudySettings,
};
use heston_pf::io::{self, Mode, RunConfig, DEFAULT_BINS};
use heston_pf::sde::{simulate_bates, simulate_heston};
use heston_pf::{Error, HestonParams, JumpParams, PriorConfig, Result, TimeGrid};

#[derive(Parser)]
#[command(name = "heston-pf", version, about = "Heston/Bates simulation and calibration from prices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Heston,
    Bates,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Heston => Mode::Heston,
            ModeArg::Bates => Mode::Bates,
        }
    }
}

#[derive(Args, Clone)]
struct TruthArgs {
    #[arg(long, default_value_t = 0.1)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = -0.8, allow_hyphen_values = true)]
    mu_j: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma_j: f64,
    /// Horizon in years.
    #[arg(long, default_value_t = 3.0)]
    maturity: f64,
    #[arg(long, default_value_t = 1.0 / 252.0)]
    dt: f64,
    #[arg(long, default_value_t = 100.0)]
    s0: f64,
    /// Initial variance; defaults to theta.
    #[arg(long)]
    v0: Option<f64>,
}

impl TruthArgs {
    fn heston(&self) -> HestonParams {
        HestonParams { mu: self.mu, kappa: self.kappa, theta: self.theta, sigma: self.sigma, rho: self.rho }
    }

    fn jumps(&self) -> JumpParams {
        JumpParams { lambda: self.lambda, mu_j: self.mu_j, sigma_j: self.sigma_j }
    }

    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::from_maturity(self.maturity, self.dt)
    }
}

#[derive(Args, Clone)]
struct StudyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    particles: usize,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl StudyArgs {
    fn settings(&self) -> StudySettings {
        StudySettings { n_particles: self.particles, n_samples: self.samples, burn_in: self.burn_in, s0: 100.0 }
    }

    fn seed_list(&self) -> Vec<u64> {
        (self.seed..self.seed + self.seeds).collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a Heston or Bates path to CSV.
    Simulate {
        #[arg(long, value_enum, default_value = "heston")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "simulated.csv")]
        out: PathBuf,
        #[command(flatten)]
        truth: TruthArgs,
    },
    /// Calibrate from a price CSV.
    Calibrate {
        #[arg(long)]
        prices: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        /// Also write per-step filter traces.
        #[arg(long)]
        trace: bool,
    },
    /// Simulation studies.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Experiment {
    /// θ estimates under shifted θ priors and several chain lengths.
    PriorShift {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        shifts: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "10,500")]
        cycles: Vec<usize>,
        #[command(flatten)]
        truth: TruthArgs,
    },
    /// θ chains when the filter reruns only in a fraction of cycles.
    PfBudget {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,0.05")]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        shift: f64,
        #[command(flatten)]
        truth: TruthArgs,
    },
    /// κ-chain spread for paths that differ only in σ.
    SigmaDispersion {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.1")]
        sigmas: Vec<f64>,
        #[command(flatten)]
        truth: TruthArgs,
    },
    /// Bates path calibrated with the default priors; writes a comparison table.
    Exemplary {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        truth: TruthArgs,
    },
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.display().to_string(), msg: e.to_string() })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { mode, seed, out, truth } => {
            let grid = truth.grid()?;
            let v0 = truth.v0.unwrap_or(truth.theta);
            let path = match mode {
                ModeArg::Heston => simulate_heston(&truth.heston(), &grid, truth.s0, v0, seed)?,
                ModeArg::Bates => simulate_bates(&truth.heston(), &truth.jumps(), &grid, truth.s0, v0, seed)?,
            };
            io::write_simulation(&out, &path)?;
            info!("wrote {}", out.display());
        }
        Command::Calibrate { prices, config, seed, out, mode, burn_in, bins, trace } => {
            let cfg = match &config {
                Some(p) => io::load_config(p)?,
                None => RunConfig::default(),
            };
            let series = io::load_prices(&prices)?;
            let dt = cfg.dt.unwrap_or(series.dt);
            let mode = mode.map(Mode::from).unwrap_or(cfg.mode);
            let opts = CalibrationOptions {
                with_jumps: mode == Mode::Bates,
                seed: seed.or(cfg.seed).unwrap_or(0),
                burn_in: burn_in.or(cfg.burn_in).unwrap_or(0),
            };
            let bins = bins.or(cfg.bins).unwrap_or(DEFAULT_BINS);
            if bins == 0 {
                return Err(Error::Config("bins must be >= 1".into()));
            }
            let out = out.or(cfg.out).unwrap_or_else(|| PathBuf::from("out"));
            let report = calibrate(&series.prices, dt, &cfg.priors, &opts)?;
            let files = io::emit_report(&report, &out, bins, trace)?;
            info!("wrote {} files to {}", files.len(), out.display());
        }
        Command::Experiment(exp) => run_experiment(exp)?,
    }
    Ok(())
}

fn run_experiment(exp: Experiment) -> Result<()> {
    match exp {
        Experiment::PriorShift { study, shifts, cycles, truth } => {
            ensure_dir(&study.out)?;
            let rows = experiment_prior_shift(
                &truth.heston(),
                &truth.grid()?,
                &shifts,
                &cycles,
                &study.seed_list(),
                &study.settings(),
            )?;
            io::write_rows(&study.out.join("prior_shift.csv"), &rows)?;
        }
        Experiment::PfBudget { study, fractions, shift, truth } => {
            ensure_dir(&study.out)?;
            let rows = experiment_pf_budget(
                &truth.heston(),
                &truth.grid()?,
                &fractions,
                &study.seed_list(),
                shift,
                &study.settings(),
            )?;
            io::write_rows(&study.out.join("pf_budget.csv"), &rows)?;
        }
        Experiment::SigmaDispersion { study, sigmas, truth } => {
            ensure_dir(&study.out)?;
            let rows = experiment_sigma_dispersion(
                &truth.heston(),
                &sigmas,
                &truth.grid()?,
                &study.seed_list(),
                &study.settings(),
            )?;
            io::write_rows(&study.out.join("sigma_dispersion.csv"), &rows)?;
        }
        Experiment::Exemplary { seed, config, burn_in, bins, out, truth } => {
            let priors = match &config {
                Some(p) => io::load_config(p)?.priors,
                None => PriorConfig::default(),
            };
            let (report, rows) =
                experiment_exemplary(&truth.heston(), &truth.jumps(), &truth.grid()?, &priors, seed, burn_in)?;
            io::emit_report(&report, &out, bins, true)?;
            io::write_exemplary_table(&out.join("exemplary_table.csv"), &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
