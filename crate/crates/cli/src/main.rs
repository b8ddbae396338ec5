//! `plate-dcm`: train, benchmark and evaluate deep collocation plate models.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use plate_dcm::benchmarks::{BenchmarkCase, CaseId, Grid};
use plate_dcm::physics::Material;
use plate_dcm::problem::Domain;
use plate_dcm::run::{self, exit, RunConfig, DEFAULT_LATTICE_SIDE};
use plate_dcm::{Architecture, Error, Result};

#[derive(Parser)]
#[command(name = "plate-dcm", version, about = "Deep collocation solver for Kirchhoff plates")]
struct Cli {
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one network from a run config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train a layers × neurons grid on a benchmark case.
    Benchmark {
        /// ss-square, clamped-square, clamped-circular or ss-winkler.
        #[arg(long)]
        case: String,
        /// Layer counts and neuron counts, e.g. `1,2,3x20,40,60`.
        #[arg(long, default_value = "1,2,3,4x20,30,40,50,60")]
        grid: String,
        /// Sampling and training settings; the architecture is ignored.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a parameters file on a uniform lattice.
    Evaluate {
        #[arg(long)]
        params: PathBuf,
        /// Benchmark case supplying domain, material and oracle columns.
        #[arg(long, conflicts_with = "config")]
        case: Option<String>,
        /// Run config supplying domain and material.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Lattice points per side.
        #[arg(long, default_value_t = DEFAULT_LATTICE_SIDE)]
        grid: usize,
        /// Add Mx, My, Mxy, Qx, Qy columns.
        #[arg(long)]
        moments: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write the collocation points of a config or case.
    ExportPoints {
        #[arg(long, conflicts_with = "case")]
        config: Option<PathBuf>,
        #[arg(long)]
        case: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Seed for sampling and initialization; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) -> PathBuf {
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        self.out_dir
            .clone()
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn case_config(case: &str, config: Option<&Path>) -> Result<RunConfig> {
    let id: CaseId = case.parse()?;
    match config {
        Some(path) => {
            let mut cfg = RunConfig::load(path)?;
            if cfg.case != Some(id) {
                cfg.problem = None;
            }
            cfg.case = Some(id);
            cfg.validate()?;
            Ok(cfg)
        }
        None => Ok(RunConfig::for_case(id, Architecture::new(3, 50)?)),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, common } => {
            let mut cfg = RunConfig::load(&config)?;
            let out = common.apply(&mut cfg);
            let result = run::cmd_train(&cfg, &out);
            if let Ok(r) = &result {
                let s = &r.summary;
                info!(
                    "{:?}: loss {:.4e}, centre deflection {:.6e}{}",
                    s.status,
                    s.final_loss.total,
                    s.center_deflection,
                    s.relative_l2.map(|e| format!(", relative L2 {e:.3e}")).unwrap_or_default()
                );
                info!("wrote {}", out.display());
            }
            result.map(|_| ())
        }
        Command::Benchmark {
            case,
            grid,
            config,
            common,
        } => {
            let grid: Grid = grid.parse()?;
            let mut cfg = case_config(&case, config.as_deref())?;
            let out = common.apply(&mut cfg);
            let report = run::cmd_benchmark(&cfg, &grid, &out)?;
            for c in &report.cells {
                info!(
                    "{}x{}: {} relative L2 {}",
                    c.layers,
                    c.neurons,
                    c.status,
                    c.relative_l2.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "-".into())
                );
            }
            info!("wrote {}", out.display());
            Ok(())
        }
        Command::Evaluate {
            params,
            case,
            config,
            grid,
            moments,
            out_dir,
        } => {
            let params = run::load_params(&params)?;
            let (domain, material, case) = match (case, config) {
                (Some(id), _) => {
                    let c = BenchmarkCase::new(id.parse()?);
                    (c.problem.domain, c.problem.material, Some(c))
                }
                (None, Some(path)) => {
                    let (problem, case) = RunConfig::load(&path)?.resolve()?;
                    (problem.domain, problem.material, case)
                }
                (None, None) => (
                    Domain::Rectangle { a: 1.0, b: 1.0 },
                    Material::from_rigidity(1.0, 0.3)?,
                    None,
                ),
            };
            fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("evaluation.csv");
            let n = run::cmd_evaluate(&params, &domain, &material, case.as_ref(), grid, moments, fs::File::create(&path)?)?;
            info!("wrote {n} rows to {}", path.display());
            Ok(())
        }
        Command::ExportPoints { config, case, common } => {
            let mut cfg = match (config, case) {
                (Some(path), _) => RunConfig::load(&path)?,
                (None, Some(case)) => case_config(&case, None)?,
                (None, None) => return Err(Error::Config("export-points needs --config or --case".into())),
            };
            let out = common.apply(&mut cfg);
            let set = run::cmd_export_points(&cfg, &out)?;
            info!(
                "wrote {} interior and {} boundary points to {}",
                set.interior.len(),
                set.boundary.len(),
                out.join(run::POINTS_FILE).display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match execute(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(run::exit_code(&e) as u8)
        }
    }
}
