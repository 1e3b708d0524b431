use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use coherent_nse::expansion::io::{save_expansion, CoefficientStorage};
use coherent_nse::harness::config::{LemmaCase, LemmaSection};
use coherent_nse::harness::{self, ExperimentConfig, ExperimentKind, Fault, OUTPUT_ENV};
use coherent_nse::{Error, Result};

#[derive(Parser)]
#[command(name = "coherent-nse", version, about = "Asymptotic expansions of forced Navier-Stokes flows and their numerical checks")]
struct Cli {
    /// Output directory (overrides the configuration file).
    #[arg(long, global = true, env = OUTPUT_ENV)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Override a configuration value, e.g. `--set solver.dt=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::load(&self.config, &self.overrides)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    None,
    ResolventSign,
}

#[derive(Subcommand)]
enum Command {
    /// Build the solution expansion q_1..q_N and write one file per term.
    Expand {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Store coefficients in separate field files.
        #[arg(long)]
        separate: bool,
    },
    /// Integrate the configured equation and write a trajectory CSV.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run a decay experiment and write the residual report.
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run the invariant suites; prints a JSON report.
    Selftest {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, value_enum, default_value = "none")]
        fault: FaultArg,
    },
    /// Tabulate the integral-lemma ratio.
    LemmaIntegral {
        /// Configuration with a [lemma] section.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// A case `m,lambda,gamma,t_star`; repeatable.
        #[arg(long = "case", value_name = "M,LAMBDA,GAMMA,T_STAR")]
        cases: Vec<String>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
}

fn output_dir(cli_out: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir(cli_out)
}

fn create(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })
}

fn parse_case(text: &str) -> Result<LemmaCase> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("case '{text}' is not m,lambda,gamma,t_star"));
    if parts.len() != 4 {
        return Err(bad());
    }
    Ok(LemmaCase {
        m: parts[0].parse().map_err(|_| bad())?,
        lambda: parts[1].parse().map_err(|_| bad())?,
        gamma: parts[2].parse().map_err(|_| bad())?,
        t_star: parts[3].parse().map_err(|_| bad())?,
    })
}

fn run(cli: Cli) -> Result<bool> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Expand { cfg, separate } => {
            let cfg = cfg.load()?;
            let (seq, q) = harness::expand(&cfg)?;
            let dir = output_dir(out, &cfg);
            create(&dir)?;
            let prefix = cfg.prefix();
            let storage = if separate { CoefficientStorage::Separate } else { CoefficientStorage::Inline };
            for (n, qn) in q.iter().enumerate() {
                let path = dir.join(format!("{prefix}.q{}.exp", n + 1));
                save_expansion(&path, qn, storage)?;
                println!("q_{} (mu = {}): {} terms -> {}", n + 1, seq.mu(n + 1)?, qn.len(), path.display());
            }
            Ok(true)
        }
        Command::Simulate { cfg } => {
            let cfg = cfg.load()?;
            let traj = harness::simulate(&cfg)?;
            let dir = output_dir(out, &cfg);
            create(&dir)?;
            let path = dir.join(format!("{}.trajectory.csv", cfg.prefix()));
            traj.save_csv(&path)?;
            println!("{} samples -> {}", traj.times.len(), path.display());
            Ok(true)
        }
        Command::Verify { cfg } => {
            let cfg = cfg.load()?;
            match cfg.kind {
                ExperimentKind::LemmaIntegral => {
                    let table = harness::run_lemma_table(cfg.lemma()?)?;
                    let dir = output_dir(out, &cfg);
                    write_lemma(&table, &dir, &cfg.prefix())?;
                    Ok(table.passed())
                }
                ExperimentKind::Selftest => {
                    let report = harness::run_selftest(cfg.seed, Fault::None)?;
                    print_selftest(&report)?;
                    Ok(report.passed())
                }
                _ => {
                    let report = harness::run_experiment(&cfg)?;
                    let dir = output_dir(out, &cfg);
                    let files = report.save(&dir, &cfg.prefix())?;
                    print!("{}", report.summary());
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                    Ok(report.passed())
                }
            }
        }
        Command::Selftest { seed, fault } => {
            let fault = match fault {
                FaultArg::None => Fault::None,
                FaultArg::ResolventSign => Fault::ResolventSign,
            };
            let report = harness::run_selftest(seed, fault)?;
            print_selftest(&report)?;
            if let Some(dir) = out {
                create(dir)?;
                let path = dir.join("selftest.json");
                let body = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
                std::fs::write(&path, body).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            }
            Ok(report.passed())
        }
        Command::LemmaIntegral { config, overrides, cases, t_max, points } => {
            let (mut section, dir, prefix) = match &config {
                Some(path) => {
                    let cfg = ExperimentConfig::load(path, &overrides)?;
                    (cfg.lemma()?.clone(), output_dir(out, &cfg), cfg.prefix())
                }
                None => {
                    let section = LemmaSection { cases: Vec::new(), t_max: 1e3, points: 2001 };
                    (section, out.map_or_else(|| PathBuf::from("out"), Path::to_path_buf), "lemma-integral".to_string())
                }
            };
            for c in &cases {
                section.cases.push(parse_case(c)?);
            }
            if let Some(t) = t_max {
                section.t_max = t;
            }
            if let Some(p) = points {
                section.points = p;
            }
            if section.cases.is_empty() {
                return Err(Error::Config("no lemma cases given".into()));
            }
            let table = harness::run_lemma_table(&section)?;
            write_lemma(&table, &dir, &prefix)?;
            Ok(table.passed())
        }
    }
}

fn write_lemma(table: &harness::LemmaTable, dir: &Path, prefix: &str) -> Result<()> {
    create(dir)?;
    let path = dir.join(format!("{prefix}.csv"));
    let file = std::fs::File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    table.write_csv(file)?;
    print!("{}", table.summary());
    println!("wrote {}", path.display());
    Ok(())
}

fn print_selftest(report: &harness::SelftestReport) -> Result<()> {
    for r in &report.results {
        eprintln!("{} {} (measured {:.3e}, tolerance {:.1e})", if r.passed { "PASS" } else { "FAIL" }, r.name, r.measured, r.tolerance);
    }
    for c in &report.bilinear_constants {
        eprintln!("bilinear constant alpha = {}, sigma = {}: {:.4} over {} pairs", c.alpha, c.sigma, c.max_ratio, c.pairs);
    }
    let body = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
    println!("{body}");
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
