use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modneat::env::EnvKind;
use modneat_lab::config::{ConfigFile, ExperimentConfig, Mode};
use modneat_lab::experiment::{run_dynamics, run_map_elites, run_sweep, thread_pool};
use modneat_lab::genome_io::read_genome;
use modneat_lab::tools::{analyze_file, render_plots, replay};
use modneat_lab::{LabError, Result};

#[derive(Parser)]
#[command(name = "modneat", version, about = "Modularity experiments with NEAT and MAP-Elites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve populations and record fitness and modularity per generation.
    Evolve(ExperimentArgs),
    /// Repeat `evolve` for each modularity importance in --q-importance.
    Sweep(ExperimentArgs),
    /// Fill a (modularity, torque deviation) archive. --pop sets the initial
    /// population and --gens the number of offspring batches.
    MapElites(ExperimentArgs),
    /// Report size and modularity of a saved genome.
    Analyze {
        genome: PathBuf,
        /// Also evaluate the genome on this environment.
        #[arg(long)]
        env: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Run one episode and write its trace as CSV.
    Replay {
        genome: PathBuf,
        /// Defaults to the environment stored in the genome file.
        #[arg(long)]
        env: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render mean ± std band plots from a summary.csv.
    Plot {
        summary: PathBuf,
        /// Directory for fitness.svg and q.svg; defaults to the CSV's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    gens: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated importances, e.g. 0,0.1,0.2.
    #[arg(long, value_delimiter = ',')]
    q_importance: Option<Vec<f64>>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Run independent runs concurrently as well.
    #[arg(long)]
    parallel_runs: bool,
}

impl ExperimentArgs {
    fn resolve(self, mode: Mode) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            env: self.env,
            population_size: self.pop,
            generations: self.gens,
            runs: self.runs,
            master_seed: self.seed,
            q_importance: self.q_importance,
            episodes_per_eval: self.episodes,
            output_dir: self.out,
            workers: self.workers,
            parallel_runs: self.parallel_runs.then_some(true),
            ..Default::default()
        };
        ExperimentConfig::resolve(file.overlay(flags), mode)
    }
}

fn env_by_name(name: &str) -> Result<EnvKind> {
    EnvKind::from_name(name).ok_or_else(|| LabError::Config(format!("unknown environment '{name}'")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve(args) => {
            let cfg = args.resolve(Mode::Evolve)?;
            let pool = thread_pool(cfg.workers)?;
            let runs = run_dynamics(&cfg, cfg.q_importance[0], &cfg.output_dir, &pool)?;
            for r in &runs {
                let last = r.last();
                println!(
                    "run {}: best fitness {} q {} after {} generations",
                    r.run,
                    last.best_fitness,
                    last.best_genome_q,
                    r.records.len()
                );
            }
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::Sweep(args) => {
            let cfg = args.resolve(Mode::Sweep)?;
            let pool = thread_pool(cfg.workers)?;
            for (row, _) in run_sweep(&cfg, &pool)? {
                println!(
                    "I={}: final fitness {} ± {}, q {} ± {}",
                    row.importance, row.fitness_mean, row.fitness_std, row.q_mean, row.q_std
                );
            }
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::MapElites(args) => {
            let cfg = args.resolve(Mode::MapElites)?;
            let pool = thread_pool(cfg.workers)?;
            for (run, result) in run_map_elites(&cfg, &pool)?.iter().enumerate() {
                let best = result.archive.best().map_or(f64::NEG_INFINITY, |e| e.fitness);
                println!("run {run}: coverage {} best fitness {best}", result.archive.coverage());
            }
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::Analyze {
            genome,
            env,
            seed,
            episodes,
        } => {
            let spec = match env {
                Some(name) => {
                    let mut spec = env_by_name(&name)?.spec();
                    if let Some(n) = episodes {
                        if n == 0 {
                            return Err(LabError::Config("episodes must be at least 1".into()));
                        }
                        spec.episodes_per_eval = n;
                    }
                    Some(spec)
                }
                None => None,
            };
            let (_, report) = analyze_file(&genome, spec.as_ref().map(|s| (s, seed)))?;
            print!("{report}");
        }
        Command::Replay { genome, env, seed, out } => {
            let (g, meta) = read_genome(&genome)?;
            let name = env
                .or(meta.env)
                .ok_or_else(|| LabError::Config("no --env given and the genome file names none".into()))?;
            let spec = env_by_name(&name)?.spec();
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| LabError::io(&path, e))?;
                    replay(&g, &spec, seed, io::BufWriter::new(file))?;
                }
                None => replay(&g, &spec, seed, io::stdout().lock())?,
            }
        }
        Command::Plot { summary, out } => {
            let dir = out.unwrap_or_else(|| summary.parent().map(PathBuf::from).unwrap_or_default());
            for path in render_plots(&summary, &dir)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
