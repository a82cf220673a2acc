//! Multi-run NEAT experiments, importance sweeps and MAP-Elites runs.
//!
//! Every stochastic choice is drawn from seeds derived from the master seed:
//! run `r` uses `derive_seed(master, [r])`, and the genome at population index
//! `i` in generation `g` is evaluated with `derive_seed(run_seed, [g, i])`.
//! Evaluations run on a rayon pool and are collected in index order, so the
//! worker count never changes any output.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use modneat::env::{evaluate, EnvError, EvalResult};
use modneat::map_elites::{map_elites_run, modularity_descriptor, Job, MapElitesRun, GRID_SIZE};
use modneat::neat::{Genome, Population};
use modneat::objectives::{modularity_reward_fitness, QImportanceConfig};
use modneat::seed::derive_seed;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::genome_io::{write_genome, Metadata};
use crate::stats::{mean, sample_std};
use crate::svg;

pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    derive_seed(master_seed, &[run as u64])
}

pub fn eval_seed(run_seed: u64, generation: usize, index: usize) -> u64 {
    derive_seed(run_seed, &[generation as u64, index as u64])
}

pub fn thread_pool(workers: usize) -> Result<ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

/// One row of a per-run CSV. `best_fitness` is the selection fitness of the
/// generation's champion; `best_reward` is that champion's mean episode
/// reward (equal to `best_fitness` when the importance is 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_genome_q: f64,
    pub mean_fitness: f64,
    pub species_count: usize,
    pub mean_node_count: f64,
    pub mean_enabled_connections: f64,
    pub best_reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Generations(usize),
    /// Stop after the first generation that brings the evaluation count to at
    /// least this many.
    Evaluations(usize),
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run: usize,
    pub records: Vec<GenerationRecord>,
    pub champion: Genome,
    pub evaluations: usize,
}

impl RunResult {
    pub fn last(&self) -> &GenerationRecord {
        self.records.last().expect("a run has at least one generation")
    }
}

struct Scored {
    index: usize,
    fitness: f64,
    reward: f64,
}

/// Evolves one population, calling `on_record` after each generation.
pub fn evolve_run(
    cfg: &ExperimentConfig,
    importance: &QImportanceConfig,
    run: usize,
    stop: Stop,
    pool: &ThreadPool,
    mut on_record: impl FnMut(&GenerationRecord) -> Result<()>,
) -> Result<RunResult> {
    let spec = cfg.env_spec();
    let seed = run_seed(cfg.master_seed, run);
    let mut pop = Population::new(cfg.neat_config(), seed)?;
    let mut records = Vec::new();
    let mut evaluations = 0;
    for generation in 0.. {
        let pending = pop.pending();
        let genomes = &pop.genomes;
        let scored: Vec<Scored> = pool.install(|| {
            pending
                .par_iter()
                .map(|&index| {
                    let genome = &genomes[index];
                    let eval = evaluate(genome, &spec, spec.episodes_per_eval, eval_seed(seed, generation, index))?;
                    let q = if importance.importance > 0.0 {
                        modularity_descriptor(genome)
                    } else {
                        0.0
                    };
                    Ok(Scored {
                        index,
                        fitness: modularity_reward_fitness(eval.mean_reward, q, importance),
                        reward: eval.mean_reward,
                    })
                })
                .collect::<Result<Vec<_>, EnvError>>()
        })?;
        evaluations += scored.len();
        for s in scored {
            pop.set_fitness(s.index, s.fitness, s.reward);
        }

        let champion = pop.champion().expect("population is never empty");
        let n = pop.genomes.len() as f64;
        let record = GenerationRecord {
            generation,
            best_fitness: champion.fitness.expect("all genomes scored"),
            best_genome_q: modularity_descriptor(champion),
            mean_fitness: pop.genomes.iter().filter_map(|g| g.fitness).sum::<f64>() / n,
            species_count: pop.species.len(),
            mean_node_count: pop.genomes.iter().map(|g| g.nodes.len()).sum::<usize>() as f64 / n,
            mean_enabled_connections: pop.genomes.iter().map(Genome::enabled_count).sum::<usize>() as f64 / n,
            best_reward: champion.reward.expect("all genomes scored"),
        };
        on_record(&record)?;
        records.push(record);

        let done = match stop {
            Stop::Generations(g) => generation + 1 >= g,
            Stop::Evaluations(budget) => evaluations >= budget,
        };
        if done {
            let champion = champion.clone();
            return Ok(RunResult {
                run,
                records,
                champion,
                evaluations,
            });
        }
        pop.advance()?;
    }
    unreachable!("the generation loop only exits by returning")
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::io(path, io),
        other => LabError::format(path, format!("{other:?}")),
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn run_csv_path(dir: &Path, run: usize) -> PathBuf {
    dir.join(format!("run_{run:03}.csv"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub generation: usize,
    pub fitness_mean: f64,
    pub fitness_std: f64,
    pub q_mean: f64,
    pub q_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct FinalRow {
    run: usize,
    best_fitness: f64,
    best_genome_q: f64,
    best_reward: f64,
    evaluations: usize,
}

/// Per-generation mean and sample std across runs of the champion's
/// fitness and Q, up to the shortest run.
pub fn summarize_runs(runs: &[RunResult]) -> Vec<SummaryRow> {
    let gens = runs.iter().map(|r| r.records.len()).min().unwrap_or(0);
    (0..gens)
        .map(|g| {
            let f: Vec<f64> = runs.iter().map(|r| r.records[g].best_fitness).collect();
            let q: Vec<f64> = runs.iter().map(|r| r.records[g].best_genome_q).collect();
            SummaryRow {
                generation: g,
                fitness_mean: mean(&f),
                fitness_std: sample_std(&f),
                q_mean: mean(&q),
                q_std: sample_std(&q),
            }
        })
        .collect()
}

/// Runs `cfg.runs` evolutions at one importance and writes into `dir`:
/// `run_NNN.csv` (flushed every generation), `summary.csv`, `final.csv`
/// and `champion_run_NNN.json`.
pub fn run_dynamics(cfg: &ExperimentConfig, importance: f64, dir: &Path, pool: &ThreadPool) -> Result<Vec<RunResult>> {
    create_dir(dir)?;
    let imp = cfg.importance(importance)?;
    let one = |run: usize| -> Result<RunResult> {
        let path = run_csv_path(dir, run);
        let mut w = csv_writer(&path)?;
        let result = evolve_run(cfg, &imp, run, Stop::Generations(cfg.generations), pool, |rec| {
            w.serialize(rec).map_err(|e| csv_error(&path, e))?;
            w.flush().map_err(|e| LabError::io(&path, e))
        })?;
        let last = result.last();
        write_genome(
            &dir.join(format!("champion_run_{run:03}.json")),
            &result.champion,
            Metadata {
                env: Some(cfg.env.name().to_string()),
                generation: Some(last.generation),
                fitness: Some(last.best_fitness),
                q_score: Some(last.best_genome_q),
            },
        )?;
        Ok(result)
    };
    let results: Vec<RunResult> = if cfg.parallel_runs {
        pool.install(|| (0..cfg.runs).into_par_iter().map(one).collect::<Result<_>>())?
    } else {
        (0..cfg.runs).map(one).collect::<Result<_>>()?
    };

    write_rows(&dir.join("summary.csv"), &summarize_runs(&results))?;
    let finals: Vec<FinalRow> = results
        .iter()
        .map(|r| FinalRow {
            run: r.run,
            best_fitness: r.last().best_fitness,
            best_genome_q: r.last().best_genome_q,
            best_reward: r.last().best_reward,
            evaluations: r.evaluations,
        })
        .collect();
    write_rows(&dir.join("final.csv"), &finals)?;
    Ok(results)
}

pub fn importance_dir(out: &Path, importance: f64) -> PathBuf {
    out.join(format!("importance_{importance}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub importance: f64,
    pub fitness_mean: f64,
    pub fitness_std: f64,
    pub q_mean: f64,
    pub q_std: f64,
    pub reward_mean: f64,
    pub reward_std: f64,
}

/// One dynamics experiment per importance under `importance_<I>/`, plus a
/// `sweep_summary.csv` of final-generation statistics.
pub fn run_sweep(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Vec<(SweepRow, Vec<RunResult>)>> {
    create_dir(&cfg.output_dir)?;
    let mut out = Vec::new();
    for &importance in &cfg.q_importance {
        let runs = run_dynamics(cfg, importance, &importance_dir(&cfg.output_dir, importance), pool)?;
        let f: Vec<f64> = runs.iter().map(|r| r.last().best_fitness).collect();
        let q: Vec<f64> = runs.iter().map(|r| r.last().best_genome_q).collect();
        let rw: Vec<f64> = runs.iter().map(|r| r.last().best_reward).collect();
        let row = SweepRow {
            importance,
            fitness_mean: mean(&f),
            fitness_std: sample_std(&f),
            q_mean: mean(&q),
            q_std: sample_std(&q),
            reward_mean: mean(&rw),
            reward_std: sample_std(&rw),
        };
        out.push((row, runs));
    }
    let rows: Vec<SweepRow> = out.iter().map(|(r, _)| r.clone()).collect();
    write_rows(&cfg.output_dir.join("sweep_summary.csv"), &rows)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ArchiveRow {
    q_cell: usize,
    d_cell: usize,
    q: f64,
    d: f64,
    fitness: f64,
    genome_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct HistoryRow {
    generation: usize,
    coverage: usize,
    best_fitness: f64,
    accepted: usize,
}

/// Evaluates a MAP-Elites batch on the pool, preserving job order.
pub fn parallel_evaluator<'p>(
    cfg: &ExperimentConfig,
    pool: &'p ThreadPool,
) -> impl FnMut(&[Job<'_>]) -> Result<Vec<EvalResult>, EnvError> + 'p {
    let spec = cfg.env_spec();
    move |jobs: &[Job<'_>]| {
        pool.install(|| {
            jobs.par_iter()
                .map(|j| evaluate(j.genome, &spec, spec.episodes_per_eval, j.eval_seed))
                .collect()
        })
    }
}

/// Runs MAP-Elites once per run into `run_NNN/`: `archive.csv`,
/// `genomes/*.json`, `heatmap.svg` and `history.csv`.
pub fn run_map_elites(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Vec<MapElitesRun>> {
    let me = cfg.map_elites_config();
    let mut results = Vec::new();
    for run in 0..cfg.runs {
        let dir = cfg.output_dir.join(format!("run_{run:03}"));
        let genome_dir = dir.join("genomes");
        create_dir(&genome_dir)?;
        let result = map_elites_run(&me, run_seed(cfg.master_seed, run), parallel_evaluator(cfg, pool))?;

        let mut rows = Vec::new();
        for (qc, dc, elite) in result.archive.occupied() {
            let file = format!("genomes/q{qc:02}_d{dc:02}.json");
            write_genome(
                &dir.join(&file),
                &elite.genome,
                Metadata {
                    env: Some(cfg.env.name().to_string()),
                    generation: None,
                    fitness: Some(elite.fitness),
                    q_score: Some(elite.q),
                },
            )?;
            rows.push(ArchiveRow {
                q_cell: qc,
                d_cell: dc,
                q: elite.q,
                d: elite.d,
                fitness: elite.fitness,
                genome_file: file,
            });
        }
        write_rows(&dir.join("archive.csv"), &rows)?;

        let history: Vec<HistoryRow> = result
            .history
            .iter()
            .map(|h| HistoryRow {
                generation: h.generation,
                coverage: h.coverage,
                best_fitness: h.best_fitness,
                accepted: h.accepted,
            })
            .collect();
        write_rows(&dir.join("history.csv"), &history)?;

        let mut grid = vec![vec![None; GRID_SIZE]; GRID_SIZE];
        for (qc, dc, elite) in result.archive.occupied() {
            grid[qc][dc] = Some(elite.fitness);
        }
        let path = dir.join("heatmap.svg");
        fs::File::create(&path)
            .and_then(|mut f| f.write_all(svg::heatmap(&grid, "Q", "D").as_bytes()))
            .map_err(|e| LabError::io(&path, e))?;
        results.push(result);
    }
    Ok(results)
}
