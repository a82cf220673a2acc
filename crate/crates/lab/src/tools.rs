//! `analyze`, `replay` and `plot`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use modneat::env::{evaluate, run_episode_observed, EnvSpec, EvalResult};
use modneat::modularity::{approx_max_q, genome_to_graph, Partition};
use modneat::neat::{Genome, NodeKind};

use crate::error::{LabError, Result};
use crate::genome_io::read_genome;
use crate::svg;

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub nodes: usize,
    pub hidden_nodes: usize,
    pub connections: usize,
    pub enabled_connections: usize,
    /// Approximate maximum modularity, 0 when the graph has no edges.
    pub q: f64,
    pub partition: Partition,
    /// No enabled connections, so modularity is undefined and reported as 0.
    pub degenerate: bool,
    pub eval: Option<EvalResult>,
}

pub fn analyze_genome(genome: &Genome) -> Analysis {
    let graph = genome_to_graph(genome);
    let (q, partition, degenerate) = match approx_max_q(&graph) {
        Ok(r) => (r.q, r.partition, false),
        Err(_) => (0.0, Partition::single_module(graph.node_count()), true),
    };
    Analysis {
        nodes: genome.nodes.len(),
        hidden_nodes: genome.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).count(),
        connections: genome.connections.len(),
        enabled_connections: genome.enabled_count(),
        q,
        partition,
        degenerate,
        eval: None,
    }
}

/// Reads a genome file and analyzes it, optionally evaluating it on `env`.
pub fn analyze_file(path: &Path, env: Option<(&EnvSpec, u64)>) -> Result<(Genome, Analysis)> {
    let (genome, _) = read_genome(path)?;
    let mut report = analyze_genome(&genome);
    if let Some((spec, seed)) = env {
        report.eval = Some(evaluate(&genome, spec, spec.episodes_per_eval, seed)?);
    }
    Ok((genome, report))
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes: {} ({} hidden)", self.nodes, self.hidden_nodes)?;
        writeln!(f, "connections: {} ({} enabled)", self.connections, self.enabled_connections)?;
        if self.degenerate {
            writeln!(f, "q: 0 (degenerate: no enabled connections)")?;
        } else {
            writeln!(f, "q: {}", self.q)?;
        }
        let modules: Vec<String> = self
            .partition
            .modules()
            .iter()
            .map(|m| format!("{{{}}}", m.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")))
            .collect();
        writeln!(f, "modules ({}): {}", modules.len(), modules.join(" "))?;
        if let Some(eval) = &self.eval {
            writeln!(f, "mean reward over {} episodes: {}", eval.episodes.len(), eval.mean_reward)?;
            let act: Vec<String> = eval.mean_abs_actuation.iter().map(f64::to_string).collect();
            writeln!(f, "mean |actuation| per actuator: {}", act.join(", "))?;
        }
        Ok(())
    }
}

/// Writes one episode as CSV: `step, obs_0.., action_0.., reward`.
pub fn replay<W: Write>(genome: &Genome, spec: &EnvSpec, episode_seed: u64, out: W) -> Result<()> {
    let mut net = spec.build_network(genome)?;
    let mut w = csv::Writer::from_writer(out);
    let action_width = spec.actuator_count;
    let mut header = vec!["step".to_string()];
    header.extend((0..spec.obs_dim).map(|i| format!("obs_{i}")));
    header.extend((0..action_width).map(|i| format!("action_{i}")));
    header.push("reward".into());
    let io = |e: csv::Error| LabError::format("<replay>", e);
    w.write_record(&header).map_err(io)?;
    let mut failure = None;
    run_episode_observed(&mut net, spec, episode_seed, |rec| {
        if failure.is_some() {
            return;
        }
        let mut row = vec![rec.step.to_string()];
        row.extend(rec.observation.iter().map(f64::to_string));
        row.extend(rec.action.iter().map(f64::to_string));
        row.push(rec.reward.to_string());
        if let Err(e) = w.write_record(&row) {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(io(e));
    }
    w.flush().map_err(|e| LabError::io("<replay>", e))
}

pub const SUMMARY_HEADER: [&str; 5] = ["generation", "fitness_mean", "fitness_std", "q_mean", "q_std"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummarySeries {
    pub generation: Vec<f64>,
    pub fitness_mean: Vec<f64>,
    pub fitness_std: Vec<f64>,
    pub q_mean: Vec<f64>,
    pub q_std: Vec<f64>,
}

pub fn read_summary(path: &Path) -> Result<SummarySeries> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| LabError::format(path, e))?.clone();
    if headers.iter().ne(SUMMARY_HEADER) {
        return Err(LabError::format(
            path,
            format!("expected columns {}", SUMMARY_HEADER.join(",")),
        ));
    }
    let mut s = SummarySeries::default();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| LabError::format(path, e))?;
        let mut values = [0.0; 5];
        for (v, field) in values.iter_mut().zip(record.iter()) {
            *v = field
                .parse()
                .map_err(|_| LabError::format(path, format!("row {}: '{field}' is not a number", line + 2)))?;
        }
        let [g, fm, fs, qm, qs] = values;
        s.generation.push(g);
        s.fitness_mean.push(fm);
        s.fitness_std.push(fs);
        s.q_mean.push(qm);
        s.q_std.push(qs);
    }
    if s.generation.is_empty() {
        return Err(LabError::format(path, "no data rows"));
    }
    Ok(s)
}

/// Renders `fitness.svg` and `q.svg` from a summary CSV into `out_dir`.
pub fn render_plots(summary: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let s = read_summary(summary)?;
    fs::create_dir_all(out_dir).map_err(|e| LabError::io(out_dir, e))?;
    let charts = [
        ("fitness.svg", "best fitness (mean ± 1 std)", "fitness", &s.fitness_mean, &s.fitness_std),
        ("q.svg", "best-genome modularity (mean ± 1 std)", "Q", &s.q_mean, &s.q_std),
    ];
    let mut written = Vec::new();
    for (file, title, label, mean, std) in charts {
        let path = out_dir.join(file);
        fs::write(&path, svg::band_plot(title, label, &s.generation, mean, std))
            .map_err(|e| LabError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
