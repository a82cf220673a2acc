//! Genome JSON documents and plain-text graph dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use modneat::modularity::UndirectedGraph;
use modneat::neat::{ConnectionGene, Genome, NodeGene, NodeKind};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDoc {
    Input,
    Hidden,
    Output,
}

impl From<NodeKind> for KindDoc {
    fn from(kind: NodeKind) -> Self {
        match kind {
            NodeKind::Input => KindDoc::Input,
            NodeKind::Hidden => KindDoc::Hidden,
            NodeKind::Output => KindDoc::Output,
        }
    }
}

impl From<KindDoc> for NodeKind {
    fn from(kind: KindDoc) -> Self {
        match kind {
            KindDoc::Input => NodeKind::Input,
            KindDoc::Hidden => NodeKind::Hidden,
            KindDoc::Output => NodeKind::Output,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: u32,
    pub kind: KindDoc,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionDoc {
    pub innovation: u32,
    pub from: u32,
    pub to: u32,
    pub weight: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    pub env: Option<String>,
    pub generation: Option<usize>,
    pub fitness: Option<f64>,
    pub q_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeDocument {
    pub nodes: Vec<NodeDoc>,
    pub connections: Vec<ConnectionDoc>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl GenomeDocument {
    pub fn from_genome(genome: &Genome, metadata: Metadata) -> Self {
        Self {
            nodes: genome
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id,
                    kind: n.kind.into(),
                    bias: n.bias,
                })
                .collect(),
            connections: genome
                .connections
                .iter()
                .map(|c| ConnectionDoc {
                    innovation: c.innovation,
                    from: c.from,
                    to: c.to,
                    weight: c.weight,
                    enabled: c.enabled,
                })
                .collect(),
            metadata,
        }
    }

    /// Rebuilds the genome, rejecting dangling or duplicate genes.
    pub fn to_genome(&self) -> Result<Genome> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeGene::new(n.id, n.kind.into(), n.bias))
            .collect();
        let connections = self
            .connections
            .iter()
            .map(|c| ConnectionGene {
                innovation: c.innovation,
                from: c.from,
                to: c.to,
                weight: c.weight,
                enabled: c.enabled,
            })
            .collect();
        let mut genome = Genome::new(nodes, connections);
        genome.validate(false)?;
        genome.fitness = self.metadata.fitness;
        Ok(genome)
    }
}

pub fn write_genome(path: &Path, genome: &Genome, metadata: Metadata) -> Result<()> {
    let doc = GenomeDocument::from_genome(genome, metadata);
    let mut text = serde_json::to_string_pretty(&doc).expect("genome documents always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

pub fn read_genome(path: &Path) -> Result<(Genome, Metadata)> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let doc: GenomeDocument = serde_json::from_str(&text).map_err(|e| LabError::format(path, e))?;
    let genome = doc.to_genome().map_err(|e| LabError::format(path, e))?;
    Ok((genome, doc.metadata))
}

/// Node count on the first line, then one `i j` edge per line.
pub fn graph_dump(graph: &UndirectedGraph) -> String {
    let mut out = format!("{}\n", graph.node_count());
    for (a, b) in graph.edges() {
        writeln!(out, "{a} {b}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Genome {
        Genome::new(
            vec![
                NodeGene::new(0, NodeKind::Input, 0.0),
                NodeGene::new(1, NodeKind::Output, -0.25),
                NodeGene::new(2, NodeKind::Hidden, 0.1),
            ],
            vec![
                ConnectionGene {
                    innovation: 0,
                    from: 0,
                    to: 1,
                    weight: 0.3,
                    enabled: false,
                },
                ConnectionGene {
                    innovation: 1,
                    from: 0,
                    to: 2,
                    weight: 1.0 / 3.0,
                    enabled: true,
                },
                ConnectionGene {
                    innovation: 2,
                    from: 2,
                    to: 1,
                    weight: -2.5,
                    enabled: true,
                },
            ],
        )
    }

    #[test]
    fn round_trip_is_exact() {
        let meta = Metadata {
            env: Some("acrobot".into()),
            generation: Some(4),
            fitness: Some(-123.456),
            q_score: Some(0.125),
        };
        let doc = GenomeDocument::from_genome(&sample(), meta.clone());
        let text = serde_json::to_string(&doc).unwrap();
        let back: GenomeDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        let g = back.to_genome().unwrap();
        assert_eq!(g.nodes, sample().nodes);
        assert_eq!(g.connections, sample().connections);
    }

    #[test]
    fn field_names() {
        let doc = GenomeDocument::from_genome(&sample(), Metadata::default());
        let v: serde_json::Value = serde_json::to_value(&doc).unwrap();
        assert_eq!(v["nodes"][1]["kind"], "output");
        let conn = v["connections"][0].as_object().unwrap();
        let keys: Vec<&str> = conn.keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 5);
        for k in ["innovation", "from", "to", "weight", "enabled"] {
            assert!(keys.contains(&k));
        }
        let meta = v["metadata"].as_object().unwrap();
        for k in ["env", "generation", "fitness", "q_score"] {
            assert!(meta.contains_key(k));
        }
    }

    #[test]
    fn dangling_connection_is_rejected() {
        let mut doc = GenomeDocument::from_genome(&sample(), Metadata::default());
        doc.connections[0].to = 99;
        assert!(doc.to_genome().is_err());
    }

    #[test]
    fn dump_format() {
        let g = UndirectedGraph::new(3, [(2, 0), (1, 2)]).unwrap();
        assert_eq!(graph_dump(&g), "3\n0 2\n1 2\n");
    }
}
