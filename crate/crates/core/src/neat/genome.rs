use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{InnovationRegistry, NeatConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Input,
    Hidden,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeGene {
    pub id: u32,
    pub kind: NodeKind,
    /// Always 0 for input nodes.
    pub bias: f64,
    pub activation: Activation,
}

impl NodeGene {
    pub fn new(id: u32, kind: NodeKind, bias: f64) -> Self {
        Self {
            id,
            kind,
            bias: if kind == NodeKind::Input { 0.0 } else { bias },
            activation: Activation::Tanh,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionGene {
    pub innovation: u32,
    pub from: u32,
    pub to: u32,
    pub weight: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenomeError {
    #[error("connection {innovation} references missing node {node}")]
    MissingNode { innovation: u32, node: u32 },
    #[error("duplicate connection ({0} -> {1})")]
    DuplicateConnection(u32, u32),
    #[error("duplicate innovation number {0}")]
    DuplicateInnovation(u32),
    #[error("duplicate node id {0}")]
    DuplicateNode(u32),
    #[error("connection ({0} -> {1}) enters an input node")]
    IntoInput(u32, u32),
    #[error("input node {0} carries a bias")]
    InputBias(u32),
    #[error("enabled connections contain a cycle through ({0} -> {1})")]
    Cycle(u32, u32),
}

/// NEAT genotype. Nodes are kept sorted by id and connections by innovation.
///
/// `fitness` is the selection score; `reward` is the unshaped task reward it
/// was derived from. Both are cleared whenever the genome changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub nodes: Vec<NodeGene>,
    pub connections: Vec<ConnectionGene>,
    pub fitness: Option<f64>,
    pub reward: Option<f64>,
}

impl Genome {
    pub fn new(mut nodes: Vec<NodeGene>, mut connections: Vec<ConnectionGene>) -> Self {
        nodes.sort_by_key(|n| n.id);
        connections.sort_by_key(|c| c.innovation);
        Self {
            nodes,
            connections,
            fitness: None,
            reward: None,
        }
    }

    /// Every input wired to every output, weights uniform in `±weight_init_range`.
    pub fn fully_connected<R: Rng + ?Sized>(
        config: &NeatConfig,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> Self {
        let (ni, no) = (config.inputs as u32, config.outputs as u32);
        let nodes = (0..ni)
            .map(|id| NodeGene::new(id, NodeKind::Input, 0.0))
            .chain((ni..ni + no).map(|id| NodeGene::new(id, NodeKind::Output, 0.0)))
            .collect();
        let mut connections = Vec::with_capacity((ni * no) as usize);
        for from in 0..ni {
            for to in ni..ni + no {
                connections.push(ConnectionGene {
                    innovation: registry.connection(from, to),
                    from,
                    to,
                    weight: uniform(rng, config.weight_init_range),
                    enabled: true,
                });
            }
        }
        Self::new(nodes, connections)
    }

    pub fn node(&self, id: u32) -> Option<&NodeGene> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn input_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Input)
            .map(|n| n.id)
    }

    pub fn output_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Output)
            .map(|n| n.id)
    }

    pub fn enabled_connections(&self) -> impl Iterator<Item = &ConnectionGene> {
        self.connections.iter().filter(|c| c.enabled)
    }

    pub fn enabled_count(&self) -> usize {
        self.enabled_connections().count()
    }

    pub fn innovations(&self) -> BTreeSet<u32> {
        self.connections.iter().map(|c| c.innovation).collect()
    }

    fn invalidate(&mut self) {
        self.fitness = None;
        self.reward = None;
    }

    /// Checks referential integrity, uniqueness, and acyclicity when `feed_forward`.
    pub fn validate(&self, feed_forward: bool) -> Result<(), GenomeError> {
        for w in self.nodes.windows(2) {
            if w[0].id == w[1].id {
                return Err(GenomeError::DuplicateNode(w[0].id));
            }
        }
        for n in &self.nodes {
            if n.kind == NodeKind::Input && n.bias != 0.0 {
                return Err(GenomeError::InputBias(n.id));
            }
        }
        let mut pairs = BTreeSet::new();
        let mut innovations = BTreeSet::new();
        for c in &self.connections {
            for node in [c.from, c.to] {
                if self.node(node).is_none() {
                    return Err(GenomeError::MissingNode {
                        innovation: c.innovation,
                        node,
                    });
                }
            }
            if self.node(c.to).map(|n| n.kind) == Some(NodeKind::Input) {
                return Err(GenomeError::IntoInput(c.from, c.to));
            }
            if !pairs.insert((c.from, c.to)) {
                return Err(GenomeError::DuplicateConnection(c.from, c.to));
            }
            if !innovations.insert(c.innovation) {
                return Err(GenomeError::DuplicateInnovation(c.innovation));
            }
        }
        if feed_forward {
            if let Some((a, b)) = self.find_cycle_edge() {
                return Err(GenomeError::Cycle(a, b));
            }
        }
        Ok(())
    }

    /// Some enabled edge lying on a directed cycle, if one exists.
    pub fn find_cycle_edge(&self) -> Option<(u32, u32)> {
        let index = |id: u32| self.nodes.binary_search_by_key(&id, |n| n.id).ok();
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for c in self.enabled_connections() {
            let (a, b) = (index(c.from)?, index(c.to)?);
            out[a].push(b);
            indeg[b] += 1;
            edges.push((a, b));
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut removed = vec![false; n];
        while let Some(v) = stack.pop() {
            removed[v] = true;
            for &w in &out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        // Nodes left over all sit on, or downstream of, a cycle; an edge whose
        // source is left over and whose target can reach that source is on one.
        edges
            .iter()
            .filter(|&&(a, b)| !removed[a] && !removed[b])
            .find(|&&(a, b)| a == b || reaches(&out, b, a))
            .map(|&(a, b)| (self.nodes[a].id, self.nodes[b].id))
    }

    /// True when adding enabled edge `from -> to` would close a directed cycle.
    pub fn creates_cycle(&self, from: u32, to: u32) -> bool {
        if from == to {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![to];
        while let Some(v) = stack.pop() {
            if v == from {
                return true;
            }
            if seen.insert(v) {
                stack.extend(self.enabled_connections().filter(|c| c.from == v).map(|c| c.to));
            }
        }
        false
    }

    /// Disables, in innovation order, any enabled connection that closes a
    /// cycle among the previously kept ones.
    pub fn break_cycles(&mut self) -> bool {
        let mut changed = false;
        let enabled: Vec<usize> = (0..self.connections.len())
            .filter(|&i| self.connections[i].enabled)
            .collect();
        for &i in &enabled {
            self.connections[i].enabled = false;
        }
        for i in enabled {
            let (from, to) = (self.connections[i].from, self.connections[i].to);
            if self.creates_cycle(from, to) {
                changed = true;
            } else {
                self.connections[i].enabled = true;
            }
        }
        if changed {
            self.invalidate();
        }
        changed
    }

    /// Applies weight, bias and structural mutations with the configured
    /// probabilities. Failed structural proposals are skipped. Fitness is
    /// cleared only if something changed.
    pub fn mutate<R: Rng + ?Sized>(
        &mut self,
        config: &NeatConfig,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) {
        let mut changed = false;
        if chance(rng, config.add_node_rate) {
            changed |= self.mutate_add_node(registry, rng);
        }
        if chance(rng, config.add_connection_rate) {
            changed |= self.mutate_add_connection(config, registry, rng);
        }
        if chance(rng, config.toggle_enable_rate) {
            changed |= self.mutate_toggle_enable(config.feed_forward, rng);
        }
        if config.weight_mutate_rate > 0.0 {
            for c in self.connections.iter_mut() {
                if chance(rng, config.weight_mutate_rate) {
                    c.weight = if chance(rng, config.weight_replace_rate) {
                        uniform(rng, config.weight_init_range)
                    } else {
                        (c.weight + uniform(rng, config.weight_perturb_power))
                            .clamp(-config.weight_limit, config.weight_limit)
                    };
                    changed = true;
                }
            }
        }
        if config.bias_mutate_rate > 0.0 {
            for n in self.nodes.iter_mut().filter(|n| n.kind != NodeKind::Input) {
                if chance(rng, config.bias_mutate_rate) {
                    n.bias = (n.bias + uniform(rng, config.bias_perturb_power))
                        .clamp(-config.weight_limit, config.weight_limit);
                    changed = true;
                }
            }
        }
        if changed {
            self.invalidate();
        }
    }

    /// Splits a random enabled connection `a -> b (w)` into `a -> new (1.0)`
    /// and `new -> b (w)`, disabling the original.
    pub fn mutate_add_node<R: Rng + ?Sized>(
        &mut self,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> bool {
        let enabled: Vec<usize> = (0..self.connections.len())
            .filter(|&i| self.connections[i].enabled)
            .collect();
        if enabled.is_empty() {
            return false;
        }
        let i = enabled[rng.gen_range(0..enabled.len())];
        let old = self.connections[i].clone();
        let new_id = registry.split_node(old.innovation);
        if self.node(new_id).is_some() {
            return false;
        }
        self.connections[i].enabled = false;
        let into = ConnectionGene {
            innovation: registry.connection(old.from, new_id),
            from: old.from,
            to: new_id,
            weight: 1.0,
            enabled: true,
        };
        let out = ConnectionGene {
            innovation: registry.connection(new_id, old.to),
            from: new_id,
            to: old.to,
            weight: old.weight,
            enabled: true,
        };
        self.insert_node(NodeGene::new(new_id, NodeKind::Hidden, 0.0));
        self.insert_connection(into);
        self.insert_connection(out);
        true
    }

    /// Adds a connection chosen uniformly among all absent, valid pairs.
    pub fn mutate_add_connection<R: Rng + ?Sized>(
        &mut self,
        config: &NeatConfig,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> bool {
        let existing: BTreeSet<(u32, u32)> =
            self.connections.iter().map(|c| (c.from, c.to)).collect();
        let mut candidates = Vec::new();
        for target in self.nodes.iter().filter(|n| n.kind != NodeKind::Input) {
            // In feedforward mode a source must not be reachable from the target.
            let downstream = if config.feed_forward {
                self.descendants(target.id)
            } else {
                BTreeSet::new()
            };
            for source in &self.nodes {
                let pair = (source.id, target.id);
                if existing.contains(&pair) || downstream.contains(&source.id) {
                    continue;
                }
                if config.feed_forward && source.id == target.id {
                    continue;
                }
                candidates.push(pair);
            }
        }
        if candidates.is_empty() {
            return false;
        }
        let (from, to) = candidates[rng.gen_range(0..candidates.len())];
        let gene = ConnectionGene {
            innovation: registry.connection(from, to),
            from,
            to,
            weight: uniform(rng, config.weight_init_range),
            enabled: true,
        };
        self.insert_connection(gene);
        true
    }

    /// Flips a random connection; re-enabling is refused if it would close a
    /// cycle in feedforward mode.
    pub fn mutate_toggle_enable<R: Rng + ?Sized>(&mut self, feed_forward: bool, rng: &mut R) -> bool {
        if self.connections.is_empty() {
            return false;
        }
        let i = rng.gen_range(0..self.connections.len());
        let c = &self.connections[i];
        if !c.enabled && feed_forward && self.creates_cycle(c.from, c.to) {
            return false;
        }
        self.connections[i].enabled = !self.connections[i].enabled;
        true
    }

    /// Nodes reachable from `start` over enabled connections, `start` included.
    fn descendants(&self, start: u32) -> BTreeSet<u32> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(self.enabled_connections().filter(|c| c.from == v).map(|c| c.to));
            }
        }
        seen
    }

    fn insert_node(&mut self, node: NodeGene) {
        let at = self.nodes.partition_point(|n| n.id < node.id);
        self.nodes.insert(at, node);
    }

    fn insert_connection(&mut self, gene: ConnectionGene) {
        let at = self
            .connections
            .partition_point(|c| c.innovation < gene.innovation);
        self.connections.insert(at, gene);
    }
}

fn reaches(out: &[Vec<usize>], from: usize, target: usize) -> bool {
    let mut seen = vec![false; out.len()];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        if v == target {
            return true;
        }
        if !core::mem::replace(&mut seen[v], true) {
            stack.extend_from_slice(&out[v]);
        }
    }
    false
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.gen_range(-half_width..=half_width)
    } else {
        0.0
    }
}

/// Bernoulli draw that consumes no randomness for rates 0 and 1.
pub(crate) fn chance<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.gen_bool(p)
    }
}
