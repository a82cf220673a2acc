//! Executable networks compiled from genomes.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::neat::{Activation, Genome, GenomeError, NodeKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error(transparent)]
    Structure(#[from] GenomeError),
    #[error("expected {expected} inputs, got {got}")]
    InputArity { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
struct NodeEval {
    slot: usize,
    bias: f64,
    activation: Activation,
    incoming: Vec<(usize, f64)>,
}

/// Gathers slot indices (genome node order), input and output slots, and the
/// per-node incoming lists of every non-input node.
fn layout(genome: &Genome) -> (Vec<usize>, Vec<usize>, Vec<NodeEval>) {
    let slot: BTreeMap<u32, usize> = genome
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id, i))
        .collect();
    let mut evals: Vec<NodeEval> = genome
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| NodeEval {
            slot: i,
            bias: n.bias,
            activation: n.activation,
            incoming: Vec::new(),
        })
        .collect();
    for c in genome.enabled_connections() {
        evals[slot[&c.to]].incoming.push((slot[&c.from], c.weight));
    }
    let inputs = slot_of_kind(genome, NodeKind::Input);
    let outputs = slot_of_kind(genome, NodeKind::Output);
    let evals = evals
        .into_iter()
        .filter(|e| genome.nodes[e.slot].kind != NodeKind::Input)
        .collect();
    (inputs, outputs, evals)
}

fn slot_of_kind(genome: &Genome, kind: NodeKind) -> Vec<usize> {
    genome
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.kind == kind)
        .map(|(i, _)| i)
        .collect()
}

fn fire(node: &NodeEval, values: &[f64]) -> f64 {
    let sum = node
        .incoming
        .iter()
        .fold(node.bias, |acc, &(src, w)| acc + w * values[src]);
    node.activation.apply(sum)
}

fn check_arity(expected: usize, got: usize) -> Result<(), NetworkError> {
    if expected == got {
        Ok(())
    } else {
        Err(NetworkError::InputArity { expected, got })
    }
}

/// Stateless network evaluated in one topological pass.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardNet {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    /// Non-input nodes in dependency order.
    plan: Vec<NodeEval>,
    slots: usize,
}

impl FeedForwardNet {
    pub fn build(genome: &Genome) -> Result<Self, NetworkError> {
        if let Some((a, b)) = genome.find_cycle_edge() {
            return Err(GenomeError::Cycle(a, b).into());
        }
        let (inputs, outputs, evals) = layout(genome);
        let slots = genome.nodes.len();
        // Kahn's algorithm, lowest slot first among ready nodes.
        let mut ready = vec![false; slots];
        for &i in &inputs {
            ready[i] = true;
        }
        let mut pending = evals;
        let mut plan = Vec::with_capacity(pending.len());
        while !pending.is_empty() {
            let pos = pending
                .iter()
                .position(|e| e.incoming.iter().all(|&(src, _)| ready[src]))
                .expect("acyclic genome always has a ready node");
            let node = pending.remove(pos);
            ready[node.slot] = true;
            plan.push(node);
        }
        Ok(Self {
            inputs,
            outputs,
            plan,
            slots,
        })
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn activate(&self, inputs: &[f64]) -> Result<Vec<f64>, NetworkError> {
        check_arity(self.inputs.len(), inputs.len())?;
        let mut values = vec![0.0; self.slots];
        for (&slot, &x) in self.inputs.iter().zip(inputs) {
            values[slot] = x;
        }
        for node in &self.plan {
            values[node.slot] = fire(node, &values);
        }
        Ok(self.outputs.iter().map(|&o| values[o]).collect())
    }
}

/// Network with persistent per-node state, advanced one synchronous step per
/// activation: every non-input node reads the previous step's values, input
/// nodes hold the current inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentNet {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    nodes: Vec<NodeEval>,
    state: Vec<f64>,
    next: Vec<f64>,
}

impl RecurrentNet {
    pub fn build(genome: &Genome) -> Self {
        let (inputs, outputs, nodes) = layout(genome);
        let n = genome.nodes.len();
        Self {
            inputs,
            outputs,
            nodes,
            state: vec![0.0; n],
            next: vec![0.0; n],
        }
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|s| *s = 0.0);
        self.next.iter_mut().for_each(|s| *s = 0.0);
    }

    pub fn activate(&mut self, inputs: &[f64]) -> Result<Vec<f64>, NetworkError> {
        check_arity(self.inputs.len(), inputs.len())?;
        for (&slot, &x) in self.inputs.iter().zip(inputs) {
            self.state[slot] = x;
            self.next[slot] = x;
        }
        for node in &self.nodes {
            self.next[node.slot] = fire(node, &self.state);
        }
        core::mem::swap(&mut self.state, &mut self.next);
        Ok(self.outputs.iter().map(|&o| self.state[o]).collect())
    }
}

/// Either network kind behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Network {
    FeedForward(FeedForwardNet),
    Recurrent(RecurrentNet),
}

impl Network {
    pub fn build(genome: &Genome, recurrent: bool) -> Result<Self, NetworkError> {
        Ok(if recurrent {
            Network::Recurrent(RecurrentNet::build(genome))
        } else {
            Network::FeedForward(FeedForwardNet::build(genome)?)
        })
    }

    pub fn input_count(&self) -> usize {
        match self {
            Network::FeedForward(n) => n.input_count(),
            Network::Recurrent(n) => n.input_count(),
        }
    }

    pub fn output_count(&self) -> usize {
        match self {
            Network::FeedForward(n) => n.output_count(),
            Network::Recurrent(n) => n.output_count(),
        }
    }

    pub fn reset(&mut self) {
        if let Network::Recurrent(n) = self {
            n.reset();
        }
    }

    pub fn activate(&mut self, inputs: &[f64]) -> Result<Vec<f64>, NetworkError> {
        match self {
            Network::FeedForward(n) => n.activate(inputs),
            Network::Recurrent(n) => n.activate(inputs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neat::{ConnectionGene, NodeGene};

    fn conn(innovation: u32, from: u32, to: u32, weight: f64) -> ConnectionGene {
        ConnectionGene {
            innovation,
            from,
            to,
            weight,
            enabled: true,
        }
    }

    fn one_to_one(weight: f64, bias: f64) -> Genome {
        Genome::new(
            vec![
                NodeGene::new(0, NodeKind::Input, 0.0),
                NodeGene::new(1, NodeKind::Output, bias),
            ],
            vec![conn(0, 0, 1, weight)],
        )
    }

    #[test]
    fn single_connection() {
        let net = FeedForwardNet::build(&one_to_one(2.0, 0.0)).unwrap();
        let out = net.activate(&[0.5]).unwrap();
        assert!((out[0] - 0.761_594_155_955_764_9).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_give_tanh_bias() {
        let g = Genome::new(
            vec![
                NodeGene::new(0, NodeKind::Input, 0.0),
                NodeGene::new(1, NodeKind::Output, 0.3),
                NodeGene::new(2, NodeKind::Output, -0.7),
            ],
            vec![conn(0, 0, 1, 0.0), conn(1, 0, 2, 0.0)],
        );
        let net = FeedForwardNet::build(&g).unwrap();
        let out = net.activate(&[5.0]).unwrap();
        assert_eq!(out, vec![libm::tanh(0.3), libm::tanh(-0.7)]);
    }

    #[test]
    fn hidden_chain_in_any_gene_order() {
        // Hidden node 2 gets a higher id than output 1 but must run first.
        let g = Genome::new(
            vec![
                NodeGene::new(0, NodeKind::Input, 0.0),
                NodeGene::new(1, NodeKind::Output, 0.0),
                NodeGene::new(2, NodeKind::Hidden, 0.1),
            ],
            vec![conn(0, 2, 1, 1.5), conn(1, 0, 2, -0.5)],
        );
        let net = FeedForwardNet::build(&g).unwrap();
        let hidden = libm::tanh(0.1 - 0.5 * 0.8);
        assert_eq!(net.activate(&[0.8]).unwrap(), vec![libm::tanh(1.5 * hidden)]);
    }

    #[test]
    fn cycle_is_rejected() {
        let g = Genome::new(
            vec![
                NodeGene::new(0, NodeKind::Input, 0.0),
                NodeGene::new(1, NodeKind::Output, 0.0),
            ],
            vec![conn(0, 0, 1, 1.0), conn(1, 1, 1, 1.0)],
        );
        assert_eq!(
            FeedForwardNet::build(&g),
            Err(NetworkError::Structure(GenomeError::Cycle(1, 1)))
        );
    }

    #[test]
    fn arity_is_checked() {
        let net = FeedForwardNet::build(&one_to_one(1.0, 0.0)).unwrap();
        assert_eq!(
            net.activate(&[1.0, 2.0]),
            Err(NetworkError::InputArity { expected: 1, got: 2 })
        );
    }

    #[test]
    fn recurrent_self_loop_unrolls() {
        let mut g = one_to_one(1.0, 0.0);
        g.connections.push(conn(1, 1, 1, 1.0));
        let mut net = RecurrentNet::build(&g);
        // With zero input the zero initial state stays at tanh(0).
        assert_eq!(net.activate(&[0.0]).unwrap(), vec![0.0]);
        net.reset();
        let s = net.activate(&[libm::atanh(0.5)]).unwrap()[0];
        assert!((s - 0.5).abs() < 1e-12);
        let out = net.activate(&[0.0]).unwrap()[0];
        assert!((out - 0.462_117_157_260_009_8).abs() < 1e-12);
    }

    #[test]
    fn recurrent_reset_replays_bitwise() {
        let mut g = one_to_one(0.9, 0.2);
        g.connections.push(conn(1, 1, 1, -0.4));
        let mut net = RecurrentNet::build(&g);
        let seq = [0.3, -1.0, 0.7, 0.0];
        let first: Vec<Vec<f64>> = seq.iter().map(|&x| net.activate(&[x]).unwrap()).collect();
        net.reset();
        let second: Vec<Vec<f64>> = seq.iter().map(|&x| net.activate(&[x]).unwrap()).collect();
        assert_eq!(first, second);
    }
}
