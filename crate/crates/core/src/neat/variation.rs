use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use super::genome::chance;
use super::{CompatibilityCoefficients, ConnectionGene, Genome, NeatError, NodeGene, NodeKind};

/// Probability that a gene disabled in either parent stays disabled.
const DEFAULT_DISABLED_GENE_RATE: f64 = 0.75;

/// Aligns the connection genes of two genomes by innovation number.
enum Aligned<'a> {
    Matching(&'a ConnectionGene, &'a ConnectionGene),
    OnlyA(&'a ConnectionGene),
    OnlyB(&'a ConnectionGene),
}

fn align<'a>(a: &'a Genome, b: &'a Genome) -> Vec<Aligned<'a>> {
    let (mut i, mut j) = (0, 0);
    let (ca, cb) = (&a.connections, &b.connections);
    let mut out = Vec::with_capacity(ca.len().max(cb.len()));
    while i < ca.len() || j < cb.len() {
        let order = match (ca.get(i), cb.get(j)) {
            (Some(x), Some(y)) => x.innovation.cmp(&y.innovation),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match order {
            Ordering::Equal => {
                out.push(Aligned::Matching(&ca[i], &cb[j]));
                i += 1;
                j += 1;
            }
            Ordering::Less => {
                out.push(Aligned::OnlyA(&ca[i]));
                i += 1;
            }
            Ordering::Greater => {
                out.push(Aligned::OnlyB(&cb[j]));
                j += 1;
            }
        }
    }
    out
}

/// `δ = (c1·E + c2·D)/N + c3·W̄` over connection genes. `N` is the larger gene
/// count, or 1 when both genomes have fewer than 20 genes.
pub fn compatibility_distance(a: &Genome, b: &Genome, coeffs: &CompatibilityCoefficients) -> f64 {
    let max_a = a.connections.last().map(|c| c.innovation);
    let max_b = b.connections.last().map(|c| c.innovation);
    let (mut excess, mut disjoint, mut matching) = (0usize, 0usize, 0usize);
    let mut weight_diff = 0.0;
    for gene in align(a, b) {
        match gene {
            Aligned::Matching(x, y) => {
                matching += 1;
                weight_diff += libm::fabs(x.weight - y.weight);
            }
            Aligned::OnlyA(x) => {
                if max_b.is_none_or(|m| x.innovation > m) {
                    excess += 1;
                } else {
                    disjoint += 1;
                }
            }
            Aligned::OnlyB(y) => {
                if max_a.is_none_or(|m| y.innovation > m) {
                    excess += 1;
                } else {
                    disjoint += 1;
                }
            }
        }
    }
    let longest = a.connections.len().max(b.connections.len());
    let n = if a.connections.len() < 20 && b.connections.len() < 20 {
        1.0
    } else {
        longest as f64
    };
    let mean_weight_diff = if matching > 0 {
        weight_diff / matching as f64
    } else {
        0.0
    };
    (coeffs.excess * excess as f64 + coeffs.disjoint * disjoint as f64) / n
        + coeffs.weight * mean_weight_diff
}

/// Historical-marking crossover with the conventional 75% disabled-gene rule.
///
/// Matching genes take their weight from a random parent. Disjoint and excess
/// genes come from the fitter parent; with equal fitness each such gene is
/// inherited with probability ½. Feedforward callers should follow up with
/// [`Genome::break_cycles`], since mixing parents can close a cycle.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<Genome, NeatError> {
    crossover_with_rate(a, b, DEFAULT_DISABLED_GENE_RATE, rng)
}

pub(crate) fn crossover_with_rate<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    disabled_gene_rate: f64,
    rng: &mut R,
) -> Result<Genome, NeatError> {
    let fa = a.fitness.ok_or(NeatError::UnsetFitness(0))?;
    let fb = b.fitness.ok_or(NeatError::UnsetFitness(1))?;
    // Some(true): a is fitter; Some(false): b is fitter; None: tie.
    let a_fitter = match fa.partial_cmp(&fb) {
        Some(Ordering::Greater) => Some(true),
        Some(Ordering::Less) => Some(false),
        _ => None,
    };

    let inherit = |gene: &ConnectionGene, disabled_somewhere: bool, rng: &mut R| {
        let mut g = gene.clone();
        g.enabled = !(disabled_somewhere && chance(rng, disabled_gene_rate));
        g
    };

    let mut connections = Vec::new();
    for gene in align(a, b) {
        match gene {
            Aligned::Matching(x, y) => {
                let src = if rng.gen_bool(0.5) { x } else { y };
                let disabled = !x.enabled || !y.enabled;
                connections.push(inherit(src, disabled, rng));
            }
            Aligned::OnlyA(x) => {
                let take = match a_fitter {
                    Some(a_wins) => a_wins,
                    None => rng.gen_bool(0.5),
                };
                if take {
                    connections.push(inherit(x, !x.enabled, rng));
                }
            }
            Aligned::OnlyB(y) => {
                let take = match a_fitter {
                    Some(a_wins) => !a_wins,
                    None => rng.gen_bool(0.5),
                };
                if take {
                    connections.push(inherit(y, !y.enabled, rng));
                }
            }
        }
    }

    // Inputs, outputs, every endpoint of an inherited gene, and the fitter
    // parent's hidden nodes.
    let mut ids: Vec<u32> = a
        .nodes
        .iter()
        .chain(&b.nodes)
        .filter(|n| n.kind != NodeKind::Hidden)
        .map(|n| n.id)
        .chain(connections.iter().flat_map(|c| [c.from, c.to]))
        .collect();
    match a_fitter {
        Some(true) => ids.extend(a.nodes.iter().map(|n| n.id)),
        Some(false) => ids.extend(b.nodes.iter().map(|n| n.id)),
        None => {}
    }
    ids.sort_unstable();
    ids.dedup();
    let nodes: Vec<NodeGene> = ids
        .into_iter()
        .map(|id| match (a.node(id), b.node(id)) {
            (Some(x), Some(y)) => {
                if rng.gen_bool(0.5) {
                    x.clone()
                } else {
                    y.clone()
                }
            }
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!("node ids come from the parents"),
        })
        .collect();

    Ok(Genome::new(nodes, connections))
}
