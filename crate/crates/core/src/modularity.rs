//! Newman–Girvan modularity on simple undirected graphs.
//!
//! Scores are computed from integer edge and degree counts so that the
//! numerator `4L·Σl_s − Σd_s²` is exact and the only rounding happens in the
//! final division by `4L²`. Merge gains in the greedy maximizer are compared
//! on the same integer scale, which makes ties (and thus the tie-break rule)
//! exact.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::neat::Genome;

/// Largest graph accepted by [`brute_force_max_q`]; Bell(12) ≈ 4.2 million partitions.
pub const BRUTE_FORCE_NODE_LIMIT: usize = 12;

/// Dendrogram stages refined by [`approx_max_q`].
const POLISHED_STAGES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModularityError {
    #[error("modularity is undefined for a graph without edges")]
    UndefinedModularity,
    #[error("edge ({0}, {1}) is invalid for a graph with {2} nodes")]
    InvalidEdge(usize, usize, usize),
    #[error("partition covers {got} nodes but the graph has {expected}")]
    PartitionSize { expected: usize, got: usize },
    #[error("partition module indices are not contiguous from 0")]
    NonContiguousModules,
    #[error("brute-force search supports at most {limit} nodes, got {got}")]
    TooLarge { limit: usize, got: usize },
}

/// Simple undirected graph. Edges are stored as `(lo, hi)` with `lo < hi`,
/// sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

impl UndirectedGraph {
    /// Builds a graph, rejecting self-loops and out-of-range endpoints.
    /// Duplicate and reversed pairs collapse to one edge.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ModularityError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b || a >= node_count || b >= node_count {
                return Err(ModularityError::InvalidEdge(a, b, node_count));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self {
            node_count,
            edges: set.into_iter().collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.node_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Returns the same graph with node `i` renamed to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, ModularityError> {
        Self::new(
            self.node_count,
            self.edges.iter().map(|&(a, b)| (perm[a], perm[b])),
        )
    }
}

/// Assignment of every node to a module `0..K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    assignment: Vec<usize>,
}

impl Partition {
    /// Accepts an assignment whose module indices are exactly `0..K`, each used.
    pub fn new(assignment: Vec<usize>) -> Result<Self, ModularityError> {
        let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut used = vec![false; k];
        for &m in &assignment {
            used[m] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(ModularityError::NonContiguousModules);
        }
        Ok(Self { assignment })
    }

    /// Relabels arbitrary module labels to `0..K` in order of first appearance.
    pub fn canonical(labels: &[usize]) -> Self {
        let mut map: Vec<(usize, usize)> = Vec::new();
        let assignment = labels
            .iter()
            .map(|l| match map.iter().find(|(from, _)| from == l) {
                Some(&(_, to)) => to,
                None => {
                    let to = map.len();
                    map.push((*l, to));
                    to
                }
            })
            .collect();
        Self { assignment }
    }

    pub fn single_module(node_count: usize) -> Self {
        Self {
            assignment: vec![0; node_count],
        }
    }

    pub fn singletons(node_count: usize) -> Self {
        Self {
            assignment: (0..node_count).collect(),
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn module_count(&self) -> usize {
        self.assignment.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Node lists per module, in module order.
    pub fn modules(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.module_count()];
        for (node, &m) in self.assignment.iter().enumerate() {
            out[m].push(node);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModularityResult {
    pub partition: Partition,
    pub q: f64,
}

/// Extracts the simple undirected graph of a genome: one vertex per node gene
/// (in gene order), one edge per enabled connection, self-loops dropped.
pub fn genome_to_graph(genome: &Genome) -> UndirectedGraph {
    let index_of = |id: u32| genome.nodes.iter().position(|n| n.id == id);
    let edges = genome
        .connections
        .iter()
        .filter(|c| c.enabled && c.from != c.to)
        .filter_map(|c| Some((index_of(c.from)?, index_of(c.to)?)));
    UndirectedGraph::new(genome.nodes.len(), edges)
        .expect("genome connections reference existing nodes")
}

fn q_numerator(graph: &UndirectedGraph, partition: &Partition) -> i128 {
    let assignment = partition.assignment();
    let k = partition.module_count();
    let mut inner = vec![0i128; k];
    let mut degree = vec![0i128; k];
    for &(a, b) in graph.edges() {
        let (ma, mb) = (assignment[a], assignment[b]);
        if ma == mb {
            inner[ma] += 1;
        }
        degree[ma] += 1;
        degree[mb] += 1;
    }
    let l = graph.edge_count() as i128;
    let within: i128 = inner.iter().sum();
    4 * l * within - degree.iter().map(|d| d * d).sum::<i128>()
}

fn q_from_numerator(num: i128, edge_count: usize) -> f64 {
    let l = edge_count as f64;
    num as f64 / (4.0 * l * l)
}

fn check(graph: &UndirectedGraph, partition: &Partition) -> Result<(), ModularityError> {
    if graph.edge_count() == 0 {
        return Err(ModularityError::UndefinedModularity);
    }
    if partition.len() != graph.node_count() {
        return Err(ModularityError::PartitionSize {
            expected: graph.node_count(),
            got: partition.len(),
        });
    }
    Ok(())
}

/// `Q = Σ_s [ l_s/L − (d_s/2L)² ]`.
pub fn q_score(graph: &UndirectedGraph, partition: &Partition) -> Result<f64, ModularityError> {
    check(graph, partition)?;
    Ok(q_from_numerator(
        q_numerator(graph, partition),
        graph.edge_count(),
    ))
}

/// Greedy agglomerative maximization with local refinement.
///
/// Starts from singletons and repeatedly merges the module pair with the
/// largest gain until one module remains. Gain ties go to the lowest `(i, j)`
/// pair of surviving module labels (a module keeps the smaller label of the
/// two it merges). The best-scoring stages of that merge sequence are then
/// refined by single-node moves, positive merges and Kernighan–Lin passes;
/// the best refined partition wins, fewer modules on equal score.
pub fn approx_max_q(graph: &UndirectedGraph) -> Result<ModularityResult, ModularityError> {
    if graph.edge_count() == 0 {
        return Err(ModularityError::UndefinedModularity);
    }
    let n = graph.node_count();
    let l = graph.edge_count() as i128;

    // between[i][j]: edges joining modules i and j (i != j); inner[i]: edges inside i.
    let mut between = vec![vec![0i128; n]; n];
    let mut inner = vec![0i128; n];
    let mut degree: Vec<i128> = graph.degrees().into_iter().map(i128::from).collect();
    for &(a, b) in graph.edges() {
        between[a][b] += 1;
        between[b][a] += 1;
    }
    let mut label: Vec<usize> = (0..n).collect();
    let mut alive: Vec<usize> = (0..n).collect();

    let mut current = -degree.iter().map(|d| d * d).sum::<i128>();
    let mut stages: Vec<(i128, Vec<usize>)> = vec![(current, label.clone())];

    while alive.len() > 1 {
        let mut pick: Option<(i128, usize, usize)> = None;
        for (x, &i) in alive.iter().enumerate() {
            for &j in &alive[x + 1..] {
                let gain = 4 * l * between[i][j] - 2 * degree[i] * degree[j];
                if pick.is_none_or(|(g, _, _)| gain > g) {
                    pick = Some((gain, i, j));
                }
            }
        }
        let (gain, i, j) = pick.expect("at least two modules alive");
        current += gain;
        inner[i] += inner[j] + between[i][j];
        degree[i] += degree[j];
        for &m in &alive {
            if m != i && m != j {
                let joined = between[j][m];
                between[i][m] += joined;
                between[m][i] += joined;
            }
        }
        for lab in label.iter_mut() {
            if *lab == j {
                *lab = i;
            }
        }
        alive.retain(|&m| m != j);
        stages.push((current, label.clone()));
    }

    // Polish the highest-scoring stages, later stages first on equal score.
    let mut order: Vec<usize> = (0..stages.len()).collect();
    order.sort_by(|&x, &y| stages[y].0.cmp(&stages[x].0).then(y.cmp(&x)));
    let mut best: Option<(i128, usize, Vec<usize>)> = None;
    for &s in order.iter().take(POLISHED_STAGES) {
        let (score, labels) = &stages[s];
        let mut polished = labels.clone();
        let score = score + polish(graph, &mut polished);
        let k = polished.iter().collect::<BTreeSet<_>>().len();
        if best.as_ref().is_none_or(|(b, bk, _)| score > *b || (score == *b && k < *bk)) {
            best = Some((score, k, polished));
        }
    }
    let (best, _, best_labels) = best.expect("at least the singleton stage exists");
    let partition = Partition::canonical(&best_labels);
    debug_assert_eq!(q_numerator(graph, &partition), best);
    Ok(ModularityResult {
        q: q_from_numerator(best, graph.edge_count()),
        partition,
    })
}

/// One Kernighan–Lin pass: every node is moved exactly once to its best
/// destination (negative gains allowed, lowest `(node, target)` on ties),
/// then the sequence is rolled back to its best strictly improving prefix.
/// Returns that prefix's gain, 0 if none improves.
fn kernighan_lin(graph: &UndirectedGraph, labels: &mut [usize]) -> i128 {
    let n = graph.node_count();
    let l = graph.edge_count() as i128;
    let k: Vec<i128> = graph.degrees().into_iter().map(i128::from).collect();
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in graph.edges() {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut work = labels.to_vec();
    let mut module_degree = vec![0i128; n];
    let mut size = vec![0usize; n];
    for v in 0..n {
        module_degree[work[v]] += k[v];
        size[work[v]] += 1;
    }
    let mut locked = vec![false; n];
    let mut links = vec![0i128; n];
    let (mut running, mut best_gain, mut best_work) = (0i128, 0i128, None);
    for _ in 0..n {
        let mut pick: Option<(i128, usize, usize)> = None;
        for v in (0..n).filter(|&v| !locked[v]) {
            links.iter_mut().for_each(|x| *x = 0);
            for &u in &adjacency[v] {
                links[work[u]] += 1;
            }
            let from = work[v];
            let empty = (0..n).find(|&m| size[m] == 0);
            for to in 0..n {
                if to == from || (size[to] == 0 && Some(to) != empty) || (size[from] == 1 && size[to] == 0) {
                    continue;
                }
                let gain =
                    4 * l * (links[to] - links[from]) - 2 * k[v] * (module_degree[to] - module_degree[from] + k[v]);
                if pick.is_none_or(|(g, _, _)| gain > g) {
                    pick = Some((gain, v, to));
                }
            }
        }
        let Some((gain, v, to)) = pick else {
            break;
        };
        let from = work[v];
        module_degree[from] -= k[v];
        size[from] -= 1;
        module_degree[to] += k[v];
        size[to] += 1;
        work[v] = to;
        locked[v] = true;
        running += gain;
        if running > best_gain {
            best_gain = running;
            best_work = Some(work.clone());
        }
    }
    if let Some(w) = best_work {
        labels.copy_from_slice(&w);
    }
    best_gain
}

/// Alternates vertex moves and positive merges until neither improves.
fn polish(graph: &UndirectedGraph, labels: &mut [usize]) -> i128 {
    let mut total = 0;
    loop {
        let moved = refine(graph, labels);
        let merged = merge_positive(graph, labels);
        let swapped = kernighan_lin(graph, labels);
        total += moved + merged + swapped;
        if moved == 0 && merged == 0 && swapped == 0 {
            return total;
        }
    }
}

/// Merges module pairs while some merge strictly improves the score, best
/// gain first and lowest label pair on ties. Returns the total gain.
fn merge_positive(graph: &UndirectedGraph, labels: &mut [usize]) -> i128 {
    let n = graph.node_count();
    let l = graph.edge_count() as i128;
    let mut degree = vec![0i128; n];
    let mut between = vec![vec![0i128; n]; n];
    for &(a, b) in graph.edges() {
        degree[labels[a]] += 1;
        degree[labels[b]] += 1;
        if labels[a] != labels[b] {
            between[labels[a]][labels[b]] += 1;
            between[labels[b]][labels[a]] += 1;
        }
    }
    let mut total = 0;
    loop {
        let alive: BTreeSet<usize> = labels.iter().copied().collect();
        let alive: Vec<usize> = alive.into_iter().collect();
        let mut pick: Option<(i128, usize, usize)> = None;
        for (x, &i) in alive.iter().enumerate() {
            for &j in &alive[x + 1..] {
                let gain = 4 * l * between[i][j] - 2 * degree[i] * degree[j];
                if gain > 0 && pick.is_none_or(|(g, _, _)| gain > g) {
                    pick = Some((gain, i, j));
                }
            }
        }
        let Some((gain, i, j)) = pick else {
            return total;
        };
        degree[i] += degree[j];
        for &m in &alive {
            if m != i && m != j {
                let joined = between[j][m];
                between[i][m] += joined;
                between[m][i] += joined;
            }
        }
        labels.iter_mut().filter(|lab| **lab == j).for_each(|lab| *lab = i);
        total += gain;
    }
}

/// Vertex-mover pass: repeatedly applies the single-node move (into another
/// module or a fresh one) with the largest strictly positive gain, lowest
/// `(node, target)` on ties. Returns the total numerator gain.
fn refine(graph: &UndirectedGraph, labels: &mut [usize]) -> i128 {
    let n = graph.node_count();
    let l = graph.edge_count() as i128;
    let k: Vec<i128> = graph.degrees().into_iter().map(i128::from).collect();
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in graph.edges() {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut module_degree = vec![0i128; n];
    for v in 0..n {
        module_degree[labels[v]] += k[v];
    }
    let mut total = 0;
    let mut links = vec![0i128; n];
    loop {
        let mut pick: Option<(i128, usize, usize)> = None;
        for v in 0..n {
            links.iter_mut().for_each(|x| *x = 0);
            for &u in &adjacency[v] {
                links[labels[u]] += 1;
            }
            let from = labels[v];
            let d_from = module_degree[from];
            let empty = (0..n).find(|&m| module_degree[m] == 0 && m != from);
            for to in 0..n {
                let fresh = Some(to) == empty;
                if to == from || (module_degree[to] == 0 && !fresh) {
                    continue;
                }
                let gain = 4 * l * (links[to] - links[from]) - 2 * k[v] * (module_degree[to] - d_from + k[v]);
                if gain > 0 && pick.is_none_or(|(g, _, _)| gain > g) {
                    pick = Some((gain, v, to));
                }
            }
        }
        let Some((gain, v, to)) = pick else {
            return total;
        };
        module_degree[labels[v]] -= k[v];
        module_degree[to] += k[v];
        labels[v] = to;
        total += gain;
    }
}

/// Exhaustive search over all set partitions (restricted growth strings in
/// lexicographic order). Ties prefer fewer modules, then the lexicographically
/// smallest assignment.
pub fn brute_force_max_q(graph: &UndirectedGraph) -> Result<ModularityResult, ModularityError> {
    let n = graph.node_count();
    if n > BRUTE_FORCE_NODE_LIMIT {
        return Err(ModularityError::TooLarge {
            limit: BRUTE_FORCE_NODE_LIMIT,
            got: n,
        });
    }
    if graph.edge_count() == 0 {
        return Err(ModularityError::UndefinedModularity);
    }

    let mut rgs = vec![0usize; n];
    // prefix_max[i] = max(rgs[..=i])
    let mut prefix_max = vec![0usize; n];
    let mut best: Option<(i128, usize, Vec<usize>)> = None;
    loop {
        let p = Partition {
            assignment: rgs.clone(),
        };
        let num = q_numerator(graph, &p);
        let k = prefix_max.last().map_or(0, |m| m + 1);
        let better = match &best {
            None => true,
            Some((b, bk, _)) => num > *b || (num == *b && k < *bk),
        };
        if better {
            best = Some((num, k, rgs.clone()));
        }

        // Advance to the next restricted growth string.
        let mut i = n;
        loop {
            if i <= 1 {
                let (num, _, assignment) = best.expect("at least one partition visited");
                return Ok(ModularityResult {
                    partition: Partition { assignment },
                    q: q_from_numerator(num, graph.edge_count()),
                });
            }
            i -= 1;
            if rgs[i] <= prefix_max[i - 1] {
                rgs[i] += 1;
                prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
                for t in i + 1..n {
                    rgs[t] = 0;
                    prefix_max[t] = prefix_max[i];
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> UndirectedGraph {
        UndirectedGraph::new(
            6,
            [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn single_module_scores_zero() {
        let g = two_triangles();
        assert_eq!(q_score(&g, &Partition::single_module(6)).unwrap(), 0.0);
    }

    #[test]
    fn two_triangles_split() {
        let g = two_triangles();
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        assert!((q_score(&g, &p).unwrap() - 5.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_singletons() {
        let g = UndirectedGraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let q = q_score(&g, &Partition::singletons(3)).unwrap();
        assert!((q + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_edge_graph_is_an_error() {
        let g = UndirectedGraph::new(3, []).unwrap();
        assert_eq!(
            q_score(&g, &Partition::single_module(3)),
            Err(ModularityError::UndefinedModularity)
        );
        assert_eq!(approx_max_q(&g), Err(ModularityError::UndefinedModularity));
        assert_eq!(
            brute_force_max_q(&g),
            Err(ModularityError::UndefinedModularity)
        );
    }

    #[test]
    fn graph_rejects_self_loops_and_collapses_duplicates() {
        assert!(UndirectedGraph::new(2, [(1, 1)]).is_err());
        assert!(UndirectedGraph::new(2, [(0, 2)]).is_err());
        let g = UndirectedGraph::new(2, [(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn partition_validation() {
        assert_eq!(
            Partition::new(vec![0, 2]),
            Err(ModularityError::NonContiguousModules)
        );
        assert_eq!(Partition::canonical(&[7, 3, 7, 9]).assignment(), &[0, 1, 0, 2]);
        let g = two_triangles();
        assert!(matches!(
            q_score(&g, &Partition::single_module(5)),
            Err(ModularityError::PartitionSize { .. })
        ));
    }

    #[test]
    fn greedy_finds_two_triangles() {
        let r = approx_max_q(&two_triangles()).unwrap();
        assert_eq!(r.partition.assignment(), &[0, 0, 0, 1, 1, 1]);
        assert!((r.q - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_complete_and_star_graphs_stay_whole() {
        let k4 = UndirectedGraph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let r = approx_max_q(&k4).unwrap();
        assert_eq!(r.q, 0.0);
        assert_eq!(r.partition.module_count(), 1);

        let star = UndirectedGraph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let r = approx_max_q(&star).unwrap();
        assert_eq!(r.q, 0.0);
        assert_eq!(r.partition.module_count(), 1);
    }

    #[test]
    fn brute_force_single_edge() {
        let g = UndirectedGraph::new(2, [(0, 1)]).unwrap();
        let r = brute_force_max_q(&g).unwrap();
        assert_eq!(r.q, 0.0);
        assert_eq!(r.partition.assignment(), &[0, 0]);
    }

    #[test]
    fn brute_force_size_guard() {
        let g = UndirectedGraph::new(13, [(0, 1)]).unwrap();
        assert!(matches!(
            brute_force_max_q(&g),
            Err(ModularityError::TooLarge { limit: 12, got: 13 })
        ));
    }
}
