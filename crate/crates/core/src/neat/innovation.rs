use alloc::collections::BTreeMap;

/// Run-wide historical markings.
///
/// A `(from, to)` connection always receives the same innovation number, and
/// splitting a given connection innovation always yields the same hidden node
/// id, so identical structural mutations in different genomes align during
/// crossover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnovationRegistry {
    connections: BTreeMap<(u32, u32), u32>,
    splits: BTreeMap<u32, u32>,
    next_innovation: u32,
    next_node: u32,
}

impl InnovationRegistry {
    /// `first_hidden_id` is the first node id not used by input/output nodes.
    pub fn new(first_hidden_id: u32) -> Self {
        Self {
            connections: BTreeMap::new(),
            splits: BTreeMap::new(),
            next_innovation: 0,
            next_node: first_hidden_id,
        }
    }

    pub fn connection(&mut self, from: u32, to: u32) -> u32 {
        let next = &mut self.next_innovation;
        *self.connections.entry((from, to)).or_insert_with(|| {
            let id = *next;
            *next += 1;
            id
        })
    }

    /// Hidden node id created by splitting the connection `innovation`.
    pub fn split_node(&mut self, innovation: u32) -> u32 {
        let next = &mut self.next_node;
        *self.splits.entry(innovation).or_insert_with(|| {
            let id = *next;
            *next += 1;
            id
        })
    }

    pub fn lookup(&self, from: u32, to: u32) -> Option<u32> {
        self.connections.get(&(from, to)).copied()
    }

    /// Number of innovations issued so far.
    pub fn issued(&self) -> u32 {
        self.next_innovation
    }
}
