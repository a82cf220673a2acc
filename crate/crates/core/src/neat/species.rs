use alloc::vec::Vec;

use rand::Rng;

use super::{compatibility_distance, CompatibilityCoefficients, Genome};

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub id: u32,
    /// Member of the previous generation that newcomers are compared against.
    pub representative: Genome,
    /// Indices into the current population.
    pub members: Vec<usize>,
    /// Best member fitness per generation since the species appeared.
    pub best_fitness_history: Vec<f64>,
    /// Generations since the best-ever fitness last improved.
    pub stagnation_counter: usize,
}

impl Species {
    fn found(id: u32, representative: Genome, member: usize) -> Self {
        Self {
            id,
            representative,
            members: alloc::vec![member],
            best_fitness_history: Vec::new(),
            stagnation_counter: 0,
        }
    }

    pub fn best_ever(&self) -> Option<f64> {
        self.best_fitness_history
            .iter()
            .copied()
            .fold(None, |acc, f| Some(acc.map_or(f, |a: f64| a.max(f))))
    }
}

/// Assigns each genome to the first species whose representative lies within
/// `threshold`, founding new species as needed. Empty species are dropped and
/// each survivor gets a random member as representative for the next call.
pub fn speciate<R: Rng + ?Sized>(
    population: &[Genome],
    previous: Vec<Species>,
    threshold: f64,
    coeffs: &CompatibilityCoefficients,
    next_species_id: &mut u32,
    rng: &mut R,
) -> Vec<Species> {
    let mut species: Vec<Species> = previous
        .into_iter()
        .map(|mut s| {
            s.members.clear();
            s
        })
        .collect();
    for (index, genome) in population.iter().enumerate() {
        let home = species
            .iter()
            .position(|s| compatibility_distance(&s.representative, genome, coeffs) < threshold);
        match home {
            Some(i) => species[i].members.push(index),
            None => {
                species.push(Species::found(*next_species_id, genome.clone(), index));
                *next_species_id += 1;
            }
        }
    }
    species.retain(|s| !s.members.is_empty());
    for s in species.iter_mut() {
        let pick = s.members[rng.gen_range(0..s.members.len())];
        s.representative = population[pick].clone();
    }
    species
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neat::{InnovationRegistry, NeatConfig};
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn population(n: usize) -> Vec<Genome> {
        let cfg = NeatConfig::new(2, 1, n, true);
        let mut reg = InnovationRegistry::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = Genome::fully_connected(&cfg, &mut reg, &mut rng);
        vec![g; n]
    }

    #[test]
    fn identical_population_is_one_species() {
        let pop = population(10);
        let mut next = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = speciate(&pop, Vec::new(), 3.0, &Default::default(), &mut next, &mut rng);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].members.len(), 10);
        assert_eq!(next, 1);
    }

    #[test]
    fn distant_clusters_split() {
        let mut pop = population(6);
        for g in pop.iter_mut().skip(3) {
            for c in g.connections.iter_mut() {
                c.weight += 20.0;
            }
        }
        let mut next = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = speciate(&pop, Vec::new(), 3.0, &Default::default(), &mut next, &mut rng);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].members, vec![0, 1, 2]);
        assert_eq!(s[1].members, vec![3, 4, 5]);

        let s = speciate(&pop, Vec::new(), f64::INFINITY, &Default::default(), &mut next, &mut rng);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn species_persist_and_empty_ones_vanish() {
        let mut pop = population(4);
        for g in pop.iter_mut().skip(2) {
            for c in g.connections.iter_mut() {
                c.weight += 20.0;
            }
        }
        let mut next = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = speciate(&pop, Vec::new(), 3.0, &Default::default(), &mut next, &mut rng);
        assert_eq!(s.len(), 2);
        let first_cluster_only = population(4);
        let s = speciate(&first_cluster_only, s, 3.0, &Default::default(), &mut next, &mut rng);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, 0);
        assert_eq!(next, 2);
    }
}
