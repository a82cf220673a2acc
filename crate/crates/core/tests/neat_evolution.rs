use std::collections::BTreeSet;

use modneat::neat::{compatibility_distance, crossover, Genome, NeatConfig, Population};
use modneat::phenotype::FeedForwardNet;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Cheap deterministic fitness: rewards weight mass on the first output.
fn score(g: &Genome) -> f64 {
    let out = g.output_ids().next().unwrap();
    g.enabled_connections()
        .filter(|c| c.to == out)
        .map(|c| c.weight)
        .sum::<f64>()
        - 0.01 * g.connections.len() as f64
}

fn step(pop: &mut Population) {
    for i in pop.pending() {
        let f = score(&pop.genomes[i]);
        pop.set_fitness(i, f, f);
    }
    pop.advance().unwrap();
}

fn fingerprint(pop: &Population) -> Vec<(Vec<u32>, Vec<(u32, u64, bool)>)> {
    pop.genomes
        .iter()
        .map(|g| {
            (
                g.nodes.iter().map(|n| n.id).collect(),
                g.connections
                    .iter()
                    .map(|c| (c.innovation, c.weight.to_bits(), c.enabled))
                    .collect(),
            )
        })
        .collect()
}

#[test]
fn same_seed_same_population() {
    let cfg = NeatConfig::new(4, 2, 40, true);
    let mut a = Population::new(cfg.clone(), 17).unwrap();
    let mut b = Population::new(cfg, 17).unwrap();
    for _ in 0..15 {
        step(&mut a);
        step(&mut b);
    }
    assert_eq!(fingerprint(&a), fingerprint(&b));
    let mut c = Population::new(NeatConfig::new(4, 2, 40, true), 18).unwrap();
    for _ in 0..15 {
        step(&mut c);
    }
    assert_ne!(fingerprint(&a), fingerprint(&c));
}

#[test]
fn best_fitness_never_drops() {
    let mut pop = Population::new(NeatConfig::new(3, 2, 50, false), 5).unwrap();
    let mut last = f64::NEG_INFINITY;
    for _ in 0..30 {
        for i in pop.pending() {
            let f = score(&pop.genomes[i]);
            pop.set_fitness(i, f, f);
        }
        let best = pop.champion().unwrap().fitness.unwrap();
        assert!(best >= last);
        last = best;
        pop.advance().unwrap();
    }
}

#[test]
fn evolution_improves_the_toy_objective() {
    let mut pop = Population::new(NeatConfig::new(3, 2, 60, true), 9).unwrap();
    for i in pop.pending() {
        let f = score(&pop.genomes[i]);
        pop.set_fitness(i, f, f);
    }
    let start = pop.champion().unwrap().fitness.unwrap();
    for _ in 0..40 {
        step(&mut pop);
    }
    for i in pop.pending() {
        let f = score(&pop.genomes[i]);
        pop.set_fitness(i, f, f);
    }
    assert!(pop.champion().unwrap().fitness.unwrap() > start + 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn populations_keep_size_and_structure(
        seed in any::<u64>(),
        size in 10usize..60,
        feed_forward in any::<bool>(),
    ) {
        let cfg = NeatConfig::new(3, 2, size, feed_forward);
        let mut pop = Population::new(cfg, seed).unwrap();
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        for _ in 0..12 {
            prop_assert_eq!(pop.genomes.len(), size);
            let members: usize = pop.species.iter().map(|s| s.members.len()).sum();
            prop_assert_eq!(members, size);
            for g in &pop.genomes {
                prop_assert!(g.validate(feed_forward).is_ok());
                if feed_forward {
                    prop_assert!(g.find_cycle_edge().is_none());
                    prop_assert!(FeedForwardNet::build(g).is_ok());
                }
                prop_assert_eq!(g.input_ids().count(), 3);
                prop_assert_eq!(g.output_ids().count(), 2);
                for c in &g.connections {
                    // The registry hands out one number per (from, to) pair.
                    prop_assert_eq!(pop.registry.lookup(c.from, c.to), Some(c.innovation));
                }
                seen.extend(g.innovations());
            }
            prop_assert!(seen.iter().all(|&i| i < pop.registry.issued()));
            step(&mut pop);
        }
    }

    #[test]
    fn distance_is_a_symmetric_premetric(seed in any::<u64>()) {
        let cfg = NeatConfig::new(3, 2, 20, true);
        let mut pop = Population::new(cfg.clone(), seed).unwrap();
        for _ in 0..6 {
            step(&mut pop);
        }
        let gs = &pop.genomes;
        for a in gs.iter().take(6) {
            prop_assert_eq!(compatibility_distance(a, a, &cfg.coefficients), 0.0);
            for b in gs.iter().take(6) {
                let ab = compatibility_distance(a, b, &cfg.coefficients);
                prop_assert!(ab >= 0.0);
                prop_assert_eq!(ab, compatibility_distance(b, a, &cfg.coefficients));
            }
        }
    }

    #[test]
    fn crossover_genes_come_from_parents(seed in any::<u64>()) {
        let mut pop = Population::new(NeatConfig::new(3, 2, 20, false), seed).unwrap();
        for _ in 0..8 {
            step(&mut pop);
        }
        for i in pop.pending() {
            let f = score(&pop.genomes[i]);
            pop.set_fitness(i, f, f);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (&pop.genomes[0], &pop.genomes[1]);
        let child = crossover(a, b, &mut rng).unwrap();
        let parents: BTreeSet<u32> = a.innovations().union(&b.innovations()).copied().collect();
        prop_assert!(child.innovations().is_subset(&parents));
        let fitter = if a.fitness >= b.fitness { a } else { b };
        if a.fitness != b.fitness {
            prop_assert!(child.innovations().is_superset(&fitter.innovations()));
        }
        prop_assert!(child.fitness.is_none());
    }
}
