use modneat::env::{evaluate, EnvError, EnvKind, EvalResult};
use modneat::map_elites::{
    cell_index, descriptors, map_elites_run, Job, MapElitesConfig, MapElitesError, MapElitesRun,
};
use modneat::neat::NeatConfig;
use proptest::prelude::*;

fn lander_config(initial: usize, generations: usize) -> MapElitesConfig {
    let spec = EnvKind::LunarLanderLite.spec();
    let mut cfg = MapElitesConfig::new(NeatConfig::new(spec.obs_dim, spec.output_count, initial, true));
    cfg.initial_population = initial;
    cfg.generations = generations;
    cfg
}

fn lander_eval(jobs: &[Job<'_>]) -> Result<Vec<EvalResult>, EnvError> {
    let spec = EnvKind::LunarLanderLite.spec();
    jobs.iter().map(|j| evaluate(j.genome, &spec, 2, j.eval_seed)).collect()
}

fn run(cfg: &MapElitesConfig, seed: u64) -> MapElitesRun {
    map_elites_run(cfg, seed, lander_eval).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn coverage_and_best_never_drop(seed in any::<u64>()) {
        let cfg = lander_config(20, 25);
        let r = run(&cfg, seed);
        prop_assert_eq!(r.history.len(), 26);
        for w in r.history.windows(2) {
            prop_assert!(w[1].coverage >= w[0].coverage);
            prop_assert!(w[1].best_fitness >= w[0].best_fitness);
            prop_assert!(w[1].accepted <= cfg.batch_size);
        }
        prop_assert_eq!(r.history.last().unwrap().coverage, r.archive.coverage());
    }

    #[test]
    fn elites_reproduce_on_reevaluation(seed in any::<u64>()) {
        let r = run(&lander_config(15, 10), seed);
        let spec = EnvKind::LunarLanderLite.spec();
        for (qc, dc, elite) in r.archive.occupied() {
            let again = evaluate(&elite.genome, &spec, 2, elite.eval_seed).unwrap();
            prop_assert_eq!(again.mean_reward, elite.fitness);
            let (q, d) = descriptors(&elite.genome, &again).unwrap();
            prop_assert_eq!((cell_index(q), cell_index(d)), (qc, dc));
            prop_assert_eq!((q, d), (elite.q, elite.d));
        }
    }
}

#[test]
fn no_operators_leaves_the_archive_alone() {
    let mut cfg = lander_config(20, 15);
    cfg.mutation_probability = 0.0;
    cfg.crossover_probability = 0.0;
    cfg.force_operator = false;
    let mut calls = 0;
    let r = map_elites_run(&cfg, 4, |jobs: &[Job<'_>]| {
        calls += 1;
        lander_eval(jobs)
    })
    .unwrap();
    assert_eq!(calls, 1);
    let mut init_only = cfg.clone();
    init_only.generations = 0;
    assert_eq!(r.archive, run(&init_only, 4).archive);
    assert!(r.history[1..].iter().all(|h| h.coverage == r.history[0].coverage && h.accepted == 0));
}

#[test]
fn batches_have_the_configured_size() {
    let cfg = lander_config(16, 5);
    let mut sizes = Vec::new();
    map_elites_run(&cfg, 2, |jobs: &[Job<'_>]| {
        sizes.push(jobs.len());
        lander_eval(jobs)
    })
    .unwrap();
    assert_eq!(sizes, vec![16, 12, 12, 12, 12, 12]);
}

#[test]
fn evaluation_order_does_not_matter() {
    let cfg = lander_config(12, 12);
    let forward = run(&cfg, 99);
    let backward = map_elites_run(&cfg, 99, |jobs: &[Job<'_>]| {
        let mut out = jobs
            .iter()
            .rev()
            .map(|j| lander_eval(&[*j]).map(|mut v| v.remove(0)))
            .collect::<Result<Vec<_>, _>>()?;
        out.reverse();
        Ok(out)
    })
    .unwrap();
    assert_eq!(forward.archive, backward.archive);
    assert_eq!(forward.history, backward.history);
}

#[test]
fn wrong_batch_size_is_an_error() {
    let cfg = lander_config(5, 1);
    let err = map_elites_run(&cfg, 0, |_jobs: &[Job<'_>]| Ok(Vec::new())).unwrap_err();
    assert_eq!(err, MapElitesError::BatchSize { expected: 5, got: 0 });
}
