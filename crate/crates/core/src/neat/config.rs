use super::NeatError;

/// Weights of the compatibility distance `(c1·E + c2·D)/N + c3·W̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityCoefficients {
    pub excess: f64,
    pub disjoint: f64,
    pub weight: f64,
}

impl Default for CompatibilityCoefficients {
    fn default() -> Self {
        Self {
            excess: 1.0,
            disjoint: 1.0,
            weight: 0.5,
        }
    }
}

/// NEAT hyperparameters. Rates are probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeatConfig {
    pub inputs: usize,
    pub outputs: usize,
    pub population_size: usize,
    /// Feedforward genomes keep their enabled digraph acyclic; recurrent
    /// genomes may contain cycles and self-loops.
    pub feed_forward: bool,

    /// Initial weights and replacement weights are drawn from `±weight_init_range`.
    pub weight_init_range: f64,
    /// Per-connection probability that its weight is mutated.
    pub weight_mutate_rate: f64,
    /// Fraction of weight mutations that replace instead of perturb.
    pub weight_replace_rate: f64,
    pub weight_perturb_power: f64,
    pub weight_limit: f64,
    /// Per-node probability that its bias is perturbed.
    pub bias_mutate_rate: f64,
    pub bias_perturb_power: f64,
    pub add_connection_rate: f64,
    pub add_node_rate: f64,
    pub toggle_enable_rate: f64,

    pub crossover_rate: f64,
    /// Probability that a gene disabled in either parent stays disabled.
    pub disabled_gene_rate: f64,
    /// Fraction of each species (by fitness rank) eligible as parents.
    pub survival_threshold: f64,

    pub compatibility_threshold: f64,
    pub coefficients: CompatibilityCoefficients,
    pub stagnation_limit: usize,
    pub elitism: bool,
    /// Species with more members than this keep their champion unchanged.
    pub elitism_min_species_size: usize,
}

impl NeatConfig {
    pub fn new(inputs: usize, outputs: usize, population_size: usize, feed_forward: bool) -> Self {
        Self {
            inputs,
            outputs,
            population_size,
            feed_forward,
            weight_init_range: 1.0,
            weight_mutate_rate: 0.8,
            weight_replace_rate: 0.1,
            weight_perturb_power: 0.5,
            weight_limit: 30.0,
            bias_mutate_rate: 0.3,
            bias_perturb_power: 0.5,
            add_connection_rate: 0.2,
            add_node_rate: 0.1,
            toggle_enable_rate: 0.01,
            crossover_rate: 0.75,
            disabled_gene_rate: 0.75,
            survival_threshold: 0.2,
            compatibility_threshold: 3.0,
            coefficients: CompatibilityCoefficients::default(),
            stagnation_limit: 15,
            elitism: true,
            elitism_min_species_size: 5,
        }
    }

    /// Same configuration with every mutation probability set to zero.
    pub fn without_mutation(mut self) -> Self {
        self.weight_mutate_rate = 0.0;
        self.bias_mutate_rate = 0.0;
        self.add_connection_rate = 0.0;
        self.add_node_rate = 0.0;
        self.toggle_enable_rate = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), NeatError> {
        if self.inputs == 0 || self.outputs == 0 {
            return Err(NeatError::InvalidConfig("inputs and outputs must be nonzero"));
        }
        if self.population_size < 2 {
            return Err(NeatError::InvalidConfig("population_size must be at least 2"));
        }
        let rates = [
            self.weight_mutate_rate,
            self.weight_replace_rate,
            self.bias_mutate_rate,
            self.add_connection_rate,
            self.add_node_rate,
            self.toggle_enable_rate,
            self.crossover_rate,
            self.disabled_gene_rate,
            self.survival_threshold,
        ];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(NeatError::InvalidConfig("rates must lie in [0, 1]"));
        }
        if !(self.compatibility_threshold > 0.0) {
            return Err(NeatError::InvalidConfig("compatibility_threshold must be positive"));
        }
        if !(self.weight_init_range >= 0.0 && self.weight_limit > 0.0) {
            return Err(NeatError::InvalidConfig("weight ranges must be positive"));
        }
        if self.stagnation_limit == 0 {
            return Err(NeatError::InvalidConfig("stagnation_limit must be at least 1"));
        }
        Ok(())
    }
}
