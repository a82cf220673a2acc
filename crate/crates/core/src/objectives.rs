//! Torque-deviation descriptor and modularity-augmented fitness.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ObjectiveError {
    #[error("torque deviation needs at least two actuators, got {0}")]
    TooFewActuators(usize),
    #[error("actuation totals must be finite and non-negative")]
    InvalidActuation,
    #[error("importance must be non-negative and bounds ordered (a <= b)")]
    InvalidImportance,
}

/// Range-rule deviation of per-actuator usage, `(max X − min X) / max X`.
///
/// 0 means every actuator was used equally, 1 means some actuator was never
/// used. An all-zero vector scores 0.
pub fn torque_deviation(totals: &[f64]) -> Result<f64, ObjectiveError> {
    if totals.len() < 2 {
        return Err(ObjectiveError::TooFewActuators(totals.len()));
    }
    if totals.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(ObjectiveError::InvalidActuation);
    }
    let max = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = totals.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        return Ok(0.0);
    }
    Ok(((max - min) / max).clamp(0.0, 1.0))
}

/// Importance `I` and reward bounds `(a, b)` of the modularity bonus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QImportanceConfig {
    pub importance: f64,
    pub lower: f64,
    pub upper: f64,
}

impl QImportanceConfig {
    pub fn new(importance: f64, lower: f64, upper: f64) -> Result<Self, ObjectiveError> {
        if !(importance >= 0.0) || !(lower <= upper) {
            return Err(ObjectiveError::InvalidImportance);
        }
        Ok(Self {
            importance,
            lower,
            upper,
        })
    }

    /// Bounds `(0, 300)` with the given importance.
    pub fn with_importance(importance: f64) -> Result<Self, ObjectiveError> {
        Self::new(importance, 0.0, 300.0)
    }
}

/// `F = R + Q·I·(min{max{R, a}, b} + a)`, with `Q` clamped into `[0, 1]`.
///
/// A zero bonus returns `reward` untouched, so `I = 0` reproduces the plain
/// reward bit for bit.
pub fn modularity_reward_fitness(reward: f64, q: f64, cfg: &QImportanceConfig) -> f64 {
    let q = if q.is_nan() { 0.0 } else { q.clamp(0.0, 1.0) };
    let bonus = q * cfg.importance * (reward.max(cfg.lower).min(cfg.upper) + cfg.lower);
    if bonus == 0.0 {
        reward
    } else {
        reward + bonus
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_examples() {
        assert_eq!(torque_deviation(&[3.0, 3.0, 3.0, 3.0]), Ok(0.0));
        assert_eq!(torque_deviation(&[5.0, 0.0]), Ok(1.0));
        assert_eq!(torque_deviation(&[4.0, 2.0, 3.0, 1.0]), Ok(0.75));
        assert_eq!(torque_deviation(&[0.0, 0.0]), Ok(0.0));
    }

    #[test]
    fn deviation_errors() {
        assert_eq!(torque_deviation(&[1.0]), Err(ObjectiveError::TooFewActuators(1)));
        assert_eq!(torque_deviation(&[]), Err(ObjectiveError::TooFewActuators(0)));
        assert_eq!(torque_deviation(&[1.0, -1.0]), Err(ObjectiveError::InvalidActuation));
        assert_eq!(torque_deviation(&[1.0, f64::NAN]), Err(ObjectiveError::InvalidActuation));
    }

    #[test]
    fn fitness_examples() {
        let zero = QImportanceConfig::with_importance(0.0).unwrap();
        for r in [-250.0, -0.0, 0.0, 17.5, 400.0] {
            assert_eq!(modularity_reward_fitness(r, 0.7, &zero).to_bits(), f64::to_bits(r));
        }
        let cfg = QImportanceConfig::new(0.2, 0.0, 300.0).unwrap();
        assert!((modularity_reward_fitness(100.0, 0.5, &cfg) - 110.0).abs() < 1e-12);
        let cfg = QImportanceConfig::new(0.1, 0.0, 300.0).unwrap();
        assert!((modularity_reward_fitness(400.0, 1.0, &cfg) - 430.0).abs() < 1e-12);
    }

    #[test]
    fn negative_q_is_no_penalty() {
        let cfg = QImportanceConfig::with_importance(0.2).unwrap();
        assert_eq!(modularity_reward_fitness(50.0, -0.3, &cfg), 50.0);
    }

    #[test]
    fn negative_reward_gets_no_bonus_at_zero_floor() {
        let cfg = QImportanceConfig::with_importance(0.2).unwrap();
        assert_eq!(modularity_reward_fitness(-80.0, 0.9, &cfg), -80.0);
    }

    #[test]
    fn config_validation() {
        assert!(QImportanceConfig::new(-0.1, 0.0, 1.0).is_err());
        assert!(QImportanceConfig::new(0.1, 2.0, 1.0).is_err());
        assert!(QImportanceConfig::new(f64::NAN, 0.0, 1.0).is_err());
    }
}
