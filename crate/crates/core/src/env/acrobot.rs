//! Two-link underactuated pendulum with torque on the middle joint.
//!
//! Angles are measured from the hanging-down position; `theta2` is relative
//! to the first link. Each control step of `DT` seconds is `SUBSTEPS` RK4 steps.

use core::f64::consts::PI;

use super::EnvError;

pub const DT: f64 = 0.2;
pub const SUBSTEPS: usize = 4;
pub const LINK_LENGTH_1: f64 = 1.0;
pub const LINK_MASS_1: f64 = 1.0;
pub const LINK_MASS_2: f64 = 1.0;
pub const LINK_COM_1: f64 = 0.5;
pub const LINK_COM_2: f64 = 0.5;
pub const LINK_MOI: f64 = 1.0;
pub const GRAVITY: f64 = 9.8;
pub const MAX_VEL_1: f64 = 4.0 * PI;
pub const MAX_VEL_2: f64 = 9.0 * PI;
pub const STEP_LIMIT: usize = 500;
/// Torque for each network output index.
pub const TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcrobotState {
    pub theta1: f64,
    pub theta2: f64,
    pub dtheta1: f64,
    pub dtheta2: f64,
}

impl AcrobotState {
    fn as_array(&self) -> [f64; 4] {
        [self.theta1, self.theta2, self.dtheta1, self.dtheta2]
    }

    fn from_array(s: [f64; 4]) -> Self {
        Self {
            theta1: s[0],
            theta2: s[1],
            dtheta1: s[2],
            dtheta2: s[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    /// Height of the free tip above the pivot, in units of one link length.
    pub fn tip_height(&self) -> f64 {
        -libm::cos(self.theta1) - libm::cos(self.theta1 + self.theta2)
    }

    /// `[cos θ1, sin θ1, cos θ2, sin θ2, θ̇1, θ̇2]`.
    pub fn observation(&self) -> [f64; 6] {
        [
            libm::cos(self.theta1),
            libm::sin(self.theta1),
            libm::cos(self.theta2),
            libm::sin(self.theta2),
            self.dtheta1,
            self.dtheta2,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcrobotStep {
    pub state: AcrobotState,
    pub reward: f64,
    /// Tip raised above one link length.
    pub done: bool,
}

fn derivatives(s: [f64; 4], torque: f64) -> [f64; 4] {
    let (m1, m2, l1, lc1, lc2) = (LINK_MASS_1, LINK_MASS_2, LINK_LENGTH_1, LINK_COM_1, LINK_COM_2);
    let (i1, i2, g) = (LINK_MOI, LINK_MOI, GRAVITY);
    let [theta1, theta2, dtheta1, dtheta2] = s;
    let (sin2, cos2) = (libm::sin(theta2), libm::cos(theta2));

    let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * cos2) + i1 + i2;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * cos2) + i2;
    let phi2 = m2 * lc2 * g * libm::sin(theta1 + theta2);
    let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * sin2
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * sin2
        + (m1 * lc1 + m2 * l1) * g * libm::sin(theta1)
        + phi2;
    let ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * sin2 - phi2)
        / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    [dtheta1, dtheta2, ddtheta1, ddtheta2]
}

fn rk4_substeps(mut s: [f64; 4], torque: f64, dt: f64) -> [f64; 4] {
    let h = dt / SUBSTEPS as f64;
    for _ in 0..SUBSTEPS {
        s = rk4(s, torque, h);
    }
    s
}

fn rk4(s: [f64; 4], torque: f64, dt: f64) -> [f64; 4] {
    let add = |a: [f64; 4], k: [f64; 4], h: f64| core::array::from_fn(|i| a[i] + h * k[i]);
    let k1 = derivatives(s, torque);
    let k2 = derivatives(add(s, k1, dt / 2.0), torque);
    let k3 = derivatives(add(s, k2, dt / 2.0), torque);
    let k4 = derivatives(add(s, k3, dt), torque);
    core::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Wraps an angle into `[-π, π)`.
fn wrap(mut x: f64) -> f64 {
    let span = 2.0 * PI;
    while x >= PI {
        x -= span;
    }
    while x < -PI {
        x += span;
    }
    x
}

/// Integrates the raw dynamics for `dt` seconds without wrapping or clamping.
pub fn integrate(state: &AcrobotState, torque: f64, dt: f64) -> AcrobotState {
    AcrobotState::from_array(rk4_substeps(state.as_array(), torque, dt))
}

/// One control step over `DT`, angles wrapped, velocities clamped.
/// Reward is −1 per step.
pub fn acrobot_step(state: &AcrobotState, torque: f64) -> Result<AcrobotStep, EnvError> {
    if !state.is_finite() || !torque.is_finite() {
        return Err(EnvError::NonFinite);
    }
    let [t1, t2, dt1, dt2] = rk4_substeps(state.as_array(), torque, DT);
    let next = AcrobotState {
        theta1: wrap(t1),
        theta2: wrap(t2),
        dtheta1: dt1.clamp(-MAX_VEL_1, MAX_VEL_1),
        dtheta2: dt2.clamp(-MAX_VEL_2, MAX_VEL_2),
    };
    if !next.is_finite() {
        return Err(EnvError::NonFinite);
    }
    Ok(AcrobotStep {
        state: next,
        reward: -1.0,
        done: next.tip_height() > 1.0,
    })
}

/// Index of the largest output, lowest index on ties.
pub fn decode_action(outputs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in outputs.iter().enumerate() {
        if v > outputs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hanging_rest_is_an_equilibrium() {
        let s = AcrobotState::default();
        let step = acrobot_step(&s, 0.0).unwrap();
        assert_eq!(step.state, s);
        assert_eq!(step.reward, -1.0);
        assert!(!step.done);
    }

    #[test]
    fn termination_predicate() {
        // θ1 = π/2, θ2 = 0 gives -cos θ1 - cos(θ1+θ2) = 0; lift further.
        let s = AcrobotState {
            theta1: 2.0,
            theta2: 0.3,
            ..Default::default()
        };
        assert!((s.tip_height() - (-libm::cos(2.0) - libm::cos(2.3))).abs() < 1e-15);
        assert!(s.tip_height() > 1.0);
        let low = AcrobotState {
            theta1: 0.5,
            ..Default::default()
        };
        assert!(low.tip_height() < 1.0);
    }

    #[test]
    fn non_finite_state_rejected() {
        let s = AcrobotState {
            theta1: f64::NAN,
            ..Default::default()
        };
        assert_eq!(acrobot_step(&s, 0.0), Err(EnvError::NonFinite));
    }

    #[test]
    fn velocities_are_clamped() {
        let s = AcrobotState {
            dtheta1: 100.0,
            dtheta2: -100.0,
            ..Default::default()
        };
        let next = acrobot_step(&s, 0.0).unwrap().state;
        assert!(next.dtheta1.abs() <= MAX_VEL_1);
        assert!(next.dtheta2.abs() <= MAX_VEL_2);
        assert!((-PI..PI).contains(&next.theta1));
    }

    #[test]
    fn argmax_decode() {
        assert_eq!(decode_action(&[0.1, 0.5, 0.2]), 1);
        assert_eq!(decode_action(&[0.3, 0.3, 0.3]), 0);
        assert_eq!(decode_action(&[-1.0, -1.0, 0.0]), 2);
    }
}
