//! Planar lunar-lander task with simplified rigid-body physics.
//!
//! The body is a point mass with orientation, integrated with semi-implicit
//! Euler. `y` is the height of the leg base when level, the pad spans
//! `|x| <= PAD_HALF_WIDTH` at `y = 0`. Shaping follows a potential
//! `φ = −100·dist − 100·speed − 100·|θ| + 10·contacts`, so the summed shaping
//! over an episode is `φ_final − φ_initial`.
//!
//! | constant | value | meaning |
//! |---|---|---|
//! | `DT` | 0.05 s | step length |
//! | `GRAVITY` | 1.6 | downward acceleration |
//! | `MAIN_THRUST` | 4.0 | acceleration at full main throttle |
//! | `SIDE_THRUST` | 0.6 | lateral acceleration at full side throttle |
//! | `SIDE_TORQUE` | 3.0 | angular acceleration at full side throttle |
//! | `SIDE_DEAD_ZONE` | 0.5 | side engine fires only when `|a1| > 0.5` |
//! | `LEG_SPAN` | 0.2 | horizontal offset of each leg tip |
//! | `CRASH_SPEED` | 1.0 | touchdown speed above which the lander breaks |
//! | `REST_SPEED` | 0.05 | linear and angular speed counted as at rest |
//! | `GROUND_FRICTION` | 0.8 | per-step horizontal velocity retention on ground |
//! | `PAD_HALF_WIDTH` | 0.2 | landing pad half width |
//! | `X_LIMIT`, `Y_LIMIT` | 1.5, 3.0 | leaving the box is a crash |
//! | `STEP_LIMIT` | 400 | episode truncation |

use core::f64::consts::FRAC_PI_2;

use super::EnvError;

pub const DT: f64 = 0.05;
pub const GRAVITY: f64 = 1.6;
pub const MAIN_THRUST: f64 = 4.0;
pub const SIDE_THRUST: f64 = 0.6;
pub const SIDE_TORQUE: f64 = 3.0;
pub const SIDE_DEAD_ZONE: f64 = 0.5;
pub const LEG_SPAN: f64 = 0.2;
pub const CRASH_SPEED: f64 = 1.0;
pub const REST_SPEED: f64 = 0.05;
pub const GROUND_FRICTION: f64 = 0.8;
pub const PAD_HALF_WIDTH: f64 = 0.2;
pub const X_LIMIT: f64 = 1.5;
pub const Y_LIMIT: f64 = 3.0;
pub const STEP_LIMIT: usize = 400;
pub const START_HEIGHT: f64 = 1.2;
pub const TERMINAL_REWARD: f64 = 100.0;

/// Per-step fuel penalties; zeroing them isolates the shaping term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelCosts {
    pub main: f64,
    pub side: f64,
}

impl Default for FuelCosts {
    fn default() -> Self {
        Self {
            main: 0.3,
            side: 0.03,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LanderState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub angle: f64,
    pub angular_velocity: f64,
    pub left_contact: bool,
    pub right_contact: bool,
}

impl LanderState {
    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.vx, self.vy, self.angle, self.angular_velocity]
            .iter()
            .all(|v| v.is_finite())
    }

    pub fn speed(&self) -> f64 {
        libm::hypot(self.vx, self.vy)
    }

    pub fn potential(&self) -> f64 {
        let contacts = self.left_contact as u8 + self.right_contact as u8;
        -100.0 * libm::hypot(self.x, self.y) - 100.0 * self.speed() - 100.0 * libm::fabs(self.angle)
            + 10.0 * f64::from(contacts)
    }

    pub fn observation(&self) -> [f64; 8] {
        [
            self.x,
            self.y,
            self.vx,
            self.vy,
            self.angle,
            self.angular_velocity,
            f64::from(self.left_contact as u8),
            f64::from(self.right_contact as u8),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanderOutcome {
    Flying,
    Landed,
    /// At rest on the ground outside the pad.
    Stopped,
    Crashed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanderStep {
    pub state: LanderState,
    pub reward: f64,
    pub done: bool,
    pub outcome: LanderOutcome,
    /// `φ(next) − φ(prev)`.
    pub shaping: f64,
    /// Effective throttles `[main, side]` after clamping and dead zone.
    pub actuation: [f64; 2],
}

/// Effective `[main, side]` throttle for a raw action. Main throttle is
/// `max(a0, 0)`; the side throttle is `a1` outside the dead zone, else 0.
pub fn effective_throttle(action: [f64; 2]) -> [f64; 2] {
    let main = action[0].clamp(0.0, 1.0);
    let a1 = action[1].clamp(-1.0, 1.0);
    let side = if libm::fabs(a1) > SIDE_DEAD_ZONE { a1 } else { 0.0 };
    [main, side]
}

pub fn lunar_step(state: &LanderState, action: [f64; 2], fuel: FuelCosts) -> Result<LanderStep, EnvError> {
    if !state.is_finite() || !action.iter().all(|a| a.is_finite()) {
        return Err(EnvError::NonFinite);
    }
    let [main, side] = effective_throttle(action);
    let (sin, cos) = (libm::sin(state.angle), libm::cos(state.angle));

    // Main engine pushes along the body's up axis (−sin θ, cos θ); the side
    // engine pushes along the body's x axis (cos θ, sin θ) and spins it.
    let ax = -sin * main * MAIN_THRUST + cos * side * SIDE_THRUST;
    let ay = cos * main * MAIN_THRUST + sin * side * SIDE_THRUST - GRAVITY;
    let alpha = -side * SIDE_TORQUE;

    let mut s = *state;
    s.vx += ax * DT;
    s.vy += ay * DT;
    s.angular_velocity += alpha * DT;
    s.x += s.vx * DT;
    s.y += s.vy * DT;
    s.angle += s.angular_velocity * DT;

    let mut outcome = LanderOutcome::Flying;
    if s.y <= 0.0 {
        let impact = s.speed();
        s.y = 0.0;
        if impact > CRASH_SPEED || libm::fabs(s.angle) > FRAC_PI_2 {
            outcome = LanderOutcome::Crashed;
        } else {
            s.vy = s.vy.max(0.0);
            s.vx *= GROUND_FRICTION;
            s.angle *= 0.5;
            s.angular_velocity = 0.0;
            if s.speed() < REST_SPEED && main == 0.0 {
                outcome = if libm::fabs(s.x) <= PAD_HALF_WIDTH {
                    LanderOutcome::Landed
                } else {
                    LanderOutcome::Stopped
                };
            }
        }
    }
    if libm::fabs(s.angle) > FRAC_PI_2 || libm::fabs(s.x) > X_LIMIT || s.y > Y_LIMIT {
        outcome = LanderOutcome::Crashed;
    }
    let lift = LEG_SPAN * libm::sin(s.angle);
    s.left_contact = s.y - lift <= 0.0;
    s.right_contact = s.y + lift <= 0.0;
    if !s.is_finite() {
        return Err(EnvError::NonFinite);
    }

    let shaping = s.potential() - state.potential();
    let terminal = match outcome {
        LanderOutcome::Landed => TERMINAL_REWARD,
        LanderOutcome::Crashed => -TERMINAL_REWARD,
        LanderOutcome::Flying | LanderOutcome::Stopped => 0.0,
    };
    Ok(LanderStep {
        state: s,
        reward: shaping - fuel.main * main - fuel.side * libm::fabs(side) + terminal,
        done: outcome != LanderOutcome::Flying,
        outcome,
        shaping,
        actuation: [main, libm::fabs(side)],
    })
}
