//! Ground-truth plants: a mass-spring-damper and an n-joint arm, integrated
//! with RK4 on a fixed step, with noisy encoders and scripted blocking collisions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{contract, Result};
use crate::model::Observation;
use crate::scalar::{lit, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct PlantState<T> {
    pub q: Vec<T>,
    pub q_dot: Vec<T>,
    pub t: f64,
    pub blocked: Vec<bool>,
}

impl<T: Scalar> PlantState<T> {
    pub fn new(q: Vec<T>, q_dot: Vec<T>) -> Self {
        let n = q.len();
        Self {
            q,
            q_dot,
            t: 0.0,
            blocked: vec![false; n],
        }
    }

    pub fn at_rest(q: Vec<T>) -> Self {
        let n = q.len();
        Self::new(q, vec![T::zero(); n])
    }

    pub fn n_joints(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.q.len();
        if n == 0 || self.q_dot.len() != n || self.blocked.len() != n {
            return Err(contract("plant state dimension mismatch"));
        }
        if self.q.iter().chain(&self.q_dot).any(|v| !v.is_finite()) {
            return Err(contract("plant state is not finite"));
        }
        Ok(())
    }
}

/// One classical fourth-order Runge-Kutta step of the autonomous system `x' = f(x)`.
pub fn rk4_step<T: Scalar>(x: &[T], dt: T, f: impl Fn(&[T]) -> Vec<T>) -> Vec<T> {
    let h = lit::<T>(0.5) * dt;
    let axpy = |k: &[T], s: T| -> Vec<T> { x.iter().zip(k).map(|(&xi, &ki)| xi + s * ki).collect() };
    let k1 = f(x);
    let k2 = f(&axpy(&k1, h));
    let k3 = f(&axpy(&k2, h));
    let k4 = f(&axpy(&k3, dt));
    let sixth = dt / lit(6.0);
    let two = lit::<T>(2.0);
    (0..x.len())
        .map(|i| x[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect()
}

/// `m x'' = a - k1 x - k2 x'`.
#[derive(Clone, Debug, PartialEq)]
pub struct MsdParams<T> {
    pub k1: T,
    pub k2: T,
    pub mass: T,
}

impl<T: Scalar> Default for MsdParams<T> {
    fn default() -> Self {
        Self {
            k1: T::one(),
            k2: lit(0.1),
            mass: T::one(),
        }
    }
}

/// One RK4 step of the mass-spring-damper with the action held over the step.
pub fn msd_step<T: Scalar>(state: &PlantState<T>, a: T, dt: T, params: &MsdParams<T>) -> PlantState<T> {
    let mut next = state.clone();
    next.t = state.t + dt.to_f64().unwrap_or(f64::NAN);
    if state.blocked[0] {
        next.q_dot[0] = T::zero();
        return next;
    }
    let x = [state.q[0], state.q_dot[0]];
    let y = rk4_step(&x, dt, |s| {
        vec![s[1], (a - params.k1 * s[0] - params.k2 * s[1]) / params.mass]
    });
    next.q[0] = y[0];
    next.q_dot[0] = y[1];
    next
}

/// Nominal two-link planar arm. These masses and lengths are illustrative
/// defaults, not identified from any robot.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLinkParams<T> {
    pub m1: T,
    pub m2: T,
    pub l1: T,
    pub lc1: T,
    pub lc2: T,
    pub i1: T,
    pub i2: T,
    /// Viscous joint damping.
    pub damping: T,
    /// Gravity along the plane's vertical axis; zero for a horizontal arm.
    pub gravity: T,
}

impl<T: Scalar> Default for TwoLinkParams<T> {
    fn default() -> Self {
        Self {
            m1: T::one(),
            m2: T::one(),
            l1: T::one(),
            lc1: lit(0.5),
            lc2: lit(0.5),
            i1: lit(1.0 / 12.0),
            i2: lit(1.0 / 12.0),
            damping: lit(0.5),
            gravity: T::zero(),
        }
    }
}

impl<T: Scalar> TwoLinkParams<T> {
    pub fn mass_matrix(&self, q2: T) -> [[T; 2]; 2] {
        let c2 = q2.cos();
        let m22 = self.i2 + self.m2 * self.lc2 * self.lc2;
        let m12 = m22 + self.m2 * self.l1 * self.lc2 * c2;
        let m11 = self.i1
            + self.m1 * self.lc1 * self.lc1
            + m22
            + self.m2 * (self.l1 * self.l1 + lit::<T>(2.0) * self.l1 * self.lc2 * c2);
        [[m11, m12], [m12, m22]]
    }

    /// Joint accelerations from `M q'' + c(q, q') + g(q) + b q' = u`.
    pub fn acceleration(&self, q: &[T], qd: &[T], u: &[T]) -> [T; 2] {
        let m = self.mass_matrix(q[1]);
        let h = self.m2 * self.l1 * self.lc2 * q[1].sin();
        let two = lit::<T>(2.0);
        let cor = [-h * (two * qd[0] * qd[1] + qd[1] * qd[1]), h * qd[0] * qd[0]];
        let c12 = (q[0] + q[1]).cos();
        let grav = [
            (self.m1 * self.lc1 + self.m2 * self.l1) * self.gravity * q[0].cos()
                + self.m2 * self.lc2 * self.gravity * c12,
            self.m2 * self.lc2 * self.gravity * c12,
        ];
        let rhs = [
            u[0] - cor[0] - grav[0] - self.damping * qd[0],
            u[1] - cor[1] - grav[1] - self.damping * qd[1],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [
            (m[1][1] * rhs[0] - m[0][1] * rhs[1]) / det,
            (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
        ]
    }

    pub fn kinetic_energy(&self, q: &[T], qd: &[T]) -> T {
        let m = self.mass_matrix(q[1]);
        lit::<T>(0.5)
            * (m[0][0] * qd[0] * qd[0] + lit::<T>(2.0) * m[0][1] * qd[0] * qd[1] + m[1][1] * qd[1] * qd[1])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArmModel<T> {
    /// Independent joints `q'' = u - b q'`.
    DoubleIntegrator { damping: T },
    TwoLink(TwoLinkParams<T>),
}

impl<T: Scalar> Default for ArmModel<T> {
    fn default() -> Self {
        ArmModel::DoubleIntegrator { damping: lit(0.5) }
    }
}

/// One RK4 step of the arm. Blocked joints keep their position and have zero velocity.
pub fn arm_step<T: Scalar>(state: &PlantState<T>, u: &[T], dt: T, model: &ArmModel<T>) -> Result<PlantState<T>> {
    let n = state.n_joints();
    if u.len() != n {
        return Err(contract(format!("action has {} entries, expected {n}", u.len())));
    }
    let blocked = &state.blocked;
    let mut x = state.q.clone();
    x.extend_from_slice(&state.q_dot);
    let y = match model {
        ArmModel::DoubleIntegrator { damping } => rk4_step(&x, dt, |s| {
            let mut d = vec![T::zero(); 2 * n];
            for j in (0..n).filter(|&j| !blocked[j]) {
                d[j] = s[n + j];
                d[n + j] = u[j] - *damping * s[n + j];
            }
            d
        }),
        ArmModel::TwoLink(p) => {
            if n != 2 {
                return Err(contract("two-link arm requires 2 joints"));
            }
            rk4_step(&x, dt, |s| {
                let acc = p.acceleration(&s[..2], &s[2..], u);
                let mut d = vec![s[2], s[3], acc[0], acc[1]];
                for j in (0..2).filter(|&j| blocked[j]) {
                    d[j] = T::zero();
                    d[2 + j] = T::zero();
                }
                d
            })
        }
    };
    let mut next = state.clone();
    next.t = state.t + dt.to_f64().unwrap_or(f64::NAN);
    for j in 0..n {
        if blocked[j] {
            next.q_dot[j] = T::zero();
        } else {
            next.q[j] = y[j];
            next.q_dot[j] = y[n + j];
        }
    }
    Ok(next)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorModel<T> {
    pub noise_std_pos: T,
    pub noise_std_vel: T,
    pub seed: u64,
}

impl<T: Scalar> SensorModel<T> {
    pub fn noiseless() -> Self {
        Self {
            noise_std_pos: T::zero(),
            noise_std_vel: T::zero(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_std_pos >= T::zero() && self.noise_std_vel >= T::zero()) {
            return Err(contract("sensor noise std must be >= 0"));
        }
        Ok(())
    }
}

/// Position and velocity encoders with seeded zero-mean Gaussian noise.
#[derive(Clone, Debug)]
pub struct Sensors<T> {
    pub model: SensorModel<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> Sensors<T>
where
    StandardNormal: Distribution<T>,
{
    pub fn new(model: SensorModel<T>) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(model.seed);
        Self { model, rng }
    }

    /// `y = q + e_pos`, `y' = q' + e_vel`. Draws one position then one velocity
    /// sample per joint, in joint order.
    pub fn sense(&mut self, state: &PlantState<T>) -> Observation<T> {
        let n = state.n_joints();
        let mut y = Vec::with_capacity(n);
        let mut yp = Vec::with_capacity(n);
        for j in 0..n {
            let ep: T = StandardNormal.sample(&mut self.rng);
            let ev: T = StandardNormal.sample(&mut self.rng);
            y.push(state.q[j] + self.model.noise_std_pos * ep);
            yp.push(state.q_dot[j] + self.model.noise_std_vel * ev);
        }
        Observation::new(y, yp, state.t)
    }
}

/// A blocking collision on every joint over `[start, start + duration)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionScript<T> {
    pub start: f64,
    pub duration: f64,
    /// Positions enforced during the block; joints freeze where they are when `None`.
    pub hold_positions: Option<Vec<T>>,
}

impl<T: Scalar> CollisionScript<T> {
    pub fn new(start: f64, duration: f64) -> Self {
        Self {
            start,
            duration,
            hold_positions: None,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn active_at(&self, t: f64) -> bool {
        t >= self.start && t < self.end()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0) || !self.start.is_finite() {
            return Err(contract("collision duration must be >= 0 and start finite"));
        }
        Ok(())
    }
}

/// Sets or clears the blocked flags for the plant's current time.
pub fn apply_collision<T: Scalar>(state: &PlantState<T>, script: &CollisionScript<T>) -> PlantState<T> {
    let mut next = state.clone();
    let active = script.active_at(state.t);
    for j in 0..next.n_joints() {
        next.blocked[j] = active;
        if active {
            next.q_dot[j] = T::zero();
            if let Some(hold) = &script.hold_positions {
                next.q[j] = hold[j];
            }
        }
    }
    next
}
