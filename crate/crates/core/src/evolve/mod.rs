//! Time integration of the unidirectional models and the Boussinesq system.
//!
//! Every model exposes its semidiscrete right-hand side through [`Model`];
//! [`evolve`] steps it and stores the exact time derivative next to each
//! saved state, so downstream diagnostics never finite-difference in time.

mod bouss;
mod general;
mod kdv;

pub use bouss::{rhs_boussinesq, BoussinesqModel, BoussinesqState, EllipticSettings};
pub use general::{rhs_general, GeneralModel, GeneralModelSpec};
pub use kdv::{rhs_kdv_top, KdvTopModel, KdvTopSpec, KdvVariant};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};
use crate::spectral::Field;
use std::ops::ControlFlow;

/// Vector-space operations an evolved state needs.
pub trait State<T: Scalar>: Clone + Send + Sync {
    /// `self += a x`
    fn axpy(&mut self, a: T, x: &Self);
    fn scale_mut(&mut self, a: T);
    fn sup_norm(&self) -> T;
    fn is_finite(&self) -> bool;
}

impl<T: Scalar> State<T> for Field<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        Field::axpy(self, a, x)
    }
    fn scale_mut(&mut self, a: T) {
        self.iter_mut().for_each(|v| *v *= a);
    }
    fn sup_norm(&self) -> T {
        Field::sup_norm(self)
    }
    fn is_finite(&self) -> bool {
        Field::is_finite(self)
    }
}

/// A semidiscrete evolution equation `y_t = rhs(y)`.
pub trait Model<T: Scalar>: Send + Sync {
    type State: State<T>;

    fn rhs(&self, state: &Self::State) -> Result<Self::State>;

    /// One step of size `dt`; classical RK4 unless the model overrides it.
    fn step(&self, state: &Self::State, dt: T) -> Result<Self::State> {
        rk4_step(self, state, dt)
    }

    /// Largest step the linear part tolerates, if the model can bound it.
    fn max_stable_dt(&self) -> Option<T> {
        None
    }

    /// Step bound linearised about `state`; the linear bound unless overridden.
    fn stable_dt_at(&self, _state: &Self::State) -> Option<T> {
        self.max_stable_dt()
    }
}

pub fn rk4_step<T: Scalar, M: Model<T> + ?Sized>(model: &M, y: &M::State, dt: T) -> Result<M::State> {
    let half = dt / lit(2.0);
    let k1 = model.rhs(y)?;
    let mut y2 = y.clone();
    y2.axpy(half, &k1);
    let k2 = model.rhs(&y2)?;
    let mut y3 = y.clone();
    y3.axpy(half, &k2);
    let k3 = model.rhs(&y3)?;
    let mut y4 = y.clone();
    y4.axpy(dt, &k3);
    let k4 = model.rhs(&y4)?;
    let sixth = dt / lit(6.0);
    let third = dt / lit(3.0);
    let mut out = y.clone();
    out.axpy(sixth, &k1);
    out.axpy(third, &k2);
    out.axpy(third, &k3);
    out.axpy(sixth, &k4);
    Ok(out)
}

/// `D rhs(y)[v]` by a central difference of step `h`; exact when the
/// right-hand side is at most quadratic in the state.
pub fn rhs_directional<T: Scalar, M: Model<T> + ?Sized>(
    model: &M,
    y: &M::State,
    v: &M::State,
    h: T,
) -> Result<M::State> {
    let mut plus = y.clone();
    plus.axpy(h, v);
    let mut minus = y.clone();
    minus.axpy(-h, v);
    let mut out = model.rhs(&plus)?;
    out.axpy(-T::one(), &model.rhs(&minus)?);
    out.scale_mut(T::one() / (lit::<T>(2.0) * h));
    Ok(out)
}

/// Saved states with their exact time derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T, S> {
    pub times: Vec<T>,
    pub states: Vec<S>,
    /// `rhs(states[i])`, the semidiscrete time derivative at `times[i]`.
    pub rhs: Vec<S>,
    /// Step actually used (the requested step shrunk to divide the horizon).
    pub dt: T,
    /// Number of steps taken.
    pub steps: usize,
    /// Set when an observer ended the run before the horizon.
    pub stopped_early: bool,
}

impl<T: Scalar, S> Trajectory<T, S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(&T, &S)> {
        self.times.last().zip(self.states.last())
    }

    pub fn final_time(&self) -> T {
        self.times.last().copied().unwrap_or_else(T::zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions<T> {
    pub t_final: T,
    pub dt: T,
    /// Number of saved intervals; states are kept every `steps / samples` steps.
    pub samples: usize,
    /// Abort when the sup norm exceeds this multiple of its initial value.
    pub growth_guard: T,
    /// Refuse steps above the model's declared stability bound.
    pub enforce_stability: bool,
}

impl<T: Scalar> EvolveOptions<T> {
    pub fn new(t_final: T, dt: T, samples: usize) -> Self {
        EvolveOptions { t_final, dt, samples, growth_guard: lit(1e6), enforce_stability: true }
    }
}

/// Progress passed to observers after each accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo<T> {
    pub step: usize,
    pub time: T,
}

pub fn evolve<T: Scalar, M: Model<T>>(
    model: &M,
    initial: M::State,
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T, M::State>> {
    evolve_observed(model, initial, opts, |_, _| ControlFlow::Continue(()))
}

/// Like [`evolve`], calling `observer` after every step; returning
/// `ControlFlow::Break` ends the run and saves the current state.
pub fn evolve_observed<T, M, F>(
    model: &M,
    initial: M::State,
    opts: &EvolveOptions<T>,
    mut observer: F,
) -> Result<Trajectory<T, M::State>>
where
    T: Scalar,
    M: Model<T>,
    F: FnMut(StepInfo<T>, &M::State) -> ControlFlow<()>,
{
    if !(opts.t_final >= T::zero()) || !(opts.dt > T::zero()) || opts.samples == 0 {
        return Err(Error::InvalidInput(format!(
            "need t_final >= 0, dt > 0, samples >= 1 (got {}, {}, {})",
            opts.t_final, opts.dt, opts.samples
        )));
    }
    let steps = (opts.t_final / opts.dt).ceil().to_usize().unwrap_or(0);
    let dt = if steps == 0 { opts.dt } else { opts.t_final / from_usize(steps) };
    if opts.enforce_stability {
        if let Some(bound) = model.stable_dt_at(&initial) {
            if dt > bound {
                return Err(Error::InvalidInput(format!(
                    "time step {dt:e} exceeds the stability bound {bound:e}"
                )));
            }
        }
    }
    if !initial.is_finite() {
        return Err(Error::NumericalFailure { step: 0 });
    }
    let stride = (steps / opts.samples).max(1);
    let reference = initial.sup_norm().max(T::min_positive_value());

    let mut traj = Trajectory {
        times: vec![T::zero()],
        rhs: vec![model.rhs(&initial)?],
        states: vec![initial],
        dt,
        steps: 0,
        stopped_early: false,
    };
    let mut state = traj.states[0].clone();
    for step in 1..=steps {
        state = model.step(&state, dt)?;
        if !state.is_finite() {
            return Err(Error::NumericalFailure { step });
        }
        let growth = state.sup_norm() / reference;
        if growth > opts.growth_guard {
            return Err(Error::Instability { step, growth: growth.to_f64_lossy() });
        }
        let time = if step == steps { opts.t_final } else { from_usize::<T>(step) * dt };
        traj.steps = step;
        let flow = observer(StepInfo { step, time }, &state);
        let stop = flow.is_break();
        if step % stride == 0 || step == steps || stop {
            traj.rhs.push(model.rhs(&state)?);
            traj.times.push(time);
            traj.states.push(state.clone());
        }
        if stop {
            traj.stopped_early = step != steps;
            break;
        }
    }
    Ok(traj)
}
