//! Energies conserved or controlled by the breaking equation, the
//! sufficient condition for breaking, and an online surging detector.

use crate::params::WaveSpeedField;
use crate::scalar::{lit, Scalar};
use crate::spectral::{Field, Grid};
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;

/// `int zeta^2 + (mu/12) zeta_x^2`.
pub fn energy_low<T: Scalar>(grid: &Grid<T>, zeta: &Field<T>, mu: T) -> T {
    let zx = grid.derivative(zeta, 1);
    grid.l2_inner(zeta, zeta) + mu / lit(12.0) * grid.l2_inner(&zx, &zx)
}

/// `int zeta^2 + (mu/12) zeta_x^2 + zeta_xx^2 + (mu/12) zeta_xxx^2`.
pub fn energy_high<T: Scalar>(grid: &Grid<T>, zeta: &Field<T>, mu: T) -> T {
    let d = grid.derivatives(zeta, 3);
    let w = mu / lit(12.0);
    grid.l2_inner(zeta, zeta) + w * grid.l2_inner(&d[0], &d[0]) + grid.l2_inner(&d[1], &d[1])
        + w * grid.l2_inner(&d[2], &d[2])
}

/// Both sides of the sufficient condition for breaking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// `C0 > 0` and `lhs >= rhs` (with `C1` in the max convention).
    pub satisfied: bool,
    /// `(sup zeta0)^2`.
    pub lhs: f64,
    /// Right-hand side with `C1 = max(sup|c|, sup|c_x|)`.
    pub rhs: f64,
    /// Right-hand side with `C1 = sup|c| + sup|c_x|`.
    pub rhs_sum_convention: f64,
    pub c0: f64,
    pub c1_max: f64,
    pub c1_sum: f64,
}

/// `(sup zeta0)^2 >= (28/3) C0 mu^{-3/4} + (1/2) eps C0^{3/2} mu^{-3/4}
///   + (1/4) eps^2 C0^2 mu^{-3/4} + (7/3) C0 mu^{-1/2}
///   + (8/3) C0^{1/2} C1 mu^{-3/4}/eps + (4/3) C0^{1/2} C1 mu^{-3/4}/eps`
/// with `C0 = int zeta0^2 + (mu/12) zeta0_x^2` and `C1 = |c|_{W^{1,inf}}`.
///
/// The last two terms are kept separately as printed.
pub fn breaking_threshold<T: Scalar>(
    grid: &Grid<T>,
    zeta0: &Field<T>,
    eps: T,
    mu: T,
    speed: &WaveSpeedField<T>,
) -> ThresholdReport {
    let c0 = energy_low(grid, zeta0, mu).to_f64_lossy();
    let (sc, scx) = speed.w1inf_parts();
    let (sc, scx) = (sc.to_f64_lossy(), scx.to_f64_lossy());
    let (c1_max, c1_sum) = (sc.max(scx), sc + scx);
    let (eps, mu) = (eps.to_f64_lossy(), mu.to_f64_lossy());
    let sup = zeta0.max().to_f64_lossy();
    let lhs = sup * sup;
    let m34 = mu.powf(-0.75);
    let rhs_for = |c1: f64| {
        28.0 / 3.0 * c0 * m34
            + 0.5 * eps * c0.powf(1.5) * m34
            + 0.25 * eps * eps * c0 * c0 * m34
            + 7.0 / 3.0 * c0 / mu.sqrt()
            + 8.0 / 3.0 * c0.sqrt() * c1 * m34 / eps
            + 4.0 / 3.0 * c0.sqrt() * c1 * m34 / eps
    };
    let rhs = rhs_for(c1_max);
    ThresholdReport {
        satisfied: c0 > 0.0 && lhs >= rhs,
        lhs,
        rhs,
        rhs_sum_convention: rhs_for(c1_sum),
        c0,
        c1_max,
        c1_sum,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakingGuards {
    /// Surging is declared once `sup zeta_x` reaches this multiple of its initial value.
    pub slope_multiple: f64,
    /// ... provided `sup |zeta|` stays below this multiple of its initial value.
    pub amp_guard: f64,
}

impl Default for BreakingGuards {
    fn default() -> Self {
        BreakingGuards { slope_multiple: 20.0, amp_guard: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    NoBreakingByHorizon,
    SurgingBreaking { t_detect: f64 },
    /// The slope grew past the detection multiple but the amplitude guard was
    /// violated first, so the event does not fit the surging pattern.
    AmplitudeGuardViolated { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakingReport {
    pub times: Vec<f64>,
    pub sup_slope: Vec<f64>,
    pub sup_amp: Vec<f64>,
    pub classification: Classification,
    /// `max_t |E(t) - E(0)| / E(0)` for the low energy.
    pub energy_drift: f64,
    pub horizon: f64,
}

impl BreakingReport {
    pub fn t_detect(&self) -> Option<f64> {
        match self.classification {
            Classification::SurgingBreaking { t_detect } => Some(t_detect),
            _ => None,
        }
    }
}

/// Online observer for [`crate::evolve::evolve_observed`]: records slope,
/// amplitude and energy each step and stops the run on detection.
#[derive(Debug, Clone)]
pub struct BreakingMonitor<T: Scalar> {
    grid: Grid<T>,
    mu: T,
    guards: BreakingGuards,
    horizon: f64,
    slope0: f64,
    amp0: f64,
    energy0: f64,
    drift: f64,
    times: Vec<f64>,
    sup_slope: Vec<f64>,
    sup_amp: Vec<f64>,
    classification: Classification,
}

impl<T: Scalar> BreakingMonitor<T> {
    pub fn new(grid: &Grid<T>, zeta0: &Field<T>, mu: T, guards: BreakingGuards, horizon: T) -> Self {
        let slope0 = grid.derivative(zeta0, 1).max().to_f64_lossy();
        let amp0 = zeta0.sup_norm().to_f64_lossy();
        BreakingMonitor {
            grid: grid.clone(),
            mu,
            guards,
            horizon: horizon.to_f64_lossy(),
            slope0,
            amp0,
            energy0: energy_low(grid, zeta0, mu).to_f64_lossy(),
            drift: 0.0,
            times: vec![0.0],
            sup_slope: vec![slope0],
            sup_amp: vec![amp0],
            classification: Classification::NoBreakingByHorizon,
        }
    }

    pub fn observe(&mut self, t: T, zeta: &Field<T>) -> ControlFlow<()> {
        let slope = self.grid.derivative(zeta, 1).max().to_f64_lossy();
        let amp = zeta.sup_norm().to_f64_lossy();
        let t = t.to_f64_lossy();
        self.times.push(t);
        self.sup_slope.push(slope);
        self.sup_amp.push(amp);
        if self.energy0 > 0.0 {
            let e = energy_low(&self.grid, zeta, self.mu).to_f64_lossy();
            self.drift = self.drift.max((e - self.energy0).abs() / self.energy0);
        }
        if amp > self.guards.amp_guard * self.amp0 {
            self.classification = Classification::AmplitudeGuardViolated { t };
            return ControlFlow::Break(());
        }
        if self.slope0 > 0.0 && slope >= self.guards.slope_multiple * self.slope0 {
            self.classification = Classification::SurgingBreaking { t_detect: t };
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    }

    pub fn report(self) -> BreakingReport {
        BreakingReport {
            times: self.times,
            sup_slope: self.sup_slope,
            sup_amp: self.sup_amp,
            classification: self.classification,
            energy_drift: self.drift,
            horizon: self.horizon,
        }
    }
}

/// Offline version of [`BreakingMonitor`] over saved states.
pub fn monitor_breaking<T: Scalar>(
    grid: &Grid<T>,
    times: &[T],
    states: &[Field<T>],
    mu: T,
    guards: BreakingGuards,
    horizon: T,
) -> BreakingReport {
    let Some(first) = states.first() else {
        return BreakingReport {
            times: vec![],
            sup_slope: vec![],
            sup_amp: vec![],
            classification: Classification::NoBreakingByHorizon,
            energy_drift: 0.0,
            horizon: horizon.to_f64_lossy(),
        };
    };
    let mut m = BreakingMonitor::new(grid, first, mu, guards, horizon);
    for (t, z) in times.iter().zip(states).skip(1) {
        if m.observe(*t, z).is_break() {
            break;
        }
    }
    m.report()
}

/// Detection times under refinement agree with the finest one to `rel_tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementGate {
    pub t_detects: Vec<f64>,
    pub max_rel_change: f64,
    pub passed: bool,
}

/// `t_detects` ordered coarse to fine; `None` entries fail the gate.
pub fn refinement_gate(t_detects: &[Option<f64>], rel_tol: f64) -> RefinementGate {
    let found: Vec<f64> = t_detects.iter().flatten().copied().collect();
    if found.len() != t_detects.len() || found.is_empty() {
        return RefinementGate { t_detects: found, max_rel_change: f64::INFINITY, passed: false };
    }
    let finest = *found.last().expect("non-empty");
    let max_rel_change = found.iter().map(|t| (t - finest).abs() / finest).fold(0.0, f64::max);
    RefinementGate { t_detects: found, max_rel_change, passed: max_rel_change <= rel_tol }
}
