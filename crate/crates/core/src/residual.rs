//! Consistency residuals against the Green–Naghdi and Boussinesq systems,
//! log-log order fits, and model-error series.

use crate::error::{Error, Result};
use crate::evolve::{BoussinesqState, Trajectory};
use crate::params::WaveSpeedField;
use crate::reconstruct::PairSeries;
use crate::scalar::{lit, Scalar};
use crate::spectral::{Field, Grid};
use serde::{Deserialize, Serialize};

/// Which reference system the residuals are taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSystem {
    GreenNaghdi,
    Boussinesq,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions<T> {
    /// Sobolev index for the `H^s` norms.
    pub s: T,
    /// Divisor applied to the reported (normalized) norms.
    pub normalization: T,
    /// Differentiate with the edge ramp removed, for fields that settle to
    /// different constants at the two ends (reconstructions with a secular
    /// integral).
    pub tailed: bool,
}

impl<T: Scalar> ResidualOptions<T> {
    /// Normalization `mu^2`, `s = 1`, tailed derivatives.
    pub fn mu_squared(mu: T) -> Self {
        ResidualOptions { s: T::one(), normalization: mu * mu, tailed: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<T> {
    pub system: ReferenceSystem,
    pub times: Vec<T>,
    /// Un-normalized `sup_x |r1|` and `sup_x |r2|` per sampled time.
    pub r1_series: Vec<T>,
    pub r2_series: Vec<T>,
    /// Normalized sup norms over all sampled times and nodes.
    pub r1_sup: T,
    pub r2_sup: T,
    /// Normalized `H^s` norms, maximised over sampled times.
    pub r1_hs: T,
    pub r2_hs: T,
    pub s: T,
    pub normalization: T,
}

impl<T: Scalar> ResidualReport<T> {
    /// Un-normalized sup of `r1` and `r2` combined (their maximum).
    pub fn raw_sup(&self) -> T {
        (self.r1_sup.max(self.r2_sup)) * self.normalization
    }

    pub fn raw_r1(&self) -> T {
        self.r1_sup * self.normalization
    }

    pub fn raw_r2(&self) -> T {
        self.r2_sup * self.normalization
    }
}

/// Pointwise residual fields at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFields<T> {
    pub r1: Field<T>,
    pub r2: Field<T>,
}

fn depth<T: Scalar>(grid: &Grid<T>, speed: &WaveSpeedField<T>, zeta: &Field<T>, eps: T) -> Result<Field<T>> {
    let h = speed.c.zip_map(zeta, |c, z| c * c + eps * z);
    if let Some((j, &v)) = h.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
        return Err(Error::BlowDown { index: j, x: grid.x(j).to_f64_lossy(), value: v.to_f64_lossy() });
    }
    Ok(h)
}

/// Un-normalized residual fields at one instant.
///
/// Green–Naghdi: `r1 = zeta_t + (h u)_x`,
/// `r2 = u_t + zeta_x + eps u u_x - (mu/(3h)) (h^3 (u_xt + eps u u_xx - eps u_x^2))_x`.
/// Boussinesq: same `r1`, `r2 = u_t + zeta_x + eps u u_x - (mu/3) c^4 u_xxt`.
#[allow(clippy::too_many_arguments)]
pub fn residual_fields<T: Scalar>(
    grid: &Grid<T>,
    system: ReferenceSystem,
    zeta: &Field<T>,
    zeta_t: &Field<T>,
    u: &Field<T>,
    u_t: &Field<T>,
    eps: T,
    mu: T,
    speed: &WaveSpeedField<T>,
    tailed: bool,
) -> Result<ResidualFields<T>> {
    for f in [zeta, zeta_t, u, u_t] {
        grid.check(f)?;
    }
    let d = |f: &Field<T>, k: u32| if tailed { grid.derivative_tailed(f, k) } else { grid.derivative(f, k) };
    let h = depth(grid, speed, zeta, eps)?;
    let n = grid.n();
    let r1 = zeta_t.add(&d(&h.mul(u), 1));
    let zx = d(zeta, 1);
    let ux = d(u, 1);
    let base: Field<T> = Field::new((0..n).map(|j| u_t[j] + zx[j] + eps * u[j] * ux[j]).collect());
    let third = mu / lit(3.0);
    let r2 = match system {
        ReferenceSystem::GreenNaghdi => {
            let uxx = d(u, 2);
            let uxt = d(u_t, 1);
            let inner = Field::new(
                (0..n)
                    .map(|j| h[j].powi(3) * (uxt[j] + eps * u[j] * uxx[j] - eps * ux[j] * ux[j]))
                    .collect(),
            );
            let flux = d(&inner, 1);
            Field::new((0..n).map(|j| base[j] - third / h[j] * flux[j]).collect())
        }
        ReferenceSystem::Boussinesq => {
            let uxxt = d(u_t, 2);
            Field::new((0..n).map(|j| base[j] - third * speed.c[j].powi(4) * uxxt[j]).collect())
        }
    };
    Ok(ResidualFields { r1, r2 })
}

/// Residual report over every instant of `pairs`.
pub fn residuals<T: Scalar>(
    grid: &Grid<T>,
    system: ReferenceSystem,
    pairs: &PairSeries<T>,
    eps: T,
    mu: T,
    speed: &WaveSpeedField<T>,
    opts: &ResidualOptions<T>,
) -> Result<ResidualReport<T>> {
    if !(opts.normalization > T::zero()) {
        return Err(Error::InvalidInput("residual normalization must be positive".into()));
    }
    if pairs.is_empty() {
        return Err(Error::MissingRhs);
    }
    let mut report = ResidualReport {
        system,
        times: pairs.times.clone(),
        r1_series: vec![],
        r2_series: vec![],
        r1_sup: T::zero(),
        r2_sup: T::zero(),
        r1_hs: T::zero(),
        r2_hs: T::zero(),
        s: opts.s,
        normalization: opts.normalization,
    };
    for i in 0..pairs.len() {
        let r = residual_fields(
            grid,
            system,
            &pairs.zeta[i],
            &pairs.zeta_t[i],
            &pairs.u[i],
            &pairs.u_t[i],
            eps,
            mu,
            speed,
            opts.tailed,
        )?;
        let (s1, s2) = (r.r1.sup_norm(), r.r2.sup_norm());
        report.r1_series.push(s1);
        report.r2_series.push(s2);
        report.r1_sup = report.r1_sup.max(s1 / opts.normalization);
        report.r2_sup = report.r2_sup.max(s2 / opts.normalization);
        report.r1_hs = report.r1_hs.max(grid.hs_norm(&r.r1, opts.s) / opts.normalization);
        report.r2_hs = report.r2_hs.max(grid.hs_norm(&r.r2, opts.s) / opts.normalization);
    }
    Ok(report)
}

/// Residuals against the Green–Naghdi system.
pub fn gn_residuals<T: Scalar>(
    grid: &Grid<T>,
    pairs: &PairSeries<T>,
    eps: T,
    mu: T,
    speed: &WaveSpeedField<T>,
    opts: &ResidualOptions<T>,
) -> Result<ResidualReport<T>> {
    residuals(grid, ReferenceSystem::GreenNaghdi, pairs, eps, mu, speed, opts)
}

/// Residuals against the Boussinesq system.
pub fn bouss_residuals<T: Scalar>(
    grid: &Grid<T>,
    pairs: &PairSeries<T>,
    eps: T,
    mu: T,
    speed: &WaveSpeedField<T>,
    opts: &ResidualOptions<T>,
) -> Result<ResidualReport<T>> {
    residuals(grid, ReferenceSystem::Boussinesq, pairs, eps, mu, speed, opts)
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
}

impl OrderFit {
    pub fn slope_within(&self, lo: f64, hi: f64) -> bool {
        self.slope >= lo && self.slope <= hi
    }
}

pub fn order_fit<T: Scalar>(abscissa: &[T], values: &[T]) -> Result<OrderFit> {
    if abscissa.len() != values.len() || abscissa.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 paired points, got {} abscissae and {} values",
            abscissa.len(),
            values.len()
        )));
    }
    let xs: Vec<f64> = abscissa.iter().map(|v| v.to_f64_lossy()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.to_f64_lossy()).collect();
    if xs.iter().chain(&ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateFit("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-24 * m {
        return Err(Error::DegenerateFit("abscissae are not distinct".into()));
    }
    let slope = sxy / sxx;
    let correlation = if syy > 0.0 { sxy / (sxx * syy).sqrt() } else { 1.0 };
    Ok(OrderFit { abscissa: xs, values: ys, slope, intercept: my - slope * mx, correlation })
}

/// `sup |zeta_a - zeta_b|` and `sup |u_a - u_b|` at each common time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelErrorSeries<T> {
    pub times: Vec<T>,
    pub zeta_diff: Vec<T>,
    pub u_diff: Vec<T>,
}

impl<T: Scalar> ModelErrorSeries<T> {
    /// `zeta_diff + u_diff` at each time.
    pub fn combined(&self) -> Vec<T> {
        self.zeta_diff.iter().zip(&self.u_diff).map(|(a, b)| *a + *b).collect()
    }

    /// Combined difference at the time closest to `t`.
    pub fn at(&self, t: T) -> Option<T> {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (*a.1 - t).abs().partial_cmp(&(*b.1 - t).abs()).unwrap_or(std::cmp::Ordering::Equal))?
            .0;
        Some(self.zeta_diff[i] + self.u_diff[i])
    }
}

/// Compares a unidirectional pair with a Boussinesq trajectory saved at
/// the same instants.
pub fn model_error_vs_boussinesq<T: Scalar>(
    grid: &Grid<T>,
    unidirectional: &PairSeries<T>,
    bouss: &Trajectory<T, BoussinesqState<T>>,
) -> Result<ModelErrorSeries<T>> {
    if unidirectional.len() != bouss.len() {
        return Err(Error::GridMismatch(format!(
            "{} unidirectional samples against {} Boussinesq samples",
            unidirectional.len(),
            bouss.len()
        )));
    }
    let mut out = ModelErrorSeries { times: vec![], zeta_diff: vec![], u_diff: vec![] };
    let tol = lit::<T>(1e-9) * (T::one() + bouss.final_time());
    for i in 0..bouss.len() {
        if (unidirectional.times[i] - bouss.times[i]).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "sample {i} at t={} against t={}",
                unidirectional.times[i], bouss.times[i]
            )));
        }
        let b = &bouss.states[i];
        grid.check(&b.zeta)?;
        grid.check(&unidirectional.zeta[i])?;
        out.times.push(bouss.times[i]);
        out.zeta_diff.push(unidirectional.zeta[i].sub(&b.zeta).sup_norm());
        out.u_diff.push(unidirectional.u[i].sub(&b.u).sup_norm());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{BathymetryProfile, RegimeParams};
    use std::f64::consts::PI;

    #[test]
    fn zero_pair_has_zero_residuals() {
        let g = Grid::new(64, 10.0).unwrap();
        let z = g.zeros();
        let pairs = PairSeries {
            times: vec![0.0],
            zeta: vec![z.clone()],
            zeta_t: vec![z.clone()],
            u: vec![z.clone()],
            u_t: vec![z.clone()],
        };
        for sys in [ReferenceSystem::GreenNaghdi, ReferenceSystem::Boussinesq] {
            let r = residuals(&g, sys, &pairs, 0.1, 0.1, &WaveSpeedField::flat(64), &ResidualOptions::mu_squared(0.1))
                .unwrap();
            assert_eq!(r.r1_sup + r.r2_sup + r.r1_hs + r.r2_hs, 0.0);
        }
    }

    /// Manufactured pair: time derivatives chosen to make the residual equal
    /// a prescribed forcing, computed independently with analytic derivatives.
    #[test]
    fn manufactured_forcing_is_recovered() {
        let l = 2.0 * PI;
        let g = Grid::new(128, l).unwrap();
        let (eps, mu) = (0.2, 0.05);
        let k = 1.0;
        let zeta = Field::from_fn(&g, |x| 0.3 * (k * x).sin());
        let u = Field::from_fn(&g, |x| 0.2 * (k * x).cos());
        let forcing1 = Field::from_fn(&g, |x| 0.01 * (2.0 * k * x).cos());
        // zeta_t chosen so that r1 = forcing1 with flat bottom: h u = (1 + eps zeta) u
        let hu_x = Field::from_fn(&g, |x| {
            let z = 0.3 * (k * x).sin();
            let zx = 0.3 * k * (k * x).cos();
            let uu = 0.2 * (k * x).cos();
            let ux = -0.2 * k * (k * x).sin();
            eps * zx * uu + (1.0 + eps * z) * ux
        });
        let zeta_t = forcing1.sub(&hu_x);
        // u_t = 0: r2 for Boussinesq is zeta_x + eps u u_x
        let u_t = g.zeros();
        let r = residual_fields(
            &g,
            ReferenceSystem::Boussinesq,
            &zeta,
            &zeta_t,
            &u,
            &u_t,
            eps,
            mu,
            &WaveSpeedField::flat(128),
            false,
        )
        .unwrap();
        assert!(r.r1.sub(&forcing1).sup_norm() < 1e-12);
        let r2_oracle = Field::from_fn(&g, |x| {
            0.3 * k * (k * x).cos() + eps * 0.2 * (k * x).cos() * (-0.2 * k * (k * x).sin())
        });
        assert!(r.r2.sub(&r2_oracle).sup_norm() < 1e-12);
    }

    #[test]
    fn gn_residual_of_a_linear_mode_matches_analytic_value() {
        let l = 2.0 * PI;
        let g = Grid::new(128, l).unwrap();
        let (eps, mu) = (0.0, 0.1);
        let k = 2.0;
        let u = Field::from_fn(&g, |x| (k * x).sin());
        let u_t = Field::from_fn(&g, |x| (k * x).cos());
        let z = g.zeros();
        let r = residual_fields(&g, ReferenceSystem::GreenNaghdi, &z, &z, &u, &u_t, eps, mu, &WaveSpeedField::flat(128), false)
            .unwrap();
        // r2 = u_t - (mu/3) u_xxt with h = 1
        let oracle = Field::from_fn(&g, |x| (1.0 + mu / 3.0 * k * k) * (k * x).cos());
        assert!(r.r2.sub(&oracle).sup_norm() < 1e-11);
    }

    #[test]
    fn translation_invariance() {
        let g = Grid::new(256, 20.0).unwrap();
        let p = RegimeParams::new(0.1, 0.2, 1.0, 0.05).unwrap();
        let s = WaveSpeedField::from_profile(&g, &BathymetryProfile::GaussianBump { center: 0.0, width: 3.0 }, &p, 0.1)
            .unwrap();
        let f = |x0: f64, a: f64| Field::from_fn(&g, move |x| a * (-(x - x0) * (x - x0)).exp());
        let (zeta, zt, u, ut) = (f(-2.0, 0.5), f(-1.0, 0.2), f(-2.5, 0.4), f(-1.5, 0.1));
        let base = residual_fields(&g, ReferenceSystem::GreenNaghdi, &zeta, &zt, &u, &ut, 0.1, 0.05, &s, false).unwrap();
        let shift = 17;
        let sh = |x: &Field<f64>| x.shifted(shift);
        let s2 = WaveSpeedField {
            c: sh(&s.c),
            c_x: sh(&s.c_x),
            c_xx: sh(&s.c_xx),
            c_xxx: sh(&s.c_xxx),
            c0_floor: s.c0_floor,
            beta_b: sh(&s.beta_b),
        };
        let moved =
            residual_fields(&g, ReferenceSystem::GreenNaghdi, &sh(&zeta), &sh(&zt), &sh(&u), &sh(&ut), 0.1, 0.05, &s2, false)
                .unwrap();
        assert!(moved.r1.sub(&sh(&base.r1)).sup_norm() < 1e-10);
        assert!(moved.r2.sub(&sh(&base.r2)).sup_norm() < 1e-10);
    }

    #[test]
    fn synthetic_order_fits() {
        let mus = [0.08, 0.04, 0.02, 0.01];
        let quad: Vec<f64> = mus.iter().map(|m| 3.0 * m * m).collect();
        let lin: Vec<f64> = mus.iter().map(|m| 0.5 * m).collect();
        assert!((order_fit(&mus, &quad).unwrap().slope - 2.0).abs() < 1e-12);
        assert!((order_fit(&mus, &lin).unwrap().slope - 1.0).abs() < 1e-12);
        assert!(order_fit(&mus[..2], &quad[..2]).is_err());
        assert!(order_fit(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]).is_err());
        assert!(order_fit(&[0.1, 0.2, 0.3], &[1.0, 0.0, 3.0]).is_err());
    }

    #[test]
    fn model_error_of_identical_runs_is_zero() {
        let g = Grid::new(64, 10.0).unwrap();
        let z = Field::from_fn(&g, |x: f64| (-x * x).exp());
        let pairs = PairSeries {
            times: vec![0.0, 1.0],
            zeta: vec![z.clone(), z.clone()],
            zeta_t: vec![z.clone(), z.clone()],
            u: vec![z.clone(), z.clone()],
            u_t: vec![z.clone(), z.clone()],
        };
        let st = BoussinesqState { zeta: z.clone(), u: z.clone() };
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![st.clone(), st.clone()],
            rhs: vec![st.clone(), st],
            dt: 0.1,
            steps: 10,
            stopped_early: false,
        };
        let e = model_error_vs_boussinesq(&g, &pairs, &traj).unwrap();
        assert_eq!(e.combined(), vec![0.0, 0.0]);
        let mut bad = traj.clone();
        bad.times[1] = 2.0;
        assert!(matches!(model_error_vs_boussinesq(&g, &pairs, &bad), Err(Error::GridMismatch(_))));
    }
}
