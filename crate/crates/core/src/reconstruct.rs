//! Recovering the second unknown from the evolved one.
//!
//! Each variant is an explicit formula in the evolved field, its spatial
//! derivatives and (for the CH formulas) its time derivative. The `Full`
//! variants carry the secular term `int_{-inf}^x c_x (.)`, evaluated with a
//! left-anchored antiderivative; the `Hs` variants drop it.
//!
//! Besides the value, [`reconstruct_jet`] returns the exact time derivative
//! of the reconstructed field by differentiating the formula, given the
//! evolved field's first (and, for CH formulas, second) time derivative.

use crate::error::{Error, Result};
use crate::evolve::{rhs_directional, Model, Trajectory};
use crate::params::WaveSpeedField;
use crate::scalar::{lit, Scalar};
use crate::spectral::{Field, Grid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionVariant {
    /// `zeta = c u + (1/2) int c_x u + (eps/4) u^2 + (mu/6) c^4 u_xt
    ///        - eps mu c^4 [(1/6) u u_xx + (5/48) u_x^2]`
    ChZetaFromUFull,
    /// As above without the integral.
    ChZetaFromUHs,
    /// `u = (1/c)(zeta + c^2/(c^2 + eps zeta) (-(1/2) int (c_x/c) zeta
    ///      - eps zeta^2/(4c^2) - eps^2 zeta^3/(8c^4) + 3 eps^3 zeta^4/(64 c^6)
    ///      - (mu/6) c^3 zeta_xt + eps mu c^2 [(1/6) zeta zeta_xx + (1/48) zeta_x^2]))`
    ChUFromZetaFull,
    /// As above without the integral.
    ChUFromZetaHs,
    /// `u = (1/c)(zeta - (1/2) int (c_x/c) zeta - eps zeta^2/(4c^2) + (mu/6) c^4 zeta_xx)`
    KdvUFromZetaFull,
    /// As above without the integral.
    KdvUFromZetaHs,
    /// `zeta = c u + (1/2) int c_x u + (eps/4) u^2 - (mu/6) c^5 u_xx`
    KdvZetaFromUFull,
    /// As above without the integral.
    KdvZetaFromUHs,
}

impl ReconstructionVariant {
    pub const ALL: [ReconstructionVariant; 8] = [
        ReconstructionVariant::ChZetaFromUFull,
        ReconstructionVariant::ChZetaFromUHs,
        ReconstructionVariant::ChUFromZetaFull,
        ReconstructionVariant::ChUFromZetaHs,
        ReconstructionVariant::KdvUFromZetaFull,
        ReconstructionVariant::KdvUFromZetaHs,
        ReconstructionVariant::KdvZetaFromUFull,
        ReconstructionVariant::KdvZetaFromUHs,
    ];

    /// True when the input is `u` and the output `zeta`.
    pub fn zeta_from_u(self) -> bool {
        use ReconstructionVariant::*;
        matches!(self, ChZetaFromUFull | ChZetaFromUHs | KdvZetaFromUFull | KdvZetaFromUHs)
    }

    pub fn has_integral(self) -> bool {
        use ReconstructionVariant::*;
        matches!(self, ChZetaFromUFull | ChUFromZetaFull | KdvUFromZetaFull | KdvZetaFromUFull)
    }

    /// CH formulas contain a mixed derivative `(.)_xt` of the input.
    pub fn needs_time_derivative(self) -> bool {
        use ReconstructionVariant::*;
        matches!(self, ChZetaFromUFull | ChZetaFromUHs | ChUFromZetaFull | ChUFromZetaHs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionSpec<T> {
    pub variant: ReconstructionVariant,
    pub eps: T,
    pub mu: T,
    /// Relative size allowed at the left edge for the integral term.
    pub decay_tol: T,
}

impl<T: Scalar> ReconstructionSpec<T> {
    pub fn new(variant: ReconstructionVariant, eps: T, mu: T) -> Self {
        ReconstructionSpec { variant, eps, mu, decay_tol: lit(1e-6) }
    }
}

/// A field with its first and optionally second time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    pub f: Field<T>,
    pub f_t: Field<T>,
    pub f_tt: Option<Field<T>>,
}

/// The reconstructed field and, when computable, its time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstructed<T> {
    pub value: Field<T>,
    pub value_t: Option<Field<T>>,
}

fn require<'a, T>(f: Option<&'a Field<T>>, what: &str) -> Result<&'a Field<T>> {
    f.ok_or_else(|| Error::InvalidInput(format!("this reconstruction needs {what}")))
}

/// `zeta` from `u`; `u_t` must be the evolver's time derivative for CH variants.
pub fn zeta_from_u<T: Scalar>(
    grid: &Grid<T>,
    u: &Field<T>,
    u_t: Option<&Field<T>>,
    spec: &ReconstructionSpec<T>,
    speed: &WaveSpeedField<T>,
) -> Result<Field<T>> {
    if !spec.variant.zeta_from_u() {
        return Err(Error::InvalidInput(format!("{:?} maps zeta to u", spec.variant)));
    }
    evaluate(grid, u, u_t, None, spec, speed).map(|r| r.value)
}

/// `u` from `zeta`; `zeta_t` must be the evolver's time derivative for CH variants.
pub fn u_from_zeta<T: Scalar>(
    grid: &Grid<T>,
    zeta: &Field<T>,
    zeta_t: Option<&Field<T>>,
    spec: &ReconstructionSpec<T>,
    speed: &WaveSpeedField<T>,
) -> Result<Field<T>> {
    if spec.variant.zeta_from_u() {
        return Err(Error::InvalidInput(format!("{:?} maps u to zeta", spec.variant)));
    }
    evaluate(grid, zeta, zeta_t, None, spec, speed).map(|r| r.value)
}

/// Reconstructed field and its time derivative.
///
/// The time derivative needs `jet.f_tt` for CH variants and is `None` if it
/// is missing.
pub fn reconstruct_jet<T: Scalar>(
    grid: &Grid<T>,
    jet: &Jet<T>,
    spec: &ReconstructionSpec<T>,
    speed: &WaveSpeedField<T>,
) -> Result<Reconstructed<T>> {
    evaluate(grid, &jet.f, Some(&jet.f_t), Some(jet), spec, speed)
}

fn evaluate<T: Scalar>(
    grid: &Grid<T>,
    f: &Field<T>,
    f_t: Option<&Field<T>>,
    jet: Option<&Jet<T>>,
    spec: &ReconstructionSpec<T>,
    speed: &WaveSpeedField<T>,
) -> Result<Reconstructed<T>> {
    use ReconstructionVariant::*;
    grid.check(f)?;
    grid.check(&speed.c)?;
    let (eps, mu) = (spec.eps, spec.mu);
    let n = grid.n();
    let c = &speed.c;
    let half = lit::<T>(0.5);
    let sixth = lit::<T>(1.0 / 6.0);
    let anti = |g: Field<T>| grid.antiderivative_from_left(&g, spec.decay_tol);
    let want_t = jet.is_some() && (!spec.variant.needs_time_derivative() || jet.and_then(|j| j.f_tt.as_ref()).is_some());

    let d = grid.derivatives(f, 2);
    let (fx, fxx) = (&d[0], &d[1]);

    match spec.variant {
        ChZetaFromUFull | ChZetaFromUHs => {
            let ut = require(f_t, "u_t")?;
            let dt = grid.derivatives(ut, 2);
            let (uxt, uxxt) = (&dt[0], &dt[1]);
            let mut value = Field::new(
                (0..n)
                    .map(|j| {
                        let c4 = c[j].powi(4);
                        c[j] * f[j] + eps / lit(4.0) * f[j] * f[j] + mu * sixth * c4 * uxt[j]
                            - eps * mu * c4 * (sixth * f[j] * fxx[j] + lit::<T>(5.0 / 48.0) * fx[j] * fx[j])
                    })
                    .collect(),
            );
            if spec.variant == ChZetaFromUFull {
                value.axpy(half, &anti(speed.c_x.mul(f))?);
            }
            let value_t = if want_t {
                let utt = jet.and_then(|j| j.f_tt.as_ref()).expect("checked above");
                let uxtt = grid.derivative(utt, 1);
                let mut zt = Field::new(
                    (0..n)
                        .map(|j| {
                            let c4 = c[j].powi(4);
                            c[j] * ut[j] + eps * half * f[j] * ut[j] + mu * sixth * c4 * uxtt[j]
                                - eps * mu
                                    * c4
                                    * (sixth * (ut[j] * fxx[j] + f[j] * uxxt[j])
                                        + lit::<T>(5.0 / 24.0) * fx[j] * uxt[j])
                        })
                        .collect(),
                );
                if spec.variant == ChZetaFromUFull {
                    zt.axpy(half, &anti(speed.c_x.mul(ut))?);
                }
                Some(zt)
            } else {
                None
            };
            Ok(Reconstructed { value, value_t })
        }
        KdvZetaFromUFull | KdvZetaFromUHs => {
            let mut value = Field::new(
                (0..n)
                    .map(|j| c[j] * f[j] + eps / lit(4.0) * f[j] * f[j] - mu * sixth * c[j].powi(5) * fxx[j])
                    .collect(),
            );
            if spec.variant == KdvZetaFromUFull {
                value.axpy(half, &anti(speed.c_x.mul(f))?);
            }
            let value_t = match (want_t, f_t) {
                (true, Some(ut)) => {
                    let uxxt = grid.derivative(ut, 2);
                    let mut zt = Field::new(
                        (0..n)
                            .map(|j| c[j] * ut[j] + eps * half * f[j] * ut[j] - mu * sixth * c[j].powi(5) * uxxt[j])
                            .collect(),
                    );
                    if spec.variant == KdvZetaFromUFull {
                        zt.axpy(half, &anti(speed.c_x.mul(ut))?);
                    }
                    Some(zt)
                }
                _ => None,
            };
            Ok(Reconstructed { value, value_t })
        }
        KdvUFromZetaFull | KdvUFromZetaHs => {
            let ratio = speed.c_x.zip_map(c, |cx, c| cx / c);
            let mut inner = Field::new(
                (0..n)
                    .map(|j| {
                        let c2 = c[j] * c[j];
                        f[j] - eps * f[j] * f[j] / (lit::<T>(4.0) * c2) + mu * sixth * c2 * c2 * fxx[j]
                    })
                    .collect(),
            );
            if spec.variant == KdvUFromZetaFull {
                inner.axpy(-half, &anti(ratio.mul(f))?);
            }
            let value = inner.zip_map(c, |v, c| v / c);
            let value_t = match (want_t, f_t) {
                (true, Some(zt)) => {
                    let zxxt = grid.derivative(zt, 2);
                    let mut it = Field::new(
                        (0..n)
                            .map(|j| {
                                let c2 = c[j] * c[j];
                                zt[j] - eps * f[j] * zt[j] / (lit::<T>(2.0) * c2) + mu * sixth * c2 * c2 * zxxt[j]
                            })
                            .collect(),
                    );
                    if spec.variant == KdvUFromZetaFull {
                        it.axpy(-half, &anti(ratio.mul(zt))?);
                    }
                    Some(it.zip_map(c, |v, c| v / c))
                }
                _ => None,
            };
            Ok(Reconstructed { value, value_t })
        }
        ChUFromZetaFull | ChUFromZetaHs => {
            let zt = require(f_t, "zeta_t")?;
            let dt = grid.derivatives(zt, 2);
            let (zxt, zxxt) = (&dt[0], &dt[1]);
            let denom = Field::new((0..n).map(|j| c[j] * c[j] + eps * f[j]).collect());
            if let Some((j, &v)) = denom.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
                return Err(Error::ReconstructionSingularity { index: j, value: v.to_f64_lossy() });
            }
            let ratio = speed.c_x.zip_map(c, |cx, c| cx / c);
            let e2 = eps * eps;
            let e3 = e2 * eps;
            let mut p = Field::new(
                (0..n)
                    .map(|j| {
                        let (z, c2) = (f[j], c[j] * c[j]);
                        let (c4, c6) = (c2 * c2, c2 * c2 * c2);
                        -eps * z * z / (lit::<T>(4.0) * c2) - e2 * z * z * z / (lit::<T>(8.0) * c4)
                            + lit::<T>(3.0) * e3 * z.powi(4) / (lit::<T>(64.0) * c6)
                            - mu * sixth * c2 * c[j] * zxt[j]
                            + eps * mu * c2 * (sixth * z * fxx[j] + lit::<T>(1.0 / 48.0) * fx[j] * fx[j])
                    })
                    .collect(),
            );
            if spec.variant == ChUFromZetaFull {
                p.axpy(-half, &anti(ratio.mul(f))?);
            }
            let value = Field::new(
                (0..n).map(|j| (f[j] + c[j] * c[j] / denom[j] * p[j]) / c[j]).collect(),
            );
            let value_t = if want_t {
                let ztt = jet.and_then(|j| j.f_tt.as_ref()).expect("checked above");
                let zxtt = grid.derivative(ztt, 1);
                let mut pt = Field::new(
                    (0..n)
                        .map(|j| {
                            let (z, c2) = (f[j], c[j] * c[j]);
                            let (c4, c6) = (c2 * c2, c2 * c2 * c2);
                            -eps * z * zt[j] / (lit::<T>(2.0) * c2)
                                - lit::<T>(3.0) * e2 * z * z * zt[j] / (lit::<T>(8.0) * c4)
                                + lit::<T>(3.0) * e3 * z * z * z * zt[j] / (lit::<T>(16.0) * c6)
                                - mu * sixth * c2 * c[j] * zxtt[j]
                                + eps * mu
                                    * c2
                                    * (sixth * (zt[j] * fxx[j] + z * zxxt[j]) + lit::<T>(1.0 / 24.0) * fx[j] * zxt[j])
                        })
                        .collect(),
                );
                if spec.variant == ChUFromZetaFull {
                    pt.axpy(-half, &anti(ratio.mul(zt))?);
                }
                Some(Field::new(
                    (0..n)
                        .map(|j| {
                            let c2 = c[j] * c[j];
                            let g = c2 / denom[j];
                            let g_t = -c2 * eps * zt[j] / (denom[j] * denom[j]);
                            (zt[j] + g_t * p[j] + g * pt[j]) / c[j]
                        })
                        .collect(),
                ))
            } else {
                None
            };
            Ok(Reconstructed { value, value_t })
        }
    }
}

/// Surface and velocity with their time derivatives at a sequence of times.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSeries<T> {
    pub times: Vec<T>,
    pub zeta: Vec<Field<T>>,
    pub zeta_t: Vec<Field<T>>,
    pub u: Vec<Field<T>>,
    pub u_t: Vec<Field<T>>,
}

impl<T: Scalar> PairSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Builds `(zeta, zeta_t, u, u_t)` at every saved time of a trajectory of
/// the evolved unknown.
///
/// The evolved field's time derivative comes from the trajectory cache.
/// When the formula needs a second time derivative, it is the directional
/// derivative of the model's right-hand side along the cached first
/// derivative, by a central difference of step `trajectory.dt`.
pub fn pair_series<T, M>(
    grid: &Grid<T>,
    trajectory: &Trajectory<T, Field<T>>,
    model: &M,
    spec: &ReconstructionSpec<T>,
    speed: &WaveSpeedField<T>,
) -> Result<PairSeries<T>>
where
    T: Scalar,
    M: Model<T, State = Field<T>>,
{
    if trajectory.rhs.len() != trajectory.states.len() {
        return Err(Error::MissingRhs);
    }
    let mut out = PairSeries { times: vec![], zeta: vec![], zeta_t: vec![], u: vec![], u_t: vec![] };
    for ((t, f), f_t) in trajectory.times.iter().zip(&trajectory.states).zip(&trajectory.rhs) {
        let f_tt = if spec.variant.needs_time_derivative() {
            Some(rhs_directional(model, f, f_t, trajectory.dt)?)
        } else {
            None
        };
        let jet = Jet { f: f.clone(), f_t: f_t.clone(), f_tt };
        let rec = reconstruct_jet(grid, &jet, spec, speed)?;
        let rec_t = rec.value_t.ok_or(Error::MissingRhs)?;
        out.times.push(*t);
        if spec.variant.zeta_from_u() {
            out.u.push(jet.f);
            out.u_t.push(jet.f_t);
            out.zeta.push(rec.value);
            out.zeta_t.push(rec_t);
        } else {
            out.zeta.push(jet.f);
            out.zeta_t.push(jet.f_t);
            out.u.push(rec.value);
            out.u_t.push(rec_t);
        }
    }
    Ok(out)
}
