//! Nondimensional parameters, scaling-regime checks, bottom profiles and the
//! local long-wave speed `c = sqrt(1 - beta b(alpha x))`.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::spectral::{Field, Grid};
use serde::{Deserialize, Serialize};

/// The quadruple `(eps, beta, alpha, mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams<T> {
    /// Nonlinearity (amplitude over depth).
    pub eps: T,
    /// Topography amplitude over depth.
    pub beta: T,
    /// Ratio of wave length to topography length.
    pub alpha: T,
    /// Shallowness (depth over wave length, squared).
    pub mu: T,
}

impl<T: Scalar> RegimeParams<T> {
    pub fn new(eps: T, beta: T, alpha: T, mu: T) -> Result<Self> {
        let p = RegimeParams { eps, beta, alpha, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.eps > T::zero()
            && self.beta >= T::zero()
            && self.alpha > T::zero()
            && self.mu > T::zero()
            && self.mu <= T::one();
        if !ok || ![self.eps, self.beta, self.alpha, self.mu].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "parameters need eps>0, beta>=0, alpha>0, 0<mu<=1; got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn flat(eps: T, mu: T) -> Result<Self> {
        Self::new(eps, T::zero(), T::one(), mu)
    }
}

/// Which family of asymptotic size relations a parameter family must obey.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    /// `eps = O(sqrt mu)`, `beta alpha = O(eps)`, `beta alpha = O(mu)`,
    /// `beta alpha^2 = O(mu^2)`, `beta alpha eps = O(mu^2)`.
    ChConsistency,
    /// `eps = O(mu)`, `alpha beta = O(eps)`, `alpha^2 beta = O(eps^2)`.
    KdvConsistency,
    /// `eps = O(sqrt mu)`, `beta alpha = O(eps)`, `beta alpha = O(mu^2)`.
    ChJustified,
    /// `eps = O(mu)`, `beta alpha = O(eps^2)`.
    KdvJustified,
}

impl RegimeTag {
    /// Named ratios `lhs / rhs` whose boundedness encodes the regime.
    pub fn ratios<T: Scalar>(self, p: &RegimeParams<T>) -> Vec<(&'static str, T)> {
        let RegimeParams { eps, beta, alpha, mu } = *p;
        let ba = beta * alpha;
        match self {
            RegimeTag::ChConsistency => vec![
                ("eps/sqrt(mu)", eps / mu.sqrt()),
                ("beta*alpha/eps", ba / eps),
                ("beta*alpha/mu", ba / mu),
                ("beta*alpha^2/mu^2", ba * alpha / (mu * mu)),
                ("beta*alpha*eps/mu^2", ba * eps / (mu * mu)),
            ],
            RegimeTag::KdvConsistency => vec![
                ("eps/mu", eps / mu),
                ("beta*alpha/eps", ba / eps),
                ("beta*alpha^2/eps^2", ba * alpha / (eps * eps)),
            ],
            RegimeTag::ChJustified => vec![
                ("eps/sqrt(mu)", eps / mu.sqrt()),
                ("beta*alpha/eps", ba / eps),
                ("beta*alpha/mu^2", ba / (mu * mu)),
            ],
            RegimeTag::KdvJustified => vec![("eps/mu", eps / mu), ("beta*alpha/eps^2", ba / (eps * eps))],
        }
    }
}

/// A finite family standing in for an asymptotic one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeFamily<T> {
    pub members: Vec<RegimeParams<T>>,
    pub regime_tag: RegimeTag,
    /// Bound `K` on every `lhs/rhs` ratio.
    pub bound_constant: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck<T> {
    pub relation: &'static str,
    pub worst_ratio: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeDiagnostics<T> {
    pub relations: Vec<RelationCheck<T>>,
    pub pass: bool,
}

/// Worst ratio per relation over the family, compared against `K`.
pub fn check_regime<T: Scalar>(family: &RegimeFamily<T>) -> Result<RegimeDiagnostics<T>> {
    let first = family
        .members
        .first()
        .ok_or_else(|| Error::InvalidInput("regime family is empty".into()))?;
    let mut relations: Vec<RelationCheck<T>> = family
        .regime_tag
        .ratios(first)
        .into_iter()
        .map(|(relation, _)| RelationCheck { relation, worst_ratio: T::zero(), pass: true })
        .collect();
    for member in &family.members {
        member.validate()?;
        for (slot, (_, ratio)) in relations.iter_mut().zip(family.regime_tag.ratios(member)) {
            slot.worst_ratio = slot.worst_ratio.max(ratio);
        }
    }
    for r in &mut relations {
        r.pass = r.worst_ratio <= family.bound_constant;
    }
    let pass = relations.iter().all(|r| r.pass);
    Ok(RegimeDiagnostics { relations, pass })
}

/// Smooth bottom profile `b(y)` normalised to `sup |b| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BathymetryProfile {
    Flat,
    /// `exp(-((y - center)/width)^2)`
    GaussianBump { center: f64, width: f64 },
    /// `tanh((y - center)/width)`
    SmoothStep { center: f64, width: f64 },
    /// `sin(wavenumber * y + phase)`
    Sinusoid { wavenumber: f64, phase: f64 },
}

impl BathymetryProfile {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BathymetryProfile::GaussianBump { width, .. } | BathymetryProfile::SmoothStep { width, .. }
                if !(width > 0.0) =>
            {
                Err(Error::InvalidInput(format!("profile width must be positive, got {width}")))
            }
            BathymetryProfile::Sinusoid { wavenumber, .. } if wavenumber == 0.0 || !wavenumber.is_finite() => {
                Err(Error::InvalidInput("sinusoid wavenumber must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }

    /// `[b, b', b'', b''']` at `y`.
    pub fn eval<T: Scalar>(&self, y: T) -> [T; 4] {
        match *self {
            BathymetryProfile::Flat => [T::zero(); 4],
            BathymetryProfile::GaussianBump { center, width } => {
                let w = lit::<T>(width);
                let z = (y - lit(center)) / w;
                let e = (-z * z).exp();
                [
                    e,
                    lit::<T>(-2.0) * z * e / w,
                    (lit::<T>(4.0) * z * z - lit(2.0)) * e / (w * w),
                    (lit::<T>(-8.0) * z * z * z + lit::<T>(12.0) * z) * e / (w * w * w),
                ]
            }
            BathymetryProfile::SmoothStep { center, width } => {
                let w = lit::<T>(width);
                let t = ((y - lit(center)) / w).tanh();
                let s = T::one() - t * t;
                [
                    t,
                    s / w,
                    lit::<T>(-2.0) * t * s / (w * w),
                    s * (lit::<T>(6.0) * t * t - lit(2.0)) / (w * w * w),
                ]
            }
            BathymetryProfile::Sinusoid { wavenumber, phase } => {
                let k = lit::<T>(wavenumber);
                let arg = k * y + lit(phase);
                let (s, c) = (arg.sin(), arg.cos());
                [s, k * c, -k * k * s, -k * k * k * c]
            }
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, BathymetryProfile::Flat)
    }
}

/// `b(alpha x)` and its first three x-derivatives on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BathymetrySamples<T> {
    pub b: Field<T>,
    pub b_x: Field<T>,
    pub b_xx: Field<T>,
    pub b_xxx: Field<T>,
}

/// Samples `b^(alpha)(x) = b(alpha x)`; derivatives are analytic, so each
/// carries the chain-rule factor `alpha^k`.
pub fn sample_bathymetry<T: Scalar>(
    profile: &BathymetryProfile,
    alpha: T,
    grid: &Grid<T>,
) -> BathymetrySamples<T> {
    let n = grid.n();
    let mut out = BathymetrySamples {
        b: Field::zeros(n),
        b_x: Field::zeros(n),
        b_xx: Field::zeros(n),
        b_xxx: Field::zeros(n),
    };
    for (j, x) in grid.nodes().enumerate() {
        let [b, b1, b2, b3] = profile.eval(alpha * x);
        out.b[j] = b;
        out.b_x[j] = alpha * b1;
        out.b_xx[j] = alpha * alpha * b2;
        out.b_xxx[j] = alpha * alpha * alpha * b3;
    }
    out
}

/// `c = sqrt(1 - beta b^(alpha))` with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpeedField<T> {
    pub c: Field<T>,
    pub c_x: Field<T>,
    pub c_xx: Field<T>,
    pub c_xxx: Field<T>,
    /// Smallest value of `c` on the grid.
    pub c0_floor: T,
    /// The scaled bottom `beta * b^(alpha)` the speed was built from.
    pub beta_b: Field<T>,
}

impl<T: Scalar> WaveSpeedField<T> {
    pub fn flat(n: usize) -> Self {
        WaveSpeedField {
            c: Field::constant(n, T::one()),
            c_x: Field::zeros(n),
            c_xx: Field::zeros(n),
            c_xxx: Field::zeros(n),
            c0_floor: T::one(),
            beta_b: Field::zeros(n),
        }
    }

    pub fn from_profile(
        grid: &Grid<T>,
        profile: &BathymetryProfile,
        params: &RegimeParams<T>,
        c0_min: T,
    ) -> Result<Self> {
        profile.validate()?;
        let samples = sample_bathymetry(profile, params.alpha, grid);
        wave_speed(grid, &samples, params.beta, c0_min)
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// `c^p` pointwise.
    pub fn pow(&self, p: i32) -> Field<T> {
        self.c.map(|v| v.powi(p))
    }

    /// `(sup |c|, sup |c_x|)`; the two `W^{1,inf}` conventions combine these.
    pub fn w1inf_parts(&self) -> (T, T) {
        (self.c.sup_norm(), self.c_x.sup_norm())
    }
}

/// Builds the speed field; fails if `1 - beta b < c0_min^2` anywhere.
pub fn wave_speed<T: Scalar>(
    grid: &Grid<T>,
    samples: &BathymetrySamples<T>,
    beta: T,
    c0_min: T,
) -> Result<WaveSpeedField<T>> {
    grid.check(&samples.b)?;
    let floor = c0_min * c0_min;
    let depth = samples.b.map(|b| T::one() - beta * b);
    let (worst, &value) = depth
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("grid is never empty");
    if !(value >= floor) || value <= T::zero() {
        return Err(Error::NonpositiveDepth {
            index: worst,
            x: grid.x(worst).to_f64_lossy(),
            value: value.to_f64_lossy(),
            floor: floor.to_f64_lossy(),
        });
    }
    let n = grid.n();
    let mut out = WaveSpeedField {
        c: Field::zeros(n),
        c_x: Field::zeros(n),
        c_xx: Field::zeros(n),
        c_xxx: Field::zeros(n),
        c0_floor: T::zero(),
        beta_b: samples.b.scale(beta),
    };
    let (two, three, four, eight) = (lit::<T>(2.0), lit::<T>(3.0), lit::<T>(4.0), lit::<T>(8.0));
    for j in 0..n {
        let c = depth[j].sqrt();
        let s1 = -beta * samples.b_x[j];
        let s2 = -beta * samples.b_xx[j];
        let s3 = -beta * samples.b_xxx[j];
        let c3 = c * c * c;
        out.c[j] = c;
        out.c_x[j] = s1 / (two * c);
        out.c_xx[j] = s2 / (two * c) - s1 * s1 / (four * c3);
        out.c_xxx[j] = s3 / (two * c) - three * s1 * s2 / (four * c3) + three * s1 * s1 * s1 / (eight * c3 * c * c);
    }
    out.c0_floor = out.c.min();
    Ok(out)
}
