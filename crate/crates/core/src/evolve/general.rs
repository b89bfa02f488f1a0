use super::Model;
use crate::coeffs::{rat, rat_to, tilde_coeffs, ConstantCoeffs, TildeForm};
use crate::error::{Error, Result};
use crate::params::WaveSpeedField;
use crate::scalar::{lit, Scalar};
use crate::spectral::{Field, Grid};

/// Coefficients of
/// `(1 - mu m d_xx) u_t + c u_x + k c_x u + sum_j eps^j f_j u^j u_x + mu g u_xxx
///   = eps mu [h1 u u_xxx + (h2 u)_x u_xx + u_x (h2 u)_xx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralModelSpec<T> {
    pub m: T,
    pub k: T,
    /// `(j, f_j)` pairs.
    pub f_terms: Vec<(u32, Field<T>)>,
    pub g: Field<T>,
    pub h1: Field<T>,
    pub h2: Field<T>,
    pub eps: T,
    pub mu: T,
}

impl<T: Scalar> GeneralModelSpec<T> {
    /// Velocity equation: `m=-B, k=3/2, f_1=3/2, g=A~, h1=E~, h2=F~/2`.
    pub fn velocity(cc: &ConstantCoeffs, speed: &WaveSpeedField<T>, eps: T, mu: T) -> Self {
        let t = tilde_coeffs(cc, speed, TildeForm::Velocity);
        let n = speed.len();
        GeneralModelSpec {
            m: rat_to(cc.m()),
            k: lit(1.5),
            f_terms: vec![(1, Field::constant(n, lit(1.5)))],
            g: t.a_tilde,
            h1: t.e_tilde,
            h2: t.f_tilde.scale(lit(0.5)),
            eps,
            mu,
        }
    }

    /// Elevation equation: `m=-B, k=1/2`, `f_1=3/(2c)`, `f_2=-3/(8c^3)`,
    /// `f_3=3/(16c^5)`, with the elevation-form tilde coefficients.
    pub fn elevation(cc: &ConstantCoeffs, speed: &WaveSpeedField<T>, eps: T, mu: T) -> Self {
        let t = tilde_coeffs(cc, speed, TildeForm::Elevation);
        GeneralModelSpec {
            m: rat_to(cc.m()),
            k: lit(0.5),
            f_terms: vec![
                (1, speed.c.map(|c| lit::<T>(1.5) / c)),
                (2, speed.c.map(|c| lit::<T>(-0.375) / c.powi(3))),
                (3, speed.c.map(|c| lit::<T>(0.1875) / c.powi(5))),
            ],
            g: t.a_tilde,
            h1: t.e_tilde,
            h2: t.f_tilde.scale(lit(0.5)),
            eps,
            mu,
        }
    }

    /// The elevation equation at `q = 1/12` with its `O(mu^2)` topographic
    /// corrections dropped: depth enters only through `c` and `c_x/2`, and
    /// `E = F/2 = -7/24`. This is the equation used for breaking studies.
    pub fn breaking(speed: &WaveSpeedField<T>, eps: T, mu: T) -> Self {
        let n = speed.len();
        let konst = |r| Field::constant(n, rat_to::<T>(r));
        GeneralModelSpec {
            m: rat_to(rat(1, 12)),
            k: lit(0.5),
            f_terms: vec![(1, konst(rat(3, 2))), (2, konst(rat(-3, 8))), (3, konst(rat(3, 16)))],
            g: konst(rat(1, 12)),
            h1: konst(rat(-7, 24)),
            h2: konst(rat(-7, 24)),
            eps,
            mu,
        }
    }

    fn check(&self, grid: &Grid<T>, speed: &WaveSpeedField<T>) -> Result<()> {
        if !(self.m > T::zero()) {
            return Err(Error::WrongSolverPath(format!(
                "the regularised solver needs m > 0, got m = {}",
                self.m
            )));
        }
        for f in [&self.g, &self.h1, &self.h2, &speed.c]
            .into_iter()
            .chain(self.f_terms.iter().map(|(_, f)| f))
        {
            grid.check(f)?;
        }
        Ok(())
    }
}

/// `u_t` for the general class: the explicit terms are dealiased and then
/// the regularising operator `1 - mu m d_xx` is inverted.
pub fn rhs_general<T: Scalar>(
    grid: &Grid<T>,
    u: &Field<T>,
    spec: &GeneralModelSpec<T>,
    speed: &WaveSpeedField<T>,
) -> Result<Field<T>> {
    spec.check(grid, speed)?;
    grid.check(u)?;
    let (eps, mu) = (spec.eps, spec.mu);
    let d = grid.derivatives(u, 3);
    let (ux, uxx, uxxx) = (&d[0], &d[1], &d[2]);
    let h2u = spec.h2.mul(u);
    let w = grid.derivatives(&h2u, 2);
    let (wx, wxx) = (&w[0], &w[1]);
    let mut explicit = grid.zeros();
    for j in 0..grid.n() {
        let uj = u[j];
        let mut nl = T::zero();
        for (p, f) in &spec.f_terms {
            nl += eps.powi(*p as i32) * f[j] * uj.powi(*p as i32);
        }
        explicit[j] = -speed.c[j] * ux[j] - spec.k * speed.c_x[j] * uj - nl * ux[j] - mu * spec.g[j] * uxxx[j]
            + eps * mu * (spec.h1[j] * uj * uxxx[j] + wx[j] * uxx[j] + ux[j] * wxx[j]);
    }
    let mut hat = grid.forward(&explicit);
    grid.dealias_spectrum(&mut hat);
    let kappa = mu * spec.m;
    for (c, &k) in hat.iter_mut().zip(grid.wavenumbers()) {
        *c /= T::one() + kappa * k * k;
    }
    Ok(grid.inverse(hat))
}

/// The general class bound to a grid and a depth profile.
#[derive(Debug, Clone)]
pub struct GeneralModel<T: Scalar> {
    pub grid: Grid<T>,
    pub spec: GeneralModelSpec<T>,
    pub speed: WaveSpeedField<T>,
}

impl<T: Scalar> GeneralModel<T> {
    pub fn new(grid: Grid<T>, spec: GeneralModelSpec<T>, speed: WaveSpeedField<T>) -> Result<Self> {
        spec.check(&grid, &speed)?;
        Ok(GeneralModel { grid, spec, speed })
    }

    /// Largest modulus of the inverted linear symbol over the grid modes.
    pub fn linear_rate(&self) -> T {
        self.rate_with([T::zero(); 3])
    }

    /// Bound on the symbol of the right-hand side linearised about `u`:
    /// the linear part plus nonlinear transport and the `eps mu` terms,
    /// with coefficients frozen at their sup norms.
    pub fn rate_at(&self, u: &Field<T>) -> T {
        let (eps, mu) = (self.spec.eps, self.spec.mu);
        let um = u.sup_norm();
        let transport = self
            .spec
            .f_terms
            .iter()
            .fold(T::zero(), |acc, (p, f)| acc + (eps * um).powi(*p as i32) * f.sup_norm());
        let h2u = self.spec.h2.mul(u);
        let h2u_x = self.grid.derivative(&h2u, 1).sup_norm();
        let h2_ux = self.spec.h2.mul(&self.grid.derivative(u, 1)).sup_norm();
        let third = eps * mu * self.spec.h1.mul(u).sup_norm();
        let second = eps * mu * (h2u_x + h2_ux);
        self.rate_with([transport, second, third])
    }

    fn rate_with(&self, [k1, k2, k3]: [T; 3]) -> T {
        let c = self.speed.c.sup_norm();
        let g = self.spec.g.sup_norm();
        let kc = self.spec.k * self.speed.c_x.sup_norm();
        let kappa = self.spec.mu * self.spec.m;
        self.grid
            .wavenumbers()
            .iter()
            .map(|&k| {
                let k = k.abs();
                ((c + k1) * k + kc + k2 * k * k + (self.spec.mu * g + k3) * k * k * k) / (T::one() + kappa * k * k)
            })
            .fold(T::zero(), T::max)
    }
}

impl<T: Scalar> Model<T> for GeneralModel<T> {
    type State = Field<T>;

    fn rhs(&self, u: &Field<T>) -> Result<Field<T>> {
        rhs_general(&self.grid, u, &self.spec, &self.speed)
    }

    fn max_stable_dt(&self) -> Option<T> {
        let rate = self.linear_rate();
        (rate > T::zero()).then(|| lit::<T>(2.8) / rate)
    }

    fn stable_dt_at(&self, u: &Field<T>) -> Option<T> {
        let rate = self.rate_at(u);
        (rate > T::zero()).then(|| lit::<T>(2.8) / rate)
    }
}
