use super::{Model, State};
use crate::error::{Error, Result};
use crate::params::WaveSpeedField;
use crate::scalar::{lit, Scalar};
use crate::spectral::{Field, Grid};
use rustfft::num_complex::Complex;

/// `(zeta, u)` for the two-way system.
#[derive(Debug, Clone, PartialEq)]
pub struct BoussinesqState<T> {
    pub zeta: Field<T>,
    pub u: Field<T>,
}

impl<T: Scalar> State<T> for BoussinesqState<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        self.zeta.axpy(a, &x.zeta);
        self.u.axpy(a, &x.u);
    }
    fn scale_mut(&mut self, a: T) {
        State::scale_mut(&mut self.zeta, a);
        State::scale_mut(&mut self.u, a);
    }
    fn sup_norm(&self) -> T {
        self.zeta.sup_norm().max(self.u.sup_norm())
    }
    fn is_finite(&self) -> bool {
        self.zeta.is_finite() && self.u.is_finite()
    }
}

/// Fixed-point settings for `(1 - (mu/3) c^4 d_xx) u_t = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticSettings<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for EllipticSettings<T> {
    fn default() -> Self {
        EllipticSettings { tol: lit(1e-12), max_iter: 200 }
    }
}

fn check_depth<T: Scalar>(grid: &Grid<T>, h: &Field<T>) -> Result<()> {
    for (j, &v) in h.iter().enumerate() {
        if !(v > T::zero()) {
            return Err(Error::BlowDown { index: j, x: grid.x(j).to_f64_lossy(), value: v.to_f64_lossy() });
        }
    }
    Ok(())
}

/// `(zeta_t, u_t)` for
/// `zeta_t + (h u)_x = 0`, `u_t + zeta_x + eps u u_x = (mu/3) c^4 u_xxt`,
/// with `h = c^2 + eps zeta`.
///
/// The variable-coefficient elliptic problem is solved by fixed-point
/// iteration preconditioned with the constant-coefficient inverse at the
/// mid-range of `c^4`.
pub fn rhs_boussinesq<T: Scalar>(
    grid: &Grid<T>,
    state: &BoussinesqState<T>,
    eps: T,
    mu: T,
    speed: &WaveSpeedField<T>,
    settings: &EllipticSettings<T>,
) -> Result<BoussinesqState<T>> {
    grid.check(&state.zeta)?;
    grid.check(&state.u)?;
    let h = speed.c.zip_map(&state.zeta, |c, z| c * c + eps * z);
    check_depth(grid, &h)?;

    let nyq = grid.n() / 2;
    let ik = |j: usize, k: T| {
        if j == nyq {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::zero(), k)
        }
    };
    let mut flux = grid.forward(&h.mul(&state.u));
    grid.dealias_spectrum(&mut flux);
    for (j, (c, &k)) in flux.iter_mut().zip(grid.wavenumbers()).enumerate() {
        *c = -(*c * ik(j, k));
    }
    let zeta_t = grid.inverse(flux);

    let zx = grid.derivative(&state.zeta, 1);
    let ux = grid.derivative(&state.u, 1);
    let r = Field::new((0..grid.n()).map(|j| -(zx[j] + eps * state.u[j] * ux[j])).collect());
    let u_t = solve_elliptic(grid, &r, mu, speed, settings)?;
    Ok(BoussinesqState { zeta: zeta_t, u: u_t })
}

fn solve_elliptic<T: Scalar>(
    grid: &Grid<T>,
    r: &Field<T>,
    mu: T,
    speed: &WaveSpeedField<T>,
    settings: &EllipticSettings<T>,
) -> Result<Field<T>> {
    let third = mu / lit(3.0);
    let c4 = speed.pow(4);
    let c4ref = (c4.max() + c4.min()) / lit(2.0);
    let kappa = third * c4ref;
    let dev = c4.map(|v| third * (v - c4ref));
    let variable = dev.sup_norm() > T::zero();
    let r_hat = {
        let mut s = grid.forward(r);
        grid.dealias_spectrum(&mut s);
        s
    };
    let invert = |extra: Option<&Field<T>>| {
        let mut s = r_hat.clone();
        if let Some(e) = extra {
            let mut es = grid.forward(e);
            grid.dealias_spectrum(&mut es);
            for (a, b) in s.iter_mut().zip(es) {
                *a += b;
            }
        }
        for (c, &k) in s.iter_mut().zip(grid.wavenumbers()) {
            *c /= T::one() + kappa * k * k;
        }
        grid.inverse(s)
    };
    let mut v = invert(None);
    if !variable {
        return Ok(v);
    }
    let mut change = T::infinity();
    for _ in 0..settings.max_iter {
        let vxx = grid.derivative(&v, 2);
        let next = invert(Some(&dev.mul(&vxx)));
        change = next.sub(&v).sup_norm() / next.sup_norm().max(T::min_positive_value());
        v = next;
        if change <= settings.tol {
            return Ok(v);
        }
    }
    Err(Error::SolverFailure { iterations: settings.max_iter, residual: change.to_f64_lossy() })
}

#[derive(Debug, Clone)]
pub struct BoussinesqModel<T: Scalar> {
    pub grid: Grid<T>,
    pub eps: T,
    pub mu: T,
    pub speed: WaveSpeedField<T>,
    pub settings: EllipticSettings<T>,
}

impl<T: Scalar> BoussinesqModel<T> {
    pub fn new(grid: Grid<T>, eps: T, mu: T, speed: WaveSpeedField<T>) -> Result<Self> {
        grid.check(&speed.c)?;
        Ok(BoussinesqModel { grid, eps, mu, speed, settings: EllipticSettings::default() })
    }
}

impl<T: Scalar> Model<T> for BoussinesqModel<T> {
    type State = BoussinesqState<T>;

    fn rhs(&self, s: &BoussinesqState<T>) -> Result<BoussinesqState<T>> {
        rhs_boussinesq(&self.grid, s, self.eps, self.mu, &self.speed, &self.settings)
    }

    fn max_stable_dt(&self) -> Option<T> {
        let kmax = self.grid.wavenumbers().iter().fold(T::zero(), |m, k| m.max(k.abs()));
        let cmax = self.speed.c.sup_norm();
        Some(lit::<T>(2.8) / (cmax * cmax * kmax))
    }
}
