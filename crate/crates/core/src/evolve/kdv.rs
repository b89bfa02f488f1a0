use super::Model;
use crate::error::Result;
use crate::params::WaveSpeedField;
use crate::scalar::{lit, Scalar};
use crate::spectral::{Field, Grid};
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::sync::Mutex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KdvVariant {
    /// Surface elevation: `k = 1/2`, `g = 3/(2c)`.
    Elevation,
    /// Velocity: `k = 3/2`, `g = 3/2`.
    Velocity,
}

/// `w_t + c w_x + k c_x w + eps g w w_x + (mu/6) c^5 w_xxx = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdvTopSpec<T> {
    pub variant: KdvVariant,
    pub eps: T,
    pub mu: T,
}

impl<T: Scalar> KdvTopSpec<T> {
    pub fn k(&self) -> T {
        match self.variant {
            KdvVariant::Elevation => lit(0.5),
            KdvVariant::Velocity => lit(1.5),
        }
    }

    pub fn g(&self, speed: &WaveSpeedField<T>) -> Field<T> {
        match self.variant {
            KdvVariant::Elevation => speed.c.map(|c| lit::<T>(1.5) / c),
            KdvVariant::Velocity => Field::constant(speed.len(), lit(1.5)),
        }
    }
}

/// `w_t` for the KdV-top equation, dealiased.
pub fn rhs_kdv_top<T: Scalar>(
    grid: &Grid<T>,
    w: &Field<T>,
    spec: &KdvTopSpec<T>,
    speed: &WaveSpeedField<T>,
) -> Result<Field<T>> {
    grid.check(w)?;
    grid.check(&speed.c)?;
    let g = spec.g(speed);
    let k = spec.k();
    let sixth_mu = spec.mu / lit(6.0);
    let d = grid.derivatives(w, 3);
    let (wx, wxxx) = (&d[0], &d[2]);
    let mut out = grid.zeros();
    for j in 0..grid.n() {
        let c = speed.c[j];
        out[j] = -(c * wx[j] + k * speed.c_x[j] * w[j] + spec.eps * g[j] * w[j] * wx[j]
            + sixth_mu * c.powi(5) * wxxx[j]);
    }
    Ok(grid.dealias(&out))
}

/// KdV-top stepped with an integrating factor for the constant-coefficient
/// part `-cbar w_x - (mu/6) mean(c^5) w_xxx`; the rest is explicit RK4.
#[derive(Debug)]
pub struct KdvTopModel<T: Scalar> {
    pub grid: Grid<T>,
    pub spec: KdvTopSpec<T>,
    pub speed: WaveSpeedField<T>,
    g: Field<T>,
    c5: Field<T>,
    cbar: T,
    c5bar: T,
    lambda: Vec<Complex<T>>,
    factors: Mutex<Option<(T, Vec<Complex<T>>, Vec<Complex<T>>)>>,
}

impl<T: Scalar> KdvTopModel<T> {
    pub fn new(grid: Grid<T>, spec: KdvTopSpec<T>, speed: WaveSpeedField<T>) -> Result<Self> {
        grid.check(&speed.c)?;
        let c5 = speed.pow(5);
        let cbar = speed.c.mean();
        let c5bar = c5.mean();
        let sixth_mu = spec.mu / lit(6.0);
        let nyq = grid.n() / 2;
        let lambda = grid
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if j == nyq {
                    Complex::new(T::zero(), T::zero())
                } else {
                    Complex::new(T::zero(), -cbar * k + sixth_mu * c5bar * k * k * k)
                }
            })
            .collect();
        Ok(KdvTopModel {
            g: spec.g(&speed),
            c5,
            cbar,
            c5bar,
            lambda,
            factors: Mutex::new(None),
            grid,
            spec,
            speed,
        })
    }

    /// Dealiased spectrum of everything not in the integrating factor.
    fn remainder_hat(&self, w: &Field<T>) -> Vec<Complex<T>> {
        let d = self.grid.derivatives(w, 3);
        let (wx, wxxx) = (&d[0], &d[2]);
        let k = self.spec.k();
        let sixth_mu = self.spec.mu / lit(6.0);
        let mut out = self.grid.zeros();
        for j in 0..self.grid.n() {
            out[j] = -((self.speed.c[j] - self.cbar) * wx[j]
                + k * self.speed.c_x[j] * w[j]
                + self.spec.eps * self.g[j] * w[j] * wx[j]
                + sixth_mu * (self.c5[j] - self.c5bar) * wxxx[j]);
        }
        let mut hat = self.grid.forward(&out);
        self.grid.dealias_spectrum(&mut hat);
        hat
    }

    fn factors(&self, dt: T) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let mut guard = self.factors.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((cached, half, full)) = guard.as_ref() {
            if *cached == dt {
                return (half.clone(), full.clone());
            }
        }
        let h = dt / lit(2.0);
        let half: Vec<_> = self.lambda.iter().map(|l| (*l * h).exp()).collect();
        let full: Vec<_> = half.iter().map(|e| e * e).collect();
        *guard = Some((dt, half.clone(), full.clone()));
        (half, full)
    }

    /// Rate bound of the explicitly treated part at the resolved modes.
    fn explicit_rate(&self) -> T {
        let kmax = self.grid.wavenumbers().iter().fold(T::zero(), |m, k| m.max(k.abs()));
        let dc = self.speed.c.map(|c| c - self.cbar).sup_norm();
        let dc5 = self.c5.map(|c| c - self.c5bar).sup_norm();
        dc * kmax + self.spec.k() * self.speed.c_x.sup_norm() + self.spec.mu / lit(6.0) * dc5 * kmax * kmax * kmax
    }
}

impl<T: Scalar> Model<T> for KdvTopModel<T> {
    type State = Field<T>;

    fn rhs(&self, w: &Field<T>) -> Result<Field<T>> {
        rhs_kdv_top(&self.grid, w, &self.spec, &self.speed)
    }

    fn step(&self, w: &Field<T>, dt: T) -> Result<Field<T>> {
        self.grid.check(w)?;
        let (eh, e) = self.factors(dt);
        let half = dt / lit(2.0);
        let w0 = self.grid.forward(w);
        let a = self.remainder_hat(w);
        let wa: Vec<_> = (0..w0.len()).map(|j| eh[j] * (w0[j] + a[j] * half)).collect();
        let b = self.remainder_hat(&self.grid.inverse(wa));
        let wb: Vec<_> = (0..w0.len()).map(|j| eh[j] * w0[j] + b[j] * half).collect();
        let c = self.remainder_hat(&self.grid.inverse(wb));
        let wc: Vec<_> = (0..w0.len()).map(|j| e[j] * w0[j] + eh[j] * c[j] * dt).collect();
        let d = self.remainder_hat(&self.grid.inverse(wc));
        let sixth = dt / lit(6.0);
        let two = lit::<T>(2.0);
        let next = (0..w0.len())
            .map(|j| e[j] * w0[j] + (e[j] * a[j] + eh[j] * (b[j] + c[j]) * two + d[j]) * sixth)
            .collect();
        Ok(self.grid.inverse(next))
    }

    fn max_stable_dt(&self) -> Option<T> {
        let rate = self.explicit_rate();
        (rate > T::zero()).then(|| lit::<T>(2.8) / rate)
    }
}
