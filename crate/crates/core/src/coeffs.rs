//! One-parameter coefficient families and their variable-depth versions.
//!
//! Constant coefficients are kept as exact rationals; they are converted to
//! floating point only when spread over a grid.

use crate::error::{Error, Result};
use crate::params::WaveSpeedField;
use crate::scalar::{lit, Scalar};
use crate::spectral::Field;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

pub type Rational = Ratio<i64>;

/// Shorthand for the rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Ratio::new(n, d)
}

pub fn rat_to<T: Scalar>(r: Rational) -> T {
    lit(r.to_f64().expect("rational coefficient fits in f64"))
}

/// Parses `"-1/12"`, `"3"` or a terminating decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let whole: i64 = match int.trim_start_matches(['-', '+']) {
            "" => 0,
            w => w.parse().map_err(|_| bad())?,
        };
        let den = 10i64.pow(frac.len() as u32);
        let num = whole
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac.parse::<i64>().ok()?))
            .ok_or_else(bad)?;
        let r = Ratio::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    s.parse::<i64>().map(Ratio::from_integer).map_err(|_| bad())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    VelocityP,
    ElevationQ,
    Custom,
}

/// Constant coefficients `(A, B, E, F)` of the CH-type equations.
///
/// Field names follow the term each one multiplies in the velocity equation:
/// `A` on `mu u_xxx`, `B` on `mu u_xxt`, `E` on `eps mu u u_xxx` and `F` on
/// `eps mu u_x u_xx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantCoeffs {
    pub a: Rational,
    pub b: Rational,
    pub e: Rational,
    pub f: Rational,
    pub family: FamilyTag,
    pub free_param: Option<Rational>,
}

impl ConstantCoeffs {
    pub fn custom(a: Rational, b: Rational, e: Rational, f: Rational) -> Self {
        ConstantCoeffs { a, b, e, f, family: FamilyTag::Custom, free_param: None }
    }

    /// `B <= 0`, necessary for linear well-posedness.
    pub fn linearly_well_posed(&self) -> bool {
        self.b <= Rational::zero()
    }

    /// `B < 0`: the regularising operator `1 - mu m d_xx` with `m = -B > 0`
    /// is invertible and the explicit solver path applies.
    pub fn regularized(&self) -> bool {
        self.b < Rational::zero()
    }

    /// `m = -B`.
    pub fn m(&self) -> Rational {
        -self.b
    }

    pub fn as_f64(&self) -> [f64; 4] {
        [self.a, self.b, self.e, self.f].map(rat_to::<f64>)
    }
}

impl fmt::Display for ConstantCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A={} B={} E={} F={}", self.a, self.b, self.e, self.f)
    }
}

/// Velocity family: `A=p, B=p-1/6, E=-3p/2-1/6, F=-9p/2-23/24`.
pub fn coeffs_from_p(p: Rational) -> ConstantCoeffs {
    ConstantCoeffs {
        a: p,
        b: p - rat(1, 6),
        e: rat(-3, 2) * p - rat(1, 6),
        f: rat(-9, 2) * p - rat(23, 24),
        family: FamilyTag::VelocityP,
        free_param: Some(p),
    }
}

/// Elevation family: `A=q, B=q-1/6, E=-3q/2-1/6, F=-9q/2-5/24`.
pub fn coeffs_from_q(q: Rational) -> ConstantCoeffs {
    ConstantCoeffs {
        a: q,
        b: q - rat(1, 6),
        e: rat(-3, 2) * q - rat(1, 6),
        f: rat(-9, 2) * q - rat(5, 24),
        family: FamilyTag::ElevationQ,
        free_param: Some(q),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedAed {
    pub a: Rational,
    pub e: Rational,
    pub d: Rational,
}

/// `a = B - A`, `e = E + 3A/2`, `d = (F + 3A - E)/2`.
pub fn derived_aed(cc: &ConstantCoeffs) -> DerivedAed {
    DerivedAed {
        a: cc.b - cc.a,
        e: cc.e + rat(3, 2) * cc.a,
        d: (cc.f + rat(3, 1) * cc.a - cc.e) / rat(2, 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TildeForm {
    Velocity,
    Elevation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TildeCoeffs<T> {
    pub a_tilde: Field<T>,
    pub e_tilde: Field<T>,
    pub f_tilde: Field<T>,
    pub form: TildeForm,
}

/// Variable-depth coefficients.
///
/// Velocity form: `A~ = A c^5 - B c^5 + B c`, `E~ = E c^4 - 3B c^4/2 + 3B/2`,
/// `F~ = F c^4 - 9B c^4/2 + 9B/2`.
/// Elevation form: same `A~`, `E~ = E c^3 - 3B c^3/2 + 3B/(2c)`,
/// `F~ = F c^3 - 9B c^3/2 + 9B/(2c)`.
pub fn tilde_coeffs<T: Scalar>(cc: &ConstantCoeffs, speed: &WaveSpeedField<T>, form: TildeForm) -> TildeCoeffs<T> {
    let [a, b, e, f]: [T; 4] = [cc.a, cc.b, cc.e, cc.f].map(rat_to);
    let (h, n) = (lit::<T>(1.5), lit::<T>(4.5));
    let a_tilde = speed.c.map(|c| (a - b) * c.powi(5) + b * c);
    let (e_tilde, f_tilde) = match form {
        TildeForm::Velocity => (
            speed.c.map(|c| (e - h * b) * c.powi(4) + h * b),
            speed.c.map(|c| (f - n * b) * c.powi(4) + n * b),
        ),
        TildeForm::Elevation => (
            speed.c.map(|c| (e - h * b) * c.powi(3) + h * b / c),
            speed.c.map(|c| (f - n * b) * c.powi(3) + n * b / c),
        ),
    };
    TildeCoeffs { a_tilde, e_tilde, f_tilde, form }
}
