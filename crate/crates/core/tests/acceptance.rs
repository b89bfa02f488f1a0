//! Acceptance suite. One test per criterion; each prints a single
//! `criterion NN PASS|FAIL` line before asserting.
//!
//! Run with `cargo test -p topowave --test acceptance -- --nocapture`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::time::Instant;
use topowave::breaking::{
    breaking_threshold, energy_low, refinement_gate, BreakingGuards, BreakingMonitor, Classification,
};
use topowave::coeffs::{coeffs_from_p, coeffs_from_q, derived_aed, rat, ConstantCoeffs, Rational};
use topowave::evolve::{
    evolve, evolve_observed, rhs_general, rhs_kdv_top, BoussinesqModel, BoussinesqState, EvolveOptions,
    GeneralModel, GeneralModelSpec, KdvTopModel, KdvTopSpec, KdvVariant, Model,
};
use topowave::params::{check_regime, BathymetryProfile, RegimeFamily, RegimeParams, RegimeTag, WaveSpeedField};
use topowave::reconstruct::{pair_series, u_from_zeta, ReconstructionSpec, ReconstructionVariant};
use topowave::residual::{bouss_residuals, gn_residuals, model_error_vs_boussinesq, order_fit, ResidualOptions};
use topowave::{Field64, Grid64};

mod tol {
    pub const FLAT_REDUCTION: f64 = 1e-12;
    pub const BREAKING_FORM: f64 = 1e-10;
    pub const ENERGY_DRIFT: f64 = 1e-8;
    /// Drift ratio under dt halving: fourth order gives 16, the linear part of
    /// RK4 loses energy at fifth order (32); measured values sit in between.
    pub const DRIFT_RATIO: (f64, f64) = (12.0, 32.0);
    pub const QUADRATURE: f64 = 1e-10;
    pub const ORDER_TWO: (f64, f64) = (1.7, 2.3);
    pub const ORDER_ONE: (f64, f64) = (0.7, 1.3);
    pub const NORMALIZED_SPREAD: f64 = 2.0;
    pub const SOLITON_SHAPE: f64 = 1e-4;
    pub const SOLITON_ANSATZ: f64 = 1e-10;
    pub const REFINEMENT: f64 = 0.05;
    pub const AMPLITUDE_GUARD: f64 = 3.0;
    pub const HORIZON_K: f64 = 10.0;
}

/// Writes to the stderr handle directly so the line survives test capture.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stderr(), $($t)*);
    }};
}

fn verdict(id: u32, name: &str, pass: bool, detail: &str, started: Instant) -> bool {
    say!(
        "criterion {id:02} {} {name}: {detail} [{:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    pass
}

fn within((lo, hi): (f64, f64), v: f64) -> bool {
    v >= lo && v <= hi
}

fn gaussian(g: &Grid64, amp: f64, x0: f64, width: f64) -> Field64 {
    Field64::from_fn(g, |x: f64| amp * (-((x - x0) / width).powi(2)).exp())
}

fn bump_speed(g: &Grid64, p: &RegimeParams<f64>, width: f64) -> WaveSpeedField<f64> {
    WaveSpeedField::from_profile(g, &BathymetryProfile::GaussianBump { center: 0.0, width }, p, 0.1).unwrap()
}

// ---------------------------------------------------------------------------
// Trigonometric-polynomial oracle for the flat-bottom reductions. Values and
// derivatives are analytic; the Helmholtz inverse is a naive DFT.

struct Trig {
    l: f64,
    /// `(m, a, b)`: `a cos(m pi x/L) + b sin(m pi x/L)`
    modes: Vec<(u32, f64, f64)>,
}

impl Trig {
    fn eval(&self, x: f64, order: u32) -> f64 {
        self.modes
            .iter()
            .map(|&(m, a, b)| {
                let k = m as f64 * PI / self.l;
                let (c, s) = ((k * x).cos(), (k * x).sin());
                let kp = k.powi(order as i32);
                // d^r/dx^r of (a cos + b sin) cycles with period 4
                match order % 4 {
                    0 => kp * (a * c + b * s),
                    1 => kp * (-a * s + b * c),
                    2 => kp * (-a * c - b * s),
                    _ => kp * (a * s - b * c),
                }
            })
            .sum()
    }

    fn on(&self, g: &Grid64, order: u32) -> Vec<f64> {
        (0..g.n()).map(|j| self.eval(g.x(j), order)).collect()
    }
}

fn naive_helmholtz_inverse(f: &[f64], l: f64, kappa: f64) -> Vec<f64> {
    let n = f.len();
    let xs: Vec<f64> = (0..n).map(|j| -l + 2.0 * l * j as f64 / n as f64).collect();
    let mmax = n / 3;
    let mut out = vec![f.iter().sum::<f64>() / n as f64; n];
    for m in 1..=mmax {
        let k = m as f64 * PI / l;
        let (mut a, mut b) = (0.0, 0.0);
        for (fj, xj) in f.iter().zip(&xs) {
            a += fj * (k * xj).cos();
            b += fj * (k * xj).sin();
        }
        let s = 2.0 / n as f64 / (1.0 + kappa * k * k);
        for (o, xj) in out.iter_mut().zip(&xs) {
            *o += s * (a * (k * xj).cos() + b * (k * xj).sin());
        }
    }
    out
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn test_profile(l: f64) -> Trig {
    Trig { l, modes: vec![(1, 0.6, -0.3), (2, 0.25, 0.4), (3, -0.1, 0.15)] }
}

/// `u_t` of `u_t + u_x + (3/2) eps u u_x + mu (A u_xxx + B u_xxt) = eps mu (E u u_xxx + F u_x u_xx)`.
fn flat_velocity_oracle(g: &Grid64, u: &Trig, cc: &ConstantCoeffs, eps: f64, mu: f64) -> Vec<f64> {
    let [a, b, e, f] = cc.as_f64();
    let (u0, u1, u2, u3) = (u.on(g, 0), u.on(g, 1), u.on(g, 2), u.on(g, 3));
    let explicit: Vec<f64> = (0..g.n())
        .map(|j| {
            -u1[j] - 1.5 * eps * u0[j] * u1[j] - mu * a * u3[j]
                + eps * mu * (e * u0[j] * u3[j] + f * u1[j] * u2[j])
        })
        .collect();
    naive_helmholtz_inverse(&explicit, g.half_length(), -mu * b)
}

/// `zeta_t` of the flat elevation equation with the cubic and quartic terms.
fn flat_elevation_oracle(g: &Grid64, z: &Trig, cc: &ConstantCoeffs, eps: f64, mu: f64) -> Vec<f64> {
    let [a, b, e, f] = cc.as_f64();
    let (z0, z1, z2, z3) = (z.on(g, 0), z.on(g, 1), z.on(g, 2), z.on(g, 3));
    let explicit: Vec<f64> = (0..g.n())
        .map(|j| {
            let s = z0[j];
            -z1[j] - (1.5 * eps * s - 0.375 * eps * eps * s * s + 0.1875 * eps.powi(3) * s.powi(3)) * z1[j]
                - mu * a * z3[j]
                + eps * mu * (e * s * z3[j] + f * z1[j] * z2[j])
        })
        .collect();
    naive_helmholtz_inverse(&explicit, g.half_length(), -mu * b)
}

#[test]
fn criterion_01_coefficient_exactness() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let sixth = rat(1, 6);
    let mut worst = String::new();
    let mut pass = true;
    for _ in 0..20 {
        let p = Rational::new(rng.random_range(-60..=60), rng.random_range(1..=48));
        let q = Rational::new(rng.random_range(-60..=60), rng.random_range(1..=48));
        let (cv, ce) = (coeffs_from_p(p), coeffs_from_q(q));
        let (dv, de) = (derived_aed(&cv), derived_aed(&ce));
        let ok = (dv.a, dv.e, dv.d) == (rat(-1, 6), rat(-1, 6), rat(-19, 48))
            && (de.a, de.e, de.d) == (rat(-1, 6), rat(-1, 6), rat(-1, 48))
            && cv.a - cv.b == sixth
            && ce.a - ce.b == sixth;
        if !ok {
            pass = false;
            worst = format!("p={p} gives {dv:?}, q={q} gives {de:?}");
        }
    }
    let detail = if pass { "20 p and 20 q values exact".to_string() } else { worst };
    assert!(verdict(1, "coefficient exactness", pass, &detail, t0));
}

#[test]
fn criterion_02_flat_bottom_reduction() {
    let t0 = Instant::now();
    let g = Grid64::new(256, 10.0).unwrap();
    let p = RegimeParams::new(0.1, 0.3, 1.0, 0.05).unwrap();
    let speed = WaveSpeedField::from_profile(&g, &BathymetryProfile::Flat, &p, 0.1).unwrap();
    let u = test_profile(10.0);
    let uf = Field64::new(u.on(&g, 0));
    let mut worst: f64 = 0.0;
    for pv in [rat(-1, 12), rat(-1, 3), rat(0, 1), rat(1, 12)] {
        let cc = coeffs_from_p(pv);
        let spec = GeneralModelSpec::velocity(&cc, &speed, p.eps, p.mu);
        let got = rhs_general(&g, &uf, &spec, &speed).unwrap();
        worst = worst.max(sup_diff(&got, &flat_velocity_oracle(&g, &u, &cc, p.eps, p.mu)));
    }
    for qv in [rat(1, 12), rat(-1, 6), rat(0, 1), rat(1, 24)] {
        let cc = coeffs_from_q(qv);
        let spec = GeneralModelSpec::elevation(&cc, &speed, p.eps, p.mu);
        let got = rhs_general(&g, &uf, &spec, &speed).unwrap();
        worst = worst.max(sup_diff(&got, &flat_elevation_oracle(&g, &u, &cc, p.eps, p.mu)));
    }
    let pass = worst <= tol::FLAT_REDUCTION;
    assert!(verdict(2, "flat-bottom reduction", pass, &format!("sup error {worst:.2e}"), t0));
}

#[test]
fn criterion_03_breaking_form_specialization() {
    let t0 = Instant::now();
    let (eps, mu) = (0.2, 0.04);
    let g = Grid64::new(256, 10.0).unwrap();
    let speed = WaveSpeedField::flat(256);
    let z = test_profile(10.0);
    let zf = Field64::new(z.on(&g, 0));
    // zeta_t + zeta_x + (3/2) eps zeta zeta_x - (3/8) eps^2 zeta^2 zeta_x + (3/16) eps^3 zeta^3 zeta_x
    //   + (mu/12)(zeta_xxx - zeta_xxt) = -(7/24) eps mu (zeta zeta_xxx + 2 zeta_x zeta_xx)
    let (z0, z1, z2, z3) = (z.on(&g, 0), z.on(&g, 1), z.on(&g, 2), z.on(&g, 3));
    let explicit: Vec<f64> = (0..g.n())
        .map(|j| {
            let s = z0[j];
            -z1[j] - 1.5 * eps * s * z1[j] + 0.375 * eps * eps * s * s * z1[j]
                - 0.1875 * eps.powi(3) * s.powi(3) * z1[j]
                - mu / 12.0 * z3[j]
                - 7.0 / 24.0 * eps * mu * (s * z3[j] + 2.0 * z1[j] * z2[j])
        })
        .collect();
    let oracle = naive_helmholtz_inverse(&explicit, 10.0, mu / 12.0);
    let general = GeneralModelSpec::elevation(&coeffs_from_q(rat(1, 12)), &speed, eps, mu);
    let e1 = sup_diff(&rhs_general(&g, &zf, &general, &speed).unwrap(), &oracle);
    let preset = GeneralModelSpec::breaking(&speed, eps, mu);
    let e2 = sup_diff(&rhs_general(&g, &zf, &preset, &speed).unwrap(), &oracle);
    let pass = e1.max(e2) <= tol::BREAKING_FORM;
    let detail = format!("general class {e1:.2e}, breaking preset {e2:.2e}");
    assert!(verdict(3, "breaking-form specialization", pass, &detail, t0));
}

fn energy_drift(dt_scale: f64) -> (f64, f64) {
    let (eps, mu) = (0.2f64, 0.04f64);
    let p = RegimeParams::new(eps, mu.powf(1.5), eps, mu).unwrap();
    let g = Grid64::new(1024, 40.0).unwrap();
    let speed = bump_speed(&g, &p, 1.0);
    let model = GeneralModel::new(g.clone(), GeneralModelSpec::breaking(&speed, eps, mu), speed.clone()).unwrap();
    let z0 = gaussian(&g, 1.0, -5.0, 2.0);
    let e0 = energy_low(&g, &z0, mu);
    let mut drift: f64 = 0.0;
    let dt = g.dx() / 4.0 * dt_scale;
    let opts = EvolveOptions::new(1.0 / eps, dt, 1);
    evolve_observed(&model, z0, &opts, |_, z| {
        drift = drift.max(((energy_low(&g, z, mu) - e0) / e0).abs());
        std::ops::ControlFlow::Continue(())
    })
    .unwrap();
    (dt, drift)
}

#[test]
fn criterion_04_energy_conservation() {
    let t0 = Instant::now();
    let (dt, d1) = energy_drift(1.0);
    let (_, d2) = energy_drift(0.5);
    let ratio = d1 / d2;
    let pass = d1 <= tol::ENERGY_DRIFT && within(tol::DRIFT_RATIO, ratio);
    let detail = format!("drift {d1:.2e} at dt={dt:.3e}, {d2:.2e} at dt/2, ratio {ratio:.1}");
    assert!(verdict(4, "energy conservation", pass, &detail, t0));
}

#[test]
fn criterion_05_quadrature_identities() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    let l = 10.0;
    let g = Grid64::new(512, l).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let modes = (1..=8)
            .map(|m| {
                let decay = 1.0 / (m * m) as f64;
                (m, decay * rng.random_range(-1.0..1.0), decay * rng.random_range(-1.0..1.0))
            })
            .collect();
        let z = Field64::new(Trig { l, modes }.on(&g, 0));
        let alpha: f64 = rng.random_range(0.5..1.0);
        let p = RegimeParams::new(0.1, rng.random_range(0.0..0.6), alpha, 0.05).unwrap();
        let profile = BathymetryProfile::GaussianBump {
            center: rng.random_range(-2.0..2.0),
            width: alpha * rng.random_range(0.5..1.5),
        };
        let s = WaveSpeedField::from_profile(&g, &profile, &p, 0.1).unwrap();
        let zx = g.derivative(&z, 1);
        let skew = Field64::new((0..g.n()).map(|j| (s.c[j] * zx[j] + 0.5 * s.c_x[j] * z[j]) * z[j]).collect());
        worst = worst.max(g.l2_inner(&skew, &Field64::constant(g.n(), 1.0)).abs());
        for i in 1..=3 {
            let f = Field64::new((0..g.n()).map(|j| z[j].powi(i) * zx[j] * z[j]).collect());
            worst = worst.max(g.l2_inner(&f, &Field64::constant(g.n(), 1.0)).abs());
        }
    }
    let pass = worst <= tol::QUADRATURE;
    assert!(verdict(5, "quadrature identities", pass, &format!("worst |integral| {worst:.2e}"), t0));
}

#[test]
fn criterion_06_green_naghdi_consistency() {
    let t0 = Instant::now();
    let mus = [0.08f64, 0.04, 0.02, 0.01];
    let members: Vec<_> = mus.iter().map(|&mu| RegimeParams::new(mu.sqrt(), mu * mu, 1.0, mu).unwrap()).collect();
    let family = RegimeFamily { members: members.clone(), regime_tag: RegimeTag::ChConsistency, bound_constant: 1.0 };
    assert!(check_regime(&family).unwrap().pass);
    let (mut raw, mut normalized, mut parts) = (vec![], vec![], vec![]);
    for p in &members {
        let g = Grid64::new(1024, 48.0).unwrap();
        let speed = bump_speed(&g, p, 3.0);
        let spec = GeneralModelSpec::velocity(&coeffs_from_p(rat(-1, 12)), &speed, p.eps, p.mu);
        let model = GeneralModel::new(g.clone(), spec, speed.clone()).unwrap();
        let dt = (0.5 * model.max_stable_dt().unwrap()).min(0.05);
        let traj = evolve(&model, gaussian(&g, 1.0, -15.0, 4.0), &EvolveOptions::new(1.0 / p.eps, dt, 50)).unwrap();
        let rs = ReconstructionSpec::new(ReconstructionVariant::ChZetaFromUFull, p.eps, p.mu);
        let pairs = pair_series(&g, &traj, &model, &rs, &speed).unwrap();
        let rep = gn_residuals(&g, &pairs, p.eps, p.mu, &speed, &ResidualOptions::mu_squared(p.mu)).unwrap();
        raw.push(rep.raw_sup());
        normalized.push(rep.r1_sup.max(rep.r2_sup));
        parts.push(format!("{:.2e}/{:.2e}", rep.raw_r1(), rep.raw_r2()));
    }
    let fit = order_fit(&mus, &raw).unwrap();
    let spread = normalized.iter().cloned().fold(0.0, f64::max) / normalized.iter().cloned().fold(f64::MAX, f64::min);
    let pass = fit.slope_within(tol::ORDER_TWO.0, tol::ORDER_TWO.1) && spread <= tol::NORMALIZED_SPREAD;
    let detail = format!("slope {:.3}, normalized spread {spread:.2}, r1/r2 {}", fit.slope, parts.join(" "));
    assert!(verdict(6, "Green-Naghdi consistency order", pass, &detail, t0));
}

#[test]
fn criterion_07_boussinesq_consistency() {
    let t0 = Instant::now();
    let mus = [0.08f64, 0.04, 0.02, 0.01];
    let members: Vec<_> = mus.iter().map(|&mu| RegimeParams::new(mu, mu * mu, 1.0, mu).unwrap()).collect();
    let family = RegimeFamily { members: members.clone(), regime_tag: RegimeTag::KdvJustified, bound_constant: 1.0 };
    assert!(check_regime(&family).unwrap().pass);
    let mut raw = vec![];
    for p in &members {
        let g = Grid64::new(4096, 128.0).unwrap();
        let speed = bump_speed(&g, p, 3.0);
        let spec = KdvTopSpec { variant: KdvVariant::Elevation, eps: p.eps, mu: p.mu };
        let model = KdvTopModel::new(g.clone(), spec, speed.clone()).unwrap();
        let dt = model.max_stable_dt().map_or(0.1, |b| b.min(0.1));
        let traj = evolve(&model, gaussian(&g, 1.0, -60.0, 4.0), &EvolveOptions::new(1.0 / p.eps, dt, 50)).unwrap();
        let rs = ReconstructionSpec::new(ReconstructionVariant::KdvUFromZetaHs, p.eps, p.mu);
        let pairs = pair_series(&g, &traj, &model, &rs, &speed).unwrap();
        let rep = bouss_residuals(&g, &pairs, p.eps, p.mu, &speed, &ResidualOptions::mu_squared(p.mu)).unwrap();
        raw.push(rep.raw_sup());
    }
    let fit = order_fit(&mus, &raw).unwrap();
    let pass = fit.slope_within(tol::ORDER_TWO.0, tol::ORDER_TWO.1);
    let values: Vec<String> = raw.iter().map(|v| format!("{v:.2e}")).collect();
    let detail = format!("slope {:.3}, raw sup {}", fit.slope, values.join(" "));
    assert!(verdict(7, "Boussinesq consistency order", pass, &detail, t0));
}

#[test]
fn criterion_08_model_error_scaling() {
    let t0 = Instant::now();
    let epss = [0.08f64, 0.04, 0.02];
    let fixed_t = 12.5;
    let (mut terminal, mut at_fixed) = (vec![], vec![]);
    for (i, &eps) in epss.iter().enumerate() {
        let p = RegimeParams::new(eps, eps * eps, 1.0, eps).unwrap();
        let g = Grid64::new(2048, 64.0).unwrap();
        let speed = bump_speed(&g, &p, 3.0);
        let spec = KdvTopSpec { variant: KdvVariant::Elevation, eps, mu: eps };
        let kdv = KdvTopModel::new(g.clone(), spec, speed.clone()).unwrap();
        let bouss = BoussinesqModel::new(g.clone(), eps, eps, speed.clone()).unwrap();
        let z0 = gaussian(&g, 1.0, -30.0, 4.0);
        let rs = ReconstructionSpec::new(ReconstructionVariant::KdvUFromZetaHs, eps, eps);
        let u0 = u_from_zeta(&g, &z0, None, &rs, &speed).unwrap();
        // dt = 0.05 and a sample every 1.25 put t = 12.5 on the saved grid.
        let opts = EvolveOptions::new(1.0 / eps, 0.05, 10 << i);
        let a = evolve(&kdv, z0.clone(), &opts).unwrap();
        let b = evolve(&bouss, BoussinesqState { zeta: z0, u: u0 }, &opts).unwrap();
        let pairs = pair_series(&g, &a, &kdv, &rs, &speed).unwrap();
        let err = model_error_vs_boussinesq(&g, &pairs, &b).unwrap();
        assert!(err.times.iter().any(|t| (t - fixed_t).abs() < 1e-9));
        terminal.push(*err.combined().last().unwrap());
        at_fixed.push(err.at(fixed_t).unwrap());
    }
    let ft = order_fit(&epss, &terminal).unwrap();
    let ff = order_fit(&epss, &at_fixed).unwrap();
    let pass = ft.slope_within(tol::ORDER_ONE.0, tol::ORDER_ONE.1) && ff.slope_within(tol::ORDER_TWO.0, tol::ORDER_TWO.1);
    let detail = format!("terminal exponent {:.3}, exponent at t={fixed_t} {:.3}", ft.slope, ff.slope);
    assert!(verdict(8, "KdV-top vs Boussinesq error scaling", pass, &detail, t0));
}

#[test]
fn criterion_09_soliton_propagation() {
    let t0 = Instant::now();
    let (a, eps, mu) = (1.0f64, 0.04f64, 0.04f64);
    let kappa = (3.0 * eps * a / (4.0 * mu)).sqrt();
    let v = 1.0 + eps * a / 2.0;
    let g = Grid64::new(1024, 40.0).unwrap();
    let speed = WaveSpeedField::flat(1024);
    let x0 = -12.0;
    let exact = |t: f64| Field64::from_fn(&g, move |x: f64| a / (kappa * (x - x0 - v * t)).cosh().powi(2));
    let spec = KdvTopSpec { variant: KdvVariant::Velocity, eps, mu };
    let w0 = exact(0.0);
    // travelling wave: w_t = -V w_x
    let ansatz = rhs_kdv_top(&g, &w0, &spec, &speed).unwrap().add(&g.derivative(&w0, 1).scale(v)).sup_norm();
    let model = KdvTopModel::new(g.clone(), spec, speed).unwrap();
    let traj = evolve(&model, w0, &EvolveOptions::new(1.0 / eps, 0.01, 50)).unwrap();
    let shape = traj.times.iter().zip(&traj.states).map(|(t, w)| w.sub(&exact(*t)).sup_norm()).fold(0.0, f64::max);
    let pass = ansatz <= tol::SOLITON_ANSATZ && shape <= tol::SOLITON_SHAPE;
    let detail = format!("ansatz residual {ansatz:.2e}, shape error {shape:.2e}");
    assert!(verdict(9, "soliton propagation", pass, &detail, t0));
}

/// Surging run for criterion 10: returns the detection time, if any, and the
/// largest amplitude ratio seen.
fn surging_run(n: usize, dt_scale: f64) -> (Option<f64>, f64, f64) {
    let (eps, mu, l) = (0.5f64, 1.0f64, 1.0);
    let p = RegimeParams::new(eps, 0.2, eps, mu).unwrap();
    let g = Grid64::new(n, l).unwrap();
    let speed = bump_speed(&g, &p, 0.3);
    let model = GeneralModel::new(g.clone(), GeneralModelSpec::breaking(&speed, eps, mu), speed.clone()).unwrap();
    let z0 = gaussian(&g, 1.0, -0.25, 0.2);
    let dt = model.stable_dt_at(&z0).unwrap() * dt_scale;
    let horizon = tol::HORIZON_K / eps;
    let mut mon = BreakingMonitor::new(&g, &z0, mu, BreakingGuards::default(), horizon);
    evolve_observed(&model, z0, &EvolveOptions::new(horizon, dt, 1), |s, z| mon.observe(s.time, z)).unwrap();
    let r = mon.report();
    let amp = r.sup_amp.iter().cloned().fold(0.0, f64::max) / r.sup_amp[0];
    (r.t_detect(), amp, r.energy_drift)
}

#[test]
fn criterion_10_breaking() {
    let t0 = Instant::now();
    // Threshold search over the sech^2 family at eps = sqrt(mu) = 0.3 and on
    // the surging-run parameters.
    let mut satisfied = 0;
    let mut best: f64 = 0.0;
    for &(eps, mu, beta, l) in &[(0.3f64, 0.09f64, 0.027f64, 20.0), (0.5, 1.0, 0.2, 1.0)] {
        let p = RegimeParams::new(eps, beta, eps, mu).unwrap();
        let g = Grid64::new(8192, l).unwrap();
        let speed = bump_speed(&g, &p, 0.3);
        let (w_min, w_max) = (4.0 * g.dx(), 0.25 * l);
        for iw in 0..12 {
            let width = w_min * (w_max / w_min).powf(iw as f64 / 11.0);
            for ia in 0..25 {
                let a = 1e-3 * 10f64.powf(ia as f64 * 0.25);
                let z = Field64::from_fn(&g, |x: f64| a / (x / width).cosh().powi(2));
                let r = breaking_threshold(&g, &z, eps, mu, &speed);
                best = best.max(r.lhs / r.rhs);
                satisfied += r.satisfied as usize;
            }
        }
    }
    say!("criterion 10 threshold: {satisfied} sech^2 profiles satisfy it; best lhs/rhs {best:.3e}");

    // Control: small smooth data stays regular up to K/eps.
    let (eps, mu) = (0.3f64, 0.09f64);
    let p = RegimeParams::new(eps, mu.powf(1.5), eps, mu).unwrap();
    let g = Grid64::new(512, 40.0).unwrap();
    let speed = bump_speed(&g, &p, 1.0);
    let model = GeneralModel::new(g.clone(), GeneralModelSpec::breaking(&speed, eps, mu), speed.clone()).unwrap();
    let z0 = gaussian(&g, 0.1, -10.0, 2.0);
    let horizon = tol::HORIZON_K / eps;
    let mut mon = BreakingMonitor::new(&g, &z0, mu, BreakingGuards::default(), horizon);
    let dt = 0.5 * model.stable_dt_at(&z0).unwrap();
    evolve_observed(&model, z0, &EvolveOptions::new(horizon, dt, 1), |s, z| mon.observe(s.time, z)).unwrap();
    let control = mon.report();
    let control_ok = control.classification == Classification::NoBreakingByHorizon;
    say!(
        "criterion 10 control: {:?}, energy drift {:.2e}",
        control.classification, control.energy_drift
    );

    // Steep data that does not pass the threshold still breaks; the gate
    // checks t_detect under dt and n refinement. The step bound scales like
    // 1/n, so the finest grid also halves dt.
    let base = surging_run(16384, 1.0);
    let finer_dt = surging_run(16384, 0.5);
    let finer_n = surging_run(32768, 1.0);
    let gate = refinement_gate(&[base.0, finer_dt.0, finer_n.0], tol::REFINEMENT);
    let amp_ok = [base.1, finer_dt.1, finer_n.1].iter().all(|&a| a <= tol::AMPLITUDE_GUARD);
    say!(
        "criterion 10 surging (uncertified data): t_detect {:?}, max amplitude ratio {:.2}, gate {} ({:.2e})",
        gate.t_detects,
        base.1.max(finer_dt.1).max(finer_n.1),
        if gate.passed { "passed" } else { "failed" },
        gate.max_rel_change
    );

    let pass = satisfied > 0 && control_ok && gate.passed && amp_ok;
    let ok = |b: bool| if b { "ok" } else { "failed" };
    let detail = format!(
        "{satisfied} profiles pass the analytic threshold (best lhs/rhs {best:.3e}); control {}, surging gate {}, amplitude guard {}",
        ok(control_ok),
        ok(gate.passed),
        ok(amp_ok)
    );
    assert!(verdict(10, "breaking", pass, &detail, t0));
}

#[test]
fn criterion_11_reconstruction_round_trip() {
    let t0 = Instant::now();
    let mus = [0.08f64, 0.04, 0.02, 0.01];
    let members: Vec<_> = mus.iter().map(|&mu| RegimeParams::new(mu.sqrt(), mu * mu, 1.0, mu).unwrap()).collect();
    let family = RegimeFamily { members: members.clone(), regime_tag: RegimeTag::ChJustified, bound_constant: 1.0 };
    assert!(check_regime(&family).unwrap().pass);
    let mut gaps = vec![];
    for p in &members {
        let g = Grid64::new(1024, 48.0).unwrap();
        let speed = bump_speed(&g, p, 3.0);
        let spec = GeneralModelSpec::velocity(&coeffs_from_p(rat(-1, 12)), &speed, p.eps, p.mu);
        let model = GeneralModel::new(g.clone(), spec, speed.clone()).unwrap();
        let traj = evolve(&model, gaussian(&g, 1.0, -15.0, 4.0), &EvolveOptions::new(1.0 / p.eps, 0.05, 10)).unwrap();
        let forward = ReconstructionSpec::new(ReconstructionVariant::ChZetaFromUHs, p.eps, p.mu);
        let back = ReconstructionSpec::new(ReconstructionVariant::ChUFromZetaHs, p.eps, p.mu);
        let pairs = pair_series(&g, &traj, &model, &forward, &speed).unwrap();
        let gap = (0..pairs.len())
            .map(|i| {
                let u = u_from_zeta(&g, &pairs.zeta[i], Some(&pairs.zeta_t[i]), &back, &speed).unwrap();
                u.sub(&pairs.u[i]).sup_norm()
            })
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    let fit = order_fit(&mus, &gaps).unwrap();
    let pass = fit.slope_within(tol::ORDER_TWO.0, tol::ORDER_TWO.1);
    let values: Vec<String> = gaps.iter().map(|v| format!("{v:.2e}")).collect();
    assert!(verdict(11, "reconstruction round trip", pass, &format!("slope {:.3}, gaps {}", fit.slope, values.join(" ")), t0));
}
