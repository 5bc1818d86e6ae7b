//! Reflected extensions across iℝ and their complex dilatation.
//!
//! With `x = Re z < 0` and `z* = -z̄`:
//!
//! ```text
//! schwarzian      ĥ(z) = h(z*) + 2x h'(z*) / (1 - x Ph(z*))    μ = -½ (2x)² Sh(z*)
//! pre-schwarzian  f̂(z) = f(z*) + 2x f'(z*)                     μ = -(2x) Pf(z*)
//! ```
//!
//! For `Re z ≥ 0` the extension is the map itself.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loewner::{check_k, family_ht, tau0_scan, Variant, DEFAULT_SCAN_MAX, DENOMINATOR_FLOOR};
use crate::maps::{eval_jet_in, ConformalMap, Scalar};
use crate::real::{cabs, lift, lower, Cx, Real, C64};
use crate::schwarz::{StripGrid, Symbols};

pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_MU_TOL: f64 = 1e-6;

fn reflect<T: Real>(z: Cx<T>) -> Cx<T> {
    Complex::new(-z.re, z.im)
}

fn beyond(z: C64, tau: f64) -> Error {
    Error::HorizonViolation {
        z,
        t: -z.re,
        reason: format!("Re z is beyond the horizon -{tau}"),
    }
}

/// Extension value with no horizon check.
pub fn extend_in<T: Scalar>(h: &dyn ConformalMap, variant: Variant, z: Cx<T>) -> Result<Cx<T>> {
    if z.re > T::zero() {
        return Ok(eval_jet_in(h, z)?.value());
    }
    if z.re == T::zero() {
        return h.value(lower(z)).map(lift);
    }
    let x = z.re;
    let zs = reflect(z);
    let s = Symbols::from_jet(&eval_jet_in(h, zs)?).map_err(|e| e.at(lower(zs)))?;
    let two_x = T::from_f64(2.0) * x;
    match variant {
        Variant::Schwarzian => {
            let d = Complex::new(T::one(), T::zero()) - s.ph * x;
            if !(cabs(d).to_f64() >= DENOMINATOR_FLOOR) {
                return Err(Error::HorizonViolation {
                    z: lower(z),
                    t: -x.to_f64(),
                    reason: "|1 - x·Ph(z*)| below floor".into(),
                });
            }
            Ok(s.value + s.d1 * two_x / d)
        }
        Variant::PreSchwarzian => Ok(s.value + s.d1 * two_x),
    }
}

/// `ĥ(z)` for `Re z > -tau`.
pub fn extend(h: &dyn ConformalMap, variant: Variant, tau: f64, z: C64) -> Result<C64> {
    if !(z.re > -tau) {
        return Err(beyond(z, tau));
    }
    extend_in(h, variant, z)
}

pub fn mu_formula_in<T: Scalar>(h: &dyn ConformalMap, variant: Variant, z: Cx<T>) -> Result<Cx<T>> {
    if !(z.re < T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "dilatation formula needs Re z < 0, got {}",
            lower(z)
        )));
    }
    let zs = reflect(z);
    let s = Symbols::from_jet(&eval_jet_in(h, zs)?).map_err(|e| e.at(lower(zs)))?;
    let two_x = T::from_f64(2.0) * z.re;
    Ok(match variant {
        Variant::Schwarzian => -(s.sh * (two_x * two_x / T::from_f64(2.0))),
        Variant::PreSchwarzian => -(s.ph * two_x),
    })
}

pub fn mu_formula(h: &dyn ConformalMap, variant: Variant, z: C64) -> Result<C64> {
    mu_formula_in(h, variant, z)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wirtinger<T: Real = f64> {
    pub d_z: Cx<T>,
    pub d_zbar: Cx<T>,
    pub mu: Cx<T>,
}

/// Central-difference `∂F = ½(F_x - iF_y)`, `∂̄F = ½(F_x + iF_y)` and their
/// ratio. Fails with [`Error::Degenerate`] when `|∂F| < 100·ε/step`.
pub fn wirtinger_mu_in<T: Real>(f: &dyn Fn(Cx<T>) -> Result<Cx<T>>, z: Cx<T>, step: f64) -> Result<Wirtinger<T>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("fd step must be positive, got {step}")));
    }
    let h = T::from_f64(step);
    let zero = T::zero();
    let fx = (f(z + Complex::new(h, zero))? - f(z - Complex::new(h, zero))?) / (h + h);
    let fy = (f(z + Complex::new(zero, h))? - f(z - Complex::new(zero, h))?) / (h + h);
    let i = Complex::new(zero, T::one());
    let half = T::from_f64(0.5);
    let d_z = (fx - i * fy) * half;
    let d_zbar = (fx + i * fy) * half;
    let size = cabs(d_z).to_f64();
    if !(size >= 100.0 * T::epsilon() / step) {
        return Err(Error::Degenerate { z: lower(z), d_z: size });
    }
    Ok(Wirtinger {
        d_z,
        d_zbar,
        mu: d_zbar / d_z,
    })
}

pub fn wirtinger_mu(f: &dyn Fn(C64) -> Result<C64>, z: C64, step: f64) -> Result<Wirtinger> {
    wirtinger_mu_in(f, z, step)
}

/// `ĥ(z) = h_{-Re z}(i Im z)` evaluated through the chain.
pub fn trace_extend(h: &dyn ConformalMap, variant: Variant, tau: f64, z: C64) -> Result<C64> {
    if !(z.re > -tau && z.re < 0.0) {
        return Err(beyond(z, tau));
    }
    family_ht(h, variant, -z.re, C64::new(0.0, z.im))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilatationSample {
    pub z: C64,
    pub value: C64,
    pub d_z: C64,
    pub d_zbar: C64,
    pub mu_fd: C64,
    pub mu_formula: C64,
    pub fd_step: f64,
}

impl DilatationSample {
    pub fn err(&self) -> f64 {
        (self.mu_fd - self.mu_formula).norm()
    }
}

/// Full dilatation sample at `z` in scalar `T`. The difference stencil may
/// reach slightly past the horizon, so no horizon check is applied here.
pub fn sample_in<T: Scalar>(h: &dyn ConformalMap, variant: Variant, z: C64, fd_step: f64) -> Result<DilatationSample> {
    if !(z.re < -fd_step) {
        return Err(Error::InvalidParameter(format!(
            "sample {z} too close to the axis for step {fd_step}"
        )));
    }
    let f = |w: Cx<T>| extend_in::<T>(h, variant, w);
    let zt = lift::<T>(z);
    let w = wirtinger_mu_in(&f, zt, fd_step)?;
    Ok(DilatationSample {
        z,
        value: lower(f(zt)?),
        d_z: lower(w.d_z),
        d_zbar: lower(w.d_zbar),
        mu_fd: lower(w.mu),
        mu_formula: lower(mu_formula_in::<T>(h, variant, zt)?),
        fd_step,
    })
}

pub fn sample(h: &dyn ConformalMap, variant: Variant, z: C64, fd_step: f64) -> Result<DilatationSample> {
    sample_in::<f64>(h, variant, z, fd_step)
}

/// Sample points `-x + iy` with `x` on the strip grid and `x < tau`.
pub fn reflected_grid(grid: &StripGrid, tau: f64) -> Vec<C64> {
    let ys = grid.y_values();
    let mut pts = Vec::new();
    for x in grid.x_values(tau) {
        if x >= tau * (1.0 - 1e-12) {
            continue;
        }
        for &y in &ys {
            pts.push(C64::new(-x, y));
        }
    }
    pts
}

#[derive(Clone, Debug)]
pub struct QcOptions {
    pub k: f64,
    pub fd_step: f64,
    pub mu_tol: f64,
    /// Use this horizon instead of scanning for one.
    pub tau: Option<f64>,
    pub grid: StripGrid,
    pub scan_max: f64,
}

impl Default for QcOptions {
    fn default() -> Self {
        Self {
            k: crate::loewner::DEFAULT_K,
            fd_step: DEFAULT_FD_STEP,
            mu_tol: DEFAULT_MU_TOL,
            tau: None,
            grid: StripGrid::default(),
            scan_max: DEFAULT_SCAN_MAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub z: (f64, f64),
    pub mu_fd: (f64, f64),
    pub mu_formula: (f64, f64),
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub z: (f64, f64),
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QcSummary {
    /// Largest `|mu_fd|` over accepted samples.
    pub max_mu: f64,
    pub max_mu_formula: f64,
    /// `k/2` (schwarzian) or `k` (pre-schwarzian).
    pub mu_bound: f64,
    pub max_identity_err: f64,
    pub degenerate_count: usize,
    pub failure_count: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QcReport {
    pub map: String,
    pub variant: Variant,
    pub k: f64,
    pub tau: f64,
    pub fd_step: f64,
    pub samples: Vec<SampleRecord>,
    pub degenerate: Vec<(f64, f64)>,
    pub failures: Vec<Failure>,
    pub summary: QcSummary,
}

fn pair(z: C64) -> (f64, f64) {
    (z.re, z.im)
}

/// Dilatation report over the reflected strip `-τ < Re z < 0`.
pub fn qc_report(h: &dyn ConformalMap, variant: Variant, opts: &QcOptions) -> Result<QcReport> {
    check_k(opts.k)?;
    if !(opts.fd_step > 0.0) {
        return Err(Error::InvalidParameter(format!("fd step must be positive, got {}", opts.fd_step)));
    }
    let tau = match opts.tau {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::InvalidParameter(format!("forced horizon must be positive, got {t}"))),
        None => tau0_scan(h, variant, opts.k, &opts.grid, opts.scan_max)?.tau,
    };
    let pts = reflected_grid(&opts.grid, tau);
    let results: Vec<Result<DilatationSample>> = pts.par_iter().map(|&z| sample(h, variant, z, opts.fd_step)).collect();

    let mut samples = Vec::new();
    let mut degenerate = Vec::new();
    let mut failures = Vec::new();
    let (mut max_mu, mut max_formula, mut max_err) = (0.0f64, 0.0f64, 0.0f64);
    for (z, r) in pts.iter().zip(results) {
        match r {
            Ok(s) => {
                max_mu = max_mu.max(s.mu_fd.norm());
                max_formula = max_formula.max(s.mu_formula.norm());
                max_err = max_err.max(s.err());
                samples.push(SampleRecord {
                    z: pair(s.z),
                    mu_fd: pair(s.mu_fd),
                    mu_formula: pair(s.mu_formula),
                    err: s.err(),
                });
            }
            Err(Error::Degenerate { .. }) => degenerate.push(pair(*z)),
            Err(e) => failures.push(Failure {
                z: pair(*z),
                error: e.to_string(),
            }),
        }
    }
    let mu_bound = match variant {
        Variant::Schwarzian => opts.k / 2.0,
        Variant::PreSchwarzian => opts.k,
    };
    let pass = failures.is_empty() && max_formula <= mu_bound + 1e-9 && max_err <= opts.mu_tol;
    Ok(QcReport {
        map: h.name(),
        variant,
        k: opts.k,
        tau,
        fd_step: opts.fd_step,
        summary: QcSummary {
            max_mu,
            max_mu_formula: max_formula,
            mu_bound,
            max_identity_err: max_err,
            degenerate_count: degenerate.len(),
            failure_count: failures.len(),
            pass,
        },
        samples,
        degenerate,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{counterexample_f, identity, moebius, perturbed_identity, square, MapRef};
    use crate::real::Dd;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pi03() -> MapRef {
        perturbed_identity(c(0.3, 0.0)).unwrap()
    }

    fn coarse() -> StripGrid {
        StripGrid {
            per_decade: 8,
            ny: 33,
            ..StripGrid::default()
        }
    }

    #[test]
    fn identity_extension_is_identity() {
        for v in Variant::ALL {
            for z in [c(-0.3, 1.0), c(0.0, 2.0), c(0.4, -1.0)] {
                assert!((extend(&*identity(), v, 1.0, z).unwrap() - z).norm() < 1e-15);
            }
            assert_eq!(mu_formula(&*identity(), v, c(-0.2, 0.1)).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn extension_matches_map_on_the_axis() {
        for v in Variant::ALL {
            let e = extend(&*pi03(), v, 1.0, c(0.0, 0.7)).unwrap();
            assert_eq!(e, pi03().value(c(0.0, 0.7)).unwrap());
        }
    }

    #[test]
    fn extension_spot_value() {
        let z = c(-0.01, 1.0);
        let zs = c(0.01, 1.0);
        let j = crate::maps::eval_jet(&*pi03(), zs).unwrap();
        let ph = j.derivative(2) / j.derivative(1);
        let expected = j.value() - 0.02 * j.derivative(1) / (1.0 + 0.01 * ph);
        let got = extend(&*pi03(), Variant::Schwarzian, 1.0, z).unwrap();
        assert!((got - expected).norm() < 1e-15);
        let trace = trace_extend(&*pi03(), Variant::Schwarzian, 1.0, z).unwrap();
        assert!((trace - got).norm() < 1e-12);
    }

    #[test]
    fn horizon_is_enforced() {
        assert!(matches!(
            extend(&*pi03(), Variant::Schwarzian, 0.1, c(-0.2, 0.0)),
            Err(Error::HorizonViolation { .. })
        ));
        assert!(trace_extend(&*pi03(), Variant::Schwarzian, 0.1, c(0.05, 0.0)).is_err());
    }

    #[test]
    fn square_dilatation_closed_form() {
        let z = c(-0.05, 0.3);
        let zs = c(0.05, 0.3);
        let expected = 3.0 * 0.05f64.powi(2) / (zs * zs);
        assert!((mu_formula(&*square(), Variant::Schwarzian, z).unwrap() - expected).norm() < 1e-15);
        // μ → 1 as y → 0: |3x²/x²| = 3
        assert!(mu_formula(&*square(), Variant::Schwarzian, c(-0.05, 0.0)).unwrap().norm() >= 1.0);
    }

    #[test]
    fn moebius_dilatation_vanishes() {
        let m = moebius(c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        for z in [c(-0.1, 0.0), c(-0.3, 2.0)] {
            assert!(mu_formula(&*m, Variant::Schwarzian, z).unwrap().norm() < 1e-15);
            let s = sample(&*m, Variant::Schwarzian, z, 1e-4).unwrap();
            assert!(s.d_zbar.norm() < 1e-6, "{}", s.d_zbar);
        }
    }

    #[test]
    fn wirtinger_examples() {
        let z = c(0.3, -0.2);
        let w = wirtinger_mu(&|z| Ok(z), z, 1e-3).unwrap();
        assert!((w.d_z - 1.0).norm() < 1e-12 && w.d_zbar.norm() < 1e-12 && w.mu.norm() < 1e-12);
        let w = wirtinger_mu(&|z: C64| Ok(z + 0.5 * z.conj()), z, 0.25).unwrap();
        assert!((w.d_z - 1.0).norm() < 1e-15);
        assert!((w.d_zbar - 0.5).norm() < 1e-15);
        assert!((w.mu - 0.5).norm() < 1e-15);
        assert!(matches!(wirtinger_mu(&|z: C64| Ok(z.conj()), z, 1e-3), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn fd_dilatation_matches_formula() {
        for v in Variant::ALL {
            for m in [pi03(), counterexample_f()] {
                for z in [c(-0.05, 0.3), c(-0.2, -1.0), c(-1e-3, 4.0)] {
                    let s = sample(&*m, v, z, 1e-5).unwrap();
                    assert!(s.err() <= 1e-6, "{} {v} {z}: {}", m.name(), s.err());
                }
            }
        }
    }

    #[test]
    fn fd_dilatation_is_second_order_in_dd() {
        for v in Variant::ALL {
            let z = c(-0.1, 0.4);
            let e1 = sample_in::<Dd>(&*pi03(), v, z, 1e-3).unwrap().err();
            let e2 = sample_in::<Dd>(&*pi03(), v, z, 5e-4).unwrap().err();
            let ratio = e1 / e2;
            assert!((3.9..4.1).contains(&ratio), "{v}: {ratio}");
        }
    }

    #[test]
    fn trace_equals_closed_form() {
        for v in Variant::ALL {
            for m in [pi03(), counterexample_f()] {
                for z in [c(-0.02, 0.5), c(-0.01, 1.0), c(-0.3, -2.0)] {
                    let a = trace_extend(&*m, v, 1.0, z).unwrap();
                    let b = extend(&*m, v, 1.0, z).unwrap();
                    assert!((a - b).norm() <= 1e-12, "{} {v} {z}", m.name());
                }
            }
        }
    }

    #[test]
    fn extension_is_continuous_across_the_axis() {
        for m in [pi03(), counterexample_f()] {
            for y in [-2.0, 0.0, 0.5, 3.0] {
                let edge = m.value(c(0.0, y)).unwrap();
                let mut last = f64::INFINITY;
                for eps in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
                    let d = (extend(&*m, Variant::Schwarzian, 1.0, c(-eps, y)).unwrap() - edge).norm();
                    assert!(d < last);
                    last = d;
                }
                assert!(last < 1e-3, "{} y={y}: {last}", m.name());
            }
        }
    }

    #[test]
    fn qc_report_examples() {
        let opts = QcOptions {
            grid: coarse(),
            ..QcOptions::default()
        };
        let r = qc_report(&*identity(), Variant::Schwarzian, &opts).unwrap();
        assert!(r.summary.pass && r.summary.max_mu < 1e-9);
        let r = qc_report(&*pi03(), Variant::Schwarzian, &opts).unwrap();
        assert!(r.summary.pass, "{:?}", r.summary);
        assert!(r.summary.max_mu_formula <= 0.25 + 1e-9);
        let forced = QcOptions {
            tau: Some(0.1),
            ..opts.clone()
        };
        let r = qc_report(&*square(), Variant::Schwarzian, &forced).unwrap();
        assert!(!r.summary.pass);
        assert!(r.summary.max_mu_formula >= 1.0);
        let r = qc_report(&*pi03(), Variant::PreSchwarzian, &opts).unwrap();
        assert!(r.summary.pass, "{:?}", r.summary);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn mu_identity_on_random_samples(cr in -0.6f64..0.6, ci in -0.6f64..0.6, frac in 0.01f64..0.99, y in -10.0f64..10.0) {
            let m = perturbed_identity(c(cr, ci)).unwrap();
            for v in Variant::ALL {
                let z = c(-frac * 0.3, y);
                let s = sample(&*m, v, z, DEFAULT_FD_STEP).unwrap();
                prop_assert!(s.err() <= DEFAULT_MU_TOL, "{v} {z}: {}", s.err());
            }
        }

        #[test]
        fn moebius_extension_is_holomorphic(a in 0.5f64..2.0, b in 0.0f64..2.0, d in 0.5f64..2.0, x in 0.01f64..0.2, y in -3.0f64..3.0) {
            let m = moebius(c(a, 0.0), c(b, 0.0), c(1.0, 0.0), c(d, 0.0)).unwrap();
            let z = c(-x, y);
            let s = sample(&*m, Variant::Schwarzian, z, 1e-4).unwrap();
            prop_assert!(s.d_zbar.norm() <= 1e-6 * s.d_z.norm().max(1.0), "{}", s.d_zbar);
        }
    }

    #[test]
    fn reflected_grid_stays_inside_the_strip() {
        let g = coarse();
        let pts = reflected_grid(&g, 0.3);
        assert!(pts.iter().all(|z| z.re < 0.0 && z.re > -0.3));
        assert_eq!(pts.len() % g.ny, 0);
    }
}
