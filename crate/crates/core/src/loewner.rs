//! The explicit chordal Loewner chain built from a map on H.
//!
//! For the Schwarzian variant, with `w = z + t`,
//!
//! ```text
//! h_t(z)  = h(w) - 2t h'(w) / (1 + t Ph(w))
//! p(z, t) = (1 - 2t² Sh(w)) / (1 + 2t² Sh(w))
//! ```
//!
//! and for the pre-Schwarzian variant `f_t(z) = f(w) - 2t f'(w)` with
//! `p = (1 + 2t Pf(w)) / (1 - 2t Pf(w))`. The chain satisfies
//! `∂_t h_t = -p ∂_z h_t` and the evolution family is the flow of `p`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::maps::{eval_jet_in, ConformalMap, Domain, MapRef, Scalar};
use crate::real::{cabs, lift, lower, Cx, Real, C64};
use crate::report::row;
use crate::schwarz::{column_sups, prefix_max, ColumnSup, StripGrid, Symbols};

pub const DEFAULT_K: f64 = 0.5;
pub const DEFAULT_RK_STEP: f64 = 1e-3;
/// Default upper end of the horizon scan.
pub const DEFAULT_SCAN_MAX: f64 = 1.0;
/// Smallest admissible modulus of any denominator in the chain formulas.
pub const DENOMINATOR_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Schwarzian,
    PreSchwarzian,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Schwarzian, Variant::PreSchwarzian];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Schwarzian => "schwarzian",
            Variant::PreSchwarzian => "pre-schwarzian",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schwarzian" => Ok(Variant::Schwarzian),
            "pre-schwarzian" => Ok(Variant::PreSchwarzian),
            _ => Err(Error::Parse(format!(
                "unknown variant `{s}` (expected schwarzian or pre-schwarzian)"
            ))),
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

fn violation<T: Real>(z: Cx<T>, t: T, reason: impl Into<String>) -> Error {
    Error::HorizonViolation {
        z: lower(z),
        t: t.to_f64(),
        reason: reason.into(),
    }
}

fn guard<T: Real>(d: Cx<T>, z: Cx<T>, t: T, what: &str) -> Result<()> {
    let m = cabs(d).to_f64();
    if !(m >= DENOMINATOR_FLOOR) {
        return Err(violation(z, t, format!("|{what}| = {m:.3e} below {DENOMINATOR_FLOOR:e}")));
    }
    Ok(())
}

fn symbols_at<T: Scalar>(h: &dyn ConformalMap, w: Cx<T>) -> Result<Symbols<T>> {
    Symbols::from_jet(&eval_jet_in(h, w)?).map_err(|e| e.at(lower(w)))
}

fn check_time<T: Real>(z: Cx<T>, t: T) -> Result<()> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(violation(z, t, "time must be nonnegative"));
    }
    if z.re < T::zero() {
        return Err(violation(z, t, "point left of the imaginary axis"));
    }
    Ok(())
}

/// Herglotz function of the chain at `(z, t)`; `t` is not checked against
/// any horizon, only the denominator guard applies.
pub fn herglotz_p_in<T: Scalar>(h: &dyn ConformalMap, variant: Variant, z: Cx<T>, t: T) -> Result<Cx<T>> {
    check_time(z, t)?;
    let s = symbols_at(h, z + Complex::new(t, T::zero()))?;
    let one = Complex::new(T::one(), T::zero());
    let two = T::from_f64(2.0);
    let q = match variant {
        Variant::Schwarzian => s.sh * (two * t * t),
        Variant::PreSchwarzian => -(s.ph * (two * t)),
    };
    guard(one + q, z, t, "1 + q")?;
    Ok((one - q) / (one + q))
}

/// `|(p - 1)/(p + 1)|` computed directly from the symbols: `2t²|Sh(z+t)|`
/// or `2t|Pf(z+t)|`.
pub fn disk_radius(h: &dyn ConformalMap, variant: Variant, z: C64, t: f64) -> Result<f64> {
    let s = symbols_at::<f64>(h, z + t)?;
    Ok(match variant {
        Variant::Schwarzian => 2.0 * t * t * s.sh.norm(),
        Variant::PreSchwarzian => 2.0 * t * s.ph.norm(),
    })
}

/// Membership of `p` in `U(k) = {|p - 1| ≤ k |p + 1|}`.
pub fn in_disk(p: C64, k: f64) -> bool {
    (p - 1.0).norm() <= k * (p + 1.0).norm()
}

/// `h_t(z)`; `z` may lie on the closed half-plane.
pub fn family_ht_in<T: Scalar>(h: &dyn ConformalMap, variant: Variant, t: T, z: Cx<T>) -> Result<Cx<T>> {
    check_time(z, t)?;
    let s = symbols_at(h, z + Complex::new(t, T::zero()))?;
    let two_t = T::from_f64(2.0) * t;
    match variant {
        Variant::Schwarzian => {
            let d = Complex::new(T::one(), T::zero()) + s.ph * t;
            guard(d, z, t, "1 + t·Ph")?;
            Ok(s.value - s.d1 * two_t / d)
        }
        Variant::PreSchwarzian => Ok(s.value - s.d1 * two_t),
    }
}

pub fn family_ht(h: &dyn ConformalMap, variant: Variant, t: f64, z: C64) -> Result<C64> {
    family_ht_in(h, variant, t, z)
}

/// Jet of `z ↦ h_t(z)`; exact through order 2 for the Schwarzian variant
/// and order 3 for the pre-Schwarzian one.
pub fn family_ht_jet(h: &dyn ConformalMap, variant: Variant, t: f64, z: C64) -> Result<Jet> {
    check_time(z, t)?;
    let base = eval_jet_in::<f64>(h, z + t)?;
    // re-center the jet of h(· + t) at z
    let hz = Jet::from_derivatives(z, base.derivatives())?;
    let d1 = hz.differentiate()?;
    let two_t = C64::new(2.0 * t, 0.0);
    match variant {
        Variant::Schwarzian => {
            let d2 = d1.differentiate()?;
            let den = d1.add(&d2.scale(C64::new(t, 0.0))?)?;
            guard(den.value() / d1.value(), z, t, "1 + t·Ph")?;
            let corr = d1.mul(&d1)?.div(&den)?.scale(two_t)?;
            hz.sub(&corr)
        }
        Variant::PreSchwarzian => hz.sub(&d1.scale(two_t)?),
    }
}

/// Closed-form `(∂_t h_t, ∂_z h_t)` at `z`.
pub fn family_derivatives(h: &dyn ConformalMap, variant: Variant, t: f64, z: C64) -> Result<(C64, C64)> {
    family_derivatives_in(h, variant, t, z)
}

pub fn family_derivatives_in<T: Scalar>(
    h: &dyn ConformalMap,
    variant: Variant,
    t: T,
    z: Cx<T>,
) -> Result<(Cx<T>, Cx<T>)> {
    check_time(z, t)?;
    let s = symbols_at(h, z + Complex::new(t, T::zero()))?;
    let one = Complex::new(T::one(), T::zero());
    let two = T::from_f64(2.0);
    match variant {
        Variant::Schwarzian => {
            let d = one + s.ph * t;
            guard(d, z, t, "1 + t·Ph")?;
            let q = s.sh * (two * t * t);
            let d2 = d * d;
            Ok((-(s.d1 * (one - q)) / d2, s.d1 * (one + q) / d2))
        }
        Variant::PreSchwarzian => {
            let q = s.ph * (two * t);
            Ok((-(s.d1 * (one + q)), s.d1 * (one - q)))
        }
    }
}

/// `|∂_t h_t + p ∂_z h_t|` from the closed forms.
pub fn pde_residual(h: &dyn ConformalMap, variant: Variant, z: C64, t: f64) -> Result<f64> {
    let (dt, dz) = family_derivatives(h, variant, t, z)?;
    let p = herglotz_p_in(h, variant, z, t)?;
    Ok((dt + p * dz).norm())
}

/// `Ph_t(z)` from the symbols of `h` at `z + t` (Schwarzian variant).
pub fn pre_schwarzian_of_ht(h: &dyn ConformalMap, t: f64, z: C64) -> Result<C64> {
    let s = symbols_at::<f64>(h, z + t)?;
    let a = 1.0 + 2.0 * t * t * s.sh;
    let b = 1.0 + t * s.ph;
    guard(a, z, t, "1 + 2t²Sh")?;
    guard(b, z, t, "1 + t·Ph")?;
    Ok(s.ph + 2.0 * t * t * s.dsh / a - 2.0 * t * s.dph / b)
}

/// A Herglotz field with its disk level `k` and validity horizon.
#[derive(Clone, Debug)]
pub struct HerglotzField {
    map: MapRef,
    variant: Variant,
    k: f64,
    tau0: f64,
}

impl HerglotzField {
    pub fn new(map: MapRef, variant: Variant, k: f64, tau0: f64) -> Result<Self> {
        check_k(k)?;
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {tau0}")));
        }
        Ok(Self { map, variant, k, tau0 })
    }

    /// Field whose horizon comes from [`tau0_scan`].
    pub fn certified(map: MapRef, variant: Variant, k: f64, grid: &StripGrid, t_max: f64) -> Result<Self> {
        let hz = tau0_scan(&*map, variant, k, grid, t_max)?;
        Self::new(map, variant, k, hz.tau)
    }

    pub fn map(&self) -> &MapRef {
        &self.map
    }
    pub fn variant(&self) -> Variant {
        self.variant
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn tau0(&self) -> f64 {
        self.tau0
    }
    /// `K = (1 + k)/(1 - k)`.
    pub fn big_k(&self) -> f64 {
        (1.0 + self.k) / (1.0 - self.k)
    }
    /// `C₂ = (1 - k)/(1 + k)`.
    pub fn c2(&self) -> f64 {
        (1.0 - self.k) / (1.0 + self.k)
    }

    fn check_window(&self, s: f64, t: f64, z: C64) -> Result<()> {
        let top = self.tau0 * (1.0 + 1e-12);
        if !(0.0 <= s && s <= t && t <= top) {
            return Err(Error::HorizonViolation {
                z,
                t,
                reason: format!("need 0 ≤ s ≤ t ≤ τ₀ = {}, got s = {s}", self.tau0),
            });
        }
        Ok(())
    }

    pub fn p(&self, z: C64, t: f64) -> Result<C64> {
        self.check_window(0.0, t, z)?;
        herglotz_p_in(&*self.map, self.variant, z, t)
    }

    pub fn p_in<T: Scalar>(&self, z: Cx<T>, t: T) -> Result<Cx<T>> {
        self.check_window(0.0, t.to_f64(), lower(z))?;
        herglotz_p_in(&*self.map, self.variant, z, t)
    }
}

pub fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::InvalidParameter(format!("k must lie in (0, 1), got {k}")));
    }
    Ok(())
}

pub fn herglotz_p(field: &HerglotzField, z: C64, t: f64) -> Result<C64> {
    field.p(z, t)
}

/// Uniform step count covering `[s, t]` with steps no longer than `step`.
pub fn step_count(s: f64, t: f64, step: f64) -> usize {
    (((t - s) / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Classical RK4 for `dz/dt = p(z, t)` from `s` to `t`.
pub fn evolve_in<T: Scalar>(field: &HerglotzField, s: f64, t: f64, z: Cx<T>, step: f64) -> Result<Cx<T>> {
    field.check_window(s, t, lower(z))?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    if !(z.re > T::zero()) {
        return Err(Error::StepRejected { z: lower(z), t: s });
    }
    if t == s {
        return Ok(z);
    }
    let n = step_count(s, t, step);
    let s_t = T::from_f64(s);
    let h = (T::from_f64(t) - s_t) / T::from_f64(n as f64);
    let half = h / T::from_f64(2.0);
    let sixth = h / T::from_f64(6.0);
    let two = T::from_f64(2.0);
    let map = &*field.map;
    let p = |w: Cx<T>, tau: T| -> Result<Cx<T>> {
        if !(w.re > T::zero()) {
            return Err(Error::StepRejected {
                z: lower(w),
                t: tau.to_f64(),
            });
        }
        herglotz_p_in(map, field.variant, w, tau)
    };
    let mut w = z;
    for i in 0..n {
        let tau = s_t + h * T::from_f64(i as f64);
        let k1 = p(w, tau)?;
        let k2 = p(w + k1 * half, tau + half)?;
        let k3 = p(w + k2 * half, tau + half)?;
        let k4 = p(w + k3 * h, tau + h)?;
        w = w + (k1 + k2 * two + k3 * two + k4) * sixth;
        if !(w.re > T::zero()) {
            return Err(Error::StepRejected {
                z: lower(w),
                t: (tau + h).to_f64(),
            });
        }
    }
    Ok(w)
}

pub fn evolve(field: &HerglotzField, s: f64, t: f64, z: C64, step: f64) -> Result<C64> {
    evolve_in(field, s, t, z, step)
}

/// One evolution with a Richardson error estimate from the step pair
/// `(step, step/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvolveRecord {
    pub s: f64,
    pub t: f64,
    pub z0: (f64, f64),
    pub z: (f64, f64),
    pub step: f64,
    pub residual_estimate: f64,
}

pub fn evolve_record(field: &HerglotzField, s: f64, t: f64, z0: C64, step: f64) -> Result<EvolveRecord> {
    let coarse = evolve(field, s, t, z0, step)?;
    let fine = evolve(field, s, t, z0, step / 2.0)?;
    Ok(EvolveRecord {
        s,
        t,
        z0: (z0.re, z0.im),
        z: (fine.re, fine.im),
        step,
        residual_estimate: (coarse - fine).norm() / 15.0,
    })
}

pub fn trace_csv(records: &[EvolveRecord]) -> String {
    let mut out = String::from("s,t,z0_re,z0_im,z_re,z_im,step,residual_estimate\n");
    for r in records {
        out.push_str(&row(&[r.s, r.t, r.z0.0, r.z0.1, r.z.0, r.z.1, r.step, r.residual_estimate]));
    }
    out
}

/// Result of [`tau0_scan`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Horizon {
    pub variant: Variant,
    pub k: f64,
    pub tau: f64,
    pub sigma_at_tau: f64,
    pub beta_at_tau: f64,
    /// Running strip maxima over the scan columns, the certifying profile.
    pub profile: Vec<ColumnSup>,
}

fn column_ok(c: &ColumnSup, variant: Variant, k: f64) -> bool {
    match variant {
        Variant::Schwarzian => c.sigma <= k && c.beta <= k,
        Variant::PreSchwarzian => c.beta <= k,
    }
}

/// Largest grid width `t` in `(0, t_max]` whose strip maxima stay within
/// level `k`: `σ(t) ≤ k` and `β(t) ≤ k` for the Schwarzian variant (the
/// second keeps `1 + t·Ph` away from zero), `β(t) ≤ k` for the other.
///
/// The running maxima are monotone in `t`, so the admissible columns form
/// a prefix and the boundary is found by bisection.
pub fn tau0_scan(h: &dyn ConformalMap, variant: Variant, k: f64, grid: &StripGrid, t_max: f64) -> Result<Horizon> {
    check_k(k)?;
    if h.domain() != Domain::RightHalfPlane {
        return Err(Error::InvalidParameter(format!("`{}` is not a map on H", h.name())));
    }
    if !(t_max >= grid.x_min) {
        return Err(Error::InvalidParameter(format!(
            "scan maximum {t_max} is below the grid start {}",
            grid.x_min
        )));
    }
    let xs = grid.x_values(t_max);
    let running = prefix_max(&column_sups(h, &xs, grid)?);
    let n_ok = running.partition_point(|c| column_ok(c, variant, k));
    if n_ok == 0 {
        return Err(Error::NoHorizon { k });
    }
    let last = running[n_ok - 1];
    Ok(Horizon {
        variant,
        k,
        tau: last.x,
        sigma_at_tau: last.sigma,
        beta_at_tau: last.beta,
        profile: running[..n_ok].to_vec(),
    })
}

/// Koebe lower bound `|g(z₀) - g(z₀ + t)| ≥ (t/4)|g'(z₀ + t)|`.
pub fn koebe_check(g: &dyn ConformalMap, z0: C64, t: f64) -> Result<(f64, f64)> {
    let a = eval_jet_in::<f64>(g, z0)?.value();
    let b = eval_jet_in::<f64>(g, z0 + t)?;
    Ok(((a - b.value()).norm(), t / 4.0 * b.derivative(1).norm()))
}

/// Smallest pairwise distance among `values`.
pub fn min_pairwise_distance(values: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

/// `h_t(φ_{0,t}(z))`, which must equal `h(z)` along the flow.
pub fn conjugation_in<T: Scalar>(field: &HerglotzField, t: f64, z: C64, step: f64) -> Result<Cx<T>> {
    let w = evolve_in(field, 0.0, t, lift::<T>(z), step)?;
    family_ht_in(&*field.map, field.variant, T::from_f64(t), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{counterexample_f, eval_jet, half_strip_g, identity, perturbed_identity, phi, square};
    use crate::real::Dd;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pi03() -> MapRef {
        perturbed_identity(c(0.3, 0.0)).unwrap()
    }

    fn coarse() -> StripGrid {
        StripGrid {
            ny: 65,
            per_decade: 16,
            ..StripGrid::default()
        }
    }

    #[test]
    fn variant_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("radial".parse::<Variant>().is_err());
    }

    #[test]
    fn p_is_one_at_time_zero_and_for_identity() {
        for v in Variant::ALL {
            assert_eq!(herglotz_p_in(&*pi03(), v, c(1.0, 1.0), 0.0).unwrap(), c(1.0, 0.0));
            assert_eq!(herglotz_p_in(&*identity(), v, c(0.3, -2.0), 0.4).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn disk_identity_spot_value() {
        let (z, t) = (c(1.0, 0.0), 0.05);
        let p = herglotz_p_in(&*pi03(), Variant::Schwarzian, z, t).unwrap();
        let lhs = ((p - 1.0) / (p + 1.0)).norm();
        let sh = crate::schwarz::schwarzian(&*pi03(), c(1.05, 0.0)).unwrap();
        assert!((lhs - 2.0 * t * t * sh.norm()).abs() <= 1e-12);
    }

    #[test]
    fn family_identity_reductions() {
        for v in Variant::ALL {
            let z = c(0.7, 1.1);
            assert_eq!(family_ht(&*pi03(), v, 0.0, z).unwrap(), pi03().value(z).unwrap());
            let ht = family_ht(&*identity(), v, 0.3, z).unwrap();
            assert!((ht - (z - 0.3)).norm() < 1e-15);
            let (dt, dz) = family_derivatives(&*identity(), v, 0.3, z).unwrap();
            assert_eq!((dt, dz), (c(-1.0, 0.0), c(1.0, 0.0)));
            let (dt0, dz0) = family_derivatives(&*pi03(), v, 0.0, z).unwrap();
            let d1 = eval_jet(&*pi03(), z).unwrap().derivative(1);
            assert_eq!((dt0, dz0), (-d1, d1));
        }
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let (z, t, e) = (c(0.4, 0.9), 0.08, 1e-5);
        for m in [pi03(), counterexample_f()] {
            for v in Variant::ALL {
                let (dt, dz) = family_derivatives(&*m, v, t, z).unwrap();
                let f = |t: f64, z: C64| family_ht(&*m, v, t, z).unwrap();
                let fd_z = (f(t, z + e) - f(t, z - e)) / (2.0 * e);
                let fd_t = (f(t + e, z) - f(t - e, z)) / (2.0 * e);
                assert!((dz - fd_z).norm() < 1e-8, "{} {v}", m.name());
                assert!((dt - fd_t).norm() < 1e-8, "{} {v}", m.name());
            }
        }
    }

    #[test]
    fn pde_residual_examples() {
        assert!(pde_residual(&*identity(), Variant::Schwarzian, c(0.2, 3.0), 0.7).unwrap() < 1e-14);
        assert!(pde_residual(&*pi03(), Variant::Schwarzian, c(1.0, 2.0), 0.05).unwrap() <= 1e-10);
        assert!(pde_residual(&*counterexample_f(), Variant::Schwarzian, c(2.0, 0.0), 0.01).unwrap() <= 1e-10);
        assert!(pde_residual(&*pi03(), Variant::PreSchwarzian, c(1.0, 2.0), 0.05).unwrap() <= 1e-10);
    }

    #[test]
    fn ht_jet_agrees_with_value_and_expansion() {
        for (z, t) in [(c(0.5, 0.3), 0.05), (c(0.1, -1.0), 0.2)] {
            for v in Variant::ALL {
                let j = family_ht_jet(&*pi03(), v, t, z).unwrap();
                assert!((j.value() - family_ht(&*pi03(), v, t, z).unwrap()).norm() < 1e-14);
                let (_, dz) = family_derivatives(&*pi03(), v, t, z).unwrap();
                assert!((j.derivative(1) - dz).norm() < 1e-14);
            }
            let j = family_ht_jet(&*pi03(), Variant::Schwarzian, t, z).unwrap();
            assert!(j.order() >= 2);
            let ph_t = j.derivative(2) / j.derivative(1);
            let expansion = pre_schwarzian_of_ht(&*pi03(), t, z).unwrap();
            assert!((ph_t - expansion).norm() < 1e-13 * (1.0 + ph_t.norm()), "{ph_t} vs {expansion}");
        }
    }

    #[test]
    fn horizon_guards() {
        let (z, t) = (c(1.0, 0.0), 0.2);
        // Ph = -2/(w + 0.1) for z/(z + 0.1), so 1 + t·Ph(z + t) vanishes at z = t - 0.1
        let m = crate::maps::moebius(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.1, 0.0)).unwrap();
        let err = family_ht(&*m, Variant::Schwarzian, t, c(0.1, 0.0)).unwrap_err();
        assert!(matches!(err, Error::HorizonViolation { .. }), "{err}");
        let field = HerglotzField::new(pi03(), Variant::Schwarzian, 0.5, 0.1).unwrap();
        assert!(matches!(field.p(z, 0.2), Err(Error::HorizonViolation { .. })));
        assert!(HerglotzField::new(pi03(), Variant::Schwarzian, 1.0, 0.1).is_err());
    }

    #[test]
    fn evolve_examples() {
        let field = HerglotzField::new(identity(), Variant::Schwarzian, 0.5, 1.0).unwrap();
        let z = c(0.3, 0.4);
        assert_eq!(evolve(&field, 0.2, 0.2, z, 1e-3).unwrap(), z);
        let w = evolve(&field, 0.1, 0.8, z, 1e-3).unwrap();
        assert!((w - (z + 0.7)).norm() < 1e-14);
        let field = HerglotzField::new(pi03(), Variant::Schwarzian, 0.5, 0.4).unwrap();
        let z = c(1.0, 1.0);
        let w = evolve(&field, 0.0, 0.05, z, 1e-3).unwrap();
        assert!((w - z).norm() <= field.big_k() * 0.05);
        assert!(evolve(&field, 0.0, 0.5, z, 1e-3).is_err());
        assert!(matches!(evolve(&field, 0.0, 0.1, c(-0.1, 0.0), 1e-3), Err(Error::StepRejected { .. })));
    }

    #[test]
    fn tau0_examples() {
        let g = coarse();
        let id = tau0_scan(&*identity(), Variant::Schwarzian, 0.5, &g, 1.0).unwrap();
        assert!((id.tau - 1.0).abs() < 1e-12);
        let h = tau0_scan(&*pi03(), Variant::Schwarzian, 0.5, &g, 1.0).unwrap();
        assert!(h.tau > 0.0 && h.sigma_at_tau <= 0.5 && h.beta_at_tau <= 0.5);
        assert_eq!(
            tau0_scan(&*square(), Variant::Schwarzian, 0.5, &g, 1.0).unwrap_err(),
            Error::NoHorizon { k: 0.5 }
        );
        assert_eq!(Error::NoHorizon { k: 0.5 }.to_string(), "no horizon at level 0.5");
        let pre = tau0_scan(&*pi03(), Variant::PreSchwarzian, 0.5, &g, 1.0).unwrap();
        assert!(pre.beta_at_tau <= 0.5);
    }

    #[test]
    fn scanned_horizon_keeps_p_in_the_disk() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for v in Variant::ALL {
            let field = HerglotzField::certified(pi03(), v, 0.5, &coarse(), 1.0).unwrap();
            for _ in 0..500 {
                let z = c(rng.gen_range(1e-3..3.0), rng.gen_range(-10.0..10.0));
                let t = rng.gen_range(0.0..field.tau0());
                let p = field.p(z, t).unwrap();
                assert!(in_disk(p, field.k()), "{v} z={z} t={t} p={p}");
                assert!(p.re >= field.c2() - 1e-12);
                assert!(p.norm() <= field.big_k() + 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn semigroup_and_drift(a in 0.0f64..1.0, b in 0.0f64..1.0, d in 0.0f64..1.0, x in 0.01f64..2.0, y in -3.0f64..3.0) {
            let field = HerglotzField::certified(pi03(), Variant::Schwarzian, 0.5, &coarse(), 1.0).unwrap();
            let step = 1e-3;
            let mut ts = [a * field.tau0(), b * field.tau0(), d * field.tau0()];
            ts.sort_by(|p, q| p.partial_cmp(q).unwrap());
            let [s, u, t] = ts;
            let z = c(x, y);
            let two = evolve(&field, u, t, evolve(&field, s, u, z, step).unwrap(), step).unwrap();
            let one = evolve(&field, s, t, z, step).unwrap();
            prop_assert!((two - one).norm() <= 10.0 * step.powi(4) * (t - s) + 1e-14, "{}", (two - one).norm());
            prop_assert!((one - z).norm() <= field.big_k() * (t - s) + 1e-8);
            prop_assert!(one.re - z.re >= field.c2() * (t - s) - 1e-8);
        }

        #[test]
        fn disk_identity_holds(x in 1e-3f64..2.0, y in -20.0f64..20.0, frac in 0.0f64..1.0) {
            for m in [pi03(), counterexample_f()] {
                let tau = tau0_scan(&*m, Variant::Schwarzian, 0.5, &coarse(), 1.0).unwrap().tau;
                let t = tau * (1.0 - frac);
                let z = c(x, y);
                let p: C64 = herglotz_p_in(&*m, Variant::Schwarzian, z, t).unwrap();
                let lhs = ((p - 1.0) / (p + 1.0)).norm();
                let rhs = 2.0 * t * t * crate::schwarz::schwarzian(&*m, z + t).unwrap().norm();
                prop_assert!((lhs - rhs).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn ht_is_injective_on_a_grid() {
        let m = pi03();
        let tau = tau0_scan(&*m, Variant::Schwarzian, 0.5, &StripGrid::default(), 1.0).unwrap().tau;
        let mut values = Vec::new();
        for i in 0..41 {
            let x = 1e-3 * (2e3f64).powf(i as f64 / 40.0);
            for j in 0..41 {
                let y = -5.0 + 10.0 * j as f64 / 40.0;
                values.push(family_ht(&*m, Variant::Schwarzian, tau, c(x, y)).unwrap());
            }
        }
        assert!(min_pairwise_distance(&values) > 1e-9);
    }

    #[test]
    fn conjugation_is_fourth_order() {
        let field = HerglotzField::certified(pi03(), Variant::Schwarzian, 0.5, &coarse(), 1.0).unwrap();
        let t = field.tau0().min(0.05);
        let z = c(0.2, 0.5);
        let target = eval_jet_in::<Dd>(&*pi03(), lift(z)).unwrap().value();
        let err = |step: f64| cabs(conjugation_in::<Dd>(&field, t, z, step).unwrap() - target).to_f64();
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 <= 1e-8);
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn koebe_on_univalent_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in [phi(), half_strip_g(), counterexample_f(), square(), pi03()] {
            for _ in 0..200 {
                let z0 = c(rng.gen_range(1e-3..3.0), rng.gen_range(-5.0..5.0));
                let (lhs, rhs) = koebe_check(&*m, z0, rng.gen_range(1e-4..0.1)).unwrap();
                assert!(lhs >= rhs, "{} {z0}", m.name());
            }
        }
    }

    #[test]
    fn trace_csv_columns() {
        let field = HerglotzField::new(identity(), Variant::Schwarzian, 0.5, 1.0).unwrap();
        let r = evolve_record(&field, 0.0, 0.5, c(1.0, 0.0), 1e-2).unwrap();
        assert!((r.z.0 - 1.5).abs() < 1e-13 && r.residual_estimate < 1e-14);
        let csv = trace_csv(&[r]);
        assert!(csv.starts_with("s,t,z0_re,z0_im,z_re,z_im,step,residual_estimate\n"));
        let fields: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(&fields[..4], &[0.0, 0.5, 1.0, 0.0]);
    }
}
