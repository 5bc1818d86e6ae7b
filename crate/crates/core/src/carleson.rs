//! Carleson boxes `(0,|I|)×I` (mirrored for H*), densities and the
//! composite dilatation `μ̃`.

use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::mu_formula;
use crate::jets::Jet;
use crate::loewner::Variant;
use crate::maps::{eval_jet, MapRef};
use crate::real::C64;
use crate::report::row;
use crate::schwarz::{pre_schwarzian, schwarzian, StripGrid};

pub const DEFAULT_REL_TOL: f64 = 1e-6;
pub const DEFAULT_VANISH_FACTOR: f64 = 0.05;
pub const DEFAULT_POSITIONS: [f64; 9] = [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0];
const START_NODES: usize = 32;
const MAX_NODES: usize = 1024;

/// `|I| ∈ {2⁰, 2⁻¹, …, 2⁻¹⁰}`.
pub fn default_scales() -> Vec<f64> {
    (0..=10).map(|j| 0.5f64.powi(j)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    #[serde(rename = "H")]
    H,
    #[serde(rename = "H*")]
    HStar,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::H => 1.0,
            Side::HStar => -1.0,
        }
    }
}

/// Closed rectangle `x0 ≤ Re z ≤ x1, y0 ≤ Im z ≤ y1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

type Eval = Arc<dyn Fn(C64) -> Result<f64> + Send + Sync>;

/// Area density on H or H*.
#[derive(Clone)]
pub struct Density {
    pub name: String,
    pub side: Side,
    /// Zero outside this rectangle; boxes are clipped to it.
    pub support: Option<Rect>,
    /// Abscissae where the density may be non-smooth.
    pub x_breaks: Vec<f64>,
    eval: Eval,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("name", &self.name)
            .field("side", &self.side)
            .field("support", &self.support)
            .field("x_breaks", &self.x_breaks)
            .finish()
    }
}

impl Density {
    pub fn new(name: impl Into<String>, side: Side, f: impl Fn(C64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            side,
            support: None,
            x_breaks: Vec::new(),
            eval: Arc::new(f),
        }
    }

    pub fn zero(side: Side) -> Self {
        Self::new("zero", side, |_| Ok(0.0))
    }

    /// `value` on `rect`, zero elsewhere.
    pub fn indicator(side: Side, rect: Rect, value: f64) -> Self {
        let mut d = Self::new("indicator", side, move |z: C64| {
            let inside = z.re >= rect.x0 && z.re <= rect.x1 && z.im >= rect.y0 && z.im <= rect.y1;
            Ok(if inside { value } else { 0.0 })
        });
        d.support = Some(rect);
        d
    }

    pub fn with_support(mut self, rect: Rect) -> Self {
        self.support = Some(rect);
        self
    }

    pub fn with_break(mut self, x: f64) -> Self {
        self.x_breaks.push(x);
        self
    }

    pub fn eval(&self, z: C64) -> Result<f64> {
        let on_side = match self.side {
            Side::H => z.re > 0.0,
            Side::HStar => z.re < 0.0,
        };
        if !on_side {
            return Err(Error::InvalidParameter(format!("{z} is not on the {:?} side", self.side)));
        }
        let v = (self.eval)(z).map_err(|e| e.at(z))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter(format!("density {} = {v} at {z}", self.name)));
        }
        Ok(v)
    }
}

fn rule(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).expect("positive"))
        .as_node_weight_pairs()
        .to_vec()
}

/// Tensor Gauss–Legendre integral of `f(s, y)` over `s ∈ [0, s_max]`,
/// `y ∈ [y0, y1]`, split at `breaks` in `s`. The panel touching `s = 0` is
/// integrated in `s = a + (b-a)u²`.
fn tensor(f: &(dyn Fn(f64, f64) -> Result<f64> + Sync), panels: &[(f64, f64)], y0: f64, y1: f64, n: usize) -> Result<f64> {
    let r = rule(n);
    let mut total = 0.0;
    for &(a, b) in panels {
        if b <= a {
            continue;
        }
        let mut acc = 0.0;
        for &(u, wu) in &r {
            let (s, ws) = if a == 0.0 {
                let v = 0.5 * (u + 1.0);
                (b * v * v, b * v * wu)
            } else {
                (0.5 * ((b - a) * u + a + b), 0.5 * (b - a) * wu)
            };
            let mut col = 0.0;
            for &(v, wv) in &r {
                let y = 0.5 * ((y1 - y0) * v + y0 + y1);
                col += 0.5 * (y1 - y0) * wv * f(s, y)?;
            }
            acc += ws * col;
        }
        total += acc;
    }
    Ok(total)
}

fn converged(f: &(dyn Fn(f64, f64) -> Result<f64> + Sync), panels: &[(f64, f64)], y0: f64, y1: f64, rel_tol: f64) -> Result<f64> {
    if !(y1 > y0) || panels.iter().all(|&(a, b)| b <= a) {
        return Ok(0.0);
    }
    let mut n = START_NODES;
    let mut prev = tensor(f, panels, y0, y1, n)?;
    while n < MAX_NODES {
        n *= 2;
        let next = tensor(f, panels, y0, y1, n)?;
        if (next - prev).abs() <= rel_tol * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    let last = tensor(f, panels, y0, y1, n)?;
    Err(Error::Quadrature { previous: prev, last })
}

/// Panels of `[lo, hi]` in `s` split at the given cuts.
fn split(lo: f64, hi: f64, cuts: impl IntoIterator<Item = f64>) -> Vec<(f64, f64)> {
    let mut pts = vec![lo, hi];
    pts.extend(cuts.into_iter().filter(|&c| c > lo && c < hi));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `λ(box)/L` for the box of width `L` over `I = (c - L/2, c + L/2)`.
pub fn box_ratio(d: &Density, center_y: f64, length: f64) -> Result<f64> {
    box_ratio_tol(d, center_y, length, DEFAULT_REL_TOL)
}

pub fn box_ratio_tol(d: &Density, center_y: f64, length: f64, rel_tol: f64) -> Result<f64> {
    if !(length > 0.0 && length.is_finite() && center_y.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad box: center {center_y}, length {length}")));
    }
    let sign = d.side.sign();
    // box in s = |Re z| ∈ (0, L)
    let (mut s_lo, mut s_hi) = (0.0f64, length);
    let (mut y0, mut y1) = (center_y - length / 2.0, center_y + length / 2.0);
    if let Some(r) = d.support {
        let (a, b) = if sign > 0.0 { (r.x0, r.x1) } else { (-r.x1, -r.x0) };
        s_lo = s_lo.max(a);
        s_hi = s_hi.min(b);
        y0 = y0.max(r.y0);
        y1 = y1.min(r.y1);
    }
    if !(s_hi > s_lo) || !(y1 > y0) {
        return Ok(0.0);
    }
    let panels = split(s_lo, s_hi, d.x_breaks.iter().map(|&x| sign * x));
    let f = |s: f64, y: f64| d.eval(C64::new(sign * s, y));
    Ok(converged(&f, &panels, y0, y1, rel_tol)? / length)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub density: String,
    pub side: Side,
    /// Descending.
    pub scales: Vec<f64>,
    pub positions: Vec<f64>,
    /// `ratios[i][j]` for `scales[i]`, `positions[j]`.
    pub ratios: Vec<Vec<f64>>,
    pub norm_estimate: f64,
    pub per_scale_max: Vec<f64>,
    pub vanishing: bool,
    pub vanish_factor: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    density: &'a str,
    side: Side,
    scales: &'a [f64],
    norm_estimate: f64,
    per_scale_max: &'a [f64],
    vanishing: bool,
    vanish_factor: f64,
}

impl CarlesonReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,center_y,ratio\n");
        for (i, &l) in self.scales.iter().enumerate() {
            for (j, &c) in self.positions.iter().enumerate() {
                out.push_str(&row(&[l, c, self.ratios[i][j]]));
            }
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(Summary {
            density: &self.density,
            side: self.side,
            scales: &self.scales,
            norm_estimate: self.norm_estimate,
            per_scale_max: &self.per_scale_max,
            vanishing: self.vanishing,
            vanish_factor: self.vanish_factor,
        })
        .expect("summary serializes")
    }
}

pub fn carleson_scan(d: &Density, scales: &[f64], positions: &[f64]) -> Result<CarlesonReport> {
    carleson_scan_with(d, scales, positions, DEFAULT_VANISH_FACTOR, DEFAULT_REL_TOL)
}

/// Verdict: per-scale maxima non-increasing as the scale shrinks, and the
/// smallest-scale maximum at most `vanish_factor·norm`.
pub fn carleson_scan_with(d: &Density, scales: &[f64], positions: &[f64], vanish_factor: f64, rel_tol: f64) -> Result<CarlesonReport> {
    if scales.is_empty() || positions.is_empty() {
        return Err(Error::InvalidParameter("carleson scan needs scales and positions".into()));
    }
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.partial_cmp(a).unwrap());
    scales.dedup();
    let cells: Vec<(f64, f64)> = scales.iter().flat_map(|&l| positions.iter().map(move |&c| (l, c))).collect();
    let flat = cells
        .par_iter()
        .map(|&(l, c)| box_ratio_tol(d, c, l, rel_tol))
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<Vec<f64>> = flat.chunks(positions.len()).map(|c| c.to_vec()).collect();
    let per_scale_max: Vec<f64> = ratios.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();
    let norm_estimate = per_scale_max.iter().cloned().fold(0.0, f64::max);
    let monotone = per_scale_max.windows(2).all(|w| w[1] <= w[0]);
    let last = *per_scale_max.last().expect("nonempty");
    Ok(CarlesonReport {
        density: d.name.clone(),
        side: d.side,
        scales,
        positions: positions.to_vec(),
        ratios,
        norm_estimate,
        per_scale_max,
        vanishing: monotone && last <= vanish_factor * norm_estimate,
        vanish_factor,
    })
}

/// `(2Re z)|Ph(z)|²` on H.
pub fn vmoa_density(h: MapRef) -> Density {
    let name = format!("vmoa:{}", h.name());
    Density::new(name, Side::H, move |z| Ok(2.0 * z.re * pre_schwarzian(&*h, z)?.norm_sqr()))
}

/// `|μ(z)|²/(-2Re z)` on `-τ ≤ Re z < 0` with `μ` the closed-form dilatation.
pub fn mu_density(h: MapRef, variant: Variant, tau: f64) -> Result<Density> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let name = format!("mu:{}:{variant}", h.name());
    Ok(Density::new(name, Side::HStar, move |z| {
        if z.re < -tau {
            return Err(Error::OuterNotConfigured(z.re));
        }
        Ok(mu_formula(&*h, variant, z)?.norm_sqr() / (-2.0 * z.re))
    }))
}

/// Dilatation `μ_t` of an extension of `h_t`, evaluated at `w = z + t`.
pub trait OuterDilatation: Send + Sync {
    fn mu_t(&self, w: C64) -> Result<C64>;
}

pub struct ZeroOuter;

impl OuterDilatation for ZeroOuter {
    fn mu_t(&self, _: C64) -> Result<C64> {
        Ok(C64::new(0.0, 0.0))
    }
}

pub struct FnOuter<F>(pub F);

impl<F: Fn(C64) -> Result<C64> + Send + Sync> OuterDilatation for FnOuter<F> {
    fn mu_t(&self, w: C64) -> Result<C64> {
        (self.0)(w)
    }
}

/// `μ̃` on H*: the closed form on `-t ≤ Re z < 0`, `μ_t(z + t)` beyond.
#[derive(Clone)]
pub struct MuTilde {
    h: MapRef,
    t: f64,
    outer: Option<Arc<dyn OuterDilatation>>,
}

impl fmt::Debug for MuTilde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MuTilde")
            .field("h", &self.h.name())
            .field("t", &self.t)
            .field("outer", &self.outer.is_some())
            .finish()
    }
}

pub fn composite_mu_tilde(h: MapRef, t: f64, outer: Option<Arc<dyn OuterDilatation>>) -> Result<MuTilde> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    Ok(MuTilde { h, t, outer })
}

impl MuTilde {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn mu(&self, z: C64) -> Result<C64> {
        if !(z.re < 0.0) {
            return Err(Error::InvalidParameter(format!("mu tilde lives on Re z < 0, got {z}")));
        }
        if z.re >= -self.t {
            return mu_formula(&*self.h, Variant::Schwarzian, z);
        }
        match &self.outer {
            Some(o) => o.mu_t(z + self.t),
            None => Err(Error::OuterNotConfigured(z.re)),
        }
    }

    /// `|μ̃|²/(-2Re z)`, non-smooth across `Re z = -t`.
    pub fn density(&self) -> Density {
        let me = self.clone();
        Density::new(format!("mu-tilde:{}", self.h.name()), Side::HStar, move |z| {
            Ok(me.mu(z)?.norm_sqr() / (-2.0 * z.re))
        })
        .with_break(-self.t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BigBox {
    pub center_y: f64,
    pub length: f64,
    /// Box ratio of the composite density.
    pub lhs: f64,
    /// `(1/4L) ∬_{(0,min(t,L))×I} (2Re z)³|Sh(z)|²`.
    pub inner: f64,
    /// `(1/L) ∬_{(-L,-t]×I} |μ_t(z+t)|²/(-2Re z)`, zero when `L ≤ t`.
    pub outer: f64,
    pub residual: f64,
}

/// Both sides of the box split, each integrated on its own.
pub fn big_box_check(mt: &MuTilde, center_y: f64, length: f64, rel_tol: f64) -> Result<BigBox> {
    let lhs = box_ratio_tol(&mt.density(), center_y, length, rel_tol)?;
    let (y0, y1) = (center_y - length / 2.0, center_y + length / 2.0);
    let h = &mt.h;
    let sh = |s: f64, y: f64| Ok((2.0 * s).powi(3) * schwarzian(&**h, C64::new(s, y))?.norm_sqr() / 4.0);
    let inner = converged(&sh, &[(0.0, length.min(mt.t))], y0, y1, rel_tol)? / length;
    let outer = if length > mt.t {
        let o = mt.outer.as_ref().ok_or(Error::OuterNotConfigured(-length))?;
        let g = |s: f64, y: f64| Ok(o.mu_t(C64::new(mt.t - s, y))?.norm_sqr() / (2.0 * s));
        converged(&g, &[(mt.t, length)], y0, y1, rel_tol)? / length
    } else {
        0.0
    };
    Ok(BigBox {
        center_y,
        length,
        lhs,
        inner,
        outer,
        residual: (lhs - inner - outer).abs(),
    })
}

/// `ψ` as a jet-to-jet map, so its derivative comes for free.
pub type Psi<'a> = dyn Fn(&Jet) -> Result<Jet> + Sync + 'a;

/// `Ph = h''/h'` as a [`Psi`].
pub fn pre_schwarzian_psi(h: MapRef) -> impl Fn(&Jet) -> Result<Jet> + Sync {
    move |z: &Jet| {
        let j = eval_jet(&*h, z.center())?;
        let d1 = j.differentiate()?;
        d1.differentiate()?.div(&d1)
    }
}

/// `(sup |ψ|x^α, sup |ψ'|x^{α+1})` over the grid columns up to `x_max`.
pub fn weighted_sup_scan(psi: &Psi<'_>, alpha: f64, grid: &StripGrid, x_max: f64) -> Result<(f64, f64)> {
    grid.validate()?;
    let ys = grid.y_values();
    let cols = grid
        .x_values(x_max)
        .par_iter()
        .map(|&x| {
            let (mut s1, mut s2) = (0.0f64, 0.0f64);
            for &y in &ys {
                let z = C64::new(x, y);
                let p = psi(&Jet::variable(z)?).map_err(|e| e.at(z))?;
                s1 = s1.max(p.value().norm() * x.powf(alpha));
                s2 = s2.max(p.derivative(1).norm() * x.powf(alpha + 1.0));
            }
            Ok((s1, s2))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cols.into_iter().fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{identity, perturbed_identity};
    use proptest::prelude::*;

    fn unit_square() -> Density {
        Density::indicator(
            Side::H,
            Rect {
                x0: 0.0,
                x1: 1.0,
                y0: 0.0,
                y1: 1.0,
            },
            1.0,
        )
    }

    fn pi(c: f64) -> MapRef {
        perturbed_identity(C64::new(c, 0.0)).unwrap()
    }

    #[test]
    fn zero_density() {
        assert_eq!(box_ratio(&Density::zero(Side::H), 0.0, 1.0).unwrap(), 0.0);
        let r = carleson_scan(&Density::zero(Side::HStar), &default_scales(), &DEFAULT_POSITIONS).unwrap();
        assert_eq!(r.norm_estimate, 0.0);
        assert!(r.vanishing);
    }

    #[test]
    fn unit_square_boxes() {
        let d = unit_square();
        assert!((box_ratio(&d, 0.5, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((box_ratio(&d, 2.0, 4.0).unwrap() - 0.25).abs() < 1e-14);
        assert!((box_ratio(&d, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn unit_square_scan() {
        let mut pos = DEFAULT_POSITIONS.to_vec();
        pos.push(0.5);
        let r = carleson_scan(&unit_square(), &default_scales(), &pos).unwrap();
        assert!((r.norm_estimate - 1.0).abs() <= 1e-6);
        for (l, m) in r.scales.iter().zip(&r.per_scale_max) {
            assert!((m - l).abs() <= 1e-12, "{l}: {m}");
        }
        assert!(r.vanishing);
        let csv = r.to_csv();
        assert!(csv.starts_with("scale,center_y,ratio\n1,-8,0\n"));
        assert_eq!(csv.lines().count(), 1 + 11 * 10);
    }

    #[test]
    fn constant_density_scales_linearly() {
        let d = Density::indicator(
            Side::HStar,
            Rect {
                x0: -2.0,
                x1: 0.0,
                y0: -1.0,
                y1: 1.0,
            },
            3.0,
        );
        for l in [0.5, 0.25, 0.125] {
            assert!((box_ratio(&d, 0.0, l).unwrap() - 3.0 * l).abs() < 1e-13);
        }
    }

    #[test]
    fn vmoa_spot_value() {
        let d = vmoa_density(pi(0.3));
        let a = 0.3 * (-1.0f64).exp();
        let expected = 2.0 * (a / (1.0 - a)).powi(2);
        assert!((d.eval(C64::new(1.0, 0.0)).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.03078).abs() < 1e-5);
        assert_eq!(vmoa_density(identity()).eval(C64::new(0.3, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn vmoa_scan_vanishes_for_perturbed_identities() {
        for c in [0.1, 0.3, 0.5] {
            let r = carleson_scan(&vmoa_density(pi(c)), &default_scales(), &DEFAULT_POSITIONS).unwrap();
            assert!(r.vanishing, "{c}: {:?}", r.per_scale_max);
            assert!(r.norm_estimate > 0.0);
        }
    }

    #[test]
    fn mu_density_spot_and_limits() {
        let h = pi(0.3);
        let d = mu_density(h.clone(), Variant::Schwarzian, 0.4).unwrap();
        let sh = schwarzian(&*h, C64::new(0.1, 0.0)).unwrap().norm();
        let expected = (0.5 * 0.04 * sh).powi(2) / 0.2;
        assert!((d.eval(C64::new(-0.1, 0.0)).unwrap() - expected).abs() < 1e-15 * expected.max(1.0));
        assert!(matches!(d.eval(C64::new(-0.5, 0.0)).unwrap_err().root(), Error::OuterNotConfigured(_)));
        let id = mu_density(identity(), Variant::PreSchwarzian, 0.4).unwrap();
        assert_eq!(id.eval(C64::new(-0.2, 3.0)).unwrap(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn box_monotonicity(c in -4.0f64..4.0, l in 0.01f64..2.0) {
            let d = vmoa_density(pi(0.3));
            let tall = box_ratio(&d, c, l).unwrap() * l;
            let a = box_ratio(&d, c - l / 4.0, l / 2.0).unwrap() * l / 2.0;
            let b = box_ratio(&d, c + l / 4.0, l / 2.0).unwrap() * l / 2.0;
            prop_assert!(tall >= (a + b) * (1.0 - 1e-6));
        }

        #[test]
        fn indicator_ratio_is_linear_in_length(value in 0.1f64..10.0, c in -0.5f64..0.5, l in 0.01f64..0.9) {
            let rect = Rect { x0: 0.0, x1: 1.0, y0: -1.0, y1: 1.0 };
            let d = Density::indicator(Side::H, rect, value);
            prop_assert!((box_ratio(&d, c, l).unwrap() - value * l).abs() <= 1e-12 * value);
        }
    }

    #[test]
    fn composite_pieces() {
        let h = pi(0.3);
        let mt = composite_mu_tilde(h.clone(), 0.2, None).unwrap();
        let z = C64::new(-0.1, 0.7);
        assert_eq!(mt.mu(z).unwrap(), mu_formula(&*h, Variant::Schwarzian, z).unwrap());
        let e = mt.mu(C64::new(-0.4, 0.0)).unwrap_err();
        assert!(e.to_string().starts_with("outer extension not configured"));
        assert!(mt.mu(C64::new(0.1, 0.0)).is_err());
    }

    #[test]
    fn composite_small_boxes_match_mu_density() {
        let h = pi(0.3);
        let t = 0.2;
        let mt = composite_mu_tilde(h.clone(), t, Some(Arc::new(ZeroOuter))).unwrap();
        let md = mu_density(h, Variant::Schwarzian, t).unwrap();
        let scales: Vec<f64> = default_scales().into_iter().filter(|&l| l <= t).collect();
        let a = carleson_scan(&mt.density(), &scales, &DEFAULT_POSITIONS).unwrap();
        let b = carleson_scan(&md, &scales, &DEFAULT_POSITIONS).unwrap();
        for (ra, rb) in a.ratios.iter().flatten().zip(b.ratios.iter().flatten()) {
            assert!((ra - rb).abs() <= 1e-10);
        }
    }

    #[test]
    fn big_box_split() {
        let h = pi(0.3);
        let t = 0.2;
        let outer: Arc<dyn OuterDilatation> = Arc::new(FnOuter(|w: C64| Ok(0.1 * w.exp())));
        let mt = composite_mu_tilde(h, t, Some(outer)).unwrap();
        for (c, l) in [(0.0, 0.125), (0.0, 1.0), (2.0, 0.5)] {
            let b = big_box_check(&mt, c, l, 1e-12).unwrap();
            assert!(b.residual <= 1e-9, "{b:?}");
            assert_eq!(b.outer == 0.0, l <= t);
        }
    }

    #[test]
    fn weighted_sups() {
        let g = StripGrid {
            ny: 5,
            ..StripGrid::default()
        };
        let zero = |z: &Jet| Ok(z.scale(C64::new(0.0, 0.0))?);
        assert_eq!(weighted_sup_scan(&zero, 1.0, &g, 10.0).unwrap(), (0.0, 0.0));
        let e = |z: &Jet| z.neg().exp();
        let (s1, _) = weighted_sup_scan(&e, 1.0, &g, 10.0).unwrap();
        assert!((s1 - (-1.0f64).exp()).abs() < 1e-12, "{s1}");
        let ph = pre_schwarzian_psi(pi(0.3));
        let (s1, s2) = weighted_sup_scan(&ph, 1.0, &StripGrid::default(), 10.0).unwrap();
        assert!(s1.is_finite() && s2.is_finite() && s1 > 0.0);
        assert!((1.0 / 64.0..=64.0).contains(&(s2 / s1)), "{s1} {s2}");
    }
}
