//! Pre-Schwarzian and Schwarzian derivatives and the boundary-strip norms
//!
//! ```text
//! β(t) = sup_{0 < Re z ≤ t} (2 Re z) |Pf(z)|
//! σ(t) = sup_{0 < Re z ≤ t} (2 Re z)² |Sf(z)|
//! ```
//!
//! approximated by maxima over a [`StripGrid`].

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::maps::{eval_jet, eval_jet_at, ConformalMap, Domain, Scalar};
use crate::real::{lower, Cx, Real, C64};
use crate::report::row;

/// Derived symbols of a map at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Symbols<T: Real = f64> {
    pub value: Cx<T>,
    pub d1: Cx<T>,
    /// `Pf = f''/f'`
    pub ph: Cx<T>,
    /// `(Pf)'`
    pub dph: Cx<T>,
    /// `Sf = (Pf)' - (Pf)²/2`
    pub sh: Cx<T>,
    /// `(Sf)'`
    pub dsh: Cx<T>,
}

impl<T: Real> Symbols<T> {
    pub fn from_jet(j: &Jet<T>) -> Result<Self> {
        if j.order() < 4 {
            return Err(Error::OrderExhausted);
        }
        let [c0, c1, c2, c3, c4] = j.derivatives();
        if c1.norm_sqr() == T::zero() {
            return Err(Error::VanishingDerivative(lower(j.center())));
        }
        let r = |x: f64| T::from_f64(x);
        let q2 = c2 / c1;
        let q3 = c3 / c1;
        let q4 = c4 / c1;
        Ok(Self {
            value: c0,
            d1: c1,
            ph: q2,
            dph: q3 - q2 * q2,
            sh: q3 - q2 * q2 * r(1.5),
            dsh: q4 - q2 * q3 * r(4.0) + q2 * q2 * q2 * r(3.0),
        })
    }

    pub fn to_f64(&self) -> Symbols<f64> {
        Symbols {
            value: lower(self.value),
            d1: lower(self.d1),
            ph: lower(self.ph),
            dph: lower(self.dph),
            sh: lower(self.sh),
            dsh: lower(self.dsh),
        }
    }
}

pub fn symbols(m: &dyn ConformalMap, z: C64) -> Result<Symbols> {
    Symbols::from_jet(&eval_jet(m, z)?).map_err(|e| e.at(z))
}

pub fn symbols_in<T: Scalar>(m: &dyn ConformalMap, z: C64) -> Result<Symbols<T>> {
    Symbols::from_jet(&eval_jet_at::<T>(m, z)?).map_err(|e| e.at(z))
}

pub fn pre_schwarzian(m: &dyn ConformalMap, z: C64) -> Result<C64> {
    Ok(symbols(m, z)?.ph)
}

pub fn schwarzian(m: &dyn ConformalMap, z: C64) -> Result<C64> {
    Ok(symbols(m, z)?.sh)
}

pub fn schwarzian_deriv(m: &dyn ConformalMap, z: C64) -> Result<C64> {
    Ok(symbols(m, z)?.dsh)
}

/// Hyperbolic density of H, `1/(2 Re z)`.
pub fn rho_half_plane(z: C64) -> f64 {
    1.0 / (2.0 * z.re)
}

/// Hyperbolic density of D(1,1), `1/(1 - |z - 1|²)`.
pub fn rho_disk11(z: C64) -> f64 {
    1.0 / (1.0 - (z - 1.0).norm_sqr())
}

/// The bound `64λ + λ²/2` on the weighted Schwarzian norm implied by a
/// pre-Schwarzian norm `λ`.
pub fn implied_sigma_bound(lambda: f64) -> f64 {
    64.0 * lambda + lambda * lambda / 2.0
}

/// Sampling grid for the boundary strip `0 < Re z ≤ t, |Im z| ≤ y_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripGrid {
    pub x_min: f64,
    pub per_decade: usize,
    pub y_max: f64,
    pub ny: usize,
}

pub const DEFAULT_X_MIN: f64 = 1e-4;
pub const DEFAULT_PER_DECADE: usize = 64;
pub const DEFAULT_Y_MAX: f64 = 20.0;
pub const DEFAULT_NY: usize = 257;

impl Default for StripGrid {
    fn default() -> Self {
        Self {
            x_min: DEFAULT_X_MIN,
            per_decade: DEFAULT_PER_DECADE,
            y_max: DEFAULT_Y_MAX,
            ny: DEFAULT_NY,
        }
    }
}

impl StripGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = self.x_min > 0.0
            && self.x_min.is_finite()
            && self.per_decade > 0
            && self.y_max >= 0.0
            && self.y_max.is_finite()
            && self.ny > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad strip grid {self:?}")))
        }
    }

    /// Log-spaced abscissae `x_min·10^(j/per_decade) ≤ t`.
    pub fn x_values(&self, t: f64) -> Vec<f64> {
        let mut xs = Vec::new();
        let mut j = 0;
        loop {
            let x = self.x_min * 10f64.powf(j as f64 / self.per_decade as f64);
            if x > t * (1.0 + 1e-12) {
                break;
            }
            xs.push(x);
            j += 1;
        }
        xs
    }

    pub fn y_values(&self) -> Vec<f64> {
        if self.ny == 1 {
            return vec![0.0];
        }
        let h = 2.0 * self.y_max / (self.ny - 1) as f64;
        (0..self.ny).map(|i| -self.y_max + h * i as f64).collect()
    }

    /// Grid abscissae for a set of strip widths: the log grid up to the
    /// widest strip plus every width itself, ascending and deduplicated.
    pub fn columns_for(&self, t_values: &[f64]) -> Vec<f64> {
        let t_max = t_values.iter().cloned().fold(0.0, f64::max);
        let mut xs = self.x_values(t_max);
        xs.extend_from_slice(t_values);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        xs
    }
}

/// Maximum of a weighted quantity over one grid column with its location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ColumnSup {
    pub x: f64,
    pub beta: f64,
    pub argmax_beta: (f64, f64),
    pub sigma: f64,
    pub argmax_sigma: (f64, f64),
}

fn column_sup(m: &dyn ConformalMap, x: f64, ys: &[f64]) -> Result<ColumnSup> {
    let mut best = ColumnSup {
        x,
        beta: 0.0,
        argmax_beta: (x, ys[0]),
        sigma: 0.0,
        argmax_sigma: (x, ys[0]),
    };
    for &y in ys {
        let z = Complex::new(x, y);
        let s = symbols(m, z)?;
        let b = 2.0 * x * s.ph.norm();
        let g = 4.0 * x * x * s.sh.norm();
        if !b.is_finite() || !g.is_finite() {
            return Err(Error::NonFinite("strip weight").at(z));
        }
        if b > best.beta {
            best.beta = b;
            best.argmax_beta = (x, y);
        }
        if g > best.sigma {
            best.sigma = g;
            best.argmax_sigma = (x, y);
        }
    }
    Ok(best)
}

/// Per-column maxima over the given abscissae, in order. Columns are
/// evaluated in parallel; the result does not depend on the partition.
pub fn column_sups(m: &dyn ConformalMap, xs: &[f64], grid: &StripGrid) -> Result<Vec<ColumnSup>> {
    grid.validate()?;
    let ys = grid.y_values();
    xs.par_iter().map(|&x| column_sup(m, x, &ys)).collect()
}

/// Running maxima over columns sorted by `x` ascending.
pub fn prefix_max(cols: &[ColumnSup]) -> Vec<ColumnSup> {
    let mut out = Vec::with_capacity(cols.len());
    let mut acc: Option<ColumnSup> = None;
    for c in cols {
        let mut next = *c;
        if let Some(a) = acc {
            if a.beta >= next.beta {
                next.beta = a.beta;
                next.argmax_beta = a.argmax_beta;
            }
            if a.sigma >= next.sigma {
                next.sigma = a.sigma;
                next.argmax_sigma = a.argmax_sigma;
            }
        }
        out.push(next);
        acc = Some(next);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormProfile {
    /// Decreasing.
    pub t_values: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub argmax_beta: Vec<(f64, f64)>,
    pub argmax_sigma: Vec<(f64, f64)>,
    pub grid: StripGrid,
}

impl NormProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,beta,sigma,argmax_beta_re,argmax_beta_im,argmax_sigma_re,argmax_sigma_im\n");
        for i in 0..self.t_values.len() {
            s.push_str(&row(&[
                self.t_values[i],
                self.beta[i],
                self.sigma[i],
                self.argmax_beta[i].0,
                self.argmax_beta[i].1,
                self.argmax_sigma[i].0,
                self.argmax_sigma[i].1,
            ]));
        }
        s
    }
}

pub fn norm_profile(m: &dyn ConformalMap, t_values: &[f64], grid: &StripGrid) -> Result<NormProfile> {
    if t_values.is_empty() || t_values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("t values must be positive and finite".into()));
    }
    if m.domain() != Domain::RightHalfPlane {
        return Err(Error::InvalidParameter(format!(
            "strip norms need a map on H, `{}` lives on {}",
            m.name(),
            m.domain().label()
        )));
    }
    let mut ts = t_values.to_vec();
    ts.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ts.dedup();
    let xs = grid.columns_for(&ts);
    let running = prefix_max(&column_sups(m, &xs, grid)?);
    let at = |t: f64| {
        let i = xs.iter().position(|&x| x == t).expect("t is a column");
        running[i]
    };
    let picked: Vec<ColumnSup> = ts.iter().map(|&t| at(t)).collect();
    Ok(NormProfile {
        beta: picked.iter().map(|c| c.beta).collect(),
        sigma: picked.iter().map(|c| c.sigma).collect(),
        argmax_beta: picked.iter().map(|c| c.argmax_beta).collect(),
        argmax_sigma: picked.iter().map(|c| c.argmax_sigma).collect(),
        t_values: ts,
        grid: grid.clone(),
    })
}

/// `d(z, ∂D)/Re z` for `D = D(1,1)` and whether `z` lies in the horodisk
/// `D_a = {|z - a/(a+1)| < a/(a+1)}`.
pub fn horodisk_ratio(z: C64, a: f64) -> Result<(f64, bool)> {
    if !(a > 1.0) {
        return Err(Error::InvalidParameter(format!("horodisk parameter a = {a} must exceed 1")));
    }
    if !Domain::Disk11.contains(z) {
        return Err(Error::Domain {
            map: "horodisk".into(),
            point: z,
            domain: Domain::Disk11.label(),
        });
    }
    let d = 1.0 - (z - 1.0).norm();
    let r = a / (a + 1.0);
    Ok((d / z.re, (z - r).norm() < r))
}
