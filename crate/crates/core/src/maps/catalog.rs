use std::sync::Arc;

use super::registry::format_complex;
use super::{Domain, JetKernel, MapRef, Scalar};
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::real::{cln, csqrt, lift, lower, on_branch_cut, C64};

#[derive(Clone, Debug, Default)]
pub struct Identity;

impl JetKernel for Identity {
    fn name(&self) -> String {
        "identity".into()
    }
    fn domain(&self) -> Domain {
        Domain::RightHalfPlane
    }
    fn description(&self) -> String {
        "z".into()
    }
    fn kernel<T: Scalar>(&self, z: &Jet<T>) -> Result<Jet<T>> {
        Ok(*z)
    }
}

/// `z ↦ z²`, univalent on H.
#[derive(Clone, Debug, Default)]
pub struct Square;

impl JetKernel for Square {
    fn name(&self) -> String {
        "square".into()
    }
    fn domain(&self) -> Domain {
        Domain::RightHalfPlane
    }
    fn description(&self) -> String {
        "z^2".into()
    }
    fn kernel<T: Scalar>(&self, z: &Jet<T>) -> Result<Jet<T>> {
        z.mul(z)
    }
}

/// `z ↦ (az + b)/(cz + d)`.
#[derive(Clone, Debug)]
pub struct Moebius {
    coeffs: [C64; 4],
    label: Option<&'static str>,
    domain: Domain,
}

impl Moebius {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        if [a, b, c, d].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("moebius coefficients must be finite".into()));
        }
        if a * d - b * c == C64::new(0.0, 0.0) {
            return Err(Error::InvalidParameter(format!(
                "moebius: ad - bc = 0 for ({a}, {b}, {c}, {d})"
            )));
        }
        Ok(Self {
            coeffs: [a, b, c, d],
            label: None,
            domain: Domain::RightHalfPlane,
        })
    }

    fn named(mut self, label: &'static str, domain: Domain) -> Self {
        self.label = Some(label);
        self.domain = domain;
        self
    }

    pub fn coefficients(&self) -> [C64; 4] {
        self.coeffs
    }
}

impl JetKernel for Moebius {
    fn name(&self) -> String {
        match self.label {
            Some(l) => l.into(),
            None => {
                let p: Vec<String> = self.coeffs.iter().map(|c| format_complex(*c)).collect();
                format!("moebius:{}", p.join(","))
            }
        }
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn description(&self) -> String {
        let [a, b, c, d] = self.coeffs.map(format_complex);
        format!("({a}z + {b})/({c}z + {d})")
    }
    fn kernel<T: Scalar>(&self, z: &Jet<T>) -> Result<Jet<T>> {
        let [a, b, c, d] = self.coeffs.map(lift::<T>);
        let num = z.scale(a)?.offset(b)?;
        let den = z.scale(c)?.offset(d)?;
        if den.value().norm_sqr() == T::zero() {
            return Err(Error::Pole {
                map: JetKernel::name(self),
                point: lower(z.value()),
            });
        }
        num.div(&den)
    }
}

/// The half-plane to half-strip map `g(ζ) = −log(−1/ζ + √(1 + 1/ζ²))`.
#[derive(Clone, Debug, Default)]
pub struct HalfStripG;

impl JetKernel for HalfStripG {
    fn name(&self) -> String {
        "half-strip-g".into()
    }
    fn domain(&self) -> Domain {
        Domain::RightHalfPlane
    }
    fn description(&self) -> String {
        "-log(-1/z + sqrt(1 + 1/z^2))".into()
    }
    fn kernel<T: Scalar>(&self, z: &Jet<T>) -> Result<Jet<T>> {
        let w = z.recip()?;
        let s = w.mul(&w)?.offset(lift(C64::new(1.0, 0.0)))?.sqrt()?;
        Ok(s.sub(&w)?.ln()?.neg())
    }

    fn boundary_value(&self, z: C64) -> Option<Result<C64>> {
        if z.re > 0.0 {
            return None;
        }
        if z == C64::new(0.0, 0.0) {
            return Some(Err(Error::Pole {
                map: "half-strip-g".into(),
                point: z,
            }));
        }
        // On iR the square root argument 1 - 1/y² can be a nonpositive real;
        // take the limit from H, where its imaginary part has sign -sign(y).
        let w = C64::new(1.0, 0.0) / z;
        let arg = C64::new(1.0, 0.0) + w * w;
        let s = if arg.re <= 0.0 {
            C64::new(0.0, -z.im.signum() * (-arg.re).sqrt())
        } else {
            csqrt(arg)
        };
        let u = s - w;
        if on_branch_cut(u) {
            return Some(Err(Error::BranchCut {
                function: "log",
                value: u,
            }));
        }
        Some(Ok(-cln(u)))
    }
}

/// `z ↦ z + c·e^{−z}`, `|c| < 1`.
#[derive(Clone, Debug)]
pub struct PerturbedIdentity {
    c: C64,
}

impl PerturbedIdentity {
    pub fn new(c: C64) -> Result<Self> {
        if !c.is_finite() || c.norm() >= 1.0 {
            return Err(Error::InvalidParameter(format!("perturbed-identity needs |c| < 1, got {c}")));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> C64 {
        self.c
    }
}

impl JetKernel for PerturbedIdentity {
    fn name(&self) -> String {
        format!("perturbed-identity:{}", format_complex(self.c))
    }
    fn domain(&self) -> Domain {
        Domain::RightHalfPlane
    }
    fn description(&self) -> String {
        format!("z + {}·exp(-z)", format_complex(self.c))
    }
    fn kernel<T: Scalar>(&self, z: &Jet<T>) -> Result<Jet<T>> {
        let e = z.neg().exp()?.scale(lift(self.c))?;
        z.add(&e)
    }
}

/// `outer ∘ inner`; the domain is the inner map's.
#[derive(Clone, Debug)]
pub struct Composite {
    outer: MapRef,
    inner: MapRef,
    label: Option<&'static str>,
}

impl Composite {
    pub fn new(outer: MapRef, inner: MapRef) -> Self {
        Self {
            outer,
            inner,
            label: None,
        }
    }

    pub fn outer(&self) -> &MapRef {
        &self.outer
    }

    pub fn inner(&self) -> &MapRef {
        &self.inner
    }
}

impl JetKernel for Composite {
    fn name(&self) -> String {
        match self.label {
            Some(l) => l.into(),
            None => format!("compose:{},{}", self.outer.name(), self.inner.name()),
        }
    }
    fn domain(&self) -> Domain {
        self.inner.domain()
    }
    fn description(&self) -> String {
        format!("({}) ∘ ({})", self.outer.description(), self.inner.description())
    }
    fn kernel<T: Scalar>(&self, z: &Jet<T>) -> Result<Jet<T>> {
        let w = T::apply(&*self.inner, z)?;
        T::apply(&*self.outer, &w)
    }

    fn boundary_value(&self, z: C64) -> Option<Result<C64>> {
        Some(self.inner.value(z).and_then(|w| self.outer.value(w)))
    }
}

pub fn identity() -> MapRef {
    Arc::new(Identity)
}

pub fn square() -> MapRef {
    Arc::new(Square)
}

pub fn moebius(a: C64, b: C64, c: C64, d: C64) -> Result<MapRef> {
    Ok(Arc::new(Moebius::new(a, b, c, d)?))
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `H(z) = (1 + z)/(1 − z)`, unit disk onto H.
pub fn cayley() -> MapRef {
    let m = Moebius::new(re(1.0), re(1.0), re(-1.0), re(1.0)).expect("nondegenerate");
    Arc::new(m.named("cayley", Domain::UnitDisk))
}

/// `φ(z) = 2/(z + 1)`, H onto D(1,1).
pub fn phi() -> MapRef {
    let m = Moebius::new(re(0.0), re(2.0), re(1.0), re(1.0)).expect("nondegenerate");
    Arc::new(m.named("phi", Domain::RightHalfPlane))
}

pub fn half_strip_g() -> MapRef {
    Arc::new(HalfStripG)
}

/// `g ∘ φ`.
pub fn counterexample_f() -> MapRef {
    Arc::new(Composite {
        outer: half_strip_g(),
        inner: phi(),
        label: Some("counterexample-f"),
    })
}

pub fn perturbed_identity(c: C64) -> Result<MapRef> {
    Ok(Arc::new(PerturbedIdentity::new(c)?))
}

pub fn compose(outer: MapRef, inner: MapRef) -> MapRef {
    Arc::new(Composite::new(outer, inner))
}
