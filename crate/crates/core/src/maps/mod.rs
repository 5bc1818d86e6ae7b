//! Analytic maps evaluable to order-4 jets.
//!
//! Every map is a [`ConformalMap`] trait object. Concrete maps implement the
//! scalar-generic [`JetKernel`]; a blanket impl turns each kernel into a
//! `ConformalMap` and adds the domain check at the evaluation point.
//! [`MapRegistry`] resolves textual map specs to trait objects by name.

mod catalog;
mod registry;

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::real::{lift, lower, Cx, Dd, Real, C64};

pub use catalog::{
    cayley, compose, counterexample_f, half_strip_g, identity, moebius, perturbed_identity, phi, square, Composite,
    HalfStripG, Identity, Moebius, PerturbedIdentity, Square,
};
pub use registry::{format_complex, parse_complex, MapFactory, MapRegistry};

/// Shared handle to a map.
pub type MapRef = Arc<dyn ConformalMap>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// `Re z > 0`.
    RightHalfPlane,
    /// `|z - 1| < 1`.
    Disk11,
    /// `|z| < 1`.
    UnitDisk,
}

impl Domain {
    pub fn label(self) -> &'static str {
        match self {
            Domain::RightHalfPlane => "H",
            Domain::Disk11 => "D(1,1)",
            Domain::UnitDisk => "D",
        }
    }

    pub fn contains<T: Real>(self, z: Cx<T>) -> bool {
        let one = T::one();
        match self {
            Domain::RightHalfPlane => z.re > T::zero(),
            Domain::Disk11 => (z - Cx::new(one, T::zero())).norm_sqr() < one,
            Domain::UnitDisk => z.norm_sqr() < one,
        }
    }

    /// Membership in the closure (the point at infinity excluded).
    pub fn contains_closure(self, z: C64) -> bool {
        match self {
            Domain::RightHalfPlane => z.re >= 0.0,
            Domain::Disk11 => (z - 1.0).norm_sqr() <= 1.0,
            Domain::UnitDisk => z.norm_sqr() <= 1.0,
        }
    }
}

/// Object-safe interface used by every downstream module.
pub trait ConformalMap: Debug + Send + Sync {
    /// Canonical spec string; parseable by [`MapRegistry::parse`].
    fn name(&self) -> String;
    fn domain(&self) -> Domain;
    fn description(&self) -> String;
    /// Jet of `self ∘ z` where `z` is any jet whose value lies in the domain.
    fn apply_f64(&self, z: &Jet<f64>) -> Result<Jet<f64>>;
    fn apply_dd(&self, z: &Jet<Dd>) -> Result<Jet<Dd>>;
    /// Point value on the closure of the domain.
    fn value(&self, z: C64) -> Result<C64>;
}

/// Scalar types a [`ConformalMap`] can be evaluated in.
pub trait Scalar: Real {
    fn apply(map: &dyn ConformalMap, z: &Jet<Self>) -> Result<Jet<Self>>;
}

impl Scalar for f64 {
    fn apply(map: &dyn ConformalMap, z: &Jet<f64>) -> Result<Jet<f64>> {
        map.apply_f64(z)
    }
}

impl Scalar for Dd {
    fn apply(map: &dyn ConformalMap, z: &Jet<Dd>) -> Result<Jet<Dd>> {
        map.apply_dd(z)
    }
}

/// Scalar-generic implementation of a map.
pub trait JetKernel: Debug + Send + Sync {
    fn name(&self) -> String;
    fn domain(&self) -> Domain;
    fn description(&self) -> String;
    /// Jet of the map composed with `z`; the domain check has already passed.
    fn kernel<T: Scalar>(&self, z: &Jet<T>) -> Result<Jet<T>>;

    /// Override for points where the jet path is singular but the map
    /// extends continuously.
    fn boundary_value(&self, _z: C64) -> Option<Result<C64>> {
        None
    }
}

fn checked<K: JetKernel, T: Scalar>(k: &K, z: &Jet<T>) -> Result<Jet<T>> {
    let w = z.value();
    if !k.domain().contains(w) {
        return Err(Error::Domain {
            map: k.name(),
            point: lower(w),
            domain: k.domain().label(),
        });
    }
    k.kernel(z)
}

impl<K: JetKernel> ConformalMap for K {
    fn name(&self) -> String {
        JetKernel::name(self)
    }
    fn domain(&self) -> Domain {
        JetKernel::domain(self)
    }
    fn description(&self) -> String {
        JetKernel::description(self)
    }
    fn apply_f64(&self, z: &Jet<f64>) -> Result<Jet<f64>> {
        checked(self, z)
    }
    fn apply_dd(&self, z: &Jet<Dd>) -> Result<Jet<Dd>> {
        checked(self, z)
    }
    fn value(&self, z: C64) -> Result<C64> {
        let d = JetKernel::domain(self);
        if !d.contains_closure(z) {
            return Err(Error::Domain {
                map: JetKernel::name(self),
                point: z,
                domain: d.label(),
            });
        }
        if let Some(v) = self.boundary_value(z) {
            return v;
        }
        Ok(self.kernel(&Jet::variable(z)?)?.value())
    }
}

/// Order-4 jet of `m` at `z`.
pub fn eval_jet(m: &dyn ConformalMap, z: C64) -> Result<Jet> {
    m.apply_f64(&Jet::variable(z)?).map_err(|e| e.at(z))
}

/// [`eval_jet`] in any supported scalar.
pub fn eval_jet_in<T: Scalar>(m: &dyn ConformalMap, z: Cx<T>) -> Result<Jet<T>> {
    T::apply(m, &Jet::variable(z)?).map_err(|e| e.at(lower(z)))
}

/// Lifts an `f64` point and evaluates in `T`.
pub fn eval_jet_at<T: Scalar>(m: &dyn ConformalMap, z: C64) -> Result<Jet<T>> {
    eval_jet_in(m, lift::<T>(z))
}
