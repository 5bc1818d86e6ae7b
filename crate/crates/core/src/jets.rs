//! Truncated Taylor arithmetic over complex numbers.
//!
//! A [`Jet`] carries `f(z0), f'(z0), ..., f''''(z0)` for some analytic `f`.
//! Internally the coefficients are stored normalised (`f^(k)(z0) / k!`), which
//! turns products into Cauchy convolutions and composition into a power
//! series substitution; the public accessors speak in plain derivatives.
//!
//! Each jet also tracks how many orders are still exact. Differentiating a
//! jet drops one order, and binary operations keep the smaller of the two.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::{cexp, cfinite, cln, csqrt, lower, on_branch_cut, Cx, Real, C64};

/// Highest derivative carried by a jet.
pub const ORDER: usize = 4;
const N: usize = ORDER + 1;

const FACTORIAL: [f64; N] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T: Real = f64> {
    center: Cx<T>,
    taylor: [Cx<T>; N],
    order: usize,
}

/// Elementary functions available as jet primitives (principal branches).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementary {
    Exp,
    Log,
    Sqrt,
    Recip,
    Pow(f64),
}

fn zero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

fn scalar<T: Real>(x: f64) -> Cx<T> {
    Complex::new(T::from_f64(x), T::zero())
}

impl<T: Real> Jet<T> {
    fn build(center: Cx<T>, taylor: [Cx<T>; N], order: usize) -> Result<Self> {
        if !cfinite(center) {
            return Err(Error::NonFinite("jet center"));
        }
        if taylor[..=order].iter().any(|c| !cfinite(*c)) {
            return Err(Error::NonFinite("jet coefficients"));
        }
        Ok(Self {
            center,
            taylor,
            order,
        })
    }

    /// The identity map's jet at `z0`: `(z0, 1, 0, 0, 0)`.
    pub fn variable(z0: Cx<T>) -> Result<Self> {
        let mut t = [zero(); N];
        t[0] = z0;
        t[1] = scalar(1.0);
        Self::build(z0, t, ORDER)
    }

    pub fn constant(z0: Cx<T>, value: Cx<T>) -> Result<Self> {
        let mut t = [zero(); N];
        t[0] = value;
        Self::build(z0, t, ORDER)
    }

    /// Builds a jet from plain derivatives `f(z0), f'(z0), ..., f''''(z0)`.
    pub fn from_derivatives(center: Cx<T>, derivatives: [Cx<T>; N]) -> Result<Self> {
        let mut t = [zero(); N];
        for (k, d) in derivatives.iter().enumerate() {
            t[k] = *d / T::from_f64(FACTORIAL[k]);
        }
        Self::build(center, t, ORDER)
    }

    pub fn center(&self) -> Cx<T> {
        self.center
    }

    pub fn value(&self) -> Cx<T> {
        self.taylor[0]
    }

    /// Number of exact derivative orders carried.
    pub fn order(&self) -> usize {
        self.order
    }

    /// The `k`-th derivative at the center; zero beyond the exact order.
    pub fn derivative(&self, k: usize) -> Cx<T> {
        if k > self.order {
            return zero();
        }
        self.taylor[k] * T::from_f64(FACTORIAL[k])
    }

    pub fn derivatives(&self) -> [Cx<T>; N] {
        std::array::from_fn(|k| self.derivative(k))
    }

    pub fn taylor(&self, k: usize) -> Cx<T> {
        self.taylor[k]
    }

    fn same_center(&self, other: &Self) -> Result<()> {
        if self.center != other.center {
            return Err(Error::CenterMismatch {
                left: lower(self.center),
                right: lower(other.center),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_center(other)?;
        let order = self.order.min(other.order);
        let t = std::array::from_fn(|k| self.taylor[k] + other.taylor[k]);
        Self::build(self.center, t, order)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_center(other)?;
        let order = self.order.min(other.order);
        let t = std::array::from_fn(|k| self.taylor[k] - other.taylor[k]);
        Self::build(self.center, t, order)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_center(other)?;
        let order = self.order.min(other.order);
        let mut t = [zero(); N];
        for k in 0..=order {
            for i in 0..=k {
                t[k] = t[k] + self.taylor[i] * other.taylor[k - i];
            }
        }
        Self::build(self.center, t, order)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.same_center(other)?;
        let b0 = other.taylor[0];
        if b0.norm_sqr() == T::zero() {
            return Err(Error::ZeroDivisor);
        }
        let order = self.order.min(other.order);
        let mut q = [zero(); N];
        for k in 0..=order {
            let mut acc = self.taylor[k];
            for i in 1..=k {
                acc = acc - other.taylor[i] * q[k - i];
            }
            q[k] = acc / b0;
        }
        Self::build(self.center, q, order)
    }

    pub fn scale(&self, c: Cx<T>) -> Result<Self> {
        let t = self.taylor.map(|a| a * c);
        Self::build(self.center, t, self.order)
    }

    pub fn offset(&self, c: Cx<T>) -> Result<Self> {
        let mut t = self.taylor;
        t[0] = t[0] + c;
        Self::build(self.center, t, self.order)
    }

    pub fn neg(&self) -> Self {
        Self {
            center: self.center,
            taylor: self.taylor.map(|a| -a),
            order: self.order,
        }
    }

    /// Jet of `f'` from the jet of `f`; one order is lost.
    pub fn differentiate(&self) -> Result<Self> {
        if self.order == 0 {
            return Err(Error::OrderExhausted);
        }
        let mut t = [zero(); N];
        for k in 0..self.order {
            t[k] = self.taylor[k + 1] * T::from_f64((k + 1) as f64);
        }
        Self::build(self.center, t, self.order - 1)
    }

    /// Substitutes `self - self.value()` into the power series with normalised
    /// coefficients `outer` (expanded about `self.value()`).
    fn substitute(&self, outer: &[Cx<T>; N], outer_order: usize) -> Result<Self> {
        let order = self.order.min(outer_order);
        let mut d = self.taylor;
        d[0] = zero();
        let mut power = [zero(); N];
        power[0] = scalar(1.0);
        let mut out = [zero(); N];
        for b in outer.iter().take(order + 1) {
            for k in 0..=order {
                out[k] = out[k] + *b * power[k];
            }
            let mut next = [zero(); N];
            for k in 0..=order {
                for i in 0..=k {
                    next[k] = next[k] + power[i] * d[k - i];
                }
            }
            power = next;
        }
        Self::build(self.center, out, order)
    }

    pub fn exp(&self) -> Result<Self> {
        let e = cexp(self.value());
        let b = std::array::from_fn(|k| e / T::from_f64(FACTORIAL[k]));
        self.substitute(&b, ORDER)
    }

    pub fn ln(&self) -> Result<Self> {
        let w = self.value();
        if on_branch_cut(w) {
            return Err(Error::BranchCut {
                function: "log",
                value: lower(w),
            });
        }
        let inv = scalar::<T>(1.0) / w;
        let mut b = [zero(); N];
        b[0] = cln(w);
        let mut p = inv;
        for (k, bk) in b.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *bk = p * T::from_f64(sign / k as f64);
            p = p * inv;
        }
        self.substitute(&b, ORDER)
    }

    /// Principal `w^alpha` for real `alpha`; integer powers skip the branch check.
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        let w = self.value();
        let integral = alpha.fract() == 0.0;
        if !integral && on_branch_cut(w) {
            return Err(Error::BranchCut {
                function: "pow",
                value: lower(w),
            });
        }
        if w.norm_sqr() == T::zero() {
            return Err(Error::ZeroDivisor);
        }
        let base = if alpha == 0.5 {
            csqrt(w)
        } else if integral {
            let mut acc = scalar::<T>(1.0);
            let m = alpha.abs() as u32;
            for _ in 0..m {
                acc = acc * w;
            }
            if alpha < 0.0 {
                scalar::<T>(1.0) / acc
            } else {
                acc
            }
        } else {
            cexp(cln(w) * T::from_f64(alpha))
        };
        let inv = scalar::<T>(1.0) / w;
        let mut b = [zero(); N];
        let mut binom = 1.0;
        let mut p = scalar::<T>(1.0);
        for (k, bk) in b.iter_mut().enumerate() {
            *bk = base * p * T::from_f64(binom);
            binom *= (alpha - k as f64) / (k + 1) as f64;
            p = p * inv;
        }
        self.substitute(&b, ORDER)
    }

    pub fn sqrt(&self) -> Result<Self> {
        let w = self.value();
        if on_branch_cut(w) {
            return Err(Error::BranchCut {
                function: "sqrt",
                value: lower(w),
            });
        }
        self.powf(0.5)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.value().norm_sqr() == T::zero() {
            return Err(Error::ZeroDivisor);
        }
        self.powf(-1.0)
    }

    pub fn elementary(&self, f: Elementary) -> Result<Self> {
        match f {
            Elementary::Exp => self.exp(),
            Elementary::Log => self.ln(),
            Elementary::Sqrt => self.sqrt(),
            Elementary::Recip => self.recip(),
            Elementary::Pow(a) => self.powf(a),
        }
    }

    /// Faa di Bruno: given the jet of `outer` at `inner.value()` and the jet of
    /// `inner` at `z0`, returns the jet of `outer ∘ inner` at `z0`.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if outer.center != inner.value() {
            return Err(Error::CenterMismatch {
                left: lower(outer.center),
                right: lower(inner.value()),
            });
        }
        inner.substitute(&outer.taylor, outer.order)
    }

    pub fn to_f64(&self) -> Jet<f64> {
        Jet {
            center: lower(self.center),
            taylor: self.taylor.map(lower),
            order: self.order,
        }
    }
}

pub fn lift_variable(z0: C64) -> Result<Jet> {
    Jet::variable(z0)
}

pub fn jet_mul(a: &Jet, b: &Jet) -> Result<Jet> {
    a.mul(b)
}

pub fn jet_div(a: &Jet, b: &Jet) -> Result<Jet> {
    a.div(b)
}

pub fn jet_elementary(f: Elementary, a: &Jet) -> Result<Jet> {
    a.elementary(f)
}
