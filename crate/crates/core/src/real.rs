//! Real scalar abstraction shared by every numeric routine in the crate.
//!
//! Everything is generic over [`Real`] so that the same code runs in `f64`
//! for production use and in double-double ([`Dd`]) when a convergence-order
//! check needs the discretisation error to sit far above rounding noise.

use std::cell::RefCell;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex;
use num_traits::{Num, One, Zero};
use twofloat::TwoFloat;

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;
/// The everyday complex type.
pub type C64 = Complex<f64>;

pub trait Real:
    Num + Copy + PartialOrd + Neg<Output = Self> + Debug + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn is_finite(self) -> bool;
    /// Unit roundoff of the representation.
    fn epsilon() -> f64;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn epsilon() -> f64 {
        f64::EPSILON
    }
}

/// Double-double real (about 106 significant bits).
///
/// Thin wrapper over `TwoFloat`: its addition and multiplication are used
/// as is, division is redone by long division because the upstream one is
/// only accurate to about 1e-17.
#[derive(Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct Dd(TwoFloat);

impl Dd {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }
    pub fn lo(self) -> f64 {
        self.0.lo()
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd(TwoFloat::from(x))
    }
}

impl Debug for Dd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi(), self.lo())
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        Dd(self.0 + rhs.0)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        Dd(self.0 - rhs.0)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        Dd(self.0 * rhs.0)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let b = rhs.hi();
        let q1 = self.hi() / b;
        if !q1.is_finite() || q1 == 0.0 {
            return Dd::from(q1);
        }
        let r = self - rhs * Dd::from(q1);
        let q2 = r.hi() / b;
        let r = r - rhs * Dd::from(q2);
        let q3 = r.hi() / b;
        Dd(TwoFloat::from(q1) + TwoFloat::from(q2) + TwoFloat::from(q3))
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        let q = (self / rhs).hi().trunc();
        self - rhs * Dd::from(q)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd(-self.0)
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::from(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi() == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::from(1.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Dd::from)
    }
}

// twofloat's own transcendental functions are only good to ~1e-17, which
// defeats the purpose; route them through a 128-bit software float instead.
const BIG_PREC: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn dd_to_big(x: Dd) -> BigFloat {
    let hi = BigFloat::from_f64(x.hi(), BIG_PREC);
    let lo = BigFloat::from_f64(x.lo(), BIG_PREC);
    hi.add(&lo, BIG_PREC, RM)
}

fn big_to_dd(x: &BigFloat) -> Dd {
    if x.is_nan() {
        return Dd::from(f64::NAN);
    }
    if x.is_inf_pos() {
        return Dd::from(f64::INFINITY);
    }
    if x.is_inf_neg() {
        return Dd::from(f64::NEG_INFINITY);
    }
    let Some((words, _, sign, exponent, _)) = x.as_raw_parts() else {
        return Dd::from(f64::NAN);
    };
    if words.is_empty() {
        return Dd::from(0.0);
    }
    // value = 0.m * 2^e, words little-endian; split each word into two
    // exactly representable 32-bit halves and accumulate in double-double.
    let n = words.len() as i32;
    let mut acc = Dd::from(0.0);
    for (i, &w) in words.iter().enumerate().rev() {
        let base = exponent - 64 * (n - i as i32);
        let hi32 = (w >> 32) as f64 * 2f64.powi(base + 32);
        let lo32 = (w & 0xffff_ffff) as f64 * 2f64.powi(base);
        acc = acc + Dd::from(hi32) + Dd::from(lo32);
    }
    if sign == Sign::Neg {
        -acc
    } else {
        acc
    }
}

fn with_big(x: Dd, f: impl FnOnce(&BigFloat, &mut Consts) -> BigFloat) -> Dd {
    CONSTS.with(|cc| {
        let mut cc = cc.borrow_mut();
        big_to_dd(&f(&dd_to_big(x), &mut cc))
    })
}

fn dd_pi() -> Dd {
    CONSTS.with(|cc| big_to_dd(&cc.borrow_mut().pi(BIG_PREC, RM)))
}

impl Real for Dd {
    fn from_f64(x: f64) -> Self {
        Dd::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn exp(self) -> Self {
        with_big(self, |b, cc| b.exp(BIG_PREC, RM, cc))
    }
    fn ln(self) -> Self {
        with_big(self, |b, cc| b.ln(BIG_PREC, RM, cc))
    }
    fn sqrt(self) -> Self {
        if self.hi() <= 0.0 {
            return if self.hi() == 0.0 {
                Dd::from(0.0)
            } else {
                Dd::from(f64::NAN)
            };
        }
        // one Newton step from the f64 root doubles the correct bits
        let s = Dd::from(self.hi().sqrt());
        s + (self - s * s) / (s * Dd::from(2.0))
    }
    fn sin_cos(self) -> (Self, Self) {
        (
            with_big(self, |b, cc| b.sin(BIG_PREC, RM, cc)),
            with_big(self, |b, cc| b.cos(BIG_PREC, RM, cc)),
        )
    }
    fn atan2(self, x: Self) -> Self {
        let y = self;
        let zero = Dd::from(0.0);
        if x == zero && y == zero {
            return zero;
        }
        let pi = dd_pi();
        if Real::abs(x) >= Real::abs(y) {
            let a = with_big(y / x, |b, cc| b.atan(BIG_PREC, RM, cc));
            if x > zero {
                a
            } else if y >= zero {
                a + pi
            } else {
                a - pi
            }
        } else {
            let a = with_big(x / y, |b, cc| b.atan(BIG_PREC, RM, cc));
            let half_pi = pi / Dd::from(2.0);
            if y > zero {
                half_pi - a
            } else {
                -half_pi - a
            }
        }
    }
    fn is_finite(self) -> bool {
        self.hi().is_finite() && self.lo().is_finite()
    }
    fn epsilon() -> f64 {
        // 2^-104
        4.930380657631324e-32
    }
}

pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::from_f64(re), T::from_f64(im))
}

pub fn lift<T: Real>(z: C64) -> Cx<T> {
    cx(z.re, z.im)
}

pub fn lower<T: Real>(z: Cx<T>) -> C64 {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x)
}

pub fn cabs<T: Real>(z: Cx<T>) -> T {
    z.norm_sqr().sqrt()
}

pub fn cfinite<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn cexp<T: Real>(z: Cx<T>) -> Cx<T> {
    let r = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(r * c, r * s)
}

/// Principal logarithm, argument in (-pi, pi].
pub fn cln<T: Real>(z: Cx<T>) -> Cx<T> {
    Complex::new(z.norm_sqr().ln() / T::from_f64(2.0), z.im.atan2(z.re))
}

/// Principal square root, `Re >= 0`, continuous from above on the negative axis.
pub fn csqrt<T: Real>(z: Cx<T>) -> Cx<T> {
    let zero = T::zero();
    let two = T::from_f64(2.0);
    if z.re == zero && z.im == zero {
        return Complex::new(zero, zero);
    }
    let r = cabs(z);
    if z.re >= zero {
        let t = ((r + z.re) / two).sqrt();
        Complex::new(t, z.im / (two * t))
    } else {
        let t = ((r - z.re) / two).sqrt();
        let im = if z.im < zero { -t } else { t };
        Complex::new(z.im.abs() / (two * t), im)
    }
}

/// True when `z` lies on the principal branch cut `(-inf, 0]`.
pub fn on_branch_cut<T: Real>(z: Cx<T>) -> bool {
    z.im == T::zero() && z.re <= T::zero()
}
