//! Finite-difference oracles shared by unit tests.

use crate::real::{lift, lower, Cx, Dd, C64};

const N: usize = crate::jets::ORDER + 1;

// Richardson-extrapolated central differences of a scalar function,
// evaluated in double-double so that the fourth difference at h = 1e-3
// is not swamped by rounding. Independent of the jet machinery.
pub fn fd_derivatives(f: &dyn Fn(Cx<Dd>) -> Cx<Dd>, z0: C64, h: f64) -> [C64; N] {
    fn stencil(f: &dyn Fn(Cx<Dd>) -> Cx<Dd>, z0: C64, h: f64) -> [Cx<Dd>; N] {
        let hd = Dd::from(h);
        let v = |k: f64| f(lift::<Dd>(z0) + Cx::new(hd * Dd::from(k), Dd::from(0.0)));
        let (m2, m1, p0, p1, p2) = (v(-2.0), v(-1.0), v(0.0), v(1.0), v(2.0));
        let two = Dd::from(2.0);
        [
            p0,
            (p1 - m1) / (hd * two),
            (p1 - p0 * two + m1) / (hd * hd),
            (p2 - p1 * two + m1 * two - m2) / (hd * hd * hd * two),
            (p2 - p1 * Dd::from(4.0) + p0 * Dd::from(6.0) - m1 * Dd::from(4.0) + m2) / (hd * hd * hd * hd),
        ]
    }
    let coarse = stencil(f, z0, h);
    let fine = stencil(f, z0, h / 2.0);
    std::array::from_fn(|k| lower((fine[k] * Dd::from(4.0) - coarse[k]) / Dd::from(3.0)))
}
