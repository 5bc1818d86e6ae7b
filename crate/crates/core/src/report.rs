//! Text formatting shared by the CSV writers.

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e15)` so tiny residuals stay readable.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Joins formatted numbers with commas.
pub fn row(values: &[f64]) -> String {
    let mut s = values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}
