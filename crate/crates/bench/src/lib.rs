//! Fixed equations shared by the benchmarks.

use persol::{CoeffFn, Equation, Harmonic};

/// Quartic with a dominant linear term and a periodic forcing.
pub fn forced_quartic(omega: f64) -> Equation {
    let p0 = CoeffFn::new(vec![0.2], vec![Harmonic::new(1, 0.1, -0.05)], omega).expect("valid coefficient");
    Equation::new(
        4,
        omega,
        vec![p0, CoeffFn::constant(-4.0, omega), CoeffFn::constant(0.05, omega), CoeffFn::constant(0.02, omega)],
        None,
    )
    .expect("valid equation")
}

/// `z' = z^n`.
pub fn monomial(n: usize, omega: f64) -> Equation {
    Equation::monomial(n, omega).expect("valid equation")
}
