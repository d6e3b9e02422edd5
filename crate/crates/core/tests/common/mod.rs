#![allow(dead_code)]

use std::f64::consts::TAU;

use persol::bounds::check_theorem_1_1;
use persol::{CoeffFn, Equation, Harmonic};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed_0001;

fn harmonic(rng: &mut ChaCha8Rng, amp: f64) -> Harmonic {
    let k = rng.gen_range(1..=2);
    let phase: f64 = rng.gen_range(0.0..TAU);
    Harmonic::new(k, amp * phase.cos(), amp * phase.sin())
}

fn small(rng: &mut ChaCha8Rng, amp: f64, omega: f64) -> CoeffFn {
    let a = rng.gen_range(-amp..amp);
    let amp_h = rng.gen_range(0.0..amp);
    let h = harmonic(rng, amp_h);
    CoeffFn::new(vec![a], vec![h], omega).unwrap()
}

/// Monic equation of degree `n` satisfying the first counting theorem with
/// `K = 1`: small `P_0` and middle terms, and a sign-definite `P_1` well above
/// its threshold.
pub fn theorem_1_1_instance(rng: &mut ChaCha8Rng, n: usize) -> Equation {
    loop {
        let omega = rng.gen_range(0.1..0.3);
        let mut coeffs = vec![small(rng, 0.2, omega)];
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let p1 = CoeffFn::new(vec![sign * rng.gen_range(2.5..4.0)], vec![harmonic(rng, 0.2)], omega).unwrap();
        coeffs.push(p1);
        for _ in 2..n {
            coeffs.push(small(rng, 0.05, omega));
        }
        let eq = Equation::new(n, omega, coeffs, None).unwrap();
        if check_theorem_1_1(&eq, 1.0).is_ok_and(|r| r.verdict) {
            return eq;
        }
    }
}

pub fn cubic_with_three_equilibria() -> Equation {
    Equation::constant(3, 0.05, &[0.0, -4.0, 0.0]).unwrap()
}

pub fn cubic_with_complex_pair() -> Equation {
    Equation::constant(3, 0.05, &[1.0, 1.0, 0.0]).unwrap()
}

/// Fixed equations shared by the robustness and symmetry checks, with the
/// square half-width used to count in (`None` for the default region).
pub fn corpus(rng: &mut ChaCha8Rng) -> Vec<(String, Equation, Option<f64>)> {
    let mut out = Vec::new();
    for n in 3..=6 {
        out.push((format!("z^{n}"), Equation::monomial(n, 1.0).unwrap(), Some(0.5)));
    }
    out.push(("z^3 - 4z".into(), cubic_with_three_equilibria(), Some(3.0)));
    out.push(("z^3 + z + 1".into(), cubic_with_complex_pair(), Some(1.5)));
    for j in 0..4 {
        let n = 4 + j % 2;
        let eq = theorem_1_1_instance(rng, n);
        out.push((format!("random degree {n} #{j}"), eq, None));
    }
    out
}
