use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::Equation;
use crate::error::{Error, Result};

/// Phase-portrait constants: arm width parameter `a = max{6, 6‖P‖}` and the
/// radius `ρ` of the disk outside of which the portrait splits into arms
/// `G_k` and sectors `H_k`, `k = 0, ..., 2n-3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub a: f64,
    pub rho: f64,
    pub n: usize,
}

/// Relative margin by which `ρ` exceeds `a(n-1)(n-2)/π`.
const RHO_MARGIN: f64 = 1e-6;

pub fn geometry(eq: &Equation) -> Result<Geometry> {
    Geometry::from_norm(eq.n(), eq.norm())
}

fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

impl Geometry {
    pub fn from_norm(n: usize, norm: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::UnsupportedDegree { what: "phase-portrait geometry".into(), n });
        }
        let a = (6.0 * norm).max(6.0);
        let rho = (1.0 + RHO_MARGIN) * a * ((n - 1) * (n - 2)) as f64 / PI;
        Ok(Self { a, rho, n })
    }

    pub fn arm_count(&self) -> usize {
        2 * self.n - 2
    }

    /// Angle of the axis of `G_k`.
    pub fn axis(&self, k: usize) -> f64 {
        k as f64 * PI / (self.n - 1) as f64
    }

    pub fn in_g(&self, z: Complex64, k: usize) -> bool {
        let r = z.norm();
        r > self.rho && wrap_pi(z.arg() - self.axis(k)).abs() < self.a / r
    }

    pub fn in_h(&self, z: Complex64, k: usize) -> bool {
        let r = z.norm();
        if r <= self.rho {
            return false;
        }
        let phi = (z.arg() - self.axis(k)).rem_euclid(TAU);
        let width = PI / (self.n - 1) as f64;
        phi >= self.a / r && phi <= width - self.a / r
    }

    pub fn arm_containing(&self, z: Complex64) -> Option<usize> {
        (0..self.arm_count()).find(|&k| self.in_g(z, k))
    }

    /// Radius beyond which arms are pairwise disjoint and separated by sectors.
    pub fn separation_radius(&self) -> f64 {
        self.rho.max(2.0 * self.a * (self.n - 1) as f64 / PI)
    }
}
