//! Coefficient functions `P_i(t)` and the equation `z' = P_n z^n + ... + P_1 z + P_0`.
//!
//! A coefficient is an algebraic polynomial in `t` plus a trigonometric
//! polynomial at base frequency `2π/ω`. That class is closed under the
//! rescalings used elsewhere in the crate and admits cheap rigorous sup-norm
//! bounds. General continuous functions are not represented.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniform samples used by sampled maxima and grid checks.
pub const GRID_POINTS: usize = 4096;

/// Largest supported degree.
pub const MAX_DEGREE: usize = 64;

/// One trigonometric term `a cos(2πkt/ω) + b sin(2πkt/ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub k: u32,
    pub a: f64,
    pub b: f64,
}

impl Harmonic {
    pub fn new(k: u32, a: f64, b: f64) -> Self {
        Self { k, a, b }
    }
}

/// A real coefficient function on `[0, ω]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFn {
    poly: Vec<f64>,
    harmonics: Vec<Harmonic>,
    omega: f64,
}

/// Result of [`CoeffFn::sup_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupNorm {
    /// Rigorous upper bound from the coefficient sums.
    pub certified_upper: f64,
    /// Dense-sampling estimate of the true maximum (a lower bound).
    pub sampled_max: f64,
}

impl CoeffFn {
    pub fn new(poly: Vec<f64>, harmonics: Vec<Harmonic>, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidEquation(format!("omega must be positive and finite, got {omega}")));
        }
        if poly.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidEquation("non-finite polynomial coefficient".into()));
        }
        let mut seen = Vec::with_capacity(harmonics.len());
        for h in &harmonics {
            if h.k == 0 {
                return Err(Error::InvalidEquation("harmonic index k must be positive".into()));
            }
            if !(h.a.is_finite() && h.b.is_finite()) {
                return Err(Error::InvalidEquation(format!("non-finite amplitude for harmonic k = {}", h.k)));
            }
            if seen.contains(&h.k) {
                return Err(Error::InvalidEquation(format!("duplicate harmonic index k = {}", h.k)));
            }
            seen.push(h.k);
        }
        let mut poly = poly;
        while poly.last() == Some(&0.0) {
            poly.pop();
        }
        Ok(Self { poly, harmonics, omega })
    }

    pub fn zero(omega: f64) -> Self {
        Self::constant(0.0, omega)
    }

    pub fn constant(c: f64, omega: f64) -> Self {
        let poly = if c == 0.0 { Vec::new() } else { vec![c] };
        Self { poly, harmonics: Vec::new(), omega }
    }

    pub fn poly(&self) -> &[f64] {
        &self.poly
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn is_zero(&self) -> bool {
        self.poly.iter().all(|&c| c == 0.0) && self.harmonics.iter().all(|h| h.a == 0.0 && h.b == 0.0)
    }

    /// `Some(c)` when the function is identically the constant `c`.
    pub fn as_constant(&self) -> Option<f64> {
        if self.poly.len() > 1 || self.harmonics.iter().any(|h| h.a != 0.0 || h.b != 0.0) {
            return None;
        }
        Some(self.poly.first().copied().unwrap_or(0.0))
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.poly.iter().rev() {
            acc = acc * t + c;
        }
        if !self.harmonics.is_empty() {
            let base = TAU * t / self.omega;
            for h in &self.harmonics {
                let (s, c) = (base * f64::from(h.k)).sin_cos();
                acc += h.a * c + h.b * s;
            }
        }
        acc
    }

    /// `Σ|c_j| max(1,ω)^j + Σ(|a_k| + |b_k|)`.
    pub fn coefficient_sum_bound(&self) -> f64 {
        let scale = self.omega.max(1.0);
        let mut pow = 1.0;
        let mut total = 0.0;
        for c in &self.poly {
            total += c.abs() * pow;
            pow *= scale;
        }
        total + self.harmonics.iter().map(|h| h.a.abs() + h.b.abs()).sum::<f64>()
    }

    /// Upper bound on `|f'(t)|` over `[0, ω]`.
    pub fn lipschitz_bound(&self) -> f64 {
        let scale = self.omega.max(1.0);
        let mut pow = 1.0;
        let mut total = 0.0;
        for (j, c) in self.poly.iter().enumerate().skip(1) {
            total += j as f64 * c.abs() * pow;
            pow *= scale;
        }
        total
            + self
                .harmonics
                .iter()
                .map(|h| TAU * f64::from(h.k) / self.omega * (h.a.abs() + h.b.abs()))
                .sum::<f64>()
    }

    pub fn sup_norm(&self) -> SupNorm {
        let certified_upper = self.coefficient_sum_bound();
        if self.harmonics.is_empty() && self.poly.len() <= 1 {
            let v = self.poly.first().copied().unwrap_or(0.0).abs();
            return SupNorm { certified_upper, sampled_max: v };
        }
        let abs = |t: f64| self.eval(t).abs();
        let (t_best, v_best) = sample_extreme(self.omega, abs, true);
        let h = self.omega / (GRID_POINTS - 1) as f64;
        let lo = (t_best - h).max(0.0);
        let hi = (t_best + h).min(self.omega);
        let refined = golden_max(abs, lo, hi, 60);
        SupNorm { certified_upper, sampled_max: v_best.max(refined) }
    }

    /// Rigorous upper bound on `max |f|` that is usually much tighter than
    /// the coefficient sum: grid maximum plus Lipschitz slack.
    pub fn certified_sup(&self) -> f64 {
        let coarse = self.coefficient_sum_bound();
        if let Some(c) = self.as_constant() {
            return c.abs();
        }
        let (_, v) = sample_extreme(self.omega, |t| self.eval(t).abs(), true);
        let slack = self.lipschitz_bound() * grid_half_step(self.omega);
        coarse.min(v + slack)
    }

    /// Rigorous lower bound on `min f` over `[0, ω]`.
    pub fn certified_min(&self) -> f64 {
        if let Some(c) = self.as_constant() {
            return c;
        }
        let (_, v) = sample_extreme(self.omega, |t| self.eval(t), false);
        v - self.lipschitz_bound() * grid_half_step(self.omega)
    }

    /// Rigorous upper bound on `max f` over `[0, ω]`.
    pub fn certified_max(&self) -> f64 {
        if let Some(c) = self.as_constant() {
            return c;
        }
        let (_, v) = sample_extreme(self.omega, |t| self.eval(t), true);
        v + self.lipschitz_bound() * grid_half_step(self.omega)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            poly: self.poly.iter().map(|c| c * s).collect(),
            harmonics: self.harmonics.iter().map(|h| Harmonic::new(h.k, h.a * s, h.b * s)).collect(),
            omega: self.omega,
        }
    }

    /// `g(s) = f(α s)` on the horizon `ω/α`; harmonics are unchanged.
    pub fn time_scaled(&self, alpha: f64) -> Self {
        let mut pow = 1.0;
        let poly = self
            .poly
            .iter()
            .map(|c| {
                let v = c * pow;
                pow *= alpha;
                v
            })
            .collect();
        Self { poly, harmonics: self.harmonics.clone(), omega: self.omega / alpha }
    }

    /// `g(s) = f(ω - s)`; the horizon is unchanged.
    pub fn time_reversed(&self) -> Self {
        // (ω - s)^j expanded binomially.
        let w = self.omega;
        let mut poly = vec![0.0; self.poly.len()];
        for (j, c) in self.poly.iter().enumerate() {
            let mut binom = 1.0;
            for m in 0..=j {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                poly[m] += c * binom * sign * w.powi((j - m) as i32);
                binom = binom * (j - m) as f64 / (m + 1) as f64;
            }
        }
        let harmonics = self.harmonics.iter().map(|h| Harmonic::new(h.k, h.a, -h.b)).collect();
        Self::new(poly, harmonics, w).expect("time reversal preserves validity")
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self { omega, ..self.clone() }
    }

    /// Adds `delta` to the constant term.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut poly = self.poly.clone();
        if poly.is_empty() {
            poly.push(0.0);
        }
        poly[0] += delta;
        Self::new(poly, self.harmonics.clone(), self.omega).expect("shift preserves validity")
    }

    pub(crate) fn to_doc(&self) -> CoeffDoc {
        CoeffDoc {
            poly: self.poly.clone(),
            harmonics: self.harmonics.iter().map(|h| (h.k, h.a, h.b)).collect(),
        }
    }
}

pub(crate) fn grid_half_step(omega: f64) -> f64 {
    0.5 * omega / (GRID_POINTS - 1) as f64
}

/// Uniform grid `t_i = ω i / (GRID_POINTS - 1)`.
pub fn grid(omega: f64) -> impl Iterator<Item = f64> + Clone {
    let step = omega / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(move |i| if i + 1 == GRID_POINTS { omega } else { i as f64 * step })
}

fn sample_extreme(omega: f64, f: impl Fn(f64) -> f64, maximize: bool) -> (f64, f64) {
    let mut best = (0.0, if maximize { f64::NEG_INFINITY } else { f64::INFINITY });
    for t in grid(omega) {
        let v = f(t);
        if (maximize && v > best.1) || (!maximize && v < best.1) {
            best = (t, v);
        }
    }
    best
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Values of the right-hand side and its first three `z`-derivatives.
#[derive(Debug, Clone, Copy)]
pub struct RealJet {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

/// `z' = P_n(t) z^n + P_{n-1}(t) z^{n-1} + ... + P_0(t)` on `[0, ω]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    n: usize,
    omega: f64,
    coeffs: Vec<CoeffFn>,
    leading: Option<CoeffFn>,
    norm: f64,
}

impl Equation {
    pub fn new(n: usize, omega: f64, coeffs: Vec<CoeffFn>, leading: Option<CoeffFn>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidEquation(format!("degree n must be at least 2, got {n}")));
        }
        if n > MAX_DEGREE {
            return Err(Error::InvalidEquation(format!("degree n = {n} exceeds the supported maximum {MAX_DEGREE}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidEquation(format!("omega must be positive and finite, got {omega}")));
        }
        if coeffs.len() != n {
            return Err(Error::InvalidEquation(format!("expected {n} coefficients P_0..P_{}, got {}", n - 1, coeffs.len())));
        }
        if coeffs.iter().chain(leading.iter()).any(|c| c.omega != omega) {
            return Err(Error::InvalidEquation("coefficients must share the equation horizon".into()));
        }
        if let Some(lead) = &leading {
            let min = certified_abs_min(lead);
            if !(min > 0.0) {
                return Err(Error::VanishingLeading { certified_min: min });
            }
        }
        let norm = coeffs.iter().map(|c| c.sup_norm().certified_upper).fold(0.0, f64::max);
        Ok(Self { n, omega, coeffs, leading, norm })
    }

    /// `z' = z^n + Σ c_i z^i` with constant coefficients `c_0..c_{n-1}`.
    pub fn constant(n: usize, omega: f64, consts: &[f64]) -> Result<Self> {
        if consts.len() != n {
            return Err(Error::InvalidEquation(format!("expected {n} constants, got {}", consts.len())));
        }
        Self::new(n, omega, consts.iter().map(|&c| CoeffFn::constant(c, omega)).collect(), None)
    }

    /// `z' = z^n`.
    pub fn monomial(n: usize, omega: f64) -> Result<Self> {
        Self::constant(n, omega, &vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn coeffs(&self) -> &[CoeffFn] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &CoeffFn {
        &self.coeffs[i]
    }

    pub fn leading(&self) -> Option<&CoeffFn> {
        self.leading.as_ref()
    }

    /// Same coefficients on a different horizon. Polynomial parts keep their
    /// coefficients; harmonics follow the new base frequency.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(
            self.n,
            omega,
            self.coeffs.iter().map(|c| c.with_omega(omega)).collect(),
            self.leading.as_ref().map(|c| c.with_omega(omega)),
        )
    }

    pub fn with_coeffs(&self, coeffs: Vec<CoeffFn>) -> Result<Self> {
        Self::new(self.n, self.omega, coeffs, self.leading.clone())
    }

    /// `P_0 ≡ 0`, so `z ≡ 0` is a solution.
    pub fn has_zero_constant_term(&self) -> bool {
        self.coeffs[0].is_zero()
    }

    /// `‖P‖ = max_i certified sup |P_i|` (coefficient-sum bound).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `(f(z,t), ∂f/∂z(z,t))` for complex `z`.
    #[inline]
    pub fn rhs(&self, z: Complex64, t: f64) -> (Complex64, Complex64) {
        let lead = self.leading.as_ref().map_or(1.0, |l| l.eval(t));
        let mut f = Complex64::new(lead, 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            df = df * z + f;
            f = f * z + c.eval(t);
        }
        (f, df)
    }

    /// `f, ∂f/∂x, ∂²f/∂x², ∂³f/∂x³` at real `x`.
    pub fn real_jet(&self, x: f64, t: f64) -> RealJet {
        let lead = self.leading.as_ref().map_or(1.0, |l| l.eval(t));
        let (mut f, mut f1, mut f2, mut f3) = (lead, 0.0, 0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            f3 = f3 * x + f2;
            f2 = f2 * x + f1;
            f1 = f1 * x + f;
            f = f * x + c.eval(t);
        }
        RealJet { f, f1, f2: 2.0 * f2, f3: 6.0 * f3 }
    }

    pub fn to_doc(&self) -> EquationDoc {
        EquationDoc {
            n: self.n,
            omega: self.omega,
            coeffs: self.coeffs.iter().map(CoeffFn::to_doc).collect(),
            leading: self.leading.as_ref().map(CoeffFn::to_doc),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("equation serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: EquationDoc =
            serde_json::from_str(s).map_err(|e| Error::InvalidEquation(format!("malformed JSON: {e}")))?;
        doc.into_equation()
    }
}

/// Certified lower bound of `|f|` on `[0, ω]`; non-positive when `f` may vanish.
pub(crate) fn certified_abs_min(f: &CoeffFn) -> f64 {
    if let Some(c) = f.as_constant() {
        return c.abs();
    }
    let lo = f.certified_min();
    if lo > 0.0 {
        return lo;
    }
    let hi = f.certified_max();
    if hi < 0.0 {
        return -hi;
    }
    lo.max(-hi).min(0.0)
}

/// Wire form of a coefficient: `{ "poly": [...], "harmonics": [[k, a, b], ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffDoc {
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub harmonics: Vec<(u32, f64, f64)>,
}

impl CoeffDoc {
    pub fn into_coeff(self, omega: f64) -> Result<CoeffFn> {
        CoeffFn::new(
            self.poly,
            self.harmonics.into_iter().map(|(k, a, b)| Harmonic::new(k, a, b)).collect(),
            omega,
        )
    }
}

/// Wire form of an equation: `{ "n", "omega", "coeffs": [P_0..P_{n-1}], "leading" }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationDoc {
    pub n: usize,
    pub omega: f64,
    pub coeffs: Vec<CoeffDoc>,
    #[serde(default)]
    pub leading: Option<CoeffDoc>,
}

impl EquationDoc {
    pub fn into_equation(self) -> Result<Equation> {
        let omega = self.omega;
        let coeffs = self
            .coeffs
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.into_coeff(omega).map_err(|e| Error::InvalidEquation(format!("coeffs[{i}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let leading = self
            .leading
            .map(|c| c.into_coeff(omega).map_err(|e| Error::InvalidEquation(format!("leading: {e}"))))
            .transpose()?;
        Equation::new(self.n, omega, coeffs, leading)
    }
}
