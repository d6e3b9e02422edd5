//! Rigidly rotating planar systems
//! `ẋ = λx - y + x Σ R_i(x, y)`, `ẏ = x + λy + y Σ R_i(x, y)`
//! with `R_i` homogeneous of degree `i`. In polar coordinates `θ̇ = 1` and
//! `dr/dθ = λr + Σ R_i(cos θ, sin θ) r^{i+1}`, so limit cycles are positive
//! `2π`-periodic solutions of a scalar equation of the kind counted elsewhere
//! in this crate.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundsReport, Condition, Relation, TheoremId, Variant};
use crate::coefficients::{certified_abs_min, CoeffFn, Equation, Harmonic};
use crate::displacement::{polish_real_root, q_jet, scan_real_line_dir, Direction};
use crate::error::{Error, Result};
use crate::flow::IntegratorConfig;

/// `R[i-1]` holds the coefficients of `R_i` over `x^i, x^{i-1}y, ..., y^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarSystem {
    pub lambda: f64,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
}

impl PlanarSystem {
    pub fn new(lambda: f64, r: Vec<Vec<f64>>) -> Result<Self> {
        let sys = Self { lambda, r };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::InvalidSystem("lambda must be finite".into()));
        }
        if self.r.is_empty() {
            return Err(Error::InvalidSystem("R must contain at least R_1".into()));
        }
        for (j, c) in self.r.iter().enumerate() {
            let deg = j + 1;
            if c.len() != deg + 1 {
                return Err(Error::InvalidSystem(format!("R[{j}] (degree {deg}) needs {} coefficients, got {}", deg + 1, c.len())));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSystem(format!("R[{j}] has a non-finite coefficient")));
            }
        }
        Ok(())
    }

    /// Degree `n` of the reduced scalar equation.
    pub fn degree(&self) -> usize {
        self.r.len() + 1
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sys: Self = serde_json::from_str(s).map_err(|e| Error::InvalidSystem(e.to_string()))?;
        sys.validate()?;
        Ok(sys)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system serializes")
    }

    /// `R_i(x, y)` for `i = 1, ..., n-1`.
    pub fn eval_r(&self, i: usize, x: f64, y: f64) -> f64 {
        let c = &self.r[i - 1];
        c.iter()
            .enumerate()
            .map(|(b, v)| v * x.powi((i - b) as i32) * y.powi(b as i32))
            .sum()
    }

    /// Vector field at `(x, y)`.
    pub fn field(&self, x: f64, y: f64) -> (f64, f64) {
        let s: f64 = (1..self.degree()).map(|i| self.eval_r(i, x, y)).sum();
        (self.lambda * x - y + x * s, x + self.lambda * y + y * s)
    }

    /// `R_i(cos θ, sin θ)` as an exact trigonometric polynomial on `[0, 2π]`.
    pub fn restricted(&self, i: usize) -> CoeffFn {
        restrict(&self.r[i - 1])
    }
}

/// Expands `Σ_b c_b cos^{i-b}θ sin^bθ` into harmonics through
/// `cos θ = (e^{iθ} + e^{-iθ})/2` and `sin θ = (e^{iθ} - e^{-iθ})/(2i)`.
fn restrict(c: &[f64]) -> CoeffFn {
    let deg = c.len() - 1;
    let width = 2 * deg + 1;
    // Index k + deg holds the coefficient of e^{ikθ}.
    let mut total = vec![Complex64::new(0.0, 0.0); width];
    let half = Complex64::new(0.5, 0.0);
    let cos_f = [half, half];
    let sin_f = [Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5)];
    for (b, &v) in c.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut poly = vec![Complex64::new(0.0, 0.0); width];
        poly[deg] = Complex64::new(v, 0.0);
        for f in std::iter::repeat_n(&cos_f, deg - b).chain(std::iter::repeat_n(&sin_f, b)) {
            let mut next = vec![Complex64::new(0.0, 0.0); width];
            for k in 0..width {
                if poly[k] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                next[k - 1] += poly[k] * f[0];
                next[k + 1] += poly[k] * f[1];
            }
            poly = next;
        }
        for k in 0..width {
            total[k] += poly[k];
        }
    }
    let constant = total[deg].re;
    let harmonics = (1..=deg)
        .map(|k| {
            let d = total[deg + k];
            Harmonic::new(k as u32, 2.0 * d.re, -2.0 * d.im)
        })
        .filter(|h| h.a != 0.0 || h.b != 0.0)
        .collect();
    let poly = if constant == 0.0 { vec![] } else { vec![constant] };
    CoeffFn::new(poly, harmonics, TAU).expect("finite trigonometric polynomial")
}

/// `dr/dθ = R_{n-1}(θ) r^n + ... + R_1(θ) r^2 + λ r` over `θ ∈ [0, 2π]`.
/// Fails with [`Error::VanishingLeading`] when `R_{n-1}` vanishes somewhere
/// on the unit circle.
pub fn polar_reduce(sys: &PlanarSystem) -> Result<Equation> {
    sys.validate()?;
    let n = sys.degree();
    let mut coeffs = vec![CoeffFn::zero(TAU), CoeffFn::constant(sys.lambda, TAU)];
    coeffs.extend((1..n - 1).map(|i| sys.restricted(i)));
    let lead = sys.restricted(n - 1);
    let leading = if lead.as_constant() == Some(1.0) { None } else { Some(lead) };
    Equation::new(n, TAU, coeffs, leading)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    /// Multiplier too close to 1 to classify.
    NeutralFlagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCycle {
    /// Radius where the cycle crosses `θ = 0`.
    pub r0: f64,
    pub stability: Stability,
    /// Derivative of the return map at `r0`.
    pub multiplier: f64,
    /// `|q(r0)|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCycleReport {
    /// `None` when the leading term changes sign and cycles were not searched.
    pub cycles: Option<Vec<LimitCycle>>,
    pub origin_stable: bool,
    pub corollary_verdicts: Vec<BoundsReport>,
    /// Smallest cycle cap among the passing corollary variants.
    pub count_bound: Option<u32>,
    /// Upper end of the scanned radius interval.
    pub r_max: Option<f64>,
}

/// Settings for the limit-cycle scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarConfig {
    pub integrator: IntegratorConfig,
    pub grid: usize,
}

impl Default for PlanarConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), grid: 2000 }
    }
}

/// `|q'|` below this is reported as neutral.
const NEUTRAL: f64 = 1e-10;

/// `m ≤ |R_{n-1}| ≤ M` on the unit circle, or `IndefiniteLeading`.
pub fn leading_bounds(sys: &PlanarSystem) -> Result<(f64, f64)> {
    let lead = sys.restricted(sys.degree() - 1);
    let m = certified_abs_min(&lead);
    if !(m > 0.0) {
        return Err(Error::IndefiniteLeading { certified_min: m });
    }
    Ok((m, lead.certified_sup()))
}

/// Radius beyond which every solution leaves monotonically.
fn scan_radius(sys: &PlanarSystem, m: f64) -> f64 {
    let n = sys.degree();
    let lam = sys.lambda.abs();
    let root_bound = 2.0 * (lam / m + 1.0).powf(1.0 / (n - 1) as f64);
    let others: f64 = (1..n - 1).map(|i| sys.restricted(i).certified_sup()).sum();
    let cauchy = 1.0 + (lam + others) / m;
    1.05 * root_bound.max(cauchy)
}

fn classify(eq: &Equation, r: f64, cfg: &IntegratorConfig) -> Result<(Stability, f64)> {
    let c = Complex64::new(r, 0.0);
    let multiplier = match q_jet(eq, c, cfg, Direction::Forward) {
        Ok(Some(j)) => j.dq.re + 1.0,
        Ok(None) | Err(Error::StepLimitExceeded { .. }) => match q_jet(eq, c, cfg, Direction::Backward)? {
            Some(j) => 1.0 / (j.dq.re + 1.0),
            None => f64::INFINITY,
        },
        Err(e) => return Err(e),
    };
    let stability = if (multiplier - 1.0).abs() < NEUTRAL {
        Stability::NeutralFlagged
    } else if multiplier > 1.0 {
        Stability::Unstable
    } else {
        Stability::Stable
    };
    Ok((stability, multiplier))
}

fn find_cycles(eq: &Equation, r_max: f64, cfg: &PlanarConfig) -> Result<Vec<LimitCycle>> {
    let lo = r_max * 1e-4;
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for dir in [Direction::Forward, Direction::Backward] {
        let scan = scan_real_line_dir(eq, (lo, r_max), cfg.grid, &cfg.integrator, dir)?;
        for (a, b) in scan.brackets {
            let (x, res) = polish_real_root(eq, a, b, &cfg.integrator, dir)?;
            if x > 0.0 {
                roots.push((x, res));
            }
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (x, res) in roots {
        match merged.last_mut() {
            Some(last) if (x - last.0).abs() <= 1e-7 * (1.0 + x) => {
                if res < last.1 {
                    *last = (x, res);
                }
            }
            _ => merged.push((x, res)),
        }
    }
    merged
        .into_iter()
        .map(|(r0, residual)| {
            let (stability, multiplier) = classify(eq, r0, &cfg.integrator)?;
            Ok(LimitCycle { r0, stability, multiplier, residual })
        })
        .collect()
}

/// Locates limit cycles and evaluates the corollary hypotheses.
pub fn count_limit_cycles(sys: &PlanarSystem, cfg: &PlanarConfig) -> Result<LimitCycleReport> {
    sys.validate()?;
    let n = sys.degree();
    let mut verdicts = Vec::new();
    for v in [Variant::I, Variant::II, Variant::III, Variant::IV] {
        match check_corollary_4_1(sys, v) {
            Ok(r) => verdicts.push(r),
            Err(Error::UnsupportedDegree { .. }) | Err(Error::IndefiniteLeading { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let count_bound = verdicts.iter().filter(|r| r.verdict).filter_map(|r| r.real_cap).min();
    let r1_integral = if n > 2 { TAU * sys.restricted(1).poly().first().copied().unwrap_or(0.0) } else { 0.0 };
    let origin_stable = sys.lambda < 0.0 || (sys.lambda == 0.0 && r1_integral < 0.0);
    let (cycles, r_max) = match leading_bounds(sys) {
        Ok((m, _)) => {
            let eq = polar_reduce(sys)?;
            let r_max = scan_radius(sys, m);
            (Some(find_cycles(&eq, r_max, cfg)?), Some(r_max))
        }
        Err(Error::IndefiniteLeading { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(LimitCycleReport { cycles, origin_stable, corollary_verdicts: verdicts, count_bound, r_max })
}

fn small(name: String, f: &CoeffFn, cap: f64, strict: bool) -> Condition {
    Condition::new(name, f.certified_sup(), cap, Relation::AtMost, strict)
}

fn variant_id(variant: Variant, n: usize) -> Result<TheoremId> {
    let (id, min_n) = match variant {
        Variant::I => (TheoremId::C4_1_i, 4),
        Variant::II => (TheoremId::C4_1_ii, 5),
        Variant::III => (TheoremId::C4_1_iii, 3),
        Variant::IV => (TheoremId::C4_1_iv, 4),
    };
    if n < min_n {
        return Err(Error::UnsupportedDegree { what: format!("corollary {}", id.label()), n });
    }
    Ok(id)
}

/// Hypotheses of the limit-cycle corollary, with `|R_i|` read as the
/// restriction of `R_i` to the unit circle.
pub fn check_corollary_4_1(sys: &PlanarSystem, variant: Variant) -> Result<BoundsReport> {
    sys.validate()?;
    let n = sys.degree();
    variant_id(variant, n)?;
    let (m, big_m) = leading_bounds(sys)?;
    let r: Vec<CoeffFn> = (1..n - 1).map(|i| sys.restricted(i)).collect();
    corollary_4_1_conditions(variant, sys.lambda, m, big_m, &r)
}

/// Evaluates the hypotheses of a corollary variant from the leading-term
/// bounds `0 < m <= |R_{n-1}| <= big_m` on the unit circle and the restricted
/// lower-order terms `r = [R_1, ..., R_{n-2}]`; the degree is `r.len() + 2`.
pub fn corollary_4_1_conditions(variant: Variant, lambda: f64, m: f64, big_m: f64, r: &[CoeffFn]) -> Result<BoundsReport> {
    let n = r.len() + 2;
    let nf = n as f64;
    let id = variant_id(variant, n)?;
    if !(m > 0.0 && big_m >= m) {
        return Err(Error::IndefiniteLeading { certified_min: m });
    }
    let lam = lambda.abs();
    let s = (PI / (nf - 2.0)).sin();
    let mut conditions = Vec::new();
    let (cap, existence) = match variant {
        Variant::I => {
            let k = m / (nf - 3.0) * s;
            conditions.extend((1..n - 1).map(|i| small(format!("|R{i}| <= m sin(pi/(n-2))/(n-3)"), &r[i - 1], k, false)));
            let floor = big_m + m * (nf - 2.0) / (nf - 3.0) * s;
            conditions.push(Condition::new("|lambda| lower bound", lam, floor, Relation::AtLeast, false));
            (2, lambda < 0.0)
        }
        Variant::II => {
            let rm = &r[n - 4];
            conditions.push(Condition::new(format!("R{} <= 0", n - 3), rm.certified_max(), 0.0, Relation::AtMost, false));
            let h = rm.certified_sup();
            let k = m / (nf - 4.0) * s;
            conditions.extend(
                (1..n - 1)
                    .filter(|&i| i != n - 3)
                    .map(|i| small(format!("|R{i}| <= m sin(pi/(n-2))/(n-4)"), &r[i - 1], k, false)),
            );
            let floor = big_m + h + m * (nf - 3.0) / (nf - 4.0) * s;
            conditions.push(Condition::new("|lambda| lower bound", lam, floor, Relation::AtLeast, false));
            (n as u32 - 1, lambda < 0.0)
        }
        Variant::III => {
            let k = nf * m / ((nf - 2.0) * (nf - 2.0));
            conditions.extend((1..n - 1).map(|i| small(format!("|R{i}| < nm/(n-2)^2"), &r[i - 1], k, true)));
            let floor = nf * big_m * (2.0 * nf - 3.0) / (nf - 2.0);
            conditions.push(Condition::new("|lambda| lower bound", lam, floor, Relation::AtLeast, true));
            (3, lambda < 0.0)
        }
        Variant::IV => {
            let k = nf * m / ((nf - 3.0) * (nf - 3.0));
            conditions.extend((2..n - 1).map(|i| small(format!("|R{i}| < nm/(n-3)^2"), &r[i - 1], k, true)));
            let floor = nf * big_m * (nf - 1.0) * (2.0 * nf - 5.0) / (2.0 * (nf - 3.0));
            conditions.push(Condition::new("|R1| lower bound", certified_abs_min(&r[0]), floor, Relation::AtLeast, true));
            let integral = TAU * r[0].poly().first().copied().unwrap_or(0.0);
            (5, lambda < 0.0 || (lambda == 0.0 && integral < 0.0))
        }
    };
    let mut report = BoundsReport::new(id, None, conditions);
    report.predicted.push(format!("at most {cap} limit cycles"));
    if existence {
        report.predicted.push("at least one limit cycle; the origin is stable and the cycle unstable".into());
    }
    report.real_cap = Some(cap);
    report.flags.push(format!("leading term bounds on the unit circle: m = {m:.6e}, M = {big_m:.6e}"));
    Ok(report)
}
