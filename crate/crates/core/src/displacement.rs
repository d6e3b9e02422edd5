//! The displacement map `q(c) = z(ω, c) - c` and its derivatives.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::Equation;
use crate::error::{Error, Result};
use crate::flow::{flow_raw, Escape, IntegratorConfig, RawFlow};
use crate::integrator::{self, Integration};

/// Which return map the displacement is taken along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Direction {
    /// `q(c) = z(ω) - c` with `z(0) = c`.
    #[default]
    Forward,
    /// `q(c) = z(0) - c` with `z(ω) = c`. Has the same zeros as the forward map.
    Backward,
}

impl Direction {
    fn span(self, omega: f64) -> (f64, f64) {
        match self {
            Direction::Forward => (0.0, omega),
            Direction::Backward => (omega, 0.0),
        }
    }
}

/// Value of `q` or the escape that prevented it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QValue {
    Value(Complex64),
    Escaped(Escape),
}

impl QValue {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            QValue::Value(v) => Some(*v),
            QValue::Escaped(_) => None,
        }
    }
}

/// `q` and `q'` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QJet {
    pub q: Complex64,
    pub dq: Complex64,
}

pub fn q(eq: &Equation, c: Complex64, cfg: &IntegratorConfig) -> Result<QValue> {
    q_dir(eq, c, cfg, Direction::Forward)
}

pub fn q_dir(eq: &Equation, c: Complex64, cfg: &IntegratorConfig, dir: Direction) -> Result<QValue> {
    let (t0, t1) = dir.span(eq.omega());
    Ok(match flow_raw(eq, c, t0, t1, cfg, false)? {
        RawFlow::Completed { u, .. } => QValue::Value(u),
        RawFlow::Escaped(e) => QValue::Escaped(e),
    })
}

/// `q` and `q' = w(ω) - 1`, or `None` when the solution escapes.
pub fn q_jet(eq: &Equation, c: Complex64, cfg: &IntegratorConfig, dir: Direction) -> Result<Option<QJet>> {
    let (t0, t1) = dir.span(eq.omega());
    Ok(match flow_raw(eq, c, t0, t1, cfg, true)? {
        RawFlow::Completed { u, w } => Some(QJet { q: u, dq: w.expect("variation requested") - 1.0 }),
        RawFlow::Escaped(_) => None,
    })
}

pub fn q_prime(eq: &Equation, c: Complex64, cfg: &IntegratorConfig) -> Result<Complex64> {
    q_jet(eq, c, cfg, Direction::Forward)?
        .map(|j| j.dq)
        .ok_or_else(|| Error::EscapedDomain { c: format!("{c}") })
}

/// Quantities of the real derivative formulas at `(ω, c)`:
/// `E = exp ∫ f₁`, `G = ∫ E f₂`, and the derivatives of `q` built from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealDerivatives {
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
    /// `E(ω)[3/2 G(ω)² + ∫ E(t)² f₃ dt]`, the form that agrees with finite differences.
    pub q3: f64,
    /// `E(ω)[3/2 G(ω)² + ∫ E(ω)² f₃ dt]`, evaluated exactly as printed.
    pub q3_literal: f64,
    pub e: f64,
    pub g: f64,
}

/// Integrates `x`, `log E`, `G`, `∫E²f₃` and `∫f₃` on one adaptive step sequence.
pub fn real_derivatives(eq: &Equation, c: f64, cfg: &IntegratorConfig) -> Result<RealDerivatives> {
    cfg.validate()?;
    let radius = cfg.escape_radius_for(eq);
    let rhs = |t: f64, y: &[f64; 5]| {
        let jet = eq.real_jet(c + y[0], t);
        let e = y[1].exp();
        [jet.f, jet.f1, e * jet.f2, e * e * jet.f3, jet.f3]
    };
    let stop = |y: &[f64; 5]| (c + y[0]).abs() > radius;
    match integrator::integrate(&rhs, 0.0, [0.0; 5], eq.omega(), &cfg.step_control(), stop)? {
        Integration::Finished { y, .. } => {
            let e = y[1].exp();
            let g = y[2];
            Ok(RealDerivatives {
                q: y[0],
                q1: e - 1.0,
                q2: e * g,
                q3: e * (1.5 * g * g + y[3]),
                q3_literal: e * (1.5 * g * g + e * e * y[4]),
                e,
                g,
            })
        }
        Integration::Stopped { .. } => Err(Error::EscapedDomain { c: format!("{c}") }),
    }
}

/// Real-valued `q` along the real axis, `None` on escape.
pub fn real_q(eq: &Equation, x: f64, cfg: &IntegratorConfig, dir: Direction) -> Result<Option<f64>> {
    cfg.validate()?;
    let radius = cfg.escape_radius_for(eq);
    let (t0, t1) = dir.span(eq.omega());
    let rhs = |t: f64, y: &[f64; 1]| [eq.real_jet(x + y[0], t).f];
    let stop = |y: &[f64; 1]| (x + y[0]).abs() > radius;
    Ok(match integrator::integrate(&rhs, t0, [0.0], t1, &cfg.step_control(), stop)? {
        Integration::Finished { y, .. } => Some(y[0]),
        Integration::Stopped { .. } => None,
    })
}

/// Outcome of a real-line scan.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RealScan {
    /// Intervals of width at most `BRACKET_WIDTH` on which `q` changes sign,
    /// or degenerate intervals where `q` vanishes exactly.
    pub brackets: Vec<(f64, f64)>,
    /// Points adjacent to the escape set, approximating its boundary.
    pub escape_boundaries: Vec<f64>,
    /// Number of grid points whose solution escapes.
    pub escaped_points: usize,
}

pub const BRACKET_WIDTH: f64 = 1e-10;

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Last completing point between a completing `inside` and escaping `outside`.
fn escape_boundary(eq: &Equation, mut inside: f64, mut q_in: f64, mut outside: f64, cfg: &IntegratorConfig, dir: Direction) -> Result<(f64, f64)> {
    for _ in 0..64 {
        if (outside - inside).abs() <= 1e-13 * (1.0 + inside.abs()) {
            break;
        }
        let mid = 0.5 * (inside + outside);
        match real_q(eq, mid, cfg, dir)? {
            Some(v) => {
                inside = mid;
                q_in = v;
            }
            None => outside = mid,
        }
    }
    Ok((inside, q_in))
}

fn refine_bracket(
    eq: &Equation,
    (mut lo, mut q_lo): (f64, f64),
    (mut hi, q_hi): (f64, f64),
    cfg: &IntegratorConfig,
    dir: Direction,
) -> Result<Option<(f64, f64)>> {
    let s_lo = sign(q_lo);
    for _ in 0..200 {
        if (hi - lo).abs() <= BRACKET_WIDTH {
            return Ok(Some((lo.min(hi), lo.max(hi))));
        }
        let mid = 0.5 * (lo + hi);
        match real_q(eq, mid, cfg, dir)? {
            Some(0.0) => return Ok(Some((mid, mid))),
            Some(v) if sign(v) == s_lo => {
                lo = mid;
                q_lo = v;
            }
            Some(_) => hi = mid,
            None => {
                let (b, qb) = escape_boundary(eq, lo, q_lo, mid, cfg, dir)?;
                if sign(qb) != s_lo {
                    hi = b;
                    continue;
                }
                let (b2, qb2) = escape_boundary(eq, hi, q_hi, mid, cfg, dir)?;
                if sign(qb2) != s_lo {
                    // the sign change, if any, is hidden inside the escape set
                    return Ok(None);
                }
                lo = b2;
                q_lo = qb2;
            }
        }
    }
    Ok(Some((lo.min(hi), lo.max(hi))))
}

/// Scans `q` on a uniform grid over `[a, b]` and brackets its sign changes.
/// Runs of completing grid points are extended to the escape boundary, so a
/// bracket never straddles an escaping point.
pub fn scan_real_line(eq: &Equation, interval: (f64, f64), grid: usize, cfg: &IntegratorConfig) -> Result<RealScan> {
    scan_real_line_dir(eq, interval, grid, cfg, Direction::Forward)
}

pub fn scan_real_line_dir(eq: &Equation, (a, b): (f64, f64), grid: usize, cfg: &IntegratorConfig, dir: Direction) -> Result<RealScan> {
    if grid < 2 {
        return Err(Error::InvalidConfig(format!("scan grid must have at least 2 points, got {grid}")));
    }
    let xs: Vec<f64> = (0..grid).map(|i| a + (b - a) * i as f64 / (grid - 1) as f64).collect();
    let qs = xs.par_iter().map(|&x| real_q(eq, x, cfg, dir)).collect::<Result<Vec<_>>>()?;

    let mut scan = RealScan { escaped_points: qs.iter().filter(|v| v.is_none()).count(), ..Default::default() };
    // Completing samples, with boundary points inserted next to escapes.
    let mut runs: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid {
        match qs[i] {
            Some(v) => {
                if current.is_empty() && i > 0 {
                    let (bx, bq) = escape_boundary(eq, xs[i], v, xs[i - 1], cfg, dir)?;
                    scan.escape_boundaries.push(bx);
                    if bx != xs[i] {
                        current.push((bx, bq));
                    }
                }
                current.push((xs[i], v));
                if i + 1 < grid && qs[i + 1].is_none() {
                    let (bx, bq) = escape_boundary(eq, xs[i], v, xs[i + 1], cfg, dir)?;
                    scan.escape_boundaries.push(bx);
                    if bx != xs[i] {
                        current.push((bx, bq));
                    }
                    runs.push(std::mem::take(&mut current));
                }
            }
            None => {
                if !current.is_empty() {
                    runs.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }

    for run in runs {
        for (j, &(x, v)) in run.iter().enumerate() {
            if v == 0.0 {
                scan.brackets.push((x, x));
                continue;
            }
            if let Some(&(x2, v2)) = run.get(j + 1) {
                if v2 != 0.0 && sign(v) != sign(v2) {
                    if let Some(br) = refine_bracket(eq, (x, v), (x2, v2), cfg, dir)? {
                        scan.brackets.push(br);
                    }
                }
            }
        }
    }
    Ok(scan)
}

/// Safeguarded Newton polish of a real root inside `[lo, hi]`.
pub fn polish_real_root(eq: &Equation, lo: f64, hi: f64, cfg: &IntegratorConfig, dir: Direction) -> Result<(f64, f64)> {
    let mut x = 0.5 * (lo + hi);
    let mut best = (x, f64::INFINITY);
    let (wlo, whi) = (lo - 1e-9 * (1.0 + lo.abs()), hi + 1e-9 * (1.0 + hi.abs()));
    for _ in 0..20 {
        let Some(jet) = q_jet(eq, Complex64::new(x, 0.0), cfg, dir)? else { break };
        let r = jet.q.re.abs();
        if r < best.1 {
            best = (x, r);
        }
        if r == 0.0 || jet.dq.re == 0.0 {
            break;
        }
        let next = x - jet.q.re / jet.dq.re;
        if !(next >= wlo && next <= whi) || (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
        x = next;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    fn cubic() -> Equation {
        Equation::constant(3, 0.05, &[0.0, -4.0, 0.0]).unwrap()
    }

    #[test]
    fn q_quadratic_closed_form() {
        let eq = Equation::monomial(2, 1.0).unwrap();
        let v = q(&eq, Complex64::new(-1.0, 0.0), &cfg()).unwrap().value().unwrap();
        assert!((v.re - 0.5).abs() < 1e-9 && v.im.abs() < 1e-15);
    }

    #[test]
    fn q_vanishes_at_equilibria() {
        let eq = cubic();
        assert_eq!(q(&eq, Complex64::new(2.0, 0.0), &cfg()).unwrap().value(), Some(Complex64::new(0.0, 0.0)));
        assert_eq!(q(&eq, Complex64::new(0.0, 0.0), &cfg()).unwrap().value(), Some(Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn q_prime_examples() {
        let sq = Equation::monomial(2, 1.0).unwrap();
        assert!(q_prime(&sq, Complex64::new(0.0, 0.0), &cfg()).unwrap().norm() < 1e-14);
        let d = q_prime(&cubic(), Complex64::new(2.0, 0.0), &cfg()).unwrap();
        assert!((d.re - (0.4f64.exp() - 1.0)).abs() < 1e-9, "{d}");
        for n in 2..=6 {
            let eq = Equation::monomial(n, 1.0).unwrap();
            assert_eq!(q_prime(&eq, Complex64::new(0.0, 0.0), &cfg()).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn q_prime_rejects_escapes() {
        let eq = Equation::monomial(2, 1.0).unwrap();
        assert!(matches!(q_prime(&eq, Complex64::new(2.0, 0.0), &cfg()), Err(Error::EscapedDomain { .. })));
    }

    #[test]
    fn real_derivatives_at_equilibrium() {
        let d = real_derivatives(&cubic(), 2.0, &cfg()).unwrap();
        let e = 0.4f64.exp();
        assert!((d.q1 - (e - 1.0)).abs() < 1e-9);
        assert!((d.q2 - e * 1.5 * (e - 1.0)).abs() < 1e-9);
        assert!((d.q2 - 1.1006).abs() < 1e-4);
        assert!(d.e > 0.0);
    }

    #[test]
    fn real_derivatives_at_trivial_solution() {
        let omega = 0.7;
        let eq = Equation::constant(3, omega, &[0.0, 0.0, 0.4]).unwrap();
        let d = real_derivatives(&eq, 0.0, &cfg()).unwrap();
        assert_eq!((d.e, d.q1), (1.0, 0.0));
        let cube = Equation::monomial(3, 1.0).unwrap();
        let d = real_derivatives(&cube, 0.0, &cfg()).unwrap();
        assert_eq!((d.q, d.q1, d.q2), (0.0, 0.0, 0.0));
        assert!((d.q3 - 6.0).abs() < 1e-12 && (d.q3_literal - 6.0).abs() < 1e-12);
    }

    #[test]
    fn scan_finds_equilibria() {
        let s = scan_real_line(&cubic(), (-3.0, 3.0), 61, &cfg()).unwrap();
        let mids: Vec<f64> = s.brackets.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        assert_eq!(mids.len(), 3, "{s:?}");
        for (m, want) in mids.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((m - want).abs() < 1e-9);
        }
        for (a, b) in &s.brackets {
            assert!(b - a <= BRACKET_WIDTH);
        }
    }

    #[test]
    fn scan_quartic_plus_one_has_no_zero() {
        let eq = Equation::constant(4, 0.01, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let s = scan_real_line(&eq, (-3.0, 3.0), 121, &cfg()).unwrap();
        assert!(s.brackets.is_empty(), "{s:?}");
    }

    #[test]
    fn scan_cubic_single_zero() {
        let eq = Equation::monomial(3, 1.0).unwrap();
        let s = scan_real_line(&eq, (-0.5, 0.5), 40, &cfg()).unwrap();
        assert_eq!(s.brackets.len(), 1, "{s:?}");
        let (a, b) = s.brackets[0];
        assert!(a.abs() < 1e-3 && b.abs() < 1e-3);
    }

    #[test]
    fn scan_across_escape_gap() {
        // z' = z^2 - 1 on ω = 2: x = -1 is periodic, x = 1 is repelling, escapes above.
        let eq = Equation::constant(2, 2.0, &[-1.0, 0.0]).unwrap();
        let s = scan_real_line(&eq, (-3.0, 3.0), 25, &cfg()).unwrap();
        assert!(s.escaped_points > 0);
        let mids: Vec<f64> = s.brackets.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        assert!(mids.iter().any(|m| (m + 1.0).abs() < 1e-8), "{s:?}");
        assert!(mids.iter().any(|m| (m - 1.0).abs() < 1e-8), "{s:?}");
    }

    #[test]
    fn grid_too_small() {
        assert!(scan_real_line(&cubic(), (0.0, 1.0), 1, &cfg()).is_err());
    }
}
