//! Complex flow of the equation with blow-up detection.
//!
//! The state is integrated as the displacement `u = z - c` so that `z(t) - c`
//! keeps full relative precision near multiple periodic solutions.

use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::geometry;
use crate::coefficients::Equation;
use crate::error::{Error, Result};
use crate::integrator::{self, dopri_step, Integration, StepControl};

/// Solver settings for one flow evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `None` resolves to `max(10 ρ, 1e3)` for the equation at hand.
    pub escape_radius: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, escape_radius: None, max_steps: 200_000 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if let Some(r) = self.escape_radius {
            if !(r > 1.0) {
                return Err(Error::InvalidConfig(format!("escape radius must exceed 1, got {r}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn escape_radius_for(&self, eq: &Equation) -> f64 {
        self.escape_radius.unwrap_or_else(|| match geometry(eq) {
            Ok(g) => (10.0 * g.rho).max(1e3),
            Err(_) => 1e3,
        })
    }

    pub(crate) fn step_control(&self) -> StepControl {
        StepControl { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_steps: self.max_steps }
    }
}

/// A trajectory that left the disk `|z| <= escape_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Escape {
    /// Extrapolated blow-up time.
    pub time: f64,
    /// Arm containing the crossing point, when it lies in one (best effort).
    pub arm: Option<usize>,
    /// State where the escape radius was crossed.
    #[serde(skip)]
    pub crossing: Complex64,
    pub crossing_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum FlowOutcome {
    Completed {
        #[serde(rename = "final")]
        z: Complex64,
        variation: Option<Complex64>,
    },
    Escaped(Escape),
}

impl FlowOutcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, FlowOutcome::Completed { .. })
    }

    pub fn final_state(&self) -> Option<Complex64> {
        match self {
            FlowOutcome::Completed { z, .. } => Some(*z),
            FlowOutcome::Escaped(_) => None,
        }
    }

    pub fn escape(&self) -> Option<&Escape> {
        match self {
            FlowOutcome::Escaped(e) => Some(e),
            FlowOutcome::Completed { .. } => None,
        }
    }
}

/// Displacement `z(t1) - c` together with the variational factor, as
/// computed in the shifted coordinates. Used by the displacement module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RawFlow {
    Completed { u: Complex64, w: Option<Complex64> },
    Escaped(Escape),
}

pub(crate) fn flow_raw(eq: &Equation, c: Complex64, t0: f64, t1: f64, cfg: &IntegratorConfig, with_variation: bool) -> Result<RawFlow> {
    cfg.validate()?;
    let radius = cfg.escape_radius_for(eq);
    if c.norm() > radius {
        let esc = Escape { time: t0, arm: arm_of(eq, c, t1 >= t0), crossing: c, crossing_time: t0 };
        return Ok(RawFlow::Escaped(esc));
    }
    // The state is shifted by `c`, so relative error is measured against `|z|`.
    let mut ctl = cfg.step_control();
    ctl.abs_tol += cfg.rel_tol * c.norm();
    if with_variation {
        let rhs = |t: f64, y: &[f64; 4]| {
            let z = Complex64::new(c.re + y[0], c.im + y[1]);
            let (f, df) = eq.rhs(z, t);
            let dw = df * Complex64::new(y[2], y[3]);
            [f.re, f.im, dw.re, dw.im]
        };
        let stop = |y: &[f64; 4]| Complex64::new(c.re + y[0], c.im + y[1]).norm() > radius;
        match integrator::integrate(&rhs, t0, [0.0, 0.0, 1.0, 0.0], t1, &ctl, stop)? {
            Integration::Finished { y, .. } => {
                Ok(RawFlow::Completed { u: Complex64::new(y[0], y[1]), w: Some(Complex64::new(y[2], y[3])) })
            }
            Integration::Stopped { t_prev, y_prev, t, .. } => {
                let (tc, zc) = locate_crossing(&rhs, t_prev, &y_prev, t, c, radius);
                Ok(RawFlow::Escaped(make_escape(eq, tc, zc, t0, t1)))
            }
        }
    } else {
        let rhs = |t: f64, y: &[f64; 2]| {
            let (f, _) = eq.rhs(Complex64::new(c.re + y[0], c.im + y[1]), t);
            [f.re, f.im]
        };
        let stop = |y: &[f64; 2]| Complex64::new(c.re + y[0], c.im + y[1]).norm() > radius;
        match integrator::integrate(&rhs, t0, [0.0, 0.0], t1, &ctl, stop)? {
            Integration::Finished { y, .. } => Ok(RawFlow::Completed { u: Complex64::new(y[0], y[1]), w: None }),
            Integration::Stopped { t_prev, y_prev, t, .. } => {
                let (tc, zc) = locate_crossing(&rhs, t_prev, &y_prev, t, c, radius);
                Ok(RawFlow::Escaped(make_escape(eq, tc, zc, t0, t1)))
            }
        }
    }
}

/// Bisection on the fraction of the last step at which `|z|` reaches the radius.
fn locate_crossing<const N: usize, F>(rhs: &F, t_prev: f64, y_prev: &[f64; N], t: f64, c: Complex64, radius: f64) -> (f64, Complex64)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = rhs(t_prev, y_prev);
    let h = t - t_prev;
    let state_at = |theta: f64| {
        let (y, _, _) = dopri_step(rhs, t_prev, y_prev, &k1, theta * h);
        Complex64::new(c.re + y[0], c.im + y[1])
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut z_hi = state_at(1.0);
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        let z = state_at(mid);
        if !z.norm().is_finite() || z.norm() > radius {
            hi = mid;
            z_hi = z;
        } else {
            lo = mid;
        }
    }
    if !z_hi.norm().is_finite() {
        z_hi = state_at(lo);
    }
    (t_prev + hi * h, z_hi)
}

fn make_escape(eq: &Equation, tc: f64, zc: Complex64, t0: f64, t1: f64) -> Escape {
    let forward = t1 >= t0;
    let n = eq.n() as f64;
    let lead = eq.leading().map_or(1.0, |l| l.eval(tc)).abs();
    let dt = 1.0 / ((n - 1.0) * lead * zc.norm().powf(n - 1.0));
    let time = if forward { (tc + dt).min(t1) } else { (tc - dt).max(t1) };
    Escape { time, arm: arm_of(eq, zc, forward), crossing: zc, crossing_time: tc }
}

fn arm_of(eq: &Equation, z: Complex64, forward: bool) -> Option<usize> {
    let k = classify_escape(eq, z).ok().flatten()?;
    // Forward escapes live in even arms, backward escapes in odd arms.
    (k % 2 == usize::from(!forward)).then_some(k)
}

/// Integrates from `z(t0) = c` to `t1`; `t1 < t0` integrates backward.
pub fn integrate(eq: &Equation, c: Complex64, t0: f64, t1: f64, cfg: &IntegratorConfig, with_variation: bool) -> Result<FlowOutcome> {
    Ok(match flow_raw(eq, c, t0, t1, cfg, with_variation)? {
        RawFlow::Completed { u, w } => FlowOutcome::Completed { z: c + u, variation: w },
        RawFlow::Escaped(e) => FlowOutcome::Escaped(e),
    })
}

/// Index `k` of the arm `G_k` containing `z`, or `None` when `z` lies between
/// arms. Fails with [`Error::InsideDisk`] for `|z| <= ρ`.
pub fn classify_escape(eq: &Equation, z: Complex64) -> Result<Option<usize>> {
    let g = geometry(eq)?;
    let r = z.norm();
    if r <= g.rho {
        return Err(Error::InsideDisk { modulus: r, rho: g.rho });
    }
    Ok(g.arm_containing(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::CoeffFn;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn cubic_closed_form() {
        let eq = Equation::monomial(3, 1.0).unwrap();
        let out = integrate(&eq, Complex64::new(1.0, 0.0), 0.0, 0.25, &cfg(), false).unwrap();
        let z = out.final_state().unwrap();
        assert!((z.re - 2f64.sqrt()).abs() < 1e-8 && z.im.abs() < 1e-14);
    }

    #[test]
    fn quadratic_blow_up() {
        let eq = Equation::monomial(2, 1.0).unwrap();
        let out = integrate(&eq, Complex64::new(1.0, 0.0), 0.0, 2.0, &cfg(), false).unwrap();
        let esc = out.escape().expect("escapes");
        assert!((esc.time - 1.0).abs() < 1e-6, "{}", esc.time);
    }

    #[test]
    fn zero_is_fixed_when_constant_term_vanishes() {
        let omega = 1.3;
        let p1 = CoeffFn::new(vec![0.2, -0.1], vec![], omega).unwrap();
        let eq = Equation::new(3, omega, vec![CoeffFn::zero(omega), p1, CoeffFn::constant(0.7, omega)], None).unwrap();
        let out = integrate(&eq, Complex64::new(0.0, 0.0), 0.0, omega, &cfg(), true).unwrap();
        assert_eq!(out.final_state(), Some(Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn identity_on_degenerate_horizon() {
        let eq = Equation::monomial(4, 1.0).unwrap();
        let c = Complex64::new(0.3, -0.2);
        assert_eq!(
            integrate(&eq, c, 0.5, 0.5, &cfg(), true).unwrap(),
            FlowOutcome::Completed { z: c, variation: Some(Complex64::new(1.0, 0.0)) }
        );
    }

    #[test]
    fn classify_examples() {
        let eq = Equation::monomial(3, 1.0).unwrap();
        let rho = geometry(&eq).unwrap().rho;
        assert_eq!(classify_escape(&eq, Complex64::new(2.0 * rho, 0.0)).unwrap(), Some(0));
        assert_eq!(classify_escape(&eq, Complex64::new(-2.0 * rho, 0.0)).unwrap(), Some(2));
        assert!(matches!(classify_escape(&eq, Complex64::new(0.5 * rho, 0.0)), Err(Error::InsideDisk { .. })));
        let eq4 = Equation::constant(4, 1.0, &[0.5, -1.0, 0.0, 0.3]).unwrap();
        let rho4 = geometry(&eq4).unwrap().rho;
        assert_eq!(classify_escape(&eq4, Complex64::new(0.0, 2.0 * rho4)).unwrap(), None);
    }

    #[test]
    fn forward_escape_of_real_cubic_is_in_even_arm() {
        let eq = Equation::monomial(3, 1.0).unwrap();
        for c in [2.0, -2.0] {
            let out = integrate(&eq, Complex64::new(c, 0.0), 0.0, 1.0, &cfg(), false).unwrap();
            let esc = out.escape().unwrap();
            assert_eq!(esc.arm, Some(if c > 0.0 { 0 } else { 2 }));
        }
    }

    #[test]
    fn backward_escape() {
        let omega = 1.0;
        let eq = Equation::new(
            3,
            omega,
            vec![CoeffFn::zero(omega), CoeffFn::zero(omega), CoeffFn::zero(omega)],
            Some(CoeffFn::constant(-1.0, omega)),
        )
        .unwrap();
        // z' = -z^3 backward in time behaves like z' = z^3 forward: t* = -1/(2 c^2).
        let out = integrate(&eq, Complex64::new(2.0, 0.0), 0.0, -1.0, &cfg(), false).unwrap();
        let esc = out.escape().unwrap();
        assert!((esc.time + 0.125).abs() < 1e-6, "{}", esc.time);
    }

    #[test]
    fn rejects_bad_config() {
        let eq = Equation::monomial(3, 1.0).unwrap();
        let bad = IntegratorConfig { rel_tol: 0.0, ..cfg() };
        assert!(integrate(&eq, Complex64::new(0.1, 0.0), 0.0, 1.0, &bad, false).is_err());
    }
}
