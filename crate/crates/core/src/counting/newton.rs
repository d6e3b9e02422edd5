use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::Equation;
use crate::displacement::{q_jet, Direction, QJet};
use crate::error::{Error, Result};
use crate::flow::IntegratorConfig;

const MAX_ITER: usize = 60;
const MAX_HALVINGS: usize = 12;
const SINGULAR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedZero {
    pub c: Complex64,
    /// `|q(c)|`.
    pub residual: f64,
    pub iterations: usize,
}

fn jet(eq: &Equation, c: Complex64, cfg: &IntegratorConfig) -> Result<Option<QJet>> {
    match q_jet(eq, c, cfg, Direction::Forward) {
        Err(Error::StepLimitExceeded { .. }) => Ok(None),
        other => other,
    }
}

fn converged(q: f64, step: f64, c: Complex64) -> bool {
    let scale = 1.0 + c.norm();
    q <= 1e-12 * scale && step <= 1e-9 * scale
}

/// Damped (modified, for `multiplicity > 1`) Newton iteration on `q`.
/// `keep` restricts the iterates; leaving it is a divergence.
pub(crate) fn newton<K>(eq: &Equation, c0: Complex64, multiplicity: u32, cfg: &IntegratorConfig, keep: K) -> Result<RefinedZero>
where
    K: Fn(Complex64) -> bool,
{
    let diverged = |c: Complex64, why: &str| Error::Diverged(format!("{why} at c = {c}"));
    let mut c = c0;
    let Some(mut j) = jet(eq, c, cfg)? else {
        return Err(diverged(c, "starting point escapes"));
    };
    let m = f64::from(multiplicity.max(1));
    for it in 0..MAX_ITER {
        let qa = j.q.norm();
        if qa == 0.0 {
            return Ok(RefinedZero { c, residual: 0.0, iterations: it });
        }
        if j.dq.norm() < SINGULAR {
            if multiplicity > 1 {
                // Expected at the centre of a cluster.
                return Ok(RefinedZero { c, residual: qa, iterations: it });
            }
            return Err(Error::SingularDerivative { c: format!("{c}"), abs_dq: j.dq.norm() });
        }
        let full = j.q / j.dq * m;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = c - full * lambda;
            if keep(cand) {
                if let Some(jc) = jet(eq, cand, cfg)? {
                    if jc.q.norm() < qa || (full * lambda).norm() <= 1e-9 * (1.0 + c.norm()) {
                        accepted = Some((cand, jc));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((cand, jc)) = accepted else {
            // No decrease along the Newton direction: either converged to the
            // noise floor or stuck.
            let scale = 1.0 + c.norm();
            if qa <= 1e-7 * scale && full.norm() <= 1e-6 * scale {
                return Ok(RefinedZero { c, residual: qa, iterations: it });
            }
            return Err(diverged(c, "no descent"));
        };
        let step = (cand - c).norm();
        c = cand;
        j = jc;
        if converged(j.q.norm(), step, c) || step <= 1e-13 * (1.0 + c.norm()) {
            return Ok(RefinedZero { c, residual: j.q.norm(), iterations: it + 1 });
        }
    }
    let scale = 1.0 + c.norm();
    if j.q.norm() <= 1e-7 * scale {
        Ok(RefinedZero { c, residual: j.q.norm(), iterations: MAX_ITER })
    } else {
        Err(diverged(c, "iteration limit"))
    }
}

/// Newton refinement of a zero of `q` from `c0`.
pub fn refine_zero(eq: &Equation, c0: Complex64, cfg: &IntegratorConfig) -> Result<RefinedZero> {
    let limit = cfg.escape_radius_for(eq);
    newton(eq, c0, 1, cfg, |c| c.norm() < limit)
}
