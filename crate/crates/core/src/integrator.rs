//! Dormand–Prince 5(4) stepper with PI step-size control over fixed-size
//! real state vectors. Complex states are packed as `[re, im, ...]`.

use crate::error::{Error, Result};

// Butcher tableau (Dormand & Prince 1980).
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Error coefficients: 5th-order weights minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Tolerances and step budget for one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_steps: 200_000 }
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integration<const N: usize> {
    /// Reached `t1`.
    Finished { y: [f64; N], steps: usize },
    /// The stop predicate fired on the accepted state `(t, y)`; `(t_prev, y_prev)`
    /// is the last accepted state where it did not.
    Stopped { t_prev: f64, y_prev: [f64; N], t: f64, y: [f64; N], steps: usize },
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (a, k) in terms {
            s += a * k[i];
        }
        *o += h * s;
    }
    out
}

/// One Dormand–Prince step from `(t, y)` with size `h`; `k1 = f(t, y)`.
/// Returns the 5th-order solution, the error estimate and `f(t + h, y_new)`.
#[inline]
pub fn dopri_step<const N: usize, F>(rhs: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = rhs(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = rhs(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, err, k7)
}

#[inline]
fn error_norm<const N: usize>(y: &[f64; N], y_new: &[f64; N], err: &[f64; N], ctl: &StepControl) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = ctl.abs_tol + ctl.rel_tol * y[i].abs().max(y_new[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn rms<const N: usize>(v: &[f64; N], y: &[f64; N], ctl: &StepControl) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let r = v[i] / (ctl.abs_tol + ctl.rel_tol * y[i].abs());
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(rhs: &F, t0: f64, y0: &[f64; N], k1: &[f64; N], span: f64, ctl: &StepControl) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let dir = span.signum();
    let d0 = rms(y0, y0, ctl);
    let d1 = rms(k1, y0, ctl);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span.abs());
    let y1 = axpy(y0, dir * h0, &[(1.0, k1)]);
    let k2 = rhs(t0 + dir * h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = k2[i] - k1[i];
    }
    let d2 = rms(&diff, y0, ctl) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span.abs())
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction). `stop`
/// is checked on every accepted state and ends the integration early.
pub fn integrate<const N: usize, F, S>(rhs: &F, t0: f64, y0: [f64; N], t1: f64, ctl: &StepControl, stop: S) -> Result<Integration<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: Fn(&[f64; N]) -> bool,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(Integration::Finished { y: y0, steps: 0 });
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = initial_step(rhs, t0, &y0, &k1, span, ctl);
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0usize;
    let mut rejected_last = false;
    loop {
        if steps >= ctl.max_steps {
            return Err(Error::StepLimitExceeded { t, max_steps: ctl.max_steps });
        }
        let remaining = (t1 - t) * dir;
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        let (y_new, err, k7) = dopri_step(rhs, t, &y, &k1, dir * h);
        steps += 1;
        let en = error_norm(&y, &y_new, &err, ctl);
        if en.is_finite() && en <= 1.0 {
            let t_new = if last { t1 } else { t + dir * h };
            if stop(&y_new) {
                return Ok(Integration::Stopped { t_prev: t, y_prev: y, t: t_new, y: y_new, steps });
            }
            if last {
                return Ok(Integration::Finished { y: y_new, steps });
            }
            let mut fac = SAFETY * en.max(1e-10).powf(-ALPHA) * err_prev.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            err_prev = en.max(1e-4);
            t = t_new;
            y = y_new;
            k1 = k7;
            h *= fac;
            rejected_last = false;
        } else {
            let fac = if en.is_finite() { (SAFETY * en.powf(-ALPHA)).max(FAC_MIN) } else { FAC_MIN };
            h *= fac;
            rejected_last = true;
            if h < 1e-15 * t.abs().max(1.0) {
                return Err(Error::StepLimitExceeded { t, max_steps: steps });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        let out = integrate(&rhs, 0.0, [1.0], 2.0, &StepControl::default(), |_| false).unwrap();
        let Integration::Finished { y, .. } = out else { panic!() };
        assert!((y[0] - (-2f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn backward_integration_inverts_forward() {
        let rhs = |t: f64, y: &[f64; 2]| [y[1], -y[0] + 0.1 * t.sin()];
        let ctl = StepControl { rel_tol: 1e-12, abs_tol: 1e-14, max_steps: 100_000 };
        let Integration::Finished { y: fwd, .. } = integrate(&rhs, 0.0, [1.0, 0.0], 3.0, &ctl, |_| false).unwrap() else {
            panic!()
        };
        let Integration::Finished { y: back, .. } = integrate(&rhs, 3.0, fwd, 0.0, &ctl, |_| false).unwrap() else {
            panic!()
        };
        assert!((back[0] - 1.0).abs() < 1e-9 && back[1].abs() < 1e-9);
    }

    #[test]
    fn zero_span_is_identity() {
        let rhs = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let out = integrate(&rhs, 1.0, [3.0], 1.0, &StepControl::default(), |_| false).unwrap();
        assert_eq!(out, Integration::Finished { y: [3.0], steps: 0 });
    }

    #[test]
    fn stop_predicate_fires() {
        let rhs = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let out = integrate(&rhs, 0.0, [1.0], 2.0, &StepControl::default(), |y| y[0] > 100.0).unwrap();
        match out {
            Integration::Stopped { t, y, y_prev, .. } => {
                assert!(y[0] > 100.0 && y_prev[0] <= 100.0);
                assert!(t < 1.0);
            }
            _ => panic!("expected stop"),
        }
    }

    #[test]
    fn step_limit_reported() {
        let rhs = |_t: f64, y: &[f64; 1]| [(50.0 * y[0]).cos() * 100.0];
        let ctl = StepControl { max_steps: 5, ..StepControl::default() };
        let err = integrate(&rhs, 0.0, [0.0], 10.0, &ctl, |_| false).unwrap_err();
        assert!(matches!(err, Error::StepLimitExceeded { .. }));
    }
}
