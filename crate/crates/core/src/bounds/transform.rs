use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::coefficients::{certified_abs_min, CoeffFn, Equation, Harmonic};
use crate::error::{Error, Result};

/// Number of harmonics used when refitting reduced coefficients.
pub const FIT_HARMONICS: u32 = 32;
const FIT_POLY_DEGREE: usize = 3;
const FIT_SAMPLES: usize = 1024;

/// Rescales so that the `K` of the counting theorems becomes 1:
/// `z ↦ K^{-1/n} z`, `t ↦ K^{(n-1)/n} t`.
pub fn normalize(eq: &Equation, k: f64) -> Result<Equation> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::NonpositiveK(k));
    }
    let n = eq.n();
    let nf = n as f64;
    let alpha = k.powf(-(nf - 1.0) / nf);
    let coeffs = eq
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, p)| p.time_scaled(alpha).scaled(k.powf(-((n - i) as f64) / nf)))
        .collect();
    let leading = eq.leading().map(|l| l.time_scaled(alpha));
    Equation::new(n, eq.omega() / alpha, coeffs, leading)
}

/// Monic equation equivalent to one with a sign-definite leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingReduction {
    pub equation: Equation,
    /// Largest deviation of the refit coefficients from the exact transformed
    /// ones on a check grid; zero for constant leading coefficients.
    pub fit_residual: f64,
    /// True when time had to be reversed (negative leading coefficient).
    pub time_reversed: bool,
}

/// `P_i(t) ↦ -P_i(ω - t)` for every coefficient, leading one included.
fn reverse(coeffs: &[CoeffFn], leading: &CoeffFn) -> (Vec<CoeffFn>, CoeffFn) {
    let flip = |p: &CoeffFn| p.time_reversed().scaled(-1.0);
    (coeffs.iter().map(flip).collect(), flip(leading))
}

/// Removes a non-vanishing leading coefficient `P_n` by the time change
/// `s = ∫_0^t |P_n|` and division by `P_n`. A negative `P_n` also reverses
/// time, so the new horizon is always positive.
pub fn reduce_leading(eq: &Equation) -> Result<LeadingReduction> {
    let n = eq.n();
    let Some(lead) = eq.leading() else {
        return Ok(LeadingReduction { equation: eq.clone(), fit_residual: 0.0, time_reversed: false });
    };
    let min = certified_abs_min(lead);
    if !(min > 0.0) {
        return Err(Error::VanishingLeading { certified_min: min });
    }
    let negative = lead.certified_max() < 0.0;
    let (coeffs, lead) = if negative { reverse(eq.coeffs(), lead) } else { (eq.coeffs().to_vec(), lead.clone()) };
    if let Some(c) = lead.as_constant() {
        let coeffs = coeffs.iter().map(|p| p.time_scaled(1.0 / c).scaled(1.0 / c)).collect();
        let equation = Equation::new(n, c * eq.omega(), coeffs, None)?;
        return Ok(LeadingReduction { equation, fit_residual: 0.0, time_reversed: negative });
    }
    let clock = Clock::new(&lead);
    let horizon = clock.total;
    let mut residual: f64 = 0.0;
    let mut fitted = Vec::with_capacity(n);
    for p in &coeffs {
        if p.is_zero() {
            fitted.push(CoeffFn::zero(horizon));
            continue;
        }
        let target = |s: f64| {
            let t = clock.inverse(s);
            p.eval(t) / lead.eval(t)
        };
        let (f, r) = fit(&target, horizon)?;
        residual = residual.max(r);
        fitted.push(f);
    }
    let equation = Equation::new(n, horizon, fitted, None)?;
    Ok(LeadingReduction { equation, fit_residual: residual, time_reversed: negative })
}

/// `s(t) = ∫_0^t f` for a positive coefficient, with its inverse.
struct Clock<'a> {
    f: &'a CoeffFn,
    total: f64,
}

impl<'a> Clock<'a> {
    fn new(f: &'a CoeffFn) -> Self {
        let total = antiderivative(f, f.omega());
        Self { f, total }
    }

    fn at(&self, t: f64) -> f64 {
        antiderivative(self.f, t)
    }

    fn inverse(&self, s: f64) -> f64 {
        let omega = self.f.omega();
        let (mut lo, mut hi) = (0.0, omega);
        let mut t = omega * s / self.total;
        for _ in 0..100 {
            let g = self.at(t) - s;
            if g.abs() <= 1e-15 * self.total.max(1.0) {
                break;
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let newton = t - g / self.f.eval(t);
            t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-16 * omega {
                break;
            }
        }
        t
    }
}

fn antiderivative(f: &CoeffFn, t: f64) -> f64 {
    let mut acc = 0.0;
    for (j, c) in f.poly().iter().enumerate().rev() {
        acc = acc * t + c / (j + 1) as f64;
    }
    acc *= t;
    let nu = TAU / f.omega();
    for h in f.harmonics() {
        let w = nu * f64::from(h.k);
        let (s, c) = (w * t).sin_cos();
        acc += h.a * s / w + h.b * (1.0 - c) / w;
    }
    acc
}

/// Least-squares fit of `target` on `[0, horizon]` by harmonics alone and by
/// a cubic plus harmonics, keeping the better of the two.
fn fit(target: &dyn Fn(f64) -> f64, horizon: f64) -> Result<(CoeffFn, f64)> {
    let periodic = fit_with(target, horizon, None)?;
    let general = fit_with(target, horizon, Some(FIT_POLY_DEGREE))?;
    Ok(if periodic.1 <= general.1 { periodic } else { general })
}

/// Fit with [`FIT_HARMONICS`] harmonics and, optionally, polynomial terms up
/// to `degree`; returns the fit and its largest error on a grid interleaved
/// with the fit samples.
fn fit_with(target: &dyn Fn(f64) -> f64, horizon: f64, degree: Option<usize>) -> Result<(CoeffFn, f64)> {
    let h = FIT_HARMONICS as usize;
    let np = degree.map_or(1, |d| d + 1);
    let cols = np + 2 * h;
    let xs: Vec<f64> = (0..FIT_SAMPLES).map(|j| horizon * j as f64 / (FIT_SAMPLES - 1) as f64).collect();
    let row = |s: f64| -> Vec<f64> {
        let x = s / horizon;
        let mut r = Vec::with_capacity(cols);
        let mut pow = 1.0;
        for _ in 0..np {
            r.push(pow);
            pow *= x;
        }
        for k in 1..=h {
            let (sn, cs) = (TAU * k as f64 * x).sin_cos();
            r.push(cs);
            r.push(sn);
        }
        r
    };
    let a = DMatrix::from_fn(FIT_SAMPLES, cols, |i, j| row(xs[i])[j]);
    let b = DVector::from_iterator(FIT_SAMPLES, xs.iter().map(|&s| target(s)));
    let svd = a.svd(true, true);
    let beta = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidEquation(format!("coefficient refit failed: {e}")))?;
    let poly: Vec<f64> = (0..np).map(|j| beta[j] / horizon.powi(j as i32)).collect();
    let harmonics: Vec<Harmonic> = (1..=h)
        .map(|k| Harmonic::new(k as u32, beta[np + 2 * k - 2], beta[np + 2 * k - 1]))
        .collect();
    let f = CoeffFn::new(poly, harmonics, horizon)?;
    let residual = (0..2 * FIT_SAMPLES)
        .map(|j| horizon * (j as f64 + 0.5) / (2 * FIT_SAMPLES) as f64)
        .map(|s| (f.eval(s) - target(s)).abs())
        .fold(0.0, f64::max);
    Ok((f, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn normalize_identity_and_example() {
        let eq = Equation::constant(4, 1.3, &[0.4, -2.0, 0.1, 0.3]).unwrap();
        assert_eq!(normalize(&eq, 1.0).unwrap(), eq);
        let eq = Equation::constant(3, 1.0, &[8.0, 0.0, 0.0]).unwrap();
        let m = normalize(&eq, 8.0).unwrap();
        assert!((m.coeff(0).as_constant().unwrap() - 1.0).abs() < 1e-15);
        assert!((m.omega() - 4.0).abs() < 1e-14);
        assert!(matches!(normalize(&eq, 0.0), Err(Error::NonpositiveK(_))));
    }

    #[test]
    fn normalize_conjugates_the_flow() {
        // w(s) = K^{-1/n} z(K^{-(n-1)/n} s) solves the normalized equation.
        use crate::flow::{integrate, IntegratorConfig};
        use num_complex::Complex64;
        let omega = 0.7;
        let p0 = CoeffFn::new(vec![0.2, 0.1], vec![Harmonic::new(2, 0.1, -0.2)], omega).unwrap();
        let eq = Equation::new(4, omega, vec![p0, CoeffFn::constant(-1.0, omega), CoeffFn::zero(omega), CoeffFn::constant(0.3, omega)], None)
            .unwrap();
        let k = 2.0;
        let m = normalize(&eq, k).unwrap();
        let cfg = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
        let c = Complex64::new(0.3, 0.2);
        let z = integrate(&eq, c, 0.0, omega, &cfg, false).unwrap().final_state().unwrap();
        let w = integrate(&m, c / k.powf(0.25), 0.0, m.omega(), &cfg, false).unwrap().final_state().unwrap();
        assert!((w - z / k.powf(0.25)).norm() < 1e-10);
    }

    #[test]
    fn constant_leading() {
        let omega = 1.5;
        let two = CoeffFn::constant(2.0, omega);
        let eq = Equation::new(3, omega, vec![CoeffFn::zero(omega), two.clone(), CoeffFn::zero(omega)], Some(two)).unwrap();
        let r = reduce_leading(&eq).unwrap();
        assert_eq!(r.equation, Equation::constant(3, 3.0, &[0.0, 1.0, 0.0]).unwrap());
        assert_eq!(r.fit_residual, 0.0);
        assert!(!r.time_reversed);
    }

    #[test]
    fn negative_constant_leading_reverses_time() {
        let omega = 1.0;
        let p0 = CoeffFn::new(vec![0.0, 1.0], vec![], omega).unwrap();
        let eq = Equation::new(3, omega, vec![p0, CoeffFn::zero(omega), CoeffFn::zero(omega)], Some(CoeffFn::constant(-2.0, omega))).unwrap();
        let r = reduce_leading(&eq).unwrap();
        assert!(r.time_reversed);
        assert!((r.equation.omega() - 2.0).abs() < 1e-15);
        // P̃0(s) = P0(ω - s/2) / (-2) = -(1 - s/2)/2.
        for s in [0.0, 0.5, 2.0] {
            assert!((r.equation.coeff(0).eval(s) + (1.0 - s / 2.0) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn periodic_leading_horizon_and_fit() {
        let omega = 2.0 * PI;
        let lead = CoeffFn::new(vec![2.0], vec![Harmonic::new(1, 0.0, 0.5)], omega).unwrap();
        let p1 = CoeffFn::new(vec![-1.0], vec![Harmonic::new(1, 0.3, 0.0)], omega).unwrap();
        let eq = Equation::new(3, omega, vec![CoeffFn::constant(0.1, omega), p1, CoeffFn::zero(omega)], Some(lead)).unwrap();
        let r = reduce_leading(&eq).unwrap();
        assert!((r.equation.omega() - 4.0 * PI).abs() < 1e-12);
        assert!(r.fit_residual < 1e-8, "{}", r.fit_residual);
    }

    #[test]
    fn vanishing_leading_rejected() {
        let omega = 1.0;
        let lead = CoeffFn::new(vec![], vec![Harmonic::new(1, 1.0, 0.0)], omega).unwrap();
        let r = Equation::new(3, omega, vec![CoeffFn::zero(omega); 3], Some(lead));
        assert!(matches!(r, Err(Error::VanishingLeading { .. })));
    }
}
