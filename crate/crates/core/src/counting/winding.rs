use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Contour, CountConfig};
use crate::coefficients::Equation;
use crate::displacement::{q_jet, Direction};
use crate::error::{Error, Result};

/// Segments shorter than this (in curve parameter) are treated as a jump.
const MIN_SEGMENT: f64 = 1.0 / (1u64 << 24) as f64;
/// Hard cap on the number of samples along one contour.
const MAX_SAMPLES: usize = 1 << 18;
/// `|q|` below this on the contour counts as a zero on it.
pub(crate) const ZERO_ON_CONTOUR: f64 = 1e-12;

/// Result of one winding computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingDetail {
    pub winding: i64,
    /// Smallest `|q|` seen on the contour.
    pub min_abs_q: f64,
    pub samples: usize,
}

#[derive(Clone, Copy)]
struct Sample {
    s: f64,
    c: Complex64,
    q: Complex64,
    dq: Complex64,
    /// Size of `|q|` differences attributable to integration error.
    noise: f64,
}

fn sample(eq: &Equation, contour: &Contour, s: f64, cfg: &CountConfig, dir: Direction) -> Result<Sample> {
    let c = contour.point(s);
    let tol = cfg.sampling();
    match q_jet(eq, c, &tol, dir) {
        Ok(Some(j)) => {
            let a = j.q.norm();
            if !a.is_finite() || !j.dq.norm().is_finite() {
                return Err(Error::EscapeOnContour);
            }
            if a < ZERO_ON_CONTOUR {
                return Err(Error::ZeroOnContour { abs_q: a });
            }
            let noise = 1e4 * (tol.abs_tol + tol.rel_tol * (1.0 + c.norm())) * (1.0 + j.dq.norm());
            Ok(Sample { s, c, q: j.q, dq: j.dq, noise })
        }
        Ok(None) | Err(Error::StepLimitExceeded { .. }) => Err(Error::EscapeOnContour),
        Err(e) => Err(e),
    }
}

/// The `min_samples` equally spaced samples, taken in an order that spreads
/// early samples around the curve and computed a thread-pool's worth at a
/// time, so that an escape is found before the remaining points are paid for.
fn initial_samples(eq: &Equation, contour: &Contour, cfg: &CountConfig, dir: Direction) -> Result<Vec<Sample>> {
    let m = contour.min_samples;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&j| (j as u64).reverse_bits());
    let chunk = rayon::current_num_threads().max(1);
    let mut out = Vec::with_capacity(m);
    for block in order.chunks(chunk) {
        let got: Vec<Sample> = block
            .par_iter()
            .map(|&j| sample(eq, contour, j as f64 / m as f64, cfg, dir))
            .collect::<Result<_>>()?;
        out.extend(got);
    }
    Ok(out)
}

/// A segment is trusted when `q` turns by less than `π/3` along it and the
/// trapezoid rule on `q'` reproduces the change in `q` to within its own
/// error scale `|Δc|·|Δq'|`. The second test catches jumps across thin
/// escape sets that no sample lands in.
fn trusted(a: &Sample, b: &Sample) -> bool {
    let dq = b.q - a.q;
    if dq.norm() > 0.5 * a.q.norm().min(b.q.norm()) {
        return false;
    }
    let step = b.c - a.c;
    let predicted = 0.5 * (a.dq + b.dq) * step;
    let slack = (0.01 * dq.norm() + 0.25 * step.norm() * (b.dq - a.dq).norm()).min(0.1 * dq.norm());
    (dq - predicted).norm() <= slack + a.noise.max(b.noise)
}

/// Winding number of `q` along `contour`, with diagnostics.
///
/// Samples are refined until consecutive values differ by at most half of
/// their modulus, so each step turns by less than `π/3`. Refinement that
/// cannot meet this before the segment collapses signals a discontinuity and
/// yields [`Error::EscapeOnContour`].
pub fn winding_detail(eq: &Equation, contour: &Contour, cfg: &CountConfig) -> Result<WindingDetail> {
    winding_detail_dir(eq, contour, cfg, Direction::Forward)
}

/// Winding along `contour` of the forward or backward displacement. Both
/// maps have the same zeros with the same multiplicities.
pub fn winding_detail_dir(eq: &Equation, contour: &Contour, cfg: &CountConfig, dir: Direction) -> Result<WindingDetail> {
    if !contour.is_valid() || contour.min_samples < 3 {
        return Err(Error::InvalidConfig("degenerate contour".into()));
    }
    let m = contour.min_samples;
    let mut pts = initial_samples(eq, contour, cfg, dir)?;
    pts.sort_by(|a, b| a.s.total_cmp(&b.s));
    debug_assert_eq!(pts.len(), m);
    // Close the curve with a copy of the first sample at s = 1.
    pts.push(Sample { s: 1.0, ..pts[0] });
    loop {
        let bad: Vec<usize> = (0..pts.len() - 1).filter(|&i| !trusted(&pts[i], &pts[i + 1])).collect();
        if bad.is_empty() {
            break;
        }
        if pts.len() + bad.len() > MAX_SAMPLES {
            return Err(Error::EscapeOnContour);
        }
        if bad.iter().any(|&i| pts[i + 1].s - pts[i].s < MIN_SEGMENT) {
            return Err(Error::EscapeOnContour);
        }
        let mids: Vec<Sample> = bad
            .par_iter()
            .map(|&i| sample(eq, contour, 0.5 * (pts[i].s + pts[i + 1].s), cfg, dir))
            .collect::<Result<_>>()?;
        let mut merged = Vec::with_capacity(pts.len() + mids.len());
        let mut k = 0;
        for (i, p) in pts.iter().enumerate() {
            merged.push(*p);
            if k < bad.len() && bad[k] == i {
                merged.push(mids[k]);
                k += 1;
            }
        }
        pts = merged;
    }
    let total: f64 = pts.windows(2).map(|w| (w[1].q / w[0].q).arg()).sum();
    let turns = total / TAU;
    let winding = turns.round();
    if (turns - winding).abs() > 1e-6 {
        return Err(Error::EscapeOnContour);
    }
    let min_abs_q = pts.iter().map(|p| p.q.norm()).fold(f64::INFINITY, f64::min);
    Ok(WindingDetail { winding: winding as i64, min_abs_q, samples: pts.len() - 1 })
}

/// Number of zeros of `q` enclosed by `contour`, counted with multiplicity.
pub fn winding_number(eq: &Equation, contour: &Contour, cfg: &CountConfig) -> Result<i64> {
    winding_detail(eq, contour, cfg).map(|d| d.winding)
}
