//! Counting and isolating zeros of the displacement map.
//!
//! Zeros are counted with the argument principle: the winding number of
//! `q` along a closed contour equals the number of periodic solutions inside,
//! with multiplicity. A contour that leaves the domain of `q` (some point on
//! it escapes before `ω`) carries no such information, so regions crossed by
//! escaping trajectories are subdivided, excluded, or reported as
//! indeterminate.

mod continuation;
mod isolate;
mod newton;
mod winding;

use num_complex::Complex64;
use serde::Serialize;

use crate::flow::IntegratorConfig;

pub use continuation::{continuation_count, ContinuationEntry, ContinuationReport, HomotopyFamily};
pub use isolate::{count_all, default_region, isolate_zeros};
pub use newton::{refine_zero, RefinedZero};
pub use winding::{winding_detail, winding_detail_dir, winding_number, WindingDetail};

/// Closed curve along which the winding of `q` is measured (counterclockwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Shape {
    Circle { center: Complex64, radius: f64 },
    Box { lo: Complex64, hi: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contour {
    pub shape: Shape,
    pub min_samples: usize,
}

pub const DEFAULT_MIN_SAMPLES: usize = 64;

impl Contour {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Self { shape: Shape::Circle { center, radius }, min_samples: DEFAULT_MIN_SAMPLES }
    }

    pub fn rect(lo: Complex64, hi: Complex64) -> Self {
        Self { shape: Shape::Box { lo, hi }, min_samples: DEFAULT_MIN_SAMPLES }
    }

    /// Square `[-h, h]²`.
    pub fn square(half_width: f64) -> Self {
        Self::rect(Complex64::new(-half_width, -half_width), Complex64::new(half_width, half_width))
    }

    pub fn with_min_samples(self, min_samples: usize) -> Self {
        Self { min_samples, ..self }
    }

    pub fn is_valid(&self) -> bool {
        match self.shape {
            Shape::Circle { radius, center } => radius > 0.0 && radius.is_finite() && center.norm().is_finite(),
            Shape::Box { lo, hi } => lo.re < hi.re && lo.im < hi.im && hi.norm().is_finite() && lo.norm().is_finite(),
        }
    }

    /// Point at curve parameter `s ∈ [0, 1)`.
    pub fn point(&self, s: f64) -> Complex64 {
        match self.shape {
            Shape::Circle { center, radius } => center + Complex64::from_polar(radius, std::f64::consts::TAU * s),
            Shape::Box { lo, hi } => {
                let w = hi.re - lo.re;
                let h = hi.im - lo.im;
                let per = 2.0 * (w + h);
                let d = s.rem_euclid(1.0) * per;
                if d < w {
                    Complex64::new(lo.re + d, lo.im)
                } else if d < w + h {
                    Complex64::new(hi.re, lo.im + (d - w))
                } else if d < 2.0 * w + h {
                    Complex64::new(hi.re - (d - w - h), hi.im)
                } else {
                    Complex64::new(lo.re, hi.im - (d - 2.0 * w - h))
                }
            }
        }
    }

    /// Largest modulus of a point on the curve.
    pub fn reach(&self) -> f64 {
        match self.shape {
            Shape::Circle { center, radius } => center.norm() + radius,
            Shape::Box { lo, hi } => [lo, hi, Complex64::new(lo.re, hi.im), Complex64::new(hi.re, lo.im)]
                .iter()
                .map(|p| p.norm())
                .fold(0.0, f64::max),
        }
    }

    pub fn contains(&self, c: Complex64) -> bool {
        match self.shape {
            Shape::Circle { center, radius } => (c - center).norm() < radius,
            Shape::Box { lo, hi } => c.re > lo.re && c.re < hi.re && c.im > lo.im && c.im < hi.im,
        }
    }
}

/// Settings shared by the counting operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountConfig {
    pub integrator: IntegratorConfig,
    /// Subdivision depth allowed for boxes whose boundary meets the escape set.
    pub max_depth: usize,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), max_depth: 12 }
    }
}

/// Loosest relative tolerance used when sampling `q` along contours, where
/// only its argument matters.
const SAMPLING_REL_TOL: f64 = 1e-8;

impl CountConfig {
    /// Integrator settings for contour and grid sampling.
    pub(crate) fn sampling(&self) -> IntegratorConfig {
        let mut c = self.integrator;
        c.rel_tol = c.rel_tol.max(SAMPLING_REL_TOL);
        c.abs_tol = c.abs_tol.max(1e-2 * SAMPLING_REL_TOL);
        c
    }
}

/// One periodic solution, identified by its initial value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicSolution {
    pub c: Complex64,
    pub multiplicity: u32,
    /// `|q(c)|`.
    pub residual: f64,
}

/// Axis-aligned region of the `c`-plane with a note on why it was set aside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub lo: Complex64,
    pub hi: Complex64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicSolutionSet {
    pub items: Vec<PeriodicSolution>,
    /// Sum of multiplicities.
    pub total: u32,
    /// True when every counted box had an escape-free, converged boundary and
    /// every escape-crossed box was excluded.
    pub certified: bool,
    /// Boxes crossed by the escape set and shown to contain no zero.
    pub excluded: Vec<Region>,
    /// Boxes that could be neither counted nor excluded.
    pub indeterminate: Vec<Region>,
}

impl PeriodicSolutionSet {
    pub(crate) fn from_parts(mut items: Vec<PeriodicSolution>, excluded: Vec<Region>, indeterminate: Vec<Region>) -> Self {
        items.sort_by(|a, b| a.c.re.total_cmp(&b.c.re).then(a.c.im.total_cmp(&b.c.im)));
        let total = items.iter().map(|i| i.multiplicity).sum();
        let certified = indeterminate.is_empty();
        Self { items, total, certified, excluded, indeterminate }
    }

    /// Largest distance from an item's conjugate to its nearest item.
    pub fn conjugate_pairing_distance(&self) -> f64 {
        self.items
            .iter()
            .map(|a| {
                self.items
                    .iter()
                    .filter(|b| b.multiplicity == a.multiplicity)
                    .map(|b| (a.c.conj() - b.c).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// CSV with header `c_re,c_im,multiplicity,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c_re,c_im,multiplicity,residual\n");
        for it in &self.items {
            out.push_str(&format!("{:.16e},{:.16e},{},{:.16e}\n", it.c.re, it.c.im, it.multiplicity, it.residual));
        }
        out
    }
}
