use num_complex::Complex64;
use rayon::prelude::*;

use super::newton::newton;
use super::winding::winding_detail_dir;
use super::{Contour, CountConfig, PeriodicSolution, PeriodicSolutionSet, Region, Shape};
use crate::bounds::geometry;
use crate::coefficients::Equation;
use crate::displacement::{q_jet, Direction};
use crate::error::{Error, Result};

/// Off-centre split fractions, tried in order when a cut lands on a zero.
const SPLITS: [f64; 3] = [0.5137, 0.4719, 0.5389];
/// Boxes narrower than this are not split further.
const MIN_DIAMETER: f64 = 1e-6;
/// Grid resolution of the exclusion test.
const EXCLUSION_GRID: usize = 5;
const EXCLUSION_LEVELS: usize = 2;
/// Initial samples on a child box boundary; refinement adds more as needed.
const CHILD_SAMPLES: usize = 16;
/// Imaginary parts below this are set to zero.
const REAL_SNAP: f64 = 1e-10;

/// `[-ρ, ρ]²`, which contains every periodic solution whose orbit is bounded
/// by the phase-portrait disk.
pub fn default_region(eq: &Equation) -> Result<Contour> {
    Ok(Contour::square(geometry(eq)?.rho))
}

/// Isolates all zeros of `q` in the default region.
pub fn count_all(eq: &Equation, cfg: &CountConfig) -> Result<PeriodicSolutionSet> {
    isolate_zeros(eq, &default_region(eq)?, cfg)
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    lo: Complex64,
    hi: Complex64,
}

impl Rect {
    fn contour(&self, min_samples: usize) -> Contour {
        Contour::rect(self.lo, self.hi).with_min_samples(min_samples)
    }

    fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    fn center(&self) -> Complex64 {
        0.5 * (self.lo + self.hi)
    }

    fn contains(&self, c: Complex64) -> bool {
        c.re >= self.lo.re && c.re <= self.hi.re && c.im >= self.lo.im && c.im <= self.hi.im
    }

    fn split(&self, f: f64) -> [Rect; 4] {
        let mx = self.lo.re + f * (self.hi.re - self.lo.re);
        let my = self.lo.im + (1.0 - f) * (self.hi.im - self.lo.im);
        let r = |x0: f64, y0: f64, x1: f64, y1: f64| Rect { lo: Complex64::new(x0, y0), hi: Complex64::new(x1, y1) };
        [
            r(self.lo.re, self.lo.im, mx, my),
            r(mx, self.lo.im, self.hi.re, my),
            r(self.lo.re, my, mx, self.hi.im),
            r(mx, my, self.hi.re, self.hi.im),
        ]
    }

    fn region(&self, reason: &str) -> Region {
        Region { lo: self.lo, hi: self.hi, reason: reason.into() }
    }
}

/// Winding of `q` on a box boundary, or why it is unavailable.
#[derive(Clone, Copy, Debug)]
enum BoxWinding {
    Known { winding: i64, min_abs_q: f64 },
    Escapes,
    ZeroOnBoundary,
}

/// Winding of a displacement map on the box boundary: the forward map, or
/// the backward one when forward solutions escape there. The direction
/// whose blow-up rays the box avoids is tried first.
fn box_winding(eq: &Equation, r: &Rect, cfg: &CountConfig, min_samples: usize) -> Result<BoxWinding> {
    for dir in direction_order(eq, r) {
        match winding_detail_dir(eq, &r.contour(min_samples), cfg, dir) {
            Ok(d) => return Ok(BoxWinding::Known { winding: d.winding, min_abs_q: d.min_abs_q }),
            Err(Error::EscapeOnContour) => continue,
            Err(Error::ZeroOnContour { .. }) => return Ok(BoxWinding::ZeroOnBoundary),
            Err(e) => return Err(e),
        }
    }
    Ok(BoxWinding::Escapes)
}

/// For a dominant `l(t) z^n`, forward solutions blow up along the rays where
/// `l c^{n-1}` is positive and backward ones where it is negative.
fn direction_order(eq: &Equation, r: &Rect) -> [Direction; 2] {
    let sign = eq.leading().map_or(1.0, |l| l.eval(0.0).signum());
    let m = (eq.n() - 1) as i32;
    let contour = r.contour(4);
    let k = 256;
    let (mut fwd, mut bwd) = (0, 0);
    let mut prev = sign * contour.point(0.0).powi(m);
    for j in 1..=k {
        let cur = sign * contour.point(j as f64 / k as f64).powi(m);
        if prev.im.signum() != cur.im.signum() {
            // The image crosses the real axis; the side it crosses on decides.
            let x = prev.re - prev.im * (cur.re - prev.re) / (cur.im - prev.im);
            if x > 0.0 {
                fwd += 1;
            } else {
                bwd += 1;
            }
        }
        prev = cur;
    }
    if fwd > 0 && bwd == 0 {
        [Direction::Backward, Direction::Forward]
    } else {
        [Direction::Forward, Direction::Backward]
    }
}

struct Task {
    rect: Rect,
    winding: BoxWinding,
    depth: usize,
}

enum Outcome {
    Items(Vec<PeriodicSolution>),
    Children(Vec<Task>),
    Excluded(Region),
    Indeterminate(Region),
    /// Children plus a region whose count was inconsistent with them.
    Mixed(Vec<Task>, Region),
}

/// `|q|` level at or below which integration error dominates near `c`.
fn noise_floor(cfg: &CountConfig, c: Complex64) -> f64 {
    1e4 * (cfg.integrator.abs_tol + cfg.integrator.rel_tol * (1.0 + c.norm()))
}

/// Splits `rect`, computing the children's windings and retrying other cut
/// positions when a cut passes through a zero.
fn subdivide(eq: &Equation, rect: &Rect, depth: usize, parent: Option<i64>, cfg: &CountConfig) -> Result<Outcome> {
    for f in SPLITS {
        let kids = rect.split(f);
        let ws: Vec<BoxWinding> = kids
            .par_iter()
            .map(|k| box_winding(eq, k, cfg, CHILD_SAMPLES))
            .collect::<Result<_>>()?;
        if ws.iter().any(|w| matches!(w, BoxWinding::ZeroOnBoundary)) {
            continue;
        }
        let tasks: Vec<Task> = kids
            .iter()
            .zip(ws.iter())
            .map(|(k, w)| Task { rect: *k, winding: *w, depth: depth + 1 })
            .collect();
        if let Some(pw) = parent {
            let known: Option<i64> = ws
                .iter()
                .map(|w| match w {
                    BoxWinding::Known { winding, .. } => Some(*winding),
                    _ => None,
                })
                .sum();
            if let Some(s) = known {
                if s != pw {
                    return Ok(Outcome::Mixed(tasks, rect.region("child windings disagree with parent")));
                }
            }
        }
        return Ok(Outcome::Children(tasks));
    }
    Ok(Outcome::Indeterminate(rect.region("zero on every cut")))
}

fn cluster(eq: &Equation, rect: &Rect, w: i64, cfg: &CountConfig) -> PeriodicSolution {
    let m = w as u32;
    let guess = rect.center();
    let keep = |c: Complex64| rect.contains(c);
    let c = match newton(eq, guess, m, &cfg.integrator, keep) {
        Ok(r) => r.c,
        Err(_) => guess,
    };
    // Zeros of a real equation come in conjugate pairs; a cluster whose box
    // also holds the mirror point is its own mirror image.
    let c = if c.im != 0.0 && rect.contains(c.conj()) { Complex64::new(c.re, 0.0) } else { c };
    let residual = crate::displacement::q(eq, c, &cfg.integrator)
        .ok()
        .and_then(|v| v.value())
        .map_or(f64::INFINITY, |v| v.norm());
    PeriodicSolution { c, multiplicity: m, residual }
}

fn process(eq: &Equation, task: Task, cfg: &CountConfig) -> Result<Outcome> {
    let rect = task.rect;
    match task.winding {
        BoxWinding::Known { winding, min_abs_q } => {
            if winding == 0 {
                return Ok(Outcome::Items(vec![]));
            }
            if winding < 0 {
                return Ok(Outcome::Indeterminate(rect.region("negative winding")));
            }
            let tiny = rect.diameter() < MIN_DIAMETER;
            if winding == 1 {
                let keep = |c: Complex64| rect.contains(c);
                if let Ok(r) = newton(eq, rect.center(), 1, &cfg.integrator, keep) {
                    if rect.contains(r.c) {
                        return Ok(Outcome::Items(vec![PeriodicSolution { c: r.c, multiplicity: 1, residual: r.residual }]));
                    }
                }
                if tiny {
                    return Ok(Outcome::Items(vec![cluster(eq, &rect, 1, cfg)]));
                }
                return subdivide(eq, &rect, task.depth, Some(winding), cfg);
            }
            if tiny || min_abs_q <= noise_floor(cfg, rect.center()) {
                return Ok(Outcome::Items(vec![cluster(eq, &rect, winding, cfg)]));
            }
            subdivide(eq, &rect, task.depth, Some(winding), cfg)
        }
        BoxWinding::ZeroOnBoundary => {
            // Only reachable for the root box: children are cut to avoid this.
            Ok(Outcome::Indeterminate(rect.region("zero on boundary")))
        }
        BoxWinding::Escapes => {
            if excluded(eq, &rect, cfg)? {
                return Ok(Outcome::Excluded(rect.region("escape set crosses box; no zero")));
            }
            if task.depth >= cfg.max_depth || rect.diameter() < MIN_DIAMETER {
                return Ok(Outcome::Indeterminate(rect.region("escape set crosses box")));
            }
            subdivide(eq, &rect, task.depth, None, cfg)
        }
    }
}

#[derive(Clone, Copy)]
enum Corner {
    Escaped,
    Value { c: Complex64, q: Complex64, dq: Complex64, dir: Direction },
}

/// Forward jet at `c`, or the backward one when the forward solution escapes.
fn corner(eq: &Equation, c: Complex64, cfg: &CountConfig) -> Result<Corner> {
    let tol = cfg.sampling();
    for dir in [Direction::Forward, Direction::Backward] {
        match q_jet(eq, c, &tol, dir) {
            Ok(Some(j)) if j.q.norm().is_finite() && j.dq.norm().is_finite() => {
                return Ok(Corner::Value { c, q: j.q, dq: j.dq, dir })
            }
            Ok(_) | Err(Error::StepLimitExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Corner::Escaped)
}

/// True when the tangent model at every corner reproduces `q` at the other
/// corners to within a quarter of its size and puts the Newton zero more
/// than two diagonals away.
fn linear_far(corners: &[Corner; 4], diag: f64) -> bool {
    let vals: Vec<(Complex64, Complex64, Complex64, Direction)> = corners
        .iter()
        .filter_map(|c| match c {
            Corner::Value { c, q, dq, dir } => Some((*c, *q, *dq, *dir)),
            Corner::Escaped => None,
        })
        .collect();
    if vals.len() < 4 || vals.iter().any(|v| v.3 != vals[0].3) {
        return false;
    }
    vals.iter().all(|&(ci, qi, di, _)| {
        let far = qi.norm() > 2.0 * diag * di.norm();
        far && vals.iter().all(|&(cj, qj, _, _)| (qj - qi - di * (cj - ci)).norm() <= 0.25 * qj.norm())
    })
}

/// Cell test of the exclusion heuristic: a cell is cleared when `q` is
/// close to linear on it with no zero nearby, or, at the finest level, when
/// escapes dominate and the remaining corners have large `|q|`.
fn cell_clear(corners: [Corner; 4], diag: f64, finest: bool) -> bool {
    if linear_far(&corners, diag) {
        return true;
    }
    if !finest {
        return false;
    }
    let any_escape = corners.iter().any(|c| matches!(c, Corner::Escaped));
    any_escape
        && corners.iter().all(|c| match c {
            Corner::Escaped => true,
            Corner::Value { c, q, .. } => q.norm() >= 1.0 + c.norm(),
        })
}

fn grid_corners(eq: &Equation, lo: Complex64, hi: Complex64, g: usize, cfg: &CountConfig) -> Result<Vec<Corner>> {
    let pts: Vec<Complex64> = (0..g * g)
        .map(|k| {
            let (i, j) = (k % g, k / g);
            let x = lo.re + (hi.re - lo.re) * i as f64 / (g - 1) as f64;
            let y = lo.im + (hi.im - lo.im) * j as f64 / (g - 1) as f64;
            Complex64::new(x, y)
        })
        .collect();
    pts.par_iter().map(|&c| corner(eq, c, cfg)).collect()
}

fn cells_clear(eq: &Equation, lo: Complex64, hi: Complex64, g: usize, level: usize, cfg: &CountConfig) -> Result<bool> {
    let cs = grid_corners(eq, lo, hi, g, cfg)?;
    let dx = (hi.re - lo.re) / (g - 1) as f64;
    let dy = (hi.im - lo.im) / (g - 1) as f64;
    let diag = dx.hypot(dy);
    let finest = level == EXCLUSION_LEVELS;
    for j in 0..g - 1 {
        for i in 0..g - 1 {
            let quad = [cs[j * g + i], cs[j * g + i + 1], cs[(j + 1) * g + i], cs[(j + 1) * g + i + 1]];
            if cell_clear(quad, diag, finest) {
                continue;
            }
            if finest {
                return Ok(false);
            }
            let clo = Complex64::new(lo.re + i as f64 * dx, lo.im + j as f64 * dy);
            let chi = clo + Complex64::new(dx, dy);
            if !cells_clear(eq, clo, chi, 3, level + 1, cfg)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Heuristic test that an escape-crossed box holds no zero.
fn excluded(eq: &Equation, rect: &Rect, cfg: &CountConfig) -> Result<bool> {
    cells_clear(eq, rect.lo, rect.hi, EXCLUSION_GRID, 0, cfg)
}

fn root_rect(region: &Contour) -> Rect {
    match region.shape {
        Shape::Box { lo, hi } => Rect { lo, hi },
        Shape::Circle { center, radius } => Rect {
            lo: center - Complex64::new(radius, radius),
            hi: center + Complex64::new(radius, radius),
        },
    }
}

fn snap_real(eq: &Equation, mut s: PeriodicSolution, cfg: &CountConfig) -> PeriodicSolution {
    if s.c.im != 0.0 && s.c.im.abs() < REAL_SNAP {
        let c = Complex64::new(s.c.re, 0.0);
        if let Ok(Some(v)) = crate::displacement::q(eq, c, &cfg.integrator).map(|v| v.value()) {
            if v.norm() <= 10.0 * s.residual.max(1e-14) {
                s.c = c;
                s.residual = v.norm();
            }
        }
    }
    s
}

/// Finds all zeros of `q` in `region` by recursive subdivision.
///
/// Boxes with an escape-free boundary are counted by winding number. Those
/// crossed by escaping trajectories are excluded by a grid test, subdivided
/// up to `cfg.max_depth`, or reported as indeterminate. For a circular
/// region its bounding box is searched and zeros outside the circle dropped.
pub fn isolate_zeros(eq: &Equation, region: &Contour, cfg: &CountConfig) -> Result<PeriodicSolutionSet> {
    if !region.is_valid() {
        return Err(Error::InvalidConfig("degenerate region".into()));
    }
    cfg.integrator.validate()?;
    let mut root = root_rect(region);
    let mut w = box_winding(eq, &root, cfg, region.min_samples.max(64))?;
    // Nudge the root outward if its boundary passes through a zero.
    let mut grow = 1e-3;
    for _ in 0..3 {
        if !matches!(w, BoxWinding::ZeroOnBoundary) {
            break;
        }
        let pad = grow * root.diameter();
        root = Rect { lo: root.lo - Complex64::new(pad, pad * 0.7), hi: root.hi + Complex64::new(pad * 1.3, pad) };
        w = box_winding(eq, &root, cfg, region.min_samples.max(64))?;
        grow *= 3.0;
    }
    let mut items = Vec::new();
    let mut excluded_regions = Vec::new();
    let mut indeterminate = Vec::new();
    let mut level = vec![Task { rect: root, winding: w, depth: 0 }];
    while !level.is_empty() {
        let outcomes: Vec<Outcome> = level
            .into_par_iter()
            .map(|t| process(eq, t, cfg))
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for o in outcomes {
            match o {
                Outcome::Items(v) => items.extend(v),
                Outcome::Children(ts) => next.extend(ts),
                Outcome::Excluded(r) => excluded_regions.push(r),
                Outcome::Indeterminate(r) => indeterminate.push(r),
                Outcome::Mixed(ts, r) => {
                    next.extend(ts);
                    indeterminate.push(r);
                }
            }
        }
        level = next;
    }
    let mut items: Vec<PeriodicSolution> = items.into_iter().map(|s| snap_real(eq, s, cfg)).collect();
    if let Shape::Circle { .. } = region.shape {
        items.retain(|s| region.contains(s.c));
    }
    Ok(PeriodicSolutionSet::from_parts(items, excluded_regions, indeterminate))
}
