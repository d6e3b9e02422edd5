//! Hypothesis checkers for the explicit counting theorems, the scaling and
//! leading-coefficient reductions, and phase-portrait constants.

pub mod geometry;
mod theorems;
mod transform;

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{grid, grid_half_step, CoeffFn};

pub use geometry::{geometry, Geometry};
pub use theorems::{
    best_k, check_aggregate, check_calanchi_ruf, check_theorem_1_1, check_theorem_1_2, check_theorem_1_3, default_k,
    ilyashenko_bound, ilyashenko_log_bound, IlyashenkoBound, Variant,
};
pub use transform::{normalize, reduce_leading, LeadingReduction, FIT_HARMONICS};

/// Named result whose hypotheses a report checks.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TheoremId {
    T1_1,
    T1_2,
    T1_3_i,
    T1_3_ii,
    T1_3_iii,
    CR,
    C4_1_i,
    C4_1_ii,
    C4_1_iii,
    C4_1_iv,
    Aggregate,
}

impl TheoremId {
    /// Parses the short labels used on the command line (`1.1`, `1.3ii`,
    /// `cr`, `4.1iv`, `aggregate`).
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "1.1" => Self::T1_1,
            "1.2" => Self::T1_2,
            "1.3i" => Self::T1_3_i,
            "1.3ii" => Self::T1_3_ii,
            "1.3iii" => Self::T1_3_iii,
            "cr" => Self::CR,
            "4.1i" => Self::C4_1_i,
            "4.1ii" => Self::C4_1_ii,
            "4.1iii" => Self::C4_1_iii,
            "4.1iv" => Self::C4_1_iv,
            "aggregate" => Self::Aggregate,
            _ => return None,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::T1_1 => "1.1",
            Self::T1_2 => "1.2",
            Self::T1_3_i => "1.3i",
            Self::T1_3_ii => "1.3ii",
            Self::T1_3_iii => "1.3iii",
            Self::CR => "cr",
            Self::C4_1_i => "4.1i",
            Self::C4_1_ii => "4.1ii",
            Self::C4_1_iii => "4.1iii",
            Self::C4_1_iv => "4.1iv",
            Self::Aggregate => "aggregate",
        }
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, Self::C4_1_i | Self::C4_1_ii | Self::C4_1_iii | Self::C4_1_iv)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One inequality of a hypothesis. `margin` is `rhs - lhs` for upper bounds
/// and `lhs - rhs` for lower bounds; it is a certified worst case over `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub strict: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    /// `lhs <= rhs` (or `<` when strict).
    AtMost,
    /// `lhs >= rhs` (or `>` when strict).
    AtLeast,
}

impl Condition {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, rel: Relation, strict: bool) -> Self {
        let margin = match rel {
            Relation::AtMost => rhs - lhs,
            Relation::AtLeast => lhs - rhs,
        };
        let pass = if strict { margin > 0.0 } else { margin >= 0.0 };
        Self { name: name.into(), lhs, rhs, margin, strict, pass: pass && margin.is_finite() }
    }
}

/// K maximizing the smallest margin, found by golden-section search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestK {
    pub k: f64,
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub theorem: TheoremId,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub conditions: Vec<Condition>,
    /// Conditions that only affect the strength of the prediction.
    pub auxiliary: Vec<Condition>,
    pub verdict: bool,
    pub predicted: Vec<String>,
    /// Exact number of complex periodic solutions claimed, when any.
    pub predicted_total: Option<u32>,
    /// Upper bound on the number of real periodic solutions claimed, when any.
    pub real_cap: Option<u32>,
    pub flags: Vec<String>,
    pub best_k: Option<BestK>,
}

impl BoundsReport {
    pub(crate) fn new(theorem: TheoremId, k: Option<f64>, conditions: Vec<Condition>) -> Self {
        let verdict = conditions.iter().all(|c| c.pass);
        Self {
            theorem,
            k,
            conditions,
            auxiliary: Vec::new(),
            verdict,
            predicted: Vec::new(),
            predicted_total: None,
            real_cap: None,
            flags: Vec::new(),
            best_k: None,
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.conditions.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table of the conditions.
    pub fn to_table(&self) -> String {
        let mut out = format!("theorem {}", self.theorem);
        if let Some(k) = self.k {
            out.push_str(&format!("  K = {k:.16e}"));
        }
        out.push('\n');
        out.push_str(&format!("{:<40} {:>24} {:>24} {:>24}  {}\n", "condition", "lhs", "rhs", "margin", "pass"));
        for c in self.conditions.iter().chain(self.auxiliary.iter()) {
            out.push_str(&format!(
                "{:<40} {:>24.16e} {:>24.16e} {:>24.16e}  {}\n",
                c.name,
                c.lhs,
                c.rhs,
                c.margin,
                if c.pass { "yes" } else { "no" }
            ));
        }
        out.push_str(&format!("verdict: {}\n", if self.verdict { "pass" } else { "fail" }));
        for p in &self.predicted {
            out.push_str(&format!("predicted: {p}\n"));
        }
        for f in &self.flags {
            out.push_str(&format!("flag: {f}\n"));
        }
        out
    }
}

/// Checks `lhs(t) ≤ rhs(t)` (or `≥`) on the shared 4096-point grid.
///
/// `side(values)` maps the coefficient values at one `t` to `(lhs, rhs)`;
/// `lipschitz` bounds the derivative of `rhs - lhs` in `t`, so the grid
/// minimum of the margin minus `lipschitz·h/2` is a certified lower bound.
/// `fallback` is an alternative `(lhs, rhs)` pair from sup/inf norms; the
/// pair with the larger certified margin is reported.
pub(crate) fn pointwise<F>(
    name: impl Into<String>,
    fns: &[&CoeffFn],
    omega: f64,
    side: F,
    lipschitz: f64,
    rel: Relation,
    strict: bool,
    fallback: Option<(f64, f64)>,
) -> Condition
where
    F: Fn(&[f64]) -> (f64, f64) + Sync,
{
    let constant = fns.iter().all(|f| f.as_constant().is_some());
    let ts: Vec<f64> = if constant { vec![0.0] } else { grid(omega).collect() };
    let (lhs, rhs, _) = ts
        .par_iter()
        .map(|&t| {
            let vals: Vec<f64> = fns.iter().map(|f| f.eval(t)).collect();
            let (l, r) = side(&vals);
            let m = match rel {
                Relation::AtMost => r - l,
                Relation::AtLeast => l - r,
            };
            (l, r, m)
        })
        .reduce(|| (f64::NAN, f64::NAN, f64::INFINITY), |a, b| if b.2 < a.2 || a.2.is_nan() { b } else { a });
    let slack = if constant { 0.0 } else { lipschitz * grid_half_step(omega) };
    // Fold the slack into the side that must be small.
    let (lhs, rhs) = match rel {
        Relation::AtMost => (lhs + slack, rhs),
        Relation::AtLeast => (lhs, rhs + slack),
    };
    let mut cond = Condition::new(name, lhs, rhs, rel, strict);
    if let Some((fl, fr)) = fallback {
        let alt = Condition::new(cond.name.clone(), fl, fr, rel, strict);
        if alt.margin > cond.margin {
            cond = alt;
        }
    }
    cond
}
