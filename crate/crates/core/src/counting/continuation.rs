use serde::Serialize;

use super::winding::winding_detail;
use super::{isolate_zeros, Contour, CountConfig, Shape};
use crate::coefficients::Equation;
use crate::error::{Error, Result};

/// Linear homotopy that scales a subset of the coefficients by `λ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyFamily {
    base: Equation,
    scaled: Vec<usize>,
}

impl HomotopyFamily {
    pub fn new(base: Equation, scaled: Vec<usize>) -> Result<Self> {
        if let Some(&i) = scaled.iter().find(|&&i| i >= base.n()) {
            return Err(Error::InvalidEquation(format!("cannot scale coefficient {i} of a degree-{} equation", base.n())));
        }
        Ok(Self { base, scaled })
    }

    /// Scales `P_0` and `P_2, ..., P_{n-1}`, keeping `P_1` and `P_n`.
    pub fn theorem_1_1(base: Equation) -> Result<Self> {
        let n = base.n();
        let scaled = std::iter::once(0).chain(2..n).collect();
        Self::new(base, scaled)
    }

    /// Scales `P_0` and `P_2, ..., P_{n-3}`, keeping `P_1`, `P_{n-2}`,
    /// `P_{n-1}` and `P_n`.
    pub fn theorem_1_2(base: Equation) -> Result<Self> {
        let n = base.n();
        let scaled = std::iter::once(0).chain(2..n.saturating_sub(2)).collect();
        Self::new(base, scaled)
    }

    pub fn base(&self) -> &Equation {
        &self.base
    }

    pub fn scaled_indices(&self) -> &[usize] {
        &self.scaled
    }

    pub fn at(&self, lambda: f64) -> Result<Equation> {
        let coeffs = self
            .base
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, p)| if self.scaled.contains(&i) { p.scaled(lambda) } else { p.clone() })
            .collect();
        self.base.with_coeffs(coeffs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuationEntry {
    pub lambda: f64,
    /// Number of zeros in the region, with multiplicity, when it could be
    /// determined.
    pub count: Option<u32>,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationReport {
    pub entries: Vec<ContinuationEntry>,
    /// True when every entry is certified and all counts agree.
    pub constant: bool,
}

fn count_in(eq: &Equation, region: &Contour, cfg: &CountConfig) -> Result<(Option<u32>, bool)> {
    match region.shape {
        Shape::Circle { .. } => match winding_detail(eq, region, cfg) {
            Ok(d) if d.winding >= 0 => Ok((Some(d.winding as u32), true)),
            Ok(_) | Err(Error::EscapeOnContour) | Err(Error::ZeroOnContour { .. }) => Ok((None, false)),
            Err(e) => Err(e),
        },
        Shape::Box { .. } => {
            let set = isolate_zeros(eq, region, cfg)?;
            Ok((Some(set.total), set.certified))
        }
    }
}

/// Counts zeros in `region` at `λ = i/steps`, `i = 0..=steps`.
pub fn continuation_count<F>(family: F, steps: usize, region: &Contour, cfg: &CountConfig) -> Result<ContinuationReport>
where
    F: Fn(f64) -> Result<Equation>,
{
    let lambdas: Vec<f64> = if steps == 0 { vec![0.0] } else { (0..=steps).map(|i| i as f64 / steps as f64).collect() };
    let mut entries = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let eq = family(lambda)?;
        let (count, certified) = count_in(&eq, region, cfg)?;
        entries.push(ContinuationEntry { lambda, count, certified });
    }
    let first = entries[0].count;
    let constant = entries.iter().all(|e| e.certified && e.count.is_some() && e.count == first);
    Ok(ContinuationReport { entries, constant })
}
