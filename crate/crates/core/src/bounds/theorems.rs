use std::f64::consts::PI;

use serde::Serialize;

use super::transform::reduce_leading;
use super::{pointwise, BestK, BoundsReport, Condition, Relation, TheoremId};
use crate::coefficients::{certified_abs_min, CoeffFn, Equation};
use crate::error::{Error, Result};

/// Sub-case of a theorem or corollary with several parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    I,
    II,
    III,
    IV,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "i" => Self::I,
            "ii" => Self::II,
            "iii" => Self::III,
            "iv" => Self::IV,
            _ => return None,
        })
    }
}

/// `K = 2·max|P₀| + 1`.
pub fn default_k(eq: &Equation) -> f64 {
    2.0 * eq.coeff(0).certified_sup() + 1.0
}

/// Monic form of `eq`, reducing a non-unit leading coefficient first.
fn monic(eq: &Equation) -> Result<(Equation, Vec<String>)> {
    match eq.leading() {
        None => Ok((eq.clone(), vec![])),
        Some(l) if l.as_constant() == Some(1.0) => Ok((eq.clone(), vec![])),
        Some(_) => {
            let red = reduce_leading(eq)?;
            let mut flags = vec!["checked after reducing the leading coefficient to 1".to_string()];
            if red.fit_residual > 0.0 {
                flags.push(format!("coefficient refit residual {:.3e}", red.fit_residual));
            }
            Ok((red.equation, flags))
        }
    }
}

fn check_k(eq: &Equation, k: f64) -> Result<()> {
    let p0 = eq.coeff(0).certified_sup();
    if !(k > p0) || !k.is_finite() {
        return Err(Error::BadK { k, p0_max: p0 });
    }
    Ok(())
}

fn sin_factor(n: usize) -> f64 {
    if n == 3 {
        0.0
    } else {
        (PI / (n - 2) as f64).sin()
    }
}

/// `|P_i(t)| ≤ (K - |P_0(t)|) s / (d K^{i/n})`.
fn middle_1_1(eq: &Equation, k: f64, i: usize, d: f64, s: f64) -> Condition {
    let n = eq.n() as f64;
    let (p0, pi) = (eq.coeff(0), eq.coeff(i));
    let scale = s / (d * k.powf(i as f64 / n));
    let lip = pi.lipschitz_bound() + scale * p0.lipschitz_bound();
    let fallback = (pi.certified_sup(), (k - p0.certified_sup()) * scale);
    pointwise(
        format!("|P{i}| middle bound"),
        &[p0, pi],
        eq.omega(),
        |v| (v[1].abs(), (k - v[0].abs()) * scale),
        lip,
        Relation::AtMost,
        false,
        Some(fallback),
    )
}

/// `|P_1(t)| ≥ (K + |P_0| + |P_{n-1}| + (K - |P_0|) s) / K^{1/n}`.
fn p1_1_1(eq: &Equation, k: f64, s: f64) -> Condition {
    let n = eq.n();
    let root = k.powf(1.0 / n as f64);
    let (p0, p1, top) = (eq.coeff(0), eq.coeff(1), eq.coeff(n - 1));
    let lip = p1.lipschitz_bound() + ((1.0 + s) * p0.lipschitz_bound() + top.lipschitz_bound()) / root;
    let rhs_sup = (k + p0.certified_sup() * (1.0 - s) + top.certified_sup() + k * s) / root;
    pointwise(
        "|P1| lower bound",
        &[p0, p1, top],
        eq.omega(),
        |v| (v[1].abs(), (k + v[0].abs() + v[2].abs() + (k - v[0].abs()) * s) / root),
        lip,
        Relation::AtLeast,
        false,
        Some((certified_abs_min(p1), rhs_sup)),
    )
}

pub fn check_theorem_1_1(eq: &Equation, k: f64) -> Result<BoundsReport> {
    let (eq, flags) = monic(eq)?;
    let n = eq.n();
    if n < 3 {
        return Err(Error::UnsupportedDegree { what: "theorem 1.1".into(), n });
    }
    check_k(&eq, k)?;
    let s = sin_factor(n);
    let mut conditions: Vec<Condition> = (2..n - 1).map(|i| middle_1_1(&eq, k, i, (n - 3) as f64, s)).collect();
    conditions.push(p1_1_1(&eq, k, s));
    let mut report = BoundsReport::new(TheoremId::T1_1, Some(k), conditions);
    report.flags = flags;
    if n == 3 {
        report.flags.push("degenerate degree 3: no middle coefficients and sin(pi/(n-2)) = 0".into());
    } else {
        let mut aux = middle_1_1(&eq, k, n - 1, (n - 3) as f64, s);
        aux.name = format!("|P{}| middle bound (real-solution claims)", n - 1);
        report.auxiliary.push(aux);
    }
    report.predicted.push(format!("{n} complex periodic solutions"));
    report.predicted_total = Some(n as u32);
    if report.auxiliary.first().is_some_and(|c| c.pass) {
        report.predicted.push("at most two positive and at most two negative real periodic solutions".into());
        report.real_cap = Some(4);
        if n % 2 == 1 {
            report.predicted.push("at least one and at most three real periodic solutions".into());
            report.real_cap = Some(3);
        }
    }
    Ok(report)
}

pub fn check_theorem_1_2(eq: &Equation, k: f64) -> Result<BoundsReport> {
    let (eq, flags) = monic(eq)?;
    let n = eq.n();
    if n < 5 {
        return Err(Error::UnsupportedDegree { what: "theorem 1.2".into(), n });
    }
    check_k(&eq, k)?;
    let nf = n as f64;
    let s = sin_factor(n);
    let kq = k.powf((nf - 2.0) / nf);
    let (p0, p1, pm) = (eq.coeff(0), eq.coeff(1), eq.coeff(n - 2));
    let mut conditions = vec![Condition::new(format!("P{} <= 0", n - 2), pm.certified_max(), 0.0, Relation::AtMost, false)];
    for i in (2..n).filter(|&i| i != n - 2) {
        let pi = eq.coeff(i);
        let scale = s / ((nf - 4.0) * k.powf(i as f64 / nf));
        let lip = pi.lipschitz_bound() + scale * (p0.lipschitz_bound() + kq * pm.lipschitz_bound());
        let fallback = (pi.certified_sup(), (k - kq * pm.certified_max() - p0.certified_sup()) * scale);
        conditions.push(pointwise(
            format!("|P{i}| middle bound"),
            &[p0, pm, pi],
            eq.omega(),
            |v| (v[2].abs(), (k - kq * v[1] - v[0].abs()) * scale),
            lip,
            Relation::AtMost,
            false,
            Some(fallback),
        ));
    }
    let r = (nf - 3.0) / (nf - 4.0) * s;
    let root = k.powf(1.0 / nf);
    let c0 = 1.0 - r;
    let lip = p1.lipschitz_bound() + (c0.abs() * p0.lipschitz_bound() + (1.0 + r) * kq * pm.lipschitz_bound()) / root;
    let p0_worst = if c0 >= 0.0 { p0.certified_sup() } else { certified_abs_min(p0).max(0.0) };
    let rhs_sup = (k * (1.0 + r) + c0 * p0_worst - (1.0 + r) * kq * pm.certified_min()) / root;
    conditions.push(pointwise(
        "|P1| lower bound",
        &[p0, pm, p1],
        eq.omega(),
        |v| {
            let rest = k - kq * v[1] - v[0].abs();
            (v[2].abs(), (k + v[0].abs() - kq * v[1] + r * rest) / root)
        },
        lip,
        Relation::AtLeast,
        false,
        Some((certified_abs_min(p1), rhs_sup)),
    ));
    let mut report = BoundsReport::new(TheoremId::T1_2, Some(k), conditions);
    report.flags = flags;
    report.predicted.push(format!("exactly {n} complex periodic solutions"));
    report.predicted_total = Some(n as u32);
    Ok(report)
}

fn small(name: String, f: &CoeffFn, cap: f64) -> Condition {
    Condition::new(name, f.certified_sup(), cap, Relation::AtMost, true)
}

fn large(name: String, f: &CoeffFn, floor: f64) -> Condition {
    Condition::new(name, certified_abs_min(f), floor, Relation::AtLeast, true)
}

pub fn check_theorem_1_3(eq: &Equation, variant: Variant) -> Result<BoundsReport> {
    let (eq, flags) = monic(eq)?;
    let n = eq.n();
    let nf = n as f64;
    let (id, first_small, cap, big, floor, min_n, cap_count, claim) = match variant {
        Variant::I => (
            TheoremId::T1_3_i,
            1,
            nf / ((nf - 1.0) * (nf - 1.0)),
            0,
            (2.0 * nf - 1.0) / (nf - 1.0),
            2,
            2,
            "at most one positive and at most one negative real periodic solution",
        ),
        Variant::II => (
            TheoremId::T1_3_ii,
            2,
            nf / ((nf - 2.0) * (nf - 2.0)),
            1,
            nf * (2.0 * nf - 3.0) / (nf - 2.0),
            3,
            5,
            "at most five real periodic solutions, at most three positive and at most three negative",
        ),
        Variant::III => (
            TheoremId::T1_3_iii,
            3,
            nf / ((nf - 3.0) * (nf - 3.0)),
            2,
            nf * (nf - 1.0) * (2.0 * nf - 5.0) / (2.0 * (nf - 3.0)),
            4,
            8,
            "at most eight real periodic solutions, at most five positive and at most five negative",
        ),
        Variant::IV => return Err(Error::InvalidConfig("theorem 1.3 has variants i, ii and iii".into())),
    };
    if n < min_n {
        return Err(Error::UnsupportedDegree { what: format!("theorem {}", id.label()), n });
    }
    let mut conditions: Vec<Condition> = (first_small..n)
        .map(|i| small(format!("|P{i}| < {cap:.6}"), eq.coeff(i), cap))
        .collect();
    conditions.push(large(format!("|P{big}| > {floor:.6}"), eq.coeff(big), floor));
    let mut report = BoundsReport::new(id, None, conditions);
    report.flags = flags;
    report.predicted.push(claim.into());
    report.real_cap = Some(cap_count);
    Ok(report)
}

pub fn check_calanchi_ruf(eq: &Equation) -> Result<BoundsReport> {
    let (eq, flags) = monic(eq)?;
    let n = eq.n();
    let nf = n as f64;
    let cap = 1.0 / (2.0 * nf * (nf - 1.0));
    let mut conditions = vec![Condition::new("n odd", (n % 2) as f64, 1.0, Relation::AtLeast, false)];
    conditions.extend((1..n).map(|i| {
        let f = eq.coeff(i);
        Condition::new(format!("|P{i}| <= 1/(2n(n-1))"), f.certified_sup(), cap, Relation::AtMost, false)
    }));
    let mut report = BoundsReport::new(TheoremId::CR, None, conditions);
    report.flags = flags;
    report.predicted.push(format!("at most {n} real periodic solutions"));
    report.real_cap = Some(n as u32);
    Ok(report)
}

/// Middle conditions of theorem 1.1 replaced by the single weighted sum
/// `Σ_{i=2}^{n-2} |P_i(t)| K^{i/n} ≤ (K - |P_0(t)|) sin(π/(n-2))`. The
/// per-coefficient conditions imply this one.
pub fn check_aggregate(eq: &Equation, theorem: TheoremId, k: f64) -> Result<BoundsReport> {
    if theorem != TheoremId::T1_1 {
        return Err(Error::InvalidConfig(format!("aggregate form is available for theorem 1.1, not {theorem}")));
    }
    let (eq, flags) = monic(eq)?;
    let n = eq.n();
    if n < 3 {
        return Err(Error::UnsupportedDegree { what: "theorem 1.1".into(), n });
    }
    check_k(&eq, k)?;
    let nf = n as f64;
    let s = sin_factor(n);
    let mids: Vec<usize> = (2..n - 1).collect();
    let weights: Vec<f64> = mids.iter().map(|&i| k.powf(i as f64 / nf)).collect();
    let mut fns: Vec<&CoeffFn> = vec![eq.coeff(0)];
    fns.extend(mids.iter().map(|&i| eq.coeff(i)));
    let lip = s * eq.coeff(0).lipschitz_bound()
        + mids.iter().zip(&weights).map(|(&i, w)| w * eq.coeff(i).lipschitz_bound()).sum::<f64>();
    let fallback = (
        mids.iter().zip(&weights).map(|(&i, w)| w * eq.coeff(i).certified_sup()).sum::<f64>(),
        (k - eq.coeff(0).certified_sup()) * s,
    );
    let w2 = weights.clone();
    let sum = pointwise(
        "weighted middle sum",
        &fns,
        eq.omega(),
        move |v| (v[1..].iter().zip(&w2).map(|(x, w)| x.abs() * w).sum(), (k - v[0].abs()) * s),
        lip,
        Relation::AtMost,
        false,
        Some(fallback),
    );
    let conditions = vec![sum, p1_1_1(&eq, k, s)];
    let mut report = BoundsReport::new(TheoremId::Aggregate, Some(k), conditions);
    report.flags = flags;
    report.flags.push("aggregate form of theorem 1.1".into());
    report.predicted.push(format!("{n} complex periodic solutions"));
    report.predicted_total = Some(n as u32);
    Ok(report)
}

/// Golden-section search for the `K` in `(max|P₀|, 10·max|P₀| + 10]` that
/// maximizes the smallest margin. `None` for theorems without a `K`.
pub fn best_k(eq: &Equation, theorem: TheoremId) -> Result<Option<BestK>> {
    let check = |k: f64| -> Result<f64> {
        let r = match theorem {
            TheoremId::T1_1 => check_theorem_1_1(eq, k)?,
            TheoremId::T1_2 => check_theorem_1_2(eq, k)?,
            TheoremId::Aggregate => check_aggregate(eq, TheoremId::T1_1, k)?,
            _ => return Ok(f64::NAN),
        };
        Ok(r.min_margin())
    };
    if !matches!(theorem, TheoremId::T1_1 | TheoremId::T1_2 | TheoremId::Aggregate) {
        return Ok(None);
    }
    let p0 = eq.coeff(0).certified_sup();
    let (a, b) = (p0, 10.0 * p0 + 10.0);
    let scan = 48;
    let ks: Vec<f64> = (1..=scan).map(|j| a + (b - a) * j as f64 / scan as f64).collect();
    let mut vals = Vec::with_capacity(scan);
    for &k in &ks {
        vals.push(check(k)?);
    }
    let best = (0..scan).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("nonempty scan");
    let step = (b - a) / scan as f64;
    let (mut lo, mut hi) = ((ks[best] - step).max(a + 1e-12 * (1.0 + a)), (ks[best] + step).min(b));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (check(x1)?, check(x2)?);
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = check(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = check(x1)?;
        }
    }
    let (k, m) = [(ks[best], vals[best]), (x1, f1), (x2, f2)]
        .into_iter()
        .max_by(|p, q| p.1.total_cmp(&q.1))
        .expect("candidates");
    Ok(Some(BestK { k, min_margin: m }))
}

/// `ln` of `8 exp[(3C+2) exp(1.5 (2C+3)^n)]` with overflow reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IlyashenkoBound {
    pub c: f64,
    pub n: u32,
    /// `1.5 (2C+3)^n`.
    pub inner_exponent: f64,
    /// `ln 8 + (3C+2) e^{inner}`; `+inf` on overflow.
    pub log_bound: f64,
    pub overflow: bool,
    /// `ln(log_bound)`, finite whenever `inner_exponent` is.
    pub log_log_bound: f64,
}

pub fn ilyashenko_bound(c: f64, n: u32) -> Result<IlyashenkoBound> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::BadC(c));
    }
    let inner = 1.5 * (2.0 * c + 3.0).powi(n as i32);
    let lead = 3.0 * c + 2.0;
    let log_bound = 8f64.ln() + lead * inner.exp();
    let overflow = !log_bound.is_finite();
    let log_log_bound = if overflow { inner + lead.ln() } else { log_bound.ln() };
    Ok(IlyashenkoBound { c, n, inner_exponent: inner, log_bound, overflow, log_log_bound })
}

pub fn ilyashenko_log_bound(c: f64, n: u32) -> Result<f64> {
    ilyashenko_bound(c, n).map(|b| b.log_bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quintic(p2: f64) -> Equation {
        Equation::constant(5, 1.0, &[0.5, -2.0, p2, 0.2, 0.0]).unwrap()
    }

    #[test]
    fn theorem_1_1_passing_quintic() {
        let r = check_theorem_1_1(&quintic(0.2), 1.0).unwrap();
        assert!(r.verdict, "{}", r.to_table());
        let cap = 0.25 * (PI / 3.0).sin();
        assert!((r.conditions[0].rhs - cap).abs() < 1e-15);
        let p1 = r.conditions.last().unwrap();
        assert!((p1.rhs - (1.5 + 0.5 * (PI / 3.0).sin())).abs() < 1e-14);
        assert_eq!(r.predicted_total, Some(5));
    }

    #[test]
    fn theorem_1_1_failing_middle() {
        let r = check_theorem_1_1(&quintic(0.3), 1.0).unwrap();
        assert!(!r.verdict);
        let c = &r.conditions[0];
        assert!(!c.pass);
        assert!((c.margin - (0.25 * (PI / 3.0).sin() - 0.3)).abs() < 1e-15);
        assert!((c.margin + 0.0835).abs() < 1e-4);
    }

    #[test]
    fn theorem_1_1_constructed_threshold() {
        for n in [4usize, 5, 7] {
            let k = 1.0;
            let p0 = 0.3;
            let s = (PI / (n - 2) as f64).sin();
            let mut c = vec![0.0; n];
            c[0] = p0;
            c[1] = -((k + p0 + (k - p0) * s) / k.powf(1.0 / n as f64) + 1.0);
            let r = check_theorem_1_1(&Equation::constant(n, 1.0, &c).unwrap(), k).unwrap();
            assert!(r.verdict);
        }
    }

    #[test]
    fn bad_k_and_degenerate_cubic() {
        let eq = Equation::constant(4, 1.0, &[2.0, -10.0, 0.0, 0.0]).unwrap();
        assert!(matches!(check_theorem_1_1(&eq, 1.5), Err(Error::BadK { .. })));
        let cubic = Equation::constant(3, 1.0, &[0.1, -5.0, 0.1]).unwrap();
        let r = check_theorem_1_1(&cubic, 1.0).unwrap();
        assert_eq!(r.conditions.len(), 1);
        assert!(r.flags.iter().any(|f| f.contains("degenerate")));
    }

    #[test]
    fn pointwise_check_beats_sup_norms() {
        // |P2(t)| is large only where |P0(t)| is small.
        let omega = 1.0;
        let h = |a: f64, b: f64| CoeffFn::new(vec![a], vec![crate::coefficients::Harmonic::new(1, b, 0.0)], omega).unwrap();
        let p0 = h(0.0, 0.5);
        let p2 = CoeffFn::new(vec![], vec![crate::coefficients::Harmonic::new(1, 0.0, 0.7)], omega).unwrap();
        let eq = Equation::new(4, omega, vec![p0, CoeffFn::constant(-5.0, omega), p2, CoeffFn::zero(omega)], None).unwrap();
        let r = check_theorem_1_1(&eq, 1.0).unwrap();
        assert!(r.verdict, "{}", r.to_table());
    }

    #[test]
    fn theorem_1_2_examples() {
        let n = 6;
        let s = (PI / 4.0).sin();
        let (k, p0, p4) = (1.0, 0.2, -1.0);
        let rest = k - p4 - p0;
        let p1 = -((k + p0 - p4 + 1.5 * rest * s) + 1.0);
        let eq = Equation::constant(n, 1.0, &[p0, p1, 0.0, 0.0, p4, 0.0]).unwrap();
        let r = check_theorem_1_2(&eq, k).unwrap();
        assert!(r.verdict, "{}", r.to_table());

        let eq = Equation::constant(n, 1.0, &[p0, p1, 0.0, 0.0, 0.1, 0.0]).unwrap();
        let r = check_theorem_1_2(&eq, k).unwrap();
        assert!(!r.conditions[0].pass);

        let cap3 = rest / 2.0 * s;
        let eq = Equation::constant(n, 1.0, &[p0, p1, 0.0, cap3 + 0.01, p4, 0.0]).unwrap();
        let r = check_theorem_1_2(&eq, k).unwrap();
        let c3 = r.conditions.iter().find(|c| c.name.starts_with("|P3|")).unwrap();
        assert!(c3.margin < 0.0 && (c3.margin + 0.01).abs() < 1e-12);

        assert!(matches!(check_theorem_1_2(&Equation::monomial(4, 1.0).unwrap(), 1.0), Err(Error::UnsupportedDegree { .. })));
    }

    #[test]
    fn theorem_1_3_examples() {
        let eq = Equation::constant(4, 1.0, &[3.0, 0.2, -0.2, 0.2]).unwrap();
        let r = check_theorem_1_3(&eq, Variant::I).unwrap();
        assert!(r.verdict);
        assert_eq!(r.real_cap, Some(2));

        let eq = Equation::constant(5, 1.0, &[0.0, 20.0, 0.6, 0.6, 0.6]).unwrap();
        let r = check_theorem_1_3(&eq, Variant::II).unwrap();
        assert!(!r.verdict);
        assert!((r.conditions[0].margin - (5.0 / 9.0 - 0.6)).abs() < 1e-15);
        assert!((r.conditions[0].margin + 0.044).abs() < 1e-3);

        let eq = Equation::constant(6, 1.0, &[9.0, -9.0, 40.0, 0.6, -0.6, 0.5]).unwrap();
        let r = check_theorem_1_3(&eq, Variant::III).unwrap();
        assert!(r.verdict);
        assert!((r.conditions.last().unwrap().rhs - 35.0).abs() < 1e-12);
        assert_eq!(r.real_cap, Some(8));

        assert!(matches!(check_theorem_1_3(&Equation::monomial(3, 1.0).unwrap(), Variant::III), Err(Error::UnsupportedDegree { .. })));
    }

    #[test]
    fn calanchi_ruf_examples() {
        let eq = Equation::constant(5, 1.0, &[3.0, 0.025, -0.025, 0.02, 0.0]).unwrap();
        assert!(check_calanchi_ruf(&eq).unwrap().verdict);
        let eq = Equation::constant(4, 1.0, &[0.0, 1e-4, 1e-4, 1e-4]).unwrap();
        assert!(!check_calanchi_ruf(&eq).unwrap().verdict);
        let eq = Equation::constant(3, 1.0, &[0.0, 0.1, 0.0]).unwrap();
        let r = check_calanchi_ruf(&eq).unwrap();
        assert!(!r.verdict);
        assert!((r.conditions[1].rhs - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn ilyashenko_examples() {
        let b = ilyashenko_bound(1.1, 3).unwrap();
        assert!((b.inner_exponent - 210.912).abs() < 1e-9);
        assert!(!b.overflow);
        assert!((b.log_log_bound - (210.912 + 5.3f64.ln())).abs() < 1e-9);
        let b = ilyashenko_bound(1.0 + 1e-12, 1).unwrap();
        assert!((b.inner_exponent - 7.5).abs() < 1e-10);
        assert!((b.log_bound - (8f64.ln() + 5.0 * 7.5f64.exp())).abs() < 1e-6);
        assert!((b.log_bound - 9042.29).abs() < 0.01);
        assert!(ilyashenko_bound(1.2, 4).unwrap().log_log_bound > ilyashenko_bound(1.1, 4).unwrap().log_log_bound);
        assert!(ilyashenko_bound(1.1, 6).unwrap().overflow);
        assert!(matches!(ilyashenko_bound(1.0, 2), Err(Error::BadC(_))));
    }

    #[test]
    fn aggregate_examples() {
        let n = 5;
        let s = (PI / 3.0).sin();
        let (k, p0) = (1.0, 0.5);
        let single = (k - p0) * s;
        // One nonzero middle coefficient: cap is (n-3) times the per-coefficient cap.
        let eq = Equation::constant(n, 1.0, &[p0, -3.0, 0.9 * single, 0.0, 0.0]).unwrap();
        assert!(check_aggregate(&eq, TheoremId::T1_1, k).unwrap().verdict);
        assert!(!check_theorem_1_1(&eq, k).unwrap().verdict);
        let eq = Equation::constant(n, 1.0, &[p0, -3.0, 0.5 * single, 0.5 * single, 0.0]).unwrap();
        let r = check_aggregate(&eq, TheoremId::T1_1, k).unwrap();
        let want = single - 0.5 * single * (k.powf(0.4) + k.powf(0.6));
        assert!((r.conditions[0].margin - want).abs() < 1e-14);
        let eq = Equation::constant(n, 1.0, &[p0, -3.0, 0.0, 0.0, 0.0]).unwrap();
        let a = check_aggregate(&eq, TheoremId::T1_1, k).unwrap();
        assert_eq!(a.verdict, a.conditions[1].pass);
    }

    #[test]
    fn best_k_improves_default() {
        let eq = quintic(0.2);
        let b = best_k(&eq, TheoremId::T1_1).unwrap().unwrap();
        let at_default = check_theorem_1_1(&eq, default_k(&eq)).unwrap().min_margin();
        assert!(b.min_margin >= at_default);
        assert!(b.k > 0.5 && b.k <= 15.0);
    }
}
