mod common;

use std::f64::consts::TAU;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use persol::bounds::{check_theorem_1_1, normalize, Variant};
use persol::counting::{
    continuation_count, count_all, default_region, isolate_zeros, winding_number, CountConfig, HomotopyFamily,
};
use persol::displacement::{real_derivatives, real_q};
use persol::flow::integrate;
use persol::planar::{check_corollary_4_1, corollary_4_1_conditions, count_limit_cycles, PlanarConfig, Stability};
use persol::{CoeffFn, Complex64, Contour, Direction, Equation, IntegratorConfig, PeriodicSolutionSet, PlanarSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, ok: bool, detail: String) {
    println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(common::SEED)
}

fn square(eq: &Equation, half: Option<f64>) -> Contour {
    match half {
        Some(h) => Contour::square(h),
        None => default_region(eq).unwrap(),
    }
}

fn count(eq: &Equation, region: &Contour) -> PeriodicSolutionSet {
    isolate_zeros(eq, region, &CountConfig::default()).unwrap()
}

fn shift_constants(eq: &Equation, eps: f64) -> Equation {
    let coeffs = eq
        .coeffs()
        .iter()
        .map(|p| {
            let mut poly = p.poly().to_vec();
            if poly.is_empty() {
                poly.push(0.0);
            }
            poly[0] += eps;
            CoeffFn::new(poly, p.harmonics().to_vec(), eq.omega()).unwrap()
        })
        .collect();
    eq.with_coeffs(coeffs).unwrap()
}

struct CorpusCount {
    name: String,
    eq: Equation,
    region: Contour,
    set: PeriodicSolutionSet,
}

fn corpus_counts() -> &'static [CorpusCount] {
    static CELL: OnceLock<Vec<CorpusCount>> = OnceLock::new();
    CELL.get_or_init(|| {
        common::corpus(&mut rng())
            .into_iter()
            .map(|(name, eq, half)| {
                let region = square(&eq, half);
                let set = count(&eq, &region);
                CorpusCount { name, eq, region, set }
            })
            .collect()
    })
}

#[test]
fn criterion_01_monomial_baseline() {
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in 3..=6 {
        let eq = Equation::monomial(n, 1.0).unwrap();
        let w = winding_number(&eq, &Contour::circle(Complex64::new(0.0, 0.0), 0.3), &CountConfig::default());
        if w.as_ref().ok() != Some(&(n as i64)) {
            bad.push(format!("n={n}: winding {w:?}"));
        }
        let set = count(&eq, &Contour::square(0.5));
        let one_at_origin = set.certified
            && set.items.len() == 1
            && set.items[0].multiplicity == n as u32
            && set.items[0].c.norm() < 1e-6;
        if !one_at_origin {
            bad.push(format!("n={n}: items {:?} certified {}", set.items, set.certified));
        }
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(5);
    verdict(1, ok, format!("z^n, n = 3..6, in {elapsed:.2?}; problems: {bad:?}"));
}

#[test]
fn criterion_02_autonomous_oracle() {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let cases = [
        (common::cubic_with_three_equilibria(), 3.0, [-2.0, 0.0, 2.0].map(|x| Complex64::new(x, 0.0)).to_vec()),
        (common::cubic_with_complex_pair(), 1.5, cubic_roots(1.0, 1.0)),
    ];
    for (eq, half, truth) in cases {
        let set = count(&eq, &Contour::square(half));
        if !set.certified || set.total != 3 || set.items.len() != 3 || set.items.iter().any(|s| s.multiplicity != 1) {
            bad.push(format!("{:?}", set.items));
            continue;
        }
        for t in &truth {
            let d = set.items.iter().map(|s| (s.c - t).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    let ok = bad.is_empty() && worst <= 1e-8;
    verdict(2, ok, format!("largest distance to the equilibria {worst:.3e}; problems: {bad:?}"));
}

/// Roots of `z³ + a z + b` by Cardano with one real root.
fn cubic_roots(a: f64, b: f64) -> Vec<Complex64> {
    let d = (b * b / 4.0 + a * a * a / 27.0).sqrt();
    let x = (-b / 2.0 + d).cbrt() + (-b / 2.0 - d).cbrt();
    // Deflate: z² + x z + (x² + a).
    let disc = Complex64::new(x * x - 4.0 * (x * x + a), 0.0).sqrt();
    vec![Complex64::new(x, 0.0), (-x + disc) / 2.0, (-x - disc) / 2.0]
}

#[test]
fn criterion_03_first_theorem_sweep() {
    let mut rng = rng();
    let cfg = CountConfig::default();
    let mut bad = Vec::new();
    for j in 0..20 {
        let n = 4 + j % 2;
        let eq = common::theorem_1_1_instance(&mut rng, n);
        assert!(check_theorem_1_1(&eq, 1.0).unwrap().verdict);
        let set = count_all(&eq, &cfg).unwrap();
        if !set.certified || set.total != n as u32 {
            bad.push(format!("#{j} n={n}: total {} certified {}", set.total, set.certified));
            continue;
        }
        let family = HomotopyFamily::theorem_1_1(eq.clone()).unwrap();
        let region = default_region(&eq).unwrap();
        let rep = continuation_count(|l| family.at(l), 10, &region, &cfg).unwrap();
        if !rep.constant || rep.entries[0].count != Some(n as u32) {
            bad.push(format!("#{j} n={n}: continuation {:?}", rep.entries));
        }
    }
    verdict(3, bad.is_empty(), format!("20 instances with degree 4 and 5; violations: {bad:?}"));
}

#[test]
fn criterion_04_real_derivatives() {
    let cfg = IntegratorConfig { rel_tol: 1e-13, abs_tol: 1e-15, ..IntegratorConfig::default() };
    let mut rng = rng();
    let eq = common::theorem_1_1_instance(&mut rng, 4);
    let q = |x: f64| real_q(&eq, x, &cfg, Direction::Forward).unwrap().unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(0.1);
    let mut worst = [0.0f64; 3];
    for _ in 0..50 {
        let x = rng.gen_range(-1.0..1.0);
        let d = real_derivatives(&eq, x, &cfg).unwrap();
        let h1 = 1e-4;
        let fd1 = (q(x + h1) - q(x - h1)) / (2.0 * h1);
        let h2 = 1e-3;
        let fd2 = (q(x + h2) - 2.0 * q(x) + q(x - h2)) / (h2 * h2);
        let h3 = 5e-3;
        let fd3 = (q(x + 2.0 * h3) - 2.0 * q(x + h3) + 2.0 * q(x - h3) - q(x - 2.0 * h3)) / (2.0 * h3 * h3 * h3);
        worst[0] = worst[0].max(rel(d.q1, fd1));
        worst[1] = worst[1].max(rel(d.q2, fd2));
        worst[2] = worst[2].max(rel(d.q3, fd3));
    }
    let eq = common::cubic_with_three_equilibria();
    let d = real_derivatives(&eq, 2.0, &cfg).unwrap();
    let e = 0.4f64.exp();
    let closed = ((d.q1 - (e - 1.0)).abs()).max((d.q2 - e * 1.5 * (e - 1.0)).abs());
    let ok = worst[0] <= 1e-5 && worst[1] <= 1e-4 && worst[2] <= 1e-3 && closed <= 1e-8;
    verdict(
        4,
        ok,
        format!("relative errors q' {:.2e}, q'' {:.2e}, q''' {:.2e}; equilibrium closed form {closed:.2e}", worst[0], worst[1], worst[2]),
    );
}

#[test]
fn criterion_05_blow_up_time() {
    let cfg = IntegratorConfig::default();
    let escape_time = |n: usize, c: f64, omega: f64| {
        let eq = Equation::monomial(n, omega).unwrap();
        integrate(&eq, Complex64::new(c, 0.0), 0.0, omega, &cfg, false).unwrap().escape().map(|e| e.time)
    };
    let square = escape_time(2, 1.0, 2.0);
    let mut worst = square.map_or(f64::INFINITY, |t| (t - 1.0).abs());
    for n in 2..=6 {
        for c in [0.5f64, 1.0, 1.7, 3.0] {
            let truth = 1.0 / ((n - 1) as f64 * c.powi(n as i32 - 1));
            let rel = escape_time(n, c, 2.0 * truth).map_or(f64::INFINITY, |t| (t - truth).abs() / truth);
            worst = worst.max(rel);
        }
    }
    verdict(5, worst <= 1e-6, format!("z' = z^2 from 1 escapes at {square:?}; worst relative error {worst:.2e}"));
}

#[test]
fn criterion_06_normalization_invariance() {
    let mut rng = rng();
    let mut bad = Vec::new();
    for j in 0..10 {
        let n = 4 + j % 2;
        let eq = common::theorem_1_1_instance(&mut rng, n);
        let before = count_all(&eq, &CountConfig::default()).unwrap();
        for k in [0.5, 2.0, 8.0] {
            let after = count_all(&normalize(&eq, k).unwrap(), &CountConfig::default()).unwrap();
            if !(before.certified && after.certified && before.total == after.total) {
                bad.push(format!("#{j} K={k}: {} ({}) vs {} ({})", before.total, before.certified, after.total, after.certified));
            }
        }
    }
    verdict(6, bad.is_empty(), format!("10 instances, K in {{0.5, 2, 8}}; mismatches: {bad:?}"));
}

#[test]
fn criterion_07_conjugate_symmetry() {
    let mut worst = 0.0f64;
    let mut certified = 0;
    for c in corpus_counts().iter().filter(|c| c.set.certified) {
        certified += 1;
        worst = worst.max(c.set.conjugate_pairing_distance());
    }
    let ok = certified == corpus_counts().len() && worst <= 1e-8;
    verdict(7, ok, format!("{certified}/{} certified sets, largest pairing distance {worst:.2e}", corpus_counts().len()));
}

#[test]
fn criterion_08_planar_corollary() {
    let sys = PlanarSystem::new(-1.0, vec![vec![0.0, 0.0], vec![1.0, 0.0, 1.0]]).unwrap();
    let rep = count_limit_cycles(&sys, &PlanarConfig::default()).unwrap();
    let cycles = rep.cycles.clone().unwrap_or_default();
    let cycle_ok = cycles.len() == 1 && (cycles[0].r0 - 1.0).abs() <= 1e-8 && cycles[0].stability == Stability::Unstable;

    let zero = CoeffFn::constant(0.0, TAU);
    let margin = |lambda: f64| {
        corollary_4_1_conditions(Variant::I, lambda, 1.0, 1.0, &[zero.clone(), zero.clone()]).unwrap().min_margin()
    };
    let (pass, fail) = (margin(-4.0), margin(-2.0));
    let margins_ok = (pass - 1.0).abs() <= 1e-12 && (fail + 1.0).abs() <= 1e-12;
    // The leading coefficient of a degree-4 system is odd in θ, so the
    // corollary itself must reject every degree-4 polynomial system.
    let rejected = check_corollary_4_1(
        &PlanarSystem::new(-4.0, vec![vec![0.0; 2], vec![0.0; 3], vec![1.0, 0.0, 1.0, 0.0]]).unwrap(),
        Variant::I,
    )
    .is_err();
    let ok = cycle_ok && rep.origin_stable && margins_ok && rejected;
    verdict(
        8,
        ok,
        format!(
            "cycles {:?}, origin stable {}; variant i margins {pass:+} and {fail:+}; degree-4 system rejected {rejected}",
            cycles.iter().map(|c| (c.r0, c.stability)).collect::<Vec<_>>(),
            rep.origin_stable,
        ),
    );
}

#[test]
fn criterion_09_bounds_arithmetic() {
    let eq = |p2: f64| Equation::constant(5, 1.0, &[0.5, -2.0, p2, 0.2, 0.0]).unwrap();
    let pass = check_theorem_1_1(&eq(0.2), 1.0).unwrap();
    let fail = check_theorem_1_1(&eq(0.3), 1.0).unwrap();
    let find = |r: &persol::BoundsReport, name: &str| r.conditions.iter().find(|c| c.name.starts_with(name)).cloned().unwrap();
    let cap = find(&pass, "|P2|").rhs;
    let threshold = find(&pass, "|P1|").rhs;
    let flipped = find(&fail, "|P2|").margin;
    let ok = pass.verdict
        && !fail.verdict
        && (cap - 0.2165).abs() <= 1e-4
        && (threshold - 1.933).abs() <= 1e-4
        && (flipped + 0.0835).abs() <= 1e-4;
    verdict(9, ok, format!("cap {cap:.6}, P1 threshold {threshold:.6}, flipped margin {flipped:.6}"));
}

#[test]
fn criterion_10_winding_robustness() {
    let mut bad = Vec::new();
    let mut compared = 0;
    for c in corpus_counts() {
        if !c.set.certified {
            bad.push(format!("{}: baseline not certified", c.name));
            continue;
        }
        let doubled = count(&c.eq, &c.region.with_min_samples(2 * c.region.min_samples));
        let mut variants = vec![("doubled samples", doubled)];
        for eps in [1e-6, -1e-6] {
            variants.push(("shifted constants", count(&shift_constants(&c.eq, eps), &c.region)));
        }
        for (what, set) in variants {
            compared += set.certified as usize;
            if set.certified && set.total != c.set.total {
                bad.push(format!("{} {what}: {} vs {}", c.name, set.total, c.set.total));
            }
        }
    }
    verdict(10, bad.is_empty(), format!("{} corpus equations, {compared} certified variants; changed counts: {bad:?}", corpus_counts().len()));
}
