use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use persol::bounds::{
    best_k, check_aggregate, check_calanchi_ruf, check_theorem_1_1, check_theorem_1_2, check_theorem_1_3, default_k,
    Variant,
};
use persol::counting::{continuation_count, isolate_zeros, HomotopyFamily};
use persol::flow::integrate;
use persol::planar::{check_corollary_4_1, count_limit_cycles, PlanarConfig};
use persol::{geometry, BoundsReport, Complex64, Contour, FlowOutcome, PeriodicSolutionSet, TheoremId};
use rayon::prelude::*;
use serde::Serialize;

use crate::input::{self, Failure, EXIT_HYPOTHESIS, EXIT_INDETERMINATE, EXIT_NOT_CONSTANT, EXIT_OK};
use crate::output::{emit, num, report_json, Manifest};
use crate::Options;

fn csv_path(out: &Path) -> PathBuf {
    let p = out.with_extension("csv");
    if p == out {
        out.with_extension("items.csv")
    } else {
        p
    }
}

#[derive(Serialize)]
struct CountResult<'a> {
    region: &'a Contour,
    solutions: &'a PeriodicSolutionSet,
}

pub fn count(o: &Options, manifest: &Manifest) -> Result<u8, Failure> {
    if let Some(path) = &o.sys {
        let sys = input::system(path)?;
        let cfg = PlanarConfig { integrator: input::count_config(o.rel_tol, None)?.integrator, ..PlanarConfig::default() };
        let rep = count_limit_cycles(&sys, &cfg)?;
        emit(o.out.as_deref(), &report_json(manifest, &rep))?;
        return Ok(if rep.cycles.is_some() { EXIT_OK } else { EXIT_INDETERMINATE });
    }
    let eq = input::equation(o.eq.as_deref(), o.omega)?;
    let region = input::region(&eq, o.region_box.as_deref(), o.radius)?;
    let cfg = input::count_config(o.rel_tol, o.max_depth)?;
    let set = isolate_zeros(&eq, &region, &cfg)?;
    let json = report_json(manifest, &CountResult { region: &region, solutions: &set });
    match o.out.as_deref() {
        Some(out) => {
            emit(Some(out), &json)?;
            emit(Some(&csv_path(out)), &set.to_csv())?;
            println!("total {} certified {}", set.total, set.certified);
        }
        None => emit(None, &json)?,
    }
    if !set.certified {
        for r in &set.indeterminate {
            eprintln!("indeterminate: [{}, {}] x [{}, {}]: {}", num(r.lo.re), num(r.hi.re), num(r.lo.im), num(r.hi.im), r.reason);
        }
    }
    Ok(if set.certified { EXIT_OK } else { EXIT_INDETERMINATE })
}

fn variant(id: TheoremId) -> Variant {
    match id {
        TheoremId::T1_3_i | TheoremId::C4_1_i => Variant::I,
        TheoremId::T1_3_ii | TheoremId::C4_1_ii => Variant::II,
        TheoremId::T1_3_iii | TheoremId::C4_1_iii => Variant::III,
        _ => Variant::IV,
    }
}

fn bounds_report(o: &Options, id: TheoremId) -> Result<BoundsReport, Failure> {
    if id.is_planar() {
        let path = o.sys.as_deref().ok_or_else(|| Failure::usage(format!("--sys is required for theorem {id}")))?;
        let sys = input::system(path)?;
        return Ok(check_corollary_4_1(&sys, variant(id))?);
    }
    let eq = input::equation(o.eq.as_deref(), o.omega)?;
    Ok(match id {
        TheoremId::T1_1 | TheoremId::T1_2 | TheoremId::Aggregate => {
            let k = o.k.unwrap_or_else(|| default_k(&eq));
            let mut r = match id {
                TheoremId::T1_1 => check_theorem_1_1(&eq, k)?,
                TheoremId::T1_2 => check_theorem_1_2(&eq, k)?,
                _ => check_aggregate(&eq, TheoremId::T1_1, k)?,
            };
            if o.k.is_none() {
                r.best_k = best_k(&eq, id)?;
            }
            r
        }
        TheoremId::CR => check_calanchi_ruf(&eq)?,
        _ => check_theorem_1_3(&eq, variant(id))?,
    })
}

pub fn check(o: &Options, manifest: &Manifest) -> Result<u8, Failure> {
    let label = o.theorem.as_deref().ok_or_else(|| Failure::usage("--theorem is required"))?;
    let id = TheoremId::parse(label).ok_or_else(|| Failure::usage(format!("unknown theorem `{label}`")))?;
    let report = bounds_report(o, id)?;
    let mut table = report.to_table();
    if let Some(b) = report.best_k {
        let _ = writeln!(table, "best K: {} (smallest margin {})", num(b.k), num(b.min_margin));
    }
    print!("{table}");
    if let Some(out) = o.out.as_deref() {
        emit(Some(out), &report_json(manifest, &report))?;
    }
    Ok(if report.verdict { EXIT_OK } else { EXIT_HYPOTHESIS })
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

pub fn scan(o: &Options, manifest: &Manifest) -> Result<u8, Failure> {
    let eq = input::equation(o.eq.as_deref(), o.omega)?;
    let (nx, ny) = input::grid(o.grid.as_deref().ok_or_else(|| Failure::usage("--grid is required"))?)?;
    let [x0, y0, x1, y1] = match (o.region_box.as_deref(), o.radius) {
        (Some(b), _) => [b[0], b[1], b[2], b[3]],
        (None, Some(r)) => [-r, -r, r, r],
        (None, None) => {
            let rho = geometry(&eq)?.rho;
            [-rho, -rho, rho, rho]
        }
    };
    if !(x0 <= x1 && y0 <= y1) || (nx > 1 && x0 == x1) || (ny > 1 && y0 == y1) {
        return Err(Failure::usage("--box needs X0 < X1 and Y0 < Y1 along every axis with more than one point"));
    }
    let cfg = input::count_config(o.rel_tol, None)?.integrator;
    let points: Vec<Complex64> = axis(y0, y1, ny)
        .into_iter()
        .flat_map(|y| axis(x0, x1, nx).into_iter().map(move |x| Complex64::new(x, y)))
        .collect();
    let rows: Vec<String> = points
        .par_iter()
        .map(|&c| {
            let row = match integrate(&eq, c, 0.0, eq.omega(), &cfg, false)? {
                FlowOutcome::Completed { z, .. } => {
                    let q = z - c;
                    format!("{},{},{},{},,", num(c.re), num(c.im), num(q.re), num(q.im))
                }
                FlowOutcome::Escaped(e) => {
                    let arm = e.arm.map(|a| a.to_string()).unwrap_or_default();
                    format!("{},{},ESCAPE,,{},{arm}", num(c.re), num(c.im), num(e.time))
                }
            };
            Ok(row)
        })
        .collect::<Result<_, persol::Error>>()?;
    let mut csv = format!("# manifest: {}\n", serde_json::to_string(manifest).expect("manifest serializes"));
    csv.push_str("c_re,c_im,q_re,q_im,escape_time,arm\n");
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    emit(o.out.as_deref(), &csv)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ContinuationResult<'a> {
    region: &'a Contour,
    scaled_coefficients: &'a [usize],
    report: &'a persol::counting::ContinuationReport,
}

pub fn continuation(o: &Options, manifest: &Manifest) -> Result<u8, Failure> {
    let eq = input::equation(o.eq.as_deref(), o.omega)?;
    let family = match o.theorem.as_deref() {
        None | Some("1.1") => HomotopyFamily::theorem_1_1(eq.clone())?,
        Some("1.2") => HomotopyFamily::theorem_1_2(eq.clone())?,
        Some(other) => return Err(Failure::usage(format!("continuation families exist for theorems 1.1 and 1.2, not `{other}`"))),
    };
    let region = input::region(&eq, o.region_box.as_deref(), o.radius)?;
    let cfg = input::count_config(o.rel_tol, o.max_depth)?;
    let rep = continuation_count(|l| family.at(l), o.steps.unwrap_or(10), &region, &cfg)?;
    let mut table = format!("{:>24} {:>6} {:>10}\n", "lambda", "count", "certified");
    for e in &rep.entries {
        let count = e.count.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(table, "{:>24} {count:>6} {:>10}", num(e.lambda), e.certified);
    }
    let _ = writeln!(table, "constant: {}", rep.constant);
    print!("{table}");
    if let Some(out) = o.out.as_deref() {
        let result = ContinuationResult { region: &region, scaled_coefficients: family.scaled_indices(), report: &rep };
        emit(Some(out), &report_json(manifest, &result))?;
    }
    Ok(if rep.constant { EXIT_OK } else { EXIT_NOT_CONSTANT })
}
