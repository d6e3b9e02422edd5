use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::input::Failure;
use crate::Options;

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub input_path: String,
    /// Configuration flags given on the command line, in a fixed order.
    pub overrides: Vec<(String, String)>,
    pub output_path: String,
    pub seed: u64,
}

impl Manifest {
    pub fn new(command: &str, o: &Options) -> Self {
        let input = o.eq.as_ref().or(o.sys.as_ref());
        let mut overrides = Vec::new();
        let mut push = |flag: &str, v: Option<String>| {
            if let Some(v) = v {
                overrides.push((flag.to_string(), v));
            }
        };
        push("--omega", o.omega.map(|v| v.to_string()));
        push("--radius", o.radius.map(|v| v.to_string()));
        push("--box", o.region_box.as_ref().map(|b| b.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")));
        push("--theorem", o.theorem.clone());
        push("--K", o.k.map(|v| v.to_string()));
        push("--steps", o.steps.map(|v| v.to_string()));
        push("--grid", o.grid.clone());
        push("--threads", o.threads.map(|v| v.to_string()));
        push("--rel-tol", o.rel_tol.map(|v| v.to_string()));
        push("--max-depth", o.max_depth.map(|v| v.to_string()));
        Self {
            command: command.to_string(),
            input_path: input.map(|p| p.display().to_string()).unwrap_or_default(),
            overrides,
            output_path: o.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            seed: o.seed,
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    manifest: &'a Manifest,
    result: &'a T,
}

pub fn report_json<T: Serialize>(manifest: &Manifest, result: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Report { manifest, result }).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::usage(format!("stdout: {e}")))
        }
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
