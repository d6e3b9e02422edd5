use std::fs;
use std::path::Path;

use persol::counting::{default_region, CountConfig};
use persol::{Complex64, Contour, Equation, EquationDoc, Error, PlanarSystem};
use serde::de::DeserializeOwned;

pub const EXIT_OK: u8 = 0;
pub const EXIT_MALFORMED: u8 = 1;
pub const EXIT_INDETERMINATE: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;
pub const EXIT_UNSUPPORTED: u8 = 4;
pub const EXIT_NOT_CONSTANT: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_MALFORMED, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnsupportedDegree { .. } => EXIT_UNSUPPORTED,
            Error::IndefiniteLeading { .. } => EXIT_HYPOTHESIS,
            Error::EscapeOnContour
            | Error::ZeroOnContour { .. }
            | Error::StepLimitExceeded { .. }
            | Error::EscapedDomain { .. }
            | Error::Diverged(_)
            | Error::SingularDerivative { .. } => EXIT_INDETERMINATE,
            _ => EXIT_MALFORMED,
        };
        Self { code, message: e.to_string() }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let at = if at == "." { String::new() } else { format!(" at `{at}`") };
        Failure::usage(format!("{}{at}: {}", path.display(), e.inner()))
    })
}

pub fn equation(path: Option<&Path>, omega: Option<f64>) -> Result<Equation, Failure> {
    let path = path.ok_or_else(|| Failure::usage("--eq is required"))?;
    let mut doc: EquationDoc = read_json(path)?;
    if let Some(w) = omega {
        doc.omega = w;
    }
    doc.into_equation().map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn system(path: &Path) -> Result<PlanarSystem, Failure> {
    let sys: PlanarSystem = read_json(path)?;
    sys.validate().map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(sys)
}

/// `--box`, then `--radius`, then the default square `[-ρ, ρ]²`.
pub fn region(eq: &Equation, region_box: Option<&[f64]>, radius: Option<f64>) -> Result<Contour, Failure> {
    let contour = match (region_box, radius) {
        (Some(b), _) => Contour::rect(Complex64::new(b[0], b[1]), Complex64::new(b[2], b[3])),
        (None, Some(r)) => Contour::circle(Complex64::new(0.0, 0.0), r),
        (None, None) => default_region(eq)?,
    };
    if !contour.is_valid() {
        return Err(Failure::usage("region must have positive width and height"));
    }
    Ok(contour)
}

pub fn count_config(rel_tol: Option<f64>, max_depth: Option<usize>) -> Result<CountConfig, Failure> {
    let mut cfg = CountConfig::default();
    if let Some(r) = rel_tol {
        if !(r > 0.0 && r < 1.0) {
            return Err(Failure::usage(format!("--rel-tol must lie in (0, 1), got {r}")));
        }
        cfg.integrator.rel_tol = r;
        cfg.integrator.abs_tol = cfg.integrator.abs_tol.min(1e-2 * r);
    }
    if let Some(d) = max_depth {
        cfg.max_depth = d;
    }
    Ok(cfg)
}

/// `NxM` with positive sizes.
pub fn grid(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::usage(format!("--grid expects NxM with positive integers, got `{text}`"));
    let (a, b) = text.to_ascii_lowercase().split_once('x').map(|(a, b)| (a.to_string(), b.to_string())).ok_or_else(bad)?;
    let n: usize = a.trim().parse().map_err(|_| bad())?;
    let m: usize = b.trim().parse().map_err(|_| bad())?;
    if n == 0 || m == 0 {
        return Err(bad());
    }
    Ok((n, m))
}
