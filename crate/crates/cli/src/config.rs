//! Flag validation. Every problem with a command line is collected into one
//! message before anything is computed.

use std::fmt;

use lienard_core::integrator::{MAX_TOL, MIN_TOL};
use lienard_core::{Error, PolynomialSpec, SystemParams};

use crate::args::{Format, ParamArgs, PolyArgs};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError(pub Vec<String>);

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0.join("; "))
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Default)]
pub struct Problems(Vec<String>);

impl Problems {
    pub fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn core(&mut self, e: Error) {
        match e {
            Error::InvalidParams(m) | Error::InvalidPolynomial(m) => {
                self.0.extend(m.split("; ").map(str::to_string));
            }
            other => self.0.push(other.to_string()),
        }
    }

    pub fn tol(&mut self, tol: f64) {
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            self.push(format!("tol must lie in [{MIN_TOL:e}, {MAX_TOL:e}]"));
        }
    }

    pub fn format(&mut self, format: Format, allowed: &[Format]) {
        if !allowed.contains(&format) {
            self.push(format!("format {format:?} is not available for this command").to_lowercase());
        }
    }

    pub fn positive(&mut self, name: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(format!("{name} must be positive"));
        }
    }

    pub fn finish<T>(self, value: Option<T>) -> Result<T, ValidationError> {
        match value {
            Some(v) if self.0.is_empty() => Ok(v),
            _ => Err(ValidationError(self.0)),
        }
    }
}

/// The system under study.
#[derive(Debug, Clone)]
pub struct System {
    pub params: SystemParams,
    pub f: PolynomialSpec,
}

impl System {
    pub fn is_raw(&self) -> bool {
        self.f.is_raw()
    }
}

pub fn params_only(args: &ParamArgs, problems: &mut Problems) -> Option<SystemParams> {
    let p = SystemParams { n: args.n, c: args.c, a1: args.a1.unwrap_or(1.0), r: args.r };
    match p.validate() {
        Ok(()) => Some(p),
        Err(e) => {
            problems.core(e);
            None
        }
    }
}

/// Resolve parameters and polynomial. Without explicit coefficients the
/// polynomial is `x^n + a1 x`.
pub fn system(args: &ParamArgs, poly: &PolyArgs, raw_allowed: bool, problems: &mut Problems) -> Option<System> {
    if let Some(raw) = &poly.raw_coeffs {
        if !poly.allow_raw {
            problems.push("raw polynomials need --allow-raw");
        }
        if !raw_allowed {
            problems.push("this command accepts only C-monic polynomials");
        }
        if poly.coeffs.is_some() {
            problems.push("--coeffs and --raw-coeffs are mutually exclusive");
        }
        problems.positive("R", args.r);
        let f = PolynomialSpec::raw(raw).map_err(|e| problems.core(e)).ok()?;
        let params = SystemParams { n: f.degree() as u32, c: args.c, a1: f.a1(), r: args.r };
        return Some(System { params, f });
    }

    let a1 = match (&poly.coeffs, args.a1) {
        (Some(c), Some(a)) if c.first() != Some(&a) => {
            problems.push("--a1 disagrees with the first entry of --coeffs");
            a
        }
        (Some(c), _) => c.first().copied().unwrap_or(f64::NAN),
        (None, a) => a.unwrap_or(1.0),
    };
    let p = SystemParams { n: args.n, c: args.c, a1, r: args.r };
    let valid = p.validate().map_err(|e| problems.core(e)).is_ok();
    if !valid {
        return None;
    }
    let f = match &poly.coeffs {
        Some(c) => PolynomialSpec::c_monic(args.n as usize, args.c, c),
        None => PolynomialSpec::monomial_plus_linear(args.n as usize, args.c, a1),
    };
    let f = f.map_err(|e| problems.core(e)).ok()?;
    Some(System { params: p, f })
}
