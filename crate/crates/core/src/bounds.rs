//! Explicit constants of the limit-cycle bound, every one in log space.
//!
//! Quantities follow the order in which the bound is assembled: the trap
//! radius `sigma`, the strip widths `omega` and `alpha`, the velocity bounds
//! `mu` and `L`, the transit-time bound, the complex-extension widths
//! `epsilon`, `delta`, `lambda`, the Bernstein index bound and finally the
//! double-exponential count bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{LogLogValue, LogValue, NEGLIGIBLE};
use crate::polynomial::PolynomialSpec;

/// Exponent numerator of the trap radius: `e^{8 pi / (|a1| - 2)}` (Poincare-domain lemma).
pub const TRAP_EXPONENT: f64 = 8.0 * PI;
/// Denominator `8C` of the trap radius prefactor (Poincare-domain lemma).
pub const TRAP_DENOMINATOR: f64 = 8.0;
/// `omega = sigma / (3C)` (strip proposition).
pub const OMEGA_DENOMINATOR: f64 = 3.0;
/// `alpha = omega / (2 C n^2 R^{n-1})` (strip proposition).
pub const ALPHA_DENOMINATOR: f64 = 2.0;
/// `mu <= 3 (R+2)^n` (velocity lemma).
pub const MU_FACTOR: f64 = 3.0;
/// `L = 2 mu` (complex-extension theorem hypothesis).
pub const LIPSCHITZ_FACTOR: f64 = 2.0;
/// `T_max <= 25 C^2 n^2 R^n / sigma` (transit-time lemma).
pub const TRANSIT_NUMERATOR: f64 = 25.0;
/// `epsilon = exp(-300 C^2 n^2 R^n (R+2)^n / sigma)` (extension-width lemma).
pub const EPSILON_NUMERATOR: f64 = 300.0;
/// Penultimate line of the final estimate: `600 C^2 n^2 R^{n+1} (R+2)^{n+1} / (|a1| sigma^2)`.
pub const CHAIN_NUMERATOR: f64 = 600.0;
/// Closed-form numerator `38400 = 600 * 64` of the final estimate.
pub const FINAL_NUMERATOR: f64 = 38400.0;
/// Closed-form exponent `e^{16 pi / (2 - |a1|)}` of the final estimate.
pub const FINAL_EXPONENT: f64 = 16.0 * PI;
/// Hausdorff-distance lower bound `d >= (pi |a1| / 2) sigma`.
pub const HAUSDORFF_FACTOR: f64 = PI / 2.0;

/// Relative tolerance, in the outermost log, for closed-form vs chained forms.
pub const CROSS_FORM_TOL: f64 = 1e-9;
/// Relative tolerance for identities that hold with equality in exact arithmetic.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Smallest `C` for which the final theorem is stated.
pub const MIN_THEOREM_C: f64 = 4.0;

/// The four parameters of the final bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n: u32,
    #[serde(rename = "C")]
    pub c: f64,
    pub a1: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl SystemParams {
    pub fn new(n: u32, c: f64, a1: f64, r: f64) -> Result<Self> {
        let p = Self { n, c, a1, r };
        p.validate()?;
        Ok(p)
    }

    /// All violated constraints, joined into one message.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n < 2 {
            problems.push("n must be at least 2".to_string());
        }
        if self.n % 2 != 0 {
            problems.push("n must be even".to_string());
        }
        if !(self.c.is_finite() && self.c >= MIN_THEOREM_C) {
            problems.push(format!("C must be at least {MIN_THEOREM_C}"));
        }
        if !(self.a1.is_finite() && self.a1 != 0.0 && self.a1.abs() < 2.0) {
            problems.push("a1 must satisfy 0 < |a1| < 2".to_string());
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            problems.push("R must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(problems.join("; ")))
        }
    }

    /// Parameters of a C-monic polynomial with ball radius `r`.
    pub fn for_polynomial(f: &PolynomialSpec, r: f64) -> Result<Self> {
        if !f.is_paper_mode() {
            return Err(Error::NotPaperMode("parameter extraction"));
        }
        let c = f.coeff_bound().unwrap_or(f64::NAN);
        Self::new(f.degree() as u32, c, f.a1(), r)
    }

    fn abs_a1(&self) -> f64 {
        self.a1.abs()
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `ln(C^2 n^2 R^n)`, shared by the transit-time and epsilon formulas.
    fn ln_c2n2rn(&self) -> f64 {
        2.0 * self.c.ln() + 2.0 * self.nf().ln() + self.nf() * self.r.ln()
    }
}

pub fn sigma(p: &SystemParams) -> LogValue {
    let a = p.abs_a1();
    LogValue::from_ln(
        a.ln() + (2.0 - a).ln() - (TRAP_DENOMINATOR * p.c).ln() + TRAP_EXPONENT / (a - 2.0),
    )
}

/// `(2 - |a1|) / (4C)`: radius of the ball where the angle decreases uniformly.
pub fn trap_ball_radius(p: &SystemParams) -> f64 {
    (2.0 - p.abs_a1()) / (4.0 * p.c)
}

/// `(omega, alpha)` for the curvilinear strip.
pub fn strip_params(p: &SystemParams) -> (LogValue, LogValue) {
    strip_params_with_sigma(p, sigma(p))
}

pub fn strip_params_with_sigma(p: &SystemParams, sigma: LogValue) -> (LogValue, LogValue) {
    let omega = sigma.div(LogValue::from_f64(OMEGA_DENOMINATOR * p.c));
    let divisor = (ALPHA_DENOMINATOR * p.c * p.nf() * p.nf()).ln() + (p.nf() - 1.0) * p.r.ln();
    let alpha = omega.div(LogValue::from_ln(divisor));
    (omega, alpha)
}

/// `(mu, L)` as certified values `3 (R+2)^n` and `2 mu`.
pub fn mu_l(p: &SystemParams) -> Result<(f64, f64)> {
    let mu = MU_FACTOR * (p.r + 2.0).powi(p.n as i32);
    let l = LIPSCHITZ_FACTOR * mu;
    if mu.is_finite() && l.is_finite() {
        Ok((mu, l))
    } else {
        Err(Error::Overflow("(R+2)^n"))
    }
}

pub fn mu_l_log(p: &SystemParams) -> (LogValue, LogValue) {
    let ln_mu = MU_FACTOR.ln() + p.nf() * (p.r + 2.0).ln();
    (LogValue::from_ln(ln_mu), LogValue::from_ln(ln_mu + LIPSCHITZ_FACTOR.ln()))
}

/// `25 C^2 n^2 R^n / sigma`; also bounds `T = T_max + 1`.
pub fn t_max_bound(p: &SystemParams) -> LogValue {
    t_max_bound_with_sigma(p, sigma(p))
}

pub fn t_max_bound_with_sigma(p: &SystemParams, sigma: LogValue) -> LogValue {
    LogValue::from_ln(TRANSIT_NUMERATOR.ln() + p.ln_c2n2rn()).div(sigma)
}

/// `epsilon`, `delta = sqrt(epsilon)`, `lambda = sqrt(delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonChain {
    pub epsilon: LogValue,
    pub delta: LogValue,
    pub lambda: LogValue,
    /// `ln(-ln delta) - ln(L T)`; zero up to rounding since the two agree identically.
    pub delta_margin: f64,
}

/// `ln(300 C^2 n^2 R^n (R+2)^n / sigma)`, the log of `-ln epsilon`.
fn ln_epsilon_exponent(p: &SystemParams, sigma: LogValue) -> f64 {
    EPSILON_NUMERATOR.ln() + p.ln_c2n2rn() + p.nf() * (p.r + 2.0).ln() - sigma.ln()
}

pub fn epsilon_chain(p: &SystemParams) -> Result<EpsilonChain> {
    epsilon_chain_with_sigma(p, sigma(p))
}

pub fn epsilon_chain_with_sigma(p: &SystemParams, sigma: LogValue) -> Result<EpsilonChain> {
    let epsilon = LogValue::exp_neg_exp(ln_epsilon_exponent(p, sigma));
    let delta = epsilon.sqrt();
    let lambda = delta.sqrt();

    // delta <= exp(-L T) with T bounded by the transit-time bound.
    let (_, lip) = mu_l_log(p);
    let ln_lt = lip.ln() + t_max_bound_with_sigma(p, sigma).ln();
    let ln_neg_ln_delta = delta
        .ln_neg_ln()
        .ok_or_else(|| Error::Consistency("delta is not below 1".into()))?;
    let delta_margin = ln_neg_ln_delta - ln_lt;
    if delta_margin < -IDENTITY_TOL * ln_lt.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "delta <= exp(-L T) violated: ln(-ln delta) = {ln_neg_ln_delta}, ln(L T) = {ln_lt}"
        )));
    }
    Ok(EpsilonChain { epsilon, delta, lambda, delta_margin })
}

/// `(R+2) / (|a1| sigma)`, the last link of the Bernstein-index estimate.
pub fn bernstein_bound(p: &SystemParams) -> LogValue {
    bernstein_bound_with_sigma(p, sigma(p))
}

pub fn bernstein_bound_with_sigma(p: &SystemParams, sigma: LogValue) -> LogValue {
    LogValue::from_f64(p.r + 2.0)
        .div(LogValue::from_f64(p.abs_a1()))
        .div(sigma)
}

/// `ln(2 (R+2) / (pi |a1| sigma))`, the middle link of the Bernstein estimate.
pub fn bernstein_middle_link(p: &SystemParams) -> f64 {
    (2.0 * (p.r + 2.0) / (PI * p.abs_a1())).ln() - sigma(p).ln()
}

/// Growth-and-Zeros count bound `exp(2 |D| / epsilon) * b`.
///
/// `b` is the Bernstein index itself (the logarithm of the growth ratio).
pub fn growth_zeros_count(d_len: f64, eps: LogValue, b: LogValue) -> Result<LogLogValue> {
    if !(d_len > 0.0) {
        return Err(Error::Degenerate("segment D has zero length".into()));
    }
    if eps.is_zero() {
        return Err(Error::Degenerate("epsilon must be positive".into()));
    }
    // ln ln q = ln(2|D|) - ln(eps) + ln(1 + ln(b) eps / (2|D|))
    let ln_2d = (2.0 * d_len).ln();
    let ln_b = b.ln();
    let ratio = if ln_b == 0.0 {
        0.0
    } else {
        let mag = ln_b.abs().ln() + eps.ln() - ln_2d;
        ln_b.signum() * mag.exp()
    };
    if ratio <= -1.0 {
        return Err(Error::Degenerate("count bound is below 1".into()));
    }
    let corr = if ratio.abs() < NEGLIGIBLE { 0.0 } else { ratio.ln_1p() };
    // -ln eps may itself overflow; carry one more logarithm.
    let ln_neg_ln_eps = eps.ln_neg_ln();
    let loglog = match ln_neg_ln_eps {
        Some(w) if w > 700.0 => {
            // ln ln q = e^w (1 + (ln 2|D| + corr) e^{-w})
            let rest = (ln_2d + corr) * (-w).exp();
            LogValue::from_ln(w + rest.ln_1p())
        }
        _ => {
            let v = ln_2d - eps.ln() + corr;
            if !(v > 0.0) {
                return Err(Error::Degenerate("count bound is below e".into()));
            }
            LogValue::from_f64(v)
        }
    };
    Ok(LogLogValue { loglog })
}

/// `ln` of the inner exponent of the final theorem,
/// `38400 C^4 n^2 R^{n+1} (R+2)^{n+1} / (|a1|^3 (2-|a1|)^2) e^{16 pi / (2-|a1|)}`.
pub fn final_exponent_closed_form(p: &SystemParams) -> f64 {
    let a = p.abs_a1();
    let n = p.nf();
    FINAL_NUMERATOR.ln() + 4.0 * p.c.ln() + 2.0 * n.ln() + (n + 1.0) * (p.r.ln() + (p.r + 2.0).ln())
        - 3.0 * a.ln()
        - 2.0 * (2.0 - a).ln()
        + FINAL_EXPONENT / (2.0 - a)
}

/// `ln` of the chained form `600 C^2 n^2 R^{n+1} (R+2)^{n+1} / (|a1| sigma^2)`.
pub fn final_exponent_chained(p: &SystemParams, sigma: LogValue) -> f64 {
    let n = p.nf();
    CHAIN_NUMERATOR.ln() + 2.0 * p.c.ln() + 2.0 * n.ln() + (n + 1.0) * (p.r.ln() + (p.r + 2.0).ln())
        - p.abs_a1().ln()
        - 2.0 * sigma.ln()
}

/// The final count bound `exp(exp(A))`, stored as `ln A`.
///
/// Re-derives the proof's inequality chain and fails with
/// [`Error::Consistency`] if any link does not hold.
pub fn final_bound(p: &SystemParams) -> Result<LogLogValue> {
    let s = sigma(p);
    let closed = final_exponent_closed_form(p);
    let chained = final_exponent_chained(p, s);
    let rel = (closed - chained).abs() / closed.abs().max(1.0);
    if rel > CROSS_FORM_TOL {
        return Err(Error::Consistency(format!(
            "closed form ln A = {closed} disagrees with chained form {chained}"
        )));
    }
    check_final_chain(p, s, closed)?;
    Ok(LogLogValue::from_ln_loglog(closed))
}

/// Links of the final estimate, in ln-ln space:
/// `exp(2R e^X) B < exp(2RB e^X) < exp(e^{2RB X})`, where
/// `X = 300 C^2 n^2 R^n (R+2)^n / sigma` and `B` is the Bernstein bound.
fn check_final_chain(p: &SystemParams, sigma: LogValue, ln_a: f64) -> Result<()> {
    let ln_x = ln_epsilon_exponent(p, sigma);
    let ln_b = bernstein_bound_with_sigma(p, sigma).ln();
    let ln_2r = (2.0 * p.r).ln();

    // Direct Growth-and-Zeros value with |D| = R and b = B.
    let eps = LogValue::exp_neg_exp(ln_x);
    let direct = growth_zeros_count(p.r, eps, LogValue::from_ln(ln_b))?;

    // ln ln of exp(2RB e^X): ln(2RB) + X, then one more ln.
    let ln_2rb = ln_2r + ln_b;
    let middle = ln_x + (ln_2rb * (-ln_x).exp()).ln_1p();
    // ln of 2RB X.
    let last = ln_2rb + ln_x;

    let slack = IDENTITY_TOL * ln_a.abs().max(1.0);
    if direct.ln_loglog() > middle + slack {
        return Err(Error::Consistency("Growth-and-Zeros value exceeds the first relaxation".into()));
    }
    if middle > last + slack {
        return Err(Error::Consistency("a e^X < e^{aX} relaxation fails".into()));
    }
    if (last - ln_a).abs() > CROSS_FORM_TOL * ln_a.abs().max(1.0) {
        return Err(Error::Consistency(format!("2RBX = {last} does not match ln A = {ln_a}")));
    }
    Ok(())
}

/// Every quantity of the bound for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: SystemParams,
    /// False when `sigma` was overridden by the caller.
    pub certified: bool,
    pub sigma: LogValue,
    pub omega: LogValue,
    pub alpha: LogValue,
    pub mu: f64,
    #[serde(rename = "L_lip")]
    pub l_lip: f64,
    pub t_max_bound: LogValue,
    pub delta: LogValue,
    pub lambda: LogValue,
    pub epsilon: LogValue,
    pub bernstein: LogValue,
    pub final_bound: LogLogValue,
}

impl BoundReport {
    pub fn compute(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        let s = sigma(p);
        let mut report = Self::assemble(p, s)?;
        report.final_bound = final_bound(p)?;
        check_sigma_identity(p, s)?;
        Ok(report)
    }

    /// Same quantities with a user-supplied trap radius. Marked uncertified;
    /// the final bound is still the certified closed form.
    pub fn with_sigma_override(p: &SystemParams, sigma_override: f64) -> Result<Self> {
        p.validate()?;
        if !(sigma_override > 0.0 && sigma_override.is_finite()) {
            return Err(Error::InvalidParams("sigma override must be positive".into()));
        }
        let mut report = Self::assemble(p, LogValue::from_f64(sigma_override))?;
        report.certified = false;
        report.final_bound = final_bound(p)?;
        Ok(report)
    }

    fn assemble(p: &SystemParams, s: LogValue) -> Result<Self> {
        let (omega, alpha) = strip_params_with_sigma(p, s);
        let (mu, l_lip) = mu_l(p)?;
        let chain = epsilon_chain_with_sigma(p, s)?;
        Ok(Self {
            params: *p,
            certified: true,
            sigma: s,
            omega,
            alpha,
            mu,
            l_lip,
            t_max_bound: t_max_bound_with_sigma(p, s),
            delta: chain.delta,
            lambda: chain.lambda,
            epsilon: chain.epsilon,
            bernstein: bernstein_bound_with_sigma(p, s),
            final_bound: LogLogValue::from_ln_loglog(0.0),
        })
    }
}

/// `sigma e^{8 pi / (2-|a1|)} = |a1| (2-|a1|) / (8C) <= (2-|a1|) / (4C)`, in log space.
/// Returns the slack `ln((2-|a1|)/(4C)) - ln(sigma e^{...})`.
pub fn check_sigma_identity(p: &SystemParams, s: LogValue) -> Result<f64> {
    let a = p.abs_a1();
    let lhs = s.ln() + TRAP_EXPONENT / (2.0 - a);
    let prefactor = (a * (2.0 - a) / (TRAP_DENOMINATOR * p.c)).ln();
    if (lhs - prefactor).abs() > IDENTITY_TOL * prefactor.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "sigma identity: {lhs} vs {prefactor}"
        )));
    }
    let slack = trap_ball_radius(p).ln() - lhs;
    if slack < 0.0 {
        return Err(Error::Consistency("sigma exceeds the trap-ball scale".into()));
    }
    Ok(slack)
}
