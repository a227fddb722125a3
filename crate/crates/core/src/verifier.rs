//! Sampling checks of every inequality the bound is built from.
//!
//! Each check reports a scale-normalized margin, `(RHS - LHS) / |RHS|` unless
//! noted otherwise, and passes when the worst margin is nonnegative.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, SystemParams, HAUSDORFF_FACTOR, IDENTITY_TOL};
use crate::cycles::{self, CycleSet};
use crate::dynamics::{self, PolarState, ReturnConfig};
use crate::error::{Error, Result};
use crate::integrator::{Dopri5, ErrorControl};
use crate::logspace::LogValue;
use crate::polynomial::{self, GrowthProperty, PolynomialSpec};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_STRIP_ORBITS: usize = 32;
pub const DEFAULT_TRANSIT_SAMPLES: usize = 32;
/// Points with `|cos phi|` below this are left out of the radial sign check.
pub const COS_EXCLUSION: f64 = 1e-6;
/// Below this the trap radius is handled algebraically rather than sampled.
pub const SAMPLEABLE_RADIUS: f64 = 1e-290;
/// Decades spanned by log-radial samples under the outer radius.
const RADIAL_DECADES: f64 = 12.0;
/// `lambda + (2C + 1) delta` must stay this factor below `sigma`.
const PI_DELTA_FACTOR: f64 = 1e3;
/// Slack on `r >= sigma` for orbits that start on the inner circle.
const START_SLACK: f64 = 1e-9;
const STRIP_MAX_TIME: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub lemma_id: String,
    pub points_checked: usize,
    pub worst_margin: f64,
    pub passed: bool,
    #[serde(default)]
    pub skipped: bool,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl CheckResult {
    fn from_margins(id: &str, margins: Vec<(f64, Witness)>) -> Self {
        let worst = margins
            .iter()
            .copied()
            .reduce(|a, b| if b.0 < a.0 { b } else { a });
        match worst {
            Some((m, w)) => Self {
                lemma_id: id.into(),
                points_checked: margins.len(),
                worst_margin: m,
                passed: m >= 0.0,
                skipped: false,
                witness: Some(w),
                note: None,
            },
            None => Self::skipped(id, "no admissible sample points"),
        }
    }

    fn skipped(id: &str, why: &str) -> Self {
        Self {
            lemma_id: id.into(),
            points_checked: 0,
            worst_margin: 0.0,
            passed: true,
            skipped: true,
            witness: None,
            note: Some(why.into()),
        }
    }

    /// Margin established without sampling.
    fn algebraic(id: &str, margin: f64, note: String) -> Self {
        Self {
            lemma_id: id.into(),
            points_checked: 0,
            worst_margin: margin,
            passed: margin >= 0.0,
            skipped: false,
            witness: None,
            note: Some(note),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: SystemParams,
    pub polynomial: PolynomialSpec,
    pub seed: u64,
    /// False when the trap radius was overridden.
    pub certified: bool,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.lemma_id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub samples: usize,
    pub strip_orbits: usize,
    pub transit_samples: usize,
    pub grid_points: usize,
    pub tol: f64,
    pub seed: u64,
    pub sigma_override: Option<f64>,
    /// Run the integration-based checks (strip, Hausdorff, transit time).
    pub dynamics: bool,
    /// Reuse a cycle scan instead of running one for the transit-time check.
    pub cycles: Option<CycleSet>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            strip_orbits: DEFAULT_STRIP_ORBITS,
            transit_samples: DEFAULT_TRANSIT_SAMPLES,
            grid_points: cycles::DEFAULT_GRID_POINTS,
            tol: dynamics::DEFAULT_TOL,
            seed: DEFAULT_SEED,
            sigma_override: None,
            dynamics: true,
            cycles: None,
        }
    }
}

/// Order of checks in a report; also selects each check's random stream.
pub const CHECK_IDS: [&str; 11] = [
    "growth_properties",
    "tail_bound",
    "trap_ball",
    "sigma_radius_sign",
    "velocity_bound",
    "eps_verif",
    "pi_delta",
    "strip_transit",
    "hausdorff",
    "transit_time",
    "omega_in_g",
];

fn stream(seed: u64, id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = CHECK_IDS.iter().position(|c| *c == id).expect("known check id");
    rng.set_stream(idx as u64 + 1);
    rng
}

fn margin_le(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / rhs.abs()
}

/// Log-uniform radii in `[r_hi 10^-12, r_hi]` with uniform angles, plus the
/// four axis directions at both ends and an outer shell.
fn log_radial(rng: &mut ChaCha8Rng, r_hi: f64, count: usize) -> Vec<PolarState> {
    let r_lo = (r_hi * 10f64.powf(-RADIAL_DECADES)).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(count + 8);
    for k in 0..4 {
        let phi = k as f64 * PI / 2.0;
        out.push(PolarState { r: r_hi, phi });
        out.push(PolarState { r: r_lo, phi });
    }
    let shell = count / 8;
    for _ in 0..shell {
        out.push(PolarState { r: r_hi, phi: rng.gen_range(0.0..TAU) });
    }
    let (a, b) = (r_lo.ln(), r_hi.ln());
    while out.len() < count + 8 {
        let r = rng.gen_range(a..=b).exp().min(r_hi);
        out.push(PolarState { r, phi: rng.gen_range(0.0..TAU) });
    }
    out
}

fn witness(s: &PolarState) -> Witness {
    let p = s.to_plane();
    Witness { x: p.x, y: p.y }
}

fn sigma_of(p: &SystemParams, cfg: &VerifyConfig) -> LogValue {
    cfg.sigma_override.map_or_else(|| bounds::sigma(p), LogValue::from_f64)
}

pub fn check_growth_properties(f: &PolynomialSpec, p: &SystemParams) -> Result<CheckResult> {
    let c = f.coeff_bound().ok_or(Error::NotPaperMode("growth-property check"))?;
    let checks = [
        (GrowthProperty::ValueOnInterval, (c + 1.0).max(p.r + 2.0)),
        (GrowthProperty::DerivativeOnInterval, p.r.max(1.0)),
        (GrowthProperty::ComplexDisc, 0.5),
    ];
    let mut margins = Vec::new();
    let mut total = 0;
    for (prop, x) in checks {
        let m = polynomial::check_growth_property(f, prop, x, polynomial::DEFAULT_PROPERTY_SAMPLES)?;
        total += m.samples;
        margins.push((1.0 - m.worst_ratio, Witness { x: m.witness.0, y: m.witness.1 }));
    }
    let mut res = CheckResult::from_margins("growth_properties", margins);
    res.points_checked = total;
    Ok(res.with_note("worst 1 - LHS/RHS over the three properties; witness is a point of the complex plane"))
}

/// `|sum_{i>=2} a_i x^{i-1}| <= 2 C r` on `B_{1/2}`.
pub fn check_tail_bound(f: &PolynomialSpec, p: &SystemParams, samples: usize, seed: u64) -> CheckResult {
    let pts = log_radial(&mut stream(seed, "tail_bound"), 0.5, samples);
    let margins = pts
        .par_iter()
        .map(|s| {
            let x = s.r * s.phi.cos();
            (margin_le(f.tail(x).abs(), 2.0 * p.c * s.r), witness(s))
        })
        .collect();
    CheckResult::from_margins("tail_bound", margins)
}

/// `phi' <= (|a1| - 2) / 4` and `|r'| <= 2 r` on the trap ball.
pub fn check_trap_ball(f: &PolynomialSpec, p: &SystemParams, samples: usize, seed: u64) -> Result<CheckResult> {
    let radius = bounds::trap_ball_radius(p);
    let rhs_phi = (p.a1.abs() - 2.0) / 4.0;
    let pts = log_radial(&mut stream(seed, "trap_ball"), radius, samples);
    let margins = pts
        .par_iter()
        .map(|s| {
            let (dr, dphi) = dynamics::polar_derivatives(f, s)?;
            let m = margin_le(dphi, rhs_phi).min(margin_le(dr.abs(), 2.0 * s.r));
            Ok((m, witness(s)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckResult::from_margins("trap_ball", margins))
}

/// `sign(r') = sign(-a1)` on `B_sigma` away from the `y` axis. The margin is
/// `sign(-a1) r' / (|a1| r cos^2 phi)`, which the tail bound keeps above 1/2.
pub fn check_sigma_radius_sign(
    f: &PolynomialSpec,
    p: &SystemParams,
    sigma: LogValue,
    samples: usize,
    seed: u64,
) -> Result<CheckResult> {
    const ID: &str = "sigma_radius_sign";
    let s_hi = sigma.to_f64();
    let a = p.a1.abs();
    if s_hi < SAMPLEABLE_RADIUS {
        // r' = -r cos^2(phi) (a1 + O) with |O| <= 2 C sigma.
        let ratio = LogValue::from_f64(2.0 * p.c).mul(sigma).div(LogValue::from_f64(a)).to_f64();
        return Ok(CheckResult::algebraic(
            ID,
            1.0 - ratio,
            format!("sigma = exp({:.6e}) is below double range; margin 1 - 2 C sigma / |a1| from the tail bound", sigma.ln()),
        ));
    }
    let sign = -p.a1.signum();
    let pts: Vec<_> = log_radial(&mut stream(seed, ID), s_hi, samples)
        .into_iter()
        .filter(|s| s.phi.cos().abs() > COS_EXCLUSION)
        .collect();
    let margins = pts
        .par_iter()
        .map(|s| {
            let (dr, _) = dynamics::polar_derivatives(f, s)?;
            let cos = s.phi.cos();
            Ok((sign * dr / (a * s.r * cos * cos), witness(s)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckResult::from_margins(ID, margins)
        .with_note(format!("points with |cos phi| <= {COS_EXCLUSION:e} excluded; margin is normalized r' (expected >= 1/2)")))
}

/// `|x'| + |y'| <= 3 (R+2)^n` on `B_{R+2}`.
pub fn check_velocity_bound(f: &PolynomialSpec, p: &SystemParams, samples: usize, seed: u64) -> Result<CheckResult> {
    let (mu, _) = bounds::mu_l(p)?;
    let rho = p.r + 2.0;
    let mut rng = stream(seed, "velocity_bound");
    let mut pts = vec![
        PolarState { r: 0.0, phi: 0.0 },
        PolarState { r: rho, phi: 0.0 },
        PolarState { r: rho, phi: PI },
        PolarState { r: rho, phi: PI / 2.0 },
        PolarState { r: rho, phi: 1.5 * PI },
    ];
    for _ in 0..samples / 8 {
        pts.push(PolarState { r: rho, phi: rng.gen_range(0.0..TAU) });
    }
    while pts.len() < samples + 5 {
        pts.push(PolarState { r: rho * rng.gen::<f64>().sqrt(), phi: rng.gen_range(0.0..TAU) });
    }
    let margins = pts
        .par_iter()
        .map(|s| {
            let st = s.to_plane();
            let (dx, dy) = dynamics::vector_field(f, &st);
            (margin_le(dx.abs() + dy.abs(), mu), Witness { x: st.x, y: st.y })
        })
        .collect();
    Ok(CheckResult::from_margins("velocity_bound", margins))
}

/// `delta <= exp(-L T_max)`, exact up to rounding, compared as `ln(-ln delta)` against `ln(L T)`.
pub fn check_eps_verif(p: &SystemParams, sigma: LogValue) -> Result<CheckResult> {
    let chain = bounds::epsilon_chain_with_sigma(p, sigma)?;
    let (_, lip) = bounds::mu_l_log(p);
    let ln_lt = lip.ln() + bounds::t_max_bound_with_sigma(p, sigma).ln();
    let scale = ln_lt.abs().max(1.0);
    let margin = chain.delta_margin / scale + IDENTITY_TOL;
    Ok(CheckResult {
        lemma_id: "eps_verif".into(),
        points_checked: 1,
        worst_margin: margin,
        passed: margin >= 0.0,
        skipped: false,
        witness: Some(Witness { x: chain.delta.ln_neg_ln().unwrap_or(f64::INFINITY), y: ln_lt }),
        note: Some(format!(
            "equality case; margin includes a {IDENTITY_TOL:e} rounding allowance; witness is (ln(-ln delta), ln(L T))"
        )),
    })
}

/// `lambda + (2C + 1) delta < sigma / 10^3`, entirely in log space.
pub fn check_pi_delta(p: &SystemParams, sigma: LogValue) -> Result<CheckResult> {
    let chain = bounds::epsilon_chain_with_sigma(p, sigma)?;
    let lhs = chain.lambda.add(chain.delta.mul(LogValue::from_f64(2.0 * p.c + 1.0)));
    let rhs = sigma.div(LogValue::from_f64(PI_DELTA_FACTOR));
    let (ln_lhs, ln_rhs) = (lhs.ln(), rhs.ln());
    let margin = if ln_lhs == f64::NEG_INFINITY || !ln_lhs.is_finite() {
        1.0
    } else {
        (ln_rhs - ln_lhs) / ln_lhs.abs()
    };
    Ok(CheckResult {
        lemma_id: "pi_delta".into(),
        points_checked: 1,
        worst_margin: margin,
        passed: margin >= 0.0,
        skipped: false,
        witness: Some(Witness { x: ln_rhs, y: ln_lhs }),
        note: Some("margin (ln(sigma/1e3) - ln LHS) / |ln LHS|; witness is (ln(sigma/1e3), ln(lambda + (2C+1) delta))".into()),
    })
}

/// Strip parameters `(omega, alpha)` as floats, if representable.
fn strip_floats(p: &SystemParams, sigma: LogValue) -> Option<(f64, f64)> {
    let (omega, alpha) = bounds::strip_params_with_sigma(p, sigma);
    let (o, a) = (omega.to_f64(), alpha.to_f64());
    (a >= SAMPLEABLE_RADIUS).then_some((o, a))
}

enum Transit {
    Done(f64),
    LeftG,
}

/// Time spent in `|y - F(x)| <= alpha` by the orbit entering at `(x0, F(x0) + s alpha)`, `s = sign x0`,
/// integrated in the coordinates `(x, u = y - F(x))`.
fn strip_transit(f: &PolynomialSpec, x0: f64, alpha: f64, sigma: f64, r_ball: f64, tol: f64) -> Result<Transit> {
    let s = x0.signum();
    let df = f.deriv();
    let fprime = move |x: f64| df.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let field = |_t: f64, z: &[f64; 2]| [z[1], -z[0] - fprime(z[0]) * z[1]];
    let control = ErrorControl::Mixed { rtol: tol, atol: [tol * r_ball, tol * alpha] };
    let mut solver = Dopri5::new(field, 0.0, [x0, s * alpha], control);
    loop {
        if solver.t() > STRIP_MAX_TIME {
            return Ok(Transit::Done(solver.t()));
        }
        // Resolving the crossing needs several steps across the strip.
        let speed = solver.eval_field(solver.t(), &solver.y())[1].abs();
        solver.set_h_max(if speed > 0.0 { 0.25 * alpha / speed } else { f64::INFINITY });
        let span = solver.step()?;
        let [x1, u1] = span.y1;
        let y1 = f.eval(x1) + u1;
        let r = x1.hypot(y1);
        if r > r_ball || r < sigma {
            return Ok(Transit::LeftG);
        }
        if s * u1 < -alpha {
            let (mut lo, mut hi) = (span.t0, span.t1);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if s * span.interpolate(mid)[1] < -alpha {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Transit::Done(0.5 * (lo + hi)));
        }
        if s * u1 > alpha * (1.0 + 1e-6) {
            return Err(Error::Consistency(format!("orbit from x = {x0} left the strip through its entry side")));
        }
    }
}

/// Transit time through `S_alpha` at most 1, plus the differential inequality
/// `sign(x) d/dt (y - F(x)) <= -2 alpha` for `|x| > omega`.
pub fn check_strip_transit(f: &PolynomialSpec, p: &SystemParams, sigma: LogValue, cfg: &VerifyConfig) -> Result<CheckResult> {
    const ID: &str = "strip_transit";
    let s_f = sigma.to_f64();
    let Some((omega, alpha)) = strip_floats(p, sigma) else {
        return Ok(CheckResult::skipped(ID, "strip width below double range"));
    };
    let mut rng = stream(cfg.seed, ID);
    let in_g = |x: f64, u: f64| {
        let r = x.hypot(f.eval(x) + u);
        r >= s_f && r <= p.r
    };
    let draw = |lo: f64, rng: &mut ChaCha8Rng| -> Option<f64> {
        for _ in 0..1000 {
            let x = rng.gen_range(lo.ln()..p.r.ln()).exp();
            let x = if rng.gen::<bool>() { x } else { -x };
            if in_g(x, 0.0) {
                return Some(x);
            }
        }
        None
    };

    let starts: Vec<f64> = (0..cfg.strip_orbits).filter_map(|_| draw(2.0 * s_f.max(omega), &mut rng)).collect();
    let transits = starts
        .par_iter()
        .map(|&x0| Ok((x0, strip_transit(f, x0, alpha, s_f, p.r, cfg.tol)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut margins = Vec::new();
    let mut inconclusive = 0;
    let mut longest = 0.0f64;
    for (x0, t) in transits {
        match t {
            Transit::Done(t) => {
                longest = longest.max(t);
                let m = if t > 0.0 { margin_le(t, 1.0) } else { -1.0 };
                margins.push((m, Witness { x: x0, y: f.eval(x0) + x0.signum() * alpha }));
            }
            Transit::LeftG => inconclusive += 1,
        }
    }
    let orbits = margins.len();

    let mut spots = Vec::new();
    for _ in 0..cfg.samples / 10 {
        if let Some(x) = draw(omega, &mut rng) {
            let u = rng.gen_range(-alpha..=alpha);
            if in_g(x, u) {
                spots.push((x, u));
            }
        }
    }
    margins.par_extend(spots.par_iter().map(|&(x, u)| {
        let du = -x - f.deriv_eval(x) * u;
        (margin_le(x.signum() * du, -2.0 * alpha), Witness { x, y: f.eval(x) + u })
    }));

    let mut res = CheckResult::from_margins(ID, margins);
    res.note = Some(format!(
        "{orbits} transits (longest {longest:.3e}), {inconclusive} inconclusive (left G), {} derivative spot checks",
        spots.len()
    ));
    Ok(res)
}

/// One turn from `(0, sigma)` in the expanding direction moves the section
/// point by at least `(pi |a1| / 2) sigma`. Margin is `(measured - bound) / bound`.
pub fn check_hausdorff(f: &PolynomialSpec, p: &SystemParams, sigma: LogValue, tol: f64) -> Result<CheckResult> {
    const ID: &str = "hausdorff";
    let s = sigma.to_f64();
    if s < SAMPLEABLE_RADIUS {
        return Ok(CheckResult::skipped(ID, "sigma below double range"));
    }
    let dir = cycles::expanding_direction(f);
    let ret = dynamics::poincare_map_with(f, s, dir, &ReturnConfig::for_ball(tol, p.r))?;
    let growth = (ret.y_out - s).abs();
    let bound = HAUSDORFF_FACTOR * p.a1.abs() * s;
    Ok(CheckResult {
        lemma_id: ID.into(),
        points_checked: 1,
        worst_margin: (growth - bound) / bound,
        passed: growth >= bound,
        skipped: false,
        witness: Some(Witness { x: 0.0, y: ret.y_out }),
        note: Some(format!("{dir:?} map, one-turn growth {:.6e} sigma", growth / s)),
    })
}

/// Return times on `D = [sigma, Y]` against the transit-time bound in log
/// space, and the orbits' containment in `G = B_R \ B_sigma`.
pub fn check_transit_time(
    f: &PolynomialSpec,
    p: &SystemParams,
    sigma: LogValue,
    cs: &CycleSet,
    n_samples: usize,
    tol: f64,
) -> Result<[CheckResult; 2]> {
    let s = sigma.to_f64();
    if !(cs.y_outer > 0.0) {
        return Ok([
            CheckResult::skipped("transit_time", "no cycle inside B_R, so D is empty"),
            CheckResult::skipped("omega_in_g", "no cycle inside B_R, so D is empty"),
        ]);
    }
    if s < SAMPLEABLE_RADIUS {
        return Ok([
            CheckResult::skipped("transit_time", "sigma below double range"),
            CheckResult::skipped("omega_in_g", "sigma below double range"),
        ]);
    }
    let dir = cycles::expanding_direction(f);
    let rc = ReturnConfig::for_ball(tol, p.r);
    let grid = cycles::log_grid(s, cs.y_outer, n_samples.max(2));
    let rets = grid
        .par_iter()
        .map(|&y| dynamics::poincare_map_with(f, y, dir, &rc))
        .collect::<Result<Vec<_>>>()?;
    let ln_bound = bounds::t_max_bound_with_sigma(p, sigma).ln();
    let mut time = Vec::new();
    let mut contain = Vec::new();
    for (&y, r) in grid.iter().zip(&rets) {
        let w = Witness { x: 0.0, y };
        let m = if r.transit_time > 0.0 { (ln_bound - r.transit_time.ln()) / ln_bound.abs() } else { -1.0 };
        time.push((m, w));
        let inner = (r.min_radius - s * (1.0 - START_SLACK)) / s;
        let outer = (p.r - r.max_radius) / p.r;
        contain.push((inner.min(outer), w));
    }
    let longest = rets.iter().map(|r| r.transit_time).fold(0.0, f64::max);
    Ok([
        CheckResult::from_margins("transit_time", time)
            .with_note(format!("longest return {longest:.6e} vs bound exp({ln_bound:.6e}); margin in log space")),
        CheckResult::from_margins("omega_in_g", contain)
            .with_note(format!("sampled return orbits stay in B_R minus B_sigma; {START_SLACK:e} slack at the start circle")),
    ])
}

/// All checks for one polynomial.
pub fn verify(f: &PolynomialSpec, p: &SystemParams, cfg: &VerifyConfig) -> Result<VerificationReport> {
    p.validate()?;
    if !f.is_paper_mode() {
        return Err(Error::NotPaperMode("verification"));
    }
    if let Some(s) = cfg.sigma_override {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma override must be positive, got {s}")));
        }
    }
    crate::integrator::check_tolerance(cfg.tol)?;
    let sigma = sigma_of(p, cfg);
    let seed = cfg.seed;
    let mut checks = vec![
        check_growth_properties(f, p)?,
        check_tail_bound(f, p, cfg.samples, seed),
        check_trap_ball(f, p, cfg.samples, seed)?,
        check_sigma_radius_sign(f, p, sigma, cfg.samples, seed)?,
        check_velocity_bound(f, p, cfg.samples, seed)?,
        check_eps_verif(p, sigma)?,
        check_pi_delta(p, sigma)?,
    ];
    if cfg.dynamics {
        checks.push(check_strip_transit(f, p, sigma, cfg)?);
        checks.push(check_hausdorff(f, p, sigma, cfg.tol)?);
        let scanned;
        let cs = match &cfg.cycles {
            Some(cs) => cs,
            None => {
                scanned = scan_for_transit(f, p, sigma, cfg)?;
                &scanned
            }
        };
        checks.extend(check_transit_time(f, p, sigma, cs, cfg.transit_samples, cfg.tol)?);
    }
    Ok(VerificationReport { params: *p, polynomial: f.clone(), seed, certified: cfg.sigma_override.is_none(), checks })
}

fn scan_for_transit(f: &PolynomialSpec, p: &SystemParams, sigma: LogValue, cfg: &VerifyConfig) -> Result<CycleSet> {
    let y_lo = sigma.to_f64().max(cycles::Y_MIN_NUMERIC);
    let mut sc = cycles::ScanConfig::new(y_lo, p.r);
    sc.grid_points = cfg.grid_points;
    sc.tol = cfg.tol;
    Ok(cycles::scan_interval(f, &sc)?.set)
}

/// How a random suite draws its polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecipe {
    pub seed: u64,
    pub count: usize,
    /// Fixed degree, or uniform over {2, 4, 6}.
    pub n: Option<u32>,
    #[serde(rename = "C")]
    pub c: f64,
    /// Fixed `a1`, or uniform over `(-1.9, -0.1) U (0.1, 1.9)`.
    pub a1: Option<f64>,
    #[serde(rename = "R")]
    pub r: f64,
}

impl SuiteRecipe {
    pub fn polynomials(&self) -> Result<Vec<(SystemParams, PolynomialSpec)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|_| {
                let n = self.n.unwrap_or_else(|| [2, 4, 6][rng.gen_range(0..3)]);
                let a1 = self.a1.unwrap_or_else(|| {
                    let m = rng.gen_range(0.1..1.9);
                    if rng.gen::<bool>() { m } else { -m }
                });
                let p = SystemParams::new(n, self.c, a1, self.r)?;
                let f = PolynomialSpec::random_c_monic(&mut rng, n as usize, self.c, a1)?;
                Ok((p, f))
            })
            .collect()
    }
}

pub fn verify_suite(recipe: &SuiteRecipe, cfg: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    let cases = recipe.polynomials()?;
    cases.par_iter().map(|(p, f)| verify(f, p, cfg)).collect()
}
