//! The Liénard vector field, its polar form, trajectories, and first-return
//! maps on the section `{x = 0, y > 0}`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{check_tolerance, Dopri5, ErrorControl, Span, Stats};
use crate::polynomial::PolynomialSpec;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_TIME: f64 = 1e6;
pub const DEFAULT_MAX_STEPS: usize = 2_000_000;
/// Relative accuracy `|x| < CROSSING_TOL * y0` of a located section crossing.
pub const CROSSING_TOL: f64 = 1e-12;
/// Largest rotation allowed in one accepted step, in radians.
const MAX_STEP_ROTATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneState {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl PlaneState {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, t: 0.0 }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub r: f64,
    pub phi: f64,
}

impl PolarState {
    pub fn to_plane(&self) -> PlaneState {
        PlaneState::new(self.r * self.phi.cos(), self.r * self.phi.sin())
    }
}

/// `(y - F(x), -x)`.
pub fn vector_field(f: &PolynomialSpec, s: &PlaneState) -> (f64, f64) {
    (s.y - f.eval(s.x), -s.x)
}

/// `(r', phi')` where `r' = -cos(phi) F(r cos phi)` and
/// `phi' = -1 + sin(phi) F(r cos phi) / r`.
pub fn polar_derivatives(f: &PolynomialSpec, s: &PolarState) -> Result<(f64, f64)> {
    if !(s.r > 0.0) {
        return Err(Error::Degenerate("polar derivatives need r > 0".into()));
    }
    let (sin, cos) = s.phi.sin_cos();
    let fx = f.eval(s.r * cos);
    Ok((-cos * fx, -1.0 + sin * fx / s.r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    /// Time-reversed field; the first return is `P^{-1}`.
    Inverse,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Inverse => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub max_error_estimate: f64,
}

impl From<Stats> for IntegratorStats {
    fn from(s: Stats) -> Self {
        Self { steps: s.accepted, rejected: s.rejected, max_error_estimate: s.max_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<PlaneState>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn last(&self) -> PlaneState {
        *self.states.last().expect("trajectory always holds its start")
    }

    /// `t,x,y` rows with 17 significant digits; every `thin`-th sample plus the last.
    pub fn to_csv(&self, thin: usize) -> String {
        let thin = thin.max(1);
        let mut out = String::from("t,x,y\n");
        let last = self.states.len() - 1;
        for (i, s) in self.states.iter().enumerate() {
            if i % thin == 0 || i == last {
                out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s.t, s.x, s.y));
            }
        }
        out
    }
}

fn field(f: &PolynomialSpec, sign: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_t, u| [sign * (u[1] - f.eval(u[0])), -sign * u[0]]
}

/// Adaptive integration from `s0` over `t_end` time units.
pub fn integrate(f: &PolynomialSpec, s0: &PlaneState, t_end: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(f, s0, t_end, tol, DEFAULT_MAX_STEPS)
}

pub fn integrate_with(
    f: &PolynomialSpec,
    s0: &PlaneState,
    t_end: f64,
    tol: f64,
    max_steps: usize,
) -> Result<Trajectory> {
    check_tolerance(tol)?;
    let sign = if t_end >= 0.0 { 1.0 } else { -1.0 };
    let span_len = t_end.abs();
    let mut solver = Dopri5::new(field(f, sign), 0.0, [s0.x, s0.y], ErrorControl::NormRelative(tol));
    let mut states = vec![*s0];
    while solver.t() < span_len {
        if solver.stats().accepted >= max_steps {
            return Err(Error::MaxSteps(max_steps));
        }
        let remaining = span_len - solver.t();
        solver.set_h_max(remaining);
        let span = solver.step()?;
        // Snap the final step onto t_end.
        let t_local = if span_len - span.t1 <= 4.0 * f64::EPSILON * span_len { span_len } else { span.t1 };
        states.push(PlaneState { x: span.y1[0], y: span.y1[1], t: s0.t + sign * t_local });
        if t_local == span_len {
            break;
        }
    }
    Ok(Trajectory { states, stats: solver.stats().into() })
}

/// Settings for [`poincare_map_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnConfig {
    pub tol: f64,
    /// Defaults to `10 * max(1, y0)`.
    pub escape_radius: Option<f64>,
    pub max_time: f64,
    pub max_steps: usize,
    pub keep_trajectory: bool,
}

impl Default for ReturnConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            escape_radius: None,
            max_time: DEFAULT_MAX_TIME,
            max_steps: DEFAULT_MAX_STEPS,
            keep_trajectory: false,
        }
    }
}

impl ReturnConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Escape radius `10 * max(R, y0)` as used with a ball of radius `R`.
    pub fn for_ball(tol: f64, r: f64) -> Self {
        Self { tol, escape_radius: Some(10.0 * r), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnResult {
    pub y_out: f64,
    pub transit_time: f64,
    pub turns: u32,
    pub min_radius: f64,
    pub max_radius: f64,
    pub stats: IntegratorStats,
    pub trajectory: Option<Trajectory>,
}

pub fn poincare_map(f: &PolynomialSpec, y0: f64, direction: Direction, tol: f64) -> Result<ReturnResult> {
    poincare_map_with(f, y0, direction, &ReturnConfig::with_tol(tol))
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

/// First return of the orbit through `(0, y0)` to the positive `y` axis after
/// one full turn (clockwise forward, counter-clockwise inverse).
pub fn poincare_map_with(
    f: &PolynomialSpec,
    y0: f64,
    direction: Direction,
    cfg: &ReturnConfig,
) -> Result<ReturnResult> {
    if !(y0 > 0.0 && y0.is_finite()) {
        return Err(Error::Domain(format!("section coordinate must be positive, got {y0}")));
    }
    check_tolerance(cfg.tol)?;
    let sign = direction.sign();
    let escape = cfg.escape_radius.map_or(10.0 * y0.max(1.0), |r| r.max(10.0 * y0));
    let mut solver = Dopri5::new(field(f, sign), 0.0, [0.0, y0], ErrorControl::NormRelative(cfg.tol));

    let mut states = cfg.keep_trajectory.then(|| vec![PlaneState::new(0.0, y0)]);
    let mut angle = PI / 2.0;
    let mut turned = 0.0f64;
    let (mut r_min, mut r_max) = (y0, y0);

    loop {
        let stats = solver.stats();
        if stats.accepted >= cfg.max_steps {
            return Err(Error::MaxSteps(cfg.max_steps));
        }
        if solver.t() > cfg.max_time {
            return Err(Error::NoReturn(cfg.max_time));
        }
        let cur = solver.y();
        let v = solver.eval_field(solver.t(), &cur);
        let r = cur[0].hypot(cur[1]);
        let omega = v[0].hypot(v[1]) / r;
        solver.set_h_max(if omega > 0.0 { MAX_STEP_ROTATION / omega } else { f64::INFINITY });

        let span = solver.step()?;
        let [x1, y1] = span.y1;
        let next_angle = y1.atan2(x1);
        let d_angle = wrap_angle(next_angle - angle);
        if d_angle.abs() >= PI / 2.0 {
            return Err(Error::Consistency(format!("angle jump {d_angle} in one step")));
        }
        turned += d_angle;
        angle = next_angle;
        let r1 = x1.hypot(y1);
        r_min = r_min.min(r1);
        r_max = r_max.max(r1);
        if r1 > escape {
            return Err(Error::Escape { t: span.t1, radius: escape });
        }

        let crosses = match direction {
            Direction::Forward => span.y0[0] < 0.0 && x1 >= 0.0,
            Direction::Inverse => span.y0[0] > 0.0 && x1 <= 0.0,
        };
        if crosses && turned.abs() > PI && (span.y0[1] > 0.0 || y1 > 0.0) {
            let (t_hit, hit) = locate_crossing(&solver, &span, y0);
            if !(hit[1] > 0.0) {
                return Err(Error::Consistency(format!("section crossing at y = {} is not transversal", hit[1])));
            }
            r_min = r_min.min(hit[1]);
            r_max = r_max.max(hit[1]);
            let trajectory = states.map(|mut st| {
                st.push(PlaneState { x: hit[0], y: hit[1], t: t_hit });
                Trajectory { states: st, stats: solver.stats().into() }
            });
            return Ok(ReturnResult {
                y_out: hit[1],
                transit_time: t_hit,
                turns: 1,
                min_radius: r_min,
                max_radius: r_max,
                stats: solver.stats().into(),
                trajectory,
            });
        }
        if let Some(st) = states.as_mut() {
            st.push(PlaneState { x: x1, y: y1, t: span.t1 });
        }
    }
}

/// Bisection on the Hermite interpolant for `x = 0`, then Newton polishing
/// with exact Runge–Kutta substeps from the start of the step.
fn locate_crossing<F>(solver: &Dopri5<2, F>, span: &Span<2>, y0: f64) -> (f64, [f64; 2])
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    let target = CROSSING_TOL * y0;
    let (mut lo, mut hi) = (span.t0, span.t1);
    let x_lo = span.y0[0];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let x = span.interpolate(mid)[0];
        if x.abs() < target || mid <= lo || mid >= hi {
            lo = mid;
            hi = mid;
            break;
        }
        if (x < 0.0) == (x_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut dt = (0.5 * (lo + hi) - span.t0).clamp(0.0, span.h());
    let mut state = solver.resolve_within(span, dt);
    for _ in 0..8 {
        if state[0].abs() < target {
            break;
        }
        let xdot = solver.eval_field(span.t0 + dt, &state)[0];
        if xdot == 0.0 {
            break;
        }
        dt = (dt - state[0] / xdot).clamp(0.0, span.h());
        state = solver.resolve_within(span, dt);
    }
    (span.t0 + dt, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quartic_plus_x() -> PolynomialSpec {
        PolynomialSpec::c_monic(4, 4.0, &[1.0, 0.0, 0.0]).unwrap()
    }

    fn cubic() -> PolynomialSpec {
        PolynomialSpec::raw(&[0.0, -1.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn vector_field_examples() {
        let f = quartic_plus_x();
        assert_eq!(vector_field(&f, &PlaneState::new(0.0, 0.0)), (0.0, 0.0));
        let sq = PolynomialSpec::c_monic(2, 4.0, &[0.0]).unwrap();
        assert_eq!(vector_field(&sq, &PlaneState::new(1.0, 1.0)), (0.0, -1.0));
        let g = PolynomialSpec::c_monic(4, 4.0, &[-1.0, 0.0, 0.0]).unwrap();
        assert_eq!(vector_field(&g, &PlaneState::new(0.5, 0.0)), (0.4375, -0.5));
    }

    #[test]
    fn polar_derivative_examples() {
        let f = quartic_plus_x();
        let (dr, dphi) = polar_derivatives(&f, &PolarState { r: 0.7, phi: PI / 2.0 }).unwrap();
        assert!(dr.abs() < 1e-15 && (dphi + 1.0).abs() < 1e-15);

        let sq = PolynomialSpec::c_monic(2, 4.0, &[0.0]).unwrap();
        let (dr, dphi) = polar_derivatives(&sq, &PolarState { r: 0.1, phi: 0.0 }).unwrap();
        assert!((dr + 0.01).abs() < 1e-17 && dphi == -1.0);

        // Leading order near the focus: r' ~ -a1 r cos^2, phi' ~ -1 + a1 sin(2 phi) / 2.
        let (dr, dphi) = polar_derivatives(&f, &PolarState { r: 1e-6, phi: PI / 4.0 }).unwrap();
        assert!((dr / -5e-7 - 1.0).abs() < 1e-5);
        assert!((dphi / -0.5 - 1.0).abs() < 1e-5);

        assert!(polar_derivatives(&f, &PolarState { r: 0.0, phi: 0.0 }).is_err());
    }

    #[test]
    fn polar_matches_cartesian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = PolynomialSpec::c_monic(6, 4.0, &[1.2, -3.0, 2.5, 0.3, -1.0]).unwrap();
        for _ in 0..2000 {
            let r = 10f64.powf(rng.gen_range(-12.0..0.3));
            let phi = rng.gen_range(0.0..TAU);
            let (dr, dphi) = polar_derivatives(&f, &PolarState { r, phi }).unwrap();
            let s = PolarState { r, phi }.to_plane();
            let (dx, dy) = vector_field(&f, &s);
            let scale1 = (s.x * dx).abs() + (s.y * dy).abs();
            assert!((r * dr - (s.x * dx + s.y * dy)).abs() <= 1e-12 * scale1);
            let scale2 = (s.x * dy).abs() + (s.y * dx).abs();
            assert!((r * r * dphi - (s.x * dy - s.y * dx)).abs() <= 1e-12 * scale2);
        }
    }

    #[test]
    fn linear_center_rotates_rigidly() {
        let zero = PolynomialSpec::zero();
        let full = integrate(&zero, &PlaneState::new(0.0, 1.0), TAU, 1e-10).unwrap().last();
        assert!(full.x.abs() < 1e-8 && (full.y - 1.0).abs() < 1e-8);
        assert_eq!(full.t, TAU);
        let half = integrate(&zero, &PlaneState::new(0.0, 1.0), PI, 1e-10).unwrap().last();
        assert!(half.x.abs() < 1e-8 && (half.y + 1.0).abs() < 1e-8);
        // Clockwise: a quarter turn from (0, 1) lands on (1, 0).
        let quarter = integrate(&zero, &PlaneState::new(0.0, 1.0), PI / 2.0, 1e-10).unwrap().last();
        assert!((quarter.x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn trajectory_times_increase() {
        let traj = integrate(&cubic(), &PlaneState::new(0.0, 4.0), 20.0, 1e-9).unwrap();
        assert!(traj.states.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(traj.last().t, 20.0);
        let csv = traj.to_csv(10);
        assert!(csv.starts_with("t,x,y\n"));
        assert!(csv.lines().last().unwrap().starts_with("2.0000000000000000e1,"));
    }

    #[test]
    fn time_reversal_returns_to_start() {
        // Even F gives a reversible center, so neither direction amplifies errors.
        let tol = 1e-10;
        let t = 7.5;
        for f in [PolynomialSpec::zero(), PolynomialSpec::raw(&[0.0, 0.0, 1.0]).unwrap()] {
            for (x, y) in [(0.3, 1.2), (0.0, 0.5), (-0.4, -0.2)] {
                let fwd = integrate(&f, &PlaneState::new(x, y), t, tol).unwrap().last();
                let back = integrate(&f, &PlaneState { t: 0.0, ..fwd }, -t, tol).unwrap().last();
                let err = (back.x - x).hypot(back.y - y);
                assert!(err < 10.0 * tol * t, "{err}");
            }
        }
    }

    #[test]
    fn tolerance_is_validated() {
        assert!(integrate(&cubic(), &PlaneState::new(0.0, 1.0), 1.0, 1e-15).is_err());
        assert!(poincare_map(&cubic(), 1.0, Direction::Forward, 1e-2).is_err());
        assert!(poincare_map(&cubic(), -1.0, Direction::Forward, 1e-10).is_err());
    }

    #[test]
    fn linear_center_return_map_is_identity() {
        let zero = PolynomialSpec::zero();
        for dir in [Direction::Forward, Direction::Inverse] {
            for y0 in [0.1, 1.0, 5.0] {
                let ret = poincare_map(&zero, y0, dir, 1e-10).unwrap();
                assert!((ret.y_out - y0).abs() < 1e-8 * y0.max(1.0), "{dir:?} {y0}: {}", ret.y_out);
                assert!((ret.transit_time - TAU).abs() < 1e-6);
                assert_eq!(ret.turns, 1);
            }
        }
    }

    #[test]
    fn halving_tolerance_reduces_return_error() {
        let zero = PolynomialSpec::zero();
        let err = |tol: f64| (poincare_map(&zero, 1.0, Direction::Forward, tol).unwrap().y_out - 1.0).abs();
        for tol in [1e-6, 1e-8, 1e-10] {
            let coarse = err(tol);
            let fine = err(0.5 * tol);
            assert!(fine * 1.95 <= coarse, "{coarse} {fine}");
        }
    }

    #[test]
    fn focus_contracts_forward_at_linear_rate() {
        let f = quartic_plus_x();
        let y0 = 1e-3;
        let ret = poincare_map(&f, y0, Direction::Forward, 1e-11).unwrap();
        assert!(ret.y_out < y0);
        // Linearization x' = y - x, y' = -x: multiplier exp(-pi a1 / sqrt(1 - a1^2/4)).
        let m = (-PI / (0.75f64).sqrt()).exp();
        assert!((ret.y_out / y0 / m - 1.0).abs() < 0.05, "{}", ret.y_out / y0);
        let back = poincare_map(&f, ret.y_out, Direction::Inverse, 1e-11).unwrap();
        assert!((back.y_out / y0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn inverse_undoes_forward() {
        let f = cubic();
        for y0 in [0.6, 1.0, 3.0] {
            let fwd = poincare_map(&f, y0, Direction::Forward, 1e-11).unwrap();
            let back = poincare_map(&f, fwd.y_out, Direction::Inverse, 1e-11).unwrap();
            assert!((back.y_out / y0 - 1.0).abs() < 1e-6, "{y0}: {}", back.y_out);
        }
    }

    #[test]
    fn tiny_starts_are_resolved() {
        let f = PolynomialSpec::c_monic(2, 4.0, &[-1.0]).unwrap();
        let y0 = 3.8e-13;
        let ret = poincare_map(&f, y0, Direction::Forward, 1e-10).unwrap();
        let m = (PI / (0.75f64).sqrt()).exp();
        assert!((ret.y_out / y0 / m - 1.0).abs() < 1e-6);
    }

    #[test]
    fn even_degree_orbits_escape() {
        let f = PolynomialSpec::c_monic(2, 4.0, &[-0.5]).unwrap();
        let cfg = ReturnConfig { escape_radius: Some(20.0), ..ReturnConfig::default() };
        let err = poincare_map_with(&f, 3.0, Direction::Forward, &cfg).unwrap_err();
        assert!(matches!(err, Error::Escape { .. }), "{err:?}");
    }

    #[test]
    fn kept_trajectory_ends_on_the_section() {
        let cfg = ReturnConfig { keep_trajectory: true, ..ReturnConfig::default() };
        let ret = poincare_map_with(&cubic(), 2.0, Direction::Forward, &cfg).unwrap();
        let traj = ret.trajectory.unwrap();
        let end = traj.last();
        assert!(end.x.abs() < CROSSING_TOL * 2.0);
        assert_eq!(end.y, ret.y_out);
        assert!(traj.states.windows(2).all(|w| w[1].t > w[0].t));
    }
}
