//! Limit cycles as zeros of the displacement `d(y) = P(y) - y` on the
//! positive `y` axis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundReport, SystemParams};
use crate::dynamics::{self, Direction, ReturnConfig, ReturnResult};
use crate::error::{Error, Result};
use crate::logspace::LogLogValue;
use crate::polynomial::PolynomialSpec;

pub const DEFAULT_GRID_POINTS: usize = 512;
pub const MIN_GRID_POINTS: usize = 16;
pub const DEFAULT_REFINE_REL: f64 = 1e-10;
pub const DEFAULT_DEGENERACY_REL: f64 = 1e-12;
/// Grid values this many integrator tolerances below `y` count as zero as well.
pub const DEGENERACY_TOL_FACTOR: f64 = 50.0;
pub const ANNULUS_RUN: usize = 3;
/// Lower end of the scan when the trap radius is not representable.
pub const Y_MIN_NUMERIC: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub y_star: f64,
    pub period: f64,
    /// In forward time, whichever map was scanned.
    pub stability: Stability,
    pub refinement_width: f64,
    pub max_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub spacing: String,
    pub points: usize,
    pub y_lo: f64,
    pub y_hi: f64,
    pub direction: Direction,
    pub tol: f64,
    /// First grid value whose orbit escaped; the scan stops below it.
    pub truncated_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSet {
    pub cycles: Vec<CycleRecord>,
    /// Section point of the outermost cycle contained in the ball, 0 without one.
    #[serde(rename = "Y")]
    pub y_outer: f64,
    #[serde(rename = "D_lower")]
    pub d_lower: f64,
    pub scan_grid: ScanGrid,
}

impl CycleSet {
    pub fn count(&self) -> usize {
        self.cycles.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSample {
    pub y: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleScan {
    pub set: CycleSet,
    pub samples: Vec<DisplacementSample>,
}

impl CycleScan {
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("y,displacement\n");
        for s in &self.samples {
            out.push_str(&format!("{:.16e},{:.16e}\n", s.y, s.d));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub y_lo: f64,
    pub y_hi: f64,
    /// Radius of the ball that decides `Y`; also sets the escape radius.
    pub ball_radius: f64,
    pub grid_points: usize,
    pub tol: f64,
    /// `None` picks the map that expands near the focus.
    pub direction: Option<Direction>,
    pub refine_rel: f64,
    pub degeneracy_rel: f64,
}

impl ScanConfig {
    pub fn new(y_lo: f64, y_hi: f64) -> Self {
        Self {
            y_lo,
            y_hi,
            ball_radius: y_hi,
            grid_points: DEFAULT_GRID_POINTS,
            tol: dynamics::DEFAULT_TOL,
            direction: None,
            refine_rel: DEFAULT_REFINE_REL,
            degeneracy_rel: DEFAULT_DEGENERACY_REL,
        }
    }

    fn return_config(&self) -> ReturnConfig {
        ReturnConfig::for_ball(self.tol, self.ball_radius)
    }

    fn zero_threshold(&self) -> f64 {
        self.degeneracy_rel.max(DEGENERACY_TOL_FACTOR * self.tol)
    }
}

/// Forward map when the focus repels (`a1 < 0`), inverse otherwise.
pub fn expanding_direction(f: &PolynomialSpec) -> Direction {
    if f.a1() > 0.0 {
        Direction::Inverse
    } else {
        Direction::Forward
    }
}

pub fn displacement(f: &PolynomialSpec, y: f64, direction: Direction, cfg: &ReturnConfig) -> Result<f64> {
    Ok(dynamics::poincare_map_with(f, y, direction, cfg)?.y_out - y)
}

/// Displacement with escaping orbits read as `+inf`: the map blows up at the
/// outer end of its domain.
fn displacement_or_escape(f: &PolynomialSpec, y: f64, direction: Direction, cfg: &ReturnConfig) -> Result<f64> {
    match displacement(f, y, direction, cfg) {
        Err(Error::Escape { .. }) | Err(Error::NoReturn(_)) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Scan `[max(sigma, Y_MIN_NUMERIC), R]` for a C-monic `f`.
pub fn scan_cycles(f: &PolynomialSpec, p: &SystemParams, grid_points: usize) -> Result<CycleSet> {
    Ok(scan_cycles_detailed(f, p, grid_points, dynamics::DEFAULT_TOL)?.set)
}

pub fn scan_cycles_detailed(f: &PolynomialSpec, p: &SystemParams, grid_points: usize, tol: f64) -> Result<CycleScan> {
    check_consistent(f, p)?;
    let sigma = bounds::sigma(p).to_f64();
    let y_lo = sigma.max(Y_MIN_NUMERIC);
    let mut cfg = ScanConfig::new(y_lo, p.r);
    cfg.grid_points = grid_points;
    cfg.tol = tol;
    let mut scan = scan_interval(f, &cfg)?;
    scan.set.d_lower = sigma;
    Ok(scan)
}

fn check_consistent(f: &PolynomialSpec, p: &SystemParams) -> Result<()> {
    p.validate()?;
    if !f.is_paper_mode() {
        return Err(Error::NotPaperMode("cycle scan"));
    }
    let mut problems = Vec::new();
    if f.degree() != p.n as usize {
        problems.push(format!("polynomial degree {} differs from n = {}", f.degree(), p.n));
    }
    if f.a1() != p.a1 {
        problems.push(format!("polynomial a1 = {} differs from a1 = {}", f.a1(), p.a1));
    }
    if f.coeff_bound().is_some_and(|c| c > p.c) {
        problems.push(format!("polynomial coefficient bound exceeds C = {}", p.c));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(problems.join("; ")))
    }
}

pub fn log_grid(y_lo: f64, y_hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (y_lo.ln(), y_hi.ln());
    let last = points - 1;
    (0..points)
        .map(|i| match i {
            0 => y_lo,
            i if i == last => y_hi,
            i => (a + (b - a) * i as f64 / last as f64).exp(),
        })
        .collect()
}

/// Scan any polynomial, C-monic or not, over an explicit interval.
pub fn scan_interval(f: &PolynomialSpec, cfg: &ScanConfig) -> Result<CycleScan> {
    if cfg.grid_points < MIN_GRID_POINTS {
        return Err(Error::Domain(format!("grid needs at least {MIN_GRID_POINTS} points, got {}", cfg.grid_points)));
    }
    if !(cfg.y_lo > 0.0 && cfg.y_lo < cfg.y_hi && cfg.y_hi.is_finite()) {
        return Err(Error::Domain(format!("scan interval [{}, {}] is empty", cfg.y_lo, cfg.y_hi)));
    }
    if !(cfg.refine_rel > 0.0) {
        return Err(Error::Domain("refinement width must be positive".into()));
    }
    crate::integrator::check_tolerance(cfg.tol)?;
    let direction = cfg.direction.unwrap_or_else(|| expanding_direction(f));
    let rc = cfg.return_config();
    let grid = log_grid(cfg.y_lo, cfg.y_hi, cfg.grid_points);

    let evaluated: Vec<Result<ReturnResult>> =
        grid.par_iter().map(|&y| dynamics::poincare_map_with(f, y, direction, &rc)).collect();
    let mut samples = Vec::with_capacity(grid.len());
    let mut truncated_at = None;
    for (&y, ret) in grid.iter().zip(evaluated) {
        match ret {
            Ok(r) => samples.push(DisplacementSample { y, d: r.y_out - y }),
            // Returning starts form an interval around the focus.
            Err(Error::Escape { .. }) | Err(Error::NoReturn(_)) => {
                truncated_at = Some(y);
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let mut cycles = locate_zeros(f, &samples, direction, cfg, &rc)?;
    if let (Some(edge), Some(last)) = (truncated_at, samples.last()) {
        if last.d < -cfg.zero_threshold() * last.y {
            cycles.push(refine(f, last.y, edge, last.d, direction, cfg, &rc)?);
        }
    }
    let y_outer = cycles
        .iter()
        .filter(|c| c.max_radius <= cfg.ball_radius)
        .map(|c| c.y_star)
        .fold(0.0, f64::max);
    let scan_grid = ScanGrid {
        spacing: "log".into(),
        points: cfg.grid_points,
        y_lo: cfg.y_lo,
        y_hi: cfg.y_hi,
        direction,
        tol: cfg.tol,
        truncated_at,
    };
    Ok(CycleScan { set: CycleSet { cycles, y_outer, d_lower: cfg.y_lo, scan_grid }, samples })
}

enum Candidate {
    Bracket(f64, f64, f64),
    Touch(f64),
}

fn locate_zeros(
    f: &PolynomialSpec,
    samples: &[DisplacementSample],
    direction: Direction,
    cfg: &ScanConfig,
    rc: &ReturnConfig,
) -> Result<Vec<CycleRecord>> {
    let thr = cfg.zero_threshold();
    let sign = |s: &DisplacementSample| {
        if s.d.abs() < thr * s.y {
            0
        } else if s.d > 0.0 {
            1
        } else {
            -1
        }
    };
    let signs: Vec<i32> = samples.iter().map(sign).collect();

    let mut run = 0;
    for (i, &s) in signs.iter().enumerate() {
        run = if s == 0 { run + 1 } else { 0 };
        if run >= ANNULUS_RUN {
            return Err(Error::Annulus { y: samples[i + 1 - run].y, run });
        }
    }

    let mut candidates = Vec::new();
    let mut prev: Option<usize> = None;
    for (i, &s) in signs.iter().enumerate() {
        if s == 0 {
            continue;
        }
        if let Some(j) = prev {
            if signs[j] != s {
                candidates.push(Candidate::Bracket(samples[j].y, samples[i].y, samples[j].d));
            } else if i > j + 1 {
                candidates.push(Candidate::Touch(samples[(i + j) / 2].y));
            }
        }
        prev = Some(i);
    }

    let mut cycles = candidates
        .par_iter()
        .map(|c| match *c {
            Candidate::Bracket(lo, hi, d_lo) => refine(f, lo, hi, d_lo, direction, cfg, rc),
            Candidate::Touch(y) => record(f, y, 0.0, Stability::Undetermined, direction, rc),
        })
        .collect::<Result<Vec<_>>>()?;
    cycles.sort_by(|a, b| a.y_star.total_cmp(&b.y_star));
    Ok(cycles)
}

fn refine(
    f: &PolynomialSpec,
    mut lo: f64,
    mut hi: f64,
    d_lo: f64,
    direction: Direction,
    cfg: &ScanConfig,
    rc: &ReturnConfig,
) -> Result<CycleRecord> {
    let lo_positive = d_lo > 0.0;
    while hi - lo > cfg.refine_rel * lo {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = displacement_or_escape(f, mid, direction, rc)?;
        if (d > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // d goes from + to - for an attracting fixed point of the scanned map.
    let scanned_attracting = lo_positive;
    let forward_attracting = match direction {
        Direction::Forward => scanned_attracting,
        Direction::Inverse => !scanned_attracting,
    };
    let stability = if forward_attracting { Stability::Attracting } else { Stability::Repelling };
    record(f, 0.5 * (lo + hi), (hi - lo) / lo, stability, direction, rc)
}

fn record(
    f: &PolynomialSpec,
    y: f64,
    width: f64,
    stability: Stability,
    direction: Direction,
    rc: &ReturnConfig,
) -> Result<CycleRecord> {
    let ret = dynamics::poincare_map_with(f, y, direction, rc)?;
    Ok(CycleRecord { y_star: y, period: ret.transit_time, stability, refinement_width: width, max_radius: ret.max_radius })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub count: u64,
    pub bound: LogLogValue,
    pub within_bound: bool,
}

pub fn count_vs_bound(cs: &CycleSet, br: &BoundReport) -> BoundComparison {
    let count = cs.cycles.len() as u64;
    BoundComparison { count, bound: br.final_bound, within_bound: br.final_bound.admits_count(count) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> PolynomialSpec {
        PolynomialSpec::raw(&[0.0, -1.0, 0.0, 1.0]).unwrap()
    }

    fn classic_scan(grid: usize, direction: Option<Direction>) -> CycleScan {
        let mut cfg = ScanConfig::new(0.5, 4.0);
        cfg.grid_points = grid;
        cfg.direction = direction;
        scan_interval(&cubic(), &cfg).unwrap()
    }

    #[test]
    fn center_has_zero_displacement() {
        let rc = ReturnConfig::default();
        for y in [0.01, 0.5, 3.0] {
            assert!(displacement(&PolynomialSpec::zero(), y, Direction::Forward, &rc).unwrap().abs() < 1e-8 * y);
        }
    }

    #[test]
    fn center_scan_reports_annulus() {
        let cfg = ScanConfig::new(0.1, 2.0);
        let err = scan_interval(&PolynomialSpec::zero(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Annulus { .. }), "{err:?}");
    }

    #[test]
    fn classic_cycle_is_unique_and_attracting() {
        let scan = classic_scan(128, None);
        let set = &scan.set;
        assert_eq!(set.count(), 1, "{set:?}");
        let c = &set.cycles[0];
        assert_eq!(c.stability, Stability::Attracting);
        assert!(c.refinement_width <= DEFAULT_REFINE_REL);
        assert_eq!(set.y_outer, c.y_star);
        let rc = ReturnConfig::for_ball(1e-12, 4.0);
        for (y, positive) in [(c.y_star * 0.99, true), (c.y_star * 1.01, false)] {
            assert_eq!(displacement(&cubic(), y, Direction::Forward, &rc).unwrap() > 0.0, positive);
        }
        assert!(displacement(&cubic(), c.y_star, Direction::Forward, &rc).unwrap().abs() < 1e-8 * c.y_star);
    }

    #[test]
    fn direction_swap_keeps_cycles() {
        let fwd = classic_scan(64, Some(Direction::Forward)).set;
        let inv = classic_scan(64, Some(Direction::Inverse)).set;
        assert_eq!(fwd.count(), inv.count());
        for (a, b) in fwd.cycles.iter().zip(&inv.cycles) {
            assert!((a.y_star / b.y_star - 1.0).abs() < 1e-8);
            assert_eq!(a.stability, b.stability);
        }
    }

    #[test]
    fn paper_mode_quartic_has_a_cycle() {
        // x^4 + 3x^3 - x/2: repelling focus surrounded by an attracting cycle.
        let f = PolynomialSpec::c_monic(4, 4.0, &[-0.5, 0.0, 3.0]).unwrap();
        let p = SystemParams::new(4, 4.0, -0.5, 1.0).unwrap();
        let scan = scan_cycles_detailed(&f, &p, 96, 1e-10).unwrap();
        let set = scan.set;
        assert!(set.count() >= 1, "{set:?}");
        let outer = set.cycles.last().unwrap();
        assert_eq!(outer.stability, Stability::Attracting);
        assert_eq!(set.d_lower, bounds::sigma(&p).to_f64());
        if outer.max_radius <= 1.0 {
            assert_eq!(set.y_outer, outer.y_star);
        }
        let br = BoundReport::compute(&p).unwrap();
        assert!(count_vs_bound(&set, &br).within_bound);
    }

    #[test]
    fn small_focus_coefficient_without_cycles() {
        let f = PolynomialSpec::monomial_plus_linear(2, 4.0, 0.3).unwrap();
        let p = SystemParams::new(2, 4.0, 0.3, 1.0).unwrap();
        let coarse = scan_cycles(&f, &p, 64).unwrap();
        let fine = scan_cycles(&f, &p, 256).unwrap();
        assert_eq!(coarse.count(), 0);
        assert_eq!(fine.count(), 0);
        assert_eq!(coarse.y_outer, 0.0);
    }

    #[test]
    fn refining_the_grid_keeps_detections() {
        let a = classic_scan(32, None).set.count();
        let b = classic_scan(64, None).set.count();
        assert!(b >= a);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let f = PolynomialSpec::monomial_plus_linear(4, 4.0, 1.0).unwrap();
        let p = SystemParams::new(2, 4.0, 1.0, 1.0).unwrap();
        assert!(matches!(scan_cycles(&f, &p, 64), Err(Error::InvalidParams(_))));
        let p4 = SystemParams::new(4, 4.0, 1.0, 1.0).unwrap();
        assert!(scan_cycles(&f, &p4, 8).is_err());
        assert!(matches!(scan_cycles(&cubic(), &p4, 64), Err(Error::NotPaperMode(_))));
    }

    #[test]
    fn empty_set_is_within_any_bound() {
        let p = SystemParams::new(2, 4.0, 1.0, 1.0).unwrap();
        let br = BoundReport::compute(&p).unwrap();
        let set = CycleSet {
            cycles: vec![],
            y_outer: 0.0,
            d_lower: 0.0,
            scan_grid: classic_scan(16, None).set.scan_grid,
        };
        let cmp = count_vs_bound(&set, &br);
        assert!(cmp.within_bound && cmp.count == 0);
        assert!(br.final_bound.admits_count(999));
    }

    #[test]
    fn log_grid_hits_endpoints() {
        let g = log_grid(1e-13, 1.0, 14);
        assert_eq!(g[0], 1e-13);
        assert_eq!(g[13], 1.0);
        assert!((g[1] / 1e-12 - 1.0).abs() < 1e-12);
    }
}
