use std::f64::consts::TAU;
use std::fs;

use anyhow::{Context, Result};
use lienard_core::bounds::{self, BoundReport};
use lienard_core::cycles::{self, count_vs_bound, BoundComparison, CycleSet, ScanConfig};
use lienard_core::dynamics::{self, Direction, IntegratorStats, PlaneState, ReturnConfig, ReturnResult};
use lienard_core::verifier::{self, SuiteRecipe, VerificationReport, VerifyConfig};
use lienard_core::{PolynomialSpec, SystemParams};
use serde::{Deserialize, Serialize};

use crate::args::{BoundArgs, Command, CyclesArgs, DirectionArg, Format, PortraitArgs, SimulateArgs, VerifyArgs};
use crate::config::{self, Problems, System};
use crate::output::{self, fmt_log, fmt_loglog, table, Envelope};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION_FAILED: u8 = 3;

pub fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Bound(a) => bound(a),
        Command::Simulate(a) => simulate(a),
        Command::Cycles(a) => cycles_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Portrait(a) => portrait(a),
    }
}

pub fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Bound(_) => "bound",
        Command::Simulate(_) => "simulate",
        Command::Cycles(_) => "cycles",
        Command::Verify(_) => "verify",
        Command::Portrait(_) => "portrait",
    }
}

fn direction(d: DirectionArg) -> Direction {
    match d {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Inverse => Direction::Inverse,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub quantity: String,
    pub lemma_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundBody {
    pub report: BoundReport,
    pub annotations: Vec<Annotation>,
}

const BOUND_LEMMAS: [(&str, &str); 13] = [
    ("sigma", "sigma_radius_sign"),
    ("omega", "strip_transit"),
    ("alpha", "strip_transit"),
    ("mu", "velocity_bound"),
    ("L_lip", "velocity_bound"),
    ("t_max_bound", "transit_time"),
    ("epsilon", "eps_verif"),
    ("delta", "eps_verif"),
    ("lambda", "pi_delta"),
    ("bernstein", "bernstein_index"),
    ("final_bound", "final_bound"),
    ("ln_loglog_final", "final_bound"),
    ("certified", "sigma_override"),
];

fn bound(a: BoundArgs) -> Result<u8> {
    let mut problems = Problems::default();
    let p = config::params_only(&a.params, &mut problems);
    problems.format(a.format, &[Format::Json, Format::Table]);
    if let Some(s) = a.sigma_override {
        problems.positive("sigma override", s);
    }
    let p = problems.finish(p)?;

    let report = match a.sigma_override {
        Some(s) => BoundReport::with_sigma_override(&p, s)?,
        None => BoundReport::compute(&p)?,
    };
    let annotations = BOUND_LEMMAS
        .iter()
        .map(|(q, l)| Annotation { quantity: q.to_string(), lemma_id: l.to_string() })
        .collect();
    let body = BoundBody { report, annotations };
    match a.format {
        Format::Table => output::emit(&bound_table(&body)),
        _ => output::emit(&Envelope::new("bound", body).to_json()?),
    }?;
    Ok(EXIT_OK)
}

fn bound_table(b: &BoundBody) -> String {
    let r = &b.report;
    let values = [
        fmt_log(&r.sigma),
        fmt_log(&r.omega),
        fmt_log(&r.alpha),
        format!("{:.6e}", r.mu),
        format!("{:.6e}", r.l_lip),
        fmt_log(&r.t_max_bound),
        fmt_log(&r.epsilon),
        fmt_log(&r.delta),
        fmt_log(&r.lambda),
        fmt_log(&r.bernstein),
        fmt_loglog(&r.final_bound),
        format!("{:.6}", r.final_bound.ln_loglog()),
        if r.certified { "yes".into() } else { "no (sigma overridden)".into() },
    ];
    let rows: Vec<Vec<String>> = BOUND_LEMMAS
        .iter()
        .zip(values)
        .map(|((q, l), v)| {
            let name = if *q == "ln_loglog_final" { "loglog(final) [ln]".to_string() } else { q.to_string() };
            vec![name, v, l.to_string()]
        })
        .collect();
    let p = &r.params;
    format!(
        "n = {}, C = {}, a1 = {}, R = {}\n{}",
        p.n,
        p.c,
        p.a1,
        p.r,
        table(&["quantity", "value", "lemma"], &rows)
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub start: PlaneState,
    pub end: PlaneState,
    pub samples: usize,
    pub stats: IntegratorStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateBody {
    pub polynomial: PolynomialSpec,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub section_return: Option<ReturnResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trajectory: Option<TrajectorySummary>,
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let mut problems = Problems::default();
    let sys = config::system(&a.params, &a.poly, true, &mut problems);
    problems.tol(a.tol);
    problems.format(a.format, &[Format::Json, Format::Csv]);
    if a.thin == 0 {
        problems.push("thin must be at least 1");
    }
    if a.section {
        problems.positive("y0", a.y0);
    } else if !(a.t_end.is_finite() && a.t_end != 0.0) {
        problems.push("t-end must be finite and nonzero");
    }
    let sys = problems.finish(sys)?;

    let (body, csv) = if a.section {
        let dir = direction(a.direction);
        let cfg = ReturnConfig { keep_trajectory: true, ..ReturnConfig::for_ball(a.tol, sys.params.r) };
        let mut ret = dynamics::poincare_map_with(&sys.f, a.y0, dir, &cfg)?;
        let csv = ret.trajectory.take().map(|t| t.to_csv(a.thin)).unwrap_or_default();
        let body = SimulateBody {
            polynomial: sys.f.clone(),
            tol: a.tol,
            direction: Some(dir),
            section_return: Some(ret),
            trajectory: None,
        };
        (body, csv)
    } else {
        let start = PlaneState::new(a.x0, a.y0);
        let traj = dynamics::integrate(&sys.f, &start, a.t_end, a.tol)?;
        let summary = TrajectorySummary { start, end: traj.last(), samples: traj.states.len(), stats: traj.stats };
        let body = SimulateBody {
            polynomial: sys.f.clone(),
            tol: a.tol,
            direction: None,
            section_return: None,
            trajectory: Some(summary),
        };
        (body, traj.to_csv(a.thin))
    };

    let json = Envelope::new("simulate", body).to_json()?;
    match (a.format, &a.out) {
        (Format::Csv, Some(path)) => output::write_file(path, &csv)?,
        (Format::Csv, None) => output::emit(&csv)?,
        (_, Some(path)) => {
            output::write_file(path, &csv)?;
            output::emit(&json)?;
        }
        (_, None) => output::emit(&json)?,
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclesBody {
    pub polynomial: PolynomialSpec,
    pub cycle_set: CycleSet,
    pub count: usize,
    /// Absent for raw polynomials, which have no bound.
    pub comparison: Option<BoundComparison>,
}

fn cycles_cmd(a: CyclesArgs) -> Result<u8> {
    let mut problems = Problems::default();
    let sys = config::system(&a.params, &a.poly, true, &mut problems);
    problems.tol(a.tol);
    if a.grid < cycles::MIN_GRID_POINTS {
        problems.push(format!("grid must have at least {} points", cycles::MIN_GRID_POINTS));
    }
    if let Some(v) = a.y_min {
        problems.positive("y-min", v);
    }
    if let Some(v) = a.y_max {
        problems.positive("y-max", v);
    }
    if let (Some(lo), Some(hi)) = (a.y_min, a.y_max) {
        if lo >= hi {
            problems.push("y-min must be below y-max");
        }
    }
    let sys = problems.finish(sys)?;

    let raw = sys.is_raw();
    let r = sys.params.r;
    let d_lower = if raw { None } else { Some(bounds::sigma(&sys.params).to_f64()) };
    let y_lo = a.y_min.unwrap_or_else(|| d_lower.map_or(1e-3 * r, |s| s.max(cycles::Y_MIN_NUMERIC)));
    let y_hi = a.y_max.unwrap_or(r);
    if y_lo >= y_hi {
        return Err(config::ValidationError(vec![format!("scan interval [{y_lo:e}, {y_hi}] is empty")]).into());
    }
    let cfg = ScanConfig {
        grid_points: a.grid,
        tol: a.tol,
        direction: a.direction.map(direction),
        ball_radius: r,
        ..ScanConfig::new(y_lo, y_hi)
    };
    let mut scan = cycles::scan_interval(&sys.f, &cfg)?;
    if let Some(s) = d_lower {
        scan.set.d_lower = s;
    }
    if let Some(path) = &a.displacement_csv {
        output::write_file(path, &scan.samples_csv())?;
    }
    let comparison = if raw {
        None
    } else {
        Some(count_vs_bound(&scan.set, &BoundReport::compute(&sys.params)?))
    };
    let body = CyclesBody { polynomial: sys.f.clone(), count: scan.set.count(), cycle_set: scan.set.clone(), comparison };
    match a.format {
        Format::Json => output::emit(&Envelope::new("cycles", body).to_json()?)?,
        Format::Csv => output::emit(&scan.samples_csv())?,
        Format::Table => output::emit(&cycles_table(&body))?,
    }
    Ok(EXIT_OK)
}

fn cycles_table(b: &CyclesBody) -> String {
    let rows: Vec<Vec<String>> = b
        .cycle_set
        .cycles
        .iter()
        .map(|c| {
            vec![
                format!("{:.12e}", c.y_star),
                format!("{:.9}", c.period),
                format!("{:?}", c.stability).to_lowercase(),
                format!("{:.3e}", c.refinement_width),
                format!("{:.6}", c.max_radius),
            ]
        })
        .collect();
    let mut out = table(&["y_star", "period", "stability", "width", "max_radius"], &rows);
    out.push_str(&format!("count = {}\nY = {:.12e}\nD_lower = {:.6e}\n", b.count, b.cycle_set.y_outer, b.cycle_set.d_lower));
    if let Some(cmp) = &b.comparison {
        out.push_str(&format!(
            "bound = {} ; count within bound: {}\n",
            fmt_loglog(&cmp.bound),
            if cmp.within_bound { "yes" } else { "NO" }
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyBody {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub suite: Option<SuiteRecipe>,
    pub passed: bool,
    pub reports: Vec<VerificationReport>,
}

fn verify(a: VerifyArgs) -> Result<u8> {
    let mut problems = Problems::default();
    let sys = config::system(&a.params, &a.poly, false, &mut problems);
    problems.tol(a.tol);
    problems.format(a.format, &[Format::Json, Format::Table]);
    if a.grid < cycles::MIN_GRID_POINTS {
        problems.push(format!("grid must have at least {} points", cycles::MIN_GRID_POINTS));
    }
    if a.samples == 0 {
        problems.push("samples must be at least 1");
    }
    if let Some(s) = a.sigma_override {
        problems.positive("sigma override", s);
    }
    match a.suite {
        Some(0) => problems.push("suite must contain at least one polynomial"),
        Some(_) if a.poly.coeffs.is_some() => problems.push("--suite draws its own coefficients; drop --coeffs"),
        None if a.random_a1 || a.random_n => problems.push("--random-a1 and --random-n need --suite"),
        _ => {}
    }
    let sys = problems.finish(sys)?;

    let cfg = VerifyConfig {
        samples: a.samples,
        strip_orbits: a.strip_orbits,
        grid_points: a.grid,
        tol: a.tol,
        seed: a.seed,
        sigma_override: a.sigma_override,
        dynamics: !a.no_dynamics,
        ..VerifyConfig::default()
    };
    let (suite, reports) = match a.suite {
        Some(count) => {
            let p = sys.params;
            let recipe = SuiteRecipe {
                seed: a.seed,
                count,
                n: (!a.random_n).then_some(p.n),
                c: p.c,
                a1: (!a.random_a1).then_some(p.a1),
                r: p.r,
            };
            let reports = verifier::verify_suite(&recipe, &cfg)?;
            (Some(recipe), reports)
        }
        None => (None, vec![verifier::verify(&sys.f, &sys.params, &cfg)?]),
    };
    let passed = reports.iter().all(VerificationReport::passed);
    let body = VerifyBody { suite, passed, reports };
    match a.format {
        Format::Table => output::emit(&verify_table(&body))?,
        _ => output::emit(&Envelope::new("verify", body).to_json()?)?,
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFICATION_FAILED })
}

fn verify_table(b: &VerifyBody) -> String {
    let mut out = String::new();
    for (i, rep) in b.reports.iter().enumerate() {
        let p = &rep.params;
        out.push_str(&format!(
            "[{i}] n = {}, C = {}, a1 = {}, R = {}, seed = {}{}\n",
            p.n,
            p.c,
            p.a1,
            p.r,
            rep.seed,
            if rep.certified { "" } else { " (uncertified sigma)" }
        ));
        let rows: Vec<Vec<String>> = rep
            .checks
            .iter()
            .map(|c| {
                let status = if c.skipped {
                    "SKIP"
                } else if c.passed {
                    "PASS"
                } else {
                    "FAIL"
                };
                vec![c.lemma_id.clone(), c.points_checked.to_string(), format!("{:.6e}", c.worst_margin), status.into()]
            })
            .collect();
        out.push_str(&table(&["lemma_id", "points", "worst_margin", "status"], &rows));
    }
    out.push_str(if b.passed { "all checks passed\n" } else { "verification FAILED\n" });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitEntry {
    pub x0: f64,
    pub y0: f64,
    pub file: Option<String>,
    pub samples: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitMeta {
    pub polynomial: PolynomialSpec,
    /// Absent for raw polynomials.
    pub params: Option<SystemParams>,
    pub tol: f64,
    pub t_end: f64,
    pub thin: usize,
    pub trajectories: Vec<PortraitEntry>,
}

fn portrait(a: PortraitArgs) -> Result<u8> {
    let mut problems = Problems::default();
    let sys: Option<System> = config::system(&a.params, &a.poly, true, &mut problems);
    problems.tol(a.tol);
    if a.thin == 0 {
        problems.push("thin must be at least 1");
    }
    if a.ring == 0 && a.ic.is_empty() {
        problems.push("no initial conditions: use --ring or --ic");
    }
    if a.ring > 0 {
        problems.positive("ring radius", a.ring_radius);
    }
    if !(a.t_end.is_finite() && a.t_end != 0.0) {
        problems.push("t-end must be finite and nonzero");
    }
    let sys = problems.finish(sys)?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut starts: Vec<(f64, f64)> = (0..a.ring)
        .map(|k| {
            let th = TAU * k as f64 / a.ring as f64;
            (a.ring_radius * th.cos(), a.ring_radius * th.sin())
        })
        .collect();
    starts.extend(&a.ic);

    let mut entries = Vec::with_capacity(starts.len());
    for (k, &(x0, y0)) in starts.iter().enumerate() {
        let entry = match dynamics::integrate(&sys.f, &PlaneState::new(x0, y0), a.t_end, a.tol) {
            Ok(traj) => {
                let name = format!("traj_{k:03}.csv");
                output::write_file(&a.out.join(&name), &traj.to_csv(a.thin))?;
                PortraitEntry { x0, y0, file: Some(name), samples: traj.states.len(), error: None }
            }
            Err(e) => PortraitEntry { x0, y0, file: None, samples: 0, error: Some(e.to_string()) },
        };
        entries.push(entry);
    }
    let meta = PortraitMeta {
        polynomial: sys.f.clone(),
        params: (!sys.is_raw()).then_some(sys.params),
        tol: a.tol,
        t_end: a.t_end,
        thin: a.thin,
        trajectories: entries,
    };
    let json = Envelope::new("portrait", meta).to_json()?;
    output::write_file(&a.out.join("metadata.json"), &json)?;
    output::emit(&json)?;
    Ok(EXIT_OK)
}
