use std::f64::consts::TAU;

use lienard_core::bounds::{self, BoundReport};
use lienard_core::cycles::{self, ScanConfig, Stability};
use lienard_core::dynamics::{self, Direction, PlaneState, PolarState, ReturnConfig};
use lienard_core::{LogLogValue, LogValue, PolynomialSpec, SystemParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c_monic() -> impl Strategy<Value = (SystemParams, PolynomialSpec)> {
    (prop::sample::select(vec![2u32, 4, 6, 8]), 4.0f64..16.0, 0.1f64..1.9, any::<bool>(), 1.0f64..4.0, any::<u64>())
        .prop_map(|(n, c, m, neg, r, seed)| {
            let a1 = if neg { -m } else { m };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = PolynomialSpec::random_c_monic(&mut rng, n as usize, c, a1).unwrap();
            (SystemParams::new(n, c, a1, r).unwrap(), f)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn polar_and_cartesian_fields_agree((_, f) in c_monic(), ln_r in -25.0f64..0.0, phi in 0.0..TAU) {
        let s = PolarState { r: ln_r.exp(), phi };
        let (dr, dphi) = dynamics::polar_derivatives(&f, &s).unwrap();
        let c = s.to_plane();
        let (dx, dy) = dynamics::vector_field(&f, &c);
        let scale = c.x.abs().max(c.y.abs()) * dx.abs().max(dy.abs());
        prop_assert!((s.r * dr - (c.x * dx + c.y * dy)).abs() <= 1e-13 * scale);
        prop_assert!((s.r * s.r * dphi - (c.x * dy - c.y * dx)).abs() <= 1e-13 * scale);
    }

    #[test]
    fn angle_decreases_uniformly_in_trap_ball((p, f) in c_monic(), u in 0.0f64..1.0, phi in 0.0..TAU) {
        let r = bounds::trap_ball_radius(&p) * u.max(1e-9);
        let (_, dphi) = dynamics::polar_derivatives(&f, &PolarState { r, phi }).unwrap();
        prop_assert!(dphi <= (p.a1.abs() - 2.0) / 4.0 + 1e-15);
    }

    #[test]
    fn sigma_lies_inside_the_trap_ball((p, _) in c_monic()) {
        let slack = bounds::check_sigma_identity(&p, bounds::sigma(&p)).unwrap();
        prop_assert!(slack >= 0.0);
        prop_assert!(bounds::sigma(&p).ln() < bounds::trap_ball_radius(&p).ln());
    }

    #[test]
    fn closed_form_and_chain_agree((p, _) in c_monic()) {
        let closed = bounds::final_exponent_closed_form(&p);
        let chained = bounds::final_exponent_chained(&p, bounds::sigma(&p));
        prop_assert!((closed - chained).abs() <= 1e-9 * closed.abs());
        prop_assert!(bounds::epsilon_chain(&p).unwrap().delta_margin >= -1e-12 * closed.abs());
    }

    #[test]
    fn bound_report_round_trips((p, _) in c_monic()) {
        let rep = BoundReport::compute(&p).unwrap();
        let json = serde_json::to_string(&rep).unwrap();
        prop_assert_eq!(serde_json::from_str::<BoundReport>(&json).unwrap(), rep);
    }

    #[test]
    fn polynomial_round_trips((_, f) in c_monic()) {
        let json = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<PolynomialSpec>(&json).unwrap(), f);
    }

    #[test]
    fn log_values_round_trip(l in -1e300f64..1e300, s in 0.0f64..700.0) {
        for v in [LogValue::from_ln(l), LogValue::exp_neg_exp(s), LogValue::Zero] {
            let json = serde_json::to_string(&v).unwrap();
            prop_assert_eq!(serde_json::from_str::<LogValue>(&json).unwrap(), v);
        }
        let w = LogLogValue::from_ln_loglog(s);
        prop_assert_eq!(serde_json::from_str::<LogLogValue>(&serde_json::to_string(&w).unwrap()).unwrap(), w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inverse_map_undoes_forward_map(a1 in -1.5f64..1.5, y0 in 0.05f64..0.3) {
        prop_assume!(a1.abs() > 0.1);
        let f = PolynomialSpec::monomial_plus_linear(2, 4.0, a1).unwrap();
        let fwd = dynamics::poincare_map(&f, y0, Direction::Forward, 1e-12);
        prop_assume!(fwd.is_ok());
        let back = dynamics::poincare_map(&f, fwd.unwrap().y_out, Direction::Inverse, 1e-12);
        prop_assume!(back.is_ok());
        prop_assert!((back.unwrap().y_out - y0).abs() <= 1e-8 * y0);
    }
}

fn classic() -> PolynomialSpec {
    PolynomialSpec::raw(&[0.0, -1.0, 0.0, 1.0]).unwrap()
}

#[test]
fn classic_cycle_is_a_fixed_point_at_tight_tolerance() {
    let f = classic();
    let cfg = ScanConfig { ball_radius: 4.0, ..ScanConfig::new(0.5, 4.0) };
    let set = cycles::scan_interval(&f, &cfg).unwrap().set;
    assert_eq!(set.count(), 1);
    let c = &set.cycles[0];
    let tight = ReturnConfig::with_tol(1e-12);
    let d = cycles::displacement(&f, c.y_star, Direction::Forward, &tight).unwrap();
    assert!(d.abs() < 1e-8 * c.y_star, "d(y*) = {d:e}");

    assert_eq!(c.stability, Stability::Attracting);
    let h = 10.0 * c.refinement_width.max(1e-9);
    let below = cycles::displacement(&f, c.y_star * (1.0 - h), Direction::Forward, &tight).unwrap();
    let above = cycles::displacement(&f, c.y_star * (1.0 + h), Direction::Forward, &tight).unwrap();
    assert!(below > 0.0 && above < 0.0, "{below:e} {above:e}");
}

#[test]
fn cycle_count_stable_under_grid_doubling() {
    let f = PolynomialSpec::c_monic(4, 4.0, &[-0.5, 0.0, 3.0]).unwrap();
    let p = SystemParams::new(4, 4.0, -0.5, 1.0).unwrap();
    let coarse = cycles::scan_cycles(&f, &p, 256).unwrap();
    let fine = cycles::scan_cycles(&f, &p, 512).unwrap();
    assert_eq!(coarse.count(), fine.count());
    for (a, b) in coarse.cycles.iter().zip(&fine.cycles) {
        assert!((a.y_star - b.y_star).abs() <= 1e-8 * a.y_star);
        assert_eq!(a.stability, b.stability);
    }
    assert!(fine.y_outer > 0.0 && fine.d_lower == bounds::sigma(&p).to_f64());
}

#[test]
fn center_orbits_stay_on_circles() {
    let zero = PolynomialSpec::zero();
    let traj = dynamics::integrate(&zero, &PlaneState::new(0.3, -2.0), 3.0 * TAU, 1e-10).unwrap();
    let r0 = traj.states[0].radius();
    assert!(traj.states.iter().all(|s| (s.radius() - r0).abs() < 1e-8));
    assert!(traj.states.windows(2).all(|w| w[1].t > w[0].t));
}
