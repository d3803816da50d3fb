use ladder_core::rg_dimer::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ubar_trajectory_does_not_depend_on_bare_u() {
    let runs: Vec<Vec<FlowState>> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&u| run_flow(DimerRgCouplings::bare(u, 1.0, 0.0), 40, 0.0).unwrap())
        .collect();
    for l in 0..=40 {
        let a = runs[0][l].ubar;
        for r in &runs[1..] {
            assert!((r[l].ubar - a).abs() < 1e-12, "l={l}");
        }
    }
}

#[test]
fn random_flows_reach_the_fixed_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let gamma: f64 = rng.gen_range(0.1..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let xi = rng.gen_range(-2.0..=2.0) * gamma.abs();
        let flow = run_flow(DimerRgCouplings::bare(0.0, gamma, xi), 60, 0.0).unwrap();
        let end = &flow[60].couplings;
        assert!(end.gamma.abs() < 1e-8 && end.xi.abs() < 1e-8, "({gamma},{xi}) -> {end:?}");
        assert!(end.v > 0.0);
        assert!((end.v - flow[59].couplings.v).abs() < 1e-10);
    }
}

#[test]
fn flipping_a_gauge_block_flips_only_the_field() {
    let start = FlowState::initial(DimerRgCouplings::bare(0.3, 1.0, -0.5)).unwrap();
    let a = rg_step(&start).unwrap();
    for flipped in [start.point.flip_alpha(), start.point.flip_beta()] {
        let b = rg_step(&FlowState { point: flipped, ..start.clone() }).unwrap();
        assert!((a.couplings.gamma + b.couplings.gamma).abs() < 1e-14);
        assert!((a.couplings.v - b.couplings.v).abs() < 1e-14);
        assert!((a.couplings.xi - b.couplings.xi).abs() < 1e-14);
        assert!((a.ubar - b.ubar).abs() < 1e-14);
    }
}

#[test]
fn catalyst_flows_converge_to_their_critical_values() {
    for (gamma, xi, expected) in [(1.0, -1.0, 0.52956828), (1.0, 1.0, 0.61474501)] {
        let flow = run_flow(DimerRgCouplings::bare(expected, gamma, xi), MAX_STEPS, DEFAULT_UBAR_TOL).unwrap();
        let last = flow.last().unwrap();
        assert!((last.ubar - expected).abs() / expected < 1e-7, "{xi}: {}", last.ubar);
    }
}

#[test]
fn off_critical_classification() {
    assert_eq!(classify_phase(0.4, 1.0, 0.0).unwrap(), Phase::Symmetric);
    assert_eq!(classify_phase(0.6, 1.0, 0.0).unwrap(), Phase::Staggered);
    let ubar = critical_ubar(1.0, 0.0, DEFAULT_UBAR_TOL).unwrap();
    assert_eq!(classify_phase(ubar, 1.0, 0.0).unwrap(), Phase::Critical);
}

#[test]
fn boundary_is_even_in_xi_without_field() {
    let a = critical_ubar(0.0, 1.0, DEFAULT_UBAR_TOL).unwrap();
    let b = critical_ubar(0.0, -1.0, DEFAULT_UBAR_TOL).unwrap();
    assert!((a - b).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_respects_bookkeeping(u in -1.0..1.0f64, g in -2.0..2.0f64, x in -2.0..2.0f64) {
        let flow = run_flow(DimerRgCouplings::bare(u, g, x), 12, 0.0).unwrap();
        for s in &flow {
            let lhs = s.ubar;
            let rhs = u - 3f64.powi(-(s.l as i32)) * s.couplings.u;
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + u.abs()));
            prop_assert!(s.point.constraint_residual() < 1e-12);
        }
    }
}
