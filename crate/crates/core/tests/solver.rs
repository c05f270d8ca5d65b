use dynbc::experiments::rate::s2_constant;
use dynbc::picard::contraction_factor;
use dynbc::{solve, DataSpec, Geometry, ProblemData, SolverConfig};
use proptest::prelude::*;

fn pair(g: Geometry, spec: &str, phi_b: f64, eps: f64, horizon: f64) -> dynbc::SolutionPair {
    let spec: DataSpec = spec.parse().unwrap();
    let phi = spec.materialize(g, 30.0).unwrap();
    let data = ProblemData::new(g, eps, phi, phi_b).unwrap();
    solve(&data, &SolverConfig { time_nodes: 64, energy_records: 4, ..SolverConfig::new(horizon) }).unwrap()
}

#[test]
fn zero_data_give_the_zero_solution() {
    for g in [Geometry::half_line(), Geometry::exterior_ball()] {
        let p = pair(g, "const:0", 0.0, 0.05, 0.2);
        for x in [g.boundary_coordinate(), 1.5, 4.0] {
            assert_eq!(p.u(x, 0.1).unwrap(), 0.0);
        }
    }
}

#[test]
fn continuation_matches_a_single_segment() {
    let g = Geometry::exterior_ball();
    let spec: DataSpec = "scaled-indicator:b=2".parse().unwrap();
    let data = ProblemData::new(g, 2f64.powi(-6), spec.materialize(g, 30.0).unwrap(), 1.0).unwrap();
    let one = solve(&data, &SolverConfig { time_nodes: 128, ..SolverConfig::new(0.4) }).unwrap();
    let many = solve(&data, &SolverConfig { time_nodes: 64, t_star: Some(0.1), continuation: true, ..SolverConfig::new(0.4) }).unwrap();
    for r in [1.0, 2.5, 5.0] {
        assert!((one.u(r, 0.35).unwrap() - many.u(r, 0.35).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn solutions_approach_the_boundary_semigroup() {
    let g = Geometry::exterior_ball();
    let dev = |eps: f64| {
        let p = pair(g, "scaled-indicator:b=2", 1.0, eps, 0.2);
        [1.0, 2.0, 3.0].iter().map(|&r| (p.u(r, 0.15).unwrap() - s2_constant(g, 1.0, r, 0.15).unwrap()).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (dev(2f64.powi(-4)), dev(2f64.powi(-10)));
    assert!(fine < 0.5 * coarse, "{coarse} {fine}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn picard_steps_contract_at_the_bound(k in 4i32..12, horizon in 0.02f64..0.2) {
        let eps = 2f64.powi(-k);
        let g = Geometry::half_line();
        prop_assume!(contraction_factor(g, eps, horizon) < 0.9);
        let p = pair(g, "indicator:b=1", 0.0, eps, horizon);
        prop_assert!(p.q_observed() <= p.q_bound() + 1e-9);
    }

    #[test]
    fn zero_boundary_datum_deviation_is_the_solution(k in 4i32..10, x in 0.0f64..3.0, t in 0.05f64..0.2) {
        let p = pair(Geometry::half_line(), "indicator:b=1", 0.0, 2f64.powi(-k), 0.2);
        prop_assert!((p.deviation(x, t).unwrap() - p.u(x, t).unwrap()).abs() < 1e-14);
    }
}
