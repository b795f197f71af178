use std::f64::consts::PI;

use proptest::prelude::*;

use lbcm::bc_operators::{boundary_inner_product, BoundaryOps};
use lbcm::checks::random_pulse_control;
use lbcm::control::{dalembert_control, Control, HelmholtzTarget};
use lbcm::data::SimulatedData;
use lbcm::recon::pairing_value;
use lbcm::wave_sim::Medium;
use lbcm::{BoundaryTrace, SimulationGrid};

fn small_ops() -> BoundaryOps {
    BoundaryOps::new(SimulationGrid::new(40, 1.0, 0.1).unwrap())
}

fn trace_strategy(samples: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-10.0..10.0f64, samples),
        prop::collection::vec(-10.0..10.0f64, samples),
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reverse_is_involutive_isometry((l, r) in trace_strategy(201)) {
        let ops = small_ops();
        let u = BoundaryTrace::new(ops.dt(), l, r).unwrap();
        let ru = ops.time_reverse(&u).unwrap();
        prop_assert_eq!(ops.time_reverse(&ru).unwrap(), u.clone());
        prop_assert!((ru.l2_norm() - u.l2_norm()).abs() <= 1e-12 * u.l2_norm().max(1.0));
    }

    #[test]
    fn lowpass_energy_bound((l, r) in trace_strategy(401)) {
        let ops = small_ops();
        let f = BoundaryTrace::new(ops.dt(), l, r).unwrap();
        let jf = ops.lowpass_j(&f).unwrap().l2_norm();
        let t = ops.horizon();
        prop_assert!(jf * jf <= 0.5 * t * t * f.l2_norm().powi(2));
    }

    #[test]
    fn cauchy_schwarz((a1, a2) in trace_strategy(201), (b1, b2) in trace_strategy(201)) {
        let dt = small_ops().dt();
        let a = BoundaryTrace::new(dt, a1, a2).unwrap();
        let b = BoundaryTrace::new(dt, b1, b2).unwrap();
        let ip = boundary_inner_product(&a, &b).unwrap();
        prop_assert!(ip.abs() <= a.l2_norm() * b.l2_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn extend_then_project_is_identity((l, r) in trace_strategy(201)) {
        let ops = small_ops();
        let u = BoundaryTrace::new(ops.dt(), l, r).unwrap();
        prop_assert_eq!(ops.project(&ops.extend_zero(&u).unwrap()).unwrap(), u);
    }
}

#[test]
fn lowpass_of_extension_is_tail_integral() {
    let ops = small_ops();
    let t = ops.horizon();
    let h = BoundaryTrace::from_fn(ops.dt(), ops.steps(), |s, _| (PI * s / t).sin().powi(2));
    let j = ops.lowpass_j(&ops.extend_zero(&h).unwrap()).unwrap();
    // ½ ∫_t^T sin²(πs/T) ds
    let exact = |s: f64| 0.5 * ((t - s) / 2.0 + t / (4.0 * PI) * (2.0 * PI * s / t).sin());
    for n in 0..ops.steps() {
        let s = n as f64 * ops.dt();
        assert!(
            (j.left[n] - exact(s)).abs() < 1e-5,
            "{} {}",
            j.left[n],
            exact(s)
        );
    }
}

#[test]
fn connecting_operators_are_linear() {
    let grid = SimulationGrid::new(100, 3.0, 0.1).unwrap();
    let ops = BoundaryOps::new(grid);
    let m = Medium::from_fns(&grid, |x| 1.0 + 0.3 * (-x * x).exp(), |x| 1.0 + x * x).unwrap();
    let rho_dot = grid.sample(|x| (PI * x).cos());
    let h1 = random_pulse_control(1, 3.0).sample(grid.dt, grid.steps);
    let h2 = random_pulse_control(2, 3.0).sample(grid.dt, grid.steps);
    let h12 = h1.axpy(2.0, &h2).unwrap();
    let rel = |a: &BoundaryTrace, b: &BoundaryTrace| a.sub(b).unwrap().l2_norm() / b.l2_norm();

    let k = |h: &BoundaryTrace| ops.apply_k(&m, h).unwrap();
    assert!(rel(&k(&h12), &k(&h1).axpy(2.0, &k(&h2)).unwrap()) < 1e-8);
    let kd = |h: &BoundaryTrace| ops.apply_kdot(&m, &rho_dot, h).unwrap();
    assert!(rel(&kd(&h12), &kd(&h1).axpy(2.0, &kd(&h2)).unwrap()) < 1e-8);

    let zero = BoundaryTrace::zeros(grid.dt, grid.samples());
    assert_eq!(k(&zero).max_abs(), 0.0);
    assert_eq!(
        ops.apply_kdot(&m, &vec![0.0; grid.nodes()], &h1)
            .unwrap()
            .max_abs(),
        0.0
    );
}

#[test]
fn pairing_of_first_cosine_mode() {
    let grid = SimulationGrid::standard();
    let ops = BoundaryOps::new(grid);
    let flat = Medium::constant(&grid, 1.0).unwrap();
    let c = dalembert_control(HelmholtzTarget::cos(1), grid.t_final).unwrap();

    // ∫ cos(πx) cos²(πx/2) dx = 1/2
    let data = SimulatedData::new(grid, flat.clone(), grid.sample(|x| (PI * x).cos())).unwrap();
    let v = pairing_value(&ops, &data, ("c", &c), ("c", &c)).unwrap();
    assert!((v - 0.5).abs() < 0.01, "{v}");

    let data = SimulatedData::new(grid, flat, vec![0.0; grid.nodes()]).unwrap();
    let v = pairing_value(&ops, &data, ("c", &c), ("c", &c)).unwrap();
    assert!(v.abs() < 1e-6, "{v}");
}
