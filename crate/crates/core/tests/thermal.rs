// SPDX-License-Identifier: Apache-2.0

use chipdse::place::{Floorplan, Placement, Rotation};
use chipdse::thermal::{
    compare_soc_vs_chiplet, peak_temperature, rasterize, soc_vs_chiplet_plans, solve_steady_state,
    top_heat_flow, ConductanceGrid, Layer, LayerRole, PowerMap, ThermalStack,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn three_layer_stack() -> ThermalStack {
    ThermalStack {
        layers: vec![
            Layer::new("interposer", LayerRole::Interposer, 0.1e-3, 130.0),
            Layer::new("chiplet", LayerRole::Chiplet, 0.15e-3, 130.0),
            Layer::new("sink", LayerRole::Sink, 2.0e-3, 200.0),
        ],
        convection_h: 1000.0,
        ambient: 45.0,
    }
}

fn random_map(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> PowerMap {
    let mut pm = PowerMap::zeros(nx, ny, 1e-3, 1e-3);
    for p in pm.power.iter_mut() {
        if rng.gen_bool(0.4) {
            *p = rng.gen_range(0.0..0.5);
        }
    }
    if pm.total() == 0.0 {
        pm.power[0] = 0.1;
    }
    pm
}

/// Temperature rise from a dense LU solve of the same network.
fn dense_rise(pm: &PowerMap, stack: &ThermalStack) -> Vec<f64> {
    let g = ConductanceGrid::new(pm.nx, pm.ny, pm.dx, pm.dy, stack).unwrap();
    let n = g.len();
    let rows = g.to_dense();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let plane = pm.nx * pm.ny;
    let active = stack.active_layer();
    let mut b = DVector::zeros(n);
    for k in 0..plane {
        b[active * plane + k] = pm.power[k];
    }
    m.lu()
        .solve(&b)
        .expect("conductance matrix is non-singular")
        .iter()
        .copied()
        .collect()
}

#[test]
fn zero_power_is_exactly_ambient() {
    let stack = ThermalStack::default_2p5d(45.0);
    let tf = solve_steady_state(&PowerMap::zeros(7, 5, 1e-3, 1e-3), &stack).unwrap();
    assert!(tf.temperature.iter().all(|&t| t == 45.0));
    assert_eq!(peak_temperature(&tf, "chiplet").unwrap(), 45.0);
}

#[test]
fn energy_is_conserved_on_random_maps() {
    let stack = ThermalStack::default_2p5d(45.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let nx = rng.gen_range(3..12);
        let ny = rng.gen_range(3..12);
        let pm = random_map(&mut rng, nx, ny);
        let tf = solve_steady_state(&pm, &stack).unwrap();
        let out = top_heat_flow(&tf, &stack);
        let err = (out - pm.total()).abs() / pm.total();
        assert!(err <= 1e-3, "in {} W, out {out} W", pm.total());
        let lo = tf.temperature.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(lo >= 45.0 - 1e-9);
        assert!(tf.temperature.iter().all(|t| t.is_finite()));
    }
}

#[test]
fn superposition_holds() {
    let stack = ThermalStack::default_2p5d(45.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let a = random_map(&mut rng, 9, 7);
        let b = random_map(&mut rng, 9, 7);
        let mut sum = a.clone();
        for (s, p) in sum.power.iter_mut().zip(&b.power) {
            *s += p;
        }
        let ra = solve_steady_state(&a, &stack).unwrap().rise();
        let rb = solve_steady_state(&b, &stack).unwrap().rise();
        let rs = solve_steady_state(&sum, &stack).unwrap().rise();
        let scale = rs.iter().copied().fold(0.0, f64::max);
        for k in 0..rs.len() {
            assert!((rs[k] - ra[k] - rb[k]).abs() <= 1e-6 * scale);
        }
    }
}

#[test]
fn iterative_matches_dense_solve_on_small_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let stack = three_layer_stack();
    for (nx, ny) in [(1, 1), (2, 3), (4, 4), (6, 6), (5, 2)] {
        let pm = random_map(&mut rng, nx, ny);
        let it = solve_steady_state(&pm, &stack).unwrap().rise();
        let dense = dense_rise(&pm, &stack);
        let scale = dense.iter().copied().fold(0.0, f64::max);
        for (a, b) in it.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-6 * scale, "{nx}x{ny}: {a} vs {b}");
        }
    }
}

#[test]
fn raising_any_cell_power_never_cools_any_cell() {
    let stack = three_layer_stack();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base = random_map(&mut rng, 4, 4);
    let t0 = dense_rise(&base, &stack);
    let it0 = solve_steady_state(&base, &stack).unwrap().rise();
    let scale = t0.iter().copied().fold(0.0, f64::max);
    for k in 0..base.power.len() {
        let mut bumped = base.clone();
        bumped.power[k] += 0.05;
        let t1 = dense_rise(&bumped, &stack);
        let it1 = solve_steady_state(&bumped, &stack).unwrap().rise();
        for c in 0..t0.len() {
            assert!(t1[c] >= t0[c], "cell {c} cooled when cell {k} heated");
            assert!(it1[c] >= it0[c] - 1e-6 * scale);
        }
    }
}

fn single(w: f64, h: f64, x: f64, y: f64, pw: f64, ph: f64, p: f64) -> Floorplan {
    Floorplan::unconnected(
        w,
        h,
        0.0,
        vec![Placement {
            name: "hot".into(),
            width: pw,
            height: ph,
            power: p,
            x,
            y,
            rotation: Rotation::R0,
        }],
    )
}

#[test]
fn peak_lies_in_hot_chiplet_footprint() {
    let stack = ThermalStack::default_2p5d(45.0);
    let fp = single(20.0, 20.0, 2.0, 11.0, 5.0, 6.0, 10.0);
    let tf = solve_steady_state(&rasterize(&fp, 1.0).unwrap(), &stack).unwrap();
    let l = tf.layer_index("chiplet").unwrap();
    let (i, j, _) = tf.hottest_cell(l);
    assert!((2..7).contains(&i) && (11..17).contains(&j), "({i}, {j})");
    let chip = peak_temperature(&tf, "chiplet").unwrap();
    let spreader = peak_temperature(&tf, "spreader").unwrap();
    assert!(chip >= spreader);
}

#[test]
fn rasterize_conserves_power() {
    let fp = single(13.0, 9.0, 1.3, 2.7, 4.4, 3.1, 7.5);
    let pm = rasterize(&fp, 1.0).unwrap();
    assert!((pm.total() - 7.5).abs() <= 1e-9 * 7.5);
}

#[test]
fn wider_gaps_never_raise_split_peak() {
    let stack = ThermalStack::default_2p5d(45.0);
    let mut last = f64::INFINITY;
    for gap in [2.0, 4.0, 8.0] {
        let (soc, split) = soc_vs_chiplet_plans(45.0, 120.0, 858.0, 170.0, gap).unwrap();
        let c = compare_soc_vs_chiplet(&soc, &split, &stack, 1.0).unwrap();
        assert!(c.peak_split <= last);
        last = c.peak_split;
    }
}

#[test]
fn identical_plans_compare_equal() {
    let stack = ThermalStack::default_2p5d(45.0);
    let (_, split) = soc_vs_chiplet_plans(45.0, 120.0, 858.0, 170.0, 4.0).unwrap();
    let c = compare_soc_vs_chiplet(&split, &split, &stack, 1.0).unwrap();
    assert_eq!(c.delta, 0.0);
}
