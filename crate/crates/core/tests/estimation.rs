use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vbi_core::bridge::{assemble, BridgeParams};
use vbi_core::estimator::*;
use vbi_core::experiment::{run_simulation, ExperimentConfig, Simulation};
use vbi_core::measurement::Measurements;
use vbi_core::newmark::NewmarkConfig;
use vbi_core::pso::{expand, CandidateVector};
use vbi_core::road::RoadUnevenness;
use vbi_core::stats::{mean, rms, rms_diff};
use vbi_core::vehicle::{VehicleParams, GRAVITY};

fn nominal(seed: u64) -> (ExperimentConfig, Simulation) {
    let cfg = ExperimentConfig {
        seed,
        ..Default::default()
    };
    let sim = run_simulation(&cfg).unwrap();
    (cfg, sim)
}

fn on_bridge(sim: &Simulation, span: f64) -> Vec<usize> {
    (0..sim.record.len())
        .filter(|&k| (0.0..=span).contains(&sim.record.x1[k]) || (0.0..=span).contains(&sim.record.x2[k]))
        .collect()
}

fn pick(v: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&k| v[k]).collect()
}

fn context(sim: &Simulation, noise: f64, seed: u64) -> ObjectiveContext {
    let rec = sim.record.with_noise(noise, seed).unwrap();
    ObjectiveContext::new(rec.measurements(), FilterConfig::for_noise(noise), NewmarkConfig::default(), 0.01).unwrap()
}

/// Unscaled truncated series `Σ_{k<20} A^k / k!`.
fn taylor20(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..20 {
        term = &term * a / k as f64;
        sum += &term;
    }
    sum
}

#[test]
fn discretization_matches_series_oracle() {
    let (v, _) = continuous_model(&VehicleParams::reference());
    let dt = 1e-3;
    let v_bar = discretize(&v, dt).unwrap();
    let a = DMatrix::from_iterator(12, 12, v.iter().copied()) * dt;
    let oracle = taylor20(&a);
    let worst = v_bar.iter().zip(oracle.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn observability_full_rank_over_prior(seed in any::<u64>()) {
        let cfg = ExperimentConfig::default();
        let x = cfg.bounds().sample(&mut ChaCha8Rng::seed_from_u64(seed));
        let (v, _) = expand(&CandidateVector::from_slice(&x).unwrap(), &cfg.known()).unwrap();
        let (vm, h) = continuous_model(&v);
        let rank = observability_rank(
            &DMatrix::from_iterator(12, 12, vm.iter().copied()),
            &DMatrix::from_iterator(4, 12, h.iter().copied()),
        );
        prop_assert_eq!(rank, 12);
    }
}

#[test]
fn covariance_stays_symmetric_psd() {
    let (_, sim) = nominal(1);
    let cfg = FilterConfig::for_noise(0.0);
    let model = build_state_space(&VehicleParams::reference(), &cfg, 1e-3).unwrap();
    let obs = observations(&sim.record.measurements(), &NewmarkConfig::default());
    let mut fs = FilterState::initial(&cfg);
    for s in obs.iter().skip(1) {
        fs = kalman_step(&fs, s, &model).unwrap();
        assert_eq!(fs.p, fs.p.transpose());
        let scale = fs.p.amax();
        let min = SymmetricEigen::new(fs.p).eigenvalues.min();
        assert!(min >= -1e-12 * scale.max(1.0), "{min}");
    }
}

#[test]
fn zero_input_gives_zero_estimate() {
    let n = 3001;
    let meas = Measurements {
        dt: 1e-3,
        x1: (0..n).map(|k| k as f64 * 0.01).collect(),
        x2: (0..n).map(|k| k as f64 * 0.01 - 4.4).collect(),
        acc: [vec![0.0; n], vec![0.0; n]],
    };
    let cfg = FilterConfig::for_noise(0.0);
    let model = build_state_space(&VehicleParams::reference(), &cfg, 1e-3).unwrap();
    let h = estimate_inputs(&meas, &model, &cfg, &NewmarkConfig::default()).unwrap();
    assert!(h.states.iter().all(|z| z.amax() <= 1e-9));
}

#[test]
fn noise_free_input_estimate_is_accurate() {
    let (cfg, sim) = nominal(3);
    let ev = context(&sim, 0.0, 0).evaluate(&cfg.vehicle, &sim.bridge).unwrap();
    let idx = on_bridge(&sim, cfg.bridge.span);
    for i in 0..2 {
        let truth = pick(&sim.record.input_profile[i], &idx);
        let err = rms_diff(&pick(&ev.inputs[i], &idx), &truth) / rms(&truth);
        assert!(err <= 0.05, "axle {i}: {err}");
    }
}

#[test]
fn front_axle_estimated_at_least_as_well_as_rear() {
    let mut front = Vec::new();
    let mut rear = Vec::new();
    for seed in 0..10 {
        let (cfg, sim) = nominal(seed);
        let ev = context(&sim, 0.0, 0).evaluate(&cfg.vehicle, &sim.bridge).unwrap();
        let idx = on_bridge(&sim, cfg.bridge.span);
        let err = |i: usize| {
            let truth = pick(&sim.record.input_profile[i], &idx);
            rms_diff(&pick(&ev.inputs[i], &idx), &truth) / rms(&truth)
        };
        front.push(err(0));
        rear.push(err(1));
    }
    assert!(mean(&front) <= mean(&rear), "front {front:?} rear {rear:?}");
}

#[test]
fn innovations_are_consistent_with_matched_noise() {
    let cfg = FilterConfig::preset(NoisePreset::Moderate);
    let model = build_state_space(&VehicleParams::reference(), &cfg, 1e-3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let mut z = StateVector::zeros();
    let mut fs = FilterState {
        z_hat: StateVector::zeros(),
        p: StateMatrix::zeros(),
    };
    let mut nis = Vec::new();
    for _ in 0..3000 {
        let w = StateVector::from_fn(|i, _| cfg.q_diag[i].sqrt() * std_normal.sample(&mut rng));
        z = model.v_bar * z + w;
        let e = ObsVector::from_fn(|i, _| cfg.r_diag[i].sqrt() * std_normal.sample(&mut rng));
        let s = model.h * z + e;
        let (next, innov) = kalman_update(&fs, &s, &model).unwrap();
        nis.push(innov.nis().unwrap());
        fs = next;
    }
    let avg = mean(&nis);
    assert!((0.5 * 4.0..=2.0 * 4.0).contains(&avg), "{avg}");
}

#[test]
fn zero_forces_leave_bridge_at_rest() {
    let n = 2000;
    let x1: Vec<f64> = (0..n).map(|k| -2.0 + k as f64 * 0.02).collect();
    let x2: Vec<f64> = x1.iter().map(|x| x - 4.4).collect();
    let est = bridge_response(&[vec![0.0; n], vec![0.0; n]], &BridgeParams::reference(), &x1, &x2, &NewmarkConfig::default()).unwrap();
    assert!(est.y.iter().all(|&v| v == 0.0));
    assert!(est.profile.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn standing_axle_loads_settle_to_static_solution() {
    let v = VehicleParams::reference();
    let b = BridgeParams::reference();
    let (ms1, ms2) = v.apportion_sprung_mass();
    let loads = [-(ms1 + v.m_u1) * GRAVITY, -(ms2 + v.m_u2) * GRAVITY];
    let pos = [17.0, 17.0 - v.wheelbase()];
    let n = 40_001;
    let est = bridge_response(
        &[vec![loads[0]; n], vec![loads[1]; n]],
        &b,
        &vec![pos[0]; n],
        &vec![pos[1]; n],
        &NewmarkConfig::default(),
    )
    .unwrap();
    let beam = assemble(&b).unwrap();
    let y_static = beam.static_deflection(&pos, &loads).unwrap();
    let last = est.y.column(n - 1);
    let rel = (last - &y_static).amax() / y_static.amax();
    assert!(rel < 0.01, "{rel}");
}

#[test]
fn estimated_bridge_response_tracks_simulation() {
    let (cfg, sim) = nominal(4);
    let model = build_state_space(&cfg.vehicle, &FilterConfig::for_noise(0.0), 1e-3).unwrap();
    let hist = estimate_inputs(&sim.record.clean_measurements(), &model, &FilterConfig::for_noise(0.0), &NewmarkConfig::default()).unwrap();
    let est = estimate_bridge_response(&hist, &model, &cfg.vehicle, &sim.bridge, &sim.record.x1, &sim.record.x2, &NewmarkConfig::default()).unwrap();
    let beam = assemble(&sim.bridge).unwrap();
    let idx = on_bridge(&sim, cfg.bridge.span);
    let mid: Vec<f64> = idx.iter().map(|&k| beam.deflection_at(est.y.column(k).as_slice(), 15.0)).collect();
    let truth = pick(&sim.record.mid_span, &idx);
    let err = rms_diff(&mid, &truth) / rms(&truth);
    assert!(err <= 0.10, "{err}");
}

#[test]
fn recovered_roads_match_truth() {
    let (cfg, sim) = nominal(6);
    let ev = context(&sim, 0.0, 0).evaluate(&cfg.vehicle, &sim.bridge).unwrap();
    for est in [&ev.roads.front, &ev.roads.rear] {
        let truth: Vec<f64> = est.grid().map(|x| sim.road.sample_at(x).unwrap()).collect();
        let err = rms_diff(est.elevations(), &truth) / rms(&truth);
        assert!(err <= 0.05, "{err}");
    }
    assert!(ev.roads.front.x0() >= sim.record.x1[0] - 1e-9);
    assert!(ev.roads.front.x_end() <= sim.record.x2[sim.record.len() - 1] + 1e-9);
}

#[test]
fn rigid_bridge_decouples_road_from_bridge_parameters() {
    let (cfg, sim) = nominal(8);
    let ctx = context(&sim, 0.0, 0);
    let rigid = |rho: f64, beta: f64| BridgeParams {
        rho_a: rho,
        beta_c: beta,
        ei: vec![1.56e10 * 1e8; 15],
        ..BridgeParams::reference()
    };
    let a = ctx.evaluate(&cfg.vehicle, &rigid(4400.0, 0.0052)).unwrap();
    let b = ctx.evaluate(&cfg.vehicle, &rigid(3000.0, 0.001)).unwrap();
    let scale = rms(a.roads.front.elevations());
    for (x, y) in [(&a.roads.front, &b.roads.front), (&a.roads.rear, &b.roads.rear)] {
        assert!(rms_diff(x.elevations(), y.elevations()) <= 1e-6 * scale);
    }
}

#[test]
fn objective_of_constant_offset() {
    let n = 37;
    let c = 0.003;
    let a = RoadUnevenness::from_fn(1.0, 0.01, n, |x| x.sin() * 0.01).unwrap();
    let b = RoadUnevenness::from_fn(1.0, 0.01, n, |x| x.sin() * 0.01 + c).unwrap();
    let j = objective(&a, &b).unwrap();
    assert!((j - n as f64 * c * c).abs() < 1e-15);
}

#[test]
fn preset_follows_requested_noise() {
    let cfg = ExperimentConfig {
        noise_pct: 0.35,
        ..Default::default()
    };
    let f = cfg.filter_config();
    assert_eq!(f.r_diag, [6.00e-3, 6.00e-3, 7.50e-3, 7.50e-3]);
    assert!((f.q_diag[0] - 60.0e-7).abs() < 1e-20);
    assert!((f.q_diag[4] - 45.0e-7).abs() < 1e-20);
}
