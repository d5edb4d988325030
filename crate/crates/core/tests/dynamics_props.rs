use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use vbi_core::bridge::{assemble, element_matrices, hermite_basis, BridgeParams};
use vbi_core::newmark::{NewmarkConfig, NewmarkIntegrator};
use vbi_core::vehicle::{build_system, rigid_body_system, VehicleParams};

fn vehicle_strategy() -> impl Strategy<Value = VehicleParams> {
    (
        0.8f64..1.2,
        0.8f64..1.2,
        0.8f64..1.2,
        0.1f64..0.9,
        0.8f64..1.2,
        0.8f64..1.2,
        0.8f64..1.2,
    )
        .prop_map(|(a, b, c, frac, d, e, f)| {
            let r = VehicleParams::reference();
            let wb = r.wheelbase();
            VehicleParams {
                m_s: r.m_s * a,
                c_s1: r.c_s1 * b,
                c_s2: r.c_s2 * c,
                k_s1: r.k_s1 * d,
                k_s2: r.k_s2 * e,
                d_1: wb * frac,
                d_2: wb * (1.0 - frac),
                m_u1: r.m_u1 * f,
                m_u2: r.m_u2 * a,
                k_u1: r.k_u1 * b,
                k_u2: r.k_u2 * d,
                speed: r.speed,
            }
        })
}

fn bridge_strategy() -> impl Strategy<Value = BridgeParams> {
    (
        1usize..12,
        0.5f64..4.0,
        100.0f64..1e4,
        prop::collection::vec(1e7f64..1e11, 12),
        0.0f64..2.0,
        0.0f64..0.01,
    )
        .prop_map(|(n, h, rho_a, ei, a, b)| BridgeParams {
            rho_a,
            ei: ei[..n].to_vec(),
            alpha_c: a,
            beta_c: b,
            span: n as f64 * h,
            elem_len: h,
        })
}

fn max_asym(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax() / m.amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_partition_of_unity(x in -1.0f64..=1.0) {
        let h = hermite_basis(x).unwrap();
        prop_assert!((h.phi[0] + h.phi[2] - 1.0).abs() < 1e-14);
        // rigid rotation: w = X reproduced with slopes 1 at both nodes
        prop_assert!((-h.phi[0] + h.phi[1] + h.phi[2] + h.phi[3] - x).abs() < 1e-14);
    }

    #[test]
    fn element_matrices_are_linear_in_properties(rho in 1.0f64..1e4, ei in 1e3f64..1e11, h in 0.1f64..5.0, s in 0.1f64..10.0) {
        let (m1, k1) = element_matrices(rho, ei, h);
        let (m2, k2) = element_matrices(rho * s, ei * s, h);
        prop_assert!((m2 - m1 * s).amax() <= 1e-12 * m2.amax());
        prop_assert!((k2 - k1 * s).amax() <= 1e-12 * k2.amax());
    }

    #[test]
    fn assembled_beam_is_symmetric_definite(p in bridge_strategy()) {
        let beam = assemble(&p).unwrap();
        prop_assert!(max_asym(&beam.m) <= 1e-12);
        prop_assert!(max_asym(&beam.k) <= 1e-12);
        prop_assert!(beam.m.clone().cholesky().is_some());
        prop_assert!(beam.k.clone().cholesky().is_some());
        let c = &beam.m * p.alpha_c + &beam.k * p.beta_c;
        prop_assert_eq!(&beam.c, &c);
    }

    #[test]
    fn static_midspan_load(n_half in 1usize..6, h in 1.0f64..4.0, ei in 1e8f64..1e11, load in 1e3f64..1e5) {
        let p = BridgeParams::uniform(1000.0, ei, 0.0, 0.0, 2.0 * n_half as f64 * h, h);
        let beam = assemble(&p).unwrap();
        let mid = p.span / 2.0;
        let y = beam.static_deflection(&[mid], &[-load]).unwrap();
        let w = beam.deflection_at(y.as_slice(), mid);
        let exact = -load * p.span.powi(3) / (48.0 * ei);
        prop_assert!((w / exact - 1.0).abs() < 0.005, "{} vs {}", w, exact);
    }

    #[test]
    fn sprung_mass_apportionment_sums(v in vehicle_strategy()) {
        let (a, b) = v.apportion_sprung_mass();
        prop_assert!((a + b - v.m_s).abs() <= 1e-9 * v.m_s);
        let (f1, f2) = v.static_tire_preload();
        prop_assert!((f1 + f2 + v.total_mass() * 9.81).abs() <= 1e-9 * v.total_mass() * 9.81);
    }

    #[test]
    fn vehicle_stiffness_positive_definite(v in vehicle_strategy()) {
        let s = build_system(&v);
        prop_assert_eq!(s.k, s.k.transpose());
        prop_assert!(s.k.cholesky().is_some());
    }

    #[test]
    fn decoupling_preserves_frequencies(v in vehicle_strategy()) {
        let quarter = build_system(&v).natural_frequencies();
        let (rigid, _) = rigid_body_system(&v, v.m_s * v.d_1 * v.d_2);
        let coupled = rigid.natural_frequencies();
        for (a, b) in quarter.iter().zip(&coupled) {
            prop_assert!((a - b).abs() <= 1e-9 * b, "{} vs {}", a, b);
        }
    }
}

fn energy(m: &DMatrix<f64>, k: &DMatrix<f64>, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
    0.5 * (v.dot(&(m * v)) + x.dot(&(k * x)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn damped_vehicle_energy_never_increases(v in vehicle_strategy(), z0 in prop::array::uniform4(-0.02f64..0.02)) {
        let (m, c, k) = build_system(&v).dense();
        let mut integ = NewmarkIntegrator::new(m.clone(), c, k.clone(), NewmarkConfig::default()).unwrap();
        let zero = DVector::zeros(4);
        let mut state = integ.initial_state(DVector::from_column_slice(&z0), DVector::zeros(4), &zero).unwrap();
        let mut e_prev = energy(&m, &k, &state.eta, &state.eta_dot);
        let e0 = e_prev;
        for _ in 0..3000 {
            integ.step(&mut state, &zero);
            let e = energy(&m, &k, &state.eta, &state.eta_dot);
            prop_assert!(e <= e_prev + 1e-12 * e0);
            e_prev = e;
        }
        prop_assert!(e_prev < e0);
    }

    #[test]
    fn undamped_energy_is_conserved(mass in 1.0f64..1e4, stiff in 1e2f64..1e7, x0 in -1.0f64..1.0, dt in 1e-4f64..1e-2) {
        let m = DMatrix::from_element(1, 1, mass);
        let k = DMatrix::from_element(1, 1, stiff);
        let mut integ = NewmarkIntegrator::new(m.clone(), DMatrix::zeros(1, 1), k.clone(), NewmarkConfig::with_dt(dt)).unwrap();
        let zero = DVector::zeros(1);
        let mut s = integ.initial_state(DVector::from_element(1, x0), DVector::zeros(1), &zero).unwrap();
        let e0 = energy(&m, &k, &s.eta, &s.eta_dot);
        for _ in 0..2000 {
            integ.step(&mut s, &zero);
        }
        let e = energy(&m, &k, &s.eta, &s.eta_dot);
        prop_assert!((e - e0).abs() <= 1e-9 * e0.max(1e-300));
    }
}

#[test]
fn newmark_is_second_order() {
    // SDOF free vibration; displacement error at t = 1 s against the exact cosine
    let omega = 2.0 * std::f64::consts::PI * 1.7;
    let err = |dt: f64| {
        let m = DMatrix::from_element(1, 1, 1.0);
        let k = DMatrix::from_element(1, 1, omega * omega);
        let mut integ = NewmarkIntegrator::new(m, DMatrix::zeros(1, 1), k, NewmarkConfig::with_dt(dt)).unwrap();
        let zero = DVector::zeros(1);
        let mut s = integ.initial_state(DVector::from_element(1, 1.0), DVector::zeros(1), &zero).unwrap();
        let n = (1.0 / dt).round() as usize;
        for _ in 0..n {
            integ.step(&mut s, &zero);
        }
        (s.eta[0] - omega.cos()).abs()
    };
    let (e1, e2, e3) = (err(4e-3), err(2e-3), err(1e-3));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn half_car_trajectories_match_quarter_cars() {
    // harmonic axle inputs offset by the wheelbase travel time
    let v = VehicleParams::reference();
    let cfg = NewmarkConfig::default();
    let n = 6001;
    let lag = v.wheelbase() / v.speed;
    let road = |t: f64| if t <= 0.0 { 0.0 } else { 0.004 * (2.0 * t).sin() * (1.0 - (-t).exp()) + 0.001 * (13.0 * t).sin() * t.min(1.0) };
    let u: Vec<[f64; 2]> = (0..n).map(|k| { let t = k as f64 * cfg.dt; [road(t), road(t - lag)] }).collect();
    let run = |sys: &vbi_core::vehicle::VehicleSystem| {
        let (m, c, k) = sys.dense();
        let f = DMatrix::from_iterator(4, 2, sys.f.iter().copied());
        let mut integ = NewmarkIntegrator::new(m, c, k, cfg).unwrap();
        let load = |j: usize| &f * DVector::from_column_slice(&u[j]);
        let mut s = integ.initial_state(DVector::zeros(4), DVector::zeros(4), &load(0)).unwrap();
        let mut out = vec![s.eta.clone()];
        for j in 1..n {
            integ.step(&mut s, &load(j));
            out.push(s.eta.clone());
        }
        out
    };
    let quarter = run(&build_system(&v));
    let (rigid, t) = rigid_body_system(&v, v.m_s * v.d_1 * v.d_2);
    let coupled = run(&rigid);
    let t = DMatrix::from_iterator(4, 4, t.iter().copied());
    let scale = quarter.iter().map(|z| z.amax()).fold(0.0, f64::max);
    let worst = quarter
        .iter()
        .zip(&coupled)
        .map(|(a, q)| (a - &t * q).amax())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8 * scale, "{worst} vs {scale}");
}
