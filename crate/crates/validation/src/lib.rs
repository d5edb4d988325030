//! Acceptance checks, shared by `vbi validate` and the `acceptance` test
//! target. Each check reports what it measured next to what it expects.

use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vbi_core::bridge::{assemble, element_matrices};
use vbi_core::estimator::{continuous_model, observability_rank, FilterConfig, NoisePreset, ObjectiveContext};
use vbi_core::experiment::{run_identification, run_simulation, ExperimentConfig, Scenario, Simulation};
use vbi_core::newmark::NewmarkIntegrator;
use vbi_core::pso::{candidate_objective, expand, minimize, Bounds, CandidateVector, PsoConfig};
use vbi_core::road::axle_road_series;
use vbi_core::stats::{correlation, rms, rms_diff};
use vbi_core::vehicle::{build_system, rigid_body_system};

pub const VEHICLE_FREQS: [f64; 4] = [1.123, 2.035, 12.63, 16.83];
pub const BRIDGE_FREQS_INTACT: [f64; 4] = [3.305, 13.43, 31.05, 57.24];
pub const BRIDGE_FREQS_DAMAGED: [f64; 4] = [3.105, 13.42, 29.40, 56.99];
/// Static mid-span deflection of the reference truck on the reference span, m.
pub const STATIC_DEFLECTION: f64 = 3.4e-3;

#[derive(Debug, Clone)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub measured: String,
    pub expected: String,
    pub passed: bool,
    pub elapsed: Duration,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: measured {}; expected {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.expected,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(id: u8, name: &'static str, f: impl FnOnce() -> (String, String, bool)) -> Check {
    let t = Instant::now();
    let (measured, expected, passed) = f();
    Check {
        id,
        name,
        measured,
        expected,
        passed,
        elapsed: t.elapsed(),
    }
}

fn failed(e: impl fmt::Display) -> (String, String, bool) {
    (format!("error: {e}"), "no error".into(), false)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn list(xs: &[f64], digits: usize) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.digits$}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Nominal intact, noise-free configuration derived from `cfg`.
pub fn nominal(cfg: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        scenario: Scenario::Intact,
        noise_pct: 0.0,
        filter: None,
        ..cfg.clone()
    }
}

pub fn vehicle_modes(cfg: &ExperimentConfig) -> Check {
    timed(1, "vehicle natural frequencies", || {
        let t = Instant::now();
        let f = build_system(&cfg.vehicle).natural_frequencies();
        let ok = f.iter().zip(VEHICLE_FREQS).all(|(a, b)| rel_err(*a, b) <= 0.005) && t.elapsed().as_secs_f64() < 1.0;
        (
            format!("{} Hz", list(&f, 4)),
            format!("{} Hz ±0.5 %, < 1 s", list(&VEHICLE_FREQS, 3)),
            ok,
        )
    })
}

pub fn bridge_modes(cfg: &ExperimentConfig) -> Check {
    timed(2, "bridge natural frequencies", || {
        let t = Instant::now();
        let damaged = cfg.bridge.with_damage(cfg.damaged_element(), cfg.damage.factor);
        let run = |b| assemble(b).and_then(|beam| beam.natural_frequencies(4));
        let (fi, fd) = match (run(&cfg.bridge), run(&damaged)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return failed(e),
        };
        let within = |f: &[f64], r: &[f64]| f.iter().zip(r).all(|(a, b)| rel_err(*a, *b) <= 0.01);
        let ok = within(&fi, &BRIDGE_FREQS_INTACT) && within(&fd, &BRIDGE_FREQS_DAMAGED) && t.elapsed().as_secs_f64() < 1.0;
        (
            format!("intact {} damaged {} Hz", list(&fi, 3), list(&fd, 3)),
            format!(
                "intact {} damaged {} Hz ±1 %, < 1 s",
                list(&BRIDGE_FREQS_INTACT, 3),
                list(&BRIDGE_FREQS_DAMAGED, 3)
            ),
            ok,
        )
    })
}

/// Classical Hermite beam-element matrices.
pub fn closed_form_element(rho_a: f64, ei: f64, h: f64) -> (Matrix4<f64>, Matrix4<f64>) {
    #[rustfmt::skip]
    let m = Matrix4::new(
        156.0, 22.0 * h, 54.0, -13.0 * h,
        22.0 * h, 4.0 * h * h, 13.0 * h, -3.0 * h * h,
        54.0, 13.0 * h, 156.0, -22.0 * h,
        -13.0 * h, -3.0 * h * h, -22.0 * h, 4.0 * h * h,
    ) * (rho_a * h / 420.0);
    #[rustfmt::skip]
    let k = Matrix4::new(
        12.0, 6.0 * h, -12.0, 6.0 * h,
        6.0 * h, 4.0 * h * h, -6.0 * h, 2.0 * h * h,
        -12.0, -6.0 * h, 12.0, -6.0 * h,
        6.0 * h, 2.0 * h * h, -6.0 * h, 4.0 * h * h,
    ) * (ei / h.powi(3));
    (m, k)
}

pub fn element_oracle(cfg: &ExperimentConfig) -> Check {
    timed(3, "element matrices vs closed form", || {
        let mut worst = 0.0f64;
        let cases = [
            (cfg.bridge.rho_a, cfg.bridge.ei[0], cfg.bridge.elem_len),
            (1.0, 1.0, 1.0),
            (250.0, 3.3e7, 0.37),
            (9000.0, 2.0e11, 5.0),
        ];
        for (rho_a, ei, h) in cases {
            let (m, k) = element_matrices(rho_a, ei, h);
            let (mr, kr) = closed_form_element(rho_a, ei, h);
            for (a, b) in m.iter().zip(mr.iter()).chain(k.iter().zip(kr.iter())) {
                worst = worst.max(rel_err(*a, *b));
            }
        }
        (format!("max relative error {worst:.2e}"), "≤ 1e-10".into(), worst <= 1e-10)
    })
}

pub fn vbi_convergence(sim: &Simulation, elapsed: Duration) -> Check {
    timed(4, "VBI fixed-point convergence", || {
        let s = &sim.summary;
        let ratio = s.peak_mid_span_deflection / STATIC_DEFLECTION;
        let ok = s.converged
            && s.epsilon <= 1e-6
            && s.iterations <= 20
            && (0.8..=1.3).contains(&ratio)
            && elapsed.as_secs_f64() < 60.0;
        (
            format!(
                "converged={} ε={:.2e} iterations={} peak={:.3} mm ({ratio:.3}× static) in {:.2} s",
                s.converged,
                s.epsilon,
                s.iterations,
                s.peak_mid_span_deflection * 1e3,
                elapsed.as_secs_f64()
            ),
            "ε ≤ 1e-6 within 20 iterations, peak in [0.8, 1.3]× 3.4 mm, < 60 s".into(),
            ok,
        )
    })
}

pub fn contact_identity(sim: &Simulation) -> Check {
    timed(5, "contact-force identity", || {
        let e = sim.record.max_contact_identity_error();
        (format!("max relative difference {e:.2e}"), "≤ 1e-6".into(), e <= 1e-6)
    })
}

/// Vehicle-only response to the road under both axles, integrated in
/// quarter-car coordinates and in body (heave, pitch) coordinates.
pub fn half_car_equivalence(cfg: &ExperimentConfig) -> Check {
    timed(6, "half-car / quarter-car equivalence", || {
        let v = &cfg.vehicle;
        let road = match cfg.road() {
            Ok(r) => r,
            Err(e) => return failed(e),
        };
        let (x1, x2) = cfg.sim.trajectories(v.speed, v.wheelbase());
        let u = match (axle_road_series(&road, &x1), axle_road_series(&road, &x2)) {
            (Ok(a), Ok(b)) => [a, b],
            (Err(e), _) | (_, Err(e)) => return failed(e),
        };
        let quarter = build_system(v);
        let (rigid, t) = rigid_body_system(v, v.m_s * v.d_1 * v.d_2);
        let run = |sys: &vbi_core::vehicle::VehicleSystem| -> vbi_core::Result<DMatrix<f64>> {
            let (m, c, k) = sys.dense();
            let f = DMatrix::from_iterator(4, 2, sys.f.iter().copied());
            let mut integ = NewmarkIntegrator::new(m, c, k, cfg.sim.newmark)?;
            let load = |j: usize| &f * DVector::from_column_slice(&[u[0][j], u[1][j]]);
            let mut state = integ.initial_state(DVector::zeros(4), DVector::zeros(4), &load(0))?;
            let mut out = DMatrix::zeros(4, u[0].len());
            out.set_column(0, &state.eta);
            for j in 1..u[0].len() {
                integ.step(&mut state, &load(j));
                out.set_column(j, &state.eta);
            }
            Ok(out)
        };
        let (zq, zr) = match (run(&quarter), run(&rigid)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return failed(e),
        };
        let t = DMatrix::from_iterator(4, 4, t.iter().copied());
        let mapped = t * zr;
        let err = (&mapped - &zq).amax() / zq.amax();
        (format!("max relative difference {err:.2e}"), "≤ 1e-8".into(), err <= 1e-8)
    })
}

pub fn observability(cfg: &ExperimentConfig) -> Check {
    timed(7, "observability rank over prior draws", || {
        let bounds = cfg.bounds();
        let known = cfg.known();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0B5E);
        let mut ranks = Vec::with_capacity(100);
        for _ in 0..100 {
            let x = bounds.sample(&mut rng);
            let Ok((v, _)) = CandidateVector::from_slice(&x).and_then(|c| expand(&c, &known)) else {
                ranks.push(0);
                continue;
            };
            let (vm, h) = continuous_model(&v);
            let vd = DMatrix::from_iterator(12, 12, vm.iter().copied());
            let hd = DMatrix::from_iterator(4, 12, h.iter().copied());
            ranks.push(observability_rank(&vd, &hd));
        }
        let full = ranks.iter().filter(|&&r| r == 12).count();
        let min = ranks.iter().copied().min().unwrap_or(0);
        (format!("{full}/100 draws at rank 12 (min {min})"), "100/100".into(), full == 100)
    })
}

/// Relative RMS error and correlation of each axle's estimated input.
pub fn input_estimate(sim: &Simulation, cfg: &ExperimentConfig, noise: f64, seed: u64) -> vbi_core::Result<[(f64, f64); 2]> {
    let rec = sim.record.with_noise(noise, seed)?;
    let filter = FilterConfig::preset(NoisePreset::for_noise(noise));
    let ctx = ObjectiveContext::new(rec.measurements(), filter, cfg.sim.newmark, cfg.objective_dx())?;
    let ev = ctx.evaluate(&cfg.vehicle, &sim.bridge)?;
    Ok(std::array::from_fn(|i| {
        let truth = &sim.record.input_profile[i];
        (rms_diff(&ev.inputs[i], truth) / rms(truth), correlation(&ev.inputs[i], truth))
    }))
}

pub fn kalman_closed_loop(sim: &Simulation, cfg: &ExperimentConfig) -> Check {
    timed(8, "Kalman input estimate", || {
        let clean = match input_estimate(sim, cfg, 0.0, 0) {
            Ok(r) => r,
            Err(e) => return failed(e),
        };
        let mut corr = Vec::new();
        for s in 0..10u64 {
            match input_estimate(sim, cfg, 0.35, cfg.seed.wrapping_add(1000 + s)) {
                Ok(r) => corr.extend([r[0].1, r[1].1]),
                Err(e) => return failed(e),
            }
        }
        let min_corr = corr.iter().copied().fold(f64::INFINITY, f64::min);
        let mut sorted = corr.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let ok = clean.iter().all(|(e, _)| *e <= 0.05) && min_corr >= 0.7;
        (
            format!(
                "zero noise: RMS error {:.2} % / {:.2} % (front/rear); 35 % noise over 10 seeds: min correlation {min_corr:.3}, median {median:.3}",
                clean[0].0 * 100.0,
                clean[1].0 * 100.0
            ),
            "RMS error ≤ 5 % at zero noise; correlation ≥ 0.7 at 35 % noise".into(),
            ok,
        )
    })
}

pub fn objective_discrimination(sim: &Simulation, cfg: &ExperimentConfig) -> Check {
    timed(9, "objective discrimination", || {
        let ctx = match ObjectiveContext::new(
            sim.record.clean_measurements(),
            FilterConfig::preset(NoisePreset::None),
            cfg.sim.newmark,
            cfg.objective_dx(),
        ) {
            Ok(c) => c,
            Err(e) => return failed(e),
        };
        let known = cfg.known();
        let truth = CandidateVector::from_params(&cfg.vehicle, &sim.bridge).to_vec();
        let j0 = candidate_objective(&ctx, &known, &truth);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0D15);
        let wins = (0..50)
            .filter(|_| {
                let x: Vec<f64> = truth
                    .iter()
                    .map(|t| t * if rng.gen::<bool>() { 1.1 } else { 0.9 })
                    .collect();
                j0 < candidate_objective(&ctx, &known, &x)
            })
            .count();
        (
            format!("J(truth) = {j0:.3e} below J(perturbed) in {wins}/50"),
            "≥ 45/50".into(),
            wins >= 45,
        )
    })
}

pub fn pso_benchmark(seed: u64) -> Check {
    timed(10, "PSO sphere benchmark", || {
        let bounds = Bounds::new(vec![-5.0; 5], vec![5.0; 5]).expect("valid bounds");
        let cfg = PsoConfig {
            samples: 20,
            iterations: 100,
            alpha: [0.6, 0.3, 0.1],
        };
        let mut hits = 0;
        let mut monotone = true;
        let mut dists = Vec::new();
        for trial in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial));
            let target: Vec<f64> = (0..5).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let f = |x: &[f64]| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            let swarm = match minimize(&f, &bounds, &cfg, rng.gen()) {
                Ok(s) => s,
                Err(e) => return failed(e),
            };
            monotone &= swarm.history.windows(2).all(|w| w[1] <= w[0]);
            let d = f(&swarm.best_x).sqrt();
            dists.push(d);
            if d <= 1e-2 {
                hits += 1;
            }
        }
        dists.sort_by(f64::total_cmp);
        (
            format!(
                "{hits}/20 trials within 1e-2 (median distance {:.3}); global best non-increasing: {monotone}",
                dists[10]
            ),
            "≥ 19/20 within 1e-2; non-increasing in every run".into(),
            hits >= 19 && monotone,
        )
    })
}

/// Configuration of the desk-scale identification study.
pub fn desk_scale(cfg: &ExperimentConfig, scenario: Scenario) -> ExperimentConfig {
    ExperimentConfig {
        scenario,
        noise_pct: 0.0,
        filter: None,
        runs: 10,
        pso: PsoConfig {
            samples: 20,
            iterations: 30,
            ..cfg.pso.clone()
        },
        ..cfg.clone()
    }
}

fn desk_check(id: u8, name: &'static str, cfg: &ExperimentConfig, extra: &str) -> Check {
    timed(id, name, || {
        let batch = match run_identification(cfg) {
            Ok(b) => b,
            Err(e) => return failed(e),
        };
        let done = batch.successes().count();
        let dev = |n: &str| batch.deviation(n).unwrap_or((f64::NAN, f64::NAN));
        let (p1, q1) = dev("m_s1");
        let (p2, q2) = dev("m_s2");
        let (pa, qa) = dev("alpha_c");
        let (pb, qb) = dev("beta_c");
        let mut measured = format!(
            "{done}/{} runs; mean |x−1| prior→posterior: m_s1 {p1:.4}→{q1:.4}, m_s2 {p2:.4}→{q2:.4} (α_c {pa:.4}→{qa:.4}, β_c {pb:.4}→{qb:.4})",
            cfg.runs
        );
        if !extra.is_empty() {
            if let Some((_, post)) = batch.column(extra) {
                measured += &format!(", {extra} posterior mean {:.3}", vbi_core::stats::mean(&post));
            }
        }
        (
            measured,
            "posterior deviation < prior deviation for m_s1 and m_s2".into(),
            done > 0 && q1 < p1 && q2 < p2,
        )
    })
}

pub fn desk_intact(cfg: &ExperimentConfig) -> Check {
    desk_check(11, "desk-scale identification, intact", &desk_scale(cfg, Scenario::Intact), "")
}

pub fn desk_damaged(cfg: &ExperimentConfig) -> Check {
    let name = format!("ei_{}", cfg.damaged_element() + 1);
    desk_check(
        12,
        "desk-scale identification, damaged",
        &desk_scale(cfg, Scenario::Damaged),
        &name,
    )
}

/// Nominal simulation used by several checks, with its wall time.
pub fn nominal_simulation(cfg: &ExperimentConfig) -> vbi_core::Result<(Simulation, Duration)> {
    let t = Instant::now();
    let sim = run_simulation(&nominal(cfg))?;
    Ok((sim, t.elapsed()))
}

/// Every check in order.
pub fn run_all(cfg: &ExperimentConfig) -> vbi_core::Result<Vec<Check>> {
    let nom = nominal(cfg);
    let mut out = vec![vehicle_modes(&nom), bridge_modes(&nom), element_oracle(&nom)];
    let (sim, elapsed) = nominal_simulation(&nom)?;
    out.push(vbi_convergence(&sim, elapsed));
    out.push(contact_identity(&sim));
    out.push(half_car_equivalence(&nom));
    out.push(observability(&nom));
    out.push(kalman_closed_loop(&sim, &nom));
    out.push(objective_discrimination(&sim, &nom));
    out.push(pso_benchmark(nom.seed));
    out.push(desk_intact(&nom));
    out.push(desk_damaged(&nom));
    Ok(out)
}
