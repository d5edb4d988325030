//! Forward simulation of the coupled vehicle-bridge system.
//!
//! The coupling is resolved by fixed-point iteration over whole-run
//! histories: a vehicle pass under the current input profiles, contact
//! forces from the vehicle accelerations, a bridge pass under those forces,
//! and an input update `u = r + Lᵀ y`. Iteration stops when the relative
//! change of the vehicle displacement history drops below `eps_max`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bridge::{assemble, BeamSystem, BridgeParams, PointWeights};
use crate::error::{Error, Result};
use crate::measurement::Measurements;
use crate::newmark::{DynState, NewmarkConfig, NewmarkIntegrator};
use crate::road::{axle_road_series, RoadUnevenness};
use crate::stats::rms;
use crate::vehicle::{build_system, contact_forces, inertial_contact_force, VehicleParams, GRAVITY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Distance of the front axle before the bridge entrance at `t = 0`, m.
    pub approach: f64,
    /// Distance travelled past the bridge exit, m.
    pub exit: f64,
    pub total_time: f64,
    pub newmark: NewmarkConfig,
    pub eps_max: f64,
    pub max_fixed_point_iters: usize,
    /// Noise standard deviation as a fraction of each channel's RMS.
    pub noise_pct: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            approach: 10.0,
            exit: 20.0,
            total_time: 6.0,
            newmark: NewmarkConfig::default(),
            eps_max: 1e-6,
            max_fixed_point_iters: 50,
            noise_pct: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn n_samples(&self) -> usize {
        (self.total_time / self.newmark.dt).round() as usize + 1
    }

    pub fn validate(&self, speed: f64, span: f64) -> Result<()> {
        self.newmark.validate()?;
        if !(self.eps_max > 0.0) {
            return Err(Error::invalid("eps_max must be positive"));
        }
        if self.max_fixed_point_iters == 0 {
            return Err(Error::invalid("max_fixed_point_iters must be at least 1"));
        }
        if !(self.noise_pct >= 0.0) {
            return Err(Error::invalid("noise_pct must be non-negative"));
        }
        if !(self.approach >= 0.0) || !(self.exit >= 0.0) {
            return Err(Error::invalid("approach and exit distances must be non-negative"));
        }
        let needed = (self.approach + span + self.exit) / speed;
        if self.total_time + 1e-9 < needed {
            return Err(Error::invalid(format!(
                "total_time {} s is shorter than the {needed} s needed to cross",
                self.total_time
            )));
        }
        Ok(())
    }

    /// Axle positions `(x_1, x_2)` per sample.
    pub fn trajectories(&self, speed: f64, wheelbase: f64) -> (Vec<f64>, Vec<f64>) {
        let dt = self.newmark.dt;
        let x1: Vec<f64> = (0..self.n_samples())
            .map(|k| -self.approach + speed * k as f64 * dt)
            .collect();
        let x2 = x1.iter().map(|x| x - wheelbase).collect();
        (x1, x2)
    }
}

/// Relative change `‖Z_next − Z_prev‖₂ / ‖Z_next‖₂` with the matrix 2-norm.
pub fn convergence_error(next: &DMatrix<f64>, prev: &DMatrix<f64>) -> f64 {
    let num = spectral_norm(&(next - prev));
    let den = spectral_norm(next);
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let gram = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    let eig = SymmetricEigen::new(gram);
    eig.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt()
}

/// Adds zero-mean Gaussian noise with standard deviation `pct · RMS(series)`.
pub fn add_noise(series: &[f64], pct: f64, seed: u64) -> Result<Vec<f64>> {
    if !(pct >= 0.0) {
        return Err(Error::invalid(format!("noise fraction must be non-negative, got {pct}")));
    }
    let sigma = pct * rms(series);
    if sigma == 0.0 {
        return Ok(series.to_vec());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(series.iter().map(|x| x + normal.sample(&mut rng)).collect())
}

/// Everything recorded from one simulated crossing.
#[derive(Debug, Clone)]
pub struct SimRecord {
    pub dt: f64,
    pub time: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    /// Vehicle displacements `(z_s1, z_s2, z_u1, z_u2)`.
    pub z: [Vec<f64>; 4],
    pub z_ddot: [Vec<f64>; 4],
    /// Body accelerations above each axle, noise-free.
    pub acc: [Vec<f64>; 2],
    pub acc_noisy: [Vec<f64>; 2],
    /// Free-DOF bridge displacement, one column per sample.
    pub bridge: DMatrix<f64>,
    pub mid_span: Vec<f64>,
    pub road_profile: [Vec<f64>; 2],
    pub bridge_profile: [Vec<f64>; 2],
    pub input_profile: [Vec<f64>; 2],
    /// Contact force, inertial form.
    pub contact: [Vec<f64>; 2],
    /// Contact force, tire-stiffness form.
    pub contact_stiffness: [Vec<f64>; 2],
    pub iterations: usize,
    pub epsilon: f64,
    pub converged: bool,
    /// Convergence error after each iteration (from the second one on).
    pub residuals: Vec<f64>,
    pub noise_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub converged: bool,
    pub iterations: usize,
    pub epsilon: f64,
    pub eps_max: f64,
    /// Largest downward mid-span deflection, m (positive number).
    pub peak_mid_span_deflection: f64,
    /// `M g L^3 / (48 EI)` for the reference comparison, m.
    pub static_mid_span_estimate: f64,
    pub max_contact_identity_error: f64,
    pub noise_pct: f64,
    pub samples: usize,
    pub dt: f64,
}

impl SimRecord {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn measurements(&self) -> Measurements {
        Measurements {
            dt: self.dt,
            x1: self.x1.clone(),
            x2: self.x2.clone(),
            acc: self.acc_noisy.clone(),
        }
    }

    pub fn clean_measurements(&self) -> Measurements {
        Measurements {
            acc: self.acc.clone(),
            ..self.measurements()
        }
    }

    /// Re-draws the sensor noise without re-running the dynamics.
    pub fn with_noise(&self, pct: f64, seed: u64) -> Result<SimRecord> {
        let mut out = self.clone();
        for i in 0..2 {
            out.acc_noisy[i] = add_noise(&self.acc[i], pct, channel_seed(seed, i))?;
        }
        out.noise_pct = pct;
        Ok(out)
    }

    /// Largest relative disagreement of the two contact-force forms.
    pub fn max_contact_identity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for (a, b) in self.contact[i].iter().zip(&self.contact_stiffness[i]) {
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
            }
        }
        worst
    }

    pub fn peak_mid_span_deflection(&self) -> f64 {
        self.mid_span.iter().fold(0.0f64, |m, &y| m.max(-y))
    }

    pub fn summary(&self, vehicle: &VehicleParams, bridge: &BridgeParams, eps_max: f64) -> SimSummary {
        let ei_mid = bridge.ei[bridge.center_element()];
        SimSummary {
            converged: self.converged,
            iterations: self.iterations,
            epsilon: self.epsilon,
            eps_max,
            peak_mid_span_deflection: self.peak_mid_span_deflection(),
            static_mid_span_estimate: vehicle.total_mass() * GRAVITY * bridge.span.powi(3) / (48.0 * ei_mid),
            max_contact_identity_error: self.max_contact_identity_error(),
            noise_pct: self.noise_pct,
            samples: self.len(),
            dt: self.dt,
        }
    }

    /// One column per channel, one row per sample.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let header = [
            "t", "x1", "x2", "acc_s1", "acc_s2", "acc_s1_noisy", "acc_s2_noisy", "z_s1", "z_s2", "z_u1",
            "z_u2", "y_mid", "r1", "r2", "ybar1", "ybar2", "u1", "u2", "p1", "p2",
        ];
        out.write_record(header).map_err(csv_err)?;
        for k in 0..self.len() {
            let row = [
                self.time[k],
                self.x1[k],
                self.x2[k],
                self.acc[0][k],
                self.acc[1][k],
                self.acc_noisy[0][k],
                self.acc_noisy[1][k],
                self.z[0][k],
                self.z[1][k],
                self.z[2][k],
                self.z[3][k],
                self.mid_span[k],
                self.road_profile[0][k],
                self.road_profile[1][k],
                self.bridge_profile[0][k],
                self.bridge_profile[1][k],
                self.input_profile[0][k],
                self.input_profile[1][k],
                self.contact[0][k],
                self.contact[1][k],
            ];
            out.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Nodal deflection history: one column per node (pinned ends included).
    pub fn write_bridge_csv<W: Write>(&self, beam: &BeamSystem, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let n_nodes = beam.params.n_elem() + 1;
        let mut header = vec!["t".to_string()];
        header.extend((0..n_nodes).map(|j| format!("y_node{j}")));
        out.write_record(&header).map_err(csv_err)?;
        for k in 0..self.len() {
            let mut row = vec![self.time[k].to_string()];
            for j in 0..n_nodes {
                let v = beam.dof_map[2 * j].map_or(0.0, |r| self.bridge[(r, k)]);
                row.push(v.to_string());
            }
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub(crate) fn channel_seed(seed: u64, channel: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(channel as u64 + 1)
}

/// Shape-function weights of both axles at every sample.
pub(crate) fn axle_weights(beam: &BeamSystem, x1: &[f64], x2: &[f64]) -> Vec<[Option<PointWeights>; 2]> {
    x1.iter()
        .zip(x2)
        .map(|(&a, &b)| [beam.point_weights(a), beam.point_weights(b)])
        .collect()
}

/// Bridge response under the axle forces `p`, from rest. Returns the
/// free-DOF history (one column per sample). With `until_exit` the free
/// vibration after the last axle leaves is not computed (left at zero).
pub(crate) fn bridge_pass(
    integ: &mut NewmarkIntegrator,
    weights: &[[Option<PointWeights>; 2]],
    p: &[Vec<f64>; 2],
    until_exit: bool,
) -> DMatrix<f64> {
    let n = integ.dim();
    let steps = weights.len();
    let mut hist = DMatrix::zeros(n, steps);
    let mut load = DVector::zeros(n);
    let fill_load = |k: usize, load: &mut DVector<f64>| {
        load.fill(0.0);
        for (i, w) in weights[k].iter().enumerate() {
            if let Some(w) = w {
                w.scatter(p[i][k], load.as_mut_slice());
            }
        }
    };
    // Start only once an axle is on the span; the beam is at rest before.
    let Some(first) = weights.iter().position(|w| w.iter().any(Option::is_some)) else {
        return hist;
    };
    let mut state = DynState::zeros(n);
    fill_load(first, &mut load);
    if let Ok(s) = integ.initial_state(DVector::zeros(n), DVector::zeros(n), &load) {
        state = s;
    }
    hist.set_column(first, &state.eta);
    let end = if until_exit {
        weights.iter().rposition(|w| w.iter().any(Option::is_some)).map_or(steps, |l| l + 1)
    } else {
        steps
    };
    for k in first + 1..end {
        fill_load(k, &mut load);
        integ.step(&mut state, &load);
        hist.set_column(k, &state.eta);
    }
    hist
}

struct VehiclePass {
    z: DMatrix<f64>,
    z_ddot: DMatrix<f64>,
}

fn vehicle_pass(integ: &mut NewmarkIntegrator, f_in: &DMatrix<f64>, u: &[Vec<f64>; 2]) -> Result<VehiclePass> {
    let steps = u[0].len();
    let mut z = DMatrix::zeros(4, steps);
    let mut z_ddot = DMatrix::zeros(4, steps);
    let input = |k: usize| DVector::from_column_slice(&[u[0][k], u[1][k]]);
    // static equilibrium under the initial input
    let eta0 = DVector::from_column_slice(&[u[0][0], u[1][0], u[0][0], u[1][0]]);
    let mut state = integ.initial_state(eta0, DVector::zeros(4), &(f_in * input(0)))?;
    z.set_column(0, &state.eta);
    z_ddot.set_column(0, &state.eta_ddot);
    let mut load = DVector::zeros(4);
    for k in 1..steps {
        load.gemv(1.0, f_in, &input(k), 0.0);
        integ.step(&mut state, &load);
        z.set_column(k, &state.eta);
        z_ddot.set_column(k, &state.eta_ddot);
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("vehicle response"));
    }
    Ok(VehiclePass { z, z_ddot })
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

/// Simulates one crossing of `vehicle` over `bridge` on `road`.
///
/// A record that fails to converge within `max_fixed_point_iters` is still
/// returned, with `converged = false`.
pub fn simulate(
    vehicle: &VehicleParams,
    bridge: &BridgeParams,
    road: &RoadUnevenness,
    cfg: &SimConfig,
) -> Result<SimRecord> {
    vehicle.validate()?;
    cfg.validate(vehicle.speed, bridge.span)?;
    let beam = assemble(bridge)?;
    let (x1, x2) = cfg.trajectories(vehicle.speed, vehicle.wheelbase());
    let n = x1.len();
    let road_profile = [axle_road_series(road, &x1)?, axle_road_series(road, &x2)?];

    let vsys = build_system(vehicle);
    let (vm, vc, vk) = vsys.dense();
    let f_in = DMatrix::from_iterator(4, 2, vsys.f.iter().copied());
    let mut vinteg = NewmarkIntegrator::new(vm, vc, vk, cfg.newmark)?;
    let mut binteg = NewmarkIntegrator::new(beam.m.clone(), beam.c.clone(), beam.k.clone(), cfg.newmark)?;
    let weights = axle_weights(&beam, &x1, &x2);
    let (ms1, ms2) = vehicle.apportion_sprung_mass();
    let ms = [ms1, ms2];
    let mu = [vehicle.m_u1, vehicle.m_u2];

    let mut bridge_profile = [vec![0.0; n], vec![0.0; n]];
    let mut prev_z: Option<DMatrix<f64>> = None;
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut last = None;

    while iterations < cfg.max_fixed_point_iters {
        iterations += 1;
        let input = [
            add(&road_profile[0], &bridge_profile[0]),
            add(&road_profile[1], &bridge_profile[1]),
        ];
        let pass = vehicle_pass(&mut vinteg, &f_in, &input)?;
        let contact: [Vec<f64>; 2] = std::array::from_fn(|i| {
            (0..n)
                .map(|k| inertial_contact_force(ms[i], mu[i], pass.z_ddot[(i, k)], pass.z_ddot[(2 + i, k)]))
                .collect()
        });
        let y = bridge_pass(&mut binteg, &weights, &contact, false);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("bridge response"));
        }
        let next_profile: [Vec<f64>; 2] = std::array::from_fn(|i| {
            (0..n)
                .map(|k| weights[k][i].map_or(0.0, |w| w.dot(y.column(k).as_slice())))
                .collect()
        });

        let eps = prev_z.as_ref().map(|p| convergence_error(&pass.z, p));
        if let Some(e) = eps {
            residuals.push(e);
        }
        prev_z = Some(pass.z.clone());
        last = Some((pass, contact, y, input));
        if eps.is_some_and(|e| e <= cfg.eps_max) {
            converged = true;
            break;
        }
        bridge_profile = next_profile;
    }

    let (pass, contact, y, input) = last.expect("at least one iteration");
    let contact_stiffness: [Vec<f64>; 2] = std::array::from_fn(|i| {
        (0..n)
            .map(|k| {
                let zk = nalgebra::Vector4::from_iterator(pass.z.column(k).iter().copied());
                let ak = nalgebra::Vector4::from_iterator(pass.z_ddot.column(k).iter().copied());
                let uk = nalgebra::Vector2::new(input[0][k], input[1][k]);
                contact_forces(vehicle, &zk, &ak, &uk).stiffness[i]
            })
            .collect()
    });
    let mid = bridge.span / 2.0;
    let mid_span = (0..n).map(|k| beam.deflection_at(y.column(k).as_slice(), mid)).collect();
    let acc = [row(&pass.z_ddot, 0), row(&pass.z_ddot, 1)];
    let acc_noisy = [
        add_noise(&acc[0], cfg.noise_pct, channel_seed(cfg.seed, 0))?,
        add_noise(&acc[1], cfg.noise_pct, channel_seed(cfg.seed, 1))?,
    ];
    let dt = cfg.newmark.dt;
    Ok(SimRecord {
        dt,
        time: (0..n).map(|k| k as f64 * dt).collect(),
        x1,
        x2,
        z: std::array::from_fn(|i| row(&pass.z, i)),
        z_ddot: std::array::from_fn(|i| row(&pass.z_ddot, i)),
        acc,
        acc_noisy,
        bridge: y,
        mid_span,
        road_profile,
        bridge_profile,
        input_profile: input,
        contact,
        contact_stiffness,
        iterations,
        epsilon: residuals.last().copied().unwrap_or(f64::INFINITY),
        converged,
        residuals,
        noise_pct: cfg.noise_pct,
    })
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
