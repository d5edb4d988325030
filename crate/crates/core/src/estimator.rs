//! Input estimation from body accelerations and road-profile recovery.
//!
//! The vehicle equations are extended with the axle inputs `u` and their
//! slopes `u'` (modelled as a random walk) into a 12-state model
//!
//! ```text
//! Z = (z_s1, z_s2, z_u1, z_u2, z'_s1, z'_s2, z'_u1, z'_u2, u_1, u_2, u'_1, u'_2)
//! s = (z''_s1, z''_s2, z_s1, z_s2)
//! ```
//!
//! A Kalman filter over the discretized model yields `u`, from which the
//! bridge deflection under each axle (driven by the estimated contact
//! forces) is subtracted to leave one road-profile estimate per axle.

use nalgebra::{Complex, DMatrix, DVector, Matrix4, Matrix4x2, SMatrix, SVector, Vector4};
use serde::{Deserialize, Serialize};

use crate::bridge::{assemble, BridgeParams};
use crate::error::{Error, Result};
use crate::measurement::Measurements;
use crate::newmark::{integrate_accel, NewmarkConfig, NewmarkIntegrator};
use crate::road::RoadUnevenness;
use crate::sim::{axle_weights, bridge_pass};
use crate::vehicle::{build_system, inertial_contact_force, VehicleParams};

pub const N_STATE: usize = 12;
pub const N_OBS: usize = 4;

pub type StateVector = SVector<f64, N_STATE>;
pub type StateMatrix = SMatrix<f64, N_STATE, N_STATE>;
pub type ObsVector = SVector<f64, N_OBS>;
pub type ObsMatrix = SMatrix<f64, N_OBS, N_STATE>;
pub type GainMatrix = SMatrix<f64, N_STATE, N_OBS>;

/// Diagonal noise covariances and initial posterior covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub q_diag: [f64; N_STATE],
    pub r_diag: [f64; N_OBS],
    pub p0_diag: [f64; N_STATE],
    /// Once the covariance recursion changes by less than this (relative,
    /// max-norm) the gain is frozen. Zero runs the full recursion.
    pub steady_state_tol: f64,
}

/// Tabulated covariance sets for the three noise scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoisePreset {
    None,
    Moderate,
    Heavy,
}

impl NoisePreset {
    /// Preset for a given noise fraction: 0 → none, otherwise the nearer of
    /// 15 % and 35 %.
    pub fn for_noise(pct: f64) -> Self {
        if pct <= 0.0 {
            NoisePreset::None
        } else if pct < 0.25 {
            NoisePreset::Moderate
        } else {
            NoisePreset::Heavy
        }
    }

    pub fn q_diag(self) -> [f64; N_STATE] {
        let (zd, vd) = match self {
            NoisePreset::None => (0.0, 0.0),
            NoisePreset::Moderate => (6.00, 4.50),
            NoisePreset::Heavy => (60.0, 45.0),
        };
        let mut q = [zd, zd, zd, zd, vd, vd, vd, vd, 181.0, 178.0, 133_000.0, 133_000.0];
        for v in &mut q {
            *v *= 1e-7;
        }
        q
    }

    pub fn r_diag(self) -> [f64; N_OBS] {
        match self {
            NoisePreset::None => [1e-9; 4],
            NoisePreset::Moderate => [6.00e-4, 6.00e-4, 7.50e-4, 7.50e-4],
            NoisePreset::Heavy => [6.00e-3, 6.00e-3, 7.50e-3, 7.50e-3],
        }
    }
}

pub const DEFAULT_P0_DIAG: [f64; N_STATE] = [
    1e-6, 1e-6, 1e-6, 1e-6, 1e-6, 1e-6, 1e-6, 1e-6, 1e-4, 1e-4, 1e-2, 1e-2,
];

impl FilterConfig {
    pub fn preset(p: NoisePreset) -> Self {
        Self {
            q_diag: p.q_diag(),
            r_diag: p.r_diag(),
            p0_diag: DEFAULT_P0_DIAG,
            steady_state_tol: 1e-12,
        }
    }

    pub fn for_noise(pct: f64) -> Self {
        Self::preset(NoisePreset::for_noise(pct))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: &[f64]| v.iter().all(|x| *x >= 0.0 && x.is_finite());
        if !ok(&self.q_diag) || !ok(&self.r_diag) || !ok(&self.p0_diag) {
            return Err(Error::invalid("covariance diagonals must be finite and non-negative"));
        }
        if !(self.steady_state_tol >= 0.0) {
            return Err(Error::invalid("steady_state_tol must be non-negative"));
        }
        Ok(())
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self::preset(NoisePreset::None)
    }
}

/// Continuous and discrete extended state-space model.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub v: StateMatrix,
    pub h: ObsMatrix,
    pub v_bar: StateMatrix,
    pub q: StateMatrix,
    pub r: Matrix4<f64>,
    pub dt: f64,
}

/// Continuous transition matrix and observation matrix of the extended model.
pub fn continuous_model(p: &VehicleParams) -> (StateMatrix, ObsMatrix) {
    let sys = build_system(p);
    let m_inv = Matrix4::from_diagonal(&sys.m.diagonal().map(|m| 1.0 / m));
    let a_k = -(m_inv * sys.k);
    let a_c = -(m_inv * sys.c);
    let a_f: Matrix4x2<f64> = m_inv * sys.f;

    let mut v = StateMatrix::zeros();
    v.fixed_view_mut::<4, 4>(0, 4).fill_with_identity();
    v.fixed_view_mut::<4, 4>(4, 0).copy_from(&a_k);
    v.fixed_view_mut::<4, 4>(4, 4).copy_from(&a_c);
    v.fixed_view_mut::<4, 2>(4, 8).copy_from(&a_f);
    v.fixed_view_mut::<2, 2>(8, 10).fill_with_identity();

    let mut h = ObsMatrix::zeros();
    h.fixed_view_mut::<2, 12>(0, 0).copy_from(&v.fixed_view::<2, 12>(4, 0));
    h[(2, 0)] = 1.0;
    h[(3, 1)] = 1.0;
    (v, h)
}

pub fn build_state_space(p: &VehicleParams, cfg: &FilterConfig, dt: f64) -> Result<StateSpace> {
    p.validate()?;
    cfg.validate()?;
    let (v, h) = continuous_model(p);
    let v_bar = discretize(&v, dt)?;
    Ok(StateSpace {
        v,
        h,
        v_bar,
        q: StateMatrix::from_diagonal(&StateVector::from_column_slice(&cfg.q_diag)),
        r: Matrix4::from_diagonal(&Vector4::from_column_slice(&cfg.r_diag)),
        dt,
    })
}

/// Eigenvector condition number above which the eigen route is abandoned.
const EIGEN_COND_LIMIT: f64 = 1e12;

/// `exp(V dt)`, via the eigendecomposition `V dt = U D U⁻¹` when the
/// eigenvectors are well conditioned and by scaling-and-squaring Taylor
/// otherwise.
pub fn discretize(v: &StateMatrix, dt: f64) -> Result<StateMatrix> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let a = DMatrix::from_iterator(N_STATE, N_STATE, (v * dt).iter().copied());
    let e = expm_eigen(&a).unwrap_or_else(|| expm_taylor(&a));
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix exponential"));
    }
    Ok(StateMatrix::from_iterator(e.iter().copied()))
}

/// Matrix exponential through a complex eigendecomposition. `None` when the
/// matrix is defective or nearly so.
pub fn expm_eigen(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    if a.iter().all(|x| *x == 0.0) {
        return Some(DMatrix::identity(n, n));
    }
    let eigenvalues = a.clone().try_schur(f64::EPSILON, 10_000)?.complex_eigenvalues();
    let ac: DMatrix<Complex<f64>> = a.map(|x| Complex::new(x, 0.0));
    let scale = a.amax().max(1e-300);
    let mut u = DMatrix::<Complex<f64>>::zeros(n, n);
    for (j, lambda) in eigenvalues.iter().enumerate() {
        let shift = *lambda + Complex::new(1e-10 * scale, 0.0);
        let mut shifted = ac.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.lu();
        let mut x = DVector::<Complex<f64>>::from_fn(n, |i, _| Complex::new(1.0 + 0.1 * i as f64, 0.3));
        for _ in 0..4 {
            x = lu.solve(&x)?;
            let norm = x.norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return None;
            }
            x /= Complex::new(norm, 0.0);
        }
        u.set_column(j, &x);
    }
    let sv = u.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0) || smax / smin > EIGEN_COND_LIMIT {
        return None;
    }
    let u_inv = u.clone().try_inverse()?;
    let d = DMatrix::from_diagonal(&eigenvalues.map(|l| l.exp()));
    let e = &u * d * u_inv;
    let re = e.map(|c| c.re);
    let im_max = e.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if im_max > 1e-8 * re.amax().max(1.0) {
        return None;
    }
    Some(re)
}

/// Scaling-and-squaring Taylor matrix exponential.
pub fn expm_taylor(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a / 2f64.powi(squarings);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=40 {
        term = &term * &b / k as f64;
        sum += &term;
        if term.amax() <= f64::EPSILON * 1e-3 * sum.amax() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Rank of the observability matrix `[H; HV; …; HV^(n-1)]`.
///
/// `V` is scaled by its Frobenius norm (which leaves the rank unchanged) and
/// each row normalized before a singular-value threshold of `1e-10 σ_max`.
pub fn observability_rank(v: &DMatrix<f64>, h: &DMatrix<f64>) -> usize {
    let n = v.nrows();
    let m = h.nrows();
    let vn = v.norm();
    let v_scaled = if vn > 0.0 { v / vn } else { v.clone() };
    let mut obs = DMatrix::zeros(m * n, n);
    let mut block = h.clone();
    for k in 0..n {
        obs.view_mut((k * m, 0), (m, n)).copy_from(&block);
        block = &block * &v_scaled;
    }
    for mut r in obs.row_iter_mut() {
        let norm = r.norm();
        if norm > 0.0 {
            r /= norm;
        }
    }
    let sv = obs.svd(false, false).singular_values;
    let smax = sv.max();
    if !(smax > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-10 * smax).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub z_hat: StateVector,
    pub p: StateMatrix,
}

impl FilterState {
    pub fn initial(cfg: &FilterConfig) -> Self {
        Self {
            z_hat: StateVector::zeros(),
            p: StateMatrix::from_diagonal(&StateVector::from_column_slice(&cfg.p0_diag)),
        }
    }
}

/// Measurement residual of one update and its predicted covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Innovation {
    pub residual: ObsVector,
    pub covariance: Matrix4<f64>,
}

impl Innovation {
    /// Normalized innovation squared, `νᵀ S⁻¹ ν`.
    pub fn nis(&self) -> Option<f64> {
        let s_inv = self.covariance.try_inverse()?;
        Some((self.residual.transpose() * s_inv * self.residual)[0])
    }
}

fn symmetrize(p: &StateMatrix) -> StateMatrix {
    (p + p.transpose()) * 0.5
}

/// Prediction, gain, and update for one observation.
pub fn kalman_update(fs: &FilterState, s_k: &ObsVector, model: &StateSpace) -> Result<(FilterState, Innovation)> {
    let sigma_a = model.v_bar * fs.p * model.v_bar.transpose() + model.q;
    let s_cov = model.h * sigma_a * model.h.transpose() + model.r;
    let s_inv = s_cov
        .try_inverse()
        .ok_or(Error::Singular("innovation covariance"))?;
    let gain: GainMatrix = sigma_a * model.h.transpose() * s_inv;
    let predicted = model.v_bar * fs.z_hat;
    let residual = s_k - model.h * predicted;
    let z_hat = predicted + gain * residual;
    let p = symmetrize(&((StateMatrix::identity() - gain * model.h) * sigma_a));
    if z_hat.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("filter state"));
    }
    Ok((
        FilterState { z_hat, p },
        Innovation {
            residual,
            covariance: s_cov,
        },
    ))
}

pub fn kalman_step(fs: &FilterState, s_k: &ObsVector, model: &StateSpace) -> Result<FilterState> {
    kalman_update(fs, s_k, model).map(|(f, _)| f)
}

/// Runs the filter over `obs[1..]` from `Ẑ_0 = 0`. Returns the state history
/// (one entry per observation, the first being the initial state).
pub fn run_filter(model: &StateSpace, obs: &[ObsVector], cfg: &FilterConfig) -> Result<Vec<StateVector>> {
    let mut out = Vec::with_capacity(obs.len());
    if obs.is_empty() {
        return Ok(out);
    }
    let mut fs = FilterState::initial(cfg);
    out.push(fs.z_hat);
    let mut k = 1;
    let mut settled = 0;
    while k < obs.len() {
        let (next, _) = kalman_update(&fs, &obs[k], model)?;
        k += 1;
        let change = (next.p - fs.p).amax();
        let level = next.p.amax();
        fs = next;
        out.push(fs.z_hat);
        if cfg.steady_state_tol > 0.0 && change <= cfg.steady_state_tol * level {
            settled += 1;
            if settled >= 5 {
                break;
            }
        } else {
            settled = 0;
        }
    }
    if k < obs.len() {
        // Frozen gain: Ẑ_k = (I - GH) V̄ Ẑ_{k-1} + G s_k.
        let sigma_a = model.v_bar * fs.p * model.v_bar.transpose() + model.q;
        let s_cov = model.h * sigma_a * model.h.transpose() + model.r;
        let s_inv = s_cov
            .try_inverse()
            .ok_or(Error::Singular("innovation covariance"))?;
        let gain: GainMatrix = sigma_a * model.h.transpose() * s_inv;
        let closed = (StateMatrix::identity() - gain * model.h) * model.v_bar;
        let mut z = fs.z_hat;
        for s in &obs[k..] {
            z = closed * z + gain * s;
            out.push(z);
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("filter state"));
        }
    }
    Ok(out)
}

/// Observation vectors `(z''_s1, z''_s2, z_s1, z_s2)` with the displacements
/// obtained by Newmark quadrature of the accelerations.
pub fn observations(meas: &Measurements, newmark: &NewmarkConfig) -> Vec<ObsVector> {
    let cfg = NewmarkConfig { dt: meas.dt, ..*newmark };
    let (_, d1) = integrate_accel(&meas.acc[0], &cfg);
    let (_, d2) = integrate_accel(&meas.acc[1], &cfg);
    (0..meas.len())
        .map(|k| ObsVector::new(meas.acc[0][k], meas.acc[1][k], d1[k], d2[k]))
        .collect()
}

/// Estimated extended state per sample.
#[derive(Debug, Clone)]
pub struct StateHistory {
    pub states: Vec<StateVector>,
}

impl StateHistory {
    pub fn input(&self, axle: usize) -> Vec<f64> {
        self.states.iter().map(|z| z[8 + axle]).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn estimate_inputs(
    meas: &Measurements,
    model: &StateSpace,
    cfg: &FilterConfig,
    newmark: &NewmarkConfig,
) -> Result<StateHistory> {
    meas.validate()?;
    let obs = observations(meas, newmark);
    Ok(StateHistory {
        states: run_filter(model, &obs, cfg)?,
    })
}

/// Contact forces from the estimated states, inertial form with the
/// candidate masses; accelerations are rows 5–8 of `V Ẑ`.
pub fn estimated_contact_forces(states: &[StateVector], model: &StateSpace, p: &VehicleParams) -> [Vec<f64>; 2] {
    let (ms1, ms2) = p.apportion_sprung_mass();
    let ms = [ms1, ms2];
    let mu = [p.m_u1, p.m_u2];
    let dyn_rows = model.v.fixed_view::<4, 12>(4, 0).into_owned();
    let mut out = [Vec::with_capacity(states.len()), Vec::with_capacity(states.len())];
    for z in states {
        let acc: Vector4<f64> = dyn_rows * z;
        for i in 0..2 {
            out[i].push(inertial_contact_force(ms[i], mu[i], acc[i], acc[2 + i]));
        }
    }
    out
}

/// Estimated bridge nodal history and the deflection under each axle.
pub struct BridgeEstimate {
    pub y: DMatrix<f64>,
    pub profile: [Vec<f64>; 2],
}

pub fn estimate_bridge_response(
    history: &StateHistory,
    model: &StateSpace,
    vehicle: &VehicleParams,
    bridge: &BridgeParams,
    x1: &[f64],
    x2: &[f64],
    newmark: &NewmarkConfig,
) -> Result<BridgeEstimate> {
    let contact = estimated_contact_forces(&history.states, model, vehicle);
    bridge_response(&contact, bridge, x1, x2, newmark)
}

/// Bridge response from rest to axle forces along the trajectories, up to
/// the sample where the last axle leaves the span.
pub fn bridge_response(
    contact: &[Vec<f64>; 2],
    bridge: &BridgeParams,
    x1: &[f64],
    x2: &[f64],
    newmark: &NewmarkConfig,
) -> Result<BridgeEstimate> {
    let n = x1.len();
    if x2.len() != n || contact.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("force and trajectory histories have different lengths"));
    }
    let beam = assemble(bridge)?;
    let weights = axle_weights(&beam, x1, x2);
    let mut integ = NewmarkIntegrator::new(beam.m.clone(), beam.c.clone(), beam.k.clone(), *newmark)?;
    let y = bridge_pass(&mut integ, &weights, contact, true);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("bridge response"));
    }
    let profile = std::array::from_fn(|i| {
        weights
            .iter()
            .enumerate()
            .map(|(k, w)| w[i].map_or(0.0, |w| w.dot(y.column(k).as_slice())))
            .collect()
    });
    Ok(BridgeEstimate { y, profile })
}

/// Front and rear road-profile estimates on a shared spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadEstimate {
    pub front: RoadUnevenness,
    pub rear: RoadUnevenness,
}

/// Re-indexes `r_i = u_i − ỹ_i` from time to space and resamples both axles
/// onto a grid of spacing `dx` over the overlap of their paths.
pub fn recover_road_profiles(
    inputs: &[Vec<f64>; 2],
    bridge_profile: &[Vec<f64>; 2],
    x1: &[f64],
    x2: &[f64],
    dx: f64,
) -> Result<RoadEstimate> {
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::invalid(format!("profile grid spacing must be positive, got {dx}")));
    }
    let n = x1.len();
    if x2.len() != n || inputs.iter().chain(bridge_profile).any(|v| v.len() != n) || n < 2 {
        return Err(Error::invalid("profile histories have inconsistent lengths"));
    }
    let lo = x1[0].max(x2[0]);
    let hi = x1[n - 1].min(x2[n - 1]);
    if !(hi > lo) {
        return Err(Error::invalid("front and rear axle paths do not overlap"));
    }
    let count = ((hi - lo) / dx + 1e-9).floor() as usize + 1;
    if count < 2 {
        return Err(Error::invalid("overlap is shorter than one grid step"));
    }
    let resample = |path: &[f64], r: &[f64]| -> Vec<f64> {
        (0..count)
            .map(|g| {
                let x = lo + g as f64 * dx;
                let j = path.partition_point(|&p| p <= x).clamp(1, n - 1);
                let (xa, xb) = (path[j - 1], path[j]);
                let t = if xb > xa { ((x - xa) / (xb - xa)).clamp(0.0, 1.0) } else { 0.0 };
                r[j - 1] + t * (r[j] - r[j - 1])
            })
            .collect()
    };
    let road = |i: usize| -> Vec<f64> {
        inputs[i]
            .iter()
            .zip(&bridge_profile[i])
            .map(|(u, y)| u - y)
            .collect()
    };
    Ok(RoadEstimate {
        front: RoadUnevenness::new(lo, dx, resample(x1, &road(0)))?,
        rear: RoadUnevenness::new(lo, dx, resample(x2, &road(1)))?,
    })
}

/// `J = Σ (R1 − R2)²` over a shared grid.
pub fn objective(front: &RoadUnevenness, rear: &RoadUnevenness) -> Result<f64> {
    let same = front.len() == rear.len()
        && (front.x0() - rear.x0()).abs() <= 1e-9 * front.dx()
        && (front.dx() - rear.dx()).abs() <= 1e-12 * front.dx();
    if !same {
        return Err(Error::invalid("road estimates are on different grids"));
    }
    Ok(front
        .elevations()
        .iter()
        .zip(rear.elevations())
        .map(|(a, b)| (a - b).powi(2))
        .sum())
}

/// Everything needed to score a candidate parameter set against one
/// measurement record.
#[derive(Debug, Clone)]
pub struct ObjectiveContext {
    pub meas: Measurements,
    pub obs: Vec<ObsVector>,
    pub filter: FilterConfig,
    pub newmark: NewmarkConfig,
    pub dx: f64,
}

/// Full pipeline output for one candidate.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub j: f64,
    pub roads: RoadEstimate,
    pub inputs: [Vec<f64>; 2],
    pub bridge_profile: [Vec<f64>; 2],
}

impl ObjectiveContext {
    pub fn new(meas: Measurements, filter: FilterConfig, newmark: NewmarkConfig, dx: f64) -> Result<Self> {
        meas.validate()?;
        filter.validate()?;
        let newmark = NewmarkConfig { dt: meas.dt, ..newmark };
        let obs = observations(&meas, &newmark);
        Ok(Self {
            meas,
            obs,
            filter,
            newmark,
            dx,
        })
    }

    pub fn evaluate(&self, vehicle: &VehicleParams, bridge: &BridgeParams) -> Result<Evaluation> {
        let model = build_state_space(vehicle, &self.filter, self.meas.dt)?;
        let states = run_filter(&model, &self.obs, &self.filter)?;
        let history = StateHistory { states };
        let est = estimate_bridge_response(
            &history,
            &model,
            vehicle,
            bridge,
            &self.meas.x1,
            &self.meas.x2,
            &self.newmark,
        )?;
        let inputs = [history.input(0), history.input(1)];
        let roads = recover_road_profiles(&inputs, &est.profile, &self.meas.x1, &self.meas.x2, self.dx)?;
        let j = objective(&roads.front, &roads.rear)?;
        Ok(Evaluation {
            j,
            roads,
            inputs,
            bridge_profile: est.profile,
        })
    }

    /// Objective value; non-finite or failed evaluations score `+∞`.
    pub fn objective(&self, vehicle: &VehicleParams, bridge: &BridgeParams) -> f64 {
        match self.evaluate(vehicle, bridge) {
            Ok(e) if e.j.is_finite() => e.j,
            _ => f64::INFINITY,
        }
    }
}
