//! Newmark-β time integration for `M η'' + C η' + K η = ξ(t)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewmarkConfig {
    pub gamma: f64,
    pub beta: f64,
    pub dt: f64,
}

impl Default for NewmarkConfig {
    /// Average-acceleration scheme at 1 kHz.
    fn default() -> Self {
        Self {
            gamma: 0.5,
            beta: 0.25,
            dt: 1e-3,
        }
    }
}

impl NewmarkConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.gamma > 0.0) || !(self.beta > 0.0) {
            return Err(Error::invalid("Newmark gamma and beta must be positive"));
        }
        Ok(())
    }
}

/// Displacement, velocity and acceleration at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DynState {
    pub eta: DVector<f64>,
    pub eta_dot: DVector<f64>,
    pub eta_ddot: DVector<f64>,
}

impl DynState {
    pub fn zeros(n: usize) -> Self {
        Self {
            eta: DVector::zeros(n),
            eta_dot: DVector::zeros(n),
            eta_ddot: DVector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }
}

fn effective_matrix(m: &DMatrix<f64>, c: &DMatrix<f64>, k: &DMatrix<f64>, cfg: &NewmarkConfig) -> DMatrix<f64> {
    m + c * (cfg.gamma * cfg.dt) + k * (cfg.beta * cfg.dt * cfg.dt)
}

fn check_shapes(m: &DMatrix<f64>, c: &DMatrix<f64>, k: &DMatrix<f64>, n: usize) -> Result<()> {
    for (name, mat) in [("M", m), ("C", c), ("K", k)] {
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::invalid(format!(
                "{name} is {}x{}, expected {n}x{n}",
                mat.nrows(),
                mat.ncols()
            )));
        }
    }
    Ok(())
}

/// Advances `state` by one step under the load `xi_next` at `t + dt`.
///
/// Solves `A η''(t+dt) = b` with `A = M + γ dt C + β dt² K`, then applies the
/// Newmark velocity and displacement updates.
pub fn newmark_step(
    m: &DMatrix<f64>,
    c: &DMatrix<f64>,
    k: &DMatrix<f64>,
    state: &DynState,
    xi_next: &DVector<f64>,
    cfg: &NewmarkConfig,
) -> Result<DynState> {
    let n = state.dim();
    check_shapes(m, c, k, n)?;
    if xi_next.len() != n {
        return Err(Error::invalid("load vector size does not match the system"));
    }
    let dt = cfg.dt;
    let (g, b) = (cfg.gamma, cfg.beta);
    let a_mat = effective_matrix(m, c, k, cfg);
    let v_pred = &state.eta_dot + &state.eta_ddot * (dt * (1.0 - g));
    let x_pred = &state.eta + &state.eta_dot * dt + &state.eta_ddot * (dt * dt * (0.5 - b));
    let rhs = xi_next - c * &v_pred - k * &x_pred;
    let acc = a_mat
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("Newmark effective matrix"))?;
    Ok(DynState {
        eta_dot: v_pred + &acc * (g * dt),
        eta: x_pred + &acc * (b * dt * dt),
        eta_ddot: acc,
    })
}

/// Newmark stepper for a fixed linear system, with the effective matrix
/// factored once.
#[derive(Debug, Clone)]
pub struct NewmarkIntegrator {
    cfg: NewmarkConfig,
    m: DMatrix<f64>,
    c: DMatrix<f64>,
    k: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    a_inv_c: DMatrix<f64>,
    a_inv_k: DMatrix<f64>,
    v_pred: DVector<f64>,
    x_pred: DVector<f64>,
}

impl NewmarkIntegrator {
    pub fn new(m: DMatrix<f64>, c: DMatrix<f64>, k: DMatrix<f64>, cfg: NewmarkConfig) -> Result<Self> {
        cfg.validate()?;
        let n = m.nrows();
        check_shapes(&m, &c, &k, n)?;
        let a_inv = effective_matrix(&m, &c, &k, &cfg)
            .try_inverse()
            .ok_or(Error::Singular("Newmark effective matrix"))?;
        if a_inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("Newmark effective matrix"));
        }
        let a_inv_c = &a_inv * &c;
        let a_inv_k = &a_inv * &k;
        Ok(Self {
            cfg,
            m,
            c,
            k,
            a_inv,
            a_inv_c,
            a_inv_k,
            v_pred: DVector::zeros(n),
            x_pred: DVector::zeros(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn config(&self) -> &NewmarkConfig {
        &self.cfg
    }

    /// State with the given displacement and velocity and the acceleration
    /// that satisfies the equation of motion under `xi0`.
    pub fn initial_state(&self, eta: DVector<f64>, eta_dot: DVector<f64>, xi0: &DVector<f64>) -> Result<DynState> {
        let rhs = xi0 - &self.c * &eta_dot - &self.k * &eta;
        let eta_ddot = self
            .m
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or(Error::Singular("mass matrix"))?;
        Ok(DynState { eta, eta_dot, eta_ddot })
    }

    /// In-place step to `t + dt` under `xi_next`.
    pub fn step(&mut self, state: &mut DynState, xi_next: &DVector<f64>) {
        let dt = self.cfg.dt;
        let (g, b) = (self.cfg.gamma, self.cfg.beta);

        self.v_pred.copy_from(&state.eta_dot);
        self.v_pred.axpy(dt * (1.0 - g), &state.eta_ddot, 1.0);
        self.x_pred.copy_from(&state.eta);
        self.x_pred.axpy(dt, &state.eta_dot, 1.0);
        self.x_pred.axpy(dt * dt * (0.5 - b), &state.eta_ddot, 1.0);

        let acc = &mut state.eta_ddot;
        acc.gemv(1.0, &self.a_inv, xi_next, 0.0);
        acc.gemv(-1.0, &self.a_inv_c, &self.v_pred, 1.0);
        acc.gemv(-1.0, &self.a_inv_k, &self.x_pred, 1.0);

        state.eta_dot.copy_from(&self.v_pred);
        state.eta_dot.axpy(g * dt, acc, 1.0);
        state.eta.copy_from(&self.x_pred);
        state.eta.axpy(b * dt * dt, acc, 1.0);
    }
}

/// Newmark quadrature of a sampled acceleration starting from zero velocity
/// and displacement. Returns `(velocity, displacement)`.
pub fn integrate_accel(accel: &[f64], cfg: &NewmarkConfig) -> (Vec<f64>, Vec<f64>) {
    integrate_accel_from(accel, 0.0, 0.0, cfg)
}

/// As [`integrate_accel`] with explicit initial velocity and displacement.
pub fn integrate_accel_from(accel: &[f64], v0: f64, x0: f64, cfg: &NewmarkConfig) -> (Vec<f64>, Vec<f64>) {
    let dt = cfg.dt;
    let (g, b) = (cfg.gamma, cfg.beta);
    let mut vel = Vec::with_capacity(accel.len());
    let mut disp = Vec::with_capacity(accel.len());
    if accel.is_empty() {
        return (vel, disp);
    }
    let (mut v, mut x) = (v0, x0);
    vel.push(v);
    disp.push(x);
    for w in accel.windows(2) {
        let (a0, a1) = (w[0], w[1]);
        x += dt * v + dt * dt * ((0.5 - b) * a0 + b * a1);
        v += dt * ((1.0 - g) * a0 + g * a1);
        vel.push(v);
        disp.push(x);
    }
    (vel, disp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sdof(m: f64, c: f64, k: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        (
            DMatrix::from_element(1, 1, m),
            DMatrix::from_element(1, 1, c),
            DMatrix::from_element(1, 1, k),
        )
    }

    #[test]
    fn harmonic_oscillator_one_period() {
        let (m, c, k) = sdof(1.0, 0.0, (2.0 * PI).powi(2));
        let cfg = NewmarkConfig::default();
        let mut s = DynState {
            eta: DVector::from_element(1, 1.0),
            eta_dot: DVector::zeros(1),
            eta_ddot: DVector::from_element(1, -(2.0 * PI).powi(2)),
        };
        let zero = DVector::zeros(1);
        for _ in 0..1000 {
            s = newmark_step(&m, &c, &k, &s, &zero, &cfg).unwrap();
        }
        assert!((s.eta[0] - 1.0).abs() < 1e-3, "x(1) = {}", s.eta[0]);
    }

    #[test]
    fn zero_load_stays_at_rest() {
        let m = DMatrix::identity(3, 3) * 2.0;
        let k = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let c = &k * 0.01;
        let mut integ = NewmarkIntegrator::new(m, c, k, NewmarkConfig::default()).unwrap();
        let mut s = DynState::zeros(3);
        let zero = DVector::zeros(3);
        for _ in 0..500 {
            integ.step(&mut s, &zero);
        }
        assert_eq!(s, DynState::zeros(3));
    }

    #[test]
    fn constant_load_settles_to_static() {
        let (m, c, k) = sdof(1.0, 4.0, 100.0);
        let cfg = NewmarkConfig::default();
        let f = DVector::from_element(1, 5.0);
        let mut integ = NewmarkIntegrator::new(m, c, k, cfg).unwrap();
        let mut s = DynState::zeros(1);
        for _ in 0..10_000 {
            integ.step(&mut s, &f);
        }
        assert!((s.eta[0] - 0.05).abs() < 0.05 * 0.01);
    }

    #[test]
    fn stepper_and_integrator_agree() {
        let (m, c, k) = sdof(3.0, 0.7, 40.0);
        let cfg = NewmarkConfig { gamma: 0.5, beta: 1.0 / 6.0, dt: 0.01 };
        let mut integ = NewmarkIntegrator::new(m.clone(), c.clone(), k.clone(), cfg).unwrap();
        let mut a = DynState::zeros(1);
        let mut b = DynState::zeros(1);
        for i in 0..200 {
            let f = DVector::from_element(1, (i as f64 * 0.1).sin());
            integ.step(&mut a, &f);
            b = newmark_step(&m, &c, &k, &b, &f, &cfg).unwrap();
        }
        assert!((a.eta[0] - b.eta[0]).abs() < 1e-12);
    }

    #[test]
    fn singular_system_reported() {
        let z = DMatrix::zeros(2, 2);
        let s = DynState::zeros(2);
        let r = newmark_step(&z, &z, &z, &s, &DVector::zeros(2), &NewmarkConfig::default());
        assert!(matches!(r, Err(Error::Singular(_))));
        assert!(NewmarkIntegrator::new(z.clone(), z.clone(), z, NewmarkConfig::default()).is_err());
    }

    #[test]
    fn constant_acceleration_quadrature() {
        let cfg = NewmarkConfig::default();
        let a = 2.5;
        let (v, x) = integrate_accel(&[a; 4], &cfg);
        for k in 0..4 {
            let t = k as f64 * cfg.dt;
            assert!((v[k] - a * t).abs() < 1e-15);
            assert!((x[k] - 0.5 * a * t * t).abs() < 1e-18);
        }
    }

    #[test]
    fn zero_acceleration_quadrature() {
        let (v, x) = integrate_accel(&[0.0; 50], &NewmarkConfig::default());
        assert!(v.iter().chain(&x).all(|&e| e == 0.0));
        let (v, x) = integrate_accel(&[], &NewmarkConfig::default());
        assert!(v.is_empty() && x.is_empty());
    }

    #[test]
    fn sinusoid_quadrature() {
        let cfg = NewmarkConfig::default();
        let w = 2.0 * PI;
        let n = 2001;
        let acc: Vec<f64> = (0..n).map(|k| -w * w * (w * k as f64 * cfg.dt).sin()).collect();
        let (_, x) = integrate_accel_from(&acc, w, 0.0, &cfg);
        for (k, xk) in x.iter().enumerate() {
            let t = k as f64 * cfg.dt;
            assert!((xk - (w * t).sin()).abs() < 1e-4, "t = {t}");
        }
    }
}
