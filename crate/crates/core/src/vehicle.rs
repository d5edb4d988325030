//! Two-axle rigid-body-spring vehicle.
//!
//! With the body's moment of inertia `I_s = m_s d_1 d_2` the body mass splits
//! into two point masses over the axles and the half-car decouples into two
//! quarter-cars. DOF order is `(z_s1, z_s2, z_u1, z_u2)`, measured from
//! static equilibrium.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4, Matrix4x2, SymmetricEigen, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Sprung (body) mass, kg.
    pub m_s: f64,
    pub c_s1: f64,
    pub c_s2: f64,
    pub k_s1: f64,
    pub k_s2: f64,
    /// Distance from the centre of gravity to the front axle, m.
    pub d_1: f64,
    /// Distance from the centre of gravity to the rear axle, m.
    pub d_2: f64,
    pub m_u1: f64,
    pub m_u2: f64,
    pub k_u1: f64,
    pub k_u2: f64,
    /// Travel speed, m/s.
    pub speed: f64,
}

impl VehicleParams {
    /// 9530 kg two-axle truck at 10 m/s.
    pub fn reference() -> Self {
        Self {
            m_s: 8310.0,
            c_s1: 24200.0,
            c_s2: 29000.0,
            k_s1: 456_000.0,
            k_s2: 410_000.0,
            d_1: 1.215,
            d_2: 3.185,
            m_u1: 469.0,
            m_u2: 751.0,
            k_u1: 4_790_000.0,
            k_u2: 4_310_000.0,
            speed: 10.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.m_s + self.m_u1 + self.m_u2
    }

    pub fn wheelbase(&self) -> f64 {
        self.d_1 + self.d_2
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m_s", self.m_s),
            ("k_s1", self.k_s1),
            ("k_s2", self.k_s2),
            ("d_1", self.d_1),
            ("d_2", self.d_2),
            ("m_u1", self.m_u1),
            ("m_u2", self.m_u2),
            ("k_u1", self.k_u1),
            ("k_u2", self.k_u2),
            ("speed", self.speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("c_s1", self.c_s1), ("c_s2", self.c_s2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Body mass carried over each axle, `(m_s d_2 / D, m_s d_1 / D)`.
    pub fn apportion_sprung_mass(&self) -> (f64, f64) {
        let d = self.wheelbase();
        (self.m_s * self.d_2 / d, self.m_s * self.d_1 / d)
    }

    /// Static tire forces `k_ui z0_ui` at equilibrium (negative: compression).
    pub fn static_tire_preload(&self) -> (f64, f64) {
        let (ms1, ms2) = self.apportion_sprung_mass();
        (-(ms1 + self.m_u1) * GRAVITY, -(ms2 + self.m_u2) * GRAVITY)
    }
}

/// Decoupled 4-DOF equations `M z'' + C z' + K z = F u`.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSystem {
    pub m: Matrix4<f64>,
    pub c: Matrix4<f64>,
    pub k: Matrix4<f64>,
    pub f: Matrix4x2<f64>,
}

pub fn build_system(p: &VehicleParams) -> VehicleSystem {
    let (ms1, ms2) = p.apportion_sprung_mass();
    let m = Matrix4::from_diagonal(&Vector4::new(ms1, ms2, p.m_u1, p.m_u2));
    #[rustfmt::skip]
    let k = Matrix4::new(
        p.k_s1, 0.0, -p.k_s1, 0.0,
        0.0, p.k_s2, 0.0, -p.k_s2,
        -p.k_s1, 0.0, p.k_s1 + p.k_u1, 0.0,
        0.0, -p.k_s2, 0.0, p.k_s2 + p.k_u2,
    );
    #[rustfmt::skip]
    let c = Matrix4::new(
        p.c_s1, 0.0, -p.c_s1, 0.0,
        0.0, p.c_s2, 0.0, -p.c_s2,
        -p.c_s1, 0.0, p.c_s1, 0.0,
        0.0, -p.c_s2, 0.0, p.c_s2,
    );
    #[rustfmt::skip]
    let f = Matrix4x2::new(
        0.0, 0.0,
        0.0, 0.0,
        p.k_u1, 0.0,
        0.0, p.k_u2,
    );
    VehicleSystem { m, c, k, f }
}

impl VehicleSystem {
    pub fn dense(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        (
            DMatrix::from_iterator(4, 4, self.m.iter().copied()),
            DMatrix::from_iterator(4, 4, self.c.iter().copied()),
            DMatrix::from_iterator(4, 4, self.k.iter().copied()),
        )
    }

    /// Undamped natural frequencies in Hz, ascending.
    pub fn natural_frequencies(&self) -> Vec<f64> {
        let inv_sqrt = Matrix4::from_diagonal(&self.m.diagonal().map(|m| 1.0 / m.sqrt()));
        let a = inv_sqrt * self.k * inv_sqrt;
        let eig = SymmetricEigen::new((a + a.transpose()) * 0.5);
        let mut f: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0).sqrt() / (2.0 * PI))
            .collect();
        f.sort_by(|a, b| a.total_cmp(b));
        f
    }
}

/// Rigid-body form in DOFs `(z_G, θ_G, z_u1, z_u2)` with an explicit body
/// inertia. Returns the system and the map `T` with
/// `(z_s1, z_s2, z_u1, z_u2) = T q`.
pub fn rigid_body_system(p: &VehicleParams, inertia: f64) -> (VehicleSystem, Matrix4<f64>) {
    let (d1, d2) = (p.d_1, p.d_2);
    #[rustfmt::skip]
    let t = Matrix4::new(
        1.0, d1, 0.0, 0.0,
        1.0, -d2, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    let quarter = build_system(p);
    let m = Matrix4::from_diagonal(&Vector4::new(p.m_s, inertia, p.m_u1, p.m_u2));
    let sys = VehicleSystem {
        m,
        c: t.transpose() * quarter.c * t,
        k: t.transpose() * quarter.k * t,
        f: t.transpose() * quarter.f,
    };
    (sys, t)
}

/// Tire contact force of each axle by two algebraically equal routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactForces {
    /// `k_ui (z_ui - u_i) - (m_si + m_ui) g`.
    pub stiffness: [f64; 2],
    /// `-m_si (g + z''_si) - m_ui (g + z''_ui)`.
    pub inertial: [f64; 2],
}

pub fn contact_forces(
    p: &VehicleParams,
    z: &Vector4<f64>,
    z_ddot: &Vector4<f64>,
    u: &Vector2<f64>,
) -> ContactForces {
    let (ms1, ms2) = p.apportion_sprung_mass();
    let ms = [ms1, ms2];
    let mu = [p.m_u1, p.m_u2];
    let ku = [p.k_u1, p.k_u2];
    let mut out = ContactForces {
        stiffness: [0.0; 2],
        inertial: [0.0; 2],
    };
    for i in 0..2 {
        out.stiffness[i] = ku[i] * (z[2 + i] - u[i]) - (ms[i] + mu[i]) * GRAVITY;
        out.inertial[i] = inertial_contact_force(ms[i], mu[i], z_ddot[i], z_ddot[2 + i]);
    }
    out
}

#[inline]
pub fn inertial_contact_force(m_s: f64, m_u: f64, acc_s: f64, acc_u: f64) -> f64 {
    -m_s * (GRAVITY + acc_s) - m_u * (GRAVITY + acc_u)
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::reference()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportionment_reference() {
        let (a, b) = VehicleParams::reference().apportion_sprung_mass();
        assert!((a - 8310.0 * 3.185 / 4.4).abs() < 1e-9);
        assert!((a - 6015.31).abs() < 0.01);
        assert!((b - 2294.69).abs() < 0.01);
        assert!((a + b - 8310.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_apportionment() {
        let mut p = VehicleParams::reference();
        p.d_1 = 2.0;
        p.d_2 = 2.0;
        assert_eq!(p.apportion_sprung_mass(), (p.m_s / 2.0, p.m_s / 2.0));
    }

    #[test]
    fn preload_reference() {
        let p = VehicleParams::reference();
        let (f1, f2) = p.static_tire_preload();
        assert!((f1 + 63_610.0).abs() < 2.0);
        assert!((f1 + (8310.0 * 3.185 / 4.4 + 469.0) * GRAVITY).abs() < 1e-9);
        assert!((f1 + f2 + p.total_mass() * GRAVITY).abs() < 1e-8);
    }

    #[test]
    fn massless_vehicle_has_no_preload() {
        let p = VehicleParams {
            m_s: 0.0,
            m_u1: 0.0,
            m_u2: 0.0,
            ..VehicleParams::reference()
        };
        assert_eq!(p.static_tire_preload(), (-0.0, -0.0));
    }

    #[test]
    fn input_matrix_structure() {
        let sys = build_system(&VehicleParams::reference());
        let force = sys.f * Vector2::new(1.0, 0.0);
        assert_eq!(force, Vector4::new(0.0, 0.0, 4_790_000.0, 0.0));
        assert!(sys.k.symmetric_eigenvalues().iter().all(|&l| l > 0.0));
        assert_eq!(sys.k, sys.k.transpose());
    }

    #[test]
    fn rigid_body_mass_maps_to_point_masses() {
        let p = VehicleParams::reference();
        let (rb, t) = rigid_body_system(&p, p.m_s * p.d_1 * p.d_2);
        let t_inv = t.try_inverse().unwrap();
        let m_quarter = t_inv.transpose() * rb.m * t_inv;
        let expected = build_system(&p).m;
        assert!((m_quarter - expected).amax() < 1e-9);
    }

    #[test]
    fn rest_contact_forces() {
        let p = VehicleParams::reference();
        let cf = contact_forces(&p, &Vector4::zeros(), &Vector4::zeros(), &Vector2::zeros());
        let (f1, f2) = p.static_tire_preload();
        assert!((cf.inertial[0] - f1).abs() < 1e-9);
        assert!((cf.stiffness[1] - f2).abs() < 1e-9);
        assert!((cf.inertial[0] + cf.inertial[1] + 9530.0 * 9.81).abs() < 1e-8);
    }

    #[test]
    fn validation() {
        assert!(VehicleParams::reference().validate().is_ok());
        let mut p = VehicleParams::reference();
        p.k_u2 = 0.0;
        assert!(p.validate().is_err());
        p = VehicleParams::reference();
        p.c_s1 = -1.0;
        assert!(p.validate().is_err());
    }
}
