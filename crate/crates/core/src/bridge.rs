//! Simply supported Euler-Bernoulli beam discretized with cubic Hermite
//! elements.
//!
//! Every node carries a deflection and a rotation DOF; global DOF `2j` is the
//! deflection of node `j` and `2j + 1` its rotation. The pin supports remove
//! the two end deflections, leaving `2 n_elem` free DOFs.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GAUSS4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Cubic Hermite functions and their second derivatives in the local
/// coordinate `X ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteValues {
    pub phi: [f64; 4],
    pub phi_xx: [f64; 4],
}

pub fn hermite_basis(x: f64) -> Result<HermiteValues> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("local coordinate {x} outside [-1, 1]")));
    }
    Ok(hermite_unchecked(x))
}

fn hermite_unchecked(x: f64) -> HermiteValues {
    let (m, p) = (x - 1.0, x + 1.0);
    HermiteValues {
        phi: [
            0.25 * m * m * (x + 2.0),
            0.25 * m * m * p,
            -0.25 * p * p * (x - 2.0),
            0.25 * p * p * m,
        ],
        phi_xx: [1.5 * x, 0.5 * (3.0 * x - 1.0), -1.5 * x, 0.5 * (3.0 * x + 1.0)],
    }
}

/// Element mass and stiffness matrices in DOF order
/// `(y_j, θ_j, y_{j+1}, θ_{j+1})`, integrated with 4-point Gauss-Legendre.
pub fn element_matrices(rho_a: f64, ei: f64, elem_len: f64) -> (Matrix4<f64>, Matrix4<f64>) {
    let h = elem_len;
    let scale = [1.0, 0.5 * h, 1.0, 0.5 * h];
    let jac = 0.5 * h;
    let curv = (2.0 / h).powi(2);
    let mut m = Matrix4::zeros();
    let mut k = Matrix4::zeros();
    for (&xg, &wg) in GAUSS4_NODES.iter().zip(&GAUSS4_WEIGHTS) {
        let hv = hermite_unchecked(xg);
        for a in 0..4 {
            let na = scale[a] * hv.phi[a];
            let ba = scale[a] * hv.phi_xx[a] * curv;
            for b in 0..4 {
                m[(a, b)] += wg * jac * rho_a * na * scale[b] * hv.phi[b];
                k[(a, b)] += wg * jac * ei * ba * scale[b] * hv.phi_xx[b] * curv;
            }
        }
    }
    (m, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BridgeParams {
    /// Mass per unit length, kg/m.
    pub rho_a: f64,
    /// Flexural rigidity of each element, N m^2.
    pub ei: Vec<f64>,
    /// Rayleigh mass coefficient, 1/s.
    pub alpha_c: f64,
    /// Rayleigh stiffness coefficient, s.
    pub beta_c: f64,
    pub span: f64,
    pub elem_len: f64,
}

impl BridgeParams {
    /// 30 m span, 15 elements of 2 m, uniform EI = 1.56e10 N m^2.
    pub fn reference() -> Self {
        Self::uniform(4400.0, 1.56e10, 0.7024, 0.0052, 30.0, 2.0)
    }

    pub fn uniform(rho_a: f64, ei: f64, alpha_c: f64, beta_c: f64, span: f64, elem_len: f64) -> Self {
        let n = (span / elem_len).round().max(1.0) as usize;
        Self {
            rho_a,
            ei: vec![ei; n],
            alpha_c,
            beta_c,
            span,
            elem_len,
        }
    }

    pub fn n_elem(&self) -> usize {
        self.ei.len()
    }

    /// Index of the element containing mid-span.
    pub fn center_element(&self) -> usize {
        self.n_elem() / 2
    }

    /// Copy with the flexural rigidity of `elem` scaled by `factor`.
    pub fn with_damage(&self, elem: usize, factor: f64) -> Self {
        let mut out = self.clone();
        out.ei[elem] *= factor;
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.ei.is_empty() {
            return Err(Error::invalid("bridge needs at least one element"));
        }
        if !(self.rho_a > 0.0) || !self.rho_a.is_finite() {
            return Err(Error::invalid(format!("rhoA must be positive, got {}", self.rho_a)));
        }
        if let Some((j, e)) = self.ei.iter().enumerate().find(|(_, e)| !(**e > 0.0) || !e.is_finite()) {
            return Err(Error::invalid(format!("EI of element {} must be positive, got {e}", j + 1)));
        }
        if !(self.elem_len > 0.0) || !(self.span > 0.0) {
            return Err(Error::invalid("span and element length must be positive"));
        }
        let covered = self.n_elem() as f64 * self.elem_len;
        if (covered - self.span).abs() > 1e-12 * self.span {
            return Err(Error::invalid(format!(
                "{} elements of {} m do not cover the {} m span",
                self.n_elem(),
                self.elem_len,
                self.span
            )));
        }
        if !(self.alpha_c >= 0.0) || !(self.beta_c >= 0.0) {
            return Err(Error::invalid("Rayleigh coefficients must be non-negative"));
        }
        Ok(())
    }
}

/// Nonzero shape-function weights of one point load: up to four free DOFs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointWeights {
    pub dofs: [Option<usize>; 4],
    pub weights: [f64; 4],
}

impl PointWeights {
    /// `N(x)ᵀ y` for a free-DOF vector `y`.
    pub fn dot(&self, y: &[f64]) -> f64 {
        self.dofs
            .iter()
            .zip(&self.weights)
            .filter_map(|(d, w)| d.map(|i| w * y[i]))
            .sum()
    }

    /// `out += N(x) p`.
    pub fn scatter(&self, p: f64, out: &mut [f64]) {
        for (d, w) in self.dofs.iter().zip(&self.weights) {
            if let Some(i) = d {
                out[*i] += w * p;
            }
        }
    }
}

/// Assembled beam over the free DOFs.
#[derive(Debug, Clone)]
pub struct BeamSystem {
    pub params: BridgeParams,
    pub m: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub k: DMatrix<f64>,
    /// Global DOF → free DOF; `None` for the pinned deflections.
    pub dof_map: Vec<Option<usize>>,
}

pub fn assemble(params: &BridgeParams) -> Result<BeamSystem> {
    params.validate()?;
    let n_elem = params.n_elem();
    let n_global = 2 * (n_elem + 1);
    let pinned = [0, 2 * n_elem];
    let mut dof_map = vec![None; n_global];
    let mut next = 0;
    for (g, slot) in dof_map.iter_mut().enumerate() {
        if !pinned.contains(&g) {
            *slot = Some(next);
            next += 1;
        }
    }
    let n_free = next;
    let mut m = DMatrix::zeros(n_free, n_free);
    let mut k = DMatrix::zeros(n_free, n_free);
    for (j, &ei) in params.ei.iter().enumerate() {
        let (me, ke) = element_matrices(params.rho_a, ei, params.elem_len);
        for a in 0..4 {
            let Some(ga) = dof_map[2 * j + a] else { continue };
            for b in 0..4 {
                let Some(gb) = dof_map[2 * j + b] else { continue };
                m[(ga, gb)] += me[(a, b)];
                k[(ga, gb)] += ke[(a, b)];
            }
        }
    }
    let c = &m * params.alpha_c + &k * params.beta_c;
    Ok(BeamSystem {
        params: params.clone(),
        m,
        c,
        k,
        dof_map,
    })
}

impl BeamSystem {
    pub fn n_free(&self) -> usize {
        self.m.nrows()
    }

    /// Shape-function weights at position `x`, or `None` off the bridge.
    pub fn point_weights(&self, x: f64) -> Option<PointWeights> {
        let p = &self.params;
        if !(0.0..=p.span).contains(&x) {
            return None;
        }
        let h = p.elem_len;
        let j = ((x / h).floor() as usize).min(p.n_elem() - 1);
        let local = (2.0 * (x - j as f64 * h) / h - 1.0).clamp(-1.0, 1.0);
        let hv = hermite_unchecked(local);
        let scale = [1.0, 0.5 * h, 1.0, 0.5 * h];
        let mut dofs = [None; 4];
        let mut weights = [0.0; 4];
        for a in 0..4 {
            dofs[a] = self.dof_map[2 * j + a];
            weights[a] = scale[a] * hv.phi[a];
        }
        Some(PointWeights { dofs, weights })
    }

    /// Load-distribution matrix: column `i` is the shape vector at axle `i`,
    /// zero when the axle is off the bridge.
    pub fn load_distribution(&self, axle_positions: &[f64]) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n_free(), axle_positions.len());
        for (i, &x) in axle_positions.iter().enumerate() {
            if let Some(pw) = self.point_weights(x) {
                for (d, w) in pw.dofs.iter().zip(&pw.weights) {
                    if let Some(r) = d {
                        l[(*r, i)] += w;
                    }
                }
            }
        }
        l
    }

    /// Deflection under each axle, `Lᵀ y`.
    pub fn bridge_profile(&self, y: &DVector<f64>, axle_positions: &[f64]) -> Vec<f64> {
        axle_positions
            .iter()
            .map(|&x| self.deflection_at(y.as_slice(), x))
            .collect()
    }

    /// Interpolated deflection at `x`; zero off the bridge.
    pub fn deflection_at(&self, y: &[f64], x: f64) -> f64 {
        self.point_weights(x).map_or(0.0, |pw| pw.dot(y))
    }

    /// Ascending natural frequencies (Hz) of `(K, M)`.
    pub fn natural_frequencies(&self, count: usize) -> Result<Vec<f64>> {
        let chol = Cholesky::new(self.m.clone())
            .ok_or_else(|| Error::Eigen("mass matrix is not positive definite".into()))?;
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("mass Cholesky factor"))?;
        let a = &l_inv * &self.k * l_inv.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(a, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
        let mut freqs: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0).sqrt() / (2.0 * PI))
            .collect();
        freqs.sort_by(|a, b| a.total_cmp(b));
        freqs.truncate(count);
        Ok(freqs)
    }

    /// Static deflection under point loads `loads` at `positions`.
    pub fn static_deflection(&self, positions: &[f64], loads: &[f64]) -> Result<DVector<f64>> {
        let l = self.load_distribution(positions);
        let f = l * DVector::from_column_slice(loads);
        self.k
            .clone()
            .cholesky()
            .map(|c| c.solve(&f))
            .ok_or(Error::Singular("bridge stiffness matrix"))
    }
}

impl Default for BridgeParams {
    fn default() -> Self {
        Self::reference()
    }
}
