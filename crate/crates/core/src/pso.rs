//! Particle swarm search over vehicle and bridge parameters.
//!
//! Position update per particle `i` at step `s`:
//!
//! ```text
//! ΔX_s = α1 q1 ΔX_{s-1} + α2 q2 (L_s − X_s) + α3 q3 (G_s − X_s)
//! X_{s+1} = X_s + ΔX_s
//! ```
//!
//! with `L` the particle's best position, `G` the swarm's best and fresh
//! `q ~ U[0, 1]` per particle and term. Coordinates leaving the bounds are
//! clamped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::BridgeParams;
use crate::error::{Error, Result};
use crate::estimator::ObjectiveContext;
use crate::vehicle::VehicleParams;

/// Free parameters searched by the swarm. `m_s` and `d_2` follow from the
/// known total mass and wheelbase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateVector {
    pub d_1: f64,
    pub c_s1: f64,
    pub c_s2: f64,
    pub k_s1: f64,
    pub k_s2: f64,
    pub m_u1: f64,
    pub m_u2: f64,
    pub k_u1: f64,
    pub k_u2: f64,
    pub ei: Vec<f64>,
    pub rho_a: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
}

const VEHICLE_NAMES: [&str; 9] = ["d_1", "c_s1", "c_s2", "k_s1", "k_s2", "m_u1", "m_u2", "k_u1", "k_u2"];

impl CandidateVector {
    pub fn from_params(v: &VehicleParams, b: &BridgeParams) -> Self {
        Self {
            d_1: v.d_1,
            c_s1: v.c_s1,
            c_s2: v.c_s2,
            k_s1: v.k_s1,
            k_s2: v.k_s2,
            m_u1: v.m_u1,
            m_u2: v.m_u2,
            k_u1: v.k_u1,
            k_u2: v.k_u2,
            ei: b.ei.clone(),
            rho_a: b.rho_a,
            alpha_c: b.alpha_c,
            beta_c: b.beta_c,
        }
    }

    pub fn dim(&self) -> usize {
        VEHICLE_NAMES.len() + self.ei.len() + 3
    }

    /// Coordinate names in flat-vector order.
    pub fn names(n_elem: usize) -> Vec<String> {
        VEHICLE_NAMES
            .iter()
            .map(|s| s.to_string())
            .chain((1..=n_elem).map(|i| format!("ei_{i}")))
            .chain(["rho_a", "alpha_c", "beta_c"].map(String::from))
            .collect()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = vec![
            self.d_1, self.c_s1, self.c_s2, self.k_s1, self.k_s2, self.m_u1, self.m_u2, self.k_u1, self.k_u2,
        ];
        out.extend_from_slice(&self.ei);
        out.extend([self.rho_a, self.alpha_c, self.beta_c]);
        out
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() < VEHICLE_NAMES.len() + 4 {
            return Err(Error::invalid(format!("candidate vector too short: {}", x.len())));
        }
        let n = x.len();
        Ok(Self {
            d_1: x[0],
            c_s1: x[1],
            c_s2: x[2],
            k_s1: x[3],
            k_s2: x[4],
            m_u1: x[5],
            m_u2: x[6],
            k_u1: x[7],
            k_u2: x[8],
            ei: x[9..n - 3].to_vec(),
            rho_a: x[n - 3],
            alpha_c: x[n - 2],
            beta_c: x[n - 1],
        })
    }
}

/// Quantities treated as known during identification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnownQuantities {
    /// Total vehicle mass `M`, kg.
    pub total_mass: f64,
    /// Wheelbase `D`, m.
    pub wheelbase: f64,
    pub speed: f64,
    pub span: f64,
    pub elem_len: f64,
}

impl KnownQuantities {
    pub fn from_truth(v: &VehicleParams, b: &BridgeParams) -> Self {
        Self {
            total_mass: v.total_mass(),
            wheelbase: v.wheelbase(),
            speed: v.speed,
            span: b.span,
            elem_len: b.elem_len,
        }
    }
}

/// Rebuilds full parameter sets from a candidate. Non-physical candidates
/// (`m_s ≤ 0`, `d_2 ≤ 0`, non-positive entries) are rejected.
pub fn expand(c: &CandidateVector, known: &KnownQuantities) -> Result<(VehicleParams, BridgeParams)> {
    let m_s = known.total_mass - c.m_u1 - c.m_u2;
    if !(m_s > 0.0) {
        return Err(Error::invalid(format!("sprung mass {m_s} is not positive")));
    }
    let d_2 = known.wheelbase - c.d_1;
    if !(c.d_1 > 0.0) || !(d_2 > 0.0) {
        return Err(Error::invalid(format!("d_1 = {} outside (0, {})", c.d_1, known.wheelbase)));
    }
    let vehicle = VehicleParams {
        m_s,
        c_s1: c.c_s1,
        c_s2: c.c_s2,
        k_s1: c.k_s1,
        k_s2: c.k_s2,
        d_1: c.d_1,
        d_2,
        m_u1: c.m_u1,
        m_u2: c.m_u2,
        k_u1: c.k_u1,
        k_u2: c.k_u2,
        speed: known.speed,
    };
    vehicle.validate()?;
    let bridge = BridgeParams {
        rho_a: c.rho_a,
        ei: c.ei.clone(),
        alpha_c: c.alpha_c,
        beta_c: c.beta_c,
        span: known.span,
        elem_len: known.elem_len,
    };
    bridge.validate()?;
    Ok((vehicle, bridge))
}

/// Box constraints on the flat candidate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid("bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::invalid("each lower bound must not exceed its upper bound"));
        }
        Ok(Self { lo, hi })
    }

    /// `[1 − rel, 1 + rel]` times the reference, except `d_1` which spans
    /// `[0.1, 0.9]` of the wheelbase.
    pub fn around(reference: &CandidateVector, known: &KnownQuantities, rel: f64) -> Self {
        let r = reference.to_vec();
        let mut lo: Vec<f64> = r.iter().map(|v| v * (1.0 - rel)).collect();
        let mut hi: Vec<f64> = r.iter().map(|v| v * (1.0 + rel)).collect();
        lo[0] = 0.1 * known.wheelbase;
        hi[0] = 0.9 * known.wheelbase;
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v <= h)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.clamp(*l, *h);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| if h > l { rng.gen_range(l..=h) } else { l })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    /// Particles per swarm.
    pub samples: usize,
    /// Update steps per run.
    pub iterations: usize,
    pub alpha: [f64; 3],
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            samples: 60,
            iterations: 50,
            alpha: [0.6, 0.3, 0.1],
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::invalid("samples must be at least 2"));
        }
        if self.alpha.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::invalid("alpha coefficients must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
    /// Objective at `x`; `+∞` until evaluated.
    pub j: f64,
    pub best_x: Vec<f64>,
    pub best_j: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub bounds: Bounds,
    pub best_x: Vec<f64>,
    pub best_j: f64,
    /// Global-best objective after each evaluation round.
    pub history: Vec<f64>,
}

pub fn init_swarm<R: Rng + ?Sized>(bounds: &Bounds, n: usize, rng: &mut R) -> Swarm {
    let particles: Vec<Particle> = (0..n)
        .map(|_| {
            let x = bounds.sample(rng);
            Particle {
                dx: vec![0.0; x.len()],
                best_x: x.clone(),
                x,
                j: f64::INFINITY,
                best_j: f64::INFINITY,
            }
        })
        .collect();
    Swarm {
        best_x: particles.first().map(|p| p.x.clone()).unwrap_or_default(),
        particles,
        bounds: bounds.clone(),
        best_j: f64::INFINITY,
        history: Vec::new(),
    }
}

impl Swarm {
    /// Evaluates every particle (in parallel) and updates local and global
    /// bests. Particles with a non-finite objective are re-drawn inside the
    /// bounds with zero velocity.
    pub fn evaluate<F, R>(&mut self, f: &F, rng: &mut R)
    where
        F: Fn(&[f64]) -> f64 + Sync,
        R: Rng + ?Sized,
    {
        let js: Vec<f64> = self.particles.par_iter().map(|p| f(&p.x)).collect();
        for (p, j) in self.particles.iter_mut().zip(js) {
            p.j = if j.is_finite() { j } else { f64::INFINITY };
            if p.j < p.best_j {
                p.best_j = p.j;
                p.best_x.clone_from(&p.x);
            }
            if p.best_j < self.best_j {
                self.best_j = p.best_j;
                self.best_x.clone_from(&p.best_x);
            }
        }
        for p in &mut self.particles {
            if !p.j.is_finite() {
                p.x = self.bounds.sample(rng);
                p.dx.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        self.history.push(self.best_j);
    }

    /// Moves every particle once.
    pub fn advance<R: Rng + ?Sized>(&mut self, alpha: [f64; 3], rng: &mut R) {
        let g = &self.best_x;
        for p in &mut self.particles {
            let (q1, q2, q3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
            for (((x, dx), b), g) in p.x.iter_mut().zip(&mut p.dx).zip(&p.best_x).zip(g) {
                *dx = alpha[0] * q1 * *dx + alpha[1] * q2 * (b - *x) + alpha[2] * q3 * (g - *x);
                *x += *dx;
            }
            self.bounds.clamp(&mut p.x);
        }
    }

    /// Best positions of all particles.
    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.particles.iter().map(|p| p.x.clone()).collect()
    }
}

/// Generic minimizer: `iterations` rounds of move-then-evaluate after the
/// initial evaluation.
pub fn minimize<F>(f: &F, bounds: &Bounds, cfg: &PsoConfig, seed: u64) -> Result<Swarm>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut swarm = init_swarm(bounds, cfg.samples, &mut rng);
    swarm.evaluate(f, &mut rng);
    for _ in 0..cfg.iterations {
        swarm.advance(cfg.alpha, &mut rng);
        swarm.evaluate(f, &mut rng);
    }
    Ok(swarm)
}

/// Objective of a flat candidate against one measurement record.
pub fn candidate_objective(ctx: &ObjectiveContext, known: &KnownQuantities, x: &[f64]) -> f64 {
    let Ok(c) = CandidateVector::from_slice(x) else {
        return f64::INFINITY;
    };
    match expand(&c, known) {
        Ok((v, b)) => ctx.objective(&v, &b),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone)]
pub struct Identification {
    pub best: CandidateVector,
    pub best_j: f64,
    pub history: Vec<f64>,
    /// Initial particle positions (prior sample).
    pub prior: Vec<Vec<f64>>,
    /// Final particle positions.
    pub swarm: Vec<Vec<f64>>,
}

impl Identification {
    pub fn best_params(&self, known: &KnownQuantities) -> Result<(VehicleParams, BridgeParams)> {
        expand(&self.best, known)
    }
}

pub fn identify(
    ctx: &ObjectiveContext,
    known: &KnownQuantities,
    bounds: &Bounds,
    cfg: &PsoConfig,
    seed: u64,
) -> Result<Identification> {
    cfg.validate()?;
    let f = |x: &[f64]| candidate_objective(ctx, known, x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut swarm = init_swarm(bounds, cfg.samples, &mut rng);
    let prior = swarm.positions();
    swarm.evaluate(&f, &mut rng);
    for _ in 0..cfg.iterations {
        swarm.advance(cfg.alpha, &mut rng);
        swarm.evaluate(&f, &mut rng);
    }
    if !swarm.best_j.is_finite() {
        return Err(Error::NonFinite("every candidate failed to evaluate"));
    }
    Ok(Identification {
        best: CandidateVector::from_slice(&swarm.best_x)?,
        best_j: swarm.best_j,
        history: swarm.history.clone(),
        swarm: swarm.positions(),
        prior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> (VehicleParams, BridgeParams, KnownQuantities) {
        let v = VehicleParams::reference();
        let b = BridgeParams::reference();
        let k = KnownQuantities::from_truth(&v, &b);
        (v, b, k)
    }

    #[test]
    fn expand_round_trips_reference() {
        let (v, b, k) = truth();
        let c = CandidateVector::from_params(&v, &b);
        assert_eq!(c.dim(), 27);
        let (v2, b2) = expand(&c, &k).unwrap();
        assert!((v2.m_s - v.m_s).abs() < 1e-9);
        assert!((v2.d_2 - v.d_2).abs() < 1e-12);
        assert_eq!(b2, b);
        assert_eq!(CandidateVector::from_slice(&c.to_vec()).unwrap(), c);
        assert_eq!(CandidateVector::names(15).len(), 27);
    }

    #[test]
    fn expand_rejects_nonphysical() {
        let (v, b, k) = truth();
        let mut c = CandidateVector::from_params(&v, &b);
        c.m_u1 = k.total_mass;
        assert!(expand(&c, &k).is_err());
        let mut c = CandidateVector::from_params(&v, &b);
        c.d_1 = k.wheelbase / 2.0;
        let (v2, _) = expand(&c, &k).unwrap();
        assert_eq!(v2.d_2, k.wheelbase / 2.0);
        c.d_1 = k.wheelbase;
        assert!(expand(&c, &k).is_err());
    }

    #[test]
    fn particle_at_best_stays() {
        let bounds = Bounds::new(vec![-1.0; 2], vec![1.0; 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut swarm = init_swarm(&bounds, 1, &mut rng);
        swarm.evaluate(&|x: &[f64]| x.iter().map(|v| v * v).sum(), &mut rng);
        let x0 = swarm.particles[0].x.clone();
        swarm.advance([0.6, 0.3, 0.1], &mut rng);
        assert_eq!(swarm.particles[0].x, x0);
    }

    #[test]
    fn zero_coefficients_freeze() {
        let bounds = Bounds::new(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut swarm = init_swarm(&bounds, 5, &mut rng);
        let f = |x: &[f64]| x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>();
        swarm.evaluate(&f, &mut rng);
        let before = swarm.positions();
        for _ in 0..5 {
            swarm.advance([0.0; 3], &mut rng);
        }
        assert_eq!(swarm.positions(), before);
    }

    #[test]
    fn zero_width_bounds_give_identical_particles() {
        let bounds = Bounds::new(vec![2.0, 3.0], vec![2.0, 3.0]).unwrap();
        let swarm = init_swarm(&bounds, 4, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(swarm.particles.iter().all(|p| p.x == vec![2.0, 3.0]));
    }

    #[test]
    fn non_finite_particles_are_redrawn() {
        let bounds = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut swarm = init_swarm(&bounds, 8, &mut rng);
        swarm.evaluate(&|x: &[f64]| if x[0] < 0.5 { f64::NAN } else { x[0] }, &mut rng);
        assert!(swarm.best_j >= 0.5 && swarm.best_j.is_finite());
        assert!(swarm.particles.iter().all(|p| bounds.contains(&p.x)));
    }

    #[test]
    fn sphere_best_is_monotone() {
        let bounds = Bounds::new(vec![-5.0; 5], vec![5.0; 5]).unwrap();
        let target = [1.0, -2.0, 0.5, 3.0, -0.25];
        let f = |x: &[f64]| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let cfg = PsoConfig {
            samples: 20,
            iterations: 100,
            alpha: [0.6, 0.3, 0.1],
        };
        let swarm = minimize(&f, &bounds, &cfg, 11).unwrap();
        assert_eq!(swarm.history.len(), 101);
        assert!(swarm.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(swarm.best_j < swarm.history[0]);
        assert!(bounds.contains(&swarm.best_x));
    }

    #[test]
    fn prior_bounds() {
        let (v, b, k) = truth();
        let bounds = Bounds::around(&CandidateVector::from_params(&v, &b), &k, 0.2);
        assert!((bounds.lo[0] - 0.44).abs() < 1e-12 && (bounds.hi[0] - 3.96).abs() < 1e-12);
        assert!((bounds.hi[9] - 1.2 * 1.56e10).abs() < 1.0);
    }
}
