//! Study configuration and batch drivers shared by the command line and the
//! acceptance checks.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::{assemble, BridgeParams};
use crate::error::{Error, Result};
use crate::estimator::{FilterConfig, ObjectiveContext, RoadEstimate};
use crate::pso::{identify, Bounds, CandidateVector, KnownQuantities, PsoConfig};
use crate::road::{generate_road, RoadUnevenness, RoughnessClass};
use crate::sim::{simulate, SimConfig, SimRecord, SimSummary};
use crate::stats::{mean, Histogram};
use crate::vehicle::VehicleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    #[default]
    Intact,
    Damaged,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "intact" => Ok(Scenario::Intact),
            "damaged" => Ok(Scenario::Damaged),
            _ => Err(Error::invalid(format!("unknown scenario {s:?} (expected intact or damaged)"))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Intact => "intact",
            Scenario::Damaged => "damaged",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadConfig {
    pub class: RoughnessClass,
    pub dx: f64,
    /// Length of the raised-cosine ramp from the flat lead-in, m.
    pub ramp: f64,
    /// Road seed; the master seed when absent.
    pub seed: Option<u64>,
}

impl Default for RoadConfig {
    fn default() -> Self {
        Self {
            class: RoughnessClass::A,
            dx: 0.01,
            ramp: 5.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DamageConfig {
    /// Zero-based element index; the mid-span element when absent.
    pub element: Option<usize>,
    pub factor: f64,
}

impl Default for DamageConfig {
    fn default() -> Self {
        Self {
            element: None,
            factor: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// True vehicle. Its total mass, wheelbase and speed are the known
    /// quantities during identification.
    pub vehicle: VehicleParams,
    /// Intact bridge; also the prior reference in the damaged scenario.
    pub bridge: BridgeParams,
    pub road: RoadConfig,
    pub sim: SimConfig,
    /// Kalman covariances; the preset matching `noise_pct` when absent.
    pub filter: Option<FilterConfig>,
    pub pso: PsoConfig,
    pub scenario: Scenario,
    pub damage: DamageConfig,
    pub noise_pct: f64,
    pub runs: usize,
    pub seed: u64,
    /// Half-width of the prior box as a fraction of the reference value.
    pub prior_range: f64,
    /// Spatial grid of the objective, m; `speed × dt` when absent.
    pub objective_dx: Option<f64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams::reference(),
            bridge: BridgeParams::reference(),
            road: RoadConfig::default(),
            sim: SimConfig::default(),
            filter: None,
            pso: PsoConfig::default(),
            scenario: Scenario::Intact,
            damage: DamageConfig::default(),
            noise_pct: 0.0,
            runs: 100,
            seed: 0,
            prior_range: 0.2,
            objective_dx: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn at(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidInput(m) => Error::config(path, m),
        other => Error::config(path, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            Error::config(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate().map_err(at("vehicle"))?;
        self.bridge.validate().map_err(at("bridge"))?;
        if !(self.road.dx > 0.0) || !self.road.dx.is_finite() {
            return Err(Error::config("road.dx", format!("must be positive, got {}", self.road.dx)));
        }
        if !(self.road.ramp >= 0.0) || !self.road.ramp.is_finite() {
            return Err(Error::config("road.ramp", "must be non-negative"));
        }
        self.sim.newmark.validate().map_err(at("sim.newmark"))?;
        self.sim
            .validate(self.vehicle.speed, self.bridge.span)
            .map_err(at("sim"))?;
        if let Some(f) = &self.filter {
            f.validate().map_err(at("filter"))?;
        }
        self.pso.validate().map_err(at("pso"))?;
        if let Some(e) = self.damage.element {
            if e >= self.bridge.n_elem() {
                return Err(Error::config(
                    "damage.element",
                    format!("element {e} out of range (bridge has {})", self.bridge.n_elem()),
                ));
            }
        }
        if !(self.damage.factor > 0.0) || !self.damage.factor.is_finite() {
            return Err(Error::config("damage.factor", "must be positive"));
        }
        if !(self.noise_pct >= 0.0) || !self.noise_pct.is_finite() {
            return Err(Error::config("noise_pct", format!("must be non-negative, got {}", self.noise_pct)));
        }
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if !(self.prior_range >= 0.0 && self.prior_range < 1.0) {
            return Err(Error::config("prior_range", "must lie in [0, 1)"));
        }
        if let Some(dx) = self.objective_dx {
            if !(dx > 0.0) || !dx.is_finite() {
                return Err(Error::config("objective_dx", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn damaged_element(&self) -> usize {
        self.damage.element.unwrap_or_else(|| self.bridge.center_element())
    }

    /// Bridge used to generate the data.
    pub fn truth_bridge(&self) -> BridgeParams {
        match self.scenario {
            Scenario::Intact => self.bridge.clone(),
            Scenario::Damaged => self.bridge.with_damage(self.damaged_element(), self.damage.factor),
        }
    }

    pub fn filter_config(&self) -> FilterConfig {
        self.filter.clone().unwrap_or_else(|| FilterConfig::for_noise(self.noise_pct))
    }

    pub fn objective_dx(&self) -> f64 {
        self.objective_dx.unwrap_or(self.vehicle.speed * self.sim.newmark.dt)
    }

    pub fn road_seed(&self) -> u64 {
        self.road.seed.unwrap_or(self.seed)
    }

    /// Road covering both axle paths with a margin, flat up to the front
    /// axle's start position and ramped in from there.
    pub fn road(&self) -> Result<RoadUnevenness> {
        let start = -self.sim.approach;
        let x0 = start - self.vehicle.wheelbase() - 1.0;
        let x1 = start + self.vehicle.speed * self.sim.total_time + 1.0;
        let road = generate_road(self.road.class, self.road_seed(), x1 - x0, self.road.dx)?;
        Ok(road.with_origin(x0).with_lead_in(start, self.road.ramp))
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            noise_pct: self.noise_pct,
            seed: self.seed,
            ..self.sim.clone()
        }
    }

    pub fn known(&self) -> KnownQuantities {
        KnownQuantities::from_truth(&self.vehicle, &self.bridge)
    }

    /// Prior box around the true vehicle and the intact bridge.
    pub fn bounds(&self) -> Bounds {
        let reference = CandidateVector::from_params(&self.vehicle, &self.bridge);
        Bounds::around(&reference, &self.known(), self.prior_range)
    }

    /// Values that identified parameters are normalized by.
    pub fn truth_vector(&self) -> Vec<f64> {
        let (ms1, ms2) = self.vehicle.apportion_sprung_mass();
        let mut v = CandidateVector::from_params(&self.vehicle, &self.truth_bridge()).to_vec();
        v.extend([ms1, ms2]);
        v
    }

    pub fn parameter_names(&self) -> Vec<String> {
        let mut n = CandidateVector::names(self.bridge.n_elem());
        n.extend(["m_s1".to_string(), "m_s2".to_string()]);
        n
    }
}

/// Simulated crossing under the configured scenario.
pub struct Simulation {
    pub road: RoadUnevenness,
    pub bridge: BridgeParams,
    pub record: SimRecord,
    pub summary: SimSummary,
}

pub fn run_simulation(cfg: &ExperimentConfig) -> Result<Simulation> {
    cfg.validate()?;
    let road = cfg.road()?;
    let bridge = cfg.truth_bridge();
    let sim = cfg.sim_config();
    let record = simulate(&cfg.vehicle, &bridge, &road, &sim)?;
    let summary = record.summary(&cfg.vehicle, &bridge, sim.eps_max);
    Ok(Simulation {
        road,
        bridge,
        record,
        summary,
    })
}

/// Derived seed of run `run` (noise realization and swarm).
pub fn run_seed(master: u64, run: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ 0x5EED_0F1D);
    rng.set_stream(run as u64 + 1);
    rand::RngCore::next_u64(&mut rng)
}

/// Candidate plus the derived sprung masses, divided elementwise by truth.
pub fn normalized(cfg: &ExperimentConfig, x: &[f64]) -> Option<Vec<f64>> {
    let c = CandidateVector::from_slice(x).ok()?;
    let known = cfg.known();
    let m_s = known.total_mass - c.m_u1 - c.m_u2;
    let d = known.wheelbase;
    let mut v = x.to_vec();
    v.extend([m_s * (d - c.d_1) / d, m_s * c.d_1 / d]);
    Some(v.iter().zip(cfg.truth_vector()).map(|(a, t)| a / t).collect())
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub best_j: f64,
    pub history: Vec<f64>,
    /// Global best, normalized by truth (candidate order, then m_s1, m_s2).
    pub posterior: Vec<f64>,
    /// Initial particles, normalized by truth.
    pub prior: Vec<Vec<f64>>,
    pub roads: RoadEstimate,
}

pub struct Batch {
    pub names: Vec<String>,
    pub runs: Vec<std::result::Result<RunResult, String>>,
    pub road: RoadUnevenness,
}

impl Batch {
    pub fn successes(&self) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter_map(|r| r.as_ref().ok())
    }

    /// Pooled initial particles of every successful run.
    pub fn prior_samples(&self) -> Vec<&Vec<f64>> {
        self.successes().flat_map(|r| r.prior.iter()).collect()
    }

    pub fn column(&self, name: &str) -> Option<(Vec<f64>, Vec<f64>)> {
        let j = self.names.iter().position(|n| n == name)?;
        let post = self.successes().map(|r| r.posterior[j]).collect();
        let prior = self.prior_samples().iter().map(|p| p[j]).collect();
        Some((prior, post))
    }

    /// Mean `|x − 1|` of the normalized prior and posterior of `name`.
    pub fn deviation(&self, name: &str) -> Option<(f64, f64)> {
        let (prior, post) = self.column(name)?;
        if post.is_empty() {
            return None;
        }
        let dev = |v: &[f64]| mean(&v.iter().map(|x| (x - 1.0).abs()).collect::<Vec<_>>());
        Some((dev(&prior), dev(&post)))
    }

    pub fn best(&self) -> Option<&RunResult> {
        self.successes().min_by(|a, b| a.best_j.total_cmp(&b.best_j))
    }
}

/// Simulates once, then runs `cfg.runs` independent identifications with
/// fresh noise and swarm seeds. Failed runs are kept as error strings.
pub fn run_identification(cfg: &ExperimentConfig) -> Result<Batch> {
    let clean = run_simulation(&ExperimentConfig {
        noise_pct: 0.0,
        ..cfg.clone()
    })?
    .record;
    let road = cfg.road()?;
    let known = cfg.known();
    let bounds = cfg.bounds();
    let filter = cfg.filter_config();
    let runs = (0..cfg.runs)
        .into_par_iter()
        .map(|run| -> std::result::Result<RunResult, String> {
            let seed = run_seed(cfg.seed, run);
            let rec = clean.with_noise(cfg.noise_pct, seed).map_err(|e| e.to_string())?;
            let ctx = ObjectiveContext::new(rec.measurements(), filter.clone(), cfg.sim.newmark, cfg.objective_dx())
                .map_err(|e| e.to_string())?;
            let id = identify(&ctx, &known, &bounds, &cfg.pso, seed).map_err(|e| e.to_string())?;
            let (v, b) = id.best_params(&known).map_err(|e| e.to_string())?;
            let eval = ctx.evaluate(&v, &b).map_err(|e| e.to_string())?;
            let norm = |x: &[f64]| normalized(cfg, x).ok_or_else(|| "malformed candidate".to_string());
            Ok(RunResult {
                run,
                seed,
                best_j: id.best_j,
                history: id.history,
                posterior: norm(&id.best.to_vec())?,
                prior: id.prior.iter().map(|x| norm(x)).collect::<std::result::Result<_, _>>()?,
                roads: eval.roads,
            })
        })
        .collect();
    Ok(Batch {
        names: cfg.parameter_names(),
        runs,
        road,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes channels, bridge history, road and summary of a simulation.
pub fn write_simulation(sim: &Simulation, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    sim.record.write_csv(create(dir, "channels.csv")?)?;
    sim.record.write_bridge_csv(&assemble(&sim.bridge)?, create(dir, "bridge.csv")?)?;
    sim.road.write_csv(create(dir, "road.csv")?)?;
    let mut w = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut w, &sim.summary)?;
    writeln!(w)?;
    let mut gp = create(dir, "plots.gp")?;
    gp.write_all(SIM_PLOTS.as_bytes())?;
    gp.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct HistogramPair {
    name: String,
    prior: Histogram,
    posterior: Histogram,
}

/// Writes posterior, prior, J histories, histograms and best-run roads.
pub fn write_identification(cfg: &ExperimentConfig, batch: &Batch, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut header = vec!["run".to_string(), "seed".into(), "j".into()];
    header.extend(batch.names.iter().cloned());

    let mut post = csv::Writer::from_writer(create(dir, "posterior.csv")?);
    post.write_record(&header).map_err(csv_err)?;
    let mut failures = csv::Writer::from_writer(create(dir, "failures.csv")?);
    failures.write_record(["run", "error"]).map_err(csv_err)?;
    for (i, r) in batch.runs.iter().enumerate() {
        match r {
            Ok(r) => {
                let mut row = vec![r.run.to_string(), r.seed.to_string(), r.best_j.to_string()];
                row.extend(r.posterior.iter().map(|v| v.to_string()));
                post.write_record(&row).map_err(csv_err)?;
            }
            Err(e) => failures.write_record([i.to_string(), e.clone()]).map_err(csv_err)?,
        }
    }
    post.flush()?;
    failures.flush()?;

    let mut prior = csv::Writer::from_writer(create(dir, "prior.csv")?);
    let mut ph = vec!["run".to_string(), "particle".into()];
    ph.extend(batch.names.iter().cloned());
    prior.write_record(&ph).map_err(csv_err)?;
    for r in batch.successes() {
        for (p, x) in r.prior.iter().enumerate() {
            let mut row = vec![r.run.to_string(), p.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            prior.write_record(&row).map_err(csv_err)?;
        }
    }
    prior.flush()?;

    let mut hist = csv::Writer::from_writer(create(dir, "history.csv")?);
    hist.write_record(["run", "step", "j"]).map_err(csv_err)?;
    for r in batch.successes() {
        for (s, j) in r.history.iter().enumerate() {
            hist.write_record([r.run.to_string(), s.to_string(), j.to_string()])
                .map_err(csv_err)?;
        }
    }
    hist.flush()?;

    let mut pairs = Vec::new();
    for name in &batch.names {
        if let Some((pr, po)) = batch.column(name) {
            if po.is_empty() {
                continue;
            }
            let lo = pr.iter().chain(&po).copied().fold(f64::INFINITY, f64::min);
            let hi = pr.iter().chain(&po).copied().fold(f64::NEG_INFINITY, f64::max);
            pairs.push(HistogramPair {
                name: name.clone(),
                prior: Histogram::new(&pr, HIST_BINS, lo, hi)?,
                posterior: Histogram::new(&po, HIST_BINS, lo, hi)?,
            });
        }
    }
    let mut w = create(dir, "histograms.json")?;
    serde_json::to_writer_pretty(&mut w, &pairs)?;
    writeln!(w)?;
    w.flush()?;

    if let Some(best) = batch.best() {
        best.roads.front.write_csv(create(dir, "road_front.csv")?)?;
        best.roads.rear.write_csv(create(dir, "road_rear.csv")?)?;
        let grid = &best.roads.front;
        let truth: Vec<f64> = grid
            .grid()
            .map(|x| batch.road.sample_at(x))
            .collect::<Result<_>>()?;
        RoadUnevenness::new(grid.x0(), grid.dx(), truth)?.write_csv(create(dir, "road_true.csv")?)?;
    }
    let mut cfg_out = create(dir, "config.json")?;
    cfg_out.write_all(cfg.to_json()?.as_bytes())?;
    cfg_out.flush()?;
    let mut gp = create(dir, "plots.gp")?;
    gp.write_all(ID_PLOTS.as_bytes())?;
    gp.flush()?;
    Ok(())
}

const HIST_BINS: usize = 20;

const SIM_PLOTS: &str = r#"set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 1000,600
set output "acceleration.png"
set xlabel "t [s]"; set ylabel "acceleration [m/s^2]"
plot "channels.csv" using 1:4 with lines, "" using 1:5 with lines
set output "profiles.png"
set ylabel "elevation [m]"
plot "channels.csv" using 1:13 with lines, "" using 1:15 with lines, "" using 1:17 with lines
set output "midspan.png"
set ylabel "deflection [m]"
plot "channels.csv" using 1:12 with lines
"#;

const ID_PLOTS: &str = r#"set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 1000,600
set output "roads.png"
set xlabel "x [m]"; set ylabel "elevation [m]"
plot "road_true.csv" using 1:2 with lines title "true", "road_front.csv" using 1:2 with lines title "front", "road_rear.csv" using 1:2 with lines title "rear"
set output "history.png"
set xlabel "step"; set ylabel "J"; set logscale y
plot "history.csv" using 2:3 with points pt 7 ps 0.3 notitle
"#;
