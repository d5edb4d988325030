//! Road unevenness: generation, sampling, and per-axle road-profile series.
//!
//! A profile is stored on a uniform spatial grid and sampled by linear
//! interpolation. Coordinates follow the bridge convention: `x = 0` is the
//! bridge entrance, so approach sections have negative `x`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference spatial frequency of the ISO 8608 displacement PSD (cycles/m).
pub const ISO_REFERENCE_FREQUENCY: f64 = 0.1;

/// Upper edge of the synthesized band (cycles/m).
pub const MAX_SPATIAL_FREQUENCY: f64 = 10.0;

/// ISO 8608 roughness class. Only the smooth end of the scale is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum RoughnessClass {
    #[default]
    A,
    B,
    C,
}

impl RoughnessClass {
    /// Geometric-mean displacement PSD at the reference frequency, m^3.
    pub fn reference_psd(self) -> f64 {
        match self {
            RoughnessClass::A => 16e-6,
            RoughnessClass::B => 64e-6,
            RoughnessClass::C => 256e-6,
        }
    }

    /// One-sided displacement PSD `G(n) = G0 (n / n0)^-2`.
    pub fn psd(self, n: f64) -> f64 {
        self.reference_psd() * (n / ISO_REFERENCE_FREQUENCY).powi(-2)
    }
}

impl std::str::FromStr for RoughnessClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(RoughnessClass::A),
            "B" | "b" => Ok(RoughnessClass::B),
            "C" | "c" => Ok(RoughnessClass::C),
            other => Err(Error::invalid(format!("unknown roughness class {other:?}"))),
        }
    }
}

/// Road elevation `R(x)` sampled on a uniform grid starting at `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadUnevenness {
    x0: f64,
    dx: f64,
    elevations: Vec<f64>,
}

impl RoadUnevenness {
    pub fn new(x0: f64, dx: f64, elevations: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::invalid(format!("grid spacing must be positive, got {dx}")));
        }
        if !x0.is_finite() {
            return Err(Error::invalid("grid origin must be finite"));
        }
        if elevations.len() < 2 {
            return Err(Error::invalid("a road profile needs at least 2 samples"));
        }
        if elevations.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("road elevations"));
        }
        Ok(Self { x0, dx, elevations })
    }

    /// Constant-elevation profile covering `[x0, x0 + (n - 1) dx]`.
    pub fn flat(x0: f64, dx: f64, n: usize, value: f64) -> Result<Self> {
        Self::new(x0, dx, vec![value; n])
    }

    /// Tabulates `f` on the grid `x0 + k dx`, `k = 0..n`.
    pub fn from_fn(x0: f64, dx: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(x0, dx, (0..n).map(|k| f(x0 + k as f64 * dx)).collect())
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    pub fn len(&self) -> usize {
        self.elevations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elevations.is_empty()
    }

    /// Last grid coordinate.
    pub fn x_end(&self) -> f64 {
        self.x0 + self.dx * (self.elevations.len() - 1) as f64
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.elevations.len()).map(move |k| self.x0 + k as f64 * self.dx)
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let tol = 1e-9 * self.dx;
        lo >= self.x0 - tol && hi <= self.x_end() + tol
    }

    /// Same profile with its grid origin moved to `x0`.
    pub fn with_origin(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    /// Zeroes the profile up to `start` and blends it in with a raised-cosine
    /// ramp of length `ramp`, so a vehicle starting at `start` begins at rest
    /// on level ground.
    pub fn with_lead_in(mut self, start: f64, ramp: f64) -> Self {
        let (x0, dx) = (self.x0, self.dx);
        for (k, e) in self.elevations.iter_mut().enumerate() {
            let x = x0 + k as f64 * dx;
            let w = if x <= start {
                0.0
            } else if ramp > 0.0 && x < start + ramp {
                0.5 * (1.0 - (PI * (x - start) / ramp).cos())
            } else {
                1.0
            };
            *e *= w;
        }
        self
    }

    /// Linear interpolation of the elevation at `x`; exact on grid points.
    pub fn sample_at(&self, x: f64) -> Result<f64> {
        let n = self.elevations.len();
        let s = (x - self.x0) / self.dx;
        let tol = 1e-9;
        if !s.is_finite() || s < -tol || s > (n - 1) as f64 + tol {
            return Err(Error::OutOfRange {
                x,
                lo: self.x0,
                hi: self.x_end(),
            });
        }
        let nearest = s.round();
        if (s - nearest).abs() <= tol {
            return Ok(self.elevations[nearest as usize]);
        }
        let i = (s.floor() as usize).min(n - 2);
        let t = s - i as f64;
        let (a, b) = (self.elevations[i], self.elevations[i + 1]);
        Ok(a + t * (b - a))
    }

    /// Root-mean-square elevation.
    pub fn rms(&self) -> f64 {
        crate::stats::rms(&self.elevations)
    }

    /// Writes the two-column `x_m,elevation_m` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x_m", "elevation_m"]).map_err(csv_err)?;
        for (x, e) in self.grid().zip(&self.elevations) {
            out.write_record([x.to_string(), e.to_string()])
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the two-column CSV written by [`RoadUnevenness::write_csv`].
    ///
    /// The `x` column must be uniformly spaced and increasing.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let mut xs = Vec::new();
        let mut es = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 columns, found {}", rec.len()),
                });
            }
            let field = |j: usize| -> Result<f64> {
                let v: f64 = rec[j].parse().map_err(|e| Error::Parse {
                    line,
                    message: format!("column {}: {e}", j + 1),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        line,
                        message: format!("column {}: non-finite value", j + 1),
                    })
                }
            };
            xs.push(field(0)?);
            es.push(field(1)?);
        }
        if xs.len() < 2 {
            return Err(Error::Parse {
                line: xs.len() + 1,
                message: "a road profile needs at least 2 rows".into(),
            });
        }
        let x0 = xs[0];
        let dx = (xs[xs.len() - 1] - x0) / (xs.len() - 1) as f64;
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Parse {
                line: 2,
                message: "x column must be strictly increasing".into(),
            });
        }
        for (k, &x) in xs.iter().enumerate() {
            let expected = x0 + k as f64 * dx;
            if (x - expected).abs() > 1e-6 * dx + 1e-12 * x.abs() {
                return Err(Error::Parse {
                    line: k + 2,
                    message: format!("x = {x} breaks the uniform spacing {dx}"),
                });
            }
        }
        Self::new(x0, dx, es)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Synthesizes a zero-mean ISO 8608 profile on `[0, length]` as a sum of
/// cosines with random phases.
///
/// Components sit on the harmonics `k / P` of the grid period
/// `P = n dx` between `1 / P` and `min(10, 1 / (2 dx))` cycles/m, each with
/// amplitude `sqrt(2 G(n_k) / P)`.
pub fn generate_road(
    class: RoughnessClass,
    seed: u64,
    length: f64,
    dx: f64,
) -> Result<RoadUnevenness> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::invalid(format!("road length must be positive, got {length}")));
    }
    if !(dx > 0.0) || !dx.is_finite() {
        return Err(Error::invalid(format!("grid spacing must be positive, got {dx}")));
    }
    let n = (length / dx).round() as usize + 1;
    if n < 2 {
        return Err(Error::invalid("road length is shorter than one grid step"));
    }
    let period = n as f64 * dx;
    let band_top = MAX_SPATIAL_FREQUENCY.min(0.5 / dx);
    let n_freq = (band_top * period).floor() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let components: Vec<(f64, f64, f64)> = (1..=n_freq)
        .map(|k| {
            let f = k as f64 / period;
            let amp = (2.0 * class.psd(f) / period).sqrt();
            let phase = rng.gen::<f64>() * 2.0 * PI;
            (2.0 * PI * f, amp, phase)
        })
        .collect();

    let mut elevations: Vec<f64> = (0..n)
        .map(|j| {
            let x = j as f64 * dx;
            components
                .iter()
                .map(|&(w, a, p)| a * (w * x + p).cos())
                .sum()
        })
        .collect();
    let mean = elevations.iter().sum::<f64>() / n as f64;
    for e in &mut elevations {
        *e -= mean;
    }
    RoadUnevenness::new(0.0, dx, elevations)
}

/// Road profile seen by one axle: `r(k dt) = R(x(k dt))`.
pub fn axle_road_series(road: &RoadUnevenness, trajectory: &[f64]) -> Result<Vec<f64>> {
    trajectory.iter().map(|&x| road.sample_at(x)).collect()
}
