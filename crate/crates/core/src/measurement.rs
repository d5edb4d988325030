//! Vehicle-borne measurement record: axle positions and the two body
//! accelerations, sampled uniformly in time.

use std::io::Read;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub dt: f64,
    /// Front-axle position per sample, m.
    pub x1: Vec<f64>,
    /// Rear-axle position per sample, m.
    pub x2: Vec<f64>,
    /// Body acceleration above the front and rear axles, m/s^2.
    pub acc: [Vec<f64>; 2],
}

impl Measurements {
    pub fn len(&self) -> usize {
        self.x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x1.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x1.len();
        if n < 2 {
            return Err(Error::invalid("measurement record needs at least 2 samples"));
        }
        if self.x2.len() != n || self.acc.iter().any(|a| a.len() != n) {
            return Err(Error::invalid("measurement channels have different lengths"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("sampling interval must be positive, got {}", self.dt)));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.x1) || !finite(&self.x2) || !self.acc.iter().all(|a| finite(a)) {
            return Err(Error::NonFinite("measurement channels"));
        }
        for path in [&self.x1, &self.x2] {
            if path.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid("axle positions must be strictly increasing"));
            }
        }
        Ok(())
    }

    /// Reads a CSV with at least the columns `t`, `x1`, `x2`, `acc_s1` and
    /// `acc_s2` (the noisy columns `acc_s1_noisy` / `acc_s2_noisy` take
    /// precedence when present). Other columns are ignored.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let find = |name: &str| headers.iter().position(|h| h == name);
        let col = |names: &[&str]| -> Result<usize> {
            names.iter().find_map(|n| find(n)).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column {:?}", names[names.len() - 1]),
            })
        };
        let ct = col(&["t"])?;
        let cx1 = col(&["x1"])?;
        let cx2 = col(&["x2"])?;
        let ca1 = col(&["acc_s1_noisy", "acc_s1"])?;
        let ca2 = col(&["acc_s2_noisy", "acc_s2"])?;

        let mut t = Vec::new();
        let mut out = Measurements {
            dt: 0.0,
            x1: Vec::new(),
            x2: Vec::new(),
            acc: [Vec::new(), Vec::new()],
        };
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let get = |c: usize| -> Result<f64> {
                let s = rec.get(c).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("missing field {}", c + 1),
                })?;
                let v: f64 = s.parse().map_err(|e| Error::Parse {
                    line,
                    message: format!("field {}: {e}", c + 1),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        line,
                        message: format!("field {}: non-finite value", c + 1),
                    })
                }
            };
            t.push(get(ct)?);
            out.x1.push(get(cx1)?);
            out.x2.push(get(cx2)?);
            out.acc[0].push(get(ca1)?);
            out.acc[1].push(get(ca2)?);
        }
        if t.len() < 2 {
            return Err(Error::Parse {
                line: t.len() + 1,
                message: "measurement record needs at least 2 rows".into(),
            });
        }
        let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::Parse {
                line: 2,
                message: "time column must be increasing".into(),
            });
        }
        for (k, &tk) in t.iter().enumerate() {
            if (tk - (t[0] + k as f64 * dt)).abs() > 1e-6 * dt + 1e-12 * tk.abs() {
                return Err(Error::Parse {
                    line: k + 2,
                    message: format!("t = {tk} breaks the uniform sampling {dt}"),
                });
            }
        }
        out.dt = dt;
        out.validate()?;
        Ok(out)
    }
}
