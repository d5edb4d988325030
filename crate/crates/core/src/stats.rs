//! Small descriptive statistics over `f64` slices.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn rms(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    rms(&xs.iter().map(|x| x - m).collect::<Vec<_>>())
}

/// RMS of `a - b` over the common prefix.
pub fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    rms(&d)
}

/// Pearson correlation coefficient; 0 when either side has no variance.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Equal-width histogram with densities normalized to unit total area.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl Histogram {
    /// Samples outside `[lo, hi]` are ignored. A degenerate range is widened
    /// symmetrically so that a constant sample still yields a valid bin.
    pub fn new(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(Error::invalid(format!("bad histogram range [{lo}, {hi}] / {bins} bins")));
        }
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            let pad = 0.5 * lo.abs().max(1e-12) * 1e-6;
            (lo - pad, hi + pad)
        };
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0usize; bins];
        for &x in samples {
            if x >= lo && x <= hi {
                let i = (((x - lo) / width) as usize).min(bins - 1);
                counts[i] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        let densities = counts
            .iter()
            .map(|&c| if total > 0 { c as f64 / (total as f64 * width) } else { 0.0 })
            .collect();
        Ok(Self { edges, densities })
    }

    pub fn area(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }
}
