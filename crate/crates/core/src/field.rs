//! Sampled fields and spectra on uniform grids, plus the error metrics the
//! runner reports.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid x_i = x0 + i·dx, i = 0..n (half-open on the right when
/// built from a range).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn from_range(xmin: f64, xmax: f64, n: usize) -> Result<Self> {
        if !(xmax > xmin) || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "bad grid range [{xmin}, {xmax}) with n = {n}"
            )));
        }
        Ok(Grid {
            x0: xmin,
            dx: (xmax - xmin) / n as f64,
            n,
        })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Index of a point that must lie on the grid (within 1e-9·dx).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.x0) / self.dx;
        let i = t.round();
        if (t - i).abs() <= 1e-9 && i >= 0.0 && (i as usize) < self.n {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Real field sampled on a uniform grid at a fixed time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time_tag: f64,
}

impl SampledField {
    pub fn new(grid: Grid, values: Vec<f64>, time_tag: f64) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidArgument(format!(
                "field length {} does not match grid n = {}",
                values.len(),
                grid.n
            )));
        }
        if grid.n < 16 {
            return Err(Error::InvalidArgument(format!(
                "field needs at least 16 samples, got {}",
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite field value".into()));
        }
        Ok(SampledField {
            grid,
            values,
            time_tag,
        })
    }

    pub fn from_fn(grid: Grid, time_tag: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.xs().map(f).collect();
        Self::new(grid, values, time_tag)
    }

    pub fn zeros(grid: Grid, time_tag: f64) -> Self {
        SampledField {
            grid,
            values: vec![0.0; grid.n],
            time_tag,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest edge magnitude relative to the peak; the decay warning the
    /// spectral solvers report is `decay_defect() > 1e-12`.
    pub fn decay_defect(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        self.values[0].abs().max(self.values[self.grid.n - 1].abs()) / peak
    }

    pub fn decay_warning(&self) -> bool {
        self.decay_defect() > 1e-12
    }

    /// Trapezoid ∫ u dx over the grid.
    pub fn mass(&self) -> f64 {
        let s: f64 = self.values.iter().sum();
        (s - 0.5 * self.values[0] - 0.5 * self.values[self.grid.n - 1]) * self.grid.dx
    }

    /// Linear interpolation; None outside the grid.
    pub fn interp(&self, x: f64) -> Option<f64> {
        let t = (x - self.grid.x0) / self.grid.dx;
        if t < -1e-9 || t > (self.grid.n - 1) as f64 + 1e-9 {
            return None;
        }
        let t = t.clamp(0.0, (self.grid.n - 1) as f64);
        let i = (t.floor() as usize).min(self.grid.n - 2);
        let w = t - i as f64;
        Some(self.values[i] * (1.0 - w) + self.values[i + 1] * w)
    }
}

/// Transform-side data: complex amplitudes on a symmetric λ grid.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub lambdas: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Set when the analyzed field did not decay at the grid ends.
    pub decay_warning: bool,
}

impl Spectrum {
    pub fn new(lambdas: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if lambdas.len() != values.len() || lambdas.is_empty() {
            return Err(Error::InvalidArgument("spectrum shape mismatch".into()));
        }
        let n = lambdas.len();
        let span = lambdas[n - 1] - lambdas[0];
        for i in 0..n {
            if (lambdas[i] + lambdas[n - 1 - i]).abs() > 1e-9 * span.max(1.0) {
                return Err(Error::InvalidArgument(
                    "spectrum lambda grid must be symmetric about 0".into(),
                ));
            }
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite spectrum value".into()));
        }
        Ok(Spectrum {
            lambdas,
            values,
            decay_warning: false,
        })
    }

    /// Symmetric λ grid covering [−max, max] with an odd point count.
    pub fn symmetric_grid(max: f64, n_half: usize) -> Vec<f64> {
        let n_half = n_half.max(1);
        let d = max / n_half as f64;
        (-(n_half as isize)..=n_half as isize)
            .map(|k| k as f64 * d)
            .collect()
    }
}

/// Relative L2 distance over the indices where `window(x)` holds.
pub fn rel_l2<F: Fn(f64) -> bool>(got: &SampledField, want: &SampledField, window: F) -> f64 {
    assert_eq!(got.grid, want.grid, "rel_l2 needs matching grids");
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, x) in got.grid.xs().enumerate() {
        if window(x) {
            num += (got.values[i] - want.values[i]).powi(2);
            den += want.values[i].powi(2);
        }
    }
    if den == 0.0 {
        return num.sqrt();
    }
    (num / den).sqrt()
}

/// Max-abs distance over the indices where `window(x)` holds.
pub fn max_abs_diff<F: Fn(f64) -> bool>(got: &SampledField, want: &SampledField, window: F) -> f64 {
    assert_eq!(got.grid, want.grid, "max_abs_diff needs matching grids");
    got.grid
        .xs()
        .enumerate()
        .filter(|(_, x)| window(*x))
        .map(|(i, _)| (got.values[i] - want.values[i]).abs())
        .fold(0.0, f64::max)
}
