use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling of `[t0, t0 + (n - 1) dt]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "step must be positive, got {dt}"
            )));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "start time must be finite, got {t0}"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        Ok(Self { t0, dt, n })
    }

    /// Grid covering `[t0, t_end]`; the sample count is rounded to the
    /// nearest whole number of steps.
    pub fn spanning(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end > t0) {
            return Err(Error::InvalidGrid(format!(
                "end {t_end} must exceed start {t0}"
            )));
        }
        let steps = ((t_end - t0) / dt).round();
        Self::new(t0, dt, steps as usize + 1)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Time of sample `k`, computed as `t0 + k dt` (no accumulated drift).
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.time(k))
    }

    /// Index of the sample nearest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let u = ((t - self.t0) / self.dt).round();
        if u <= 0.0 {
            0
        } else {
            (u as usize).min(self.n - 1)
        }
    }

    /// Same grid with half the step over the same span.
    pub fn refined(&self) -> Self {
        Self {
            t0: self.t0,
            dt: 0.5 * self.dt,
            n: 2 * self.n - 1,
        }
    }
}

/// Values of a scalar signal on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "trajectory has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for values produced by finite arithmetic on
    /// already validated trajectories.
    pub(crate) fn from_parts(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Max-abs difference to another trajectory on the same grid, restricted
    /// to samples with `t >= from`.
    pub fn max_abs_diff_from(&self, other: &Trajectory, from: f64) -> f64 {
        self.grid
            .times()
            .zip(self.values.iter().zip(&other.values))
            .filter(|(t, _)| *t >= from)
            .fold(0.0, |acc, (_, (a, b))| acc.max((a - b).abs()))
    }

    /// Linear interpolation; times outside the grid clamp to the end values.
    pub fn value_at_linear(&self, t: f64) -> f64 {
        let u = (t - self.grid.t0) / self.grid.dt;
        if u <= 0.0 {
            return self.values[0];
        }
        let last = self.values.len() - 1;
        if u >= last as f64 {
            return self.values[last];
        }
        let k = u.floor() as usize;
        let frac = u - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    /// Cubic (four-point Lagrange) interpolation, exact at the samples.
    ///
    /// RK4 stages sit at half steps; cubic interpolation keeps the stage
    /// inputs fourth-order accurate. Near the ends the stencil shifts inward.
    pub fn value_at(&self, t: f64) -> f64 {
        let u = (t - self.grid.t0) / self.grid.dt;
        let last = self.values.len() - 1;
        if u <= 0.0 {
            return self.values[0];
        }
        if u >= last as f64 {
            return self.values[last];
        }
        let k = u.floor() as usize;
        let frac = u - k as f64;
        if frac < 1e-9 {
            return self.values[k];
        }
        if frac > 1.0 - 1e-9 {
            return self.values[k + 1];
        }
        if last < 3 {
            return self.values[k] + frac * (self.values[k + 1] - self.values[k]);
        }
        let start = k.saturating_sub(1).min(last - 3);
        let x = u - start as f64;
        let v = &self.values[start..start + 4];
        let l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        let l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        let l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        let l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3]
    }
}
