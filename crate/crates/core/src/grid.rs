//! Cell-centered grids and the two field flavors built on them.
//!
//! The half-line grid places cell centers at x_i = (i + 1/2) h for
//! i = 0..N, so x = 0 is a cell *interface*: a jump at the origin is
//! represented exactly, never smeared across a cell.  An [`OddField`]
//! stores the positive half plus a prescribed one-sided trace at 0+ and
//! evaluates on the whole line by odd reflection; a [`FullField`] stores
//! the mirrored domain [-L, L] explicitly (2N cells).  Both vanish beyond
//! |x| = L = N h (zero tail policy).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    h: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Grid(format!("cell width must be positive, got {h}")));
        }
        if n < 4 {
            return Err(Error::Grid(format!("need at least 4 cells per half-line, got {n}")));
        }
        Ok(GridSpec { h, n })
    }

    /// Grid with prescribed half-line length L and cell count (L = n h).
    pub fn with_length(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::Grid(format!("half-line length must be positive, got {l}")));
        }
        GridSpec::new(l / n as f64, n)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-line length L = N h; the fields live on [-L, L].
    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }

    /// Center of half-line cell i (0-based): (i + 1/2) h.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    /// Center of full-line cell j (0-based, j in 0..2N): -L + (j + 1/2) h.
    pub fn full_center(&self, j: usize) -> f64 {
        -self.length() + (j as f64 + 0.5) * self.h
    }

    /// Same length, half the cell width.
    pub fn refined(&self) -> GridSpec {
        GridSpec { h: self.h / 2.0, n: self.n * 2 }
    }
}

/// Norm bundle for a discrete field.  All values are full-line quantities;
/// for an [`OddField`] they equal twice the half-line contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    /// Broken H1 seminorm: one-sided differences within each half-line
    /// only; the jump at 0 does not contribute.
    pub h1_broken: f64,
    /// Total variation of the piecewise-constant representative,
    /// counting the jump 2 |trace| at the origin for odd fields but not
    /// the truncation at +-L.
    pub bv: f64,
}

/// Odd field: values on the positive half-line plus the prescribed trace
/// at 0+.  The negative half is implied by f(-x) = -f(x).
#[derive(Debug, Clone, PartialEq)]
pub struct OddField {
    grid: GridSpec,
    values: Vec<f64>,
    trace_plus: f64,
}

impl OddField {
    pub fn new(grid: GridSpec, values: Vec<f64>, trace_plus: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Grid(format!(
                "odd field needs {} cell values, got {}",
                grid.n(),
                values.len()
            )));
        }
        Ok(OddField { grid, values, trace_plus })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        OddField { grid, values: vec![0.0; grid.n()], trace_plus: 0.0 }
    }

    /// Sample a function given on the positive half-line at cell centers.
    pub fn from_fn(grid: GridSpec, trace_plus: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.center(i))).collect();
        OddField { grid, values, trace_plus }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn trace_plus(&self) -> f64 {
        self.trace_plus
    }

    pub fn set_trace_plus(&mut self, t: f64) {
        self.trace_plus = t;
    }

    /// Value at a signed cell index under odd reflection and zero tail:
    /// k >= 0 addresses the positive half (cell k), k < 0 the mirror cell.
    pub fn at_signed(&self, k: isize) -> f64 {
        if k >= 0 {
            let k = k as usize;
            if k < self.values.len() {
                self.values[k]
            } else {
                0.0
            }
        } else {
            let m = (-k - 1) as usize;
            if m < self.values.len() {
                -self.values[m]
            } else {
                0.0
            }
        }
    }

    /// Point evaluation of the piecewise-constant representative,
    /// honoring odd reflection and the zero tail.  One ghost cell beyond
    /// L is tolerated (and reads 0); beyond that the argument is out of
    /// domain.
    pub fn reflect_eval(&self, x: f64) -> Result<f64> {
        let l = self.grid.length();
        let h = self.grid.h();
        let ax = x.abs();
        if ax > l + h {
            return Err(Error::Domain(format!(
                "reflect_eval at x = {x} outside [-{}, {}]",
                l + h,
                l + h
            )));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let v = if ax > l {
            0.0
        } else {
            let i = ((ax / h).floor() as usize).min(self.grid.n() - 1);
            self.values[i]
        };
        Ok(if x > 0.0 { v } else { -v })
    }

    /// Window average (1/w) int_0^w f dx by midpoint sums over whole
    /// cells; w is truncated down to the nearest multiple of h and must
    /// cover at least one cell.
    pub fn trace_avg(&self, w: f64) -> Result<f64> {
        let h = self.grid.h();
        let m = ((w / h) * (1.0 + 1e-12)).floor() as usize;
        if m < 1 {
            return Err(Error::Domain(format!(
                "trace window w = {w} is below one cell width h = {h}"
            )));
        }
        let m = m.min(self.grid.n());
        Ok(self.values[..m].iter().sum::<f64>() / m as f64)
    }

    pub fn norms(&self) -> Norms {
        let h = self.grid.h();
        let l1 = 2.0 * self.values.iter().map(|v| v.abs()).sum::<f64>() * h;
        let l2 = (2.0 * self.values.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
        let grad_sq: f64 = self
            .values
            .windows(2)
            .map(|p| {
                let d = (p[1] - p[0]) / h;
                d * d * h
            })
            .sum();
        let h1_broken = (2.0 * grad_sq).sqrt();
        let jump_sum: f64 = self.values.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
        let bv = 2.0 * jump_sum + 2.0 * self.trace_plus.abs();
        Norms { l1, l2, h1_broken, bv }
    }

    /// Explicit mirror onto the full line: 2N cells, odd values, same grid.
    pub fn mirror(&self) -> FullField {
        let n = self.grid.n();
        let mut values = vec![0.0; 2 * n];
        for i in 0..n {
            values[n + i] = self.values[i];
            values[n - 1 - i] = -self.values[i];
        }
        FullField { grid: self.grid, values }
    }

    /// Linear combination a*self + b*other (same grid; traces combine the
    /// same way).
    pub fn lin_comb(&self, a: f64, other: &OddField, b: f64) -> Result<OddField> {
        if self.grid != other.grid {
            return Err(Error::Grid("lin_comb on mismatched grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(OddField {
            grid: self.grid,
            values,
            trace_plus: a * self.trace_plus + b * other.trace_plus,
        })
    }
}

/// Field on the mirrored domain [-L, L]: 2N cells, no symmetry assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct FullField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl FullField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != 2 * grid.n() {
            return Err(Error::Grid(format!(
                "full field needs {} cell values, got {}",
                2 * grid.n(),
                values.len()
            )));
        }
        Ok(FullField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        FullField { grid, values: vec![0.0; 2 * grid.n()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..2 * grid.n()).map(|j| f(grid.full_center(j))).collect();
        FullField { grid, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn norms(&self) -> Norms {
        let h = self.grid.h();
        let n = self.grid.n();
        let l1 = self.values.iter().map(|v| v.abs()).sum::<f64>() * h;
        let l2 = (self.values.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
        // Broken gradient: skip the pair straddling the origin interface.
        let mut grad_sq = 0.0;
        for j in 0..2 * n - 1 {
            if j + 1 == n {
                continue;
            }
            let d = (self.values[j + 1] - self.values[j]) / h;
            grad_sq += d * d * h;
        }
        let bv = self.values.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
        Norms { l1, l2, h1_broken: grad_sq.sqrt(), bv }
    }

    pub fn l1_distance(&self, other: &FullField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Grid("l1_distance on mismatched grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.h())
    }

    /// l1 distance restricted to cells with |x| <= window.
    pub fn l1_distance_window(&self, other: &FullField, window: f64) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Grid("l1_distance_window on mismatched grids".into()));
        }
        let mut acc = 0.0;
        for j in 0..self.values.len() {
            if self.grid.full_center(j).abs() <= window {
                acc += (self.values[j] - other.values[j]).abs();
            }
        }
        Ok(acc * self.grid.h())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
