//! Discrete Fréchet calculus on a rectangular mesh of `[-M, M]²`: rectangle
//! increments of a kernel `u`, its Fréchet variation, and the bilinear
//! integral `∫∫ f(x) g(y) du(x, y)`.

use std::io::BufRead;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statistics::TestFunction;

/// Largest `grid_x` length accepted by the exact variation (`2^{m}` sign
/// patterns over the `m = len - 1` rows).
pub const MAX_EXACT_GRID: usize = 21;

/// Samples `u(s_i, t_j)` of a kernel on a tensor grid of `[-M, M]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrechetMesh {
    grid_x: Vec<f64>,
    grid_y: Vec<f64>,
    /// `values[i][j] = u(grid_x[i], grid_y[j])`
    values: Vec<Vec<f64>>,
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.len() < 2 {
        return Err(Error::InvalidInput(format!("{name} needs at least two points")));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has a non-finite point")));
    }
    if let Some(i) = g.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(format!(
            "{name} is not strictly ascending at index {}",
            i + 1
        )));
    }
    Ok(())
}

impl FrechetMesh {
    pub fn new(grid_x: Vec<f64>, grid_y: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_grid("grid_x", &grid_x)?;
        check_grid("grid_y", &grid_y)?;
        let m = grid_x[grid_x.len() - 1];
        if grid_x[0] != -m || grid_y[0] != -m || grid_y[grid_y.len() - 1] != m {
            return Err(Error::InvalidInput(format!(
                "grids must both span [-M, M]; got [{}, {}] and [{}, {}]",
                grid_x[0],
                m,
                grid_y[0],
                grid_y[grid_y.len() - 1]
            )));
        }
        if values.len() != grid_x.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} value rows, got {}",
                grid_x.len(),
                values.len()
            )));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != grid_y.len() {
                return Err(Error::InvalidInput(format!(
                    "value row {i} has {} entries, expected {}",
                    row.len(),
                    grid_y.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("value row {i} has a non-finite entry")));
            }
        }
        Ok(Self { grid_x, grid_y, values })
    }

    pub fn from_fn(grid_x: Vec<f64>, grid_y: Vec<f64>, u: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = grid_x.iter().map(|&s| grid_y.iter().map(|&t| u(s, t)).collect()).collect();
        Self::new(grid_x, grid_y, values)
    }

    /// Uniform grid with `cells_x × cells_y` cells.
    pub fn uniform(m: f64, cells_x: usize, cells_y: usize, u: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if m.is_nan() || m <= 0.0 || cells_x == 0 || cells_y == 0 {
            return Err(Error::InvalidInput("uniform mesh needs M > 0 and at least one cell".into()));
        }
        Self::from_fn(uniform_grid(m, cells_x), uniform_grid(m, cells_y), u)
    }

    /// Read the CSV layout: `grid_x` row, `grid_y` row, then one row of
    /// `u(s_i, ·)` per `grid_x` point. Blank lines and `#` comments are skipped.
    pub fn from_csv(reader: impl BufRead) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidInput(format!("reading mesh: {e}")))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidInput(format!("mesh line {}: {e}", lineno + 1)))?;
            rows.push(row);
        }
        if rows.len() < 2 {
            return Err(Error::InvalidInput("mesh CSV needs grid_x and grid_y rows".into()));
        }
        let values = rows.split_off(2);
        let grid_y = rows.pop().unwrap_or_default();
        let grid_x = rows.pop().unwrap_or_default();
        Self::new(grid_x, grid_y, values)
    }

    pub fn to_csv(&self) -> String {
        let line = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut out = format!("{}\n{}\n", line(&self.grid_x), line(&self.grid_y));
        for row in &self.values {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn grid_x(&self) -> &[f64] {
        &self.grid_x
    }

    pub fn grid_y(&self) -> &[f64] {
        &self.grid_y
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn half_width(&self) -> f64 {
        self.grid_x[self.grid_x.len() - 1]
    }

    /// Cell count `(rows, columns)`.
    pub fn cells(&self) -> (usize, usize) {
        (self.grid_x.len() - 1, self.grid_y.len() - 1)
    }

    pub fn midpoints_x(&self) -> Vec<f64> {
        midpoints(&self.grid_x)
    }

    pub fn midpoints_y(&self) -> Vec<f64> {
        midpoints(&self.grid_y)
    }

    /// Halve every cell, resampling `u` at the new points.
    pub fn refined(&self, u: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::from_fn(bisect(&self.grid_x), bisect(&self.grid_y), u)
    }
}

pub(crate) fn uniform_grid(m: f64, cells: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=cells).map(|i| -m + 2.0 * m * i as f64 / cells as f64).collect();
    g[0] = -m;
    g[cells] = m;
    g
}

fn midpoints(g: &[f64]) -> Vec<f64> {
    g.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

fn bisect(g: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * g.len() - 1);
    for w in g.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(g[g.len() - 1]);
    out
}

/// `a_ij = Δu(s_{i-1}, s_i; t_{j-1}, t_j)` for every cell.
pub fn rectangle_increments(mesh: &FrechetMesh) -> Vec<Vec<f64>> {
    let u = &mesh.values;
    u.windows(2)
        .map(|r| {
            (1..r[0].len())
                .map(|j| (r[1][j] - r[0][j]) - (r[1][j - 1] - r[0][j - 1]))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationMode {
    /// `max_{σ,θ} Σ σ_i θ_j a_ij` by enumerating row signs.
    Exact,
    /// `Σ |a_ij|`
    UpperBound,
}

/// Fréchet variation of the mesh increments.
pub fn frechet_variation(mesh: &FrechetMesh, mode: VariationMode) -> Result<f64> {
    variation_of_increments(&rectangle_increments(mesh), mode)
}

/// Fréchet variation of an increment matrix `a_ij`.
pub fn variation_of_increments(a: &[Vec<f64>], mode: VariationMode) -> Result<f64> {
    match mode {
        VariationMode::UpperBound => Ok(a.iter().flatten().map(|x| x.abs()).sum()),
        VariationMode::Exact => {
            if a.len() + 1 > MAX_EXACT_GRID {
                return Err(Error::Capacity {
                    what: "grid_x length for exact Fréchet variation",
                    value: a.len() + 1,
                    limit: MAX_EXACT_GRID,
                });
            }
            if a.is_empty() || a[0].is_empty() {
                return Ok(0.0);
            }
            Ok(exact_variation(a))
        }
    }
}

/// For fixed row signs the best column signs give `Σ_j |Σ_i σ_i a_ij|`.
/// Signs are visited in Gray-code order so each step updates one row; the
/// first row's sign is fixed since `σ` and `-σ` score the same.
fn exact_variation(a: &[Vec<f64>]) -> f64 {
    let m = a.len();
    let n = a[0].len();
    let mut col: Vec<f64> = (0..n).map(|j| a.iter().map(|r| r[j]).sum()).collect();
    let mut sign = vec![1.0; m];
    let score = |col: &[f64]| col.iter().map(|x| x.abs()).sum::<f64>();
    let mut best = score(&col);
    for k in 1u64..(1u64 << (m - 1)) {
        let row = 1 + k.trailing_zeros() as usize;
        let s = sign[row];
        for (c, x) in col.iter_mut().zip(&a[row]) {
            *c -= 2.0 * s * x;
        }
        sign[row] = -s;
        best = best.max(score(&col));
    }
    best
}

/// `Σ_ij f(ξ_i) g(η_j) a_ij` with midpoint tags.
pub fn frechet_integral(
    f: impl Fn(f64) -> Complex64 + Sync,
    g: impl Fn(f64) -> Complex64 + Sync,
    mesh: &FrechetMesh,
) -> Complex64 {
    let a = rectangle_increments(mesh);
    let fx: Vec<Complex64> = mesh.midpoints_x().into_iter().map(&f).collect();
    let gy: Vec<Complex64> = mesh.midpoints_y().into_iter().map(&g).collect();
    let rows: Vec<Complex64> = a
        .par_iter()
        .zip(fx.par_iter())
        .map(|(row, &fi)| {
            if fi == Complex64::new(0.0, 0.0) {
                return fi;
            }
            fi * row.iter().zip(&gy).map(|(&x, &gj)| gj * x).sum::<Complex64>()
        })
        .collect();
    rows.into_iter().sum()
}

/// `∫∫ f'(x) g'(y) du(x, y)`
pub fn rho_from_kernel(f: &TestFunction, g: &TestFunction, mesh: &FrechetMesh) -> Complex64 {
    frechet_integral(|x| f.eval_derivative(x), |y| g.eval_derivative(y), mesh)
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub cells_x: usize,
    pub cells_y: usize,
    pub value: Complex64,
    /// Change from the previous level.
    pub diff: Option<f64>,
}

/// [`frechet_integral`] on `mesh` and on `levels` dyadic refinements of it,
/// resampling the kernel `u` each time.
pub fn frechet_integral_refined(
    f: impl Fn(f64) -> Complex64 + Sync,
    g: impl Fn(f64) -> Complex64 + Sync,
    u: impl Fn(f64, f64) -> f64,
    mesh: &FrechetMesh,
    levels: usize,
) -> Result<Vec<RefinementRow>> {
    let mut out: Vec<RefinementRow> = Vec::with_capacity(levels + 1);
    let mut current = mesh.clone();
    for level in 0..=levels {
        if level > 0 {
            current = current.refined(&u)?;
        }
        let value = frechet_integral(&f, &g, &current);
        let (cells_x, cells_y) = current.cells();
        out.push(RefinementRow {
            cells_x,
            cells_y,
            value,
            diff: out.last().map(|p| (value - p.value).norm()),
        });
    }
    Ok(out)
}
