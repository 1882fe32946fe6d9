use std::io::Write;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::objective::Objective;

/// Closed interval `[lower, upper]`, one axis of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_finite() && upper.is_finite() && lower < upper {
            Ok(Self { lower, upper })
        } else {
            Err(Error::Input(format!("invalid interval [{lower}, {upper}]")))
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Probability mass on a uniform rectangular grid (one or two axes, the same
/// number of cells per axis). Cells are stored row-major with the first axis
/// varying slowest. Mass that fell outside the box is kept in `overflow`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    axes: Vec<Interval>,
    resolution: usize,
    mass: Vec<f64>,
    overflow: f64,
}

pub(crate) type Point = SmallVec<[f64; 2]>;

impl GridMeasure {
    /// All-zero grid.
    pub fn zeros(axes: Vec<Interval>, resolution: usize) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Input(format!(
                "grids support one or two axes, got {}",
                axes.len()
            )));
        }
        if resolution == 0 {
            return Err(Error::Input("grid resolution must be positive".into()));
        }
        let cells = resolution
            .checked_pow(axes.len() as u32)
            .ok_or_else(|| Error::Input("grid too large".into()))?;
        Ok(Self {
            axes,
            resolution,
            mass: vec![0.0; cells],
            overflow: 0.0,
        })
    }

    /// Grid with the given cell masses (not renormalized).
    pub fn from_masses(axes: Vec<Interval>, resolution: usize, mass: Vec<f64>) -> Result<Self> {
        let mut g = Self::zeros(axes, resolution)?;
        if mass.len() != g.mass.len() {
            return Err(Error::Input(format!(
                "expected {} cell masses, got {}",
                g.mass.len(),
                mass.len()
            )));
        }
        if mass.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::Input(
                "cell masses must be finite and nonnegative".into(),
            ));
        }
        g.mass = mass;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Interval] {
        &self.axes
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cells(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn overflow(&self) -> f64 {
        self.overflow
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        self.axes[axis].width() / self.resolution as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.cell_width(a)).product()
    }

    /// Per-axis cell indices of a flat index.
    pub fn unravel(&self, index: usize) -> SmallVec<[usize; 2]> {
        match self.dim() {
            1 => SmallVec::from_slice(&[index]),
            _ => SmallVec::from_slice(&[index / self.resolution, index % self.resolution]),
        }
    }

    pub fn axis_center(&self, axis: usize, i: usize) -> f64 {
        self.axes[axis].lower + (i as f64 + 0.5) * self.cell_width(axis)
    }

    pub fn cell_center(&self, index: usize) -> Point {
        self.unravel(index)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.axis_center(axis, i))
            .collect()
    }

    /// Flat index of the cell containing `point`, or `None` outside the box.
    /// The upper boundary belongs to the last cell.
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim() {
            return None;
        }
        let mut index = 0;
        for (axis, (&x, iv)) in point.iter().zip(&self.axes).enumerate() {
            if !(x >= iv.lower && x <= iv.upper) {
                return None;
            }
            let i = (((x - iv.lower) / self.cell_width(axis)) as usize).min(self.resolution - 1);
            index = index * self.resolution + i;
        }
        Some(index)
    }

    pub fn is_boundary(&self, index: usize) -> bool {
        self.unravel(index)
            .iter()
            .any(|&i| i == 0 || i + 1 == self.resolution)
    }

    /// Same axes and resolution.
    pub fn same_grid(&self, other: &GridMeasure) -> bool {
        self.axes == other.axes && self.resolution == other.resolution
    }

    pub(crate) fn ensure_same_grid(&self, other: &GridMeasure) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{} axes × {} cells vs {} axes × {} cells",
                self.dim(),
                self.resolution,
                other.dim(),
                other.resolution
            )))
        }
    }

    /// Marginal on one axis of a two-axis grid.
    pub fn marginal(&self, axis: usize) -> Result<GridMeasure> {
        if self.dim() != 2 || axis > 1 {
            return Err(Error::Input("marginal needs a two-axis grid".into()));
        }
        let r = self.resolution;
        let mut out = GridMeasure::zeros(vec![self.axes[axis]], r)?;
        for (index, m) in self.mass.iter().enumerate() {
            let ij = self.unravel(index);
            out.mass[ij[axis]] += m;
        }
        out.overflow = self.overflow;
        Ok(out)
    }

    /// Writes `x[,y],mass` rows in storage order with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match self.dim() {
            1 => writeln!(w, "x,mass")?,
            _ => writeln!(w, "x,y,mass")?,
        }
        for (index, m) in self.mass.iter().enumerate() {
            for c in self.cell_center(index) {
                write!(w, "{c:.16e},")?;
            }
            writeln!(w, "{m:.16e}")?;
        }
        Ok(())
    }

    fn normalize_log_weights(&mut self, log_weights: Vec<f64>) -> Result<()> {
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Input(
                "Gibbs weights are not finite on the grid".into(),
            ));
        }
        let weights: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        self.mass = weights.into_iter().map(|w| w / total).collect();
        Ok(())
    }

    fn check_truncation(&self) -> Result<()> {
        let worst = (0..self.cells())
            .filter(|&i| self.is_boundary(i))
            .map(|i| self.mass[i])
            .fold(0.0, f64::max);
        if worst > TRUNCATION_LIMIT {
            Err(Error::Truncation {
                mass: worst,
                limit: TRUNCATION_LIMIT,
            })
        } else {
            Ok(())
        }
    }
}

/// Largest mass any boundary cell may carry in a Gibbs grid.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "temperature must be positive, got {tau}"
        )))
    }
}

/// Gibbs density `∝ exp(−U/τ)` by midpoint quadrature on the grid, with
/// boundary cells required to be negligible (see [`TRUNCATION_LIMIT`]).
pub fn gibbs_density(
    f: &dyn Objective,
    tau: f64,
    axes: &[Interval],
    resolution: usize,
) -> Result<GridMeasure> {
    let g = truncated_gibbs_density(f, tau, axes, resolution)?;
    g.check_truncation()?;
    Ok(g)
}

/// Gibbs density restricted to the box, without the boundary check. Use for
/// measures that are meant to be truncated (e.g. a flat objective).
pub fn truncated_gibbs_density(
    f: &dyn Objective,
    tau: f64,
    axes: &[Interval],
    resolution: usize,
) -> Result<GridMeasure> {
    check_tau(tau)?;
    if f.dimension() != axes.len() {
        return Err(Error::Input(format!(
            "objective has dimension {} but the grid has {} axes",
            f.dimension(),
            axes.len()
        )));
    }
    let mut g = GridMeasure::zeros(axes.to_vec(), resolution)?;
    let log_weights = (0..g.cells())
        .map(|i| -f.value(&g.cell_center(i)) / tau)
        .collect();
    g.normalize_log_weights(log_weights)?;
    Ok(g)
}

/// Product Gibbs density `∝ exp(−U(x₁)/τ₁ − U(x₂)/τ₂)` of a pair of
/// one-dimensional particles on the square grid `axis × axis`.
pub fn pair_gibbs_density(
    f: &dyn Objective,
    tau1: f64,
    tau2: f64,
    axis: Interval,
    resolution: usize,
) -> Result<GridMeasure> {
    check_tau(tau1)?;
    check_tau(tau2)?;
    if f.dimension() != 1 {
        return Err(Error::Input(
            "pair densities are only supported for one-dimensional objectives".into(),
        ));
    }
    let mut g = GridMeasure::zeros(vec![axis, axis], resolution)?;
    let log_weights = (0..g.cells())
        .map(|i| {
            let c = g.cell_center(i);
            -f.value(&c[..1]) / tau1 - f.value(&c[1..]) / tau2
        })
        .collect();
    g.normalize_log_weights(log_weights)?;
    g.check_truncation()?;
    Ok(g)
}

/// Occupancy histogram of `positions`. Each cell holds its count divided by
/// the total number of points; points outside the box go to `overflow`.
pub fn empirical_histogram<P: AsRef<[f64]>>(
    positions: &[P],
    axes: &[Interval],
    resolution: usize,
) -> Result<GridMeasure> {
    if positions.is_empty() {
        return Err(Error::EmptyInput("no positions to histogram"));
    }
    let mut g = GridMeasure::zeros(axes.to_vec(), resolution)?;
    let weight = 1.0 / positions.len() as f64;
    let mut outside = 0usize;
    let mut counts = vec![0usize; g.cells()];
    for p in positions {
        let p = p.as_ref();
        if p.len() != g.dim() {
            return Err(Error::Input(format!(
                "point of dimension {} on a {}-axis grid",
                p.len(),
                g.dim()
            )));
        }
        match g.locate(p) {
            Some(i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    g.mass = counts.into_iter().map(|c| c as f64 * weight).collect();
    g.overflow = outside as f64 * weight;
    Ok(g)
}
