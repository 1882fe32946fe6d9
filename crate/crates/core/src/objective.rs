//! Objective functions with analytic gradients.
//!
//! The main benchmark is the negative mixture of isotropic two-dimensional
//! Gaussian densities
//!
//! ```text
//! U(x) = -Σ_i w_i / (2πκ) · exp(-‖x - ξ_i‖² / (2κ))  [+ λ‖x‖²]
//! ```
//!
//! whose wells sit at the centers `ξ_i` with depth proportional to `w_i`. The
//! optional confinement term `λ‖x‖²` is off by default; without it the mixture
//! is not dissipative (`U → 0` at infinity).

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// A scalar field on `R^d` with an analytic gradient.
///
/// Implementations are immutable after construction and are evaluated from
/// many threads at once.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dimension(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes `∇U(x)` into `grad` (same length as `x`).
    fn gradient(&self, x: &[f64], grad: &mut [f64]);

    /// Whether `⟨x, ∇U(x)⟩ ≥ α‖x‖² − β` holds for some `α > 0`, if known.
    fn is_dissipative(&self) -> Option<bool> {
        None
    }
}

/// Components of a Gaussian-mixture objective.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureSpec {
    pub centers: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Shared isotropic variance.
    pub kappa: f64,
    /// Coefficient of the optional `λ‖x‖²` confinement term.
    pub confinement: f64,
}

impl GaussianMixtureSpec {
    /// The 5×5 benchmark layout: centers `(0,0), (0,1), …, (4,4)` in that
    /// order with ascending weights `i / 325`, so `(4,4)` is the deepest well.
    pub fn benchmark(kappa: f64) -> Self {
        let centers = benchmark_centers();
        let weights = benchmark_weights();
        Self {
            centers,
            weights,
            kappa,
            confinement: 0.0,
        }
    }
}

pub fn benchmark_centers() -> Vec<[f64; 2]> {
    (0..5)
        .flat_map(|a| (0..5).map(move |b| [a as f64, b as f64]))
        .collect()
}

pub fn benchmark_weights() -> Vec<f64> {
    (1..=25).map(|i| i as f64 / 325.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    centers: Vec<[f64; 2]>,
    /// `w_i / (2πκ)`, precomputed.
    amplitudes: Vec<f64>,
    weights: Vec<f64>,
    kappa: f64,
    confinement: f64,
}

pub fn build_gaussian_mixture(spec: &GaussianMixtureSpec) -> Result<GaussianMixture> {
    if spec.centers.is_empty() {
        return Err(Error::Input("mixture needs at least one center".into()));
    }
    if spec.centers.len() != spec.weights.len() {
        return Err(Error::Input(format!(
            "{} centers but {} weights",
            spec.centers.len(),
            spec.weights.len()
        )));
    }
    if !(spec.kappa > 0.0 && spec.kappa.is_finite()) {
        return Err(Error::Input(format!(
            "kappa must be positive, got {}",
            spec.kappa
        )));
    }
    if spec.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::Input(
            "mixture weights must be finite and nonnegative".into(),
        ));
    }
    if !spec.weights.iter().any(|w| *w > 0.0) {
        return Err(Error::Input(
            "at least one mixture weight must be positive".into(),
        ));
    }
    if spec.centers.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Input("mixture centers must be finite".into()));
    }
    if !(spec.confinement >= 0.0 && spec.confinement.is_finite()) {
        return Err(Error::Input(format!(
            "confinement must be finite and nonnegative, got {}",
            spec.confinement
        )));
    }
    let norm = 1.0 / (2.0 * PI * spec.kappa);
    Ok(GaussianMixture {
        centers: spec.centers.clone(),
        amplitudes: spec.weights.iter().map(|w| w * norm).collect(),
        weights: spec.weights.clone(),
        kappa: spec.kappa,
        confinement: spec.confinement,
    })
}

/// The 25-well benchmark at variance `kappa`.
pub fn benchmark_mixture(kappa: f64) -> Result<GaussianMixture> {
    build_gaussian_mixture(&GaussianMixtureSpec::benchmark(kappa))
}

impl GaussianMixture {
    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn confinement(&self) -> f64 {
        self.confinement
    }
}

impl Objective for GaussianMixture {
    fn dimension(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        let inv = 1.0 / (2.0 * self.kappa);
        let mut u = 0.0;
        for (c, amp) in self.centers.iter().zip(&self.amplitudes) {
            let dx = x[0] - c[0];
            let dy = x[1] - c[1];
            u -= amp * (-(dx * dx + dy * dy) * inv).exp();
        }
        if self.confinement > 0.0 {
            u += self.confinement * (x[0] * x[0] + x[1] * x[1]);
        }
        u
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let inv = 1.0 / (2.0 * self.kappa);
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (c, amp) in self.centers.iter().zip(&self.amplitudes) {
            let dx = x[0] - c[0];
            let dy = x[1] - c[1];
            let e = amp * (-(dx * dx + dy * dy) * inv).exp() / self.kappa;
            gx += e * dx;
            gy += e * dy;
        }
        grad[0] = gx + 2.0 * self.confinement * x[0];
        grad[1] = gy + 2.0 * self.confinement * x[1];
    }

    fn is_dissipative(&self) -> Option<bool> {
        Some(self.confinement > 0.0)
    }
}

/// One-dimensional double well `(x² − 1)²` with minima at `±1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleWell;

impl Objective for DoubleWell {
    fn dimension(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        let s = x[0] * x[0] - 1.0;
        s * s
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
    }

    fn is_dissipative(&self) -> Option<bool> {
        Some(true)
    }
}

/// `U(x) = curvature / 2 · ‖x‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    pub dimension: usize,
    pub curvature: f64,
}

impl Quadratic {
    pub fn new(dimension: usize, curvature: f64) -> Self {
        Self {
            dimension,
            curvature,
        }
    }
}

impl Objective for Quadratic {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.curvature * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for (g, v) in grad.iter_mut().zip(x) {
            *g = self.curvature * v;
        }
    }

    fn is_dissipative(&self) -> Option<bool> {
        Some(self.curvature > 0.0)
    }
}

/// Constant objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flat {
    pub dimension: usize,
    pub level: f64,
}

impl Objective for Flat {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, _x: &[f64]) -> f64 {
        self.level
    }

    fn gradient(&self, _x: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Objective assembled from closures.
pub struct FnObjective {
    dimension: usize,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
}

impl FnObjective {
    pub fn new(
        dimension: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            dimension,
            value: Box::new(value),
            gradient: Box::new(gradient),
        }
    }
}

impl fmt::Debug for FnObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjective")
            .field("dimension", &self.dimension)
            .finish_non_exhaustive()
    }
}

impl Objective for FnObjective {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (self.gradient)(x, grad)
    }
}

/// Buildable description of an objective, as read from configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Mixture(GaussianMixtureSpec),
    DoubleWell,
    Quadratic { dimension: usize, curvature: f64 },
}

impl ObjectiveSpec {
    pub fn build(&self) -> Result<Box<dyn Objective>> {
        match self {
            ObjectiveSpec::Mixture(spec) => Ok(Box::new(build_gaussian_mixture(spec)?)),
            ObjectiveSpec::DoubleWell => Ok(Box::new(DoubleWell)),
            ObjectiveSpec::Quadratic {
                dimension,
                curvature,
            } => {
                if *dimension == 0 {
                    return Err(Error::Input("quadratic dimension must be positive".into()));
                }
                Ok(Box::new(Quadratic::new(*dimension, *curvature)))
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ObjectiveSpec::Mixture(_) => 2,
            ObjectiveSpec::DoubleWell => 1,
            ObjectiveSpec::Quadratic { dimension, .. } => *dimension,
        }
    }
}

/// Largest coordinatewise `|analytic − central difference| / (1 + |analytic|)`.
pub fn check_gradient(f: &dyn Objective, point: &[f64], step: f64) -> f64 {
    let d = point.len();
    let mut analytic = vec![0.0; d];
    f.gradient(point, &mut analytic);
    let mut probe = point.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        probe[i] = point[i] + step;
        let up = f.value(&probe);
        probe[i] = point[i] - step;
        let down = f.value(&probe);
        probe[i] = point[i];
        let numeric = (up - down) / (2.0 * step);
        worst = worst.max((analytic[i] - numeric).abs() / (1.0 + analytic[i].abs()));
    }
    worst
}
