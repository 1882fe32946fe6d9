use super::grid::GridMeasure;
use crate::error::Result;

/// Floor applied to reference cell masses before division.
pub const CHI2_FLOOR: f64 = 1e-12;

/// `Σ (μ_c/π_c − 1)²·π_c` over the cells of two identical grids, with `π_c`
/// floored at [`CHI2_FLOOR`]. Empty cells of `mu` contribute `π_c`.
pub fn chi_square_divergence(mu: &GridMeasure, pi: &GridMeasure) -> Result<f64> {
    mu.ensure_same_grid(pi)?;
    Ok(mu
        .mass()
        .iter()
        .zip(pi.mass())
        .map(|(&m, &p)| {
            let p = p.max(CHI2_FLOOR);
            let r = m / p - 1.0;
            r * r * p
        })
        .sum())
}

/// Total variation distance `½(Σ|μ_c − π_c| + |overflow_μ − overflow_π|)`.
pub fn total_variation(mu: &GridMeasure, pi: &GridMeasure) -> Result<f64> {
    mu.ensure_same_grid(pi)?;
    let cells: f64 = mu
        .mass()
        .iter()
        .zip(pi.mass())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * (cells + (mu.overflow() - pi.overflow()).abs()))
}
