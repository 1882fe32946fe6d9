use super::grid::GridMeasure;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::replica::swap_rate;

/// Quadrature of `∫ a/2 · s(x₁,x₂) · (g(x₂,x₁) − g(x₁,x₂))² dπ` over a square
/// pair grid, where `s` is the swap rate and `π` the cell masses of
/// `pair_pi`. This is the extra Dirichlet-form contribution of swapping for
/// the test function `g`.
pub fn dirichlet_acceleration_term(
    test_fn: impl Fn(f64, f64) -> f64,
    f: &dyn Objective,
    tau1: f64,
    tau2: f64,
    intensity: f64,
    pair_pi: &GridMeasure,
) -> Result<f64> {
    if pair_pi.dim() != 2 || pair_pi.axes()[0] != pair_pi.axes()[1] {
        return Err(Error::GridMismatch(
            "the acceleration term needs a square two-axis grid".into(),
        ));
    }
    if f.dimension() != 1 {
        return Err(Error::Input(
            "the acceleration term needs a one-dimensional objective".into(),
        ));
    }
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::Input(format!(
            "swap intensity must be nonnegative, got {intensity}"
        )));
    }
    let r = pair_pi.resolution();
    let centers: Vec<f64> = (0..r).map(|i| pair_pi.axis_center(0, i)).collect();
    let energies: Vec<f64> = centers.iter().map(|&x| f.value(&[x])).collect();
    let mut total = 0.0;
    for i in 0..r {
        for j in 0..r {
            let m = pair_pi.mass()[i * r + j];
            if m == 0.0 {
                continue;
            }
            let jump = test_fn(centers[j], centers[i]) - test_fn(centers[i], centers[j]);
            if jump == 0.0 {
                continue;
            }
            let s = swap_rate(energies[i], energies[j], tau1, tau2)?;
            total += s * jump * jump * m;
        }
    }
    Ok(0.5 * intensity * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{pair_gibbs_density, Interval};
    use crate::objective::DoubleWell;

    fn grid() -> GridMeasure {
        pair_gibbs_density(&DoubleWell, 0.1, 1.0, Interval::new(-3.0, 3.0).unwrap(), 60).unwrap()
    }

    #[test]
    fn symmetric_test_function_gives_zero() {
        let g = grid();
        let v = dirichlet_acceleration_term(
            |a, b| a * b + (a + b).cos(),
            &DoubleWell,
            0.1,
            1.0,
            1.0,
            &g,
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn zero_intensity_gives_zero() {
        let g = grid();
        let v = dirichlet_acceleration_term(|a, _| a, &DoubleWell, 0.1, 1.0, 0.0, &g).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn linear_in_intensity_and_positive() {
        let g = grid();
        let one = dirichlet_acceleration_term(|a, _| a, &DoubleWell, 0.1, 1.0, 1.0, &g).unwrap();
        let three = dirichlet_acceleration_term(|a, _| a, &DoubleWell, 0.1, 1.0, 3.0, &g).unwrap();
        assert!(one > 0.0);
        assert!((three - 3.0 * one).abs() <= 1e-12 * three);
    }

    #[test]
    fn rejects_non_square_grid() {
        let g = crate::diagnostics::GridMeasure::zeros(
            vec![
                Interval::new(0.0, 1.0).unwrap(),
                Interval::new(0.0, 2.0).unwrap(),
            ],
            4,
        )
        .unwrap();
        assert!(matches!(
            dirichlet_acceleration_term(|a, _| a, &DoubleWell, 0.1, 1.0, 1.0, &g),
            Err(Error::GridMismatch(_))
        ));
    }
}
