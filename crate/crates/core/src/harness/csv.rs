use std::io::Write;

use super::compare::RunSummary;
use super::discretization::DiscretizationResult;
use crate::diagnostics::DecayFit;
use crate::error::Result;

fn header<W: Write>(w: &mut W, config: &str, columns: &str) -> Result<()> {
    writeln!(w, "# config: {config}")?;
    writeln!(w, "{columns}")?;
    Ok(())
}

/// `iteration,algorithm,seed,best_so_far`, one row per stored iteration of
/// every replicate. `seed` is the replicate index.
pub fn write_bestsofar_csv<W: Write>(
    mut w: W,
    config: &str,
    summaries: &[RunSummary],
) -> Result<()> {
    header(&mut w, config, "iteration,algorithm,seed,best_so_far")?;
    for s in summaries {
        for (r, curve) in s.curves.iter().enumerate() {
            for (it, v) in s.iterations.iter().zip(curve) {
                writeln!(w, "{it},{},{r},{v:.16e}", s.algorithm)?;
            }
        }
    }
    Ok(())
}

/// `iteration,algorithm,median,q25,q75`.
pub fn write_summary_csv<W: Write>(mut w: W, config: &str, summaries: &[RunSummary]) -> Result<()> {
    header(&mut w, config, "iteration,algorithm,median,q25,q75")?;
    for s in summaries {
        for k in 0..s.iterations.len() {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{:.16e}",
                s.iterations[k], s.algorithm, s.median[k], s.q25[k], s.q75[k]
            )?;
        }
    }
    Ok(())
}

/// `time,a,chi2,bootstrap_std`, one block per swap intensity.
pub fn write_chi2decay_csv<W: Write>(
    mut w: W,
    config: &str,
    fits: &[(f64, DecayFit)],
) -> Result<()> {
    header(&mut w, config, "time,a,chi2,bootstrap_std")?;
    for (a, fit) in fits {
        for k in 0..fit.times.len() {
            writeln!(
                w,
                "{:.16e},{a:.16e},{:.16e},{:.16e}",
                fit.times[k], fit.chi2[k], fit.bootstrap_std[k]
            )?;
        }
    }
    Ok(())
}

/// `eta,mse,stderr`.
pub fn write_discerr_csv<W: Write>(
    mut w: W,
    config: &str,
    result: &DiscretizationResult,
) -> Result<()> {
    header(&mut w, config, "eta,mse,stderr")?;
    for p in &result.points {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", p.eta, p.mse, p.stderr)?;
    }
    Ok(())
}
