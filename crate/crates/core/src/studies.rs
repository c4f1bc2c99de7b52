//! Resolution sweeps and cross-solver comparisons.

use crate::diagnostics::{l2_error, ConvergenceTable};
use crate::error::{Error, Result};
use crate::runner::{run, RunOutput};
use crate::scenarios::ScenarioConfig;

pub const TEMPERATURE_FIELDS: [&str; 3] = ["T_r", "T_e", "T_i"];

/// Runs `cfg` at each resolution in parallel; results keep the input order.
pub fn run_resolutions(cfg: &ScenarioConfig, resolutions: &[usize]) -> Result<Vec<RunOutput>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = resolutions
            .iter()
            .map(|&n| {
                let mut c = cfg.clone();
                c.grid.n = n;
                s.spawn(move || run(&c, |_| {}))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Internal("worker panicked".into())))
            })
            .collect()
    })
}

/// L2 differences of `T_r, T_e, T_i` per output time; the finer run is
/// restricted to the coarser grid.
pub fn profile_differences(a: &RunOutput, b: &RunOutput, length: f64) -> Result<Vec<(f64, [f64; 3])>> {
    if a.profiles.len() != b.profiles.len() {
        return Err(Error::Config("runs have different output times".into()));
    }
    a.profiles
        .iter()
        .zip(&b.profiles)
        .map(|(pa, pb)| {
            let (coarse, fine) = if pa.x.len() <= pb.x.len() {
                (pa, pb)
            } else {
                (pb, pa)
            };
            let mut d = [0.0; 3];
            for (k, (c, f)) in coarse.temperatures().iter().zip(fine.temperatures()).enumerate() {
                d[k] = l2_error(c, f, length)?;
            }
            Ok((pa.t, d))
        })
        .collect()
}

/// Errors at `t_end` of each resolution against a run at `reference_n`.
pub fn convergence_study(
    cfg: &ScenarioConfig,
    resolutions: &[usize],
    reference_n: usize,
) -> Result<ConvergenceTable> {
    if let Some(n) = resolutions
        .iter()
        .find(|&&n| n == 0 || !reference_n.is_multiple_of(n))
    {
        return Err(Error::Config(format!(
            "resolution {n} does not divide the reference {reference_n}"
        )));
    }
    let mut all = resolutions.to_vec();
    all.push(reference_n);
    let mut runs = run_resolutions(cfg, &all)?;
    let reference = runs.pop().expect("reference run");
    let length = cfg.grid.x_max - cfg.grid.x_min;
    let mut table = ConvergenceTable::new(&TEMPERATURE_FIELDS);
    for (n, r) in resolutions.iter().zip(&runs) {
        let d = profile_differences(r, &reference, length)?;
        let (_, last) = d
            .last()
            .copied()
            .ok_or_else(|| Error::Internal("no output times".into()))?;
        table.push(*n, last.to_vec());
    }
    Ok(table)
}
