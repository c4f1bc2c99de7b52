//! Runs a scenario with its configured solver.

use crate::context::StepContext;
use crate::diagnostics::{radiation_temperatures, total_energy};
use crate::diffusion::diffusion_reference_run;
use crate::error::Result;
use crate::grid::{init_equilibrium, Grid1D, MomentState};
use crate::integrator::{integrate, StepReport};
use crate::physics::PhysicalParams;
use crate::scenarios::{ScenarioConfig, SolverKind};
use crate::sn::{sn_integrate, sn_to_moments, OrdinateField};

/// Temperatures and moments on the grid at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub t: f64,
    pub x: Vec<f64>,
    pub tr: Vec<f64>,
    pub te: Vec<f64>,
    pub ti: Vec<f64>,
    pub state: MomentState,
}

impl Profile {
    pub fn from_state(grid: &Grid1D, state: MomentState, params: &PhysicalParams) -> Self {
        Self {
            t: state.t,
            x: grid.centers(),
            tr: radiation_temperatures(&state, params),
            te: state.te.clone(),
            ti: state.ti.clone(),
            state,
        }
    }

    /// `[T_r, T_e, T_i]`.
    pub fn temperatures(&self) -> [&[f64]; 3] {
        [&self.tr, &self.te, &self.ti]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub solver: SolverKind,
    pub profiles: Vec<Profile>,
    pub reports: Vec<StepReport>,
}

/// Total energy of the equilibrium initial state, shared by every solver.
pub fn initial_energy(cfg: &ScenarioConfig) -> Result<f64> {
    let init = init_equilibrium(&cfg.grid, |x| cfg.initial.eval(x), cfg.moments, &cfg.physics)?;
    Ok(total_energy(&init, &cfg.physics, &cfg.grid))
}

/// Integrates `cfg` to `t_end`, returning a profile at every output time.
pub fn run(cfg: &ScenarioConfig, on_step: impl FnMut(&StepReport)) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = &cfg.grid;
    let params = &cfg.physics;
    let ctx = StepContext {
        grid,
        params,
        bc: &cfg.boundary,
        dt: cfg.dt(),
        recon: cfg.reconstruction,
        control: cfg.iteration,
        split: cfg.split(),
    };
    let profile = |x: f64| cfg.initial.eval(x);
    let times = cfg.time.output_times();
    let (states, reports) = match cfg.solver {
        SolverKind::Pn | SolverKind::NaiveSplit => {
            let init = init_equilibrium(grid, profile, cfg.moments, params)?;
            let traj = integrate(&ctx, cfg.scheme, &cfg.time, init, on_step)?;
            (traj.snapshots, traj.reports)
        }
        SolverKind::Sn => {
            let init = OrdinateField::equilibrium(grid, profile, cfg.directions, params)?;
            let (fields, reports) = sn_integrate(&ctx, ctx.dt, &times, init, on_step)?;
            let states = fields
                .iter()
                .map(|f| sn_to_moments(f, cfg.moments))
                .collect::<Result<Vec<_>>>()?;
            (states, reports)
        }
        SolverKind::DiffusionRef => {
            let init: Vec<f64> = grid.centers().into_iter().map(profile).collect();
            let (snaps, reports) = diffusion_reference_run(&ctx, ctx.dt, &times, init, on_step)?;
            let states = snaps
                .into_iter()
                .map(|s| {
                    let mut st = init_equilibrium(grid, |_| 1.0, cfg.moments, params)?;
                    for (j, &t) in s.temp.iter().enumerate() {
                        st.set_rho(j, 0.5 * params.emission(t));
                    }
                    st.te.clone_from(&s.temp);
                    st.ti = s.temp;
                    st.t = s.t;
                    Ok(st)
                })
                .collect::<Result<Vec<_>>>()?;
            (states, reports)
        }
    };
    Ok(RunOutput {
        solver: cfg.solver,
        profiles: states
            .into_iter()
            .map(|s| Profile::from_state(grid, s, params))
            .collect(),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{builtin, BUILTIN_NAMES};

    #[test]
    fn every_builtin_runs_one_step() {
        for name in BUILTIN_NAMES {
            let mut cfg = builtin(name).unwrap();
            let dt = cfg.dt();
            cfg.time.t_end = dt;
            cfg.time.snapshots.clear();
            let out = run(&cfg, |_| {}).unwrap();
            assert_eq!(out.reports.len(), 1, "{name}");
            assert_eq!(out.profiles.len(), 1);
            assert_eq!(out.profiles[0].t, dt);
        }
    }

    #[test]
    fn solvers_agree_on_an_equilibrium() {
        let mut cfg = builtin("ap_test").unwrap();
        cfg.initial = crate::scenarios::InitialProfile::Uniform { t: 0.9 };
        cfg.grid.n = 16;
        cfg.time.t_end = 0.05;
        for solver in [
            SolverKind::Pn,
            SolverKind::Sn,
            SolverKind::DiffusionRef,
            SolverKind::NaiveSplit,
        ] {
            cfg.solver = solver;
            let out = run(&cfg, |_| {}).unwrap();
            for f in out.profiles[0].temperatures() {
                assert!(f.iter().all(|v| (v - 0.9).abs() < 1e-12), "{solver:?}");
            }
        }
    }
}
