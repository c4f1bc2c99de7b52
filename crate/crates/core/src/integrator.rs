//! Time stepping: one transport sub-step followed by one material sub-step,
//! an optional implicit-midpoint variant, and the run loop.

use serde::{Deserialize, Serialize};

use crate::context::StepContext;
use crate::diagnostics::total_energy;
use crate::error::{Error, Result};
use crate::grid::MomentState;
use crate::macroscopic::macro_step;
use crate::microscopic::micro_step;

/// `C dx / c`.
#[inline]
pub fn cfl_dt(cfl: f64, dx: f64, c: f64) -> f64 {
    cfl * dx / c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeControl {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Fixed step; overrides the CFL rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

fn default_cfl() -> f64 {
    0.1
}

impl TimeControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        match self.dt {
            Some(dt) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
            None if !(self.cfl > 0.0 && self.cfl.is_finite()) => {
                return Err(Error::Config(format!("cfl must be positive, got {}", self.cfl)));
            }
            _ => {}
        }
        if self.snapshots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("snapshot times must be strictly increasing".into()));
        }
        if let Some(&t) = self.snapshots.iter().find(|&&t| !(0.0..=self.t_end).contains(&t)) {
            return Err(Error::Config(format!("snapshot time {t} outside [0, t_end]")));
        }
        Ok(())
    }

    /// Nominal step for a grid spacing and light speed.
    pub fn step(&self, dx: f64, c: f64) -> f64 {
        self.dt.unwrap_or_else(|| cfl_dt(self.cfl, dx, c))
    }

    /// Snapshot times, with `t_end` appended when absent.
    pub fn output_times(&self) -> Vec<f64> {
        let mut t = self.snapshots.clone();
        if t.last() != Some(&self.t_end) {
            t.push(self.t_end);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    #[default]
    BackwardEuler,
    Midpoint,
}

impl std::str::FromStr for TimeScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backward_euler" | "euler" => Ok(Self::BackwardEuler),
            "midpoint" => Ok(Self::Midpoint),
            other => Err(Error::Config(format!(
                "unknown time scheme '{other}' (expected backward_euler or midpoint)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    pub micro_iters: usize,
    pub macro_iters: usize,
    pub energy: f64,
    /// The midpoint step fell back to a backward-Euler step.
    pub fallback: bool,
}

/// One split step: transport then material, each solved implicitly.
pub fn advance(ctx: &StepContext, state: &MomentState) -> Result<(MomentState, StepReport)> {
    let micro = micro_step(ctx, state)?;
    let mac = macro_step(ctx, &micro.state)?;
    let mut next = mac.state;
    next.t = state.t + ctx.dt;
    let report = StepReport {
        t: next.t,
        dt: ctx.dt,
        micro_iters: micro.iters,
        macro_iters: mac.iters,
        energy: total_energy(&next, ctx.params, ctx.grid),
        fallback: false,
    };
    Ok((next, report))
}

/// `2 half - start` in the conserved variables: moments and material
/// energies. `None` if an energy leaves the admissible range.
fn extrapolate(ctx: &StepContext, half: &MomentState, start: &MomentState) -> Option<MomentState> {
    let p = ctx.params;
    let mut out = half.clone();
    for (o, s) in out.psi.iter_mut().zip(&start.psi) {
        *o = 2.0 * *o - s;
    }
    for j in 0..out.n() {
        let x = ctx.grid.center(j);
        let e = 2.0 * p.cve.integral(x, half.te[j]) - p.cve.integral(x, start.te[j]);
        out.te[j] = p.cve.integral_inverse(x, e)?;
        let e = 2.0 * p.cvi.integral(x, half.ti[j]) - p.cvi.integral(x, start.ti[j]);
        out.ti[j] = p.cvi.integral_inverse(x, e)?;
    }
    Some(out)
}

/// Second-order variant: symmetric composition of implicit-midpoint
/// sub-steps, transport over `dt/2`, material over `dt`, transport over `dt/2`.
/// Each implicit-midpoint sub-step of length `tau` is a backward-Euler
/// solve over `tau/2` followed by linear extrapolation of the moments and
/// material energies. If an extrapolated
/// temperature is not positive the whole step is redone with [`advance`].
pub fn midpoint_advance(ctx: &StepContext, state: &MomentState) -> Result<(MomentState, StepReport)> {
    let quarter = StepContext {
        dt: 0.25 * ctx.dt,
        ..*ctx
    };
    let half = StepContext {
        dt: 0.5 * ctx.dt,
        ..*ctx
    };
    let attempt = || -> Result<Option<(MomentState, usize, usize)>> {
        let a = micro_step(&quarter, state)?;
        let Some(u1) = extrapolate(ctx, &a.state, state) else {
            return Ok(None);
        };
        // sources are sampled at u1.t + half.dt, the step midpoint
        let b = macro_step(&half, &u1)?;
        let Some(mut u2) = extrapolate(ctx, &b.state, &u1) else {
            return Ok(None);
        };
        u2.t = state.t;
        let c = micro_step(&quarter, &u2)?;
        let Some(u3) = extrapolate(ctx, &c.state, &u2) else {
            return Ok(None);
        };
        Ok(Some((u3, a.iters + c.iters, b.iters)))
    };
    match attempt()? {
        Some((mut next, micro_iters, macro_iters)) => {
            next.t = state.t + ctx.dt;
            let report = StepReport {
                t: next.t,
                dt: ctx.dt,
                micro_iters,
                macro_iters,
                energy: total_energy(&next, ctx.params, ctx.grid),
                fallback: false,
            };
            Ok((next, report))
        }
        None => {
            let (next, mut report) = advance(ctx, state)?;
            report.fallback = true;
            Ok((next, report))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<MomentState>,
    pub reports: Vec<StepReport>,
}

/// States with an attached time.
pub(crate) trait Timed: Clone {
    fn time(&self) -> f64;
    fn set_time(&mut self, t: f64);
}

impl Timed for MomentState {
    fn time(&self) -> f64 {
        self.t
    }
    fn set_time(&mut self, t: f64) {
        self.t = t;
    }
}

/// Marches with nominal step `dt` through each stop time in turn, shortening
/// the last step before a stop so it lands exactly on it.
pub(crate) fn march<S: Timed>(
    stops: &[f64],
    dt: f64,
    initial: S,
    mut step: impl FnMut(&S, f64) -> Result<(S, StepReport)>,
    mut on_step: impl FnMut(&StepReport),
) -> Result<(Vec<S>, Vec<StepReport>)> {
    let mut state = initial;
    let mut snapshots = Vec::with_capacity(stops.len());
    let mut reports = Vec::new();
    for &stop in stops {
        while state.time() < stop {
            let remaining = stop - state.time();
            let (h, last) = if remaining <= dt * (1.0 + 1e-9) {
                (remaining, true)
            } else {
                (dt, false)
            };
            let (mut next, mut report) = step(&state, h).map_err(|e| Error::Step {
                t: state.time(),
                source: Box::new(e),
            })?;
            if last {
                next.set_time(stop);
                report.t = stop;
            }
            on_step(&report);
            reports.push(report);
            state = next;
        }
        let mut snap = state.clone();
        snap.set_time(stop);
        snapshots.push(snap);
    }
    Ok((snapshots, reports))
}

/// Steps `initial` to `time.t_end`, landing exactly on every snapshot time.
/// `ctx.dt` is ignored; the nominal step comes from `time`.
pub fn integrate(
    ctx: &StepContext,
    scheme: TimeScheme,
    time: &TimeControl,
    initial: MomentState,
    on_step: impl FnMut(&StepReport),
) -> Result<Trajectory> {
    time.validate()?;
    let dt = time.step(ctx.dx(), ctx.params.c);
    let (snapshots, reports) = march(
        &time.output_times(),
        dt,
        initial,
        |state, h| {
            let step_ctx = StepContext { dt: h, ..*ctx };
            match scheme {
                TimeScheme::BackwardEuler => advance(&step_ctx, state),
                TimeScheme::Midpoint => midpoint_advance(&step_ctx, state),
            }
        },
        on_step,
    )?;
    Ok(Trajectory { snapshots, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::SplitKind;
    use crate::grid::{init_equilibrium, BoundarySpec, Grid1D};
    use crate::physics::CoefficientModel;
    use crate::spatial::ReconstructionMode;
    use crate::testutil::{ap_params, ctx};

    #[test]
    fn cfl_examples() {
        assert!((cfl_dt(0.1, 0.01, 1.0) - 1e-3).abs() < 1e-18);
        assert!((cfl_dt(0.1, 0.5 / 200.0, 299.79) - 8.3392e-7).abs() < 1e-10);
        let tc = TimeControl {
            cfl: 0.1,
            dt: Some(0.0025),
            t_end: 1.0,
            snapshots: vec![],
        };
        assert_eq!(tc.step(0.3, 7.0), 0.0025);
    }

    #[test]
    fn time_control_validation() {
        let mut tc = TimeControl {
            cfl: 0.1,
            dt: None,
            t_end: 1.0,
            snapshots: vec![0.5, 0.2],
        };
        assert!(tc.validate().is_err());
        tc.snapshots = vec![0.2, 1.5];
        assert!(tc.validate().is_err());
        tc.snapshots = vec![0.2, 1.0];
        tc.validate().unwrap();
        assert_eq!(tc.output_times(), vec![0.2, 1.0]);
        tc.snapshots.clear();
        assert_eq!(tc.output_times(), vec![1.0]);
    }

    #[test]
    fn equilibrium_steps_are_identity() {
        let grid = Grid1D::new(0.0, 2.0, 16).unwrap();
        let p = ap_params(0.1, 1.0);
        let s = init_equilibrium(&grid, |_| 0.9, 4, &p).unwrap();
        let c = ctx(
            &grid,
            &p,
            &BoundarySpec::Periodic,
            0.01,
            ReconstructionMode::Weno3,
        );
        for f in [advance, midpoint_advance] {
            let (next, report) = f(&c, &s).unwrap();
            assert!(!report.fallback);
            for (a, b) in next.psi.iter().zip(&s.psi).chain(next.te.iter().zip(&s.te)) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((next.t - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn midpoint_matches_scalar_amplification() {
        // electron-ion relaxation only: d(Te - Ti)/dt = -lambda (Te - Ti)
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let mut p = ap_params(1.0, 2.0);
        p.opacity = CoefficientModel::constant(0.0);
        p.ke = 0.0;
        p.ki = 0.0;
        let mut s = init_equilibrium(&grid, |_| 1.0, 2, &p).unwrap();
        s.ti.iter_mut().for_each(|t| *t = 0.4);
        let dt = 0.3;
        let lambda = p.c * 2.0 * (1.0 / 0.1 + 1.0 / 0.2);
        let r = |z: f64| (1.0 - 0.5 * z) / (1.0 + 0.5 * z);

        let mut c = ctx(
            &grid,
            &p,
            &BoundarySpec::Periodic,
            dt,
            ReconstructionMode::Constant,
        );
        c.split = SplitKind::Naive;
        let (next, report) = midpoint_advance(&c, &s).unwrap();
        assert!(!report.fallback);
        let ratio = (next.te[0] - next.ti[0]) / 0.6;
        assert!(
            (ratio - r(lambda * dt)).abs() < 1e-12,
            "{ratio} vs {}",
            r(lambda * dt)
        );

        c.split = SplitKind::AsymptoticPreserving;
        let (next, _) = midpoint_advance(&c, &s).unwrap();
        let ratio = (next.te[0] - next.ti[0]) / 0.6;
        let expect = r(0.25 * lambda * dt).powi(2) * r(0.5 * lambda * dt);
        assert!((ratio - expect).abs() < 1e-12);
    }

    #[test]
    fn midpoint_falls_back_on_negative_extrapolation() {
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let mut p = ap_params(1.0, 2.0);
        p.opacity = CoefficientModel::constant(0.0);
        let mut s = init_equilibrium(&grid, |_| 1.0, 2, &p).unwrap();
        s.ti.iter_mut().for_each(|t| *t = 0.01);
        let c = ctx(
            &grid,
            &p,
            &BoundarySpec::Periodic,
            10.0,
            ReconstructionMode::Constant,
        );
        let (next, report) = midpoint_advance(&c, &s).unwrap();
        assert!(report.fallback);
        next.validate().unwrap();
    }

    #[test]
    fn run_hits_snapshot_times_exactly() {
        let grid = Grid1D::new(0.0, 2.0, 8).unwrap();
        let p = ap_params(1.0, 1.0);
        let s = init_equilibrium(&grid, |x| 0.75 + 0.25 * (std::f64::consts::PI * x).sin(), 3, &p).unwrap();
        let c = ctx(&grid, &p, &BoundarySpec::Periodic, 0.0, ReconstructionMode::Weno3);
        let tc = TimeControl {
            cfl: 0.1,
            dt: None,
            t_end: 0.1,
            snapshots: vec![0.0, 0.033],
        };
        let mut count = 0;
        let tr = integrate(&c, TimeScheme::BackwardEuler, &tc, s.clone(), |_| count += 1).unwrap();
        assert_eq!(tr.snapshots.len(), 3);
        assert_eq!(tr.snapshots[0], s);
        assert_eq!(tr.snapshots[1].t, 0.033);
        assert_eq!(tr.snapshots[2].t, 0.1);
        assert_eq!(tr.reports.last().unwrap().t, 0.1);
        assert_eq!(count, tr.reports.len());
        let e0 = total_energy(&s, &p, &grid);
        assert!((tr.reports.last().unwrap().energy - e0).abs() <= 1e-10 * e0);

        let zero = TimeControl {
            t_end: 0.0,
            snapshots: vec![],
            ..tc
        };
        let tr = integrate(&c, TimeScheme::BackwardEuler, &zero, s.clone(), |_| {}).unwrap();
        assert_eq!(tr.snapshots, vec![s]);
        assert!(tr.reports.is_empty());
    }
}
