//! Single-temperature equilibrium diffusion reference:
//! `d/dt (a T^4 + E_e + E_i) = d/dx (a c / (3 sigma) d/dx T^4) + d/dx ((D_e + D_i) d/dx T)`.

use crate::banded::BlockTridiagonal;
use crate::context::StepContext;
use crate::error::{Error, Result};
use crate::grid::Side;
use crate::integrator::{march, StepReport, Timed};
use crate::physics::Species;

/// Temperature profile at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSnapshot {
    pub t: f64,
    pub temp: Vec<f64>,
}

fn energy(ctx: &StepContext, j: usize, t: f64) -> f64 {
    let p = ctx.params;
    p.a * t.powi(4) + p.material_energy(ctx.grid.center(j), t, t)
}

fn capacity(ctx: &StepContext, j: usize, t: f64) -> f64 {
    let p = ctx.params;
    let x = ctx.grid.center(j);
    4.0 * p.a * t.powi(3) + p.cve.eval(x, t) + p.cvi.eval(x, t)
}

/// Face means of `a c / (3 sigma)` and `D_e + D_i` from a one-ghost padded profile.
fn face_coefficients(ctx: &StepContext, padded: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = ctx.params;
    let n = ctx.grid.n;
    let x = |i: usize| match i {
        0 => ctx.ghost_x(Side::Left),
        i if i == n + 1 => ctx.ghost_x(Side::Right),
        i => ctx.grid.center(i - 1),
    };
    let k = p.ke + p.ki;
    let rad: Vec<f64> = padded
        .iter()
        .enumerate()
        .map(|(i, &t)| p.a * p.c / (3.0 * p.opacity.eval(x(i), t)))
        .collect();
    let cond: Vec<f64> = padded.iter().map(|&t| k * t * t * t.sqrt()).collect();
    let mean = |v: &[f64]| v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect::<Vec<_>>();
    (mean(&rad), mean(&cond))
}

/// One backward-Euler step. Coefficients are lagged at the previous
/// iterate and `T^4` is linearized about it, so the fixed point is the fully
/// implicit scheme. Returns the new profile and the iteration count.
pub fn diffusion_step(ctx: &StepContext, old: &[f64]) -> Result<(Vec<f64>, usize)> {
    let n = ctx.grid.n;
    let periodic = ctx.bc.is_periodic();
    let r = ctx.dt / (ctx.dx() * ctx.dx());
    let mut cur = old.to_vec();
    let mut err = f64::INFINITY;
    for iter in 1..=ctx.control.max_iters {
        let k = ctx.padded_temperature(&cur, Species::Electron, 1);
        let (rad, cond) = face_coefficients(ctx, &k);
        let mut sys = BlockTridiagonal::<1>::new(n);
        let mut rhs = vec![[0.0]; n];
        for j in 0..n {
            let kj = k[j + 1];
            let cap = capacity(ctx, j, kj);
            let mut diag = cap;
            let mut b = cap * kj - energy(ctx, j, kj) + energy(ctx, j, old[j]);
            for (face, nb) in [(j, j), (j + 1, j + 2)] {
                let kn = k[nb];
                diag += r * (4.0 * rad[face] * kj.powi(3) + cond[face]);
                b += 3.0 * r * rad[face] * (kj.powi(4) - kn.powi(4));
                let off = -r * (4.0 * rad[face] * kn.powi(3) + cond[face]);
                let boundary = !periodic && ((nb == 0) || nb == n + 1);
                if boundary {
                    b -= off * kn;
                } else if nb == j {
                    sys.lower[j] = [[off]];
                } else {
                    sys.upper[j] = [[off]];
                }
            }
            sys.diag[j] = [[diag]];
            rhs[j] = [b];
        }
        let sol = if periodic {
            sys.solve_cyclic(&rhs)?
        } else {
            sys.solve(&rhs)?
        };
        let next: Vec<f64> = sol.into_iter().map(|v| v[0]).collect();
        if let Some(j) = next.iter().position(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::solver(
                j,
                format!("diffusion temperature {} is not positive", next[j]),
            ));
        }
        let dx = ctx.dx();
        let change = (dx * next.iter().zip(&cur).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).sqrt();
        let size = (dx * cur.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let prev = err;
        err = change / ctx.dt;
        cur = next;
        if ctx.control.converged(err, prev, change, size) {
            return Ok((cur, iter));
        }
    }
    Err(Error::NotConverged {
        stage: "diffusion",
        iters: ctx.control.max_iters,
        last_error: err,
    })
}

impl Timed for DiffusionSnapshot {
    fn time(&self) -> f64 {
        self.t
    }
    fn set_time(&mut self, t: f64) {
        self.t = t;
    }
}

/// Runs from `initial` at `t = 0` through each output time. Reports carry the
/// iteration count as `macro_iters`.
pub fn diffusion_reference_run(
    ctx: &StepContext,
    dt: f64,
    times: &[f64],
    initial: Vec<f64>,
    on_step: impl FnMut(&StepReport),
) -> Result<(Vec<DiffusionSnapshot>, Vec<StepReport>)> {
    if initial.len() != ctx.grid.n {
        return Err(Error::Config("initial profile does not match the grid".into()));
    }
    march(
        times,
        dt,
        DiffusionSnapshot {
            t: 0.0,
            temp: initial,
        },
        |state, h| {
            let step = StepContext { dt: h, ..*ctx };
            let (temp, iters) = diffusion_step(&step, &state.temp)?;
            let energy = ctx.dx()
                * temp
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| energy(ctx, j, v))
                    .sum::<f64>();
            let next = DiffusionSnapshot { t: state.t + h, temp };
            let report = StepReport {
                t: next.t,
                dt: h,
                micro_iters: 0,
                macro_iters: iters,
                energy,
                fallback: false,
            };
            Ok((next, report))
        },
        on_step,
    )
}
