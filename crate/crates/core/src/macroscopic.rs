//! Material part of the split system: emission/absorption, electron-ion
//! coupling, nonlinear conduction and sources. Moments `psi_l`, `l >= 1`,
//! are frozen.

use crate::banded::{mat_vec, BlockTridiagonal};
use crate::context::{temperature_norms, LocalSystem, StepContext};
use crate::error::{Error, Result};
use crate::grid::{boundary_state, BoundarySpec, MomentState, Side};
use crate::microscopic::{lagged, solve_consistent, Iterate, SubStepOutcome};
use crate::physics::{SourceRates, Species};
use crate::spatial::{conduction_matrix, Tridiagonal};

/// `eps^2` times the conduction stencil of both species, coefficients at `te`, `ti`.
fn conduction(ctx: &StepContext, te: &[f64], ti: &[f64]) -> (Tridiagonal, Tridiagonal) {
    let e2 = ctx.eps() * ctx.eps();
    let scale = |mut m: Tridiagonal| {
        for v in m
            .lower
            .iter_mut()
            .chain(m.diag.iter_mut())
            .chain(m.upper.iter_mut())
        {
            *v *= e2;
        }
        m
    };
    let de = ctx.padded_conduction(te, Species::Electron);
    let di = ctx.padded_conduction(ti, Species::Ion);
    (
        scale(conduction_matrix(&de, ctx.dx())),
        scale(conduction_matrix(&di, ctx.dx())),
    )
}

/// Adds conduction split pointwise to cell systems: own-cell part implicit,
/// neighbour temperatures and coefficients from `te`, `ti`.
pub(crate) fn fold_pointwise_conduction(
    ctx: &StepContext,
    te: &[f64],
    ti: &[f64],
    systems: &mut [LocalSystem],
) {
    if !ctx.params.has_conduction() {
        return;
    }
    let (ce, ci) = conduction(ctx, te, ti);
    let te_pad = ctx.padded_temperature(te, Species::Electron, 1);
    let ti_pad = ctx.padded_temperature(ti, Species::Ion, 1);
    for (j, sys) in systems.iter_mut().enumerate() {
        sys.diag_e -= ce.diag[j];
        sys.rhs_e += ce.lower[j] * te_pad[j] + ce.upper[j] * te_pad[j + 2];
        sys.diag_i -= ci.diag[j];
        sys.rhs_i += ci.lower[j] * ti_pad[j] + ci.upper[j] * ti_pad[j + 2];
    }
}

/// Solves the cell systems coupled by implicit conduction, emission
/// linearized about `te_lin`, conduction coefficients at `te_lin`, `ti_lin`.
/// Returns `(rho, T_e, T_i)` per cell.
pub(crate) fn parabolic_solve(
    ctx: &StepContext,
    te_lin: &[f64],
    ti_lin: &[f64],
    systems: &[LocalSystem],
) -> Result<Vec<(f64, f64, f64)>> {
    let n = systems.len();
    let (ce, ci) = conduction(ctx, te_lin, ti_lin);
    let mut sys = BlockTridiagonal::<2>::new(n);
    let mut rhs = vec![[0.0; 2]; n];
    let mut lin = vec![(0.0, 0.0); n];
    for (j, l) in systems.iter().enumerate() {
        let (a, s) = (l.a_rho, l.s);
        let tp = te_lin[j];
        // a c T^4 ~ a c (4 T'^3 T - 3 T'^4)
        let em = 2.0 * s * l.ac * tp * tp * tp;
        let em0 = 0.75 * em * tp;
        let e1 = a * em / (a + s);
        let e0 = (s * l.rhs_rho + a * em0) / (a + s);
        lin[j] = ((l.rhs_rho - em0) / (a + s), em / (a + s));
        sys.diag[j] = [
            [l.diag_e + l.h + e1 - ce.diag[j], -l.h],
            [-l.h, l.diag_i + l.h - ci.diag[j]],
        ];
        sys.lower[j] = [[-ce.lower[j], 0.0], [0.0, -ci.lower[j]]];
        sys.upper[j] = [[-ce.upper[j], 0.0], [0.0, -ci.upper[j]]];
        rhs[j] = [l.rhs_e + e0, l.rhs_i];
        for r in 0..2 {
            let off: f64 = (0..2)
                .map(|c| {
                    let d = if c == r { 0.0 } else { sys.diag[j][r][c].abs() };
                    d + sys.lower[j][r][c].abs() + sys.upper[j][r][c].abs()
                })
                .sum();
            if !(sys.diag[j][r][r] > off) {
                return Err(Error::solver(j, "parabolic system is not diagonally dominant"));
            }
        }
    }
    let sol = match ctx.bc {
        BoundarySpec::Periodic => sys.solve_cyclic(&rhs)?,
        BoundarySpec::Inflow { .. } => {
            let ghost = |side| {
                let b = boundary_state(ctx.bc, side).expect("inflow");
                [b.te, b.ti]
            };
            let l0 = mat_vec(&sys.lower[0], &ghost(Side::Left));
            let un = mat_vec(&sys.upper[n - 1], &ghost(Side::Right));
            for i in 0..2 {
                rhs[0][i] -= l0[i];
                rhs[n - 1][i] -= un[i];
            }
            sys.solve(&rhs)?
        }
    };
    sol.iter()
        .enumerate()
        .map(|(j, &[te, ti])| {
            if !(te > 0.0 && ti > 0.0 && te.is_finite() && ti.is_finite()) {
                return Err(Error::solver(
                    j,
                    format!("parabolic solve produced T_e = {te:e}, T_i = {ti:e}"),
                ));
            }
            Ok((lin[j].0 + lin[j].1 * te, te, ti))
        })
        .collect()
}

/// Cell systems of the material part without conduction.
fn material_systems(ctx: &StepContext, star: &MomentState, it: &Iterate, q: SourceRates) -> Vec<LocalSystem> {
    let w = ctx.split.macro_part();
    let a_rho = ctx.a_rho();
    let ac = ctx.params.a * ctx.params.c;
    let lag = lagged(ctx, star, &it.state, w);
    (0..star.n())
        .map(|j| LocalSystem {
            a_rho,
            rhs_rho: a_rho * star.rho(j) + q.radiation,
            diag_e: lag.be[j],
            rhs_e: lag.be[j] * star.te[j] + q.electron,
            diag_i: lag.bi[j],
            rhs_i: lag.bi[j] * star.ti[j] + q.ion,
            h: lag.h[j],
            s: 2.0 * w.sigma * it.sigma[j],
            ac,
        })
        .collect()
}

/// Odd iteration: conduction split pointwise (own-cell part implicit,
/// neighbours at iterate `2k`), then the local quartic per cell.
pub fn macro_odd_local(
    ctx: &StepContext,
    star: &MomentState,
    it: &Iterate,
    q: SourceRates,
) -> Result<Iterate> {
    let w = ctx.split.macro_part();
    let lag = lagged(ctx, star, &it.state, w);
    let mut systems = material_systems(ctx, star, it, q);
    fold_pointwise_conduction(ctx, &it.state.te, &it.state.ti, &mut systems);
    let mut next = it.state.clone();
    for (j, sys) in systems.iter().enumerate() {
        let (rho, te, ti) = solve_consistent(ctx, j, star.te[j], sys, lag.be[j], w, it.state.te[j])?;
        next.set_rho(j, rho);
        next.te[j] = te;
        next.ti[j] = ti;
    }
    let sigma = ctx.opacities(&next.te);
    Ok(Iterate { state: next, sigma })
}

/// Even iteration: implicit `(T_e, T_i)` block-tridiagonal solve with
/// conduction coefficients and emission linearized about iterate `2k+1`.
pub fn macro_even_parabolic(
    ctx: &StepContext,
    star: &MomentState,
    it1: &Iterate,
    q: SourceRates,
) -> Result<Iterate> {
    let systems = material_systems(ctx, star, it1, q);
    let sol = parabolic_solve(ctx, &it1.state.te, &it1.state.ti, &systems)?;
    let mut next = it1.state.clone();
    for (j, (rho, te, ti)) in sol.into_iter().enumerate() {
        next.set_rho(j, rho);
        next.te[j] = te;
        next.ti[j] = ti;
    }
    let sigma = ctx.opacities(&next.te);
    Ok(Iterate { state: next, sigma })
}

/// Error measure between iterates `2k+2` and `2k`: temperatures only.
pub fn macro_error(a: &MomentState, b: &MomentState, dt: f64, dx: f64) -> f64 {
    temperature_norms(a, b, dx).0.sqrt() / dt
}

/// Alternates odd and even iterations from the transport result `star`.
/// Sources are evaluated at `star.t + dt`.
pub fn macro_step(ctx: &StepContext, star: &MomentState) -> Result<SubStepOutcome> {
    let q = ctx.params.source_rates(star.t + ctx.dt);
    let mut it = Iterate::new(ctx, star.clone());
    let dx = ctx.dx();
    let mut err = f64::INFINITY;
    for iter in 1..=ctx.control.max_iters {
        let odd = macro_odd_local(ctx, star, &it, q)?;
        let even = macro_even_parabolic(ctx, star, &odd, q)?;
        let (diff, size) = temperature_norms(&even.state, &it.state, dx);
        let prev = err;
        err = diff.sqrt() / ctx.dt;
        let done = ctx.control.converged(err, prev, diff.sqrt(), size.sqrt());
        it = even;
        if done {
            return Ok(SubStepOutcome {
                state: it.state,
                iters: iter,
                last_error: err,
            });
        }
    }
    Err(Error::NotConverged {
        stage: "material",
        iters: ctx.control.max_iters,
        last_error: err,
    })
}
