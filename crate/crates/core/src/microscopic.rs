//! Transport part of the split P_N system: alternating odd (local quartic
//! plus moment sweep) and even (banded density/flux solve) iterations.

use crate::banded::{BlockTridiagonal, Vector};
use crate::context::{full_norms, LocalSystem, StepContext, Weights};
use crate::error::{Error, Result};
use crate::grid::{boundary_state, BoundarySpec, MomentState, Side};
use crate::quartic::QuarticCoefficients;
use crate::spatial::{pn_interface_flux, reconstruct, FluxFamily, InterfaceValues, ReconstructionMode};

/// One iterate of an alternating iteration: the state and the opacity
/// evaluated from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub state: MomentState,
    pub sigma: Vec<f64>,
}

impl Iterate {
    pub fn new(ctx: &StepContext, state: MomentState) -> Self {
        let sigma = ctx.opacities(&state.te);
        Self { state, sigma }
    }
}

/// Paper-scaled quartic of the transport sub-step for a single cell.
///
/// `dpsi1_dx` is the flux gradient of `psi_1` at the previous iterate and
/// `h_kappa` the coupling coefficient `kappa`. Constant `C_ve`, `C_vi`.
#[allow(clippy::too_many_arguments)]
pub fn quartic_coefficients(
    rho_n: f64,
    te_n: f64,
    ti_n: f64,
    sigma: f64,
    dpsi1_dx: f64,
    cve: f64,
    cvi: f64,
    kappa: f64,
    eps: f64,
    c: f64,
    a: f64,
    dt: f64,
) -> QuarticCoefficients {
    let e2 = eps * eps;
    let a_rho = 2.0 * e2 / (c * dt);
    let be = e2 * cve / dt;
    let bi = e2 * cvi / dt;
    let sys = LocalSystem {
        a_rho,
        rhs_rho: a_rho * rho_n - eps * dpsi1_dx,
        diag_e: be,
        rhs_e: be * te_n,
        diag_i: bi,
        rhs_i: bi * ti_n,
        h: 0.5 * c * kappa,
        s: sigma,
        ac: a * c,
    };
    let q = sys.quartic();
    let scale = dt / e2;
    QuarticCoefficients {
        c4: q.c4 * scale,
        c1: q.c1 * scale,
        c0: q.c0 * scale,
    }
}

/// Heat-capacity and coupling terms lagged at `lag`, relative to `base`.
pub(crate) struct Lagged {
    pub be: Vec<f64>,
    pub bi: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn lagged(ctx: &StepContext, base: &MomentState, lag: &MomentState, w: Weights) -> Lagged {
    let p = ctx.params;
    let e2dt = ctx.eps() * ctx.eps() / ctx.dt;
    let n = base.n();
    let mut be = Vec::with_capacity(n);
    let mut bi = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for j in 0..n {
        let x = ctx.grid.center(j);
        be.push(e2dt * p.cve.secant(x, base.te[j], lag.te[j]));
        bi.push(e2dt * p.cvi.secant(x, base.ti[j], lag.ti[j]));
        h.push(w.kappa * p.c * p.kappa.eval(x, lag.te[j]));
    }
    Lagged { be, bi, h }
}

fn traces(
    ctx: &StepContext,
    state: &MomentState,
    l: usize,
    mode: ReconstructionMode,
) -> Result<InterfaceValues> {
    let w = mode.ghost_width();
    reconstruct(&ctx.padded_moment(state, l, w), w, mode)
}

/// Old-family flux of equation `l` (`l < M`) built from `state`.
fn old_flux(
    ctx: &StepContext,
    state: &MomentState,
    l: usize,
    alpha: &[f64],
    mode: ReconstructionMode,
) -> Result<Vec<f64>> {
    let t = traces(ctx, state, l + 1, mode)?;
    let d = traces(ctx, state, l, mode)?;
    pn_interface_flux(FluxFamily::Old, l, state.m, &t, Some(&d), alpha)
}

/// New-family flux of equation `l`, transporting `psi_{l-1}` from `lower`;
/// at `l = M` the dissipation acts on `psi_M` from `top`.
fn new_flux(
    ctx: &StepContext,
    lower: &MomentState,
    top: &MomentState,
    l: usize,
    alpha: &[f64],
    mode: ReconstructionMode,
) -> Result<Vec<f64>> {
    let t = traces(ctx, lower, l - 1, mode)?;
    let d = if l == lower.m {
        Some(traces(ctx, top, l, mode)?)
    } else {
        None
    };
    pn_interface_flux(FluxFamily::New, l, lower.m, &t, d.as_ref(), alpha)
}

/// Updates `psi_l`, `l = from..=M`, one moment at a time: the lower-moment
/// flux uses the already updated `psi_{l-1}`, the higher-moment flux the
/// previous iterate `prev`. The dissipation is a Jacobi update in `psi_l`.
fn moment_sweep(
    ctx: &StepContext,
    base: &MomentState,
    prev: &MomentState,
    next: &mut MomentState,
    sigma: &[f64],
    from: usize,
) -> Result<()> {
    let m = base.m;
    let k = ctx.eps() / ctx.dx();
    let a1 = ctx.a_moment();
    let alpha = ctx.alphas(sigma);
    let mode = ctx.recon;
    for l in from..=m {
        let h = new_flux(ctx, next, prev, l, &alpha, mode)?;
        let g = if l < m {
            Some(old_flux(ctx, prev, l, &alpha, mode)?)
        } else {
            None
        };
        for j in 0..base.n() {
            let mut div = h[j + 1] - h[j];
            if let Some(g) = &g {
                div += g[j + 1] - g[j];
            }
            // own-cell part of the lagged dissipation taken implicitly
            let d = 0.5 * k * (alpha[j] + alpha[j + 1]);
            let v = (a1 * base.psi(j, l) - k * div + d * prev.psi(j, l)) / (a1 + sigma[j] + d);
            if !v.is_finite() {
                return Err(Error::solver(j, format!("non-finite psi_{l}")));
            }
            *next.psi_mut(j, l) = v;
        }
    }
    Ok(())
}

/// Solves the cell system with its `T_e`-dependent coefficients (opacity,
/// coupling, electron heat-capacity secant) evaluated at the solution itself
/// rather than at the iterate. `sys` holds them at `t0`, with `be0` the
/// capacity term. A secant search on `t = T_e(t)` starts from `t0`; the best
/// point found is used.
pub(crate) fn solve_consistent(
    ctx: &StepContext,
    j: usize,
    te_base: f64,
    sys: &LocalSystem,
    be0: f64,
    w: Weights,
    t0: f64,
) -> Result<(f64, f64, f64)> {
    let p = ctx.params;
    let x = ctx.grid.center(j);
    let e2dt = ctx.eps() * ctx.eps() / ctx.dt;
    let at = |t: f64| {
        let be = e2dt * p.cve.secant(x, te_base, t);
        LocalSystem {
            diag_e: sys.diag_e - be0 + be,
            rhs_e: sys.rhs_e + (be - be0) * te_base,
            h: w.kappa * p.c * p.kappa.eval(x, t),
            s: 2.0 * w.sigma * ctx.opacity_at(j, t),
            ..*sys
        }
    };
    let f = |t: f64| {
        let s = at(t);
        if s.quartic().c0 >= 0.0 {
            return None;
        }
        s.solve(j).ok().map(|(_, te, _)| te)
    };
    let Some(f0) = f(t0) else { return sys.solve(j) };
    let (mut a, mut ga) = (t0, f0 - t0);
    let mut best = (ga.abs(), t0);
    let mut b = f0;
    for _ in 0..12 {
        if best.0 <= 1e-13 * best.1 {
            break;
        }
        let Some(fb) = f(b) else { break };
        let gb = fb - b;
        if gb.abs() < best.0 {
            best = (gb.abs(), b);
        }
        let next = if gb != ga {
            b - gb * (b - a) / (gb - ga)
        } else {
            fb
        };
        // stay positive and within a factor of two
        (a, ga, b) = (b, gb, next.clamp(0.5 * b, 2.0 * b));
    }
    at(best.1).solve(j)
}

/// Odd iteration: explicit fluxes from iterate `it`, local quartic for
/// `(rho, T_e, T_i)`, then the pointwise moment sweep.
pub fn micro_odd_sweep(ctx: &StepContext, base: &MomentState, it: &Iterate) -> Result<Iterate> {
    let w = ctx.split.micro();
    let n = base.n();
    let k = ctx.eps() / ctx.dx();
    let a_rho = ctx.a_rho();
    let ac = ctx.params.a * ctx.params.c;
    let alpha = ctx.density_alphas(&ctx.alphas(&it.sigma));
    let g0 = old_flux(ctx, &it.state, 0, &alpha, ctx.recon)?;
    let lag = lagged(ctx, base, &it.state, w);

    let mut next = it.state.clone();
    for j in 0..n {
        // own-cell part of the lagged dissipation taken implicitly
        let d = k * (alpha[j] + alpha[j + 1]);
        let sys = LocalSystem {
            a_rho: a_rho + d,
            rhs_rho: a_rho * base.rho(j) - k * (g0[j + 1] - g0[j]) + d * it.state.rho(j),
            diag_e: lag.be[j],
            rhs_e: lag.be[j] * base.te[j],
            diag_i: lag.bi[j],
            rhs_i: lag.bi[j] * base.ti[j],
            h: lag.h[j],
            s: 2.0 * w.sigma * it.sigma[j],
            ac,
        };
        // An explicit flux can drain more radiation than the cell holds; the
        // cell then keeps the previous iterate and the implicit step corrects it.
        if sys.quartic().c0 >= 0.0 {
            continue;
        }
        let (rho, te, ti) = solve_consistent(ctx, j, base.te[j], &sys, lag.be[j], w, it.state.te[j])?;
        next.set_rho(j, rho);
        next.te[j] = te;
        next.ti[j] = ti;
    }
    let sigma = ctx.opacities(&next.te);
    moment_sweep(ctx, base, &it.state, &mut next, &sigma, 1)?;
    Ok(Iterate { state: next, sigma })
}

fn ghost_rho_psi1(ctx: &StepContext, side: Side) -> Vector<2> {
    let b = boundary_state(ctx.bc, side).expect("inflow");
    [0.5 * ctx.params.emission(b.tr), 0.0]
}

/// Even iteration: implicit `(rho, psi_1)` block-tridiagonal solve with
/// linearized emission, back-substituted temperatures, then the moment sweep.
pub fn micro_even_solve(ctx: &StepContext, base: &MomentState, it1: &Iterate) -> Result<Iterate> {
    let w = ctx.split.micro();
    let n = base.n();
    let m = base.m;
    let k = ctx.eps() / ctx.dx();
    let a_rho = ctx.a_rho();
    let a1 = ctx.a_moment();
    let ac = ctx.params.a * ctx.params.c;
    let alpha = ctx.alphas(&it1.sigma);
    let alpha0 = ctx.density_alphas(&alpha);
    let mode = ctx.recon;
    let st = &it1.state;

    // Implicit terms use first-order traces; the difference to the
    // reconstructed flux is carried from the previous iterate.
    let rec0 = traces(ctx, st, 0, mode)?;
    let rec1 = traces(ctx, st, 1, mode)?;
    let con0 = traces(ctx, st, 0, ReconstructionMode::Constant)?;
    let con1 = traces(ctx, st, 1, ReconstructionMode::Constant)?;
    let g0_rec = pn_interface_flux(FluxFamily::Old, 0, m, &rec1, Some(&rec0), &alpha0)?;
    let g0_con = pn_interface_flux(FluxFamily::Old, 0, m, &con1, Some(&con0), &alpha0)?;
    let h1_rec = pn_interface_flux(FluxFamily::New, 1, m, &rec0, None, &alpha)?;
    let h1_con = pn_interface_flux(FluxFamily::New, 1, m, &con0, None, &alpha)?;
    let g1_rec = old_flux(ctx, st, 1, &alpha, mode)?;
    let e0: Vec<f64> = g0_rec.iter().zip(&g0_con).map(|(a, b)| a - b).collect();
    let e1: Vec<f64> = (0..=n)
        .map(|i| h1_rec[i] - h1_con[i] + g1_rec[i] + 0.5 * alpha[i] * con1.jump(i))
        .collect();

    let lag = lagged(ctx, base, st, w);
    let mut sys = BlockTridiagonal::<2>::new(n);
    let mut rhs = vec![[0.0; 2]; n];
    let mut te0 = vec![0.0; n];
    let mut te1 = vec![0.0; n];
    for j in 0..n {
        let s = 2.0 * w.sigma * it1.sigma[j];
        let tp = st.te[j];
        // a c T^4 ~ a c (4 T'^3 T - 3 T'^4)
        let em = 2.0 * s * ac * tp * tp * tp;
        let em0 = 0.75 * em * tp;
        let (be, bi, h) = (lag.be[j], lag.bi[j], lag.h[j]);
        let ion = bi + h;
        let d = be + h * bi / ion + em;
        te0[j] = (be * base.te[j] + h * bi * base.ti[j] / ion + em0) / d;
        te1[j] = s / d;
        let (ap, am) = (alpha[j + 1], alpha[j]);
        let (bp, bm) = (alpha0[j + 1], alpha0[j]);
        sys.diag[j] = [
            [a_rho + s - em * te1[j] + k * (bp + bm), 0.0],
            [0.0, a1 + it1.sigma[j] + 0.5 * k * (ap + am)],
        ];
        sys.upper[j] = [[-k * bp, 0.5 * k], [k / 3.0, -0.5 * k * ap]];
        sys.lower[j] = [[-k * bm, -0.5 * k], [-k / 3.0, -0.5 * k * am]];
        rhs[j] = [
            a_rho * base.rho(j) + em * te0[j] - em0 - k * (e0[j + 1] - e0[j]),
            a1 * base.psi(j, 1) - k * (e1[j + 1] - e1[j]),
        ];
    }
    let sol = match ctx.bc {
        BoundarySpec::Periodic => sys.solve_cyclic(&rhs)?,
        BoundarySpec::Inflow { .. } => {
            let gl = ghost_rho_psi1(ctx, Side::Left);
            let gr = ghost_rho_psi1(ctx, Side::Right);
            let l0 = crate::banded::mat_vec(&sys.lower[0], &gl);
            let un = crate::banded::mat_vec(&sys.upper[n - 1], &gr);
            for i in 0..2 {
                rhs[0][i] -= l0[i];
                rhs[n - 1][i] -= un[i];
            }
            sys.solve(&rhs)?
        }
    };

    let mut next = st.clone();
    for j in 0..n {
        let [rho, psi1] = sol[j];
        let te = te0[j] + te1[j] * rho;
        if !(te > 0.0 && te.is_finite()) {
            return Err(Error::solver(
                j,
                format!("linearized electron temperature {te:e} is not positive"),
            ));
        }
        next.set_rho(j, rho);
        *next.psi_mut(j, 1) = psi1;
        next.te[j] = te;
        next.ti[j] = (lag.bi[j] * base.ti[j] + lag.h[j] * te) / (lag.bi[j] + lag.h[j]);
    }
    let sigma = ctx.opacities(&next.te);
    moment_sweep(ctx, base, st, &mut next, &sigma, 2)?;
    Ok(Iterate { state: next, sigma })
}

/// Error measure between iterates `2k+2` and `2k` of the transport part.
pub fn micro_error(a: &MomentState, b: &MomentState, dt: f64, dx: f64) -> f64 {
    full_norms(a, b, dx).0.sqrt() / dt
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubStepOutcome {
    pub state: MomentState,
    pub iters: usize,
    pub last_error: f64,
}

/// Alternates odd and even iterations from the step-`n` state until the
/// stopping rule holds. `iters` counts odd/even pairs.
pub fn micro_step(ctx: &StepContext, base: &MomentState) -> Result<SubStepOutcome> {
    let mut it = Iterate::new(ctx, base.clone());
    let dx = ctx.dx();
    let mut err = f64::INFINITY;
    for iter in 1..=ctx.control.max_iters {
        let odd = micro_odd_sweep(ctx, base, &it)?;
        let even = micro_even_solve(ctx, base, &odd)?;
        let (diff, size) = full_norms(&even.state, &it.state, dx);
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
        stage: "transport",
        iters: ctx.control.max_iters,
        last_error: err,
    })
}
