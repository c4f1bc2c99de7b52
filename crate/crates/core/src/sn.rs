//! Discrete-ordinates reference solver: fully implicit in time, first-order
//! upwind in space, Gauss-Legendre directions.

use crate::angular::{gauss_legendre, project_to_moments, Quadrature};
use crate::context::{LocalSystem, StepContext};
use crate::error::{Error, Result};
use crate::grid::{boundary_state, Grid1D, MomentState, Side};
use crate::integrator::{march, StepReport, Timed};
use crate::macroscopic::{fold_pointwise_conduction, parabolic_solve};
use crate::physics::{PhysicalParams, SourceRates};

/// Intensities on cells times directions, row-major by cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinateField {
    pub quad: Quadrature,
    pub psi: Vec<f64>,
    pub te: Vec<f64>,
    pub ti: Vec<f64>,
    pub t: f64,
}

impl OrdinateField {
    /// Isotropic equilibrium `psi = a c T^4 / 2`.
    pub fn equilibrium(
        grid: &Grid1D,
        profile: impl Fn(f64) -> f64,
        directions: usize,
        params: &PhysicalParams,
    ) -> Result<Self> {
        let quad = gauss_legendre(directions)?;
        let mut psi = Vec::with_capacity(grid.n * directions);
        let mut te = Vec::with_capacity(grid.n);
        for j in 0..grid.n {
            let t = profile(grid.center(j));
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!(
                    "initial temperature must be positive, got {t}"
                )));
            }
            psi.extend(std::iter::repeat_n(0.5 * params.emission(t), directions));
            te.push(t);
        }
        Ok(Self {
            quad,
            psi,
            ti: te.clone(),
            te,
            t: 0.0,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.te.len()
    }

    #[inline]
    pub fn directions(&self) -> usize {
        self.quad.len()
    }

    #[inline]
    pub fn psi(&self, j: usize, m: usize) -> f64 {
        self.psi[j * self.quad.len() + m]
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        let d = self.quad.len();
        &self.psi[j * d..(j + 1) * d]
    }

    /// `sum_m w_m psi_m`.
    pub fn angle_integral(&self, j: usize) -> f64 {
        self.cell(j)
            .iter()
            .zip(&self.quad.weights)
            .map(|(p, w)| p * w)
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        for j in 0..self.n() {
            if let Some(v) = self.cell(j).iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                return Err(Error::solver(
                    j,
                    format!("intensity {v:e} is negative or non-finite"),
                ));
            }
            if !(self.te[j] > 0.0 && self.ti[j] > 0.0) {
                return Err(Error::solver(j, "non-positive temperature"));
            }
        }
        Ok(())
    }
}

/// `sum_j dx ((1/c) sum_m w_m psi_m + E_e + E_i)`.
pub fn sn_total_energy(field: &OrdinateField, params: &PhysicalParams, grid: &Grid1D) -> f64 {
    (0..field.n())
        .map(|j| {
            let x = grid.center(j);
            grid.dx()
                * (field.angle_integral(j) / params.c + params.material_energy(x, field.te[j], field.ti[j]))
        })
        .sum()
}

/// Legendre moments `psi_0..psi_M` per cell.
pub fn sn_to_moments(field: &OrdinateField, m: usize) -> Result<MomentState> {
    let mut out = MomentState::zeros(field.n(), m);
    for j in 0..field.n() {
        let mom = project_to_moments(field.cell(j), &field.quad, m)?;
        out.psi[j * (m + 1)..(j + 1) * (m + 1)].copy_from_slice(&mom);
    }
    out.te.clone_from(&field.te);
    out.ti.clone_from(&field.ti);
    out.t = field.t;
    Ok(out)
}

fn ghost(ctx: &StepContext, side: Side) -> f64 {
    let b = boundary_state(ctx.bc, side).expect("inflow");
    0.5 * ctx.params.emission(b.tr)
}

/// Upwind neighbour intensity of cell `j` in direction `m`.
fn upwind(ctx: &StepContext, f: &OrdinateField, j: usize, m: usize) -> f64 {
    let n = f.n();
    let periodic = ctx.bc.is_periodic();
    if f.quad.nodes[m] > 0.0 {
        match j {
            0 if periodic => f.psi(n - 1, m),
            0 => ghost(ctx, Side::Left),
            _ => f.psi(j - 1, m),
        }
    } else if j + 1 == n {
        if periodic {
            f.psi(0, m)
        } else {
            ghost(ctx, Side::Right)
        }
    } else {
        f.psi(j + 1, m)
    }
}

/// Cell systems with the intensities eliminated against lagged upwind values
/// from `it`; opacities `sigma`, heat capacities lagged at `it`.
fn cell_systems(
    ctx: &StepContext,
    base: &OrdinateField,
    it: &OrdinateField,
    sigma: &[f64],
    q: SourceRates,
) -> Vec<LocalSystem> {
    let p = ctx.params;
    let a = ctx.a_moment();
    let k = ctx.eps() / ctx.dx();
    let e2dt = ctx.eps() * ctx.eps() / ctx.dt;
    let ac = p.a * p.c;
    (0..base.n())
        .map(|j| {
            let sg = sigma[j];
            // sum_m w psi_m = r + s_frac a c T^4, s_frac = 1 - oms
            let (mut r, mut s_frac, mut oms) = (0.0, 0.0, 0.0);
            for m in 0..base.directions() {
                let w = base.quad.weights[m];
                let km = k * base.quad.nodes[m].abs();
                let d = a + km + sg;
                r += w * (a * base.psi(j, m) + km * upwind(ctx, it, j, m) + 0.5 * q.radiation) / d;
                s_frac += w * 0.5 * sg / d;
                oms += w * 0.5 * (a + km) / d;
            }
            let x = ctx.grid.center(j);
            let be = e2dt * p.cve.secant(x, base.te[j], it.te[j]);
            let bi = e2dt * p.cvi.secant(x, base.ti[j], it.ti[j]);
            let (a_rho, rhs_rho) = if sg > 0.0 {
                (2.0 * sg * oms / s_frac, r * sg / s_frac)
            } else {
                (1.0, 0.5 * r)
            };
            LocalSystem {
                a_rho,
                rhs_rho,
                diag_e: be,
                rhs_e: be * base.te[j] + q.electron,
                diag_i: bi,
                rhs_i: bi * base.ti[j] + q.ion,
                h: p.c * p.kappa.eval(x, it.te[j]),
                s: 2.0 * sg,
                ac,
            }
        })
        .collect()
}

/// Transport sweep of every direction with emission frozen at `te`.
fn sweep(ctx: &StepContext, base: &OrdinateField, te: &[f64], sigma: &[f64], q: SourceRates) -> Vec<f64> {
    let n = base.n();
    let nd = base.directions();
    let a = ctx.a_moment();
    let k = ctx.eps() / ctx.dx();
    let mut psi = vec![0.0; n * nd];
    for m in 0..nd {
        let mu = base.quad.nodes[m];
        let km = k * mu.abs();
        // psi_j = f_j psi_up + g_j along the sweep order
        let coef = |j: usize| {
            let d = a + km + sigma[j];
            let src = a * base.psi(j, m) + 0.5 * (sigma[j] * ctx.params.emission(te[j]) + q.radiation);
            (km / d, src / d)
        };
        let order: Vec<usize> = if mu > 0.0 {
            (0..n).collect()
        } else {
            (0..n).rev().collect()
        };
        let mut inflow = if ctx.bc.is_periodic() {
            let (mut pf, mut qf) = (1.0, 0.0);
            for &j in &order {
                let (f, g) = coef(j);
                pf *= f;
                qf = f * qf + g;
            }
            qf / (1.0 - pf)
        } else {
            ghost(ctx, if mu > 0.0 { Side::Left } else { Side::Right })
        };
        for &j in &order {
            let (f, g) = coef(j);
            inflow = f * inflow + g;
            psi[j * nd + m] = inflow;
        }
    }
    psi
}

fn sn_norms(a: &OrdinateField, b: &OrdinateField, dx: f64) -> (f64, f64) {
    let nd = a.directions();
    let (mut diff, mut size) = (0.0, 0.0);
    for j in 0..a.n() {
        for m in 0..nd {
            let w = a.quad.weights[m];
            let d = a.psi(j, m) - b.psi(j, m);
            diff += w * d * d;
            size += w * b.psi(j, m) * b.psi(j, m);
        }
        let (de, di) = (a.te[j] - b.te[j], a.ti[j] - b.ti[j]);
        diff += de * de + di * di;
        size += b.te[j] * b.te[j] + b.ti[j] * b.ti[j];
    }
    (dx * diff, dx * size)
}

/// One backward-Euler step. Each outer iteration solves the cell quartics
/// (conduction split pointwise), then the implicit conduction/coupling
/// system, then sweeps all directions with the new emission. Returns the
/// new field and the number of outer iterations.
pub fn sn_step(ctx: &StepContext, base: &OrdinateField) -> Result<(OrdinateField, usize)> {
    let q = ctx.params.source_rates(base.t + ctx.dt);
    let mut it = base.clone();
    let mut err = f64::INFINITY;
    for iter in 1..=ctx.control.max_iters {
        let sigma = ctx.opacities(&it.te);
        let mut systems = cell_systems(ctx, base, &it, &sigma, q);
        fold_pointwise_conduction(ctx, &it.te, &it.ti, &mut systems);
        let mut te1 = it.te.clone();
        let mut ti1 = it.ti.clone();
        for (j, sys) in systems.iter().enumerate() {
            let (_, te, ti) = sys.solve(j)?;
            te1[j] = te;
            ti1[j] = ti;
        }

        let sigma = ctx.opacities(&te1);
        let lag = OrdinateField {
            te: te1.clone(),
            ti: ti1.clone(),
            ..it.clone()
        };
        let systems = cell_systems(ctx, base, &lag, &sigma, q);
        let sol = parabolic_solve(ctx, &te1, &ti1, &systems)?;

        let mut next = it.clone();
        for (j, (_, te, ti)) in sol.into_iter().enumerate() {
            next.te[j] = te;
            next.ti[j] = ti;
        }
        let sigma = ctx.opacities(&next.te);
        next.psi = sweep(ctx, base, &next.te, &sigma, q);

        let (diff, size) = sn_norms(&next, &it, ctx.dx());
        let prev = err;
        err = diff.sqrt() / ctx.dt;
        let done = ctx.control.converged(err, prev, diff.sqrt(), size.sqrt());
        it = next;
        if done {
            it.t = base.t + ctx.dt;
            it.validate()?;
            return Ok((it, iter));
        }
    }
    Err(Error::NotConverged {
        stage: "discrete-ordinates",
        iters: ctx.control.max_iters,
        last_error: err,
    })
}

impl Timed for OrdinateField {
    fn time(&self) -> f64 {
        self.t
    }
    fn set_time(&mut self, t: f64) {
        self.t = t;
    }
}

/// Steps through each output time with nominal step `dt`. Reports carry the
/// outer iteration count as `micro_iters`.
pub fn sn_integrate(
    ctx: &StepContext,
    dt: f64,
    times: &[f64],
    initial: OrdinateField,
    on_step: impl FnMut(&StepReport),
) -> Result<(Vec<OrdinateField>, Vec<StepReport>)> {
    march(
        times,
        dt,
        initial,
        |state, h| {
            let step = StepContext { dt: h, ..*ctx };
            let (next, iters) = sn_step(&step, state)?;
            let report = StepReport {
                t: next.t,
                dt: h,
                micro_iters: iters,
                macro_iters: 0,
                energy: sn_total_energy(&next, ctx.params, ctx.grid),
                fallback: false,
            };
            Ok((next, report))
        },
        on_step,
    )
}
