use crate::context::{IterationControl, SplitKind, StepContext};
use crate::grid::{BoundarySpec, Grid1D, MomentState};
use crate::physics::{CoefficientModel, PhysicalParams};
use crate::spatial::ReconstructionMode;

pub fn ap_params(eps: f64, kappa: f64) -> PhysicalParams {
    PhysicalParams {
        epsilon: eps,
        c: 1.0,
        a: 1.0,
        kappa: CoefficientModel::constant(kappa),
        cve: CoefficientModel::constant(0.1),
        cvi: CoefficientModel::constant(0.2),
        ke: 0.01,
        ki: 0.02,
        opacity: CoefficientModel::constant(10.0),
        sources: vec![],
    }
}

pub fn ctx<'a>(
    grid: &'a Grid1D,
    params: &'a PhysicalParams,
    bc: &'a BoundarySpec,
    dt: f64,
    recon: ReconstructionMode,
) -> StepContext<'a> {
    StepContext {
        grid,
        params,
        bc,
        dt,
        recon,
        control: IterationControl::default(),
        split: SplitKind::AsymptoticPreserving,
    }
}

/// Smooth state away from equilibrium: every moment and both temperatures
/// carry a different harmonic.
pub fn perturbed(grid: &Grid1D, m: usize, params: &PhysicalParams) -> MomentState {
    let mut s = MomentState::zeros(grid.n, m);
    let pi = std::f64::consts::PI;
    for j in 0..grid.n {
        let x = (grid.center(j) - grid.x_min) / grid.length();
        let t = 0.75 + 0.25 * (2.0 * pi * x).sin();
        s.te[j] = t;
        s.ti[j] = 0.9 * t + 0.05 * (2.0 * pi * x).cos();
        *s.psi_mut(j, 0) = params.emission(1.1 * t);
        for l in 1..=m {
            *s.psi_mut(j, l) = 0.05 / l as f64 * (2.0 * pi * (l as f64 + 1.0) * x).sin();
        }
    }
    s
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for p in 0..n {
        let piv = (p..n)
            .max_by(|&i, &j| a[i][p].abs().total_cmp(&a[j][p].abs()))
            .unwrap();
        a.swap(p, piv);
        b.swap(p, piv);
        for r in p + 1..n {
            let f = a[r][p] / a[p][p];
            for c in p..n {
                a[r][c] -= f * a[p][c];
            }
            b[r] -= f * b[p];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Newton's method with a finite-difference Jacobian; `x` is updated in place.
pub fn newton(f: impl Fn(&[f64]) -> Vec<f64>, x: &mut [f64], iters: usize) {
    let n = x.len();
    for _ in 0..iters {
        let f0 = f(x);
        let mut jac = vec![vec![0.0; n]; n];
        for c in 0..n {
            let h = 1e-7 * x[c].abs().max(1e-300);
            let mut xp = x.to_vec();
            xp[c] += h;
            let fp = f(&xp);
            for r in 0..n {
                jac[r][c] = (fp[r] - f0[r]) / h;
            }
        }
        let d = dense_solve(jac, f0.iter().map(|v| -v).collect());
        for c in 0..n {
            x[c] += d[c];
        }
    }
}
