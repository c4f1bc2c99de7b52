//! Shared per-step inputs of the split solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{boundary_state, pad_scalar, BoundarySpec, Grid1D, MomentState, Side};
use crate::physics::{conduction_unchecked, PhysicalParams, Species};
use crate::spatial::{alpha_coeff, ReconstructionMode};

/// Stopping rule of the alternating iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationControl {
    /// Threshold on the error measure.
    pub tol: f64,
    pub max_iters: usize,
    /// Iterations also stop when the error stops decreasing while
    /// successive iterates already agree to `roundoff * |iterate|` in the same
    /// weighted norm: for stiff cells the error measure has a rounding floor
    /// that can sit above `tol`.
    #[serde(default = "default_roundoff")]
    pub roundoff: f64,
}

fn default_roundoff() -> f64 {
    1e-10
}

impl Default for IterationControl {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 200,
            roundoff: default_roundoff(),
        }
    }
}

impl IterationControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iters == 0 || !(self.roundoff >= 0.0) {
            return Err(Error::Config(
                "iteration control needs tol > 0, max_iters >= 1, roundoff >= 0".into(),
            ));
        }
        Ok(())
    }

    /// `err` is the error measure, `prev_err` its previous value, `change`
    /// and `size` the undivided weighted norms of the last increment and of
    /// the iterate.
    #[inline]
    pub fn converged(&self, err: f64, prev_err: f64, change: f64, size: f64) -> bool {
        err < self.tol || (err >= prev_err && change <= self.roundoff * size)
    }
}

/// How the exchange terms are divided between the two split systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// Halves of the emission/absorption and coupling terms in each part.
    #[default]
    AsymptoticPreserving,
    /// Emission/absorption entirely in the transport part, coupling and
    /// conduction entirely in the material part.
    Naive,
}

/// Fraction of the emission/absorption and coupling terms carried by one part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub sigma: f64,
    pub kappa: f64,
}

impl SplitKind {
    pub fn micro(self) -> Weights {
        match self {
            SplitKind::AsymptoticPreserving => Weights {
                sigma: 0.5,
                kappa: 0.5,
            },
            SplitKind::Naive => Weights {
                sigma: 1.0,
                kappa: 0.0,
            },
        }
    }

    pub fn macro_part(self) -> Weights {
        match self {
            SplitKind::AsymptoticPreserving => Weights {
                sigma: 0.5,
                kappa: 0.5,
            },
            SplitKind::Naive => Weights {
                sigma: 0.0,
                kappa: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub grid: &'a Grid1D,
    pub params: &'a PhysicalParams,
    pub bc: &'a BoundarySpec,
    pub dt: f64,
    pub recon: ReconstructionMode,
    pub control: IterationControl,
    pub split: SplitKind,
}

impl<'a> StepContext<'a> {
    #[inline]
    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.params.epsilon
    }

    /// `2 eps^2 / (c dt)`, the density time-derivative coefficient.
    #[inline]
    pub fn a_rho(&self) -> f64 {
        2.0 * self.eps() * self.eps() / (self.params.c * self.dt)
    }

    /// `eps^2 / (c dt)`, the higher-moment time-derivative coefficient.
    #[inline]
    pub fn a_moment(&self) -> f64 {
        self.eps() * self.eps() / (self.params.c * self.dt)
    }

    /// Position used to evaluate coefficients of a ghost cell.
    pub fn ghost_x(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.grid.x_min - 0.5 * self.dx(),
            Side::Right => self.grid.x_max + 0.5 * self.dx(),
        }
    }

    pub fn opacity_at(&self, j: usize, te: f64) -> f64 {
        self.params.opacity.eval(self.grid.center(j), te)
    }

    pub fn opacities(&self, te: &[f64]) -> Vec<f64> {
        te.iter()
            .enumerate()
            .map(|(j, &t)| self.opacity_at(j, t))
            .collect()
    }

    /// Opacity padded with `width` ghosts.
    pub fn padded_opacity(&self, sigma: &[f64], width: usize) -> Vec<f64> {
        pad_scalar(sigma, self.bc, width, |side| {
            let b = boundary_state(self.bc, side).expect("inflow");
            self.params.opacity.eval(self.ghost_x(side), b.te)
        })
    }

    /// Dissipation coefficients at the `n + 1` interfaces.
    pub fn alphas(&self, sigma: &[f64]) -> Vec<f64> {
        let s = self.padded_opacity(sigma, 1);
        s.windows(2)
            .map(|w| alpha_coeff(w[0], w[1], self.eps(), self.params.c))
            .collect()
    }

    /// Coefficients of the density flux: as [`Self::alphas`], except that
    /// inflow faces take the optically thin value `c / eps^2`, so the
    /// equilibrium ghost enters through the upwind flux even next to an
    /// opaque cell.
    pub fn density_alphas(&self, alpha: &[f64]) -> Vec<f64> {
        let mut a = alpha.to_vec();
        if !self.bc.is_periodic() {
            let thin = alpha_coeff(0.0, 0.0, self.eps(), self.params.c);
            let n = a.len() - 1;
            a[0] = thin;
            a[n] = thin;
        }
        a
    }

    /// Moment `l` padded with `width` ghosts.
    pub fn padded_moment(&self, state: &MomentState, l: usize, width: usize) -> Vec<f64> {
        self.pad_moment_field(&state.moment_field(l), l, width)
    }

    pub fn pad_moment_field(&self, field: &[f64], l: usize, width: usize) -> Vec<f64> {
        pad_scalar(field, self.bc, width, |side| {
            if l == 0 {
                let b = boundary_state(self.bc, side).expect("inflow");
                self.params.emission(b.tr)
            } else {
                0.0
            }
        })
    }

    pub fn padded_temperature(&self, t: &[f64], species: Species, width: usize) -> Vec<f64> {
        pad_scalar(t, self.bc, width, |side| {
            let b = boundary_state(self.bc, side).expect("inflow");
            match species {
                Species::Electron => b.te,
                Species::Ion => b.ti,
            }
        })
    }

    /// Conduction coefficients `K T^{5/2}` padded with one ghost.
    pub fn padded_conduction(&self, t: &[f64], species: Species) -> Vec<f64> {
        let k = self.params.conduction_base(species);
        self.padded_temperature(t, species, 1)
            .into_iter()
            .map(|v| conduction_unchecked(k, v))
            .collect()
    }
}

/// Cell-local elimination shared by the nonlinear sub-steps.
///
/// Solves
/// `a_rho rho = rhs_rho - s/2 (2 rho - a c T_e^4)`,
/// `diag_e T_e = rhs_e + h (T_i - T_e) + s/2 (2 rho - a c T_e^4)`,
/// `diag_i T_i = rhs_i + h (T_e - T_i)`
/// for `(rho, T_e, T_i)`, with `s` the weighted opacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSystem {
    pub a_rho: f64,
    pub rhs_rho: f64,
    pub diag_e: f64,
    pub rhs_e: f64,
    pub diag_i: f64,
    pub rhs_i: f64,
    pub h: f64,
    pub s: f64,
    pub ac: f64,
}

impl LocalSystem {
    pub fn quartic(&self) -> crate::quartic::QuarticCoefficients {
        let ion = self.diag_i + self.h;
        let rad = self.a_rho + self.s;
        crate::quartic::QuarticCoefficients {
            c4: self.s * self.a_rho * self.ac / (2.0 * rad),
            c1: self.diag_e + self.h * self.diag_i / ion,
            c0: -(self.rhs_e + self.h * self.rhs_i / ion + self.s * self.rhs_rho / rad),
        }
    }

    pub fn back_substitute(&self, te: f64) -> (f64, f64) {
        let te4 = te * te * te * te;
        let rho = (self.rhs_rho + 0.5 * self.s * self.ac * te4) / (self.a_rho + self.s);
        let ti = (self.rhs_i + self.h * te) / (self.diag_i + self.h);
        (rho, ti)
    }

    /// Returns `(rho, T_e, T_i)`.
    pub fn solve(&self, cell: usize) -> Result<(f64, f64, f64)> {
        let q = self.quartic();
        let te = crate::quartic::solve_unique_positive_root(q, crate::quartic::ROOT_TOL, cell)?;
        let (rho, ti) = self.back_substitute(te);
        Ok((rho, te, ti))
    }
}

/// Weighted squared norms used by the stopping rules.
pub(crate) fn moment_weight(l: usize) -> f64 {
    if l == 0 {
        2.0
    } else {
        2.0 / (2 * l + 1) as f64
    }
}

/// `(sum of weighted squared differences, sum of weighted squares of b)`
/// over moments and temperatures, times `dx`.
pub(crate) fn full_norms(a: &MomentState, b: &MomentState, dx: f64) -> (f64, f64) {
    let s = a.m + 1;
    let mut diff = 0.0;
    let mut size = 0.0;
    for j in 0..a.n() {
        for l in 0..s {
            let w = moment_weight(l);
            let d = a.psi[j * s + l] - b.psi[j * s + l];
            diff += w * d * d;
            size += w * b.psi[j * s + l] * b.psi[j * s + l];
        }
        let de = a.te[j] - b.te[j];
        let di = a.ti[j] - b.ti[j];
        diff += de * de + di * di;
        size += b.te[j] * b.te[j] + b.ti[j] * b.ti[j];
    }
    (dx * diff, dx * size)
}

pub(crate) fn temperature_norms(a: &MomentState, b: &MomentState, dx: f64) -> (f64, f64) {
    let mut diff = 0.0;
    let mut size = 0.0;
    for j in 0..a.n() {
        let de = a.te[j] - b.te[j];
        let di = a.ti[j] - b.ti[j];
        diff += de * de + di * di;
        size += b.te[j] * b.te[j] + b.ti[j] * b.ti[j];
    }
    (dx * diff, dx * size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_elimination_satisfies_all_three_equations() {
        let sys = LocalSystem {
            a_rho: 2.0,
            rhs_rho: 2.5,
            diag_e: 0.3,
            rhs_e: 0.4,
            diag_i: 0.2,
            rhs_i: 0.1,
            h: 0.7,
            s: 3.0,
            ac: 1.3,
        };
        let (rho, te, ti) = sys.solve(0).unwrap();
        let em = 0.5 * sys.s * (2.0 * rho - sys.ac * te.powi(4));
        assert!((sys.a_rho * rho - (sys.rhs_rho - em)).abs() < 1e-13);
        assert!((sys.diag_e * te - (sys.rhs_e + sys.h * (ti - te) + em)).abs() < 1e-13);
        assert!((sys.diag_i * ti - (sys.rhs_i + sys.h * (te - ti))).abs() < 1e-13);
    }

    #[test]
    fn split_weights() {
        let ap = SplitKind::AsymptoticPreserving;
        assert_eq!(ap.micro().sigma + ap.macro_part().sigma, 1.0);
        let nv = SplitKind::Naive;
        assert_eq!(nv.micro().sigma, 1.0);
        assert_eq!(nv.macro_part().kappa, 1.0);
        assert_eq!(nv.micro().kappa + nv.macro_part().kappa, 1.0);
    }
}
