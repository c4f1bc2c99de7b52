//! Uniform 1D finite-volume grid, moment storage and ghost cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 4;

    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < Self::MIN_CELLS {
            return Err(Error::Config(format!(
                "grid needs at least {} cells, got {}",
                Self::MIN_CELLS,
                self.n
            )));
        }
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::Config(format!(
                "invalid domain [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    #[inline]
    pub fn center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.center(j)).collect()
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// Moments `psi_0..psi_M` and temperatures per cell.
///
/// `psi` is row-major: cell `j` owns `psi[j*(m+1)..(j+1)*(m+1)]`.
/// The density is not stored separately; `rho = psi_0 / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub m: usize,
    pub psi: Vec<f64>,
    pub te: Vec<f64>,
    pub ti: Vec<f64>,
    pub t: f64,
}

impl MomentState {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            m,
            psi: vec![0.0; n * (m + 1)],
            te: vec![0.0; n],
            ti: vec![0.0; n],
            t: 0.0,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.te.len()
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.m + 1
    }

    #[inline]
    pub fn psi(&self, j: usize, l: usize) -> f64 {
        self.psi[j * (self.m + 1) + l]
    }

    #[inline]
    pub fn psi_mut(&mut self, j: usize, l: usize) -> &mut f64 {
        let s = self.m + 1;
        &mut self.psi[j * s + l]
    }

    #[inline]
    pub fn rho(&self, j: usize) -> f64 {
        0.5 * self.psi[j * (self.m + 1)]
    }

    #[inline]
    pub fn set_rho(&mut self, j: usize, rho: f64) {
        let s = self.m + 1;
        self.psi[j * s] = 2.0 * rho;
    }

    pub fn moments(&self, j: usize) -> &[f64] {
        let s = self.m + 1;
        &self.psi[j * s..(j + 1) * s]
    }

    /// Column `l` of the moment array.
    pub fn moment_field(&self, l: usize) -> Vec<f64> {
        (0..self.n()).map(|j| self.psi(j, l)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.psi.len() != self.n() * (self.m + 1) || self.ti.len() != self.n() {
            return Err(Error::Internal("inconsistent state shapes".into()));
        }
        for j in 0..self.n() {
            if !(self.psi(j, 0) >= 0.0) {
                return Err(Error::solver(j, format!("negative psi_0 = {}", self.psi(j, 0))));
            }
            if !(self.te[j] > 0.0 && self.te[j].is_finite()) {
                return Err(Error::solver(j, format!("non-positive T_e = {}", self.te[j])));
            }
            if !(self.ti[j] > 0.0 && self.ti[j].is_finite()) {
                return Err(Error::solver(j, format!("non-positive T_i = {}", self.ti[j])));
            }
            if self.moments(j).iter().any(|v| !v.is_finite()) {
                return Err(Error::solver(j, "non-finite moment"));
            }
        }
        Ok(())
    }
}

/// Temperatures imposed by an inflow boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryState {
    pub te: f64,
    pub ti: f64,
    pub tr: f64,
}

impl BoundaryState {
    pub fn equilibrium(t: f64) -> Self {
        Self { te: t, ti: t, tr: t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Periodic,
    Inflow {
        left: BoundaryState,
        right: BoundaryState,
    },
}

impl BoundarySpec {
    pub fn is_periodic(&self) -> bool {
        matches!(self, BoundarySpec::Periodic)
    }

    pub fn validate(&self) -> Result<()> {
        if let BoundarySpec::Inflow { left, right } = self {
            for b in [left, right] {
                if [b.te, b.ti, b.tr].iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                    return Err(Error::Config(
                        "inflow boundary temperatures must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Which side of the domain a ghost cell sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Scalar field padded with `width` ghost cells on each side.
///
/// Periodic boundaries wrap; inflow boundaries repeat the supplied values.
pub fn pad_scalar(values: &[f64], bc: &BoundarySpec, width: usize, ghost: impl Fn(Side) -> f64) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n + 2 * width);
    for g in 0..width {
        out.push(match bc {
            BoundarySpec::Periodic => values[n - width + g],
            BoundarySpec::Inflow { .. } => ghost(Side::Left),
        });
    }
    out.extend_from_slice(values);
    for g in 0..width {
        out.push(match bc {
            BoundarySpec::Periodic => values[g % n],
            BoundarySpec::Inflow { .. } => ghost(Side::Right),
        });
    }
    out
}

/// Moments and temperatures with ghost cells. Interior cell `j` sits at
/// extended index `j + width`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub width: usize,
    pub m: usize,
    pub psi: Vec<f64>,
    pub te: Vec<f64>,
    pub ti: Vec<f64>,
}

impl ExtendedState {
    #[inline]
    pub fn len(&self) -> usize {
        self.te.len()
    }

    pub fn is_empty(&self) -> bool {
        self.te.is_empty()
    }

    #[inline]
    pub fn psi(&self, i: usize, l: usize) -> f64 {
        self.psi[i * (self.m + 1) + l]
    }

    pub fn moment_field(&self, l: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.psi(i, l)).collect()
    }
}

/// Moment vector of an isotropic equilibrium ghost at radiation temperature `tr`.
pub fn inflow_ghost_moments(tr: f64, m: usize, params: &PhysicalParams) -> Vec<f64> {
    let mut v = vec![0.0; m + 1];
    v[0] = params.emission(tr);
    v
}

pub fn boundary_state(bc: &BoundarySpec, side: Side) -> Option<BoundaryState> {
    match bc {
        BoundarySpec::Periodic => None,
        BoundarySpec::Inflow { left, right } => Some(match side {
            Side::Left => *left,
            Side::Right => *right,
        }),
    }
}

pub fn extend_with_ghosts(
    state: &MomentState,
    bc: &BoundarySpec,
    width: usize,
    params: &PhysicalParams,
) -> Result<ExtendedState> {
    if !(1..=2).contains(&width) {
        return Err(Error::Config(format!("ghost width must be 1 or 2, got {width}")));
    }
    let n = state.n();
    let s = state.m + 1;
    let mut psi = Vec::with_capacity((n + 2 * width) * s);
    let ghost_moments = |side: Side| -> Vec<f64> {
        let b = boundary_state(bc, side).expect("inflow boundary");
        inflow_ghost_moments(b.tr, state.m, params)
    };
    for g in 0..width {
        match bc {
            BoundarySpec::Periodic => {
                let j = n + g - width;
                psi.extend_from_slice(state.moments(j));
            }
            BoundarySpec::Inflow { .. } => psi.extend(ghost_moments(Side::Left)),
        }
    }
    psi.extend_from_slice(&state.psi);
    for g in 0..width {
        match bc {
            BoundarySpec::Periodic => psi.extend_from_slice(state.moments(g)),
            BoundarySpec::Inflow { .. } => psi.extend(ghost_moments(Side::Right)),
        }
    }
    let te = pad_scalar(&state.te, bc, width, |side| {
        boundary_state(bc, side).map_or(0.0, |b| b.te)
    });
    let ti = pad_scalar(&state.ti, bc, width, |side| {
        boundary_state(bc, side).map_or(0.0, |b| b.ti)
    });
    Ok(ExtendedState {
        width,
        m: state.m,
        psi,
        te,
        ti,
    })
}

/// Equilibrium state `T_e = T_i = T(x)`, `psi_0 = a c T^4`, higher moments zero.
pub fn init_equilibrium(
    grid: &Grid1D,
    profile: impl Fn(f64) -> f64,
    m: usize,
    params: &PhysicalParams,
) -> Result<MomentState> {
    let n = grid.n;
    let mut state = MomentState::zeros(n, m);
    for j in 0..n {
        let t = profile(grid.center(j));
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!(
                "initial temperature must be positive, got {t} at x = {}",
                grid.center(j)
            )));
        }
        state.te[j] = t;
        state.ti[j] = t;
        *state.psi_mut(j, 0) = params.emission(t);
    }
    Ok(state)
}
