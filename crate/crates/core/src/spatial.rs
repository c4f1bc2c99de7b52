//! Interface reconstruction, the two P_N flux families and the conduction
//! stencil.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WENO_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionMode {
    #[default]
    Constant,
    #[serde(alias = "linear")]
    LinearMinmod,
    Weno3,
}

impl ReconstructionMode {
    pub fn ghost_width(self) -> usize {
        match self {
            ReconstructionMode::Constant => 1,
            ReconstructionMode::LinearMinmod | ReconstructionMode::Weno3 => 2,
        }
    }
}

impl std::str::FromStr for ReconstructionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "linear" | "linear_minmod" | "minmod" => Ok(Self::LinearMinmod),
            "weno3" | "weno" => Ok(Self::Weno3),
            other => Err(Error::Config(format!(
                "unknown reconstruction '{other}' (expected constant, linear or weno3)"
            ))),
        }
    }
}

/// Left and right traces at every interface `k = 0..=n`; interface `k`
/// separates cells `k-1` and `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceValues {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl InterfaceValues {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    #[inline]
    pub fn avg(&self, k: usize) -> f64 {
        0.5 * (self.left[k] + self.right[k])
    }

    #[inline]
    pub fn jump(&self, k: usize) -> f64 {
        self.right[k] - self.left[k]
    }
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// `(value at the left edge, value at the right edge)` of the cell with
/// neighbours `fm`, `f`, `fp`.
#[inline]
fn edge_values(fm: f64, f: f64, fp: f64, mode: ReconstructionMode) -> (f64, f64) {
    match mode {
        ReconstructionMode::Constant => (f, f),
        ReconstructionMode::LinearMinmod => {
            let s = minmod(f - fm, fp - f);
            (f - 0.5 * s, f + 0.5 * s)
        }
        ReconstructionMode::Weno3 => {
            let dm = f - fm;
            let dp = fp - f;
            let bm = (WENO_EPS + dm * dm).powi(2);
            let bp = (WENO_EPS + dp * dp).powi(2);

            let l1 = 1.5 * f - 0.5 * fm;
            let l2 = 0.5 * f + 0.5 * fp;
            let wl1 = (1.0 / 3.0) / bm;
            let wl2 = (2.0 / 3.0) / bp;
            let right = (wl1 * l1 + wl2 * l2) / (wl1 + wl2);

            let r1 = 1.5 * f - 0.5 * fp;
            let r2 = 0.5 * f + 0.5 * fm;
            let wr1 = (1.0 / 3.0) / bp;
            let wr2 = (2.0 / 3.0) / bm;
            let left = (wr1 * r1 + wr2 * r2) / (wr1 + wr2);
            (left, right)
        }
    }
}

/// Reconstructs interface traces from a field padded with `width` ghosts per side.
pub fn reconstruct(field: &[f64], width: usize, mode: ReconstructionMode) -> Result<InterfaceValues> {
    if width < mode.ghost_width() {
        return Err(Error::Config(format!(
            "{mode:?} reconstruction needs {} ghost cells, got {width}",
            mode.ghost_width()
        )));
    }
    if field.len() < 2 * width + 1 {
        return Err(Error::Internal("field shorter than its ghost layers".into()));
    }
    let n = field.len() - 2 * width;
    let mut left = vec![0.0; n + 1];
    let mut right = vec![0.0; n + 1];
    // cells -1..=n in interior numbering
    for i in (width - 1)..=(width + n) {
        let f = field[i];
        let (lo, hi) = if mode == ReconstructionMode::Constant {
            (f, f)
        } else {
            edge_values(field[i - 1], f, field[i + 1], mode)
        };
        // cell i-width has left interface i-width and right interface i-width+1
        let cell = i as isize - width as isize;
        if cell >= 0 {
            right[cell as usize] = lo;
        }
        if cell < n as isize {
            left[(cell + 1) as usize] = hi;
        }
    }
    Ok(InterfaceValues { left, right })
}

/// Dissipation coefficient `c/eps^2 * exp(-(sigma_j + sigma_{j+1}) / (2 eps^2))`.
#[inline]
pub fn alpha_coeff(sigma_j: f64, sigma_j1: f64, eps: f64, c: f64) -> f64 {
    let e2 = eps * eps;
    c / e2 * (-(sigma_j + sigma_j1) / (2.0 * e2)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxFamily {
    /// Serves the `d psi_{l+1} / dx` term of equation `l`, `l = 0..M-1`.
    Old,
    /// Serves the `d psi_{l-1} / dx` term of equation `l`, `l = 1..M`.
    New,
}

/// Coefficient multiplying the transported moment in equation `l`.
#[inline]
pub fn flux_coefficient(family: FluxFamily, l: usize) -> f64 {
    match family {
        FluxFamily::Old => (l + 1) as f64 / (2 * l + 1) as f64,
        FluxFamily::New => l as f64 / (2 * l + 1) as f64,
    }
}

/// Interface fluxes of one family for equation `l`.
///
/// `transported` holds the traces of `psi_{l+1}` (old family) or
/// `psi_{l-1}` (new family); `dissipated` holds `psi_l` and is required by
/// the old family and by the new family at `l = M`.
pub fn pn_interface_flux(
    family: FluxFamily,
    l: usize,
    m: usize,
    transported: &InterfaceValues,
    dissipated: Option<&InterfaceValues>,
    alpha: &[f64],
) -> Result<Vec<f64>> {
    let needs_dissipation = match family {
        FluxFamily::Old if l < m => true,
        FluxFamily::New if (1..m).contains(&l) => false,
        FluxFamily::New if l == m => true,
        _ => {
            return Err(Error::Internal(format!(
                "moment index {l} outside the {family:?} family range for M = {m}"
            )))
        }
    };
    if alpha.len() != transported.len() {
        return Err(Error::Internal("alpha and interface counts differ".into()));
    }
    let coef = flux_coefficient(family, l);
    let mut out: Vec<f64> = (0..transported.len())
        .map(|k| coef * transported.avg(k))
        .collect();
    if needs_dissipation {
        let d = dissipated
            .ok_or_else(|| Error::Internal(format!("flux for l = {l} needs the dissipated moment")))?;
        for (k, o) in out.iter_mut().enumerate() {
            *o -= 0.5 * alpha[k] * d.jump(k);
        }
    }
    Ok(out)
}

/// Cell differences `F_{j+1/2} - F_{j-1/2}` of an interface flux.
pub fn flux_difference(flux: &[f64]) -> Vec<f64> {
    flux.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Scalar tridiagonal operator. Row `j` reads
/// `lower[j] T_{j-1} + diag[j] T_j + upper[j] T_{j+1}`; `lower[0]` and
/// `upper[n-1]` act on the ghost (or wrapped) neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

#[inline]
fn face_means(d: &[f64]) -> Vec<f64> {
    d.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Discrete `d/dx (D dT/dx)` from fields padded with one ghost per side.
pub fn conduction_apply(d: &[f64], t: &[f64], dx: f64) -> Vec<f64> {
    debug_assert_eq!(d.len(), t.len());
    let faces = face_means(d);
    let inv = 1.0 / (dx * dx);
    (1..t.len() - 1)
        .map(|i| (faces[i] * (t[i + 1] - t[i]) - faces[i - 1] * (t[i] - t[i - 1])) * inv)
        .collect()
}

/// Matrix form of [`conduction_apply`] for coefficients padded with one ghost per side.
pub fn conduction_matrix(d: &[f64], dx: f64) -> Tridiagonal {
    let faces = face_means(d);
    let inv = 1.0 / (dx * dx);
    let n = d.len() - 2;
    let mut lower = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for j in 0..n {
        let dm = faces[j] * inv;
        let dp = faces[j + 1] * inv;
        lower.push(dm);
        upper.push(dp);
        diag.push(-(dm + dp));
    }
    Tridiagonal { lower, diag, upper }
}
