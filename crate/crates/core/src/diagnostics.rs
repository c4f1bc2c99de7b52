//! Energy audits, error norms, convergence orders and moment decay.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, MomentState};
use crate::physics::PhysicalParams;

/// `sum_j dx (2 rho / c + E_e(T_e) + E_i(T_i))`, material energies in
/// integral form.
pub fn total_energy(state: &MomentState, params: &PhysicalParams, grid: &Grid1D) -> f64 {
    let dx = grid.dx();
    (0..state.n())
        .map(|j| {
            let x = grid.center(j);
            dx * (2.0 * state.rho(j) / params.c + params.material_energy(x, state.te[j], state.ti[j]))
        })
        .sum()
}

/// Radiation temperature per cell; rounding-level negative densities map to zero.
pub fn radiation_temperatures(state: &MomentState, params: &PhysicalParams) -> Vec<f64> {
    (0..state.n())
        .map(|j| (state.psi(j, 0).max(0.0) / (params.a * params.c)).powf(0.25))
        .collect()
}

/// Cell averages of `fine` on a grid coarser by an integer factor.
pub fn restrict(fine: &[f64], coarse_n: usize) -> Result<Vec<f64>> {
    if coarse_n == 0 || !fine.len().is_multiple_of(coarse_n) {
        return Err(Error::Config(format!(
            "reference resolution {} is not a multiple of {coarse_n}",
            fine.len()
        )));
    }
    let r = fine.len() / coarse_n;
    Ok(fine.chunks(r).map(|c| c.iter().sum::<f64>() / r as f64).collect())
}

/// `sqrt(dx sum (u - R u_ref)^2)` on a domain of the given length.
pub fn l2_error(field: &[f64], reference: &[f64], length: f64) -> Result<f64> {
    let r = restrict(reference, field.len())?;
    let dx = length / field.len() as f64;
    Ok((dx * field.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub errors: Vec<f64>,
}

/// Errors per resolution for a fixed list of fields.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub fields: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn new(fields: &[&str]) -> Self {
        Self {
            fields: fields.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, n: usize, errors: Vec<f64>) {
        debug_assert_eq!(errors.len(), self.fields.len());
        self.rows.push(ConvergenceRow { n, errors });
    }

    /// Observed orders between row `i - 1` and row `i`; `None` for the first row.
    pub fn orders(&self, i: usize) -> Option<Vec<f64>> {
        if i == 0 || i >= self.rows.len() {
            return None;
        }
        let (a, b) = (&self.rows[i - 1], &self.rows[i]);
        let h = (b.n as f64 / a.n as f64).ln();
        Some(
            a.errors
                .iter()
                .zip(&b.errors)
                .map(|(ea, eb)| (ea / eb).ln() / h)
                .collect(),
        )
    }

    /// Least-squares slope of `log e` against `log h` per field.
    pub fn fitted_orders(&self) -> Option<Vec<f64>> {
        if self.rows.len() < 2 {
            return None;
        }
        let xs: Vec<f64> = self.rows.iter().map(|r| -(r.n as f64).ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(
            (0..self.fields.len())
                .map(|f| {
                    let ys: Vec<f64> = self.rows.iter().map(|r| r.errors[f].ln()).collect();
                    let my = ys.iter().sum::<f64>() / ys.len() as f64;
                    xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx
                })
                .collect(),
        )
    }
}

/// Max-norms of `psi_l`, `l >= 1`, and ratios of successive ones.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentDecay {
    /// `max_j |psi_l|` for `l = 1..=M`.
    pub max_abs: Vec<f64>,
    /// `max|psi_{l+1}| / max|psi_l|` for `l = 1..M`; absent when `psi_l` vanishes.
    pub ratios: Vec<Option<f64>>,
}

pub fn moment_decay_report(state: &MomentState) -> MomentDecay {
    let max_abs: Vec<f64> = (1..=state.m)
        .map(|l| (0..state.n()).map(|j| state.psi(j, l).abs()).fold(0.0, f64::max))
        .collect();
    let ratios = max_abs
        .windows(2)
        .map(|w| if w[0] > 0.0 { Some(w[1] / w[0]) } else { None })
        .collect();
    MomentDecay { max_abs, ratios }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::init_equilibrium;
    use crate::testutil::ap_params;

    #[test]
    fn energy_examples() {
        // 0.1 + 0.2 + 2 rho / c with rho = a c / 2
        let p = ap_params(1.0, 1.0);
        let g = Grid1D::new(0.0, 1.0, 10).unwrap();
        let s = init_equilibrium(&g, |_| 1.0, 3, &p).unwrap();
        assert!((total_energy(&s, &p, &g) - 1.3).abs() < 1e-14);
        let z = MomentState::zeros(10, 3);
        assert_eq!(total_energy(&z, &p, &g), 0.0);
        let g2 = Grid1D::new(0.0, 1.0, 5).unwrap();
        let s2 = init_equilibrium(&g2, |_| 1.0, 3, &p).unwrap();
        assert!((total_energy(&s2, &p, &g2) - 1.3).abs() < 1e-14);
    }

    #[test]
    fn energy_uses_integral_form() {
        let mut p = ap_params(1.0, 1.0);
        p.cve = crate::physics::CoefficientModel::power_law(0.3, 1.0);
        let g = Grid1D::new(0.0, 2.0, 4).unwrap();
        let s = init_equilibrium(&g, |_| 2.0, 2, &p).unwrap();
        // 2 * (16 + 0.15 * 4 + 0.2 * 2)
        assert!((total_energy(&s, &p, &g) - 2.0 * (16.0 + 0.6 + 0.4)).abs() < 1e-12);
    }

    #[test]
    fn l2_examples() {
        let r = vec![1.0, 3.0, 2.0, 2.0];
        assert_eq!(restrict(&r, 2).unwrap(), vec![2.0, 2.0]);
        assert_eq!(l2_error(&[2.0, 2.0], &r, 1.0).unwrap(), 0.0);
        assert!((l2_error(&[3.0, 2.0], &r, 1.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(l2_error(&[1.0, 1.0, 1.0], &r, 1.0).is_err());

        // sin(2 pi x) on n cells against zero: cell averages, closed-form norm
        let n = 64;
        let pi = std::f64::consts::PI;
        let h = 1.0 / n as f64;
        let avg: Vec<f64> = (0..n)
            .map(|j| {
                ((2.0 * pi * j as f64 * h).cos() - (2.0 * pi * (j + 1) as f64 * h).cos()) / (2.0 * pi * h)
            })
            .collect();
        let k = (pi * h).sin() / (pi * h);
        let e = l2_error(&avg, &vec![0.0; n], 1.0).unwrap();
        assert!((e - k * 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn order_estimator_on_first_order_data() {
        let mut t = ConvergenceTable::new(&["a", "b"]);
        for n in [50, 100, 200, 400] {
            t.push(n, vec![3.0 / n as f64, 0.5 / (n * n) as f64]);
        }
        assert!(t.orders(0).is_none());
        let o = t.orders(2).unwrap();
        assert!((o[0] - 1.0).abs() < 1e-12 && (o[1] - 2.0).abs() < 1e-12);
        let f = t.fitted_orders().unwrap();
        assert!((f[0] - 1.0).abs() < 1e-12);
        let mut single = ConvergenceTable::new(&["a"]);
        single.push(10, vec![1.0]);
        assert!(single.fitted_orders().is_none());
    }

    #[test]
    fn decay_report() {
        let p = ap_params(1.0, 1.0);
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        let mut s = init_equilibrium(&g, |_| 1.0, 3, &p).unwrap();
        let r = moment_decay_report(&s);
        assert_eq!(r.max_abs, vec![0.0; 3]);
        assert!(r.ratios.iter().all(Option::is_none));
        *s.psi_mut(1, 1) = -0.2;
        *s.psi_mut(2, 2) = 0.02;
        *s.psi_mut(0, 3) = 0.01;
        let r = moment_decay_report(&s);
        assert!((r.ratios[0].unwrap() - 0.1).abs() < 1e-15);
        assert!((r.ratios[1].unwrap() - 0.5).abs() < 1e-15);
    }
}
