//! Legendre machinery for the P_N expansion and Gauss quadrature shared with
//! the discrete-ordinates solver.

use crate::error::{Error, Result};

/// Streaming matrices of the higher-moment block, stored dense and 0-based.
///
/// Row `r` corresponds to moment `psi_{r+2}`; column `c` to `psi_c`.
/// In the 1-based convention row `l-1` couples to columns `l` (matrix `A`)
/// and `l+2` (matrix `B`).
#[derive(Debug, Clone, PartialEq)]
pub struct PnOperators {
    pub m: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl PnOperators {
    /// Entry of `A` in 1-based indexing.
    pub fn a1(&self, i: usize, j: usize) -> f64 {
        self.a[i - 1][j - 1]
    }

    /// Entry of `B` in 1-based indexing.
    pub fn b1(&self, i: usize, j: usize) -> f64 {
        self.b[i - 1][j - 1]
    }
}

pub fn pn_operators(m: usize) -> Result<PnOperators> {
    if m < 2 {
        return Err(Error::Config(format!(
            "expansion order must be at least 2, got {m}"
        )));
    }
    let mut a = vec![vec![0.0; m + 1]; m - 1];
    let mut b = vec![vec![0.0; m + 1]; m - 1];
    // 1-based (l-1, l) -> 0-based (l-2, l-1)
    for l in 2..=m {
        a[l - 2][l - 1] = l as f64 / (2 * l + 1) as f64;
    }
    for l in 2..m {
        b[l - 2][l + 1] = (l + 1) as f64 / (2 * l + 1) as f64;
    }
    Ok(PnOperators { m, a, b })
}

/// `P_l(mu)` by the three-term recurrence.
pub fn legendre(l: usize, mu: f64) -> f64 {
    legendre_with_derivative(l, mu).0
}

fn legendre_with_derivative(l: usize, mu: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, mu);
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * mu * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let lf = l as f64;
    let dp = if (1.0 - mu * mu).abs() < 1e-300 {
        0.5 * lf * (lf + 1.0) * mu.powi(l as i32 + 1)
    } else {
        lf * (p0 - mu * p1) / (1.0 - mu * mu)
    };
    (p1, dp)
}

/// All of `P_0(mu)..P_m(mu)`.
pub fn legendre_all(m: usize, mu: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(m + 1);
    p.push(1.0);
    if m >= 1 {
        p.push(mu);
    }
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * mu * p[k] - kf * p[k - 1]) / (kf + 1.0);
        p.push(next);
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest moment order the rule projects exactly.
    pub fn max_order(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<Quadrature> {
    if n == 0 {
        return Err(Error::Config("quadrature needs at least one node".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Quadrature { nodes, weights })
}

/// `psi_l = sum_m w_m P_l(mu_m) psi(mu_m)` for `l = 0..=order`.
pub fn project_to_moments(samples: &[f64], quad: &Quadrature, order: usize) -> Result<Vec<f64>> {
    if samples.len() != quad.len() {
        return Err(Error::Config(format!(
            "{} samples for {} quadrature nodes",
            samples.len(),
            quad.len()
        )));
    }
    if quad.len() < order + 1 {
        return Err(Error::Config(format!(
            "quadrature with {} nodes cannot resolve moments up to order {order}",
            quad.len()
        )));
    }
    let mut out = vec![0.0; order + 1];
    for ((&mu, &w), &s) in quad.nodes.iter().zip(&quad.weights).zip(samples) {
        let p = legendre_all(order, mu);
        for (o, pl) in out.iter_mut().zip(p) {
            *o += w * pl * s;
        }
    }
    Ok(out)
}

/// Evaluates the truncated expansion `sum_l (2l+1)/2 psi_l P_l(mu)` at each node.
pub fn moments_to_intensity(moments: &[f64], quad: &Quadrature) -> Vec<f64> {
    let m = moments.len().saturating_sub(1);
    quad.nodes
        .iter()
        .map(|&mu| {
            legendre_all(m, mu)
                .iter()
                .zip(moments)
                .enumerate()
                .map(|(l, (p, v))| (2 * l + 1) as f64 * 0.5 * v * p)
                .sum()
        })
        .collect()
}
