//! Block tridiagonal solves with small dense blocks, plus the cyclic
//! (periodic) variant via bordering.

use crate::error::{Error, Result};

pub type Block<const B: usize> = [[f64; B]; B];
pub type Vector<const B: usize> = [f64; B];

#[inline]
pub fn zero_block<const B: usize>() -> Block<B> {
    [[0.0; B]; B]
}

#[inline]
pub fn mat_vec<const B: usize>(a: &Block<B>, x: &Vector<B>) -> Vector<B> {
    let mut y = [0.0; B];
    for i in 0..B {
        for k in 0..B {
            y[i] += a[i][k] * x[k];
        }
    }
    y
}

#[inline]
pub fn mat_mul<const B: usize>(a: &Block<B>, b: &Block<B>) -> Block<B> {
    let mut c = [[0.0; B]; B];
    for i in 0..B {
        for k in 0..B {
            let aik = a[i][k];
            for j in 0..B {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert<const B: usize>(a: &Block<B>) -> Option<Block<B>> {
    let mut m = *a;
    let mut inv = [[0.0; B]; B];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    for col in 0..B {
        let piv = (col..B)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() <= 1e-300_f64.max(scale * 1e-15) {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = 1.0 / m[col][col];
        for j in 0..B {
            m[col][j] *= d;
            inv[col][j] *= d;
        }
        for i in 0..B {
            if i != col {
                let f = m[i][col];
                if f != 0.0 {
                    for j in 0..B {
                        m[i][j] -= f * m[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// `lower[j] x_{j-1} + diag[j] x_j + upper[j] x_{j+1} = rhs[j]`.
///
/// For the plain solve `lower[0]` and `upper[n-1]` are ignored; the cyclic
/// solve couples them to `x_{n-1}` and `x_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal<const B: usize> {
    pub lower: Vec<Block<B>>,
    pub diag: Vec<Block<B>>,
    pub upper: Vec<Block<B>>,
}

struct Factorization<const B: usize> {
    /// Inverses of the pivot blocks.
    pivots: Vec<Block<B>>,
    /// `pivot_j^{-1} upper_j`.
    c: Vec<Block<B>>,
}

impl<const B: usize> BlockTridiagonal<B> {
    pub fn new(n: usize) -> Self {
        Self {
            lower: vec![zero_block(); n],
            diag: vec![zero_block(); n],
            upper: vec![zero_block(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Product with the operator (cyclic coupling included when `cyclic`).
    pub fn apply(&self, x: &[Vector<B>], cyclic: bool) -> Vec<Vector<B>> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut y = mat_vec(&self.diag[j], &x[j]);
                if j > 0 || cyclic {
                    let xm = &x[(j + n - 1) % n];
                    let t = mat_vec(&self.lower[j], xm);
                    add(&mut y, &t);
                }
                if j + 1 < n || cyclic {
                    let xp = &x[(j + 1) % n];
                    let t = mat_vec(&self.upper[j], xp);
                    add(&mut y, &t);
                }
                y
            })
            .collect()
    }

    fn factor(&self, n: usize) -> Result<Factorization<B>> {
        let mut pivots = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for j in 0..n {
            let mut d = self.diag[j];
            if j > 0 {
                let lc = mat_mul(&self.lower[j], &c[j - 1]);
                sub_block(&mut d, &lc);
            }
            let inv = invert(&d).ok_or_else(|| Error::Solver {
                cell: Some(j),
                msg: "singular pivot block in block tridiagonal solve".into(),
            })?;
            c.push(mat_mul(&inv, &self.upper[j]));
            pivots.push(inv);
        }
        Ok(Factorization { pivots, c })
    }

    fn substitute(&self, f: &Factorization<B>, rhs: &[Vector<B>]) -> Vec<Vector<B>> {
        let n = rhs.len();
        let mut y: Vec<Vector<B>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut r = rhs[j];
            if j > 0 {
                let t = mat_vec(&self.lower[j], &y[j - 1]);
                sub(&mut r, &t);
            }
            y.push(mat_vec(&f.pivots[j], &r));
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let t = mat_vec(&f.c[j], &y[j + 1]);
            sub(&mut y[j], &t);
        }
        y
    }

    pub fn solve(&self, rhs: &[Vector<B>]) -> Result<Vec<Vector<B>>> {
        let n = self.len();
        if rhs.len() != n || n == 0 {
            return Err(Error::Internal("block system dimension mismatch".into()));
        }
        let f = self.factor(n)?;
        let x = self.substitute(&f, rhs);
        check_finite(&x)?;
        Ok(x)
    }

    /// Periodic solve: `lower[0]` couples row 0 to `x_{n-1}` and `upper[n-1]`
    /// couples row `n-1` to `x_0`.
    pub fn solve_cyclic(&self, rhs: &[Vector<B>]) -> Result<Vec<Vector<B>>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::Internal("block system dimension mismatch".into()));
        }
        if n < 3 {
            return Err(Error::Internal("cyclic solve needs at least 3 block rows".into()));
        }
        let m = n - 1;
        let f = self.factor(m)?;
        let z = self.substitute(&f, &rhs[..m]);
        // columns coupling the leading block to the last unknown
        let mut w_cols: Vec<Vec<Vector<B>>> = Vec::with_capacity(B);
        for col in 0..B {
            let mut e = vec![[0.0; B]; m];
            for i in 0..B {
                e[0][i] += self.lower[0][i][col];
                e[m - 1][i] += self.upper[m - 1][i][col];
            }
            w_cols.push(self.substitute(&f, &e));
        }
        let w_at = |j: usize| -> Block<B> {
            let mut b = [[0.0; B]; B];
            for (col, w) in w_cols.iter().enumerate() {
                for i in 0..B {
                    b[i][col] = w[j][i];
                }
            }
            b
        };
        let (w0, wl) = (w_at(0), w_at(m - 1));
        let mut s = self.diag[m];
        sub_block(&mut s, &mat_mul(&self.lower[m], &wl));
        sub_block(&mut s, &mat_mul(&self.upper[m], &w0));
        let mut r = rhs[m];
        sub(&mut r, &mat_vec(&self.lower[m], &z[m - 1]));
        sub(&mut r, &mat_vec(&self.upper[m], &z[0]));
        let sinv = invert(&s).ok_or_else(|| Error::Solver {
            cell: Some(m),
            msg: "singular closing block in cyclic solve".into(),
        })?;
        let last = mat_vec(&sinv, &r);
        let mut x = Vec::with_capacity(n);
        for j in 0..m {
            let mut v = z[j];
            sub(&mut v, &mat_vec(&w_at(j), &last));
            x.push(v);
        }
        x.push(last);
        check_finite(&x)?;
        Ok(x)
    }
}

fn check_finite<const B: usize>(x: &[Vector<B>]) -> Result<()> {
    if let Some(j) = x.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
        return Err(Error::solver(j, "non-finite value in block tridiagonal solution"));
    }
    Ok(())
}

#[inline]
fn add<const B: usize>(a: &mut Vector<B>, b: &Vector<B>) {
    for i in 0..B {
        a[i] += b[i];
    }
}

#[inline]
fn sub<const B: usize>(a: &mut Vector<B>, b: &Vector<B>) {
    for i in 0..B {
        a[i] -= b[i];
    }
}

#[inline]
fn sub_block<const B: usize>(a: &mut Block<B>, b: &Block<B>) {
    for i in 0..B {
        for j in 0..B {
            a[i][j] -= b[i][j];
        }
    }
}
