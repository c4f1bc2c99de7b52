//! The per-cell electron-temperature equation `C4 T^4 + C1 T + C0 = 0`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoefficients {
    pub c4: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuarticCoefficients {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let t2 = t * t;
        self.c4 * t2 * t2 + self.c1 * t + self.c0
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        4.0 * self.c4 * t * t * t + self.c1
    }

    /// Upper end of the root bracket `[0, min(-C0/C1, (-C0/C4)^{1/4})]`.
    pub fn upper_bound(&self) -> f64 {
        let lin = -self.c0 / self.c1;
        if self.c4 > 0.0 {
            lin.min((-self.c0 / self.c4).powf(0.25))
        } else {
            lin
        }
    }
}

/// Default relative tolerance of the root iteration.
pub const ROOT_TOL: f64 = 1e-14;

/// Unique positive root by Newton's method safeguarded with bisection.
///
/// `cell` only labels the error.
pub fn solve_unique_positive_root(q: QuarticCoefficients, tol: f64, cell: usize) -> Result<f64> {
    if !(q.c1 > 0.0)
        || !(q.c4 >= 0.0)
        || !(q.c0 < 0.0)
        || !q.c0.is_finite()
        || !q.c1.is_finite()
        || !q.c4.is_finite()
    {
        return Err(Error::solver(
            cell,
            format!(
                "quartic coefficients outside the admissible set (C4 = {:e}, C1 = {:e}, C0 = {:e})",
                q.c4, q.c1, q.c0
            ),
        ));
    }
    let mut lo = 0.0;
    let mut hi = q.upper_bound();
    // f(hi) >= 0 in exact arithmetic; widen on roundoff
    while q.eval(hi) < 0.0 {
        hi *= 1.0 + 1e-12;
        if !hi.is_finite() {
            return Err(Error::solver(cell, "quartic bracket overflow"));
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = q.eval(t);
        if f == 0.0 {
            return Ok(t);
        }
        if f < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - f / q.derivative(t);
        let next = if newton >= lo && newton <= hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= tol * next.abs() {
            // one polishing step at quadratic rate
            let polished = next - q.eval(next) / q.derivative(next);
            let root = if polished > 0.0 { polished } else { next };
            return Ok(root);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(if q.eval(lo).abs() < q.eval(hi).abs() && lo > 0.0 {
                lo
            } else {
                hi
            });
        }
        t = next;
    }
    Err(Error::solver(cell, "quartic root iteration did not converge"))
}
