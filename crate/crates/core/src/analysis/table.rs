//! Precomputed interpolation table for the density-evolution function φ.
//!
//! φ is needed millions of times inside the optimization loops, so evaluating
//! its defining integral each call is out of the question. This module builds,
//! once per process, a cubic Hermite table on a log-spaced grid with knot
//! values *and knot derivatives* obtained from adaptive quadrature. With exact
//! derivatives the interpolation error is O(h⁴) ≈ 1e-11 over the whole grid,
//! and each piece is verified monotone at build time (derivatives are clamped
//! to three times the secant slope in the Fritsch–Carlson manner if a piece
//! ever fails the check; in practice none does).
//!
//! Outside the grid:
//! * below `X_MIN` the Maclaurin expansion `1 - x/2 + x²/4` is exact to ~1e-18;
//! * above `X_MAX` the classical exponential tail approximation
//!   `√(π/x)·e^{-x/4}·(1 - 10/(7x))` is used; φ there is below 1e-17, far
//!   beyond anything density evolution can distinguish from zero.

use super::{phi_exact, phi_prime_exact};
use once_cell::sync::Lazy;

pub const X_MIN: f64 = 1e-6;
pub const X_MAX: f64 = 150.0;
const KNOTS: usize = 3000;

/// Exponential tail approximation of φ, used beyond the table range and by
/// the closed-form kernel above its seam.
pub fn phi_tail(x: f64) -> f64 {
    (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
}

/// Maclaurin expansion of φ for very small arguments.
pub fn phi_series(x: f64) -> f64 {
    1.0 - 0.5 * x + 0.25 * x * x
}

/// Inverse of `phi_series`, solved in closed form (stable for y near 1).
pub fn phi_series_inv(y: f64) -> f64 {
    let u = 1.0 - y;
    4.0 * u / (1.0 + (1.0 - 4.0 * u).max(0.0).sqrt())
}

pub struct PhiTable {
    ln_x_min: f64,
    ln_step: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Knot derivatives dφ/dx (negative everywhere).
    ds: Vec<f64>,
}

pub static PHI_TABLE: Lazy<PhiTable> = Lazy::new(PhiTable::build);

impl PhiTable {
    fn build() -> Self {
        let ln_lo = X_MIN.ln();
        let ln_hi = X_MAX.ln();
        let ln_step = (ln_hi - ln_lo) / (KNOTS - 1) as f64;
        let xs: Vec<f64> = (0..KNOTS)
            .map(|i| (ln_lo + ln_step * i as f64).exp())
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| phi_exact(x)).collect();
        let mut ds: Vec<f64> = xs.iter().map(|&x| phi_prime_exact(x)).collect();
        // Monotonicity guard: each cubic Hermite piece of a decreasing data
        // set is monotone when both end derivatives stay within three times
        // the secant slope.
        for i in 0..KNOTS - 1 {
            let h = xs[i + 1] - xs[i];
            let secant = (ys[i + 1] - ys[i]) / h;
            debug_assert!(secant < 0.0, "phi table data not strictly decreasing at knot {i}");
            let floor = 3.0 * secant; // most negative allowed derivative
            if ds[i] < floor {
                ds[i] = floor;
            }
            if ds[i + 1] < floor {
                ds[i + 1] = floor;
            }
            if ds[i] > 0.0 {
                ds[i] = 0.0;
            }
        }
        PhiTable { ln_x_min: ln_lo, ln_step, xs, ys, ds }
    }

    fn interval_of(&self, x: f64) -> usize {
        let mut i = ((x.ln() - self.ln_x_min) / self.ln_step) as isize;
        i = i.clamp(0, (KNOTS - 2) as isize);
        let mut i = i as usize;
        // Float guard: make sure xs[i] <= x < xs[i+1].
        if x < self.xs[i] && i > 0 {
            i -= 1;
        } else if x >= self.xs[i + 1] && i < KNOTS - 2 {
            i += 1;
        }
        i
    }

    fn hermite(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }

    /// Fast φ(x) for any x ≥ 0.
    pub fn phi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else if x < X_MIN {
            phi_series(x)
        } else if x > X_MAX {
            phi_tail(x)
        } else {
            self.hermite(self.interval_of(x), x).clamp(0.0, 1.0)
        }
    }

    /// Fast φ⁻¹(y) for y in (0, 1]: bisection on the monotone interpolant.
    pub fn phi_inv(&self, y: f64) -> f64 {
        if y >= 1.0 {
            return 0.0;
        }
        if y >= self.ys[0] {
            return phi_series_inv(y);
        }
        let last = self.ys[KNOTS - 1];
        if y <= last {
            return tail_inv(y);
        }
        // Binary search the descending knot values for the bracketing piece.
        let (mut lo, mut hi) = (0usize, KNOTS - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.ys[mid] >= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Bisection inside the piece; 60 halvings push the bracket far below
        // f64 resolution of the knot spacing.
        let (mut a, mut b) = (self.xs[lo], self.xs[hi]);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.hermite(lo, m) >= y {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// Invert the exponential tail by Newton iteration in log space.
pub fn tail_inv(y: f64) -> f64 {
    let ln_y = y.ln();
    let mut x = -4.0 * ln_y;
    for _ in 0..40 {
        let f = 0.5 * std::f64::consts::PI.ln() - 0.5 * x.ln() - 0.25 * x
            + (-10.0 / (7.0 * x)).ln_1p()
            - ln_y;
        let df = -0.5 / x - 0.25 + (10.0 / (7.0 * x * x)) / (1.0 - 10.0 / (7.0 * x));
        let step = f / df;
        x -= step;
        if step.abs() < 1e-14 * x.abs() {
            break;
        }
    }
    x
}
