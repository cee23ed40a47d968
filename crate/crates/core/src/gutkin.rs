//! Constant-angle (Gutkin) tables in the plane.
//!
//! A table whose curvature radius is `ρ = a0 + an cos(nφ)` keeps every chord
//! angle `δ` with `tan(nδ) = n tan δ`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::support::{support_from_radius, SupportCurve};
use crate::trig::TrigPolynomial;

/// Residual bound `|tan(nδ) − n tan δ|` accepted for a table angle.
pub const ANGLE_RESIDUAL_TOL: f64 = 1e-10;

/// `tan(nδ) − n tan δ`.
pub fn angle_equation_residual(n: usize, delta: f64) -> f64 {
    (n as f64 * delta).tan() - n as f64 * delta.tan()
}

// sin(nδ)cos δ − n cos(nδ) sin δ: same zeros on (0, π/2) without the poles.
fn regularized(n: f64, delta: f64) -> f64 {
    (n * delta).sin() * delta.cos() - n * (n * delta).cos() * delta.sin()
}

// Derivative of `regularized`, which collapses to (n² − 1) sin(nδ) sin δ.
fn regularized_slope(n: f64, delta: f64) -> f64 {
    (n * n - 1.0) * (n * delta).sin() * delta.sin()
}

fn bisect(n: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = regularized(n, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = regularized(n, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    // Newton polish, kept inside the final bracket.
    for _ in 0..3 {
        let slope = regularized_slope(n, x);
        if slope == 0.0 {
            break;
        }
        let next = x - regularized(n, x) / slope;
        if !(next > lo && next < hi) || next == x {
            break;
        }
        x = next;
    }
    x
}

/// Nonzero solutions of `tan(nδ) = n tan δ` in `(0, π/2)`, increasing.
///
/// Each branch of `tan(nδ)` between the poles `(j + ½)π/n` carries exactly one
/// crossing with `n tan δ`; the branch containing zero only carries `δ = 0`.
pub fn solve_gutkin_angles(n: usize) -> Result<Vec<f64>> {
    if n < 4 {
        return Err(Error::InvalidHarmonic(n));
    }
    let nf = n as f64;
    let poles: Vec<f64> = (0..n)
        .map(|j| (j as f64 + 0.5) * std::f64::consts::PI / nf)
        .take_while(|&p| p < FRAC_PI_2)
        .collect();
    let mut edges = poles.clone();
    // Tail branch cut by π/2; for odd n the endpoint itself is a spurious zero.
    edges.push(FRAC_PI_2 - 1e-9);
    let mut roots = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if (regularized(nf, lo) < 0.0) != (regularized(nf, hi) < 0.0) {
            roots.push(bisect(nf, lo, hi));
        }
    }
    let expected = n / 2 - 1;
    if roots.len() != expected {
        log::warn!(
            "tan({n}δ) = {n} tan δ: found {} roots in (0, π/2), expected {expected}",
            roots.len()
        );
    }
    Ok(roots)
}

/// Table with curvature radius `a0 + an cos(nφ)` and its invariant angle.
#[derive(Debug, Clone, PartialEq)]
pub struct GutkinTable {
    pub curve: SupportCurve,
    pub n: usize,
    pub delta: f64,
    pub a0: f64,
    pub an: f64,
}

impl GutkinTable {
    /// Rebuilds a table from a curve and the stated `(n, δ)`, checking both the
    /// angle equation and that `ρ` carries only harmonics `0` and `n`.
    pub fn from_curve(curve: SupportCurve, n: usize, delta: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidHarmonic(n));
        }
        let residual = angle_equation_residual(n, delta);
        if !(delta > 0.0 && delta < FRAC_PI_2) || !(residual.abs() < ANGLE_RESIDUAL_TOL) {
            return Err(Error::InvalidInput(format!(
                "delta = {delta} does not solve tan({n}δ) = {n} tan δ (residual {residual:e})"
            )));
        }
        let h = curve.support();
        let stray = h
            .harmonics()
            .filter(|&(k, _, _)| k != n && k != 1)
            .any(|(_, a, b)| a != 0.0 || b != 0.0);
        let (hn, bn) = h.harmonic(n);
        if stray || bn != 0.0 {
            return Err(Error::InvalidInput("curvature radius must be a0 + an cos(nφ)".into()));
        }
        let a0 = h.constant_term();
        let an = hn * (1.0 - (n * n) as f64);
        Ok(Self {
            curve,
            n,
            delta,
            a0,
            an,
        })
    }

    pub fn curvature_radius_poly(&self) -> TrigPolynomial {
        TrigPolynomial::single(self.a0, self.n, self.an, 0.0)
    }
}

/// Builds the table `ρ = a0 + an cos(nφ)` at root `root_index` of the angle equation.
pub fn build_gutkin_table(n: usize, root_index: usize, a0: f64, an: f64) -> Result<GutkinTable> {
    if n < 4 {
        return Err(Error::InvalidHarmonic(n));
    }
    if !(a0 > an.abs()) {
        return Err(Error::NonConvex(a0 - an.abs()));
    }
    let roots = solve_gutkin_angles(n)?;
    let delta = *roots.get(root_index).ok_or(Error::IndexOutOfRange {
        index: root_index,
        len: roots.len(),
    })?;
    let curve = support_from_radius(&TrigPolynomial::single(a0, n, an, 0.0))?;
    Ok(GutkinTable {
        curve,
        n,
        delta,
        a0,
        an,
    })
}
