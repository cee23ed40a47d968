//! Planar convex bodies described by their supporting function.
//!
//! The boundary is parametrized by the outward-normal angle `φ`. With
//! `e(φ) = (cos φ, sin φ)` and `e⊥(φ) = (−sin φ, cos φ)` the boundary point is
//! `x(φ) = h(φ) e(φ) + h′(φ) e⊥(φ)` and the curvature radius is `ρ = h″ + h`.

use nalgebra::Vector2;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::trig::{TrigPolynomial, MAX_DEGREE};

/// Uniform grid used for convexity and constant-width checks.
pub const CHECK_GRID: usize = 4096;
/// `min ρ` on the check grid must exceed this margin.
pub const CONVEXITY_MARGIN: f64 = 1e-9;
/// Largest admissible first harmonic of `ρ` in [`support_from_radius`].
pub const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SupportCurve {
    h: TrigPolynomial,
    rho_min: f64,
}

impl SupportCurve {
    /// Wraps a supporting function after checking strict convexity on the grid.
    pub fn new(h: TrigPolynomial) -> Result<Self> {
        if h.degree() > MAX_DEGREE {
            return Err(Error::DegreeTooHigh(h.degree()));
        }
        let rho_min = (0..CHECK_GRID)
            .map(|i| {
                let (f, _, f2) = h.eval_with_derivs(TAU * i as f64 / CHECK_GRID as f64);
                f + f2
            })
            .fold(f64::INFINITY, f64::min);
        if !(rho_min > CONVEXITY_MARGIN) {
            return Err(Error::NonConvex(rho_min));
        }
        Ok(Self { h, rho_min })
    }

    /// Circle of radius `r` centred at the origin.
    pub fn circle(r: f64) -> Result<Self> {
        Self::new(TrigPolynomial::constant(r))
    }

    pub fn support(&self) -> &TrigPolynomial {
        &self.h
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    /// `(h, h′, h″)` at `phi`.
    pub fn eval_support(&self, phi: f64) -> (f64, f64, f64) {
        self.h.eval_with_derivs(phi)
    }

    pub fn curvature_radius(&self, phi: f64) -> f64 {
        let (h, _, h2) = self.h.eval_with_derivs(phi);
        h2 + h
    }

    /// Boundary point with outward normal angle `phi`.
    pub fn boundary_point(&self, phi: f64) -> Vector2<f64> {
        let (h, h1, _) = self.h.eval_with_derivs(phi);
        let (s, c) = phi.sin_cos();
        Vector2::new(h * c - h1 * s, h * s + h1 * c)
    }

    /// Mean width `h(φ) + h(φ + π)` averaged over `φ`.
    pub fn mean_width(&self) -> f64 {
        2.0 * self.h.constant_term()
    }

    pub fn check_constant_width(&self, tol: f64) -> ConstantWidth {
        let width = self.mean_width();
        let max_deviation = (0..CHECK_GRID)
            .map(|i| {
                let phi = TAU * i as f64 / CHECK_GRID as f64;
                (self.h.eval(phi) + self.h.eval(phi + PI) - width).abs()
            })
            .fold(0.0, f64::max);
        ConstantWidth {
            is_constant: max_deviation < tol,
            width,
            max_deviation,
        }
    }
}

/// Outcome of [`SupportCurve::check_constant_width`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantWidth {
    pub is_constant: bool,
    pub width: f64,
    pub max_deviation: f64,
}

/// Solves `h″ + h = ρ` for the supporting function, with the first harmonics
/// of `h` set to zero (Steiner point at the origin).
pub fn support_from_radius(rho: &TrigPolynomial) -> Result<SupportCurve> {
    let (a1, b1) = rho.harmonic(1);
    let first = a1.hypot(b1);
    if first > CLOSURE_TOL {
        return Err(Error::NonClosedCurve(first));
    }
    let h = rho.scale_harmonics(|k| match k {
        0 => 1.0,
        1 => 0.0,
        k => 1.0 / (1.0 - (k * k) as f64),
    });
    SupportCurve::new(h)
}
