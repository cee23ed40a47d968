//! The planar billiard map on oriented lines.
//!
//! A line is `{x : ⟨x, e(φ)⟩ = p}` travelled in the direction `e(φ + π/2)`,
//! so the table circulates counterclockwise as `φ` grows. The map sends
//! `(p₁, φ₁)` to `(p₂, φ₂)` with `φ₂ ∈ (φ₁, φ₁ + 2π)`; angles are kept lifted
//! (not reduced mod 2π) so that rotation along an orbit stays visible.
//!
//! With `φ̄ = (φ₁ + φ₂)/2`, `α = (φ₂ − φ₁)/2` the generating function is
//! `S = 2h(φ̄) sin α` and the map satisfies `p₁ = −∂S/∂φ₁`, `p₂ = ∂S/∂φ₂`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{self, Write};

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_gl, integrate_periodic};
use crate::support::SupportCurve;

/// Chords meeting the boundary at less than this angle are rejected as tangent.
pub const MIN_INCIDENCE: f64 = 1e-6;
/// Trapezoid points in `φ` for [`rigidity_integral`].
pub const RIGIDITY_PHI_POINTS: usize = 512;
/// Default Gauss–Legendre order in `α` for [`rigidity_integral`].
pub const RIGIDITY_DEFAULT_ORDER: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedLine2D {
    pub p: f64,
    pub phi: f64,
}

impl OrientedLine2D {
    pub fn new(p: f64, phi: f64) -> Self {
        Self { p, phi }
    }

    pub fn normal(&self) -> Vector2<f64> {
        Vector2::new(self.phi.cos(), self.phi.sin())
    }

    /// Unit direction of travel.
    pub fn direction(&self) -> Vector2<f64> {
        Vector2::new(-self.phi.sin(), self.phi.cos())
    }

    /// Same line with `φ` reduced to `[0, 2π)`.
    pub fn reduced(&self) -> Self {
        Self::new(self.p, reduce_angle(self.phi))
    }

    /// Strict interior intersection: `−h(φ + π) < p < h(φ)`.
    pub fn intersects(&self, curve: &SupportCurve) -> bool {
        let top = curve.eval_support(self.phi).0;
        let bottom = -curve.eval_support(self.phi + PI).0;
        self.p < top && self.p > bottom
    }
}

pub fn reduce_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A chord of the table cut out by an oriented line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordData {
    pub line: OrientedLine2D,
    /// Normal angle at the entry point, in `(φ − π, φ)`.
    pub psi_back: f64,
    /// Normal angle at the exit point, in `(φ, φ + π)`.
    pub psi_fwd: f64,
    /// Angle between chord and tangent at the entry point, in `(0, π/2]`.
    pub angle_back: f64,
    /// Angle between chord and tangent at the exit point, in `(0, π/2]`.
    pub angle_fwd: f64,
}

/// Strip `δ₁ < α < δ₂` of the phase cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strip {
    pub delta1: f64,
    pub delta2: f64,
}

impl Strip {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self> {
        if !(delta1 > 0.0 && delta1 < delta2 && delta2 <= FRAC_PI_2) {
            return Err(Error::InvalidInput(format!(
                "strip needs 0 < delta1 < delta2 <= pi/2, got ({delta1}, {delta2})"
            )));
        }
        Ok(Self { delta1, delta2 })
    }
}

/// Second partial derivatives of the generating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondDerivs {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
}

fn mid_and_half(phi1: f64, phi2: f64) -> Result<(f64, f64)> {
    let gap = phi2 - phi1;
    if !(gap > 0.0 && gap < TAU) {
        return Err(Error::DegenerateChord(gap));
    }
    Ok((0.5 * (phi1 + phi2), 0.5 * gap))
}

pub fn generating_value(curve: &SupportCurve, phi1: f64, phi2: f64) -> Result<f64> {
    let (mid, alpha) = mid_and_half(phi1, phi2)?;
    Ok(2.0 * curve.eval_support(mid).0 * alpha.sin())
}

/// `(∂S/∂φ₁, ∂S/∂φ₂)`.
pub fn generating_first_derivs(curve: &SupportCurve, phi1: f64, phi2: f64) -> Result<(f64, f64)> {
    let (mid, alpha) = mid_and_half(phi1, phi2)?;
    let (h, h1, _) = curve.eval_support(mid);
    let (s, c) = alpha.sin_cos();
    Ok((h1 * s - h * c, h1 * s + h * c))
}

pub fn generating_second_derivs(curve: &SupportCurve, phi1: f64, phi2: f64) -> Result<SecondDerivs> {
    let (mid, alpha) = mid_and_half(phi1, phi2)?;
    let (h, h1, h2) = curve.eval_support(mid);
    let (s, c) = alpha.sin_cos();
    Ok(SecondDerivs {
        s11: 0.5 * (h2 - h) * s - h1 * c,
        s12: 0.5 * (h2 + h) * s,
        s22: 0.5 * (h2 - h) * s + h1 * c,
    })
}

// Signed offset of the boundary point x(ψ) from the line; decreasing on
// (φ, φ + π) and increasing on (φ + π, φ + 2π).
fn line_offset(curve: &SupportCurve, line: &OrientedLine2D, psi: f64) -> f64 {
    curve.boundary_point(psi).dot(&line.normal()) - line.p
}

fn bisect_offset(curve: &SupportCurve, line: &OrientedLine2D, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo_neg = line_offset(curve, line, lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-15 {
            break;
        }
        let f = line_offset(curve, line, mid);
        if f == 0.0 {
            return mid;
        }
        if (f < 0.0) == f_lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn incidence(direction: &Vector2<f64>, psi: f64) -> f64 {
    let normal = Vector2::new(psi.cos(), psi.sin());
    let tangent = Vector2::new(-psi.sin(), psi.cos());
    direction.dot(&normal).abs().atan2(direction.dot(&tangent).abs())
}

/// Both boundary intersections of `line` and the chord's angles with the boundary.
pub fn chord_incidence_angles(curve: &SupportCurve, line: &OrientedLine2D) -> Result<ChordData> {
    if !line.intersects(curve) {
        return Err(Error::NoIntersection);
    }
    let phi = line.phi;
    let psi_fwd = bisect_offset(curve, line, phi, phi + PI);
    let psi_back = bisect_offset(curve, line, phi - PI, phi);
    let d = line.direction();
    let angle_fwd = incidence(&d, psi_fwd);
    let angle_back = incidence(&d, psi_back);
    if angle_fwd < MIN_INCIDENCE || angle_back < MIN_INCIDENCE {
        return Err(Error::TangentLine);
    }
    Ok(ChordData {
        line: *line,
        psi_back,
        psi_fwd,
        angle_back,
        angle_fwd,
    })
}

/// Reflects at the exit point by mirroring the travel direction in the tangent.
pub fn reflect_geometric(curve: &SupportCurve, line: &OrientedLine2D) -> Result<(OrientedLine2D, ChordData)> {
    let chord = chord_incidence_angles(curve, line)?;
    let hit = curve.boundary_point(chord.psi_fwd);
    let nu = Vector2::new(chord.psi_fwd.cos(), chord.psi_fwd.sin());
    let d = line.direction();
    let out = d - 2.0 * d.dot(&nu) * nu;
    let raw = (-out.x).atan2(out.y);
    let mut phi2 = line.phi + (raw - line.phi).rem_euclid(TAU);
    if phi2 <= line.phi {
        phi2 += TAU;
    }
    let p2 = hit.dot(&Vector2::new(phi2.cos(), phi2.sin()));
    let next = OrientedLine2D::new(p2, phi2);
    debug_assert!(
        ((0.5 * (line.phi + phi2) - chord.psi_fwd + PI).rem_euclid(TAU) - PI).abs() < 1e-8,
        "reflection point is not at the mean normal angle"
    );
    Ok((next, chord))
}

/// Solves `p₁ = −∂S/∂φ₁(φ₁, φ₂)` for `φ₂` and returns `(∂S/∂φ₂, φ₂)`.
///
/// In `α = (φ₂ − φ₁)/2` the residual `h(φ̄) cos α − h′(φ̄) sin α − p₁` has slope
/// `−ρ(φ̄) sin α < 0`, so a safeguarded Newton iteration on `(0, π)` converges.
pub fn reflect_variational(curve: &SupportCurve, line: &OrientedLine2D) -> Result<OrientedLine2D> {
    if !line.intersects(curve) {
        return Err(Error::NoIntersection);
    }
    let (phi1, p1) = (line.phi, line.p);
    let residual = |alpha: f64| -> (f64, f64) {
        let (h, h1, h2) = curve.eval_support(phi1 + alpha);
        let (s, c) = alpha.sin_cos();
        (h * c - h1 * s - p1, -(h + h2) * s)
    };
    let (mut lo, mut hi) = (0.0, PI);
    let mut alpha = FRAC_PI_2;
    let mut converged = false;
    for _ in 0..200 {
        let (r, slope) = residual(alpha);
        if r == 0.0 {
            converged = true;
            break;
        }
        if r > 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        let newton = alpha - r / slope;
        let next = if slope < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - alpha).abs() <= 4.0 * f64::EPSILON * alpha.abs().max(1.0) || hi - lo < 1e-15 {
            alpha = next;
            converged = true;
            break;
        }
        alpha = next;
    }
    if !converged {
        return Err(Error::ConvergenceFailure("variational billiard map"));
    }
    if alpha < MIN_INCIDENCE || PI - alpha < MIN_INCIDENCE {
        return Err(Error::TangentLine);
    }
    let phi2 = phi1 + 2.0 * alpha;
    let (_, s2) = generating_first_derivs(curve, phi1, phi2)?;
    Ok(OrientedLine2D::new(s2, phi2))
}

/// Line leaving the boundary point with normal angle `psi` at angle `delta`.
pub fn constant_angle_line(curve: &SupportCurve, delta: f64, psi: f64) -> OrientedLine2D {
    let (h, h1, _) = curve.eval_support(psi);
    let (s, c) = delta.sin_cos();
    OrientedLine2D::new(h * c + h1 * s, psi + delta)
}

/// Largest deviation of the arrival angle from `delta` over chords that depart
/// at angle `delta` from `grid_size` equally spaced boundary points.
pub fn verify_constant_angle(curve: &SupportCurve, delta: f64, grid_size: usize) -> Result<f64> {
    if grid_size < 8 {
        return Err(Error::InvalidInput(format!("grid size {grid_size} < 8")));
    }
    if !(delta > 0.0 && delta <= FRAC_PI_2) {
        return Err(Error::InvalidInput(format!("delta {delta} outside (0, pi/2]")));
    }
    let mut worst: f64 = 0.0;
    for i in 0..grid_size {
        let psi = TAU * i as f64 / grid_size as f64;
        let chord = chord_incidence_angles(curve, &constant_angle_line(curve, delta, psi))?;
        worst = worst.max((chord.angle_fwd - delta).abs());
    }
    Ok(worst)
}

/// `steps` bounces starting from `line0`; the result has `steps + 1` lines.
pub fn orbit(curve: &SupportCurve, line0: OrientedLine2D, steps: usize) -> Result<Vec<OrientedLine2D>> {
    Ok(orbit_chords(curve, line0, steps)?.into_iter().map(|c| c.line).collect())
}

/// Chord data for each line of [`orbit`].
pub fn orbit_chords(curve: &SupportCurve, line0: OrientedLine2D, steps: usize) -> Result<Vec<ChordData>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut line = line0;
    for _ in 0..steps {
        let (next, chord) = reflect_geometric(curve, &line)?;
        out.push(chord);
        line = next;
    }
    out.push(chord_incidence_angles(curve, &line)?);
    Ok(out)
}

/// Largest `|angle_fwd(cᵢ) − angle_back(cᵢ₊₁)|` along consecutive chords.
pub fn billiard_law_residual(chords: &[ChordData]) -> f64 {
    chords
        .windows(2)
        .map(|w| (w[0].angle_fwd - w[1].angle_back).abs())
        .fold(0.0, f64::max)
}

pub const ORBIT_CSV_HEADER: &str = "step,p,phi,psi_back,psi_fwd,angle_back,angle_fwd";

/// One row per chord; angles reduced to `[0, 2π)`.
pub fn write_orbit_csv<W: Write>(mut w: W, chords: &[ChordData], header: bool) -> io::Result<()> {
    if header {
        writeln!(w, "{ORBIT_CSV_HEADER}")?;
    }
    for (step, c) in chords.iter().enumerate() {
        writeln!(
            w,
            "{step},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.line.p,
            reduce_angle(c.line.phi),
            reduce_angle(c.psi_back),
            reduce_angle(c.psi_fwd),
            c.angle_back,
            c.angle_fwd
        )?;
    }
    Ok(())
}

/// `I = 2 ∫_{δ₁}^{δ₂} ∫_0^{2π} (S₁₁ + 2S₁₂ + S₂₂) S₁₂ dφ dα`, the factor 2 being
/// the Jacobian of `(φ₁, φ₂) → (φ, α)`. Gauss–Legendre of order `quad_order`
/// in `α`, periodic trapezoid in `φ`.
pub fn rigidity_integral(curve: &SupportCurve, strip: Strip, quad_order: usize) -> Result<f64> {
    if quad_order < 8 {
        return Err(Error::InvalidInput(format!("quadrature order {quad_order} < 8")));
    }
    let rule = gauss_legendre(quad_order);
    let mut failure = None;
    let value = integrate_gl(&rule, strip.delta1, strip.delta2, |alpha| {
        integrate_periodic(RIGIDITY_PHI_POINTS, |phi| {
            match generating_second_derivs(curve, phi - alpha, phi + alpha) {
                Ok(d) => (d.s11 + 2.0 * d.s12 + d.s22) * d.s12,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        })
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(2.0 * value),
    }
}

/// Reduced form `2 ∫ sin²α dα · ∫ [(h″)² − (h′)²] dφ`, evaluated from the
/// Fourier coefficients of `h`.
pub fn rigidity_integral_closed(curve: &SupportCurve, strip: Strip) -> f64 {
    let alpha_part = |a: f64| a - a.sin() * a.cos();
    let angular = alpha_part(strip.delta2) - alpha_part(strip.delta1);
    let spectral: f64 = curve
        .support()
        .harmonics()
        .filter(|&(k, _, _)| k >= 2)
        .map(|(k, a, b)| {
            let k2 = (k * k) as f64;
            k2 * (k2 - 1.0) * (a * a + b * b)
        })
        .sum();
    angular * PI * spectral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gutkin::build_gutkin_table;
    use crate::trig::TrigPolynomial;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn circle() -> SupportCurve {
        SupportCurve::circle(1.0).unwrap()
    }

    fn same_angle(a: f64, b: f64) -> f64 {
        ((a - b + PI).rem_euclid(TAU) - PI).abs()
    }

    #[test]
    fn generating_value_examples() {
        let c = circle();
        assert_abs_diff_eq!(
            generating_value(&c, 0.0, FRAC_PI_2).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(generating_value(&c, 0.0, PI).unwrap(), 2.0, epsilon = 1e-15);
        let g = build_gutkin_table(5, 0, 1.0, 0.05).unwrap();
        let d: f64 = 0.91174;
        let expect = 2.0 * (1.0 - 0.05 / 24.0 * (5.0 * d).cos()) * d.sin();
        assert_abs_diff_eq!(
            generating_value(&g.curve, 0.0, 2.0 * d).unwrap(),
            expect,
            epsilon = 1e-14
        );
        assert!(matches!(generating_value(&c, 1.0, 1.0), Err(Error::DegenerateChord(_))));
        assert!(matches!(generating_value(&c, 0.0, 7.0), Err(Error::DegenerateChord(_))));
    }

    #[test]
    fn second_derivative_examples() {
        let c = circle();
        let d = generating_second_derivs(&c, 0.0, FRAC_PI_2).unwrap();
        let v = 0.5 * FRAC_PI_4.sin();
        assert_abs_diff_eq!(d.s11, -v, epsilon = 1e-15);
        assert_abs_diff_eq!(d.s12, v, epsilon = 1e-15);
        assert_abs_diff_eq!(d.s22, -v, epsilon = 1e-15);
        let d = generating_second_derivs(&c, 0.0, PI).unwrap();
        assert_abs_diff_eq!(d.s11, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.s12, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.s22, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn circle_reflections() {
        let c = circle();
        let (next, chord) = reflect_geometric(&c, &OrientedLine2D::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(next.p, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(next.phi, 2.0 * FRAC_PI_3, epsilon = 1e-14);
        assert_abs_diff_eq!(chord.angle_back, FRAC_PI_3, epsilon = 1e-14);
        assert_abs_diff_eq!(chord.angle_fwd, FRAC_PI_3, epsilon = 1e-14);

        let (next, chord) = reflect_geometric(&c, &OrientedLine2D::new(0.0, 0.4)).unwrap();
        assert_abs_diff_eq!(next.p, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(next.phi, 0.4 + PI, epsilon = 1e-14);
        assert_abs_diff_eq!(chord.angle_fwd, FRAC_PI_2, epsilon = 1e-14);
        assert_abs_diff_eq!(chord.angle_back, FRAC_PI_2, epsilon = 1e-14);

        let next = reflect_variational(&c, &OrientedLine2D::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(next.p, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(next.phi, 2.0 * FRAC_PI_3, epsilon = 1e-14);

        let (delta, phi0): (f64, f64) = (0.3, 1.1);
        let next = reflect_variational(&c, &OrientedLine2D::new(delta.cos(), phi0)).unwrap();
        assert_abs_diff_eq!(next.p, delta.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(next.phi, phi0 + 2.0 * delta, epsilon = 1e-13);
    }

    #[test]
    fn missing_and_tangent_lines() {
        let c = circle();
        assert_eq!(
            reflect_variational(&c, &OrientedLine2D::new(1.2, 0.3)),
            Err(Error::NoIntersection)
        );
        assert_eq!(
            chord_incidence_angles(&c, &OrientedLine2D::new(-1.0, 0.3)),
            Err(Error::NoIntersection)
        );
        assert_eq!(
            chord_incidence_angles(&c, &OrientedLine2D::new(1.0 - 1e-14, 0.3)),
            Err(Error::TangentLine)
        );
    }

    #[test]
    fn constant_angle_line_examples() {
        let c = circle();
        let l = constant_angle_line(&c, FRAC_PI_3, 0.0);
        assert_abs_diff_eq!(l.p, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(l.phi, FRAC_PI_3, epsilon = 1e-15);
        let l = constant_angle_line(&c, FRAC_PI_2, 0.8);
        assert_abs_diff_eq!(l.p, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.phi, 0.8 + FRAC_PI_2, epsilon = 1e-15);

        let g = build_gutkin_table(5, 0, 1.0, 0.05).unwrap();
        let l = constant_angle_line(&g.curve, g.delta, 0.0);
        assert_abs_diff_eq!(l.p, g.curve.eval_support(0.0).0 * g.delta.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(l.phi, g.delta, epsilon = 1e-15);
        // The image departs from x(2δ) at angle δ again.
        let (next, _) = reflect_geometric(&g.curve, &l).unwrap();
        let expect = constant_angle_line(&g.curve, g.delta, 2.0 * g.delta);
        assert_abs_diff_eq!(next.p, expect.p, epsilon = 1e-12);
        assert!(same_angle(next.phi, expect.phi) < 1e-12);
    }

    #[test]
    fn incidence_on_gutkin_table() {
        let g = build_gutkin_table(5, 0, 1.0, 0.05).unwrap();
        let chord = chord_incidence_angles(&g.curve, &constant_angle_line(&g.curve, g.delta, 0.37)).unwrap();
        assert_abs_diff_eq!(chord.angle_back, g.delta, epsilon = 1e-12);
        assert_abs_diff_eq!(chord.angle_fwd, g.delta, epsilon = 1e-8);
        assert!(same_angle(chord.psi_back, 0.37) < 1e-13);
        for psi in [chord.psi_back, chord.psi_fwd] {
            assert!(line_offset(&g.curve, &chord.line, psi).abs() < 1e-10);
        }
    }

    #[test]
    fn verify_examples() {
        let c = circle();
        for delta in [0.2, 0.9, FRAC_PI_2] {
            assert!(verify_constant_angle(&c, delta, 360).unwrap() < 1e-12);
        }
        let g = build_gutkin_table(5, 0, 1.0, 0.05).unwrap();
        assert!(verify_constant_angle(&g.curve, g.delta, 360).unwrap() < 1e-8);
        assert!(verify_constant_angle(&g.curve, 0.5, 360).unwrap() > 1e-3);
        assert!(verify_constant_angle(&g.curve, 0.5, 4).is_err());
    }

    #[test]
    fn circle_orbits() {
        let c = circle();
        let lines = orbit(&c, OrientedLine2D::new(0.5, 0.0), 3).unwrap();
        assert_eq!(lines.len(), 4);
        for (i, l) in lines.iter().enumerate() {
            assert_abs_diff_eq!(l.p, 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(l.phi, i as f64 * 2.0 * FRAC_PI_3, epsilon = 1e-13);
        }
        let start = OrientedLine2D::new(FRAC_PI_4.cos(), 0.0);
        let lines = orbit(&c, start, 8).unwrap();
        assert_abs_diff_eq!(lines[8].p, start.p, epsilon = 1e-13);
        assert!(same_angle(lines[8].phi, start.phi) < 1e-12);
        // δ = π/4 advances φ by π/2, so the orbit already closes after four bounces.
        assert!(same_angle(lines[4].phi, start.phi) < 1e-12);
        assert!(lines[1..4].iter().all(|l| same_angle(l.phi, 0.0) > 0.1));
    }

    #[test]
    fn orbit_obeys_billiard_law() {
        let g = build_gutkin_table(7, 0, 1.0, 0.08).unwrap();
        let chords = orbit_chords(&g.curve, OrientedLine2D::new(0.31, 0.2), 200).unwrap();
        assert!(billiard_law_residual(&chords) < 1e-9);
    }

    #[test]
    fn csv_layout() {
        let c = circle();
        let chords = orbit_chords(&c, OrientedLine2D::new(0.5, 0.0), 2).unwrap();
        let mut buf = Vec::new();
        write_orbit_csv(&mut buf, &chords, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], ORBIT_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,5.0000000000000000e-1,0.0000000000000000e0,"));
        assert_eq!(lines[2].split(',').count(), 7);
    }

    #[test]
    fn rigidity_examples() {
        let c = circle();
        let strip = Strip::new(0.3, 1.2).unwrap();
        assert!(rigidity_integral(&c, strip, 32).unwrap().abs() < 1e-10);
        assert_eq!(rigidity_integral_closed(&c, strip), 0.0);

        let g = build_gutkin_table(5, 0, 1.0, 0.05).unwrap();
        let strip = Strip::new(g.delta, FRAC_PI_2).unwrap();
        let closed = rigidity_integral_closed(&g.curve, strip);
        let quad = rigidity_integral(&g.curve, strip, 32).unwrap();
        assert_abs_diff_eq!(closed, 9.35e-3, epsilon = 5e-5);
        assert!(((quad - closed) / closed).abs() < 1e-6);

        let ellish = SupportCurve::new(TrigPolynomial::single(1.0, 2, 0.01, 0.0)).unwrap();
        assert!(rigidity_integral(&ellish, Strip::new(0.2, 0.4).unwrap(), 16).unwrap() > 0.0);
        assert!(rigidity_integral(&ellish, strip, 4).is_err());
    }

    #[test]
    fn strip_validation() {
        assert!(Strip::new(0.5, 0.5).is_err());
        assert!(Strip::new(0.0, 0.5).is_err());
        assert!(Strip::new(0.5, 1.7).is_err());
        assert!(Strip::new(0.5, FRAC_PI_2).is_ok());
    }
}
