//! Billiards inside ellipsoids `{⟨A⁻¹x, x⟩ = 1}` in R^d.
//!
//! An oriented line is `{m + t n}` with `|n| = 1`, `m ⊥ n`. The billiard map
//! `(m₁, n₁) ↦ (m₂, n₂)` is generated by
//! `S(n₁, n₂) = h(ν)|n₁ − n₂| = ⟨A(n₁ − n₂), n₁ − n₂⟩^{1/2}` with
//! `ν = (n₁ − n₂)/|n₁ − n₂|`, through `m₁ = D₁S` and `m₂ = −D₂S`.
//! Normals are outward throughout this module.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `‖ν‖ = 1` for direction arguments.
pub const UNIT_TOL: f64 = 1e-9;
/// Discriminants below this magnitude are treated as tangency.
pub const TANGENT_DISCRIMINANT: f64 = 1e-14;
/// Great-circle step for first derivatives on the sphere of directions.
pub const SPHERE_FD_STEP: f64 = 1e-5;
/// Step for the nested (mixed) second differences.
pub const MIXED_FD_STEP: f64 = 1e-4;
/// Dimension cap used by the command-line front end.
pub const MAX_CLI_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Quadric {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
}

impl Quadric {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "quadric matrix must be square with d >= 2, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let asym = (&a - a.transpose()).abs().max();
        if !(asym < 1e-14 * a.abs().max().max(1.0)) {
            return Err(Error::NotPositiveDefinite);
        }
        let chol = a.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        let a_inv = chol.inverse();
        Ok(Self { a, a_inv })
    }

    pub fn from_row_major(d: usize, data: &[f64]) -> Result<Self> {
        if data.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(d, d, data))
    }

    /// Axis-aligned ellipsoid; `squared_axes[i]` is the squared semi-axis.
    pub fn diagonal(squared_axes: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_row_slice(squared_axes)))
    }

    pub fn sphere(d: usize, radius: f64) -> Result<Self> {
        Self::new(DMatrix::identity(d, d) * (radius * radius))
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    /// `⟨A⁻¹x, x⟩ − 1`.
    pub fn level(&self, x: &DVector<f64>) -> f64 {
        (&self.a_inv * x).dot(x) - 1.0
    }

    pub fn outward_normal(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.a_inv * x).normalize()
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    fn check_unit(&self, v: &DVector<f64>) -> Result<()> {
        self.check_dim(v)?;
        let norm = v.norm();
        if !((norm - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::NonUnit(norm));
        }
        Ok(())
    }
}

/// `{"d": 3, "A": [row-major entries]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidSpec {
    pub d: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
}

impl EllipsoidSpec {
    pub fn from_quadric(q: &Quadric) -> Self {
        let d = q.dim();
        Self {
            d,
            a: (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| q.a[(i, j)])
                .collect(),
        }
    }

    pub fn quadric(&self) -> Result<Quadric> {
        Quadric::from_row_major(self.d, &self.a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedLineND {
    pub n: DVector<f64>,
    pub m: DVector<f64>,
}

impl OrientedLineND {
    /// Line through `point` with direction `dir` (normalized here).
    pub fn through(point: &DVector<f64>, dir: &DVector<f64>) -> Self {
        let n = dir.normalize();
        let m = point - point.dot(&n) * &n;
        Self { n, m }
    }

    pub fn reversed(&self) -> Self {
        Self {
            n: -&self.n,
            m: self.m.clone(),
        }
    }

    /// `(|‖n‖ − 1|, |⟨m, n⟩|)`.
    pub fn invariant_residuals(&self) -> (f64, f64) {
        ((self.n.norm() - 1.0).abs(), self.m.dot(&self.n).abs())
    }
}

/// `h(ν) = ⟨Aν, ν⟩^{1/2}`.
pub fn ellipsoid_support(q: &Quadric, nu: &DVector<f64>) -> Result<f64> {
    q.check_unit(nu)?;
    Ok((q.matrix() * nu).dot(nu).sqrt())
}

/// Boundary point with outward unit normal `nu`: `⟨Aν, ν⟩^{−1/2} Aν`.
pub fn gauss_inverse(q: &Quadric, nu: &DVector<f64>) -> Result<DVector<f64>> {
    q.check_unit(nu)?;
    let a_nu = q.matrix() * nu;
    let scale = a_nu.dot(nu).sqrt();
    Ok(a_nu / scale)
}

fn chord_direction(q: &Quadric, n1: &DVector<f64>, n2: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    q.check_dim(n1)?;
    q.check_dim(n2)?;
    let diff = n1 - n2;
    let len = diff.norm();
    if len < 1e-12 {
        return Err(Error::CoincidentDirections);
    }
    Ok((diff / len, len))
}

/// `S(n₁, n₂) = ⟨A(n₁ − n₂), n₁ − n₂⟩^{1/2}`.
pub fn generating_value_nd(q: &Quadric, n1: &DVector<f64>, n2: &DVector<f64>) -> Result<f64> {
    chord_direction(q, n1, n2)?;
    let diff = n1 - n2;
    Ok((q.matrix() * &diff).dot(&diff).sqrt())
}

/// The same value through the support function, `h(ν)|n₁ − n₂|`.
pub fn generating_value_nd_general(q: &Quadric, n1: &DVector<f64>, n2: &DVector<f64>) -> Result<f64> {
    let (nu, len) = chord_direction(q, n1, n2)?;
    Ok(ellipsoid_support(q, &nu)? * len)
}

/// One reflection: the exit point, its outward normal and the outgoing line.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounce {
    pub point: DVector<f64>,
    pub normal: DVector<f64>,
    pub next: OrientedLineND,
}

// Roots of ⟨A⁻¹(m + tn), m + tn⟩ = 1, smaller first.
fn line_roots(q: &Quadric, line: &OrientedLineND) -> Result<(f64, f64)> {
    q.check_dim(&line.n)?;
    q.check_dim(&line.m)?;
    let ai_n = q.inverse() * &line.n;
    let a = ai_n.dot(&line.n);
    let b = ai_n.dot(&line.m);
    let c = q.level(&line.m);
    let disc = b * b - a * c;
    if disc.abs() < TANGENT_DISCRIMINANT {
        return Err(Error::TangentLine);
    }
    if disc < 0.0 {
        return Err(Error::NoIntersection);
    }
    let root = disc.sqrt();
    // Cancellation-free pair.
    let big = if b >= 0.0 { -b - root } else { -b + root };
    let (t1, t2) = if big == 0.0 { (0.0, 0.0) } else { (big / a, c / big) };
    Ok((t1.min(t2), t1.max(t2)))
}

/// Reflects `line` at its exit point (larger root along the direction of travel).
pub fn reflect_nd(q: &Quadric, line: &OrientedLineND) -> Result<Bounce> {
    let (_, t_exit) = line_roots(q, line)?;
    let point = &line.m + t_exit * &line.n;
    let normal = q.outward_normal(&point);
    let n2 = (&line.n - 2.0 * line.n.dot(&normal) * &normal).normalize();
    let m2 = &point - point.dot(&n2) * &n2;
    debug_assert!(
        ((&line.n - &n2).normalize() - &normal).norm() < 1e-9,
        "exit normal differs from (n1 - n2)/|n1 - n2|"
    );
    Ok(Bounce {
        point,
        normal,
        next: OrientedLineND { n: n2, m: m2 },
    })
}

/// Entry point of the line (smaller root).
pub fn entry_point(q: &Quadric, line: &OrientedLineND) -> Result<DVector<f64>> {
    let (t_entry, _) = line_roots(q, line)?;
    Ok(&line.m + t_entry * &line.n)
}

/// Orthonormal basis of `n⊥`, from the standard basis minus the axis most
/// parallel to `n`, by Gram–Schmidt.
pub fn tangent_basis(n: &DVector<f64>) -> Vec<DVector<f64>> {
    let d = n.len();
    let skip = n.iamax();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
    for axis in (0..d).filter(|&i| i != skip) {
        let mut v = DVector::from_fn(d, |i, _| if i == axis { 1.0 } else { 0.0 });
        // Two passes keep the basis orthogonal to rounding level.
        for _ in 0..2 {
            v -= v.dot(n) * n;
            for b in &basis {
                v -= v.dot(b) * b;
            }
        }
        basis.push(v.normalize());
    }
    basis
}

fn great_circle(n: &DVector<f64>, xi: &DVector<f64>, t: f64) -> DVector<f64> {
    t.cos() * n + t.sin() * xi
}

/// Tangent vector of the covector `D₁S` (or `D₂S`) by central differences
/// along great circles through the basis directions.
fn sphere_gradient(
    basis: &[DVector<f64>],
    mut f: impl FnMut(f64, &DVector<f64>) -> Result<f64>,
) -> Result<DVector<f64>> {
    let h = SPHERE_FD_STEP;
    let mut grad = DVector::zeros(basis[0].len());
    for xi in basis {
        let slope = (f(h, xi)? - f(-h, xi)?) / (2.0 * h);
        grad += slope * xi;
    }
    Ok(grad)
}

/// Residuals of the gradient contract for one chord.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    /// `‖D₁S − m₁‖` with `D₁S` from finite differences.
    pub r1: f64,
    /// `‖D₂S + m₂‖` with `D₂S` from finite differences and `m₂` from [`reflect_nd`].
    pub r2: f64,
    /// Largest gap between the finite-difference gradients and the projections
    /// `±(P − ⟨P, nᵢ⟩nᵢ)`.
    pub analytic_gap: f64,
    /// `‖n₂ − n₂(reflect)‖ + ‖P − P(reflect)‖`.
    pub reflection_gap: f64,
    pub d1s: DVector<f64>,
    pub d2s: DVector<f64>,
}

pub fn gradient_contract_residual(q: &Quadric, n1: &DVector<f64>, n2: &DVector<f64>) -> Result<GradientCheck> {
    q.check_unit(n1)?;
    q.check_unit(n2)?;
    let (nu, _) = chord_direction(q, n1, n2)?;
    let p = gauss_inverse(q, &nu.normalize())?;
    let incoming = OrientedLineND::through(&p, n1);
    let bounce = reflect_nd(q, &incoming)?;
    let reflection_gap = (&bounce.next.n - n2).norm() + (&bounce.point - &p).norm();

    let d1s = sphere_gradient(&tangent_basis(n1), |t, xi| {
        generating_value_nd(q, &great_circle(n1, xi, t), n2)
    })?;
    let d2s = sphere_gradient(&tangent_basis(n2), |t, xi| {
        generating_value_nd(q, n1, &great_circle(n2, xi, t))
    })?;

    let proj1 = &p - p.dot(n1) * n1;
    let proj2 = &p - p.dot(n2) * n2;
    Ok(GradientCheck {
        r1: (&d1s - &incoming.m).norm(),
        r2: (&d2s + &bounce.next.m).norm(),
        analytic_gap: (&d1s - &proj1).norm().max((&d2s + &proj2).norm()),
        reflection_gap,
        d1s,
        d2s,
    })
}

/// Mixed second derivative of `S` in the tangent bases at `n₁` and `n₂`
/// (row `i`: basis vector `i` at `n₁`; column `j`: basis vector `j` at `n₂`).
pub fn mixed_hessian(q: &Quadric, n1: &DVector<f64>, n2: &DVector<f64>) -> Result<DMatrix<f64>> {
    q.check_unit(n1)?;
    q.check_unit(n2)?;
    chord_direction(q, n1, n2)?;
    let (b1, b2) = (tangent_basis(n1), tangent_basis(n2));
    let h = MIXED_FD_STEP;
    let s = |t: f64, xi: &DVector<f64>, u: f64, eta: &DVector<f64>| {
        generating_value_nd(q, &great_circle(n1, xi, t), &great_circle(n2, eta, u))
    };
    let mut m = DMatrix::zeros(b1.len(), b2.len());
    for (i, xi) in b1.iter().enumerate() {
        for (j, eta) in b2.iter().enumerate() {
            m[(i, j)] =
                (s(h, xi, h, eta)? - s(h, xi, -h, eta)? - s(-h, xi, h, eta)? + s(-h, xi, -h, eta)?) / (4.0 * h * h);
        }
    }
    Ok(m)
}

/// Smallest singular value of [`mixed_hessian`].
pub fn twist_jacobian_min_sv(q: &Quadric, n1: &DVector<f64>, n2: &DVector<f64>) -> Result<f64> {
    let m = mixed_hessian(q, n1, n2)?;
    Ok(m.singular_values().min())
}

/// Angle between the direction `n` and the tangent hyperplane with normal `nu`.
pub fn incidence_angle(n: &DVector<f64>, nu: &DVector<f64>) -> f64 {
    let along = n.dot(nu);
    let across = (n - along * nu).norm();
    along.abs().atan2(across)
}

/// Line leaving the boundary point with outward normal `nu` into the body at
/// angle `delta`, tilted towards `tangent_hint` (projected onto the tangent space).
pub fn constant_angle_line_nd(
    q: &Quadric,
    delta: f64,
    nu: &DVector<f64>,
    tangent_hint: &DVector<f64>,
) -> Result<OrientedLineND> {
    let start = gauss_inverse(q, nu)?;
    q.check_dim(tangent_hint)?;
    let tangent = tangent_hint - tangent_hint.dot(nu) * nu;
    let len = tangent.norm();
    if len < 1e-12 {
        return Err(Error::InvalidInput("tangent hint is parallel to the normal".into()));
    }
    let dir = delta.cos() * (tangent / len) - delta.sin() * nu;
    Ok(OrientedLineND::through(&start, &dir))
}

/// `steps` reflections from `line`.
pub fn orbit_nd(q: &Quadric, line: &OrientedLineND, steps: usize) -> Result<Vec<Bounce>> {
    let mut out = Vec::with_capacity(steps);
    let mut current = line.clone();
    for _ in 0..steps {
        let b = reflect_nd(q, &current)?;
        current = b.next.clone();
        out.push(b);
    }
    Ok(out)
}

/// Largest `|incidence − δ|` over the departure point and `steps` bounces.
pub fn constant_angle_residual_nd(q: &Quadric, delta: f64, line: &OrientedLineND, steps: usize) -> Result<f64> {
    let start = entry_point(q, line)?;
    let mut worst = (incidence_angle(&line.n, &q.outward_normal(&start)) - delta).abs();
    for b in orbit_nd(q, line, steps)? {
        worst = worst.max((incidence_angle(&b.next.n, &b.normal) - delta).abs());
    }
    Ok(worst)
}

pub fn orbit_csv_header(d: usize) -> String {
    let mut cols = vec!["step".to_string()];
    cols.extend((1..=d).map(|i| format!("P_{i}")));
    cols.extend((1..=d).map(|i| format!("n_{i}")));
    cols.push("incidence_angle".into());
    cols.join(",")
}

/// Step 0 is the departure point with the initial direction; step `i ≥ 1` is
/// bounce `i` with the outgoing direction.
pub fn write_orbit_csv_nd<W: Write>(
    mut w: W,
    q: &Quadric,
    line: &OrientedLineND,
    bounces: &[Bounce],
) -> io::Result<()> {
    writeln!(w, "{}", orbit_csv_header(q.dim()))?;
    let start = entry_point(q, line).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    let first = (
        start.clone(),
        line.n.clone(),
        incidence_angle(&line.n, &q.outward_normal(&start)),
    );
    let rest = bounces
        .iter()
        .map(|b| (b.point.clone(), b.next.n.clone(), incidence_angle(&b.next.n, &b.normal)));
    for (step, (p, n, angle)) in std::iter::once(first).chain(rest).enumerate() {
        write!(w, "{step}")?;
        for x in p.iter().chain(n.iter()) {
            write!(w, ",{x:.16e}")?;
        }
        writeln!(w, ",{angle:.16e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn support_examples() {
        let s = Quadric::sphere(3, 1.0).unwrap();
        assert_abs_diff_eq!(
            ellipsoid_support(&s, &v(&[0.0, 0.6, 0.8])).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let e2 = Quadric::diagonal(&[4.0, 1.0]).unwrap();
        assert_abs_diff_eq!(ellipsoid_support(&e2, &v(&[1.0, 0.0])).unwrap(), 2.0, epsilon = 1e-15);
        let e3 = Quadric::diagonal(&[4.0, 1.0, 1.0]).unwrap();
        let nu = v(&[1.0, 1.0, 1.0]) / 3f64.sqrt();
        assert_abs_diff_eq!(ellipsoid_support(&e3, &nu).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(
            ellipsoid_support(&e3, &v(&[1.0, 1.0, 0.0])),
            Err(Error::NonUnit(_))
        ));
    }

    #[test]
    fn gauss_inverse_examples() {
        let s = Quadric::sphere(3, 2.0).unwrap();
        let nu = v(&[0.0, 0.6, 0.8]);
        assert_abs_diff_eq!(gauss_inverse(&s, &nu).unwrap(), 2.0 * &nu, epsilon = 1e-15);
        let e = Quadric::diagonal(&[4.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            gauss_inverse(&e, &v(&[1.0, 0.0])).unwrap(),
            v(&[2.0, 0.0]),
            epsilon = 1e-15
        );
        let nu = v(&[1.0, 1.0]) / 2f64.sqrt();
        let x = gauss_inverse(&e, &nu).unwrap();
        assert_abs_diff_eq!(x, v(&[4.0, 1.0]) / 5f64.sqrt(), epsilon = 1e-15);
        assert!(e.level(&x).abs() < 1e-12);
        assert_abs_diff_eq!(e.outward_normal(&x), nu, epsilon = 1e-15);
    }

    #[test]
    fn generating_value_examples() {
        let s = Quadric::sphere(3, 1.0).unwrap();
        let val = generating_value_nd(&s, &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(val, 2f64.sqrt(), epsilon = 1e-15);
        let e = Quadric::diagonal(&[4.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            generating_value_nd(&e, &v(&[1.0, 0.0]), &v(&[-1.0, 0.0])).unwrap(),
            4.0,
            epsilon = 1e-15
        );
        assert_eq!(
            generating_value_nd(&e, &v(&[1.0, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::CoincidentDirections)
        );
    }

    #[test]
    fn rejects_bad_matrices() {
        assert_eq!(Quadric::diagonal(&[1.0, -1.0]), Err(Error::NotPositiveDefinite));
        assert_eq!(
            Quadric::from_row_major(2, &[1.0, 0.5, 0.4, 1.0]),
            Err(Error::NotPositiveDefinite)
        );
        assert!(Quadric::from_row_major(2, &[1.0, 0.0, 0.0]).is_err());
        assert!(Quadric::diagonal(&[1.0]).is_err());
    }

    #[test]
    fn sphere_diameter_bounce() {
        let s = Quadric::sphere(3, 1.0).unwrap();
        let line = OrientedLineND {
            n: v(&[1.0, 0.0, 0.0]),
            m: v(&[0.0, 0.0, 0.0]),
        };
        let b = reflect_nd(&s, &line).unwrap();
        assert_abs_diff_eq!(b.point, v(&[1.0, 0.0, 0.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(b.next.n, v(&[-1.0, 0.0, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn misses_and_tangents() {
        let s = Quadric::sphere(3, 1.0).unwrap();
        let miss = OrientedLineND {
            n: v(&[1.0, 0.0, 0.0]),
            m: v(&[0.0, 1.5, 0.0]),
        };
        assert_eq!(reflect_nd(&s, &miss), Err(Error::NoIntersection));
        let graze = OrientedLineND {
            n: v(&[1.0, 0.0, 0.0]),
            m: v(&[0.0, 1.0, 0.0]),
        };
        assert_eq!(reflect_nd(&s, &graze), Err(Error::TangentLine));
    }

    #[test]
    fn sphere_gradient_example() {
        let s = Quadric::sphere(3, 1.0).unwrap();
        let g = gradient_contract_residual(&s, &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(g.d1s, v(&[0.0, -1.0, 0.0]) / 2f64.sqrt(), epsilon = 1e-9);
        assert!(g.r1 < 1e-8 && g.r2 < 1e-8);
        assert!(g.reflection_gap < 1e-14);
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let n = v(&[0.3, -0.1, 0.9, 0.2]).normalize();
        let b = tangent_basis(&n);
        assert_eq!(b.len(), 3);
        for (i, x) in b.iter().enumerate() {
            assert!(x.dot(&n).abs() < 1e-15);
            for (j, y) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((x.dot(y) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn planar_twist_matches_s12() {
        use crate::billiard2d::generating_second_derivs;
        use crate::support::SupportCurve;
        let q = Quadric::sphere(2, 1.0).unwrap();
        let circle = SupportCurve::circle(1.0).unwrap();
        for (t1, t2) in [(0.2, 1.9), (1.0, 3.5), (-0.4, 0.3)] {
            let n1 = v(&[f64::cos(t1), f64::sin(t1)]);
            let n2 = v(&[f64::cos(t2), f64::sin(t2)]);
            let m = mixed_hessian(&q, &n1, &n2).unwrap();
            let planar = generating_second_derivs(&circle, t1, t2).unwrap();
            assert_abs_diff_eq!(m[(0, 0)].abs(), planar.s12, epsilon = 1e-6);
        }
    }

    #[test]
    fn incidence_of_constant_angle_line() {
        let e = Quadric::diagonal(&[4.0, 1.0, 2.0]).unwrap();
        let nu = v(&[0.2, 0.7, -0.4]).normalize();
        let line = constant_angle_line_nd(&e, 0.6, &nu, &v(&[0.0, 0.0, 1.0])).unwrap();
        let start = entry_point(&e, &line).unwrap();
        assert_abs_diff_eq!(start, gauss_inverse(&e, &nu).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(incidence_angle(&line.n, &nu), 0.6, epsilon = 1e-14);
    }

    #[test]
    fn spec_json_round_trip() {
        let e = Quadric::diagonal(&[4.0, 1.0, 1.0]).unwrap();
        let spec = EllipsoidSpec::from_quadric(&e);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"d":3,"A":[4.0,0.0,0.0,0.0,1.0,0.0,0.0,0.0,1.0]}"#);
        let back: EllipsoidSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.quadric().unwrap(), e);
    }

    #[test]
    fn csv_header() {
        assert_eq!(orbit_csv_header(3), "step,P_1,P_2,P_3,n_1,n_2,n_3,incidence_angle");
    }

    #[test]
    fn sphere_mixed_hessian_closed_form() {
        // For S = R|n₁ − n₂| the mixed derivative along unit tangents ξ at n₁,
        // η at n₂ is −⟨ξ, η⟩/|n₁−n₂| − ⟨ξ, n₂⟩⟨n₁, η⟩/|n₁−n₂|³ (times R).
        let r = 1.7;
        let q = Quadric::sphere(3, r).unwrap();
        let n1 = v(&[0.6, 0.0, 0.8]);
        let n2 = v(&[-0.48, 0.6, 0.64]).normalize();
        let m = mixed_hessian(&q, &n1, &n2).unwrap();
        let len = (&n1 - &n2).norm();
        let (b1, b2) = (tangent_basis(&n1), tangent_basis(&n2));
        for (i, xi) in b1.iter().enumerate() {
            for (j, eta) in b2.iter().enumerate() {
                let exact = -r * (xi.dot(eta) / len + xi.dot(&n2) * n1.dot(eta) / len.powi(3));
                assert_abs_diff_eq!(m[(i, j)], exact, epsilon = 1e-6);
            }
        }
        assert!(m.singular_values().min() > 0.1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        fn unit(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
            loop {
                let x = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                let n = x.norm();
                if n > 0.1 && n <= 1.0 {
                    return x / n;
                }
            }
        }

        /// SPD matrix with eigenvalues in [1, 100] and a random eigenbasis.
        fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> Quadric {
            let g = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let qm = g.qr().q();
            let eig = DVector::from_fn(d, |_, _| rng.random_range(1.0..100.0));
            let a = &qm * DMatrix::from_diagonal(&eig) * qm.transpose();
            Quadric::new((&a + a.transpose()) * 0.5).unwrap()
        }

        fn interior_line(rng: &mut ChaCha8Rng, q: &Quadric) -> OrientedLineND {
            let d = q.dim();
            let p = gauss_inverse(q, &unit(rng, d)).unwrap() * rng.random_range(0.0..0.8);
            OrientedLineND::through(&p, &unit(rng, d))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn reflection_invariants(seed in any::<u64>(), d in 2usize..6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let q = random_spd(&mut rng, d);
                let line = interior_line(&mut rng, &q);
                let b = reflect_nd(&q, &line).unwrap();
                let (dn, dm) = b.next.invariant_residuals();
                prop_assert!(dn < 1e-12 && dm < 1e-12 * b.point.norm().max(1.0));
                prop_assert!(q.level(&b.point).abs() < 1e-12);
                let nu = (&line.n - &b.next.n).normalize();
                prop_assert!((nu - &b.normal).norm() < 1e-10);

                let back = reflect_nd(&q, &b.next.reversed()).unwrap();
                prop_assert!((&back.next.n + &line.n).norm() < 1e-10);
                prop_assert!((&back.next.m - &line.m).norm() < 1e-10 * line.m.norm().max(1.0) * 10.0);
            }

            #[test]
            fn closed_and_general_forms_agree(seed in any::<u64>(), d in 2usize..8) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let q = random_spd(&mut rng, d);
                let (n1, n2) = (unit(&mut rng, d), unit(&mut rng, d));
                let a = generating_value_nd(&q, &n1, &n2).unwrap();
                let b = generating_value_nd_general(&q, &n1, &n2).unwrap();
                prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
            }

            #[test]
            fn sphere_chords_have_constant_length(seed in any::<u64>(), r in 0.2f64..5.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let q = Quadric::sphere(3, r).unwrap();
                let line = interior_line(&mut rng, &q);
                let pts: Vec<_> = orbit_nd(&q, &line, 20).unwrap().into_iter().map(|b| b.point).collect();
                let first = (&pts[1] - &pts[0]).norm();
                for w in pts.windows(2) {
                    prop_assert!(((&w[1] - &w[0]).norm() - first).abs() < 1e-10 * r.max(1.0));
                }
            }

            #[test]
            fn gradient_contract_on_random_spd(seed in any::<u64>(), d in 2usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let q = random_spd(&mut rng, d);
                // Keep the chord away from grazing so the finite differences are well-conditioned.
                let (n1, n2) = loop {
                    let (a, b) = (unit(&mut rng, d), unit(&mut rng, d));
                    if (&a - &b).norm() > 0.2 {
                        break (a, b);
                    }
                };
                let g = gradient_contract_residual(&q, &n1, &n2).unwrap();
                prop_assert!(g.r1 < 1e-7 && g.r2 < 1e-7, "r1 = {:e}, r2 = {:e}", g.r1, g.r2);
                prop_assert!(g.analytic_gap < 1e-7);
                prop_assert!(g.reflection_gap < 1e-9);
            }
        }
    }
}
