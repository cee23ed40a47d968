//! Constant-angle chords along a geodesic.
//!
//! For a unit-speed geodesic `γ(s)` with inner normal `n` and angle `δ`, the
//! chord leaves `γ(s)` in the direction `z = cos δ·v + sin δ·n` and ends at
//! `Γ(s) = γ(s) + l(s) z(s)`. In the frame `(v, n, w)`:
//!
//! ```text
//! Γ̇ = (1 + l̇ cos δ − k l sin δ) v + (l̇ sin δ + k l cos δ) n + τ l sin δ w
//! Γ̈ = a₁ v + a₂ n + a₃ w
//! a₁ = l̈ cos δ − k̇ l sin δ − 2k l̇ sin δ − k² l cos δ
//! a₂ = k + 2k l̇ cos δ − k² l sin δ + l̈ sin δ + k̇ l cos δ − τ² l sin δ
//! a₃ = 2τ l̇ sin δ + τ k l cos δ + τ̇ l sin δ
//! ```

use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use nalgebra::{DMatrix, Matrix3};

use crate::error::{Error, Result};
use crate::geodesic::{FrenetData, GeodesicTrajectory, ImplicitSurface, Vec3};
use crate::stencil;

#[derive(Debug, Clone, PartialEq)]
pub struct ChordCorrespondence {
    pub s: Vec<f64>,
    /// Far endpoints `Γ(s)`.
    pub endpoint: Vec<Vec3>,
    pub l: Vec<f64>,
    pub z: Vec<Vec3>,
    pub endpoint_dot: Vec<Option<Vec3>>,
    pub endpoint_ddot: Vec<Option<Vec3>>,
    pub l_dot: Vec<Option<f64>>,
    pub l_ddot: Vec<Option<f64>>,
    pub delta: f64,
    pub step: f64,
}

pub fn chord_correspondence<S: ImplicitSurface + ?Sized>(
    surface: &S,
    traj: &GeodesicTrajectory,
    delta: f64,
) -> Result<ChordCorrespondence> {
    if !(delta > 0.0 && delta <= FRAC_PI_2) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, π/2], got {delta}")));
    }
    let (c, sn) = (delta.cos(), delta.sin());
    let floor = 1e-12 * surface.diameter();
    let n = traj.len();
    let (mut endpoint, mut l, mut z) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for p in &traj.samples {
        let dir = (c * p.v + sn * surface.inner_normal(&p.x)).normalize();
        let t = surface
            .ray_exit(&p.x, &dir)
            .filter(|&t| t > floor)
            .ok_or(Error::NoExit)?;
        endpoint.push(p.x + t * dir);
        l.push(t);
        z.push(dir);
    }
    let h = traj.step;
    Ok(ChordCorrespondence {
        s: traj.samples.iter().map(|p| p.s).collect(),
        endpoint_dot: stencil::first_derivative(&endpoint, h),
        endpoint_ddot: stencil::second_derivative(&endpoint, h),
        l_dot: stencil::first_derivative(&l, h),
        l_ddot: stencil::second_derivative(&l, h),
        endpoint,
        l,
        z,
        delta,
        step: h,
    })
}

impl ChordCorrespondence {
    pub fn len(&self) -> usize {
        self.l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    /// Angle between `Γ̇` and `z` at each interior sample.
    pub fn exit_angles(&self) -> Vec<Option<f64>> {
        self.endpoint_dot
            .iter()
            .zip(&self.z)
            .map(|(d, z)| d.map(|d| d.angle(z)))
            .collect()
    }

    /// RMS distance of the endpoints from their best-fit plane: the smallest
    /// singular value of the centered samples over `√N`.
    pub fn planarity(&self) -> f64 {
        let n = self.endpoint.len();
        let mean = self.endpoint.iter().sum::<Vec3>() / n as f64;
        let m = DMatrix::from_fn(n, 3, |i, j| self.endpoint[i][j] - mean[j]);
        m.singular_values().min() / (n as f64).sqrt()
    }
}

fn check_aligned(cc: &ChordCorrespondence, frenet: &FrenetData) {
    assert_eq!(cc.len(), frenet.k.len(), "chord and Frenet grids differ");
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleResiduals {
    pub r5: Vec<Option<f64>>,
    pub r6: Vec<Option<f64>>,
    pub r9: Vec<Option<f64>>,
}

fn max_defined(v: &[Option<f64>]) -> f64 {
    v.iter().flatten().fold(0.0, |m, x| m.max(*x))
}

impl AngleResiduals {
    /// `(max R5, max R6, max R9)` over the interior samples.
    pub fn maxima(&self) -> (f64, f64, f64) {
        (max_defined(&self.r5), max_defined(&self.r6), max_defined(&self.r9))
    }
}

pub fn angle_condition_residuals(cc: &ChordCorrespondence, frenet: &FrenetData, delta: f64) -> AngleResiduals {
    check_aligned(cc, frenet);
    let (c, sn) = (delta.cos(), delta.sin());
    let n = cc.len();
    let mut out = AngleResiduals {
        r5: vec![None; n],
        r6: vec![None; n],
        r9: vec![None; n],
    };
    for i in 0..n {
        let (Some(gd), Some(ld), Some(tau)) = (cc.endpoint_dot[i], cc.l_dot[i], frenet.tau[i]) else {
            continue;
        };
        let (k, l) = (frenet.k[i], cc.l[i]);
        let lhs = ld + c;
        let normal_part = (k * l - sn).powi(2) + (tau * l * sn).powi(2);
        out.r5[i] = Some((gd.norm_squared() - (lhs * lhs + normal_part)).abs());
        out.r6[i] = Some((gd.dot(&cc.z[i]) - lhs).abs());
        out.r9[i] = Some((lhs - c / sn * normal_part.sqrt()).abs());
    }
    out
}

/// Frame coefficients of `Γ̇` from the Frenet data and `l`.
pub fn first_derivative_coeffs(k: f64, tau: f64, l: f64, l_dot: f64, delta: f64) -> [f64; 3] {
    let (c, s) = (delta.cos(), delta.sin());
    [1.0 + l_dot * c - k * l * s, l_dot * s + k * l * c, tau * l * s]
}

/// Frame coefficients `(a₁, a₂, a₃)` of `Γ̈`.
#[allow(clippy::too_many_arguments)]
pub fn second_derivative_coeffs(
    k: f64,
    k_dot: f64,
    tau: f64,
    tau_dot: f64,
    l: f64,
    l_dot: f64,
    l_ddot: f64,
    delta: f64,
) -> [f64; 3] {
    let (c, s) = (delta.cos(), delta.sin());
    [
        l_ddot * c - k_dot * l * s - 2.0 * k * l_dot * s - k * k * l * c,
        k + 2.0 * k * l_dot * c - k * k * l * s + l_ddot * s + k_dot * l * c - tau * tau * l * s,
        2.0 * tau * l_dot * s + tau * k * l * c + tau_dot * l * s,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarityRow {
    /// `det[z, Γ̇, Γ̈]` from the sampled endpoints.
    pub d_numeric: f64,
    /// The same determinant from the frame coefficients.
    pub d_analytic: f64,
    /// `l sin δ (k l − sin δ)`.
    pub a_coeff: f64,
}

pub fn planarity_residuals(cc: &ChordCorrespondence, frenet: &FrenetData, delta: f64) -> Vec<Option<PlanarityRow>> {
    check_aligned(cc, frenet);
    let (c, sn) = (delta.cos(), delta.sin());
    (0..cc.len())
        .map(|i| {
            let (gd, gdd) = (cc.endpoint_dot[i]?, cc.endpoint_ddot[i]?);
            let (ld, ldd) = (cc.l_dot[i]?, cc.l_ddot[i]?);
            let (tau, tau_dot, k_dot) = (frenet.tau[i]?, frenet.tau_dot[i]?, frenet.k_dot[i]?);
            let (k, l) = (frenet.k[i], cc.l[i]);
            let d_numeric = Matrix3::from_columns(&[cc.z[i], gd, gdd]).determinant();
            let row1 = first_derivative_coeffs(k, tau, l, ld, delta);
            let row2 = second_derivative_coeffs(k, k_dot, tau, tau_dot, l, ld, ldd, delta);
            let d_analytic = Matrix3::new(
                c, sn, 0.0, //
                row1[0], row1[1], row1[2], //
                row2[0], row2[1], row2[2],
            )
            .determinant();
            Some(PlanarityRow {
                d_numeric,
                d_analytic,
                a_coeff: l * sn * (k * l - sn),
            })
        })
        .collect()
}

/// `min_s ((k l − sin δ)² + τ²)` over samples where `τ` is defined.
pub fn simultaneous_vanish_check(cc: &ChordCorrespondence, frenet: &FrenetData, delta: f64) -> f64 {
    check_aligned(cc, frenet);
    let sn = delta.sin();
    (0..cc.len())
        .filter_map(|i| Some((frenet.k[i] * cc.l[i] - sn).powi(2) + frenet.tau[i]?.powi(2)))
        .fold(f64::INFINITY, f64::min)
}

pub const CHORD_CSV_HEADER: &str = "s,k,tau,l,ldot,R5,R6,R9,D_numeric,D_analytic,A_coeff";

/// One row per sample where every column is defined.
pub fn write_chord_csv<W: Write>(
    mut w: W,
    cc: &ChordCorrespondence,
    frenet: &FrenetData,
    delta: f64,
) -> io::Result<()> {
    let res = angle_condition_residuals(cc, frenet, delta);
    let planar = planarity_residuals(cc, frenet, delta);
    writeln!(w, "{CHORD_CSV_HEADER}")?;
    for (i, row_planar) in planar.iter().enumerate() {
        let (Some(tau), Some(ld), Some(r5), Some(r6), Some(r9), Some(p)) =
            (frenet.tau[i], cc.l_dot[i], res.r5[i], res.r6[i], res.r9[i], *row_planar)
        else {
            continue;
        };
        let row = [
            cc.s[i],
            frenet.k[i],
            tau,
            cc.l[i],
            ld,
            r5,
            r6,
            r9,
            p.d_numeric,
            p.d_analytic,
            p.a_coeff,
        ];
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}
