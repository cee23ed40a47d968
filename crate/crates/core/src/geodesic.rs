//! Geodesics on closed convex surfaces `{F = 0}` in R³ and their Frenet data.
//!
//! `F < 0` inside. The geodesic equation for a unit-speed curve on the level
//! set is `x″ = −(⟨v, ∇²F v⟩ / ‖∇F‖²) ∇F`.

use nalgebra::{Matrix3, Vector3};

use crate::billiard_nd::Quadric;
use crate::error::{Error, Result};
use crate::stencil;

pub type Vec3 = Vector3<f64>;

/// Tolerance on the initial conditions of [`integrate_geodesic`].
pub const INITIAL_TOL: f64 = 1e-10;
/// Largest accepted distance from the surface before a projection.
pub const MAX_STEP_DEFECT: f64 = 1e-6;
/// Curvatures below this are rejected by [`frenet_apparatus`].
pub const MIN_CURVATURE: f64 = 1e-8;

pub trait ImplicitSurface {
    fn value(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
    fn hessian(&self, x: &Vec3) -> Matrix3<f64>;
    /// Largest `t` with `F(x + t·dir) = 0`, if the line meets the surface.
    fn ray_exit(&self, x: &Vec3, dir: &Vec3) -> Option<f64>;
    fn diameter(&self) -> f64;

    /// `−∇F/‖∇F‖`.
    fn inner_normal(&self, x: &Vec3) -> Vec3 {
        -self.gradient(x).normalize()
    }
}

// Far root of a t² + 2b t + c = 0.
fn far_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let disc = b * b - a * c;
    if !(disc >= 0.0) || a <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let q = if b <= 0.0 { -b + root } else { -b - root };
    let (t1, t2) = (q / a, if q != 0.0 { c / q } else { 0.0 });
    Some(t1.max(t2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub radius: f64,
}

impl Sphere {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { radius })
    }
}

impl ImplicitSurface for Sphere {
    fn value(&self, x: &Vec3) -> f64 {
        x.norm_squared() - self.radius * self.radius
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        2.0 * x
    }

    fn hessian(&self, _x: &Vec3) -> Matrix3<f64> {
        Matrix3::identity() * 2.0
    }

    fn ray_exit(&self, x: &Vec3, dir: &Vec3) -> Option<f64> {
        far_root(dir.norm_squared(), x.dot(dir), self.value(x))
    }

    fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

/// `F = ⟨A⁻¹x, x⟩ − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    a: Matrix3<f64>,
    a_inv: Matrix3<f64>,
}

impl Ellipsoid {
    pub fn new(a: Matrix3<f64>) -> Result<Self> {
        if !((a - a.transpose()).abs().max() < 1e-14 * a.abs().max().max(1.0)) {
            return Err(Error::NotPositiveDefinite);
        }
        let chol = a.cholesky().ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            a,
            a_inv: chol.inverse(),
        })
    }

    /// Semi-axes `axes[i]` along the coordinate axes.
    pub fn axes(axes: [f64; 3]) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&Vec3::from(axes.map(|r| r * r))))
    }

    pub fn from_quadric(q: &Quadric) -> Result<Self> {
        if q.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: q.dim(),
            });
        }
        Self::new(Matrix3::from_fn(|i, j| q.matrix()[(i, j)]))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.a
    }
}

impl ImplicitSurface for Ellipsoid {
    fn value(&self, x: &Vec3) -> f64 {
        (self.a_inv * x).dot(x) - 1.0
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        2.0 * (self.a_inv * x)
    }

    fn hessian(&self, _x: &Vec3) -> Matrix3<f64> {
        self.a_inv * 2.0
    }

    fn ray_exit(&self, x: &Vec3, dir: &Vec3) -> Option<f64> {
        let ad = self.a_inv * dir;
        far_root(ad.dot(dir), ad.dot(x), self.value(x))
    }

    fn diameter(&self) -> f64 {
        2.0 * self.a.symmetric_eigenvalues().max().sqrt()
    }
}

fn acceleration<S: ImplicitSurface + ?Sized>(surface: &S, x: &Vec3, v: &Vec3) -> Vec3 {
    let g = surface.gradient(x);
    -(v.dot(&(surface.hessian(x) * v)) / g.norm_squared()) * g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSample {
    pub s: f64,
    pub x: Vec3,
    pub v: Vec3,
    pub x_ddot: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrajectory {
    pub samples: Vec<GeodesicSample>,
    pub step: f64,
    /// Largest distance `|F|/‖∇F‖` reached by a raw RK4 step before projection.
    pub max_step_defect: f64,
}

/// Largest violations of the trajectory invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintDrift {
    pub level: f64,
    pub speed: f64,
    pub tangential_acceleration: f64,
}

impl GeodesicTrajectory {
    pub fn constraint_drift<S: ImplicitSurface + ?Sized>(&self, surface: &S) -> ConstraintDrift {
        let mut d = ConstraintDrift {
            level: 0.0,
            speed: 0.0,
            tangential_acceleration: 0.0,
        };
        for p in &self.samples {
            d.level = d.level.max(surface.value(&p.x).abs());
            d.speed = d.speed.max((p.v.norm() - 1.0).abs());
            d.tangential_acceleration = d.tangential_acceleration.max(p.x_ddot.dot(&p.v).abs());
        }
        d
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Unit-speed geodesic from `(x0, v0)` sampled every `length / N` with
/// `N = ⌈length / step⌉`; each RK4 step is followed by one Newton projection of
/// `x` onto the surface and a tangential renormalization of `v`.
pub fn integrate_geodesic<S: ImplicitSurface + ?Sized>(
    surface: &S,
    x0: Vec3,
    v0: Vec3,
    length: f64,
    step: f64,
) -> Result<GeodesicTrajectory> {
    if !(length > 0.0 && step > 0.0 && length.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "length and step must be positive, got {length} and {step}"
        )));
    }
    let g0 = surface.gradient(&x0);
    let off = surface
        .value(&x0)
        .abs()
        .max(g0.normalize().dot(&v0).abs())
        .max((v0.norm() - 1.0).abs());
    if !(off <= INITIAL_TOL) {
        return Err(Error::OffSurface(off));
    }
    let n_steps = (length / step).ceil() as usize;
    let h = length / n_steps as f64;
    let mut samples = Vec::with_capacity(n_steps + 1);
    let (mut x, mut v) = (x0, v0);
    samples.push(GeodesicSample {
        s: 0.0,
        x,
        v,
        x_ddot: acceleration(surface, &x, &v),
    });
    let mut max_step_defect: f64 = 0.0;
    for i in 1..=n_steps {
        let f = |x: &Vec3, v: &Vec3| (*v, acceleration(surface, x, v));
        let (k1x, k1v) = f(&x, &v);
        let (k2x, k2v) = f(&(x + 0.5 * h * k1x), &(v + 0.5 * h * k1v));
        let (k3x, k3v) = f(&(x + 0.5 * h * k2x), &(v + 0.5 * h * k2v));
        let (k4x, k4v) = f(&(x + h * k3x), &(v + h * k3v));
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

        let g = surface.gradient(&x);
        let defect = surface.value(&x).abs() / g.norm();
        max_step_defect = max_step_defect.max(defect);
        if !(defect <= MAX_STEP_DEFECT) {
            return Err(Error::StepTooLarge(defect));
        }
        x -= surface.value(&x) / g.norm_squared() * g;
        let nrm = surface.gradient(&x).normalize();
        v = (v - v.dot(&nrm) * nrm).normalize();
        samples.push(GeodesicSample {
            s: i as f64 * h,
            x,
            v,
            x_ddot: acceleration(surface, &x, &v),
        });
    }
    Ok(GeodesicTrajectory {
        samples,
        step: h,
        max_step_defect,
    })
}

/// Curvature, torsion and the frame `(v, n, w)` with `n = ẍ/k`, `w = v × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrenetData {
    pub k: Vec<f64>,
    pub v: Vec<Vec3>,
    pub n: Vec<Vec3>,
    pub w: Vec<Vec3>,
    /// `ṅ` by central differences (absent near the ends).
    pub n_dot: Vec<Option<Vec3>>,
    /// `τ = ⟨ṅ, w⟩`.
    pub tau: Vec<Option<f64>>,
    pub k_dot: Vec<Option<f64>>,
    pub tau_dot: Vec<Option<f64>>,
    pub step: f64,
}

impl FrenetData {
    /// Largest `‖ṅ + k v − τ w‖` over the interior samples.
    pub fn structure_residual(&self) -> f64 {
        (0..self.k.len())
            .filter_map(|i| {
                let (nd, t) = (self.n_dot[i]?, self.tau[i]?);
                Some((nd + self.k[i] * self.v[i] - t * self.w[i]).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|⟨ṅ, v⟩ + k|`.
    pub fn normal_rotation_residual(&self) -> f64 {
        (0..self.k.len())
            .filter_map(|i| Some((self.n_dot[i]?.dot(&self.v[i]) + self.k[i]).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `(v, n, w)` from an orthonormal triple.
    pub fn frame_orthonormality(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.k.len() {
            let m = Matrix3::from_columns(&[self.v[i], self.n[i], self.w[i]]);
            worst = worst.max((m.transpose() * m - Matrix3::identity()).abs().max());
        }
        worst
    }

    pub fn max_abs_tau(&self) -> f64 {
        self.tau.iter().flatten().fold(0.0, |m, t| m.max(t.abs()))
    }
}

pub fn frenet_apparatus(traj: &GeodesicTrajectory) -> Result<FrenetData> {
    if traj.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "need at least 5 samples, got {}",
            traj.len()
        )));
    }
    let k: Vec<f64> = traj.samples.iter().map(|p| p.x_ddot.norm()).collect();
    if let Some(&bad) = k.iter().find(|&&k| !(k > MIN_CURVATURE)) {
        return Err(Error::DegenerateCurvature(bad));
    }
    let v: Vec<Vec3> = traj.samples.iter().map(|p| p.v).collect();
    let n: Vec<Vec3> = traj.samples.iter().zip(&k).map(|(p, k)| p.x_ddot / *k).collect();
    let w: Vec<Vec3> = v.iter().zip(&n).map(|(v, n)| v.cross(n)).collect();
    let n_dot = stencil::first_derivative(&n, traj.step);
    let tau: Vec<Option<f64>> = n_dot.iter().zip(&w).map(|(nd, w)| nd.map(|nd| nd.dot(w))).collect();
    let k_dot = stencil::first_derivative(&k, traj.step);
    let tau_dot = stencil::first_derivative_opt(&tau, traj.step);
    Ok(FrenetData {
        k,
        v,
        n,
        w,
        n_dot,
        tau,
        k_dot,
        tau_dot,
        step: traj.step,
    })
}
