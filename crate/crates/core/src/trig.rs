//! Finite Fourier series in one angle.

use serde::{Deserialize, Serialize};

/// Largest degree accepted by [`crate::support::SupportCurve`]. The convexity
/// check samples a 4096-point grid, which resolves harmonics well below this.
pub const MAX_DEGREE: usize = 64;

/// `f(φ) = c + Σ_{k≥1} (a_k cos kφ + b_k sin kφ)`.
///
/// `cos_coeffs[k - 1]` holds `a_k` and `sin_coeffs[k - 1]` holds `b_k`; both
/// vectors always have the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    constant: f64,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
}

impl TrigPolynomial {
    pub fn new(constant: f64, mut cos_coeffs: Vec<f64>, mut sin_coeffs: Vec<f64>) -> Self {
        let len = cos_coeffs.len().max(sin_coeffs.len());
        cos_coeffs.resize(len, 0.0);
        sin_coeffs.resize(len, 0.0);
        Self {
            constant,
            cos_coeffs,
            sin_coeffs,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, Vec::new(), Vec::new())
    }

    /// `c + a cos(kφ) + b sin(kφ)`.
    pub fn single(c: f64, k: usize, a: f64, b: f64) -> Self {
        let mut p = Self::constant(c);
        if k == 0 {
            p.constant += a;
        } else {
            p.set_harmonic(k, a, b);
        }
        p
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos_coeffs
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin_coeffs
    }

    /// Highest harmonic with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        (1..=self.cos_coeffs.len())
            .rev()
            .find(|&k| self.cos_coeffs[k - 1] != 0.0 || self.sin_coeffs[k - 1] != 0.0)
            .unwrap_or(0)
    }

    /// `(a_k, b_k)`; harmonic 0 returns `(c, 0)`.
    pub fn harmonic(&self, k: usize) -> (f64, f64) {
        if k == 0 {
            return (self.constant, 0.0);
        }
        match (self.cos_coeffs.get(k - 1), self.sin_coeffs.get(k - 1)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 0.0),
        }
    }

    pub fn set_harmonic(&mut self, k: usize, a: f64, b: f64) {
        if k == 0 {
            self.constant = a;
            return;
        }
        if self.cos_coeffs.len() < k {
            self.cos_coeffs.resize(k, 0.0);
            self.sin_coeffs.resize(k, 0.0);
        }
        self.cos_coeffs[k - 1] = a;
        self.sin_coeffs[k - 1] = b;
    }

    /// Iterator over `(k, a_k, b_k)` for `k ≥ 1`.
    pub fn harmonics(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.cos_coeffs
            .iter()
            .zip(&self.sin_coeffs)
            .enumerate()
            .map(|(i, (&a, &b))| (i + 1, a, b))
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.eval_with_derivs(phi).0
    }

    /// Value together with exact first and second derivatives.
    pub fn eval_with_derivs(&self, phi: f64) -> (f64, f64, f64) {
        let mut f = self.constant;
        let mut df = 0.0;
        let mut d2f = 0.0;
        for (k, a, b) in self.harmonics() {
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let kf = k as f64;
            let (s, c) = (kf * phi).sin_cos();
            let v = a * c + b * s;
            f += v;
            df += kf * (b * c - a * s);
            d2f -= kf * kf * v;
        }
        (f, df, d2f)
    }

    /// Termwise derivative.
    pub fn derivative(&self) -> Self {
        let mut out = Self::constant(0.0);
        for (k, a, b) in self.harmonics() {
            let kf = k as f64;
            out.set_harmonic(k, kf * b, -kf * a);
        }
        out
    }

    /// Applies `scale(k)` to every harmonic `k ≥ 1` and `scale(0)` to the constant.
    pub fn scale_harmonics(&self, scale: impl Fn(usize) -> f64) -> Self {
        let mut out = Self::constant(self.constant * scale(0));
        for (k, a, b) in self.harmonics() {
            let s = scale(k);
            out.set_harmonic(k, a * s, b * s);
        }
        out
    }
}
