//! Fourth-order central differences on uniform grids.
//!
//! Results are `None` at the two samples nearest each end, where the
//! five-point stencil does not fit.

use std::ops::{Add, Mul, Sub};

pub fn first_derivative<T>(values: &[T], h: f64) -> Vec<Option<T>>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    stencil(values, |w| (w[0] - w[4] + (w[3] - w[1]) * 8.0) * (1.0 / (12.0 * h)))
}

pub fn second_derivative<T>(values: &[T], h: f64) -> Vec<Option<T>>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    stencil(values, |w| {
        ((w[1] + w[3]) * 16.0 - (w[0] + w[4]) - w[2] * 30.0) * (1.0 / (12.0 * h * h))
    })
}

/// Same as [`first_derivative`] for a series that already has gaps.
pub fn first_derivative_opt<T>(values: &[Option<T>], h: f64) -> Vec<Option<T>>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let mut out = vec![None; values.len()];
    for (i, slot) in out.iter_mut().enumerate().take(values.len().saturating_sub(2)).skip(2) {
        if let (Some(a), Some(b), Some(c), Some(d)) = (values[i - 2], values[i - 1], values[i + 1], values[i + 2]) {
            *slot = Some((a - d + (c - b) * 8.0) * (1.0 / (12.0 * h)));
        }
    }
    out
}

fn stencil<T: Copy>(values: &[T], f: impl Fn(&[T]) -> T) -> Vec<Option<T>> {
    let mut out = vec![None; values.len()];
    for (i, w) in values.windows(5).enumerate() {
        out[i + 2] = Some(f(w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartics() {
        let h = 0.1;
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * h).collect();
        let p: Vec<f64> = xs.iter().map(|x| x.powi(4) - 2.0 * x.powi(3) + x).collect();
        let d1 = first_derivative(&p, h);
        let d2 = second_derivative(&p, h);
        assert!(d1[..2].iter().chain(&d1[10..]).all(Option::is_none));
        for i in 2..10 {
            let x = xs[i];
            assert!((d1[i].unwrap() - (4.0 * x.powi(3) - 6.0 * x * x + 1.0)).abs() < 1e-12);
            assert!((d2[i].unwrap() - (12.0 * x * x - 12.0 * x)).abs() < 1e-11);
        }
    }

    #[test]
    fn gaps_propagate() {
        let v: Vec<Option<f64>> = (0..9).map(|i| if i == 4 { None } else { Some(i as f64) }).collect();
        let d = first_derivative_opt(&v, 1.0);
        assert_eq!(d[2], None);
        assert_eq!(d[3], None);
        assert_eq!(d[4], Some(1.0));
        assert_eq!(d[6], None);
    }

    #[test]
    fn short_series() {
        assert!(first_derivative(&[1.0, 2.0, 3.0], 1.0).iter().all(Option::is_none));
    }
}
