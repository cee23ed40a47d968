//! Static scatter plot of `(φ, p)` points on the phase cylinder.

use std::f64::consts::TAU;
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

pub fn scatter(points: &[(f64, f64)]) -> String {
    let (mut lo, mut hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, p)| {
            (lo.min(p), hi.max(p))
        });
    // Also catches the empty input, where lo and hi are still infinite.
    if lo >= hi || !lo.is_finite() {
        let mid = if lo.is_finite() { lo } else { 0.0 };
        (lo, hi) = (mid - 1.0, mid + 1.0);
    }
    let pad = 0.02 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |phi: f64| MARGIN + phi / TAU * (WIDTH - 2.0 * MARGIN);
    let y = |p: f64| HEIGHT - MARGIN - (p - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">phi in [0, 2pi)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" font-size="12" transform="rotate(-90 12 {})" text-anchor="middle">p in [{lo:.4}, {hi:.4}]</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(s, r#"<g fill="steelblue">"#);
    for &(phi, p) in points {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="0.8"/>"#, x(phi), y(p));
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let pts = [(0.0, -1.0), (3.0, 0.5), (6.0, 1.0)];
        let a = scatter(&pts);
        assert_eq!(a, scatter(&pts));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), 3);
    }

    #[test]
    fn flat_and_empty_inputs() {
        assert!(scatter(&[(1.0, 0.5), (2.0, 0.5)]).contains("<circle"));
        assert!(!scatter(&[]).contains("<circle"));
    }
}
