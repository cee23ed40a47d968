//! JSON interchange format for planar tables.
//!
//! ```json
//! { "a0": 1.0,
//!   "harmonics": [{ "k": 5, "cos": -0.0020833333333333333, "sin": 0.0 }],
//!   "gutkin": { "n": 5, "delta": 0.9117382909...} }
//! ```
//!
//! `a0` and `harmonics` are the Fourier coefficients of the supporting
//! function `h`. `gutkin` is `null` for tables without a recorded angle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gutkin::GutkinTable;
use crate::support::SupportCurve;
use crate::trig::TrigPolynomial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: usize,
    pub cos: f64,
    pub sin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GutkinParams {
    pub n: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub a0: f64,
    pub harmonics: Vec<Harmonic>,
    pub gutkin: Option<GutkinParams>,
}

impl TableFile {
    pub fn from_curve(curve: &SupportCurve) -> Self {
        let h = curve.support();
        Self {
            a0: h.constant_term(),
            harmonics: h
                .harmonics()
                .filter(|&(_, a, b)| a != 0.0 || b != 0.0)
                // `+ 0.0` turns −0.0 into 0.0 for tidier files.
                .map(|(k, cos, sin)| Harmonic {
                    k,
                    cos: cos + 0.0,
                    sin: sin + 0.0,
                })
                .collect(),
            gutkin: None,
        }
    }

    pub fn from_table(table: &GutkinTable) -> Self {
        Self {
            gutkin: Some(GutkinParams {
                n: table.n,
                delta: table.delta,
            }),
            ..Self::from_curve(&table.curve)
        }
    }

    pub fn support(&self) -> Result<TrigPolynomial> {
        let mut h = TrigPolynomial::constant(self.a0);
        for hk in &self.harmonics {
            if hk.k == 0 {
                return Err(Error::InvalidInput("harmonic k = 0 belongs in a0".into()));
            }
            if h.harmonic(hk.k) != (0.0, 0.0) {
                return Err(Error::InvalidInput(format!("harmonic k = {} listed twice", hk.k)));
            }
            h.set_harmonic(hk.k, hk.cos, hk.sin);
        }
        Ok(h)
    }

    pub fn curve(&self) -> Result<SupportCurve> {
        SupportCurve::new(self.support()?)
    }

    /// The Gutkin table, when the file records one.
    pub fn gutkin_table(&self) -> Result<Option<GutkinTable>> {
        match self.gutkin {
            None => Ok(None),
            Some(g) => GutkinTable::from_curve(self.curve()?, g.n, g.delta).map(Some),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("table file: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gutkin::build_gutkin_table;

    #[test]
    fn gutkin_round_trip_is_bitwise() {
        let t = build_gutkin_table(5, 0, 1.0, 0.05).unwrap();
        let file = TableFile::from_table(&t);
        let back = TableFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let t2 = back.gutkin_table().unwrap().unwrap();
        assert_eq!(t2.delta.to_bits(), t.delta.to_bits());
        assert_eq!(t2.curve, t.curve);
    }

    #[test]
    fn circle_has_null_gutkin() {
        let file = TableFile::from_curve(&SupportCurve::circle(1.5).unwrap());
        let json = file.to_json();
        assert!(json.contains("\"gutkin\": null"));
        assert!(json.contains("\"harmonics\": []"));
        assert_eq!(TableFile::from_json(&json).unwrap().curve().unwrap().mean_width(), 3.0);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(TableFile::from_json("{\"a0\": 1.0}").is_err());
        let dup = r#"{"a0":1.0,"harmonics":[{"k":3,"cos":0.01,"sin":0},{"k":3,"cos":0.01,"sin":0}],"gutkin":null}"#;
        assert!(TableFile::from_json(dup).unwrap().support().is_err());
        let concave = r#"{"a0":1.0,"harmonics":[{"k":3,"cos":0.5,"sin":0}],"gutkin":null}"#;
        assert!(matches!(
            TableFile::from_json(concave).unwrap().curve(),
            Err(Error::NonConvex(_))
        ));
    }
}
