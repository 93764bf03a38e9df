//! Nutrient consumption functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consumption function `μ(s)`.
///
/// Serialized as `{"type": "monod", "k": ..}` or
/// `{"type": "haldane", "k": .., "i": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Kinetics {
    /// `s / (k + s)`
    Monod {
        #[serde(rename = "k")]
        half_saturation: f64,
    },
    /// `s / (k + s + s²/i)`
    Haldane {
        #[serde(rename = "k")]
        half_saturation: f64,
        #[serde(rename = "i")]
        inhibition: f64,
    },
}

impl Kinetics {
    pub fn monod(k: f64) -> Self {
        Kinetics::Monod { half_saturation: k }
    }

    pub fn haldane(k: f64, i: f64) -> Self {
        Kinetics::Haldane { half_saturation: k, inhibition: i }
    }

    pub fn half_saturation(&self) -> f64 {
        match *self {
            Kinetics::Monod { half_saturation } | Kinetics::Haldane { half_saturation, .. } => {
                half_saturation
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kinetics::Monod { .. } => "monod",
            Kinetics::Haldane { .. } => "haldane",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.half_saturation();
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::config(format!("kinetics.k must be positive, got {k}")));
        }
        if let Kinetics::Haldane { inhibition, .. } = *self {
            if !(inhibition.is_finite() && inhibition > 0.0) {
                return Err(Error::config(format!("kinetics.i must be positive, got {inhibition}")));
            }
        }
        Ok(())
    }

    /// Evaluate `μ(s)`; negative concentrations are a domain error.
    pub fn mu(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::config(format!(
                "consumption function evaluated at negative concentration {s}"
            )));
        }
        Ok(self.mu_unchecked(s))
    }

    #[inline]
    pub(crate) fn mu_unchecked(&self, s: f64) -> f64 {
        match *self {
            Kinetics::Monod { half_saturation: k } => s / (k + s),
            Kinetics::Haldane { half_saturation: k, inhibition: i } => {
                if s.is_infinite() {
                    return 0.0;
                }
                s / (k + s + s * s / i)
            }
        }
    }

    /// Location of the maximum of `μ`: `Some(√(k i))` for Haldane, `None` for
    /// Monod, whose supremum 1 is only approached as `s → ∞`.
    pub fn mu_argmax(&self) -> Option<f64> {
        match *self {
            Kinetics::Monod { .. } => None,
            Kinetics::Haldane { half_saturation: k, inhibition: i } => Some((k * i).sqrt()),
        }
    }

    /// Supremum of `μ` over `[0, ∞)`.
    pub fn mu_sup(&self) -> f64 {
        match *self {
            Kinetics::Monod { .. } => 1.0,
            Kinetics::Haldane { half_saturation: k, inhibition: i } => 1.0 / (1.0 + 2.0 * (k / i).sqrt()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn monod_half_saturation() {
        let m = Kinetics::monod(4.7);
        assert_eq!(m.mu(0.0).unwrap(), 0.0);
        assert_eq!(m.mu(4.7).unwrap(), 0.5);
        assert_eq!(Kinetics::monod(1.4).mu(1.4).unwrap(), 0.5);
        assert!(m.mu(-1e-3).is_err());
        assert!(m.mu(f64::NAN).is_err());
        assert_eq!(m.mu_argmax(), None);
    }

    #[test]
    fn haldane_peak_matches_grid_search() {
        let h = Kinetics::haldane(7.0, 7.6);
        // Brute-force grid over [0, 50] at step 1e-4.
        let (mut best_s, mut best) = (0.0, 0.0);
        for j in 0..=500_000 {
            let s = j as f64 * 1e-4;
            let v = h.mu(s).unwrap();
            if v > best {
                best = v;
                best_s = s;
            }
        }
        let argmax = h.mu_argmax().unwrap();
        assert!((argmax - 7.293_833_011_524_188).abs() < 1e-12);
        assert!((argmax - best_s).abs() < 2e-4, "{argmax} vs {best_s}");
        assert!((h.mu(argmax).unwrap() - best).abs() < 1e-9);
        assert!((h.mu_sup() - 0.342_53).abs() < 1e-5);
        assert!((h.mu(argmax).unwrap() - h.mu_sup()).abs() < 1e-15);

        let fig2 = Kinetics::haldane(4.7, 5.0).mu_argmax().unwrap();
        assert!((fig2 - 23.5f64.sqrt()).abs() < 1e-15);
        assert!((fig2 - 4.8477).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_constants() {
        assert!(Kinetics::monod(0.0).validate().is_err());
        assert!(Kinetics::monod(-1.0).validate().is_err());
        assert!(Kinetics::haldane(1.0, 0.0).validate().is_err());
        assert!(Kinetics::haldane(1.0, f64::INFINITY).validate().is_err());
        assert!(Kinetics::haldane(1.0, 2.0).validate().is_ok());
    }

    #[test]
    fn config_representation() {
        let m: Kinetics = serde_json::from_str(r#"{"type": "monod", "k": 4.7}"#).unwrap();
        assert_eq!(m, Kinetics::monod(4.7));
        let h: Kinetics = serde_json::from_str(r#"{"type": "haldane", "k": 7, "i": 7.6}"#).unwrap();
        assert_eq!(h, Kinetics::haldane(7.0, 7.6));
        assert!(serde_json::from_str::<Kinetics>(r#"{"type": "contois", "k": 1}"#).is_err());
        assert!(serde_json::from_str::<Kinetics>(r#"{"type": "monod", "k": 1, "i": 2}"#).is_err());
    }

    proptest! {
        #[test]
        fn positive_and_bounded(k in 1e-3f64..50.0, i in 1e-2f64..100.0, s in 1e-9f64..1e3) {
            for kin in [Kinetics::monod(k), Kinetics::haldane(k, i)] {
                let v = kin.mu(s).unwrap();
                prop_assert!(v > 0.0);
                prop_assert!(v <= 1.0);
                prop_assert!(v <= kin.mu_sup() * (1.0 + 1e-12));
            }
        }

        #[test]
        fn monotonicity(k in 1e-2f64..50.0, i in 1e-2f64..100.0, s in 0.0f64..500.0, ds in 1e-6f64..10.0) {
            let m = Kinetics::monod(k);
            prop_assert!(m.mu(s + ds).unwrap() > m.mu(s).unwrap());

            let h = Kinetics::haldane(k, i);
            let peak = h.mu_argmax().unwrap();
            let (lo, hi) = (s, s + ds);
            if hi <= peak {
                prop_assert!(h.mu(hi).unwrap() >= h.mu(lo).unwrap());
            } else if lo >= peak {
                prop_assert!(h.mu(hi).unwrap() <= h.mu(lo).unwrap());
            }
        }

        #[test]
        fn haldane_tends_to_monod(k in 1e-2f64..50.0, s in 0.0f64..100.0) {
            let h = Kinetics::haldane(k, 1e8).mu(s).unwrap();
            let m = Kinetics::monod(k).mu(s).unwrap();
            prop_assert!((h - m).abs() < 1e-6);
        }
    }
}
