use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeParams {
    /// Mean Phase-0 rating, the floor of the normalized range.
    pub c_bar: f64,
    pub scale: f64,
}

/// Min-max normalize `raw` onto `[c_bar, c_bar + scale]`.
pub fn normalize_risk(raw: &[f64], params: &NormalizeParams) -> Result<Vec<f64>> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("risk trace contains non-finite values".into()));
    }
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if raw.is_empty() || hi == lo {
        return Err(Error::DegenerateTrace);
    }
    let span = hi - lo;
    Ok(raw
        .iter()
        .map(|z| params.scale * ((z - lo) / span) + params.c_bar)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn direct_arithmetic() {
        let p = NormalizeParams {
            c_bar: 2.0,
            scale: 1.0,
        };
        assert_eq!(normalize_risk(&[0.0, 5.0, 10.0], &p).unwrap(), vec![2.0, 2.5, 3.0]);
    }

    #[test]
    fn constant_trace_is_degenerate() {
        let p = NormalizeParams {
            c_bar: 0.0,
            scale: 10.0,
        };
        assert!(matches!(
            normalize_risk(&[3.0; 5], &p),
            Err(Error::DegenerateTrace)
        ));
        assert!(matches!(normalize_risk(&[], &p), Err(Error::DegenerateTrace)));
    }

    proptest! {
        #[test]
        fn bounded_and_order_preserving(
            raw in prop::collection::vec(0.0f64..1e6, 2..50), c in 0.0f64..9.0,
        ) {
            prop_assume!(raw.iter().any(|v| *v != raw[0]));
            let p = NormalizeParams { c_bar: c, scale: 10.0 - c };
            let out = normalize_risk(&raw, &p).unwrap();
            for (i, v) in out.iter().enumerate() {
                prop_assert!(*v >= c && *v <= 10.0 + 1e-12);
                for j in 0..raw.len() {
                    if raw[i] < raw[j] {
                        prop_assert!(out[i] <= out[j]);
                    }
                }
            }
        }

        #[test]
        fn positive_affine_invariance(
            raw in prop::collection::vec(0.0f64..100.0, 2..40),
            a in 0.1f64..10.0, b in -50.0f64..50.0,
        ) {
            let span = raw.iter().copied().fold(f64::MIN, f64::max)
                - raw.iter().copied().fold(f64::MAX, f64::min);
            prop_assume!(span > 10.0);
            let p = NormalizeParams { c_bar: 2.5, scale: 7.5 };
            let base = normalize_risk(&raw, &p).unwrap();
            let moved: Vec<f64> = raw.iter().map(|z| a * z + b).collect();
            let out = normalize_risk(&moved, &p).unwrap();
            for (x, y) in base.iter().zip(&out) {
                // 1e-12 relative to the output ceiling.
                prop_assert!((x - y).abs() <= 1e-12 * 10.0);
            }
        }
    }
}
