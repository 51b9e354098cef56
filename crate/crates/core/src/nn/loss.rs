/// Probabilities are clipped to `[PROB_CLIP, 1 - PROB_CLIP]` before the log.
pub const PROB_CLIP: f64 = 1e-7;

/// `-w * [y ln p + (1 - y) ln(1 - p)]` on the clipped probability.
pub fn weighted_bce(p: f64, y: f64, w: f64) -> f64 {
    let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    -w * (y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Derivative of [`weighted_bce`] with respect to the logit that produced
/// `p`. Zero where the clip is active, matching the flat clipped loss.
#[allow(clippy::manual_range_contains)] // NaN must fall through
pub fn weighted_bce_logit_grad(p: f64, y: f64, w: f64) -> f64 {
    if p < PROB_CLIP || p > 1.0 - PROB_CLIP {
        0.0
    } else {
        w * (p - y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        assert!((weighted_bce(0.5, 1.0, 2.0) - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((weighted_bce(0.5, 1.0, 2.0) - 1.38629).abs() < 1e-5);
        let confident = weighted_bce(1.0 - 1e-7, 1.0, 1.0);
        assert!(confident > 0.0 && (confident - 1e-7).abs() < 1e-12);
        assert!(weighted_bce(1.0, 1.0, 1.0) - 1e-7 < 1e-12);
        assert!(weighted_bce(0.0, 1.0, 1.0).is_finite());
    }

    #[test]
    fn unit_weight_is_plain_bce() {
        for (p, y) in [(0.3, 0.0), (0.3, 1.0), (0.9, 1.0)] {
            let plain: f64 = -(y * f64::ln(p) + (1.0 - y) * f64::ln(1.0 - p));
            assert!((weighted_bce(p, y, 1.0) - plain).abs() < 1e-15);
        }
    }

    #[test]
    fn logit_gradient_matches_finite_difference() {
        let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
        for z in [-3.0, -0.2, 0.0, 1.5] {
            for y in [0.0, 1.0] {
                let h = 1e-6;
                let fd = (weighted_bce(sig(z + h), y, 1.7) - weighted_bce(sig(z - h), y, 1.7))
                    / (2.0 * h);
                assert!((fd - weighted_bce_logit_grad(sig(z), y, 1.7)).abs() < 1e-8);
            }
        }
        assert_eq!(weighted_bce_logit_grad(1.0, 1.0, 1.0), 0.0);
    }

    proptest! {
        #[test]
        fn non_negative(p in 0.0f64..=1.0, y in prop::bool::ANY, w in 0.01f64..10.0) {
            let y = if y { 1.0 } else { 0.0 };
            let loss = weighted_bce(p, y, w);
            prop_assert!(loss > 0.0);
            prop_assert!(loss.is_finite());
        }
    }
}
