use crate::domain::{OneHotTarget, ProbVector};

/// Probabilities are clamped to this floor before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Categorical cross-entropy `-Σ y_c ln p_c`.
pub fn cross_entropy(y: &OneHotTarget, p: &ProbVector) -> f64 {
    y.values()
        .iter()
        .zip(p.values())
        .filter(|(yc, _)| **yc != 0.0)
        .map(|(yc, pc)| -yc * pc.max(PROB_FLOOR).ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{one_hot, softmax, ClassLabel, LogitVector};
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction_has_zero_loss() {
        let p = ProbVector::new([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(cross_entropy(&one_hot(ClassLabel::FmdFoot), &p), 0.0);
    }

    #[test]
    fn uniform_prediction_costs_ln_6() {
        let l = cross_entropy(&one_hot(ClassLabel::FmdFoot), &ProbVector::uniform());
        assert!((l - 6f64.ln()).abs() < 1e-12);
        assert!((l - 1.791759).abs() < 1e-6);
    }

    #[test]
    fn zero_probability_is_clamped() {
        let p = ProbVector::new([0.5, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let l = cross_entropy(&one_hot(ClassLabel::HealthyFoot), &p);
        assert!((l - 27.631021).abs() < 1e-6);
        assert!(l.is_finite());
    }

    proptest! {
        #[test]
        fn loss_is_non_negative(z in prop::array::uniform6(-30.0f64..30.0), c in 0usize..6) {
            let p = softmax(&LogitVector::new(z).unwrap());
            prop_assert!(cross_entropy(&one_hot(ClassLabel::ALL[c]), &p) >= 0.0);
        }
    }
}
