//! Evaluation metrics: normalized localization error, accuracy, performance
//! gain over comparison methods, and Student-t confidence intervals.

use std::fmt;

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Errors from metric computation.
#[derive(Debug)]
pub enum MetricsError {
    /// Confidence intervals need at least two samples.
    TooFewSamples(usize),
    /// Significance level must lie strictly between 0 and 1.
    InvalidAlpha(f64),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::TooFewSamples(n) => {
                write!(f, "confidence interval needs at least 2 samples, got {n}")
            }
            MetricsError::InvalidAlpha(a) => {
                write!(f, "significance level must be in (0, 1), got {a}")
            }
        }
    }
}

impl std::error::Error for MetricsError {}

use crate::net::Point;

/// Average localization error normalized by the communication radius, in
/// percent: `(100 / (N_u · R)) · Σ ‖predicted − truth‖`.
pub fn ales(placement: &[Point], ground_truth: &[Point], radius: f64) -> f64 {
    assert_eq!(placement.len(), ground_truth.len(), "placement size mismatch");
    assert!(radius > 0.0, "radius must be positive");
    if placement.is_empty() {
        return 0.0;
    }
    let total: f64 = placement
        .iter()
        .zip(ground_truth)
        .map(|(p, t)| p.dist(*t))
        .sum();
    100.0 * total / (placement.len() as f64 * radius)
}

/// Average localization accuracy: 100% minus the mean error.
pub fn ala(mean_ales: f64) -> f64 {
    100.0 - mean_ales
}

/// Average performance gain: mean error advantage over comparison methods,
/// `mean(other − ours)` in percentage points.
pub fn apg(others: &[f64], ours: f64) -> f64 {
    assert!(!others.is_empty(), "need at least one comparison value");
    others.iter().map(|o| o - ours).sum::<f64>() / others.len() as f64
}

/// Two-sided Student-t confidence interval for the mean:
/// `X̄ ± (S/√n) · t_{α/2}(n−1)` with sample mean `X̄` and sample standard
/// deviation `S`.
pub fn confidence_interval(samples: &[f64], alpha: f64) -> Result<(f64, f64), MetricsError> {
    let n = samples.len();
    if n < 2 {
        return Err(MetricsError::TooFewSamples(n));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MetricsError::InvalidAlpha(alpha));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let t = StudentsT::new(0.0, 1.0, nf - 1.0)
        .expect("valid standard t distribution")
        .inverse_cdf(1.0 - alpha / 2.0);
    let margin = (var.sqrt() / nf.sqrt()) * t;
    Ok((mean - margin, mean + margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn error_is_zero_at_ground_truth() {
        let pts = vec![Point::new(3.0, 4.0), Point::new(9.0, 1.0)];
        assert_eq!(ales(&pts, &pts.clone(), 25.0), 0.0);
    }

    #[test]
    fn error_is_full_radius_when_every_node_misses_by_it() {
        let truth = vec![Point::new(10.0, 10.0), Point::new(40.0, 40.0)];
        let placed = vec![Point::new(35.0, 10.0), Point::new(40.0, 15.0)];
        let e = ales(&placed, &truth, 25.0);
        assert!((e - 100.0).abs() < 1e-12);
    }

    #[test]
    fn error_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let truth: Vec<Point> = (0..40)
            .map(|_| Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let placed: Vec<Point> = truth
            .iter()
            .map(|p| Point::new(p.x + rng.gen_range(-5.0..5.0), p.y + rng.gen_range(-5.0..5.0)))
            .collect();
        let by_hand: f64 = placed
            .iter()
            .zip(&truth)
            .map(|(p, t)| ((p.x - t.x).powi(2) + (p.y - t.y).powi(2)).sqrt())
            .sum::<f64>()
            * 100.0
            / (40.0 * 30.0);
        assert!((ales(&placed, &truth, 30.0) - by_hand).abs() < 1e-9);
    }

    #[test]
    fn accuracy_complements_mean_error() {
        assert_eq!(ala(13.89), 86.11);
        assert_eq!(ala(0.0), 100.0);
    }

    #[test]
    fn gain_is_the_mean_advantage() {
        assert_eq!(apg(&[30.0, 20.0], 10.0), 15.0);
        assert_eq!(apg(&[10.0], 10.0), 0.0);
        // Published comparison row: 29.81% mean error for the baseline
        // vs 13.89% for the proposal → 15.92-point gain.
        assert!((apg(&[29.81], 13.89) - 15.92).abs() < 1e-9);
    }

    #[test]
    fn interval_collapses_when_samples_are_equal() {
        let (lo, hi) = confidence_interval(&[7.5; 10], 0.05).unwrap();
        assert_eq!(lo, 7.5);
        assert_eq!(hi, 7.5);
    }

    #[test]
    fn two_sample_interval_matches_closed_form_quantile() {
        // X̄ = 1, S = √2, n = 2: margin = (S/√2)·t_{0.025}(1) = t_{0.025}(1),
        // and the 1-dof quantile is exactly tan(0.475·π) ≈ 12.7062047364.
        let (lo, hi) = confidence_interval(&[0.0, 2.0], 0.05).unwrap();
        let t1 = 12.706204736432095;
        assert!((lo - (1.0 - t1)).abs() < 1e-6);
        assert!((hi - (1.0 + t1)).abs() < 1e-6);
    }

    #[test]
    fn interval_matches_direct_formula_at_n50() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<f64> = (0..50).map(|_| rng.gen_range(5.0..35.0)).collect();
        let mean = samples.iter().sum::<f64>() / 50.0;
        let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 49.0).sqrt();
        let t49 = 2.0095752371292397;
        let margin = sd / 50.0f64.sqrt() * t49;
        let (lo, hi) = confidence_interval(&samples, 0.05).unwrap();
        assert!((lo - (mean - margin)).abs() < 1e-9);
        assert!((hi - (mean + margin)).abs() < 1e-9);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            confidence_interval(&[1.0], 0.05),
            Err(MetricsError::TooFewSamples(1))
        ));
        assert!(matches!(
            confidence_interval(&[1.0, 2.0], 0.0),
            Err(MetricsError::InvalidAlpha(_))
        ));
    }

    #[test]
    fn empirical_coverage_near_95_percent() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let normal = Normal::new(10.0, 3.0).unwrap();
        let mut hits = 0;
        for _ in 0..1000 {
            let samples: Vec<f64> = (0..50).map(|_| normal.sample(&mut rng)).collect();
            let (lo, hi) = confidence_interval(&samples, 0.05).unwrap();
            if (lo..=hi).contains(&10.0) {
                hits += 1;
            }
        }
        assert!((925..=975).contains(&hits), "coverage {hits}/1000");
    }
}
