//! Evaluation metrics: task success rate, generalization gap, pass@k.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no results to aggregate")]
    Empty,
    #[error("pass@k needs 0 <= c <= n and 1 <= k <= n, got n={n} c={c} k={k}")]
    Bounds { n: usize, c: usize, k: usize },
}

/// One scored instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub reward: f64,
    pub tau: f64,
}

impl Outcome {
    pub fn success(&self) -> bool {
        self.reward >= self.tau
    }
}

pub fn tsr(outcomes: &[Outcome]) -> Result<f64, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(outcomes.iter().filter(|o| o.success()).count() as f64 / outcomes.len() as f64)
}

/// Procedural minus real-world TSR; positive means overfitting to generated circuits.
pub fn delta_gen(tsr_procedural: f64, tsr_real: f64) -> f64 {
    tsr_procedural - tsr_real
}

/// Unbiased estimator 1 - C(n-c, k) / C(n, k), as a running product.
pub fn pass_at_k(n: usize, c: usize, k: usize) -> Result<f64, MetricsError> {
    if c > n || k == 0 || k > n {
        return Err(MetricsError::Bounds { n, c, k });
    }
    if n - c < k {
        return Ok(1.0);
    }
    let miss: f64 = (n - c + 1..=n).map(|i| 1.0 - k as f64 / i as f64).product();
    Ok(1.0 - miss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, k: u64) -> f64 {
        if k > n {
            return 0.0;
        }
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn examples() {
        assert_eq!(pass_at_k(20, 20, 1).unwrap(), 1.0);
        assert!((pass_at_k(2, 1, 1).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(pass_at_k(20, 0, 5).unwrap(), 0.0);
        assert!(pass_at_k(5, 6, 1).is_err());
        assert!(pass_at_k(5, 1, 0).is_err());
        assert!(pass_at_k(5, 1, 6).is_err());
    }

    #[test]
    fn matches_binomial_ratio() {
        for n in 1..30u64 {
            for c in 0..=n {
                for k in 1..=n {
                    let want = 1.0 - binom(n - c, k) / binom(n, k);
                    let got = pass_at_k(n as usize, c as usize, k as usize).unwrap();
                    assert!((got - want).abs() < 1e-9, "n={n} c={c} k={k}");
                }
            }
        }
    }

    #[test]
    fn large_n_is_stable() {
        let p = pass_at_k(10_000, 10, 500).unwrap();
        assert!(p.is_finite() && (0.0..=1.0).contains(&p));
    }

    #[test]
    fn tsr_examples() {
        let all = [Outcome { reward: 1.0, tau: 0.9 }; 3];
        assert_eq!(tsr(&all).unwrap(), 1.0);
        let half = [Outcome { reward: 0.95, tau: 0.9 }, Outcome { reward: 0.85, tau: 0.9 }];
        assert_eq!(tsr(&half).unwrap(), 0.5);
        assert!(tsr(&[]).is_err());
        assert!((delta_gen(0.539, 0.353) - 0.186).abs() < 1e-12);
    }
}
