//! Regressional proxy failure: selecting on a noisy estimate biases the
//! selected outcomes, and the posterior-mean estimator removes the
//! predictable disappointment.
//!
//! Model: the latent quality y is standard normal; the observation is
//! x = y + 10 or y - 10 with even odds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const NOISE_OFFSET: f64 = 10.0;

/// Posterior mean of y given x under the two-branch noise model: the
/// candidates are x - 10 and x + 10, weighted by the standard normal
/// density. Computed in log domain so extreme x values stay finite.
pub fn bayes_estimate(x: f64) -> f64 {
    let y_minus = x - NOISE_OFFSET;
    let y_plus = x + NOISE_OFFSET;
    // log weights: -y^2 / 2 (shared normalization cancels)
    let lw_minus = -y_minus * y_minus / 2.0;
    let lw_plus = -y_plus * y_plus / 2.0;
    let m = lw_minus.max(lw_plus);
    let w_minus = (lw_minus - m).exp();
    let w_plus = (lw_plus - m).exp();
    (y_minus * w_minus + y_plus * w_plus) / (w_minus + w_plus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    RawX,
    Bayes,
}

impl Estimator {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Estimator::RawX => x,
            Estimator::Bayes => bayes_estimate(x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::RawX => "raw_x",
            Estimator::Bayes => "bayes",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionalSetup {
    pub samples: usize,
    pub select: usize,
}

impl RegressionalSetup {
    pub fn new(samples: usize, select: usize) -> Self {
        assert!(samples >= select && select >= 1);
        RegressionalSetup { samples, select }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionalReport {
    pub estimator: &'static str,
    pub samples: usize,
    pub select: usize,
    /// Mean predicted quality of the selected set.
    pub mean_predicted: f64,
    /// Mean realized (true) quality of the selected set.
    pub mean_realized: f64,
    /// predicted - realized.
    pub disappointment: f64,
    /// Monte Carlo standard error of the per-item prediction residuals.
    pub standard_error: f64,
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 is kept away from zero.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draw `samples` (y, x) pairs, select the top `select` by the estimator,
/// and compare predicted quality with realized quality on the selection.
pub fn regressional_experiment(
    setup: &RegressionalSetup,
    estimator: Estimator,
    seed: u64,
) -> RegressionalReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scored: Vec<(f64, f64)> = (0..setup.samples)
        .map(|_| {
            let y = standard_normal(&mut rng);
            let x = if rng.gen::<bool>() {
                y + NOISE_OFFSET
            } else {
                y - NOISE_OFFSET
            };
            (y, estimator.apply(x))
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let selected = &scored[..setup.select];
    let k = setup.select as f64;
    let mean_predicted = selected.iter().map(|(_, e)| e).sum::<f64>() / k;
    let mean_realized = selected.iter().map(|(y, _)| y).sum::<f64>() / k;
    let residual_mean = mean_realized - mean_predicted;
    let residual_var = selected
        .iter()
        .map(|(y, e)| {
            let r = y - e - residual_mean;
            r * r
        })
        .sum::<f64>()
        / k;
    RegressionalReport {
        estimator: estimator.name(),
        samples: setup.samples,
        select: setup.select,
        mean_predicted,
        mean_realized,
        disappointment: mean_predicted - mean_realized,
        standard_error: (residual_var / k).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Quadrature oracle for the posterior mean: smooth the two-branch
    /// noise with a narrow Gaussian kernel and integrate on a fine grid
    /// around each candidate.
    fn posterior_mean_by_quadrature(x: f64) -> f64 {
        let eps = 1e-6;
        let normal = |t: f64| (-t * t / 2.0).exp();
        let kernel = |t: f64| (-t * t / (2.0 * eps * eps)).exp();
        let mut num = 0.0;
        let mut den = 0.0;
        for center in [x - NOISE_OFFSET, x + NOISE_OFFSET] {
            let lo = center - 8.0 * eps;
            let hi = center + 8.0 * eps;
            let steps = 2000;
            let h = (hi - lo) / steps as f64;
            for i in 0..=steps {
                let y = lo + i as f64 * h;
                let simpson = if i == 0 || i == steps {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let weight =
                    simpson * normal(y) * (kernel(x - y - NOISE_OFFSET) + kernel(x - y + NOISE_OFFSET));
                num += weight * y;
                den += weight;
            }
        }
        num / den
    }

    #[test]
    fn symmetric_point_estimates_zero() {
        assert_eq!(bayes_estimate(0.0), 0.0);
    }

    #[test]
    fn x_ten_collapses_to_the_near_branch() {
        // weight ratio exp((400 - 0)/2) crushes the far branch
        assert!(bayes_estimate(10.0).abs() < 1e-8);
    }

    #[test]
    fn x_near_minus_ten_tracks_the_plus_branch() {
        assert!((bayes_estimate(-9.5) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn matches_quadrature_oracle_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let x: f64 = rng.gen::<f64>() * 30.0 - 15.0;
            let got = bayes_estimate(x);
            let oracle = posterior_mean_by_quadrature(x);
            assert!(
                (got - oracle).abs() <= 1e-6,
                "x={x}: estimate {got} vs quadrature {oracle}"
            );
        }
    }

    #[test]
    fn raw_selection_disappoints_by_about_the_offset() {
        let setup = RegressionalSetup::new(10_000, 100);
        let report = regressional_experiment(&setup, Estimator::RawX, 7);
        assert!(
            report.disappointment > 8.0 && report.disappointment < 12.0,
            "disappointment {}",
            report.disappointment
        );
    }

    #[test]
    fn bayes_selection_removes_predictable_disappointment() {
        let setup = RegressionalSetup::new(10_000, 100);
        let report = regressional_experiment(&setup, Estimator::Bayes, 7);
        assert!(
            report.disappointment.abs() <= 3.0 * report.standard_error,
            "disappointment {} vs 3se {}",
            report.disappointment,
            3.0 * report.standard_error
        );
    }

    #[test]
    fn no_selection_pressure_no_disappointment() {
        let setup = RegressionalSetup::new(10_000, 10_000);
        let report = regressional_experiment(&setup, Estimator::RawX, 7);
        // The +-10 noise cancels in expectation when nothing is selected.
        assert!(
            report.disappointment.abs() <= 3.0 * report.standard_error,
            "disappointment {} vs 3se {}",
            report.disappointment,
            3.0 * report.standard_error
        );
    }
}
