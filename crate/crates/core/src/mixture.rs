//! Bayesian mixtures over sequence-prediction experts: posterior updating,
//! the relative bounded-loss guarantee against every expert in the mixture,
//! and the posterior-oscillation pathology when no expert matches the data.
//!
//! Weights live in log domain; a mixture value is immutable and updates
//! return new values.

use std::sync::Arc;

use crate::num::Real;

/// An expert maps the bit history to its probability that the next bit is 1.
#[derive(Clone)]
pub struct Expert<T: Real> {
    pub id: String,
    predictor: Arc<dyn Fn(&[u8]) -> T + Send + Sync>,
}

impl<T: Real> std::fmt::Debug for Expert<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expert({})", self.id)
    }
}

impl<T: Real> Expert<T> {
    pub fn new(
        id: impl Into<String>,
        predictor: impl Fn(&[u8]) -> T + Send + Sync + 'static,
    ) -> Self {
        Expert {
            id: id.into(),
            predictor: Arc::new(predictor),
        }
    }

    /// Expert that predicts 1 with constant probability `p`.
    pub fn constant(id: impl Into<String>, p: T) -> Self {
        Expert::new(id, move |_| p)
    }

    pub fn predict_one(&self, history: &[u8]) -> T {
        let p = (self.predictor)(history);
        assert!(
            p >= T::zero() && p <= T::one(),
            "prediction out of [0, 1]: {p:?}"
        );
        p
    }

    /// Probability the expert assigns to `bit` after `history`.
    pub fn prob_of(&self, history: &[u8], bit: u8) -> T {
        let p = self.predict_one(history);
        if bit == 1 {
            p
        } else {
            T::one() - p
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MixtureError {
    #[error("prior weights must be positive and sum to 1")]
    BadPrior,
    #[error("every expert assigned probability 0 to the observed bit")]
    DegenerateEvidence,
}

/// A Bayesian mixture: experts plus posterior log-weights and the observed
/// history.
#[derive(Clone)]
pub struct Mixture<T: Real> {
    pub experts: Vec<Expert<T>>,
    log_weights: Vec<T>,
    history: Vec<u8>,
}

impl<T: Real> Mixture<T> {
    pub fn uniform(experts: Vec<Expert<T>>) -> Result<Self, MixtureError> {
        let n = experts.len();
        let w = T::one() / T::from_usize_lossy(n);
        Self::with_prior(experts, &vec![w; n])
    }

    pub fn with_prior(experts: Vec<Expert<T>>, prior: &[T]) -> Result<Self, MixtureError> {
        if experts.is_empty() || prior.len() != experts.len() {
            return Err(MixtureError::BadPrior);
        }
        let total = prior.iter().fold(T::zero(), |a, &b| a + b);
        let tol = T::from_f64_lossy(1e-12);
        if (total - T::one()).abs() > tol || prior.iter().any(|&p| p <= T::zero()) {
            return Err(MixtureError::BadPrior);
        }
        Ok(Mixture {
            experts,
            log_weights: prior.iter().map(|p| p.ln()).collect(),
            history: Vec::new(),
        })
    }

    pub fn history(&self) -> &[u8] {
        &self.history
    }

    /// Posterior weights, normalized out of log domain.
    pub fn weights(&self) -> Vec<T> {
        let z = log_sum_exp(&self.log_weights);
        self.log_weights
            .iter()
            .map(|&lw| {
                if lw == T::neg_infinity() {
                    T::zero()
                } else {
                    (lw - z).exp()
                }
            })
            .collect()
    }

    /// Mixture predictive probability that the next bit is `bit`.
    pub fn predictive(&self, bit: u8) -> T {
        let weights = self.weights();
        self.experts
            .iter()
            .zip(&weights)
            .fold(T::zero(), |acc, (e, &w)| {
                acc + w * e.prob_of(&self.history, bit)
            })
    }

    /// Condition on one observed bit. Weight(h) scales by P(bit | h), then
    /// renormalizes; an expert at probability zero is eliminated forever.
    pub fn update(&self, bit: u8) -> Result<Mixture<T>, MixtureError> {
        let mut next = self.clone();
        for (lw, expert) in next.log_weights.iter_mut().zip(&self.experts) {
            let p = expert.prob_of(&self.history, bit);
            *lw = if p == T::zero() {
                T::neg_infinity()
            } else {
                *lw + p.ln()
            };
        }
        let z = log_sum_exp(&next.log_weights);
        if z == T::neg_infinity() {
            return Err(MixtureError::DegenerateEvidence);
        }
        for lw in &mut next.log_weights {
            if *lw != T::neg_infinity() {
                *lw -= z;
            }
        }
        next.history.push(bit);
        Ok(next)
    }

    /// Index of the expert currently holding the largest posterior weight.
    pub fn majority(&self) -> usize {
        let weights = self.weights();
        let mut best = 0;
        for (i, w) in weights.iter().enumerate() {
            if *w > weights[best] {
                best = i;
            }
        }
        best
    }
}

fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    if m == T::neg_infinity() {
        return m;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| {
        if x == T::neg_infinity() {
            acc
        } else {
            acc + (x - m).exp()
        }
    });
    m + sum.ln()
}

/// Cumulative log losses of the mixture and one expert along a sequence,
/// prefix by prefix. The regret (mixture minus expert) never exceeds
/// log(1 / prior(expert)).
#[derive(Debug, Clone)]
pub struct RegretTrace<T> {
    pub expert_id: String,
    pub prior_weight: T,
    /// Per-prefix (mixture log-loss, expert log-loss, regret).
    pub per_prefix: Vec<(T, T, T)>,
}

impl<T: Real> RegretTrace<T> {
    pub fn final_regret(&self) -> T {
        self.per_prefix.last().map_or(T::zero(), |&(_, _, r)| r)
    }

    pub fn bound(&self) -> T {
        (T::one() / self.prior_weight).ln()
    }
}

/// Run the mixture over `sequence` and trace the log-loss regret against
/// the expert at `expert_idx` after every prefix.
pub fn log_loss_regret<T: Real>(
    prior_mixture: &Mixture<T>,
    expert_idx: usize,
    sequence: &[u8],
) -> Result<RegretTrace<T>, MixtureError> {
    let expert = &prior_mixture.experts[expert_idx];
    let prior_weight = prior_mixture.weights()[expert_idx];
    let mut mixture = prior_mixture.clone();
    let mut mix_loss = T::zero();
    let mut expert_loss = T::zero();
    let mut per_prefix = Vec::with_capacity(sequence.len());
    let mut history: Vec<u8> = Vec::new();
    for &bit in sequence {
        mix_loss -= mixture.predictive(bit).ln();
        expert_loss -= expert.prob_of(&history, bit).ln();
        mixture = mixture.update(bit)?;
        history.push(bit);
        per_prefix.push((mix_loss, expert_loss, mix_loss - expert_loss));
    }
    Ok(RegretTrace {
        expert_id: expert.id.clone(),
        prior_weight,
        per_prefix,
    })
}

/// Weight trajectory of a mixture over a data stream: one row per step.
#[derive(Debug, Clone)]
pub struct WeightTrajectory<T> {
    pub expert_ids: Vec<String>,
    /// `weights[t][i]` = posterior weight of expert i after t+1 bits.
    pub weights: Vec<Vec<T>>,
    pub majority_flips: usize,
}

/// Alternating blocks of zeros and ones with the given lengths, starting
/// with zeros.
pub fn alternating_blocks(block_lengths: &[usize]) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, &len) in block_lengths.iter().enumerate() {
        let bit = (i % 2) as u8;
        out.extend(std::iter::repeat_n(bit, len));
    }
    out
}

/// Feed the mixture alternating 0-blocks and 1-blocks of growing length and
/// record the posterior trajectory. With the two biased constant experts,
/// each block's likelihood ratio overwhelms the previous posterior, so the
/// majority flips on every block boundary.
pub fn oscillation_demo<T: Real>(
    mixture: &Mixture<T>,
    block_lengths: &[usize],
) -> Result<WeightTrajectory<T>, MixtureError> {
    let data = alternating_blocks(block_lengths);
    let mut m = mixture.clone();
    let mut weights = Vec::with_capacity(data.len());
    let mut flips = 0;
    let mut last_majority = None;
    let mut boundaries: Vec<usize> = block_lengths
        .iter()
        .scan(0usize, |acc, &l| {
            *acc += l;
            Some(*acc)
        })
        .collect();
    boundaries.pop();
    let mut step = 0usize;
    for &bit in &data {
        m = m.update(bit)?;
        weights.push(m.weights());
        step += 1;
        let at_boundary = boundaries.contains(&step) || step == data.len();
        if at_boundary && m.experts.len() > 1 {
            let majority = m.majority();
            if let Some(prev) = last_majority {
                if prev != majority {
                    flips += 1;
                }
            }
            last_majority = Some(majority);
        }
    }
    Ok(WeightTrajectory {
        expert_ids: m.experts.iter().map(|e| e.id.clone()).collect(),
        weights,
        majority_flips: flips,
    })
}

/// The two-expert family from the oscillation pathology: "mostly ones" and
/// "mostly zeros".
pub fn biased_pair<T: Real>() -> Vec<Expert<T>> {
    vec![
        Expert::constant("ones_09", T::from_f64_lossy(0.9)),
        Expert::constant("zeros_09", T::from_f64_lossy(0.1)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Mixture<f64>;

    #[test]
    fn elimination_is_immediate_and_permanent() {
        let experts = vec![
            Expert::constant("always_one", 1.0),
            Expert::constant("always_zero", 0.0),
        ];
        let m = M::uniform(experts).unwrap().update(1).unwrap();
        assert_eq!(m.weights(), vec![1.0, 0.0]);
        let m = m.update(1).unwrap();
        assert_eq!(m.weights()[1], 0.0);
    }

    #[test]
    fn identical_experts_keep_uniform_weights() {
        let experts = vec![
            Expert::constant("a", 0.7),
            Expert::constant("b", 0.7),
            Expert::constant("c", 0.7),
        ];
        let mut m = M::uniform(experts).unwrap();
        for bit in [1, 0, 1, 1] {
            m = m.update(bit).unwrap();
        }
        for w in m.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_matches_hand_arithmetic() {
        let experts = vec![Expert::constant("e9", 0.9), Expert::constant("e5", 0.5)];
        let m = M::uniform(experts).unwrap().update(1).unwrap();
        let w = m.weights();
        assert!((w[0] - 9.0 / 14.0).abs() < 1e-12);
        assert!((w[1] - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_evidence_is_an_error() {
        let experts = vec![Expert::constant("sure_one", 1.0)];
        let m = M::uniform(experts).unwrap();
        assert!(matches!(m.update(0), Err(MixtureError::DegenerateEvidence)));
    }

    #[test]
    fn weights_sum_to_one_within_tolerance() {
        let experts = vec![
            Expert::constant("a", 0.9),
            Expert::constant("b", 0.2),
            Expert::constant("c", 0.55),
        ];
        let mut m = M::with_prior(experts, &[0.5, 0.25, 0.25]).unwrap();
        for i in 0..500 {
            m = m.update((i % 3 == 0) as u8).unwrap();
            let total: f64 = m.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn regret_zero_against_sole_expert() {
        let experts = vec![Expert::constant("only", 0.8)];
        let m = M::uniform(experts).unwrap();
        let trace = log_loss_regret(&m, 0, &[1, 1, 0, 1, 0, 0, 1]).unwrap();
        for (_, _, regret) in trace.per_prefix {
            assert!(regret.abs() < 1e-12);
        }
    }

    #[test]
    fn regret_bounded_by_log_inverse_prior_on_every_prefix() {
        let experts = vec![
            Expert::constant("half", 0.5),
            Expert::constant("nine", 0.9),
            Expert::constant("one_sided", 0.99),
        ];
        let m = M::with_prior(experts, &[0.5, 0.25, 0.25]).unwrap();
        // A sequence adversarial to nobody in particular.
        let seq: Vec<u8> = (0..200).map(|i| ((i * 7) % 5 < 2) as u8).collect();
        for idx in 0..3 {
            let trace = log_loss_regret(&m, idx, &seq).unwrap();
            let bound = trace.bound();
            for (t, &(_, _, regret)) in trace.per_prefix.iter().enumerate() {
                assert!(
                    regret <= bound + 1e-9,
                    "expert {idx} prefix {t}: regret {regret} > bound {bound}"
                );
            }
        }
    }

    #[test]
    fn regret_against_the_drawn_expert_saturates_its_bound() {
        // Frozen measurement: a 200-bit sequence drawn from the 0.9 expert
        // (prior 1/4, seed 6) collapses the posterior onto it, so the final
        // regret equals log 4 to within floating error.
        use rand::{Rng, SeedableRng};
        let experts = vec![
            Expert::constant("half", 0.5),
            Expert::constant("mostly_ones", 0.9),
            Expert::constant("mostly_zeros", 0.25),
        ];
        let mixture = Mixture::with_prior(experts, &[0.5, 0.25, 0.25]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let seq: Vec<u8> = (0..200).map(|_| (rng.gen::<f64>() < 0.9) as u8).collect();
        let trace = log_loss_regret(&mixture, 1, &seq).unwrap();
        let measured = trace.final_regret();
        assert!((measured - 4.0f64.ln()).abs() < 1e-9, "measured {measured}");
        assert!(measured <= trace.bound() + 1e-9);
    }

    #[test]
    fn oscillation_majority_flips_on_growing_blocks() {
        let m = M::uniform(biased_pair()).unwrap();
        let trajectory = oscillation_demo(&m, &[2, 4, 8, 16, 32]).unwrap();
        assert!(
            trajectory.majority_flips >= 4,
            "got {} flips",
            trajectory.majority_flips
        );
    }

    #[test]
    fn single_block_flips_at_most_once() {
        let m = M::uniform(biased_pair()).unwrap();
        let trajectory = oscillation_demo(&m, &[1]).unwrap();
        assert!(trajectory.majority_flips <= 1);
    }

    #[test]
    fn single_expert_never_flips() {
        let m = M::uniform(vec![Expert::constant("only", 0.9)]).unwrap();
        let trajectory = oscillation_demo(&m, &[2, 4, 8]).unwrap();
        assert_eq!(trajectory.majority_flips, 0);
    }

    #[test]
    fn incremental_equals_batch() {
        let experts = vec![Expert::constant("a", 0.8), Expert::constant("b", 0.3)];
        let seq: Vec<u8> = (0..300).map(|i| (i % 4 == 0) as u8).collect();
        let mut incremental = M::uniform(experts.clone()).unwrap();
        for &bit in &seq {
            incremental = incremental.update(bit).unwrap();
        }
        // Batch: single pass computing unnormalized posteriors directly.
        let mut log_w = [(0.5f64).ln(); 2];
        for (i, e) in experts.iter().enumerate() {
            let mut hist: Vec<u8> = Vec::new();
            for &bit in &seq {
                log_w[i] += e.prob_of(&hist, bit).ln();
                hist.push(bit);
            }
        }
        let z = (log_w[0].exp() + log_w[1].exp()).ln();
        let batch: Vec<f64> = log_w.iter().map(|lw| (lw - z).exp()).collect();
        let inc = incremental.weights();
        for (a, b) in inc.iter().zip(&batch) {
            assert!((a - b).abs() < 1e-12, "incremental {a} vs batch {b}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let experts = vec![
            Expert::<f32>::constant("a", 0.9),
            Expert::<f32>::constant("b", 0.1),
        ];
        let m = Mixture::<f32>::uniform(experts).unwrap().update(1).unwrap();
        assert!(m.weights()[0] > 0.8);
    }
}
