//! Proxy-vs-true-utility worlds over finite domains, and the quantilizer:
//! sample from a trusted distribution conditioned on the top fraction `f`
//! by proxy value. With mean absolute proxy error at most `c` under the
//! trusted distribution, the quantilizer's expected overestimate is at most
//! `c / f` — in the worst case all of the error mass sits on the selected
//! set.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Rat;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyEntry {
    pub id: String,
    /// Trusted-distribution probability.
    pub p: Rat,
    /// True utility.
    pub u: Rat,
    /// Proxy value.
    pub v: Rat,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("probabilities must be nonnegative and sum to 1 (got {0})")]
    BadDistribution(String),
    #[error("error contract violated: mean |v - u| = {actual} exceeds c = {bound}")]
    ContractViolated { actual: String, bound: String },
    #[error("fraction must satisfy 0 < f <= 1")]
    BadFraction,
}

/// A finite proxy world. Construction verifies the error contract exactly:
/// the trusted-distribution mean of |v - u| is at most `error_bound`.
#[derive(Debug, Clone)]
pub struct ProxyWorld {
    pub name: String,
    pub entries: Vec<ProxyEntry>,
    pub error_bound: Rat,
}

impl ProxyWorld {
    pub fn new(
        name: impl Into<String>,
        entries: Vec<ProxyEntry>,
        error_bound: Rat,
    ) -> Result<ProxyWorld, WorldError> {
        let total: Rat = entries.iter().map(|e| e.p.clone()).sum();
        if total != Rat::one() || entries.iter().any(|e| e.p < Rat::zero()) {
            return Err(WorldError::BadDistribution(total.to_string()));
        }
        let mean_abs: Rat = entries
            .iter()
            .map(|e| e.p.clone() * (e.v.clone() - e.u.clone()).abs())
            .sum();
        if mean_abs > error_bound {
            return Err(WorldError::ContractViolated {
                actual: mean_abs.to_string(),
                bound: error_bound.to_string(),
            });
        }
        Ok(ProxyWorld {
            name: name.into(),
            entries,
            error_bound,
        })
    }

    /// Exact mean absolute proxy error under the trusted distribution.
    pub fn mean_abs_error(&self) -> Rat {
        self.entries
            .iter()
            .map(|e| e.p.clone() * (e.v.clone() - e.u.clone()).abs())
            .sum()
    }
}

/// How the top-fraction boundary is resolved; the off-by-one rule exists
/// only as a bound-violation probe for the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Proportional tie-splitting: the selected set has trusted mass
    /// exactly `f`.
    Exact,
    /// Deliberately truncate the boundary element(s), concentrating the
    /// conditional distribution on too small a set.
    OffByOneShort,
}

#[derive(Debug, Clone)]
pub struct QuantilizerConfig {
    pub fraction: Rat,
}

impl QuantilizerConfig {
    pub fn new(fraction: Rat) -> Result<Self, WorldError> {
        if fraction <= Rat::zero() || fraction > Rat::one() {
            return Err(WorldError::BadFraction);
        }
        Ok(QuantilizerConfig { fraction })
    }

    /// Acceptable risk implied by the world's error contract; recomputed,
    /// never stored.
    pub fn risk(&self, world: &ProxyWorld) -> Rat {
        world.error_bound.clone() / self.fraction.clone()
    }
}

/// The quantilizer's exact selection distribution: per-entry probabilities,
/// in entry order.
pub fn quantile_distribution(
    world: &ProxyWorld,
    config: &QuantilizerConfig,
) -> Result<Vec<Rat>, WorldError> {
    quantile_distribution_with_rule(world, config, BoundaryRule::Exact)
}

pub fn quantile_distribution_with_rule(
    world: &ProxyWorld,
    config: &QuantilizerConfig,
    rule: BoundaryRule,
) -> Result<Vec<Rat>, WorldError> {
    let f = &config.fraction;
    if *f <= Rat::zero() || *f > Rat::one() {
        return Err(WorldError::BadFraction);
    }
    // Entries sorted by proxy value, best first.
    let mut order: Vec<usize> = (0..world.entries.len()).collect();
    order.sort_by(|&a, &b| {
        world.entries[b]
            .v
            .cmp(&world.entries[a].v)
            .then(a.cmp(&b))
    });
    // Threshold value v*: mass strictly above is < f, mass at-or-above >= f.
    let mut mass_above = Rat::zero();
    let mut threshold: Option<Rat> = None;
    let mut i = 0;
    while i < order.len() {
        let value = world.entries[order[i]].v.clone();
        let mut mass_at = Rat::zero();
        let mut j = i;
        while j < order.len() && world.entries[order[j]].v == value {
            mass_at += world.entries[order[j]].p.clone();
            j += 1;
        }
        if mass_above.clone() + mass_at.clone() >= *f {
            threshold = Some(value);
            break;
        }
        mass_above += mass_at;
        i = j;
    }
    let threshold = threshold.expect("total mass is 1 >= f");
    let mass_at: Rat = world
        .entries
        .iter()
        .filter(|e| e.v == threshold)
        .map(|e| e.p.clone())
        .sum();
    // Fraction of the boundary group's mass that fits in the top f.
    let lambda = (f.clone() - mass_above.clone()) / mass_at;
    let mut probs = vec![Rat::zero(); world.entries.len()];
    for (i, e) in world.entries.iter().enumerate() {
        if e.v > threshold {
            probs[i] = e.p.clone() / f.clone();
        } else if e.v == threshold {
            probs[i] = lambda.clone() * e.p.clone() / f.clone();
        }
    }
    if rule == BoundaryRule::OffByOneShort {
        // Drop the boundary group and renormalize over what remains; when
        // nothing remains strictly above the threshold, keep the exact
        // distribution (the bug has nothing to truncate).
        if !mass_above.is_zero() {
            for (i, e) in world.entries.iter().enumerate() {
                probs[i] = if e.v > threshold {
                    e.p.clone() / mass_above.clone()
                } else {
                    Rat::zero()
                };
            }
        }
    }
    Ok(probs)
}

/// Exact expected proxy overestimate E[V - U] under the quantilizer's
/// selection distribution.
pub fn expected_overestimate(
    world: &ProxyWorld,
    config: &QuantilizerConfig,
) -> Result<Rat, WorldError> {
    let q = quantile_distribution(world, config)?;
    Ok(world
        .entries
        .iter()
        .zip(&q)
        .map(|(e, w)| w.clone() * (e.v.clone() - e.u.clone()))
        .sum())
}

/// Exact expected proxy value `E[V]` of the selection.
pub fn expected_proxy_value(
    world: &ProxyWorld,
    config: &QuantilizerConfig,
) -> Result<Rat, WorldError> {
    let q = quantile_distribution(world, config)?;
    Ok(world
        .entries
        .iter()
        .zip(&q)
        .map(|(e, w)| w.clone() * e.v.clone())
        .sum())
}

/// Draw one element from the quantilizer's distribution.
pub fn quantilize<'w>(
    world: &'w ProxyWorld,
    config: &QuantilizerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<&'w ProxyEntry, WorldError> {
    let q = quantile_distribution(world, config)?;
    let draw = Rat::new(rng.gen::<u64>().into(), (u128::from(u64::MAX) + 1).into());
    let mut acc = Rat::zero();
    for (e, w) in world.entries.iter().zip(&q) {
        acc += w.clone();
        if draw < acc {
            return Ok(e);
        }
    }
    Ok(world
        .entries
        .last()
        .expect("worlds are nonempty"))
}

/// Seeded convenience wrapper.
pub fn quantilize_seeded<'w>(
    world: &'w ProxyWorld,
    config: &QuantilizerConfig,
    seed: u64,
) -> Result<&'w ProxyEntry, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    quantilize(world, config, &mut rng)
}

/// Replicate sampler: the exact selection distribution is computed once and
/// draws invert a cumulative table.
pub struct QuantileSampler {
    cumulative: Vec<f64>,
}

impl QuantileSampler {
    pub fn new(world: &ProxyWorld, config: &QuantilizerConfig) -> Result<Self, WorldError> {
        let q = quantile_distribution(world, config)?;
        let mut acc = Rat::zero();
        let cumulative = q
            .iter()
            .map(|w| {
                acc += w.clone();
                crate::rat_to_f64(&acc)
            })
            .collect();
        Ok(QuantileSampler { cumulative })
    }

    /// Index of the drawn entry.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let u = rng.gen::<f64>();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Hard argmax by proxy value, with the shortfall of its true utility
/// against the best true utility available.
#[derive(Debug, Clone)]
pub struct ArgmaxReport {
    pub picked: ProxyEntry,
    pub best_true_utility: Rat,
    pub shortfall: Rat,
}

pub fn argmax_baseline(world: &ProxyWorld) -> ArgmaxReport {
    let picked = world
        .entries
        .iter()
        .max_by(|a, b| a.v.cmp(&b.v))
        .expect("worlds are nonempty")
        .clone();
    let best_true = world
        .entries
        .iter()
        .map(|e| e.u.clone())
        .max()
        .expect("worlds are nonempty");
    let shortfall = best_true.clone() - picked.u.clone();
    ArgmaxReport {
        picked,
        best_true_utility: best_true,
        shortfall,
    }
}

// ---------------------------------------------------------------------------
// Sampled worlds: the error contract is checked by Monte Carlo.
// ---------------------------------------------------------------------------

/// A proxy world given by a sampler instead of a finite list; the error
/// contract is verified empirically within three standard errors.
#[derive(Clone)]
pub struct SampledWorld {
    pub name: String,
    pub sampler: Arc<dyn Fn(&mut ChaCha8Rng) -> f64 + Send + Sync>,
    pub true_utility: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub proxy: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub error_bound: f64,
}

#[derive(Debug, Clone)]
pub struct ContractCheck {
    pub mean_abs_error: f64,
    pub standard_error: f64,
    pub bound: f64,
    pub ok: bool,
}

impl SampledWorld {
    pub fn verify_contract(&self, samples: usize, seed: u64) -> ContractCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let x = (self.sampler)(&mut rng);
            let err = ((self.proxy)(x) - (self.true_utility)(x)).abs();
            sum += err;
            sum_sq += err * err;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        let se = (var / n).sqrt();
        ContractCheck {
            mean_abs_error: mean,
            standard_error: se,
            bound: self.error_bound,
            ok: mean <= self.error_bound + 3.0 * se,
        }
    }
}

// ---------------------------------------------------------------------------
// Named fixtures.
// ---------------------------------------------------------------------------

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Worst case for the quantilizer bound: all permitted error mass sits
/// exactly on the top-f set, so the expected overestimate is c/f exactly.
pub fn saturating_fixture(f: Rat, c: Rat) -> ProxyWorld {
    let n = 10i64;
    let top = (f.clone() * rat(n, 1)).to_integer();
    let spike = c.clone() / f.clone();
    let entries = (0..n)
        .map(|i| ProxyEntry {
            id: format!("x{i}"),
            p: rat(1, n),
            u: Rat::zero(),
            v: if Rat::from_integer(i.into()) < Rat::from_integer(top.clone()) {
                spike.clone()
            } else {
                Rat::zero()
            },
        })
        .collect();
    ProxyWorld::new("saturating", entries, c).expect("fixture satisfies its own contract")
}

/// Variant with almost the whole error budget on a single top element; the
/// exact quantilizer still meets c/f, while truncating the boundary group
/// overshoots it. Mean |v - u| = (99/100 + 1/100)/10 = c = 1/10.
pub fn concentrated_fixture() -> ProxyWorld {
    let entries = (0..10i64)
        .map(|i| ProxyEntry {
            id: format!("x{i}"),
            p: rat(1, 10),
            u: Rat::zero(),
            v: match i {
                0 => rat(99, 100),
                1 => rat(1, 100),
                _ => Rat::zero(),
            },
        })
        .collect();
    ProxyWorld::new("concentrated", entries, rat(1, 10)).expect("contract tight")
}

/// One rotten apple sitting at the top of the proxy ranking.
pub fn rotten_apple_fixture() -> ProxyWorld {
    let n = 100i64;
    let entries = (0..n)
        .map(|i| ProxyEntry {
            id: format!("apple{i}"),
            p: rat(1, n),
            // Honest apples: proxy equals utility, increasing in i.
            u: if i == 0 { rat(-100, 1) } else { rat(i, n) },
            // The rotten apple outbids everyone on the proxy.
            v: if i == 0 { rat(2, 1) } else { rat(i, n) },
        })
        .collect();
    // Mean |v - u| = (1/100) * 102
    ProxyWorld::new("rotten_apple", entries, rat(102, 100)).expect("contract holds")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contract_checked_on_construction() {
        let entries = vec![
            ProxyEntry {
                id: "a".into(),
                p: rat(1, 2),
                u: Rat::zero(),
                v: rat(1, 1),
            },
            ProxyEntry {
                id: "b".into(),
                p: rat(1, 2),
                u: Rat::zero(),
                v: Rat::zero(),
            },
        ];
        assert!(ProxyWorld::new("w", entries.clone(), rat(1, 2)).is_ok());
        assert!(matches!(
            ProxyWorld::new("w", entries, rat(1, 4)),
            Err(WorldError::ContractViolated { .. })
        ));
    }

    #[test]
    fn quantilizer_distribution_normalizes_and_covers_mass_f() {
        let world = saturating_fixture(rat(1, 5), rat(1, 10));
        for f in [rat(1, 5), rat(1, 4), rat(3, 10), rat(1, 2), rat(1, 1)] {
            let config = QuantilizerConfig::new(f.clone()).unwrap();
            let q = quantile_distribution(&world, &config).unwrap();
            let total: Rat = q.iter().cloned().sum();
            assert_eq!(total, Rat::one(), "distribution normalizes at f={f}");
            // q(x) = (selected mass of x) / f, so the selected trusted mass
            // sums back to exactly f.
            let selected_mass: Rat = q.iter().map(|w| w.clone() * f.clone()).sum();
            assert_eq!(selected_mass, f);
        }
    }

    #[test]
    fn boundary_tie_splitting_is_proportional() {
        // Two tied boundary elements with unequal p split the leftover mass
        // in proportion.
        let entries = vec![
            ProxyEntry { id: "top".into(), p: rat(1, 10), u: Rat::zero(), v: rat(3, 1) },
            ProxyEntry { id: "t1".into(), p: rat(3, 10), u: Rat::zero(), v: rat(2, 1) },
            ProxyEntry { id: "t2".into(), p: rat(6, 10), u: Rat::zero(), v: rat(2, 1) },
        ];
        let world = ProxyWorld::new("ties", entries, rat(100, 1)).unwrap();
        let config = QuantilizerConfig::new(rat(4, 10)).unwrap();
        let q = quantile_distribution(&world, &config).unwrap();
        // leftover = 4/10 - 1/10 = 3/10 over mass_at 9/10: lambda = 1/3
        assert_eq!(q[0], rat(1, 4)); // (1/10) / (4/10)
        assert_eq!(q[1], rat(1, 4)); // (1/3)(3/10)/(4/10)
        assert_eq!(q[2], rat(1, 2)); // (1/3)(6/10)/(4/10)
    }

    #[test]
    fn saturating_fixture_achieves_c_over_f_exactly() {
        let f = rat(1, 5);
        let c = rat(1, 10);
        let world = saturating_fixture(f.clone(), c.clone());
        let config = QuantilizerConfig::new(f.clone()).unwrap();
        assert_eq!(world.mean_abs_error(), c);
        assert_eq!(
            expected_overestimate(&world, &config).unwrap(),
            c.clone() / f
        );
    }

    #[test]
    fn fraction_one_reduces_to_the_contract() {
        let world = saturating_fixture(rat(1, 5), rat(1, 10));
        let config = QuantilizerConfig::new(Rat::one()).unwrap();
        let over = expected_overestimate(&world, &config).unwrap();
        assert!(over <= world.error_bound);
    }

    #[test]
    fn risk_is_recomputed_from_c_and_f() {
        let world = saturating_fixture(rat(1, 5), rat(1, 10));
        let config = QuantilizerConfig::new(rat(1, 5)).unwrap();
        assert_eq!(config.risk(&world), rat(1, 2));
    }

    #[test]
    fn off_by_one_rule_violates_the_bound_on_concentrated_fixture() {
        let world = concentrated_fixture();
        let config = QuantilizerConfig::new(rat(1, 5)).unwrap();
        let bound = config.risk(&world);
        let exact = expected_overestimate(&world, &config).unwrap();
        assert!(exact <= bound);
        let buggy = quantile_distribution_with_rule(&world, &config, BoundaryRule::OffByOneShort)
            .unwrap();
        let buggy_over: Rat = world
            .entries
            .iter()
            .zip(&buggy)
            .map(|(e, w)| w.clone() * (e.v.clone() - e.u.clone()))
            .sum();
        assert!(
            buggy_over > bound,
            "mutation must break the bound: {buggy_over} <= {bound}"
        );
    }

    #[test]
    fn lowering_f_never_lowers_expected_proxy_value() {
        for world in [
            saturating_fixture(rat(1, 5), rat(1, 10)),
            concentrated_fixture(),
            rotten_apple_fixture(),
        ] {
            let mut last: Option<Rat> = None;
            // f descending
            for denom in 1..=20i64 {
                let config = QuantilizerConfig::new(rat(1, denom)).unwrap();
                let v = expected_proxy_value(&world, &config).unwrap();
                if let Some(prev) = last {
                    assert!(
                        v >= prev,
                        "expected V dropped when f shrank on {}",
                        world.name
                    );
                }
                last = Some(v);
            }
        }
    }

    #[test]
    fn argmax_eats_the_rotten_apple_quantilizer_rarely_does() {
        let world = rotten_apple_fixture();
        let report = argmax_baseline(&world);
        assert_eq!(report.picked.id, "apple0");
        assert_eq!(report.picked.u, rat(-100, 1));
        assert_eq!(report.shortfall, rat(10099, 100));
        let config = QuantilizerConfig::new(rat(1, 20)).unwrap();
        let q = quantile_distribution(&world, &config).unwrap();
        // Bad-pick probability is p/f = (1/100)/(1/20) = 1/5.
        assert_eq!(q[0], rat(1, 5));
    }

    #[test]
    fn argmax_gap_zero_when_proxy_exact() {
        let entries = (0..5i64)
            .map(|i| ProxyEntry {
                id: format!("e{i}"),
                p: rat(1, 5),
                u: rat(i, 1),
                v: rat(i, 1),
            })
            .collect();
        let world = ProxyWorld::new("exact", entries, Rat::zero()).unwrap();
        assert_eq!(argmax_baseline(&world).shortfall, Rat::zero());
    }

    #[test]
    fn empirical_frequencies_match_exact_distribution() {
        let world = saturating_fixture(rat(1, 5), rat(1, 10));
        let config = QuantilizerConfig::new(rat(3, 10)).unwrap();
        let q = quantile_distribution(&world, &config).unwrap();
        let n = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let sampler = QuantileSampler::new(&world, &config).unwrap();
        let mut counts = vec![0usize; world.entries.len()];
        for _ in 0..n {
            counts[sampler.draw(&mut rng)] += 1;
        }
        for (i, exact) in q.iter().enumerate() {
            let p = crate::rat_to_f64(exact);
            let freq = counts[i] as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (freq - p).abs() <= 3.0 * se + 1e-9,
                "entry {i}: freq {freq} vs exact {p} (se {se})"
            );
        }
    }

    #[test]
    fn sampled_world_contract_check() {
        let world = SampledWorld {
            name: "noisy".into(),
            sampler: Arc::new(|rng| rng.gen::<f64>()),
            true_utility: Arc::new(|x| x),
            proxy: Arc::new(|x| x + 0.05),
            error_bound: 0.05,
        };
        let check = world.verify_contract(20_000, 7);
        assert!(check.ok);
        let bad = SampledWorld {
            error_bound: 0.01,
            ..world
        };
        assert!(!bad.verify_contract(20_000, 7).ok);
    }
}
