//! Proxy-failure demonstrations beyond the regressional regime: correlation
//! collapse outside the trusted range (extremal), optimizing a correlate
//! that the goal does not respond to (causal), and search spaces containing
//! elements that game the selection rule (adversarial).

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::goodhart::world::{
    argmax_baseline, quantile_distribution, ProxyEntry, ProxyWorld, QuantilizerConfig,
};
use crate::{rat_to_f64, Rat};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

// ---------------------------------------------------------------------------
// Extremal regime: mild selection tracks the proxy, hard selection lands in
// the spike region where the proxy-goal correlation no longer exists.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ExtremalFixture {
    /// (probability, true utility, proxy value), proxy-sorted ascending.
    pub points: Vec<(f64, f64, f64)>,
    pub spike_height: f64,
}

/// Trusted range: 101 grid points with proxy equal to utility. One spike
/// point of tiny probability whose proxy outbids everything while its true
/// utility is disastrous.
pub fn extremal_fixture(spike_height: f64) -> ExtremalFixture {
    let n = 101usize;
    let spike_mass = 1e-4;
    let grid_mass = (1.0 - spike_mass) / n as f64;
    let mut points: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| {
            let u = i as f64 / (n - 1) as f64;
            (grid_mass, u, u)
        })
        .collect();
    let spike_u = -1.0;
    points.push((spike_mass, spike_u, spike_u + spike_height));
    points.sort_by(|a, b| a.2.total_cmp(&b.2));
    ExtremalFixture {
        points,
        spike_height,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalRow {
    /// Number of independent draws the selector takes the best of; `None`
    /// is the hard argmax over the whole domain.
    pub strength: Option<u32>,
    pub expected_proxy: f64,
    pub expected_true: f64,
}

/// Exact expected proxy/true value of "best proxy among m draws", by order
/// statistics over the finite distribution (no sampling).
fn best_of_m(fixture: &ExtremalFixture, m: u32) -> (f64, f64) {
    // Group by proxy value ascending; cdf_below[g] = P(proxy < group g).
    let pts = &fixture.points;
    let mut expected_proxy = 0.0;
    let mut expected_true = 0.0;
    let mut i = 0;
    let mut cdf_below = 0.0f64;
    while i < pts.len() {
        let v = pts[i].2;
        let mut group_mass = 0.0;
        let mut group_u = 0.0;
        let mut j = i;
        while j < pts.len() && pts[j].2 == v {
            group_mass += pts[j].0;
            group_u += pts[j].0 * pts[j].1;
            j += 1;
        }
        let p_max_in_group =
            (cdf_below + group_mass).powi(m as i32) - cdf_below.powi(m as i32);
        expected_proxy += p_max_in_group * v;
        expected_true += p_max_in_group * (group_u / group_mass);
        cdf_below += group_mass;
        i = j;
    }
    (expected_proxy, expected_true)
}

/// Sweep selection strength and report the realized-vs-predicted curve.
pub fn extremal_demo(spike_height: f64, strengths: &[u32]) -> Vec<ExtremalRow> {
    let fixture = extremal_fixture(spike_height);
    let mut rows: Vec<ExtremalRow> = strengths
        .iter()
        .map(|&m| {
            let (ev, eu) = best_of_m(&fixture, m);
            ExtremalRow {
                strength: Some(m),
                expected_proxy: ev,
                expected_true: eu,
            }
        })
        .collect();
    // Hard argmax: deterministic pick of the top proxy point.
    let top = fixture
        .points
        .iter()
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .unwrap();
    rows.push(ExtremalRow {
        strength: None,
        expected_proxy: top.2,
        expected_true: top.1,
    });
    rows
}

// ---------------------------------------------------------------------------
// Causal regime: umbrellas correlate with the goal, and intervening on them
// does nothing, because rain drives both.
// ---------------------------------------------------------------------------

/// Exact joint over three binary variables: rain is a fair coin; umbrella
/// and goal are independently noisy copies of rain. `extra_edge` optionally
/// makes umbrellas genuinely help when it is carried.
#[derive(Debug, Clone)]
pub struct UmbrellaModel {
    /// P(umbrella != rain)
    pub umbrella_flip: Rat,
    /// P(goal != rain)
    pub goal_flip: Rat,
    /// P(goal forced to 1 | umbrella = 1) via a real umbrella -> goal edge.
    pub umbrella_boost: Rat,
}

impl UmbrellaModel {
    pub fn standard() -> Self {
        UmbrellaModel {
            umbrella_flip: rat(1, 20),
            goal_flip: rat(1, 9),
            umbrella_boost: Rat::zero(),
        }
    }

    pub fn with_real_edge() -> Self {
        UmbrellaModel {
            umbrella_boost: rat(1, 4),
            ..Self::standard()
        }
    }

    pub fn rain_independent() -> Self {
        UmbrellaModel {
            umbrella_flip: rat(1, 2),
            ..Self::standard()
        }
    }

    /// P(goal = 1 | rain, umbrella) with the optional real edge applied on
    /// top of the noisy copy of rain.
    fn goal_prob(&self, rain: bool, umbrella: bool) -> Rat {
        let copy = if rain {
            Rat::one() - self.goal_flip.clone()
        } else {
            self.goal_flip.clone()
        };
        if umbrella {
            // goal = 1 if the copy fires or the boost fires
            let b = self.umbrella_boost.clone();
            copy.clone() + b.clone() - copy * b
        } else {
            copy
        }
    }

    /// Exact joint P(rain, umbrella, goal) as eight cells.
    fn joint(&self) -> Vec<(bool, bool, bool, Rat)> {
        let half = rat(1, 2);
        let mut cells = Vec::new();
        for rain in [false, true] {
            for umbrella in [false, true] {
                let p_u = if umbrella == rain {
                    Rat::one() - self.umbrella_flip.clone()
                } else {
                    self.umbrella_flip.clone()
                };
                for goal in [false, true] {
                    let p_g = if goal {
                        self.goal_prob(rain, umbrella)
                    } else {
                        Rat::one() - self.goal_prob(rain, umbrella)
                    };
                    cells.push((rain, umbrella, goal, half.clone() * p_u.clone() * p_g));
                }
            }
        }
        cells
    }

    /// Pearson correlation of umbrella and goal on the observational joint.
    /// Kept in exact rationals; both marginals are fair coins in the
    /// standard model, so the normalization is rational.
    pub fn observational_correlation(&self) -> Rat {
        let joint = self.joint();
        let mut e_u = Rat::zero();
        let mut e_g = Rat::zero();
        let mut e_ug = Rat::zero();
        for (_, u, g, p) in &joint {
            if *u {
                e_u += p.clone();
            }
            if *g {
                e_g += p.clone();
            }
            if *u && *g {
                e_ug += p.clone();
            }
        }
        let cov = e_ug - e_u.clone() * e_g.clone();
        let var_u = e_u.clone() - e_u.clone() * e_u.clone();
        let var_g = e_g.clone() - e_g.clone() * e_g;
        // Fair-coin marginals make both variances exactly 1/4.
        assert_eq!(var_u, rat(1, 4), "umbrella marginal must stay a fair coin");
        assert_eq!(var_g, rat(1, 4), "goal marginal must stay a fair coin");
        cov / rat(1, 4)
    }

    /// E[goal | do(umbrella = u)]: graph surgery cuts rain -> umbrella, so
    /// rain keeps its prior while umbrella is set exogenously.
    pub fn interventional_goal(&self, umbrella: bool) -> Rat {
        let half = rat(1, 2);
        half.clone() * self.goal_prob(false, umbrella)
            + half * self.goal_prob(true, umbrella)
    }

    pub fn interventional_effect(&self) -> Rat {
        self.interventional_goal(true) - self.interventional_goal(false)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CausalReport {
    pub observational_correlation: f64,
    pub observational_correlation_exact: String,
    pub interventional_effect: f64,
    pub interventional_effect_exact: String,
}

pub fn causal_demo(model: &UmbrellaModel) -> CausalReport {
    let corr = model.observational_correlation();
    let effect = model.interventional_effect();
    CausalReport {
        observational_correlation: rat_to_f64(&corr),
        observational_correlation_exact: corr.to_string(),
        interventional_effect: rat_to_f64(&effect),
        interventional_effect_exact: effect.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Adversarial regime: an element of the search space simulates the selector
// and outbids the honest optimum.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct AdversarialReport {
    pub argmax_pick: String,
    pub argmax_true_utility: Rat,
    pub honest_best_pick: String,
    /// Exact probability that the quantilizer selects the adversary.
    pub quantilizer_adversary_probability: Rat,
    pub quantilizer_bound: Rat,
}

/// Build the search space: honest entries whose proxy equals their utility,
/// plus (optionally) an adversarial entry that simulates the argmax rule
/// over the honest entries and bids just above the winner, while its true
/// utility is the worst in the space.
pub fn adversarial_space(adversary_mass: Rat, include_adversary: bool) -> ProxyWorld {
    let n = 20i64;
    let honest_mass = if include_adversary {
        (Rat::one() - adversary_mass.clone()) / rat(n, 1)
    } else {
        Rat::one() / rat(n, 1)
    };
    let mut entries: Vec<ProxyEntry> = (0..n)
        .map(|i| ProxyEntry {
            id: format!("honest{i}"),
            p: honest_mass.clone(),
            u: rat(i, n),
            v: rat(i, n),
        })
        .collect();
    if include_adversary {
        // Simulate the selection rule on the honest field to find the bid
        // to beat. The simulation world carries its own uniform weights.
        let simulated: Vec<ProxyEntry> = entries
            .iter()
            .map(|e| ProxyEntry {
                p: Rat::one() / rat(n, 1),
                ..e.clone()
            })
            .collect();
        let honest_world =
            ProxyWorld::new("honest_field", simulated, Rat::zero()).expect("exact proxies");
        let winner = argmax_baseline(&honest_world).picked;
        let outbid = winner.v + rat(1, 100);
        entries.push(ProxyEntry {
            id: "adversary".into(),
            p: adversary_mass,
            u: rat(-10, 1),
            v: outbid,
        });
    }
    let bound: Rat = entries
        .iter()
        .map(|e| e.p.clone() * (e.v.clone() - e.u.clone()).abs())
        .sum();
    ProxyWorld::new("adversarial", entries, bound).expect("contract tight by construction")
}

pub fn adversarial_demo(
    adversary_mass: Rat,
    fraction: Rat,
    include_adversary: bool,
) -> AdversarialReport {
    let world = adversarial_space(adversary_mass.clone(), include_adversary);
    let argmax = argmax_baseline(&world);
    let honest_best = world
        .entries
        .iter()
        .filter(|e| e.id != "adversary")
        .max_by(|a, b| a.v.cmp(&b.v))
        .unwrap();
    let config = QuantilizerConfig::new(fraction.clone()).expect("valid fraction");
    let q = quantile_distribution(&world, &config).expect("distribution");
    let adv_prob = world
        .entries
        .iter()
        .zip(&q)
        .find(|(e, _)| e.id == "adversary")
        .map(|(_, w)| w.clone())
        .unwrap_or_else(Rat::zero);
    AdversarialReport {
        argmax_pick: argmax.picked.id.clone(),
        argmax_true_utility: argmax.picked.u.clone(),
        honest_best_pick: honest_best.id.clone(),
        quantilizer_adversary_probability: adv_prob,
        quantilizer_bound: adversary_mass / fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremal_mild_selection_tracks_the_proxy() {
        let rows = extremal_demo(3.0, &[1, 4, 16, 64]);
        for row in &rows[..4] {
            let rel = (row.expected_proxy - row.expected_true).abs()
                / row.expected_proxy.abs().max(1e-12);
            assert!(
                rel < 0.05,
                "strength {:?}: proxy {} vs true {}",
                row.strength,
                row.expected_proxy,
                row.expected_true
            );
        }
    }

    #[test]
    fn extremal_hard_argmax_collapses() {
        let rows = extremal_demo(3.0, &[1]);
        let argmax_row = rows.last().unwrap();
        assert_eq!(argmax_row.strength, None);
        assert!(argmax_row.expected_true < 0.0);
        assert!(argmax_row.expected_proxy > 1.0);
    }

    #[test]
    fn extremal_without_spike_never_collapses() {
        let rows = extremal_demo(0.0, &[1, 4, 16, 64, 256, 4096]);
        for row in &rows {
            // With proxy == utility everywhere except a spike of height 0,
            // realized utility equals predicted up to the spike's own u != v
            // gap, which is now zero.
            assert!(
                (row.expected_proxy - row.expected_true).abs() < 1e-12,
                "strength {:?}",
                row.strength
            );
        }
    }

    #[test]
    fn causal_standard_model_is_exactly_correlation_seven_tenths() {
        let model = UmbrellaModel::standard();
        let corr = model.observational_correlation();
        assert_eq!(corr, rat(7, 10));
        assert_eq!(model.interventional_effect(), Rat::zero());
    }

    #[test]
    fn causal_real_edge_moves_the_goal() {
        let model = UmbrellaModel::with_real_edge();
        assert!(model.interventional_effect() > Rat::zero());
    }

    #[test]
    fn causal_no_rain_edge_no_correlation() {
        let model = UmbrellaModel::rain_independent();
        assert_eq!(model.observational_correlation(), Rat::zero());
        assert_eq!(model.interventional_effect(), Rat::zero());
    }

    #[test]
    fn adversary_wins_argmax_and_rarely_survives_quantilization() {
        let report = adversarial_demo(rat(1, 1000), rat(1, 2), true);
        assert_eq!(report.argmax_pick, "adversary");
        assert_eq!(report.argmax_true_utility, rat(-10, 1));
        assert_eq!(report.quantilizer_adversary_probability, rat(2, 1000));
        assert!(report.quantilizer_adversary_probability <= report.quantilizer_bound);
    }

    #[test]
    fn without_adversary_argmax_is_honest() {
        let report = adversarial_demo(rat(1, 1000), rat(1, 2), false);
        assert_eq!(report.argmax_pick, "honest19");
        assert_eq!(report.argmax_pick, report.honest_best_pick);
    }
}
