//! Enumeration-based ground truth: every scenario is instantiated, analysed
//! with the per-scenario Graham bound, and aggregated into the exact
//! response-time distribution and the exact longest-path statistics. Used to
//! verify the scenario-free analysis; refuses instances beyond a scenario
//! cap instead of switching algorithms.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{NodeId, PDag};
use crate::paths::{self, instantiate, Scenario, ScenarioGraph, LENGTH_SLACK};
use crate::response::RtDistribution;

/// Default ceiling on the number of scenarios the oracle will enumerate.
pub const DEFAULT_SCENARIO_CAP: u128 = 1_000_000;

/// Margin below a scenario's best-known length when collecting its tied
/// longest paths; generous against float reassociation, far below any
/// genuine length gap.
const TIE_MARGIN: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {scenarios} scenarios, above the cap of {cap}")]
    ScenarioCapExceeded { scenarios: u128, cap: u128 },
}

/// Everything the enumeration learns about one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    /// Product of the chosen branches' probabilities.
    pub probability: f64,
    pub longest_len: f64,
    /// Every path attaining the longest length in this scenario.
    pub tied_longest: BTreeSet<Vec<NodeId>>,
    pub volume: f64,
}

impl ScenarioOutcome {
    /// Graham's bound for this scenario on `m` cores.
    pub fn graham_bound(&self, m: u32) -> f64 {
        self.longest_len + (self.volume - self.longest_len) / m as f64
    }
}

/// Graham's bound for a non-conditional graph on `m` cores:
/// `len + (vol - len) / m`.
pub fn graham_bound(graph: &ScenarioGraph, m: u32) -> f64 {
    let len = paths::longest_path(graph).len;
    let vol = paths::volume(graph);
    len + (vol - len) / m as f64
}

fn all_scenarios(pdag: &PDag) -> Vec<Scenario> {
    let mut out = vec![Scenario::empty()];
    for s in pdag.structures() {
        let mut next = Vec::with_capacity(out.len() * s.branches.len());
        for sc in &out {
            for b in &s.branches {
                let mut choice = sc.choice().clone();
                choice.insert(s.id, b.index);
                next.push(Scenario::new(choice));
            }
        }
        out = next;
    }
    out
}

fn check_cap(pdag: &PDag, cap: u128) -> Result<(), OracleError> {
    let scenarios = pdag.scenario_count();
    if scenarios > cap {
        return Err(OracleError::ScenarioCapExceeded { scenarios, cap });
    }
    Ok(())
}

/// Enumerates every scenario, recording probability, longest length, the
/// full set of tied longest paths, and volume. Scenarios are emitted in
/// lexicographic order of their branch choices.
pub fn enumerate_outcomes(pdag: &PDag, cap: u128) -> Result<Vec<ScenarioOutcome>, OracleError> {
    check_cap(pdag, cap)?;
    let mut outcomes = Vec::new();
    for scenario in all_scenarios(pdag) {
        let graph = instantiate(pdag, &scenario).expect("enumerated choices are valid");
        let view = graph.view();
        let (_, near_best) = view.longest_path();
        let near = view.paths_at_least(near_best - TIE_MARGIN, LENGTH_SLACK);
        let longest_len = near
            .iter()
            .map(|&(_, len)| len)
            .fold(f64::NEG_INFINITY, f64::max);
        let tied_longest: BTreeSet<Vec<NodeId>> = near
            .iter()
            .filter(|&&(_, len)| len == longest_len)
            .map(|(seq, _)| view.to_ids(seq))
            .collect();
        let probability: f64 = scenario
            .choice()
            .iter()
            .map(|(&sid, &bidx)| {
                pdag.structure(sid)
                    .and_then(|s| s.branch(bidx))
                    .map(|b| b.prob)
                    .expect("enumerated choices are valid")
            })
            .product();
        outcomes.push(ScenarioOutcome {
            probability,
            longest_len,
            tied_longest,
            volume: paths::volume(&graph),
            scenario,
        });
    }
    Ok(outcomes)
}

/// The enumeration baseline's distribution: each scenario contributes its
/// probability at its Graham bound; equal bounds merge. Total mass is one.
pub fn enum_distribution(pdag: &PDag, m: u32, cap: u128) -> Result<RtDistribution, OracleError> {
    let outcomes = enumerate_outcomes(pdag, cap)?;
    Ok(RtDistribution::from_masses(
        outcomes.iter().map(|o| (o.graham_bound(m), o.probability)),
    ))
}

/// Exact longest-path statistics across all scenarios.
#[derive(Debug, Clone)]
pub struct ExactLongestStats {
    /// Union of the tied-longest path sets over all scenarios: exactly the
    /// paths that are the longest in at least one scenario.
    pub membership: BTreeSet<Vec<NodeId>>,
    lens: Vec<f64>,
    suffix: Vec<f64>,
}

impl ExactLongestStats {
    /// Exact probability that the realized longest-path length is at least
    /// `len`.
    pub fn exceedance(&self, len: f64) -> f64 {
        let idx = self.lens.partition_point(|&l| l < len);
        if idx == self.lens.len() {
            0.0
        } else {
            self.suffix[idx]
        }
    }

    /// The distinct longest lengths, ascending.
    pub fn lengths(&self) -> &[f64] {
        &self.lens
    }
}

/// Computes [`ExactLongestStats`] by full enumeration.
pub fn exact_longest_stats(pdag: &PDag, cap: u128) -> Result<ExactLongestStats, OracleError> {
    let outcomes = enumerate_outcomes(pdag, cap)?;
    let mut membership = BTreeSet::new();
    let mut mass: Vec<(f64, f64)> = Vec::new();
    for o in &outcomes {
        membership.extend(o.tied_longest.iter().cloned());
        mass.push((o.longest_len, o.probability));
    }
    mass.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut lens: Vec<f64> = Vec::new();
    let mut per_len: Vec<f64> = Vec::new();
    for (len, p) in mass {
        match lens.last() {
            Some(&last) if last == len => *per_len.last_mut().unwrap() += p,
            _ => {
                lens.push(len);
                per_len.push(p);
            }
        }
    }
    let mut suffix = vec![0.0; per_len.len()];
    let mut acc = 0.0;
    for i in (0..per_len.len()).rev() {
        acc += per_len[i];
        suffix[i] = acc;
    }
    Ok(ExactLongestStats {
        membership,
        lens,
        suffix,
    })
}
