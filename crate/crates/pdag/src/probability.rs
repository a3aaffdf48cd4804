//! Probability that each path of Λ* executes and is the longest.
//!
//! Probabilities are assigned in Λ* order. The mass not yet accounted for
//! when a path is reached splits into the mass of strictly shorter paths
//! (the "tail") and the path's own mass; the tail is bounded through
//! pairwise co-execution bounds against the longer paths. Two clamps keep
//! the result a sub-distribution: negative values are floored at zero, and
//! once the cumulative mass reaches one the remaining paths get zero.
//!
//! The resulting cumulative sums upper-bound, at every path, the exact
//! probability that the realized longest path is at least that long.

use std::collections::BTreeSet;

use crate::lambdastar::LambdaStarSet;
use crate::model::{BranchIndex, PDag, StructureId};
use crate::paths::PathContext;

/// Why a probability was clamped during assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampRule {
    /// The raw value was negative and was floored at zero.
    LowerZero,
    /// The cumulative mass had already reached one; this and all later
    /// paths were forced to zero and the computation terminated.
    UpperTermination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClampEvent {
    pub index: usize,
    pub rule: ClampRule,
}

/// Per-path probabilities aligned with a [`LambdaStarSet`], their cumulative
/// sums, and the clamp events that occurred while assigning them.
#[derive(Debug, Clone)]
pub struct ProbabilityAssignment {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    clamp_events: Vec<ClampEvent>,
}

impl ProbabilityAssignment {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative mass through each index: the bound on the probability that
    /// the longest path is at least as long as the path at that index.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn clamp_events(&self) -> &[ClampEvent] {
        &self.clamp_events
    }

    pub fn clamp_at(&self, index: usize) -> Option<ClampRule> {
        self.clamp_events
            .iter()
            .find(|e| e.index == index)
            .map(|e| e.rule)
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Probability that every branch in `branches` executes: the product of
/// branch probabilities, 1 for the empty set. Assumes probabilities were
/// renormalized (see [`PDag::renormalized`]).
pub fn exec_probability(branches: &BTreeSet<(StructureId, BranchIndex)>, pdag: &PDag) -> f64 {
    branches
        .iter()
        .map(|&(sid, bidx)| {
            pdag.structure(sid)
                .and_then(|s| s.branch(bidx))
                .map(|b| b.prob)
                .expect("branch set references existing branches")
        })
        .product()
}

/// Upper bound on the probability that `longer` executes as the longest
/// path while `shorter` does not execute.
///
/// Branches required by `shorter` that conflict with a branch of `longer`
/// cannot execute once `longer` does, so they contribute conditional
/// probability zero to the chance of `shorter` executing alongside.
pub fn co_longest_bound(longer: &PathContext, shorter: &PathContext, pdag: &PDag) -> f64 {
    co_longest_bound_impl(longer, shorter, pdag, true)
}

fn co_longest_bound_impl(
    longer: &PathContext,
    shorter: &PathContext,
    pdag: &PDag,
    conditional: bool,
) -> f64 {
    let exec_longer = exec_probability(&longer.branches, pdag);
    let mut shorter_alongside = 1.0;
    for &(sid, bidx) in shorter.branches.difference(&longer.branches) {
        let conflicts = longer.branch_for(sid).is_some_and(|lb| lb != bidx);
        let f = if conditional && conflicts {
            0.0
        } else {
            pdag.structure(sid)
                .and_then(|s| s.branch(bidx))
                .map(|b| b.prob)
                .expect("branch set references existing branches")
        };
        shorter_alongside *= f;
    }
    exec_longer * (1.0 - shorter_alongside)
}

/// Assigns P(λ_h) to every path of `lambda_star`, in order.
pub fn assign_probabilities(lambda_star: &LambdaStarSet, pdag: &PDag) -> ProbabilityAssignment {
    assign_impl(lambda_star, pdag, true)
}

fn assign_impl(lambda_star: &LambdaStarSet, pdag: &PDag, conditional: bool) -> ProbabilityAssignment {
    let paths = lambda_star.paths();
    let k = paths.len();
    let mut probs = Vec::with_capacity(k);
    let mut cumulative = Vec::with_capacity(k);
    let mut clamp_events = Vec::new();
    let mut sigma = 0.0;
    let mut terminated = false;

    for h in 0..k {
        if terminated {
            probs.push(0.0);
            cumulative.push(sigma);
            continue;
        }
        let headroom = 1.0 - sigma;
        if headroom <= 0.0 {
            clamp_events.push(ClampEvent {
                index: h,
                rule: ClampRule::UpperTermination,
            });
            terminated = true;
            probs.push(0.0);
            cumulative.push(sigma);
            continue;
        }
        // With the tail floored at zero, P_h = headroom - tail rearranges to
        // min(headroom, exec + co_sum - sigma); this form keeps exactly
        // representable probabilities exact.
        let mut p = if h + 1 == k {
            // No shorter paths remain; the last path takes the rest.
            headroom
        } else {
            let exec_h = exec_probability(&paths[h].branches, pdag);
            let co_sum: f64 = (0..h)
                .map(|l| co_longest_bound_impl(&paths[l], &paths[h], pdag, conditional))
                .sum();
            (exec_h + co_sum - sigma).min(headroom)
        };
        if p < 0.0 {
            p = 0.0;
            clamp_events.push(ClampEvent {
                index: h,
                rule: ClampRule::LowerZero,
            });
        }
        sigma += p;
        if sigma > 1.0 {
            p -= sigma - 1.0;
            sigma = 1.0;
        }
        probs.push(p);
        cumulative.push(sigma);
    }

    debug_assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
    debug_assert!(cumulative.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(sigma <= 1.0);
    ProbabilityAssignment {
        probs,
        cumulative,
        clamp_events,
    }
}
