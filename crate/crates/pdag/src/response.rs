//! Worst-case interference per longest path, per-path response bounds, and
//! the assembled response-time distribution.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lambdastar::LambdaStarSet;
use crate::model::{NodeId, PDag};
use crate::paths::PathContext;
use crate::probability::{ClampRule, ProbabilityAssignment};

/// Worst-case workload that can compete with `path` for the cores while it
/// executes as the longest path:
///
/// 1. non-conditional nodes off the path (entries and exits included),
/// 2. nodes of the path's own branches that are off the path,
/// 3. for every structure the path does not traverse, the volume of its
///    largest branch.
pub fn interference(path: &PathContext, pdag: &PDag) -> f64 {
    let on_path: BTreeSet<NodeId> = path.nodes.iter().copied().collect();
    let mut load = 0.0;
    for n in pdag.nodes() {
        if on_path.contains(&n.id) {
            continue;
        }
        match pdag.branch_of(n.id) {
            None => load += n.wcet,
            Some(hit) => {
                if path.branches.contains(&hit) {
                    load += n.wcet;
                }
            }
        }
    }
    for s in pdag.structures() {
        if path.structures.contains(&s.id) {
            continue;
        }
        let worst = s
            .branches
            .iter()
            .map(|b| pdag.branch_volume(b))
            .fold(0.0, f64::max);
        load += worst;
    }
    load
}

/// Response-time bound when `path` is the longest: its length plus the
/// interfering workload spread over `m` cores.
pub fn response_bound(path: &PathContext, pdag: &PDag, m: u32) -> f64 {
    path.len + interference(path, pdag) / m as f64
}

/// One fully-annotated row of the analysis: a path of Λ* with its
/// probability, interference and response bound at a given core count.
#[derive(Debug, Clone)]
pub struct ResponseEntry {
    pub path: PathContext,
    pub probability: f64,
    pub interference: f64,
    pub response_bound: f64,
    pub cores: u32,
    pub clamped: Option<ClampRule>,
}

/// Annotates every path of `lambda_star` for core count `m`.
pub fn response_entries(
    lambda_star: &LambdaStarSet,
    probs: &ProbabilityAssignment,
    pdag: &PDag,
    m: u32,
) -> Vec<ResponseEntry> {
    lambda_star
        .paths()
        .iter()
        .enumerate()
        .map(|(h, path)| {
            let i = interference(path, pdag);
            ResponseEntry {
                path: path.clone(),
                probability: probs.probs()[h],
                interference: i,
                response_bound: path.len + i / m as f64,
                cores: m,
                clamped: probs.clamp_at(h),
            }
        })
        .collect()
}

/// Discrete response-time distribution: (response time, probability mass)
/// points with strictly increasing times and positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct RtDistribution {
    points: Vec<(f64, f64)>,
}

impl RtDistribution {
    /// Builds a distribution from raw masses: zero masses are dropped and
    /// equal response times merged (exact float equality; near-duplicates
    /// stay distinct).
    pub fn from_masses<I>(masses: I) -> RtDistribution
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = masses.into_iter().filter(|&(_, p)| p > 0.0).collect();
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (r, p) in raw {
            match points.last_mut() {
                Some(last) if last.0 == r => last.1 += p,
                _ => points.push((r, p)),
            }
        }
        RtDistribution { points }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|&(_, p)| p).sum()
    }

    /// Probability that the response time is at least `t`.
    pub fn exceedance(&self, t: f64) -> f64 {
        self.points
            .iter()
            .filter(|&&(r, _)| r >= t)
            .map(|&(_, p)| p)
            .sum()
    }

    /// Probability mass at response times up to and including `t`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.points
            .iter()
            .filter(|&&(r, _)| r <= t)
            .map(|&(_, p)| p)
            .sum()
    }

    pub fn min_time(&self) -> Option<f64> {
        self.points.first().map(|&(r, _)| r)
    }

    pub fn max_time(&self) -> Option<f64> {
        self.points.last().map(|&(r, _)| r)
    }

    /// Two-column export: `(response_time, probability_mass)` under a header
    /// carrying the core count, total mass and instance hash.
    pub fn to_records(&self, m: u32, instance: &str) -> String {
        let mut out = format!(
            "# pdag-dist m={} total_mass={} instance={}\n",
            m,
            self.total_mass(),
            instance
        );
        out.push_str("response_time,probability_mass\n");
        for &(r, p) in &self.points {
            out.push_str(&format!("{r},{p}\n"));
        }
        out
    }

    /// Exceedance-curve export: `(response_time, exceedance)` rows, one per
    /// point, for plotting.
    pub fn exceedance_records(&self, m: u32, instance: &str) -> String {
        let mut out = format!(
            "# pdag-exceedance m={} total_mass={} instance={}\n",
            m,
            self.total_mass(),
            instance
        );
        out.push_str("response_time,exceedance\n");
        let mut remaining = self.total_mass();
        for &(r, p) in &self.points {
            out.push_str(&format!("{r},{remaining}\n"));
            remaining -= p;
        }
        out
    }

    /// Parses the `to_records` format back.
    pub fn parse_records(text: &str) -> Result<(RecordsHeader, RtDistribution), RecordsError> {
        let mut lines = text.lines();
        let header = RecordsHeader::parse(lines.next().ok_or(RecordsError::Empty)?)?;
        match lines.next() {
            Some("response_time,probability_mass") => {}
            other => {
                return Err(RecordsError::Malformed(format!(
                    "unexpected column header {other:?}"
                )))
            }
        }
        let mut masses = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let (r, p) = line
                .split_once(',')
                .ok_or_else(|| RecordsError::Malformed(format!("bad row {line:?}")))?;
            masses.push((
                r.parse::<f64>()
                    .map_err(|e| RecordsError::Malformed(e.to_string()))?,
                p.parse::<f64>()
                    .map_err(|e| RecordsError::Malformed(e.to_string()))?,
            ));
        }
        Ok((header, RtDistribution::from_masses(masses)))
    }
}

/// Header line of a distribution export.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordsHeader {
    pub kind: String,
    pub m: u32,
    pub total_mass: f64,
    pub instance: String,
}

impl RecordsHeader {
    fn parse(line: &str) -> Result<RecordsHeader, RecordsError> {
        let body = line
            .strip_prefix("# ")
            .ok_or_else(|| RecordsError::Malformed(format!("bad header {line:?}")))?;
        let mut parts = body.split_whitespace();
        let kind = parts
            .next()
            .ok_or_else(|| RecordsError::Malformed("empty header".into()))?
            .to_string();
        let mut m = None;
        let mut total_mass = None;
        let mut instance = None;
        for part in parts {
            match part.split_once('=') {
                Some(("m", v)) => m = v.parse().ok(),
                Some(("total_mass", v)) => total_mass = v.parse().ok(),
                Some(("instance", v)) => instance = Some(v.to_string()),
                _ => {}
            }
        }
        Ok(RecordsHeader {
            kind,
            m: m.ok_or_else(|| RecordsError::Malformed("missing m".into()))?,
            total_mass: total_mass
                .ok_or_else(|| RecordsError::Malformed("missing total_mass".into()))?,
            instance: instance.ok_or_else(|| RecordsError::Malformed("missing instance".into()))?,
        })
    }
}

#[derive(Debug, Error)]
pub enum RecordsError {
    #[error("empty records document")]
    Empty,
    #[error("malformed records: {0}")]
    Malformed(String),
}

/// The analysis distribution: one point per positive-probability path of Λ*
/// at its response bound, equal bounds merged.
pub fn build_distribution(
    lambda_star: &LambdaStarSet,
    probs: &ProbabilityAssignment,
    pdag: &PDag,
    m: u32,
) -> RtDistribution {
    let masses = lambda_star
        .paths()
        .iter()
        .zip(probs.probs())
        .map(|(path, &p)| (response_bound(path, pdag, m), p));
    RtDistribution::from_masses(masses)
}

/// Probability of meeting `deadline`: the mass at response times up to and
/// including it. Mass never assigned (below-one totals) counts as missing,
/// keeping the result a guaranteed lower bound.
pub fn meet_probability(dist: &RtDistribution, deadline: f64) -> f64 {
    dist.cdf(deadline)
}

/// True when `upper`'s exceedance curve lies pointwise at or above
/// `lower`'s, within `tol`. Step functions only change at their points, so
/// the union of points is a sufficient test grid.
pub fn dominates(upper: &RtDistribution, lower: &RtDistribution, tol: f64) -> bool {
    let grid = upper
        .points()
        .iter()
        .chain(lower.points())
        .map(|&(r, _)| r);
    for t in grid {
        if upper.exceedance(t) + tol < lower.exceedance(t) {
            return false;
        }
    }
    true
}
