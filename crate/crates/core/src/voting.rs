//! Simple voting consensus and the agreement metrics used to compare
//! aggregation methods.
//!
//! Two tally modes exist because "votes" can mean top choices only or every
//! mention in the ranked lists; all-mentions is the default since top-1
//! counts frequently cannot fill a 3-deep ranking. Ties break
//! lexicographically by label index, matching the Kemeny solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TallyMode {
    Top1Only,
    AllMentions,
}

/// Per-label vote counts for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub counts: Vec<u64>,
    pub mode: TallyMode,
}

/// Per-item agreement between two top-k lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub top1_match: bool,
    pub top3_set_overlap: usize,
    pub top3_exact_rank_match: bool,
}

/// Predicate an [`AgreementReport`] is scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgreementPredicate {
    Top1,
    ExactRank,
    OverlapAtLeast(usize),
}

impl AgreementPredicate {
    pub fn holds(self, r: &AgreementReport) -> bool {
        match self {
            AgreementPredicate::Top1 => r.top1_match,
            AgreementPredicate::ExactRank => r.top3_exact_rank_match,
            AgreementPredicate::OverlapAtLeast(m) => r.top3_set_overlap >= m,
        }
    }
}

pub fn tally(p: &Profile, mode: TallyMode) -> VoteTally {
    let n = p.n_labels();
    let mut counts = vec![0u64; n];
    match mode {
        TallyMode::Top1Only => {
            for &idx in p.top_choice_indices() {
                counts[idx] += 1;
            }
        }
        TallyMode::AllMentions => {
            for dr in p.derived_rankings() {
                for i in 0..n {
                    if (dr.rank_of(i) as usize) <= dr.depth() {
                        counts[i] += 1;
                    }
                }
            }
        }
    }
    VoteTally { counts, mode }
}

/// Labels by descending count, ties lexicographic by label index.
pub fn consensus_ranking(t: &VoteTally, k: usize) -> Result<Vec<usize>> {
    let n = t.counts.len();
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| t.counts[b].cmp(&t.counts[a]).then(a.cmp(&b)));
    idx.truncate(k);
    Ok(idx)
}

pub fn compare_rankings(r1: &[usize], r2: &[usize]) -> Result<AgreementReport> {
    if r1.len() != r2.len() {
        return Err(Error::LengthMismatch {
            left: r1.len(),
            right: r2.len(),
        });
    }
    if r1.is_empty() {
        return Err(Error::EmptyInput("rankings"));
    }
    let overlap = r1.iter().filter(|l| r2.contains(l)).count();
    Ok(AgreementReport {
        top1_match: r1[0] == r2[0],
        top3_set_overlap: overlap,
        top3_exact_rank_match: r1 == r2,
    })
}

/// Fraction of reports satisfying the predicate.
pub fn agreement_rate(reports: &[AgreementReport], predicate: AgreementPredicate) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("agreement reports"));
    }
    let hits = reports.iter().filter(|r| predicate.holds(r)).count();
    Ok(hits as f64 / reports.len() as f64)
}
