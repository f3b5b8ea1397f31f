//! Label spaces, ballots, rankings with a tied tail, and the Kendall-tau
//! distance every aggregation method is measured against.
//!
//! A ballot names a top choice and an ordered top-k list; the remaining
//! labels are treated as one tied group at rank k+1. Kendall-tau between two
//! such rankings charges 1 per strictly reversed pair and 1/2 per pair that
//! is tied in exactly one ranking.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Exact rational used for tournament weights and Kendall-tau distances.
pub type Weight = Ratio<i64>;

/// Ordered, de-duplicated set of alternative names. Defines the index space
/// for all matrices and rankings; lookups are case-folded, canonical casing
/// is whatever the set was built with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen: Vec<String> = Vec::with_capacity(labels.len());
        for l in &labels {
            if l.trim().is_empty() {
                return Err(Error::EmptyLabel(l.clone()));
            }
            let folded = l.to_lowercase();
            if seen.contains(&folded) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
            seen.push(folded);
        }
        if labels.len() < 2 {
            return Err(Error::TooFewLabels(labels.len()));
        }
        Ok(LabelSet { labels })
    }

    /// The six-emotion default label space.
    pub fn six_emotions() -> Self {
        LabelSet::new(["Angry", "Happy", "Sad", "Scared", "Surprised", "Worried"])
            .expect("static labels are valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    /// Case-folded lookup of a label's index.
    pub fn index(&self, label: &str) -> Option<usize> {
        let folded = label.to_lowercase();
        self.labels.iter().position(|l| l.to_lowercase() == folded)
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

/// One evaluator's response for one item: a top choice plus an ordered
/// top-k list of distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ballot {
    pub evaluator_id: String,
    pub item_id: String,
    pub top_choice: String,
    pub ranked: Vec<String>,
}

/// Rank assignment over a full label set: ranks 1..k are each held by one
/// label, all remaining labels share rank k+1 (the tied tail).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TiedRanking {
    /// 1-based rank per label index.
    ranks: Vec<u32>,
    /// Number of strictly ranked labels.
    depth: usize,
}

impl TiedRanking {
    pub fn rank_of(&self, label_idx: usize) -> u32 {
        self.ranks[label_idx]
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Label indices sharing the worst tied rank; empty for a strict
    /// full permutation.
    pub fn tail(&self) -> Vec<usize> {
        let tail_rank = self.depth as u32 + 1;
        (0..self.ranks.len())
            .filter(|&i| self.ranks[i] == tail_rank)
            .collect()
    }
}

/// Strict permutation of all labels, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    order: Vec<usize>,
}

impl Ranking {
    pub fn new(order: Vec<usize>, ls: &LabelSet) -> Result<Self> {
        if order.len() != ls.len() {
            return Err(Error::LabelSetMismatch {
                left: order.len(),
                right: ls.len(),
            });
        }
        let mut seen = vec![false; ls.len()];
        for &i in &order {
            if i >= ls.len() || seen[i] {
                return Err(Error::UnknownLabel(format!("index {i}")));
            }
            seen[i] = true;
        }
        Ok(Ranking { order })
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S], ls: &LabelSet) -> Result<Self> {
        let mut order = Vec::with_capacity(labels.len());
        for l in labels {
            order.push(ls.require(l.as_ref())?);
        }
        Ranking::new(order, ls)
    }

    /// Caller guarantees `order` is a permutation of 0..n.
    pub(crate) fn from_order_unchecked(order: Vec<usize>) -> Self {
        debug_assert!({
            let mut s = order.clone();
            s.sort_unstable();
            s.iter().copied().eq(0..order.len())
        });
        Ranking { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn label_names<'a>(&self, ls: &'a LabelSet) -> Vec<&'a str> {
        self.order.iter().map(|&i| ls.label(i)).collect()
    }

    /// View as a tie-free TiedRanking.
    pub fn to_tied(&self) -> TiedRanking {
        let n = self.order.len();
        let mut ranks = vec![0u32; n];
        for (pos, &label) in self.order.iter().enumerate() {
            ranks[label] = pos as u32 + 1;
        }
        TiedRanking { ranks, depth: n }
    }
}

/// The multiset of one item's ballots, with each ballot's derived ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub item_id: String,
    pub ballots: Vec<Ballot>,
    derived: Vec<TiedRanking>,
    top_choice_idx: Vec<usize>,
    n_labels: usize,
}

impl Profile {
    pub fn new(item_id: impl Into<String>, ballots: Vec<Ballot>, ls: &LabelSet) -> Result<Self> {
        let item_id = item_id.into();
        if ballots.is_empty() {
            return Err(Error::EmptyProfile(item_id));
        }
        let mut derived = Vec::with_capacity(ballots.len());
        let mut top_choice_idx = Vec::with_capacity(ballots.len());
        for b in &ballots {
            if b.item_id != item_id {
                return Err(Error::ItemIdMismatch {
                    expected: item_id,
                    got: b.item_id.clone(),
                });
            }
            derived.push(ballot_to_tied_ranking(b, ls)?);
            top_choice_idx.push(ls.require(&b.top_choice)?);
        }
        Ok(Profile {
            item_id,
            ballots,
            derived,
            top_choice_idx,
            n_labels: ls.len(),
        })
    }

    pub fn derived_rankings(&self) -> &[TiedRanking] {
        &self.derived
    }

    /// Label index of each ballot's top choice, in ballot order.
    pub fn top_choice_indices(&self) -> &[usize] {
        &self.top_choice_idx
    }

    pub fn num_ballots(&self) -> usize {
        self.ballots.len()
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }
}

/// Expand a top-k ballot to a full ranking: ranked\[i\] gets rank i+1, every
/// unranked label joins the tied tail at rank k+1.
pub fn ballot_to_tied_ranking(b: &Ballot, ls: &LabelSet) -> Result<TiedRanking> {
    let n = ls.len();
    if b.ranked.is_empty() || b.ranked.len() > n {
        return Err(Error::KOutOfRange {
            k: b.ranked.len(),
            n,
        });
    }
    ls.require(&b.top_choice)?;
    let k = b.ranked.len();
    let mut ranks = vec![k as u32 + 1; n];
    let mut placed = vec![false; n];
    for (pos, label) in b.ranked.iter().enumerate() {
        let idx = ls.require(label)?;
        if placed[idx] {
            return Err(Error::DuplicateLabel(label.clone()));
        }
        placed[idx] = true;
        ranks[idx] = pos as u32 + 1;
    }
    Ok(TiedRanking { ranks, depth: k })
}

/// Kendall-tau distance with the 1/2 tie convention: per unordered pair,
/// 1 if strictly oppositely ordered, 1/2 if tied in exactly one ranking,
/// 0 otherwise.
pub fn kendall_tau(r1: &TiedRanking, r2: &TiedRanking) -> Result<Weight> {
    if r1.len() != r2.len() {
        return Err(Error::LabelSetMismatch {
            left: r1.len(),
            right: r2.len(),
        });
    }
    let n = r1.len();
    let mut halves: i64 = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            let c1 = r1.ranks[a].cmp(&r1.ranks[b]);
            let c2 = r2.ranks[a].cmp(&r2.ranks[b]);
            match (c1, c2) {
                (Ordering::Less, Ordering::Greater) | (Ordering::Greater, Ordering::Less) => {
                    halves += 2
                }
                (Ordering::Equal, Ordering::Equal) => {}
                (Ordering::Equal, _) | (_, Ordering::Equal) => halves += 1,
                _ => {}
            }
        }
    }
    Ok(Weight::new(halves, 2))
}

/// Sum of Kendall-tau distances from a strict ranking to every derived
/// ranking of a profile.
pub fn total_kt_cost(r: &Ranking, p: &Profile) -> Result<Weight> {
    let tied = r.to_tied();
    let mut total = Weight::new(0, 1);
    for dr in &p.derived {
        total += kendall_tau(&tied, dr)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six() -> LabelSet {
        LabelSet::six_emotions()
    }

    fn ballot(top: &str, ranked: &[&str]) -> Ballot {
        Ballot {
            evaluator_id: "e1".into(),
            item_id: "t1".into(),
            top_choice: top.into(),
            ranked: ranked.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn label_set_rejects_case_folded_duplicates() {
        assert!(matches!(
            LabelSet::new(["Sad", "sad"]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(LabelSet::new(["Sad"]), Err(Error::TooFewLabels(1))));
        assert!(matches!(
            LabelSet::new(["Sad", " "]),
            Err(Error::EmptyLabel(_))
        ));
    }

    #[test]
    fn index_is_case_folded() {
        let ls = six();
        assert_eq!(ls.index("sad"), Some(2));
        assert_eq!(ls.index("WORRIED"), Some(5));
        assert_eq!(ls.index("Joyful"), None);
    }

    #[test]
    fn tied_ranking_from_three_of_six() {
        let ls = six();
        let b = ballot("Sad", &["Sad", "Worried", "Scared"]);
        let tr = ballot_to_tied_ranking(&b, &ls).unwrap();
        assert_eq!(tr.rank_of(ls.index("Sad").unwrap()), 1);
        assert_eq!(tr.rank_of(ls.index("Worried").unwrap()), 2);
        assert_eq!(tr.rank_of(ls.index("Scared").unwrap()), 3);
        for l in ["Angry", "Happy", "Surprised"] {
            assert_eq!(tr.rank_of(ls.index(l).unwrap()), 4);
        }
        let mut tail = tr.tail();
        tail.sort_unstable();
        assert_eq!(
            tail,
            vec![
                ls.index("Angry").unwrap(),
                ls.index("Happy").unwrap(),
                ls.index("Surprised").unwrap()
            ]
        );
    }

    #[test]
    fn tied_ranking_full_permutation_has_empty_tail() {
        let ls = six();
        let b = ballot(
            "Angry",
            &["Angry", "Happy", "Sad", "Scared", "Surprised", "Worried"],
        );
        let tr = ballot_to_tied_ranking(&b, &ls).unwrap();
        assert!(tr.tail().is_empty());
        for i in 0..6 {
            assert_eq!(tr.rank_of(i), i as u32 + 1);
        }
    }

    #[test]
    fn tied_ranking_single_ranked_over_two() {
        let ls = LabelSet::new(["A", "B"]).unwrap();
        let mut b = ballot("A", &["A"]);
        b.top_choice = "A".into();
        let tr = ballot_to_tied_ranking(&b, &ls).unwrap();
        assert_eq!(tr.rank_of(0), 1);
        assert_eq!(tr.rank_of(1), 2);
        assert_eq!(tr.tail(), vec![1]);
    }

    #[test]
    fn ballot_errors_name_the_label() {
        let ls = six();
        let b = ballot("Sad", &["Sad", "Joyful"]);
        match ballot_to_tied_ranking(&b, &ls) {
            Err(Error::UnknownLabel(l)) => assert_eq!(l, "Joyful"),
            other => panic!("expected UnknownLabel, got {other:?}"),
        }
        let b = ballot("Sad", &["Sad", "Sad"]);
        assert!(matches!(
            ballot_to_tied_ranking(&b, &ls),
            Err(Error::DuplicateLabel(_))
        ));
    }

    fn strict(order: &[usize], n: usize) -> TiedRanking {
        let mut ranks = vec![0u32; n];
        for (pos, &l) in order.iter().enumerate() {
            ranks[l] = pos as u32 + 1;
        }
        TiedRanking {
            ranks,
            depth: n,
        }
    }

    #[test]
    fn kendall_identity_is_zero() {
        let r = strict(&[0, 1, 2], 3);
        assert_eq!(kendall_tau(&r, &r).unwrap(), Weight::new(0, 1));
    }

    #[test]
    fn kendall_full_reversal_is_three() {
        let abc = strict(&[0, 1, 2], 3);
        let cba = strict(&[2, 1, 0], 3);
        assert_eq!(kendall_tau(&abc, &cba).unwrap(), Weight::new(3, 1));
    }

    #[test]
    fn kendall_tie_versus_strict_scores_half() {
        let abc = strict(&[0, 1, 2], 3);
        // a:1, {b,c}:2
        let tied = TiedRanking {
            ranks: vec![1, 2, 2],
            depth: 1,
        };
        assert_eq!(kendall_tau(&abc, &tied).unwrap(), Weight::new(1, 2));
    }

    #[test]
    fn kendall_mismatched_sizes_error() {
        let r3 = strict(&[0, 1, 2], 3);
        let r4 = strict(&[0, 1, 2, 3], 4);
        assert!(kendall_tau(&r3, &r4).is_err());
    }

    // Pseudometric over all tied rankings reachable from ballots, n <= 4.
    #[test]
    fn kendall_is_a_pseudometric_exhaustively() {
        let ls = LabelSet::new(["a", "b", "c", "d"]).unwrap();
        let mut all = Vec::new();
        let idx = [0usize, 1, 2, 3];
        for k in 1..=4 {
            for perm in permutations(&idx, k) {
                let names: Vec<String> = perm.iter().map(|&i| ls.label(i).to_string()).collect();
                let b = Ballot {
                    evaluator_id: "e".into(),
                    item_id: "t".into(),
                    top_choice: names[0].clone(),
                    ranked: names,
                };
                all.push(ballot_to_tied_ranking(&b, &ls).unwrap());
            }
        }
        for x in &all {
            assert_eq!(kendall_tau(x, x).unwrap(), Weight::new(0, 1));
            for y in &all {
                let dxy = kendall_tau(x, y).unwrap();
                assert_eq!(dxy, kendall_tau(y, x).unwrap());
                for z in &all {
                    let dxz = kendall_tau(x, z).unwrap();
                    let dzy = kendall_tau(z, y).unwrap();
                    assert!(dxy <= dxz + dzy, "triangle inequality violated");
                }
            }
        }
    }

    // For strict full rankings Kendall-tau equals the inversion distance.
    #[test]
    fn kendall_matches_inversion_count_for_strict_rankings() {
        for n in 2..=6usize {
            let idx: Vec<usize> = (0..n).collect();
            let perms = permutations(&idx, n);
            let base = strict(&idx, n);
            for p in &perms {
                let r = strict(p, n);
                let d = kendall_tau(&base, &r).unwrap();
                // inversions of p relative to identity
                let mut inv = 0i64;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if p[i] > p[j] {
                            inv += 1;
                        }
                    }
                }
                assert_eq!(d, Weight::new(inv, 1), "perm {p:?}");
            }
        }
    }

    #[test]
    fn total_cost_of_unanimous_profile_is_zero() {
        let ls = LabelSet::new(["a", "b", "c"]).unwrap();
        let ballots: Vec<Ballot> = (0..3)
            .map(|i| Ballot {
                evaluator_id: format!("e{i}"),
                item_id: "t".into(),
                top_choice: "a".into(),
                ranked: vec!["a".into(), "b".into(), "c".into()],
            })
            .collect();
        let p = Profile::new("t", ballots, &ls).unwrap();
        let r = Ranking::from_labels(&["a", "b", "c"], &ls).unwrap();
        assert_eq!(total_kt_cost(&r, &p).unwrap(), Weight::new(0, 1));
        let rev = Ranking::from_labels(&["c", "b", "a"], &ls).unwrap();
        assert_eq!(total_kt_cost(&rev, &p).unwrap(), Weight::new(9, 1));
    }

    #[test]
    fn empty_profile_is_rejected() {
        let ls = six();
        assert!(matches!(
            Profile::new("t", vec![], &ls),
            Err(Error::EmptyProfile(_))
        ));
    }

}

/// All ordered selections of `k` items from `items`; test helper shared
/// across modules.
#[cfg(test)]
pub(crate) fn permutations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, rest: &[usize], k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for (i, &x) in rest.iter().enumerate() {
            prefix.push(x);
            let mut next: Vec<usize> = rest.to_vec();
            next.remove(i);
            rec(prefix, &next, k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), items, k, &mut out);
    out
}
