//! Weighted tournament built from a profile: w\[a\]\[b\] counts evaluators
//! preferring a over b, with ties split 1/2 each way.

use crate::error::{Error, Result};
use crate::model::{Profile, Ranking, Weight};

/// Pairwise preference weights over a label space. For a profile of V
/// ballots, w\[a\]\[b\] + w\[b\]\[a\] = V for every a != b; the diagonal is
/// zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedTournament {
    n: usize,
    w: Vec<Vec<Weight>>,
}

impl WeightedTournament {
    pub fn from_weights(w: Vec<Vec<Weight>>) -> Result<Self> {
        let n = w.len();
        for (i, row) in w.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LabelSetMismatch {
                    left: row.len(),
                    right: n,
                });
            }
            if row[i] != Weight::new(0, 1) {
                return Err(Error::InvalidConfig {
                    field: "tournament",
                    message: format!("nonzero diagonal at {i}"),
                });
            }
            for &x in row {
                if x < Weight::new(0, 1) {
                    return Err(Error::InvalidConfig {
                        field: "tournament",
                        message: "negative weight".into(),
                    });
                }
            }
        }
        Ok(WeightedTournament { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, a: usize, b: usize) -> Weight {
        self.w[a][b]
    }

    pub fn weights(&self) -> &[Vec<Weight>] {
        &self.w
    }
}

/// Build the tournament of a profile with the standard 1/2 tie split.
pub fn build_tournament(p: &Profile) -> WeightedTournament {
    build_tournament_with_tie_weight(p, Weight::new(1, 2))
}

/// Tie pairs contribute `tie_weight` to both directions. The 1/2 default
/// keeps the feedback-cost identity with `total_kt_cost` exact; 0 shifts
/// every ranking's cost by the same per-profile constant.
pub fn build_tournament_with_tie_weight(p: &Profile, tie_weight: Weight) -> WeightedTournament {
    let n = p.n_labels();
    let zero = Weight::new(0, 1);
    let one = Weight::new(1, 1);
    let mut w = vec![vec![zero; n]; n];
    for r in p.derived_rankings() {
        for a in 0..n {
            for b in (a + 1)..n {
                let ra = r.rank_of(a);
                let rb = r.rank_of(b);
                if ra < rb {
                    w[a][b] += one;
                } else if rb < ra {
                    w[b][a] += one;
                } else {
                    w[a][b] += tie_weight;
                    w[b][a] += tie_weight;
                }
            }
        }
    }
    WeightedTournament { n, w }
}

/// Total weight of edges pointing against the ranking: for every ordered
/// pair (a above b), the weight of b over a.
pub fn feedback_cost(t: &WeightedTournament, r: &Ranking) -> Result<Weight> {
    if r.len() != t.n {
        return Err(Error::LabelSetMismatch {
            left: r.len(),
            right: t.n,
        });
    }
    let order = r.order();
    let mut cost = Weight::new(0, 1);
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            cost += t.w[order[j]][order[i]];
        }
    }
    Ok(cost)
}
