//! Exact Kemeny-optimal ranking of a weighted tournament, i.e. the minimum
//! feedback arc set ordering, by full enumeration and by branch-and-bound.
//!
//! Both solvers share the tie-break: among co-optimal rankings, the
//! lexicographically smallest permutation by label index. Search places
//! labels position by position in increasing index order and only replaces
//! the incumbent on strict improvement, so the first optimum reached is the
//! lexicographic one.

use crate::error::{Error, Result};
use crate::model::{Ranking, Weight};
use crate::tournament::{feedback_cost, WeightedTournament};

/// Largest n accepted by [`kemeny_brute_force`]; 10! is 3.6M permutations.
pub const BRUTE_FORCE_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KemenySolution {
    pub ranking: Ranking,
    pub cost: Weight,
    pub optimal: bool,
    pub nodes_explored: u64,
}

struct Search<'a> {
    t: &'a WeightedTournament,
    use_bound: bool,
    best_cost: Weight,
    best_order: Vec<usize>,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn run(t: &'a WeightedTournament, use_bound: bool) -> (Vec<usize>, Weight, u64) {
        let n = t.n();
        let mut s = Search {
            t,
            use_bound,
            best_cost: Weight::new(i64::MAX, 1),
            best_order: Vec::new(),
            nodes: 0,
        };
        let mut prefix = Vec::with_capacity(n);
        let mut used = vec![false; n];
        s.descend(&mut prefix, &mut used, Weight::new(0, 1));
        (s.best_order, s.best_cost, s.nodes)
    }

    /// Weight of edges from still-unplaced labels into `next`, i.e. the cost
    /// committed by appending `next` to the prefix.
    fn placement_cost(&self, next: usize, used: &[bool]) -> Weight {
        let mut c = Weight::new(0, 1);
        for y in 0..self.t.n() {
            if !used[y] && y != next {
                c += self.t.weight(y, next);
            }
        }
        c
    }

    /// Cost every completion of the prefix must still pay: each unplaced
    /// pair contributes at least min(w[a][b], w[b][a]).
    fn remaining_bound(&self, used: &[bool]) -> Weight {
        let n = self.t.n();
        let mut c = Weight::new(0, 1);
        for a in 0..n {
            if used[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !used[b] {
                    c += self.t.weight(a, b).min(self.t.weight(b, a));
                }
            }
        }
        c
    }

    fn descend(&mut self, prefix: &mut Vec<usize>, used: &mut [bool], acc: Weight) {
        self.nodes += 1;
        let n = self.t.n();
        if prefix.len() == n {
            if acc < self.best_cost {
                self.best_cost = acc;
                self.best_order = prefix.clone();
            }
            return;
        }
        for next in 0..n {
            if used[next] {
                continue;
            }
            let acc2 = acc + self.placement_cost(next, used);
            used[next] = true;
            if self.use_bound {
                let bound = acc2 + self.remaining_bound(used);
                if bound >= self.best_cost {
                    used[next] = false;
                    continue;
                }
            }
            prefix.push(next);
            self.descend(prefix, used, acc2);
            prefix.pop();
            used[next] = false;
        }
    }
}

fn finish(t: &WeightedTournament, order: Vec<usize>, cost: Weight, nodes: u64) -> KemenySolution {
    let ranking = Ranking::from_order_unchecked(order);
    debug_assert_eq!(feedback_cost(t, &ranking).unwrap(), cost);
    KemenySolution {
        ranking,
        cost,
        optimal: true,
        nodes_explored: nodes,
    }
}

/// Global minimum by enumerating all n! permutations. Guarded at n = 10.
pub fn kemeny_brute_force(t: &WeightedTournament) -> Result<KemenySolution> {
    if t.n() > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            n: t.n(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let (order, cost, nodes) = Search::run(t, false);
    Ok(finish(t, order, cost, nodes))
}

/// Same optimum and tie-break as brute force; prunes prefixes whose lower
/// bound reaches the incumbent.
pub fn kemeny_branch_bound(t: &WeightedTournament) -> Result<KemenySolution> {
    let (order, cost, nodes) = Search::run(t, true);
    Ok(finish(t, order, cost, nodes))
}

/// First k labels of the optimal ranking.
pub fn kemeny_top_k(t: &WeightedTournament, k: usize) -> Result<Vec<usize>> {
    if k < 1 || k > t.n() {
        return Err(Error::KOutOfRange { k, n: t.n() });
    }
    let sol = kemeny_branch_bound(t)?;
    Ok(sol.ranking.order()[..k].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::permutations;
    use crate::model::{Ballot, LabelSet, Profile};
    use crate::tournament::{build_tournament, build_tournament_with_tie_weight};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn w(x: i64) -> Weight {
        Weight::new(x, 1)
    }

    fn random_tournament(rng: &mut impl Rng, n: usize) -> WeightedTournament {
        let z = Weight::new(0, 1);
        let mut m = vec![vec![z; n]; n];
        for a in 0..n {
            for b in (a + 1)..n {
                // integer-or-half weights in [0, 20]
                m[a][b] = Weight::new(rng.gen_range(0..=40), 2);
                m[b][a] = Weight::new(rng.gen_range(0..=40), 2);
            }
        }
        WeightedTournament::from_weights(m).unwrap()
    }

    #[test]
    fn unanimous_tournament_recovers_order() {
        let z = Weight::new(0, 1);
        let t = WeightedTournament::from_weights(vec![
            vec![z, w(3), w(3)],
            vec![z, z, w(3)],
            vec![z, z, z],
        ])
        .unwrap();
        let sol = kemeny_brute_force(&t).unwrap();
        assert_eq!(sol.ranking.order(), &[0, 1, 2]);
        assert_eq!(sol.cost, z);
        assert!(sol.optimal);
    }

    #[test]
    fn fixed_three_label_optimum_is_cab() {
        let z = Weight::new(0, 1);
        let t = WeightedTournament::from_weights(vec![
            vec![z, w(5), w(1)],
            vec![w(2), z, w(4)],
            vec![w(6), w(3), z],
        ])
        .unwrap();
        for sol in [
            kemeny_brute_force(&t).unwrap(),
            kemeny_branch_bound(&t).unwrap(),
        ] {
            assert_eq!(sol.ranking.order(), &[2, 0, 1]);
            assert_eq!(sol.cost, w(7));
        }
    }

    #[test]
    fn all_tied_tournament_breaks_ties_lexicographically() {
        let z = Weight::new(0, 1);
        let h = Weight::new(1, 2);
        let mut m = vec![vec![h; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = z;
        }
        let t = WeightedTournament::from_weights(m).unwrap();
        let sol = kemeny_brute_force(&t).unwrap();
        assert_eq!(sol.ranking.order(), &[0, 1, 2, 3]);
        assert_eq!(sol.cost, Weight::new(6, 2));
        let bb = kemeny_branch_bound(&t).unwrap();
        assert_eq!(bb.ranking, sol.ranking);
    }

    #[test]
    fn two_label_tournament() {
        let z = Weight::new(0, 1);
        let t =
            WeightedTournament::from_weights(vec![vec![z, w(3)], vec![w(1), z]]).unwrap();
        let sol = kemeny_branch_bound(&t).unwrap();
        assert_eq!(sol.ranking.order(), &[0, 1]);
        assert_eq!(sol.cost, w(1));
    }

    #[test]
    fn zero_tournament_is_lexicographic_at_zero_cost() {
        let z = Weight::new(0, 1);
        let t = WeightedTournament::from_weights(vec![vec![z; 5]; 5]).unwrap();
        let sol = kemeny_branch_bound(&t).unwrap();
        assert_eq!(sol.ranking.order(), &[0, 1, 2, 3, 4]);
        assert_eq!(sol.cost, z);
    }

    #[test]
    fn brute_force_guard() {
        let z = Weight::new(0, 1);
        let t = WeightedTournament::from_weights(vec![vec![z; 11]; 11]).unwrap();
        assert!(matches!(
            kemeny_brute_force(&t),
            Err(Error::SizeLimit { n: 11, .. })
        ));
    }

    #[test]
    fn branch_bound_matches_brute_force_on_random_tournaments() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for round in 0..60 {
            let n = 4 + round % 3;
            let t = random_tournament(&mut rng, n);
            let bf = kemeny_brute_force(&t).unwrap();
            let bb = kemeny_branch_bound(&t).unwrap();
            assert_eq!(bf.cost, bb.cost);
            assert_eq!(bf.ranking, bb.ranking);
            assert!(bb.nodes_explored <= bf.nodes_explored);
        }
    }

    #[test]
    fn no_adjacent_transposition_improves_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let n = rng.gen_range(3..=6);
            let t = random_tournament(&mut rng, n);
            let sol = kemeny_branch_bound(&t).unwrap();
            let order = sol.ranking.order().to_vec();
            for i in 0..n - 1 {
                let mut swapped = order.clone();
                swapped.swap(i, i + 1);
                let names: Vec<String> = (0..n).map(|i| format!("l{i}")).collect();
                let ls = LabelSet::new(names).unwrap();
                let r = Ranking::new(swapped, &ls).unwrap();
                assert!(feedback_cost(&t, &r).unwrap() >= sol.cost);
            }
        }
    }

    #[test]
    fn argmin_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.gen_range(3..=5);
            let t = random_tournament(&mut rng, n);
            let scaled = WeightedTournament::from_weights(
                t.weights()
                    .iter()
                    .map(|row| row.iter().map(|&x| x * Weight::new(7, 1)).collect())
                    .collect(),
            )
            .unwrap();
            assert_eq!(
                kemeny_branch_bound(&t).unwrap().ranking,
                kemeny_branch_bound(&scaled).unwrap().ranking
            );
        }
    }

    #[test]
    fn tie_convention_shifts_costs_by_a_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..15 {
            let n = rng.gen_range(2..=5);
            let names: Vec<String> = (0..n).map(|i| format!("l{i}")).collect();
            let ls = LabelSet::new(names.clone()).unwrap();
            let v = rng.gen_range(1..=10);
            let ballots: Vec<Ballot> = (0..v)
                .map(|e| {
                    let k = rng.gen_range(1..=n);
                    let mut idx: Vec<usize> = (0..n).collect();
                    idx.shuffle(&mut rng);
                    Ballot {
                        evaluator_id: format!("e{e}"),
                        item_id: "t".into(),
                        top_choice: names[idx[0]].clone(),
                        ranked: idx[..k].iter().map(|&i| names[i].clone()).collect(),
                    }
                })
                .collect();
            let p = Profile::new("t", ballots, &ls).unwrap();
            let half = build_tournament(&p);
            let zero = build_tournament_with_tie_weight(&p, Weight::new(0, 1));
            let idx: Vec<usize> = (0..n).collect();
            let perms = permutations(&idx, n);
            let mut shift: Option<Weight> = None;
            for perm in perms {
                let r = Ranking::new(perm, &ls).unwrap();
                let d = feedback_cost(&half, &r).unwrap() - feedback_cost(&zero, &r).unwrap();
                match shift {
                    None => shift = Some(d),
                    Some(s) => assert_eq!(s, d),
                }
            }
            assert_eq!(
                kemeny_branch_bound(&half).unwrap().ranking,
                kemeny_branch_bound(&zero).unwrap().ranking
            );
        }
    }

    #[test]
    fn top_k_is_a_prefix_of_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tournament(&mut rng, 6);
        let full = kemeny_brute_force(&t).unwrap();
        let top3 = kemeny_top_k(&t, 3).unwrap();
        assert_eq!(top3, full.ranking.order()[..3]);
        assert_eq!(kemeny_top_k(&t, 6).unwrap(), full.ranking.order());
        assert!(matches!(
            kemeny_top_k(&t, 0),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(matches!(
            kemeny_top_k(&t, 7),
            Err(Error::KOutOfRange { .. })
        ));
    }
}
