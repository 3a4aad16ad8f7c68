//! Classical exact solvers: the subset dynamic program and brute-force
//! oracles over linear orders and over DAGs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{better, Dag, LinearOrder, LocalScoreTable};
use crate::nodeset::NodeSet;
use crate::scalar::Score;

/// Default node cap for [`solve_dp`].
pub const DP_MAX_NODES: usize = 20;
/// Node cap for [`brute_force_orders`].
pub const ORDERS_MAX_NODES: usize = 8;
/// Node cap for [`brute_force_dags`].
pub const DAGS_MAX_NODES: usize = 4;

/// Values indexed by every subset bitmask of `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetTable<S> {
    pub values: Vec<S>,
    pub argmax: Option<Vec<NodeSet>>,
}

impl<S: Score> SubsetTable<S> {
    pub fn get(&self, s: NodeSet) -> S {
        self.values[s.bits() as usize]
    }

    pub fn argmax(&self, s: NodeSet) -> Option<NodeSet> {
        self.argmax.as_ref().map(|a| a[s.bits() as usize])
    }
}

/// `out[S] = max { s_i(J) : J in C_i, J ⊆ S }` for every mask `S`, with the
/// argmax under the crate-wide tie-break.
pub fn best_parents_all_subsets<S: Score>(
    table: &LocalScoreTable<S>,
    node: usize,
) -> SubsetTable<S> {
    let size = 1usize << table.n();
    let row = table.entries(node);
    let mut values = vec![row[0].score; size];
    let mut argmax = vec![NodeSet::EMPTY; size];
    for e in &row[1..] {
        let k = e.parents.bits() as usize;
        if better((e.score, e.parents), (values[k], argmax[k])) {
            values[k] = e.score;
            argmax[k] = e.parents;
        }
    }
    // Increasing integer order visits every S \ {j} before S.
    for mask in 1..size {
        let s = NodeSet::from_bits(mask as u32);
        for j in s.iter() {
            let k = s.without(j).bits() as usize;
            if better((values[k], argmax[k]), (values[mask], argmax[mask])) {
                values[mask] = values[k];
                argmax[mask] = argmax[k];
            }
        }
    }
    SubsetTable {
        values,
        argmax: Some(argmax),
    }
}

/// Values-only variant of [`best_parents_all_subsets`].
fn best_parent_values<S: Score>(table: &LocalScoreTable<S>, node: usize) -> Vec<S> {
    let size = 1usize << table.n();
    let row = table.entries(node);
    let mut values = vec![row[0].score; size];
    for e in &row[1..] {
        let k = e.parents.bits() as usize;
        if e.score > values[k] {
            values[k] = e.score;
        }
    }
    for mask in 1..size {
        let s = NodeSet::from_bits(mask as u32);
        let mut best = values[mask];
        for j in s.iter() {
            let v = values[s.without(j).bits() as usize];
            if v > best {
                best = v;
            }
        }
        values[mask] = best;
    }
    values
}

/// Result of an exact solver: optimal score and one optimal DAG.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<S> {
    pub score: S,
    pub dag: Dag,
}

/// Exact BNSL by dynamic programming over node subsets, `O(2^n n^2)` time.
pub fn solve_dp<S: Score>(table: &LocalScoreTable<S>) -> Result<Solution<S>> {
    solve_dp_capped(table, DP_MAX_NODES)
}

pub fn solve_dp_capped<S: Score>(
    table: &LocalScoreTable<S>,
    max_nodes: usize,
) -> Result<Solution<S>> {
    let n = table.n();
    if n > max_nodes {
        return Err(Error::InstanceTooLarge {
            what: "node count",
            value: n.to_string(),
            cap: max_nodes.to_string(),
        });
    }
    let best: Vec<Vec<S>> = (0..n)
        .into_par_iter()
        .map(|i| best_parent_values(table, i))
        .collect();

    let size = 1usize << n;
    let mut opt = vec![S::zero(); size];
    let mut sink = vec![0u8; size];
    for mask in 1..size {
        let s = NodeSet::from_bits(mask as u32);
        let mut top: Option<(S, usize)> = None;
        for i in s.iter() {
            let rest = s.without(i).bits() as usize;
            let v = opt[rest] + best[i][rest];
            if top.is_none_or(|(b, _)| v > b) {
                top = Some((v, i));
            }
        }
        let (v, i) = top.expect("non-empty mask");
        opt[mask] = v;
        sink[mask] = i as u8;
    }

    // Walk the sinks back; parent sets come from the tie-broken scan.
    let mut parents = vec![NodeSet::EMPTY; n];
    let mut s = NodeSet::full(n);
    while !s.is_empty() {
        let i = sink[s.bits() as usize] as usize;
        s.remove(i);
        parents[i] = table.best_parents_in(i, s).1;
    }
    Ok(Solution {
        score: opt[size - 1],
        dag: Dag::new(parents)?,
    })
}

/// Brute-force oracle output.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteForce<S> {
    pub score: S,
    pub dag: Dag,
    /// Orders or acyclic assignments examined.
    pub candidates: usize,
}

/// Maximizes `sum_i f(L_i, i)` over all `n!` linear orders.
pub fn brute_force_orders<S: Score>(table: &LocalScoreTable<S>) -> Result<BruteForce<S>> {
    let n = table.n();
    if n > ORDERS_MAX_NODES {
        return Err(Error::InstanceTooLarge {
            what: "node count",
            value: n.to_string(),
            cap: ORDERS_MAX_NODES.to_string(),
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(S, Dag)> = None;
    let mut candidates = 0;
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    let mut visit = |perm: &[usize]| {
        candidates += 1;
        let order = LinearOrder::new(perm.to_vec()).expect("permutation");
        let (s, dag) = table.best_dag_for_order(&order);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, dag));
        }
    };
    visit(&perm);
    let mut k = 1;
    while k < n {
        if c[k] < k {
            if k % 2 == 0 {
                perm.swap(0, k);
            } else {
                perm.swap(c[k], k);
            }
            visit(&perm);
            c[k] += 1;
            k = 1;
        } else {
            c[k] = 0;
            k += 1;
        }
    }
    let (score, dag) = best.expect("at least one order");
    Ok(BruteForce {
        score,
        dag,
        candidates,
    })
}

/// Maximizes the total score over every acyclic choice of one potential
/// parent set per node.
pub fn brute_force_dags<S: Score>(table: &LocalScoreTable<S>) -> Result<BruteForce<S>> {
    let n = table.n();
    if n > DAGS_MAX_NODES {
        return Err(Error::InstanceTooLarge {
            what: "node count",
            value: n.to_string(),
            cap: DAGS_MAX_NODES.to_string(),
        });
    }
    let mut pick = vec![0usize; n];
    let mut best: Option<(S, Dag)> = None;
    let mut candidates = 0;
    loop {
        let parents: Vec<NodeSet> = (0..n).map(|i| table.entries(i)[pick[i]].parents).collect();
        let dag = Dag::new(parents)?;
        if dag.is_acyclic() {
            candidates += 1;
            let s: S = (0..n).map(|i| table.entries(i)[pick[i]].score).sum();
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                best = Some((s, dag));
            }
        }
        // Odometer increment.
        let mut i = 0;
        while i < n {
            pick[i] += 1;
            if pick[i] < table.entries(i).len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    let (score, dag) = best.expect("the empty DAG is always feasible");
    Ok(BruteForce {
        score,
        dag,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_table;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set<const N: usize>(items: [usize; N]) -> NodeSet {
        NodeSet::from(items)
    }

    fn full_table(n: usize, seed: u64) -> LocalScoreTable<f64> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                NodeSet::full(n)
                    .without(i)
                    .subsets()
                    .map(|j| (j, rng.gen_range(-10.0..10.0)))
                    .collect()
            })
            .collect();
        LocalScoreTable::new(n, rows).unwrap()
    }

    #[test]
    fn best_parent_table_small() {
        let t = LocalScoreTable::new(
            4,
            vec![
                vec![(NodeSet::EMPTY, 0.0)],
                vec![(NodeSet::EMPTY, 0.0), (set([2]), 3.0), (set([2, 3]), 5.0)],
                vec![(NodeSet::EMPTY, 0.0)],
                vec![(NodeSet::EMPTY, 0.0)],
            ],
        )
        .unwrap();
        let out = best_parents_all_subsets(&t, 1);
        assert_eq!(out.values.len(), 16);
        assert_eq!(out.get(set([2, 3])), 5.0);
        assert_eq!(out.get(set([2])), 3.0);
        assert_eq!(out.get(set([3])), 0.0);
        assert_eq!(out.get(NodeSet::EMPTY), 0.0);
        assert_eq!(out.argmax(set([0, 2])), Some(set([2])));

        let zero = best_parents_all_subsets(&t, 0);
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn best_parent_table_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let t = random_table(8, 12, &mut rng);
            for i in 0..8 {
                let out = best_parents_all_subsets(&t, i);
                for s in NodeSet::full(8).without(i).subsets() {
                    let scan = t.best_parents_in(i, s);
                    assert_eq!(out.get(s), scan.0);
                    assert_eq!(out.argmax(s), Some(scan.1));
                }
            }
        }
    }

    #[test]
    fn dp_single_node() {
        let t = LocalScoreTable::empty_parents(1, 7.0).unwrap();
        let sol = solve_dp(&t).unwrap();
        assert_eq!(sol.score, 7.0);
        assert_eq!(sol.dag, Dag::empty(1));
    }

    #[test]
    fn dp_two_nodes() {
        let t = LocalScoreTable::new(
            2,
            vec![
                vec![(NodeSet::EMPTY, 0.0), (set([1]), 5.0)],
                vec![(NodeSet::EMPTY, 1.0), (set([0]), 5.0)],
            ],
        )
        .unwrap();
        // DAGs: empty = 1, 0->1 = 5, 1->0 = 6.
        let sol = solve_dp(&t).unwrap();
        assert_eq!(sol.score, 6.0);
        assert_eq!(sol.dag.parents(), &[set([1]), NodeSet::EMPTY]);
        assert_eq!(brute_force_orders(&t).unwrap().score, 6.0);
        let bf = brute_force_dags(&t).unwrap();
        assert_eq!(bf.score, 6.0);
        assert_eq!(bf.candidates, 3);
    }

    #[test]
    fn labeled_dag_counts() {
        // Full tables enumerate every labeled DAG: 1, 3, 25, 543.
        for (n, count) in [(1, 1), (2, 3), (3, 25), (4, 543)] {
            assert_eq!(
                brute_force_dags(&full_table(n, n as u64))
                    .unwrap()
                    .candidates,
                count
            );
        }
        assert_eq!(
            brute_force_orders(&full_table(4, 1)).unwrap().candidates,
            24
        );
    }

    #[test]
    fn caps() {
        let t5 = LocalScoreTable::empty_parents(5, 0.0).unwrap();
        assert!(matches!(
            brute_force_dags(&t5),
            Err(Error::InstanceTooLarge { .. })
        ));
        let t9 = LocalScoreTable::empty_parents(9, 0.0).unwrap();
        assert!(matches!(
            brute_force_orders(&t9),
            Err(Error::InstanceTooLarge { .. })
        ));
        assert!(matches!(
            solve_dp_capped(&t9, 8),
            Err(Error::InstanceTooLarge { .. })
        ));
        assert_eq!(
            brute_force_orders(&LocalScoreTable::empty_parents(3, 0.0).unwrap())
                .unwrap()
                .score,
            0.0
        );
    }

    #[test]
    fn dp_matches_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            for _ in 0..25 {
                let t = random_table(n, 12, &mut rng);
                let dp = solve_dp(&t).unwrap();
                assert!((dp.score - brute_force_dags(&t).unwrap().score).abs() < 1e-9);
                assert!((t.total_score(&dp.dag).unwrap() - dp.score).abs() < 1e-9);
            }
        }
        for n in 5..=7 {
            for _ in 0..10 {
                let t = random_table(n, 12, &mut rng);
                let dp = solve_dp(&t).unwrap();
                assert!((dp.score - brute_force_orders(&t).unwrap().score).abs() < 1e-9);
                assert!((t.total_score(&dp.dag).unwrap() - dp.score).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn full_table_dp_matches_all_dags() {
        for seed in 0..5 {
            let t = full_table(4, 100 + seed);
            let dp = solve_dp(&t).unwrap();
            assert!((dp.score - brute_force_dags(&t).unwrap().score).abs() < 1e-9);
        }
    }

    #[test]
    fn opt_is_monotone_for_nonnegative_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let t = random_table(6, 8, &mut rng);
            let shifted = LocalScoreTable::new(
                6,
                (0..6)
                    .map(|i| {
                        t.entries(i)
                            .iter()
                            .map(|e| (e.parents, e.score + 10.0))
                            .collect()
                    })
                    .collect(),
            )
            .unwrap();
            // opt over S equals the DP on the sub-instance induced by S; compare
            // nested prefixes through restricted tables.
            let mut prev = 0.0;
            for k in 1..=6 {
                let sub = LocalScoreTable::new(
                    k,
                    (0..k)
                        .map(|i| {
                            shifted
                                .entries(i)
                                .iter()
                                .filter(|e| e.parents.fits(k))
                                .map(|e| (e.parents, e.score))
                                .collect()
                        })
                        .collect(),
                )
                .unwrap();
                let v = solve_dp(&sub).unwrap().score;
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn f32_tables_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t64 = random_table(5, 10, &mut rng);
        let t32 = LocalScoreTable::<f32>::new(
            5,
            (0..5)
                .map(|i| {
                    t64.entries(i)
                        .iter()
                        .map(|e| (e.parents, e.score as f32))
                        .collect()
                })
                .collect(),
        )
        .unwrap();
        let a = solve_dp(&t32).unwrap().score;
        let b = brute_force_orders(&t32).unwrap().score;
        assert!((a - b).abs() <= 1e-3);
    }
}
