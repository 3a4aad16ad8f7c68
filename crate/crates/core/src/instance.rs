//! Problem instances: local-score tables, DAGs, linear orders and the
//! decomposable objective.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::nodeset::{NodeSet, MAX_NODES};
use crate::scalar::Score;

/// One potential parent set with its local score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry<S> {
    pub parents: NodeSet,
    pub score: S,
}

/// Local scores `s_i(J)` for every node `i` and every potential parent set
/// `J` in the collection `C_i`.
///
/// Entries of each node are kept sorted by [`NodeSet::canonical_cmp`], so the
/// first entry is always the empty set.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalScoreTable<S> {
    n: usize,
    entries: Vec<Vec<Entry<S>>>,
}

impl<S: Score> LocalScoreTable<S> {
    /// Builds a table from per-node `(parent set, score)` lists.
    ///
    /// Every list must contain the empty set, no set may contain its own
    /// node or a node `>= n`, and scores must be finite.
    pub fn new(n: usize, per_node: Vec<Vec<(NodeSet, S)>>) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidNodeCount(n));
        }
        if per_node.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: per_node.len(),
            });
        }
        let mut entries = Vec::with_capacity(n);
        for (node, list) in per_node.into_iter().enumerate() {
            let mut row: Vec<Entry<S>> = list
                .into_iter()
                .map(|(parents, score)| Entry { parents, score })
                .collect();
            for e in &row {
                if !e.parents.fits(n) {
                    return Err(Error::NodeOutOfRange {
                        node,
                        set: e.parents,
                        n,
                    });
                }
                if e.parents.contains(node) {
                    return Err(Error::SelfParent(node));
                }
                if !e.score.is_finite() {
                    return Err(Error::NonFiniteScore {
                        node,
                        set: e.parents,
                    });
                }
            }
            row.sort_by(|a, b| a.parents.canonical_cmp(&b.parents));
            if let Some(w) = row.windows(2).find(|w| w[0].parents == w[1].parents) {
                return Err(Error::DuplicateParentSet {
                    node,
                    set: w[0].parents,
                });
            }
            if row.first().map(|e| e.parents) != Some(NodeSet::EMPTY) {
                return Err(Error::MissingEmptySet(node));
            }
            entries.push(row);
        }
        Ok(Self { n, entries })
    }

    /// A table where every node only has the empty parent set.
    pub fn empty_parents(n: usize, score: S) -> Result<Self> {
        Self::new(n, vec![vec![(NodeSet::EMPTY, score)]; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of local scores, `F`.
    pub fn total_entries(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    /// The collection `C_i` in canonical order.
    pub fn entries(&self, node: usize) -> &[Entry<S>] {
        &self.entries[node]
    }

    pub fn score(&self, node: usize, parents: NodeSet) -> Option<S> {
        self.entries[node]
            .binary_search_by(|e| e.parents.canonical_cmp(&parents))
            .ok()
            .map(|k| self.entries[node][k].score)
    }

    /// Best potential parent set of `node` contained in `allowed`, by linear
    /// scan. Ties go to the smaller set, then the smaller bitmask.
    pub fn best_parents_in(&self, node: usize, allowed: NodeSet) -> (S, NodeSet) {
        let row = &self.entries[node];
        let mut best = (row[0].score, row[0].parents);
        // Canonical order means the first maximum found is the tie-break winner.
        for e in &row[1..] {
            if e.parents.is_subset_of(allowed) && e.score > best.0 {
                best = (e.score, e.parents);
            }
        }
        best
    }

    /// The objective `s(A) = sum_i s_i(A_i)`.
    pub fn total_score(&self, dag: &Dag) -> Result<S> {
        if dag.n() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: dag.n(),
            });
        }
        if !dag.is_acyclic() {
            return Err(Error::CyclicGraph);
        }
        let mut total = S::zero();
        for (node, &set) in dag.parents().iter().enumerate() {
            total = total
                + self
                    .score(node, set)
                    .ok_or(Error::MissingParentSet { node, set })?;
        }
        Ok(total)
    }

    /// `sum_i f(L_i, i)` for a linear order `L`.
    pub fn order_score(&self, order: &LinearOrder) -> S {
        (0..self.n)
            .map(|i| self.best_parents_in(i, order.predecessors(i)).0)
            .sum()
    }

    /// The best DAG consistent with `order`.
    pub fn best_dag_for_order(&self, order: &LinearOrder) -> (S, Dag) {
        let mut parents = Vec::with_capacity(self.n);
        let mut total = S::zero();
        for i in 0..self.n {
            let (s, j) = self.best_parents_in(i, order.predecessors(i));
            total = total + s;
            parents.push(j);
        }
        (total, Dag { parents })
    }

    /// Applies `keep` to every entry; the empty set is always kept.
    pub(crate) fn filtered(&self, mut keep: impl FnMut(usize, &Entry<S>) -> bool) -> Self {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .filter(|e| e.parents.is_empty() || keep(i, e))
                    .copied()
                    .collect()
            })
            .collect();
        Self { n: self.n, entries }
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let order = LinearOrder::new(perm.to_vec())?;
        if order.n() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: perm.len(),
            });
        }
        let mut per_node = vec![Vec::new(); self.n];
        for (i, row) in self.entries.iter().enumerate() {
            per_node[perm[i]] = row
                .iter()
                .map(|e| (e.parents.iter().map(|j| perm[j]).collect(), e.score))
                .collect();
        }
        Self::new(self.n, per_node)
    }
}

/// A directed graph given by the parent set of every node.
///
/// Construction only checks ranges and self loops; acyclicity is a property
/// checked by [`Dag::is_acyclic`] and enforced by the operations that need it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dag {
    parents: Vec<NodeSet>,
}

impl Dag {
    pub fn new(parents: Vec<NodeSet>) -> Result<Self> {
        let n = parents.len();
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidNodeCount(n));
        }
        for (node, &set) in parents.iter().enumerate() {
            if !set.fits(n) {
                return Err(Error::NodeOutOfRange { node, set, n });
            }
            if set.contains(node) {
                return Err(Error::SelfParent(node));
            }
        }
        Ok(Self { parents })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            parents: vec![NodeSet::EMPTY; n],
        }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self) -> &[NodeSet] {
        &self.parents
    }

    pub fn parents_of(&self, node: usize) -> NodeSet {
        self.parents[node]
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(|p| p.len()).sum()
    }

    /// Arcs as `(parent, child)` pairs.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(child, p)| p.iter().map(move |j| (j, child)))
    }

    /// Kahn-style peeling, always removing the smallest available node.
    fn peel(&self) -> Vec<usize> {
        let n = self.n();
        let mut done = NodeSet::EMPTY;
        let mut perm = Vec::with_capacity(n);
        'outer: while perm.len() < n {
            for i in 0..n {
                if !done.contains(i) && self.parents[i].is_subset_of(done) {
                    done.insert(i);
                    perm.push(i);
                    continue 'outer;
                }
            }
            break;
        }
        perm
    }

    pub fn is_acyclic(&self) -> bool {
        self.peel().len() == self.n()
    }

    /// A topological order, choosing the smallest index among available nodes.
    pub fn topological_order(&self) -> Result<LinearOrder> {
        let perm = self.peel();
        if perm.len() != self.n() {
            return Err(Error::CyclicGraph);
        }
        LinearOrder::new(perm)
    }
}

/// A linear order on `0..n`; `perm[t]` is the node at position `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearOrder {
    perm: Vec<usize>,
    position: Vec<usize>,
}

impl LinearOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut position = vec![usize::MAX; n];
        for (t, &i) in perm.iter().enumerate() {
            if i >= n || position[i] != usize::MAX {
                return Err(Error::InvalidOrder(n));
            }
            position[i] = t;
        }
        Ok(Self { perm, position })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            position: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn position(&self, node: usize) -> usize {
        self.position[node]
    }

    /// `L_i`: every node placed before `node`.
    pub fn predecessors(&self, node: usize) -> NodeSet {
        self.perm[..self.position[node]].iter().copied().collect()
    }

    /// `true` if `j` precedes `i`.
    pub fn precedes(&self, j: usize, i: usize) -> bool {
        self.position[j] < self.position[i]
    }

    /// `true` if every arc of `dag` goes forward in this order.
    pub fn extends(&self, dag: &Dag) -> bool {
        dag.arcs().all(|(j, i)| self.precedes(j, i))
    }
}

/// Compares `(score, set)` candidates: higher score wins, then the
/// canonically smaller set.
#[inline]
pub(crate) fn better<S: Score>(a: (S, NodeSet), b: (S, NodeSet)) -> bool {
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => a.1.canonical_cmp(&b.1) == Ordering::Less,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set<const N: usize>(items: [usize; N]) -> NodeSet {
        NodeSet::from(items)
    }

    /// Eight-node example DAG on nodes 1..=8, shifted to 0..=7.
    fn eight_node_dag() -> Dag {
        let arcs = [
            (2, 1),
            (3, 1),
            (3, 5),
            (6, 5),
            (7, 5),
            (7, 3),
            (3, 2),
            (4, 2),
            (4, 3),
            (8, 6),
        ];
        let mut parents = vec![NodeSet::EMPTY; 8];
        for (from, to) in arcs {
            parents[to - 1].insert(from - 1);
        }
        Dag::new(parents).unwrap()
    }

    fn chain_table() -> LocalScoreTable<f64> {
        LocalScoreTable::new(
            4,
            vec![
                vec![(NodeSet::EMPTY, 0.0)],
                vec![(NodeSet::EMPTY, 0.0), (set([2]), 3.0), (set([2, 3]), 5.0)],
                vec![(NodeSet::EMPTY, 0.0)],
                vec![(NodeSet::EMPTY, 0.0)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn total_score_sums_local_scores() {
        let table = LocalScoreTable::new(
            2,
            vec![
                vec![(NodeSet::EMPTY, 0.0), (set([1]), 5.0)],
                vec![(NodeSet::EMPTY, 1.0)],
            ],
        )
        .unwrap();
        let dag = Dag::new(vec![set([1]), NodeSet::EMPTY]).unwrap();
        assert_eq!(table.total_score(&dag).unwrap(), 6.0);

        let zero = LocalScoreTable::empty_parents(3, 0.0).unwrap();
        assert_eq!(zero.total_score(&Dag::empty(3)).unwrap(), 0.0);
    }

    #[test]
    fn eight_node_node_six() {
        let dag = eight_node_dag();
        assert_eq!(dag.arc_count(), 10);
        assert_eq!(dag.parents_of(5), set([7]));
        let per_node = dag
            .parents()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let mut row = vec![(NodeSet::EMPTY, 0.0)];
                if !p.is_empty() {
                    row.push((p, if i == 5 { 1.0 } else { 0.0 }));
                }
                row
            })
            .collect();
        let table = LocalScoreTable::new(8, per_node).unwrap();
        assert_eq!(table.total_score(&dag).unwrap(), 1.0);
    }

    #[test]
    fn total_score_errors() {
        let table = LocalScoreTable::empty_parents(2, 0.0).unwrap();
        let arc = Dag::new(vec![set([1]), NodeSet::EMPTY]).unwrap();
        assert_eq!(
            table.total_score(&arc),
            Err(Error::MissingParentSet {
                node: 0,
                set: set([1])
            })
        );
        let cycle = Dag::new(vec![set([1]), set([0])]).unwrap();
        assert_eq!(table.total_score(&cycle), Err(Error::CyclicGraph));
    }

    #[test]
    fn acyclicity() {
        assert!(Dag::new(vec![NodeSet::EMPTY, set([0])])
            .unwrap()
            .is_acyclic());
        assert!(!Dag::new(vec![set([1]), set([0])]).unwrap().is_acyclic());
        assert!(eight_node_dag().is_acyclic());
        assert_eq!(Dag::new(vec![set([0])]), Err(Error::SelfParent(0)));
    }

    #[test]
    fn topological_orders() {
        let chain = Dag::new(vec![NodeSet::EMPTY, set([0]), set([1])]).unwrap();
        assert_eq!(chain.topological_order().unwrap().perm(), &[0, 1, 2]);
        assert_eq!(
            Dag::empty(3).topological_order().unwrap().perm(),
            &[0, 1, 2]
        );

        let dag = eight_node_dag();
        let order = dag.topological_order().unwrap();
        for i in 0..8 {
            assert!(dag.parents_of(i).is_subset_of(order.predecessors(i)));
        }
        let cycle = Dag::new(vec![set([1]), set([0])]).unwrap();
        assert_eq!(cycle.topological_order(), Err(Error::CyclicGraph));
    }

    #[test]
    fn eight_node_linear_order() {
        // L = 4,7,8,6,3,2,1,5 in one-based labels.
        let order = LinearOrder::new(vec![3, 6, 7, 5, 2, 1, 0, 4]).unwrap();
        assert_eq!(order.predecessors(5), set([3, 6, 7]));
        assert!(order.extends(&eight_node_dag()));
    }

    #[test]
    fn best_parents_scan() {
        let t = chain_table();
        assert_eq!(t.best_parents_in(1, set([2])), (3.0, set([2])));
        assert_eq!(t.best_parents_in(1, NodeSet::EMPTY), (0.0, NodeSet::EMPTY));
        assert_eq!(t.best_parents_in(1, set([2, 3])), (5.0, set([2, 3])));
    }

    #[test]
    fn best_parents_ties_prefer_smaller_sets() {
        let t = LocalScoreTable::new(
            3,
            vec![
                vec![
                    (set([1, 2]), 1.0),
                    (set([2]), 1.0),
                    (set([1]), 1.0),
                    (NodeSet::EMPTY, 0.0),
                ],
                vec![(NodeSet::EMPTY, 0.0)],
                vec![(NodeSet::EMPTY, 0.0)],
            ],
        )
        .unwrap();
        assert_eq!(t.best_parents_in(0, set([1, 2])), (1.0, set([1])));
        assert_eq!(t.best_parents_in(0, set([2])), (1.0, set([2])));
    }

    #[test]
    fn table_validation() {
        let e = NodeSet::EMPTY;
        assert_eq!(
            LocalScoreTable::new(1, vec![vec![(set([1]), 0.0), (e, 0.0)]]),
            Err(Error::NodeOutOfRange {
                node: 0,
                set: set([1]),
                n: 1
            })
        );
        assert_eq!(
            LocalScoreTable::new(2, vec![vec![(set([0]), 0.0)], vec![(e, 0.0)]]),
            Err(Error::SelfParent(0))
        );
        assert_eq!(
            LocalScoreTable::new(2, vec![vec![(set([1]), 0.0)], vec![(e, 0.0)]]),
            Err(Error::MissingEmptySet(0))
        );
        assert_eq!(
            LocalScoreTable::new(1, vec![vec![(e, 0.0), (e, 1.0)]]),
            Err(Error::DuplicateParentSet { node: 0, set: e })
        );
        assert!(matches!(
            LocalScoreTable::new(1, vec![vec![(e, f64::NEG_INFINITY)]]),
            Err(Error::NonFiniteScore { .. })
        ));
        assert_eq!(
            LocalScoreTable::<f64>::new(31, vec![]),
            Err(Error::InvalidNodeCount(31))
        );
        assert_eq!(chain_table().total_entries(), 6);
    }

    fn arb_table(n: usize) -> impl Strategy<Value = LocalScoreTable<f64>> {
        let row = |i: usize| {
            prop::collection::vec((0u32..1 << n, -10.0..10.0f64), 0..8).prop_map(move |v| {
                let mut row: Vec<(NodeSet, f64)> = vec![(NodeSet::EMPTY, 0.0)];
                for (bits, s) in v {
                    let j = NodeSet::from_bits(bits).without(i);
                    if row.iter().all(|(p, _)| *p != j) {
                        row.push((j, s));
                    }
                }
                row
            })
        };
        (0..n)
            .map(row)
            .collect::<Vec<_>>()
            .prop_map(move |rows| LocalScoreTable::new(n, rows).unwrap())
    }

    proptest! {
        #[test]
        fn best_parents_is_monotone(t in arb_table(5), a in 0u32..32, b in 0u32..32) {
            for i in 0..5 {
                let small = NodeSet::from_bits(a & b).without(i);
                let large = NodeSet::from_bits(a).without(i);
                prop_assert!(t.best_parents_in(i, small).0 <= t.best_parents_in(i, large).0);
            }
        }

        #[test]
        fn order_relaxation_dominates_consistent_dags(t in arb_table(4), picks in prop::collection::vec(0usize..8, 4)) {
            let parents: Vec<NodeSet> = (0..4).map(|i| {
                let row = t.entries(i);
                row[picks[i] % row.len()].parents
            }).collect();
            let dag = Dag::new(parents).unwrap();
            if dag.is_acyclic() {
                let order = dag.topological_order().unwrap();
                for i in 0..4 {
                    prop_assert!(dag.parents_of(i).is_subset_of(order.predecessors(i)));
                }
                prop_assert!(t.order_score(&order) >= t.total_score(&dag).unwrap());
            }
        }

        #[test]
        fn total_score_is_relabeling_invariant(t in arb_table(4), picks in prop::collection::vec(0usize..8, 4), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
            let parents: Vec<NodeSet> = (0..4).map(|i| {
                let row = t.entries(i);
                row[picks[i] % row.len()].parents
            }).collect();
            let dag = Dag::new(parents).unwrap();
            if let Ok(s) = t.total_score(&dag) {
                let mut moved = vec![NodeSet::EMPTY; 4];
                for i in 0..4 {
                    moved[perm[i]] = dag.parents_of(i).iter().map(|j| perm[j]).collect();
                }
                let relabeled = t.relabeled(&perm).unwrap();
                let s2 = relabeled.total_score(&Dag::new(moved).unwrap()).unwrap();
                prop_assert!((s - s2).abs() < 1e-9);
            }
        }
    }
}
