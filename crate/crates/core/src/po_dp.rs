//! Dynamic programming over the downsets of a cover member, and the search
//! over the whole cover.

use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::bucket_cover::{BlockPartition, CoverMember, DownsetIndex};
use crate::error::{Error, Result};
use crate::grover_sim::{max_find, MaxFindMode, MaxOracle, QueryLedger, SIM_MAX_DOMAIN};
use crate::instance::{better, Dag, LocalScoreTable};
use crate::nodeset::NodeSet;
use crate::scalar::Score;

/// Default cap on downsets per member.
pub const MAX_DOWNSETS: usize = 1 << 22;
/// Default cap on members enumerated by the classical scan.
pub const MAX_SCAN_MEMBERS: usize = 1 << 20;

/// The downset lattice of one member, with lower covers
/// (`S \ {j}` for removable `j`) precomputed.
#[derive(Clone, Debug)]
pub struct DownsetLattice {
    member: CoverMember,
    index: DownsetIndex,
    sets: Vec<NodeSet>,
    /// Downset indices in order of increasing cardinality.
    by_size: Vec<u32>,
    cover_start: Vec<u32>,
    /// `(index of S \ {j}, j)` for every downset `S`.
    covers: Vec<(u32, u8)>,
}

impl DownsetLattice {
    pub fn new(member: &CoverMember, cap: usize) -> Result<Self> {
        let index = DownsetIndex::new(member, cap)?;
        let d = index.len();
        let sets: Vec<NodeSet> = (0..d).map(|i| index.downset(i)).collect::<Result<_>>()?;

        let mut by_size: Vec<u32> = (0..d as u32).collect();
        by_size.sort_by_key(|&i| (sets[i as usize].len(), i));

        let mut cover_start = Vec::with_capacity(d + 1);
        let mut covers = Vec::new();
        for &s in &sets {
            cover_start.push(covers.len() as u32);
            for j in s.iter() {
                if member.is_removable(s, j) {
                    covers.push((index.index_of(s.without(j))? as u32, j as u8));
                }
            }
        }
        cover_start.push(covers.len() as u32);
        Ok(Self {
            member: member.clone(),
            index,
            sets,
            by_size,
            cover_start,
            covers,
        })
    }

    pub fn member(&self) -> &CoverMember {
        &self.member
    }

    pub fn index(&self) -> &DownsetIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn set(&self, idx: usize) -> NodeSet {
        self.sets[idx]
    }

    /// Lower covers of downset `idx`.
    pub fn lower_covers(&self, idx: usize) -> &[(u32, u8)] {
        &self.covers[self.cover_start[idx] as usize..self.cover_start[idx + 1] as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.covers.len()
    }
}

/// `ĥ_i(S) = max { s_i(J) : J in C_i, J ⊆ S }` for every node `i` and
/// every downset `S`, with argmaxes.
#[derive(Clone, Debug)]
pub struct HatScoreTable<S> {
    rows: Vec<Vec<(S, NodeSet)>>,
    /// Lattice edges relaxed while sweeping, summed over nodes.
    pub edges_touched: usize,
}

impl<S: Score> HatScoreTable<S> {
    pub fn get(&self, node: usize, downset_idx: usize) -> (S, NodeSet) {
        self.rows[node][downset_idx]
    }

    pub fn row(&self, node: usize) -> &[(S, NodeSet)] {
        &self.rows[node]
    }
}

/// Computes `ĥ` for every node. Works for arbitrary collections `C_i`:
/// `J ⊆ S` holds for a downset `S` exactly when the downward closure of `J`
/// is inside `S`, so each score is bucketed at its closure and then pushed
/// up the lattice in order of cardinality.
pub fn hat_scores<S: Score>(
    table: &LocalScoreTable<S>,
    lattice: &DownsetLattice,
) -> Result<HatScoreTable<S>> {
    let n = table.n();
    if lattice.member().n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: lattice.member().n(),
        });
    }
    let member = lattice.member();
    let mut rows = Vec::with_capacity(n);
    let mut edges_touched = 0;
    for i in 0..n {
        let row = table.entries(i);
        let mut best = vec![(row[0].score, row[0].parents); lattice.len()];
        for e in &row[1..] {
            let k = lattice
                .index()
                .index_of(member.downward_closure(e.parents))?;
            if better((e.score, e.parents), best[k]) {
                best[k] = (e.score, e.parents);
            }
        }
        for &s in &lattice.by_size {
            let s = s as usize;
            for &(lower, _) in lattice.lower_covers(s) {
                edges_touched += 1;
                let cand = best[lower as usize];
                if better(cand, best[s]) {
                    best[s] = cand;
                }
            }
        }
        rows.push(best);
    }
    Ok(HatScoreTable {
        rows,
        edges_touched,
    })
}

/// Best score over the linear extensions of one member, with a witness.
#[derive(Clone, Debug, PartialEq)]
pub struct MemberSolution<S> {
    pub score: S,
    pub dag: Dag,
}

/// `g(P)`: the best DAG whose topological order can be chosen as a linear
/// extension of `member`.
pub fn g_of_p<S: Score>(
    table: &LocalScoreTable<S>,
    member: &CoverMember,
) -> Result<MemberSolution<S>> {
    let lattice = DownsetLattice::new(member, MAX_DOWNSETS)?;
    solve_on_lattice(table, &lattice)
}

pub fn solve_on_lattice<S: Score>(
    table: &LocalScoreTable<S>,
    lattice: &DownsetLattice,
) -> Result<MemberSolution<S>> {
    let hat = hat_scores(table, lattice)?;
    let d = lattice.len();
    let mut val = vec![S::neg_infinity(); d];
    let mut sink = vec![u8::MAX; d];
    val[lattice.index().index_of(NodeSet::EMPTY)?] = S::zero();
    for &s in &lattice.by_size {
        let s = s as usize;
        for &(lower, i) in lattice.lower_covers(s) {
            let v = val[lower as usize] + hat.get(i as usize, lower as usize).0;
            // Covers are listed by increasing node, so strict > keeps the
            // smallest sink on ties.
            if v > val[s] {
                val[s] = v;
                sink[s] = i;
            }
        }
    }

    let n = table.n();
    let mut parents = vec![NodeSet::EMPTY; n];
    let mut cur = lattice.index().index_of(NodeSet::full(n))?;
    let score = val[cur];
    while !lattice.set(cur).is_empty() {
        let i = sink[cur] as usize;
        let lower = lattice.index().index_of(lattice.set(cur).without(i))?;
        parents[i] = hat.get(i, lower).1;
        cur = lower;
    }
    Ok(MemberSolution {
        score,
        dag: Dag::new(parents)?,
    })
}

/// How the outer maximization over cover members is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverStrategy {
    /// Evaluate every member.
    ClassicalScan,
    /// Statevector simulation of quantum maximum finding.
    GroverSim,
    /// Classical evaluation, quantum queries charged by formula.
    GroverCostModel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverSolution<S> {
    pub score: S,
    pub dag: Dag,
    pub member_index: usize,
    pub ledger: QueryLedger,
}

/// `max_P g(P)` over the cover defined by `partition`.
pub fn solve_cover<S: Score, R: rand::Rng>(
    table: &LocalScoreTable<S>,
    partition: &BlockPartition,
    strategy: CoverStrategy,
    rng: &mut R,
) -> Result<CoverSolution<S>> {
    if partition.n() != table.n() {
        return Err(Error::SizeMismatch {
            expected: table.n(),
            found: partition.n(),
        });
    }
    let size = partition.cover_size();
    let cap = match strategy {
        CoverStrategy::GroverSim => SIM_MAX_DOMAIN,
        _ => MAX_SCAN_MEMBERS,
    };
    let m = match size.to_usize() {
        Some(m) if m <= cap => m,
        _ if strategy == CoverStrategy::GroverSim => {
            return Err(Error::StrategyUnavailable(format!(
                "grover simulation needs at most {cap} cover members, this cover has {size}"
            )))
        }
        _ => {
            return Err(Error::InstanceTooLarge {
                what: "cover size",
                value: size.to_string(),
                cap: cap.to_string(),
            })
        }
    };
    // Every member has the same downset count, so one check covers all.
    DownsetIndex::new(&partition.member_at(0)?, MAX_DOWNSETS)?;

    let g = |idx: usize| -> S {
        let member = partition.member_at(idx).expect("index below cover size");
        g_of_p(table, &member).expect("downset count checked").score
    };

    let (member_index, mut ledger) = match strategy {
        CoverStrategy::ClassicalScan => {
            let (best, _) = (0..m)
                .into_par_iter()
                .map(|idx| (idx, g(idx)))
                .reduce_with(|a, b| {
                    // Deterministic: higher score, then lower index.
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                })
                .expect("non-empty cover");
            let ledger = QueryLedger {
                classical_evals: m as u64,
                ..Default::default()
            };
            (best, ledger)
        }
        CoverStrategy::GroverSim | CoverStrategy::GroverCostModel => {
            let mode = if strategy == CoverStrategy::GroverSim {
                MaxFindMode::Simulate
            } else {
                MaxFindMode::CostModel
            };
            let oracle = MaxOracle::new(m, g);
            let found = max_find(&oracle, mode, rng)?;
            (found.index, found.ledger)
        }
    };
    let witness = g_of_p(table, &partition.member_at(member_index)?)?;
    ledger
        .notes
        .push(format!("witness member {member_index} of {m}"));
    Ok(CoverSolution {
        score: witness.score,
        dag: witness.dag,
        member_index,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp_exact::{best_parents_all_subsets, solve_dp};
    use crate::instance::LinearOrder;
    use crate::random::{random_closed_table, random_table, SeedTree};

    fn set<const N: usize>(items: [usize; N]) -> NodeSet {
        NodeSet::from(items)
    }

    fn eight_node_member() -> CoverMember {
        let p = BlockPartition::canonical(8, 4).unwrap();
        p.covering_member(&LinearOrder::new(vec![3, 6, 7, 5, 2, 1, 0, 4]).unwrap())
    }

    /// Extension-enumeration oracle: best order score over all linear
    /// extensions of `member`.
    fn brute_g(table: &LocalScoreTable<f64>, member: &CoverMember) -> f64 {
        fn rec(
            table: &LocalScoreTable<f64>,
            member: &CoverMember,
            placed: NodeSet,
            acc: f64,
            best: &mut f64,
        ) {
            let n = table.n();
            if placed == NodeSet::full(n) {
                *best = best.max(acc);
                return;
            }
            for i in 0..n {
                if !placed.contains(i) && member.predecessors(i).is_subset_of(placed) {
                    let s = table.best_parents_in(i, placed).0;
                    rec(table, member, placed.with(i), acc + s, best);
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        rec(table, member, NodeSet::EMPTY, 0.0, &mut best);
        best
    }

    #[test]
    fn eight_node_hat_scores() {
        let m = eight_node_member();
        let mut rows = vec![vec![(NodeSet::EMPTY, 0.0)]; 8];
        // C_6 = {∅:0, {8}:2, {4,7}:3} in one-based labels.
        rows[5] = vec![(NodeSet::EMPTY, 0.0), (set([7]), 2.0), (set([3, 6]), 3.0)];
        let t = LocalScoreTable::new(8, rows).unwrap();
        // Both parent sets lie in first halves, so they are already downsets.
        assert_eq!(m.downward_closure(set([7])), set([7]));
        assert_eq!(m.downward_closure(set([3, 6])), set([3, 6]));
        assert_eq!(m.downward_closure(set([4])), set([4, 6, 7]));
        let lattice = DownsetLattice::new(&m, 1 << 20).unwrap();
        let hat = hat_scores(&t, &lattice).unwrap();
        let at = |s: NodeSet| hat.get(5, lattice.index().index_of(s).unwrap());
        assert_eq!(at(set([6, 7])), (2.0, set([7])));
        assert_eq!(at(set([2, 3, 6, 7])), (3.0, set([3, 6])));
        assert_eq!(at(set([2, 3])), (0.0, NodeSet::EMPTY));
    }

    #[test]
    fn hat_scores_match_the_scan_and_are_monotone() {
        let mut rng = SeedTree::new(17).rng();
        let p = BlockPartition::canonical(8, 4).unwrap();
        for trial in 0..10 {
            let t = random_table(8, 12, &mut rng);
            let m = p.member_at(trial * 3).unwrap();
            let lattice = DownsetLattice::new(&m, 1 << 20).unwrap();
            let hat = hat_scores(&t, &lattice).unwrap();
            assert!(hat.edges_touched <= lattice.len() * 8 * 8);
            for i in 0..8 {
                for d in 0..lattice.len() {
                    let s = lattice.set(d);
                    assert_eq!(hat.get(i, d), t.best_parents_in(i, s.without(i)));
                    for &(lower, _) in lattice.lower_covers(d) {
                        assert!(hat.get(i, lower as usize).0 <= hat.get(i, d).0);
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_single_block() {
        // n = 2, k = 2: the lattice is the chain ∅ ⊂ {first} ⊂ {0,1}.
        let t = LocalScoreTable::new(
            2,
            vec![
                vec![(NodeSet::EMPTY, 0.0)],
                vec![(NodeSet::EMPTY, 1.0), (set([0]), 5.0)],
            ],
        )
        .unwrap();
        let p = BlockPartition::canonical(2, 2).unwrap();
        let sub = best_parents_all_subsets(&t, 1);
        for idx in 0..2 {
            let lattice = DownsetLattice::new(&p.member_at(idx).unwrap(), 16).unwrap();
            let hat = hat_scores(&t, &lattice).unwrap();
            for d in 0..lattice.len() {
                assert_eq!(hat.get(1, d).0, sub.get(lattice.set(d)));
            }
        }
    }

    #[test]
    fn two_node_members() {
        let t = LocalScoreTable::new(
            2,
            vec![
                vec![(NodeSet::EMPTY, 0.0)],
                vec![(NodeSet::EMPTY, 0.0), (set([0]), 5.0)],
            ],
        )
        .unwrap();
        let p = BlockPartition::canonical(2, 2).unwrap();
        let forward = g_of_p(&t, &p.member_at(0).unwrap()).unwrap();
        assert_eq!(forward.score, 5.0);
        assert_eq!(forward.dag.parents(), &[NodeSet::EMPTY, set([0])]);
        assert_eq!(g_of_p(&t, &p.member_at(1).unwrap()).unwrap().score, 0.0);

        let sol = solve_cover(
            &t,
            &p,
            CoverStrategy::ClassicalScan,
            &mut SeedTree::new(0).rng(),
        )
        .unwrap();
        assert_eq!(sol.score, 5.0);
        assert_eq!(sol.member_index, 0);
        assert_eq!(sol.ledger.classical_evals, 2);
    }

    #[test]
    fn empty_scores_give_empty_dag() {
        let t = LocalScoreTable::empty_parents(6, 0.0).unwrap();
        let p = BlockPartition::canonical(6, 4).unwrap();
        let sol = g_of_p(&t, &p.member_at(5).unwrap()).unwrap();
        assert_eq!(sol.score, 0.0);
        assert_eq!(sol.dag, Dag::empty(6));
    }

    #[test]
    fn g_matches_extension_enumeration() {
        let mut rng = SeedTree::new(23).rng();
        let p = BlockPartition::canonical(8, 4).unwrap();
        for trial in 0..12 {
            let t = random_table(8, 12, &mut rng);
            let m = p.member_at(trial * 5 % 36).unwrap();
            let sol = g_of_p(&t, &m).unwrap();
            assert!((sol.score - brute_g(&t, &m)).abs() < 1e-9);
            assert!(sol.dag.is_acyclic());
            assert!((t.total_score(&sol.dag).unwrap() - sol.score).abs() < 1e-9);
        }
    }

    #[test]
    fn cover_maximum_equals_unconstrained_optimum() {
        let mut rng = SeedTree::new(29).rng();
        for n in 2..=10 {
            for k in [2, 4] {
                if k > n {
                    continue;
                }
                let t = random_table(n, 10, &mut rng);
                let p = BlockPartition::canonical(n, k).unwrap();
                let dp = solve_dp(&t).unwrap().score;
                let sol = solve_cover(&t, &p, CoverStrategy::ClassicalScan, &mut rng).unwrap();
                assert!((sol.score - dp).abs() < 1e-9, "n={n} k={k}");
                assert!((t.total_score(&sol.dag).unwrap() - dp).abs() < 1e-9);
                for idx in 0..p.cover_len().unwrap().min(20) {
                    assert!(g_of_p(&t, &p.member_at(idx).unwrap()).unwrap().score <= dp + 1e-9);
                }
            }
        }
    }

    #[test]
    fn closed_collections_and_shuffled_blocks() {
        let mut rng = SeedTree::new(31).rng();
        for _ in 0..5 {
            let t = random_closed_table(9, 3, 3, &mut rng);
            let p = BlockPartition::shuffled(9, 4, &mut rng).unwrap();
            let dp = solve_dp(&t).unwrap().score;
            let sol = solve_cover(&t, &p, CoverStrategy::ClassicalScan, &mut rng).unwrap();
            assert!((sol.score - dp).abs() < 1e-9);
        }
    }

    #[test]
    fn grover_strategies() {
        let mut rng = SeedTree::new(37).rng();
        let t = random_table(6, 12, &mut rng);
        let p = BlockPartition::canonical(6, 2).unwrap();
        let dp = solve_dp(&t).unwrap().score;
        let sim = solve_cover(&t, &p, CoverStrategy::GroverSim, &mut rng).unwrap();
        assert!((sim.score - dp).abs() < 1e-9);
        assert!(sim.ledger.oracle_applications > 0);
        assert_eq!(sim.ledger.classical_evals, 8);

        let cost = solve_cover(&t, &p, CoverStrategy::GroverCostModel, &mut rng).unwrap();
        assert!((cost.score - dp).abs() < 1e-9);
        // ceil(sqrt 8) * ceil(log2 8) = 3 * 3.
        assert_eq!(cost.ledger.charged_quantum_queries, 9);
    }

    #[test]
    fn strategy_caps() {
        let t = LocalScoreTable::empty_parents(16, 0.0).unwrap();
        let p = BlockPartition::canonical(16, 4).unwrap();
        // 6^4 = 1296 members fit the simulator; 20 nodes in pairs give 2^10.
        assert!(solve_cover(
            &t,
            &p,
            CoverStrategy::GroverSim,
            &mut SeedTree::new(0).rng()
        )
        .is_ok());
        let t = LocalScoreTable::empty_parents(26, 0.0).unwrap();
        let p = BlockPartition::canonical(26, 2).unwrap();
        assert!(matches!(
            solve_cover(
                &t,
                &p,
                CoverStrategy::GroverSim,
                &mut SeedTree::new(0).rng()
            ),
            Err(Error::StrategyUnavailable(_))
        ));
    }
}
