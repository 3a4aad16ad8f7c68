//! Quantum search and maximum finding.
//!
//! Two execution modes share one interface:
//!
//! * **simulation** runs Grover search on a dense statevector. Unknown
//!   marked counts use the randomized exponential schedule (growth factor
//!   6/5), and maximum finding is the threshold-raising loop: search for an
//!   index beating the current best, move the threshold, repeat until the
//!   time budget runs out.
//! * **cost model** finds the maximum classically and charges
//!   `ceil(sqrt(m)) * ceil(log2 m)` quantum queries.
//!
//! Simulation needs the oracle's full truth table to build the phase flip,
//! so every index is evaluated classically once; those evaluations are
//! counted separately from simulated oracle applications.

mod cost;
mod statevector;

pub use cost::{ceil_log2, ceil_sqrt, CostReport, DecimalBound, SpaceTimeConstant};
pub use statevector::Statevector;

use std::f64::consts::PI;
use std::ops::AddAssign;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest domain the statevector simulator accepts.
pub const SIM_MAX_DOMAIN: usize = 4096;

/// Independent maximum-finding runs combined by [`max_find`].
pub const AMPLIFICATION: usize = 7;

/// Growth factor of the unknown-count search schedule.
const SCHEDULE_GROWTH: f64 = 6.0 / 5.0;

/// Query and evaluation counters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryLedger {
    /// Oracle evaluations carried out classically.
    pub classical_evals: u64,
    /// Phase-oracle applications performed by the simulator.
    pub oracle_applications: u64,
    /// Simulated measurements.
    pub measurements: u64,
    /// Quantum queries charged: simulated applications, or the cost-model
    /// formula.
    pub charged_quantum_queries: u64,
    pub notes: Vec<String>,
}

impl QueryLedger {
    pub fn to_kv(&self) -> String {
        let mut out = format!(
            "classical_evals = {}\noracle_applications = {}\nmeasurements = {}\ncharged_quantum_queries = {}\n",
            self.classical_evals, self.oracle_applications, self.measurements, self.charged_quantum_queries
        );
        for (k, note) in self.notes.iter().enumerate() {
            out.push_str(&format!("note_{k} = {note}\n"));
        }
        out
    }
}

impl AddAssign<&QueryLedger> for QueryLedger {
    fn add_assign(&mut self, rhs: &QueryLedger) {
        self.classical_evals += rhs.classical_evals;
        self.oracle_applications += rhs.oracle_applications;
        self.measurements += rhs.measurements;
        self.charged_quantum_queries += rhs.charged_quantum_queries;
        self.notes.extend(rhs.notes.iter().cloned());
    }
}

/// A function on `0..m` whose maximum is sought.
pub struct MaxOracle<F> {
    m: usize,
    eval: F,
}

impl<V, F> MaxOracle<F>
where
    V: PartialOrd + Copy + Send,
    F: Fn(usize) -> V + Sync,
{
    pub fn new(m: usize, eval: F) -> Self {
        Self { m, eval }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn eval(&self, x: usize, ledger: &mut QueryLedger) -> V {
        ledger.classical_evals += 1;
        (self.eval)(x)
    }

    /// Evaluates every index, in parallel.
    pub fn tabulate(&self, ledger: &mut QueryLedger) -> Vec<V> {
        ledger.classical_evals += self.m as u64;
        (0..self.m)
            .into_par_iter()
            .map(|x| (self.eval)(x))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxFindMode {
    Simulate,
    CostModel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxFound<V> {
    pub index: usize,
    pub value: V,
    pub ledger: QueryLedger,
}

/// Qubits needed to index `0..m`.
pub fn qubits_for(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        ceil_log2(m as u64) as usize
    }
}

/// `floor(pi/4 * sqrt(dim / max(1, marked)))`.
pub fn optimal_iterations(dim: usize, marked: usize) -> usize {
    (PI / 4.0 * (dim as f64 / marked.max(1) as f64).sqrt()).floor() as usize
}

/// Success probability `sin^2((2r + 1) theta)` of `r` Grover iterations with
/// `marked` of `dim` states marked, `theta = asin(sqrt(marked / dim))`.
pub fn success_probability(dim: usize, marked: usize, iterations: usize) -> f64 {
    let theta = (marked as f64 / dim as f64).sqrt().asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

fn check_domain(m: usize) -> Result<()> {
    if m == 0 || m > SIM_MAX_DOMAIN {
        return Err(Error::DomainTooLarge {
            m,
            cap: SIM_MAX_DOMAIN,
        });
    }
    Ok(())
}

/// Marks over the padded register; padding is never marked.
fn padded_marks(m: usize, mut predicate: impl FnMut(usize) -> bool) -> Vec<bool> {
    let dim = 1usize << qubits_for(m);
    (0..dim).map(|x| x < m && predicate(x)).collect()
}

/// Runs `iterations` Grover iterations from the uniform state and measures.
fn grover_shot<R: Rng>(
    marked: &[bool],
    iterations: u64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> usize {
    let qubits = marked.len().trailing_zeros() as usize;
    let mut state = Statevector::<f64>::uniform(qubits);
    for _ in 0..iterations {
        state.phase_flip(|x| marked[x]);
        state.diffuse();
    }
    ledger.oracle_applications += iterations;
    ledger.charged_quantum_queries += iterations;
    ledger.measurements += 1;
    state.measure(rng)
}

/// One search with a known iteration count: returns the measured index.
pub fn grover_fixed<R: Rng>(
    predicate: impl FnMut(usize) -> bool,
    m: usize,
    iterations: usize,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<usize> {
    check_domain(m)?;
    ledger.classical_evals += m as u64;
    let marked = padded_marks(m, predicate);
    Ok(grover_shot(&marked, iterations as u64, rng, ledger))
}

/// Search with an unknown number of marked states under a time budget.
/// Each attempt costs its iteration count plus one for the measurement.
fn search_unknown_count<R: Rng>(
    marked: &[bool],
    budget: &mut u64,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Option<usize> {
    let cap = (marked.len() as f64).sqrt().max(1.0);
    let mut bound = 1.0f64;
    loop {
        let iterations = rng.gen_range(0..bound.ceil() as u64);
        let cost = iterations + 1;
        if *budget < cost {
            *budget = 0;
            return None;
        }
        *budget -= cost;
        let x = grover_shot(marked, iterations, rng, ledger);
        if marked[x] {
            return Some(x);
        }
        bound = (bound * SCHEDULE_GROWTH).min(cap);
    }
}

/// Budget of one unknown-count search: twice its expected cost bound
/// `(9/2) sqrt(dim)`, so a marked index is found with probability >= 1/2.
fn search_budget(dim: usize) -> u64 {
    (9.0 * (dim as f64).sqrt()).ceil() as u64 + 1
}

/// Finds an index satisfying `predicate` on `0..m`. Each of `rounds`
/// independent attempts succeeds with probability at least 1/2 when a marked
/// index exists.
pub fn grover_search_sim<R: Rng>(
    predicate: impl FnMut(usize) -> bool,
    m: usize,
    rounds: usize,
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Option<usize>> {
    check_domain(m)?;
    ledger.classical_evals += m as u64;
    let marked = padded_marks(m, predicate);
    for _ in 0..rounds {
        let mut budget = search_budget(marked.len());
        if let Some(x) = search_unknown_count(&marked, &mut budget, rng, ledger) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Time budget of one maximum-finding run: three times the expected cost
/// `(45/4) sqrt(N) + (7/10) log2(N)^2`, giving success probability >= 2/3.
pub fn max_find_budget(dim: usize) -> u64 {
    let lg = (dim.max(2) as f64).log2();
    (3.0 * (11.25 * (dim as f64).sqrt() + 0.7 * lg * lg)).ceil() as u64
}

/// One threshold-raising run over tabulated values.
fn threshold_run<V: PartialOrd + Copy, R: Rng>(
    values: &[V],
    rng: &mut R,
    ledger: &mut QueryLedger,
) -> usize {
    let m = values.len();
    let dim = 1usize << qubits_for(m);
    let mut best = rng.gen_range(0..m);
    let mut budget = max_find_budget(dim);
    loop {
        let threshold = values[best];
        let marked = padded_marks(m, |x| values[x] > threshold);
        match search_unknown_count(&marked, &mut budget, rng, ledger) {
            Some(x) => best = x,
            None => return best,
        }
    }
}

/// A single, un-amplified maximum-finding run in simulation. Correct with
/// probability at least 2/3.
pub fn max_find_once<V, F, R>(oracle: &MaxOracle<F>, rng: &mut R) -> Result<MaxFound<V>>
where
    V: PartialOrd + Copy + Send,
    F: Fn(usize) -> V + Sync,
    R: Rng,
{
    check_domain(oracle.len())?;
    let mut ledger = QueryLedger::default();
    let values = oracle.tabulate(&mut ledger);
    let index = threshold_run(&values, rng, &mut ledger);
    Ok(MaxFound {
        index,
        value: values[index],
        ledger,
    })
}

/// Maximum finding. In simulation the best of [`AMPLIFICATION`] independent
/// runs is returned; the cost model returns the exact first argmax.
pub fn max_find<V, F, R>(
    oracle: &MaxOracle<F>,
    mode: MaxFindMode,
    rng: &mut R,
) -> Result<MaxFound<V>>
where
    V: PartialOrd + Copy + Send,
    F: Fn(usize) -> V + Sync,
    R: Rng,
{
    let m = oracle.len();
    let mut ledger = QueryLedger::default();
    match mode {
        MaxFindMode::Simulate => {
            check_domain(m)?;
            let values = oracle.tabulate(&mut ledger);
            let mut best = threshold_run(&values, rng, &mut ledger);
            for _ in 1..AMPLIFICATION {
                let x = threshold_run(&values, rng, &mut ledger);
                if values[x] > values[best] {
                    best = x;
                }
            }
            Ok(MaxFound {
                index: best,
                value: values[best],
                ledger,
            })
        }
        MaxFindMode::CostModel => {
            if m == 0 {
                return Err(Error::DomainTooLarge { m, cap: usize::MAX });
            }
            let values = oracle.tabulate(&mut ledger);
            let mut best = 0;
            for x in 1..m {
                if values[x] > values[best] {
                    best = x;
                }
            }
            ledger.charged_quantum_queries = cost_model_charge(m as u64);
            ledger
                .notes
                .push("cost model: charged ceil(sqrt(m)) * ceil(log2(max(m, 2))) queries".into());
            Ok(MaxFound {
                index: best,
                value: values[best],
                ledger,
            })
        }
    }
}

/// `ceil(sqrt(m)) * ceil(log2(max(m, 2)))`.
pub fn cost_model_charge(m: u64) -> u64 {
    ceil_sqrt(m) * ceil_log2(m.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn closed_form_values() {
        // theta = pi/6 for one of four: one iteration is exact.
        assert_eq!(optimal_iterations(4, 1), 1);
        assert!((success_probability(4, 1, 1) - 1.0).abs() < 1e-12);
        assert_eq!(optimal_iterations(64, 1), 6);
        assert!((success_probability(64, 1, 6) - 0.996_585_4).abs() < 1e-6);
    }

    #[test]
    fn single_iteration_is_a_rotation() {
        // Amplitudes on (marked, unmarked) rotate by 2 theta per iteration.
        for (qubits, k) in [(2, 1), (4, 3), (6, 1), (7, 10)] {
            let dim = 1usize << qubits;
            let theta = (k as f64 / dim as f64).sqrt().asin();
            let mut s = Statevector::<f64>::uniform(qubits);
            for r in 1..5 {
                s.phase_flip(|x| x < k);
                s.diffuse();
                let angle = (2 * r + 1) as f64 * theta;
                let marked_amp = angle.sin() / (k as f64).sqrt();
                let unmarked_amp = angle.cos() / ((dim - k) as f64).sqrt();
                for x in 0..dim {
                    let want = if x < k { marked_amp } else { unmarked_amp };
                    assert!((s.amplitudes()[x].re - want).abs() < 1e-9);
                    assert!(s.amplitudes()[x].im.abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn four_element_search_is_certain() {
        let mut r = rng(1);
        let mut ledger = QueryLedger::default();
        let hits = (0..1000)
            .filter(|_| grover_fixed(|x| x == 2, 4, 1, &mut r, &mut ledger).unwrap() == 2)
            .count();
        assert_eq!(hits, 1000);
        assert_eq!(ledger.oracle_applications, 1000);
        let found = grover_search_sim(|x| x == 2, 4, 10, &mut r, &mut ledger).unwrap();
        assert_eq!(found, Some(2));
    }

    #[test]
    fn search_with_nothing_marked_gives_up() {
        let mut ledger = QueryLedger::default();
        let found = grover_search_sim(|_| false, 100, 3, &mut rng(2), &mut ledger).unwrap();
        assert_eq!(found, None);
        // Three rounds of at most 9 sqrt(128) + 1 time units each.
        assert!(ledger.oracle_applications + ledger.measurements <= 3 * search_budget(128));
    }

    #[test]
    fn search_finds_planted_items() {
        let mut r = rng(3);
        let mut ledger = QueryLedger::default();
        let mut hits = 0;
        for trial in 0..200 {
            let target = trial * 7 % 1000;
            if grover_search_sim(|x| x == target, 1000, 8, &mut r, &mut ledger).unwrap()
                == Some(target)
            {
                hits += 1;
            }
        }
        assert!(hits >= 198, "hits = {hits}");
    }

    #[test]
    fn domain_cap() {
        let mut ledger = QueryLedger::default();
        assert!(matches!(
            grover_search_sim(|_| true, SIM_MAX_DOMAIN + 1, 1, &mut rng(0), &mut ledger),
            Err(Error::DomainTooLarge { .. })
        ));
        let oracle = MaxOracle::new(SIM_MAX_DOMAIN + 1, |x| x);
        assert!(max_find(&oracle, MaxFindMode::Simulate, &mut rng(0)).is_err());
        assert!(max_find(&oracle, MaxFindMode::CostModel, &mut rng(0)).is_ok());
    }

    #[test]
    fn tiny_argmax() {
        let values = [3, 1, 4, 1, 5];
        let oracle = MaxOracle::new(5, |x| values[x]);
        let found = max_find(&oracle, MaxFindMode::CostModel, &mut rng(0)).unwrap();
        assert_eq!((found.index, found.value), (4, 5));
        assert_eq!(found.ledger.charged_quantum_queries, 3 * 3);
        let sim = max_find(&oracle, MaxFindMode::Simulate, &mut rng(0)).unwrap();
        assert_eq!((sim.index, sim.value), (4, 5));
    }

    #[test]
    fn constant_oracle_terminates() {
        let oracle = MaxOracle::new(50, |_| 7);
        let found = max_find(&oracle, MaxFindMode::Simulate, &mut rng(4)).unwrap();
        assert_eq!(found.value, 7);
        assert!(found.ledger.oracle_applications <= AMPLIFICATION as u64 * max_find_budget(64));
        let single = MaxOracle::new(1, |_| 1.5);
        assert_eq!(
            max_find(&single, MaxFindMode::Simulate, &mut rng(4))
                .unwrap()
                .index,
            0
        );
    }

    #[test]
    fn amplified_max_finding_is_reliable() {
        let mut r = rng(5);
        let mut correct = 0;
        for trial in 0..100 {
            let mut vr = rng(1000 + trial);
            let values: Vec<u32> = (0..256).map(|_| vr.gen_range(0..1_000_000)).collect();
            let truth = *values.iter().max().unwrap();
            let oracle = MaxOracle::new(256, |x| values[x]);
            if max_find(&oracle, MaxFindMode::Simulate, &mut r)
                .unwrap()
                .value
                == truth
            {
                correct += 1;
            }
        }
        assert!(correct >= 99, "correct = {correct}");
    }

    #[test]
    fn ledgers_merge_by_summation() {
        let mut a = QueryLedger {
            classical_evals: 1,
            oracle_applications: 2,
            measurements: 3,
            charged_quantum_queries: 4,
            notes: vec![],
        };
        let b = a.clone();
        a += &b;
        assert_eq!(a.charged_quantum_queries, 8);
        assert!(a.to_kv().contains("oracle_applications = 4"));
    }
}
