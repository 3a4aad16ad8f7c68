//! Seeded randomness: named sub-streams and random instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::LocalScoreTable;
use crate::nodeset::NodeSet;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seed that splits into independent named streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedTree(u64);

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        SeedTree(seed)
    }

    pub fn seed(self) -> u64 {
        self.0
    }

    /// Child seed for the subsystem `name`.
    pub fn child(self, name: &str) -> SeedTree {
        // FNV-1a over the name, mixed with the parent seed.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in name.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        SeedTree(splitmix64(self.0 ^ splitmix64(h)))
    }

    /// Child seed for the `k`-th trial.
    pub fn index(self, k: u64) -> SeedTree {
        SeedTree(splitmix64(self.0.wrapping_add(splitmix64(k))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// A random table: every `C_i` holds the empty set plus up to
/// `max_sets - 1` distinct random parent sets, scores uniform in `[-10, 10)`.
pub fn random_table<R: Rng>(n: usize, max_sets: usize, rng: &mut R) -> LocalScoreTable<f64> {
    let per_node = (0..n)
        .map(|i| {
            let others = NodeSet::full(n).without(i);
            let room = 1usize << others.len();
            let size = rng.gen_range(1..=max_sets.max(1)).min(room);
            let mut row = vec![(NodeSet::EMPTY, rng.gen_range(-10.0..10.0))];
            while row.len() < size {
                let j = NodeSet::from_bits(rng.gen::<u32>()).intersection(others);
                if row.iter().all(|(p, _)| *p != j) {
                    row.push((j, rng.gen_range(-10.0..10.0)));
                }
            }
            row
        })
        .collect();
    LocalScoreTable::new(n, per_node).expect("valid by construction")
}

/// Like [`random_table`], but every collection is closed under inclusion:
/// random parent sets are drawn and all their subsets added.
pub fn random_closed_table<R: Rng>(
    n: usize,
    seeds_per_node: usize,
    max_indegree: usize,
    rng: &mut R,
) -> LocalScoreTable<f64> {
    let per_node = (0..n)
        .map(|i| {
            let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let mut sets = vec![NodeSet::EMPTY];
            for _ in 0..seeds_per_node {
                let mut j = NodeSet::EMPTY;
                let size = rng.gen_range(0..=max_indegree.min(others.len()));
                while j.len() < size {
                    j.insert(others[rng.gen_range(0..others.len())]);
                }
                for sub in j.subsets() {
                    if !sets.contains(&sub) {
                        sets.push(sub);
                    }
                }
            }
            sets.into_iter()
                .map(|j| (j, rng.gen_range(-10.0..10.0)))
                .collect()
        })
        .collect();
    LocalScoreTable::new(n, per_node).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_streams_differ_and_repeat() {
        let root = SeedTree::new(1);
        assert_eq!(root.child("grover"), root.child("grover"));
        assert_ne!(root.child("grover"), root.child("cover"));
        assert_ne!(root.index(0), root.index(1));
    }

    #[test]
    fn random_tables_respect_bounds() {
        let mut rng = SeedTree::new(9).rng();
        for n in 1..=8 {
            let t = random_table(n, 12, &mut rng);
            assert!((0..n).all(|i| (1..=12).contains(&t.entries(i).len())));
        }
        let c = random_closed_table(6, 3, 2, &mut rng);
        assert!(crate::scores_io::is_closed_under_inclusion(&c));
    }
}
