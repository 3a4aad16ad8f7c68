//! Covers of the linear orders by parallel bucket orders.
//!
//! The node set is partitioned into blocks of even size `k` (the last block
//! may be smaller). A cover member picks, in every block, a first half `S'`
//! that precedes the second half `S''`; the member's relation is the union of
//! the products `S' x S''`. Every linear order extends at least one member:
//! take the earliest half of each block.
//!
//! Members and downsets are addressed by mixed-radix indices with block 0 as
//! the least significant digit.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::LinearOrder;
use crate::nodeset::{NodeSet, MAX_NODES};

/// Binomial coefficient for the small arguments used by block splits.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Size of the first half of a block with `size` elements.
#[inline]
pub fn first_half(size: usize) -> usize {
    size.div_ceil(2)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 || !k.is_multiple_of(2) || k > n {
        return Err(Error::InvalidK { n, k });
    }
    Ok(())
}

fn block_sizes(n: usize, k: usize) -> impl Iterator<Item = usize> {
    let full = n / k;
    let rest = n % k;
    std::iter::repeat_n(k, full).chain((rest > 0).then_some(rest))
}

/// Number of cover members for `n` nodes and block size `k`.
pub fn cover_size(n: usize, k: usize) -> Result<BigUint> {
    check_k(n, k)?;
    Ok(block_sizes(n, k)
        .map(|s| BigUint::from(binomial(s as u64, first_half(s) as u64)))
        .product())
}

/// Number of downsets of every member for `n` nodes and block size `k`.
pub fn downsets_per_member(n: usize, k: usize) -> Result<BigUint> {
    check_k(n, k)?;
    Ok(block_sizes(n, k)
        .map(|s| block_downsets(first_half(s), s - first_half(s)))
        .product())
}

fn block_downsets(first: usize, second: usize) -> BigUint {
    (BigUint::one() << first) + (BigUint::one() << second) - 1u32
}

/// Rank of a fixed-size subset of `0..` among subsets of the same size in
/// increasing bitmask order (combinatorial number system).
fn rank_combination(bits: u32) -> u64 {
    NodeSet::from_bits(bits)
        .iter()
        .enumerate()
        .map(|(j, pos)| binomial(pos as u64, j as u64 + 1))
        .sum()
}

fn unrank_combination(mut rank: u64, size: usize, universe: usize) -> u32 {
    let mut bits = 0u32;
    let mut top = universe;
    for j in (1..=size).rev() {
        // Largest position p < top with C(p, j) <= rank.
        let mut p = top - 1;
        while binomial(p as u64, j as u64) > rank {
            p -= 1;
        }
        rank -= binomial(p as u64, j as u64);
        bits |= 1 << p;
        top = p;
    }
    bits
}

/// A partition of `0..n` into blocks of size `k` (last block possibly smaller).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    k: usize,
    blocks: Vec<NodeSet>,
}

impl BlockPartition {
    /// Consecutive indices: block `t` holds nodes `t*k .. t*k + k - 1`.
    pub fn canonical(n: usize, k: usize) -> Result<Self> {
        check_k(n, k)?;
        let blocks = (0..n)
            .step_by(k)
            .map(|start| (start..(start + k).min(n)).collect())
            .collect();
        Ok(Self { n, k, blocks })
    }

    /// Blocks filled from a random permutation of the nodes.
    pub fn shuffled<R: Rng>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        check_k(n, k)?;
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(rng);
        let blocks = nodes
            .chunks(k)
            .map(|c| c.iter().copied().collect())
            .collect();
        Ok(Self { n, k, blocks })
    }

    /// Explicit blocks; all but the last must have exactly `k` nodes.
    pub fn from_blocks(n: usize, k: usize, blocks: Vec<NodeSet>) -> Result<Self> {
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidNodeCount(n));
        }
        check_k(n, k)?;
        let expected: Vec<usize> = block_sizes(n, k).collect();
        let sizes: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
        let mut seen = NodeSet::EMPTY;
        for b in &blocks {
            if !b.is_disjoint(seen) || !b.fits(n) {
                return Err(Error::IndexOutOfRange(format!(
                    "block {b} overlaps or exceeds 0..{n}"
                )));
            }
            seen = seen.union(*b);
        }
        if sizes != expected || seen != NodeSet::full(n) {
            return Err(Error::IndexOutOfRange(format!(
                "blocks {blocks:?} do not partition 0..{n} into size-{k} blocks"
            )));
        }
        Ok(Self { n, k, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[NodeSet] {
        &self.blocks
    }

    /// Number of splits of block `t`.
    pub fn splits_in_block(&self, t: usize) -> u64 {
        let s = self.blocks[t].len();
        binomial(s as u64, first_half(s) as u64)
    }

    pub fn cover_size(&self) -> BigUint {
        (0..self.blocks.len())
            .map(|t| BigUint::from(self.splits_in_block(t)))
            .product()
    }

    /// Cover size as a machine integer, if it fits.
    pub fn cover_len(&self) -> Option<usize> {
        self.cover_size().to_usize()
    }

    /// The `idx`-th member: per block, the digit-th first half in increasing
    /// bitmask order.
    pub fn member(&self, idx: &BigUint) -> Result<CoverMember> {
        if *idx >= self.cover_size() {
            return Err(Error::IndexOutOfRange(idx.to_string()));
        }
        let mut rest = idx.clone();
        let mut splits = Vec::with_capacity(self.blocks.len());
        for (t, &block) in self.blocks.iter().enumerate() {
            let radix = BigUint::from(self.splits_in_block(t));
            let digit = (&rest % &radix).to_u64().expect("digit below radix");
            rest /= &radix;
            let size = block.len();
            let packed = unrank_combination(digit, first_half(size), size);
            let first = NodeSet::expand(packed, block);
            splits.push(Split {
                first,
                second: block.difference(first),
            });
        }
        Ok(CoverMember { n: self.n, splits })
    }

    pub fn member_at(&self, idx: usize) -> Result<CoverMember> {
        self.member(&BigUint::from(idx))
    }

    /// Inverse of [`BlockPartition::member`].
    pub fn member_index(&self, member: &CoverMember) -> Result<BigUint> {
        if member.splits.len() != self.blocks.len() {
            return Err(Error::SizeMismatch {
                expected: self.blocks.len(),
                found: member.splits.len(),
            });
        }
        let mut idx = BigUint::zero();
        for (t, (split, &block)) in member.splits.iter().zip(&self.blocks).enumerate().rev() {
            if split.first.union(split.second) != block
                || split.first.len() != first_half(block.len())
            {
                return Err(Error::IndexOutOfRange(format!(
                    "split {split:?} of block {block}"
                )));
            }
            let digit = rank_combination(split.first.compress(block));
            idx = idx * self.splits_in_block(t) + digit;
        }
        Ok(idx)
    }

    /// A member extended by `order`: each block's first half is its earliest
    /// elements in `order`.
    pub fn covering_member(&self, order: &LinearOrder) -> CoverMember {
        let splits = self
            .blocks
            .iter()
            .map(|&block| {
                let mut nodes: Vec<usize> = block.iter().collect();
                nodes.sort_by_key(|&i| order.position(i));
                let first: NodeSet = nodes[..first_half(nodes.len())].iter().copied().collect();
                Split {
                    first,
                    second: block.difference(first),
                }
            })
            .collect();
        CoverMember { n: self.n, splits }
    }
}

/// One block's split: every node of `first` precedes every node of `second`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Split {
    pub first: NodeSet,
    pub second: NodeSet,
}

/// A parallel bucket order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoverMember {
    n: usize,
    splits: Vec<Split>,
}

impl CoverMember {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    /// `P_i`: the nodes required before `node`.
    pub fn predecessors(&self, node: usize) -> NodeSet {
        self.splits
            .iter()
            .find(|s| s.second.contains(node))
            .map_or(NodeSet::EMPTY, |s| s.first)
    }

    /// `true` if `(j, i)` is in the relation.
    pub fn relates(&self, j: usize, i: usize) -> bool {
        self.predecessors(i).contains(j)
    }

    /// All related pairs `(j, i)`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.splits.iter().flat_map(|s| {
            s.first
                .iter()
                .flat_map(move |j| s.second.iter().map(move |i| (j, i)))
        })
    }

    /// `true` if `order` is a linear extension of this member.
    pub fn is_extended_by(&self, order: &LinearOrder) -> bool {
        self.pairs().all(|(j, i)| order.precedes(j, i))
    }

    pub fn downset_count(&self) -> BigUint {
        self.splits
            .iter()
            .map(|s| block_downsets(s.first.len(), s.second.len()))
            .product()
    }

    /// `true` iff `set` is closed under taking predecessors.
    pub fn is_downset(&self, set: NodeSet) -> bool {
        self.splits
            .iter()
            .all(|s| set.is_disjoint(s.second) || s.first.is_subset_of(set))
    }

    /// Smallest downset containing `set`.
    pub fn downward_closure(&self, set: NodeSet) -> NodeSet {
        self.splits.iter().fold(set, |acc, s| {
            if set.is_disjoint(s.second) {
                acc
            } else {
                acc.union(s.first)
            }
        })
    }

    /// `true` iff `set \ {node}` is again a downset, for a downset `set`
    /// containing `node`.
    pub fn is_removable(&self, set: NodeSet, node: usize) -> bool {
        self.splits
            .iter()
            .find(|s| s.first.contains(node))
            .is_none_or(|s| set.is_disjoint(s.second))
    }
}

/// Dense indexing of the downsets of one member.
#[derive(Clone, Debug)]
pub struct DownsetIndex {
    splits: Vec<Split>,
    radices: Vec<usize>,
    len: usize,
}

impl DownsetIndex {
    /// Fails if the member has more than `cap` downsets.
    pub fn new(member: &CoverMember, cap: usize) -> Result<Self> {
        let count = member.downset_count();
        match count.to_usize() {
            Some(len) if len <= cap => {}
            _ => {
                return Err(Error::InstanceTooLarge {
                    what: "downset count",
                    value: count.to_string(),
                    cap: cap.to_string(),
                })
            }
        }
        let radices: Vec<usize> = member
            .splits
            .iter()
            .map(|s| (1usize << s.first.len()) + (1usize << s.second.len()) - 1)
            .collect();
        let len = radices.iter().product();
        Ok(Self {
            splits: member.splits.clone(),
            radices,
            len,
        })
    }

    /// Number of downsets, `D`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Per block: subsets of `S'` by bitmask, then `S'` plus non-empty
    /// subsets of `S''` by bitmask.
    pub fn index_of(&self, set: NodeSet) -> Result<usize> {
        let mut idx = 0;
        for (s, &radix) in self.splits.iter().zip(&self.radices).rev() {
            let part = set.intersection(s.first.union(s.second));
            let digit = if part.is_subset_of(s.first) {
                part.compress(s.first) as usize
            } else if s.first.is_subset_of(part) {
                (1usize << s.first.len()) + part.difference(s.first).compress(s.second) as usize - 1
            } else {
                return Err(Error::NotADownset(set));
            };
            idx = idx * radix + digit;
        }
        Ok(idx)
    }

    pub fn downset(&self, idx: usize) -> Result<NodeSet> {
        if idx >= self.len {
            return Err(Error::IndexOutOfRange(idx.to_string()));
        }
        let mut rest = idx;
        let mut set = NodeSet::EMPTY;
        for (s, &radix) in self.splits.iter().zip(&self.radices) {
            let digit = rest % radix;
            rest /= radix;
            let low = 1usize << s.first.len();
            let part = if digit < low {
                NodeSet::expand(digit as u32, s.first)
            } else {
                s.first
                    .union(NodeSet::expand((digit - low + 1) as u32, s.second))
            };
            set = set.union(part);
        }
        Ok(set)
    }
}
