//! Exact cost formulas and the report behind `cover-stats`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::bucket_cover::{binomial, cover_size, downsets_per_member};
use crate::error::Result;

/// Base of the first quantum algorithm's running time.
pub const LINEAR_ORDER_BASE: f64 = 1.817;
/// Base of the cover-based quantum algorithm's running time.
pub const COVER_BASE: f64 = 1.982;
/// Growth rate of `F` beyond which the first algorithm loses to `2^n`.
pub const LINEAR_ORDER_F_LIMIT: f64 = 1.212;
/// Growth rate of `F` up to which the cover algorithm keeps its bound.
pub const COVER_F_LIMIT: f64 = 1.453;

/// Working precision, in decimal digits after the point, of exact roots.
const ROOT_DIGITS: u32 = 40;

pub fn ceil_sqrt(m: u64) -> u64 {
    let s = m.isqrt();
    if s * s < m {
        s + 1
    } else {
        s
    }
}

/// `ceil(log2 m)` for `m >= 1`.
pub fn ceil_log2(m: u64) -> u64 {
    if m <= 1 {
        0
    } else {
        64 - (m - 1).leading_zeros() as u64
    }
}

fn big_ceil_sqrt(x: &BigUint) -> BigUint {
    let s = x.sqrt();
    if &s * &s < *x {
        s + 1u32
    } else {
        s
    }
}

fn big_ceil_log2(x: &BigUint) -> u64 {
    if *x <= BigUint::one() {
        0
    } else {
        (x - 1u32).bits()
    }
}

/// A positive real `x` held as `floor(x * 10^digits)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecimalBound {
    pub scaled: BigUint,
    pub digits: u32,
    /// `true` if `scaled / 10^digits` equals `x` exactly.
    pub exact: bool,
}

impl DecimalBound {
    /// `x^(1/r)` to `digits` decimals.
    pub fn root(x: &BigUint, r: u32, digits: u32) -> Self {
        let shifted = x * BigUint::from(10u32).pow(r * digits);
        let scaled = shifted.nth_root(r);
        let exact = scaled.pow(r) == shifted;
        Self {
            scaled,
            digits,
            exact,
        }
    }

    /// Smallest multiple of `10^-decimals` that is `>= x`, scaled by
    /// `10^decimals`.
    pub fn ceil_scaled(&self, decimals: u32) -> BigUint {
        assert!(decimals <= self.digits);
        let unit = BigUint::from(10u32).pow(self.digits - decimals);
        let q = &self.scaled / &unit;
        if self.exact && (&self.scaled % &unit).is_zero() {
            q
        } else {
            q + 1u32
        }
    }

    pub fn to_f64(&self) -> f64 {
        let s = self.to_string();
        s.parse().unwrap_or(f64::NAN)
    }
}

/// Formats `scaled / 10^decimals`.
fn fixed_point(scaled: &BigUint, decimals: u32) -> String {
    let mut s = scaled.to_string();
    let d = decimals as usize;
    if s.len() <= d {
        s = "0".repeat(d + 1 - s.len()) + &s;
    }
    let point = s.len() - d;
    if d == 0 {
        s
    } else {
        format!("{}.{}", &s[..point], &s[point..])
    }
}

impl fmt::Display for DecimalBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fixed_point(&self.scaled, self.digits))
    }
}

/// The per-node growth rate `a^(1/(2k)) * b^(1/k)` of `D * |P|^(1/2)` for
/// blocks of size `k`, where `a = C(k, k/2)` members and `b = 2^(k/2+1) - 1`
/// downsets per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceTimeConstant {
    pub k: u32,
    pub a: BigUint,
    pub b: BigUint,
    /// `a^(1/(2k))`.
    pub a_root: DecimalBound,
    /// `b^(1/k)`.
    pub b_root: DecimalBound,
    /// `(a * b^2)^(1/(2k))`, computed as one root.
    pub product: DecimalBound,
}

impl SpaceTimeConstant {
    pub fn for_block(k: u32) -> Self {
        assert!(k >= 2 && k.is_multiple_of(2), "block size must be even");
        let a = BigUint::from(binomial(k as u64, k as u64 / 2));
        let b = (BigUint::one() << (k / 2 + 1)) - 1u32;
        let a_root = DecimalBound::root(&a, 2 * k, ROOT_DIGITS);
        let b_root = DecimalBound::root(&b, k, ROOT_DIGITS);
        let product = DecimalBound::root(&(&a * &b * &b), 2 * k, ROOT_DIGITS);
        Self {
            k,
            a,
            b,
            a_root,
            b_root,
            product,
        }
    }

    /// Upper bounds of both factors rounded up to `decimals`, their exact
    /// product, and that product rounded up to `decimals`; all scaled.
    pub fn rounded_chain(&self, decimals: u32) -> (BigUint, BigUint, BigUint, BigUint) {
        let a_up = self.a_root.ceil_scaled(decimals);
        let b_up = self.b_root.ceil_scaled(decimals);
        let prod = &a_up * &b_up;
        let unit = BigUint::from(10u32).pow(decimals);
        let prod_up = (&prod + &unit - 1u32) / &unit;
        (a_up, b_up, prod, prod_up)
    }

    /// The chain `a^(1/(2k)) * b^(1/k) < A * B < C` with `A`, `B`, `C`
    /// rounded up to `decimals`, as text.
    pub fn chain_text(&self, decimals: u32) -> String {
        let (a_up, b_up, _, prod_up) = self.rounded_chain(decimals);
        format!(
            "< {} * {} < {}",
            fixed_point(&a_up, decimals),
            fixed_point(&b_up, decimals),
            fixed_point(&prod_up, decimals)
        )
    }
}

/// Cost figures for `n` nodes, `F` local scores and block size `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub n: usize,
    pub f: u64,
    pub k: usize,
    /// `|P|`.
    pub cover_size: BigUint,
    /// `D`, downsets of each member.
    pub downsets_per_member: BigUint,
    /// `D * |P|`: total classical work proxy over the whole cover.
    pub work_proxy: BigUint,
    /// Quantum queries charged by the cost model for the outer search.
    pub charged_queries: BigUint,
    /// `D n^2 |P|^(1/2) log2 |P|`.
    pub cover_quantum_bound: f64,
    /// `1.817^n sqrt(F)`.
    pub linear_order_bound: f64,
    /// `1.982^n`.
    pub cover_asymptotic: f64,
    /// `2^n n^2`.
    pub classical_bound: f64,
    /// `(2 / 1.817)^n`.
    pub linear_order_speedup: f64,
    /// `1.212^n`: above this `F`, `1.817^n sqrt(F)` exceeds `2^n`.
    pub linear_order_f_threshold: f64,
    /// `1.453^n`: the `F` budget of the cover algorithm.
    pub cover_f_threshold: f64,
    /// Growth constant for the chosen `k`.
    pub constant: SpaceTimeConstant,
    /// Growth constant at `k = 26`.
    pub reference_constant: SpaceTimeConstant,
}

impl CostReport {
    pub fn new(n: usize, f: u64, k: usize) -> Result<Self> {
        let cover = cover_size(n, k)?;
        let downsets = downsets_per_member(n, k)?;
        let work_proxy = &cover * &downsets;
        let charged_queries =
            big_ceil_sqrt(&cover) * big_ceil_log2(&cover.clone().max(BigUint::from(2u32)));
        let nf = n as f64;
        let cover_f = cover.to_f64().unwrap_or(f64::INFINITY);
        let cover_quantum_bound =
            downsets.to_f64().unwrap_or(f64::INFINITY) * nf * nf * cover_f.sqrt() * cover_f.log2();
        Ok(Self {
            n,
            f,
            k,
            cover_size: cover,
            downsets_per_member: downsets,
            work_proxy,
            charged_queries,
            cover_quantum_bound,
            linear_order_bound: LINEAR_ORDER_BASE.powf(nf) * (f as f64).sqrt(),
            cover_asymptotic: COVER_BASE.powf(nf),
            classical_bound: 2f64.powf(nf) * nf * nf,
            linear_order_speedup: (2.0 / LINEAR_ORDER_BASE).powf(nf),
            linear_order_f_threshold: LINEAR_ORDER_F_LIMIT.powf(nf),
            cover_f_threshold: COVER_F_LIMIT.powf(nf),
            constant: SpaceTimeConstant::for_block(k as u32),
            reference_constant: SpaceTimeConstant::for_block(26),
        })
    }

    /// Machine-readable `key = value` lines.
    pub fn to_kv(&self) -> String {
        let rc = &self.reference_constant;
        let pairs: Vec<(&str, String)> = vec![
            ("n", self.n.to_string()),
            ("F", self.f.to_string()),
            ("k", self.k.to_string()),
            ("cover_size", self.cover_size.to_string()),
            ("downsets_per_member", self.downsets_per_member.to_string()),
            ("work_proxy", self.work_proxy.to_string()),
            ("charged_queries", self.charged_queries.to_string()),
            (
                "cover_quantum_bound",
                format!("{:e}", self.cover_quantum_bound),
            ),
            (
                "linear_order_bound",
                format!("{:e}", self.linear_order_bound),
            ),
            ("cover_asymptotic", format!("{:e}", self.cover_asymptotic)),
            ("classical_bound", format!("{:e}", self.classical_bound)),
            (
                "linear_order_speedup",
                format!("{:.6}", self.linear_order_speedup),
            ),
            (
                "linear_order_f_threshold",
                format!("{:e}", self.linear_order_f_threshold),
            ),
            ("cover_f_threshold", format!("{:e}", self.cover_f_threshold)),
            ("constant_k", self.constant.k.to_string()),
            ("constant_a_root", self.constant.a_root.to_string()),
            ("constant_b_root", self.constant.b_root.to_string()),
            ("constant_product", self.constant.product.to_string()),
            ("k26_a", rc.a.to_string()),
            ("k26_b", rc.b.to_string()),
            ("k26_a_root", rc.a_root.to_string()),
            ("k26_b_root", rc.b_root.to_string()),
            ("k26_product", rc.product.to_string()),
            ("k26_chain", rc.chain_text(4)),
        ];
        pairs
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "instance: n = {}, F = {}, k = {}",
            self.n, self.f, self.k
        )?;
        writeln!(f, "cover members |P|            {}", self.cover_size)?;
        writeln!(
            f,
            "downsets per member D        {}",
            self.downsets_per_member
        )?;
        writeln!(f, "work proxy D*|P|             {}", self.work_proxy)?;
        writeln!(
            f,
            "charged outer queries        {}  (ceil(sqrt|P|) * ceil(log2|P|))",
            self.charged_queries
        )?;
        writeln!(
            f,
            "D n^2 |P|^1/2 log2|P|        {:.6e}",
            self.cover_quantum_bound
        )?;
        writeln!(
            f,
            "1.817^n sqrt(F)              {:.6e}",
            self.linear_order_bound
        )?;
        writeln!(
            f,
            "1.982^n                      {:.6e}",
            self.cover_asymptotic
        )?;
        writeln!(
            f,
            "2^n n^2 (classical)          {:.6e}",
            self.classical_bound
        )?;
        writeln!(
            f,
            "(2/1.817)^n speedup          {:.6}",
            self.linear_order_speedup
        )?;
        writeln!(
            f,
            "F threshold 1.212^n          {:.6e}",
            self.linear_order_f_threshold
        )?;
        writeln!(
            f,
            "F budget 1.453^n             {:.6e}",
            self.cover_f_threshold
        )?;
        writeln!(
            f,
            "growth at k = {}: a^(1/{}) * b^(1/{}) = {}",
            self.constant.k,
            2 * self.constant.k,
            self.constant.k,
            self.constant.product
        )?;
        let rc = &self.reference_constant;
        writeln!(f, "k = 26: a = {}, b = {}", rc.a, rc.b)?;
        writeln!(f, "  a^(1/52) = {}", rc.a_root)?;
        writeln!(f, "  b^(1/26) = {}", rc.b_root)?;
        writeln!(f, "  product  = {} {}", rc.product, rc.chain_text(4))?;
        writeln!(
            f,
            "all quantum figures assume QRAM; charged counts are model values, not wall-clock time"
        )
    }
}
