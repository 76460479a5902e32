//! Sparse distributed representations.
//!
//! An [`Sdr`] is a fixed-width binary vector stored as the sorted list of its
//! active bit indices. The module also provides the combinatorial capacity and
//! false-match calculators used to reason about how reliably SDRs can be told
//! apart under noise.

use fixedbitset::FixedBitSet;
use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-width binary vector with a small set of active bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sdr {
    size: usize,
    active: Vec<u32>,
}

impl Sdr {
    /// Builds an SDR from arbitrary-order indices. Indices must be distinct and
    /// smaller than `size`.
    pub fn new(size: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain("SDR size must be positive".into()));
        }
        let mut active = Vec::new();
        for i in indices {
            if i >= size {
                return Err(Error::Domain(format!("active index {i} out of range for SDR of size {size}")));
            }
            active.push(i as u32);
        }
        active.sort_unstable();
        let before = active.len();
        active.dedup();
        if active.len() != before {
            return Err(Error::Domain("duplicate active index".into()));
        }
        Ok(Sdr { size, active })
    }

    /// All-zero SDR of the given width.
    pub fn empty(size: usize) -> Result<Self> {
        Self::new(size, std::iter::empty())
    }

    /// Caller guarantees `active` is strictly increasing and in range.
    pub(crate) fn from_sorted(size: usize, active: Vec<u32>) -> Self {
        debug_assert!(active.windows(2).all(|p| p[0] < p[1]));
        debug_assert!(active.last().is_none_or(|&i| (i as usize) < size));
        Sdr { size, active }
    }

    /// Total number of bits (n).
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of active bits (w).
    pub fn cardinality(&self) -> usize {
        self.active.len()
    }

    /// Sorted active indices.
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn contains(&self, bit: usize) -> bool {
        self.active.binary_search(&(bit as u32)).is_ok()
    }

    /// Exact sparsity w/n.
    pub fn sparsity(&self) -> Ratio<usize> {
        Ratio::new(self.active.len(), self.size)
    }

    /// Dense bit view, for repeated overlap queries against the same vector.
    pub fn packed(&self) -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(self.size);
        for &i in &self.active {
            bits.insert(i as usize);
        }
        bits
    }

    /// Overlap against a packed view produced by [`Sdr::packed`].
    pub fn overlap_packed(&self, other: &FixedBitSet) -> Result<usize> {
        if other.len() != self.size {
            return Err(Error::Dimension { expected: self.size, actual: other.len() });
        }
        Ok(self.active.iter().filter(|&&i| other.contains(i as usize)).count())
    }

    /// Whether `self` and `other` share at least `spec.theta` active bits.
    pub fn matches(&self, other: &Sdr, spec: MatchSpec) -> Result<bool> {
        Ok(overlap(self, other)? >= spec.theta)
    }
}

/// Overlap threshold under which two SDRs are considered equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchSpec {
    pub theta: usize,
}

/// Number of bits active in both `a` and `b`.
pub fn overlap(a: &Sdr, b: &Sdr) -> Result<usize> {
    if a.size != b.size {
        return Err(Error::Dimension { expected: a.size, actual: b.size });
    }
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.active.len() && j < b.active.len() {
        match a.active[i].cmp(&b.active[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(count)
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        // acc * (n - k + i) is always divisible by i at this point.
        acc = acc * BigUint::from(n - k + i) / BigUint::from(i);
    }
    acc
}

/// Number of distinct SDRs of width `n` with exactly `w` active bits.
pub fn capacity(n: u64, w: u64) -> Result<BigUint> {
    if w > n {
        return Err(Error::Domain(format!("w ({w}) exceeds n ({n})")));
    }
    Ok(binomial(n, w))
}

/// Number of SDRs (width `n`, `w` active) sharing exactly `b` bits with a fixed one.
pub fn overlap_set_size(n: u64, w: u64, b: u64) -> BigUint {
    if b > w || w - b > n - w {
        return BigUint::zero();
    }
    binomial(w, b) * binomial(n - w, w - b)
}

/// Probability that a uniformly drawn `w`-of-`n` SDR overlaps a fixed one in
/// at least `theta` bits. Summed exactly, divided once at the end.
pub fn false_match_probability(n: u64, w: u64, theta: u64) -> Result<f64> {
    if theta == 0 || theta > w || w > n {
        return Err(Error::Domain(format!("need 0 < theta <= w <= n, got n={n} w={w} theta={theta}")));
    }
    let numerator: BigUint = (theta..=w).map(|b| overlap_set_size(n, w, b)).sum();
    let ratio = Ratio::new(BigInt::from(numerator), BigInt::from(binomial(n, w)));
    ratio.to_f64().ok_or_else(|| Error::Domain("probability not representable".into()))
}

/// Index of the most significant decimal digit, i.e. floor(log10(x)).
pub fn decimal_order(x: &BigUint) -> usize {
    x.to_str_radix(10).len().saturating_sub(1)
}

/// Uniformly random `w`-of-`n` SDR drawn from `rng`.
pub fn random_sdr_with<R: Rng + ?Sized>(rng: &mut R, n: usize, w: usize) -> Result<Sdr> {
    if w > n {
        return Err(Error::Domain(format!("w ({w}) exceeds n ({n})")));
    }
    let mut active: Vec<u32> = rand::seq::index::sample(rng, n, w).into_iter().map(|i| i as u32).collect();
    active.sort_unstable();
    Ok(Sdr::from_sorted(n, active))
}

/// Uniformly random `w`-of-`n` SDR, deterministic in `seed`.
pub fn random_sdr(n: usize, w: usize, seed: u64) -> Result<Sdr> {
    random_sdr_with(&mut ChaCha8Rng::seed_from_u64(seed), n, w)
}

/// Serde form of a bit set: its length and 32-bit words, low bit first.
pub(crate) mod bitset_serde {
    use fixedbitset::FixedBitSet;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Packed {
        len: usize,
        words: Vec<u32>,
    }

    pub fn serialize<S: Serializer>(bits: &FixedBitSet, s: S) -> Result<S::Ok, S::Error> {
        let mut words = vec![0u32; bits.len().div_ceil(32)];
        for i in bits.ones() {
            words[i / 32] |= 1 << (i % 32);
        }
        Packed { len: bits.len(), words }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FixedBitSet, D::Error> {
        let p = Packed::deserialize(d)?;
        if p.words.len() != p.len.div_ceil(32) {
            return Err(serde::de::Error::custom("bit set word count does not match its length"));
        }
        let mut bits = FixedBitSet::with_capacity(p.len);
        for (w, &word) in p.words.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let i = w * 32 + rest.trailing_zeros() as usize;
                if i >= p.len {
                    return Err(serde::de::Error::custom("bit set has bits past its length"));
                }
                bits.insert(i);
                rest &= rest - 1;
            }
        }
        Ok(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sdr(n: usize, bits: &[usize]) -> Sdr {
        Sdr::new(n, bits.iter().copied()).unwrap()
    }

    /// Every w-subset of 0..n, by bitmask enumeration.
    fn all_subsets(n: usize, w: usize) -> Vec<Sdr> {
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == w)
            .map(|m| sdr(n, &(0..n).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
            .collect()
    }

    #[test]
    fn overlap_examples() {
        let x = sdr(6, &[0, 3, 5]);
        assert_eq!(overlap(&x, &x).unwrap(), 3);
        assert_eq!(overlap(&sdr(6, &[0, 1]), &sdr(6, &[2, 3])).unwrap(), 0);
        assert_eq!(overlap(&sdr(6, &[0, 1]), &sdr(6, &[1, 2])).unwrap(), 1);
    }

    #[test]
    fn overlap_size_mismatch() {
        assert!(matches!(overlap(&sdr(6, &[0]), &sdr(7, &[0])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn construction_rejects_bad_indices() {
        assert!(Sdr::new(4, [4]).is_err());
        assert!(Sdr::new(4, [1, 1]).is_err());
        assert!(Sdr::new(0, []).is_err());
        let e = Sdr::empty(10).unwrap();
        assert_eq!(e.cardinality(), 0);
        assert_eq!(overlap(&e, &sdr(10, &[1, 2])).unwrap(), 0);
    }

    #[test]
    fn sparsity_is_exact() {
        assert_eq!(sdr(2048, &[1, 2, 3, 4]).sparsity(), Ratio::new(1, 512));
    }

    #[test]
    fn packed_overlap_agrees() {
        let a = sdr(64, &[1, 5, 9, 33, 63]);
        let b = sdr(64, &[5, 9, 10, 63]);
        assert_eq!(a.overlap_packed(&b.packed()).unwrap(), 3);
        assert!(a.matches(&b, MatchSpec { theta: 3 }).unwrap());
        assert!(!a.matches(&b, MatchSpec { theta: 4 }).unwrap());
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(6, 2).unwrap(), BigUint::from(15u32));
        assert_eq!(capacity(6, 2).unwrap(), BigUint::from(all_subsets(6, 2).len()));
        assert_eq!(capacity(17, 17).unwrap(), BigUint::one());
        assert_eq!(decimal_order(&capacity(2048, 20).unwrap()), 47);
        assert!(capacity(3, 4).is_err());
    }

    #[test]
    fn false_match_brute_force() {
        // Oracle: count all 2-of-6 candidates overlapping x in >= theta bits.
        let x = sdr(6, &[0, 1]);
        let candidates = all_subsets(6, 2);
        for theta in 1..=2u64 {
            let hits = candidates.iter().filter(|c| overlap(&x, c).unwrap() as u64 >= theta).count();
            let expected = hits as f64 / candidates.len() as f64;
            assert_eq!(false_match_probability(6, 2, theta).unwrap(), expected);
        }
        assert_eq!(false_match_probability(6, 2, 1).unwrap(), 0.6);
    }

    #[test]
    fn exact_match_is_inverse_capacity() {
        let p = false_match_probability(2048, 20, 20).unwrap();
        let ne = capacity(2048, 20).unwrap().to_f64().unwrap();
        assert!((p * ne - 1.0).abs() < 1e-12);
    }

    /// Independent f64 evaluation: each term as a running product of ratios.
    fn fm_oracle(n: u64, w: u64, theta: u64) -> f64 {
        let ln_choose = |a: u64, b: u64| -> f64 { (0..b).map(|i| ((a - i) as f64 / (b - i) as f64).ln()).sum() };
        (theta..=w).map(|b| (ln_choose(w, b) + ln_choose(n - w, w - b) - ln_choose(n, w)).exp()).sum()
    }

    #[test]
    fn false_match_matches_float_oracle() {
        for (n, w, theta) in [(2048, 20, 10), (1024, 20, 10), (2048, 40, 20), (500, 25, 5)] {
            let p = false_match_probability(n, w, theta).unwrap();
            let q = fm_oracle(n, w, theta);
            assert!((p - q).abs() <= 1e-9 * q, "({n},{w},{theta}): {p} vs {q}");
        }
        // Half-overlap matches at n=2048, w=20 are ~9.3e-17; the ~1e-13 level
        // belongs to n=1024.
        let p = false_match_probability(2048, 20, 10).unwrap();
        assert_eq!(p.log10().floor() as i32, -17);
        let p = false_match_probability(1024, 20, 10).unwrap();
        assert!((p.log10() + 13.0).abs() < 1.0);
    }

    #[test]
    fn false_match_rejects_bad_bounds() {
        assert!(false_match_probability(10, 3, 0).is_err());
        assert!(false_match_probability(10, 3, 4).is_err());
        assert!(false_match_probability(3, 4, 1).is_err());
    }

    #[test]
    fn random_sdr_forced_full_and_deterministic() {
        assert_eq!(random_sdr(8, 8, 99).unwrap().active(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(random_sdr(1024, 20, 7).unwrap(), random_sdr(1024, 20, 7).unwrap());
        assert!(random_sdr(4, 5, 0).is_err());
    }

    proptest! {
        #[test]
        fn overlap_symmetric(a in proptest::collection::btree_set(0usize..64, 0..20),
                             b in proptest::collection::btree_set(0usize..64, 0..20)) {
            let a = Sdr::new(64, a).unwrap();
            let b = Sdr::new(64, b).unwrap();
            let ab = overlap(&a, &b).unwrap();
            prop_assert_eq!(ab, overlap(&b, &a).unwrap());
            prop_assert!(ab <= a.cardinality().min(b.cardinality()));
            prop_assert_eq!(ab, a.overlap_packed(&b.packed()).unwrap());
        }

        #[test]
        fn capacity_symmetric(n in 0u64..200, w in 0u64..200) {
            prop_assume!(w <= n);
            prop_assert_eq!(capacity(n, w).unwrap(), capacity(n, n - w).unwrap());
        }

        #[test]
        fn false_match_non_increasing(n in 2u64..300, w in 1u64..40) {
            prop_assume!(w <= n);
            let ps: Vec<f64> = (1..=w).map(|t| false_match_probability(n, w, t).unwrap()).collect();
            prop_assert!(ps.windows(2).all(|p| p[1] <= p[0]));
        }
    }

    #[test]
    fn bitset_json_round_trip() {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct Wrap(#[serde(with = "bitset_serde")] FixedBitSet);
        for len in [0usize, 1, 31, 32, 33, 200] {
            let mut b = FixedBitSet::with_capacity(len);
            for i in (0..len).filter(|i| i % 3 == 0 || i % 7 == 1) {
                b.insert(i);
            }
            let text = serde_json::to_string(&Wrap(b.clone())).unwrap();
            let back: Wrap = serde_json::from_str(&text).unwrap();
            assert_eq!(back.0, b);
        }
        assert!(serde_json::from_str::<Wrap>(r#"{"len":3,"words":[8]}"#).is_err());
        assert!(serde_json::from_str::<Wrap>(r#"{"len":40,"words":[1]}"#).is_err());
    }
}
