//! Difference sets over `Z_v` and partitions of `Z_v` into difference sets.
//!
//! A subset `D` of `Z_v` is a difference set when every nonzero residue
//! occurs the same number of times among the pairwise differences of `D`.
//! The constant `lambda` satisfies `k(k-1) = lambda(v-1)` for `k = |D|`,
//! which drives both the size sieve used in enumeration and the multiset
//! arithmetic behind the partition search.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aut::is_prime;
use crate::cover::exact_covers;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DiffsetError {
    #[error("modulus must be at least 1, got {0}")]
    InvalidModulus(u64),
    #[error("residue {value} is out of range for Z_{v}")]
    OutOfRange { value: u64, v: u64 },
    #[error("residue {0} appears more than once")]
    DuplicateResidue(u64),
    #[error("difference sets are nonempty")]
    EmptySet,
    #[error("{p} is not a prime congruent to 3 mod 4")]
    NotPaleyPrime { p: u64 },
    #[error("partition search masks residues in a machine word, so v must be at most 63, got {0}")]
    SearchTooLarge(u64),
}

/// Witness that a subset is a difference set: the constant `lambda` and the
/// derived invariants `k = |D|` and `n_param = k - lambda`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
pub struct DifferenceSetCertificate {
    pub v: u64,
    pub set: Vec<u64>,
    pub k: u64,
    pub lambda: u64,
    pub n_param: u64,
}

fn checked_set(v: u64, set: &[u64]) -> Result<Vec<u64>, DiffsetError> {
    if v == 0 {
        return Err(DiffsetError::InvalidModulus(0));
    }
    let mut sorted = BTreeSet::new();
    for &x in set {
        if x >= v {
            return Err(DiffsetError::OutOfRange { value: x, v });
        }
        if !sorted.insert(x) {
            return Err(DiffsetError::DuplicateResidue(x));
        }
    }
    if sorted.is_empty() {
        return Err(DiffsetError::EmptySet);
    }
    Ok(sorted.into_iter().collect())
}

/// Certificate for `set` as a difference set of `Z_v`, or `None` when the
/// nonzero difference multiplicities are not constant.
pub fn is_difference_set(
    v: u64,
    set: &[u64],
) -> Result<Option<DifferenceSetCertificate>, DiffsetError> {
    let set = checked_set(v, set)?;
    let mut counts = vec![0u64; v as usize];
    for &x in &set {
        for &y in &set {
            if x != y {
                counts[((x + v - y) % v) as usize] += 1;
            }
        }
    }
    let lambda = if v > 1 { counts[1] } else { 0 };
    if counts[1..].iter().any(|&c| c != lambda) {
        return Ok(None);
    }
    let k = set.len() as u64;
    Ok(Some(DifferenceSetCertificate { v, set, k, lambda, n_param: k - lambda }))
}

/// The Paley difference set: nonzero quadratic residues of a prime
/// `p = 3 mod 4`, with parameters `k = (p-1)/2` and `lambda = (p-3)/4`.
pub fn paley_set(p: u64) -> Result<Vec<u64>, DiffsetError> {
    if !is_prime(p) || p % 4 != 3 {
        return Err(DiffsetError::NotPaleyPrime { p });
    }
    let squares: BTreeSet<u64> =
        (1..p).map(|x| ((x as u128 * x as u128) % p as u128) as u64).collect();
    Ok(squares.into_iter().collect())
}

/// Sizes `k` in `1..=v` passing the sieve `k(k-1) = 0 mod (v-1)`; every
/// difference set of `Z_v` has one of these sizes.
pub fn admissible_sizes(v: u64) -> Vec<u64> {
    if v == 1 {
        return vec![1];
    }
    (1..=v).filter(|&k| (k * (k - 1)) % (v - 1) == 0).collect()
}

/// All difference sets of `Z_v` of one size, found by an anchored search:
/// candidate sets contain 0 and grow in ascending order, pruning as soon as
/// any difference multiplicity exceeds the target `lambda`; the full orbit
/// under translation is then expanded. Sets are sorted and distinct.
fn sets_of_size(v: u64, k: u64) -> Vec<Vec<u64>> {
    if k == 0 || k > v {
        return Vec::new();
    }
    if v > 1 && (k * (k - 1)) % (v - 1) != 0 {
        return Vec::new();
    }
    let lambda = if v > 1 { k * (k - 1) / (v - 1) } else { 0 };
    let mut anchored = Vec::new();
    let mut current = vec![0u64];
    let mut counts = vec![0u64; v as usize];
    grow(v, k as usize, lambda, 1, &mut current, &mut counts, &mut anchored);
    let mut all: BTreeSet<Vec<u64>> = BTreeSet::new();
    for base in anchored {
        for g in 0..v {
            let mut translated: Vec<u64> = base.iter().map(|&x| (x + g) % v).collect();
            translated.sort_unstable();
            all.insert(translated);
        }
    }
    all.into_iter().collect()
}

fn grow(
    v: u64,
    k: usize,
    lambda: u64,
    next_min: u64,
    current: &mut Vec<u64>,
    counts: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if current.len() == k {
        // Every count is capped by lambda and the counts sum to
        // k(k-1) = lambda(v-1), so all of them equal lambda here.
        out.push(current.clone());
        return;
    }
    // Room for the remaining elements above `cand` in ascending order.
    let slots = (k - current.len()) as u64;
    for cand in next_min..=v - slots {
        let mut applied = Vec::with_capacity(2 * current.len());
        let mut ok = true;
        'outer: for &x in current.iter() {
            for d in [(cand + v - x) % v, (x + v - cand) % v] {
                counts[d as usize] += 1;
                applied.push(d as usize);
                if counts[d as usize] > lambda {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            current.push(cand);
            grow(v, k, lambda, cand + 1, current, counts, out);
            current.pop();
        }
        for d in applied {
            counts[d] -= 1;
        }
    }
}

/// All difference sets of `Z_v`, in canonical `(k, set)` order. Sizes come
/// from the `k(k-1) = 0 mod (v-1)` sieve, each size is scanned with the
/// anchored search, and every survivor is recertified independently.
pub fn enumerate_difference_sets(
    v: u64,
) -> Result<Vec<DifferenceSetCertificate>, DiffsetError> {
    if v == 0 {
        return Err(DiffsetError::InvalidModulus(0));
    }
    let mut out = Vec::new();
    for k in admissible_sizes(v) {
        for set in sets_of_size(v, k) {
            let cert = is_difference_set(v, &set)?
                .expect("anchored search yields only difference sets");
            out.push(cert);
        }
    }
    out.sort();
    Ok(out)
}

/// Search mode for [`find_difference_partitions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Any number of blocks, any admissible size.
    All,
    /// Block sizes restricted to `2..=v-2` and at least three blocks.
    NonTrivialOnly,
}

/// Triviality tag of a difference partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Triviality {
    Trivial,
    NonTrivial,
}

/// A partition of `Z_v` into difference sets, each block carrying its own
/// certificate.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DifferencePartition {
    pub v: u64,
    pub blocks: Vec<DifferenceSetCertificate>,
    pub triviality: Triviality,
}

/// A partition is trivial when some block is a trivial difference set
/// (size at most 1 or at least `v-1`) or there are exactly two blocks.
pub fn classify_triviality(dp: &DifferencePartition) -> Triviality {
    let trivial_block =
        dp.blocks.iter().any(|cert| cert.k <= 1 || cert.k + 1 >= dp.v);
    if trivial_block || dp.blocks.len() == 2 {
        Triviality::Trivial
    } else {
        Triviality::NonTrivial
    }
}

/// One block-library line of a search certificate: how many difference sets
/// of size `k` exist in `Z_v`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct LibraryEntry {
    pub k: u64,
    pub count: usize,
}

/// Outcome of an exhaustive difference-partition search: the size sieve,
/// the block-size multisets that sum to `v`, the block library actually
/// built, and every partition found. An empty `partitions` list together
/// with `exhaustive` is a non-existence certificate.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct DifferencePartitionSearch {
    pub v: u64,
    pub mode: SearchMode,
    pub admissible_sizes: Vec<u64>,
    pub size_multisets: Vec<Vec<u64>>,
    pub library_sizes: Vec<LibraryEntry>,
    pub partitions: Vec<DifferencePartition>,
    pub exhaustive: bool,
}

/// Nondecreasing multisets over `sizes` summing exactly to `target`.
fn size_multisets(sizes: &[u64], target: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(sizes: &[u64], from: usize, left: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        for (offset, &s) in sizes[from..].iter().enumerate() {
            if s > left {
                break;
            }
            current.push(s);
            rec(sizes, from + offset, left - s, current, out);
            current.pop();
        }
    }
    rec(sizes, 0, target, &mut current, &mut out);
    out
}

/// Exhaustive search for partitions of `Z_v` into difference sets.
///
/// The size sieve and multiset arithmetic run first: when no multiset of
/// admissible block sizes passes the mode's block-count requirement, the
/// search short-circuits with an empty library. Otherwise the block library
/// is enumerated for every size that appears in a feasible multiset and an
/// exact-cover search produces every partition.
pub fn find_difference_partitions(
    v: u64,
    mode: SearchMode,
) -> Result<DifferencePartitionSearch, DiffsetError> {
    if v == 0 {
        return Err(DiffsetError::InvalidModulus(0));
    }
    if v > 63 {
        return Err(DiffsetError::SearchTooLarge(v));
    }
    let min_blocks = match mode {
        SearchMode::All => 1,
        SearchMode::NonTrivialOnly => 3,
    };
    let admissible: Vec<u64> = match mode {
        SearchMode::All => admissible_sizes(v),
        SearchMode::NonTrivialOnly => admissible_sizes(v)
            .into_iter()
            .filter(|&k| k >= 2 && k + 2 <= v)
            .collect(),
    };
    let multisets = size_multisets(&admissible, v);
    let needed: BTreeSet<u64> = multisets
        .iter()
        .filter(|m| m.len() >= min_blocks)
        .flat_map(|m| m.iter().copied())
        .collect();

    let mut search = DifferencePartitionSearch {
        v,
        mode,
        admissible_sizes: admissible,
        size_multisets: multisets,
        library_sizes: Vec::new(),
        partitions: Vec::new(),
        exhaustive: true,
    };
    if needed.is_empty() {
        return Ok(search);
    }

    let mut library: BTreeMap<Vec<u64>, DifferenceSetCertificate> = BTreeMap::new();
    for &k in &needed {
        let sets = sets_of_size(v, k);
        search.library_sizes.push(LibraryEntry { k, count: sets.len() });
        for set in sets {
            let cert = is_difference_set(v, &set)?
                .expect("anchored search yields only difference sets");
            library.insert(set, cert);
        }
    }
    let blocks: Vec<&DifferenceSetCertificate> = library.values().collect();
    let masks: Vec<u64> = blocks
        .iter()
        .map(|cert| cert.set.iter().fold(0u64, |acc, &x| acc | 1 << x))
        .collect();
    let universe = if v == 64 { u64::MAX } else { (1u64 << v) - 1 };

    for cover in exact_covers(universe, &masks) {
        if cover.len() < min_blocks {
            continue;
        }
        let mut parts: Vec<DifferenceSetCertificate> =
            cover.iter().map(|&idx| blocks[idx].clone()).collect();
        parts.sort_by_key(|cert| cert.set[0]);
        let mut dp = DifferencePartition { v, blocks: parts, triviality: Triviality::Trivial };
        dp.triviality = classify_triviality(&dp);
        if mode == SearchMode::NonTrivialOnly && dp.triviality != Triviality::NonTrivial {
            continue;
        }
        search.partitions.push(dp);
    }
    search.partitions.sort_by(|a, b| a.blocks.cmp(&b.blocks));
    Ok(search)
}
