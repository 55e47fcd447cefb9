//! Explicit Schur rings over finite cyclic groups `Z_n`.
//!
//! Here the group is written additively as residues `0..n`, so the identity
//! is `0`, the star map is negation, and simple-quantity products are
//! difference-style convolutions of residue sets. A partition of `Z_n` is a
//! Schur partition when `{0}` is a block, every block's negation is a block,
//! and for every pair of blocks the product count function is constant on
//! every block it touches.
//!
//! The module offers two independent enumerators for all Schur partitions of
//! a small `Z_n` (a pruned recursive generator and a merge-closure sweep over
//! all set partitions), plus classification of a verified partition into the
//! classical families: trivial, automorphic, direct product, wedge.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building partitions or classical constructions.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FiniteError {
    #[error("modulus must be at least 1, got {0}")]
    InvalidModulus(u64),
    #[error("residue {value} is out of range for Z_{n}")]
    OutOfRange { value: u64, n: u64 },
    #[error("residue {0} appears in more than one block")]
    Overlap(u64),
    #[error("residue {0} is not covered by any block")]
    Missing(u64),
    #[error("blocks must be nonempty")]
    EmptyBlock,
    #[error("{m} is not a unit mod {n}")]
    NotAUnit { m: u64, n: u64 },
    #[error("subgroup chain requires 1 < k, k | h, h | n, h < n; got k={k}, h={h}, n={n}")]
    BadChain { k: u64, h: u64, n: u64 },
    #[error("inner partition does not contain the order-{k} subgroup as a block union")]
    InnerMissingSubgroup { k: u64 },
    #[error("inner image and quotient restriction disagree at block {block:?}")]
    IncompatibleWedge { block: Vec<u64> },
    #[error("factor moduli must be coprime and greater than 1: {n1} x {n2}")]
    BadFactorization { n1: u64, n2: u64 },
}

/// A partition of `Z_n` into nonempty blocks, held in canonical form: each
/// block sorted ascending, blocks ordered by least element. Construction
/// checks only the partition structure; the Schur axioms are the business of
/// [`verify_partition`], so that a violation is reported as a witness rather
/// than a construction failure.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FinitePartition {
    n: u64,
    blocks: Vec<Vec<u64>>,
}

impl FinitePartition {
    pub fn new(
        n: u64,
        blocks: impl IntoIterator<Item = Vec<u64>>,
    ) -> Result<Self, FiniteError> {
        if n == 0 {
            return Err(FiniteError::InvalidModulus(0));
        }
        let mut seen = vec![false; n as usize];
        let mut normalized = Vec::new();
        for block in blocks {
            if block.is_empty() {
                return Err(FiniteError::EmptyBlock);
            }
            let mut block: Vec<u64> = block;
            block.sort_unstable();
            block.dedup();
            for &value in &block {
                if value >= n {
                    return Err(FiniteError::OutOfRange { value, n });
                }
                if seen[value as usize] {
                    return Err(FiniteError::Overlap(value));
                }
                seen[value as usize] = true;
            }
            normalized.push(block);
        }
        if let Some(missing) = seen.iter().position(|covered| !covered) {
            return Err(FiniteError::Missing(missing as u64));
        }
        normalized.sort();
        Ok(Self { n, blocks: normalized })
    }

    /// The partition into singletons.
    pub fn discrete(n: u64) -> Result<Self, FiniteError> {
        Self::new(n, (0..n).map(|k| vec![k]))
    }

    /// `{0}` plus one block of everything else (equals discrete over `Z_1`
    /// and `Z_2`).
    pub fn trivial(n: u64) -> Result<Self, FiniteError> {
        if n <= 1 {
            return Self::discrete(n);
        }
        Self::new(n, [vec![0], (1..n).collect()])
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<u64>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// The block containing `k`.
    pub fn block_of(&self, k: u64) -> &[u64] {
        self.blocks
            .iter()
            .find(|block| block.binary_search(&k).is_ok())
            .expect("blocks cover every residue")
    }

    /// Whether `set` is a union of blocks.
    pub fn is_block_union(&self, set: &BTreeSet<u64>) -> bool {
        set.iter().all(|&k| self.block_of(k).iter().all(|member| set.contains(member)))
    }

    fn negate_block(&self, block: &[u64]) -> Vec<u64> {
        let mut negated: Vec<u64> =
            block.iter().map(|&k| (self.n - k) % self.n).collect();
        negated.sort_unstable();
        negated
    }

    pub fn to_record(&self) -> PartitionRecord {
        PartitionRecord { n: self.n, classes: self.blocks.clone() }
    }

    pub fn from_record(record: &PartitionRecord) -> Result<Self, FiniteError> {
        Self::new(record.n, record.classes.iter().cloned())
    }
}

impl Serialize for FinitePartition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FinitePartition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let record = PartitionRecord::deserialize(deserializer)?;
        Self::from_record(&record).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for FinitePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            for (j, k) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{k}")?;
            }
        }
        Ok(())
    }
}

/// Wire format `{"n": …, "classes": [[…], …]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PartitionRecord {
    pub n: u64,
    pub classes: Vec<Vec<u64>>,
}

/// Exact structure constants of a verified partition: every nonzero
/// `lambda` with block keys given by least elements, pair-normalized
/// `c <= d`.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FiniteStructureConstants {
    pub n: u64,
    pub blocks: Vec<Vec<u64>>,
    pub constants: Vec<FiniteConstant>,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct FiniteConstant {
    pub c: u64,
    pub d: u64,
    pub e: u64,
    pub lambda: u64,
}

impl FiniteStructureConstants {
    /// The multiplicity of block `e` in the product of blocks `c` and `d`
    /// (all named by least element); zero when absent.
    pub fn lambda(&self, c: u64, d: u64, e: u64) -> u64 {
        let (c, d) = if c <= d { (c, d) } else { (d, c) };
        self.constants
            .binary_search_by_key(&(c, d, e), |entry| (entry.c, entry.d, entry.e))
            .map(|idx| self.constants[idx].lambda)
            .unwrap_or(0)
    }

    pub fn block(&self, id: u64) -> Option<&Vec<u64>> {
        self.blocks.iter().find(|block| block[0] == id)
    }
}

/// Outcome of checking the Schur axioms on a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionCheck {
    Verified(FiniteStructureConstants),
    Refuted(PartitionWitness),
}

impl PartitionCheck {
    pub fn is_verified(&self) -> bool {
        matches!(self, PartitionCheck::Verified(_))
    }
}

/// Concrete witness of the first failing axiom.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum PartitionWitness {
    /// The block containing `0` is not `{0}`.
    MissingIdentityBlock { block: Vec<u64> },
    /// A block whose negation is not a block.
    InverseClosure { block: Vec<u64>, expected: Vec<u64> },
    /// A product count that is not constant on a block: `x` and `y` lie in
    /// the block named by `e` but occur with different multiplicities in the
    /// product of blocks `c` and `d`.
    NonConstant { c: u64, d: u64, e: Vec<u64>, x: u64, x_mult: u64, y: u64, y_mult: u64 },
}

impl fmt::Display for PartitionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionWitness::MissingIdentityBlock { block } => {
                write!(f, "block containing 0 is {block:?}, not {{0}}")
            }
            PartitionWitness::InverseClosure { block, expected } => {
                write!(f, "negation of block {block:?} is {expected:?}, which is not a block")
            }
            PartitionWitness::NonConstant { c, d, e, x, x_mult, y, y_mult } => write!(
                f,
                "product of blocks {c} and {d} is not constant on {e:?}: \
                 {x} occurs {x_mult} times but {y} occurs {y_mult} times"
            ),
        }
    }
}

fn product_counts(n: u64, c: &[u64], d: &[u64]) -> Vec<u64> {
    let mut counts = vec![0u64; n as usize];
    for &a in c {
        for &b in d {
            counts[((a + b) % n) as usize] += 1;
        }
    }
    counts
}

fn constancy_violation(
    counts: &[u64],
    block: &[u64],
    c: u64,
    d: u64,
) -> Option<PartitionWitness> {
    let x = block[0];
    let x_mult = counts[x as usize];
    for &y in &block[1..] {
        let y_mult = counts[y as usize];
        if y_mult != x_mult {
            return Some(PartitionWitness::NonConstant {
                c,
                d,
                e: block.to_vec(),
                x,
                x_mult,
                y,
                y_mult,
            });
        }
    }
    None
}

/// Check the three Schur axioms, in order, returning either the full
/// structure-constant table or the first witness.
pub fn verify_partition(p: &FinitePartition) -> PartitionCheck {
    let zero_block = p.block_of(0);
    if zero_block != [0] {
        return PartitionCheck::Refuted(PartitionWitness::MissingIdentityBlock {
            block: zero_block.to_vec(),
        });
    }
    for block in p.blocks() {
        let expected = p.negate_block(block);
        if p.block_of(expected[0]) != expected.as_slice() {
            return PartitionCheck::Refuted(PartitionWitness::InverseClosure {
                block: block.clone(),
                expected,
            });
        }
    }
    let mut constants = Vec::new();
    for (i, c) in p.blocks().iter().enumerate() {
        for d in &p.blocks()[i..] {
            let counts = product_counts(p.n(), c, d);
            for e in p.blocks() {
                if let Some(witness) = constancy_violation(&counts, e, c[0], d[0]) {
                    return PartitionCheck::Refuted(witness);
                }
                let lambda = counts[e[0] as usize];
                if lambda > 0 {
                    constants.push(FiniteConstant { c: c[0], d: d[0], e: e[0], lambda });
                }
            }
        }
    }
    constants.sort_by_key(|entry| (entry.c, entry.d, entry.e));
    PartitionCheck::Verified(FiniteStructureConstants {
        n: p.n(),
        blocks: p.blocks().to_vec(),
        constants,
    })
}

/// Orbit partition of the multiplicative subgroup generated by the given
/// units acting on `Z_n`.
pub fn automorphic_partition(n: u64, gens: &[u64]) -> Result<FinitePartition, FiniteError> {
    if n == 0 {
        return Err(FiniteError::InvalidModulus(0));
    }
    for &g in gens {
        if (g % n).gcd(&n) != 1 {
            return Err(FiniteError::NotAUnit { m: g % n, n });
        }
    }
    let subgroup = unit_closure(n, gens.iter().map(|&g| g % n));
    let mut assigned = vec![false; n as usize];
    let mut blocks = Vec::new();
    for k in 0..n {
        if assigned[k as usize] {
            continue;
        }
        let orbit: BTreeSet<u64> = subgroup.iter().map(|&u| u * k % n).collect();
        for &member in &orbit {
            assigned[member as usize] = true;
        }
        blocks.push(orbit.into_iter().collect());
    }
    FinitePartition::new(n, blocks)
}

fn unit_closure(n: u64, gens: impl IntoIterator<Item = u64>) -> BTreeSet<u64> {
    let gens: Vec<u64> = gens.into_iter().collect();
    let mut elements = BTreeSet::from([1 % n]);
    let mut frontier: Vec<u64> = elements.iter().copied().collect();
    while let Some(x) = frontier.pop() {
        for &g in &gens {
            let y = x * g % n;
            if elements.insert(y) {
                frontier.push(y);
            }
        }
    }
    elements
}

/// Every subgroup of the unit group `(Z/n)^*`, each as a sorted element
/// list, ordered by size then contents.
pub fn unit_subgroups(n: u64) -> Vec<Vec<u64>> {
    let units: Vec<u64> = crate::aut::units(n);
    let trivial: BTreeSet<u64> = BTreeSet::from([1 % n]);
    let mut seen = BTreeSet::from([trivial.clone()]);
    let mut frontier = vec![trivial];
    while let Some(h) = frontier.pop() {
        for &u in &units {
            if h.contains(&u) {
                continue;
            }
            let extended = unit_closure(n, h.iter().copied().chain([u]));
            if seen.insert(extended.clone()) {
                frontier.push(extended);
            }
        }
    }
    let mut out: Vec<Vec<u64>> =
        seen.into_iter().map(|set| set.into_iter().collect()).collect();
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    out
}

/// All Schur partitions of `Z_n`, by pruned recursive generation.
///
/// The search fixes `{0}`, then repeatedly chooses the block of the least
/// unassigned residue. Each chosen block is immediately paired with its
/// negation (carved as a sibling when distinct), and every completed pair of
/// blocks is checked for constant product counts on all completed blocks, so
/// the tree is pruned well before whole partitions are formed. Output is in
/// canonical order.
pub fn enumerate_schur_rings(n: u64) -> Result<Vec<FinitePartition>, FiniteError> {
    if n == 0 {
        return Err(FiniteError::InvalidModulus(0));
    }
    let mut blocks: Vec<Vec<u64>> = vec![vec![0]];
    let unassigned: BTreeSet<u64> = (1..n).collect();
    let mut out = Vec::new();
    extend_partition(n, &mut blocks, &unassigned, &mut out);
    out.sort();
    Ok(out)
}

fn extend_partition(
    n: u64,
    blocks: &mut Vec<Vec<u64>>,
    unassigned: &BTreeSet<u64>,
    out: &mut Vec<FinitePartition>,
) {
    let Some(&least) = unassigned.iter().next() else {
        out.push(
            FinitePartition::new(n, blocks.iter().cloned())
                .expect("search states are partitions"),
        );
        return;
    };
    let rest: Vec<u64> = unassigned.iter().copied().filter(|&k| k != least).collect();
    for mask in 0u32..(1 << rest.len()) {
        let mut block = vec![least];
        block.extend(
            rest.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, &k)| k),
        );
        let negated: Vec<u64> = {
            let mut v: Vec<u64> = block.iter().map(|&k| (n - k) % n).collect();
            v.sort_unstable();
            v
        };
        let mut added = vec![block.clone()];
        if negated != block {
            if !negated.iter().all(|k| unassigned.contains(k) && !block.contains(k)) {
                continue;
            }
            added.push(negated);
        }
        let base = blocks.len();
        blocks.extend(added.iter().cloned());
        if partial_products_consistent(n, blocks, base) {
            let remaining: BTreeSet<u64> = unassigned
                .iter()
                .copied()
                .filter(|k| !added.iter().any(|b| b.contains(k)))
                .collect();
            extend_partition(n, blocks, &remaining, out);
        }
        blocks.truncate(base);
    }
}

/// Constancy of product counts over the completed blocks, restricted to the
/// checks newly enabled by blocks at indices `>= base`: new pairs against
/// every block, old pairs against the new blocks only.
fn partial_products_consistent(n: u64, blocks: &[Vec<u64>], base: usize) -> bool {
    for i in 0..blocks.len() {
        for j in i..blocks.len() {
            let counts = product_counts(n, &blocks[i], &blocks[j]);
            let targets: &[Vec<u64>] =
                if i >= base || j >= base { blocks } else { &blocks[base..] };
            for e in targets {
                if constancy_violation(&counts, e, blocks[i][0], blocks[j][0]).is_some() {
                    return false;
                }
            }
        }
    }
    true
}

/// Every set partition of `{0..n-1}`, generated by restricted growth (each
/// element joins an existing block or opens a new one). Counts grow as the
/// Bell numbers; intended for small `n`.
pub fn all_set_partitions(n: u64) -> Vec<FinitePartition> {
    fn grow(n: u64, next: u64, blocks: &mut Vec<Vec<u64>>, out: &mut Vec<FinitePartition>) {
        if next == n {
            out.push(
                FinitePartition::new(n, blocks.iter().cloned())
                    .expect("growth states are partitions"),
            );
            return;
        }
        for i in 0..blocks.len() {
            blocks[i].push(next);
            grow(n, next + 1, blocks, out);
            blocks[i].pop();
        }
        blocks.push(vec![next]);
        grow(n, next + 1, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    if n > 0 {
        grow(n, 1, &mut vec![vec![0]], &mut out);
    }
    out
}

/// All Schur partitions of `Z_n`, by merge closure.
///
/// Every set partition is used as a seed: the residue `0` is split into its
/// own block, then blocks are merged, one violation witness at a time, until
/// [`verify_partition`] accepts. Schur partitions are fixed points of the
/// repair loop and every partition is a seed, so the output set equals the
/// set of Schur partitions regardless of the merge choices; the specific
/// rules below only decide where non-Schur seeds land.
pub fn enumerate_by_merge_closure(n: u64) -> Result<Vec<FinitePartition>, FiniteError> {
    if n == 0 {
        return Err(FiniteError::InvalidModulus(0));
    }
    let mut found = BTreeSet::new();
    for seed in all_set_partitions(n) {
        found.insert(merge_until_schur(split_identity(&seed)));
    }
    Ok(found.into_iter().collect())
}

fn split_identity(p: &FinitePartition) -> FinitePartition {
    let mut blocks: Vec<Vec<u64>> = Vec::new();
    for block in p.blocks() {
        let rest: Vec<u64> = block.iter().copied().filter(|&k| k != 0).collect();
        if rest.len() < block.len() {
            blocks.push(vec![0]);
        }
        if !rest.is_empty() {
            blocks.push(rest);
        }
    }
    FinitePartition::new(p.n(), blocks).expect("splitting preserves the partition")
}

fn merge_until_schur(mut p: FinitePartition) -> FinitePartition {
    loop {
        let witness = match verify_partition(&p) {
            PartitionCheck::Verified(_) => return p,
            PartitionCheck::Refuted(witness) => witness,
        };
        p = match witness {
            // Unreachable after split_identity: no merge below touches {0}.
            PartitionWitness::MissingIdentityBlock { .. } => {
                return FinitePartition::trivial(p.n()).expect("valid modulus");
            }
            PartitionWitness::InverseClosure { block, expected } => {
                let members: BTreeSet<u64> =
                    block.iter().chain(&expected).copied().collect();
                merge_blocks_meeting(&p, &members)
            }
            PartitionWitness::NonConstant { c, d, e, .. } => {
                let counts =
                    product_counts(p.n(), p.block_of(c), p.block_of(d));
                let reference = counts[e[0] as usize];
                let partner = (1..p.n())
                    .find(|&g| !e.contains(&g) && counts[g as usize] != reference)
                    .or_else(|| (1..p.n()).find(|&g| !e.contains(&g)))
                    .expect("a second nonzero block exists when constancy fails");
                let members: BTreeSet<u64> =
                    e.iter().copied().chain([partner]).collect();
                merge_blocks_meeting(&p, &members)
            }
        };
    }
}

fn merge_blocks_meeting(p: &FinitePartition, members: &BTreeSet<u64>) -> FinitePartition {
    let mut merged: BTreeSet<u64> = BTreeSet::new();
    let mut blocks = Vec::new();
    for block in p.blocks() {
        if block.iter().any(|k| members.contains(k)) {
            merged.extend(block.iter().copied());
        } else {
            blocks.push(block.clone());
        }
    }
    blocks.push(merged.into_iter().collect());
    FinitePartition::new(p.n(), blocks).expect("merging preserves the partition")
}

/// Classification of a verified partition into the classical families.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraditionalTag {
    /// `{0}` plus one block.
    Trivial,
    /// Orbits of a unit subgroup; `generators` is a smallest generating set.
    Automorphic { generators: Vec<u64> },
    /// Blockwise product over a coprime splitting `n = n1 * n2`.
    DirectProduct { n1: u64, n2: u64, left: FinitePartition, right: FinitePartition },
    /// Wedge along a subgroup chain with `|K| = k`, `|H| = h`.
    Wedge { k: u64, h: u64, inner: FinitePartition, quotient: FinitePartition },
    NonTraditional,
}

impl TraditionalTag {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TraditionalTag::Trivial => "trivial",
            TraditionalTag::Automorphic { .. } => "automorphic",
            TraditionalTag::DirectProduct { .. } => "direct-product",
            TraditionalTag::Wedge { .. } => "wedge",
            TraditionalTag::NonTraditional => "non-traditional",
        }
    }
}

/// Classify a partition, trying trivial, automorphic, direct product, and
/// wedge forms in that fixed order; overlapping forms report the first hit.
pub fn classify_traditional(p: &FinitePartition) -> TraditionalTag {
    let n = p.n();
    if *p == FinitePartition::trivial(n).expect("valid modulus") {
        return TraditionalTag::Trivial;
    }
    if let Some(generators) = find_automorphic_witness(p) {
        return TraditionalTag::Automorphic { generators };
    }
    if let Some(tag) = find_direct_product(p) {
        return tag;
    }
    if let Some(tag) = find_wedge(p) {
        return tag;
    }
    TraditionalTag::NonTraditional
}

fn find_automorphic_witness(p: &FinitePartition) -> Option<Vec<u64>> {
    let n = p.n();
    for subgroup in unit_subgroups(n) {
        if automorphic_partition(n, &subgroup).expect("subgroup members are units") == *p {
            return Some(minimal_generators(n, &subgroup));
        }
    }
    None
}

/// A smallest generating subset of a unit subgroup, preferring small
/// residues; the empty set generates the trivial subgroup.
fn minimal_generators(n: u64, subgroup: &[u64]) -> Vec<u64> {
    let target: BTreeSet<u64> = subgroup.iter().copied().collect();
    let candidates: Vec<u64> =
        subgroup.iter().copied().filter(|&u| u != 1 % n).collect();
    for size in 0..=candidates.len() {
        let mut found = None;
        subsets_of_size(&candidates, size, &mut |subset| {
            if found.is_none() && unit_closure(n, subset.iter().copied()) == target {
                found = Some(subset.to_vec());
            }
        });
        if let Some(gens) = found {
            return gens;
        }
    }
    Vec::new()
}

fn subsets_of_size(items: &[u64], size: usize, visit: &mut impl FnMut(&[u64])) {
    fn recurse(
        items: &[u64],
        start: usize,
        current: &mut Vec<u64>,
        size: usize,
        visit: &mut impl FnMut(&[u64]),
    ) {
        if current.len() == size {
            visit(current);
            return;
        }
        for i in start..items.len() {
            current.push(items[i]);
            recurse(items, i + 1, current, size, visit);
            current.pop();
        }
    }
    recurse(items, 0, &mut Vec::new(), size, visit);
}

/// The order-`d` subgroup of `Z_n`: multiples of `n / d`.
fn cyclic_subgroup(n: u64, d: u64) -> BTreeSet<u64> {
    (0..d).map(|j| j * (n / d)).collect()
}

/// Restriction of a partition to the order-`d` subgroup of `Z_n`, rewritten
/// as a partition of `Z_d` via `j*(n/d) <-> j`. Requires the subgroup to be
/// a block union.
fn restrict_to_subgroup(p: &FinitePartition, d: u64) -> Option<FinitePartition> {
    let n = p.n();
    let subgroup = cyclic_subgroup(n, d);
    if !p.is_block_union(&subgroup) {
        return None;
    }
    let step = n / d;
    let blocks: Vec<Vec<u64>> = p
        .blocks()
        .iter()
        .filter(|block| subgroup.contains(&block[0]))
        .map(|block| block.iter().map(|&x| x / step).collect())
        .collect();
    Some(FinitePartition::new(d, blocks).expect("restriction covers Z_d"))
}

fn find_direct_product(p: &FinitePartition) -> Option<TraditionalTag> {
    let n = p.n();
    for n1 in 2..n {
        if n % n1 != 0 {
            continue;
        }
        let n2 = n / n1;
        if n2 < 2 || n1.gcd(&n2) != 1 {
            continue;
        }
        let Some(left) = restrict_to_subgroup(p, n1) else { continue };
        let Some(right) = restrict_to_subgroup(p, n2) else { continue };
        if direct_product_partition(&left, &right, n) == *p {
            return Some(TraditionalTag::DirectProduct { n1, n2, left, right });
        }
    }
    None
}

/// Blockwise product partition of `Z_{n}` from partitions of the coprime
/// factors, blocks being sums of embedded factor blocks.
fn direct_product_partition(
    left: &FinitePartition,
    right: &FinitePartition,
    n: u64,
) -> FinitePartition {
    let (n1, n2) = (left.n(), right.n());
    let mut blocks = Vec::new();
    for c in left.blocks() {
        for d in right.blocks() {
            let mut block = Vec::new();
            for &x in c {
                for &y in d {
                    block.push((x * n2 + y * n1) % n);
                }
            }
            blocks.push(block);
        }
    }
    FinitePartition::new(n, blocks).expect("coprime embeddings tile Z_n")
}

fn find_wedge(p: &FinitePartition) -> Option<TraditionalTag> {
    let n = p.n();
    let divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    for &k in &divisors {
        if k < 2 {
            continue;
        }
        for &h in &divisors {
            if h % k != 0 || h >= n {
                continue;
            }
            if !p.is_block_union(&cyclic_subgroup(n, k)) {
                continue;
            }
            let Some(inner) = restrict_to_subgroup(p, h) else { continue };
            let coset_step = n / k;
            let outside_ok = p.blocks().iter().all(|block| {
                cyclic_subgroup(n, h).contains(&block[0])
                    || is_coset_union(block, n, coset_step)
            });
            if !outside_ok {
                continue;
            }
            let quotient = quotient_partition(p, coset_step);
            return Some(TraditionalTag::Wedge { k, h, inner, quotient });
        }
    }
    None
}

/// Whether a block is a union of cosets of the subgroup `step * Z_n`.
fn is_coset_union(block: &[u64], n: u64, step: u64) -> bool {
    let members: BTreeSet<u64> = block.iter().copied().collect();
    block.iter().all(|&x| members.contains(&((x + step) % n)))
}

/// Image partition on `Z_n / K` for `K` of order `n / q`, `q = coset_step`.
fn quotient_partition(p: &FinitePartition, q: u64) -> FinitePartition {
    let mut blocks: BTreeSet<Vec<u64>> = BTreeSet::new();
    for block in p.blocks() {
        let image: BTreeSet<u64> = block.iter().map(|&x| x % q).collect();
        blocks.insert(image.into_iter().collect());
    }
    FinitePartition::new(q, blocks).expect("images cover the quotient")
}

/// Wedge of a partition of `Z_h` (embedded as the order-`h` subgroup) with a
/// partition of the quotient `Z_{n/k}`, along the chain of subgroup orders
/// `1 < k <= h < n`: inner blocks stay, and quotient blocks outside the
/// image of the inner subgroup pull back to full unions of `K`-cosets.
pub fn wedge_partition(
    inner: &FinitePartition,
    quotient: &FinitePartition,
    n: u64,
    k: u64,
    h: u64,
) -> Result<FinitePartition, FiniteError> {
    if k < 2 || h % k != 0 || n % h != 0 || h >= n || inner.n() != h || quotient.n() != n / k
    {
        return Err(FiniteError::BadChain { k, h, n });
    }
    // K inside the inner copy of Z_h is the order-k subgroup.
    if !inner.is_block_union(&cyclic_subgroup(h, k)) {
        return Err(FiniteError::InnerMissingSubgroup { k });
    }
    let q = n / k;
    let embed = n / h;
    // The inner image in the quotient must match the quotient's own blocks
    // on the shared subgroup H/K.
    let image_subgroup = cyclic_subgroup(q, h / k);
    let inner_image: BTreeSet<Vec<u64>> = inner
        .blocks()
        .iter()
        .map(|block| {
            let image: BTreeSet<u64> = block.iter().map(|&j| j * embed % q).collect();
            image.into_iter().collect::<Vec<u64>>()
        })
        .collect();
    for block in quotient.blocks() {
        let inside = image_subgroup.contains(&block[0]);
        if inside && !inner_image.contains(block) {
            return Err(FiniteError::IncompatibleWedge { block: block.clone() });
        }
    }
    for block in &inner_image {
        if quotient.blocks().iter().all(|q_block| q_block != block) {
            return Err(FiniteError::IncompatibleWedge { block: block.clone() });
        }
    }
    let mut blocks: Vec<Vec<u64>> =
        inner.blocks().iter().map(|b| b.iter().map(|&j| j * embed).collect()).collect();
    for block in quotient.blocks() {
        if image_subgroup.contains(&block[0]) {
            continue;
        }
        blocks.push((0..n).filter(|x| block.contains(&(x % q))).collect());
    }
    FinitePartition::new(n, blocks)
}
