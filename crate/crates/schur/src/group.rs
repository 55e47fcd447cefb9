//! Exact arithmetic in the rational group algebra of `Z x Z_n`.
//!
//! The group is written multiplicatively with a free generator `z` and a
//! torsion generator `a` of order `n`, so every element is `z^t a^k` with
//! `t` an integer and `k` a residue mod `n`. Setting `n = 1` collapses the
//! torsion factor and the same code computes in `F[Z]`; restricting to
//! elements with `t = 0` computes in `F[Z_n]`. One arithmetic core therefore
//! serves the free group, the finite cyclic group, and their product.
//!
//! Algebra elements are finitely supported maps from group elements to exact
//! rational coefficients. There is no floating point anywhere in this crate:
//! coefficients are [`Rational`] (arbitrary-precision integer pairs in lowest
//! terms), and the multiset counts used by the verification layers are exact
//! unsigned integers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational coefficient type used throughout the crate.
pub type Rational = BigRational;

/// Errors raised by group-algebra operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GroupError {
    /// The torsion order must be at least 1 (`n = 1` encodes plain `Z`).
    #[error("torsion order must be at least 1, got {0}")]
    InvalidModulus(u64),
    /// Two operands live over different groups.
    #[error("context mismatch: Z x Z_{left} vs Z x Z_{right}")]
    ContextMismatch { left: u64, right: u64 },
    /// The operation needs a nonempty subset.
    #[error("operation requires a nonempty subset")]
    EmptySubset,
    /// A serialized coefficient failed to parse.
    #[error("malformed rational coefficient: {0}")]
    BadCoefficient(String),
}

/// The ambient group `Z x Z_n`, identified by its torsion order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GroupContext {
    n: u64,
}

impl GroupContext {
    /// Context for `Z x Z_n`. `n = 1` encodes the free group `Z` itself.
    pub fn new(n: u64) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidModulus(0));
        }
        Ok(Self { n })
    }

    /// Torsion order `n`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Reduce an integer to the canonical residue in `0..n`.
    pub fn reduce(&self, k: i64) -> u64 {
        (k as i128).rem_euclid(self.n as i128) as u64
    }

    /// The element `z^t a^k`, with `k` reduced mod `n`.
    pub fn element(&self, t: i64, k: i64) -> GroupElement {
        GroupElement { t, k: self.reduce(k) }
    }

    /// The group identity.
    pub fn identity(&self) -> GroupElement {
        GroupElement { t: 0, k: 0 }
    }

    /// Group multiplication.
    pub fn mul(&self, g: GroupElement, h: GroupElement) -> GroupElement {
        GroupElement {
            t: g.t + h.t,
            k: ((g.k as i128 + h.k as i128) % self.n as i128) as u64,
        }
    }

    /// Group inverse.
    pub fn inv(&self, g: GroupElement) -> GroupElement {
        self.element(-g.t, -(g.k as i64))
    }

    /// The power `g^e` for any integer `e`.
    pub fn pow(&self, g: GroupElement, e: i64) -> GroupElement {
        let t = (g.t as i128)
            .checked_mul(e as i128)
            .and_then(|t| i64::try_from(t).ok())
            .expect("free exponent out of range");
        let k = ((g.k as i128) * (e as i128)).rem_euclid(self.n as i128) as u64;
        GroupElement { t, k }
    }

    /// All torsion elements `a^k`, in residue order.
    pub fn torsion(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.n).map(|k| GroupElement { t: 0, k })
    }

    pub(crate) fn require_same(&self, other: &GroupContext) -> Result<(), GroupError> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(GroupError::ContextMismatch { left: self.n, right: other.n })
        }
    }
}

/// A group element `z^t a^k`. Ordering is lexicographic on `(t, k)`, which is
/// the canonical term order used for serialization and for class identifiers.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct GroupElement {
    /// Exponent of the free generator `z`.
    pub t: i64,
    /// Exponent of the torsion generator `a`, reduced mod `n`.
    pub k: u64,
}

impl GroupElement {
    /// Whether this is the identity.
    pub fn is_identity(&self) -> bool {
        self.t == 0 && self.k == 0
    }

    /// Whether the element lies in the torsion subgroup `Z_n`.
    pub fn is_torsion(&self) -> bool {
        self.t == 0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.t, self.k) {
            (0, 0) => write!(f, "1"),
            (0, k) => write!(f, "a^{k}"),
            (t, 0) => write!(f, "z^{t}"),
            (t, k) => write!(f, "z^{t}a^{k}"),
        }
    }
}

/// A finitely supported element of the rational group algebra `F[Z x Z_n]`.
///
/// Zero coefficients are never stored; the zero element has an empty term
/// map. Terms iterate in the canonical `(t, k)` order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraElement {
    ctx: GroupContext,
    terms: BTreeMap<GroupElement, Rational>,
}

impl AlgebraElement {
    /// The zero element.
    pub fn zero(ctx: GroupContext) -> Self {
        Self { ctx, terms: BTreeMap::new() }
    }

    /// The multiplicative identity `1`.
    pub fn one(ctx: GroupContext) -> Self {
        Self::monomial(ctx, ctx.identity(), Rational::one())
    }

    /// A single term `c * g`.
    pub fn monomial(ctx: GroupContext, g: GroupElement, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(ctx.element(g.t, g.k as i64), c);
        }
        Self { ctx, terms }
    }

    /// Sum of `c * g` over the given terms; repeated elements accumulate.
    pub fn from_terms(
        ctx: GroupContext,
        terms: impl IntoIterator<Item = (GroupElement, Rational)>,
    ) -> Self {
        let mut acc = Self::zero(ctx);
        for (g, c) in terms {
            acc.accumulate(ctx.element(g.t, g.k as i64), c);
        }
        acc
    }

    fn accumulate(&mut self, g: GroupElement, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(g).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&g);
        }
    }

    /// Ambient group.
    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    /// Terms in canonical `(t, k)` order.
    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &Rational)> {
        self.terms.iter()
    }

    /// Coefficient of `g` (zero when absent).
    pub fn coeff(&self, g: &GroupElement) -> Rational {
        self.terms.get(g).cloned().unwrap_or_else(Rational::zero)
    }

    /// Support as a finite subset.
    pub fn support(&self) -> FiniteSubset {
        FiniteSubset { ctx: self.ctx, elements: self.terms.keys().copied().collect() }
    }

    /// Number of terms.
    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, GroupError> {
        self.ctx.require_same(&rhs.ctx)?;
        let mut out = self.clone();
        for (g, c) in rhs.terms() {
            out.accumulate(*g, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(g, c)| (*g, -c.clone())).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, GroupError> {
        self.add(&rhs.neg())
    }

    /// Scalar multiple.
    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.ctx);
        }
        Self {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(g, x)| (*g, x * c)).collect(),
        }
    }

    /// Convolution product: the coefficient of `g` in `x * y` is
    /// `sum_h x_h * y_{h^-1 g}`. Finite supports keep the sum finite.
    pub fn convolve(&self, rhs: &Self) -> Result<Self, GroupError> {
        self.ctx.require_same(&rhs.ctx)?;
        let mut out = Self::zero(self.ctx);
        for (g, c) in self.terms() {
            for (h, d) in rhs.terms() {
                out.accumulate(self.ctx.mul(*g, *h), c * d);
            }
        }
        Ok(out)
    }

    /// Hadamard (pointwise) product. On simple quantities this realizes set
    /// intersection: `C-bar o D-bar = (C n D)-bar`.
    pub fn hadamard(&self, rhs: &Self) -> Result<Self, GroupError> {
        self.ctx.require_same(&rhs.ctx)?;
        let mut out = Self::zero(self.ctx);
        for (g, c) in self.terms() {
            if let Some(d) = rhs.terms.get(g) {
                out.accumulate(*g, c * d);
            }
        }
        Ok(out)
    }

    /// Star involution `x* = sum x_g g^-1`.
    pub fn star(&self) -> Self {
        Self {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(g, c)| (self.ctx.inv(*g), c.clone())).collect(),
        }
    }

    /// Frobenius map `x^(m) = sum x_g g^m`, defined for any integer `m`.
    /// Colliding images accumulate; `m = -1` recovers the star involution,
    /// and `x^(mk) = (x^(m))^(k)` for all integers.
    pub fn frobenius(&self, m: i64) -> Self {
        let mut out = Self::zero(self.ctx);
        for (g, c) in self.terms() {
            out.accumulate(self.ctx.pow(*g, m), c.clone());
        }
        out
    }

    /// Image under the coordinate projection `a -> 1` (a Cayley map onto the
    /// free factor, kept embedded in the same ambient group).
    pub fn project_free(&self) -> Self {
        let mut out = Self::zero(self.ctx);
        for (g, c) in self.terms() {
            out.accumulate(GroupElement { t: g.t, k: 0 }, c.clone());
        }
        out
    }

    /// Image under the coordinate projection `z -> 1` onto the torsion factor.
    pub fn project_torsion(&self) -> Self {
        let mut out = Self::zero(self.ctx);
        for (g, c) in self.terms() {
            out.accumulate(GroupElement { t: 0, k: g.k }, c.clone());
        }
        out
    }

    /// Serializable record with exact string-encoded coefficients.
    pub fn to_record(&self) -> AlgebraRecord {
        AlgebraRecord {
            n: self.ctx.n(),
            terms: self
                .terms()
                .map(|(g, c)| TermRecord {
                    t: g.t,
                    k: g.k,
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }

    /// Rebuild from a record, reducing residues and coefficients.
    pub fn from_record(record: &AlgebraRecord) -> Result<Self, GroupError> {
        let ctx = GroupContext::new(record.n)?;
        let mut out = Self::zero(ctx);
        for term in &record.terms {
            let num: BigInt = term
                .num
                .parse()
                .map_err(|_| GroupError::BadCoefficient(term.num.clone()))?;
            let den: BigInt = term
                .den
                .parse()
                .map_err(|_| GroupError::BadCoefficient(term.den.clone()))?;
            if den.is_zero() {
                return Err(GroupError::BadCoefficient(format!("{}/{}", term.num, term.den)));
            }
            out.accumulate(ctx.element(term.t, term.k as i64), Rational::new(num, den));
        }
        Ok(out)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{g}")?;
            } else {
                write!(f, "{c}*{g}")?;
            }
        }
        Ok(())
    }
}

/// Serialized form of an algebra element: `{n, terms: [{t, k, num, den}]}`
/// with terms in canonical `(t, k)` order and coefficients in lowest terms.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AlgebraRecord {
    pub n: u64,
    pub terms: Vec<TermRecord>,
}

/// One serialized term. Coefficients are decimal strings so that arbitrary
/// precision survives the round trip exactly.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TermRecord {
    pub t: i64,
    pub k: u64,
    pub num: String,
    pub den: String,
}

/// A finite subset of `Z x Z_n`, stored in canonical element order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct FiniteSubset {
    ctx: GroupContext,
    elements: BTreeSet<GroupElement>,
}

impl FiniteSubset {
    pub fn new(ctx: GroupContext, elements: impl IntoIterator<Item = GroupElement>) -> Self {
        Self {
            ctx,
            elements: elements.into_iter().map(|g| ctx.element(g.t, g.k as i64)).collect(),
        }
    }

    pub fn empty(ctx: GroupContext) -> Self {
        Self { ctx, elements: BTreeSet::new() }
    }

    pub fn singleton(ctx: GroupContext, g: GroupElement) -> Self {
        Self::new(ctx, [g])
    }

    /// The full coset `z^t Z_n`.
    pub fn torsion_coset(ctx: GroupContext, t: i64) -> Self {
        Self { ctx, elements: (0..ctx.n()).map(|k| GroupElement { t, k }).collect() }
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.contains(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> {
        self.elements.iter()
    }

    /// Least element under the canonical `(t, k)` order; used as class id.
    pub fn first(&self) -> Option<GroupElement> {
        self.elements.iter().next().copied()
    }

    pub fn is_subset_of(&self, other: &FiniteSubset) -> bool {
        self.elements.is_subset(&other.elements)
    }

    pub fn union(&self, other: &FiniteSubset) -> Result<FiniteSubset, GroupError> {
        self.ctx.require_same(&other.ctx)?;
        Ok(Self {
            ctx: self.ctx,
            elements: self.elements.union(&other.elements).copied().collect(),
        })
    }

    pub fn intersection(&self, other: &FiniteSubset) -> Result<FiniteSubset, GroupError> {
        self.ctx.require_same(&other.ctx)?;
        Ok(Self {
            ctx: self.ctx,
            elements: self.elements.intersection(&other.elements).copied().collect(),
        })
    }

    pub fn without(&self, g: &GroupElement) -> FiniteSubset {
        let mut elements = self.elements.clone();
        elements.remove(g);
        Self { ctx: self.ctx, elements }
    }

    pub fn inserting(&self, g: GroupElement) -> FiniteSubset {
        let mut elements = self.elements.clone();
        elements.insert(self.ctx.element(g.t, g.k as i64));
        Self { ctx: self.ctx, elements }
    }

    /// The simple quantity `C-bar = sum_{g in C} g`.
    pub fn simple(&self) -> AlgebraElement {
        AlgebraElement::from_terms(
            self.ctx,
            self.elements.iter().map(|g| (*g, Rational::one())),
        )
    }

    /// Elementwise inverse `C* = {g^-1}`.
    pub fn star(&self) -> FiniteSubset {
        Self {
            ctx: self.ctx,
            elements: self.elements.iter().map(|g| self.ctx.inv(*g)).collect(),
        }
    }

    /// Left translate `gC`.
    pub fn translate(&self, g: GroupElement) -> FiniteSubset {
        Self {
            ctx: self.ctx,
            elements: self.elements.iter().map(|h| self.ctx.mul(g, *h)).collect(),
        }
    }

    /// Elementwise power `{g^m}`.
    pub fn pow_elements(&self, m: i64) -> FiniteSubset {
        Self {
            ctx: self.ctx,
            elements: self.elements.iter().map(|g| self.ctx.pow(*g, m)).collect(),
        }
    }

    /// Exact product multiset of `C * D`: for each `g`, the number of ordered
    /// pairs `(c, d)` with `cd = g`. This is the integer backbone behind
    /// structure-constant verification.
    pub fn product_counts(
        &self,
        other: &FiniteSubset,
    ) -> Result<BTreeMap<GroupElement, u64>, GroupError> {
        self.ctx.require_same(&other.ctx)?;
        let mut counts = BTreeMap::new();
        for g in &self.elements {
            for h in &other.elements {
                *counts.entry(self.ctx.mul(*g, *h)).or_insert(0) += 1;
            }
        }
        Ok(counts)
    }

    /// The stabilizer `{g : gC = C}` of a nonempty finite subset. Any
    /// stabilizing element must fix the finite set of free exponents of `C`,
    /// so it has `t = 0`; only torsion candidates are tested.
    pub fn stabilizer(&self) -> Result<FiniteSubset, GroupError> {
        if self.is_empty() {
            return Err(GroupError::EmptySubset);
        }
        let hits = self
            .ctx
            .torsion()
            .filter(|g| self.translate(*g) == *self)
            .collect::<Vec<_>>();
        Ok(FiniteSubset::new(self.ctx, hits))
    }

    /// Whether the subset is a subgroup of `Z x Z_n`. Finite subgroups lie in
    /// the torsion factor, so this is cheap.
    pub fn is_subgroup(&self) -> bool {
        if !self.contains(&self.ctx.identity()) {
            return false;
        }
        self.elements.iter().all(|g| {
            self.contains(&self.ctx.inv(*g))
                && self.elements.iter().all(|h| self.contains(&self.ctx.mul(*g, *h)))
        })
    }

    pub fn to_vec(&self) -> Vec<GroupElement> {
        self.elements.iter().copied().collect()
    }
}

impl Serialize for FiniteSubset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.elements.iter())
    }
}

impl fmt::Display for FiniteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, g) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(n: u64) -> GroupContext {
        GroupContext::new(n).unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn simple(ctx: GroupContext, elems: &[(i64, i64)]) -> AlgebraElement {
        FiniteSubset::new(ctx, elems.iter().map(|&(t, k)| ctx.element(t, k))).simple()
    }

    #[test]
    fn convolve_inverse_monomials_cancel_to_identity() {
        let c = ctx(4);
        let x = AlgebraElement::monomial(c, c.element(1, 1), q(1));
        let y = AlgebraElement::monomial(c, c.element(-1, -1), q(1));
        assert_eq!(x.convolve(&y).unwrap(), AlgebraElement::one(c));
    }

    #[test]
    fn convolve_squares_torsion_simple_quantity() {
        // Over Z_4, ({a, a^2, a^3})^2 expands to 3*1 + 2a + 2a^2 + 2a^3.
        let c = ctx(4);
        let x = simple(c, &[(0, 1), (0, 2), (0, 3)]);
        let sq = x.convolve(&x).unwrap();
        let expected = AlgebraElement::from_terms(
            c,
            [
                (c.element(0, 0), q(3)),
                (c.element(0, 1), q(2)),
                (c.element(0, 2), q(2)),
                (c.element(0, 3), q(2)),
            ],
        );
        assert_eq!(sq, expected);
    }

    #[test]
    fn convolve_context_mismatch_is_rejected() {
        let x = AlgebraElement::one(ctx(3));
        let y = AlgebraElement::one(ctx(5));
        assert_eq!(
            x.convolve(&y),
            Err(GroupError::ContextMismatch { left: 3, right: 5 })
        );
    }

    #[test]
    fn hadamard_intersects_simple_quantities() {
        let c = ctx(6);
        let x = simple(c, &[(0, 1), (0, 2)]);
        let y = simple(c, &[(0, 2), (0, 3)]);
        assert_eq!(x.hadamard(&y).unwrap(), simple(c, &[(0, 2)]));
    }

    #[test]
    fn hadamard_scales_matching_terms() {
        let c = ctx(5);
        let x = AlgebraElement::from_terms(
            c,
            [(c.element(0, 1), q(2)), (c.element(1, 0), q(3))],
        );
        let y = AlgebraElement::monomial(c, c.element(0, 1), q(5));
        assert_eq!(
            x.hadamard(&y).unwrap(),
            AlgebraElement::monomial(c, c.element(0, 1), q(10))
        );
    }

    #[test]
    fn hadamard_of_disjoint_supports_is_zero() {
        let c = ctx(5);
        let x = simple(c, &[(1, 0)]);
        let y = simple(c, &[(2, 0)]);
        assert!(x.hadamard(&y).unwrap().is_zero());
    }

    #[test]
    fn star_inverts_group_exponents() {
        let c = ctx(3);
        let x = AlgebraElement::from_terms(
            c,
            [(c.element(2, 1), q(1)), (c.element(0, 2), q(5))],
        );
        let expected = AlgebraElement::from_terms(
            c,
            [(c.element(-2, 2), q(1)), (c.element(0, 1), q(5))],
        );
        assert_eq!(x.star(), expected);
    }

    #[test]
    fn frobenius_merges_colliding_images() {
        // Over Z_2, ({1, a})^(2) maps both terms onto the identity.
        let c = ctx(2);
        let x = simple(c, &[(0, 0), (0, 1)]);
        assert_eq!(x.frobenius(2), AlgebraElement::monomial(c, c.identity(), q(2)));
    }

    #[test]
    fn frobenius_minus_one_is_star() {
        let c = ctx(5);
        let x = AlgebraElement::from_terms(
            c,
            [(c.element(1, 2), q(7)), (c.element(-3, 4), q(-2))],
        );
        assert_eq!(x.frobenius(-1), x.star());
    }

    #[test]
    fn frobenius_permutes_units_on_torsion() {
        let c = ctx(5);
        let x = simple(c, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(x.frobenius(2), x);
    }

    #[test]
    fn stabilizer_of_identity_pair_in_z4() {
        let c = ctx(4);
        let s = FiniteSubset::new(c, [c.element(0, 0), c.element(0, 2)]);
        assert_eq!(
            s.stabilizer().unwrap().to_vec(),
            vec![c.element(0, 0), c.element(0, 2)]
        );
    }

    #[test]
    fn stabilizer_of_full_coset_is_whole_torsion() {
        let c = ctx(5);
        let coset = FiniteSubset::torsion_coset(c, 1);
        assert_eq!(coset.stabilizer().unwrap().len(), 5);
    }

    #[test]
    fn stabilizer_of_free_singleton_is_trivial_and_empty_is_rejected() {
        let c = ctx(6);
        let s = FiniteSubset::singleton(c, c.element(3, 2));
        assert_eq!(s.stabilizer().unwrap().to_vec(), vec![c.identity()]);
        assert_eq!(
            FiniteSubset::empty(c).stabilizer(),
            Err(GroupError::EmptySubset)
        );
    }

    #[test]
    fn project_free_collapses_torsion() {
        let c = ctx(3);
        // z*a + z*a^2 projects to 2z under a -> 1.
        let x = simple(c, &[(1, 1), (1, 2)]);
        assert_eq!(
            x.project_free(),
            AlgebraElement::monomial(c, c.element(1, 0), q(2))
        );
        // (z + z^-1) * Z_3-bar projects to 3z + 3z^-1.
        let y = simple(c, &[(1, 0), (-1, 0)])
            .convolve(&FiniteSubset::torsion_coset(c, 0).simple())
            .unwrap();
        let expected = AlgebraElement::from_terms(
            c,
            [(c.element(1, 0), q(3)), (c.element(-1, 0), q(3))],
        );
        assert_eq!(y.project_free(), expected);
    }

    #[test]
    fn project_torsion_collapses_free_exponents() {
        let c = ctx(3);
        let x = simple(c, &[(1, 1), (2, 1), (0, 2)]);
        let expected = AlgebraElement::from_terms(
            c,
            [(c.element(0, 1), q(2)), (c.element(0, 2), q(1))],
        );
        assert_eq!(x.project_torsion(), expected);
    }

    #[test]
    fn projections_are_ring_homomorphisms_on_a_sample() {
        let c = ctx(4);
        let x = simple(c, &[(1, 1), (0, 3)]);
        let y = simple(c, &[(-1, 2), (2, 0)]);
        let xy = x.convolve(&y).unwrap();
        assert_eq!(
            xy.project_free(),
            x.project_free().convolve(&y.project_free()).unwrap()
        );
        assert_eq!(
            xy.project_torsion(),
            x.project_torsion().convolve(&y.project_torsion()).unwrap()
        );
    }

    #[test]
    fn record_round_trip_preserves_exact_coefficients() {
        let c = ctx(7);
        let x = AlgebraElement::from_terms(
            c,
            [
                (c.element(-2, 5), Rational::new(22.into(), 7.into())),
                (c.element(0, 0), q(-3)),
            ],
        );
        let record = x.to_record();
        assert_eq!(AlgebraElement::from_record(&record).unwrap(), x);
        let json = serde_json::to_string(&record).unwrap();
        let back: AlgebraRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn zero_denominator_is_rejected() {
        let record = AlgebraRecord {
            n: 3,
            terms: vec![TermRecord { t: 0, k: 1, num: "1".into(), den: "0".into() }],
        };
        assert!(matches!(
            AlgebraElement::from_record(&record),
            Err(GroupError::BadCoefficient(_))
        ));
    }

    /// Independent convolution oracle: enumerates the candidate support as
    /// all pairwise products, then reads each coefficient off the defining
    /// formula `sum_h x_h y_{h^-1 g}` with map lookups. Shares no code with
    /// `AlgebraElement::convolve`.
    fn convolve_by_formula(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let c = x.ctx();
        let mut support = BTreeSet::new();
        for (g, _) in x.terms() {
            for (h, _) in y.terms() {
                support.insert(c.mul(*g, *h));
            }
        }
        let mut out = Vec::new();
        for g in support {
            let mut acc = Rational::zero();
            for (h, xh) in x.terms() {
                acc += xh * y.coeff(&c.mul(c.inv(*h), g));
            }
            out.push((g, acc));
        }
        AlgebraElement::from_terms(c, out)
    }

    fn arb_element(n: u64) -> impl Strategy<Value = AlgebraElement> {
        let term = (
            -4i64..=4,
            0..n as i64,
            proptest::option::of((-6i64..=6, 1i64..=4)),
        );
        proptest::collection::vec(term, 0..6).prop_map(move |terms| {
            let c = GroupContext::new(n).unwrap();
            AlgebraElement::from_terms(
                c,
                terms.into_iter().map(|(t, k, coeff)| {
                    let (num, den) = coeff.unwrap_or((1, 1));
                    (c.element(t, k), Rational::new(num.into(), den.into()))
                }),
            )
        })
    }

    proptest! {
        #[test]
        fn star_is_an_involution(x in arb_element(6)) {
            prop_assert_eq!(x.star().star(), x);
        }

        #[test]
        fn star_distributes_over_convolution(x in arb_element(5), y in arb_element(5)) {
            let lhs = x.convolve(&y).unwrap().star();
            let rhs = x.star().convolve(&y.star()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn convolution_matches_defining_formula(x in arb_element(4), y in arb_element(4)) {
            prop_assert_eq!(x.convolve(&y).unwrap(), convolve_by_formula(&x, &y));
        }

        #[test]
        fn convolution_commutes_over_abelian_group(x in arb_element(6), y in arb_element(6)) {
            prop_assert_eq!(x.convolve(&y).unwrap(), y.convolve(&x).unwrap());
        }

        #[test]
        fn frobenius_composes_multiplicatively(x in arb_element(6), m in -3i64..=3, k in -3i64..=3) {
            prop_assert_eq!(x.frobenius(m).frobenius(k), x.frobenius(m * k));
        }

        #[test]
        fn frobenius_of_unit_is_multiplicative(x in arb_element(5), y in arb_element(5), m in prop::sample::select(vec![1i64, 2, 3, 4, -1, -2])) {
            // gcd(m, 5) = 1 for all sampled m.
            let lhs = x.convolve(&y).unwrap().frobenius(m);
            let rhs = x.frobenius(m).convolve(&y.frobenius(m)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn hadamard_is_commutative_and_associative(
            x in arb_element(6),
            y in arb_element(6),
            z in arb_element(6),
        ) {
            prop_assert_eq!(x.hadamard(&y).unwrap(), y.hadamard(&x).unwrap());
            prop_assert_eq!(
                x.hadamard(&y).unwrap().hadamard(&z).unwrap(),
                x.hadamard(&y.hadamard(&z).unwrap()).unwrap()
            );
        }

        #[test]
        fn product_counts_agree_with_rational_convolution(
            xs in proptest::collection::btree_set((-3i64..=3, 0i64..5), 1..6),
            ys in proptest::collection::btree_set((-3i64..=3, 0i64..5), 1..6),
        ) {
            let c = GroupContext::new(5).unwrap();
            let a = FiniteSubset::new(c, xs.iter().map(|&(t, k)| c.element(t, k)));
            let b = FiniteSubset::new(c, ys.iter().map(|&(t, k)| c.element(t, k)));
            let counts = a.product_counts(&b).unwrap();
            let conv = a.simple().convolve(&b.simple()).unwrap();
            prop_assert_eq!(counts.len(), conv.support_len());
            for (g, count) in counts {
                prop_assert_eq!(Rational::from_integer(count.into()), conv.coeff(&g));
            }
        }

        #[test]
        fn stabilizer_is_a_torsion_subgroup(
            xs in proptest::collection::btree_set((-2i64..=2, 0i64..6), 1..5),
        ) {
            let c = GroupContext::new(6).unwrap();
            let s = FiniteSubset::new(c, xs.iter().map(|&(t, k)| c.element(t, k)));
            let stab = s.stabilizer().unwrap();
            prop_assert!(stab.is_subgroup());
            prop_assert!(stab.iter().all(|g| g.is_torsion()));
        }
    }
}
