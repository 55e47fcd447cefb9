//! The affine automorphism group of `Z x Z_n`.
//!
//! Every automorphism of `Z x Z_n` that restricts to an automorphism on the
//! torsion subgroup has the shape `z^t a^k -> z^{eps*t} a^{i*t + m*k}` with
//! `eps` a sign, `m` a unit mod `n`, and `i` an arbitrary residue. These
//! triples form a group of order `2 n phi(n)` containing the inversion map
//! `g -> g^-1` as a central involution. Subgroups of this group act on the
//! ambient group with finite orbits, which is what makes the automorphic
//! partitions of [`crate::oracle`] well defined.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{AlgebraElement, FiniteSubset, GroupContext, GroupElement};

/// Errors raised when building automorphisms or subgroups.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AutError {
    /// The sign component must be `+1` or `-1`.
    #[error("sign component must be +1 or -1, got {0}")]
    BadSign(i8),
    /// The torsion multiplier must be a unit mod `n`.
    #[error("torsion multiplier {m} is not a unit mod {n}")]
    NotAUnit { m: u64, n: u64 },
    /// Mixed ambient groups.
    #[error("context mismatch: Z x Z_{left} vs Z x Z_{right}")]
    ContextMismatch { left: u64, right: u64 },
    /// `primitive_root_mod` expects an odd prime.
    #[error("{0} is not an odd prime")]
    NotAnOddPrime(u64),
}

/// An affine automorphism `z^t a^k -> z^{eps*t} a^{i*t + m*k}` of `Z x Z_n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AffineAut {
    ctx: GroupContext,
    eps: i8,
    m: u64,
    i: u64,
}

impl AffineAut {
    /// Build `(eps, m, i)`, validating the sign and that `m` is a unit.
    /// Residues are reduced mod `n`; over `n = 1` every map collapses to
    /// `(eps, 0, 0)`.
    pub fn new(ctx: GroupContext, eps: i8, m: i64, i: i64) -> Result<Self, AutError> {
        if eps != 1 && eps != -1 {
            return Err(AutError::BadSign(eps));
        }
        let m = ctx.reduce(m);
        if m.gcd(&ctx.n()) != 1 {
            return Err(AutError::NotAUnit { m, n: ctx.n() });
        }
        Ok(Self { ctx, eps, m, i: ctx.reduce(i) })
    }

    /// The identity automorphism.
    pub fn identity(ctx: GroupContext) -> Self {
        Self { ctx, eps: 1, m: ctx.reduce(1), i: 0 }
    }

    /// The inversion `g -> g^-1`, central in the whole automorphism group.
    pub fn inversion(ctx: GroupContext) -> Self {
        Self { ctx, eps: -1, m: ctx.reduce(-1), i: 0 }
    }

    /// The torsion scaling `a -> a^m`, fixing `z`.
    pub fn torsion_scaling(ctx: GroupContext, m: i64) -> Result<Self, AutError> {
        Self::new(ctx, 1, m, 0)
    }

    /// The twist `z -> za`, fixing `a`.
    pub fn twist(ctx: GroupContext) -> Self {
        Self { ctx, eps: 1, m: ctx.reduce(1), i: ctx.reduce(1) }
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    pub fn eps(&self) -> i8 {
        self.eps
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn i(&self) -> u64 {
        self.i
    }

    /// Whether this flips the free coordinate.
    pub fn flips_free_part(&self) -> bool {
        self.eps == -1
    }

    /// Apply to a group element.
    pub fn apply(&self, g: GroupElement) -> GroupElement {
        let n = self.ctx.n() as i128;
        let k = ((g.t as i128) * (self.i as i128) + (g.k as i128) * (self.m as i128))
            .rem_euclid(n) as u64;
        GroupElement { t: self.eps as i64 * g.t, k }
    }

    /// Elementwise image of a subset.
    pub fn apply_to_set(&self, s: &FiniteSubset) -> FiniteSubset {
        FiniteSubset::new(self.ctx, s.iter().map(|g| self.apply(*g)))
    }

    /// Coefficientwise image of an algebra element. Automorphisms are
    /// injective, so no terms collide.
    pub fn apply_to_algebra(&self, x: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::from_terms(self.ctx, x.terms().map(|(g, c)| (self.apply(*g), c.clone())))
    }

    /// Composition `self o rhs` (apply `rhs` first, then `self`).
    pub fn compose(&self, rhs: &Self) -> Result<Self, AutError> {
        if self.ctx != rhs.ctx {
            return Err(AutError::ContextMismatch { left: self.ctx.n(), right: rhs.ctx.n() });
        }
        let n = self.ctx.n() as i128;
        let m = ((self.m as i128) * (rhs.m as i128)).rem_euclid(n) as u64;
        let i = ((self.i as i128) * (rhs.eps as i128) + (self.m as i128) * (rhs.i as i128))
            .rem_euclid(n) as u64;
        Ok(Self { ctx: self.ctx, eps: self.eps * rhs.eps, m, i })
    }

    /// Group inverse.
    pub fn inverse(&self) -> Self {
        let n = self.ctx.n() as i128;
        let m_inv = mod_inverse(self.m, self.ctx.n());
        let i = (-(m_inv as i128) * (self.eps as i128) * (self.i as i128)).rem_euclid(n) as u64;
        Self { ctx: self.ctx, eps: self.eps, m: m_inv, i }
    }

    /// Serializable form; the ambient `n` travels separately.
    pub fn to_record(&self) -> AffineAutRecord {
        AffineAutRecord { eps: self.eps, m: self.m, i: self.i }
    }

    pub fn from_record(ctx: GroupContext, record: &AffineAutRecord) -> Result<Self, AutError> {
        Self::new(ctx, record.eps, record.m as i64, record.i as i64)
    }
}

impl fmt::Display for AffineAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.eps == 1 { "+1" } else { "-1" };
        write!(f, "({sign}, {}, {})", self.m, self.i)
    }
}

/// Serialized automorphism `{eps, m, i}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AffineAutRecord {
    pub eps: i8,
    pub m: u64,
    pub i: u64,
}

fn mod_inverse(m: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let e = (m as i64).extended_gcd(&(n as i64));
    debug_assert_eq!(e.gcd, 1);
    (e.x as i128).rem_euclid(n as i128) as u64
}

/// Euler totient by trial factorization; `n` stays small here.
pub fn phi(n: u64) -> u64 {
    let mut n = n;
    let mut result = n.max(1);
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Units mod `n`, ascending. For `n = 1` this is `[0]`, the lone residue.
pub fn units(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|m| m.gcd(&n) == 1).collect()
}

/// Smallest primitive root mod an odd prime `p`.
pub fn primitive_root_mod(p: u64) -> Result<u64, AutError> {
    if p < 3 || !is_prime(p) {
        return Err(AutError::NotAnOddPrime(p));
    }
    'candidate: for g in 2..p {
        let mut x = g;
        for ord in 1..p {
            if x == 1 {
                if ord < p - 1 {
                    continue 'candidate;
                }
                break;
            }
            x = x * g % p;
            let _ = ord;
        }
        return Ok(g);
    }
    unreachable!("every odd prime has a primitive root below p")
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// A subgroup of the affine automorphism group, stored as its full element
/// set together with the generators it was built from. Comparisons ignore
/// the generators: two presentations of the same subgroup are equal.
#[derive(Clone, Debug)]
pub struct AutSubgroup {
    ctx: GroupContext,
    gens: Vec<AffineAut>,
    elements: BTreeSet<AffineAut>,
}

impl PartialEq for AutSubgroup {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.elements == other.elements
    }
}

impl Eq for AutSubgroup {}

impl PartialOrd for AutSubgroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AutSubgroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.ctx.n(), &self.elements).cmp(&(other.ctx.n(), &other.elements))
    }
}

impl AutSubgroup {
    /// Close a generating set under composition. The ambient group is
    /// finite, so repeated left multiplication by generators from the
    /// identity reaches every word in the generators.
    pub fn closure(
        ctx: GroupContext,
        gens: impl IntoIterator<Item = AffineAut>,
    ) -> Result<Self, AutError> {
        let gens: Vec<AffineAut> = gens.into_iter().collect();
        for g in &gens {
            if g.ctx != ctx {
                return Err(AutError::ContextMismatch { left: ctx.n(), right: g.ctx.n() });
            }
        }
        let mut elements = BTreeSet::from([AffineAut::identity(ctx)]);
        let mut frontier = vec![AffineAut::identity(ctx)];
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y = g.compose(&x)?;
                if elements.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Ok(Self { ctx, gens, elements })
    }

    /// The trivial subgroup.
    pub fn trivial(ctx: GroupContext) -> Self {
        Self {
            ctx,
            gens: Vec::new(),
            elements: BTreeSet::from([AffineAut::identity(ctx)]),
        }
    }

    /// The full affine automorphism group, of order `2 n phi(n)`.
    pub fn full(ctx: GroupContext) -> Self {
        let mut elements = BTreeSet::new();
        for eps in [1i8, -1] {
            for m in units(ctx.n()) {
                for i in 0..ctx.n().max(1) {
                    elements.insert(AffineAut { ctx, eps, m, i: ctx.reduce(i as i64) });
                }
            }
        }
        let gens = vec![
            AffineAut::inversion(ctx),
            AffineAut::twist(ctx),
        ];
        let mut subgroup = Self { ctx, gens, elements };
        if ctx.n() > 2 {
            if let Ok(p) = primitive_root_mod(ctx.n()) {
                subgroup.gens.push(AffineAut::torsion_scaling(ctx, p as i64).unwrap());
            } else {
                // Composite n: record one scaling per unit as generators.
                subgroup.gens.extend(
                    units(ctx.n())
                        .into_iter()
                        .map(|m| AffineAut::torsion_scaling(ctx, m as i64).unwrap()),
                );
            }
        }
        subgroup
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[AffineAut] {
        &self.gens
    }

    pub fn elements(&self) -> impl Iterator<Item = &AffineAut> {
        self.elements.iter()
    }

    pub fn contains(&self, s: &AffineAut) -> bool {
        self.elements.contains(s)
    }

    pub fn is_subgroup_of(&self, other: &Self) -> bool {
        self.elements.is_subset(&other.elements)
    }

    /// Whether any element flips the free coordinate. This decides the shape
    /// of orbits of free elements: with a flip, `z` and `z^-1` share one.
    pub fn contains_inversion_component(&self) -> bool {
        self.elements.iter().any(|s| s.eps == -1)
    }

    /// The conjugate subgroup `s H s^-1`.
    pub fn conjugate(&self, s: &AffineAut) -> Result<Self, AutError> {
        let s_inv = s.inverse();
        let mut elements = BTreeSet::new();
        for h in &self.elements {
            elements.insert(s.compose(h)?.compose(&s_inv)?);
        }
        let mut gens = Vec::new();
        for g in &self.gens {
            gens.push(s.compose(g)?.compose(&s_inv)?);
        }
        Ok(Self { ctx: self.ctx, gens, elements })
    }

    /// Orbit of `g` under the subgroup action; always finite because orbits
    /// stay inside `{z^t, z^-t} Z_n`.
    pub fn orbit(&self, g: GroupElement) -> FiniteSubset {
        FiniteSubset::new(self.ctx, self.elements.iter().map(|s| s.apply(g)))
    }

    /// Canonical orbit representative: the least element of the orbit.
    pub fn orbit_min(&self, g: GroupElement) -> GroupElement {
        self.elements
            .iter()
            .map(|s| s.apply(g))
            .min()
            .expect("subgroup contains the identity")
    }
}

impl fmt::Display for AutSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, g) in self.gens.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "> of order {}", self.order())
    }
}

/// Every subgroup of the affine automorphism group of `Z x Z_n`.
///
/// Works by saturation: maintain a set of known subgroups, and extend each
/// by one new element at a time, closing under composition. Any subgroup `K`
/// is reached because the closure of a subset of `K` stays inside `K` and
/// each extension step strictly grows it. Sorted by order, then elements.
pub fn all_subgroups(ctx: GroupContext) -> Vec<AutSubgroup> {
    let full: Vec<AffineAut> = AutSubgroup::full(ctx).elements.into_iter().collect();
    let mut seen = BTreeSet::from([AutSubgroup::trivial(ctx).elements]);
    let mut frontier = vec![AutSubgroup::trivial(ctx)];
    let mut out = vec![AutSubgroup::trivial(ctx)];
    while let Some(h) = frontier.pop() {
        for g in &full {
            if h.contains(g) {
                continue;
            }
            let mut gens = h.gens.clone();
            gens.push(*g);
            let extended = AutSubgroup::closure(ctx, gens).expect("same context");
            if seen.insert(extended.elements.clone()) {
                frontier.push(extended.clone());
                out.push(extended);
            }
        }
    }
    out.sort_by(|a, b| (a.order(), &a.elements).cmp(&(b.order(), &b.elements)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(n: u64) -> GroupContext {
        GroupContext::new(n).unwrap()
    }

    #[test]
    fn non_units_are_rejected() {
        assert_eq!(
            AffineAut::new(ctx(4), 1, 2, 0),
            Err(AutError::NotAUnit { m: 2, n: 4 })
        );
        assert_eq!(AffineAut::new(ctx(4), 0, 1, 0), Err(AutError::BadSign(0)));
    }

    #[test]
    fn n_equals_one_collapses_to_sign_only() {
        let c = ctx(1);
        let s = AffineAut::new(c, 1, 5, 3).unwrap();
        assert_eq!(s, AffineAut::identity(c));
        assert_eq!(AutSubgroup::full(c).order(), 2);
    }

    #[test]
    fn twist_moves_z_along_the_torsion_coset() {
        let c = ctx(3);
        let rho = AffineAut::twist(c);
        assert_eq!(rho.apply(c.element(1, 0)), c.element(1, 1));
        assert_eq!(rho.apply(c.element(1, 1)), c.element(1, 2));
        assert_eq!(rho.apply(c.element(-1, 0)), c.element(-1, -1));
    }

    #[test]
    fn composition_of_scaling_with_inversion() {
        let c = ctx(5);
        let sigma2 = AffineAut::torsion_scaling(c, 2).unwrap();
        let star = AffineAut::inversion(c);
        let composed = sigma2.compose(&star).unwrap();
        assert_eq!(composed, AffineAut::new(c, -1, 3, 0).unwrap());
    }

    #[test]
    fn twist_squares_to_double_twist() {
        let c = ctx(3);
        let rho = AffineAut::twist(c);
        assert_eq!(rho.compose(&rho).unwrap(), AffineAut::new(c, 1, 1, 2).unwrap());
    }

    #[test]
    fn inversion_is_central() {
        let c = ctx(8);
        let star = AffineAut::inversion(c);
        for s in AutSubgroup::full(c).elements() {
            assert_eq!(star.compose(s).unwrap(), s.compose(&star).unwrap());
        }
    }

    #[test]
    fn full_group_has_expected_order() {
        assert_eq!(AutSubgroup::full(ctx(3)).order(), 12);
        assert_eq!(AutSubgroup::full(ctx(5)).order(), 40);
        assert_eq!(AutSubgroup::full(ctx(8)).order(), 64);
    }

    #[test]
    fn closure_of_standard_generators_is_the_full_group() {
        for p in [3u64, 5] {
            let c = ctx(p);
            let r = primitive_root_mod(p).unwrap();
            let closure = AutSubgroup::closure(
                c,
                [
                    AffineAut::twist(c),
                    AffineAut::torsion_scaling(c, r as i64).unwrap(),
                    AffineAut::inversion(c),
                ],
            )
            .unwrap();
            assert_eq!(closure.order(), (2 * p * (p - 1)) as usize);
            assert_eq!(closure, AutSubgroup::full(c));
        }
    }

    #[test]
    fn orbits_of_standard_subgroups() {
        let c = ctx(5);
        let star_only = AutSubgroup::closure(c, [AffineAut::inversion(c)]).unwrap();
        assert_eq!(
            star_only.orbit(c.element(1, 0)).to_vec(),
            vec![c.element(-1, 0), c.element(1, 0)]
        );
        let scaling = AutSubgroup::closure(c, [AffineAut::torsion_scaling(c, 2).unwrap()])
            .unwrap();
        assert_eq!(scaling.orbit(c.element(0, 1)).len(), 4);
        assert_eq!(scaling.orbit(c.element(0, 0)).len(), 1);

        let c3 = ctx(3);
        let twisted = AutSubgroup::closure(c3, [AffineAut::twist(c3)]).unwrap();
        assert_eq!(
            twisted.orbit(c3.element(1, 0)),
            FiniteSubset::torsion_coset(c3, 1)
        );
    }

    #[test]
    fn subgroup_counts_for_small_primes() {
        assert_eq!(all_subgroups(ctx(3)).len(), 16);
        assert_eq!(all_subgroups(ctx(5)).len(), 40);
        assert_eq!(all_subgroups(ctx(7)).len(), 68);
    }

    #[test]
    fn all_subgroups_are_closed_and_ordered() {
        let subs = all_subgroups(ctx(5));
        let full = AutSubgroup::full(ctx(5));
        for h in &subs {
            assert!(h.is_subgroup_of(&full));
            assert_eq!(full.order() % h.order(), 0);
            for a in h.elements() {
                assert!(h.contains(&a.inverse()));
                for b in h.elements() {
                    assert!(h.contains(&a.compose(b).unwrap()));
                }
            }
        }
        for w in subs.windows(2) {
            assert!(w[0].order() <= w[1].order());
        }
    }

    #[test]
    fn primitive_roots_of_small_primes() {
        assert_eq!(primitive_root_mod(3).unwrap(), 2);
        assert_eq!(primitive_root_mod(5).unwrap(), 2);
        assert_eq!(primitive_root_mod(7).unwrap(), 3);
        assert_eq!(primitive_root_mod(11).unwrap(), 2);
        assert_eq!(primitive_root_mod(9), Err(AutError::NotAnOddPrime(9)));
    }

    #[test]
    fn totient_and_units_agree() {
        for n in 1..40 {
            assert_eq!(units(n).len() as u64, phi(n), "n = {n}");
        }
    }

    fn arb_aut(n: u64) -> impl Strategy<Value = AffineAut> {
        let unit_count = units(n).len();
        (0..2usize, 0..unit_count, 0..n as i64).prop_map(move |(e, mi, i)| {
            let c = GroupContext::new(n).unwrap();
            let eps = if e == 0 { 1 } else { -1 };
            AffineAut::new(c, eps, units(n)[mi] as i64, i).unwrap()
        })
    }

    proptest! {
        #[test]
        fn compose_matches_pointwise_application(
            s in arb_aut(6),
            t in arb_aut(6),
            tt in -5i64..=5,
            k in 0i64..6,
        ) {
            let c = ctx(6);
            let g = c.element(tt, k);
            prop_assert_eq!(s.compose(&t).unwrap().apply(g), s.apply(t.apply(g)));
        }

        #[test]
        fn inverse_cancels(s in arb_aut(8)) {
            let c = ctx(8);
            prop_assert_eq!(s.compose(&s.inverse()).unwrap(), AffineAut::identity(c));
            prop_assert_eq!(s.inverse().compose(&s).unwrap(), AffineAut::identity(c));
        }

        #[test]
        fn application_is_a_homomorphism(
            s in arb_aut(9),
            t1 in -4i64..=4,
            k1 in 0i64..9,
            t2 in -4i64..=4,
            k2 in 0i64..9,
        ) {
            let c = ctx(9);
            let g = c.element(t1, k1);
            let h = c.element(t2, k2);
            prop_assert_eq!(s.apply(c.mul(g, h)), c.mul(s.apply(g), s.apply(h)));
            prop_assert_eq!(s.apply(c.inv(g)), c.inv(s.apply(g)));
        }

        #[test]
        fn record_round_trip(s in arb_aut(10)) {
            let c = ctx(10);
            let record = s.to_record();
            prop_assert_eq!(AffineAut::from_record(c, &record).unwrap(), s);
        }

        #[test]
        fn orbits_partition_consistently(s in arb_aut(6), t in arb_aut(6), tt in -3i64..=3, k in 0i64..6) {
            // Two elements in one orbit have identical orbits.
            let c = ctx(6);
            let h = AutSubgroup::closure(c, [s, t]).unwrap();
            let g = c.element(tt, k);
            for image in h.orbit(g).iter() {
                prop_assert_eq!(h.orbit(*image), h.orbit(g));
            }
        }
    }
}
