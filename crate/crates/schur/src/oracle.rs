//! Class-partition oracles over `Z x Z_n` and their windowed verification.
//!
//! A Schur partition of the infinite group `Z x Z_n` has infinitely many
//! classes, so it is presented here as an oracle: a total function from
//! group elements to their (always finite) classes. The built-in families
//! cover the discrete and symmetric partitions, orbit partitions of affine
//! automorphism subgroups, lifts of a finite Schur partition of the torsion
//! subgroup, wedges that rescale an inner oracle along `z -> z^s`, and a
//! deliberately damaged variant that moves one element between classes.
//!
//! [`verify_on_window`] checks the ring axioms on every class meeting a
//! window `|t| <= N`, reading product multiplicities with exact integer
//! counting, and returns either the full table of structure constants seen
//! through the window or a concrete counterexample.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aut::{AffineAut, AffineAutRecord, AutError, AutSubgroup};
use crate::finite::{
    verify_partition, FiniteError, FinitePartition, PartitionCheck, PartitionWitness,
};
use crate::group::{FiniteSubset, GroupContext, GroupElement, GroupError};

/// Errors raised while constructing or interrogating oracles.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Aut(#[from] AutError),
    #[error(transparent)]
    Finite(#[from] FiniteError),
    #[error("window radius must be nonnegative, got {0}")]
    InvalidWindow(i64),
    #[error("wedge scale must be at least 2, got {scale}")]
    DegenerateWedge { scale: u64 },
    #[error("finite lifts need a torsion factor of order at least 2")]
    TrivialTorsion,
    #[error(
        "wedge inner image disagrees with the declared outer image; inner class of z is {{{}}}",
        display_list(.witness)
    )]
    IncompatibleWedge { witness: Vec<GroupElement> },
    #[error("torsion partition violates the ring axioms: {witness}")]
    LiftNotSchur { witness: PartitionWitness },
    #[error("corruption moves {moved} into its own class (class of {into})")]
    TrivialCorruption { moved: GroupElement, into: GroupElement },
    #[error("{representative} does not represent a class of this oracle")]
    NotAClass { representative: GroupElement },
    #[error("tycoon detection needs equal-sized nonempty subsets, got sizes {left} and {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("class of torsion element {torsion} contains {escapee}, outside the torsion subgroup")]
    TorsionEscape { torsion: GroupElement, escapee: GroupElement },
    #[error("malformed oracle description: {0}")]
    BadSpec(String),
}

fn display_list(elements: &[GroupElement]) -> String {
    let rendered: Vec<String> = elements.iter().map(ToString::to_string).collect();
    rendered.join(", ")
}

/// Shape of the projected partition on the free factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreeImage {
    Discrete,
    Symmetric,
}

impl fmt::Display for FreeImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreeImage::Discrete => write!(f, "discrete"),
            FreeImage::Symmetric => write!(f, "symmetric"),
        }
    }
}

/// Verification window: all elements `z^t a^k` with `|t| <= radius`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Window {
    radius: i64,
}

impl Window {
    pub fn new(radius: i64) -> Result<Self, OracleError> {
        if radius < 0 {
            return Err(OracleError::InvalidWindow(radius));
        }
        Ok(Self { radius })
    }

    pub fn radius(self) -> i64 {
        self.radius
    }

    pub fn contains(self, g: &GroupElement) -> bool {
        g.t.abs() <= self.radius
    }

    /// Window elements in canonical `(t, k)` order.
    pub fn elements(self, ctx: GroupContext) -> impl Iterator<Item = GroupElement> {
        (-self.radius..=self.radius)
            .flat_map(move |t| (0..ctx.n()).map(move |k| GroupElement { t, k }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum OracleKind {
    Discrete,
    Symmetric,
    Automorphic(AutSubgroup),
    FiniteLift { torsion: FinitePartition, outer: FreeImage },
    Wedge { inner: Box<SchurOracle>, scale: u64, outer: FreeImage },
    Corrupted { base: Box<SchurOracle>, moved: GroupElement, into: GroupElement },
}

/// A lazily presented class partition of `Z x Z_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchurOracle {
    ctx: GroupContext,
    kind: OracleKind,
}

impl SchurOracle {
    /// Every class a singleton.
    pub fn discrete(ctx: GroupContext) -> Self {
        Self { ctx, kind: OracleKind::Discrete }
    }

    /// Classes `{g, g^-1}`.
    pub fn symmetric(ctx: GroupContext) -> Self {
        Self { ctx, kind: OracleKind::Symmetric }
    }

    /// Orbit partition of an affine automorphism subgroup.
    pub fn automorphic(subgroup: AutSubgroup) -> Self {
        Self { ctx: subgroup.ctx(), kind: OracleKind::Automorphic(subgroup) }
    }

    /// Lift of a finite Schur partition of `Z_n`: torsion classes come from
    /// the partition, and every nontorsion class is a full coset `z^t Z_n`
    /// (or a symmetric pair of cosets). The partition must satisfy the ring
    /// axioms and the torsion factor must be nontrivial.
    pub fn finite_lift(torsion: FinitePartition, outer: FreeImage) -> Result<Self, OracleError> {
        if torsion.n() < 2 {
            return Err(OracleError::TrivialTorsion);
        }
        let ctx = GroupContext::new(torsion.n())?;
        if let PartitionCheck::Refuted(witness) = verify_partition(&torsion) {
            return Err(OracleError::LiftNotSchur { witness });
        }
        Ok(Self { ctx, kind: OracleKind::FiniteLift { torsion, outer } })
    }

    /// Re-index an inner oracle along `z^s -> z`: classes at levels divisible
    /// by `s` are scaled inner classes, and levels outside `sZ` fall back to
    /// full cosets shaped by `outer`. Consistency at the free level forces
    /// the inner free image to equal `outer`.
    pub fn wedge(inner: SchurOracle, scale: u64, outer: FreeImage) -> Result<Self, OracleError> {
        if scale < 2 {
            return Err(OracleError::DegenerateWedge { scale });
        }
        if inner.free_image() != outer {
            let z = inner.ctx.element(1, 0);
            return Err(OracleError::IncompatibleWedge { witness: inner.class_of(z).to_vec() });
        }
        Ok(Self {
            ctx: inner.ctx,
            kind: OracleKind::Wedge { inner: Box::new(inner), scale, outer },
        })
    }

    /// Move one element of a base oracle into a foreign class, leaving every
    /// other assignment intact. The result is still a partition, but the ring
    /// axioms generally fail; this is the adversarial input for exercising
    /// the verifier. The target class must not already contain the element.
    pub fn corrupted(
        base: SchurOracle,
        moved: GroupElement,
        into: GroupElement,
    ) -> Result<Self, OracleError> {
        let ctx = base.ctx;
        let moved = ctx.element(moved.t, moved.k as i64);
        let into = ctx.element(into.t, into.k as i64);
        if base.class_of(into).contains(&moved) {
            return Err(OracleError::TrivialCorruption { moved, into });
        }
        Ok(Self { ctx, kind: OracleKind::Corrupted { base: Box::new(base), moved, into } })
    }

    pub fn ctx(&self) -> GroupContext {
        self.ctx
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            OracleKind::Discrete => "discrete",
            OracleKind::Symmetric => "symmetric",
            OracleKind::Automorphic(_) => "automorphic",
            OracleKind::FiniteLift { .. } => "finite-lift",
            OracleKind::Wedge { .. } => "wedge",
            OracleKind::Corrupted { .. } => "corrupted",
        }
    }

    /// The class of `g`. Total and pure: equal inputs always yield equal
    /// classes, so any memoization layered on top is sound.
    pub fn class_of(&self, g: GroupElement) -> FiniteSubset {
        let g = self.ctx.element(g.t, g.k as i64);
        match &self.kind {
            OracleKind::Discrete => FiniteSubset::singleton(self.ctx, g),
            OracleKind::Symmetric => FiniteSubset::new(self.ctx, [g, self.ctx.inv(g)]),
            OracleKind::Automorphic(h) => h.orbit(g),
            OracleKind::FiniteLift { torsion, outer } => {
                if g.t == 0 {
                    FiniteSubset::new(
                        self.ctx,
                        torsion.block_of(g.k).iter().map(|&k| GroupElement { t: 0, k }),
                    )
                } else {
                    self.outer_coset(g.t, *outer)
                }
            }
            OracleKind::Wedge { inner, scale, outer } => {
                let s = *scale as i64;
                if g.t % s == 0 {
                    let inner_class = inner.class_of(GroupElement { t: g.t / s, k: g.k });
                    FiniteSubset::new(
                        self.ctx,
                        inner_class.iter().map(|h| GroupElement {
                            t: h.t.checked_mul(s).expect("free exponent out of range"),
                            k: h.k,
                        }),
                    )
                } else {
                    self.outer_coset(g.t, *outer)
                }
            }
            OracleKind::Corrupted { base, moved, into } => {
                if g == *moved {
                    return base.class_of(*into).inserting(*moved);
                }
                let class = base.class_of(g);
                if class.contains(into) {
                    class.inserting(*moved)
                } else if class.contains(moved) {
                    class.without(moved)
                } else {
                    class
                }
            }
        }
    }

    fn outer_coset(&self, t: i64, outer: FreeImage) -> FiniteSubset {
        let coset = FiniteSubset::torsion_coset(self.ctx, t);
        match outer {
            FreeImage::Discrete => coset,
            FreeImage::Symmetric => coset
                .union(&FiniteSubset::torsion_coset(self.ctx, -t))
                .expect("same context"),
        }
    }

    /// Shape of the image partition under the projection `a -> 1`.
    pub fn free_image(&self) -> FreeImage {
        match &self.kind {
            OracleKind::Discrete => FreeImage::Discrete,
            OracleKind::Symmetric => FreeImage::Symmetric,
            OracleKind::Automorphic(h) => {
                if h.contains_inversion_component() {
                    FreeImage::Symmetric
                } else {
                    FreeImage::Discrete
                }
            }
            OracleKind::FiniteLift { outer, .. } | OracleKind::Wedge { outer, .. } => *outer,
            OracleKind::Corrupted { base, .. } => base.free_image(),
        }
    }

    /// The induced partition of the torsion subgroup, provided no torsion
    /// class escapes it.
    pub fn torsion_partition(&self) -> Result<FinitePartition, OracleError> {
        let mut blocks: BTreeSet<Vec<u64>> = BTreeSet::new();
        for g in self.ctx.torsion() {
            let class = self.class_of(g);
            let mut block = Vec::with_capacity(class.len());
            for h in class.iter() {
                if h.t != 0 {
                    return Err(OracleError::TorsionEscape { torsion: g, escapee: *h });
                }
                block.push(h.k);
            }
            blocks.insert(block);
        }
        Ok(FinitePartition::new(self.ctx.n(), blocks)?)
    }

    /// The image oracle under an affine automorphism: the partition whose
    /// class of `tau(g)` is `tau(class of g)`. Computed structurally, family
    /// by family, so the result is again one of the built-in kinds.
    pub fn transform(&self, tau: &AffineAut) -> Result<SchurOracle, OracleError> {
        self.ctx.require_same(&tau.ctx())?;
        Ok(match &self.kind {
            OracleKind::Discrete | OracleKind::Symmetric => self.clone(),
            OracleKind::Automorphic(h) => SchurOracle::automorphic(h.conjugate(tau)?),
            OracleKind::FiniteLift { torsion, outer } => {
                let n = self.ctx.n();
                let m = tau.m();
                let blocks = torsion.blocks().iter().map(|block| {
                    block
                        .iter()
                        .map(|&k| ((k as u128 * m as u128) % n as u128) as u64)
                        .collect::<Vec<u64>>()
                });
                SchurOracle::finite_lift(FinitePartition::new(n, blocks)?, *outer)?
            }
            OracleKind::Wedge { inner, scale, outer } => {
                // At levels t = s*u the wedge acts through the inner oracle
                // with the twist amplified by the scale: a^(i*su) against
                // z^(su) reads as a^((i*s)*u) against z^u.
                let n = self.ctx.n() as u128;
                let twisted = ((tau.i() as u128) * (*scale as u128)) % n;
                let inner_tau =
                    AffineAut::new(self.ctx, tau.eps(), tau.m() as i64, twisted as i64)?;
                SchurOracle::wedge(inner.transform(&inner_tau)?, *scale, *outer)?
            }
            OracleKind::Corrupted { base, moved, into } => SchurOracle::corrupted(
                base.transform(tau)?,
                tau.apply(*moved),
                tau.apply(*into),
            )?,
        })
    }

    /// Machine-readable description of the oracle.
    pub fn to_spec(&self) -> OracleSpec {
        let mut spec = OracleSpec::bare(self.ctx.n(), self.family());
        match &self.kind {
            OracleKind::Discrete | OracleKind::Symmetric => {}
            OracleKind::Automorphic(h) => {
                spec.generators = Some(h.generators().iter().map(|g| g.to_record()).collect());
            }
            OracleKind::FiniteLift { torsion, outer } => {
                spec.classes = Some(torsion.blocks().to_vec());
                spec.outer = Some(*outer);
            }
            OracleKind::Wedge { inner, scale, outer } => {
                spec.inner = Some(Box::new(inner.to_spec()));
                spec.s = Some(*scale);
                spec.outer = Some(*outer);
            }
            OracleKind::Corrupted { base, moved, into } => {
                spec.inner = Some(Box::new(base.to_spec()));
                spec.moved = Some(*moved);
                spec.into = Some(*into);
            }
        }
        spec
    }

    fn family(&self) -> OracleFamily {
        match &self.kind {
            OracleKind::Discrete => OracleFamily::Discrete,
            OracleKind::Symmetric => OracleFamily::Symmetric,
            OracleKind::Automorphic(_) => OracleFamily::Automorphic,
            OracleKind::FiniteLift { .. } => OracleFamily::FiniteLift,
            OracleKind::Wedge { .. } => OracleFamily::Wedge,
            OracleKind::Corrupted { .. } => OracleFamily::Corrupted,
        }
    }

    /// Rebuild an oracle from its description.
    pub fn from_spec(spec: &OracleSpec) -> Result<SchurOracle, OracleError> {
        let ctx = GroupContext::new(spec.n)?;
        let inner_oracle = |field: &'static str| -> Result<SchurOracle, OracleError> {
            let inner = spec
                .inner
                .as_deref()
                .ok_or_else(|| OracleError::BadSpec(format!("{field} requires an inner oracle")))?;
            if inner.n != spec.n {
                return Err(OracleError::BadSpec(format!(
                    "inner oracle is over Z x Z_{}, expected Z x Z_{}",
                    inner.n, spec.n
                )));
            }
            SchurOracle::from_spec(inner)
        };
        match spec.family {
            OracleFamily::Discrete => Ok(SchurOracle::discrete(ctx)),
            OracleFamily::Symmetric => Ok(SchurOracle::symmetric(ctx)),
            OracleFamily::Automorphic => {
                let gens = spec.generators.as_ref().ok_or_else(|| {
                    OracleError::BadSpec("automorphic family requires generators".into())
                })?;
                let mut auts = Vec::with_capacity(gens.len());
                for record in gens {
                    auts.push(AffineAut::from_record(ctx, record)?);
                }
                Ok(SchurOracle::automorphic(AutSubgroup::closure(ctx, auts)?))
            }
            OracleFamily::FiniteLift => {
                let classes = spec.classes.as_ref().ok_or_else(|| {
                    OracleError::BadSpec("finite-lift family requires classes".into())
                })?;
                let outer = spec.outer.ok_or_else(|| {
                    OracleError::BadSpec("finite-lift family requires outer".into())
                })?;
                let torsion = FinitePartition::new(spec.n, classes.iter().cloned())?;
                SchurOracle::finite_lift(torsion, outer)
            }
            OracleFamily::Wedge => {
                let scale =
                    spec.s.ok_or_else(|| OracleError::BadSpec("wedge family requires s".into()))?;
                let outer = spec
                    .outer
                    .ok_or_else(|| OracleError::BadSpec("wedge family requires outer".into()))?;
                SchurOracle::wedge(inner_oracle("wedge family")?, scale, outer)
            }
            OracleFamily::Corrupted => {
                let moved = spec
                    .moved
                    .ok_or_else(|| OracleError::BadSpec("corrupted family requires moved".into()))?;
                let into = spec
                    .into
                    .ok_or_else(|| OracleError::BadSpec("corrupted family requires into".into()))?;
                SchurOracle::corrupted(inner_oracle("corrupted family")?, moved, into)
            }
        }
    }
}

impl fmt::Display for SchurOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.ctx.n();
        match &self.kind {
            OracleKind::Discrete => write!(f, "discrete(n={n})"),
            OracleKind::Symmetric => write!(f, "symmetric(n={n})"),
            OracleKind::Automorphic(h) => write!(f, "automorphic(n={n}, {h})"),
            OracleKind::FiniteLift { torsion, outer } => {
                write!(f, "finite-lift(n={n}, outer {outer}, torsion {torsion})")
            }
            OracleKind::Wedge { inner, scale, outer } => {
                write!(f, "wedge(scale {scale}, outer {outer}, inner {inner})")
            }
            OracleKind::Corrupted { base, moved, into } => {
                write!(f, "corrupted({base}, {moved} -> class of {into})")
            }
        }
    }
}

/// Oracle family tag used in serialized descriptions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleFamily {
    Discrete,
    Symmetric,
    Automorphic,
    Wedge,
    FiniteLift,
    Corrupted,
}

/// Serialized oracle description. Field use depends on the family:
/// `generators` for automorphic, `s`/`outer`/`inner` for wedge, `classes`
/// and `outer` for finite-lift, `inner`/`moved`/`into` for corrupted.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OracleSpec {
    pub n: u64,
    pub family: OracleFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<AffineAutRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<FreeImage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<OracleSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moved: Option<GroupElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub into: Option<GroupElement>,
}

impl OracleSpec {
    fn bare(n: u64, family: OracleFamily) -> Self {
        Self {
            n,
            family,
            generators: None,
            s: None,
            outer: None,
            inner: None,
            classes: None,
            moved: None,
            into: None,
        }
    }
}

/// One verified class: canonical id (least member), full member list, and
/// whether the class meets the verification window.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ClassInfo {
    pub id: GroupElement,
    pub members: Vec<GroupElement>,
    pub in_window: bool,
}

/// One nonzero structure constant, with classes named by their ids and the
/// pair normalized so `c <= d`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct ConstantEntry {
    pub c: GroupElement,
    pub d: GroupElement,
    pub e: GroupElement,
    pub lambda: u64,
}

/// Structure constants of all class pairs meeting a window.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct StructureConstants {
    pub n: u64,
    pub window: i64,
    pub classes: Vec<ClassInfo>,
    pub constants: Vec<ConstantEntry>,
}

impl StructureConstants {
    /// Multiplicity of class `e` in the product of classes `c` and `d`
    /// (ids in either order); zero when the triple is absent.
    pub fn lambda(&self, c: GroupElement, d: GroupElement, e: GroupElement) -> u64 {
        let (c, d) = if c <= d { (c, d) } else { (d, c) };
        self.constants
            .binary_search_by_key(&(c, d, e), |entry| (entry.c, entry.d, entry.e))
            .map(|idx| self.constants[idx].lambda)
            .unwrap_or(0)
    }

    pub fn class(&self, id: GroupElement) -> Option<&ClassInfo> {
        self.classes.iter().find(|info| info.id == id)
    }

    /// Ids of the classes meeting the window.
    pub fn window_class_ids(&self) -> impl Iterator<Item = GroupElement> + '_ {
        self.classes.iter().filter(|info| info.in_window).map(|info| info.id)
    }
}

/// Concrete witness of the first failing axiom found by the verifier.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum OracleWitness {
    /// The class of the identity is not `{1}`.
    IdentityClass { class: Vec<GroupElement> },
    /// An element missing from its own class.
    Membership { element: GroupElement, class: Vec<GroupElement> },
    /// An element claimed by two different classes.
    Inconsistent {
        element: GroupElement,
        first: Vec<GroupElement>,
        second: Vec<GroupElement>,
    },
    /// A class whose elementwise inverse is not a class.
    InverseClosure { class: Vec<GroupElement>, expected: Vec<GroupElement> },
    /// A product count that is not constant on a touched class.
    NonConstant {
        c: GroupElement,
        d: GroupElement,
        class: Vec<GroupElement>,
        x: GroupElement,
        x_mult: u64,
        y: GroupElement,
        y_mult: u64,
    },
}

fn display_elements(f: &mut fmt::Formatter<'_>, elements: &[GroupElement]) -> fmt::Result {
    write!(f, "{{")?;
    for (i, g) in elements.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{g}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for OracleWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleWitness::IdentityClass { class } => {
                write!(f, "class of the identity is ")?;
                display_elements(f, class)
            }
            OracleWitness::Membership { element, class } => {
                write!(f, "{element} is missing from its own class ")?;
                display_elements(f, class)
            }
            OracleWitness::Inconsistent { element, first, second } => {
                write!(f, "{element} is claimed by ")?;
                display_elements(f, first)?;
                write!(f, " and by ")?;
                display_elements(f, second)
            }
            OracleWitness::InverseClosure { class, expected } => {
                write!(f, "inverse of class ")?;
                display_elements(f, class)?;
                write!(f, " is ")?;
                display_elements(f, expected)?;
                write!(f, ", which is not a class")
            }
            OracleWitness::NonConstant { c, d, class, x, x_mult, y, y_mult } => {
                write!(
                    f,
                    "product of classes of {c} and {d} is not constant on "
                )?;
                display_elements(f, class)?;
                write!(f, ": {x} occurs {x_mult} times but {y} occurs {y_mult} times")
            }
        }
    }
}

/// Outcome of windowed verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleCheck {
    Verified(StructureConstants),
    Refuted(OracleWitness),
}

impl OracleCheck {
    pub fn is_verified(&self) -> bool {
        matches!(self, OracleCheck::Verified(_))
    }

    pub fn verified(self) -> Result<StructureConstants, OracleWitness> {
        match self {
            OracleCheck::Verified(table) => Ok(table),
            OracleCheck::Refuted(witness) => Err(witness),
        }
    }
}

/// Incrementally discovered class atlas: classes are interned as they are
/// seen and every membership claim is cross-checked against earlier ones.
struct ClassAtlas<'a> {
    oracle: &'a SchurOracle,
    index: BTreeMap<GroupElement, usize>,
    classes: Vec<FiniteSubset>,
}

impl<'a> ClassAtlas<'a> {
    fn new(oracle: &'a SchurOracle) -> Self {
        Self { oracle, index: BTreeMap::new(), classes: Vec::new() }
    }

    /// Index of the class of `g`, computing and interning it on first sight.
    fn locate(&mut self, g: GroupElement) -> Result<usize, OracleWitness> {
        if let Some(&idx) = self.index.get(&g) {
            // A repeated element must reproduce the class it was first
            // assigned to; this is what makes class_of a partition.
            let class = self.oracle.class_of(g);
            if class != self.classes[idx] {
                return Err(OracleWitness::Inconsistent {
                    element: g,
                    first: self.classes[idx].to_vec(),
                    second: class.to_vec(),
                });
            }
            return Ok(idx);
        }
        let class = self.oracle.class_of(g);
        if !class.contains(&g) {
            return Err(OracleWitness::Membership { element: g, class: class.to_vec() });
        }
        for h in class.iter() {
            if let Some(&prev) = self.index.get(h) {
                if self.classes[prev] != class {
                    return Err(OracleWitness::Inconsistent {
                        element: *h,
                        first: self.classes[prev].to_vec(),
                        second: class.to_vec(),
                    });
                }
            }
        }
        let idx = self.classes.len();
        for h in class.iter() {
            self.index.insert(*h, idx);
        }
        self.classes.push(class);
        Ok(idx)
    }
}

/// Check the ring axioms on every class meeting the window.
///
/// The identity must form its own class; every window element must sit in
/// its own class, consistently with all other assignments; every window
/// class must have a class as its elementwise inverse; and for every
/// unordered pair of window classes the product multiset must be constant
/// on each class it touches. Touched classes may reach outside the window
/// (products run out to `|t| <= 2N`); they are resolved through the same
/// consistency-checked atlas and recorded in the certificate.
pub fn verify_on_window(oracle: &SchurOracle, window: Window) -> OracleCheck {
    let ctx = oracle.ctx();
    let identity = ctx.identity();
    let id_class = oracle.class_of(identity);
    if id_class.len() != 1 || !id_class.contains(&identity) {
        return OracleCheck::Refuted(OracleWitness::IdentityClass { class: id_class.to_vec() });
    }

    let mut atlas = ClassAtlas::new(oracle);
    for g in window.elements(ctx) {
        if let Err(witness) = atlas.locate(g) {
            return OracleCheck::Refuted(witness);
        }
    }
    let window_class_count = atlas.classes.len();

    for idx in 0..window_class_count {
        let class = atlas.classes[idx].clone();
        let expected = class.star();
        let rep = expected.first().expect("classes are nonempty");
        if oracle.class_of(rep) != expected {
            return OracleCheck::Refuted(OracleWitness::InverseClosure {
                class: class.to_vec(),
                expected: expected.to_vec(),
            });
        }
    }

    let mut entries = Vec::new();
    for i in 0..window_class_count {
        for j in i..window_class_count {
            let counts = atlas.classes[i]
                .product_counts(&atlas.classes[j])
                .expect("classes share the oracle context");
            let c_id = atlas.classes[i].first().expect("classes are nonempty");
            let d_id = atlas.classes[j].first().expect("classes are nonempty");
            let mut touched = BTreeSet::new();
            for g in counts.keys() {
                match atlas.locate(*g) {
                    Ok(idx) => {
                        touched.insert(idx);
                    }
                    Err(witness) => return OracleCheck::Refuted(witness),
                }
            }
            for &idx in &touched {
                let class = &atlas.classes[idx];
                let rep = class.first().expect("classes are nonempty");
                let lambda = counts.get(&rep).copied().unwrap_or(0);
                for member in class.iter() {
                    let mult = counts.get(member).copied().unwrap_or(0);
                    if mult != lambda {
                        return OracleCheck::Refuted(OracleWitness::NonConstant {
                            c: c_id,
                            d: d_id,
                            class: class.to_vec(),
                            x: rep,
                            x_mult: lambda,
                            y: *member,
                            y_mult: mult,
                        });
                    }
                }
                if lambda > 0 {
                    let (c, d) = if c_id <= d_id { (c_id, d_id) } else { (d_id, c_id) };
                    entries.push(ConstantEntry { c, d, e: rep, lambda });
                }
            }
        }
    }
    entries.sort_by_key(|entry| (entry.c, entry.d, entry.e));

    let mut classes: Vec<ClassInfo> = atlas
        .classes
        .iter()
        .enumerate()
        .map(|(idx, class)| ClassInfo {
            id: class.first().expect("classes are nonempty"),
            members: class.to_vec(),
            in_window: idx < window_class_count,
        })
        .collect();
    classes.sort_by_key(|info| info.id);

    OracleCheck::Verified(StructureConstants {
        n: ctx.n(),
        window: window.radius(),
        classes,
        constants: entries,
    })
}

/// Distinct classes of window elements, ordered by class id.
pub fn window_classes(oracle: &SchurOracle, window: Window) -> Vec<FiniteSubset> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for g in window.elements(oracle.ctx()) {
        let class = oracle.class_of(g);
        if seen.insert(class.first().expect("classes are nonempty")) {
            out.push(class);
        }
    }
    out.sort_by_key(|class| class.first());
    out
}

/// Whether two oracles assign identical classes to every window element.
pub fn equal_on_window(a: &SchurOracle, b: &SchurOracle, window: Window) -> bool {
    a.ctx() == b.ctx()
        && window.elements(a.ctx()).all(|g| a.class_of(g) == b.class_of(g))
}

/// Canonical fingerprint of an oracle on a window: the set of classes of all
/// window elements. Equal signatures mean the oracles agree on the window.
pub fn window_signature(oracle: &SchurOracle, window: Window) -> BTreeSet<Vec<GroupElement>> {
    window.elements(oracle.ctx()).map(|g| oracle.class_of(g).to_vec()).collect()
}

/// Decomposition of a product of two classes into classes with exact
/// multiplicities, or the constancy obstruction that prevents it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    Exact(Vec<(FiniteSubset, u64)>),
    Obstructed(OracleWitness),
}

/// Write the product of two classes as an exact combination of classes.
/// Both inputs must be classes of the oracle.
pub fn decompose_product(
    oracle: &SchurOracle,
    c: &FiniteSubset,
    d: &FiniteSubset,
) -> Result<Decomposition, OracleError> {
    for class in [c, d] {
        oracle.ctx().require_same(&class.ctx())?;
        let rep = class.first().ok_or(GroupError::EmptySubset)?;
        if oracle.class_of(rep) != *class {
            return Err(OracleError::NotAClass { representative: rep });
        }
    }
    let counts = c.product_counts(d)?;
    let mut touched: BTreeMap<GroupElement, FiniteSubset> = BTreeMap::new();
    for g in counts.keys() {
        let class = oracle.class_of(*g);
        touched.insert(class.first().expect("classes are nonempty"), class);
    }
    let mut terms = Vec::new();
    for (rep, class) in touched {
        let lambda = counts.get(&rep).copied().unwrap_or(0);
        for member in class.iter() {
            let mult = counts.get(member).copied().unwrap_or(0);
            if mult != lambda {
                return Ok(Decomposition::Obstructed(OracleWitness::NonConstant {
                    c: c.first().expect("nonempty"),
                    d: d.first().expect("nonempty"),
                    class: class.to_vec(),
                    x: rep,
                    x_mult: lambda,
                    y: *member,
                    y_mult: mult,
                }));
            }
        }
        if lambda > 0 {
            terms.push((class, lambda));
        }
    }
    Ok(Decomposition::Exact(terms))
}

/// Elements `x` with `A = xB`, detected through multiplicities: `x` qualifies
/// exactly when it occurs `|A|` times in the product multiset `A * B^-1`.
/// The subsets must be nonempty and of equal size.
pub fn tycoons(a: &FiniteSubset, b: &FiniteSubset) -> Result<FiniteSubset, OracleError> {
    a.ctx().require_same(&b.ctx())?;
    if a.is_empty() || a.len() != b.len() {
        return Err(OracleError::SizeMismatch { left: a.len(), right: b.len() });
    }
    let counts = a.product_counts(&b.star())?;
    let full = a.len() as u64;
    Ok(FiniteSubset::new(
        a.ctx(),
        counts.into_iter().filter(|&(_, count)| count == full).map(|(g, _)| g),
    ))
}

/// Least `s` in `1..=N` whose class stays inside `{z^s, z^-s}`; the order of
/// the largest detectable free subgroup whose lattice points form classes.
pub fn detect_max_free_subgroup(oracle: &SchurOracle, window: Window) -> Option<u64> {
    let ctx = oracle.ctx();
    (1..=window.radius().max(0) as u64).find(|&s| {
        let t = s as i64;
        oracle
            .class_of(ctx.element(t, 0))
            .iter()
            .all(|g| g.k == 0 && (g.t == t || g.t == -t))
    })
}

/// One failed size-lemma triple.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SizeLemmaViolation {
    pub c: GroupElement,
    pub d: GroupElement,
    pub e: GroupElement,
    pub lambda: u64,
    pub issue: SizeLemmaIssue,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SizeLemmaIssue {
    /// A companion multiplicity fails to be constant on the class named
    /// by `on`.
    NonConstantCompanion {
        on: GroupElement,
        x: GroupElement,
        x_mult: u64,
        y: GroupElement,
        y_mult: u64,
    },
    /// The three weighted counts disagree.
    UnbalancedTriple { lambda_e: u64, mu_c: u64, nu_d: u64 },
}

fn constant_on(
    counts: &BTreeMap<GroupElement, u64>,
    set: &FiniteSubset,
) -> Result<u64, (GroupElement, u64, GroupElement, u64)> {
    let rep = set.first().expect("nonempty class");
    let reference = counts.get(&rep).copied().unwrap_or(0);
    for member in set.iter() {
        let mult = counts.get(member).copied().unwrap_or(0);
        if mult != reference {
            return Err((rep, reference, *member, mult));
        }
    }
    Ok(reference)
}

/// Check the weighted symmetry of every recorded structure constant: with
/// `mu` the constant multiplicity of `C*` in `D E*` and `nu` the constant
/// multiplicity of `D*` in `E* C`, the products `lambda |E|`, `mu |C|`, and
/// `nu |D|` must all agree. Companion multiplicities are recounted directly
/// from the classes rather than read back from the table.
pub fn check_size_lemma(
    oracle: &SchurOracle,
    table: &StructureConstants,
) -> Vec<SizeLemmaViolation> {
    let ctx = oracle.ctx();
    let class_by_id: BTreeMap<GroupElement, FiniteSubset> = table
        .classes
        .iter()
        .map(|info| (info.id, FiniteSubset::new(ctx, info.members.iter().copied())))
        .collect();
    let mut violations = Vec::new();
    for entry in &table.constants {
        let (Some(c), Some(d), Some(e)) = (
            class_by_id.get(&entry.c),
            class_by_id.get(&entry.d),
            class_by_id.get(&entry.e),
        ) else {
            continue;
        };
        let c_star = c.star();
        let d_star = d.star();
        let e_star = e.star();
        let de_star = d.product_counts(&e_star).expect("same context");
        let mu = match constant_on(&de_star, &c_star) {
            Ok(mu) => mu,
            Err((x, x_mult, y, y_mult)) => {
                violations.push(SizeLemmaViolation {
                    c: entry.c,
                    d: entry.d,
                    e: entry.e,
                    lambda: entry.lambda,
                    issue: SizeLemmaIssue::NonConstantCompanion {
                        on: c_star.first().expect("nonempty"),
                        x,
                        x_mult,
                        y,
                        y_mult,
                    },
                });
                continue;
            }
        };
        let estar_c = e_star.product_counts(c).expect("same context");
        let nu = match constant_on(&estar_c, &d_star) {
            Ok(nu) => nu,
            Err((x, x_mult, y, y_mult)) => {
                violations.push(SizeLemmaViolation {
                    c: entry.c,
                    d: entry.d,
                    e: entry.e,
                    lambda: entry.lambda,
                    issue: SizeLemmaIssue::NonConstantCompanion {
                        on: d_star.first().expect("nonempty"),
                        x,
                        x_mult,
                        y,
                        y_mult,
                    },
                });
                continue;
            }
        };
        let lambda_e = entry.lambda * e.len() as u64;
        let mu_c = mu * c.len() as u64;
        let nu_d = nu * d.len() as u64;
        if lambda_e != mu_c || mu_c != nu_d {
            violations.push(SizeLemmaViolation {
                c: entry.c,
                d: entry.d,
                e: entry.e,
                lambda: entry.lambda,
                issue: SizeLemmaIssue::UnbalancedTriple { lambda_e, mu_c, nu_d },
            });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(n: u64) -> GroupContext {
        GroupContext::new(n).unwrap()
    }

    fn window(radius: i64) -> Window {
        Window::new(radius).unwrap()
    }

    fn full_affine(n: u64) -> SchurOracle {
        SchurOracle::automorphic(AutSubgroup::full(ctx(n)))
    }

    fn subgroup(n: u64, gens: &[(i8, i64, i64)]) -> AutSubgroup {
        let c = ctx(n);
        AutSubgroup::closure(
            c,
            gens.iter().map(|&(eps, m, i)| AffineAut::new(c, eps, m, i).unwrap()),
        )
        .unwrap()
    }

    fn torsion_set(c: GroupContext, ks: &[i64]) -> FiniteSubset {
        FiniteSubset::new(c, ks.iter().map(|&k| c.element(0, k)))
    }

    #[test]
    fn class_shapes_of_basic_families() {
        let c = ctx(5);
        let z = c.element(1, 0);
        assert_eq!(SchurOracle::discrete(c).class_of(z).to_vec(), vec![z]);
        assert_eq!(
            SchurOracle::symmetric(c).class_of(z).to_vec(),
            vec![c.element(-1, 0), z]
        );
        // Orbit of z under the full affine group: both cosets z Z_5, z^-1 Z_5.
        assert_eq!(full_affine(5).class_of(z).len(), 10);
        // Over n = 1 the symmetric oracle still pairs z with its inverse.
        let c1 = ctx(1);
        assert_eq!(SchurOracle::symmetric(c1).class_of(c1.element(3, 0)).len(), 2);
    }

    #[test]
    fn finite_lift_classes_and_validation() {
        let p = FinitePartition::new(5, [vec![0], vec![1, 4], vec![2, 3]]).unwrap();
        let lift = SchurOracle::finite_lift(p, FreeImage::Discrete).unwrap();
        let c = ctx(5);
        assert_eq!(lift.class_of(c.element(0, 4)), torsion_set(c, &[1, 4]));
        assert_eq!(lift.class_of(c.element(2, 3)), FiniteSubset::torsion_coset(c, 2));

        let bad = FinitePartition::new(4, [vec![0], vec![1], vec![2, 3]]).unwrap();
        assert!(matches!(
            SchurOracle::finite_lift(bad, FreeImage::Discrete),
            Err(OracleError::LiftNotSchur {
                witness: PartitionWitness::InverseClosure { .. }
            })
        ));
        let trivial = FinitePartition::discrete(1).unwrap();
        assert!(matches!(
            SchurOracle::finite_lift(trivial, FreeImage::Discrete),
            Err(OracleError::TrivialTorsion)
        ));
    }

    #[test]
    fn wedge_classes_scale_the_inner_oracle() {
        let c = ctx(5);
        let inner = SchurOracle::automorphic(subgroup(5, &[(1, 2, 0)]));
        let w = SchurOracle::wedge(inner, 2, FreeImage::Discrete).unwrap();
        // Level 1 is not divisible by the scale: full coset.
        assert_eq!(w.class_of(c.element(1, 1)), FiniteSubset::torsion_coset(c, 1));
        // Level 2 reads the inner class of (1, k) scaled by 2.
        let class = w.class_of(c.element(2, 1));
        assert_eq!(
            class,
            FiniteSubset::new(c, [1, 2, 4, 3].map(|k| c.element(2, k)))
        );
    }

    #[test]
    fn wedge_validation() {
        let c = ctx(3);
        assert!(matches!(
            SchurOracle::wedge(SchurOracle::discrete(c), 1, FreeImage::Discrete),
            Err(OracleError::DegenerateWedge { scale: 1 })
        ));
        // Symmetric inner against a discrete outer: the inner class of z is
        // the witness.
        match SchurOracle::wedge(SchurOracle::symmetric(c), 2, FreeImage::Discrete) {
            Err(OracleError::IncompatibleWedge { witness }) => {
                assert_eq!(witness, vec![c.element(-1, 0), c.element(1, 0)]);
            }
            other => panic!("expected an incompatibility, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_moves_exactly_one_element() {
        let c = ctx(5);
        let base = SchurOracle::symmetric(c);
        let moved = c.element(0, 1);
        let into = c.element(0, 2);
        let bad = SchurOracle::corrupted(base.clone(), moved, into).unwrap();
        assert_eq!(bad.class_of(moved), torsion_set(c, &[1, 2, 3]));
        assert_eq!(bad.class_of(c.element(0, 3)), torsion_set(c, &[1, 2, 3]));
        assert_eq!(bad.class_of(c.element(0, 4)), torsion_set(c, &[4]));
        // Untouched classes pass through.
        assert_eq!(bad.class_of(c.element(2, 0)), base.class_of(c.element(2, 0)));
        // Moving an element into its own class is rejected.
        assert!(matches!(
            SchurOracle::corrupted(base, moved, c.element(0, 4)),
            Err(OracleError::TrivialCorruption { .. })
        ));
    }

    #[test]
    fn verifier_accepts_the_basic_families() {
        for oracle in [
            SchurOracle::discrete(ctx(4)),
            SchurOracle::symmetric(ctx(4)),
            full_affine(3),
            SchurOracle::automorphic(subgroup(5, &[(1, 1, 1)])),
            SchurOracle::finite_lift(
                FinitePartition::new(5, [vec![0], vec![1, 4], vec![2, 3]]).unwrap(),
                FreeImage::Symmetric,
            )
            .unwrap(),
            SchurOracle::wedge(
                SchurOracle::automorphic(subgroup(5, &[(1, 2, 0)])),
                3,
                FreeImage::Discrete,
            )
            .unwrap(),
        ] {
            let check = verify_on_window(&oracle, window(3));
            assert!(check.is_verified(), "{oracle}: {check:?}");
        }
    }

    #[test]
    fn full_affine_structure_constants_over_z5() {
        let oracle = SchurOracle::automorphic(subgroup(5, &[(1, 1, 1), (1, 2, 0), (-1, 4, 0)]));
        let table = verify_on_window(&oracle, window(2)).verified().unwrap();
        let c = ctx(5);
        let z_class = c.element(-1, 0);
        let z2_class = c.element(-2, 0);
        // (class of z)^2 covers the level-2 cosets 5 times each and the
        // torsion classes 10 times each.
        assert_eq!(table.lambda(z_class, z_class, z2_class), 5);
        assert_eq!(table.lambda(z_class, z_class, c.identity()), 10);
        assert_eq!(table.lambda(z_class, z_class, c.element(0, 1)), 10);
        // The level-2 class reaches outside the window and is flagged so.
        let info = table.class(z2_class).unwrap();
        assert!(info.in_window);
        assert_eq!(info.members.len(), 10);
    }

    #[test]
    fn verifier_refutes_a_corrupted_symmetric_oracle() {
        let c = ctx(5);
        let bad = SchurOracle::corrupted(
            SchurOracle::symmetric(c),
            c.element(0, 1),
            c.element(0, 2),
        )
        .unwrap();
        match verify_on_window(&bad, window(1)) {
            OracleCheck::Refuted(OracleWitness::InverseClosure { class, expected }) => {
                assert_eq!(class, vec![c.element(0, 1), c.element(0, 2), c.element(0, 3)]);
                assert_eq!(
                    expected,
                    vec![c.element(0, 2), c.element(0, 3), c.element(0, 4)]
                );
            }
            other => panic!("expected an inverse-closure witness, got {other:?}"),
        }
    }

    #[test]
    fn verifier_refutes_an_identity_corruption() {
        let c = ctx(4);
        let bad = SchurOracle::corrupted(
            SchurOracle::discrete(c),
            c.element(1, 0),
            c.identity(),
        )
        .unwrap();
        match verify_on_window(&bad, window(1)) {
            OracleCheck::Refuted(OracleWitness::IdentityClass { class }) => {
                assert_eq!(class, vec![c.identity(), c.element(1, 0)]);
            }
            other => panic!("expected an identity witness, got {other:?}"),
        }
    }

    #[test]
    fn certificate_is_deterministic_and_sorted() {
        let oracle = full_affine(3);
        let a = verify_on_window(&oracle, window(2)).verified().unwrap();
        let b = verify_on_window(&oracle, window(2)).verified().unwrap();
        assert_eq!(a, b);
        assert!(a.classes.windows(2).all(|w| w[0].id < w[1].id));
        assert!(a
            .constants
            .windows(2)
            .all(|w| (w[0].c, w[0].d, w[0].e) < (w[1].c, w[1].d, w[1].e)));
        assert!(a.constants.iter().all(|entry| entry.c <= entry.d && entry.lambda > 0));
    }

    #[test]
    fn decompose_product_of_affine_orbit_classes() {
        let oracle = full_affine(5);
        let c = ctx(5);
        let z_class = oracle.class_of(c.element(1, 0));
        match decompose_product(&oracle, &z_class, &z_class).unwrap() {
            Decomposition::Exact(terms) => {
                let summary: Vec<(GroupElement, u64)> = terms
                    .iter()
                    .map(|(class, lambda)| (class.first().unwrap(), *lambda))
                    .collect();
                assert_eq!(
                    summary,
                    vec![
                        (c.element(-2, 0), 5),
                        (c.identity(), 10),
                        (c.element(0, 1), 10),
                    ]
                );
            }
            other => panic!("expected an exact decomposition, got {other:?}"),
        }
        // A non-class input is rejected.
        let not_class = FiniteSubset::new(c, [c.element(1, 0)]);
        assert!(matches!(
            decompose_product(&oracle, &not_class, &z_class),
            Err(OracleError::NotAClass { .. })
        ));
    }

    #[test]
    fn tycoon_examples_over_z5_torsion() {
        let c = ctx(5);
        let a = torsion_set(c, &[1, 2]);
        let b = torsion_set(c, &[2, 3]);
        assert_eq!(tycoons(&a, &b).unwrap(), torsion_set(c, &[4]));
        let x = torsion_set(c, &[0, 1]);
        let y = torsion_set(c, &[0, 2]);
        assert!(tycoons(&x, &y).unwrap().is_empty());
        assert!(tycoons(&a, &a).unwrap().contains(&c.identity()));
        assert!(matches!(
            tycoons(&a, &torsion_set(c, &[1, 2, 3])),
            Err(OracleError::SizeMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn two_tycoons_force_a_nontrivial_stabilizer() {
        // Classes of a verified oracle: whenever two tycoons relate a pair of
        // equal-sized classes, the stabilizer is nontrivial.
        let oracle = SchurOracle::finite_lift(
            FinitePartition::new(8, [vec![0], vec![4], vec![1, 3, 5, 7], vec![2, 6]]).unwrap(),
            FreeImage::Symmetric,
        )
        .unwrap();
        let classes = window_classes(&oracle, window(2));
        let mut saw_multiple = false;
        for a in &classes {
            for b in &classes {
                if a.len() != b.len() {
                    continue;
                }
                let t = tycoons(a, b).unwrap();
                if t.len() >= 2 {
                    saw_multiple = true;
                    assert!(a.stabilizer().unwrap().len() > 1, "A = {a}, B = {b}");
                }
            }
        }
        assert!(saw_multiple, "expected at least one multi-tycoon pair");
    }

    #[test]
    fn detect_examples() {
        assert_eq!(
            detect_max_free_subgroup(&SchurOracle::discrete(ctx(4)), window(5)),
            Some(1)
        );
        let wedge3 = SchurOracle::wedge(SchurOracle::discrete(ctx(3)), 3, FreeImage::Discrete)
            .unwrap();
        assert_eq!(detect_max_free_subgroup(&wedge3, window(6)), Some(3));
        // The affine twist dies at level n, so the full group detects n;
        // a window short of n sees nothing.
        assert_eq!(detect_max_free_subgroup(&full_affine(3), window(6)), Some(3));
        assert_eq!(detect_max_free_subgroup(&full_affine(5), window(4)), None);
        // Finite lifts keep full cosets at every level.
        let lift = SchurOracle::finite_lift(
            FinitePartition::trivial(3).unwrap(),
            FreeImage::Symmetric,
        )
        .unwrap();
        assert_eq!(detect_max_free_subgroup(&lift, window(8)), None);
        // A twist alone forces the free lattice out to level n.
        let twisted = SchurOracle::automorphic(subgroup(3, &[(1, 1, 1)]));
        assert_eq!(detect_max_free_subgroup(&twisted, window(6)), Some(3));
    }

    #[test]
    fn size_lemma_holds_on_verified_tables() {
        for oracle in [
            full_affine(5),
            SchurOracle::automorphic(subgroup(7, &[(1, 1, 1), (-1, 6, 0)])),
            SchurOracle::wedge(
                SchurOracle::automorphic(subgroup(5, &[(1, 2, 0)])),
                2,
                FreeImage::Discrete,
            )
            .unwrap(),
        ] {
            let table = verify_on_window(&oracle, window(2)).verified().unwrap();
            assert!(table.constants.len() > 4);
            assert_eq!(check_size_lemma(&oracle, &table), Vec::new(), "{oracle}");
        }
    }

    #[test]
    fn free_image_of_each_family() {
        assert_eq!(SchurOracle::discrete(ctx(3)).free_image(), FreeImage::Discrete);
        assert_eq!(SchurOracle::symmetric(ctx(3)).free_image(), FreeImage::Symmetric);
        assert_eq!(full_affine(3).free_image(), FreeImage::Symmetric);
        assert_eq!(
            SchurOracle::automorphic(subgroup(5, &[(1, 2, 0)])).free_image(),
            FreeImage::Discrete
        );
    }

    #[test]
    fn torsion_partition_round_trips_through_the_lift() {
        let p = FinitePartition::new(7, [vec![0], vec![1, 2, 4], vec![3, 5, 6]]).unwrap();
        let lift = SchurOracle::finite_lift(p.clone(), FreeImage::Discrete).unwrap();
        assert_eq!(lift.torsion_partition().unwrap(), p);
        // A corruption that drags a free element into a torsion class leaks.
        let c = ctx(7);
        let bad =
            SchurOracle::corrupted(lift, c.element(2, 0), c.element(0, 1)).unwrap();
        assert!(matches!(
            bad.torsion_partition(),
            Err(OracleError::TorsionEscape { .. })
        ));
    }

    #[test]
    fn spec_round_trip_for_every_family() {
        let c = ctx(5);
        let automorphic = SchurOracle::automorphic(subgroup(5, &[(1, 2, 0), (-1, 4, 0)]));
        let lift = SchurOracle::finite_lift(
            FinitePartition::new(5, [vec![0], vec![1, 4], vec![2, 3]]).unwrap(),
            FreeImage::Symmetric,
        )
        .unwrap();
        let wedge =
            SchurOracle::wedge(SchurOracle::symmetric(c), 4, FreeImage::Symmetric).unwrap();
        let corrupted = SchurOracle::corrupted(
            SchurOracle::discrete(c),
            c.element(0, 1),
            c.element(0, 2),
        )
        .unwrap();
        for oracle in [
            SchurOracle::discrete(c),
            SchurOracle::symmetric(c),
            automorphic,
            lift,
            wedge,
            corrupted,
        ] {
            let spec = oracle.to_spec();
            let json = serde_json::to_string(&spec).unwrap();
            let parsed: OracleSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(parsed, spec);
            let rebuilt = SchurOracle::from_spec(&parsed).unwrap();
            assert!(equal_on_window(&oracle, &rebuilt, window(4)), "{oracle}");
        }
    }

    #[test]
    fn spec_json_shape_is_stable() {
        let oracle = SchurOracle::automorphic(subgroup(5, &[(1, 2, 0)]));
        assert_eq!(
            serde_json::to_string(&oracle.to_spec()).unwrap(),
            r#"{"n":5,"family":"automorphic","generators":[{"eps":1,"m":2,"i":0}]}"#
        );
        let missing: OracleSpec =
            serde_json::from_str(r#"{"n":5,"family":"wedge"}"#).unwrap();
        assert!(matches!(
            SchurOracle::from_spec(&missing),
            Err(OracleError::BadSpec(_))
        ));
    }

    fn arb_inner() -> impl Strategy<Value = SchurOracle> {
        prop::sample::select(vec![
            SchurOracle::discrete(ctx(3)),
            SchurOracle::symmetric(ctx(3)),
            SchurOracle::automorphic(subgroup(3, &[(1, 2, 0)])),
            SchurOracle::automorphic(subgroup(3, &[(-1, 2, 1)])),
            SchurOracle::automorphic(subgroup(3, &[(1, 1, 1), (1, 2, 0), (-1, 2, 0)])),
            SchurOracle::finite_lift(
                FinitePartition::trivial(3).unwrap(),
                FreeImage::Symmetric,
            )
            .unwrap(),
        ])
    }

    fn matching_image(oracle: &SchurOracle) -> FreeImage {
        oracle.free_image()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn wedge_towers_collapse(inner in arb_inner(), s1 in 2u64..=3, s2 in 2u64..=4) {
            let outer = matching_image(&inner);
            let once = SchurOracle::wedge(inner.clone(), s1 * s2, outer).unwrap();
            let twice = SchurOracle::wedge(
                SchurOracle::wedge(inner, s1, outer).unwrap(),
                s2,
                outer,
            )
            .unwrap();
            prop_assert!(equal_on_window(&once, &twice, window(12)));
        }

        #[test]
        fn wedging_a_lift_is_idempotent(s in 2u64..=4) {
            let p = FinitePartition::new(5, [vec![0], vec![1, 4], vec![2, 3]]).unwrap();
            let lift = SchurOracle::finite_lift(p, FreeImage::Symmetric).unwrap();
            let wedged = SchurOracle::wedge(lift.clone(), s, FreeImage::Symmetric).unwrap();
            prop_assert!(equal_on_window(&lift, &wedged, window(10)));
        }

        #[test]
        fn transform_maps_classes_covariantly(
            inner in arb_inner(),
            eps in prop::sample::select(vec![1i8, -1]),
            m in prop::sample::select(vec![1i64, 2]),
            i in 0i64..3,
            t in -4i64..=4,
            k in 0i64..3,
        ) {
            let c = ctx(3);
            let tau = AffineAut::new(c, eps, m, i).unwrap();
            let g = c.element(t, k);
            for oracle in [
                inner.clone(),
                SchurOracle::wedge(inner.clone(), 2, matching_image(&inner)).unwrap(),
            ] {
                let transformed = oracle.transform(&tau).unwrap();
                prop_assert_eq!(
                    transformed.class_of(tau.apply(g)),
                    tau.apply_to_set(&oracle.class_of(g)),
                    "oracle {}", oracle
                );
            }
        }

        #[test]
        fn transformed_oracles_stay_verified(
            inner in arb_inner(),
            i in 0i64..3,
        ) {
            let c = ctx(3);
            let tau = AffineAut::new(c, -1, 2, i).unwrap();
            let transformed = inner.transform(&tau).unwrap();
            prop_assert!(verify_on_window(&transformed, window(3)).is_verified());
        }

        #[test]
        fn coset_intersections_are_constant_on_classes(
            inner in arb_inner(),
            t in -6i64..=6,
            k in 0i64..3,
        ) {
            // Nonempty intersections of one class with the cosets z^t Z_n
            // all have the same size.
            let c = ctx(3);
            let class = inner.class_of(c.element(t, k));
            let mut sizes = BTreeMap::new();
            for g in class.iter() {
                *sizes.entry(g.t).or_insert(0u64) += 1;
            }
            let mut distinct: Vec<u64> = sizes.values().copied().collect();
            distinct.dedup();
            prop_assert_eq!(distinct.len(), 1);
        }

        #[test]
        fn torsion_partitions_of_verified_oracles_verify(inner in arb_inner()) {
            let p = inner.torsion_partition().unwrap();
            prop_assert!(crate::finite::verify_partition(&p).is_verified());
        }
    }
}
