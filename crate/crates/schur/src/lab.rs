//! Report-generating checks that exercise the classification machinery on
//! concrete instances: structure-constant identities over Z_n, a census of
//! the standard ring families over Z x Z_p with consistency probes,
//! Frobenius closure and wedge-structure sweeps, and counting checks tied
//! to safe and Fermat primes.
//!
//! Every check returns a [`LabReport`]. Reports are deterministic functions
//! of their parameters: rerunning a check with the parameters echoed in the
//! report reproduces it byte for byte. Wall-clock time is kept out of the
//! serialized form for that reason.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::aut::{all_subgroups, is_prime, units, AffineAut, AutSubgroup};
use crate::diffset::{find_difference_partitions, SearchMode};
use crate::finite::{
    enumerate_schur_rings, verify_partition, FinitePartition, FiniteStructureConstants,
    PartitionCheck,
};
use crate::group::{GroupContext, GroupElement};
use crate::oracle::{
    check_size_lemma, detect_max_free_subgroup, equal_on_window, verify_on_window,
    window_classes, window_signature, FreeImage, OracleError, SchurOracle, Window,
};

/// Outcome of a single lab check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every checked instance satisfied the claimed property.
    Pass,
    /// At least one instance failed; `witnesses` pins each failure.
    Fail,
    /// The check's hypothesis could not be established for these
    /// parameters, so the claim was not put to the test.
    Inapplicable,
}

/// One executed check: name, parameter echo, verdict, and supporting facts.
///
/// A `Pass` report never carries witnesses; a `Fail` report always does.
/// `details` holds human-readable observations that do not affect the
/// verdict. `elapsed` is measured but excluded from serialization so that
/// identical parameters produce identical documents.
#[derive(Clone, Debug, Serialize)]
pub struct LabReport {
    pub check: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub verdict: Verdict,
    pub details: Vec<String>,
    pub witnesses: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl LabReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

struct ReportBuilder {
    check: &'static str,
    params: BTreeMap<String, serde_json::Value>,
    details: Vec<String>,
    witnesses: Vec<String>,
    inapplicable: bool,
    started: Instant,
}

impl ReportBuilder {
    fn new(check: &'static str) -> Self {
        Self {
            check,
            params: BTreeMap::new(),
            details: Vec::new(),
            witnesses: Vec::new(),
            inapplicable: false,
            started: Instant::now(),
        }
    }

    fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    fn detail(&mut self, line: impl Into<String>) -> &mut Self {
        self.details.push(line.into());
        self
    }

    fn witness(&mut self, line: impl Into<String>) -> &mut Self {
        self.witnesses.push(line.into());
        self
    }

    /// Marks the whole check as not applicable. Ignored once a witness has
    /// been recorded: a concrete failure always outranks a missing
    /// hypothesis.
    fn inapplicable(&mut self, reason: impl Into<String>) -> &mut Self {
        self.inapplicable = true;
        self.details.push(reason.into());
        self
    }

    fn finish(self) -> LabReport {
        let verdict = if !self.witnesses.is_empty() {
            Verdict::Fail
        } else if self.inapplicable {
            Verdict::Inapplicable
        } else {
            Verdict::Pass
        };
        LabReport {
            check: self.check.to_owned(),
            params: self.params,
            verdict,
            details: self.details,
            witnesses: self.witnesses,
            elapsed: self.started.elapsed(),
        }
    }
}

/// Least member of a block after negating it mod `n`; blocks are named by
/// least member throughout the finite structure-constant table.
fn star_id(block: &[u64], n: u64) -> u64 {
    block.iter().map(|&x| (n - x % n) % n).min().expect("nonempty block")
}

/// Checks the weighted size identity on every nonzero entry of the
/// structure-constant table of every Schur ring over `Z_n`: with
/// `mu` the multiplicity of `C*` in `D E*` and `nu` the multiplicity of
/// `D*` in `E* C`, the products `lambda |E|`, `mu |C|`, `nu |D|` agree.
pub fn lab_size_lemma(n: u64) -> LabReport {
    let mut report = ReportBuilder::new("size-lemma");
    report.param("n", n);
    let rings = match enumerate_schur_rings(n) {
        Ok(rings) => rings,
        Err(err) => {
            report.inapplicable(format!("enumeration unavailable: {err}"));
            return report.finish();
        }
    };
    let mut triples = 0u64;
    for (idx, ring) in rings.iter().enumerate() {
        let PartitionCheck::Verified(table) = verify_partition(ring) else {
            report.witness(format!("ring {idx} over Z_{n} failed verification: {ring}"));
            continue;
        };
        for entry in &table.constants {
            triples += 1;
            let size = |id: u64| table.block(id).expect("tabled block").len() as u64;
            let (c_star, d_star, e_star) = (
                star_id(table.block(entry.c).expect("tabled block"), n),
                star_id(table.block(entry.d).expect("tabled block"), n),
                star_id(table.block(entry.e).expect("tabled block"), n),
            );
            let mu = table.lambda(entry.d, e_star, c_star);
            let nu = table.lambda(e_star, entry.c, d_star);
            let products = [
                entry.lambda * size(entry.e),
                mu * size(entry.c),
                nu * size(entry.d),
            ];
            if products[0] != products[1] || products[1] != products[2] {
                report.witness(format!(
                    "Z_{n} ring {idx} ({ring}): lambda({},{};{})={} gives weighted \
                     counts {:?} with mu={mu}, nu={nu}",
                    entry.c, entry.d, entry.e, entry.lambda, products,
                ));
            }
        }
    }
    report.detail(format!(
        "{} rings over Z_{n}, {triples} nonzero table entries balanced",
        rings.len()
    ));
    report.finish()
}

/// Number of classes appearing in the product of blocks `c` and `d`.
fn product_class_count(table: &FiniteStructureConstants, c: u64, d: u64) -> usize {
    table
        .blocks
        .iter()
        .filter(|e| table.lambda(c, d, e[0]) > 0)
        .count()
}

/// Checks that the product of two classes of coprime sizes is a single
/// class, across every Schur ring over `Z_n`. Pairs involving the identity
/// satisfy this trivially and are counted separately; rings without any
/// non-identity coprime pair are listed rather than silently skipped.
pub fn lab_coprime_product(n: u64) -> LabReport {
    let mut report = ReportBuilder::new("coprime-product");
    report.param("n", n);
    let rings = match enumerate_schur_rings(n) {
        Ok(rings) => rings,
        Err(err) => {
            report.inapplicable(format!("enumeration unavailable: {err}"));
            return report.finish();
        }
    };
    let (mut checked, mut trivial) = (0u64, 0u64);
    let mut vacuous = Vec::new();
    for (idx, ring) in rings.iter().enumerate() {
        let PartitionCheck::Verified(table) = verify_partition(ring) else {
            report.witness(format!("ring {idx} over Z_{n} failed verification: {ring}"));
            continue;
        };
        let mut saw_nontrivial_pair = false;
        for (i, c) in table.blocks.iter().enumerate() {
            for d in &table.blocks[i..] {
                if gcd(c.len() as u64, d.len() as u64) != 1 {
                    continue;
                }
                checked += 1;
                let identity_pair = c[0] == 0 || d[0] == 0;
                if identity_pair {
                    trivial += 1;
                } else {
                    saw_nontrivial_pair = true;
                }
                let span = product_class_count(&table, c[0], d[0]);
                if span != 1 {
                    report.witness(format!(
                        "Z_{n} ring {idx} ({ring}): |{c:?}|={}, |{d:?}|={} are coprime \
                         but the product spans {span} classes",
                        c.len(),
                        d.len(),
                    ));
                }
            }
        }
        if !saw_nontrivial_pair {
            vacuous.push(idx);
        }
    }
    report.detail(format!(
        "{} rings over Z_{n}, {checked} coprime pairs checked ({trivial} involving the identity)",
        rings.len()
    ));
    if !vacuous.is_empty() {
        report.detail(format!(
            "rings with no non-identity coprime pair (identity pairs only): {vacuous:?}"
        ));
    }
    report.finish()
}

fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Whether every class through the lattice points `z^(js)` visible in the
/// window stays inside the subgroup generated by `z^s`, so that the
/// subgroup is a union of classes as far as the window can tell. `None`
/// when the window contains no lattice point to probe.
fn lattice_is_class_union(oracle: &SchurOracle, window: Window, s: u64) -> Option<bool> {
    let ctx = oracle.ctx();
    let radius = window.radius().max(0) as u64;
    if s == 0 || radius < s {
        return None;
    }
    let step = s as i64;
    Some((1..=(radius / s) as i64).all(|j| {
        oracle
            .class_of(ctx.element(j * step, 0))
            .iter()
            .all(|g| g.k == 0 && g.t % step == 0)
    }))
}

/// Checks the Frobenius closure of the class partition: for every class
/// meeting the window and every unit `k` mod `n`, the elementwise `k`-th
/// power of the class is again exactly a class.
///
/// The closure is guaranteed when the subgroup generated by `z^n` is a
/// union of classes (`n` the torsion order). That hypothesis is probed
/// inside the window: when it is positively established, a closure failure
/// is a genuine refutation; when it is refuted or invisible at this radius,
/// a closure failure only makes the check inapplicable.
pub fn lab_frobenius_primitivity(oracle: &SchurOracle, window: Window) -> LabReport {
    let mut report = ReportBuilder::new("frobenius-primitivity");
    let n = oracle.ctx().n();
    report.param("n", n);
    report.param("window", window.radius());
    report.param("oracle", serde_json::to_value(oracle.to_spec()).expect("serializable spec"));

    let hypothesis = lattice_is_class_union(oracle, window, n);
    match hypothesis {
        Some(true) => report.detail(format!("<z^{n}> is a class union at radius {}", window.radius())),
        Some(false) => report.detail(format!(
            "<z^{n}> is not a class union at radius {}; closure not guaranteed",
            window.radius()
        )),
        None => report.detail(format!(
            "radius {} sees no multiple of {n}; lattice hypothesis unprobed",
            window.radius()
        )),
    };

    let sweep: Vec<u64> = if n == 1 {
        report.detail("trivial torsion: sweeping k in {1, 2, 3}".to_owned());
        vec![1, 2, 3]
    } else {
        units(n)
    };

    let classes = window_classes(oracle, window);
    let mut violations = Vec::new();
    for class in &classes {
        let rep = class.first().expect("nonempty class");
        for &k in &sweep {
            let image = class.pow_elements(k as i64);
            let image_rep = image.first().expect("nonempty image");
            let image_class = oracle.class_of(image_rep);
            if image_class != image {
                violations.push(format!(
                    "class of {rep} raised to k={k} gives {image}, but the class of \
                     {image_rep} is {image_class}"
                ));
            }
        }
    }
    report.detail(format!(
        "{} window classes swept over {} exponents",
        classes.len(),
        sweep.len()
    ));

    if !violations.is_empty() {
        if hypothesis == Some(true) {
            for v in violations {
                report.witness(v);
            }
        } else {
            report.inapplicable(format!(
                "closure fails on {} classes, but the lattice hypothesis is not established here",
                violations.len()
            ));
            for v in violations.into_iter().take(3) {
                report.detail(format!("unguaranteed failure: {v}"));
            }
        }
    }
    report.finish()
}

/// Checks the wedge shape of classes away from the detected free subgroup:
/// with `Z^(s)` the maximal class-union subgroup of the free part seen in
/// the window and `n | s`, every class outside `Z^(s/n) x Z_n` must be a
/// union of cosets of a nontrivial torsion subgroup that is itself a union
/// of classes.
///
/// When the window shows no free class-union subgroup at all, nothing
/// forces the hypothesis: a larger one may simply sit beyond the radius. In
/// that case every nontorsion class is checked anyway, and failures only
/// make the report inapplicable instead of refuting it.
pub fn lab_wedge_structure(oracle: &SchurOracle, window: Window) -> LabReport {
    let mut report = ReportBuilder::new("wedge-structure");
    let ctx = oracle.ctx();
    let n = ctx.n();
    report.param("n", n);
    report.param("window", window.radius());
    report.param("oracle", serde_json::to_value(oracle.to_spec()).expect("serializable spec"));

    // `Some(k)` constrains the classes with free exponent not divisible by
    // `k` and makes failures refutations; `None` constrains every
    // nontorsion class on a best-effort basis.
    let lattice: Option<i64> = match detect_max_free_subgroup(oracle, window) {
        Some(s) if s % n == 0 => {
            let k_index = s / n;
            report.detail(format!("maximal free class-union subgroup in window: <z^{s}>"));
            if k_index == 1 {
                report.detail(
                    "the enclosing lattice is the whole group; nothing lies outside".to_owned(),
                );
                return report.finish();
            }
            Some(k_index as i64)
        }
        Some(s) => {
            report.inapplicable(format!(
                "maximal free class-union subgroup in window is <z^{s}> and {n} does not \
                 divide {s}"
            ));
            return report.finish();
        }
        None => {
            report.detail(format!(
                "no free class-union subgroup at radius {}; checking every nontorsion class \
                 without an established hypothesis",
                window.radius()
            ));
            None
        }
    };

    let mut constrained = 0usize;
    let mut violations = Vec::new();
    for class in window_classes(oracle, window) {
        let inside = match lattice {
            Some(k) => class.iter().all(|g| g.t % k == 0),
            None => class.iter().all(|g| g.t == 0),
        };
        if inside {
            continue;
        }
        constrained += 1;
        let stabilizer = class.stabilizer().expect("same context");
        if stabilizer.len() <= 1 {
            violations.push(format!(
                "class {class} has trivial torsion stabilizer, so it is not a coset union"
            ));
            continue;
        }
        for h in stabilizer.iter() {
            if !oracle.class_of(*h).is_subset_of(&stabilizer) {
                violations.push(format!(
                    "class {class} is stabilized by {stabilizer}, which splits the class \
                     of {h} and so is not a class union"
                ));
                break;
            }
        }
    }
    report.detail(format!("{constrained} classes outside the lattice checked"));
    if !violations.is_empty() {
        if lattice.is_some() {
            for v in violations {
                report.witness(v);
            }
        } else {
            report.inapplicable(format!(
                "{} classes are not coset unions, but no enclosing lattice was established",
                violations.len()
            ));
            for v in violations.into_iter().take(3) {
                report.detail(format!("unguaranteed failure: {v}"));
            }
        }
    }
    report.finish()
}

/// One entry of the family census over `Z x Z_p`.
#[derive(Clone, Debug, Serialize)]
pub struct CensusMember {
    /// Generating family: `finite-lift`, `wedge`, or `automorphic`.
    pub family: &'static str,
    /// Human-readable construction parameters.
    pub params: String,
    #[serde(skip)]
    pub oracle: SchurOracle,
}

/// Every census instance over `Z x Z_p`: finite torsion rings lifted along
/// both free images, wedges of automorphic rings at scales `2..=h_bound`,
/// and one automorphic ring per subgroup of the affine automorphism group.
pub fn census_members(p: u64, h_bound: u64) -> Result<Vec<CensusMember>, OracleError> {
    let ctx = GroupContext::new(p)?;
    let mut members = Vec::new();
    for torsion in enumerate_schur_rings(p)? {
        for outer in [FreeImage::Discrete, FreeImage::Symmetric] {
            members.push(CensusMember {
                family: "finite-lift",
                params: format!("torsion {torsion}, image {outer}"),
                oracle: SchurOracle::finite_lift(torsion.clone(), outer)?,
            });
        }
    }
    let subgroups = all_subgroups(ctx);
    for subgroup in &subgroups {
        let inner = SchurOracle::automorphic(subgroup.clone());
        let outer = inner.free_image();
        for scale in 2..=h_bound {
            members.push(CensusMember {
                family: "wedge",
                params: format!("scale {scale}, inner {subgroup}"),
                oracle: SchurOracle::wedge(inner.clone(), scale, outer)?,
            });
        }
    }
    for subgroup in subgroups {
        members.push(CensusMember {
            family: "automorphic",
            params: subgroup.to_string(),
            oracle: SchurOracle::automorphic(subgroup),
        });
    }
    Ok(members)
}

/// Sizes of the distinct classes through the free level `t = 1`, sorted.
fn level_one_class_sizes(oracle: &SchurOracle) -> Vec<usize> {
    let ctx = oracle.ctx();
    let mut seen = BTreeSet::new();
    let mut sizes = Vec::new();
    for k in 0..ctx.n() {
        let class = oracle.class_of(ctx.element(1, k as i64));
        if seen.insert(class.first().expect("nonempty class")) {
            sizes.push(class.len());
        }
    }
    sizes.sort_unstable();
    sizes
}

/// Whether `m` is `q^e` for a prime `q` and `e >= 0`; 1 counts.
fn is_prime_power(m: u64) -> bool {
    if m == 0 {
        return false;
    }
    let mut m = m;
    for q in 2..=m {
        if q * q > m {
            break;
        }
        if m % q == 0 {
            while m % q == 0 {
                m /= q;
            }
            return m == 1;
        }
    }
    true
}

/// Common size of the non-identity torsion classes, when uniform.
fn uniform_torsion_class_size(oracle: &SchurOracle) -> Option<u64> {
    let partition = oracle.torsion_partition().ok()?;
    let mut sizes = partition
        .blocks()
        .iter()
        .filter(|block| block.as_slice() != [0])
        .map(|block| block.len() as u64);
    let first = sizes.next()?;
    sizes.all(|s| s == first).then_some(first)
}

/// Classes covering the free level `t = 1` (and `t = -1` when the level-one
/// class of `z` is symmetric): the number of distinct classes and whether
/// they exhaust exactly that shell.
fn shell_class_count(oracle: &SchurOracle, symmetric: bool) -> (usize, bool) {
    let ctx = oracle.ctx();
    let p = ctx.n();
    let mut ids = BTreeSet::new();
    let mut union = BTreeSet::new();
    for k in 0..p {
        let class = oracle.class_of(ctx.element(1, k as i64));
        ids.insert(class.first().expect("nonempty class"));
        union.extend(class.iter().copied());
    }
    let shell: BTreeSet<GroupElement> = (0..p)
        .flat_map(|k| {
            let mut levels = vec![ctx.element(1, k as i64)];
            if symmetric {
                levels.push(ctx.element(-1, k as i64));
            }
            levels
        })
        .collect();
    (ids.len(), union == shell)
}

/// Hypothesis probes for the census: each probe inspects one deduplicated
/// partition and, when its hypothesis holds inside the window, names the
/// family tags the partition must carry.
struct Probe {
    name: &'static str,
    /// Tags acceptable under the probe's conclusion.
    required_any: &'static [&'static str],
    holds: fn(&SchurOracle, Window) -> bool,
}

fn probe_line_subgroup(oracle: &SchurOracle, window: Window) -> bool {
    let ctx = oracle.ctx();
    let p = ctx.n() as i64;
    let radius = window.radius().max(0);
    (0..p).any(|i| {
        (1..=radius).all(|t| {
            oracle
                .class_of(ctx.element(t, i * t))
                .iter()
                .all(|g| (g.k as i64 - i * g.t).rem_euclid(p) == 0)
        })
    })
}

fn probe_short_symmetric_class(oracle: &SchurOracle, window: Window) -> bool {
    let ctx = oracle.ctx();
    let sym = oracle
        .class_of(ctx.element(1, 0))
        .iter()
        .any(|g| g.t == -1);
    sym && window_classes(oracle, window)
        .iter()
        .any(|class| class.len() == 2 && class.iter().all(|g| g.t.abs() == 1))
}

fn probe_coprime_outside_class(oracle: &SchurOracle, window: Window) -> bool {
    let p = oracle.ctx().n();
    if lattice_is_class_union(oracle, window, p) != Some(true) {
        return false;
    }
    let Some(m) = uniform_torsion_class_size(oracle) else {
        return false;
    };
    window_classes(oracle, window).iter().any(|class| {
        !class.is_empty()
            && class.iter().all(|g| g.k == 0 && g.t % p as i64 != 0)
            && gcd(class.len() as u64, m) == 1
    })
}

fn probe_prime_power_torsion(oracle: &SchurOracle, window: Window) -> bool {
    let p = oracle.ctx().n();
    lattice_is_class_union(oracle, window, p) == Some(true)
        && uniform_torsion_class_size(oracle).is_some_and(is_prime_power)
}

fn probe_two_class_shell(oracle: &SchurOracle, window: Window) -> bool {
    let p = oracle.ctx().n();
    if lattice_is_class_union(oracle, window, p) != Some(true) {
        return false;
    }
    let symmetric = oracle
        .class_of(oracle.ctx().element(1, 0))
        .iter()
        .any(|g| g.t == -1);
    let (count, exhausts) = shell_class_count(oracle, symmetric);
    count == 2 && exhausts
}

fn probe_safe_or_fermat(oracle: &SchurOracle, window: Window) -> bool {
    let p = oracle.ctx().n();
    let fermat = is_prime(p) && (p - 1).is_power_of_two();
    let safe = is_prime(p) && p % 2 == 1 && is_prime((p - 1) / 2);
    (fermat || safe) && lattice_is_class_union(oracle, window, p) == Some(true)
}

fn probe_full_coset_shape(oracle: &SchurOracle, window: Window) -> bool {
    if detect_max_free_subgroup(oracle, window).is_some() {
        return false;
    }
    let p = oracle.ctx().n() as usize;
    window_classes(oracle, window)
        .iter()
        .filter(|class| class.iter().any(|g| g.t != 0))
        .all(|class| class.stabilizer().expect("same context").len() == p)
}

fn probe_proper_wedge_shape(oracle: &SchurOracle, window: Window) -> bool {
    let p = oracle.ctx().n();
    matches!(detect_max_free_subgroup(oracle, window), Some(s) if s % p == 0 && s / p >= 2)
}

const CENSUS_PROBES: &[Probe] = &[
    Probe {
        name: "line-subgroup forces automorphic",
        required_any: &["automorphic"],
        holds: probe_line_subgroup,
    },
    Probe {
        name: "size-2 symmetric level-one class forces automorphic",
        required_any: &["automorphic"],
        holds: probe_short_symmetric_class,
    },
    Probe {
        name: "no visible free subgroup and full-coset classes force a finite lift",
        required_any: &["finite-lift"],
        holds: probe_full_coset_shape,
    },
    Probe {
        name: "free subgroup of proper composite index forces a wedge or lift",
        required_any: &["wedge", "finite-lift"],
        holds: probe_proper_wedge_shape,
    },
    Probe {
        name: "outside class coprime to the torsion class size forces automorphic",
        required_any: &["automorphic"],
        holds: probe_coprime_outside_class,
    },
    Probe {
        name: "prime-power torsion class size forces automorphic",
        required_any: &["automorphic"],
        holds: probe_prime_power_torsion,
    },
    Probe {
        name: "two-class level-one shell forces automorphic",
        required_any: &["automorphic"],
        holds: probe_two_class_shell,
    },
    Probe {
        name: "safe or Fermat torsion order forces automorphic",
        required_any: &["automorphic"],
        holds: probe_safe_or_fermat,
    },
];

/// Generates the census over `Z x Z_p`, verifies every member on the
/// window, balances its structure-constant table, deduplicates members
/// that agree on the window, and runs the consistency probes: whenever a
/// deduplicated partition satisfies a probe's hypothesis, its tag set must
/// contain a family the probe's conclusion allows.
pub fn lab_census(p: u64, h_bound: u64, window: Window) -> LabReport {
    let mut report = ReportBuilder::new("census");
    report.param("p", p);
    report.param("bound", h_bound);
    report.param("window", window.radius());
    if !is_prime(p) {
        report.inapplicable(format!("census requires a prime torsion order, got {p}"));
        return report.finish();
    }
    let members = match census_members(p, h_bound) {
        Ok(members) => members,
        Err(err) => {
            report.inapplicable(format!("census construction failed: {err}"));
            return report.finish();
        }
    };

    let mut signatures: BTreeMap<BTreeSet<Vec<GroupElement>>, (usize, BTreeSet<&'static str>)> =
        BTreeMap::new();
    for (idx, member) in members.iter().enumerate() {
        match verify_on_window(&member.oracle, window).verified() {
            Ok(table) => {
                for violation in check_size_lemma(&member.oracle, &table) {
                    report.witness(format!(
                        "{} ({}): size identity fails on ({}, {}; {}): {:?}",
                        member.family,
                        member.params,
                        violation.c,
                        violation.d,
                        violation.e,
                        violation.issue,
                    ));
                }
            }
            Err(witness) => {
                report.witness(format!(
                    "{} ({}): refuted on window: {witness}",
                    member.family, member.params,
                ));
            }
        }
        report.detail(format!(
            "{:<11} | {} | level-one class sizes {:?}",
            member.family,
            member.params,
            level_one_class_sizes(&member.oracle),
        ));
        signatures
            .entry(window_signature(&member.oracle, window))
            .or_insert((idx, BTreeSet::new()))
            .1
            .insert(member.family);
    }
    report.detail(format!(
        "{} members collapse to {} distinct partitions on the window",
        members.len(),
        signatures.len()
    ));

    for (signature, (rep_idx, tags)) in &signatures {
        let representative = &members[*rep_idx].oracle;
        for probe in CENSUS_PROBES {
            if !(probe.holds)(representative, window) {
                continue;
            }
            if !probe.required_any.iter().any(|tag| tags.contains(tag)) {
                report.witness(format!(
                    "partition of {} classes tagged {:?} satisfies \"{}\" but carries none \
                     of the demanded tags {:?}",
                    signature.len(),
                    tags,
                    probe.name,
                    probe.required_any,
                ));
            }
        }
    }
    report.finish()
}

/// Runs a per-oracle check over every census member and folds the member
/// reports into one: any member failure fails the sweep, and member
/// verdicts are tabulated in the details.
fn sweep_census(
    mut report: ReportBuilder,
    p: u64,
    h_bound: u64,
    check: impl Fn(&SchurOracle) -> LabReport,
) -> LabReport {
    report.param("p", p);
    report.param("bound", h_bound);
    if !is_prime(p) {
        report.inapplicable(format!("census requires a prime torsion order, got {p}"));
        return report.finish();
    }
    let members = match census_members(p, h_bound) {
        Ok(members) => members,
        Err(err) => {
            report.inapplicable(format!("census construction failed: {err}"));
            return report.finish();
        }
    };
    let mut tally: BTreeMap<Verdict, usize> = BTreeMap::new();
    for member in &members {
        let member_report = check(&member.oracle);
        *tally.entry(member_report.verdict).or_default() += 1;
        report.detail(format!(
            "{:?} | {:<11} | {}",
            member_report.verdict, member.family, member.params,
        ));
        for witness in member_report.witnesses {
            report.witness(format!("{} ({}): {witness}", member.family, member.params));
        }
    }
    report.detail(format!(
        "verdicts over {} members: {} pass, {} inapplicable, {} fail",
        members.len(),
        tally.get(&Verdict::Pass).copied().unwrap_or(0),
        tally.get(&Verdict::Inapplicable).copied().unwrap_or(0),
        tally.get(&Verdict::Fail).copied().unwrap_or(0),
    ));
    report.finish()
}

/// [`lab_frobenius_primitivity`] on every census member of `Z x Z_p`.
pub fn lab_frobenius_sweep(p: u64, h_bound: u64, window: Window) -> LabReport {
    let mut report = ReportBuilder::new("frobenius-primitivity");
    report.param("window", window.radius());
    sweep_census(report, p, h_bound, |oracle| lab_frobenius_primitivity(oracle, window))
}

/// [`lab_wedge_structure`] on every census member of `Z x Z_p`.
pub fn lab_wedge_sweep(p: u64, h_bound: u64, window: Window) -> LabReport {
    let mut report = ReportBuilder::new("wedge-structure");
    report.param("window", window.radius());
    sweep_census(report, p, h_bound, |oracle| lab_wedge_structure(oracle, window))
}

/// Recomputes the sizes `k` admissible for a class at a single free level
/// when the torsion classes have maximal size: counting forces
/// `(p-1) | k(k-1)`. For a safe prime `p = 2q+1` the admissible list must
/// be exactly `{0, 1, q, q+1, 2q, 2q+1}`; for a Fermat prime nothing
/// strictly between 1 and `p-1` is admissible. Cross-checks that the
/// difference-partition search over `Z_p` finds nothing nontrivial.
pub fn lab_safe_prime_counting(p: u64) -> LabReport {
    let mut report = ReportBuilder::new("safe-prime-counting");
    report.param("p", p);
    if !is_prime(p) || p < 3 {
        report.inapplicable(format!("{p} is not an odd prime"));
        return report.finish();
    }
    let q = (p - 1) / 2;
    let fermat = (p - 1).is_power_of_two();
    let safe = p % 2 == 1 && is_prime(q);
    if !fermat && !safe {
        report.inapplicable(format!("{p} is neither a Fermat nor a safe prime"));
        return report.finish();
    }

    let admissible: Vec<u64> = (0..=p).filter(|k| (k * k.saturating_sub(1)) % (p - 1) == 0).collect();
    report.detail(format!("sizes with (p-1) | k(k-1): {admissible:?}"));
    if safe {
        let forced = {
            let mut e = vec![0, 1, q, q + 1, 2 * q, 2 * q + 1];
            e.sort_unstable();
            e.dedup();
            e
        };
        report.detail(format!("safe prime {p} = 2*{q}+1: sizes must fall in {forced:?}"));
        if let Some(escapee) = admissible.iter().find(|k| !forced.contains(k)) {
            report.witness(format!(
                "admissible size {escapee} escapes the forced list {forced:?}"
            ));
        }
    }
    if fermat {
        let interior: Vec<u64> =
            admissible.iter().copied().filter(|&k| k >= 2 && k + 2 <= p).collect();
        report.detail(format!("Fermat prime {p}: interior admissible sizes {interior:?}"));
        if !interior.is_empty() {
            report.witness(format!(
                "Fermat prime {p} admits interior sizes {interior:?}, expected none"
            ));
        }
    }

    match find_difference_partitions(p, SearchMode::NonTrivialOnly) {
        Ok(search) => {
            if search.partitions.is_empty() {
                report.detail(format!(
                    "difference-partition search over Z_{p} (nontrivial mode) is empty"
                ));
            } else {
                report.witness(format!(
                    "expected no nontrivial difference partition over Z_{p}, found {}",
                    search.partitions.len()
                ));
            }
        }
        Err(err) => {
            report.inapplicable(format!("difference-partition search unavailable: {err}"));
        }
    }
    report.finish()
}

/// The eight standard rings over `Z x Z_2`: the two lifts of the full
/// torsion ring, the two plain wedges at scale 2, the twisted wedge and its
/// untwisted global form, and the discrete and symmetric rings. Each must
/// verify on `window`, and all eight must already be pairwise distinct at
/// radius 2.
pub fn lab_z2_forms(window: Window) -> LabReport {
    let mut report = ReportBuilder::new("z2-forms");
    report.param("window", window.radius());
    report.param("distinct_window", 2);
    let ctx = GroupContext::new(2).expect("valid torsion order");
    let psi = AffineAut::new(ctx, -1, 1, 1).expect("valid twist");
    let twisted = AutSubgroup::closure(ctx, [psi]).expect("same context");
    let build = || -> Result<Vec<SchurOracle>, OracleError> {
        let torsion = FinitePartition::discrete(2)?;
        Ok(vec![
            SchurOracle::finite_lift(torsion.clone(), FreeImage::Discrete)?,
            SchurOracle::finite_lift(torsion, FreeImage::Symmetric)?,
            SchurOracle::wedge(SchurOracle::discrete(ctx), 2, FreeImage::Discrete)?,
            SchurOracle::wedge(SchurOracle::symmetric(ctx), 2, FreeImage::Symmetric)?,
            SchurOracle::wedge(
                SchurOracle::automorphic(twisted.clone()),
                2,
                FreeImage::Symmetric,
            )?,
            SchurOracle::automorphic(twisted),
            SchurOracle::discrete(ctx),
            SchurOracle::symmetric(ctx),
        ])
    };
    let forms = match build() {
        Ok(forms) => forms,
        Err(err) => {
            report.inapplicable(format!("construction failed: {err}"));
            return report.finish();
        }
    };

    for form in &forms {
        match verify_on_window(form, window) {
            check if check.is_verified() => report.detail(format!("verified: {form}")),
            _ => report.witness(format!("{form} fails verification on the window")),
        };
    }
    let near = Window::new(2).expect("nonnegative radius");
    for (i, a) in forms.iter().enumerate() {
        for b in &forms[i + 1..] {
            if equal_on_window(a, b, near) {
                report.witness(format!("{a} and {b} agree at radius 2"));
            }
        }
    }
    report.detail(format!("{} forms pairwise distinct at radius 2", forms.len()));
    report.finish()
}

/// One deferred check from the default suite. Jobs are independent, so a
/// scheduler may run them in any order or concurrently; the position in the
/// list from [`lab_all_jobs`] is the canonical report order.
pub type LabJob = Box<dyn FnOnce() -> LabReport + Send>;

/// The full default suite as independent jobs in canonical check-name
/// order: censuses, finite-table identities, the census sweeps, the
/// counting checks, and the `Z x Z_2` form list.
pub fn lab_all_jobs() -> Vec<LabJob> {
    let near = Window::new(4).expect("nonnegative radius");
    let mut jobs: Vec<LabJob> = Vec::new();
    for p in [3, 5] {
        jobs.push(Box::new(move || lab_census(p, 3, near)));
    }
    for n in 2..=7 {
        jobs.push(Box::new(move || lab_coprime_product(n)));
    }
    jobs.push(Box::new(move || lab_frobenius_sweep(3, 3, near)));
    for p in [3, 5, 7, 11, 17, 23] {
        jobs.push(Box::new(move || lab_safe_prime_counting(p)));
    }
    for n in 2..=7 {
        jobs.push(Box::new(move || lab_size_lemma(n)));
    }
    jobs.push(Box::new(move || lab_wedge_sweep(3, 3, near)));
    jobs.push(Box::new(move || lab_z2_forms(Window::new(6).expect("nonnegative radius"))));
    jobs
}

/// The full default suite, reported in canonical check-name order.
pub fn lab_all() -> Vec<LabReport> {
    let reports: Vec<LabReport> = lab_all_jobs().into_iter().map(|job| job()).collect();
    debug_assert!(reports.windows(2).all(|w| w[0].check <= w[1].check));
    reports
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::OracleCheck;

    fn window(radius: i64) -> Window {
        Window::new(radius).expect("nonnegative radius")
    }

    #[test]
    fn size_lemma_balances_small_moduli() {
        for n in 2..=7 {
            let report = lab_size_lemma(n);
            assert_eq!(report.verdict, Verdict::Pass, "n={n}: {:?}", report.witnesses);
        }
    }

    #[test]
    fn size_lemma_sees_the_trivial_ring_products() {
        let trivial = FinitePartition::trivial(7).unwrap();
        let PartitionCheck::Verified(table) = verify_partition(&trivial) else {
            panic!("trivial ring verifies");
        };
        assert_eq!(table.lambda(1, 1, 1), 5);
        assert_eq!(table.block(1).unwrap().len(), 6);
    }

    #[test]
    fn coprime_products_are_single_classes() {
        for n in 2..=7 {
            let report = lab_coprime_product(n);
            assert_eq!(report.verdict, Verdict::Pass, "n={n}: {:?}", report.witnesses);
        }
    }

    #[test]
    fn frobenius_passes_on_discrete_and_scaled_wedge() {
        let ctx = GroupContext::new(5).unwrap();
        let discrete = SchurOracle::discrete(ctx);
        assert_eq!(lab_frobenius_primitivity(&discrete, window(6)).verdict, Verdict::Pass);

        let wedge =
            SchurOracle::wedge(SchurOracle::discrete(ctx), 5, FreeImage::Discrete).unwrap();
        let report = lab_frobenius_primitivity(&wedge, window(6));
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.witnesses);
    }

    #[test]
    fn frobenius_refutes_a_corrupted_oracle() {
        let ctx = GroupContext::new(5).unwrap();
        let base = SchurOracle::symmetric(ctx);
        let corrupted =
            SchurOracle::corrupted(base, ctx.element(1, 0), ctx.element(2, 0)).unwrap();
        let report = lab_frobenius_primitivity(&corrupted, window(6));
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(!report.witnesses.is_empty());
    }

    #[test]
    fn frobenius_is_inapplicable_off_the_lattice() {
        // Scale-2 wedge over p=3: squaring the level-one coset lands on
        // scaled singleton classes, but the lattice through z^3 is not a
        // class union, so the failure is unguaranteed.
        let ctx = GroupContext::new(3).unwrap();
        let wedge =
            SchurOracle::wedge(SchurOracle::discrete(ctx), 2, FreeImage::Discrete).unwrap();
        let report = lab_frobenius_primitivity(&wedge, window(4));
        assert_eq!(report.verdict, Verdict::Inapplicable);
        assert!(report.witnesses.is_empty());
    }

    #[test]
    fn wedge_structure_holds_for_lifts_and_full_affine() {
        let lift = SchurOracle::finite_lift(
            FinitePartition::discrete(3).unwrap(),
            FreeImage::Discrete,
        )
        .unwrap();
        let report = lab_wedge_structure(&lift, window(5));
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.witnesses);

        let ctx5 = GroupContext::new(5).unwrap();
        let full = SchurOracle::automorphic(AutSubgroup::full(ctx5));
        let report = lab_wedge_structure(&full, window(6));
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.witnesses);
    }

    #[test]
    fn wedge_structure_rejects_a_broken_fission() {
        // Scale-6 wedge over p=3: the window at radius 6 certifies <z^6>
        // as a class union, so the enclosing lattice through z^2 is
        // established and the non-coset fission is a refutation.
        let ctx = GroupContext::new(3).unwrap();
        let scaling = AffineAut::torsion_scaling(ctx, 2).unwrap();
        let inner = SchurOracle::automorphic(AutSubgroup::closure(ctx, [scaling]).unwrap());
        let wedge = SchurOracle::wedge(inner, 6, FreeImage::Discrete).unwrap();
        let corrupted =
            SchurOracle::corrupted(wedge, ctx.element(1, 0), ctx.element(3, 0)).unwrap();
        let report = lab_wedge_structure(&corrupted, window(6));
        assert_eq!(report.verdict, Verdict::Fail, "{:?}", report.details);
        assert!(!report.witnesses.is_empty());
    }

    #[test]
    fn wedge_structure_gates_on_the_lattice_hypothesis() {
        // The same fission applied to a lift is only inapplicable: no free
        // class-union subgroup is visible at any radius, so the trivial-H
        // conclusion is never established.
        let ctx = GroupContext::new(3).unwrap();
        let lift = SchurOracle::finite_lift(
            FinitePartition::discrete(3).unwrap(),
            FreeImage::Discrete,
        )
        .unwrap();
        let corrupted =
            SchurOracle::corrupted(lift, ctx.element(1, 0), ctx.element(2, 0)).unwrap();
        let report = lab_wedge_structure(&corrupted, window(4));
        assert_eq!(report.verdict, Verdict::Inapplicable);
        assert!(report.witnesses.is_empty());
    }

    #[test]
    fn census_small_prime_passes_with_expected_size() {
        let report = lab_census(3, 3, window(4));
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.witnesses);
        // 2 torsion rings * 2 images + 16 subgroups * 2 scales + 16 subgroups.
        let members = census_members(3, 3).unwrap();
        assert_eq!(members.len(), 4 + 32 + 16);
    }

    #[test]
    fn census_rejects_nonprime_torsion() {
        assert_eq!(lab_census(4, 3, window(4)).verdict, Verdict::Inapplicable);
    }

    #[test]
    fn census_sweeps_raise_no_failures() {
        let frobenius = lab_frobenius_sweep(3, 3, window(4));
        assert_ne!(frobenius.verdict, Verdict::Fail, "{:?}", frobenius.witnesses);
        let wedge = lab_wedge_sweep(3, 3, window(4));
        assert_ne!(wedge.verdict, Verdict::Fail, "{:?}", wedge.witnesses);
    }

    #[test]
    fn safe_prime_counting_matches_hand_lists() {
        let report = lab_safe_prime_counting(11);
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.witnesses);
        assert!(report.details.iter().any(|d| d.contains("[0, 1, 5, 6, 10, 11]")));

        let report = lab_safe_prime_counting(7);
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.witnesses);
        assert!(report.details.iter().any(|d| d.contains("[0, 1, 3, 4, 6, 7]")));

        assert_eq!(lab_safe_prime_counting(17).verdict, Verdict::Pass);
        assert_eq!(lab_safe_prime_counting(13).verdict, Verdict::Inapplicable);
        assert_eq!(lab_safe_prime_counting(9).verdict, Verdict::Inapplicable);
    }

    #[test]
    fn z2_forms_verify_and_separate() {
        let report = lab_z2_forms(window(6));
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.witnesses);
    }

    #[test]
    fn full_suite_is_ordered_and_honest() {
        let reports = lab_all();
        assert!(reports.windows(2).all(|w| w[0].check <= w[1].check));
        for report in &reports {
            assert_ne!(report.verdict, Verdict::Fail, "{}: {:?}", report.check, report.witnesses);
            if report.verdict == Verdict::Pass {
                assert!(report.witnesses.is_empty());
            }
        }
    }

    #[test]
    fn reports_serialize_without_timing() {
        let report = lab_size_lemma(3);
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("elapsed").is_none());
        assert_eq!(json["check"], "size-lemma");
        assert_eq!(json["params"]["n"], 3);
    }

    #[test]
    fn probes_fire_where_expected() {
        let ctx = GroupContext::new(5).unwrap();
        let discrete = SchurOracle::discrete(ctx);
        assert!(probe_line_subgroup(&discrete, window(5)));
        assert!(probe_prime_power_torsion(&discrete, window(5)));

        let lift = SchurOracle::finite_lift(
            FinitePartition::trivial(5).unwrap(),
            FreeImage::Discrete,
        )
        .unwrap();
        assert!(probe_full_coset_shape(&lift, window(5)));
        assert!(!probe_line_subgroup(&lift, window(5)));

        // Full torsion scaling fixes z and splits the level-one coset into
        // the singleton of z and the rest.
        let r = crate::aut::primitive_root_mod(5).unwrap();
        let scaling = AffineAut::torsion_scaling(ctx, r as i64).unwrap();
        let sub = AutSubgroup::closure(ctx, [scaling]).unwrap();
        let auto = SchurOracle::automorphic(sub);
        assert!(probe_two_class_shell(&auto, window(5)));
        let report = lab_census(5, 3, window(4));
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.witnesses);
    }

    #[test]
    fn verify_check_shape_is_exercised() {
        let ctx = GroupContext::new(2).unwrap();
        let oracle = SchurOracle::discrete(ctx);
        let check: OracleCheck = verify_on_window(&oracle, window(3));
        assert!(check.is_verified());
    }
}
