//! The oracle families over Z x Z_n: construction, windowed verification,
//! product decomposition, and the structure constants they certify.

use schur::aut::{AffineAut, AutSubgroup};
use schur::finite::FinitePartition;
use schur::group::GroupContext;
use schur::oracle::{
    decompose_product, detect_max_free_subgroup, verify_on_window, window_classes, Decomposition,
    FreeImage, OracleCheck, SchurOracle, Window,
};

fn describe(oracle: &SchurOracle, window: Window) {
    let verdict = match verify_on_window(oracle, window) {
        OracleCheck::Verified(table) => format!(
            "verified ({} classes touched, {} nonzero constants)",
            table.classes.len(),
            table.constants.len()
        ),
        OracleCheck::Refuted(witness) => format!("refuted: {witness}"),
    };
    let lattice = match detect_max_free_subgroup(oracle, window) {
        Some(s) => format!("free classes live on <z^{s}>"),
        None => "no proper free lattice visible in this window".into(),
    };
    println!("{:<11} {verdict}; {lattice}", oracle.kind_name());
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = GroupContext::new(5)?;
    let window = Window::new(4)?;

    // Discrete and symmetric: the two extremes with singleton torsion.
    let discrete = SchurOracle::discrete(ctx);
    let symmetric = SchurOracle::symmetric(ctx);

    // Automorphic: classes are orbits of an automorphism subgroup.
    let full = AutSubgroup::full(ctx);
    let automorphic = SchurOracle::automorphic(full);

    // Finite lift: a Schur ring over Z_5 crossed with a free image.
    let paley5 = FinitePartition::new(5, [vec![0], vec![1, 4], vec![2, 3]])?;
    let lift = SchurOracle::finite_lift(paley5, FreeImage::Symmetric)?;

    // Wedge: an inner ring on <z^2> x Z_5 glued to an outer image.
    let inner = SchurOracle::automorphic(AutSubgroup::closure(
        ctx,
        [AffineAut::torsion_scaling(ctx, 2)?],
    )?);
    let wedge = SchurOracle::wedge(inner, 2, FreeImage::Discrete)?;

    for oracle in [&discrete, &symmetric, &automorphic, &lift, &wedge] {
        describe(oracle, window);
    }

    // Products of classes expand exactly back into classes.
    let z_class = automorphic.class_of(ctx.element(1, 0));
    let members: Vec<String> = z_class.iter().map(ToString::to_string).collect();
    println!("\nautomorphic class of z: {{{}}}", members.join(", "));
    match decompose_product(&automorphic, &z_class, &z_class.star())? {
        Decomposition::Exact(terms) => {
            for (class, lambda) in terms {
                let id = class.first().expect("classes are nonempty");
                println!("  lambda = {lambda} at the class of {id} (size {})", class.len());
            }
        }
        Decomposition::Obstructed(witness) => println!("  obstructed: {witness}"),
    }

    // Window classes are the distinct classes meeting |t| <= radius.
    let classes = window_classes(&lift, window);
    println!("\nfinite-lift window classes: {}", classes.len());
    for class in classes.iter().take(4) {
        let members: Vec<String> = class.iter().map(ToString::to_string).collect();
        println!("  {{{}}}", members.join(", "));
    }

    Ok(())
}
