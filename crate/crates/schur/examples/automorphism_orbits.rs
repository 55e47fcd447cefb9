//! The automorphism group of Z x Z_5 as affine triples: generators, closure,
//! orbits, and conjugation.

use schur::aut::{primitive_root_mod, AffineAut, AutSubgroup};
use schur::group::GroupContext;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = GroupContext::new(5)?;

    // The three standard generators: the twist z -> az, scaling by a
    // primitive root, and inversion.
    let rho = AffineAut::twist(ctx);
    let r = primitive_root_mod(5)?;
    let sigma_r = AffineAut::torsion_scaling(ctx, r as i64)?;
    let star = AffineAut::inversion(ctx);
    println!("rho     = {rho}");
    println!("sigma_{r} = {sigma_r}");
    println!("star    = {star}");

    // Their closure is the full automorphism group, of order 2 * 5 * 4.
    let full = AutSubgroup::closure(ctx, [rho, sigma_r, star])?;
    println!("|<rho, sigma_{r}, star>| = {}", full.order());
    assert_eq!(full.order(), 40);

    // Orbits of the full group are unions of torsion cosets.
    for g in [ctx.element(0, 1), ctx.element(1, 0), ctx.element(2, 3)] {
        let orbit = full.orbit(g);
        let members: Vec<String> = orbit.iter().map(ToString::to_string).collect();
        println!("orbit({g}) = {{{}}}  (size {})", members.join(", "), orbit.len());
    }

    // A proper subgroup separates more orbits: scaling alone fixes every
    // free exponent and fans out only the torsion component.
    let scaling = AutSubgroup::closure(ctx, [sigma_r])?;
    println!("|<sigma_{r}>| = {}", scaling.order());
    let az = ctx.element(1, 1);
    let orbit = scaling.orbit(az);
    println!("orbit({az}) under <sigma_{r}> has size {}", orbit.len());
    assert_eq!(orbit.len(), 4);

    // Conjugating a subgroup permutes its orbits through the conjugator.
    let conjugated = scaling.conjugate(&rho)?;
    println!("|rho <sigma_{r}> rho^-1| = {}", conjugated.order());
    let image = conjugated.orbit(rho.apply(az));
    assert_eq!(image, rho.apply_to_set(&scaling.orbit(az)));
    println!("conjugation maps orbits to orbits  checked");

    // Composition table fragment: star conjugates scaling to scaling by
    // the inverse residue.
    let composed = star.compose(&sigma_r)?.compose(&star)?;
    println!("star . sigma_{r} . star = {composed}");

    Ok(())
}
