//! Difference sets and difference partitions over Z_v: Paley certificates,
//! exhaustive enumeration, and non-existence searches.

use schur::diffset::{
    admissible_sizes, classify_triviality, enumerate_difference_sets, find_difference_partitions,
    is_difference_set, paley_set, SearchMode,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Quadratic residues mod a prime p = 3 (mod 4) form a difference set.
    for p in [7, 11, 19, 23] {
        let set = paley_set(p)?;
        let cert = is_difference_set(p, &set)?.expect("Paley sets certify");
        println!(
            "Paley({p:>2}): k = {}, lambda = {}, set = {:?}",
            cert.k, cert.lambda, cert.set
        );
    }

    // The size sieve k(k-1) = 0 mod (v-1) prunes the exhaustive search.
    println!("\nadmissible sizes over Z_13: {:?}", admissible_sizes(13));
    let sets = enumerate_difference_sets(13)?;
    let planar: Vec<_> = sets.iter().filter(|cert| cert.k == 4).collect();
    println!("difference sets over Z_13: {} total, {} of size 4", sets.len(), planar.len());
    for cert in planar.iter().take(3) {
        println!("  {:?} with lambda = {}", cert.set, cert.lambda);
    }

    // Z_7 carries many difference partitions, but each one leans on a
    // trivial template: a singleton, a near-full block, or a two-block
    // split. A non-trivial partition needs three blocks of middle sizes,
    // and no size multiset over Z_7 allows that.
    let search = find_difference_partitions(7, SearchMode::All)?;
    println!(
        "\nZ_7 difference partitions: {} found from {} size multisets",
        search.partitions.len(),
        search.size_multisets.len()
    );
    let trivial = search
        .partitions
        .iter()
        .filter(|dp| classify_triviality(dp) == schur::diffset::Triviality::Trivial)
        .count();
    println!("all {trivial} of them are built from trivial templates");
    let paley_split = search
        .partitions
        .iter()
        .find(|dp| dp.blocks.len() == 3 && dp.blocks.iter().any(|cert| cert.k == 3))
        .expect("the Paley split appears");
    let blocks: Vec<&[u64]> = paley_split.blocks.iter().map(|cert| cert.set.as_slice()).collect();
    println!("the Paley split is one of them: {blocks:?}");

    // Over Z_11 the non-trivial search comes back provably empty.
    let empty = find_difference_partitions(11, SearchMode::NonTrivialOnly)?;
    println!(
        "\nZ_11 non-trivial search: {} partitions, exhaustive = {}",
        empty.partitions.len(),
        empty.exhaustive
    );

    Ok(())
}
