//! Exact arithmetic in the rational group algebra of Z x Z_6: convolution,
//! the star involution, Frobenius maps, and the Hadamard product.

use num_rational::BigRational;
use num_traits::One;

use schur::group::{AlgebraElement, GroupContext};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn show(label: &str, x: &AlgebraElement) {
    let terms: Vec<String> = x.terms().map(|(g, c)| format!("{c}*{g}")).collect();
    println!("{label} = {}", if terms.is_empty() { "0".into() } else { terms.join(" + ") });
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = GroupContext::new(6)?;

    // x = z + a, y = z^-1 + 2 a^5.
    let x = AlgebraElement::from_terms(
        ctx,
        [(ctx.element(1, 0), rat(1)), (ctx.element(0, 1), rat(1))],
    );
    let y = AlgebraElement::from_terms(
        ctx,
        [(ctx.element(-1, 0), rat(1)), (ctx.element(0, 5), rat(2))],
    );
    show("x", &x);
    show("y", &y);

    show("x * y", &x.convolve(&y)?);
    show("x + y", &x.add(&y)?);

    // The star involution inverts each term; it is an anti-automorphism,
    // so (x * y)^* = y^* * x^*.
    show("x^*", &x.star());
    let lhs = x.convolve(&y)?.star();
    let rhs = y.star().convolve(&x.star())?;
    assert_eq!(lhs, rhs);
    println!("(x * y)^* = y^* * x^*  checked");

    // Frobenius maps send each group element to its m-th power and compose
    // multiplicatively in the exponent.
    let f6 = x.frobenius(6);
    let f23 = x.frobenius(2).frobenius(3);
    show("x^(6)", &f6);
    assert_eq!(f6, f23);
    println!("x^(6) = (x^(2))^(3)  checked");

    // The Hadamard product keeps the common support with multiplied
    // coefficients; simple quantities are idempotent under it.
    let zbar = AlgebraElement::from_terms(
        ctx,
        [(ctx.element(1, 0), rat(1)), (ctx.element(0, 1), rat(1))],
    );
    let had = zbar.hadamard(&x)?;
    show("zbar o x", &had);
    assert_eq!(had, x.hadamard(&zbar)?);

    // Projections split an element into its free and torsion parts.
    let mixed = x.add(&y)?;
    show("free part", &mixed.project_free());
    show("torsion part", &mixed.project_torsion());

    // Convolution against the identity is the identity map.
    let one = AlgebraElement::one(ctx);
    assert_eq!(one.convolve(&x)?, x);
    assert!(one.coeff(&ctx.identity()).is_one());
    println!("identity law checked");

    Ok(())
}
