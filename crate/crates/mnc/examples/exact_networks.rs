//! The network builders: exact min/max, integer indicators, equality tests,
//! and their composition into predicates.
//!
//!     cargo run --example exact_networks

use mnc::network::Network;

fn main() -> mnc::Result<()> {
    // min/max via (x1 + x2 -/+ |x1 - x2|) / 2, |z| = relu(z) + relu(-z)
    let min2 = Network::min2();
    let max2 = Network::max2();
    println!("min2(3, 5)       = {:?}", min2.eval(&[3.0, 5.0])?);
    println!("max2(3, 5)       = {:?}", max2.eval(&[3.0, 5.0])?);
    println!("min2(7.5, 7.25)  = {:?}", min2.eval(&[7.5, 7.25])?);
    println!("min2(-2, -2)     = {:?}", min2.eval(&[-2.0, -2.0])?);

    // step indicator: 1 iff x >= a on integers
    let ge2 = Network::indicator_ge(2);
    for x in [0.0, 1.0, 2.0, 5.0] {
        println!("indicator_ge(2)({x}) = {:?}", ge2.eval(&[x])?);
    }

    // equality: a hat function that is 1 only at x = a
    let eq1 = Network::equals_const(1);
    for x in [0.0, 1.0, 2.0] {
        println!("equals(1)({x})       = {:?}", eq1.eval(&[x])?);
    }

    // AND of two predicates = min of their 0/1 outputs
    let both = Network::parallel(&[Network::indicator_ge(2), Network::indicator_ge(4)])?
        .then(&Network::min2())?;
    println!("x >= 2 AND x >= 4 at x = 3: {:?}", both.eval(&[3.0])?);
    println!("x >= 2 AND x >= 4 at x = 5: {:?}", both.eval(&[5.0])?);

    // composition and stacking are weight-level operations; the result is
    // still one plain layered network
    let pipeline = Network::affine(vec![vec![1.0, -1.0]], vec![0.0])? // x - y
        .then(&Network::indicator_ge(1))?; // 1 iff x - y >= 1, i.e. x > y on integers
    println!("x > y at (4, 2): {:?}", pipeline.eval(&[4.0, 2.0])?);
    println!("layers: {}", pipeline.layers().len());

    // every network has an all-relu canonical form that evaluates identically
    let canonical = pipeline.to_pure_relu();
    println!(
        "canonical form: {} layers, same output {:?}",
        canonical.layers().len(),
        canonical.eval(&[4.0, 2.0])?
    );
    Ok(())
}
