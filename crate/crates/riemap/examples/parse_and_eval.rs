//! Expression DSL basics: parsing, exact derivatives via forward jets, the
//! finite-difference oracle, and the error paths.
//!
//! Run with `cargo run -p riemap --example parse_and_eval`.

use riemap::ExprAst;

fn main() -> riemap::Result<()> {
    let coords: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();

    // Parse once, evaluate anywhere. `^` is right-associative and binds
    // tighter than unary minus; integer exponents are evaluated by repeated
    // multiplication so jets stay exact.
    let f = ExprAst::parse("1 + 4*(x^2 + y^2)", &coords)?;
    let p = [0.5, -0.25];
    println!("f(x,y) = {f}");
    println!("f{p:?} = {}", f.eval_value(&p)?);

    // A jet carries the value, gradient and Hessian at once.
    let jet = f.eval_jet(&p)?;
    println!("gradient = {:?}", jet.gradient.as_slice());
    println!(
        "hessian  = [[{}, {}], [{}, {}]]",
        jet.hessian[(0, 0)],
        jet.hessian[(0, 1)],
        jet.hessian[(1, 0)],
        jet.hessian[(1, 1)]
    );

    // The independent oracle: central differences of plain values.
    let fd = f.eval_jet_fd(&p, 1e-5, 1e-4)?;
    let grad_gap = (0..2)
        .map(|i| (jet.gradient[i] - fd.gradient[i]).abs())
        .fold(0.0f64, f64::max);
    println!("max |jet gradient - central difference| = {grad_gap:.2e}");

    // Printing produces a fully parenthesized form that reparses to an
    // expression with identical values.
    let g = ExprAst::parse("sin(x*y)/(1 + cos(y)^2) - 2^-2", &coords)?;
    let printed = g.to_string();
    let reparsed = ExprAst::parse(&printed, &coords)?;
    println!("round trip: {printed}");
    assert_eq!(
        g.eval_value(&p)?.to_bits(),
        reparsed.eval_value(&p)?.to_bits()
    );

    // Errors carry positions and the offending node.
    match ExprAst::parse("x + * y", &coords) {
        Err(e) => println!("syntax error: {e}"),
        Ok(_) => unreachable!(),
    }
    match ExprAst::parse("x + zz", &coords) {
        Err(e) => println!("unknown name: {e}"),
        Ok(_) => unreachable!(),
    }
    let log = ExprAst::parse("log(x - 1)", &coords)?;
    match log.eval_value(&[0.0, 0.0]) {
        Err(e) => println!("domain error: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
