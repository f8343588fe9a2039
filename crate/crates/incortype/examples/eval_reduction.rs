//! Call-by-name evaluation: a converging program, a diverging one, and one
//! that goes wrong.
//!
//! Run with `cargo run --example eval_reduction`.

use incortype::frontend::parse_term;
use incortype::reduction::{eval, EvalOutcome};

fn show(label: &str, src: &str, fuel: usize) {
    let term = parse_term(src).expect("example term parses");
    match eval(&term, fuel).expect("closed term") {
        EvalOutcome::Converged { value, steps } => {
            println!("{label}: converged in {steps} steps to {value}")
        }
        EvalOutcome::WentWrong { stuck, steps } => {
            println!("{label}: went wrong in {steps} steps at {stuck}")
        }
        EvalOutcome::FuelExhausted { steps, .. } => {
            println!("{label}: still running after {steps} steps")
        }
    }
}

fn main() {
    show(
        "power 2 3",
        "(fix f -> fun x -> fun y -> if y = 0 then 1 else x * (f x (y - 1))) 2 3",
        10_000,
    );
    show("div", "div", 50);
    show(
        "hebert 1",
        "let op = fun x -> fun y -> x + y in op 5 'you",
        10_000,
    );
}
