//! Probability that a GOE matrix is positive definite, and the exponential
//! rate fitted to it.

use carve_lab::ensembles::{fit_decay_rate, prob_positive_definite, GoeSpec};

fn main() {
    let mut pairs = Vec::new();
    for n in 1..=5 {
        let est = prob_positive_definite(&GoeSpec::new(n), 400_000, 7).unwrap();
        println!("n={n}: p = {:.3e}  [{:.3e}, {:.3e}]", est.p, est.lo, est.hi);
        pairs.push((n, est.p));
    }
    let fit = fit_decay_rate(&pairs[1..]).unwrap();
    println!("p ~ exp(-k n^2) with k = {:.3}", fit.k);
}
