//! Satisfiability of random 3-SAT against the clause ratio.

use carve_lab::satlab::{half_crossing, phase_sweep, DEFAULT_BUDGET};

fn main() {
    let alphas: Vec<f64> = (0..=16).map(|k| 2.0 + 0.25 * k as f64).collect();
    let points = phase_sweep(30, &alphas, 100, 2, DEFAULT_BUDGET).unwrap();
    for p in &points {
        println!("alpha {:.2}  sat {:.2}  median nodes {}", p.alpha, p.fraction, p.median_nodes);
    }
    if let Some(a) = half_crossing(&points) {
        println!("half of the formulas are satisfiable at alpha = {a:.2}");
    }
}
