//! Critical points of random polynomials: saddles outnumber minima, more so
//! as the number of variables grows.

use carve_lab::ensembles::{critical_point_stats, RandomPolynomialSpec};

fn main() {
    for nvars in 1..=3 {
        let st = critical_point_stats(&RandomPolynomialSpec { nvars, degree: 3 }, 200, 3, 100);
        println!(
            "n={nvars}: {:.2} critical points per draw; minima {:.3}, maxima {:.3}, saddles {:.3}",
            st.mean_count, st.frac_local_min, st.frac_local_max, st.frac_saddle
        );
    }
}
