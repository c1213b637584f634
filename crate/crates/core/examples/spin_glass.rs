//! Spherical p-spin glass: critical points found by descent, with their index
//! and energy. Low-energy points have low index.

use carve_lab::spinglass::{index_energy_profile, ProfileConfig};

fn main() {
    let profile = index_energy_profile(16, 3, 100, 4, &ProfileConfig::default()).unwrap();
    println!("{} of 100 runs converged", profile.converged().len());
    println!("median index in the lowest energy decile: {}", profile.lowest_decile_median_index());
    println!("spearman(energy, index) = {:.3}", profile.spearman());
}
