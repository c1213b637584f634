//! The folding construction: a deep 1-D network whose region count meets the
//! lower bound, carved exactly on the unit interval.

use carve_lab::carver::{build_folding_network, carve_exact_2d, embed_in_strip, strip_box};
use carve_lab::rational::int;

fn main() {
    let (n, d) = (4, 1);
    for layers in 2..=4 {
        let net = build_folding_network(n, d, layers).unwrap();
        let strip = embed_in_strip(&net).unwrap();
        let regions = carve_exact_2d(&strip, &strip_box(int(0), int(1)).unwrap()).unwrap();
        let lower = 4u64.pow(layers as u32 - 1) * 5;
        println!("L={layers}: {} regions, lower bound {lower}", regions.len());
    }
}
