//! A multiplicative (attention-like) unit: each activation cell carries a
//! polynomial, here of degree two.

use carve_lab::arrangement::BoundingBox;
use carve_lab::carver::{carve_polynomial, polynomial_degree};
use carve_lab::netspec::{parse_network, NumberMode};
use carve_lab::rational::int;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/attention.json");
    let net = parse_network(&std::fs::read_to_string(path).unwrap(), NumberMode::Exact).unwrap();
    println!("degree bound per neuron: {:?}", polynomial_degree(&net));

    let bbox = BoundingBox::symmetric(2, int(2)).unwrap();
    let cells = carve_polynomial(&net, &bbox, 64).unwrap();
    for c in &cells {
        let y = &c.polynomials["y"];
        println!("{}  {} grid points  y = {}", c.pattern, c.points.len(), y);
    }
}
