//! Exact carving of a small skip-connection network in the plane, written
//! out as an SVG with the bend-lines of each layer.

use carve_lab::arrangement::{layerwise_upper_bound, BoundingBox};
use carve_lab::carver::carve_exact_2d;
use carve_lab::netspec::{parse_network, NumberMode};
use carve_lab::rational::{int, to_f64};
use carve_lab::svg::{render_regions, SvgStyle};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fig4_skip.json");
    let net = parse_network(&std::fs::read_to_string(path).unwrap(), NumberMode::Exact).unwrap();
    let bbox = BoundingBox::symmetric(2, int(5)).unwrap();
    let regions = carve_exact_2d(&net, &bbox).unwrap();

    let widths: Vec<u64> = net.relu_layer_widths().iter().map(|&w| w as u64).collect();
    println!("{} regions (layerwise bound {})", regions.len(), layerwise_upper_bound(&widths, 2));
    for r in &regions {
        println!("  {}  area {:.4}", r.pattern, to_f64(&r.area()));
    }

    let svg = render_regions(&net, &regions, &bbox, None, &SvgStyle::default()).unwrap();
    let out = std::env::temp_dir().join("carve_network.svg");
    std::fs::write(&out, svg).unwrap();
    println!("wrote {}", out.display());
}
