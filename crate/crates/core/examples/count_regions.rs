//! Region counts of hyperplane arrangements: the closed formula against
//! exact enumeration, and the layerwise bound for a ReLU stack.

use carve_lab::arrangement::{enumerate_regions, layerwise_upper_bound, region_count_formula, BoundingBox, Hyperplane};
use carve_lab::rational::{frac, int};

fn main() {
    for d in 1..=3 {
        let row: Vec<String> = (1..=6).map(|n| region_count_formula(n, d).to_string()).collect();
        println!("d={d}: r(n, d) for n=1..6 = {}", row.join(" "));
    }

    // three lines in general position cut the plane into seven pieces
    let lines = vec![
        Hyperplane::new(vec![int(1), int(0)], frac(-1, 2)),
        Hyperplane::new(vec![int(0), int(1)], frac(1, 3)),
        Hyperplane::new(vec![int(1), int(1)], int(-2)),
    ];
    let bbox = BoundingBox::symmetric(2, int(10)).unwrap();
    let regions = enumerate_regions(&lines, &bbox).unwrap();
    println!("enumerated {} regions:", regions.len());
    for s in &regions {
        println!("  {s}");
    }

    println!("layerwise bound, widths [3, 2] in the plane: {}", layerwise_upper_bound(&[3, 2], 2));
}
