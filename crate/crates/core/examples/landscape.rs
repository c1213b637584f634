//! Loss landscape of the cat/dog classifier: train, then look at the straight
//! line from the start, a random plane, and the Hessian at the end point.

use carve_lab::netspec::{parse_network, NumberMode};
use carve_lab::polyland::{
    classify_critical_point, gradient_descent, hessian, interpolation_curve, parse_batch, spectrum, HessianMode, LossKind,
    NetworkLoss, ParamNet,
};
use carve_lab::rng;

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let net = parse_network(&std::fs::read_to_string(format!("{dir}/cat_dog.json")).unwrap(), NumberMode::Float).unwrap();
    let batch = parse_batch(&std::fs::read_to_string(format!("{dir}/cat_dog.csv")).unwrap(), net.input_dim()).unwrap();
    let pn = ParamNet::new(net).unwrap();
    let loss = NetworkLoss::new(pn.clone(), batch, LossKind::CrossEntropy).unwrap();

    let theta0 = pn.initial_theta();
    let run = gradient_descent(&loss, &theta0, 2000, 0.1).unwrap();
    println!("loss {:.4} -> {:.4} after 2000 steps", run.losses[0], run.final_loss);

    let curve = interpolation_curve(&loss, &theta0, &run.theta, 11).unwrap();
    for (a, l) in &curve {
        println!("  alpha {a:.1}  loss {l:.4}");
    }

    let mut r = rng::stream(1);
    let plane = carve_lab::polyland::plane_section(&loss, &run.theta, 11, 1.0, &mut r).unwrap();
    println!("plane section centre {:.4}, corner {:.4}", plane.at(5, 5), plane.at(0, 0));

    let h = hessian(&loss, &run.theta, HessianMode::Symbolic).unwrap();
    let s = spectrum(&h.matrix, None);
    println!("end point: {} (near kink: {})", classify_critical_point(&s).as_str(), h.near_boundary);
}
