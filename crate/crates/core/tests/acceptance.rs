//! Acceptance suite. Each test prints one `PASS`/`FAIL` line (written
//! straight to stderr so it survives output capture) and fails if the check
//! or its time limit fails.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use rand::Rng;

use carve_lab::arrangement::{enumerate_regions, layerwise_upper_bound, region_count_formula, BoundingBox, Hyperplane};
use carve_lab::carver::{build_folding_network, carve_exact_2d, carve_polynomial, embed_in_strip, polynomial_degree, strip_box};
use carve_lab::ensembles::{
    coefficient_variance, critical_point_stats, fit_decay_rate, prob_positive_definite, sample_random_polynomial,
    GoeSpec, RandomPolynomialSpec,
};
use carve_lab::netspec::{activation_pattern, forward, sigmoid, Network, NeuronDecl, NeuronKind};
use carve_lab::poly::Polynomial;
use carve_lab::polyland::{
    classify_critical_point, loss_l2, loss_xent, spectrum, CriticalClass, LossKind, NetworkLoss, Objective, ParamNet,
    PolynomialObjective, Sample,
};
use carve_lab::rational::{frac, int, Rational};
use carve_lab::rng;
use carve_lab::satlab::{brute_force, dpll_solve, half_crossing, phase_sweep, random_3sat, Verdict, DEFAULT_BUDGET};
use carve_lab::spinglass::{index_energy_profile, ProfileConfig};

type Outcome = Result<String, String>;

fn criterion(number: u32, name: &str, limit: Duration, check: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= limit => (true, d),
        Ok(d) => (false, format!("{d}; over time limit")),
        Err(d) => (false, d),
    };
    let line = format!(
        "criterion {number:>2} {} {name}: {detail} [{:.2}s / limit {}s]\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "{line}");
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn counting_identities() {
    criterion(1, "counting identities", Duration::from_secs(1), || {
        let r = |n, d| region_count_formula(n, d);
        ensure(r(3, 2) == BigUint::from(7u32), || format!("r(3,2) = {}", r(3, 2)))?;
        ensure(r(2, 2) == BigUint::from(4u32), || format!("r(2,2) = {}", r(2, 2)))?;
        ensure(r(1, 2) == BigUint::from(2u32), || format!("r(1,2) = {}", r(1, 2)))?;
        let b14 = layerwise_upper_bound(&[3, 1], 2);
        let b28 = layerwise_upper_bound(&[3, 2], 2);
        ensure(b14 == BigUint::from(14u32), || format!("bound [3,1] = {b14}"))?;
        ensure(b28 == BigUint::from(28u32), || format!("bound [3,2] = {b28}"))?;
        Ok("r(3,2)=7 r(2,2)=4 r(1,2)=2, layerwise bounds 14 and 28".into())
    });
}

/// Rank of a rational matrix by exact elimination.
#[allow(clippy::needless_range_loop)]
fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            let f = &rows[i][c] / &rows[r][c];
            for j in c..cols {
                let v = &f * &rows[r][j];
                rows[i][j] -= v;
            }
        }
        r += 1;
    }
    r
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Any `k ≤ d` normals independent and any `d + 1` hyperplanes disjoint.
fn general_position(hs: &[Hyperplane], d: usize) -> bool {
    (1..=d.min(hs.len())).all(|k| {
        subsets(hs.len(), k)
            .iter()
            .all(|s| rank(s.iter().map(|&i| hs[i].normal.clone()).collect()) == k)
    }) && subsets(hs.len(), d + 1).iter().all(|s| {
        let aug = s
            .iter()
            .map(|&i| hs[i].normal.iter().cloned().chain([hs[i].offset.clone()]).collect())
            .collect();
        rank(aug) == d + 1
    })
}

/// Solves the square system `m y = b` exactly.
#[allow(clippy::needless_range_loop)]
fn solve(mut m: Vec<Vec<Rational>>, b: Vec<Rational>) -> Vec<Rational> {
    let k = m.len();
    for (row, v) in m.iter_mut().zip(b) {
        row.push(v);
    }
    for c in 0..k {
        let p = (c..k).find(|&i| !m[i][c].is_zero()).expect("nonsingular system");
        m.swap(c, p);
        let piv = m[c][c].clone();
        for v in m[c].iter_mut() {
            *v = &*v / &piv;
        }
        for i in 0..k {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=k {
                    let v = &f * &m[c][j];
                    m[i][j] -= v;
                }
            }
        }
    }
    m.into_iter().map(|row| row[k].clone()).collect()
}

/// Point of least norm on the common intersection of independent hyperplanes.
fn least_norm_point(hs: &[&Hyperplane]) -> Vec<Rational> {
    let dot = |a: &[Rational], b: &[Rational]| a.iter().zip(b).fold(int(0), |s, (x, y)| s + x * y);
    let gram = hs.iter().map(|a| hs.iter().map(|b| dot(&a.normal, &b.normal)).collect()).collect();
    let y = solve(gram, hs.iter().map(|h| -h.offset.clone()).collect());
    let d = hs[0].normal.len();
    (0..d).map(|j| hs.iter().zip(&y).fold(int(0), |s, (h, yi)| s + &h.normal[j] * yi)).collect()
}

#[test]
fn formula_matches_enumeration() {
    criterion(2, "formula vs enumeration", Duration::from_secs(120), || {
        let mut r = rng::stream(2024);
        let mut done = 0;
        let mut redrawn = 0;
        while done < 200 {
            let n = r.random_range(1..=8usize);
            let d = r.random_range(1..=3usize);
            let hs: Vec<Hyperplane> = (0..n)
                .map(|_| {
                    Hyperplane::new(
                        (0..d).map(|_| frac(r.random_range(-60..=60), r.random_range(1..=12))).collect(),
                        frac(r.random_range(-60..=60), r.random_range(1..=12)),
                    )
                })
                .collect();
            if !general_position(&hs, d) {
                redrawn += 1;
                continue;
            }
            // every region touches a vertex (or, with fewer planes than
            // dimensions, the point where all planes meet); keep those inside
            let mut half = int(1);
            for s in subsets(n, n.min(d)) {
                let refs: Vec<&Hyperplane> = s.iter().map(|&i| &hs[i]).collect();
                for c in least_norm_point(&refs) {
                    let m = c.abs() * int(2) + int(1);
                    if m > half {
                        half = m;
                    }
                }
            }
            let bbox = BoundingBox::symmetric(d, half.ceil()).unwrap();
            let count = enumerate_regions(&hs, &bbox).map_err(|e| e.to_string())?.len();
            let want = region_count_formula(n as u64, d as u64);
            ensure(BigUint::from(count) == want, || format!("n={n} d={d}: enumerated {count}, formula {want}"))?;
            done += 1;
        }
        Ok(format!("200 arrangements, 0 mismatches ({redrawn} degenerate draws replaced)"))
    });
}

fn random_relu_net(r: &mut impl Rng) -> (Network, Vec<u64>) {
    let layers = r.random_range(1..=3usize);
    let mut decls = vec![NeuronDecl::input("x0"), NeuronDecl::input("x1")];
    let mut prev = vec!["x0".to_string(), "x1".to_string()];
    let mut widths = Vec::new();
    for l in 0..layers {
        let w = r.random_range(1..=8usize);
        widths.push(w as u64);
        let mut cur = Vec::new();
        for j in 0..w {
            let id = format!("h{l}_{j}");
            let inc: Vec<(String, Rational)> = prev.iter().map(|p| (p.clone(), frac(r.random_range(-20..=20), 8))).collect();
            decls.push(NeuronDecl::new(id.clone(), NeuronKind::Relu, inc, frac(r.random_range(-20..=20), 8)));
            cur.push(id);
        }
        prev = cur;
    }
    let inc: Vec<(String, Rational)> = prev.iter().map(|p| (p.clone(), frac(r.random_range(-20..=20), 8))).collect();
    decls.push(NeuronDecl::new("y", NeuronKind::Linear, inc, int(0)));
    (Network::from_decls(2, decls).unwrap(), widths)
}

/// Patterns seen at the cell centres of a `g × g` grid over the rectangle.
/// A point counts only when its pattern (zero read as inactive) survives a
/// small nudge along each axis, so points on a bend are dropped while
/// neurons that vanish identically on a region are kept.
fn sample_patterns(net: &Network, lo: [f64; 2], hi: [f64; 2], g: usize, into: &mut BTreeSet<String>) {
    const NUDGE: f64 = 1e-6;
    let read = |x: [f64; 2]| activation_pattern(net, &x).unwrap().pattern.to_string();
    for i in 0..g {
        for j in 0..g {
            let x = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / g as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / g as f64,
            ];
            let p = read(x);
            let stable = [[NUDGE, 0.0], [-NUDGE, 0.0], [0.0, NUDGE], [0.0, -NUDGE]]
                .iter()
                .all(|d| read([x[0] + d[0], x[1] + d[1]]) == p);
            if stable {
                into.insert(p);
            }
        }
    }
}

#[test]
fn carving_correctness() {
    criterion(3, "carving correctness", Duration::from_secs(300), || {
        let mut r = rng::stream(33);
        let bbox = BoundingBox::symmetric(2, int(4)).unwrap();
        let box_area = int(64);
        let mut total_regions = 0;
        let mut refined = 0;
        for k in 0..50 {
            let (net, widths) = random_relu_net(&mut r);
            let regions = carve_exact_2d(&net, &bbox).map_err(|e| format!("net {k}: {e}"))?;
            total_regions += regions.len();
            let bound = layerwise_upper_bound(&widths, 2);
            ensure(BigUint::from(regions.len()) <= bound, || format!("net {k}: {} regions > bound {bound}", regions.len()))?;
            let area: Rational = regions.iter().map(|x| x.area()).sum();
            ensure(area == box_area, || format!("net {k}: areas sum to {area}"))?;
            for x in &regions {
                ensure(x.area().is_positive(), || format!("net {k}: empty region {}", x.pattern))?;
            }
            // grid oracle, refined on the bounding rectangle of any region the
            // coarse grid missed
            let carved: BTreeSet<String> = regions.iter().map(|x| x.pattern.to_string()).collect();
            let mut seen = BTreeSet::new();
            sample_patterns(&net, [-4.0, -4.0], [4.0, 4.0], 400, &mut seen);
            for x in &regions {
                if seen.contains(&x.pattern.to_string()) {
                    continue;
                }
                refined += 1;
                let v = x.polygon.vertices_f64();
                let lo = [v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), v.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)];
                let hi = [v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), v.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max)];
                sample_patterns(&net, lo, hi, 200, &mut seen);
            }
            ensure(seen == carved, || {
                format!(
                    "net {k}: oracle-only {:?}, carve-only {:?}",
                    seen.difference(&carved).collect::<Vec<_>>(),
                    carved.difference(&seen).collect::<Vec<_>>()
                )
            })?;
            // continuity: every closed region containing an edge midpoint or
            // a vertex agrees with the owner there
            for x in &regions {
                let n = x.polygon.len();
                for e in 0..n {
                    let a = &x.polygon.vertices[e];
                    let b = &x.polygon.vertices[(e + 1) % n];
                    let m = [(&a[0] + &b[0]) / int(2), (&a[1] + &b[1]) / int(2)];
                    for p in [a.clone(), m] {
                        let v = x.functions["y"].eval(&p);
                        for other in &regions {
                            if other.polygon.contains_closed(&p) {
                                ensure(other.functions["y"].eval(&p) == v, || {
                                    format!("net {k}: {} and {} disagree at a shared point", x.pattern, other.pattern)
                                })?;
                            }
                        }
                    }
                }
            }
        }
        Ok(format!(
            "50 nets, {total_regions} regions: pattern sets equal, exact tiling, exact continuity, within bound ({refined} regions needed local refinement)"
        ))
    });
}

#[test]
fn folding_lower_bound() {
    criterion(4, "folding witness", Duration::from_secs(120), || {
        let net = build_folding_network(4, 1, 4).map_err(|e| e.to_string())?;
        let strip = embed_in_strip(&net).map_err(|e| e.to_string())?;
        let regions = carve_exact_2d(&strip, &strip_box(int(0), int(1)).unwrap()).map_err(|e| e.to_string())?;
        let target = 4u64.pow(3) * 5;
        ensure(regions.len() as u64 >= target, || format!("{} regions < {target}", regions.len()))?;
        Ok(format!("{} regions >= (n/d)^(d(L-1)) r(n,d) = {target}", regions.len()))
    });
}

fn attention_nets() -> (Network, Network) {
    let single = Network::from_decls(
        2,
        vec![
            NeuronDecl::input("x0"),
            NeuronDecl::input("x1"),
            NeuronDecl::new("a", NeuronKind::Relu, [("x0", frac(1, 1)), ("x1", frac(1, 2))], frac(-1, 4)),
            NeuronDecl::new("f", NeuronKind::Relu, [("x0", frac(-1, 3)), ("x1", frac(1, 1))], frac(1, 5)),
            NeuronDecl::mul("y", "a", "f"),
        ],
    )
    .unwrap();
    let chained = Network::from_decls(
        2,
        vec![
            NeuronDecl::input("x0"),
            NeuronDecl::input("x1"),
            NeuronDecl::new("a1", NeuronKind::Relu, [("x0", frac(1, 1)), ("x1", frac(1, 2))], frac(-1, 4)),
            NeuronDecl::new("f1", NeuronKind::Relu, [("x0", frac(-1, 3)), ("x1", frac(1, 1))], frac(1, 5)),
            NeuronDecl::mul("y1", "a1", "f1"),
            NeuronDecl::new("a2", NeuronKind::Relu, [("y1", frac(2, 1))], frac(-1, 10)),
            NeuronDecl::new("f2", NeuronKind::Linear, [("y1", frac(-1, 2))], frac(3, 2)),
            NeuronDecl::mul("y2", "a2", "f2"),
        ],
    )
    .unwrap();
    (single, chained)
}

#[test]
fn attention_degrees() {
    criterion(5, "attention carving", Duration::from_secs(60), || {
        let (single, chained) = attention_nets();
        let d1 = polynomial_degree(&single)["y"];
        let d2 = polynomial_degree(&chained)["y2"];
        ensure(d1 == 2 && d2 == 4, || format!("degrees {d1} and {d2}"))?;
        let bbox = BoundingBox::symmetric(2, int(2)).unwrap();
        let mut r = rng::stream(55);
        let mut worst = 0.0f64;
        for (net, out) in [(&single, "y"), (&chained, "y2")] {
            let cells = carve_polynomial(net, &bbox, 64).map_err(|e| e.to_string())?;
            let by_pattern: BTreeMap<String, &Polynomial<Rational>> =
                cells.iter().map(|c| (c.pattern.to_string(), &c.polynomials[out])).collect();
            let top = cells.iter().map(|c| c.polynomials[out].degree()).max().unwrap_or(0);
            ensure(top as u32 == polynomial_degree(net)[out], || format!("{out}: highest cell degree {top}"))?;
            let mut checked = 0;
            while checked < 1000 {
                let x = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
                let reading = activation_pattern(net, &x).unwrap();
                if reading.boundary {
                    continue;
                }
                let poly = by_pattern
                    .get(&reading.pattern.to_string())
                    .ok_or_else(|| format!("{out}: no cell for pattern {}", reading.pattern))?;
                let want = forward(net, &x).unwrap().value_of(net, out).unwrap();
                let got = poly.eval_f64(&x);
                let err = (got - want).abs() / want.abs().max(1.0);
                worst = worst.max(err);
                ensure(err <= 1e-9, || format!("{out} at {x:?}: {got} vs {want}"))?;
                checked += 1;
            }
        }
        Ok(format!("degrees 2 and 4; 2x1000 samples, worst relative error {worst:.1e}"))
    });
}

fn random_param_net(r: &mut impl Rng, out: NeuronKind) -> Network {
    let dim = r.random_range(1..=3usize);
    let layers = r.random_range(1..=2usize);
    let mut decls: Vec<NeuronDecl> = (0..dim).map(|i| NeuronDecl::input(format!("x{i}"))).collect();
    let mut prev: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    for l in 0..layers {
        let w = r.random_range(2..=5usize);
        let mut cur = Vec::new();
        for j in 0..w {
            let id = format!("h{l}_{j}");
            let inc: Vec<(String, Rational)> = prev.iter().map(|p| (p.clone(), frac(r.random_range(-20..=20), 10))).collect();
            decls.push(NeuronDecl::new(id.clone(), NeuronKind::Relu, inc, frac(r.random_range(-10..=10), 10)));
            cur.push(id);
        }
        prev = cur;
    }
    let inc: Vec<(String, Rational)> = prev.iter().map(|p| (p.clone(), frac(r.random_range(-20..=20), 10))).collect();
    decls.push(NeuronDecl::new("y", out, inc, frac(1, 10)));
    Network::from_decls(dim, decls).unwrap()
}

fn central_difference(loss: &NetworkLoss, theta: &[f64], h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let mut p = theta.to_vec();
            let mut m = theta.to_vec();
            p[i] += h;
            m[i] -= h;
            (loss.value(&p) - loss.value(&m)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn gradient_identities() {
    criterion(6, "gradient identities", Duration::from_secs(60), || {
        let mut r = rng::stream(66);
        let mut worst = 0.0f64;
        let mut nets = 0;
        let mut skipped = 0;
        while nets < 50 {
            let xent = nets % 2 == 1;
            let net = random_param_net(&mut r, if xent { NeuronKind::Sigmoid } else { NeuronKind::Linear });
            let dim = net.input_dim();
            let pn = ParamNet::new(net).map_err(|e| e.to_string())?;
            let theta = pn.initial_theta();
            let batch: Vec<Sample> = (0..8)
                .map(|_| Sample {
                    x: (0..dim).map(|_| r.random_range(-2.0..2.0)).collect(),
                    target: if xent { r.random_range(0..2) as f64 } else { r.random_range(-1.0..1.0) },
                })
                .collect();
            let kind = if xent { LossKind::CrossEntropy } else { LossKind::SquaredError };
            let loss = NetworkLoss::new(pn.clone(), batch.clone(), kind).map_err(|e| e.to_string())?;
            if loss.near_boundary(&theta) {
                skipped += 1;
                continue;
            }
            let (_, g) = if xent { loss_xent(&pn, &batch, &theta) } else { loss_l2(&pn, &batch, &theta) }
                .map_err(|e| e.to_string())?;
            let fd = central_difference(&loss, &theta, 1e-5);
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = g.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale.max(f64::MIN_POSITIVE);
            worst = worst.max(err);
            ensure(err <= 1e-6, || format!("net {nets}: relative gradient error {err:.2e}"))?;
            // targets equal to the prediction make every gradient exactly zero
            let matched: Vec<Sample> = batch
                .iter()
                .map(|s| {
                    let f = pn.output(&theta, &s.x).unwrap();
                    Sample { x: s.x.clone(), target: if xent { sigmoid(f) } else { f } }
                })
                .collect();
            let (_, g0) = if xent { loss_xent(&pn, &matched, &theta) } else { loss_l2(&pn, &matched, &theta) }
                .map_err(|e| e.to_string())?;
            ensure(g0.iter().all(|&v| v == 0.0), || format!("net {nets}: gradient not exactly zero at f=G / p=G"))?;
            nets += 1;
        }
        Ok(format!("50 nets (25 L2, 25 cross-entropy), worst relative error {worst:.1e}, exact zeros at f=G and p=G ({skipped} near-kink draws replaced)"))
    });
}

#[test]
fn hessian_example() {
    criterion(7, "Hessian example", Duration::from_secs(1), || {
        let p = Polynomial::from_terms(2, [(vec![3, 0], 2.0), (vec![0, 3], 1.0), (vec![1, 1], -1.0)]);
        let h = p.hessian();
        let want = [
            [Polynomial::from_terms(2, [(vec![1, 0], 12.0)]), Polynomial::from_terms(2, [(vec![0, 0], -1.0)])],
            [Polynomial::from_terms(2, [(vec![0, 0], -1.0)]), Polynomial::from_terms(2, [(vec![0, 1], 6.0)])],
        ];
        for i in 0..2 {
            for j in 0..2 {
                ensure(h[i][j] == want[i][j], || format!("H[{i}][{j}] = {}", h[i][j]))?;
            }
        }
        let obj = PolynomialObjective::new(p);
        let spec = spectrum(&obj.symbolic_hessian(&[0.0, 0.0]).unwrap(), None);
        ensure(spec.eigenvalues == vec![1.0, -1.0], || format!("eigenvalues {:?}", spec.eigenvalues))?;
        let class = classify_critical_point(&spec);
        ensure(class == CriticalClass::Saddle, || format!("classified {}", class.as_str()))?;
        Ok("H = [[12x,-1],[-1,6y]], eigenvalues at origin exactly {+1,-1}, saddle".into())
    });
}

#[test]
fn goe_decay() {
    criterion(8, "GOE decay", Duration::from_secs(600), || {
        let seed = 8;
        let p1 = prob_positive_definite(&GoeSpec::new(1), 100_000, seed).map_err(|e| e.to_string())?;
        ensure((0.49..=0.51).contains(&p1.p), || format!("n=1: p = {}", p1.p))?;
        let trials = [(2, 1_000_000u64), (3, 2_000_000), (4, 4_000_000), (5, 8_000_000), (6, 20_000_000)];
        let mut pairs = Vec::new();
        for (n, t) in trials {
            let est = prob_positive_definite(&GoeSpec::new(n), t, seed).map_err(|e| e.to_string())?;
            ensure(est.successes > 0, || format!("n={n}: no positive definite draws in {t}"))?;
            pairs.push((n, est.p));
        }
        for w in pairs.windows(2) {
            ensure(w[1].1 < w[0].1, || format!("not decreasing: {pairs:?}"))?;
        }
        let fit = fit_decay_rate(&pairs).map_err(|e| e.to_string())?;
        ensure((0.20..=0.35).contains(&fit.k), || format!("k = {:.4} from {pairs:?}", fit.k))?;
        let ps = pairs.iter().map(|(n, p)| format!("p{n}={p:.3e}")).collect::<Vec<_>>().join(" ");
        Ok(format!("p1={:.4}, {ps}, k={:.4} (target ln3/4 = 0.2747)", p1.p, fit.k))
    });
}

#[test]
fn random_polynomials() {
    criterion(9, "random polynomials", Duration::from_secs(600), || {
        let spec = RandomPolynomialSpec { nvars: 2, degree: 2 };
        let mut r = rng::stream(99);
        let (mut sxx, mut sxy) = (Vec::new(), Vec::new());
        for _ in 0..100_000 {
            let p = sample_random_polynomial(&spec, &mut r);
            sxx.push(p.coefficient(&[2, 0]));
            sxy.push(p.coefficient(&[1, 1]));
        }
        let ratio = carve_lab::stats::variance(&sxx) / carve_lab::stats::variance(&sxy);
        let want = coefficient_variance(2, &[2, 0]) / coefficient_variance(2, &[1, 1]);
        ensure(want == 0.5, || format!("multinomial ratio {want}"))?;
        ensure((ratio / want - 1.0).abs() <= 0.03, || format!("variance ratio {ratio:.4}"))?;
        let mut counts = Vec::new();
        for n in [2usize, 3] {
            let st = critical_point_stats(&RandomPolynomialSpec { nvars: n, degree: 3 }, 500, rng::derive(99, n as u64), 200);
            ensure(st.frac_saddle > st.frac_local_min, || {
                format!("n={n}: saddle {} <= local-min {}", st.frac_saddle, st.frac_local_min)
            })?;
            counts.push((n, st.mean_count, st.frac_saddle, st.frac_local_min));
        }
        ensure(counts[1].1 > counts[0].1, || format!("mean counts {counts:?}"))?;
        let desc = counts
            .iter()
            .map(|(n, c, s, m)| format!("n={n}: mean {c:.2}, saddle {s:.3}, min {m:.3}"))
            .collect::<Vec<_>>()
            .join("; ");
        Ok(format!("var(x^2)/var(xy) = {ratio:.4} (want 0.5); {desc}"))
    });
}

#[test]
fn spin_glass_layering() {
    criterion(10, "spin-glass layering", Duration::from_secs(600), || {
        let profile = index_energy_profile(20, 3, 200, 10, &ProfileConfig::default()).map_err(|e| e.to_string())?;
        let converged = profile.converged().len();
        let med = profile.lowest_decile_median_index();
        let rho = profile.spearman();
        ensure(med == 0.0, || format!("lowest-decile median index {med}"))?;
        ensure(rho > 0.0, || format!("spearman {rho}"))?;
        Ok(format!("{converged}/200 converged, lowest-decile median index {med}, spearman {rho:.3}"))
    });
}

#[test]
fn sat_phase_transition() {
    criterion(11, "3-SAT phase transition", Duration::from_secs(900), || {
        let mut alphas = vec![0.5];
        alphas.extend((0..=12).map(|k| 3.0 + 0.25 * k as f64));
        alphas.push(8.0);
        let points = phase_sweep(50, &alphas, 200, 11, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let first = &points[0];
        let last = points.last().unwrap();
        let timeouts: usize = points.iter().map(|p| p.timeouts).sum();
        ensure(first.fraction >= 0.99, || format!("alpha=0.5: {}", first.fraction))?;
        ensure(last.fraction <= 0.05, || format!("alpha=8: {}", last.fraction))?;
        let cross = half_crossing(&points).ok_or("no 0.5 crossing")?;
        ensure((3.0..=6.0).contains(&cross), || format!("crossing {cross}"))?;
        let mut r = rng::stream(111);
        let mut spot = 0;
        for n in 5..=20usize {
            for alpha in [2.0, 3.5, 4.26, 5.0, 6.0] {
                for _ in 0..4 {
                    let f = random_3sat(n, (alpha * n as f64).round() as usize, &mut r).map_err(|e| e.to_string())?;
                    let brute = brute_force(&f).map_err(|e| e.to_string())?;
                    let dpll = dpll_solve(&f, DEFAULT_BUDGET);
                    match (&dpll.verdict, &brute) {
                        (Verdict::Sat(a), Some(_)) => ensure(f.satisfied_by(a), || "invalid assignment".into())?,
                        (Verdict::Unsat, None) => {}
                        (v, b) => return Err(format!("n={n}: dpll {v:?} vs brute force {}", b.is_some())),
                    }
                    spot += 1;
                }
            }
        }
        Ok(format!(
            "sat fraction {:.3} at 0.5, {:.3} at 8, crossing {cross:.3}, {timeouts} timeouts; {spot} brute-force spot checks agree",
            first.fraction, last.fraction
        ))
    });
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

/// Runs every emitting subcommand into `dir`, returning the files written.
fn emit_all(dir: &Path) -> Vec<PathBuf> {
    let o = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let runs: Vec<Vec<String>> = vec![
        vec!["count", "--n", "1..6", "--d", "1..3", "--csv", &o("count.csv")],
        vec!["bound", "--widths", "3,2", "--d", "2", "--csv", &o("bound.csv")],
        vec!["carve", "--net", &data("fig4_skip.json"), "--box=-5,5,-5,5", "--csv", &o("carve.csv"), "--svg", &o("carve.svg")],
        vec!["carve", "--net", &data("cat_dog.json"), "--box=-5,5,-5,5", "--decision", "0.7,0.3", "--svg", &o("decision.svg")],
        vec!["fold", "--n", "4", "--d", "1", "--layers", "3", "--csv", &o("fold.csv"), "--svg", &o("fold.svg"), "--net-out", &o("fold.json")],
        vec!["attention", "--net", &data("attention.json"), "--box=-2,2,-2,2", "--grid", "32", "--level", "y=0.5", "--csv", &o("att.csv"), "--svg", &o("att.svg")],
        vec!["landscape", "interp", "--net", &data("cat_dog.json"), "--data", &data("cat_dog.csv"), "--loss", "xent", "--seed", "5", "--iters", "100", "--csv", &o("interp.csv")],
        vec!["landscape", "plane", "--net", &data("cat_dog.json"), "--data", &data("cat_dog.csv"), "--loss", "xent", "--seed", "5", "--grid", "21", "--csv", &o("plane.csv"), "--svg", &o("plane.svg")],
        vec!["landscape", "subspace", "--net", &data("cat_dog.json"), "--data", &data("cat_dog.csv"), "--seed", "5", "--iters", "100", "--csv", &o("subspace.csv")],
        vec!["landscape", "critical", "--net", &data("cat_dog.json"), "--data", &data("cat_dog.csv"), "--seed", "5", "--starts", "4", "--iters", "200", "--csv", &o("critical.csv")],
        vec!["goe", "--n", "1..4", "--trials", "20000", "--seed", "5", "--csv", &o("goe.csv")],
        vec!["polycrit", "--n", "2", "--d", "3", "--trials", "20", "--seed", "5", "--csv", &o("polycrit.csv")],
        vec!["spin", "--N", "12", "--p", "3", "--trials", "20", "--seed", "5", "--csv", &o("spin.csv")],
        vec!["sat", "--N", "20", "--alpha", "2:6:1", "--trials", "20", "--seed", "5", "--csv", &o("sat.csv"), "--emit", &o("sat.cnf")],
        vec!["render", "--net", &data("fig1_skip.json"), "--box=-5,5,-5,5", "--out", &o("render.svg")],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in &runs {
        let out = Command::new(env!("CARGO_BIN_EXE_carve-lab")).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_carve-lab"))
        .args(["render", "--heatmap", &o("plane.csv"), "--out", &o("heatmap.svg")])
        .output()
        .unwrap();
    assert!(out.status.success());
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

#[test]
fn reproducible_outputs() {
    criterion(12, "reproducibility", Duration::from_secs(300), || {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = emit_all(a.path());
        let fb = emit_all(b.path());
        ensure(fa.len() == fb.len() && fa.len() >= 20, || format!("{} vs {} files", fa.len(), fb.len()))?;
        let mut csv = 0;
        let mut svg = 0;
        for (x, y) in fa.iter().zip(&fb) {
            ensure(x.file_name() == y.file_name(), || format!("{x:?} vs {y:?}"))?;
            let (bx, by) = (std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
            ensure(bx == by, || format!("{:?} differs between runs", x.file_name().unwrap()))?;
            match x.extension().and_then(|e| e.to_str()) {
                Some("csv") => csv += 1,
                Some("svg") => svg += 1,
                _ => {}
            }
        }
        let plane = std::fs::read(a.path().join("plane.svg")).unwrap();
        let heat = std::fs::read(a.path().join("heatmap.svg")).unwrap();
        ensure(plane == heat, || "heatmap re-rendered from CSV differs".into())?;
        Ok(format!("{csv} CSV and {svg} SVG files byte-identical across two runs"))
    });
}
