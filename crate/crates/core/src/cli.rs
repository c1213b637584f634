//! The `carve-lab` command line. Every run resolves its flags (optionally
//! seeded from a `key=value` config file), writes a manifest of the resolved
//! configuration, and stamps CSV output with the tool version and a hash of
//! that configuration.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::arrangement::{counts_csv, layerwise_upper_bound, region_count_formula, BoundingBox};
use crate::carver::{
    self, carve_exact_2d, carve_polynomial, carve_signvectors, decision_partition, embed_in_strip, layer_counts,
    polynomial_degree, strip_box, trace_level_set, CarveMode, CarvedRegion, DecisionLabel, DecisionPartition,
    PolynomialCell, Polyline,
};
use crate::ensembles::{critical_point_stats, fit_decay_rate, prob_positive_definite, GoeSpec, RandomPolynomialSpec};
use crate::netspec::{parse_network, to_json, Network, NumberMode};
use crate::polyland::{
    gradient_descent, hessian, interpolation_curve, max_interior_bump, parse_batch, plane_section, spectrum,
    subspace_descent, HessianMode, LossKind, NetworkLoss, Objective, ParamNet, PlaneSection,
};
use crate::rational::{self, Rational};
use crate::satlab::{dpll_solve, half_crossing, parse_dimacs, phase_sweep, random_3sat, sweep_csv, Verdict};
use crate::spinglass::{index_energy_profile, ProfileConfig};
use crate::svg::{render_cells, render_heatmap, render_regions, SvgStyle};
use crate::{rng, stats};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Keys naming output files; they are echoed in the manifest but left out
/// of the configuration hash, so the same run written elsewhere is stamped
/// identically.
const OUTPUT_KEYS: [&str; 5] = ["csv", "svg", "out", "net-out", "emit"];
/// Keys that steer the run itself and are never echoed.
const META_KEYS: [&str; 2] = ["config", "manifest"];

#[derive(Parser, Debug)]
#[command(
    name = "carve-lab",
    version,
    about = "Exact region carving for small networks and desk-scale landscape experiments",
    after_help = "Any flag may also come from `--config FILE`, one `key=value` per line (a manifest works too)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed for every random choice of the run
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read flags from a key=value file; explicit flags win
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the resolved configuration here (default: stderr)
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regions cut by n hyperplanes in general position in d dimensions
    Count(CountArgs),
    /// Layerwise upper bound on the regions of a ReLU network
    Bound(BoundArgs),
    /// Enumerate the linear regions of a ReLU network
    Carve(CarveArgs),
    /// Build and carve the folding network
    Fold(FoldArgs),
    /// Curved cells and degrees of a network with multiplication neurons
    Attention(AttentionArgs),
    /// Loss-landscape probes on a network and a data set
    Landscape {
        #[command(subcommand)]
        probe: Landscape,
    },
    /// Probability that a GOE matrix is positive definite
    Goe(GoeArgs),
    /// Critical points of random polynomials
    Polycrit(PolycritArgs),
    /// Index/energy profile of a p-spin spherical spin glass
    Spin(SpinArgs),
    /// Random 3-SAT phase transition, or solve a DIMACS file
    Sat(SatArgs),
    /// Draw regions, cells or a loss grid as SVG
    Render(RenderArgs),
}

#[derive(Subcommand, Debug)]
enum Landscape {
    /// Loss along the segment from a random start to its descent endpoint
    Interp(InterpArgs),
    /// Loss on a random plane through the network's weights
    Plane(PlaneArgs),
    /// Descent restricted to a random subspace versus full descent
    Subspace(SubspaceArgs),
    /// Classify descent endpoints by their Hessian spectrum
    Critical(CriticalArgs),
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Hyperplane count: `3`, `1..5` or `1,2,4`
    #[arg(long)]
    n: String,
    /// Dimension, same syntax as --n
    #[arg(long)]
    d: String,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// ReLU layer widths, comma separated
    #[arg(long)]
    widths: String,
    #[arg(long)]
    d: u64,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CarveArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    /// `x0,x1,y0,y1,...`; defaults to [-1,1] per input
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: Option<String>,
    /// Parse the network strictly as rationals and decide every LP exactly
    #[arg(long)]
    exact: bool,
    /// Shade decisions of a sigmoid output at thresholds `T1,T2`
    #[arg(long)]
    decision: Option<String>,
    /// Output neuron used by --decision (default: the only output)
    #[arg(long)]
    output: Option<String>,
    /// Region report `pattern,area,vertices,coeffs`
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct FoldArgs {
    /// Neurons per layer
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Number of ReLU layers
    #[arg(long, alias = "L")]
    layers: usize,
    /// Save the constructed network as JSON
    #[arg(long, value_name = "FILE")]
    net_out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AttentionArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: Option<String>,
    /// Lattice resolution used to find the cells
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Level set `neuron=c` traced in every cell
    #[arg(long, allow_hyphen_values = true)]
    level: Option<String>,
    /// Cell report `pattern,points,output,degree,polynomial`
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LossChoice {
    L2,
    Xent,
}

#[derive(Args, Debug)]
struct LossArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    /// CSV rows `x1,...,xd,target`
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = LossChoice::L2)]
    loss: LossChoice,
}

#[derive(Args, Debug)]
struct InterpArgs {
    #[command(flatten)]
    loss: LossArgs,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Points on the segment, endpoints included
    #[arg(long, default_value_t = 51)]
    steps: usize,
    /// Standard deviation of the random start
    #[arg(long, default_value_t = 1.0)]
    init_scale: f64,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PlaneArgs {
    #[command(flatten)]
    loss: LossArgs,
    /// Odd number of samples per axis
    #[arg(long, default_value_t = 41)]
    grid: usize,
    #[arg(long, default_value_t = 1.0)]
    extent: f64,
    /// Descent steps applied to the weights before sectioning
    #[arg(long, default_value_t = 0)]
    iters: usize,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SubspaceArgs {
    #[command(flatten)]
    loss: LossArgs,
    #[arg(long, default_value_t = 2)]
    dsub: usize,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    init_scale: f64,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CriticalArgs {
    #[command(flatten)]
    loss: LossArgs,
    #[arg(long, default_value_t = 20)]
    starts: usize,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    init_scale: f64,
    /// Endpoints with a larger gradient norm are reported as noncritical
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct GoeArgs {
    /// Matrix sizes: `2..6`, `1,3` or `4`
    #[arg(long, default_value = "1..6")]
    n: String,
    /// Trials per size (`1e6` accepted)
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    trials: u64,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PolycritArgs {
    /// Variable counts, same syntax as `goe --n`
    #[arg(long, default_value = "2")]
    n: String,
    #[arg(long, default_value_t = 3)]
    d: u32,
    #[arg(long, default_value = "500", value_parser = parse_count)]
    trials: u64,
    /// Newton starts per polynomial
    #[arg(long, default_value_t = 200)]
    starts: usize,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SpinArgs {
    /// Number of spins
    #[arg(long = "N", default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    p: usize,
    #[arg(long, default_value = "200", value_parser = parse_count)]
    trials: u64,
    /// Descent runs a uniform number of steps below this before polishing
    #[arg(long, default_value_t = 60)]
    max_descent: usize,
    #[arg(long, default_value_t = 0.05)]
    rate: f64,
    #[arg(long, default_value_t = 100)]
    polish: usize,
    /// Columns `energy_per_spin,index,index_fraction,gradnorm,converged`
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SatArgs {
    /// Number of variables
    #[arg(long = "N", default_value_t = 50)]
    n: usize,
    /// Clause ratios: `start:stop:step` (inclusive) or a comma list
    #[arg(long, default_value = "1:8:0.25")]
    alpha: String,
    #[arg(long, default_value = "200", value_parser = parse_count)]
    trials: u64,
    /// DPLL branching budget per formula
    #[arg(long, default_value = "1e7", value_parser = parse_count)]
    budget: u64,
    /// Solve this DIMACS file instead of sweeping
    #[arg(long, value_name = "FILE")]
    dimacs: Option<PathBuf>,
    /// Write one random formula at the first ratio as DIMACS
    #[arg(long, value_name = "FILE")]
    emit: Option<PathBuf>,
    /// Columns `alpha,m,sat,unsat,timeouts,fraction,median_nodes`
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Network to carve and draw
    #[arg(long, value_name = "FILE", conflicts_with = "heatmap")]
    net: Option<PathBuf>,
    /// Plane-section CSV (`i,j,alpha,beta,loss`) to draw as a heatmap
    #[arg(long, value_name = "FILE")]
    heatmap: Option<PathBuf>,
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: Option<String>,
    #[arg(long)]
    decision: Option<String>,
    #[arg(long)]
    output: Option<String>,
    /// Lattice resolution for networks with multiplication neurons
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, allow_hyphen_values = true)]
    level: Option<String>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

type Fallible<T> = std::result::Result<T, CliError>;

fn dom<E: Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Where a run writes: the two console streams plus the config stamp.
struct Ctx<'a> {
    out: &'a mut dyn Write,
    stamp: String,
}

impl Ctx<'_> {
    fn say(&mut self, line: impl Display) -> Fallible<()> {
        writeln!(self.out, "{line}").map_err(dom)
    }

    fn csv(&mut self, path: Option<&Path>, body: &str) -> Fallible<()> {
        let text = format!("{}{body}", self.stamp);
        match path {
            Some(p) => write_file(p, &text),
            None => self.out.write_all(text.as_bytes()).map_err(dom),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Fallible<()> {
    fs::write(path, text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Fallible<String> {
    fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

/// `1e6`, `200` and `2.5e3` are counts; fractions and negatives are not.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= 9.007_199_254_740_992e15) {
        return Err(format!("`{s}` is not a whole non-negative count"));
    }
    Ok(v as u64)
}

/// `4`, `1..5` (inclusive) or `1,2,4`.
fn parse_list(s: &str) -> Fallible<Vec<u64>> {
    let bad = || usage(format!("`{s}` is not a number, range `a..b` or list `a,b,c`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

/// `start:stop:step` (inclusive of `stop` up to rounding) or `a,b,c`.
fn parse_alphas(s: &str) -> Fallible<Vec<f64>> {
    let bad = || usage(format!("`{s}` is not `start:stop:step` or a comma list"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|t| t.trim().parse().map_err(|_| bad())).collect::<Fallible<_>>()?;
        let (a, b, h) = (v[0], v[1], v[2]);
        if !(h > 0.0 && b >= a) {
            return Err(bad());
        }
        let k = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=k).map(|i| a + i as f64 * h).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn parse_box(s: Option<&str>, dim: usize) -> Fallible<BoundingBox> {
    let Some(s) = s else {
        return Ok(BoundingBox::default_for(dim));
    };
    let v: Vec<Rational> = s
        .split(',')
        .map(|t| rational::parse_rational(t.trim()).ok_or_else(|| usage(format!("bad box coordinate `{t}`"))))
        .collect::<Fallible<_>>()?;
    if v.len() != 2 * dim {
        return Err(usage(format!("box needs {} numbers for {dim} inputs, got {}", 2 * dim, v.len())));
    }
    let lo = v.iter().step_by(2).cloned().collect();
    let hi = v.iter().skip(1).step_by(2).cloned().collect();
    BoundingBox::new(lo, hi).map_err(|e| usage(e.to_string()))
}

fn parse_thresholds(s: &str) -> Fallible<(f64, f64)> {
    let bad = || usage(format!("`{s}` is not `T1,T2`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_level(s: &str) -> Fallible<(String, f64)> {
    let (id, c) = s.split_once('=').ok_or_else(|| usage(format!("`{s}` is not `neuron=value`")))?;
    let c: f64 = c.trim().parse().map_err(|_| usage(format!("bad level value in `{s}`")))?;
    Ok((id.trim().to_string(), c))
}

fn load_network(path: &Path, mode: NumberMode) -> Fallible<Network> {
    parse_network(&read_file(path)?, mode).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn single_output(net: &Network, chosen: Option<&str>) -> Fallible<String> {
    if let Some(id) = chosen {
        return Ok(id.to_string());
    }
    match net.outputs() {
        [o] => Ok(net.neuron(*o).id.clone()),
        _ => Err(usage("network has several outputs; pick one with --output")),
    }
}

fn joined<T: Display>(xs: impl IntoIterator<Item = T>, sep: &str) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn carving_bound(net: &Network) -> BigUint {
    let widths: Vec<u64> = net.relu_layer_widths().iter().map(|&w| w as u64).collect();
    layerwise_upper_bound(&widths, net.input_dim() as u64)
}

fn regions_csv(regions: &[CarvedRegion]) -> String {
    let mut s = String::from("pattern,area,vertices,coeffs\n");
    for r in regions {
        let verts = joined(r.polygon.vertices.iter().map(|v| format!("{} {}", v[0], v[1])), ";");
        let coeffs = joined(
            r.functions
                .values()
                .map(|f| format!("{} {}", joined(&f.coefficients, " "), f.constant)),
            ";",
        );
        s.push_str(&format!("{},{},{verts},{coeffs}\n", r.pattern, r.area()));
    }
    s
}

/// Carves a 1- or 2-input pure ReLU network; 1-input networks become strips.
fn carve_planar(net: &Network, bbox: &BoundingBox) -> Fallible<(Network, BoundingBox, Vec<CarvedRegion>)> {
    let (net, bbox) = if net.input_dim() == 1 {
        (embed_in_strip(net).map_err(dom)?, strip_box(bbox.lo[0].clone(), bbox.hi[0].clone()).map_err(dom)?)
    } else {
        (net.clone(), bbox.clone())
    };
    let regions = carve_exact_2d(&net, &bbox).map_err(dom)?;
    Ok((net, bbox, regions))
}

fn decision_for(regions: &[CarvedRegion], net: &Network, spec: Option<&str>, output: Option<&str>) -> Fallible<Option<DecisionPartition>> {
    let Some(spec) = spec else { return Ok(None) };
    let (t1, t2) = parse_thresholds(spec)?;
    let out = single_output(net, output)?;
    decision_partition(regions, &out, t1, t2).map(Some).map_err(dom)
}

fn report_decision(ctx: &mut Ctx, d: &DecisionPartition) -> Fallible<()> {
    for label in [DecisionLabel::Cat, DecisionLabel::Dog, DecisionLabel::Indecision] {
        let pieces: Vec<_> = d.pieces.iter().filter(|p| p.label == label).collect();
        let area: Rational = pieces.iter().map(|p| p.polygon.area()).sum();
        ctx.say(format!("{label}: {} pieces, area {:.6}", pieces.len(), rational::to_f64(&area)))?;
    }
    Ok(())
}

fn cmd_count(a: &CountArgs, ctx: &mut Ctx) -> Fallible<()> {
    let ns = parse_list(&a.n)?;
    let ds = parse_list(&a.d)?;
    let rows: Vec<(u64, u64, BigUint)> = ns
        .iter()
        .flat_map(|&n| ds.iter().map(move |&d| (n, d, region_count_formula(n, d))))
        .collect();
    if rows.len() == 1 {
        ctx.say(&rows[0].2)?;
        if let Some(p) = &a.csv {
            ctx.csv(Some(p), &counts_csv(&rows))?;
        }
        return Ok(());
    }
    ctx.csv(a.csv.as_deref(), &counts_csv(&rows))
}

fn cmd_bound(a: &BoundArgs, ctx: &mut Ctx) -> Fallible<()> {
    let widths: Vec<u64> = parse_list(&a.widths)?;
    if widths.is_empty() {
        return Err(usage("--widths needs at least one layer"));
    }
    let b = layerwise_upper_bound(&widths, a.d);
    ctx.say(&b)?;
    if let Some(p) = &a.csv {
        ctx.csv(Some(p), &format!("widths,d,bound\n{},{},{b}\n", joined(&widths, " "), a.d))?;
    }
    Ok(())
}

fn cmd_carve(a: &CarveArgs, ctx: &mut Ctx) -> Fallible<()> {
    let mode = if a.exact { NumberMode::Exact } else { NumberMode::Float };
    let net = load_network(&a.net, mode)?;
    let bbox = parse_box(a.bbox.as_deref(), net.input_dim())?;
    if net.input_dim() > 2 {
        if a.svg.is_some() || a.decision.is_some() {
            return Err(usage("--svg and --decision need a network with at most 2 inputs"));
        }
        let lp = if a.exact { CarveMode::Exact } else { CarveMode::Float };
        let cells = carve_signvectors(&net, &bbox, lp).map_err(dom)?;
        ctx.say(format!("regions: {}", cells.len()))?;
        ctx.say(format!("bound: {}", carving_bound(&net)))?;
        let mut s = String::from("pattern,witness\n");
        for c in &cells {
            s.push_str(&format!("{},{}\n", c.pattern, joined(&c.point, " ")));
        }
        if let Some(p) = &a.csv {
            ctx.csv(Some(p), &s)?;
        }
        return Ok(());
    }
    let (planar, pbox, regions) = carve_planar(&net, &bbox)?;
    let patterns: Vec<_> = regions.iter().map(|r| r.pattern.clone()).collect();
    ctx.say(format!("regions: {}", regions.len()))?;
    ctx.say(format!("per layer: {}", joined(layer_counts(&planar, &patterns), " ")))?;
    ctx.say(format!("bound: {}", carving_bound(&net)))?;
    let decision = decision_for(&regions, &planar, a.decision.as_deref(), a.output.as_deref())?;
    if let Some(d) = &decision {
        report_decision(ctx, d)?;
    }
    if let Some(p) = &a.csv {
        ctx.csv(Some(p), &regions_csv(&regions))?;
    }
    if let Some(p) = &a.svg {
        let svg = render_regions(&planar, &regions, &pbox, decision.as_ref(), &SvgStyle::default()).map_err(dom)?;
        write_file(p, &svg)?;
    }
    Ok(())
}

fn cmd_fold(a: &FoldArgs, ctx: &mut Ctx) -> Fallible<()> {
    let net = carver::build_folding_network(a.n, a.d, a.layers).map_err(dom)?;
    let unit = BoundingBox::new(vec![rational::int(0); a.d], vec![rational::int(1); a.d]).map_err(dom)?;
    let (count, svg) = if a.d <= 2 {
        let (planar, pbox, regions) = carve_planar(&net, &unit)?;
        let svg = match &a.svg {
            Some(_) => Some(render_regions(&planar, &regions, &pbox, None, &SvgStyle::default()).map_err(dom)?),
            None => None,
        };
        (regions.len(), svg)
    } else {
        if a.svg.is_some() {
            return Err(usage("--svg needs d <= 2"));
        }
        (carve_signvectors(&net, &unit, CarveMode::Float).map_err(dom)?.len(), None)
    };
    let m = BigUint::from((a.n / a.d) as u64);
    let lower = m.pow((a.d * (a.layers - 1)) as u32) * region_count_formula(a.n as u64, a.d as u64);
    let upper = carving_bound(&net);
    ctx.say(format!("regions: {count}"))?;
    ctx.say(format!("construction target: {lower}"))?;
    ctx.say(format!("bound: {upper}"))?;
    if let Some(p) = &a.net_out {
        write_file(p, &to_json(&net))?;
    }
    if let Some(p) = &a.csv {
        let body = format!("n,d,layers,regions,target,bound\n{},{},{},{count},{lower},{upper}\n", a.n, a.d, a.layers);
        ctx.csv(Some(p), &body)?;
    }
    if let (Some(p), Some(svg)) = (&a.svg, svg) {
        write_file(p, &svg)?;
    }
    Ok(())
}

fn level_sets(net: &Network, cells: &[PolynomialCell], bbox: &BoundingBox, spec: Option<&str>, grid: usize) -> Fallible<Vec<Polyline>> {
    let Some(spec) = spec else { return Ok(Vec::new()) };
    let (id, c) = parse_level(spec)?;
    let mut lines = Vec::new();
    for cell in cells {
        lines.extend(trace_level_set(net, &id, &cell.pattern, c, bbox, grid).map_err(dom)?);
    }
    Ok(lines)
}

fn cmd_attention(a: &AttentionArgs, ctx: &mut Ctx) -> Fallible<()> {
    let net = load_network(&a.net, NumberMode::Float)?;
    let bbox = parse_box(a.bbox.as_deref(), net.input_dim())?;
    let degrees = polynomial_degree(&net);
    for &o in net.outputs() {
        let id = &net.neuron(o).id;
        ctx.say(format!("degree {id}: {}", degrees[id]))?;
    }
    let cells = carve_polynomial(&net, &bbox, a.grid).map_err(dom)?;
    ctx.say(format!("cells: {}", cells.len()))?;
    if let Some(p) = &a.csv {
        let mut s = String::from("pattern,points,output,degree,polynomial\n");
        for c in &cells {
            for (id, poly) in &c.polynomials {
                s.push_str(&format!("{},{},{id},{},{poly}\n", c.pattern, c.points.len(), poly.degree()));
            }
        }
        ctx.csv(Some(p), &s)?;
    }
    if let Some(p) = &a.svg {
        let lines = level_sets(&net, &cells, &bbox, a.level.as_deref(), a.grid)?;
        write_file(p, &render_cells(&cells, &lines, &bbox, &SvgStyle::default()).map_err(dom)?)?;
    }
    Ok(())
}

fn build_loss(a: &LossArgs) -> Fallible<NetworkLoss> {
    let net = load_network(&a.net, NumberMode::Float)?;
    let dim = net.input_dim();
    let pn = ParamNet::new(net).map_err(dom)?;
    let batch = parse_batch(&read_file(&a.data)?, dim).map_err(|e| CliError::Domain(format!("{}: {e}", a.data.display())))?;
    let kind = match a.loss {
        LossChoice::L2 => LossKind::SquaredError,
        LossChoice::Xent => LossKind::CrossEntropy,
    };
    NetworkLoss::new(pn, batch, kind).map_err(dom)
}

fn random_theta(dim: usize, scale: f64, seed: u64, stream: u64) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng::substream(seed, stream);
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            scale * z
        })
        .collect()
}

fn cmd_interp(a: &InterpArgs, ctx: &mut Ctx) -> Fallible<()> {
    let loss = build_loss(&a.loss)?;
    let theta0 = random_theta(loss.dim(), a.init_scale, a.common.seed, 0);
    let run = gradient_descent(&loss, &theta0, a.iters, a.step).map_err(dom)?;
    let curve = interpolation_curve(&loss, &theta0, &run.theta, a.steps).map_err(dom)?;
    ctx.say(format!("start loss: {}", curve[0].1))?;
    ctx.say(format!("final loss: {}", run.final_loss))?;
    ctx.say(format!("max interior bump: {}", max_interior_bump(&curve)))?;
    let body = format!("alpha,loss\n{}", curve.iter().map(|(t, l)| format!("{t},{l}\n")).collect::<String>());
    if let Some(p) = &a.csv {
        ctx.csv(Some(p), &body)?;
    }
    Ok(())
}

fn cmd_plane(a: &PlaneArgs, ctx: &mut Ctx) -> Fallible<()> {
    let loss = build_loss(&a.loss)?;
    let mut centre = loss.net.initial_theta();
    if a.iters > 0 {
        centre = gradient_descent(&loss, &centre, a.iters, a.step).map_err(dom)?.theta;
    }
    let section: PlaneSection =
        plane_section(&loss, &centre, a.grid, a.extent, &mut rng::substream(a.common.seed, 0)).map_err(dom)?;
    let mid = a.grid / 2;
    ctx.say(format!("centre loss: {}", section.at(mid, mid)))?;
    let finite: Vec<f64> = section.values.iter().copied().filter(|v| v.is_finite()).collect();
    ctx.say(format!(
        "range: {} .. {}",
        finite.iter().copied().fold(f64::INFINITY, f64::min),
        finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    ))?;
    if let Some(p) = &a.csv {
        ctx.csv(Some(p), &section.to_csv())?;
    }
    if let Some(p) = &a.svg {
        write_file(p, &render_heatmap(section.grid, &section.values, &SvgStyle::default()).map_err(dom)?)?;
    }
    Ok(())
}

fn cmd_subspace(a: &SubspaceArgs, ctx: &mut Ctx) -> Fallible<()> {
    let loss = build_loss(&a.loss)?;
    let theta0 = random_theta(loss.dim(), a.init_scale, a.common.seed, 0);
    let sub = subspace_descent(&loss, &theta0, a.dsub, a.iters, a.step, &mut rng::substream(a.common.seed, 1))
        .map_err(dom)?;
    let full = gradient_descent(&loss, &theta0, a.iters, a.step).map_err(dom)?;
    ctx.say(format!("parameters: {}", loss.dim()))?;
    ctx.say(format!("subspace final loss: {}", sub.final_loss))?;
    ctx.say(format!("full final loss: {}", full.final_loss))?;
    let mut s = String::from("iter,subspace_loss,full_loss\n");
    for (k, (a, b)) in sub.losses.iter().zip(&full.losses).enumerate() {
        s.push_str(&format!("{k},{a},{b}\n"));
    }
    if let Some(p) = &a.csv {
        ctx.csv(Some(p), &s)?;
    }
    Ok(())
}

fn cmd_critical(a: &CriticalArgs, ctx: &mut Ctx) -> Fallible<()> {
    let loss = build_loss(&a.loss)?;
    let mut s = String::from("start,loss,gradnorm,index,index_fraction,class,near_boundary\n");
    let mut tally = std::collections::BTreeMap::<&str, usize>::new();
    for k in 0..a.starts {
        let theta0 = random_theta(loss.dim(), a.init_scale, a.common.seed, k as u64);
        let run = gradient_descent(&loss, &theta0, a.iters, a.step).map_err(dom)?;
        let (v, g) = loss.value_and_gradient(&run.theta);
        let report = hessian(&loss, &run.theta, HessianMode::Symbolic).map_err(dom)?;
        let spec = spectrum(&report.matrix, None);
        let gn = crate::linalg::norm(&g);
        let class = if gn > a.tol {
            "noncritical"
        } else {
            crate::polyland::classify_critical_point(&spec).as_str()
        };
        *tally.entry(class).or_default() += 1;
        s.push_str(&format!(
            "{k},{v},{gn:e},{},{},{class},{}\n",
            spec.index_count,
            spec.index_fraction,
            report.near_boundary as u8
        ));
    }
    for (c, n) in &tally {
        ctx.say(format!("{c}: {n}"))?;
    }
    if let Some(p) = &a.csv {
        ctx.csv(Some(p), &s)?;
    }
    Ok(())
}

fn cmd_goe(a: &GoeArgs, ctx: &mut Ctx) -> Fallible<()> {
    let ns = parse_list(&a.n)?;
    let mut s = String::from("n,trials,successes,p,lo,hi\n");
    let mut pairs = Vec::new();
    for &n in &ns {
        let est = prob_positive_definite(&GoeSpec::new(n as usize), a.trials, a.common.seed).map_err(dom)?;
        ctx.say(format!("n={n}: p={} [{}, {}]", est.p, est.lo, est.hi))?;
        s.push_str(&format!("{n},{},{},{},{},{}\n", est.trials, est.successes, est.p, est.lo, est.hi));
        if est.successes > 0 {
            pairs.push((n as usize, est.p));
        }
    }
    if pairs.len() >= 3 {
        let fit = fit_decay_rate(&pairs).map_err(dom)?;
        ctx.say(format!("k: {} (intercept {}, residual {})", fit.k, fit.intercept, fit.residual))?;
        if fit.poor {
            ctx.say("warning: -ln p is better explained as linear in n")?;
        }
    }
    ctx.csv(a.csv.as_deref(), &s)
}

fn cmd_polycrit(a: &PolycritArgs, ctx: &mut Ctx) -> Fallible<()> {
    let ns = parse_list(&a.n)?;
    let mut s = String::from(
        "nvars,degree,trials,mean_count,frac_local_min,frac_local_max,frac_saddle,frac_degenerate,failed_starts\n",
    );
    for &n in &ns {
        let spec = RandomPolynomialSpec { nvars: n as usize, degree: a.d };
        let st = critical_point_stats(&spec, a.trials as usize, rng::derive(a.common.seed, n), a.starts);
        ctx.say(format!(
            "n={n}: mean count {}, local-min {}, saddle {}",
            st.mean_count, st.frac_local_min, st.frac_saddle
        ))?;
        s.push_str(&format!(
            "{n},{},{},{},{},{},{},{},{}\n",
            a.d,
            st.trials,
            st.mean_count,
            st.frac_local_min,
            st.frac_local_max,
            st.frac_saddle,
            st.frac_degenerate,
            st.failed_starts
        ));
    }
    ctx.csv(a.csv.as_deref(), &s)
}

fn cmd_spin(a: &SpinArgs, ctx: &mut Ctx) -> Fallible<()> {
    let cfg = ProfileConfig {
        max_descent_steps: a.max_descent,
        rate: a.rate,
        polish_iters: a.polish,
    };
    let profile = index_energy_profile(a.n, a.p, a.trials as usize, a.common.seed, &cfg).map_err(dom)?;
    let conv = profile.converged();
    ctx.say(format!("converged: {} of {}", conv.len(), profile.points.len()))?;
    if !conv.is_empty() {
        let e: Vec<f64> = conv.iter().map(|p| p.energy_per_spin).collect();
        ctx.say(format!("lowest energy per spin: {}", e.iter().copied().fold(f64::INFINITY, f64::min)))?;
        ctx.say(format!("median energy per spin: {}", stats::median(&e)))?;
        ctx.say(format!("lowest-decile median index: {}", profile.lowest_decile_median_index()))?;
        ctx.say(format!("spearman(energy, index): {}", profile.spearman()))?;
    }
    if let Some(p) = &a.csv {
        ctx.csv(Some(p), &profile.to_csv())?;
    }
    Ok(())
}

fn cmd_sat(a: &SatArgs, ctx: &mut Ctx) -> Fallible<()> {
    if let Some(path) = &a.dimacs {
        let f = parse_dimacs(&read_file(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
        let solve = dpll_solve(&f, a.budget);
        match solve.verdict {
            Verdict::Sat(assign) => {
                ctx.say("s SATISFIABLE")?;
                let lits = assign
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if v { (i + 1) as i64 } else { -((i + 1) as i64) });
                ctx.say(format!("v {} 0", joined(lits, " ")))?;
            }
            Verdict::Unsat => ctx.say("s UNSATISFIABLE")?,
            Verdict::Timeout => ctx.say("s UNKNOWN")?,
        }
        return ctx.say(format!("c nodes {}", solve.nodes));
    }
    let alphas = parse_alphas(&a.alpha)?;
    if let Some(p) = &a.emit {
        let m = (alphas[0] * a.n as f64).round() as usize;
        let f = random_3sat(a.n, m, &mut rng::substream(a.common.seed, u64::MAX)).map_err(dom)?;
        write_file(p, &f.to_dimacs())?;
    }
    let points = phase_sweep(a.n, &alphas, a.trials as usize, a.common.seed, a.budget).map_err(dom)?;
    for p in &points {
        ctx.say(format!("alpha={}: sat fraction {} (timeouts {})", p.alpha, p.fraction, p.timeouts))?;
    }
    match half_crossing(&points) {
        Some(c) => ctx.say(format!("0.5 crossing: {c}"))?,
        None => ctx.say("0.5 crossing: none in range")?,
    }
    if let Some(p) = &a.csv {
        ctx.csv(Some(p), &sweep_csv(&points))?;
    }
    Ok(())
}

fn cmd_render(a: &RenderArgs, ctx: &mut Ctx) -> Fallible<()> {
    let svg = if let Some(path) = &a.heatmap {
        let (grid, values) = PlaneSection::grid_from_csv(&read_file(path)?).map_err(dom)?;
        render_heatmap(grid, &values, &SvgStyle::default()).map_err(dom)?
    } else if let Some(path) = &a.net {
        let net = load_network(path, NumberMode::Float)?;
        let bbox = parse_box(a.bbox.as_deref(), net.input_dim())?;
        if !net.has_kind(crate::netspec::NeuronKind::Mul) {
            let (planar, pbox, regions) = carve_planar(&net, &bbox)?;
            let decision = decision_for(&regions, &planar, a.decision.as_deref(), a.output.as_deref())?;
            ctx.say(format!("regions: {}", regions.len()))?;
            render_regions(&planar, &regions, &pbox, decision.as_ref(), &SvgStyle::default()).map_err(dom)?
        } else {
            let cells = carve_polynomial(&net, &bbox, a.grid).map_err(dom)?;
            let lines = level_sets(&net, &cells, &bbox, a.level.as_deref(), a.grid)?;
            ctx.say(format!("cells: {}", cells.len()))?;
            render_cells(&cells, &lines, &bbox, &SvgStyle::default()).map_err(dom)?
        }
    } else {
        return Err(usage("render needs --net or --heatmap"));
    };
    write_file(&a.out, &svg)
}

/// Splices flags from `--config FILE` into `argv`, right after the
/// subcommand words so that explicit flags override them. A `command` key
/// supplies the subcommand when `argv` has none.
fn expand_config(argv: &[String]) -> Fallible<Vec<String>> {
    let mut rest = Vec::new();
    let mut config = None;
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            config = Some(it.next().ok_or_else(|| usage("--config needs a file"))?.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(a.clone());
        }
    }
    let prog = argv.first().cloned().unwrap_or_else(|| "carve-lab".into());
    let Some(path) = config else {
        return Ok(std::iter::once(prog).chain(rest).collect());
    };
    let text = read_file(Path::new(&path))?;
    let mut command: Vec<String> = Vec::new();
    let mut flags = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{path}:{}: expected key=value", k + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match (key, value) {
            ("command", v) => command = v.split_whitespace().map(String::from).collect(),
            (k, _) if META_KEYS.contains(&k) => {}
            (k, "true") => flags.push(format!("--{k}")),
            (_, "false") => {}
            (k, v) => flags.push(format!("--{k}={v}")),
        }
    }
    let words = rest.iter().take_while(|a| !a.starts_with('-')).count();
    let (sub, explicit) = rest.split_at(words);
    let sub: Vec<String> = if sub.is_empty() { command } else { sub.to_vec() };
    Ok(std::iter::once(prog)
        .chain(sub)
        .chain(flags)
        .chain(explicit.iter().cloned())
        .collect())
}

fn command() -> clap::Command {
    fn overridable(c: clap::Command) -> clap::Command {
        c.args_override_self(true).mut_subcommands(overridable)
    }
    overridable(Cli::command())
}

/// Resolved `key=value` lines of the leaf subcommand, in declaration order.
fn manifest_lines(cmd: &clap::Command, m: &ArgMatches) -> (Vec<String>, Vec<(String, String)>) {
    let mut path = Vec::new();
    let (mut cmd, mut m) = (cmd, m);
    while let Some((name, sub)) = m.subcommand() {
        path.push(name.to_string());
        cmd = cmd.find_subcommand(name).expect("matched subcommand exists");
        m = sub;
    }
    let mut kv = Vec::new();
    for arg in cmd.get_arguments() {
        let Some(long) = arg.get_long() else { continue };
        if META_KEYS.contains(&long) || matches!(long, "help" | "version") {
            continue;
        }
        let Ok(Some(raw)) = m.try_get_raw(arg.get_id().as_str()) else {
            continue;
        };
        let value = joined(raw.map(|v| v.to_string_lossy().into_owned()), ",");
        kv.push((long.to_string(), value));
    }
    (path, kv)
}

fn render_manifest(path: &[String], kv: &[(String, String)]) -> String {
    let mut s = format!("# carve-lab {VERSION} manifest\ncommand={}\n", path.join(" "));
    for (k, v) in kv {
        s.push_str(&format!("{k}={v}\n"));
    }
    s
}

fn config_hash(path: &[String], kv: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    h.update(format!("command={}\n", path.join(" ")));
    for (k, v) in kv.iter().filter(|(k, _)| !OUTPUT_KEYS.contains(&k.as_str())) {
        h.update(format!("{k}={v}\n"));
    }
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn manifest_target(c: &Command) -> Option<&Path> {
    let common = match c {
        Command::Count(a) => &a.common,
        Command::Bound(a) => &a.common,
        Command::Carve(a) => &a.common,
        Command::Fold(a) => &a.common,
        Command::Attention(a) => &a.common,
        Command::Landscape { probe } => match probe {
            Landscape::Interp(a) => &a.common,
            Landscape::Plane(a) => &a.common,
            Landscape::Subspace(a) => &a.common,
            Landscape::Critical(a) => &a.common,
        },
        Command::Goe(a) => &a.common,
        Command::Polycrit(a) => &a.common,
        Command::Spin(a) => &a.common,
        Command::Sat(a) => &a.common,
        Command::Render(a) => &a.common,
    };
    common.manifest.as_deref()
}

fn execute(c: &Command, ctx: &mut Ctx) -> Fallible<()> {
    match c {
        Command::Count(a) => cmd_count(a, ctx),
        Command::Bound(a) => cmd_bound(a, ctx),
        Command::Carve(a) => cmd_carve(a, ctx),
        Command::Fold(a) => cmd_fold(a, ctx),
        Command::Attention(a) => cmd_attention(a, ctx),
        Command::Landscape { probe } => match probe {
            Landscape::Interp(a) => cmd_interp(a, ctx),
            Landscape::Plane(a) => cmd_plane(a, ctx),
            Landscape::Subspace(a) => cmd_subspace(a, ctx),
            Landscape::Critical(a) => cmd_critical(a, ctx),
        },
        Command::Goe(a) => cmd_goe(a, ctx),
        Command::Polycrit(a) => cmd_polycrit(a, ctx),
        Command::Spin(a) => cmd_spin(a, ctx),
        Command::Sat(a) => cmd_sat(a, ctx),
        Command::Render(a) => cmd_render(a, ctx),
    }
}

/// Runs one command line with explicit output streams; returns the exit
/// code (0 success, 1 domain error, 2 usage error).
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => return report(e, err),
    };
    let cmd = command();
    let matches = match cmd.clone().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    let (path, kv) = manifest_lines(&cmd, &matches);
    let manifest = render_manifest(&path, &kv);
    let written = match manifest_target(&cli.command) {
        Some(p) => write_file(p, &manifest),
        None => err.write_all(manifest.as_bytes()).map_err(dom),
    };
    if let Err(e) = written {
        return report(e, err);
    }
    let mut ctx = Ctx {
        out,
        stamp: format!("# carve-lab {VERSION} config={}\n", config_hash(&path, &kv)),
    };
    match execute(&cli.command, &mut ctx) {
        Ok(()) => 0,
        Err(e) => report(e, err),
    }
}

fn report(e: CliError, err: &mut dyn Write) -> i32 {
    match e {
        CliError::Usage(m) => {
            let _ = writeln!(err, "error: {m}\n\n{}", command().render_usage());
            2
        }
        CliError::Domain(m) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

/// Entry point for the binary: runs `argv` against the process streams.
pub fn dispatch(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}
