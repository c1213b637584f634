//! Random 3-SAT, a DPLL solver, and the satisfiability phase transition in
//! the clause ratio `α = M/N`.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng;
use crate::stats::median;

#[derive(Debug, Error, PartialEq)]
pub enum SatError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("DIMACS line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("literal {lit} out of range for {n} variables")]
    LiteralRange { lit: i32, n: usize },
}

pub type Result<T> = std::result::Result<T, SatError>;

/// CNF over variables `1..=n`; a literal is `±v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub n: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(n: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for c in &clauses {
            for &lit in c {
                if lit == 0 || lit.unsigned_abs() as usize > n {
                    return Err(SatError::LiteralRange { lit, n });
                }
            }
        }
        Ok(CnfFormula { n, clauses })
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn alpha(&self) -> f64 {
        self.m() as f64 / self.n as f64
    }

    /// `assignment[v − 1]` is the value of variable `v`.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.n
            && self
                .clauses
                .iter()
                .all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.n, self.m());
        for c in &self.clauses {
            for l in c {
                s.push_str(&format!("{l} "));
            }
            s.push_str("0\n");
        }
        s
    }
}

/// Reads `c` comments, a `p cnf N M` header and zero-terminated clauses,
/// which may span lines; a `%` line ends the input.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let f: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() || f.len() != 4 || f[1] != "cnf" {
                return Err(SatError::Dimacs {
                    line: lineno,
                    msg: format!("bad header {line:?}"),
                });
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| SatError::Dimacs {
                    line: lineno,
                    msg: format!("bad count {s:?}"),
                })
            };
            header = Some((parse(f[2])?, parse(f[3])?));
            continue;
        }
        if header.is_none() {
            return Err(SatError::Dimacs {
                line: lineno,
                msg: "clause before header".into(),
            });
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| SatError::Dimacs {
                line: lineno,
                msg: format!("bad literal {tok:?}"),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    let (n, m) = header.ok_or(SatError::Dimacs {
        line: 0,
        msg: "missing header".into(),
    })?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != m {
        return Err(SatError::Dimacs {
            line: 0,
            msg: format!("header declares {m} clauses, found {}", clauses.len()),
        });
    }
    CnfFormula::new(n, clauses)
}

/// `m` clauses, each over 3 distinct variables drawn uniformly, each
/// literal negated with probability ½. Clauses may repeat.
pub fn random_3sat<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<CnfFormula> {
    if n < 3 {
        return Err(SatError::InvalidSize(format!("need N >= 3, got {n}")));
    }
    let clauses = (0..m)
        .map(|_| {
            sample(rng, n, 3)
                .into_iter()
                .map(|v| {
                    let v = v as i32 + 1;
                    if rng.random::<bool>() {
                        -v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    Ok(CnfFormula { n, clauses })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solve {
    pub verdict: Verdict,
    /// Branching decisions made.
    pub nodes: u64,
}

/// Default search budget in branching nodes.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

struct Dpll<'a> {
    f: &'a CnfFormula,
    nodes: u64,
    budget: u64,
}

enum Outcome {
    Sat(Vec<i8>),
    Unsat,
    Timeout,
}

fn value(a: &[i8], lit: i32) -> i8 {
    let v = a[lit.unsigned_abs() as usize];
    if lit > 0 {
        v
    } else {
        -v
    }
}

impl Dpll<'_> {
    /// Unit propagation and pure-literal elimination to a fixed point;
    /// `false` on conflict.
    fn simplify(&self, a: &mut [i8]) -> bool {
        loop {
            let mut changed = false;
            let mut polarity = vec![0u8; self.f.n + 1];
            for c in &self.f.clauses {
                let mut open = 0;
                let mut last = 0;
                let mut sat = false;
                for &l in c {
                    match value(a, l) {
                        1 => {
                            sat = true;
                            break;
                        }
                        0 => {
                            open += 1;
                            last = l;
                        }
                        _ => {}
                    }
                }
                if sat {
                    continue;
                }
                if open == 0 {
                    return false;
                }
                if open == 1 {
                    a[last.unsigned_abs() as usize] = if last > 0 { 1 } else { -1 };
                    changed = true;
                    continue;
                }
                for &l in c {
                    if value(a, l) == 0 {
                        polarity[l.unsigned_abs() as usize] |= if l > 0 { 1 } else { 2 };
                    }
                }
            }
            if !changed {
                for v in 1..=self.f.n {
                    if a[v] == 0 && (polarity[v] == 1 || polarity[v] == 2) {
                        a[v] = if polarity[v] == 1 { 1 } else { -1 };
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    /// First open literal of a shortest unsatisfied clause.
    fn choose(&self, a: &[i8]) -> Option<i32> {
        let mut best: Option<(usize, i32)> = None;
        for c in &self.f.clauses {
            if c.iter().any(|&l| value(a, l) == 1) {
                continue;
            }
            let open: Vec<i32> = c.iter().copied().filter(|&l| value(a, l) == 0).collect();
            if let Some(&l) = open.first() {
                if best.is_none_or(|(k, _)| open.len() < k) {
                    best = Some((open.len(), l));
                }
            }
        }
        best.map(|(_, l)| l)
    }

    fn search(&mut self, mut a: Vec<i8>) -> Outcome {
        if !self.simplify(&mut a) {
            return Outcome::Unsat;
        }
        let Some(lit) = self.choose(&a) else {
            return Outcome::Sat(a);
        };
        for val in [lit, -lit] {
            if self.nodes >= self.budget {
                return Outcome::Timeout;
            }
            self.nodes += 1;
            let mut b = a.clone();
            b[val.unsigned_abs() as usize] = if val > 0 { 1 } else { -1 };
            match self.search(b) {
                Outcome::Unsat => continue,
                other => return other,
            }
        }
        Outcome::Unsat
    }
}

/// Complete DPLL search with unit propagation and pure-literal
/// elimination; gives up after `budget` branching nodes.
pub fn dpll_solve(f: &CnfFormula, budget: u64) -> Solve {
    let mut s = Dpll { f, nodes: 0, budget };
    let verdict = match s.search(vec![0; f.n + 1]) {
        // unconstrained variables default to true
        Outcome::Sat(a) => Verdict::Sat(a[1..].iter().map(|&v| v >= 0).collect()),
        Outcome::Unsat => Verdict::Unsat,
        Outcome::Timeout => Verdict::Timeout,
    };
    if let Verdict::Sat(ref a) = verdict {
        assert!(f.satisfied_by(a), "solver produced a non-satisfying assignment");
    }
    Solve { verdict, nodes: s.nodes }
}

/// Exhaustive search over all `2^N` assignments (`N ≤ 24`).
pub fn brute_force(f: &CnfFormula) -> Result<Option<Vec<bool>>> {
    if f.n > 24 {
        return Err(SatError::InvalidSize(format!("brute force limited to 24 variables, got {}", f.n)));
    }
    let masks: Vec<(u32, u32)> = f
        .clauses
        .iter()
        .map(|c| {
            c.iter().fold((0u32, 0u32), |(p, q), &l| {
                let bit = 1u32 << (l.unsigned_abs() - 1);
                if l > 0 {
                    (p | bit, q)
                } else {
                    (p, q | bit)
                }
            })
        })
        .collect();
    let found = (0u32..(1u32 << f.n))
        .into_par_iter()
        .find_first(|&a| masks.iter().all(|&(p, q)| (a & p) != 0 || (!a & q) != 0));
    Ok(found.map(|a| (0..f.n).map(|v| a >> v & 1 == 1).collect()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub m: usize,
    pub sat: usize,
    pub unsat: usize,
    pub timeouts: usize,
    /// Satisfiable share of the decided trials.
    pub fraction: f64,
    pub median_nodes: f64,
}

/// For each `α`, `trials` formulas with `M = round(αN)`; trial `t` at the
/// `k`-th ratio draws from substream `t` of `derive(seed, k)`.
pub fn phase_sweep(n: usize, alphas: &[f64], trials: usize, seed: u64, budget: u64) -> Result<Vec<SweepPoint>> {
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(SatError::InvalidSize(format!("clause ratio must be positive, got {a}")));
    }
    if n < 3 {
        return Err(SatError::InvalidSize(format!("need N >= 3, got {n}")));
    }
    alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let m = (alpha * n as f64).round() as usize;
            let base = rng::derive(seed, k as u64);
            let solves: Vec<Solve> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let f = random_3sat(n, m, &mut rng::substream(base, t as u64))?;
                    Ok(dpll_solve(&f, budget))
                })
                .collect::<Result<_>>()?;
            let sat = solves.iter().filter(|s| matches!(s.verdict, Verdict::Sat(_))).count();
            let unsat = solves.iter().filter(|s| s.verdict == Verdict::Unsat).count();
            let nodes: Vec<f64> = solves.iter().map(|s| s.nodes as f64).collect();
            Ok(SweepPoint {
                alpha,
                m,
                sat,
                unsat,
                timeouts: trials - sat - unsat,
                fraction: if sat + unsat == 0 {
                    f64::NAN
                } else {
                    sat as f64 / (sat + unsat) as f64
                },
                median_nodes: if nodes.is_empty() { 0.0 } else { median(&nodes) },
            })
        })
        .collect()
}

/// First `α` at which the satisfiable fraction falls through ½, by linear
/// interpolation between neighbouring sweep points.
pub fn half_crossing(points: &[SweepPoint]) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.fraction >= 0.5 && b.fraction < 0.5 {
            let t = (a.fraction - 0.5) / (a.fraction - b.fraction);
            Some(a.alpha + t * (b.alpha - a.alpha))
        } else {
            None
        }
    })
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("alpha,m,sat,unsat,timeouts,fraction,median_nodes\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.alpha, p.m, p.sat, p.unsat, p.timeouts, p.fraction, p.median_nodes
        ));
    }
    s
}
