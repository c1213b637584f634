//! Thresholded decisions: two parallel cuts of each region's logit.

use std::fmt;

use super::{exact2d::CarvedRegion, CarveError, Result};
use crate::geometry::{Affine2, Polygon};
use crate::netspec::ActivationPattern;
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DecisionLabel {
    Cat,
    Dog,
    Indecision,
}

impl fmt::Display for DecisionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecisionLabel::Cat => "cat",
            DecisionLabel::Dog => "dog",
            DecisionLabel::Indecision => "indecision",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DecisionPiece {
    pub pattern: ActivationPattern,
    pub polygon: Polygon,
    pub label: DecisionLabel,
}

#[derive(Clone, Debug)]
pub struct DecisionPartition {
    pub pieces: Vec<DecisionPiece>,
    /// Rational stand-ins for `ln(T/(1−T))`, upper then lower.
    pub logit_cuts: (Rational, Rational),
}

/// `ln(T/(1−T))` rounded to the nearest double, held exactly.
pub fn logit_threshold(t: f64) -> Rational {
    rational::from_f64((t / (1.0 - t)).ln()).expect("finite logit")
}

/// Splits every region along the two lines where its logit equals the
/// threshold logits: above the `t1` line is Cat, below the `t2` line is Dog,
/// the band between is Indecision. `output` selects the sigmoid output.
pub fn decision_partition(
    regions: &[CarvedRegion],
    output: &str,
    t1: f64,
    t2: f64,
) -> Result<DecisionPartition> {
    if !(t2 > 0.0 && t1 > t2 && t1 < 1.0) {
        return Err(CarveError::InvalidThresholds { t1, t2 });
    }
    let hi = logit_threshold(t1);
    let lo = logit_threshold(t2);
    let mut pieces = Vec::new();
    for r in regions {
        let f = r
            .functions
            .get(output)
            .ok_or_else(|| CarveError::UnknownNeuron(output.to_string()))?;
        let logit = Affine2::new(f.coefficients[0].clone(), f.coefficients[1].clone(), f.constant.clone());
        let above = Affine2 {
            a: logit.a.clone(),
            b: &logit.b - &hi,
        };
        let below = Affine2 {
            a: logit.a.clone(),
            b: &logit.b - &lo,
        };
        let (cat, rest) = split_decided(&r.polygon, &above);
        if let Some(p) = cat {
            pieces.push(DecisionPiece {
                pattern: r.pattern.clone(),
                polygon: p,
                label: DecisionLabel::Cat,
            });
        }
        if let Some(rest) = rest {
            let (mid, dog) = split_decided(&rest, &below);
            if let Some(p) = mid {
                pieces.push(DecisionPiece {
                    pattern: r.pattern.clone(),
                    polygon: p,
                    label: DecisionLabel::Indecision,
                });
            }
            if let Some(p) = dog {
                pieces.push(DecisionPiece {
                    pattern: r.pattern.clone(),
                    polygon: p,
                    label: DecisionLabel::Dog,
                });
            }
        }
    }
    Ok(DecisionPartition {
        pieces,
        logit_cuts: (hi, lo),
    })
}

/// Like `Polygon::split`, but a polygon lying on one side (touching the line
/// at most) goes to the side containing its interior.
fn split_decided(poly: &Polygon, f: &Affine2) -> (Option<Polygon>, Option<Polygon>) {
    match poly.split(f, None) {
        (Some(p), Some(n)) => (Some(p), Some(n)),
        _ => {
            use num_traits::Signed;
            if f.eval(&poly.centroid()).is_positive() {
                (Some(poly.clone()), None)
            } else {
                (None, Some(poly.clone()))
            }
        }
    }
}
