//! Order and lattice structure on submeasure-class descriptors.
//!
//! A descriptor `(L, A)` stands for the class of all submeasures satisfying
//! the union law under that pair. Classes are never materialized: every
//! class-level claim is restated as a descriptor comparison or a
//! membership-implication run, which is exactly what the underlying theory
//! uses. The order inverts the aggregator side: a weaker aggregator admits
//! more submeasures.

use serde::Serialize;

use crate::agg::{agg_extrema, agg_leq, Aggregator, LatticeMode};
use crate::grid::Grid;
use crate::padd::{padd_leq, PseudoAddition};
use crate::psub::{check_axioms, AxiomReport, CheckParams, ProbSubmeasure};
use crate::{Error, Result};

const DESCRIPTOR_LADDER: usize = 64;

/// An intensional description of one submeasure class.
#[derive(Clone, Debug)]
pub struct ThetaDescriptor {
    pub l: PseudoAddition,
    pub a: Aggregator,
    pub label: String,
}

impl ThetaDescriptor {
    pub fn new(l: PseudoAddition, a: Aggregator) -> ThetaDescriptor {
        let label = format!("Theta[{},{}]", l.label(), a.label());
        ThetaDescriptor { l, a, label }
    }
}

/// Sampled class order: `d1 <= d2` iff `L1 <= L2` and `A2 <= A1`.
pub fn theta_leq(d1: &ThetaDescriptor, d2: &ThetaDescriptor, samples: usize) -> Result<bool> {
    Ok(padd_leq(&d1.l, &d2.l, samples)? && agg_leq(&d2.a, &d1.a, DESCRIPTOR_LADDER))
}

/// Join and meet of descriptors sharing a pseudo-addition: the class join
/// takes the aggregator meet and dually.
pub fn theta_lattice(
    d1: &ThetaDescriptor,
    d2: &ThetaDescriptor,
    mode: LatticeMode,
) -> Result<ThetaDescriptor> {
    if d1.l.spec() != d2.l.spec() {
        return Err(Error::input(format!(
            "lattice operations need a shared pseudo-addition, got {} and {}",
            d1.l.label(),
            d2.l.label()
        )));
    }
    let a = match mode {
        LatticeMode::Join => agg_extrema(&d1.a, &d2.a, LatticeMode::Meet),
        LatticeMode::Meet => agg_extrema(&d1.a, &d2.a, LatticeMode::Join),
    };
    Ok(ThetaDescriptor::new(d1.l.clone(), a))
}

/// Paired axiom runs under two comparable descriptors: class order implies
/// class inclusion, so a submeasure passing the smaller class must pass the
/// larger one.
#[derive(Debug, Clone, Serialize)]
pub struct ImplicationReport {
    pub d1: String,
    pub d2: String,
    pub first: AxiomReport,
    pub second: AxiomReport,
    /// False only on the forbidden outcome `pass(d1) && !pass(d2)`.
    pub implication_holds: bool,
}

pub fn membership_implication(
    gamma: &ProbSubmeasure,
    d1: &ThetaDescriptor,
    d2: &ThetaDescriptor,
    grid: &Grid,
    params: &CheckParams,
    samples: usize,
) -> Result<ImplicationReport> {
    if !theta_leq(d1, d2, samples)? {
        return Err(Error::input(format!(
            "membership implication requires {} <= {} in the class order",
            d1.label, d2.label
        )));
    }
    let first = check_axioms(gamma, &d1.l, &d1.a, grid, params)?;
    let second = check_axioms(gamma, &d2.l, &d2.a, grid, params)?;
    let implication_holds = !(first.pass && !second.pass);
    Ok(ImplicationReport {
        d1: d1.label.clone(),
        d2: d2.label.clone(),
        first,
        second,
        implication_holds,
    })
}

/// Down-sets, up-sets and order intervals of descriptors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaRegion {
    Ideal,
    Filter,
    Interval,
}

/// Membership of `d` in the region determined by the anchors: the ideal
/// below `anchor`, the filter above `anchor`, or the order interval between
/// `second_anchor` (below) and `anchor` (above).
pub fn region_membership(
    d: &ThetaDescriptor,
    anchor: &ThetaDescriptor,
    region: ThetaRegion,
    second_anchor: Option<&ThetaDescriptor>,
    samples: usize,
) -> Result<bool> {
    match region {
        ThetaRegion::Ideal => theta_leq(d, anchor, samples),
        ThetaRegion::Filter => theta_leq(anchor, d, samples),
        ThetaRegion::Interval => {
            let lower = second_anchor.ok_or_else(|| {
                Error::input("interval membership needs a second anchor".to_string())
            })?;
            Ok(theta_leq(d, anchor, samples)? && theta_leq(lower, d, samples)?)
        }
    }
}
