//! Reference answers by brute-force enumeration of the joint distribution.
//!
//! Everything here goes through [`Network::joint_probability`] and a plain
//! mixed-radix walk over all assignments, summed in a fixed order.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Evidence, Network, VarId};
use crate::polytree::BeliefVector;

/// Largest joint state space the oracle will enumerate.
pub const STATE_SPACE_LIMIT: u128 = 1 << 22;

fn check_size(net: &Network) -> Result<()> {
    let states: u128 = net.ids().map(|v| net.cardinality(v) as u128).product();
    if states > STATE_SPACE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            states,
            limit: STATE_SPACE_LIMIT,
        });
    }
    Ok(())
}

/// Calls `visit(assignment, probability)` for every full assignment that
/// agrees with `evidence`.
fn for_each_consistent(net: &Network, evidence: &Evidence, mut visit: impl FnMut(&[usize], f64)) -> Result<()> {
    check_size(net)?;
    net.check_evidence(evidence)?;
    let cards: Vec<usize> = net.ids().map(|v| net.cardinality(v)).collect();
    let mut assignment = vec![0usize; net.len()];
    for (v, s) in evidence.iter() {
        assignment[v.0] = s;
    }
    let free: Vec<usize> = (0..net.len()).filter(|&i| !evidence.contains(VarId(i))).collect();
    loop {
        visit(&assignment, net.joint_unchecked(&assignment));
        let mut carried = true;
        for &i in free.iter().rev() {
            assignment[i] += 1;
            if assignment[i] < cards[i] {
                carried = false;
                break;
            }
            assignment[i] = 0;
        }
        if carried {
            return Ok(());
        }
    }
}

/// P(evidence).
pub fn oracle_evidence_probability(net: &Network, evidence: &Evidence) -> Result<f64> {
    let mut total = 0.0;
    for_each_consistent(net, evidence, |_, p| total += p)?;
    Ok(total)
}

/// P(q | evidence).
pub fn oracle_marginal(net: &Network, evidence: &Evidence, q: VarId) -> Result<BeliefVector> {
    let mut counts = vec![0.0; net.cardinality(q)];
    for_each_consistent(net, evidence, |x, p| counts[x[q.0]] += p)?;
    BeliefVector::from_unnormalized(counts).ok_or(Error::ImpossibleEvidence { variable: None })
}

/// P(v | evidence) for every variable, in declaration order, from a single
/// enumeration.
pub fn oracle_marginals(net: &Network, evidence: &Evidence) -> Result<Vec<BeliefVector>> {
    let mut counts: Vec<Vec<f64>> = net.ids().map(|v| vec![0.0; net.cardinality(v)]).collect();
    for_each_consistent(net, evidence, |x, p| {
        for (c, &s) in counts.iter_mut().zip(x) {
            c[s] += p;
        }
    })?;
    counts
        .into_iter()
        .map(|c| BeliefVector::from_unnormalized(c).ok_or(Error::ImpossibleEvidence { variable: None }))
        .collect()
}

/// Largest |P(x,y|s) − P(x|s)·P(y|s)| over states and over configurations
/// `s` of `given` with positive probability.
pub fn oracle_dependence(net: &Network, x: VarId, y: VarId, given: &[VarId]) -> Result<f64> {
    let (kx, ky) = (net.cardinality(x), net.cardinality(y));
    let mut tables: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    for_each_consistent(net, &Evidence::new(), |a, p| {
        let key: Vec<usize> = given.iter().map(|g| a[g.0]).collect();
        tables.entry(key).or_insert_with(|| vec![0.0; kx * ky])[a[x.0] * ky + a[y.0]] += p;
    })?;
    let mut worst: f64 = 0.0;
    for joint in tables.values() {
        let mass: f64 = joint.iter().sum();
        if mass <= 0.0 {
            continue;
        }
        let px: Vec<f64> = (0..kx).map(|i| (0..ky).map(|j| joint[i * ky + j]).sum::<f64>() / mass).collect();
        let py: Vec<f64> = (0..ky).map(|j| (0..kx).map(|i| joint[i * ky + j]).sum::<f64>() / mass).collect();
        for i in 0..kx {
            for j in 0..ky {
                worst = worst.max((joint[i * ky + j] / mass - px[i] * py[j]).abs());
            }
        }
    }
    Ok(worst)
}

/// True iff `x` and `y` are independent given every positive-probability
/// configuration of `given`, within `tolerance`.
pub fn oracle_conditional_independence(
    net: &Network,
    x: VarId,
    y: VarId,
    given: &[VarId],
    tolerance: f64,
) -> Result<bool> {
    Ok(oracle_dependence(net, x, y, given)? <= tolerance)
}
