//! Inference on multiply connected networks by conditioning on a loop
//! cutset.
//!
//! Each joint assignment `c` of the cutset gets its own reduced network: the
//! members' outgoing arcs are cut by slicing their children's tables at `c`,
//! and the members themselves become observed. The reduced network is a
//! polytree whose joint with evidence equals `P(x, C = c)`, so one
//! propagation per assignment yields `P(· | D, C = c)` and the exact weight
//! `P(D, C = c)`. Beliefs are mixed only at the very end; mixing the
//! per-assignment messages earlier would count the cutset prior once per
//! path around each loop.

use rayon::prelude::*;

use crate::cutset::{greedy_cutset, Cutset};
use crate::error::{Error, Result};
use crate::model::{Cpt, Evidence, Network, VarId};
use crate::polytree::{BeliefVector, LogLikelihood, PolytreeEngine, PropagationOptions, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningOptions {
    pub propagation: PropagationOptions,
    /// Worker threads for independent runs; 0 or 1 runs them in sequence.
    pub jobs: usize,
    /// Keep each run's propagation trace.
    pub trace: bool,
}

impl Default for ConditioningOptions {
    fn default() -> Self {
        Self {
            propagation: PropagationOptions::default(),
            jobs: 1,
            trace: false,
        }
    }
}

/// A network conditioned on one cutset assignment.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub net: Network,
    pub evidence: Evidence,
    /// Set when the original evidence disagrees with the assignment.
    pub conflict: bool,
}

/// Slices the children of every cutset member at the assigned value and
/// adds the assignment to the evidence. Members keep their own tables, so
/// `P(member = c | parents)` is counted exactly once.
pub fn condition_network(
    net: &Network,
    evidence: &Evidence,
    cutset: &Cutset,
    assignment: &[usize],
) -> Result<Reduction> {
    net.check_evidence(evidence)?;
    if assignment.len() != cutset.len() {
        return Err(Error::IncompleteAssignment {
            expected: cutset.len(),
            got: assignment.len(),
        });
    }
    let mut fixed: Vec<Option<usize>> = vec![None; net.len()];
    for (&v, &s) in cutset.members().iter().zip(assignment) {
        if s >= net.cardinality(v) {
            return Err(Error::StateOutOfRange {
                variable: net.var_name(v).to_string(),
                index: s,
                states: net.cardinality(v),
            });
        }
        fixed[v.0] = Some(s);
    }
    let cpts = net.cpts().iter().map(|cpt| slice_cpt(cpt, &fixed)).collect();
    let reduced = Network::from_parts(net.name().map(str::to_string), net.variables().to_vec(), cpts);

    let mut reduced_evidence = evidence.clone();
    let mut conflict = false;
    for (&v, &s) in cutset.members().iter().zip(assignment) {
        if let Some(prev) = reduced_evidence.observe(v, s) {
            conflict |= prev != s;
        }
    }
    Ok(Reduction {
        net: reduced,
        evidence: reduced_evidence,
        conflict,
    })
}

/// Drops every parent with a fixed value, keeping the matching rows.
fn slice_cpt(cpt: &Cpt, fixed: &[Option<usize>]) -> Cpt {
    let kept: Vec<usize> = (0..cpt.parents().len())
        .filter(|&i| fixed[cpt.parents()[i].0].is_none())
        .collect();
    if kept.len() == cpt.parents().len() {
        return cpt.clone();
    }
    let parents: Vec<VarId> = kept.iter().map(|&i| cpt.parents()[i]).collect();
    let cards: Vec<usize> = kept.iter().map(|&i| cpt.parent_cardinalities()[i]).collect();
    let rows: usize = cards.iter().product();
    let mut table = Vec::with_capacity(rows * cpt.cardinality());
    let mut full: Vec<usize> = cpt
        .parents()
        .iter()
        .map(|p| fixed[p.0].unwrap_or(0))
        .collect();
    for r in 0..rows {
        let mut rest = r;
        for (&i, &k) in kept.iter().zip(&cards).rev() {
            full[i] = rest % k;
            rest /= k;
        }
        table.extend_from_slice(cpt.row(cpt.row_index(&full)));
    }
    Cpt::new(cpt.child(), cpt.cardinality(), parents, cards, table)
}

/// One cutset assignment's propagation.
#[derive(Debug, Clone)]
pub struct ConditionedRun {
    pub assignment: Vec<(VarId, usize)>,
    pub reduction: Reduction,
    /// log P(D, C = c).
    pub log_weight: LogLikelihood,
    /// Normalized mixture weight; zero for impossible runs.
    pub weight: f64,
    /// Beliefs of every variable given D and C = c; `None` when impossible.
    pub beliefs: Option<Vec<BeliefVector>>,
    pub trace: Vec<TraceRecord>,
}

/// Beliefs of the queried variables plus the total evidence likelihood.
#[derive(Debug, Clone)]
pub struct MixedBelief {
    pub beliefs: Vec<(VarId, BeliefVector)>,
    /// log P(D).
    pub log_evidence: f64,
}

impl MixedBelief {
    pub fn get(&self, v: VarId) -> Option<&BeliefVector> {
        self.beliefs.iter().find(|(q, _)| *q == v).map(|(_, b)| b)
    }
}

fn run_one(
    net: &Network,
    evidence: &Evidence,
    cutset: &Cutset,
    assignment: Vec<usize>,
    options: &ConditioningOptions,
) -> Result<ConditionedRun> {
    let reduction = condition_network(net, evidence, cutset, &assignment)?;
    let assignment: Vec<(VarId, usize)> = cutset.members().iter().copied().zip(assignment).collect();
    let mut run = ConditionedRun {
        assignment,
        log_weight: LogLikelihood::Impossible,
        weight: 0.0,
        beliefs: None,
        trace: Vec::new(),
        reduction,
    };
    if run.reduction.conflict {
        return Ok(run);
    }
    let engine = PolytreeEngine::new(&run.reduction.net)?;
    run.log_weight = engine.evidence_log_likelihood(&run.reduction.evidence)?;
    if run.log_weight == LogLikelihood::Impossible {
        return Ok(run);
    }
    let mut trace = Vec::new();
    let fixpoint = if options.trace {
        engine.propagate_traced(&run.reduction.evidence, &options.propagation, &mut |r| {
            trace.push(r.clone())
        })?
    } else {
        engine.propagate(&run.reduction.evidence, &options.propagation)?
    };
    run.beliefs = Some(engine.beliefs(&fixpoint.state)?);
    run.trace = trace;
    Ok(run)
}

/// Exact beliefs by enumerating every assignment of `cutset`.
///
/// Runs may execute on `options.jobs` threads; results are combined in
/// assignment order either way, so the output does not depend on it.
pub fn infer_conditioned(
    net: &Network,
    evidence: &Evidence,
    cutset: &Cutset,
    queries: &[VarId],
    options: &ConditioningOptions,
) -> Result<(MixedBelief, Vec<ConditionedRun>)> {
    if !crate::cutset::is_valid_cutset(net, cutset.members()) {
        return Err(Error::InvalidCutset(cutset.names(net).iter().map(|s| s.to_string()).collect()));
    }
    net.check_evidence(evidence)?;
    let assignments: Vec<Vec<usize>> = cutset.assignments(net).collect();
    let mut runs: Vec<ConditionedRun> = if options.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            assignments
                .into_par_iter()
                .map(|a| run_one(net, evidence, cutset, a, options))
                .collect::<Result<_>>()
        })?
    } else {
        assignments
            .into_iter()
            .map(|a| run_one(net, evidence, cutset, a, options))
            .collect::<Result<_>>()?
    };

    let max_log = runs
        .iter()
        .filter_map(|r| r.log_weight.finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max_log == f64::NEG_INFINITY {
        return Err(Error::ImpossibleEvidence { variable: None });
    }
    let scaled: Vec<f64> = runs
        .iter()
        .map(|r| r.log_weight.finite().map_or(0.0, |l| (l - max_log).exp()))
        .collect();
    let total: f64 = scaled.iter().sum();
    for (run, s) in runs.iter_mut().zip(&scaled) {
        run.weight = s / total;
    }

    let beliefs = queries
        .iter()
        .map(|&q| {
            let mut mixed = vec![0.0; net.cardinality(q)];
            if let Some(pos) = cutset.members().iter().position(|&m| m == q) {
                for run in &runs {
                    mixed[run.assignment[pos].1] += run.weight;
                }
            } else {
                for run in runs.iter().filter(|r| r.weight > 0.0) {
                    let bel = &run.beliefs.as_ref().expect("possible runs carry beliefs")[q.0];
                    for (m, b) in mixed.iter_mut().zip(bel.as_slice()) {
                        *m += run.weight * b;
                    }
                }
            }
            let belief = BeliefVector::from_unnormalized(mixed).ok_or(Error::ImpossibleEvidence {
                variable: Some(net.var_name(q).to_string()),
            })?;
            Ok((q, belief))
        })
        .collect::<Result<_>>()?;
    Ok((
        MixedBelief {
            beliefs,
            log_evidence: max_log + total.ln(),
        },
        runs,
    ))
}

/// Polytree propagation when the network allows it, greedy-cutset
/// conditioning otherwise.
pub fn auto_infer(
    net: &Network,
    evidence: &Evidence,
    queries: &[VarId],
    options: &ConditioningOptions,
) -> Result<MixedBelief> {
    if net.is_singly_connected() {
        let engine = PolytreeEngine::new(net)?;
        let log_evidence = engine
            .evidence_log_likelihood(evidence)?
            .finite()
            .ok_or(Error::ImpossibleEvidence { variable: None })?;
        let fixpoint = engine.propagate(evidence, &options.propagation)?;
        let beliefs = queries
            .iter()
            .map(|&q| Ok((q, engine.fuse_belief(&fixpoint.state, q)?)))
            .collect::<Result<_>>()?;
        Ok(MixedBelief { beliefs, log_evidence })
    } else {
        let cutset = greedy_cutset(net);
        infer_conditioned(net, evidence, &cutset, queries, options).map(|(mixed, _)| mixed)
    }
}

/// The incorrect alternative to per-assignment propagation: average the
/// cutset's outgoing messages by the cutset prior first, then propagate once.
///
/// Each child of a cutset member gets the prior-weighted average of its
/// sliced tables, which is exactly what a single averaged π message from the
/// member would deliver. Around a loop the averaged messages reach the loop's
/// sink along both sides, so the prior is counted twice and the result is
/// generally wrong. Kept to demonstrate that difference.
pub fn premixed_beliefs(
    net: &Network,
    evidence: &Evidence,
    cutset: &Cutset,
    options: &PropagationOptions,
) -> Result<Vec<BeliefVector>> {
    let prior_options = ConditioningOptions {
        propagation: *options,
        ..ConditioningOptions::default()
    };
    let (_, prior_runs) = infer_conditioned(net, &Evidence::new(), cutset, &[], &prior_options)?;
    let mut averaged: Option<Vec<Cpt>> = None;
    for run in &prior_runs {
        let tables = run.reduction.net.cpts();
        match averaged.as_mut() {
            None => {
                averaged = Some(tables.iter().map(|c| scaled_cpt(c, run.weight)).collect());
            }
            Some(acc) => {
                for (a, c) in acc.iter_mut().zip(tables) {
                    *a = add_cpts(a, c, run.weight);
                }
            }
        }
    }
    let mut cpts = averaged.expect("at least one assignment");
    for &m in cutset.members() {
        cpts[m.0] = net.cpt(m).clone();
    }
    let mixed_net = Network::from_parts(net.name().map(str::to_string), net.variables().to_vec(), cpts);
    let engine = PolytreeEngine::new(&mixed_net)?;
    engine.posterior(evidence, options)
}

fn scaled_cpt(cpt: &Cpt, w: f64) -> Cpt {
    let table = cpt.rows().flatten().map(|x| x * w).collect();
    Cpt::new(
        cpt.child(),
        cpt.cardinality(),
        cpt.parents().to_vec(),
        cpt.parent_cardinalities().to_vec(),
        table,
    )
}

fn add_cpts(acc: &Cpt, other: &Cpt, w: f64) -> Cpt {
    let table = acc
        .rows()
        .flatten()
        .zip(other.rows().flatten())
        .map(|(a, b)| a + w * b)
        .collect();
    Cpt::new(
        acc.child(),
        acc.cardinality(),
        acc.parents().to_vec(),
        acc.parent_cardinalities().to_vec(),
        table,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::{oracle_evidence_probability, oracle_marginals};

    fn x(net: &Network, name: &str) -> VarId {
        net.var(name).unwrap()
    }

    fn all(net: &Network) -> Vec<VarId> {
        net.ids().collect()
    }

    #[test]
    fn slicing_two_loops_at_x1() {
        let net = fixtures::two_loops();
        let cut = Cutset::new(&net, vec![x(&net, "x1")]).unwrap();
        let red = condition_network(&net, &Evidence::new(), &cut, &[0]).unwrap();
        assert!(red.net.is_singly_connected());
        assert!(!red.conflict);
        assert_eq!(red.evidence.get(x(&net, "x1")), Some(0));
        for child in ["x2", "x3"] {
            let c = red.net.cpt(x(&net, child));
            assert!(c.parents().is_empty());
            assert_eq!(c.row(0), net.cpt(x(&net, child)).row(0));
        }
        let x4 = red.net.cpt(x(&net, "x4"));
        assert_eq!(x4.parents(), &[x(&net, "x2")]);
        let orig = net.cpt(x(&net, "x4"));
        assert_eq!(x4.row(0), orig.row(orig.row_index(&[0, 0])));
        assert_eq!(x4.row(1), orig.row(orig.row_index(&[0, 1])));
        assert_eq!(red.net.cpt(x(&net, "x1")), net.cpt(x(&net, "x1")));

        let red1 = condition_network(&net, &Evidence::new(), &cut, &[1]).unwrap();
        assert_eq!(red1.net.cpt(x(&net, "x2")).row(0), net.cpt(x(&net, "x2")).row(1));
    }

    #[test]
    fn empty_cutset_is_identity() {
        let net = fixtures::chain();
        let ev = Evidence::new().with(VarId(1), 0);
        let red = condition_network(&net, &ev, &Cutset::empty(), &[]).unwrap();
        assert_eq!(red.net, net);
        assert_eq!(red.evidence, ev);
    }

    #[test]
    fn conflicting_evidence_flags_run() {
        let net = fixtures::two_loops();
        let x1 = x(&net, "x1");
        let cut = Cutset::new(&net, vec![x1]).unwrap();
        let ev = Evidence::new().with(x1, 1);
        assert!(condition_network(&net, &ev, &cut, &[0]).unwrap().conflict);
        assert!(!condition_network(&net, &ev, &cut, &[1]).unwrap().conflict);
        let (mixed, runs) = infer_conditioned(&net, &ev, &cut, &all(&net), &ConditioningOptions::default()).unwrap();
        assert_eq!(runs[0].log_weight, LogLikelihood::Impossible);
        assert_eq!(runs[0].weight, 0.0);
        let oracle = oracle_marginals(&net, &ev).unwrap();
        for (q, b) in &mixed.beliefs {
            assert!(b.max_abs_diff(&oracle[q.0]) < 1e-12);
        }
    }

    #[test]
    fn two_loops_matches_oracle_with_evidence() {
        let net = fixtures::two_loops();
        let ev = Evidence::new().with(x(&net, "x6"), 1);
        let cut = Cutset::new(&net, vec![x(&net, "x1")]).unwrap();
        let (mixed, runs) = infer_conditioned(&net, &ev, &cut, &all(&net), &ConditioningOptions::default()).unwrap();
        assert_eq!(runs.len(), 2);
        let oracle = oracle_marginals(&net, &ev).unwrap();
        for (q, b) in &mixed.beliefs {
            assert!(b.max_abs_diff(&oracle[q.0]) < 1e-12, "{}", net.var_name(*q));
        }
        let pd = oracle_evidence_probability(&net, &ev).unwrap();
        assert!((mixed.log_evidence.exp() - pd).abs() < 1e-12);
        let weight_sum: f64 = runs.iter().map(|r| r.log_weight.probability()).sum();
        assert!((weight_sum - pd).abs() < 1e-12);
    }

    #[test]
    fn no_evidence_weights_equal_root_prior() {
        let net = fixtures::two_loops();
        let x1 = x(&net, "x1");
        let cut = Cutset::new(&net, vec![x1]).unwrap();
        let (_, runs) = infer_conditioned(&net, &Evidence::new(), &cut, &[], &ConditioningOptions::default()).unwrap();
        for (run, &p) in runs.iter().zip(net.cpt(x1).row(0)) {
            assert!((run.weight - p).abs() <= 1e-12);
        }
    }

    #[test]
    fn cutset_queries_come_from_weights() {
        let net = fixtures::two_loops();
        let ev = Evidence::new().with(x(&net, "x6"), 1).with(x(&net, "x4"), 0);
        let x1 = x(&net, "x1");
        let cut = Cutset::new(&net, vec![x1]).unwrap();
        let (mixed, runs) = infer_conditioned(&net, &ev, &cut, &[x1], &ConditioningOptions::default()).unwrap();
        let bel = mixed.get(x1).unwrap();
        assert_eq!(bel[0], runs[0].weight);
        let oracle = oracle_marginals(&net, &ev).unwrap();
        assert!(bel.max_abs_diff(&oracle[x1.0]) < 1e-12);
    }

    #[test]
    fn two_member_cutset_enumerates_four_runs() {
        let net = fixtures::two_loops();
        let cut = Cutset::new(&net, vec![x(&net, "x1"), x(&net, "x3")]).unwrap();
        let ev = Evidence::new().with(x(&net, "x6"), 0);
        let (mixed, runs) = infer_conditioned(&net, &ev, &cut, &all(&net), &ConditioningOptions::default()).unwrap();
        assert_eq!(runs.len(), 4);
        let oracle = oracle_marginals(&net, &ev).unwrap();
        for (q, b) in &mixed.beliefs {
            assert!(b.max_abs_diff(&oracle[q.0]) < 1e-12);
        }
    }

    #[test]
    fn parallel_runs_match_sequential() {
        let net = fixtures::two_loops();
        let ev = Evidence::new().with(x(&net, "x6"), 1);
        let cut = Cutset::new(&net, vec![x(&net, "x1"), x(&net, "x2")]).unwrap();
        let seq = infer_conditioned(&net, &ev, &cut, &all(&net), &ConditioningOptions::default()).unwrap().0;
        let par_opts = ConditioningOptions { jobs: 4, ..ConditioningOptions::default() };
        let par = infer_conditioned(&net, &ev, &cut, &all(&net), &par_opts).unwrap().0;
        assert_eq!(seq.beliefs, par.beliefs);
        assert_eq!(seq.log_evidence, par.log_evidence);
    }

    #[test]
    fn auto_dispatch() {
        let chain = fixtures::chain();
        let ev = Evidence::new().with(VarId(1), 0);
        let mixed = auto_infer(&chain, &ev, &[VarId(0)], &ConditioningOptions::default()).unwrap();
        let engine = PolytreeEngine::new(&chain).unwrap();
        let direct = engine.posterior(&ev, &PropagationOptions::default()).unwrap();
        assert_eq!(mixed.get(VarId(0)).unwrap(), &direct[0]);
        assert!((mixed.log_evidence - 0.41f64.ln()).abs() < 1e-12);

        let net = fixtures::two_loops();
        let ev = Evidence::new().with(x(&net, "x6"), 1);
        let mixed = auto_infer(&net, &ev, &all(&net), &ConditioningOptions::default()).unwrap();
        let oracle = oracle_marginals(&net, &ev).unwrap();
        for (q, b) in &mixed.beliefs {
            assert!(b.max_abs_diff(&oracle[q.0]) < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_cutset() {
        let net = fixtures::two_loops();
        let bad = Cutset::empty();
        assert!(matches!(
            infer_conditioned(&net, &Evidence::new(), &bad, &[], &ConditioningOptions::default()),
            Err(Error::InvalidCutset(_))
        ));
    }

    #[test]
    fn premixing_disagrees_with_oracle() {
        let net = fixtures::two_loops();
        let ev = Evidence::new().with(x(&net, "x6"), 1);
        let cut = Cutset::new(&net, vec![x(&net, "x1")]).unwrap();
        let naive = premixed_beliefs(&net, &ev, &cut, &PropagationOptions::default()).unwrap();
        let oracle = oracle_marginals(&net, &ev).unwrap();
        let worst = net
            .ids()
            .filter(|v| !cut.contains(*v))
            .map(|v| naive[v.0].max_abs_diff(&oracle[v.0]))
            .fold(0.0, f64::max);
        assert!(worst > 1e-3, "premixed error only {worst}");
    }
}
