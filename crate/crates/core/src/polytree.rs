//! π/λ message passing on singly connected networks.
//!
//! Every arc `B -> A` carries two vectors over the states of `B`: the causal
//! support `π_A(B)` that `B` sends down, summarizing the evidence on `B`'s
//! side of the arc, and the diagnostic support `λ_A(B)` that `A` sends up,
//! summarizing the evidence on `A`'s side. Each vector is a pure function of
//! the neighbouring vectors and the fixed link matrices. The scheduler keeps
//! recomputing vectors that disagree with their neighbours ("out of kilter")
//! until none do; on a polytree this equilibrium is unique and the fused
//! beliefs at it are the exact posteriors.
//!
//! Observations are applied as an indicator factor on the observed node, and
//! root priors are used directly as the node's causal support. Both vectors
//! are stored normalized; an all-zero vector marks an impossible branch and
//! is kept as is.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ArcId, Cpt, Evidence, Network, VarId};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Normalizes in place; returns false (leaving zeros) when the sum is zero.
fn normalize(v: &mut [f64]) -> bool {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        v.iter_mut().for_each(|x| *x /= sum);
        true
    } else {
        v.iter_mut().for_each(|x| *x = 0.0);
        false
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The π and λ vectors stored on one arc, both over the parent's states.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParameters {
    pub pi: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl LinkParameters {
    /// True when either vector is all zeros.
    pub fn is_impossible(&self) -> bool {
        self.pi.iter().all(|&x| x == 0.0) || self.lambda.iter().all(|&x| x == 0.0)
    }
}

/// All dynamic parameters of a propagation: one [`LinkParameters`] per arc
/// (indexed like [`Network::arcs`]) and the observation on each variable.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    links: Vec<LinkParameters>,
    observed: Vec<Option<usize>>,
    cards: Vec<usize>,
}

impl MessageState {
    pub fn link(&self, arc: ArcId) -> &LinkParameters {
        &self.links[arc.0]
    }

    pub fn link_mut(&mut self, arc: ArcId) -> &mut LinkParameters {
        &mut self.links[arc.0]
    }

    pub fn links(&self) -> &[LinkParameters] {
        &self.links
    }

    pub fn observation(&self, var: VarId) -> Option<usize> {
        self.observed[var.0]
    }

    /// The indicator λ of an observed variable, `None` if unobserved.
    pub fn evidence_factor(&self, var: VarId) -> Option<Vec<f64>> {
        self.observed[var.0].map(|s| {
            let mut v = vec![0.0; self.cards[var.0]];
            v[s] = 1.0;
            v
        })
    }

    fn message(&self, id: MessageId) -> &[f64] {
        match id.direction {
            Direction::Pi => &self.links[id.arc.0].pi,
            Direction::Lambda => &self.links[id.arc.0].lambda,
        }
    }

    fn message_mut(&mut self, id: MessageId) -> &mut Vec<f64> {
        match id.direction {
            Direction::Pi => &mut self.links[id.arc.0].pi,
            Direction::Lambda => &mut self.links[id.arc.0].lambda,
        }
    }
}

/// A posterior distribution over one variable's states.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefVector(Vec<f64>);

impl BeliefVector {
    /// Normalizes `values`; `None` when they sum to zero.
    pub fn from_unnormalized(mut values: Vec<f64>) -> Option<Self> {
        normalize(&mut values).then_some(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &BeliefVector) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

impl std::ops::Index<usize> for BeliefVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Parent to child.
    Pi,
    /// Child to parent.
    Lambda,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Pi => "pi",
            Direction::Lambda => "lambda",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct MessageId {
    arc: ArcId,
    direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Every sweep recomputes all messages from the previous sweep's state.
    Synchronous,
    /// Relax one randomly chosen out-of-kilter message at a time.
    FairRandom { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub schedule: Schedule,
    /// Max-norm change below which a message counts as in kilter.
    pub tolerance: f64,
    /// Synchronous sweeps allowed before giving up; fair-random schedules get
    /// this many relaxations per message.
    pub max_sweeps: usize,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            schedule: Schedule::Synchronous,
            tolerance: DEFAULT_TOLERANCE,
            max_sweeps: 1000,
        }
    }
}

impl PropagationOptions {
    pub fn fair_random(seed: u64) -> Self {
        Self {
            schedule: Schedule::FairRandom { seed },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConvergenceStats {
    /// Synchronous: sweeps including the final quiet one. Fair-random:
    /// relaxation steps plus the final check.
    pub sweeps: usize,
    /// Messages actually changed.
    pub updates: usize,
}

/// One applied message update.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub sweep: usize,
    pub parent: VarId,
    pub child: VarId,
    pub direction: Direction,
    pub old: Vec<f64>,
    pub new: Vec<f64>,
}

impl TraceRecord {
    pub fn display<'a>(&'a self, net: &'a Network) -> TraceDisplay<'a> {
        TraceDisplay { record: self, net }
    }
}

pub struct TraceDisplay<'a> {
    record: &'a TraceRecord,
    net: &'a Network,
}

impl fmt::Display for TraceDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.record;
        let vec = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ");
        let (p, c) = (self.net.var_name(r.parent), self.net.var_name(r.child));
        let arrow = match r.direction {
            Direction::Pi => format!("{p} -> {c}"),
            Direction::Lambda => format!("{c} -> {p}"),
        };
        write!(
            f,
            "sweep {} {} {}: [{}] => [{}]",
            r.sweep,
            r.direction,
            arrow,
            vec(&r.old),
            vec(&r.new)
        )
    }
}

/// Equilibrium message state plus how it was reached.
#[derive(Debug, Clone)]
pub struct Fixpoint {
    pub state: MessageState,
    pub stats: ConvergenceStats,
}

/// Log of the evidence probability, or the distinguished zero-mass outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogLikelihood {
    Finite(f64),
    Impossible,
}

impl LogLikelihood {
    pub fn finite(self) -> Option<f64> {
        match self {
            LogLikelihood::Finite(x) => Some(x),
            LogLikelihood::Impossible => None,
        }
    }

    pub fn probability(self) -> f64 {
        self.finite().map_or(0.0, f64::exp)
    }
}

/// Σ_u P(a | u) · Π_p msgs[p][u_p] over parent configurations `u`.
fn causal_kernel(cpt: &Cpt, parent_msgs: &[&[f64]]) -> Vec<f64> {
    let k = cpt.cardinality();
    let mut out = vec![0.0; k];
    let cards = cpt.parent_cardinalities();
    let mut config = vec![0usize; cards.len()];
    for row in cpt.rows() {
        let weight: f64 = config.iter().zip(parent_msgs).map(|(&s, m)| m[s]).product();
        if weight != 0.0 {
            for (o, &p) in out.iter_mut().zip(row) {
                *o += weight * p;
            }
        }
        advance(&mut config, cards);
    }
    out
}

/// Σ_w Π_{s≠skip} msgs[s][w_s] · Σ_k diag[k] P(k | b, w), indexed by the
/// state `b` of the parent at position `skip`.
fn diagnostic_kernel(cpt: &Cpt, parent_msgs: &[&[f64]], skip: usize, diag: &[f64]) -> Vec<f64> {
    let cards = cpt.parent_cardinalities();
    let mut out = vec![0.0; cards[skip]];
    let mut config = vec![0usize; cards.len()];
    for row in cpt.rows() {
        let weight: f64 = config
            .iter()
            .zip(parent_msgs)
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, (&s, m))| m[s])
            .product();
        if weight != 0.0 {
            let likelihood: f64 = row.iter().zip(diag).map(|(p, l)| p * l).sum();
            out[config[skip]] += weight * likelihood;
        }
        advance(&mut config, cards);
    }
    out
}

/// Row-major odometer step (last position fastest).
fn advance(config: &mut [usize], cards: &[usize]) {
    for (s, &k) in config.iter_mut().zip(cards).rev() {
        *s += 1;
        if *s < k {
            return;
        }
        *s = 0;
    }
}

/// A message scaled to max entry 1, with the log of the removed factor.
struct Scaled {
    values: Vec<f64>,
    log_scale: f64,
}

impl Scaled {
    fn new(mut values: Vec<f64>, log_scale: f64) -> Option<Self> {
        let max = values.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return None;
        }
        values.iter_mut().for_each(|x| *x /= max);
        Some(Self {
            values,
            log_scale: log_scale + max.ln(),
        })
    }
}

/// Message-passing engine bound to one singly connected network.
#[derive(Debug, Clone)]
pub struct PolytreeEngine<'n> {
    net: &'n Network,
    /// Incoming arcs per variable, in CPT parent order.
    parent_arcs: Vec<Vec<ArcId>>,
    /// Outgoing arcs per variable.
    child_arcs: Vec<Vec<ArcId>>,
    /// Fixed sweep order: arcs by topological rank of parent, then child.
    order: Vec<ArcId>,
}

impl<'n> PolytreeEngine<'n> {
    pub fn new(net: &'n Network) -> Result<Self> {
        if !net.is_singly_connected() {
            return Err(Error::NotSinglyConnected);
        }
        let mut parent_arcs = vec![Vec::new(); net.len()];
        let mut child_arcs = vec![Vec::new(); net.len()];
        for (i, &(p, c)) in net.arcs().iter().enumerate() {
            parent_arcs[c.0].push(ArcId(i));
            child_arcs[p.0].push(ArcId(i));
        }
        let mut rank = vec![0; net.len()];
        for (r, v) in net.topological_order().into_iter().enumerate() {
            rank[v.0] = r;
        }
        let mut order: Vec<ArcId> = (0..net.arcs().len()).map(ArcId).collect();
        order.sort_by_key(|&a| {
            let (p, c) = net.arc(a);
            (rank[p.0], rank[c.0])
        });
        Ok(Self {
            net,
            parent_arcs,
            child_arcs,
            order,
        })
    }

    pub fn network(&self) -> &'n Network {
        self.net
    }

    fn arc(&self, parent: VarId, child: VarId) -> Result<ArcId> {
        self.net.arc_id(parent, child).ok_or_else(|| Error::NoSuchArc {
            parent: self.net.var_name(parent).to_string(),
            child: self.net.var_name(child).to_string(),
        })
    }

    /// Uniform π and λ on every arc, evidence recorded as indicator factors.
    pub fn init_messages(&self, evidence: &Evidence) -> Result<MessageState> {
        self.net.check_evidence(evidence)?;
        let cards: Vec<usize> = self.net.ids().map(|v| self.net.cardinality(v)).collect();
        let links = self
            .net
            .arcs()
            .iter()
            .map(|&(p, _)| {
                let k = cards[p.0];
                LinkParameters {
                    pi: vec![1.0 / k as f64; k],
                    lambda: vec![1.0 / k as f64; k],
                }
            })
            .collect();
        let mut observed = vec![None; self.net.len()];
        for (v, s) in evidence.iter() {
            observed[v.0] = Some(s);
        }
        Ok(MessageState { links, observed, cards })
    }

    /// Π(a): the link matrix contracted with the incoming π vectors; the
    /// prior for a root.
    pub fn total_causal_support(&self, state: &MessageState, a: VarId) -> Vec<f64> {
        let msgs: Vec<&[f64]> = self.parent_arcs[a.0]
            .iter()
            .map(|&arc| state.links[arc.0].pi.as_slice())
            .collect();
        causal_kernel(self.net.cpt(a), &msgs)
    }

    /// Λ(a): evidence indicator times every incoming λ from the children.
    /// All ones for an unobserved leaf.
    pub fn total_diagnostic_support(&self, state: &MessageState, a: VarId) -> Vec<f64> {
        self.diagnostic_except(state, a, None)
    }

    fn diagnostic_except(&self, state: &MessageState, a: VarId, skip: Option<ArcId>) -> Vec<f64> {
        let mut out = match state.observed[a.0] {
            Some(s) => {
                let mut v = vec![0.0; state.cards[a.0]];
                v[s] = 1.0;
                v
            }
            None => vec![1.0; state.cards[a.0]],
        };
        for &arc in &self.child_arcs[a.0] {
            if Some(arc) != skip {
                for (o, l) in out.iter_mut().zip(&state.links[arc.0].lambda) {
                    *o *= l;
                }
            }
        }
        out
    }

    /// BEL(a) ∝ Λ(a)·Π(a).
    pub fn fuse_belief(&self, state: &MessageState, a: VarId) -> Result<BeliefVector> {
        let mut belief = self.total_causal_support(state, a);
        for (b, l) in belief.iter_mut().zip(self.total_diagnostic_support(state, a)) {
            *b *= l;
        }
        BeliefVector::from_unnormalized(belief).ok_or_else(|| Error::ImpossibleEvidence {
            variable: Some(self.net.var_name(a).to_string()),
        })
    }

    /// BEL of the arc's parent from that arc's own π and λ.
    pub fn link_belief(&self, state: &MessageState, arc: ArcId) -> Result<BeliefVector> {
        let link = &state.links[arc.0];
        let product = link.pi.iter().zip(&link.lambda).map(|(p, l)| p * l).collect();
        BeliefVector::from_unnormalized(product).ok_or_else(|| Error::ImpossibleEvidence {
            variable: Some(self.net.var_name(self.net.arc(arc).0).to_string()),
        })
    }

    /// New λ_a(b): what `a` tells its parent `b`. Reads the π vectors of
    /// `a`'s other parents and Λ(a), never π_a(b) itself. All zeros when the
    /// evidence below is impossible.
    pub fn update_lambda_to_parent(&self, state: &MessageState, a: VarId, b: VarId) -> Result<Vec<f64>> {
        let arc = self.arc(b, a)?;
        Ok(self.lambda_message(state, arc))
    }

    /// New π_x(a): what `a` tells its child `x`. Reads Π(a), the evidence on
    /// `a` and the λ vectors of `a`'s other children, never λ_x(a) itself.
    pub fn update_pi_to_child(&self, state: &MessageState, a: VarId, x: VarId) -> Result<Vec<f64>> {
        let arc = self.arc(a, x)?;
        Ok(self.pi_message(state, arc))
    }

    fn lambda_message(&self, state: &MessageState, arc: ArcId) -> Vec<f64> {
        let a = self.net.arc(arc).1;
        let parents = &self.parent_arcs[a.0];
        let skip = parents.iter().position(|&x| x == arc).expect("arc enters its child");
        let msgs: Vec<&[f64]> = parents.iter().map(|&x| state.links[x.0].pi.as_slice()).collect();
        let diag = self.total_diagnostic_support(state, a);
        let mut out = diagnostic_kernel(self.net.cpt(a), &msgs, skip, &diag);
        normalize(&mut out);
        out
    }

    fn pi_message(&self, state: &MessageState, arc: ArcId) -> Vec<f64> {
        let a = self.net.arc(arc).0;
        let mut out = self.diagnostic_except(state, a, Some(arc));
        for (o, c) in out.iter_mut().zip(self.total_causal_support(state, a)) {
            *o *= c;
        }
        normalize(&mut out);
        out
    }

    fn recompute(&self, state: &MessageState, id: MessageId) -> Vec<f64> {
        match id.direction {
            Direction::Pi => self.pi_message(state, id.arc),
            Direction::Lambda => self.lambda_message(state, id.arc),
        }
    }

    fn messages(&self) -> impl Iterator<Item = MessageId> + '_ {
        self.order.iter().flat_map(|&arc| {
            [Direction::Pi, Direction::Lambda]
                .into_iter()
                .map(move |direction| MessageId { arc, direction })
        })
    }

    /// Drives the messages to equilibrium and checks that the evidence is
    /// possible.
    pub fn propagate(&self, evidence: &Evidence, options: &PropagationOptions) -> Result<Fixpoint> {
        self.propagate_traced(evidence, options, &mut |_| {})
    }

    /// Like [`propagate`](Self::propagate), reporting every applied update.
    pub fn propagate_traced(
        &self,
        evidence: &Evidence,
        options: &PropagationOptions,
        sink: &mut dyn FnMut(&TraceRecord),
    ) -> Result<Fixpoint> {
        if options.tolerance.is_nan() || options.tolerance <= 0.0 {
            return Err(Error::InvalidTolerance(options.tolerance));
        }
        let mut state = self.init_messages(evidence)?;
        let stats = match options.schedule {
            Schedule::Synchronous => self.run_synchronous(&mut state, options, sink)?,
            Schedule::FairRandom { seed } => self.run_fair_random(&mut state, options, seed, sink)?,
        };
        for v in self.net.ids() {
            self.fuse_belief(&state, v)?;
        }
        Ok(Fixpoint { state, stats })
    }

    fn apply(
        &self,
        state: &mut MessageState,
        id: MessageId,
        new: Vec<f64>,
        sweep: usize,
        sink: &mut dyn FnMut(&TraceRecord),
    ) {
        let old = std::mem::replace(state.message_mut(id), new);
        let (parent, child) = self.net.arc(id.arc);
        sink(&TraceRecord {
            sweep,
            parent,
            child,
            direction: id.direction,
            old,
            new: state.message(id).to_vec(),
        });
    }

    fn run_synchronous(
        &self,
        state: &mut MessageState,
        options: &PropagationOptions,
        sink: &mut dyn FnMut(&TraceRecord),
    ) -> Result<ConvergenceStats> {
        let mut stats = ConvergenceStats::default();
        for sweep in 1..=options.max_sweeps {
            let changed: Vec<(MessageId, Vec<f64>)> = self
                .messages()
                .filter_map(|id| {
                    let new = self.recompute(state, id);
                    (max_abs_diff(&new, state.message(id)) > options.tolerance).then_some((id, new))
                })
                .collect();
            stats.sweeps = sweep;
            if changed.is_empty() {
                return Ok(stats);
            }
            stats.updates += changed.len();
            for (id, new) in changed {
                self.apply(state, id, new, sweep, sink);
            }
        }
        Err(Error::NonConvergence {
            steps: options.max_sweeps,
        })
    }

    fn run_fair_random(
        &self,
        state: &mut MessageState,
        options: &PropagationOptions,
        seed: u64,
        sink: &mut dyn FnMut(&TraceRecord),
    ) -> Result<ConvergenceStats> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let all: Vec<MessageId> = self.messages().collect();
        let limit = options.max_sweeps.saturating_mul(all.len().max(1));
        let mut stats = ConvergenceStats::default();
        for step in 1..=limit {
            stats.sweeps = step;
            let out_of_kilter: Vec<(MessageId, Vec<f64>)> = all
                .iter()
                .filter_map(|&id| {
                    let new = self.recompute(state, id);
                    (max_abs_diff(&new, state.message(id)) > options.tolerance).then_some((id, new))
                })
                .collect();
            let Some((id, new)) = out_of_kilter.choose(&mut rng).cloned() else {
                return Ok(stats);
            };
            stats.updates += 1;
            self.apply(state, id, new, step, sink);
        }
        Err(Error::NonConvergence { steps: limit })
    }

    /// True when every stored message equals its recomputed value within
    /// `tolerance`.
    pub fn is_equilibrium(&self, state: &MessageState, tolerance: f64) -> bool {
        self.messages()
            .all(|id| max_abs_diff(&self.recompute(state, id), state.message(id)) <= tolerance)
    }

    /// Beliefs of all variables, in declaration order.
    pub fn beliefs(&self, state: &MessageState) -> Result<Vec<BeliefVector>> {
        self.net.ids().map(|v| self.fuse_belief(state, v)).collect()
    }

    /// Propagates with `options` and returns every variable's belief.
    pub fn posterior(&self, evidence: &Evidence, options: &PropagationOptions) -> Result<Vec<BeliefVector>> {
        let fixpoint = self.propagate(evidence, options)?;
        self.beliefs(&fixpoint.state)
    }

    /// log P(evidence), pivoting each connected component on its first
    /// variable.
    pub fn evidence_log_likelihood(&self, evidence: &Evidence) -> Result<LogLikelihood> {
        self.likelihood_with_pivots(evidence, None)
    }

    /// As [`evidence_log_likelihood`](Self::evidence_log_likelihood), with
    /// `pivot` as the root of its own component.
    pub fn evidence_log_likelihood_from(&self, evidence: &Evidence, pivot: VarId) -> Result<LogLikelihood> {
        self.likelihood_with_pivots(evidence, Some(pivot))
    }

    fn likelihood_with_pivots(&self, evidence: &Evidence, pivot: Option<VarId>) -> Result<LogLikelihood> {
        let state = self.init_messages(evidence)?;
        let mut covered = vec![false; self.net.len()];
        let mut total = 0.0;
        let pivots = pivot.into_iter().chain(self.net.ids());
        for p in pivots {
            if covered[p.0] {
                continue;
            }
            self.mark_component(p, &mut covered);
            match self.component_mass(&state, p) {
                Some(log) => total += log,
                None => return Ok(LogLikelihood::Impossible),
            }
        }
        Ok(LogLikelihood::Finite(total))
    }

    fn mark_component(&self, start: VarId, covered: &mut [bool]) {
        let mut stack = vec![start];
        covered[start.0] = true;
        while let Some(v) = stack.pop() {
            for w in self.net.neighbors(v) {
                if !covered[w.0] {
                    covered[w.0] = true;
                    stack.push(w);
                }
            }
        }
    }

    /// log Σ_i Π̃(pivot)_i·Λ̃(pivot)_i with unnormalized messages pulled
    /// toward the pivot.
    fn component_mass(&self, state: &MessageState, pivot: VarId) -> Option<f64> {
        let causal = self.mass_causal(state, pivot)?;
        let diag = self.mass_diagnostic(state, pivot, None)?;
        let sum: f64 = causal.values.iter().zip(&diag.values).map(|(c, d)| c * d).sum();
        (sum > 0.0).then(|| sum.ln() + causal.log_scale + diag.log_scale)
    }

    /// Π̃(a) = P(a, evidence above a), scaled.
    fn mass_causal(&self, state: &MessageState, a: VarId) -> Option<Scaled> {
        let mut log_scale = 0.0;
        let mut msgs = Vec::with_capacity(self.parent_arcs[a.0].len());
        for &arc in &self.parent_arcs[a.0] {
            let m = self.mass_pi(state, arc)?;
            log_scale += m.log_scale;
            msgs.push(m.values);
        }
        let refs: Vec<&[f64]> = msgs.iter().map(Vec::as_slice).collect();
        Scaled::new(causal_kernel(self.net.cpt(a), &refs), log_scale)
    }

    /// Λ̃(a) = P(evidence below a | a), optionally excluding one child arc.
    fn mass_diagnostic(&self, state: &MessageState, a: VarId, skip: Option<ArcId>) -> Option<Scaled> {
        let mut values = match state.observed[a.0] {
            Some(s) => {
                let mut v = vec![0.0; state.cards[a.0]];
                v[s] = 1.0;
                v
            }
            None => vec![1.0; state.cards[a.0]],
        };
        let mut log_scale = 0.0;
        for &arc in &self.child_arcs[a.0] {
            if Some(arc) == skip {
                continue;
            }
            let m = self.mass_lambda(state, arc)?;
            log_scale += m.log_scale;
            values.iter_mut().zip(&m.values).for_each(|(v, l)| *v *= l);
        }
        Scaled::new(values, log_scale)
    }

    /// π̃ on `arc`: P(parent, evidence on the parent's side).
    fn mass_pi(&self, state: &MessageState, arc: ArcId) -> Option<Scaled> {
        let a = self.net.arc(arc).0;
        let causal = self.mass_causal(state, a)?;
        let diag = self.mass_diagnostic(state, a, Some(arc))?;
        let values = causal.values.iter().zip(&diag.values).map(|(c, d)| c * d).collect();
        Scaled::new(values, causal.log_scale + diag.log_scale)
    }

    /// λ̃ on `arc`: P(evidence on the child's side | parent).
    fn mass_lambda(&self, state: &MessageState, arc: ArcId) -> Option<Scaled> {
        let a = self.net.arc(arc).1;
        let parents = &self.parent_arcs[a.0];
        let mut log_scale = 0.0;
        let mut msgs: Vec<Vec<f64>> = Vec::with_capacity(parents.len());
        for &other in parents {
            if other == arc {
                msgs.push(Vec::new());
                continue;
            }
            let m = self.mass_pi(state, other)?;
            log_scale += m.log_scale;
            msgs.push(m.values);
        }
        let skip = parents.iter().position(|&x| x == arc).unwrap();
        let diag = self.mass_diagnostic(state, a, None)?;
        let refs: Vec<&[f64]> = msgs.iter().map(Vec::as_slice).collect();
        let values = diagnostic_kernel(self.net.cpt(a), &refs, skip, &diag.values);
        Scaled::new(values, log_scale + diag.log_scale)
    }
}
