//! Bayes network representation.
//!
//! A [`Network`] is a DAG of discrete variables, each carrying one conditional
//! probability table over its parents. Networks are assembled through a
//! [`NetworkBuilder`], which can hold ill-formed drafts so that [`validate`]
//! can report every problem at once; [`NetworkBuilder::build`] only succeeds
//! on a clean report, so a `Network` value always satisfies the model
//! invariants and is immutable from then on.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Rows deviating from 1 by at most this much are renormalized at build time.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Index of a variable inside its network (declaration order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Index of an arc in [`Network::arcs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// The link matrix P(child | parents).
///
/// Rows are laid out in row-major order of `parents`: the first parent varies
/// slowest, the last fastest. Each row is a distribution over the child's
/// states.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    child: VarId,
    parents: Vec<VarId>,
    parent_cards: Vec<usize>,
    card: usize,
    table: Vec<f64>,
}

impl Cpt {
    pub(crate) fn new(
        child: VarId,
        card: usize,
        parents: Vec<VarId>,
        parent_cards: Vec<usize>,
        table: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(parents.len(), parent_cards.len());
        debug_assert_eq!(table.len(), card * parent_cards.iter().product::<usize>());
        Self {
            child,
            parents,
            parent_cards,
            card,
            table,
        }
    }

    pub fn child(&self) -> VarId {
        self.child
    }

    pub fn parents(&self) -> &[VarId] {
        &self.parents
    }

    pub fn parent_cardinalities(&self) -> &[usize] {
        &self.parent_cards
    }

    /// Number of child states.
    pub fn cardinality(&self) -> usize {
        self.card
    }

    pub fn row_count(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.table[row * self.card..(row + 1) * self.card]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.table.chunks(self.card)
    }

    /// Row index of a parent configuration given in `parents` order.
    pub fn row_index(&self, parent_states: &[usize]) -> usize {
        debug_assert_eq!(parent_states.len(), self.parent_cards.len());
        parent_states
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&s, &k)| acc * k + s)
    }

    /// Inverse of [`Cpt::row_index`].
    pub fn configuration(&self, mut row: usize) -> Vec<usize> {
        let mut config = vec![0; self.parent_cards.len()];
        for (slot, &k) in config.iter_mut().zip(&self.parent_cards).rev() {
            *slot = row % k;
            row /= k;
        }
        config
    }

    pub fn probability(&self, child_state: usize, parent_states: &[usize]) -> f64 {
        self.row(self.row_index(parent_states))[child_state]
    }
}

/// A validated, immutable Bayes network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    name: Option<String>,
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    children: Vec<Vec<VarId>>,
    arcs: Vec<(VarId, VarId)>,
    index: HashMap<String, VarId>,
}

impl Network {
    /// Assembles a network from parts that are already known to be valid.
    pub(crate) fn from_parts(name: Option<String>, variables: Vec<Variable>, cpts: Vec<Cpt>) -> Self {
        let mut children = vec![Vec::new(); variables.len()];
        let mut arcs = Vec::new();
        for cpt in &cpts {
            for &p in &cpt.parents {
                children[p.0].push(cpt.child);
                arcs.push((p, cpt.child));
            }
        }
        let index = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), VarId(i)))
            .collect();
        Self {
            name,
            variables,
            cpts,
            children,
            arcs,
            index,
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.variables.len()).map(VarId)
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_name(&self, id: VarId) -> &str {
        &self.variables[id.0].name
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id.0].states.len()
    }

    /// Looks a variable up by name.
    pub fn var(&self, name: &str) -> Result<VarId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn state(&self, id: VarId, label: &str) -> Result<usize> {
        self.variable(id)
            .state_index(label)
            .ok_or_else(|| Error::UnknownState {
                variable: self.var_name(id).to_string(),
                state: label.to_string(),
            })
    }

    pub fn cpt(&self, id: VarId) -> &Cpt {
        &self.cpts[id.0]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.cpts[id.0].parents
    }

    pub fn children(&self, id: VarId) -> &[VarId] {
        &self.children[id.0]
    }

    /// Parents followed by children.
    pub fn neighbors(&self, id: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.parents(id).iter().chain(self.children(id)).copied()
    }

    /// Arcs `(parent, child)`, grouped by child in declaration order.
    pub fn arcs(&self) -> &[(VarId, VarId)] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> (VarId, VarId) {
        self.arcs[id.0]
    }

    pub fn arc_id(&self, parent: VarId, child: VarId) -> Option<ArcId> {
        self.arcs
            .iter()
            .position(|&a| a == (parent, child))
            .map(ArcId)
    }

    pub fn descendants(&self, id: VarId) -> BTreeSet<VarId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<VarId> = self.children(id).to_vec();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend_from_slice(self.children(v));
            }
        }
        seen
    }

    /// Topological order, ties broken by variable name.
    pub fn topological_order(&self) -> Vec<VarId> {
        let mut indegree: Vec<usize> = self.cpts.iter().map(|c| c.parents.len()).collect();
        let mut ready: BTreeSet<(&str, VarId)> = self
            .ids()
            .filter(|v| indegree[v.0] == 0)
            .map(|v| (self.var_name(v), v))
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(entry) = ready.pop_first() {
            let v = entry.1;
            order.push(v);
            for &c in self.children(v) {
                indegree[c.0] -= 1;
                if indegree[c.0] == 0 {
                    ready.insert((self.var_name(c), c));
                }
            }
        }
        order
    }

    /// Number of connected components of the underlying undirected graph.
    pub fn component_count(&self) -> usize {
        let mut sets = DisjointSets::new(self.len());
        for &(p, c) in &self.arcs {
            sets.union(p.0, c.0);
        }
        (0..self.len()).filter(|&i| sets.find(i) == i).count()
    }

    /// True iff the underlying undirected graph has no cycle.
    pub fn is_singly_connected(&self) -> bool {
        is_forest(self.len(), self.arcs.iter().map(|&(p, c)| (p.0, c.0)))
    }

    /// Longest shortest path in the underlying undirected graph, maximized
    /// over connected components.
    pub fn underlying_diameter(&self) -> usize {
        let mut best = 0;
        let mut dist = vec![usize::MAX; self.len()];
        for start in self.ids() {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[start.0] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                best = best.max(dist[v.0]);
                for w in self.neighbors(v) {
                    if dist[w.0] == usize::MAX {
                        dist[w.0] = dist[v.0] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        best
    }

    /// Checks evidence against this network's variables and state ranges.
    pub fn check_evidence(&self, evidence: &Evidence) -> Result<()> {
        for (v, s) in evidence.iter() {
            if v.0 >= self.len() {
                return Err(Error::UnknownVariable(format!("#{}", v.0)));
            }
            if s >= self.cardinality(v) {
                return Err(Error::StateOutOfRange {
                    variable: self.var_name(v).to_string(),
                    index: s,
                    states: self.cardinality(v),
                });
            }
        }
        Ok(())
    }

    /// Product of all local probabilities at a full assignment, indexed by
    /// [`VarId`].
    pub fn joint_probability(&self, assignment: &[usize]) -> Result<f64> {
        if assignment.len() != self.len() {
            return Err(Error::IncompleteAssignment {
                expected: self.len(),
                got: assignment.len(),
            });
        }
        for v in self.ids() {
            if assignment[v.0] >= self.cardinality(v) {
                return Err(Error::StateOutOfRange {
                    variable: self.var_name(v).to_string(),
                    index: assignment[v.0],
                    states: self.cardinality(v),
                });
            }
        }
        Ok(self.joint_unchecked(assignment))
    }

    pub(crate) fn joint_unchecked(&self, assignment: &[usize]) -> f64 {
        let mut config = Vec::new();
        let mut p = 1.0;
        for cpt in &self.cpts {
            config.clear();
            config.extend(cpt.parents.iter().map(|q| assignment[q.0]));
            p *= cpt.probability(assignment[cpt.child.0], &config);
        }
        p
    }

    /// Returns a builder holding the same declarations.
    pub fn to_builder(&self) -> NetworkBuilder {
        let mut b = NetworkBuilder::new();
        if let Some(n) = &self.name {
            b = b.named(n);
        }
        for v in &self.variables {
            b.add_variable(&v.name, &v.states);
        }
        for cpt in &self.cpts {
            let parents: Vec<&str> = cpt.parents.iter().map(|&p| self.var_name(p)).collect();
            b.add_cpt(
                self.var_name(cpt.child),
                &parents,
                cpt.rows().map(<[f64]>::to_vec).collect(),
            );
        }
        b
    }
}

/// True iff the undirected multigraph on `n` nodes has no cycle.
pub(crate) fn is_forest(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> bool {
    let mut sets = DisjointSets::new(n);
    edges.into_iter().all(|(a, b)| sets.union(a, b))
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Observed variables and their state indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    assignments: BTreeMap<VarId, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records an observation, returning the previous one for `var`.
    pub fn observe(&mut self, var: VarId, state: usize) -> Option<usize> {
        self.assignments.insert(var, state)
    }

    pub fn with(mut self, var: VarId, state: usize) -> Self {
        self.observe(var, state);
        self
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.assignments.get(&var).copied()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.assignments.contains_key(&var)
    }

    pub fn remove(&mut self, var: VarId) -> Option<usize> {
        self.assignments.remove(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.assignments.iter().map(|(&v, &s)| (v, s))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Whether a full assignment agrees with every observation.
    pub fn is_consistent_with(&self, assignment: &[usize]) -> bool {
        self.iter().all(|(v, s)| assignment[v.0] == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateVariable,
    TooFewStates,
    DuplicateState,
    MissingCpt,
    DuplicateCpt,
    UnknownVariable,
    DuplicateParent,
    RowCount,
    RowLength,
    InvalidEntry,
    RowSum,
    Cycle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The variable the violation is attached to.
    pub variable: String,
    /// Offending CPT row, when the violation concerns one.
    pub row: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.row {
            Some(r) => write!(f, "{} (row {}): {}", self.variable, r + 1, self.message),
            None => write!(f, "{}: {}", self.variable, self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, variable: &str, row: Option<usize>, message: String) {
        self.violations.push(Violation {
            kind,
            variable: variable.to_string(),
            row,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CptDraft {
    pub(crate) child: String,
    pub(crate) parents: Vec<String>,
    pub(crate) rows: Vec<Vec<f64>>,
}

/// Name-based network draft. May be inconsistent until [`validate`]d.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkBuilder {
    name: Option<String>,
    variables: Vec<(String, Vec<String>)>,
    cpts: Vec<CptDraft>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = Some(name.to_string());
    }

    pub fn add_variable<S: AsRef<str>>(&mut self, name: &str, states: &[S]) -> &mut Self {
        self.variables.push((
            name.to_string(),
            states.iter().map(|s| s.as_ref().to_string()).collect(),
        ));
        self
    }

    /// `rows` are in row-major order of `parents`.
    pub fn add_cpt(&mut self, child: &str, parents: &[&str], rows: Vec<Vec<f64>>) -> &mut Self {
        self.cpts.push(CptDraft {
            child: child.to_string(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
            rows,
        });
        self
    }

    pub fn variable<S: AsRef<str>>(mut self, name: &str, states: &[S]) -> Self {
        self.add_variable(name, states);
        self
    }

    pub fn cpt(mut self, child: &str, parents: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.add_cpt(child, parents, rows);
        self
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Validates, renormalizes rows within [`ROW_SUM_TOLERANCE`], and freezes
    /// the result.
    pub fn build(&self) -> Result<Network> {
        let report = validate(self);
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        let index: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.as_str(), i))
            .collect();
        let variables: Vec<Variable> = self
            .variables
            .iter()
            .map(|(n, s)| Variable {
                name: n.clone(),
                states: s.clone(),
            })
            .collect();
        let mut by_child: Vec<Option<&CptDraft>> = vec![None; variables.len()];
        for d in &self.cpts {
            by_child[index[d.child.as_str()]] = Some(d);
        }
        let cpts = by_child
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let d = d.expect("validated: every variable has a cpt");
                let parents: Vec<VarId> = d.parents.iter().map(|p| VarId(index[p.as_str()])).collect();
                let parent_cards = parents.iter().map(|p| variables[p.0].states.len()).collect();
                let table = d
                    .rows
                    .iter()
                    .flat_map(|row| {
                        let sum: f64 = row.iter().sum();
                        row.iter().map(move |&x| x / sum)
                    })
                    .collect();
                Cpt::new(VarId(i), variables[i].states.len(), parents, parent_cards, table)
            })
            .collect();
        Ok(Network::from_parts(self.name.clone(), variables, cpts))
    }
}

/// Collects every violation of the network invariants. An empty report means
/// [`NetworkBuilder::build`] will succeed.
pub fn validate(draft: &NetworkBuilder) -> ValidationReport {
    use ViolationKind::*;
    let mut report = ValidationReport::default();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, (name, states)) in draft.variables.iter().enumerate() {
        if index.insert(name.as_str(), i).is_some() {
            report.push(DuplicateVariable, name, None, "declared more than once".into());
        }
        if states.len() < 2 {
            report.push(TooFewStates, name, None, format!("needs at least 2 states, has {}", states.len()));
        }
        let mut seen = BTreeSet::new();
        for s in states {
            if !seen.insert(s) {
                report.push(DuplicateState, name, None, format!("state `{s}` declared more than once"));
            }
        }
    }
    let card = |name: &str| index.get(name).map(|&i| draft.variables[i].1.len());

    let mut has_cpt = vec![false; draft.variables.len()];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for d in &draft.cpts {
        let Some(&child) = index.get(d.child.as_str()) else {
            report.push(UnknownVariable, &d.child, None, "cpt for undeclared variable".into());
            continue;
        };
        if std::mem::replace(&mut has_cpt[child], true) {
            report.push(DuplicateCpt, &d.child, None, "more than one cpt".into());
            continue;
        }
        let mut parent_ok = true;
        let mut seen = BTreeSet::new();
        for p in &d.parents {
            match index.get(p.as_str()) {
                Some(&pi) => edges.push((pi, child)),
                None => {
                    parent_ok = false;
                    report.push(UnknownVariable, &d.child, None, format!("unknown parent `{p}`"));
                }
            }
            if !seen.insert(p) {
                report.push(DuplicateParent, &d.child, None, format!("parent `{p}` listed twice"));
            }
        }
        if !parent_ok {
            continue;
        }
        let expected_rows: usize = d.parents.iter().filter_map(|p| card(p)).product();
        let k = draft.variables[child].1.len();
        if d.rows.len() != expected_rows {
            report.push(
                RowCount,
                &d.child,
                None,
                format!("expected {expected_rows} rows, found {}", d.rows.len()),
            );
        }
        for (r, row) in d.rows.iter().enumerate() {
            if row.len() != k {
                report.push(RowLength, &d.child, Some(r), format!("expected {k} entries, found {}", row.len()));
                continue;
            }
            if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                report.push(InvalidEntry, &d.child, Some(r), "entries must be finite and non-negative".into());
                continue;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                report.push(RowSum, &d.child, Some(r), format!("row sum {sum} deviates from 1"));
            }
        }
    }
    for (i, (name, _)) in draft.variables.iter().enumerate() {
        if !has_cpt[i] && index.get(name.as_str()) == Some(&i) {
            report.push(MissingCpt, name, None, "no cpt".into());
        }
    }
    if let Some(cycle) = find_cycle(draft.variables.len(), &edges) {
        let names: Vec<&str> = cycle.iter().map(|&i| draft.variables[i].0.as_str()).collect();
        report.push(Cycle, names[0], None, format!("directed cycle {}", names.join(" -> ")));
    }
    report
}

/// Some directed cycle as a node sequence whose first node is repeated at
/// the end.
fn find_cycle(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for &(a, b) in edges {
        out[a].push(b);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        color[root] = 1;
        stack.push((root, 0));
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = out[v].get(*next) {
                *next += 1;
                match color[w] {
                    0 => {
                        color[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => {
                        let start = stack.iter().position(|&(u, _)| u == w).unwrap();
                        let mut cycle: Vec<usize> = stack[start..].iter().map(|&(u, _)| u).collect();
                        cycle.push(w);
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{chain, two_loops};

    #[test]
    fn single_binary_variable_is_valid() {
        let b = NetworkBuilder::new()
            .variable("A", &["f", "t"])
            .cpt("A", &[], vec![vec![0.3, 0.7]]);
        assert!(validate(&b).is_ok());
    }

    #[test]
    fn two_cycle_is_reported() {
        let b = NetworkBuilder::new()
            .variable("A", &["f", "t"])
            .variable("B", &["f", "t"])
            .cpt("A", &["B"], vec![vec![0.5, 0.5], vec![0.5, 0.5]])
            .cpt("B", &["A"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let report = validate(&b);
        assert!(report.has(ViolationKind::Cycle), "{report}");
        assert!(matches!(b.build(), Err(Error::Invalid(_))));
    }

    #[test]
    fn row_sum_violation_names_row() {
        let b = NetworkBuilder::new()
            .variable("A", &["f", "t"])
            .cpt("A", &[], vec![vec![0.5, 0.6]]);
        let report = validate(&b);
        assert!(report.has(ViolationKind::RowSum));
        assert_eq!(report.violations[0].variable, "A");
        assert_eq!(report.violations[0].row, Some(0));
    }

    #[test]
    fn structural_violations() {
        let b = NetworkBuilder::new()
            .variable("A", &["x"])
            .variable("B", &["f", "f"])
            .variable("B", &["f", "t"])
            .variable("C", &["f", "t"])
            .cpt("A", &[], vec![vec![1.0]])
            .cpt("B", &["Z"], vec![vec![0.5, 0.5]])
            .cpt("D", &[], vec![vec![0.5, 0.5]])
            .cpt("A", &[], vec![vec![1.0]]);
        let report = validate(&b);
        for kind in [
            ViolationKind::TooFewStates,
            ViolationKind::DuplicateState,
            ViolationKind::DuplicateVariable,
            ViolationKind::UnknownVariable,
            ViolationKind::DuplicateCpt,
            ViolationKind::MissingCpt,
        ] {
            assert!(report.has(kind), "missing {kind:?} in\n{report}");
        }
    }

    #[test]
    fn row_shape_violations() {
        let b = NetworkBuilder::new()
            .variable("A", &["f", "t"])
            .variable("B", &["f", "t"])
            .cpt("A", &[], vec![vec![-0.1, 1.1]])
            .cpt("B", &["A", "A"], vec![vec![0.5, 0.5], vec![1.0]]);
        let report = validate(&b);
        assert!(report.has(ViolationKind::InvalidEntry));
        assert!(report.has(ViolationKind::DuplicateParent));
        assert!(report.has(ViolationKind::RowCount));
        assert!(report.has(ViolationKind::RowLength));
    }

    #[test]
    fn small_deviation_is_renormalized() {
        let net = NetworkBuilder::new()
            .variable("A", &["f", "t"])
            .cpt("A", &[], vec![vec![0.3, 0.7000004]])
            .build()
            .unwrap();
        let row = net.cpt(VarId(0)).row(0);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn joint_probability_of_chain() {
        let net = chain();
        assert!((net.joint_probability(&[0, 0]).unwrap() - 0.27).abs() < 1e-15);
        assert!(matches!(
            net.joint_probability(&[0]),
            Err(Error::IncompleteAssignment { .. })
        ));
        assert!(matches!(
            net.joint_probability(&[0, 2]),
            Err(Error::StateOutOfRange { .. })
        ));
    }

    #[test]
    fn deterministic_chain_has_unit_joint() {
        let net = NetworkBuilder::new()
            .variable("A", &["f", "t"])
            .variable("B", &["f", "t"])
            .cpt("A", &[], vec![vec![0.0, 1.0]])
            .cpt("B", &["A"], vec![vec![1.0, 0.0], vec![1.0, 0.0]])
            .build()
            .unwrap();
        assert_eq!(net.joint_probability(&[1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn two_loops_joint_is_six_factor_product() {
        let net = two_loops();
        let id = |n: &str| net.var(n).unwrap();
        let p = |v: &str, s: usize, ps: &[usize]| net.cpt(id(v)).probability(s, ps);
        let mut total = 0.0;
        for bits in 0..64usize {
            let x: Vec<usize> = (0..6).map(|i| (bits >> i) & 1).collect();
            let expected = p("x6", x[5], &[x[4]])
                * p("x5", x[4], &[x[1], x[2]])
                * p("x4", x[3], &[x[0], x[1]])
                * p("x3", x[2], &[x[0]])
                * p("x2", x[1], &[x[0]])
                * p("x1", x[0], &[]);
            let got = net.joint_probability(&x).unwrap();
            assert!((got - expected).abs() <= 1e-15 * expected.max(1e-300));
            total += got;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singly_connected_checks() {
        let chain3 = NetworkBuilder::new()
            .variable("A", &["f", "t"])
            .variable("B", &["f", "t"])
            .variable("C", &["f", "t"])
            .cpt("A", &[], vec![vec![0.5, 0.5]])
            .cpt("B", &["A"], vec![vec![0.5, 0.5]; 2])
            .cpt("C", &["B"], vec![vec![0.5, 0.5]; 2])
            .build()
            .unwrap();
        assert!(chain3.is_singly_connected());
        assert_eq!(chain3.underlying_diameter(), 2);
        assert!(!two_loops().is_singly_connected());

        let diamond = NetworkBuilder::new()
            .variable("A", &["f", "t"])
            .variable("B", &["f", "t"])
            .variable("C", &["f", "t"])
            .variable("D", &["f", "t"])
            .cpt("A", &[], vec![vec![0.5, 0.5]])
            .cpt("B", &["A"], vec![vec![0.5, 0.5]; 2])
            .cpt("C", &["A"], vec![vec![0.5, 0.5]; 2])
            .cpt("D", &["B", "C"], vec![vec![0.5, 0.5]; 4])
            .build()
            .unwrap();
        assert!(!diamond.is_singly_connected());
    }

    #[test]
    fn two_loops_topology() {
        let net = two_loops();
        let id = |n: &str| net.var(n).unwrap();
        assert_eq!(net.parents(id("x5")), &[id("x2"), id("x3")]);
        assert_eq!(net.descendants(id("x5")), BTreeSet::from([id("x6")]));
        assert_eq!(net.children(id("x1")), &[id("x2"), id("x3"), id("x4")]);
        assert_eq!(net.underlying_diameter(), 3);
        assert!(matches!(net.var("x9"), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn path_graph_diameter() {
        for n in 1..8 {
            let mut b = NetworkBuilder::new();
            for i in 0..n {
                let name = format!("v{i}");
                b.add_variable(&name, &["a", "b"]);
                if i == 0 {
                    b.add_cpt(&name, &[], vec![vec![0.5, 0.5]]);
                } else {
                    let parent = format!("v{}", i - 1);
                    b.add_cpt(&name, &[&parent], vec![vec![0.5, 0.5]; 2]);
                }
            }
            assert_eq!(b.build().unwrap().underlying_diameter(), n - 1);
        }
    }

    #[test]
    fn row_index_round_trips() {
        let net = two_loops();
        let cpt = net.cpt(net.var("x4").unwrap());
        for r in 0..cpt.row_count() {
            assert_eq!(cpt.row_index(&cpt.configuration(r)), r);
        }
        assert_eq!(cpt.configuration(2), vec![1, 0]);
    }

    #[test]
    fn topological_order_breaks_ties_by_name() {
        let net = two_loops();
        let names: Vec<&str> = net.topological_order().into_iter().map(|v| net.var_name(v)).collect();
        assert_eq!(names, ["x1", "x2", "x3", "x4", "x5", "x6"]);
    }

    #[test]
    fn builder_round_trip() {
        let net = two_loops();
        assert_eq!(net.to_builder().build().unwrap(), net);
    }
}
