//! Pattern-matching automata: construction, validity checks, the dual
//! automaton and a deterministic fuel-bounded interpreter.
//!
//! An automaton `(Q, q_init, q_final, R)` rewrites a whole ground term at
//! every step: a rule `(q, lhs) -> (rhs, q')` fires on configuration `(q, t)`
//! when `lhs` matches `t`, producing `(q', σ(rhs))`. Orthogonal automata are
//! deterministic; biorthogonal ones (the automaton and its dual are both
//! orthogonal) can be run backwards step by step through [`dual`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::terms::{unifiable_apart, Head, Term, TermParseError};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub source: StateId,
    pub lhs: Term,
    pub rhs: Term,
    pub target: StateId,
}

impl Rule {
    pub fn new(source: StateId, lhs: Term, rhs: Term, target: StateId) -> Self {
        Rule {
            source,
            lhs,
            rhs,
            target,
        }
    }

    /// The rule read backwards.
    pub fn reversed(&self) -> Rule {
        Rule {
            source: self.target,
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            target: self.source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("rule {rule} refers to unknown state {state}")]
    UnknownState { rule: usize, state: u32 },
    #[error("initial or final state {0} out of range")]
    BadEndpoint(u32),
    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid label `{0}`")]
    BadLabel(String),
}

/// Returns true for strings usable as state labels and automaton names.
pub fn is_label(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'' | '-'))
}

/// An immutable pattern-matching automaton.
///
/// Rule variables are renamed on construction so that no variable is shared
/// between two rules. Rule order is kept but carries no meaning.
pub struct Automaton {
    name: String,
    states: Vec<String>,
    initial: StateId,
    final_state: StateId,
    rules: Vec<Rule>,
    machine: OnceLock<Machine>,
}

impl Clone for Automaton {
    fn clone(&self) -> Self {
        Automaton {
            name: self.name.clone(),
            states: self.states.clone(),
            initial: self.initial,
            final_state: self.final_state,
            rules: self.rules.clone(),
            machine: OnceLock::new(),
        }
    }
}

impl PartialEq for Automaton {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.states == other.states
            && self.initial == other.initial
            && self.final_state == other.final_state
            && self.rules == other.rules
    }
}

impl Eq for Automaton {}

impl fmt::Debug for Automaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn canonical_var(rule: usize, k: usize) -> Arc<str> {
    const LETTERS: [&str; 6] = ["x", "y", "z", "w", "u", "v"];
    match LETTERS.get(k) {
        Some(letter) => Arc::from(format!("{letter}{rule}")),
        None => Arc::from(format!("v{rule}_{k}")),
    }
}

fn canonicalize(index: usize, rule: &Rule) -> Rule {
    let mut names: HashMap<Arc<str>, Arc<str>> = HashMap::new();
    let mut rename = |v: &Arc<str>| {
        let k = names.len();
        names.entry(v.clone()).or_insert_with(|| canonical_var(index, k)).clone()
    };
    let lhs = rule.lhs.rename(&mut rename);
    let rhs = rule.rhs.rename(&mut rename);
    Rule {
        source: rule.source,
        lhs,
        rhs,
        target: rule.target,
    }
}

impl Automaton {
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        initial: StateId,
        final_state: StateId,
        rules: Vec<Rule>,
    ) -> Result<Automaton, AutomatonError> {
        let name = name.into();
        if !is_label(&name) {
            return Err(AutomatonError::BadLabel(name));
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !is_label(s) {
                return Err(AutomatonError::BadLabel(s.clone()));
            }
            if !seen.insert(s.as_str()) {
                return Err(AutomatonError::DuplicateLabel(s.clone()));
            }
        }
        let n = states.len() as u32;
        for endpoint in [initial, final_state] {
            if endpoint.0 >= n {
                return Err(AutomatonError::BadEndpoint(endpoint.0));
            }
        }
        for (i, rule) in rules.iter().enumerate() {
            for s in [rule.source, rule.target] {
                if s.0 >= n {
                    return Err(AutomatonError::UnknownState { rule: i, state: s.0 });
                }
            }
        }
        let rules = rules.iter().enumerate().map(|(i, r)| canonicalize(i, r)).collect();
        Ok(Automaton {
            name,
            states,
            initial,
            final_state,
            rules,
            machine: OnceLock::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn final_state(&self) -> StateId {
        self.final_state
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn labels(&self) -> &[String] {
        &self.states
    }

    pub fn label(&self, s: StateId) -> &str {
        &self.states[s.index()]
    }

    pub fn state_by_label(&self, label: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == label).map(|i| StateId(i as u32))
    }

    /// States other than the initial and final one.
    pub fn internal_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(move |&s| s != self.initial && s != self.final_state)
    }

    /// Same automaton under a different name.
    pub fn renamed(&self, name: &str) -> Result<Automaton, AutomatonError> {
        Automaton::new(
            name,
            self.states.clone(),
            self.initial,
            self.final_state,
            self.rules.clone(),
        )
    }

    fn machine(&self) -> &Machine {
        self.machine.get_or_init(|| Machine::new(self))
    }

    /// Structural diagnostics; empty iff every automaton invariant holds.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.initial == self.final_state {
            out.push(Violation::InitialIsFinal);
        }
        let mut owner: HashMap<Arc<str>, usize> = HashMap::new();
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.source == self.final_state {
                out.push(Violation::OutgoingFromFinal { rule: i });
            }
            if rule.target == self.initial {
                out.push(Violation::IncomingToInitial { rule: i });
            }
            let lhs_vars = rule.lhs.vars();
            for v in rule.rhs.vars() {
                if !lhs_vars.contains(&v) {
                    out.push(Violation::RhsVariableNotInLhs {
                        rule: i,
                        var: v.to_string(),
                    });
                }
            }
            for v in lhs_vars.into_iter().chain(rule.rhs.vars()) {
                match owner.get(&v) {
                    Some(&j) if j != i => out.push(Violation::SharedVariable {
                        var: v.to_string(),
                        rules: (j, i),
                    }),
                    Some(_) => {}
                    None => {
                        owner.insert(v, i);
                    }
                }
            }
        }
        out
    }

    /// Non-ambiguity and left-linearity diagnostics.
    pub fn orthogonality(&self) -> OrthogonalityReport {
        let mut report = OrthogonalityReport::default();
        let mut by_state: HashMap<StateId, Vec<usize>> = HashMap::new();
        for (i, rule) in self.rules.iter().enumerate() {
            if !rule.lhs.is_linear() {
                report.nonlinear.push(i);
            }
            by_state.entry(rule.source).or_default().push(i);
        }
        let mut groups: Vec<_> = by_state.into_values().collect();
        groups.sort();
        for group in groups {
            for (a, &i) in group.iter().enumerate() {
                for &j in &group[a + 1..] {
                    let (li, lj) = (&self.rules[i].lhs, &self.rules[j].lhs);
                    let clash = li.head() != lj.head() && !li.is_var() && !lj.is_var();
                    if !clash && unifiable_apart(li, lj) {
                        report.overlaps.push((i, j));
                    }
                }
            }
        }
        report.overlaps.sort();
        report
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonality().is_orthogonal()
    }

    pub fn biorthogonality(&self) -> BiorthogonalityReport {
        BiorthogonalityReport {
            forward: self.orthogonality(),
            backward: dual(self).orthogonality(),
        }
    }

    pub fn is_biorthogonal(&self) -> bool {
        self.biorthogonality().is_biorthogonal()
    }

    /// One transition from `c`, with the index of the rule that fired.
    pub fn step(&self, c: &Configuration) -> Result<Option<(Configuration, usize)>, AmbiguousStep> {
        Ok(self
            .machine()
            .step(c.state, &c.term)?
            .map(|(rule, state, term)| (Configuration { state, term }, rule)))
    }

    /// Runs from the initial state, recording every configuration.
    pub fn run(&self, input: &Term, fuel: u64) -> Result<RunOutcome, AmbiguousStep> {
        let machine = self.machine();
        let mut trace = Trace {
            configs: vec![Configuration {
                state: self.initial,
                term: input.clone(),
            }],
            rules: Vec::new(),
        };
        let mut steps = 0u64;
        loop {
            let current = trace.configs.last().expect("non-empty trace");
            if current.state == self.final_state {
                let output = current.term.clone();
                return Ok(RunOutcome::Success { output, trace });
            }
            if steps == fuel {
                return Ok(RunOutcome::OutOfFuel { trace });
            }
            match machine.step(current.state, &current.term)? {
                Some((rule, state, term)) => {
                    trace.rules.push(rule);
                    trace.configs.push(Configuration { state, term });
                    steps += 1;
                }
                None => {
                    let at = current.clone();
                    return Ok(RunOutcome::Stuck { at, trace });
                }
            }
        }
    }

    /// Runs the dual automaton from its initial state (our final state).
    pub fn run_reverse(&self, output: &Term, fuel: u64) -> Result<RunOutcome, AmbiguousStep> {
        dual(self).run(output, fuel)
    }

    /// The partial function computed by the automaton, without a trace.
    pub fn apply(&self, input: &Term, fuel: u64) -> Result<Eval, AmbiguousStep> {
        let machine = self.machine();
        let mut state = self.initial;
        let mut term = input.clone();
        let mut steps = 0u64;
        while state != self.final_state {
            if steps == fuel {
                return Ok(Eval::OutOfFuel);
            }
            match machine.step(state, &term)? {
                Some((_, s, t)) => {
                    state = s;
                    term = t;
                    steps += 1;
                }
                None => return Ok(Eval::Undefined),
            }
        }
        Ok(Eval::Defined(term))
    }
}

/// The dual automaton: initial and final swapped, every rule reversed.
/// Rule `i` of the dual is the reverse of rule `i`.
pub fn dual(a: &Automaton) -> Automaton {
    Automaton::new(
        a.name.clone(),
        a.states.clone(),
        a.final_state,
        a.initial,
        a.rules.iter().map(Rule::reversed).collect(),
    )
    .expect("dual of a well-formed automaton is well-formed")
}

pub fn validate(a: &Automaton) -> Vec<Violation> {
    a.validate()
}

pub fn is_orthogonal(a: &Automaton) -> bool {
    a.is_orthogonal()
}

pub fn is_biorthogonal(a: &Automaton) -> bool {
    a.is_biorthogonal()
}

pub fn run(a: &Automaton, input: &Term, fuel: u64) -> Result<RunOutcome, AmbiguousStep> {
    a.run(input, fuel)
}

pub fn run_reverse(a: &Automaton, output: &Term, fuel: u64) -> Result<RunOutcome, AmbiguousStep> {
    a.run_reverse(output, fuel)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    InitialIsFinal,
    IncomingToInitial { rule: usize },
    OutgoingFromFinal { rule: usize },
    RhsVariableNotInLhs { rule: usize, var: String },
    SharedVariable { var: String, rules: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InitialIsFinal => write!(f, "initial state equals final state"),
            Violation::IncomingToInitial { rule } => write!(f, "rule {rule}: incoming-to-initial"),
            Violation::OutgoingFromFinal { rule } => write!(f, "rule {rule}: outgoing-from-final"),
            Violation::RhsVariableNotInLhs { rule, var } => {
                write!(f, "rule {rule}: rhs-variable-not-in-lhs ({var})")
            }
            Violation::SharedVariable { var, rules } => {
                write!(f, "rules {} and {}: shared variable {var}", rules.0, rules.1)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrthogonalityReport {
    /// Pairs of rules leaving the same state whose left-hand sides unify.
    pub overlaps: Vec<(usize, usize)>,
    /// Rules whose left-hand side repeats a variable.
    pub nonlinear: Vec<usize>,
}

impl OrthogonalityReport {
    pub fn is_orthogonal(&self) -> bool {
        self.overlaps.is_empty() && self.nonlinear.is_empty()
    }
}

impl fmt::Display for OrthogonalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in &self.overlaps {
            writeln!(f, "rules {i} and {j}: overlapping left-hand sides")?;
        }
        for i in &self.nonlinear {
            writeln!(f, "rule {i}: left-hand side is not linear")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BiorthogonalityReport {
    pub forward: OrthogonalityReport,
    /// Diagnostics of the dual; rule indices refer to reversed rules.
    pub backward: OrthogonalityReport,
}

impl BiorthogonalityReport {
    pub fn is_biorthogonal(&self) -> bool {
        self.forward.is_orthogonal() && self.backward.is_orthogonal()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ambiguous step in state {}: rules {:?} both apply", .state.0, .rules)]
pub struct AmbiguousStep {
    pub state: StateId,
    pub rules: (usize, usize),
}

/// A computation: `rules[k]` takes `configs[k]` to `configs[k + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub configs: Vec<Configuration>,
    pub rules: Vec<usize>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.rules.len()
    }

    /// The same computation read backwards. Since rule `i` of the dual is the
    /// reverse of rule `i`, a forward trace reversed is a trace of the dual.
    pub fn reversed(&self) -> Trace {
        Trace {
            configs: self.configs.iter().rev().cloned().collect(),
            rules: self.rules.iter().rev().copied().collect(),
        }
    }

    /// One `STATE | TERM | rule=i` line per configuration, where `i` is the
    /// rule fired from that configuration (`-` on the last line).
    pub fn emit(&self, a: &Automaton) -> String {
        let mut out = String::new();
        for (k, c) in self.configs.iter().enumerate() {
            let rule = self.rules.get(k).map_or("-".to_string(), |r| r.to_string());
            out.push_str(&format!("{} | {} | rule={}\n", a.label(c.state), c.term, rule));
        }
        out
    }

    pub fn parse(text: &str, a: &Automaton) -> Result<Trace, ParseError> {
        let mut configs = Vec::new();
        let mut rules = Vec::new();
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        for (pos, &(n, line)) in lines.iter().enumerate() {
            let err = |message: String| ParseError { line: n + 1, message };
            let parts: Vec<&str> = line.split('|').map(str::trim).collect();
            let [state, term, rule] = parts[..] else {
                return Err(err("expected `STATE | TERM | rule=i`".into()));
            };
            let state = a
                .state_by_label(state)
                .ok_or_else(|| err(format!("unknown state `{state}`")))?;
            let term: Term = term.parse().map_err(|e: TermParseError| err(e.to_string()))?;
            let rule = rule
                .strip_prefix("rule=")
                .ok_or_else(|| err("expected `rule=`".into()))?;
            let last = pos + 1 == lines.len();
            match (rule, last) {
                ("-", true) => {}
                (_, false) => rules.push(rule.parse().map_err(|_| err(format!("bad rule index `{rule}`")))?),
                _ => return Err(err("only the last line may have `rule=-`".into())),
            }
            configs.push(Configuration { state, term });
        }
        Ok(Trace { configs, rules })
    }
}

/// Outcome of a traced run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    /// The final state was reached.
    Success { output: Term, trace: Trace },
    /// No rule applies in a non-final state: the function is undefined here.
    Stuck { at: Configuration, trace: Trace },
    /// The step budget ran out.
    OutOfFuel { trace: Trace },
}

impl RunOutcome {
    pub fn trace(&self) -> &Trace {
        match self {
            RunOutcome::Success { trace, .. } | RunOutcome::Stuck { trace, .. } | RunOutcome::OutOfFuel { trace } => {
                trace
            }
        }
    }

    pub fn output(&self) -> Option<&Term> {
        match self {
            RunOutcome::Success { output, .. } => Some(output),
            _ => None,
        }
    }

    pub fn to_eval(&self) -> Eval {
        match self {
            RunOutcome::Success { output, .. } => Eval::Defined(output.clone()),
            RunOutcome::Stuck { .. } => Eval::Undefined,
            RunOutcome::OutOfFuel { .. } => Eval::OutOfFuel,
        }
    }
}

/// Outcome of evaluating a partial function on a ground term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Eval {
    Defined(Term),
    Undefined,
    OutOfFuel,
}

impl Eval {
    pub fn defined(&self) -> Option<&Term> {
        match self {
            Eval::Defined(t) => Some(t),
            _ => None,
        }
    }

    pub fn converged(&self) -> bool {
        !matches!(self, Eval::OutOfFuel)
    }
}

impl fmt::Display for Eval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eval::Defined(t) => write!(f, "{t}"),
            Eval::Undefined => f.write_str("undefined"),
            Eval::OutOfFuel => f.write_str("out-of-fuel"),
        }
    }
}

// ---------------------------------------------------------------------------
// Matching engine

/// Rule patterns with variables replaced by slot numbers.
#[derive(Debug)]
enum Pat {
    Eps,
    L(Box<Pat>),
    R(Box<Pat>),
    P(Box<Pat>, Box<Pat>),
    Bind(usize),
    /// Repeated variable in a non-linear left-hand side.
    Same(usize),
    /// Right-hand side variable with no binding on the left.
    Free(Arc<str>),
}

impl Pat {
    fn lhs(t: &Term, slots: &mut Vec<Arc<str>>) -> Pat {
        match t {
            Term::Eps => Pat::Eps,
            Term::L(a) => Pat::L(Box::new(Pat::lhs(a, slots))),
            Term::R(a) => Pat::R(Box::new(Pat::lhs(a, slots))),
            Term::P(a, b) => {
                let a = Pat::lhs(a, slots);
                Pat::P(Box::new(a), Box::new(Pat::lhs(b, slots)))
            }
            Term::Var(v) => match slots.iter().position(|s| s == v) {
                Some(k) => Pat::Same(k),
                None => {
                    slots.push(v.clone());
                    Pat::Bind(slots.len() - 1)
                }
            },
        }
    }

    fn rhs(t: &Term, slots: &[Arc<str>]) -> Pat {
        match t {
            Term::Eps => Pat::Eps,
            Term::L(a) => Pat::L(Box::new(Pat::rhs(a, slots))),
            Term::R(a) => Pat::R(Box::new(Pat::rhs(a, slots))),
            Term::P(a, b) => Pat::P(Box::new(Pat::rhs(a, slots)), Box::new(Pat::rhs(b, slots))),
            Term::Var(v) => match slots.iter().position(|s| s == v) {
                Some(k) => Pat::Bind(k),
                None => Pat::Free(v.clone()),
            },
        }
    }

    fn matches(&self, t: &Term, env: &mut [Option<Term>]) -> bool {
        match (self, t) {
            (Pat::Bind(k), _) => {
                env[*k] = Some(t.clone());
                true
            }
            (Pat::Same(k), _) => env[*k].as_ref() == Some(t),
            (Pat::Eps, Term::Eps) => true,
            (Pat::L(p), Term::L(a)) | (Pat::R(p), Term::R(a)) => p.matches(a, env),
            (Pat::P(p, q), Term::P(a, b)) => p.matches(a, env) && q.matches(b, env),
            _ => false,
        }
    }

    fn build(&self, env: &[Option<Term>]) -> Term {
        match self {
            Pat::Eps => Term::Eps,
            Pat::L(p) => Term::l(p.build(env)),
            Pat::R(p) => Term::r(p.build(env)),
            Pat::P(p, q) => Term::p(p.build(env), q.build(env)),
            Pat::Bind(k) | Pat::Same(k) => env[*k].clone().expect("bound slot"),
            Pat::Free(v) => Term::Var(v.clone()),
        }
    }
}

#[derive(Debug)]
struct CompiledRule {
    index: usize,
    lhs: Pat,
    rhs: Pat,
    target: StateId,
    slots: usize,
}

/// Rules indexed by source state and by the head of their left-hand side.
#[derive(Debug)]
struct Machine {
    /// `buckets[state][h]` for heads e, l, r, p and (last) variable patterns.
    buckets: Vec<[Vec<CompiledRule>; 5]>,
}

fn head_slot(h: Head) -> usize {
    match h {
        Head::Eps => 0,
        Head::L => 1,
        Head::R => 2,
        Head::P => 3,
        Head::Var => 4,
    }
}

impl Machine {
    fn new(a: &Automaton) -> Machine {
        let mut buckets: Vec<[Vec<CompiledRule>; 5]> = (0..a.states.len()).map(|_| Default::default()).collect();
        for (index, rule) in a.rules.iter().enumerate() {
            let mut slots = Vec::new();
            let lhs = Pat::lhs(&rule.lhs, &mut slots);
            let rhs = Pat::rhs(&rule.rhs, &slots);
            buckets[rule.source.index()][head_slot(rule.lhs.head())].push(CompiledRule {
                index,
                lhs,
                rhs,
                target: rule.target,
                slots: slots.len(),
            });
        }
        Machine { buckets }
    }

    fn step(&self, state: StateId, term: &Term) -> Result<Option<(usize, StateId, Term)>, AmbiguousStep> {
        let buckets = &self.buckets[state.index()];
        let candidates = buckets[head_slot(term.head())].iter().chain(buckets[4].iter());
        let mut found: Option<(usize, StateId, Term)> = None;
        let mut env: Vec<Option<Term>> = Vec::new();
        for rule in candidates {
            env.clear();
            env.resize(rule.slots, None);
            if rule.lhs.matches(term, &mut env) {
                if let Some((first, ..)) = found {
                    return Err(AmbiguousStep {
                        state,
                        rules: (first.min(rule.index), first.max(rule.index)),
                    });
                }
                found = Some((rule.index, rule.target, rule.rhs.build(&env)));
            }
        }
        Ok(found)
    }
}

// ---------------------------------------------------------------------------
// Building and text format

/// Incremental construction with states allocated by label.
#[derive(Debug, Clone)]
pub struct AutomatonBuilder {
    name: String,
    states: Vec<String>,
    index: HashMap<String, StateId>,
    rules: Vec<Rule>,
}

impl AutomatonBuilder {
    pub fn new(name: &str) -> Self {
        AutomatonBuilder {
            name: name.to_string(),
            states: Vec::new(),
            index: HashMap::new(),
            rules: Vec::new(),
        }
    }

    /// The state with this label, created on first use.
    pub fn state(&mut self, label: &str) -> StateId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = StateId(self.states.len() as u32);
        self.states.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn has_state(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn rule(&mut self, source: StateId, lhs: Term, rhs: Term, target: StateId) -> &mut Self {
        self.rules.push(Rule::new(source, lhs, rhs, target));
        self
    }

    pub fn build(self, initial: StateId, final_state: StateId) -> Result<Automaton, AutomatonError> {
        Automaton::new(self.name, self.states, initial, final_state, self.rules)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Automaton {
    /// The line-oriented text format: a header line, the list of states in
    /// id order, then one line per rule.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "automaton {} initial={} final={}",
            self.name,
            self.label(self.initial),
            self.label(self.final_state)
        )?;
        writeln!(f, "states {}", self.states.join(" "))?;
        for rule in &self.rules {
            writeln!(
                f,
                "{} : {} -> {} : {}",
                self.label(rule.source),
                rule.lhs,
                rule.rhs,
                self.label(rule.target)
            )?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Automaton {
    type Err = ParseError;

    /// Parses the text format. The `states` line is optional; without it,
    /// states are numbered in order of appearance. Blank lines and lines
    /// starting with `#` are ignored.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let (hline, header) = lines.next().ok_or(ParseError {
            line: 1,
            message: "missing `automaton` header".into(),
        })?;
        let herr = |message: &str| ParseError {
            line: hline,
            message: message.to_string(),
        };
        let words: Vec<&str> = header.split_whitespace().collect();
        let ["automaton", name, init, fin] = words[..] else {
            return Err(herr("expected `automaton NAME initial=Q0 final=QF`"));
        };
        let init = init.strip_prefix("initial=").ok_or_else(|| herr("expected `initial=`"))?;
        let fin = fin.strip_prefix("final=").ok_or_else(|| herr("expected `final=`"))?;
        let mut b = AutomatonBuilder::new(name);
        let check = |label: &str, line: usize| {
            if is_label(label) {
                Ok(())
            } else {
                Err(ParseError {
                    line,
                    message: format!("invalid state label `{label}`"),
                })
            }
        };
        check(init, hline)?;
        check(fin, hline)?;
        if let Some((n, declared)) = lines.next_if(|(_, l)| l.starts_with("states ") || *l == "states") {
            for label in declared.split_whitespace().skip(1) {
                check(label, n)?;
                if b.has_state(label) {
                    return Err(ParseError {
                        line: n,
                        message: format!("state `{label}` declared twice"),
                    });
                }
                b.state(label);
            }
        }
        let q0 = b.state(init);
        let qf = b.state(fin);
        for (n, line) in lines {
            let err = |message: String| ParseError { line: n, message };
            let parts: Vec<&str> = line.split(':').map(str::trim).collect();
            let [src, body, tgt] = parts[..] else {
                return Err(err("expected `Q : LHS -> RHS : Q'`".into()));
            };
            let Some((lhs, rhs)) = body.split_once("->") else {
                return Err(err("expected `->`".into()));
            };
            check(src, n)?;
            check(tgt, n)?;
            let lhs: Term = lhs.parse().map_err(|e: TermParseError| err(e.to_string()))?;
            let rhs: Term = rhs.parse().map_err(|e: TermParseError| err(e.to_string()))?;
            let (s, t) = (b.state(src), b.state(tgt));
            b.rule(s, lhs, rhs, t);
        }
        b.build(q0, qf).map_err(|e| herr(&e.to_string()))
    }
}
