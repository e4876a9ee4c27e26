//! Replication and linear application, both on automata and on the partial
//! functions they compute, plus finitely described partial involutions.
//!
//! The relational side ([`rel_bang`], [`rel_lapp`]) works on any
//! [`PartialFn`] and shares no code with the automaton constructions
//! ([`bang_automaton`], [`lapp_automaton`]); [`oracle_compare`] checks one
//! against the other.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use crate::automata::Eval;
use crate::automata::{Automaton, Rule, StateId};
use crate::terms::{match_pattern, unifiable_apart, Head, Substitution, Term, TermParseError};

// ---------------------------------------------------------------------------
// Finite descriptions

/// Which side of a description pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptionError {
    #[error("pair {pair}: {side:?} side is not linear")]
    NonLinear { pair: usize, side: Side },
    #[error("pair {pair}: both sides must contain the same variables")]
    VariableMismatch { pair: usize },
    #[error("sides {:?} of pair {} and {:?} of pair {} unify", .first.1, .first.0, .second.1, .second.0)]
    Overlap {
        first: (usize, Side),
        second: (usize, Side),
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A finite list of rules `t <-> u` whose symmetric closure under ground
/// substitutions is a partial involution.
///
/// Construction checks that no two of the `2k` sides unify (after renaming
/// apart), which makes the denoted relation a partial function.
#[derive(Clone, PartialEq, Eq)]
pub struct InvolutionDescription {
    pairs: Vec<(Term, Term)>,
}

impl InvolutionDescription {
    pub fn new(pairs: Vec<(Term, Term)>) -> Result<Self, DescriptionError> {
        for (i, (t, u)) in pairs.iter().enumerate() {
            if !t.is_linear() {
                return Err(DescriptionError::NonLinear { pair: i, side: Side::Left });
            }
            if !u.is_linear() {
                return Err(DescriptionError::NonLinear { pair: i, side: Side::Right });
            }
            let tv: BTreeSet<_> = t.vars().into_iter().collect();
            let uv: BTreeSet<_> = u.vars().into_iter().collect();
            if tv != uv {
                return Err(DescriptionError::VariableMismatch { pair: i });
            }
        }
        let sides: Vec<((usize, Side), &Term)> = pairs
            .iter()
            .enumerate()
            .flat_map(|(i, (t, u))| [((i, Side::Left), t), ((i, Side::Right), u)])
            .collect();
        for (a, (ida, ta)) in sides.iter().enumerate() {
            for (idb, tb) in &sides[a + 1..] {
                if unifiable_apart(ta, tb) {
                    return Err(DescriptionError::Overlap {
                        first: *ida,
                        second: *idb,
                    });
                }
            }
        }
        Ok(InvolutionDescription { pairs })
    }

    pub fn empty() -> Self {
        InvolutionDescription { pairs: Vec::new() }
    }

    pub fn pairs(&self) -> &[(Term, Term)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The image of a ground term, if some side matches it.
    pub fn eval(&self, t: &Term) -> Option<Term> {
        self.pairs.iter().find_map(|(a, b)| {
            if let Some(s) = match_pattern(a, t) {
                Some(s.apply(b))
            } else {
                match_pattern(b, t).map(|s| s.apply(a))
            }
        })
    }

    /// Same relation as `other`: equal as sets of unordered pairs, up to
    /// renaming of variables.
    pub fn same_relation(&self, other: &InvolutionDescription) -> bool {
        fn canon(d: &InvolutionDescription) -> BTreeSet<(String, String)> {
            d.pairs
                .iter()
                .map(|(t, u)| {
                    let rename = |first: &Term, second: &Term| {
                        let mut names: Vec<Arc<str>> = Vec::new();
                        let mut f = |v: &Arc<str>| {
                            let k = names.iter().position(|n| n == v).unwrap_or_else(|| {
                                names.push(v.clone());
                                names.len() - 1
                            });
                            Arc::from(format!("v{k}"))
                        };
                        (first.rename(&mut f).to_string(), second.rename(&mut f).to_string())
                    };
                    let (a, b) = rename(t, u);
                    let (c, d) = rename(u, t);
                    // orientation-independent key
                    std::cmp::min((a, b), (c, d))
                })
                .collect()
        }
        canon(self) == canon(other)
    }
}

impl fmt::Display for InvolutionDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, u) in &self.pairs {
            writeln!(f, "{t} <-> {u}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for InvolutionDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for InvolutionDescription {
    type Err = DescriptionError;

    /// One `TERM <-> TERM` pair per line; blank lines and `#` comments are
    /// skipped.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut pairs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| DescriptionError::Parse { line: n + 1, message };
            let (t, u) = line.split_once("<->").ok_or_else(|| err("expected `TERM <-> TERM`".into()))?;
            let t: Term = t.parse().map_err(|e: TermParseError| err(e.to_string()))?;
            let u: Term = u.parse().map_err(|e: TermParseError| err(e.to_string()))?;
            pairs.push((t, u));
        }
        InvolutionDescription::new(pairs)
    }
}

pub fn eval_description(d: &InvolutionDescription, t: &Term) -> Option<Term> {
    d.eval(t)
}

/// Two-state automaton with rules `(qi, t) -> (u, qf)` and `(qi, u) -> (t, qf)`
/// for every pair.
pub fn description_to_automaton(d: &InvolutionDescription, name: &str) -> Automaton {
    let (qi, qf) = (StateId(0), StateId(1));
    let rules = d
        .pairs
        .iter()
        .flat_map(|(t, u)| [Rule::new(qi, t.clone(), u.clone(), qf), Rule::new(qi, u.clone(), t.clone(), qf)])
        .collect();
    Automaton::new(name, vec!["qi".into(), "qf".into()], qi, qf, rules).expect("two-state automaton")
}

// ---------------------------------------------------------------------------
// Constructions on automata

/// Replication: every rule `(q, r) -> (s, q')` becomes
/// `(q, p(x, r)) -> (p(x, s), q')` with `x` fresh for the rule.
pub fn bang_automaton(a: &Automaton) -> Automaton {
    let rules = a
        .rules()
        .iter()
        .map(|rule| {
            let used: BTreeSet<Arc<str>> = rule.lhs.vars().into_iter().chain(rule.rhs.vars()).collect();
            let mut k = 0;
            let tag = loop {
                let name: Arc<str> = Arc::from(format!("c{k}"));
                if !used.contains(&name) {
                    break Term::Var(name);
                }
                k += 1;
            };
            Rule::new(
                rule.source,
                Term::p(tag.clone(), rule.lhs.clone()),
                Term::p(tag, rule.rhs.clone()),
                rule.target,
            )
        })
        .collect();
    Automaton::new(a.name(), a.labels().to_vec(), a.initial(), a.final_state(), rules)
        .expect("same states as the source automaton")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LappError {
    #[error("rule {rule} leaves the initial state with a left-hand side not headed by l or r")]
    InitialLhsNotInterface { rule: usize },
    #[error("rule {rule} enters the final state with a right-hand side not headed by l or r")]
    FinalRhsNotInterface { rule: usize },
}

/// Checks that every rule leaving the initial state has an `l`/`r`-headed
/// left-hand side and every rule entering the final state an `l`/`r`-headed
/// right-hand side.
pub fn check_interface_shape(a: &Automaton) -> Result<(), LappError> {
    let lr = |t: &Term| matches!(t.head(), Head::L | Head::R);
    for (i, rule) in a.rules().iter().enumerate() {
        if rule.source == a.initial() && !lr(&rule.lhs) {
            return Err(LappError::InitialLhsNotInterface { rule: i });
        }
        if rule.target == a.final_state() && !lr(&rule.rhs) {
            return Err(LappError::FinalRhsNotInterface { rule: i });
        }
    }
    Ok(())
}

fn disjoint_labels(a: &Automaton, b: &Automaton) -> Vec<String> {
    let taken: BTreeSet<&str> = a.labels().iter().map(String::as_str).collect();
    let mut prefix = String::from("b.");
    loop {
        let clash = b.labels().iter().any(|l| taken.contains(l.as_str()));
        if !clash && prefix == "b." {
            return b.labels().to_vec();
        }
        let relabelled: Vec<String> = b.labels().iter().map(|l| format!("{prefix}{l}")).collect();
        if relabelled.iter().all(|l| !taken.contains(l.as_str())) {
            return relabelled;
        }
        prefix.push_str("b.");
    }
}

/// Linear application of `a` to `b`.
///
/// States are the disjoint union of both state sets (b's labels are prefixed
/// only on collision); initial and final state are a's. Each rule of `a` is
/// classified by whether it leaves `a`'s initial state and whether it enters
/// `a`'s final state, the classifying `l`/`r` head is stripped, and the rule
/// is rewired to `b`'s initial or final state:
///
/// | a's rule                      | composite rule        |
/// |-------------------------------|-----------------------|
/// | `(qi, r(u)) -> (r(v), qf)`    | `(qi, u) -> (v, qf)`  |
/// | `(qi, r(u)) -> (l(v), qf)`    | `(qi, u) -> (v, pi)`  |
/// | `(qi, l(u)) -> (l(v), qf)`    | `(pf, u) -> (v, pi)`  |
/// | `(qi, l(u)) -> (r(v), qf)`    | `(pf, u) -> (v, qf)`  |
/// | `(qi, r(u)) -> (v, q)`        | `(qi, u) -> (v, q)`   |
/// | `(qi, l(u)) -> (v, q)`        | `(pf, u) -> (v, q)`   |
/// | `(q, u) -> (l(v), qf)`        | `(q, u) -> (v, pi)`   |
/// | `(q, u) -> (r(v), qf)`        | `(q, u) -> (v, qf)`   |
/// | `(q, u) -> (v, q')`           | unchanged             |
///
/// where `q, q'` are internal states of `a`. The rules of `b` are kept as
/// they are. `a` must be interface-shaped (see [`check_interface_shape`]);
/// both automata are expected to be biorthogonal, which the result then is.
pub fn lapp_automaton(a: &Automaton, b: &Automaton) -> Result<Automaton, LappError> {
    check_interface_shape(a)?;
    let offset = a.state_count() as u32;
    let shift = |s: StateId| StateId(s.0 + offset);
    let (qi, qf) = (a.initial(), a.final_state());
    let (pi, pf) = (shift(b.initial()), shift(b.final_state()));

    let strip = |t: &Term| -> (Head, Term) {
        let head = t.head();
        let inner = t.unary_arg().expect("interface-shaped").clone();
        (head, inner)
    };

    let mut rules = Vec::with_capacity(a.rule_count() + b.rule_count());
    for rule in a.rules() {
        let from_initial = rule.source == qi;
        let to_final = rule.target == qf;
        let (source, lhs) = if from_initial {
            match strip(&rule.lhs) {
                (Head::R, u) => (qi, u),
                (_, u) => (pf, u),
            }
        } else {
            (rule.source, rule.lhs.clone())
        };
        let (rhs, target) = if to_final {
            match strip(&rule.rhs) {
                (Head::R, v) => (v, qf),
                (_, v) => (v, pi),
            }
        } else {
            (rule.rhs.clone(), rule.target)
        };
        rules.push(Rule::new(source, lhs, rhs, target));
    }
    rules.extend(
        b.rules()
            .iter()
            .map(|r| Rule::new(shift(r.source), r.lhs.clone(), r.rhs.clone(), shift(r.target))),
    );

    let mut labels = a.labels().to_vec();
    labels.extend(disjoint_labels(a, b));
    Ok(Automaton::new(a.name(), labels, qi, qf, rules).expect("disjoint union of well-formed automata"))
}

/// Bookkeeping of [`interface_normalize`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InterfaceStats {
    /// Rules added by splitting a bare-variable interface side into its
    /// `l` and `r` instances.
    pub added: usize,
    /// Rules removed because their interface side is headed by `e` or `p`.
    pub dropped: usize,
}

impl InterfaceStats {
    pub fn is_identity(&self) -> bool {
        self.added == 0 && self.dropped == 0
    }
}

fn specialize(rule: &Rule, var: &Arc<str>) -> [Rule; 2] {
    let name = var.to_string();
    let mk = |t: Term| {
        let s = Substitution::singleton(&name, t);
        Rule::new(rule.source, s.apply(&rule.lhs), s.apply(&rule.rhs), rule.target)
    };
    [mk(Term::l(Term::Var(var.clone()))), mk(Term::r(Term::Var(var.clone())))]
}

/// Brings an automaton into interface shape without changing the part of its
/// behaviour that linear application can observe.
///
/// Linear application only ever feeds `a` inputs headed by `l` or `r` and
/// only uses outputs headed by `l` or `r`. So a rule leaving the initial state
/// with a bare variable `x` on the left is split into its instances
/// `x := l(x)` and `x := r(x)`, likewise a rule entering the final state with
/// a bare variable on the right, and interface sides headed by `e` or `p` are
/// removed. Biorthogonality is preserved; an interface-shaped automaton is
/// returned unchanged.
pub fn interface_normalize(a: &Automaton) -> (Automaton, InterfaceStats) {
    if check_interface_shape(a).is_ok() {
        return (a.clone(), InterfaceStats::default());
    }
    let mut stats = InterfaceStats::default();
    let mut rules = Vec::with_capacity(a.rule_count());
    for rule in a.rules() {
        let mut expanded = Vec::with_capacity(2);
        if rule.source == a.initial() {
            match &rule.lhs {
                Term::L(_) | Term::R(_) => expanded.push(rule.clone()),
                Term::Var(x) => expanded.extend(specialize(rule, x)),
                Term::Eps | Term::P(..) => {}
            }
        } else {
            expanded.push(rule.clone());
        }
        let mut out = Vec::with_capacity(4);
        for r in expanded {
            if r.target == a.final_state() {
                match &r.rhs {
                    Term::L(_) | Term::R(_) => out.push(r),
                    Term::Var(y) => out.extend(specialize(&r, y)),
                    Term::Eps | Term::P(..) => {}
                }
            } else {
                out.push(r);
            }
        }
        match out.len() {
            0 => stats.dropped += 1,
            n => stats.added += n - 1,
        }
        rules.extend(out);
    }
    let normalized = Automaton::new(a.name(), a.labels().to_vec(), a.initial(), a.final_state(), rules)
        .expect("same states as the source automaton");
    (normalized, stats)
}

/// Linear application for any head automaton: [`interface_normalize`]
/// followed by [`lapp_automaton`].
pub fn lapp_automaton_general(a: &Automaton, b: &Automaton) -> (Automaton, InterfaceStats) {
    let (a, stats) = interface_normalize(a);
    let composite = lapp_automaton(&a, b).expect("normalized automaton is interface-shaped");
    (composite, stats)
}

// ---------------------------------------------------------------------------
// Relational oracle

/// A partial function on ground terms with deterministic, fuel-aware
/// evaluation.
pub trait PartialFn {
    fn eval(&self, t: &Term) -> Eval;
}

impl<F: PartialFn + ?Sized> PartialFn for &F {
    fn eval(&self, t: &Term) -> Eval {
        (**self).eval(t)
    }
}

impl<F: PartialFn + ?Sized> PartialFn for Box<F> {
    fn eval(&self, t: &Term) -> Eval {
        (**self).eval(t)
    }
}

impl PartialFn for InvolutionDescription {
    fn eval(&self, t: &Term) -> Eval {
        match InvolutionDescription::eval(self, t) {
            Some(u) => Eval::Defined(u),
            None => Eval::Undefined,
        }
    }
}

/// The function computed by an automaton, each run limited to `fuel` steps.
#[derive(Debug, Clone, Copy)]
pub struct AutomatonFn<'a> {
    pub automaton: &'a Automaton,
    pub fuel: u64,
}

impl<'a> AutomatonFn<'a> {
    pub fn new(automaton: &'a Automaton, fuel: u64) -> Self {
        AutomatonFn { automaton, fuel }
    }
}

impl PartialFn for AutomatonFn<'_> {
    fn eval(&self, t: &Term) -> Eval {
        // A non-orthogonal automaton has no functional semantics.
        self.automaton.apply(t, self.fuel).unwrap_or(Eval::Undefined)
    }
}

/// `!f`, evaluated pointwise.
#[derive(Debug, Clone, Copy)]
pub struct Bang<F>(pub F);

impl<F: PartialFn> PartialFn for Bang<F> {
    fn eval(&self, t: &Term) -> Eval {
        rel_bang(&self.0, t)
    }
}

/// `LApp(f, g)`, evaluated by running the dialogue with at most `fuel`
/// exchanges.
#[derive(Debug, Clone, Copy)]
pub struct Lapp<F, G> {
    pub f: F,
    pub g: G,
    pub fuel: u64,
}

impl<F: PartialFn, G: PartialFn> PartialFn for Lapp<F, G> {
    fn eval(&self, t: &Term) -> Eval {
        rel_lapp(&self.f, &self.g, t, self.fuel)
    }
}

/// `!f = { (p(t,u), p(t,v)) | (u,v) in f }` at one point.
pub fn rel_bang(f: &impl PartialFn, t: &Term) -> Eval {
    match t {
        Term::P(tag, u) => match f.eval(u) {
            Eval::Defined(v) => Eval::Defined(Term::P(tag.clone(), Arc::new(v))),
            other => other,
        },
        _ => Eval::Undefined,
    }
}

/// How a linear-application dialogue ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialogue {
    pub result: Eval,
    /// Calls made to `f` and `g`.
    pub exchanges: u64,
    /// Set when `f` answered with a term not headed by `l` or `r`; the
    /// result is then undefined.
    pub off_interface: Option<Term>,
}

/// `LApp(f, g) = f_rr ∪ f_rl ; g ; (f_ll ; g)* ; f_lr` at one point.
///
/// `f` is queried at `r(t)`; an answer `r(v)` ends the dialogue with `v`,
/// an answer `l(w)` sends `w` to `g`, whose answer `w'` goes back to `f` as
/// `l(w')`. Each call to `f` or `g` costs one unit of `fuel`.
pub fn rel_lapp_dialogue(f: &impl PartialFn, g: &impl PartialFn, t: &Term, fuel: u64) -> Dialogue {
    let mut exchanges = 0u64;
    let mut query = Term::r(t.clone());
    let done = |result: Eval, exchanges: u64| Dialogue {
        result,
        exchanges,
        off_interface: None,
    };
    loop {
        if exchanges == fuel {
            return done(Eval::OutOfFuel, exchanges);
        }
        exchanges += 1;
        let answer = match f.eval(&query) {
            Eval::Defined(a) => a,
            other => return done(other, exchanges),
        };
        match answer {
            Term::R(v) => return done(Eval::Defined((*v).clone()), exchanges),
            Term::L(w) => {
                if exchanges == fuel {
                    return done(Eval::OutOfFuel, exchanges);
                }
                exchanges += 1;
                match g.eval(&w) {
                    Eval::Defined(w2) => query = Term::l(w2),
                    other => return done(other, exchanges),
                }
            }
            other => {
                return Dialogue {
                    result: Eval::Undefined,
                    exchanges,
                    off_interface: Some(other),
                }
            }
        }
    }
}

pub fn rel_lapp(f: &impl PartialFn, g: &impl PartialFn, t: &Term, fuel: u64) -> Eval {
    rel_lapp_dialogue(f, g, t, fuel).result
}

// ---------------------------------------------------------------------------
// Operational vs relational comparison

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    Lapp,
    Bang,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Lapp => "lapp",
            Construction::Bang => "bang",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Agree,
    Disagree,
    /// At least one side ran out of fuel.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Agree => "agree",
            Verdict::Disagree => "disagree",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

pub fn verdict(automaton: &Eval, oracle: &Eval) -> Verdict {
    match (automaton, oracle) {
        (Eval::OutOfFuel, _) | (_, Eval::OutOfFuel) => Verdict::Inconclusive,
        (x, y) if x == y => Verdict::Agree,
        _ => Verdict::Disagree,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleEntry {
    pub construction: Construction,
    pub term: Term,
    pub automaton: Eval,
    pub oracle: Eval,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleTally {
    pub agree: usize,
    pub disagree: usize,
    pub inconclusive: usize,
    /// Inconclusive cases where both sides ran out of fuel.
    pub both_out_of_fuel: usize,
}

impl OracleTally {
    pub fn total(&self) -> usize {
        self.agree + self.disagree + self.inconclusive
    }

    fn record(&mut self, automaton: &Eval, oracle: &Eval) -> Verdict {
        let v = verdict(automaton, oracle);
        match v {
            Verdict::Agree => self.agree += 1,
            Verdict::Disagree => self.disagree += 1,
            Verdict::Inconclusive => {
                self.inconclusive += 1;
                if automaton == &Eval::OutOfFuel && oracle == &Eval::OutOfFuel {
                    self.both_out_of_fuel += 1;
                }
            }
        }
        v
    }

    pub fn merge(&mut self, other: &OracleTally) {
        self.agree += other.agree;
        self.disagree += other.disagree;
        self.inconclusive += other.inconclusive;
        self.both_out_of_fuel += other.both_out_of_fuel;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub entries: Vec<OracleEntry>,
    pub tally: OracleTally,
}

impl OracleReport {
    pub fn disagreements(&self) -> impl Iterator<Item = &OracleEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Disagree)
    }
}

impl fmt::Display for OracleReport {
    /// Tab-separated: construction, term, automaton outcome, oracle outcome,
    /// verdict.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{}\t{}\t{}\t{}\t{}",
                e.construction, e.term, e.automaton, e.oracle, e.verdict
            )?;
        }
        Ok(())
    }
}

/// Both sides of one comparison, prepared once for many samples.
pub struct OracleHarness<'a> {
    a: &'a Automaton,
    b: &'a Automaton,
    lapp: Automaton,
    bang: Automaton,
    fuel: u64,
}

impl<'a> OracleHarness<'a> {
    pub fn new(a: &'a Automaton, b: &'a Automaton, fuel: u64) -> Self {
        OracleHarness {
            a,
            b,
            lapp: lapp_automaton_general(a, b).0,
            bang: bang_automaton(a),
            fuel,
        }
    }

    pub fn compare(&self, construction: Construction, t: &Term) -> (Eval, Eval) {
        let (fa, fb) = (AutomatonFn::new(self.a, self.fuel), AutomatonFn::new(self.b, self.fuel));
        match construction {
            Construction::Lapp => (
                self.lapp.apply(t, self.fuel).unwrap_or(Eval::Undefined),
                rel_lapp(&fa, &fb, t, self.fuel),
            ),
            Construction::Bang => (
                self.bang.apply(t, self.fuel).unwrap_or(Eval::Undefined),
                rel_bang(&fa, t),
            ),
        }
    }

    pub fn tally(&self, samples: &[Term]) -> OracleTally {
        let mut tally = OracleTally::default();
        for t in samples {
            for c in [Construction::Lapp, Construction::Bang] {
                let (x, y) = self.compare(c, t);
                tally.record(&x, &y);
            }
        }
        tally
    }
}

/// Runs `lapp(a, b)` and `!a` on every sample and compares them with the
/// relational definitions evaluated on the semantics of `a` and `b`.
/// `fuel` bounds automaton steps and dialogue exchanges alike.
pub fn oracle_compare(a: &Automaton, b: &Automaton, samples: &[Term], fuel: u64) -> OracleReport {
    let harness = OracleHarness::new(a, b, fuel);
    let mut report = OracleReport::default();
    for t in samples {
        for construction in [Construction::Lapp, Construction::Bang] {
            let (automaton, oracle) = harness.compare(construction, t);
            let verdict = report.tally.record(&automaton, &oracle);
            report.entries.push(OracleEntry {
                construction,
                term: t.clone(),
                automaton,
                oracle,
                verdict,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::build::*;

    fn t(s: &str) -> Term {
        s.parse().unwrap()
    }

    fn desc(s: &str) -> InvolutionDescription {
        s.parse().unwrap()
    }

    const FUEL: u64 = 10_000;

    #[test]
    fn description_evaluation() {
        let d = desc("l(p(e,x)) <-> r(x)");
        assert_eq!(d.eval(&t("l(p(e,r(e)))")), Some(t("r(r(e))")));
        assert_eq!(d.eval(&t("r(r(e))")), Some(t("l(p(e,r(e)))")));
        assert_eq!(d.eval(&t("p(e,e)")), None);
    }

    #[test]
    fn description_well_definedness() {
        assert!(matches!(
            "l(x) <-> r(x)\nl(r(y)) <-> r(r(r(y)))".parse::<InvolutionDescription>(),
            Err(DescriptionError::Overlap { .. })
        ));
        assert!(matches!(
            "l(x) <-> l(y)".parse::<InvolutionDescription>(),
            Err(DescriptionError::VariableMismatch { pair: 0 })
        ));
        assert!(matches!(
            "l(p(x,x)) <-> r(x)".parse::<InvolutionDescription>(),
            Err(DescriptionError::NonLinear { pair: 0, side: Side::Left })
        ));
        assert!(matches!(
            "x <-> x".parse::<InvolutionDescription>(),
            Err(DescriptionError::Overlap { .. })
        ));
        assert!(matches!(
            "l(x) r(x)".parse::<InvolutionDescription>(),
            Err(DescriptionError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn description_automata() {
        let a = description_to_automaton(&desc("l(x) <-> r(x)"), "I");
        assert_eq!(a.state_count(), 2);
        assert_eq!(a.rule_count(), 2);
        assert!(a.is_biorthogonal());

        let d = desc("l(p(p(x,y),z)) <-> r(p(x,p(y,z)))");
        let a = description_to_automaton(&d, "delta");
        assert_eq!(a.rule_count(), 2);
        assert_eq!(a.apply(&t("l(p(p(e,e),e))"), FUEL).unwrap(), Eval::Defined(t("r(p(e,p(e,e)))")));

        let empty = description_to_automaton(&InvolutionDescription::empty(), "none");
        assert_eq!(empty.rule_count(), 0);
        assert_eq!(empty.apply(&l(e()), FUEL).unwrap(), Eval::Undefined);
    }

    #[test]
    fn bang_wraps_rules() {
        let i = description_to_automaton(&desc("l(x) <-> r(x)"), "I");
        let b = bang_automaton(&i);
        assert_eq!(b.rule_count(), 2);
        let r0 = &b.rules()[0];
        assert!(matches!(&r0.lhs, Term::P(tag, inner) if tag.is_var() && inner.head() == Head::L));
        assert!(b.is_biorthogonal());
        assert_eq!(b.apply(&t("p(e,l(e))"), FUEL).unwrap(), Eval::Defined(t("p(e,r(e))")));
    }

    #[test]
    fn lapp_identity_then_k() {
        let i = description_to_automaton(&desc("l(x) <-> r(x)"), "I");
        let k = description_to_automaton(&desc("l(x) <-> r(r(x))"), "K");
        let ik = lapp_automaton(&i, &k).unwrap();
        assert_eq!(ik.rule_count(), 4);
        assert_eq!(ik.state_count(), 4);
        assert!(ik.is_biorthogonal());
        assert_eq!(ik.apply(&l(e()), FUEL).unwrap(), Eval::Defined(r(r(e()))));
    }

    #[test]
    fn lapp_k_routes_through_argument() {
        let k = description_to_automaton(&desc("l(x) <-> r(r(x))"), "K");
        let i = description_to_automaton(&desc("l(x) <-> r(x)"), "I");
        let ki = lapp_automaton(&k, &i).unwrap();
        match ki.run(&r(l(e())), FUEL).unwrap() {
            crate::automata::RunOutcome::Success { output, trace } => {
                assert_eq!(output, r(r(e())));
                assert!(trace.configs.iter().any(|c| c.state == StateId(2)));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(ki.apply(&l(e()), FUEL).unwrap(), Eval::Undefined);
    }

    #[test]
    fn lapp_rejects_non_interface_heads() {
        let a = description_to_automaton(&desc("p(x,y) <-> l(p(y,x))"), "X");
        let i = description_to_automaton(&desc("l(x) <-> r(x)"), "I");
        assert_eq!(lapp_automaton(&a, &i), Err(LappError::InitialLhsNotInterface { rule: 0 }));
    }

    #[test]
    fn normalization_splits_and_drops() {
        let i = description_to_automaton(&desc("l(x) <-> r(x)"), "I");
        let k = description_to_automaton(&desc("l(x) <-> r(r(x))"), "K");
        let ik = lapp_automaton(&i, &k).unwrap();
        // (qi, x) -> (x, pi) and (pf, x) -> (x, qf) are no longer interface-shaped
        assert!(check_interface_shape(&ik).is_err());
        let (n, stats) = interface_normalize(&ik);
        assert!(check_interface_shape(&n).is_ok());
        assert_eq!(stats, InterfaceStats { added: 2, dropped: 0 });
        assert!(n.is_biorthogonal());

        let x = description_to_automaton(&desc("p(x,y) <-> l(p(y,x))"), "X");
        let (n, stats) = interface_normalize(&x);
        assert_eq!(stats, InterfaceStats { added: 0, dropped: 2 });
        assert_eq!(n.rule_count(), 0);

        let (same, stats) = interface_normalize(&k);
        assert!(stats.is_identity());
        assert_eq!(same, k);
    }

    #[test]
    fn relational_bang() {
        let i = desc("l(x) <-> r(x)");
        assert_eq!(rel_bang(&i, &t("p(e,l(e))")), Eval::Defined(t("p(e,r(e))")));
        assert_eq!(rel_bang(&i, &e()), Eval::Undefined);
        let bb = Bang(Bang(&i));
        assert_eq!(bb.eval(&t("p(l(e),p(r(e),l(e)))")), Eval::Defined(t("p(l(e),p(r(e),r(e)))")));
    }

    #[test]
    fn relational_lapp() {
        let i = desc("l(x) <-> r(x)");
        let k = desc("l(x) <-> r(r(x))");
        let d = rel_lapp_dialogue(&i, &k, &l(e()), 100);
        assert_eq!(d.result, Eval::Defined(r(r(e()))));
        assert_eq!(d.exchanges, 3);

        struct Never;
        impl PartialFn for Never {
            fn eval(&self, _: &Term) -> Eval {
                panic!("argument consulted")
            }
        }
        assert_eq!(rel_lapp(&k, &Never, &l(e()), 100), Eval::Undefined);

        let u = l(e());
        let v = rel_lapp(&i, &k, &u, 100);
        assert_eq!(rel_lapp(&i, &k, v.defined().unwrap(), 100), Eval::Defined(u));
    }

    #[test]
    fn dialogue_fuel_and_off_interface() {
        let i = desc("l(x) <-> r(x)");
        assert_eq!(rel_lapp(&i, &i, &l(e()), 2), Eval::OutOfFuel);
        assert_eq!(rel_lapp(&i, &i, &l(e()), 3), Eval::Defined(r(e())));
        let odd = desc("r(x) <-> p(x,e)");
        let d = rel_lapp_dialogue(&odd, &i, &e(), 10);
        assert_eq!(d.result, Eval::Undefined);
        assert_eq!(d.off_interface, Some(t("p(e,e)")));
    }

    #[test]
    fn oracle_report_lines() {
        let i = description_to_automaton(&desc("l(x) <-> r(x)"), "I");
        let k = description_to_automaton(&desc("l(x) <-> r(r(x))"), "K");
        let report = oracle_compare(&i, &k, &[l(e()), t("p(e,l(e))")], FUEL);
        assert_eq!(report.entries.len(), 4);
        assert_eq!(report.tally.disagree, 0);
        let text = report.to_string();
        assert!(text.starts_with("lapp\tl(e)\tr(r(e))\tr(r(e))\tagree\n"));
        assert!(oracle_compare(&i, &k, &[], FUEL).entries.is_empty());
    }

    #[test]
    fn same_relation_ignores_orientation_and_names() {
        let k = desc("l(x) <-> r(r(x))");
        let k2 = desc("r(r(y)) <-> l(y)");
        assert!(k.same_relation(&k2));
        assert!(!k.same_relation(&desc("l(x) <-> r(x)")));
    }
}
