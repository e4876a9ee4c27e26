//! Source terms, bracket abstraction, the standard-to-linear translation,
//! compositional compilation to automata, and a reduction engine for
//! standard combinatory logic.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{bang_automaton, lapp_automaton, lapp_automaton_general, LappError};
use crate::automata::Automaton;
use crate::combinators::{base_automaton_labelled, church, derived_term, s_definition, Combinator, Derived};

// ---------------------------------------------------------------------------
// Syntax trees

/// Leaves of standard combinatory logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StdLeaf {
    S,
    K,
    I,
    B,
    C,
    W,
}

impl StdLeaf {
    pub const ALL: [StdLeaf; 6] = [StdLeaf::S, StdLeaf::K, StdLeaf::I, StdLeaf::B, StdLeaf::C, StdLeaf::W];

    pub fn name(self) -> &'static str {
        match self {
            StdLeaf::S => "S",
            StdLeaf::K => "K",
            StdLeaf::I => "I",
            StdLeaf::B => "B",
            StdLeaf::C => "C",
            StdLeaf::W => "W",
        }
    }

    pub fn from_name(name: &str) -> Option<StdLeaf> {
        StdLeaf::ALL.into_iter().find(|l| l.name() == name)
    }
}

/// A standard combinatory term. `Atom`s are variables during bracket
/// abstraction and inert constants during reduction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StdTerm {
    Leaf(StdLeaf),
    Atom(String),
    App(Box<StdTerm>, Box<StdTerm>),
}

impl StdTerm {
    pub fn app(f: StdTerm, a: StdTerm) -> StdTerm {
        StdTerm::App(Box::new(f), Box::new(a))
    }

    pub fn atom(name: &str) -> StdTerm {
        StdTerm::Atom(name.to_string())
    }

    /// Left-nested application of `head` to `args`.
    pub fn apply_all(head: StdTerm, args: impl IntoIterator<Item = StdTerm>) -> StdTerm {
        args.into_iter().fold(head, StdTerm::app)
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            StdTerm::Leaf(_) => {}
            StdTerm::Atom(a) => {
                out.insert(a.clone());
            }
            StdTerm::App(f, a) => {
                f.collect_atoms(out);
                a.collect_atoms(out);
            }
        }
    }

    pub fn contains_atom(&self, x: &str) -> bool {
        match self {
            StdTerm::Leaf(_) => false,
            StdTerm::Atom(a) => a == x,
            StdTerm::App(f, a) => f.contains_atom(x) || a.contains_atom(x),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            StdTerm::App(f, a) => f.size() + a.size(),
            _ => 1,
        }
    }
}

impl fmt::Display for StdTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StdTerm::Leaf(l) => f.write_str(l.name()),
            StdTerm::Atom(a) => f.write_str(a),
            StdTerm::App(g, a) => {
                write!(f, "{g} ")?;
                match **a {
                    StdTerm::App(..) => write!(f, "({a})"),
                    _ => write!(f, "{a}"),
                }
            }
        }
    }
}

/// A closed linear combinatory term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CombTerm {
    Leaf(Combinator),
    App(Box<CombTerm>, Box<CombTerm>),
    Bang(Box<CombTerm>),
}

impl CombTerm {
    pub fn app(f: CombTerm, a: CombTerm) -> CombTerm {
        CombTerm::App(Box::new(f), Box::new(a))
    }

    pub fn bang(a: CombTerm) -> CombTerm {
        CombTerm::Bang(Box::new(a))
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            CombTerm::Leaf(_) => 1,
            CombTerm::App(f, a) => f.leaf_count() + a.leaf_count(),
            CombTerm::Bang(a) => a.leaf_count(),
        }
    }

    pub fn leaves(&self) -> Vec<Combinator> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Combinator>) {
        match self {
            CombTerm::Leaf(c) => out.push(*c),
            CombTerm::App(f, a) => {
                f.collect_leaves(out);
                a.collect_leaves(out);
            }
            CombTerm::Bang(a) => a.collect_leaves(out),
        }
    }
}

impl fmt::Display for CombTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CombTerm::Leaf(c) => f.write_str(c.name()),
            CombTerm::Bang(a) => match **a {
                CombTerm::App(..) => write!(f, "!({a})"),
                _ => write!(f, "!{a}"),
            },
            CombTerm::App(g, a) => {
                write!(f, "{g} ")?;
                match **a {
                    CombTerm::App(..) => write!(f, "({a})"),
                    _ => write!(f, "{a}"),
                }
            }
        }
    }
}

/// Lambda terms whose constants are closed standard terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LambdaTerm {
    Var(String),
    Const(StdTerm),
    Abs(String, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
}

impl LambdaTerm {
    pub fn var(x: &str) -> LambdaTerm {
        LambdaTerm::Var(x.to_string())
    }

    pub fn abs(x: &str, body: LambdaTerm) -> LambdaTerm {
        LambdaTerm::Abs(x.to_string(), Box::new(body))
    }

    pub fn app(f: LambdaTerm, a: LambdaTerm) -> LambdaTerm {
        LambdaTerm::App(Box::new(f), Box::new(a))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            LambdaTerm::Var(x) => BTreeSet::from([x.clone()]),
            LambdaTerm::Const(t) => t.atoms(),
            LambdaTerm::Abs(x, body) => {
                let mut fv = body.free_vars();
                fv.remove(x);
                fv
            }
            LambdaTerm::App(f, a) => {
                let mut fv = f.free_vars();
                fv.extend(a.free_vars());
                fv
            }
        }
    }
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaTerm::Var(x) => f.write_str(x),
            LambdaTerm::Const(t) => match t {
                StdTerm::App(..) => write!(f, "({t})"),
                _ => write!(f, "{t}"),
            },
            LambdaTerm::Abs(x, body) => write!(f, "\\{x}. {body}"),
            LambdaTerm::App(g, a) => {
                match **g {
                    LambdaTerm::Abs(..) => write!(f, "({g}) ")?,
                    _ => write!(f, "{g} ")?,
                }
                match **a {
                    LambdaTerm::App(..) | LambdaTerm::Abs(..) => write!(f, "({a})"),
                    _ => write!(f, "{a}"),
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Translations

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("open term: free variable{} {}", if .0.len() == 1 { "" } else { "s" }, .0.join(", "))]
    OpenTerm(Vec<String>),
    #[error(transparent)]
    Lapp(#[from] LappError),
}

/// `λ*x.M`: `K·M` if `x` does not occur in `M`, `I` if `M = x`,
/// `S·(λ*x.P)·(λ*x.Q)` if `M = P·Q`.
pub fn bracket_abstract(x: &str, m: &StdTerm) -> StdTerm {
    use StdLeaf::*;
    if !m.contains_atom(x) {
        return StdTerm::app(StdTerm::Leaf(K), m.clone());
    }
    match m {
        StdTerm::Atom(_) => StdTerm::Leaf(I),
        StdTerm::App(p, q) => StdTerm::app(
            StdTerm::app(StdTerm::Leaf(S), bracket_abstract(x, p)),
            bracket_abstract(x, q),
        ),
        StdTerm::Leaf(_) => unreachable!("leaves contain no atoms"),
    }
}

/// Eliminates abstractions; free variables are left as atoms.
pub fn lambda_to_cl_open(t: &LambdaTerm) -> StdTerm {
    match t {
        LambdaTerm::Var(x) => StdTerm::Atom(x.clone()),
        LambdaTerm::Const(c) => c.clone(),
        LambdaTerm::Abs(x, body) => bracket_abstract(x, &lambda_to_cl_open(body)),
        LambdaTerm::App(f, a) => StdTerm::app(lambda_to_cl_open(f), lambda_to_cl_open(a)),
    }
}

pub fn lambda_to_cl(t: &LambdaTerm) -> Result<StdTerm, CompileError> {
    let fv = t.free_vars();
    if !fv.is_empty() {
        return Err(CompileError::OpenTerm(fv.into_iter().collect()));
    }
    Ok(lambda_to_cl_open(t))
}

/// `a · b` becomes `a' · !b'`; each leaf becomes its derived linear term.
pub fn std_to_linear(t: &StdTerm) -> Result<CombTerm, CompileError> {
    let atoms = t.atoms();
    if !atoms.is_empty() {
        return Err(CompileError::OpenTerm(atoms.into_iter().collect()));
    }
    Ok(translate(t))
}

fn translate(t: &StdTerm) -> CombTerm {
    match t {
        StdTerm::Leaf(StdLeaf::S) => translate(&s_definition()),
        StdTerm::Leaf(StdLeaf::K) => derived_term(Derived::Ks),
        StdTerm::Leaf(StdLeaf::I) => derived_term(Derived::Is),
        StdTerm::Leaf(StdLeaf::B) => derived_term(Derived::Bs),
        StdTerm::Leaf(StdLeaf::C) => derived_term(Derived::Cs),
        StdTerm::Leaf(StdLeaf::W) => derived_term(Derived::Ws),
        StdTerm::Atom(_) => unreachable!("checked closed"),
        StdTerm::App(f, a) => CombTerm::app(translate(f), CombTerm::bang(translate(a))),
    }
}

// ---------------------------------------------------------------------------
// Compilation

/// Size bookkeeping of a compilation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SizeReport {
    pub leaves: usize,
    /// Sum over all leaves of the number of pairs in the base description.
    pub base_pairs: usize,
    /// Sum of the base rule counts over all leaves, two per pair.
    pub base_rules: usize,
    pub rules: usize,
    pub states: usize,
    /// Rules added when a head automaton was brought into interface shape.
    pub specialized: usize,
    /// Rules removed for the same reason.
    pub pruned: usize,
}

impl SizeReport {
    /// `rules == base_rules + specialized - pruned`.
    pub fn balanced(&self) -> bool {
        self.rules + self.pruned == self.base_rules + self.specialized
    }
}

impl fmt::Display for SizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "leaves={} base_pairs={} base_rules={} rules={} states={} specialized={} pruned={}",
            self.leaves, self.base_pairs, self.base_rules, self.rules, self.states, self.specialized, self.pruned
        )
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub automaton: Automaton,
    pub report: SizeReport,
}

struct Compiler {
    counter: usize,
    report: SizeReport,
    strict: bool,
}

impl Compiler {
    fn go(&mut self, t: &CombTerm) -> Result<Automaton, LappError> {
        match t {
            CombTerm::Leaf(c) => {
                let label = format!("{}{}", c.name(), self.counter);
                self.counter += 1;
                let a = base_automaton_labelled(*c, &label);
                self.report.leaves += 1;
                self.report.base_pairs += c.pair_count();
                self.report.base_rules += a.rule_count();
                Ok(a)
            }
            CombTerm::Bang(a) => Ok(bang_automaton(&self.go(a)?)),
            CombTerm::App(f, a) => {
                let f = self.go(f)?;
                let a = self.go(a)?;
                if self.strict {
                    lapp_automaton(&f, &a)
                } else {
                    let (composite, stats) = lapp_automaton_general(&f, &a);
                    self.report.specialized += stats.added;
                    self.report.pruned += stats.dropped;
                    Ok(composite)
                }
            }
        }
    }
}

fn run_compiler(t: &CombTerm, strict: bool) -> Result<Compiled, LappError> {
    let mut c = Compiler {
        counter: 0,
        report: SizeReport::default(),
        strict,
    };
    let automaton = c.go(t)?;
    let mut report = c.report;
    report.rules = automaton.rule_count();
    report.states = automaton.state_count();
    Ok(Compiled { automaton, report })
}

/// Compiles a closed linear term: leaves become base automata (states
/// labelled by leaf name and pre-order index), `!` becomes replication and
/// application becomes linear application, with the head brought into
/// interface shape first where needed.
pub fn compile_with_report(t: &CombTerm) -> Compiled {
    run_compiler(t, false).expect("general linear application is total")
}

pub fn compile(t: &CombTerm) -> Automaton {
    compile_with_report(t).automaton
}

/// Compilation without interface normalization. Fails when some head
/// automaton is not interface-shaped.
pub fn compile_strict(t: &CombTerm) -> Result<Compiled, CompileError> {
    Ok(run_compiler(t, true)?)
}

// ---------------------------------------------------------------------------
// Reduction

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("reduction ran out of fuel")]
pub struct OutOfFuel;

fn unspine(t: StdTerm) -> (StdTerm, Vec<StdTerm>) {
    let mut args = Vec::new();
    let mut head = t;
    while let StdTerm::App(f, a) = head {
        args.push(*a);
        head = *f;
    }
    args.reverse();
    (head, args)
}

/// Contracts the head redex of `head · args`, if any.
fn contract(head: &StdTerm, args: &mut Vec<StdTerm>) -> Option<StdTerm> {
    use StdLeaf::*;
    let StdTerm::Leaf(leaf) = head else { return None };
    let arity = match leaf {
        I => 1,
        K | W => 2,
        S | B | C => 3,
    };
    if args.len() < arity {
        return None;
    }
    let mut taken: Vec<StdTerm> = args.drain(..arity).collect();
    let z = if arity == 3 { taken.pop() } else { None };
    let y = if arity >= 2 { taken.pop() } else { None };
    let x = taken.pop().expect("arity at least one");
    let app = StdTerm::app;
    Some(match leaf {
        I => x,
        K => x,
        W => {
            let y = y.unwrap();
            app(app(x, y.clone()), y)
        }
        S => {
            let (y, z) = (y.unwrap(), z.unwrap());
            app(app(x, z.clone()), app(y, z))
        }
        B => app(x, app(y.unwrap(), z.unwrap())),
        C => app(app(x, z.unwrap()), y.unwrap()),
    })
}

fn normalize(t: StdTerm, fuel: &mut u64) -> Result<StdTerm, OutOfFuel> {
    let (mut head, mut args) = unspine(t);
    loop {
        // pending arguments are consumed from the front
        let mut rest = std::mem::take(&mut args);
        match contract(&head, &mut rest) {
            Some(reduct) => {
                if *fuel == 0 {
                    return Err(OutOfFuel);
                }
                *fuel -= 1;
                let (h, mut a) = unspine(reduct);
                a.extend(rest);
                head = h;
                args = a;
            }
            None => {
                args = rest;
                break;
            }
        }
    }
    let mut out = head;
    for a in args {
        out = StdTerm::app(out, normalize(a, fuel)?);
    }
    Ok(out)
}

/// Normal-order reduction to normal form with the rules of S, K, I, B, C
/// and W. Atoms are inert. Each contraction costs one unit of fuel.
pub fn cl_reduce(t: &StdTerm, fuel: u64) -> Result<StdTerm, OutOfFuel> {
    let mut fuel = fuel;
    normalize(t.clone(), &mut fuel)
}

// ---------------------------------------------------------------------------
// Program syntax

/// Whether a program is a linear term or a standard (lambda) term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Linear,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Mode(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// Parsed program, before translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Surface {
    Ident(String),
    Numeral(usize),
    Abs(String, Box<Surface>),
    App(Box<Surface>, Box<Surface>),
    Bang(Box<Surface>),
}

const LINEAR_ONLY: [&str; 9] = ["D", "delta", "F", "Dp", "Bs", "Cs", "Is", "Ks", "Ws"];
const SHARED: [&str; 5] = ["K", "I", "B", "C", "W"];

fn is_keyword(name: &str) -> bool {
    name == "S" || LINEAR_ONLY.contains(&name) || SHARED.contains(&name)
}

impl Surface {
    fn visit(&self, f: &mut impl FnMut(&Surface)) {
        f(self);
        match self {
            Surface::Abs(_, b) | Surface::Bang(b) => b.visit(f),
            Surface::App(g, a) => {
                g.visit(f);
                a.visit(f);
            }
            Surface::Ident(_) | Surface::Numeral(_) => {}
        }
    }

    /// The mode implied by the program's constructs: abstractions, numerals
    /// and `S` make it standard; `!` and linear-only leaves make it linear;
    /// otherwise `default` applies.
    pub fn mode(&self, default: Mode) -> Result<Mode, ProgramError> {
        let (mut standard, mut linear) = (None, None);
        self.visit(&mut |s| match s {
            Surface::Abs(x, _) => {
                standard.get_or_insert(format!("abstraction \\{x}"));
            }
            Surface::Numeral(n) => {
                standard.get_or_insert(format!("numeral #{n}"));
            }
            Surface::Ident(x) if x == "S" => {
                standard.get_or_insert("S".to_string());
            }
            Surface::Bang(_) => {
                linear.get_or_insert("!".to_string());
            }
            Surface::Ident(x) if LINEAR_ONLY.contains(&x.as_str()) => {
                linear.get_or_insert(x.clone());
            }
            _ => {}
        });
        match (standard, linear) {
            (Some(s), Some(l)) => Err(ProgramError::Mode(format!(
                "{s} needs a standard program but {l} needs a linear one"
            ))),
            (Some(_), None) => Ok(Mode::Standard),
            (None, Some(_)) if default == Mode::Standard => Err(ProgramError::Mode(
                "replication and linear-only combinators are not allowed in standard programs".into(),
            )),
            (None, Some(_)) => Ok(Mode::Linear),
            (None, None) => Ok(default),
        }
    }

    pub fn to_lambda(&self) -> Result<LambdaTerm, ProgramError> {
        Ok(match self {
            Surface::Ident(x) => match StdLeaf::from_name(x) {
                Some(l) => LambdaTerm::Const(StdTerm::Leaf(l)),
                None if is_keyword(x) => {
                    return Err(ProgramError::Mode(format!("{x} is not a standard combinator")))
                }
                None => LambdaTerm::Var(x.clone()),
            },
            Surface::Numeral(n) => LambdaTerm::Const(church(*n)),
            Surface::Abs(x, b) => LambdaTerm::Abs(x.clone(), Box::new(b.to_lambda()?)),
            Surface::App(f, a) => LambdaTerm::app(f.to_lambda()?, a.to_lambda()?),
            Surface::Bang(_) => return Err(ProgramError::Mode("`!` in a standard program".into())),
        })
    }

    pub fn to_linear(&self) -> Result<CombTerm, ProgramError> {
        let mut free = BTreeSet::new();
        self.visit(&mut |s| {
            if let Surface::Ident(x) = s {
                if !is_keyword(x) {
                    free.insert(x.clone());
                }
            }
        });
        if !free.is_empty() {
            return Err(CompileError::OpenTerm(free.into_iter().collect()).into());
        }
        self.linear()
    }

    fn linear(&self) -> Result<CombTerm, ProgramError> {
        Ok(match self {
            Surface::Ident(x) => match (Combinator::from_name(x), Derived::from_name(x)) {
                (Some(c), _) => CombTerm::Leaf(c),
                (None, Some(d)) if x != "S" => derived_term(d),
                _ => return Err(ProgramError::Mode(format!("{x} is not a linear combinator"))),
            },
            Surface::App(f, a) => CombTerm::app(f.linear()?, a.linear()?),
            Surface::Bang(a) => CombTerm::bang(a.linear()?),
            Surface::Abs(..) | Surface::Numeral(_) => {
                return Err(ProgramError::Mode("abstractions and numerals need a standard program".into()))
            }
        })
    }
}

/// A program ready for compilation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Linear(CombTerm),
    Standard(StdTerm),
}

impl Program {
    /// Parses and classifies a program; `default` decides programs using only
    /// `K I B C W` and application.
    pub fn parse(text: &str, default: Mode) -> Result<Program, ProgramError> {
        let surface = parse_surface(text)?;
        match surface.mode(default)? {
            Mode::Linear => Ok(Program::Linear(surface.to_linear()?)),
            Mode::Standard => Ok(Program::Standard(lambda_to_cl(&surface.to_lambda()?)?)),
        }
    }

    pub fn to_linear(&self) -> CombTerm {
        match self {
            Program::Linear(t) => t.clone(),
            Program::Standard(t) => std_to_linear(t).expect("closed by construction"),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, at: usize, message: impl Into<String>) -> ProgramError {
        let before = &self.text[..at];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ProgramError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = &self.text[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with("--") {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> char {
        let c = self.text[self.pos..].chars().next().expect("peeked");
        self.pos += c.len_utf8();
        c
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() => {}
            _ => return None,
        }
        let end = chars
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Some(rest[..end].to_string())
    }

    fn expr(&mut self) -> Result<Surface, ProgramError> {
        let mut head: Option<Surface> = None;
        loop {
            let arg = match self.peek() {
                Some('\\') | Some('λ') => Some(self.abstraction()?),
                Some(c) if c == '!' || c == '(' || c == '#' || c.is_ascii_alphabetic() => Some(self.unary()?),
                _ => None,
            };
            match (arg, head.take()) {
                (Some(a), None) => head = Some(a),
                (Some(a), Some(f)) => head = Some(Surface::App(Box::new(f), Box::new(a))),
                (None, Some(f)) => return Ok(f),
                (None, None) => {
                    let what = match self.peek() {
                        Some(c) => format!("unexpected `{c}`"),
                        None => "unexpected end of input".into(),
                    };
                    return Err(self.error(self.pos, format!("{what}, expected a term")));
                }
            }
        }
    }

    fn abstraction(&mut self) -> Result<Surface, ProgramError> {
        self.bump();
        let mut binders = Vec::new();
        loop {
            let at = self.pos;
            match self.ident() {
                Some(x) if is_keyword(&x) => return Err(self.error(at, format!("`{x}` cannot be bound"))),
                Some(x) => binders.push(x),
                None => break,
            }
        }
        if binders.is_empty() {
            return Err(self.error(self.pos, "expected a variable after `\\`"));
        }
        if self.peek() != Some('.') {
            return Err(self.error(self.pos, "expected `.`"));
        }
        self.bump();
        let body = self.expr()?;
        Ok(binders
            .into_iter()
            .rev()
            .fold(body, |b, x| Surface::Abs(x, Box::new(b))))
    }

    fn unary(&mut self) -> Result<Surface, ProgramError> {
        let at = self.pos;
        match self.peek() {
            Some('!') => {
                self.bump();
                if self.peek().is_none() {
                    return Err(self.error(self.pos, "expected a term after `!`"));
                }
                Ok(Surface::Bang(Box::new(self.unary()?)))
            }
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error(self.pos, "expected `)`"));
                }
                self.bump();
                Ok(e)
            }
            Some('#') => {
                self.bump();
                let rest = &self.text[self.pos..];
                let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
                let n = rest[..end]
                    .parse()
                    .map_err(|_| self.error(self.pos, "expected a natural number after `#`"))?;
                self.pos += end;
                Ok(Surface::Numeral(n))
            }
            Some('\\') | Some('λ') => self.abstraction(),
            _ => match self.ident() {
                Some(x) => Ok(Surface::Ident(x)),
                None => Err(self.error(at, "expected a term")),
            },
        }
    }
}

/// Parses the program syntax: `\x y. M` (or `λ`), left-associative
/// juxtaposition, prefix `!`, parentheses, combinator names, variables and
/// numerals `#n`. `--` starts a comment running to the end of the line.
pub fn parse_surface(text: &str) -> Result<Surface, ProgramError> {
    let mut p = Parser { text, pos: 0 };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(p.error(p.pos, format!("unexpected `{c}`")));
    }
    Ok(e)
}
