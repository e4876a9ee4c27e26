//! First-order terms over the fixed signature `{e/0, l/1, r/1, p/2}`,
//! substitutions, pattern matching and most-general unification.
//!
//! Terms share their subterms through [`Arc`], so cloning a term or binding a
//! variable to a subterm is constant time. Equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// A term over the signature, possibly containing variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Eps,
    L(Arc<Term>),
    R(Arc<Term>),
    P(Arc<Term>, Arc<Term>),
    Var(Arc<str>),
}

/// Top-level constructor of a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Eps,
    L,
    R,
    P,
    Var,
}

impl Term {
    pub fn eps() -> Term {
        Term::Eps
    }

    pub fn l(t: Term) -> Term {
        Term::L(Arc::new(t))
    }

    pub fn r(t: Term) -> Term {
        Term::R(Arc::new(t))
    }

    pub fn p(t: Term, u: Term) -> Term {
        Term::P(Arc::new(t), Arc::new(u))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn head(&self) -> Head {
        match self {
            Term::Eps => Head::Eps,
            Term::L(_) => Head::L,
            Term::R(_) => Head::R,
            Term::P(..) => Head::P,
            Term::Var(_) => Head::Var,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Eps => true,
            Term::L(t) | Term::R(t) => t.is_ground(),
            Term::P(t, u) => t.is_ground() && u.is_ground(),
            Term::Var(_) => false,
        }
    }

    /// True when no variable occurs more than once.
    pub fn is_linear(&self) -> bool {
        let occ = self.var_occurrences();
        let mut seen = std::collections::BTreeSet::new();
        occ.iter().all(|v| seen.insert(v.clone()))
    }

    /// Variables in left-to-right order of occurrence, with repetitions.
    pub fn var_occurrences(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Arc<str>> {
        let mut out: Vec<Arc<str>> = Vec::new();
        for v in self.var_occurrences() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    fn collect_vars(&self, out: &mut Vec<Arc<str>>) {
        match self {
            Term::Eps => {}
            Term::L(t) | Term::R(t) => t.collect_vars(out),
            Term::P(t, u) => {
                t.collect_vars(out);
                u.collect_vars(out);
            }
            Term::Var(v) => out.push(v.clone()),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Eps => false,
            Term::L(t) | Term::R(t) => t.contains_var(name),
            Term::P(t, u) => t.contains_var(name) || u.contains_var(name),
            Term::Var(v) => &**v == name,
        }
    }

    /// Height of the term tree; `e` and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Eps | Term::Var(_) => 0,
            Term::L(t) | Term::R(t) => 1 + t.depth(),
            Term::P(t, u) => 1 + t.depth().max(u.depth()),
        }
    }

    /// Number of nodes, variables included.
    pub fn size(&self) -> usize {
        match self {
            Term::Eps | Term::Var(_) => 1,
            Term::L(t) | Term::R(t) => 1 + t.size(),
            Term::P(t, u) => 1 + t.size() + u.size(),
        }
    }

    /// Number of non-variable nodes.
    pub fn constructor_count(&self) -> usize {
        match self {
            Term::Eps => 1,
            Term::Var(_) => 0,
            Term::L(t) | Term::R(t) => 1 + t.constructor_count(),
            Term::P(t, u) => 1 + t.constructor_count() + u.constructor_count(),
        }
    }

    /// Renames every variable through `f`.
    pub fn rename(&self, f: &mut impl FnMut(&Arc<str>) -> Arc<str>) -> Term {
        match self {
            Term::Eps => Term::Eps,
            Term::L(t) => Term::l(t.rename(f)),
            Term::R(t) => Term::r(t.rename(f)),
            Term::P(t, u) => {
                let t = t.rename(f);
                Term::p(t, u.rename(f))
            }
            Term::Var(v) => Term::Var(f(v)),
        }
    }

    /// The immediate argument of an `l` or `r` term.
    pub fn unary_arg(&self) -> Option<&Term> {
        match self {
            Term::L(t) | Term::R(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Eps => f.write_str("e"),
            Term::L(t) => write!(f, "l({t})"),
            Term::R(t) => write!(f, "r({t})"),
            Term::P(t, u) => write!(f, "p({t},{u})"),
            Term::Var(v) => f.write_str(v),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Short-hand constructors, mostly for tests and rule tables.
pub mod build {
    use super::Term;

    pub fn e() -> Term {
        Term::Eps
    }
    pub fn l(t: Term) -> Term {
        Term::l(t)
    }
    pub fn r(t: Term) -> Term {
        Term::r(t)
    }
    pub fn p(t: Term, u: Term) -> Term {
        Term::p(t, u)
    }
    pub fn v(name: &str) -> Term {
        Term::var(name)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("term parse error at byte {pos}: {message}")]
pub struct TermParseError {
    pub pos: usize,
    pub message: String,
}

/// Returns true for identifiers usable as variable names.
pub fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '\'')
        && !matches!(s, "e" | "l" | "r" | "p")
}

pub(crate) struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TermParser<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        TermParser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> TermParseError {
        TermParseError {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), TermParseError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn ident(&mut self) -> Result<&'a str, TermParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_lowercase() || (self.pos > start && (c.is_ascii_digit() || c == b'_' || c == b'\'')) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.err("expected a term"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii"))
    }

    pub(crate) fn term(&mut self) -> Result<Term, TermParseError> {
        let word = self.ident()?;
        match word {
            "e" => Ok(Term::Eps),
            "l" | "r" => {
                self.expect(b'(')?;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(if word == "l" { Term::l(t) } else { Term::r(t) })
            }
            "p" => {
                self.expect(b'(')?;
                let t = self.term()?;
                self.expect(b',')?;
                let u = self.term()?;
                self.expect(b')')?;
                Ok(Term::p(t, u))
            }
            name => Ok(Term::var(name)),
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }
}

impl FromStr for Term {
    type Err = TermParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = TermParser::new(s);
        let t = parser.term()?;
        if !parser.at_end() {
            return Err(parser.err("trailing input"));
        }
        Ok(t)
    }
}

// ---------------------------------------------------------------------------
// Substitutions

/// A finite map from variable names to terms, applied simultaneously.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Arc<str>, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(name: &str, t: Term) -> Self {
        let mut s = Self::new();
        s.insert(name, t);
        s
    }

    pub fn insert(&mut self, name: &str, t: Term) -> Option<Term> {
        self.map.insert(Arc::from(name), t)
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.map.get(name)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.map.iter().map(|(k, v)| (&**k, v))
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        match t {
            Term::Eps => Term::Eps,
            Term::L(a) => Term::l(self.apply(a)),
            Term::R(a) => Term::r(self.apply(a)),
            Term::P(a, b) => Term::p(self.apply(a), self.apply(b)),
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
        }
    }

    /// Keeps only the bindings for the given variables.
    pub fn restrict(&self, vars: &[Arc<str>]) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| vars.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// The substitution that applies `self` first and then `next`.
    pub fn then(&self, next: &Substitution) -> Substitution {
        let mut map: BTreeMap<Arc<str>, Term> =
            self.map.iter().map(|(k, v)| (k.clone(), next.apply(v))).collect();
        for (k, v) in &next.map {
            map.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Substitution { map }
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} -> {v}")?;
        }
        f.write_str("}")
    }
}

impl<'a> FromIterator<(&'a str, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (&'a str, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (k, v) in iter {
            s.insert(k, v);
        }
        s
    }
}

pub fn apply_subst(s: &Substitution, t: &Term) -> Term {
    s.apply(t)
}

// ---------------------------------------------------------------------------
// Unification and matching

/// Most general unifier with occurs-check. The result is idempotent.
pub fn unify(t: &Term, u: &Term) -> Option<Substitution> {
    let mut subst = Substitution::new();
    let mut work = vec![(t.clone(), u.clone())];
    while let Some((a, b)) = work.pop() {
        let a = subst.apply(&a);
        let b = subst.apply(&b);
        if a == b {
            continue;
        }
        match (a, b) {
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if other.contains_var(&x) {
                    return None;
                }
                let single = Substitution::singleton(&x, other.clone());
                for v in subst.map.values_mut() {
                    *v = single.apply(v);
                }
                subst.map.insert(x, other);
            }
            (Term::L(a1), Term::L(b1)) | (Term::R(a1), Term::R(b1)) => {
                work.push(((*a1).clone(), (*b1).clone()));
            }
            (Term::P(a1, a2), Term::P(b1, b2)) => {
                work.push(((*a2).clone(), (*b2).clone()));
                work.push(((*a1).clone(), (*b1).clone()));
            }
            _ => return None,
        }
    }
    Some(subst)
}

/// Unifiability of two terms after renaming their variables apart.
pub fn unifiable_apart(t: &Term, u: &Term) -> bool {
    let t = t.rename(&mut |v| Arc::from(format!("{v}#0")));
    let u = u.rename(&mut |v| Arc::from(format!("{v}#1")));
    unify(&t, &u).is_some()
}

/// One-way matching of a pattern against a subject.
pub fn match_pattern(pattern: &Term, subject: &Term) -> Option<Substitution> {
    match_pattern_counted(pattern, subject).0
}

/// Like [`match_pattern`], also returning how many pattern constructors were
/// compared against the subject. The count never exceeds
/// `pattern.constructor_count()`, whatever the size of the subject.
pub fn match_pattern_counted(pattern: &Term, subject: &Term) -> (Option<Substitution>, usize) {
    let mut subst = Substitution::new();
    let mut inspected = 0;
    let ok = match_into(pattern, subject, &mut subst, &mut inspected);
    (ok.then_some(subst), inspected)
}

fn match_into(pat: &Term, sub: &Term, s: &mut Substitution, inspected: &mut usize) -> bool {
    match pat {
        Term::Var(v) => match s.map.get(v) {
            // only reachable for non-linear patterns
            Some(bound) => bound == sub,
            None => {
                s.map.insert(v.clone(), sub.clone());
                true
            }
        },
        _ => {
            *inspected += 1;
            match (pat, sub) {
                (Term::Eps, Term::Eps) => true,
                (Term::L(a), Term::L(b)) | (Term::R(a), Term::R(b)) => match_into(a, b, s, inspected),
                (Term::P(a1, a2), Term::P(b1, b2)) => {
                    match_into(a1, b1, s, inspected) && match_into(a2, b2, s, inspected)
                }
                _ => false,
            }
        }
    }
}

/// Counter-based supply of fresh variable names.
#[derive(Debug, Clone)]
pub struct FreshNames {
    prefix: String,
    next: usize,
}

impl FreshNames {
    pub fn new(prefix: &str) -> Self {
        FreshNames {
            prefix: prefix.to_string(),
            next: 0,
        }
    }

    pub fn fresh(&mut self) -> Arc<str> {
        let name = format!("{}{}", self.prefix, self.next);
        self.next += 1;
        Arc::from(name)
    }
}

/// All ground terms of depth at most `depth`, in a deterministic order.
/// There are 1, 4, 25, 676, 458329 terms for depths 0..=4.
pub fn ground_terms(depth: usize) -> Vec<Term> {
    let mut terms = vec![Term::Eps];
    for _ in 0..depth {
        let shared: Vec<Arc<Term>> = terms.iter().cloned().map(Arc::new).collect();
        let mut next = Vec::with_capacity(1 + 2 * shared.len() + shared.len() * shared.len());
        next.push(Term::Eps);
        next.extend(shared.iter().map(|t| Term::L(t.clone())));
        next.extend(shared.iter().map(|t| Term::R(t.clone())));
        for a in &shared {
            for b in &shared {
                next.push(Term::P(a.clone(), b.clone()));
            }
        }
        terms = next;
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    fn t(s: &str) -> Term {
        s.parse().unwrap()
    }

    #[test]
    fn apply_subst_examples() {
        let s = Substitution::singleton("x", r(e()));
        assert_eq!(s.apply(&l(v("x"))), t("l(r(e))"));
        assert_eq!(Substitution::new().apply(&t("p(e,x)")), t("p(e,x)"));
        let s: Substitution = [("x", e()), ("y", l(e()))].into_iter().collect();
        assert_eq!(s.apply(&t("p(x,p(y,x))")), t("p(e,p(l(e),e))"));
    }

    #[test]
    fn unify_examples() {
        let s = unify(&t("l(x)"), &t("l(r(e))")).unwrap();
        assert_eq!(s, Substitution::singleton("x", t("r(e)")));
        assert!(unify(&t("l(x)"), &t("r(y)")).is_none());

        let (a, b) = (t("p(x,l(y))"), t("p(r(z),w)"));
        let s = unify(&a, &b).unwrap();
        assert_eq!(s.apply(&a), s.apply(&b));
        assert_eq!(s.get("x"), Some(&t("r(z)")));
        assert_eq!(s.get("w"), Some(&t("l(y)")));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn unify_occurs_check() {
        assert!(unify(&t("x"), &t("l(x)")).is_none());
        assert!(unify(&t("p(x,y)"), &t("p(y,r(x))")).is_none());
    }

    #[test]
    fn unify_is_idempotent_on_chains() {
        let s = unify(&t("p(x,p(y,z))"), &t("p(y,p(z,l(e)))")).unwrap();
        let a = s.apply(&t("p(x,p(y,z))"));
        assert_eq!(s.apply(&a), a);
        assert!(a.is_ground());
    }

    #[test]
    fn match_examples() {
        assert_eq!(
            match_pattern(&t("l(x)"), &t("l(e)")),
            Some(Substitution::singleton("x", e()))
        );
        assert_eq!(
            match_pattern(&t("l(p(e,x))"), &t("l(p(e,r(e)))")),
            Some(Substitution::singleton("x", t("r(e)")))
        );
        assert_eq!(match_pattern(&t("r(r(x))"), &t("r(l(e))")), None);
    }

    #[test]
    fn match_cost_is_bounded_by_pattern() {
        let pat = t("l(p(e,x))");
        let mut big = e();
        for _ in 0..200 {
            big = p(big.clone(), l(big));
        }
        let subject = l(p(e(), big));
        let (m, n) = match_pattern_counted(&pat, &subject);
        assert!(m.is_some());
        assert!(n <= pat.constructor_count());
    }

    #[test]
    fn parse_and_print() {
        let s = " p( l(x) ,r( e )) ";
        let term = t(s);
        assert_eq!(term.to_string(), "p(l(x),r(e))");
        assert_eq!(t(&term.to_string()), term);
        assert!("l(".parse::<Term>().is_err());
        assert!("p(e)".parse::<Term>().is_err());
        assert!("l(e) e".parse::<Term>().is_err());
        assert!("X".parse::<Term>().is_err());
        assert_eq!(t("lx"), v("lx"));
    }

    #[test]
    fn linearity_and_groundness() {
        assert!(t("p(x,y)").is_linear());
        assert!(!t("p(x,x)").is_linear());
        assert!(t("p(e,l(e))").is_ground());
        assert!(!t("p(e,l(x))").is_ground());
    }

    #[test]
    fn ground_term_counts() {
        let counts: Vec<usize> = (0..=3).map(|d| ground_terms(d).len()).collect();
        assert_eq!(counts, vec![1, 4, 25, 676]);
        assert!(ground_terms(3).iter().all(|t| t.is_ground() && t.depth() <= 3));
    }

    #[test]
    fn then_composes() {
        let s = Substitution::singleton("x", t("l(y)"));
        let r2 = Substitution::singleton("y", e());
        let c = s.then(&r2);
        let term = t("p(x,y)");
        assert_eq!(c.apply(&term), r2.apply(&s.apply(&term)));
    }
}
