//! The eight linear combinators as partial involutions and automata, the
//! standard combinators derived from them, Church numerals and booleans.

use std::fmt;
use std::sync::OnceLock;

use crate::algebra::{description_to_automaton, InvolutionDescription};
use crate::automata::Automaton;
use crate::compiler::{std_to_linear, CombTerm, StdLeaf, StdTerm};
use crate::terms::Term;

/// Base combinators of a linear combinatory algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Combinator {
    B,
    C,
    I,
    K,
    D,
    Delta,
    F,
    W,
}

impl Combinator {
    pub const ALL: [Combinator; 8] = [
        Combinator::B,
        Combinator::C,
        Combinator::I,
        Combinator::K,
        Combinator::D,
        Combinator::Delta,
        Combinator::F,
        Combinator::W,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Combinator::B => "B",
            Combinator::C => "C",
            Combinator::I => "I",
            Combinator::K => "K",
            Combinator::D => "D",
            Combinator::Delta => "delta",
            Combinator::F => "F",
            Combinator::W => "W",
        }
    }

    pub fn from_name(name: &str) -> Option<Combinator> {
        Combinator::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Number of `t <-> u` pairs in the description.
    pub fn pair_count(self) -> usize {
        base_description(self).len()
    }
}

impl fmt::Display for Combinator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn rule_text(c: Combinator) -> &'static str {
    match c {
        Combinator::I => "l(x) <-> r(x)",
        Combinator::K => "l(x) <-> r(r(x))",
        Combinator::B => {
            "l(r(x)) <-> r(r(r(x)))
             l(l(x)) <-> r(l(r(x)))
             r(l(l(x))) <-> r(r(l(x)))"
        }
        Combinator::C => {
            "l(l(x)) <-> r(r(l(x)))
             l(r(l(x))) <-> r(l(x))
             l(r(r(x))) <-> r(r(r(x)))"
        }
        Combinator::D => "l(p(e,x)) <-> r(x)",
        Combinator::Delta => "l(p(p(x,y),z)) <-> r(p(x,p(y,z)))",
        Combinator::F => {
            "l(p(x,r(y))) <-> r(r(p(x,y)))
             l(p(x,l(y))) <-> r(l(p(x,y)))"
        }
        Combinator::W => {
            "r(r(x)) <-> l(r(r(x)))
             l(l(p(x,y))) <-> r(l(p(l(x),y)))
             l(r(l(p(x,y)))) <-> r(l(p(r(x),y)))"
        }
    }
}

fn descriptions() -> &'static [InvolutionDescription; 8] {
    static CELL: OnceLock<[InvolutionDescription; 8]> = OnceLock::new();
    CELL.get_or_init(|| {
        Combinator::ALL.map(|c| {
            rule_text(c)
                .parse()
                .unwrap_or_else(|e| panic!("rule set of {c} is well-defined: {e}"))
        })
    })
}

pub fn base_description(c: Combinator) -> InvolutionDescription {
    descriptions()[c as usize].clone()
}

/// Two-state automaton realizing the combinator, states `qi` and `qf`.
pub fn base_automaton(c: Combinator) -> Automaton {
    description_to_automaton(&descriptions()[c as usize], c.name())
}

/// The same automaton with its two states labelled `{label}.i` and
/// `{label}.f`.
pub fn base_automaton_labelled(c: Combinator, label: &str) -> Automaton {
    let a = base_automaton(c);
    Automaton::new(
        c.name(),
        vec![format!("{label}.i"), format!("{label}.f")],
        a.initial(),
        a.final_state(),
        a.rules().to_vec(),
    )
    .expect("valid state labels")
}

/// The "linear version" of K, `r(r(x)) <-> l(x)`.
pub fn linear_k_description() -> InvolutionDescription {
    InvolutionDescription::new(vec![(Term::r(Term::r(Term::var("x"))), Term::l(Term::var("x")))])
        .expect("single pair")
}

/// Combinators defined in terms of the base ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Derived {
    Dprime,
    Bs,
    Cs,
    Is,
    Ks,
    Ws,
    S,
    True,
    False,
}

impl Derived {
    pub const ALL: [Derived; 9] = [
        Derived::Dprime,
        Derived::Bs,
        Derived::Cs,
        Derived::Is,
        Derived::Ks,
        Derived::Ws,
        Derived::S,
        Derived::True,
        Derived::False,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Derived::Dprime => "Dp",
            Derived::Bs => "Bs",
            Derived::Cs => "Cs",
            Derived::Is => "Is",
            Derived::Ks => "Ks",
            Derived::Ws => "Ws",
            Derived::S => "S",
            Derived::True => "TRUE",
            Derived::False => "FALSE",
        }
    }

    pub fn from_name(name: &str) -> Option<Derived> {
        Derived::ALL.into_iter().find(|d| d.name() == name)
    }
}

impl fmt::Display for Derived {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn leaf(c: Combinator) -> CombTerm {
    CombTerm::Leaf(c)
}

fn app(f: CombTerm, a: CombTerm) -> CombTerm {
    CombTerm::app(f, a)
}

fn sapp(f: StdTerm, a: StdTerm) -> StdTerm {
    StdTerm::app(f, a)
}

fn dprime() -> CombTerm {
    use Combinator::*;
    // C·(B·B·I)·(B·D·I)
    app(
        app(leaf(C), app(app(leaf(B), leaf(B)), leaf(I))),
        app(app(leaf(B), leaf(D)), leaf(I)),
    )
}

/// The standard-level definition of S, K-free:
/// `S = B·(B·(B·W)·C)·(B·B)`.
pub fn s_definition() -> StdTerm {
    use StdLeaf::*;
    let l = StdTerm::Leaf;
    sapp(
        sapp(l(B), sapp(sapp(l(B), sapp(l(B), l(W))), l(C))),
        sapp(l(B), l(B)),
    )
}

/// Standard-level definition, for the derived names that have one.
pub fn standard_definition(d: Derived) -> Option<StdTerm> {
    match d {
        Derived::S => Some(s_definition()),
        Derived::True => Some(StdTerm::Leaf(StdLeaf::K)),
        Derived::False => Some(sapp(StdTerm::Leaf(StdLeaf::K), StdTerm::Leaf(StdLeaf::I))),
        _ => None,
    }
}

/// The closed linear term of a derived combinator, expanded down to base
/// leaves.
pub fn derived_term(d: Derived) -> CombTerm {
    use Combinator::*;
    match d {
        Derived::Dprime => dprime(),
        // C·(B·(B·B·B)·(D′·I))·(C·((B·B)·F)·δ)
        Derived::Bs => app(
            app(
                leaf(C),
                app(
                    app(leaf(B), app(app(leaf(B), leaf(B)), leaf(B))),
                    app(dprime(), leaf(I)),
                ),
            ),
            app(app(leaf(C), app(app(leaf(B), leaf(B)), leaf(F))), leaf(Delta)),
        ),
        Derived::Cs => app(dprime(), leaf(C)),
        Derived::Is => app(dprime(), leaf(I)),
        Derived::Ks => app(dprime(), leaf(K)),
        Derived::Ws => app(dprime(), leaf(W)),
        Derived::S | Derived::True | Derived::False => {
            std_to_linear(&standard_definition(d).expect("standard-level definition"))
                .expect("closed definition")
        }
    }
}

/// `(S·B)^n · (K·I)`, right-nested.
pub fn church(n: usize) -> StdTerm {
    use StdLeaf::*;
    let sb = || sapp(StdTerm::Leaf(S), StdTerm::Leaf(B));
    let mut t = sapp(StdTerm::Leaf(K), StdTerm::Leaf(I));
    for _ in 0..n {
        t = sapp(sb(), t);
    }
    t
}

pub fn true_term() -> StdTerm {
    StdTerm::Leaf(StdLeaf::K)
}

pub fn false_term() -> StdTerm {
    sapp(StdTerm::Leaf(StdLeaf::K), StdTerm::Leaf(StdLeaf::I))
}
