#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revm_core::algebra::InvolutionDescription;
use revm_core::automata::{Automaton, Eval};
use revm_core::combinators::Combinator;
use revm_core::compiler::{compile, CombTerm, Mode, Program};
use revm_core::terms::Term;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn linear(text: &str) -> CombTerm {
    Program::parse(text, Mode::Linear)
        .unwrap_or_else(|e| panic!("{text}: {e}"))
        .to_linear()
}

pub fn compiled(text: &str) -> Automaton {
    compile(&linear(text))
}

/// Closed linear arguments used to instantiate laws.
pub const ARGUMENTS: [&str; 6] = ["I", "K", "W", "D !I", "K I", "F !C"];

pub fn random_leaf(rng: &mut impl Rng) -> CombTerm {
    CombTerm::Leaf(*Combinator::ALL.choose(rng).unwrap())
}

/// A random closed linear term with at most `max_leaves` leaves.
pub fn random_comb_term(rng: &mut impl Rng, max_leaves: usize) -> CombTerm {
    if max_leaves <= 1 {
        return match rng.gen_range(0..4) {
            0 => CombTerm::bang(random_leaf(rng)),
            _ => random_leaf(rng),
        };
    }
    match rng.gen_range(0..6) {
        0 => random_leaf(rng),
        1 => CombTerm::bang(random_comb_term(rng, max_leaves)),
        _ => {
            let left = rng.gen_range(1..max_leaves);
            CombTerm::app(
                random_comb_term(rng, left),
                random_comb_term(rng, max_leaves - left),
            )
        }
    }
}

pub fn random_ground_term(rng: &mut impl Rng, depth: usize) -> Term {
    if depth == 0 {
        return Term::eps();
    }
    match rng.gen_range(0..4) {
        0 => Term::eps(),
        1 => Term::l(random_ground_term(rng, depth - 1)),
        2 => Term::r(random_ground_term(rng, depth - 1)),
        _ => Term::p(random_ground_term(rng, depth - 1), random_ground_term(rng, depth - 1)),
    }
}

/// A random linear term over the given variables, each used exactly once.
fn random_linear_term(rng: &mut impl Rng, vars: &[String], depth: usize) -> Term {
    match vars.len() {
        0 if depth == 0 || rng.gen_bool(0.3) => Term::eps(),
        1 if depth == 0 || rng.gen_bool(0.4) => Term::var(&vars[0]),
        _ if depth == 0 => {
            // too shallow to place several variables: pair them up
            let mid = vars.len() / 2;
            Term::p(
                random_linear_term(rng, &vars[..mid], 0),
                random_linear_term(rng, &vars[mid..], 0),
            )
        }
        _ => match rng.gen_range(0..3) {
            0 => Term::l(random_linear_term(rng, vars, depth - 1)),
            1 => Term::r(random_linear_term(rng, vars, depth - 1)),
            _ => {
                let cut = rng.gen_range(0..=vars.len());
                Term::p(
                    random_linear_term(rng, &vars[..cut], depth - 1),
                    random_linear_term(rng, &vars[cut..], depth - 1),
                )
            }
        },
    }
}

/// A random well-defined description with up to `max_pairs` pairs.
pub fn random_description(rng: &mut impl Rng, max_pairs: usize) -> InvolutionDescription {
    let target = rng.gen_range(1..=max_pairs);
    let mut pairs: Vec<(Term, Term)> = Vec::new();
    for attempt in 0..50 {
        if pairs.len() == target {
            break;
        }
        let nvars = rng.gen_range(0..3);
        let vars: Vec<String> = (0..nvars).map(|k| format!("x{attempt}_{k}")).collect();
        let mut shuffled = vars.clone();
        shuffled.shuffle(rng);
        let t = random_linear_term(rng, &vars, 3);
        let u = random_linear_term(rng, &shuffled, 3);
        let mut candidate = pairs.clone();
        candidate.push((t, u));
        if InvolutionDescription::new(candidate.clone()).is_ok() {
            pairs = candidate;
        }
    }
    InvolutionDescription::new(pairs).expect("kept only well-defined extensions")
}

/// Outcome of comparing two automata pointwise.
#[derive(Debug, Default, Clone)]
pub struct Comparison {
    pub agree: usize,
    /// Both sides ran out of fuel.
    pub inconclusive: usize,
    pub mismatches: Vec<(Term, Eval, Eval)>,
}

impl Comparison {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares two automata on every input. Stuck counts as a converged,
/// undefined result; a mismatch wherever either side converges fails.
pub fn compare_extensionally(a: &Automaton, b: &Automaton, inputs: &[Term], fuel: u64) -> Comparison {
    let mut out = Comparison::default();
    for t in inputs {
        let x = a.apply(t, fuel).expect("deterministic");
        let y = b.apply(t, fuel).expect("deterministic");
        match (&x, &y) {
            (Eval::OutOfFuel, Eval::OutOfFuel) => out.inconclusive += 1,
            _ if x == y => out.agree += 1,
            _ => out.mismatches.push((t.clone(), x, y)),
        }
    }
    out
}
