//! Reversible pattern-matching automata for combinatory logic.
//!
//! Terms over `e`, `l`, `r`, `p` ([`terms`]) are rewritten by automata whose
//! rules match and build such terms ([`automata`]). Replication and linear
//! application ([`algebra`]) assemble base combinator automata
//! ([`combinators`]) into automata for whole programs ([`compiler`]), whose
//! results are decoded by [`readout`].

pub mod algebra;
pub mod automata;
pub mod combinators;
pub mod compiler;
pub mod readout;
pub mod terms;

pub use algebra::{bang_automaton, lapp_automaton, oracle_compare, InvolutionDescription};
pub use automata::{dual, Automaton, Eval, RunOutcome, Trace, DEFAULT_FUEL};
pub use combinators::{base_automaton, church, Combinator};
pub use compiler::{cl_reduce, compile, std_to_linear, CombTerm, Program, StdTerm};
pub use readout::{read_bool, read_numeral, BoolReadout, NumeralReadout};
pub use terms::Term;
