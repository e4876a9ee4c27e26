//! Decoding booleans and Church numerals from compiled automata by repeated
//! forward runs.

use std::fmt;

use crate::automata::{Automaton, RunOutcome};
use crate::terms::Term;

/// The first probe of every readout, `r(r(e))`.
pub fn initial_probe() -> Term {
    Term::r(Term::r(Term::eps()))
}

/// Result of [`read_bool`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolReadout {
    Value(bool),
    Nonterminating(RunOutcome),
    /// The run got stuck, answered with a term of an unexpected shape, or hit
    /// an ambiguous step.
    Malformed(Malformed),
}

/// The probe that went wrong and what came back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Malformed {
    pub probe: Term,
    pub outcome: Option<RunOutcome>,
}

impl fmt::Display for Malformed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Some(RunOutcome::Success { output, .. }) => {
                write!(f, "probe {} answered {}", self.probe, output)
            }
            Some(RunOutcome::Stuck { at, .. }) => write!(f, "probe {} stuck at {}", self.probe, at.term),
            Some(RunOutcome::OutOfFuel { .. }) => write!(f, "probe {} ran out of fuel", self.probe),
            None => write!(f, "probe {} hit an ambiguous step", self.probe),
        }
    }
}

/// Runs `a` on `r(r(e))`: an answer `l(u)` means true, `r(v)` false.
pub fn read_bool(a: &Automaton, fuel: u64) -> BoolReadout {
    let probe = initial_probe();
    let outcome = match a.run(&probe, fuel) {
        Ok(o) => o,
        Err(_) => return BoolReadout::Malformed(Malformed { probe, outcome: None }),
    };
    match &outcome {
        RunOutcome::Success { output: Term::L(_), .. } => BoolReadout::Value(true),
        RunOutcome::Success { output: Term::R(_), .. } => BoolReadout::Value(false),
        RunOutcome::OutOfFuel { .. } => BoolReadout::Nonterminating(outcome),
        _ => BoolReadout::Malformed(Malformed {
            probe,
            outcome: Some(outcome),
        }),
    }
}

/// Result of [`read_numeral`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumeralReadout {
    Value(usize),
    Nonterminating { probes: usize, outcome: RunOutcome },
    Malformed(Malformed),
    /// More than `max_n` successor answers.
    ExceedsBound(usize),
}

/// Copy tag used for the `k`-th nested probe (`k >= 1`).
pub fn probe_tag(_k: usize) -> Term {
    Term::eps()
}

/// Reads a Church numeral by a dialogue of probes.
///
/// The first probe is `r(r(e))`. An answer `r(l(u))` ends the dialogue with
/// the number of successor answers seen so far. A successor answer
/// `l(p(u, r(v)))` is followed by the probe `l(p(u, l(p(tag, v))))`, with
/// the tag from [`probe_tag`].
pub fn read_numeral(a: &Automaton, fuel: u64, max_n: usize) -> NumeralReadout {
    let mut probe = initial_probe();
    let mut count = 0;
    loop {
        let outcome = match a.run(&probe, fuel) {
            Ok(o) => o,
            Err(_) => return NumeralReadout::Malformed(Malformed { probe, outcome: None }),
        };
        let next = match &outcome {
            RunOutcome::Success { output, .. } => match output {
                Term::R(inner) if matches!(**inner, Term::L(_)) => return NumeralReadout::Value(count),
                Term::L(inner) => match &**inner {
                    Term::P(u, rv) => match &**rv {
                        Term::R(v) => Some(Term::l(Term::P(
                            u.clone(),
                            std::sync::Arc::new(Term::l(Term::p(probe_tag(count + 1), (**v).clone()))),
                        ))),
                        _ => None,
                    },
                    _ => None,
                },
                _ => None,
            },
            RunOutcome::OutOfFuel { .. } => {
                return NumeralReadout::Nonterminating {
                    probes: count + 1,
                    outcome,
                }
            }
            RunOutcome::Stuck { .. } => None,
        };
        match next {
            Some(_) if count == max_n => return NumeralReadout::ExceedsBound(max_n),
            Some(p) => {
                count += 1;
                probe = p;
            }
            None => {
                return NumeralReadout::Malformed(Malformed {
                    probe,
                    outcome: Some(outcome),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinators::{base_automaton, church, false_term, true_term, Combinator};
    use crate::compiler::{compile, std_to_linear};
    use crate::automata::AutomatonBuilder;

    const FUEL: u64 = 1_000_000;

    #[test]
    fn k_reads_true() {
        assert_eq!(read_bool(&base_automaton(Combinator::K), FUEL), BoolReadout::Value(true));
    }

    #[test]
    fn compiled_booleans() {
        let t = compile(&std_to_linear(&true_term()).unwrap());
        let f = compile(&std_to_linear(&false_term()).unwrap());
        assert_eq!(read_bool(&t, FUEL), BoolReadout::Value(true));
        assert_eq!(read_bool(&f, FUEL), BoolReadout::Value(false));
    }

    #[test]
    fn empty_automaton_is_malformed() {
        let mut b = AutomatonBuilder::new("empty");
        let (qi, qf) = (b.state("qi"), b.state("qf"));
        let a = b.build(qi, qf).unwrap();
        match read_bool(&a, FUEL) {
            BoolReadout::Malformed(m) => {
                assert!(matches!(m.outcome, Some(RunOutcome::Stuck { .. })));
                assert_eq!(m.to_string(), "probe r(r(e)) stuck at r(r(e))");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_numeral(&a, FUEL, 5), NumeralReadout::Malformed(_)));
    }

    #[test]
    fn fuel_exhaustion_is_nontermination() {
        let t = compile(&std_to_linear(&true_term()).unwrap());
        assert!(matches!(read_bool(&t, 3), BoolReadout::Nonterminating(_)));
        let two = compile(&std_to_linear(&church(2)).unwrap());
        assert!(matches!(read_numeral(&two, 3, 5), NumeralReadout::Nonterminating { probes: 1, .. }));
    }

    #[test]
    fn small_numerals() {
        for n in 0..3 {
            let a = compile(&std_to_linear(&church(n)).unwrap());
            assert_eq!(read_numeral(&a, FUEL, 5), NumeralReadout::Value(n));
        }
    }

    #[test]
    fn numeral_bound() {
        let a = compile(&std_to_linear(&church(2)).unwrap());
        assert_eq!(read_numeral(&a, FUEL, 2), NumeralReadout::Value(2));
        assert_eq!(read_numeral(&a, FUEL, 1), NumeralReadout::ExceedsBound(1));
    }

    #[test]
    fn shape_mismatch_is_malformed() {
        // K answers l(e) to the first probe
        assert!(matches!(
            read_numeral(&base_automaton(Combinator::K), FUEL, 5),
            NumeralReadout::Malformed(_)
        ));
        assert!(matches!(
            read_numeral(&base_automaton(Combinator::I), FUEL, 5),
            NumeralReadout::Malformed(_)
        ));
    }
}
