//! Compositional reachability checking for 1-bounded Petri nets.
//!
//! A closed net is decomposed into nets with boundaries, each component is
//! translated into a boundary-labelled automaton, and the components are
//! recombined with two product constructions, closing and minimising at every
//! step so that only each component's boundary protocol survives. Memoisation
//! of the minimised automata exploits repetitive net structure: checking a
//! long chain of identical cells costs a handful of distinct minimisations.
//!
//! The crate is organised along the pipeline:
//!
//! * [`net`] — nets with boundaries, step semantics, and the two composition
//!   operations,
//! * [`automata`] — boundary-labelled automata, products, weak closure and
//!   minimisation over set-valued decision diagrams ([`dd`]),
//! * [`wiring`] — wiring expressions and their memoised evaluation,
//! * [`decompose`] — automatic decomposition of flat nets,
//! * [`generators`] — the benchmark families,
//! * [`oracle`] — an explicit-state reference checker,
//! * [`io`] — file formats and everything the CLI needs.

pub mod automata;
pub mod bits;
pub mod dd;
pub mod decompose;
pub mod generators;
pub mod io;
pub mod net;
pub mod oracle;
pub mod wiring;

#[cfg(test)]
pub(crate) mod testutil;
