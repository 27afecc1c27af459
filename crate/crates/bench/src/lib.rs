//! Shared inputs for the benchmarks.

use hypernet::corpus::{programs, TermGen};
use hypernet::{translate_untyped, Hypernet, Term};

/// A corpus program by name.
pub fn program(name: &str) -> Term {
    programs().into_iter().find(|(n, _)| *n == name).map(|(_, t)| t).expect("known program")
}

pub fn program_graph(name: &str) -> Hypernet {
    translate_untyped(&program(name))
}

/// Seeded closed terms, fixed across runs.
pub fn closed_terms(n: usize, depth: usize) -> Vec<Term> {
    TermGen::new(1).closed_terms(n, depth)
}

/// Seeded straight-line programs with their input names.
pub fn straight_lines(n: usize) -> Vec<(Vec<String>, Term)> {
    let mut g = TermGen::new(2);
    (0..n).map(|i| g.straight_line(1 + i % 3, 6)).collect()
}
