//! Counting, analysis and minimization of monochromatic Schur triples in
//! colorings of the integer interval `[1, n]`.
//!
//! A Schur triple here is `{i, j, i + j}` with `1 <= i < j` and `i + j <= n`.
//! For 2-colorings the number of monochromatic triples is the objective `F`
//! over the hypercube `{0,1}^n`; `G` is an `O(n)`-shifted surrogate whose
//! discrete partial derivatives give a threshold recurrence ("ping-pong")
//! that every Hamming local minimum of `G` must satisfy.
//!
//! Module map:
//!
//! * [`coloring`]: colorings, text formats and the extremal block families.
//! * [`counting`]: exact triple counts, `F` and `G`.
//! * [`calculus`]: flip differences, their closed forms, local-minimum certificates.
//! * [`pingpong`]: enumeration of recurrence solutions and case classification.
//! * [`search`]: bit-flip descent, multistart and exhaustive oracles.
//! * [`cli`]: the `schur` command line.

pub mod calculus;
pub mod cli;
pub mod coloring;
pub mod counting;
mod error;
mod fenwick;
mod halfint;
mod ntt;
pub mod pingpong;
pub mod search;

pub use calculus::{
    certify_local_min, closed_partial_f, closed_partial_g, flip_delta, DeltaReport,
    LocalMinCertificate, Objective,
};
pub use coloring::{
    complement, format_coloring, make_extension, make_zinf, make_zs, parse_coloring,
    parse_coloring_with_palette, Family, FamilyParams, Format, RColoring, RunLengthSpec,
};
pub use counting::{count_fast, count_naive, eval_f, eval_g, TripleCount};
pub use error::{Error, Result};
pub use halfint::HalfInt;
