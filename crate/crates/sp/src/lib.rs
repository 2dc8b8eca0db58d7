//! Alignment-based pattern processing over symbol sequences.
//!
//! Everything in this crate revolves around one structure: the multiple
//! alignment of a *New* symbol sequence against *Old* patterns drawn from a
//! grammar. Building good alignments by staged heuristic search gives
//! parsing and recognition; scoring them by information compression gives a
//! ranking and relative probabilities; reading their unmatched contents
//! symbols gives inference; and searching for the grammar that minimises
//! the two-part description length `T = G + E` over a corpus gives
//! unsupervised learning.
//!
//! The `examples/` directory holds one runnable program per capability:
//!
//! ```text
//! cargo run --example parse_sentence          # parse + render a sentence
//! cargo run --example dna_alignment           # multiple alignment of DNA
//! cargo run --example infer_missing_word      # recognition despite errors
//! cargo run --example alignment_probabilities # competing parses, ranked
//! cargo run --example learn_grammar           # grammar induction
//! cargo run --example export_json             # structured export
//! ```
//!
//! A thin `sp` binary exposes the same capabilities as subcommands
//! (`align`, `msa`, `learn`, `score`).

pub mod alignment;
pub mod builder;
pub mod error;
pub mod grammar;
pub mod io;
pub mod learn;
pub mod matcher;
pub mod pattern;
pub mod render;
pub mod score;

pub use alignment::{validate_alignment, Alignment, Column, Violation};
pub use builder::{
    build_alignments, exhaustive_build, merge, msa_build, project, RankedAlignment, SearchParams,
};
pub use error::{Error, Result};
pub use grammar::{build_cost_model, CostKind, CostModel, Grammar};
pub use learn::{
    corpus_encoding_cost, derive_patterns, grammar_cost, learn, unify_into_pool, CandidatePool,
    IdGen, LearnParams, ScoredGrammar,
};
pub use matcher::{exhaustive_matches, find_matches, MatchHypothesis, MatchLimits};
pub use pattern::{parse_pattern_line, Pattern, Provenance, Role, Symbol, SymbolClass, Token};
pub use render::{render_alignment, RenderOptions};
pub use score::{encode, infer, relative_probabilities, EncodedResult, Inference};
