//! Reversible, linguistically informed subword segmentation for
//! morphologically rich target languages.
//!
//! Two strategies are provided on top of a shared token/marker model:
//!
//! * a knowledge-poor cascade — suffix splitting (detached `$$`-marked
//!   suffixes), empirical compound splitting (`#U zier @@ Fisch`,
//!   `#U Jahr @es@ Wechsel`) and BPE with a right-attached `##`
//!   continuation marker — together with its exact inverse;
//! * a knowledge-rich lemma-tag codec that rewrites annotated text into
//!   alternating tag/lemma tokens and deterministically re-inflects decoded
//!   output from an inflection lexicon.
//!
//! Corpus-preparation machinery (tokenization, truecasing, hyphen
//! splitting, two-stage length filtering, vocabulary statistics) lives in
//! [`pipeline`]. Everything operates on sentence-per-line UTF-8 text with
//! single-space-separated tokens.

pub mod affix;
pub mod bpe;
pub mod compound;
pub mod error;
pub mod lemmatag;
pub mod pipeline;
pub mod token;

pub use error::{Error, Result};
pub use token::{
    classify_token, escape_corpus_token, unescape_corpus_token, MarkerScheme, Token, TokenKind,
    TokenStream,
};
