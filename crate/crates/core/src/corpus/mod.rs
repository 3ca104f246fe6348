//! Core data types and their text formats.
//!
//! * bitext: `src tokens ||| tgt tokens`, one sentence pair per line
//! * Pharaoh: whitespace separated `i-j` (sure) and `i?j` (possible-only)
//!   links, 0-based, line-aligned with the bitext
//! * CoNLL: `token<TAB>tag`, sentences terminated by a blank line
//! * EMB1: per-subword embedding vectors exported from an encoder
//!
//! All parsers expect UTF-8 and silently drop a leading byte-order mark.

mod alignment;
mod bitext;
mod conll;
mod emb;

pub use alignment::{parse_pharaoh, serialize_pharaoh, AlignmentSet, Link, PharaohOptions, SentenceAlignment};
pub use bitext::{parse_bitext, serialize_bitext, ParallelCorpus, SentencePair};
pub use conll::{parse_conll, serialize_conll, validate_bio, ConllOptions, Task, TaggedCorpus, TaggedSentence};
pub use emb::{parse_embeddings, serialize_embeddings, EmbeddedSentencePair, Subword};

pub(crate) fn strip_bom(text: &str) -> &str {
    text.strip_prefix('\u{feff}').unwrap_or(text)
}
