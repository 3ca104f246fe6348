use crate::error::{Error, Result};

use super::strip_bom;

const FORMAT: &str = "bitext";
const SEPARATOR: &str = " ||| ";

/// One line of a parallel corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    /// 0-based line position in the corpus.
    pub id: usize,
    pub src: Vec<String>,
    pub tgt: Vec<String>,
}

impl SentencePair {
    /// The same pair with source and target roles exchanged.
    pub fn swapped(&self) -> SentencePair {
        SentencePair {
            id: self.id,
            src: self.tgt.clone(),
            tgt: self.src.clone(),
        }
    }

    /// Number of characters in the source and target sides, each side counted
    /// as its space-joined text.
    pub fn char_len(&self) -> usize {
        side_chars(&self.src) + side_chars(&self.tgt)
    }
}

fn side_chars(tokens: &[String]) -> usize {
    tokens.iter().map(|t| t.chars().count()).sum::<usize>() + tokens.len().saturating_sub(1)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
}

impl ParallelCorpus {
    /// Builds a corpus from token sequences, assigning ids by position.
    ///
    /// Fails if any side is empty or a token is empty or contains whitespace.
    pub fn from_pairs<I, S, T>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: IntoIterator,
        S::Item: Into<String>,
        T: IntoIterator,
        T::Item: Into<String>,
    {
        let mut out = Vec::new();
        for (id, (src, tgt)) in pairs.into_iter().enumerate() {
            let src: Vec<String> = src.into_iter().map(Into::into).collect();
            let tgt: Vec<String> = tgt.into_iter().map(Into::into).collect();
            for (side, tokens) in [("source", &src), ("target", &tgt)] {
                if tokens.is_empty() {
                    return Err(Error::data(format!("pair {id}: empty {side} side")));
                }
                if let Some(bad) = tokens.iter().find(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
                    return Err(Error::data(format!("pair {id}: invalid {side} token {bad:?}")));
                }
            }
            out.push(SentencePair { id, src, tgt });
        }
        Ok(ParallelCorpus { pairs: out })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Corpus with source and target exchanged on every pair.
    pub fn swapped(&self) -> ParallelCorpus {
        ParallelCorpus {
            pairs: self.pairs.iter().map(SentencePair::swapped).collect(),
        }
    }

    /// Sub-corpus made of the given pair positions, re-identified 0..k in the
    /// order given.
    pub fn select(&self, indices: &[usize]) -> ParallelCorpus {
        ParallelCorpus {
            pairs: indices
                .iter()
                .enumerate()
                .map(|(id, &k)| SentencePair {
                    id,
                    src: self.pairs[k].src.clone(),
                    tgt: self.pairs[k].tgt.clone(),
                })
                .collect(),
        }
    }

    /// Concatenation of two corpora; ids of `other` continue after `self`.
    pub fn concat(&self, other: &ParallelCorpus) -> ParallelCorpus {
        let offset = self.pairs.len();
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().map(|p| SentencePair {
            id: p.id + offset,
            src: p.src.clone(),
            tgt: p.tgt.clone(),
        }));
        ParallelCorpus { pairs }
    }
}

fn split_side(side: &str, line: usize, name: &str) -> Result<Vec<String>> {
    let side = side.trim_end_matches(['\r']);
    if side.trim().is_empty() {
        return Err(Error::parse(FORMAT, line, format!("empty {name} side")));
    }
    let mut tokens = Vec::new();
    for token in side.split(' ') {
        if token.is_empty() {
            return Err(Error::parse(FORMAT, line, format!("blank token on {name} side")));
        }
        if token.chars().any(char::is_whitespace) {
            return Err(Error::parse(FORMAT, line, format!("token {token:?} contains whitespace")));
        }
        tokens.push(token.to_string());
    }
    Ok(tokens)
}

/// Parses `source tokens ||| target tokens` lines.
///
/// Tokens are separated by exactly one space; runs of spaces, tabs or
/// leading/trailing spaces on a side are rejected as blank tokens.
pub fn parse_bitext(text: &str) -> Result<ParallelCorpus> {
    let text = strip_bom(text);
    let mut pairs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let (src, tgt) = match raw.find("|||") {
            Some(pos) => (&raw[..pos], &raw[pos + 3..]),
            None => return Err(Error::parse(FORMAT, line, "missing `|||` separator")),
        };
        if tgt.contains("|||") {
            return Err(Error::parse(FORMAT, line, "more than one `|||` separator"));
        }
        let src = src.strip_suffix(' ').unwrap_or(src);
        let tgt = tgt.strip_prefix(' ').unwrap_or(tgt);
        let src = split_side(src, line, "source")?;
        let tgt = split_side(tgt, line, "target")?;
        pairs.push(SentencePair { id: k, src, tgt });
    }
    Ok(ParallelCorpus { pairs })
}

pub fn serialize_bitext(corpus: &ParallelCorpus) -> String {
    let mut out = String::new();
    for pair in &corpus.pairs {
        out.push_str(&pair.src.join(" "));
        out.push_str(SEPARATOR);
        out.push_str(&pair.tgt.join(" "));
        out.push('\n');
    }
    out
}
