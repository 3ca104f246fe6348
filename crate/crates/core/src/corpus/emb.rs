use crate::error::{Error, Result};

use super::strip_bom;

const FORMAT: &str = "EMB1";
const MAGIC: &str = "EMB1";

/// One encoder subword and its hidden-state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Subword {
    /// Index of the word this subword belongs to.
    pub word_index: usize,
    pub text: String,
    pub vector: Vec<f64>,
}

/// Subword embeddings of one sentence pair, both sides encoded separately.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSentencePair {
    pub id: usize,
    /// Encoder layer the vectors were taken from. Opaque metadata.
    pub layer: usize,
    pub dim: usize,
    pub n_src_words: usize,
    pub n_tgt_words: usize,
    pub src_sub: Vec<Subword>,
    pub tgt_sub: Vec<Subword>,
}

impl EmbeddedSentencePair {
    /// The pair with sides exchanged.
    pub fn swapped(&self) -> EmbeddedSentencePair {
        EmbeddedSentencePair {
            id: self.id,
            layer: self.layer,
            dim: self.dim,
            n_src_words: self.n_tgt_words,
            n_tgt_words: self.n_src_words,
            src_sub: self.tgt_sub.clone(),
            tgt_sub: self.src_sub.clone(),
        }
    }

    /// Checks the word-index map and vector invariants of both sides.
    pub fn validate(&self) -> Result<()> {
        for (side, subs, n_words) in [("S", &self.src_sub, self.n_src_words), ("T", &self.tgt_sub, self.n_tgt_words)] {
            check_word_map(subs.iter().map(|s| s.word_index), n_words)
                .map_err(|m| Error::data(format!("pair {} side {side}: {m}", self.id)))?;
            for s in subs.iter() {
                check_vector(&s.vector, self.dim)
                    .map_err(|m| Error::data(format!("pair {} side {side} subword {:?}: {m}", self.id, s.text)))?;
            }
        }
        Ok(())
    }
}

fn check_vector(v: &[f64], dim: usize) -> std::result::Result<(), String> {
    if v.len() != dim {
        return Err(format!("expected {dim} components, found {}", v.len()));
    }
    if let Some(k) = v.iter().position(|x| !x.is_finite()) {
        return Err(format!("non-finite component at position {k}"));
    }
    Ok(())
}

/// Word indices must start at 0, step by 0 or 1, and end at `n_words - 1`.
fn check_word_map(indices: impl Iterator<Item = usize>, n_words: usize) -> std::result::Result<(), String> {
    if n_words == 0 {
        return Err("word count must be at least 1".into());
    }
    let mut expected_next = 0usize;
    for w in indices {
        if w + 1 < expected_next {
            return Err(format!("word_index {w} decreases"));
        }
        if w > expected_next {
            return Err(format!("word_index gap at {expected_next}"));
        }
        expected_next = w + 1;
    }
    if expected_next != n_words {
        return Err(format!("word_index covers {expected_next} of {n_words} words"));
    }
    Ok(())
}

fn field<'a>(it: &mut impl Iterator<Item = &'a str>, line: usize, what: &str) -> Result<&'a str> {
    it.next()
        .ok_or_else(|| Error::parse(FORMAT, line, format!("missing {what}")))
}

fn number<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(FORMAT, line, format!("invalid {what} {s:?}")))
}

struct Pending {
    pair: EmbeddedSentencePair,
    line: usize,
}

fn close(pending: Option<Pending>, out: &mut Vec<EmbeddedSentencePair>) -> Result<()> {
    if let Some(p) = pending {
        for (side, subs, n_words) in [("S", &p.pair.src_sub, p.pair.n_src_words), ("T", &p.pair.tgt_sub, p.pair.n_tgt_words)] {
            check_word_map(subs.iter().map(|s| s.word_index), n_words)
                .map_err(|m| Error::parse(FORMAT, p.line, format!("pair {} side {side}: {m}", p.pair.id)))?;
        }
        out.push(p.pair);
    }
    Ok(())
}

/// Parses an EMB1 file and enforces all pair invariants.
pub fn parse_embeddings(text: &str) -> Result<Vec<EmbeddedSentencePair>> {
    let text = strip_bom(text);
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.strip_suffix('\r').unwrap_or(l)));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(FORMAT, 1, "missing header"))?;
    let mut h = header.split_whitespace();
    if h.next() != Some(MAGIC) {
        return Err(Error::parse(FORMAT, 1, "header must start with `EMB1`"));
    }
    let layer: usize = number(field(&mut h, 1, "layer")?, 1, "layer")?;
    let dim: usize = number(field(&mut h, 1, "dimension")?, 1, "dimension")?;
    if dim == 0 || h.next().is_some() {
        return Err(Error::parse(FORMAT, 1, "header must be `EMB1 <layer> <dim>` with dim ≥ 1"));
    }

    let mut out = Vec::new();
    let mut pending: Option<Pending> = None;
    for (line, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let mut it = raw.split(' ');
        match it.next() {
            Some("#pair") => {
                close(pending.take(), &mut out)?;
                let id: usize = number(field(&mut it, line, "pair id")?, line, "pair id")?;
                let n_src_words = number(field(&mut it, line, "source word count")?, line, "source word count")?;
                let n_tgt_words = number(field(&mut it, line, "target word count")?, line, "target word count")?;
                if it.next().is_some() {
                    return Err(Error::parse(FORMAT, line, "trailing fields after pair header"));
                }
                if let Some(prev) = out.last() {
                    if id <= prev.id {
                        return Err(Error::parse(FORMAT, line, format!("pair id {id} not increasing")));
                    }
                }
                pending = Some(Pending {
                    pair: EmbeddedSentencePair {
                        id,
                        layer,
                        dim,
                        n_src_words,
                        n_tgt_words,
                        src_sub: Vec::new(),
                        tgt_sub: Vec::new(),
                    },
                    line,
                });
            }
            Some(side @ ("S" | "T")) => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| Error::parse(FORMAT, line, "subword record before any `#pair`"))?;
                if side == "S" && !p.pair.tgt_sub.is_empty() {
                    return Err(Error::parse(FORMAT, line, "source record after target records"));
                }
                let word_index: usize = number(field(&mut it, line, "word index")?, line, "word index")?;
                let text = field(&mut it, line, "subword")?.to_string();
                if text.is_empty() {
                    return Err(Error::parse(FORMAT, line, "empty subword"));
                }
                let vector = it
                    .map(|s| number::<f64>(s, line, "component"))
                    .collect::<Result<Vec<f64>>>()?;
                check_vector(&vector, dim).map_err(|m| Error::parse(FORMAT, line, m))?;
                let sub = Subword { word_index, text, vector };
                if side == "S" {
                    p.pair.src_sub.push(sub);
                } else {
                    p.pair.tgt_sub.push(sub);
                }
            }
            _ => return Err(Error::parse(FORMAT, line, "expected `#pair`, `S` or `T` record")),
        }
    }
    close(pending.take(), &mut out)?;
    Ok(out)
}

/// Formats a real with 9 significant digits.
fn format_real(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn serialize_embeddings(layer: usize, dim: usize, pairs: &[EmbeddedSentencePair]) -> String {
    let mut out = format!("{MAGIC} {layer} {dim}\n");
    for p in pairs {
        out.push_str(&format!("#pair {} {} {}\n", p.id, p.n_src_words, p.n_tgt_words));
        for (side, subs) in [("S", &p.src_sub), ("T", &p.tgt_sub)] {
            for s in subs.iter() {
                out.push_str(&format!("{side} {} {}", s.word_index, s.text));
                for &x in &s.vector {
                    out.push(' ');
                    out.push_str(&format_real(x));
                }
                out.push('\n');
            }
        }
    }
    out
}
