//! Word alignments from exported contextual subword embeddings.
//!
//! Cosine similarities between every source and target subword are turned
//! into two distributions with a temperature softmax, one over each row
//! (source to target) and one over each column (target to source). A
//! subword pair is linked when both probabilities exceed the threshold, and
//! subword links are then lifted to word links.
//!
//! Words without any link stay unaligned; there is no NULL.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{AlignmentSet, EmbeddedSentencePair, SentenceAlignment, Subword};
use crate::error::{Error, Result};

/// How subword links become word links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// A word pair is linked if any of its subword pairs is.
    Any,
    /// A word pair is linked only if all of its subword pairs are.
    All,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Any => "any",
            Aggregation::All => "all",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(Aggregation::Any),
            "all" => Ok(Aggregation::All),
            other => Err(Error::config(format!("unknown aggregation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorConfig {
    /// Probability threshold `c`, in (0, 1).
    pub threshold: f64,
    /// Softmax temperature, > 0.
    pub temperature: f64,
    /// Expected encoder layer; checked against the file header when set.
    pub layer: Option<usize>,
    pub aggregation: Aggregation,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            threshold: 0.001,
            temperature: 1.0,
            layer: None,
            aggregation: Aggregation::Any,
        }
    }
}

impl ExtractorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::config(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::config(format!("temperature {} must be > 0", self.temperature)));
        }
        Ok(())
    }
}

/// Dense row-major `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        SimilarityMatrix { rows, cols, data }
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.cols + v]
    }

    pub fn transposed(&self) -> SimilarityMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for v in 0..self.cols {
            for u in 0..self.rows {
                data.push(self.get(u, v));
            }
        }
        SimilarityMatrix::new(self.cols, self.rows, data)
    }
}

fn norm(sub: &Subword, side: &str) -> Result<f64> {
    let n = sub.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(Error::data(format!("zero vector for {side} subword {:?}", sub.text)));
    }
    Ok(n)
}

/// Cosine similarity of every source subword (rows) with every target
/// subword (columns).
pub fn similarity_matrix(pair: &EmbeddedSentencePair) -> Result<SimilarityMatrix> {
    let src_norms = pair.src_sub.iter().map(|s| norm(s, "source")).collect::<Result<Vec<_>>>()?;
    let tgt_norms = pair.tgt_sub.iter().map(|s| norm(s, "target")).collect::<Result<Vec<_>>>()?;
    let mut data = Vec::with_capacity(src_norms.len() * tgt_norms.len());
    for (s, ns) in pair.src_sub.iter().zip(&src_norms) {
        for (t, nt) in pair.tgt_sub.iter().zip(&tgt_norms) {
            let dot: f64 = s.vector.iter().zip(&t.vector).map(|(a, b)| a * b).sum();
            data.push((dot / (ns * nt)).clamp(-1.0, 1.0));
        }
    }
    Ok(SimilarityMatrix::new(pair.src_sub.len(), pair.tgt_sub.len(), data))
}

fn softmax(values: impl Iterator<Item = f64> + Clone, temperature: f64) -> Vec<f64> {
    let max = values.clone().map(|x| x / temperature).fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.map(|x| (x / temperature - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Links `(u, v)` whose row-softmax and column-softmax probabilities both
/// exceed the threshold.
pub fn extract_subword_links(c: &SimilarityMatrix, config: &ExtractorConfig) -> Result<BTreeSet<(usize, usize)>> {
    config.validate()?;
    let t = config.temperature;
    let mut forward = vec![0.0; c.data.len()];
    for u in 0..c.rows {
        for (v, p) in softmax((0..c.cols).map(|v| c.get(u, v)), t).into_iter().enumerate() {
            forward[u * c.cols + v] = p;
        }
    }
    let mut links = BTreeSet::new();
    for v in 0..c.cols {
        for (u, p) in softmax((0..c.rows).map(|u| c.get(u, v)), t).into_iter().enumerate() {
            if p > config.threshold && forward[u * c.cols + v] > config.threshold {
                links.insert((u, v));
            }
        }
    }
    Ok(links)
}

/// Lifts subword links to word links.
pub fn aggregate_to_words(
    links: &BTreeSet<(usize, usize)>,
    pair: &EmbeddedSentencePair,
    aggregation: Aggregation,
) -> SentenceAlignment {
    let src_word = |u: usize| pair.src_sub[u].word_index;
    let tgt_word = |v: usize| pair.tgt_sub[v].word_index;
    let any: BTreeSet<(usize, usize)> = links.iter().map(|&(u, v)| (src_word(u), tgt_word(v))).collect();
    match aggregation {
        Aggregation::Any => SentenceAlignment::from_sure(any),
        Aggregation::All => SentenceAlignment::from_sure(any.into_iter().filter(|&(i, j)| {
            let us = (0..pair.src_sub.len()).filter(|&u| src_word(u) == i);
            us.flat_map(|u| (0..pair.tgt_sub.len()).filter(move |&v| tgt_word(v) == j).map(move |v| (u, v)))
                .all(|l| links.contains(&l))
        })),
    }
}

/// Word alignment of one embedded pair.
pub fn align_pair(pair: &EmbeddedSentencePair, config: &ExtractorConfig) -> Result<SentenceAlignment> {
    if let Some(layer) = config.layer {
        if layer != pair.layer {
            return Err(Error::config(format!(
                "embeddings come from layer {} but layer {layer} was requested",
                pair.layer
            )));
        }
    }
    let c = similarity_matrix(pair).map_err(|e| Error::data(format!("pair {}: {e}", pair.id)))?;
    let links = extract_subword_links(&c, config)?;
    Ok(aggregate_to_words(&links, pair, config.aggregation))
}

/// Aligns every pair, in input order.
pub fn align_all(pairs: &[EmbeddedSentencePair], config: &ExtractorConfig) -> Result<AlignmentSet> {
    config.validate()?;
    let sentences = pairs
        .par_iter()
        .map(|p| align_pair(p, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(AlignmentSet::new(sentences))
}
