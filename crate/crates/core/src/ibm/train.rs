use std::collections::BTreeSet;

use rayon::prelude::*;

use super::distortion::{feature, fill_row, refit_lambda, TensionStats};
use super::table::{TranslationTable, Vocab, NULL_TOKEN, UNKNOWN_TOKEN};
use super::{AlignmentModel, DiagonalParams, Direction, ModelKind, TrainConfig};
use crate::corpus::{AlignmentSet, ParallelCorpus, SentenceAlignment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub model: AlignmentModel,
    /// Objective before each M-step: corpus log-likelihood plus, when
    /// smoothing is on, the log prior `alpha * sum log t(f|e)`.
    pub ll_trace: Vec<f64>,
}

struct Encoded {
    src: Vec<u32>,
    tgt: Vec<u32>,
    /// Offset of this sentence's `(n + 1) * m` block in the flat cell and
    /// posterior buffers; layout is `j`-major with NULL first.
    offset: usize,
}

fn oriented(corpus: &ParallelCorpus, direction: Direction) -> impl Iterator<Item = (&[String], &[String])> {
    corpus.pairs.iter().map(move |p| match direction {
        Direction::Forward => (p.src.as_slice(), p.tgt.as_slice()),
        Direction::Reverse => (p.tgt.as_slice(), p.src.as_slice()),
    })
}

fn build_vocab<'a>(words: impl Iterator<Item = &'a String>, with_null: bool) -> Result<Vocab> {
    let set: BTreeSet<&String> = words.collect();
    if let Some(bad) = set.iter().find(|w| w.as_str() == NULL_TOKEN || w.as_str() == UNKNOWN_TOKEN) {
        return Err(Error::data(format!("token {bad:?} is reserved")));
    }
    let mut list: Vec<String> = Vec::with_capacity(set.len() + 1);
    if with_null {
        list.push(NULL_TOKEN.to_string());
    }
    list.extend(set.into_iter().cloned());
    Ok(Vocab::from_sorted(list))
}

/// Trains a directional aligner with EM.
///
/// The E-step computes posteriors `t(f_j|e_i) * delta(i, j)` normalized over
/// `i = 0..=n` for every target position; the M-step sets
/// `t(f|e) = (c(f,e) + alpha) / (sum_f c(f,e) + alpha * V_e)`, where `V_e` is
/// the number of target words stored in row `e`. For the diagonal model with
/// `lambda_search`, lambda is re-fitted after each E-step by golden-section
/// search on `[0, 20]`.
///
/// Posteriors are computed in parallel but accumulated in corpus order, so
/// the result does not depend on the number of worker threads.
pub fn train(corpus: &ParallelCorpus, direction: Direction, config: &TrainConfig) -> Result<TrainOutput> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::data("cannot train on an empty corpus"));
    }
    let src_vocab = build_vocab(oriented(corpus, direction).flat_map(|(s, _)| s.iter()), true)?;
    let tgt_vocab = build_vocab(oriented(corpus, direction).flat_map(|(_, t)| t.iter()), false)?;

    let mut sentences = Vec::with_capacity(corpus.len());
    let mut offset = 0;
    for (s, t) in oriented(corpus, direction) {
        let src: Vec<u32> = s.iter().map(|w| src_vocab.get(w).expect("in vocab")).collect();
        let tgt: Vec<u32> = t.iter().map(|w| tgt_vocab.get(w).expect("in vocab")).collect();
        let size = (src.len() + 1) * tgt.len();
        sentences.push(Encoded { src, tgt, offset });
        offset += size;
    }
    let flat_len = offset;

    let mut keys: Vec<u64> = Vec::with_capacity(flat_len);
    for s in &sentences {
        for &f in &s.tgt {
            keys.push(f as u64);
            keys.extend(s.src.iter().map(|&e| ((e as u64) << 32) | f as u64));
        }
    }
    keys.par_sort_unstable();
    keys.dedup();
    let pairs: Vec<(u32, u32)> = keys.iter().map(|&k| ((k >> 32) as u32, k as u32)).collect();
    drop(keys);
    let mut table = TranslationTable::uniform(src_vocab, tgt_vocab, &pairs);
    drop(pairs);

    let mut cells: Vec<u32> = vec![0; flat_len];
    {
        let mut slices = split_blocks(&mut cells, &sentences);
        slices.par_iter_mut().zip(sentences.par_iter()).for_each(|(block, s)| {
            let stride = s.src.len() + 1;
            for (j, &f) in s.tgt.iter().enumerate() {
                let row = &mut block[j * stride..(j + 1) * stride];
                row[0] = table.cell(0, f).expect("NULL co-occurs with every word") as u32;
                for (i, &e) in s.src.iter().enumerate() {
                    row[i + 1] = table.cell(e, f).expect("co-occurring cell") as u32;
                }
            }
        });
    }

    let mut params = DiagonalParams {
        lambda: config.initial_lambda,
        p0: config.p0,
        kind: config.kind,
    };
    let search = config.lambda_search && config.kind == ModelKind::Diagonal;
    let alpha = config.smoothing_alpha;
    let mut posteriors = vec![0.0f64; flat_len];
    let mut counts = vec![0.0f64; table.n_cells()];
    let mut ll_trace = Vec::with_capacity(config.iterations);

    for _ in 0..config.iterations {
        let sentence_ll: Vec<f64> = {
            let mut slices = split_blocks(&mut posteriors, &sentences);
            slices
                .par_iter_mut()
                .zip(sentences.par_iter())
                .map(|(post, s)| e_step_sentence(s, &cells[s.offset..s.offset + post.len()], &table, &params, &mut post[..]))
                .collect()
        };
        let mut objective: f64 = sentence_ll.iter().sum();
        if alpha > 0.0 {
            objective += alpha * table.probs.iter().map(|p| p.ln()).sum::<f64>();
        }
        ll_trace.push(objective);

        counts.iter_mut().for_each(|c| *c = 0.0);
        for (&cell, &g) in cells.iter().zip(&posteriors) {
            counts[cell as usize] += g;
        }
        if search {
            let stats = tension_stats(&sentences, &posteriors);
            params.lambda = refit_lambda(&stats, params.lambda);
        }
        m_step(&mut table, &counts, alpha);
    }

    Ok(TrainOutput {
        model: AlignmentModel { table, params },
        ll_trace,
    })
}

fn split_blocks<'a, T>(buf: &'a mut [T], sentences: &[Encoded]) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(sentences.len());
    let mut rest = buf;
    for s in sentences {
        let (head, tail) = rest.split_at_mut((s.src.len() + 1) * s.tgt.len());
        out.push(head);
        rest = tail;
    }
    out
}

/// Writes normalized posteriors into `post` and returns the sentence
/// log-likelihood.
fn e_step_sentence(s: &Encoded, cells: &[u32], table: &TranslationTable, params: &DiagonalParams, post: &mut [f64]) -> f64 {
    let n = s.src.len();
    let m = s.tgt.len();
    let stride = n + 1;
    let mut prior = vec![0.0; stride];
    let mut ll = 0.0;
    for j in 0..m {
        fill_row(j + 1, n, m, params, &mut prior);
        let row_cells = &cells[j * stride..(j + 1) * stride];
        let row = &mut post[j * stride..(j + 1) * stride];
        let mut total = 0.0;
        for i in 0..stride {
            let w = table.probs[row_cells[i] as usize] * prior[i];
            row[i] = w;
            total += w;
        }
        ll += total.ln();
        if total > 0.0 {
            row.iter_mut().for_each(|g| *g /= total);
        }
    }
    ll
}

fn tension_stats(sentences: &[Encoded], posteriors: &[f64]) -> TensionStats {
    let mut stats = TensionStats::default();
    for s in sentences {
        let n = s.src.len();
        let m = s.tgt.len();
        let stride = n + 1;
        for j in 0..m {
            let row = &posteriors[s.offset + j * stride..s.offset + (j + 1) * stride];
            let mut mass = 0.0;
            for i in 1..=n {
                mass += row[i];
                stats.weighted_feature += row[i] * feature(i, j + 1, n, m);
            }
            *stats.mass.entry((n, m, j + 1)).or_insert(0.0) += mass;
        }
    }
    stats
}

fn m_step(table: &mut TranslationTable, counts: &[f64], alpha: f64) {
    let n_rows = table.row_start.len() - 1;
    for e in 0..n_rows {
        let range = table.row(e as u32);
        let width = range.len() as f64;
        let denom: f64 = counts[range.clone()].iter().sum::<f64>() + alpha * width;
        if denom > 0.0 {
            for c in range {
                table.probs[c] = (counts[c] + alpha) / denom;
            }
            table.floors[e] = alpha / denom;
        } else {
            table.probs[range].iter_mut().for_each(|p| *p = 0.0);
            table.floors[e] = 0.0;
        }
    }
    table.unseen_floor = if alpha > 0.0 {
        1.0 / table.n_target_words() as f64
    } else {
        0.0
    };
}

fn decode_pair(src: &[String], tgt: &[String], model: &AlignmentModel) -> Vec<(usize, usize)> {
    let table = &model.table;
    let n = src.len();
    let m = tgt.len();
    let src_ids: Vec<Option<u32>> = src.iter().map(|w| table.src_id(w)).collect();
    let mut prior = vec![0.0; n + 1];
    let mut links = Vec::new();
    for (j, f) in tgt.iter().enumerate() {
        let f_id = table.tgt_id(f);
        fill_row(j + 1, n, m, &model.params, &mut prior);
        let mut best_i = 0;
        let mut best = table.prob_ids(Some(0), f_id) * prior[0];
        for i in 1..=n {
            let v = table.prob_ids(src_ids[i - 1], f_id) * prior[i];
            if v > best {
                best = v;
                best_i = i;
            }
        }
        if best_i > 0 {
            links.push((best_i - 1, j));
        }
    }
    links
}

/// Viterbi alignment of every pair: each target word (in the decoding
/// direction) takes its most probable source position, NULL included, with
/// ties going to the smaller position. Reverse output is transposed back to
/// `(source, target)` orientation.
pub fn decode(corpus: &ParallelCorpus, model: &AlignmentModel, direction: Direction) -> AlignmentSet {
    let sentences = corpus
        .pairs
        .par_iter()
        .map(|p| match direction {
            Direction::Forward => SentenceAlignment::from_sure(decode_pair(&p.src, &p.tgt, model)),
            Direction::Reverse => {
                SentenceAlignment::from_sure(decode_pair(&p.tgt, &p.src, model).into_iter().map(|(i, j)| (j, i)))
            }
        })
        .collect();
    AlignmentSet::new(sentences)
}
