use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Printed name of the NULL source word in model files.
pub const NULL_TOKEN: &str = "<null>";
/// Printed name for "any word not seen in training" in model files.
pub const UNKNOWN_TOKEN: &str = "<unk>";

/// Sorted vocabulary with dense ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Vocab {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn from_sorted(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(k, w)| (w.clone(), k as u32))
            .collect();
        Vocab { words, index }
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }
}

/// Sparse lexical translation table `t(f | e)`.
///
/// Source id 0 is the NULL word; other source ids and all target ids follow
/// the byte order of the words. Each source row stores only the target words
/// it co-occurred with in training, sorted by target id.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    pub(crate) src: Vocab,
    pub(crate) tgt: Vocab,
    pub(crate) row_start: Vec<usize>,
    pub(crate) cols: Vec<u32>,
    pub(crate) probs: Vec<f64>,
    /// Probability used for an unstored `(e, f)` with known `e`.
    pub(crate) floors: Vec<f64>,
    /// Probability used when `e` was never seen in training.
    pub(crate) unseen_floor: f64,
}

impl TranslationTable {
    /// Builds the table structure from the set of `(source id, target id)`
    /// cells, with every row initialized uniformly.
    pub(crate) fn uniform(src: Vocab, tgt: Vocab, cells: &[(u32, u32)]) -> Self {
        let n_rows = src.len();
        let mut row_start = vec![0usize; n_rows + 1];
        for &(e, _) in cells {
            row_start[e as usize + 1] += 1;
        }
        for k in 0..n_rows {
            row_start[k + 1] += row_start[k];
        }
        let cols: Vec<u32> = cells.iter().map(|&(_, f)| f).collect();
        let mut probs = vec![0.0; cols.len()];
        for e in 0..n_rows {
            let (a, b) = (row_start[e], row_start[e + 1]);
            let width = (b - a) as f64;
            probs[a..b].iter_mut().for_each(|p| *p = 1.0 / width);
        }
        TranslationTable {
            src,
            tgt,
            row_start,
            cols,
            probs,
            floors: vec![0.0; n_rows],
            unseen_floor: 0.0,
        }
    }

    pub(crate) fn n_cells(&self) -> usize {
        self.cols.len()
    }

    pub(crate) fn row(&self, e: u32) -> std::ops::Range<usize> {
        self.row_start[e as usize]..self.row_start[e as usize + 1]
    }

    pub(crate) fn cell(&self, e: u32, f: u32) -> Option<usize> {
        let r = self.row(e);
        self.cols[r.clone()].binary_search(&f).ok().map(|k| r.start + k)
    }

    /// `t(f | e)` by id; `None` ids stand for words outside the vocabulary.
    pub(crate) fn prob_ids(&self, e: Option<u32>, f: Option<u32>) -> f64 {
        match e {
            None => self.unseen_floor,
            Some(e) => match f.and_then(|f| self.cell(e, f)) {
                Some(c) => self.probs[c],
                None => self.floors[e as usize],
            },
        }
    }

    /// `t(f | e)`; `e = None` is the NULL word.
    pub fn prob(&self, e: Option<&str>, f: &str) -> f64 {
        let e_id = match e {
            None => Some(0),
            Some(w) => self.src_id(w),
        };
        self.prob_ids(e_id, self.tgt.get(f))
    }

    pub(crate) fn src_id(&self, word: &str) -> Option<u32> {
        // id 0 is NULL and is not addressable by a corpus word
        self.src.get(word).filter(|&id| id != 0)
    }

    pub(crate) fn tgt_id(&self, word: &str) -> Option<u32> {
        self.tgt.get(word)
    }

    /// Total mass of each source row; NULL first, then sorted source words.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.src.len() as u32)
            .map(|e| self.probs[self.row(e)].iter().sum())
            .collect()
    }

    pub fn n_source_words(&self) -> usize {
        self.src.len() - 1
    }

    pub fn n_target_words(&self) -> usize {
        self.tgt.len()
    }

    /// `(e, f, t)` entries, `e = None` for NULL, in row order.
    pub fn entries(&self) -> impl Iterator<Item = (Option<&str>, &str, f64)> + '_ {
        (0..self.src.len() as u32).flat_map(move |e| {
            let name = if e == 0 { None } else { Some(self.src.word(e)) };
            self.row(e).map(move |c| (name, self.tgt.word(self.cols[c]), self.probs[c]))
        })
    }

    /// Text triples `e f t(f|e)` sorted lexicographically, including the
    /// smoothing floors as `e <unk> floor` rows.
    pub(crate) fn write_triples(&self, out: &mut String) {
        let mut lines: Vec<(&str, &str, f64)> = Vec::with_capacity(self.n_cells() + self.src.len());
        for e in 0..self.src.len() as u32 {
            let e_name = if e == 0 { NULL_TOKEN } else { self.src.word(e) };
            for c in self.row(e) {
                lines.push((e_name, self.tgt.word(self.cols[c]), self.probs[c]));
            }
            if self.floors[e as usize] > 0.0 {
                lines.push((e_name, UNKNOWN_TOKEN, self.floors[e as usize]));
            }
        }
        if self.unseen_floor > 0.0 {
            lines.push((UNKNOWN_TOKEN, UNKNOWN_TOKEN, self.unseen_floor));
        }
        lines.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for (e, f, p) in lines {
            out.push_str(&format!("{e} {f} {p}\n"));
        }
    }

    /// Inverse of [`write_triples`](Self::write_triples). `first_line` is the
    /// 1-based line number of the first triple, for error messages.
    pub(crate) fn read_triples<'a>(lines: impl Iterator<Item = &'a str>, first_line: usize) -> Result<Self> {
        let mut rows: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        let mut floors: BTreeMap<String, f64> = BTreeMap::new();
        let mut unseen_floor = 0.0;
        let mut tgt_words = BTreeSet::new();
        rows.insert(NULL_TOKEN.to_string(), BTreeMap::new());
        for (k, line) in lines.enumerate() {
            let line_no = first_line + k;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let [e, f, p] = fields[..] else {
                return Err(Error::parse("model", line_no, "expected `e f t(f|e)`"));
            };
            let p: f64 = p
                .parse()
                .ok()
                .filter(|p: &f64| p.is_finite() && *p >= 0.0)
                .ok_or_else(|| Error::parse("model", line_no, format!("invalid probability {p:?}")))?;
            match (e == UNKNOWN_TOKEN, f == UNKNOWN_TOKEN) {
                (true, true) => unseen_floor = p,
                (true, false) => {
                    return Err(Error::parse("model", line_no, "unknown source row may only hold `<unk>`"));
                }
                (false, true) => {
                    floors.insert(e.to_string(), p);
                }
                (false, false) => {
                    tgt_words.insert(f.to_string());
                    rows.entry(e.to_string()).or_default().insert(f.to_string(), p);
                }
            }
        }
        for e in floors.keys() {
            rows.entry(e.clone()).or_default();
        }

        let mut src_words: Vec<String> = rows.keys().filter(|w| *w != NULL_TOKEN).cloned().collect();
        src_words.insert(0, NULL_TOKEN.to_string());
        let src = Vocab::from_sorted(src_words);
        let tgt = Vocab::from_sorted(tgt_words.into_iter().collect());

        let mut row_start = vec![0usize];
        let mut cols = Vec::new();
        let mut probs = Vec::new();
        let mut floor_vec = Vec::with_capacity(src.len());
        for e in 0..src.len() as u32 {
            let name = src.word(e);
            for (f, &p) in &rows[name] {
                cols.push(tgt.get(f).expect("target word registered above"));
                probs.push(p);
            }
            row_start.push(cols.len());
            floor_vec.push(floors.get(name).copied().unwrap_or(0.0));
        }
        Ok(TranslationTable {
            src,
            tgt,
            row_start,
            cols,
            probs,
            floors: floor_vec,
            unseen_floor,
        })
    }
}
