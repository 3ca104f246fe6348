//! Combining forward and reverse directional alignments.
//!
//! Both inputs must already be in `(source, target)` orientation. The grow
//! heuristics start from the intersection and repeatedly add union links
//! adjacent to accepted ones; scan orders are fixed so results are
//! reproducible:
//!
//! * accepted links are visited in row-major `(i, j)` order, one pass over a
//!   snapshot at a time, until a pass adds nothing;
//! * neighbours are tried in the order `(-1,0) (0,-1) (1,0) (0,1) (-1,-1)
//!   (-1,1) (1,-1) (1,1)`;
//! * a candidate is accepted when its row or its column has no link yet.
//!
//! The final step then offers every forward link and every reverse link, in
//! row-major order, under the same row-or-column condition.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{AlignmentSet, Link, ParallelCorpus, SentenceAlignment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    Forward,
    Reverse,
    Union,
    Intersection,
    GrowDiag,
    GrowDiagFinal,
}

impl Heuristic {
    pub const ALL: [Heuristic; 6] = [
        Heuristic::Forward,
        Heuristic::Reverse,
        Heuristic::Union,
        Heuristic::Intersection,
        Heuristic::GrowDiag,
        Heuristic::GrowDiagFinal,
    ];
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Forward => "forward",
            Heuristic::Reverse => "reverse",
            Heuristic::Union => "union",
            Heuristic::Intersection => "intersection",
            Heuristic::GrowDiag => "grow-diag",
            Heuristic::GrowDiagFinal => "grow-diag-final",
        })
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Heuristic::ALL
            .into_iter()
            .find(|h| h.to_string() == s)
            .ok_or_else(|| Error::config(format!("unknown heuristic {s:?}")))
    }
}

const NEIGHBOURS: [(isize, isize); 8] = [(-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)];

struct Grid {
    links: BTreeSet<Link>,
    row_linked: Vec<bool>,
    col_linked: Vec<bool>,
}

impl Grid {
    fn new(links: BTreeSet<Link>, n: usize, m: usize) -> Self {
        let mut g = Grid {
            links: BTreeSet::new(),
            row_linked: vec![false; n],
            col_linked: vec![false; m],
        };
        for l in links {
            g.add(l);
        }
        g
    }

    fn add(&mut self, (i, j): Link) {
        self.links.insert((i, j));
        self.row_linked[i] = true;
        self.col_linked[j] = true;
    }

    fn open(&self, (i, j): Link) -> bool {
        !self.links.contains(&(i, j)) && (!self.row_linked[i] || !self.col_linked[j])
    }
}

fn grow(grid: &mut Grid, union: &BTreeSet<Link>, n: usize, m: usize) {
    loop {
        let snapshot: Vec<Link> = grid.links.iter().copied().collect();
        let mut added = false;
        for (i, j) in snapshot {
            for (di, dj) in NEIGHBOURS {
                let (Some(ni), Some(nj)) = (i.checked_add_signed(di), j.checked_add_signed(dj)) else {
                    continue;
                };
                if ni >= n || nj >= m {
                    continue;
                }
                if union.contains(&(ni, nj)) && grid.open((ni, nj)) {
                    grid.add((ni, nj));
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
}

fn final_pass(grid: &mut Grid, directional: &BTreeSet<Link>) {
    for &link in directional {
        if grid.open(link) {
            grid.add(link);
        }
    }
}

/// Symmetrizes one sentence pair of `n` source and `m` target words.
/// Only sure links of the inputs are used; the result is sure-only.
pub fn symmetrize(
    fwd: &SentenceAlignment,
    rev: &SentenceAlignment,
    heuristic: Heuristic,
    n: usize,
    m: usize,
) -> Result<SentenceAlignment> {
    for (name, a) in [("forward", fwd), ("reverse", rev)] {
        if let Some(&(i, j)) = a.sure().iter().find(|&&(i, j)| i >= n || j >= m) {
            return Err(Error::data(format!("{name} link {i}-{j} outside {n}x{m} grid")));
        }
    }
    let f = fwd.sure();
    let r = rev.sure();
    let links: BTreeSet<Link> = match heuristic {
        Heuristic::Forward => f.clone(),
        Heuristic::Reverse => r.clone(),
        Heuristic::Union => f.union(r).copied().collect(),
        Heuristic::Intersection => f.intersection(r).copied().collect(),
        Heuristic::GrowDiag | Heuristic::GrowDiagFinal => {
            let union: BTreeSet<Link> = f.union(r).copied().collect();
            let mut grid = Grid::new(f.intersection(r).copied().collect(), n, m);
            grow(&mut grid, &union, n, m);
            if heuristic == Heuristic::GrowDiagFinal {
                final_pass(&mut grid, f);
                final_pass(&mut grid, r);
            }
            grid.links
        }
    };
    Ok(SentenceAlignment::from_sure(links))
}

/// Sentence dimensions `(source words, target words)` of a corpus.
pub fn dims(corpus: &ParallelCorpus) -> Vec<(usize, usize)> {
    corpus.pairs.iter().map(|p| (p.src.len(), p.tgt.len())).collect()
}

/// Smallest dimensions that contain every link of both inputs; used when no
/// bitext is available.
pub fn inferred_dims(fwd: &AlignmentSet, rev: &AlignmentSet) -> Vec<(usize, usize)> {
    fwd.sentences
        .iter()
        .zip(&rev.sentences)
        .map(|(a, b)| {
            a.sure().iter().chain(b.sure()).fold((0, 0), |(n, m), &(i, j)| (n.max(i + 1), m.max(j + 1)))
        })
        .collect()
}

/// Symmetrizes every sentence pair; `dims` gives `(n, m)` per pair.
pub fn symmetrize_corpus(
    fwd: &AlignmentSet,
    rev: &AlignmentSet,
    heuristic: Heuristic,
    dims: &[(usize, usize)],
) -> Result<AlignmentSet> {
    if fwd.len() != rev.len() || fwd.len() != dims.len() {
        return Err(Error::data(format!(
            "sentence counts differ: forward {}, reverse {}, corpus {}",
            fwd.len(),
            rev.len(),
            dims.len()
        )));
    }
    let sentences = fwd
        .sentences
        .par_iter()
        .zip(&rev.sentences)
        .zip(dims)
        .enumerate()
        .map(|(k, ((f, r), &(n, m)))| {
            symmetrize(f, r, heuristic, n, m).map_err(|e| Error::data(format!("sentence {}: {e}", k + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlignmentSet::new(sentences))
}
