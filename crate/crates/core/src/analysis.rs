//! Experimental protocols: subset analysis, length analysis and bootstrap
//! AER distributions.
//!
//! All randomness comes from `ChaCha8Rng` seeded with the caller's seed;
//! the generator and seed are recorded in each report.

use std::fmt::Write as _;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{AlignmentSet, ParallelCorpus};
use crate::error::{Error, Result};
use crate::eval::{evaluate, percent, sentence_counts, EvalCounts, EvalReport};
use crate::ibm::{decode, train, Direction, TrainConfig};
use crate::symmetrize::{dims, symmetrize_corpus, Heuristic};

pub const RNG_NAME: &str = "ChaCha8";

/// `50, 100, ..., 25600`.
pub fn default_subset_sizes() -> Vec<usize> {
    (0..10).map(|k| 50 << k).collect()
}

pub const DEFAULT_GROUP_SIZE: usize = 7508;
pub const DEFAULT_BOOTSTRAP_SAMPLES: usize = 100;
pub const DEFAULT_BOOTSTRAP_SIZE: usize = 50;

/// An aligner that can be re-trained on different amounts of data.
pub trait AlignMethod: Sync {
    fn name(&self) -> String;

    /// Trains on `train` and returns alignments for `test`.
    fn align(&self, train: &ParallelCorpus, test: &ParallelCorpus) -> Result<AlignmentSet>;
}

/// Forward and reverse IBM-style training followed by symmetrization. The
/// test pairs are appended to the training data, as is usual for
/// unsupervised aligners.
#[derive(Debug, Clone)]
pub struct IbmMethod {
    pub config: TrainConfig,
    pub heuristic: Heuristic,
}

impl AlignMethod for IbmMethod {
    fn name(&self) -> String {
        format!("{}-{}", self.config.kind, self.heuristic)
    }

    fn align(&self, train_set: &ParallelCorpus, test: &ParallelCorpus) -> Result<AlignmentSet> {
        let all = train_set.concat(test);
        let mut out = Vec::with_capacity(2);
        for direction in [Direction::Forward, Direction::Reverse] {
            let model = train(&all, direction, &self.config)?.model;
            out.push(decode(test, &model, direction));
        }
        symmetrize_corpus(&out[0], &out[1], self.heuristic, &dims(test))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Aer(f64),
    Real(f64),
    Count(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Aer(x) => percent(*x),
            Cell::Real(x) => format!("{x:.2}"),
            Cell::Count(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A TSV table with `# key value` metadata lines. AER cells print as
/// percentages with two decimals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl AnalysisReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} {v}");
        }
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

fn rng_meta(seed: u64) -> Vec<(String, String)> {
    vec![("rng".into(), RNG_NAME.into()), ("seed".into(), seed.to_string())]
}

fn check_gold(test: &ParallelCorpus, gold: &AlignmentSet) -> Result<()> {
    if test.len() != gold.len() {
        return Err(Error::data(format!("test set has {} pairs but gold has {}", test.len(), gold.len())));
    }
    gold.validate_against(test)
}

fn run_methods(
    train_set: &ParallelCorpus,
    test: &ParallelCorpus,
    gold: &AlignmentSet,
    methods: &[&dyn AlignMethod],
) -> Result<Vec<EvalReport>> {
    methods
        .iter()
        .map(|m| evaluate(&m.align(train_set, test)?, gold))
        .collect()
}

/// Nested random samples of `0..population`, one per size, each sorted.
pub fn nested_samples(population: usize, sizes: &[usize], seed: u64) -> Result<Vec<Vec<usize>>> {
    if sizes.is_empty() {
        return Err(Error::config("no subset sizes given"));
    }
    if sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("subset sizes must be positive and strictly ascending"));
    }
    let max = *sizes.last().unwrap();
    if max > population {
        return Err(Error::config(format!("subset size {max} exceeds corpus size {population}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..population).collect();
    order.shuffle(&mut rng);
    Ok(sizes
        .iter()
        .map(|&s| {
            let mut sample = order[..s].to_vec();
            sample.sort_unstable();
            sample
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SubsetResult {
    pub sizes: Vec<usize>,
    pub methods: Vec<String>,
    /// `aer[size][method]`
    pub reports: Vec<Vec<EvalReport>>,
    pub seed: u64,
}

impl SubsetResult {
    pub fn report(&self) -> AnalysisReport {
        let mut columns = vec!["examples".to_string()];
        columns.extend(self.methods.iter().cloned());
        AnalysisReport {
            meta: rng_meta(self.seed),
            columns,
            rows: self
                .sizes
                .iter()
                .zip(&self.reports)
                .map(|(&s, r)| std::iter::once(Cell::Count(s)).chain(r.iter().map(|e| Cell::Aer(e.aer))).collect())
                .collect(),
        }
    }
}

/// Trains every method on nested random subsamples of `corpus` and scores
/// it on the fixed `test`/`gold` pair.
pub fn subset_analysis(
    corpus: &ParallelCorpus,
    test: &ParallelCorpus,
    gold: &AlignmentSet,
    sizes: &[usize],
    methods: &[&dyn AlignMethod],
    seed: u64,
) -> Result<SubsetResult> {
    check_gold(test, gold)?;
    let samples = nested_samples(corpus.len(), sizes, seed)?;
    let reports = samples
        .par_iter()
        .map(|idx| run_methods(&corpus.select(idx), test, gold, methods))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubsetResult {
        sizes: sizes.to_vec(),
        methods: methods.iter().map(|m| m.name()).collect(),
        reports,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthGroup {
    /// Corpus indices in sorted order.
    pub indices: Vec<usize>,
    pub avg_chars: f64,
    /// Shorter than the requested group size.
    pub partial: bool,
}

/// Sorts pairs by character count (ties by position) and cuts consecutive
/// groups of `group_size`.
pub fn length_groups(corpus: &ParallelCorpus, group_size: usize) -> Result<Vec<LengthGroup>> {
    if group_size == 0 {
        return Err(Error::config("group size must be at least 1"));
    }
    let lens: Vec<usize> = corpus.pairs.iter().map(|p| p.char_len()).collect();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.sort_by_key(|&k| (lens[k], k));
    Ok(order
        .chunks(group_size)
        .map(|chunk| LengthGroup {
            indices: chunk.to_vec(),
            avg_chars: chunk.iter().map(|&k| lens[k] as f64).sum::<f64>() / chunk.len() as f64,
            partial: chunk.len() < group_size,
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct LengthResult {
    pub groups: Vec<LengthGroup>,
    pub methods: Vec<String>,
    pub reports: Vec<Vec<EvalReport>>,
    pub group_size: usize,
}

impl LengthResult {
    pub fn report(&self) -> AnalysisReport {
        let mut columns: Vec<String> = ["group", "examples", "avg_chars"].iter().map(|s| s.to_string()).collect();
        columns.extend(self.methods.iter().cloned());
        columns.push("partial".into());
        AnalysisReport {
            meta: vec![("group_size".into(), self.group_size.to_string())],
            columns,
            rows: self
                .groups
                .iter()
                .zip(&self.reports)
                .enumerate()
                .map(|(k, (g, r))| {
                    let mut row = vec![Cell::Count(k + 1), Cell::Count(g.indices.len()), Cell::Real(g.avg_chars)];
                    row.extend(r.iter().map(|e| Cell::Aer(e.aer)));
                    row.push(Cell::Text(if g.partial { "yes" } else { "no" }.into()));
                    row
                })
                .collect(),
        }
    }
}

/// Trains every method on each length group and scores it on `test`/`gold`.
pub fn length_analysis(
    corpus: &ParallelCorpus,
    test: &ParallelCorpus,
    gold: &AlignmentSet,
    group_size: usize,
    methods: &[&dyn AlignMethod],
) -> Result<LengthResult> {
    check_gold(test, gold)?;
    let groups = length_groups(corpus, group_size)?;
    let reports = groups
        .par_iter()
        .map(|g| run_methods(&corpus.select(&g.indices), test, gold, methods))
        .collect::<Result<Vec<_>>>()?;
    Ok(LengthResult {
        groups,
        methods: methods.iter().map(|m| m.name()).collect(),
        reports,
        group_size,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub whole_set: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
    pub samples: Vec<f64>,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// AER on `n_samples` random subsets of `sample_size` sentences, each drawn
/// without replacement.
pub fn bootstrap_aer(
    pred: &AlignmentSet,
    gold: &AlignmentSet,
    n_samples: usize,
    sample_size: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    let counts = sentence_counts(pred, gold)?;
    if n_samples == 0 || sample_size == 0 {
        return Err(Error::config("sample count and sample size must be positive"));
    }
    if sample_size > counts.len() {
        return Err(Error::config(format!(
            "sample size {sample_size} exceeds the {} sentence pairs available",
            counts.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<usize>> = (0..n_samples)
        .map(|_| index::sample(&mut rng, counts.len(), sample_size).into_vec())
        .collect();
    let aer_of = |idx: &mut dyn Iterator<Item = usize>| {
        let mut total = EvalCounts::default();
        for k in idx {
            total += counts[k];
        }
        EvalReport::from_counts(total).aer
    };
    let samples: Vec<f64> = draws.par_iter().map(|d| aer_of(&mut d.iter().copied())).collect();
    let whole_set = aer_of(&mut (0..counts.len()));
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(BootstrapSummary {
        whole_set,
        mean,
        std,
        min: sorted[0],
        q25: quantile(&sorted, 0.25),
        q50: quantile(&sorted, 0.5),
        q75: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        samples,
    })
}

/// One row per labelled summary.
pub fn bootstrap_report(rows: &[(String, BootstrapSummary)], n_samples: usize, sample_size: usize, seed: u64) -> AnalysisReport {
    let mut meta = rng_meta(seed);
    meta.push(("samples".into(), n_samples.to_string()));
    meta.push(("sample_size".into(), sample_size.to_string()));
    AnalysisReport {
        meta,
        columns: ["method", "whole_set_aer", "avg_aer", "aer_std", "min_aer", "25%", "50%", "75%", "max_aer"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows: rows
            .iter()
            .map(|(name, s)| {
                vec![
                    Cell::Text(name.clone()),
                    Cell::Aer(s.whole_set),
                    Cell::Aer(s.mean),
                    Cell::Aer(s.std),
                    Cell::Aer(s.min),
                    Cell::Aer(s.q25),
                    Cell::Aer(s.q50),
                    Cell::Aer(s.q75),
                    Cell::Aer(s.max),
                ]
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentenceAlignment;
    use crate::ibm::ModelKind;

    fn corpus(n: usize) -> ParallelCorpus {
        ParallelCorpus::from_pairs((0..n).map(|k| {
            let len = 1 + k % 4;
            let src: Vec<String> = (0..len).map(|i| format!("s{}", (k + i) % 5)).collect();
            let tgt: Vec<String> = (0..len).map(|i| format!("t{}", (k + i) % 5)).collect();
            (src, tgt)
        }))
        .unwrap()
    }

    fn diagonal_gold(c: &ParallelCorpus) -> AlignmentSet {
        AlignmentSet::new(c.pairs.iter().map(|p| SentenceAlignment::from_sure((0..p.src.len()).map(|i| (i, i)))).collect())
    }

    fn method() -> IbmMethod {
        IbmMethod {
            config: TrainConfig { kind: ModelKind::Model1, iterations: 3, ..Default::default() },
            heuristic: Heuristic::Union,
        }
    }

    #[test]
    fn default_ladder() {
        assert_eq!(default_subset_sizes(), vec![50, 100, 200, 400, 800, 1600, 3200, 6400, 12800, 25600]);
    }

    #[test]
    fn samples_are_nested_and_seeded() {
        let s = nested_samples(100, &[5, 20, 60, 100], 3).unwrap();
        for w in s.windows(2) {
            assert!(w[0].iter().all(|x| w[1].contains(x)));
        }
        assert_eq!(s[3], (0..100).collect::<Vec<_>>());
        assert_eq!(s, nested_samples(100, &[5, 20, 60, 100], 3).unwrap());
        assert_ne!(s[0], nested_samples(100, &[5], 4).unwrap()[0]);
        assert!(nested_samples(10, &[5, 5], 0).is_err());
        assert!(nested_samples(10, &[11], 0).is_err());
    }

    #[test]
    fn full_subset_equals_plain_run() {
        let c = corpus(12);
        let test = corpus(5);
        let gold = diagonal_gold(&test);
        let m = method();
        let r = subset_analysis(&c, &test, &gold, &[6, 12], &[&m], 9).unwrap();
        let direct = evaluate(&m.align(&c, &test).unwrap(), &gold).unwrap();
        assert_eq!(r.reports[1][0], direct);
        let again = subset_analysis(&c, &test, &gold, &[6, 12], &[&m], 9).unwrap();
        assert_eq!(r.report(), again.report());
        assert!(r.report().to_tsv().starts_with("# rng ChaCha8\n# seed 9\nexamples\tibm1-union\n6\t"));
    }

    #[test]
    fn length_groups_partition() {
        let c = corpus(10);
        let g = length_groups(&c, 4).unwrap();
        assert_eq!(g.iter().map(|g| g.indices.len()).collect::<Vec<_>>(), vec![4, 4, 2]);
        assert_eq!((g[0].partial, g[2].partial), (false, true));
        let mut all: Vec<usize> = g.iter().flat_map(|g| g.indices.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        let lens: Vec<usize> = g.iter().flat_map(|g| g.indices.iter().map(|&k| c.pairs[k].char_len())).collect();
        assert!(lens.windows(2).all(|w| w[0] <= w[1]));

        let one = length_groups(&c, 10).unwrap();
        let mean = c.pairs.iter().map(|p| p.char_len() as f64).sum::<f64>() / 10.0;
        assert_eq!(one.len(), 1);
        assert!((one[0].avg_chars - mean).abs() < 1e-12);
        assert!(length_groups(&c, 0).is_err());
    }

    #[test]
    fn equal_lengths_keep_id_order() {
        let c = ParallelCorpus::from_pairs((0..6).map(|k| (vec![format!("a{k}")], vec![format!("b{k}")]))).unwrap();
        let g = length_groups(&c, 3).unwrap();
        assert_eq!(g[0].indices, vec![0, 1, 2]);
        assert_eq!(g[0].avg_chars, g[1].avg_chars);
    }

    #[test]
    fn length_analysis_runs() {
        let c = corpus(9);
        let test = corpus(4);
        let r = length_analysis(&c, &test, &diagonal_gold(&test), 4, &[&method()]).unwrap();
        assert_eq!(r.reports.len(), 3);
        let tsv = r.report().to_tsv();
        assert!(tsv.contains("group\texamples\tavg_chars\tibm1-union\tpartial\n"));
        assert!(tsv.ends_with("\tyes\n"));
    }

    #[test]
    fn quantiles_interpolate() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&x, 0.25), 1.75);
        assert_eq!(quantile(&x, 0.5), 2.5);
        assert_eq!(quantile(&x, 1.0), 4.0);
        assert_eq!(quantile(&[7.0], 0.75), 7.0);
    }

    fn pred_gold(n: usize) -> (AlignmentSet, AlignmentSet) {
        let gold = AlignmentSet::new((0..n).map(|_| SentenceAlignment::from_sure([(0, 0), (1, 1)])).collect());
        let pred = AlignmentSet::new(
            (0..n)
                .map(|k| SentenceAlignment::from_sure(if k % 2 == 0 { vec![(0, 0), (1, 1)] } else { vec![(0, 1)] }))
                .collect(),
        );
        (pred, gold)
    }

    #[test]
    fn full_size_samples_have_no_spread() {
        let (pred, gold) = pred_gold(20);
        let s = bootstrap_aer(&pred, &gold, 10, 20, 1).unwrap();
        assert_eq!(s.whole_set, evaluate(&pred, &gold).unwrap().aer);
        assert!(s.std < 1e-15);
        assert!((s.mean - s.whole_set).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_summary_is_ordered() {
        let (pred, gold) = pred_gold(200);
        let s = bootstrap_aer(&pred, &gold, 100, 50, 5).unwrap();
        assert!(s.min <= s.q25 && s.q25 <= s.q50 && s.q50 <= s.q75 && s.q75 <= s.max);
        assert!(s.min <= s.mean && s.mean <= s.max && s.std >= 0.0);
        assert_eq!(s, bootstrap_aer(&pred, &gold, 100, 50, 5).unwrap());
        assert!(bootstrap_aer(&pred, &gold, 100, 201, 5).is_err());
        let t = bootstrap_report(&[("x".into(), s)], 100, 50, 5).to_tsv();
        assert!(t.contains("method\twhole_set_aer\tavg_aer\taer_std\tmin_aer\t25%\t50%\t75%\tmax_aer\nx\t"));
    }
}
