//! Generator for bitext drawn from the diagonal-prior alignment model.
//!
//! Source sentences use distinct words from a closed vocabulary; each target
//! position either comes from NULL (with probability `p0`, emitting one of a
//! few filler words) or picks a source position from the diagonal prior with
//! tension `lambda` and emits that word's fixed translation. The generated
//! links are the gold standard.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walign::corpus::{AlignmentSet, ParallelCorpus, SentenceAlignment};

pub struct SyntheticConfig {
    pub pairs: usize,
    pub vocab: usize,
    pub lambda: f64,
    pub p0: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub null_words: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            pairs: 500,
            vocab: 50,
            lambda: 4.0,
            p0: 0.08,
            min_len: 4,
            max_len: 12,
            null_words: 3,
            seed: 42,
        }
    }
}

pub struct Synthetic {
    pub corpus: ParallelCorpus,
    pub gold: AlignmentSet,
}

/// Prior over source positions 1..=n for target position j (1-based),
/// excluding NULL, written independently of the library code.
fn position_weights(j: usize, n: usize, m: usize, lambda: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n)
        .map(|i| (-lambda * (i as f64 / n as f64 - j as f64 / m as f64).abs()).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / z).collect()
}

pub fn generate(config: &SyntheticConfig) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut translation: Vec<usize> = (0..config.vocab).collect();
    translation.shuffle(&mut rng);
    let vocab: Vec<usize> = (0..config.vocab).collect();

    let mut pairs = Vec::with_capacity(config.pairs);
    let mut gold = Vec::with_capacity(config.pairs);
    for _ in 0..config.pairs {
        let n = rng.random_range(config.min_len..=config.max_len);
        let m = rng.random_range(2 * n..=3 * n);
        let src: Vec<usize> = vocab.choose_multiple(&mut rng, n).copied().collect();
        let mut tgt = Vec::with_capacity(m);
        let mut links = Vec::new();
        for j in 1..=m {
            if rng.random::<f64>() < config.p0 {
                tgt.push(format!("nul{}", rng.random_range(0..config.null_words)));
                continue;
            }
            let weights = position_weights(j, n, m, config.lambda);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = n;
            for (k, w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = k + 1;
                    break;
                }
            }
            tgt.push(format!("t{}", translation[src[pick - 1]]));
            links.push((pick - 1, j - 1));
        }
        pairs.push((
            src.iter().map(|w| format!("s{w}")).collect::<Vec<_>>(),
            tgt,
        ));
        gold.push(SentenceAlignment::from_sure(links));
    }
    Synthetic {
        corpus: ParallelCorpus::from_pairs(pairs).expect("generated corpus is valid"),
        gold: AlignmentSet::new(gold),
    }
}
