//! Tag projection from an annotated source side to the target side.
//!
//! Each target token collects the tags of the source tokens linked to it
//! (token votes). Across the corpus, the winning vote of every token is
//! tallied per target word type, and tags reaching `β` times the type's
//! most frequent tag form the type dictionary. The final tag of a token is
//!
//! * the fallback tag when it has no votes;
//! * for a type in the dictionary, its best vote among the allowed tags, or
//!   the dictionary's top tag when no vote is allowed;
//! * otherwise its best vote.
//!
//! Ties between equally counted tags go to the tag earlier in the priority
//! order. Sentences with fewer than `ρ` of their tokens aligned are dropped.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::corpus::{AlignmentSet, ParallelCorpus, TaggedCorpus, TaggedSentence, Task};
use crate::error::{Error, Result};

/// Tag counts received by one target token.
pub type Votes = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    pub task: Task,
    /// `β`: fraction of a type's top count a tag needs to stay allowed.
    pub type_threshold: f64,
    /// `ρ`: minimum fraction of aligned tokens for a sentence to be kept.
    pub min_coverage: f64,
    pub fallback_tag: String,
    /// Tie-breaking order; when unset, descending source frequency then
    /// lexicographic.
    pub tag_priority: Option<Vec<String>>,
}

impl ProjectionConfig {
    pub fn new(task: Task) -> Self {
        ProjectionConfig {
            task,
            type_threshold: 0.3,
            min_coverage: 0.8,
            fallback_tag: match task {
                Task::Pos => "NOUN".into(),
                Task::Ner => "O".into(),
            },
            tag_priority: None,
        }
    }

    pub fn validate(&self, tagset: &BTreeSet<String>) -> Result<()> {
        for (name, x) in [("type threshold", self.type_threshold), ("minimum coverage", self.min_coverage)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::config(format!("{name} {x} outside [0, 1]")));
            }
        }
        if !tagset.contains(&self.fallback_tag) {
            return Err(Error::config(format!("fallback tag {:?} not in the source tagset", self.fallback_tag)));
        }
        if let Some(order) = &self.tag_priority {
            if let Some(t) = order.iter().find(|t| !tagset.contains(*t)) {
                return Err(Error::config(format!("priority tag {t:?} not in the source tagset")));
            }
        }
        Ok(())
    }
}

/// Total order over tags used to break count ties; lower rank wins.
#[derive(Debug, Clone)]
pub struct TagPriority {
    rank: HashMap<String, usize>,
}

impl TagPriority {
    /// Tags listed in `order` come first; any others follow lexicographically.
    pub fn from_order(order: &[String], tagset: &BTreeSet<String>) -> Self {
        let mut rank = HashMap::new();
        for t in order.iter().chain(tagset) {
            let next = rank.len();
            rank.entry(t.clone()).or_insert(next);
        }
        TagPriority { rank }
    }

    /// Descending frequency in the source corpus, ties lexicographic.
    pub fn from_frequency(corpus: &TaggedCorpus) -> Self {
        let mut counts: BTreeMap<&str, usize> = corpus.tagset.iter().map(|t| (t.as_str(), 0)).collect();
        for s in &corpus.sentences {
            for t in &s.tags {
                *counts.entry(t).or_default() += 1;
            }
        }
        let mut order: Vec<(&str, usize)> = counts.into_iter().collect();
        order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let order: Vec<String> = order.into_iter().map(|(t, _)| t.to_string()).collect();
        TagPriority::from_order(&order, &corpus.tagset)
    }

    pub fn rank(&self, tag: &str) -> usize {
        self.rank.get(tag).copied().unwrap_or(usize::MAX)
    }

    /// Highest count, ties to the better-ranked tag.
    pub fn best<'a>(&self, counts: impl IntoIterator<Item = (&'a String, usize)>) -> Option<&'a String> {
        counts
            .into_iter()
            .min_by(|a, b| b.1.cmp(&a.1).then(self.rank(a.0).cmp(&self.rank(b.0))).then(a.0.cmp(b.0)))
            .map(|(t, _)| t)
    }
}

fn check_lines(src: &TaggedCorpus, alignment: &AlignmentSet, tgt: &ParallelCorpus) -> Result<()> {
    if src.len() != alignment.len() || src.len() != tgt.len() {
        return Err(Error::data(format!(
            "line counts differ: tagged source {}, alignment {}, bitext {}",
            src.len(),
            alignment.len(),
            tgt.len()
        )));
    }
    for (k, (s, p)) in src.sentences.iter().zip(&tgt.pairs).enumerate() {
        if s.tokens.len() != p.src.len() {
            return Err(Error::data(format!(
                "sentence {}: tagged source has {} tokens but bitext source has {}",
                k + 1,
                s.tokens.len(),
                p.src.len()
            )));
        }
    }
    alignment.validate_against(tgt)
}

/// Votes for every target token of every sentence.
pub fn token_project(src: &TaggedCorpus, alignment: &AlignmentSet, tgt: &ParallelCorpus) -> Result<Vec<Vec<Votes>>> {
    check_lines(src, alignment, tgt)?;
    Ok(src
        .sentences
        .par_iter()
        .zip(&alignment.sentences)
        .zip(&tgt.pairs)
        .map(|((s, a), p)| {
            let mut votes = vec![Votes::new(); p.tgt.len()];
            for &(i, j) in a.sure() {
                *votes[j].entry(s.tags[i].clone()).or_default() += 1;
            }
            votes
        })
        .collect())
}

/// Allowed tags with their winning-vote counts, per target word type.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeDictionary {
    pub entries: BTreeMap<String, BTreeMap<String, usize>>,
}

impl TypeDictionary {
    pub fn allowed(&self, word: &str) -> Option<&BTreeMap<String, usize>> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Tallies each token's winning vote per word type and keeps tags with a
/// count of at least `beta` times the type's maximum.
pub fn build_type_dictionary(
    votes: &[Vec<Votes>],
    tgt: &ParallelCorpus,
    beta: f64,
    priority: &TagPriority,
) -> TypeDictionary {
    let mut tally: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for (sentence, pair) in votes.iter().zip(&tgt.pairs) {
        for (v, word) in sentence.iter().zip(&pair.tgt) {
            if let Some(w) = priority.best(v.iter().map(|(t, &c)| (t, c))) {
                *tally.entry(word.clone()).or_default().entry(w.clone()).or_default() += 1;
            }
        }
    }
    for counts in tally.values_mut() {
        let max = counts.values().copied().max().unwrap_or(0) as f64;
        counts.retain(|_, c| *c as f64 >= beta * max);
    }
    TypeDictionary { entries: tally }
}

/// Final tag of one token.
pub fn choose_tag<'a>(
    votes: &'a Votes,
    entry: Option<&'a BTreeMap<String, usize>>,
    priority: &TagPriority,
    fallback: &'a String,
) -> &'a String {
    if votes.is_empty() {
        return fallback;
    }
    let all = || votes.iter().map(|(t, &c)| (t, c));
    match entry {
        Some(allowed) => priority
            .best(all().filter(|(t, _)| allowed.contains_key(*t)))
            .or_else(|| priority.best(allowed.iter().map(|(t, &c)| (t, c))))
            .unwrap_or(fallback),
        None => priority.best(all()).unwrap_or(fallback),
    }
}

/// Rewrites every `I-X` not preceded by `B-X` or `I-X` as `B-X`. Returns the
/// number of tags changed.
pub fn repair_bio(tags: &mut [String]) -> usize {
    let mut changed = 0;
    for k in 0..tags.len() {
        let Some(kind) = tags[k].strip_prefix("I-") else { continue };
        let continues = k > 0 && {
            let prev = &tags[k - 1];
            prev.strip_prefix("B-").or_else(|| prev.strip_prefix("I-")) == Some(kind)
        };
        if !continues {
            tags[k] = format!("B-{kind}");
            changed += 1;
        }
    }
    changed
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProjectionStats {
    pub sentences: usize,
    pub kept: usize,
    pub dropped: usize,
    pub tokens: usize,
    pub aligned_tokens: usize,
    pub dictionary_types: usize,
    pub repaired: usize,
}

impl ProjectionStats {
    /// `key\tvalue` lines.
    pub fn to_tsv(&self) -> String {
        let coverage = if self.tokens == 0 {
            0.0
        } else {
            self.aligned_tokens as f64 / self.tokens as f64
        };
        format!(
            "sentences\t{}\nkept\t{}\ndropped\t{}\ntokens\t{}\naligned_tokens\t{}\ntoken_coverage\t{:.4}\ndictionary_types\t{}\nrepaired\t{}\n",
            self.sentences,
            self.kept,
            self.dropped,
            self.tokens,
            self.aligned_tokens,
            coverage,
            self.dictionary_types,
            self.repaired
        )
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub corpus: TaggedCorpus,
    /// Indices of the input sentences that were kept.
    pub kept: Vec<usize>,
    pub stats: ProjectionStats,
}

/// Projects source tags onto the target side of `tgt`.
pub fn project(
    src: &TaggedCorpus,
    alignment: &AlignmentSet,
    tgt: &ParallelCorpus,
    config: &ProjectionConfig,
) -> Result<Projection> {
    config.validate(&src.tagset)?;
    if src.task != config.task {
        return Err(Error::config(format!("source corpus is {} but projection task is {}", src.task, config.task)));
    }
    let priority = match &config.tag_priority {
        Some(order) => TagPriority::from_order(order, &src.tagset),
        None => TagPriority::from_frequency(src),
    };
    let votes = token_project(src, alignment, tgt)?;
    let dictionary = build_type_dictionary(&votes, tgt, config.type_threshold, &priority);

    let emitted: Vec<(Option<TaggedSentence>, usize, usize)> = votes
        .par_iter()
        .zip(&tgt.pairs)
        .map(|(sentence, pair)| {
            let aligned = sentence.iter().filter(|v| !v.is_empty()).count();
            if (aligned as f64) < config.min_coverage * sentence.len() as f64 {
                return (None, aligned, 0);
            }
            let mut tags: Vec<String> = sentence
                .iter()
                .zip(&pair.tgt)
                .map(|(v, w)| choose_tag(v, dictionary.allowed(w), &priority, &config.fallback_tag).clone())
                .collect();
            let repaired = if config.task == Task::Ner { repair_bio(&mut tags) } else { 0 };
            (Some(TaggedSentence { tokens: pair.tgt.clone(), tags }), aligned, repaired)
        })
        .collect();

    let mut stats = ProjectionStats {
        sentences: tgt.len(),
        dictionary_types: dictionary.len(),
        ..Default::default()
    };
    let mut sentences = Vec::new();
    let mut kept = Vec::new();
    for (k, ((s, aligned, repaired), pair)) in emitted.into_iter().zip(&tgt.pairs).enumerate() {
        stats.tokens += pair.tgt.len();
        stats.aligned_tokens += aligned;
        stats.repaired += repaired;
        if let Some(s) = s {
            sentences.push(s);
            kept.push(k);
        }
    }
    stats.kept = kept.len();
    stats.dropped = stats.sentences - stats.kept;
    Ok(Projection {
        corpus: TaggedCorpus {
            sentences,
            tagset: src.tagset.clone(),
            task: config.task,
        },
        kept,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{validate_bio, SentenceAlignment};
    use proptest::prelude::*;

    fn tagged(task: Task, sents: &[&[(&str, &str)]]) -> TaggedCorpus {
        let sentences: Vec<TaggedSentence> = sents
            .iter()
            .map(|s| TaggedSentence {
                tokens: s.iter().map(|(w, _)| w.to_string()).collect(),
                tags: s.iter().map(|(_, t)| t.to_string()).collect(),
            })
            .collect();
        let tagset = sentences.iter().flat_map(|s| s.tags.iter().cloned()).collect();
        TaggedCorpus { sentences, tagset, task }
    }

    fn bitext(pairs: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::from_pairs(pairs.iter().map(|(s, t)| {
            (
                s.split(' ').map(String::from).collect::<Vec<_>>(),
                t.split(' ').map(String::from).collect::<Vec<_>>(),
            )
        }))
        .unwrap()
    }

    fn links(sents: &[&[(usize, usize)]]) -> AlignmentSet {
        AlignmentSet::new(sents.iter().map(|l| SentenceAlignment::from_sure(l.iter().copied())).collect())
    }

    fn votes(pairs: &[(&str, usize)]) -> Votes {
        pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    #[test]
    fn votes_follow_links() {
        let src = tagged(Task::Pos, &[&[("el", "DET"), ("perro", "NOUN")]]);
        let tgt = bitext(&[("el perro", "dog barks")]);
        let v = token_project(&src, &links(&[&[(0, 0), (1, 0)]]), &tgt).unwrap();
        assert_eq!(v, vec![vec![votes(&[("DET", 1), ("NOUN", 1)]), Votes::new()]]);
        let v = token_project(&src, &links(&[&[]]), &tgt).unwrap();
        assert!(v[0].iter().all(|x| x.is_empty()));
    }

    #[test]
    fn line_count_mismatch() {
        let src = tagged(Task::Pos, &[&[("a", "X")]]);
        let tgt = bitext(&[("a", "b"), ("a", "b")]);
        assert!(token_project(&src, &links(&[&[(0, 0)]]), &tgt).is_err());
    }

    #[test]
    fn identity_round_trip() {
        let src = tagged(
            Task::Pos,
            &[&[("the", "DET"), ("dog", "NOUN"), ("runs", "VERB")], &[("a", "DET"), ("cat", "NOUN")]],
        );
        let tgt = bitext(&[("the dog runs", "the dog runs"), ("a cat", "a cat")]);
        let id = links(&[&[(0, 0), (1, 1), (2, 2)], &[(0, 0), (1, 1)]]);
        let cfg = ProjectionConfig { min_coverage: 0.0, ..ProjectionConfig::new(Task::Pos) };
        let out = project(&src, &id, &tgt, &cfg).unwrap();
        assert_eq!(out.corpus.sentences, src.sentences);
        assert_eq!(out.stats.dropped, 0);
    }

    #[test]
    fn dictionary_threshold() {
        // one type, ten NOUN wins and one VERB win
        let mut sents = vec![vec![votes(&[("NOUN", 1)])]; 10];
        sents.push(vec![votes(&[("VERB", 1)])]);
        let tgt = bitext(&vec![("x", "w"); 11]);
        let tagset: BTreeSet<String> = ["NOUN", "VERB"].iter().map(|s| s.to_string()).collect();
        let pri = TagPriority::from_order(&[], &tagset);
        let d = build_type_dictionary(&sents, &tgt, 0.3, &pri);
        assert_eq!(d.allowed("w").unwrap().keys().collect::<Vec<_>>(), vec!["NOUN"]);
        let d = build_type_dictionary(&sents, &tgt, 0.1, &pri);
        assert_eq!(d.allowed("w").unwrap().len(), 2);
        assert!(d.allowed("unseen").is_none());

        let tied = vec![vec![votes(&[("NOUN", 1)])], vec![votes(&[("VERB", 1)])]];
        let d = build_type_dictionary(&tied, &bitext(&[("x", "w"), ("x", "w")]), 1.0, &pri);
        assert_eq!(d.allowed("w").unwrap().len(), 2);
    }

    #[test]
    fn choice_rules() {
        let tagset: BTreeSet<String> = ["DET", "NOUN", "VERB"].iter().map(|s| s.to_string()).collect();
        let pri = TagPriority::from_order(&[], &tagset);
        let fallback = "NOUN".to_string();
        let v = votes(&[("DET", 1), ("NOUN", 1)]);
        let allowed: BTreeMap<String, usize> = [("NOUN".to_string(), 4)].into();
        assert_eq!(choose_tag(&v, Some(&allowed), &pri, &fallback), "NOUN");
        // no vote allowed: dictionary top
        let only_verb: BTreeMap<String, usize> = [("VERB".to_string(), 2)].into();
        assert_eq!(choose_tag(&v, Some(&only_verb), &pri, &fallback), "VERB");
        // unseen type: plain winner with lexicographic ties
        assert_eq!(choose_tag(&v, None, &pri, &fallback), "DET");
        let pri = TagPriority::from_order(&["NOUN".to_string()], &tagset);
        assert_eq!(choose_tag(&v, None, &pri, &fallback), "NOUN");
        assert_eq!(choose_tag(&Votes::new(), Some(&only_verb), &pri, &fallback), "NOUN");
    }

    #[test]
    fn frequency_priority() {
        let src = tagged(Task::Pos, &[&[("a", "VERB"), ("b", "VERB"), ("c", "ADJ"), ("d", "DET")]]);
        let p = TagPriority::from_frequency(&src);
        assert!(p.rank("VERB") < p.rank("ADJ") && p.rank("ADJ") < p.rank("DET"));
    }

    #[test]
    fn bio_repair() {
        let mut t: Vec<String> = ["O", "I-PER", "I-PER", "B-LOC", "I-ORG"].iter().map(|s| s.to_string()).collect();
        assert_eq!(repair_bio(&mut t), 2);
        assert_eq!(t, vec!["O", "B-PER", "I-PER", "B-LOC", "B-ORG"]);
    }

    #[test]
    fn coverage_filter() {
        let src = tagged(Task::Pos, &[&[("a", "DET"), ("b", "NOUN")], &[("c", "VERB")]]);
        let tgt = bitext(&[("a b", "x y z"), ("c", "w")]);
        let al = links(&[&[(0, 0), (1, 1)], &[(0, 0)]]);
        let run = |rho| project(&src, &al, &tgt, &ProjectionConfig { min_coverage: rho, ..ProjectionConfig::new(Task::Pos) }).unwrap();
        assert_eq!(run(0.5).kept, vec![0, 1]);
        assert_eq!(run(0.8).kept, vec![1]);
        let r = run(0.8);
        assert_eq!((r.stats.tokens, r.stats.aligned_tokens, r.stats.dropped), (4, 3, 1));
        assert_eq!(run(0.0).corpus.sentences[0].tags, vec!["DET", "NOUN", "NOUN"]);
    }

    #[test]
    fn bad_config() {
        let src = tagged(Task::Pos, &[&[("a", "DET")]]);
        let tgt = bitext(&[("a", "x")]);
        let al = links(&[&[(0, 0)]]);
        assert!(project(&src, &al, &tgt, &ProjectionConfig::new(Task::Pos)).is_err());
        let cfg = ProjectionConfig { fallback_tag: "DET".into(), type_threshold: 1.5, ..ProjectionConfig::new(Task::Pos) };
        assert!(project(&src, &al, &tgt, &cfg).is_err());
    }

    const NER_TAGS: [&str; 5] = ["O", "B-PER", "I-PER", "B-LOC", "I-LOC"];

    fn ner_case() -> impl Strategy<Value = (Vec<Vec<usize>>, Vec<Vec<(usize, usize)>>, usize)> {
        (1usize..6, 1usize..6).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(prop::collection::vec(0usize..5, n), 1..4),
                prop::collection::vec(prop::collection::vec((0..n, 0..m), 0..8), 1..4),
                Just(m),
            )
        })
    }

    proptest! {
        #[test]
        fn ner_output_is_bio_valid((tags, al, m) in ner_case(), rho in 0.0f64..1.0, beta in 0.0f64..1.0) {
            let k = tags.len().min(al.len());
            let n = tags[0].len();
            let sentences: Vec<TaggedSentence> = tags[..k].iter().map(|ts| TaggedSentence {
                tokens: (0..n).map(|i| format!("s{i}")).collect(),
                tags: ts.iter().map(|&t| NER_TAGS[t].to_string()).collect(),
            }).collect();
            let src = TaggedCorpus { sentences, tagset: NER_TAGS.iter().map(|s| s.to_string()).collect(), task: Task::Ner };
            let tgt = ParallelCorpus::from_pairs((0..k).map(|s| (
                (0..n).map(|i| format!("s{i}")).collect::<Vec<_>>(),
                (0..m).map(|j| format!("t{}", (j + s) % 3)).collect::<Vec<_>>(),
            ))).unwrap();
            let alignment = AlignmentSet::new(al[..k].iter().map(|l| SentenceAlignment::from_sure(l.iter().copied())).collect());
            let cfg = ProjectionConfig { min_coverage: rho, type_threshold: beta, ..ProjectionConfig::new(Task::Ner) };
            let out = project(&src, &alignment, &tgt, &cfg).unwrap();
            for s in &out.corpus.sentences {
                prop_assert!(validate_bio(&s.tags).is_ok(), "{:?}", s.tags);
                prop_assert!(s.tags.iter().all(|t| src.tagset.contains(t)));
            }
            let stricter = ProjectionConfig { min_coverage: (rho + 0.2).min(1.0), ..cfg };
            prop_assert!(project(&src, &alignment, &tgt, &stricter).unwrap().stats.kept <= out.stats.kept);
        }

        #[test]
        fn zero_thresholds_is_majority_vote((tags, al, m) in ner_case()) {
            let k = tags.len().min(al.len());
            let n = tags[0].len();
            let pos = ["DET", "NOUN", "VERB", "ADJ", "ADV"];
            let sentences: Vec<TaggedSentence> = tags[..k].iter().map(|ts| TaggedSentence {
                tokens: (0..n).map(|i| format!("s{i}")).collect(),
                tags: ts.iter().map(|&t| pos[t].to_string()).collect(),
            }).collect();
            let mut tagset: BTreeSet<String> = pos.iter().map(|s| s.to_string()).collect();
            tagset.insert("NOUN".into());
            let src = TaggedCorpus { sentences, tagset, task: Task::Pos };
            let tgt = ParallelCorpus::from_pairs((0..k).map(|s| (
                (0..n).map(|i| format!("s{i}")).collect::<Vec<_>>(),
                (0..m).map(|j| format!("t{}", (j * 7 + s) % 2)).collect::<Vec<_>>(),
            ))).unwrap();
            let alignment = AlignmentSet::new(al[..k].iter().map(|l| SentenceAlignment::from_sure(l.iter().copied())).collect());
            let cfg = ProjectionConfig { min_coverage: 0.0, type_threshold: 0.0, ..ProjectionConfig::new(Task::Pos) };
            let out = project(&src, &alignment, &tgt, &cfg).unwrap();
            let pri = TagPriority::from_frequency(&src);
            let votes = token_project(&src, &alignment, &tgt).unwrap();
            for (s, v) in out.corpus.sentences.iter().zip(&votes) {
                for (tag, tv) in s.tags.iter().zip(v) {
                    let expect = pri.best(tv.iter().map(|(t, &c)| (t, c))).cloned().unwrap_or_else(|| "NOUN".into());
                    prop_assert_eq!(tag, &expect);
                }
            }
        }
    }
}
