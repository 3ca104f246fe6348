use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::{strip_bom, ParallelCorpus};

const FORMAT: &str = "pharaoh";

/// A word link `(source index, target index)`, both 0-based.
pub type Link = (usize, usize);

/// Links of one sentence pair. `possible` always contains `sure`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentenceAlignment {
    sure: BTreeSet<Link>,
    possible: BTreeSet<Link>,
}

impl SentenceAlignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// A sure-only alignment (possible = sure).
    pub fn from_sure<I: IntoIterator<Item = Link>>(links: I) -> Self {
        let sure: BTreeSet<Link> = links.into_iter().collect();
        SentenceAlignment {
            possible: sure.clone(),
            sure,
        }
    }

    /// Builds from sure links plus extra possible-only links.
    pub fn from_parts<I, J>(sure: I, possible_only: J) -> Self
    where
        I: IntoIterator<Item = Link>,
        J: IntoIterator<Item = Link>,
    {
        let mut a = Self::from_sure(sure);
        a.possible.extend(possible_only);
        a
    }

    pub fn insert_sure(&mut self, link: Link) {
        self.sure.insert(link);
        self.possible.insert(link);
    }

    pub fn insert_possible(&mut self, link: Link) {
        self.possible.insert(link);
    }

    pub fn sure(&self) -> &BTreeSet<Link> {
        &self.sure
    }

    pub fn possible(&self) -> &BTreeSet<Link> {
        &self.possible
    }

    pub fn is_empty(&self) -> bool {
        self.possible.is_empty()
    }

    /// Links with source and target indices exchanged.
    pub fn transposed(&self) -> SentenceAlignment {
        SentenceAlignment {
            sure: self.sure.iter().map(|&(i, j)| (j, i)).collect(),
            possible: self.possible.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }

    /// Checks every link against an `n × m` grid.
    pub fn check_bounds(&self, n: usize, m: usize) -> std::result::Result<(), Link> {
        match self.possible.iter().find(|&&(i, j)| i >= n || j >= m) {
            Some(&link) => Err(link),
            None => Ok(()),
        }
    }
}

/// Per-sentence alignments of a whole corpus, in corpus order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentSet {
    pub sentences: Vec<SentenceAlignment>,
}

impl AlignmentSet {
    pub fn new(sentences: Vec<SentenceAlignment>) -> Self {
        AlignmentSet { sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> AlignmentSet {
        AlignmentSet {
            sentences: indices.iter().map(|&k| self.sentences[k].clone()).collect(),
        }
    }

    /// Verifies sentence count and link bounds against a corpus.
    pub fn validate_against(&self, corpus: &ParallelCorpus) -> Result<()> {
        if self.len() != corpus.len() {
            return Err(Error::data(format!(
                "alignment has {} sentences but corpus has {}",
                self.len(),
                corpus.len()
            )));
        }
        for (k, (a, pair)) in self.sentences.iter().zip(&corpus.pairs).enumerate() {
            if let Err((i, j)) = a.check_bounds(pair.src.len(), pair.tgt.len()) {
                return Err(Error::data(format!(
                    "sentence {}: link {i}-{j} outside {}x{} grid",
                    k + 1,
                    pair.src.len(),
                    pair.tgt.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PharaohOptions<'a> {
    /// Indices in the file start at 1 instead of 0.
    pub one_based: bool,
    /// When given, the line count and every link are checked against it.
    pub corpus: Option<&'a ParallelCorpus>,
}

fn parse_index(s: &str, one_based: bool, line: usize, item: &str) -> Result<usize> {
    if s.starts_with('-') {
        return Err(Error::parse(FORMAT, line, format!("negative index in {item:?}")));
    }
    let v: usize = s
        .parse()
        .map_err(|_| Error::parse(FORMAT, line, format!("malformed link {item:?}")))?;
    if one_based {
        v.checked_sub(1)
            .ok_or_else(|| Error::parse(FORMAT, line, format!("index 0 in 1-based link {item:?}")))
    } else {
        Ok(v)
    }
}

fn parse_item(item: &str, one_based: bool, line: usize) -> Result<(Link, bool)> {
    // Skip position 0 so that a leading minus sign is seen as a negative index.
    let (pos, sure) = match item
        .char_indices()
        .skip(1)
        .find(|&(_, c)| c == '-' || c == '?')
    {
        Some((pos, c)) => (pos, c == '-'),
        None => return Err(Error::parse(FORMAT, line, format!("malformed link {item:?}"))),
    };
    let i = parse_index(&item[..pos], one_based, line, item)?;
    let j = parse_index(&item[pos + 1..], one_based, line, item)?;
    Ok(((i, j), sure))
}

/// Parses a Pharaoh alignment file, one line per sentence pair.
pub fn parse_pharaoh(text: &str, options: PharaohOptions<'_>) -> Result<AlignmentSet> {
    let text = strip_bom(text);
    let mut sentences = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let mut a = SentenceAlignment::new();
        for item in raw.split_whitespace() {
            let (link, sure) = parse_item(item, options.one_based, line)?;
            if sure {
                a.insert_sure(link);
            } else {
                a.insert_possible(link);
            }
        }
        if let Some(corpus) = options.corpus {
            let pair = corpus.pairs.get(k).ok_or_else(|| {
                Error::parse(FORMAT, line, format!("more alignment lines than the {} corpus pairs", corpus.len()))
            })?;
            if let Err((i, j)) = a.check_bounds(pair.src.len(), pair.tgt.len()) {
                return Err(Error::parse(
                    FORMAT,
                    line,
                    format!("link {i}-{j} out of range for {}x{} pair", pair.src.len(), pair.tgt.len()),
                ));
            }
        }
        sentences.push(a);
    }
    if let Some(corpus) = options.corpus {
        if sentences.len() != corpus.len() {
            return Err(Error::parse(
                FORMAT,
                sentences.len() + 1,
                format!("expected {} alignment lines, found {}", corpus.len(), sentences.len()),
            ));
        }
    }
    Ok(AlignmentSet { sentences })
}

fn serialize_sentence(a: &SentenceAlignment, out: &mut String) {
    let mut first = true;
    for link in &a.possible {
        if !first {
            out.push(' ');
        }
        first = false;
        let sep = if a.sure.contains(link) { '-' } else { '?' };
        out.push_str(&format!("{}{sep}{}", link.0, link.1));
    }
}

/// Writes links sorted by `(i, j)`, sure as `i-j` and possible-only as `i?j`.
pub fn serialize_pharaoh(set: &AlignmentSet) -> String {
    let mut out = String::new();
    for a in &set.sentences {
        serialize_sentence(a, &mut out);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<AlignmentSet> {
        parse_pharaoh(text, PharaohOptions::default())
    }

    #[test]
    fn sure_links() {
        let a = parse("0-0 1-2").unwrap();
        let s = &a.sentences[0];
        assert_eq!(s.sure().iter().copied().collect::<Vec<_>>(), vec![(0, 0), (1, 2)]);
        assert_eq!(s.sure(), s.possible());
    }

    #[test]
    fn possible_links() {
        let a = parse("0-0 1?1").unwrap();
        let s = &a.sentences[0];
        assert_eq!(s.sure().iter().copied().collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(s.possible().iter().copied().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn malformed_items() {
        for bad in ["0-x", "0", "-1-2", "1--2", "a?b", "0-0-0"] {
            assert!(parse(bad).is_err(), "{bad} should fail");
        }
        let err = parse("0-0\n0-x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn negative_index_message() {
        let err = parse("-1-0").unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
    }

    #[test]
    fn out_of_range_against_corpus() {
        let corpus = crate::corpus::parse_bitext("a b ||| x\n").unwrap();
        let opts = PharaohOptions { corpus: Some(&corpus), ..Default::default() };
        assert!(parse_pharaoh("1-0\n", opts).is_ok());
        let err = parse_pharaoh("1-1\n", opts).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(parse_pharaoh("0-0\n0-0\n", opts).is_err());
        assert!(parse_pharaoh("", opts).is_err());
    }

    #[test]
    fn one_based_import() {
        let opts = PharaohOptions { one_based: true, ..Default::default() };
        let a = parse_pharaoh("1-1 2?3\n", opts).unwrap();
        assert_eq!(serialize_pharaoh(&a), "0-0 1?2\n");
        assert!(parse_pharaoh("0-1\n", opts).is_err());
    }

    #[test]
    fn canonical_ordering() {
        let set = AlignmentSet::new(vec![SentenceAlignment::from_sure([(1, 2), (0, 0)])]);
        assert_eq!(serialize_pharaoh(&set), "0-0 1-2\n");
    }

    #[test]
    fn empty_set_is_empty_line() {
        let set = AlignmentSet::new(vec![SentenceAlignment::new()]);
        assert_eq!(serialize_pharaoh(&set), "\n");
        assert_eq!(parse("\n").unwrap(), set);
    }

    #[test]
    fn possible_only_marker() {
        let set = AlignmentSet::new(vec![SentenceAlignment::from_parts([(0, 0)], [(2, 1)])]);
        assert_eq!(serialize_pharaoh(&set), "0-0 2?1\n");
    }

    fn sentence() -> impl Strategy<Value = SentenceAlignment> {
        (
            prop::collection::btree_set((0usize..12, 0usize..12), 0..10),
            prop::collection::btree_set((0usize..12, 0usize..12), 0..10),
        )
            .prop_map(|(s, p)| SentenceAlignment::from_parts(s, p))
    }

    proptest! {
        #[test]
        fn round_trip(sentences in prop::collection::vec(sentence(), 0..6)) {
            let set = AlignmentSet::new(sentences);
            let text = serialize_pharaoh(&set);
            let parsed = parse(&text).unwrap();
            prop_assert_eq!(&parsed, &set);
            prop_assert_eq!(serialize_pharaoh(&parsed), text);
            for s in &parsed.sentences {
                prop_assert!(s.sure().is_subset(s.possible()));
            }
        }
    }
}
