use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::strip_bom;

const FORMAT: &str = "conll";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Pos,
    Ner,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Pos => "pos",
            Task::Ner => "ner",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pos" => Ok(Task::Pos),
            "ner" => Ok(Task::Ner),
            other => Err(Error::config(format!("unknown task {other:?} (expected pos or ner)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedCorpus {
    pub sentences: Vec<TaggedSentence>,
    pub tagset: BTreeSet<String>,
    pub task: Task,
}

impl TaggedCorpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ConllOptions<'a> {
    pub task: Task,
    /// Closed tag inventory; inferred from the file when absent.
    pub tagset: Option<&'a BTreeSet<String>>,
    /// Reject NER files whose tags are not a valid BIO sequence.
    pub strict: bool,
}

impl ConllOptions<'_> {
    pub fn new(task: Task) -> Self {
        ConllOptions {
            task,
            tagset: None,
            strict: true,
        }
    }
}

/// Position of the first BIO violation in `tags`, if any.
///
/// A violation is an `I-X` whose predecessor is neither `B-X` nor `I-X`, or a
/// tag that is not `O`, `B-…` or `I-…`.
pub fn validate_bio<S: AsRef<str>>(tags: &[S]) -> std::result::Result<(), usize> {
    let mut prev: Option<&str> = None;
    for (k, tag) in tags.iter().enumerate() {
        let tag = tag.as_ref();
        if tag != "O" {
            let (prefix, label) = tag.split_at_checked(2).ok_or(k)?;
            match prefix {
                "B-" if !label.is_empty() => {}
                "I-" if !label.is_empty() => {
                    let continues = prev.is_some_and(|p| {
                        (p.starts_with("B-") || p.starts_with("I-")) && &p[2..] == label
                    });
                    if !continues {
                        return Err(k);
                    }
                }
                _ => return Err(k),
            }
        }
        prev = Some(tag);
    }
    Ok(())
}

/// Parses `token<TAB>tag` lines with blank-line sentence separators.
pub fn parse_conll(text: &str, options: &ConllOptions<'_>) -> Result<TaggedCorpus> {
    let text = strip_bom(text);
    let mut sentences = Vec::new();
    let mut current = TaggedSentence {
        tokens: Vec::new(),
        tags: Vec::new(),
    };
    let mut start_line = 1;
    let mut seen = BTreeSet::new();

    let finish = |current: &mut TaggedSentence, start_line: usize, sentences: &mut Vec<TaggedSentence>| -> Result<()> {
        if current.tokens.is_empty() {
            return Ok(());
        }
        if options.task == Task::Ner && options.strict {
            if let Err(k) = validate_bio(&current.tags) {
                return Err(Error::parse(
                    FORMAT,
                    start_line + k,
                    format!("invalid BIO tag {:?}", current.tags[k]),
                ));
            }
        }
        sentences.push(std::mem::replace(
            current,
            TaggedSentence {
                tokens: Vec::new(),
                tags: Vec::new(),
            },
        ));
        Ok(())
    };

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.is_empty() {
            finish(&mut current, start_line, &mut sentences)?;
            continue;
        }
        if current.tokens.is_empty() {
            start_line = line;
        }
        let (token, tag) = raw
            .split_once('\t')
            .ok_or_else(|| Error::parse(FORMAT, line, "expected `token<TAB>tag`"))?;
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::parse(FORMAT, line, format!("invalid token {token:?}")));
        }
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(Error::parse(FORMAT, line, format!("invalid tag {tag:?}")));
        }
        if let Some(tagset) = options.tagset {
            if !tagset.contains(tag) {
                return Err(Error::parse(FORMAT, line, format!("tag {tag:?} not in tagset")));
            }
        }
        seen.insert(tag.to_string());
        current.tokens.push(token.to_string());
        current.tags.push(tag.to_string());
    }
    finish(&mut current, start_line, &mut sentences)?;

    let tagset = match options.tagset {
        Some(t) => t.clone(),
        None => seen,
    };
    Ok(TaggedCorpus {
        sentences,
        tagset,
        task: options.task,
    })
}

pub fn serialize_conll(corpus: &TaggedCorpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        for (token, tag) in s.tokens.iter().zip(&s.tags) {
            out.push_str(token);
            out.push('\t');
            out.push_str(tag);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_sentence() {
        let c = parse_conll("el\tDET\nperro\tNOUN\n\n", &ConllOptions::new(Task::Pos)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.sentences[0].tokens, vec!["el", "perro"]);
        assert_eq!(c.sentences[0].tags, vec!["DET", "NOUN"]);
        assert_eq!(c.tagset.len(), 2);
    }

    #[test]
    fn orphan_inside_tag_rejected_in_strict_mode() {
        let err = parse_conll("Juan\tI-PER\n\n", &ConllOptions::new(Task::Ner)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let lenient = ConllOptions {
            strict: false,
            ..ConllOptions::new(Task::Ner)
        };
        assert!(parse_conll("Juan\tI-PER\n\n", &lenient).is_ok());
    }

    #[test]
    fn tag_outside_tagset() {
        let tagset: BTreeSet<String> = ["DET".to_string()].into();
        let opts = ConllOptions {
            tagset: Some(&tagset),
            ..ConllOptions::new(Task::Pos)
        };
        let err = parse_conll("el\tDET\nperro\tNOUN\n\n", &opts).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn bio_rules() {
        assert!(validate_bio(&["B-PER", "I-PER", "O", "B-LOC"]).is_ok());
        assert_eq!(validate_bio(&["O", "I-PER"]), Err(1));
        assert_eq!(validate_bio(&["B-LOC", "I-PER"]), Err(1));
        assert_eq!(validate_bio(&["X"]), Err(0));
        assert_eq!(validate_bio(&["B-"]), Err(0));
        assert!(validate_bio::<&str>(&[]).is_ok());
    }

    #[test]
    fn missing_tab_is_error() {
        assert!(parse_conll("el DET\n\n", &ConllOptions::new(Task::Pos)).is_err());
    }

    fn sentence() -> impl Strategy<Value = TaggedSentence> {
        prop::collection::vec(("[a-zñ]{1,5}", prop::sample::select(vec!["O", "B-PER", "B-LOC"])), 1..6)
            .prop_map(|v| TaggedSentence {
                tokens: v.iter().map(|(t, _)| t.clone()).collect(),
                tags: v.iter().map(|(_, g)| g.to_string()).collect(),
            })
    }

    proptest! {
        #[test]
        fn round_trip_reproduces_bytes(sentences in prop::collection::vec(sentence(), 0..5)) {
            let tagset = sentences.iter().flat_map(|s| s.tags.iter().cloned()).collect();
            let corpus = TaggedCorpus { sentences, tagset, task: Task::Ner };
            let text = serialize_conll(&corpus);
            let parsed = parse_conll(&text, &ConllOptions::new(Task::Ner)).unwrap();
            prop_assert_eq!(serialize_conll(&parsed), text);
            prop_assert_eq!(parsed, corpus);
        }
    }
}
