//! Alignment error rate, precision, recall and F-measure.
//!
//! Scores are computed from counts summed over the whole corpus, never as
//! averages of per-sentence scores. With predicted links `A`, sure gold `S`
//! and possible gold `P`:
//!
//! ```text
//! precision = |A∩P| / |A|      recall = |A∩S| / |S|
//! F   = 2PR / (P + R)          AER = 1 - (|A∩S| + |A∩P|) / (|A| + |S|)
//! ```
//!
//! Empty denominators: `|A| = 0` gives precision 1, `|S| = 0` gives recall 1,
//! `P + R = 0` gives F 0 and `|A| + |S| = 0` gives AER 0.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::AddAssign;

use serde::Serialize;

use crate::corpus::{AlignmentSet, SentenceAlignment};
use crate::error::{Error, Result};

/// Raw link counts behind an [`EvalReport`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounts {
    pub predicted: usize,
    pub sure: usize,
    pub possible: usize,
    pub predicted_sure: usize,
    pub predicted_possible: usize,
}

impl AddAssign for EvalCounts {
    fn add_assign(&mut self, o: Self) {
        self.predicted += o.predicted;
        self.sure += o.sure;
        self.possible += o.possible;
        self.predicted_sure += o.predicted_sure;
        self.predicted_possible += o.predicted_possible;
    }
}

impl EvalCounts {
    pub fn of_sentence(pred: &SentenceAlignment, gold: &SentenceAlignment) -> Self {
        let a = pred.sure();
        EvalCounts {
            predicted: a.len(),
            sure: gold.sure().len(),
            possible: gold.possible().len(),
            predicted_sure: a.intersection(gold.sure()).count(),
            predicted_possible: a.intersection(gold.possible()).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub aer: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub counts: EvalCounts,
}

impl EvalReport {
    pub fn from_counts(c: EvalCounts) -> Self {
        let precision = if c.predicted == 0 {
            1.0
        } else {
            c.predicted_possible as f64 / c.predicted as f64
        };
        let recall = if c.sure == 0 {
            1.0
        } else {
            c.predicted_sure as f64 / c.sure as f64
        };
        let f_measure = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let aer = if c.predicted + c.sure == 0 {
            0.0
        } else {
            1.0 - (c.predicted_sure + c.predicted_possible) as f64 / (c.predicted + c.sure) as f64
        };
        EvalReport {
            aer,
            precision,
            recall,
            f_measure,
            counts: c,
        }
    }
}

/// Per-sentence counts, for callers that re-aggregate subsets.
pub fn sentence_counts(pred: &AlignmentSet, gold: &AlignmentSet) -> Result<Vec<EvalCounts>> {
    if pred.len() != gold.len() {
        return Err(Error::data(format!(
            "prediction has {} sentences but gold has {}",
            pred.len(),
            gold.len()
        )));
    }
    Ok(pred
        .sentences
        .iter()
        .zip(&gold.sentences)
        .map(|(p, g)| EvalCounts::of_sentence(p, g))
        .collect())
}

/// Scores the sure links of `pred` against `gold`.
pub fn evaluate(pred: &AlignmentSet, gold: &AlignmentSet) -> Result<EvalReport> {
    let mut total = EvalCounts::default();
    for c in sentence_counts(pred, gold)? {
        total += c;
    }
    Ok(EvalReport::from_counts(total))
}

/// Formats a value in `[0, 1]` as a percentage with two decimals.
pub fn percent(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// TSV of AER percentages, one row per method, one column per language plus
/// an unweighted average over the languages the method has. Missing cells
/// print as `-`.
pub fn report_table(rows: &[(String, BTreeMap<String, EvalReport>)]) -> String {
    let languages: BTreeSet<&String> = rows.iter().flat_map(|(_, m)| m.keys()).collect();
    let mut out = String::from("method");
    for lang in &languages {
        out.push('\t');
        out.push_str(lang);
    }
    out.push_str("\tavg\n");
    for (method, reports) in rows {
        out.push_str(method);
        let mut present = Vec::new();
        for lang in &languages {
            out.push('\t');
            match reports.get(*lang) {
                Some(r) => {
                    out.push_str(&percent(r.aer));
                    present.push(r.aer);
                }
                None => out.push('-'),
            }
        }
        out.push('\t');
        if present.is_empty() {
            out.push('-');
        } else {
            out.push_str(&percent(present.iter().sum::<f64>() / present.len() as f64));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Link;
    use proptest::prelude::*;

    fn one(links: &[Link]) -> AlignmentSet {
        AlignmentSet::new(vec![SentenceAlignment::from_sure(links.iter().copied())])
    }

    #[test]
    fn perfect_prediction() {
        let g = one(&[(0, 0), (1, 2)]);
        let r = evaluate(&g, &g).unwrap();
        assert_eq!((r.aer, r.precision, r.recall, r.f_measure), (0.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_worked_sure_only() {
        let r = evaluate(&one(&[(0, 0), (1, 1), (2, 2)]), &one(&[(0, 0), (1, 2)])).unwrap();
        assert!((r.precision - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.recall - 0.5).abs() < 1e-12);
        assert!((r.f_measure - 0.4).abs() < 1e-12);
        assert!((r.aer - 0.6).abs() < 1e-12);
    }

    #[test]
    fn hand_worked_with_possible() {
        let gold = AlignmentSet::new(vec![SentenceAlignment::from_parts([(0, 0), (2, 1)], [(1, 1)])]);
        let r = evaluate(&one(&[(0, 0), (1, 1), (1, 2)]), &gold).unwrap();
        assert!((r.aer - 0.4).abs() < 1e-12);
        assert_eq!(r.counts.predicted_possible, 2);
    }

    #[test]
    fn empty_denominators() {
        let empty = one(&[]);
        let r = evaluate(&empty, &empty).unwrap();
        assert_eq!((r.aer, r.precision, r.recall, r.f_measure), (0.0, 1.0, 1.0, 1.0));
        let r = evaluate(&empty, &one(&[(0, 0)])).unwrap();
        assert_eq!((r.precision, r.recall, r.f_measure, r.aer), (1.0, 0.0, 0.0, 1.0));
        let r = evaluate(&one(&[(0, 1)]), &one(&[(0, 0)])).unwrap();
        assert_eq!(r.f_measure, 0.0);
    }

    #[test]
    fn count_mismatch() {
        assert!(evaluate(&one(&[]), &AlignmentSet::default()).is_err());
    }

    #[test]
    fn corpus_aggregation_not_mean() {
        let pred = AlignmentSet::new(vec![
            SentenceAlignment::from_sure([(0, 0)]),
            SentenceAlignment::from_sure([(0, 0), (1, 1), (2, 2)]),
        ]);
        let gold = AlignmentSet::new(vec![
            SentenceAlignment::from_sure([(0, 0)]),
            SentenceAlignment::from_sure([(5, 5)]),
        ]);
        // counts: A=4, S=2, A∩S=1 -> 1 - 2/6
        let r = evaluate(&pred, &gold).unwrap();
        assert!((r.aer - (1.0 - 2.0 / 6.0)).abs() < 1e-15);
    }

    fn report(aer: f64) -> EvalReport {
        EvalReport { aer, ..EvalReport::from_counts(EvalCounts::default()) }
    }

    #[test]
    fn table_layout() {
        let rows = vec![
            ("fastalign".to_string(), BTreeMap::from([("gn".to_string(), report(0.4771))])),
            (
                "awesome".to_string(),
                BTreeMap::from([("gn".to_string(), report(0.5)), ("bzd".to_string(), report(0.25))]),
            ),
        ];
        let t = report_table(&rows);
        assert_eq!(t, "method\tbzd\tgn\tavg\nfastalign\t-\t47.71\t47.71\nawesome\t25.00\t50.00\t37.50\n");
    }

    fn pair() -> impl Strategy<Value = (Vec<(Vec<Link>, Vec<Link>)>,)> {
        (prop::collection::vec(
            (prop::collection::vec((0usize..5, 0usize..5), 0..8), prop::collection::vec((0usize..5, 0usize..5), 0..8)),
            1..5,
        ),)
    }

    proptest! {
        #[test]
        fn sure_only_duality((sents,) in pair()) {
            let pred = AlignmentSet::new(sents.iter().map(|(a, _)| SentenceAlignment::from_sure(a.iter().copied())).collect());
            let gold = AlignmentSet::new(sents.iter().map(|(_, g)| SentenceAlignment::from_sure(g.iter().copied())).collect());
            let r = evaluate(&pred, &gold).unwrap();
            prop_assert!(r.counts.predicted + r.counts.sure == 0 || (r.aer - (1.0 - r.f_measure)).abs() < 1e-12);
            for x in [r.aer, r.precision, r.recall, r.f_measure] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
            prop_assert!(r.counts.predicted_sure <= r.counts.predicted_possible);
        }

        #[test]
        fn adding_a_sure_link_never_hurts((sents,) in pair(), k in 0usize..8) {
            let pred = AlignmentSet::new(sents.iter().map(|(a, _)| SentenceAlignment::from_sure(a.iter().copied())).collect());
            let gold = AlignmentSet::new(sents.iter().map(|(_, g)| SentenceAlignment::from_sure(g.iter().copied())).collect());
            let before = evaluate(&pred, &gold).unwrap().aer;
            let mut more = pred.clone();
            let s = k % more.len();
            if let Some(&link) = gold.sentences[s].sure().iter().nth(k % (gold.sentences[s].sure().len().max(1))) {
                more.sentences[s].insert_sure(link);
            }
            prop_assert!(evaluate(&more, &gold).unwrap().aer <= before + 1e-15);

            let mut fewer = pred.clone();
            let outside: Vec<Link> = fewer.sentences[s].sure().iter().copied().filter(|l| !gold.sentences[s].possible().contains(l)).collect();
            if let Some(&l) = outside.first() {
                fewer.sentences[s] = SentenceAlignment::from_sure(fewer.sentences[s].sure().iter().copied().filter(|x| *x != l));
            }
            prop_assert!(evaluate(&fewer, &gold).unwrap().aer <= before + 1e-15);
        }
    }
}
