use super::table::TranslationTable;
use super::{DiagonalParams, ModelKind};
use crate::error::{Error, Result};

/// A trained directional aligner.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentModel {
    pub table: TranslationTable,
    pub params: DiagonalParams,
}

impl AlignmentModel {
    /// Text form: `MODEL <kind> <lambda> <p0>` followed by `e f t(f|e)`
    /// triples sorted lexicographically. Reals use the shortest decimal form
    /// that reads back to the same value.
    pub fn to_text(&self) -> String {
        let mut out = format!("MODEL {} {} {}\n", self.params.kind, self.params.lambda, self.params.p0);
        self.table.write_triples(&mut out);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let text = crate::corpus::strip_bom(text);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::parse("model", 1, "empty model file"))?;
        let fields: Vec<&str> = header.split(' ').collect();
        let ["MODEL", kind, lambda, p0] = fields[..] else {
            return Err(Error::parse("model", 1, "expected `MODEL <kind> <lambda> <p0>`"));
        };
        let kind: ModelKind = kind.parse().map_err(|_| Error::parse("model", 1, format!("unknown kind {kind:?}")))?;
        let lambda: f64 = lambda
            .parse()
            .map_err(|_| Error::parse("model", 1, format!("invalid lambda {lambda:?}")))?;
        let p0: f64 = p0.parse().map_err(|_| Error::parse("model", 1, format!("invalid p0 {p0:?}")))?;
        if !(0.0..1.0).contains(&p0) || lambda.is_nan() || lambda < 0.0 {
            return Err(Error::parse("model", 1, "lambda must be ≥ 0 and p0 in [0, 1)"));
        }
        let table = TranslationTable::read_triples(lines, 2)?;
        Ok(AlignmentModel {
            table,
            params: DiagonalParams { lambda, p0, kind },
        })
    }
}
