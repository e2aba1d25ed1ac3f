use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use super::{CorpusError, HeadlineRecord, Label};

/// Number of annotators behind each CLICK-ID headline.
pub const RATERS_PER_HEADLINE: u32 = 3;

/// Ingestion schema of a headline file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// One JSON object per headline (JSON lines, or a single JSON array) with
    /// `id`, `title`, `label` and `label_score`, the number of raters that
    /// chose `label`.
    ClickIdJson,
    /// CSV with header `id,title,label`; each row is a single final label.
    SimpleCsv,
}

impl Schema {
    pub fn id(self) -> &'static str {
        match self {
            Schema::ClickIdJson => "clickid-json",
            Schema::SimpleCsv => "simple-csv",
        }
    }
}

impl FromStr for Schema {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clickid-json" => Ok(Schema::ClickIdJson),
            "simple-csv" => Ok(Schema::SimpleCsv),
            other => Err(CorpusError::UnknownSchema(other.to_string())),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, schema: Schema) -> Result<Vec<HeadlineRecord>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    parse_dataset(&text, schema)
}

/// Parses headline records from file contents. Titles are kept verbatim.
pub fn parse_dataset(text: &str, schema: Schema) -> Result<Vec<HeadlineRecord>, CorpusError> {
    let records = match schema {
        Schema::ClickIdJson => parse_clickid(text)?,
        Schema::SimpleCsv => parse_simple_csv(text)?,
    };
    let mut seen = HashSet::with_capacity(records.len());
    for (_, r) in &records {
        if !seen.insert(r.id.as_str()) {
            return Err(CorpusError::DuplicateId { id: r.id.clone() });
        }
    }
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

fn parse_clickid(text: &str) -> Result<Vec<(usize, HeadlineRecord)>, CorpusError> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if trimmed.starts_with('[') {
        let values: Vec<Value> = serde_json::from_str(text)
            .map_err(|e| CorpusError::MalformedRow { line: e.line(), message: e.to_string() })?;
        // Entries of an array are numbered from 1 in place of line numbers.
        return values
            .iter()
            .enumerate()
            .map(|(i, v)| clickid_record(v, i + 1).map(|r| (i + 1, r)))
            .collect();
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line)
            .map_err(|e| CorpusError::MalformedRow { line: line_no, message: e.to_string() })?;
        out.push((line_no, clickid_record(&value, line_no)?));
    }
    Ok(out)
}

fn clickid_record(value: &Value, line: usize) -> Result<HeadlineRecord, CorpusError> {
    let malformed = |message: String| CorpusError::MalformedRow { line, message };
    let obj = value.as_object().ok_or_else(|| malformed("expected a JSON object".into()))?;

    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(other) => return Err(malformed(format!("id must be a string, got {other}"))),
        None => format!("line-{line}"),
    };
    let title = match obj.get("title") {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(malformed("missing string field \"title\"".into())),
    };
    check_title(&title, line)?;
    let label_text = match obj.get("label") {
        Some(Value::String(s)) => s.as_str(),
        _ => return Err(malformed("missing string field \"label\"".into())),
    };
    let label = parse_label(label_text, line)?;
    let score = obj
        .get("label_score")
        .and_then(Value::as_u64)
        .ok_or_else(|| malformed("missing integer field \"label_score\"".into()))?;
    if score > RATERS_PER_HEADLINE as u64 {
        return Err(malformed(format!(
            "label_score {score} exceeds the {RATERS_PER_HEADLINE} raters per headline"
        )));
    }

    let mut rater_labels = vec![label; score as usize];
    rater_labels.resize(RATERS_PER_HEADLINE as usize, label.other());
    Ok(HeadlineRecord { id, title, rater_labels, final_label: None })
}

fn parse_simple_csv(text: &str) -> Result<Vec<(usize, HeadlineRecord)>, CorpusError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::MalformedRow { line: 1, message: e.to_string() })?
        .clone();
    let column = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| CorpusError::MalformedRow {
            line: 1,
            message: format!("header lacks column {name:?}"),
        })
    };
    let (id_col, title_col, label_col) = (column("id")?, column("title")?, column("label")?);

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CorpusError::MalformedRow {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |col: usize| row.get(col).unwrap_or("");
        let title = field(title_col).to_string();
        check_title(&title, line)?;
        let label = parse_label(field(label_col), line)?;
        out.push((line, HeadlineRecord::labeled(field(id_col), title, label)));
    }
    Ok(out)
}

fn parse_label(text: &str, line: usize) -> Result<Label, CorpusError> {
    text.parse::<Label>()
        .map_err(|_| CorpusError::UnknownLabel { value: text.to_string(), line: Some(line) })
}

fn check_title(title: &str, line: usize) -> Result<(), CorpusError> {
    if title.trim().is_empty() {
        return Err(CorpusError::MalformedRow { line, message: "empty title".into() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_empty_list() {
        assert!(parse_dataset("", Schema::ClickIdJson).unwrap().is_empty());
        assert!(parse_dataset("\n\n", Schema::ClickIdJson).unwrap().is_empty());
        assert!(parse_dataset("", Schema::SimpleCsv).unwrap().is_empty());
    }

    #[test]
    fn clickid_lines_map_scores_to_raters() {
        let text = concat!(
            r#"{"id":"a","title":"  Heboh!  ","label":"clickbait","label_score":3}"#,
            "\n",
            r#"{"id":"b","title":"KPK tangkap bupati","label":"non-clickbait","label_score":2}"#,
            "\n"
        );
        let recs = parse_dataset(text, Schema::ClickIdJson).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].title, "  Heboh!  ");
        assert_eq!(recs[0].rater_labels, vec![Label::Clickbait; 3]);
        assert_eq!(
            recs[1].rater_labels,
            vec![Label::NonClickbait, Label::NonClickbait, Label::Clickbait]
        );
        assert!(recs.iter().all(|r| r.final_label.is_none()));
    }

    #[test]
    fn clickid_array_form() {
        let text = r#"[{"id":1,"title":"x","label":"clickbait","label_score":3}]"#;
        let recs = parse_dataset(text, Schema::ClickIdJson).unwrap();
        assert_eq!(recs[0].id, "1");
    }

    #[test]
    fn unknown_label_is_named() {
        let text = r#"{"id":"a","title":"t","label":"maybe","label_score":3}"#;
        let err = parse_dataset(text, Schema::ClickIdJson).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownLabel { ref value, line: Some(1) } if value == "maybe"));
        assert!(err.to_string().contains("maybe"));

        let csv = "id,title,label\n1,judul,maybe\n";
        let err = parse_dataset(csv, Schema::SimpleCsv).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownLabel { line: Some(2), .. }));
    }

    #[test]
    fn malformed_rows_report_line() {
        let text = "{\"id\":\"a\",\"title\":\"t\",\"label\":\"clickbait\",\"label_score\":3}\n{not json\n";
        match parse_dataset(text, Schema::ClickIdJson).unwrap_err() {
            CorpusError::MalformedRow { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        let text = r#"{"id":"a","title":"t","label":"clickbait","label_score":5}"#;
        assert!(matches!(
            parse_dataset(text, Schema::ClickIdJson),
            Err(CorpusError::MalformedRow { line: 1, .. })
        ));
        let text = r#"{"id":"a","title":"   ","label":"clickbait","label_score":3}"#;
        assert!(parse_dataset(text, Schema::ClickIdJson).is_err());
    }

    #[test]
    fn simple_csv_with_quotes() {
        let csv = "id,title,label\n1,\"Wow, ternyata begini\",clickbait\n2,Harga cabai naik,non-clickbait\n";
        let recs = parse_dataset(csv, Schema::SimpleCsv).unwrap();
        assert_eq!(recs[0].title, "Wow, ternyata begini");
        assert_eq!(recs[0].final_label, Some(Label::Clickbait));
        assert_eq!(recs[1].final_label, Some(Label::NonClickbait));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let csv = "id,title,label\n1,a,clickbait\n1,b,clickbait\n";
        assert!(matches!(parse_dataset(csv, Schema::SimpleCsv), Err(CorpusError::DuplicateId { .. })));
    }

    #[test]
    fn schema_ids() {
        assert_eq!("clickid-json".parse::<Schema>().unwrap(), Schema::ClickIdJson);
        assert!("xml".parse::<Schema>().is_err());
    }
}
