use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusId {
    Papers,
    Patents,
    Trials,
}

impl CorpusId {
    pub const ALL: [CorpusId; 3] = [CorpusId::Papers, CorpusId::Patents, CorpusId::Trials];

    pub fn as_str(self) -> &'static str {
        match self {
            CorpusId::Papers => "papers",
            CorpusId::Patents => "patents",
            CorpusId::Trials => "trials",
        }
    }
}

impl fmt::Display for CorpusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "papers" => Ok(CorpusId::Papers),
            "patents" => Ok(CorpusId::Patents),
            "trials" => Ok(CorpusId::Trials),
            other => Err(Error::UnknownCorpus(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Affiliation {
    Academic,
    Industry,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRef {
    #[serde(rename = "id")]
    pub author_id: String,
    #[serde(rename = "affiliation")]
    pub affiliation_kind: Affiliation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisciplineWeight {
    pub code: String,
    pub weight: f64,
}

/// One paper, patent or trial record. Serializes to the same line-record
/// schema it is ingested from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(rename = "corpus")]
    pub corpus_id: CorpusId,
    pub year: i32,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub authors: Vec<AuthorRef>,
    #[serde(rename = "venue", default, skip_serializing_if = "Option::is_none")]
    pub venue_id: Option<String>,
    #[serde(rename = "disciplines", default)]
    pub discipline_codes: Vec<DisciplineWeight>,
    #[serde(rename = "cited_venues", default, skip_serializing_if = "Option::is_none")]
    pub cited_venue_ids: Option<Vec<String>>,
}

impl Document {
    /// Title and abstract joined as one text, title first and separated by a
    /// sentence break.
    pub fn text(&self) -> String {
        if self.abstract_text.is_empty() {
            self.title.clone()
        } else {
            format!("{}. {}", self.title, self.abstract_text)
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }

    /// Validates one JSON record. The error string is the rejection reason
    /// code (`missing_field:year`, `invalid_field:authors`, ...).
    pub fn from_record(line: &str) -> Result<Document, String> {
        let value: Value = serde_json::from_str(line).map_err(|_| "malformed_json".to_string())?;
        let obj = value.as_object().ok_or_else(|| "malformed_json".to_string())?;

        let doc_id = required_str(obj, "doc_id")?;
        if doc_id.is_empty() {
            return Err("invalid_field:doc_id".into());
        }
        let corpus_id = required_str(obj, "corpus")?
            .parse::<CorpusId>()
            .map_err(|_| "invalid_field:corpus".to_string())?;
        let year = match obj.get("year") {
            None | Some(Value::Null) => return Err("missing_field:year".into()),
            Some(v) => v
                .as_i64()
                .and_then(|y| i32::try_from(y).ok())
                .ok_or_else(|| "invalid_field:year".to_string())?,
        };
        let title = required_str(obj, "title")?;
        let abstract_text = optional_str(obj, "abstract")?.unwrap_or_default();

        let mut authors = Vec::new();
        if let Some(list) = optional_array(obj, "authors")? {
            for a in list {
                let a = a.as_object().ok_or_else(|| "invalid_field:authors".to_string())?;
                let id = a
                    .get("id")
                    .and_then(Value::as_str)
                    .ok_or_else(|| "invalid_field:authors".to_string())?;
                if id.is_empty() {
                    return Err("invalid_field:authors".into());
                }
                let affiliation = match a.get("affiliation") {
                    None | Some(Value::Null) => Affiliation::Unknown,
                    Some(v) => serde_json::from_value(v.clone())
                        .map_err(|_| "invalid_field:authors".to_string())?,
                };
                authors.push(AuthorRef {
                    author_id: id.to_string(),
                    affiliation_kind: affiliation,
                });
            }
        }

        let venue_id = optional_str(obj, "venue")?;

        let mut discipline_codes = Vec::new();
        if let Some(list) = optional_array(obj, "disciplines")? {
            for d in list {
                let d = d.as_object().ok_or_else(|| "invalid_field:disciplines".to_string())?;
                let code = d.get("code").and_then(Value::as_str);
                let weight = d.get("weight").and_then(Value::as_f64);
                match (code, weight) {
                    (Some(c), Some(w)) if !c.is_empty() && w.is_finite() && w >= 0.0 => {
                        discipline_codes.push(DisciplineWeight {
                            code: c.to_string(),
                            weight: w,
                        })
                    }
                    _ => return Err("invalid_field:disciplines".into()),
                }
            }
            if !discipline_codes.is_empty() {
                let total: f64 = discipline_codes.iter().map(|d| d.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err("discipline_weights_not_normalized".into());
                }
            }
        }

        let cited_venue_ids = match optional_array(obj, "cited_venues")? {
            None => None,
            Some(list) => Some(
                list.iter()
                    .map(|v| v.as_str().map(str::to_string))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| "invalid_field:cited_venues".to_string())?,
            ),
        };

        Ok(Document {
            doc_id,
            corpus_id,
            year,
            title,
            abstract_text,
            authors,
            venue_id,
            discipline_codes,
            cited_venue_ids,
        })
    }
}

fn required_str(obj: &Map<String, Value>, key: &str) -> Result<String, String> {
    match obj.get(key) {
        None | Some(Value::Null) => Err(format!("missing_field:{key}")),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(format!("invalid_field:{key}")),
    }
}

fn optional_str(obj: &Map<String, Value>, key: &str) -> Result<Option<String>, String> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(format!("invalid_field:{key}")),
    }
}

fn optional_array<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
) -> Result<Option<&'a Vec<Value>>, String> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(a)) => Ok(Some(a)),
        Some(_) => Err(format!("invalid_field:{key}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{"doc_id":"p1","corpus":"papers","year":2001,"title":"Gene therapy",
        "abstract":"A study.","authors":[{"id":"a1","affiliation":"industry"},{"id":"a2"}],
        "venue":"V1","disciplines":[{"code":"bio_health","weight":0.5},{"code":"engineering","weight":0.5}],
        "extra_key":"ignored"}"#;

    #[test]
    fn parses_full_record() {
        let doc = Document::from_record(FULL).unwrap();
        assert_eq!(doc.doc_id, "p1");
        assert_eq!(doc.year, 2001);
        assert_eq!(doc.authors[0].affiliation_kind, Affiliation::Industry);
        assert_eq!(doc.authors[1].affiliation_kind, Affiliation::Unknown);
        assert_eq!(doc.venue_id.as_deref(), Some("V1"));
        assert_eq!(doc.discipline_codes.len(), 2);
        assert_eq!(doc.text(), "Gene therapy. A study.");
    }

    #[test]
    fn json_line_round_trips() {
        let doc = Document::from_record(FULL).unwrap();
        let again = Document::from_record(&doc.to_json_line()).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn missing_abstract_gives_title_only() {
        let doc =
            Document::from_record(r#"{"doc_id":"x","corpus":"patents","year":1999,"title":"Widget"}"#)
                .unwrap();
        assert_eq!(doc.text(), "Widget");
    }

    #[test]
    fn rejection_codes() {
        let cases = [
            (r#"{"doc_id":"x","corpus":"papers","title":"t"}"#, "missing_field:year"),
            (r#"{"doc_id":"x","corpus":"papers","year":"2001","title":"t"}"#, "invalid_field:year"),
            (r#"{"corpus":"papers","year":2001,"title":"t"}"#, "missing_field:doc_id"),
            (r#"{"doc_id":"x","corpus":"books","year":2001,"title":"t"}"#, "invalid_field:corpus"),
            (r#"{"doc_id":"x","corpus":"papers","year":2001,"title":"t","authors":[{"id":""}]}"#, "invalid_field:authors"),
            (
                r#"{"doc_id":"x","corpus":"papers","year":2001,"title":"t","disciplines":[{"code":"a","weight":0.4}]}"#,
                "discipline_weights_not_normalized",
            ),
            ("{not json", "malformed_json"),
            ("[1,2]", "malformed_json"),
        ];
        for (line, reason) in cases {
            assert_eq!(Document::from_record(line).unwrap_err(), reason, "{line}");
        }
    }

    #[test]
    fn corpus_id_parse() {
        assert_eq!("trials".parse::<CorpusId>().unwrap(), CorpusId::Trials);
        assert!(matches!("wos".parse::<CorpusId>(), Err(Error::UnknownCorpus(_))));
    }
}
