use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Maps discipline codes onto broad fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    code_to_field: BTreeMap<String, String>,
    engineering_field: String,
}

impl Default for Taxonomy {
    /// Six broad fields; each code is its own field name.
    fn default() -> Self {
        let fields = [
            "agriculture",
            "bio_health",
            "engineering",
            "humanities",
            "physical_math",
            "social",
        ];
        Taxonomy {
            code_to_field: fields.iter().map(|f| (f.to_string(), f.to_string())).collect(),
            engineering_field: "engineering".to_string(),
        }
    }
}

impl Taxonomy {
    /// Parses `code<TAB>field` lines; `#` comments allowed.
    pub fn parse(contents: &str, engineering_field: &str) -> Result<Taxonomy> {
        let mut code_to_field = BTreeMap::new();
        for (i, line) in contents.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (code, field) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("taxonomy line {}: expected code<TAB>field", i + 1)))?;
            code_to_field.insert(code.trim().to_string(), field.trim().to_string());
        }
        if code_to_field.is_empty() {
            return Err(Error::Parse("taxonomy is empty".into()));
        }
        Ok(Taxonomy {
            code_to_field,
            engineering_field: engineering_field.to_string(),
        })
    }

    /// Field of a code; codes outside the taxonomy map to themselves.
    pub fn field_of<'a>(&'a self, code: &'a str) -> &'a str {
        self.code_to_field.get(code).map_or(code, String::as_str)
    }

    pub fn is_engineering(&self, code: &str) -> bool {
        self.field_of(code) == self.engineering_field
    }

    pub fn fields(&self) -> BTreeSet<&str> {
        self.code_to_field.values().map(String::as_str).collect()
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.code_to_field.keys().map(String::as_str)
    }
}
