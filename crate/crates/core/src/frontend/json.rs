//! The extraction record: a JSON view of one fragment with fixed key names.

use serde::{Deserialize, Serialize};

use super::extract::LoopFragment;

/// A dataset list. A single name serialises as a bare string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetField {
    One(String),
    Many(Vec<String>),
}

impl DatasetField {
    pub fn from_names(names: &[String]) -> Self {
        match names {
            [one] => DatasetField::One(one.clone()),
            _ => DatasetField::Many(names.to_vec()),
        }
    }

    pub fn names(&self) -> Vec<String> {
        match self {
            DatasetField::One(n) => vec![n.clone()],
            DatasetField::Many(ns) => ns.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Datasets {
    #[serde(rename = "Input")]
    pub input: DatasetField,
    #[serde(rename = "Output")]
    pub output: DatasetField,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationEntry {
    #[serde(rename = "Type")]
    pub kind: String,
    #[serde(rename = "Expression")]
    pub expression: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionRecord {
    #[serde(rename = "Loop ID")]
    pub loop_id: usize,
    #[serde(rename = "Start Line")]
    pub start_line: usize,
    #[serde(rename = "End Line")]
    pub end_line: usize,
    #[serde(rename = "Is Nested", with = "yes_no")]
    pub is_nested: bool,
    #[serde(rename = "Datasets")]
    pub datasets: Datasets,
    #[serde(rename = "Operations")]
    pub operations: Vec<OperationEntry>,
}

mod yes_no {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(if *v { "Yes" } else { "No" })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match String::deserialize(d)?.as_str() {
            "Yes" => Ok(true),
            "No" => Ok(false),
            other => Err(serde::de::Error::invalid_value(
                serde::de::Unexpected::Str(other),
                &"\"Yes\" or \"No\"",
            )),
        }
    }
}

impl From<&LoopFragment> for ExtractionRecord {
    fn from(f: &LoopFragment) -> Self {
        ExtractionRecord {
            loop_id: f.id,
            start_line: f.start_line,
            end_line: f.end_line,
            is_nested: f.is_nested,
            datasets: Datasets {
                input: DatasetField::from_names(&f.input_datasets),
                output: DatasetField::from_names(&f.output_datasets),
            },
            operations: f
                .operations
                .iter()
                .map(|op| OperationEntry {
                    kind: op.kind.label().to_string(),
                    expression: op.expression.clone(),
                })
                .collect(),
        }
    }
}

pub fn to_extraction_json(fragment: &LoopFragment) -> String {
    serde_json::to_string_pretty(&ExtractionRecord::from(fragment)).expect("record serialises")
}

pub fn from_extraction_json(text: &str) -> serde_json::Result<ExtractionRecord> {
    serde_json::from_str(text)
}
