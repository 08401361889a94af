use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{PivError, Result};

/// Rows plus a metadata echo of every input that produced them.
///
/// CSV form: one `# key: <json>` line per metadata entry, then a header
/// row and the data rows. JSON form: `{"metadata": {...}, "rows": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<R> {
    pub metadata: Map<String, Value>,
    pub rows: Vec<R>,
}

impl<R> Dataset<R> {
    pub fn new(metadata: Map<String, Value>, rows: Vec<R>) -> Self {
        Dataset { metadata, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Fixed CSV column order of a row type.
pub trait Columns {
    const COLUMNS: &'static [&'static str];
}

impl<R: Serialize + Columns> Dataset<R> {
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (key, value) in &self.metadata {
            out.push_str("# ");
            out.push_str(key);
            out.push_str(": ");
            out.push_str(&value.to_string());
            out.push('\n');
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            // still emit the header so the column contract is visible
            writer
                .write_record(R::COLUMNS)
                .map_err(|e| PivError::Format(e.to_string()))?;
        }
        for row in &self.rows {
            writer
                .serialize(row)
                .map_err(|e| PivError::Format(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| PivError::Format(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| PivError::Format(e.to_string()))?);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| PivError::Format(e.to_string()))
    }
}

impl<R: DeserializeOwned> Dataset<R> {
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = Map::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let entry = line.trim_start_matches('#').trim_start();
            let (key, value) = entry
                .split_once(": ")
                .ok_or_else(|| PivError::Format(format!("bad metadata line: {line}")))?;
            let value: Value =
                serde_json::from_str(value).map_err(|e| PivError::Format(e.to_string()))?;
            metadata.insert(key.to_string(), value);
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<R>, _>>()
            .map_err(|e| PivError::Format(e.to_string()))?;
        Ok(Dataset { metadata, rows })
    }
}
