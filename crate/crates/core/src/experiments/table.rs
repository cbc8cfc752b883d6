//! Machine-readable result tables with reproducibility metadata.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// FNV-1a 64-bit hash; stable across runs and builds.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Provenance of a result table.
#[derive(Debug, Clone)]
pub struct TableMetadata {
    /// FNV-1a hash of the canonical JSON of the config, hex.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// Unix seconds at table creation. Kept out of the CSV encoding so
    /// identical runs produce identical bytes.
    pub timestamp_unix: u64,
}

impl TableMetadata {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Self {
            config_hash,
            seed,
            version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Rectangular numeric table plus metadata.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: TableMetadata,
}

impl ResultTable {
    pub fn new(columns: Vec<String>, metadata: TableMetadata) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Contract(format!(
                "row of {} values in a table of {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if row.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("refusing to record NaN in a table".into()));
        }
        self.rows.push(row);
        Ok(())
    }

    /// CSV with a header row; floats carry 17 significant digits so they
    /// round-trip exactly. Metadata rides in leading `#` comment lines;
    /// the timestamp is deliberately excluded (byte-identical reruns).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# config_hash={}\n", self.metadata.config_hash));
        out.push_str(&format!("# seed={}\n", self.metadata.seed));
        out.push_str(&format!("# version={}\n", self.metadata.version));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON document: a metadata object plus one object per row.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, v) in self.columns.iter().zip(row) {
                    obj.insert(name.clone(), json!(v));
                }
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "metadata": {
                "config_hash": self.metadata.config_hash,
                "seed": self.metadata.seed,
                "version": self.metadata.version,
                "timestamp_unix": self.metadata.timestamp_unix,
            },
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).expect("table serialization cannot fail")
    }
}
