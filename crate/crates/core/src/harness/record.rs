//! Result records and their CSV / JSON serialization.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::config::OutputFormat;
use crate::error::Result;

/// Insertion-ordered string map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fields<V>(Vec<(String, V)>);

impl<V> Fields<V> {
    pub fn new() -> Self {
        Fields(Vec::new())
    }

    pub fn insert(&mut self, key: impl Into<String>, value: V) {
        let key = key.into();
        match self.0.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&V> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &V)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<V: Serialize> Serialize for Fields<V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub experiment: String,
    pub seed: u64,
    pub parameters: Fields<String>,
    pub metrics: Fields<f64>,
}

impl Serialize for ResultRecord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ResultRecord", 4)?;
        st.serialize_field("experiment", &self.experiment)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("parameters", &self.parameters)?;
        st.serialize_field("metrics", &self.metrics)?;
        st.end()
    }
}

impl ResultRecord {
    pub fn new(experiment: &str, seed: u64) -> Self {
        ResultRecord {
            experiment: experiment.to_string(),
            seed,
            parameters: Fields::new(),
            metrics: Fields::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key, value.to_string());
        self
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key, value);
        self
    }

    pub fn get_param(&self, key: &str) -> Option<&str> {
        self.parameters.get(key).map(String::as_str)
    }

    pub fn get_metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

fn union<'a>(keys: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for k in keys {
        if !out.iter().any(|o| o == k) {
            out.push(k.to_string());
        }
    }
    out
}

/// CSV with a header row: `experiment, seed`, every parameter, every metric.
/// Cells a record lacks are left empty.
pub fn write_csv<W: Write>(records: &[ResultRecord], w: W) -> Result<()> {
    let params = union(records.iter().flat_map(|r| r.parameters.keys()));
    let metrics = union(records.iter().flat_map(|r| r.metrics.keys()));
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["experiment".to_string(), "seed".to_string()];
    header.extend(params.iter().cloned());
    header.extend(metrics.iter().cloned());
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![r.experiment.clone(), r.seed.to_string()];
        row.extend(params.iter().map(|k| r.parameters.get(k).cloned().unwrap_or_default()));
        row.extend(metrics.iter().map(|k| r.metrics.get(k).map(|v| v.to_string()).unwrap_or_default()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[ResultRecord], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, records)?;
    writeln!(w)?;
    Ok(())
}

pub fn write_records<W: Write>(records: &[ResultRecord], format: OutputFormat, w: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(records, w),
        OutputFormat::Json => write_json(records, w),
    }
}

pub fn write_records_to_path(records: &[ResultRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    write_records(records, format, file)
}
