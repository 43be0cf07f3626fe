//! Flat output records rendered as CSV or JSON.

use std::io::{self, Write};

use edsense::format::{fmt_sig, round_sig};
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(v) => fmt_sig(*v),
            Field::Int(v) => v.to_string(),
            Field::Text(s) => s.clone(),
            Field::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Num(v) => Number::from_f64(round_sig(*v))
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Field::Int(v) => Value::from(*v),
            Field::Text(s) => Value::String(s.clone()),
            Field::Missing => Value::Null,
        }
    }
}

/// An ordered list of named fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(&'static str, Field)>);

impl Record {
    pub fn push(&mut self, name: &'static str, field: Field) -> &mut Self {
        self.0.push((name, field));
        self
    }

    pub fn num(&mut self, name: &'static str, v: f64) -> &mut Self {
        self.push(name, Field::Num(v))
    }

    pub fn int(&mut self, name: &'static str, v: u64) -> &mut Self {
        self.push(name, Field::Int(v))
    }

    pub fn text(&mut self, name: &'static str, v: impl Into<String>) -> &mut Self {
        self.push(name, Field::Text(v.into()))
    }

    pub fn header(&self) -> String {
        self.0.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(",")
    }

    pub fn csv_row(&self) -> String {
        self.0
            .iter()
            .map(|(_, f)| f.csv())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, f) in &self.0 {
            m.insert((*k).to_string(), f.json());
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Writes records that share one schema. CSV gets a single header line;
/// JSON is an array of objects.
pub fn write_records<W: Write>(
    mut out: W,
    records: &[Record],
    format: OutputFormat,
) -> io::Result<()> {
    match format {
        OutputFormat::Csv => {
            if let Some(first) = records.first() {
                writeln!(out, "{}", first.header())?;
            }
            for r in records {
                writeln!(out, "{}", r.csv_row())?;
            }
        }
        OutputFormat::Json => {
            let arr = Value::Array(records.iter().map(Record::to_json).collect());
            serde_json::to_writer_pretty(&mut out, &arr)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
