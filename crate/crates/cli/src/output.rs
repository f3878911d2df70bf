use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

pub const SCHEMA: &str = "twolevel/1";

pub fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Columns as `name,name,...` followed by one row per sample, every value
/// with 17 significant digits.
pub fn write_csv(w: &mut dyn Write, columns: &[(&str, &[f64])]) -> io::Result<()> {
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    writeln!(w, "{}", names.join(","))?;
    let rows = columns.iter().map(|c| c.1.len()).min().unwrap_or(0);
    let mut line = String::new();
    for i in 0..rows {
        line.clear();
        for (k, (_, col)) in columns.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:.16e}", col[i]));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

/// `{"schema": ..., "command": ..., <fields>}`.
pub fn document(command: &str, fields: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), Value::from(SCHEMA));
    m.insert("command".into(), Value::from(command));
    for (k, v) in fields {
        m.insert(k.into(), v);
    }
    Value::Object(m)
}

pub fn write_json(w: &mut dyn Write, v: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)?;
    w.flush()
}

/// One diagnostic per line on stderr.
pub fn diagnostic(level: &str, kind: &str, message: &str, extra: Option<Value>) {
    let mut m = Map::new();
    m.insert("schema".into(), Value::from(SCHEMA));
    m.insert("level".into(), Value::from(level));
    m.insert("kind".into(), Value::from(kind));
    m.insert("message".into(), Value::from(message));
    if let Some(x) = extra {
        m.insert("details".into(), x);
    }
    let line = serde_json::to_string(&Value::Object(m)).unwrap_or_default();
    let _ = writeln!(io::stderr().lock(), "{line}");
}
