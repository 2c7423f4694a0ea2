use std::io::{Read, Write};

use super::{Condition, FeatureVector, N_FEATURES};
use crate::error::{Error, Result};

fn header() -> Vec<String> {
    (1..=N_FEATURES)
        .map(|i| format!("f{i}"))
        .chain(["label".to_string(), "window_index".to_string()])
        .collect()
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Format(e.to_string())
}

/// Writes rows as `f1..f14,label,window_index`; unlabeled rows have an empty label.
pub fn write_feature_csv<W: Write>(rows: &[FeatureVector], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header()).map_err(csv_err)?;
    for r in rows {
        let mut rec: Vec<String> = r.values.iter().map(|v| v.to_string()).collect();
        rec.push(r.label.map(|c| c.label().to_string()).unwrap_or_default());
        rec.push(r.window_index.to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<FeatureVector>> {
    let mut rd = csv::Reader::from_reader(input);
    let found: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if found != header() {
        return Err(Error::Format(format!("unexpected feature header {found:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let mut values = [0.0; N_FEATURES];
        for (i, v) in values.iter_mut().enumerate() {
            *v = field(i)
                .parse()
                .map_err(|_| Error::Format(format!("row {}: bad f{} '{}'", line + 1, i + 1, field(i))))?;
        }
        let label = match field(N_FEATURES) {
            "" => None,
            s => Some(s.parse::<Condition>()?),
        };
        let window_index = field(N_FEATURES + 1)
            .parse()
            .map_err(|_| Error::Format(format!("row {}: bad window index", line + 1)))?;
        rows.push(FeatureVector::new(values, label, window_index));
    }
    Ok(rows)
}
