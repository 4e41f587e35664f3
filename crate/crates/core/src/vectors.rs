//! JSON Lines vector exchange: one `{"expr": .., "vector": [..]}` per line.
//! Expressions are keyed by their normalized printed form.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SyntaxError};
use crate::syntax::{parse_str, print_expr};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorRecord {
    pub expr: String,
    pub vector: Vec<f64>,
}

/// Reprints `text` in normalized form (single spaces around `+` and `?`).
pub fn normalize_expr(text: &str) -> Result<String, SyntaxError> {
    Ok(print_expr(&parse_str(text)?))
}

pub fn write_vectors<W: Write>(records: &[VectorRecord], mut w: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_vectors<R: BufRead>(r: R) -> Result<Vec<VectorRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: VectorRecord =
            serde_json::from_str(&line).map_err(|e| Error::Format { line: i + 1, message: e.to_string() })?;
        if let Some(bad) = rec.vector.iter().find(|x| !x.is_finite()) {
            return Err(Error::Format { line: i + 1, message: format!("non-finite entry {bad}") });
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let recs = vec![
            VectorRecord { expr: "aa:A + bb:B".into(), vector: vec![0.1, -2.5e-17, 1.0 / 3.0] },
            VectorRecord { expr: "qf".into(), vector: vec![] },
        ];
        let mut buf = Vec::new();
        write_vectors(&recs, &mut buf).unwrap();
        assert_eq!(read_vectors(&buf[..]).unwrap(), recs);
        assert!(String::from_utf8(buf).unwrap().starts_with("{\"expr\":\"aa:A + bb:B\",\"vector\":[0.1,"));
    }

    #[test]
    fn malformed_lines() {
        let err = read_vectors("{\"expr\":\"qf\",\"vector\":[1]}\n\nnot json\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 3, .. }));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_expr("aa:A+bb:B").unwrap(), "aa:A + bb:B");
        assert_eq!(normalize_expr(" ( aa:A ) ").unwrap(), "aa:A");
        assert!(normalize_expr("aa:").is_err());
    }
}
