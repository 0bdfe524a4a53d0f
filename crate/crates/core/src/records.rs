//! Line-delimited record format: one JSON object per line, UTF-8.

use std::io::{self, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Parses every non-blank line. On failure returns the 1-based line number
/// and the parser message.
pub fn parse_lines<T: DeserializeOwned>(text: &str) -> Result<Vec<(usize, T)>, (usize, String)> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| (idx + 1, e.to_string()))?;
        out.push((idx + 1, rec));
    }
    Ok(out)
}

pub fn write_lines<W: Write, T: Serialize>(out: &mut W, items: &[T]) -> io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_lines<T: Serialize>(items: &[T]) -> String {
    let mut buf = Vec::new();
    write_lines(&mut buf, items).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
