//! Batch files: one line per batch, `batch <index>: <net ids>`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::netlist::NetId;

pub fn write_batches<W: Write>(mut w: W, batches: &[Vec<NetId>]) -> std::io::Result<()> {
    for (i, batch) in batches.iter().enumerate() {
        write!(w, "batch {i}:")?;
        for id in batch {
            write!(w, " {id}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn batches_to_string(batches: &[Vec<NetId>]) -> String {
    let mut buf = Vec::new();
    write_batches(&mut buf, batches).expect("write to Vec");
    String::from_utf8(buf).expect("ascii")
}

/// Parses a batch file. Indices must run 0, 1, 2, … in order; blank lines and
/// `#` comments are skipped. Ids are not checked against any netlist.
pub fn parse_batches<R: BufRead>(reader: R) -> Result<Vec<Vec<NetId>>> {
    let mut batches = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let rest = line
            .strip_prefix("batch")
            .ok_or_else(|| Error::parse(line_no, "expected `batch <index>: <ids>`"))?;
        let (index, ids) = rest
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, "missing `:` after batch index"))?;
        let index: usize = index
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad batch index `{}`", index.trim())))?;
        if index != batches.len() {
            return Err(Error::parse(
                line_no,
                format!(
                    "batch index {index} out of order, expected {}",
                    batches.len()
                ),
            ));
        }
        let ids = ids
            .split_whitespace()
            .map(|t| {
                t.parse::<NetId>()
                    .map_err(|_| Error::parse(line_no, format!("bad net id `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        batches.push(ids);
    }
    Ok(batches)
}

pub fn parse_batches_str(text: &str) -> Result<Vec<Vec<NetId>>> {
    parse_batches(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let b = vec![vec![0, 4, 7], vec![], vec![1]];
        let text = batches_to_string(&b);
        assert_eq!(text, "batch 0: 0 4 7\nbatch 1:\nbatch 2: 1\n");
        assert_eq!(parse_batches_str(&text).unwrap(), b);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("batch 0: 1\nbatch 2: 3\n", 2),
            ("# header\n\nbatch 0: x\n", 3),
            ("bunch 0: 1\n", 1),
            ("batch 0 1 2\n", 1),
        ];
        for (text, line) in cases {
            match parse_batches_str(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
