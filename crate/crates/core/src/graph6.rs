//! graph6 codec.
//!
//! Bits of the upper triangle are taken **column-wise**:
//! `(0,1),(0,2),(1,2),(0,3),(1,3),(2,3),…`, padded with zeros to a multiple
//! of six, and each 6-bit group is written as one byte `63 + value`.
//! The order prefix is one byte `63 + n` for `n ≤ 62`, or `~` followed by
//! three 6-bit groups for larger orders.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::{pair_count, Graph};

const HEADER: &[u8] = b">>graph6<<";

pub fn to_graph6(g: &Graph) -> String {
    let n = g.order();
    let mut out = Vec::with_capacity(4 + pair_count(n).div_ceil(6));
    if n <= 62 {
        out.push(63 + n as u8);
    } else {
        out.push(b'~');
        out.extend([(n >> 12) & 63, (n >> 6) & 63, n & 63].map(|x| 63 + x as u8));
    }
    let mut acc = 0u8;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            acc = acc << 1 | g.has_edge(i, j) as u8;
            filled += 1;
            if filled == 6 {
                out.push(63 + acc);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push(63 + (acc << (6 - filled)));
    }
    // every byte is in 63..=126
    String::from_utf8(out).expect("graph6 bytes are ASCII")
}

pub fn from_graph6(s: &str) -> Result<Graph> {
    let bytes = s.trim_end_matches(['\n', '\r']).as_bytes();
    let bytes = bytes.strip_prefix(HEADER).unwrap_or(bytes);
    for (k, &b) in bytes.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(Error::parse(format!(
                "byte {b:#04x} at offset {k} is outside the graph6 range 63..=126"
            )));
        }
    }
    let (n, body) = match bytes {
        [] => return Err(Error::parse("empty graph6 string")),
        [b'~', rest @ ..] => {
            if rest.first() == Some(&b'~') {
                return Err(Error::parse("orders above 258047 are not supported"));
            }
            if rest.len() < 3 {
                return Err(Error::parse("truncated order prefix"));
            }
            let n = rest[..3]
                .iter()
                .fold(0usize, |acc, &b| acc << 6 | (b - 63) as usize);
            (n, &rest[3..])
        }
        [first, rest @ ..] => ((first - 63) as usize, rest),
    };
    let mut g = Graph::empty(n)?;
    let needed = pair_count(n).div_ceil(6);
    if body.len() != needed {
        return Err(Error::parse(format!(
            "order {n} needs {needed} data bytes, found {}",
            body.len()
        )));
    }
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            let byte = body[k / 6] - 63;
            if byte >> (5 - k % 6) & 1 == 1 {
                g.add_edge(i, j);
            }
            k += 1;
        }
    }
    if k % 6 != 0 && (body[k / 6] - 63) & ((1 << (6 - k % 6)) - 1) != 0 {
        return Err(Error::parse("non-zero padding bits"));
    }
    Ok(g)
}

/// Reads newline-delimited graph6, yielding one item per non-empty line.
/// Parse failures carry the 1-based line number.
pub fn read_graph6_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, Result<Graph>)> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(idx, line)| {
            let line_no = idx + 1;
            match line {
                Err(e) => Some((line_no, Err(Error::Io(e)))),
                Ok(l) if l.trim().is_empty() => None,
                Ok(l) => Some((
                    line_no,
                    from_graph6(l.trim()).map_err(|e| match e {
                        Error::Parse { msg, .. } => Error::Parse {
                            line: Some(line_no),
                            msg,
                        },
                        other => other,
                    }),
                )),
            }
        })
}
