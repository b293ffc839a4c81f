//! Binary layout shared by the grid cache and the dumps: one text header line
//! of space-separated `key=value` tokens after a magic and version, then
//! little-endian 64-bit floats.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use polyharm_core::{Grading, Point};

pub struct Header {
    pub magic: String,
    pub fields: BTreeMap<String, String>,
}

impl Header {
    pub fn new(magic: &str) -> Self {
        Self { magic: magic.into(), fields: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.insert(key.into(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(String::as_str)
    }

    /// The magic (e.g. `polyharm-grid v1`) followed by the fields. `n`,
    /// `level` and `grading` come first, in that order.
    pub fn line(&self) -> String {
        let mut s = self.magic.clone();
        let lead = ["n", "level", "grading"];
        for k in lead {
            if let Some(v) = self.fields.get(k) {
                s.push_str(&format!(" {k}={v}"));
            }
        }
        for (k, v) in &self.fields {
            if !lead.contains(&k.as_str()) {
                s.push_str(&format!(" {k}={v}"));
            }
        }
        s
    }

    pub fn write(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "{}", self.line())
    }

    /// Reads the header line; the magic must be exactly `magic`.
    pub fn read(r: &mut impl Read, magic: &str) -> io::Result<Self> {
        let mut line = Vec::new();
        let mut byte = [0u8; 1];
        loop {
            r.read_exact(&mut byte)?;
            if byte[0] == b'\n' {
                break;
            }
            line.push(byte[0]);
            if line.len() > 4096 {
                return Err(invalid("header line too long"));
            }
        }
        let line = String::from_utf8(line).map_err(|_| invalid("header is not UTF-8"))?;
        let rest = line.strip_prefix(magic).ok_or_else(|| invalid(&format!("expected header `{magic}`")))?;
        let mut fields = BTreeMap::new();
        for tok in rest.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| invalid("malformed header token"))?;
            fields.insert(k.to_string(), v.to_string());
        }
        Ok(Self { magic: magic.into(), fields })
    }
}

pub fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

pub fn write_f64s(w: &mut impl Write, xs: impl IntoIterator<Item = f64>) -> io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_f64s(r: &mut impl Read, count: usize) -> io::Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8 bytes"))).collect())
}

pub fn write_points(w: &mut impl Write, points: &[Point], n: usize) -> io::Result<()> {
    write_f64s(w, points.iter().flat_map(|p| p.0[..n].to_vec()))
}

pub fn read_points(r: &mut impl Read, count: usize, n: usize) -> io::Result<Vec<Point>> {
    Ok(read_f64s(r, count * n)?.chunks_exact(n).map(Point::from_slice).collect())
}

/// Grading as written in headers: the exponent, plus the focus coordinates
/// joined by `,` when there is a focus.
pub fn grading_token(g: &Grading, n: usize) -> (String, String) {
    let focus = match g.focus {
        Some(f) => f.0[..n].iter().map(|c| format!("{:x}", c.to_bits())).collect::<Vec<_>>().join(","),
        None => "none".into(),
    };
    (format!("{}", g.exponent), focus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = Header::new("polyharm-grid v1").with("level", 2).with("n", 3).with("grading", 2).with("count", 10);
        assert_eq!(h.line(), "polyharm-grid v1 n=3 level=2 grading=2 count=10");
        let mut bytes = Vec::new();
        h.write(&mut bytes).unwrap();
        write_f64s(&mut bytes, [1.5, -2.0]).unwrap();
        let mut r = bytes.as_slice();
        let back = Header::read(&mut r, "polyharm-grid v1").unwrap();
        assert_eq!(back.get("count"), Some("10"));
        assert_eq!(read_f64s(&mut r, 2).unwrap(), vec![1.5, -2.0]);
        assert!(Header::read(&mut bytes.as_slice(), "polyharm-kernel v1").is_err());
    }
}
