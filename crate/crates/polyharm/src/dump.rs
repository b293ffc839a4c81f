//! Kernel-matrix and field dumps in the grid-cache layout: a header line, the
//! nodes and weights, then the payload as little-endian f64.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use polyharm_core::{GreenOperator, Point, SampledField};

use crate::binary::{grading_token, invalid, read_f64s, read_points, write_f64s, write_points, Header};

pub const KERNEL_MAGIC: &str = "polyharm-kernel v1";
pub const FIELD_MAGIC: &str = "polyharm-field v1";

/// Contents of a dump file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub n: usize,
    pub m: usize,
    pub level: u32,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// Row-major `N × N` quadrature matrix for kernel dumps, `N` values for fields.
    pub values: Vec<f64>,
}

fn header(magic: &str, op: &GreenOperator, extra: &[(&str, String)]) -> Header {
    let grid = op.grid();
    let problem = grid.problem();
    let (g, focus) = grading_token(grid.grading(), problem.n());
    let mut h = Header::new(magic)
        .with("n", problem.n())
        .with("level", grid.level())
        .with("grading", g)
        .with("m", problem.m())
        .with("focus", focus)
        .with("count", grid.len());
    for (k, v) in extra {
        h = h.with(k, v);
    }
    h
}

fn write_grid(w: &mut impl Write, op: &GreenOperator) -> io::Result<()> {
    let grid = op.grid();
    write_points(w, grid.nodes(), grid.problem().n())?;
    write_f64s(w, grid.weights().iter().copied())
}

/// Writes the full quadrature matrix of `op` (row `i` holds the weights of
/// `u(x_i) = Σ_j W_ij f_j`).
pub fn write_kernel(path: &Path, op: &GreenOperator) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    header(KERNEL_MAGIC, op, &[]).write(&mut w)?;
    write_grid(&mut w, op)?;
    let mut row = vec![0.0; op.len()];
    for i in 0..op.len() {
        match op.row(i) {
            Some(r) => write_f64s(&mut w, r.iter().copied())?,
            None => {
                op.row_weights(i, &mut row);
                write_f64s(&mut w, row.iter().copied())?;
            }
        }
    }
    w.flush()
}

/// Writes `field` with the grid of `op`; `name` goes into the header.
pub fn write_field(path: &Path, op: &GreenOperator, field: &SampledField, name: &str) -> io::Result<()> {
    field.ensure_on(op.grid()).map_err(|e| invalid(&e.to_string()))?;
    let mut w = BufWriter::new(File::create(path)?);
    header(FIELD_MAGIC, op, &[("field", name.to_string())]).write(&mut w)?;
    write_grid(&mut w, op)?;
    write_f64s(&mut w, field.values().iter().copied())?;
    w.flush()
}

fn read_dump(path: &Path, magic: &str, square: bool) -> io::Result<Dump> {
    let mut r = BufReader::new(File::open(path)?);
    let h = Header::read(&mut r, magic)?;
    let field = |k: &str| -> io::Result<usize> {
        h.get(k).and_then(|v| v.parse().ok()).ok_or_else(|| invalid(&format!("missing or bad `{k}` in header")))
    };
    let (n, m, level, count) = (field("n")?, field("m")?, field("level")?, field("count")?);
    let nodes = read_points(&mut r, count, n)?;
    let weights = read_f64s(&mut r, count)?;
    let values = read_f64s(&mut r, if square { count * count } else { count })?;
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(invalid("trailing bytes after payload"));
    }
    Ok(Dump { n, m, level: level as u32, nodes, weights, values })
}

pub fn read_kernel(path: &Path) -> io::Result<Dump> {
    read_dump(path, KERNEL_MAGIC, true)
}

pub fn read_field(path: &Path) -> io::Result<Dump> {
    read_dump(path, FIELD_MAGIC, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyharm_core::{BallProblem, Grading, GreenKernel, Provenance, QuadratureGrid};

    #[test]
    fn kernel_and_field_round_trip() {
        let p = BallProblem::new(2, 1).unwrap();
        let g = QuadratureGrid::build(&p, 0, Grading::default()).unwrap();
        let op = GreenOperator::new(&GreenKernel::new(&p).unwrap(), &g).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let kpath = dir.path().join("k.bin");
        write_kernel(&kpath, &op).unwrap();
        let k = read_kernel(&kpath).unwrap();
        assert_eq!((k.n, k.m, k.level), (2, 1, 0));
        assert_eq!(k.nodes, g.nodes());
        assert_eq!(k.weights, g.weights());
        let ones = SampledField::from_fn(&g, Provenance::RightHandSide, |_| 1.0).unwrap();
        let u = op.apply(&ones).unwrap();
        for (i, ui) in u.values().iter().enumerate() {
            let row = &k.values[i * g.len()..(i + 1) * g.len()];
            let s: f64 = row.iter().sum();
            assert!((s - ui).abs() <= 1e-12 * ui.abs());
        }

        let fpath = dir.path().join("f.bin");
        write_field(&fpath, &op, &u, "u").unwrap();
        let f = read_field(&fpath).unwrap();
        assert_eq!(f.values, u.values());
        assert!(read_kernel(&fpath).is_err());
    }
}
