//! On-disk grid cache and the operator source used by the commands.
//!
//! A cache file holds the header line
//! `polyharm-grid v1 n=<n> level=<L> grading=<g> ...`, then the nodes, the
//! weights and the generating cells as little-endian f64. Loading rebuilds
//! nodes and weights from the cells and requires a bitwise match, so a damaged
//! file is detected and replaced by a fresh build.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::rc::Rc;

use polyharm_core::grid::Cell;
use polyharm_core::{BallProblem, Grading, GreenOperator, OperatorCache, OperatorSource, QuadratureGrid, Result};

use crate::binary::{grading_token, read_f64s, read_points, write_f64s, write_points, Header};

pub const CACHE_ENV: &str = "POLYHARM_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = "./.cache";
const MAGIC: &str = "polyharm-grid v1";
const LOCK: &str = "polyharm.lock";

/// What happened on the last lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheEvent {
    Hit,
    Miss,
    Rebuilt,
}

#[derive(Debug, Clone)]
pub struct GridCache {
    dir: PathBuf,
    events: Vec<CacheEvent>,
}

impl GridCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), events: Vec::new() }
    }

    /// `$POLYHARM_CACHE_DIR`, or `./.cache`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_CACHE_DIR.into()))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn events(&self) -> &[CacheEvent] {
        &self.events
    }

    fn header(problem: &BallProblem, level: u32, grading: &Grading, count: usize) -> Header {
        let (g, focus) = grading_token(grading, problem.n());
        Header::new(MAGIC)
            .with("n", problem.n())
            .with("level", level)
            .with("grading", g)
            .with("m", problem.m())
            .with("focus", focus)
            .with("count", count)
    }

    pub fn path_for(&self, problem: &BallProblem, level: u32, grading: &Grading) -> PathBuf {
        let (g, focus) = grading_token(grading, problem.n());
        let focus = focus.replace(',', "_");
        self.dir.join(format!("grid-n{}-m{}-L{level}-g{g}-f{focus}.bin", problem.n(), problem.m()))
    }

    /// The cached grid, or a fresh build that is then stored. Cache IO
    /// failures never fail the lookup.
    pub fn grid(&mut self, problem: &BallProblem, level: u32, grading: Grading) -> Result<QuadratureGrid> {
        let path = self.path_for(problem, level, &grading);
        let existed = path.exists();
        if let Ok(g) = Self::load(&path, problem, level, grading) {
            self.events.push(CacheEvent::Hit);
            return Ok(g);
        }
        let grid = QuadratureGrid::build(problem, level, grading)?;
        let _ = self.store(&path, &grid);
        self.events.push(if existed { CacheEvent::Rebuilt } else { CacheEvent::Miss });
        Ok(grid)
    }

    pub fn load(path: &Path, problem: &BallProblem, level: u32, grading: Grading) -> io::Result<QuadratureGrid> {
        let mut r = BufReader::new(File::open(path)?);
        let header = Header::read(&mut r, MAGIC)?;
        let count: usize =
            header.get("count").and_then(|c| c.parse().ok()).ok_or_else(|| crate::binary::invalid("missing count"))?;
        if header.line() != Self::header(problem, level, &grading, count).line() {
            return Err(crate::binary::invalid("cache header does not match the request"));
        }
        let n = problem.n();
        let nodes = read_points(&mut r, count, n)?;
        let weights = read_f64s(&mut r, count)?;
        let raw = read_f64s(&mut r, count * (2 * n + 1))?;
        let cells = raw
            .chunks_exact(2 * n + 1)
            .map(|c| {
                let mut cell = Cell {
                    lo: [0.0; polyharm_core::MAX_DIM],
                    hi: [0.0; polyharm_core::MAX_DIM],
                    core: c[2 * n] != 0.0,
                };
                cell.lo[..n].copy_from_slice(&c[..n]);
                cell.hi[..n].copy_from_slice(&c[n..2 * n]);
                cell
            })
            .collect();
        let mut tail = [0u8; 1];
        if io::Read::read(&mut r, &mut tail)? != 0 {
            return Err(crate::binary::invalid("trailing bytes in cache file"));
        }
        QuadratureGrid::from_parts(problem, level, grading, nodes, weights, cells)
            .map_err(|e| crate::binary::invalid(&e.to_string()))
    }

    /// Writes through a temporary file and a rename while holding the lock
    /// file; if another writer holds the lock, nothing is written.
    pub fn store(&self, path: &Path, grid: &QuadratureGrid) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let lock_path = self.dir.join(LOCK);
        let _lock = match OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(f) => LockGuard { path: lock_path, _file: f },
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Ok(()),
            Err(e) => return Err(e),
        };
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            let n = grid.problem().n();
            Self::header(grid.problem(), grid.level(), grid.grading(), grid.len()).write(&mut w)?;
            write_points(&mut w, grid.nodes(), n)?;
            write_f64s(&mut w, grid.weights().iter().copied())?;
            for c in grid.cells() {
                write_f64s(&mut w, c.lo[..n].iter().chain(&c.hi[..n]).copied())?;
                write_f64s(&mut w, [if c.core { 1.0 } else { 0.0 }])?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, path)
    }
}

struct LockGuard {
    path: PathBuf,
    _file: File,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Operators on grids from the disk cache (if any), kept in memory under a
/// byte budget.
pub struct Workspace {
    pub grids: Option<GridCache>,
    pub operators: OperatorCache,
}

/// Default in-memory budget for dense operator matrices.
pub const DEFAULT_OPERATOR_BUDGET: usize = 2 << 30;

impl Workspace {
    pub fn new(grids: Option<GridCache>) -> Self {
        Self { grids, operators: OperatorCache::new(DEFAULT_OPERATOR_BUDGET) }
    }
}

impl OperatorSource for Workspace {
    fn operator(&mut self, problem: &BallProblem, level: u32, grading: Grading) -> Result<Rc<GreenOperator>> {
        let grids = &mut self.grids;
        self.operators.get_or_build(problem, level, grading, || match grids {
            Some(c) => c.grid(problem, level, grading),
            None => QuadratureGrid::build(problem, level, grading),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cold_warm_and_corrupted() {
        let dir = tempfile::tempdir().unwrap();
        let mut cache = GridCache::new(dir.path());
        let p = BallProblem::new(3, 1).unwrap();
        let g = Grading::default().with_focus(polyharm_core::Point::axis(0));
        let cold = cache.grid(&p, 1, g).unwrap();
        let warm = cache.grid(&p, 1, g).unwrap();
        assert_eq!(cold, warm);
        assert_eq!(cache.events(), &[CacheEvent::Miss, CacheEvent::Hit]);

        let path = cache.path_for(&p, 1, &g);
        let mut bytes = fs::read(&path).unwrap();
        let header_len = bytes.iter().position(|&b| b == b'\n').unwrap();
        let text = String::from_utf8(bytes[..header_len].to_vec()).unwrap();
        assert!(text.starts_with("polyharm-grid v1 n=3 level=1 grading=2 "));
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x55;
        fs::write(&path, &bytes).unwrap();
        let again = cache.grid(&p, 1, g).unwrap();
        assert_eq!(again, cold);
        assert_eq!(cache.events()[2], CacheEvent::Rebuilt);
        assert_eq!(cache.grid(&p, 1, g).unwrap(), cold);
        assert_eq!(cache.events()[3], CacheEvent::Hit);
    }

    #[test]
    fn held_lock_skips_writing() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(LOCK), b"").unwrap();
        let mut cache = GridCache::new(dir.path());
        let p = BallProblem::new(2, 1).unwrap();
        cache.grid(&p, 0, Grading::default()).unwrap();
        assert!(!cache.path_for(&p, 0, &Grading::default()).exists());
    }
}
