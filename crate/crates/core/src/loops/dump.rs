//! Text dump of a loop sample: a header line, then one loop per line as
//! `id root k multiplicity steps` with comma-separated coordinates and
//! step directions.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{LoopMode, LoopSample, RootedLoop};
use crate::error::{Error, Result};
use crate::lattice::Vertex;

pub const LOOP_DUMP_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct DumpHeader {
    pub d: usize,
    pub k_max: usize,
    pub mode: LoopMode,
    pub seed: u64,
    pub replica: u64,
}

fn mode_name(m: LoopMode) -> &'static str {
    match m {
        LoopMode::Free => "free",
        LoopMode::BoxKilled => "box-killed",
        LoopMode::Torus => "torus",
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_loop_dump(path: &Path, sample: &LoopSample) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# cable-loops v{LOOP_DUMP_VERSION} d={} k_max={} mode={} seed={} replica={} count={}",
        sample.base.d(),
        sample.k_max,
        mode_name(sample.mode),
        sample.seed,
        sample.replica,
        sample.loops.len()
    )?;
    for l in &sample.loops {
        writeln!(w, "{} {} {} {} {}", l.id, join(&l.root.0), l.len(), l.multiplicity, join(&l.steps))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_loop_dump(path: &Path) -> Result<(DumpHeader, Vec<RootedLoop>)> {
    let bad = |reason: String| Error::Format { path: path.to_path_buf(), reason };
    let mut lines = BufReader::new(File::open(path)?).lines();
    let head = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let mut fields = head.split_whitespace();
    if fields.next() != Some("#") || fields.next() != Some("cable-loops") {
        return Err(bad("missing cable-loops header".into()));
    }
    if fields.next() != Some(&format!("v{LOOP_DUMP_VERSION}")) {
        return Err(bad("unsupported version".into()));
    }
    let mut kv = std::collections::HashMap::new();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| bad(format!("bad header field {f}")))?;
        kv.insert(k, v);
    }
    let num = |k: &str| -> Result<u64> {
        kv.get(k).and_then(|v| v.parse().ok()).ok_or_else(|| bad(format!("header lacks {k}")))
    };
    let mode = match kv.get("mode").copied() {
        Some("free") => LoopMode::Free,
        Some("box-killed") => LoopMode::BoxKilled,
        Some("torus") => LoopMode::Torus,
        _ => return Err(bad("unknown mode".into())),
    };
    let header = DumpHeader {
        d: num("d")? as usize,
        k_max: num("k_max")? as usize,
        mode,
        seed: num("seed")?,
        replica: num("replica")?,
    };
    let mut loops = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |r: &str| bad(format!("line {}: {r}", n + 2));
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(at("expected 5 fields"));
        }
        let id = parts[0].parse().map_err(|_| at("bad id"))?;
        let root: Vec<i64> = parts[1].split(',').map(|c| c.parse()).collect::<std::result::Result<_, _>>().map_err(|_| at("bad root"))?;
        let k: usize = parts[2].parse().map_err(|_| at("bad length"))?;
        let multiplicity = parts[3].parse().map_err(|_| at("bad multiplicity"))?;
        let steps: Vec<u8> = parts[4].split(',').map(|c| c.parse()).collect::<std::result::Result<_, _>>().map_err(|_| at("bad steps"))?;
        if root.len() != header.d || steps.len() != k || steps.iter().any(|&s| s as usize >= 2 * header.d) {
            return Err(at("inconsistent loop"));
        }
        loops.push(RootedLoop { id, root: Vertex(root), steps, multiplicity });
    }
    Ok((header, loops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::loops::{sample_loop_soup, LoopOptions};

    #[test]
    fn round_trip() {
        let bx = BoxSpec::centered(3, 2).unwrap();
        let s = sample_loop_soup(&bx, &LoopOptions { k_max: 10, ..Default::default() }, 9, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("loops.txt");
        write_loop_dump(&p, &s).unwrap();
        let (h, loops) = read_loop_dump(&p).unwrap();
        assert_eq!(h, DumpHeader { d: 3, k_max: 10, mode: LoopMode::BoxKilled, seed: 9, replica: 1 });
        assert_eq!(loops, s.loops);
        std::fs::write(&p, "# cable-loops v1 d=3\n").unwrap();
        assert!(matches!(read_loop_dump(&p), Err(Error::Format { .. })));
    }
}
