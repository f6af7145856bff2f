//! File formats.
//!
//! **Graph files** are plain text. An optional `# period <L>` header line is
//! followed by one `x f(x)` pair per line, nodes in order, `x_i = i L / n`.
//! Numbers use the shortest decimal form that reads back to the same `f64`.
//! Other `#` lines and blank lines are ignored. Without a period header the
//! period is `n (x_1 − x_0)`.
//!
//! **Grid fields** are a binary PGM raster (`P5`, max value 255) with a text
//! sidecar at `<raster path>.hdr` holding `nx`, `ny`, `lx`, `ly` as
//! `key = value` lines. Raster rows run from the top of the domain
//! (`j = ny − 1`) down to `j = 0`; byte 255 marks a cell inside the set and 0
//! one outside. On reading, any value at least half the max value is inside.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evolve::{GraphInterface, GridField};

pub fn graph_to_text(f: &GraphInterface) -> String {
    let mut s = String::with_capacity(f.len() * 40);
    let _ = writeln!(s, "# period {}", f.period());
    for (i, v) in f.samples().iter().enumerate() {
        let _ = writeln!(s, "{} {}", f.x(i), v);
    }
    s
}

pub fn graph_from_text(text: &str) -> Result<GraphInterface> {
    let mut period = None;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let ctx = || format!("graph line {}", lineno + 1);
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            if parts.next() == Some("period") {
                let v = parts.next().ok_or_else(|| Error::parse(ctx(), "missing period value"))?;
                period = Some(v.parse::<f64>().map_err(|e| Error::parse(ctx(), e.to_string()))?);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Error::parse(ctx(), format!("expected two columns, found {}", cols.len())));
        }
        let parse = |v: &str| v.parse::<f64>().map_err(|e| Error::parse(ctx(), format!("{v:?}: {e}")));
        xs.push(parse(cols[0])?);
        ys.push(parse(cols[1])?);
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::parse("graph file", "need at least two nodes"));
    }
    let period = period.unwrap_or(n as f64 * (xs[1] - xs[0]));
    for (i, x) in xs.iter().enumerate() {
        let expected = i as f64 * period / n as f64;
        if (x - expected).abs() > 1e-9 * period {
            return Err(Error::parse(
                "graph file",
                format!("node {i} at x = {x}, expected uniform spacing ({expected})"),
            ));
        }
    }
    GraphInterface::new(period, ys)
}

pub fn write_graph(path: &Path, f: &GraphInterface) -> Result<()> {
    fs::write(path, graph_to_text(f)).map_err(|e| Error::io(path, e))
}

pub fn read_graph(path: &Path) -> Result<GraphInterface> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    graph_from_text(&text)
}

pub fn sidecar_path(raster: &Path) -> PathBuf {
    let mut s = raster.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

pub fn grid_to_pgm(field: &GridField) -> Vec<u8> {
    let (nx, ny) = (field.nx(), field.ny());
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    out.reserve(nx * ny);
    for j in (0..ny).rev() {
        out.extend((0..nx).map(|i| if field.get(i, j) { 255u8 } else { 0u8 }));
    }
    out
}

pub fn grid_header(field: &GridField) -> String {
    format!(
        "# grid-field v1\nnx = {}\nny = {}\nlx = {}\nly = {}\n",
        field.nx(),
        field.ny(),
        field.lx(),
        field.ly()
    )
}

/// Reads the raster part, returning `(nx, ny, cells)` with cells in field order.
pub fn pgm_cells(bytes: &[u8]) -> Result<(usize, usize, Vec<bool>)> {
    let ctx = "pgm raster";
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse(ctx, "truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the data
    pos += 1;
    if tokens[0] != "P5" {
        return Err(Error::parse(ctx, format!("unsupported magic {:?}", tokens[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(ctx, format!("{s:?}: {e}")));
    let (nx, ny, maxval) = (num(&tokens[1])?, num(&tokens[2])?, num(&tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse(ctx, format!("unsupported max value {maxval}")));
    }
    let data = bytes.get(pos..pos + nx * ny).ok_or_else(|| Error::parse(ctx, "truncated raster"))?;
    let mut cells = vec![false; nx * ny];
    for (row, chunk) in data.chunks(nx).enumerate() {
        let j = ny - 1 - row;
        for (i, &b) in chunk.iter().enumerate() {
            cells[j * nx + i] = 2 * b as usize >= maxval;
        }
    }
    Ok((nx, ny, cells))
}

fn parse_header(text: &str) -> Result<(usize, usize, f64, f64)> {
    let ctx = "grid header";
    let (mut nx, mut ny, mut lx, mut ly) = (None, None, None, None);
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(ctx, format!("bad line {line:?}")))?;
        let v = v.trim();
        let bad = |e: String| Error::parse(ctx, format!("{}: {e}", k.trim()));
        match k.trim() {
            "nx" => nx = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "ny" => ny = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "lx" => lx = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "ly" => ly = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            other => return Err(Error::parse(ctx, format!("unknown key {other:?}"))),
        }
    }
    match (nx, ny, lx, ly) {
        (Some(nx), Some(ny), Some(lx), Some(ly)) => Ok((nx, ny, lx, ly)),
        _ => Err(Error::parse(ctx, "nx, ny, lx and ly are all required")),
    }
}

pub fn grid_from_parts(pgm: &[u8], header: &str) -> Result<GridField> {
    let (nx, ny, cells) = pgm_cells(pgm)?;
    let (hnx, hny, lx, ly) = parse_header(header)?;
    if (hnx, hny) != (nx, ny) {
        return Err(Error::parse("grid header", format!("header says {hnx}x{hny}, raster is {nx}x{ny}")));
    }
    GridField::new(nx, ny, lx, ly, cells)
}

pub fn write_grid(path: &Path, field: &GridField) -> Result<()> {
    fs::write(path, grid_to_pgm(field)).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    fs::write(&side, grid_header(field)).map_err(|e| Error::io(side, e))
}

pub fn read_grid(path: &Path) -> Result<GridField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let header = fs::read_to_string(&side).map_err(|e| Error::io(side, e))?;
    grid_from_parts(&bytes, &header)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn graph_text_layout() {
        let f = GraphInterface::new(2.0, vec![0.5, -1.0, 0.25, 3.0]).unwrap();
        assert_eq!(graph_to_text(&f), "# period 2\n0 0.5\n0.5 -1\n1 0.25\n1.5 3\n");
    }

    #[test]
    fn graph_period_inferred_without_header() {
        let f = graph_from_text("0 1\n0.25 2\n0.5 3\n0.75 4\n").unwrap();
        assert_eq!(f.period(), 1.0);
        assert!(graph_from_text("0 1\n0.3 2\n0.5 3\n0.75 4\n").is_err());
        assert!(graph_from_text("0 1 2\n").is_err());
    }

    #[test]
    fn pgm_layout_is_top_row_first() {
        let mut g = GridField::empty(3, 2, 3.0, 2.0).unwrap();
        g.set(0, 1, true); // top-left
        g.set(2, 0, true); // bottom-right
        let bytes = grid_to_pgm(&g);
        assert_eq!(&bytes[..11], b"P5\n3 2\n255\n");
        assert_eq!(&bytes[11..], &[255, 0, 0, 0, 0, 255]);
        let back = grid_from_parts(&bytes, &grid_header(&g)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn grid_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("disk.pgm");
        let g = GridField::disk(40, 30, 4.0, 3.0, (2.0, 1.5), 1.0).unwrap();
        write_grid(&path, &g).unwrap();
        assert!(sidecar_path(&path).exists());
        assert_eq!(read_grid(&path).unwrap(), g);
    }

    #[test]
    fn mismatched_header_is_rejected() {
        let g = GridField::empty(4, 4, 1.0, 1.0).unwrap();
        let bytes = grid_to_pgm(&g);
        assert!(grid_from_parts(&bytes, "nx = 5\nny = 4\nlx = 1\nly = 1\n").is_err());
        assert!(grid_from_parts(&bytes, "nx = 4\nny = 4\nlx = 1\n").is_err());
        assert!(grid_from_parts(b"P2\n1 1\n255\n\x00", "nx = 1\nny = 1\nlx = 1\nly = 1\n").is_err());
    }

    proptest! {
        #[test]
        fn graph_text_round_trip_is_bit_exact(
            samples in proptest::collection::vec(-1e3f64..1e3, 4..40),
            period in 0.1f64..10.0,
        ) {
            let f = GraphInterface::new(period, samples).unwrap();
            let back = graph_from_text(&graph_to_text(&f)).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
