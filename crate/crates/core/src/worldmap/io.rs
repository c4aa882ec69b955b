//! Plain-text `.ogmap` format.
//!
//! ```text
//! OGMAP 1
//! width height resolution_m origin_x origin_y origin_phi
//! <height lines of width codes from {0,1,2}; first line is row 0 (minimum y)>
//! ```
//!
//! Tokens may be separated by any whitespace; `#` starts a comment that runs
//! to the end of the line.

use super::{CellCode, OccupancyGrid, Pose};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let body = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let mut rest = body;
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let tail = &rest[start..];
            let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
            out.push(Token {
                text: &tail[..len],
                line: ln + 1,
                column: offset + start + 1,
            });
            offset += start + len;
            rest = &tail[len..];
        }
    }
    out
}

fn err(tok: Option<&Token<'_>>, eof: (usize, usize), message: String) -> Error {
    let (line, column) = tok.map_or(eof, |t| (t.line, t.column));
    Error::MapParse { line, column, message }
}

/// Parses map text. Errors carry the line and column of the first offending
/// token.
pub fn parse_map(src: &str) -> Result<OccupancyGrid> {
    let tokens = tokenize(src);
    let eof = (src.lines().count().max(1), 1);
    let mut it = tokens.iter();

    let magic = it.next();
    if magic.map(|t| t.text) != Some("OGMAP") {
        return Err(err(magic, eof, "expected magic `OGMAP`".into()));
    }
    let version = it.next();
    if version.map(|t| t.text) != Some("1") {
        return Err(err(version, eof, "unsupported format version".into()));
    }

    fn field<'a, T: std::str::FromStr>(
        it: &mut std::slice::Iter<'a, Token<'a>>,
        name: &str,
        eof: (usize, usize),
    ) -> Result<T> {
        let tok = it.next();
        match tok {
            Some(t) => t
                .text
                .parse()
                .map_err(|_| err(tok, eof, format!("invalid {name} `{}`", t.text))),
            None => Err(err(None, eof, format!("missing {name}"))),
        }
    }

    let width_tok = it.as_slice().first();
    let width: usize = field(&mut it, "width", eof)?;
    let height: usize = field(&mut it, "height", eof)?;
    if width == 0 || height == 0 {
        return Err(err(width_tok, eof, "width and height must be positive".into()));
    }
    let res_tok = it.as_slice().first();
    let resolution: f64 = field(&mut it, "resolution", eof)?;
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(err(res_tok, eof, "resolution must be positive".into()));
    }
    let ox: f64 = field(&mut it, "origin_x", eof)?;
    let oy: f64 = field(&mut it, "origin_y", eof)?;
    let ophi: f64 = field(&mut it, "origin_phi", eof)?;

    let n = width
        .checked_mul(height)
        .ok_or_else(|| err(width_tok, eof, "grid dimensions overflow".into()))?;
    let mut cells = Vec::with_capacity(n);
    for i in 0..n {
        let (row, col) = (i / width, i % width);
        let tok = it.next();
        let Some(t) = tok else {
            return Err(err(
                None,
                eof,
                format!("dimension mismatch: missing cell at row {row}, col {col}"),
            ));
        };
        let code = t.text.parse::<u8>().ok().and_then(CellCode::from_code).ok_or_else(|| {
            err(
                tok,
                eof,
                format!("invalid cell code `{}` at row {row}, col {col}", t.text),
            )
        })?;
        cells.push(code);
    }
    if let Some(extra) = it.next() {
        return Err(err(
            Some(extra),
            eof,
            format!("dimension mismatch: unexpected token `{}`", extra.text),
        ));
    }
    OccupancyGrid::new(width, height, resolution, Pose::new(ox, oy, ophi), cells)
}

pub fn load_map(path: impl AsRef<Path>) -> Result<OccupancyGrid> {
    parse_map(&std::fs::read_to_string(path)?)
}

/// Canonical text form: no comments, single spaces, one row per line.
pub fn write_map(grid: &OccupancyGrid) -> String {
    let o = grid.origin();
    let mut s = String::with_capacity(grid.cells().len() * 2 + 64);
    let _ = writeln!(s, "OGMAP 1");
    let _ = writeln!(
        s,
        "{} {} {} {} {} {}",
        grid.width(),
        grid.height(),
        grid.resolution(),
        o.x,
        o.y,
        o.phi
    );
    for row in grid.cells().chunks(grid.width()) {
        for (i, c) in row.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push(char::from(b'0' + c.code()));
        }
        s.push('\n');
    }
    s
}

pub fn save_map(grid: &OccupancyGrid, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_map(grid))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn two_by_two_with_one_occupied_cell() {
        let g = parse_map("OGMAP 1\n2 2 0.1 0 0 0\n0 0\n0 2\n").unwrap();
        assert_eq!(g.get(1, 1), CellCode::Occupied);
        assert_eq!(g.count(CellCode::Occupied), 1);
    }

    #[test]
    fn bad_code_names_row_and_column() {
        let e = parse_map("OGMAP 1\n2 2 0.1 0 0 0\n0 0\n0 3\n").unwrap_err();
        match e {
            Error::MapParse { line, column, message } => {
                assert_eq!((line, column), (4, 3));
                assert!(message.contains("row 1, col 1"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_loose_whitespace() {
        let g = parse_map("# header\nOGMAP 1 # v1\n 3  1 0.5 1 2 0\n\t1 2   0 # row\n").unwrap();
        assert_eq!(g.width(), 3);
        assert_eq!(g.get(1, 0), CellCode::Occupied);
        assert_eq!(g.origin(), Pose::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn dimension_mismatch_both_ways() {
        let short = parse_map("OGMAP 1\n2 2 0.1 0 0 0\n0 0\n0\n").unwrap_err();
        assert!(short.to_string().contains("dimension mismatch"));
        let long = parse_map("OGMAP 1\n2 2 0.1 0 0 0\n0 0\n0 0 1\n").unwrap_err();
        assert!(matches!(long, Error::MapParse { line: 4, column: 5, .. }));
    }

    #[test]
    fn malformed_header() {
        assert!(parse_map("OGMAP 2\n1 1 0.1 0 0 0\n0\n").is_err());
        assert!(parse_map("OGMAP 1\n1 x 0.1 0 0 0\n0\n").is_err());
        assert!(parse_map("OGMAP 1\n1 1 -0.1 0 0 0\n0\n").is_err());
        assert!(parse_map("").is_err());
    }

    #[test]
    fn canonical_files_round_trip_byte_for_byte() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (w, h) = (rng.random_range(1..20), rng.random_range(1..20));
            let cells = (0..w * h)
                .map(|_| CellCode::from_code(rng.random_range(0..3)).unwrap())
                .collect();
            let origin = Pose::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.0..3.0),
            );
            let g = OccupancyGrid::new(w, h, rng.random_range(0.01..1.0), origin, cells).unwrap();
            let text = write_map(&g);
            let back = parse_map(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(write_map(&back), text);
        }
    }
}
