//! Plain-text field snapshots (`.axifield`).
//!
//! ```text
//! AXIFIELD v1 <n_r> <n_z> <r_max> <z_len> <even|odd>
//! <n_z values for r = 0>
//! ...
//! <n_z values for r = r_max>
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly. The wall condition is not stored; a field whose wall row
//! is identically zero reads back as Dirichlet, otherwise as Neumann.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, Parity, ScalarField};

const MAGIC: &str = "AXIFIELD";
const VERSION: &str = "v1";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_axifield_string(f: &ScalarField) -> String {
    let g = f.grid();
    let mut out = String::with_capacity(g.len() * 24 + 64);
    let _ = writeln!(
        out,
        "{MAGIC} {VERSION} {} {} {} {} {}",
        g.n_r(),
        g.n_z(),
        real(g.r_max()),
        real(g.z_len()),
        f.parity().as_str()
    );
    for i in 0..g.rows() {
        let line: Vec<String> = f.row(i).iter().map(|&v| real(v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_axifield(text: &str) -> Result<ScalarField> {
    let bad = |m: String| Error::Snapshot(m);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 7 || tokens[0] != MAGIC || tokens[1] != VERSION {
        return Err(bad(format!("bad header line {header:?}")));
    }
    let n_r: usize = tokens[2].parse().map_err(|_| bad(format!("bad n_r {:?}", tokens[2])))?;
    let n_z: usize = tokens[3].parse().map_err(|_| bad(format!("bad n_z {:?}", tokens[3])))?;
    let r_max: f64 = tokens[4].parse().map_err(|_| bad(format!("bad r_max {:?}", tokens[4])))?;
    let z_len: f64 = tokens[5].parse().map_err(|_| bad(format!("bad z_len {:?}", tokens[5])))?;
    let parity = match tokens[6] {
        "even" => Parity::Even,
        "odd" => Parity::Odd,
        other => return Err(bad(format!("bad parity {other:?}"))),
    };
    let grid = Grid::new(n_r, n_z, r_max, z_len).map_err(|e| bad(e.to_string()))?;

    let mut values = Vec::with_capacity(grid.len());
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| bad(format!("line {}: bad value {tok:?}", k + 2)))?;
            values.push(v);
        }
        if values.len() - before != n_z {
            return Err(bad(format!(
                "line {}: expected {n_z} values, got {}",
                k + 2,
                values.len() - before
            )));
        }
        rows += 1;
    }
    if rows != grid.rows() {
        return Err(bad(format!("expected {} rows, got {rows}", grid.rows())));
    }
    let wall_zero = values[n_r * n_z..].iter().all(|&v| v == 0.0);
    let boundary = if wall_zero {
        Boundary::DirichletZero
    } else {
        Boundary::NeumannZero
    };
    ScalarField::from_values(grid, parity, boundary, values).map_err(|e| bad(e.to_string()))
}

pub fn write_axifield(path: &Path, f: &ScalarField) -> Result<()> {
    std::fs::write(path, to_axifield_string(f)).map_err(|e| Error::io(path, e))
}

pub fn read_axifield(path: &Path) -> Result<ScalarField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_axifield(&text)
}
