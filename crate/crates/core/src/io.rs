//! Text formats for states, graphs and diagonal weights.
//!
//! State files are JSON: `{"dims": [2, 2], "matrix": [[re, im], ...]}` with
//! the matrix flattened row-major. Graph files start with the vertex count,
//! followed by one 1-based `a b` edge per line. Weight files hold `2^n`
//! whitespace-separated reals in `μ` order. Lines starting with `#` are
//! ignored in graph and weight files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::state::DensityMatrix;
use crate::structured::{DiagonalWeights, Graph};

#[derive(Clone, Debug, Serialize, Deserialize)]
struct StateFile {
    dims: Vec<usize>,
    matrix: Vec<[f64; 2]>,
}

/// Parses a state document. Only the shape is checked here; physical
/// validity is left to [`DensityMatrix::validate`].
pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    let len = file.matrix.len();
    let side = (len as f64).sqrt().round() as usize;
    if side * side != len {
        return Err(Error::Shape(format!(
            "{len} matrix entries do not form a square matrix"
        )));
    }
    let expect = file
        .dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Shape("dimension product overflows".into()))?;
    if expect != side {
        return Err(Error::Shape(format!(
            "dims {:?} give dimension {expect}, matrix is {side}x{side}",
            file.dims
        )));
    }
    let data = CMatrix::from_row_iterator(
        side,
        side,
        file.matrix.iter().map(|&[re, im]| C64::new(re, im)),
    );
    DensityMatrix::new(data, file.dims)
}

pub fn format_state(rho: &DensityMatrix) -> String {
    let m = rho.data();
    let file = StateFile {
        dims: rho.dims().to_vec(),
        matrix: (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| [m[(r, c)].re, m[(r, c)].im]))
            .collect(),
    };
    serde_json::to_string(&file).expect("state serializes")
}

pub fn read_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    parse_state(&fs::read_to_string(path)?)
}

pub fn write_state(path: impl AsRef<Path>, rho: &DensityMatrix) -> Result<()> {
    fs::write(path, format_state(rho))?;
    Ok(())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (ln, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("graph file is empty".into()))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::Parse(format!("line {ln}: expected vertex count, got {first:?}")))?;
    let mut g = Graph::edgeless(n)?;
    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = parts.as_slice() else {
            return Err(Error::Parse(format!(
                "line {ln}: expected `a b`, got {line:?}"
            )));
        };
        let vertex = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::Parse(format!("line {ln}: bad vertex {s:?}"))),
            }
        };
        g.add_edge(vertex(a)?, vertex(b)?)?;
    }
    Ok(g)
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("{}\n", g.n());
    for (a, b) in g.edges() {
        out.push_str(&format!("{} {}\n", a + 1, b + 1));
    }
    out
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&fs::read_to_string(path)?)
}

/// The qubit count is inferred from the number of weights.
pub fn parse_weights(text: &str) -> Result<DiagonalWeights> {
    let mut p = Vec::new();
    for (ln, line) in content_lines(text) {
        for tok in line.split_whitespace() {
            let w: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("line {ln}: bad weight {tok:?}")))?;
            p.push(w);
        }
    }
    if p.len() < 2 || !p.len().is_power_of_two() {
        return Err(Error::Shape(format!(
            "{} weights is not 2^n for n >= 1",
            p.len()
        )));
    }
    let n = p.len().trailing_zeros() as usize;
    DiagonalWeights::new(n, p)
}

pub fn format_weights(w: &DiagonalWeights) -> String {
    let mut out: Vec<String> = w.weights().iter().map(|x| format!("{x:?}")).collect();
    out.push(String::new());
    out.join("\n")
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<DiagonalWeights> {
    parse_weights(&fs::read_to_string(path)?)
}
