//! Grid diagrams: validation, serialization and diagram-level statistics.
//!
//! Internally columns and rows are 0-indexed; every external format uses
//! 1-indexed permutations. Column `i` carries its O-marking in the cell
//! `(i, sigma_o[i])` and its X-marking in `(i, sigma_x[i])`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("column {column} carries both an O and an X marking")]
    DoubleMarking { column: usize },
    #[error("grid index {0} is below the minimum of 2")]
    TooSmall(usize),
    #[error("malformed grid text: {0}")]
    Malformed(String),
}

/// A validated grid diagram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridDiagram {
    n: usize,
    sigma_o: Vec<usize>,
    sigma_x: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Marking {
    O,
    X,
}

impl Marking {
    pub fn other(self) -> Marking {
        match self {
            Marking::O => Marking::X,
            Marking::X => Marking::O,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Corner {
    NE,
    NW,
    SE,
    SW,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::NE, Corner::NW, Corner::SE, Corner::SW];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn is_north(self) -> bool {
        matches!(self, Corner::NE | Corner::NW)
    }

    pub fn is_east(self) -> bool {
        matches!(self, Corner::NE | Corner::SE)
    }

    pub fn from_parts(north: bool, east: bool) -> Corner {
        match (north, east) {
            (true, true) => Corner::NE,
            (true, false) => Corner::NW,
            (false, true) => Corner::SE,
            (false, false) => Corner::SW,
        }
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Corner::NE => "NE",
            Corner::NW => "NW",
            Corner::SE => "SE",
            Corner::SW => "SW",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Corner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Corner::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown corner {s:?}; expected NE, NW, SE or SW"))
    }
}

/// Corner types of every marking. A marking's corner names where it sits on
/// the L-shaped turn formed by its vertical and horizontal segments: an O
/// whose segments leave towards north and east is an `o_SW`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CornerCensus {
    counts: [[usize; 4]; 2],
}

impl CornerCensus {
    pub fn get(&self, kind: Marking, corner: Corner) -> usize {
        self.counts[kind as usize][corner.slot()]
    }

    fn bump(&mut self, kind: Marking, corner: Corner) {
        self.counts[kind as usize][corner.slot()] += 1;
    }

    pub fn total(&self, kind: Marking) -> usize {
        self.counts[kind as usize].iter().sum()
    }

    /// Non-zero entries keyed like `o_SW`, in a fixed order.
    pub fn entries(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for kind in [Marking::O, Marking::X] {
            for corner in Corner::ALL {
                let c = self.get(kind, corner);
                if c > 0 {
                    let k = if kind == Marking::O { "o" } else { "x" };
                    out.push((format!("{k}_{corner}"), c));
                }
            }
        }
        out
    }
}

impl std::ops::Add for CornerCensus {
    type Output = CornerCensus;
    fn add(mut self, rhs: CornerCensus) -> CornerCensus {
        for k in 0..2 {
            for c in 0..4 {
                self.counts[k][c] += rhs.counts[k][c];
            }
        }
        self
    }
}

fn check_permutation(name: &str, v: &[usize], n: usize) -> Result<(), GridError> {
    let mut seen = vec![false; n];
    for &x in v {
        if x >= n || seen[x] {
            return Err(GridError::NotAPermutation(format!("{name} has a repeated or out-of-range entry {}", x + 1)));
        }
        seen[x] = true;
    }
    Ok(())
}

/// Validates 1-indexed permutations and builds a diagram.
pub fn validate_grid(sigma_o: &[i64], sigma_x: &[i64]) -> Result<GridDiagram, GridError> {
    if sigma_o.len() != sigma_x.len() {
        return Err(GridError::NotAPermutation(format!(
            "sigma_O has length {} but sigma_X has length {}",
            sigma_o.len(),
            sigma_x.len()
        )));
    }
    let n = sigma_o.len();
    let conv = |name: &str, v: &[i64]| -> Result<Vec<usize>, GridError> {
        v.iter()
            .map(|&x| {
                if x < 1 || x as usize > n {
                    Err(GridError::NotAPermutation(format!("{name} entry {x} out of range 1..={n}")))
                } else {
                    Ok(x as usize - 1)
                }
            })
            .collect()
    };
    let o = conv("sigma_O", sigma_o)?;
    let x = conv("sigma_X", sigma_x)?;
    GridDiagram::from_zero_based(o, x)
}

impl GridDiagram {
    /// Builds a diagram from 0-indexed permutations.
    pub fn from_zero_based(sigma_o: Vec<usize>, sigma_x: Vec<usize>) -> Result<Self, GridError> {
        if sigma_o.len() != sigma_x.len() {
            return Err(GridError::NotAPermutation("length mismatch".into()));
        }
        let n = sigma_o.len();
        check_permutation("sigma_O", &sigma_o, n)?;
        check_permutation("sigma_X", &sigma_x, n)?;
        if n < 2 {
            return Err(GridError::TooSmall(n));
        }
        if let Some(column) = (0..n).find(|&i| sigma_o[i] == sigma_x[i]) {
            return Err(GridError::DoubleMarking { column: column + 1 });
        }
        Ok(GridDiagram { n, sigma_o, sigma_x })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 0-indexed row of the O-marking in each column.
    pub fn sigma_o(&self) -> &[usize] {
        &self.sigma_o
    }

    /// 0-indexed row of the X-marking in each column.
    pub fn sigma_x(&self) -> &[usize] {
        &self.sigma_x
    }

    pub fn sigma(&self, kind: Marking) -> &[usize] {
        match kind {
            Marking::O => &self.sigma_o,
            Marking::X => &self.sigma_x,
        }
    }

    pub fn sigma_o_one_based(&self) -> Vec<usize> {
        self.sigma_o.iter().map(|v| v + 1).collect()
    }

    pub fn sigma_x_one_based(&self) -> Vec<usize> {
        self.sigma_x.iter().map(|v| v + 1).collect()
    }

    /// Column of the marking of `kind` in `row`.
    pub fn column_of(&self, kind: Marking, row: usize) -> usize {
        self.sigma(kind).iter().position(|&r| r == row).expect("permutation")
    }

    /// Exchanges the roles of columns and rows.
    pub fn transpose(&self) -> GridDiagram {
        let n = self.n;
        let mut o = vec![0; n];
        let mut x = vec![0; n];
        for c in 0..n {
            o[self.sigma_o[c]] = c;
            x[self.sigma_x[c]] = c;
        }
        GridDiagram { n, sigma_o: o, sigma_x: x }
    }

    /// Number of link components: cycles of the column successor map.
    pub fn component_count(&self) -> usize {
        let n = self.n;
        let mut x_col = vec![0; n];
        for c in 0..n {
            x_col[self.sigma_x[c]] = c;
        }
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut c = start;
            while !seen[c] {
                seen[c] = true;
                c = x_col[self.sigma_o[c]];
            }
        }
        count
    }

    pub fn is_knot(&self) -> bool {
        self.component_count() == 1
    }

    /// Signed crossing count of the planar realization. Vertical segments run
    /// from X to O and pass over horizontal segments, which run from O to X.
    pub fn writhe(&self) -> i64 {
        let n = self.n;
        let o_col: Vec<usize> = (0..n).map(|r| self.column_of(Marking::O, r)).collect();
        let x_col: Vec<usize> = (0..n).map(|r| self.column_of(Marking::X, r)).collect();
        let mut w = 0i64;
        for c in 0..n {
            let (from, to) = (self.sigma_x[c], self.sigma_o[c]);
            let (lo, hi) = (from.min(to), from.max(to));
            let dv: i64 = if to > from { 1 } else { -1 };
            for r in lo + 1..hi {
                let (a, b) = (o_col[r], x_col[r]);
                if a.min(b) < c && c < a.max(b) {
                    let dh: i64 = if b > a { 1 } else { -1 };
                    w -= dv * dh;
                }
            }
        }
        w
    }

    /// Corner type of the marking of `kind` in column `c`.
    pub fn corner_of(&self, kind: Marking, c: usize) -> Corner {
        let row = self.sigma(kind)[c];
        let partner_row = self.sigma(kind.other())[c];
        let partner_col = self.column_of(kind.other(), row);
        // The marking sits at the south end when its vertical segment heads north.
        Corner::from_parts(partner_row < row, partner_col < c)
    }

    pub fn corner_census(&self) -> CornerCensus {
        let mut census = CornerCensus::default();
        for kind in [Marking::O, Marking::X] {
            for c in 0..self.n {
                census.bump(kind, self.corner_of(kind, c));
            }
        }
        census
    }

    /// Compact text form `n;o1,o2,..;x1,x2,..` with 1-indexed entries.
    pub fn to_compact(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",");
        format!("{};{};{}", self.n, join(&self.sigma_o), join(&self.sigma_x))
    }

    pub fn from_compact(text: &str) -> Result<GridDiagram, GridError> {
        let parts: Vec<&str> = text.trim().split(';').collect();
        if parts.len() != 3 {
            return Err(GridError::Malformed("expected n;sigma_O;sigma_X".into()));
        }
        let n: usize =
            parts[0].trim().parse().map_err(|_| GridError::Malformed(format!("bad grid index {:?}", parts[0])))?;
        let list = |s: &str| -> Result<Vec<i64>, GridError> {
            s.split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|_| GridError::Malformed(format!("bad entry {t:?}"))))
                .collect()
        };
        let (o, x) = (list(parts[1])?, list(parts[2])?);
        if o.len() != n || x.len() != n {
            return Err(GridError::Malformed(format!("declared n={n} but lengths are {} and {}", o.len(), x.len())));
        }
        validate_grid(&o, &x)
    }
}

impl fmt::Display for GridDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact())
    }
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    n: usize,
    #[serde(rename = "sigma_O")]
    sigma_o: Vec<i64>,
    #[serde(rename = "sigma_X")]
    sigma_x: Vec<i64>,
}

impl Serialize for GridDiagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GridJson {
            n: self.n,
            sigma_o: self.sigma_o.iter().map(|&v| v as i64 + 1).collect(),
            sigma_x: self.sigma_x.iter().map(|&v| v as i64 + 1).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = GridJson::deserialize(d)?;
        if raw.sigma_o.len() != raw.n || raw.sigma_x.len() != raw.n {
            return Err(serde::de::Error::custom(format!(
                "declared n={} but permutations have lengths {} and {}",
                raw.n,
                raw.sigma_o.len(),
                raw.sigma_x.len()
            )));
        }
        validate_grid(&raw.sigma_o, &raw.sigma_x).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed grid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub fn serialize_grid(g: &GridDiagram) -> String {
    serde_json::to_string(g).expect("grid serializes")
}

/// Parses the JSON object form, returning the validation error when the
/// permutations themselves are at fault.
pub fn parse_grid(text: &str) -> Result<GridDiagram, ParseError> {
    let raw: GridJson = serde_json::from_str(text)?;
    if raw.sigma_o.len() != raw.n || raw.sigma_x.len() != raw.n {
        return Err(GridError::Malformed(format!(
            "declared n={} but permutations have lengths {} and {}",
            raw.n,
            raw.sigma_o.len(),
            raw.sigma_x.len()
        ))
        .into());
    }
    Ok(validate_grid(&raw.sigma_o, &raw.sigma_x)?)
}

/// Accepts either the JSON object or the compact text form.
pub fn parse_grid_any(text: &str) -> Result<GridDiagram, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_grid(text)
    } else {
        Ok(GridDiagram::from_compact(text)?)
    }
}
