//! Grid moves: cyclic translation, commutation, stabilization and
//! destabilization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::StateBijection;
use crate::grid_model::{Corner, GridDiagram, Marking};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("columns {0} and {1} interleave; commutation is illegal")]
    IllegalCommutation(usize, usize),
    #[error("index {index} out of range for grid index {n}")]
    OutOfRange { index: usize, n: usize },
    #[error("no {kind:?} marking in column {column}")]
    NoSuchMarking { kind: Marking, column: usize },
    #[error("the 2x2 block at ({0}, {1}) is not a stabilization pattern")]
    NotAStabilizationBlock(usize, usize),
    #[error("unknown stabilization kind {0:?}")]
    BadKind(String),
}

/// Marking kind and corner label of a stabilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StabilizationKind {
    pub marking: Marking,
    pub corner: Corner,
}

impl StabilizationKind {
    pub fn all() -> Vec<StabilizationKind> {
        [Marking::X, Marking::O]
            .into_iter()
            .flat_map(|marking| Corner::ALL.into_iter().map(move |corner| StabilizationKind { marking, corner }))
            .collect()
    }
}

impl fmt::Display for StabilizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{}", self.marking, self.corner)
    }
}

impl FromStr for StabilizationKind {
    type Err = MoveError;

    fn from_str(s: &str) -> Result<Self, MoveError> {
        let bad = || MoveError::BadKind(s.to_string());
        let (m, c) = s.split_once(':').ok_or_else(bad)?;
        let marking = match m.trim().to_ascii_uppercase().as_str() {
            "X" => Marking::X,
            "O" => Marking::O,
            _ => return Err(bad()),
        };
        let corner: Corner = c.parse().map_err(|_| bad())?;
        Ok(StabilizationKind { marking, corner })
    }
}

/// Moves the viewport by (dx, dy): the new column `c` shows old column
/// `c + dx`, and every row index drops by `dy`.
pub fn cyclic_translate(g: &GridDiagram, dx: i64, dy: i64) -> (GridDiagram, StateBijection) {
    let n = g.n();
    let m = n as i64;
    let (sx, sy) = (dx.rem_euclid(m) as usize, dy.rem_euclid(m) as usize);
    let shift = |s: &[usize]| -> Vec<usize> { (0..n).map(|c| (s[(c + sx) % n] + n - sy) % n).collect() };
    let out = GridDiagram::from_zero_based(shift(g.sigma_o()), shift(g.sigma_x())).expect("translation");
    (out, StateBijection::translation(n, dx, dy))
}

/// Whether the vertical spans of columns `a` and `b` interleave on the row circle.
fn interleaved(g: &GridDiagram, a: usize, b: usize) -> bool {
    let (lo, hi) = {
        let (p, q) = (g.sigma_o()[a], g.sigma_x()[a]);
        (p.min(q), p.max(q))
    };
    let inside = |r: usize| lo < r && r < hi;
    inside(g.sigma_o()[b]) != inside(g.sigma_x()[b])
}

/// Exchanges columns `i` and `i + 1` (cyclically).
pub fn commute_columns(g: &GridDiagram, i: usize) -> Result<GridDiagram, MoveError> {
    let n = g.n();
    if i >= n {
        return Err(MoveError::OutOfRange { index: i, n });
    }
    let j = (i + 1) % n;
    if interleaved(g, i, j) {
        return Err(MoveError::IllegalCommutation(i, j));
    }
    let mut o = g.sigma_o().to_vec();
    let mut x = g.sigma_x().to_vec();
    o.swap(i, j);
    x.swap(i, j);
    Ok(GridDiagram::from_zero_based(o, x).expect("commutation"))
}

/// Exchanges rows `i` and `i + 1` (cyclically).
pub fn commute_rows(g: &GridDiagram, i: usize) -> Result<GridDiagram, MoveError> {
    commute_columns(&g.transpose(), i).map(|t| t.transpose())
}

/// Offsets (column, row) within the 2×2 block of a corner.
fn corner_offset(c: Corner) -> (usize, usize) {
    (usize::from(c.is_east()), usize::from(c.is_north()))
}

/// Splits the `kind.marking` cell of `column` into a 2×2 block. The other
/// kind sits at the labeled corner, the two stabilized markings at its
/// neighbours. Returns the new diagram and the state injection adding the
/// block's central point.
pub fn stabilize(
    g: &GridDiagram,
    column: usize,
    kind: StabilizationKind,
) -> Result<(GridDiagram, StateBijection), MoveError> {
    let n = g.n();
    if column >= n {
        return Err(MoveError::NoSuchMarking { kind: kind.marking, column });
    }
    let k = kind.marking;
    let c = column;
    let r = g.sigma(k)[c];
    let other_row = g.sigma(k.other())[c];
    let other_col = g.column_of(k.other(), r);
    let col_map = |a: usize| if a > c { a + 1 } else { a };
    let row_map = |b: usize| if b > r { b + 1 } else { b };

    let (lc, lr) = corner_offset(kind.corner);
    let (ec, er) = (1 - lc, 1 - lr);
    let mut same = vec![usize::MAX; n + 1];
    let mut diff = vec![usize::MAX; n + 1];
    for a in 0..n {
        if a == c {
            continue;
        }
        same[col_map(a)] = row_map(g.sigma(k)[a]);
        diff[col_map(a)] = if a == other_col { r + er } else { row_map(g.sigma(k.other())[a]) };
    }
    // Labeled corner: the other kind; its neighbours: the stabilized kind.
    diff[c + lc] = r + lr;
    same[c + lc] = r + er;
    same[c + ec] = r + lr;
    diff[c + ec] = row_map(other_row);
    let (o, x) = match k {
        Marking::O => (same, diff),
        Marking::X => (diff, same),
    };
    let out = GridDiagram::from_zero_based(o, x).expect("stabilization");
    Ok((out, StateBijection::insertion(n, c + 1, r + 1)))
}

/// Collapses the 2×2 block with lower-left cell (column, row), inverting
/// [`stabilize`].
pub fn destabilize(g: &GridDiagram, column: usize, row: usize) -> Result<GridDiagram, MoveError> {
    let n = g.n();
    let bad = || MoveError::NotAStabilizationBlock(column, row);
    if n < 3 || column + 1 >= n || row + 1 >= n {
        return Err(bad());
    }
    let at = |dc: usize, dr: usize| -> Option<Marking> {
        let (a, b) = (column + dc, row + dr);
        if g.sigma_o()[a] == b {
            Some(Marking::O)
        } else if g.sigma_x()[a] == b {
            Some(Marking::X)
        } else {
            None
        }
    };
    let cells = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let empty: Vec<_> = cells.iter().filter(|&&(a, b)| at(a, b).is_none()).collect();
    if empty.len() != 1 {
        return Err(bad());
    }
    let &(ec, er) = empty[0];
    let (lc, lr) = (1 - ec, 1 - er);
    let other = at(lc, lr).unwrap();
    let k = other.other();
    if at(ec, lr) != Some(k) || at(lc, er) != Some(k) {
        return Err(bad());
    }
    let row_map = |b: usize| if b > row { b - 1 } else { b };
    let mut same = Vec::with_capacity(n - 1);
    let mut diff = Vec::with_capacity(n - 1);
    for a in 0..n {
        if a == column + 1 {
            continue;
        }
        if a == column {
            same.push(row);
            diff.push(row_map(g.sigma(other)[column + ec]));
        } else {
            same.push(row_map(g.sigma(k)[a]));
            diff.push(row_map(g.sigma(other)[a]));
        }
    }
    let (o, x) = match k {
        Marking::O => (same, diff),
        Marking::X => (diff, same),
    };
    GridDiagram::from_zero_based(o, x).map_err(|_| bad())
}

/// One step of a move script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum MoveRecord {
    Translate { dx: i64, dy: i64 },
    CommuteColumns { index: usize },
    CommuteRows { index: usize },
    Stabilize { column: usize, kind: String },
    Destabilize { column: usize, row: usize },
}

impl MoveRecord {
    /// Applies the move; indices in records are 1-based.
    pub fn apply(&self, g: &GridDiagram) -> Result<GridDiagram, MoveError> {
        let dec = |i: usize| i.checked_sub(1).ok_or(MoveError::OutOfRange { index: 0, n: g.n() });
        match self {
            MoveRecord::Translate { dx, dy } => Ok(cyclic_translate(g, *dx, *dy).0),
            MoveRecord::CommuteColumns { index } => commute_columns(g, dec(*index)?),
            MoveRecord::CommuteRows { index } => commute_rows(g, dec(*index)?),
            MoveRecord::Stabilize { column, kind } => Ok(stabilize(g, dec(*column)?, kind.parse()?)?.0),
            MoveRecord::Destabilize { column, row } => destabilize(g, dec(*column)?, dec(*row)?),
        }
    }
}

pub fn apply_script(g: &GridDiagram, script: &[MoveRecord]) -> Result<GridDiagram, MoveError> {
    script.iter().try_fold(g.clone(), |acc, m| m.apply(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::torus_grid;
    use crate::grid_model::validate_grid;

    /// Twice the writhe minus the NW and SE corner count; unchanged by
    /// translation and commutation, unlike the writhe itself.
    fn framing(g: &GridDiagram) -> i64 {
        let census = g.corner_census();
        let turns: usize =
            [Marking::O, Marking::X].into_iter().map(|k| census.get(k, Corner::NW) + census.get(k, Corner::SE)).sum();
        2 * g.writhe() - turns as i64
    }

    #[test]
    fn translate_examples() {
        let g = torus_grid(2, 3).unwrap();
        assert_eq!(cyclic_translate(&g, 5, 5).0, g);
        let (t, _) = cyclic_translate(&g, 1, 0);
        assert_eq!(t.sigma_o_one_based(), vec![2, 3, 4, 5, 1]);
        assert_eq!(framing(&t), framing(&g));
    }

    #[test]
    fn commutation() {
        let g = torus_grid(2, 3).unwrap();
        for i in 0..5 {
            assert!(matches!(commute_columns(&g, i), Err(MoveError::IllegalCommutation(..))));
        }
        let h = validate_grid(&[1, 2, 3, 4], &[4, 3, 1, 2]).unwrap();
        let c = commute_columns(&h, 0).unwrap();
        assert_eq!(commute_columns(&c, 0).unwrap(), h);
        assert_eq!(framing(&c), framing(&h));
        assert_eq!(c.component_count(), h.component_count());
        let r = commute_rows(&h, 2).unwrap();
        assert!(commute_rows(&h, 0).is_err());
        assert_eq!(commute_rows(&r, 2).unwrap(), h);
    }

    #[test]
    fn stabilize_unknot() {
        let u = torus_grid(1, 1).unwrap();
        let kind: StabilizationKind = "X:SW".parse().unwrap();
        let (s, inj) = stabilize(&u, 0, kind).unwrap();
        assert_eq!((s.n(), s.component_count()), (3, 1));
        assert_eq!(inj.target_index(), 3);
        assert_eq!(destabilize(&s, 0, 1).unwrap(), u);
    }

    #[test]
    fn stabilize_round_trip_all_kinds() {
        let g = torus_grid(2, 3).unwrap();
        for kind in StabilizationKind::all() {
            for c in 0..g.n() {
                let (s, _) = stabilize(&g, c, kind).unwrap();
                assert!(s.is_knot(), "{kind} at {c}");
                let r = g.sigma(kind.marking)[c];
                assert_eq!(destabilize(&s, c, r).unwrap(), g, "{kind} at {c}");
            }
        }
        assert_eq!(StabilizationKind::all().len(), 8);
    }

    #[test]
    fn destabilize_rejects() {
        let g = torus_grid(2, 3).unwrap();
        assert!(matches!(destabilize(&g, 0, 0), Err(MoveError::NotAStabilizationBlock(0, 0))));
    }

    #[test]
    fn script_round_trip() {
        let script: Vec<MoveRecord> = serde_json::from_str(
            r#"[{"move":"translate","dx":1,"dy":2},{"move":"stabilize","column":1,"kind":"O:NE"}]"#,
        )
        .unwrap();
        let g = apply_script(&torus_grid(2, 3).unwrap(), &script).unwrap();
        assert_eq!(g.n(), 6);
    }
}
