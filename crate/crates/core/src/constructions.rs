//! Diagram families: torus knots, mirror-reverses, unions, connected sums,
//! cables and braid closures, plus the state correspondences they induce.

use std::str::FromStr;

use thiserror::Error;

use crate::complex::StateSpace;
use crate::grid_model::{Corner, GridDiagram, Marking};
use crate::moves::cyclic_translate;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("gcd({p}, {q}) != 1; the torus link has more than one component")]
    NotCoprime { p: usize, q: usize },
    #[error("torus parameters must be positive")]
    NonPositive,
    #[error("input diagram is a link, a knot is required")]
    InputIsLink,
    #[error("no O-marking at a {0} corner to carry the twist")]
    NoTwistCorner(Corner),
    #[error("cable parameter must be at least 2, got {0}")]
    BadCableParameter(usize),
    #[error("braid closure is a link with {0} components")]
    ClosureIsLink(usize),
    #[error("letter {letter} is invalid for {strands} strands")]
    BadLetter { letter: i64, strands: usize },
    #[error("malformed braid word: {0}")]
    MalformedBraid(String),
}

/// Lattice-point map underlying a [`StateBijection`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PointMap {
    /// (a, b) ↦ (a, −b) on an index-n torus.
    Reflect { n: usize },
    /// (a, b) ↦ (a − dx, b − dy).
    Translate { n: usize, dx: usize, dy: usize },
    /// Inserts the point (col, row) into an index-n state, shifting the
    /// coordinates at or beyond it.
    Insert { n: usize, col: usize, row: usize },
}

impl PointMap {
    fn source_n(self) -> usize {
        match self {
            PointMap::Reflect { n } | PointMap::Translate { n, .. } | PointMap::Insert { n, .. } => n,
        }
    }

    fn target_n(self) -> usize {
        match self {
            PointMap::Insert { n, .. } => n + 1,
            other => other.source_n(),
        }
    }

    fn apply(self, x: &[usize]) -> Vec<usize> {
        match self {
            PointMap::Reflect { n } => x.iter().map(|&b| (n - b) % n).collect(),
            PointMap::Translate { n, dx, dy } => {
                let mut y = vec![0; n];
                for (a, &b) in x.iter().enumerate() {
                    y[(a + n - dx) % n] = (b + n - dy) % n;
                }
                y
            }
            PointMap::Insert { n, col, row } => {
                let shift = |b: usize| if b >= row { b + 1 } else { b };
                let mut y = Vec::with_capacity(n + 1);
                y.extend(x[..col].iter().map(|&b| shift(b)));
                y.push(row);
                y.extend(x[col..].iter().map(|&b| shift(b)));
                y
            }
        }
    }
}

/// A correspondence between the grid states of two diagrams, induced by a
/// geometric map of lattice points. Reflections and translations are
/// bijections; stabilization point-insertion is an injection into a state
/// space one index larger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateBijection {
    n: usize,
    steps: Vec<PointMap>,
}

impl StateBijection {
    pub fn identity(n: usize) -> Self {
        StateBijection { n, steps: Vec::new() }
    }

    pub(crate) fn reflection(n: usize) -> Self {
        StateBijection { n, steps: vec![PointMap::Reflect { n }] }
    }

    pub(crate) fn translation(n: usize, dx: i64, dy: i64) -> Self {
        let m = n as i64;
        let (dx, dy) = (dx.rem_euclid(m) as usize, dy.rem_euclid(m) as usize);
        StateBijection { n, steps: vec![PointMap::Translate { n, dx, dy }] }
    }

    pub(crate) fn insertion(n: usize, col: usize, row: usize) -> Self {
        StateBijection { n, steps: vec![PointMap::Insert { n, col, row }] }
    }

    pub fn source_index(&self) -> usize {
        self.n
    }

    pub fn target_index(&self) -> usize {
        self.steps.last().map_or(self.n, |s| s.target_n())
    }

    pub fn is_bijective(&self) -> bool {
        self.source_index() == self.target_index()
    }

    /// `self` followed by `next`.
    pub fn then(mut self, next: &StateBijection) -> StateBijection {
        assert_eq!(self.target_index(), next.source_index(), "incompatible state maps");
        self.steps.extend(next.steps.iter().copied());
        self
    }

    pub fn apply(&self, x: &[usize]) -> Vec<usize> {
        self.steps.iter().fold(x.to_vec(), |acc, s| s.apply(&acc))
    }

    /// Images of all source states, as indices into the target state space.
    pub fn index_map(&self) -> Vec<usize> {
        let src = StateSpace::new(self.source_index());
        let dst = StateSpace::new(self.target_index());
        (0..src.len()).map(|i| dst.index_of(&self.apply(&src.state(i)))).collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The standard diagram of the negative (p, q) torus knot.
pub fn torus_grid(p: usize, q: usize) -> Result<GridDiagram, ConstructionError> {
    if p == 0 || q == 0 {
        return Err(ConstructionError::NonPositive);
    }
    if gcd(p, q) != 1 {
        return Err(ConstructionError::NotCoprime { p, q });
    }
    let n = p + q;
    Ok(GridDiagram::from_zero_based((0..n).collect(), (0..n).map(|i| (i + p) % n).collect()).expect("torus grid"))
}

/// Reflects in a horizontal axis and exchanges O and X markings.
pub fn mirror_reverse(g: &GridDiagram) -> (GridDiagram, StateBijection) {
    let n = g.n();
    let o = g.sigma_x().iter().map(|&r| n - 1 - r).collect();
    let x = g.sigma_o().iter().map(|&r| n - 1 - r).collect();
    (GridDiagram::from_zero_based(o, x).expect("mirror"), StateBijection::reflection(n))
}

/// Block-diagonal union with `g1` in the upper-right and `g2` in the lower-left.
pub fn disjoint_union(g1: &GridDiagram, g2: &GridDiagram) -> GridDiagram {
    let m = g2.n();
    let cat = |a: &[usize], b: &[usize]| -> Vec<usize> { b.iter().copied().chain(a.iter().map(|v| v + m)).collect() };
    GridDiagram::from_zero_based(cat(g1.sigma_o(), g2.sigma_o()), cat(g1.sigma_x(), g2.sigma_x())).expect("union")
}

/// The state of a union (or connected sum) assembled from factor states.
pub fn union_state(x1: &[usize], x2: &[usize]) -> Vec<usize> {
    let m = x2.len();
    x2.iter().copied().chain(x1.iter().map(|v| v + m)).collect()
}

/// A connected sum together with the translated factors it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectedSum {
    pub grid: GridDiagram,
    pub upper: GridDiagram,
    pub lower: GridDiagram,
}

pub fn connected_sum(g1: &GridDiagram, g2: &GridDiagram) -> Result<GridDiagram, ConstructionError> {
    connected_sum_parts(g1, g2).map(|c| c.grid)
}

/// Rotates `g1` so its bottom-row X is in the first column and `g2` so its
/// top-row X is in the last column, stacks them, and exchanges the O-markings
/// of the two columns where they meet.
pub fn connected_sum_parts(g1: &GridDiagram, g2: &GridDiagram) -> Result<ConnectedSum, ConstructionError> {
    if !g1.is_knot() || !g2.is_knot() {
        return Err(ConstructionError::InputIsLink);
    }
    let m = g2.n();
    let c1 = g1.column_of(Marking::X, 0);
    let c2 = g2.column_of(Marking::X, m - 1);
    let (upper, _) = cyclic_translate(g1, c1 as i64, 0);
    let (lower, _) = cyclic_translate(g2, c2 as i64 - (m as i64 - 1), 0);
    let u = disjoint_union(&upper, &lower);
    let mut o = u.sigma_o().to_vec();
    o.swap(m - 1, m);
    let grid = GridDiagram::from_zero_based(o, u.sigma_x().to_vec()).expect("connected sum");
    Ok(ConnectedSum { grid, upper, lower })
}

/// Row offset within an r×r block for the `i`-th parallel copy.
fn diagonal(corner: Corner, r: usize, i: usize) -> usize {
    match corner {
        Corner::NE | Corner::SW => i,
        Corner::NW | Corner::SE => r - 1 - i,
    }
}

/// The r-strand cable of `g`. The O-placements of the first O-block with
/// corner `twist` are cyclically shifted, adding r−1 crossings: negative at
/// an SE or NW block, positive at an SW or NE block. Without an explicit
/// corner the twist goes to an SE block, or an NW block if there is none.
pub fn cable_grid(g: &GridDiagram, r: usize, twist: Option<Corner>) -> Result<GridDiagram, ConstructionError> {
    if r < 2 {
        return Err(ConstructionError::BadCableParameter(r));
    }
    if !g.is_knot() {
        return Err(ConstructionError::InputIsLink);
    }
    let n = g.n();
    let find = |corner: Corner| (0..n).find(|&c| g.corner_of(Marking::O, c) == corner);
    let tc = match twist {
        Some(corner) => find(corner).ok_or(ConstructionError::NoTwistCorner(corner))?,
        None => find(Corner::SE).or_else(|| find(Corner::NW)).ok_or(ConstructionError::NoTwistCorner(Corner::SE))?,
    };
    let mut o = vec![0; r * n];
    let mut x = vec![0; r * n];
    for c in 0..n {
        let co = g.corner_of(Marking::O, c);
        let cx = g.corner_of(Marking::X, c);
        for i in 0..r {
            let oi = if c == tc { (i + r - 1) % r } else { i };
            o[c * r + i] = g.sigma_o()[c] * r + diagonal(co, r, oi);
            x[c * r + i] = g.sigma_x()[c] * r + diagonal(cx, r, i);
        }
    }
    Ok(GridDiagram::from_zero_based(o, x).expect("cable"))
}

/// A braid word on `strands` strands; letter ±i is σ_i^{±1}, strands
/// numbered from the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BraidWord {
    pub strands: usize,
    pub letters: Vec<i64>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<i64>) -> Result<Self, ConstructionError> {
        if strands == 0 {
            return Err(ConstructionError::MalformedBraid("strand count must be positive".into()));
        }
        if let Some(&letter) = letters.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize >= strands) {
            return Err(ConstructionError::BadLetter { letter, strands });
        }
        Ok(BraidWord { strands, letters })
    }

    /// Parses comma-separated signed letters.
    pub fn parse(strands: usize, text: &str) -> Result<Self, ConstructionError> {
        let text = text.trim();
        let letters = if text.is_empty() {
            Vec::new()
        } else {
            text.split(',')
                .map(|t| {
                    i64::from_str(t.trim()).map_err(|_| ConstructionError::MalformedBraid(format!("bad letter {t:?}")))
                })
                .collect::<Result<_, _>>()?
        };
        BraidWord::new(strands, letters)
    }

    /// Number of cycles of the underlying permutation.
    pub fn closure_components(&self) -> usize {
        let k = self.strands;
        let mut perm: Vec<usize> = (0..k).collect();
        for &l in &self.letters {
            let p = l.unsigned_abs() as usize - 1;
            perm.swap(p, p + 1);
        }
        let mut seen = vec![false; k];
        let mut count = 0;
        for s in 0..k {
            if !seen[s] {
                count += 1;
                let mut t = s;
                while !seen[t] {
                    seen[t] = true;
                    t = perm[t];
                }
            }
        }
        count
    }

    pub fn writhe(&self) -> i64 {
        self.letters.iter().map(|l| l.signum()).sum()
    }
}

impl std::fmt::Display for BraidWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

/// Length of the run σ_i σ_{i+1} … of positive consecutive letters at the
/// start of `w`.
fn leading_run(w: &[i64]) -> usize {
    match w.first() {
        Some(&first) if first > 0 => w.iter().enumerate().take_while(|&(t, &l)| l == first + t as i64).count(),
        _ => 0,
    }
}

/// Grid diagram of the braid closure of `w`.
pub fn braid_to_grid(w: &BraidWord) -> Result<GridDiagram, ConstructionError> {
    let comps = w.closure_components();
    if comps != 1 {
        return Err(ConstructionError::ClosureIsLink(comps));
    }
    if !w.letters.is_empty() && w.letters.iter().all(|&l| l < 0) {
        let neg = BraidWord { strands: w.strands, letters: w.letters.iter().map(|l| -l).collect() };
        return Ok(mirror_reverse(&closure_grid(&neg)).0);
    }
    Ok(closure_grid(w))
}

/// Builds the closure grid for a word with at least one positive letter (or
/// no letters), choosing the rotation with the longest leading positive run.
fn closure_grid(w: &BraidWord) -> GridDiagram {
    let m = w.letters.len();
    let rot = (0..m.max(1)).max_by_key(|&s| (leading_run(&rotate(&w.letters, s)), std::cmp::Reverse(s))).unwrap_or(0);
    let letters = rotate(&w.letters, rot);
    let run = leading_run(&letters);
    let k = w.strands;

    // Rows are kept in an ordered list (bottom to top) of row ids.
    let mut order: Vec<usize> = Vec::new();
    let mut next_id = 0;
    let mut fresh = || {
        next_id += 1;
        next_id - 1
    };
    // Initial rows, position 0 at the top.
    let mut init: Vec<Option<usize>> = vec![None; k];
    for p in (0..k).rev() {
        let id = fresh();
        order.push(id);
        init[p] = Some(id);
    }
    let mut cur: Vec<usize> = init.iter().map(|r| r.unwrap()).collect();
    // Absorb the leading run into the left closure column of its strand.
    let mut descend: Option<(usize, usize)> = None;
    if run > 0 {
        let p = letters[0] as usize - 1;
        let below = cur[p + run];
        let id = fresh();
        let at = order.iter().position(|&r| r == below).unwrap();
        order.insert(at, id);
        order.retain(|&r| r != cur[p]);
        init[p] = None;
        descend = Some((p, id));
        for q in p..p + run {
            cur[q] = cur[q + 1];
        }
        cur[p + run] = id;
    }

    // Letter columns: (X row, O row).
    let mut letter_cols: Vec<(usize, usize)> = Vec::new();
    for &l in &letters[run..] {
        let p = l.unsigned_abs() as usize - 1;
        let id = fresh();
        let (upper, lower) = (cur[p], cur[p + 1]);
        if l > 0 {
            let at = order.iter().position(|&r| r == lower).unwrap();
            order.insert(at, id);
            letter_cols.push((upper, id));
        } else {
            let at = order.iter().position(|&r| r == upper).unwrap();
            order.insert(at + 1, id);
            letter_cols.push((lower, id));
        }
        if l > 0 {
            cur[p] = lower;
        } else {
            cur[p] = id;
        }
        cur[p + 1] = if l > 0 { id } else { upper };
    }

    // Return rows above everything, R_0 lowest.
    let ret: Vec<usize> = (0..k)
        .map(|_| {
            let id = fresh();
            order.push(id);
            id
        })
        .collect();

    let n = order.len();
    let mut height = vec![0; next_id];
    for (h, &id) in order.iter().enumerate() {
        height[id] = h;
    }
    let mut o = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    // Left closure columns L_{k−1} … L_0.
    for p in (0..k).rev() {
        x.push(height[ret[p]]);
        let end = match (init[p], descend) {
            (Some(r), _) => r,
            (None, Some((q, r))) if q == p => r,
            _ => unreachable!("every strand starts somewhere"),
        };
        o.push(height[end]);
    }
    for &(xr, or) in &letter_cols {
        x.push(height[xr]);
        o.push(height[or]);
    }
    // Right closure columns C_0 … C_{k−1}.
    for p in 0..k {
        x.push(height[cur[p]]);
        o.push(height[ret[p]]);
    }
    debug_assert_eq!(o.len(), n);
    GridDiagram::from_zero_based(o, x).expect("braid closure grid")
}

fn rotate(w: &[i64], s: usize) -> Vec<i64> {
    if w.is_empty() {
        return Vec::new();
    }
    w[s..].iter().chain(&w[..s]).copied().collect()
}
