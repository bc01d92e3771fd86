//! Grid states, grading functions, empty rectangles and the four differentials.
//!
//! A state is a permutation `p` with lattice points `(i, p[i])`. Lattice
//! points sit at integer coordinates and markings at cell centres, so all
//! ℐ-counts are taken on doubled coordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid_model::GridDiagram;

pub const DEFAULT_MAX_INDEX: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("grid index {n} exceeds the configured maximum {max} (pass an override to allow it)")]
    TooLarge { n: usize, max: usize },
}

/// Size guard for factorial-sized enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guard {
    pub max_index: usize,
    pub allow_large: bool,
}

impl Default for Guard {
    fn default() -> Self {
        Guard { max_index: DEFAULT_MAX_INDEX, allow_large: false }
    }
}

impl Guard {
    pub fn permissive() -> Self {
        Guard { max_index: DEFAULT_MAX_INDEX, allow_large: true }
    }

    pub fn check(&self, n: usize) -> Result<(), ComplexError> {
        if n > self.max_index && !self.allow_large {
            Err(ComplexError::TooLarge { n, max: self.max_index })
        } else {
            Ok(())
        }
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lexicographic rank of a permutation of `0..n`.
pub fn state_index(p: &[usize]) -> usize {
    let n = p.len();
    let mut rank = 0;
    let mut used = 0u32;
    for (i, &v) in p.iter().enumerate() {
        let smaller_unused = (0..v).filter(|&u| used & (1 << u) == 0).count();
        rank = rank * (n - i) + smaller_unused;
        used |= 1 << v;
    }
    rank
}

/// Inverse of [`state_index`].
pub fn state_of(n: usize, mut rank: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<usize> = (0..n).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

/// All states of index `n` in lexicographic order, packed with stride `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    n: usize,
    data: Vec<u8>,
}

impl StateSpace {
    pub fn new(n: usize) -> Self {
        let count = factorial(n);
        let mut data = Vec::with_capacity(count * n);
        let mut p: Vec<usize> = (0..n).collect();
        loop {
            data.extend(p.iter().map(|&v| v as u8));
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else { break };
            let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
            p.swap(i, j);
            p[i + 1..].reverse();
        }
        StateSpace { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, idx: usize) -> &[u8] {
        &self.data[idx * self.n..(idx + 1) * self.n]
    }

    pub fn state(&self, idx: usize) -> Vec<usize> {
        self.get(idx).iter().map(|&v| v as usize).collect()
    }

    pub fn index_of(&self, p: &[usize]) -> usize {
        state_index(p)
    }
}

pub fn grid_states(g: &GridDiagram, guard: Guard) -> Result<StateSpace, ComplexError> {
    guard.check(g.n())?;
    Ok(StateSpace::new(g.n()))
}

/// Maslov and Alexander gradings; `alexander2` is twice the Alexander grading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gradings {
    pub maslov_o: i32,
    pub maslov_x: i32,
    pub alexander2: i32,
}

impl Gradings {
    /// The Alexander grading, when it is an integer.
    pub fn alexander(&self) -> Option<i32> {
        (self.alexander2 % 2 == 0).then_some(self.alexander2 / 2)
    }
}

/// ℐ(A, B) on doubled coordinates: pairs with `a` strictly south-west of `b`.
fn count_i(a: &[(i32, i32)], b: &[(i32, i32)]) -> i64 {
    let mut c = 0;
    for p in a {
        for q in b {
            if p.0 < q.0 && p.1 < q.1 {
                c += 1;
            }
        }
    }
    c
}

/// 2𝒥(A, B) = ℐ(A, B) + ℐ(B, A).
fn two_j(a: &[(i32, i32)], b: &[(i32, i32)]) -> i64 {
    count_i(a, b) + count_i(b, a)
}

/// Precomputed marking data for fast grading evaluation.
#[derive(Debug, Clone)]
pub struct GradingContext {
    n: usize,
    components: usize,
    o_pts: Vec<(i32, i32)>,
    x_pts: Vec<(i32, i32)>,
    two_joo: i64,
    two_jxx: i64,
}

impl GradingContext {
    pub fn new(g: &GridDiagram) -> Self {
        let marks = |s: &[usize]| -> Vec<(i32, i32)> {
            s.iter().enumerate().map(|(c, &r)| (2 * c as i32 + 1, 2 * r as i32 + 1)).collect()
        };
        let o_pts = marks(g.sigma_o());
        let x_pts = marks(g.sigma_x());
        GradingContext {
            n: g.n(),
            components: g.component_count(),
            two_joo: two_j(&o_pts, &o_pts),
            two_jxx: two_j(&x_pts, &x_pts),
            o_pts,
            x_pts,
        }
    }

    pub fn gradings(&self, state: &[u8]) -> Gradings {
        let pts: Vec<(i32, i32)> = state.iter().enumerate().map(|(i, &r)| (2 * i as i32, 2 * r as i32)).collect();
        let jxx = two_j(&pts, &pts);
        let m = |marks: &[(i32, i32)], jmm: i64| -> i32 {
            // 2M = 2J(x,x) - 2·2J(x,M) + 2J(M,M) + 2
            let twice = jxx - 2 * two_j(&pts, marks) + jmm + 2;
            debug_assert!(twice % 2 == 0);
            (twice / 2) as i32
        };
        let maslov_o = m(&self.o_pts, self.two_joo);
        let maslov_x = m(&self.x_pts, self.two_jxx);
        let alexander2 = maslov_o - maslov_x - (self.n as i32 - self.components as i32);
        Gradings { maslov_o, maslov_x, alexander2 }
    }
}

pub fn gradings(g: &GridDiagram, state: &[usize]) -> Gradings {
    let s: Vec<u8> = state.iter().map(|&v| v as u8).collect();
    GradingContext::new(g).gradings(&s)
}

/// A rectangle on the torus with lower-left corner `sw` and upper-right
/// corner `ne`, both lattice points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rectangle {
    pub sw: (usize, usize),
    pub ne: (usize, usize),
    pub o_mult: usize,
    pub x_mult: usize,
    pub empty: bool,
}

impl Rectangle {
    pub fn width(&self, n: usize) -> usize {
        (self.ne.0 + n - self.sw.0) % n
    }

    pub fn height(&self, n: usize) -> usize {
        (self.ne.1 + n - self.sw.1) % n
    }
}

/// The rectangle whose corners carry `x`'s points in columns `i` and `j`,
/// with `(i, x[i])` as its south-west corner.
fn rectangle_at(g: &GridDiagram, x: &[u8], i: usize, j: usize) -> Rectangle {
    let n = g.n();
    let bottom = x[i] as usize;
    let w = (j + n - i) % n;
    let h = (x[j] as usize + n - bottom) % n;
    let mut empty = true;
    for t in 1..w {
        let c = (i + t) % n;
        let off = (x[c] as usize + n - bottom) % n;
        if off > 0 && off < h {
            empty = false;
            break;
        }
    }
    let mut o_mult = 0;
    let mut x_mult = 0;
    for t in 0..w {
        let c = (i + t) % n;
        if (g.sigma_o()[c] + n - bottom) % n < h {
            o_mult += 1;
        }
        if (g.sigma_x()[c] + n - bottom) % n < h {
            x_mult += 1;
        }
    }
    Rectangle { sw: (i, bottom), ne: (j, x[j] as usize), o_mult, x_mult, empty }
}

/// Both toroidal rectangles from `x` to `y`, or none when the states do not
/// differ in exactly two coordinates.
pub fn rectangles(g: &GridDiagram, x: &[usize], y: &[usize]) -> Vec<Rectangle> {
    let diff: Vec<usize> = (0..x.len()).filter(|&c| x[c] != y[c]).collect();
    if diff.len() != 2 {
        return Vec::new();
    }
    let (i, j) = (diff[0], diff[1]);
    if x[i] != y[j] || x[j] != y[i] {
        return Vec::new();
    }
    let xs: Vec<u8> = x.iter().map(|&v| v as u8).collect();
    vec![rectangle_at(g, &xs, i, j), rectangle_at(g, &xs, j, i)]
}

/// Every empty rectangle leaving `x`, as (target state, rectangle).
pub fn empty_rectangles_from(g: &GridDiagram, x: &[u8]) -> Vec<(Vec<u8>, Rectangle)> {
    let n = g.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let r = rectangle_at(g, x, i, j);
            if r.empty {
                let mut y = x.to_vec();
                y.swap(i, j);
                out.push((y, r));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Rectangles avoiding both X and O.
    Tilde,
    /// Rectangles avoiding X, weighted by U^{|r ∩ O|}.
    Minus,
    /// All empty rectangles, weighted by U^{|r ∩ O|}.
    Filtered,
    /// Rectangles avoiding X and meeting O at least once.
    Horizontal,
}

impl Flavor {
    pub const ALL: [Flavor; 4] = [Flavor::Tilde, Flavor::Minus, Flavor::Filtered, Flavor::Horizontal];

    pub fn admits(self, r: &Rectangle) -> bool {
        match self {
            Flavor::Tilde => r.x_mult == 0 && r.o_mult == 0,
            Flavor::Minus => r.x_mult == 0,
            Flavor::Filtered => true,
            Flavor::Horizontal => r.x_mult == 0 && r.o_mult >= 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Tilde => "tilde",
            Flavor::Minus => "minus",
            Flavor::Filtered => "filtered",
            Flavor::Horizontal => "horizontal",
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tilde" => Ok(Flavor::Tilde),
            "minus" => Ok(Flavor::Minus),
            "filtered" => Ok(Flavor::Filtered),
            "horizontal" => Ok(Flavor::Horizontal),
            _ => Err(format!("unknown flavor {s:?}")),
        }
    }
}

/// An arrow `from → U^k · to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub from: u32,
    pub to: u32,
    pub k: u32,
}

/// States of a grid together with their gradings.
#[derive(Debug, Clone)]
pub struct GridComplex {
    grid: GridDiagram,
    states: StateSpace,
    gradings: Vec<Gradings>,
}

impl GridComplex {
    pub fn new(g: &GridDiagram, guard: Guard) -> Result<Self, ComplexError> {
        let states = grid_states(g, guard)?;
        let ctx = GradingContext::new(g);
        let gradings = (0..states.len()).into_par_iter().map(|i| ctx.gradings(states.get(i))).collect();
        Ok(GridComplex { grid: g.clone(), states, gradings })
    }

    pub fn grid(&self) -> &GridDiagram {
        &self.grid
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn gradings(&self) -> &[Gradings] {
        &self.gradings
    }

    pub fn grading(&self, idx: usize) -> Gradings {
        self.gradings[idx]
    }

    pub fn differential(&self, flavor: Flavor) -> GradedDifferential {
        let g = &self.grid;
        let per_state: Vec<Vec<Arrow>> = (0..self.states.len())
            .into_par_iter()
            .map(|s| {
                let mut out: Vec<Arrow> = empty_rectangles_from(g, self.states.get(s))
                    .into_iter()
                    .filter(|(_, r)| flavor.admits(r))
                    .map(|(y, r)| Arrow {
                        from: s as u32,
                        to: self.states.index_of(&y.iter().map(|&v| v as usize).collect::<Vec<_>>()) as u32,
                        k: if flavor == Flavor::Tilde { 0 } else { r.o_mult as u32 },
                    })
                    .collect();
                cancel_pairs(&mut out);
                out
            })
            .collect();
        GradedDifferential { flavor, n_states: self.states.len(), arrows: per_state.concat() }
    }
}

/// Sorts and removes arrows occurring an even number of times.
fn cancel_pairs(v: &mut Vec<Arrow>) {
    v.sort_unstable();
    let mut out: Vec<Arrow> = Vec::with_capacity(v.len());
    for a in v.drain(..) {
        if out.last() == Some(&a) {
            out.pop();
        } else {
            out.push(a);
        }
    }
    *v = out;
}

/// A differential over GF(2)[U] as a sorted arrow list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedDifferential {
    pub flavor: Flavor,
    pub n_states: usize,
    pub arrows: Vec<Arrow>,
}

impl GradedDifferential {
    /// Arrows grouped by source state.
    pub fn by_source(&self) -> Vec<&[Arrow]> {
        let mut out = vec![&self.arrows[0..0]; self.n_states];
        let mut start = 0;
        while start < self.arrows.len() {
            let s = self.arrows[start].from;
            let end = start + self.arrows[start..].iter().take_while(|a| a.from == s).count();
            out[s as usize] = &self.arrows[start..end];
            start = end;
        }
        out
    }

    /// The composite ∂∘∂ as an arrow list; empty exactly when ∂² = 0.
    pub fn square(&self) -> Vec<Arrow> {
        let by = self.by_source();
        let per: Vec<Vec<Arrow>> = (0..self.n_states)
            .into_par_iter()
            .map(|s| {
                let mut out = Vec::new();
                for a in by[s] {
                    for b in by[a.to as usize] {
                        out.push(Arrow { from: s as u32, to: b.to, k: a.k + b.k });
                    }
                }
                cancel_pairs(&mut out);
                out
            })
            .collect();
        per.concat()
    }

    pub fn squares_to_zero(&self) -> bool {
        self.square().is_empty()
    }

    /// Arrow indices grouped by the bigrading of their source state.
    pub fn slices(&self, gr: &[Gradings]) -> std::collections::BTreeMap<(i32, i32), Vec<usize>> {
        let mut m = std::collections::BTreeMap::new();
        for (i, a) in self.arrows.iter().enumerate() {
            let s = gr[a.from as usize];
            m.entry((s.maslov_o, s.alexander2)).or_insert_with(Vec::new).push(i);
        }
        m
    }

    /// One arrow per line: `from_index, to_index, k`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for a in &self.arrows {
            s.push_str(&format!("{}, {}, {}\n", a.from, a.to, a.k));
        }
        s
    }
}

pub fn build_differential(g: &GridDiagram, flavor: Flavor, guard: Guard) -> Result<GradedDifferential, ComplexError> {
    Ok(GridComplex::new(g, guard)?.differential(flavor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::validate_grid;

    fn unknot() -> GridDiagram {
        validate_grid(&[1, 2], &[2, 1]).unwrap()
    }

    fn trefoil() -> GridDiagram {
        validate_grid(&[1, 2, 3, 4, 5], &[3, 4, 5, 1, 2]).unwrap()
    }

    #[test]
    fn rank_round_trip() {
        for n in 1..=6 {
            let sp = StateSpace::new(n);
            assert_eq!(sp.len(), factorial(n));
            for i in 0..sp.len() {
                assert_eq!(sp.index_of(&sp.state(i)), i);
                assert_eq!(state_of(n, i), sp.state(i));
            }
        }
    }

    #[test]
    fn unknot_gradings() {
        let u = unknot();
        assert_eq!(gradings(&u, &[1, 0]), Gradings { maslov_o: 0, maslov_x: -1, alexander2: 0 });
        assert_eq!(gradings(&u, &[0, 1]), Gradings { maslov_o: -1, maslov_x: 0, alexander2: -2 });
    }

    #[test]
    fn unknot_rectangles() {
        let u = unknot();
        let rs = rectangles(&u, &[1, 0], &[0, 1]);
        assert_eq!(rs.len(), 2);
        for r in rs {
            assert_eq!((r.o_mult, r.x_mult, r.empty), (0, 1, true));
            assert_eq!((r.width(2), r.height(2)), (1, 1));
        }
        assert!(rectangles(&u, &[1, 0], &[1, 0]).is_empty());
    }

    #[test]
    fn unknot_minus_is_zero() {
        let d = build_differential(&unknot(), Flavor::Minus, Guard::default()).unwrap();
        assert!(d.arrows.is_empty());
    }

    #[test]
    fn trefoil_tilde_squares_to_zero() {
        let d = build_differential(&trefoil(), Flavor::Tilde, Guard::default()).unwrap();
        assert!(!d.arrows.is_empty());
        assert!(d.squares_to_zero());
    }

    #[test]
    fn guard_rejects_large() {
        let g = GridDiagram::from_zero_based((0..9).collect(), (0..9).map(|i| (i + 1) % 9).collect()).unwrap();
        assert!(matches!(grid_states(&g, Guard::default()), Err(ComplexError::TooLarge { n: 9, max: 8 })));
    }

    #[test]
    fn dump_format() {
        let d = build_differential(&unknot(), Flavor::Filtered, Guard::default()).unwrap();
        for line in d.dump().lines() {
            assert_eq!(line.split(", ").count(), 3);
        }
    }
}
