//! Independent cross-checks: graded Euler characteristics, Alexander
//! polynomials and a naive recomputation of the tilde homology.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{ComplexError, Flavor, GridComplex, Guard, StateSpace};
use crate::grid_model::GridDiagram;
use crate::homology::{bigraded_homology, HomologyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("not divisible by (1 - t^-1)^{0}")]
    NonDivisible(usize),
    #[error("normalized polynomial is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("diagram is a link with {0} components; a knot is required")]
    NotAKnot(usize),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// Coefficient ring requirements for [`LaurentPoly`].
pub trait Coeff:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone + PartialEq + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

/// The field with two elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Gf2(pub bool);

impl Add for Gf2 {
    type Output = Gf2;
    fn add(self, rhs: Gf2) -> Gf2 {
        Gf2(self.0 != rhs.0)
    }
}

impl Sub for Gf2 {
    type Output = Gf2;
    fn sub(self, rhs: Gf2) -> Gf2 {
        Gf2(self.0 != rhs.0)
    }
}

impl Mul for Gf2 {
    type Output = Gf2;
    fn mul(self, rhs: Gf2) -> Gf2 {
        Gf2(self.0 && rhs.0)
    }
}

impl Neg for Gf2 {
    type Output = Gf2;
    fn neg(self) -> Gf2 {
        self
    }
}

impl Zero for Gf2 {
    fn zero() -> Gf2 {
        Gf2(false)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
}

impl One for Gf2 {
    fn one() -> Gf2 {
        Gf2(true)
    }
}

impl fmt::Display for Gf2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(self.0))
    }
}

/// A finitely supported Laurent polynomial in `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly<C> {
    terms: BTreeMap<i32, C>,
}

impl<C: Coeff> Default for LaurentPoly<C> {
    fn default() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }
}

impl<C: Coeff> LaurentPoly<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(C::one(), 0)
    }

    pub fn monomial(c: C, e: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(c, e);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i32, C)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(c, e);
        }
        p
    }

    pub fn add_term(&mut self, c: C, e: i32) {
        let cur = self.terms.remove(&e).unwrap_or_else(C::zero);
        let next = cur + c;
        if !next.is_zero() {
            self.terms.insert(e, next);
        }
    }

    pub fn coeff(&self, e: i32) -> C {
        self.terms.get(&e).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &C)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: i32) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&e, c)| (e + k, c.clone())).collect() }
    }

    /// Substitutes `t ↦ t⁻¹`.
    pub fn invert(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&e, c)| (-e, c.clone())).collect() }
    }

    pub fn scale(&self, c: C) -> Self {
        Self::from_terms(self.terms.iter().map(|(&e, d)| (e, d.clone() * c.clone())))
    }

    pub fn eval_one(&self) -> C {
        self.terms.values().cloned().fold(C::zero(), |a, b| a + b)
    }

    /// Exact division by `1 − t⁻¹`, or None when there is a remainder.
    pub fn div_one_minus_t_inv(&self) -> Option<Self> {
        // p = q·(1 − t⁻¹)  ⇔  t·p = q·(t − 1); divide from the top degree.
        let Some(top) = self.max_exp() else { return Some(Self::zero()) };
        let bottom = self.min_exp().unwrap();
        let mut rem = self.shift(1);
        let mut q = Self::zero();
        let mut e = top + 1;
        while e > bottom + 1 {
            let c = rem.coeff(e);
            if !c.is_zero() {
                // c·t^{e−1}·(t − 1) = c·t^e − c·t^{e−1}
                q.add_term(c.clone(), e - 1);
                rem.add_term(-c.clone(), e);
                rem.add_term(c, e - 1);
            }
            e -= 1;
        }
        rem.is_zero().then_some(q)
    }

    /// Whether `p(t) = p(t⁻¹)`.
    pub fn is_symmetric(&self) -> bool {
        *self == self.invert()
    }
}

impl<C: Coeff> Add for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn add(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(c.clone(), e);
        }
        out
    }
}

impl<C: Coeff> Sub for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn sub(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(-c.clone(), e);
        }
        out
    }
}

impl<C: Coeff> Mul for &LaurentPoly<C> {
    type Output = LaurentPoly<C>;
    fn mul(self, rhs: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = LaurentPoly::zero();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &rhs.terms {
                out.add_term(c1.clone() * c2.clone(), e1 + e2);
            }
        }
        out
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (&e, c) in self.terms.iter().rev() {
            let s = c.to_string();
            let (neg, mag) = match s.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, s),
            };
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let var = match e {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{e}"),
            };
            if var.is_empty() {
                f.write_str(&mag)?;
            } else if mag == "1" {
                f.write_str(&var)?;
            } else {
                write!(f, "{mag}{var}")?;
            }
        }
        Ok(())
    }
}

fn knot_complex(g: &GridDiagram, guard: Guard) -> Result<GridComplex, OracleError> {
    let l = g.component_count();
    if l != 1 {
        return Err(OracleError::NotAKnot(l));
    }
    Ok(GridComplex::new(g, guard)?)
}

/// χ = Σ_x (−1)^{M(x)} t^{A(x)} over all grid states.
pub fn graded_euler_characteristic(g: &GridDiagram, guard: Guard) -> Result<crate::IntPoly, OracleError> {
    let cx = knot_complex(g, guard)?;
    let mut counts: BTreeMap<i32, i64> = BTreeMap::new();
    for gr in cx.gradings() {
        let sign = if gr.maslov_o.rem_euclid(2) == 0 { 1 } else { -1 };
        *counts.entry(gr.alexander2 / 2).or_insert(0) += sign;
    }
    Ok(LaurentPoly::from_terms(counts))
}

/// χ / (1 − t⁻¹)^{n−1}, shifted to be symmetric and signed so that Δ(1) = 1.
pub fn alexander_polynomial(g: &GridDiagram, guard: Guard) -> Result<crate::IntPoly, OracleError> {
    let mut p = graded_euler_characteristic(g, guard)?;
    let k = g.n() - 1;
    for _ in 0..k {
        p = p.div_one_minus_t_inv().ok_or(OracleError::NonDivisible(k))?;
    }
    normalize(p)
}

fn normalize(p: crate::IntPoly) -> Result<crate::IntPoly, OracleError> {
    let (lo, hi) = match (p.min_exp(), p.max_exp()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(OracleError::NotSymmetric(p.to_string())),
    };
    if (hi - lo) % 2 != 0 {
        return Err(OracleError::NotSymmetric(p.to_string()));
    }
    let mut q = p.shift(-(lo + hi) / 2);
    if q.eval_one() < 0 {
        q = q.scale(-1);
    }
    if !q.is_symmetric() || q.eval_one() != 1 {
        return Err(OracleError::NotSymmetric(q.to_string()));
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceReport {
    /// (maslov, 2·alexander) → (naive dimension, pipeline dimension), for
    /// every slice where either is non-zero.
    pub slices: BTreeMap<(i32, i32), (usize, usize)>,
}

impl BruteForceReport {
    pub fn matches(&self) -> bool {
        self.slices.values().all(|(a, b)| a == b)
    }

    pub fn mismatches(&self) -> Vec<((i32, i32), (usize, usize))> {
        self.slices.iter().filter(|(_, (a, b))| a != b).map(|(&k, &v)| (k, v)).collect()
    }
}

/// Naive gradings on half-integer coordinates.
fn naive_gradings(g: &GridDiagram, state: &[usize]) -> (i32, i32) {
    let n = g.n();
    let pts: Vec<(f64, f64)> = (0..n).map(|i| (i as f64, state[i] as f64)).collect();
    let marks = |s: &[usize]| -> Vec<(f64, f64)> { (0..n).map(|i| (i as f64 + 0.5, s[i] as f64 + 0.5)).collect() };
    let i_count = |a: &[(f64, f64)], b: &[(f64, f64)]| -> f64 {
        a.iter().map(|p| b.iter().filter(|q| p.0 < q.0 && p.1 < q.1).count()).sum::<usize>() as f64
    };
    let j = |a: &[(f64, f64)], b: &[(f64, f64)]| (i_count(a, b) + i_count(b, a)) / 2.0;
    let m = |mk: &[(f64, f64)]| j(&pts, &pts) - 2.0 * j(&pts, mk) + j(mk, mk) + 1.0;
    let (o, x) = (marks(g.sigma_o()), marks(g.sigma_x()));
    let mo = m(&o);
    let mx = m(&x);
    let a2 = mo - mx - (n as f64 - g.component_count() as f64);
    (mo.round() as i32, a2.round() as i32)
}

/// Whether the cell (c, r) lies in the rectangle spanning columns
/// `[left, left+w)` and rows `[bottom, bottom+h)` on the torus.
fn cell_in(n: usize, c: usize, r: usize, left: usize, w: usize, bottom: usize, h: usize) -> bool {
    (c + n - left) % n < w && (r + n - bottom) % n < h
}

/// Tilde-flavor arrows by explicit enumeration of state pairs.
fn naive_tilde_arrows(g: &GridDiagram, states: &StateSpace) -> Vec<Vec<usize>> {
    let n = g.n();
    (0..states.len())
        .into_par_iter()
        .map(|xi| {
            let x = states.state(xi);
            let mut targets = Vec::new();
            for yi in 0..states.len() {
                let y = states.state(yi);
                let diff: Vec<usize> = (0..n).filter(|&c| x[c] != y[c]).collect();
                if diff.len() != 2 {
                    continue;
                }
                let mut count = 0;
                for (a, b) in [(diff[0], diff[1]), (diff[1], diff[0])] {
                    // x's point in column a is the south-west corner
                    let w = (b + n - a) % n;
                    let h = (x[b] + n - x[a]) % n;
                    let inside = (0..n).any(|c| {
                        let dc = (c + n - a) % n;
                        let dr = (x[c] + n - x[a]) % n;
                        dc > 0 && dc < w && dr > 0 && dr < h
                    });
                    let marked = (0..n).any(|c| {
                        cell_in(n, c, g.sigma_o()[c], a, w, x[a], h) || cell_in(n, c, g.sigma_x()[c], a, w, x[a], h)
                    });
                    if !inside && !marked {
                        count += 1;
                    }
                }
                if count % 2 == 1 {
                    targets.push(yi);
                }
            }
            targets
        })
        .collect()
}

fn dense_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let mut rank = 0;
    let cols = rows.first().map_or(0, |r| r.len());
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else { continue };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] {
                let pivot = rows[rank].clone();
                for (a, b) in rows[r].iter_mut().zip(pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Recomputes the tilde homology with a naive enumerator and dense
/// elimination, and compares every slice with the main pipeline.
pub fn brute_force_check(g: &GridDiagram) -> Result<BruteForceReport, OracleError> {
    Guard { max_index: 5, allow_large: false }.check(g.n())?;
    let states = StateSpace::new(g.n());
    let gr: Vec<(i32, i32)> = (0..states.len()).map(|i| naive_gradings(g, &states.state(i))).collect();
    let arrows = naive_tilde_arrows(g, &states);
    let mut by_slice: BTreeMap<(i32, i32), Vec<usize>> = BTreeMap::new();
    for (i, &k) in gr.iter().enumerate() {
        by_slice.entry(k).or_default().push(i);
    }
    let rank_of = |src: &(i32, i32)| -> usize {
        let Some(cols) = by_slice.get(src) else { return 0 };
        let Some(rows) = by_slice.get(&(src.0 - 1, src.1)) else { return 0 };
        let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(p, &s)| (s, p)).collect();
        let m: Vec<Vec<bool>> = cols
            .iter()
            .map(|&c| {
                let mut v = vec![false; rows.len()];
                for t in &arrows[c] {
                    v[pos[t]] ^= true;
                }
                v
            })
            .collect();
        dense_rank(m)
    };
    let mut naive = BTreeMap::new();
    for (&(m, a2), cells) in &by_slice {
        let dim = cells.len() - rank_of(&(m, a2)) - rank_of(&(m + 1, a2));
        naive.insert((m, a2), dim);
    }
    let cx = GridComplex::new(g, Guard::default())?;
    let h = bigraded_homology(&cx, &cx.differential(Flavor::Tilde))?;
    let mut slices = BTreeMap::new();
    for (&k, &d) in &naive {
        slices.insert(k, (d, h.dim(k.0, k.1)));
    }
    for (&k, &d) in &h.slices {
        slices.entry(k).or_insert((0, d));
    }
    slices.retain(|_, (a, b)| *a > 0 || *b > 0);
    Ok(BruteForceReport { slices })
}
