//! Bigraded homology over GF(2)[U].
//!
//! With X-blocked rectangles the arrow `x → U^k y` always has
//! `k = A(y) − A(x)`, so the part of the minus complex in Alexander grading
//! `a` is the span of the states with `A ≥ a`, graded by `M_X`, and `U` is the
//! inclusion into the span for `a − 1`. The homology is therefore the
//! persistence module of that filtration. One boundary-matrix reduction per
//! `M_X` level yields every slice, the `U`-action, the free/torsion split and
//! representative cycles at once.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::complex::{Flavor, GradedDifferential, Gradings, GridComplex};
use crate::linalg::BitVec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("flavor {0} is not bigraded; homology is computed for tilde and minus")]
    NotBigraded(&'static str),
    #[error("the {0} differential does not square to zero")]
    NotAComplex(&'static str),
    #[error("no free part found (pipeline bug)")]
    NoFreePart,
    #[error(transparent)]
    Complex(#[from] crate::complex::ComplexError),
}

/// A homogeneous chain `Σ U^k · state`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chain {
    pub maslov: i32,
    pub alexander2: i32,
    /// (state index, U-exponent), sorted by state index.
    pub terms: Vec<(usize, u32)>,
}

impl Chain {
    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|t| t.0)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }
}

/// One summand of the homology: born at a bigrading, with a U-order (None
/// for free summands).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub maslov: i32,
    pub alexander2: i32,
    pub order: Option<u32>,
    pub representative: Chain,
}

impl Summand {
    /// Whether `U^t` of this summand's generator sits at (m, a) and
    /// `U^{t+extra}` is still non-zero.
    fn alive_at(&self, maslov: i32, alexander2: i32, extra: u32) -> bool {
        let t2 = self.alexander2 - alexander2;
        if t2 < 0 || t2 % 2 != 0 || self.maslov - maslov != t2 {
            return false;
        }
        let t = (t2 / 2) as u32;
        self.order.is_none_or(|o| t + extra < o)
    }
}

/// Result of reducing one filtered boundary matrix.
#[derive(Debug, Clone, Default)]
pub struct Persistence {
    /// (birth cell, death cell) with a strictly later death.
    pub pairs: Vec<(usize, usize)>,
    /// Cells whose class never dies.
    pub essential: Vec<usize>,
    /// Cycle representative for every birth cell.
    pub cycles: BTreeMap<usize, Vec<usize>>,
}

/// Per degree: the degree, (birth, death) pairs and zero columns with their
/// cycle supports.
type LevelReduction = (i32, Vec<(usize, usize)>, Vec<(usize, Vec<usize>)>);

/// Reduces a filtered complex. `degree[c]` is the homological degree of cell
/// `c` (the boundary lowers it by one), `key[c]` its entry time, and
/// `boundary[c]` its boundary as a list of cells. Ties in entry time are
/// broken by cell index.
pub fn reduce_filtered(degree: &[i32], key: &[i64], boundary: &[Vec<u32>]) -> Persistence {
    let mut levels: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (c, &d) in degree.iter().enumerate() {
        levels.entry(d).or_default().push(c);
    }
    for cells in levels.values_mut() {
        cells.sort_by_key(|&c| (key[c], c));
    }
    let mut pos = vec![0usize; degree.len()];
    for cells in levels.values() {
        for (p, &c) in cells.iter().enumerate() {
            pos[c] = p;
        }
    }
    let empty = Vec::new();
    let per_level: Vec<LevelReduction> = levels
        .par_iter()
        .map(|(&d, cols)| {
            let rows = levels.get(&(d - 1)).unwrap_or(&empty);
            let mut owner: Vec<Option<usize>> = vec![None; rows.len()];
            let mut reduced: Vec<BitVec> = Vec::with_capacity(cols.len());
            let mut v: Vec<BitVec> = Vec::with_capacity(cols.len());
            let mut pairs = Vec::new();
            let mut zero_cols = Vec::new();
            for (j, &c) in cols.iter().enumerate() {
                let mut r = BitVec::zeros(rows.len());
                for &t in &boundary[c] {
                    r.flip(pos[t as usize]);
                }
                let mut vj = BitVec::zeros(cols.len());
                vj.flip(j);
                while let Some(low) = r.last_one() {
                    match owner[low] {
                        Some(p) => {
                            r.xor_assign(&reduced[p]);
                            vj.xor_assign(&v[p]);
                        }
                        None => break,
                    }
                }
                match r.last_one() {
                    Some(low) => {
                        owner[low] = Some(j);
                        pairs.push((rows[low], c));
                    }
                    None => zero_cols.push((c, vj.ones().map(|q| cols[q]).collect())),
                }
                reduced.push(r);
                v.push(vj);
            }
            (d, pairs, zero_cols)
        })
        .collect();
    let mut out = Persistence::default();
    let mut killed = std::collections::BTreeSet::new();
    for (_, pairs, _) in &per_level {
        for &(b, dcell) in pairs {
            killed.insert(b);
            out.pairs.push((b, dcell));
        }
    }
    for (_, _, zeros) in per_level {
        for (c, cyc) in zeros {
            if !killed.contains(&c) {
                out.essential.push(c);
            }
            out.cycles.insert(c, cyc);
        }
    }
    out.pairs.sort_unstable();
    out.essential.sort_unstable();
    out
}

/// Homology of a grid complex as a bigraded GF(2)[U]-module.
#[derive(Debug, Clone)]
pub struct BigradedModule {
    pub flavor: Flavor,
    /// dim H_{m,a} keyed by (maslov, 2·alexander), for Alexander gradings
    /// between the extreme state gradings (below that range every slice is a
    /// U-translate).
    pub slices: BTreeMap<(i32, i32), usize>,
    pub free_generators: Vec<Summand>,
    pub torsion: Vec<Summand>,
    a2_min: i32,
    a2_max: i32,
}

impl BigradedModule {
    pub fn free_rank(&self) -> usize {
        self.free_generators.len()
    }

    /// dim H_{m,a}, valid for every Alexander grading.
    pub fn dim(&self, maslov: i32, alexander2: i32) -> usize {
        self.summands().filter(|s| s.alive_at(maslov, alexander2, 0)).count()
    }

    /// Rank of U: H_{m,a} → H_{m−2,a−1}.
    pub fn u_rank(&self, maslov: i32, alexander2: i32) -> usize {
        self.summands().filter(|s| s.alive_at(maslov, alexander2, 1)).count()
    }

    pub fn summands(&self) -> impl Iterator<Item = &Summand> {
        self.free_generators.iter().chain(&self.torsion)
    }

    pub fn alexander2_window(&self) -> (i32, i32) {
        (self.a2_min, self.a2_max)
    }

    /// The largest Alexander grading carrying a free summand, with its
    /// representative.
    pub fn max_nontorsion_alexander(&self) -> Result<(i32, &Summand), HomologyError> {
        let top = self.free_generators.iter().max_by_key(|s| s.alexander2).ok_or(HomologyError::NoFreePart)?;
        let first = self.free_generators.iter().find(|s| s.alexander2 == top.alexander2).unwrap();
        Ok((first.alexander2, first))
    }

    /// Number of free summands at the top Alexander grading.
    pub fn top_free_multiplicity(&self) -> usize {
        match self.free_generators.iter().map(|s| s.alexander2).max() {
            Some(a) => self.free_generators.iter().filter(|s| s.alexander2 == a).count(),
            None => 0,
        }
    }

    /// JSON report with true (halved) Alexander gradings.
    pub fn report(&self) -> Value {
        let slices: Vec<Value> = self
            .slices
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&(m, a2), &d)| json!({"m": m, "a": half(a2), "dim": d}))
            .collect();
        let free: Vec<Value> =
            self.free_generators.iter().map(|s| json!({"m": s.maslov, "a": half(s.alexander2)})).collect();
        let torsion: Vec<Value> = self
            .torsion
            .iter()
            .map(|s| json!({"m": s.maslov, "a": half(s.alexander2), "order": s.order.unwrap_or(0)}))
            .collect();
        if self.flavor == Flavor::Tilde {
            return json!({"slices": slices});
        }
        json!({"slices": slices, "free": free, "torsion": torsion})
    }
}

/// A doubled grading as a JSON number: an integer when even.
pub fn half(a2: i32) -> Value {
    if a2 % 2 == 0 {
        json!(a2 / 2)
    } else {
        json!(a2 as f64 / 2.0)
    }
}

fn chain_of(cells: &[usize], gr: &[Gradings], maslov: i32, a2: i32, flavor: Flavor) -> Chain {
    let mut terms: Vec<(usize, u32)> = cells
        .iter()
        .map(|&s| {
            let k = if flavor == Flavor::Minus { ((gr[s].alexander2 - a2) / 2) as u32 } else { 0 };
            (s, k)
        })
        .collect();
    terms.sort_unstable();
    Chain { maslov, alexander2: a2, terms }
}

/// Homology of the tilde or minus flavor.
pub fn bigraded_homology(cx: &GridComplex, d: &GradedDifferential) -> Result<BigradedModule, HomologyError> {
    let flavor = d.flavor;
    if !matches!(flavor, Flavor::Minus | Flavor::Tilde) {
        return Err(HomologyError::NotBigraded(flavor.name()));
    }
    if !d.squares_to_zero() {
        return Err(HomologyError::NotAComplex(flavor.name()));
    }
    let gr = cx.gradings();
    let n = gr.len();
    let mut boundary: Vec<Vec<u32>> = vec![Vec::new(); n];
    for a in &d.arrows {
        boundary[a.from as usize].push(a.to);
    }
    let (degree, key): (Vec<i32>, Vec<i64>) = match flavor {
        Flavor::Minus => gr.iter().map(|g| (g.maslov_x, -(g.alexander2 as i64))).unzip(),
        _ => gr.iter().map(|g| (g.maslov_o, 0)).unzip(),
    };
    let p = reduce_filtered(&degree, &key, &boundary);
    let a2_min = gr.iter().map(|g| g.alexander2).min().unwrap_or(0);
    let a2_max = gr.iter().map(|g| g.alexander2).max().unwrap_or(0);

    let summand = |birth: usize, order: Option<u32>| -> Summand {
        let g = gr[birth];
        Summand {
            maslov: g.maslov_o,
            alexander2: g.alexander2,
            order,
            representative: chain_of(&p.cycles[&birth], gr, g.maslov_o, g.alexander2, flavor),
        }
    };
    let free_generators: Vec<Summand> = p.essential.iter().map(|&c| summand(c, None)).collect();
    let mut torsion = Vec::new();
    for &(b, dcell) in &p.pairs {
        let order = (gr[b].alexander2 - gr[dcell].alexander2) / 2;
        if flavor == Flavor::Minus && order > 0 {
            torsion.push(summand(b, Some(order as u32)));
        }
    }
    let (free_generators, torsion) = match flavor {
        // U acts by zero on the tilde theory: every class has order one.
        Flavor::Tilde => (Vec::new(), free_generators.into_iter().map(|s| Summand { order: Some(1), ..s }).collect()),
        _ => (free_generators, torsion),
    };
    let mut slices = BTreeMap::new();
    for s in free_generators.iter().chain(&torsion) {
        let lowest = match (flavor, s.order) {
            (Flavor::Tilde, _) => s.alexander2,
            (_, Some(o)) => s.alexander2 - 2 * (o as i32 - 1),
            (_, None) => a2_min,
        };
        let mut a2 = s.alexander2;
        let mut m = s.maslov;
        while a2 >= lowest {
            *slices.entry((m, a2)).or_insert(0) += 1;
            a2 -= 2;
            m -= 2;
        }
    }
    let mut module = BigradedModule { flavor, slices, free_generators, torsion, a2_min, a2_max };
    module.free_generators.sort_by_key(|s| {
        (std::cmp::Reverse(s.alexander2), std::cmp::Reverse(s.maslov), s.representative.terms.first().map(|t| t.0))
    });
    module.torsion.sort_by_key(|s| {
        (
            std::cmp::Reverse(s.alexander2),
            std::cmp::Reverse(s.maslov),
            s.order,
            s.representative.terms.first().map(|t| t.0),
        )
    });
    Ok(module)
}

/// Convenience wrapper building the complex and differential.
pub fn homology_of(
    g: &crate::grid_model::GridDiagram,
    flavor: Flavor,
    guard: crate::complex::Guard,
) -> Result<(GridComplex, BigradedModule), HomologyError> {
    let cx = GridComplex::new(g, guard)?;
    let d = cx.differential(flavor);
    let h = bigraded_homology(&cx, &d)?;
    Ok((cx, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Guard;
    use crate::grid_model::validate_grid;

    #[test]
    fn unknot_minus() {
        let u = validate_grid(&[1, 2], &[2, 1]).unwrap();
        let (_, h) = homology_of(&u, Flavor::Minus, Guard::default()).unwrap();
        let gens: Vec<(i32, i32)> = h.free_generators.iter().map(|s| (s.maslov, s.alexander2)).collect();
        assert_eq!(gens, vec![(0, 0), (-1, -2)]);
        assert!(h.torsion.is_empty());
        assert_eq!(h.max_nontorsion_alexander().unwrap().0, 0);
    }

    #[test]
    fn trefoil_minus_top() {
        let t = validate_grid(&[1, 2, 3, 4, 5], &[3, 4, 5, 1, 2]).unwrap();
        let (_, h) = homology_of(&t, Flavor::Minus, Guard::default()).unwrap();
        assert_eq!(h.max_nontorsion_alexander().unwrap().0, 2);
        assert_eq!(h.free_rank(), 16);
        assert_eq!(h.top_free_multiplicity(), 1);
    }

    #[test]
    fn horizontal_is_rejected() {
        let t = validate_grid(&[1, 2, 3, 4, 5], &[3, 4, 5, 1, 2]).unwrap();
        let e = homology_of(&t, Flavor::Filtered, Guard::default()).unwrap_err();
        assert_eq!(e, HomologyError::NotBigraded("filtered"));
    }
}
