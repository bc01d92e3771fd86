//! Concordance invariants τ and ε, canonical grid states and the
//! verification suite.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, Flavor, GradedDifferential, GridComplex, Guard};
use crate::constructions::mirror_reverse;
use crate::grid_model::GridDiagram;
use crate::homology::{bigraded_homology, BigradedModule, HomologyError};
use crate::linalg::{kernel_basis, BitVec, Echelon, SparseBitMatrix};

mod verify;

pub use verify::{verify_theorems, CheckResult, Selector, VerifyReport, SELECTORS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("diagram is a link with {0} components; a knot is required")]
    NotAKnot(usize),
    #[error("reflected representative spans Maslov gradings {0:?} in the mirror")]
    NonHomogeneousReflection(Vec<i32>),
    #[error("top horizontal class is {0}-dimensional, expected 1")]
    AmbiguousTopClass(usize),
    #[error("both hook maps vanish on the top class")]
    BothHooksTrivial,
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMode {
    #[default]
    Robust,
    Strict,
}

impl fmt::Display for EpsilonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpsilonMode::Robust => "robust",
            EpsilonMode::Strict => "strict",
        })
    }
}

impl FromStr for EpsilonMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "robust" => Ok(EpsilonMode::Robust),
            "strict" => Ok(EpsilonMode::Strict),
            _ => Err(format!("unknown epsilon mode {s:?}")),
        }
    }
}

/// Which membership test decided ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MembershipTest {
    InImage,
    NotInKernel,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonDiagnostics {
    pub fired: MembershipTest,
    /// Largest Alexander grading of a non-torsion class.
    pub alexander_max: i32,
    /// Number of terms in the representative that was transported.
    pub representative_size: usize,
    /// Leading terms of that representative: 1-based states with their
    /// U-exponent.
    pub representative: Vec<(Vec<usize>, i32)>,
    /// Robust mode: whether the top class survives into each hook.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_hook_nontrivial: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_hook_nontrivial: Option<bool>,
    /// Strict mode: whether the mirror's horizontal differential squares to zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizontal_squares_to_zero: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonResult {
    pub value: i8,
    pub mode: EpsilonMode,
    pub diagnostics: EpsilonDiagnostics,
}

/// τ and ε of one diagram, sharing a single homology computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotInvariants {
    pub tau: i32,
    pub epsilon: EpsilonResult,
}

const SHOWN_TERMS: usize = 8;

fn knot_complex(g: &GridDiagram, guard: Guard) -> Result<GridComplex, InvariantError> {
    let l = g.component_count();
    if l != 1 {
        return Err(InvariantError::NotAKnot(l));
    }
    Ok(GridComplex::new(g, guard)?)
}

fn minus_homology(cx: &GridComplex) -> Result<BigradedModule, InvariantError> {
    Ok(bigraded_homology(cx, &cx.differential(Flavor::Minus))?)
}

/// τ = −(largest Alexander grading of a non-torsion class).
pub fn tau(g: &GridDiagram, guard: Guard) -> Result<i32, InvariantError> {
    let cx = knot_complex(g, guard)?;
    tau_of(&minus_homology(&cx)?)
}

pub fn tau_of(h: &BigradedModule) -> Result<i32, InvariantError> {
    Ok(-h.max_nontorsion_alexander()?.0 / 2)
}

/// The state at the upper-right corners of the X-markings.
pub fn canonical_x_plus(g: &GridDiagram) -> Vec<usize> {
    let n = g.n();
    let mut y = vec![0; n];
    for (c, &r) in g.sigma_x().iter().enumerate() {
        y[(c + 1) % n] = (r + 1) % n;
    }
    y
}

/// The state at the lower-right corners of the O-markings.
pub fn canonical_o_plus(g: &GridDiagram) -> Vec<usize> {
    let n = g.n();
    let mut y = vec![0; n];
    for (c, &r) in g.sigma_o().iter().enumerate() {
        y[(c + 1) % n] = r;
    }
    y
}

pub fn epsilon(g: &GridDiagram, mode: EpsilonMode, guard: Guard) -> Result<EpsilonResult, InvariantError> {
    Ok(knot_invariants(g, mode, guard)?.epsilon)
}

pub fn knot_invariants(g: &GridDiagram, mode: EpsilonMode, guard: Guard) -> Result<KnotInvariants, InvariantError> {
    let cx = knot_complex(g, guard)?;
    match mode {
        EpsilonMode::Robust => {
            let (h, filtered) = rayon::join(|| minus_homology(&cx), || cx.differential(Flavor::Filtered));
            let h = h?;
            let tau = tau_of(&h)?;
            Ok(KnotInvariants { tau, epsilon: robust_epsilon(&cx, &filtered, -tau)? })
        }
        EpsilonMode::Strict => {
            let (mg, _) = mirror_reverse(g);
            let (h, mirror) = rayon::join(
                || minus_homology(&cx),
                || -> Result<_, InvariantError> {
                    let mcx = GridComplex::new(&mg, guard)?;
                    let d = mcx.differential(Flavor::Horizontal);
                    Ok((mcx, d))
                },
            );
            let h = h?;
            let (mcx, dh) = mirror?;
            let tau = tau_of(&h)?;
            Ok(KnotInvariants { tau, epsilon: strict_epsilon(&cx, &h, &mcx, &dh)? })
        }
    }
}

fn one_based(cx: &GridComplex, s: usize) -> Vec<usize> {
    cx.states().state(s).into_iter().map(|v| v + 1).collect()
}

/// A subcomplex of the localized filtered complex, spanned by generators
/// `U^k x`. Each state contributes at most two generators: one on the line
/// `A − k = a` and one with `k = 0`.
struct Hook<'a> {
    cx: &'a GridComplex,
    arrows: Vec<&'a [crate::complex::Arrow]>,
    gens: Vec<(usize, i32)>,
    on_line: Vec<Option<usize>>,
    at_zero: Vec<Option<usize>>,
    a: i32,
}

impl<'a> Hook<'a> {
    fn new(
        cx: &'a GridComplex,
        d: &'a GradedDifferential,
        a: i32,
        line: impl Fn(i32) -> bool,
        zero: impl Fn(i32) -> bool,
    ) -> Self {
        let n = cx.len();
        let mut h =
            Hook { cx, arrows: d.by_source(), gens: Vec::new(), on_line: vec![None; n], at_zero: vec![None; n], a };
        for x in 0..n {
            let ax = h.alexander(x);
            if line(ax) {
                h.on_line[x] = Some(h.gens.len());
                if ax == a {
                    h.at_zero[x] = Some(h.gens.len());
                }
                h.gens.push((x, ax - a));
            }
            if zero(ax) && h.at_zero[x].is_none() {
                h.at_zero[x] = Some(h.gens.len());
                h.gens.push((x, 0));
            }
        }
        h
    }

    fn alexander(&self, x: usize) -> i32 {
        self.cx.grading(x).alexander2 / 2
    }

    fn maslov(&self, g: usize) -> i32 {
        let (x, k) = self.gens[g];
        self.cx.grading(x).maslov_o - 2 * k
    }

    fn lookup(&self, x: usize, k: i32) -> Option<usize> {
        if k == self.alexander(x) - self.a {
            if let Some(i) = self.on_line[x] {
                return Some(i);
            }
        }
        if k == 0 {
            return self.at_zero[x];
        }
        None
    }

    fn boundary(&self, g: usize) -> Vec<usize> {
        let (x, k) = self.gens[g];
        self.arrows[x].iter().filter_map(|a| self.lookup(a.to as usize, k + a.k as i32)).collect()
    }

    /// Generators in Maslov grading `m`, and the position of each generator
    /// within its grading.
    fn level(&self, m: i32) -> Vec<usize> {
        (0..self.gens.len()).filter(|&g| self.maslov(g) == m).collect()
    }

    fn positions(&self, level: &[usize]) -> std::collections::HashMap<usize, usize> {
        level.iter().enumerate().map(|(p, &g)| (g, p)).collect()
    }

    /// Boundaries of the generators in grading m+1, as vectors over grading m.
    fn boundaries_into(&self, m: i32) -> (Vec<usize>, Vec<BitVec>) {
        let rows = self.level(m);
        let pos = self.positions(&rows);
        let cols = self
            .level(m + 1)
            .into_iter()
            .map(|g| BitVec::from_ones(rows.len(), self.boundary(g).into_iter().map(|t| pos[&t])))
            .collect();
        (rows, cols)
    }

    /// A basis of the cycles in grading m, as vectors over that grading.
    fn cycles_at(&self, m: i32) -> (Vec<usize>, Vec<BitVec>) {
        let cols = self.level(m);
        let rows = self.level(m - 1);
        let pos = self.positions(&rows);
        let vecs: Vec<BitVec> = cols
            .iter()
            .map(|&g| BitVec::from_ones(rows.len(), self.boundary(g).into_iter().map(|t| pos[&t])))
            .collect();
        let basis = kernel_basis(&SparseBitMatrix::from_columns(rows.len(), &vecs));
        (cols, basis)
    }
}

fn echelon_of(rows: usize, vecs: &[BitVec]) -> Echelon {
    let mut e = Echelon::new(rows);
    for v in vecs {
        e.push(v).expect("dimensions agree");
    }
    e
}

/// ε from the two hook complexes through the top horizontal class.
///
/// The horizontal complex at Alexander level `a` has a one-dimensional top
/// class γ. If γ does not lift to the hook `{j = a, i ≤ 0} ∪ {i = 0, j ≤ a}`
/// then ε = −1; if γ becomes a boundary in the hook
/// `{j = a, i ≥ 0} ∪ {i = 0, j ≥ a}` then ε = +1; otherwise ε = 0.
fn robust_epsilon(cx: &GridComplex, filtered: &GradedDifferential, a: i32) -> Result<EpsilonResult, InvariantError> {
    let top = 2 * a;
    let horizontal = Hook::new(cx, filtered, a, |_| true, |_| false);
    let (h_rows, h_bounds) = horizontal.boundaries_into(top);
    let (h_cols, h_cycles) = horizontal.cycles_at(top);
    debug_assert_eq!(h_rows, h_cols);
    let mut span = echelon_of(h_rows.len(), &h_bounds);
    let mut gamma = None;
    let mut dim = 0;
    for z in &h_cycles {
        if span.push(z).expect("dimensions agree") {
            dim += 1;
            gamma.get_or_insert_with(|| z.clone());
        }
    }
    if dim != 1 {
        return Err(InvariantError::AmbiguousTopClass(dim));
    }
    let gamma = gamma.unwrap();
    let h_pos = horizontal.positions(&h_rows);

    // Lower hook: project its cycles onto the line j = a.
    let lower = Hook::new(cx, filtered, a, |ax| ax >= a, |ax| ax <= a);
    let (g_cols, g_cycles) = lower.cycles_at(top);
    let mut projections = h_bounds.clone();
    for z in &g_cycles {
        let mut v = BitVec::zeros(h_rows.len());
        for p in z.ones() {
            let (x, k) = lower.gens[g_cols[p]];
            if lower.alexander(x) - k == a {
                let hg = horizontal.lookup(x, k).expect("on the horizontal line");
                v.flip(h_pos[&hg]);
            }
        }
        projections.push(v);
    }
    let lower_nontrivial = echelon_of(h_rows.len(), &projections).contains(&gamma).expect("dimensions agree");

    // Upper hook: truncate γ to k ≤ 0 and test whether it bounds.
    let upper = Hook::new(cx, filtered, a, |ax| ax <= a, |ax| ax >= a);
    let (f_rows, f_bounds) = upper.boundaries_into(top);
    let f_pos = upper.positions(&f_rows);
    let mut v = BitVec::zeros(f_rows.len());
    for p in gamma.ones() {
        let (x, k) = horizontal.gens[h_rows[p]];
        if k <= 0 {
            v.flip(f_pos[&upper.lookup(x, k).expect("in the hook")]);
        }
    }
    let upper_nontrivial = !echelon_of(f_rows.len(), &f_bounds).contains(&v).expect("dimensions agree");

    let (value, fired) = match (lower_nontrivial, upper_nontrivial) {
        (false, false) => return Err(InvariantError::BothHooksTrivial),
        (false, true) => (-1, MembershipTest::InImage),
        (true, false) => (1, MembershipTest::NotInKernel),
        (true, true) => (0, MembershipTest::Neither),
    };
    let terms: Vec<(usize, i32)> = gamma.ones().map(|p| horizontal.gens[h_rows[p]]).collect();
    Ok(EpsilonResult {
        value,
        mode: EpsilonMode::Robust,
        diagnostics: EpsilonDiagnostics {
            fired,
            alexander_max: a,
            representative_size: terms.len(),
            representative: terms.iter().take(SHOWN_TERMS).map(|&(x, k)| (one_based(cx, x), k)).collect(),
            lower_hook_nontrivial: Some(lower_nontrivial),
            upper_hook_nontrivial: Some(upper_nontrivial),
            horizontal_squares_to_zero: None,
        },
    })
}

/// ε by transporting the top free generator to the mirror and testing it
/// against the mirror's horizontal differential, read as a linear map with
/// U = 1, one `M_X` grading at a time.
fn strict_epsilon(
    cx: &GridComplex,
    h: &BigradedModule,
    mcx: &GridComplex,
    dh: &GradedDifferential,
) -> Result<EpsilonResult, InvariantError> {
    let (a2, top) = h.max_nontorsion_alexander()?;
    let (_, rho) = mirror_reverse(cx.grid());
    let z: Vec<usize> = top.representative.states().collect();
    let image: Vec<usize> = z.iter().map(|&s| mcx.states().index_of(&rho.apply(&cx.states().state(s)))).collect();
    let mut mo: Vec<i32> = image.iter().map(|&s| mcx.grading(s).maslov_o).collect();
    mo.sort_unstable();
    mo.dedup();
    if mo.len() > 1 {
        return Err(InvariantError::NonHomogeneousReflection(mo));
    }
    let by = dh.by_source();
    let gr = mcx.gradings();
    let mut levels: std::collections::BTreeMap<i32, Vec<usize>> = std::collections::BTreeMap::new();
    for &s in &image {
        levels.entry(gr[s].maslov_x).or_default().push(s);
    }
    let mut in_image = true;
    let mut in_kernel = true;
    for (&m, comp) in &levels {
        let rows: Vec<usize> = (0..mcx.len()).filter(|&s| gr[s].maslov_x == m).collect();
        let pos: std::collections::HashMap<usize, usize> = rows.iter().enumerate().map(|(p, &s)| (s, p)).collect();
        let target = BitVec::from_ones(rows.len(), comp.iter().map(|s| pos[s]));
        if in_image {
            let cols: Vec<BitVec> = (0..mcx.len())
                .filter(|&s| gr[s].maslov_x == m + 1)
                .map(|s| BitVec::from_ones(rows.len(), by[s].iter().map(|a| pos[&(a.to as usize)])))
                .collect();
            in_image = echelon_of(rows.len(), &cols).contains(&target).expect("dimensions agree");
        }
        let mut dz = std::collections::BTreeSet::new();
        for &s in comp {
            for a in by[s] {
                if !dz.insert(a.to) {
                    dz.remove(&a.to);
                }
            }
        }
        in_kernel &= dz.is_empty();
    }
    let (value, fired) = if in_image {
        (-1, MembershipTest::InImage)
    } else if in_kernel {
        (0, MembershipTest::Neither)
    } else {
        (1, MembershipTest::NotInKernel)
    };
    Ok(EpsilonResult {
        value,
        mode: EpsilonMode::Strict,
        diagnostics: EpsilonDiagnostics {
            fired,
            alexander_max: a2 / 2,
            representative_size: top.representative.len(),
            representative: top
                .representative
                .terms
                .iter()
                .take(SHOWN_TERMS)
                .map(|&(s, k)| (one_based(cx, s), k as i32))
                .collect(),
            lower_hook_nontrivial: None,
            upper_hook_nontrivial: None,
            horizontal_squares_to_zero: Some(dh.squares_to_zero()),
        },
    })
}
