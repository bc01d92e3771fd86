use std::collections::BTreeMap;

use gridhom::complex::{gradings, rectangles, Arrow, GridComplex};
use gridhom::constructions::{braid_to_grid, mirror_reverse, torus_grid, BraidWord};
use gridhom::grid_model::{parse_grid, serialize_grid};
use gridhom::homology::{bigraded_homology, homology_of};
use gridhom::invariants::{epsilon, tau, EpsilonMode};
use gridhom::linalg::{kernel_basis, rank, BitVec, Echelon, SparseBitMatrix};
use gridhom::moves::{commute_columns, commute_rows, cyclic_translate, destabilize, stabilize, StabilizationKind};
use gridhom::oracle::{alexander_polynomial, brute_force_check};
use gridhom::{Flavor, GridDiagram, Guard};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_grid(n: usize, seed: u64, knot: bool) -> GridDiagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut o: Vec<usize> = (0..n).collect();
        let mut x = o.clone();
        o.shuffle(&mut rng);
        x.shuffle(&mut rng);
        if let Ok(g) = GridDiagram::from_zero_based(o, x) {
            if !knot || g.is_knot() {
                return g;
            }
        }
    }
}

fn grid(lo: usize, hi: usize) -> impl Strategy<Value = GridDiagram> {
    (lo..=hi, any::<u64>()).prop_map(|(n, s)| random_grid(n, s, false))
}

fn knot(lo: usize, hi: usize) -> impl Strategy<Value = GridDiagram> {
    (lo..=hi, any::<u64>()).prop_map(|(n, s)| random_grid(n, s, true))
}

fn guard() -> Guard {
    Guard::default()
}

/// Writhe corrected by the corner census; unchanged by cyclic translation.
fn framing(g: &GridDiagram) -> i64 {
    use gridhom::grid_model::{Corner, Marking};
    let c = g.corner_census();
    let turns: usize = [Marking::O, Marking::X].iter().map(|&k| c.get(k, Corner::NW) + c.get(k, Corner::SE)).sum();
    2 * g.writhe() - turns as i64
}

/// Rank over GF(2) by dense elimination on row bitmasks.
fn dense_rank(mut rows: Vec<u128>) -> usize {
    let mut r = 0;
    for bit in 0..128 {
        let Some(p) = (r..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else { continue };
        rows.swap(r, p);
        let pivot = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && *row >> bit & 1 == 1 {
                *row ^= pivot;
            }
        }
        r += 1;
    }
    r
}

fn matrix(rows: usize, cols: usize, seed: u64, density: f64) -> (SparseBitMatrix, Vec<u128>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dense = vec![0u128; rows];
    let mut columns = vec![BitVec::zeros(rows); cols];
    for (r, row) in dense.iter_mut().enumerate() {
        for (c, col) in columns.iter_mut().enumerate() {
            if rng.gen_bool(density) {
                *row |= 1 << c;
                col.set(r, true);
            }
        }
    }
    (SparseBitMatrix::from_columns(rows, &columns), dense)
}

/// 48 cases from a fixed seed unless PROPTEST_RNG_SEED says otherwise.
fn config() -> ProptestConfig {
    let mut c = ProptestConfig::with_cases(48);
    if c.rng_seed == RngSeed::Random {
        c.rng_seed = RngSeed::Fixed(0x5eed);
    }
    c
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn differentials_square_to_zero(g in grid(2, 5)) {
        let cx = GridComplex::new(&g, guard()).unwrap();
        for f in [Flavor::Tilde, Flavor::Minus, Flavor::Filtered] {
            prop_assert!(cx.differential(f).squares_to_zero(), "{} on {}", f.name(), g.to_compact());
        }
    }

    #[test]
    fn arrows_obey_grading_laws(g in grid(2, 5)) {
        let cx = GridComplex::new(&g, guard()).unwrap();
        for f in Flavor::ALL {
            for &Arrow { from, to, k } in &cx.differential(f).arrows {
                let (x, y) = (cx.grading(from as usize), cx.grading(to as usize));
                let k = k as i32;
                prop_assert_eq!(y.maslov_o, x.maslov_o - 1 + 2 * k);
                match f {
                    Flavor::Tilde => {
                        prop_assert_eq!(k, 0);
                        prop_assert_eq!(y.alexander2, x.alexander2);
                    }
                    Flavor::Minus | Flavor::Horizontal => {
                        prop_assert!(f == Flavor::Minus || k >= 1);
                        prop_assert_eq!(y.maslov_x, x.maslov_x - 1);
                        prop_assert_eq!(y.alexander2, x.alexander2 + 2 * k);
                    }
                    Flavor::Filtered => prop_assert!(y.alexander2 - 2 * k <= x.alexander2),
                }
            }
        }
    }

    #[test]
    fn exactly_two_rectangles(g in grid(2, 6), seed in any::<u64>()) {
        let n = g.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<usize> = (0..n).collect();
        x.shuffle(&mut rng);
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let mut y = x.clone();
        y.swap(i, j);
        let rs = rectangles(&g, &x, &y);
        prop_assert_eq!(rs.len(), 2);
        let (gx, gy) = (gradings(&g, &x), gradings(&g, &y));
        for r in &rs {
            let (o, xm) = (r.o_mult as i32, r.x_mult as i32);
            prop_assert_eq!(gy.alexander2 - gx.alexander2, 2 * (o - xm));
            if r.empty {
                prop_assert_eq!(gy.maslov_o, gx.maslov_o - 1 + 2 * o);
                prop_assert_eq!(gy.maslov_x, gx.maslov_x - 1 + 2 * xm);
            }
        }
        prop_assert!(rectangles(&g, &x, &x).is_empty());
    }

    #[test]
    fn serialization_round_trip(g in grid(2, 9)) {
        prop_assert_eq!(&parse_grid(&serialize_grid(&g)).unwrap(), &g);
        prop_assert_eq!(&GridDiagram::from_compact(&g.to_compact()).unwrap(), &g);
    }

    #[test]
    fn mirror_is_an_involution(g in grid(2, 8)) {
        let (m, b) = mirror_reverse(&g);
        let (mm, bb) = mirror_reverse(&m);
        prop_assert_eq!(&mm, &g);
        prop_assert_eq!(m.writhe(), -g.writhe());
        prop_assert_eq!(m.component_count(), g.component_count());
        let round = b.then(&bb);
        prop_assert!(round.index_map().iter().enumerate().all(|(i, &j)| i == j));
    }

    #[test]
    fn stabilization_round_trip(g in grid(2, 7), c in any::<prop::sample::Index>(), k in 0usize..8) {
        let col = c.index(g.n());
        let kind = StabilizationKind::all()[k];
        let (s, inj) = stabilize(&g, col, kind).unwrap();
        prop_assert_eq!(s.n(), g.n() + 1);
        prop_assert_eq!(s.component_count(), g.component_count());
        prop_assert_eq!(inj.target_index(), s.n());
        let row = g.sigma(kind.marking)[col];
        prop_assert_eq!(&destabilize(&s, col, row).unwrap(), &g);
    }

    #[test]
    fn translation_by_n_is_identity(g in grid(2, 8), dx in -20i64..20, dy in -20i64..20) {
        let n = g.n() as i64;
        let (t, b) = cyclic_translate(&g, n, -2 * n);
        prop_assert_eq!(&t, &g);
        prop_assert!(b.index_map().iter().enumerate().all(|(i, &j)| i == j));
        let (s, _) = cyclic_translate(&g, dx, dy);
        prop_assert_eq!(framing(&s), framing(&g));
        prop_assert_eq!(s.component_count(), g.component_count());
        prop_assert_eq!(&cyclic_translate(&s, -dx, -dy).0, &g);
    }

    #[test]
    fn translation_transports_gradings(g in grid(2, 5), dx in 0i64..5, dy in 0i64..5) {
        let (t, b) = cyclic_translate(&g, dx, dy);
        let (cg, ct) = (GridComplex::new(&g, guard()).unwrap(), GridComplex::new(&t, guard()).unwrap());
        let map = b.index_map();
        let count = |cx: &GridComplex| {
            let mut m = BTreeMap::new();
            for gr in cx.gradings() {
                *m.entry((gr.maslov_o, gr.alexander2)).or_insert(0usize) += 1;
            }
            m
        };
        prop_assert_eq!(count(&cg), count(&ct));
        let (hg, ht) = (
            bigraded_homology(&cg, &cg.differential(Flavor::Tilde)).unwrap(),
            bigraded_homology(&ct, &ct.differential(Flavor::Tilde)).unwrap(),
        );
        prop_assert_eq!(hg.slices, ht.slices);
        prop_assert_eq!(map.len(), cg.len());
    }

    #[test]
    fn alexander_polynomial_is_a_knot_invariant(g in knot(2, 4), c in any::<prop::sample::Index>(), k in 0usize..8, i in any::<prop::sample::Index>()) {
        let d = alexander_polynomial(&g, guard()).unwrap();
        prop_assert!(d.is_symmetric());
        let col = c.index(g.n());
        let (s, _) = stabilize(&g, col, StabilizationKind::all()[k]).unwrap();
        prop_assert_eq!(&alexander_polynomial(&s, guard()).unwrap(), &d);
        let (t, _) = cyclic_translate(&g, 1, 2);
        prop_assert_eq!(&alexander_polynomial(&t, guard()).unwrap(), &d);
        let j = i.index(g.n());
        for h in [commute_columns(&g, j), commute_rows(&g, j)].into_iter().flatten() {
            prop_assert_eq!(&alexander_polynomial(&h, guard()).unwrap(), &d);
        }
    }

    #[test]
    fn invariants_under_moves(g in knot(2, 5), c in any::<prop::sample::Index>(), k in 0usize..8, i in any::<prop::sample::Index>()) {
        let t = tau(&g, guard()).unwrap();
        let e = epsilon(&g, EpsilonMode::Robust, guard()).unwrap().value;
        prop_assert!((-1..=1).contains(&e));
        let (m, _) = mirror_reverse(&g);
        prop_assert_eq!(tau(&m, guard()).unwrap(), -t);
        prop_assert_eq!(epsilon(&m, EpsilonMode::Robust, guard()).unwrap().value, -e);
        let mut moved = vec![stabilize(&g, c.index(g.n()), StabilizationKind::all()[k]).unwrap().0];
        let j = i.index(g.n());
        moved.extend([commute_columns(&g, j), commute_rows(&g, j)].into_iter().flatten());
        moved.push(cyclic_translate(&g, 2, 1).0);
        for h in moved {
            prop_assert_eq!(tau(&h, guard()).unwrap(), t, "{}", h.to_compact());
            prop_assert_eq!(epsilon(&h, EpsilonMode::Robust, guard()).unwrap().value, e, "{}", h.to_compact());
        }
    }

    #[test]
    fn rank_matches_dense_elimination(rows in 1usize..40, cols in 1usize..40, seed in any::<u64>(), density in 0.05f64..0.6) {
        let (m, dense) = matrix(rows, cols, seed, density);
        let r = rank(&m);
        prop_assert_eq!(r, dense_rank(dense));
        let kernel = kernel_basis(&m);
        prop_assert_eq!(kernel.len(), cols - r);
        let mut span = Echelon::new(cols);
        for v in &kernel {
            prop_assert!(m.mul_vec(v).unwrap().is_zero());
            prop_assert!(span.push(v).unwrap());
        }
    }

    #[test]
    fn persistence_matches_slice_ranks(g in grid(2, 5)) {
        let cx = GridComplex::new(&g, guard()).unwrap();
        let d = cx.differential(Flavor::Tilde);
        let h = bigraded_homology(&cx, &d).unwrap();
        let mut index: BTreeMap<(i32, i32), Vec<usize>> = BTreeMap::new();
        for (s, gr) in cx.gradings().iter().enumerate() {
            index.entry((gr.maslov_o, gr.alexander2)).or_default().push(s);
        }
        // Rank of ∂ leaving the (m, a) slice.
        let out_rank = |key: (i32, i32)| -> usize {
            let Some(src) = index.get(&key) else { return 0 };
            let Some(dst) = index.get(&(key.0 - 1, key.1)) else { return 0 };
            let mut rows = vec![0u128; src.len()];
            for a in &d.arrows {
                if let (Some(r), Some(c)) = (
                    src.iter().position(|&s| s == a.from as usize),
                    dst.iter().position(|&s| s == a.to as usize),
                ) {
                    rows[r] ^= 1 << c;
                }
            }
            dense_rank(rows)
        };
        let mut direct = BTreeMap::new();
        for (&(m, a), states) in &index {
            let dim = states.len() - out_rank((m, a)) - out_rank((m + 1, a));
            if dim > 0 {
                direct.insert((m, a), dim);
            }
        }
        let computed: BTreeMap<_, _> = h.slices.iter().filter(|(_, &v)| v > 0).map(|(&k, &v)| (k, v)).collect();
        prop_assert_eq!(computed, direct);
    }
}

#[test]
fn brute_force_agrees_on_random_grids() {
    for seed in 0..20 {
        let g = random_grid(4, seed, false);
        let report = brute_force_check(&g).unwrap();
        assert!(report.matches(), "{}: {:?}", g.to_compact(), report.mismatches());
    }
}

#[test]
fn minus_homology_has_expected_free_rank() {
    for g in [torus_grid(1, 1).unwrap(), torus_grid(2, 3).unwrap(), torus_grid(3, 1).unwrap()] {
        let (_, h) = homology_of(&g, Flavor::Minus, guard()).unwrap();
        assert_eq!(h.free_rank(), 1 << (g.n() - 1), "{}", g.to_compact());
    }
}

#[test]
fn trefoil_alexander_across_presentations() {
    let standard = torus_grid(2, 3).unwrap();
    let kind: StabilizationKind = "O:NE".parse().unwrap();
    let stabilized = stabilize(&standard, 2, kind).unwrap().0;
    let braid = braid_to_grid(&BraidWord::parse(2, "1,1,1").unwrap()).unwrap();
    for g in [&standard, &stabilized, &braid] {
        assert_eq!(alexander_polynomial(g, guard()).unwrap().to_string(), "t - 1 + t^-1", "{}", g.to_compact());
    }
}
