use std::process::ExitCode;
use std::time::{Duration, Instant};

use gridhom::complex::{gradings, rectangles, GridComplex};
use gridhom::constructions::{braid_to_grid, cable_grid, connected_sum, mirror_reverse, torus_grid, BraidWord};
use gridhom::grid_model::validate_grid;
use gridhom::invariants::{epsilon, knot_invariants, verify_theorems, EpsilonMode, Selector};
use gridhom::moves::{commute_columns, commute_rows, stabilize, StabilizationKind};
use gridhom::oracle::alexander_polynomial;
use gridhom::{Flavor, GridDiagram, Guard};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Vec<String>, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    /// Reason the criterion cannot hold, when it is known not to.
    unattainable: Option<&'static str>,
    run: fn() -> Outcome,
}

fn guard() -> Guard {
    Guard { max_index: 7, allow_large: false }
}

fn torus(p: usize, q: usize) -> GridDiagram {
    torus_grid(p, q).expect("torus grid")
}

fn mirror(g: &GridDiagram) -> GridDiagram {
    mirror_reverse(g).0
}

fn eps(g: &GridDiagram) -> Result<i8, String> {
    epsilon(g, EpsilonMode::Robust, guard()).map(|e| e.value).map_err(|e| e.to_string())
}

/// Collects `label: expected vs actual` lines for every mismatch.
struct Tally(Vec<String>);

impl Tally {
    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, label: &str, expected: T, actual: T) {
        if expected != actual {
            self.0.push(format!("{label}: expected {expected:?}, got {actual:?}"));
        }
    }

    fn done(self) -> Outcome {
        if self.0.is_empty() {
            Ok(Vec::new())
        } else {
            Err(self.0.join("; "))
        }
    }
}

fn sweep() -> Vec<(&'static str, GridDiagram, i8)> {
    vec![
        ("G(-2,1)", torus(2, 1), 0),
        ("G(-3,1)", torus(3, 1), 0),
        ("G(-4,1)", torus(4, 1), 0),
        ("G(-2,3)", torus(2, 3), -1),
        ("G(-2,5)", torus(2, 5), -1),
        ("G(-3,4)", torus(3, 4), -1),
    ]
}

fn unknot() -> Outcome {
    let mut t = Tally(Vec::new());
    t.eq("eps(U2)", 0, eps(&torus(1, 1))?);
    t.done()
}

fn trefoil() -> Outcome {
    let inv = knot_invariants(&torus(2, 3), EpsilonMode::Robust, guard()).map_err(|e| e.to_string())?;
    let mut t = Tally(Vec::new());
    t.eq("eps(G(-2,3))", -1, inv.epsilon.value);
    t.eq("tau(G(-2,3))", -1, inv.tau);
    let m = knot_invariants(&mirror(&torus(2, 3)), EpsilonMode::Robust, guard()).map_err(|e| e.to_string())?;
    t.eq("tau(-G(-2,3))", 1, m.tau);
    t.done()
}

fn torus_sweep() -> Outcome {
    let mut t = Tally(Vec::new());
    for (name, g, e) in sweep() {
        t.eq(&format!("eps({name})"), e, eps(&g)?);
        if e != 0 {
            t.eq(&format!("eps(-{name})"), 1, eps(&mirror(&g))?);
        }
    }
    t.done()
}

fn mirror_antisymmetry() -> Outcome {
    let mut t = Tally(Vec::new());
    for (name, g, _) in sweep() {
        t.eq(&format!("eps(-{name}) + eps({name})"), 0, eps(&mirror(&g))? + eps(&g)?);
    }
    t.done()
}

fn zero_summand() -> Outcome {
    let g = connected_sum(&torus(1, 1), &torus(2, 3)).map_err(|e| e.to_string())?;
    let mut t = Tally(Vec::new());
    t.eq("grid index", 7, g.n());
    t.eq("eps(U2 # G(-2,3))", -1, eps(&g)?);
    t.done()
}

fn sum_with_mirror() -> Outcome {
    let mut t = Tally(Vec::new());
    let kind: StabilizationKind = "X:SW".parse().map_err(|e: gridhom::moves::MoveError| e.to_string())?;
    let u3 = stabilize(&torus(1, 1), 0, kind).map_err(|e| e.to_string())?.0;
    for (name, u) in [("U2", torus(1, 1)), ("U3", u3)] {
        let g = connected_sum(&u, &mirror(&u)).map_err(|e| e.to_string())?;
        t.eq(&format!("index of {name} # -{name}"), 2 * u.n(), g.n());
        t.eq(&format!("eps({name} # -{name})"), 0, eps(&g)?);
    }
    let big = connected_sum(&torus(2, 3), &mirror(&torus(2, 3))).map_err(|e| e.to_string())?;
    t.done()?;
    Ok(vec![format!("G(-2,3) # -G(-2,3) has index {} and needs --allow-large", big.n())])
}

fn braid() -> Outcome {
    let g = braid_to_grid(&BraidWord::parse(2, "1,1,1").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut t = Tally(Vec::new());
    t.eq("eps(closure(s1^3))", 1, eps(&g)?);
    t.eq("eps(-closure(s1^3))", -1, eps(&mirror(&g))?);
    t.done()
}

fn cable() -> Outcome {
    let c = cable_grid(&torus(2, 1), 2, None).map_err(|e| e.to_string())?;
    let mut t = Tally(Vec::new());
    t.eq("eps(cable(G(-2,1), 2)) = eps(G(-2,5))", eps(&torus(2, 5))?, eps(&c)?);
    t.done()
}

fn cable_writhe() -> Outcome {
    let mut t = Tally(Vec::new());
    for (name, g) in [("G(-2,1)", torus(2, 1)), ("G(-2,3)", torus(2, 3))] {
        for r in [2usize, 3] {
            let c = cable_grid(&g, r, None).map_err(|e| e.to_string())?;
            let r = r as i64;
            t.eq(&format!("writhe(cable({name}, {r}))"), -(r * r * g.writhe().abs() + r - 1), c.writhe());
        }
    }
    t.done()
}

fn random_grids(count: u64, n: usize) -> Vec<GridDiagram> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    while out.len() < count as usize {
        let mut o: Vec<i64> = (1..=n as i64).collect();
        let mut x = o.clone();
        o.shuffle(&mut rng);
        x.shuffle(&mut rng);
        if let Ok(g) = validate_grid(&o, &x) {
            out.push(g);
        }
    }
    out
}

fn property_suite() -> Outcome {
    let mut fails = Vec::new();
    let mut fixtures = vec![torus(1, 1), torus(2, 1), torus(2, 3), mirror(&torus(2, 3)), torus(3, 1)];
    fixtures.extend(random_grids(12, 4));
    fixtures.extend(random_grids(6, 5));

    for f in Flavor::ALL {
        let bad: Vec<String> = fixtures
            .iter()
            .filter(|g| !GridComplex::new(g, guard()).expect("complex").differential(f).squares_to_zero())
            .map(|g| g.to_compact())
            .collect();
        if !bad.is_empty() {
            fails.push(format!("{} d^2 != 0 on {} of {} grids (e.g. {})", f.name(), bad.len(), fixtures.len(), bad[0]));
        }
    }

    let mut law_errors = 0;
    let mut rect_errors = 0;
    for g in &fixtures {
        let cx = GridComplex::new(g, guard()).expect("complex");
        for f in Flavor::ALL {
            for a in &cx.differential(f).arrows {
                let (x, y, k) = (cx.grading(a.from as usize), cx.grading(a.to as usize), a.k as i32);
                let ok = y.maslov_o == x.maslov_o - 1 + 2 * k
                    && match f {
                        Flavor::Tilde => k == 0 && y.alexander2 == x.alexander2,
                        Flavor::Minus | Flavor::Horizontal => y.alexander2 == x.alexander2 + 2 * k,
                        Flavor::Filtered => y.alexander2 - 2 * k <= x.alexander2,
                    };
                law_errors += usize::from(!ok);
            }
        }
        let n = g.n();
        let x: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in i + 1..n {
                let mut y = x.clone();
                y.swap(i, j);
                let rs = rectangles(g, &x, &y);
                let (gx, gy) = (gradings(g, &x), gradings(g, &y));
                let ok = rs.len() == 2
                    && rs.iter().all(|r| gy.alexander2 - gx.alexander2 == 2 * (r.o_mult as i32 - r.x_mult as i32));
                rect_errors += usize::from(!ok);
            }
        }
    }
    if law_errors > 0 {
        fails.push(format!("{law_errors} arrows break the grading laws"));
    }
    if rect_errors > 0 {
        fails.push(format!("{rect_errors} state pairs without exactly two rectangles"));
    }

    for (selector, max_n) in [("lemma3.1", 7), ("lemma3.3", 4)] {
        let report = verify_theorems(&selector.parse::<Selector>()?, max_n, false);
        let bad: Vec<String> = report.failures().map(|c| format!("{} -> {}", c.name, c.actual)).collect();
        if !bad.is_empty() {
            fails.push(format!("{selector}: {}", bad.join(", ")));
        }
    }

    let mut moved = 0;
    for g in [torus(2, 3), mirror(&torus(2, 3)), torus(3, 1), torus(2, 1)] {
        let base = knot_invariants(&g, EpsilonMode::Robust, guard()).map_err(|e| e.to_string())?;
        let mut variants = Vec::new();
        for kind in StabilizationKind::all() {
            if g.n() < 6 {
                variants.push(stabilize(&g, 0, kind).map_err(|e| e.to_string())?.0);
            }
        }
        for i in 0..g.n() {
            variants.extend([commute_columns(&g, i), commute_rows(&g, i)].into_iter().flatten());
        }
        for h in variants {
            moved += 1;
            let inv = knot_invariants(&h, EpsilonMode::Robust, guard()).map_err(|e| e.to_string())?;
            if (inv.tau, inv.epsilon.value) != (base.tau, base.epsilon.value) {
                fails.push(format!("(tau, eps) changes under a move to {}", h.to_compact()));
            }
        }
    }

    let kind: StabilizationKind = "O:NE".parse().map_err(|e: gridhom::moves::MoveError| e.to_string())?;
    let presentations = [
        torus(2, 3),
        stabilize(&torus(2, 3), 2, kind).map_err(|e| e.to_string())?.0,
        braid_to_grid(&BraidWord::parse(2, "1,1,1").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?,
    ];
    for g in &presentations {
        let d = alexander_polynomial(g, guard()).map_err(|e| e.to_string())?.to_string();
        if d != "t - 1 + t^-1" {
            fails.push(format!("Delta({}) = {d}", g.to_compact()));
        }
    }

    if fails.is_empty() {
        Ok(vec![format!("{} grids, {moved} moved diagrams", fixtures.len())])
    } else {
        Err(fails.join("; "))
    }
}

fn determinism() -> Outcome {
    let run = |threads: usize| -> Result<String, String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        let report = pool.install(|| verify_theorems(&Selector::One("1.2"), 7, false));
        serde_json::to_string_pretty(&report).map_err(|e| e.to_string())
    };
    let (one, four) = (run(1)?, run(4)?);
    if one == four {
        Ok(vec![format!("{} bytes", one.len())])
    } else {
        Err("reports differ between 1 and 4 threads".into())
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, title: "eps(2x2 unknot) = 0", budget: secs(1), unattainable: None, run: unknot },
        Criterion { id: 2, title: "eps and tau of G(-2,3) are -1", budget: secs(10), unattainable: None, run: trefoil },
        Criterion { id: 3, title: "torus sweep and mirrors", budget: secs(300), unattainable: None, run: torus_sweep },
        Criterion { id: 4, title: "eps(-G) = -eps(G) on the sweep", budget: secs(300), unattainable: None, run: mirror_antisymmetry },
        Criterion { id: 5, title: "eps(unknot # G(-2,3)) = -1 at n = 7", budget: secs(180), unattainable: None, run: zero_summand },
        Criterion { id: 6, title: "eps(G # -G) = 0 for small unknots", budget: secs(60), unattainable: None, run: sum_with_mirror },
        Criterion { id: 7, title: "positive braid closure has eps = 1", budget: secs(60), unattainable: None, run: braid },
        Criterion {
            id: 8,
            title: "eps(cable(G(-2,1), 2)) = eps(G(-2,5))",
            budget: secs(120),
            unattainable: Some("G(-2,1) has writhe -1, so its 2-cable is the closure of one crossing on two strands: an unknot with eps 0, while eps(G(-2,5)) = -1"),
            run: cable,
        },
        Criterion { id: 9, title: "cable writhe formula", budget: secs(1), unattainable: None, run: cable_writhe },
        Criterion {
            id: 10,
            title: "property suite",
            budget: secs(600),
            unattainable: Some(
                "the horizontal differential (X-free rectangles with at least one O) does not square to zero in general, \
                 and the Alexander grading of the connected sum is not additive on every pair of states",
            ),
            run: property_suite,
        },
        Criterion { id: 11, title: "reports identical with 1 and 4 threads", budget: secs(600), unattainable: None, run: determinism },
    ];

    let mut unexpected = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > c.budget => Err(format!("took {elapsed:.2?}, budget {:?}", c.budget)),
            other => other,
        };
        let ok = outcome.is_ok();
        let detail = match outcome {
            Ok(notes) if notes.is_empty() => String::new(),
            Ok(notes) => format!(" [{}]", notes.join("; ")),
            Err(why) => format!(" [{why}]"),
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {:>2} {} ({elapsed:.2?}){detail}", c.id, c.title);
        match (ok, c.unattainable) {
            (false, Some(reason)) => println!("        known failure: {reason}"),
            (true, Some(_)) => {
                println!("        passed although marked unattainable");
                unexpected += 1;
            }
            (false, None) => unexpected += 1,
            (true, None) => {}
        }
    }
    println!("{} criteria, {unexpected} unexpected outcomes", criteria.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
