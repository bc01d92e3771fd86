//! `gridhom`: build grid diagrams, compute τ and ε, apply grid moves and run
//! the verification suite.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gridhom::complex::{gradings, GridComplex};
use gridhom::constructions::{
    braid_to_grid, cable_grid, connected_sum, disjoint_union, mirror_reverse, torus_grid, BraidWord,
};
use gridhom::grid_model::{parse_grid_any, Corner};
use gridhom::homology::{bigraded_homology, half, homology_of};
use gridhom::invariants::{
    canonical_o_plus, canonical_x_plus, knot_invariants, verify_theorems, EpsilonMode, Selector, VerifyReport,
};
use gridhom::moves::{apply_script, MoveRecord};
use gridhom::oracle::alexander_polynomial;
use gridhom::{Flavor, GridDiagram, Guard};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "gridhom", version, about = "Grid homology and the concordance invariants tau and epsilon")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Largest grid index computed without --allow-large.
    #[arg(long = "max-n", global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(2..))]
    max_n: u64,
    /// Compute diagrams above --max-n anyway.
    #[arg(long, global = true)]
    allow_large: bool,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "GRIDHOM_THREADS", default_value_t = 0)]
    threads: usize,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl RunConfig {
    fn guard(&self) -> Guard {
        Guard { max_index: self.max_n as usize, allow_large: self.allow_large }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Build a grid diagram.
    #[command(subcommand)]
    New(NewKind),
    /// Describe a diagram: size, components, writhe, corners, canonical states.
    Info {
        /// Grid file (JSON or compact text); stdin when omitted.
        grid: Option<PathBuf>,
        /// Also report the homology of this flavor.
        #[arg(long, value_parser = ["tilde", "minus"])]
        homology: Option<String>,
    },
    /// Compute τ, ε, the Alexander polynomial and a homology summary of a knot.
    Invariants {
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = EpsilonMode::Robust)]
        mode: EpsilonMode,
        /// Include wall-clock timings (makes the report run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Apply a script of grid moves.
    Move {
        grid: Option<PathBuf>,
        /// JSON array of moves, e.g. [{"move":"stabilize","column":1,"kind":"X:SW"}].
        #[arg(long)]
        script: Option<PathBuf>,
        /// One move as a JSON object, applied after the script; repeatable.
        #[arg(long = "step")]
        steps: Vec<String>,
    },
    /// Run the verification checks on diagrams of index at most --max-n.
    Verify {
        /// One of 1.1a 1.1b 1.1c 1.1d 1.2 1.3 1.5 lemma3.1 lemma3.3, or all.
        #[arg(default_value = "all")]
        selector: String,
        /// Include per-check timings (makes the report run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Time the pipeline on random knot diagrams.
    Bench {
        #[arg(long, default_value_t = 3)]
        from: usize,
        #[arg(long, default_value_t = 7)]
        to: usize,
        #[arg(long, default_value_t = 3)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum NewKind {
    /// The negative (p, q) torus knot.
    Torus {
        #[arg(short)]
        p: usize,
        #[arg(short)]
        q: usize,
    },
    /// An unknot of grid index n.
    Unknot {
        #[arg(short, default_value_t = 2)]
        n: usize,
    },
    /// The r-strand cable of a knot diagram.
    Cable {
        #[arg(short)]
        r: usize,
        /// Corner type of the O-block receiving the twist.
        #[arg(long)]
        corner: Option<Corner>,
        grid: Option<PathBuf>,
    },
    /// Connected sum of two knot diagrams.
    Connect { first: PathBuf, second: PathBuf },
    /// Closure of a braid word, e.g. -k 3 -w 1,2,-1.
    Braid {
        #[arg(short)]
        k: usize,
        #[arg(short, allow_hyphen_values = true)]
        w: String,
    },
    /// Mirror image with reversed orientation.
    Mirror { grid: Option<PathBuf> },
    /// Disjoint union of two diagrams.
    Union { first: PathBuf, second: PathBuf },
}

fn read_grid(path: Option<&Path>) -> Result<GridDiagram> {
    let text = match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading stdin")?;
            s
        }
    };
    parse_grid_any(&text).context("parsing grid")
}

fn grid_output(g: &GridDiagram, format: Format) -> Output {
    match format {
        Format::Json => Output::Json(serde_json::to_value(g).expect("grid serializes")),
        Format::Text => Output::Text(g.to_compact()),
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn cmd_new(kind: &NewKind, format: Format) -> Result<Output> {
    let g = match kind {
        NewKind::Torus { p, q } => torus_grid(*p, *q)?,
        NewKind::Unknot { n } => {
            if *n < 2 {
                bail!("grid index {n} is below the minimum of 2");
            }
            torus_grid(n - 1, 1)?
        }
        NewKind::Cable { r, corner, grid } => cable_grid(&read_grid(grid.as_deref())?, *r, *corner)?,
        NewKind::Connect { first, second } => connected_sum(&read_grid(Some(first))?, &read_grid(Some(second))?)?,
        NewKind::Braid { k, w } => braid_to_grid(&BraidWord::parse(*k, w)?)?,
        NewKind::Mirror { grid } => mirror_reverse(&read_grid(grid.as_deref())?).0,
        NewKind::Union { first, second } => disjoint_union(&read_grid(Some(first))?, &read_grid(Some(second))?),
    };
    Ok(grid_output(&g, format))
}

fn state_summary(g: &GridDiagram, state: &[usize]) -> Value {
    let gr = gradings(g, state);
    json!({
        "state": state.iter().map(|v| v + 1).collect::<Vec<_>>(),
        "maslov": gr.maslov_o,
        "alexander": half(gr.alexander2),
    })
}

fn cmd_info(g: &GridDiagram, homology: Option<&str>, cfg: &RunConfig) -> Result<Output> {
    let n = g.n();
    let states = (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k));
    let corners: serde_json::Map<String, Value> =
        g.corner_census().entries().into_iter().map(|(k, v)| (k, json!(v))).collect();
    let mut report = json!({
        "n": n,
        "components": g.component_count(),
        "knot": g.is_knot(),
        "writhe": g.writhe(),
        "compact": g.to_compact(),
        "states": states,
        "corners": corners,
        "x_plus": state_summary(g, &canonical_x_plus(g)),
        "o_plus": state_summary(g, &canonical_o_plus(g)),
    });
    if g.is_knot() && cfg.guard().check(n).is_ok() {
        report["alexander_polynomial"] = json!(alexander_polynomial(g, cfg.guard())?.to_string());
    }
    if let Some(flavor) = homology {
        let flavor: Flavor = flavor.parse().map_err(anyhow::Error::msg)?;
        let (_, h) = homology_of(g, flavor, cfg.guard())?;
        report["homology"] = h.report();
    }
    Ok(match cfg.format {
        Format::Json => Output::Json(report),
        Format::Text => Output::Text(text_table(&report)),
    })
}

fn text_table(report: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = report {
        for (k, v) in map {
            match v {
                Value::String(t) => writeln!(out, "{k}: {t}"),
                _ => writeln!(out, "{k}: {v}"),
            }
            .expect("writing to a string");
        }
    }
    out.trim_end().to_string()
}

fn cmd_invariants(g: &GridDiagram, mode: EpsilonMode, timings: bool, cfg: &RunConfig) -> Result<Output> {
    let guard = cfg.guard();
    guard.check(g.n())?;
    let start = Instant::now();
    let inv = knot_invariants(g, mode, guard)?;
    let invariants_ms = start.elapsed().as_millis();
    let start = Instant::now();
    let cx = GridComplex::new(g, guard)?;
    let h = bigraded_homology(&cx, &cx.differential(Flavor::Minus))?;
    let (top, _) = h.max_nontorsion_alexander()?;
    let delta = alexander_polynomial(g, guard)?;
    let homology_ms = start.elapsed().as_millis();
    let mut report = json!({
        "n": g.n(),
        "tau": inv.tau,
        "epsilon": inv.epsilon.value,
        "mode": inv.epsilon.mode,
        "diagnostics": inv.epsilon.diagnostics,
        "alexander_polynomial": delta.to_string(),
        "homology": {
            "flavor": "minus",
            "free_rank": h.free_rank(),
            "top_alexander": half(top),
            "top_multiplicity": h.top_free_multiplicity(),
            "torsion_summands": h.torsion.len(),
        },
    });
    if timings {
        report["timings_ms"] =
            json!({"invariants": invariants_ms as u64, "homology_and_alexander": homology_ms as u64});
    }
    Ok(match cfg.format {
        Format::Json => Output::Json(report),
        Format::Text => Output::Text(format!(
            "tau: {}\nepsilon: {} ({}, {})\nalexander: {}",
            inv.tau,
            inv.epsilon.value,
            inv.epsilon.mode,
            serde_json::to_value(inv.epsilon.diagnostics.fired)?.as_str().unwrap_or_default(),
            delta
        )),
    })
}

fn cmd_move(g: &GridDiagram, script: Option<&Path>, steps: &[String], format: Format) -> Result<Output> {
    let mut moves: Vec<MoveRecord> = match script {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .context("parsing move script")?,
        None => Vec::new(),
    };
    for s in steps {
        moves.push(serde_json::from_str(s).with_context(|| format!("parsing move {s}"))?);
    }
    Ok(grid_output(&apply_script(g, &moves)?, format))
}

fn verify_text(r: &VerifyReport) -> String {
    let mut out = String::new();
    for c in &r.checks {
        let status = serde_json::to_value(c.status).expect("status");
        let _ = writeln!(
            out,
            "{:<7} [{}] {} (n={}): expected {}, got {}",
            status.as_str().unwrap_or_default().to_uppercase(),
            c.group,
            c.name,
            c.grid_index,
            c.expected,
            c.actual
        );
    }
    let _ = write!(out, "{}: {}", r.selector, if r.passed { "all checks pass" } else { "some checks fail" });
    out
}

fn random_knot(n: usize, rng: &mut ChaCha8Rng) -> GridDiagram {
    loop {
        let mut o: Vec<usize> = (0..n).collect();
        let mut x = o.clone();
        o.shuffle(rng);
        x.shuffle(rng);
        if let Ok(g) = GridDiagram::from_zero_based(o, x) {
            if g.is_knot() {
                return g;
            }
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn cmd_bench(from: usize, to: usize, samples: usize, seed: u64, cfg: &RunConfig) -> Result<Output> {
    if from < 2 || from > to || samples == 0 {
        bail!("need 2 <= from <= to and at least one sample");
    }
    cfg.guard().check(to)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for n in from..=to {
        let (mut build, mut hom, mut eps) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..samples {
            let g = random_knot(n, &mut rng);
            let t = Instant::now();
            let cx = GridComplex::new(&g, cfg.guard())?;
            let d = cx.differential(Flavor::Minus);
            build.push(t.elapsed().as_secs_f64() * 1e3);
            let t = Instant::now();
            bigraded_homology(&cx, &d)?;
            hom.push(t.elapsed().as_secs_f64() * 1e3);
            let t = Instant::now();
            knot_invariants(&g, EpsilonMode::Robust, cfg.guard())?;
            eps.push(t.elapsed().as_secs_f64() * 1e3);
        }
        rows.push(json!({
            "n": n,
            "complex_ms": median(build),
            "homology_ms": median(hom),
            "invariants_ms": median(eps),
        }));
    }
    let report = json!({"seed": seed, "samples": samples, "threads": rayon::current_num_threads(), "rows": rows});
    Ok(match cfg.format {
        Format::Json => Output::Json(report),
        Format::Text => {
            let mut out = String::from(" n   complex_ms  homology_ms  invariants_ms");
            for r in &rows {
                let _ = write!(
                    out,
                    "\n{:>2} {:>12.2} {:>12.2} {:>14.2}",
                    r["n"],
                    r["complex_ms"].as_f64().unwrap_or(0.0),
                    r["homology_ms"].as_f64().unwrap_or(0.0),
                    r["invariants_ms"].as_f64().unwrap_or(0.0)
                );
            }
            Output::Text(out)
        }
    })
}

fn emit(out: Output, cfg: &RunConfig) -> Result<()> {
    let mut text = match out {
        Output::Json(v) => serde_json::to_string_pretty(&v)?,
        Output::Text(t) => t,
    };
    text.push('\n');
    match &cfg.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let cfg = &cli.config;
    rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global().context("starting thread pool")?;
    let out = match &cli.command {
        Command::New(kind) => cmd_new(kind, cfg.format)?,
        Command::Info { grid, homology } => cmd_info(&read_grid(grid.as_deref())?, homology.as_deref(), cfg)?,
        Command::Invariants { grid, mode, timings } => {
            cmd_invariants(&read_grid(grid.as_deref())?, *mode, *timings, cfg)?
        }
        Command::Move { grid, script, steps } => {
            cmd_move(&read_grid(grid.as_deref())?, script.as_deref(), steps, cfg.format)?
        }
        Command::Verify { selector, timings } => {
            let selector: Selector = selector.parse().map_err(anyhow::Error::msg)?;
            let report = verify_theorems(&selector, cfg.max_n as usize, *timings);
            let passed = report.passed;
            let out = match cfg.format {
                Format::Json => Output::Json(serde_json::to_value(&report)?),
                Format::Text => Output::Text(verify_text(&report)),
            };
            emit(out, cfg)?;
            return Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Bench { from, to, samples, seed } => cmd_bench(*from, *to, *samples, *seed, cfg)?,
    };
    emit(out, cfg)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
