//! Command-line entry point. Exit codes: 0 success, 1 verification failure,
//! 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use melonic::graph::ResidueKind;
use melonic::numerics::{self, CutoffParams, SolverOptions};
use melonic::{canon, dyson, enumerate, hopf, schema, topology};

#[derive(Parser)]
#[command(
    name = "melonic",
    version = concat!(env!("CARGO_PKG_VERSION"), " (graph schema 1)"),
    about = "Stranded-graph combinatorics and renormalization numerics for the rank-5 quartic melonic tensor field theory"
)]
struct Cli {
    /// Emit JSON instead of text where both are available.
    #[arg(long, global = true)]
    json: bool,
    /// Force single-threaded execution (outputs are bit-stable either way).
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker thread budget.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResidueArg {
    #[value(name = "2pt")]
    TwoPt,
    #[value(name = "4pt")]
    FourPt,
    #[value(name = "vac")]
    Vacuum,
}

impl From<ResidueArg> for ResidueKind {
    fn from(r: ResidueArg) -> Self {
        match r {
            ResidueArg::TwoPt => ResidueKind::TwoPoint,
            ResidueArg::FourPt => ResidueKind::FourPoint,
            ResidueArg::Vacuum => ResidueKind::Vacuum,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate 1PI superficially divergent classes up to a loop order.
    Enumerate {
        #[arg(long, default_value_t = 2)]
        loops: usize,
        #[arg(long)]
        residue: ResidueArg,
        /// Emit one DOT rendering per class instead of JSON.
        #[arg(long)]
        dot: bool,
    },
    /// Power counting of one graph: degree by both routes and table matching.
    Classify { graph: PathBuf },
    /// Hopf-algebra operations.
    Hopf {
        #[command(subcommand)]
        action: HopfAction,
    },
    /// Dyson-Schwinger and Hochschild-cocycle verification.
    Dse {
        #[command(subcommand)]
        action: DseAction,
    },
    /// One-loop beta function from cutoff scaling.
    Beta {
        #[arg(long, default_value_t = 1.0)]
        m2: f64,
        #[arg(long = "Ns", value_delimiter = ',', default_value = "20,40,80,160")]
        ns: Vec<u32>,
    },
    /// Solve the melonic fixed point at one cutoff.
    Melonic(MelonicArgs),
    /// One-loop flow of the rescaled bare coupling.
    Flow {
        #[arg(long)]
        g: f64,
        #[arg(long, default_value_t = 1.0)]
        m2: f64,
        #[arg(long = "Ns", value_delimiter = ',', default_value = "20,40,80,160")]
        ns: Vec<u32>,
    },
}

#[derive(Args)]
struct MelonicArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    m2: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.2)]
    damping: f64,
}

#[derive(Subcommand)]
enum HopfAction {
    /// Print the coproduct of a graph as tensor terms.
    Coproduct { graph: PathBuf },
    /// Verify coassociativity, counit and antipode identities.
    Verify {
        #[arg(long, default_value_t = 2)]
        loops: usize,
    },
}

#[derive(Subcommand)]
enum DseAction {
    /// Verify the recursion and the cocycle identity, with and without the
    /// two-color-breaking companion sector.
    Verify {
        #[arg(long, default_value_t = 2)]
        loops: usize,
        #[arg(long)]
        show_terms: bool,
    },
}

fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{:.11e}", x)
}

fn poly_json(p: &hopf::GraphPoly) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = p
        .terms()
        .map(|(m, c)| {
            serde_json::json!({
                "coefficient": c.to_string(),
                "factors": m
                    .factors()
                    .iter()
                    .map(|code| serde_json::from_str::<serde_json::Value>(
                        &schema::to_json(&canon::decode(code))
                    ).unwrap())
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::Value::Array(terms)
}

fn tensor_json(t: &hopf::TensorPoly) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = t
        .terms()
        .map(|((l, r), c)| {
            let side = |m: &hopf::Monomial| {
                m.factors()
                    .iter()
                    .map(|code| {
                        serde_json::from_str::<serde_json::Value>(&schema::to_json(&canon::decode(
                            code,
                        )))
                        .unwrap()
                    })
                    .collect::<Vec<_>>()
            };
            serde_json::json!({
                "coefficient": c.to_string(),
                "left": side(l),
                "right": side(r),
            })
        })
        .collect();
    serde_json::Value::Array(terms)
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.cmd {
        Command::Enumerate {
            loops,
            residue,
            dot,
        } => {
            let inv = enumerate::one_pi_divergent_up_to(loops, 4).map_err(|e| e.to_string())?;
            let kind: ResidueKind = residue.into();
            let mut entries = Vec::new();
            for k in 1..=loops {
                for e in inv.classes(k, kind) {
                    entries.push(e.clone());
                }
            }
            if dot {
                for e in &entries {
                    println!("{}", schema::to_dot(&e.graph()));
                }
            } else {
                let items: Vec<serde_json::Value> = entries
                    .iter()
                    .map(|e| {
                        serde_json::json!({
                            "loops": e.loops,
                            "residue": format!("{:?}", e.residue),
                            "omega": e.omega,
                            "melonic": e.melonic,
                            "graph": serde_json::from_str::<serde_json::Value>(
                                &schema::to_json(&e.graph())
                            ).unwrap(),
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "schema": schema::SCHEMA_VERSION,
                        "classes": items,
                    }))
                    .unwrap()
                );
            }
            Ok(true)
        }
        Command::Classify { graph } => {
            let text =
                std::fs::read_to_string(&graph).map_err(|e| format!("{}: {e}", graph.display()))?;
            let g = schema::from_json(&text).map_err(|e| e.to_string())?;
            let report = topology::classify(&g).map_err(|e| e.to_string())?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!("E\tsum_g_boundary\tC_boundary-1\tsum_g_pinched\tomega\tmelonic\tdivergent\ttable_row");
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    report.e,
                    report.sum_boundary_genera,
                    report.c_boundary as i64 - 1,
                    report.sum_pinched_genera,
                    report.omega,
                    report.melonic,
                    report.divergent,
                    report
                        .table1_row
                        .map(|r| (r + 1).to_string())
                        .unwrap_or_else(|| "-".into()),
                );
            }
            Ok(true)
        }
        Command::Hopf { action } => match action {
            HopfAction::Coproduct { graph } => {
                let text = std::fs::read_to_string(&graph)
                    .map_err(|e| format!("{}: {e}", graph.display()))?;
                let g = schema::from_json(&text).map_err(|e| e.to_string())?;
                let delta = hopf::coproduct(&hopf::GraphPoly::from_graph(&g));
                println!(
                    "{}",
                    serde_json::to_string_pretty(&tensor_json(&delta)).unwrap()
                );
                Ok(true)
            }
            HopfAction::Verify { loops } => {
                let inv = enumerate::one_pi_divergent_up_to(loops, 4).map_err(|e| e.to_string())?;
                let mut ok = true;
                let mut checked = 0usize;
                let codes: Vec<_> = inv
                    .iter()
                    .filter(|e| e.residue.kind() != ResidueKind::Vacuum)
                    .map(|e| e.code.clone())
                    .collect();
                for code in &codes {
                    let x = hopf::GraphPoly::from_code(code.clone());
                    ok &= hopf_axioms_hold(&x);
                    checked += 1;
                }
                // deterministic sample of pair products
                let mut state = 0x2545f4914f6cdd1du64;
                for _ in 0..30.min(codes.len()) {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    let a = &codes[(state as usize) % codes.len()];
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    let b = &codes[(state as usize) % codes.len()];
                    let x = hopf::GraphPoly::from_code(a.clone())
                        .mul(&hopf::GraphPoly::from_code(b.clone()));
                    ok &= hopf_axioms_hold(&x);
                    checked += 1;
                }
                for k in 1..=loops {
                    for kind in [ResidueKind::TwoPoint, ResidueKind::FourPoint] {
                        let rep = hopf::check_subalgebra(&inv, k, kind);
                        println!(
                            "subalgebra loops={} {:?}: {}",
                            k,
                            kind,
                            if rep.ok {
                                "closed"
                            } else {
                                "open (residual terms reported)"
                            }
                        );
                    }
                }
                println!(
                    "axioms on {checked} elements: {}",
                    if ok { "PASS" } else { "FAIL" }
                );
                Ok(ok)
            }
        },
        Command::Dse { action } => match action {
            DseAction::Verify { loops, show_terms } => {
                if !(1..=2).contains(&loops) {
                    return Err("dse verify supports --loops 1 or 2".into());
                }
                let inv = enumerate::one_pi_divergent_up_to(loops, 4).map_err(|e| e.to_string())?;
                let mut ok = true;
                for k in 1..=loops {
                    for kind in [ResidueKind::TwoPoint, ResidueKind::FourPoint] {
                        let dse =
                            dyson::check_dse(&inv, k, kind, true).map_err(|e| e.to_string())?;
                        let coc =
                            dyson::check_cocycle(&inv, k, kind, true).map_err(|e| e.to_string())?;
                        println!(
                            "recursion loops={} {:?}: {}",
                            k,
                            kind,
                            if dse.holds { "PASS" } else { "FAIL" }
                        );
                        println!(
                            "cocycle   loops={} {:?}: {}",
                            k,
                            kind,
                            if coc.holds { "PASS" } else { "FAIL" }
                        );
                        ok &= dse.holds && coc.holds;
                        if k == 2 {
                            let without = dyson::check_dse(&inv, k, kind, false)
                                .map_err(|e| e.to_string())?;
                            println!(
                                "recursion loops={} {:?} without companion sector: {}",
                                k,
                                kind,
                                if without.holds {
                                    "unexpectedly holds"
                                } else {
                                    "fails as expected"
                                }
                            );
                            ok &= !without.holds;
                        }
                        if show_terms {
                            println!(
                                "{}",
                                serde_json::to_string_pretty(&poly_json(&dse.produced)).unwrap()
                            );
                        }
                    }
                }
                Ok(ok)
            }
        },
        Command::Beta { m2, ns } => {
            let fit = numerics::beta_one_loop(m2, &ns).map_err(|e| e.to_string())?;
            println!("N\tS\tfirst_order_datum\tbeta2");
            for (n, s, p) in &fit.rows {
                println!("{n}\t{}\t{}\t{}", sig12(*s), sig12(*p), sig12(fit.beta2));
            }
            println!(
                "# fitted beta2 = {}  finite = {}  rms residual = {}",
                sig12(fit.beta2),
                sig12(fit.finite),
                sig12(fit.fit_residual)
            );
            Ok(true)
        }
        Command::Melonic(args) => {
            let state = numerics::solve_melonic(
                CutoffParams::new(args.n, args.g, args.m2),
                SolverOptions {
                    tol: args.tol,
                    max_iter: args.max_iter,
                    damping: args.damping,
                },
            )
            .map_err(|e| e.to_string())?;
            let ren = numerics::renormalize(&state).map_err(|e| e.to_string())?;
            let round = |x: f64| -> f64 { sig12(x).parse().unwrap() };
            let out = serde_json::json!({
                "schema": schema::SCHEMA_VERSION,
                "n": args.n,
                "g_b": args.g,
                "m_b2": args.m2,
                "z_bare": 1.0,
                "iterations": state.iterations,
                "residual": round(state.residual),
                "gamma2": state.gamma2.iter().map(|&x| round(x)).collect::<Vec<_>>(),
                "transverse_sums": state.t_sums.iter().map(|&x| round(x)).collect::<Vec<_>>(),
                "renormalized": {
                    "m_r2": round(ren.m_r2),
                    "z": round(ren.z),
                    "g_r": round(ren.g_r),
                    "gamma4_00": round(ren.gamma4_00),
                },
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(true)
        }
        Command::Flow { g, m2, ns } => {
            let traj = numerics::flow(g, m2, &ns).map_err(|e| e.to_string())?;
            println!("N\trescaled_bare_coupling");
            for (n, v) in traj {
                println!("{n}\t{}", sig12(v));
            }
            Ok(true)
        }
    }
}

fn hopf_axioms_hold(x: &hopf::GraphPoly) -> bool {
    use hopf::{coproduct, GraphPoly};
    // counit axioms
    let d = coproduct(x);
    let mut left = GraphPoly::zero();
    let mut right = GraphPoly::zero();
    for ((l, r), c) in d.terms() {
        if l.is_unit() {
            right.add_term(r.clone(), c.clone());
        }
        if r.is_unit() {
            left.add_term(l.clone(), c.clone());
        }
    }
    if left != *x || right != *x {
        return false;
    }
    // coassociativity via a three-slot expansion
    let mut lhs: Vec<(
        (hopf::Monomial, hopf::Monomial, hopf::Monomial),
        melonic::Rat,
    )> = Vec::new();
    let mut rhs = lhs.clone();
    for ((l, r), c) in d.terms() {
        for ((a, b), k) in coproduct(&GraphPoly::from_monomial(l.clone())).terms() {
            lhs.push(((a.clone(), b.clone(), r.clone()), c * k));
        }
        for ((a, b), k) in coproduct(&GraphPoly::from_monomial(r.clone())).terms() {
            rhs.push(((l.clone(), a.clone(), b.clone()), c * k));
        }
    }
    let fold = |v: Vec<(
        (hopf::Monomial, hopf::Monomial, hopf::Monomial),
        melonic::Rat,
    )>| {
        let mut m = std::collections::BTreeMap::new();
        for (k, c) in v {
            let e = m
                .entry(k)
                .or_insert_with(|| melonic::Rat::from_integer(0.into()));
            *e += c;
        }
        m.retain(|_, c| !num_traits::Zero::is_zero(c));
        m
    };
    if fold(lhs) != fold(rhs) {
        return false;
    }
    // antipode identity m(S ⊗ id)Δ = η ε
    let mut acc = GraphPoly::zero();
    for ((l, r), c) in d.terms() {
        let s = hopf::antipode(&GraphPoly::from_monomial(l.clone()));
        acc = acc.add(&s.mul(&GraphPoly::from_monomial(r.clone())).scale(c));
    }
    acc == GraphPoly::one().scale(&hopf::counit(x))
}

fn main() -> ExitCode {
    // die quietly when a pipe closes early (e.g. piping into `head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let threads = if cli.deterministic {
        Some(1)
    } else {
        cli.threads
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
