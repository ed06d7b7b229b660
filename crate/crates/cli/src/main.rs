//! `overtile`: command-line driver for the overlapping-substitution
//! pipeline. Exit codes: 0 = all checks pass, 1 = a mathematical check
//! failed, 2 = usage or input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use overtile_core::adjacency::{build_adjacency_graph, check_graph_consistency, to_dot};
use overtile_core::algebra::{certify_algebraic_integer, return_module};
use overtile_core::delone::{
    derive_substitution, radii, voronoi_cells, SpectrumSet, Verdict,
};
use overtile_core::geometry::{
    certify_consistency, fixed_point_seed, generate_tiling, geom_to_json, patch_to_json, realize,
    GeomSubstitution,
};
use overtile_core::gifs::{
    attractor_approx, system_from_json, verify_linear_condition, verify_osc,
};
use overtile_core::num::{parse_rational, Mode, Rational};
use overtile_core::render::{gifs_svg, tiling_svg};
use overtile_core::rules::{
    emit_canonical, iterate_word, parse_rules_with_overrides, parse_word, word_string,
    SymbolicSubstitution,
};
use overtile_core::spectral::{matrix_report, pf_data, substitution_matrix, PFData};
use overtile_core::weighted::{empirical_frequency, VanHoveWindow};

#[derive(Parser)]
#[command(
    name = "overtile",
    about = "overlapping substitution tilings: parse, realize, certify, tile, verify",
    version
)]
struct Cli {
    /// Output directory for artifacts
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RuleInput {
    /// Rule file (.rules)
    rules: PathBuf,
    /// Parameter override, repeatable: --param r=1/2
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Shorthand for --param r=<VALUE>
    #[arg(long, value_name = "VALUE")]
    r: Option<String>,
    /// Shorthand for --param s=<VALUE>
    #[arg(long, value_name = "VALUE")]
    s: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, build adjacency graphs, check graph consistency
    Check {
        #[command(flatten)]
        input: RuleInput,
        /// Write the stabilized adjacency graph as DOT
        #[arg(long)]
        dot: bool,
    },
    /// Substitution matrix, characteristic polynomial, Perron-Frobenius data
    Matrix {
        #[command(flatten)]
        input: RuleInput,
    },
    /// Geometric realization: tile lengths and rule patches
    Realize {
        #[command(flatten)]
        input: RuleInput,
    },
    /// Consistency certificate and (exact mode) algebraic-integer certificate
    Certify {
        #[command(flatten)]
        input: RuleInput,
        /// Tiling window used to collect return vectors
        #[arg(long, default_value = "30")]
        window: String,
    },
    /// Generate a tiling patch around the origin
    Tile {
        #[command(flatten)]
        input: RuleInput,
        /// Half-width of the window [-W, W]
        #[arg(long, default_value = "12")]
        window: String,
        /// Render stacked iteration rows as SVG
        #[arg(long)]
        svg: bool,
        /// Iterate the symbolic rule on this word and print the iterates
        #[arg(long)]
        word: Option<String>,
    },
    /// Empirical letter frequencies over van Hove windows
    Freq {
        #[command(flatten)]
        input: RuleInput,
        /// Comma-separated window lengths, centered at 0
        #[arg(long, default_value = "24,96,384")]
        windows: String,
        /// Boundary margin L of each window
        #[arg(long, default_value = "4")]
        margin: String,
    },
    /// Spectrum point set, Voronoi cells, derived substitution rule
    Delone {
        /// Inflation factor: a rational like 2 or 3/2, a decimal (float
        /// mode), or the name `golden`
        #[arg(long)]
        lambda: String,
        /// Digit bound m (digits 0..=m)
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Window [0, W]
        #[arg(short = 'W', long, default_value = "80")]
        window: String,
        /// Requested collar radius (raised to the theorem bound if smaller)
        #[arg(long, default_value_t = 0.0)]
        l: f64,
        /// Force float arithmetic
        #[arg(long)]
        float: bool,
    },
    /// Verify a graph-directed IFS: open set and linear conditions
    Gifs {
        /// System JSON (vertices, edges with maps, feasible polygons)
        system: PathBuf,
        /// Polyline approximation depth
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Render feasible sets, images and attractor arcs as SVG
        #[arg(long)]
        svg: bool,
        /// Comparison tolerance
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn ensure_out(dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))
}

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<(), String> {
    ensure_out(dir)?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_rules(input: &RuleInput) -> Result<SymbolicSubstitution, String> {
    let text = fs::read_to_string(&input.rules)
        .map_err(|e| format!("cannot read {}: {e}", input.rules.display()))?;
    let mut overrides: Vec<(String, String)> = Vec::new();
    for p in &input.params {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| format!("--param needs NAME=VALUE, got `{p}`"))?;
        overrides.push((name.trim().to_string(), value.trim().to_string()));
    }
    if let Some(v) = &input.r {
        overrides.push(("r".to_string(), v.clone()));
    }
    if let Some(v) = &input.s {
        overrides.push(("s".to_string(), v.clone()));
    }
    let mut sub = parse_rules_with_overrides(&text, &overrides)
        .map_err(|e| format!("{}: {e}", input.rules.display()))?;
    match std::env::var("OVERTILE_MODE").ok().as_deref() {
        Some("float") => sub.mode = Mode::Float,
        Some("exact") => {
            if sub.mode != Mode::Exact {
                return Err(
                    "OVERTILE_MODE=exact requires all weights to be rational literals".into(),
                );
            }
        }
        _ => {}
    }
    Ok(sub)
}

fn parse_rational_arg(text: &str, what: &str) -> Result<Rational, String> {
    parse_rational(text).ok_or_else(|| format!("invalid {what}: `{text}`"))
}

fn pipeline(sub: &SymbolicSubstitution) -> Result<(PFData, GeomSubstitution), String> {
    let m = substitution_matrix(sub);
    let pf = pf_data(&m).map_err(|e| e.to_string())?;
    let g = realize(sub, &pf).map_err(|e| e.to_string())?;
    Ok((pf, g))
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Check { input, dot } => {
            let sub = load_rules(&input)?;
            let graph = build_adjacency_graph(&sub);
            let report = check_graph_consistency(&sub, &graph, 1e-9);
            println!("mode: {}", sub.mode);
            println!(
                "adjacency graph: {} edges, stabilized at k* = {}",
                graph.edges().len(),
                graph.stabilized_at
            );
            for demand in &report.demands {
                let (e, f) = demand.edge;
                println!(
                    "  edge {} -> {}: {}",
                    sub.alphabet.name(e),
                    sub.alphabet.name(f),
                    if demand.pass { "ok" } else { "VIOLATION" }
                );
            }
            if dot {
                write_artifact(
                    &cli.out,
                    "adjacency.dot",
                    &to_dot(&sub, &graph, graph.stabilized_at),
                )?;
            }
            println!("graph consistency: {}", if report.pass() { "PASS" } else { "FAIL" });
            Ok(report.pass())
        }
        Command::Matrix { input } => {
            let sub = load_rules(&input)?;
            let m = substitution_matrix(&sub);
            let pf = pf_data(&m).map_err(|e| e.to_string())?;
            let report = matrix_report(&sub, &m, &pf);
            println!("mode: {}", report.mode);
            for (i, row) in report.matrix.iter().enumerate() {
                println!("  M[{}] = [{}]", report.letters[i], row.join(", "));
            }
            if let Some(cp) = &report.char_poly {
                println!("char poly coefficients (constant first): [{}]", cp.join(", "));
            }
            println!("beta = {}", report.beta_decimal);
            println!("left (tile lengths, l_k = 1): [{}]", report.left.join(", "));
            println!("right (frequencies, sum l_i r_i = 1): [{}]", report.right.join(", "));
            write_artifact(&cli.out, "matrix.json", &report.to_json())?;
            write_artifact(&cli.out, "matrix.csv", &report.to_csv())?;
            Ok(true)
        }
        Command::Realize { input } => {
            let sub = load_rules(&input)?;
            let (_, g) = pipeline(&sub)?;
            println!("mode: {}", g.mode);
            println!("beta = {:.12}", g.beta.to_f64());
            for i in 0..g.kappa() {
                println!("  l_{} = {:.12}", g.labels[i], g.lengths[i].to_f64());
            }
            for (i, rule) in g.rules.iter().enumerate() {
                let tiles: Vec<String> = rule
                    .tiles()
                    .iter()
                    .map(|t| {
                        format!(
                            "[{:.6},{:.6}]{}",
                            t.left.to_f64(),
                            g.right_end(t).to_f64(),
                            g.labels[t.label]
                        )
                    })
                    .collect();
                println!("  rho({}) = {{{}}}", g.labels[i], tiles.join(", "));
            }
            write_artifact(
                &cli.out,
                "realization.json",
                &serde_json::to_string_pretty(&geom_to_json(&g)).unwrap(),
            )?;
            println!("canonical rules:\n{}", emit_canonical(&sub));
            Ok(true)
        }
        Command::Certify { input, window } => {
            let sub = load_rules(&input)?;
            let graph = build_adjacency_graph(&sub);
            let (_, g) = pipeline(&sub)?;
            let cert = certify_consistency(&g, &sub, &graph).map_err(|e| e.to_string())?;
            println!(
                "geometric consistency: {} (k* = {})",
                if cert.pass { "PASS" } else { "FAIL" },
                cert.stabilized_at
            );
            if !cert.pass {
                println!("  stage: {:?}", cert.stage);
                for v in &cert.graph_report.violations {
                    println!(
                        "  junction violation on edge {} -> {}",
                        sub.alphabet.name(v.edge.0),
                        sub.alphabet.name(v.edge.1)
                    );
                }
                return Ok(false);
            }
            if g.mode != Mode::Exact {
                println!("algebraic-integer certificate: skipped (float mode)");
                return Ok(true);
            }
            let w = parse_rational_arg(&window, "window")?;
            let seed = fixed_point_seed(&g, 6).map_err(|e| e.to_string())?;
            let small = generate_tiling(&g, &seed, &w).map_err(|e| e.to_string())?;
            let large = generate_tiling(&g, &seed, &(&w * Rational::from_integer(2.into())))
                .map_err(|e| e.to_string())?;
            let m_small = return_module(&g, &small).map_err(|e| e.to_string())?;
            let m_large = return_module(&g, &large).map_err(|e| e.to_string())?;
            let c_small = certify_algebraic_integer(&g, &m_small).map_err(|e| e.to_string())?;
            let c_large = certify_algebraic_integer(&g, &m_large).map_err(|e| e.to_string())?;
            let stable = c_small.poly == c_large.poly && m_large.contains(&m_small);
            let poly: Vec<String> = c_large.poly.iter().map(|c| c.to_string()).collect();
            println!(
                "algebraic-integer certificate: monic poly (constant first) [{}], exact zero at beta: {}",
                poly.join(", "),
                c_large.verified_zero
            );
            println!(
                "module stability under window doubling: {}",
                if stable { "PASS" } else { "FAIL" }
            );
            write_artifact(
                &cli.out,
                "certificate.json",
                &serde_json::to_string_pretty(&c_large.to_json(&m_large)).unwrap(),
            )?;
            Ok(cert.pass && c_large.verified_zero && stable)
        }
        Command::Tile { input, window, svg, word } => {
            let sub = load_rules(&input)?;
            let (_, g) = pipeline(&sub)?;
            if let Some(word_text) = word {
                let w = parse_word(&sub, &word_text)
                    .ok_or_else(|| format!("word `{word_text}` uses undeclared letters"))?;
                for n in 1..=3 {
                    let iterate = iterate_word(&sub, &w, n, g.eps).map_err(|e| e.to_string())?;
                    println!("sigma^{n}({word_text}) = {}", word_string(&sub, &iterate));
                }
            }
            let wq = parse_rational_arg(&window, "window")?;
            let seed = fixed_point_seed(&g, 6).map_err(|e| e.to_string())?;
            println!(
                "seed: k = {}, letter {}, position {:.12}",
                seed.0,
                g.labels[seed.1.label],
                seed.1.left.to_f64()
            );
            let patch = generate_tiling(&g, &seed, &wq).map_err(|e| e.to_string())?;
            println!("tiling window [-{window}, {window}]: {} tiles", patch.len());
            write_artifact(
                &cli.out,
                "tiling.json",
                &serde_json::to_string_pretty(&patch_to_json(&g, &patch)).unwrap(),
            )?;
            if svg {
                let start = overtile_core::geometry::Patch::single(seed.1.clone());
                let drawing = tiling_svg(&g, &start, 4).map_err(|e| e.to_string())?;
                write_artifact(&cli.out, "tiling.svg", &drawing)?;
            }
            Ok(true)
        }
        Command::Freq { input, windows, margin } => {
            let sub = load_rules(&input)?;
            let m = substitution_matrix(&sub);
            let pf = pf_data(&m).map_err(|e| e.to_string())?;
            let g = realize(&sub, &pf).map_err(|e| e.to_string())?;
            let margin = parse_rational_arg(&margin, "margin")?;
            let mut vh = Vec::new();
            let mut max_w = Rational::from_integer(0.into());
            for part in windows.split(',') {
                let len = parse_rational_arg(part.trim(), "window length")?;
                let half = len / Rational::from_integer(2.into());
                if half > max_w {
                    max_w = half.clone();
                }
                vh.push(VanHoveWindow::new(-half.clone(), half, margin.clone()));
            }
            let seed = fixed_point_seed(&g, 6).map_err(|e| e.to_string())?;
            let patch = generate_tiling(&g, &seed, &(max_w + Rational::from_integer(4.into())))
                .map_err(|e| e.to_string())?;
            let report =
                empirical_frequency(&g, &pf, &patch, &vh).map_err(|e| e.to_string())?;
            for w in &report.windows {
                println!(
                    "window [{:.1}, {:.1}] (|A| = {:.1}, boundary ratio {:.4}):",
                    w.lo, w.hi, w.length, w.boundary_ratio
                );
                for l in &w.letters {
                    println!(
                        "  {}: count {}, density {:.6}, target {:.6}, deviation {:.2e}",
                        l.letter, l.count, l.density, l.target, l.deviation
                    );
                }
            }
            let decreasing = report
                .windows
                .windows(2)
                .all(|pair| pair[1].max_deviation <= pair[0].max_deviation);
            println!(
                "max deviation decreasing across windows: {}",
                if decreasing { "yes" } else { "no" }
            );
            write_artifact(&cli.out, "freq.csv", &report.to_csv())?;
            write_artifact(&cli.out, "freq.json", &report.to_json())?;
            Ok(true)
        }
        Command::Delone { lambda, m, window, l, float } => {
            let w = parse_rational_arg(&window, "window")?;
            let force_float =
                float || matches!(std::env::var("OVERTILE_MODE").ok().as_deref(), Some("float"));
            let x = build_spectrum(&lambda, m, w, force_float)?;
            println!(
                "spectrum: {} points in [0, {window}], mode {}",
                x.len(),
                x.mode
            );
            println!("set equation on the safe interval: {}", x.verify_set_equation());
            write_artifact(&cli.out, "points.csv", &x.to_csv())?;
            if x.len() >= 2 {
                let cells = voronoi_cells(&x);
                println!("voronoi cells: {}", cells.len());
            }
            let bundle = radii(&x, l).map_err(|e| e.to_string())?;
            println!(
                "radii: R0 = {:.4}, R1 = {:.4}, R2 = {:.4}, R3 = {:.4}, R_D = {:.4}, L = {:.4}, R_L = {:.4}",
                bundle.r0, bundle.r1, bundle.r2, bundle.r3, bundle.r_d, bundle.l, bundle.r_l
            );
            let rule = derive_substitution(&x, &bundle).map_err(|e| e.to_string())?;
            println!(
                "collar classes: {} (half window) -> {} (full window)",
                rule.class_count_half, rule.class_count_full
            );
            match rule.verdict {
                Verdict::NoFlc => {
                    println!(
                        "NO-FLC diagnostic: collar classes grow with the window; no finite rule table"
                    );
                    Ok(false)
                }
                Verdict::Pass => {
                    let geom = rule.geom.as_ref().unwrap();
                    println!(
                        "rule table: {} classes, fixed-point identity: {}",
                        geom.kappa(),
                        if rule.fixed_point { "PASS" } else { "FAIL" }
                    );
                    write_artifact(
                        &cli.out,
                        "rule_table.json",
                        &serde_json::to_string_pretty(&geom_to_json(geom)).unwrap(),
                    )?;
                    Ok(rule.fixed_point)
                }
            }
        }
        Command::Gifs { system, depth, svg, eps } => {
            let text = fs::read_to_string(&system)
                .map_err(|e| format!("cannot read {}: {e}", system.display()))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| format!("bad JSON: {e}"))?;
            let (sys, u) = system_from_json(&value).map_err(|e| e.to_string())?;
            if sys.edges.is_empty() {
                return Err(
                    "system has no edges; if this is a boundary-map template, supply the maps"
                        .into(),
                );
            }
            let osc = verify_osc(&sys, &u, eps).map_err(|e| e.to_string())?;
            println!("open set condition: {}", if osc.pass { "PASS" } else { "FAIL" });
            for v in &osc.violations {
                println!(
                    "  vertex {}: {} (edges {} and {}, measure {:.3e})",
                    v.vertex, v.kind, v.edges.0, v.edges.1, v.detail
                );
            }
            let mut pass = osc.pass;
            let mut arcs = None;
            if osc.pass {
                let lin = verify_linear_condition(&sys, &u, eps).map_err(|e| e.to_string())?;
                println!("linear condition: {}", if lin.pass { "PASS" } else { "FAIL" });
                for c in &lin.chains {
                    match (&c.reason, c.junction_diameters.iter().cloned().fold(0.0, f64::max)) {
                        (Some(reason), _) => println!("  vertex {}: {}", c.vertex, reason),
                        (None, d) => println!(
                            "  vertex {}: path of {} pieces, max junction diameter {:.3e}",
                            c.vertex,
                            c.order.len(),
                            d
                        ),
                    }
                }
                pass = lin.pass;
                if lin.pass {
                    let polylines =
                        attractor_approx(&sys, &u, depth, eps).map_err(|e| e.to_string())?;
                    for p in &polylines {
                        println!(
                            "  vertex {}: {} pieces at depth {depth}",
                            p.vertex, p.piece_count
                        );
                    }
                    arcs = Some(polylines);
                }
            }
            if svg {
                let drawing = gifs_svg(&sys, &u, arcs.as_deref());
                write_artifact(&cli.out, "gifs.svg", &drawing)?;
            }
            if let Some(arcs) = &arcs {
                let summary: Vec<_> = arcs
                    .iter()
                    .map(|a| {
                        serde_json::json!({
                            "vertex": a.vertex,
                            "pieces": a.piece_count,
                            "points": a.points.len(),
                        })
                    })
                    .collect();
                write_artifact(
                    &cli.out,
                    "gifs_report.json",
                    &serde_json::to_string_pretty(&serde_json::json!({
                        "osc": osc.pass,
                        "arcs": summary,
                    }))
                    .unwrap(),
                )?;
            }
            Ok(pass)
        }
    }
}

fn build_spectrum(
    lambda: &str,
    m: u32,
    window: Rational,
    force_float: bool,
) -> Result<SpectrumSet, String> {
    use overtile_core::num::{FieldContext, QPoly};
    let eps = 1e-9;
    if lambda == "golden" {
        if force_float {
            let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
            return SpectrumSet::new_float(phi, m, window, eps).map_err(|e| e.to_string());
        }
        let ctx = FieldContext::for_dominant_root(&QPoly::from_ints(&[-1, -1, 1]))
            .map_err(|e| e.to_string())?;
        return SpectrumSet::new_exact(ctx, m, window).map_err(|e| e.to_string());
    }
    if lambda.contains('.') || force_float {
        let v: f64 = if lambda.contains('/') {
            let q = parse_rational(lambda).ok_or_else(|| format!("bad lambda `{lambda}`"))?;
            overtile_core::num::Scalar::from_rational_f64(&q)
        } else {
            lambda
                .parse()
                .map_err(|_| format!("bad lambda `{lambda}`"))?
        };
        return SpectrumSet::new_float(v, m, window, eps).map_err(|e| e.to_string());
    }
    let q = parse_rational(lambda).ok_or_else(|| format!("bad lambda `{lambda}`"))?;
    let ctx = FieldContext::rational_point(q);
    SpectrumSet::new_exact(ctx, m, window).map_err(|e| e.to_string())
}
