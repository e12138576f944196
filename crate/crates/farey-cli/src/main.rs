use clap::{Args, Parser, Subcommand};
use farey_cli::{parse_point, parse_rat, sample_points, sig12, write_atomic, DEFAULT_SEED};
use farey_core::density::{self, DensityValue};
use farey_core::farey::{self, Interval, SubsetSelector};
use farey_core::geometry::PointLocation;
use farey_core::pairs::{self, EmpiricalSummary};
use farey_core::tess::{self, tables};
use farey_core::rat;
use num::ToPrimitive;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "farey",
    about = "Even-denominator Farey fractions: enumeration, pair statistics, \
             the limiting local pair density, and exact table verification"
)]
struct Cli {
    /// Worker threads for grid and verification commands
    /// (default: machine parallelism; env fallback FAREY_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (default: stdout). Written atomically.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate the Farey fractions of order Q as CSV (columns a,q).
    Enumerate {
        #[arg(long)]
        q: u64,
        /// Denominator subset: all, odd, or even.
        #[arg(long, default_value = "all")]
        subset: String,
        /// Restrict to an interval "a/b,c/d" (default: 0/1,1/1).
        #[arg(long)]
        interval: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Consecutive even-denominator pairs with types as CSV.
    Pairs {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        interval: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Type histogram of consecutive even-denominator pairs as JSON.
    Types {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        interval: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Empirical small-sum fraction vs the exact limit 1/6.
    Corollary2 {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        interval: Option<String>,
    },
    /// Evaluate the limiting density g or emit a grid of its values.
    Density {
        #[command(subcommand)]
        mode: DensityCmd,
    },
    /// Admissible level-r cells and their scaled contribution regions, as JSON.
    Regions {
        #[arg(long)]
        level: usize,
        /// Largest tuple entry to enumerate.
        #[arg(long, default_value_t = 41)]
        max_param: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-derive the published cell/weight tables and checksums; optionally
    /// cross-check the two density routes and interval statistics.
    Verify {
        /// Largest table parameter (row families are checked to level 20).
        #[arg(long, default_value_t = 41)]
        max_param: u64,
        /// Also verify g_closed = g_sum at sampled points.
        #[arg(long)]
        cross_check_density: bool,
        /// Number of sampled points for the density cross-check.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Seed for the sampled points.
        #[arg(long)]
        seed: Option<u64>,
        /// With --q: compare interval statistics against full-interval ones.
        #[arg(long)]
        interval: Option<String>,
        #[arg(long)]
        q: Option<u64>,
    },
}

#[derive(Subcommand)]
enum DensityCmd {
    /// Exact value and termwise breakdown at one point.
    Eval {
        /// The point "u,v"; coordinates as "p/q" or decimals.
        #[arg(long)]
        point: String,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// CSV grid (u,v,g) over the n×n lattice i/(n−1), j/(n−1).
    Grid {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

enum CliError {
    Usage(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe (head, less, …) closes early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("FAREY_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli.cmd) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("I/O error: {e}");
            ExitCode::from(3)
        }
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn parse_subset(s: &str) -> Result<SubsetSelector, CliError> {
    match s {
        "all" => Ok(SubsetSelector::All),
        "odd" => Ok(SubsetSelector::OddDen),
        "even" => Ok(SubsetSelector::EvenDen),
        _ => Err(CliError::Usage(format!(
            "subset must be all, odd, or even (got {s:?})"
        ))),
    }
}

fn parse_interval(s: &Option<String>) -> Result<Interval, CliError> {
    let Some(s) = s else {
        return Ok(Interval::unit());
    };
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("interval must be \"a/b,c/d\", got {s:?}")))?;
    let lo = parse_rat(lo).map_err(CliError::Usage)?;
    let hi = parse_rat(hi).map_err(CliError::Usage)?;
    Interval::new(lo, hi).map_err(|e| CliError::Usage(e.to_string()))
}

fn location_str(loc: &PointLocation) -> &'static str {
    match loc {
        PointLocation::Interior => "interior",
        PointLocation::OnEdge(_) => "edge",
        PointLocation::AtVertex(_) => "vertex",
        PointLocation::Outside => "outside",
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, CliError> {
    match cmd {
        Cmd::Enumerate {
            q,
            subset,
            interval,
            output,
        } => {
            if q < 1 {
                return Err(CliError::Usage("--q must be at least 1".into()));
            }
            let subset = parse_subset(&subset)?;
            let interval = parse_interval(&interval)?;
            let mut buf = String::from("a,q\n");
            for f in farey::enumerate(q, subset, &interval) {
                buf.push_str(&format!("{},{}\n", f.num(), f.den()));
            }
            emit(&output.out, buf.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Pairs {
            q,
            interval,
            output,
        } => {
            if q < 2 {
                return Err(CliError::Usage("--q must be at least 2".into()));
            }
            let interval = parse_interval(&interval)?;
            let pairs = pairs::even_pairs(q, &interval).unwrap_or_default();
            let mut buf = String::from("Q,q_prev,q_next,r,a_prev,a_next\n");
            for p in &pairs {
                buf.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.q, p.q_prev, p.q_next, p.r, p.a_prev, p.a_next
                ));
            }
            emit(&output.out, buf.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Types {
            q,
            interval,
            output,
        } => {
            if q < 2 {
                return Err(CliError::Usage("--q must be at least 2".into()));
            }
            let interval = parse_interval(&interval)?;
            let pairs = pairs::even_pairs(q, &interval)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let summary = EmpiricalSummary::from_pairs(&pairs)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let hist =
                pairs::type_histogram(&pairs).map_err(|e| CliError::Usage(e.to_string()))?;
            let per_type: serde_json::Map<String, serde_json::Value> = summary
                .per_type
                .iter()
                .map(|(r, c)| (r.to_string(), serde_json::json!(c)))
                .collect();
            let shares: serde_json::Map<String, serde_json::Value> = hist
                .iter()
                .map(|(r, share)| {
                    (
                        r.to_string(),
                        serde_json::json!({
                            "exact": share.to_string(),
                            "decimal": share.to_f64().unwrap_or(f64::NAN),
                        }),
                    )
                })
                .collect();
            let doc = serde_json::json!({
                "q": q,
                "total_pairs": summary.total_pairs,
                "small_sum_count": summary.small_sum_count,
                "per_type": per_type,
                "shares": shares,
            });
            let mut bytes = serde_json::to_vec_pretty(&doc).expect("JSON");
            bytes.push(b'\n');
            emit(&output.out, &bytes)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Corollary2 { q, interval } => {
            if q < 2 {
                return Err(CliError::Usage("--q must be at least 2".into()));
            }
            let interval = parse_interval(&interval)?;
            let pairs = pairs::even_pairs(q, &interval)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let frac = pairs::small_sum_probability(&pairs, q)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let f = frac.to_f64().unwrap_or(f64::NAN);
            let target = 1.0 / 6.0;
            println!("pairs: {}", pairs.len());
            println!("small_sum_fraction: {} ≈ {}", frac, sig12(f));
            println!("target: 1/6 ≈ {}", sig12(target));
            println!("abs_gap: {}", sig12((f - target).abs()));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Density { mode } => run_density(mode),
        Cmd::Regions {
            level,
            max_param,
            output,
        } => {
            if level < 1 {
                return Err(CliError::Usage("--level must be at least 1".into()));
            }
            let cells = tess::admissible_cells(level, None, max_param);
            let items: Vec<serde_json::Value> = cells
                .iter()
                .map(|c| {
                    let verts: Vec<String> = c
                        .polygon
                        .vertices()
                        .iter()
                        .map(|p| format!("{},{}", p.x, p.y))
                        .collect();
                    let region: Vec<String> = tess::u_region(&c.tuple)
                        .map(|poly| {
                            poly.vertices()
                                .iter()
                                .map(|p| format!("{},{}", p.x, p.y))
                                .collect()
                        })
                        .unwrap_or_default();
                    serde_json::json!({
                        "tuple": c.tuple.ks(),
                        "vertices": verts,
                        "u_region": region,
                    })
                })
                .collect();
            let mut bytes =
                serde_json::to_vec_pretty(&serde_json::Value::Array(items)).expect("JSON");
            bytes.push(b'\n');
            emit(&output.out, &bytes)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify {
            max_param,
            cross_check_density,
            points,
            seed,
            interval,
            q,
        } => run_verify(
            max_param,
            cross_check_density,
            points,
            seed.unwrap_or(DEFAULT_SEED),
            interval,
            q,
        ),
    }
}

fn run_density(mode: DensityCmd) -> Result<ExitCode, CliError> {
    match mode {
        DensityCmd::Eval { point, format } => {
            let (u, v) = parse_point(&point).map_err(CliError::Usage)?;
            let value = density::g_closed(&u, &v).map_err(|e| CliError::Usage(e.to_string()))?;
            let (_, breakdown) = density::g_sum_breakdown(&u, &v, None)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            match format.as_str() {
                "json" => {
                    let terms: Vec<serde_json::Value> = breakdown
                        .terms
                        .iter()
                        .map(|t| {
                            serde_json::json!({
                                "tuple": t.tuple.ks(),
                                "location": location_str(&t.location),
                                "contribution": t.contribution.to_string(),
                            })
                        })
                        .collect();
                    let doc = serde_json::json!({
                        "point": [u.to_string(), v.to_string()],
                        "total": value.to_string(),
                        "total_decimal": value.to_f64(),
                        "terms": terms,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("JSON"));
                }
                "text" => {
                    match &value {
                        DensityValue::Finite(r) => println!(
                            "g({u}, {v}) = {r} ≈ {}",
                            sig12(r.to_f64().unwrap_or(f64::NAN))
                        ),
                        DensityValue::Infinite => println!("g({u}, {v}) = inf"),
                    }
                    let g = &breakdown.groups;
                    println!(
                        "groups: h1u={} h2u={} h3u={} hu={} gu={} gdu={}",
                        g.h1u, g.h2u, g.h3u, g.hu, g.gu, g.gdu
                    );
                    if !breakdown.terms.is_empty() {
                        println!("terms:");
                        for t in &breakdown.terms {
                            println!(
                                "  {} {} {}",
                                t.tuple,
                                location_str(&t.location),
                                t.contribution
                            );
                        }
                    }
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "format must be text or json (got {other:?})"
                    )))
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        DensityCmd::Grid { n, output } => {
            if n < 2 {
                return Err(CliError::Usage("--n must be at least 2".into()));
            }
            use rayon::prelude::*;
            let d = (n - 1) as i64;
            let rows: Vec<String> = (0..n as i64)
                .into_par_iter()
                .map(|i| {
                    let u = rat(i, d);
                    let uf = sig12(u.to_f64().unwrap());
                    let mut row = String::new();
                    for j in 0..=d {
                        let v = rat(j, d);
                        let g = density::g_closed_f64(&u, &v).expect("grid point in domain");
                        row.push_str(&format!("{},{},{}\n", uf, sig12(v.to_f64().unwrap()), sig12(g)));
                    }
                    row
                })
                .collect();
            let mut buf = String::from("u,v,g\n");
            for r in rows {
                buf.push_str(&r);
            }
            emit(&output.out, buf.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_verify(
    max_param: u64,
    cross_check_density: bool,
    points: usize,
    seed: u64,
    interval: Option<String>,
    q: Option<u64>,
) -> Result<ExitCode, CliError> {
    if max_param < 5 {
        return Err(CliError::Usage("--max-param must be at least 5".into()));
    }
    let mut failures = 0usize;
    let mut check = |name: String, ok: bool| {
        if ok {
            println!("PASS {name}");
        } else {
            println!("FAIL {name}");
            failures += 1;
        }
    };

    // Cell vertex lists and vertex weights against the golden tables.
    for tuple in tables::covered_tuples(max_param, 20) {
        let polygon = tess::cell(&tuple);
        let expected = tables::cell_vertices(&tuple).expect("covered tuple has a table row");
        let mut got = polygon.vertices().to_vec();
        let mut want = expected.clone();
        got.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
        want.sort_by(|a, b| (&a.x, &a.y).cmp(&(&b.x, &b.y)));
        check(format!("cell {tuple}"), got == want);

        let alphas = tables::vertex_alphas(&tuple).expect("covered tuple has weights");
        let cell = tess::Cell {
            tuple: tuple.clone(),
            polygon: polygon.clone(),
        };
        let mut ok = expected.len() == alphas.len();
        for (p, alpha) in expected.iter().zip(&alphas) {
            let idx = polygon.vertices().iter().position(|v| v == p);
            let computed = idx.and_then(|i| tess::vertex_alpha(&cell, i).ok());
            if computed.map(|w| w.alpha) != Some(alpha.clone()) {
                ok = false;
                println!("  mismatch at {tuple} vertex ({}, {})", p.x, p.y);
            }
        }
        check(format!("alphas {tuple}"), ok);
    }

    // Checksums for every nonempty admissible cell in range.
    for r in 1..=4usize {
        for cell in tess::admissible_cells(r, None, max_param) {
            let p = tess::p_value(cell.tuple.ks());
            let sides = cell.polygon.vertices().len();
            let expected = if sides == 4 { rat(4, p) } else { rat(2, p) };
            let got = tess::checksum(&cell);
            check(
                format!("checksum {}", cell.tuple),
                got.as_ref() == Ok(&expected),
            );
        }
    }
    for r in 5..=20usize {
        for cell in tess::admissible_cells(r, None, 3) {
            let p = tess::p_value(cell.tuple.ks());
            let sides = cell.polygon.vertices().len();
            let expected = if sides == 4 { rat(4, p) } else { rat(2, p) };
            let got = tess::checksum(&cell);
            check(
                format!("checksum {}", cell.tuple),
                got.as_ref() == Ok(&expected),
            );
        }
    }

    if cross_check_density {
        use rayon::prelude::*;
        let pts = sample_points(points, seed);
        let results: Vec<bool> = pts
            .par_iter()
            .map(|(u, v)| {
                let closed = density::g_closed(u, v);
                let summed = density::g_sum(u, v, None);
                matches!((closed, summed), (Ok(a), Ok(b)) if a == b)
            })
            .collect();
        for ((u, v), ok) in pts.iter().zip(&results) {
            if !ok {
                println!("  density mismatch at ({u}, {v})");
            }
        }
        let all = results.iter().all(|&b| b);
        check(
            format!("density cross-check at {points} points (seed {seed})"),
            all,
        );
    }

    if let (Some(interval), Some(q)) = (&interval, q) {
        let interval = parse_interval(&Some(interval.clone()))?;
        let full = pairs::even_pairs(q, &Interval::unit())
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let sub =
            pairs::even_pairs(q, &interval).map_err(|e| CliError::Usage(e.to_string()))?;
        let hist_full =
            pairs::type_histogram(&full).map_err(|e| CliError::Usage(e.to_string()))?;
        let hist_sub = pairs::type_histogram(&sub).map_err(|e| CliError::Usage(e.to_string()))?;
        for r in 1..=4u32 {
            let a = hist_full
                .get(&r)
                .and_then(|x| x.to_f64())
                .unwrap_or(0.0);
            let b = hist_sub.get(&r).and_then(|x| x.to_f64()).unwrap_or(0.0);
            check(
                format!("type {r} share: interval {} vs full {}", sig12(b), sig12(a)),
                (a - b).abs() < 0.02,
            );
        }
        let a = pairs::small_sum_probability(&full, q)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .to_f64()
            .unwrap_or(0.0);
        let b = pairs::small_sum_probability(&sub, q)
            .map_err(|e| CliError::Usage(e.to_string()))?
            .to_f64()
            .unwrap_or(0.0);
        check(
            format!(
                "small-sum fraction: interval {} vs full {}",
                sig12(b),
                sig12(a)
            ),
            (a - b).abs() < 0.02,
        );
    }

    if failures == 0 {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failures} check(s) failed");
        Ok(ExitCode::from(1))
    }
}
