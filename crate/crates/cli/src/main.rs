use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use c2adic_core::collatz::parity_vector;
use c2adic_core::cycles::{default_level_cap, enumerate_ergodic_sets, measure_summary};
use c2adic_core::embedding::{box_cover, generate_set, square_pair, standard_rational_points};
use c2adic_core::padic::{ratio_string, OddRational};
use c2adic_core::qmap::{q_iterate, q_truncated, qinv_truncated, QValue};
use c2adic_core::render::{render_svg, write_points_csv, Window};
use c2adic_core::search::{search, SearchConfig};
use c2adic_core::transform::{invert_v1, invert_v2};
use c2adic_core::verify::{run_suite, Suite};
use c2adic_core::{Error, ParityVector};

/// Parity sequences of the 3x+1 map on the 2-adic integers.
///
/// Bit strings are read and printed low-order first: the leftmost character
/// is s_0, the parity of the starting value. The usual 2-adic shorthand
/// writes digits right to left, so reverse it before passing it here.
#[derive(Parser, Debug)]
#[command(name = "c2adic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Output format; not every command supports every format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,

    /// Write the result to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "C2ADIC_THREADS")]
    threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parity vector V_j of an integer or a fraction p/q with odd q.
    Parity {
        #[arg(allow_hyphen_values = true)]
        value: String,
        #[arg(long = "len", short = 'j')]
        len: usize,
    },
    /// Residue class with the given parity vector.
    Invert {
        /// Parity bits, s_0 first.
        bits: String,
        #[arg(long, value_enum, default_value_t = Formula::V1)]
        formula: Formula,
    },
    /// Q(x), its inverse or iterates.
    Q {
        #[arg(allow_hyphen_values = true)]
        value: String,
        #[arg(long)]
        inverse: bool,
        #[arg(long, default_value_t = 1)]
        iterations: u32,
        /// Bits kept for truncated evaluation.
        #[arg(long, default_value_t = 64)]
        precision: u32,
        /// Evaluate exactly on rationals (fails if an orbit does not cycle).
        #[arg(long)]
        exact: bool,
    },
    /// Count odd ergodic sets of Q by measure 2^-k.
    Ergodic {
        #[arg(long, default_value_t = 12)]
        max_k: u32,
        /// Highest base level searched; tables are built two levels higher.
        /// Defaults to max_k + 10, at most 26.
        #[arg(long)]
        cap: Option<u32>,
        /// List the base cycles.
        #[arg(long)]
        list: bool,
    },
    /// Search fractions p/q for odd rational Q-cycles.
    Search {
        #[arg(long, default_value_t = 999)]
        bound: u64,
        #[arg(long, default_value_t = 16)]
        max_period: u32,
        #[arg(long, default_value_t = 40)]
        modulus_bits: u32,
        /// Include wall-clock time in JSON output.
        #[arg(long)]
        timing: bool,
    },
    /// Points of the 3x+1 set as CSV, SVG, or the exact rational points as JSON.
    Embed {
        #[arg(long, default_value_t = 12)]
        bits: u32,
        /// Overlay the covering by 2^bits boxes.
        #[arg(long)]
        boxes: bool,
        /// Depth of the plotted points with --boxes or --squares.
        #[arg(long)]
        point_bits: Option<u32>,
        /// Enlarged squares for a range of k, e.g. 2..7, written as square_<k>.svg
        /// into the --output directory (default: current directory).
        #[arg(long)]
        squares: Option<String>,
    },
    /// Run the built-in check suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Formula {
    V1,
    V2,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Feq,
    Tables,
    Invariants,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

/// What a command produced: bytes for the data stream, and whether all
/// requested checks passed.
struct Outcome {
    data: Vec<u8>,
    ok: bool,
}

impl Outcome {
    fn text(s: String) -> Self {
        Outcome {
            data: s.into_bytes(),
            ok: true,
        }
    }

    fn json<T: Serialize>(v: &T) -> CliResult<Self> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        Ok(Outcome::text(s))
    }
}

fn bad_format(cmd: &str, f: Format) -> Box<dyn std::error::Error> {
    format!("--format {f:?} is not supported by `{cmd}`")
        .to_lowercase()
        .into()
}

fn parse_value(s: &str) -> CliResult<OddRational> {
    Ok(s.parse::<OddRational>()?)
}

fn cmd_parity(g: &Global, value: &str, len: usize) -> CliResult<Outcome> {
    let x = parse_value(value)?;
    let v = parity_vector(&x, len)?;
    match g.format {
        Format::Text => Ok(Outcome::text(format!("{v}\n"))),
        Format::Json => {
            Outcome::json(&json!({"value": x.to_string(), "len": len, "parity": v.to_string()}))
        }
        f => Err(bad_format("parity", f)),
    }
}

fn cmd_invert(g: &Global, bits: &str, formula: Formula) -> CliResult<Outcome> {
    let s: ParityVector = bits.parse()?;
    let v1 = invert_v1(&s);
    let v2 = invert_v2(&s);
    let agree = v1 == v2;
    let (text, ok) = match formula {
        Formula::V1 => (format!("{v1}\n"), true),
        Formula::V2 => (format!("{v2}\n"), true),
        Formula::Both => (
            format!(
                "v1: {v1}\nv2: {v2}\n{}\n",
                if agree { "agree" } else { "DISAGREE" }
            ),
            agree,
        ),
    };
    let mut out = match g.format {
        Format::Text => Outcome::text(text),
        Format::Json => Outcome::json(&json!({
            "bits": s.to_string(),
            "v1": v1.to_string(),
            "v2": v2.to_string(),
            "agree": agree,
        }))?,
        f => return Err(bad_format("invert", f)),
    };
    out.ok = ok;
    Ok(out)
}

fn cmd_q(
    g: &Global,
    value: &str,
    inverse: bool,
    iterations: u32,
    precision: u32,
    exact: bool,
) -> CliResult<Outcome> {
    let x = parse_value(value)?;
    let j = i64::from(iterations) * if inverse { -1 } else { 1 };
    let (shown, is_exact) = if exact {
        let r = q_iterate(&x, j, c2adic_core::collatz::DEFAULT_BUDGET, precision)?;
        match r.value {
            QValue::Exact(v) => (v.to_string(), true),
            QValue::Truncated(t) => {
                return Err(Error::Inexact(format!("{} mod 2^{}", t.value(), t.precision())).into())
            }
        }
    } else {
        let mut t = x.to_padic(precision)?;
        for _ in 0..iterations {
            t = if inverse {
                qinv_truncated(&t)
            } else {
                q_truncated(&t)
            };
        }
        (format!("{} mod 2^{precision}", t.value()), false)
    };
    match g.format {
        Format::Text => Ok(Outcome::text(format!("{shown}\n"))),
        Format::Json => Outcome::json(&json!({
            "value": x.to_string(),
            "iterations": j,
            "exact": is_exact,
            "result": shown,
        })),
        f => Err(bad_format("q", f)),
    }
}

fn cmd_ergodic(g: &Global, max_k: u32, cap: u32, list: bool) -> CliResult<Outcome> {
    let start = Instant::now();
    eprintln!("building Q tables up to level {} ...", cap + 2);
    let census = enumerate_ergodic_sets(max_k, cap)?;
    eprintln!("census done in {:.1} s", start.elapsed().as_secs_f64());
    let summary = measure_summary(&census.counts);
    match g.format {
        Format::Text => {
            let mut s = String::new();
            s.push_str(&format!("odd ergodic sets, base levels <= {cap}\n"));
            s.push_str("k\tN_k\n");
            for k in 1..=max_k {
                s.push_str(&format!("{k}\t{}\n", census.count(k)));
            }
            let undecided: u64 = census.undecided.iter().sum();
            if undecided > 0 {
                s.push_str(&format!("undecided candidates: {undecided}\n"));
            }
            s.push_str(&format!(
                "odd total measure: {} ({:.6})\n",
                ratio_string(&summary.odd_total),
                summary.odd_f64()
            ));
            s.push_str(&format!(
                "ergodic domain measure: {} ({:.6})\n",
                ratio_string(&summary.full_total),
                summary.full_f64()
            ));
            if list {
                for r in &census.records {
                    let elems: Vec<String> = r.elements.iter().map(u64::to_string).collect();
                    s.push_str(&format!(
                        "k={} m0={} length={} ({})\n",
                        r.k,
                        r.m0,
                        r.length,
                        elems.join(",")
                    ));
                }
            }
            Ok(Outcome::text(s))
        }
        Format::Json => {
            let records = if list { Some(&census.records) } else { None };
            Outcome::json(&json!({
                "max_k": max_k,
                "level_cap": cap,
                "table_level": census.table_level,
                "counts": census.counts,
                "undecided": census.undecided,
                "odd_total": ratio_string(&summary.odd_total),
                "full_total": ratio_string(&summary.full_total),
                "records": records,
            }))
        }
        f => Err(bad_format("ergodic", f)),
    }
}

fn cmd_search(g: &Global, cfg: SearchConfig, timing: bool) -> CliResult<Outcome> {
    let start = Instant::now();
    eprintln!("searching |p|, q <= {} ...", cfg.bound);
    let rep = search(&cfg)?;
    let secs = start.elapsed().as_secs_f64();
    eprintln!("{} candidates in {secs:.1} s", rep.candidates_tested);
    let mut out = match g.format {
        Format::Text => {
            let mut s = format!(
                "tested {} candidates, {} survivors\n",
                rep.candidates_tested,
                rep.survivors.len()
            );
            for c in &rep.survivors {
                let cyc: Vec<String> = c.cycle_elements.iter().map(ToString::to_string).collect();
                s.push_str(&format!(
                    "{}\tperiod {}\t{}\t({})\n",
                    c.seed,
                    c.period,
                    if c.verified_exact {
                        "exact"
                    } else {
                        "unverified"
                    },
                    cyc.join(", ")
                ));
            }
            Outcome::text(s)
        }
        Format::Json => {
            let mut v = serde_json::to_value(&rep)?;
            if timing {
                v["wall_clock_seconds"] = json!(secs);
            }
            Outcome::json(&v)?
        }
        f => return Err(bad_format("search", f)),
    };
    out.ok = rep.all_verified();
    Ok(out)
}

fn parse_range(s: &str) -> CliResult<(u32, u32)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a range like 2..7, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (u32, u32) = (a.trim().parse()?, b.trim().parse()?);
    if a < 2 || b < a {
        return Err(format!("square range must satisfy 2 <= a <= b, got {s:?}").into());
    }
    Ok((a, b))
}

fn cmd_embed(
    g: &Global,
    bits: u32,
    boxes: bool,
    point_bits: Option<u32>,
    squares: Option<&str>,
) -> CliResult<Outcome> {
    if let Some(range) = squares {
        let (a, b) = parse_range(range)?;
        if !matches!(g.format, Format::Svg | Format::Text) {
            return Err(bad_format("embed --squares", g.format));
        }
        let dir = g.output.as_deref().unwrap_or(Path::new("."));
        fs::create_dir_all(dir)?;
        let set = generate_set(point_bits.unwrap_or(20))?;
        for k in a..=b {
            let sp = square_pair(k)?;
            let svg = render_svg(&set, &Window::from_rect(&sp.box1), None);
            let path = dir.join(format!("square_{k}.svg"));
            write_atomic(&path, svg.as_bytes())?;
            eprintln!("wrote {}", path.display());
        }
        return Ok(Outcome {
            data: Vec::new(),
            ok: true,
        });
    }
    match g.format {
        Format::Csv => {
            let set = generate_set(bits)?;
            let mut buf = Vec::new();
            write_points_csv(&set, &mut buf)?;
            Ok(Outcome {
                data: buf,
                ok: true,
            })
        }
        Format::Svg => {
            let (set, cover) = if boxes {
                let depth = point_bits.unwrap_or(bits.max(16));
                (generate_set(depth)?, Some(box_cover(bits)?))
            } else {
                (generate_set(point_bits.unwrap_or(bits))?, None)
            };
            let svg = render_svg(&set, &Window::full(), cover.as_ref());
            Ok(Outcome::text(svg))
        }
        Format::Json => {
            let rows: Vec<_> = standard_rational_points()?
                .iter()
                .map(|p| p.record())
                .collect();
            Outcome::json(&rows)
        }
        Format::Text => {
            let mut s = String::from("r\tQ(r)\tX(r)\tY(r)\n");
            for p in standard_rational_points()? {
                let r = p.record();
                s.push_str(&format!("{}\t{}\t{}\t{}\n", r.r, r.q_of_r, r.x, r.y));
            }
            Ok(Outcome::text(s))
        }
    }
}

fn cmd_verify(g: &Global, suite: SuiteArg) -> CliResult<Outcome> {
    let suites: Vec<Suite> = match suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::Feq => vec![Suite::Feq],
        SuiteArg::Tables => vec![Suite::Tables],
        SuiteArg::Invariants => vec![Suite::Invariants],
    };
    let mut reports = Vec::new();
    for s in suites {
        eprintln!("running suite {} ...", s.name());
        reports.push(run_suite(s)?);
    }
    let ok = reports.iter().all(|r| r.all_passed());
    let mut out = match g.format {
        Format::Text => {
            let mut s = String::new();
            for r in &reports {
                for c in &r.checks {
                    let mark = if c.passed { "PASS" } else { "FAIL" };
                    if c.detail.is_empty() {
                        s.push_str(&format!("{mark} [{}] {}\n", r.suite.name(), c.name));
                    } else {
                        s.push_str(&format!(
                            "{mark} [{}] {}: {}\n",
                            r.suite.name(),
                            c.name,
                            c.detail
                        ));
                    }
                }
            }
            s.push_str(if ok {
                "all checks passed\n"
            } else {
                "some checks FAILED\n"
            });
            Outcome::text(s)
        }
        Format::Json => Outcome::json(&reports)?,
        f => return Err(bad_format("verify", f)),
    };
    out.ok = ok;
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, data: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir)?;
    tmp.write_all(data)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<bool> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let g = &cli.global;
    let out = match &cli.command {
        Command::Parity { value, len } => cmd_parity(g, value, *len)?,
        Command::Invert { bits, formula } => cmd_invert(g, bits, *formula)?,
        Command::Q {
            value,
            inverse,
            iterations,
            precision,
            exact,
        } => cmd_q(g, value, *inverse, *iterations, *precision, *exact)?,
        Command::Ergodic { max_k, cap, list } => cmd_ergodic(
            g,
            *max_k,
            cap.unwrap_or_else(|| default_level_cap(*max_k)),
            *list,
        )?,
        Command::Search {
            bound,
            max_period,
            modulus_bits,
            timing,
        } => {
            let cfg = SearchConfig {
                bound: *bound,
                max_period: *max_period,
                modulus_bits: *modulus_bits,
            };
            cmd_search(g, cfg, *timing)?
        }
        Command::Embed {
            bits,
            boxes,
            point_bits,
            squares,
        } => {
            let out = cmd_embed(g, *bits, *boxes, *point_bits, squares.as_deref())?;
            if squares.is_some() {
                return Ok(out.ok);
            }
            out
        }
        Command::Verify { suite } => cmd_verify(g, *suite)?,
    };
    match &g.output {
        Some(path) => write_atomic(path, &out.data)?,
        None => io::stdout().lock().write_all(&out.data)?,
    }
    Ok(out.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
