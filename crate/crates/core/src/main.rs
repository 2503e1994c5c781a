//! Command-line surface for batch experimentation.
//!
//! Exit codes: 0 all pass, 1 any fail, 2 inconclusive only, 3 capacity
//! exceeded, 64 usage error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hypertree::combinatorics::binomial;
use hypertree::error::{Error, Result};
use hypertree::f2::{cohomology_dim, expansion_constant, Convention};
use hypertree::kernels::{Backend, HypertreeSampler};
use hypertree::lab::{self, Report, Verdict};
use hypertree::rng::{child_seed, stream_rng};
use hypertree::simplicial::{Complex, Face};
use hypertree::Caps;

#[derive(Parser, Debug)]
#[command(
    name = "hypertree",
    version,
    about = "Sample determinantal hypertrees, measure coboundary expansion, verify the distributional laws"
)]
struct Cli {
    /// Worker threads (default: available parallelism). Results are
    /// deterministic regardless of the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Capacity overrides, e.g. "coset=28,ambient=22,enum=500000".
    /// The HYPERTREE_CAPS environment variable is applied first.
    #[arg(long, global = true)]
    caps: Option<String>,

    /// Prefer exact-rational cross-checks where both modes exist.
    #[arg(long, global = true)]
    exact: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw hypertrees (or unions) and write them in the complex format.
    Sample(SampleArgs),
    /// Expansion constants, skeleton expansion, and cohomology of a
    /// complex file.
    Expansion(ExpansionArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(short)]
    n: u32,
    #[arg(short)]
    d: usize,
    /// Percolation parameter ℓ.
    #[arg(short, default_value_t = 0)]
    l: u32,
    /// Number of independent copies to union.
    #[arg(short, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Percolation)]
    backend: BackendArg,
    /// Output file; with `--backend both`, suffixed per backend.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Kernel,
    Percolation,
    Both,
}

#[derive(Args, Debug)]
struct ExpansionArgs {
    /// Complex file (header "n d", one top face per line).
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = ConventionArg::Reduced)]
    convention: ConventionArg,
    /// Emit CSV rows instead of JSON.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    /// B⁰ contains the constants (augmentation).
    Reduced,
    /// B⁰ = {0}.
    Unreduced,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Reduced => Convention::Reduced,
            ConventionArg::Unreduced => Convention::Unreduced,
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// measure | marginals | counts | links | union-bound | bernstein |
    /// trend | all
    suite: String,
    #[arg(short)]
    n: Option<u32>,
    #[arg(short)]
    d: Option<usize>,
    #[arg(short, default_value_t = 0)]
    l: u32,
    #[arg(short)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<u64>,
    /// Grid of n values for the trend suite, e.g. "20,40,60".
    #[arg(long)]
    grid: Option<String>,
    /// Curated fast parameters.
    #[arg(long)]
    quick: bool,
    /// Emit CSV rows instead of JSON.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized");
        }
    }
    let caps = match Caps::from_env_and(cli.caps.as_deref()) {
        Ok(caps) => caps,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(64);
        }
    };
    let code = match &cli.command {
        Command::Sample(args) => cmd_sample(&cli, args, &caps),
        Command::Expansion(args) => cmd_expansion(&cli, args, &caps),
        Command::Verify(args) => cmd_verify(&cli, args, &caps),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// The full run configuration, echoed into reports.
#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'a str,
    threads: Option<usize>,
    caps: String,
    exact: bool,
}

fn run_config<'a>(cli: &Cli, command: &'a str, caps: &Caps) -> RunConfig<'a> {
    RunConfig {
        command,
        threads: cli.threads,
        caps: format!("{caps:?}"),
        exact: cli.exact,
    }
}

fn cmd_sample(_cli: &Cli, args: &SampleArgs, caps: &Caps) -> Result<u8> {
    if args.k == 0 {
        return Err(Error::invalid("need k ≥ 1"));
    }
    let backends: &[(Backend, &str)] = match args.backend {
        BackendArg::Kernel => &[(Backend::Kernel, "kernel")],
        BackendArg::Percolation => &[(Backend::Percolation, "percolation")],
        BackendArg::Both => &[(Backend::Kernel, "kernel"), (Backend::Percolation, "percolation")],
    };
    let mut face_counts = Vec::new();
    for &(backend, label) in backends {
        let sampler = HypertreeSampler::new(args.n, args.d, args.l, backend, caps)?;
        let complex = if args.k == 1 {
            sampler.draw(args.seed)?
        } else {
            sampler.draw_union(args.k, args.seed)?.0
        };
        face_counts.push((label, complex.face_count()));
        let text = complex.to_file_string();
        match &args.out {
            Some(path) => {
                let path = if backends.len() == 1 {
                    path.clone()
                } else {
                    let mut p = path.clone();
                    p.set_extension(label);
                    p
                };
                std::fs::write(&path, text)?;
                println!(
                    "{label}: wrote {} with {} top faces",
                    path.display(),
                    complex.face_count()
                );
            }
            None => {
                if backends.len() > 1 {
                    println!("# backend: {label}");
                }
                print!("{text}");
            }
        }
        eprintln!(
            "{label}: n={} d={} l={} k={}: {} top faces (projection rank {})",
            args.n,
            args.d,
            args.l,
            args.k,
            complex.face_count(),
            binomial(args.n as u64 - 1, args.d as u64) * args.k as u64,
        );
    }
    if face_counts.len() == 2 {
        eprintln!(
            "backend note: kernel and percolation sample the same law; \
             face counts this draw: {} vs {} (equality not expected per-draw, \
             only in distribution)",
            face_counts[0].1, face_counts[1].1
        );
    }
    Ok(0)
}

fn cmd_expansion(cli: &Cli, args: &ExpansionArgs, caps: &Caps) -> Result<u8> {
    let complex = Complex::read_file(&args.file)?;
    if complex.face_count() == 0 {
        return Err(Error::EmptyComplex);
    }
    let convention: Convention = args.convention.into();
    let mut params = BTreeMap::new();
    params.insert(
        "file".to_string(),
        serde_json::to_value(args.file.display().to_string()).unwrap(),
    );
    params.insert(
        "config".to_string(),
        serde_json::to_value(run_config(cli, "expansion", caps)).unwrap(),
    );
    params.insert("n".into(), complex.vertex_count().into());
    params.insert("d".into(), (complex.dim() as u64).into());

    let mut stats = Vec::new();
    let mut capacity_hit = false;
    let mut h_values = Vec::new();
    for i in 0..complex.dim() {
        match expansion_constant(&complex, i, convention, caps) {
            Ok(Some(h)) => {
                stats.push((format!("h_{i}"), format!("{h}")));
                h_values.push(Some(h));
            }
            Ok(None) => {
                stats.push((format!("h_{i}"), "inf".to_string()));
                h_values.push(None);
            }
            Err(Error::Capacity { what, cap, actual }) => {
                stats.push((format!("h_{i}"), format!("capacity: {what} {actual} > {cap}")));
                capacity_hit = true;
            }
            Err(e) => return Err(e),
        }
        let dim = cohomology_dim(&complex, i, convention)?;
        stats.push((format!("cohomology_dim_{i}"), dim.to_string()));
    }
    if !capacity_hit {
        let min = h_values
            .iter()
            .filter_map(|v| v.as_ref())
            .min()
            .map(|h| format!("{h}"))
            .unwrap_or_else(|| "inf".to_string());
        stats.push(("h".to_string(), min));
    }
    match lab::skeleton_alpha(&complex, caps) {
        Ok(alpha) => stats.push(("skeleton_alpha".to_string(), format!("{alpha}"))),
        Err(Error::Capacity { what, cap, actual }) => {
            stats.push((
                "skeleton_alpha".to_string(),
                format!("capacity: {what} {actual} > {cap}"),
            ));
            capacity_hit = true;
        }
        Err(e) => return Err(e),
    }

    let report = Report {
        name: "expansion".to_string(),
        params,
        seed: 0,
        statistics: stats
            .into_iter()
            .map(|(name, value)| lab::Statistic {
                name,
                value: serde_json::Value::String(value),
            })
            .collect(),
        p_value: None,
        bound: None,
        verdict: if capacity_hit {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        },
        notes: if capacity_hit {
            vec!["capacity cap hit; partial report".to_string()]
        } else {
            vec![]
        },
        wall_time_ms: 0,
    };
    emit(&[report], args.csv, args.out.as_deref())?;
    Ok(if capacity_hit { 3 } else { 0 })
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs, caps: &Caps) -> Result<u8> {
    let samples = args
        .samples
        .unwrap_or(if args.quick { 20_000 } else { 100_000 });
    let seed = args.seed;
    let mut reports: Vec<Report> = Vec::new();
    let mut capacity_hit = false;

    let suites: Vec<&str> = if args.suite == "all" {
        vec![
            "measure",
            "marginals",
            "counts",
            "links",
            "union-bound",
            "bernstein",
            "trend",
        ]
    } else {
        vec![args.suite.as_str()]
    };
    let all = args.suite == "all";

    for suite in suites {
        let run = run_one_suite(suite, args, caps, samples, seed, all, cli.exact);
        match run {
            Ok(mut rs) => reports.append(&mut rs),
            Err(Error::Capacity { what, cap, actual }) => {
                capacity_hit = true;
                eprintln!("suite {suite}: capacity: {what} = {actual} over cap {cap}");
            }
            Err(e) => return Err(e),
        }
    }
    for r in &mut reports {
        r.params.insert(
            "config".to_string(),
            serde_json::to_value(run_config(cli, "verify", caps)).unwrap(),
        );
    }
    emit(&reports, args.csv, args.out.as_deref())?;

    let any_fail = reports.iter().any(|r| r.verdict == Verdict::Fail);
    let any_inconclusive = reports.iter().any(|r| r.verdict == Verdict::Inconclusive);
    Ok(if any_fail {
        1
    } else if capacity_hit {
        3
    } else if any_inconclusive {
        2
    } else {
        0
    })
}

fn run_one_suite(
    suite: &str,
    args: &VerifyArgs,
    caps: &Caps,
    samples: u64,
    seed: u64,
    curated: bool,
    exact: bool,
) -> Result<Vec<Report>> {
    let n = args.n;
    let d = args.d;
    let l = args.l;
    match suite {
        "measure" => {
            let mut out = Vec::new();
            if curated {
                out.push(lab::verify_measure(4, 1, caps)?);
                out.push(lab::verify_measure(5, 2, caps)?);
            } else {
                out.push(lab::verify_measure(n.unwrap_or(5), d.unwrap_or(2), caps)?);
            }
            Ok(out)
        }
        "marginals" => Ok(vec![lab::verify_marginals(
            n.unwrap_or(10),
            d.unwrap_or(2),
            l,
            samples,
            seed,
            caps,
        )?]),
        "counts" => {
            let n = n.unwrap_or(8);
            let d = d.unwrap_or(2);
            let m = binomial(n as u64, d as u64 + 1);
            let mut out = Vec::new();
            use rand::seq::index::sample as index_sample;
            for trial in 0..3u64 {
                let mut rng = stream_rng(child_seed(seed, trial), u64::MAX);
                let size = (m as usize).min(8);
                let subset: Vec<Face> = index_sample(&mut rng, m as usize, size)
                    .into_iter()
                    .map(|r| Face::from_rank(r as u64, d))
                    .collect();
                out.push(lab::verify_count_law(
                    n,
                    d,
                    l,
                    &subset,
                    samples,
                    child_seed(seed, trial),
                    caps,
                )?);
            }
            Ok(out)
        }
        "links" => {
            let n = n.unwrap_or(6);
            let sigma = Face::new(vec![n]).unwrap();
            Ok(vec![lab::verify_links(
                n,
                d.unwrap_or(2),
                l,
                &sigma,
                samples,
                seed,
                caps,
            )?])
        }
        "union-bound" => {
            let mut out = vec![lab::verify_union_bound(
                n.unwrap_or(10),
                d.unwrap_or(2),
                l,
                args.k.unwrap_or(3),
                samples,
                seed,
                caps,
            )?];
            if exact {
                out.push(hadamard_report(n.unwrap_or(10), d.unwrap_or(2), l, seed, caps)?);
            }
            Ok(out)
        }
        "bernstein" => {
            let n = n.unwrap_or(12);
            let d = d.unwrap_or(2);
            let m = binomial(n as u64, d as u64 + 1) as usize;
            Ok(vec![lab::verify_bernstein(
                n,
                d,
                l,
                (m / 2).clamp(1, 200),
                samples,
                seed,
                caps,
            )?])
        }
        "trend" => {
            let grid: Vec<u32> = match &args.grid {
                Some(g) => g
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::invalid(format!("bad grid entry `{x}`")))
                    })
                    .collect::<Result<_>>()?,
                None => vec![8, 12, 16],
            };
            let trend_samples = args.samples.unwrap_or(if curated || args.quick {
                60
            } else {
                200
            });
            Ok(vec![lab::theorem_trend(
                d.unwrap_or(1),
                args.k.unwrap_or(4),
                &grid,
                trend_samples,
                seed,
                caps,
            )?])
        }
        other => Err(Error::invalid(format!(
            "unknown suite `{other}`; expected measure|marginals|counts|links|union-bound|bernstein|trend|all"
        ))),
    }
}

/// Exact Hadamard panel: random minors of the exact kernel.
fn hadamard_report(n: u32, d: usize, l: u32, seed: u64, caps: &Caps) -> Result<Report> {
    use rand::seq::index::sample as index_sample;
    let kernel = hypertree::kernels::HypertreeKernel::new(n, d, l)?;
    let exact = kernel.to_exact(caps)?;
    let m = exact.ground_size();
    let mut rng = stream_rng(seed, 0x4AD);
    let mut violations = 0u64;
    let trials = 10_000u64;
    for _ in 0..trials {
        use rand::Rng;
        let size = rng.random_range(1..=6usize.min(m));
        let a = index_sample(&mut rng, m, size).into_vec();
        if !exact.hadamard_holds(&a) {
            violations += 1;
        }
    }
    let mut params = BTreeMap::new();
    params.insert("n".into(), n.into());
    params.insert("d".into(), (d as u64).into());
    params.insert("ell".into(), l.into());
    params.insert("trials".into(), trials.into());
    Ok(Report {
        name: "hadamard".into(),
        params,
        seed,
        statistics: vec![lab::Statistic {
            name: "violations".into(),
            value: violations.into(),
        }],
        p_value: None,
        bound: None,
        verdict: if violations == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        notes: vec![],
        wall_time_ms: 0,
    })
}

fn emit(reports: &[Report], csv: bool, out: Option<&std::path::Path>) -> Result<()> {
    let text = if csv {
        let mut s = String::from("experiment,statistic,value\n");
        for r in reports {
            s.push_str(&r.csv_rows());
        }
        s
    } else {
        serde_json::to_string_pretty(reports).expect("reports serialize")
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}
