//! `massey`: build groups, answer Massey queries, verify certificates, run suites.
//!
//! Exit codes: 0 success, 1 triviality or verification failure, 2 search
//! exhausted, 3 invalid input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use massey_core::certificate::{verify_certificate, Certificate, GroupSpec, Verdict};
use massey_core::cohomology::{h1_dim, triviality_failure, CohClass1};
use massey_core::groups::{generator_label, Construction, EtypePresentation};
use massey_core::massey::{strong_vanishing_witness, SearchOptions, DEFAULT_BUDGET};
use massey_core::oracle::{hom_exists, EnumerationOptions};
use massey_core::suites::{run_suite, SuiteConfig, SUITES};
use massey_core::Error;

#[derive(Parser)]
#[command(name = "massey", version, about = "Unitriangular witnesses for vanishing Massey products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a group spec and print its presentation.
    Build {
        /// Group spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Expected prime; must match the spec.
        #[arg(long)]
        p: Option<u32>,
    },
    /// Decide a Massey query and write a certificate.
    Massey {
        #[arg(long)]
        spec: PathBuf,
        /// Length of the sequence.
        #[arg(long)]
        n: usize,
        /// Classes as a JSON array of coefficient vectors, e.g. [[1,0],[1,0],[1,0]].
        #[arg(long)]
        alphas: String,
        #[arg(long)]
        p: Option<u32>,
        /// Node budget for the layered search.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Certificate path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Witness)]
        mode: Mode,
        /// Worker threads; the output does not depend on this.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-check a certificate from scratch.
    Verify {
        /// Certificate file (JSON).
        certificate: PathBuf,
    },
    /// Run a cross-validation suite and print a JSON-lines report.
    Oracle {
        /// One of: solver, aq-formula, cyclic, dwyer-n2, strong-vanishing,
        /// negative, dwyer-n3-tables, cochain, determinism.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Only test consecutive cup products.
    CheckTriviality,
    /// Construct and certify a witness.
    Witness,
    /// Construct a witness and compare with brute-force enumeration.
    OracleCrosscheck,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TrivialityFails { .. } => 1,
            Error::SearchExhausted { .. } => 2,
            _ => 3,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Build { spec, p } => cmd_build(&spec, p),
        Command::Massey {
            spec,
            n,
            alphas,
            p,
            budget,
            out,
            mode,
            jobs,
        } => pool(jobs).and_then(|pool| {
            pool.install(|| cmd_massey(&spec, n, &alphas, p, budget, out.as_deref(), mode))
        }),
        Command::Verify { certificate } => cmd_verify(&certificate),
        Command::Oracle {
            suite,
            jobs,
            seed,
            out,
        } => cmd_oracle(&suite, jobs, seed, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::new(3, format!("thread pool: {e}")))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(3, format!("{}: {e}", path.display())))
}

fn load_group(path: &Path, p: Option<u32>) -> Result<EtypePresentation, Failure> {
    let g = GroupSpec::from_json(&read(path)?)?.build()?;
    if let Some(p) = p {
        if p != g.p() {
            return Err(Failure::new(3, format!("--p {p} does not match the spec's p = {}", g.p())));
        }
    }
    Ok(g)
}

fn summary(g: &EtypePresentation) -> String {
    let rels = g.presentation().relator_strings();
    let mut s = format!("d={}", g.generator_count());
    if let Construction::Demushkin { f, .. } = g.tree() {
        s += &format!(", f={f}");
    }
    match rels.len() {
        0 => s += ", no relators",
        1 => s += &format!(", relator {}", rels[0]),
        _ => s += &format!(", relators {}", rels.join("; ")),
    }
    s + &format!(", dim H¹={}", h1_dim(g))
}

fn cmd_build(spec: &Path, p: Option<u32>) -> Result<(), Failure> {
    let g = load_group(spec, p)?;
    println!("{}", summary(&g));
    println!("p={}, group {}", g.p(), g.describe());
    let o = g.orientation();
    let theta: Vec<String> = o
        .values
        .iter()
        .enumerate()
        .map(|(x, v)| format!("{}->{v}", generator_label(x)))
        .collect();
    println!(
        "orientation {} mod {}^{} ({})",
        theta.join(", "),
        g.p(),
        g.precision(),
        if o.torsion_free { "torsion-free" } else { "torsion" }
    );
    Ok(())
}

fn parse_alphas(text: &str, n: usize, d: usize) -> Result<Vec<CohClass1>, Failure> {
    let raw: Vec<Vec<u32>> =
        serde_json::from_str(text).map_err(|e| Failure::new(3, format!("--alphas: {e}")))?;
    if raw.len() != n {
        return Err(Failure::new(3, format!("--n {n} but {} classes given", raw.len())));
    }
    if let Some(a) = raw.iter().find(|a| a.len() != d) {
        return Err(Failure::new(
            3,
            format!("class {a:?} has length {} but the group has {d} generators", a.len()),
        ));
    }
    Ok(raw.into_iter().map(CohClass1::new).collect())
}

fn cmd_massey(
    spec: &Path,
    n: usize,
    alphas: &str,
    p: Option<u32>,
    budget: u64,
    out: Option<&Path>,
    mode: Mode,
) -> Result<(), Failure> {
    let g = load_group(spec, p)?;
    let alphas = parse_alphas(alphas, n, g.generator_count())?;
    if n < 2 {
        return Err(Failure::new(3, "--n must be at least 2"));
    }
    if let Some(i) = triviality_failure(&g, &alphas)? {
        return Err(Failure::new(1, format!("triviality fails at i={i}")));
    }
    if mode == Mode::CheckTriviality {
        println!("triviality holds");
        return Ok(());
    }
    let w = strong_vanishing_witness(&g, &alphas, SearchOptions { budget })?;
    let cert = Certificate::new(&g, &alphas, &w)?;
    if mode == Mode::OracleCrosscheck {
        let found = hom_exists(g.presentation(), &alphas, EnumerationOptions::default())?;
        if !found {
            return Err(Failure::new(3, "enumeration found no lift although a witness exists"));
        }
        eprintln!("enumeration agrees: a lift exists");
    }
    let text = cert.to_json_pretty() + "\n";
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure::new(3, format!("{}: {e}", path.display())))?;
            println!("witness found; certificate written to {} (sha256 {})", path.display(), cert.digest());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_verify(path: &Path) -> Result<(), Failure> {
    let cert = Certificate::from_json(&read(path)?)?;
    match verify_certificate(&cert)? {
        Verdict::Pass => {
            println!("pass");
            Ok(())
        }
        v => Err(Failure::new(1, format!("fail: {v}"))),
    }
}

fn cmd_oracle(suite: &str, jobs: usize, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    if !SUITES.contains(&suite) {
        return Err(Failure::new(
            3,
            format!("unknown suite {suite:?}; known suites: {}", SUITES.join(", ")),
        ));
    }
    let report = run_suite(suite, SuiteConfig { jobs, seed })?;
    let text = report.to_json_lines();
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(path, &text).map_err(|e| Failure::new(3, format!("{}: {e}", path.display())))?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::new(1, format!("suite {suite} has failing checks")))
    }
}
