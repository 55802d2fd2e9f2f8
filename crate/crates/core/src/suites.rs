//! Cross-validation suites.
//!
//! Each suite produces a [`Report`] of JSON lines `{"check", "status", "detail"}`.
//! Reports depend only on the seed, never on the worker count: work is split
//! into independent items with their own random streams and collected in order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{hex_digest, Certificate};
use crate::cohomology::{cup, triviality_condition, CohClass1};
use crate::error::{Error, Result};
use crate::fp::Fp;
use crate::groups::{demushkin, free, free_product, semidirect_zp, theta_abelian, EtypePresentation};
use crate::massey::{strong_vanishing_witness, witness_cyclic, SearchOptions};
use crate::oracle::{
    corpus, d1, d2, hom_exists, massey3_value_set, massey3_values_by_enumeration, Cochain1,
    EnumerationOptions, TableCohomology,
};
use crate::unitriangular::{solve_commutator_equation, UniTriangular};

pub const SUITES: &[&str] = &[
    "solver",
    "aq-formula",
    "cyclic",
    "dwyer-n2",
    "strong-vanishing",
    "negative",
    "dwyer-n3-tables",
    "cochain",
    "determinism",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub jobs: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { jobs: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportLine {
    pub check: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub lines: Vec<ReportLine>,
}

impl Report {
    fn push(&mut self, check: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.lines.push(ReportLine {
            check: check.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        !self.lines.is_empty() && self.lines.iter().all(|l| l.status == Status::Pass)
    }

    pub fn to_json_lines(&self) -> String {
        self.lines
            .iter()
            .map(|l| serde_json::to_string(l).expect("report lines serialize") + "\n")
            .collect()
    }
}

/// Runs the named suite on a pool of `cfg.jobs` workers.
pub fn run_suite(name: &str, cfg: SuiteConfig) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    let seed = cfg.seed;
    pool.install(|| match name {
        "solver" => Ok(solver(seed)),
        "aq-formula" => Ok(aq_formula()),
        "cyclic" => Ok(cyclic()),
        "dwyer-n2" => dwyer_n2(),
        "strong-vanishing" => Ok(strong_vanishing(seed)),
        "negative" => negative(seed),
        "dwyer-n3-tables" => dwyer_n3_tables(),
        "cochain" => cochain(seed),
        "determinism" => determinism(seed),
        other => Err(Error::Input(format!(
            "unknown suite {other:?}; known suites: {}",
            SUITES.join(", ")
        ))),
    })
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn short(digest: &str) -> &str {
    &digest[..16]
}

fn random_at_level(rng: &mut impl Rng, field: Fp, n: usize, k: usize) -> UniTriangular {
    let mut g = UniTriangular::identity(field, n);
    for i in 0..=n {
        for j in i + k..=n {
            g.set(i, j, rng.gen_range(0..field.p()));
        }
    }
    g
}

fn random_generic(rng: &mut impl Rng, field: Fp, n: usize) -> UniTriangular {
    let mut g = random_at_level(rng, field, n, 2);
    for i in 0..n {
        g.set(i, i + 1, rng.gen_range(1..field.p()));
    }
    g
}

fn solver(seed: u64) -> Report {
    let mut cells = Vec::new();
    for p in [2u32, 3, 5] {
        for n in 3..=6 {
            for k in 2..=n {
                cells.push((p, n, k));
            }
        }
    }
    let lines: Vec<(String, bool, String)> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(p, n, k))| {
            let field = Fp::new(p).expect("prime");
            let mut rng = rng_for(seed, idx as u64);
            let mut ok = 0;
            let mut bytes = Vec::new();
            let mut first_error = None;
            for _ in 0..100 {
                let a = random_generic(&mut rng, field, n);
                let c = random_at_level(&mut rng, field, n, k);
                match solve_commutator_equation(&a, &c, k) {
                    Ok(b) => {
                        let exact = b.commutator(&a).is_ok_and(|bc| bc == c);
                        let level = b.filtration_level().is_none_or(|l| l + 1 >= k);
                        if exact && level {
                            ok += 1;
                        } else if first_error.is_none() {
                            first_error = Some(format!("wrong solution {b:?}"));
                        }
                        bytes.extend(b.entries().iter().map(|&v| v as u8));
                    }
                    Err(e) => {
                        first_error.get_or_insert(e.to_string());
                    }
                }
            }
            let digest = hex_digest(&bytes);
            let detail = match first_error {
                None => format!("{ok}/100 exact, digest {}", short(&digest)),
                Some(e) => format!("{ok}/100 exact; {e}"),
            };
            (format!("solver p={p} n={n} k={k}"), ok == 100, detail)
        })
        .collect();
    let mut r = Report::default();
    for (c, ok, d) in lines {
        r.push(c, ok, d);
    }
    r
}

fn aq_formula() -> Report {
    let mut r = Report::default();
    for p in [2u32, 3, 5] {
        let field = Fp::new(p).expect("prime");
        let mut bad = Vec::new();
        let mut count = 0;
        for f in 1..=3u32 {
            let q = (p as usize).pow(f);
            for n in 2..=8 {
                let mut want = UniTriangular::identity(field, n);
                for i in 0..=n {
                    if i + q <= n {
                        want.set(i, i + q, 1);
                    }
                }
                count += 1;
                if UniTriangular::shift(field, n).power(q as i64) != want {
                    bad.push(format!("f={f} n={n}"));
                }
            }
        }
        let detail = if bad.is_empty() {
            format!("{count}/{count} exact")
        } else {
            format!("mismatch at {}", bad.join(", "))
        };
        r.push(format!("aq-formula p={p}"), bad.is_empty(), detail);
    }
    r
}

/// All classes on `d` generators, in lexicographic order.
pub fn all_classes(p: u32, d: usize) -> Vec<CohClass1> {
    let total = (p as usize).pow(d as u32);
    (0..total)
        .map(|code| {
            CohClass1::new(
                (0..d)
                    .map(|j| ((code / (p as usize).pow((d - 1 - j) as u32)) % p as usize) as u32)
                    .collect(),
            )
        })
        .collect()
}

fn cyclic() -> Report {
    let groups = [
        demushkin(3, 2, 1).unwrap(),
        demushkin(3, 4, 1).unwrap(),
        demushkin(2, 2, 2).unwrap(),
        theta_abelian(3, 3, Some(1)).unwrap(),
        semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap(),
    ];
    let mut r = Report::default();
    for g in &groups {
        let jobs: Vec<(CohClass1, usize)> = all_classes(g.p(), g.generator_count())
            .into_iter()
            .flat_map(|a| (3..=6).map(move |n| (a.clone(), n)))
            .collect();
        let results: Vec<std::result::Result<String, String>> = jobs
            .par_iter()
            .map(|(a, n)| {
                let w = witness_cyclic(g, a, *n).map_err(|e| format!("{a:?} n={n}: {e}"))?;
                let cert = Certificate::new(g, &vec![a.clone(); *n], &w)
                    .map_err(|e| format!("{a:?} n={n}: {e}"))?;
                Ok(cert.digest())
            })
            .collect();
        push_certificate_summary(&mut r, format!("cyclic {}", g.describe()), &results);
    }
    r
}

fn push_certificate_summary(r: &mut Report, check: String, results: &[std::result::Result<String, String>]) {
    let ok = results.iter().filter(|x| x.is_ok()).count();
    let digest = hex_digest(
        results
            .iter()
            .filter_map(|x| x.as_ref().ok())
            .cloned()
            .collect::<Vec<_>>()
            .join(",")
            .as_bytes(),
    );
    match results.iter().find_map(|x| x.as_ref().err()) {
        None => r.push(
            check,
            !results.is_empty(),
            format!("{ok}/{} verified certificates, digest {}", results.len(), short(&digest)),
        ),
        Some(e) => r.push(check, false, format!("{ok}/{} verified; first failure: {e}", results.len())),
    }
}

fn dwyer_n2_groups() -> Vec<EtypePresentation> {
    vec![
        demushkin(2, 2, 2).unwrap(),
        demushkin(3, 2, 1).unwrap(),
        demushkin(3, 4, 1).unwrap(),
        theta_abelian(3, 3, Some(1)).unwrap(),
        semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap(),
        free_product(demushkin(3, 2, 1).unwrap(), free(3, 1, None).unwrap()).unwrap(),
    ]
}

fn dwyer_n2() -> Result<Report> {
    let mut r = Report::default();
    for g in dwyer_n2_groups() {
        let classes = all_classes(g.p(), g.generator_count());
        let pairs: Vec<(&CohClass1, &CohClass1)> = classes
            .iter()
            .flat_map(|a| classes.iter().map(move |b| (a, b)))
            .collect();
        let outcomes = pairs
            .par_iter()
            .map(|&(a, b)| {
                let structural = cup(&g, a, b)?.is_zero();
                let found = hom_exists(g.presentation(), &[a.clone(), b.clone()], EnumerationOptions::default())?;
                Ok((structural, found, a, b))
            })
            .collect::<Result<Vec<_>>>()?;
        let vanishing = outcomes.iter().filter(|o| o.0).count();
        let disagreement = outcomes.iter().find(|o| o.0 != o.1);
        let detail = match disagreement {
            None => format!(
                "{}/{} pairs agree ({vanishing} with vanishing cup)",
                outcomes.len(),
                outcomes.len()
            ),
            Some((s, f, a, b)) => format!(
                "disagreement at {:?}, {:?}: cup vanishes {s}, U3 lift exists {f}",
                a.coeffs, b.coeffs
            ),
        };
        r.push(format!("dwyer-n2 {}", g.describe()), disagreement.is_none(), detail);
    }
    Ok(r)
}

fn strong_vanishing_groups() -> Vec<EtypePresentation> {
    vec![
        free(3, 2, None).unwrap(),
        demushkin(3, 2, 1).unwrap(),
        semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap(),
        free_product(demushkin(3, 2, 1).unwrap(), free(3, 1, None).unwrap()).unwrap(),
        demushkin(2, 2, 2).unwrap(),
    ]
}

/// Sequences satisfying the triviality condition: all of them when there are
/// at most 10^5 sequences in total, else 10^4 drawn by rejection.
fn trivial_sequences(g: &EtypePresentation, n: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<CohClass1>>, bool) {
    let classes = all_classes(g.p(), g.generator_count());
    let c = classes.len() as u128;
    let total = c.pow(n as u32);
    let is_trivial = |s: &[CohClass1]| triviality_condition(g, s).expect("classes on g");
    if total <= 100_000 {
        let seqs = (0..total as usize)
            .map(|code| {
                (0..n)
                    .map(|i| classes[(code / (c as usize).pow((n - 1 - i) as u32)) % c as usize].clone())
                    .collect::<Vec<_>>()
            })
            .filter(|s| is_trivial(s))
            .collect();
        (seqs, true)
    } else {
        let mut seqs = Vec::with_capacity(10_000);
        while seqs.len() < 10_000 {
            let s: Vec<_> = (0..n)
                .map(|_| classes[rng.gen_range(0..classes.len())].clone())
                .collect();
            if is_trivial(&s) {
                seqs.push(s);
            }
        }
        (seqs, false)
    }
}

fn strong_vanishing(seed: u64) -> Report {
    let mut r = Report::default();
    for (gi, g) in strong_vanishing_groups().iter().enumerate() {
        for n in [3usize, 4] {
            let mut rng = rng_for(seed, (gi * 16 + n) as u64);
            let (seqs, exhaustive) = trivial_sequences(g, n, &mut rng);
            let results: Vec<std::result::Result<String, String>> = seqs
                .par_iter()
                .map(|s| {
                    let fmt = |e: Error| format!("{:?}: {e}", s.iter().map(|a| &a.coeffs).collect::<Vec<_>>());
                    let w = strong_vanishing_witness(g, s, SearchOptions::default()).map_err(fmt)?;
                    Ok(Certificate::new(g, s, &w).map_err(fmt)?.digest())
                })
                .collect();
            let mode = if exhaustive { "exhaustive" } else { "sampled" };
            push_certificate_summary(
                &mut r,
                format!("strong-vanishing {} n={n} ({mode})", g.describe()),
                &results,
            );
        }
    }
    r
}

fn negative(seed: u64) -> Result<Report> {
    let g = demushkin(3, 2, 1).unwrap();
    let classes = all_classes(3, 2);
    let mut rng = rng_for(seed, 0);
    let mut seqs = Vec::with_capacity(1000);
    while seqs.len() < 1000 {
        let s: Vec<_> = (0..3).map(|_| classes[rng.gen_range(0..classes.len())].clone()).collect();
        if !triviality_condition(&g, &s)? {
            seqs.push(s);
        }
    }
    let found = seqs
        .par_iter()
        .map(|s| hom_exists(g.presentation(), s, EnumerationOptions::default()))
        .collect::<Result<Vec<_>>>()?;
    let bad = found.iter().position(|&f| f);
    let mut r = Report::default();
    let detail = match bad {
        None => "1000/1000 non-trivial sequences admit no U4 lift".to_string(),
        Some(i) => format!(
            "U4 lift found for non-trivial {:?}",
            seqs[i].iter().map(|a| &a.coeffs).collect::<Vec<_>>()
        ),
    };
    r.push(format!("negative {} n=3", g.describe()), bad.is_none(), detail);
    Ok(r)
}

fn triples_of(xs: &[Cochain1]) -> Vec<(&Cochain1, &Cochain1, &Cochain1)> {
    let mut out = Vec::with_capacity(xs.len().pow(3));
    for a in xs {
        for b in xs {
            for c in xs {
                out.push((a, b, c));
            }
        }
    }
    out
}

fn dwyer_n3_tables() -> Result<Report> {
    let mut r = Report::default();
    for (name, t) in corpus::all() {
        let coh = TableCohomology::new(&t)?;
        let pres = t.presentation()?;
        let homs = coh.h1_elements();
        let triples = triples_of(&homs);
        let rows = triples
            .par_iter()
            .map(|&(a, b, c)| {
                let (defined, vanishes) = match massey3_value_set(&coh, a, b, c) {
                    Ok(vs) => (true, vs.contains_zero()),
                    Err(Error::NotDefined(_)) => (false, false),
                    Err(e) => return Err(e),
                };
                let alphas: Vec<_> = [a, b, c].iter().map(|x| t.cochain_to_class(x)).collect();
                let u4 = hom_exists(&pres, &alphas, EnumerationOptions::default())?;
                let q = EnumerationOptions {
                    quotient_center: true,
                    ..Default::default()
                };
                let ubar4 = hom_exists(&pres, &alphas, q)?;
                Ok((defined, vanishes, u4, ubar4, alphas))
            })
            .collect::<Result<Vec<_>>>()?;
        let bad = rows.iter().find(|x| x.0 != x.3 || x.1 != x.2);
        let defined = rows.iter().filter(|x| x.0).count();
        let vanishing = rows.iter().filter(|x| x.1).count();
        let detail = match bad {
            None => format!(
                "{} triples agree: {defined} defined, {vanishing} vanishing",
                rows.len()
            ),
            Some((d, v, u4, ub, a)) => format!(
                "disagreement at {:?}: defined {d} / U4-bar {ub}, vanishing {v} / U4 {u4}",
                a.iter().map(|x| &x.coeffs).collect::<Vec<_>>()
            ),
        };
        r.push(format!("dwyer-n3 {name}"), bad.is_none(), detail);
    }
    Ok(r)
}

fn cochain(seed: u64) -> Result<Report> {
    let mut r = Report::default();
    for (gi, (name, t)) in corpus::all().into_iter().enumerate() {
        let mut rng = rng_for(seed, gi as u64);
        let mut failures = 0;
        for _ in 0..1000 {
            let c = Cochain1 {
                values: (0..t.order()).map(|_| rng.gen_range(0..t.p())).collect(),
            };
            if d2(&t, &d1(&t, &c)).values.iter().any(|&v| v != 0) {
                failures += 1;
            }
        }
        r.push(
            format!("cochain d2∘d1 {name}"),
            failures == 0,
            format!("{}/1000 random cochains", 1000 - failures),
        );

        let coh = TableCohomology::new(&t)?;
        let homs = coh.h1_elements();
        let triples = triples_of(&homs);
        let checks = triples
            .par_iter()
            .map(|&(a, b, c)| match massey3_value_set(&coh, a, b, c) {
                Ok(vs) => Ok(Some(vs.elements() == massey3_values_by_enumeration(&coh, a, b, c)?)),
                Err(Error::NotDefined(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        let defined = checks.iter().flatten().count();
        let exact = checks.iter().flatten().filter(|&&x| x).count();
        r.push(
            format!("cochain value-set cosets {name}"),
            exact == defined,
            format!("{exact}/{defined} defined triples match the enumerated value sets"),
        );
    }
    Ok(r)
}

fn determinism(seed: u64) -> Result<Report> {
    let mut r = Report::default();
    for suite in ["solver", "cyclic", "strong-vanishing"] {
        let one = run_suite(suite, SuiteConfig { jobs: 1, seed })?.to_json_lines();
        let four = run_suite(suite, SuiteConfig { jobs: 4, seed })?.to_json_lines();
        let again = run_suite(suite, SuiteConfig { jobs: 4, seed })?.to_json_lines();
        let same = one == four && four == again;
        let digest = hex_digest(one.as_bytes());
        r.push(
            format!("determinism {suite}"),
            same,
            if same {
                format!("jobs 1 and 4 byte-identical, digest {}", short(&digest))
            } else {
                "reports differ between runs".to_string()
            },
        );
    }
    Ok(r)
}
