//! Finitely presented pro-p groups of elementary type.
//!
//! A presentation is a generator count plus relators. Relators are kept as
//! formal products of powers and commutators for display and reindexing, and as
//! a fully expanded [`Word`] for evaluation. Exponents are p-adic integers
//! truncated modulo `p^K`, where `K` is the presentation's precision.
//!
//! Generators are positional. Free products place the left factor's generators
//! first; a semidirect product with Z_p appends the new generator last.

use std::fmt;

use crate::error::{Error, Result};
use crate::fp::{is_prime, Fp};
use crate::unitriangular::{exponent_log, UniTriangular};

pub const DEFAULT_PRECISION: u32 = 8;

/// Display label of generator `i` (1-based, as in `x1`).
pub fn generator_label(i: usize) -> String {
    format!("x{}", i + 1)
}

/// A word in the generators; each exponent is a residue modulo `p^K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    pub letters: Vec<(usize, u64)>,
}

impl Word {
    pub fn new() -> Self {
        Word::default()
    }

    /// Builds a word from signed exponents, reduced modulo `modulus = p^K`.
    pub fn from_signed(letters: &[(usize, i64)], modulus: u64) -> Self {
        Word {
            letters: letters
                .iter()
                .map(|&(g, e)| (g, reduce_signed(e, modulus)))
                .collect(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|&(g, _)| g).max()
    }

    /// Exponent sum of generator `g`, as a residue mod `modulus`.
    pub fn exponent_sum(&self, g: usize, modulus: u64) -> u64 {
        self.letters
            .iter()
            .filter(|&&(h, _)| h == g)
            .fold(0u128, |acc, &(_, e)| (acc + e as u128) % modulus as u128) as u64
    }
}

pub(crate) fn reduce_signed(e: i64, modulus: u64) -> u64 {
    (e as i128).rem_euclid(modulus as i128) as u64
}

fn signed_repr(e: u64, modulus: u64) -> i128 {
    if e as u128 * 2 > modulus as u128 {
        e as i128 - modulus as i128
    } else {
        e as i128
    }
}

/// One factor of a relator as written at construction time.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Factor {
    Power { generator: usize, exponent: u64 },
    Commutator { left: usize, right: usize },
}

impl Factor {
    fn shifted(&self, by: usize) -> Factor {
        match *self {
            Factor::Power { generator, exponent } => Factor::Power {
                generator: generator + by,
                exponent,
            },
            Factor::Commutator { left, right } => Factor::Commutator {
                left: left + by,
                right: right + by,
            },
        }
    }
}

/// A relator: its formal factors and their expansion into letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relator {
    factors: Vec<Factor>,
    word: Word,
}

impl Relator {
    pub fn new(factors: Vec<Factor>, modulus: u64) -> Self {
        let mut letters = Vec::new();
        for f in &factors {
            match *f {
                Factor::Power { generator, exponent } => letters.push((generator, exponent % modulus)),
                Factor::Commutator { left, right } => {
                    letters.push((left, 1 % modulus));
                    letters.push((right, 1 % modulus));
                    letters.push((left, modulus - 1));
                    letters.push((right, modulus - 1));
                }
            }
        }
        Relator {
            factors,
            word: Word { letters },
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    fn shifted(&self, by: usize, modulus: u64) -> Relator {
        Relator::new(self.factors.iter().map(|f| f.shifted(by)).collect(), modulus)
    }

    /// Human-readable form such as `x1^3[x1,x2]`.
    pub fn display(&self, modulus: u64) -> String {
        let mut out = String::new();
        let mut prev_power = false;
        for f in &self.factors {
            match *f {
                Factor::Power { generator, exponent } => {
                    if prev_power {
                        out.push(' ');
                    }
                    out.push_str(&generator_label(generator));
                    let e = signed_repr(exponent, modulus);
                    if e != 1 {
                        out.push_str(&format!("^{e}"));
                    }
                    prev_power = true;
                }
                Factor::Commutator { left, right } => {
                    out.push_str(&format!(
                        "[{},{}]",
                        generator_label(left),
                        generator_label(right)
                    ));
                    prev_power = false;
                }
            }
        }
        if out.is_empty() {
            out.push('1');
        }
        out
    }
}

/// Generators and relators with p-adic exponents truncated mod `p^precision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    field: Fp,
    precision: u32,
    generators: usize,
    relators: Vec<Relator>,
}

impl Presentation {
    pub fn new(p: u32, precision: u32, generators: usize, relators: Vec<Relator>) -> Result<Self> {
        let field = Fp::new(p)?;
        check_modulus(p, precision)?;
        let pres = Presentation {
            field,
            precision,
            generators,
            relators,
        };
        for (i, r) in pres.relators.iter().enumerate() {
            if r.word.max_generator().is_some_and(|g| g >= generators) {
                return Err(Error::Input(format!(
                    "relator {i} mentions a generator beyond {generators}"
                )));
            }
        }
        Ok(pres)
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^precision`, the modulus of stored exponents.
    pub fn modulus(&self) -> u64 {
        (self.p() as u64).pow(self.precision)
    }

    pub fn generator_count(&self) -> usize {
        self.generators
    }

    pub fn relators(&self) -> &[Relator] {
        &self.relators
    }

    pub fn relator_strings(&self) -> Vec<String> {
        let m = self.modulus();
        self.relators.iter().map(|r| r.display(m)).collect()
    }

    /// Evaluates a word at a generator assignment in U_{n+1}(F_p). Exponents are
    /// reduced modulo the exponent `p^M` of the target, which requires `M <= K`.
    pub fn evaluate_word(&self, word: &Word, images: &[UniTriangular]) -> Result<UniTriangular> {
        let (n, _) = self.check_images(images)?;
        let e = (self.p() as u64).pow(exponent_log(self.p(), n));
        let mut acc = UniTriangular::identity(self.field, n);
        for &(g, exp) in &word.letters {
            let img = images.get(g).ok_or_else(|| {
                Error::Input(format!("no image for generator {}", generator_label(g)))
            })?;
            acc = acc.mul_unchecked(&img.power((exp % e) as i64));
        }
        Ok(acc)
    }

    fn check_images(&self, images: &[UniTriangular]) -> Result<(usize, Fp)> {
        if images.len() != self.generators {
            return Err(Error::Dimension(format!(
                "{} images for {} generators",
                images.len(),
                self.generators
            )));
        }
        let n = images.first().map_or(1, UniTriangular::n);
        for img in images {
            if img.field() != self.field {
                return Err(Error::Modulus {
                    left: img.p(),
                    right: self.p(),
                });
            }
            if img.n() != n {
                return Err(Error::Dimension("images of different sizes".into()));
            }
        }
        let needed = exponent_log(self.p(), n);
        if needed > self.precision {
            return Err(Error::PrecisionTooLow {
                needed,
                have: self.precision,
            });
        }
        Ok((n, self.field))
    }

    /// Index of the first relator not sent to the identity, if any.
    pub fn first_failing_relator(&self, images: &[UniTriangular]) -> Result<Option<usize>> {
        self.check_images(images)?;
        for (i, r) in self.relators.iter().enumerate() {
            if !self.evaluate_word(&r.word, images)?.is_identity() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Same as [`Presentation::first_failing_relator`], but in U_{n+1}/Z.
    pub fn first_failing_relator_mod_center(&self, images: &[UniTriangular]) -> Result<Option<usize>> {
        self.check_images(images)?;
        for (i, r) in self.relators.iter().enumerate() {
            if !self.evaluate_word(&r.word, images)?.is_central() {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// `true` iff the assignment extends to a homomorphism into U_{n+1}(F_p).
    pub fn verify_hom(&self, images: &[UniTriangular]) -> Result<bool> {
        Ok(self.first_failing_relator(images)?.is_none())
    }
}

fn check_modulus(p: u32, precision: u32) -> Result<()> {
    if precision == 0 {
        return Err(Error::Input("precision must be at least 1".into()));
    }
    if (p as u64).checked_pow(precision).is_none_or(|m| m > (1u64 << 62)) {
        return Err(Error::Input(format!("p^{precision} overflows the exponent range")));
    }
    Ok(())
}

/// An orientation G -> 1 + pZ_p given on generators, truncated mod `p^K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub values: Vec<u64>,
    pub torsion_free: bool,
}

impl Orientation {
    pub fn trivial(d: usize) -> Self {
        Orientation {
            values: vec![1; d],
            torsion_free: true,
        }
    }

    /// Checks that every value is a principal unit, and lies in `1 + 4Z_2` when
    /// `p = 2` (the torsion-free case, which is the only one accepted here).
    pub fn validate(&self, p: u32, precision: u32) -> Result<()> {
        let modulus = (p as u64).pow(precision);
        if p == 2 && modulus < 4 {
            return Err(Error::Input(
                "p = 2 needs precision >= 2 to represent a torsion-free orientation".into(),
            ));
        }
        for (i, &v) in self.values.iter().enumerate() {
            if v >= modulus {
                return Err(Error::Input(format!(
                    "orientation value {v} of {} is not reduced mod {p}^{precision}",
                    generator_label(i)
                )));
            }
            if v % p as u64 != 1 % p as u64 {
                return Err(Error::Input(format!(
                    "orientation value {v} of {} is not congruent to 1 mod {p}",
                    generator_label(i)
                )));
            }
            if p == 2 && v % 4 != 1 {
                return Err(Error::Input(format!(
                    "orientation is not torsion-free: value {v} of {} is not congruent to 1 mod 4",
                    generator_label(i)
                )));
            }
        }
        if !self.torsion_free {
            return Err(Error::Input("orientation must be torsion-free".into()));
        }
        Ok(())
    }
}

/// How an elementary-type group was built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Construction {
    Free { d: usize },
    Demushkin { d: usize, f: u32 },
    ThetaAbelian { d: usize, f: Option<u32> },
    FreeProduct {
        left: Box<EtypePresentation>,
        right: Box<EtypePresentation>,
    },
    SemidirectZp { base: Box<EtypePresentation> },
}

/// An oriented pro-p group of elementary type together with its construction tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtypePresentation {
    presentation: Presentation,
    orientation: Orientation,
    tree: Construction,
}

/// Builds leaf nodes at a fixed prime and precision.
#[derive(Debug, Clone, Copy)]
pub struct EtypeBuilder {
    p: u32,
    precision: u32,
}

impl EtypeBuilder {
    pub fn new(p: u32, precision: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        check_modulus(p, precision)?;
        Ok(EtypeBuilder { p, precision })
    }

    fn modulus(&self) -> u64 {
        (self.p as u64).pow(self.precision)
    }

    fn q(&self, f: u32) -> u64 {
        (self.p as u64)
            .checked_pow(f)
            .map_or(0, |q| q % self.modulus())
    }

    fn check_f(&self, f: u32, what: &str) -> Result<()> {
        if f == 0 {
            return Err(Error::Input(format!("{what}: f must be at least 1")));
        }
        if self.p == 2 && f < 2 {
            return Err(Error::Input(format!(
                "{what}: orientation is not torsion-free for p = 2 and f = 1 (need f >= 2)"
            )));
        }
        Ok(())
    }

    /// Free pro-p group on `d` generators with orientation `theta` (trivial if `None`).
    pub fn free(&self, d: usize, theta: Option<Vec<u64>>) -> Result<EtypePresentation> {
        if d == 0 {
            return Err(Error::Input("free group needs d >= 1".into()));
        }
        let orientation = match theta {
            Some(values) => {
                if values.len() != d {
                    return Err(Error::Dimension(format!(
                        "{} orientation values for {d} generators",
                        values.len()
                    )));
                }
                Orientation {
                    values,
                    torsion_free: true,
                }
            }
            None => Orientation::trivial(d),
        };
        orientation.validate(self.p, self.precision)?;
        Ok(EtypePresentation {
            presentation: Presentation::new(self.p, self.precision, d, vec![])?,
            orientation,
            tree: Construction::Free { d },
        })
    }

    /// `<x1..xd | x1^{p^f} [x1,x2] .. [x_{d-1},x_d]>` with `x2 -> 1 + p^f`.
    pub fn demushkin(&self, d: usize, f: u32) -> Result<EtypePresentation> {
        if d < 2 || !d.is_multiple_of(2) {
            return Err(Error::Input(format!(
                "demushkin: d must be even and at least 2, got {d}"
            )));
        }
        self.check_f(f, "demushkin")?;
        let m = self.modulus();
        let q = self.q(f);
        let mut factors = vec![Factor::Power {
            generator: 0,
            exponent: q,
        }];
        for i in (0..d).step_by(2) {
            factors.push(Factor::Commutator {
                left: i,
                right: i + 1,
            });
        }
        let mut values = vec![1 % m; d];
        values[1] = (1 + q) % m;
        let orientation = Orientation {
            values,
            torsion_free: true,
        };
        orientation.validate(self.p, self.precision)?;
        Ok(EtypePresentation {
            presentation: Presentation::new(self.p, self.precision, d, vec![Relator::new(factors, m)])?,
            orientation,
            tree: Construction::Demushkin { d, f },
        })
    }

    /// The θ-abelian group on `d` generators. With `f = Some(f)` the first
    /// generator acts on the others by `x0 x_h x0^{-1} = x_h^{1+p^f}`; with `None`
    /// all generators commute and the orientation is trivial.
    pub fn theta_abelian(&self, d: usize, f: Option<u32>) -> Result<EtypePresentation> {
        if d == 0 {
            return Err(Error::Input("theta_abelian needs d >= 1".into()));
        }
        let m = self.modulus();
        let mut relators = Vec::new();
        let mut values = vec![1 % m; d];
        let first_kernel = match f {
            Some(f) => {
                self.check_f(f, "theta_abelian")?;
                let q = self.q(f);
                values[0] = (1 + q) % m;
                for h in 1..d {
                    relators.push(Relator::new(
                        vec![
                            Factor::Commutator { left: 0, right: h },
                            Factor::Power {
                                generator: h,
                                exponent: (m - q) % m,
                            },
                        ],
                        m,
                    ));
                }
                1
            }
            None => 0,
        };
        for h in first_kernel..d {
            for l in h + 1..d {
                relators.push(Relator::new(
                    vec![Factor::Commutator { left: h, right: l }],
                    m,
                ));
            }
        }
        let orientation = Orientation {
            values,
            torsion_free: true,
        };
        orientation.validate(self.p, self.precision)?;
        Ok(EtypePresentation {
            presentation: Presentation::new(self.p, self.precision, d, relators)?,
            orientation,
            tree: Construction::ThetaAbelian { d, f },
        })
    }
}

pub fn free(p: u32, d: usize, theta: Option<Vec<u64>>) -> Result<EtypePresentation> {
    EtypeBuilder::new(p, DEFAULT_PRECISION)?.free(d, theta)
}

pub fn demushkin(p: u32, d: usize, f: u32) -> Result<EtypePresentation> {
    EtypeBuilder::new(p, DEFAULT_PRECISION)?.demushkin(d, f)
}

pub fn theta_abelian(p: u32, d: usize, f: Option<u32>) -> Result<EtypePresentation> {
    EtypeBuilder::new(p, DEFAULT_PRECISION)?.theta_abelian(d, f)
}

/// Free pro-p product; the left factor's generators come first.
pub fn free_product(left: EtypePresentation, right: EtypePresentation) -> Result<EtypePresentation> {
    if left.p() != right.p() || left.precision() != right.precision() {
        return Err(Error::Input(format!(
            "free product of factors over (p, K) = ({}, {}) and ({}, {})",
            left.p(),
            left.precision(),
            right.p(),
            right.precision()
        )));
    }
    let m = left.modulus();
    let d1 = left.generator_count();
    let mut relators = left.presentation.relators.clone();
    relators.extend(right.presentation.relators.iter().map(|r| r.shifted(d1, m)));
    let mut values = left.orientation.values.clone();
    values.extend_from_slice(&right.orientation.values);
    let presentation = Presentation::new(
        left.p(),
        left.precision(),
        d1 + right.generator_count(),
        relators,
    )?;
    Ok(EtypePresentation {
        presentation,
        orientation: Orientation {
            values,
            torsion_free: left.orientation.torsion_free && right.orientation.torsion_free,
        },
        tree: Construction::FreeProduct {
            left: Box::new(left),
            right: Box::new(right),
        },
    })
}

/// `Z_p ⋊ G0` with `x z x^{-1} = z^{θ(x)}`; the new generator `z` comes last and
/// the orientation is extended by `z -> 1`.
pub fn semidirect_zp(base: EtypePresentation) -> Result<EtypePresentation> {
    let m = base.modulus();
    let d0 = base.generator_count();
    let z = d0;
    let mut relators = base.presentation.relators.clone();
    for x in 0..d0 {
        let theta = base.orientation.values[x];
        relators.push(Relator::new(
            vec![
                Factor::Power {
                    generator: x,
                    exponent: 1 % m,
                },
                Factor::Power {
                    generator: z,
                    exponent: 1 % m,
                },
                Factor::Power {
                    generator: x,
                    exponent: m - 1,
                },
                Factor::Power {
                    generator: z,
                    exponent: (m - theta % m) % m,
                },
            ],
            m,
        ));
    }
    let mut values = base.orientation.values.clone();
    values.push(1 % m);
    let presentation = Presentation::new(base.p(), base.precision(), d0 + 1, relators)?;
    Ok(EtypePresentation {
        presentation,
        orientation: Orientation {
            values,
            torsion_free: base.orientation.torsion_free,
        },
        tree: Construction::SemidirectZp {
            base: Box::new(base),
        },
    })
}

impl EtypePresentation {
    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn orientation(&self) -> &Orientation {
        &self.orientation
    }

    pub fn tree(&self) -> &Construction {
        &self.tree
    }

    pub fn p(&self) -> u32 {
        self.presentation.p()
    }

    pub fn field(&self) -> Fp {
        self.presentation.field()
    }

    pub fn precision(&self) -> u32 {
        self.presentation.precision()
    }

    pub fn modulus(&self) -> u64 {
        self.presentation.modulus()
    }

    pub fn generator_count(&self) -> usize {
        self.presentation.generator_count()
    }

    pub fn relators(&self) -> &[Relator] {
        self.presentation.relators()
    }

    pub fn evaluate_word(&self, word: &Word, images: &[UniTriangular]) -> Result<UniTriangular> {
        self.presentation.evaluate_word(word, images)
    }

    pub fn verify_hom(&self, images: &[UniTriangular]) -> Result<bool> {
        self.presentation.verify_hom(images)
    }

    pub fn first_failing_relator(&self, images: &[UniTriangular]) -> Result<Option<usize>> {
        self.presentation.first_failing_relator(images)
    }

    /// Re-derives the presentation from the construction tree and checks every
    /// node's invariants, including zero exponent sums mod p for all relators.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = self.rebuild()?;
        if rebuilt.presentation != self.presentation || rebuilt.orientation != self.orientation {
            return Err(Error::Input(
                "presentation does not match its construction tree".into(),
            ));
        }
        self.orientation.validate(self.p(), self.precision())?;
        if self.orientation.values.len() != self.generator_count() {
            return Err(Error::Dimension("orientation length".into()));
        }
        let p = self.p() as u64;
        for (i, r) in self.relators().iter().enumerate() {
            for g in 0..self.generator_count() {
                if r.word().exponent_sum(g, self.modulus()) % p != 0 {
                    return Err(Error::Input(format!(
                        "relator {i} has nonzero exponent sum in {} mod p",
                        generator_label(g)
                    )));
                }
            }
        }
        Ok(())
    }

    fn rebuild(&self) -> Result<EtypePresentation> {
        let b = EtypeBuilder::new(self.p(), self.precision())?;
        match &self.tree {
            Construction::Free { d } => b.free(*d, Some(self.orientation.values.clone())),
            Construction::Demushkin { d, f } => b.demushkin(*d, *f),
            Construction::ThetaAbelian { d, f } => b.theta_abelian(*d, *f),
            Construction::FreeProduct { left, right } => {
                left.validate()?;
                right.validate()?;
                free_product((**left).clone(), (**right).clone())
            }
            Construction::SemidirectZp { base } => {
                base.validate()?;
                semidirect_zp((**base).clone())
            }
        }
    }

    /// Short description of the tree, e.g. `semidirect_zp(demushkin(d=2,f=1))`.
    pub fn describe(&self) -> String {
        match &self.tree {
            Construction::Free { d } => format!("free(d={d})"),
            Construction::Demushkin { d, f } => format!("demushkin(d={d},f={f})"),
            Construction::ThetaAbelian { d, f } => match f {
                Some(f) => format!("theta_abelian(d={d},f={f})"),
                None => format!("theta_abelian(d={d},trivial)"),
            },
            Construction::FreeProduct { left, right } => {
                format!("free_product({},{})", left.describe(), right.describe())
            }
            Construction::SemidirectZp { base } => format!("semidirect_zp({})", base.describe()),
        }
    }
}

impl fmt::Display for EtypePresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels = self.presentation.relator_strings();
        write!(
            f,
            "<{} | {}>",
            (0..self.generator_count())
                .map(generator_label)
                .collect::<Vec<_>>()
                .join(", "),
            rels.join(", ")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn u(p: u32, n: usize) -> (Fp, UniTriangular) {
        let f = Fp::new(p).unwrap();
        (f, UniTriangular::shift(f, n))
    }

    #[test]
    fn free_group_constructions() {
        let g = free(3, 2, None).unwrap();
        assert_eq!(g.generator_count(), 2);
        assert!(g.relators().is_empty());
        assert!(free(2, 1, Some(vec![5])).is_ok());
        let err = free(2, 1, Some(vec![3])).unwrap_err();
        assert!(err.to_string().contains("torsion-free"), "{err}");
        assert!(free(3, 1, Some(vec![2])).is_err());
    }

    #[test]
    fn demushkin_presentation() {
        let g = demushkin(3, 2, 1).unwrap();
        assert_eq!(g.presentation().relator_strings(), vec!["x1^3[x1,x2]"]);
        assert_eq!(g.orientation().values, vec![1, 4]);
        let g4 = demushkin(3, 4, 1).unwrap();
        assert_eq!(g4.presentation().relator_strings(), vec!["x1^3[x1,x2][x3,x4]"]);
        assert!(demushkin(3, 3, 1).is_err());
        assert!(demushkin(3, 0, 1).is_err());
        let err = demushkin(2, 2, 1).unwrap_err();
        assert!(err.to_string().contains("torsion-free"));
        assert!(demushkin(2, 2, 2).is_ok());
    }

    #[test]
    fn semidirect_relators() {
        let g = semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap();
        assert_eq!(g.generator_count(), 3);
        assert_eq!(
            g.presentation().relator_strings(),
            vec!["x1^3[x1,x2]", "x1 x3 x1^-1 x3^-1", "x2 x3 x2^-1 x3^-4"]
        );
        assert_eq!(g.orientation().values, vec![1, 4, 1]);
        g.validate().unwrap();
    }

    #[test]
    fn free_product_of_frees() {
        let g = free_product(free(3, 1, None).unwrap(), free(3, 1, None).unwrap()).unwrap();
        assert_eq!(g.generator_count(), 2);
        assert!(g.relators().is_empty());
        let h = free_product(demushkin(3, 2, 1).unwrap(), demushkin(3, 2, 1).unwrap()).unwrap();
        assert_eq!(
            h.presentation().relator_strings(),
            vec!["x1^3[x1,x2]", "x3^3[x3,x4]"]
        );
        assert!(free_product(free(3, 1, None).unwrap(), free(5, 1, None).unwrap()).is_err());
    }

    #[test]
    fn theta_abelian_presentations() {
        let g = theta_abelian(3, 3, Some(1)).unwrap();
        assert_eq!(
            g.presentation().relator_strings(),
            vec!["[x1,x2]x2^-3", "[x1,x3]x3^-3", "[x2,x3]"]
        );
        assert_eq!(g.orientation().values, vec![4, 1, 1]);
        let t = theta_abelian(3, 2, None).unwrap();
        assert_eq!(t.presentation().relator_strings(), vec!["[x1,x2]"]);
        assert!(theta_abelian(2, 2, Some(1)).is_err());
    }

    #[test]
    fn every_corpus_group_validates() {
        let corpus = vec![
            free(3, 2, None).unwrap(),
            free(2, 2, Some(vec![5, 1])).unwrap(),
            demushkin(3, 2, 1).unwrap(),
            demushkin(2, 2, 2).unwrap(),
            demushkin(3, 4, 1).unwrap(),
            theta_abelian(3, 3, Some(1)).unwrap(),
            theta_abelian(5, 2, None).unwrap(),
            semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap(),
            semidirect_zp(semidirect_zp(free(3, 1, Some(vec![4])).unwrap()).unwrap()).unwrap(),
            free_product(demushkin(3, 2, 1).unwrap(), free(3, 1, None).unwrap()).unwrap(),
        ];
        for g in corpus {
            g.validate().unwrap_or_else(|e| panic!("{}: {e}", g.describe()));
        }
    }

    #[test]
    fn evaluate_demushkin_relator() {
        let (f, a) = u(3, 3);
        let b = UniTriangular::elementary(f, 3, 0, 2, 1);
        let g = demushkin(3, 2, 1).unwrap();
        let w = g.relators()[0].word();
        assert!(g.evaluate_word(w, &[a.clone(), b.clone()]).unwrap().is_identity());
        assert!(g.evaluate_word(&Word::new(), &[a.clone(), b.clone()]).unwrap().is_identity());
        assert!(g.verify_hom(&[a.clone(), b]).unwrap());
        let id = UniTriangular::identity(f, 3);
        assert!(!g.verify_hom(&[a.clone(), id.clone()]).unwrap());
        assert_eq!(
            g.evaluate_word(w, &[a.clone(), id]).unwrap(),
            UniTriangular::elementary(f, 3, 0, 3, 1)
        );
    }

    #[test]
    fn semidirect_relator_detects_order() {
        let (f, g) = u(3, 3);
        let sd = semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap();
        // x2 z x2^-1 z^-4 with x2 -> I and z -> g gives g^-3 = (I + E14)^-1
        let w = sd.relators()[2].word();
        let id = UniTriangular::identity(f, 3);
        let out = sd.evaluate_word(w, &[id.clone(), id, g.clone()]).unwrap();
        assert!(!out.is_identity());
        assert_eq!(out, g.power(-3));
    }

    #[test]
    fn precision_too_low() {
        let g = EtypeBuilder::new(2, 2).unwrap().demushkin(2, 2).unwrap();
        let f = Fp::new(2).unwrap();
        let imgs = vec![UniTriangular::identity(f, 5); 2];
        assert_eq!(
            g.verify_hom(&imgs),
            Err(Error::PrecisionTooLow { needed: 3, have: 2 })
        );
    }

    #[test]
    fn free_groups_accept_everything() {
        let g = free(5, 3, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Fp::new(5).unwrap();
        let imgs: Vec<_> = (0..3)
            .map(|_| {
                let e = (0..10).map(|_| rng.gen_range(0..5)).collect();
                UniTriangular::from_entries(f, 4, e).unwrap()
            })
            .collect();
        assert!(g.verify_hom(&imgs).unwrap());
    }

    fn random_images(rng: &mut ChaCha8Rng, f: Fp, n: usize, count: usize) -> Vec<UniTriangular> {
        (0..count)
            .map(|_| {
                let e = (0..n * (n + 1) / 2).map(|_| rng.gen_range(0..f.p())).collect();
                UniTriangular::from_entries(f, n, e).unwrap()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn evaluation_is_a_monoid_homomorphism(
            p in prop::sample::select(vec![2u32, 3, 5]),
            n in 1usize..6,
            seed in any::<u64>(),
            w1 in prop::collection::vec((0usize..3, -40i64..40), 0..8),
            w2 in prop::collection::vec((0usize..3, -40i64..40), 0..8),
        ) {
            let pres = Presentation::new(p, DEFAULT_PRECISION, 3, vec![]).unwrap();
            let m = pres.modulus();
            let f = pres.field();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let imgs = random_images(&mut rng, f, n, 3);
            let (a, b) = (Word::from_signed(&w1, m), Word::from_signed(&w2, m));
            let lhs = pres.evaluate_word(&a.concat(&b), &imgs).unwrap();
            let rhs = pres.evaluate_word(&a, &imgs).unwrap().mul(&pres.evaluate_word(&b, &imgs).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn exponent_reduction_is_sound(
            p in prop::sample::select(vec![2u32, 3, 5]),
            n in 1usize..7,
            seed in any::<u64>(),
            w in prop::collection::vec((0usize..2, -3000i64..3000), 0..6),
        ) {
            let pres = Presentation::new(p, DEFAULT_PRECISION, 2, vec![]).unwrap();
            let f = pres.field();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let imgs = random_images(&mut rng, f, n, 2);
            // full-precision reference: repeated multiplication by g or g^-1
            let mut want = UniTriangular::identity(f, n);
            for &(g, e) in &w {
                let step = if e >= 0 { imgs[g].clone() } else { imgs[g].inv() };
                for _ in 0..e.unsigned_abs() {
                    want = want.mul(&step).unwrap();
                }
            }
            let got = pres.evaluate_word(&Word::from_signed(&w, pres.modulus()), &imgs).unwrap();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn semidirect_projection(seed in any::<u64>(), n in 2usize..5) {
            let base = demushkin(3, 2, 1).unwrap();
            let sd = semidirect_zp(base.clone()).unwrap();
            let f = Fp::new(3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut imgs = random_images(&mut rng, f, n, 2);
            if rng.gen_bool(0.5) {
                // a homomorphism of the base: [b, a] = a^3
                let a = UniTriangular::shift(f, n);
                let b = if n >= 3 {
                    crate::unitriangular::solve_commutator_equation(&a, &a.power(3), 3).unwrap()
                } else {
                    UniTriangular::identity(f, n)
                };
                imgs = vec![a, b];
            }
            let mut with_z = imgs.clone();
            with_z.push(UniTriangular::identity(f, n));
            prop_assert_eq!(sd.verify_hom(&with_z).unwrap(), base.verify_hom(&imgs).unwrap());
        }
    }
}
