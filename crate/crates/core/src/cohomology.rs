//! H^1, cup products and the triviality condition, computed over the
//! construction tree of an elementary-type group.
//!
//! A class in H^1(G, F_p) = Hom(G, F_p) is given by its values on generators.
//! Cup products land in an [`H2Element`] shaped like the tree. Only whether a
//! cup product vanishes carries meaning; signs are normalized so that the
//! Demushkin pairing of the first two dual classes is `+1`.

use crate::error::{Error, Result};
use crate::fp::{Fp, FpScalar};
use crate::groups::{Construction, EtypePresentation, Presentation, Word};
use crate::unitriangular::UniTriangular;

/// A class in H^1(G, F_p), indexed by generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CohClass1 {
    pub coeffs: Vec<FpScalar>,
}

impl CohClass1 {
    pub fn new(coeffs: Vec<FpScalar>) -> Self {
        CohClass1 { coeffs }
    }

    pub fn zero(d: usize) -> Self {
        CohClass1 { coeffs: vec![0; d] }
    }

    /// The dual basis class `χ_j` (0-based `j`).
    pub fn dual(d: usize, j: usize) -> Self {
        let mut c = Self::zero(d);
        c.coeffs[j] = 1;
        c
    }

    pub fn from_signed(field: Fp, coeffs: &[i64]) -> Self {
        CohClass1 {
            coeffs: coeffs.iter().map(|&c| field.from_i64(c)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, field: Fp, other: &Self) -> Self {
        CohClass1 {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| field.add(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, field: Fp, s: FpScalar) -> Self {
        CohClass1 {
            coeffs: self.coeffs.iter().map(|&a| field.mul(a, s)).collect(),
        }
    }

    /// Restriction to the generators `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        CohClass1 {
            coeffs: self.coeffs[start..start + len].to_vec(),
        }
    }

    /// `Some(λ)` with `self = λ·other`, provided `other` is nonzero.
    pub fn ratio_to(&self, field: Fp, other: &Self) -> Option<FpScalar> {
        let j = other.coeffs.iter().position(|&c| c != 0)?;
        let lambda = field.mul(self.coeffs[j], field.inv(other.coeffs[j])?);
        (other.scale(field, lambda) == *self).then_some(lambda)
    }
}

/// Checks that `alpha` is a class on `g`: right length, reduced coefficients.
pub fn check_class(g: &EtypePresentation, alpha: &CohClass1) -> Result<()> {
    if alpha.len() != g.generator_count() {
        return Err(Error::Dimension(format!(
            "class of length {} on a group with {} generators",
            alpha.len(),
            g.generator_count()
        )));
    }
    if let Some(&c) = alpha.coeffs.iter().find(|&&c| c >= g.p()) {
        return Err(Error::Input(format!("coefficient {c} is not a residue mod {}", g.p())));
    }
    Ok(())
}

/// An element of H^2(G, F_p) in the shape of the construction tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum H2Element {
    /// Free groups: H^2 = 0.
    Zero,
    /// Demushkin groups: H^2 = F_p.
    Scalar(FpScalar),
    /// Free products: one component per factor.
    Pair(Box<H2Element>, Box<H2Element>),
    /// `Z_p ⋊ G0`: the H^2(G0) part and the H^1(G0)⌣ψ part.
    Semidirect { base: Box<H2Element>, psi: Vec<FpScalar> },
    /// θ-abelian nodes: values on the node's relators.
    ThetaAbelian(Vec<FpScalar>),
}

impl H2Element {
    pub fn is_zero(&self) -> bool {
        match self {
            H2Element::Zero => true,
            H2Element::Scalar(s) => *s == 0,
            H2Element::Pair(a, b) => a.is_zero() && b.is_zero(),
            H2Element::Semidirect { base, psi } => base.is_zero() && psi.iter().all(|&c| c == 0),
            H2Element::ThetaAbelian(v) => v.iter().all(|&c| c == 0),
        }
    }

    fn add(&self, field: Fp, other: &Self) -> Result<Self> {
        let vec_add = |a: &[FpScalar], b: &[FpScalar]| -> Vec<FpScalar> {
            a.iter().zip(b).map(|(&x, &y)| field.add(x, y)).collect()
        };
        Ok(match (self, other) {
            (H2Element::Zero, H2Element::Zero) => H2Element::Zero,
            (H2Element::Scalar(a), H2Element::Scalar(b)) => H2Element::Scalar(field.add(*a, *b)),
            (H2Element::Pair(a1, b1), H2Element::Pair(a2, b2)) => {
                H2Element::Pair(Box::new(a1.add(field, a2)?), Box::new(b1.add(field, b2)?))
            }
            (
                H2Element::Semidirect { base: b1, psi: p1 },
                H2Element::Semidirect { base: b2, psi: p2 },
            ) => H2Element::Semidirect {
                base: Box::new(b1.add(field, b2)?),
                psi: vec_add(p1, p2),
            },
            (H2Element::ThetaAbelian(a), H2Element::ThetaAbelian(b)) => {
                H2Element::ThetaAbelian(vec_add(a, b))
            }
            _ => return Err(Error::Internal("H^2 elements of different shapes".into())),
        })
    }

    fn scale(&self, field: Fp, s: FpScalar) -> Self {
        let vec_scale = |a: &[FpScalar]| a.iter().map(|&x| field.mul(x, s)).collect();
        match self {
            H2Element::Zero => H2Element::Zero,
            H2Element::Scalar(a) => H2Element::Scalar(field.mul(*a, s)),
            H2Element::Pair(a, b) => H2Element::Pair(Box::new(a.scale(field, s)), Box::new(b.scale(field, s))),
            H2Element::Semidirect { base, psi } => H2Element::Semidirect {
                base: Box::new(base.scale(field, s)),
                psi: vec_scale(psi),
            },
            H2Element::ThetaAbelian(v) => H2Element::ThetaAbelian(vec_scale(v)),
        }
    }
}

/// A class on `Z_p ⋊ G0` split as `α|_{G0} + b·ψ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemidirectH1Split {
    pub restriction: CohClass1,
    pub psi_coefficient: FpScalar,
}

impl SemidirectH1Split {
    pub fn reassemble(&self) -> CohClass1 {
        let mut coeffs = self.restriction.coeffs.clone();
        coeffs.push(self.psi_coefficient);
        CohClass1 { coeffs }
    }
}

pub fn h1_dim(g: &EtypePresentation) -> usize {
    g.generator_count()
}

/// Value of `alpha` on the image of `w`: the exponent sums weighted by the class.
pub fn h1_eval(field: Fp, alpha: &CohClass1, w: &Word) -> FpScalar {
    let p = field.p() as u64;
    w.letters.iter().fold(0, |acc, &(g, e)| {
        field.add(acc, field.mul(alpha.coeffs[g], (e % p) as FpScalar))
    })
}

/// Values of the (0, 2) entry of every relator under `x -> I + α(x)E12 + β(x)E23`.
///
/// The E13 entries of the lift do not matter because relators have exponent
/// sums divisible by p, so this is the obstruction to a U_3 lift of (α, β).
pub fn relator_trace(pres: &Presentation, alpha: &CohClass1, beta: &CohClass1) -> Result<Vec<FpScalar>> {
    let field = pres.field();
    let images: Vec<_> = alpha
        .coeffs
        .iter()
        .zip(&beta.coeffs)
        .map(|(&a, &b)| UniTriangular::with_superdiagonal(field, &[a, b]))
        .collect();
    pres.relators()
        .iter()
        .map(|r| Ok(pres.evaluate_word(r.word(), &images)?.get(0, 2)))
        .collect()
}

/// The cup product `α ⌣ β`.
pub fn cup(g: &EtypePresentation, alpha: &CohClass1, beta: &CohClass1) -> Result<H2Element> {
    check_class(g, alpha)?;
    check_class(g, beta)?;
    cup_unchecked(g, alpha, beta)
}

fn cup_unchecked(g: &EtypePresentation, alpha: &CohClass1, beta: &CohClass1) -> Result<H2Element> {
    let field = g.field();
    Ok(match g.tree() {
        Construction::Free { .. } => H2Element::Zero,
        Construction::Demushkin { d, .. } => {
            let (a, b) = (&alpha.coeffs, &beta.coeffs);
            let s = (0..*d).step_by(2).fold(0, |acc, i| {
                field.add(acc, field.sub(field.mul(a[i], b[i + 1]), field.mul(a[i + 1], b[i])))
            });
            H2Element::Scalar(s)
        }
        Construction::ThetaAbelian { .. } => {
            H2Element::ThetaAbelian(relator_trace(g.presentation(), alpha, beta)?)
        }
        Construction::FreeProduct { left, right } => {
            let d1 = left.generator_count();
            let d2 = right.generator_count();
            H2Element::Pair(
                Box::new(cup_unchecked(left, &alpha.slice(0, d1), &beta.slice(0, d1))?),
                Box::new(cup_unchecked(right, &alpha.slice(d1, d2), &beta.slice(d1, d2))?),
            )
        }
        Construction::SemidirectZp { base } => {
            let sa = split_unchecked(alpha);
            let sb = split_unchecked(beta);
            let psi = sa
                .restriction
                .scale(field, sb.psi_coefficient)
                .add(field, &sb.restriction.scale(field, field.neg(sa.psi_coefficient)));
            H2Element::Semidirect {
                base: Box::new(cup_unchecked(base, &sa.restriction, &sb.restriction)?),
                psi: psi.coeffs,
            }
        }
    })
}

/// `Σ s_k·(a_k ⌣ b_k)` in the tree-shaped H^2.
pub fn cup_linear_combination(
    g: &EtypePresentation,
    terms: &[(FpScalar, &CohClass1, &CohClass1)],
) -> Result<H2Element> {
    let field = g.field();
    let mut acc: Option<H2Element> = None;
    for &(s, a, b) in terms {
        let c = cup(g, a, b)?.scale(field, s);
        acc = Some(match acc {
            None => c,
            Some(prev) => prev.add(field, &c)?,
        });
    }
    acc.ok_or_else(|| Error::Input("empty linear combination".into()))
}

/// 1-based index `i` of the first `α_i ⌣ α_{i+1} ≠ 0`, if any.
pub fn triviality_failure(g: &EtypePresentation, alphas: &[CohClass1]) -> Result<Option<usize>> {
    if alphas.len() < 2 {
        return Err(Error::Input("the triviality condition needs n >= 2".into()));
    }
    for (i, w) in alphas.windows(2).enumerate() {
        if !cup(g, &w[0], &w[1])?.is_zero() {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

/// `true` iff `α_i ⌣ α_{i+1} = 0` for all consecutive pairs.
pub fn triviality_condition(g: &EtypePresentation, alphas: &[CohClass1]) -> Result<bool> {
    Ok(triviality_failure(g, alphas)?.is_none())
}

pub fn semidirect_split(g: &EtypePresentation, alpha: &CohClass1) -> Result<SemidirectH1Split> {
    if !matches!(g.tree(), Construction::SemidirectZp { .. }) {
        return Err(Error::Input(format!(
            "semidirect_split on {}, which is not a semidirect product",
            g.describe()
        )));
    }
    check_class(g, alpha)?;
    Ok(split_unchecked(alpha))
}

fn split_unchecked(alpha: &CohClass1) -> SemidirectH1Split {
    let (last, rest) = alpha.coeffs.split_last().expect("semidirect groups have a generator");
    SemidirectH1Split {
        restriction: CohClass1::new(rest.to_vec()),
        psi_coefficient: *last,
    }
}
