//! The witness engine.
//!
//! A witness for `⟨α_1, …, α_n⟩` is a homomorphism `G -> U_{n+1}(F_p)` whose
//! entry `(i, i+1)` on each generator is `α_{i+1}`. Its existence is equivalent
//! to the Massey product containing 0. Every public constructor re-checks the
//! relators and the superdiagonal before returning.

use rayon::prelude::*;

use crate::cohomology::{check_class, semidirect_split, triviality_failure, CohClass1};
use crate::error::{Error, Result};
use crate::fp::{gauss_solve, Fp, FpMatrix, FpScalar};
use crate::groups::{Construction, EtypePresentation, Presentation};
use crate::unitriangular::{solve_commutator_equation, UniTriangular};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Generator images in U_{n+1}(F_p), in generator order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessAssignment {
    n: usize,
    field: Fp,
    images: Vec<UniTriangular>,
}

impl WitnessAssignment {
    pub fn new(field: Fp, n: usize, images: Vec<UniTriangular>) -> Result<Self> {
        for img in &images {
            if img.field() != field {
                return Err(Error::Modulus {
                    left: img.p(),
                    right: field.p(),
                });
            }
            if img.n() != n {
                return Err(Error::Dimension(format!(
                    "image in U_{} for a witness in U_{}",
                    img.n() + 1,
                    n + 1
                )));
            }
        }
        Ok(WitnessAssignment { n, field, images })
    }

    pub fn identity(field: Fp, n: usize, d: usize) -> Self {
        WitnessAssignment {
            n,
            field,
            images: vec![UniTriangular::identity(field, n); d],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn images(&self) -> &[UniTriangular] {
        &self.images
    }

    pub fn into_images(self) -> Vec<UniTriangular> {
        self.images
    }
}

/// Search limits for the layered lifting search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of partial assignments visited.
    pub budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: DEFAULT_BUDGET,
        }
    }
}

/// A Massey product query `⟨α_1, …, α_n⟩` on an elementary-type group.
#[derive(Debug, Clone)]
pub struct MasseyProblem {
    pub group: EtypePresentation,
    pub alphas: Vec<CohClass1>,
}

impl MasseyProblem {
    pub fn new(group: EtypePresentation, alphas: Vec<CohClass1>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::Input(format!(
                "a Massey product needs n >= 2 classes, got {}",
                alphas.len()
            )));
        }
        for a in &alphas {
            check_class(&group, a)?;
        }
        Ok(MasseyProblem { group, alphas })
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn solve(&self, opts: SearchOptions) -> Result<WitnessAssignment> {
        strong_vanishing_witness(&self.group, &self.alphas, opts)
    }
}

/// The classes read off the superdiagonal: class `i` sends `x` to entry `(i, i+1)`.
pub fn superdiagonal(w: &WitnessAssignment) -> Vec<CohClass1> {
    (0..w.n)
        .map(|i| CohClass1::new(w.images.iter().map(|g| g.get(i, i + 1)).collect()))
        .collect()
}

/// First `(i, generator)` (0-based) where the superdiagonal differs from `alphas`.
pub fn superdiagonal_mismatch(w: &WitnessAssignment, alphas: &[CohClass1]) -> Option<(usize, usize)> {
    for (i, a) in alphas.iter().enumerate() {
        for (x, img) in w.images.iter().enumerate() {
            if img.get(i, i + 1) != a.coeffs[x] {
                return Some((i, x));
            }
        }
    }
    None
}

fn check_emitted(pres: &Presentation, w: &WitnessAssignment, alphas: &[CohClass1]) -> Result<()> {
    if w.n != alphas.len() || w.images.len() != pres.generator_count() {
        return Err(Error::Internal("witness has the wrong shape".into()));
    }
    if let Some(r) = pres.first_failing_relator(&w.images)? {
        return Err(Error::Internal(format!(
            "constructed witness violates relator {}",
            pres.relator_strings()[r]
        )));
    }
    if let Some((i, x)) = superdiagonal_mismatch(w, alphas) {
        return Err(Error::Internal(format!(
            "constructed witness has the wrong superdiagonal at ({}, x{})",
            i + 1,
            x + 1
        )));
    }
    Ok(())
}

fn check_classes(g: &EtypePresentation, alphas: &[CohClass1]) -> Result<()> {
    alphas.iter().try_for_each(|a| check_class(g, a))
}

/// Witness on a free group: `x_j -> I + Σ_i α_i(x_j) E_{i,i+1}`.
pub fn witness_free(g: &EtypePresentation, alphas: &[CohClass1]) -> Result<WitnessAssignment> {
    if !g.relators().is_empty() {
        return Err(Error::Input(format!("{} is not a free group", g.describe())));
    }
    check_classes(g, alphas)?;
    let w = superdiagonal_assignment(g.field(), g.generator_count(), alphas);
    check_emitted(g.presentation(), &w, alphas)?;
    Ok(w)
}

fn superdiagonal_assignment(field: Fp, d: usize, alphas: &[CohClass1]) -> WitnessAssignment {
    let images = (0..d)
        .map(|x| {
            let diag: Vec<_> = alphas.iter().map(|a| a.coeffs[x]).collect();
            UniTriangular::with_superdiagonal(field, &diag)
        })
        .collect();
    WitnessAssignment {
        n: alphas.len(),
        field,
        images,
    }
}

/// Witness for the cyclic product `⟨α, …, α⟩` (n copies).
///
/// With `A = I + Σ E_{i,i+1}`, each generator goes to `B_x·A^{α(x)}`, where
/// `[B_x, A] = A^{θ(x)-1}`. Conjugation by `B_x` then raises `A` to `θ(x)`,
/// the same action the orientation prescribes.
pub fn witness_cyclic(g: &EtypePresentation, alpha: &CohClass1, n: usize) -> Result<WitnessAssignment> {
    check_class(g, alpha)?;
    if n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    let field = g.field();
    let a = UniTriangular::shift(field, n);
    let modulus = g.modulus();
    let mut images = Vec::with_capacity(g.generator_count());
    for (x, &theta) in g.orientation().values.iter().enumerate() {
        let target = a.power(((theta + modulus - 1) % modulus) as i64);
        let b = match target.filtration_level() {
            None => UniTriangular::identity(field, n),
            Some(k) => solve_commutator_equation(&a, &target, k).map_err(|_| {
                Error::Internal(format!("no B for generator x{} at level {k}", x + 1))
            })?,
        };
        images.push(b.mul(&a.power(alpha.coeffs[x] as i64))?);
    }
    let w = WitnessAssignment { n, field, images };
    if let Some(r) = g.first_failing_relator(&w.images)? {
        return Err(Error::NonKummerian { relator: r });
    }
    check_emitted(g.presentation(), &w, &vec![alpha.clone(); n])?;
    Ok(w)
}

/// Conjugates by `diag(d)` with `d_1 = 1`, `d_{i+1} = d_i / λ_i`, which scales
/// the i-th superdiagonal class by `λ_i`.
pub fn scale_witness(w: &WitnessAssignment, lambdas: &[FpScalar]) -> Result<WitnessAssignment> {
    if lambdas.len() != w.n {
        return Err(Error::Dimension(format!(
            "{} scalars for a witness with n = {}",
            lambdas.len(),
            w.n
        )));
    }
    let f = w.field;
    let mut d = vec![1];
    for &l in lambdas {
        let inv = f
            .inv(l % f.p())
            .ok_or_else(|| Error::Input("scaling by zero".into()))?;
        d.push(f.mul(*d.last().unwrap(), inv));
    }
    let images = w
        .images
        .iter()
        .map(|g| g.conj_by_diagonal(&d))
        .collect::<Result<_>>()?;
    Ok(WitnessAssignment {
        n: w.n,
        field: f,
        images,
    })
}

/// Maximal runs of nonzero classes as `(start, len)`, 0-based.
pub fn nonzero_runs(alphas: &[CohClass1]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < alphas.len() {
        if alphas[i].is_zero() {
            i += 1;
            continue;
        }
        let start = i;
        while i < alphas.len() && !alphas[i].is_zero() {
            i += 1;
        }
        runs.push((start, i - start));
    }
    runs
}

/// Places the witness of the run starting at class `s` on the diagonal block
/// of matrix indices `s..=s+len`. Zero classes leave the coupling entries 0.
pub fn blockwise_assemble(
    field: Fp,
    alphas: &[CohClass1],
    run_witnesses: &[WitnessAssignment],
) -> Result<WitnessAssignment> {
    let n = alphas.len();
    let d = alphas
        .first()
        .map(CohClass1::len)
        .ok_or_else(|| Error::Input("empty class sequence".into()))?;
    let runs = nonzero_runs(alphas);
    if runs.len() != run_witnesses.len() {
        return Err(Error::Input(format!(
            "{} run witnesses for {} nonzero runs",
            run_witnesses.len(),
            runs.len()
        )));
    }
    if runs == [(0, n)] {
        let w = &run_witnesses[0];
        if w.images.len() != d || superdiagonal_mismatch(w, alphas).is_some() || w.n != n {
            return Err(Error::Input("run witness does not match its run".into()));
        }
        return Ok(w.clone());
    }
    let mut images = vec![UniTriangular::identity(field, n); d];
    for (&(s, len), w) in runs.iter().zip(run_witnesses) {
        if w.n != len || w.field != field || w.images.len() != d {
            return Err(Error::Input(format!(
                "run witness at class {} has the wrong shape",
                s + 1
            )));
        }
        if superdiagonal_mismatch(w, &alphas[s..s + len]).is_some() {
            return Err(Error::Input(format!(
                "run witness at class {} has the wrong superdiagonal",
                s + 1
            )));
        }
        for (img, block) in images.iter_mut().zip(&w.images) {
            for i in 0..len {
                for j in i + 1..=len {
                    img.set(s + i, s + j, block.get(i, j));
                }
            }
        }
    }
    Ok(WitnessAssignment { n, field, images })
}

/// Union of witnesses on the two factors of a free product.
pub fn witness_free_product(
    g: &EtypePresentation,
    w1: &WitnessAssignment,
    w2: &WitnessAssignment,
) -> Result<WitnessAssignment> {
    let Construction::FreeProduct { left, right } = g.tree() else {
        return Err(Error::Input(format!("{} is not a free product", g.describe())));
    };
    if w1.n != w2.n || w1.field != w2.field || w1.field != g.field() {
        return Err(Error::Input("factor witnesses live in different groups".into()));
    }
    if w1.images.len() != left.generator_count() || w2.images.len() != right.generator_count() {
        return Err(Error::Dimension("factor witness generator counts".into()));
    }
    let mut images = w1.images.clone();
    images.extend_from_slice(&w2.images);
    let w = WitnessAssignment {
        n: w1.n,
        field: w1.field,
        images,
    };
    let alphas = superdiagonal(&w);
    check_emitted(g.presentation(), &w, &alphas)?;
    Ok(w)
}

/// Witness on `Z_p ⋊ G0` for nonzero classes satisfying the triviality
/// condition. Either no class involves ψ, and `recurse` handles the base with
/// `z -> I`, or all of them do and the sequence is proportional, which the
/// cyclic recipe covers after scaling.
pub fn witness_semidirect<F>(
    g: &EtypePresentation,
    alphas: &[CohClass1],
    recurse: F,
) -> Result<WitnessAssignment>
where
    F: FnOnce(&EtypePresentation, &[CohClass1]) -> Result<WitnessAssignment>,
{
    let Construction::SemidirectZp { base } = g.tree() else {
        return Err(Error::Input(format!("{} is not a semidirect product", g.describe())));
    };
    check_classes(g, alphas)?;
    if alphas.iter().any(CohClass1::is_zero) {
        return Err(Error::Input("witness_semidirect expects nonzero classes".into()));
    }
    if alphas.len() >= 2 {
        if let Some(index) = triviality_failure(g, alphas)? {
            return Err(Error::TrivialityFails { index });
        }
    }
    let field = g.field();
    let splits = alphas
        .iter()
        .map(|a| semidirect_split(g, a))
        .collect::<Result<Vec<_>>>()?;
    let zero_b = splits.iter().filter(|s| s.psi_coefficient == 0).count();
    let w = if zero_b == splits.len() {
        let restricted: Vec<_> = splits.iter().map(|s| s.restriction.clone()).collect();
        let wb = recurse(base, &restricted)?;
        let mut images = wb.images;
        images.push(UniTriangular::identity(field, alphas.len()));
        WitnessAssignment {
            n: alphas.len(),
            field,
            images,
        }
    } else if zero_b == 0 {
        let b1_inv = field.inv(splits[0].psi_coefficient).expect("nonzero");
        let lambdas: Vec<_> = splits
            .iter()
            .map(|s| field.mul(s.psi_coefficient, b1_inv))
            .collect();
        for (a, &l) in alphas.iter().zip(&lambdas) {
            if *a != alphas[0].scale(field, l) {
                return Err(Error::Internal(
                    "classes with nonzero ψ-part are not proportional under triviality".into(),
                ));
            }
        }
        scale_witness(&witness_cyclic(g, &alphas[0], alphas.len())?, &lambdas)?
    } else {
        return Err(Error::MixedSemidirectCase);
    };
    check_emitted(g.presentation(), &w, alphas)?;
    Ok(w)
}

/// Layered lifting search on a Demushkin node.
pub fn witness_demushkin_search(
    g: &EtypePresentation,
    alphas: &[CohClass1],
    opts: SearchOptions,
) -> Result<WitnessAssignment> {
    if !matches!(g.tree(), Construction::Demushkin { .. }) {
        return Err(Error::Input(format!("{} is not a Demushkin group", g.describe())));
    }
    check_classes(g, alphas)?;
    if alphas.len() >= 2 {
        if let Some(index) = triviality_failure(g, alphas)? {
            return Err(Error::TrivialityFails { index });
        }
    }
    layered_search(g.presentation(), alphas, opts)
}

/// Searches for a homomorphism into U_{n+1}(F_p) with the given superdiagonal,
/// one depth at a time.
///
/// With depths below `k-1` fixed, the depth-k part of every relator is an
/// affine function of the depth-(k-1) entries, so each level is a linear
/// system. Solutions are tried in lexicographic order of their coordinates in
/// the solution space, with backtracking when a deeper level has none.
pub fn layered_search(
    pres: &Presentation,
    alphas: &[CohClass1],
    opts: SearchOptions,
) -> Result<WitnessAssignment> {
    let n = alphas.len();
    if n == 0 {
        return Err(Error::Input("empty class sequence".into()));
    }
    let field = pres.field();
    let mut search = Layered {
        pres,
        field,
        n,
        d: pres.generator_count(),
        budget: opts.budget,
        nodes: 0,
    };
    let mut images = superdiagonal_assignment(field, search.d, alphas).images;
    search.visit()?;
    let found = if n < 2 || search.level_component(&images, 2)?.iter().all(|&v| v == 0) {
        search.descend(&mut images, 3)?
    } else {
        false
    };
    if !found {
        return Err(Error::SearchExhausted {
            nodes: search.nodes,
            budget: opts.budget,
        });
    }
    let w = WitnessAssignment { n, field, images };
    check_emitted(pres, &w, alphas)?;
    Ok(w)
}

struct Layered<'a> {
    pres: &'a Presentation,
    field: Fp,
    n: usize,
    d: usize,
    budget: u64,
    nodes: u64,
}

impl Layered<'_> {
    fn visit(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::SearchExhausted {
                nodes: self.nodes - 1,
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Depth-k entries of every relator value, relator-major.
    fn level_component(&self, images: &[UniTriangular], k: usize) -> Result<Vec<FpScalar>> {
        let mut out = Vec::new();
        for r in self.pres.relators() {
            let v = self.pres.evaluate_word(r.word(), images)?;
            out.extend((0..=self.n - k).map(|i| v.get(i, i + k)));
        }
        Ok(out)
    }

    /// Fixes depth `k-1` so that depth `k` of every relator vanishes, then
    /// recurses. Depths `>= k-1` are zero on entry and on failure.
    fn descend(&mut self, images: &mut [UniTriangular], k: usize) -> Result<bool> {
        if k > self.n {
            return self.pres.verify_hom(images);
        }
        let f = self.field;
        let depth = k - 1;
        let slots: Vec<(usize, usize)> = (0..self.d)
            .flat_map(|x| (0..=self.n - depth).map(move |i| (x, i)))
            .collect();
        let base = self.level_component(images, k)?;
        let mut m = FpMatrix::zeros(base.len(), slots.len());
        for (c, &(x, i)) in slots.iter().enumerate() {
            images[x].set(i, i + depth, 1);
            let col = self.level_component(images, k)?;
            images[x].set(i, i + depth, 0);
            for (r, (&v, &b)) in col.iter().zip(&base).enumerate() {
                m.set(r, c, f.sub(v, b));
            }
        }
        let rhs: Vec<_> = base.iter().map(|&b| f.neg(b)).collect();
        let Some(sol) = gauss_solve(&f, &m, &rhs)? else {
            return Ok(false);
        };
        let dim = sol.nullspace.len();
        let mut t = vec![0u32; dim];
        loop {
            self.visit()?;
            let mut x = sol.particular.clone();
            for (ti, v) in t.iter().zip(&sol.nullspace) {
                for (xe, &ve) in x.iter_mut().zip(v) {
                    *xe = f.add(*xe, f.mul(*ti, ve));
                }
            }
            for (&(g, i), &v) in slots.iter().zip(&x) {
                images[g].set(i, i + depth, v);
            }
            if self.level_component(images, k)?.iter().any(|&v| v != 0) {
                return Err(Error::Internal(format!("level {k} is not affine in depth {depth}")));
            }
            if self.descend(images, k + 1)? {
                return Ok(true);
            }
            if !next_lex(&mut t, f.p()) {
                break;
            }
        }
        for &(g, i) in &slots {
            images[g].set(i, i + depth, 0);
        }
        Ok(false)
    }
}

/// Advances `t` to the next vector in lexicographic order; `false` after the last.
fn next_lex(t: &mut [u32], p: u32) -> bool {
    for v in t.iter_mut().rev() {
        *v += 1;
        if *v < p {
            return true;
        }
        *v = 0;
    }
    false
}

/// `λ` with `α_i = λ_i α_1` for all i, if the sequence is proportional.
fn proportional_scalars(field: Fp, alphas: &[CohClass1]) -> Option<Vec<FpScalar>> {
    alphas.iter().map(|a| a.ratio_to(field, &alphas[0])).collect()
}

/// A witness for `0 ∈ ⟨α_1, …, α_n⟩` whenever consecutive cup products vanish.
///
/// The sequence is cut into maximal nonzero runs; each run is handled by the
/// recipe for the root of the tree and the runs are assembled blockwise.
pub fn strong_vanishing_witness(
    g: &EtypePresentation,
    alphas: &[CohClass1],
    opts: SearchOptions,
) -> Result<WitnessAssignment> {
    if alphas.len() < 2 {
        return Err(Error::Input(format!(
            "strong vanishing needs n >= 2 classes, got {}",
            alphas.len()
        )));
    }
    check_classes(g, alphas)?;
    if let Some(index) = triviality_failure(g, alphas)? {
        return Err(Error::TrivialityFails { index });
    }
    let w = vanishing_witness(g, alphas, opts)?;
    check_emitted(g.presentation(), &w, alphas)?;
    Ok(w)
}

/// Same as [`strong_vanishing_witness`] without the upfront triviality check;
/// zeros are allowed anywhere, and `n >= 1`.
fn vanishing_witness(
    g: &EtypePresentation,
    alphas: &[CohClass1],
    opts: SearchOptions,
) -> Result<WitnessAssignment> {
    let runs = nonzero_runs(alphas);
    let witnesses = runs
        .par_iter()
        .map(|&(s, len)| run_witness(g, &alphas[s..s + len], opts))
        .collect::<Result<Vec<_>>>()?;
    blockwise_assemble(g.field(), alphas, &witnesses)
}

fn run_witness(g: &EtypePresentation, alphas: &[CohClass1], opts: SearchOptions) -> Result<WitnessAssignment> {
    let field = g.field();
    let n = alphas.len();
    let cyclic_or_search = || match proportional_scalars(field, alphas) {
        Some(lambdas) => scale_witness(&witness_cyclic(g, &alphas[0], n)?, &lambdas),
        None => layered_search(g.presentation(), alphas, opts),
    };
    let w = match g.tree() {
        Construction::Free { .. } => witness_free(g, alphas)?,
        Construction::Demushkin { .. } | Construction::ThetaAbelian { .. } => cyclic_or_search()?,
        Construction::FreeProduct { left, right } => {
            let d1 = left.generator_count();
            let d2 = right.generator_count();
            let restrict = |start: usize, len: usize| -> Vec<CohClass1> {
                alphas.iter().map(|a| a.slice(start, len)).collect()
            };
            let (w1, w2) = rayon::join(
                || vanishing_witness(left, &restrict(0, d1), opts),
                || vanishing_witness(right, &restrict(d1, d2), opts),
            );
            witness_free_product(g, &w1?, &w2?)?
        }
        Construction::SemidirectZp { .. } => {
            witness_semidirect(g, alphas, |base, restricted| vanishing_witness(base, restricted, opts))?
        }
    };
    check_emitted(g.presentation(), &w, alphas)?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::triviality_condition;
    use crate::groups::{demushkin, free, free_product, semidirect_zp, theta_abelian};
    use proptest::prelude::*;

    fn chi(d: usize, j: usize) -> CohClass1 {
        CohClass1::dual(d, j)
    }

    fn fp(p: u32) -> Fp {
        Fp::new(p).unwrap()
    }

    #[test]
    fn semidirect_run_of_length_one() {
        let g = semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap();
        let z = chi(3, 2);
        let zero = CohClass1::zero(3);
        for alphas in [vec![zero.clone(), zero.clone(), z.clone()], vec![z.clone(), zero, z]] {
            let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
            assert_eq!(superdiagonal_mismatch(&w, &alphas), None);
        }
    }

    #[test]
    fn superdiagonal_examples() {
        let f = fp(3);
        let w = WitnessAssignment::identity(f, 3, 2);
        assert!(superdiagonal(&w).iter().all(CohClass1::is_zero));
        let a = UniTriangular::shift(f, 3);
        let w = WitnessAssignment::new(f, 3, vec![a.clone()]).unwrap();
        assert_eq!(superdiagonal(&w), vec![chi(1, 0); 3]);
        let w = WitnessAssignment::new(f, 3, vec![a.conj_by_diagonal(&[1, 2, 1, 1]).unwrap()]).unwrap();
        let c = |v| CohClass1::new(vec![v]);
        assert_eq!(superdiagonal(&w), vec![c(2), c(2), c(1)]);
    }

    #[test]
    fn free_witness_examples() {
        let g = free(2, 1, None).unwrap();
        let w = witness_free(&g, &[chi(1, 0), chi(1, 0), chi(1, 0)]).unwrap();
        assert_eq!(w.images()[0], UniTriangular::shift(fp(2), 3));
        let g = free(3, 2, None).unwrap();
        let w = witness_free(&g, &vec![CohClass1::zero(2); 3]).unwrap();
        assert!(w.images().iter().all(UniTriangular::is_identity));
        let w = witness_free(&g, &[chi(2, 0), chi(2, 1), CohClass1::zero(2)]).unwrap();
        assert_eq!(w.images()[0], UniTriangular::elementary(fp(3), 3, 0, 1, 1));
        assert_eq!(w.images()[1], UniTriangular::elementary(fp(3), 3, 1, 2, 1));
        assert!(witness_free(&demushkin(3, 2, 1).unwrap(), &vec![chi(2, 0); 3]).is_err());
    }

    #[test]
    fn cyclic_witness_on_demushkin() {
        let g = demushkin(3, 2, 1).unwrap();
        let f = fp(3);
        let w = witness_cyclic(&g, &chi(2, 0), 3).unwrap();
        assert_eq!(w.images()[0], UniTriangular::shift(f, 3));
        assert_eq!(w.images()[1], UniTriangular::elementary(f, 3, 0, 2, 1));
        let w = witness_cyclic(&g, &CohClass1::zero(2), 3).unwrap();
        assert!(superdiagonal(&w).iter().all(CohClass1::is_zero));
        let t = theta_abelian(3, 2, None).unwrap();
        let w = witness_cyclic(&t, &CohClass1::new(vec![1, 2]), 4).unwrap();
        let a = UniTriangular::shift(f, 4);
        assert_eq!(w.images(), &[a.clone(), a.power(2)]);
    }

    #[test]
    fn cyclic_witness_all_classes_small_n() {
        let groups = [
            demushkin(3, 2, 1).unwrap(),
            demushkin(2, 2, 2).unwrap(),
            theta_abelian(3, 3, Some(1)).unwrap(),
            semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap(),
        ];
        for g in &groups {
            let p = g.p();
            let d = g.generator_count();
            for code in 0..(p as usize).pow(d as u32) {
                let coeffs: Vec<u32> = (0..d).map(|j| ((code / (p as usize).pow(j as u32)) % p as usize) as u32).collect();
                for n in 1..=4 {
                    witness_cyclic(g, &CohClass1::new(coeffs.clone()), n)
                        .unwrap_or_else(|e| panic!("{} n={n}: {e}", g.describe()));
                }
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let f = fp(3);
        let a = UniTriangular::shift(f, 3);
        let w = WitnessAssignment::new(f, 3, vec![a]).unwrap();
        assert_eq!(scale_witness(&w, &[1, 1, 1]).unwrap(), w);
        let s = scale_witness(&w, &[2, 1, 1]).unwrap();
        let c = |v| CohClass1::new(vec![v]);
        assert_eq!(superdiagonal(&s), vec![c(2), c(1), c(1)]);
        assert_eq!(scale_witness(&s, &[2, 1, 1]).unwrap(), w);
        assert!(scale_witness(&w, &[0, 1, 1]).is_err());
    }

    #[test]
    fn blockwise_examples() {
        let f = fp(3);
        let g = free(3, 2, None).unwrap();
        let (a, b) = (chi(2, 0), chi(2, 1));
        let alphas = vec![a.clone(), CohClass1::zero(2), b.clone()];
        let w1 = witness_free(&g, std::slice::from_ref(&a)).unwrap();
        let w2 = witness_free(&g, std::slice::from_ref(&b)).unwrap();
        let w = blockwise_assemble(f, &alphas, &[w1.clone(), w2.clone()]).unwrap();
        assert_eq!(superdiagonal(&w), alphas);
        assert!(g.verify_hom(w.images()).unwrap());
        assert!(blockwise_assemble(f, &alphas, std::slice::from_ref(&w1)).is_err());
        assert!(blockwise_assemble(f, &alphas, &[w2, w1.clone()]).is_err());
        let zero = vec![CohClass1::zero(2); 3];
        let w = blockwise_assemble(f, &zero, &[]).unwrap();
        assert!(w.images().iter().all(UniTriangular::is_identity));
        let whole = witness_free(&g, &[a.clone(), b.clone(), a.clone()]).unwrap();
        assert_eq!(blockwise_assemble(f, &[a.clone(), b, a], std::slice::from_ref(&whole)).unwrap(), whole);
    }

    #[test]
    fn blockwise_with_demushkin_runs() {
        let g = demushkin(3, 2, 1).unwrap();
        let c1 = chi(2, 0);
        let z = CohClass1::zero(2);
        let alphas = vec![c1.clone(), c1.clone(), z.clone(), z, c1.clone(), c1.clone(), c1.clone()];
        let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
        assert_eq!(superdiagonal(&w), alphas);
    }

    #[test]
    fn free_product_examples() {
        let g = free_product(free(3, 1, None).unwrap(), free(3, 1, None).unwrap()).unwrap();
        let alphas = vec![CohClass1::new(vec![1, 2]), CohClass1::new(vec![0, 1]), CohClass1::new(vec![2, 2])];
        let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
        assert_eq!(w, witness_free(&g, &alphas).unwrap());

        let g = free_product(demushkin(3, 2, 1).unwrap(), free(3, 1, None).unwrap()).unwrap();
        let Construction::FreeProduct { left, right } = g.tree() else { panic!() };
        let w1 = witness_cyclic(left, &chi(2, 0), 3).unwrap();
        let w2 = witness_free(right, &vec![CohClass1::zero(1); 3]).unwrap();
        let w = witness_free_product(&g, &w1, &w2).unwrap();
        assert_eq!(superdiagonal(&w), vec![chi(3, 0); 3]);
        let wrong = witness_free(right, &vec![CohClass1::zero(1); 4]).unwrap();
        assert!(witness_free_product(&g, &w1, &wrong).is_err());
    }

    #[test]
    fn free_product_of_demushkins() {
        let g = free_product(demushkin(3, 2, 1).unwrap(), demushkin(3, 2, 1).unwrap()).unwrap();
        let (c1, c3) = (chi(4, 0), chi(4, 2));
        let alphas = vec![c1.clone(), c1, c3.clone(), c3];
        assert!(triviality_condition(&g, &alphas).unwrap());
        let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
        assert_eq!(superdiagonal(&w), alphas);
    }

    #[test]
    fn semidirect_examples() {
        let g = semidirect_zp(free(3, 2, None).unwrap()).unwrap();
        let alphas = vec![chi(3, 0); 3];
        let w = witness_semidirect(&g, &alphas, witness_free).unwrap();
        assert!(w.images()[2].is_identity());

        let z = chi(3, 2);
        let f = fp(3);
        let alphas = vec![z.clone(), z.scale(f, 2), z.clone()];
        let w = witness_semidirect(&g, &alphas, |_, _| unreachable!()).unwrap();
        assert_eq!(superdiagonal(&w), alphas);

        let bad = vec![chi(3, 0), z.clone(), z];
        assert_eq!(
            witness_semidirect(&g, &bad, witness_free),
            Err(Error::TrivialityFails { index: 1 })
        );

        let g = semidirect_zp(demushkin(3, 2, 1).unwrap()).unwrap();
        let alphas = vec![chi(3, 2); 3];
        let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
        assert_eq!(superdiagonal(&w), alphas);
    }

    #[test]
    fn search_on_demushkin() {
        let g = demushkin(3, 2, 1).unwrap();
        let alphas = vec![chi(2, 0); 3];
        let w = witness_demushkin_search(&g, &alphas, SearchOptions::default()).unwrap();
        assert!(g.verify_hom(w.images()).unwrap());
        assert!(witness_cyclic(&g, &chi(2, 0), 3).is_ok());
        let alphas = vec![chi(2, 0); 4];
        witness_demushkin_search(&g, &alphas, SearchOptions::default()).unwrap();
        let g2 = demushkin(2, 2, 2).unwrap();
        assert_eq!(
            witness_demushkin_search(&g2, &[chi(2, 0), chi(2, 1), chi(2, 0)], SearchOptions::default()),
            Err(Error::TrivialityFails { index: 1 })
        );
    }

    #[test]
    fn search_on_non_proportional_sequences() {
        let g = demushkin(3, 4, 1).unwrap();
        let alphas = vec![chi(4, 0), chi(4, 2), chi(4, 0), chi(4, 3)];
        assert!(triviality_condition(&g, &alphas).unwrap());
        let w = witness_demushkin_search(&g, &alphas, SearchOptions::default()).unwrap();
        assert_eq!(superdiagonal(&w), alphas);
        assert!(matches!(
            witness_demushkin_search(&g, &alphas, SearchOptions { budget: 1 }),
            Err(Error::SearchExhausted { budget: 1, .. })
        ));
        let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
        assert!(g.verify_hom(w.images()).unwrap());
    }

    #[test]
    fn strong_vanishing_rejects_nontrivial() {
        let g = demushkin(3, 2, 1).unwrap();
        assert_eq!(
            strong_vanishing_witness(&g, &[chi(2, 0), chi(2, 1), chi(2, 0)], SearchOptions::default()),
            Err(Error::TrivialityFails { index: 1 })
        );
        let g = free(2, 2, None).unwrap();
        let alphas = vec![chi(2, 0), chi(2, 1), chi(2, 1), chi(2, 0)];
        let w = strong_vanishing_witness(&g, &alphas, SearchOptions::default()).unwrap();
        assert_eq!(w, witness_free(&g, &alphas).unwrap());
    }

    proptest! {
        #[test]
        fn scaling_round_trip(
            p in prop::sample::select(vec![2u32, 3, 5, 7]),
            n in 1usize..6,
            lam in prop::collection::vec(1u32..7, 6),
            entries in prop::collection::vec(0u32..7, 21),
        ) {
            let f = fp(p);
            let len = n * (n + 1) / 2;
            let e = entries[..len].iter().map(|&v| v % p).collect();
            let w = WitnessAssignment::new(f, n, vec![UniTriangular::from_entries(f, n, e).unwrap()]).unwrap();
            let lam: Vec<u32> = lam[..n].iter().map(|&l| (l % (p - 1)) + 1).collect();
            let inv: Vec<u32> = lam.iter().map(|&l| f.inv(l).unwrap()).collect();
            let s = scale_witness(&w, &lam).unwrap();
            prop_assert_eq!(scale_witness(&s, &inv).unwrap(), w.clone());
            let sd = superdiagonal(&s);
            for (i, c) in superdiagonal(&w).iter().enumerate() {
                prop_assert_eq!(&sd[i], &c.scale(f, lam[i]));
            }
        }

        #[test]
        fn search_and_cyclic_agree_on_existence(
            coeffs in prop::collection::vec(0u32..3, 2),
            n in 3usize..6,
        ) {
            let g = demushkin(3, 2, 1).unwrap();
            let a = CohClass1::new(coeffs);
            let alphas = vec![a.clone(); n];
            let c = witness_cyclic(&g, &a, n).unwrap();
            let s = layered_search(g.presentation(), &alphas, SearchOptions::default()).unwrap();
            prop_assert_eq!(superdiagonal(&c), superdiagonal(&s));
        }
    }
}
