//! The group U_{n+1}(F_p) of unipotent upper-triangular matrices, its descending
//! central series, the associated graded Lie algebra, and a solver for the
//! commutator equation `[B, A] = C`.
//!
//! Indices are 0-based throughout: the entry `(i, j)` with `i < j <= n` is what
//! the usual notation calls `E_{i+1, j+1}`.

use std::fmt;

use crate::error::{Error, Result};
use crate::fp::{banded_commutator_matrix, gauss_solve, Fp, FpMatrix};

/// An element of U_{n+1}(F_p). Only the strictly upper entries are stored,
/// packed row by row: `(0,1), (0,2), .., (0,n), (1,2), ..`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UniTriangular {
    n: usize,
    field: Fp,
    entries: Vec<u32>,
}

#[inline]
fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Smallest `M` with `p^M >= n + 1`; `p^M` is the exponent of U_{n+1}(F_p).
pub fn exponent_log(p: u32, n: usize) -> u32 {
    let mut m = 0;
    let mut q: u64 = 1;
    while q < (n as u64 + 1) {
        q *= p as u64;
        m += 1;
    }
    m
}

impl UniTriangular {
    pub fn identity(field: Fp, n: usize) -> Self {
        UniTriangular {
            n,
            field,
            entries: vec![0; packed_len(n)],
        }
    }

    /// `I + a E_{ij}` (0-based indices).
    pub fn elementary(field: Fp, n: usize, i: usize, j: usize, a: u32) -> Self {
        let mut g = Self::identity(field, n);
        g.set(i, j, a);
        g
    }

    /// `I + sum_i E_{i,i+1}`, the all-ones superdiagonal matrix.
    pub fn shift(field: Fp, n: usize) -> Self {
        Self::with_superdiagonal(field, &vec![1; n])
    }

    /// `I + sum_i d_i E_{i,i+1}`; the size is taken from `diag.len()`.
    pub fn with_superdiagonal(field: Fp, diag: &[u32]) -> Self {
        let n = diag.len();
        let mut g = Self::identity(field, n);
        for (i, &d) in diag.iter().enumerate() {
            g.set(i, i + 1, d % field.p());
        }
        g
    }

    /// Builds from the packed strictly-upper entries (row-major by `(i, j)`).
    pub fn from_entries(field: Fp, n: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != packed_len(n) {
            return Err(Error::Dimension(format!(
                "U_{} needs {} entries, got {}",
                n + 1,
                packed_len(n),
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&v| v >= field.p()) {
            return Err(Error::Input(format!(
                "entry {bad} is not a residue mod {}",
                field.p()
            )));
        }
        Ok(UniTriangular { n, field, entries })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn field(&self) -> Fp {
        self.field
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// Packed strictly-upper entries in serialization order.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j <= self.n);
        let dim = self.n + 1;
        i * dim - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Entry `(i, j)` of the full matrix, including the implicit diagonal and zeros.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.entries[self.idx(i, j)],
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Greater => 0,
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        let k = self.idx(i, j);
        self.entries[k] = v % self.field.p();
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn superdiagonal(&self) -> Vec<u32> {
        (0..self.n).map(|i| self.get(i, i + 1)).collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::Modulus {
                left: self.p(),
                right: other.p(),
            });
        }
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "U_{} against U_{}",
                self.n + 1,
                other.n + 1
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let f = self.field;
        let p = f.p() as u64;
        let mut out = Self::identity(f, self.n);
        for i in 0..self.n {
            for j in i + 1..=self.n {
                let mut acc = self.entries[self.idx(i, j)] as u64 + other.entries[other.idx(i, j)] as u64;
                for l in i + 1..j {
                    acc += self.entries[self.idx(i, l)] as u64 * other.entries[other.idx(l, j)] as u64;
                }
                let k = out.idx(i, j);
                out.entries[k] = (acc % p) as u32;
            }
        }
        out
    }

    pub fn inv(&self) -> Self {
        let f = self.field;
        let p = f.p() as u64;
        let mut out = Self::identity(f, self.n);
        // g X = I, solved from the bottom row up.
        for i in (0..self.n).rev() {
            for j in i + 1..=self.n {
                let mut acc = self.entries[self.idx(i, j)] as u64;
                for l in i + 1..j {
                    acc += self.entries[self.idx(i, l)] as u64 * out.entries[out.idx(l, j)] as u64;
                }
                let k = out.idx(i, j);
                out.entries[k] = f.neg((acc % p) as u32);
            }
        }
        out
    }

    /// Group exponent `p^M` of U_{n+1}(F_p).
    pub fn group_exponent(&self) -> u64 {
        (self.p() as u64).pow(exponent_log(self.p(), self.n))
    }

    /// `g^m` for any integer `m`; `m` is first reduced modulo the group exponent,
    /// so exponents known only modulo a multiple of it are handled correctly.
    pub fn power(&self, m: i64) -> Self {
        let e = self.group_exponent() as i64;
        let mut k = m.rem_euclid(e) as u64;
        let mut base = self.clone();
        let mut acc = Self::identity(self.field, self.n);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            k >>= 1;
        }
        acc
    }

    /// `[g, h] = g h g^{-1} h^{-1}`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.commutator_unchecked(other))
    }

    pub(crate) fn commutator_unchecked(&self, other: &Self) -> Self {
        self.mul_unchecked(other)
            .mul_unchecked(&self.inv())
            .mul_unchecked(&other.inv())
    }

    /// Largest `k` with `g` in U_{(k)}, i.e. the smallest `j - i` over nonzero
    /// entries. `None` stands for the identity (infinite level).
    pub fn filtration_level(&self) -> Option<usize> {
        (1..=self.n).find(|&k| (0..=self.n - k).any(|i| self.get(i, i + k) != 0))
    }

    /// The coset of `g` in U_{(k)}/U_{(k+1)} at its own filtration level.
    pub fn graded_image(&self) -> Result<GradedLieElement> {
        let k = self.filtration_level().ok_or(Error::NoGradedImage)?;
        Ok(GradedLieElement {
            n: self.n,
            field: self.field,
            k,
            coeffs: (0..=self.n - k).map(|i| self.get(i, i + k)).collect(),
        })
    }

    /// Conjugation `D g D^{-1}` by `D = diag(d)`: entry `(i,j)` scales by `d_i / d_j`.
    pub fn conj_by_diagonal(&self, d: &[u32]) -> Result<Self> {
        if d.len() != self.n + 1 {
            return Err(Error::Dimension(format!(
                "diagonal of length {} for U_{}",
                d.len(),
                self.n + 1
            )));
        }
        let f = self.field;
        let inv: Vec<u32> = d
            .iter()
            .map(|&x| f.inv(x).ok_or_else(|| Error::Input("zero diagonal entry".into())))
            .collect::<Result<_>>()?;
        let mut out = self.clone();
        for i in 0..self.n {
            for j in i + 1..=self.n {
                let v = f.mul(f.mul(d[i] % f.p(), inv[j]), self.get(i, j));
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Equality in the central quotient U_{n+1}/Z, ignoring the corner entry.
    pub fn eq_mod_center(&self, other: &Self) -> bool {
        self.field == other.field
            && self.n == other.n
            && (0..self.entries.len()).all(|k| k == self.n - 1 || self.entries[k] == other.entries[k])
    }

    /// `true` when `g` is the identity modulo the centre Z.
    pub fn is_central(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(k, &v)| k == self.n - 1 || v == 0)
    }
}

impl fmt::Debug for UniTriangular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}(F{})[", self.n + 1, self.p())?;
        for i in 0..=self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..=self.n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

/// An element of U_{n+1}(F_p) viewed in the central quotient U_{n+1}/Z.
#[derive(Debug, Clone)]
pub struct CenterQuotientElement(pub UniTriangular);

impl PartialEq for CenterQuotientElement {
    fn eq(&self, other: &Self) -> bool {
        self.0.eq_mod_center(&other.0)
    }
}

impl Eq for CenterQuotientElement {}

/// A homogeneous element of degree `k` of the graded Lie algebra L(U), written in
/// the basis `e_{0,k}, e_{1,1+k}, .., e_{n-k,n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedLieElement {
    pub n: usize,
    pub field: Fp,
    pub k: usize,
    pub coeffs: Vec<u32>,
}

impl GradedLieElement {
    pub fn new(field: Fp, n: usize, k: usize, coeffs: Vec<u32>) -> Result<Self> {
        if k == 0 || k > n || coeffs.len() != n + 1 - k {
            return Err(Error::Dimension(format!(
                "level {k} of L(U_{}) has dimension {}, got {} coefficients",
                n + 1,
                (n + 1).saturating_sub(k),
                coeffs.len()
            )));
        }
        Ok(GradedLieElement { n, field, k, coeffs })
    }

    /// The basis vector `e_{i, i+k}`.
    pub fn basis(field: Fp, n: usize, i: usize, k: usize) -> Self {
        let mut coeffs = vec![0; n + 1 - k];
        coeffs[i] = 1;
        GradedLieElement { n, field, k, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Bilinear extension of `[e_{ij}, e_{i'j'}] = e_{ij'}` if `j = i'`,
    /// `-e_{i'j}` if `i = j'`, zero otherwise.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        if self.field != other.field || self.n != other.n {
            return Err(Error::Dimension("brackets of different algebras".into()));
        }
        let f = self.field;
        let k = self.k + other.k;
        if k > self.n {
            return Ok(GradedLieElement {
                n: self.n,
                field: f,
                k,
                coeffs: vec![],
            });
        }
        let mut coeffs = vec![0; self.n + 1 - k];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let j = i + self.k;
            for (i2, &y) in other.coeffs.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let j2 = i2 + other.k;
                let xy = f.mul(x, y);
                if j == i2 {
                    coeffs[i] = f.add(coeffs[i], xy);
                } else if i == j2 {
                    coeffs[i2] = f.sub(coeffs[i2], xy);
                }
            }
        }
        Ok(GradedLieElement {
            n: self.n,
            field: f,
            k,
            coeffs,
        })
    }

    /// The matrix `I + sum_i c_i E_{i,i+k}`, a lift of this coset.
    pub fn lift(&self) -> UniTriangular {
        let mut g = UniTriangular::identity(self.field, self.n);
        for (i, &c) in self.coeffs.iter().enumerate() {
            g.set(i, i + self.k, c);
        }
        g
    }
}

/// Solves `[B, A] = C` for `B` in U_{(k-1)}, given `C` in U_{(k)}.
///
/// Starting from `B = I`, the residual `[B, A]^{-1} C` is lifted one level at a
/// time: its leading graded piece is matched by solving the banded system of the
/// graded bracket against the superdiagonal of `A`, and the lifted correction is
/// multiplied on the left. Each round pushes the residual at least one level
/// deeper, so the loop ends after at most `n` rounds. Among several solutions at a
/// level, the elimination's particular solution is used.
pub fn solve_commutator_equation(
    a: &UniTriangular,
    c: &UniTriangular,
    k: usize,
) -> Result<UniTriangular> {
    a.check_same(c)?;
    let n = a.n;
    if k < 2 || k > n {
        return Err(Error::Input(format!("level {k} outside 2..={n}")));
    }
    if c.filtration_level().is_some_and(|l| l < k) {
        return Err(Error::Input(format!("C does not lie in U_({k})")));
    }
    let field = a.field;
    let superdiag = a.superdiagonal();
    let a_inv = a.inv();
    let mut b = UniTriangular::identity(field, n);
    let mut last_level = k - 1;
    loop {
        let comm = b.mul_unchecked(a).mul_unchecked(&b.inv()).mul_unchecked(&a_inv);
        let residual = comm.inv().mul_unchecked(c);
        let Some(level) = residual.filtration_level() else {
            return Ok(b);
        };
        if level <= last_level {
            return Err(Error::Internal(format!(
                "commutator residual did not descend past level {level}"
            )));
        }
        last_level = level;
        if level < 2 {
            return Err(Error::NoSolutionAtLevel { level });
        }
        let target: Vec<u32> = (0..=n - level).map(|i| residual.get(i, i + level)).collect();
        let system: FpMatrix = banded_commutator_matrix(&field, &superdiag, level)?;
        let sol = gauss_solve(&field, &system, &target)?.ok_or(Error::NoSolutionAtLevel { level })?;
        let mut step = UniTriangular::identity(field, n);
        for (j, &v) in sol.particular.iter().enumerate() {
            step.set(j, j + level - 1, v);
        }
        b = step.mul_unchecked(&b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(p: u32) -> Fp {
        Fp::new(p).unwrap()
    }

    fn random(rng: &mut impl Rng, field: Fp, n: usize) -> UniTriangular {
        let entries = (0..packed_len(n)).map(|_| rng.gen_range(0..field.p())).collect();
        UniTriangular::from_entries(field, n, entries).unwrap()
    }

    /// Random element of U_{(k)}.
    fn random_at_level(rng: &mut impl Rng, field: Fp, n: usize, k: usize) -> UniTriangular {
        let mut g = UniTriangular::identity(field, n);
        for i in 0..n {
            for j in i + k..=n {
                g.set(i, j, rng.gen_range(0..field.p()));
            }
        }
        g
    }

    #[test]
    fn cube_of_shift_in_u4() {
        let field = f(3);
        let a = UniTriangular::shift(field, 3);
        let by_hand = a.mul(&a).unwrap().mul(&a).unwrap();
        assert_eq!(by_hand, UniTriangular::elementary(field, 3, 0, 3, 1));
        assert_eq!(a.power(3), by_hand);
    }

    #[test]
    fn shift_power_examples() {
        let field = f(3);
        let a = UniTriangular::shift(field, 4);
        let mut want = UniTriangular::identity(field, 4);
        want.set(0, 3, 1);
        want.set(1, 4, 1);
        assert_eq!(a.power(3), want);

        let a = UniTriangular::shift(f(2), 2);
        assert!(a.power(4).is_identity());
    }

    #[test]
    fn negative_powers() {
        let field = f(5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random(&mut rng, field, 5);
        assert_eq!(g.power(-1), g.inv());
        assert_eq!(g.power(-3).mul(&g.power(3)).unwrap(), UniTriangular::identity(field, 5));
    }

    #[test]
    fn commutator_examples() {
        let field = f(3);
        let e12 = UniTriangular::elementary(field, 2, 0, 1, 1);
        let e23 = UniTriangular::elementary(field, 2, 1, 2, 1);
        assert_eq!(e12.commutator(&e23).unwrap(), UniTriangular::elementary(field, 2, 0, 2, 1));

        let e13 = UniTriangular::elementary(field, 3, 0, 2, 1);
        let a = UniTriangular::shift(field, 3);
        assert_eq!(e13.commutator(&a).unwrap(), UniTriangular::elementary(field, 3, 0, 3, 1));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random(&mut rng, field, 4);
        assert!(g.commutator(&g).unwrap().is_identity());
    }

    #[test]
    fn shape_mismatches_are_errors() {
        let a = UniTriangular::identity(f(3), 3);
        let b = UniTriangular::identity(f(3), 4);
        let c = UniTriangular::identity(f(5), 3);
        assert!(matches!(a.mul(&b), Err(Error::Dimension(_))));
        assert!(matches!(a.commutator(&c), Err(Error::Modulus { .. })));
    }

    #[test]
    fn filtration_levels() {
        let field = f(3);
        assert_eq!(UniTriangular::elementary(field, 3, 0, 2, 1).filtration_level(), Some(2));
        let mut g = UniTriangular::elementary(field, 3, 0, 1, 1);
        g.set(0, 3, 1);
        assert_eq!(g.filtration_level(), Some(1));
        assert_eq!(UniTriangular::identity(field, 3).filtration_level(), None);
    }

    #[test]
    fn graded_images() {
        let field = f(3);
        let mut g = UniTriangular::elementary(field, 3, 0, 2, 1);
        g.set(0, 3, 1);
        let img = g.graded_image().unwrap();
        assert_eq!((img.k, img.coeffs), (2, vec![1, 0]));

        let g = UniTriangular::elementary(field, 2, 1, 2, 2);
        let img = g.graded_image().unwrap();
        assert_eq!((img.k, img.coeffs), (1, vec![0, 2]));

        let img = UniTriangular::shift(field, 2).graded_image().unwrap();
        assert_eq!((img.k, img.coeffs), (1, vec![1, 1]));

        assert_eq!(
            UniTriangular::identity(field, 3).graded_image(),
            Err(Error::NoGradedImage)
        );
    }

    #[test]
    fn bracket_table() {
        let field = f(5);
        let e12 = GradedLieElement::basis(field, 3, 0, 1);
        let e23 = GradedLieElement::basis(field, 3, 1, 1);
        let e34 = GradedLieElement::basis(field, 3, 2, 1);
        assert_eq!(e12.bracket(&e23).unwrap(), GradedLieElement::basis(field, 3, 0, 2));
        let mut minus_e13 = GradedLieElement::basis(field, 3, 0, 2);
        minus_e13.coeffs[0] = 4;
        assert_eq!(e23.bracket(&e12).unwrap(), minus_e13);
        assert!(e12.bracket(&e34).unwrap().is_zero());
    }

    #[test]
    fn solver_u4_example() {
        let field = f(3);
        let a = UniTriangular::shift(field, 3);
        let c = UniTriangular::elementary(field, 3, 0, 3, 1);
        let b = solve_commutator_equation(&a, &c, 3).unwrap();
        assert_eq!(b.commutator(&a).unwrap(), c);
        assert!(b.filtration_level().is_none_or(|l| l >= 2));
        // I + E13 is one valid answer
        let e13 = UniTriangular::elementary(field, 3, 0, 2, 1);
        assert_eq!(e13.commutator(&a).unwrap(), c);
    }

    #[test]
    fn solver_trivial_target() {
        let field = f(5);
        let a = UniTriangular::shift(field, 4);
        let b = solve_commutator_equation(&a, &UniTriangular::identity(field, 4), 4).unwrap();
        assert!(b.is_identity());
    }

    #[test]
    fn solver_u5_over_f2() {
        let field = f(2);
        let a = UniTriangular::shift(field, 4);
        let c = a.power(4);
        assert_eq!(c, UniTriangular::elementary(field, 4, 0, 4, 1));
        // exhaustive oracle over U_(3) of U_5(F_2): entries (0,3), (1,4), (0,4)
        let mut found = 0;
        for bits in 0..8u32 {
            let mut b = UniTriangular::identity(field, 4);
            b.set(0, 3, bits & 1);
            b.set(1, 4, (bits >> 1) & 1);
            b.set(0, 4, (bits >> 2) & 1);
            if b.commutator(&a).unwrap() == c {
                found += 1;
            }
        }
        assert!(found > 0);
        let b = solve_commutator_equation(&a, &c, 4).unwrap();
        assert_eq!(b.commutator(&a).unwrap(), c);
        assert!(b.filtration_level().is_none_or(|l| l >= 3));
    }

    #[test]
    fn solver_reports_inconsistent_level() {
        let field = f(3);
        // zero superdiagonal entry breaks the rank condition
        let a = UniTriangular::with_superdiagonal(field, &[1, 0, 1]);
        let c = UniTriangular::elementary(field, 3, 0, 2, 1);
        // [b, a] at level 2 has coefficients (b_1 a_2 - b_2 a_1, b_2 a_3 - b_3 a_2) = (-b_2, b_2)
        assert_eq!(
            solve_commutator_equation(&a, &c, 2),
            Err(Error::NoSolutionAtLevel { level: 2 })
        );
    }

    #[test]
    fn solver_rejects_bad_levels() {
        let field = f(3);
        let a = UniTriangular::shift(field, 3);
        let c = UniTriangular::elementary(field, 3, 0, 1, 1);
        assert!(matches!(solve_commutator_equation(&a, &c, 2), Err(Error::Input(_))));
        assert!(matches!(solve_commutator_equation(&a, &c, 4), Err(Error::Input(_))));
    }

    #[test]
    fn diagonal_conjugation() {
        let field = f(3);
        let g = UniTriangular::elementary(field, 2, 0, 1, 1);
        assert_eq!(g.conj_by_diagonal(&[1, 1, 1]).unwrap(), g);
        assert_eq!(
            g.conj_by_diagonal(&[1, 2, 1]).unwrap(),
            UniTriangular::elementary(field, 2, 0, 1, 2)
        );
        assert!(g.conj_by_diagonal(&[1, 0, 1]).is_err());
    }

    #[test]
    fn center_quotient_equality() {
        let field = f(3);
        let a = UniTriangular::shift(field, 3);
        let mut b = a.clone();
        b.set(0, 3, 2);
        assert_ne!(a, b);
        assert_eq!(CenterQuotientElement(a), CenterQuotientElement(b));
    }

    #[test]
    fn shift_power_formula() {
        for p in [2u32, 3, 5] {
            for fe in 1..=3u32 {
                let q = p.pow(fe) as usize;
                for n in 2..=8 {
                    let field = f(p);
                    let got = UniTriangular::shift(field, n).power(q as i64);
                    let mut want = UniTriangular::identity(field, n);
                    if q <= n {
                        for i in 0..=n - q {
                            want.set(i, i + q, 1);
                        }
                    }
                    assert_eq!(got, want, "p={p} f={fe} n={n}");
                }
            }
        }
    }

    #[test]
    fn solver_grid_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [2u32, 3, 5] {
            let field = f(p);
            for n in 3..=6 {
                for k in 2..=n {
                    for _ in 0..20 {
                        let diag: Vec<u32> = (0..n).map(|_| rng.gen_range(1..p)).collect();
                        let mut a = random_at_level(&mut rng, field, n, 2);
                        for (i, d) in diag.iter().enumerate() {
                            a.set(i, i + 1, *d);
                        }
                        let c = random_at_level(&mut rng, field, n, k);
                        let b = solve_commutator_equation(&a, &c, k).unwrap();
                        assert_eq!(b.commutator(&a).unwrap(), c);
                        assert!(b.filtration_level().is_none_or(|l| l >= k - 1));
                    }
                }
            }
        }
    }

    fn arb_group() -> impl Strategy<Value = (u32, usize, u64)> {
        (prop::sample::select(vec![2u32, 3, 5]), 2usize..7, any::<u64>())
    }

    proptest! {
        #[test]
        fn group_laws((p, n, seed) in arb_group()) {
            let field = f(p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, h, k) = (random(&mut rng, field, n), random(&mut rng, field, n), random(&mut rng, field, n));
            prop_assert_eq!(g.mul(&h).unwrap().mul(&k).unwrap(), g.mul(&h.mul(&k).unwrap()).unwrap());
            prop_assert!(g.mul(&g.inv()).unwrap().is_identity());
            prop_assert!(g.inv().mul(&g).unwrap().is_identity());
            prop_assert!(g.power(g.group_exponent() as i64).is_identity());
        }

        #[test]
        fn commutator_identities((p, n, seed) in arb_group()) {
            let field = f(p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g1, g2, h) = (random(&mut rng, field, n), random(&mut rng, field, n), random(&mut rng, field, n));
            let c = |x: &UniTriangular, y: &UniTriangular| x.commutator(y).unwrap();
            let m = |x: &UniTriangular, y: &UniTriangular| x.mul(y).unwrap();
            let g12 = m(&g1, &g2);
            prop_assert_eq!(c(&g12, &h), m(&m(&c(&g1, &c(&g2, &h)), &c(&g2, &h)), &c(&g1, &h)));
            prop_assert_eq!(c(&h, &g12), m(&m(&c(&h, &g1), &c(&g1, &c(&h, &g2))), &c(&h, &g2)));
        }

        #[test]
        fn filtration_and_brackets((p, n, seed) in arb_group(), kg in 1usize..4, kh in 1usize..4) {
            let field = f(p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_at_level(&mut rng, field, n, kg.min(n));
            let h = random_at_level(&mut rng, field, n, kh.min(n));
            let comm = g.commutator(&h).unwrap();
            if let (Some(lg), Some(lh)) = (g.filtration_level(), h.filtration_level()) {
                prop_assert!(comm.filtration_level().is_none_or(|l| l >= lg + lh));
                if lg + lh <= n {
                    let br = g.graded_image().unwrap().bracket(&h.graded_image().unwrap()).unwrap();
                    if !br.is_zero() {
                        let img = comm.graded_image().unwrap();
                        prop_assert_eq!(img, br);
                    }
                }
            }
        }

        #[test]
        fn diagonal_conjugation_is_a_homomorphism((p, n, seed) in arb_group()) {
            let field = f(p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, h) = (random(&mut rng, field, n), random(&mut rng, field, n));
            let d: Vec<u32> = (0..=n).map(|_| rng.gen_range(1..p.max(2))).collect();
            let cg = g.conj_by_diagonal(&d).unwrap();
            let ch = h.conj_by_diagonal(&d).unwrap();
            prop_assert_eq!(cg.mul(&ch).unwrap(), g.mul(&h).unwrap().conj_by_diagonal(&d).unwrap());
        }
    }
}
