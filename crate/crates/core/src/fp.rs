//! Arithmetic and dense linear algebra over the prime field F_p.
//!
//! Scalars are plain `u32` residues in `[0, p)`; the modulus lives in a [`Fp`]
//! context that is passed to every computation. Matrices are tiny here (a few
//! dozen columns at most), so everything is dense and row-major.

use crate::error::{Error, Result};

/// A residue in `[0, p)`. The modulus is carried by the surrounding [`Fp`].
pub type FpScalar = u32;

/// The prime field with `p` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    p: u32,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Fp {
    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p as u64) || p > 46_337 {
            return Err(Error::NotPrime(p as u64));
        }
        Ok(Fp { p })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.p) {
            return None;
        }
        // Fermat: a^(p-2)
        Some(self.pow(a, (self.p - 2) as u64))
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    /// Symmetric representative in `(-p/2, p/2]`, handy for display.
    pub fn signed(&self, a: u32) -> i64 {
        if a as u64 * 2 > self.p as u64 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FpMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(field: &Fp, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = FpMatrix::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has length {}, expected {cols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, field.from_i64(v));
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, field: &Fp, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(0u32, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
            })
            .collect())
    }

    /// Rank via row reduction of a copy.
    pub fn rank(&self, field: &Fp) -> usize {
        let mut m = self.clone();
        m.row_reduce(field, None).len()
    }

    /// In-place reduced row echelon form, optionally carrying a right-hand side.
    /// Pivots are chosen as the first nonzero entry scanning columns left to right
    /// and rows top to bottom. Returns the pivot columns.
    fn row_reduce(&mut self, field: &Fp, mut rhs: Option<&mut Vec<u32>>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
                if let Some(b) = rhs.as_deref_mut() {
                    b.swap(pr, r);
                }
            }
            let inv = field.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = field.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            if let Some(b) = rhs.as_deref_mut() {
                b[r] = field.mul(b[r], inv);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = field.sub(self.get(i, j), field.mul(f, self.get(r, j)));
                    self.set(i, j, v);
                }
                if let Some(b) = rhs.as_deref_mut() {
                    b[i] = field.sub(b[i], field.mul(f, b[r]));
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

/// A consistent linear system's full solution set: `particular + span(nullspace)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<u32>,
    pub nullspace: Vec<Vec<u32>>,
}

/// Solves `A x = b`. Returns `Ok(None)` when the system is inconsistent.
///
/// Free variables are set to zero in the particular solution, so the output is
/// reproducible for a given matrix.
pub fn gauss_solve(field: &Fp, a: &FpMatrix, b: &[u32]) -> Result<Option<AffineSolution>> {
    if a.rows() != b.len() {
        return Err(Error::Dimension(format!(
            "{} rows against right-hand side of length {}",
            a.rows(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut rhs: Vec<u32> = b.iter().map(|&v| v % field.p()).collect();
    let pivots = m.row_reduce(field, Some(&mut rhs));
    if rhs[pivots.len()..].iter().any(|&v| v != 0) {
        return Ok(None);
    }
    let mut particular = vec![0; a.cols()];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = rhs[r];
    }
    let mut nullspace = Vec::new();
    let mut is_pivot = vec![false; a.cols()];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    for free in (0..a.cols()).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0; a.cols()];
        v[free] = 1;
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = field.neg(m.get(r, free));
        }
        nullspace.push(v);
    }
    Ok(Some(AffineSolution {
        particular,
        nullspace,
    }))
}

/// The bidiagonal system whose solutions `b` give `[b, a] = c` at level `k` of the
/// graded Lie algebra of U_{n+1}: row `j` holds `a_{k+j-1}` in column `j` and
/// `-a_j` in column `j+1` (1-based).
pub fn banded_commutator_matrix(field: &Fp, a: &[u32], k: usize) -> Result<FpMatrix> {
    let n = a.len();
    if k < 2 || k > n {
        return Err(Error::Input(format!("level {k} outside 2..={n}")));
    }
    let mut m = FpMatrix::zeros(n + 1 - k, n + 2 - k);
    for r in 0..n + 1 - k {
        m.set(r, r, a[k + r - 1] % field.p());
        m.set(r, r + 1, field.neg(a[r] % field.p()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn enumerate(p: u32, len: usize) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..p).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(Fp::new(4).is_err());
        assert!(Fp::new(1).is_err());
        assert!(Fp::new(7).is_ok());
    }

    #[test]
    fn identity_system() {
        let f = Fp::new(3).unwrap();
        let a = FpMatrix::from_rows(&f, &[vec![1, 0], vec![0, 1]]).unwrap();
        let s = gauss_solve(&f, &a, &[2, 1]).unwrap().unwrap();
        assert_eq!(s.particular, vec![2, 1]);
        assert!(s.nullspace.is_empty());
    }

    #[test]
    fn underdetermined_over_f2() {
        let f = Fp::new(2).unwrap();
        let a = FpMatrix::from_rows(&f, &[vec![1, 1]]).unwrap();
        // brute force: the solutions of x + y = 1 over F_2
        let sols: Vec<_> = enumerate(2, 2)
            .into_iter()
            .filter(|x| a.mul_vec(&f, x).unwrap() == vec![1])
            .collect();
        assert_eq!(sols, vec![vec![0, 1], vec![1, 0]]);
        let s = gauss_solve(&f, &a, &[1]).unwrap().unwrap();
        assert_eq!(s.particular, vec![1, 0]);
        assert_eq!(s.nullspace, vec![vec![1, 1]]);
    }

    #[test]
    fn inconsistent_over_f3() {
        let f = Fp::new(3).unwrap();
        let a = FpMatrix::from_rows(&f, &[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(enumerate(3, 2)
            .iter()
            .all(|x| a.mul_vec(&f, x).unwrap() != vec![1, 0]));
        assert_eq!(gauss_solve(&f, &a, &[1, 0]).unwrap(), None);
    }

    #[test]
    fn dimension_mismatch() {
        let f = Fp::new(3).unwrap();
        let a = FpMatrix::zeros(2, 2);
        assert!(matches!(
            gauss_solve(&f, &a, &[1]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn banded_examples() {
        let f = Fp::new(5).unwrap();
        let m = banded_commutator_matrix(&f, &[1, 1, 1], 3).unwrap();
        assert_eq!(m, FpMatrix::from_rows(&f, &[vec![1, -1]]).unwrap());

        let m = banded_commutator_matrix(&f, &[1, 0, 1, 1], 2).unwrap();
        let expected = FpMatrix::from_rows(
            &f,
            &[vec![0, -1, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, -1]],
        )
        .unwrap();
        assert_eq!(m, expected);

        let m = banded_commutator_matrix(&f, &[1, 1], 2).unwrap();
        assert_eq!(m, FpMatrix::from_rows(&f, &[vec![1, -1]]).unwrap());

        assert!(banded_commutator_matrix(&f, &[1, 1], 3).is_err());
        assert!(banded_commutator_matrix(&f, &[1, 1], 1).is_err());
    }

    fn arb_system() -> impl Strategy<Value = (u32, usize, usize, Vec<u32>, Vec<u32>)> {
        (prop::sample::select(vec![2u32, 3, 5, 7]), 1usize..6, 1usize..7).prop_flat_map(
            |(p, r, c)| {
                (
                    Just(p),
                    Just(r),
                    Just(c),
                    prop::collection::vec(0..p, r * c),
                    prop::collection::vec(0..p, c),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn solves_consistent_systems((p, r, c, entries, x0) in arb_system()) {
            let f = Fp::new(p).unwrap();
            let mut a = FpMatrix::zeros(r, c);
            for i in 0..r {
                for j in 0..c {
                    a.set(i, j, entries[i * c + j]);
                }
            }
            let b = a.mul_vec(&f, &x0).unwrap();
            let s = gauss_solve(&f, &a, &b).unwrap().expect("consistent by construction");
            prop_assert_eq!(a.mul_vec(&f, &s.particular).unwrap(), b);
            prop_assert_eq!(s.nullspace.len(), c - a.rank(&f));
            for v in &s.nullspace {
                prop_assert!(a.mul_vec(&f, v).unwrap().iter().all(|&e| e == 0));
            }
        }

        #[test]
        fn banded_rows_are_bracket_coefficients(
            p in prop::sample::select(vec![2u32, 3, 5]),
            n in 2usize..8,
            seed in prop::collection::vec(0u32..5, 16),
        ) {
            let f = Fp::new(p).unwrap();
            for k in 2..=n {
                let a: Vec<u32> = seed[..n].iter().map(|v| v % p).collect();
                let b: Vec<u32> = seed[n - 1..2 * n + 1 - k].iter().map(|v| (v + 1) % p).collect();
                let m = banded_commutator_matrix(&f, &a, k).unwrap();
                let got = m.mul_vec(&f, &b).unwrap();
                for j in 0..n + 1 - k {
                    let want = f.sub(f.mul(b[j], a[j + k - 1]), f.mul(b[j + 1], a[j]));
                    prop_assert_eq!(got[j], want);
                }
            }
        }
    }
}
