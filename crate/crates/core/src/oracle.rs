//! Brute-force cross-checks.
//!
//! Cochain-level cohomology of small finite p-groups given by multiplication
//! tables, and exhaustive enumeration of homomorphisms from a presentation into
//! U_{n+1}(F_p) with a prescribed superdiagonal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohomology::CohClass1;
use crate::error::{Error, Result};
use crate::fp::{gauss_solve, is_prime, Fp, FpMatrix, FpScalar};
use crate::groups::{Factor, Presentation, Relator, DEFAULT_PRECISION};
use crate::unitriangular::UniTriangular;

/// Largest group order the cochain computations accept by default.
pub const DEFAULT_ORDER_BOUND: usize = 64;

/// Default bound on `free entries × log2(p)` for [`enumerate_homs`].
pub const DEFAULT_ENUMERATION_BITS: f64 = 32.0;

/// On-disk form of a table group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableGroupFile {
    pub order: usize,
    pub mul: Vec<Vec<usize>>,
    pub generators: Vec<usize>,
    pub relators: Vec<Vec<(usize, i64)>>,
}

/// A finite p-group as a multiplication table, with a matching presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupTable {
    order: usize,
    p: u32,
    mul: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
    generators: Vec<usize>,
    relators: Vec<Vec<(usize, i64)>>,
}

impl FiniteGroupTable {
    /// Validates the group axioms, that the order is a power of a prime, that
    /// the generators generate and that the relators hold.
    pub fn new(file: TableGroupFile) -> Result<Self> {
        let n = file.order;
        if n < 2 {
            return Err(Error::Input("table group must have order at least 2".into()));
        }
        let p = smallest_prime_factor(n as u64);
        let mut m = n;
        while m.is_multiple_of(p as usize) {
            m /= p as usize;
        }
        if m != 1 {
            return Err(Error::Input(format!("order {n} is not a prime power")));
        }
        if file.mul.len() != n || file.mul.iter().any(|r| r.len() != n) {
            return Err(Error::Input(format!("multiplication table must be {n}x{n}")));
        }
        if file.mul.iter().flatten().any(|&v| v >= n) {
            return Err(Error::Input("table entry out of range".into()));
        }
        let mul: Vec<usize> = file.mul.iter().flatten().copied().collect();
        let at = |a: usize, b: usize| mul[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| Error::Input("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or_else(|| Error::Input(format!("element {g} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = at(a, b);
                for c in 0..n {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(Error::Input(format!(
                            "multiplication is not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let g = FiniteGroupTable {
            order: n,
            p,
            mul,
            identity,
            inverse,
            generators: file.generators,
            relators: file.relators,
        };
        if g.generators.iter().any(|&x| x >= n) {
            return Err(Error::Input("generator index out of range".into()));
        }
        if g.bfs_tree().len() != n {
            return Err(Error::Input("generators do not generate the group".into()));
        }
        for (i, r) in g.relators.iter().enumerate() {
            if r.iter().any(|&(x, _)| x >= g.generators.len()) {
                return Err(Error::Input(format!("relator {i} uses an unknown generator")));
            }
            if g.eval_word(r) != identity {
                return Err(Error::Input(format!("relator {i} does not hold in the table")));
            }
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableGroupFile =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("table group JSON: {e}")))?;
        Self::new(file)
    }

    pub fn to_file(&self) -> TableGroupFile {
        TableGroupFile {
            order: self.order,
            mul: self.mul.chunks(self.order).map(<[usize]>::to_vec).collect(),
            generators: self.generators.clone(),
            relators: self.relators.clone(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn field(&self) -> Fp {
        Fp::new(self.p).expect("prime by construction")
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    fn pow(&self, g: usize, e: i64) -> usize {
        let base = if e < 0 { self.inv(g) } else { g };
        (0..e.unsigned_abs()).fold(self.identity, |acc, _| self.mul(acc, base))
    }

    fn eval_word(&self, w: &[(usize, i64)]) -> usize {
        w.iter().fold(self.identity, |acc, &(x, e)| {
            self.mul(acc, self.pow(self.generators[x], e))
        })
    }

    /// Spanning tree from the identity: `(element, parent, generator index)`,
    /// in BFS order. Edges multiply on the right.
    fn bfs_tree(&self) -> Vec<(usize, usize, usize)> {
        let mut seen = vec![false; self.order];
        let mut order = vec![(self.identity, self.identity, usize::MAX)];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(h) = queue.pop_front() {
            for (si, &s) in self.generators.iter().enumerate() {
                let hs = self.mul(h, s);
                if !seen[hs] {
                    seen[hs] = true;
                    order.push((hs, h, si));
                    queue.push_back(hs);
                }
            }
        }
        order
    }

    /// The attached presentation, with exponents kept mod `p^8`.
    pub fn presentation(&self) -> Result<Presentation> {
        let modulus = (self.p as u64).pow(DEFAULT_PRECISION);
        let relators = self
            .relators
            .iter()
            .map(|r| {
                let factors = r
                    .iter()
                    .map(|&(x, e)| Factor::Power {
                        generator: x,
                        exponent: (e as i128).rem_euclid(modulus as i128) as u64,
                    })
                    .collect();
                Relator::new(factors, modulus)
            })
            .collect();
        Presentation::new(self.p, DEFAULT_PRECISION, self.generators.len(), relators)
    }

    /// Values of a cochain on the generators.
    pub fn cochain_to_class(&self, c: &Cochain1) -> CohClass1 {
        CohClass1::new(self.generators.iter().map(|&g| c.values[g]).collect())
    }

    /// The homomorphism `G -> F_p` with the given values on generators.
    pub fn class_to_cochain(&self, alpha: &CohClass1) -> Result<Cochain1> {
        let f = self.field();
        if alpha.len() != self.generators.len() {
            return Err(Error::Dimension("class length vs generator count".into()));
        }
        let mut values = vec![0; self.order];
        for &(h, parent, s) in self.bfs_tree().iter().skip(1) {
            values[h] = f.add(values[parent], alpha.coeffs[s] % f.p());
        }
        let c = Cochain1 { values };
        if !d1(self, &c).values.iter().all(|&v| v == 0) {
            return Err(Error::Input(format!(
                "{:?} does not extend to a homomorphism of the table group",
                alpha.coeffs
            )));
        }
        Ok(c)
    }
}

fn smallest_prime_factor(n: u64) -> u32 {
    (2..=n).find(|&q| n.is_multiple_of(q) && is_prime(q)).unwrap_or(n) as u32
}

/// Builders for the table groups used across the test suites.
pub mod corpus {
    use super::*;

    pub fn cyclic(m: usize) -> FiniteGroupTable {
        let mul = (0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect();
        FiniteGroupTable::new(TableGroupFile {
            order: m,
            mul,
            generators: vec![1 % m],
            relators: vec![vec![(0, m as i64)]],
        })
        .expect("cyclic table")
    }

    /// `(Z/p)^2` with generators `x = (1, 0)`, `y = (0, 1)`.
    pub fn elementary_rank2(p: usize) -> FiniteGroupTable {
        let idx = |a: usize, b: usize| a % p + p * (b % p);
        let n = p * p;
        let mul = (0..n)
            .map(|u| (0..n).map(|v| idx(u % p + v % p, u / p + v / p)).collect())
            .collect();
        FiniteGroupTable::new(TableGroupFile {
            order: n,
            mul,
            generators: vec![idx(1, 0), idx(0, 1)],
            relators: vec![
                vec![(0, p as i64)],
                vec![(1, p as i64)],
                vec![(0, 1), (1, 1), (0, -1), (1, -1)],
            ],
        })
        .expect("elementary abelian table")
    }

    /// U_3(F_p): `(a, b, c)` stands for `I + aE12 + bE23 + cE13`.
    pub fn heisenberg(p: usize) -> FiniteGroupTable {
        let idx = |a: usize, b: usize, c: usize| a % p + p * (b % p) + p * p * (c % p);
        let n = p * p * p;
        let split = |u: usize| (u % p, (u / p) % p, u / (p * p));
        let mul = (0..n)
            .map(|u| {
                let (a, b, c) = split(u);
                (0..n)
                    .map(|v| {
                        let (a2, b2, c2) = split(v);
                        idx(a + a2, b + b2, c + c2 + a * b2)
                    })
                    .collect()
            })
            .collect();
        let comm = vec![(0, 1), (1, 1), (0, -1), (1, -1)];
        let comm_with = |x: usize| {
            let mut w = comm.clone();
            w.push((x, 1));
            w.extend(comm.iter().rev().map(|&(g, e)| (g, -e)));
            w.push((x, -1));
            w
        };
        let mut comm_p = Vec::new();
        for _ in 0..p {
            comm_p.extend_from_slice(&comm);
        }
        FiniteGroupTable::new(TableGroupFile {
            order: n,
            mul,
            generators: vec![idx(1, 0, 0), idx(0, 1, 0)],
            relators: vec![
                vec![(0, p as i64)],
                vec![(1, p as i64)],
                comm_p,
                comm_with(0),
                comm_with(1),
            ],
        })
        .expect("Heisenberg table")
    }

    /// Every corpus table group with its name.
    pub fn all() -> Vec<(&'static str, FiniteGroupTable)> {
        vec![
            ("Z/2", cyclic(2)),
            ("Z/3", cyclic(3)),
            ("Z/4", cyclic(4)),
            ("Z/9", cyclic(9)),
            ("(Z/2)^2", elementary_rank2(2)),
            ("(Z/3)^2", elementary_rank2(3)),
            ("U3(F2)", heisenberg(2)),
            ("U3(F3)", heisenberg(3)),
        ]
    }

    pub fn by_name(name: &str) -> Option<FiniteGroupTable> {
        all().into_iter().find(|(n, _)| *n == name).map(|(_, g)| g)
    }
}

/// A function `G -> F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cochain1 {
    pub values: Vec<FpScalar>,
}

/// A function `G × G -> F_p`, indexed by `g1 * |G| + g2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cochain2 {
    pub values: Vec<FpScalar>,
}

/// A function `G^3 -> F_p`, indexed by `(g1 * |G| + g2) * |G| + g3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain3 {
    pub values: Vec<FpScalar>,
}

impl Cochain2 {
    /// `(g1, g2) -> a(g1)·b(g2)`.
    pub fn product(field: Fp, a: &Cochain1, b: &Cochain1) -> Self {
        let values = a
            .values
            .iter()
            .flat_map(|&x| b.values.iter().map(move |&y| field.mul(x, y)))
            .collect();
        Cochain2 { values }
    }

    pub fn add(&self, field: Fp, other: &Self) -> Self {
        Cochain2 {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| field.add(a, b))
                .collect(),
        }
    }
}

/// `∂c(g1, g2) = c(g1) - c(g1 g2) + c(g2)`.
pub fn d1(g: &FiniteGroupTable, c: &Cochain1) -> Cochain2 {
    let f = g.field();
    let n = g.order;
    let mut values = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            values.push(f.add(f.sub(c.values[a], c.values[g.mul(a, b)]), c.values[b]));
        }
    }
    Cochain2 { values }
}

/// `∂c(g1, g2, g3) = c(g1, g2) - c(g1, g2 g3) + c(g1 g2, g3) - c(g2, g3)`.
pub fn d2(g: &FiniteGroupTable, c: &Cochain2) -> Cochain3 {
    let f = g.field();
    let n = g.order;
    let at = |a: usize, b: usize| c.values[a * n + b];
    let mut values = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(a, b);
            for e in 0..n {
                let v = f.sub(
                    f.add(f.sub(at(a, b), at(a, g.mul(b, e))), at(ab, e)),
                    at(b, e),
                );
                values.push(v);
            }
        }
    }
    Cochain3 { values }
}

/// Row echelon form kept sorted by pivot; each row carries a tag vector that
/// follows it through the elimination.
#[derive(Debug, Clone, Default)]
struct Echelon {
    rows: Vec<(usize, Vec<FpScalar>, Vec<FpScalar>)>,
}

impl Echelon {
    fn reduce(&self, f: Fp, v: &mut [FpScalar], tag: &mut [FpScalar]) {
        for (pivot, row, rtag) in &self.rows {
            let c = v[*pivot];
            if c == 0 {
                continue;
            }
            for (x, &r) in v.iter_mut().zip(row).skip(*pivot) {
                *x = f.sub(*x, f.mul(c, r));
            }
            for (t, &r) in tag.iter_mut().zip(rtag) {
                *t = f.add(*t, f.mul(c, r));
            }
        }
    }

    /// Adds `v` (tagged `tag`) unless it is already in the span.
    fn insert(&mut self, f: Fp, mut v: Vec<FpScalar>, tag: Vec<FpScalar>) -> bool {
        let mut acc = vec![0; tag.len()];
        self.reduce(f, &mut v, &mut acc);
        let Some(pivot) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = f.inv(v[pivot]).expect("nonzero pivot");
        for x in v.iter_mut() {
            *x = f.mul(*x, inv);
        }
        let t: Vec<_> = tag
            .iter()
            .zip(&acc)
            .map(|(&a, &b)| f.mul(f.sub(a, b), inv))
            .collect();
        let at = self.rows.partition_point(|(p, _, _)| *p < pivot);
        self.rows.insert(at, (pivot, v, t));
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// H^1 and H^2 of a table group, with canonical coordinates on H^2.
#[derive(Debug, Clone)]
pub struct TableCohomology {
    group: FiniteGroupTable,
    h1: Vec<Cochain1>,
    h2: Vec<Cochain2>,
    quotient: Echelon,
}

impl TableCohomology {
    pub fn new(group: &FiniteGroupTable) -> Result<Self> {
        Self::with_bound(group, DEFAULT_ORDER_BOUND)
    }

    pub fn with_bound(group: &FiniteGroupTable, bound: usize) -> Result<Self> {
        if group.order > bound {
            return Err(Error::Resource(format!(
                "table group of order {} exceeds the bound {bound}",
                group.order
            )));
        }
        let h1 = h1_basis(group)?;
        let (h2, quotient) = h2_basis(group)?;
        Ok(TableCohomology {
            group: group.clone(),
            h1,
            h2,
            quotient,
        })
    }

    pub fn group(&self) -> &FiniteGroupTable {
        &self.group
    }

    pub fn h1(&self) -> &[Cochain1] {
        &self.h1
    }

    pub fn h2(&self) -> &[Cochain2] {
        &self.h2
    }

    pub fn h2_dim(&self) -> usize {
        self.h2.len()
    }

    /// Coordinates of a 2-cocycle in the H^2 basis; errors on non-cocycles.
    pub fn class_of(&self, c: &Cochain2) -> Result<Vec<FpScalar>> {
        let f = self.group.field();
        let mut v = c.values.clone();
        let mut tag = vec![0; self.h2.len()];
        self.quotient.reduce(f, &mut v, &mut tag);
        if v.iter().any(|&x| x != 0) {
            return Err(Error::Input("cochain is not a 2-cocycle".into()));
        }
        Ok(tag)
    }

    /// The class of `(g1, g2) -> α(g1) β(g2)`.
    pub fn cup(&self, alpha: &Cochain1, beta: &Cochain1) -> Result<Vec<FpScalar>> {
        self.class_of(&Cochain2::product(self.group.field(), alpha, beta))
    }

    /// All elements of H^1 in lexicographic order of basis coordinates.
    pub fn h1_elements(&self) -> Vec<Cochain1> {
        let f = self.group.field();
        let mut out = Vec::new();
        let mut t = vec![0u32; self.h1.len()];
        loop {
            let mut values = vec![0; self.group.order];
            for (&ti, b) in t.iter().zip(&self.h1) {
                for (v, &bv) in values.iter_mut().zip(&b.values) {
                    *v = f.add(*v, f.mul(ti, bv));
                }
            }
            out.push(Cochain1 { values });
            if !next_lex(&mut t, f.p()) {
                return out;
            }
        }
    }
}

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

fn d1_matrix(g: &FiniteGroupTable) -> FpMatrix {
    let f = g.field();
    let n = g.order;
    let mut m = FpMatrix::zeros(n * n, n);
    for a in 0..n {
        for b in 0..n {
            let r = a * n + b;
            m.set(r, a, f.add(m.get(r, a), 1));
            m.set(r, g.mul(a, b), f.sub(m.get(r, g.mul(a, b)), 1));
            m.set(r, b, f.add(m.get(r, b), 1));
        }
    }
    m
}

fn h1_basis(g: &FiniteGroupTable) -> Result<Vec<Cochain1>> {
    let f = g.field();
    let m = d1_matrix(g);
    let sol = gauss_solve(&f, &m, &vec![0; m.rows()])?
        .ok_or_else(|| Error::Internal("homogeneous system without solution".into()))?;
    Ok(sol.nullspace.into_iter().map(|values| Cochain1 { values }).collect())
}

/// Z^2 is parametrized by `c(1, 1)` and the rows `c(s, ·)` for generators `s`:
/// along the spanning tree, `c(h s, g) = c(h, s g) + c(s, g) - c(h, s)`. All
/// cocycle equations are then imposed on these linear forms.
fn h2_basis(g: &FiniteGroupTable) -> Result<(Vec<Cochain2>, Echelon)> {
    let f = g.field();
    let n = g.order;
    let k = g.generators.len();
    let unknowns = 1 + k * n;
    let u_s = |s: usize, e: usize| 1 + s * n + e;
    let mut forms: Vec<Vec<FpScalar>> = vec![Vec::new(); n * n];
    for e in 0..n {
        let mut v = vec![0; unknowns];
        v[0] = 1;
        forms[g.identity * n + e] = v;
    }
    for &(h, parent, s) in g.bfs_tree().iter().skip(1) {
        let gen = g.generators[s];
        let sub = forms[parent * n + gen].clone();
        for e in 0..n {
            let mut v = forms[parent * n + g.mul(gen, e)].clone();
            v[u_s(s, e)] = f.add(v[u_s(s, e)], 1);
            for (x, &y) in v.iter_mut().zip(&sub) {
                *x = f.sub(*x, y);
            }
            forms[h * n + e] = v;
        }
    }
    let mut eqs = Echelon::default();
    let mut row = vec![0; unknowns];
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(a, b);
            for e in 0..n {
                let terms = [
                    (&forms[a * n + b], 1),
                    (&forms[a * n + g.mul(b, e)], f.p() - 1),
                    (&forms[ab * n + e], 1),
                    (&forms[b * n + e], f.p() - 1),
                ];
                row.iter_mut().for_each(|x| *x = 0);
                for (form, s) in terms {
                    for (x, &y) in row.iter_mut().zip(form) {
                        *x = f.add(*x, f.mul(s, y));
                    }
                }
                if row.iter().any(|&x| x != 0) {
                    eqs.insert(f, row.clone(), vec![]);
                    if eqs.rank() == unknowns {
                        break;
                    }
                }
            }
        }
    }
    let mut m = FpMatrix::zeros(eqs.rank(), unknowns);
    for (r, (_, v, _)) in eqs.rows.iter().enumerate() {
        for (c, &x) in v.iter().enumerate() {
            m.set(r, c, x);
        }
    }
    let sol = gauss_solve(&f, &m, &vec![0; eqs.rank()])?
        .ok_or_else(|| Error::Internal("homogeneous system without solution".into()))?;
    let cocycles: Vec<Cochain2> = sol
        .nullspace
        .iter()
        .map(|u| Cochain2 {
            values: forms
                .iter()
                .map(|form| form.iter().zip(u).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
                .collect(),
        })
        .collect();

    // B^2 is spanned by the coboundaries of point masses.
    let mut quotient = Echelon::default();
    let mut boundaries = Vec::new();
    for e in 0..n {
        let mut delta = vec![0; n];
        delta[e] = 1;
        boundaries.push(d1(g, &Cochain1 { values: delta }).values);
    }
    let mut reps = Vec::new();
    let max_dim = cocycles.len();
    for b in boundaries {
        quotient.insert(f, b, vec![0; max_dim]);
    }
    for z in cocycles {
        let mut tag = vec![0; max_dim];
        tag[reps.len()] = 1;
        if quotient.insert(f, z.values.clone(), tag) {
            reps.push(z);
        }
    }
    let dim = reps.len();
    for (_, _, t) in quotient.rows.iter_mut() {
        t.truncate(dim);
    }
    Ok((reps, quotient))
}

pub fn h1_table(g: &FiniteGroupTable) -> Result<Vec<Cochain1>> {
    Ok(TableCohomology::new(g)?.h1)
}

pub fn h2_table(g: &FiniteGroupTable) -> Result<Vec<Cochain2>> {
    Ok(TableCohomology::new(g)?.h2)
}

pub fn cup_table(coh: &TableCohomology, alpha: &Cochain1, beta: &Cochain1) -> Result<Vec<FpScalar>> {
    coh.cup(alpha, beta)
}

/// Outcome of checking a candidate defining set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefiningSetCheck {
    /// The equations hold; coordinates of the value in H^2.
    Value(Vec<FpScalar>),
    /// The equation for `c_ij` (1-based) fails.
    Violation { i: usize, j: usize },
}

/// Checks `∂c_ij = Σ_{h=i}^{j-1} c_ih · c_{h+1,j}` for `(i, j) ≠ (1, n)`, with
/// `c_ii = α_i`, and returns the class of `Σ_h c_1h · c_{h+1,n}`.
pub fn defining_set_verify(
    coh: &TableCohomology,
    alphas: &[Cochain1],
    c: &BTreeMap<(usize, usize), Cochain1>,
) -> Result<DefiningSetCheck> {
    let g = &coh.group;
    let f = g.field();
    let n = alphas.len();
    if n < 2 {
        return Err(Error::Input("defining sets need n >= 2".into()));
    }
    let get = |i: usize, j: usize| -> Result<&Cochain1> {
        if i == j {
            return Ok(&alphas[i - 1]);
        }
        c.get(&(i, j))
            .ok_or_else(|| Error::Input(format!("defining set lacks c_{i}{j}")))
    };
    let rhs = |i: usize, j: usize| -> Result<Cochain2> {
        let mut acc = Cochain2 {
            values: vec![0; g.order * g.order],
        };
        for h in i..j {
            acc = acc.add(f, &Cochain2::product(f, get(i, h)?, get(h + 1, j)?));
        }
        Ok(acc)
    };
    for len in 1..n {
        for i in 1..=n - len {
            let j = i + len;
            if (i, j) == (1, n) {
                continue;
            }
            if d1(g, get(i, j)?) != rhs(i, j)? {
                return Ok(DefiningSetCheck::Violation { i, j });
            }
        }
    }
    Ok(DefiningSetCheck::Value(coh.class_of(&rhs(1, n)?)?))
}

/// An affine subspace `base + span` of H^2, in basis coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSet {
    pub base: Vec<FpScalar>,
    /// Echelon basis of the direction space.
    pub span: Vec<Vec<FpScalar>>,
    p: u32,
}

impl ValueSet {
    fn new(field: Fp, base: Vec<FpScalar>, generators: Vec<Vec<FpScalar>>) -> Self {
        let mut e = Echelon::default();
        for v in generators {
            e.insert(field, v, vec![]);
        }
        let mut base = base;
        e.reduce(field, &mut base, &mut []);
        ValueSet {
            base,
            span: e.rows.into_iter().map(|(_, v, _)| v).collect(),
            p: field.p(),
        }
    }

    pub fn contains(&self, v: &[FpScalar]) -> bool {
        let f = Fp::new(self.p).expect("prime");
        let mut e = Echelon::default();
        for s in &self.span {
            e.insert(f, s.clone(), vec![]);
        }
        let mut d: Vec<_> = v.iter().zip(&self.base).map(|(&a, &b)| f.sub(a, b)).collect();
        e.reduce(f, &mut d, &mut []);
        d.iter().all(|&x| x == 0)
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&vec![0; self.base.len()])
    }

    /// Every element, for exactness checks on small cases.
    pub fn elements(&self) -> BTreeSet<Vec<FpScalar>> {
        let f = Fp::new(self.p).expect("prime");
        let mut out = BTreeSet::new();
        let mut t = vec![0u32; self.span.len()];
        loop {
            let mut v = self.base.clone();
            for (&ti, s) in t.iter().zip(&self.span) {
                for (x, &y) in v.iter_mut().zip(s) {
                    *x = f.add(*x, f.mul(ti, y));
                }
            }
            out.insert(v);
            if !next_lex(&mut t, self.p) {
                return out;
            }
        }
    }
}

fn solve_d1(coh: &TableCohomology, target: &Cochain2) -> Result<Option<Cochain1>> {
    let g = &coh.group;
    let sol = gauss_solve(&g.field(), &d1_matrix(g), &target.values)?;
    Ok(sol.map(|s| Cochain1 { values: s.particular }))
}

/// The triple Massey product as the coset `v0 + α1⌣H^1 + H^1⌣α3`.
pub fn massey3_value_set(
    coh: &TableCohomology,
    a1: &Cochain1,
    a2: &Cochain1,
    a3: &Cochain1,
) -> Result<ValueSet> {
    let f = coh.group.field();
    let c12 = solve_d1(coh, &Cochain2::product(f, a1, a2))?;
    let c23 = solve_d1(coh, &Cochain2::product(f, a2, a3))?;
    let (Some(c12), Some(c23)) = (c12, c23) else {
        return Err(Error::NotDefined(
            "a consecutive cup product is nonzero".into(),
        ));
    };
    let v0 = coh.class_of(&Cochain2::product(f, a1, &c23).add(f, &Cochain2::product(f, &c12, a3)))?;
    let mut dirs = Vec::new();
    for z in &coh.h1 {
        dirs.push(coh.cup(a1, z)?);
        dirs.push(coh.cup(z, a3)?);
    }
    Ok(ValueSet::new(f, v0, dirs))
}

/// The values of all defining sets `(c12 + z, c23 + z')`, by enumeration.
pub fn massey3_values_by_enumeration(
    coh: &TableCohomology,
    a1: &Cochain1,
    a2: &Cochain1,
    a3: &Cochain1,
) -> Result<BTreeSet<Vec<FpScalar>>> {
    let f = coh.group.field();
    let (Some(c12), Some(c23)) = (
        solve_d1(coh, &Cochain2::product(f, a1, a2))?,
        solve_d1(coh, &Cochain2::product(f, a2, a3))?,
    ) else {
        return Err(Error::NotDefined("a consecutive cup product is nonzero".into()));
    };
    let shift = |c: &Cochain1, z: &Cochain1| Cochain1 {
        values: c.values.iter().zip(&z.values).map(|(&x, &y)| f.add(x, y)).collect(),
    };
    let homs = coh.h1_elements();
    let mut out = BTreeSet::new();
    for z in &homs {
        for z2 in &homs {
            let mut c = BTreeMap::new();
            c.insert((1, 2), shift(&c12, z));
            c.insert((2, 3), shift(&c23, z2));
            match defining_set_verify(coh, &[a1.clone(), a2.clone(), a3.clone()], &c)? {
                DefiningSetCheck::Value(v) => {
                    out.insert(v);
                }
                DefiningSetCheck::Violation { i, j } => {
                    return Err(Error::Internal(format!("shifted defining set fails at c_{i}{j}")));
                }
            }
        }
    }
    Ok(out)
}

/// Options for [`enumerate_homs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    /// Work in U_{n+1}/Z: the corner entry is ignored and relators need only be central.
    pub quotient_center: bool,
    /// Upper bound on `free entries × log2(p)`.
    pub budget_bits: f64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            quotient_center: false,
            budget_bits: DEFAULT_ENUMERATION_BITS,
        }
    }
}

/// Every assignment of generators to U_{n+1}(F_p) with the given superdiagonal
/// that satisfies the relators (mod the centre if requested).
///
/// Free entries are ordered generator-major, then by matrix position, and the
/// assignments are visited in lexicographic order of their values.
#[derive(Debug, Clone)]
pub struct HomEnumerator<'a> {
    pres: &'a Presentation,
    images: Vec<UniTriangular>,
    slots: Vec<(usize, usize, usize)>,
    counter: Vec<u32>,
    quotient_center: bool,
    done: bool,
}

fn free_slots(n: usize, d: usize, quotient_center: bool) -> Vec<(usize, usize, usize)> {
    let mut slots = Vec::new();
    for x in 0..d {
        for i in 0..=n {
            for j in i + 2..=n {
                if quotient_center && (i, j) == (0, n) {
                    continue;
                }
                slots.push((x, i, j));
            }
        }
    }
    slots
}

pub fn enumerate_homs<'a>(
    pres: &'a Presentation,
    alphas: &[CohClass1],
    opts: EnumerationOptions,
) -> Result<HomEnumerator<'a>> {
    let n = alphas.len();
    if n == 0 {
        return Err(Error::Input("need at least one class".into()));
    }
    let d = pres.generator_count();
    for a in alphas {
        if a.len() != d {
            return Err(Error::Dimension("class length vs generator count".into()));
        }
    }
    let slots = free_slots(n, d, opts.quotient_center);
    let bits = slots.len() as f64 * (pres.p() as f64).log2();
    if bits > opts.budget_bits {
        return Err(Error::Resource(format!(
            "enumeration needs {} free entries ({bits:.1} bits), budget is {} bits",
            slots.len(),
            opts.budget_bits
        )));
    }
    let field = pres.field();
    let images = (0..d)
        .map(|x| {
            let diag: Vec<_> = alphas.iter().map(|a| a.coeffs[x] % field.p()).collect();
            UniTriangular::with_superdiagonal(field, &diag)
        })
        .collect::<Vec<_>>();
    pres.first_failing_relator(&images)?;
    Ok(HomEnumerator {
        pres,
        images,
        counter: vec![0; slots.len()],
        slots,
        quotient_center: opts.quotient_center,
        done: false,
    })
}

impl HomEnumerator<'_> {
    /// Number of assignments the full enumeration visits.
    pub fn space_size(&self) -> u128 {
        (self.pres.p() as u128).pow(self.slots.len() as u32)
    }

    fn accepts(&self) -> Result<bool> {
        let fail = if self.quotient_center {
            self.pres.first_failing_relator_mod_center(&self.images)?
        } else {
            self.pres.first_failing_relator(&self.images)?
        };
        Ok(fail.is_none())
    }

    fn advance(&mut self) {
        let p = self.pres.p();
        for (k, v) in self.counter.iter_mut().enumerate().rev() {
            *v += 1;
            let (x, i, j) = self.slots[k];
            if *v < p {
                self.images[x].set(i, j, *v);
                return;
            }
            *v = 0;
            self.images[x].set(i, j, 0);
        }
        self.done = true;
    }

    /// Fixes the leading free entries to `prefix` and enumerates the rest.
    fn restricted(&self, prefix: &[u32]) -> Self {
        let mut e = self.clone();
        for (k, &v) in prefix.iter().enumerate() {
            let (x, i, j) = e.slots[k];
            e.images[x].set(i, j, v);
        }
        e.slots.drain(..prefix.len());
        e.counter = vec![0; e.slots.len()];
        e
    }
}

impl Iterator for HomEnumerator<'_> {
    type Item = Vec<UniTriangular>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let ok = self.accepts().unwrap_or(false);
            let out = ok.then(|| self.images.clone());
            self.advance();
            if out.is_some() {
                return out;
            }
        }
        None
    }
}

/// The first assignment in enumeration order, searched in parallel over the
/// values of the leading free entries.
pub fn first_hom(
    pres: &Presentation,
    alphas: &[CohClass1],
    opts: EnumerationOptions,
) -> Result<Option<Vec<UniTriangular>>> {
    let e = enumerate_homs(pres, alphas, opts)?;
    let p = pres.p();
    let lead = e.slots.len().min(2);
    let prefixes: Vec<Vec<u32>> = (0..p.pow(lead as u32))
        .map(|code| (0..lead).rev().map(|k| (code / p.pow(k as u32)) % p).collect())
        .collect();
    Ok(prefixes
        .par_iter()
        .map(|prefix| e.restricted(prefix).next())
        .find_map_first(|x| x))
}

/// `true` iff some assignment passes; see [`first_hom`].
pub fn hom_exists(pres: &Presentation, alphas: &[CohClass1], opts: EnumerationOptions) -> Result<bool> {
    Ok(first_hom(pres, alphas, opts)?.is_some())
}
