//! Exact integer linear algebra.
//!
//! Matrices carry arbitrary-precision entries. The Smith normal form engine is
//! generic over its scalar so that small inputs can run on checked `i64`
//! arithmetic; any overflow abandons the machine-word attempt and the same
//! reduction is replayed on [`BigInt`]s, so results never depend on which
//! representation finished the job.
//!
//! Presentation convention used throughout the crate: rows are relators and
//! columns are generators. The cokernel of an `r x c` matrix `A` is
//! `Z^c / rowspace(A)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::MalformedMatrix("matrix must be non-empty".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::MalformedMatrix(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    pub fn from_rows<T: Into<BigInt>>(rows: Vec<Vec<T>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::MalformedMatrix("ragged rows".into()));
        }
        let entries = rows.into_iter().flatten().map(Into::into).collect();
        Self::new(nrows, ncols, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigInt::one();
        }
        Self { rows: n, cols: n, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[BigInt] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_nested(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        Self { rows: self.cols, cols: self.rows, entries }
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                entries.push(acc);
            }
        }
        Ok(IntMatrix { rows: self.rows, cols: rhs.cols, entries })
    }

    fn to_i64(&self) -> Option<Vec<i64>> {
        self.entries.iter().map(ToPrimitive::to_i64).collect()
    }

    fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }
}

/// Text form `a,b;c,d`: rows separated by `;`, entries by `,`. Whitespace is ignored.
impl FromStr for IntMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::MalformedMatrix("empty matrix text".into()));
        }
        let rows = compact
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|e| {
                        e.parse::<BigInt>()
                            .map_err(|_| Error::MalformedMatrix(format!("bad entry {e:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(";")?;
            }
            for (j, e) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

/// `u * a * v == d` with `u`, `v` unimodular and `d` diagonal in Smith form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SnfDecomposition {
    /// The leading `min(rows, cols)` diagonal entries of `d`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Isomorphism class of a finitely generated abelian group in invariant
/// factor form: `Z^free_rank + Z/t_1 + ... + Z/t_k` with `2 <= t_1 | t_2 | ... | t_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianGroup {
    torsion: Vec<BigInt>,
    free_rank: usize,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        Self { torsion: Vec::new(), free_rank: 0 }
    }

    /// `Z/n` (trivial for `n = 1`, `Z` for `n = 0`).
    pub fn cyclic(n: impl Into<BigInt>) -> Self {
        let n: BigInt = n.into().abs();
        if n.is_zero() {
            Self { torsion: Vec::new(), free_rank: 1 }
        } else if n.is_one() {
            Self::trivial()
        } else {
            Self { torsion: vec![n], free_rank: 0 }
        }
    }

    /// Accepts a divisibility chain of non-negative factors; units are dropped
    /// and zeros become free summands.
    pub fn from_invariant_factors<I>(factors: I, free_rank: usize) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<BigInt>,
    {
        let factors: Vec<BigInt> = factors.into_iter().map(Into::into).collect();
        if factors.iter().any(Signed::is_negative) {
            return Err(Error::InvalidFactors("negative factor".into()));
        }
        for pair in factors.windows(2) {
            if !divides(&pair[0], &pair[1]) {
                return Err(Error::InvalidFactors(format!(
                    "{} does not divide {}",
                    pair[0], pair[1]
                )));
            }
        }
        let zeros = factors.iter().filter(|x| x.is_zero()).count();
        let torsion = factors
            .into_iter()
            .filter(|x| !x.is_zero() && !x.is_one())
            .collect();
        Ok(Self { torsion, free_rank: free_rank + zeros })
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Group order, `None` when the group is infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion.iter().product())
    }

    /// True iff the group is `Z/n` for the given `n >= 2`.
    pub fn is_cyclic_of_order(&self, n: i64) -> bool {
        self.free_rank == 0 && self.torsion.len() == 1 && self.torsion[0] == BigInt::from(n)
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z_{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

fn divides(a: &BigInt, b: &BigInt) -> bool {
    if a.is_zero() {
        b.is_zero()
    } else {
        (b % a).is_zero()
    }
}

/// Scalar operations the reduction engine needs. Every fallible operation
/// returns `None` on overflow.
trait Scalar: Clone + PartialEq {
    fn nil() -> Self;
    fn unit() -> Self;
    fn is_nil(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn cmp_abs(&self, other: &Self) -> Ordering;
    /// Euclidean quotient: `self - q * d` lies in `[0, |d|)`.
    fn quot_euclid(&self, d: &Self) -> Option<Self>;
    /// `self - q * x`
    fn sub_mul(&self, q: &Self, x: &Self) -> Option<Self>;
    fn plus(&self, x: &Self) -> Option<Self>;
    fn negated(&self) -> Option<Self>;
    fn divisible_by(&self, d: &Self) -> bool;
}

impl Scalar for i64 {
    fn nil() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn is_neg(&self) -> bool {
        *self < 0
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.unsigned_abs().cmp(&other.unsigned_abs())
    }
    fn quot_euclid(&self, d: &Self) -> Option<Self> {
        self.checked_div_euclid(*d)
    }
    fn sub_mul(&self, q: &Self, x: &Self) -> Option<Self> {
        self.checked_sub(q.checked_mul(*x)?)
    }
    fn plus(&self, x: &Self) -> Option<Self> {
        self.checked_add(*x)
    }
    fn negated(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn divisible_by(&self, d: &Self) -> bool {
        // d != 0 at every call site; i64::MIN % -1 is the only trap.
        *d == -1 || self % d == 0
    }
}

impl Scalar for BigInt {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_neg(&self) -> bool {
        Signed::is_negative(self)
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.magnitude().cmp(other.magnitude())
    }
    fn quot_euclid(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d);
        Some(if Signed::is_negative(&r) {
            if Signed::is_negative(d) {
                q + 1
            } else {
                q - 1
            }
        } else {
            q
        })
    }
    fn sub_mul(&self, q: &Self, x: &Self) -> Option<Self> {
        Some(self - q * x)
    }
    fn plus(&self, x: &Self) -> Option<Self> {
        Some(self + x)
    }
    fn negated(&self) -> Option<Self> {
        Some(-self)
    }
    fn divisible_by(&self, d: &Self) -> bool {
        Zero::is_zero(&(self % d))
    }
}

/// In-place Smith reduction state. `u` and `v` are tracked only on request.
struct Reduction<T> {
    rows: usize,
    cols: usize,
    a: Vec<T>,
    u: Option<Vec<T>>,
    v: Option<Vec<T>>,
}

fn identity_vec<T: Scalar>(n: usize) -> Vec<T> {
    let mut m = vec![T::nil(); n * n];
    for i in 0..n {
        m[i * n + i] = T::unit();
    }
    m
}

impl<T: Scalar> Reduction<T> {
    fn new(rows: usize, cols: usize, a: Vec<T>, track: bool) -> Self {
        let (u, v) = if track {
            (Some(identity_vec(rows)), Some(identity_vec(cols)))
        } else {
            (None, None)
        };
        Self { rows, cols, a, u, v }
    }

    fn at(&self, i: usize, j: usize) -> &T {
        &self.a[i * self.cols + j]
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        let (c, r) = (self.cols, self.rows);
        for j in 0..c {
            self.a.swap(i * c + j, k * c + j);
        }
        if let Some(u) = self.u.as_mut() {
            for j in 0..r {
                u.swap(i * r + j, k * r + j);
            }
        }
    }

    fn swap_cols(&mut self, j: usize, k: usize) {
        if j == k {
            return;
        }
        let (c, r) = (self.cols, self.rows);
        for i in 0..r {
            self.a.swap(i * c + j, i * c + k);
        }
        if let Some(v) = self.v.as_mut() {
            for i in 0..c {
                v.swap(i * c + j, i * c + k);
            }
        }
    }

    /// row_i -= q * row_t
    fn row_sub(&mut self, i: usize, t: usize, q: &T) -> Option<()> {
        let (c, r) = (self.cols, self.rows);
        for j in 0..c {
            self.a[i * c + j] = self.a[i * c + j].sub_mul(q, &self.a[t * c + j])?;
        }
        if let Some(u) = self.u.as_mut() {
            for j in 0..r {
                u[i * r + j] = u[i * r + j].sub_mul(q, &u[t * r + j])?;
            }
        }
        Some(())
    }

    /// col_j -= q * col_t
    fn col_sub(&mut self, j: usize, t: usize, q: &T) -> Option<()> {
        let (c, r) = (self.cols, self.rows);
        for i in 0..r {
            self.a[i * c + j] = self.a[i * c + j].sub_mul(q, &self.a[i * c + t])?;
        }
        if let Some(v) = self.v.as_mut() {
            for i in 0..c {
                v[i * c + j] = v[i * c + j].sub_mul(q, &v[i * c + t])?;
            }
        }
        Some(())
    }

    /// row_t += row_i
    fn row_add(&mut self, t: usize, i: usize) -> Option<()> {
        let (c, r) = (self.cols, self.rows);
        for j in 0..c {
            self.a[t * c + j] = self.a[t * c + j].plus(&self.a[i * c + j])?;
        }
        if let Some(u) = self.u.as_mut() {
            for j in 0..r {
                u[t * r + j] = u[t * r + j].plus(&u[i * r + j])?;
            }
        }
        Some(())
    }

    fn negate_row(&mut self, t: usize) -> Option<()> {
        let (c, r) = (self.cols, self.rows);
        for j in 0..c {
            self.a[t * c + j] = self.a[t * c + j].negated()?;
        }
        if let Some(u) = self.u.as_mut() {
            for j in 0..r {
                u[t * r + j] = u[t * r + j].negated()?;
            }
        }
        Some(())
    }

    /// Smallest nonzero absolute value in the trailing block; ties go to the
    /// lowest row, then the lowest column.
    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = self.at(i, j);
                if x.is_nil() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if x.cmp_abs(self.at(bi, bj)) != Ordering::Less => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    fn first_non_multiple(&self, t: usize) -> Option<usize> {
        let pivot = self.at(t, t).clone();
        for i in t + 1..self.rows {
            for j in t + 1..self.cols {
                if !self.at(i, j).divisible_by(&pivot) {
                    return Some(i);
                }
            }
        }
        None
    }

    fn run(&mut self) -> Option<()> {
        for t in 0..self.rows.min(self.cols) {
            loop {
                let Some((pi, pj)) = self.find_pivot(t) else {
                    return Some(());
                };
                self.swap_rows(t, pi);
                self.swap_cols(t, pj);

                let pivot = self.at(t, t).clone();
                let mut clean = true;
                for i in t + 1..self.rows {
                    if self.at(i, t).is_nil() {
                        continue;
                    }
                    let q = self.at(i, t).quot_euclid(&pivot)?;
                    self.row_sub(i, t, &q)?;
                    clean &= self.at(i, t).is_nil();
                }
                for j in t + 1..self.cols {
                    if self.at(t, j).is_nil() {
                        continue;
                    }
                    let q = self.at(t, j).quot_euclid(&pivot)?;
                    self.col_sub(j, t, &q)?;
                    clean &= self.at(t, j).is_nil();
                }
                if !clean {
                    continue;
                }
                match self.first_non_multiple(t) {
                    Some(i) => self.row_add(t, i)?,
                    None => break,
                }
            }
            if self.at(t, t).is_neg() {
                self.negate_row(t)?;
            }
        }
        Some(())
    }

    fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self.at(i, i).clone())
            .collect()
    }
}

fn big_matrix(rows: usize, cols: usize, entries: Vec<BigInt>) -> IntMatrix {
    IntMatrix { rows, cols, entries }
}

fn widen(v: Vec<i64>) -> Vec<BigInt> {
    v.into_iter().map(BigInt::from).collect()
}

/// Smith normal form `u * a * v = d`, diagonal entries non-negative and
/// forming a divisibility chain. Deterministic for a given input.
pub fn smith_normal_form(a: &IntMatrix) -> SnfDecomposition {
    let (rows, cols) = (a.rows, a.cols);
    if let Some(small) = a.to_i64() {
        let mut red = Reduction::new(rows, cols, small, true);
        if red.run().is_some() {
            return SnfDecomposition {
                d: big_matrix(rows, cols, widen(red.a)),
                u: big_matrix(rows, rows, widen(red.u.unwrap_or_default())),
                v: big_matrix(cols, cols, widen(red.v.unwrap_or_default())),
            };
        }
    }
    let mut red = Reduction::new(rows, cols, a.entries.clone(), true);
    red.run().expect("bigint reduction cannot overflow");
    SnfDecomposition {
        d: big_matrix(rows, cols, red.a),
        u: big_matrix(rows, rows, red.u.unwrap_or_default()),
        v: big_matrix(cols, cols, red.v.unwrap_or_default()),
    }
}

/// Nonzero Smith diagonal of a small matrix given as `i64` entries
/// (units included, so the length is the rank). Falls back to bigints
/// internally; `None` only if a factor itself exceeds `i64`.
pub(crate) fn invariant_factors_i64(rows: usize, cols: usize, entries: &[i64]) -> Option<Vec<i64>> {
    let mut red = Reduction::new(rows, cols, entries.to_vec(), false);
    if red.run().is_some() {
        return Some(red.diagonal().into_iter().filter(|x| *x != 0).collect());
    }
    let mut red = Reduction::new(rows, cols, widen(entries.to_vec()), false);
    red.run()?;
    red.diagonal()
        .into_iter()
        .filter(|x| !x.is_zero())
        .map(|x| x.to_i64())
        .collect()
}

fn group_from_diagonal(diag: Vec<BigInt>, cols: usize) -> AbelianGroup {
    let rank = diag.iter().filter(|x| !x.is_zero()).count();
    let torsion = diag
        .into_iter()
        .filter(|x| !x.is_zero() && !x.is_one())
        .collect();
    AbelianGroup { torsion, free_rank: cols - rank }
}

/// `Z^cols / rowspace(a)` in invariant factor form.
pub fn cokernel(a: &IntMatrix) -> AbelianGroup {
    let (rows, cols) = (a.rows, a.cols);
    if let Some(small) = a.to_i64() {
        let mut red = Reduction::new(rows, cols, small, false);
        if red.run().is_some() {
            return group_from_diagonal(widen(red.diagonal()), cols);
        }
    }
    let mut red = Reduction::new(rows, cols, a.entries.clone(), false);
    red.run().expect("bigint reduction cannot overflow");
    group_from_diagonal(red.diagonal(), cols)
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(a: &IntMatrix) -> Result<BigInt> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let mut m = a.to_nested();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Ok(BigInt::zero());
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(sign * &m[n - 1][n - 1])
}

/// Closed-form cokernel of a nonsingular 2x2 matrix: the first invariant
/// factor is the gcd of the entries, the second is `|det| / gcd`.
pub fn cokernel_2x2_oracle(a: &IntMatrix) -> Result<AbelianGroup> {
    if a.rows != 2 || a.cols != 2 {
        return Err(Error::NotTwoByTwo { rows: a.rows, cols: a.cols });
    }
    let e = &a.entries;
    let det = &e[0] * &e[3] - &e[1] * &e[2];
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let g = e[0].gcd(&e[1]).gcd(&e[2]).gcd(&e[3]);
    let d2 = det.abs() / &g;
    AbelianGroup::from_invariant_factors([g, d2], 0)
}

/// Smith form of a diagonal matrix by the closed form
/// `diag(a, b) ~ diag(gcd(a, b), lcm(a, b))`, used as a cross-check.
pub fn diagonal_2x2_oracle(a: &BigInt, b: &BigInt) -> AbelianGroup {
    let g = a.gcd(b);
    let l = a.lcm(b);
    AbelianGroup::from_invariant_factors([g, l], 0).expect("gcd divides lcm")
}

impl IntMatrix {
    /// True iff this matrix is diagonal with a non-negative divisibility chain.
    pub fn is_smith_form(&self) -> bool {
        if !self.is_diagonal() {
            return false;
        }
        let diag: Vec<&BigInt> = (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect();
        diag.iter().all(|x| !Signed::is_negative(*x)) && diag.windows(2).all(|w| divides(w[0], w[1]))
    }
}
