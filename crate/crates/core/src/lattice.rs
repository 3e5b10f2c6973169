//! Exact integer and rational linear algebra.
//!
//! Everything group-theoretic in this crate bottoms out in two questions:
//! is a rational vector an integer combination of given generators, and what
//! are the rational coordinates of a vector over a candidate basis. The first
//! is answered with a column-style Hermite normal form, the second with
//! Gauss-Jordan elimination over `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Input("empty matrix".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Input("ragged rows".into()));
        }
        let entries = rows.iter().flatten().cloned().map(Into::into).collect();
        Self::new(r, c, entries)
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

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let cols = columns.len();
        let mut entries = vec![BigInt::zero(); rows * cols];
        for (c, col) in columns.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                entries[r * cols + c] = v.clone();
            }
        }
        Self { rows, cols, entries }
    }

    fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(r, k) * other.get(k, c);
                }
                entries.push(acc);
            }
        }
        Ok(IntMatrix {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::Input("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|r| (0..n).map(|c| self.get(r, c).clone()).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }
}

/// Column-style Hermite form `H = M * U` with `U` unimodular.
///
/// Column `k < rank` of `H` has its pivot at row `pivots[k]`, the pivot rows
/// strictly increase, entries above a pivot are zero, pivots are positive and
/// entries left of a pivot (in the pivot row) lie in `[0, pivot)`. Columns
/// `rank..` are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermiteForm {
    pub h: IntMatrix,
    pub u: IntMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

fn axpy(target: &mut [BigInt], q: &BigInt, source: &[BigInt]) {
    // target -= q * source
    for (t, s) in target.iter_mut().zip(source) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

pub fn hnf(m: &IntMatrix) -> HermiteForm {
    let rows = m.rows;
    let n = m.cols;
    let mut h = m.columns();
    let mut u = IntMatrix::identity(n).columns();
    let mut pivots = Vec::new();
    let mut c = 0;

    for r in 0..rows {
        if c == n {
            break;
        }
        loop {
            let best = (c..n)
                .filter(|&j| !h[j][r].is_zero())
                .min_by(|&a, &b| h[a][r].abs().cmp(&h[b][r].abs()).then(a.cmp(&b)));
            let Some(best) = best else { break };
            h.swap(c, best);
            u.swap(c, best);
            let mut clean = true;
            for j in c + 1..n {
                if h[j][r].is_zero() {
                    continue;
                }
                let q = h[j][r].div_floor(&h[c][r]);
                let (left, right) = h.split_at_mut(j);
                axpy(&mut right[0], &q, &left[c]);
                let (left, right) = u.split_at_mut(j);
                axpy(&mut right[0], &q, &left[c]);
                if !h[j][r].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if c < n && !h[c][r].is_zero() {
            if h[c][r].is_negative() {
                h[c].iter_mut().for_each(|v| *v = -&*v);
                u[c].iter_mut().for_each(|v| *v = -&*v);
            }
            for j in 0..c {
                let q = h[j][r].div_floor(&h[c][r]);
                if q.is_zero() {
                    continue;
                }
                let (left, right) = h.split_at_mut(c);
                axpy(&mut left[j], &q, &right[0]);
                let (left, right) = u.split_at_mut(c);
                axpy(&mut left[j], &q, &right[0]);
            }
            pivots.push(r);
            c += 1;
        }
    }

    HermiteForm {
        h: IntMatrix::from_columns(rows, &h),
        u: IntMatrix::from_columns(n, &u),
        rank: pivots.len(),
        pivots,
    }
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

fn scale_to_integers(v: &[Rational], scale: &BigInt) -> Vec<BigInt> {
    v.iter()
        .map(|q| {
            let s = q * Rational::from_integer(scale.clone());
            debug_assert!(s.is_integer());
            s.to_integer()
        })
        .collect()
}

/// Integer coefficients `z` with `sum z_i * gens_i == g`, or `None` when `g`
/// is not in the integer span of `gens`.
pub fn solve_in_lattice(gens: &[Vec<Rational>], g: &[Rational]) -> Result<Option<Vec<BigInt>>> {
    let dim = g.len();
    for v in gens {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
    }
    if g.iter().all(Zero::is_zero) {
        return Ok(Some(vec![BigInt::zero(); gens.len()]));
    }
    if gens.is_empty() || dim == 0 {
        return Ok(None);
    }
    let scale = lcm_of_denominators(gens.iter().flatten().chain(g));
    let columns: Vec<Vec<BigInt>> = gens.iter().map(|v| scale_to_integers(v, &scale)).collect();
    let target = scale_to_integers(g, &scale);
    let m = IntMatrix::from_columns(dim, &columns);
    let form = hnf(&m);

    let mut residual = target;
    let mut y = Vec::with_capacity(form.rank);
    for (k, &r) in form.pivots.iter().enumerate() {
        let piv = form.h.get(r, k);
        let (q, rem) = residual[r].div_rem(piv);
        if !rem.is_zero() {
            return Ok(None);
        }
        if !q.is_zero() {
            axpy(&mut residual, &q, &form.h.column(k));
        }
        y.push(q);
    }
    if residual.iter().any(|v| !v.is_zero()) {
        return Ok(None);
    }
    let n = gens.len();
    let z: Vec<BigInt> = (0..n)
        .map(|i| {
            y.iter()
                .enumerate()
                .fold(BigInt::zero(), |acc, (k, yk)| acc + form.u.get(i, k) * yk)
        })
        .collect();
    Ok(Some(z))
}

/// An integer lattice built by inserting vectors one at a time, kept in the
/// same lower-echelon Hermite shape as [`hnf`] produces.
#[derive(Clone, Debug)]
pub struct IntLattice {
    dim: usize,
    // cols[r] is the basis vector whose pivot sits at row r
    cols: Vec<Option<Vec<BigInt>>>,
}

impl IntLattice {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            cols: vec![None; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.cols.iter().filter(|c| c.is_some()).count()
    }

    pub fn insert(&mut self, mut v: Vec<BigInt>) {
        assert_eq!(v.len(), self.dim);
        let mut touched = Vec::new();
        for r in 0..self.dim {
            if v[r].is_zero() {
                continue;
            }
            match self.cols[r].take() {
                None => {
                    if v[r].is_negative() {
                        v.iter_mut().for_each(|x| *x = -&*x);
                    }
                    self.cols[r] = Some(v);
                    touched.push(r);
                    break;
                }
                Some(mut b) => {
                    let (q, rem) = v[r].div_rem(&b[r]);
                    if rem.is_zero() {
                        axpy(&mut v, &q, &b);
                        self.cols[r] = Some(b);
                        continue;
                    }
                    let e = b[r].extended_gcd(&v[r]);
                    let (g, s, t) = (e.gcd, e.x, e.y);
                    let bq = &b[r] / &g;
                    let vq = &v[r] / &g;
                    let new_b: Vec<BigInt> =
                        b.iter().zip(&v).map(|(bi, vi)| &s * bi + &t * vi).collect();
                    let new_v: Vec<BigInt> =
                        v.iter().zip(&b).map(|(vi, bi)| &bq * vi - &vq * bi).collect();
                    b = new_b;
                    if b[r].is_negative() {
                        b.iter_mut().for_each(|x| *x = -&*x);
                    }
                    self.cols[r] = Some(b);
                    touched.push(r);
                    v = new_v;
                }
            }
        }
        for r in touched {
            self.reduce_column(r);
        }
    }

    fn reduce_column(&mut self, r: usize) {
        let Some(mut col) = self.cols[r].take() else { return };
        for rr in r + 1..self.dim {
            if let Some(other) = &self.cols[rr] {
                let q = col[rr].div_floor(&other[rr]);
                if !q.is_zero() {
                    axpy(&mut col, &q, other);
                }
            }
        }
        self.cols[r] = Some(col);
    }

    /// Brings every column into the canonical reduced form.
    pub fn canonicalize(&mut self) {
        for r in (0..self.dim).rev() {
            self.reduce_column(r);
        }
    }

    /// Basis columns in pivot order.
    pub fn basis(&self) -> Vec<Vec<BigInt>> {
        self.cols.iter().flatten().cloned().collect()
    }

    pub fn pivot_rows(&self) -> Vec<usize> {
        (0..self.dim).filter(|&r| self.cols[r].is_some()).collect()
    }

    /// Coordinates of `v` over [`IntLattice::basis`], or `None` if `v` is not
    /// in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut residual = v.to_vec();
        let mut coords = Vec::with_capacity(self.rank());
        for r in 0..self.dim {
            match &self.cols[r] {
                None => {
                    if !residual[r].is_zero() {
                        return None;
                    }
                }
                Some(b) => {
                    let (q, rem) = residual[r].div_rem(&b[r]);
                    if !rem.is_zero() {
                        return None;
                    }
                    if !q.is_zero() {
                        axpy(&mut residual, &q, b);
                    }
                    coords.push(q);
                }
            }
        }
        Some(coords)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }
}

/// Precomputed solver for rational coordinates over a fixed list of vectors.
///
/// Holds an invertible `E` with `E * B` in reduced row echelon form, where the
/// columns of `B` are the spanning vectors.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    dim: usize,
    len: usize,
    transform: Vec<Vec<Rational>>,
    // pivot row of each spanning vector
    pivot_rows: Vec<usize>,
    independent: bool,
}

impl SpanSolver {
    pub fn new(vectors: &[Vec<Rational>], dim: usize) -> Result<Self> {
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let k = vectors.len();
        // augmented rows: [B | I]
        let mut rows: Vec<Vec<Rational>> = (0..dim)
            .map(|r| {
                let mut row: Vec<Rational> = vectors.iter().map(|v| v[r].clone()).collect();
                row.extend((0..dim).map(|c| {
                    if c == r {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                }));
                row
            })
            .collect();
        let mut pivot_rows = Vec::new();
        let mut independent = true;
        let mut next = 0;
        for col in 0..k {
            let Some(p) = (next..dim).find(|&r| !rows[r][col].is_zero()) else {
                independent = false;
                continue;
            };
            rows.swap(next, p);
            let inv = rows[next][col].recip();
            rows[next].iter_mut().for_each(|x| *x = &*x * &inv);
            let pivot_row = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == next || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
            pivot_rows.push(next);
            next += 1;
        }
        let transform = rows.into_iter().map(|row| row[k..].to_vec()).collect();
        Ok(Self {
            dim,
            len: k,
            transform,
            pivot_rows,
            independent,
        })
    }

    pub fn is_independent(&self) -> bool {
        self.independent
    }

    pub fn rank(&self) -> usize {
        self.pivot_rows.len()
    }

    /// Coordinates of `target` over the spanning vectors, `None` if it lies
    /// outside their span. Only meaningful for independent vectors.
    pub fn solve(&self, target: &[Rational]) -> Result<Option<Vec<Rational>>> {
        if target.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: target.len(),
            });
        }
        if !self.independent {
            return Err(Error::Input("spanning vectors are dependent".into()));
        }
        let image: Vec<Rational> = self
            .transform
            .iter()
            .map(|row| {
                row.iter()
                    .zip(target)
                    .filter(|(_, t)| !t.is_zero())
                    .fold(Rational::zero(), |acc, (a, t)| acc + a * t)
            })
            .collect();
        if image[self.len..].iter().any(|x| !x.is_zero()) {
            return Ok(None);
        }
        Ok(Some(self.pivot_rows.iter().map(|&r| image[r].clone()).collect()))
    }
}

pub fn rational_rank(vectors: &[Vec<Rational>], dim: usize) -> Result<usize> {
    Ok(SpanSolver::new(vectors, dim)?.rank())
}
