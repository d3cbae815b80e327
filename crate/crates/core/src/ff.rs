//! Exact arithmetic and dense linear algebra over prime fields GF(p).
//!
//! Everything downstream (encoding kernels, decoding matrices, error and
//! message spaces) is built on the types here. Arithmetic is exact, so no
//! tolerances exist anywhere: two matrices are equal iff they are equal
//! entry by entry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("elements belong to different fields: GF({left}) vs GF({right})")]
    MismatchedFields { left: u64, right: u64 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("row width {got} does not match column count {expected}")]
    RowWidth { expected: usize, got: usize },
    #[error("column counts differ: {left} vs {right}")]
    ColsMismatch { left: usize, right: usize },
    #[error("cannot multiply {left_rows}x{left_cols} by {right_rows}x{right_cols}")]
    MulShape {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("value {value} is not a canonical element of GF({modulus})")]
    OutOfRange { value: u64, modulus: u64 },
}

/// A prime field GF(p), identified by its modulus.
///
/// Primality is checked at construction by trial division, so a `FieldSpec`
/// in hand is always a valid field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldSpec {
    p: u64,
}

impl TryFrom<u64> for FieldSpec {
    type Error = FfError;
    fn try_from(p: u64) -> Result<Self, FfError> {
        FieldSpec::new(p)
    }
}

impl From<FieldSpec> for u64 {
    fn from(f: FieldSpec) -> u64 {
        f.p
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map(|sq| sq <= n).unwrap_or(false) {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    pub fn new(p: u64) -> Result<Self, FfError> {
        if is_prime(p) {
            Ok(FieldSpec { p })
        } else {
            Err(FfError::NotPrime(p))
        }
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    /// Wraps an integer into the field, reducing mod p.
    pub fn elem(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            field: self,
        }
    }

    pub fn reduce(self, value: u64) -> u64 {
        value % self.p
    }

    // Raw-value arithmetic on canonical representatives in [0, p).
    // These are the work horses for matrix code; `FieldElement` wraps them
    // with field-compatibility checks for the public scalar API.

    pub fn add(self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem (p is prime).
    pub fn inv(self, a: u64) -> Result<u64, FfError> {
        if a.is_multiple_of(self.p) {
            return Err(FfError::ZeroInverse);
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// Iterator over all canonical field values 0..p.
    pub fn elements(self) -> impl Iterator<Item = u64> {
        0..self.p
    }
}

/// A single element of GF(p), carrying its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: FieldSpec,
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn field(self) -> FieldSpec {
        self.field
    }

    fn same_field(self, rhs: FieldElement) -> Result<FieldSpec, FfError> {
        if self.field == rhs.field {
            Ok(self.field)
        } else {
            Err(FfError::MismatchedFields {
                left: self.field.p,
                right: rhs.field.p,
            })
        }
    }

    pub fn checked_add(self, rhs: FieldElement) -> Result<FieldElement, FfError> {
        let f = self.same_field(rhs)?;
        Ok(f.elem(f.add(self.value, rhs.value)))
    }

    pub fn checked_mul(self, rhs: FieldElement) -> Result<FieldElement, FfError> {
        let f = self.same_field(rhs)?;
        Ok(f.elem(f.mul(self.value, rhs.value)))
    }

    pub fn inv(self) -> Result<FieldElement, FfError> {
        Ok(self.field.elem(self.field.inv(self.value)?))
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Dense row-major matrix over a prime field.
///
/// Matrices with zero rows or zero columns are legal; they have rank 0 and
/// support the empty error pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    field: FieldSpec,
}

impl FieldMatrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
            field,
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from row slices; values are reduced mod p.
    pub fn from_rows(field: FieldSpec, rows: &[Vec<u64>]) -> Result<Self, FfError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(FfError::RowWidth {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend(r.iter().map(|&v| field.reduce(v)));
        }
        Ok(FieldMatrix {
            rows: rows.len(),
            cols,
            data,
            field,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(field: FieldSpec, cols: &[Vec<u64>]) -> Result<Self, FfError> {
        let rows = cols.first().map_or(0, |c| c.len());
        for c in cols {
            if c.len() != rows {
                return Err(FfError::RowWidth {
                    expected: rows,
                    got: c.len(),
                });
            }
        }
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = self.field.reduce(v);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut m = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(c, r, self.get(r, c));
            }
        }
        m
    }

    /// Keeps the rows at the given indices, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FieldMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &r in indices {
            data.extend_from_slice(self.row(r));
        }
        FieldMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
            field: self.field,
        }
    }

    pub fn vstack(&self, other: &FieldMatrix) -> Result<FieldMatrix, FfError> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(FfError::ColsMismatch {
                left: self.cols,
                right: other.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FieldMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
            field: self.field,
        })
    }

    fn check_field(&self, other: &FieldMatrix) -> Result<(), FfError> {
        if self.field != other.field {
            return Err(FfError::MismatchedFields {
                left: self.field.p,
                right: other.field.p,
            });
        }
        Ok(())
    }

    pub fn matmul(&self, rhs: &FieldMatrix) -> Result<FieldMatrix, FfError> {
        self.check_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(FfError::MulShape {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let f = self.field;
        let mut out = Self::zeros(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = f.add(out.get(i, j), f.mul(a, rhs.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `x * M`, with `x.len() == rows`.
    pub fn row_vec_mul(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.rows, "row vector length must equal row count");
        let f = self.field;
        let mut out = vec![0u64; self.cols];
        for (r, &xi) in x.iter().enumerate() {
            let xi = f.reduce(xi);
            if xi == 0 {
                continue;
            }
            for (c, slot) in out.iter_mut().enumerate() {
                *slot = f.add(*slot, f.mul(xi, self.get(r, c)));
            }
        }
        out
    }

    /// In-place reduction to reduced row echelon form.
    /// Returns the pivot columns; rank is their count.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            // first-nonzero pivoting: take the topmost usable row
            let Some(src) = (pivot_row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if src != pivot_row {
                for c in 0..self.cols {
                    let a = self.get(pivot_row, c);
                    let b = self.get(src, c);
                    self.set(pivot_row, c, b);
                    self.set(src, c, a);
                }
            }
            let inv = f.inv(self.get(pivot_row, col)).expect("pivot is nonzero");
            for c in 0..self.cols {
                let v = f.mul(self.get(pivot_row, c), inv);
                self.set(pivot_row, c, v);
            }
            for r in 0..self.rows {
                if r == pivot_row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..self.cols {
                    let v = f.sub(self.get(r, c), f.mul(factor, self.get(pivot_row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    /// Reduced row echelon form; the nonzero rows are a canonical basis of
    /// the row space.
    pub fn rref(&self) -> FieldMatrix {
        let mut m = self.clone();
        m.rref_in_place();
        m
    }

    /// Row rank via Gaussian elimination. Rank of an empty matrix is 0.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref_in_place().len()
    }

    /// Canonical basis of the row space: the nonzero rows of the RREF.
    pub fn row_space_basis(&self) -> FieldMatrix {
        let mut m = self.clone();
        let rank = m.rref_in_place().len();
        m.select_rows(&(0..rank).collect::<Vec<_>>())
    }

    /// dim(rowspace(self) ∩ rowspace(other)), by the rank identity
    /// dim = rank(A) + rank(B) − rank([A; B]).
    pub fn intersection_dim(&self, other: &FieldMatrix) -> Result<usize, FfError> {
        let stacked = self.vstack(other)?;
        Ok(self.rank() + other.rank() - stacked.rank())
    }

    /// Basis of the left null space { x : x·M = 0 }, one basis vector per row.
    pub fn left_nullspace(&self) -> FieldMatrix {
        // Row-reduce [M | I]; rows whose M-part vanished carry the null
        // space combinations in the I-part.
        let aug_cols = self.cols + self.rows;
        let mut aug = FieldMatrix::zeros(self.field, self.rows, aug_cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols + r, 1);
        }
        // eliminate only on the first `cols` columns
        let f = self.field;
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(src) = (pivot_row..self.rows).find(|&r| aug.get(r, col) != 0) else {
                continue;
            };
            if src != pivot_row {
                for c in 0..aug_cols {
                    let a = aug.get(pivot_row, c);
                    let b = aug.get(src, c);
                    aug.set(pivot_row, c, b);
                    aug.set(src, c, a);
                }
            }
            let inv = f.inv(aug.get(pivot_row, col)).expect("pivot is nonzero");
            for c in 0..aug_cols {
                let v = f.mul(aug.get(pivot_row, c), inv);
                aug.set(pivot_row, c, v);
            }
            for r in 0..self.rows {
                if r == pivot_row {
                    continue;
                }
                let factor = aug.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..aug_cols {
                    let v = f.sub(aug.get(r, c), f.mul(factor, aug.get(pivot_row, c)));
                    aug.set(r, c, v);
                }
            }
            pivot_row += 1;
        }
        let mut basis_rows = Vec::new();
        for r in pivot_row..self.rows {
            let combo: Vec<u64> = (0..self.rows).map(|c| aug.get(r, self.cols + c)).collect();
            basis_rows.push(combo);
        }
        let m =
            FieldMatrix::from_rows(self.field, &basis_rows).expect("null space rows share a width");
        if m.rows == 0 {
            FieldMatrix::zeros(self.field, 0, self.rows)
        } else {
            m.row_space_basis()
        }
    }

    /// Canonical basis (RREF rows) of rowspace(self) ∩ rowspace(other).
    pub fn row_space_intersection(&self, other: &FieldMatrix) -> Result<FieldMatrix, FfError> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(FfError::ColsMismatch {
                left: self.cols,
                right: other.cols,
            });
        }
        let stacked = self.vstack(other)?;
        let null = stacked.left_nullspace();
        // each null row (u | w) satisfies u·A = −w·B, an intersection vector
        let mut images = Vec::new();
        for r in 0..null.rows() {
            let u = &null.row(r)[..self.rows];
            images.push(self.row_vec_mul(u));
        }
        let img = FieldMatrix::from_rows(self.field, &images)?;
        let basis = if img.rows == 0 {
            FieldMatrix::zeros(self.field, 0, self.cols)
        } else {
            img.row_space_basis()
        };
        debug_assert_eq!(basis.rows(), self.intersection_dim(other)?);
        Ok(basis)
    }

    /// Solves `c · M = target` for a row coefficient vector `c`.
    ///
    /// Returns `None` when the target lies outside the row space. When
    /// rank equals the row count the solution is unique; otherwise free
    /// coefficients are set to zero.
    pub fn solve_row(&self, target: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(
            target.len(),
            self.cols,
            "target length must equal column count"
        );
        let f = self.field;
        // transpose the system: M^T c^T = target^T
        let mut aug = FieldMatrix::zeros(f, self.cols, self.rows + 1);
        for (r, &tv) in target.iter().enumerate() {
            for c in 0..self.rows {
                aug.set(r, c, self.get(c, r));
            }
            aug.set(r, self.rows, f.reduce(tv));
        }
        let mut pivot_row = 0;
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; self.rows];
        for (col, pivot_slot) in pivot_of_col.iter_mut().enumerate() {
            if pivot_row == self.cols {
                break;
            }
            let Some(src) = (pivot_row..self.cols).find(|&r| aug.get(r, col) != 0) else {
                continue;
            };
            if src != pivot_row {
                for c in 0..=self.rows {
                    let a = aug.get(pivot_row, c);
                    let b = aug.get(src, c);
                    aug.set(pivot_row, c, b);
                    aug.set(src, c, a);
                }
            }
            let inv = f.inv(aug.get(pivot_row, col)).expect("pivot is nonzero");
            for c in 0..=self.rows {
                let v = f.mul(aug.get(pivot_row, c), inv);
                aug.set(pivot_row, c, v);
            }
            for r in 0..self.cols {
                if r == pivot_row {
                    continue;
                }
                let factor = aug.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..=self.rows {
                    let v = f.sub(aug.get(r, c), f.mul(factor, aug.get(pivot_row, c)));
                    aug.set(r, c, v);
                }
            }
            *pivot_slot = Some(pivot_row);
            pivot_row += 1;
        }
        // consistency: a zero coefficient row with nonzero rhs has no solution
        for r in pivot_row..self.cols {
            if aug.get(r, self.rows) != 0 {
                return None;
            }
        }
        let mut c = vec![0u64; self.rows];
        for (col, pivot) in pivot_of_col.iter().enumerate() {
            if let Some(pr) = pivot {
                c[col] = aug.get(*pr, self.rows);
            }
        }
        Some(c)
    }
}

impl std::fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}
