//! Matrices of truncated series: determinants, adjugates, Jacobians and
//! generic rank.

use num_traits::Zero;
use rand::Rng;

use crate::coeff::GaussRational;
use crate::error::{Error, Result};
use crate::series::{TruncatedSeries, Vars};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    /// Row-major entries; all must share the same variables.
    pub fn new(rows: usize, cols: usize, entries: Vec<TruncatedSeries>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::structural(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(first) = entries.first() {
            if entries.iter().any(|e| !e.same_vars(first)) {
                return Err(Error::structural("matrix entries in different variables"));
            }
        }
        Ok(SeriesMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<TruncatedSeries>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::structural("ragged rows"));
        }
        SeriesMatrix::new(r, c, rows.into_iter().flatten().collect())
    }

    /// `∂f_i/∂x_j` for the variables at indices `wrt`.
    pub fn jacobian(funcs: &[TruncatedSeries], wrt: &[usize]) -> Result<Self> {
        let mut entries = Vec::with_capacity(funcs.len() * wrt.len());
        for f in funcs {
            for &j in wrt {
                entries.push(f.derive_index(j)?);
            }
        }
        SeriesMatrix::new(funcs.len(), wrt.len(), entries)
    }

    /// Jacobian with respect to every variable of the (common) space.
    pub fn full_jacobian(funcs: &[TruncatedSeries]) -> Result<Self> {
        let nv = funcs.first().map_or(0, TruncatedSeries::nvars);
        let wrt: Vec<usize> = (0..nv).collect();
        SeriesMatrix::jacobian(funcs, &wrt)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[TruncatedSeries] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[TruncatedSeries] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    fn vars(&self) -> Option<&Vars> {
        self.entries.first().map(TruncatedSeries::vars)
    }

    /// Determinant by cofactor expansion (the matrices here are at most a
    /// few rows). Certified to the smallest entry cap.
    pub fn det(&self) -> Result<TruncatedSeries> {
        if self.rows != self.cols {
            return Err(Error::structural("determinant of a non-square matrix"));
        }
        let Some(vars) = self.vars() else {
            return Err(Error::structural("determinant of an empty matrix"));
        };
        let cap = self.entries.iter().map(TruncatedSeries::cap).min().unwrap_or(0);
        let idx: Vec<usize> = (0..self.cols).collect();
        Ok(self.det_rec(0, &idx, vars, cap))
    }

    fn det_rec(&self, row: usize, cols: &[usize], vars: &Vars, cap: u32) -> TruncatedSeries {
        if cols.is_empty() {
            return TruncatedSeries::one(vars, cap);
        }
        let mut acc = TruncatedSeries::zero(vars, cap);
        for (k, &c) in cols.iter().enumerate() {
            let e = self.get(row, c);
            if e.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = e * &self.det_rec(row + 1, &rest, vars, cap);
            acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    /// Matrix with column `j` replaced by `col` (Cramer's rule numerators).
    pub fn with_column(&self, j: usize, col: &[TruncatedSeries]) -> Result<Self> {
        if col.len() != self.rows || j >= self.cols {
            return Err(Error::structural("with_column: shape mismatch"));
        }
        let mut entries = self.entries.clone();
        for (i, v) in col.iter().enumerate() {
            entries[i * self.cols + j] = v.clone();
        }
        SeriesMatrix::new(self.rows, self.cols, entries)
    }

    /// Classical adjugate: `adj(A)·A = det(A)·I`.
    pub fn adjugate(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::structural("adjugate of a non-square matrix"));
        }
        let n = self.rows;
        let Some(vars) = self.vars().cloned() else {
            return Err(Error::structural("adjugate of an empty matrix"));
        };
        let cap = self.entries.iter().map(TruncatedSeries::cap).min().unwrap_or(0);
        if n == 1 {
            return SeriesMatrix::new(1, 1, vec![TruncatedSeries::one(&vars, cap)]);
        }
        let mut out = vec![TruncatedSeries::zero(&vars, cap); n * n];
        for i in 0..n {
            for j in 0..n {
                let minor_entries: Vec<TruncatedSeries> = (0..n)
                    .filter(|&r| r != i)
                    .flat_map(|r| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(move |c| (r, c))
                    })
                    .map(|(r, c)| self.get(r, c).clone())
                    .collect();
                let minor = SeriesMatrix::new(n - 1, n - 1, minor_entries)?.det()?;
                let cof = if (i + j) % 2 == 0 { minor } else { -&minor };
                // adj = transpose of the cofactor matrix
                out[j * n + i] = cof;
            }
        }
        SeriesMatrix::new(n, n, out)
    }

    /// Inverse of a matrix whose determinant is a unit.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det()?;
        let inv_det = det.invert_unit().map_err(|e| match e {
            Error::NotAUnit => Error::DegenerateChart("matrix singular at the origin".into()),
            other => other,
        })?;
        let adj = self.adjugate()?;
        let entries = adj.entries.iter().map(|e| e * &inv_det).collect();
        SeriesMatrix::new(self.rows, self.cols, entries)
    }

    pub fn mul_vec(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        if v.len() != self.cols {
            return Err(Error::structural("mul_vec: length mismatch"));
        }
        let Some(vars) = self.vars() else {
            return Ok(Vec::new());
        };
        Ok((0..self.rows)
            .map(|i| {
                let cap = self.row(i).iter().chain(v).map(TruncatedSeries::cap).min().unwrap_or(0);
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(TruncatedSeries::zero(vars, cap), |acc, (a, b)| &acc + &(a * b))
            })
            .collect())
    }

    /// Entrywise evaluation at a point.
    pub fn eval(&self, point: &[GaussRational]) -> Result<Vec<Vec<GaussRational>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|e| e.eval(point)).collect())
            .collect()
    }
}

/// Rank over the fraction field of the polynomial ring, with every entry
/// read as the polynomial given by its stored terms. Fraction-free
/// (Bareiss) elimination: after `k` pivots each remaining entry is a
/// `(k+1)`-minor, so every division is exact.
pub fn generic_rank(m: &SeriesMatrix) -> usize {
    let mut a: Vec<Vec<TruncatedSeries>> = (0..m.rows)
        .map(|i| m.row(i).iter().map(TruncatedSeries::as_polynomial).collect())
        .collect();
    let Some(vars) = m.vars().cloned() else {
        return 0;
    };
    let mut prev = TruncatedSeries::one(&vars, crate::series::POLY_CAP);
    let mut rank = 0;
    for col in 0..m.cols {
        if rank == m.rows {
            break;
        }
        let Some(p) = (rank..m.rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..m.rows {
            for j in col + 1..m.cols {
                let num = &(&a[rank][col] * &a[i][j]) - &(&a[i][col] * &a[rank][j]);
                a[i][j] = num
                    .div_exact(&prev)
                    .expect("fraction-free elimination: inexact division");
            }
            a[i][col] = TruncatedSeries::zero(&vars, crate::series::POLY_CAP);
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Rank of a matrix over `ℚ(i)`.
pub fn field_rank(rows: &[Vec<GaussRational>]) -> usize {
    let mut a: Vec<Vec<GaussRational>> = rows.to_vec();
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let inv = a[rank][col].inv().expect("nonzero pivot");
        for i in rank + 1..nrows {
            if a[i][col].is_zero() {
                continue;
            }
            let factor = &a[i][col] * &inv;
            let (top, bottom) = a.split_at_mut(i);
            for (x, p) in bottom[0][col..ncols].iter_mut().zip(&top[rank][col..ncols]) {
                *x -= &(&factor * p);
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of `m` evaluated at a random integer point; a lower bound for
/// [`generic_rank`] that is attained with high probability.
pub fn sampled_rank<R: Rng>(m: &SeriesMatrix, rng: &mut R) -> usize {
    let Some(vars) = m.vars() else {
        return 0;
    };
    let point: Vec<GaussRational> = (0..vars.len())
        .map(|_| GaussRational::int(rng.gen_range(-97..=97)))
        .collect();
    field_rank(&m.eval(&point).expect("point matches variables"))
}

/// Identity matrix in the given space.
pub fn identity(vars: &Vars, cap: u32, n: usize) -> SeriesMatrix {
    let entries = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                TruncatedSeries::one(vars, cap)
            } else {
                TruncatedSeries::zero(vars, cap)
            }
        })
        .collect();
    SeriesMatrix { rows: n, cols: n, entries }
}

/// Convenience: is the constant-term matrix of `m` invertible?
pub fn invertible_at_origin(m: &SeriesMatrix) -> bool {
    if m.rows != m.cols {
        return false;
    }
    let rows: Vec<Vec<GaussRational>> = (0..m.rows)
        .map(|i| m.row(i).iter().map(TruncatedSeries::constant_term).collect())
        .collect();
    field_rank(&rows) == m.rows
}
