//! Exact linear algebra over Euclidean rings: Smith normal form, kernels,
//! integer solves and homology of chain complexes.
//!
//! Matrices are sparse and column-major. A boundary matrix has one row per
//! target basis element and one column per source basis element.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::scalar::{is_prime, EuclideanRing, Fp, Integer};

/// Entry budget for dense Smith normal form on the residual core.
pub const DENSE_CORE_LIMIT: usize = 4_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, R)>>,
}

pub type IntMatrix = Matrix<Integer>;

fn normalize_column<R: EuclideanRing>(mut col: Vec<(usize, R)>) -> Vec<(usize, R)> {
    col.sort_by_key(|(r, _)| *r);
    let mut out: Vec<(usize, R)> = Vec::with_capacity(col.len());
    for (r, v) in col {
        match out.last_mut() {
            Some((lr, lv)) if *lr == r => lv.add_assign_ref(&v),
            _ => out.push((r, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

impl<R: EuclideanRing> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        Matrix { rows: n, cols: n, columns: (0..n).map(|i| vec![(i, R::one())]).collect() }
    }

    /// Columns given as `(row, value)` lists; duplicates are summed.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, R)>>) -> Result<Self> {
        let cols = columns.len();
        let mut out = Vec::with_capacity(cols);
        for col in columns {
            if let Some((r, _)) = col.iter().find(|(r, _)| *r >= rows) {
                return arg_err(format!("row index {r} out of range for {rows} rows"));
            }
            out.push(normalize_column(col));
        }
        Ok(Matrix { rows, cols, columns: out })
    }

    /// Row-major dense input.
    pub fn from_dense(rows: usize, cols: usize, data: &[Vec<R>]) -> Result<Self> {
        if data.len() != rows || data.iter().any(|r| r.len() != cols) {
            return arg_err("dense data does not match the stated shape");
        }
        let mut columns = vec![Vec::new(); cols];
        for (i, row) in data.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    columns[j].push((i, v.clone()));
                }
            }
        }
        Ok(Matrix { rows, cols, columns })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data: Vec<Vec<R>> = rows.iter().map(|row| row.iter().map(|&v| R::from_i64(v)).collect()).collect();
        Self::from_dense(r, c, &data).expect("rectangular input")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[(usize, R)] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<(usize, R)>] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.columns[j]
            .binary_search_by_key(&i, |(r, _)| *r)
            .map(|k| self.columns[j][k].1.clone())
            .unwrap_or_else(|_| R::zero())
    }

    pub fn to_dense(&self) -> Vec<Vec<R>> {
        let mut d = vec![vec![R::zero(); self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                d[*i][j] = v.clone();
            }
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut columns = vec![Vec::new(); self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                columns[*i].push((j, v.clone()));
            }
        }
        Matrix { rows: self.cols, cols: self.rows, columns }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return arg_err(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let columns = other.columns.iter().map(|col| self.apply_sparse(col)).collect();
        Ok(Matrix { rows: self.rows, cols: other.cols, columns })
    }

    fn apply_sparse(&self, v: &[(usize, R)]) -> Vec<(usize, R)> {
        let mut acc: Vec<(usize, R)> = Vec::new();
        for (k, b) in v {
            for (i, a) in &self.columns[*k] {
                acc.push((*i, a.mul_ref(b)));
            }
        }
        normalize_column(acc)
    }

    /// `self · v` for a dense vector.
    pub fn apply(&self, v: &[R]) -> Result<Vec<R>> {
        if v.len() != self.cols {
            return arg_err("vector length does not match the column count");
        }
        let mut out = vec![R::zero(); self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            if v[j].is_zero() {
                continue;
            }
            for (i, a) in col {
                out[*i].add_assign_ref(&a.mul_ref(&v[j]));
            }
        }
        Ok(out)
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Matrix { rows: self.rows, cols: idx.len(), columns: idx.iter().map(|&j| self.columns[j].clone()).collect() }
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return arg_err("hstack needs equal row counts");
        }
        let mut columns = self.columns.clone();
        columns.extend(other.columns.iter().cloned());
        Ok(Matrix { rows: self.rows, cols: self.cols + other.cols, columns })
    }

    /// Reorders rows: new row `i` is old row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let columns = self
            .columns
            .iter()
            .map(|c| normalize_column(c.iter().map(|(r, v)| (inv[*r], v.clone())).collect()))
            .collect();
        Matrix { rows: self.rows, cols: self.cols, columns }
    }

    pub fn map<S: EuclideanRing>(&self, f: impl Fn(&R) -> S) -> Matrix<S> {
        let columns = self
            .columns
            .iter()
            .map(|c| c.iter().map(|(r, v)| (*r, f(v))).filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        Matrix { rows: self.rows, cols: self.cols, columns }
    }
}

impl<R: EuclideanRing> fmt::Display for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_dense() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// A finitely generated abelian group `Z^r ⊕ Z/d_1 ⊕ ⋯ ⊕ Z/d_k`, `d_i | d_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AbelianGroup {
    pub free_rank: usize,
    #[serde(serialize_with = "serialize_integers")]
    pub invariant_factors: Vec<Integer>,
}

fn serialize_integers<S: serde::Serializer>(v: &[Integer], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        match i64::try_from(x) {
            Ok(small) => seq.serialize_element(&small)?,
            Err(_) => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { free_rank: 0, invariant_factors: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup { free_rank: rank, invariant_factors: Vec::new() }
    }

    /// Canonical form of `Z^free ⊕ ⊕ Z/o_i` for arbitrary orders `o_i`
    /// (an order of zero counts as a free summand).
    pub fn from_orders(free: usize, orders: &[Integer]) -> Self {
        let mut free = free;
        let mut nonzero = Vec::new();
        for o in orders {
            if o.is_zero() {
                free += 1;
            } else if !o.abs().is_one() {
                nonzero.push(o.abs());
            }
        }
        if nonzero.is_empty() {
            return AbelianGroup::free(free);
        }
        let n = nonzero.len();
        let cols = nonzero.into_iter().enumerate().map(|(i, o)| vec![(i, o)]).collect();
        let m = IntMatrix::from_columns(n, cols).expect("diagonal");
        let d = smith_normal_form(&m, false).diagonal;
        AbelianGroup {
            free_rank: free,
            invariant_factors: d.into_iter().filter(|x| !x.is_zero() && !x.is_one()).collect(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    /// `None` for infinite groups.
    pub fn order(&self) -> Option<Integer> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.invariant_factors.iter().fold(Integer::one(), |a, b| a * b))
    }

    /// Smallest positive `e` with `e·G = 0`, `None` if infinite.
    pub fn exponent(&self) -> Option<Integer> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.invariant_factors.last().cloned().unwrap_or_else(Integer::one))
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.invariant_factors {
            parts.push(format!("Z/{d}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Debug)]
pub struct SmithForm<R> {
    /// `min(rows, cols)` entries; nonzero ones first, normalized, each
    /// dividing the next.
    pub diagonal: Vec<R>,
    pub rank: usize,
    pub transforms: Option<SmithTransforms<R>>,
}

/// Unimodular `u`, `v` with `u · M · v = D`, plus their inverses.
#[derive(Clone, Debug)]
pub struct SmithTransforms<R> {
    pub u: Vec<Vec<R>>,
    pub u_inv: Vec<Vec<R>>,
    pub v: Vec<Vec<R>>,
    pub v_inv: Vec<Vec<R>>,
}

fn dense_identity<R: EuclideanRing>(n: usize) -> Vec<Vec<R>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { R::one() } else { R::zero() }).collect()).collect()
}

fn unit_inverse<R: EuclideanRing>(u: &R) -> R {
    let (q, r) = R::one().div_rem_euclid(u);
    debug_assert!(r.is_zero());
    q
}

/// `row_dst -= q · row_src`.
fn row_axpy<R: EuclideanRing>(m: &mut [Vec<R>], dst: usize, src: usize, q: &R) {
    if q.is_zero() {
        return;
    }
    let (a, b) = if dst < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in a.iter_mut().zip(b.iter()) {
        if !y.is_zero() {
            *x = x.clone() - q.mul_ref(y);
        }
    }
}

/// `col_dst -= q · col_src`.
fn col_axpy<R: EuclideanRing>(m: &mut [Vec<R>], dst: usize, src: usize, q: &R) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        if !row[src].is_zero() {
            let t = q.mul_ref(&row[src]);
            row[dst] = row[dst].clone() - t;
        }
    }
}

struct DenseSnf<R> {
    a: Vec<Vec<R>>,
    t: Option<SmithTransforms<R>>,
}

impl<R: EuclideanRing> DenseSnf<R> {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        if let Some(t) = &mut self.t {
            t.u.swap(i, j);
            for row in t.u_inv.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        if let Some(t) = &mut self.t {
            for row in t.v.iter_mut() {
                row.swap(i, j);
            }
            t.v_inv.swap(i, j);
        }
    }

    /// `row_dst -= q · row_src`.
    fn row_op(&mut self, dst: usize, src: usize, q: &R) {
        row_axpy(&mut self.a, dst, src, q);
        if let Some(t) = &mut self.t {
            row_axpy(&mut t.u, dst, src, q);
            col_axpy(&mut t.u_inv, src, dst, &-q.clone());
        }
    }

    /// `col_dst -= q · col_src`.
    fn col_op(&mut self, dst: usize, src: usize, q: &R) {
        col_axpy(&mut self.a, dst, src, q);
        if let Some(t) = &mut self.t {
            col_axpy(&mut t.v, dst, src, q);
            row_axpy(&mut t.v_inv, src, dst, &-q.clone());
        }
    }

    fn scale_row(&mut self, i: usize, unit: &R) {
        if unit.is_one() {
            return;
        }
        let inv = unit_inverse(unit);
        for x in self.a[i].iter_mut() {
            *x = x.mul_ref(unit);
        }
        if let Some(t) = &mut self.t {
            for x in t.u[i].iter_mut() {
                *x = x.mul_ref(unit);
            }
            for row in t.u_inv.iter_mut() {
                row[i] = row[i].mul_ref(&inv);
            }
        }
    }

    fn run(&mut self, rows: usize, cols: usize) -> Vec<R> {
        let n = rows.min(cols);
        let mut diag = Vec::with_capacity(n);
        for k in 0..n {
            loop {
                let Some((pi, pj)) = self.pick_pivot(k, rows, cols) else {
                    diag.resize(n, R::zero());
                    return diag;
                };
                self.swap_rows(k, pi);
                self.swap_cols(k, pj);
                let p = self.a[k][k].clone();
                let mut clean = true;
                for i in k + 1..rows {
                    if !self.a[i][k].is_zero() {
                        let (q, r) = self.a[i][k].div_rem_euclid(&p);
                        self.row_op(i, k, &q);
                        clean &= r.is_zero();
                    }
                }
                for j in k + 1..cols {
                    if !self.a[k][j].is_zero() {
                        let (q, r) = self.a[k][j].div_rem_euclid(&p);
                        self.col_op(j, k, &q);
                        clean &= r.is_zero();
                    }
                }
                if !clean {
                    continue;
                }
                let bad = (k + 1..rows).find(|&i| (k + 1..cols).any(|j| !self.a[i][j].divisible_by(&p)));
                if let Some(i) = bad {
                    // row_k += row_i brings a non-multiple into the pivot row
                    self.row_op(k, i, &-R::one());
                    continue;
                }
                break;
            }
            let unit = self.a[k][k].normalizing_unit();
            self.scale_row(k, &unit);
            diag.push(self.a[k][k].clone());
        }
        diag
    }

    fn pick_pivot(&self, k: usize, rows: usize, cols: usize) -> Option<(usize, usize)> {
        let mut best: Option<(u64, usize, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                let v = &self.a[i][j];
                if v.is_zero() {
                    continue;
                }
                let mag = v.magnitude();
                if let Some((bm, _, _, _)) = best {
                    if mag > bm {
                        continue;
                    }
                }
                let count = (k..cols).filter(|&c| !self.a[i][c].is_zero()).count()
                    + (k..rows).filter(|&r| !self.a[r][j].is_zero()).count();
                let cand = (mag, count, i, j);
                if best.map_or(true, |b| (cand.0, cand.1) < (b.0, b.1)) {
                    best = Some(cand);
                }
            }
        }
        best.map(|(_, _, i, j)| (i, j))
    }
}

fn smith_dense<R: EuclideanRing>(a: Vec<Vec<R>>, rows: usize, cols: usize, transforms: bool) -> SmithForm<R> {
    let t = transforms.then(|| SmithTransforms {
        u: dense_identity(rows),
        u_inv: dense_identity(rows),
        v: dense_identity(cols),
        v_inv: dense_identity(cols),
    });
    let mut s = DenseSnf { a, t };
    let diag = s.run(rows, cols);
    let rank = diag.iter().filter(|d| !d.is_zero()).count();
    SmithForm { diagonal: diag, rank, transforms: s.t }
}

/// Smith normal form. Transforms are computed on request only.
pub fn smith_normal_form<R: EuclideanRing>(m: &Matrix<R>, transforms: bool) -> SmithForm<R> {
    if transforms {
        return smith_dense(m.to_dense(), m.rows, m.cols, true);
    }
    let n = m.rows.min(m.cols);
    match elementary_divisors(m) {
        Ok(mut d) => {
            let rank = d.len();
            d.resize(n, R::zero());
            SmithForm { diagonal: d, rank, transforms: None }
        }
        Err(_) => smith_dense(m.to_dense(), m.rows, m.cols, false),
    }
}

/// Sparse elimination state: rows as sorted `(col, value)` lists.
struct SparseElim<R> {
    rows: Vec<Vec<(usize, R)>>,
    alive: Vec<bool>,
    col_rows: Vec<Vec<usize>>,
    /// Right-hand side carried through the row operations, when solving.
    rhs: Option<Vec<R>>,
    /// `(row, col)` of each unit pivot, in elimination order.
    pivots: Vec<(usize, usize)>,
}

impl<R: EuclideanRing> SparseElim<R> {
    fn new(m: &Matrix<R>) -> Self {
        let mut rows: Vec<Vec<(usize, R)>> = vec![Vec::new(); m.rows];
        let mut col_rows = vec![Vec::new(); m.cols];
        for (j, col) in m.columns.iter().enumerate() {
            for (i, v) in col {
                rows[*i].push((j, v.clone()));
                col_rows[j].push(*i);
            }
        }
        SparseElim { alive: rows.iter().map(|r| !r.is_empty()).collect(), rows, col_rows, rhs: None, pivots: Vec::new() }
    }

    fn entry(&self, r: usize, c: usize) -> Option<&R> {
        let row = &self.rows[r];
        row.binary_search_by_key(&c, |(j, _)| *j).ok().map(|k| &row[k].1)
    }

    fn live_rows(&mut self, c: usize) -> Vec<usize> {
        let mut list = std::mem::take(&mut self.col_rows[c]);
        list.sort_unstable();
        list.dedup();
        list.retain(|&r| self.alive[r] && self.entry(r, c).is_some());
        self.col_rows[c] = list.clone();
        list
    }

    /// `row_dst -= f · row_src`, maintaining column membership lists.
    fn axpy(&mut self, dst: usize, src: usize, f: &R) {
        let a = std::mem::take(&mut self.rows[dst]);
        let b = &self.rows[src];
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
            let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
            if take_a {
                out.push(a[i].clone());
                i += 1;
            } else if take_b {
                let v = -f.mul_ref(&b[j].1);
                self.col_rows[b[j].0].push(dst);
                out.push((b[j].0, v));
                j += 1;
            } else {
                let v = a[i].1.clone() - f.mul_ref(&b[j].1);
                if !v.is_zero() {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        self.rows[dst] = out;
        if let Some(rhs) = &mut self.rhs {
            let t = f.mul_ref(&rhs[src]);
            rhs[dst] = rhs[dst].clone() - t;
        }
    }

    /// Eliminates with unit pivots until none remain; returns the number of
    /// unit pivots taken.
    fn unit_phase(&mut self) -> usize {
        let ncols = self.col_rows.len();
        let mut done = vec![false; ncols];
        let mut pivots = 0;
        loop {
            let mut progress = false;
            let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..ncols)
                .filter(|&c| !done[c])
                .map(|c| Reverse((self.col_rows[c].len(), c)))
                .collect();
            let mut deferred = HashSet::new();
            while let Some(Reverse((count, c))) = heap.pop() {
                if done[c] || deferred.contains(&c) {
                    continue;
                }
                let live = self.live_rows(c);
                if live.is_empty() {
                    done[c] = true;
                    continue;
                }
                if live.len() != count {
                    heap.push(Reverse((live.len(), c)));
                    continue;
                }
                let pivot = live
                    .iter()
                    .filter(|&&r| self.entry(r, c).map_or(false, |v| v.is_unit()))
                    .min_by_key(|&&r| (self.rows[r].len(), r))
                    .copied();
                let Some(p) = pivot else {
                    deferred.insert(c);
                    continue;
                };
                let inv = unit_inverse(self.entry(p, c).expect("pivot entry"));
                for &r in &live {
                    if r == p {
                        continue;
                    }
                    let f = self.entry(r, c).expect("live entry").mul_ref(&inv);
                    self.axpy(r, p, &f);
                }
                self.alive[p] = false;
                if self.rhs.is_some() {
                    self.pivots.push((p, c));
                } else {
                    self.rows[p].clear();
                }
                done[c] = true;
                pivots += 1;
                progress = true;
            }
            if !progress {
                return pivots;
            }
        }
    }

    fn core(&self) -> (Vec<usize>, Vec<usize>) {
        let rows: Vec<usize> = (0..self.rows.len()).filter(|&r| self.alive[r] && !self.rows[r].is_empty()).collect();
        let mut cols: Vec<usize> = rows.iter().flat_map(|&r| self.rows[r].iter().map(|(c, _)| *c)).collect();
        cols.sort_unstable();
        cols.dedup();
        (rows, cols)
    }
}

/// Nonzero invariant factors (including the unit ones), normalized and in
/// divisibility order. Unit pivots are eliminated sparsely; the remaining core
/// goes through dense Smith normal form.
pub fn elementary_divisors<R: EuclideanRing>(m: &Matrix<R>) -> Result<Vec<R>> {
    let mut e = SparseElim::new(m);
    let units = e.unit_phase();
    let (rows, cols) = e.core();
    if rows.len().saturating_mul(cols.len()) > DENSE_CORE_LIMIT {
        return Err(Error::Capacity(format!(
            "residual core {}x{} exceeds the dense limit",
            rows.len(),
            cols.len()
        )));
    }
    let col_pos: std::collections::HashMap<usize, usize> = cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut dense = vec![vec![R::zero(); cols.len()]; rows.len()];
    for (k, &r) in rows.iter().enumerate() {
        for (c, v) in &e.rows[r] {
            dense[k][col_pos[c]] = v.clone();
        }
    }
    let core = smith_dense(dense, rows.len(), cols.len(), false);
    let mut out = vec![R::one(); units];
    out.extend(core.diagonal.into_iter().filter(|d| !d.is_zero()));
    Ok(out)
}

pub fn rank<R: EuclideanRing>(m: &Matrix<R>) -> Result<usize> {
    Ok(elementary_divisors(m)?.len())
}

macro_rules! modp_dispatch {
    ($m:expr, $p:expr, $($prime:literal),*) => {
        match $p {
            $($prime => Some(rank(&$m.map(|v| Fp::<$prime>::from_integer(v)))),)*
            _ => None,
        }
    };
}

use crate::scalar::Coefficient;

/// Rank over `Z/p`.
pub fn modp_rank(m: &IntMatrix, p: u64) -> Result<usize> {
    if !is_prime(p) {
        return arg_err(format!("{p} is not prime"));
    }
    if let Some(r) = modp_dispatch!(m, p, 2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31) {
        return r;
    }
    modp_rank_dense(m, p)
}

fn modp_rank_dense(m: &IntMatrix, p: u64) -> Result<usize> {
    let pi = Integer::from(p);
    let mut a: Vec<Vec<u64>> = m
        .to_dense()
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    let r = ((v % &pi) + &pi) % &pi;
                    u64::try_from(&r).expect("reduced")
                })
                .collect()
        })
        .collect();
    let (rows, cols) = (m.rows, m.cols);
    let mulmod = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, pr);
        let inv = powmod(a[rank][c], p - 2);
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let f = mulmod(a[r][c], inv);
                for k in c..cols {
                    let sub = mulmod(f, a[rank][k]);
                    a[r][k] = (a[r][k] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// Columns spanning `ker m` (a saturated lattice over the integers).
pub fn kernel_basis<R: EuclideanRing>(m: &Matrix<R>) -> Matrix<R> {
    let s = smith_normal_form(m, true);
    let t = s.transforms.expect("requested");
    let n = m.cols;
    let columns = (s.rank..n)
        .map(|j| (0..n).filter(|&i| !t.v[i][j].is_zero()).map(|i| (i, t.v[i][j].clone())).collect())
        .collect();
    Matrix { rows: n, cols: n - s.rank, columns }
}

/// Basis of the lattice spanned by the columns of `m`.
pub fn lattice_basis<R: EuclideanRing>(m: &Matrix<R>) -> Matrix<R> {
    let s = smith_normal_form(m, true);
    let t = s.transforms.expect("requested");
    let columns = (0..s.rank)
        .map(|j| {
            (0..m.rows)
                .map(|i| (i, t.u_inv[i][j].mul_ref(&s.diagonal[j])))
                .filter(|(_, v)| !v.is_zero())
                .collect()
        })
        .collect();
    Matrix { rows: m.rows, cols: s.rank, columns }
}

/// Any solution of `a x = b`, or `None`. Unit pivots are eliminated
/// sparsely with back-substitution; the residual core is solved through its
/// Smith form.
pub fn solve_integer<R: EuclideanRing>(a: &Matrix<R>, b: &[R]) -> Result<Option<Vec<R>>> {
    if b.len() != a.rows {
        return arg_err("right-hand side length does not match the row count");
    }
    let mut e = SparseElim::new(a);
    e.rhs = Some(b.to_vec());
    e.unit_phase();
    let (core_rows, core_cols) = e.core();
    if core_rows.len().saturating_mul(core_cols.len()) > DENSE_CORE_LIMIT {
        return Err(Error::Capacity(format!(
            "residual core {}x{} exceeds the dense limit",
            core_rows.len(),
            core_cols.len()
        )));
    }
    let rhs = e.rhs.take().expect("set above");
    let pivot_rows: HashSet<usize> = e.pivots.iter().map(|(r, _)| *r).collect();
    let core_set: HashSet<usize> = core_rows.iter().copied().collect();
    if (0..a.rows).any(|r| !pivot_rows.contains(&r) && !core_set.contains(&r) && !rhs[r].is_zero()) {
        return Ok(None);
    }
    let col_pos: std::collections::HashMap<usize, usize> = core_cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut dense = vec![vec![R::zero(); core_cols.len()]; core_rows.len()];
    for (k, &r) in core_rows.iter().enumerate() {
        for (c, v) in &e.rows[r] {
            dense[k][col_pos[c]] = v.clone();
        }
    }
    let core_rhs: Vec<R> = core_rows.iter().map(|&r| rhs[r].clone()).collect();
    let Some(core_x) = solve_dense(dense, core_rows.len(), core_cols.len(), &core_rhs) else {
        return Ok(None);
    };
    let mut x = vec![R::zero(); a.cols];
    for (k, &c) in core_cols.iter().enumerate() {
        x[c] = core_x[k].clone();
    }
    for &(p, c) in e.pivots.iter().rev() {
        let mut acc = rhs[p].clone();
        let mut pivot = R::one();
        for (col, v) in &e.rows[p] {
            if *col == c {
                pivot = v.clone();
            } else if !x[*col].is_zero() {
                acc = acc - v.mul_ref(&x[*col]);
            }
        }
        x[c] = acc.mul_ref(&unit_inverse(&pivot));
    }
    if a.apply(&x)? != b {
        return Err(Error::Internal("sparse solve produced a wrong solution".into()));
    }
    Ok(Some(x))
}

fn solve_dense<R: EuclideanRing>(a: Vec<Vec<R>>, rows: usize, cols: usize, b: &[R]) -> Option<Vec<R>> {
    let s = smith_dense(a, rows, cols, true);
    let t = s.transforms.expect("requested");
    let ub: Vec<R> = t.u.iter().map(|row| dot(row, b)).collect();
    let mut y = vec![R::zero(); cols];
    for (i, v) in ub.iter().enumerate() {
        if i < s.rank {
            let d = &s.diagonal[i];
            if !v.divisible_by(d) {
                return None;
            }
            y[i] = v.div_rem_euclid(d).0;
        } else if !v.is_zero() {
            return None;
        }
    }
    Some(t.v.iter().map(|row| dot(row, &y)).collect())
}

/// Dense reference solver through the full Smith form.
pub fn solve_integer_dense<R: EuclideanRing>(a: &Matrix<R>, b: &[R]) -> Result<Option<Vec<R>>> {
    if b.len() != a.rows {
        return arg_err("right-hand side length does not match the row count");
    }
    Ok(solve_dense(a.to_dense(), a.rows, a.cols, b))
}

/// Kernel and cokernel of a homomorphism `⊕ Z/s_i → ⊕ Z/t_j` (an order of
/// zero means a free summand), given by its matrix on the standard
/// generators. The map must be well defined.
pub fn hom_kernel_cokernel(src: &[Integer], tgt: &[Integer], d: &IntMatrix) -> Result<(AbelianGroup, AbelianGroup)> {
    let (a, b) = (src.len(), tgt.len());
    if d.rows() != b || d.cols() != a {
        return arg_err("homomorphism matrix does not match the group presentations");
    }
    let tgt_rel = IntMatrix::from_columns(b, (0..b).map(|j| vec![(j, tgt[j].clone())]).collect())?;
    let src_rel = IntMatrix::from_columns(a, (0..a).map(|i| vec![(i, src[i].clone())]).collect())?;
    for i in 0..a {
        let image: Vec<Integer> = (0..b).map(|j| d.get(j, i) * &src[i]).collect();
        if solve_integer(&tgt_rel, &image)?.is_none() {
            return Err(Error::Precondition("matrix does not define a homomorphism".into()));
        }
    }
    let coker_diag = smith_normal_form(&tgt_rel.hstack(d)?, false);
    let coker = group_from_divisors::<Integer>(
        b - coker_diag.rank,
        &coker_diag.diagonal[..coker_diag.rank],
    );
    // kernel: projections of ker [d | tgt] to the source coordinates
    let k = kernel_basis(&d.hstack(&tgt_rel)?);
    let proj: Vec<Vec<(usize, Integer)>> =
        (0..k.cols()).map(|j| k.column(j).iter().filter(|(r, _)| *r < a).cloned().collect()).collect();
    let lattice = lattice_basis(&IntMatrix::from_columns(a, proj)?);
    let rels: Vec<Vec<(usize, Integer)>> = (0..a)
        .map(|i| {
            let col: Vec<Integer> = (0..a).map(|r| src_rel.get(r, i)).collect();
            let y = solve_integer(&lattice, &col)?.ok_or_else(|| Error::Internal("source relation outside the kernel".into()))?;
            Ok(y.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect())
        })
        .collect::<Result<_>>()?;
    let rel = IntMatrix::from_columns(lattice.cols(), rels)?;
    let sd = smith_normal_form(&rel, false);
    let kernel = group_from_divisors::<Integer>(lattice.cols() - sd.rank, &sd.diagonal[..sd.rank]);
    Ok((kernel, coker))
}

fn dot<R: EuclideanRing>(a: &[R], b: &[R]) -> R {
    let mut acc = R::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc.add_assign_ref(&x.mul_ref(y));
        }
    }
    acc
}

fn check_composable<R: EuclideanRing>(a: &Matrix<R>, b: &Matrix<R>) -> Result<()> {
    if b.cols != a.rows {
        return arg_err(format!(
            "boundary shapes do not compose: in {}x{}, out {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    if !b.mul(a)?.is_zero() {
        return Err(Error::Precondition("outgoing ∘ incoming boundary is not zero".into()));
    }
    Ok(())
}

fn group_from_divisors<R: EuclideanRing>(free: usize, divisors: &[R]) -> AbelianGroup {
    if R::characteristic() != 0 {
        // a vector space over Z/p
        let p = Integer::from(R::characteristic());
        return AbelianGroup { free_rank: 0, invariant_factors: vec![p; free] };
    }
    AbelianGroup {
        free_rank: free,
        invariant_factors: divisors.iter().filter(|d| !d.is_one()).map(|d| d.to_integer()).collect(),
    }
}

/// `ker(b) / im(a)` where `a` is the incoming and `b` the outgoing boundary.
pub fn homology_at<R: EuclideanRing>(a: &Matrix<R>, b: &Matrix<R>) -> Result<AbelianGroup> {
    check_composable(a, b)?;
    let rank_b = rank(b)?;
    let da = elementary_divisors(a)?;
    let free = a.rows - rank_b - da.len();
    Ok(group_from_divisors(free, &da))
}

/// Homology together with the data needed to name classes of cycles.
#[derive(Clone, Debug)]
pub struct HomologyPresentation<R> {
    pub group: AbelianGroup,
    /// Columns: a basis of `ker b`.
    pub kernel: Matrix<R>,
    kernel_left_inverse: Vec<Vec<R>>,
    u: Vec<Vec<R>>,
    /// Per coordinate of `U K⁺ z`: the modulus (zero for free coordinates).
    moduli: Vec<R>,
    /// Coordinates carrying a nontrivial summand, with their generators.
    pub summands: Vec<usize>,
    pub generators: Vec<Vec<R>>,
}

impl<R: EuclideanRing> HomologyPresentation<R> {
    pub fn new(a: &Matrix<R>, b: &Matrix<R>) -> Result<Self> {
        check_composable(a, b)?;
        let n = a.rows;
        let sb = smith_normal_form(b, true);
        let tb = sb.transforms.expect("requested");
        let k = n - sb.rank;
        let kernel = Matrix {
            rows: n,
            cols: k,
            columns: (sb.rank..n)
                .map(|j| (0..n).filter(|&i| !tb.v[i][j].is_zero()).map(|i| (i, tb.v[i][j].clone())).collect())
                .collect(),
        };
        let kernel_left_inverse: Vec<Vec<R>> = tb.v_inv[sb.rank..].to_vec();
        // a' = K⁺ a
        let mut a_prime = vec![vec![R::zero(); a.cols]; k];
        for (j, col) in a.columns.iter().enumerate() {
            for (r, row) in kernel_left_inverse.iter().enumerate() {
                let mut acc = R::zero();
                for (i, v) in col {
                    if !row[*i].is_zero() {
                        acc.add_assign_ref(&row[*i].mul_ref(v));
                    }
                }
                a_prime[r][j] = acc;
            }
        }
        let sa = smith_dense(a_prime, k, a.cols, true);
        let ta = sa.transforms.expect("requested");
        let mut moduli = vec![R::zero(); k];
        for (i, d) in sa.diagonal.iter().enumerate() {
            moduli[i] = d.clone();
        }
        let summands: Vec<usize> = (0..k).filter(|&i| !moduli[i].is_unit()).collect();
        let generators = summands
            .iter()
            .map(|&i| {
                let coeffs: Vec<R> = (0..k).map(|r| ta.u_inv[r][i].clone()).collect();
                kernel.apply(&coeffs).expect("shape")
            })
            .collect();
        let free = moduli.iter().filter(|d| d.is_zero()).count();
        let divisors: Vec<R> = moduli.iter().filter(|d| !d.is_zero()).cloned().collect();
        let group = group_from_divisors(free, &divisors);
        Ok(HomologyPresentation { group, kernel, kernel_left_inverse, u: ta.u, moduli, summands, generators })
    }

    /// Coordinates of the class of a cycle, one per entry of `summands`,
    /// reduced modulo the summand orders.
    pub fn class_of(&self, z: &[R]) -> Result<Vec<R>> {
        if z.len() != self.kernel.rows {
            return arg_err("cycle has the wrong length");
        }
        let c: Vec<R> = self.kernel_left_inverse.iter().map(|row| dot(row, z)).collect();
        if self.kernel.apply(&c)? != z {
            return Err(Error::Precondition("vector is not a cycle".into()));
        }
        let y: Vec<R> = self.u.iter().map(|row| dot(row, &c)).collect();
        Ok(self
            .summands
            .iter()
            .map(|&i| {
                let m = &self.moduli[i];
                if m.is_zero() {
                    y[i].clone()
                } else if R::characteristic() == 0 {
                    R::from_integer(&nonnegative_residue(&y[i].to_integer(), &m.to_integer()))
                } else {
                    y[i].div_rem_euclid(m).1
                }
            })
            .collect())
    }

    pub fn moduli(&self) -> Vec<R> {
        self.summands.iter().map(|&i| self.moduli[i].clone()).collect()
    }

    pub fn is_boundary(&self, z: &[R]) -> Result<bool> {
        Ok(self.class_of(z)?.iter().all(|v| v.is_zero()))
    }
}

/// Reduces `v` into `0..m` for positive integer moduli (identity otherwise).
pub fn nonnegative_residue(v: &Integer, m: &Integer) -> Integer {
    if m.is_zero() {
        return v.clone();
    }
    let r = v % m;
    if r.is_negative() {
        r + m.abs()
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::F3;

    fn im(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows)
    }

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    #[test]
    fn smith_examples() {
        let s = smith_normal_form(&im(&[&[2, 4], &[6, 8]]), false);
        assert_eq!(s.diagonal, ints(&[2, 4]));
        let s = smith_normal_form(&IntMatrix::identity(3), true);
        assert_eq!(s.diagonal, ints(&[1, 1, 1]));
        let s = smith_normal_form(&IntMatrix::zeros(2, 3), false);
        assert_eq!(s.diagonal, ints(&[0, 0]));
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn transforms_reproduce_diagonal() {
        let m = im(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = smith_normal_form(&m, true);
        assert_eq!(s.diagonal, ints(&[2, 6, 12]));
        let t = s.transforms.unwrap();
        let d = m.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Integer::zero();
                for a in 0..3 {
                    for b in 0..3 {
                        acc += &t.u[i][a] * &d[a][b] * &t.v[b][j];
                    }
                }
                let want = if i == j { s.diagonal[i].clone() } else { Integer::zero() };
                assert_eq!(acc, want);
            }
        }
    }

    #[test]
    fn homology_examples() {
        let zero_in = IntMatrix::zeros(1, 0);
        let zero_out = IntMatrix::zeros(0, 1);
        assert_eq!(homology_at(&zero_in, &zero_out).unwrap(), AbelianGroup::free(1));
        let two = im(&[&[2]]);
        let h = homology_at(&two, &zero_out).unwrap();
        assert_eq!(h.invariant_factors, ints(&[2]));
        assert_eq!(h.free_rank, 0);
        let bad = homology_at(&im(&[&[1]]), &im(&[&[1]]));
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn rank_and_solve_examples() {
        assert_eq!(modp_rank(&im(&[&[2, 0], &[0, 4]]), 2).unwrap(), 0);
        assert_eq!(modp_rank(&im(&[&[2, 0], &[0, 3]]), 3).unwrap(), 1);
        assert_eq!(modp_rank(&im(&[&[2, 0], &[0, 3]]), 37).unwrap(), 2);
        assert!(modp_rank(&im(&[&[1]]), 4).is_err());
        assert_eq!(solve_integer(&im(&[&[2]]), &ints(&[3])).unwrap(), None);
        let x = solve_integer(&im(&[&[2, 3]]), &ints(&[1])).unwrap().unwrap();
        assert_eq!(&x[0] * 2 + &x[1] * 3, Integer::from(1));
    }

    #[test]
    fn presentation_names_classes() {
        // Z --(2)--> Z --0--> 0
        let p = HomologyPresentation::new(&im(&[&[2]]), &IntMatrix::zeros(0, 1)).unwrap();
        assert_eq!(p.group.invariant_factors, ints(&[2]));
        let c1 = p.class_of(&ints(&[1])).unwrap();
        let c3 = p.class_of(&ints(&[3])).unwrap();
        assert_eq!(c1, c3);
        assert!(p.is_boundary(&ints(&[4])).unwrap());
        assert!(!p.is_boundary(&ints(&[1])).unwrap());
    }

    #[test]
    fn field_homology_is_elementary() {
        let a: Matrix<F3> = Matrix::from_i64_rows(&[&[1, 0], &[0, 0]]);
        let b: Matrix<F3> = Matrix::zeros(0, 2);
        let h = homology_at(&a, &b).unwrap();
        assert_eq!(h.invariant_factors, ints(&[3]));
    }

    #[test]
    fn orders_canonicalize() {
        let g = AbelianGroup::from_orders(0, &ints(&[4, 6, 1]));
        assert_eq!(g.invariant_factors, ints(&[2, 12]));
        assert_eq!(g.to_string(), "Z/2 + Z/12");
        assert_eq!(AbelianGroup::from_orders(1, &ints(&[0])).to_string(), "Z^2");
    }

    #[test]
    fn sparse_and_dense_solves_agree() {
        let a = im(&[&[1, 2, 0, 3], &[0, 2, 4, 0], &[1, 0, 0, 1]]);
        for rhs in [[1, 2, 1], [3, 4, 0], [1, 1, 1]] {
            let b = ints(&rhs);
            let sparse = solve_integer(&a, &b).unwrap();
            let dense = solve_integer_dense(&a, &b).unwrap();
            assert_eq!(sparse.is_some(), dense.is_some(), "rhs {rhs:?}");
            if let Some(x) = sparse {
                assert_eq!(a.apply(&x).unwrap(), b);
            }
        }
    }

    #[test]
    fn kernel_and_cokernel_of_maps() {
        // Z/4 --(×2)--> Z/4 : kernel Z/2, cokernel Z/2
        let d = im(&[&[2]]);
        let (k, c) = hom_kernel_cokernel(&ints(&[4]), &ints(&[4]), &d).unwrap();
        assert_eq!(k.invariant_factors, ints(&[2]));
        assert_eq!(c.invariant_factors, ints(&[2]));
        // Z --(×3)--> Z : kernel 0, cokernel Z/3
        let (k, c) = hom_kernel_cokernel(&ints(&[0]), &ints(&[0]), &im(&[&[3]])).unwrap();
        assert!(k.is_trivial());
        assert_eq!(c.invariant_factors, ints(&[3]));
        // Z/2 --(×1)--> Z/3 is not a homomorphism
        assert!(hom_kernel_cokernel(&ints(&[2]), &ints(&[3]), &im(&[&[1]])).is_err());
    }
}
