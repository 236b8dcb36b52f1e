//! Dense vectors, symmetric matrices and symmetric eigensolvers.
//!
//! Dense problems go through Householder tridiagonalisation followed by
//! implicit QL; tridiagonal Hessians (chain instances) skip the first stage.

use crate::scalar::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm_sq<T: Real>(a: &[T]) -> T {
    dot(a, a)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

/// `y += a * x`.
pub fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scaled<T: Real>(a: T, x: &[T]) -> Vec<T> {
    x.iter().map(|&v| a * v).collect()
}

pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

pub fn all_finite<T: Real>(a: &[T]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Dense symmetric matrix stored in full row-major form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![T::one(); n])
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * m.n + i] = v;
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Accepts a row-major square array, rejecting anything not exactly symmetric.
    pub fn from_rows(n: usize, data: Vec<T>) -> Option<Self> {
        if data.len() != n * n {
            return None;
        }
        let m = Self { n, data };
        m.is_symmetric().then_some(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Sets entries (i, j) and (j, i).
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.mul_vec(v))
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: T, other: &Self) {
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    /// `self += a * u uᵀ`, keeping exact symmetry.
    pub fn add_rank_one(&mut self, a: T, u: &[T]) {
        let n = self.n;
        for i in 0..n {
            let ai = a * u[i];
            for j in i..n {
                let v = self.data[i * n + j] + ai * u[j];
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn scale(&mut self, a: T) {
        for x in &mut self.data {
            *x *= a;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(-T::one(), other);
        out
    }

    pub fn frobenius(&self) -> T {
        norm(&self.data)
    }

    /// Spectral norm via the eigenvalues.
    pub fn op_norm(&self) -> T {
        let ev = self.eigenvalues();
        match (ev.first(), ev.last()) {
            (Some(&lo), Some(&hi)) => lo.abs().max(hi.abs()),
            _ => T::zero(),
        }
    }

    pub fn eigen(&self) -> SymEigen<T> {
        sym_eigen(self)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let (d, e) = householder(self, None);
        ql_implicit(d, e, None).0
    }

    pub fn lambda_min(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::zero)
    }
}

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> SymMatrix<T> {
        let n = self.dim();
        let mut m = SymMatrix::from_diag(&self.diag);
        for i in 0..n.saturating_sub(1) {
            m.set(i, i + 1, self.off[i]);
        }
        m
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        ql_implicit(self.diag.clone(), self.shifted_off(), None).0
    }

    pub fn eigen(&self) -> SymEigen<T> {
        let n = self.dim();
        let mut z = SymMatrix::identity(n).data;
        let (values, order) = ql_implicit(self.diag.clone(), self.shifted_off(), Some(&mut z));
        SymEigen::from_columns(n, values, order, &z)
    }

    pub fn lambda_min(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::zero)
    }

    // QL expects the coupling of (i-1, i) at index i.
    fn shifted_off(&self) -> Vec<T> {
        let mut e = vec![T::zero(); self.dim()];
        e[1..].copy_from_slice(&self.off[..self.dim().saturating_sub(1)]);
        e
    }
}

/// Eigenpairs sorted by ascending eigenvalue; `vectors[k]` pairs with `values[k]`.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

impl<T: Real> SymEigen<T> {
    fn from_columns(n: usize, values: Vec<T>, order: Vec<usize>, z: &[T]) -> Self {
        let vectors = order
            .iter()
            .map(|&c| (0..n).map(|r| z[r * n + c]).collect())
            .collect();
        Self { values, vectors }
    }

    pub fn lambda_min(&self) -> T {
        self.values[0]
    }

    /// Coordinates of `v` in the eigenbasis.
    pub fn project(&self, v: &[T]) -> Vec<T> {
        self.vectors.iter().map(|q| dot(q, v)).collect()
    }

    /// Inverse of [`project`](Self::project).
    pub fn expand(&self, coeffs: &[T]) -> Vec<T> {
        let n = self.values.len();
        let mut out = vec![T::zero(); n];
        for (q, &c) in self.vectors.iter().zip(coeffs) {
            axpy(c, q, &mut out);
        }
        out
    }
}

pub fn sym_eigen<T: Real>(m: &SymMatrix<T>) -> SymEigen<T> {
    let n = m.dim();
    let mut z = m.data.clone();
    let (d, e) = householder(m, Some(&mut z));
    let (values, order) = ql_implicit(d, e, Some(&mut z));
    SymEigen::from_columns(n, values, order, &z)
}

/// Householder reduction to tridiagonal form. Returns the diagonal and the
/// sub-diagonal (`e[i]` couples `i-1` and `i`, `e[0] = 0`). When `z` is given
/// (initialised to the matrix) it is overwritten with the orthogonal transform.
fn householder<T: Real>(m: &SymMatrix<T>, z: Option<&mut Vec<T>>) -> (Vec<T>, Vec<T>) {
    let n = m.dim();
    let mut own;
    let want_vecs = z.is_some();
    let a: &mut Vec<T> = match z {
        Some(z) => z,
        None => {
            own = m.data.clone();
            &mut own
        }
    };
    let idx = |i: usize, j: usize| i * n + j;
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    if n == 0 {
        return (d, e);
    }
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let scale = (0..i).fold(T::zero(), |s, k| s + a[idx(i, k)].abs());
            if scale == T::zero() {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..i {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let mut f = a[idx(i, l)];
                let mut g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                f = T::zero();
                for j in 0..i {
                    if want_vecs {
                        a[idx(j, i)] = a[idx(i, j)] / h;
                    }
                    g = T::zero();
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in (j + 1)..i {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[idx(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let v = a[idx(j, k)] - (f * e[k] + g * a[idx(i, k)]);
                        a[idx(j, k)] = v;
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    d[0] = T::zero();
    e[0] = T::zero();
    for i in 0..n {
        if want_vecs {
            if d[i] != T::zero() {
                for j in 0..i {
                    let mut g = T::zero();
                    for k in 0..i {
                        g += a[idx(i, k)] * a[idx(k, j)];
                    }
                    for k in 0..i {
                        let v = a[idx(k, j)] - g * a[idx(k, i)];
                        a[idx(k, j)] = v;
                    }
                }
            }
            d[i] = a[idx(i, i)];
            a[idx(i, i)] = T::one();
            for j in 0..i {
                a[idx(j, i)] = T::zero();
                a[idx(i, j)] = T::zero();
            }
        } else {
            d[i] = a[idx(i, i)];
        }
    }
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. Returns eigenvalues in
/// ascending order together with the column permutation that sorts them; when
/// `z` is given its columns are rotated into eigenvectors.
fn ql_implicit<T: Real>(mut d: Vec<T>, mut e: Vec<T>, mut z: Option<&mut Vec<T>>) -> (Vec<T>, Vec<usize>) {
    let n = d.len();
    let eps = T::epsilon();
    if n > 0 {
        for i in 1..n {
            e[i - 1] = e[i];
        }
        e[n - 1] = T::zero();
    }
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m as isize - 1;
            let mut early = false;
            while i >= l as isize {
                let iu = i as usize;
                let f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == T::zero() {
                    d[iu + 1] -= p;
                    e[m] = T::zero();
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + two * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + iu + 1];
                        z[k * n + iu + 1] = s * z[k * n + iu] + c * f;
                        z[k * n + iu] = c * z[k * n + iu] - s * f;
                    }
                }
                i -= 1;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| d[k]).collect();
    (values, order)
}
