//! Dense linear algebra kernels.
//!
//! * [`symmetric_eigen`]: Householder tridiagonalization followed by implicit QL.
//!   Eigenvectors are stored row-major, one eigenvector per row, so the plane
//!   rotations of the QL sweeps work on contiguous memory.
//! * [`lu_solve`]: complex LU with partial pivoting.
//! * [`gmres`]: restarted GMRES with a diagonal preconditioner, for large sparse
//!   complex systems given as a matrix-free operator.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is in the build graph
use num_traits::Float;

use crate::{Error, Result, C64};

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub n: usize,
    /// Ascending.
    pub values: Vec<f64>,
    /// Row `j` (`vectors[j*n..(j+1)*n]`) is the unit eigenvector of `values[j]`.
    /// Empty when only eigenvalues were requested.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Eight partial sums let the compiler vectorize without reassociation.
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s + acc.iter().sum::<f64>()
}

const NB: usize = 32;

/// Householder reduction of the symmetric `a` (row-major; only the lower triangle
/// is read). Returns the diagonal, the sub-diagonal (`e[i]` couples `i-1` and `i`,
/// `e[0] = 0`) and the reflector normalisations; reflector `i` is left in row `i`
/// of `a`. Rows are reduced bottom-up in panels of [`NB`], with the rank-2 updates
/// of a panel deferred and applied in one pass.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut hs = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    // (row index of u, w) for the reflectors of the open panel.
    let mut panel: Vec<(usize, Vec<f64>)> = Vec::with_capacity(NB);
    let mut i = n.saturating_sub(1);
    while i >= 2 {
        panel.clear();
        let bottom = if i > NB + 2 { i + 1 - NB } else { 2 };
        while i >= bottom {
            let l = i;
            // Current row i and diagonal entry, with pending panel updates folded in.
            x[..l].copy_from_slice(&a[i * n..i * n + l]);
            let mut diag = a[i * n + i];
            for (j, w) in &panel {
                let u = &a[j * n..j * n + j];
                let (ui, wi) = (u[i], w[i]);
                diag -= 2.0 * ui * wi;
                for k in 0..l {
                    x[k] -= ui * w[k] + wi * u[k];
                }
            }
            d[i] = diag;
            let xs = &mut x[..l];
            let scale: f64 = xs.iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                a[i * n..i * n + l].fill(0.0);
                panel.push((i, vec![0.0; l]));
                i -= 1;
                continue;
            }
            for v in xs.iter_mut() {
                *v /= scale;
            }
            let h = dot(xs, xs);
            let f = xs[l - 1];
            let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            let h = h - f * g;
            xs[l - 1] = f - g;
            a[i * n..i * n + l].copy_from_slice(xs);
            let u = &x[..l];
            // y = A u over the stored lower triangle.
            let yv = &mut y[..l];
            yv.fill(0.0);
            for r in 0..l {
                let row = &a[r * n..r * n + r + 1];
                let ur = u[r];
                yv[r] += dot(&row[..r], &u[..r]) + row[r] * ur;
                if ur != 0.0 {
                    for k in 0..r {
                        yv[k] += row[k] * ur;
                    }
                }
            }
            for (j, w) in &panel {
                let uj = &a[j * n..j * n + l];
                let (wu, uu) = (dot(&w[..l], u), dot(uj, u));
                for k in 0..l {
                    yv[k] -= uj[k] * wu + w[k] * uu;
                }
            }
            for v in yv.iter_mut() {
                *v /= h;
            }
            let kk = dot(u, yv) / (h + h);
            let w: Vec<f64> = yv.iter().zip(u).map(|(p, uk)| p - kk * uk).collect();
            hs[i] = h;
            panel.push((i, w));
            i -= 1;
        }
        // Apply the panel to the rows that remain active (lower triangle only).
        let active = i + 1;
        let (top, rest) = a.split_at_mut(active * n);
        for r in 0..active {
            let row = &mut top[r * n..r * n + r + 1];
            for (j, w) in &panel {
                let u = &rest[(j - active) * n..(j - active) * n + r + 1];
                let (ur, wr) = (u[r], w[r]);
                for k in 0..=r {
                    row[k] -= ur * w[k] + wr * u[k];
                }
            }
        }
    }
    if n >= 2 {
        e[1] = a[n];
        d[1] = a[n + 1];
    }
    if n >= 1 {
        d[0] = a[0];
    }
    (d, e, hs)
}

/// Forms Qᵀ (row-major) from the reflectors left behind by [`tridiagonalize`],
/// writing it over `a`.
///
/// Q = P_{n-1} ⋯ P_2 is built by left multiplication starting from the smallest
/// reflector, [`NB`] reflectors at a time in compact WY form `I - V T Vᵀ`.
fn accumulate_transpose(a: &mut [f64], n: usize, hs: &[f64]) {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let mut start = 2;
    while start < n {
        let end = (start + NB).min(n);
        let b = end - start;
        let s = end - 1;
        // V columns zero padded to length s; T lower triangular.
        let mut v = vec![0.0; b * s];
        let mut t = vec![0.0; b * b];
        for jj in 0..b {
            let i = start + jj;
            let h = hs[i];
            v[jj * s..jj * s + i].copy_from_slice(&a[i * n..i * n + i]);
            if h == 0.0 {
                continue;
            }
            let tau = 1.0 / h;
            let vj = &v[jj * s..jj * s + i];
            let mut uv = vec![0.0; jj];
            for (m, c) in uv.iter_mut().enumerate() {
                *c = dot(&v[m * s..m * s + i], vj);
            }
            for c in 0..jj {
                let mut acc = 0.0;
                for m in c..jj {
                    acc += uv[m] * t[m * b + c];
                }
                t[jj * b + c] = -tau * acc;
            }
            t[jj * b + jj] = tau;
        }
        // W = Vᵀ M over the s×s block.
        let mut w = vec![0.0; b * s];
        let mut r = 0;
        while r + 4 <= s {
            let m0 = &q[r * n..r * n + s];
            let m1 = &q[(r + 1) * n..(r + 1) * n + s];
            let m2 = &q[(r + 2) * n..(r + 2) * n + s];
            let m3 = &q[(r + 3) * n..(r + 3) * n + s];
            for jj in 0..b {
                let vj = &v[jj * s..];
                let (c0, c1, c2, c3) = (vj[r], vj[r + 1], vj[r + 2], vj[r + 3]);
                if c0 == 0.0 && c1 == 0.0 && c2 == 0.0 && c3 == 0.0 {
                    continue;
                }
                let wj = &mut w[jj * s..(jj + 1) * s];
                for k in 0..s {
                    wj[k] += c0 * m0[k] + c1 * m1[k] + c2 * m2[k] + c3 * m3[k];
                }
            }
            r += 4;
        }
        while r < s {
            let m0 = &q[r * n..r * n + s];
            for jj in 0..b {
                let c0 = v[jj * s + r];
                if c0 != 0.0 {
                    let wj = &mut w[jj * s..(jj + 1) * s];
                    for k in 0..s {
                        wj[k] += c0 * m0[k];
                    }
                }
            }
            r += 1;
        }
        // W <- T W
        let mut tw = vec![0.0; b * s];
        for jj in 0..b {
            let out = &mut tw[jj * s..(jj + 1) * s];
            for m in 0..=jj {
                let c = t[jj * b + m];
                if c != 0.0 {
                    let wm = &w[m * s..(m + 1) * s];
                    for k in 0..s {
                        out[k] += c * wm[k];
                    }
                }
            }
        }
        // M -= V (T W)
        for r in 0..s {
            let row = &mut q[r * n..r * n + s];
            let mut jj = 0;
            while jj + 4 <= b {
                let (c0, c1, c2, c3) =
                    (v[jj * s + r], v[(jj + 1) * s + r], v[(jj + 2) * s + r], v[(jj + 3) * s + r]);
                if !(c0 == 0.0 && c1 == 0.0 && c2 == 0.0 && c3 == 0.0) {
                    let w0 = &tw[jj * s..(jj + 1) * s];
                    let w1 = &tw[(jj + 1) * s..(jj + 2) * s];
                    let w2 = &tw[(jj + 2) * s..(jj + 3) * s];
                    let w3 = &tw[(jj + 3) * s..(jj + 4) * s];
                    for k in 0..s {
                        row[k] -= c0 * w0[k] + c1 * w1[k] + c2 * w2[k] + c3 * w3[k];
                    }
                }
                jj += 4;
            }
            while jj < b {
                let c0 = v[jj * s + r];
                if c0 != 0.0 {
                    let w0 = &tw[jj * s..(jj + 1) * s];
                    for k in 0..s {
                        row[k] -= c0 * w0[k];
                    }
                }
                jj += 1;
            }
        }
        start = end;
    }
    for r in 0..n {
        for c in 0..n {
            a[c * n + r] = q[r * n + c];
        }
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[i]` couples `i` and `i+1`
/// (`e[n-1]` is scratch). When `zt` is given, its rows are rotated alongside.
fn tql(d: &mut [f64], e: &mut [f64], zt: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut panels = zt.as_deref().map(|z| to_panels(z, n));
    // Rotations are queued sweep by sweep and applied later in column panels
    // that stay in cache.
    let mut queue = RotationQueue::default();
    let flush_at = 8 * n + 1024;
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut underflow = false;
            if panels.is_some() {
                queue.begin(m - 1);
            }
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if panels.is_some() {
                    queue.push(c, s);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
            if queue.cs.len() >= flush_at {
                if let Some(p) = panels.as_deref_mut() {
                    queue.apply(p, n);
                }
                queue.clear();
            }
        }
    }
    if let (Some(p), Some(z)) = (panels.as_deref_mut(), zt) {
        queue.apply(p, n);
        from_panels(p, n, z);
    }
    Ok(())
}

const PANEL: usize = 32;

/// Plane rotations from QL sweeps. A sweep starting at `top` rotates the row
/// pairs `(top, top+1)`, `(top-1, top)`, ... in that order.
#[derive(Default)]
struct RotationQueue {
    sweeps: Vec<(usize, usize, usize)>,
    cs: Vec<(f64, f64)>,
}

impl RotationQueue {
    fn begin(&mut self, top: usize) {
        self.sweeps.push((top, self.cs.len(), self.cs.len()));
    }

    fn push(&mut self, c: f64, s: f64) {
        self.cs.push((c, s));
        if let Some(last) = self.sweeps.last_mut() {
            last.2 = self.cs.len();
        }
    }

    fn clear(&mut self) {
        self.sweeps.clear();
        self.cs.clear();
    }

    /// Applies every queued rotation to `panels` (see [`to_panels`]).
    fn apply(&self, panels: &mut [f64], n: usize) {
        for block in panels.chunks_exact_mut(n * PANEL) {
            for &(top, from, to) in &self.sweeps {
                if from == to {
                    continue;
                }
                let mut carry = [0.0f64; PANEL];
                carry.copy_from_slice(&block[(top + 1) * PANEL..(top + 2) * PANEL]);
                let mut i = top + 1;
                for &(c, s) in &self.cs[from..to] {
                    i -= 1;
                    let (lo, hi) = block.split_at_mut((i + 1) * PANEL);
                    let x: &[f64; PANEL] = lo[i * PANEL..].try_into().unwrap();
                    let out: &mut [f64; PANEL] = (&mut hi[..PANEL]).try_into().unwrap();
                    for k in 0..PANEL {
                        let (xk, ck) = (x[k], carry[k]);
                        out[k] = s * xk + c * ck;
                        carry[k] = c * xk - s * ck;
                    }
                }
                block[i * PANEL..(i + 1) * PANEL].copy_from_slice(&carry);
            }
        }
    }
}

/// Row-major `n×n` to column panels of width [`PANEL`], each panel stored
/// row-major and contiguous; the last panel is zero padded.
fn to_panels(z: &[f64], n: usize) -> Vec<f64> {
    let np = n.div_ceil(PANEL);
    let mut out = vec![0.0; np * n * PANEL];
    for r in 0..n {
        for c in 0..n {
            out[(c / PANEL) * n * PANEL + r * PANEL + c % PANEL] = z[r * n + c];
        }
    }
    out
}

fn from_panels(p: &[f64], n: usize, z: &mut [f64]) {
    for r in 0..n {
        for c in 0..n {
            z[r * n + c] = p[(c / PANEL) * n * PANEL + r * PANEL + c % PANEL];
        }
    }
}

/// Eigen-decomposition of the real symmetric `n×n` matrix `a` (row-major, both
/// triangles filled). Symmetry is the caller's responsibility.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize, want_vectors: bool) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
    }
    let (mut d, e0, hs) = tridiagonalize(&mut a, n);
    let mut e = vec![0.0; n];
    if n > 1 {
        e[..n - 1].copy_from_slice(&e0[1..n]);
    }
    if want_vectors {
        accumulate_transpose(&mut a, n, &hs);
        tql(&mut d, &mut e, Some(&mut a))?;
    } else {
        tql(&mut d, &mut e, None)?;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let vectors = if want_vectors {
        let mut v = vec![0.0; n * n];
        for (dst, &src) in order.iter().enumerate() {
            let row = &mut v[dst * n..(dst + 1) * n];
            row.copy_from_slice(&a[src * n..(src + 1) * n]);
            // Fix the sign so that the first entry of largest modulus is positive.
            let mut best = 0;
            for k in 1..n {
                if row[k].abs() > row[best].abs() * (1.0 + 1e-12) {
                    best = k;
                }
            }
            if row[best] < 0.0 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v
    } else {
        Vec::new()
    };
    Ok(SymmetricEigen { n, values, vectors })
}

/// Solves `a x = b` in place (`b` becomes `x`) by LU with partial pivoting.
/// `a` is row-major `n×n` and is overwritten.
pub fn lu_solve(a: &mut [C64], n: usize, b: &mut [C64]) -> Result<()> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let mut scale = 0.0f64;
    for z in a.iter() {
        scale = scale.max(z.norm());
    }
    let tiny = scale * 1e-14 * n as f64;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for r in col + 1..n {
            let v = a[r * n + col].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if !(best > tiny) {
            return Err(Error::ZeroPivot);
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let inv = a[col * n + col].inv();
        let (upper, lower) = a.split_at_mut((col + 1) * n);
        let prow = &upper[col * n..];
        for r in 0..n - col - 1 {
            let row = &mut lower[r * n..(r + 1) * n];
            let f = row[col] * inv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            row[col] = f;
            for k in col + 1..n {
                row[k] -= f * prow[k];
            }
            b[col + 1 + r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(())
}

/// Outcome of [`gmres`].
#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn cnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Restarted GMRES for `A x = b` with right preconditioning by `diag^{-1}`.
/// `apply(v, out)` must write `A v` into `out`.
pub fn gmres<F>(
    mut apply: F,
    diag: &[C64],
    b: &[C64],
    x0: Option<&[C64]>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<GmresOutcome>
where
    F: FnMut(&[C64], &mut [C64]),
{
    let n = b.len();
    if diag.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: diag.len() });
    }
    if diag.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::ZeroPivot);
    }
    let zero = C64::new(0.0, 0.0);
    let mut x = match x0 {
        Some(v) => v.to_vec(),
        None => vec![zero; n],
    };
    let bnorm = cnorm(b).max(f64::MIN_POSITIVE);
    let mut tmp = vec![zero; n];
    let mut w = vec![zero; n];
    let mut total = 0;
    let m = restart.max(1);
    loop {
        apply(&x, &mut tmp);
        let r: Vec<C64> = b.iter().zip(&tmp).map(|(bi, ai)| bi - ai).collect();
        let beta = cnorm(&r);
        if beta / bnorm <= tol {
            return Ok(GmresOutcome { x, iterations: total, relative_residual: beta / bnorm });
        }
        if total >= max_iter {
            return Err(Error::NoConvergence);
        }
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|z| z / beta).collect());
        let mut hmat = vec![vec![zero; m]; m + 1];
        let mut cs = vec![zero; m];
        let mut sn = vec![zero; m];
        let mut gvec = vec![zero; m + 1];
        gvec[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            for (t, (v, dk)) in tmp.iter_mut().zip(basis[k].iter().zip(diag)) {
                *t = v / dk;
            }
            apply(&tmp, &mut w);
            for (j, vj) in basis.iter().enumerate() {
                let h = cdot(vj, &w);
                hmat[j][k] = h;
                for (wi, vi) in w.iter_mut().zip(vj) {
                    *wi -= h * vi;
                }
            }
            let hn = cnorm(&w);
            hmat[k + 1][k] = C64::new(hn, 0.0);
            for j in 0..k {
                let t = cs[j].conj() * hmat[j][k] + sn[j].conj() * hmat[j + 1][k];
                hmat[j + 1][k] = -sn[j] * hmat[j][k] + cs[j] * hmat[j + 1][k];
                hmat[j][k] = t;
            }
            let (a, bb) = (hmat[k][k], hmat[k + 1][k]);
            let rr = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if rr == 0.0 {
                cs[k] = C64::new(1.0, 0.0);
                sn[k] = zero;
            } else {
                cs[k] = a / rr;
                sn[k] = bb / rr;
            }
            hmat[k][k] = C64::new(rr, 0.0);
            hmat[k + 1][k] = zero;
            gvec[k + 1] = -sn[k] * gvec[k];
            gvec[k] = cs[k].conj() * gvec[k];
            total += 1;
            k_used = k + 1;
            let res = gvec[k + 1].norm() / bnorm;
            if res <= tol * 0.5 || hn == 0.0 || total >= max_iter {
                break;
            }
            basis.push(w.iter().map(|z| z / hn).collect());
        }
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut s = gvec[i];
            for j in i + 1..k_used {
                s -= hmat[i][j] * y[j];
            }
            y[i] = s / hmat[i][i];
        }
        for i in 0..n {
            let mut acc = zero;
            for (j, yj) in y.iter().enumerate() {
                acc += basis[j][i] * yj;
            }
            x[i] += acc / diag[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    #[test]
    fn eigen_residual_and_orthogonality() {
        for &n in &[1usize, 2, 3, 7, 40, 97] {
            let a = random_symmetric(n, n as u64);
            let es = symmetric_eigen(a.clone(), n, true).unwrap();
            for j in 0..n {
                let v = es.vector(j);
                for r in 0..n {
                    let av = dot(&a[r * n..(r + 1) * n], v);
                    assert!((av - es.values[j] * v[r]).abs() < 1e-11, "n={n}");
                }
                for k in 0..n {
                    let g = dot(v, es.vector(k));
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12);
                }
            }
            for w in es.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
            let vals = symmetric_eigen(a, n, false).unwrap().values;
            for (x, y) in vals.iter().zip(&es.values) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_and_degenerate_inputs() {
        let n = 5;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = (n - i) as f64;
        }
        let es = symmetric_eigen(a, n, true).unwrap();
        assert_eq!(es.values, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let es = symmetric_eigen(vec![0.0; 16], 4, true).unwrap();
        assert!(es.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn lu_matches_known_solution() {
        let n = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<C64> = (0..n * n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let x: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut b: Vec<C64> = (0..n).map(|r| (0..n).map(|c| a[r * n + c] * x[c]).sum()).collect();
        let mut m = a.clone();
        lu_solve(&mut m, n, &mut b).unwrap();
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
        let mut singular = vec![C64::new(1.0, 0.0); 4];
        let mut rhs = vec![C64::new(1.0, 0.0); 2];
        assert_eq!(lu_solve(&mut singular, 2, &mut rhs), Err(Error::ZeroPivot));
    }

    #[test]
    fn gmres_solves_diagonally_dominant_system() {
        let n = 50;
        let apply = |v: &[C64], out: &mut [C64]| {
            for i in 0..n {
                let mut s = v[i] * C64::new(4.0, 1.0);
                if i > 0 {
                    s += v[i - 1];
                }
                if i + 1 < n {
                    s -= v[i + 1] * 0.5;
                }
                out[i] = s;
            }
        };
        let b: Vec<C64> = (0..n).map(|i| C64::new(1.0, i as f64 * 0.1)).collect();
        let diag = vec![C64::new(4.0, 1.0); n];
        let out = gmres(apply, &diag, &b, None, 1e-13, 20, 500).unwrap();
        let mut check = vec![C64::new(0.0, 0.0); n];
        apply(&out.x, &mut check);
        for (u, v) in check.iter().zip(&b) {
            assert!((u - v).norm() < 1e-11);
        }
    }
}
