//! Truncated multivariate Taylor polynomials ("jets") with scalar or matrix
//! coefficients. Monomials are ordered by total degree, so the basis of
//! degree `d` is a prefix of the basis of any higher degree.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;

#[derive(Debug)]
pub struct Basis {
    pub n: usize,
    pub d: usize,
    pub exps: Vec<Vec<u32>>,
    pub deg: Vec<usize>,
    /// `(i, j, k)` with `exps[i] + exps[j] = exps[k]`, sorted by `deg[k]`.
    mul: Vec<(usize, usize, usize)>,
    /// `shift[i][b]`: index of `exps[b] + e_i` when its degree is `<= d`.
    shift: Vec<Vec<Option<usize>>>,
}

fn monomials(n: usize, deg: usize) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![deg as u32]];
    }
    let mut out = Vec::new();
    for first in (0..=deg).rev() {
        for mut rest in monomials(n - 1, deg - first) {
            rest.insert(0, first as u32);
            out.push(rest);
        }
    }
    out
}

impl Basis {
    fn build(n: usize, d: usize) -> Self {
        let mut exps = Vec::new();
        let mut deg = Vec::new();
        for k in 0..=d {
            for e in monomials(n, k) {
                exps.push(e);
                deg.push(k);
            }
        }
        let index: HashMap<Vec<u32>, usize> = exps.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let mut mul = Vec::new();
        for i in 0..exps.len() {
            for j in 0..exps.len() {
                if deg[i] + deg[j] > d {
                    continue;
                }
                let s: Vec<u32> = exps[i].iter().zip(&exps[j]).map(|(a, b)| a + b).collect();
                mul.push((i, j, index[&s]));
            }
        }
        mul.sort_by_key(|&(_, _, k)| (deg[k], k));
        let shift = (0..n)
            .map(|i| {
                exps.iter()
                    .map(|e| {
                        let mut up = e.clone();
                        up[i] += 1;
                        index.get(&up).copied()
                    })
                    .collect()
            })
            .collect();
        Self { n, d, exps, deg, mul, shift }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Number of monomials of degree at most `d`.
    pub fn count(&self, d: usize) -> usize {
        self.deg.partition_point(|&k| k <= d)
    }
}

pub fn basis(n: usize, d: usize) -> Arc<Basis> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut g = cache.lock().expect("basis cache poisoned");
    g.entry((n, d)).or_insert_with(|| Arc::new(Basis::build(n, d))).clone()
}

pub trait Coef: Clone {
    fn zero_like(&self) -> Self;
    fn add_mul(&mut self, a: &Self, b: &Self);
    fn add_scaled(&mut self, a: &Self, s: C64);
    fn scaled(&self, s: C64) -> Self;
    fn is_zero(&self) -> bool;
    fn norm(&self) -> f64;
}

impl Coef for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn add_scaled(&mut self, a: &Self, s: C64) {
        *self += a * s;
    }
    fn scaled(&self, s: C64) -> Self {
        self * s
    }
    fn is_zero(&self) -> bool {
        *self == C64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        C64::norm(*self)
    }
}

impl Coef for CMat {
    fn zero_like(&self) -> Self {
        CMat::zeros(self.nrows(), self.ncols())
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        self.gemm(C64::new(1.0, 0.0), a, b, C64::new(1.0, 0.0));
    }
    fn add_scaled(&mut self, a: &Self, s: C64) {
        self.zip_apply(a, |x, y| *x += y * s);
    }
    fn scaled(&self, s: C64) -> Self {
        self * s
    }
    fn is_zero(&self) -> bool {
        self.iter().all(|v| *v == C64::new(0.0, 0.0))
    }
    fn norm(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone)]
pub struct Jet<T> {
    pub basis: Arc<Basis>,
    pub c: Vec<T>,
}

pub type SJet = Jet<C64>;
pub type MJet = Jet<CMat>;

impl<T: Coef> Jet<T> {
    pub fn constant(n: usize, d: usize, v: T) -> Self {
        let basis = basis(n, d);
        let z = v.zero_like();
        let mut c = vec![z; basis.len()];
        c[0] = v;
        Self { basis, c }
    }

    pub fn degree(&self) -> usize {
        self.basis.d
    }

    pub fn value(&self) -> &T {
        &self.c[0]
    }

    pub fn zero_like(&self) -> Self {
        let z = self.c[0].zero_like();
        Self { basis: self.basis.clone(), c: vec![z; self.c.len()] }
    }

    pub fn truncate(&self, d: usize) -> Self {
        let b = basis(self.basis.n, d);
        assert!(d <= self.basis.d, "cannot raise the degree of a jet");
        Self { c: self.c[..b.len()].to_vec(), basis: b }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(o, C64::new(1.0, 0.0));
        out
    }

    pub fn add_assign(&mut self, o: &Self, s: C64) {
        let m = self.c.len().min(o.c.len());
        for i in 0..m {
            if !o.c[i].is_zero() {
                self.c[i].add_scaled(&o.c[i], s);
            }
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { basis: self.basis.clone(), c: self.c.iter().map(|v| v.scaled(s)).collect() }
    }

    /// `f(s h)` as a jet in `h`.
    pub fn rescale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for (v, &k) in out.c.iter_mut().zip(&self.basis.deg) {
            if k > 0 {
                *v = v.scaled(C64::new(s.powi(k as i32), 0.0));
            }
        }
        out
    }

    /// Truncated product; the degree is the smaller of the two.
    pub fn mul(&self, o: &Self) -> Self {
        let d = self.degree().min(o.degree());
        let b = basis(self.basis.n, d);
        let z = self.c[0].zero_like();
        let mut c = vec![z; b.len()];
        let nz_a: Vec<bool> = self.c[..b.len()].iter().map(|v| !v.is_zero()).collect();
        let nz_b: Vec<bool> = o.c[..b.len()].iter().map(|v| !v.is_zero()).collect();
        for &(i, j, k) in &b.mul {
            if nz_a[i] && nz_b[j] {
                c[k].add_mul(&self.c[i], &o.c[j]);
            }
        }
        Self { basis: b, c }
    }

    /// `d/dh_i`; the result has one degree less.
    pub fn deriv(&self, i: usize) -> Self {
        let d = self.degree();
        assert!(d > 0, "derivative of a degree-0 jet");
        let b = basis(self.basis.n, d - 1);
        let c = (0..b.len())
            .map(|m| {
                let up = self.basis.shift[i][m].expect("shifted monomial is in the basis");
                let f = self.basis.exps[up][i] as f64;
                self.c[up].scaled(C64::new(f, 0.0))
            })
            .collect();
        Self { basis: b, c }
    }

    /// Part of total degree exactly `k`, as a jet of the same degree.
    pub fn homogeneous(&self, k: usize) -> Self {
        let mut out = self.zero_like();
        for (m, &deg) in self.basis.deg.iter().enumerate() {
            if deg == k {
                out.c[m] = self.c[m].clone();
            }
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.c.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Evaluates the polynomial at the displacement `h`.
    pub fn eval(&self, h: &[f64]) -> T {
        let mut acc = self.c[0].zero_like();
        for (m, e) in self.basis.exps.iter().enumerate() {
            let mut w = 1.0;
            for (x, p) in h.iter().zip(e) {
                w *= x.powi(*p as i32);
            }
            acc.add_scaled(&self.c[m], C64::new(w, 0.0));
        }
        acc
    }
}

impl SJet {
    /// `x_i` as a jet in `h`, i.e. `x_i + h_i`.
    pub fn coordinate(n: usize, d: usize, i: usize, x: f64) -> Self {
        let mut j = Self::constant(n, d, C64::new(x, 0.0));
        if d > 0 {
            let k = j.basis.shift[i][0].expect("linear monomial");
            j.c[k] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn exp(&self) -> Self {
        let e0 = self.c[0].exp();
        let mut g = self.clone();
        g.c[0] = C64::new(0.0, 0.0);
        let mut term = Self::constant(self.basis.n, self.degree(), C64::new(1.0, 0.0));
        let mut acc = term.clone();
        for m in 1..=self.degree() {
            term = term.mul(&g).scale(C64::new(1.0 / m as f64, 0.0));
            acc.add_assign(&term, C64::new(1.0, 0.0));
        }
        acc.scale(e0)
    }

    /// `self * I` with `I` the identity of the given size.
    pub fn to_matrix(&self, rank: usize) -> MJet {
        MJet { basis: self.basis.clone(), c: self.c.iter().map(|v| CMat::identity(rank, rank) * *v).collect() }
    }
}

impl MJet {
    /// Product with a scalar jet.
    pub fn mul_scalar(&self, s: &SJet) -> Self {
        let d = self.degree().min(s.degree());
        let b = basis(self.basis.n, d);
        let z = self.c[0].zero_like();
        let mut c = vec![z; b.len()];
        for &(i, j, k) in &b.mul {
            if s.c[i] != C64::new(0.0, 0.0) && !self.c[j].is_zero() {
                c[k].add_scaled(&self.c[j], s.c[i]);
            }
        }
        Self { basis: b, c }
    }

    pub fn trace(&self) -> SJet {
        SJet { basis: self.basis.clone(), c: self.c.iter().map(|m| m.trace()).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_prefix_property() {
        let b3 = basis(2, 3);
        let b5 = basis(2, 5);
        assert_eq!(&b5.exps[..b3.len()], &b3.exps[..]);
        assert_eq!(b5.count(3), b3.len());
        assert_eq!(b3.len(), 10);
    }

    #[test]
    fn exp_and_product_match_pointwise() {
        let x = SJet::coordinate(2, 8, 0, 0.3);
        let y = SJet::coordinate(2, 8, 1, -0.2);
        let f = x.mul(&y).scale(C64::new(0.0, 1.0)).exp();
        let h = [0.01, -0.02];
        let want = (C64::new(0.0, 1.0) * (0.31 * -0.22)).exp();
        assert!((f.eval(&h) - want).norm() < 1e-14);
        let g = f.deriv(1);
        let want_d = C64::new(0.0, 1.0) * 0.31 * want;
        assert!((g.eval(&h) - want_d).norm() < 1e-12);
    }
}
