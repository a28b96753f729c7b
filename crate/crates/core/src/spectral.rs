//! Functional calculus for finite complex matrices.
//!
//! A matrix is brought to Schur form, its eigenvalues are grouped into clusters
//! and the triangular factor is block-diagonalised, so that
//! `M = sum_j R_j T_j L_j` with `L_j R_k = delta_jk`. Functions of `M` are then
//! evaluated cluster by cluster with a Taylor series about the cluster centre.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Default clustering tolerance for well separated spectra.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMat,
    mode_labels: Option<Vec<i64>>,
}

impl OperatorMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "operator matrix must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("operator matrix has non-finite entries".into()));
        }
        Ok(Self { entries, mode_labels: None })
    }

    pub fn with_labels(entries: CMat, labels: Vec<i64>) -> Result<Self> {
        let mut op = Self::new(entries)?;
        if labels.len() != op.dim() {
            return Err(Error::InvalidInput("mode label count differs from dimension".into()));
        }
        op.mode_labels = Some(labels);
        Ok(op)
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        Self::new(CMat::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: CMat::identity(dim, dim), mode_labels: None }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn mode_labels(&self) -> Option<&[i64]> {
        self.mode_labels.as_deref()
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Cut ray `{arg z = theta}` for complex powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySpec {
    pub theta: f64,
}

impl RaySpec {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 2.0 * PI) {
            return Err(Error::InvalidInput(format!("ray angle {theta} not in (0, 2pi)")));
        }
        Ok(Self { theta })
    }

    /// Argument of `z` in `(theta - 2pi, theta)`.
    pub fn arg(&self, z: C64) -> f64 {
        let mut a = z.im.atan2(z.re);
        while a >= self.theta {
            a -= 2.0 * PI;
        }
        while a < self.theta - 2.0 * PI {
            a += 2.0 * PI;
        }
        a
    }

    pub fn log(&self, z: C64) -> C64 {
        C64::new(z.norm().ln(), self.arg(z))
    }

    pub fn pow(&self, z: C64, s: C64) -> C64 {
        (s * self.log(z)).exp()
    }

    pub fn distance_to_ray(&self, z: C64) -> f64 {
        let dir = C64::from_polar(1.0, self.theta);
        let proj = (z * dir.conj()).re;
        if proj <= 0.0 {
            z.norm()
        } else {
            (z - dir * proj).norm()
        }
    }
}

impl Default for RaySpec {
    fn default() -> Self {
        Self { theta: PI }
    }
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub center: C64,
    pub multiplicity: usize,
    /// Right basis of the invariant subspace, `dim x m`.
    pub basis: CMat,
    /// Left coordinates, `m x dim`, with `left * basis = I`.
    pub left: CMat,
    /// Upper triangular restriction of the operator, `m x m`.
    pub block: CMat,
    pub nilpotency_degree: usize,
    pub eigenvalues: Vec<C64>,
}

impl Cluster {
    pub fn projector(&self) -> CMat {
        &self.basis * &self.left
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub clusters: Vec<Cluster>,
    pub cluster_tol: f64,
    dim: usize,
    norm: f64,
}

pub fn schur_clusters(m: &OperatorMatrix, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if !(cluster_tol > 0.0) {
        return Err(Error::InvalidInput("cluster_tol must be positive".into()));
    }
    let n = m.dim();
    let norm = m.norm();
    let (q, mut t) = if is_upper_triangular(m.entries()) {
        (CMat::identity(n, n), m.entries().clone())
    } else {
        m.entries()
            .clone()
            .try_schur(f64::EPSILON, 200 * n.max(10))
            .ok_or(Error::FailsToConverge)?
            .unpack()
    };
    let mut q = q;
    let eig: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    // single-linkage clustering
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let nx = p[c];
            p[c] = r;
            c = nx;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eig[i] - eig[j]).norm() <= cluster_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if roots[i] != roots[j] && (eig[i] - eig[j]).norm() <= 2.0 * cluster_tol {
                return Err(Error::AmbiguousClustering(eig[i].to_string(), eig[j].to_string()));
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        match groups.iter_mut().find(|g| g.0 == roots[i]) {
            Some(g) => g.1.push(i),
            None => groups.push((roots[i], vec![i])),
        }
    }
    let mut centers: Vec<(C64, Vec<usize>)> = groups
        .into_iter()
        .map(|(_, idx)| {
            let c = idx.iter().map(|&i| eig[i]).sum::<C64>() / idx.len() as f64;
            (c, idx)
        })
        .collect();
    centers.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap()
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    let mut label = vec![0usize; n];
    for (ci, (_, idx)) in centers.iter().enumerate() {
        for &i in idx {
            label[i] = ci;
        }
    }

    // bubble the diagonal into cluster order with adjacent Givens swaps
    let mut swapped = true;
    while swapped {
        swapped = false;
        for k in 0..n.saturating_sub(1) {
            if label[k] > label[k + 1] {
                swap_adjacent(&mut t, &mut q, k);
                label.swap(k, k + 1);
                swapped = true;
            }
        }
    }

    // block diagonalisation by triangular Sylvester solves
    let mut r = q.clone();
    let mut l = q.adjoint();
    let mut starts = Vec::with_capacity(centers.len());
    let mut pos = 0;
    for (_, idx) in &centers {
        starts.push((pos, idx.len()));
        pos += idx.len();
    }
    for &(r0, mm) in &starts {
        let rest = n - r0 - mm;
        if rest == 0 {
            continue;
        }
        let t11 = t.view((r0, r0), (mm, mm)).clone_owned();
        let t22 = t.view((r0 + mm, r0 + mm), (rest, rest)).clone_owned();
        let c = -t.view((r0, r0 + mm), (mm, rest)).clone_owned();
        let x = solve_triangular_sylvester(&t11, &t22, &c);
        let rx = r.view((0, r0), (n, mm)) * &x;
        let mut rv = r.view_mut((0, r0 + mm), (n, rest));
        rv += rx;
        let xl = &x * l.view((r0 + mm, 0), (rest, n));
        let mut lv = l.view_mut((r0, 0), (mm, n));
        lv -= xl;
        t.view_mut((r0, r0 + mm), (mm, rest)).fill(ZERO);
    }

    let scale = norm.max(1.0);
    let clusters = starts
        .iter()
        .zip(centers.iter())
        .map(|(&(r0, mm), (c, _))| {
            let block = t.view((r0, r0), (mm, mm)).clone_owned();
            let eigenvalues: Vec<C64> = (0..mm).map(|i| block[(i, i)]).collect();
            let nmat = &block - CMat::identity(mm, mm) * *c;
            let mut power = nmat.clone();
            let mut degree = 1;
            while power.norm() > 1e-8 * scale.powi(degree as i32) && degree < mm.max(1) + 1 {
                power = &power * &nmat;
                degree += 1;
            }
            Cluster {
                center: *c,
                multiplicity: mm,
                basis: r.view((0, r0), (n, mm)).clone_owned(),
                left: l.view((r0, 0), (mm, n)).clone_owned(),
                block,
                nilpotency_degree: degree,
                eigenvalues,
            }
        })
        .collect();
    Ok(SpectralDecomposition { clusters, cluster_tol, dim: n, norm })
}

fn is_upper_triangular(m: &CMat) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (j + 1..n).all(|i| m[(i, j)] == ZERO))
}

fn swap_adjacent(t: &mut CMat, q: &mut CMat, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let c = t[(k, k + 1)];
    let v0 = c;
    let v1 = b - a;
    let rr = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    if rr == 0.0 {
        return;
    }
    let (cs, sn) = (v0 / rr, v1 / rr);
    // G = [[cs, -conj(sn)], [sn, conj(cs)]]
    for j in 0..n {
        let x = t[(k, j)];
        let y = t[(k + 1, j)];
        t[(k, j)] = cs.conj() * x + sn.conj() * y;
        t[(k + 1, j)] = -sn * x + cs * y;
    }
    for i in 0..n {
        let x = t[(i, k)];
        let y = t[(i, k + 1)];
        t[(i, k)] = x * cs + y * sn;
        t[(i, k + 1)] = -x * sn.conj() + y * cs.conj();
        let x = q[(i, k)];
        let y = q[(i, k + 1)];
        q[(i, k)] = x * cs + y * sn;
        q[(i, k + 1)] = -x * sn.conj() + y * cs.conj();
    }
    t[(k + 1, k)] = ZERO;
}

/// Solves `T11 X - X T22 = C` for upper triangular `T11`, `T22`.
fn solve_triangular_sylvester(t11: &CMat, t22: &CMat, c: &CMat) -> CMat {
    let m = t11.nrows();
    let r = t22.nrows();
    let mut x = CMat::zeros(m, r);
    for j in 0..r {
        let mut rhs: Vec<C64> = (0..m).map(|i| c[(i, j)]).collect();
        for p in 0..j {
            let w = t22[(p, j)];
            if w != ZERO {
                for i in 0..m {
                    rhs[i] += x[(i, p)] * w;
                }
            }
        }
        let mu = t22[(j, j)];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for p in (i + 1)..m {
                s -= t11[(i, p)] * x[(p, j)];
            }
            x[(i, j)] = s / (t11[(i, i)] - mu);
        }
    }
    x
}

/// Evaluates `sum_k coeffs[k] N^k` with `N = block - center`, taking as many
/// terms as needed for the powers of `N` to become negligible.
fn taylor_block(block: &CMat, center: C64, coeffs: &dyn Fn(usize) -> Vec<C64>) -> CMat {
    let m = block.nrows();
    let nmat = block - CMat::identity(m, m) * center;
    let scale = block.norm().max(1.0);
    let mut powers = vec![CMat::identity(m, m)];
    if nmat.norm() > 0.0 {
        let mut p = nmat.clone();
        while powers.len() < 64 {
            let pn = p.norm();
            if pn <= 1e-18 * scale.powi(powers.len() as i32) || pn == 0.0 {
                break;
            }
            powers.push(p.clone());
            p = &p * &nmat;
        }
    }
    let a = coeffs(powers.len() - 1);
    let mut out = CMat::zeros(m, m);
    for (k, pk) in powers.iter().enumerate() {
        out += pk * a[k];
    }
    out
}

/// Taylor coefficients of `z^s` (branch from `ray`) about `c`.
pub fn power_taylor(ray: RaySpec, s: C64, c: C64, kmax: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut binom = ONE;
    for k in 0..=kmax {
        if k > 0 {
            binom *= (s - (k - 1) as f64) / k as f64;
        }
        out.push(binom * ray.pow(c, s - k as f64));
    }
    out
}

/// Taylor coefficients of `exp(alpha z)` about `c`.
pub fn exp_taylor(alpha: C64, c: C64, kmax: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut term = (alpha * c).exp();
    for k in 0..=kmax {
        if k > 0 {
            term *= alpha / k as f64;
        }
        out.push(term);
    }
    out
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operator_norm_scale(&self) -> f64 {
        self.norm
    }

    /// Index of the cluster at zero, if any.
    pub fn zero_cluster(&self) -> Result<Option<usize>> {
        let tol = self.cluster_tol;
        let mut found = None;
        for (j, c) in self.clusters.iter().enumerate() {
            let min_abs = c.eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
            if min_abs <= tol {
                if c.center.norm() > tol {
                    return Err(Error::ZeroNotIsolated(format!(
                        "cluster centred at {} reaches zero",
                        c.center
                    )));
                }
                found = Some(j);
            } else if min_abs <= 2.0 * tol {
                return Err(Error::ZeroNotIsolated(format!("eigenvalue within 2*tol of zero in cluster {}", c.center)));
            }
        }
        Ok(found)
    }

    /// `sum_j R_j f_j(T_j) L_j` over the clusters for which `f` returns Taylor data.
    /// `f(j, kmax)` returns `(expansion point, coefficients up to kmax)`.
    pub fn apply(&self, f: &dyn Fn(usize, usize) -> Option<(C64, Vec<C64>)>) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (j, c) in self.clusters.iter().enumerate() {
            if let Some(b) = self.block_fn(j, f) {
                out += &c.basis * b * &c.left;
            }
        }
        out
    }

    fn block_fn(&self, j: usize, f: &dyn Fn(usize, usize) -> Option<(C64, Vec<C64>)>) -> Option<CMat> {
        let probe = f(j, 0)?;
        let center = probe.0;
        let c = &self.clusters[j];
        Some(taylor_block(&c.block, center, &|kmax| f(j, kmax).unwrap().1))
    }

    /// Trace of `sum_j W_j f(T_j)` where `W_j` are per-cluster weights in the
    /// block coordinates (identity when `weights` is `None`).
    pub fn trace_apply(
        &self,
        weights: Option<&[CMat]>,
        f: &dyn Fn(usize, usize) -> Option<(C64, Vec<C64>)>,
    ) -> C64 {
        let mut tr = ZERO;
        for j in 0..self.clusters.len() {
            if let Some(b) = self.block_fn(j, f) {
                tr += match weights {
                    Some(w) => (&w[j] * b).trace(),
                    None => b.trace(),
                };
            }
        }
        tr
    }

    /// Block coordinates `L_j A R_j` of an operator commuting with the decomposed one.
    pub fn restrict(&self, a: &CMat) -> Vec<CMat> {
        self.clusters.iter().map(|c| &c.left * a * &c.basis).collect()
    }

    pub fn projector_onto(&self, select: &dyn Fn(usize, &Cluster) -> bool) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (j, c) in self.clusters.iter().enumerate() {
            if select(j, c) {
                out += c.projector();
            }
        }
        out
    }

    /// Checks that no nonzero eigenvalue lies on the ray.
    pub fn check_ray(&self, ray: RaySpec, zero: Option<usize>) -> Result<()> {
        for (j, c) in self.clusters.iter().enumerate() {
            if Some(j) == zero {
                continue;
            }
            for z in &c.eigenvalues {
                if ray.distance_to_ray(*z) <= self.cluster_tol.max(1e-14 * z.norm()) {
                    return Err(Error::EigenvalueOnRay(z.to_string()));
                }
            }
        }
        Ok(())
    }

    /// `Delta_theta^s = (M + p0)^s (1 - p0)` from this decomposition.
    pub fn power(&self, s: C64, ray: RaySpec) -> Result<CMat> {
        let zero = self.zero_cluster()?;
        self.check_ray(ray, zero)?;
        let centers: Vec<C64> = self.clusters.iter().map(|c| c.center).collect();
        Ok(self.apply(&|j, kmax| {
            if Some(j) == zero {
                None
            } else {
                Some((centers[j], power_taylor(ray, s, centers[j], kmax)))
            }
        }))
    }
}

pub fn generalized_kernel_projector(m: &OperatorMatrix, cluster_tol: f64) -> Result<OperatorMatrix> {
    let dec = schur_clusters(m, cluster_tol)?;
    let zero = dec.zero_cluster()?;
    let p = match zero {
        Some(j) => dec.clusters[j].projector(),
        None => CMat::zeros(m.dim(), m.dim()),
    };
    OperatorMatrix::new(p)
}

pub fn complex_power(m: &OperatorMatrix, s: C64, ray: RaySpec, cluster_tol: f64) -> Result<OperatorMatrix> {
    let dec = schur_clusters(m, cluster_tol)?;
    OperatorMatrix::new(dec.power(s, ray)?)
}

#[derive(Debug, Clone)]
pub struct FrequencyProjectors {
    pub p_gt: OperatorMatrix,
    pub p_lt: OperatorMatrix,
    pub p_0: OperatorMatrix,
}

impl FrequencyProjectors {
    pub fn p_ge(&self) -> CMat {
        self.p_gt.entries() + self.p_0.entries()
    }

    /// `p_> - p_<`
    pub fn sign(&self) -> CMat {
        self.p_gt.entries() - self.p_lt.entries()
    }
}

/// `p_> = (1 - p0 + Delta^{-1/2} D)/2` and `p_< = (1 - p0 - Delta^{-1/2} D)/2`
/// with `Delta = D^2`.
pub fn frequency_projectors(d: &OperatorMatrix, ray: RaySpec, cluster_tol: f64) -> Result<FrequencyProjectors> {
    let n = d.dim();
    let delta = OperatorMatrix::new(d.entries() * d.entries())?;
    let dec = schur_clusters(&delta, cluster_tol)?;
    let zero = dec.zero_cluster()?;
    let p0 = match zero {
        Some(j) => dec.clusters[j].projector(),
        None => CMat::zeros(n, n),
    };
    let inv_sqrt = dec.power(C64::new(-0.5, 0.0), ray)?;
    let s = inv_sqrt * d.entries();
    let base = CMat::identity(n, n) - &p0;
    let p_gt = (&base + &s) * C64::new(0.5, 0.0);
    let p_lt = (&base - &s) * C64::new(0.5, 0.0);
    Ok(FrequencyProjectors {
        p_gt: OperatorMatrix::new(p_gt)?,
        p_lt: OperatorMatrix::new(p_lt)?,
        p_0: OperatorMatrix::new(p0)?,
    })
}

/// Which side of the frequency split a cluster of `D` belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Positive,
    Negative,
    Zero,
}

/// Classifies an eigenvalue `lambda` of `D` by whether the branch square root
/// of `lambda^2` returns `lambda` or `-lambda`.
pub fn classify(lambda: C64, ray: RaySpec, tol: f64) -> Frequency {
    if lambda.norm() <= tol {
        return Frequency::Zero;
    }
    let root = ray.pow(lambda * lambda, C64::new(0.5, 0.0));
    if (root - lambda).norm() <= (root + lambda).norm() {
        Frequency::Positive
    } else {
        Frequency::Negative
    }
}

/// Frequency projectors read off the cluster decomposition of `D` itself.
pub fn frequency_projectors_by_sign(
    d: &OperatorMatrix,
    ray: RaySpec,
    cluster_tol: f64,
) -> Result<FrequencyProjectors> {
    let dec = schur_clusters(d, cluster_tol)?;
    let zero = dec.zero_cluster()?;
    let class = |j: usize, c: &Cluster| {
        if Some(j) == zero {
            Frequency::Zero
        } else {
            classify(c.center, ray, 0.0)
        }
    };
    Ok(FrequencyProjectors {
        p_gt: OperatorMatrix::new(dec.projector_onto(&|j, c| class(j, c) == Frequency::Positive))?,
        p_lt: OperatorMatrix::new(dec.projector_onto(&|j, c| class(j, c) == Frequency::Negative))?,
        p_0: OperatorMatrix::new(dec.projector_onto(&|j, c| class(j, c) == Frequency::Zero))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralWarning {
    /// `Im t < 0`: finite dimension keeps this bounded, but the growth is not a semigroup bound.
    LowerHalfPlane,
}

/// `exp(i t M_sqrt)`.
pub fn semigroup(m_sqrt: &OperatorMatrix, t: C64) -> Result<(OperatorMatrix, Option<SpectralWarning>)> {
    let warning = if t.im < 0.0 { Some(SpectralWarning::LowerHalfPlane) } else { None };
    let a = m_sqrt.entries() * (C64::i() * t);
    let e = if a.iter().all(|z| *z == ZERO) {
        CMat::identity(m_sqrt.dim(), m_sqrt.dim())
    } else {
        a.exp()
    };
    Ok((OperatorMatrix::new(e)?, warning))
}

/// Constant `C` of the strip bound: `Re mu >= -C` and `|Im mu| <= C` for all
/// eigenvalues `mu` of the given square root.
pub fn strip_constant(m_sqrt: &OperatorMatrix, cluster_tol: f64) -> Result<f64> {
    let dec = schur_clusters(m_sqrt, cluster_tol)?;
    Ok(dec
        .clusters
        .iter()
        .flat_map(|c| c.eigenvalues.iter())
        .map(|z| (-z.re).max(z.im.abs()).max(0.0))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_clusters() {
        let m = OperatorMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let d = schur_clusters(&m, 1e-8).unwrap();
        assert_eq!(d.clusters.len(), 3);
        assert!(d.clusters.iter().all(|c| c.multiplicity == 1 && c.nilpotency_degree == 1));
    }

    #[test]
    fn jordan_block_cluster() {
        let m = OperatorMatrix::new(CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])).unwrap();
        let d = schur_clusters(&m, 1e-8).unwrap();
        assert_eq!(d.clusters.len(), 1);
        assert_eq!(d.clusters[0].multiplicity, 2);
        assert_eq!(d.clusters[0].nilpotency_degree, 2);
        let p = generalized_kernel_projector(&m, 1e-8).unwrap();
        assert!((p.entries() - CMat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn ambiguous_clustering_is_reported() {
        let m = OperatorMatrix::from_real_diagonal(&[0.0, 1.5e-8]).unwrap();
        assert!(matches!(schur_clusters(&m, 1e-8), Err(Error::AmbiguousClustering(..))));
    }

    #[test]
    fn power_examples() {
        let ray = RaySpec::default();
        let m = OperatorMatrix::from_real_diagonal(&[4.0]).unwrap();
        let r = complex_power(&m, c(0.5, 0.0), ray, 1e-8).unwrap();
        assert!((r.entries()[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);
        let m = OperatorMatrix::from_real_diagonal(&[0.0, 9.0]).unwrap();
        let r = complex_power(&m, c(-0.5, 0.0), ray, 1e-8).unwrap();
        assert!(r.entries()[(0, 0)].norm() < 1e-15);
        assert!((r.entries()[(1, 1)] - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
        let m = OperatorMatrix::from_diagonal(&[c(0.0, 2.0)]).unwrap();
        let r = complex_power(&m, c(0.5, 0.0), ray, 1e-8).unwrap();
        assert!((r.entries()[(0, 0)] - c(1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvalue_on_ray_is_an_error() {
        let m = OperatorMatrix::from_real_diagonal(&[-4.0, 1.0]).unwrap();
        let r = complex_power(&m, c(0.5, 0.0), RaySpec::default(), 1e-8);
        assert!(matches!(r, Err(Error::EigenvalueOnRay(_))));
    }

    #[test]
    fn frequency_projector_examples() {
        let ray = RaySpec::default();
        let d = OperatorMatrix::from_real_diagonal(&[3.0, -2.0, 0.0]).unwrap();
        let f = frequency_projectors(&d, ray, 1e-8).unwrap();
        let diag = |m: &OperatorMatrix| (0..3).map(|i| m.entries()[(i, i)].re).collect::<Vec<_>>();
        assert_eq!(diag(&f.p_gt), vec![1.0, 0.0, 0.0]);
        assert_eq!(diag(&f.p_lt), vec![0.0, 1.0, 0.0]);
        assert_eq!(diag(&f.p_0), vec![0.0, 0.0, 1.0]);

        let d = OperatorMatrix::from_diagonal(&[c(1.0, 1.0)]).unwrap();
        let f = frequency_projectors(&d, ray, 1e-8).unwrap();
        assert!((f.p_gt.entries()[(0, 0)] - ONE).norm() < 1e-14);
        assert!(f.p_lt.entries()[(0, 0)].norm() < 1e-14);

        let d = OperatorMatrix::from_real_diagonal(&[-1.75, -0.75, 0.25, 1.25, 2.25]).unwrap();
        let f = frequency_projectors(&d, ray, 1e-8).unwrap();
        for i in 0..5 {
            let want = if i >= 2 { 1.0 } else { 0.0 };
            assert!((f.p_gt.entries()[(i, i)].re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn semigroup_examples() {
        let m = OperatorMatrix::from_real_diagonal(&[2.0]).unwrap();
        let (e, _) = semigroup(&m, c(PI / 2.0, 0.0)).unwrap();
        assert!((e.entries()[(0, 0)] + ONE).norm() < 1e-14);
        let (e, _) = semigroup(&m, c(0.0, 1.0)).unwrap();
        assert!((e.entries()[(0, 0)].re - (-2f64).exp()).abs() < 1e-15);
        let z = OperatorMatrix::new(CMat::zeros(2, 2)).unwrap();
        let (e, w) = semigroup(&z, c(3.0, 0.0)).unwrap();
        assert!((e.entries() - CMat::identity(2, 2)).norm() == 0.0);
        assert!(w.is_none());
    }

    #[test]
    fn contour_oracle_for_kernel_projector() {
        // S diag(0,3,5) S^-1
        let s = CMat::from_row_slice(
            3,
            3,
            &[c(1.0, 0.2), c(0.3, 0.0), c(-0.2, 0.1), c(0.1, 0.0), c(1.2, -0.1), c(0.4, 0.0), c(0.0, 0.3), c(-0.3, 0.0), c(0.9, 0.0)],
        );
        let si = s.clone().try_inverse().unwrap();
        let m = &s * CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0., 0.), c(3., 0.), c(5., 0.)])) * &si;
        let p = generalized_kernel_projector(&OperatorMatrix::new(m.clone()).unwrap(), 1e-8).unwrap();
        let expect = &s * CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, c(0., 0.), c(0., 0.)])) * &si;
        assert!((p.entries() - &expect).norm() < 1e-12);
        // (1/2 pi i) \oint (lambda - M)^{-1} d lambda over |lambda| = 1, 64 nodes
        let nodes = 64;
        let mut acc = CMat::zeros(3, 3);
        for k in 0..nodes {
            let w = C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
            let res = (CMat::identity(3, 3) * w - &m).try_inverse().unwrap();
            acc += res * (w / nodes as f64);
        }
        assert!((acc - expect).norm() < 1e-10);
    }
}
