//! Product-case Feynman, retarded and advanced kernels.
//!
//! The unit normal acts on mode coordinates as `nslash = i * I`, the
//! off-diagonal block of the intertwiner `[[0, i], [i, 0]]` on the doubled
//! spinor space. It squares to `-1`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::series::Series;
use crate::spectral::{
    exp_taylor, frequency_projectors, schur_clusters, CMat, FrequencyProjectors, OperatorMatrix, RaySpec,
    SpectralDecomposition,
};

const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn clifford_normal(dim: usize) -> CMat {
    CMat::identity(dim, dim) * I
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `k(t)` for a Laplace-type base operator.
    FeynmanWave,
    /// `k_D(t)` for a Dirac-type base operator.
    FeynmanDirac,
    Retarded,
    Advanced,
    /// `k_D - (k_ret + k_adv)/2`.
    RegularizedDiff,
}

#[derive(Debug, Clone)]
pub struct KernelFamily {
    pub kind: KernelKind,
    pub base: OperatorMatrix,
    pub ray: RaySpec,
    dec: SpectralDecomposition,
    zero: Option<usize>,
    proj: Option<FrequencyProjectors>,
}

impl KernelFamily {
    pub fn new(kind: KernelKind, base: OperatorMatrix, ray: RaySpec, cluster_tol: f64) -> Result<Self> {
        let dec = schur_clusters(&base, cluster_tol)?;
        let zero = dec.zero_cluster()?;
        let proj = match kind {
            KernelKind::FeynmanWave => {
                dec.check_ray(ray, zero)?;
                None
            }
            _ => Some(frequency_projectors(&base, ray, cluster_tol)?),
        };
        Ok(Self { kind, base, ray, dec, zero, proj })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn projectors(&self) -> Option<&FrequencyProjectors> {
        self.proj.as_ref()
    }

    /// `exp(-i t B)` for the base operator `B`.
    pub fn propagate(&self, t: f64) -> CMat {
        let alpha = -I * t;
        let centers: Vec<C64> = self.dec.clusters.iter().map(|c| c.center).collect();
        self.dec.apply(&|j, kmax| Some((centers[j], exp_taylor(alpha, centers[j], kmax))))
    }

    /// Kernel at `t` with the closed indicator conventions: at `t = 0` both
    /// `chi_[0,inf)` and `chi_(-inf,0]` equal one.
    pub fn eval(&self, t: f64) -> Result<OperatorMatrix> {
        OperatorMatrix::new(self.eval_with(t, t >= 0.0, t <= 0.0))
    }

    /// One-sided limit at `t = 0`.
    pub fn eval_limit_at_zero(&self, from_above: bool) -> Result<OperatorMatrix> {
        OperatorMatrix::new(self.eval_with(0.0, from_above, !from_above))
    }

    fn eval_with(&self, t: f64, chi_plus: bool, chi_minus: bool) -> CMat {
        let n = self.dim();
        match self.kind {
            KernelKind::FeynmanWave => self.wave(t, chi_plus),
            _ => {
                let p = self.proj.as_ref().unwrap();
                let e = self.propagate(t);
                let ns = clifford_normal(n);
                let (cp, cm) = (chi_plus as u8 as f64, chi_minus as u8 as f64);
                let weight = match self.kind {
                    KernelKind::FeynmanDirac => p.p_ge() * C64::new(cp, 0.0) - p.p_lt.entries() * C64::new(cm, 0.0),
                    KernelKind::Retarded => CMat::identity(n, n) * C64::new(cp, 0.0),
                    KernelKind::Advanced => CMat::identity(n, n) * C64::new(-cm, 0.0),
                    KernelKind::RegularizedDiff => {
                        p.p_ge() * C64::new(cp, 0.0)
                            - p.p_lt.entries() * C64::new(cm, 0.0)
                            - CMat::identity(n, n) * C64::new(0.5 * (cp - cm), 0.0)
                    }
                    KernelKind::FeynmanWave => unreachable!(),
                };
                weight * e * ns * I
            }
        }
    }

    fn wave(&self, t: f64, chi_plus: bool) -> CMat {
        let ray = self.ray;
        let zero = self.zero;
        let centers: Vec<C64> = self.dec.clusters.iter().map(|c| c.center).collect();
        let tau = t.abs();
        self.dec.apply(&|j, kmax| {
            if Some(j) == zero {
                if !chi_plus {
                    return None;
                }
                // sin(t A^{1/2}) A^{-1/2} = sum_k (-1)^k t^{2k+1} A^k / (2k+1)!
                let mut coeffs = Vec::with_capacity(kmax + 1);
                let mut term = t;
                for k in 0..=kmax {
                    if k > 0 {
                        term *= -t * t / ((2 * k) as f64 * (2 * k + 1) as f64);
                    }
                    coeffs.push(C64::new(term, 0.0));
                }
                return Some((C64::new(0.0, 0.0), coeffs));
            }
            let c = centers[j];
            let sq = Series::variable(c, kmax).powc_with(C64::new(0.5, 0.0), ray.pow(c, C64::new(0.5, 0.0)));
            let g = sq.scale(-I * tau).exp().mul(&sq.recip()).scale(I * 0.5);
            Some((c, g.0))
        })
    }
}

/// `-(i/2) Tr((p_>= - p_<) exp(-i t D))`, prepared once for repeated evaluation.
#[derive(Debug, Clone)]
pub struct RegularizedTrace {
    dec: SpectralDecomposition,
    weights: Vec<CMat>,
    h: usize,
}

impl RegularizedTrace {
    pub fn new(d: &OperatorMatrix, ray: RaySpec, cluster_tol: f64) -> Result<Self> {
        let dec = schur_clusters(d, cluster_tol)?;
        let p = frequency_projectors(d, ray, cluster_tol)?;
        let sign = p.p_ge() - p.p_lt.entries();
        let weights = dec.restrict(&sign);
        let h = p.p_0.entries().trace().re.round().max(0.0) as usize;
        Ok(Self { dec, weights, h })
    }

    pub fn kernel_dimension(&self) -> usize {
        self.h
    }

    pub fn eval(&self, t: f64) -> C64 {
        let alpha = -I * t;
        let centers: Vec<C64> = self.dec.clusters.iter().map(|c| c.center).collect();
        let tr = self
            .dec
            .trace_apply(Some(&self.weights), &|j, kmax| Some((centers[j], exp_taylor(alpha, centers[j], kmax))));
        -0.5 * I * tr
    }

    fn max_frequency(&self) -> f64 {
        self.dec.clusters.iter().map(|c| c.center.norm()).fold(0.0, f64::max)
    }

    /// Gaussian smearing `int phi(t) e^{-t^2/4s} / sqrt(4 pi s) dt` by the
    /// trapezoid rule in `x = t / (2 sqrt s)` on `|x| <= 7`.
    pub fn smeared(&self, s: f64) -> C64 {
        let omega = 2.0 * s.sqrt() * self.max_frequency();
        let hx = (2.0 * PI / (omega + 20.0)).min(0.05);
        let nx = (7.0 / hx).ceil() as i64;
        let mut acc = C64::new(0.0, 0.0);
        for m in -nx..=nx {
            let x = m as f64 * hx;
            acc += self.eval(2.0 * s.sqrt() * x) * (-x * x).exp();
        }
        acc * hx / PI.sqrt()
    }
}

pub fn regularized_diagonal(d: &OperatorMatrix, ray: RaySpec, t: f64, cluster_tol: f64) -> Result<C64> {
    Ok(RegularizedTrace::new(d, ray, cluster_tol)?.eval(t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeGrid {
    pub t0: f64,
    pub h: f64,
    pub nodes: usize,
}

impl SpacetimeGrid {
    pub fn new(t_minus: f64, t_plus: f64, nodes: usize) -> Result<Self> {
        if nodes < 8 || !(t_plus > t_minus) {
            return Err(Error::InvalidInput("grid needs at least 8 nodes and positive length".into()));
        }
        Ok(Self { t0: t_minus, h: (t_plus - t_minus) / (nodes - 1) as f64, nodes })
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 + self.h * i as f64
    }

    fn collar(&self) -> usize {
        ((0.1 * self.nodes as f64).ceil() as usize).max(1)
    }
}

pub type Section = Vec<DVector<C64>>;

/// Time convolution `(G u)(t) = int k(t - s) u(s) ds`, split at `s = t` with
/// the trapezoid rule on each half.
pub fn apply_propagator(fam: &KernelFamily, grid: &SpacetimeGrid, u: &Section) -> Result<Section> {
    let n = grid.nodes;
    let dim = fam.dim();
    if u.len() != n || u.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidInput("section does not match grid".into()));
    }
    let collar = grid.collar();
    for (i, v) in u.iter().enumerate() {
        if (i < collar || i >= n - collar) && v.iter().any(|z| *z != C64::new(0.0, 0.0)) {
            return Err(Error::SupportViolation);
        }
    }
    let h = grid.h;
    let kernels: Vec<CMat> = (1..n).map(|m| fam.eval_with(m as f64 * h, true, false)).collect();
    let kernels_neg: Vec<CMat> = (1..n).map(|m| fam.eval_with(-(m as f64) * h, false, true)).collect();
    let k0 = fam.eval_with(0.0, true, false) + fam.eval_with(0.0, false, true);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = DVector::<C64>::zeros(dim);
        for j in 0..n {
            if u[j].iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let w = if j == 0 || j == n - 1 { 0.5 * h } else { h };
            if j < i {
                acc += &kernels[i - j - 1] * &u[j] * C64::new(w, 0.0);
            } else if j > i {
                acc += &kernels_neg[j - i - 1] * &u[j] * C64::new(w, 0.0);
            } else {
                acc += &k0 * &u[j] * C64::new(0.5 * h, 0.0);
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Smooth bump supported in `[center - width, center + width]` times `profile`.
pub fn bump_section(grid: &SpacetimeGrid, center: f64, width: f64, profile: &DVector<C64>) -> Section {
    (0..grid.nodes)
        .map(|i| {
            let r = (grid.t(i) - center) / width;
            let v = if r.abs() < 1.0 { (-1.0 / (1.0 - r * r)).exp() * std::f64::consts::E } else { 0.0 };
            profile * C64::new(v, 0.0)
        })
        .collect()
}

/// Relative L2 deviation of `(d_t^2 + Delta) G u` from `u` on interior nodes.
pub fn wave_residual(fam: &KernelFamily, grid: &SpacetimeGrid, u: &Section) -> Result<f64> {
    let w = apply_propagator(fam, grid, u)?;
    let h2 = grid.h * grid.h;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..grid.nodes - 1 {
        let lhs = (&w[i + 1] - &w[i] * C64::new(2.0, 0.0) + &w[i - 1]) / C64::new(h2, 0.0) + fam.base.entries() * &w[i];
        num += (lhs - &u[i]).norm_squared();
        den += u[i].norm_squared();
    }
    Ok((num / den).sqrt())
}

/// Relative L2 deviation of `i nslash (d_t + i D) G u` from `u` on interior nodes.
pub fn dirac_residual(fam: &KernelFamily, grid: &SpacetimeGrid, u: &Section) -> Result<f64> {
    let w = apply_propagator(fam, grid, u)?;
    let ns = clifford_normal(fam.dim());
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..grid.nodes - 1 {
        let dt = (&w[i + 1] - &w[i - 1]) / C64::new(2.0 * grid.h, 0.0);
        let lhs = &ns * (dt + fam.base.entries() * &w[i] * I) * I;
        num += (lhs - &u[i]).norm_squared();
        den += u[i].norm_squared();
    }
    Ok((num / den).sqrt())
}

/// Residuals at grids of `nodes`, `2 nodes - 1`, `4 nodes - 3` points and the
/// observed convergence orders between successive refinements.
pub fn convergence_study(
    fam: &KernelFamily,
    t_minus: f64,
    t_plus: f64,
    nodes: usize,
    levels: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = fam.dim();
    let profile = DVector::from_fn(dim, |i, _| C64::new(1.0 / (1.0 + i as f64), 0.1 * i as f64));
    let center = 0.5 * (t_minus + t_plus);
    let width = 0.3 * (t_plus - t_minus);
    let mut errs = Vec::new();
    let mut n = nodes;
    for _ in 0..levels {
        let grid = SpacetimeGrid::new(t_minus, t_plus, n)?;
        let u = bump_section(&grid, center, width, &profile);
        let e = match fam.kind {
            KernelKind::FeynmanWave => wave_residual(fam, &grid, &u)?,
            _ => dirac_residual(fam, &grid, &u)?,
        };
        errs.push(e);
        n = 2 * n - 1;
    }
    let orders = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((errs, orders))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_circle_dirac, build_jordan_model, CircleOperatorSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_mode_wave_kernel() {
        let base = OperatorMatrix::from_real_diagonal(&[4.0]).unwrap();
        let fam = KernelFamily::new(KernelKind::FeynmanWave, base, RaySpec::default(), 1e-8).unwrap();
        for &t in &[-1.3, 0.0, 0.7, 2.0] {
            let k = fam.eval(t).unwrap().entries()[(0, 0)];
            let want = I * 0.25 * (c(0.0, -2.0 * t.abs())).exp();
            assert!((k - want).norm() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn single_mode_dirac_kernel() {
        let base = OperatorMatrix::from_real_diagonal(&[3.0]).unwrap();
        let fam = KernelFamily::new(KernelKind::FeynmanDirac, base, RaySpec::default(), 1e-8).unwrap();
        for &t in &[-0.5, 0.4, 1.1] {
            let k = fam.eval(t).unwrap().entries()[(0, 0)];
            let want = if t >= 0.0 { I * c(0.0, -3.0 * t).exp() * I } else { c(0.0, 0.0) };
            assert!((k - want).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_mode_wave_block_is_linear() {
        let base = OperatorMatrix::from_real_diagonal(&[0.0]).unwrap();
        let fam = KernelFamily::new(KernelKind::FeynmanWave, base, RaySpec::default(), 1e-8).unwrap();
        assert!((fam.eval(1.7).unwrap().entries()[(0, 0)] - c(1.7, 0.0)).norm() < 1e-15);
        assert_eq!(fam.eval(-1.7).unwrap().entries()[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn jump_and_causal_support() {
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(0.25, 3)).unwrap();
        let n = d.dim();
        let fam = KernelFamily::new(KernelKind::FeynmanDirac, d.clone(), RaySpec::default(), 1e-8).unwrap();
        let jump = fam.eval_limit_at_zero(true).unwrap().entries() - fam.eval_limit_at_zero(false).unwrap().entries();
        assert!((jump - clifford_normal(n) * I).norm() < 1e-14);
        let ret = KernelFamily::new(KernelKind::Retarded, d.clone(), RaySpec::default(), 1e-8).unwrap();
        let adv = KernelFamily::new(KernelKind::Advanced, d, RaySpec::default(), 1e-8).unwrap();
        assert_eq!(ret.eval(-0.3).unwrap().norm(), 0.0);
        assert_eq!(adv.eval(0.3).unwrap().norm(), 0.0);
    }

    #[test]
    fn regularized_trace_values() {
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(0.0, 4)).unwrap();
        let v = regularized_diagonal(&d, RaySpec::default(), 0.0, 1e-8).unwrap();
        assert!((v - c(0.0, -0.5)).norm() < 1e-13);
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(0.5, 4)).unwrap();
        let r = RegularizedTrace::new(&d, RaySpec::default(), 1e-8).unwrap();
        for &t in &[0.0, 0.3, 1.0] {
            let mut want = c(0.0, 0.0);
            for k in -4..=4 {
                let lam = k as f64 + 0.5;
                want += c(0.0, -lam * t).exp() * lam.signum();
            }
            let want = want * c(0.0, -0.5);
            let v = r.eval(t);
            assert!((v - want).norm() < 1e-12, "t={t} v={v}");
        }
    }

    #[test]
    fn frequency_splitting_on_jordan_model() {
        let d = build_jordan_model(2).unwrap();
        let fam = KernelFamily::new(KernelKind::FeynmanDirac, d, RaySpec::default(), 1e-8).unwrap();
        let p = fam.projectors().unwrap().clone();
        for &t in &[0.3, 1.7] {
            assert!((p.p_lt.entries() * fam.eval(t).unwrap().entries()).norm() < 1e-12);
            assert!((p.p_ge() * fam.eval(-t).unwrap().entries()).norm() < 1e-12);
        }
    }

    #[test]
    fn support_violation() {
        let base = OperatorMatrix::from_real_diagonal(&[1.0]).unwrap();
        let fam = KernelFamily::new(KernelKind::FeynmanWave, base, RaySpec::default(), 1e-8).unwrap();
        let grid = SpacetimeGrid::new(0.0, 1.0, 20).unwrap();
        let mut u: Section = (0..20).map(|_| DVector::zeros(1)).collect();
        assert!(apply_propagator(&fam, &grid, &u).unwrap().iter().all(|v| v.norm() == 0.0));
        u[0][0] = c(1.0, 0.0);
        assert_eq!(apply_propagator(&fam, &grid, &u), Err(Error::SupportViolation));
    }
}
