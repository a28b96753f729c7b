//! Eta and xi invariants of a circle Dirac operator by three routes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;


use crate::error::{Error, Result};
use crate::propagator::RegularizedTrace;
use crate::special::hurwitz_zeta;
use crate::spectral::{exp_taylor, frequency_projectors, schur_clusters, CMat, OperatorMatrix, RaySpec, SpectralDecomposition};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Cluster tolerance used by the eta routes.
pub const ETA_CLUSTER_TOL: f64 = 1e-8;
pub const MAX_FIT_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaMethod {
    Zeta,
    HeatFit,
    Smeared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    /// Exponents of the power terms, in column order.
    pub powers: Vec<f64>,
    pub coefficients: Vec<C64>,
    /// Coefficient of `log t`.
    pub log_coefficient: C64,
    /// Relative RMS residual of the fit.
    pub residual: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaResult {
    pub eta: C64,
    pub h: usize,
    pub xi: C64,
    pub method: EtaMethod,
    pub error_estimate: f64,
    pub fit_diagnostics: Option<FitDiagnostics>,
}

impl EtaResult {
    fn new(eta: C64, h: usize, method: EtaMethod, error_estimate: f64, fit: Option<FitDiagnostics>) -> Self {
        Self { eta, h, xi: (eta + h as f64) * 0.5, method, error_estimate, fit_diagnostics: fit }
    }
}

/// Terms of the small-`t` fit: `sum_p a_p t^p + c log t`. The constant term
/// must be among the powers.
#[derive(Debug, Clone, PartialEq)]
pub struct FitAnsatz {
    pub powers: Vec<f64>,
    pub log_term: bool,
}

impl FitAnsatz {
    /// `a t^{-1/2} + b + c log t + d t^{1/2}`.
    pub fn minimal() -> Self {
        Self { powers: vec![-0.5, 0.0, 0.5], log_term: true }
    }

    /// Minimal ansatz plus `t, t^{3/2}, t^2`.
    pub fn extended() -> Self {
        Self { powers: vec![-0.5, 0.0, 0.5, 1.0, 1.5, 2.0], log_term: true }
    }

    fn columns(&self) -> usize {
        self.powers.len() + self.log_term as usize
    }

    fn without_last_power(&self) -> Option<Self> {
        let last = *self.powers.last()?;
        if last == 0.0 || self.powers.len() < 2 {
            return None;
        }
        Some(Self { powers: self.powers[..self.powers.len() - 1].to_vec(), log_term: self.log_term })
    }
}

impl Default for FitAnsatz {
    fn default() -> Self {
        Self::extended()
    }
}

/// Geometric grid of `n` points on `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (r * i as f64).exp()).collect()
}

/// 24 points on `[max(1e-3, 36/K^2), 0.05]`, widened when the floor is large.
/// Boundary modes then enter the trace with weight below `e^{-36}`.
pub fn default_grid(k: usize) -> Vec<f64> {
    let lo = (1e-3f64).max(9.0 * truncation_floor(k));
    geometric_grid(lo, (0.05f64).max(50.0 * lo), 24)
}

/// Smallest trusted `t` for a truncation at `|k| <= K`.
pub fn truncation_floor(k: usize) -> f64 {
    4.0 / (k * k) as f64
}

/// Least-squares fit of `ys` against the ansatz; returns the constant term.
pub fn fit_constant_term(ts: &[f64], ys: &[C64], ansatz: &FitAnsatz) -> Result<(C64, FitDiagnostics)> {
    let p = ansatz.columns();
    if ts.len() != ys.len() || ts.len() < p.max(6) {
        return Err(Error::InvalidInput(format!("need at least {} grid points", p.max(6))));
    }
    if ts.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput("grid points must be positive".into()));
    }
    let a = DMatrix::from_fn(ts.len(), p, |i, j| {
        if j < ansatz.powers.len() {
            ts[i].powf(ansatz.powers[j])
        } else {
            ts[i].ln()
        }
    });
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_FIT_CONDITION {
        return Err(Error::FitIllConditioned(condition));
    }
    let solve = |b: DVector<f64>| svd.solve(&b, 0.0).expect("svd has both factors");
    let re = solve(DVector::from_iterator(ys.len(), ys.iter().map(|z| z.re)));
    let im = solve(DVector::from_iterator(ys.len(), ys.iter().map(|z| z.im)));
    let coef: Vec<C64> = (0..p).map(|j| C64::new(re[j], im[j])).collect();
    let fit_re = &a * &re;
    let fit_im = &a * &im;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..ys.len() {
        num += (C64::new(fit_re[i], fit_im[i]) - ys[i]).norm_sqr();
        den += ys[i].norm_sqr();
    }
    let residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    let c0 = ansatz.powers.iter().position(|q| *q == 0.0).ok_or_else(|| {
        Error::InvalidInput("ansatz has no constant term".into())
    })?;
    let log_coefficient = if ansatz.log_term { coef[p - 1] } else { C64::new(0.0, 0.0) };
    let diag = FitDiagnostics {
        powers: ansatz.powers.clone(),
        coefficients: coef[..ansatz.powers.len()].to_vec(),
        log_coefficient,
        residual,
        condition,
    };
    Ok((coef[c0], diag))
}

/// Constant term with an error estimate from dropping the highest power.
fn fit_with_estimate(ts: &[f64], ys: &[C64], ansatz: &FitAnsatz) -> Result<(C64, f64, FitDiagnostics)> {
    let (b, diag) = fit_constant_term(ts, ys, ansatz)?;
    let mut err = diag.residual * ys.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(reduced) = ansatz.without_last_power() {
        let (b2, _) = fit_constant_term(ts, ys, &reduced)?;
        err = err.max((b - b2).norm());
    }
    Ok((b, err.max(1e-14), diag))
}

fn kernel_dimension(p0: &CMat) -> usize {
    p0.trace().re.round().max(0.0) as usize
}

fn check_window(d: &OperatorMatrix, grid: &[f64]) -> Result<()> {
    if let Some(labels) = d.mode_labels() {
        let k = labels.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0) as usize;
        let floor = truncation_floor(k.max(1));
        let tmin = grid.iter().cloned().fold(f64::INFINITY, f64::min);
        if tmin < floor {
            return Err(Error::TruncationWindowViolated(tmin, floor));
        }
    }
    Ok(())
}

/// Constant shift `a` with `D = diag(k + a)` on labelled modes, if `D` has that form.
pub fn lattice_shift(d: &OperatorMatrix) -> Option<C64> {
    let labels = d.mode_labels()?;
    let m = d.entries();
    let n = d.dim();
    let scale = m.norm().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)].norm() > 1e-14 * scale {
                return None;
            }
        }
    }
    let a = m[(0, 0)] - labels[0] as f64;
    for i in 0..n {
        if (m[(i, i)] - labels[i] as f64 - a).norm() > 1e-12 * scale {
            return None;
        }
    }
    // every mode must appear with the same multiplicity
    let rank = labels.iter().filter(|l| **l == labels[0]).count();
    let kmax = labels.iter().map(|l| l.abs()).max()?;
    for k in -kmax..=kmax {
        if labels.iter().filter(|l| **l == k).count() != rank {
            return None;
        }
    }
    Some(a)
}

/// `eta(s) = Tr((p_> - p_<) Delta^{-s/2})` for a lattice spectrum, explicit on the
/// truncated modes plus Hurwitz-zeta tails. Defined for `Re s` where the
/// continuation is regular (all `s` with `s != 1`).
pub fn eta_zeta_at(d: &OperatorMatrix, ray: RaySpec, s: C64) -> Result<C64> {
    let a = lattice_shift(d).ok_or(Error::NoClosedFormTail)?;
    let labels = d.mode_labels().unwrap();
    let kmax = labels.iter().map(|l| l.abs()).max().unwrap();
    let rank = labels.iter().filter(|l| **l == labels[0]).count() as f64;
    let p = frequency_projectors(d, ray, ETA_CLUSTER_TOL)?;
    let sign = p.sign();
    let mut explicit = C64::new(0.0, 0.0);
    for i in 0..d.dim() {
        let lam = d.entries()[(i, i)];
        let w = sign[(i, i)];
        if w.norm() == 0.0 {
            continue;
        }
        explicit += w * ray.pow(lam * lam, -s * 0.5);
    }
    let q_plus = C64::new((kmax + 1) as f64, 0.0) + a;
    let q_minus = C64::new((kmax + 1) as f64, 0.0) - a;
    if q_plus.re <= 0.0 || q_minus.re <= 0.0 {
        return Err(Error::InvalidInput("flux too large for the truncation".into()));
    }
    let tail = hurwitz_zeta(s, q_plus) - hurwitz_zeta(s, q_minus);
    Ok(explicit + tail * rank)
}

pub fn eta_zeta(d: &OperatorMatrix, ray: RaySpec) -> Result<EtaResult> {
    let eta = eta_zeta_at(d, ray, C64::new(0.0, 0.0))?;
    let p = frequency_projectors(d, ray, ETA_CLUSTER_TOL)?;
    let h = kernel_dimension(p.p_0.entries());
    Ok(EtaResult::new(eta, h, EtaMethod::Zeta, 1e-12 * (d.dim() as f64).max(1.0), None))
}

/// `Tr((p_> - p_<) e^{-t Delta})`, prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct HeatTrace {
    dec: SpectralDecomposition,
    weights: Vec<CMat>,
    h: usize,
}

impl HeatTrace {
    pub fn new(d: &OperatorMatrix, ray: RaySpec) -> Result<Self> {
        let p = frequency_projectors(d, ray, ETA_CLUSTER_TOL)?;
        let delta = OperatorMatrix::new(d.entries() * d.entries())?;
        let dec = schur_clusters(&delta, ETA_CLUSTER_TOL)?;
        let weights = dec.restrict(&p.sign());
        Ok(Self { dec, weights, h: kernel_dimension(p.p_0.entries()) })
    }

    pub fn kernel_dimension(&self) -> usize {
        self.h
    }

    pub fn eval(&self, t: f64) -> C64 {
        let alpha = C64::new(-t, 0.0);
        let centers: Vec<C64> = self.dec.clusters.iter().map(|c| c.center).collect();
        self.dec
            .trace_apply(Some(&self.weights), &|j, kmax| Some((centers[j], exp_taylor(alpha, centers[j], kmax))))
    }

    /// `-(i/2)(Tr((p_> - p_<) e^{-s Delta}) + h)`, the exact smeared value.
    pub fn psi(&self, s: f64) -> C64 {
        -0.5 * I * (self.eval(s) + self.h as f64)
    }
}

pub fn eta_heat(d: &OperatorMatrix, ray: RaySpec, t_grid: &[f64]) -> Result<EtaResult> {
    eta_heat_with(d, ray, t_grid, &FitAnsatz::default())
}

pub fn eta_heat_with(d: &OperatorMatrix, ray: RaySpec, t_grid: &[f64], ansatz: &FitAnsatz) -> Result<EtaResult> {
    check_window(d, t_grid)?;
    let heat = HeatTrace::new(d, ray)?;
    let ys: Vec<C64> = t_grid.iter().map(|t| heat.eval(*t)).collect();
    let (b, err, diag) = fit_with_estimate(t_grid, &ys, ansatz)?;
    Ok(EtaResult::new(b, heat.kernel_dimension(), EtaMethod::HeatFit, err, Some(diag)))
}

pub fn eta_smeared(d: &OperatorMatrix, ray: RaySpec, s_grid: &[f64]) -> Result<EtaResult> {
    eta_smeared_with(d, ray, s_grid, &FitAnsatz::default())
}

pub fn eta_smeared_with(d: &OperatorMatrix, ray: RaySpec, s_grid: &[f64], ansatz: &FitAnsatz) -> Result<EtaResult> {
    check_window(d, s_grid)?;
    let trace = RegularizedTrace::new(d, ray, ETA_CLUSTER_TOL)?;
    let ys: Vec<C64> = s_grid.iter().map(|s| trace.smeared(*s)).collect();
    let (b, err, diag) = fit_with_estimate(s_grid, &ys, ansatz)?;
    let h = trace.kernel_dimension();
    let xi = I * b;
    let eta = xi * 2.0 - h as f64;
    Ok(EtaResult::new(eta, h, EtaMethod::Smeared, 2.0 * err, Some(diag)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_circle_dirac, build_jordan_model, CircleOperatorSpec};

    fn circle(a: f64, k: usize) -> OperatorMatrix {
        build_circle_dirac(&CircleOperatorSpec::flux_only(a, k)).unwrap()
    }

    #[test]
    fn zeta_route_values() {
        let ray = RaySpec::default();
        let r = eta_zeta(&circle(0.25, 10), ray).unwrap();
        assert!((r.eta - C64::new(0.5, 0.0)).norm() < 1e-12);
        assert_eq!(r.h, 0);
        assert!((r.xi - C64::new(0.25, 0.0)).norm() < 1e-12);
        let r = eta_zeta(&circle(0.0, 10), ray).unwrap();
        assert!(r.eta.norm() < 1e-12);
        assert_eq!(r.h, 1);
        let r = eta_zeta(&circle(0.5, 10), ray).unwrap();
        assert!(r.eta.norm() < 1e-12 && r.h == 0);
    }

    #[test]
    fn zeta_route_away_from_zero() {
        // eta(s) of Z + a: zeta_H(s, a) - zeta_H(s, 1 - a)
        let ray = RaySpec::default();
        let s = C64::new(2.5, 0.0);
        let got = eta_zeta_at(&circle(0.3, 6), ray, s).unwrap();
        let want = hurwitz_zeta(s, C64::new(0.3, 0.0)) - hurwitz_zeta(s, C64::new(0.7, 0.0));
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn zeta_route_rejects_potential() {
        let mut spec = CircleOperatorSpec::flux_only(0.25, 4);
        spec.potential.push((1, CMat::from_element(1, 1, C64::new(0.1, 0.0))));
        let d = build_circle_dirac(&spec).unwrap();
        assert_eq!(eta_zeta(&d, RaySpec::default()).unwrap_err(), Error::NoClosedFormTail);
        assert_eq!(eta_zeta(&build_jordan_model(3).unwrap(), RaySpec::default()).unwrap_err(), Error::NoClosedFormTail);
    }

    #[test]
    fn heat_route() {
        let d = circle(0.25, 200);
        let r = eta_heat(&d, RaySpec::default(), &default_grid(200)).unwrap();
        assert!((r.eta - C64::new(0.5, 0.0)).norm() < 1e-5, "{:?}", r.eta);
        assert!(r.error_estimate < 1e-3);
        let r = eta_heat(&d, RaySpec::default(), &geometric_grid(0.02, 0.2, 24)).unwrap();
        assert!((r.eta - C64::new(0.5, 0.0)).norm() < 1e-3);
        let r = eta_heat(&circle(0.0, 50), RaySpec::default(), &default_grid(50)).unwrap();
        assert!(r.eta.norm() < 1e-6);
        assert!(r.fit_diagnostics.unwrap().log_coefficient.norm() < 1e-6);
    }

    #[test]
    fn heat_window_and_conditioning() {
        let d = circle(0.25, 10);
        assert!(matches!(
            eta_heat(&d, RaySpec::default(), &geometric_grid(1e-3, 0.05, 24)),
            Err(Error::TruncationWindowViolated(..))
        ));
        let near: Vec<f64> = (0..10).map(|i| 0.1 + 1e-9 * i as f64).collect();
        assert!(matches!(eta_heat(&d, RaySpec::default(), &near), Err(Error::FitIllConditioned(_))));
    }

    #[test]
    fn smeared_route() {
        for (a, xi) in [(0.25, 0.25), (0.0, 0.5), (0.5, 0.0)] {
            let r = eta_smeared(&circle(a, 200), RaySpec::default(), &default_grid(200)).unwrap();
            assert!((r.xi - C64::new(xi, 0.0)).norm() < 1e-4, "a={a} xi={}", r.xi);
        }
    }

    #[test]
    fn jordan_model_counts_generalized_kernel() {
        let d = build_jordan_model(60).unwrap();
        let grid = default_grid(60);
        let heat = eta_heat(&d, RaySpec::default(), &grid).unwrap();
        let smeared = eta_smeared(&d, RaySpec::default(), &grid).unwrap();
        assert_eq!(heat.h, 2);
        assert_eq!(smeared.h, 2);
        assert!(heat.eta.norm() < 1e-6);
        assert!((heat.eta - smeared.eta).norm() < 1e-6);
    }
}
