//! Cauchy evolution through the cylinder and the Fredholm-pair index.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::constants::CURVATURE_SIGN;
use crate::error::{Error, Result};
use crate::eta::eta_zeta;
use crate::models::{build_circle_dirac, CylinderModel};
use crate::propagator::clifford_normal;
use crate::spectral::{frequency_projectors, CMat, OperatorMatrix, RaySpec};

const I: C64 = C64 { re: 0.0, im: 1.0 };

pub const EVOLVE_TOL: f64 = 1e-12;
pub const INDEX_CLUSTER_TOL: f64 = 1e-8;
pub const INTEGRALITY_TOL: f64 = 1e-3;
/// Endpoint fluxes closer than this to an integer, but not equal, are ambiguous.
pub const ENDPOINT_ZERO_TOL: f64 = 1e-9;
const MAX_LEVEL: u32 = 40;

#[derive(Debug, Clone)]
pub struct EvolutionOperator {
    pub u: OperatorMatrix,
    pub steps: usize,
    /// Largest accepted local error estimate.
    pub tolerance_achieved: f64,
    pub condition: f64,
}

/// 2-point Gauss-Legendre nodes on `[-1, 1]`.
const GL2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

struct Stepper<'a> {
    model: &'a CylinderModel,
    d0: CMat,
    diagonal: bool,
    dual: bool,
    cache: HashMap<u64, CMat>,
    steps: usize,
    worst: f64,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a CylinderModel, dual: bool) -> Result<Self> {
        model.validate()?;
        let d0 = build_circle_dirac(&model.base.with_flux(C64::new(0.0, 0.0)))?.into_entries();
        let d0 = if dual { d0.adjoint() } else { d0 };
        let n = d0.nrows();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || d0[(i, j)] == C64::new(0.0, 0.0)));
        Ok(Self { model, d0, diagonal, dual, cache: HashMap::new(), steps: 0, worst: 0.0 })
    }

    fn flux(&self, t: f64) -> C64 {
        let a = self.model.flux(t);
        if self.dual {
            a.conj()
        } else {
            a
        }
    }

    /// `exp(-i h D0)`, cached by step length.
    fn base_exp(&mut self, h: f64) -> CMat {
        if let Some(m) = self.cache.get(&h.to_bits()) {
            return m.clone();
        }
        let m = if self.diagonal {
            let n = self.d0.nrows();
            CMat::from_fn(n, n, |i, j| if i == j { (-I * h * self.d0[(i, i)]).exp() } else { C64::new(0.0, 0.0) })
        } else {
            (&self.d0 * (-I * h)).exp()
        };
        self.cache.insert(h.to_bits(), m.clone());
        m
    }

    fn gauss_phase(&self, a: f64, b: f64) -> C64 {
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        (self.flux(m + r * GL2[0]) + self.flux(m + r * GL2[1])) * r
    }

    /// Dyadic steps on `[a, b]` with the phase integral `int a(t) dt` of each.
    /// The generator `D0 + a(t)` commutes with itself at all times, so the
    /// fourth-order Magnus step reduces to `exp(-i h D0) exp(-i int a)`.
    fn ramp_steps(&self, a: f64, b: f64, level: u32, out: &mut Vec<(f64, C64)>, worst: &mut f64) -> Result<()> {
        let whole = self.gauss_phase(a, b);
        let m = 0.5 * (a + b);
        let halves = self.gauss_phase(a, m) + self.gauss_phase(m, b);
        let err = (whole - halves).norm();
        let total = (self.model.t_plus - self.model.t_minus).abs();
        if err <= EVOLVE_TOL * (b - a).abs() / total && level >= 2 {
            *worst = worst.max(err);
            out.push((b - a, halves));
            return Ok(());
        }
        if level >= MAX_LEVEL {
            return Err(Error::SolverToleranceNotMet(format!("step halving exhausted at t = {a}")));
        }
        self.ramp_steps(a, m, level + 1, out, worst)?;
        self.ramp_steps(m, b, level + 1, out, worst)
    }

    /// Evolution from `t0` to `t1` (either order).
    fn evolve(&mut self, t0: f64, t1: f64) -> Result<CMat> {
        let n = self.d0.nrows();
        let mut u = CMat::identity(n, n);
        if t0 == t1 {
            return Ok(u);
        }
        let mut cuts = vec![t0, t1];
        if let Some((ra, rb)) = self.model.gauge_path.ramp() {
            for c in [ra, rb] {
                if (c - t0) * (c - t1) < 0.0 {
                    cuts.push(c);
                }
            }
        }
        if t1 > t0 {
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        } else {
            cuts.sort_by(|a, b| b.partial_cmp(a).unwrap());
        }
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let constant = self.model.in_product_region(mid) || self.model.is_autonomous();
            if constant {
                let step = self.base_exp(b - a) * (-I * (b - a) * self.flux(mid)).exp();
                u = step * u;
                self.steps += 1;
            } else {
                let mut steps = Vec::new();
                let mut worst = 0.0;
                self.ramp_steps(a, b, 0, &mut steps, &mut worst)?;
                self.worst = self.worst.max(worst);
                // the steps commute, so their product is one exponential
                // times the accumulated phase
                let phase: C64 = steps.iter().map(|s| s.1).sum();
                self.steps += steps.len();
                u = self.base_exp(b - a) * (-I * phase).exp() * u;
            }
        }
        Ok(u)
    }
}

fn finish(u: CMat, stepper: &Stepper) -> Result<EvolutionOperator> {
    let inv = u.clone().try_inverse().ok_or_else(|| Error::SolverToleranceNotMet("singular evolution".into()))?;
    let condition = operator_norm(&u) * operator_norm(&inv);
    Ok(EvolutionOperator { u: OperatorMatrix::new(u)?, steps: stepper.steps, tolerance_achieved: stepper.worst, condition })
}

/// Evolution of `d_t u = -i D(t) u` from `t_-` to `t_+`.
pub fn evolve(model: &CylinderModel) -> Result<EvolutionOperator> {
    let mut s = Stepper::new(model, false)?;
    let u = s.evolve(model.t_minus, model.t_plus)?;
    finish(u, &s)
}

/// Evolution of the formally dual system `d_t v = -i D(t)^* v`.
pub fn evolve_dual(model: &CylinderModel) -> Result<EvolutionOperator> {
    let mut s = Stepper::new(model, true)?;
    let u = s.evolve(model.t_minus, model.t_plus)?;
    finish(u, &s)
}

pub fn evolve_between(model: &CylinderModel, t0: f64, t1: f64) -> Result<CMat> {
    Stepper::new(model, false)?.evolve(t0, t1)
}

pub fn operator_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    operator_norm(&(u.adjoint() * u - CMat::identity(n, n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FredholmIndex {
    pub trace_index: C64,
    pub rounded_index: i64,
    pub integrality_residual: f64,
    /// Partial trace of `P_+ - P_-` over modes with `|k| > 0.9 K`.
    pub boundary_mode_trace: C64,
}

fn conjugate(u: &CMat, p: &CMat) -> Result<CMat> {
    let inv = u.clone().try_inverse().ok_or_else(|| Error::SolverToleranceNotMet("singular evolution".into()))?;
    Ok(u * p * inv)
}

/// `Tr(P_+ - P_-)` with `P_+ = p_>=(D_+)` and `P_- = U p_>=(D_-) U^{-1}`.
pub fn fredholm_pair_index(model: &CylinderModel, ray: RaySpec) -> Result<FredholmIndex> {
    let ev = evolve(model)?;
    let dp = model.operator_plus()?;
    let dm = model.operator_minus()?;
    let pp = frequency_projectors(&dp, ray, INDEX_CLUSTER_TOL)?.p_ge();
    let pm = conjugate(ev.u.entries(), &frequency_projectors(&dm, ray, INDEX_CLUSTER_TOL)?.p_ge())?;
    let diff = pp - pm;
    let trace_index = diff.trace();
    let rounded_index = trace_index.re.round() as i64;
    let integrality_residual = (trace_index - rounded_index as f64).norm();
    let labels = dp.mode_labels().unwrap_or(&[]);
    let kmax = labels.iter().map(|l| l.abs()).max().unwrap_or(0) as f64;
    let boundary_mode_trace = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() as f64 > 0.9 * kmax)
        .map(|(i, _)| diff[(i, i)])
        .sum();
    if integrality_residual > INTEGRALITY_TOL {
        return Err(Error::NonintegerIndex(integrality_residual));
    }
    Ok(FredholmIndex { trace_index, rounded_index, integrality_residual, boundary_mode_trace })
}

/// Signed count of zero crossings of `t -> k + a(t)`, with zero counted as
/// nonnegative, by enumeration over a sampled path.
pub fn spectral_flow(model: &CylinderModel) -> Result<i64> {
    model.validate()?;
    if !model.gauge_path.is_real() {
        return Err(Error::InvalidInput("spectral flow needs a real gauge path".into()));
    }
    let (t0, t1) = (model.t_minus, model.t_plus);
    for t in [t0, t1] {
        let a = model.flux(t).re;
        let dist = (a - a.round()).abs();
        if dist > 0.0 && dist < ENDPOINT_ZERO_TOL {
            return Err(Error::EndpointZeroAmbiguous(format!("flux {a} at t = {t}")));
        }
    }
    const SAMPLES: usize = 4096;
    let (ra, rb) = model.gauge_path.ramp().unwrap_or((t0, t1));
    let mut ts = vec![t0];
    ts.extend((0..=SAMPLES).map(|i| ra + (rb - ra) * i as f64 / SAMPLES as f64));
    ts.push(t1);
    let values: Vec<f64> = ts.iter().map(|t| model.flux(*t).re).collect();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut flow = 0i64;
    for k in (-hi.ceil() as i64 - 1)..=(-lo.floor() as i64 + 1) {
        let mut prev = k as f64 + values[0] >= 0.0;
        for v in &values[1..] {
            let cur = k as f64 + v >= 0.0;
            if cur && !prev {
                flow += 1;
            } else if prev && !cur {
                flow -= 1;
            }
            prev = cur;
        }
    }
    Ok(flow)
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiRhs {
    pub xi_plus: C64,
    pub xi_minus: C64,
    pub curvature_integral: C64,
    pub rhs: C64,
}

/// Composite 8-point Gauss-Legendre rule on `[a, b]` with `panels` panels.
pub fn gauss_legendre_8(f: &dyn Fn(f64) -> C64, a: f64, b: f64, panels: usize) -> C64 {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329_0, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362_0, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    let h = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let m = a + (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            acc += (f(m - 0.5 * h * x) + f(m + 0.5 * h * x)) * w;
        }
    }
    acc * (0.5 * h)
}

/// `(1/2pi) int_M F` for the connection `d + i a(t) d theta`.
pub fn curvature_integral(model: &CylinderModel) -> C64 {
    let Some((a, b)) = model.gauge_path.ramp() else {
        return C64::new(0.0, 0.0);
    };
    let dens = |t: f64| model.gauge_path.derivative(t) / (2.0 * PI);
    // theta integral contributes 2 pi
    gauss_legendre_8(&dens, a, b, 64) * (2.0 * PI)
}

pub fn xi_index_rhs(model: &CylinderModel, ray: RaySpec) -> Result<XiRhs> {
    let xp = eta_zeta(&model.operator_plus()?, ray)?.xi;
    let xm = eta_zeta(&model.operator_minus()?, ray)?.xi;
    let curv = curvature_integral(model);
    Ok(XiRhs { xi_plus: xp, xi_minus: xm, curvature_integral: curv, rhs: xp - xm + curv * CURVATURE_SIGN })
}

/// Integrated Dirac current over the slice at `t`: half the trace of
/// `i nslash (R_+ - R_-)`, where `R_+-` are the coincidence values of the
/// regularized future and past kernels built from the endpoint projectors
/// transported to `t`.
pub fn dirac_current(model: &CylinderModel, ray: RaySpec, t: f64) -> Result<C64> {
    model.validate()?;
    if !(model.is_autonomous() || model.in_product_region(t)) {
        return Err(Error::OutsideProductRegion(t));
    }
    if t < model.t_minus || t > model.t_plus {
        return Err(Error::InvalidInput(format!("t = {t} outside the cylinder")));
    }
    let n = model.base.dim();
    let ns = clifford_normal(n);
    let one = CMat::identity(n, n);
    let reg = |p: &CMat| (p * C64::new(2.0, 0.0) - &one) * &ns * I;
    let pp = frequency_projectors(&model.operator_plus()?, ray, INDEX_CLUSTER_TOL)?.p_ge();
    let pm = frequency_projectors(&model.operator_minus()?, ray, INDEX_CLUSTER_TOL)?.p_ge();
    let pp_t = conjugate(&evolve_between(model, model.t_plus, t)?, &pp)?;
    let pm_t = conjugate(&evolve_between(model, model.t_minus, t)?, &pm)?;
    let diff = reg(&pp_t) - reg(&pm_t);
    Ok((&ns * diff * I).trace() * 0.5)
}

/// `|| U~^* nslash U - nslash ||` with `U~` the dual evolution.
pub fn duality_check(model: &CylinderModel) -> Result<f64> {
    let u = evolve(model)?;
    let ud = evolve_dual(model)?;
    let ns = clifford_normal(model.base.dim());
    Ok(operator_norm(&(ud.u.entries().adjoint() * &ns * u.u.entries() - &ns)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub index: FredholmIndex,
    pub spectral_flow: i64,
    pub xi: XiRhs,
    pub duality_residual: f64,
    pub unitarity_residual: Option<f64>,
    pub current_at_minus: C64,
    pub current_at_plus: C64,
}

pub fn index_report(model: &CylinderModel, ray: RaySpec) -> Result<IndexReport> {
    let index = fredholm_pair_index(model, ray)?;
    let unitarity = if model.gauge_path.is_real() && model.base.potential.is_empty() {
        Some(unitarity_residual(evolve(model)?.u.entries()))
    } else {
        None
    };
    Ok(IndexReport {
        index,
        spectral_flow: spectral_flow(model)?,
        xi: xi_index_rhs(model, ray)?,
        duality_residual: duality_check(model)?,
        unitarity_residual: unitarity,
        current_at_minus: dirac_current(model, ray, model.t_minus)?,
        current_at_plus: dirac_current(model, ray, model.t_plus)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::GaugePath;

    fn path(a: f64, b: f64) -> CylinderModel {
        CylinderModel::smoothstep(a, b, 2.0, 16)
    }

    #[test]
    fn constant_flux_evolution_is_diagonal_exponential() {
        let mut m = path(0.3, 0.3);
        m.gauge_path = GaugePath::Constant(C64::new(0.3, 0.0));
        let u = evolve(&m).unwrap();
        for (i, k) in (-16..=16).enumerate() {
            let want = (-I * 2.0 * (k as f64 + 0.3)).exp();
            assert!((u.u.entries()[(i, i)] - want).norm() < 1e-13);
        }
        assert_eq!(fredholm_pair_index(&m, RaySpec::default()).unwrap().rounded_index, 0);
    }

    #[test]
    fn ramp_evolution_is_unitary() {
        let u = evolve(&path(0.3, 1.3)).unwrap();
        assert!(unitarity_residual(u.u.entries()) < 1e-10);
        assert!(u.tolerance_achieved <= EVOLVE_TOL);
    }

    #[test]
    fn index_examples() {
        for (a, b, want) in [(0.3, 1.3, 1), (0.25, -1.75, -2), (0.3, 0.9, 0)] {
            let m = path(a, b);
            let r = index_report(&m, RaySpec::default()).unwrap();
            assert_eq!(r.index.rounded_index, want);
            assert!(r.index.integrality_residual < 1e-10);
            assert_eq!(r.spectral_flow, want);
            assert!((r.xi.rhs - want as f64).norm() < 1e-9, "{:?}", r.xi);
            assert!(r.duality_residual < 1e-9);
            assert!((r.current_at_minus - want as f64).norm() < 1e-6);
            assert!((r.current_at_plus - want as f64).norm() < 1e-6);
        }
    }

    #[test]
    fn spectral_flow_enumeration() {
        assert_eq!(spectral_flow(&path(0.5, 3.5)).unwrap(), 3);
        assert_eq!(spectral_flow(&path(0.0, 1.0)).unwrap(), 1);
        assert!(matches!(spectral_flow(&path(1e-12, 0.5)), Err(Error::EndpointZeroAmbiguous(_))));
    }

    #[test]
    fn curvature_sign_calibration() {
        // the frozen sign must reproduce the spectral flow on the calibration path
        let m = path(0.3, 1.3);
        let x = xi_index_rhs(&m, RaySpec::default()).unwrap();
        let flow = spectral_flow(&m).unwrap() as f64;
        let sign = ((flow - (x.xi_plus - x.xi_minus).re) / x.curvature_integral.re).round();
        assert_eq!(sign, CURVATURE_SIGN);
        let x = xi_index_rhs(&path(0.3, 0.6), RaySpec::default()).unwrap();
        assert!((x.xi_plus - x.xi_minus + 0.3).norm() < 1e-12);
        assert!(x.rhs.norm() < 1e-12);
    }

    #[test]
    fn current_outside_product_region() {
        let m = path(0.3, 1.3);
        assert_eq!(dirac_current(&m, RaySpec::default(), 1.0), Err(Error::OutsideProductRegion(1.0)));
    }

    #[test]
    fn complex_flux_duality() {
        let mut m = path(0.3, 1.3);
        m.gauge_path = GaugePath::Smoothstep {
            a_minus: C64::new(0.3, 0.1),
            a_plus: C64::new(1.3, -0.2),
            t_start: 0.5,
            t_end: 1.5,
        };
        assert!(duality_check(&m).unwrap() < 1e-8);
    }
}
