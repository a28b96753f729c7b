//! Homogeneous distribution families on the line and on Minkowski space,
//! their structure constants and an identity harness.
//!
//! Conventions: `gamma(x) = x_1^2 - x_2^2 - ... - x_n^2`, `box = d_1^2 - d_2^2 - ...`,
//! `(gamma +- i0)^beta` is the boundary value from the upper/lower half plane
//! of the principal power.

pub mod quad;
pub mod testfn;

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{cospi, rgamma, rgamma_derivs, sinpi, EULER_GAMMA};
use quad::{ConeNodes, LineNodes, Region};
pub use testfn::{Envelope, TestFunction};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `(1, d/dbeta, d^2/dbeta^2)` of `C(beta, n) = 2^{-n-2 beta} pi^{(2-n)/2} / (Gamma(beta + n/2) Gamma(beta + 1))`.
pub fn coeff_c_derivs(beta: C64, n: usize) -> [C64; 3] {
    let nf = n as f64;
    let pre = (-(nf + 2.0 * beta) * LN_2).exp() * PI.powf((2.0 - nf) / 2.0);
    let a = rgamma_derivs(beta + nf / 2.0);
    let b = rgamma_derivs(beta + 1.0);
    let p = [a[0] * b[0], a[1] * b[0] + a[0] * b[1], a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2]];
    let l = -2.0 * LN_2;
    [pre * p[0], pre * (l * p[0] + p[1]), pre * (l * l * p[0] + 2.0 * l * p[1] + p[2])]
}

pub fn coeff_c(beta: C64, n: usize) -> C64 {
    coeff_c_derivs(beta, n)[0]
}

pub fn dcoeff_c(beta: C64, n: usize) -> C64 {
    coeff_c_derivs(beta, n)[1]
}

pub fn d2coeff_c(beta: C64, n: usize) -> C64 {
    coeff_c_derivs(beta, n)[2]
}

/// `C~(beta, n, Lambda) = (i/pi) dC/dbeta + (Lambda - 1) C`.
pub fn coeff_ctilde(beta: C64, n: usize, lambda: f64) -> C64 {
    let d = coeff_c_derivs(beta, n);
    I / PI * d[1] + (lambda - 1.0) * d[0]
}

pub fn dcoeff_ctilde(beta: C64, n: usize, lambda: f64) -> C64 {
    let d = coeff_c_derivs(beta, n);
    I / PI * d[2] + (lambda - 1.0) * d[1]
}

/// Closed forms of `dC/dbeta` at integer `beta` for even `n`, with factorials
/// of negative integers read as Gamma poles (reciprocal zero).
pub fn dcoeff_c_integer(beta: i64, n: usize) -> Result<C64> {
    if !n.is_multiple_of(2) || n < 2 {
        return Err(Error::DimensionUnsupported(n));
    }
    let nf = n as f64;
    let bf = beta as f64;
    let pre = 2f64.powf(-nf - 2.0 * bf) * PI.powf((2.0 - nf) / 2.0);
    // 1/(beta + (n-2)/2)!
    let rfact = rgamma(c(bf + nf / 2.0));
    if beta < 0 {
        let sign = if (beta + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let fact = crate::special::gamma(c(-bf)); // (-beta-1)!
        Ok(sign * pre * fact * rfact)
    } else {
        let h = |m: i64| (1..=m).map(|l| 1.0 / l as f64).sum::<f64>();
        let bracket = 2.0 * EULER_GAMMA - 4f64.ln() - h(beta + n as i64 / 2 - 1) - h(beta);
        Ok(bracket * pre * rfact * rgamma(c(bf + 1.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `(t +- i0)^beta` on the line.
    F1,
    /// `d/dbeta (t +- i0)^beta` on the line.
    H1,
    /// `t_+^beta` (sign `+`) or `t_-^beta` (sign `-`).
    TPm,
    F,
    G,
    /// `R^+` (sign `+`) or `R^-` (sign `-`).
    R,
    RTilde,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::F1 => "f",
            Family::H1 => "h",
            Family::TPm => "t_pm",
            Family::F => "F",
            Family::G => "G",
            Family::R => "R",
            Family::RTilde => "R_tilde",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "f" => Family::F1,
            "h" => Family::H1,
            "t_pm" => Family::TPm,
            "F" => Family::F,
            "G" => Family::G,
            "R" => Family::R,
            "R_tilde" => Family::RTilde,
            _ => return Err(Error::InvalidInput(format!("unknown family {s}"))),
        })
    }

    fn on_line(&self) -> bool {
        matches!(self, Family::F1 | Family::H1 | Family::TPm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Evaluate at each `epsilon` of a decreasing ladder and extrapolate to 0.
    EpsilonLadder(Vec<f64>),
    /// Evaluate the boundary value directly.
    BoundaryValue,
}

/// `1e-1, 10^{-1.5}, ..., 1e-4`.
pub fn default_ladder() -> Vec<f64> {
    (0..7).map(|j| 10f64.powf(-1.0 - 0.5 * j as f64)).collect()
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::EpsilonLadder(default_ladder())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionQuery {
    pub family: Family,
    pub beta: C64,
    /// `+1` or `-1`.
    pub sign: i8,
    pub n: usize,
    pub lambda: f64,
    pub strategy: Strategy,
    /// Number of d'Alembertians (or derivatives on the line) moved onto the
    /// test function; `None` picks the smallest with `Re(beta) + m >= 3`
    /// (`>= 1` on the line).
    pub box_transfers: Option<usize>,
}

impl DistributionQuery {
    pub fn new(family: Family, beta: C64, sign: i8, n: usize) -> Self {
        Self { family, beta, sign, n, lambda: 0.0, strategy: Strategy::default(), box_transfers: None }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn with_transfers(mut self, m: usize) -> Self {
        self.box_transfers = Some(m);
        self
    }

    fn transfers(&self) -> usize {
        if let Some(m) = self.box_transfers {
            return m;
        }
        let target = if self.family.on_line() { 1.0 } else { 3.0 };
        (target - self.beta.re).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub value: C64,
    pub error_estimate: f64,
    pub transfers: usize,
    /// Quadrature sum of `|kernel * phi|`, the scale of cancellation in `value`.
    pub magnitude: f64,
    /// `(epsilon, value)` for ladder evaluations.
    pub ladder: Vec<(f64, C64)>,
}

const QUAD_STEPS: [f64; 3] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
const QUAD_TOL: f64 = 1e-10;

fn is_negative_integer(b: C64) -> bool {
    b.im == 0.0 && b.re < 0.0 && b.re == b.re.round()
}

/// `(gamma + i s eps)^b` and the logarithm used for it.
fn power_log(g: f64, b: C64, s: f64, eps: f64) -> (C64, C64) {
    let l = if eps > 0.0 {
        C64::new(g, s * eps).ln()
    } else if g > 0.0 {
        c(g.ln())
    } else {
        C64::new((-g).ln(), s * PI)
    };
    ((b * l).exp(), l)
}

/// Evaluates pairings, caching quadrature nodes and transferred test functions.
#[derive(Default)]
pub struct Pairer {
    cone: HashMap<(u64, usize), ConeNodes>,
    line: HashMap<(u64, usize), LineNodes>,
    psi: HashMap<(String, usize), Vec<f64>>,
}

impl Pairer {
    pub fn new() -> Self {
        Self::default()
    }

    fn cone_nodes(&mut self, extent: f64, level: usize) -> &ConeNodes {
        self.cone
            .entry((extent.to_bits(), level))
            .or_insert_with(|| ConeNodes::new(extent, QUAD_STEPS[level]))
    }

    fn line_nodes(&mut self, extent: f64, level: usize) -> &LineNodes {
        self.line
            .entry((extent.to_bits(), level))
            .or_insert_with(|| LineNodes::new(extent, QUAD_STEPS[level]))
    }

    fn cone_psi(&mut self, phi: &TestFunction, extent: f64, level: usize) -> Vec<f64> {
        let key = (format!("{:?}|{}", phi, extent.to_bits()), level);
        if let Some(v) = self.psi.get(&key) {
            return v.clone();
        }
        let v = self.cone_nodes(extent, level).psi(phi);
        self.psi.insert(key, v.clone());
        v
    }

    pub fn pair(&mut self, q: &DistributionQuery, phi: &TestFunction) -> Result<Pairing> {
        if q.sign != 1 && q.sign != -1 {
            return Err(Error::InvalidInput("sign must be +1 or -1".into()));
        }
        if q.family.on_line() {
            if phi.dim() != 1 {
                return Err(Error::DimensionUnsupported(phi.dim()));
            }
            return self.pair_line(q, phi);
        }
        if !(q.n == 2 || q.n == 3) || phi.dim() != q.n {
            return Err(Error::DimensionUnsupported(q.n));
        }
        let m = q.transfers();
        let b = q.beta + m as f64;
        let min = if matches!(q.family, Family::R | Family::RTilde) { -1.0 } else { 0.0 };
        if b.re <= min {
            return Err(Error::InvalidInput(format!("Re(beta) + m = {} is not in the convergent range", b.re)));
        }
        let psi_fn = phi.box_pow(m);
        let factor = if q.family == Family::RTilde && m % 2 == 1 { -1.0 } else { 1.0 };
        let extent = phi.extent();
        let cd = coeff_c_derivs(b, q.n);
        let s = q.sign as f64;
        let fam = q.family;
        let lambda = q.lambda;
        let kernel = move |g: f64, reg: Region, eps: f64| -> C64 {
            match fam {
                Family::F => {
                    let (p, _) = power_log(g, b, s, eps);
                    cd[0] * p
                }
                Family::G => {
                    let (p, l) = power_log(g, b, s, eps);
                    s * I / PI * (cd[1] * p + cd[0] * p * l) + lambda * cd[0] * p
                }
                Family::R => {
                    let inside = (s > 0.0 && reg == Region::Future) || (s < 0.0 && reg == Region::Past);
                    if inside {
                        2.0 * cd[0] * (b * g.ln()).exp()
                    } else {
                        c(0.0)
                    }
                }
                Family::RTilde => {
                    if reg == Region::Spacelike {
                        2.0 * cd[0] * (b * (-g).ln()).exp()
                    } else {
                        c(0.0)
                    }
                }
                _ => unreachable!(),
            }
        };
        let uses_eps = matches!(fam, Family::F | Family::G);
        let integrate = |pairer: &mut Pairer, eps: f64| -> Result<(C64, f64, f64)> {
            let mut prev: Option<C64> = None;
            for level in 0..QUAD_STEPS.len() {
                let psi = pairer.cone_psi(&psi_fn, extent, level);
                let nodes = pairer.cone_nodes(extent, level);
                let mut acc = c(0.0);
                let mut scale = 0.0;
                for i in 0..nodes.len() {
                    if psi[i] == 0.0 {
                        continue;
                    }
                    let v = kernel(nodes.gamma[i], nodes.region[i], eps) * (nodes.w[i] * psi[i]);
                    acc += v;
                    scale += v.norm();
                }
                // dx_1 dx_2 = dt dr on both half lines for n = 2; the angular
                // measure is inside psi for n = 3
                if let Some(p) = prev {
                    let diff = (acc - p).norm();
                    if diff <= QUAD_TOL * scale.max(1e-300) {
                        return Ok((acc * factor, diff, scale));
                    }
                }
                prev = Some(acc);
            }
            Err(Error::QuadratureNotConverged(format!("{} at beta = {}, eps = {eps}", fam.name(), q.beta)))
        };
        if !uses_eps {
            let (v, e, mag) = integrate(self, 0.0)?;
            return Ok(Pairing { value: v, error_estimate: e, transfers: m, magnitude: mag, ladder: vec![] });
        }
        match &q.strategy {
            Strategy::BoundaryValue => {
                let (v, e, mag) = integrate(self, 0.0)?;
                Ok(Pairing { value: v, error_estimate: e, transfers: m, magnitude: mag, ladder: vec![] })
            }
            Strategy::EpsilonLadder(ladder) => {
                let mut vals = Vec::with_capacity(ladder.len());
                let mut qerr: f64 = 0.0;
                let mut mag: f64 = 0.0;
                for &eps in ladder {
                    let (v, e, mg) = integrate(self, eps)?;
                    qerr = qerr.max(e);
                    mag = mag.max(mg);
                    vals.push((eps, v));
                }
                let (v, e) = richardson(&vals, &ladder_exponents(b, q.n))?;
                Ok(Pairing { value: v, error_estimate: e + qerr, transfers: m, magnitude: mag, ladder: vals })
            }
        }
    }

    fn pair_line(&mut self, q: &DistributionQuery, phi: &TestFunction) -> Result<Pairing> {
        if q.family == Family::TPm && is_negative_integer(q.beta) {
            return Err(Error::PoleAtBeta(format!("t_pm has a pole at beta = {}", q.beta.re)));
        }
        if matches!(q.family, Family::F1 | Family::H1) && is_negative_integer(q.beta) {
            // entire family; the transfer formula is 0/0 here, use the mean
            // value over a small circle
            const K: usize = 8;
            let delta = 0.1;
            let mut acc = c(0.0);
            let mut err: f64 = 0.0;
            let mut mag: f64 = 0.0;
            let mut ladder = vec![];
            for j in 0..K {
                let w = C64::from_polar(delta, 2.0 * PI * j as f64 / K as f64);
                let mut qj = q.clone();
                qj.beta = q.beta + w;
                let r = self.pair_line(&qj, phi)?;
                acc += r.value;
                err = err.max(r.error_estimate);
                mag = mag.max(r.magnitude);
                ladder = r.ladder;
            }
            return Ok(Pairing { value: acc / K as f64, error_estimate: err, transfers: q.transfers(), magnitude: mag, ladder });
        }
        let m = q.transfers();
        let b = q.beta + m as f64;
        if b.re <= -1.0 {
            return Err(Error::InvalidInput("Re(beta) + m must exceed -1".into()));
        }
        let psi_fn = phi.nth_derivative(0, m)?;
        let s = q.sign as f64;
        // f_beta[phi] = (-1)^m / P f_{beta+m}[phi^(m)], P = prod (beta + j)
        let mut p = c(1.0);
        let mut dlogp = c(0.0);
        for j in 1..=m {
            p *= q.beta + j as f64;
            dlogp += (q.beta + j as f64).inv();
        }
        let sign_m = if m % 2 == 1 { -1.0 } else { 1.0 };
        let extent = phi.extent();
        let fam = q.family;
        let eval = |pairer: &mut Pairer, eps: f64, want_log: bool| -> Result<(C64, f64, f64)> {
            let mut prev: Option<C64> = None;
            for level in 0..QUAD_STEPS.len() {
                let nodes = pairer.line_nodes(extent, level).clone();
                let mut acc = c(0.0);
                let mut scale = 0.0;
                for i in 0..nodes.x.len() {
                    let x = nodes.x[i];
                    let ph = psi_fn.value(&[x]);
                    if ph == 0.0 {
                        continue;
                    }
                    let k = match fam {
                        Family::TPm => {
                            if (s > 0.0) == (x > 0.0) {
                                (b * nodes.abs[i].ln()).exp()
                            } else {
                                c(0.0)
                            }
                        }
                        _ => {
                            let g = if x > 0.0 { nodes.abs[i] } else { -nodes.abs[i] };
                            let (pw, l) = power_log(g, b, s, eps);
                            if want_log {
                                pw * l
                            } else {
                                pw
                            }
                        }
                    };
                    let v = k * (nodes.w[i] * ph);
                    acc += v;
                    scale += v.norm();
                }
                if let Some(pv) = prev {
                    let diff = (acc - pv).norm();
                    if diff <= QUAD_TOL * scale.max(1e-300) {
                        return Ok((acc, diff, scale));
                    }
                }
                prev = Some(acc);
            }
            Err(Error::QuadratureNotConverged(format!("{} at beta = {}", fam.name(), q.beta)))
        };
        let combine = |f: C64, h: C64| -> C64 {
            match fam {
                Family::F1 => sign_m * f / p,
                Family::H1 => sign_m * (h / p - f * dlogp / p),
                // t_+: (-1)^m / P; t_-: 1 / P
                Family::TPm => {
                    if s > 0.0 {
                        sign_m * f / p
                    } else {
                        f / p
                    }
                }
                _ => unreachable!(),
            }
        };
        let need_log = fam == Family::H1;
        let at = |pairer: &mut Pairer, eps: f64| -> Result<(C64, f64, f64)> {
            let (f, e1, m1) = eval(pairer, eps, false)?;
            let (h, e2, m2) = if need_log { eval(pairer, eps, true)? } else { (c(0.0), 0.0, 0.0) };
            let scale = (c(1.0) / p).norm() * (1.0 + dlogp.norm());
            Ok((combine(f, h), (e1 + e2) * scale, (m1 + m2) * scale))
        };
        match (&q.strategy, fam) {
            (_, Family::TPm) | (Strategy::BoundaryValue, _) => {
                let (v, e, mag) = at(self, 0.0)?;
                Ok(Pairing { value: v, error_estimate: e, transfers: m, magnitude: mag, ladder: vec![] })
            }
            (Strategy::EpsilonLadder(ladder), _) => {
                let mut vals = Vec::new();
                let mut qerr: f64 = 0.0;
                let mut mag: f64 = 0.0;
                for &eps in ladder {
                    let (v, e, mg) = at(self, eps)?;
                    qerr = qerr.max(e);
                    mag = mag.max(mg);
                    vals.push((eps, v));
                }
                let (v, e) = richardson(&vals, &ladder_exponents(b, 1))?;
                Ok(Pairing { value: v, error_estimate: e + qerr, transfers: m, magnitude: mag, ladder: vals })
            }
        }
    }
}

pub fn pair(q: &DistributionQuery, phi: &TestFunction) -> Result<Pairing> {
    Pairer::new().pair(q, phi)
}

/// Basis terms `eps^p` (and `eps^p log eps` for repeated `p`) of the small-eps
/// expansion of a regularized pairing: analytic powers, light-cone powers
/// `b + 1 + j` and vertex powers `b + n/2 + j`.
pub fn ladder_exponents(b: C64, n: usize) -> Vec<(C64, bool)> {
    let mut ps: Vec<C64> = (1..=8).map(|k| c(k as f64)).collect();
    for j in 0..8 {
        ps.push(b + 1.0 + j as f64);
        if n >= 2 {
            ps.push(b + n as f64 / 2.0 + j as f64);
        }
    }
    ps.retain(|p| p.re > 0.0);
    ps.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
    let mut out: Vec<(C64, bool)> = Vec::new();
    for p in ps {
        if let Some(last) = out.iter().rev().find(|(q, _)| (*q - p).norm() < 1e-9) {
            if last.1 {
                continue; // third coincidence: ignore higher log powers
            }
            out.push((p, true));
        } else {
            out.push((p, false));
        }
    }
    out
}

const RICHARDSON_TERMS: usize = 4;

/// Generalized Richardson extrapolation to `eps = 0` on the smallest values.
pub fn richardson(vals: &[(f64, C64)], basis: &[(C64, bool)]) -> Result<(C64, f64)> {
    let k = RICHARDSON_TERMS.min(basis.len());
    if vals.len() < k + 2 {
        return Err(Error::InvalidInput(format!("ladder needs at least {} values", k + 2)));
    }
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let solve = |window: &[(f64, C64)]| -> C64 {
        let rows = window.len();
        let a = nalgebra::DMatrix::from_fn(rows, k + 1, |i, j| {
            if j == 0 {
                return c(1.0);
            }
            let (p, lg) = basis[j - 1];
            let e = window[i].0;
            let v = (p * e.ln()).exp();
            if lg {
                v * e.ln()
            } else {
                v
            }
        });
        let rhs = nalgebra::DVector::from_iterator(rows, window.iter().map(|w| w.1));
        a.lu().solve(&rhs).map(|x| x[0]).unwrap_or(c(f64::NAN))
    };
    let v0 = solve(&sorted[0..k + 1]);
    let v1 = solve(&sorted[1..k + 2]);
    if !v0.re.is_finite() || !v1.re.is_finite() {
        return Err(Error::QuadratureNotConverged("singular extrapolation system".into()));
    }
    Ok((v0, (v0 - v1).norm()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub identity: String,
    pub beta: C64,
    pub phi_index: usize,
    pub lhs: C64,
    pub rhs: C64,
    pub relative_deviation: f64,
    pub error_estimate: f64,
    pub pass: bool,
}

/// Rapidity of the boost used for the invariance checks.
pub const LORENTZ_CHECK_RAPIDITY: f64 = 0.7;

/// `|lhs - rhs|` relative to the largest of `|lhs|`, `|rhs|` and the weighted
/// component magnitudes, so identities between vanishing pairings are judged
/// against the size of the integrands rather than against rounding noise.
fn check(name: &str, beta: C64, idx: usize, lhs: C64, rhs: C64, parts: &[(C64, &Pairing)], tol: f64) -> IdentityCheck {
    let scale: f64 = parts.iter().map(|(w, p)| w.norm() * p.value.norm().max(p.magnitude)).sum();
    let err: f64 = parts.iter().map(|(w, p)| w.norm() * p.error_estimate).sum();
    let denom = lhs.norm().max(rhs.norm()).max(scale).max(1e-300);
    let rel = (lhs - rhs).norm() / denom;
    IdentityCheck {
        identity: name.to_string(),
        beta,
        phi_index: idx,
        lhs,
        rhs,
        relative_deviation: rel,
        error_estimate: err / denom,
        pass: rel <= tol,
    }
}

/// Evaluates the multiplication, invariance, real/imaginary part, d'Alembertian
/// and sum identities of the `F` and `G` families, plus the line relations between
/// `f` and `t_pm`, for every `beta` and test function.
pub fn identity_suite(
    betas: &[C64],
    n: usize,
    lambda: f64,
    phis: &[TestFunction],
    strategy: &Strategy,
    tol: f64,
) -> Result<Vec<IdentityCheck>> {
    let jobs: Vec<(C64, usize)> = betas.iter().flat_map(|b| (0..phis.len()).map(move |i| (*b, i))).collect();
    let results: Vec<Result<Vec<IdentityCheck>>> = jobs
        .par_iter()
        .map(|&(beta, idx)| identities_for(beta, n, lambda, &phis[idx], idx, strategy, tol))
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn identities_for(
    beta: C64,
    n: usize,
    lambda: f64,
    phi: &TestFunction,
    idx: usize,
    strategy: &Strategy,
    tol: f64,
) -> Result<Vec<IdentityCheck>> {
    let mut pr = Pairer::new();
    let mut out = Vec::new();
    let q = |fam: Family, b: C64, s: i8| DistributionQuery::new(fam, b, s, n).with_lambda(lambda).with_strategy(strategy.clone());
    let one = c(1.0);
    let gphi = phi.times_gamma();
    let bphi = phi.box_op();
    let b1 = beta + 1.0;
    let nf = n as f64;
    let mult = (2.0 * beta + 2.0) * (2.0 * beta + nf);

    for (s, tag) in [(1i8, "+"), (-1i8, "-")] {
        // gamma F_beta = (2b+2)(2b+n) F_{b+1}
        let l = pr.pair(&q(Family::F, beta, s), &gphi)?;
        let r = pr.pair(&q(Family::F, b1, s), phi)?;
        out.push(check(&format!("F(a){tag}"), beta, idx, l.value, mult * r.value, &[(one, &l), (mult, &r)], tol));
        // box F_{b+1} = F_b, left side without transfer
        let l = pr.pair(&q(Family::F, b1, s).with_transfers(0), &bphi)?;
        let r = pr.pair(&q(Family::F, beta, s), phi)?;
        out.push(check(&format!("F(f){tag}"), beta, idx, l.value, r.value, &[(one, &l), (one, &r)], tol));
        let l = pr.pair(&q(Family::G, beta, s), &gphi)?;
        let g1 = pr.pair(&q(Family::G, b1, s), phi)?;
        let f1 = pr.pair(&q(Family::F, b1, s), phi)?;
        let w = s as f64 * I / PI * (8.0 * beta + 4.0 + 2.0 * nf);
        let rhs = mult * g1.value + w * f1.value;
        out.push(check(&format!("G(a){tag}"), beta, idx, l.value, rhs, &[(one, &l), (mult, &g1), (w, &f1)], tol));
        let l = pr.pair(&q(Family::G, b1, s).with_transfers(0), &bphi)?;
        let r = pr.pair(&q(Family::G, beta, s), phi)?;
        out.push(check(&format!("G(d){tag}"), beta, idx, l.value, r.value, &[(one, &l), (one, &r)], tol));
    }
    let fp = pr.pair(&q(Family::F, beta, 1), phi)?;
    let fm = pr.pair(&q(Family::F, beta, -1), phi)?;
    let rp = pr.pair(&q(Family::R, beta, 1), phi)?;
    let rm = pr.pair(&q(Family::R, beta, -1), phi)?;
    let rt = pr.pair(&q(Family::RTilde, beta, 1), phi)?;
    let cb = cospi(beta);
    let sb = sinpi(beta);
    let rhs = rp.value + rm.value + cb * rt.value;
    let parts = [(one, &fp), (one, &fm), (one, &rp), (one, &rm), (cb, &rt)];
    out.push(check("F(d)", beta, idx, fp.value + fm.value, rhs, &parts, tol));
    let lhs = -I * (fp.value - fm.value);
    out.push(check("F(e)", beta, idx, lhs, sb * rt.value, &[(one, &fp), (one, &fm), (sb, &rt)], tol));
    if beta.im == 0.0 && beta.re == beta.re.round() {
        // the Lambda term of G contributes (Lambda - 1)(F^+ + F^-) beyond the
        // retarded and advanced parts; it vanishes where C(beta, n) does
        let gp = pr.pair(&q(Family::G, beta, 1), phi)?;
        let gm = pr.pair(&q(Family::G, beta, -1), phi)?;
        let lm = c(lambda - 1.0);
        let rhs = rp.value + rm.value + lm * (fp.value + fm.value);
        let parts = [(one, &gp), (one, &gm), (one, &rp), (one, &rm), (lm, &fp), (lm, &fm)];
        out.push(check("G(j)", beta, idx, gp.value + gm.value, rhs, &parts, tol));
    }
    let boosted = phi.boosted(LORENTZ_CHECK_RAPIDITY)?;
    for fam in [Family::F, Family::G] {
        let a = pr.pair(&q(fam, beta, 1), phi)?;
        let b = pr.pair(&q(fam, beta, 1), &boosted)?;
        out.push(check(&format!("{}(c)", fam.name()), beta, idx, a.value, b.value, &[(one, &a), (one, &b)], tol));
    }
    if let Ok(phi1) = phi.restrict_to_time_axis() {
        let q1 = |fam: Family, s: i8| DistributionQuery::new(fam, beta, s, 1).with_strategy(strategy.clone());
        let fp = pr.pair(&q1(Family::F1, 1), &phi1)?;
        let fm = pr.pair(&q1(Family::F1, -1), &phi1)?;
        let tp = pr.pair(&q1(Family::TPm, 1), &phi1)?;
        let tm = pr.pair(&q1(Family::TPm, -1), &phi1)?;
        let rhs = 2.0 * tp.value + 2.0 * cb * tm.value;
        let parts = [(one, &fp), (one, &fm), (c(2.0), &tp), (2.0 * cb, &tm)];
        out.push(check("line(1)", beta, idx, fp.value + fm.value, rhs, &parts, tol));
        let lhs = -I * (fp.value - fm.value);
        out.push(check("line(2)", beta, idx, lhs, 2.0 * sb * tm.value, &[(one, &fp), (one, &fm), (2.0 * sb, &tm)], tol));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(n: usize) -> TestFunction {
        TestFunction::gaussian_poly(vec![0.0; n], 1.0, &[]).unwrap()
    }

    #[test]
    fn structure_constants() {
        assert!((coeff_c(c(0.0), 2) - c(0.25)).norm() < 1e-15);
        assert!((coeff_c(c(1.0), 2) - c(1.0 / 16.0)).norm() < 1e-15);
        assert_eq!(coeff_c(c(-1.0), 3), c(0.0));
        assert_eq!(coeff_c(c(-2.0), 2), c(0.0));
        let want = (2.0 * EULER_GAMMA - 4f64.ln()) * 0.25;
        assert!((dcoeff_c(c(0.0), 2) - c(want)).norm() < 1e-14);
        for b in -3..=3 {
            for n in [2usize, 4, 6] {
                let a = dcoeff_c(c(b as f64), n);
                let closed = dcoeff_c_integer(b, n).unwrap();
                assert!((a - closed).norm() < 1e-13 * (1.0 + a.norm()), "b={b} n={n} {a} {closed}");
            }
        }
    }

    #[test]
    fn derivatives_of_c_match_differences() {
        let h = 1e-4;
        for b in [c(-1.0), c(0.3), C64::new(-2.5, 0.4)] {
            for n in [2usize, 3] {
                let d = coeff_c_derivs(b, n);
                let fd1 = (coeff_c(b + h, n) - coeff_c(b - h, n)) / (2.0 * h);
                let fd2 = (coeff_c(b + h, n) - 2.0 * coeff_c(b, n) + coeff_c(b - h, n)) / (h * h);
                assert!((d[1] - fd1).norm() < 1e-7 * (1.0 + d[1].norm()), "{b} {n} {} {fd1}", d[1]);
                assert!((d[2] - fd2).norm() < 1e-5 * (1.0 + d[2].norm()));
            }
        }
    }

    #[test]
    fn polynomial_f_pairing() {
        // f_2 is t^2: int t^2 e^{-t^2/2} dt = sqrt(2 pi)
        let q = DistributionQuery::new(Family::F1, c(2.0), 1, 1).with_strategy(Strategy::BoundaryValue);
        let r = pair(&q, &gauss(1)).unwrap();
        assert!((r.value - c((2.0 * PI).sqrt())).norm() < 1e-10);
        let q = DistributionQuery::new(Family::F1, c(2.0), -1, 1);
        let r = pair(&q, &gauss(1)).unwrap();
        assert!((r.value - c((2.0 * PI).sqrt())).norm() < 1e-8, "{:?}", r.value);
    }

    #[test]
    fn line_pole_and_entire_families() {
        let q = DistributionQuery::new(Family::TPm, c(-2.0), 1, 1);
        assert!(matches!(pair(&q, &gauss(1)), Err(Error::PoleAtBeta(_))));
        // (t + i0)^{-1} = pv 1/t - i pi delta; pv part vanishes for even phi
        let q = DistributionQuery::new(Family::F1, c(-1.0), 1, 1).with_strategy(Strategy::BoundaryValue);
        let r = pair(&q, &gauss(1)).unwrap();
        assert!((r.value - C64::new(0.0, -PI)).norm() < 1e-8, "{}", r.value);
    }

    #[test]
    fn delta_identities() {
        for strategy in [Strategy::BoundaryValue, Strategy::default()] {
            let q = DistributionQuery::new(Family::F, c(-1.5), 1, 3).with_strategy(strategy.clone());
            let r = pair(&q, &gauss(3)).unwrap();
            assert!((r.value - c(1.0)).norm() < 1e-6, "{:?} {}", strategy, r.value);
            let q = DistributionQuery::new(Family::G, c(-1.0), -1, 2).with_lambda(0.7).with_strategy(strategy.clone());
            let r = pair(&q, &gauss(2)).unwrap();
            assert!((r.value - c(1.0)).norm() < 1e-6, "{:?} {}", strategy, r.value);
        }
    }

    #[test]
    fn lorentz_invariance() {
        let phi = TestFunction::gaussian_poly(vec![0.2, -0.1], 0.8, &[(vec![0, 0], 1.0), (vec![1, 0], 0.5)]).unwrap();
        let q = DistributionQuery::new(Family::F, c(0.5), 1, 2).with_strategy(Strategy::BoundaryValue);
        let a = pair(&q, &phi).unwrap().value;
        let b = pair(&q, &phi.boosted(0.7).unwrap()).unwrap().value;
        assert!((a - b).norm() < 1e-8 * a.norm(), "{a} {b}");
    }

    #[test]
    fn restriction_is_exact() {
        let phi = TestFunction::gaussian_poly(vec![0.3, -0.2], 0.8, &[(vec![0, 0], 1.0), (vec![1, 2], 0.5)]).unwrap();
        let r = phi.restrict_to_time_axis().unwrap();
        for t in [-1.0, 0.0, 0.4, 1.3] {
            assert!((r.value(&[t]) - phi.value(&[t, 0.0])).abs() < 1e-12);
        }
    }
}
