//! Hadamard coefficients of `P = box^nabla + B` on flat space, with
//! `box = d_1^2 - d_2^2 - ... - d_n^2` and `nabla = d + i A` for an abelian
//! connection `A`.
//!
//! The transport equations read, along the straight line from `y` to `z`,
//!
//! ```text
//! (z - y) . nabla V_k + k V_k = -k P V_{k-1},    V_0(y, y) = 1,
//! ```
//!
//! so with the parallel transport `Pi(z) = exp(-i int_0^1 (z-y) . A(y + s(z-y)) ds)`
//!
//! ```text
//! V_0(z) = Pi(z),
//! V_k(z) = -k int_0^1 sigma^{k-1} Pi(z) Pi(w_sigma)^{-1} (P V_{k-1})(w_sigma) dsigma,
//! w_sigma = y + sigma (z - y).
//! ```
//!
//! `P V_{k-1}` needs two derivatives of `V_{k-1}`, so each level is carried as
//! a Taylor jet in the displacement of `z` and the quadrature acts on jets.
//!
//! For the twisted cylinder, `nabla_t = d_t`, `nabla_theta = d_theta + i a(t)`,
//! `D_L = nabla_t + nabla_theta` and `D_R = nabla_t - nabla_theta`. Then
//! `D_R D_L = box^nabla + [nabla_t, nabla_theta] = box^nabla + i a'(t)` and
//! `D_L D_R = box^nabla - i a'(t)`, which fixes `B_L = i a'` and `B_R = -i a'`.

pub mod jet;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::constants::INDEX_DENSITY_PHASE;
use crate::distributions::dcoeff_ctilde;
use crate::error::{Error, Result};
use crate::index::gauss_legendre_8;
use crate::models::{CylinderModel, GaugePath};
use crate::special::EULER_GAMMA;
pub use jet::{CMat, MJet, SJet};

/// Scalar coefficient functions with closed-form Taylor expansions.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Constant(C64),
    /// `constant + gradient . x`
    Affine { constant: C64, gradient: Vec<f64> },
    /// `factor * (d/dx_axis)^derivative path(x_axis)`
    Path { path: GaugePath, axis: usize, derivative: usize, factor: C64 },
}

impl ScalarField {
    /// Taylor jet of `f(x + s h)` in `h`.
    pub fn jet(&self, n: usize, x: &[f64], s: f64, d: usize) -> SJet {
        match self {
            ScalarField::Constant(c) => SJet::constant(n, d, *c),
            ScalarField::Affine { constant, gradient } => {
                let v: f64 = gradient.iter().zip(x).map(|(g, xi)| g * xi).sum();
                let mut j = SJet::constant(n, d, constant + v);
                if d > 0 {
                    for (i, g) in gradient.iter().enumerate() {
                        j.c[1 + i] = C64::new(g * s, 0.0);
                    }
                }
                j
            }
            ScalarField::Path { path, axis, derivative, factor } => {
                let m = *derivative;
                let ser = path.series(x[*axis], d + m).0;
                let mut j = SJet::constant(n, d, C64::new(0.0, 0.0));
                let mut e = vec![0u32; n];
                for k in 0..=d {
                    // coefficient of (t - t0)^k in the m-th derivative
                    let mut f = 1.0;
                    for q in 0..m {
                        f *= (k + m - q) as f64;
                    }
                    e[*axis] = k as u32;
                    let idx = j.basis.exps.iter().position(|x| *x == e).expect("monomial in basis");
                    j.c[idx] = ser[k + m] * f * s.powi(k as i32) * factor;
                }
                j
            }
        }
    }

    /// Points along `x(sigma) = y + sigma v`, `sigma` in `(0, 1)`, where the
    /// field stops being analytic.
    fn breakpoints(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        let ScalarField::Path { path, axis, .. } = self else {
            return vec![];
        };
        let Some((a, b)) = path.ramp() else {
            return vec![];
        };
        if v[*axis] == 0.0 {
            return vec![];
        }
        [a, b].iter().map(|e| (e - y[*axis]) / v[*axis]).filter(|s| *s > 0.0 && *s < 1.0).collect()
    }
}

/// `P = box^nabla + B` on flat `R^n` acting on `C^rank`-valued functions.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatOperatorSpec {
    pub n: usize,
    pub rank: usize,
    /// `B = sum M_j f_j(x)`.
    pub potential: Vec<(CMat, ScalarField)>,
    /// Components `A_mu` of an abelian connection, `nabla_mu = d_mu + i A_mu`.
    pub connection: Option<Vec<ScalarField>>,
}

impl FlatOperatorSpec {
    pub fn constant_potential(n: usize, b: CMat) -> Self {
        Self { n, rank: b.nrows(), potential: vec![(b, ScalarField::Constant(C64::new(1.0, 0.0)))], connection: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.rank == 0 {
            return Err(Error::InvalidInput("n and rank must be positive".into()));
        }
        for (m, _) in &self.potential {
            if m.nrows() != self.rank || m.ncols() != self.rank {
                return Err(Error::InvalidInput("potential matrix has wrong size".into()));
            }
        }
        if let Some(a) = &self.connection {
            if a.len() != self.n {
                return Err(Error::InvalidInput("connection needs one component per coordinate".into()));
            }
        }
        Ok(())
    }

    /// `(P_L, P_R)` for the twisted cylinder, coordinates `(t, theta)`.
    pub fn cylinder(model: &CylinderModel) -> Result<(Self, Self)> {
        if !model.base.potential.is_empty() {
            return Err(Error::InvalidInput("Hadamard data is available for flux-only circle operators".into()));
        }
        let r = model.base.rank;
        let path = model.gauge_path.clone();
        let b = |sign: f64| ScalarField::Path { path: path.clone(), axis: 0, derivative: 1, factor: C64::new(0.0, sign) };
        let conn = Some(vec![
            ScalarField::Constant(C64::new(0.0, 0.0)),
            ScalarField::Path { path: path.clone(), axis: 0, derivative: 0, factor: C64::new(1.0, 0.0) },
        ]);
        let id = CMat::identity(r, r);
        let left = Self { n: 2, rank: r, potential: vec![(id.clone(), b(1.0))], connection: conn.clone() };
        let right = Self { n: 2, rank: r, potential: vec![(id, b(-1.0))], connection: conn };
        Ok((left, right))
    }

    fn metric(&self, mu: usize) -> f64 {
        if mu == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn potential_jet(&self, x: &[f64], s: f64, d: usize) -> MJet {
        let mut out = MJet::constant(self.n, d, CMat::zeros(self.rank, self.rank));
        for (m, f) in &self.potential {
            let fj = f.jet(self.n, x, s, d);
            for (o, v) in out.c.iter_mut().zip(&fj.c) {
                if *v != C64::new(0.0, 0.0) {
                    *o += m * *v;
                }
            }
        }
        out
    }

    /// `P V` for a jet `V` of degree `d + 2` at `x`; the result has degree `d`.
    fn apply(&self, v: &MJet, x: &[f64]) -> MJet {
        let d = v.degree() - 2;
        let mut out = self.potential_jet(x, 1.0, d).mul(&v.truncate(d));
        let a: Option<Vec<SJet>> = self.connection.as_ref().map(|c| c.iter().map(|f| f.jet(self.n, x, 1.0, d + 1)).collect());
        let i = C64::new(0.0, 1.0);
        for mu in 0..self.n {
            // nabla_mu V = d_mu V + i A_mu V
            let mut nv = v.deriv(mu);
            if let Some(a) = &a {
                nv.add_assign(&v.truncate(d + 1).mul_scalar(&a[mu]), i);
            }
            let mut nnv = nv.deriv(mu);
            if let Some(a) = &a {
                nnv.add_assign(&nv.truncate(d).mul_scalar(&a[mu].truncate(d)), i);
            }
            out.add_assign(&nnv, C64::new(self.metric(mu), 0.0));
        }
        out
    }

    /// `(z - y) . A(z)` as a jet in the displacement of `z`.
    fn radial_connection(&self, y: &[f64], z: &[f64], d: usize) -> Option<SJet> {
        let a = self.connection.as_ref()?;
        let mut out = SJet::constant(self.n, d, C64::new(0.0, 0.0));
        for mu in 0..self.n {
            let lin = SJet::coordinate(self.n, d, mu, z[mu] - y[mu]);
            out.add_assign(&lin.mul(&a[mu].jet(self.n, z, 1.0, d)), C64::new(1.0, 0.0));
        }
        Some(out)
    }

    fn breakpoints(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0, 1.0];
        for (_, f) in &self.potential {
            out.extend(f.breakpoints(y, v));
        }
        for f in self.connection.iter().flatten() {
            out.extend(f.breakpoints(y, v));
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(q: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(q);
    for i in 0..q {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

struct Solver<'a> {
    spec: &'a FlatOperatorSpec,
    y: Vec<f64>,
    rule: Vec<(f64, f64)>,
}

impl Solver<'_> {
    fn pieces(&self, z: &[f64]) -> Vec<(f64, f64)> {
        let v: Vec<f64> = z.iter().zip(&self.y).map(|(a, b)| a - b).collect();
        let bp = self.spec.breakpoints(&self.y, &v);
        bp.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// `Phi(z + h) = int_0^1 (z + h - y) . A(y + s(z + h - y)) ds`.
    fn phase(&self, z: &[f64], d: usize) -> Option<SJet> {
        let a = self.spec.connection.as_ref()?;
        let n = self.spec.n;
        let v: Vec<f64> = z.iter().zip(&self.y).map(|(a, b)| a - b).collect();
        let mut acc = SJet::constant(n, d, C64::new(0.0, 0.0));
        for (lo, hi) in self.pieces(z) {
            for &(x, w) in &self.rule {
                let s = lo + (hi - lo) * x;
                let p: Vec<f64> = self.y.iter().zip(&v).map(|(y, v)| y + s * v).collect();
                for mu in 0..n {
                    let lin = SJet::coordinate(n, d, mu, v[mu]);
                    let term = lin.mul(&a[mu].jet(n, &p, s, d));
                    acc.add_assign(&term, C64::new(w * (hi - lo), 0.0));
                }
            }
        }
        Some(acc)
    }

    fn transport_factor(&self, z: &[f64], d: usize) -> Option<SJet> {
        self.phase(z, d).map(|p| p.scale(C64::new(0.0, -1.0)).exp())
    }

    /// Jet of `V_k(z + h, y)` of degree `d`.
    fn v(&self, k: usize, z: &[f64], d: usize) -> MJet {
        let (n, r) = (self.spec.n, self.spec.rank);
        if k == 0 {
            return match self.transport_factor(z, d) {
                Some(p) => p.to_matrix(r),
                None => MJet::constant(n, d, CMat::identity(r, r)),
            };
        }
        let phase_z = self.phase(z, d);
        let mut acc = MJet::constant(n, d, CMat::zeros(r, r));
        for (lo, hi) in self.pieces(z) {
            for &(x, w) in &self.rule {
                let sigma = lo + (hi - lo) * x;
                let p: Vec<f64> = self.y.iter().zip(z).map(|(y, z)| y + sigma * (z - y)).collect();
                let pv = self.spec.apply(&self.v(k - 1, &p, d + 2), &p).rescale(sigma);
                let term = match &phase_z {
                    Some(pz) => {
                        let pw = self.phase(&p, d).expect("connection present").rescale(sigma);
                        let e = pz.add(&pw.scale(C64::new(-1.0, 0.0))).scale(C64::new(0.0, -1.0)).exp();
                        pv.mul_scalar(&e)
                    }
                    None => pv,
                };
                let f = -(k as f64) * sigma.powi(k as i32 - 1) * w * (hi - lo);
                acc.add_assign(&term, C64::new(f, 0.0));
            }
        }
        acc
    }
}

const TRANSPORT_RULES: [usize; 3] = [8, 16, 32];
pub const TRANSPORT_TOL: f64 = 1e-11;

/// Jets of `V_0, ..., V_kmax` at `x + h` (base point `y`), each of degree `d`,
/// with quadrature refined until two rules agree.
fn transport_jets(spec: &FlatOperatorSpec, x: &[f64], y: &[f64], k_max: usize, d: usize) -> Result<Vec<MJet>> {
    spec.validate()?;
    if x.len() != spec.n || y.len() != spec.n {
        return Err(Error::InvalidInput("points have wrong dimension".into()));
    }
    let mut prev: Option<Vec<MJet>> = None;
    for q in TRANSPORT_RULES {
        let s = Solver { spec, y: y.to_vec(), rule: gauss_legendre(q) };
        let cur: Vec<MJet> = (0..=k_max).map(|k| s.v(k, x, d)).collect();
        if let Some(p) = &prev {
            let ok = cur.iter().zip(p).all(|(a, b)| {
                let diff = a.add(&b.scale(C64::new(-1.0, 0.0))).max_norm();
                diff <= TRANSPORT_TOL * (1.0 + a.max_norm())
            });
            if ok {
                return Ok(cur);
            }
        }
        prev = Some(cur);
    }
    Err(Error::QuadratureNotConverged(format!("transport coefficients between {x:?} and {y:?}")))
}

/// `V_0(x, y), ..., V_kmax(x, y)`.
pub fn solve_transport(spec: &FlatOperatorSpec, x: &[f64], y: &[f64], k_max: usize) -> Result<Vec<CMat>> {
    Ok(transport_jets(spec, x, y, k_max, 0)?.into_iter().map(|j| j.c[0].clone()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HadamardDiagonal {
    pub x: Vec<f64>,
    pub values: Vec<CMat>,
}

/// Taylor jets about `x` of `V_k(., x)` from the homogeneous-degree form of
/// the transport equations,
/// `(d + k) V_{k,d} + i [(z-x).A V_k]_d = -k [P V_{k-1}]_d`.
fn diagonal_jets(spec: &FlatOperatorSpec, x: &[f64], k_max: usize, d: usize) -> Result<Vec<MJet>> {
    spec.validate()?;
    if x.len() != spec.n {
        return Err(Error::InvalidInput("point has wrong dimension".into()));
    }
    let (n, r) = (spec.n, spec.rank);
    let i = C64::new(0.0, 1.0);
    let mut out: Vec<MJet> = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let deg = d + 2 * (k_max - k);
        let ra = spec.radial_connection(x, x, deg);
        let source = if k == 0 { None } else { Some(spec.apply(&out[k - 1], x)) };
        let mut v = MJet::constant(n, deg, CMat::zeros(r, r));
        if k == 0 {
            v.c[0] = CMat::identity(r, r);
        }
        for m in 0..=deg {
            if k == 0 && m == 0 {
                continue;
            }
            let mut rhs = MJet::constant(n, deg, CMat::zeros(r, r));
            if let Some(s) = &source {
                rhs.add_assign(s, C64::new(-(k as f64), 0.0));
            }
            if let Some(a) = &ra {
                rhs.add_assign(&v.mul_scalar(a), -i);
            }
            let part = rhs.homogeneous(m);
            v.add_assign(&part, C64::new(1.0 / (m + k) as f64, 0.0));
        }
        out.push(v);
    }
    Ok(out.into_iter().map(|j| j.truncate(d)).collect())
}

/// `V_k(x, x)` for `k <= k_max`.
pub fn diagonal_coefficients(spec: &FlatOperatorSpec, x: &[f64], k_max: usize) -> Result<HadamardDiagonal> {
    let jets = diagonal_jets(spec, x, k_max, 0)?;
    Ok(HadamardDiagonal { x: x.to_vec(), values: jets.into_iter().map(|j| j.c[0].clone()).collect() })
}

/// Largest relative residual of the transport equations at `samples` points
/// of the segment from `y` to `x`, for `1 <= k <= k_max`.
pub fn transport_residual(spec: &FlatOperatorSpec, x: &[f64], y: &[f64], k_max: usize, samples: usize) -> Result<f64> {
    let i = C64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for j in 1..=samples {
        let s = j as f64 / samples as f64;
        let z: Vec<f64> = y.iter().zip(x).map(|(y, x)| y + s * (x - y)).collect();
        let jets = transport_jets(spec, &z, y, k_max, 2)?;
        let ra = spec.radial_connection(y, &z, 0);
        for k in 1..=k_max {
            let v = &jets[k];
            let mut lhs = v.c[0].clone() * C64::new(k as f64, 0.0);
            for mu in 0..spec.n {
                lhs += v.deriv(mu).c[0].clone() * C64::new(z[mu] - y[mu], 0.0);
            }
            if let Some(a) = &ra {
                lhs += v.c[0].clone() * (i * a.c[0]);
            }
            let source = spec.apply(&jets[k - 1], &z).c[0].clone() * C64::new(k as f64, 0.0);
            let res = (&lhs + &source).norm();
            let scale = source.norm().max(lhs.norm()).max(1e-300);
            worst = worst.max(res / scale);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexDensity {
    /// `(tr V_{R,1} - tr V_{L,1}) / 4 pi`.
    pub raw: C64,
    /// `Re(INDEX_DENSITY_PHASE * raw)`.
    pub density: f64,
}

/// Local index density of the twisted cylinder at `x = (t, theta)`.
pub fn index_density(model: &CylinderModel, x: &[f64]) -> Result<IndexDensity> {
    if x.len() != 2 {
        return Err(Error::DimensionUnsupported(x.len()));
    }
    let (l, r) = FlatOperatorSpec::cylinder(model)?;
    let vl = diagonal_coefficients(&l, x, 1)?;
    let vr = diagonal_coefficients(&r, x, 1)?;
    let raw = (vr.values[1].trace() - vl.values[1].trace()) / (4.0 * PI);
    Ok(IndexDensity { raw, density: (INDEX_DENSITY_PHASE * raw).re })
}

/// `int_M delta J^- dV` over `[t_minus, t_plus] x S^1`, raw and calibrated.
pub fn integrated_index_density(model: &CylinderModel) -> Result<(C64, f64)> {
    let (a, b) = match model.gauge_path.ramp() {
        Some(r) => r,
        None => (model.t_minus, model.t_plus),
    };
    let mut err = None;
    let f = |t: f64| match index_density(model, &[t, 0.0]) {
        Ok(v) => v.raw,
        Err(e) => {
            err.get_or_insert(e.to_string());
            C64::new(0.0, 0.0)
        }
    };
    // the density does not depend on theta
    let cell = std::cell::RefCell::new(f);
    let raw = gauss_legendre_8(&|t| (cell.borrow_mut())(t), a, b, 64) * (2.0 * PI);
    if let Some(e) = err {
        return Err(Error::InvalidInput(e));
    }
    Ok((raw, (INDEX_DENSITY_PHASE * raw).re))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityCoefficients {
    pub a_tilde_0: C64,
    pub a_tilde_1: C64,
    pub c_tilde: C64,
}

/// Coefficients of `i (a_0 + a_1 / t + c log|t|)` in the small-`t` expansion of
/// the traced local Feynman kernel at `(0, y)`, `n = 2`.
pub fn singularity_coefficients(model: &CylinderModel, y: &[f64], lambda: f64) -> Result<SingularityCoefficients> {
    if y.len() != 2 {
        return Err(Error::DimensionUnsupported(y.len()));
    }
    let (l, _) = FlatOperatorSpec::cylinder(model)?;
    let v0 = &diagonal_jets(&l, y, 0, 1)?[0];
    let a = l.connection.as_ref().expect("cylinder has a connection");
    // D_L V_0 = (nabla_t + nabla_theta) V_0 at the diagonal, then o n-slash = i
    let mut dl = CMat::zeros(l.rank, l.rank);
    for mu in 0..2 {
        let amu = a[mu].jet(2, y, 1.0, 0).c[0];
        dl += v0.deriv(mu).c[0].clone() + v0.c[0].clone() * (C64::new(0.0, 1.0) * amu);
    }
    let nslash = C64::new(0.0, 1.0);
    let c_tilde = (dl * nslash).trace() / PI;
    let a0 = (EULER_GAMMA - 2f64.ln() - C64::new(0.0, PI * (lambda - 1.0) / 2.0)) * c_tilde;
    let a1 = v0.c[0].trace() / (4.0 * PI) * dcoeff_ctilde(C64::new(-1.0, 0.0), 2, 2.0 * lambda);
    Ok(SingularityCoefficients { a_tilde_0: a0, a_tilde_1: a1, c_tilde })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmat(rows: &[&[f64]]) -> CMat {
        CMat::from_fn(rows.len(), rows[0].len(), |i, j| C64::new(rows[i][j], 0.0))
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let r = gauss_legendre(5);
        let s: f64 = r.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 0.1).abs() < 1e-15);
    }

    #[test]
    fn constant_potential_powers() {
        let b = cmat(&[&[0.3, 0.1], &[-0.2, 0.5]]);
        let spec = FlatOperatorSpec::constant_potential(2, b.clone());
        let diag = diagonal_coefficients(&spec, &[0.1, 0.2], 3).unwrap();
        let off = solve_transport(&spec, &[0.4, -0.3], &[0.1, 0.2], 3).unwrap();
        let mut p = CMat::identity(2, 2);
        for k in 0..=3 {
            assert!((&diag.values[k] - &p).norm() < 1e-13);
            assert!((&off[k] - &p).norm() < 1e-12);
            p = -&b * p;
        }
    }

    #[test]
    fn free_operator_has_trivial_coefficients() {
        let spec = FlatOperatorSpec::constant_potential(2, CMat::zeros(1, 1));
        let v = solve_transport(&spec, &[1.0, 0.5], &[0.0, 0.0], 3).unwrap();
        assert!((v[0][(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        for vk in &v[1..] {
            assert!(vk.norm() < 1e-15);
        }
    }

    #[test]
    fn linear_potential_first_coefficient() {
        let spec = FlatOperatorSpec {
            n: 2,
            rank: 2,
            potential: vec![(cmat(&[&[1.0, 0.0], &[0.0, 0.0]]), ScalarField::Affine { constant: C64::new(0.0, 0.0), gradient: vec![1.0, 0.0] })],
            connection: None,
        };
        let x = [0.7, -0.1];
        let diag = diagonal_coefficients(&spec, &x, 1).unwrap();
        assert!((diag.values[1][(0, 0)] + C64::new(0.7, 0.0)).norm() < 1e-14);
        // off-diagonal limit
        for h in [1e-3, 1e-4] {
            let off = solve_transport(&spec, &[x[0] + h, x[1] + 0.5 * h], &x, 1).unwrap();
            assert!((&off[1] - &diag.values[1]).norm() < 2.0 * h);
        }
    }

    #[test]
    fn twisted_cylinder_transport() {
        let model = CylinderModel::smoothstep(0.3, 1.3, 4.0, 8);
        let (l, r) = FlatOperatorSpec::cylinder(&model).unwrap();
        for spec in [&l, &r] {
            let res = transport_residual(spec, &[2.3, 0.4], &[1.6, -0.2], 2, 4).unwrap();
            assert!(res < 1e-8, "{res}");
        }
        // V_1(x, x) = -B
        let x = [2.0, 0.3];
        let d = diagonal_coefficients(&l, &x, 1).unwrap();
        let want = -C64::new(0.0, 1.0) * model.gauge_path.derivative(2.0);
        assert!((d.values[1][(0, 0)] - want).norm() < 1e-12);
        // off-diagonal solver approaches the diagonal value
        let off = solve_transport(&l, &[2.0 + 1e-4, 0.3 - 1e-4], &x, 1).unwrap();
        assert!((off[1][(0, 0)] - want).norm() < 1e-3);
    }

    #[test]
    fn time_translation_on_autonomous_model() {
        let mut model = CylinderModel::smoothstep(0.3, 0.3, 4.0, 8);
        model.gauge_path = GaugePath::Constant(C64::new(0.7, 0.0));
        let (l, _) = FlatOperatorSpec::cylinder(&model).unwrap();
        let a = solve_transport(&l, &[1.3, 0.5], &[0.9, 0.1], 2).unwrap();
        let b = solve_transport(&l, &[2.3, 0.5], &[1.9, 0.1], 2).unwrap();
        let c = solve_transport(&l, &[2.3, 1.5], &[1.9, 1.1], 2).unwrap();
        for k in 0..=2 {
            assert!((&a[k] - &b[k]).norm() < 1e-10);
            assert!((&a[k] - &c[k]).norm() < 1e-10);
        }
        // V_0 is the holonomy phase along the segment
        let want = (-C64::new(0.0, 1.0) * 0.4 * 0.7).exp();
        assert!((a[0][(0, 0)] - want).norm() < 1e-13);
    }

    #[test]
    fn index_density_integrates_to_flux() {
        let model = CylinderModel::smoothstep(0.3, 1.3, 4.0, 8);
        let (raw, dens) = integrated_index_density(&model).unwrap();
        assert!((raw - C64::new(0.0, 1.0)).norm() < 1e-10, "{raw}");
        assert!((dens + 1.0).abs() < 1e-10);
        let flat = index_density(&CylinderModel::smoothstep(0.3, 0.3, 4.0, 8), &[2.0, 0.0]).unwrap();
        assert_eq!(flat.density, 0.0);
    }

    #[test]
    fn singularity_coefficients_untwisted() {
        let model = CylinderModel::smoothstep(0.3, 1.3, 4.0, 8);
        let s = singularity_coefficients(&model, &[2.0, 0.0], 0.5).unwrap();
        assert!(s.c_tilde.norm() < 1e-14);
        assert!(s.a_tilde_0.norm() < 1e-14);
        let h = 1e-4;
        let fd = (crate::distributions::coeff_ctilde(C64::new(-1.0 + h, 0.0), 2, 1.0)
            - crate::distributions::coeff_ctilde(C64::new(-1.0 - h, 0.0), 2, 1.0))
            / (2.0 * h);
        assert!((s.a_tilde_1 - fd / (4.0 * PI)).norm() < 1e-8);
    }
}
