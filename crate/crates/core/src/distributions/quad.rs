//! Tanh-sinh rules and the light-cone adapted node sets used for pairings.

use std::f64::consts::{FRAC_PI_2, PI};

use super::testfn::{Envelope, TestFunction};

/// Node of a tanh-sinh rule on `[a, b]` with exact distances to both ends.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: f64,
    pub from_a: f64,
    pub from_b: f64,
    pub w: f64,
}

/// Tanh-sinh rule with step `h` on `[a, b]`.
pub fn tanh_sinh(a: f64, b: f64, h: f64) -> Vec<Node> {
    let len = b - a;
    let kmax = (4.0 / h).ceil() as i64;
    let mut out = Vec::with_capacity(2 * kmax as usize + 1);
    for k in -kmax..=kmax {
        let s = k as f64 * h;
        let u = FRAC_PI_2 * s.sinh();
        let ch = u.cosh();
        let w = 0.5 * len * h * FRAC_PI_2 * s.cosh() / (ch * ch);
        if !(w > 1e-40 * len) {
            continue;
        }
        let from_a = len / (1.0 + (-2.0 * u).exp());
        let from_b = len / (1.0 + (2.0 * u).exp());
        if from_a <= 0.0 || from_b <= 0.0 {
            continue;
        }
        let x = if from_a < from_b { a + from_a } else { b - from_b };
        out.push(Node { x, from_a, from_b, w });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Future,
    Past,
    Spacelike,
}

/// Nodes in `(t, r)` with `r = |x_spatial|`, the `t` integral split at `+-r`.
/// `gamma = t^2 - r^2` is computed from endpoint distances so it keeps full
/// relative accuracy next to the cone.
#[derive(Debug, Clone)]
pub struct ConeNodes {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub gamma: Vec<f64>,
    pub w: Vec<f64>,
    pub region: Vec<Region>,
}

impl ConeNodes {
    pub fn new(extent: f64, h: f64) -> Self {
        let big = extent;
        let mut s = ConeNodes { t: vec![], r: vec![], gamma: vec![], w: vec![], region: vec![] };
        for rn in tanh_sinh(0.0, big, h) {
            let r = rn.x;
            let mut push = |t: f64, g: f64, w: f64, reg: Region| {
                s.t.push(t);
                s.r.push(r);
                s.gamma.push(g);
                s.w.push(w * rn.w);
                s.region.push(reg);
            };
            for n in tanh_sinh(r, big, h) {
                push(n.x, n.from_a * (n.from_a + 2.0 * r), n.w, Region::Future);
            }
            for n in tanh_sinh(-big, -r, h) {
                push(n.x, n.from_b * (n.from_b + 2.0 * r), n.w, Region::Past);
            }
            for n in tanh_sinh(-r, r, h) {
                push(n.x, -n.from_a * n.from_b, n.w, Region::Spacelike);
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Values of the angular average `Psi(t, r)` times the measure factor:
    /// `phi(t, r) + phi(t, -r)` for `n = 2` and `r int phi dtheta` for `n = 3`.
    pub fn psi(&self, phi: &TestFunction) -> Vec<f64> {
        let n = phi.dim();
        if n == 3 {
            if let Some(v) = self.psi_gaussian_3(phi) {
                return v;
            }
        }
        (0..self.len())
            .map(|i| {
                let (t, r) = (self.t[i], self.r[i]);
                match n {
                    2 => phi.value(&[t, r]) + phi.value(&[t, -r]),
                    3 => {
                        const M: usize = 48;
                        let mut acc = 0.0;
                        for j in 0..M {
                            let th = 2.0 * PI * j as f64 / M as f64;
                            acc += phi.value(&[t, r * th.cos(), r * th.sin()]);
                        }
                        acc * 2.0 * PI / M as f64 * r
                    }
                    _ => unreachable!("cone nodes are built for n = 2, 3"),
                }
            })
            .collect()
    }
}

impl ConeNodes {
    /// Fast path for untransformed Gaussian envelopes in three dimensions: per
    /// `r` node, the angular integral of each power of `t - c_0` is computed
    /// once, so `Psi(t, r)` becomes a polynomial in `t` times a Gaussian.
    fn psi_gaussian_3(&self, phi: &TestFunction) -> Option<Vec<f64>> {
        let Envelope::Gaussian { width } = phi.envelope() else {
            return None;
        };
        if phi.is_transformed() {
            return None;
        }
        const M: usize = 48;
        let c = phi.center();
        let w2 = width * width;
        let perp = c[1] * c[1] + c[2] * c[2];
        let deg = phi.terms().keys().map(|(a, _)| a[0]).max().unwrap_or(0) as usize;
        let trig: Vec<(f64, f64)> = (0..M).map(|j| (2.0 * PI * j as f64 / M as f64).sin_cos()).collect();
        let mut out = Vec::with_capacity(self.len());
        let mut cache_r = f64::NAN;
        let mut coeffs = vec![0.0; deg + 1];
        for i in 0..self.len() {
            let (t, r) = (self.t[i], self.r[i]);
            if r != cache_r {
                cache_r = r;
                coeffs.iter_mut().for_each(|v| *v = 0.0);
                for &(sn, cs) in &trig {
                    let (y1, y2) = (r * cs - c[1], r * sn - c[2]);
                    let e = (r * (c[1] * cs + c[2] * sn) / w2).exp();
                    for ((a, _), coef) in phi.terms() {
                        coeffs[a[0] as usize] += coef * y1.powi(a[1] as i32) * y2.powi(a[2] as i32) * e;
                    }
                }
                let f = 2.0 * PI / M as f64 * r;
                coeffs.iter_mut().for_each(|v| *v *= f);
            }
            let y0 = t - c[0];
            let env = (-(y0 * y0 + r * r + perp) / (2.0 * w2)).exp();
            let mut p = 0.0;
            for k in (0..=deg).rev() {
                p = p * y0 + coeffs[k];
            }
            out.push(p * env);
        }
        Some(out)
    }
}

/// Nodes on `[-L, 0]` and `[0, L]` for one-dimensional pairings; `abs` is the
/// exact distance to 0.
#[derive(Debug, Clone)]
pub struct LineNodes {
    pub x: Vec<f64>,
    pub abs: Vec<f64>,
    pub w: Vec<f64>,
}

impl LineNodes {
    pub fn new(extent: f64, h: f64) -> Self {
        let mut s = LineNodes { x: vec![], abs: vec![], w: vec![] };
        for n in tanh_sinh(0.0, extent, h) {
            s.x.push(n.x);
            s.abs.push(n.from_a);
            s.w.push(n.w);
            s.x.push(-n.x);
            s.abs.push(n.from_a);
            s.w.push(n.w);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_singular_endpoint() {
        // int_0^1 x^{-1/2} dx = 2
        let s: f64 = tanh_sinh(0.0, 1.0, 1.0 / 16.0).iter().map(|n| n.w / n.from_a.sqrt()).sum();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cone_nodes_integrate_gaussian() {
        let phi = TestFunction::gaussian_poly(vec![0.0, 0.0], 1.0, &[]).unwrap();
        let nodes = ConeNodes::new(phi.extent(), 1.0 / 16.0);
        let psi = nodes.psi(&phi);
        let total: f64 = (0..nodes.len()).map(|i| nodes.w[i] * psi[i]).sum();
        assert!((total - 2.0 * PI).abs() < 1e-11);
        let phi3 = TestFunction::gaussian_poly(vec![0.0, 0.0, 0.0], 1.0, &[]).unwrap();
        let psi3 = nodes.psi(&phi3);
        let total: f64 = (0..nodes.len()).map(|i| nodes.w[i] * psi3[i]).sum();
        assert!((total - (2.0 * PI).powf(1.5)).abs() < 1e-10);
    }

    #[test]
    fn fast_angular_average_matches_direct() {
        let phi = TestFunction::gaussian_poly(vec![0.3, -0.4, 0.2], 0.9, &[(vec![0, 0, 0], 1.0), (vec![2, 1, 3], 0.3)])
            .unwrap()
            .box_pow(2);
        let nodes = ConeNodes::new(phi.extent(), 1.0 / 4.0);
        let fast = nodes.psi(&phi);
        let direct = nodes.psi(&phi.composed(nalgebra::DMatrix::identity(3, 3)).unwrap());
        for (a, b) in fast.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }
}
