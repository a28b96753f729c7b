//! Test functions with exact derivatives: polynomial times Gaussian or bump
//! envelope, optionally composed with a Lorentz transformation.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `exp(-|y|^2 / (2 w^2))`
    Gaussian { width: f64 },
    /// `exp(1 - 1/(1 - |y|^2/w^2))` inside the ball of radius `w`, zero outside.
    Bump { width: f64 },
}

/// `sum c[alpha, k] y^alpha q^k * envelope(y)` with `y = x - center` and, for
/// the bump, `q = 1/(1 - |y|^2/w^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    dim: usize,
    center: Vec<f64>,
    envelope: Envelope,
    terms: BTreeMap<(Vec<u32>, u32), f64>,
    /// Evaluate at `A x` instead of `x`.
    transform: Option<DMatrix<f64>>,
}

fn metric_sign(i: usize) -> f64 {
    if i == 0 {
        1.0
    } else {
        -1.0
    }
}

impl TestFunction {
    fn new(dim: usize, center: Vec<f64>, envelope: Envelope, coeffs: &[(Vec<u32>, f64)]) -> Result<Self> {
        if dim == 0 || center.len() != dim {
            return Err(Error::InvalidInput("center has wrong dimension".into()));
        }
        let w = match envelope {
            Envelope::Gaussian { width } | Envelope::Bump { width } => width,
        };
        if !(w > 0.0) {
            return Err(Error::InvalidInput("width must be positive".into()));
        }
        let mut terms = BTreeMap::new();
        for (alpha, c) in coeffs {
            if alpha.len() != dim {
                return Err(Error::InvalidInput("multi-index has wrong dimension".into()));
            }
            *terms.entry((alpha.clone(), 0)).or_insert(0.0) += c;
        }
        if terms.is_empty() {
            terms.insert((vec![0; dim], 0), 1.0);
        }
        Ok(Self { dim, center, envelope, terms, transform: None })
    }

    pub fn gaussian_poly(center: Vec<f64>, width: f64, coeffs: &[(Vec<u32>, f64)]) -> Result<Self> {
        Self::new(center.len(), center, Envelope::Gaussian { width }, coeffs)
    }

    pub fn bump(center: Vec<f64>, width: f64, coeffs: &[(Vec<u32>, f64)]) -> Result<Self> {
        Self::new(center.len(), center, Envelope::Bump { width }, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Radius around the center outside of which the function is negligible.
    pub fn support_radius(&self) -> f64 {
        match self.envelope {
            Envelope::Gaussian { width } => 12.0 * width,
            Envelope::Bump { width } => width,
        }
    }

    /// Radius of a ball about the origin containing the effective support.
    pub fn extent(&self) -> f64 {
        let c: f64 = self.center.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = c + self.support_radius();
        match &self.transform {
            // `A x` lies in the ball when |x| <= r / ||A^{-1}||^{-1}
            Some(a) => {
                let inv = a.clone().try_inverse().expect("Lorentz maps are invertible");
                r * inv.norm()
            }
            None => r,
        }
    }

    /// `phi o A` for a Lorentz transformation `A`.
    pub fn composed(&self, a: DMatrix<f64>) -> Result<Self> {
        let n = self.dim;
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::InvalidInput("transformation has wrong size".into()));
        }
        let eta = DMatrix::from_fn(n, n, |i, j| if i == j { metric_sign(i) } else { 0.0 });
        if (a.transpose() * &eta * &a - &eta).norm() > 1e-12 {
            return Err(Error::InvalidInput("transformation is not Lorentz".into()));
        }
        let total = match &self.transform {
            Some(b) => b * a,
            None => a,
        };
        Ok(Self { transform: Some(total), ..self.clone() })
    }

    /// Boost of the given rapidity in the `(x_1, x_2)` plane.
    pub fn boosted(&self, rapidity: f64) -> Result<Self> {
        let mut a = DMatrix::identity(self.dim, self.dim);
        if self.dim >= 2 {
            let (c, s) = (rapidity.cosh(), rapidity.sinh());
            a[(0, 0)] = c;
            a[(0, 1)] = s;
            a[(1, 0)] = s;
            a[(1, 1)] = c;
        }
        self.composed(a)
    }

    pub(crate) fn terms(&self) -> &BTreeMap<(Vec<u32>, u32), f64> {
        &self.terms
    }

    pub(crate) fn is_transformed(&self) -> bool {
        self.transform.is_some()
    }

    fn base_value(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let s: f64 = y.iter().map(|v| v * v).sum();
        let (env, q) = match self.envelope {
            Envelope::Gaussian { width } => ((-s / (2.0 * width * width)).exp(), 1.0),
            Envelope::Bump { width } => {
                let u = s / (width * width);
                if u >= 1.0 {
                    return 0.0;
                }
                let q = 1.0 / (1.0 - u);
                ((1.0 - q).exp(), q)
            }
        };
        if env == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for ((alpha, k), c) in &self.terms {
            let mut m = *c;
            for (yi, a) in y.iter().zip(alpha) {
                m *= yi.powi(*a as i32);
            }
            if *k > 0 {
                m *= q.powi(*k as i32);
            }
            acc += m;
        }
        acc * env
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.transform {
            Some(a) => {
                let ax: Vec<f64> = (0..self.dim).map(|i| (0..self.dim).map(|j| a[(i, j)] * x[j]).sum()).collect();
                self.base_value(&ax)
            }
            None => self.base_value(x),
        }
    }

    fn map_terms(&self, terms: BTreeMap<(Vec<u32>, u32), f64>) -> Self {
        let terms = terms.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Self { terms, ..self.clone() }
    }

    /// Partial derivative in `x_i` of the untransformed function.
    fn base_derivative(&self, i: usize) -> Self {
        let mut out: BTreeMap<(Vec<u32>, u32), f64> = BTreeMap::new();
        let mut add = |alpha: Vec<u32>, k: u32, c: f64| *out.entry((alpha, k)).or_insert(0.0) += c;
        for ((alpha, k), c) in &self.terms {
            if alpha[i] > 0 {
                let mut a = alpha.clone();
                a[i] -= 1;
                add(a, *k, c * alpha[i] as f64);
            }
            let mut up = alpha.clone();
            up[i] += 1;
            match self.envelope {
                Envelope::Gaussian { width } => add(up, *k, -c / (width * width)),
                Envelope::Bump { width } => {
                    let f = 2.0 / (width * width);
                    if *k > 0 {
                        add(up.clone(), k + 1, c * f * *k as f64);
                    }
                    add(up, k + 2, -c * f);
                }
            }
        }
        self.map_terms(out)
    }

    fn base_box(&self) -> Self {
        let mut out: BTreeMap<(Vec<u32>, u32), f64> = BTreeMap::new();
        for i in 0..self.dim {
            let d2 = self.base_derivative(i).base_derivative(i);
            for (key, c) in d2.terms {
                *out.entry(key).or_insert(0.0) += metric_sign(i) * c;
            }
        }
        self.map_terms(out)
    }

    /// `d/dx_i`, available without a transformation.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if self.transform.is_some() {
            return Err(Error::InvalidInput("derivatives of transformed test functions are not supported".into()));
        }
        Ok(self.base_derivative(i))
    }

    pub fn nth_derivative(&self, i: usize, m: usize) -> Result<Self> {
        let mut f = self.clone();
        for _ in 0..m {
            f = f.derivative(i)?;
        }
        Ok(f)
    }

    /// `box = d_1^2 - d_2^2 - ... - d_n^2`; commutes with the transformation.
    pub fn box_op(&self) -> Self {
        self.base_box()
    }

    pub fn box_pow(&self, m: usize) -> Self {
        let mut f = self.clone();
        for _ in 0..m {
            f = f.box_op();
        }
        f
    }

    /// `t -> phi(t, 0, ..., 0)` as a test function on the line. Exact for
    /// untransformed Gaussian envelopes.
    pub fn restrict_to_time_axis(&self) -> Result<Self> {
        let Envelope::Gaussian { width } = self.envelope else {
            return Err(Error::InvalidInput("only Gaussian envelopes restrict exactly".into()));
        };
        if self.transform.is_some() {
            return Err(Error::InvalidInput("transformed test functions do not restrict".into()));
        }
        let perp: f64 = self.center[1..].iter().map(|v| v * v).sum();
        let scale = (-perp / (2.0 * width * width)).exp();
        let mut out: BTreeMap<(Vec<u32>, u32), f64> = BTreeMap::new();
        for ((alpha, k), c) in &self.terms {
            let mut m = c * scale;
            for j in 1..self.dim {
                m *= (-self.center[j]).powi(alpha[j] as i32);
            }
            *out.entry((vec![alpha[0]], *k)).or_insert(0.0) += m;
        }
        let terms = out.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Ok(Self { dim: 1, center: vec![self.center[0]], envelope: self.envelope, terms, transform: None })
    }

    /// Multiplication by `gamma(x) = x_1^2 - x_2^2 - ... - x_n^2`, exact.
    pub fn times_gamma(&self) -> Self {
        // gamma is Lorentz invariant, so it multiplies the untransformed function
        let mut out: BTreeMap<(Vec<u32>, u32), f64> = BTreeMap::new();
        for ((alpha, k), c) in &self.terms {
            for i in 0..self.dim {
                let s = metric_sign(i);
                let ci = self.center[i];
                let mut a2 = alpha.clone();
                a2[i] += 2;
                *out.entry((a2, *k)).or_insert(0.0) += s * c;
                if ci != 0.0 {
                    let mut a1 = alpha.clone();
                    a1[i] += 1;
                    *out.entry((a1, *k)).or_insert(0.0) += 2.0 * s * ci * c;
                    *out.entry((alpha.clone(), *k)).or_insert(0.0) += s * ci * ci * c;
                }
            }
        }
        self.map_terms(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: &TestFunction, x: &[f64], i: usize) -> f64 {
        let h = 1e-5;
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        (f.value(&xp) - f.value(&xm)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = TestFunction::gaussian_poly(vec![0.3, -0.2], 0.8, &[(vec![0, 0], 1.0), (vec![1, 2], 0.5)]).unwrap();
        let b = TestFunction::bump(vec![0.1, 0.2], 1.5, &[(vec![0, 0], 1.0), (vec![1, 0], 0.3)]).unwrap();
        for f in [&g, &b] {
            for i in 0..2 {
                let d = f.derivative(i).unwrap();
                for x in [[0.1, 0.4], [-0.5, 0.7], [0.9, -0.3]] {
                    assert!((d.value(&x) - fd(f, &x, i)).abs() < 1e-7, "{:?}", f.envelope());
                }
            }
        }
    }

    #[test]
    fn box_and_gamma() {
        let g = TestFunction::gaussian_poly(vec![0.0, 0.0], 1.0, &[]).unwrap();
        // box e^{-(t^2+x^2)/2} = (t^2 - 1 - x^2 + 1) e^{...}
        let b = g.box_op();
        let x = [0.4, -0.7];
        let want = (0.16 - 0.49) * g.value(&x);
        assert!((b.value(&x) - want).abs() < 1e-14);
        let c = TestFunction::gaussian_poly(vec![0.3, -0.2], 0.8, &[(vec![1, 0], 1.0)]).unwrap();
        let gx = c.times_gamma();
        assert!((gx.value(&x) - (0.16 - 0.49) * c.value(&x)).abs() < 1e-14);
    }

    #[test]
    fn box_commutes_with_boost() {
        let g = TestFunction::gaussian_poly(vec![0.3, -0.2], 0.8, &[(vec![1, 1], 1.0)]).unwrap();
        let a = g.boosted(0.7).unwrap();
        let x = [0.2, 0.5];
        // second differences of the boosted function against box of the original, boosted
        let h = 1e-4;
        let mut lap = 0.0;
        for (i, s) in [(0usize, 1.0), (1usize, -1.0)] {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            lap += s * (a.value(&xp) - 2.0 * a.value(&x) + a.value(&xm)) / (h * h);
        }
        assert!((a.box_op().value(&x) - lap).abs() < 1e-5);
    }

    #[test]
    fn bump_vanishes_outside() {
        let b = TestFunction::bump(vec![0.0], 1.0, &[]).unwrap();
        assert_eq!(b.value(&[1.0]), 0.0);
        assert!((b.value(&[0.0]) - 1.0).abs() < 1e-15);
    }
}
