//! Fourier-truncated circle operators and cylinder models.
//!
//! Basis ordering: mode `k` in `-K..=K`, bundle component `r` in `0..rank`,
//! position `(k + K) * rank + r`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::series::Series;
use crate::spectral::{CMat, OperatorMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct CircleOperatorSpec {
    pub flux: C64,
    /// Fourier coefficients `(frequency, rank x rank value)` of the potential.
    pub potential: Vec<(i64, CMat)>,
    pub rank: usize,
    pub k: usize,
}

impl CircleOperatorSpec {
    pub fn flux_only(flux: f64, k: usize) -> Self {
        Self { flux: C64::new(flux, 0.0), potential: Vec::new(), rank: 1, k }
    }

    pub fn with_flux(&self, flux: C64) -> Self {
        Self { flux, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.rank < 1 {
            return Err(Error::InvalidInput("need K >= 1 and rank >= 1".into()));
        }
        let two_k = 2 * self.k as i64;
        for (f, v) in &self.potential {
            if f.abs() > two_k {
                return Err(Error::FrequencyOverflow(*f, two_k));
            }
            if v.nrows() != self.rank || v.ncols() != self.rank {
                return Err(Error::InvalidInput("potential coefficient has wrong size".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        (2 * self.k + 1) * self.rank
    }
}

/// Matrix of `-i d/dtheta + a + V(theta)` on modes `e^{ik theta}`, `|k| <= K`.
pub fn build_circle_dirac(spec: &CircleOperatorSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let (kk, r) = (spec.k as i64, spec.rank);
    let n = spec.dim();
    let mut m = CMat::zeros(n, n);
    let mut labels = Vec::with_capacity(n);
    for k in -kk..=kk {
        for a in 0..r {
            let i = ((k + kk) as usize) * r + a;
            m[(i, i)] += C64::new(k as f64, 0.0) + spec.flux;
            labels.push(k);
        }
    }
    for (f, v) in &spec.potential {
        for k in -kk..=kk {
            let l = k - f;
            if l < -kk || l > kk {
                continue;
            }
            for a in 0..r {
                for b in 0..r {
                    let i = ((k + kk) as usize) * r + a;
                    let j = ((l + kk) as usize) * r + b;
                    m[(i, j)] += v[(a, b)];
                }
            }
        }
    }
    OperatorMatrix::with_labels(m, labels)
}

/// Rank-2 model `[[-i d/dtheta, chi], [0, -i d/dtheta]]` where `chi` couples the
/// two `k = 0` components only.
pub fn build_jordan_model(k: usize) -> Result<OperatorMatrix> {
    if k < 1 {
        return Err(Error::InvalidInput("need K >= 1".into()));
    }
    let spec = CircleOperatorSpec { flux: C64::new(0.0, 0.0), potential: Vec::new(), rank: 2, k };
    let d = build_circle_dirac(&spec)?;
    let labels = d.mode_labels().unwrap().to_vec();
    let mut m = d.into_entries();
    let i0 = 2 * k;
    m[(i0, i0 + 1)] = C64::new(1.0, 0.0);
    OperatorMatrix::with_labels(m, labels)
}

pub fn laplace_from_dirac(d: &OperatorMatrix) -> Result<OperatorMatrix> {
    let sq = d.entries() * d.entries();
    match d.mode_labels() {
        Some(l) => OperatorMatrix::with_labels(sq, l.to_vec()),
        None => OperatorMatrix::new(sq),
    }
}

/// Smooth monotone step from 0 to 1 on `[0, 1]`, constant outside, as a
/// Taylor series in `x` about `x0`.
pub fn smoothstep_series(x0: f64, order: usize) -> Series {
    if x0 <= 0.0 {
        return Series::constant(C64::new(0.0, 0.0), order);
    }
    if x0 >= 1.0 {
        return Series::constant(C64::new(1.0, 0.0), order);
    }
    let x = Series::variable(C64::new(x0, 0.0), order);
    let y = x.scale(C64::new(-1.0, 0.0)).add_const(C64::new(1.0, 0.0));
    let px = x.recip().scale(C64::new(-1.0, 0.0)).exp();
    let py = y.recip().scale(C64::new(-1.0, 0.0)).exp();
    px.div(&px.add(&py))
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaugePath {
    Constant(C64),
    /// `a_minus` before `t_start`, `a_plus` after `t_end`, smooth in between.
    Smoothstep { a_minus: C64, a_plus: C64, t_start: f64, t_end: f64 },
}

impl GaugePath {
    pub fn series(&self, t: f64, order: usize) -> Series {
        match *self {
            GaugePath::Constant(a) => Series::constant(a, order),
            GaugePath::Smoothstep { a_minus, a_plus, t_start, t_end } => {
                let len = t_end - t_start;
                let s = smoothstep_series((t - t_start) / len, order);
                let mut v = s.0;
                let mut f = 1.0;
                for c in v.iter_mut() {
                    *c *= f;
                    f /= len;
                }
                Series(v).scale(a_plus - a_minus).add_const(a_minus)
            }
        }
    }

    pub fn value(&self, t: f64) -> C64 {
        self.series(t, 0).0[0]
    }

    pub fn derivative(&self, t: f64) -> C64 {
        self.series(t, 1).0[1]
    }

    /// Interval outside of which the path is constant.
    pub fn ramp(&self) -> Option<(f64, f64)> {
        match *self {
            GaugePath::Constant(_) => None,
            GaugePath::Smoothstep { t_start, t_end, .. } => Some((t_start, t_end)),
        }
    }

    pub fn is_real(&self) -> bool {
        match *self {
            GaugePath::Constant(a) => a.im == 0.0,
            GaugePath::Smoothstep { a_minus, a_plus, .. } => a_minus.im == 0.0 && a_plus.im == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderModel {
    pub t_minus: f64,
    pub t_plus: f64,
    pub gauge_path: GaugePath,
    pub base: CircleOperatorSpec,
    pub product_margin: f64,
}

impl CylinderModel {
    /// Smoothstep path occupying the middle of `[0, duration]`, leaving a
    /// product collar of a quarter of the duration at each end.
    pub fn smoothstep(a_minus: f64, a_plus: f64, duration: f64, k: usize) -> Self {
        let margin = 0.25 * duration;
        Self {
            t_minus: 0.0,
            t_plus: duration,
            gauge_path: GaugePath::Smoothstep {
                a_minus: C64::new(a_minus, 0.0),
                a_plus: C64::new(a_plus, 0.0),
                t_start: margin,
                t_end: duration - margin,
            },
            base: CircleOperatorSpec::flux_only(a_minus, k),
            product_margin: margin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.t_minus < self.t_plus) || !(self.product_margin > 0.0) {
            return Err(Error::InvalidInput("need t_minus < t_plus and product_margin > 0".into()));
        }
        if 2.0 * self.product_margin > self.t_plus - self.t_minus {
            return Err(Error::InvalidInput("product margins overlap".into()));
        }
        if let Some((a, b)) = self.gauge_path.ramp() {
            if !(a < b) || a < self.t_minus + self.product_margin || b > self.t_plus - self.product_margin {
                return Err(Error::InvalidInput("gauge path is not constant on the product collars".into()));
            }
        }
        Ok(())
    }

    pub fn flux(&self, t: f64) -> C64 {
        self.gauge_path.value(t)
    }

    pub fn operator_at(&self, t: f64) -> Result<OperatorMatrix> {
        build_circle_dirac(&self.base.with_flux(self.flux(t)))
    }

    pub fn operator_minus(&self) -> Result<OperatorMatrix> {
        self.operator_at(self.t_minus)
    }

    pub fn operator_plus(&self) -> Result<OperatorMatrix> {
        self.operator_at(self.t_plus)
    }

    pub fn is_autonomous(&self) -> bool {
        matches!(self.gauge_path, GaugePath::Constant(_))
    }

    /// True where the operator is locally t-independent.
    pub fn in_product_region(&self, t: f64) -> bool {
        match self.gauge_path.ramp() {
            None => true,
            Some((a, b)) => t <= a || t >= b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_re(m: &OperatorMatrix) -> Vec<f64> {
        (0..m.dim()).map(|i| m.entries()[(i, i)].re).collect()
    }

    #[test]
    fn free_and_shifted_multipliers() {
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(0.0, 2)).unwrap();
        assert_eq!(diag_re(&d), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(d.mode_labels().unwrap(), &[-2, -1, 0, 1, 2]);
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(0.25, 2)).unwrap();
        assert_eq!(diag_re(&d), vec![-1.75, -0.75, 0.25, 1.25, 2.25]);
    }

    #[test]
    fn cosine_potential_is_tridiagonal() {
        let half = CMat::from_element(1, 1, C64::new(0.5, 0.0));
        let spec = CircleOperatorSpec {
            flux: C64::new(0.0, 0.0),
            potential: vec![(1, half.clone()), (-1, half)],
            rank: 1,
            k: 2,
        };
        let d = build_circle_dirac(&spec).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j {
                    i as f64 - 2.0
                } else if (i as i64 - j as i64).abs() == 1 {
                    0.5
                } else {
                    0.0
                };
                assert_eq!(d.entries()[(i, j)], C64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn frequency_overflow() {
        let v = CMat::from_element(1, 1, C64::new(1.0, 0.0));
        let spec = CircleOperatorSpec { flux: C64::new(0.0, 0.0), potential: vec![(5, v)], rank: 1, k: 2 };
        assert_eq!(build_circle_dirac(&spec), Err(Error::FrequencyOverflow(5, 4)));
    }

    #[test]
    fn jordan_model_zero_block() {
        let d = build_jordan_model(1).unwrap();
        assert_eq!(d.dim(), 6);
        let dd = laplace_from_dirac(&d).unwrap();
        let blk = d.entries().view((2, 2), (2, 2)).clone_owned();
        let blk2 = dd.entries().view((2, 2), (2, 2)).clone_owned();
        assert!(blk.norm() > 0.5);
        assert_eq!(blk2.norm(), 0.0);
    }

    #[test]
    fn smoothstep_is_monotone_and_flat_at_ends() {
        let p = GaugePath::Smoothstep {
            a_minus: C64::new(0.3, 0.0),
            a_plus: C64::new(1.3, 0.0),
            t_start: 1.0,
            t_end: 3.0,
        };
        assert_eq!(p.value(0.5).re, 0.3);
        assert_eq!(p.value(3.5).re, 1.3);
        assert!((p.value(2.0).re - 0.8).abs() < 1e-14);
        let h = 1e-5;
        for &t in &[1.2, 1.9, 2.6] {
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            assert!((fd - p.derivative(t)).norm() < 1e-8);
            let s = p.series(t, 3);
            let fd2 = (p.value(t + h) - 2.0 * p.value(t) + p.value(t - h)) / (h * h);
            assert!((fd2 - s.derivative(2)).norm() < 1e-4);
        }
    }
}
