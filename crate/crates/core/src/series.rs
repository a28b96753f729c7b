//! Truncated univariate power series `sum_k c_k h^k` with complex coefficients.

use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub Vec<C64>);

impl Series {
    pub fn constant(c: C64, order: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); order + 1];
        v[0] = c;
        Series(v)
    }

    /// `c + h`
    pub fn variable(c: C64, order: usize) -> Self {
        let mut s = Self::constant(c, order);
        if order >= 1 {
            s.0[1] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn scale(&self, a: C64) -> Self {
        Series(self.0.iter().map(|c| c * a).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn add_const(&self, a: C64) -> Self {
        let mut s = self.clone();
        s.0[0] += a;
        s
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.0.len().min(o.0.len());
        let mut v = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..(n - i) {
                v[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(v)
    }

    pub fn recip(&self) -> Self {
        let n = self.0.len();
        let mut v = vec![C64::new(0.0, 0.0); n];
        let a0 = self.0[0];
        v[0] = a0.inv();
        for k in 1..n {
            let mut s = C64::new(0.0, 0.0);
            for j in 1..=k {
                s += self.0[j] * v[k - j];
            }
            v[k] = -s / a0;
        }
        Series(v)
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Self {
        let n = self.0.len();
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[0] = self.0[0].exp();
        for k in 1..n {
            let mut s = C64::new(0.0, 0.0);
            for j in 1..=k {
                s += j as f64 * self.0[j] * v[k - j];
            }
            v[k] = s / k as f64;
        }
        Series(v)
    }

    /// Power with a caller-supplied value of `c_0^s` fixing the branch.
    pub fn powc_with(&self, s: C64, c0_pow_s: C64) -> Self {
        let n = self.0.len();
        let a0 = self.0[0];
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[0] = c0_pow_s;
        for k in 1..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 1..=k {
                acc += (s * j as f64 - (k - j) as f64) * self.0[j] * v[k - j];
            }
            v[k] = acc / (k as f64 * a0);
        }
        Series(v)
    }

    pub fn eval(&self, h: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * h + c)
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> C64 {
        let f: f64 = (1..=k).map(|i| i as f64).product();
        self.0.get(k).copied().unwrap_or_default() * f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable() {
        let s = Series::variable(C64::new(0.5, 0.0), 6).exp();
        let mut f = 1.0;
        for k in 0..=6 {
            if k > 0 {
                f *= k as f64;
            }
            assert!((s.0[k].re - 0.5f64.exp() / f).abs() < 1e-15);
        }
    }

    #[test]
    fn recip_and_power_roundtrip() {
        let x = Series::variable(C64::new(2.0, 1.0), 8);
        let r = x.mul(&x.recip());
        assert!((r.0[0] - 1.0).norm() < 1e-15);
        assert!(r.0[1..].iter().all(|c| c.norm() < 1e-15));
        let c0 = C64::new(2.0, 1.0);
        let sq = x.powc_with(C64::new(0.5, 0.0), c0.sqrt());
        let back = sq.mul(&sq);
        assert!(back.sub(&x).0.iter().all(|c| c.norm() < 1e-14));
    }
}
