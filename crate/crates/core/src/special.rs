//! Complex special functions: Gamma, digamma, trigamma, reciprocal Gamma with
//! derivatives, and the Hurwitz zeta function.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Even Bernoulli numbers B_2, B_4, ..., B_30.
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn sinpi_real(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r == 0.5 {
        return 1.0;
    }
    if r == 1.5 {
        return -1.0;
    }
    (PI * r).sin()
}

fn cospi_real(x: f64) -> f64 {
    sinpi_real(x + 0.5)
}

/// sin(pi z), exact zeros at the integers.
pub fn sinpi(z: C64) -> C64 {
    let (y, x) = (PI * z.im, z.re);
    C64::new(sinpi_real(x) * y.cosh(), cospi_real(x) * y.sinh())
}

/// cos(pi z), exact zeros at the half-integers.
pub fn cospi(z: C64) -> C64 {
    let (y, x) = (PI * z.im, z.re);
    C64::new(cospi_real(x) * y.cosh(), -sinpi_real(x) * y.sinh())
}

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// Gamma function on the complex plane (Lanczos, reflected for Re z < 1/2).
pub fn gamma(z: C64) -> C64 {
    if is_nonpositive_integer(z) {
        return C64::new(f64::INFINITY, 0.0);
    }
    if z.re < 0.5 {
        return PI / (sinpi(z) * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Digamma function.
pub fn digamma(z: C64) -> C64 {
    if z.re < 0.5 {
        return digamma(1.0 - z) - PI * cospi(z) / sinpi(z);
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 20.0 {
        acc -= 1.0 / w;
        w += 1.0;
    }
    let w2 = (w * w).inv();
    let mut series = C64::new(0.0, 0.0);
    let mut p = w2;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(10) {
        series += *b / (2.0 * (k + 1) as f64) * p;
        p *= w2;
    }
    acc + w.ln() - 0.5 / w - series
}

/// Trigamma function.
pub fn trigamma(z: C64) -> C64 {
    if z.re < 0.5 {
        let s = sinpi(z);
        return PI * PI / (s * s) - trigamma(1.0 - z);
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 20.0 {
        acc += 1.0 / (w * w);
        w += 1.0;
    }
    let wi = w.inv();
    let w2 = wi * wi;
    let mut series = C64::new(0.0, 0.0);
    let mut p = w2 * wi;
    for b in BERNOULLI_EVEN.iter().take(10) {
        series += *b * p;
        p *= w2;
    }
    acc + wi + 0.5 * w2 + series
}

/// 1/Gamma(z) and its first two derivatives. Entire; exact zeros at 0, -1, -2, ...
pub fn rgamma_derivs(z: C64) -> [C64; 3] {
    if z.re >= 0.5 {
        let g = gamma(z).inv();
        let psi = digamma(z);
        let psi1 = trigamma(z);
        [g, -psi * g, (psi * psi - psi1) * g]
    } else {
        let w = 1.0 - z;
        let gw = gamma(w);
        let psi = digamma(w);
        let psi1 = trigamma(w);
        let s = sinpi(z) / PI;
        let s1 = cospi(z);
        let s2 = -PI * sinpi(z);
        let g1 = -psi * gw;
        let g2 = (psi1 + psi * psi) * gw;
        [s * gw, s1 * gw + s * g1, s2 * gw + 2.0 * s1 * g1 + s * g2]
    }
}

pub fn rgamma(z: C64) -> C64 {
    rgamma_derivs(z)[0]
}

/// Hurwitz zeta function zeta(s, q) = sum_{k>=0} (q+k)^{-s}, analytically
/// continued in s (Euler-Maclaurin). Requires Re q > 0 and s != 1.
pub fn hurwitz_zeta(s: C64, q: C64) -> C64 {
    assert!(q.re > 0.0, "hurwitz_zeta needs Re q > 0");
    let target = 25.0 + s.norm();
    let n = if q.re < target { (target - q.re).ceil() as usize } else { 0 };
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..n {
        sum += (q + k as f64).powc(-s);
    }
    let a = q + n as f64;
    let a_pow = a.powc(-s);
    sum += a * a_pow / (s - 1.0) + 0.5 * a_pow;
    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * a^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut a_term = a_pow / a;
    let a2 = (a * a).inv();
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = *b / fact * rising * a_term;
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
        let m = 2.0 * (j + 1) as f64;
        rising *= (s + m - 1.0) * (s + m);
        fact *= (m + 1.0) * (m + 2.0);
        a_term *= a2;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn gamma_at_integers_and_half() {
        assert!((gamma(c(5.0)).re - 24.0).abs() < 1e-12);
        assert!((gamma(c(0.5)).re - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(c(-0.5)).re + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn reciprocal_gamma_zeros_are_exact() {
        for k in 0..6 {
            assert_eq!(rgamma(c(-(k as f64))).norm(), 0.0);
        }
    }

    #[test]
    fn reciprocal_gamma_derivative_at_poles() {
        // d/dz 1/Gamma at -k equals (-1)^k k!
        let mut fact = 1.0;
        for k in 0..5 {
            if k > 0 {
                fact *= k as f64;
            }
            let d = rgamma_derivs(c(-(k as f64)))[1];
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((d.re - sign * fact).abs() < 1e-12 * fact, "k={k} d={d}");
        }
    }

    #[test]
    fn reciprocal_gamma_derivatives_match_differences() {
        for &z in &[c(0.3), c(-1.7), C64::new(1.2, 0.8), c(2.5), C64::new(-0.4, -0.3)] {
            let h = 1e-4;
            let d = rgamma_derivs(z);
            let fd1 = (rgamma(z + h) - rgamma(z - h)) / (2.0 * h);
            let fd2 = (rgamma(z + h) - 2.0 * rgamma(z) + rgamma(z - h)) / (h * h);
            assert!((d[1] - fd1).norm() < 1e-7, "{z}");
            assert!((d[2] - fd2).norm() < 1e-5, "{z}");
        }
    }

    #[test]
    fn digamma_values() {
        assert!((digamma(c(1.0)).re + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(c(0.5)).re + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((trigamma(c(1.0)).re - PI * PI / 6.0).abs() < 1e-13);
    }

    #[test]
    fn hurwitz_direct_sum_region() {
        for &q in &[0.25, 0.9, 3.5] {
            let direct: f64 = (0..200000).rev().map(|k| (q + k as f64).powi(-3)).sum::<f64>()
                + 0.5 * (q + 200000.0f64).powi(-2);
            let z = hurwitz_zeta(c(3.0), c(q));
            assert!((z.re - direct).abs() < 1e-12, "q={q}");
        }
    }

    #[test]
    fn hurwitz_at_zero_and_minus_one() {
        for &q in &[0.1, 0.25, 0.6, 201.25, 199.75] {
            let z0 = hurwitz_zeta(c(0.0), c(q));
            assert!((z0.re - (0.5 - q)).abs() < 1e-10 * q.max(1.0), "q={q}");
            let b2 = q * q - q + 1.0 / 6.0;
            let zm1 = hurwitz_zeta(c(-1.0), c(q));
            assert!((zm1.re + b2 / 2.0).abs() < 1e-9 * b2.abs().max(1.0), "q={q}");
        }
    }

    #[test]
    fn hurwitz_complex_shift() {
        let q = C64::new(0.3, 0.2);
        let z0 = hurwitz_zeta(c(0.0), q);
        assert!((z0 - (0.5 - q)).norm() < 1e-12);
    }
}
