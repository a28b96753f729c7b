//! Sign and phase conventions fixed once against the spectral-flow count and
//! frozen here. `calibration` tests in `index.rs` and `hadamard.rs` re-derive
//! them and fail if they drift.

use num_complex::Complex64 as C64;

/// Sign of the curvature term in `ind = Xi_+ - Xi_- + sign * (1/2pi) int F`.
/// Calibrated on the path `a: 0.3 -> 1.3`, whose spectral flow is `+1`.
pub const CURVATURE_SIGN: f64 = 1.0;

/// Unit phase applied to the raw local index density. The raw density of the
/// twisted circle model is `i a'(t) / 2pi`, purely imaginary; multiplying by
/// this phase gives a real density whose integral is `-flux`, so that
/// `ind = Xi_+ - Xi_- - int density` reproduces the spectral flow.
pub const INDEX_DENSITY_PHASE: C64 = C64 { re: 0.0, im: 1.0 };
