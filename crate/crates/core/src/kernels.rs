//! Entire scalar kernels and spectral data behind every closed-form entry.
//!
//! The closed-form matrices are built from three motifs of a spectral
//! parameter λ: `cos(θ√λ)`, `sin(θ√λ)/√λ`, and `√λ·sin(θ√λ)`. Each extends
//! to an entire function of λ (cosh/sinh for λ < 0), so every entry is
//! evaluable with one uniform rule; wherever a continued kernel grows, the
//! matrix pairs it with a vanishing coefficient.

use crate::scalar::{self, Float};

/// Threshold below which `sinck` switches to its even Taylor series to avoid
/// cancellation in `sin(θ√λ)/√λ`.
const SERIES_CUTOFF: f64 = 1e-8;

/// `cos(θ√λ)` for λ ≥ 0, `cosh(θ√−λ)` for λ < 0.
pub fn cosk<T: Float>(lambda: T, theta: T) -> T {
    if lambda >= T::zero() {
        scalar::cos(theta * scalar::sqrt(lambda))
    } else {
        scalar::cosh(theta * scalar::sqrt(-lambda))
    }
}

/// `sin(θ√λ)/√λ`, continued through λ = 0 (value θ) and to λ < 0
/// (`sinh(θ√−λ)/√−λ`).
pub fn sinck<T: Float>(lambda: T, theta: T) -> T {
    if scalar::abs(lambda) < scalar::lit(SERIES_CUTOFF) {
        // θ(1 − λθ²/6 + λ²θ⁴/120)
        let t2 = theta * theta;
        let x = lambda * t2;
        return theta * (T::one() - x / scalar::lit(6.0) + x * x / scalar::lit(120.0));
    }
    if lambda > T::zero() {
        let r = scalar::sqrt(lambda);
        scalar::sin(theta * r) / r
    } else {
        let r = scalar::sqrt(-lambda);
        scalar::sinh(theta * r) / r
    }
}

/// `√λ·sin(θ√λ)` = λ·sinck(λ,θ); vanishes at λ = 0, `−√−λ·sinh(θ√−λ)` for λ < 0.
pub fn msin<T: Float>(lambda: T, theta: T) -> T {
    lambda * sinck(lambda, theta)
}

/// Spectral data of the spin-3/2 block at integer argument `m`:
/// discriminant, eigenfrequencies, and entry weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralData<T> {
    /// 16m² + 9 (always positive: the two frequencies never collide).
    pub d: T,
    /// 5m ± √d.
    pub lambda_plus: T,
    pub lambda_minus: T,
    /// −2m − 3 ± √d.
    pub v_plus: T,
    pub v_minus: T,
    /// 2m − 3 ± √d.
    pub w_plus: T,
    pub w_minus: T,
}

/// Evaluate the spectral data at integer `m` (reachable arguments are
/// `m ≥ −1`; the formulas are total).
pub fn spectral<T: Float>(m: i64) -> SpectralData<T> {
    let d_int = 16 * m * m + 9;
    let d = scalar::int::<T>(d_int);
    let root = scalar::sqrt(d);
    let five_m = scalar::int::<T>(5 * m);
    let v_base = scalar::int::<T>(-2 * m - 3);
    let w_base = scalar::int::<T>(2 * m - 3);
    SpectralData {
        d,
        lambda_plus: five_m + root,
        lambda_minus: five_m - root,
        v_plus: v_base + root,
        v_minus: v_base - root,
        w_plus: w_base + root,
        w_minus: w_base - root,
    }
}
