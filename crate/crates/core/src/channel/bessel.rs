//! Zeroth-order Bessel function of the first kind.

use std::f64::consts::{FRAC_PI_4, PI};

const SERIES_LIMIT: f64 = 12.0;

/// `J0(x)` with absolute error below 1e-10 on the whole real line.
///
/// Power series up to |x| = 12, Hankel asymptotic expansion beyond.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    }
}

fn series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= -q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-3) {
            break;
        }
        k += 1.0;
    }
    sum
}

fn asymptotic(x: f64) -> f64 {
    // a_k(0) = -(2k-1)^2 a_{k-1} / (8k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut z_pow = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60u32 {
        if k > 0 {
            let kf = f64::from(k);
            a *= -(2.0 * kf - 1.0).powi(2) / (8.0 * kf);
            z_pow *= x;
        }
        let term = a / z_pow;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // (-1)^j weights on even / odd orders
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if last < 1e-17 {
            break;
        }
    }
    let omega = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// J0(x) = (1/pi) * integral_0^pi cos(x sin t) dt, trapezoid rule on a
    /// periodic integrand.
    fn j0_quadrature(x: f64) -> f64 {
        let n = 4000;
        let h = PI / n as f64;
        let mut acc = 0.5 * (1.0 + (x * PI.sin()).cos());
        for i in 1..n {
            acc += (x * (i as f64 * h).sin()).cos();
        }
        acc * h / PI
    }

    #[test]
    fn matches_quadrature_oracle() {
        let mut x = 0.0;
        while x < 60.0 {
            let err = (j0(x) - j0_quadrature(x)).abs();
            assert!(err < 1e-10, "x = {x}: err {err}");
            x += 0.173;
        }
    }

    #[test]
    fn continuous_at_series_switch() {
        let below = j0(SERIES_LIMIT - 1e-12);
        let above = j0(SERIES_LIMIT + 1e-12);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn known_values() {
        assert_eq!(j0(0.0), 1.0);
        assert!((j0(PI) - (-0.304_242_177_644_093_9)).abs() < 1e-12);
        assert!((j0(2.0 * PI) - 0.220_276_908_539_933_4).abs() < 1e-12);
        assert!((j0(-3.0) - j0(3.0)).abs() == 0.0);
    }
}
