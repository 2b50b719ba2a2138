//! Bessel functions of the first kind.

/// `J_n(x)` for integer order `n >= 0` by direct power-series summation.
///
/// The series converges for every `x`, but cancellation degrades it once
/// `|x|` exceeds roughly 20. Modulation depths used here stay below 10.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    // leading term (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 500 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // tabulated J0(1), J1(1), J1(0.2)
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(1, 0.2) - 0.099_500_832_639_235_9).abs() < 1e-15);
        assert_eq!(bessel_j(3, 0.0), 0.0);
    }

    #[test]
    fn odd_under_negation_for_odd_order() {
        for &x in &[0.1, 0.7, 2.5] {
            assert!((bessel_j(1, -x) + bessel_j(1, x)).abs() < 1e-16);
            assert!((bessel_j(2, -x) - bessel_j(2, x)).abs() < 1e-16);
        }
    }
}
