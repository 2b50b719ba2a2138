//! In-place iterative radix-2 FFT.
//!
//! Only power-of-two lengths are supported; callers zero-pad. This keeps the
//! core free of `std`, which the usual FFT crates require.

#[allow(unused_imports)] // std, when linked, shadows these with inherent methods
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// Smallest power of two that is `>= n` (and at least 1).
pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Forward transform, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
///
/// Panics if the length is not a power of two.
pub fn fft(data: &mut [Complex64]) {
    transform(data, false);
}

/// Inverse transform, including the `1/N` factor.
pub fn ifft(data: &mut [Complex64]) {
    transform(data, true);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Zero-pads a real sequence to `len` and returns its spectrum.
pub fn real_spectrum(samples: &[f64], len: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(core::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(len)
        .collect();
    fft(&mut buf);
    buf
}

fn transform(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n < 2 {
        return;
    }

    // bit reversal
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let theta = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // Twiddles are evaluated directly rather than by recurrence so the
        // error does not grow with the stage length.
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| {
                let a = theta * k as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        for chunk in data.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = *b * *w;
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }
}
