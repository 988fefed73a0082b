//! In-place radix-2 complex FFT for the circulant embedding sampler.

use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }
}

/// Forward transform `X_k = sum_j x_j exp(-2 pi i jk / n)`; `n` must be a power of two.
pub(crate) fn fft(buf: &mut [Complex]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n <= 1 {
        return;
    }

    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let theta = -2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // twiddles from sin/cos directly; recurrences drift at n ~ 1e5
                let (s, c) = libm::sincos(theta * k as f64);
                let a = buf[start + k];
                let b = buf[start + k + half];
                let tb = Complex::new(b.re * c - b.im * s, b.re * s + b.im * c);
                buf[start + k] = Complex::new(a.re + tb.re, a.im + tb.im);
                buf[start + k + half] = Complex::new(a.re - tb.re, a.im - tb.im);
            }
        }
        len <<= 1;
    }
}
