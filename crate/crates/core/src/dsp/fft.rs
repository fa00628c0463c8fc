//! Iterative radix-2 FFT.

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Precomputed twiddles for one transform length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    twiddles: alloc::vec::Vec<Complex>,
}

impl FftPlan {
    /// `n` must be a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * core::f64::consts::PI * k as f64 / n as f64;
                Complex::new(math::cos(a), math::sin(a))
            })
            .collect();
        Self { n, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [Complex]) {
        let n = self.n;
        assert_eq!(buf.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half];
                    let t = Complex::new(b.re * w.re - b.im * w.im, b.re * w.im + b.im * w.re);
                    buf[start + k] = Complex::new(a.re + t.re, a.im + t.im);
                    buf[start + k + half] = Complex::new(a.re - t.re, a.im - t.im);
                }
            }
            len <<= 1;
        }
    }
}

/// In-place forward transform. `buf.len()` must be a power of two.
pub fn fft_in_place(buf: &mut [Complex]) {
    FftPlan::new(buf.len()).forward(buf);
}
