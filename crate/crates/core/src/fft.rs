//! In-repo radix-2 complex FFT (power-of-2 lengths only).

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FftError {
    #[error("FFT length {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

/// A transform plan for a fixed power-of-2 length: bit-reversal table plus
/// exact-angle twiddles.
pub struct FftPlan {
    n: usize,
    twiddles: Vec<Complex64>, // e^{-2πik/n}, k < n/2
    rev: Vec<u32>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self, FftError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(FftError::NotPowerOfTwo(n));
        }
        let half = n / 2;
        let mut twiddles = Vec::with_capacity(half);
        for k in 0..half {
            let th = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
            twiddles.push(Complex64::new(th.cos(), th.sin()));
        }
        let bits = n.trailing_zeros();
        let mut rev = vec![0u32; n];
        for i in 0..n {
            rev[i] = (i as u32).reverse_bits() >> (32 - bits.max(1));
        }
        if n == 1 {
            rev[0] = 0;
        }
        Ok(Self { n, twiddles, rev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place DFT with kernel e^{-2πi jk/n}; `inverse` conjugates the
    /// kernel and divides by n.
    pub fn process(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n);
        if n == 1 {
            return;
        }
        for i in 0..n {
            let j = self.rev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let tw = self.twiddles[k * step];
                    let tw = if inverse { tw.conj() } else { tw };
                    let a = data[start + k];
                    let b = data[start + k + half] * tw;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }
}

/// One-shot convenience wrapper.
pub fn fft(data: &mut [Complex64], inverse: bool) -> Result<(), FftError> {
    let plan = FftPlan::new(data.len())?;
    plan.process(data, inverse);
    Ok(())
}
