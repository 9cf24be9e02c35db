//! Densely sampled real functions on uniform grids, their oscillatory
//! transforms ∫ (−ix)^j φ(x) e^{−ixϱ} dx, and cached transform tables.
//!
//! The direct evaluator uses composite Gauss–Legendre panels in x with
//! oscillation-sized panels; the table route produces the same values on a
//! dense uniform ϱ-grid via a zero-padded FFT of the samples (both are
//! trapezoid-exact for smooth compactly supported integrands) and is
//! cross-checked against the direct evaluator in tests.

use crate::fft::FftPlan;
use crate::quad::gauss_legendre;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("need at least two samples")]
    TooFewSamples,
    #[error("requested ϱ_max {requested} exceeds the sampling limit π/dx = {available}")]
    RhoMaxUnreachable { requested: f64, available: f64 },
}

/// A real function sampled on a uniform grid x_t = x0 + t·dx.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn from_fn<F: Fn(f64) -> f64>(x0: f64, x1: f64, n: usize, f: F) -> Self {
        assert!(n >= 2 && x1 > x0);
        let dx = (x1 - x0) / (n - 1) as f64;
        let values = (0..n).map(|t| f(x0 + t as f64 * dx)).collect();
        Self { x0, dx, values }
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.dx * (self.values.len() - 1) as f64
    }

    /// Cubic (4-point Lagrange) interpolation; zero outside the sample range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (x - self.x0) / self.dx;
        if t < 0.0 || t > (n - 1) as f64 {
            return 0.0;
        }
        let i1 = (t.floor() as usize).clamp(1, n.saturating_sub(3).max(1)) as i64;
        let i0 = (i1 - 1) as usize;
        let s = t - i1 as f64;
        let v = &self.values;
        let (a, b, c, d) = (v[i0], v[i0 + 1], v[i0 + 2], v[i0 + 3.min(n - 1 - i0)]);
        // Lagrange basis at offsets -1, 0, 1, 2
        let w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        w0 * a + w1 * b + w2 * c + w3 * d
    }

    /// Direct evaluation of the j-th transform derivative
    /// `∫ (−ix)^j φ(x) e^{−ixϱ} dx`
    /// by composite Gauss–Legendre panels sized to the oscillation.
    pub fn transform_deriv_direct(&self, j: u32, rho: f64) -> Complex64 {
        let (gl_x, gl_w) = gauss_legendre(8);
        let a = self.x0;
        let b = self.x_max();
        // at most ~1.5 radians of phase per 8-point panel, and never wider
        // than 1/2 so the non-oscillatory factor is resolved too
        let width = (1.5 / rho.abs().max(1.0)).min(0.5);
        let panels = ((b - a) / width).ceil() as usize;
        let width = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let pa = a + k as f64 * width;
            let c = pa + 0.5 * width;
            let h = 0.5 * width;
            let mut s = Complex64::new(0.0, 0.0);
            for (x, w) in gl_x.iter().zip(&gl_w) {
                let xv = c + h * x;
                let phi = self.eval(xv);
                if phi == 0.0 {
                    continue;
                }
                let weight = Complex64::new(0.0, -xv).powu(j);
                let th = -xv * rho;
                s += *w * phi * weight * Complex64::new(th.cos(), th.sin());
            }
            acc += s * h;
        }
        acc
    }

    /// Exact-sample evaluation of the j-th transform derivative at an
    /// arbitrary ϱ: the trapezoid/DFT sum dx·Σ (−ix_t)^j φ(x_t) e^{−ix_t ϱ}
    /// with a phase recurrence. This is the same rule the FFT table uses,
    /// evaluated off-grid; unlike `transform_deriv_direct` it never
    /// interpolates φ, so its noise floor is set by the samples alone.
    pub fn transform_deriv_exact(&self, j: u32, rho: f64) -> Complex64 {
        self.prepare_transform(j).eval(rho)
    }

    /// Precomputes the weights (−ix_t)^j φ(x_t) for repeated transform
    /// evaluations at many ϱ.
    pub fn prepare_transform(&self, j: u32) -> OscillatorySum {
        let weights: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(t, v)| {
                let x = self.x0 + t as f64 * self.dx;
                Complex64::new(0.0, -x).powu(j) * *v
            })
            .collect();
        OscillatorySum {
            x0: self.x0,
            dx: self.dx,
            weights,
        }
    }

    /// Transform-derivative table on the uniform grid ϱ_k = k·step for
    /// 0 ≤ ϱ_k ≤ rho_max, computed by a zero-padded FFT of the samples.
    pub fn transform_deriv_table(
        &self,
        j: u32,
        rho_max: f64,
        target_step: f64,
    ) -> Result<TransformTable, SampleError> {
        let n = self.values.len();
        if n < 2 {
            return Err(SampleError::TooFewSamples);
        }
        let available = std::f64::consts::PI / self.dx;
        if rho_max > available {
            return Err(SampleError::RhoMaxUnreachable {
                requested: rho_max,
                available,
            });
        }
        // step = 2π/(N·dx) ≤ target_step
        let min_n = (2.0 * std::f64::consts::PI / (target_step * self.dx)).ceil() as usize;
        let big_n = min_n.max(2 * n).next_power_of_two();
        let mut buf = vec![Complex64::new(0.0, 0.0); big_n];
        for (t, v) in self.values.iter().enumerate() {
            let x = self.x0 + t as f64 * self.dx;
            buf[t] = Complex64::new(0.0, -x).powu(j) * *v;
        }
        let plan = FftPlan::new(big_n).expect("power of two");
        plan.process(&mut buf, false);
        let step = 2.0 * std::f64::consts::PI / (big_n as f64 * self.dx);
        let keep = ((rho_max / step).ceil() as usize + 2).min(big_n / 2);
        let mut values = Vec::with_capacity(keep);
        for (k, g) in buf.iter().enumerate().take(keep) {
            let rho_k = k as f64 * step;
            let th = -self.x0 * rho_k;
            values.push(self.dx * g * Complex64::new(th.cos(), th.sin()));
        }
        Ok(TransformTable { step, values })
    }
}

/// A prepared trapezoid/DFT sum Σ w_t e^{−i x_t ϱ}, exact in the samples.
pub struct OscillatorySum {
    x0: f64,
    dx: f64,
    weights: Vec<Complex64>,
}

impl OscillatorySum {
    pub fn eval(&self, rho: f64) -> Complex64 {
        let step = Complex64::new((-self.dx * rho).cos(), (-self.dx * rho).sin());
        let mut phase = Complex64::new((-self.x0 * rho).cos(), (-self.x0 * rho).sin());
        let mut acc = Complex64::new(0.0, 0.0);
        for w in &self.weights {
            acc += phase * w;
            phase *= step;
        }
        acc * self.dx
    }
}

/// Dense uniform table of a transform on ϱ ≥ 0; negative arguments use the
/// real-function symmetry `f̂(−ϱ) = conj(f̂(ϱ))`.
#[derive(Debug, Clone)]
pub struct TransformTable {
    pub step: f64,
    pub values: Vec<Complex64>,
}

impl TransformTable {
    pub fn rho_max(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    /// Cubic interpolation; panics outside ±rho_max in debug builds and
    /// clamps in release (callers guard the range).
    pub fn eval(&self, rho: f64) -> Complex64 {
        let v = self.eval_nonneg(rho.abs());
        if rho < 0.0 {
            v.conj()
        } else {
            v
        }
    }

    fn eval_nonneg(&self, rho: f64) -> Complex64 {
        let n = self.values.len();
        debug_assert!(rho <= self.rho_max() + self.step);
        let t = rho / self.step;
        // 6-point Lagrange on offsets −2..3 relative to the bracketing node
        let i_mid = (t.floor() as i64).clamp(2, n as i64 - 4);
        let i0 = (i_mid - 2) as usize;
        let s = t - i_mid as f64;
        let v = &self.values;
        let mut out = Complex64::new(0.0, 0.0);
        for (k, offset) in (-2i32..=3).enumerate() {
            let mut w = 1.0;
            for other in -2i32..=3 {
                if other != offset {
                    w *= (s - other as f64) / (offset - other) as f64;
                }
            }
            out += w * v[i0 + k];
        }
        out
    }
}

/// Samples a centered Gaussian e^{−x²} on [−8, 8]; its transform is
/// √π·e^{−ϱ²/4}, used as a closed-form oracle.
pub fn gaussian_sample() -> SampledFunction {
    SampledFunction::from_fn(-8.0, 8.0, 1 << 14, |x| (-x * x).exp())
}
