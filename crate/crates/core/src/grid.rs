//! Complex-valued functions sampled on uniform periodic boxes
//! [−L, L)^d with power-of-2 points per axis, plus the discrete Fourier
//! pairing used by every spectral operator.
//!
//! Conventions: forward kernel e^{−i⟨x,ξ⟩}, inverse carries (2π)^{−d};
//! discrete frequencies ξ_k = (π/L)·k with signed k ∈ [−n/2, n/2).

use crate::fft::FftPlan;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("points per axis must be a power of two, got {0}")]
    BadSize(usize),
    #[error("dimension must be 1..=4, got {0}")]
    BadDimension(usize),
    #[error("box half-width must be positive, got {0}")]
    BadBox(f64),
    #[error("grid under-resolved: {what} requires {requirement}")]
    UnderResolved { what: String, requirement: String },
    #[error("cube does not align with the grid: {0}")]
    Misaligned(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    n: usize,
    box_half: f64,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(dim: usize, n: usize, box_half: f64) -> Result<Self, GridError> {
        if !(1..=4).contains(&dim) {
            return Err(GridError::BadDimension(dim));
        }
        if n == 0 || !n.is_power_of_two() {
            return Err(GridError::BadSize(n));
        }
        if !(box_half > 0.0) {
            return Err(GridError::BadBox(box_half));
        }
        Ok(Self {
            dim,
            n,
            box_half,
            values: vec![Complex64::new(0.0, 0.0); n.pow(dim as u32)],
        })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(
        dim: usize,
        n: usize,
        box_half: f64,
        mut f: F,
    ) -> Result<Self, GridError> {
        let mut g = Self::zeros(dim, n, box_half)?;
        let mut x = vec![0.0; dim];
        for idx in 0..g.values.len() {
            g.coords_of(idx, &mut x);
            g.values[idx] = f(&x);
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_half(&self) -> f64 {
        self.box_half
    }

    /// Grid spacing h = 2L/n.
    pub fn h(&self) -> f64 {
        2.0 * self.box_half / self.n as f64
    }

    /// Frequency spacing Δξ = π/L.
    pub fn freq_step(&self) -> f64 {
        std::f64::consts::PI / self.box_half
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multi-index of a flat index (row-major, last axis fastest).
    #[inline]
    pub fn multi_index(&self, mut idx: usize, out: &mut [usize]) {
        for ax in (0..self.dim).rev() {
            out[ax] = idx % self.n;
            idx /= self.n;
        }
    }

    #[inline]
    pub fn flat_index(&self, mi: &[usize]) -> usize {
        let mut idx = 0;
        for &c in mi {
            idx = idx * self.n + c;
        }
        idx
    }

    /// Physical coordinates of a flat index.
    #[inline]
    pub fn coords_of(&self, idx: usize, out: &mut [f64]) {
        let mut rem = idx;
        let h = self.h();
        for ax in (0..self.dim).rev() {
            let c = rem % self.n;
            rem /= self.n;
            out[ax] = -self.box_half + c as f64 * h;
        }
    }

    /// Signed frequency index of an array index along one axis.
    #[inline]
    pub fn signed_freq(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Frequency vector of a flat index.
    #[inline]
    pub fn freq_of(&self, idx: usize, out: &mut [f64]) {
        let mut rem = idx;
        let step = self.freq_step();
        for ax in (0..self.dim).rev() {
            let c = rem % self.n;
            rem /= self.n;
            out[ax] = step * self.signed_freq(c) as f64;
        }
    }

    fn fft_axes(&mut self, inverse: bool) {
        let plan = FftPlan::new(self.n).expect("power of two");
        let n = self.n;
        let total = self.values.len();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for ax in (0..self.dim).rev() {
            // stride of this axis in the flat layout
            let stride = n.pow((self.dim - 1 - ax) as u32);
            let lines = total / n;
            for li in 0..lines {
                // decompose line index into (outer, inner) around the axis
                let inner = li % stride;
                let outer = li / stride;
                let base = outer * stride * n + inner;
                for (t, v) in line.iter_mut().enumerate() {
                    *v = self.values[base + t * stride];
                }
                plan.process(&mut line, inverse);
                for (t, v) in line.iter().enumerate() {
                    self.values[base + t * stride] = *v;
                }
            }
        }
    }

    /// Samples of the continuum transform f̂(ξ_k) = h^d Σ f(x) e^{−i⟨x,ξ_k⟩}.
    pub fn to_fourier(&self) -> GridFunction {
        let mut out = self.clone();
        out.fft_axes(false);
        let hd = self.h().powi(self.dim as i32);
        let mut mi = vec![0usize; self.dim];
        for idx in 0..out.values.len() {
            out.multi_index(idx, &mut mi);
            let parity: usize = mi.iter().sum();
            let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
            out.values[idx] *= hd * sign;
        }
        out
    }

    /// Inverse of `to_fourier`: f(x_j) = (2π)^{−d} Σ f̂(ξ_k) e^{i⟨x_j,ξ_k⟩} Δξ^d.
    pub fn from_fourier(&self) -> GridFunction {
        let mut tmp = self.clone();
        let mut mi = vec![0usize; self.dim];
        for idx in 0..tmp.values.len() {
            tmp.multi_index(idx, &mut mi);
            let parity: usize = mi.iter().sum();
            if parity % 2 == 1 {
                tmp.values[idx] = -tmp.values[idx];
            }
        }
        tmp.fft_axes(true);
        let inv_hd = 1.0 / self.h().powi(self.dim as i32);
        for v in tmp.values.iter_mut() {
            *v *= inv_hd;
        }
        tmp
    }

    /// Applies a Fourier multiplier m(ξ): FFT, pointwise multiply, inverse.
    pub fn apply_symbol<F: FnMut(&[f64]) -> Complex64>(&self, mut m: F) -> GridFunction {
        let mut hat = self.clone();
        hat.fft_axes(false);
        let mut xi = vec![0.0; self.dim];
        for idx in 0..hat.values.len() {
            hat.freq_of(idx, &mut xi);
            hat.values[idx] *= m(&xi);
        }
        hat.fft_axes(true);
        hat
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        let hd = self.h().powi(self.dim as i32);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * hd).sqrt()
    }

    /// Grid Riemann L^p norm, p ∈ (0, ∞).
    pub fn lp_norm(&self, p: f64) -> f64 {
        let hd = self.h().powi(self.dim as i32);
        (self
            .values
            .iter()
            .map(|v| v.norm().powf(p))
            .sum::<f64>()
            * hd)
            .powf(1.0 / p)
    }

    /// Bilinear grid pairing ⟨f, g⟩ = Σ f·g h^d (no conjugation).
    pub fn pair(&self, other: &GridFunction) -> Complex64 {
        assert_eq!(self.values.len(), other.values.len());
        let hd = self.h().powi(self.dim as i32);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            * hd
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        let mut out = self.clone();
        for a in out.values.iter_mut() {
            *a *= c;
        }
        out
    }
}
