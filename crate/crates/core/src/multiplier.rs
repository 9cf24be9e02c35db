//! The Riesz profile h_λ(ϱ) = χ_{a,λ}(ϱ)(1−ϱ)₊^λ and its layers h_{λ,ℓ},
//! built by convolving (1−u)₊^λ with the window transforms Φ̂∘ and dilated
//! Ψ̂. Layer ℓ is concentrated where |1−ϱ| ≍ 2^(−ℓ).
//!
//! After the substitution u = 1 − τ the layer values reduce to one-sided
//! power-weighted tails
//!   h_{λ,ℓ}(ϱ) = χ_{a,λ}(ϱ)/(2π) · 2^{−(ℓ−1)λ} ∫₀^∞ σ^λ Ψ̂(b + σ) dσ,
//! with b = 2^{ℓ−1}(ϱ−1) (and Φ̂∘, b = ϱ−1, for ℓ = 0), which is what the
//! evaluator computes.

use crate::bump::{AnnularBump, CancellingBump};
use crate::quad::{gauss_legendre, integrate_power_weighted};
use crate::sample::{SampleError, TransformTable};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MultiplierError {
    #[error("layer {ell} requires ϱ-resolution at most {required:.3e}, got {got:.3e}")]
    UnderResolved { ell: u32, required: f64, got: f64 },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("need at least {0} consecutive layers")]
    TooFewLayers(usize),
}

/// Smooth transition: 0 for t ≤ 0, 1 for t ≥ 1.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let g = (-1.0 / t).exp();
        let h = (-1.0 / (1.0 - t)).exp();
        g / (g + h)
    }
}

/// The fixed library cutoff χ̃: ≡1 on [3/4, 3/2], supported in (1/2, 2).
pub fn chi_tilde(rho: f64) -> f64 {
    smoothstep((rho - 0.5) / 0.25) * smoothstep((2.0 - rho) / 0.5)
}

/// The Riesz multiplier data (a, λ, t); t = 1 is the scale-invariant case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszSymbol {
    pub a: f64,
    pub lambda: f64,
    pub t: f64,
}

impl RieszSymbol {
    pub fn new(a: f64, lambda: f64, t: f64) -> Self {
        assert!(a > 0.0 && t > 0.0);
        Self { a, lambda, t }
    }

    /// Ratio (1−ϱ^a)/(1−ϱ), smooth across ϱ = 1 with value a.
    fn ratio(&self, rho: f64) -> f64 {
        let u = rho - 1.0;
        if u.abs() < 1e-5 {
            let a = self.a;
            a + a * (a - 1.0) * u / 2.0 + a * (a - 1.0) * (a - 2.0) * u * u / 6.0
        } else {
            (1.0 - rho.powf(self.a)) / (1.0 - rho)
        }
    }

    /// χ_{a,λ}(ϱ) = χ̃(ϱ)·((1−ϱ^a)/(1−ϱ))^λ, smooth with value χ̃(1)·a^λ
    /// at ϱ = 1.
    pub fn chi_a_lambda(&self, rho: f64) -> f64 {
        let cut = chi_tilde(rho);
        if cut == 0.0 {
            return 0.0;
        }
        cut * self.ratio(rho).powf(self.lambda)
    }

    /// The profile h_λ(ϱ) = χ_{a,λ}(ϱ)(1−ϱ)₊^λ; vanishes for ϱ ≥ 1 and
    /// outside (1/2, 2).
    pub fn h_lambda(&self, rho: f64) -> f64 {
        if rho >= 1.0 {
            return 0.0;
        }
        self.chi_a_lambda(rho) * (1.0 - rho).powf(self.lambda)
    }

    /// Full means symbol (1 − (ϱ/t)^a)₊^λ with no cutoff.
    pub fn full_symbol(&self, rho: f64) -> f64 {
        let s = 1.0 - (rho / self.t).powf(self.a);
        if s <= 0.0 {
            0.0
        } else {
            s.powf(self.lambda)
        }
    }

    /// The complement (1 − χ̃(ϱ))(1−ϱ^a)₊^λ split off before layering.
    pub fn smooth_complement(&self, rho: f64) -> f64 {
        let s = 1.0 - rho.powf(self.a);
        if s <= 0.0 {
            return 0.0;
        }
        (1.0 - chi_tilde(rho)) * s.powf(self.lambda)
    }
}

/// Samples of one layer h_{λ,ℓ} on a uniform ϱ-grid over (1/4, 4).
#[derive(Debug, Clone)]
pub struct LayerProfile {
    pub ell: u32,
    pub lambda: f64,
    pub rho0: f64,
    pub step: f64,
    pub samples: Vec<f64>,
}

impl LayerProfile {
    /// Cubic interpolation; exactly zero outside the χ̃ support (1/2, 2).
    pub fn eval(&self, rho: f64) -> f64 {
        if !(0.5..=2.0).contains(&rho) {
            return 0.0;
        }
        let n = self.samples.len();
        let t = (rho - self.rho0) / self.step;
        let i1 = (t.floor() as i64).clamp(1, n as i64 - 3);
        let i0 = (i1 - 1) as usize;
        let s = t - i1 as f64;
        let v = &self.samples;
        let w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        w0 * v[i0] + w1 * v[i0 + 1] + w2 * v[i0 + 2] + w3 * v[i0 + 3]
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Extent of the window-transform tables; the transforms are below their
/// double-precision floor well before this.
const WINDOW_RHO_MAX: f64 = 8192.0;
/// The near/far split of the power tail: σ^λ = σ^λ·cut(σ) + σ^λ·(1−cut(σ))
/// with cut ≡ 1 on [0,1] and ≡ 0 on [2,∞).
fn near_cut(sigma: f64) -> f64 {
    smoothstep(2.0 - sigma)
}

/// A window transform cached on a dense uniform grid together with the
/// precomputed far part of its power tail
///   far(b) = ∫₀^∞ σ^λ (1−cut(σ)) T(b+σ) dσ,
/// assembled once as an FFT cross-correlation (the far integrand is smooth,
/// so the trapezoid sum is superalgebraically exact). With it, every layer
/// value needs only the near-kink integral over σ ∈ [0, 2].
pub struct WindowTable {
    table: TransformTable,
    far: Vec<f64>,
    far_b0: f64,
    far_step: f64,
}

impl WindowTable {
    fn build(
        samples: &crate::sample::SampledFunction,
        lambda: f64,
    ) -> Result<Self, MultiplierError> {
        let rho_max = (std::f64::consts::PI / samples.dx).min(WINDOW_RHO_MAX);
        let table = samples.transform_deriv_table(0, rho_max, 0.006)?;
        let step = table.step;
        // T extended to negative arguments by symmetry
        let n_t = table.values.len();
        let t_len = 2 * n_t - 1;
        let g_len = n_t;
        let fft_len = (t_len + g_len).next_power_of_two();
        let plan = crate::fft::FftPlan::new(fft_len).expect("power of two");
        let mut t_buf = vec![num_complex::Complex64::new(0.0, 0.0); fft_len];
        for (i, slot) in t_buf.iter_mut().enumerate().take(t_len) {
            // index i ↔ argument v = (i − (n_t−1))·step
            let v_idx = i as i64 - (n_t as i64 - 1);
            slot.re = table.values[v_idx.unsigned_abs() as usize].re;
        }
        let mut g_buf = vec![num_complex::Complex64::new(0.0, 0.0); fft_len];
        for (m, slot) in g_buf.iter_mut().enumerate().take(g_len) {
            let sigma = m as f64 * step;
            let w = 1.0 - near_cut(sigma);
            if w > 0.0 {
                slot.re = sigma.powf(lambda) * w;
            }
        }
        plan.process(&mut t_buf, false);
        plan.process(&mut g_buf, false);
        for (a, b) in t_buf.iter_mut().zip(&g_buf) {
            *a *= b.conj();
        }
        plan.process(&mut t_buf, true);
        // corr[n] = Σ_m T_ext[n+m]·g[m]; b_n = (n − (n_t−1))·step
        let far: Vec<f64> = t_buf[..t_len].iter().map(|v| v.re * step).collect();
        Ok(Self {
            table,
            far,
            far_b0: -((n_t as f64 - 1.0) * step),
            far_step: step,
        })
    }

    #[inline]
    fn eval(&self, rho: f64) -> f64 {
        if rho.abs() >= self.table.rho_max() {
            return 0.0;
        }
        self.table.eval(rho).re
    }

    /// Largest |b| the far table covers with the full window extent.
    fn b_cap(&self) -> f64 {
        self.table.rho_max() - 1024.0
    }

    /// 6-point interpolation of the far part; zero once every argument is
    /// beyond the table. Callers keep |b| within `b_cap`.
    fn far_eval(&self, b: f64) -> f64 {
        if b >= self.table.rho_max() {
            return 0.0;
        }
        let t = (b - self.far_b0) / self.far_step;
        let n = self.far.len();
        let i_mid = (t.floor() as i64).clamp(2, n as i64 - 4);
        let i0 = (i_mid - 2) as usize;
        let s = t - i_mid as f64;
        let v = &self.far;
        let mut out = 0.0;
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

/// Builds layers for one symbol from the window transforms; the transform
/// tables are computed once and shared across ℓ.
pub struct LayerBuilder {
    pub symbol: RieszSymbol,
    pub n_circ: u32,
    phi_hat: WindowTable,
    psi_hat: WindowTable,
}

const RHO_LO: f64 = 0.25;
const RHO_HI: f64 = 4.0;

impl LayerBuilder {
    pub fn new(
        symbol: RieszSymbol,
        bump: &CancellingBump,
        psi: &AnnularBump,
    ) -> Result<Self, MultiplierError> {
        let lambda = symbol.lambda;
        let (phi_hat, psi_hat) = std::thread::scope(|scope| {
            let phi = scope.spawn(move || WindowTable::build(&bump.phi0, lambda));
            let psi_t = scope.spawn(move || WindowTable::build(&psi.psi, lambda));
            (
                phi.join().expect("window build panicked"),
                psi_t.join().expect("window build panicked"),
            )
        });
        Ok(Self {
            symbol,
            n_circ: bump.n_circ,
            phi_hat: phi_hat?,
            psi_hat: psi_hat?,
        })
    }

    /// ∫₀^∞ σ^λ T(base + σ) dσ: near-kink part by graded panels plus the
    /// precomputed far correlation.
    fn power_tail(table: &WindowTable, lambda: f64, base: f64) -> f64 {
        // σ ∈ [0, 1]: graded panels absorb σ^λ (cut ≡ 1 there)
        let mut acc = integrate_power_weighted(|s| table.eval(base + s), lambda, 1.0);
        // σ ∈ [1, 2]: smooth weighted piece of the near part
        let (gx, gw) = gauss_legendre(16);
        let c = 1.5;
        let h = 0.5;
        for (x, w) in gx.iter().zip(&gw) {
            let s = c + h * x;
            acc += w * h * s.powf(lambda) * near_cut(s) * table.eval(base + s);
        }
        acc + table.far_eval(base)
    }

    /// Raw layer value before the χ_{a,λ} factor and 1/(2π).
    fn tail_for(&self, ell: u32, rho: f64) -> f64 {
        let lambda = self.symbol.lambda;
        if ell == 0 {
            Self::power_tail(&self.phi_hat, lambda, rho - 1.0)
        } else {
            let scale = (2.0f64).powi(ell as i32 - 1);
            scale.powf(-lambda) * Self::power_tail(&self.psi_hat, lambda, scale * (rho - 1.0))
        }
    }

    /// Largest layer index the window tables can serve: the dilated base
    /// 2^(ℓ−1)·(ϱ−1) must stay within the far-table coverage over (1/4, 4).
    pub fn max_ell(&self) -> u32 {
        let cap = self.phi_hat.b_cap().min(self.psi_hat.b_cap());
        let mut ell = 0;
        while 3.0 * (2.0f64).powi(ell as i32 - 1) <= cap {
            ell += 1;
        }
        ell - 1
    }

    /// Pointwise h_{λ,ℓ}(ϱ).
    pub fn eval_layer(&self, ell: u32, rho: f64) -> f64 {
        let chi = self.symbol.chi_a_lambda(rho);
        if chi == 0.0 {
            return 0.0;
        }
        chi / (2.0 * std::f64::consts::PI) * self.tail_for(ell, rho)
    }

    /// Telescoped window formula for the partial sum Σ_{ℓ ≤ L} h_{λ,ℓ}:
    /// the Ψ dilates collapse onto a single Φ∘ window at scale 2^L.
    pub fn eval_window_sum(&self, big_l: u32, rho: f64) -> f64 {
        let chi = self.symbol.chi_a_lambda(rho);
        if chi == 0.0 {
            return 0.0;
        }
        let lambda = self.symbol.lambda;
        let scale = (2.0f64).powi(big_l as i32);
        chi / (2.0 * std::f64::consts::PI)
            * scale.powf(-lambda)
            * Self::power_tail(&self.phi_hat, lambda, scale * (rho - 1.0))
    }

    /// Samples layer ℓ at resolution finer than 2^(−ℓ−4) over (1/4, 4);
    /// sampling parallelizes over ϱ-chunks.
    pub fn layer(&self, ell: u32) -> Result<LayerProfile, MultiplierError> {
        if ell > self.max_ell() {
            return Err(MultiplierError::UnderResolved {
                ell,
                required: self.max_ell() as f64,
                got: ell as f64,
            });
        }
        let required = (2.0f64).powi(-(ell as i32 + 4));
        let step = required / 2.0;
        let count = ((RHO_HI - RHO_LO) / step).ceil() as usize + 1;
        let threads = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(16);
        let chunk = count.div_ceil(threads);
        let mut samples = vec![0.0; count];
        std::thread::scope(|scope| {
            for (c, out) in samples.chunks_mut(chunk).enumerate() {
                let start = c * chunk;
                scope.spawn(move || {
                    for (i, slot) in out.iter_mut().enumerate() {
                        let rho = RHO_LO + (start + i) as f64 * step;
                        *slot = self.eval_layer(ell, rho);
                    }
                });
            }
        });
        Ok(LayerProfile {
            ell,
            lambda: self.symbol.lambda,
            rho0: RHO_LO,
            step,
            samples,
        })
    }

    /// Layers 0..=lmax.
    pub fn layers(&self, lmax: u32) -> Result<Vec<LayerProfile>, MultiplierError> {
        (0..=lmax).map(|l| self.layer(l)).collect()
    }
}

/// One-shot layer construction (builds the transform tables each call; use
/// `LayerBuilder` to amortize them across ℓ).
pub fn build_layer(
    symbol: RieszSymbol,
    bump: &CancellingBump,
    psi: &AnnularBump,
    ell: u32,
) -> Result<LayerProfile, MultiplierError> {
    LayerBuilder::new(symbol, bump, psi)?.layer(ell)
}

/// Sup of |h_{λ,ℓ}(ϱ)|·2^{ℓλ}·(1+2^ℓ|1−ϱ|)^{N1} per layer, and whether the
/// sups are uniform across ℓ (max/min ratio below 10).
#[derive(Debug, Clone)]
pub struct LayerBoundReport {
    pub n1: u32,
    pub rows: Vec<(u32, f64)>,
    pub max_over_min: f64,
    pub pass: bool,
}

pub fn verify_layer_bounds(
    profiles: &[LayerProfile],
    n1: u32,
) -> Result<LayerBoundReport, MultiplierError> {
    if profiles.len() < 3 {
        return Err(MultiplierError::TooFewLayers(3));
    }
    let mut rows = Vec::new();
    for p in profiles {
        let two_ell = (2.0f64).powi(p.ell as i32);
        let lam_scale = two_ell.powf(p.lambda);
        let mut sup = 0.0f64;
        for (k, v) in p.samples.iter().enumerate() {
            let rho = p.rho0 + k as f64 * p.step;
            let weight = (1.0 + two_ell * (1.0 - rho).abs()).powi(n1 as i32);
            sup = sup.max(v.abs() * lam_scale * weight);
        }
        rows.push((p.ell, sup));
    }
    let max = rows.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let ratio = max / min.max(1e-300);
    Ok(LayerBoundReport {
        n1,
        rows,
        max_over_min: ratio,
        pass: ratio < 10.0,
    })
}

/// Fraction of ∫|h_{λ,ℓ}| lying outside the annulus 2^(−ℓ−3) ≤ |1−ϱ| ≤ 2^(−ℓ+3).
pub fn mass_outside_fraction(profile: &LayerProfile) -> f64 {
    let lo = (2.0f64).powi(-(profile.ell as i32) - 3);
    let hi = (2.0f64).powi(-(profile.ell as i32) + 3);
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (k, v) in profile.samples.iter().enumerate() {
        let rho = profile.rho0 + k as f64 * profile.step;
        let dist = (1.0 - rho).abs();
        if dist >= lo && dist <= hi {
            inside += v.abs();
        } else {
            outside += v.abs();
        }
    }
    outside / (inside + outside).max(1e-300)
}
