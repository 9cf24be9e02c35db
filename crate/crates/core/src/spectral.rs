//! Discrete Fourier engine for the means and their layers: applies symbols
//! composed with the gauge, computes layer kernels by periodization, and
//! verifies the kernel localization bounds.

use crate::gauge::MinkowskiGauge;
use crate::grid::{GridError, GridFunction};
use crate::multiplier::{LayerBuilder, LayerProfile, RieszSymbol};
use num_complex::Complex64;

/// Applies the means symbol (1 − (ρ(ξ)/t)^a)₊^λ.
pub fn riesz_apply(f: &GridFunction, gauge: &MinkowskiGauge, sym: &RieszSymbol) -> GridFunction {
    f.apply_symbol(|xi| Complex64::new(sym.full_symbol(gauge.rho(xi)), 0.0))
}

/// Applies h_{λ,ℓ}(ρ(D)) (normalized = false) or
/// A_{λ,ℓ} = 2^{ℓ(λ+(d+1)/2)} h_{λ,ℓ}(ρ(D)) (normalized = true).
///
/// The grid must resolve the layer scale: Δξ ≤ 2^(−ℓ−3).
pub fn layer_operator(
    f: &GridFunction,
    gauge: &MinkowskiGauge,
    profile: &LayerProfile,
    normalized: bool,
) -> Result<GridFunction, GridError> {
    let required = (2.0f64).powi(-(profile.ell as i32) - 3);
    let got = f.freq_step();
    if got > required {
        return Err(GridError::UnderResolved {
            what: format!("layer ℓ={}", profile.ell),
            requirement: format!(
                "Δξ = π/L ≤ {required:.3e} (box half-width ≥ {:.1})",
                std::f64::consts::PI / required
            ),
        });
    }
    let scale = if normalized {
        (2.0f64).powi(profile.ell as i32)
            .powf(profile.lambda + (f.dim() as f64 + 1.0) / 2.0)
    } else {
        1.0
    };
    Ok(f.apply_symbol(|xi| Complex64::new(scale * profile.eval(gauge.rho(xi)), 0.0)))
}

/// Spatial kernel K_{λ,ℓ} = F^{-1}[h_{λ,ℓ}∘ρ] sampled by periodization.
///
/// Preconditions: the box absorbs the essential support
/// (L ≥ C0·2^(ℓ+4)) and the frequency grid covers the symbol support.
pub fn kernel(
    profile: &LayerProfile,
    gauge: &MinkowskiGauge,
    n: usize,
    box_half: f64,
) -> Result<GridFunction, GridError> {
    let consts = gauge.gauge_constants();
    let min_box = consts.c_max * (2.0f64).powi(profile.ell as i32 + 4);
    if box_half < min_box {
        return Err(GridError::UnderResolved {
            what: format!("kernel ℓ={}", profile.ell),
            requirement: format!("box half-width ≥ {min_box}"),
        });
    }
    let d = gauge.dim();
    let coverage = std::f64::consts::PI * n as f64 / (2.0 * box_half);
    let needed = 2.0 * gauge.max_stretch();
    if coverage < needed {
        return Err(GridError::UnderResolved {
            what: format!("kernel ℓ={}", profile.ell),
            requirement: format!(
                "ξ-coverage πn/(2L) ≥ {needed:.2} (n ≥ {})",
                (needed * 2.0 * box_half / std::f64::consts::PI).ceil()
            ),
        });
    }
    let mut hat = GridFunction::zeros(d, n, box_half)?;
    let mut xi = vec![0.0; d];
    for idx in 0..hat.len() {
        hat.freq_of(idx, &mut xi);
        hat.values[idx] = Complex64::new(profile.eval(gauge.rho(&xi)), 0.0);
    }
    Ok(hat.from_fourier())
}

/// Kernel with automatically chosen box and grid size.
pub fn kernel_auto(
    profile: &LayerProfile,
    gauge: &MinkowskiGauge,
) -> Result<(GridFunction, usize, f64), GridError> {
    let consts = gauge.gauge_constants();
    let box_half = consts.c_max * (2.0f64).powi(profile.ell as i32 + 4);
    let needed = 2.2 * gauge.max_stretch();
    let n_min = (needed * 2.0 * box_half / std::f64::consts::PI).ceil() as usize;
    let n = n_min.next_power_of_two().max(64);
    let k = kernel(profile, gauge, n, box_half)?;
    Ok((k, n, box_half))
}

/// Localization measurements for one layer kernel.
#[derive(Debug, Clone)]
pub struct KernelReport {
    pub ell: u32,
    /// max |K| over |x| ≤ c0·2^(ℓ−2).
    pub sup_inner: f64,
    /// max |K| over the annulus c0·2^(ℓ−2) < |x| < C0·2^(ℓ+2).
    pub sup_annulus: f64,
    /// max of |K(x)|·|x|^N over |x| ≥ C0·2^(ℓ+2).
    pub sup_outer_scaled: f64,
    /// Sharp constant in the box-majorant comparison for 2^{−ℓd}|A-kernel|.
    pub majorant_constant: f64,
    /// Decay order N used for the outer weight and the majorant.
    pub n_order: u32,
    /// True when the inner region contains only the origin cell.
    pub inner_vacuous: bool,
    pub grid_n: usize,
    pub box_half: f64,
    /// max |Im K| / max |K|; tiny for centered gauges.
    pub imag_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub rows: Vec<KernelReport>,
    /// Least-squares slope of log2 sup_annulus against ℓ.
    pub annulus_slope: f64,
    /// Expected slope −(λ + (d+1)/2).
    pub expected_slope: f64,
    pub pass_inner: bool,
    pub pass_slope: bool,
    pub pass_outer: bool,
    pub pass_majorant: bool,
}

impl DecayReport {
    pub fn pass(&self) -> bool {
        self.pass_inner && self.pass_slope && self.pass_outer && self.pass_majorant
    }
}

fn measure_kernel(
    k: &GridFunction,
    profile: &LayerProfile,
    gauge: &MinkowskiGauge,
    n_order: u32,
    grid_n: usize,
    box_half: f64,
) -> KernelReport {
    let consts = gauge.gauge_constants();
    let d = k.dim();
    let two_ell = (2.0f64).powi(profile.ell as i32);
    let r_in = consts.c_min * two_ell / 4.0;
    let r_out = consts.c_max * two_ell * 4.0;
    let a_scale = two_ell.powf(profile.lambda + (d as f64 + 1.0) / 2.0);
    let geom = 1.0 - (2.0f64).powi(-(n_order as i32));
    let mut sup_inner = 0.0f64;
    let mut sup_annulus = 0.0f64;
    let mut sup_outer = 0.0f64;
    let mut c_major = 0.0f64;
    let mut sup_abs = 0.0f64;
    let mut sup_imag = 0.0f64;
    let mut inner_points = 0usize;
    let mut x = vec![0.0; d];
    for idx in 0..k.len() {
        k.coords_of(idx, &mut x);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = k.values[idx].norm();
        sup_abs = sup_abs.max(v);
        sup_imag = sup_imag.max(k.values[idx].im.abs());
        if r <= r_in {
            sup_inner = sup_inner.max(v);
            inner_points += 1;
        } else if r >= r_out {
            sup_outer = sup_outer.max(v * r.powi(n_order as i32));
        } else {
            sup_annulus = sup_annulus.max(v);
        }
        // majorant Σ_n 2^{−n(N−d)} H_{ℓ,n}(x) = 2^{−ℓd}·2^{−n0·N}/(1−2^{−N})
        let n0 = if r <= two_ell {
            0.0
        } else {
            (r / two_ell).log2().ceil()
        };
        let major = (2.0f64).powi(-(profile.ell as i32) * d as i32)
            * (2.0f64).powf(-n0 * n_order as f64)
            / geom;
        let lhs = v * a_scale * (2.0f64).powi(-(profile.ell as i32) * d as i32);
        c_major = c_major.max(lhs / major);
    }
    KernelReport {
        ell: profile.ell,
        sup_inner,
        sup_annulus,
        sup_outer_scaled: sup_outer,
        majorant_constant: c_major,
        n_order,
        inner_vacuous: inner_points <= 1,
        grid_n,
        box_half,
        imag_fraction: sup_imag / sup_abs.max(1e-300),
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Builds kernels across the given layers and checks all four localization
/// properties. Needs at least 4 consecutive ℓ values. Rows whose inner
/// region is only the origin cell are vacuous for the inner test; pairs
/// below the double-precision floor of the annulus scale are skipped.
pub fn decay_report(
    builder: &LayerBuilder,
    gauge: &MinkowskiGauge,
    ells: &[u32],
    n_order: u32,
) -> Result<DecayReport, GridError> {
    assert!(ells.len() >= 4, "need at least 4 consecutive layers");
    assert!(
        n_order as usize > gauge.dim(),
        "majorant requires N > d"
    );
    let d = gauge.dim();
    let mut rows = Vec::new();
    for &ell in ells {
        let profile = builder
            .layer(ell)
            .map_err(|e| GridError::UnderResolved {
                what: format!("layer build ℓ={ell}"),
                requirement: e.to_string(),
            })?;
        let (k, n, box_half) = kernel_auto(&profile, gauge)?;
        rows.push(measure_kernel(&k, &profile, gauge, n_order, n, box_half));
    }
    let lambda = builder.symbol.lambda;
    let expected = -(lambda + (d as f64 + 1.0) / 2.0);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.ell as f64, r.sup_annulus.log2()))
        .collect();
    let slope = least_squares_slope(&pts);
    let pass_slope = (slope - expected).abs() <= 0.2;

    let mut pass_inner = true;
    let floor = rows
        .iter()
        .map(|r| r.sup_annulus)
        .fold(0.0f64, f64::max)
        * 1e-12;
    for w in rows.windows(2) {
        if w[0].inner_vacuous || w[1].inner_vacuous {
            continue;
        }
        if w[0].sup_inner < floor || w[1].sup_inner < floor {
            continue;
        }
        let drop = (w[0].sup_inner / w[1].sup_inner).log2();
        if drop < n_order as f64 - 1.0 {
            pass_inner = false;
        }
    }

    let outer_max = rows.iter().map(|r| r.sup_outer_scaled).fold(0.0f64, f64::max);
    let outer_min = rows
        .iter()
        .map(|r| r.sup_outer_scaled)
        .fold(f64::INFINITY, f64::min);
    let pass_outer = outer_max <= 10.0 * outer_min.max(1e-300) || outer_max == 0.0;

    let maj_max = rows.iter().map(|r| r.majorant_constant).fold(0.0f64, f64::max);
    let maj_min = rows
        .iter()
        .map(|r| r.majorant_constant)
        .fold(f64::INFINITY, f64::min);
    let pass_majorant = maj_max <= 10.0 * maj_min.max(1e-300);

    Ok(DecayReport {
        rows,
        annulus_slope: slope,
        expected_slope: expected,
        pass_inner,
        pass_slope,
        pass_outer,
        pass_majorant,
    })
}

/// Sup-norm errors ‖R^λ_{a,t} f − f‖_∞ along a dilation sequence.
pub fn convergence_errors(
    f: &GridFunction,
    gauge: &MinkowskiGauge,
    lambda: f64,
    a: f64,
    ts: &[f64],
) -> Vec<f64> {
    ts.iter()
        .map(|&t| {
            let sym = RieszSymbol::new(a, lambda, t);
            riesz_apply(f, gauge, &sym).sub(f).sup_norm()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::{build_phi0, build_psi};

    fn test_builder(lambda: f64, a: f64) -> LayerBuilder {
        let bump = build_phi0(lambda, 3).unwrap();
        let psi = build_psi(&bump);
        LayerBuilder::new(RieszSymbol::new(a, lambda, 1.0), &bump, &psi).unwrap()
    }

    fn gaussian_grid(n: usize, box_half: f64, width: f64) -> GridFunction {
        GridFunction::from_fn(2, n, box_half, |x| {
            let r2 = x.iter().map(|v| v * v).sum::<f64>();
            Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn layer_annihilates_low_frequency_input() {
        // f̂ supported where ρ < 1/4 ⟹ T_ℓ f = 0 for all ℓ
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let b = test_builder(0.5, 1.0);
        let f = gaussian_grid(256, 128.0, 20.0); // f̂ lives at |ξ| ≲ 0.05 ≪ 1/2
        for ell in 0..=2u32 {
            let p = b.layer(ell).unwrap();
            let out = layer_operator(&f, &gauge, &p, false).unwrap();
            assert!(
                out.sup_norm() < 1e-8 * f.sup_norm(),
                "ℓ={ell}: {}",
                out.sup_norm()
            );
        }
    }

    #[test]
    fn layer_zero_is_unnormalized_layer_zero() {
        // at ℓ=0 the normalization factor is 2^0 = 1
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let b = test_builder(0.5, 1.0);
        let p = b.layer(0).unwrap();
        let f = gaussian_grid(128, 64.0, 2.0);
        let plain = layer_operator(&f, &gauge, &p, false).unwrap();
        let normed = layer_operator(&f, &gauge, &p, true).unwrap();
        let diff: f64 = plain
            .values
            .iter()
            .zip(&normed.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff == 0.0);
    }

    #[test]
    fn under_resolved_layer_rejected_with_requirement() {
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let b = test_builder(0.5, 1.0);
        let p = b.layer(6).unwrap();
        let f = gaussian_grid(64, 16.0, 2.0);
        match layer_operator(&f, &gauge, &p, false) {
            Err(GridError::UnderResolved { requirement, .. }) => {
                assert!(requirement.contains("box half-width"));
            }
            other => panic!("expected UnderResolved, got {other:?}"),
        }
    }

    #[test]
    fn kernel_is_real_for_ball_gauge() {
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let b = test_builder(0.5, 1.0);
        let p = b.layer(0).unwrap();
        let (k, n, box_half) = kernel_auto(&p, &gauge).unwrap();
        let report = measure_kernel(&k, &p, &gauge, 4, n, box_half);
        assert!(report.imag_fraction < 1e-10);
    }

    #[test]
    fn kernel_box_guard() {
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let b = test_builder(0.5, 1.0);
        let p = b.layer(5).unwrap();
        assert!(matches!(
            kernel(&p, &gauge, 256, 64.0),
            Err(GridError::UnderResolved { .. })
        ));
    }

    #[test]
    fn kernel_peak_sits_in_the_annulus() {
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let b = test_builder(0.5, 1.0);
        let p = b.layer(5).unwrap();
        let (k, n, box_half) = kernel_auto(&p, &gauge).unwrap();
        let r = measure_kernel(&k, &p, &gauge, 4, n, box_half);
        assert!(r.sup_annulus > r.sup_inner * 10.0);
        assert!(r.sup_annulus > 0.0);
    }

    #[test]
    fn doubling_n_preserves_kernel_sups() {
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let b = test_builder(0.5, 1.0);
        let p = b.layer(3).unwrap();
        let box_half = 128.0;
        let k1 = kernel(&p, &gauge, 256, box_half).unwrap();
        let k2 = kernel(&p, &gauge, 512, box_half).unwrap();
        let r1 = measure_kernel(&k1, &p, &gauge, 4, 256, box_half);
        let r2 = measure_kernel(&k2, &p, &gauge, 4, 512, box_half);
        assert!(
            (r1.sup_annulus - r2.sup_annulus).abs() < 0.01 * r2.sup_annulus,
            "{} vs {}",
            r1.sup_annulus,
            r2.sup_annulus
        );
    }

    #[test]
    fn riesz_means_converge_for_gaussian() {
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let f = gaussian_grid(256, 32.0, 1.0);
        for a in [1.0, 2.0] {
            let errs = convergence_errors(&f, &gauge, 1.0 / 6.0, a, &[4.0, 8.0, 16.0, 32.0]);
            for w in errs.windows(2) {
                assert!(w[1] < w[0], "a={a}: errors {errs:?}");
            }
        }
    }

    #[test]
    fn partial_sum_operator_reconstructs_means() {
        // Σ_{ℓ≤L} h_{λ,ℓ}(ρ(D)) f + complement ≈ R^λ_{a,1} f on a grid that
        // cannot distinguish scales finer than 2^{−L}
        let gauge = MinkowskiGauge::ball(2).unwrap();
        let lambda = 0.5;
        let a = 1.0;
        let b = test_builder(lambda, a);
        let profiles = b.layers(5).unwrap();
        let f = gaussian_grid(1024, 512.0, 1.0);
        let sym = RieszSymbol::new(a, lambda, 1.0);
        let full = riesz_apply(&f, &gauge, &sym);
        let approx = f.apply_symbol(|xi| {
            let rho = gauge.rho(xi);
            let layers: f64 = profiles.iter().map(|p| p.eval(rho)).sum();
            Complex64::new(layers + sym.smooth_complement(rho), 0.0)
        });
        let err = full.sub(&approx).sup_norm();
        assert!(err < 1e-4 * f.sup_norm().max(1.0), "err = {err}");
    }
}
