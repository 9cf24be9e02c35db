//! Muckenhoupt A₁, reverse Hölder RH_σ and Wilson A_∞ characteristics on
//! grids, weighted weak-type quasinorms, and the weighted-bound factor.
//!
//! Characteristic sups run over all grid-aligned cubes on small grids
//! (n ≤ 128 per axis) and over dyadic cubes with the 3^d lattice shifts
//! beyond; reports flag which regime produced them.

use crate::gauge::MinkowskiGauge;
use crate::grid::{GridError, GridFunction};
use crate::maximal::hl_maximal;
use crate::multiplier::RieszSymbol;
use crate::rng::{Rng, SmoothField};
use crate::spectral::riesz_apply;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("weight must be strictly positive everywhere")]
    NotPositive,
    #[error("reverse Hölder exponent must exceed 1, got {0}")]
    BadSigma(f64),
    #[error("σ = (q'/p)' undefined: need q < p' (got p={p}, q={q})")]
    BadPair { p: f64, q: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Per-axis size limit for the exact all-cubes sup.
const EXACT_LIMIT: usize = 128;
/// Wilson's constant iterates a maximal function per cube, so its exact
/// regime is smaller.
const WILSON_EXACT_LIMIT: usize = 32;

/// A positive weight sampled on the grid.
#[derive(Debug, Clone)]
pub struct WeightGrid {
    pub w: GridFunction,
}

#[derive(Debug, Clone)]
pub struct WeightReport {
    pub a1: f64,
    pub rh: Vec<(f64, f64)>,
    pub a_infty: f64,
    /// Largest scanned σ with finite RH characteristic.
    pub sigma_of_w: Option<f64>,
    /// False when the dyadic+shifts approximation produced the sups.
    pub exact_regime: bool,
}

impl WeightGrid {
    pub fn new(w: GridFunction) -> Result<Self, WeightError> {
        if w.values.iter().any(|v| !(v.re > 0.0) || v.im != 0.0) {
            return Err(WeightError::NotPositive);
        }
        Ok(Self { w })
    }

    /// Power weight (|x|+h)^(−alpha), regularized at the origin by the
    /// grid spacing.
    pub fn power(dim: usize, n: usize, box_half: f64, alpha: f64) -> Result<Self, WeightError> {
        let g = GridFunction::from_fn(dim, n, box_half, |x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            Complex64::new((r + 2.0 * box_half / n as f64).powf(-alpha), 0.0)
        })?;
        Self::new(g)
    }

    pub fn constant(dim: usize, n: usize, box_half: f64, c: f64) -> Result<Self, WeightError> {
        let g = GridFunction::from_fn(dim, n, box_half, |_| Complex64::new(c, 0.0))?;
        Self::new(g)
    }

    /// Two-level step weight: `hi` on the positive-x₀ half, `lo` elsewhere.
    pub fn step(dim: usize, n: usize, box_half: f64, lo: f64, hi: f64) -> Result<Self, WeightError> {
        let g = GridFunction::from_fn(dim, n, box_half, |x| {
            Complex64::new(if x[0] >= 0.0 { hi } else { lo }, 0.0)
        })?;
        Self::new(g)
    }

    fn vals(&self) -> Vec<f64> {
        self.w.values.iter().map(|v| v.re).collect()
    }

    pub fn is_exact_regime(&self) -> bool {
        self.w.n() <= EXACT_LIMIT
    }
}

fn prefix_sums(vals: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut acc = vals.to_vec();
    for ax in 0..d {
        let stride = n.pow((d - 1 - ax) as u32);
        for idx in 0..vals.len() {
            if (idx / stride) % n > 0 {
                acc[idx] += acc[idx - stride];
            }
        }
    }
    acc
}

fn box_sum(prefix: &[f64], n: usize, d: usize, lo: &[usize], hi: &[usize]) -> f64 {
    let mut total = 0.0;
    for corner in 0..(1u32 << d) {
        let mut idx = 0usize;
        let mut sign = 1.0;
        let mut skip = false;
        for ax in 0..d {
            let c = if (corner >> ax) & 1 == 1 {
                hi[ax]
            } else {
                sign = -sign;
                lo[ax]
            };
            if c == 0 {
                skip = true;
                break;
            }
            idx = idx * n + (c - 1);
        }
        if !skip {
            total += sign * prefix[idx];
        }
    }
    total
}

/// Advances a mixed-radix odometer; returns false after the last state.
fn odometer_next(pos: &mut [usize], limits: &[usize]) -> bool {
    for ax in (0..pos.len()).rev() {
        pos[ax] += 1;
        if pos[ax] < limits[ax] {
            return true;
        }
        pos[ax] = 0;
    }
    false
}

/// Enumerates the cube family used for characteristic sups: every placement
/// of every size in the exact regime, dyadic tilings with 3^d shifts beyond.
fn for_each_cube<F: FnMut(&[usize], usize)>(n: usize, d: usize, mut visit: F) {
    if n <= EXACT_LIMIT {
        for s in 1..=n {
            let m = n - s + 1;
            let limits = vec![m; d];
            let mut pos = vec![0usize; d];
            loop {
                visit(&pos, s);
                if !odometer_next(&mut pos, &limits) {
                    break;
                }
            }
        }
        return;
    }
    let mut lo = vec![0usize; d];
    let mut k = 0usize;
    while (1usize << k) <= n {
        let s = 1usize << k;
        let mut shifts: Vec<usize> = vec![0, s / 3, 2 * s / 3];
        shifts.dedup();
        for combo in 0..shifts.len().pow(d as u32) {
            let mut rem = combo;
            let tau: Vec<usize> = (0..d)
                .map(|_| {
                    let t = shifts[rem % shifts.len()];
                    rem /= shifts.len();
                    t
                })
                .collect();
            // tiles of this shifted lattice that fit inside the box
            let starts: Vec<Vec<usize>> = (0..d)
                .map(|ax| {
                    let mut v = Vec::new();
                    let mut start = tau[ax] as i64 - s as i64;
                    while start < n as i64 {
                        if start >= 0 && start + s as i64 <= n as i64 {
                            v.push(start as usize);
                        }
                        start += s as i64;
                    }
                    v
                })
                .collect();
            if starts.iter().any(|v| v.is_empty()) {
                continue;
            }
            let limits: Vec<usize> = starts.iter().map(|v| v.len()).collect();
            let mut pos = vec![0usize; d];
            loop {
                for ax in 0..d {
                    lo[ax] = starts[ax][pos[ax]];
                }
                visit(&lo, s);
                if !odometer_next(&mut pos, &limits) {
                    break;
                }
            }
        }
        k += 1;
    }
}

/// [w]_{A₁} = sup over cubes of (avg w)/(min w).
pub fn a1_characteristic(weight: &WeightGrid) -> f64 {
    let n = weight.w.n();
    let d = weight.w.dim();
    let vals = weight.vals();
    let prefix = prefix_sums(&vals, n, d);
    let mut best = 1.0f64;
    if n <= EXACT_LIMIT {
        // per size: separable sliding-min over placements plus the summed
        // averages; both are O(n^d)
        let mut hi = vec![0usize; d];
        let mut lo = vec![0usize; d];
        for s in 1..=n {
            let m = n - s + 1;
            let mins = crate::maximal::min_filter_contract(&vals, d, n, s);
            let cells = (s as f64).powi(d as i32);
            let limits = vec![m; d];
            let mut pos = vec![0usize; d];
            loop {
                let mut slot = 0usize;
                for ax in 0..d {
                    lo[ax] = pos[ax];
                    hi[ax] = pos[ax] + s;
                    slot = slot * m + pos[ax];
                }
                let avg = box_sum(&prefix, n, d, &lo, &hi) / cells;
                best = best.max(avg / mins[slot]);
                if !odometer_next(&mut pos, &limits) {
                    break;
                }
            }
        }
        return best;
    }
    let mut hi = vec![0usize; d];
    let mut mi = vec![0usize; d];
    for_each_cube(n, d, |lo, s| {
        for ax in 0..d {
            hi[ax] = lo[ax] + s;
        }
        let avg = box_sum(&prefix, n, d, lo, &hi) / (s as f64).powi(d as i32);
        // the dyadic tile family is disjoint per scale, so a direct min
        // scan stays O(n^d) per scale
        let mut min = f64::INFINITY;
        mi.copy_from_slice(lo);
        loop {
            let mut idx = 0;
            for &c in mi.iter() {
                idx = idx * n + c;
            }
            min = min.min(vals[idx]);
            let mut advanced = false;
            for ax in (0..d).rev() {
                mi[ax] += 1;
                if mi[ax] < lo[ax] + s {
                    advanced = true;
                    break;
                }
                mi[ax] = lo[ax];
            }
            if !advanced {
                break;
            }
        }
        best = best.max(avg / min);
    });
    best
}

/// [w]_{RH_σ} = sup over cubes of (avg w^σ)^{1/σ} / (avg w).
pub fn rh_characteristic(weight: &WeightGrid, sigma: f64) -> Result<f64, WeightError> {
    if sigma <= 1.0 {
        return Err(WeightError::BadSigma(sigma));
    }
    let n = weight.w.n();
    let d = weight.w.dim();
    let vals = weight.vals();
    let powered: Vec<f64> = vals.iter().map(|v| v.powf(sigma)).collect();
    let prefix = prefix_sums(&vals, n, d);
    let prefix_pow = prefix_sums(&powered, n, d);
    let mut best = 1.0f64;
    let mut hi = vec![0usize; d];
    for_each_cube(n, d, |lo, s| {
        for ax in 0..d {
            hi[ax] = lo[ax] + s;
        }
        let cells = (s as f64).powi(d as i32);
        let avg = box_sum(&prefix, n, d, lo, &hi) / cells;
        let avg_pow = box_sum(&prefix_pow, n, d, lo, &hi) / cells;
        best = best.max(avg_pow.powf(1.0 / sigma) / avg);
    });
    Ok(best)
}

/// Wilson's constant [v]_{A_∞} = sup_B v(B)^{-1} ∫_B M[v·1_B], with the
/// maximal function restricted to each cube.
pub fn wilson_ainfty(weight: &WeightGrid) -> f64 {
    let n = weight.w.n();
    let d = weight.w.dim();
    let vals = weight.vals();
    let mut best = 0.0f64;
    let mut eval_cube = |lo: &[usize], s: usize| {
        // subgrid of the cube; the maximal there is exact for s ≤ 256
        let mut sub = GridFunction::zeros(d, s, s as f64 / 2.0).unwrap();
        let mut mi = vec![0usize; d];
        for sub_idx in 0..sub.len() {
            let mut rem = sub_idx;
            for ax in (0..d).rev() {
                mi[ax] = rem % s;
                rem /= s;
            }
            let mut idx = 0;
            for ax in 0..d {
                idx = idx * n + lo[ax] + mi[ax];
            }
            sub.values[sub_idx] = Complex64::new(vals[idx], 0.0);
        }
        let m = hl_maximal(&sub);
        let mass: f64 = sub.values.iter().map(|v| v.re).sum();
        let m_mass: f64 = m.values.iter().map(|v| v.re).sum();
        best = best.max(m_mass / mass.max(1e-300));
    };
    if n <= WILSON_EXACT_LIMIT {
        // all placements of power-of-two sizes (the restricted maximal
        // needs power-of-two subgrids)
        for s in (0..).map(|k| 1usize << k).take_while(|s| *s <= n) {
            let m = n - s + 1;
            let limits = vec![m; d];
            let mut pos = vec![0usize; d];
            loop {
                eval_cube(&pos.clone(), s);
                if !odometer_next(&mut pos, &limits) {
                    break;
                }
            }
        }
    } else {
        // dyadic tiles only
        for s in (0..).map(|k| 1usize << k).take_while(|s| *s <= n) {
            let tiles = n / s;
            let limits = vec![tiles; d];
            let mut pos = vec![0usize; d];
            loop {
                let lo: Vec<usize> = pos.iter().map(|p| p * s).collect();
                eval_cube(&lo, s);
                if !odometer_next(&mut pos, &limits) {
                    break;
                }
            }
        }
    }
    best
}

/// Weak L^{p,∞}(w) quasinorm: max over the distinct values v of |g| of
/// v · w({|g| ≥ v})^{1/p}, exact at grid resolution.
pub fn weak_quasinorm(g: &GridFunction, weight: &WeightGrid, p: f64) -> f64 {
    assert!(p >= 1.0);
    let hd = g.h().powi(g.dim() as i32);
    let mut pairs: Vec<(f64, f64)> = g
        .values
        .iter()
        .zip(&weight.w.values)
        .map(|(gv, wv)| (gv.norm(), wv.re * hd))
        .filter(|(gv, _)| *gv > 0.0)
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    let mut cum = 0.0f64;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == v {
            cum += pairs[j].1;
            j += 1;
        }
        best = best.max(v * cum.powf(1.0 / p));
        i = j;
    }
    best
}

/// ‖g‖_{L^p(w)}.
pub fn weighted_lp_norm(g: &GridFunction, weight: &WeightGrid, p: f64) -> f64 {
    let hd = g.h().powi(g.dim() as i32);
    (g.values
        .iter()
        .zip(&weight.w.values)
        .map(|(gv, wv)| gv.norm().powf(p) * wv.re)
        .sum::<f64>()
        * hd)
        .powf(1.0 / p)
}

/// The weighted weak-type factor: with σ = (q'/p)',
/// sp_norm · [w^σ]_{A_∞}^{1+1/p} · [w]_{A₁}^{1/p} · [w]_{RH_σ}^{1/p}.
pub fn weighted_bound_factor(
    sp_norm: f64,
    weight: &WeightGrid,
    p: f64,
    q: f64,
) -> Result<f64, WeightError> {
    let sigma = sigma_of_pair(p, q)?;
    let mut powered = weight.w.clone();
    for v in powered.values.iter_mut() {
        *v = Complex64::new(v.re.powf(sigma), 0.0);
    }
    let w_sigma = WeightGrid::new(powered)?;
    let a_inf = wilson_ainfty(&w_sigma);
    let a1 = a1_characteristic(weight);
    let rh = rh_characteristic(weight, sigma)?;
    Ok(sp_norm * a_inf.powf(1.0 + 1.0 / p) * a1.powf(1.0 / p) * rh.powf(1.0 / p))
}

/// σ = (q'/p)' = q/(q+p−pq); defined exactly when q < p'. The guard uses
/// a relative epsilon so that q = p' is rejected despite rounding.
pub fn sigma_of_pair(p: f64, q: f64) -> Result<f64, WeightError> {
    let den = q + p - p * q;
    if den <= 1e-12 * q.abs().max(1.0) {
        return Err(WeightError::BadPair { p, q });
    }
    let sigma = q / den;
    if sigma <= 1.0 {
        return Err(WeightError::BadPair { p, q });
    }
    Ok(sigma)
}

/// Scans RH over a σ grid and assembles the report.
pub fn weight_report(weight: &WeightGrid, sigma_scan: &[f64]) -> Result<WeightReport, WeightError> {
    let a1 = a1_characteristic(weight);
    let mut rh = Vec::new();
    let mut sigma_of_w = None;
    for &s in sigma_scan {
        let v = rh_characteristic(weight, s)?;
        if v.is_finite() {
            sigma_of_w = Some(s);
        }
        rh.push((s, v));
    }
    Ok(WeightReport {
        a1,
        rh,
        a_infty: wilson_ainfty(weight),
        sigma_of_w,
        exact_regime: weight.is_exact_regime(),
    })
}

#[derive(Debug, Clone)]
pub struct WeakTypeRow {
    pub trial: usize,
    pub t: f64,
    pub quasinorm: f64,
    pub input_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct WeakTypeReport {
    pub rows: Vec<WeakTypeRow>,
    pub max_over_min: f64,
    pub pass: bool,
}

/// Weighted weak-type experiment: seeded random smooth inputs, means at
/// dilations t, ratios weak_quasinorm(R^λ_{a,t} f)/‖f‖_{L^p(w)}; passes
/// when the ratios stay within a factor of 10.
pub fn weighted_weaktype_experiment(
    weight: &WeightGrid,
    gauge: &MinkowskiGauge,
    lambda: f64,
    a: f64,
    p: f64,
    ts: &[f64],
    trials: usize,
    seed: u64,
) -> WeakTypeReport {
    let n = weight.w.n();
    let box_half = weight.w.box_half();
    let d = weight.w.dim();
    let mut rng = Rng::seeded(seed);
    let mut rows = Vec::new();
    for trial in 0..trials {
        let field = SmoothField::random(
            &mut rng,
            d,
            &vec![-box_half * 0.4; d],
            &vec![box_half * 0.4; d],
            box_half / 16.0,
            box_half / 4.0,
            6,
        );
        let mut f = GridFunction::zeros(d, n, box_half).unwrap();
        let mut x = vec![0.0; d];
        for idx in 0..f.len() {
            f.coords_of(idx, &mut x);
            f.values[idx] = Complex64::new(field.eval(&x), 0.0);
        }
        let input_norm = weighted_lp_norm(&f, weight, p);
        if input_norm <= 0.0 {
            continue;
        }
        for &t in ts {
            let sym = RieszSymbol::new(a, lambda, t);
            let out = riesz_apply(&f, gauge, &sym);
            let quasinorm = weak_quasinorm(&out, weight, p);
            rows.push(WeakTypeRow {
                trial,
                t,
                quasinorm,
                input_norm,
                ratio: quasinorm / input_norm,
            });
        }
    }
    let max = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_over_min = max / min.max(1e-300);
    WeakTypeReport {
        rows,
        max_over_min,
        pass: max_over_min < 10.0,
    }
}
