//! Whitney decomposition of grid-resolution open sets and the
//! Calderón–Zygmund decomposition at height ⟨f⟩_{S,p}.
//!
//! Distances are ℓ∞ in cell units: a cube of side m cells has diam m, and
//! dist(Q, Ω∁) is the least ℓ∞ cell distance from Q to a complement cell
//! within the box. Accepted cubes are the maximal dyadic blocks in the
//! root's tree with diam(Q) ≤ dist(Q, Ω∁); maximality forces
//! dist(Q, Ω∁) ≤ 4·diam(Q), so the two-sided Whitney property is exact.

use crate::dyadic::{DyadicCube, DyadicGeometry};
use crate::grid::GridFunction;
use crate::mask::GridMask;
use crate::maximal::hl_maximal;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CzError {
    #[error("mask covers the whole box; no complement to measure distance to")]
    NoComplement,
    #[error("root cube does not lie on the grid")]
    RootOutsideGrid,
    #[error("degenerate decomposition: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Dyadic(#[from] crate::dyadic::DyadicError),
}

/// ℓ∞ distance transform to the complement of `mask`, in cell units.
/// D = 0 on complement cells; cells outside the box are not counted.
pub fn linf_distance_to_complement(mask: &GridMask) -> Result<Vec<u32>, CzError> {
    let n = mask.n();
    let d = mask.dim();
    let total = mask.len();
    let complement: Vec<f64> = (0..total)
        .map(|i| if mask.get(i) { 0.0 } else { 1.0 })
        .collect();
    if complement.iter().all(|v| *v == 0.0) {
        return Err(CzError::NoComplement);
    }
    // summed-area table of the complement indicator
    let mut prefix = complement;
    for ax in 0..d {
        let stride = n.pow((d - 1 - ax) as u32);
        for idx in 0..total {
            let coord = (idx / stride) % n;
            if coord > 0 {
                prefix[idx] += prefix[idx - stride];
            }
        }
    }
    let count_box = |lo: &[usize], hi: &[usize]| -> f64 {
        let mut totalv = 0.0;
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
                totalv += sign * prefix[idx];
            }
        }
        totalv
    };
    let mut dist = vec![0u32; total];
    let mut mi = vec![0usize; d];
    let mut lo = vec![0usize; d];
    let mut hi = vec![0usize; d];
    for idx in 0..total {
        if !mask.get(idx) {
            continue;
        }
        let mut rem = idx;
        for ax in (0..d).rev() {
            mi[ax] = rem % n;
            rem /= n;
        }
        // binary search the smallest k with a complement cell in the
        // (2k+1)-box around the cell
        let mut lo_k = 1u32;
        let mut hi_k = n as u32;
        let mut has_complement = |k: u32| -> bool {
            for ax in 0..d {
                lo[ax] = mi[ax].saturating_sub(k as usize);
                hi[ax] = (mi[ax] + k as usize + 1).min(n);
            }
            count_box(&lo, &hi) > 0.5
        };
        while lo_k < hi_k {
            let mid = (lo_k + hi_k) / 2;
            if has_complement(mid) {
                hi_k = mid;
            } else {
                lo_k = mid + 1;
            }
        }
        dist[idx] = lo_k;
    }
    Ok(dist)
}

/// Per-block pyramid over the root's dyadic tree carrying the minimum
/// distance and whether the block sits inside the mask.
struct BlockInfo {
    min_dist: u32,
    all_inside: bool,
}

/// Whitney decomposition of `mask ∩ root`: disjoint dyadic subcubes of
/// `root` covering every masked cell, each with
/// diam(Q) ≤ dist(Q, Ω∁) ≤ 4·diam(Q) in the ℓ∞ cell metric.
pub fn whitney(
    mask: &GridMask,
    geom: &DyadicGeometry,
    root: &DyadicCube,
) -> Result<Vec<DyadicCube>, CzError> {
    let dist = linf_distance_to_complement(mask)?;
    whitney_with_distance(mask, geom, root, &dist)
}

fn whitney_with_distance(
    mask: &GridMask,
    geom: &DyadicGeometry,
    root: &DyadicCube,
    dist: &[u32],
) -> Result<Vec<DyadicCube>, CzError> {
    geom.cell_range(root).ok_or(CzError::RootOutsideGrid)?;
    let n = geom.n;
    let d = geom.dim;
    let info = |cell_lo: &[usize], side: usize| -> BlockInfo {
        let mut min_dist = u32::MAX;
        let mut all_inside = true;
        // iterate the block
        let mut mi = cell_lo.to_vec();
        'outer: loop {
            let mut idx = 0;
            for &c in &mi {
                idx = idx * n + c;
            }
            if !mask.get(idx) {
                all_inside = false;
                min_dist = 0;
                break;
            }
            min_dist = min_dist.min(dist[idx]);
            for ax in (0..d).rev() {
                mi[ax] += 1;
                if mi[ax] < cell_lo[ax] + side {
                    continue 'outer;
                }
                mi[ax] = cell_lo[ax];
                if ax == 0 {
                    break 'outer;
                }
            }
        }
        BlockInfo {
            min_dist,
            all_inside,
        }
    };

    let mut out = Vec::new();
    // recursive descent on (cube, cell ranges)
    fn descend(
        geom: &DyadicGeometry,
        info: &dyn Fn(&[usize], usize) -> BlockInfo,
        q: DyadicCube,
        out: &mut Vec<DyadicCube>,
    ) {
        let ranges = geom.cell_range(&q).expect("descent stays on grid");
        let side = ranges[0].1 - ranges[0].0;
        let lo: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        let bi = info(&lo, side);
        if bi.all_inside && bi.min_dist >= side as u32 {
            out.push(q);
            return;
        }
        if side == 1 {
            if bi.all_inside {
                out.push(q);
            }
            return;
        }
        for child in q.children() {
            descend(geom, info, child, out);
        }
    }
    descend(geom, &info, root.clone(), &mut out);
    Ok(out)
}

/// Checks the two-sided Whitney inequality for a cube against a mask.
pub fn whitney_property(
    mask: &GridMask,
    geom: &DyadicGeometry,
    q: &DyadicCube,
) -> Result<(u32, usize, bool), CzError> {
    let dist = linf_distance_to_complement(mask)?;
    let ranges = geom.cell_range(q).ok_or(CzError::RootOutsideGrid)?;
    let side = ranges[0].1 - ranges[0].0;
    let mut min_dist = u32::MAX;
    for idx in geom.iter_ranges(&ranges) {
        if !mask.get(idx) {
            min_dist = 0;
            break;
        }
        min_dist = min_dist.min(dist[idx]);
    }
    let ok = min_dist as usize >= side && min_dist as usize <= 4 * side;
    Ok((min_dist, side, ok))
}

/// The decomposition of f1 on S at height α = ⟨f1⟩_{S,p}.
#[derive(Debug, Clone)]
pub struct CzDecomposition {
    pub root: DyadicCube,
    pub p: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Level set {M(|f1|^p) ≥ 100d/(1−γ)·α^p} as a grid mask.
    pub omega: GridMask,
    /// Whitney cubes of Ω that lie inside S.
    pub whitney: Vec<DyadicCube>,
    /// The function being decomposed (restricted to S by the caller).
    pub f1: GridFunction,
}

#[derive(Debug, Clone)]
pub struct CzDiagnostics {
    /// ‖g‖_∞ / α against the guaranteed (100d/(1−γ))^{1/p}.
    pub good_constant: f64,
    pub good_constant_bound: f64,
    /// max_Q ∫|b_Q|^p / (α^p |Q|) against the guaranteed 100d/(1−γ)·5^d.
    pub bad_constant: f64,
    pub bad_constant_bound: f64,
    /// |∪𝔚| ≤ (1−γ)|S| check.
    pub union_fraction: f64,
    pub measure_ok: bool,
    pub whitney_ok: bool,
}

/// Calderón–Zygmund decomposition: thresholds M(|f1|^p) at
/// 100d/(1−γ)·α^p, takes Whitney cubes of the level set, and splits
/// f1 = g + Σ_Q b_Q with g = f1 off Ω and b_Q = f1·1_Q.
pub fn cz_decompose(
    f1: &GridFunction,
    geom: &DyadicGeometry,
    root: &DyadicCube,
    p: f64,
    gamma: f64,
) -> Result<CzDecomposition, CzError> {
    assert!((0.0..1.0).contains(&gamma) && gamma > 0.0);
    let alpha = crate::dyadic::average(f1, geom, root, p)?;
    if alpha <= 0.0 {
        return Err(CzError::Degenerate(
            "f1 vanishes on S; the threshold level set is everything".into(),
        ));
    }
    let d = geom.dim;
    let threshold = 100.0 * d as f64 / (1.0 - gamma) * alpha.powf(p);
    let mut p_power = f1.clone();
    for v in p_power.values.iter_mut() {
        *v = Complex64::new(v.norm().powf(p), 0.0);
    }
    let maximal = hl_maximal(&p_power);
    let omega = GridMask::from_predicate(d, geom.n, |idx| maximal.values[idx].re >= threshold);
    if omega.complement().is_empty() {
        return Err(CzError::Degenerate("level set covers the box".into()));
    }
    let whitney_cubes = if omega.is_empty() {
        Vec::new()
    } else {
        // Whitney cubes of Ω in the box tree, restricted to subcubes of S
        let all = whitney_in_box(&omega, geom)?;
        all.into_iter().filter(|q| root.contains(q)).collect()
    };
    Ok(CzDecomposition {
        root: root.clone(),
        p,
        gamma,
        alpha,
        omega,
        whitney: whitney_cubes,
        f1: f1.clone(),
    })
}

/// Whitney decomposition of a mask over the whole box: descends from the
/// 2^d top-level quadrant cubes of the box (one distance transform shared).
pub fn whitney_in_box(mask: &GridMask, geom: &DyadicGeometry) -> Result<Vec<DyadicCube>, CzError> {
    let dist = linf_distance_to_complement(mask)?;
    let top_level = geom.h_log2 + (geom.n.trailing_zeros() as i32) - 1;
    let mut out = Vec::new();
    let mut corner = vec![0i64; geom.dim];
    for bits in 0..(1u32 << geom.dim) {
        for (ax, c) in corner.iter_mut().enumerate() {
            *c = if (bits >> ax) & 1 == 1 { 0 } else { -1 };
        }
        let quadrant = DyadicCube::new(top_level, corner.clone());
        out.append(&mut whitney_with_distance(mask, geom, &quadrant, &dist)?);
    }
    Ok(out)
}

impl CzDecomposition {
    /// g = f1·1_{Ω∁}.
    pub fn good_part(&self) -> GridFunction {
        let mut g = self.f1.clone();
        for idx in 0..g.values.len() {
            if self.omega.get(idx) {
                g.values[idx] = Complex64::new(0.0, 0.0);
            }
        }
        g
    }

    /// b_Q = f1·1_Q for a Whitney cube.
    pub fn bad_part(&self, geom: &DyadicGeometry, q: &DyadicCube) -> GridFunction {
        let mut b = GridFunction::zeros(geom.dim, geom.n, geom.box_half).unwrap();
        if let Some(ranges) = geom.cell_range(q) {
            for idx in geom.iter_ranges(&ranges) {
                b.values[idx] = self.f1.values[idx];
            }
        }
        b
    }

    /// B_j = Σ_{Q ∈ 𝔚_j} b_Q for j > 0; B_0 collects 𝔚_{≤0}.
    pub fn level_sum(&self, geom: &DyadicGeometry, j: i32) -> GridFunction {
        let mut b = GridFunction::zeros(geom.dim, geom.n, geom.box_half).unwrap();
        for q in &self.whitney {
            let matches = if j == 0 { q.level <= 0 } else { q.level == j };
            if !matches {
                continue;
            }
            if let Some(ranges) = geom.cell_range(q) {
                for idx in geom.iter_ranges(&ranges) {
                    b.values[idx] = self.f1.values[idx];
                }
            }
        }
        b
    }

    pub fn diagnostics(&self, geom: &DyadicGeometry) -> Result<CzDiagnostics, CzError> {
        let d = geom.dim;
        let k_g_bound = (100.0 * d as f64 / (1.0 - self.gamma)).powf(1.0 / self.p);
        let k_b_bound = 100.0 * d as f64 / (1.0 - self.gamma) * (5.0f64).powi(d as i32);
        let g = self.good_part();
        let good_constant = g.sup_norm() / self.alpha;
        let mut bad_constant = 0.0f64;
        for q in &self.whitney {
            let avg_p = crate::dyadic::average(&self.f1, geom, q, self.p)?;
            bad_constant = bad_constant.max((avg_p / self.alpha).powf(self.p));
        }
        // measure of ∪𝔚 against (1−γ)|S|
        let union_cells: usize = self
            .whitney
            .iter()
            .filter_map(|q| geom.cells_per_side(q.level).map(|c| c.pow(d as u32)))
            .sum();
        let root_cells = geom
            .cells_per_side(self.root.level)
            .map(|c| c.pow(d as u32))
            .unwrap_or(0);
        let union_fraction = union_cells as f64 / root_cells.max(1) as f64;
        let measure_ok = union_fraction <= 1.0 - self.gamma + 1e-12;
        let mut whitney_ok = true;
        if !self.whitney.is_empty() {
            let dist = linf_distance_to_complement(&self.omega)?;
            for q in &self.whitney {
                let ranges = geom.cell_range(q).ok_or(CzError::RootOutsideGrid)?;
                let side = ranges[0].1 - ranges[0].0;
                let mut min_dist = u32::MAX;
                for idx in geom.iter_ranges(&ranges) {
                    min_dist = min_dist.min(dist[idx]);
                }
                if (min_dist as usize) < side || min_dist as usize > 4 * side {
                    whitney_ok = false;
                }
            }
        }
        Ok(CzDiagnostics {
            good_constant,
            good_constant_bound: k_g_bound,
            bad_constant,
            bad_constant_bound: k_b_bound,
            union_fraction,
            measure_ok,
            whitney_ok,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Rng, SmoothField};

    fn unit_geom(n: usize) -> (GridFunction, DyadicGeometry) {
        let f = GridFunction::zeros(2, n, n as f64 / 2.0).unwrap();
        let geom = DyadicGeometry::from_grid(&f).unwrap();
        (f, geom)
    }

    #[test]
    fn distance_transform_simple() {
        let (_, geom) = unit_geom(8);
        // mask = single 4×4 block at cells [2..6)²
        let mut mask = GridMask::new(2, 8);
        for y in 2..6 {
            for x in 2..6 {
                mask.set(y * 8 + x, true);
            }
        }
        let dist = linf_distance_to_complement(&mask).unwrap();
        assert_eq!(dist[3 * 8 + 3], 2); // center cells are 2 from outside
        assert_eq!(dist[2 * 8 + 2], 1); // corner cell of the block
        assert_eq!(dist[0], 0); // complement
        let _ = geom;
    }

    #[test]
    fn whole_box_mask_rejected() {
        let mask = GridMask::from_predicate(2, 8, |_| true);
        assert_eq!(
            linf_distance_to_complement(&mask),
            Err(CzError::NoComplement)
        );
    }

    #[test]
    fn whitney_of_empty_mask_is_empty() {
        let (_, geom) = unit_geom(16);
        let mask = GridMask::new(2, 16);
        let root = DyadicCube::new(2, vec![0, 0]);
        let cubes = whitney(&mask, &geom, &root).unwrap();
        assert!(cubes.is_empty());
    }

    #[test]
    fn whitney_tiles_a_dyadic_cube() {
        let (_, geom) = unit_geom(32);
        // Ω = the dyadic cube [0,8)² (level 3)
        let q0 = DyadicCube::new(3, vec![0, 0]);
        let mut mask = GridMask::new(2, 32);
        for idx in geom.iter_ranges(&geom.cell_range(&q0).unwrap()) {
            mask.set(idx, true);
        }
        let root = DyadicCube::new(4, vec![0, 0]);
        let cubes = whitney(&mask, &geom, &root).unwrap();
        assert!(!cubes.is_empty());
        // cover Ω∩root exactly, disjointly
        let mut covered = GridMask::new(2, 32);
        for q in &cubes {
            assert!(q.level <= 3);
            let m = geom.cube_mask(q).unwrap();
            assert!(!covered.intersects(&m), "overlap at {q:?}");
            covered.union_in_place(&m);
        }
        assert_eq!(covered, mask);
        // every cube satisfies the two-sided inequality exactly
        let dist = linf_distance_to_complement(&mask).unwrap();
        for q in &cubes {
            let ranges = geom.cell_range(q).unwrap();
            let side = ranges[0].1 - ranges[0].0;
            let mut min_dist = u32::MAX;
            for idx in geom.iter_ranges(&ranges) {
                min_dist = min_dist.min(dist[idx]);
            }
            assert!(
                min_dist as usize >= side && min_dist as usize <= 4 * side,
                "cube {q:?}: side {side}, dist {min_dist}"
            );
        }
    }

    #[test]
    fn cz_trivial_for_flat_indicator() {
        let n = 64;
        let (mut f, geom) = unit_geom(n);
        let root = DyadicCube::new(4, vec![0, 0]); // [0,16)²
        for idx in geom.iter_ranges(&geom.cell_range(&root).unwrap()) {
            f.values[idx] = Complex64::new(1.0, 0.0);
        }
        let cz = cz_decompose(&f, &geom, &root, 1.2, 0.5).unwrap();
        assert!(cz.omega.is_empty(), "M(1) stays below the threshold");
        assert!(cz.whitney.is_empty());
        let g = cz.good_part();
        for (a, b) in g.values.iter().zip(&f.values) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn cz_spike_produces_whitney_nest() {
        let n = 64;
        let (mut f, geom) = unit_geom(n);
        let root = DyadicCube::new(4, vec![0, 0]);
        for idx in geom.iter_ranges(&geom.cell_range(&root).unwrap()) {
            f.values[idx] = Complex64::new(0.01, 0.0);
        }
        // tall spike on one cell inside S
        let spike_idx = geom.flat_index(&[n / 2 + 3, n / 2 + 5]);
        f.values[spike_idx] = Complex64::new(500.0, 0.0);
        let cz = cz_decompose(&f, &geom, &root, 1.0, 0.5).unwrap();
        assert!(!cz.whitney.is_empty(), "spike must generate cubes");
        let diag = cz.diagnostics(&geom).unwrap();
        assert!(diag.whitney_ok);
        assert!(diag.measure_ok);
        assert!(diag.good_constant <= diag.good_constant_bound * (1.0 + 1e-9));
        assert!(diag.bad_constant <= diag.bad_constant_bound * (1.0 + 1e-9));
    }

    #[test]
    fn cz_reconstruction_and_random_bounds() {
        let n = 64;
        let (_, geom) = unit_geom(n);
        let root = DyadicCube::new(4, vec![0, 0]);
        let mut rng = Rng::seeded(2024);
        for trial in 0..10 {
            let field = SmoothField::random(
                &mut rng,
                2,
                &[0.5, 0.5],
                &[15.5, 15.5],
                0.2,
                3.0,
                12,
            );
            let mut f = GridFunction::zeros(2, n, n as f64 / 2.0).unwrap();
            let ranges = geom.cell_range(&root).unwrap();
            let mut x = vec![0.0; 2];
            for idx in geom.iter_ranges(&ranges) {
                f.coords_of(idx, &mut x);
                // spiky transform of the smooth field stresses the split
                let v = field.eval(&x);
                f.values[idx] = Complex64::new(v / (v.abs() + 0.05) * (1.0 + 10.0 * v * v), 0.0);
            }
            let cz = match cz_decompose(&f, &geom, &root, 1.2, 0.5) {
                Ok(cz) => cz,
                Err(CzError::Degenerate(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let diag = cz.diagnostics(&geom).unwrap();
            assert!(diag.measure_ok, "trial {trial}");
            assert!(diag.whitney_ok, "trial {trial}");
            assert!(diag.good_constant <= diag.good_constant_bound * (1.0 + 1e-9));
            assert!(diag.bad_constant <= diag.bad_constant_bound * (1.0 + 1e-9));
            // g + Σ b_Q = f1 exactly on S
            let mut sum = cz.good_part();
            for q in &cz.whitney {
                sum = sum.add(&cz.bad_part(&geom, q));
            }
            for idx in geom.iter_ranges(&ranges) {
                assert_eq!(sum.values[idx], f.values[idx], "trial {trial}");
            }
        }
    }
}
