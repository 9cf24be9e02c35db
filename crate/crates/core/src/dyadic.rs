//! Dyadic cubes aligned with the grid box, cube collections carrying the
//! atomic measure μ({Q}) = |Q|, p-averages, sparse families with witness
//! sets, sparse forms, and Lorentz sequence norms.

use crate::grid::GridFunction;
use crate::mask::GridMask;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DyadicError {
    #[error("grid is not dyadic-aligned: {0}")]
    MisalignedGrid(String),
    #[error("cube {0:?} does not lie on the grid")]
    CubeOutsideGrid(DyadicCube),
    #[error("exponent must satisfy p ≥ 1, got {0}")]
    BadExponent(f64),
}

/// A dyadic cube of sidelength 2^level with corner at lattice coordinates
/// `corner` (physical corner = corner·2^level). `shift` selects one of the
/// 3^d shifted lattices used by the maximal function; the base lattice is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    pub level: i32,
    pub corner: Vec<i64>,
    pub shift: u8,
}

impl DyadicCube {
    pub fn new(level: i32, corner: Vec<i64>) -> Self {
        Self {
            level,
            corner,
            shift: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    /// Physical sidelength 2^level.
    pub fn side(&self) -> f64 {
        (2.0f64).powi(self.level)
    }

    /// Physical volume |Q|.
    pub fn volume(&self) -> f64 {
        self.side().powi(self.dim() as i32)
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube {
            level: self.level + 1,
            corner: self.corner.iter().map(|c| c.div_euclid(2)).collect(),
            shift: self.shift,
        }
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.dim();
        let mut out = Vec::with_capacity(1 << d);
        for bits in 0..(1u32 << d) {
            let corner: Vec<i64> = (0..d)
                .map(|i| 2 * self.corner[i] + ((bits >> i) & 1) as i64)
                .collect();
            out.push(DyadicCube {
                level: self.level - 1,
                corner,
                shift: self.shift,
            });
        }
        out
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        if other.level > self.level {
            return false;
        }
        let scale = self.level - other.level;
        (0..self.dim()).all(|i| other.corner[i].div_euclid(1 << scale) == self.corner[i])
    }

    /// Physical bounds [lo, hi) per axis.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let s = self.side();
        self.corner
            .iter()
            .map(|c| (*c as f64 * s, (*c as f64 + 1.0) * s))
            .collect()
    }

    /// Physical bounds of the concentric triple 3Q.
    pub fn triple_bounds(&self) -> Vec<(f64, f64)> {
        let s = self.side();
        self.corner
            .iter()
            .map(|c| ((*c as f64 - 1.0) * s, (*c as f64 + 2.0) * s))
            .collect()
    }
}

/// Cell-index geometry of a dyadic-aligned grid: spacing and box half-width
/// are powers of two, so cubes of level ≥ log2(h) are exact cell blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicGeometry {
    pub dim: usize,
    pub n: usize,
    pub box_half: f64,
    pub h_log2: i32,
}

impl DyadicGeometry {
    pub fn from_grid(f: &GridFunction) -> Result<Self, DyadicError> {
        let h = f.h();
        let h_log2 = h.log2();
        if (h_log2 - h_log2.round()).abs() > 1e-12 {
            return Err(DyadicError::MisalignedGrid(format!(
                "spacing {h} is not a power of two"
            )));
        }
        let l_log2 = f.box_half().log2();
        if (l_log2 - l_log2.round()).abs() > 1e-12 {
            return Err(DyadicError::MisalignedGrid(format!(
                "box half-width {} is not a power of two",
                f.box_half()
            )));
        }
        Ok(Self {
            dim: f.dim(),
            n: f.n(),
            box_half: f.box_half(),
            h_log2: h_log2.round() as i32,
        })
    }

    pub fn h(&self) -> f64 {
        (2.0f64).powi(self.h_log2)
    }

    /// Cells per side of a cube at `level`.
    pub fn cells_per_side(&self, level: i32) -> Option<usize> {
        if level < self.h_log2 {
            return None;
        }
        let shift = (level - self.h_log2) as u32;
        if shift >= 63 {
            return None;
        }
        Some(1usize << shift)
    }

    /// Cell ranges [lo, hi) of a cube; None if outside the box or finer
    /// than a cell.
    pub fn cell_range(&self, q: &DyadicCube) -> Option<Vec<(usize, usize)>> {
        let per = self.cells_per_side(q.level)? as i64;
        let offset = (self.box_half / self.h()) as i64;
        let mut out = Vec::with_capacity(q.dim());
        for c in &q.corner {
            let lo = c * per + offset;
            let hi = lo + per;
            if lo < 0 || hi > self.n as i64 {
                return None;
            }
            out.push((lo as usize, hi as usize));
        }
        Some(out)
    }

    /// Cell ranges of 3Q clipped to the box; None only if the cube itself
    /// is finer than a cell.
    pub fn triple_range_clipped(&self, q: &DyadicCube) -> Option<Vec<(usize, usize)>> {
        let per = self.cells_per_side(q.level)? as i64;
        let offset = (self.box_half / self.h()) as i64;
        let mut out = Vec::with_capacity(q.dim());
        for c in &q.corner {
            let lo = ((c - 1) * per + offset).max(0);
            let hi = ((c + 2) * per + offset).min(self.n as i64);
            if lo >= hi {
                return None;
            }
            out.push((lo as usize, hi as usize));
        }
        Some(out)
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        let mut idx = 0;
        for &c in mi {
            idx = idx * self.n + c;
        }
        idx
    }

    /// Iterates flat cell indices of an axis-range product.
    pub fn iter_ranges(&self, ranges: &[(usize, usize)]) -> RangeIter {
        RangeIter::new(self, ranges)
    }

    /// Mask of the cells of a cube.
    pub fn cube_mask(&self, q: &DyadicCube) -> Option<GridMask> {
        let ranges = self.cell_range(q)?;
        let mut mask = GridMask::new(self.dim, self.n);
        for idx in self.iter_ranges(&ranges) {
            mask.set(idx, true);
        }
        Some(mask)
    }
}

/// Row-major iterator over a product of index ranges.
pub struct RangeIter {
    n: usize,
    ranges: Vec<(usize, usize)>,
    current: Vec<usize>,
    done: bool,
}

impl RangeIter {
    fn new(geom: &DyadicGeometry, ranges: &[(usize, usize)]) -> Self {
        let done = ranges.iter().any(|(lo, hi)| lo >= hi);
        Self {
            n: geom.n,
            ranges: ranges.to_vec(),
            current: ranges.iter().map(|(lo, _)| *lo).collect(),
            done,
        }
    }
}

impl Iterator for RangeIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let mut idx = 0;
        for &c in &self.current {
            idx = idx * self.n + c;
        }
        // advance odometer, last axis fastest
        for ax in (0..self.ranges.len()).rev() {
            self.current[ax] += 1;
            if self.current[ax] < self.ranges[ax].1 {
                return Some(idx);
            }
            self.current[ax] = self.ranges[ax].0;
            if ax == 0 {
                self.done = true;
            }
        }
        Some(idx)
    }
}

/// A set of dyadic cubes with O(1) membership and per-level buckets.
#[derive(Debug, Clone, Default)]
pub struct CubeCollection {
    cubes: Vec<DyadicCube>,
    index: HashMap<DyadicCube, usize>,
}

impl CubeCollection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cubes(cubes: Vec<DyadicCube>) -> Self {
        let mut c = Self::new();
        for q in cubes {
            c.insert(q);
        }
        c
    }

    pub fn insert(&mut self, q: DyadicCube) -> bool {
        if self.index.contains_key(&q) {
            return false;
        }
        self.index.insert(q.clone(), self.cubes.len());
        self.cubes.push(q);
        true
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.index.contains_key(q)
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DyadicCube> {
        self.cubes.iter()
    }

    /// Cubes of sidelength 2^level.
    pub fn at_level(&self, level: i32) -> impl Iterator<Item = &DyadicCube> {
        self.cubes.iter().filter(move |q| q.level == level)
    }

    /// Cubes of sidelength at least 2^level.
    pub fn at_level_or_above(&self, level: i32) -> impl Iterator<Item = &DyadicCube> {
        self.cubes.iter().filter(move |q| q.level >= level)
    }

    pub fn levels(&self) -> Vec<i32> {
        let mut ls: Vec<i32> = self.cubes.iter().map(|q| q.level).collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    }
}

/// μ of a collection: Σ_j 2^{jd} #(cubes at level j) = Σ |Q|.
pub fn mu<'a, I: IntoIterator<Item = &'a DyadicCube>>(cubes: I) -> f64 {
    cubes.into_iter().map(|q| q.volume()).sum()
}

/// ⟨f⟩_{Q,p} = (|Q|^{-1} ∫_Q |f|^p)^{1/p} as an exact grid Riemann sum.
pub fn average(
    f: &GridFunction,
    geom: &DyadicGeometry,
    q: &DyadicCube,
    p: f64,
) -> Result<f64, DyadicError> {
    if p < 1.0 {
        return Err(DyadicError::BadExponent(p));
    }
    let ranges = geom
        .cell_range(q)
        .ok_or_else(|| DyadicError::CubeOutsideGrid(q.clone()))?;
    Ok(average_over_ranges(f, geom, &ranges, p))
}

/// ⟨f⟩_{3Q,q} with 3Q clipped to the box, normalized by the clipped region.
pub fn average_triple(
    f: &GridFunction,
    geom: &DyadicGeometry,
    q: &DyadicCube,
    p: f64,
) -> Result<f64, DyadicError> {
    if p < 1.0 {
        return Err(DyadicError::BadExponent(p));
    }
    let ranges = geom
        .triple_range_clipped(q)
        .ok_or_else(|| DyadicError::CubeOutsideGrid(q.clone()))?;
    Ok(average_over_ranges(f, geom, &ranges, p))
}

pub fn average_over_ranges(
    f: &GridFunction,
    geom: &DyadicGeometry,
    ranges: &[(usize, usize)],
    p: f64,
) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for idx in geom.iter_ranges(ranges) {
        sum += f.values[idx].norm().powf(p);
        count += 1;
    }
    if count == 0 {
        return 0.0;
    }
    (sum / count as f64).powf(1.0 / p)
}

/// A γ-sparse family: each cube carries a witness cell mask E_Q.
#[derive(Debug, Clone)]
pub struct SparseFamily {
    pub gamma: f64,
    pub entries: Vec<(DyadicCube, GridMask)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseDiagnostics {
    pub disjoint: bool,
    pub min_fraction: f64,
    pub offending_pair: Option<(usize, usize)>,
    pub undersized: Vec<usize>,
}

impl SparseFamily {
    pub fn new(gamma: f64) -> Self {
        assert!(gamma > 0.0 && gamma < 1.0);
        Self {
            gamma,
            entries: Vec::new(),
        }
    }

    pub fn cubes(&self) -> impl Iterator<Item = &DyadicCube> {
        self.entries.iter().map(|(q, _)| q)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Exact verification at grid-cell resolution: witnesses pairwise disjoint
/// and |E_Q| ≥ γ|Q|.
pub fn verify_sparse(family: &SparseFamily, geom: &DyadicGeometry) -> (bool, SparseDiagnostics) {
    let mut disjoint = true;
    let mut offending = None;
    'outer: for i in 0..family.entries.len() {
        for j in i + 1..family.entries.len() {
            if family.entries[i].1.intersects(&family.entries[j].1) {
                disjoint = false;
                offending = Some((i, j));
                break 'outer;
            }
        }
    }
    let mut min_fraction = f64::INFINITY;
    let mut undersized = Vec::new();
    for (i, (q, mask)) in family.entries.iter().enumerate() {
        let cube_cells = geom
            .cells_per_side(q.level)
            .map(|c| c.pow(geom.dim as u32))
            .unwrap_or(0);
        if cube_cells == 0 {
            undersized.push(i);
            min_fraction = 0.0;
            continue;
        }
        let fraction = mask.count() as f64 / cube_cells as f64;
        min_fraction = min_fraction.min(fraction);
        if fraction < family.gamma {
            undersized.push(i);
        }
    }
    if family.entries.is_empty() {
        min_fraction = 1.0;
    }
    let ok = disjoint && undersized.is_empty();
    (
        ok,
        SparseDiagnostics {
            disjoint,
            min_fraction,
            offending_pair: offending,
            undersized,
        },
    )
}

/// Λ^𝔖_{p,q}(f1, f2) = Σ_Q |Q| ⟨f1⟩_{Q,p} ⟨f2⟩_{Q,q}; the tripled variant
/// averages f2 over 3Q (clipped to the box).
pub fn sparse_form<'a, I: IntoIterator<Item = &'a DyadicCube>>(
    cubes: I,
    f1: &GridFunction,
    f2: &GridFunction,
    geom: &DyadicGeometry,
    p: f64,
    q_exp: f64,
    tripled: bool,
) -> Result<f64, DyadicError> {
    let mut total = 0.0;
    for q in cubes {
        let a1 = average(f1, geom, q, p)?;
        let a2 = if tripled {
            average_triple(f2, geom, q, q_exp)?
        } else {
            average(f2, geom, q, q_exp)?
        };
        total += q.volume() * a1 * a2;
    }
    Ok(total)
}

/// Discrete Lorentz ℓ^{r,1}(μ) norm of β: with β* the nonincreasing
/// rearrangement and W_k the cumulative μ-mass,
/// ‖β‖ = Σ_k β*_k (W_k^{1/r} − W_{k−1}^{1/r}).
pub fn lorentz_r1_norm(beta: &[(DyadicCube, f64)], r: f64) -> f64 {
    assert!(r > 1.0, "Lorentz index must exceed 1");
    let mut items: Vec<(f64, f64)> = beta
        .iter()
        .map(|(q, v)| (v.abs(), q.volume()))
        .collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut w_prev = 0.0f64;
    let mut total = 0.0;
    for (value, weight) in items {
        let w_next = w_prev + weight;
        total += value * (w_next.powf(1.0 / r) - w_prev.powf(1.0 / r));
        w_prev = w_next;
    }
    total
}

/// Plain ℓ^r(μ) norm of β.
pub fn lorentz_r_norm(beta: &[(DyadicCube, f64)], r: f64) -> f64 {
    beta.iter()
        .map(|(q, v)| v.abs().powf(r) * q.volume())
        .sum::<f64>()
        .powf(1.0 / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn unit_grid(n: usize) -> GridFunction {
        // box [−n/2, n/2), spacing 1
        GridFunction::zeros(2, n, n as f64 / 2.0).unwrap()
    }

    fn geom_of(f: &GridFunction) -> DyadicGeometry {
        DyadicGeometry::from_grid(f).unwrap()
    }

    #[test]
    fn mu_examples() {
        let q = DyadicCube::new(3, vec![0, 0]);
        assert_eq!(mu([&q]), 64.0); // 2^{3·2}
        let qs = [
            DyadicCube::new(0, vec![0, 0]),
            DyadicCube::new(0, vec![1, 0]),
            DyadicCube::new(1, vec![1, 1]),
        ];
        // disjoint collection: μ = Lebesgue measure of the union
        assert_eq!(mu(qs.iter()), 1.0 + 1.0 + 4.0);
        assert_eq!(mu([]), 0.0);
    }

    #[test]
    fn average_constant_and_indicator() {
        let mut f = unit_grid(16);
        let geom = geom_of(&f);
        let q = DyadicCube::new(2, vec![0, 0]); // 4×4 cells at [0,4)²
        for v in f.values.iter_mut() {
            *v = Complex64::new(3.0, 0.0);
        }
        assert!((average(&f, &geom, &q, 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((average(&f, &geom, &q, 2.5).unwrap() - 3.0).abs() < 1e-14);

        // indicator of half the cube: ⟨f⟩_{Q,1} = 1/2, ⟨f⟩_{Q,2} = 2^{-1/2}
        let ranges = geom.cell_range(&q).unwrap();
        let mut g = unit_grid(16);
        for idx in geom.iter_ranges(&ranges) {
            g.values[idx] = Complex64::new(0.0, 0.0);
        }
        // set left half (first two columns of the cube)
        for idx in geom.iter_ranges(&[(ranges[0].0, ranges[0].0 + 2), ranges[1]]) {
            g.values[idx] = Complex64::new(1.0, 0.0);
        }
        assert!((average(&g, &geom, &q, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((average(&g, &geom, &q, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn average_monotone_in_p() {
        let mut f = unit_grid(16);
        let geom = geom_of(&f);
        let mut state = 0x9e3779b97f4a7c15u64;
        for v in f.values.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = Complex64::new((state >> 11) as f64 / (1u64 << 53) as f64, 0.0);
        }
        let q = DyadicCube::new(3, vec![0, -1]);
        let mut prev = 0.0;
        for p in [1.0, 1.5, 2.0, 3.0, 6.0] {
            let a = average(&f, &geom, &q, p).unwrap();
            assert!(a >= prev - 1e-12, "p={p}");
            prev = a;
        }
    }

    #[test]
    fn sparse_form_single_cube_identity() {
        let mut f = unit_grid(16);
        let geom = geom_of(&f);
        let q = DyadicCube::new(2, vec![0, 0]);
        let ranges = geom.cell_range(&q).unwrap();
        for idx in geom.iter_ranges(&ranges) {
            f.values[idx] = Complex64::new(1.0, 0.0);
        }
        // untripled with f1 = f2 = 1_Q: |Q|·1·1
        let v = sparse_form([&q], &f, &f, &geom, 1.3, 2.0, false).unwrap();
        assert!((v - q.volume()).abs() < 1e-12);
    }

    #[test]
    fn tripled_form_against_direct_summation() {
        let mut f1 = unit_grid(32);
        let mut f2 = unit_grid(32);
        let geom = geom_of(&f1);
        let q = DyadicCube::new(2, vec![1, -1]);
        let ranges = geom.cell_range(&q).unwrap();
        for idx in geom.iter_ranges(&ranges) {
            f1.values[idx] = Complex64::new(2.0, 0.0);
        }
        // f2 = 1 on 3Q \ Q
        let triple = geom.triple_range_clipped(&q).unwrap();
        let qmask = geom.cube_mask(&q).unwrap();
        for idx in geom.iter_ranges(&triple) {
            if !qmask.get(idx) {
                f2.values[idx] = Complex64::new(1.0, 0.0);
            }
        }
        let (p, qe) = (1.0, 2.0);
        let got = sparse_form([&q], &f1, &f2, &geom, p, qe, true).unwrap();
        // directly: |Q|·⟨f1⟩_{Q,1}·(fraction of 3Q carrying 1)^{1/2}
        let frac: f64 = 1.0 - 1.0 / 9.0;
        let expect = q.volume() * 2.0 * frac.sqrt();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn nested_two_cube_family_matches_direct_evaluation() {
        let mut f1 = unit_grid(32);
        let mut f2 = unit_grid(32);
        let geom = geom_of(&f1);
        let big = DyadicCube::new(3, vec![0, 0]);
        let small = DyadicCube::new(2, vec![0, 0]);
        let mut state = 1u64;
        for v in f1.values.iter_mut().chain(f2.values.iter_mut()) {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(7);
            *v = Complex64::new((state >> 11) as f64 / (1u64 << 53) as f64, 0.0);
        }
        let (p, qe) = (1.2, 2.1);
        let got = sparse_form([&big, &small], &f1, &f2, &geom, p, qe, false).unwrap();
        let direct = big.volume() * average(&f1, &geom, &big, p).unwrap()
            * average(&f2, &geom, &big, qe).unwrap()
            + small.volume() * average(&f1, &geom, &small, p).unwrap()
                * average(&f2, &geom, &small, qe).unwrap();
        assert!((got - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn verify_sparse_cases() {
        let f = unit_grid(16);
        let geom = geom_of(&f);
        // two disjoint cubes with full witnesses at γ = 1/2
        let q1 = DyadicCube::new(2, vec![0, 0]);
        let q2 = DyadicCube::new(2, vec![-1, -1]);
        let mut fam = SparseFamily::new(0.5);
        fam.entries
            .push((q1.clone(), geom.cube_mask(&q1).unwrap()));
        fam.entries
            .push((q2.clone(), geom.cube_mask(&q2).unwrap()));
        let (ok, diag) = verify_sparse(&fam, &geom);
        assert!(ok && diag.disjoint && diag.min_fraction == 1.0);

        // chain Q ⊃ Q' with E_Q = Q \ Q': fraction 1 − 2^{-d} ≥ 1/2
        let inner = DyadicCube::new(1, vec![0, 0]);
        let mut e_q = geom.cube_mask(&q1).unwrap();
        e_q.subtract_in_place(&geom.cube_mask(&inner).unwrap());
        let mut chain = SparseFamily::new(0.5);
        chain.entries.push((q1.clone(), e_q));
        chain
            .entries
            .push((inner.clone(), geom.cube_mask(&inner).unwrap()));
        let (ok, _) = verify_sparse(&chain, &geom);
        assert!(ok);

        // overlapping witnesses flagged with the offending pair
        let mut bad = SparseFamily::new(0.5);
        bad.entries.push((q1.clone(), geom.cube_mask(&q1).unwrap()));
        bad.entries.push((inner, geom.cube_mask(&q1).unwrap()));
        let (ok, diag) = verify_sparse(&bad, &geom);
        assert!(!ok && diag.offending_pair == Some((0, 1)));
    }

    #[test]
    fn lorentz_examples() {
        let q = DyadicCube::new(2, vec![0, 0]); // |Q| = 16
        let r = 2.0;
        let single = lorentz_r1_norm(&[(q.clone(), 3.0)], r);
        assert!((single - 3.0 * 16f64.sqrt()).abs() < 1e-12);

        let q2 = DyadicCube::new(2, vec![1, 0]);
        let two = lorentz_r1_norm(&[(q.clone(), 3.0), (q2.clone(), 3.0)], r);
        assert!((two - 3.0 * 32f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lorentz_interpolation_bound() {
        // ‖β‖_{r,1} ≤ r/(r−p) ‖β‖_∞^{1−p/r} ‖β‖_p^{p/r}
        let r = 2.0;
        let p = 1.2;
        let c = r / (r - p);
        let mut state = 99u64;
        for trial in 0..100 {
            let m = 1 + (trial % 7);
            let mut beta = Vec::new();
            for i in 0..m {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(11);
                let v = (state >> 11) as f64 / (1u64 << 53) as f64;
                beta.push((DyadicCube::new((i % 3) as i32, vec![i as i64, 0]), v));
            }
            let l_r1 = lorentz_r1_norm(&beta, r);
            let sup = beta.iter().map(|b| b.1.abs()).fold(0.0f64, f64::max);
            let l_p = beta
                .iter()
                .map(|b| b.1.abs().powf(p) * b.0.volume())
                .sum::<f64>()
                .powf(1.0 / p);
            assert!(
                l_r1 <= c * sup.powf(1.0 - p / r) * l_p.powf(p / r) * (1.0 + 1e-9),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn lorentz_triangle_inequality() {
        let r = 2.0;
        let mut state = 7u64;
        let cubes: Vec<DyadicCube> = (0..6)
            .map(|i| DyadicCube::new((i % 3) as i32, vec![i as i64, 1]))
            .collect();
        for _ in 0..50 {
            let mut a = Vec::new();
            let mut b = Vec::new();
            let mut sum = Vec::new();
            for q in &cubes {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(3);
                let va = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                state = state.wrapping_mul(6364136223846793005).wrapping_add(3);
                let vb = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                a.push((q.clone(), va));
                b.push((q.clone(), vb));
                sum.push((q.clone(), va + vb));
            }
            let na = lorentz_r1_norm(&a, r);
            let nb = lorentz_r1_norm(&b, r);
            let ns = lorentz_r1_norm(&sum, r);
            assert!(ns <= na + nb + 1e-10);
        }
    }

    #[test]
    fn cube_relations() {
        let q = DyadicCube::new(0, vec![5, -3]);
        let p = q.parent();
        assert_eq!(p.level, 1);
        assert_eq!(p.corner, vec![2, -2]);
        assert!(p.contains(&q));
        assert!(!q.contains(&p));
        let kids = p.children();
        assert_eq!(kids.len(), 4);
        assert!(kids.contains(&q));
        let t = q.triple_bounds();
        assert_eq!(t[0], (4.0, 7.0));
        assert_eq!(t[1], (-4.0, -1.0));
    }

    #[test]
    fn mu_additivity_over_disjoint_collections() {
        let a = [
            DyadicCube::new(1, vec![0, 0]),
            DyadicCube::new(0, vec![4, 4]),
        ];
        let b = [
            DyadicCube::new(2, vec![2, 2]),
            DyadicCube::new(0, vec![9, 9]),
        ];
        assert_eq!(mu(a.iter()) + mu(b.iter()), mu(a.iter().chain(b.iter())));
    }
}
