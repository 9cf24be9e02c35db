//! Hardy–Littlewood maximal function on grids.
//!
//! Small grids get the exact maximum of averages over every axis-parallel
//! grid-aligned cube containing each point (summed-area tables plus
//! sliding-window maxima per size). Larger grids use dyadic tilings over
//! the 3^d shifted lattices with zero extension, which lower-bounds the
//! exact maximal function and stays within a dimensional factor of it.

use crate::grid::GridFunction;
use num_complex::Complex64;

/// Largest per-axis size that still gets the exact O(n^{d+1}) treatment.
const EXACT_LIMIT: usize = 256;
/// Work cap: cells × sizes.
const EXACT_WORK_LIMIT: usize = 1 << 31;

/// M f at every cell (magnitudes of f are used). Output is a real grid.
pub fn hl_maximal(f: &GridFunction) -> GridFunction {
    let n = f.n();
    let _d = f.dim();
    let work = f.len().saturating_mul(n);
    if n <= EXACT_LIMIT && work <= EXACT_WORK_LIMIT {
        hl_maximal_exact(f)
    } else {
        hl_maximal_dyadic_shifted(f)
    }
}

/// True when the grid takes the exact path.
pub fn is_exact_regime(f: &GridFunction) -> bool {
    f.n() <= EXACT_LIMIT && f.len().saturating_mul(f.n()) <= EXACT_WORK_LIMIT
}

fn magnitudes(f: &GridFunction) -> Vec<f64> {
    f.values.iter().map(|v| v.norm()).collect()
}

/// d-dimensional summed-area table: out[i] = Σ_{j < i componentwise} v[j].
fn prefix_sums(vals: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut acc = vals.to_vec();
    let total = vals.len();
    for ax in 0..d {
        let stride = n.pow((d - 1 - ax) as u32);
        for idx in 0..total {
            let coord = (idx / stride) % n;
            if coord > 0 {
                acc[idx] = acc[idx] + acc[idx - stride];
            }
        }
    }
    acc
}

/// Sum of vals over the cell box [lo, hi) using an inclusion–exclusion on
/// the summed-area table.
fn box_sum(prefix: &[f64], n: usize, d: usize, lo: &[usize], hi: &[usize]) -> f64 {
    let mut total = 0.0;
    for corner in 0..(1u32 << d) {
        let mut idx = 0usize;
        let mut sign = 1.0;
        let mut skip = false;
        for ax in 0..d {
            let take_hi = (corner >> ax) & 1 == 1;
            let c = if take_hi {
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

/// Sliding max: out[x] = max over p ∈ [x−s+1, x] ∩ [0, m) of input[p],
/// where m = input.len(); output has length m + s − 1.
fn sliding_max(input: &[f64], s: usize, out: &mut Vec<f64>) {
    let m = input.len();
    let total = m + s - 1;
    out.clear();
    out.reserve(total);
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for x in 0..total {
        if x < m {
            while let Some(&b) = deque.back() {
                if input[b] <= input[x] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(x);
        }
        let min_p = x as i64 - s as i64 + 1;
        while let Some(&front) = deque.front() {
            if (front as i64) < min_p {
                deque.pop_front();
            } else {
                break;
            }
        }
        out.push(input[*deque.front().expect("window never empty")]);
    }
}

/// Contracting sliding min: out[p] = min over cells [p, p+s) of input,
/// output length m = input.len() − s + 1.
pub(crate) fn sliding_min_contract(input: &[f64], s: usize, out: &mut Vec<f64>) {
    let n = input.len();
    let m = n - s + 1;
    out.clear();
    out.reserve(m);
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for x in 0..n {
        while let Some(&b) = deque.back() {
            if input[b] >= input[x] {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(x);
        if x + 1 >= s {
            let min_keep = x + 1 - s;
            while let Some(&front) = deque.front() {
                if front < min_keep {
                    deque.pop_front();
                } else {
                    break;
                }
            }
            out.push(input[*deque.front().unwrap()]);
        }
    }
}

/// Separable min over every placement of an s-cube: input has n per axis,
/// output m = n − s + 1 per axis. Each pass contracts the (uncontracted)
/// last axis and rotates it to the front, so d passes restore axis order.
pub(crate) fn min_filter_contract(vals: &[f64], d: usize, n: usize, s: usize) -> Vec<f64> {
    let m = n - s + 1;
    let mut data = vals.to_vec();
    let mut scratch = Vec::new();
    for _ in 0..d {
        let rows = data.len() / n;
        let mut next = vec![0.0f64; rows * m];
        for row in 0..rows {
            sliding_min_contract(&data[row * n..(row + 1) * n], s, &mut scratch);
            next[row * m..(row + 1) * m].copy_from_slice(&scratch);
        }
        data = rotate_last_to_front(&next, m);
    }
    data
}

/// Moves the last axis of a row-major array to the front.
fn rotate_last_to_front(data: &[f64], last: usize) -> Vec<f64> {
    let rows = data.len() / last;
    let mut out = vec![0.0f64; data.len()];
    for r in 0..rows {
        for c in 0..last {
            out[c * rows + r] = data[r * last + c];
        }
    }
    out
}

/// Expands placement values (m per axis) to per-cell maxima over covering
/// placements (n per axis) with d separable sliding-max passes; like the
/// contraction above, each pass handles the last axis and rotates it front.
fn max_filter_expand(avg: Vec<f64>, d: usize, m: usize, s: usize, n: usize) -> Vec<f64> {
    let mut data = avg;
    let mut scratch = Vec::new();
    for _ in 0..d {
        let rows = data.len() / m;
        let mut next = vec![0.0f64; rows * n];
        for row in 0..rows {
            sliding_max(&data[row * m..(row + 1) * m], s, &mut scratch);
            next[row * n..(row + 1) * n].copy_from_slice(&scratch);
        }
        data = rotate_last_to_front(&next, n);
    }
    data
}

fn hl_maximal_exact(f: &GridFunction) -> GridFunction {
    let n = f.n();
    let d = f.dim();
    let vals = magnitudes(f);
    let prefix = prefix_sums(&vals, n, d);
    let mut best = vec![0.0f64; vals.len()];

    let mut lo = vec![0usize; d];
    let mut hi = vec![0usize; d];
    let mut pos = vec![0usize; d];
    for s in 1..=n {
        let m = n - s + 1;
        let mut avg = vec![0.0f64; m.pow(d as u32)];
        let cells = (s as f64).powi(d as i32);
        for (slot, a) in avg.iter_mut().enumerate() {
            let mut rem = slot;
            for ax in (0..d).rev() {
                pos[ax] = rem % m;
                rem /= m;
            }
            for ax in 0..d {
                lo[ax] = pos[ax];
                hi[ax] = pos[ax] + s;
            }
            *a = box_sum(&prefix, n, d, &lo, &hi) / cells;
        }
        let expanded = max_filter_expand(avg, d, m, s, n);
        for (b, v) in best.iter_mut().zip(&expanded) {
            if *v > *b {
                *b = *v;
            }
        }
    }

    let mut out = f.clone();
    for (slot, v) in out.values.iter_mut().zip(&best) {
        *slot = Complex64::new(*v, 0.0);
    }
    out
}

fn hl_maximal_dyadic_shifted(f: &GridFunction) -> GridFunction {
    let n = f.n();
    let d = f.dim();
    let vals = magnitudes(f);
    let prefix = prefix_sums(&vals, n, d);
    let mut best: Vec<f64> = vals.clone(); // s = 1 tiles are the cells
    let mut mi = vec![0usize; d];
    let mut lo = vec![0usize; d];
    let mut hi = vec![0usize; d];
    let mut k = 1usize;
    while (1usize << k) <= n {
        let s = 1usize << k;
        let mut shifts: Vec<usize> = vec![0, s / 3, 2 * s / 3];
        shifts.dedup();
        let combos = shifts.len().pow(d as u32);
        let cells = (s as f64).powi(d as i32);
        for combo in 0..combos {
            let mut rem = combo;
            let tau: Vec<usize> = (0..d)
                .map(|_| {
                    let t = shifts[rem % shifts.len()];
                    rem /= shifts.len();
                    t
                })
                .collect();
            for idx in 0..vals.len() {
                let mut rem2 = idx;
                for ax in (0..d).rev() {
                    mi[ax] = rem2 % n;
                    rem2 /= n;
                }
                for ax in 0..d {
                    let t = (mi[ax] + s - tau[ax]) / s;
                    let start = (t * s + tau[ax]) as i64 - s as i64;
                    lo[ax] = start.max(0) as usize;
                    hi[ax] = ((start + s as i64).min(n as i64)).max(0) as usize;
                    if lo[ax] >= hi[ax] {
                        lo[ax] = 0;
                        hi[ax] = 0;
                    }
                }
                if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                    continue;
                }
                // zero-extended cube average: normalize by the full s^d
                let sum = box_sum(&prefix, n, d, &lo, &hi);
                let avg = sum / cells;
                if avg > best[idx] {
                    best[idx] = avg;
                }
            }
        }
        k += 1;
    }
    let mut out = f.clone();
    for (slot, v) in out.values.iter_mut().zip(&best) {
        *slot = Complex64::new(*v, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(vals: &[f64], n: usize) -> GridFunction {
        let mut g = GridFunction::zeros(2, n, n as f64 / 2.0).unwrap();
        for (slot, v) in g.values.iter_mut().zip(vals) {
            *slot = Complex64::new(*v, 0.0);
        }
        g
    }

    /// O(n^4) reference: every axis-aligned cube, every point.
    fn brute_force_max(vals: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0f64; vals.len()];
        for s in 1..=n {
            for py in 0..=(n - s) {
                for px in 0..=(n - s) {
                    let mut sum = 0.0;
                    for y in py..py + s {
                        for x in px..px + s {
                            sum += vals[y * n + x];
                        }
                    }
                    let avg = sum / (s * s) as f64;
                    for y in py..py + s {
                        for x in px..px + s {
                            let idx = y * n + x;
                            if avg > out[idx] {
                                out[idx] = avg;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn constant_input_gives_constant_max() {
        let n = 16;
        let g = grid_from(&vec![2.5; n * n], n);
        let m = hl_maximal(&g);
        for v in &m.values {
            assert!((v.re - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn dominates_the_function() {
        let mut rngstate = 77u64;
        let n = 32;
        let vals: Vec<f64> = (0..n * n)
            .map(|_| {
                rngstate = rngstate.wrapping_mul(6364136223846793005).wrapping_add(9);
                (rngstate >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let g = grid_from(&vals, n);
        let m = hl_maximal(&g);
        for (mv, v) in m.values.iter().zip(&vals) {
            assert!(mv.re >= *v - 1e-12);
        }
    }

    #[test]
    fn spike_matches_brute_force() {
        let n = 64;
        let mut vals = vec![0.0f64; n * n];
        vals[(n / 2) * n + n / 2] = 100.0;
        let g = grid_from(&vals, n);
        let m = hl_maximal(&g);
        let reference = brute_force_max(&vals, n);
        for (idx, r) in reference.iter().enumerate() {
            assert!(
                (m.values[idx].re - r).abs() < 1e-10 * (1.0 + r),
                "idx {idx}: {} vs {r}",
                m.values[idx].re
            );
        }
    }

    #[test]
    fn random_input_matches_brute_force() {
        let n = 16;
        let mut state = 5u64;
        let vals: Vec<f64> = (0..n * n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(13);
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let g = grid_from(&vals, n);
        let m = hl_maximal(&g);
        let reference = brute_force_max(&vals, n);
        for (idx, r) in reference.iter().enumerate() {
            assert!(
                (m.values[idx].re - r).abs() < 1e-10,
                "idx {idx}: {} vs {r}",
                m.values[idx].re
            );
        }
    }

    #[test]
    fn shifted_dyadic_brackets_the_exact_maximal() {
        let n = 32;
        let mut state = 15u64;
        let vals: Vec<f64> = (0..n * n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(23);
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        let g = grid_from(&vals, n);
        let exact = hl_maximal_exact(&g);
        let dyadic = hl_maximal_dyadic_shifted(&g);
        let factor = 6.0f64.powi(2);
        for idx in 0..vals.len() {
            let e = exact.values[idx].re;
            let dy = dyadic.values[idx].re;
            assert!(dy <= e + 1e-12, "approx exceeds exact at {idx}");
            assert!(factor * dy >= e - 1e-12, "approx too small at {idx}");
        }
    }
}
