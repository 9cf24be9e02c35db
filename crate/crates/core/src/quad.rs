//! Gauss–Legendre quadrature with composite panels and graded meshes for
//! endpoint algebraic singularities.

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// ∫_a^b f dx with a single n-point rule.
pub fn integrate_gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Composite rule: `panels` equal panels of an n-point rule.
pub fn integrate_composite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    panels: usize,
) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let pa = a + k as f64 * width;
        let c = pa + 0.5 * width;
        let h = 0.5 * width;
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            s += w * f(c + h * x);
        }
        total += s * h;
    }
    total
}

/// Adaptive composite rule on [a, b]: doubles the panel count until two
/// successive refinements agree to `tol_abs`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol_abs: f64) -> f64 {
    let mut panels = 2;
    let mut prev = integrate_composite(&mut f, a, b, 8, panels);
    for _ in 0..16 {
        panels *= 2;
        let next = integrate_composite(&mut f, a, b, 8, panels);
        if (next - prev).abs() <= tol_abs {
            return next;
        }
        prev = next;
    }
    prev
}

/// ∫_0^len t^lambda g(t) dt where g is smooth: dyadically graded panels
/// toward 0 absorb the algebraic endpoint factor.
pub fn integrate_power_weighted<F: FnMut(f64) -> f64>(mut g: F, lambda: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    let (xs, ws) = gauss_legendre(12);
    let mut total = 0.0;
    // graded panels [len·2^{-k-1}, len·2^{-k}]; the leftover stub near zero
    // contributes at most max|g|·(len·2^-K)^(λ+1)/(λ+1), which is below
    // double precision at K = 60 for λ ≥ 0.
    let kmax = 60;
    for k in 0..kmax {
        let hi = len * (0.5f64).powi(k);
        let lo = hi * 0.5;
        let c = 0.5 * (hi + lo);
        let h = 0.5 * (hi - lo);
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            let t = c + h * x;
            s += w * t.powf(lambda) * g(t);
        }
        total += s * h;
        if hi < 1e-280 {
            break;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_on_polynomials() {
        // 8-point rule integrates degree-15 polynomials exactly
        let val = integrate_gl(|x| x.powi(14) + 3.0 * x.powi(7) - x, -1.0, 1.0, 8);
        assert!((val - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn composite_handles_oscillation() {
        // ∫_0^π sin(40 x) dx = (1 - cos(40π))/40 = 0.0... (cos(40π)=1) => 0
        let val = integrate_composite(|x| (40.0 * x).sin(), 0.0, std::f64::consts::PI, 8, 64);
        assert!(val.abs() < 1e-12);
    }

    #[test]
    fn adaptive_converges() {
        let val = integrate_adaptive(|x| (-x * x).exp(), -8.0, 8.0, 1e-12);
        assert!((val - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn power_weighted_matches_closed_form() {
        // ∫_0^1 t^λ dt = 1/(λ+1)
        for lambda in [0.0, 1.0 / 6.0, 0.5, 1.0, 2.5] {
            let v = integrate_power_weighted(|_| 1.0, lambda, 1.0);
            assert!(
                (v - 1.0 / (lambda + 1.0)).abs() < 1e-13,
                "λ={lambda}: {v}"
            );
        }
        // ∫_0^2 t^0.5 e^{-t} dt against adaptive reference with substitution
        let v = integrate_power_weighted(|t| (-t).exp(), 0.5, 2.0);
        let reference = integrate_adaptive(|u| 2.0 * u * u * (-(u * u)).exp(), 0.0, 2f64.sqrt(), 1e-14);
        assert!((v - reference).abs() < 1e-12);
    }
}
