//! The convex body Ω through its Minkowski functional ρ: closed-form
//! evaluation, gradients, and the derived gradient bounds c0 < |∇ρ| ≤ C0
//! together with the lattice constant n∘.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GaugeError {
    #[error("ellipsoid axes must all be positive, got {0:?}")]
    BadAxes(Vec<f64>),
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("cannot parse gauge spec `{0}` (expected `ball` or `ellipsoid:a1,a2[,a3]`)")]
    Parse(String),
}

/// Supported gauges. Both have closed-form ρ and gradient and nonvanishing
/// Gaussian boundary curvature.
#[derive(Debug, Clone, PartialEq)]
pub enum MinkowskiGauge {
    Ball { dim: usize },
    Ellipsoid { axes: Vec<f64> },
}

/// Gradient bounds of ρ and the smallest n∘ with `2^(d+4)·C0 < 2^n∘`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeConstants {
    /// Strict lower gradient bound (sampled minimum deflated by 1e-3).
    pub c_min: f64,
    /// Upper gradient bound, at least 1.
    pub c_max: f64,
    pub n_circ: u32,
}

impl MinkowskiGauge {
    pub fn ball(dim: usize) -> Result<Self, GaugeError> {
        if dim < 2 {
            return Err(GaugeError::BadDimension(dim));
        }
        Ok(Self::Ball { dim })
    }

    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self, GaugeError> {
        if axes.len() < 2 {
            return Err(GaugeError::BadDimension(axes.len()));
        }
        if axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(GaugeError::BadAxes(axes));
        }
        Ok(Self::Ellipsoid { axes })
    }

    /// Parses `ball` / `ball:d` / `ellipsoid:a1,a2[,a3,...]`.
    pub fn parse(spec: &str, default_dim: usize) -> Result<Self, GaugeError> {
        let spec = spec.trim();
        if spec == "ball" {
            return Self::ball(default_dim);
        }
        if let Some(rest) = spec.strip_prefix("ball:") {
            let d: usize = rest.trim().parse().map_err(|_| GaugeError::Parse(spec.into()))?;
            return Self::ball(d);
        }
        if let Some(rest) = spec.strip_prefix("ellipsoid:") {
            let axes: Result<Vec<f64>, _> = rest.split(',').map(|t| t.trim().parse()).collect();
            let axes = axes.map_err(|_| GaugeError::Parse(spec.into()))?;
            return Self::ellipsoid(axes);
        }
        Err(GaugeError::Parse(spec.into()))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { dim } => *dim,
            Self::Ellipsoid { axes } => axes.len(),
        }
    }

    /// Largest stretch factor: ρ(ξ) ≥ |ξ| / stretch, so the multiplier
    /// support {ρ ≤ r} sits inside the ball of radius r·stretch.
    pub fn max_stretch(&self) -> f64 {
        match self {
            Self::Ball { .. } => 1.0,
            Self::Ellipsoid { axes } => axes.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Minkowski functional ρ(ξ) = inf{t > 0 : ξ/t ∈ Ω}; positively
    /// homogeneous of degree 1 and equal to 1 on ∂Ω.
    pub fn rho(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim());
        match self {
            Self::Ball { .. } => xi.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Self::Ellipsoid { axes } => xi
                .iter()
                .zip(axes)
                .map(|(x, a)| (x / a) * (x / a))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Gradient of ρ at ξ ≠ 0 (homogeneous of degree 0).
    pub fn grad_rho(&self, xi: &[f64]) -> Vec<f64> {
        let r = self.rho(xi);
        if r == 0.0 {
            return vec![0.0; self.dim()];
        }
        match self {
            Self::Ball { .. } => xi.iter().map(|x| x / r).collect(),
            Self::Ellipsoid { axes } => xi.iter().zip(axes).map(|(x, a)| x / (a * a) / r).collect(),
        }
    }

    /// Gradient bounds verified on a dense boundary sample, plus the lattice
    /// constant n∘. The lower bound is deflated by 1e-3 so the strict
    /// inequality is safe against sampling, the maximum is exact for the
    /// supported kinds because axis points are included in the sample.
    pub fn gauge_constants(&self) -> GaugeConstants {
        let d = self.dim();
        let mut min = f64::INFINITY;
        let mut max: f64 = 0.0;
        let mut visit = |xi: &[f64]| {
            let r = self.rho(xi);
            if r == 0.0 {
                return;
            }
            let bd: Vec<f64> = xi.iter().map(|x| x / r).collect();
            let g = self.grad_rho(&bd);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            min = min.min(norm);
            max = max.max(norm);
        };
        // axis points carry the extrema for balls and ellipsoids
        for i in 0..d {
            let mut xi = vec![0.0; d];
            xi[i] = 1.0;
            visit(&xi);
            xi[i] = -1.0;
            visit(&xi);
        }
        match d {
            2 => {
                let m = 10_000;
                for k in 0..m {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                    visit(&[th.cos(), th.sin()]);
                }
            }
            _ => {
                // spherical Fibonacci sample in the first two coordinates,
                // uniform in the remaining directions via a coarse product
                let m = 20_000;
                let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
                for k in 0..m {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let rxy = (1.0 - z * z).max(0.0).sqrt();
                    let th = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
                    let mut xi = vec![0.0; d];
                    xi[0] = rxy * th.cos();
                    xi[1] = rxy * th.sin();
                    xi[2] = z;
                    visit(&xi);
                }
            }
        }
        let c_max = max.max(1.0);
        let c_min = min * (1.0 - 1e-3);
        let mut n = (d as u32) + 5;
        while (2f64).powi(n as i32) <= (2f64).powi(d as i32 + 4) * c_max {
            n += 1;
        }
        GaugeConstants {
            c_min,
            c_max,
            n_circ: n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn rho_ball_and_ellipsoid_values() {
        let ball = MinkowskiGauge::ball(2).unwrap();
        assert_eq!(ball.rho(&[3.0, 4.0]), 5.0);
        let ell = MinkowskiGauge::ellipsoid(vec![1.0, 2.0]).unwrap();
        assert!((ell.rho(&[0.0, 2.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rho_homogeneity_random_points() {
        let mut rng = Rng::seeded(7);
        for gauge in [
            MinkowskiGauge::ball(2).unwrap(),
            MinkowskiGauge::ellipsoid(vec![1.0, 2.0]).unwrap(),
            MinkowskiGauge::ellipsoid(vec![0.7, 1.3, 2.1]).unwrap(),
        ] {
            let d = gauge.dim();
            for _ in 0..100 {
                let xi: Vec<f64> = (0..d).map(|_| rng.uniform(-2.0, 2.0)).collect();
                let base = gauge.rho(&xi);
                for t in [0.5, 2.0, 7.0] {
                    let scaled: Vec<f64> = xi.iter().map(|x| t * x).collect();
                    let r = gauge.rho(&scaled);
                    assert!((r - t * base).abs() <= 1e-12 * (1.0 + r.abs()));
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = Rng::seeded(11);
        let step = 1e-5;
        for gauge in [
            MinkowskiGauge::ball(3).unwrap(),
            MinkowskiGauge::ellipsoid(vec![1.0, 2.0]).unwrap(),
            MinkowskiGauge::ellipsoid(vec![0.5, 1.5, 2.5]).unwrap(),
        ] {
            let d = gauge.dim();
            for _ in 0..50 {
                // random point with |ξ| in [1/2, 2]
                let dir: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let scale = rng.uniform(0.5, 2.0) / norm;
                let xi: Vec<f64> = dir.iter().map(|v| v * scale).collect();
                let g = gauge.grad_rho(&xi);
                for i in 0..d {
                    let mut hi = xi.clone();
                    let mut lo = xi.clone();
                    hi[i] += step;
                    lo[i] -= step;
                    let fd = (gauge.rho(&hi) - gauge.rho(&lo)) / (2.0 * step);
                    let denom = g[i].abs().max(1.0);
                    assert!(
                        (fd - g[i]).abs() / denom < 1e-6,
                        "component {i}: fd {fd} vs analytic {}",
                        g[i]
                    );
                }
            }
        }
    }

    #[test]
    fn constants_ball() {
        let c = MinkowskiGauge::ball(2).unwrap().gauge_constants();
        assert!(c.c_min < 1.0 && c.c_min > 0.998);
        assert_eq!(c.c_max, 1.0);
        assert_eq!(c.n_circ, 7); // d + 5

        let c3 = MinkowskiGauge::ball(3).unwrap().gauge_constants();
        assert_eq!(c3.n_circ, 8);
    }

    #[test]
    fn constants_ellipsoid_bracket_by_sampling() {
        let gauge = MinkowskiGauge::ellipsoid(vec![1.0, 2.0]).unwrap();
        let c = gauge.gauge_constants();
        // brute-force oracle over an independent boundary sweep
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..10_000 {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / 10_000.0;
            let xi = [th.cos(), 2.0 * th.sin()];
            let g = gauge.grad_rho(&xi);
            let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
            lo = lo.min(n);
            hi = hi.max(n);
        }
        assert!(c.c_min < lo, "strict lower bound");
        assert!(c.c_max >= hi - 1e-12, "upper bound covers the sample");
        // exact extrema for this ellipsoid are 1/2 and 1
        assert!((lo - 0.5).abs() < 1e-6);
        assert_eq!(c.c_max, 1.0);
        assert_eq!(c.n_circ, 7);
    }

    #[test]
    fn degenerate_ellipsoid_matches_ball() {
        let ball = MinkowskiGauge::ball(2).unwrap().gauge_constants();
        let ell = MinkowskiGauge::ellipsoid(vec![1.0, 1.0])
            .unwrap()
            .gauge_constants();
        assert!((ball.c_min - ell.c_min).abs() < 1e-12);
        assert_eq!(ball.c_max, ell.c_max);
        assert_eq!(ball.n_circ, ell.n_circ);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            MinkowskiGauge::parse("ball", 2).unwrap(),
            MinkowskiGauge::ball(2).unwrap()
        );
        assert_eq!(
            MinkowskiGauge::parse("ellipsoid:1,2", 2).unwrap(),
            MinkowskiGauge::ellipsoid(vec![1.0, 2.0]).unwrap()
        );
        assert!(MinkowskiGauge::parse("cube", 2).is_err());
        assert!(MinkowskiGauge::parse("ellipsoid:1,-2", 2).is_err());
    }
}
