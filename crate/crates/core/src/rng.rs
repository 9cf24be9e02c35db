//! Small deterministic generator (splitmix64-seeded xoshiro256**) so seeded
//! experiment runs are reproducible independently of external crates.

#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
    cached_normal: Option<f64>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self {
            s,
            cached_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        let u1 = self.unit().max(1e-300);
        let u2 = self.unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(r * th.sin());
        r * th.cos()
    }
}

/// A resolution-independent random smooth field: a sum of anisotropic
/// Gaussian bumps with parameters in physical coordinates, so the same seed
/// yields the same function on any grid refinement.
#[derive(Debug, Clone)]
pub struct SmoothField {
    bumps: Vec<(Vec<f64>, Vec<f64>, f64)>, // center, widths, amplitude
}

impl SmoothField {
    /// `n_bumps` bumps with centers in the box `[lo, hi]^d` (componentwise),
    /// widths in `[wmin, wmax]`, signed amplitudes in `[-1, 1]`.
    pub fn random(
        rng: &mut Rng,
        dim: usize,
        lo: &[f64],
        hi: &[f64],
        wmin: f64,
        wmax: f64,
        n_bumps: usize,
    ) -> Self {
        let mut bumps = Vec::with_capacity(n_bumps);
        for _ in 0..n_bumps {
            let c: Vec<f64> = (0..dim).map(|i| rng.uniform(lo[i], hi[i])).collect();
            let w: Vec<f64> = (0..dim).map(|_| rng.uniform(wmin, wmax)).collect();
            let amp = rng.uniform(-1.0, 1.0);
            bumps.push((c, w, amp));
        }
        Self { bumps }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        for (c, w, amp) in &self.bumps {
            let mut e = 0.0;
            for i in 0..x.len() {
                let t = (x[i] - c[i]) / w[i];
                e += t * t;
            }
            if e < 60.0 {
                v += amp * (-0.5 * e).exp();
            }
        }
        v
    }
}
