//! Integer-order Bessel functions `J_n` and modified Bessel functions `K_n`
//! for non-negative real arguments.
//!
//! `J_n` uses Miller's downward recurrence normalized by
//! `J_0 + 2 sum J_2k = 1`, which is stable for every order and argument.
//! `K_0`, `K_1` come from the integral `int_0^inf exp(-x cosh t) cosh(nu t) dt`
//! evaluated with the trapezoidal rule (geometrically convergent for this
//! analytic integrand); higher orders follow from the stable upward
//! recurrence, carried as ratios so that huge `K_n` never overflow.

/// `J_0(x), ..., J_{n_max}(x)` for `x >= 0`.
pub fn bessel_j_seq(n_max: u32, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "bessel_j_seq needs x >= 0");
    let n_max = n_max as usize;
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = n_max.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let mut j_next = 0.0; // J_{k+1}
    let mut j_k = 1e-300; // J_k, arbitrary scale
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_k - j_next;
        j_next = j_k;
        j_k = j_prev;
        // j_k now holds J_{k-1}
        let idx = k - 1;
        if idx <= n_max {
            out[idx] = j_k;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j_k;
        }
        if j_k.abs() > 1e250 {
            j_k *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j_k;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

pub fn bessel_j(n: u32, x: f64) -> f64 {
    bessel_j_seq(n, x)[n as usize]
}

/// `J_n(x)` and `J_n'(x)` via `J_n' = (J_{n-1} - J_{n+1}) / 2`, `J_0' = -J_1`.
pub fn bessel_j_with_derivative(n: u32, x: f64) -> (f64, f64) {
    let seq = bessel_j_seq(n + 1, x);
    let n = n as usize;
    let d = if n == 0 {
        -seq[1]
    } else {
        0.5 * (seq[n - 1] - seq[n + 1])
    };
    (seq[n], d)
}

/// `(K_0(x) e^x, K_1(x) e^x)` for `x > 0`.
pub fn bessel_k01_scaled(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "bessel_k01_scaled needs x > 0");
    let h = (0.5 / (1.0 + x.sqrt())).min(0.05);
    let mut s0 = 0.5;
    let mut s1 = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let expo = -x * (t.cosh() - 1.0);
        let e0 = expo.exp();
        let e1 = e0 * t.cosh();
        s0 += e0;
        s1 += e1;
        if expo + t < -45.0 {
            break;
        }
        k += 1;
    }
    (s0 * h, s1 * h)
}

/// Modified Bessel functions of the second kind at a fixed argument,
/// stored as `ln K_0` plus successive ratios `K_{n+1} / K_n`.
#[derive(Debug, Clone)]
pub struct BesselK {
    x: f64,
    ln_k0: f64,
    ratios: Vec<f64>,
}

impl BesselK {
    /// Tables orders `0..=n_max + 1`.
    pub fn new(n_max: u32, x: f64) -> Self {
        let (k0s, k1s) = bessel_k01_scaled(x);
        let mut ratios = Vec::with_capacity(n_max as usize + 1);
        let mut r = k1s / k0s;
        ratios.push(r);
        for n in 1..=n_max {
            r = 1.0 / r + 2.0 * f64::from(n) / x;
            ratios.push(r);
        }
        Self {
            x,
            ln_k0: k0s.ln() - x,
            ratios,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// `K_{n+1}(x) / K_n(x)`.
    pub fn ratio(&self, n: u32) -> f64 {
        self.ratios[n as usize]
    }

    pub fn ln_k(&self, n: u32) -> f64 {
        self.ln_k0 + self.ratios[..n as usize].iter().map(|r| r.ln()).sum::<f64>()
    }

    pub fn k(&self, n: u32) -> f64 {
        self.ln_k(n).exp()
    }

    /// Logarithmic derivative `x K_n'(x) / K_n(x)`.
    pub fn log_derivative(&self, n: u32) -> f64 {
        if n == 0 {
            -self.x * self.ratios[0]
        } else {
            // K_n' = -K_{n-1} - (n/x) K_n
            -(f64::from(n)) - self.x / self.ratios[n as usize - 1]
        }
    }

    /// `K_{n-1}(x) K_{n+1}(x) / K_n(x)^2`, with `K_{-1} = K_1`.
    pub fn neighbour_product_ratio(&self, n: u32) -> f64 {
        if n == 0 {
            self.ratios[0] * self.ratios[0]
        } else {
            self.ratios[n as usize] / self.ratios[n as usize - 1]
        }
    }
}

pub fn bessel_k(n: u32, x: f64) -> f64 {
    BesselK::new(n, x).k(n)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // reference values from 30-digit arbitrary-precision evaluation
    #[test]
    fn j_reference_values() {
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_55),
            (1, 2.5, 0.497_094_102_464_274_04),
            (5, 3.0, 0.043_028_434_877_047_584),
            (2, 0.1, 0.001_248_958_658_799_919),
            (30, 12.0, 2.552_259_043_034_417_1e-10),
            (72, 78.0, 0.105_455_945_929_635_56),
            (0, 50.0, 0.055_812_327_669_251_815),
            (10, 80.0, 0.024_043_850_978_184_763),
            (80, 20.0, 4.027_056_638_860_310_4e-40),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x);
            assert!(rel(got, want) < 1e-12, "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn k_reference_values() {
        let cases = [
            (0, 1.0, 0.421_024_438_240_708_33),
            (1, 1.0, 0.601_907_230_197_234_57),
            (0, 0.01, 4.721_244_730_161_095),
            (1, 1e-4, 9_999.999_508_686_404),
            (3, 2.0, 0.647_385_390_948_634_15),
            (20, 5.0, 482_700_052.062_148_47),
            (0, 30.0, 2.132_477_496_463_056_4e-14),
            (5, 0.5, 12_097.979_476_096_393),
            (70, 10.0, 7.037_847_257_731_305_2e48),
        ];
        for (n, x, want) in cases {
            let got = bessel_k(n, x);
            assert!(rel(got, want) < 1e-12, "K_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn j_derivative_matches_finite_difference() {
        for &(n, x) in &[(0u32, 1.3), (1, 2.4), (4, 7.7), (12, 9.0)] {
            let h = 1e-5;
            let fd = (bessel_j(n, x + h) - bessel_j(n, x - h)) / (2.0 * h);
            let (_, d) = bessel_j_with_derivative(n, x);
            assert!((fd - d).abs() < 1e-9);
        }
    }

    #[test]
    fn k_log_derivative_matches_finite_difference() {
        for &(n, x) in &[(0u32, 0.7), (1, 2.0), (6, 3.1)] {
            let h = 1e-5;
            let fd = (bessel_k(n, x + h).ln() - bessel_k(n, x - h).ln()) / (2.0 * h) * x;
            assert!((fd - BesselK::new(n, x).log_derivative(n)).abs() < 1e-8);
        }
    }

    #[test]
    fn j_sum_rule() {
        // sum_n J_n(x)^2 over all integers n equals 1
        for &x in &[0.5, 5.0, 40.0] {
            let seq = bessel_j_seq(200, x);
            let s = seq[0] * seq[0] + 2.0 * seq[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }
}
