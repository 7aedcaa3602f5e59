//! Iterative radix-2 FFT on power-of-two lengths.
//!
//! Twiddles are evaluated directly with `sin`/`cos` per index rather than by
//! repeated multiplication so that round-off stays at O(ε log n).

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Precomputed plan for a fixed power-of-two length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    twiddles: Vec<Complex>,
}

impl Fft {
    /// Panics if `len` is not a power of two.
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "FFT length must be a power of two");
        let half = len / 2;
        let twiddles = (0..half)
            .map(|k| {
                let angle = -2.0 * PI * (k as f64) / (len as f64);
                Complex::new(libm::cos(angle), libm::sin(angle))
            })
            .collect();
        Self { len, twiddles }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized forward transform, `X[k] = Σ x[j] e^{-2πijk/n}`.
    pub fn forward(&self, data: &mut [Complex]) {
        self.transform(data, false);
    }

    /// Inverse transform including the `1/n` factor.
    pub fn inverse(&self, data: &mut [Complex]) {
        self.transform(data, true);
        let s = 1.0 / self.len as f64;
        for z in data.iter_mut() {
            *z = z.scale(s);
        }
    }

    fn transform(&self, data: &mut [Complex], inverse: bool) {
        let n = self.len;
        assert_eq!(data.len(), n, "buffer length does not match plan");
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

/// Cross-correlations `out[k] = Σ_i a[i] b[i+k]`, `k in 0..=max_lag`, for
/// each requested `(a, b)` index pair into `seqs` (all of equal length).
///
/// Real inputs are packed two per forward transform and real outputs two per
/// inverse transform, with zero padding so no lag wraps around.
pub fn cross_correlations(
    seqs: &[&[f64]],
    pairs: &[(usize, usize)],
    max_lag: usize,
) -> Vec<Vec<f64>> {
    let n = seqs.first().map_or(0, |s| s.len());
    let size = (n + max_lag + 1).next_power_of_two();
    let plan = Fft::new(size);

    let mut spectra: Vec<Vec<Complex>> = Vec::with_capacity(seqs.len());
    for chunk in seqs.chunks(2) {
        let mut z = alloc::vec![Complex::ZERO; size];
        for (i, slot) in z.iter_mut().enumerate().take(n) {
            slot.re = chunk[0][i];
            if let Some(b) = chunk.get(1) {
                slot.im = b[i];
            }
        }
        plan.forward(&mut z);
        let split = |k: usize| {
            let zk = z[k];
            let zm = z[(size - k) % size].conj();
            let a = (zk + zm).scale(0.5);
            let d = zk - zm;
            (a, Complex::new(d.im * 0.5, -d.re * 0.5))
        };
        let (a, b): (Vec<Complex>, Vec<Complex>) = (0..size).map(split).unzip();
        spectra.push(a);
        if chunk.len() == 2 {
            spectra.push(b);
        }
    }

    let mut out = Vec::with_capacity(pairs.len());
    for chunk in pairs.chunks(2) {
        let mut z: Vec<Complex> = (0..size)
            .map(|k| {
                let (a, b) = chunk[0];
                let p = spectra[a][k].conj() * spectra[b][k];
                match chunk.get(1) {
                    Some(&(c, d)) => {
                        let q = spectra[c][k].conj() * spectra[d][k];
                        Complex::new(p.re - q.im, p.im + q.re)
                    }
                    None => p,
                }
            })
            .collect();
        plan.inverse(&mut z);
        out.push(z.iter().take(max_lag + 1).map(|c| c.re).collect());
        if chunk.len() == 2 {
            out.push(z.iter().take(max_lag + 1).map(|c| c.im).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex::ZERO, |acc, (j, &v)| {
                    let a = -2.0 * PI * (j * k) as f64 / n as f64;
                    acc + v * Complex::new(libm::cos(a), libm::sin(a))
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex> = (0..64)
            .map(|i| Complex::new(libm::sin(i as f64 * 0.37), (i % 5) as f64 - 2.0))
            .collect();
        let expected = naive_dft(&x);
        let mut y = x.clone();
        Fft::new(64).forward(&mut y);
        for (a, b) in y.iter().zip(&expected) {
            assert!((a.re - b.re).abs() < 1e-10 && (a.im - b.im).abs() < 1e-10);
        }
        Fft::new(64).inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a.re - b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_correlation_matches_loop() {
        let a: Vec<f64> = (0..50).map(|i| libm::cos(i as f64)).collect();
        let b: Vec<f64> = (0..50).map(|i| (i % 7) as f64).collect();
        let c: Vec<f64> = (0..50).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let seqs = [a.as_slice(), b.as_slice(), c.as_slice()];
        let pairs = [(0, 1), (1, 0), (2, 2)];
        let got = cross_correlations(&seqs, &pairs, 10);
        for (p, &(x, y)) in pairs.iter().enumerate() {
            for k in 0..=10 {
                let direct: f64 = (0..50 - k).map(|i| seqs[x][i] * seqs[y][i + k]).sum();
                assert!((got[p][k] - direct).abs() < 1e-10, "pair {p} lag {k}");
            }
        }
    }
}
