//! Symmetric banded convolutions, direct and FFT-accelerated.
//!
//! The discrete nonlocal operator has the stencil
//! out[i] = diag * f[i] - sum_j w_j (f[i+j] + f[i-j]),  j = 1..J,
//! with reads outside the array replaced by constant pad values.  The
//! direct path is the O(n J) baseline; the FFT path evaluates the same
//! stencil as a padded linear convolution and must agree to roundoff.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// Cached forward/inverse plan pair for a given transform size.
pub(crate) fn fft_plans(size: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(size)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(size), planner.plan_fft_inverse(size))
        })
        .clone()
}

/// Direct evaluation of the symmetric stencil with constant padding.
pub fn symmetric_conv_direct(
    diag: f64,
    neg_weights: &[f64],
    input: &[f64],
    pad_left: f64,
    pad_right: f64,
) -> Vec<f64> {
    let n = input.len() as isize;
    let get = |k: isize| -> f64 {
        if k < 0 {
            pad_left
        } else if k >= n {
            pad_right
        } else {
            input[k as usize]
        }
    };
    (0..n)
        .map(|i| {
            let mut acc = diag * input[i as usize];
            for (j, w) in neg_weights.iter().enumerate() {
                let j = j as isize + 1;
                acc -= w * (get(i + j) + get(i - j));
            }
            acc
        })
        .collect()
}

/// FFT-ready form of the symmetric stencil, reusable across many inputs
/// of length up to `max_input_len`.
pub struct SymmetricKernelFft {
    j: usize,
    size: usize,
    spectrum: Vec<Complex<f64>>,
}

impl SymmetricKernelFft {
    pub fn new(diag: f64, neg_weights: &[f64], max_input_len: usize) -> Self {
        let j = neg_weights.len();
        let size = (max_input_len + 4 * j + 1).next_power_of_two();
        let mut kernel = vec![Complex::new(0.0, 0.0); size];
        kernel[j] = Complex::new(diag, 0.0);
        for (idx, w) in neg_weights.iter().enumerate() {
            let d = idx + 1;
            kernel[j - d] = Complex::new(-w, 0.0);
            kernel[j + d] = Complex::new(-w, 0.0);
        }
        let (fwd, _) = fft_plans(size);
        fwd.process(&mut kernel);
        SymmetricKernelFft { j, size, spectrum: kernel }
    }

    pub fn bandwidth(&self) -> usize {
        self.j
    }

    pub fn apply(&self, input: &[f64], pad_left: f64, pad_right: f64) -> Vec<f64> {
        let n = input.len();
        let j = self.j;
        assert!(n + 4 * j + 1 <= self.size, "input exceeds planned convolution size");
        let mut buf = vec![Complex::new(0.0, 0.0); self.size];
        for t in 0..j {
            buf[t] = Complex::new(pad_left, 0.0);
            buf[j + n + t] = Complex::new(pad_right, 0.0);
        }
        for (t, v) in input.iter().enumerate() {
            buf[j + t] = Complex::new(*v, 0.0);
        }
        let (fwd, inv) = fft_plans(self.size);
        fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        inv.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        // The symmetric kernel makes the stencil at padded index p equal
        // the linear convolution at p + j, i.e. field index i -> 2j + i.
        (0..n).map(|i| buf[2 * j + i].re * scale).collect()
    }
}
