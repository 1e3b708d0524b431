//! Pruned 3D FFTs between band-limited spectra and the physical grid.

use std::cell::RefCell;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// 3D transform on an `n³` grid stored with the last axis contiguous.
///
/// Spectra are assumed to vanish outside the retained cube `|k_j| <= cutoff`,
/// which lets the inverse skip lines that are identically zero and the forward
/// skip lines whose outputs are discarded.
pub(crate) struct Fft3 {
    n: usize,
    retained: Vec<usize>,
    runs: [Range<usize>; 2],
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub(crate) fn new(n: usize, cutoff: usize) -> Self {
        let mut planner = FftPlanner::new();
        let retained: Vec<usize> = (0..=cutoff).chain(n - cutoff..n).collect();
        Fft3 {
            n,
            retained,
            runs: [0..cutoff + 1, n - cutoff..n],
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Spectral to physical, `u(x) = Σ û_k e^{ik·x}` (no normalisation).
    /// Only entries inside the retained cube are read; everything else is
    /// treated as zero, so the caller need not clear the buffer.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        let plan = &self.inverse;
        self.last_axis(plan, data, true);
        self.middle_axis(plan, data, true);
        self.first_axis(plan, data, true);
    }

    /// Physical to spectral without the `1/n³` factor. Only entries inside
    /// the retained cube are meaningful afterwards.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        let plan = &self.forward;
        self.first_axis(plan, data, false);
        self.middle_axis(plan, data, false);
        self.last_axis(plan, data, false);
    }

    fn kept(&self, i: usize) -> bool {
        self.runs.iter().any(|r| r.contains(&i))
    }

    fn last_axis(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], sparse: bool) {
        let n = self.n;
        let gap = self.runs[0].end..self.runs[1].start;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for &i0 in &self.retained {
            for run in &self.runs {
                let start = (i0 * n + run.start) * n;
                let end = (i0 * n + run.end) * n;
                let lines = &mut data[start..end];
                if sparse {
                    for line in lines.chunks_exact_mut(n) {
                        line[gap.clone()].fill(Complex64::default());
                    }
                }
                plan.process_with_scratch(lines, &mut scratch);
            }
        }
    }

    fn middle_axis(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], sparse: bool) {
        let n = self.n;
        let n2 = n * n;
        let mut buf = vec![Complex64::default(); n2];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for &i0 in &self.retained {
            let plane = &mut data[i0 * n2..(i0 + 1) * n2];
            for i1 in 0..n {
                if sparse && !self.kept(i1) {
                    for i2 in 0..n {
                        buf[i2 * n + i1] = Complex64::default();
                    }
                    continue;
                }
                for i2 in 0..n {
                    buf[i2 * n + i1] = plane[i1 * n + i2];
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for i1 in 0..n {
                for i2 in 0..n {
                    plane[i1 * n + i2] = buf[i2 * n + i1];
                }
            }
        }
    }

    fn first_axis(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], sparse: bool) {
        let n = self.n;
        let n2 = n * n;
        let mut buf = vec![Complex64::default(); n2];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for i1 in 0..n {
            for i0 in 0..n {
                if sparse && !self.kept(i0) {
                    for i2 in 0..n {
                        buf[i2 * n + i0] = Complex64::default();
                    }
                    continue;
                }
                let row = &data[i0 * n2 + i1 * n..i0 * n2 + (i1 + 1) * n];
                for (i2, v) in row.iter().enumerate() {
                    buf[i2 * n + i0] = *v;
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for i0 in 0..n {
                let row = &mut data[i0 * n2 + i1 * n..i0 * n2 + (i1 + 1) * n];
                for (i2, v) in row.iter_mut().enumerate() {
                    *v = buf[i2 * n + i0];
                }
            }
        }
    }
}

thread_local! {
    static POOL: RefCell<Vec<Vec<Complex64>>> = const { RefCell::new(Vec::new()) };
}

/// Runs `f` with `count` grid buffers of length `len`, recycling allocations
/// per thread. Contents are unspecified.
pub(crate) fn with_grids<R>(count: usize, len: usize, f: impl FnOnce(&mut [Vec<Complex64>]) -> R) -> R {
    let mut bufs: Vec<Vec<Complex64>> = POOL.with(|p| {
        let mut pool = p.borrow_mut();
        (0..count)
            .map(|_| {
                let mut b = pool.pop().unwrap_or_default();
                b.resize(len, Complex64::default());
                b
            })
            .collect()
    });
    let out = f(&mut bufs);
    POOL.with(|p| {
        let mut pool = p.borrow_mut();
        if pool.len() < 64 {
            pool.extend(bufs);
        }
    });
    out
}
