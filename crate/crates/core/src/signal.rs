//! Decimating filter primitives shared by the transforms.

use std::sync::Arc;

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::filters::{FilterBank, Filter1D};

/// How signals are extended past their ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Whole-point mirror: `x[-1] = x[1]`, `x[n] = x[n - 2]`.
    #[default]
    Symmetric,
    /// Circular wrap.
    Periodic,
}

impl Boundary {
    pub fn index(self, i: isize, n: usize) -> usize {
        let n_i = n as isize;
        match self {
            Boundary::Periodic => i.rem_euclid(n_i) as usize,
            Boundary::Symmetric => {
                if n == 1 {
                    return 0;
                }
                let period = 2 * (n_i - 1);
                let m = i.rem_euclid(period);
                (if m < n_i { m } else { period - m }) as usize
            }
        }
    }
}

/// Copy `x` into `buf` with `pad` extended samples on each side.
fn extend_into(x: &[f64], pad: usize, boundary: Boundary, buf: &mut Vec<f64>) {
    buf.clear();
    let n = x.len();
    buf.extend((0..n + 2 * pad).map(|k| x[boundary.index(k as isize - pad as isize, n)]));
}

/// Decimated analysis of one lane: `out[i] = sum_t h[t] x[2i + phase - t]`.
pub fn analyze_into(x: &[f64], filter: &Filter1D, boundary: Boundary, ext: &mut Vec<f64>, out: &mut [f64]) {
    let taps = filter.taps();
    let pad = taps.len() + filter.phase().unsigned_abs() + 1;
    extend_into(x, pad, boundary, ext);
    for (i, o) in out.iter_mut().enumerate() {
        // Index of x[2i + phase] inside the extended buffer.
        let base = (2 * i) as isize + filter.phase() + pad as isize;
        let mut acc = 0.0;
        for (t, &h) in taps.iter().enumerate() {
            acc += h * ext[(base - t as isize) as usize];
        }
        *o = acc;
    }
}

/// Periodic synthesis of one lane, accumulated into `out` (length `2 * y.len()`).
pub fn synthesize_add(y: &[f64], filter: &Filter1D, out: &mut [f64]) {
    let n = out.len() as isize;
    for (i, &c) in y.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let start = 2 * i as isize - filter.phase();
        for (t, &g) in filter.taps().iter().enumerate() {
            out[(start + t as isize).rem_euclid(n) as usize] += c * g;
        }
    }
}

/// Filter every lane along `axis` and keep every second sample.
pub fn analyze_axis(x: ArrayView2<f64>, filter: &Filter1D, boundary: Boundary, axis: Axis) -> Array2<f64> {
    let mut dim = x.raw_dim();
    let n = dim[axis.index()];
    dim[axis.index()] = n / 2;
    let mut out = Array2::zeros(dim);
    let mut lane = Vec::with_capacity(n);
    let mut ext = Vec::new();
    let mut res = vec![0.0; n / 2];
    for (src, mut dst) in x.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        lane.clear();
        lane.extend(src.iter().copied());
        analyze_into(&lane, filter, boundary, &mut ext, &mut res);
        dst.iter_mut().zip(&res).for_each(|(d, &r)| *d = r);
    }
    out
}

/// Periodic two-channel synthesis along `axis`; doubles that dimension.
pub fn synthesize_axis(lo: ArrayView2<f64>, hi: ArrayView2<f64>, bank: &FilterBank, axis: Axis) -> Array2<f64> {
    let mut dim = lo.raw_dim();
    let m = dim[axis.index()];
    dim[axis.index()] = 2 * m;
    let mut out = Array2::zeros(dim);
    let (mut lb, mut hb, mut res) = (Vec::with_capacity(m), Vec::with_capacity(m), vec![0.0; 2 * m]);
    for ((l, h), mut dst) in lo
        .lanes(axis)
        .into_iter()
        .zip(hi.lanes(axis))
        .zip(out.lanes_mut(axis))
    {
        lb.clear();
        lb.extend(l.iter().copied());
        hb.clear();
        hb.extend(h.iter().copied());
        res.iter_mut().for_each(|r| *r = 0.0);
        synthesize_add(&lb, bank.lo_s(), &mut res);
        synthesize_add(&hb, bank.hi_s(), &mut res);
        dst.iter_mut().zip(&res).for_each(|(d, &r)| *d = r);
    }
    out
}

/// Output of one separable two-channel analysis step.
#[derive(Debug, Clone)]
pub struct Quad {
    pub ll: Array2<f64>,
    /// Columns (x) highpass, rows (y) lowpass.
    pub hl: Array2<f64>,
    /// Columns (x) lowpass, rows (y) highpass.
    pub lh: Array2<f64>,
    pub hh: Array2<f64>,
}

/// Row-then-column analysis. `row_bank` filters along x, `col_bank` along y.
pub fn analyze_2d(x: ArrayView2<f64>, row_bank: &FilterBank, col_bank: &FilterBank, boundary: Boundary) -> Quad {
    let xl = analyze_axis(x, row_bank.lo(), boundary, Axis(1));
    let xh = analyze_axis(x, row_bank.hi(), boundary, Axis(1));
    Quad {
        ll: analyze_axis(xl.view(), col_bank.lo(), boundary, Axis(0)),
        lh: analyze_axis(xl.view(), col_bank.hi(), boundary, Axis(0)),
        hl: analyze_axis(xh.view(), col_bank.lo(), boundary, Axis(0)),
        hh: analyze_axis(xh.view(), col_bank.hi(), boundary, Axis(0)),
    }
}

/// Separable lowpass-only step (both axes), used for pyramid recursion.
pub fn lowpass_2d(x: ArrayView2<f64>, bank: &FilterBank, boundary: Boundary) -> Array2<f64> {
    let xl = analyze_axis(x, bank.lo(), boundary, Axis(1));
    analyze_axis(xl.view(), bank.lo(), boundary, Axis(0))
}

/// Pad `x` by `pad` samples on every side using `boundary`.
pub fn extend_2d(x: ArrayView2<f64>, pad: usize, boundary: Boundary) -> Array2<f64> {
    let (r, c) = x.dim();
    Array2::from_shape_fn((r + 2 * pad, c + 2 * pad), |(i, j)| {
        x[[
            boundary.index(i as isize - pad as isize, r),
            boundary.index(j as isize - pad as isize, c),
        ]]
    })
}

/// Correlate `x` with an odd square complex kernel centered on its middle
/// tap, evaluating only even output positions:
/// `out[i][j] = sum_{u,v} k[u][v] * x[2i + u - c][2j + v - c]`.
pub fn correlate_even_direct(x: ArrayView2<f64>, kernel: &Array2<Complex64>, boundary: Boundary) -> Array2<Complex64> {
    let (rows, cols) = x.dim();
    let size = kernel.nrows();
    let center = size / 2;
    let ext = extend_2d(x, center, boundary);
    let ext = ext.as_standard_layout();
    let ext_cols = ext.ncols();
    let data = ext.as_slice().expect("standard layout");
    let re: Vec<f64> = kernel.iter().map(|z| z.re).collect();
    let im: Vec<f64> = kernel.iter().map(|z| z.im).collect();
    Array2::from_shape_fn((rows / 2, cols / 2), |(i, j)| {
        let (mut acc_re, mut acc_im) = (0.0, 0.0);
        for u in 0..size {
            let row = &data[(2 * i + u) * ext_cols + 2 * j..][..size];
            let kr = &re[u * size..][..size];
            let ki = &im[u * size..][..size];
            for v in 0..size {
                acc_re += kr[v] * row[v];
                acc_im += ki[v] * row[v];
            }
        }
        Complex64::new(acc_re, acc_im)
    })
}

/// Smallest size >= n whose only prime factors are 2, 3 and 5.
fn smooth_size(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut k = m;
            for p in [2, 3, 5] {
                while k % p == 0 {
                    k /= p;
                }
            }
            k == 1
        })
        .expect("unbounded search")
}

/// Square 2D FFT on a standard-layout buffer.
struct Fft2 {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.size;
        let fft = if inverse { &self.inverse } else { &self.forward };
        fft.process(data);
        let mut column = vec![Complex64::default(); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            fft.process(&mut column);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
    }
}

/// FFT counterpart of [`correlate_even_direct`] for several kernels of equal
/// size. Results agree with the direct path to rounding error.
pub fn correlate_even_fft(
    x: ArrayView2<f64>,
    kernels: &[&Array2<Complex64>],
    boundary: Boundary,
) -> Vec<Array2<Complex64>> {
    let Some(first) = kernels.first() else {
        return Vec::new();
    };
    let (rows, cols) = x.dim();
    let ksize = first.nrows();
    let center = ksize / 2;
    let ext = extend_2d(x, center, boundary);
    let n = smooth_size(ext.nrows().max(ext.ncols()));
    let fft = Fft2::new(n);

    let mut spectrum = vec![Complex64::default(); n * n];
    for ((r, c), &v) in ext.indexed_iter() {
        spectrum[r * n + c] = Complex64::new(v, 0.0);
    }
    fft.run(&mut spectrum, false);

    let scale = 1.0 / (n * n) as f64;
    kernels
        .iter()
        .map(|kernel| {
            assert_eq!(kernel.dim(), (ksize, ksize), "kernels must share one size");
            // Correlation is convolution with the index-reversed kernel.
            let mut buf = vec![Complex64::default(); n * n];
            for ((u, v), &k) in kernel.indexed_iter() {
                buf[((n - u) % n) * n + (n - v) % n] = k;
            }
            fft.run(&mut buf, false);
            buf.iter_mut().zip(&spectrum).for_each(|(b, s)| *b *= s);
            fft.run(&mut buf, true);
            Array2::from_shape_fn((rows / 2, cols / 2), |(i, j)| buf[(2 * i) * n + 2 * j] * scale)
        })
        .collect()
}
