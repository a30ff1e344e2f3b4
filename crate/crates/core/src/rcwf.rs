//! Rotated complex wavelet filters.
//!
//! The six directional DT-CWT filters are written out as non-separable
//! `(2N-1) x (2N-1)` complex kernels and their tap grids rotated by 45
//! degrees. Decomposing with the rotated set yields bands oriented at
//! -30, 0, 30, 60, 90 and 120 degrees, interleaving with the DT-CWT's six.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::filters::{DualTreeFilterSet, Filter1D, Tree};
use crate::pyramid::{check_depth, Method, Orientation, Pyramid, Subband};
use crate::signal::{correlate_even_direct, correlate_even_fft, lowpass_2d, Boundary};

/// Band order within each RCWF level.
pub const RCWF_ORIENTATIONS: [i16; 6] = [-30, 0, 30, 60, 90, 120];

/// Angle the directional kernels are rotated by, counter-clockwise.
pub const ROTATION_DEGREES: f64 = 45.0;

const HILBERT_FFT_LEN: usize = 512;

/// A square complex correlation kernel with an orientation label.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    pub taps: Array2<Complex64>,
    pub orientation: i16,
    /// DT-CWT label of the kernel this one was rotated from.
    pub source: i16,
}

impl Kernel2D {
    pub fn size(&self) -> usize {
        self.taps.nrows()
    }

    pub fn energy(&self) -> f64 {
        tap_energy(&self.taps)
    }

    pub fn tap_sum(&self) -> Complex64 {
        self.taps.sum()
    }
}

/// How rotated taps are resampled onto the integer grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Each rotated tap is spread over its four integer neighbours.
    Bilinear,
    /// Each rotated tap is spread as a separable sinc, which is exact for
    /// band-limited kernels up to truncation at the grid edge.
    #[default]
    BandLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionStrategy {
    Direct,
    #[default]
    Fft,
}

fn tap_energy(taps: &Array2<Complex64>) -> f64 {
    taps.iter().map(|z| z.norm_sqr()).sum()
}

/// Lay a 1D filter on a `size` grid so that correlating the grid with a
/// signal reproduces the filter's analysis alignment at the centre sample.
fn place(filter: &Filter1D, size: usize) -> Array1<f64> {
    let c = (size / 2) as isize;
    let mut grid = Array1::zeros(size);
    for (t, &h) in filter.taps().iter().enumerate() {
        let idx = c + filter.phase() - t as isize;
        assert!((0..size as isize).contains(&idx), "filter does not fit a {size}-tap grid");
        grid[idx as usize] += h;
    }
    grid
}

/// Discrete Hilbert transform of a finite sequence, computed on a
/// zero-padded FFT grid and cut back to the original support.
fn hilbert(x: &Array1<f64>) -> Array1<f64> {
    let n = HILBERT_FFT_LEN;
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = (0..n).map(|k| Complex64::new(x.get(k).copied().unwrap_or(0.0), 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= match k {
            0 => Complex64::new(0.0, 0.0),
            k if k < n / 2 => Complex64::new(0.0, -1.0),
            _ => Complex64::new(0.0, 1.0),
        };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Array1::from_iter(buf[..x.len()].iter().map(|z| z.re / n as f64))
}

fn analytic(x: &Array1<f64>) -> Array1<Complex64> {
    let h = hilbert(x);
    Array1::from_iter(x.iter().zip(h.iter()).map(|(&re, &im)| Complex64::new(re, im)))
}

/// Kernel with columns (x) filtered by `fx` and rows (y) by `fy`.
fn outer(fy: &Array1<Complex64>, fx: &Array1<Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn((fy.len(), fx.len()), |(r, c)| fy[r] * fx[c] * FRAC_1_SQRT_2)
}

/// The six unrotated directional kernels, labelled like the DT-CWT bands.
///
/// Complex 1D filters pair each Q-shift tree-a filter with its Hilbert
/// transform; a conjugate on the row filter flips the vertical frequency
/// sign and hence the sign of the orientation.
pub fn directional_kernels(fs: &DualTreeFilterSet) -> Vec<Kernel2D> {
    let bank = fs.bank(Tree::A, 2);
    let size = 2 * bank.lo().len() - 1;
    let psi = analytic(&place(bank.hi(), size));
    let phi = analytic(&place(bank.lo(), size));
    let psi_c = psi.mapv(|z| z.conj());
    let phi_c = phi.mapv(|z| z.conj());
    [
        (15, outer(&phi_c, &psi)),
        (45, outer(&psi_c, &psi)),
        (75, outer(&psi_c, &phi)),
        (-15, outer(&phi, &psi)),
        (-45, outer(&psi, &psi)),
        (-75, outer(&psi, &phi)),
    ]
    .into_iter()
    .map(|(label, taps)| Kernel2D {
        taps,
        orientation: label,
        source: label,
    })
    .collect()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Rotate a square tap grid counter-clockwise by `degrees` about its centre
/// tap (x to the right, y up). Taps landing outside the grid are dropped.
pub fn rotate_taps(taps: &Array2<Complex64>, degrees: f64, interp: Interpolation) -> Array2<Complex64> {
    let size = taps.nrows();
    assert_eq!(size, taps.ncols(), "tap grid must be square");
    match interp {
        Interpolation::BandLimited => rotate_sinc(taps, degrees),
        Interpolation::Bilinear => rotate_bilinear(taps, degrees),
    }
}

/// Spread every source tap onto the grid as a separable sinc centred on
/// its rotated position.
fn rotate_sinc(taps: &Array2<Complex64>, degrees: f64) -> Array2<Complex64> {
    let size = taps.nrows();
    let c = (size / 2) as f64;
    let (sin, cos) = degrees.to_radians().sin_cos();
    let mut out = Array2::<Complex64>::zeros((size, size));
    let mut wx = vec![0.0; size];
    let mut wy = vec![0.0; size];
    for ((r, q), &v) in taps.indexed_iter() {
        if v.norm_sqr() == 0.0 {
            continue;
        }
        let x = q as f64 - c;
        let y = c - r as f64;
        let col = c + cos * x - sin * y;
        let row = c - (sin * x + cos * y);
        wx.iter_mut().enumerate().for_each(|(j, w)| *w = sinc(j as f64 - col));
        wy.iter_mut().enumerate().for_each(|(i, w)| *w = sinc(i as f64 - row));
        for (i, &a) in wy.iter().enumerate() {
            for (j, &b) in wx.iter().enumerate() {
                out[[i, j]] += v * (a * b);
            }
        }
    }
    out
}

/// Sample the source grid bilinearly at the inverse-rotated position of
/// every output tap; positions outside the source grid read as zero.
fn rotate_bilinear(taps: &Array2<Complex64>, degrees: f64) -> Array2<Complex64> {
    let size = taps.nrows();
    let c = (size / 2) as f64;
    let (sin, cos) = degrees.to_radians().sin_cos();
    let at = |r: isize, q: isize| {
        if (0..size as isize).contains(&r) && (0..size as isize).contains(&q) {
            taps[[r as usize, q as usize]]
        } else {
            Complex64::default()
        }
    };
    Array2::from_shape_fn((size, size), |(r, q)| {
        let x = q as f64 - c;
        let y = c - r as f64;
        let sx = cos * x + sin * y;
        let sy = -sin * x + cos * y;
        let (col, row) = (c + sx, c - sy);
        let (c0, r0) = (col.floor(), row.floor());
        let (fc, fr) = (col - c0, row - r0);
        let (c0, r0) = (c0 as isize, r0 as isize);
        at(r0, c0) * ((1.0 - fr) * (1.0 - fc))
            + at(r0, c0 + 1) * ((1.0 - fr) * fc)
            + at(r0 + 1, c0) * (fr * (1.0 - fc))
            + at(r0 + 1, c0 + 1) * (fr * fc)
    })
}

pub fn build_rcwf_kernels(fs: &DualTreeFilterSet) -> Vec<Kernel2D> {
    build_rcwf_kernels_with(fs, Interpolation::default())
}

/// Rotate every directional kernel by 45 degrees, remove the small DC
/// term left by interpolation and restore the source tap energy.
pub fn build_rcwf_kernels_with(fs: &DualTreeFilterSet, interp: Interpolation) -> Vec<Kernel2D> {
    let mut kernels: Vec<Kernel2D> = directional_kernels(fs)
        .into_iter()
        .map(|src| {
            let mut taps = rotate_taps(&src.taps, ROTATION_DEGREES, interp);
            let mean = taps.mean().expect("non-empty grid");
            taps.mapv_inplace(|z| z - mean);
            let scale = (src.energy() / tap_energy(&taps)).sqrt();
            taps.mapv_inplace(|z| z * scale);
            Kernel2D {
                taps,
                orientation: fold_label(src.source + ROTATION_DEGREES as i16),
                source: src.source,
            }
        })
        .collect();
    kernels.sort_by_key(|k| RCWF_ORIENTATIONS.iter().position(|&o| o == k.orientation));
    kernels
}

/// Map an angle onto the label range (-90, 120].
fn fold_label(deg: i16) -> i16 {
    if deg <= -90 {
        deg + 180
    } else if deg > 120 {
        deg - 180
    } else {
        deg
    }
}

pub fn rcwf_forward(img: ArrayView2<f64>, levels: usize, kernels: &[Kernel2D]) -> Result<Pyramid> {
    rcwf_forward_with(
        img,
        levels,
        kernels,
        &DualTreeFilterSet::kingsbury(),
        ConvolutionStrategy::default(),
        Boundary::Symmetric,
    )
}

pub fn rcwf_forward_with(
    img: ArrayView2<f64>,
    levels: usize,
    kernels: &[Kernel2D],
    fs: &DualTreeFilterSet,
    strategy: ConvolutionStrategy,
    boundary: Boundary,
) -> Result<Pyramid> {
    let (rows, cols) = img.dim();
    check_depth(rows, cols, levels)?;
    let mut bands = Vec::with_capacity(kernels.len() * levels);
    let mut current = img.to_owned();
    for level in 1..=levels {
        let outputs = match strategy {
            ConvolutionStrategy::Direct => kernels
                .par_iter()
                .map(|k| correlate_even_direct(current.view(), &k.taps, boundary))
                .collect::<Vec<_>>(),
            ConvolutionStrategy::Fft => {
                let taps: Vec<&Array2<Complex64>> = kernels.iter().map(|k| &k.taps).collect();
                correlate_even_fft(current.view(), &taps, boundary)
            }
        };
        for (k, values) in kernels.iter().zip(outputs) {
            bands.push(Subband::complex(level, Orientation::Degrees(k.orientation), values));
        }
        current = lowpass_2d(current.view(), fs.bank(Tree::A, level), boundary);
    }
    Ok(Pyramid {
        method: Method::Rcwf,
        levels,
        boundary,
        bands,
        lowpass: vec![current],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pyramid::subband_magnitude;

    fn gaussian(size: usize, sigma: f64) -> Array2<Complex64> {
        let c = (size / 2) as f64;
        Array2::from_shape_fn((size, size), |(r, q)| {
            let d2 = (r as f64 - c).powi(2) + (q as f64 - c).powi(2);
            Complex64::new((-d2 / (2.0 * sigma * sigma)).exp(), 0.0)
        })
    }

    fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn spectrum_sides(f: &Array1<Complex64>) -> (f64, f64) {
        let (mut neg, mut pos) = (0.0, 0.0);
        for i in 1..400 {
            let w = PI * i as f64 / 400.0;
            for (sign, acc) in [(-1.0, &mut neg), (1.0, &mut pos)] {
                let z: Complex64 = f.iter().enumerate().map(|(k, &v)| v * Complex64::from_polar(1.0, -sign * w * k as f64)).sum();
                *acc += z.norm_sqr();
            }
        }
        (neg, pos)
    }

    #[test]
    fn complex_filters_are_one_sided() {
        let bank = DualTreeFilterSet::kingsbury().tree_a_qshift;
        for f in [bank.hi(), bank.lo()] {
            let (neg, pos) = spectrum_sides(&analytic(&place(f, 27)));
            assert!(neg < 0.01 * pos, "{neg} vs {pos}");
        }
    }

    #[test]
    fn kernel_shapes_and_labels() {
        let fs = DualTreeFilterSet::kingsbury();
        let ks = build_rcwf_kernels(&fs);
        assert_eq!(ks.len(), 6);
        assert_eq!(ks.iter().map(|k| k.orientation).collect::<Vec<_>>(), RCWF_ORIENTATIONS.to_vec());
        let sources: Vec<i16> = directional_kernels(&fs).iter().map(|k| k.orientation).collect();
        for k in &ks {
            assert_eq!(k.size(), 27);
            assert_eq!(k.size(), 2 * fs.tree_a_qshift.lo().len() - 1);
            assert!(sources.contains(&k.source));
            assert_eq!(fold_label(k.source + 45), k.orientation);
        }
    }

    #[test]
    fn rotation_preserves_energy_and_removes_dc() {
        let fs = DualTreeFilterSet::kingsbury();
        let src = directional_kernels(&fs);
        for interp in [Interpolation::Bilinear, Interpolation::BandLimited] {
            for k in build_rcwf_kernels_with(&fs, interp) {
                let s = src.iter().find(|s| s.orientation == k.source).unwrap();
                assert!((k.energy() - s.energy()).abs() < 1e-8 * s.energy());
                assert!(k.tap_sum().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_is_rotation_invariant() {
        let g = gaussian(27, 3.0);
        let r = rotate_taps(&g, 45.0, Interpolation::BandLimited);
        assert!(max_diff(&g, &r) < 1e-3);
        let r = rotate_taps(&g, 45.0, Interpolation::Bilinear);
        let e = max_diff(&g, &r);
        assert!(e < 0.05, "{e}");
    }

    #[test]
    fn quarter_turn_of_axis_aligned_grid_is_exact() {
        let mut k = Array2::<Complex64>::zeros((5, 5));
        k[[2, 4]] = Complex64::new(1.0, 0.0);
        for interp in [Interpolation::Bilinear, Interpolation::BandLimited] {
            let r = rotate_taps(&k, 90.0, interp);
            // +x rotates to +y, which is the top row.
            assert!((r[[0, 2]].re - 1.0).abs() < 1e-12);
            assert!(r.iter().map(|z| z.norm()).sum::<f64>() - 1.0 < 1e-9);
        }
    }

    #[test]
    fn constant_image_gives_zero_bands() {
        let fs = DualTreeFilterSet::kingsbury();
        let ks = build_rcwf_kernels(&fs);
        let img = Array2::from_elem((64, 64), 0.6);
        let pyr = rcwf_forward(img.view(), 4, &ks).unwrap();
        assert_eq!(pyr.bands.len(), 24);
        for band in &pyr.bands {
            assert!(subband_magnitude(band).iter().all(|&m| m < 1e-6));
        }
    }

    #[test]
    fn direct_and_fft_agree() {
        let fs = DualTreeFilterSet::kingsbury();
        let ks = build_rcwf_kernels(&fs);
        let img = Array2::from_shape_fn((64, 64), |(i, j)| ((i * i + 3 * j) % 17) as f64 / 17.0);
        let a = rcwf_forward_with(img.view(), 3, &ks, &fs, ConvolutionStrategy::Direct, Boundary::Symmetric).unwrap();
        let b = rcwf_forward_with(img.view(), 3, &ks, &fs, ConvolutionStrategy::Fft, Boundary::Symmetric).unwrap();
        for (x, y) in a.bands.iter().zip(&b.bands) {
            assert!(max_diff(&x.as_complex().unwrap().to_owned(), &y.as_complex().unwrap().to_owned()) < 1e-8);
        }
    }
}
