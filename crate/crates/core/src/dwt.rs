//! Separable 2D discrete wavelet transform (the baseline decomposition).
//!
//! Each level filters rows then columns and keeps even-indexed samples,
//! producing horizontal-frequency (0 deg), vertical-frequency (90 deg) and
//! diagonal detail bands. An `L`-level pyramid holds `3L + 1` bands.
//!
//! Under periodic extension an orthonormal bank makes the transform
//! orthogonal and the synthesis bank inverts it directly. Under symmetric
//! extension the critically sampled transform is still invertible but not
//! orthogonal; the inverse then solves the per-length boundary operator.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::filters::FilterBank;
use crate::pyramid::{check_depth, Method, Orientation, Pyramid, Subband};
use crate::signal::{analyze_2d, analyze_into, synthesize_axis, Boundary};

/// Detail orientations in per-level storage order.
pub const DWT_DETAIL_ORIENTATIONS: [Orientation; 3] = [
    Orientation::Degrees(0),
    Orientation::Degrees(90),
    Orientation::Diagonal,
];

/// Filter bank and boundary rule for the DWT.
#[derive(Debug, Clone, PartialEq)]
pub struct DwtConfig {
    pub bank: FilterBank,
    pub boundary: Boundary,
}

impl Default for DwtConfig {
    fn default() -> Self {
        Self {
            bank: FilterBank::daubechies8(),
            boundary: Boundary::Symmetric,
        }
    }
}

pub fn dwt2_forward(img: ArrayView2<f64>, levels: usize, bank: &FilterBank, boundary: Boundary) -> Result<Pyramid> {
    let (rows, cols) = img.dim();
    check_depth(rows, cols, levels)?;
    let mut bands = Vec::with_capacity(3 * levels + 1);
    let mut current = img.to_owned();
    for level in 1..=levels {
        let q = analyze_2d(current.view(), bank, bank, boundary);
        bands.push(Subband::real(level, DWT_DETAIL_ORIENTATIONS[0], q.hl));
        bands.push(Subband::real(level, DWT_DETAIL_ORIENTATIONS[1], q.lh));
        bands.push(Subband::real(level, DWT_DETAIL_ORIENTATIONS[2], q.hh));
        current = q.ll;
    }
    bands.push(Subband::real(levels, Orientation::Lowpass, current));
    Ok(Pyramid {
        method: Method::Dwt,
        levels,
        boundary,
        bands,
        lowpass: Vec::new(),
    })
}

/// Inverse of [`dwt2_forward`] for the same bank and the pyramid's boundary rule.
pub fn dwt2_inverse(pyr: &Pyramid, bank: &FilterBank) -> Result<Array2<f64>> {
    if pyr.method != Method::Dwt {
        return Err(Error::Structure(format!("expected a dwt pyramid, got {}", pyr.method)));
    }
    let levels = pyr.levels;
    if levels == 0 || pyr.bands.len() != 3 * levels + 1 {
        return Err(Error::Structure(format!(
            "{} bands for {levels} levels, expected {}",
            pyr.bands.len(),
            3 * levels + 1
        )));
    }
    let approx = &pyr.bands[3 * levels];
    let (ar, ac) = approx.dim();
    if approx.orientation != Orientation::Lowpass || ar != ac || ar == 0 {
        return Err(Error::Structure("last band must be a square approximation".into()));
    }
    let side = ar << levels;
    for (k, band) in pyr.bands[..3 * levels].iter().enumerate() {
        let level = k / 3 + 1;
        let want = side >> level;
        if band.level != level || band.orientation != DWT_DETAIL_ORIENTATIONS[k % 3] || band.dim() != (want, want) {
            return Err(Error::Structure(format!(
                "band {k} is level {} {} {:?}, expected level {level} {} {want}x{want}",
                band.level,
                band.orientation,
                band.dim(),
                DWT_DETAIL_ORIENTATIONS[k % 3]
            )));
        }
        if band.as_real().is_none() {
            return Err(Error::Structure(format!("band {k} is complex")));
        }
    }

    let mut synth = Synthesizer::new(bank, pyr.boundary);
    let mut current = approx.as_real().expect("checked").to_owned();
    for level in (1..=levels).rev() {
        let base = 3 * (level - 1);
        let hl = pyr.bands[base].as_real().expect("checked");
        let lh = pyr.bands[base + 1].as_real().expect("checked");
        let hh = pyr.bands[base + 2].as_real().expect("checked");
        let xl = synth.run(current.view(), lh, Axis(0));
        let xh = synth.run(hl, hh, Axis(0));
        current = synth.run(xl.view(), xh.view(), Axis(1));
    }
    Ok(current)
}

enum Synthesizer<'a> {
    Periodic(&'a FilterBank),
    /// Cached inverses of the symmetric-extension analysis operator, by length.
    Symmetric(&'a FilterBank, HashMap<usize, DMatrix<f64>>),
}

impl<'a> Synthesizer<'a> {
    fn new(bank: &'a FilterBank, boundary: Boundary) -> Self {
        match boundary {
            Boundary::Periodic => Self::Periodic(bank),
            Boundary::Symmetric => Self::Symmetric(bank, HashMap::new()),
        }
    }

    fn run(&mut self, lo: ArrayView2<f64>, hi: ArrayView2<f64>, axis: Axis) -> Array2<f64> {
        match self {
            Self::Periodic(bank) => synthesize_axis(lo, hi, bank, axis),
            Self::Symmetric(bank, cache) => {
                let half = lo.len_of(axis);
                let n = 2 * half;
                let inv = cache
                    .entry(n)
                    .or_insert_with(|| symmetric_operator(bank, n).try_inverse().expect("analysis operator is invertible"));
                let mut dim = lo.raw_dim();
                dim[axis.index()] = n;
                let mut out = Array2::zeros(dim);
                for ((l, h), mut dst) in lo.lanes(axis).into_iter().zip(hi.lanes(axis)).zip(out.lanes_mut(axis)) {
                    let coeffs = DVector::from_iterator(n, l.iter().chain(h.iter()).copied());
                    let x = &*inv * coeffs;
                    dst.iter_mut().zip(x.iter()).for_each(|(d, &v)| *d = v);
                }
                out
            }
        }
    }
}

/// Matrix of the length-`n` symmetric-extension analysis step, lowpass rows first.
fn symmetric_operator(bank: &FilterBank, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    let mut ext = Vec::new();
    let mut lo = vec![0.0; n / 2];
    let mut hi = vec![0.0; n / 2];
    for j in 0..n {
        unit.iter_mut().for_each(|u| *u = 0.0);
        unit[j] = 1.0;
        analyze_into(&unit, bank.lo(), Boundary::Symmetric, &mut ext, &mut lo);
        analyze_into(&unit, bank.hi(), Boundary::Symmetric, &mut ext, &mut hi);
        for (i, &v) in lo.iter().chain(hi.iter()).enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// Approximation band of a DWT pyramid.
pub fn approximation(pyr: &Pyramid) -> Option<&Subband> {
    pyr.bands.last().filter(|b| b.orientation == Orientation::Lowpass)
}

/// Zero pyramid with the band layout of an `L`-level DWT of a `side x side` image.
pub fn zero_pyramid(side: usize, levels: usize, boundary: Boundary) -> Result<Pyramid> {
    check_depth(side, side, levels)?;
    let mut bands = Vec::new();
    for level in 1..=levels {
        for o in DWT_DETAIL_ORIENTATIONS {
            bands.push(Subband::real(level, o, Array2::zeros((side >> level, side >> level))));
        }
    }
    bands.push(Subband::real(levels, Orientation::Lowpass, Array2::zeros((side >> levels, side >> levels))));
    Ok(Pyramid {
        method: Method::Dwt,
        levels,
        boundary,
        bands,
        lowpass: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pyramid::BandValues;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(side: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((side, side), |_| rng.random::<f64>())
    }

    fn max_abs(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_image() {
        let c = 0.37;
        let img = Array2::from_elem((64, 64), c);
        let bank = FilterBank::daubechies8();
        for boundary in [Boundary::Symmetric, Boundary::Periodic] {
            for levels in 1..=6 {
                let pyr = dwt2_forward(img.view(), levels, &bank, boundary).unwrap();
                for band in &pyr.bands[..3 * levels] {
                    assert!(band.as_real().unwrap().iter().all(|v| v.abs() < 1e-12));
                }
                let expect = c * f64::powi(2.0, levels as i32);
                let approx = approximation(&pyr).unwrap().as_real().unwrap();
                assert!(approx.iter().all(|v| (v - expect).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn band_counts_and_sizes() {
        let img = random_image(256, 1);
        let bank = FilterBank::daubechies8();
        let pyr = dwt2_forward(img.view(), 6, &bank, Boundary::Symmetric).unwrap();
        assert_eq!(pyr.bands.len(), 19);
        assert!(pyr.level_bands(6).all(|b| b.dim() == (4, 4)));
        for levels in 1..=6 {
            let pyr = dwt2_forward(img.view(), levels, &bank, Boundary::Symmetric).unwrap();
            assert_eq!(pyr.bands.len(), 3 * levels + 1);
        }
    }

    #[test]
    fn perfect_reconstruction_both_boundaries() {
        let bank = FilterBank::daubechies8();
        for boundary in [Boundary::Periodic, Boundary::Symmetric] {
            for seed in 0..3 {
                let img = random_image(64, seed);
                let pyr = dwt2_forward(img.view(), 6, &bank, boundary).unwrap();
                let back = dwt2_inverse(&pyr, &bank).unwrap();
                assert!(max_abs(&img, &back) < 1e-9, "{boundary:?}: {}", max_abs(&img, &back));
            }
        }
    }

    #[test]
    fn zero_pyramid_inverts_to_zero() {
        let bank = FilterBank::daubechies8();
        for boundary in [Boundary::Periodic, Boundary::Symmetric] {
            let pyr = zero_pyramid(32, 3, boundary).unwrap();
            assert!(dwt2_inverse(&pyr, &bank).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn unit_coefficient_synthesizes_unit_norm_atom() {
        let bank = FilterBank::daubechies8();
        for (band_idx, pos) in [(0usize, (3usize, 5usize)), (4, (2, 2)), (8, (1, 0)), (9, (0, 1))] {
            let mut pyr = zero_pyramid(32, 3, Boundary::Periodic).unwrap();
            if let BandValues::Real(v) = &mut pyr.bands[band_idx].values {
                v[pos] = 1.0;
            }
            let atom = dwt2_inverse(&pyr, &bank).unwrap();
            let norm = atom.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-8, "band {band_idx}: {norm}");
        }
    }

    #[test]
    fn inverse_rejects_inconsistent_bands() {
        let bank = FilterBank::daubechies8();
        let img = random_image(32, 4);
        let mut pyr = dwt2_forward(img.view(), 2, &bank, Boundary::Periodic).unwrap();
        pyr.bands[1] = Subband::real(1, Orientation::Degrees(90), Array2::zeros((8, 8)));
        assert!(matches!(dwt2_inverse(&pyr, &bank), Err(Error::Structure(_))));
        pyr.bands.pop();
        assert!(matches!(dwt2_inverse(&pyr, &bank), Err(Error::Structure(_))));
    }

    #[test]
    fn symmetric_operator_is_well_conditioned() {
        let bank = FilterBank::daubechies8();
        for n in [4usize, 16, 64, 256] {
            let sv = symmetric_operator(&bank, n).singular_values();
            assert!(sv.max() / sv.min() < 2.0, "n={n}");
        }
    }

    #[test]
    fn depth_error() {
        let img = Array2::zeros((96, 96));
        let err = dwt2_forward(img.view(), 6, &FilterBank::daubechies8(), Boundary::Symmetric).unwrap_err();
        assert!(matches!(err, Error::Depth { .. }));
    }

    #[test]
    fn slicing_matches_full_transform_level() {
        // A second level equals a one-level transform of the first approximation.
        let bank = FilterBank::daubechies8();
        let img = random_image(32, 9);
        let two = dwt2_forward(img.view(), 2, &bank, Boundary::Symmetric).unwrap();
        let one = dwt2_forward(img.view(), 1, &bank, Boundary::Symmetric).unwrap();
        let again = dwt2_forward(approximation(&one).unwrap().as_real().unwrap(), 1, &bank, Boundary::Symmetric).unwrap();
        assert_eq!(two.bands[3], Subband { level: 2, ..again.bands[0].clone() });
        assert_eq!(
            approximation(&two).unwrap().as_real().unwrap(),
            approximation(&again).unwrap().as_real().unwrap()
        );
    }
}
