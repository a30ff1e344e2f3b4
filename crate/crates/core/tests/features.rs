use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavesig::{
    canberra, extract_dwt_features, extract_rcwf_dtcwt_features, feature_length, DualTreeFilterSet, FeatureExtractor,
    FeatureMethod, FilterBank, GrayImage, Method, Orientation,
};

fn noise(seed: u64, side: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_array(Array2::from_shape_fn((side, side), |_| rng.random::<f64>())).unwrap()
}

fn grating(side: usize, degrees: f64, period: f64) -> Array2<f64> {
    let k = 2.0 * std::f64::consts::PI / period;
    let (s, c) = degrees.to_radians().sin_cos();
    Array2::from_shape_fn((side, side), |(r, col)| 0.5 + 0.5 * (k * (col as f64 * c - r as f64 * s)).cos())
}

#[test]
fn lengths_follow_band_counts_at_every_depth() {
    let img = noise(1, 256);
    let fs = DualTreeFilterSet::kingsbury();
    for levels in 1..=6 {
        let dwt = extract_dwt_features(&img, levels, &FilterBank::daubechies8()).unwrap();
        assert_eq!(dwt.len(), 2 * (3 * levels + 1));
        assert_eq!(dwt.len(), feature_length(FeatureMethod::Dwt, levels));
        let rc = extract_rcwf_dtcwt_features(&img, levels, &fs).unwrap();
        assert_eq!(rc.len(), 2 * 12 * levels);
        assert_eq!(rc.len(), feature_length(FeatureMethod::RcwfDtcwt, levels));
        assert!(dwt.values.iter().chain(&rc.values).all(|v| v.is_finite() && *v >= 0.0));
    }
    assert_eq!(feature_length(FeatureMethod::Dwt, 6), 38);
    assert_eq!(feature_length(FeatureMethod::RcwfDtcwt, 6), 144);
}

#[test]
fn constant_image_has_only_an_approximation_response() {
    let c = 0.3;
    let img = GrayImage::filled(256, 256, c).unwrap();
    let fv = extract_dwt_features(&img, 6, &FilterBank::daubechies8()).unwrap();
    let n = fv.band_index.len();
    assert_eq!(n, 19);
    for k in 0..18 {
        assert!(fv.sigmas()[k].abs() < 1e-12 && fv.energies()[k].abs() < 1e-12, "band {k}");
    }
    assert_eq!(fv.band_index[18].orientation, Orientation::Lowpass);
    assert!(fv.sigmas()[18] < 1e-12);
    assert!((fv.energies()[18] - c * 64.0).abs() < 1e-9);
}

#[test]
fn constant_image_has_no_directional_response() {
    let img = GrayImage::filled(256, 256, 0.8).unwrap();
    let fv = extract_rcwf_dtcwt_features(&img, 6, &DualTreeFilterSet::kingsbury()).unwrap();
    assert_eq!(fv.len(), 144);
    assert!(fv.values.iter().all(|v| v.abs() < 1e-6));
}

#[test]
fn quarter_turn_swaps_diagonal_bands() {
    let img = grating(256, 45.0, 5.0);
    // Rotating the picture by 90 degrees turns a 45 degree wave into a -45 degree one.
    let rotated = Array2::from_shape_fn((256, 256), |(r, c)| img[[c, 255 - r]]);
    let ex = FeatureExtractor::new(FeatureMethod::RcwfDtcwt, 3);
    let a = ex.extract(&GrayImage::from_array(img).unwrap()).unwrap();
    let b = ex.extract(&GrayImage::from_array(rotated).unwrap()).unwrap();
    let plus = a.energy_of(Method::Dtcwt, 2, Orientation::Degrees(45)).unwrap();
    let minus = b.energy_of(Method::Dtcwt, 2, Orientation::Degrees(-45)).unwrap();
    assert!((plus - minus).abs() < 0.05 * plus, "{plus} vs {minus}");
    assert!(plus > 2.0 * a.energy_of(Method::Dtcwt, 2, Orientation::Degrees(-45)).unwrap());
}

#[test]
fn one_pixel_translation_moves_features() {
    let base = noise(5, 256);
    let shifted = Array2::from_shape_fn((256, 256), |(r, c)| base.view()[[r, (c + 255) % 256]]);
    let shifted = GrayImage::from_array(shifted).unwrap();
    for method in FeatureMethod::ALL {
        let ex = FeatureExtractor::new(method, 6);
        let d = canberra(&ex.extract(&base).unwrap().values, &ex.extract(&shifted).unwrap().values).unwrap();
        assert!(d > 0.0 && d.is_finite(), "{method}: {d}");
    }
}

#[test]
fn extraction_is_bit_reproducible() {
    let img = noise(8, 256);
    for method in FeatureMethod::ALL {
        let a = FeatureExtractor::new(method, 6).extract(&img).unwrap();
        let b = FeatureExtractor::new(method, 6).extract(&img.clone()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.values), bits(&b.values));
        assert_eq!(a.band_index, b.band_index);
    }
}

#[test]
fn band_order_is_levels_then_fixed_orientations() {
    let fv = extract_rcwf_dtcwt_features(&noise(2, 64), 2, &DualTreeFilterSet::kingsbury()).unwrap();
    let labels: Vec<(Method, usize, Orientation)> =
        fv.band_index.iter().map(|b| (b.transform, b.level, b.orientation)).collect();
    assert_eq!(labels.len(), 24);
    assert!(labels[..12].iter().all(|l| l.0 == Method::Dtcwt));
    assert!(labels[12..].iter().all(|l| l.0 == Method::Rcwf));
    assert!(labels[..12].windows(2).all(|w| w[0].1 <= w[1].1));
    assert_eq!(labels[0].2, Orientation::Degrees(15));
    assert_eq!(labels[12], (Method::Rcwf, 1, Orientation::Degrees(-30)));
}
