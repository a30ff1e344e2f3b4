//! Per-subband statistics and method-specific feature vectors.
//!
//! A vector holds the standard deviation of every band followed by the
//! energy (mean absolute coefficient) of every band, in the same band order.

use std::fmt;
use std::str::FromStr;

use crate::dtcwt::dtcwt2_forward_with;
use crate::dwt::{dwt2_forward, DwtConfig};
use crate::error::{Error, Result};
use crate::filters::{DualTreeFilterSet, FilterBank};
use crate::image::GrayImage;
use crate::pyramid::{BandValues, Method, Orientation, Pyramid, Subband};
use crate::rcwf::{build_rcwf_kernels, rcwf_forward_with, ConvolutionStrategy, Kernel2D};
use crate::signal::Boundary;

/// Default decomposition depth.
pub const DEFAULT_LEVELS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureMethod {
    /// Separable DWT bands including the final approximation.
    Dwt,
    /// DT-CWT bands followed by rotated complex wavelet filter bands.
    RcwfDtcwt,
}

impl FeatureMethod {
    pub const ALL: [FeatureMethod; 2] = [FeatureMethod::Dwt, FeatureMethod::RcwfDtcwt];

    /// Number of subbands contributing statistics at `levels`.
    pub fn band_count(self, levels: usize) -> usize {
        match self {
            FeatureMethod::Dwt => 3 * levels + 1,
            FeatureMethod::RcwfDtcwt => 12 * levels,
        }
    }
}

impl fmt::Display for FeatureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMethod::Dwt => "dwt",
            FeatureMethod::RcwfDtcwt => "rcwf",
        })
    }
}

impl FromStr for FeatureMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dwt" => Ok(FeatureMethod::Dwt),
            "rcwf" => Ok(FeatureMethod::RcwfDtcwt),
            other => Err(Error::Config(format!("unknown method {other:?}, expected dwt or rcwf"))),
        }
    }
}

/// Length of a feature vector for `method` at `levels`.
pub fn feature_length(method: FeatureMethod, levels: usize) -> usize {
    2 * method.band_count(levels)
}

/// Identifies the band behind a pair of vector entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BandLabel {
    pub transform: Method,
    pub level: usize,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub method: FeatureMethod,
    pub levels: usize,
    /// `[sigma_1 .. sigma_n, E_1 .. E_n]`.
    pub values: Vec<f64>,
    pub band_index: Vec<BandLabel>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.values[..self.band_index.len()]
    }

    pub fn energies(&self) -> &[f64] {
        &self.values[self.band_index.len()..]
    }

    /// Energy entry for a band, if present.
    pub fn energy_of(&self, transform: Method, level: usize, orientation: Orientation) -> Option<f64> {
        let label = BandLabel {
            transform,
            level,
            orientation,
        };
        self.band_index.iter().position(|b| *b == label).map(|i| self.energies()[i])
    }
}

fn non_empty(band: &Subband) -> Result<()> {
    if band.is_empty() {
        Err(Error::Structure(format!("empty band at level {} {}", band.level, band.orientation)))
    } else {
        Ok(())
    }
}

/// Mean absolute coefficient (modulus for complex bands).
pub fn band_energy(band: &Subband) -> Result<f64> {
    non_empty(band)?;
    let n = band.len() as f64;
    Ok(match &band.values {
        BandValues::Real(v) => v.iter().map(|x| x.abs()).sum::<f64>() / n,
        BandValues::Complex(v) => v.iter().map(|z| z.norm()).sum::<f64>() / n,
    })
}

/// Population standard deviation of the coefficients (of the moduli for
/// complex bands).
pub fn band_std(band: &Subband) -> Result<f64> {
    non_empty(band)?;
    Ok(match &band.values {
        BandValues::Real(v) => population_std(v.iter().copied()),
        BandValues::Complex(v) => population_std(v.iter().map(|z| z.norm())),
    })
}

fn population_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    // Deviations are taken from the first value so constant input is exact.
    let Some(shift) = values.clone().next() else {
        return 0.0;
    };
    let (sum, n) = values.clone().fold((0.0, 0usize), |(s, n), x| (s + (x - shift), n + 1));
    let mean = sum / n as f64;
    let var = values.map(|x| (x - shift - mean).powi(2)).sum::<f64>() / n as f64;
    var.sqrt()
}

fn assemble(method: FeatureMethod, levels: usize, pyramids: &[&Pyramid]) -> Result<FeatureVector> {
    let bands: Vec<(Method, &Subband)> = pyramids
        .iter()
        .flat_map(|p| {
            let mut bands: Vec<&Subband> = p.bands.iter().collect();
            // Stable sort keeps the per-level orientation order.
            bands.sort_by_key(|b| b.level);
            bands.into_iter().map(move |b| (p.method, b))
        })
        .collect();
    let mut sigmas = Vec::with_capacity(bands.len());
    let mut energies = Vec::with_capacity(bands.len());
    let mut band_index = Vec::with_capacity(bands.len());
    for (transform, band) in bands {
        sigmas.push(band_std(band)?);
        energies.push(band_energy(band)?);
        band_index.push(BandLabel {
            transform,
            level: band.level,
            orientation: band.orientation,
        });
    }
    sigmas.extend(energies);
    let fv = FeatureVector {
        method,
        levels,
        values: sigmas,
        band_index,
    };
    if fv.len() != feature_length(method, levels) {
        return Err(Error::Structure(format!(
            "{method} vector has {} entries, expected {}",
            fv.len(),
            feature_length(method, levels)
        )));
    }
    Ok(fv)
}

pub fn extract_dwt_features(img: &GrayImage, levels: usize, bank: &FilterBank) -> Result<FeatureVector> {
    FeatureExtractor {
        dwt: DwtConfig {
            bank: bank.clone(),
            ..DwtConfig::default()
        },
        ..FeatureExtractor::new(FeatureMethod::Dwt, levels)
    }
    .extract(img)
}

pub fn extract_rcwf_dtcwt_features(img: &GrayImage, levels: usize, fs: &DualTreeFilterSet) -> Result<FeatureVector> {
    FeatureExtractor::with_filters(FeatureMethod::RcwfDtcwt, levels, fs.clone()).extract(img)
}

/// Reusable extractor holding the filter configuration and the rotated
/// kernels, which are built once.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    pub method: FeatureMethod,
    pub levels: usize,
    pub dwt: DwtConfig,
    pub filters: DualTreeFilterSet,
    pub kernels: Vec<Kernel2D>,
    pub strategy: ConvolutionStrategy,
    pub boundary: Boundary,
}

impl FeatureExtractor {
    pub fn new(method: FeatureMethod, levels: usize) -> Self {
        Self::with_filters(method, levels, DualTreeFilterSet::kingsbury())
    }

    pub fn with_filters(method: FeatureMethod, levels: usize, filters: DualTreeFilterSet) -> Self {
        let kernels = match method {
            FeatureMethod::Dwt => Vec::new(),
            FeatureMethod::RcwfDtcwt => build_rcwf_kernels(&filters),
        };
        Self {
            method,
            levels,
            dwt: DwtConfig::default(),
            filters,
            kernels,
            strategy: ConvolutionStrategy::default(),
            boundary: Boundary::Symmetric,
        }
    }

    pub fn feature_length(&self) -> usize {
        feature_length(self.method, self.levels)
    }

    pub fn extract(&self, img: &GrayImage) -> Result<FeatureVector> {
        let view = img.view();
        match self.method {
            FeatureMethod::Dwt => {
                let pyr = dwt2_forward(view, self.levels, &self.dwt.bank, self.dwt.boundary)?;
                assemble(self.method, self.levels, &[&pyr])
            }
            FeatureMethod::RcwfDtcwt => {
                let dt = dtcwt2_forward_with(view, self.levels, &self.filters, self.boundary)?;
                let rc = rcwf_forward_with(view, self.levels, &self.kernels, &self.filters, self.strategy, self.boundary)?;
                assemble(self.method, self.levels, &[&dt, &rc])
            }
        }
    }
}
