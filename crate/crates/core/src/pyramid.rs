//! Multi-level subband containers shared by all transforms.

use std::fmt;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::Boundary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Dwt,
    Dtcwt,
    Rcwf,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dwt => "dwt",
            Method::Dtcwt => "dtcwt",
            Method::Rcwf => "rcwf",
        })
    }
}

/// Orientation label of a subband, in degrees of the wave-vector direction
/// (counter-clockwise from +x, with y pointing up the image).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Degrees(i16),
    /// The DWT diagonal band, which mixes +45 and -45.
    Diagonal,
    Lowpass,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::Degrees(d) => write!(f, "{d}"),
            Orientation::Diagonal => f.write_str("+-45"),
            Orientation::Lowpass => f.write_str("lowpass"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BandValues {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

/// One oriented coefficient grid `W_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subband {
    pub level: usize,
    pub orientation: Orientation,
    pub values: BandValues,
}

impl Subband {
    pub fn real(level: usize, orientation: Orientation, values: Array2<f64>) -> Self {
        Self {
            level,
            orientation,
            values: BandValues::Real(values),
        }
    }

    pub fn complex(level: usize, orientation: Orientation, values: Array2<Complex64>) -> Self {
        Self {
            level,
            orientation,
            values: BandValues::Complex(values),
        }
    }

    pub fn dim(&self) -> (usize, usize) {
        match &self.values {
            BandValues::Real(v) => v.dim(),
            BandValues::Complex(v) => v.dim(),
        }
    }

    pub fn len(&self) -> usize {
        let (r, c) = self.dim();
        r * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.values, BandValues::Complex(_))
    }

    /// Real scalars stored by this band (two per complex coefficient).
    pub fn scalar_count(&self) -> usize {
        if self.is_complex() {
            2 * self.len()
        } else {
            self.len()
        }
    }

    pub fn as_real(&self) -> Option<ArrayView2<'_, f64>> {
        match &self.values {
            BandValues::Real(v) => Some(v.view()),
            BandValues::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<ArrayView2<'_, Complex64>> {
        match &self.values {
            BandValues::Complex(v) => Some(v.view()),
            BandValues::Real(_) => None,
        }
    }
}

/// Element-wise modulus of a band (absolute value for real bands).
pub fn subband_magnitude(band: &Subband) -> Array2<f64> {
    match &band.values {
        BandValues::Real(v) => v.mapv(f64::abs),
        BandValues::Complex(v) => v.mapv(|z| z.norm()),
    }
}

/// A complete decomposition.
///
/// For the DWT, `bands` holds `3L` detail bands followed by the final
/// approximation. For the complex transforms, `bands` holds only the `6L`
/// oriented bands and the lowpass images live in `lowpass`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub method: Method,
    pub levels: usize,
    pub boundary: Boundary,
    pub bands: Vec<Subband>,
    pub lowpass: Vec<Array2<f64>>,
}

impl Pyramid {
    pub fn level_bands(&self, level: usize) -> impl Iterator<Item = &Subband> {
        self.bands.iter().filter(move |b| b.level == level)
    }

    pub fn band(&self, level: usize, orientation: Orientation) -> Option<&Subband> {
        self.bands
            .iter()
            .find(|b| b.level == level && b.orientation == orientation)
    }

    /// Total real scalars held, oriented bands plus retained lowpass images.
    pub fn scalar_count(&self) -> usize {
        self.bands.iter().map(Subband::scalar_count).sum::<usize>()
            + self.lowpass.iter().map(|l| l.len()).sum::<usize>()
    }
}

/// Validate that a `rows x cols` image can be decomposed to `levels`.
pub fn check_depth(rows: usize, cols: usize, levels: usize) -> Result<()> {
    let fail = |reason: String| {
        Err(Error::Depth {
            rows,
            cols,
            levels,
            reason,
        })
    };
    if levels == 0 {
        return fail("at least one level is required".into());
    }
    if rows != cols {
        return fail("image must be square".into());
    }
    if levels >= usize::BITS as usize || (1usize << levels) > rows {
        return fail(format!("more levels than log2({rows})"));
    }
    if !rows.is_multiple_of(1 << levels) {
        return fail(format!("side {rows} is not divisible by 2^{levels}"));
    }
    Ok(())
}
