//! Off-line signature identification with wavelet subband features.
//!
//! Images are decomposed with a separable DWT, a dual-tree complex wavelet
//! transform and a set of 45-degree rotated complex wavelet filters. Each
//! subband contributes its standard deviation and mean absolute coefficient
//! to a feature vector, and queries are identified by the Canberra nearest
//! neighbour among enrolled vectors.

pub mod corpus;
pub mod dtcwt;
pub mod dwt;
pub mod error;
pub mod eval;
pub mod features;
pub mod filters;
pub mod image;
pub mod matcher;
pub mod pyramid;
pub mod rcwf;
pub mod signal;
pub mod synth;

pub use corpus::{read_corpus, write_corpus, CorpusLoad, LabeledImage};
pub use dtcwt::{dtcwt2_forward, dtcwt2_forward_with, DTCWT_ORIENTATIONS};
pub use dwt::{dwt2_forward, dwt2_inverse, DwtConfig};
pub use error::{Error, Result};
pub use eval::{evaluate, evaluate_with_databases, EvalConfig, EvalReport, MethodResult};
pub use features::{
    band_energy, band_std, extract_dwt_features, extract_rcwf_dtcwt_features, feature_length, FeatureExtractor,
    FeatureMethod, FeatureVector, DEFAULT_LEVELS,
};
pub use filters::{DualTreeFilterSet, Filter1D, FilterBank, FilterKind, Tree};
pub use image::{encode_pgm, load_pgm, preprocess, GrayImage, CANONICAL_SIDE};
pub use matcher::{canberra, identify, DbEntry, FeatureDb, MatchResult, Ranked};
pub use pyramid::{subband_magnitude, BandValues, Method, Orientation, Pyramid, Subband};
pub use rcwf::{build_rcwf_kernels, rcwf_forward, rcwf_forward_with, ConvolutionStrategy, Interpolation, Kernel2D, RCWF_ORIENTATIONS};
pub use signal::Boundary;
pub use synth::{generate, SynthConfig};
