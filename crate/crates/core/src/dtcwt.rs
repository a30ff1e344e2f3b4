//! 2D dual-tree complex wavelet transform.
//!
//! Four real separable trees run in parallel, one per pairing of the row
//! tree and the column tree. At every level their detail bands are combined
//! pairwise into six complex subbands oriented at +-15, +-45 and +-75 degrees.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::{Array2, ArrayView2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::filters::{DualTreeFilterSet, Tree};
use crate::pyramid::{check_depth, Method, Orientation, Pyramid, Subband};
use crate::signal::{analyze_2d, Boundary, Quad};

/// Band order within each DT-CWT level.
pub const DTCWT_ORIENTATIONS: [i16; 6] = [15, 45, 75, -15, -45, -75];

/// Tree pairings as (row tree, column tree).
const TREES: [(Tree, Tree); 4] = [(Tree::A, Tree::A), (Tree::A, Tree::B), (Tree::B, Tree::A), (Tree::B, Tree::B)];

pub fn dtcwt2_forward(img: ArrayView2<f64>, levels: usize) -> Result<Pyramid> {
    dtcwt2_forward_with(img, levels, &DualTreeFilterSet::kingsbury(), Boundary::Symmetric)
}

pub fn dtcwt2_forward_with(
    img: ArrayView2<f64>,
    levels: usize,
    filters: &DualTreeFilterSet,
    boundary: Boundary,
) -> Result<Pyramid> {
    let (rows, cols) = img.dim();
    check_depth(rows, cols, levels)?;

    // Each tree keeps its own lowpass chain; trees are independent.
    let per_tree: Vec<(Vec<Quad>, Array2<f64>)> = TREES
        .par_iter()
        .map(|&(row_tree, col_tree)| {
            let mut details = Vec::with_capacity(levels);
            let mut current = img.to_owned();
            for level in 1..=levels {
                let q = analyze_2d(
                    current.view(),
                    filters.bank(row_tree, level),
                    filters.bank(col_tree, level),
                    boundary,
                );
                current = q.ll.clone();
                details.push(q);
            }
            (details, current)
        })
        .collect();

    let mut bands = Vec::with_capacity(6 * levels);
    for level in 1..=levels {
        let [aa, ab, ba, bb] = [0, 1, 2, 3].map(|t| &per_tree[t].0[level - 1]);
        let (hl_p, hl_m) = combine(&aa.hl, &ab.hl, &ba.hl, &bb.hl);
        let (lh_p, lh_m) = combine(&aa.lh, &ab.lh, &ba.lh, &bb.lh);
        let (hh_p, hh_m) = combine(&aa.hh, &ab.hh, &ba.hh, &bb.hh);
        for (deg, values) in [(15, hl_p), (45, hh_m), (75, lh_p), (-15, hl_m), (-45, hh_p), (-75, lh_m)] {
            bands.push(Subband::complex(level, Orientation::Degrees(deg), values));
        }
    }
    debug_assert!(bands
        .chunks(6)
        .all(|c| c.iter().map(|b| b.orientation).eq(DTCWT_ORIENTATIONS.map(Orientation::Degrees))));

    Ok(Pyramid {
        method: Method::Dtcwt,
        levels,
        boundary,
        bands,
        lowpass: per_tree.into_iter().map(|(_, lp)| lp).collect(),
    })
}

/// Sum and difference of the four tree outputs for one detail type.
fn combine(
    aa: &Array2<f64>,
    ab: &Array2<f64>,
    ba: &Array2<f64>,
    bb: &Array2<f64>,
) -> (Array2<Complex64>, Array2<Complex64>) {
    let mut p = Array2::zeros(aa.raw_dim());
    let mut m = Array2::zeros(aa.raw_dim());
    Zip::from(&mut p)
        .and(&mut m)
        .and(aa)
        .and(ab)
        .and(ba)
        .and(bb)
        .for_each(|p, m, &aa, &ab, &ba, &bb| {
            *p = Complex64::new(aa - bb, ab + ba) * FRAC_1_SQRT_2;
            *m = Complex64::new(aa + bb, ab - ba) * FRAC_1_SQRT_2;
        });
    (p, m)
}
