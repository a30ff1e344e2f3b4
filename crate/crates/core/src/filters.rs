//! One-dimensional wavelet filters, two-channel filter banks and the
//! dual-tree filter set.
//!
//! Filters carry a sampling `phase`. For an analysis filter `h`, decimated
//! output `i` is `sum_t h[t] * x[2i + phase - t]`. For a synthesis filter
//! `g`, coefficient `i` contributes `y[i] * g[t]` to output sample
//! `2i - phase + t`. A matched analysis/synthesis pair reconstructs perfectly
//! when `phase_g = (len_h + len_g) / 2 - 1 - phase_h`.
//!
//! Coefficient tables ship with the crate in a small text format:
//!
//! ```text
//! wsig-filters 1
//! # comment
//! filter <family> <kind> <phase>
//! <one coefficient per line>
//! ```
//!
//! `kind` is one of `analysis-lowpass`, `analysis-highpass`,
//! `synthesis-lowpass`, `synthesis-highpass`. A file may hold any number of
//! `filter` blocks.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

const DB8_TABLE: &str = include_str!("../filters/db8.txt");
const NEAR_SYM_B_TABLE: &str = include_str!("../filters/near_sym_b.txt");
const QSHIFT_B_TABLE: &str = include_str!("../filters/qshift_b.txt");

const TABLE_MAGIC: &str = "wsig-filters";
const TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    AnalysisLowpass,
    AnalysisHighpass,
    SynthesisLowpass,
    SynthesisHighpass,
}

impl FilterKind {
    pub fn is_lowpass(self) -> bool {
        matches!(self, Self::AnalysisLowpass | Self::SynthesisLowpass)
    }

    pub fn is_analysis(self) -> bool {
        matches!(self, Self::AnalysisLowpass | Self::AnalysisHighpass)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AnalysisLowpass => "analysis-lowpass",
            Self::AnalysisHighpass => "analysis-highpass",
            Self::SynthesisLowpass => "synthesis-lowpass",
            Self::SynthesisHighpass => "synthesis-highpass",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "analysis-lowpass" => Self::AnalysisLowpass,
            "analysis-highpass" => Self::AnalysisHighpass,
            "synthesis-lowpass" => Self::SynthesisLowpass,
            "synthesis-highpass" => Self::SynthesisHighpass,
            other => return Err(Error::Filter(format!("unknown filter kind {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filter1D {
    taps: Vec<f64>,
    kind: FilterKind,
    phase: isize,
}

impl Filter1D {
    pub fn new(taps: Vec<f64>, kind: FilterKind, phase: isize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Filter("filter has no taps".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Filter("non-finite tap".into()));
        }
        Ok(Self { taps, kind, phase })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn phase(&self) -> isize {
        self.phase
    }

    pub fn tap_sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn with_phase(&self, phase: isize) -> Self {
        Self {
            phase,
            ..self.clone()
        }
    }

    /// Frequency response `sum_t h[t] e^{-j w t}`.
    pub fn response(&self, omega: f64) -> Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(t, &h)| Complex64::from_polar(h, -omega * t as f64))
            .sum()
    }

    /// Group delay in samples at `omega`, measured from tap 0.
    pub fn group_delay(&self, omega: f64) -> f64 {
        let weighted: Complex64 = self
            .taps
            .iter()
            .enumerate()
            .map(|(t, &h)| Complex64::from_polar(h * t as f64, -omega * t as f64))
            .sum();
        (weighted / self.response(omega)).re
    }
}

/// Two-channel analysis/synthesis filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    family: String,
    lo: Filter1D,
    hi: Filter1D,
    lo_s: Filter1D,
    hi_s: Filter1D,
}

impl FilterBank {
    pub fn new(
        family: impl Into<String>,
        lo: Filter1D,
        hi: Filter1D,
        lo_s: Filter1D,
        hi_s: Filter1D,
    ) -> Result<Self> {
        let expect = [
            (&lo, FilterKind::AnalysisLowpass),
            (&hi, FilterKind::AnalysisHighpass),
            (&lo_s, FilterKind::SynthesisLowpass),
            (&hi_s, FilterKind::SynthesisHighpass),
        ];
        for (f, kind) in expect {
            if f.kind != kind {
                return Err(Error::Filter(format!("expected {kind}, got {}", f.kind)));
            }
        }
        Ok(Self {
            family: family.into(),
            lo,
            hi,
            lo_s,
            hi_s,
        })
    }

    /// Orthonormal Daubechies pair with 8 vanishing moments (16 taps); the DWT default.
    pub fn daubechies8() -> Self {
        builtin_bank(DB8_TABLE, "db8")
    }

    /// Near-symmetric 13/19-tap biorthogonal pair for the first dual-tree level.
    pub fn near_sym_b() -> Self {
        builtin_bank(NEAR_SYM_B_TABLE, "near_sym_b")
    }

    /// 14-tap quarter-shift pair for levels >= 2, tree a.
    pub fn qshift_b_tree_a() -> Self {
        builtin_bank(QSHIFT_B_TABLE, "qshift_b.a")
    }

    /// 14-tap quarter-shift pair for levels >= 2, tree b (time reverse of tree a).
    pub fn qshift_b_tree_b() -> Self {
        builtin_bank(QSHIFT_B_TABLE, "qshift_b.b")
    }

    /// Look up the four filters of `family` in a filter table.
    pub fn from_table(text: &str, family: &str) -> Result<Self> {
        let entries = parse_filter_table(text)?;
        let find = |kind: FilterKind| {
            entries
                .iter()
                .find(|e| e.family == family && e.filter.kind == kind)
                .map(|e| e.filter.clone())
                .ok_or_else(|| Error::Filter(format!("table has no {kind} filter for {family}")))
        };
        Self::new(
            family,
            find(FilterKind::AnalysisLowpass)?,
            find(FilterKind::AnalysisHighpass)?,
            find(FilterKind::SynthesisLowpass)?,
            find(FilterKind::SynthesisHighpass)?,
        )
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn lo(&self) -> &Filter1D {
        &self.lo
    }

    pub fn hi(&self) -> &Filter1D {
        &self.hi
    }

    pub fn lo_s(&self) -> &Filter1D {
        &self.lo_s
    }

    pub fn hi_s(&self) -> &Filter1D {
        &self.hi_s
    }

    /// Shift the analysis sampling phases by `lo_shift`/`hi_shift` and move the
    /// synthesis phases the opposite way so the bank stays perfectly reconstructing.
    pub fn shifted(&self, family: impl Into<String>, lo_shift: isize, hi_shift: isize) -> Self {
        Self {
            family: family.into(),
            lo: self.lo.with_phase(self.lo.phase + lo_shift),
            hi: self.hi.with_phase(self.hi.phase + hi_shift),
            lo_s: self.lo_s.with_phase(self.lo_s.phase - lo_shift),
            hi_s: self.hi_s.with_phase(self.hi_s.phase - hi_shift),
        }
    }
}

fn builtin_bank(table: &str, family: &str) -> FilterBank {
    FilterBank::from_table(table, family).expect("embedded filter table is valid")
}

/// One `filter` block of a coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub family: String,
    pub filter: Filter1D,
}

pub fn parse_filter_table(text: &str) -> Result<Vec<TableEntry>> {
    let err = |line: usize, detail: String| Error::FilterTable { line, detail };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, l)) if l == format!("{TABLE_MAGIC} {TABLE_VERSION}") => {}
        Some((n, l)) => return Err(err(n, format!("expected '{TABLE_MAGIC} {TABLE_VERSION}', found {l:?}"))),
        None => return Err(err(0, "empty table".into())),
    }

    let mut out = Vec::new();
    let mut current: Option<(usize, String, FilterKind, isize, Vec<f64>)> = None;
    let finish = |cur: Option<(usize, String, FilterKind, isize, Vec<f64>)>,
                  out: &mut Vec<TableEntry>|
     -> Result<()> {
        if let Some((line, family, kind, phase, taps)) = cur {
            let filter = Filter1D::new(taps, kind, phase).map_err(|e| err(line, e.to_string()))?;
            out.push(TableEntry { family, filter });
        }
        Ok(())
    };

    for (n, line) in lines {
        if let Some(rest) = line.strip_prefix("filter ") {
            finish(current.take(), &mut out)?;
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [family, kind, phase] = parts[..] else {
                return Err(err(n, "expected 'filter <family> <kind> <phase>'".into()));
            };
            let kind = kind.parse().map_err(|e: Error| err(n, e.to_string()))?;
            let phase = phase
                .parse()
                .map_err(|_| err(n, format!("bad phase {phase:?}")))?;
            current = Some((n, family.to_string(), kind, phase, Vec::new()));
        } else {
            let Some(cur) = current.as_mut() else {
                return Err(err(n, "coefficient before any 'filter' header".into()));
            };
            let v: f64 = line
                .parse()
                .map_err(|_| err(n, format!("bad coefficient {line:?}")))?;
            cur.4.push(v);
        }
    }
    finish(current, &mut out)?;
    Ok(out)
}

/// Which of the two parallel wavelet trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tree {
    A,
    B,
}

/// Filters for the two real trees of the dual-tree transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTreeFilterSet {
    pub tree_a_level1: FilterBank,
    pub tree_b_level1: FilterBank,
    pub tree_a_qshift: FilterBank,
    pub tree_b_qshift: FilterBank,
}

impl DualTreeFilterSet {
    /// Near-symmetric level-1 filters with Q-shift filters below.
    ///
    /// Tree b at level 1 samples the lowpass one input sample earlier and
    /// the highpass one sample later than tree a. Combined with the Q-shift
    /// pairs this makes tree b's wavelets approximate Hilbert transforms of
    /// tree a's from level 2 down.
    pub fn kingsbury() -> Self {
        let near = FilterBank::near_sym_b();
        Self {
            tree_b_level1: near.shifted("near_sym_b.b", -1, 1),
            tree_a_level1: near,
            tree_a_qshift: FilterBank::qshift_b_tree_a(),
            tree_b_qshift: FilterBank::qshift_b_tree_b(),
        }
    }

    /// Bank used by `tree` at decomposition `level` (1-based).
    pub fn bank(&self, tree: Tree, level: usize) -> &FilterBank {
        match (tree, level <= 1) {
            (Tree::A, true) => &self.tree_a_level1,
            (Tree::B, true) => &self.tree_b_level1,
            (Tree::A, false) => &self.tree_a_qshift,
            (Tree::B, false) => &self.tree_b_qshift,
        }
    }
}

impl Default for DualTreeFilterSet {
    fn default() -> Self {
        Self::kingsbury()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn all_banks() -> Vec<FilterBank> {
        let fs = DualTreeFilterSet::kingsbury();
        vec![
            FilterBank::daubechies8(),
            fs.tree_a_level1,
            fs.tree_b_level1,
            fs.tree_a_qshift,
            fs.tree_b_qshift,
        ]
    }

    #[test]
    fn lowpass_sums_to_sqrt2() {
        for bank in all_banks() {
            for f in [bank.lo(), bank.lo_s()] {
                assert!((f.tap_sum() - SQRT_2).abs() < 1e-8, "{}: {}", bank.family(), f.tap_sum());
            }
            for f in [bank.hi(), bank.hi_s()] {
                assert!(f.tap_sum().abs() < 1e-8, "{}: {}", bank.family(), f.tap_sum());
            }
        }
    }

    #[test]
    fn table_lengths() {
        let fs = DualTreeFilterSet::kingsbury();
        assert_eq!(fs.tree_a_level1.lo().len(), 13);
        assert_eq!(fs.tree_a_level1.hi().len(), 19);
        assert_eq!(fs.tree_a_qshift.lo().len(), 14);
        assert_eq!(FilterBank::daubechies8().lo().len(), 16);
    }

    #[test]
    fn matched_synthesis_phases() {
        for bank in all_banks() {
            for (h, g) in [(bank.lo(), bank.lo_s()), (bank.hi(), bank.hi_s())] {
                let expect = (h.len() + g.len()) as isize / 2 - 1 - h.phase();
                assert_eq!(g.phase(), expect, "{}", bank.family());
            }
        }
    }

    #[test]
    fn qshift_trees_are_half_sample_apart() {
        let fs = DualTreeFilterSet::kingsbury();
        let (a, b) = (fs.tree_a_qshift.lo(), fs.tree_b_qshift.lo());
        // Pointwise at low frequencies.
        for k in 0..=10 {
            let w = 0.05 * PI * k as f64 / 10.0;
            let diff = b.group_delay(w) - a.group_delay(w);
            assert!((diff - 0.5).abs() < 0.05, "w={w}: {diff}");
        }
        // Averaged over the lowpass band.
        let n = 200;
        let mean = (0..=n)
            .map(|k| {
                let w = 0.5 * PI * k as f64 / n as f64;
                b.group_delay(w) - a.group_delay(w)
            })
            .sum::<f64>()
            / (n + 1) as f64;
        assert!((mean - 0.5).abs() < 0.05, "{mean}");
    }

    #[test]
    fn tree_b_is_reversed_tree_a() {
        let fs = DualTreeFilterSet::kingsbury();
        let a: Vec<f64> = fs.tree_a_qshift.lo().taps().iter().rev().copied().collect();
        assert_eq!(a, fs.tree_b_qshift.lo().taps());
    }

    #[test]
    fn table_round_trip_and_errors() {
        let text = "wsig-filters 1\n# c\nfilter x analysis-lowpass 1\n0.5\n0.5\n\nfilter x analysis-highpass 1\n0.5\n-0.5\n";
        let entries = parse_filter_table(text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[1].filter.taps(), &[0.5, -0.5]);
        assert_eq!(entries[0].family, "x");

        let bad = parse_filter_table("wsig-filters 1\nfilter x analysis-lowpass 0\nabc\n").unwrap_err();
        assert!(matches!(bad, Error::FilterTable { line: 3, .. }), "{bad}");
        assert!(parse_filter_table("filters 2\n").is_err());
        assert!(parse_filter_table("wsig-filters 1\n1.0\n").is_err());
        assert!(FilterBank::from_table(text, "x").is_err());
    }

    #[test]
    fn bank_kind_checked() {
        let f = |k| Filter1D::new(vec![1.0], k, 0).unwrap();
        assert!(FilterBank::new(
            "bad",
            f(FilterKind::AnalysisHighpass),
            f(FilterKind::AnalysisHighpass),
            f(FilterKind::SynthesisLowpass),
            f(FilterKind::SynthesisHighpass)
        )
        .is_err());
    }
}
