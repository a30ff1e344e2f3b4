//! Reproducible synthetic signature corpus.
//!
//! Every identity owns a template of smooth cubic Bezier strokes. Each sample
//! perturbs the template's control points and applies a small rotation and
//! scale before rendering dark anti-aliased ink on a white 256x256 page.
//!
//! Seeds: identity `i` draws from `mix(seed, i)` and its sample `j` from
//! `mix(mix(seed, i), j + 1)`, where `mix` is a SplitMix64 finaliser over the
//! xor-combined words. Identities are independent, so generation can run in
//! parallel without changing a single output bit.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::LabeledImage;
use crate::error::{Error, Result};
use crate::image::{GrayImage, CANONICAL_SIDE};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub persons: usize,
    pub samples_per_person: usize,
    pub seed: u64,
    /// Maximum control-point displacement per sample, in pixels.
    pub jitter: f64,
    /// Inclusive range of strokes per identity.
    pub strokes_per_identity: (usize, usize),
    /// Per-sample rotation (up to 2 degrees) and scale (0.95 to 1.05).
    pub wobble: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            persons: 20,
            samples_per_person: 16,
            seed: 7,
            jitter: 18.0,
            strokes_per_identity: (4, 7),
            wobble: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.persons < 2 {
            return Err(Error::Config(format!("persons must be at least 2, got {}", self.persons)));
        }
        if self.samples_per_person < 2 {
            return Err(Error::Config(format!(
                "samples per person must be at least 2, got {}",
                self.samples_per_person
            )));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::Config(format!("jitter must be finite and non-negative, got {}", self.jitter)));
        }
        let (lo, hi) = self.strokes_per_identity;
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!("bad stroke range {lo}..={hi}")));
        }
        Ok(())
    }
}

pub fn person_id(index: usize) -> String {
    format!("p{index:02}")
}

pub fn sample_id(index: usize) -> String {
    format!("s{index:02}")
}

pub(crate) fn mix(a: u64, b: u64) -> u64 {
    let mut z = (a ^ b.rotate_left(32)).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

type Point = (f64, f64);

/// A chain of cubic segments sharing endpoints: `1 + 3k` control points.
#[derive(Debug, Clone)]
struct Stroke {
    points: Vec<Point>,
    width: f64,
}

#[derive(Debug, Clone)]
struct Template {
    strokes: Vec<Stroke>,
}

fn template(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Template {
    let (lo, hi) = cfg.strokes_per_identity;
    let count = rng.random_range(lo..=hi);
    let width = rng.random_range(3.0..4.2);
    let slant: f64 = rng.random_range(-0.5..0.5);
    // Strokes are laid out left to right like handwriting on a baseline.
    let left = rng.random_range(28.0..60.0);
    let right = rng.random_range(196.0..228.0);
    let span = (right - left) / count as f64;
    let strokes = (0..count)
        .map(|k| {
            let segments = rng.random_range(2..=4);
            let x0 = left + span * k as f64;
            let mut points = Vec::with_capacity(1 + 3 * segments);
            let mut x: f64 = x0 + rng.random_range(0.0..span * 0.3);
            let mut y: f64 = 128.0 + rng.random_range(-30.0..30.0);
            points.push((x, y));
            for _ in 0..segments {
                for _ in 0..3 {
                    x = (x + rng.random_range(-8.0..span * 0.4)).clamp(16.0, 240.0);
                    y = (y + rng.random_range(-45.0..45.0)).clamp(70.0, 186.0);
                    points.push((x + slant * (128.0 - y), y));
                }
            }
            Stroke { points, width }
        })
        .collect();
    Template { strokes }
}

fn perturb(t: &Template, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Template {
    let (angle, scale) = if cfg.wobble {
        (rng.random_range(-2.0f64..=2.0).to_radians(), rng.random_range(0.95..=1.05))
    } else {
        (0.0, 1.0)
    };
    let (sin, cos) = angle.sin_cos();
    let c = CANONICAL_SIDE as f64 / 2.0;
    let j = cfg.jitter;
    let strokes = t
        .strokes
        .iter()
        .map(|s| Stroke {
            width: s.width,
            points: s
                .points
                .iter()
                .map(|&(x, y)| {
                    let (dx, dy) = if j > 0.0 {
                        (rng.random_range(-j..=j), rng.random_range(-j..=j))
                    } else {
                        (0.0, 0.0)
                    };
                    let (u, v) = (x + dx - c, y + dy - c);
                    (c + scale * (cos * u - sin * v), c + scale * (sin * u + cos * v))
                })
                .collect(),
        })
        .collect();
    Template { strokes }
}

fn bezier(p: [Point; 4], t: f64) -> Point {
    let s = 1.0 - t;
    let (a, b, c, d) = (s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t);
    (
        a * p[0].0 + b * p[1].0 + c * p[2].0 + d * p[3].0,
        a * p[0].1 + b * p[1].1 + c * p[2].1 + d * p[3].1,
    )
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * vx - p.0, a.1 + t * vy - p.1);
    (qx * qx + qy * qy).sqrt()
}

/// Render ink coverage in `[0, 1]` with a one-pixel linear edge ramp.
fn render(t: &Template) -> Array2<f64> {
    let n = CANONICAL_SIDE;
    let mut ink = Array2::<f64>::zeros((n, n));
    const STEPS: usize = 24;
    for stroke in &t.strokes {
        let half = stroke.width / 2.0;
        for seg in stroke.points.windows(4).step_by(3) {
            let ctrl = [seg[0], seg[1], seg[2], seg[3]];
            let mut prev = bezier(ctrl, 0.0);
            for k in 1..=STEPS {
                let cur = bezier(ctrl, k as f64 / STEPS as f64);
                let pad = half + 1.0;
                let r0 = (prev.1.min(cur.1) - pad).floor().max(0.0) as usize;
                let r1 = ((prev.1.max(cur.1) + pad).ceil().max(0.0) as usize).min(n - 1);
                let c0 = (prev.0.min(cur.0) - pad).floor().max(0.0) as usize;
                let c1 = ((prev.0.max(cur.0) + pad).ceil().max(0.0) as usize).min(n - 1);
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        let d = segment_distance((c as f64 + 0.5, r as f64 + 0.5), prev, cur);
                        let cover = (half + 0.5 - d).clamp(0.0, 1.0);
                        if cover > ink[[r, c]] {
                            ink[[r, c]] = cover;
                        }
                    }
                }
                prev = cur;
            }
        }
    }
    ink
}

fn render_page(t: &Template) -> GrayImage {
    GrayImage::from_array(render(t).mapv(|v| 1.0 - v)).expect("coverage lies in [0, 1]")
}

/// Generate the whole corpus, ordered by person then sample.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<LabeledImage>> {
    cfg.validate()?;
    let per_person: Vec<Vec<LabeledImage>> = (0..cfg.persons)
        .into_par_iter()
        .map(|p| {
            let person_seed = mix(cfg.seed, p as u64);
            let base = template(cfg, &mut ChaCha8Rng::seed_from_u64(person_seed));
            (0..cfg.samples_per_person)
                .map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(mix(person_seed, s as u64 + 1));
                    LabeledImage {
                        person_id: person_id(p),
                        sample_id: sample_id(s),
                        image: render_page(&perturb(&base, cfg, &mut rng)),
                    }
                })
                .collect()
        })
        .collect();
    Ok(per_person.into_iter().flatten().collect())
}

/// Fraction of pixels darker than mid-grey.
pub fn ink_coverage(img: &GrayImage) -> f64 {
    img.pixels().iter().filter(|&&p| p < 0.5).count() as f64 / img.pixels().len() as f64
}
