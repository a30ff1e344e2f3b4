//! Train/test identification experiments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::LabeledImage;
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, FeatureMethod, FeatureVector, DEFAULT_LEVELS};
use crate::image::{preprocess, GrayImage};
use crate::matcher::{identify, FeatureDb};
use crate::synth::mix;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub methods: Vec<FeatureMethod>,
    pub train_per_person: usize,
    pub test_per_person: usize,
    pub levels: usize,
    pub seed: u64,
    /// Independent splits; counts are summed so the rate is their mean.
    pub repeats: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            methods: FeatureMethod::ALL.to_vec(),
            train_per_person: 12,
            test_per_person: 4,
            levels: DEFAULT_LEVELS,
            seed: 7,
            repeats: 1,
        }
    }
}

/// Sample positions (into a person's sorted sample list) for one split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// 64-bit FNV-1a, used to give each person an independent split stream.
fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Deterministic split of `n` samples of one person.
pub fn split_person(person_id: &str, n: usize, train: usize, test: usize, seed: u64, repeat: usize) -> Result<Split> {
    if train + test > n {
        return Err(Error::Corpus(format!(
            "person {person_id} has {n} samples, split needs {}",
            train + test
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(mix(seed, fnv1a(person_id)), repeat as u64));
    idx.shuffle(&mut rng);
    let mut train_idx = idx[..train].to_vec();
    let mut test_idx = idx[train..train + test].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(Split {
        train: train_idx,
        test: test_idx,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonResult {
    pub person_id: String,
    pub correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: FeatureMethod,
    pub correct: usize,
    pub total: usize,
    pub per_person: Vec<PersonResult>,
    pub repeat_rates: Vec<f64>,
}

impl MethodResult {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub persons: usize,
    pub results: Vec<MethodResult>,
}

impl EvalReport {
    pub fn result(&self, method: FeatureMethod) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }

    /// Line-oriented `key=value` records.
    pub fn to_key_values(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "seed={}", c.seed);
        let _ = writeln!(out, "levels={}", c.levels);
        let _ = writeln!(out, "train_per_person={}", c.train_per_person);
        let _ = writeln!(out, "test_per_person={}", c.test_per_person);
        let _ = writeln!(out, "repeats={}", c.repeats);
        let _ = writeln!(out, "persons={}", self.persons);
        for r in &self.results {
            let m = r.method;
            let _ = writeln!(out, "{m}.correct={}", r.correct);
            let _ = writeln!(out, "{m}.total={}", r.total);
            let _ = writeln!(out, "{m}.rate={}", r.rate());
            for (k, rate) in r.repeat_rates.iter().enumerate() {
                let _ = writeln!(out, "{m}.repeat.{k}.rate={rate}");
            }
            for p in &r.per_person {
                let _ = writeln!(out, "{m}.person.{}.correct={}", p.person_id, p.correct);
                let _ = writeln!(out, "{m}.person.{}.total={}", p.person_id, p.total);
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "identification rate ({} persons, {}/{} split, {} levels, seed {}, {} repeat{})\n",
            self.persons,
            c.train_per_person,
            c.test_per_person,
            c.levels,
            c.seed,
            c.repeats,
            if c.repeats == 1 { "" } else { "s" }
        );
        let _ = writeln!(out, "{:<8} {:>8} {:>8} {:>8}", "method", "correct", "total", "rate");
        for r in &self.results {
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>8} {:>7.2}%",
                r.method.to_string(),
                r.correct,
                r.total,
                100.0 * r.rate()
            );
        }
        out
    }
}

/// Preprocess every image, in input order.
pub fn preprocess_all(images: &[&GrayImage]) -> Result<Vec<GrayImage>> {
    images.par_iter().map(|img| preprocess(img)).collect()
}

/// Extract features for every image, in input order.
pub fn extract_all(extractor: &FeatureExtractor, images: &[GrayImage]) -> Result<Vec<FeatureVector>> {
    images.par_iter().map(|img| extractor.extract(img)).collect()
}

/// Group a sorted corpus into `(person_id, positions)` with positions in
/// ascending sample order.
fn group_by_person(corpus: &[LabeledImage]) -> Vec<(String, Vec<usize>)> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in corpus.iter().enumerate() {
        groups.entry(&s.person_id).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(p, mut idx)| {
            idx.sort_by(|&a, &b| corpus[a].sample_id.cmp(&corpus[b].sample_id));
            (p.to_owned(), idx)
        })
        .collect()
}

pub fn evaluate(corpus: &[LabeledImage], cfg: &EvalConfig) -> Result<EvalReport> {
    evaluate_with_databases(corpus, cfg).map(|(report, _)| report)
}

/// Like [`evaluate`], also returning the first split's training database
/// for each method, in `cfg.methods` order.
pub fn evaluate_with_databases(corpus: &[LabeledImage], cfg: &EvalConfig) -> Result<(EvalReport, Vec<FeatureDb>)> {
    if cfg.methods.is_empty() || cfg.repeats == 0 || cfg.train_per_person == 0 || cfg.test_per_person == 0 {
        return Err(Error::Config(
            "need at least one method, one repeat and non-empty train and test sets".into(),
        ));
    }
    let groups = group_by_person(corpus);
    if groups.len() < 2 {
        return Err(Error::Corpus(format!("need at least 2 persons, found {}", groups.len())));
    }
    let splits: Vec<Vec<Split>> = (0..cfg.repeats)
        .map(|r| {
            groups
                .iter()
                .map(|(p, idx)| split_person(p, idx.len(), cfg.train_per_person, cfg.test_per_person, cfg.seed, r))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let raw: Vec<&GrayImage> = corpus.iter().map(|s| &s.image).collect();
    let images = preprocess_all(&raw)?;

    let mut results = Vec::with_capacity(cfg.methods.len());
    let mut databases = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let extractor = FeatureExtractor::new(method, cfg.levels);
        let features = extract_all(&extractor, &images)?;
        let mut per_person: Vec<PersonResult> = groups
            .iter()
            .map(|(p, _)| PersonResult {
                person_id: p.clone(),
                correct: 0,
                total: 0,
            })
            .collect();
        let mut repeat_rates = Vec::with_capacity(cfg.repeats);
        for split in &splits {
            let mut db = FeatureDb::new(method, cfg.levels);
            for ((_, idx), s) in groups.iter().zip(split) {
                for &k in &s.train {
                    let item = &corpus[idx[k]];
                    db.enroll(&item.person_id, &item.sample_id, &features[idx[k]])?;
                }
            }
            let (mut correct, mut total) = (0, 0);
            for (((person, idx), s), tally) in groups.iter().zip(split).zip(per_person.iter_mut()) {
                if s.train.iter().any(|k| s.test.contains(k)) {
                    return Err(Error::Invariant(format!("train and test overlap for {person}")));
                }
                for &k in &s.test {
                    let hit = identify(&features[idx[k]], &db)?.best().person_id == *person;
                    tally.correct += hit as usize;
                    tally.total += 1;
                    correct += hit as usize;
                    total += 1;
                }
            }
            repeat_rates.push(correct as f64 / total as f64);
            if databases.len() == results.len() {
                databases.push(db);
            }
        }
        let correct = per_person.iter().map(|p| p.correct).sum();
        let total = per_person.iter().map(|p| p.total).sum();
        if total != groups.len() * cfg.test_per_person * cfg.repeats {
            return Err(Error::Invariant(format!("{total} tests recorded for {method}")));
        }
        results.push(MethodResult {
            method,
            correct,
            total,
            per_person,
            repeat_rates,
        });
    }
    let report = EvalReport {
        config: cfg.clone(),
        persons: groups.len(),
        results,
    };
    Ok((report, databases))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    #[test]
    fn splits_are_disjoint_and_deterministic() {
        for r in 0..5 {
            let s = split_person("p03", 16, 12, 4, 7, r).unwrap();
            assert_eq!(s, split_person("p03", 16, 12, 4, 7, r).unwrap());
            assert_eq!(s.train.len(), 12);
            assert_eq!(s.test.len(), 4);
            assert!(s.test.iter().all(|t| !s.train.contains(t)));
        }
        assert_ne!(split_person("p03", 16, 12, 4, 7, 0).unwrap(), split_person("p04", 16, 12, 4, 7, 0).unwrap());
    }

    #[test]
    fn insufficient_samples_names_person() {
        let err = split_person("p09", 10, 12, 4, 1, 0).unwrap_err();
        assert!(err.to_string().contains("p09"));
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn duplicate_samples_are_identified_perfectly() {
        let cfg = SynthConfig {
            persons: 3,
            samples_per_person: 4,
            jitter: 0.0,
            wobble: false,
            ..SynthConfig::default()
        };
        let corpus = generate(&cfg).unwrap();
        let eval = EvalConfig {
            train_per_person: 2,
            test_per_person: 2,
            levels: 3,
            ..EvalConfig::default()
        };
        let report = evaluate(&corpus, &eval).unwrap();
        for r in &report.results {
            assert_eq!(r.correct, r.total);
            assert_eq!(r.total, 6);
        }
        let kv = report.to_key_values();
        assert!(kv.contains("dwt.rate=1\n"));
        assert!(kv.contains("rcwf.person.p02.total=2\n"));

        let (again, dbs) = evaluate_with_databases(&corpus, &eval).unwrap();
        assert_eq!(again, report);
        assert_eq!(dbs.len(), 2);
        assert!(dbs.iter().all(|db| db.len() == 6));
    }
}
