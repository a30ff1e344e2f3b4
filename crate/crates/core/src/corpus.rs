//! Corpus directory layout: `<root>/<person_id>/<sample_id>.pgm`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{encode_pgm, load_pgm, GrayImage};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub person_id: String,
    pub sample_id: String,
    pub image: GrayImage,
}

/// Images read from a corpus plus any files that were skipped.
#[derive(Debug, Default)]
pub struct CorpusLoad {
    /// Sorted by person id, then sample id.
    pub samples: Vec<LabeledImage>,
    pub skipped: Vec<(PathBuf, Error)>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(|c| c.is_whitespace() || c.is_control())
}

fn sorted_entries(dir: &Path) -> Result<Vec<fs::DirEntry>> {
    let mut entries = fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

/// Write images in the corpus layout, creating directories as needed.
pub fn write_corpus(root: &Path, samples: &[LabeledImage]) -> Result<()> {
    for s in samples {
        if !valid_id(&s.person_id) || !valid_id(&s.sample_id) {
            return Err(Error::Corpus(format!("invalid id {}/{}", s.person_id, s.sample_id)));
        }
        let dir = root.join(&s.person_id);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(format!("{}.pgm", s.sample_id)), encode_pgm(&s.image))?;
    }
    Ok(())
}

/// Read every `.pgm` file one directory below `root`.
///
/// With `strict`, the first unreadable image aborts the load; otherwise it
/// is recorded in [`CorpusLoad::skipped`]. Files without a `.pgm`
/// extension and loose files directly under `root` are ignored.
pub fn read_corpus(root: &Path, strict: bool) -> Result<CorpusLoad> {
    if !root.is_dir() {
        return Err(Error::Corpus(format!("{} is not a directory", root.display())));
    }
    let mut load = CorpusLoad::default();
    for person in sorted_entries(root)? {
        if !person.file_type()?.is_dir() {
            continue;
        }
        let person_id = person.file_name().to_string_lossy().into_owned();
        for file in sorted_entries(&person.path())? {
            let path = file.path();
            if path.extension().and_then(|e| e.to_str()) != Some("pgm") || !file.file_type()?.is_file() {
                continue;
            }
            let sample_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let result = if valid_id(&person_id) && valid_id(&sample_id) {
                fs::read(&path).map_err(Error::from).and_then(|b| load_pgm(&b))
            } else {
                Err(Error::Corpus(format!("invalid id {person_id}/{sample_id}")))
            };
            match result {
                Ok(image) => load.samples.push(LabeledImage {
                    person_id: person_id.clone(),
                    sample_id,
                    image,
                }),
                Err(e) if strict => {
                    return Err(Error::Corpus(format!("{}: {e}", path.display())));
                }
                Err(e) => load.skipped.push((path, e)),
            }
        }
    }
    if load.samples.is_empty() {
        return Err(Error::Corpus(format!("no readable images under {}", root.display())));
    }
    Ok(load)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(v: f64) -> GrayImage {
        GrayImage::filled(8, 8, v).unwrap()
    }

    fn labeled(p: &str, s: &str, v: f64) -> LabeledImage {
        LabeledImage {
            person_id: p.into(),
            sample_id: s.into(),
            image: img(v),
        }
    }

    #[test]
    fn write_then_read_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let items = vec![labeled("b", "s1", 0.0), labeled("a", "s2", 1.0), labeled("a", "s0", 0.0)];
        write_corpus(dir.path(), &items).unwrap();
        fs::write(dir.path().join("a").join("notes.txt"), "x").unwrap();
        fs::write(dir.path().join("README"), "x").unwrap();
        let load = read_corpus(dir.path(), true).unwrap();
        let ids: Vec<(&str, &str)> = load.samples.iter().map(|s| (s.person_id.as_str(), s.sample_id.as_str())).collect();
        assert_eq!(ids, [("a", "s0"), ("a", "s2"), ("b", "s1")]);
        assert_eq!(load.samples[1].image, img(1.0));
    }

    #[test]
    fn strict_and_lenient_handling_of_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &[labeled("a", "s0", 0.5)]).unwrap();
        fs::write(dir.path().join("a").join("bad.pgm"), b"P2\n1 1\n255\n0").unwrap();
        let load = read_corpus(dir.path(), false).unwrap();
        assert_eq!(load.samples.len(), 1);
        assert_eq!(load.skipped.len(), 1);
        assert!(matches!(read_corpus(dir.path(), true), Err(Error::Corpus(_))));
    }

    #[test]
    fn empty_or_missing_corpus() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_corpus(dir.path(), false), Err(Error::Corpus(_))));
        assert!(matches!(read_corpus(&dir.path().join("nope"), false), Err(Error::Corpus(_))));
    }
}
