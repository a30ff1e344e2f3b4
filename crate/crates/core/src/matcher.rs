//! Feature database persistence and Canberra nearest-neighbour matching.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{feature_length, FeatureMethod, FeatureVector};

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &str = "WSIGDB";

/// Canberra distance; terms where both coordinates are zero contribute 0.
pub fn canberra(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let den = a.abs() + b.abs();
            if den == 0.0 {
                0.0
            } else {
                (a - b).abs() / den
            }
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbEntry {
    pub person_id: String,
    pub sample_id: String,
    pub vector: Vec<f64>,
}

/// Enrolled feature vectors for one method and depth.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDb {
    pub schema_version: u32,
    pub method: FeatureMethod,
    pub levels: usize,
    pub feature_length: usize,
    entries: Vec<DbEntry>,
}

fn check_id(kind: &str, id: &str) -> std::result::Result<(), String> {
    if id.is_empty() {
        Err(format!("empty {kind}"))
    } else if id.chars().any(|c| c.is_whitespace() || c.is_control()) {
        Err(format!("{kind} {id:?} contains whitespace"))
    } else {
        Ok(())
    }
}

impl FeatureDb {
    pub fn new(method: FeatureMethod, levels: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            method,
            levels,
            feature_length: feature_length(method, levels),
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[DbEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn validate_entry(&self, entry: &DbEntry) -> std::result::Result<(), String> {
        check_id("person id", &entry.person_id)?;
        check_id("sample id", &entry.sample_id)?;
        if entry.vector.len() != self.feature_length {
            return Err(format!(
                "vector has {} values, expected {}",
                entry.vector.len(),
                self.feature_length
            ));
        }
        if let Some(v) = entry.vector.iter().find(|v| !v.is_finite()) {
            return Err(format!("non-finite value {v}"));
        }
        if self
            .entries
            .iter()
            .any(|e| e.person_id == entry.person_id && e.sample_id == entry.sample_id)
        {
            return Err(format!("duplicate entry {}/{}", entry.person_id, entry.sample_id));
        }
        Ok(())
    }

    pub fn insert(&mut self, entry: DbEntry) -> Result<()> {
        self.validate_entry(&entry).map_err(Error::Incompatible)?;
        self.entries.push(entry);
        Ok(())
    }

    /// Add an extracted vector after checking it matches this database.
    pub fn enroll(&mut self, person_id: &str, sample_id: &str, fv: &FeatureVector) -> Result<()> {
        if fv.method != self.method || fv.levels != self.levels {
            return Err(Error::Incompatible(format!(
                "vector is {} with {} levels, database is {} with {} levels",
                fv.method, fv.levels, self.method, self.levels
            )));
        }
        self.insert(DbEntry {
            person_id: person_id.to_owned(),
            sample_id: sample_id.to_owned(),
            vector: fv.values.clone(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{MAGIC} {} {} {} {}\n",
            self.schema_version, self.method, self.levels, self.feature_length
        );
        for e in &self.entries {
            let _ = write!(out, "{}\t{}\t", e.person_id, e.sample_id);
            for (i, v) in e.vector.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                // 17 significant digits round-trip every f64.
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let bad = |line: usize, detail: String| Error::Database { line, detail };
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [magic, schema, method, levels, length] = fields[..] else {
            return Err(bad(1, format!("header needs 5 fields, found {}", fields.len())));
        };
        if magic != MAGIC {
            return Err(bad(1, format!("expected {MAGIC}, found {magic:?}")));
        }
        let schema: u32 = schema.parse().map_err(|_| bad(1, format!("bad schema version {schema:?}")))?;
        if schema != SCHEMA_VERSION {
            return Err(bad(1, format!("unsupported schema version {schema}")));
        }
        let method: FeatureMethod = method.parse().map_err(|e: Error| bad(1, e.to_string()))?;
        let levels: usize = levels.parse().map_err(|_| bad(1, format!("bad levels {levels:?}")))?;
        if levels == 0 {
            return Err(bad(1, "levels must be positive".into()));
        }
        let length: usize = length.parse().map_err(|_| bad(1, format!("bad feature length {length:?}")))?;
        let mut db = FeatureDb::new(method, levels);
        if length != db.feature_length {
            return Err(bad(
                1,
                format!("feature length {length} does not match {method} at {levels} levels ({})", db.feature_length),
            ));
        }

        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            let [person, sample, values] = parts[..] else {
                return Err(bad(n, format!("expected 3 tab-separated fields, found {}", parts.len())));
            };
            let vector = values
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad(n, format!("bad value {v:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            let entry = DbEntry {
                person_id: person.to_owned(),
                sample_id: sample.to_owned(),
                vector,
            };
            db.validate_entry(&entry).map_err(|d| bad(n, d))?;
            db.entries.push(entry);
        }
        Ok(db)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Write through a temporary file in the same directory, then rename
    /// over `path`, so readers never see a partial database.
    pub fn save(&self, path: &Path) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(self.to_text().as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    pub person_id: String,
    pub sample_id: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub ranked: Vec<Ranked>,
}

impl MatchResult {
    pub fn best(&self) -> &Ranked {
        &self.ranked[0]
    }
}

/// Rank every enrolled vector by Canberra distance to `query`.
pub fn identify(query: &FeatureVector, db: &FeatureDb) -> Result<MatchResult> {
    if query.method != db.method || query.levels != db.levels {
        return Err(Error::Incompatible(format!(
            "query is {} with {} levels, database is {} with {} levels",
            query.method, query.levels, db.method, db.levels
        )));
    }
    identify_values(&query.values, db)
}

pub fn identify_values(query: &[f64], db: &FeatureDb) -> Result<MatchResult> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let mut ranked = db
        .entries
        .iter()
        .map(|e| {
            Ok(Ranked {
                person_id: e.person_id.clone(),
                sample_id: e.sample_id.clone(),
                distance: canberra(query, &e.vector)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        a.distance
            .partial_cmp(&b.distance)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.person_id.cmp(&b.person_id))
            .then_with(|| a.sample_id.cmp(&b.sample_id))
    });
    Ok(MatchResult { ranked })
}
