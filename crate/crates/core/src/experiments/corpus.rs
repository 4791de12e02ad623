//! The seeded random corpus: generation, manifest, and batch verification.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::report::{finish, SCHEMA};
use super::verify::{verify_circuit, VerificationReport};
use super::Options;
use crate::circuit::random::{random_circuit, GENERATOR_VERSION};
use crate::circuit::{build_epr_circuit, Circuit, SingleGate};
use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const DEFAULT_BASE_SEED: u64 = 20_000;

/// `(particles, max layers, circuits per depth)`.
pub const CORPUS_SHAPE: [(usize, usize, usize); 3] = [(2, 8, 3), (3, 5, 4), (4, 4, 2)];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub file: String,
    pub seed: Option<u64>,
    pub particles: usize,
    pub layers: usize,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: u64,
    pub generator_version: u32,
    pub base_seed: u64,
    pub entries: Vec<CorpusEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn corpus_seed(base: u64, particles: usize, layers: usize, k: usize) -> u64 {
    base + 1000 * particles as u64 + 10 * layers as u64 + k as u64
}

/// The corpus circuits in manifest order.
pub fn corpus_circuits(base: u64) -> Vec<(CorpusEntry, Circuit)> {
    let mut out = Vec::new();
    let epr = build_epr_circuit(SingleGate::rotation(0.3), SingleGate::hadamard())
        .expect("EPR circuit is valid");
    out.push((entry("epr.json".into(), None, &epr), epr));
    for (np, max_n, per) in CORPUS_SHAPE {
        for n in 1..=max_n {
            for k in 0..per {
                let seed = corpus_seed(base, np, n, k);
                let c = random_circuit(seed, np, n);
                out.push((entry(format!("n{np}_l{n}_{k}.json"), Some(seed), &c), c));
            }
        }
    }
    out
}

fn entry(file: String, seed: Option<u64>, c: &Circuit) -> CorpusEntry {
    CorpusEntry {
        file,
        seed,
        particles: c.particles(),
        layers: c.depth(),
        digest: c.digest(),
    }
}

pub fn manifest_for(base: u64) -> Manifest {
    Manifest {
        schema: SCHEMA,
        generator_version: GENERATOR_VERSION,
        base_seed: base,
        entries: corpus_circuits(base).into_iter().map(|(e, _)| e).collect(),
    }
}

/// Writes every circuit file and the manifest into `dir`.
pub fn write_corpus(dir: &Path, base: u64) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (e, c) in corpus_circuits(base) {
        fs::write(dir.join(&e.file), c.to_json())?;
        entries.push(e);
    }
    let manifest = Manifest {
        schema: SCHEMA,
        generator_version: GENERATOR_VERSION,
        base_seed: base,
        entries,
    };
    fs::write(dir.join(MANIFEST), manifest.to_json())?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let m: Manifest = serde_json::from_str(&fs::read_to_string(path)?)?;
    if m.schema != SCHEMA {
        return Err(Error::InvalidArgument(format!(
            "unsupported manifest schema {}",
            m.schema
        )));
    }
    Ok(m)
}

/// Files under `dir` whose bytes differ from a fresh regeneration (manifest included).
pub fn regeneration_mismatches(dir: &Path) -> Result<Vec<String>> {
    let manifest = load_manifest(&dir.join(MANIFEST))?;
    let mut bad = Vec::new();
    if fs::read_to_string(dir.join(MANIFEST))? != manifest_for(manifest.base_seed).to_json() {
        bad.push(MANIFEST.to_string());
    }
    for (e, c) in corpus_circuits(manifest.base_seed) {
        match fs::read_to_string(dir.join(&e.file)) {
            Ok(text) if text == c.to_json() => {}
            _ => bad.push(e.file),
        }
    }
    Ok(bad)
}

#[derive(Clone, Debug, PartialEq)]
pub enum EntryOutcome {
    Verified(VerificationReport),
    /// Loading failed or the file does not match its recorded digest.
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusReport {
    pub results: Vec<(CorpusEntry, EntryOutcome)>,
}

impl CorpusReport {
    pub fn pass(&self) -> bool {
        self.results
            .iter()
            .all(|(_, o)| matches!(o, EntryOutcome::Verified(r) if r.pass()))
    }

    pub fn to_json(&self) -> Value {
        let circuits: Vec<Value> = self
            .results
            .iter()
            .map(|(e, o)| match o {
                EntryOutcome::Verified(r) => {
                    let mut v = r.body();
                    v["file"] = json!(e.file);
                    v
                }
                EntryOutcome::Invalid(msg) => json!({"file": e.file, "pass": false, "error": msg}),
            })
            .collect();
        finish("verify", json!({"circuits": circuits, "pass": self.pass()}))
    }

    /// One `PASS`/`FAIL` line per circuit.
    pub fn summary_lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|(e, o)| match o {
                EntryOutcome::Verified(r) if r.pass() => format!("PASS {}", e.file),
                EntryOutcome::Verified(r) => {
                    let names: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
                    format!("FAIL {} ({})", e.file, names.join(", "))
                }
                EntryOutcome::Invalid(msg) => format!("FAIL {} ({msg})", e.file),
            })
            .collect()
    }
}

fn verify_entry(dir: &Path, e: &CorpusEntry, opts: &Options) -> EntryOutcome {
    let c = match Circuit::load(dir.join(&e.file)) {
        Ok(c) => c,
        Err(err) => return EntryOutcome::Invalid(err.to_string()),
    };
    if c.digest() != e.digest {
        return EntryOutcome::Invalid(format!("digest mismatch for {}", e.file));
    }
    match verify_circuit(&c, opts) {
        Ok(r) => EntryOutcome::Verified(r),
        Err(err) => EntryOutcome::Invalid(err.to_string()),
    }
}

/// Verifies every manifest entry concurrently; results keep manifest order.
pub fn verify_manifest(path: &Path, opts: &Options) -> Result<CorpusReport> {
    let manifest = load_manifest(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let results = manifest
        .entries
        .par_iter()
        .map(|e| (e.clone(), verify_entry(dir, e, opts)))
        .collect();
    Ok(CorpusReport { results })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let m = manifest_for(DEFAULT_BASE_SEED);
        assert_eq!(m.entries.len(), 53);
        let mut seeds: Vec<u64> = m.entries.iter().filter_map(|e| e.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 52);
    }

    #[test]
    fn write_then_regenerate() {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), 5).unwrap();
        assert!(regeneration_mismatches(dir.path()).unwrap().is_empty());
        fs::write(dir.path().join("epr.json"), "{}").unwrap();
        assert_eq!(
            regeneration_mismatches(dir.path()).unwrap(),
            vec!["epr.json"]
        );
    }
}
