//! On-disk copy of the heat-engine memo.
//!
//! A file is used whole or not at all: a version mismatch or any unreadable
//! entry discards it and the engine starts empty.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use tracecalc::heat::{HeatEngine, Kind, SemigroupValue};

pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct CacheFile {
    pub version: u32,
    pub entries: Vec<CacheEntry>,
}

/// `e^{t𝒟̃/2}` of `u^k` (kind `"u"`) or `v_k` (kind `"v"`).
#[derive(Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub kind: String,
    pub k: u32,
    pub value: Value,
}

#[derive(Debug, Error)]
pub enum CacheRejected {
    #[error("cannot read it: {0}")]
    Io(#[from] io::Error),
    #[error("malformed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("format version {found}, expected {CACHE_VERSION}")]
    Version { found: u32 },
    #[error("bad entry {kind}{k}: {reason}")]
    Entry { kind: String, k: u32, reason: String },
}

impl CacheFile {
    pub fn from_engine(engine: &HeatEngine) -> Self {
        let entries = engine
            .entries()
            .into_iter()
            .map(|((kind, k), body)| CacheEntry {
                kind: kind.as_str().to_string(),
                k,
                value: SemigroupValue::new([(k, body)]).to_json(),
            })
            .collect();
        Self {
            version: CACHE_VERSION,
            entries,
        }
    }

    pub fn into_engine(self) -> Result<HeatEngine, CacheRejected> {
        if self.version != CACHE_VERSION {
            return Err(CacheRejected::Version { found: self.version });
        }
        let mut memo = Vec::with_capacity(self.entries.len());
        for e in self.entries {
            let reject = |reason: String| CacheRejected::Entry {
                kind: e.kind.clone(),
                k: e.k,
                reason,
            };
            let kind = Kind::parse(&e.kind).ok_or_else(|| reject("unknown kind".into()))?;
            let value = SemigroupValue::from_json(&e.value).map_err(|err| reject(err.to_string()))?;
            if value.components().iter().any(|(g, _)| *g != e.k) {
                return Err(reject("value has components outside its grade".into()));
            }
            memo.push(((kind, e.k), value.body(e.k)));
        }
        HeatEngine::from_entries(memo).map_err(|err| CacheRejected::Entry {
            kind: "?".into(),
            k: 0,
            reason: err.to_string(),
        })
    }
}

/// `$XDG_CACHE_HOME/tracecalc/heat-memo.json`, else under `$HOME/.cache`.
pub fn default_path() -> Option<PathBuf> {
    let base = std::env::var_os("XDG_CACHE_HOME")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))?;
    Some(base.join("tracecalc").join("heat-memo.json"))
}

/// A missing file is an empty cache, not an error.
pub fn load(path: &Path) -> Result<HeatEngine, CacheRejected> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(HeatEngine::new()),
        Err(e) => return Err(e.into()),
    };
    serde_json::from_str::<CacheFile>(&text)?.into_engine()
}

/// Writes through a temporary file so readers never see a partial cache.
pub fn save(path: &Path, engine: &HeatEngine) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("json.tmp");
    let text = serde_json::to_string(&CacheFile::from_engine(engine)).expect("cache serializes");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tracecalc::RationalTracePoly;

    #[test]
    fn reload_reproduces_values() {
        let engine = HeatEngine::new();
        let p = RationalTracePoly::u(4) + RationalTracePoly::v(3);
        let before = engine.heat_limit(&p);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("memo.json");
        save(&path, &engine).unwrap();
        let reloaded = load(&path).unwrap();
        assert_eq!(reloaded.entries(), engine.entries());
        assert_eq!(reloaded.heat_limit(&p), before);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let file = CacheFile {
            version: CACHE_VERSION + 1,
            entries: vec![],
        };
        assert!(matches!(file.into_engine(), Err(CacheRejected::Version { .. })));
    }

    #[test]
    fn one_bad_entry_rejects_the_file() {
        let engine = HeatEngine::new();
        engine.tilde_exp_u(3);
        let mut file = CacheFile::from_engine(&engine);
        file.entries.push(CacheEntry {
            kind: "w".into(),
            k: 1,
            value: Value::Null,
        });
        assert!(file.into_engine().is_err());
    }
}
