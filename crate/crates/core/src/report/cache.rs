//! Persistent JSON cache of rightmost roots.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::numeric::{fmt17, Tolerances};
use crate::roots::{RootFinder, RootResult};
use crate::Result;

pub const CACHE_SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the cache file when `--cache` is absent.
pub const CACHE_ENV: &str = "SUPERSTABLE_CACHE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub family: String,
    pub n: u32,
    pub kind: String,
    pub tol_width: String,
    pub tol_residual: String,
    pub result: RootResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheFile {
    schema_version: u32,
    entries: BTreeMap<String, CacheEntry>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub accepted: usize,
    pub stale: usize,
    pub rejected: usize,
}

/// Rightmost roots keyed by `(family, n, "rightmost")`.
#[derive(Debug, Clone)]
pub struct RootCache {
    path: PathBuf,
    entries: BTreeMap<String, CacheEntry>,
}

fn key(family: &str, n: u32) -> String {
    format!("{family}/{n:04}/rightmost")
}

impl RootCache {
    /// Reads `path` if it exists. Unreadable or foreign-schema files start
    /// an empty cache rather than failing the run.
    pub fn open(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let entries = fs::read_to_string(&path)
            .ok()
            .and_then(|s| serde_json::from_str::<CacheFile>(&s).ok())
            .filter(|f| f.schema_version == CACHE_SCHEMA_VERSION)
            .map(|f| f.entries)
            .unwrap_or_default();
        RootCache { path, entries }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Seeds `finder` with entries computed under the same tolerances whose
    /// residuals still check out; everything else is dropped.
    pub fn load_into(&mut self, finder: &RootFinder) -> LoadStats {
        let family = finder.family().name().to_string();
        let tol = finder.tol();
        let mut stats = LoadStats::default();
        self.entries.retain(|_, e| {
            if e.family != family {
                return true;
            }
            if !same_tolerances(e, tol) {
                stats.stale += 1;
                return false;
            }
            if finder.seed_rightmost(e.result.clone()) {
                stats.accepted += 1;
                true
            } else {
                stats.rejected += 1;
                false
            }
        });
        stats
    }

    /// Records every rightmost root the finder currently knows.
    pub fn absorb(&mut self, finder: &RootFinder) {
        let family = finder.family().name().to_string();
        let tol = finder.tol();
        for r in finder.cached_rightmost() {
            self.entries.insert(
                key(&family, r.n),
                CacheEntry {
                    family: family.clone(),
                    n: r.n,
                    kind: "rightmost".into(),
                    tol_width: fmt17(tol.width),
                    tol_residual: fmt17(tol.residual),
                    result: r,
                },
            );
        }
    }

    pub fn save(&self) -> Result<()> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let file = CacheFile {
            schema_version: CACHE_SCHEMA_VERSION,
            entries: self.entries.clone(),
        };
        let tmp = self.path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&file)? + "\n")?;
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }
}

fn same_tolerances(e: &CacheEntry, tol: &Tolerances) -> bool {
    e.tol_width == fmt17(tol.width) && e.tol_residual == fmt17(tol.residual)
}
