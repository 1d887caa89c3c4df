//! On-disk cache of benchmark LP solutions, keyed by instance content hash.

use std::path::{Path, PathBuf};

use super::{LpKind, LpSolution};
use crate::error::{Error, Result};

/// Environment variable that overrides the default cache directory.
pub const CACHE_DIR_ENV: &str = "EPORA_LP_CACHE_DIR";

#[derive(Debug, Clone)]
pub struct LpCache {
    dir: PathBuf,
}

impl LpCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Uses `$EPORA_LP_CACHE_DIR` when set, otherwise `fallback`.
    pub fn from_env_or(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Self::new(dir),
            _ => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, hash: &str, kind: LpKind) -> PathBuf {
        self.dir.join(format!("{hash}-{}.json", kind.as_str()))
    }

    /// A cached solution for `hash`, or `None` when absent or unreadable.
    pub fn get(&self, hash: &str, kind: LpKind) -> Option<LpSolution> {
        let text = std::fs::read_to_string(self.path(hash, kind)).ok()?;
        let sol: LpSolution = serde_json::from_str(&text).ok()?;
        (sol.instance_hash == hash && sol.kind == kind).then_some(sol)
    }

    pub fn put(&self, solution: &LpSolution) -> Result<()> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path(&solution.instance_hash, solution.kind);
        let text = serde_json::to_string(solution)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    /// Returns the cached solution or computes and stores it.
    pub fn get_or_solve(
        &self,
        hash: &str,
        kind: LpKind,
        solve: impl FnOnce() -> Result<LpSolution>,
    ) -> Result<LpSolution> {
        if let Some(sol) = self.get(hash, kind) {
            return Ok(sol);
        }
        let sol = solve()?;
        self.put(&sol)?;
        Ok(sol)
    }
}
