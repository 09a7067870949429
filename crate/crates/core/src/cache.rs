//! On-disk cache of Fekete configurations, keyed by a hash of the basis,
//! mesh, weight and search options. Entries are written to a temporary file
//! in the cache directory and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::fekete::{fekete_points, FeketeOptions, FeketeSet};
use crate::mesh::WeightedMesh;
use crate::polytope::MonomialBasis;

pub const DEFAULT_DIR: &str = ".ppt-cache";

/// `PPT_CACHE` if set, else `./.ppt-cache`.
pub fn default_dir() -> PathBuf {
    std::env::var_os("PPT_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    exponents: &'a [Vec<u32>],
    n: u32,
    mesh_label: &'a str,
    mesh: String,
    opts: &'a FeketeOptions,
}

/// Hex digest identifying one Fekete search.
pub fn fekete_key(mesh: &WeightedMesh, basis: &MonomialBasis, opts: &FeketeOptions) -> String {
    let material = KeyMaterial {
        exponents: &basis.exponents,
        n: basis.n,
        mesh_label: mesh.label(),
        mesh: mesh.fingerprint(),
        opts,
    };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug)]
pub struct FeketeCache {
    dir: PathBuf,
}

impl FeketeCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FeketeCache { dir: dir.into() }
    }

    pub fn from_env() -> Self {
        FeketeCache::new(default_dir())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("fekete-{key}.json"))
    }

    pub fn get(&self, mesh: &WeightedMesh, basis: &MonomialBasis, opts: &FeketeOptions) -> Option<FeketeSet> {
        let text = fs::read(self.path(&fekete_key(mesh, basis, opts))).ok()?;
        // unreadable entries are treated as misses and recomputed
        serde_json::from_slice(&text).ok()
    }

    pub fn put(&self, mesh: &WeightedMesh, basis: &MonomialBasis, opts: &FeketeOptions, set: &FeketeSet) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&serde_json::to_vec(set)?)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(&fekete_key(mesh, basis, opts)))
            .map_err(|e| e.error)?;
        Ok(())
    }

    pub fn fekete(&self, mesh: &WeightedMesh, basis: &MonomialBasis, opts: &FeketeOptions) -> Result<FeketeSet> {
        if let Some(hit) = self.get(mesh, basis, opts) {
            return Ok(hit);
        }
        let set = fekete_points(mesh, basis, opts)?;
        self.put(mesh, basis, opts, &set)?;
        Ok(set)
    }
}
