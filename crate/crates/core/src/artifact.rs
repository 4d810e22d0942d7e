//! Content-addressed artifact directory.
//!
//! Every rendered image is stored as `<ref>.png` next to `<ref>.json`, the
//! metadata record holding the full render request. References are the
//! render request id, so identical requests land on identical files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::ArtifactRef;
use crate::texture::RenderRequest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMetadata {
    pub artifact_ref: ArtifactRef,
    /// `mock` or the live endpoint the image came from.
    pub backend: String,
    pub request: RenderRequest,
}

#[derive(Debug, Clone)]
pub struct ArtifactStore {
    root: PathBuf,
}

impl ArtifactStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ArtifactStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn image_path(&self, r: &ArtifactRef) -> PathBuf {
        self.root.join(format!("{}.png", r.0))
    }

    pub fn metadata_path(&self, r: &ArtifactRef) -> PathBuf {
        self.root.join(format!("{}.json", r.0))
    }

    pub fn exists(&self, r: &ArtifactRef) -> bool {
        self.image_path(r).is_file() && self.metadata_path(r).is_file()
    }

    pub fn write(&self, image: &[u8], meta: &ArtifactMetadata) -> io::Result<()> {
        fs::create_dir_all(&self.root)?;
        let r = &meta.artifact_ref;
        write_atomic(&self.image_path(r), image)?;
        let json = serde_json::to_vec_pretty(meta).map_err(io::Error::other)?;
        write_atomic(&self.metadata_path(r), &json)
    }

    pub fn read_image(&self, r: &ArtifactRef) -> io::Result<Vec<u8>> {
        fs::read(self.image_path(r))
    }

    pub fn read_metadata(&self, r: &ArtifactRef) -> io::Result<ArtifactMetadata> {
        let bytes = fs::read(self.metadata_path(r))?;
        serde_json::from_slice(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Copies both files of `r` into `dest`.
    pub fn copy_to(&self, r: &ArtifactRef, dest: &ArtifactStore) -> io::Result<()> {
        fs::create_dir_all(&dest.root)?;
        fs::copy(self.image_path(r), dest.image_path(r))?;
        fs::copy(self.metadata_path(r), dest.metadata_path(r))?;
        Ok(())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}
