//! What a command operates on: a gallery entry or a machine document on disk.

use std::path::Path;

use aeqs_core::aeqs::AeqsFamily;
use aeqs_core::doc::MachineSpecDocument;
use aeqs_core::gallery::{self, GalleryEntry, Membership};

use crate::CliError;

pub enum Target {
    Gallery(Box<GalleryEntry>),
    Document { path: String, family: AeqsFamily },
}

impl Target {
    /// Paths that exist or end in `.json` are documents; anything else names a gallery entry.
    pub fn resolve(name: &str) -> Result<Self, CliError> {
        let path = Path::new(name);
        if path.is_file() || name.ends_with(".json") {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: name.to_string(), source: e })?;
            let doc = MachineSpecDocument::parse(&text).map_err(|e| CliError::Document { path: name.to_string(), source: e })?;
            let family = doc
                .machine()
                .and_then(|m| m.family())
                .map_err(|e| CliError::Document { path: name.to_string(), source: e })?;
            return Ok(Self::Document { path: name.to_string(), family });
        }
        Ok(Self::Gallery(Box::new(gallery::build(name)?)))
    }

    pub fn family(&self) -> &AeqsFamily {
        match self {
            Self::Gallery(e) => &e.family,
            Self::Document { family, .. } => family,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Gallery(e) => e.name.clone(),
            Self::Document { path, .. } => path.clone(),
        }
    }

    /// Classical answer, for gallery entries only.
    pub fn membership(&self, x: &str) -> Option<Membership> {
        match self {
            Self::Gallery(e) => Some((e.oracle)(x)),
            Self::Document { .. } => None,
        }
    }
}
