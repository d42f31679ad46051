//! Command-line front end and HTTP service for `nameguard-core`.

pub mod api;
pub mod cli;
pub mod webhook;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nameguard_core::text::FoldTableError;
use nameguard_core::{Engine, FoldTable, FoldTables, PersistError};

/// sysexits(3) codes used by the binary.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 64;
    pub const DATA_ERR: u8 = 65;
    pub const IO_ERR: u8 = 74;
}

#[derive(Debug)]
pub enum LoadError {
    Tables(FoldTableError),
    Store(PersistError),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Tables(e) => e.fmt(f),
            LoadError::Store(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for LoadError {}

impl LoadError {
    pub fn exit_code(&self) -> u8 {
        match self {
            LoadError::Tables(FoldTableError::Io { .. }) | LoadError::Store(PersistError::Io { .. }) => exit::IO_ERR,
            _ => exit::DATA_ERR,
        }
    }
}

/// Where the stores live and which fold tables to use.
#[derive(Debug, Clone)]
pub struct DataConfig {
    pub data_dir: PathBuf,
    pub leet: Option<PathBuf>,
    pub confusables: Option<PathBuf>,
}

impl DataConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        DataConfig {
            data_dir: data_dir.into(),
            leet: None,
            confusables: None,
        }
    }

    pub fn tables(&self) -> Result<FoldTables, LoadError> {
        let load = |p: &Option<PathBuf>, default: fn() -> FoldTable| match p {
            Some(path) => FoldTable::load(path).map_err(LoadError::Tables),
            None => Ok(default()),
        };
        Ok(FoldTables::new(
            load(&self.leet, FoldTable::leet)?,
            load(&self.confusables, FoldTable::confusables)?,
        ))
    }

    pub fn load_engine(&self) -> Result<Engine, LoadError> {
        let tables = Arc::new(self.tables()?);
        Engine::load(&self.data_dir, tables).map_err(LoadError::Store)
    }

    pub fn save(&self, engine: &Engine) -> Result<(), PersistError> {
        engine.save(&self.data_dir)
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }
}
