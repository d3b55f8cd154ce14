//! File-backed persistence for models and assessments.
//!
//! Layout under the store root:
//!
//! ```text
//! models/<id>.smmdl
//! assessments/<id>.smma
//! index.json        {"models": {"<id>": <rev>}, "assessments": {"<id>": <rev>}}
//! ```
//!
//! Every write goes through the canonical serializer into a temporary file
//! that is renamed over the target, so readers never observe a truncated
//! entity. Each write carries the revision the caller last saw (0 for "does
//! not exist") and is rejected with [`StoreError::Conflict`] when stale.
//! The index keeps the last revision of deleted ids so revisions never repeat.
//! If the index is missing it is rebuilt by scanning, with revision 1 for
//! every entity found.
//!
//! Writers are serialized within one process; a store root must not be
//! shared by several writing processes.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{codes, has_errors, Diagnostic, Subject};
use crate::model::{
    is_valid_identifier, validate_assessment, validate_model, Assessment, MaturityModel,
};
use crate::text;

pub const INDEX_FILE: &str = "index.json";
pub const MODELS_DIR: &str = "models";
pub const ASSESSMENTS_DIR: &str = "assessments";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Model,
    Assessment,
}

impl EntityKind {
    fn dir(self) -> &'static str {
        match self {
            EntityKind::Model => MODELS_DIR,
            EntityKind::Assessment => ASSESSMENTS_DIR,
        }
    }

    fn extension(self) -> &'static str {
        match self {
            EntityKind::Model => text::MODEL_EXTENSION,
            EntityKind::Assessment => text::ASSESSMENT_EXTENSION,
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{kind:?} {id} not found")]
    NotFound { kind: EntityKind, id: String },
    #[error("{kind:?} {id} is at revision {actual}, not {expected}")]
    Conflict {
        kind: EntityKind,
        id: String,
        expected: u64,
        actual: u64,
    },
    #[error("validation failed")]
    ValidationFailed(Vec<Diagnostic>),
    #[error("stored file {path} does not parse")]
    Corrupt {
        path: PathBuf,
        diagnostics: Vec<Diagnostic>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::NotFound { .. } => codes::NOT_FOUND,
            StoreError::Conflict { .. } => codes::CONFLICT,
            StoreError::ValidationFailed(_) => codes::VALIDATION_FAILED,
            StoreError::Corrupt { .. } => codes::CORRUPT,
            StoreError::Io(_) => codes::IO,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            StoreError::ValidationFailed(d) | StoreError::Corrupt { diagnostics: d, .. } => d,
            _ => &[],
        }
    }
}

/// A stored value with the revision it was read at.
#[derive(Debug, Clone, PartialEq)]
pub struct Versioned<T> {
    pub value: T,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityInfo {
    pub id: String,
    pub revision: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Index {
    #[serde(default)]
    models: BTreeMap<String, u64>,
    #[serde(default)]
    assessments: BTreeMap<String, u64>,
}

impl Index {
    fn table(&self, kind: EntityKind) -> &BTreeMap<String, u64> {
        match kind {
            EntityKind::Model => &self.models,
            EntityKind::Assessment => &self.assessments,
        }
    }

    fn table_mut(&mut self, kind: EntityKind) -> &mut BTreeMap<String, u64> {
        match kind {
            EntityKind::Model => &mut self.models,
            EntityKind::Assessment => &mut self.assessments,
        }
    }
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    write_lock: Mutex<()>,
    tmp_counter: AtomicU64,
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for kind in [EntityKind::Model, EntityKind::Assessment] {
            fs::create_dir_all(root.join(kind.dir()))?;
        }
        let store = Store {
            root,
            write_lock: Mutex::new(()),
            tmp_counter: AtomicU64::new(0),
        };
        if !store.index_path().exists() {
            let index = store.scan()?;
            store.write_index(&index)?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn index_path(&self) -> PathBuf {
        self.root.join(INDEX_FILE)
    }

    fn entity_path(&self, kind: EntityKind, id: &str) -> PathBuf {
        self.root
            .join(kind.dir())
            .join(format!("{id}.{}", kind.extension()))
    }

    fn ids_on_disk(&self, kind: EntityKind) -> Result<Vec<String>, StoreError> {
        let suffix = format!(".{}", kind.extension());
        let mut ids = Vec::new();
        for entry in fs::read_dir(self.root.join(kind.dir()))? {
            let name = entry?.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = name.strip_suffix(&suffix) {
                if is_valid_identifier(id) && !name.starts_with(".tmp") {
                    ids.push(id.to_owned());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    fn scan(&self) -> Result<Index, StoreError> {
        let mut index = Index::default();
        for kind in [EntityKind::Model, EntityKind::Assessment] {
            for id in self.ids_on_disk(kind)? {
                index.table_mut(kind).insert(id, 1);
            }
        }
        Ok(index)
    }

    fn read_index(&self) -> Result<Index, StoreError> {
        match fs::read(self.index_path()) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::Io(io::Error::new(io::ErrorKind::InvalidData, e))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => self.scan(),
            Err(e) => Err(e.into()),
        }
    }

    fn write_index(&self, index: &Index) -> Result<(), StoreError> {
        let mut bytes = serde_json::to_vec_pretty(index).expect("index serializes");
        bytes.push(b'\n');
        self.atomic_write(&self.index_path(), &bytes)
    }

    fn atomic_write(&self, target: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        let dir = target.parent().expect("store paths have a parent");
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = dir.join(format!(".tmp-{}-{n}", std::process::id()));
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, target)
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        Ok(result?)
    }

    /// Revision of an existing entity, 0 when absent.
    fn current_revision(&self, index: &Index, kind: EntityKind, id: &str) -> u64 {
        if self.entity_path(kind, id).exists() {
            index.table(kind).get(id).copied().unwrap_or(1).max(1)
        } else {
            0
        }
    }

    pub fn revision(&self, kind: EntityKind, id: &str) -> Result<u64, StoreError> {
        if !is_valid_identifier(id) {
            return Ok(0);
        }
        Ok(self.current_revision(&self.read_index()?, kind, id))
    }

    fn list(&self, kind: EntityKind) -> Result<Vec<EntityInfo>, StoreError> {
        let index = self.read_index()?;
        Ok(self
            .ids_on_disk(kind)?
            .into_iter()
            .map(|id| EntityInfo {
                revision: index.table(kind).get(&id).copied().unwrap_or(1).max(1),
                id,
            })
            .collect())
    }

    /// Reads the entity text with a revision consistent with it: the index
    /// is read before and after the file and the read retried on change.
    fn read_raw(&self, kind: EntityKind, id: &str) -> Result<(String, u64, PathBuf), StoreError> {
        let not_found = || StoreError::NotFound {
            kind,
            id: id.to_owned(),
        };
        if !is_valid_identifier(id) {
            return Err(not_found());
        }
        let path = self.entity_path(kind, id);
        loop {
            let before = self.read_index()?;
            let text = match fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(not_found()),
                Err(e) => return Err(e.into()),
            };
            let after = self.read_index()?;
            if before.table(kind).get(id) == after.table(kind).get(id) {
                let revision = self.current_revision(&after, kind, id);
                if revision == 0 {
                    return Err(not_found());
                }
                return Ok((text, revision, path));
            }
        }
    }

    /// Writes `bytes` for `id` if the current revision equals `expected`.
    /// Repeating the last successful write (same bytes, same expected
    /// revision) succeeds without bumping the revision.
    fn write_checked(
        &self,
        kind: EntityKind,
        id: &str,
        bytes: &[u8],
        expected: u64,
    ) -> Result<u64, StoreError> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut index = self.read_index()?;
        let path = self.entity_path(kind, id);
        let actual = self.current_revision(&index, kind, id);
        if actual != expected {
            let same = actual == expected + 1 && fs::read(&path).is_ok_and(|b| b == bytes);
            if same {
                return Ok(actual);
            }
            return Err(StoreError::Conflict {
                kind,
                id: id.to_owned(),
                expected,
                actual,
            });
        }
        let last = index.table(kind).get(id).copied().unwrap_or(0);
        let next = last.max(actual) + 1;
        self.atomic_write(&path, bytes)?;
        index.table_mut(kind).insert(id.to_owned(), next);
        self.write_index(&index)?;
        Ok(next)
    }

    fn delete(&self, kind: EntityKind, id: &str, expected: Option<u64>) -> Result<(), StoreError> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let not_found = || StoreError::NotFound {
            kind,
            id: id.to_owned(),
        };
        if !is_valid_identifier(id) {
            return Err(not_found());
        }
        let index = self.read_index()?;
        let actual = self.current_revision(&index, kind, id);
        if actual == 0 {
            return Err(not_found());
        }
        if let Some(expected) = expected.filter(|e| *e != actual) {
            return Err(StoreError::Conflict {
                kind,
                id: id.to_owned(),
                expected,
                actual,
            });
        }
        // the index keeps the revision as a tombstone
        fs::remove_file(self.entity_path(kind, id))?;
        Ok(())
    }

    pub fn list_models(&self) -> Result<Vec<EntityInfo>, StoreError> {
        self.list(EntityKind::Model)
    }

    pub fn list_assessments(&self) -> Result<Vec<EntityInfo>, StoreError> {
        self.list(EntityKind::Assessment)
    }

    pub fn get_model(&self, id: &str) -> Result<Versioned<MaturityModel>, StoreError> {
        let (text, revision, path) = self.read_raw(EntityKind::Model, id)?;
        let file = path.display().to_string();
        let (value, _) = text::parse_model_source(&text, &file)
            .map_err(|diagnostics| StoreError::Corrupt { path, diagnostics })?;
        Ok(Versioned { value, revision })
    }

    /// Validates and stores a model; returns the new revision.
    pub fn put_model(&self, model: &MaturityModel, expected: u64) -> Result<u64, StoreError> {
        let diagnostics = validate_model(model);
        if has_errors(&diagnostics) {
            return Err(StoreError::ValidationFailed(diagnostics));
        }
        let text = text::serialize_model(model);
        self.write_checked(EntityKind::Model, &model.id, text.as_bytes(), expected)
    }

    pub fn delete_model(&self, id: &str, expected: Option<u64>) -> Result<(), StoreError> {
        self.delete(EntityKind::Model, id, expected)
    }

    pub fn get_assessment(&self, id: &str) -> Result<Versioned<Assessment>, StoreError> {
        let (text, revision, path) = self.read_raw(EntityKind::Assessment, id)?;
        let file = path.display().to_string();
        let (value, _) = text::parse_assessment_source(&text, &file)
            .map_err(|diagnostics| StoreError::Corrupt { path, diagnostics })?;
        Ok(Versioned { value, revision })
    }

    /// Validates an assessment against its stored model and stores it,
    /// with scores in the model's pool order.
    pub fn put_assessment(&self, assessment: &Assessment, expected: u64) -> Result<u64, StoreError> {
        let model = match self.get_model(&assessment.model_id) {
            Ok(m) => m.value,
            Err(StoreError::NotFound { .. }) => {
                return Err(StoreError::ValidationFailed(vec![Diagnostic::error(
                    codes::MODEL_MISMATCH,
                    format!("model {} is not in the store", assessment.model_id),
                )
                .about(Subject::Assessment)]))
            }
            Err(e) => return Err(e),
        };
        let diagnostics = validate_assessment(assessment, &model);
        if has_errors(&diagnostics) {
            return Err(StoreError::ValidationFailed(diagnostics));
        }
        let text = text::serialize_assessment_for(assessment, &model);
        self.write_checked(EntityKind::Assessment, &assessment.id, text.as_bytes(), expected)
    }

    pub fn delete_assessment(&self, id: &str, expected: Option<u64>) -> Result<(), StoreError> {
        self.delete(EntityKind::Assessment, id, expected)
    }
}
