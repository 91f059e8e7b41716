//! Tasting sessions and their on-disk store.
//!
//! A store is a flat directory holding one pretty-printed JSON file per
//! session, `<id>.json`. Writes go to a temporary file that is synced and
//! renamed over the target, so readers always see a complete file.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Placement, Point2D, Sheet, Tablecloth};
use crate::ingest::{tablecloths_to_table, CoordinateTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub sample_names: Vec<String>,
    pub sheet: Sheet,
    pub tablecloths: Vec<Tablecloth>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl Session {
    /// A new empty session with a random id.
    pub fn new(sample_names: Vec<String>, sheet: Sheet) -> Result<Self> {
        validate_sample_names(&sample_names)?;
        let now = Utc::now();
        Ok(Self {
            id: uuid::Uuid::new_v4().simple().to_string(),
            sample_names,
            sheet,
            tablecloths: Vec::new(),
            created_at: now,
            updated_at: now,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.sample_names.len()
    }

    /// Checks every tablecloth covers the sample list and assessor ids are unique.
    pub fn validate(&self) -> Result<()> {
        validate_sample_names(&self.sample_names)?;
        let mut ids = HashSet::new();
        for (index, t) in self.tablecloths.iter().enumerate() {
            if t.sample_count() != self.sample_count() {
                return Err(Error::SampleCountMismatch {
                    index,
                    expected: self.sample_count(),
                    found: t.sample_count(),
                });
            }
            t.positions()?;
            if !ids.insert(t.assessor_id.as_str()) {
                return Err(Error::Validation(format!("duplicate assessor id `{}`", t.assessor_id)));
            }
        }
        Ok(())
    }

    pub fn to_table(&self) -> Result<CoordinateTable> {
        tablecloths_to_table(&self.sample_names, &self.tablecloths, self.sheet)
    }

    /// Applies a submission; an existing tablecloth from the same assessor is
    /// replaced in place.
    pub fn submit(&mut self, payload: &SubmissionPayload) -> Result<SubmitOutcome> {
        let t = payload.to_tablecloth(&self.sample_names, self.sheet)?;
        let outcome = match self.tablecloths.iter_mut().find(|c| c.assessor_id == t.assessor_id) {
            Some(existing) => {
                *existing = t;
                SubmitOutcome::Updated
            }
            None => {
                self.tablecloths.push(t);
                SubmitOutcome::Accepted
            }
        };
        self.updated_at = Utc::now();
        Ok(outcome)
    }
}

pub fn validate_sample_names(names: &[String]) -> Result<()> {
    if names.len() < 2 {
        return Err(Error::Validation(format!(
            "a session needs at least 2 samples, got {}",
            names.len()
        )));
    }
    let mut seen = HashSet::new();
    for n in names {
        if n.trim().is_empty() {
            return Err(Error::Validation("sample names must be non-empty".into()));
        }
        if !seen.insert(n.as_str()) {
            return Err(Error::Validation(format!("duplicate sample name `{n}`")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPlacement {
    pub sample: String,
    /// Fraction of the sheet width from the left edge, in `[0, 1]`.
    pub x: f64,
    /// Fraction of the sheet height from the bottom edge, in `[0, 1]`.
    pub y: f64,
}

/// One assessor's placements in normalized sheet units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionPayload {
    pub assessor_id: String,
    pub placements: Vec<NamedPlacement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubmitOutcome {
    Accepted,
    Updated,
}

impl SubmissionPayload {
    /// Validates against the session's samples and scales to centimetres.
    pub fn to_tablecloth(&self, sample_names: &[String], sheet: Sheet) -> Result<Tablecloth> {
        if self.assessor_id.trim().is_empty() {
            return Err(Error::Validation("assessor id must be non-empty".into()));
        }
        let index: HashMap<&str, usize> = sample_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut slots: Vec<Option<Point2D>> = vec![None; sample_names.len()];
        for p in &self.placements {
            let &i = index
                .get(p.sample.as_str())
                .ok_or_else(|| Error::Validation(format!("unknown sample `{}`", p.sample)))?;
            if !((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y)) {
                return Err(Error::Validation(format!(
                    "sample `{}` at ({}, {}) is outside the unit square",
                    p.sample, p.x, p.y
                )));
            }
            if slots[i].is_some() {
                return Err(Error::Validation(format!("sample `{}` placed twice", p.sample)));
            }
            slots[i] = Some(Point2D::new(p.x * sheet.width, p.y * sheet.height));
        }
        let missing: Vec<&str> = slots
            .iter()
            .zip(sample_names)
            .filter(|(s, _)| s.is_none())
            .map(|(_, n)| n.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Validation(format!("missing samples: {}", missing.join(", "))));
        }
        Ok(Tablecloth {
            assessor_id: self.assessor_id.clone(),
            sheet,
            placements: slots
                .into_iter()
                .enumerate()
                .map(|(sample, p)| Placement {
                    sample,
                    position: p.expect("checked above"),
                })
                .collect(),
        })
    }
}

/// Directory-backed session store. Writers to the same session are
/// serialized; readers never take a lock.
#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    writers: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            writers: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn writer_lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.writers.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    pub fn create(&self, sample_names: Vec<String>, sheet: Sheet) -> Result<Session> {
        let session = Session::new(sample_names, sheet)?;
        self.save(&session)?;
        Ok(session)
    }

    pub fn save(&self, session: &Session) -> Result<()> {
        if !valid_id(&session.id) {
            return Err(Error::Validation(format!("invalid session id `{}`", session.id)));
        }
        session.validate()?;
        let lock = self.writer_lock(&session.id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        self.write_atomic(session)
    }

    fn write_atomic(&self, session: &Session) -> Result<()> {
        let json = serde_json::to_vec_pretty(session).expect("session serializes");
        let tmp = self.dir.join(format!(".{}.{}.tmp", session.id, uuid::Uuid::new_v4().simple()));
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&json)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
            fs::rename(&tmp, self.path(&session.id))
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        Ok(result?)
    }

    pub fn load(&self, id: &str) -> Result<Session> {
        if !valid_id(id) {
            return Err(Error::UnknownSession(id.to_string()));
        }
        let path = self.path(id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::UnknownSession(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        serde_json::from_slice(&bytes).map_err(|e| Error::CorruptSession {
            path,
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Loads, mutates and atomically rewrites a session under its writer lock.
    pub fn update<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T>) -> Result<(Session, T)> {
        let lock = self.writer_lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut session = self.load(id)?;
        let out = f(&mut session)?;
        session.validate()?;
        self.write_atomic(&session)?;
        Ok((session, out))
    }

    /// Ids of all stored sessions, sorted.
    pub fn list(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".json")) {
                if valid_id(id) {
                    ids.push(id.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("wine{i}")).collect()
    }

    fn payload(assessor: &str, n: usize) -> SubmissionPayload {
        SubmissionPayload {
            assessor_id: assessor.into(),
            placements: (0..n)
                .map(|i| NamedPlacement {
                    sample: format!("wine{}", i + 1),
                    x: (i as f64 * 0.37) % 1.0,
                    y: (i as f64 * 0.61) % 1.0,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_session_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let s = store.create(names(8), Sheet::default()).unwrap();
        assert!(s.tablecloths.is_empty());
        assert_eq!(store.load(&s.id).unwrap(), s);
    }

    #[test]
    fn large_session_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let mut s = store.create(names(10), Sheet::default()).unwrap();
        for a in 0..24 {
            s.submit(&payload(&format!("consumer{a}"), 10)).unwrap();
        }
        store.save(&s).unwrap();
        let loaded = store.load(&s.id).unwrap();
        assert_eq!(loaded.tablecloths.len(), 24);
        assert_eq!(loaded, s);
    }

    #[test]
    fn missing_and_corrupt_sessions() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        assert!(matches!(store.load("nope"), Err(Error::UnknownSession(_))));
        assert!(matches!(store.load("../etc/passwd"), Err(Error::UnknownSession(_))));
        fs::write(dir.path().join("broken.json"), "{\n  \"id\": \"broken\",\n  oops").unwrap();
        match store.load("broken") {
            Err(Error::CorruptSession { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn create_rejects_bad_names_and_ids_differ() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        assert!(store.create(names(1), Sheet::default()).is_err());
        assert!(store.create(vec!["a".into(), "a".into()], Sheet::default()).is_err());
        let a = store.create(names(3), Sheet::default()).unwrap();
        let b = store.create(names(3), Sheet::default()).unwrap();
        assert_ne!(a.id, b.id);
        assert_eq!(store.list().unwrap().len(), 2);
    }

    #[test]
    fn submissions_replace_by_assessor() {
        let mut s = Session::new(names(8), Sheet::default()).unwrap();
        assert_eq!(s.submit(&payload("ana", 8)).unwrap(), SubmitOutcome::Accepted);
        assert_eq!(s.tablecloths.len(), 1);
        let mut again = payload("ana", 8);
        again.placements[0].x = 0.5;
        assert_eq!(s.submit(&again).unwrap(), SubmitOutcome::Updated);
        assert_eq!(s.tablecloths.len(), 1);
        assert_eq!(s.tablecloths[0].placements[0].position.x, 30.0);
    }

    #[test]
    fn invalid_submissions() {
        let mut s = Session::new(names(8), Sheet::default()).unwrap();
        let mut p = payload("ana", 8);
        p.placements.remove(3);
        let err = s.submit(&p).unwrap_err().to_string();
        assert!(err.contains("wine4"), "{err}");

        let mut p = payload("ana", 8);
        p.placements[0].y = 1.2;
        assert!(s.submit(&p).is_err());

        let mut p = payload("ana", 8);
        p.placements[0].sample = "beer".into();
        assert!(s.submit(&p).is_err());

        let mut p = payload("ana", 8);
        p.placements[1].sample = "wine1".into();
        assert!(s.submit(&p).is_err());
        assert!(s.tablecloths.is_empty());
    }

    #[test]
    fn update_is_serialized_per_session() {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(SessionStore::open(dir.path()).unwrap());
        let s = store.create(names(4), Sheet::default()).unwrap();
        let handles: Vec<_> = (0..8)
            .map(|a| {
                let store = store.clone();
                let id = s.id.clone();
                std::thread::spawn(move || {
                    store.update(&id, |s| s.submit(&payload(&format!("a{a}"), 4))).unwrap();
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(store.load(&s.id).unwrap().tablecloths.len(), 8);
        // No temporary files left behind.
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
