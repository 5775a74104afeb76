//! JSON-lines cache of LLM completions and an offline oracle reading it.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::prompt::PROMPT_VERSION;
use super::{parse_steps, DecompositionOracle, OracleFailure, OracleRequest, OracleResponse};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub prompt_version: String,
    pub request_summary: String,
    pub completion: String,
    pub timestamp: u64,
}

/// Hex SHA-256 over the task, the sorted state and the template version.
pub fn request_digest(req: &OracleRequest, version: &str) -> String {
    let mut h = Sha256::new();
    h.update(req.task.to_string().as_bytes());
    h.update(b"\n");
    for a in req.state.iter() {
        h.update(a.to_string().as_bytes());
        h.update(b";");
    }
    h.update(b"\n");
    h.update(version.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Completion cache backed by an append-only JSON-lines file. Reads and
/// appends go through one lock, so concurrent writers never interleave
/// partial lines and a lookup after an append sees it.
#[derive(Debug)]
pub struct ReplayCache {
    path: Option<PathBuf>,
    entries: Mutex<BTreeMap<String, CacheRecord>>,
}

impl ReplayCache {
    /// In-memory cache with no backing file.
    pub fn in_memory() -> Self {
        ReplayCache {
            path: None,
            entries: Mutex::new(BTreeMap::new()),
        }
    }

    /// Opens (or prepares to create) the cache file. Later lines win.
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = BTreeMap::new();
        match std::fs::read_to_string(&path) {
            Ok(text) => {
                for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                    let rec: CacheRecord = serde_json::from_str(line).map_err(|e| {
                        io::Error::new(
                            io::ErrorKind::InvalidData,
                            format!("{}:{}: {e}", path.display(), i + 1),
                        )
                    })?;
                    entries.insert(rec.key.clone(), rec);
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(ReplayCache {
            path: Some(path),
            entries: Mutex::new(entries),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lookup(&self, req: &OracleRequest) -> Option<CacheRecord> {
        let key = request_digest(req, PROMPT_VERSION);
        self.entries.lock().expect("cache lock").get(&key).cloned()
    }

    pub fn store(&self, req: &OracleRequest, completion: &str) -> io::Result<()> {
        let rec = CacheRecord {
            key: request_digest(req, PROMPT_VERSION),
            prompt_version: PROMPT_VERSION.to_string(),
            request_summary: req.task.to_string(),
            completion: completion.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut entries = self.entries.lock().expect("cache lock");
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            let line = serde_json::to_string(&rec).map_err(io::Error::other)?;
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        entries.insert(rec.key.clone(), rec);
        Ok(())
    }
}

/// Offline oracle answering only from the cache; a miss is a transport failure.
#[derive(Debug, Clone)]
pub struct ReplayOracle {
    cache: Arc<ReplayCache>,
}

impl ReplayOracle {
    pub fn new(cache: Arc<ReplayCache>) -> Self {
        ReplayOracle { cache }
    }
}

/// Interprets a final completion: `NONE` is a refusal, anything else must parse.
pub(crate) fn interpret_completion(text: &str) -> Result<Vec<crate::domain::Task>, OracleFailure> {
    if text.trim() == "NONE" {
        return Err(OracleFailure::Refused("oracle answered NONE".into()));
    }
    parse_steps(text)
}

impl DecompositionOracle for ReplayOracle {
    fn propose(&self, req: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        let rec = self
            .cache
            .lookup(req)
            .ok_or_else(|| OracleFailure::Transport(format!("replay cache miss for {} (offline)", req.task)))?;
        let steps = interpret_completion(&rec.completion)?;
        Ok(OracleResponse {
            steps,
            raw_text: rec.completion,
            transcript: Vec::new(),
        })
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{parse_atoms, AnnotatedTask, Task};
    use crate::symbolic::State;

    fn req(state: &str) -> OracleRequest {
        let task = Task::compound("scanLocation", &["Zulu"]);
        OracleRequest {
            annotated: AnnotatedTask {
                head: task.clone(),
                preconds: vec![],
                effects: vec![],
            },
            task,
            state: State::from_atoms(parse_atoms(state).unwrap()),
            operator_catalog: vec![],
        }
    }

    #[test]
    fn digest_depends_on_state_and_version() {
        let a = request_digest(&req("p(a)"), "v1");
        assert_eq!(a, request_digest(&req("p(a)"), "v1"));
        assert_ne!(a, request_digest(&req("p(b)"), "v1"));
        assert_ne!(a, request_digest(&req("p(a)"), "v2"));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn miss_is_transport_and_hit_replays() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let cache = Arc::new(ReplayCache::open(&path).unwrap());
        let oracle = ReplayOracle::new(cache.clone());
        assert!(matches!(oracle.propose(&req("p(a)")), Err(OracleFailure::Transport(_))));
        cache.store(&req("p(a)"), "```\n!scanArea(Zulu)\n```").unwrap();
        assert_eq!(oracle.propose(&req("p(a)")).unwrap().steps.len(), 1);

        let reopened = ReplayCache::open(&path).unwrap();
        assert_eq!(reopened.len(), 1);
        let rec = reopened.lookup(&req("p(a)")).unwrap();
        assert_eq!(rec.prompt_version, PROMPT_VERSION);
        assert_eq!(rec.request_summary, "scanLocation(Zulu)");
    }

    #[test]
    fn none_is_refusal() {
        let cache = Arc::new(ReplayCache::in_memory());
        cache.store(&req(""), "NONE").unwrap();
        assert!(matches!(
            ReplayOracle::new(cache).propose(&req("")),
            Err(OracleFailure::Refused(_))
        ));
    }

    #[test]
    fn concurrent_appends_stay_line_atomic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let cache = Arc::new(ReplayCache::open(&path).unwrap());
        std::thread::scope(|s| {
            for i in 0..8 {
                let cache = cache.clone();
                s.spawn(move || {
                    for j in 0..10 {
                        cache.store(&req(&format!("p(t{i}_{j})")), "!a(b)").unwrap();
                    }
                });
            }
        });
        assert_eq!(ReplayCache::open(&path).unwrap().len(), 80);
    }
}
