//! The untrusted server: stores encrypted tuples and blobs, evaluates
//! encrypted queries against the lookup table, and persists every
//! acknowledged mutation.
//!
//! The server only ever sees the group description, the hash id, the level
//! count and ciphertexts.

mod net;
mod persist;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use rayon::prelude::*;
use serde_json::Value;
use thiserror::Error;

use crate::ces::{compute, lookup_contains, EncryptedTuple, LookupTable, HASH_ID};
use crate::pairing::{Group, GroupDescriptor};
use crate::wire::{b64, decode_slots, encode_slots, unb64, ErrorKind, Match, Request, Response, MESSAGE_TYPES};

pub use net::{handle_connection, serve, state_dir_from, STATE_DIR_ENV};
use persist::Persistence;

/// Mutations between two snapshots.
pub const DEFAULT_SNAPSHOT_EVERY: u64 = 1024;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt state directory: {0}")]
    Corrupt(String),
}

type Failure = (ErrorKind, String);

fn fail<T>(kind: ErrorKind, msg: impl Into<String>) -> Result<T, Failure> {
    Err((kind, msg.into()))
}

#[derive(Clone, Debug)]
struct Pinned {
    descriptor: GroupDescriptor,
    hash: String,
    levels: u32,
    group: Group,
}

/// A validated mutation ready to be logged and applied.
enum Mutation {
    Pin(Box<Pinned>),
    Lookup(LookupTable),
    Tuple { level: u32, id: u64, tuple: EncryptedTuple },
    Store { id: u64, blob: Vec<u8> },
    Delete(u64),
    /// Re-sent identical parameters; acknowledged without a state change.
    Unchanged,
}

/// In-memory server state. Holds no secret key material.
#[derive(Default)]
pub struct ServerState {
    pinned: Option<Pinned>,
    lookup: Option<LookupTable>,
    store: BTreeMap<u64, Vec<u8>>,
    tuples: Vec<BTreeMap<u64, EncryptedTuple>>,
    slot_count: Option<usize>,
}

impl ServerState {
    fn pinned(&self) -> Result<&Pinned, Failure> {
        self.pinned
            .as_ref()
            .ok_or((ErrorKind::NotPinned, "send hello first".to_string()))
    }

    fn check_level(&self, level: u32) -> Result<&Pinned, Failure> {
        let p = self.pinned()?;
        if level >= p.levels {
            return fail(ErrorKind::UnknownLevel, format!("level {level} (levels: {})", p.levels));
        }
        Ok(p)
    }

    fn check_slot_count(&self, n: usize) -> Result<(), Failure> {
        match self.slot_count {
            Some(want) if want != n => fail(ErrorKind::Malformed, format!("expected {want} slots, got {n}")),
            _ if n == 0 => fail(ErrorKind::Malformed, "no slots"),
            _ => Ok(()),
        }
    }

    fn prepare(&self, req: &Request) -> Result<Mutation, Failure> {
        match req {
            Request::Hello { group, hash, levels } => {
                if let Some(p) = &self.pinned {
                    return if &p.descriptor == group && &p.hash == hash && p.levels == *levels {
                        Ok(Mutation::Unchanged)
                    } else {
                        fail(ErrorKind::ParamMismatch, "parameters differ from the pinned ones")
                    };
                }
                if hash != HASH_ID {
                    return fail(ErrorKind::ParamMismatch, format!("unsupported hash '{hash}'"));
                }
                if *levels == 0 {
                    return fail(ErrorKind::Malformed, "levels must be at least 1");
                }
                let g = Group::from_descriptor(group).map_err(|e| (ErrorKind::ParamMismatch, e.to_string()))?;
                Ok(Mutation::Pin(Box::new(Pinned {
                    descriptor: group.clone(),
                    hash: hash.clone(),
                    levels: *levels,
                    group: g,
                })))
            }
            Request::PutLookup { v, digests } => {
                self.pinned()?;
                let bytes = unb64(digests).map_err(|e| (ErrorKind::Malformed, format!("digests: {e}")))?;
                let table = LookupTable::from_bytes(&bytes).map_err(|e| (ErrorKind::Malformed, e.to_string()))?;
                if table.v() != *v {
                    return fail(ErrorKind::Malformed, format!("table holds {} entries, v = {v}", table.len()));
                }
                match &self.lookup {
                    Some(t) if *t == table => Ok(Mutation::Unchanged),
                    Some(_) => fail(ErrorKind::Conflict, "a different lookup table is installed"),
                    None => Ok(Mutation::Lookup(table)),
                }
            }
            Request::PutTuple { level, id, slots } => {
                let p = self.check_level(*level)?;
                if !self.store.contains_key(id) {
                    return fail(ErrorKind::NotFound, format!("no stored record for id {id}"));
                }
                if self.tuples.get(*level as usize).is_some_and(|m| m.contains_key(id)) {
                    return fail(ErrorKind::Conflict, format!("id {id} already present at level {level}"));
                }
                self.check_slot_count(slots.len())?;
                let slots = decode_slots(&p.group, slots).map_err(|e| (ErrorKind::InvalidElement, e.to_string()))?;
                Ok(Mutation::Tuple {
                    level: *level,
                    id: *id,
                    tuple: EncryptedTuple { slots },
                })
            }
            Request::PutStore { id, blob } => {
                self.pinned()?;
                if self.store.contains_key(id) {
                    return fail(ErrorKind::Conflict, format!("id {id} already exists"));
                }
                let blob = unb64(blob).map_err(|e| (ErrorKind::Malformed, format!("blob: {e}")))?;
                Ok(Mutation::Store { id: *id, blob })
            }
            Request::Delete { id } => {
                if !self.store.contains_key(id) {
                    return fail(ErrorKind::NotFound, format!("id {id}"));
                }
                Ok(Mutation::Delete(*id))
            }
            Request::Query { .. } => fail(ErrorKind::Malformed, "query is not a mutation"),
        }
    }

    fn apply(&mut self, m: Mutation) {
        match m {
            Mutation::Pin(p) => {
                self.tuples = vec![BTreeMap::new(); p.levels as usize];
                self.pinned = Some(*p);
            }
            Mutation::Lookup(t) => self.lookup = Some(t),
            Mutation::Tuple { level, id, tuple } => {
                self.slot_count.get_or_insert(tuple.slots.len());
                self.tuples[level as usize].insert(id, tuple);
            }
            Mutation::Store { id, blob } => {
                self.store.insert(id, blob);
            }
            Mutation::Delete(id) => {
                self.store.remove(&id);
                for level in &mut self.tuples {
                    level.remove(&id);
                }
            }
            Mutation::Unchanged => {}
        }
    }

    fn query(&self, level: u32, slots: &[String], counter: &AtomicU64) -> Result<Vec<Match>, Failure> {
        let p = self.check_level(level)?;
        let table = self
            .lookup
            .as_ref()
            .ok_or((ErrorKind::NotPinned, "no lookup table installed".to_string()))?;
        self.check_slot_count(slots.len())?;
        let q = crate::ces::EncryptedQuery {
            slots: decode_slots(&p.group, slots).map_err(|e| (ErrorKind::InvalidElement, e.to_string()))?,
            level,
        };
        let tuples: Vec<(&u64, &EncryptedTuple)> = self.tuples[level as usize].iter().collect();
        let hits: Vec<u64> = tuples
            .par_iter()
            .filter_map(|(id, t)| {
                counter.fetch_add(1, Ordering::Relaxed);
                let value = compute(&p.group, t, &q).ok()?;
                lookup_contains(table, &p.group, &value).then_some(**id)
            })
            .collect();
        hits.into_iter()
            .map(|id| match self.store.get(&id) {
                Some(blob) => Ok(Match { id, blob: b64(blob) }),
                None => fail(ErrorKind::Integrity, format!("no stored record for matched id {id}")),
            })
            .collect()
    }

    /// Messages that rebuild this state from scratch.
    fn to_messages(&self) -> Vec<Request> {
        let Some(p) = &self.pinned else {
            return Vec::new();
        };
        let mut out = vec![Request::Hello {
            group: p.descriptor.clone(),
            hash: p.hash.clone(),
            levels: p.levels,
        }];
        if let Some(t) = &self.lookup {
            out.push(Request::PutLookup {
                v: t.v(),
                digests: b64(&t.to_bytes()),
            });
        }
        for (id, blob) in &self.store {
            out.push(Request::PutStore { id: *id, blob: b64(blob) });
            for (level, tuples) in self.tuples.iter().enumerate() {
                if let Some(t) = tuples.get(id) {
                    out.push(Request::PutTuple {
                        level: level as u32,
                        id: *id,
                        slots: encode_slots(&p.group, &t.slots),
                    });
                }
            }
        }
        out
    }

    pub fn record_count(&self) -> usize {
        self.store.len()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.tuples.iter().map(BTreeMap::len).collect()
    }
}

struct Inner {
    state: ServerState,
    persist: Option<Persistence>,
}

pub struct Server {
    inner: RwLock<Inner>,
    computes: AtomicU64,
}

impl Server {
    /// A server without persistence.
    pub fn in_memory() -> Self {
        Self {
            inner: RwLock::new(Inner {
                state: ServerState::default(),
                persist: None,
            }),
            computes: AtomicU64::new(0),
        }
    }

    /// Opens (or creates) a state directory and replays it.
    pub fn open(dir: &Path) -> Result<Self, ServerError> {
        Self::open_with(dir, DEFAULT_SNAPSHOT_EVERY)
    }

    pub fn open_with(dir: &Path, snapshot_every: u64) -> Result<Self, ServerError> {
        let (persist, replay) = Persistence::open(dir, snapshot_every)?;
        let mut state = ServerState::default();
        for (i, req) in replay.iter().enumerate() {
            let m = state
                .prepare(req)
                .map_err(|(k, msg)| ServerError::Corrupt(format!("entry {i} rejected on replay ({k:?}): {msg}")))?;
            state.apply(m);
        }
        log::info!(
            "state restored from {}: {} records, levels {:?}",
            dir.display(),
            state.record_count(),
            state.level_sizes()
        );
        Ok(Self {
            inner: RwLock::new(Inner {
                state,
                persist: Some(persist),
            }),
            computes: AtomicU64::new(0),
        })
    }

    /// Total compute() evaluations performed by queries so far.
    pub fn compute_calls(&self) -> u64 {
        self.computes.load(Ordering::Relaxed)
    }

    pub fn record_count(&self) -> usize {
        self.read().state.record_count()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.read().state.level_sizes()
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Inner> {
        self.inner.read().unwrap_or_else(|e| e.into_inner())
    }

    /// Handles one raw message line and returns the reply line.
    pub fn handle_line(&self, line: &str) -> String {
        let reply = match parse_request(line) {
            Ok(req) => self.handle(&req),
            Err(resp) => resp,
        };
        reply.to_line()
    }

    pub fn handle(&self, req: &Request) -> Response {
        let result = match req {
            Request::Query { level, slots } => self
                .read()
                .state
                .query(*level, slots, &self.computes)
                .map(|matches| Response::Result { matches }),
            _ => self.mutate(req).map(|_| Response::Ack),
        };
        result.unwrap_or_else(|(kind, message)| Response::Error { kind, message })
    }

    fn mutate(&self, req: &Request) -> Result<(), Failure> {
        let mut guard = self.inner.write().unwrap_or_else(|e| e.into_inner());
        let inner = &mut *guard;
        let m = inner.state.prepare(req)?;
        if matches!(m, Mutation::Unchanged) {
            return Ok(());
        }
        if let Some(p) = &mut inner.persist {
            p.append(req).map_err(|e| (ErrorKind::Storage, e.to_string()))?;
        }
        inner.state.apply(m);
        if let Some(p) = &mut inner.persist {
            if p.snapshot_due() {
                // the mutation is already durable in the log
                if let Err(e) = p.snapshot(&inner.state.to_messages()) {
                    log::warn!("snapshot failed: {e}");
                }
            }
        }
        Ok(())
    }
}

fn parse_request(line: &str) -> Result<Request, Response> {
    let value: Value =
        serde_json::from_str(line.trim()).map_err(|e| Response::error(ErrorKind::Malformed, format!("invalid JSON: {e}")))?;
    let ty = value
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Response::error(ErrorKind::Malformed, "missing string field 'type'"))?;
    if !MESSAGE_TYPES.contains(&ty) {
        return Err(Response::error(ErrorKind::UnknownType, format!("unknown message type '{ty}'")));
    }
    serde_json::from_value(value).map_err(|e| Response::error(ErrorKind::Malformed, e.to_string()))
}
