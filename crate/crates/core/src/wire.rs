//! Newline-delimited JSON messages exchanged between clients and the server.
//! Binary values travel as standard base64.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::ces::{EncryptedQuery, EncryptedTuple};
use crate::pairing::{GElement, Group, GroupDescriptor, PairingError};

pub const MESSAGE_TYPES: [&str; 6] = ["hello", "put_lookup", "put_tuple", "put_store", "delete", "query"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    /// Pins the group, hash function and number of coarsity levels.
    Hello {
        group: GroupDescriptor,
        hash: String,
        levels: u32,
    },
    /// Lookup table in file format (count followed by sorted digests).
    PutLookup { v: u64, digests: String },
    PutTuple { level: u32, id: u64, slots: Vec<String> },
    PutStore { id: u64, blob: String },
    Delete { id: u64 },
    Query { level: u32, slots: Vec<String> },
}

impl Request {
    pub fn is_mutation(&self) -> bool {
        !matches!(self, Request::Query { .. })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("requests always serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub id: u64,
    pub blob: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    Ack,
    Result { matches: Vec<Match> },
    Error { kind: ErrorKind, message: String },
}

impl Response {
    pub fn error(kind: ErrorKind, message: impl Into<String>) -> Self {
        Response::Error {
            kind,
            message: message.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("responses always serialize")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Malformed,
    UnknownType,
    NotPinned,
    ParamMismatch,
    Conflict,
    NotFound,
    UnknownLevel,
    InvalidElement,
    Integrity,
    Storage,
}

pub fn b64(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

pub fn unb64(s: &str) -> Result<Vec<u8>, base64::DecodeError> {
    STANDARD.decode(s)
}

pub fn encode_slots(group: &Group, slots: &[GElement]) -> Vec<String> {
    slots.iter().map(|x| b64(&group.encode_g(x))).collect()
}

pub fn decode_slots(group: &Group, slots: &[String]) -> Result<Vec<GElement>, PairingError> {
    slots
        .iter()
        .map(|s| {
            let bytes = unb64(s).map_err(|e| PairingError::Encoding(format!("base64: {e}")))?;
            group.decode_g(&bytes)
        })
        .collect()
}

pub fn put_tuple(group: &Group, level: u32, id: u64, tuple: &EncryptedTuple) -> Request {
    Request::PutTuple {
        level,
        id,
        slots: encode_slots(group, &tuple.slots),
    }
}

pub fn query(group: &Group, q: &EncryptedQuery) -> Request {
    Request::Query {
        level: q.level,
        slots: encode_slots(group, &q.slots),
    }
}
