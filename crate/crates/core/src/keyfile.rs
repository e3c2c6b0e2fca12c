//! JSON key file holding the secret key and the deployment parameters.
//!
//! Loading re-derives every structural invariant (s = g^q1, h = u^q2,
//! A·B ≡ 0 mod q1, ...) and checks a SHA-256 checksum over the remaining
//! fields, so any edited field is rejected.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ces::{CesError, KeyParts, Layout, SecretKey};
use crate::pairing::{is_prime, Backend, GElement, Group, GroupDescriptor, GroupParams};
use crate::protocol::{DeploymentConfig, ProtocolError, ProtocolKind};
use crate::wire::{b64, unb64};

#[derive(Debug, Error)]
pub enum KeyFileError {
    #[error("cannot access key file: {0}")]
    Io(#[from] std::io::Error),
    #[error("key file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("key file field {field}: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("key file checksum mismatch (file was modified)")]
    Checksum,
    #[error("inconsistent key: {0}")]
    Key(#[from] CesError),
    #[error("inconsistent deployment: {0}")]
    Config(#[from] ProtocolError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyFile {
    pub lambda: u32,
    pub backend: Backend,
    pub q1: String,
    pub q2: String,
    #[serde(rename = "N")]
    pub n: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    pub g: String,
    pub u: String,
    pub s: String,
    pub h: String,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    pub alpha: String,
    pub beta: String,
    pub aes_key: String,
    pub layout: Layout,
    pub d: usize,
    pub v: u64,
    pub x_max: u64,
    pub protocol: ProtocolKind,
    #[serde(rename = "E_max")]
    pub e_max: u32,
    #[serde(default)]
    pub b_c: Option<u64>,
    pub offset: Vec<i64>,
    /// Hex SHA-256 of the document with this field empty.
    pub checksum: String,
}

fn field_err(field: &'static str, reason: impl ToString) -> KeyFileError {
    KeyFileError::Field {
        field,
        reason: reason.to_string(),
    }
}

fn int(field: &'static str, s: &str) -> Result<BigUint, KeyFileError> {
    s.parse::<BigUint>()
        .map_err(|_| field_err(field, "not a decimal integer"))
}

fn element(group: &Group, field: &'static str, s: &str) -> Result<GElement, KeyFileError> {
    let bytes = unb64(s).map_err(|e| field_err(field, e))?;
    group.decode_g(&bytes).map_err(|e| field_err(field, e))
}

impl KeyFile {
    pub fn from_key(sk: &SecretKey, cfg: &DeploymentConfig) -> Self {
        let group = sk.group();
        let desc = group.descriptor();
        let mut kf = KeyFile {
            lambda: sk.params().lambda,
            backend: desc.backend,
            q1: sk.params().q1.to_string(),
            q2: sk.params().q2.to_string(),
            n: desc.n,
            p: desc.p,
            l: desc.l,
            g: b64(&group.encode_g(sk.g())),
            u: b64(&group.encode_g(sk.u())),
            s: b64(&group.encode_g(sk.s())),
            h: b64(&group.encode_g(sk.h())),
            a: sk.a().iter().map(ToString::to_string).collect(),
            b: sk.b().iter().map(ToString::to_string).collect(),
            alpha: sk.alpha().to_string(),
            beta: sk.beta().to_string(),
            aes_key: b64(sk.aes_key()),
            layout: cfg.layout,
            d: cfg.d,
            v: cfg.v,
            x_max: cfg.x_max,
            protocol: cfg.protocol,
            e_max: cfg.e_max,
            b_c: cfg.b_c,
            offset: cfg.offset.clone(),
            checksum: String::new(),
        };
        kf.checksum = kf.compute_checksum();
        kf
    }

    pub fn compute_checksum(&self) -> String {
        let mut copy = self.clone();
        copy.checksum.clear();
        let bytes = serde_json::to_vec(&copy).expect("key files always serialize");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Rebuilds and verifies the key and the deployment.
    pub fn to_key(&self) -> Result<(SecretKey, DeploymentConfig), KeyFileError> {
        if self.checksum != self.compute_checksum() {
            return Err(KeyFileError::Checksum);
        }
        self.to_key_unchecked()
    }

    /// Like [`KeyFile::to_key`] but without the checksum; structural checks still apply.
    pub fn to_key_unchecked(&self) -> Result<(SecretKey, DeploymentConfig), KeyFileError> {
        let q1 = int("q1", &self.q1)?;
        let q2 = int("q2", &self.q2)?;
        if q1 == q2 || !is_prime(&q1) || !is_prime(&q2) {
            return Err(field_err("q1/q2", "must be distinct primes"));
        }
        let group = Group::from_descriptor(&GroupDescriptor {
            backend: self.backend,
            n: self.n.clone(),
            p: self.p.clone(),
            l: self.l.clone(),
        })
        .map_err(|e| field_err("N", e))?;
        let parse_vec = |field: &'static str, xs: &[String]| xs.iter().map(|x| int(field, x)).collect::<Result<Vec<_>, _>>();
        let aes: [u8; 32] = unb64(&self.aes_key)
            .map_err(|e| field_err("aes_key", e))?
            .try_into()
            .map_err(|_| field_err("aes_key", "must be 32 bytes"))?;
        let parts = KeyParts {
            params: GroupParams {
                lambda: self.lambda,
                q1,
                q2,
                group: group.clone(),
            },
            g: element(&group, "g", &self.g)?,
            u: element(&group, "u", &self.u)?,
            s: element(&group, "s", &self.s)?,
            h: element(&group, "h", &self.h)?,
            a: parse_vec("A", &self.a)?,
            b: parse_vec("B", &self.b)?,
            alpha: int("alpha", &self.alpha)?,
            beta: int("beta", &self.beta)?,
            aes_key: aes,
            layout: self.layout,
            d: self.d,
            v: self.v,
            x_max: self.x_max,
        };
        let sk = SecretKey::from_parts(parts)?;
        let cfg = DeploymentConfig {
            protocol: self.protocol,
            layout: self.layout,
            d: self.d,
            v: self.v,
            x_max: self.x_max,
            e_max: self.e_max,
            b_c: self.b_c,
            backend: self.backend,
            offset: self.offset.clone(),
        };
        cfg.validate()?;
        cfg.check_key(&sk)?;
        Ok((sk, cfg))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("key files always serialize")
    }

    pub fn save(&self, path: &Path) -> Result<(), KeyFileError> {
        let mut opts = fs::OpenOptions::new();
        opts.write(true).create(true).truncate(true);
        #[cfg(unix)]
        {
            use std::os::unix::fs::OpenOptionsExt;
            opts.mode(0o600);
        }
        let mut f = opts.open(path)?;
        f.write_all(self.to_json().as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, KeyFileError> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// Loads and verifies a key file in one step.
pub fn load_key(path: &Path) -> Result<(SecretKey, DeploymentConfig), KeyFileError> {
    KeyFile::load(path)?.to_key()
}
