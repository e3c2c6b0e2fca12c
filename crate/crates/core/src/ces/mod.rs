//! Component encryption: slot-wise encryption of data/query components such
//! that one pairing per slot followed by a product in 𝔾_T yields
//! e(s,s)^{α(m·q + β)}, which the server compares against a hashed lookup table.

pub mod bgn;
mod keys;
mod lookup;

use num_bigint::{BigInt, BigUint};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pairing::{GElement, Group, GtElement, PairingError};

pub use keys::{keygen, CesConfig, KeyParts, PublicParams, SecretKey, HASH_ID};
pub use lookup::{
    create_lookup_table, digest_gt, entry_exponent, lookup_contains, Digest, LookupTable,
};

#[derive(Debug, Error)]
pub enum CesError {
    #[error("correctness margin violated: q2 must exceed {bound} (2*(v + d*x_max^2)), got q2 = {q2}")]
    Margin { bound: BigUint, q2: BigUint },
    #[error("lookup bound v = {v} must be smaller than q2")]
    TableTooLarge { v: u64 },
    #[error("component length {got} does not match layout length {want}")]
    LengthMismatch { want: usize, got: usize },
    #[error("hash collision while building the lookup table at i = {0}")]
    HashCollision(u64),
    #[error("malformed lookup table: {0}")]
    TableFormat(String),
    #[error("value not found within decryption bound {0}")]
    NotFound(u64),
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("unsupported configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Pairing(#[from] PairingError),
}

/// Slot layout of data and query components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// {m_1..m_d, 1, ||m||²}: d + 2 slots, sphere queries only.
    Shrq,
    /// {m_1..m_d, 1, m_1²..m_d²}: 2d + 1 slots, sphere and range queries.
    Unified,
}

impl Layout {
    pub fn len(self, d: usize) -> usize {
        match self {
            Layout::Shrq => d + 2,
            Layout::Unified => 2 * d + 1,
        }
    }

    /// Index of the constant-1 slot of the data component.
    pub fn const_slot(self, d: usize) -> usize {
        d
    }
}

impl std::str::FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shrq" => Ok(Layout::Shrq),
            "unified" => Ok(Layout::Unified),
            other => Err(format!("unknown layout '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataComponent {
    pub entries: Vec<i64>,
    pub const_slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryComponent {
    pub entries: Vec<i64>,
    pub const_slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedTuple {
    pub slots: Vec<GElement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedQuery {
    pub slots: Vec<GElement>,
    /// Coarsity exponent of the store the query targets.
    pub level: u32,
}

/// m'_i = s^{m_i} · h^{r_m·A_i} with fresh r_m.
pub fn tuple_encrypt<R: Rng + ?Sized>(
    sk: &SecretKey,
    c: &DataComponent,
    rng: &mut R,
) -> Result<EncryptedTuple, CesError> {
    let r_m = sk.group().random_scalar(rng);
    tuple_encrypt_with_blinding(sk, c, &r_m)
}

/// Deterministic variant of [`tuple_encrypt`] with caller-chosen blinding r_m.
pub fn tuple_encrypt_with_blinding(
    sk: &SecretKey,
    c: &DataComponent,
    r_m: &BigUint,
) -> Result<EncryptedTuple, CesError> {
    check_len(sk, c.entries.len())?;
    let g = sk.group();
    let slots = c
        .entries
        .iter()
        .zip(sk.a())
        .map(|(&m, a)| {
            let msg = g.g_pow(sk.s(), &g.reduce_i64(m));
            let blind = g.g_pow(sk.h(), &((r_m * a) % g.order()));
            g.g_mul(&msg, &blind)
        })
        .collect();
    Ok(EncryptedTuple { slots })
}

/// q'_i = s^{q_i·α} · h^{r_q·B_i}, with β added to the constant slot before
/// scaling by α. α and β are long-term; r_q is fresh per query.
pub fn query_encrypt<R: Rng + ?Sized>(
    sk: &SecretKey,
    c: &QueryComponent,
    level: u32,
    rng: &mut R,
) -> Result<EncryptedQuery, CesError> {
    let r_q = sk.group().random_scalar(rng);
    query_encrypt_with_blinding(sk, c, level, &r_q)
}

pub fn query_encrypt_with_blinding(
    sk: &SecretKey,
    c: &QueryComponent,
    level: u32,
    r_q: &BigUint,
) -> Result<EncryptedQuery, CesError> {
    check_len(sk, c.entries.len())?;
    let g = sk.group();
    let slots = c
        .entries
        .iter()
        .zip(sk.b())
        .enumerate()
        .map(|(i, (&q, b))| {
            let mut coeff = BigInt::from(q);
            if i == c.const_slot {
                coeff += BigInt::from(sk.beta().clone());
            }
            let exp = (g.reduce(&coeff) * sk.alpha()) % g.order();
            let msg = g.g_pow(sk.s(), &exp);
            let blind = g.g_pow(sk.h(), &((r_q * b) % g.order()));
            g.g_mul(&msg, &blind)
        })
        .collect();
    Ok(EncryptedQuery { slots, level })
}

/// T = Π_i e(m'_i, q'_i) = e(s,s)^{α(m·q + β)}.
pub fn compute(
    group: &Group,
    tuple: &EncryptedTuple,
    query: &EncryptedQuery,
) -> Result<GtElement, CesError> {
    if tuple.slots.len() != query.slots.len() {
        return Err(CesError::LengthMismatch {
            want: tuple.slots.len(),
            got: query.slots.len(),
        });
    }
    Ok(group.pair_product(tuple.slots.iter().zip(&query.slots)))
}

/// e(s,s)^{α(k + β)}: the value `compute` yields for a dot product equal to `k`.
pub fn expected_value(sk: &SecretKey, k: i64) -> GtElement {
    let g = sk.group();
    let e_ss = g.pair(sk.s(), sk.s());
    let exp = BigInt::from(k) + BigInt::from(sk.beta().clone());
    g.gt_pow(&e_ss, &((g.reduce(&exp) * sk.alpha()) % g.order()))
}

fn check_len(sk: &SecretKey, got: usize) -> Result<(), CesError> {
    let want = sk.slot_count();
    if got == want {
        Ok(())
    } else {
        Err(CesError::LengthMismatch { want, got })
    }
}
