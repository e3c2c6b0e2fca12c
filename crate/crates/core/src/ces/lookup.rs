use std::collections::BTreeSet;

use num_bigint::BigUint;
use sha2::{Digest as _, Sha256};

use super::{CesError, SecretKey};
use crate::pairing::{Group, GtElement};

pub type Digest = [u8; 32];

/// Hashes of e(s,s)^{(i+β)α} for i ∈ [0, v].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookupTable {
    digests: BTreeSet<Digest>,
    v: u64,
}

pub fn digest_gt(group: &Group, t: &GtElement) -> Digest {
    Sha256::digest(group.encode_gt(t)).into()
}

pub fn create_lookup_table(sk: &SecretKey, v: u64) -> Result<LookupTable, CesError> {
    let g = sk.group();
    let base = g.gt_pow(&g.pair(sk.s(), sk.s()), sk.alpha());
    // e(s,s)^{βα}, then multiply by e(s,s)^α per step
    let mut cur = g.gt_pow(&base, sk.beta());
    let mut digests = BTreeSet::new();
    for i in 0..=v {
        if !digests.insert(digest_gt(g, &cur)) {
            return Err(CesError::HashCollision(i));
        }
        cur = g.gt_mul(&cur, &base);
    }
    Ok(LookupTable { digests, v })
}

pub fn lookup_contains(table: &LookupTable, group: &Group, t: &GtElement) -> bool {
    table.contains_digest(&digest_gt(group, t))
}

impl LookupTable {
    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn len(&self) -> usize {
        self.digests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digests.is_empty()
    }

    pub fn contains_digest(&self, d: &Digest) -> bool {
        self.digests.contains(d)
    }

    /// 8-byte big-endian count followed by the sorted raw digests.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 32 * self.digests.len());
        out.extend_from_slice(&(self.digests.len() as u64).to_be_bytes());
        for d in &self.digests {
            out.extend_from_slice(d);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CesError> {
        let bad = |m: &str| CesError::TableFormat(m.to_string());
        if bytes.len() < 8 {
            return Err(bad("missing count prefix"));
        }
        let count = u64::from_be_bytes(bytes[..8].try_into().unwrap());
        let body = &bytes[8..];
        if count == 0 || body.len() as u128 != count as u128 * 32 {
            return Err(bad("length does not match count"));
        }
        let mut digests = BTreeSet::new();
        let mut prev: Option<Digest> = None;
        for chunk in body.chunks_exact(32) {
            let d: Digest = chunk.try_into().unwrap();
            if prev.is_some_and(|p| p >= d) {
                return Err(bad("digests not strictly sorted"));
            }
            prev = Some(d);
            digests.insert(d);
        }
        Ok(Self {
            digests,
            v: count - 1,
        })
    }
}

/// Exponent (i + β)·α mod N of table entry i; exposed for tests and tooling.
pub fn entry_exponent(sk: &SecretKey, i: u64) -> BigUint {
    let n = sk.group().order();
    ((BigUint::from(i) + sk.beta()) * sk.alpha()) % n
}
