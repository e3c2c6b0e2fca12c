//! Per-record AES-256-GCM blobs for the server-side record store.
//! Layout: 12-byte nonce ‖ ciphertext ‖ 16-byte tag, with the record id as
//! associated data so a blob cannot be replayed under another id.

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes256Gcm, Key, Nonce};
use rand::Rng;

use super::ProtocolError;
use crate::geometry::Point;

pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

fn cipher(key: &[u8; 32]) -> Aes256Gcm {
    Aes256Gcm::new(Key::<Aes256Gcm>::from_slice(key))
}

pub fn seal<R: Rng + ?Sized>(key: &[u8; 32], id: u64, point: &Point, rng: &mut R) -> Vec<u8> {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let msg = serde_json::to_vec(point).expect("points always serialize");
    let aad = id.to_be_bytes();
    let ct = cipher(key)
        .encrypt(Nonce::from_slice(&nonce), Payload { msg: &msg, aad: &aad })
        .expect("AES-GCM encryption does not fail for in-memory buffers");
    let mut out = nonce.to_vec();
    out.extend_from_slice(&ct);
    out
}

pub fn open(key: &[u8; 32], id: u64, blob: &[u8]) -> Result<Point, ProtocolError> {
    if blob.len() < NONCE_LEN + TAG_LEN {
        return Err(ProtocolError::Integrity(format!("blob for id {id} is truncated")));
    }
    let (nonce, ct) = blob.split_at(NONCE_LEN);
    let aad = id.to_be_bytes();
    let msg = cipher(key)
        .decrypt(Nonce::from_slice(nonce), Payload { msg: ct, aad: &aad })
        .map_err(|_| ProtocolError::Integrity(format!("authentication failed for id {id}")))?;
    serde_json::from_slice(&msg)
        .map_err(|e| ProtocolError::Integrity(format!("blob for id {id} does not hold a point: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seal_open_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let key = [7u8; 32];
        let p = Point::new(vec![3, -4, 500]);
        let blob = seal(&key, 42, &p, &mut rng);
        assert_eq!(open(&key, 42, &blob).unwrap(), p);
        // fresh nonce per blob
        assert_ne!(seal(&key, 42, &p, &mut rng), blob);
    }

    #[test]
    fn tampering_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let key = [9u8; 32];
        let blob = seal(&key, 1, &Point::new(vec![1, 2]), &mut rng);
        assert!(matches!(open(&key, 2, &blob), Err(ProtocolError::Integrity(_))));
        assert!(open(&[8u8; 32], 1, &blob).is_err());
        let mut flipped = blob.clone();
        let last = flipped.len() - 1;
        flipped[last] ^= 1;
        assert!(open(&key, 1, &flipped).is_err());
        assert!(open(&key, 1, &blob[..20]).is_err());
    }
}
