//! Minimal Boneh–Goh–Nissim reference used to cross-check the pairing
//! backends: C = g^m·h^r with h of order q1, decryption by raising to q1 and
//! searching a small table.

use num_bigint::BigUint;
use rand::Rng;

use super::CesError;
use crate::pairing::{GElement, GroupParams, GtElement};

#[derive(Clone, Debug)]
pub struct BgnKey {
    pub params: GroupParams,
    pub g: GElement,
    /// u^{q2}, of order q1.
    pub h: GElement,
}

impl BgnKey {
    pub fn generate<R: Rng + ?Sized>(params: GroupParams, rng: &mut R) -> Self {
        let g = params.random_generator(rng);
        let u = params.random_generator(rng);
        let h = params.group.g_pow(&u, &params.q2);
        Self { params, g, h }
    }

    pub fn enc<R: Rng + ?Sized>(&self, m: u64, rng: &mut R) -> GElement {
        let grp = &self.params.group;
        let r = grp.random_scalar(rng);
        grp.g_mul(
            &grp.g_pow(&self.g, &BigUint::from(m)),
            &grp.g_pow(&self.h, &r),
        )
    }

    pub fn add(&self, c1: &GElement, c2: &GElement) -> GElement {
        self.params.group.g_mul(c1, c2)
    }

    pub fn mul(&self, c1: &GElement, c2: &GElement) -> GtElement {
        self.params.group.pair(c1, c2)
    }

    pub fn dec(&self, c: &GElement, bound: u64) -> Result<u64, CesError> {
        let grp = &self.params.group;
        let target = grp.g_pow(c, &self.params.q1);
        let base = grp.g_pow(&self.g, &self.params.q1);
        let mut cur = grp.g_identity();
        for i in 0..=bound {
            if cur == target {
                return Ok(i);
            }
            cur = grp.g_mul(&cur, &base);
        }
        Err(CesError::NotFound(bound))
    }

    pub fn dec_gt(&self, c: &GtElement, bound: u64) -> Result<u64, CesError> {
        let grp = &self.params.group;
        let target = grp.gt_pow(c, &self.params.q1);
        let base = grp.gt_pow(&grp.pair(&self.g, &self.g), &self.params.q1);
        let mut cur = grp.gt_identity();
        for i in 0..=bound {
            if cur == target {
                return Ok(i);
            }
            cur = grp.gt_mul(&cur, &base);
        }
        Err(CesError::NotFound(bound))
    }
}
