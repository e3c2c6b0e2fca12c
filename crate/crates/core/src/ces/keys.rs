use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CesError, Layout};
use crate::pairing::{group_gen, Backend, GElement, Group, GroupDescriptor, GroupParams};

pub const HASH_ID: &str = "SHA-256";

/// Largest accepted per-coordinate bound; keeps every component entry in i64.
pub const MAX_X_MAX: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CesConfig {
    pub lambda: u32,
    pub d: usize,
    pub layout: Layout,
    pub v: u64,
    pub x_max: u64,
    pub backend: Backend,
}

/// Everything the data owner keeps secret.
#[derive(Clone, Debug)]
pub struct SecretKey {
    params: GroupParams,
    g: GElement,
    u: GElement,
    s: GElement,
    h: GElement,
    a: Vec<BigUint>,
    b: Vec<BigUint>,
    alpha: BigUint,
    beta: BigUint,
    aes_key: [u8; 32],
    layout: Layout,
    d: usize,
    v: u64,
    x_max: u64,
}

/// Raw fields of a [`SecretKey`], checked by [`SecretKey::from_parts`].
#[derive(Clone, Debug)]
pub struct KeyParts {
    pub params: GroupParams,
    pub g: GElement,
    pub u: GElement,
    pub s: GElement,
    pub h: GElement,
    pub a: Vec<BigUint>,
    pub b: Vec<BigUint>,
    pub alpha: BigUint,
    pub beta: BigUint,
    pub aes_key: [u8; 32],
    pub layout: Layout,
    pub d: usize,
    pub v: u64,
    pub x_max: u64,
}

/// What the server receives: the group description and the agreed hash.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicParams {
    pub group: GroupDescriptor,
    pub hash: String,
}

impl PublicParams {
    pub fn group(&self) -> Result<Group, CesError> {
        Ok(Group::from_descriptor(&self.group)?)
    }
}

/// 2·(v + d·x_max²), the bound q2 must exceed.
pub fn margin_bound(v: u64, d: usize, x_max: u64) -> BigUint {
    let spread = BigUint::from(d) * BigUint::from(x_max) * BigUint::from(x_max);
    (BigUint::from(v) + spread) * 2u32
}

pub fn keygen<R: Rng + ?Sized>(
    config: &CesConfig,
    rng: &mut R,
) -> Result<(SecretKey, PublicParams), CesError> {
    if config.d == 0 {
        return Err(CesError::Config("dimension d must be at least 1".into()));
    }
    if config.x_max > MAX_X_MAX {
        return Err(CesError::Config(format!("x_max must not exceed {MAX_X_MAX}")));
    }
    let bound = margin_bound(config.v, config.d, config.x_max);
    // q2 ≥ 2^(λ-1); fail before the (possibly slow) curve search when hopeless
    if config.lambda < 64 && (BigUint::one() << config.lambda) <= bound {
        return Err(CesError::Margin {
            bound,
            q2: (BigUint::one() << config.lambda) - 1u32,
        });
    }
    let params = group_gen(config.lambda, config.backend, rng)?;
    let group = params.group.clone();
    let g = params.random_generator(rng);
    let u = params.random_generator(rng);
    let s = group.g_pow(&g, &params.q1);
    let h = group.g_pow(&u, &params.q2);

    let len = config.layout.len(config.d);
    let r = rng.gen_biguint_range(&BigUint::one(), &params.q2);
    let target = (&r * &params.q1) % group.order();
    let (a, b) = loop {
        let a: Vec<BigUint> = (0..len).map(|_| group.random_scalar(rng)).collect();
        let prefix: Vec<BigUint> = (0..len - 1).map(|_| group.random_scalar(rng)).collect();
        if let Some(b) = complete_blinding_vector(&a, &prefix, &target, group.order()) {
            break (a, b);
        }
    };

    let alpha = loop {
        let x = rng.gen_biguint_range(&BigUint::one(), group.order());
        if !(&x % &params.q2).is_zero() {
            break x;
        }
    };
    let beta = group.random_scalar(rng);
    let mut aes_key = [0u8; 32];
    rng.fill_bytes(&mut aes_key);

    let sk = SecretKey::from_parts(KeyParts {
        params,
        g,
        u,
        s,
        h,
        a,
        b,
        alpha,
        beta,
        aes_key,
        layout: config.layout,
        d: config.d,
        v: config.v,
        x_max: config.x_max,
    })?;
    let pp = sk.public_params();
    Ok((sk, pp))
}

/// Solves for the last entry of B so that A·B ≡ target (mod n):
/// B_L = (target − Σ_{i<L} A_i·B_i)·A_L^{-1}. Returns `None` when A_L is not a unit.
pub fn complete_blinding_vector(
    a: &[BigUint],
    b_prefix: &[BigUint],
    target: &BigUint,
    n: &BigUint,
) -> Option<Vec<BigUint>> {
    assert_eq!(a.len(), b_prefix.len() + 1);
    let last_inv = a.last()?.modinv(n)?;
    let partial: BigUint = a.iter().zip(b_prefix).map(|(x, y)| x * y).sum::<BigUint>() % n;
    let diff = BigInt::from(target.clone()) - BigInt::from(partial);
    let diff = diff
        .mod_floor(&BigInt::from(n.clone()))
        .to_biguint()
        .expect("non-negative");
    let mut b = b_prefix.to_vec();
    b.push((diff * last_inv) % n);
    Some(b)
}

impl SecretKey {
    /// Validates every structural invariant of the key.
    pub fn from_parts(p: KeyParts) -> Result<Self, CesError> {
        let group = &p.params.group;
        let (q1, q2) = (&p.params.q1, &p.params.q2);
        let bad = |msg: &str| Err(CesError::InvalidKey(msg.to_string()));
        if &(q1 * q2) != group.order() {
            return bad("N != q1*q2");
        }
        if p.d == 0 {
            return bad("dimension must be at least 1");
        }
        if !p.params.is_generator(&p.g) || !p.params.is_generator(&p.u) {
            return bad("g and u must generate the full group");
        }
        if group.g_pow(&p.g, q1) != p.s {
            return bad("s != g^q1");
        }
        if group.g_pow(&p.u, q2) != p.h {
            return bad("h != u^q2");
        }
        let len = p.layout.len(p.d);
        if p.a.len() != len || p.b.len() != len {
            return bad("blinding vector length does not match the layout");
        }
        if p.a.iter().chain(&p.b).any(|x| x >= group.order()) {
            return bad("blinding vector entries must be reduced mod N");
        }
        let dot: BigUint = p.a.iter().zip(&p.b).map(|(x, y)| x * y).sum::<BigUint>() % group.order();
        if !(&dot % q1).is_zero() {
            return bad("A.B is not a multiple of q1");
        }
        if p.alpha.is_zero() || &p.alpha >= group.order() || (&p.alpha % q2).is_zero() {
            return bad("alpha must lie in [1, N) and be non-zero mod q2");
        }
        if &p.beta >= group.order() {
            return bad("beta must be reduced mod N");
        }
        if p.x_max > MAX_X_MAX {
            return bad("x_max too large");
        }
        let bound = margin_bound(p.v, p.d, p.x_max);
        if q2 <= &bound {
            return Err(CesError::Margin {
                bound,
                q2: q2.clone(),
            });
        }
        if BigUint::from(p.v) >= *q2 {
            return Err(CesError::TableTooLarge { v: p.v });
        }
        Ok(Self {
            params: p.params,
            g: p.g,
            u: p.u,
            s: p.s,
            h: p.h,
            a: p.a,
            b: p.b,
            alpha: p.alpha,
            beta: p.beta,
            aes_key: p.aes_key,
            layout: p.layout,
            d: p.d,
            v: p.v,
            x_max: p.x_max,
        })
    }

    pub fn into_parts(self) -> KeyParts {
        KeyParts {
            params: self.params,
            g: self.g,
            u: self.u,
            s: self.s,
            h: self.h,
            a: self.a,
            b: self.b,
            alpha: self.alpha,
            beta: self.beta,
            aes_key: self.aes_key,
            layout: self.layout,
            d: self.d,
            v: self.v,
            x_max: self.x_max,
        }
    }

    pub fn public_params(&self) -> PublicParams {
        PublicParams {
            group: self.params.group.descriptor(),
            hash: HASH_ID.to_string(),
        }
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }
    pub fn group(&self) -> &Group {
        &self.params.group
    }
    pub fn g(&self) -> &GElement {
        &self.g
    }
    pub fn u(&self) -> &GElement {
        &self.u
    }
    pub fn s(&self) -> &GElement {
        &self.s
    }
    pub fn h(&self) -> &GElement {
        &self.h
    }
    pub fn a(&self) -> &[BigUint] {
        &self.a
    }
    pub fn b(&self) -> &[BigUint] {
        &self.b
    }
    pub fn alpha(&self) -> &BigUint {
        &self.alpha
    }
    pub fn beta(&self) -> &BigUint {
        &self.beta
    }
    pub fn aes_key(&self) -> &[u8; 32] {
        &self.aes_key
    }
    pub fn layout(&self) -> Layout {
        self.layout
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn v(&self) -> u64 {
        self.v
    }
    pub fn x_max(&self) -> u64 {
        self.x_max
    }
    pub fn slot_count(&self) -> usize {
        self.layout.len(self.d)
    }

    /// The implicit scalar 𝓇 with A·B ≡ 𝓇·q1 (mod N).
    pub fn blinding_multiple(&self) -> BigUint {
        let n = self.group().order();
        let dot: BigUint = self.a.iter().zip(&self.b).map(|(x, y)| x * y).sum::<BigUint>() % n;
        dot / &self.params.q1
    }
}
