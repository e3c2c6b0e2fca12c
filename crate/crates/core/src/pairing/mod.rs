//! Composite-order symmetric bilinear groups.
//!
//! Two backends implement the same contract:
//!
//! * [`Backend::Transparent`] stores every element as its discrete log with
//!   respect to a fixed generator. Group operations become arithmetic mod N
//!   and the pairing multiplies exponents. It is structurally exact and
//!   offers no security whatsoever; use it for tests and oracles only.
//! * [`Backend::CurveA1`] works on y² = x³ + x over F_p with p = l·N − 1,
//!   p ≡ 3 (mod 4), and evaluates the reduced Tate pairing through the
//!   distortion map φ(x, y) = (−x, i·y).
//!
//! A [`Group`] carries only public data (N and the curve description). The
//! factorization N = q1·q2 lives in [`GroupParams`] and must stay with the
//! data owner.

mod curve;
mod field;

use std::fmt;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::Point;
pub use field::Fp2;
use field::{byte_len, PrimeField};

/// Upper bound on the cofactor scan performed by [`group_gen`].
pub const DEFAULT_MAX_COFACTOR: u64 = 1_000_000;
const MAX_PRIME_RETRIES: usize = 32;

const TAG_EXP_G: u8 = 0x11;
const TAG_EXP_GT: u8 = 0x12;
const TAG_CURVE_INFINITY: u8 = 0x20;
const TAG_CURVE_G: u8 = 0x21;
const TAG_CURVE_GT: u8 = 0x22;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairingError {
    #[error("security parameter {0} too small (need at least 3 bits per prime)")]
    LambdaTooSmall(u32),
    #[error("no prime p = l*N - 1 with p = 3 mod 4 found for l <= {cap}")]
    ParameterSearchExhausted { cap: u64 },
    #[error("invalid group parameters: {0}")]
    InvalidParams(String),
    #[error("malformed element encoding: {0}")]
    Encoding(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Transparent,
    #[serde(rename = "curve")]
    CurveA1,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Transparent => f.write_str("transparent"),
            Backend::CurveA1 => f.write_str("curve"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transparent" => Ok(Backend::Transparent),
            "curve" | "curvea1" | "a1" => Ok(Backend::CurveA1),
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum GroupKind {
    Transparent,
    CurveA1 {
        field: PrimeField,
        cofactor: BigUint,
    },
}

/// Public description of a composite-order group: its order and, for the
/// curve backend, the base field and cofactor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    order: BigUint,
    kind: GroupKind,
}

/// An element of the source group 𝔾.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GElement {
    Exp(BigUint),
    Curve(Point),
}

/// An element of the target group 𝔾_T.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GtElement {
    Exp(BigUint),
    Fp2(Fp2),
}

/// Output of group generation: the public group plus the secret primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    pub lambda: u32,
    pub q1: BigUint,
    pub q2: BigUint,
    pub group: Group,
}

/// Serializable form of [`Group`], shared with the server and stored in key files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDescriptor {
    pub backend: Backend,
    /// Group order N, decimal.
    pub n: String,
    /// Field prime (curve backend only), decimal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    /// Cofactor l with p + 1 = l·N (curve backend only), decimal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
}

pub fn is_prime(n: &BigUint) -> bool {
    num_prime::nt_funcs::is_prime(n, None).probably()
}

fn random_prime<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> BigUint {
    let low = BigUint::one() << (bits - 1);
    let high = BigUint::one() << bits;
    loop {
        let cand = rng.gen_biguint_range(&low, &high) | BigUint::one();
        if is_prime(&cand) {
            return cand;
        }
    }
}

/// Smallest cofactor l ≤ `cap` such that p = l·N − 1 is a prime with p ≡ 3 (mod 4).
fn find_curve_prime(n: &BigUint, cap: u64) -> Option<(BigUint, BigUint)> {
    let four = BigUint::from(4u32);
    (1..=cap).find_map(|l| {
        let l = BigUint::from(l);
        let p = &l * n - 1u32;
        (p.mod_floor(&four) == BigUint::from(3u32) && is_prime(&p)).then_some((p, l))
    })
}

/// Generates λ-bit primes q1 < q2 and the group of order N = q1·q2.
pub fn group_gen<R: Rng + ?Sized>(
    lambda: u32,
    backend: Backend,
    rng: &mut R,
) -> Result<GroupParams, PairingError> {
    group_gen_with_cap(lambda, backend, DEFAULT_MAX_COFACTOR, rng)
}

pub fn group_gen_with_cap<R: Rng + ?Sized>(
    lambda: u32,
    backend: Backend,
    max_cofactor: u64,
    rng: &mut R,
) -> Result<GroupParams, PairingError> {
    if lambda < 3 {
        return Err(PairingError::LambdaTooSmall(lambda));
    }
    for _ in 0..MAX_PRIME_RETRIES {
        let a = random_prime(lambda, rng);
        let b = random_prime(lambda, rng);
        if a == b {
            continue;
        }
        let (q1, q2) = if a < b { (a, b) } else { (b, a) };
        match GroupParams::from_primes_with_cap(lambda, q1, q2, backend, max_cofactor) {
            Err(PairingError::ParameterSearchExhausted { .. }) => continue,
            other => return other,
        }
    }
    Err(PairingError::ParameterSearchExhausted { cap: max_cofactor })
}

impl GroupParams {
    /// Builds parameters from known primes; the curve backend scans for the cofactor.
    pub fn from_primes(q1: BigUint, q2: BigUint, backend: Backend) -> Result<Self, PairingError> {
        let lambda = q1.bits().max(q2.bits()) as u32;
        Self::from_primes_with_cap(lambda, q1, q2, backend, DEFAULT_MAX_COFACTOR)
    }

    fn from_primes_with_cap(
        lambda: u32,
        q1: BigUint,
        q2: BigUint,
        backend: Backend,
        cap: u64,
    ) -> Result<Self, PairingError> {
        if q1 == q2 || !is_prime(&q1) || !is_prime(&q2) {
            return Err(PairingError::InvalidParams(
                "q1 and q2 must be distinct primes".into(),
            ));
        }
        let n = &q1 * &q2;
        let group = match backend {
            Backend::Transparent => Group::transparent(n),
            Backend::CurveA1 => {
                let (p, l) = find_curve_prime(&n, cap)
                    .ok_or(PairingError::ParameterSearchExhausted { cap })?;
                Group::curve(n, p, l)?
            }
        };
        Ok(Self {
            lambda,
            q1,
            q2,
            group,
        })
    }

    /// True when `x` has full order N, i.e. neither x^{q1} nor x^{q2} is the identity.
    pub fn is_generator(&self, x: &GElement) -> bool {
        let id = self.group.g_identity();
        self.group.g_pow(x, &self.q1) != id && self.group.g_pow(x, &self.q2) != id
    }

    /// Samples an element of order N, resampling order-deficient draws.
    pub fn random_generator<R: Rng + ?Sized>(&self, rng: &mut R) -> GElement {
        loop {
            let x = self.group.random_element(rng);
            if self.is_generator(&x) {
                return x;
            }
        }
    }
}

impl Group {
    pub fn transparent(order: BigUint) -> Self {
        Self {
            order,
            kind: GroupKind::Transparent,
        }
    }

    pub fn curve(order: BigUint, p: BigUint, cofactor: BigUint) -> Result<Self, PairingError> {
        let four = BigUint::from(4u32);
        if &cofactor * &order != &p + 1u32 {
            return Err(PairingError::InvalidParams("p + 1 != l*N".into()));
        }
        if p.mod_floor(&four) != BigUint::from(3u32) || !is_prime(&p) {
            return Err(PairingError::InvalidParams(
                "p must be a prime congruent to 3 mod 4".into(),
            ));
        }
        Ok(Self {
            order,
            kind: GroupKind::CurveA1 {
                field: PrimeField::new(p),
                cofactor,
            },
        })
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn backend(&self) -> Backend {
        match self.kind {
            GroupKind::Transparent => Backend::Transparent,
            GroupKind::CurveA1 { .. } => Backend::CurveA1,
        }
    }

    /// Field prime and cofactor of the curve backend.
    pub fn curve_params(&self) -> Option<(&BigUint, &BigUint)> {
        match &self.kind {
            GroupKind::Transparent => None,
            GroupKind::CurveA1 { field, cofactor } => Some((field.modulus(), cofactor)),
        }
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        let (p, l) = match self.curve_params() {
            Some((p, l)) => (Some(p.to_string()), Some(l.to_string())),
            None => (None, None),
        };
        GroupDescriptor {
            backend: self.backend(),
            n: self.order.to_string(),
            p,
            l,
        }
    }

    pub fn from_descriptor(desc: &GroupDescriptor) -> Result<Self, PairingError> {
        let parse = |s: &str, what: &str| {
            s.parse::<BigUint>()
                .map_err(|_| PairingError::InvalidParams(format!("{what} is not a decimal integer")))
        };
        let n = parse(&desc.n, "N")?;
        match desc.backend {
            Backend::Transparent => Ok(Self::transparent(n)),
            Backend::CurveA1 => {
                let p = desc
                    .p
                    .as_deref()
                    .ok_or_else(|| PairingError::InvalidParams("missing p".into()))?;
                let l = desc
                    .l
                    .as_deref()
                    .ok_or_else(|| PairingError::InvalidParams("missing l".into()))?;
                Self::curve(n, parse(p, "p")?, parse(l, "l")?)
            }
        }
    }

    /// Reduces a signed scalar into [0, N).
    pub fn reduce(&self, k: &BigInt) -> BigUint {
        let n = BigInt::from_biguint(Sign::Plus, self.order.clone());
        k.mod_floor(&n).to_biguint().expect("non-negative after mod_floor")
    }

    pub fn reduce_i64(&self, k: i64) -> BigUint {
        self.reduce(&BigInt::from(k))
    }

    pub fn random_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint_below(&self.order)
    }

    pub fn g_identity(&self) -> GElement {
        match self.kind {
            GroupKind::Transparent => GElement::Exp(BigUint::zero()),
            GroupKind::CurveA1 { .. } => GElement::Curve(Point::Infinity),
        }
    }

    pub fn gt_identity(&self) -> GtElement {
        match self.kind {
            GroupKind::Transparent => GtElement::Exp(BigUint::zero()),
            GroupKind::CurveA1 { .. } => GtElement::Fp2(Fp2::one()),
        }
    }

    /// A uniformly random element of 𝔾 (possibly of deficient order).
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GElement {
        match &self.kind {
            GroupKind::Transparent => GElement::Exp(self.random_scalar(rng)),
            GroupKind::CurveA1 { field, cofactor } => {
                let pt = curve::random_point(field, rng);
                GElement::Curve(curve::mul(field, &pt, cofactor))
            }
        }
    }

    pub fn g_mul(&self, a: &GElement, b: &GElement) -> GElement {
        match (&self.kind, a, b) {
            (GroupKind::Transparent, GElement::Exp(x), GElement::Exp(y)) => {
                GElement::Exp((x + y) % &self.order)
            }
            (GroupKind::CurveA1 { field, .. }, GElement::Curve(p), GElement::Curve(q)) => {
                GElement::Curve(curve::add(field, p, q))
            }
            _ => panic!("element does not belong to this group's backend"),
        }
    }

    pub fn g_pow(&self, x: &GElement, k: &BigUint) -> GElement {
        let k = k % &self.order;
        match (&self.kind, x) {
            (GroupKind::Transparent, GElement::Exp(e)) => GElement::Exp((e * k) % &self.order),
            (GroupKind::CurveA1 { field, .. }, GElement::Curve(p)) => {
                GElement::Curve(curve::mul(field, p, &k))
            }
            _ => panic!("element does not belong to this group's backend"),
        }
    }

    pub fn g_pow_signed(&self, x: &GElement, k: &BigInt) -> GElement {
        self.g_pow(x, &self.reduce(k))
    }

    pub fn gt_mul(&self, a: &GtElement, b: &GtElement) -> GtElement {
        match (&self.kind, a, b) {
            (GroupKind::Transparent, GtElement::Exp(x), GtElement::Exp(y)) => {
                GtElement::Exp((x + y) % &self.order)
            }
            (GroupKind::CurveA1 { field, .. }, GtElement::Fp2(x), GtElement::Fp2(y)) => {
                GtElement::Fp2(x.mul(y, field))
            }
            _ => panic!("element does not belong to this group's backend"),
        }
    }

    pub fn gt_pow(&self, x: &GtElement, k: &BigUint) -> GtElement {
        let k = k % &self.order;
        match (&self.kind, x) {
            (GroupKind::Transparent, GtElement::Exp(e)) => GtElement::Exp((e * k) % &self.order),
            (GroupKind::CurveA1 { field, .. }, GtElement::Fp2(v)) => GtElement::Fp2(v.pow(&k, field)),
            _ => panic!("element does not belong to this group's backend"),
        }
    }

    pub fn gt_pow_signed(&self, x: &GtElement, k: &BigInt) -> GtElement {
        self.gt_pow(x, &self.reduce(k))
    }

    /// The symmetric pairing e: 𝔾 × 𝔾 → 𝔾_T.
    pub fn pair(&self, x: &GElement, y: &GElement) -> GtElement {
        self.pair_product([(x, y)])
    }

    /// Π e(x_i, y_i), sharing a single final exponentiation on the curve backend.
    pub fn pair_product<'a, I>(&self, pairs: I) -> GtElement
    where
        I: IntoIterator<Item = (&'a GElement, &'a GElement)>,
    {
        match &self.kind {
            GroupKind::Transparent => {
                let mut acc = BigUint::zero();
                for (x, y) in pairs {
                    match (x, y) {
                        (GElement::Exp(a), GElement::Exp(b)) => acc += a * b,
                        _ => panic!("element does not belong to this group's backend"),
                    }
                }
                GtElement::Exp(acc % &self.order)
            }
            GroupKind::CurveA1 { field, cofactor } => {
                let mut acc = Fp2::one();
                for (x, y) in pairs {
                    match (x, y) {
                        (GElement::Curve(p), GElement::Curve(q)) => {
                            let m = curve::miller_loop(field, p, q, &self.order);
                            acc = acc.mul(&m, field);
                        }
                        _ => panic!("element does not belong to this group's backend"),
                    }
                }
                GtElement::Fp2(curve::final_exponentiation(field, &acc, cofactor))
            }
        }
    }

    fn element_width(&self) -> usize {
        match &self.kind {
            GroupKind::Transparent => byte_len(&self.order),
            GroupKind::CurveA1 { field, .. } => field.byte_len(),
        }
    }

    /// Length of every encoded 𝔾 element for this group.
    pub fn g_encoded_len(&self) -> usize {
        match self.kind {
            GroupKind::Transparent => 1 + self.element_width(),
            GroupKind::CurveA1 { .. } => 1 + 2 * self.element_width(),
        }
    }

    pub fn gt_encoded_len(&self) -> usize {
        self.g_encoded_len()
    }

    /// Deterministic, injective, fixed-length encoding of a 𝔾 element.
    pub fn encode_g(&self, x: &GElement) -> Vec<u8> {
        let w = self.element_width();
        let mut out = Vec::with_capacity(self.g_encoded_len());
        match (&self.kind, x) {
            (GroupKind::Transparent, GElement::Exp(e)) => {
                out.push(TAG_EXP_G);
                push_fixed(&mut out, e, w);
            }
            (GroupKind::CurveA1 { .. }, GElement::Curve(Point::Infinity)) => {
                out.push(TAG_CURVE_INFINITY);
                out.resize(1 + 2 * w, 0);
            }
            (GroupKind::CurveA1 { .. }, GElement::Curve(Point::Affine { x, y })) => {
                out.push(TAG_CURVE_G);
                push_fixed(&mut out, x, w);
                push_fixed(&mut out, y, w);
            }
            _ => panic!("element does not belong to this group's backend"),
        }
        out
    }

    pub fn encode_gt(&self, x: &GtElement) -> Vec<u8> {
        let w = self.element_width();
        let mut out = Vec::with_capacity(self.gt_encoded_len());
        match (&self.kind, x) {
            (GroupKind::Transparent, GtElement::Exp(e)) => {
                out.push(TAG_EXP_GT);
                push_fixed(&mut out, e, w);
            }
            (GroupKind::CurveA1 { .. }, GtElement::Fp2(v)) => {
                out.push(TAG_CURVE_GT);
                push_fixed(&mut out, &v.a, w);
                push_fixed(&mut out, &v.b, w);
            }
            _ => panic!("element does not belong to this group's backend"),
        }
        out
    }

    /// Decodes and validates a 𝔾 element (on the curve and of order dividing N).
    pub fn decode_g(&self, bytes: &[u8]) -> Result<GElement, PairingError> {
        let w = self.element_width();
        if bytes.len() != self.g_encoded_len() {
            return Err(PairingError::Encoding(format!(
                "expected {} bytes, got {}",
                self.g_encoded_len(),
                bytes.len()
            )));
        }
        match &self.kind {
            GroupKind::Transparent => {
                expect_tag(bytes[0], TAG_EXP_G)?;
                let e = BigUint::from_bytes_be(&bytes[1..]);
                if e >= self.order {
                    return Err(PairingError::Encoding("exponent not reduced mod N".into()));
                }
                Ok(GElement::Exp(e))
            }
            GroupKind::CurveA1 { field, .. } => match bytes[0] {
                TAG_CURVE_INFINITY => {
                    if bytes[1..].iter().any(|&b| b != 0) {
                        return Err(PairingError::Encoding("non-zero infinity padding".into()));
                    }
                    Ok(GElement::Curve(Point::Infinity))
                }
                TAG_CURVE_G => {
                    let pt = Point::Affine {
                        x: BigUint::from_bytes_be(&bytes[1..1 + w]),
                        y: BigUint::from_bytes_be(&bytes[1 + w..]),
                    };
                    if !curve::is_on_curve(field, &pt) {
                        return Err(PairingError::Encoding("point not on curve".into()));
                    }
                    if !curve::mul(field, &pt, &self.order).is_infinity() {
                        return Err(PairingError::Encoding("point outside order-N subgroup".into()));
                    }
                    Ok(GElement::Curve(pt))
                }
                t => Err(PairingError::Encoding(format!("unexpected tag 0x{t:02x}"))),
            },
        }
    }

    pub fn decode_gt(&self, bytes: &[u8]) -> Result<GtElement, PairingError> {
        let w = self.element_width();
        if bytes.len() != self.gt_encoded_len() {
            return Err(PairingError::Encoding(format!(
                "expected {} bytes, got {}",
                self.gt_encoded_len(),
                bytes.len()
            )));
        }
        match &self.kind {
            GroupKind::Transparent => {
                expect_tag(bytes[0], TAG_EXP_GT)?;
                let e = BigUint::from_bytes_be(&bytes[1..]);
                if e >= self.order {
                    return Err(PairingError::Encoding("exponent not reduced mod N".into()));
                }
                Ok(GtElement::Exp(e))
            }
            GroupKind::CurveA1 { field, .. } => {
                expect_tag(bytes[0], TAG_CURVE_GT)?;
                let v = Fp2 {
                    a: BigUint::from_bytes_be(&bytes[1..1 + w]),
                    b: BigUint::from_bytes_be(&bytes[1 + w..]),
                };
                if &v.a >= field.modulus() || &v.b >= field.modulus() {
                    return Err(PairingError::Encoding("coordinate not reduced mod p".into()));
                }
                if !v.pow(&self.order, field).is_one() {
                    return Err(PairingError::Encoding("value outside order-N subgroup".into()));
                }
                Ok(GtElement::Fp2(v))
            }
        }
    }
}

fn expect_tag(got: u8, want: u8) -> Result<(), PairingError> {
    if got == want {
        Ok(())
    } else {
        Err(PairingError::Encoding(format!(
            "unexpected tag 0x{got:02x}, expected 0x{want:02x}"
        )))
    }
}

fn push_fixed(out: &mut Vec<u8>, v: &BigUint, width: usize) {
    let bytes = if v.is_zero() { Vec::new() } else { v.to_bytes_be() };
    assert!(bytes.len() <= width, "value wider than fixed encoding width");
    out.extend(std::iter::repeat(0u8).take(width - bytes.len()));
    out.extend_from_slice(&bytes);
}

#[cfg(test)]
mod tests;
