//! Arithmetic in F_p and F_p² = F_p[i]/(i² + 1) for primes p ≡ 3 (mod 4).

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct PrimeField {
    p: BigUint,
    /// (p + 1) / 4, the square-root exponent for p ≡ 3 (mod 4).
    sqrt_exp: BigUint,
}

impl PrimeField {
    pub(crate) fn new(p: BigUint) -> Self {
        let sqrt_exp = (&p + 1u32) >> 2;
        Self { p, sqrt_exp }
    }

    pub(crate) fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub(crate) fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.p {
            s - &self.p
        } else {
            s
        }
    }

    pub(crate) fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.p - (b - a)
        }
    }

    pub(crate) fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.p - a
        }
    }

    pub(crate) fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    pub(crate) fn square(&self, a: &BigUint) -> BigUint {
        (a * a) % &self.p
    }

    pub(crate) fn inv(&self, a: &BigUint) -> BigUint {
        a.modinv(&self.p).expect("inverse of zero in F_p")
    }

    /// Returns a square root of `a` if one exists.
    pub(crate) fn sqrt(&self, a: &BigUint) -> Option<BigUint> {
        let root = a.modpow(&self.sqrt_exp, &self.p);
        if self.square(&root) == a % &self.p {
            Some(root)
        } else {
            None
        }
    }

    pub(crate) fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint_below(&self.p)
    }

    pub(crate) fn byte_len(&self) -> usize {
        byte_len(&self.p)
    }
}

pub(crate) fn byte_len(n: &BigUint) -> usize {
    ((n.bits() as usize) + 7) / 8
}

/// An element a + b·i of F_p², with 0 ≤ a, b < p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fp2 {
    pub(crate) a: BigUint,
    pub(crate) b: BigUint,
}

impl Fp2 {
    pub(crate) fn one() -> Self {
        Self {
            a: BigUint::one(),
            b: BigUint::zero(),
        }
    }

    pub(crate) fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub(crate) fn mul(&self, other: &Fp2, f: &PrimeField) -> Fp2 {
        // (a + bi)(c + di) = (ac - bd) + ((a + b)(c + d) - ac - bd)i
        let ac = f.mul(&self.a, &other.a);
        let bd = f.mul(&self.b, &other.b);
        let cross = f.mul(&f.add(&self.a, &self.b), &f.add(&other.a, &other.b));
        Fp2 {
            a: f.sub(&ac, &bd),
            b: f.sub(&f.sub(&cross, &ac), &bd),
        }
    }

    pub(crate) fn square(&self, f: &PrimeField) -> Fp2 {
        // (a + bi)² = (a + b)(a - b) + 2ab·i
        let re = f.mul(&f.add(&self.a, &self.b), &f.sub(&self.a, &self.b));
        let ab = f.mul(&self.a, &self.b);
        Fp2 {
            a: re,
            b: f.add(&ab, &ab),
        }
    }

    pub(crate) fn conj(&self, f: &PrimeField) -> Fp2 {
        Fp2 {
            a: self.a.clone(),
            b: f.neg(&self.b),
        }
    }

    pub(crate) fn norm(&self, f: &PrimeField) -> BigUint {
        f.add(&f.square(&self.a), &f.square(&self.b))
    }

    pub(crate) fn inv(&self, f: &PrimeField) -> Fp2 {
        let n_inv = f.inv(&self.norm(f));
        let c = self.conj(f);
        Fp2 {
            a: f.mul(&c.a, &n_inv),
            b: f.mul(&c.b, &n_inv),
        }
    }

    pub(crate) fn pow(&self, k: &BigUint, f: &PrimeField) -> Fp2 {
        let mut acc = Fp2::one();
        for bit in (0..k.bits()).rev() {
            acc = acc.square(f);
            if k.bit(bit) {
                acc = acc.mul(self, f);
            }
        }
        acc
    }
}
