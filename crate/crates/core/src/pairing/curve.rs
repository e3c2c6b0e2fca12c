//! The supersingular curve y² = x³ + x over F_p (p ≡ 3 mod 4) and its
//! modified Tate pairing e(P, φ(Q)) with distortion map φ(x, y) = (−x, i·y).

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use super::field::{Fp2, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine { x: BigUint, y: BigUint },
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

pub(crate) fn is_on_curve(f: &PrimeField, pt: &Point) -> bool {
    match pt {
        Point::Infinity => true,
        Point::Affine { x, y } => {
            x < f.modulus() && y < f.modulus() && f.square(y) == rhs(f, x)
        }
    }
}

fn rhs(f: &PrimeField, x: &BigUint) -> BigUint {
    f.mul(&f.add(&f.square(x), &BigUint::from(1u32)), x)
}

#[cfg(test)]
pub(crate) fn neg(f: &PrimeField, pt: &Point) -> Point {
    match pt {
        Point::Infinity => Point::Infinity,
        Point::Affine { x, y } => Point::Affine {
            x: x.clone(),
            y: f.neg(y),
        },
    }
}

/// Slope of the line used to combine `t` and `p`, or `None` when the line is
/// vertical (the sum is the point at infinity).
fn slope(f: &PrimeField, t: (&BigUint, &BigUint), p: (&BigUint, &BigUint)) -> Option<BigUint> {
    let (xt, yt) = t;
    let (xp, yp) = p;
    if xt == xp {
        if yt != yp || yt.is_zero() {
            return None;
        }
        let three_x2 = f.mul(&BigUint::from(3u32), &f.square(xt));
        let num = f.add(&three_x2, &BigUint::from(1u32));
        let den = f.add(yt, yt);
        Some(f.mul(&num, &f.inv(&den)))
    } else {
        Some(f.mul(&f.sub(yp, yt), &f.inv(&f.sub(xp, xt))))
    }
}

fn chord(f: &PrimeField, lambda: &BigUint, t: (&BigUint, &BigUint), p: (&BigUint, &BigUint)) -> Point {
    let (xt, yt) = t;
    let (xp, _) = p;
    let x3 = f.sub(&f.sub(&f.square(lambda), xt), xp);
    let y3 = f.sub(&f.mul(lambda, &f.sub(xt, &x3)), yt);
    Point::Affine { x: x3, y: y3 }
}

pub(crate) fn add(f: &PrimeField, a: &Point, b: &Point) -> Point {
    match (a, b) {
        (Point::Infinity, _) => b.clone(),
        (_, Point::Infinity) => a.clone(),
        (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => {
            match slope(f, (x1, y1), (x2, y2)) {
                Some(l) => chord(f, &l, (x1, y1), (x2, y2)),
                None => Point::Infinity,
            }
        }
    }
}

pub(crate) fn mul(f: &PrimeField, pt: &Point, k: &BigUint) -> Point {
    let mut acc = Point::Infinity;
    for bit in (0..k.bits()).rev() {
        acc = add(f, &acc, &acc);
        if k.bit(bit) {
            acc = add(f, &acc, pt);
        }
    }
    acc
}

/// A uniformly random point of E(F_p) other than the 2-torsion point.
pub(crate) fn random_point<R: Rng + ?Sized>(f: &PrimeField, rng: &mut R) -> Point {
    loop {
        let x = f.random(rng);
        let r = rhs(f, &x);
        if r.is_zero() {
            continue;
        }
        if let Some(y) = f.sqrt(&r) {
            let y = if rng.gen::<bool>() { f.neg(&y) } else { y };
            return Point::Affine { x, y };
        }
    }
}

/// Evaluates the line through T with slope `lambda` at φ(Q) = (−x_Q, i·y_Q):
/// (y − y_T) − λ(x − x_T) becomes (λ(x_Q + x_T) − y_T) + y_Q·i.
fn line_at_distorted(
    f: &PrimeField,
    lambda: &BigUint,
    t: (&BigUint, &BigUint),
    q: (&BigUint, &BigUint),
) -> Fp2 {
    let (xt, yt) = t;
    let (xq, yq) = q;
    Fp2 {
        a: f.sub(&f.mul(lambda, &f.add(xq, xt)), yt),
        b: yq.clone(),
    }
}

/// Miller function f_{n,P} evaluated at φ(Q). Vertical-line factors lie in
/// F_p and are dropped; the final exponentiation sends them to 1.
pub(crate) fn miller_loop(f: &PrimeField, p: &Point, q: &Point, n: &BigUint) -> Fp2 {
    let (xp, yp, xq, yq) = match (p, q) {
        (Point::Affine { x: xp, y: yp }, Point::Affine { x: xq, y: yq }) => (xp, yp, xq, yq),
        _ => return Fp2::one(),
    };
    let mut acc = Fp2::one();
    let mut t = p.clone();
    for bit in (0..n.bits().saturating_sub(1)).rev() {
        acc = acc.square(f);
        t = match &t {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => match slope(f, (x, y), (x, y)) {
                Some(l) => {
                    acc = acc.mul(&line_at_distorted(f, &l, (x, y), (xq, yq)), f);
                    chord(f, &l, (x, y), (x, y))
                }
                None => Point::Infinity,
            },
        };
        if n.bit(bit) {
            t = match &t {
                Point::Infinity => p.clone(),
                Point::Affine { x, y } => match slope(f, (x, y), (xp, yp)) {
                    Some(l) => {
                        acc = acc.mul(&line_at_distorted(f, &l, (x, y), (xq, yq)), f);
                        chord(f, &l, (x, y), (xp, yp))
                    }
                    None => Point::Infinity,
                },
            };
        }
    }
    acc
}

/// Raises a Miller value to (p² − 1)/N = (p − 1)·cofactor.
pub(crate) fn final_exponentiation(f: &PrimeField, value: &Fp2, cofactor: &BigUint) -> Fp2 {
    // value^(p-1) = conj(value) / value, since Frobenius is conjugation.
    let unitary = value.conj(f).mul(&value.inv(f), f);
    unitary.pow(cofactor, f)
}
