//! Plaintext reference answers used to check the encrypted protocols.

use std::collections::BTreeSet;

use crate::geometry::{coarse_transform, Point, RangeQuery, SphereQuery};

pub type Record = (u64, Point);

/// Ids with dist²(m, q) ≤ r².
pub fn hrq_oracle(dataset: &[Record], q: &SphereQuery) -> BTreeSet<u64> {
    let r2 = (q.radius as i128).pow(2);
    dataset
        .iter()
        .filter(|(_, p)| p.dist2(&q.center) <= r2)
        .map(|(id, _)| *id)
        .collect()
}

/// Same predicate, evaluated through the expanded form
/// 2·Σ m_i q_i + r² − ||m||² − ||q||² ≥ 0.
pub fn hrq_oracle_dot_form(dataset: &[Record], q: &SphereQuery) -> BTreeSet<u64> {
    let r2 = (q.radius as i128).pow(2);
    let q_norm: i128 = q.center.coords.iter().map(|x| (*x as i128).pow(2)).sum();
    dataset
        .iter()
        .filter(|(_, m)| {
            let cross: i128 = m
                .coords
                .iter()
                .zip(&q.center.coords)
                .map(|(a, b)| *a as i128 * *b as i128)
                .sum();
            let m_norm: i128 = m.coords.iter().map(|x| (*x as i128).pow(2)).sum();
            2 * cross + r2 - m_norm - q_norm >= 0
        })
        .map(|(id, _)| *id)
        .collect()
}

/// Ids with lo ≤ m[col] ≤ hi.
pub fn range_oracle(dataset: &[Record], rq: &RangeQuery) -> BTreeSet<u64> {
    dataset
        .iter()
        .filter(|(_, p)| rq.contains(p))
        .map(|(id, _)| *id)
        .collect()
}

/// Ids whose f-coarsened distance to the f-coarsened center satisfies
/// dist² ∈ [max(0, r̂² − v), r̂²]: what one lookup-table query of coarse
/// radius `r_hat` returns from the store of coarsity `f`.
pub fn annulus_oracle(dataset: &[Record], center: &Point, r_hat: u64, v: u64, f: u64) -> BTreeSet<u64> {
    let c = coarse_transform(center, f);
    let hi = (r_hat as i128).pow(2);
    let lo = (hi - v as i128).max(0);
    dataset
        .iter()
        .filter(|(_, p)| (lo..=hi).contains(&coarse_transform(p, f).dist2(&c)))
        .map(|(id, _)| *id)
        .collect()
}
