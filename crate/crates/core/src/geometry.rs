//! Plaintext-side math: component construction, coarse transforms,
//! coarsity selection and layered radius planning.
//!
//! A data component m and a query component q are built so that
//! m·q = r² − dist²(m, center). A dot value in [0, v] is what the lookup
//! table recognises, so a query of radius r ≤ √v matches exactly the points
//! inside the sphere, while a larger radius only captures the band
//! dist² ∈ [r² − v, r²].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ces::{DataComponent, Layout, QueryComponent};

/// Slack added to every real-valued planning quantity before rounding up.
pub const EPS: f64 = 1e-9;

/// Radii beyond this would overflow the i64 component arithmetic.
pub const MAX_RADIUS: u64 = 1 << 30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("query not supported: {0}")]
    Unsupported(String),
    #[error("range queries need the unified layout")]
    UnsupportedLayout,
    #[error("coarsity base {b_c} < 2 for v = {v}, d = {d}; layered execution unsupported")]
    BaseTooSmall { b_c: u64, v: u64, d: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<i64>,
}

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dist2(&self, other: &Point) -> i128 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let d = (*a - *b) as i128;
                d * d
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereQuery {
    pub center: Point,
    pub radius: u64,
}

/// Closed range lo ≤ m[col] ≤ hi on one zero-based column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeQuery {
    pub col: usize,
    pub lo: i64,
    pub hi: i64,
}

impl RangeQuery {
    pub fn new(col: usize, lo: i64, hi: i64) -> Result<Self, GeometryError> {
        if lo > hi {
            return Err(GeometryError::InvalidQuery(format!("empty range [{lo}, {hi}]")));
        }
        Ok(Self { col, lo, hi })
    }

    /// Closes a half-open range using the column's domain bounds.
    pub fn from_open(
        col: usize,
        lo: Option<i64>,
        hi: Option<i64>,
        col_min: i64,
        col_max: i64,
    ) -> Result<Self, GeometryError> {
        Self::new(col, lo.unwrap_or(col_min), hi.unwrap_or(col_max))
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords
            .get(self.col)
            .is_some_and(|x| (self.lo..=self.hi).contains(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// Layer index i; the layer runs against the store with coarsity b^i.
    pub index: u32,
    /// Planning radius in original units.
    pub planning_radius: f64,
    /// Radius in the layer's coarse space.
    pub radius: u64,
    pub factor: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerPlan {
    pub layers: Vec<Layer>,
}

impl LayerPlan {
    pub fn radii(&self) -> Vec<u64> {
        self.layers.iter().map(|l| l.radius).collect()
    }

    pub fn indices(&self) -> Vec<u32> {
        self.layers.iter().map(|l| l.index).collect()
    }
}

pub fn make_data_component(p: &Point, layout: Layout) -> DataComponent {
    let d = p.dim();
    let mut entries = Vec::with_capacity(layout.len(d));
    entries.extend_from_slice(&p.coords);
    entries.push(1);
    match layout {
        Layout::Shrq => entries.push(p.coords.iter().map(|x| x * x).sum()),
        Layout::Unified => entries.extend(p.coords.iter().map(|x| x * x)),
    }
    DataComponent {
        entries,
        const_slot: layout.const_slot(d),
    }
}

/// Query component with dot(data, query) = r² − Σ_{i∈cols} (m_i − q_i)².
/// `cols = None` means every dimension; a strict subset needs the unified layout.
pub fn make_sphere_query_component(
    q: &SphereQuery,
    layout: Layout,
    cols: Option<&[usize]>,
) -> Result<QueryComponent, GeometryError> {
    let d = q.center.dim();
    if q.radius > MAX_RADIUS {
        return Err(GeometryError::InvalidQuery(format!(
            "radius {} exceeds {MAX_RADIUS}",
            q.radius
        )));
    }
    let mut active = vec![cols.is_none(); d];
    for &c in cols.unwrap_or(&[]) {
        if c >= d {
            return Err(GeometryError::InvalidQuery(format!("column {c} out of range")));
        }
        active[c] = true;
    }
    if layout == Layout::Shrq && active.iter().any(|a| !a) {
        return Err(GeometryError::UnsupportedLayout);
    }
    let r = q.radius as i64;
    let q2: i64 = q
        .center
        .coords
        .iter()
        .zip(&active)
        .filter(|(_, a)| **a)
        .map(|(x, _)| x * x)
        .sum();
    let mut entries = Vec::with_capacity(layout.len(d));
    entries.extend(
        q.center
            .coords
            .iter()
            .zip(&active)
            .map(|(x, a)| if *a { 2 * x } else { 0 }),
    );
    entries.push(r * r - q2);
    match layout {
        Layout::Shrq => entries.push(-1),
        Layout::Unified => entries.extend(active.iter().map(|a| if *a { -1 } else { 0 })),
    }
    Ok(QueryComponent {
        entries,
        const_slot: layout.const_slot(d),
    })
}

/// Turns a closed range on one column into a one-dimensional sphere.
///
/// Even width: center (lo+hi)/2 and radius (hi−lo)/2. Odd width: radius
/// (hi−lo+1)/2 and center lo + radius, which also covers hi + 1; validation
/// trims that extra unit.
pub fn range_to_sphere(rq: &RangeQuery, d: usize) -> Result<SphereQuery, GeometryError> {
    if rq.col >= d {
        return Err(GeometryError::InvalidQuery(format!("column {} out of range", rq.col)));
    }
    if rq.lo > rq.hi {
        return Err(GeometryError::InvalidQuery(format!("empty range [{}, {}]", rq.lo, rq.hi)));
    }
    let width = rq.hi - rq.lo;
    let (center, radius) = if width % 2 == 0 {
        ((rq.lo + rq.hi) / 2, width / 2)
    } else {
        let r = (width + 1) / 2;
        (rq.lo + r, r)
    };
    let mut coords = vec![0; d];
    coords[rq.col] = center;
    Ok(SphereQuery {
        center: Point::new(coords),
        radius: radius as u64,
    })
}

pub fn make_range_query_component(
    rq: &RangeQuery,
    d: usize,
    layout: Layout,
) -> Result<(QueryComponent, SphereQuery), GeometryError> {
    if layout != Layout::Unified {
        return Err(GeometryError::UnsupportedLayout);
    }
    let sphere = range_to_sphere(rq, d)?;
    let comp = make_sphere_query_component(&sphere, layout, Some(&[rq.col]))?;
    Ok((comp, sphere))
}

/// Maps every coordinate x to ⌊x / f⌋.
pub fn coarse_transform(p: &Point, f: u64) -> Point {
    assert!(f >= 1, "coarsity factor must be positive");
    let f = f as i64;
    Point::new(p.coords.iter().map(|x| x.div_euclid(f)).collect())
}

/// b_c = ⌊√v / (2√d + 1)⌋.
pub fn coarsity_base(v: u64, d: usize) -> Result<u64, GeometryError> {
    let b_c = ((v as f64).sqrt() / (2.0 * (d as f64).sqrt() + 1.0)).floor() as u64;
    if b_c < 2 {
        Err(GeometryError::BaseTooSmall { b_c, v, d })
    } else {
        Ok(b_c)
    }
}

/// ⌈x⌉ of a planning quantity, biased upward by [`EPS`].
fn ceil_up(x: f64) -> u64 {
    (x + EPS).ceil().max(0.0) as u64
}

fn fits_table(radius: u64, v: u64) -> bool {
    (radius as u128) * (radius as u128) <= v as u128
}

/// Radius of a coarse query at exponent `e`: r for e = 0, else ⌈r/base^e + √d⌉.
pub fn coarse_radius(r: u64, e: u32, base: u64, d: usize) -> u64 {
    if e == 0 {
        r
    } else {
        ceil_up(r as f64 / (base as f64).powi(e as i32) + (d as f64).sqrt())
    }
}

/// Single-level execution: e = 0 when r² ≤ v, otherwise the smallest
/// e ∈ [1, e_max] whose coarse radius still fits the lookup table.
pub fn select_coarsity_exponent(
    r: u64,
    v: u64,
    d: usize,
    e_max: u32,
    base: u64,
) -> Result<u32, GeometryError> {
    if fits_table(r, v) {
        return Ok(0);
    }
    (1..=e_max)
        .find(|&e| fits_table(coarse_radius(r, e, base, d), v))
        .ok_or_else(|| {
            GeometryError::Unsupported(format!(
                "r / {base}^{e_max} + sqrt(d) > sqrt(v) for r = {r}, v = {v}, d = {d}"
            ))
        })
}

/// The query as seen in the store of coarsity base^e.
pub fn transform_sphere_query(q: &SphereQuery, e: u32, base: u64) -> SphereQuery {
    let f = base.pow(e);
    SphereQuery {
        center: coarse_transform(&q.center, f),
        radius: coarse_radius(q.radius, e, base, q.center.dim()),
    }
}

/// Layered rejection rule: r / b_c^{E_max} + √d > √v.
pub fn check_layered_support(r: u64, v: u64, d: usize, b_c: u64, e_max: u32) -> Result<(), GeometryError> {
    let reach = r as f64 / (b_c as f64).powi(e_max as i32) + (d as f64).sqrt();
    if fits_table(r, v) || reach <= (v as f64).sqrt() + EPS {
        Ok(())
    } else {
        Err(GeometryError::Unsupported(format!(
            "r / {b_c}^{e_max} + sqrt(d) > sqrt(v) for r = {r}, v = {v}, d = {d}"
        )))
    }
}

/// The layered radius procedure as published: layer 0 keeps r, then the
/// residual shrinks by b_c^i·√v per layer after adding b_c^i·√d.
///
/// This plan assumes layer 0 captures the band [r − √v, r]; the band it
/// actually captures is dist² ∈ [r² − v, r²], so points between the two can
/// be missed. [`covering_layers`] is the plan the protocols execute.
pub fn layered_radii(r: u64, v: u64, d: usize, b_c: u64) -> Result<LayerPlan, GeometryError> {
    if b_c < 2 {
        return Err(GeometryError::BaseTooSmall { b_c, v, d });
    }
    let (sv, sd) = ((v as f64).sqrt(), (d as f64).sqrt());
    let mut layers = vec![Layer {
        index: 0,
        planning_radius: r as f64,
        radius: r,
        factor: 1,
    }];
    let mut residual = r as f64 - sv;
    let mut i = 1u32;
    while residual > EPS {
        let f = b_c.checked_pow(i).ok_or_else(too_many_layers)?;
        residual += f as f64 * sd;
        layers.push(Layer {
            index: i,
            planning_radius: residual,
            radius: ceil_up(residual / f as f64),
            factor: f,
        });
        residual -= f as f64 * sv;
        i += 1;
    }
    Ok(LayerPlan { layers })
}

fn too_many_layers() -> GeometryError {
    GeometryError::Unsupported("layer count overflows the coarsity range".into())
}

/// Layered plan without coverage gaps.
///
/// After a layer of coarse radius R at factor f, the points it has not
/// captured have coarse dist² < R² − v, hence real dist < f·(√(R² − v) + √d).
/// The next layer (factor b_c·f) covers that residual ρ with radius
/// ⌈ρ / (b_c·f) + √d⌉. Planning stops at the first layer with R² ≤ v, which
/// captures its whole disc.
pub fn covering_layers(r: u64, v: u64, d: usize, b_c: u64) -> Result<LayerPlan, GeometryError> {
    if b_c < 2 {
        return Err(GeometryError::BaseTooSmall { b_c, v, d });
    }
    let sd = (d as f64).sqrt();
    let mut layers = vec![Layer {
        index: 0,
        planning_radius: r as f64,
        radius: r,
        factor: 1,
    }];
    if fits_table(r, v) {
        return Ok(LayerPlan { layers });
    }
    let mut residual = ((r as f64).powi(2) - v as f64).sqrt();
    for i in 1u32.. {
        let f = b_c.checked_pow(i).ok_or_else(too_many_layers)?;
        let planning = residual + f as f64 * sd;
        let radius = ceil_up(planning / f as f64);
        layers.push(Layer {
            index: i,
            planning_radius: planning,
            radius,
            factor: f,
        });
        if fits_table(radius, v) {
            break;
        }
        let uncovered = ((radius as f64).powi(2) - v as f64).sqrt();
        residual = f as f64 * (uncovered + sd);
        if i > 64 {
            return Err(too_many_layers());
        }
    }
    Ok(LayerPlan { layers })
}

/// Exact integer dot product; the oracle for `compute`.
pub fn plaintext_dot(data: &DataComponent, query: &QueryComponent) -> i128 {
    data.entries
        .iter()
        .zip(&query.entries)
        .map(|(a, b)| *a as i128 * *b as i128)
        .sum()
}
