use std::fmt;

use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::ces::{CesConfig, Layout, SecretKey};
use crate::geometry::{coarsity_base, Point};
use crate::pairing::Backend;

/// Which execution strategy queries use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// Single store; radii up to √v.
    T,
    /// Coarse stores with base 2; one execution per query.
    C,
    /// Coarse stores with base b_c; one execution per layer.
    L,
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::T => "t",
            ProtocolKind::C => "c",
            ProtocolKind::L => "l",
        })
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "t" => Ok(ProtocolKind::T),
            "c" => Ok(ProtocolKind::C),
            "l" => Ok(ProtocolKind::L),
            other => Err(format!("unknown protocol '{other}' (expected t, c or l)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeploymentConfig {
    pub protocol: ProtocolKind,
    pub layout: Layout,
    pub d: usize,
    pub v: u64,
    pub x_max: u64,
    pub e_max: u32,
    /// Coarsity base of protocol L, derived from v and d.
    pub b_c: Option<u64>,
    pub backend: Backend,
    /// Added to every coordinate before encryption so stored values are non-negative.
    pub offset: Vec<i64>,
}

impl DeploymentConfig {
    pub fn new(
        protocol: ProtocolKind,
        layout: Layout,
        d: usize,
        v: u64,
        x_max: u64,
        e_max: u32,
        backend: Backend,
    ) -> Result<Self, ProtocolError> {
        let b_c = match protocol {
            ProtocolKind::L => Some(coarsity_base(v, d).map_err(|e| ProtocolError::Config(e.to_string()))?),
            _ => None,
        };
        let cfg = Self {
            protocol,
            layout,
            d,
            v,
            x_max,
            e_max,
            b_c,
            backend,
            offset: vec![0; d],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_offset(mut self, offset: Vec<i64>) -> Result<Self, ProtocolError> {
        self.offset = offset;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::Config(m));
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if self.offset.len() != self.d {
            return bad(format!("offset has {} entries, expected {}", self.offset.len(), self.d));
        }
        match self.protocol {
            ProtocolKind::T if self.e_max != 0 => return bad("protocol t uses a single store (E_max = 0)".into()),
            ProtocolKind::L => {
                let want = coarsity_base(self.v, self.d).map_err(|e| ProtocolError::Config(e.to_string()))?;
                if self.b_c != Some(want) {
                    return bad(format!("b_c must equal {want} for v = {}, d = {}", self.v, self.d));
                }
            }
            ProtocolKind::C if self.b_c.is_some() => return bad("b_c only applies to protocol l".into()),
            _ => {}
        }
        if self.base().checked_pow(self.e_max).is_none() {
            return bad(format!("coarsity factor {}^{} overflows", self.base(), self.e_max));
        }
        Ok(())
    }

    /// Number of coarsity stores, E_max + 1.
    pub fn levels(&self) -> u32 {
        self.e_max + 1
    }

    pub fn base(&self) -> u64 {
        match self.protocol {
            ProtocolKind::T => 1,
            ProtocolKind::C => 2,
            ProtocolKind::L => self.b_c.unwrap_or(2),
        }
    }

    /// Coarsity factor of a store level.
    pub fn factor(&self, level: u32) -> u64 {
        self.base().pow(level)
    }

    pub fn ces_config(&self, lambda: u32) -> CesConfig {
        CesConfig {
            lambda,
            d: self.d,
            layout: self.layout,
            v: self.v,
            x_max: self.x_max,
            backend: self.backend,
        }
    }

    /// Checks that a key was generated for this deployment.
    pub fn check_key(&self, sk: &SecretKey) -> Result<(), ProtocolError> {
        let same = sk.layout() == self.layout
            && sk.d() == self.d
            && sk.v() == self.v
            && sk.x_max() == self.x_max
            && sk.group().backend() == self.backend;
        if same {
            Ok(())
        } else {
            Err(ProtocolError::Config("key does not match the deployment parameters".into()))
        }
    }

    /// Applies the offset and checks every coordinate lands in [0, x_max].
    pub fn to_domain(&self, id: u64, p: &Point) -> Result<Point, ProtocolError> {
        if p.dim() != self.d {
            return Err(ProtocolError::Ingestion {
                id,
                reason: format!("expected {} coordinates, got {}", self.d, p.dim()),
            });
        }
        let coords = p
            .coords
            .iter()
            .zip(&self.offset)
            .enumerate()
            .map(|(i, (x, o))| {
                x.checked_add(*o)
                    .filter(|s| (0..=self.x_max as i64).contains(s))
                    .ok_or_else(|| ProtocolError::Ingestion {
                        id,
                        reason: format!("coordinate x{} = {x} outside the domain", i + 1),
                    })
            })
            .collect::<Result<_, _>>()?;
        Ok(Point::new(coords))
    }

    /// Applies the offset to a query center without a domain check.
    pub fn shift(&self, p: &Point) -> Result<Point, ProtocolError> {
        if p.dim() != self.d {
            return Err(ProtocolError::InvalidQuery(format!(
                "expected {} coordinates, got {}",
                self.d,
                p.dim()
            )));
        }
        let limit = 4 * self.x_max as i64 + 4;
        let coords = p
            .coords
            .iter()
            .zip(&self.offset)
            .map(|(x, o)| {
                x.checked_add(*o)
                    .filter(|s| s.abs() <= limit)
                    .ok_or_else(|| ProtocolError::InvalidQuery(format!("coordinate {x} is far outside the domain")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Point::new(coords))
    }
}
