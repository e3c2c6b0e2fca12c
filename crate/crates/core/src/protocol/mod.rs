//! Data-owner setup, query planning, encryption and validation on the
//! client side of the wire protocol.

pub mod blob;
mod config;
mod transport;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::ces::{create_lookup_table, query_encrypt, tuple_encrypt, CesError, SecretKey};
use crate::geometry::{
    check_layered_support, coarse_radius, coarse_transform, covering_layers, make_data_component,
    make_sphere_query_component, range_to_sphere, select_coarsity_exponent, GeometryError, Point, RangeQuery,
    SphereQuery,
};
use crate::oracle::Record;
use crate::wire::{self, b64, unb64, ErrorKind, Request, Response};

pub use config::{DeploymentConfig, ProtocolKind};
pub use transport::{LocalTransport, TcpTransport, Transport};

#[derive(Debug, Error)]
pub enum ProtocolError {
    /// The query lies outside what the deployment supports; nothing was sent.
    #[error("query not supported: {rule} ({detail})")]
    Unsupported { rule: String, detail: String },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("setup error: {0}")]
    Setup(String),
    #[error("record {id}: {reason}")]
    Ingestion { id: u64, reason: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("data integrity error: {0}")]
    Integrity(String),
    #[error("server error ({kind:?}): {message}")]
    Server { kind: ErrorKind, message: String },
    #[error("transport error: {0}")]
    Transport(#[from] std::io::Error),
    #[error("unexpected reply: {0}")]
    UnexpectedReply(String),
    #[error(transparent)]
    Ces(#[from] CesError),
}

impl From<GeometryError> for ProtocolError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::BaseTooSmall { .. } => ProtocolError::Config(e.to_string()),
            other => ProtocolError::InvalidQuery(other.to_string()),
        }
    }
}

/// Rule cited when a radius exceeds the single-store limit.
pub const RULE_T: &str = "r > sqrt(v)";
pub const RULE_C: &str = "r / 2^E_max + sqrt(d) > sqrt(v)";
pub const RULE_L: &str = "r / b_c^E_max + sqrt(d) > sqrt(v)";
pub const RULE_LAYERS: &str = "layer plan needs more than E_max levels";
pub const RULE_GROUP: &str = "coarse radius^2 >= q2";

/// One server round trip: a sphere in the coordinates of store `level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub level: u32,
    pub query: SphereQuery,
}

/// The plaintext predicate a result must satisfy, in original coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicate {
    Sphere(SphereQuery),
    Range(RangeQuery),
}

impl Predicate {
    pub fn holds(&self, p: &Point) -> bool {
        match self {
            Predicate::Sphere(q) => p.dim() == q.center.dim() && p.dist2(&q.center) <= (q.radius as i128).pow(2),
            Predicate::Range(rq) => rq.contains(p),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryOutcome {
    /// Validated records sorted by id.
    pub records: Vec<Record>,
    /// Ids returned by the server before validation, deduplicated.
    pub candidates: BTreeSet<u64>,
    /// Store level of each server round trip, in order.
    pub levels: Vec<u32>,
}

impl QueryOutcome {
    pub fn ids(&self) -> BTreeSet<u64> {
        self.records.iter().map(|(id, _)| *id).collect()
    }
}

/// The hello message pinning this deployment's public parameters.
pub fn hello_message(sk: &SecretKey, config: &DeploymentConfig) -> Request {
    let pp = sk.public_params();
    Request::Hello {
        group: pp.group,
        hash: pp.hash,
        levels: config.levels(),
    }
}

/// Upload messages for one record: the AES blob, then one tuple per level.
pub fn record_messages<R: Rng + ?Sized>(
    sk: &SecretKey,
    config: &DeploymentConfig,
    id: u64,
    p: &Point,
    rng: &mut R,
) -> Result<Vec<Request>, ProtocolError> {
    let shifted = config.to_domain(id, p)?;
    let mut out = Vec::with_capacity(config.levels() as usize + 1);
    out.push(Request::PutStore {
        id,
        blob: b64(&blob::seal(sk.aes_key(), id, p, rng)),
    });
    for level in 0..config.levels() {
        let coarse = coarse_transform(&shifted, config.factor(level));
        let tuple = tuple_encrypt(sk, &make_data_component(&coarse, config.layout), rng)?;
        out.push(wire::put_tuple(sk.group(), level, id, &tuple));
    }
    Ok(out)
}

/// Full setup stream: hello, lookup table, then every record.
pub fn setup_messages<R: Rng + ?Sized>(
    sk: &SecretKey,
    config: &DeploymentConfig,
    dataset: &[Record],
    rng: &mut R,
) -> Result<Vec<Request>, ProtocolError> {
    config.check_key(sk)?;
    let mut seen = BTreeSet::new();
    for (id, _) in dataset {
        if !seen.insert(*id) {
            return Err(ProtocolError::Setup(format!("duplicate id {id}")));
        }
    }
    let table = create_lookup_table(sk, config.v)?;
    let mut out = vec![
        hello_message(sk, config),
        Request::PutLookup {
            v: config.v,
            digests: b64(&table.to_bytes()),
        },
    ];
    for (id, p) in dataset {
        out.extend(record_messages(sk, config, *id, p, rng)?);
    }
    Ok(out)
}

/// Plans the executions for a sphere over the columns `cols` (all when `None`).
/// `q` is already shifted into the stored domain.
pub fn plan(
    config: &DeploymentConfig,
    q2: &BigUint,
    q: &SphereQuery,
    cols: Option<&[usize]>,
) -> Result<Vec<Execution>, ProtocolError> {
    let dims = cols.map_or(config.d, |c| c.len());
    let (r, v) = (q.radius, config.v);
    let unsupported = |rule: &str, detail: String| ProtocolError::Unsupported {
        rule: rule.to_string(),
        detail,
    };
    let at = |level: u32, radius: u64| Execution {
        level,
        query: SphereQuery {
            center: coarse_transform(&q.center, config.factor(level)),
            radius,
        },
    };
    let execs = match config.protocol {
        ProtocolKind::T => {
            if (r as u128).pow(2) > v as u128 {
                return Err(unsupported(RULE_T, format!("r = {r}, v = {v}")));
            }
            vec![at(0, r)]
        }
        ProtocolKind::C => {
            let e = select_coarsity_exponent(r, v, dims, config.e_max, 2)
                .map_err(|_| unsupported(RULE_C, format!("r = {r}, E_max = {}, d = {dims}, v = {v}", config.e_max)))?;
            vec![at(e, coarse_radius(r, e, 2, dims))]
        }
        ProtocolKind::L => {
            let b_c = config.base();
            check_layered_support(r, v, dims, b_c, config.e_max)
                .map_err(|_| unsupported(RULE_L, format!("r = {r}, b_c = {b_c}, E_max = {}", config.e_max)))?;
            let layers = covering_layers(r, v, dims, b_c)?;
            let deepest = layers.layers.last().map_or(0, |l| l.index);
            if deepest > config.e_max {
                return Err(unsupported(
                    RULE_LAYERS,
                    format!("r = {r} needs level {deepest}, E_max = {}", config.e_max),
                ));
            }
            layers.layers.iter().map(|l| at(l.index, l.radius)).collect()
        }
    };
    for ex in &execs {
        let r2 = BigUint::from(ex.query.radius).pow(2);
        if &r2 >= q2 {
            return Err(unsupported(RULE_GROUP, format!("radius {} at level {}", ex.query.radius, ex.level)));
        }
    }
    Ok(execs)
}

/// A data owner / query user bound to a key, a deployment and a server connection.
pub struct Client<T: Transport> {
    sk: SecretKey,
    config: DeploymentConfig,
    transport: T,
    rng: StdRng,
}

impl<T: Transport> Client<T> {
    pub fn new(sk: SecretKey, config: DeploymentConfig, transport: T) -> Result<Self, ProtocolError> {
        config.validate()?;
        config.check_key(&sk)?;
        Ok(Self {
            sk,
            config,
            transport,
            rng: StdRng::from_entropy(),
        })
    }

    /// Replaces the randomness source, for reproducible runs.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng = StdRng::seed_from_u64(seed);
        self
    }

    pub fn config(&self) -> &DeploymentConfig {
        &self.config
    }

    pub fn secret_key(&self) -> &SecretKey {
        &self.sk
    }

    pub fn transport_mut(&mut self) -> &mut T {
        &mut self.transport
    }

    fn send_ack(&mut self, req: &Request) -> Result<(), ProtocolError> {
        match self.transport.send(req)? {
            Response::Ack => Ok(()),
            other => Err(reply_error(other)),
        }
    }

    pub fn setup(&mut self, dataset: &[Record]) -> Result<(), ProtocolError> {
        let msgs = setup_messages(&self.sk, &self.config, dataset, &mut self.rng)?;
        log::info!("uploading {} setup messages", msgs.len());
        msgs.iter().try_for_each(|m| self.send_ack(m))
    }

    pub fn insert(&mut self, id: u64, p: &Point) -> Result<(), ProtocolError> {
        let msgs = record_messages(&self.sk, &self.config, id, p, &mut self.rng)?;
        msgs.iter().try_for_each(|m| self.send_ack(m))
    }

    pub fn delete(&mut self, id: u64) -> Result<(), ProtocolError> {
        self.send_ack(&Request::Delete { id })
    }

    /// Delete followed by re-insertion under the same id.
    pub fn update(&mut self, id: u64, p: &Point) -> Result<(), ProtocolError> {
        // encrypt first so a bad point leaves the old record in place
        let msgs = record_messages(&self.sk, &self.config, id, p, &mut self.rng)?;
        self.delete(id)?;
        msgs.iter().try_for_each(|m| self.send_ack(m))
    }

    /// Executions and encrypted messages for a sphere query, without sending.
    pub fn sphere_messages(&mut self, q: &SphereQuery) -> Result<Vec<Request>, ProtocolError> {
        let shifted = SphereQuery {
            center: self.config.shift(&q.center)?,
            radius: q.radius,
        };
        let execs = plan(&self.config, &self.sk.params().q2, &shifted, None)?;
        self.encrypt_executions(&execs, None)
    }

    /// Executions and encrypted messages for a range query, without sending.
    pub fn range_messages(&mut self, rq: &RangeQuery) -> Result<Vec<Request>, ProtocolError> {
        let (sphere, col) = self.range_sphere(rq)?;
        let execs = plan(&self.config, &self.sk.params().q2, &sphere, Some(&[col]))?;
        self.encrypt_executions(&execs, Some(&[col]))
    }

    fn range_sphere(&self, rq: &RangeQuery) -> Result<(SphereQuery, usize), ProtocolError> {
        if self.config.layout != crate::ces::Layout::Unified {
            return Err(GeometryError::UnsupportedLayout.into());
        }
        if rq.col >= self.config.d {
            return Err(ProtocolError::InvalidQuery(format!("column {} out of range", rq.col + 1)));
        }
        let off = self.config.offset[rq.col];
        let shifted = RangeQuery::new(rq.col, rq.lo.saturating_add(off), rq.hi.saturating_add(off))?;
        let limit = 4 * self.config.x_max as i64 + 4;
        if shifted.lo < -limit || shifted.hi > limit {
            return Err(ProtocolError::InvalidQuery("range far outside the domain".into()));
        }
        Ok((range_to_sphere(&shifted, self.config.d)?, rq.col))
    }

    fn encrypt_executions(&mut self, execs: &[Execution], cols: Option<&[usize]>) -> Result<Vec<Request>, ProtocolError> {
        execs
            .iter()
            .map(|ex| {
                let comp = make_sphere_query_component(&ex.query, self.config.layout, cols)?;
                let eq = query_encrypt(&self.sk, &comp, ex.level, &mut self.rng)?;
                Ok(wire::query(self.sk.group(), &eq))
            })
            .collect()
    }

    pub fn query_sphere(&mut self, q: &SphereQuery) -> Result<QueryOutcome, ProtocolError> {
        let msgs = self.sphere_messages(q)?;
        self.run(&msgs, &Predicate::Sphere(q.clone()))
    }

    pub fn query_range(&mut self, rq: &RangeQuery) -> Result<QueryOutcome, ProtocolError> {
        let msgs = self.range_messages(rq)?;
        self.run(&msgs, &Predicate::Range(rq.clone()))
    }

    /// Sends the query messages, unions the matches by id, decrypts and validates.
    fn run(&mut self, msgs: &[Request], pred: &Predicate) -> Result<QueryOutcome, ProtocolError> {
        let mut blobs: BTreeMap<u64, String> = BTreeMap::new();
        let mut levels = Vec::with_capacity(msgs.len());
        for m in msgs {
            if let Request::Query { level, .. } = m {
                levels.push(*level);
            }
            match self.transport.send(m)? {
                Response::Result { matches } => {
                    for mt in matches {
                        blobs.entry(mt.id).or_insert(mt.blob);
                    }
                }
                other => return Err(reply_error(other)),
            }
        }
        let candidates = blobs.keys().copied().collect();
        let mut records = Vec::new();
        for (id, b) in blobs {
            let bytes = unb64(&b).map_err(|e| ProtocolError::Integrity(format!("blob for id {id}: {e}")))?;
            let p = blob::open(self.sk.aes_key(), id, &bytes)?;
            if pred.holds(&p) {
                records.push((id, p));
            }
        }
        Ok(QueryOutcome {
            records,
            candidates,
            levels,
        })
    }
}

fn reply_error(resp: Response) -> ProtocolError {
    match resp {
        Response::Error { kind, message } => match kind {
            ErrorKind::Conflict => ProtocolError::Conflict(message),
            ErrorKind::NotFound => ProtocolError::NotFound(message),
            ErrorKind::Integrity => ProtocolError::Integrity(message),
            kind => ProtocolError::Server { kind, message },
        },
        other => ProtocolError::UnexpectedReply(other.to_line()),
    }
}
