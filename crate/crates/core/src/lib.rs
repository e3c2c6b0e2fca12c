//! Secure hypersphere and range queries over points encrypted with a
//! composite-order pairing scheme.

pub mod bench;
pub mod ces;
pub mod geometry;
pub mod keyfile;
pub mod oracle;
pub mod pairing;
pub mod protocol;
pub mod server;
pub mod wire;

pub use ces::{keygen, CesConfig, Layout, PublicParams, SecretKey};
pub use geometry::{Point, RangeQuery, SphereQuery};
pub use pairing::Backend;
pub use protocol::{Client, DeploymentConfig, ProtocolError, ProtocolKind, QueryOutcome};
pub use server::Server;
