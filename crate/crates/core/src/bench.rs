//! End-to-end timing runs: setup, tuple encryption and query latency for a
//! random dataset against an in-process server.

use std::sync::Arc;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::ces::{keygen, tuple_encrypt, CesError, Layout, SecretKey};
use crate::geometry::{make_data_component, Point, SphereQuery};
use crate::pairing::Backend;
use crate::protocol::{Client, DeploymentConfig, LocalTransport, ProtocolError, ProtocolKind};
use crate::server::Server;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub points: usize,
    pub d: usize,
    pub queries: usize,
    pub lambda: u32,
    pub backend: Backend,
    pub v: u64,
    pub x_max: u64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            points: 100,
            d: 2,
            queries: 10,
            lambda: 32,
            backend: Backend::Transparent,
            v: 400,
            x_max: 100,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub points: usize,
    pub d: usize,
    pub queries: usize,
    pub backend: Backend,
    /// Full protocol-T setup upload, milliseconds.
    pub setup_ms: f64,
    /// Mean time to encrypt one tuple, milliseconds.
    pub tuple_enc_ms: f64,
    /// Mean time per query round trip including validation, milliseconds.
    pub query_ms: f64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "points,d,queries,backend,setup_ms,tuple_enc_ms,query_ms";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{:.4}",
            self.points, self.d, self.queries, self.backend, self.setup_ms, self.tuple_enc_ms, self.query_ms
        )
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Mean milliseconds to encrypt one level-0 tuple, over `points`.
pub fn time_tuple_encryption<R: Rng + ?Sized>(sk: &SecretKey, points: &[Point], rng: &mut R) -> Result<f64, CesError> {
    let comps: Vec<_> = points.iter().map(|p| make_data_component(p, sk.layout())).collect();
    let start = Instant::now();
    for c in &comps {
        tuple_encrypt(sk, c, rng)?;
    }
    Ok(ms(start) / points.len().max(1) as f64)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchRow, ProtocolError> {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let deploy = DeploymentConfig::new(ProtocolKind::T, Layout::Shrq, cfg.d, cfg.v, cfg.x_max, 0, cfg.backend)?;
    let (sk, _) = keygen(&deploy.ces_config(cfg.lambda), &mut rng)?;
    let coord = |rng: &mut StdRng| rng.gen_range(0..=cfg.x_max as i64);
    let data: Vec<(u64, Point)> = (0..cfg.points as u64)
        .map(|id| (id, Point::new((0..cfg.d).map(|_| coord(&mut rng)).collect())))
        .collect();

    let points: Vec<Point> = data.iter().map(|(_, p)| p.clone()).collect();
    let tuple_enc_ms = time_tuple_encryption(&sk, &points, &mut rng)?;

    let server = Arc::new(Server::in_memory());
    let mut client = Client::new(sk, deploy, LocalTransport::new(server))?.with_seed(cfg.seed);
    let start = Instant::now();
    client.setup(&data)?;
    let setup_ms = ms(start);

    let max_r = (cfg.v as f64).sqrt().floor() as u64;
    let qs: Vec<SphereQuery> = (0..cfg.queries)
        .map(|_| SphereQuery {
            center: Point::new((0..cfg.d).map(|_| coord(&mut rng)).collect()),
            radius: rng.gen_range(0..=max_r),
        })
        .collect();
    let start = Instant::now();
    for q in &qs {
        client.query_sphere(q)?;
    }
    let query_ms = ms(start) / cfg.queries.max(1) as f64;

    Ok(BenchRow {
        points: cfg.points,
        d: cfg.d,
        queries: cfg.queries,
        backend: cfg.backend,
        setup_ms,
        tuple_enc_ms,
        query_ms,
    })
}

/// Ranks with ties sharing their average rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; NaN for fewer than two points or constant input.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
