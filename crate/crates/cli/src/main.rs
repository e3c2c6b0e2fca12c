mod dataset;

use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use shrq_core::bench::{run_bench, BenchConfig, BenchRow};
use shrq_core::keyfile::{load_key, KeyFile, KeyFileError};
use shrq_core::oracle::{hrq_oracle, range_oracle, Record};
use shrq_core::protocol::{TcpTransport, Transport};
use shrq_core::server::{serve, state_dir_from};
use shrq_core::wire::{ErrorKind, Request, Response};
use shrq_core::{
    keygen, Backend, Client, DeploymentConfig, Layout, Point, ProtocolError, ProtocolKind, RangeQuery, Server,
    SphereQuery,
};

const EXIT_REJECTED: u8 = 2;
const EXIT_KEY: u8 = 3;
const EXIT_UNREACHABLE: u8 = 4;

#[derive(Parser)]
#[command(name = "shrq", version, about = "Encrypted hypersphere and range queries")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a secret key and deployment description.
    Keygen(KeygenArgs),
    /// Encrypt a CSV dataset and upload it to a server.
    Setup {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        server: String,
    },
    /// Run the storage server.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        /// State directory; falls back to SHRQ_STATE_DIR, else state is kept in memory.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Query the encrypted dataset.
    Query {
        #[arg(long, global = true)]
        key: Option<PathBuf>,
        #[arg(long, global = true)]
        server: Option<String>,
        #[command(subcommand)]
        shape: Shape,
    },
    /// Add one record.
    Insert(RecordArgs),
    /// Replace an existing record.
    Update(RecordArgs),
    /// Remove a record.
    Delete {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        id: u64,
        #[arg(long)]
        server: String,
    },
    /// Answer a query over the plaintext dataset.
    Oracle {
        #[arg(long, global = true)]
        data: Option<PathBuf>,
        #[command(subcommand)]
        shape: Shape,
    },
    /// Print timing rows as CSV; lists sweep every combination.
    Bench(BenchArgs),
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, default_value_t = 64)]
    lambda: u32,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "shrq")]
    layout: Layout,
    #[arg(long)]
    v: u64,
    #[arg(long)]
    x_max: u64,
    #[arg(long, default_value = "curve")]
    backend: Backend,
    #[arg(long, default_value = "t")]
    protocol: ProtocolKind,
    #[arg(long, default_value_t = 0)]
    emax: u32,
    /// Added to every coordinate, comma separated; defaults to zeros.
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RecordArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    id: u64,
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long)]
    server: String,
}

#[derive(Subcommand)]
enum Shape {
    Sphere {
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: u64,
    },
    /// Closed range on one column; omit --lo or --hi for an open end.
    Range {
        /// 1-based column index.
        #[arg(long)]
        col: usize,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<i64>,
        /// Lower bound used when --lo is omitted.
        #[arg(long, allow_hyphen_values = true)]
        col_min: Option<i64>,
        /// Upper bound used when --hi is omitted.
        #[arg(long, allow_hyphen_values = true)]
        col_max: Option<i64>,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "100")]
    points: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    d: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    queries: usize,
    #[arg(long, default_value_t = 32)]
    lambda: u32,
    #[arg(long, default_value = "curve")]
    backend: Backend,
    #[arg(long, default_value_t = 400)]
    v: u64,
    #[arg(long, default_value_t = 100)]
    x_max: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            if code == EXIT_REJECTED {
                if let Some(ProtocolError::Unsupported { rule, detail }) = e.downcast_ref::<ProtocolError>() {
                    eprintln!("{}", json!({ "error": "unsupported", "rule": rule, "detail": detail }));
                }
            }
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<KeyFileError>().is_some() {
        return EXIT_KEY;
    }
    match e.downcast_ref::<ProtocolError>() {
        Some(ProtocolError::Unsupported { .. }) => EXIT_REJECTED,
        Some(ProtocolError::Transport(_)) => EXIT_UNREACHABLE,
        Some(
            ProtocolError::Config(_)
            | ProtocolError::Integrity(_)
            | ProtocolError::Ces(_)
            | ProtocolError::Server {
                kind: ErrorKind::ParamMismatch | ErrorKind::NotPinned,
                ..
            },
        ) => EXIT_KEY,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Setup { key, data, server } => {
            let mut client = connect(&key, &server)?;
            let records = dataset::read(&data, Some(client.config().d))?;
            dataset::check_domain(&records, client.config())?;
            client.setup(&records)?;
            eprintln!("uploaded {} records", records.len());
            Ok(())
        }
        Command::Serve { listen, state } => cmd_serve(&listen, state),
        Command::Query { key, server, shape } => {
            let key = key.ok_or_else(|| anyhow!("--key is required"))?;
            let server = server.ok_or_else(|| anyhow!("--server is required"))?;
            let mut client = connect(&key, &server)?;
            let outcome = match resolve(&shape, Some(client.config()))? {
                Query::Sphere(q) => client.query_sphere(&q)?,
                Query::Range(rq) => client.query_range(&rq)?,
            };
            print_records(&outcome.records)
        }
        Command::Insert(a) => {
            let p = parse_point(&a.point)?;
            connect(&a.key, &a.server)?.insert(a.id, &p)?;
            Ok(())
        }
        Command::Update(a) => {
            let p = parse_point(&a.point)?;
            connect(&a.key, &a.server)?.update(a.id, &p)?;
            Ok(())
        }
        Command::Delete { key, id, server } => {
            connect(&key, &server)?.delete(id)?;
            Ok(())
        }
        Command::Oracle { data, shape } => {
            let data = data.ok_or_else(|| anyhow!("--data is required"))?;
            let records = dataset::read(&data, None)?;
            let ids = match resolve(&shape, None)? {
                Query::Sphere(q) => hrq_oracle(&records, &q),
                Query::Range(rq) => range_oracle(&records, &rq),
            };
            let hits: Vec<Record> = records.into_iter().filter(|(id, _)| ids.contains(id)).collect();
            print_records(&sorted(hits))
        }
        Command::Bench(a) => cmd_bench(a),
    }
}

fn cmd_keygen(a: KeygenArgs) -> Result<()> {
    let mut cfg = DeploymentConfig::new(a.protocol, a.layout, a.d, a.v, a.x_max, a.emax, a.backend)?;
    if let Some(off) = &a.offset {
        cfg = cfg.with_offset(parse_point(off)?.coords)?;
    }
    let (sk, _) = keygen(&cfg.ces_config(a.lambda), &mut rand::thread_rng())?;
    KeyFile::from_key(&sk, &cfg).save(&a.out)?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}

fn cmd_serve(listen: &str, state: Option<PathBuf>) -> Result<()> {
    let server = match state_dir_from(state) {
        Some(dir) => {
            Server::open(&dir).with_context(|| format!("cannot open state directory {}", dir.display()))?
        }
        None => {
            log::warn!("no state directory given; state is kept in memory only");
            Server::in_memory()
        }
    };
    let listener = TcpListener::bind(listen).with_context(|| format!("cannot listen on {listen}"))?;
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;
    serve(Arc::new(server), listener)?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", BenchRow::CSV_HEADER)?;
    for &d in &a.d {
        for &points in &a.points {
            let row = run_bench(&BenchConfig {
                points,
                d,
                queries: a.queries,
                lambda: a.lambda,
                backend: a.backend,
                v: a.v,
                x_max: a.x_max,
                seed: a.seed,
            })?;
            writeln!(out, "{}", row.to_csv())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Connects on the first message, so queries rejected during planning never touch the network.
struct LazyTcp {
    addr: String,
    conn: Option<TcpTransport>,
}

impl Transport for LazyTcp {
    fn send(&mut self, req: &Request) -> Result<Response, ProtocolError> {
        if self.conn.is_none() {
            let conn = TcpTransport::connect(self.addr.as_str()).map_err(|e| {
                ProtocolError::Transport(std::io::Error::new(e.kind(), format!("cannot reach server {}: {e}", self.addr)))
            })?;
            self.conn = Some(conn);
        }
        self.conn.as_mut().expect("connected above").send(req)
    }
}

fn connect(key: &Path, server: &str) -> Result<Client<LazyTcp>> {
    let (sk, cfg) = load_key(key)?;
    let transport = LazyTcp {
        addr: server.to_string(),
        conn: None,
    };
    Ok(Client::new(sk, cfg, transport)?)
}

enum Query {
    Sphere(SphereQuery),
    Range(RangeQuery),
}

/// Turns command-line query arguments into a query. Open range ends fall back
/// to --col-min/--col-max, then to the deployment's domain when a key is known.
fn resolve(shape: &Shape, cfg: Option<&DeploymentConfig>) -> Result<Query> {
    match shape {
        Shape::Sphere { center, radius } => Ok(Query::Sphere(SphereQuery {
            center: parse_point(center)?,
            radius: *radius,
        })),
        Shape::Range {
            col,
            lo,
            hi,
            col_min,
            col_max,
        } => {
            if *col == 0 {
                bail!("--col is 1-based");
            }
            let c = col - 1;
            let domain = cfg
                .filter(|cfg| c < cfg.d)
                .map(|cfg| (-cfg.offset[c], cfg.x_max as i64 - cfg.offset[c]));
            let lo = lo
                .or(*col_min)
                .or(domain.map(|d| d.0))
                .ok_or_else(|| anyhow!("give --lo or --col-min"))?;
            let hi = hi
                .or(*col_max)
                .or(domain.map(|d| d.1))
                .ok_or_else(|| anyhow!("give --hi or --col-max"))?;
            Ok(Query::Range(RangeQuery::new(c, lo, hi).map_err(ProtocolError::from)?))
        }
    }
}

fn parse_point(s: &str) -> Result<Point> {
    let coords = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().with_context(|| format!("'{t}' is not an integer")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Point::new(coords))
}

fn sorted(mut records: Vec<Record>) -> Vec<Record> {
    records.sort_by_key(|(id, _)| *id);
    records
}

fn print_records(records: &[Record]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    for (id, p) in records {
        writeln!(out, "{}", json!({ "id": id, "coords": p.coords }))?;
    }
    Ok(())
}
