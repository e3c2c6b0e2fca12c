//! Append-only message log plus periodic snapshots.
//!
//! Every accepted mutation is appended to `log.jsonl` with a sequence number
//! and synced before it is acknowledged. A snapshot stores the messages that
//! rebuild the state together with the last sequence number it covers, so
//! log entries at or below that number are skipped on replay.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ServerError;
use crate::wire::Request;

const LOG_FILE: &str = "log.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Serialize, Deserialize)]
struct LogEntry {
    seq: u64,
    msg: Request,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    messages: Vec<Request>,
}

pub(super) struct Persistence {
    dir: PathBuf,
    log: File,
    seq: u64,
    since_snapshot: u64,
    snapshot_every: u64,
}

impl Persistence {
    /// Opens the directory and returns the messages to replay, in order.
    pub(super) fn open(dir: &Path, snapshot_every: u64) -> Result<(Self, Vec<Request>), ServerError> {
        fs::create_dir_all(dir)?;
        let mut replay = Vec::new();
        let mut seq = 0;
        let snap_path = dir.join(SNAPSHOT_FILE);
        if snap_path.exists() {
            let snap: Snapshot = serde_json::from_slice(&fs::read(&snap_path)?)
                .map_err(|e| ServerError::Corrupt(format!("{SNAPSHOT_FILE}: {e}")))?;
            seq = snap.seq;
            replay = snap.messages;
        }

        let log_path = dir.join(LOG_FILE);
        let mut since_snapshot = 0;
        let mut valid_len = 0u64;
        if log_path.exists() {
            let mut reader = BufReader::new(File::open(&log_path)?);
            let mut line = String::new();
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                if !line.ends_with('\n') {
                    // torn final write: never acknowledged
                    log::warn!("discarding incomplete trailing log entry");
                    break;
                }
                let entry: LogEntry = serde_json::from_str(&line)
                    .map_err(|e| ServerError::Corrupt(format!("{LOG_FILE} at byte {valid_len}: {e}")))?;
                valid_len += n as u64;
                if entry.seq > seq {
                    if entry.seq != seq + 1 {
                        return Err(ServerError::Corrupt(format!("log gap before sequence {}", entry.seq)));
                    }
                    seq = entry.seq;
                    since_snapshot += 1;
                    replay.push(entry.msg);
                }
            }
        }
        let log = OpenOptions::new().create(true).append(true).open(&log_path)?;
        log.set_len(valid_len)?;
        Ok((
            Self {
                dir: dir.to_path_buf(),
                log,
                seq,
                since_snapshot,
                snapshot_every: snapshot_every.max(1),
            },
            replay,
        ))
    }

    pub(super) fn append(&mut self, msg: &Request) -> io::Result<()> {
        let entry = LogEntry {
            seq: self.seq + 1,
            msg: msg.clone(),
        };
        let mut line = serde_json::to_vec(&entry).map_err(io::Error::other)?;
        line.push(b'\n');
        self.log.write_all(&line)?;
        self.log.sync_data()?;
        self.seq += 1;
        self.since_snapshot += 1;
        Ok(())
    }

    pub(super) fn snapshot_due(&self) -> bool {
        self.since_snapshot >= self.snapshot_every
    }

    /// Writes a snapshot atomically, then empties the log.
    pub(super) fn snapshot(&mut self, messages: &[Request]) -> io::Result<()> {
        let snap = Snapshot {
            seq: self.seq,
            messages: messages.to_vec(),
        };
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            serde_json::to_writer(&mut f, &snap).map_err(io::Error::other)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join(SNAPSHOT_FILE))?;
        if let Ok(d) = File::open(&self.dir) {
            // directory fsync is best effort on platforms that refuse it
            let _ = d.sync_all();
        }
        // entries up to `seq` are covered by the snapshot even if this truncate is lost
        self.log.set_len(0)?;
        self.log.sync_all()?;
        self.since_snapshot = 0;
        log::debug!("snapshot written at sequence {}", self.seq);
        Ok(())
    }
}
