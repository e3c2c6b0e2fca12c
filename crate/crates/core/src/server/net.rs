use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::Arc;
use std::thread;

use super::Server;
use crate::wire::{ErrorKind, Response};

pub const STATE_DIR_ENV: &str = "SHRQ_STATE_DIR";

/// Longest accepted message line.
const MAX_LINE: u64 = 64 << 20;

/// The `--state` flag value, or the environment fallback.
pub fn state_dir_from(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(STATE_DIR_ENV).map(PathBuf::from))
}

/// Accepts connections forever, one thread per connection.
pub fn serve(server: Arc<Server>, listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        match stream {
            Ok(stream) => {
                let server = Arc::clone(&server);
                thread::spawn(move || {
                    let peer = stream.peer_addr().ok();
                    if let Err(e) = handle_connection(&server, stream) {
                        log::debug!("connection {peer:?} ended: {e}");
                    }
                });
            }
            Err(e) => log::warn!("accept failed: {e}"),
        }
    }
    Ok(())
}

/// Processes newline-delimited requests on one connection until EOF.
pub fn handle_connection(server: &Server, stream: TcpStream) -> io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = stream;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = (&mut reader).take(MAX_LINE).read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Ok(());
        }
        if buf.last() != Some(&b'\n') && n as u64 == MAX_LINE {
            let reply = Response::error(ErrorKind::Malformed, "message too long");
            writeln!(writer, "{}", reply.to_line())?;
            return Ok(());
        }
        let reply = match std::str::from_utf8(&buf) {
            Ok(line) if line.trim().is_empty() => continue,
            Ok(line) => server.handle_line(line),
            Err(_) => Response::error(ErrorKind::Malformed, "message is not UTF-8").to_line(),
        };
        writer.write_all(reply.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
}
