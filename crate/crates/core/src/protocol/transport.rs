use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::Arc;

use super::ProtocolError;
use crate::server::Server;
use crate::wire::{Request, Response};

/// Request/reply channel to a server.
pub trait Transport {
    fn send(&mut self, req: &Request) -> Result<Response, ProtocolError>;
}

fn parse_reply(line: &str) -> Result<Response, ProtocolError> {
    serde_json::from_str(line.trim_end()).map_err(|e| ProtocolError::UnexpectedReply(format!("{e}: {line}")))
}

/// In-process server reached through the same JSON lines as the TCP path.
#[derive(Clone)]
pub struct LocalTransport {
    server: Arc<Server>,
}

impl LocalTransport {
    pub fn new(server: Arc<Server>) -> Self {
        Self { server }
    }

    pub fn server(&self) -> &Arc<Server> {
        &self.server
    }
}

impl Transport for LocalTransport {
    fn send(&mut self, req: &Request) -> Result<Response, ProtocolError> {
        parse_reply(&self.server.handle_line(&req.to_line()))
    }
}

pub struct TcpTransport {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl TcpTransport {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
        })
    }

    /// Sends one raw line and returns the raw reply line.
    pub fn round_trip(&mut self, line: &str) -> io::Result<String> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        let mut reply = String::new();
        if self.reader.read_line(&mut reply)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "server closed the connection"));
        }
        Ok(reply)
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, req: &Request) -> Result<Response, ProtocolError> {
        let reply = self.round_trip(&req.to_line())?;
        parse_reply(&reply)
    }
}
