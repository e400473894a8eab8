//! Client and server roles exchanging canonical documents over a byte stream.
//!
//! Frames are a 4-byte big-endian length followed by the payload. The server
//! only ever sees query bytes; everything private stays on the client side.

use std::io::{Cursor, Read, Write};

use rand::Rng;

use crate::codec::{decode_answer, decode_query, encode_answer, encode_query};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::rate::ProblemParams;
use crate::scheme::{
    build_layout, client_decode, make_query, server_answer, Database, DemandSpec, Round,
};

/// Largest frame accepted, 64 MiB.
pub const MAX_FRAME: usize = 64 << 20;

fn io_err(e: std::io::Error) -> Error {
    Error::Transport(e.to_string())
}

pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> Result<()> {
    let len = u32::try_from(payload.len())
        .ok()
        .filter(|&l| l as usize <= MAX_FRAME)
        .ok_or_else(|| Error::Transport(format!("frame of {} bytes too large", payload.len())))?;
    w.write_all(&len.to_be_bytes()).map_err(io_err)?;
    w.write_all(payload).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Vec<u8>> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len).map_err(io_err)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(Error::Transport(format!("frame of {len} bytes too large")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(io_err)?;
    Ok(buf)
}

pub trait Transport {
    /// Sends one request and waits for its response.
    fn round_trip(&mut self, request: &[u8]) -> Result<Vec<u8>>;
}

pub struct Server {
    db: Database,
}

impl Server {
    pub fn new(db: Database) -> Self {
        Self { db }
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    /// Query bytes in, answer bytes out.
    pub fn handle(&self, request: &[u8]) -> Result<Vec<u8>> {
        let query = decode_query(request)?;
        let answer = server_answer(&query, &self.db)?;
        Ok(encode_answer(&answer, self.db.field()))
    }

    /// Reads one framed request from `input` and writes the framed response.
    pub fn serve<R: Read, W: Write>(&self, input: &mut R, output: &mut W) -> Result<()> {
        let request = read_frame(input)?;
        let response = self.handle(&request)?;
        write_frame(output, &response)
    }
}

/// Both roles in one process, connected by in-memory byte pipes.
pub struct InProcess<'a> {
    server: &'a Server,
    pub bytes_sent: usize,
    pub bytes_received: usize,
}

impl<'a> InProcess<'a> {
    pub fn new(server: &'a Server) -> Self {
        Self {
            server,
            bytes_sent: 0,
            bytes_received: 0,
        }
    }
}

impl Transport for InProcess<'_> {
    fn round_trip(&mut self, request: &[u8]) -> Result<Vec<u8>> {
        let mut upstream = Vec::new();
        write_frame(&mut upstream, request)?;
        self.bytes_sent += upstream.len();
        let mut downstream = Vec::new();
        self.server
            .serve(&mut Cursor::new(upstream), &mut downstream)?;
        self.bytes_received += downstream.len();
        read_frame(&mut Cursor::new(downstream))
    }
}

/// Client side of one retrieval: build the layout, send the query, decode.
pub fn retrieve<R: Rng + ?Sized, T: Transport + ?Sized>(
    params: ProblemParams,
    spec: &DemandSpec,
    field: PrimeField,
    transport: &mut T,
    rng: &mut R,
) -> Result<Round> {
    let layout = build_layout(params, spec, rng)?;
    let query = make_query(&layout, field)?;
    let response = transport.round_trip(&encode_query(&query))?;
    let (answer, answer_field) = decode_answer(&response)?;
    if answer_field != field {
        return Err(Error::IncompatibleModuli {
            left: field.modulus(),
            right: answer_field.modulus(),
        });
    }
    for (block, coded) in query.blocks().iter().zip(answer.blocks()) {
        if block.matrix.rows() != coded.len() {
            return Err(Error::LengthMismatch {
                expected: block.matrix.rows(),
                actual: coded.len(),
            });
        }
    }
    let decoded = client_decode(&query, &answer, spec)?;
    Ok(Round {
        layout,
        query,
        answer,
        decoded,
    })
}
