//! The storage facility: keeps pseudonymised flow rows and answers a
//! deliberately tiny query language.
//!
//! Grammar (keywords case-insensitive):
//!
//! ```text
//! select COL[, COL]* [where COND [and COND]*] [order by NUMCOL] [limit N]
//! COL    := src | dst | ts | bytes | packets
//! COND   := (src|dst) = $k                   -- k-th argument, encrypted
//!         | NUMCOL (= | < | > | <= | >=) NUMBER
//! ```
//!
//! Address columns compare only against encrypted arguments and only for
//! equality; numeric columns compare only against literals; ordering by an
//! address column is refused.  Address cells in results are re-encrypted —
//! raw pseudonym encodings never leave this process.

use std::fs::OpenOptions;
use std::path::PathBuf;
use std::sync::Mutex;

use pep3_group::GroupElement;

use super::PartyCore;
use crate::error::{Error, Result};
use crate::wire::transport::Endpoint;
use crate::wire::{
    decode_frame, encode_frame, ErrorResponse, IngestRequest, IngestResponse, Message,
    QueryRequest, QueryResponse, Value,
};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Col {
    Src,
    Dst,
    Ts,
    Bytes,
    Packets,
}

impl Col {
    fn parse(tok: &str) -> Result<Col> {
        match tok {
            "src" => Ok(Col::Src),
            "dst" => Ok(Col::Dst),
            "ts" => Ok(Col::Ts),
            "bytes" => Ok(Col::Bytes),
            "packets" => Ok(Col::Packets),
            _ => Err(Error::QueryRejected(format!("unknown column {tok:?}"))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Col::Src => "src",
            Col::Dst => "dst",
            Col::Ts => "ts",
            Col::Bytes => "bytes",
            Col::Packets => "packets",
        }
    }

    fn is_address(self) -> bool {
        matches!(self, Col::Src | Col::Dst)
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl Op {
    fn parse(tok: &str) -> Result<Op> {
        match tok {
            "=" => Ok(Op::Eq),
            "<" => Ok(Op::Lt),
            ">" => Ok(Op::Gt),
            "<=" => Ok(Op::Le),
            ">=" => Ok(Op::Ge),
            _ => Err(Error::QueryRejected(format!("unknown operator {tok:?}"))),
        }
    }

    fn eval(self, a: u64, b: u64) -> bool {
        match self {
            Op::Eq => a == b,
            Op::Lt => a < b,
            Op::Gt => a > b,
            Op::Le => a <= b,
            Op::Ge => a >= b,
        }
    }
}

#[derive(Debug)]
enum Cond {
    AddressEq(Col, usize),
    Plain(Col, Op, u64),
}

#[derive(Debug)]
struct Query {
    cols: Vec<Col>,
    conds: Vec<Cond>,
    order: Option<Col>,
    limit: Option<usize>,
}

fn parse_query(text: &str) -> Result<Query> {
    let spaced = text.replace(',', " , ");
    let tokens: Vec<String> =
        spaced.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    let mut pos = 0usize;
    let next = |pos: &mut usize| -> Result<&str> {
        let t = tokens
            .get(*pos)
            .ok_or_else(|| Error::QueryRejected("query ends mid-clause".into()))?;
        *pos += 1;
        Ok(t)
    };

    if next(&mut pos)? != "select" {
        return Err(Error::QueryRejected("queries start with select".into()));
    }
    let mut cols = vec![Col::parse(next(&mut pos)?)?];
    while tokens.get(pos).map(String::as_str) == Some(",") {
        pos += 1;
        cols.push(Col::parse(next(&mut pos)?)?);
    }

    let mut conds = Vec::new();
    if tokens.get(pos).map(String::as_str) == Some("where") {
        pos += 1;
        loop {
            let col = Col::parse(next(&mut pos)?)?;
            let op = Op::parse(next(&mut pos)?)?;
            let value = next(&mut pos)?;
            if col.is_address() {
                if !matches!(op, Op::Eq) {
                    return Err(Error::QueryRejected(
                        "address columns only support equality".into(),
                    ));
                }
                let k = value
                    .strip_prefix('$')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|k| *k >= 1)
                    .ok_or_else(|| {
                        Error::QueryRejected(
                            "address columns only compare against encrypted arguments ($1, $2, …)"
                                .into(),
                        )
                    })?;
                conds.push(Cond::AddressEq(col, k - 1));
            } else {
                if value.starts_with('$') {
                    return Err(Error::QueryRejected(
                        "numeric columns only compare against literals".into(),
                    ));
                }
                let n = value.parse::<u64>().map_err(|_| {
                    Error::QueryRejected(format!("bad numeric literal {value:?}"))
                })?;
                conds.push(Cond::Plain(col, op, n));
            }
            if tokens.get(pos).map(String::as_str) == Some("and") {
                pos += 1;
                continue;
            }
            break;
        }
    }

    let mut order = None;
    if tokens.get(pos).map(String::as_str) == Some("order") {
        pos += 1;
        if next(&mut pos)? != "by" {
            return Err(Error::QueryRejected("expected `order by`".into()));
        }
        let col = Col::parse(next(&mut pos)?)?;
        if col.is_address() {
            return Err(Error::QueryRejected("ordering by an address column is not allowed".into()));
        }
        order = Some(col);
    }

    let mut limit = None;
    if tokens.get(pos).map(String::as_str) == Some("limit") {
        pos += 1;
        let n = next(&mut pos)?;
        limit = Some(n.parse::<usize>().map_err(|_| {
            Error::QueryRejected(format!("bad limit {n:?}"))
        })?);
    }

    if pos != tokens.len() {
        return Err(Error::QueryRejected(format!(
            "trailing tokens after the query: {:?}",
            tokens[pos..].join(" ")
        )));
    }
    Ok(Query { cols, conds, order, limit })
}

#[derive(Clone, Copy)]
struct Row {
    src: [u8; 32],
    dst: [u8; 32],
    ts: u64,
    bytes: u64,
    packets: u64,
}

impl Row {
    fn address(&self, col: Col) -> [u8; 32] {
        match col {
            Col::Src => self.src,
            Col::Dst => self.dst,
            _ => unreachable!("not an address column"),
        }
    }

    fn plain(&self, col: Col) -> u64 {
        match col {
            Col::Ts => self.ts,
            Col::Bytes => self.bytes,
            Col::Packets => self.packets,
            _ => unreachable!("not a numeric column"),
        }
    }
}

impl Query {
    fn matches(&self, r: &Row, args: &[[u8; 32]]) -> bool {
        self.conds.iter().all(|c| match c {
            Cond::AddressEq(col, k) => r.address(*col) == args[*k],
            Cond::Plain(col, op, n) => op.eval(r.plain(*col), *n),
        })
    }

    fn max_arg(&self) -> Option<usize> {
        self.conds
            .iter()
            .filter_map(|c| match c {
                Cond::AddressEq(_, k) => Some(*k),
                Cond::Plain(..) => None,
            })
            .max()
    }
}

pub struct StorageFacility {
    pub core: PartyCore,
    rows: Mutex<Vec<Row>>,
    store: Option<PathBuf>,
}

impl StorageFacility {
    /// Opens the facility, loading any rows already on disk.
    pub fn new(core: PartyCore, store: Option<PathBuf>) -> Result<StorageFacility> {
        let rows = match &store {
            Some(p) if p.exists() => load_rows(p)?,
            _ => Vec::new(),
        };
        Ok(StorageFacility { core, rows: Mutex::new(rows), store })
    }

    pub fn row_count(&self) -> usize {
        self.rows.lock().unwrap().len()
    }

    fn handle_ingest(&self, sender: &str, req: &IngestRequest) -> Result<Message> {
        if sender != "party:mp" {
            return Err(Error::Protocol("only the metering point ingests".into()));
        }
        let mut fresh = Vec::with_capacity(req.rows.len());
        for r in &req.rows {
            fresh.push(Row {
                src: self.core.decrypt(&r.src)?.encode(),
                dst: self.core.decrypt(&r.dst)?.encode(),
                ts: r.ts,
                bytes: r.bytes,
                packets: r.packets,
            });
        }
        if let Some(p) = &self.store {
            append_rows(p, &fresh)?;
        }
        let accepted = fresh.len() as u32;
        self.rows.lock().unwrap().extend(fresh);
        Ok(Message::IngestOk(IngestResponse { accepted }))
    }

    fn handle_query(&self, _sender: &str, req: &QueryRequest) -> Result<Message> {
        let q = parse_query(&req.text)?;
        if let Some(k) = q.max_arg() {
            if k >= req.args.len() {
                return Err(Error::QueryRejected(format!("argument ${} not supplied", k + 1)));
            }
        }
        let mut args = Vec::with_capacity(req.args.len());
        for a in &req.args {
            let m = self.core.decrypt(a).map_err(|_| {
                Error::QueryRejected("arguments must be encrypted for the storage facility".into())
            })?;
            args.push(m.encode());
        }
        let mut hits: Vec<Row> = {
            let rows = self.rows.lock().unwrap();
            rows.iter().filter(|r| q.matches(r, &args)).copied().collect()
        };
        if let Some(col) = q.order {
            hits.sort_by_key(|r| r.plain(col));
        }
        if let Some(l) = q.limit {
            hits.truncate(l);
        }
        let columns = q.cols.iter().map(|c| c.name().to_string()).collect();
        let rows = hits
            .iter()
            .map(|r| q.cols.iter().map(|c| self.cell(r, *c)).collect())
            .collect();
        Ok(Message::QueryOk(QueryResponse { columns, rows }))
    }

    fn cell(&self, r: &Row, col: Col) -> Value {
        if col.is_address() {
            let m = GroupElement::decode(&r.address(col)).expect("stored encoding");
            Value::Pseudonym(self.core.encrypt(&m))
        } else {
            Value::Num(r.plain(col))
        }
    }
}

impl Endpoint for StorageFacility {
    fn handle_frame(&self, frame: &[u8]) -> Vec<u8> {
        let reply = match decode_frame(frame, &self.core.roster) {
            Ok((sender, msg)) => match &msg {
                Message::Ingest(m) => self.handle_ingest(&sender, m),
                Message::Query(m) => self.handle_query(&sender, m),
                _ => Err(Error::Protocol("not a storage request".into())),
            }
            .unwrap_or_else(|e| Message::Fail(ErrorResponse { message: e.to_string() })),
            Err(e) => Message::Fail(ErrorResponse { message: e.to_string() }),
        };
        let mut rng = self.core.rng.lock().unwrap();
        encode_frame(&self.core.node_id(), &self.core.auth, &reply, &mut *rng)
    }
}

fn load_rows(path: &PathBuf) -> Result<Vec<Row>> {
    let bad = || Error::Config(format!("corrupt flow store {}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|_| bad())?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let rec = record.map_err(|_| bad())?;
        if rec.len() != 5 {
            return Err(bad());
        }
        let addr = |i: usize| -> Result<[u8; 32]> {
            let v = hex::decode(&rec[i]).map_err(|_| bad())?;
            v.try_into().map_err(|_| bad())
        };
        let num = |i: usize| -> Result<u64> { rec[i].parse().map_err(|_| bad()) };
        rows.push(Row {
            src: addr(0)?,
            dst: addr(1)?,
            ts: num(2)?,
            bytes: num(3)?,
            packets: num(4)?,
        });
    }
    Ok(rows)
}

fn append_rows(path: &PathBuf, rows: &[Row]) -> Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    for r in rows {
        w.write_record([
            hex::encode(r.src),
            hex::encode(r.dst),
            r.ts.to_string(),
            r.bytes.to_string(),
            r.packets.to_string(),
        ])
        .map_err(|e| Error::Config(format!("flow store write: {e}")))?;
    }
    w.flush()?;
    Ok(())
}
