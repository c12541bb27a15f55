//! The I4.0 service: expected-device mappings, the knowledge base and the
//! converter graph behind a line protocol.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use super::message::{MessageError, ServiceMessage, Verb};
use super::trace::Trace;
use super::BusError;
use crate::semstore::{KnowledgeBase, OntologyTriple, SharedKnowledgeBase, TermId};
use crate::units::{
    chain_to_triples, triples_to_chain, Converter, ConverterChain, ConverterRegistry, SharedRegistry,
    UnitsError, CHAIN_SCHEMA,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceDescriptor {
    pub unit_id: u8,
    pub device_type: TermId,
    pub native_unit: TermId,
    pub register_base: u16,
}

impl DeviceDescriptor {
    pub fn new(unit_id: u8, device_type: &str, native_unit: &str) -> Self {
        Self {
            unit_id,
            device_type: device_type.to_string(),
            native_unit: native_unit.to_string(),
            register_base: 0,
        }
    }

    pub fn at_register(mut self, base: u16) -> Self {
        self.register_base = base;
        self
    }
}

pub fn valid_unit_id(id: u8) -> bool {
    (1..=247).contains(&id)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ServiceError {
    #[error("unit id {0} outside 1..=247")]
    InvalidUnitId(u8),
    #[error("device type `{0}` is not in the taxonomy")]
    UnknownDeviceType(String),
    #[error("unit term `{0}` is not defined")]
    UnknownUnitTerm(String),
    #[error("no mapping registered for unit {0}")]
    NoMappingRegistered(u8),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("no converter path from {from} to {to}")]
    NoConverterPath { from: String, to: String },
    #[error("bad request: {0}")]
    BadRequest(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::InvalidUnitId(_) => "InvalidUnitId",
            ServiceError::UnknownDeviceType(_) => "UnknownDeviceType",
            ServiceError::UnknownUnitTerm(_) => "UnknownUnitTerm",
            ServiceError::NoMappingRegistered(_) => "NoMappingRegistered",
            ServiceError::UnknownUnit(_) => "UnknownUnit",
            ServiceError::NoConverterPath { .. } => "NoConverterPath",
            ServiceError::BadRequest(_) => "BadRequest",
        }
    }

    pub fn to_message(&self) -> ServiceMessage {
        ServiceMessage::error(self.code(), self)
    }
}

impl From<MessageError> for ServiceError {
    fn from(e: MessageError) -> Self {
        ServiceError::BadRequest(e.to_string())
    }
}

/// Answer to an expected-device query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub expected: DeviceDescriptor,
    pub type_match: bool,
}

#[derive(Debug)]
pub struct I40Service {
    kb: SharedKnowledgeBase,
    registry: SharedRegistry,
    mappings: RwLock<BTreeMap<u8, DeviceDescriptor>>,
    subtype_matching: bool,
}

impl I40Service {
    pub fn new(kb: KnowledgeBase, registry: ConverterRegistry) -> Self {
        Self {
            kb: SharedKnowledgeBase::new(kb),
            registry: SharedRegistry::new(registry),
            mappings: RwLock::new(BTreeMap::new()),
            subtype_matching: true,
        }
    }

    /// With `false`, a device type must equal the expected type exactly.
    pub fn with_subtype_matching(mut self, on: bool) -> Self {
        self.subtype_matching = on;
        self
    }

    pub fn knowledge(&self) -> &SharedKnowledgeBase {
        &self.kb
    }

    pub fn registry(&self) -> &SharedRegistry {
        &self.registry
    }

    /// Stores the expected device for its unit id. Returns `true` when an
    /// earlier mapping was replaced.
    pub fn register_mapping(&self, d: DeviceDescriptor) -> Result<bool, ServiceError> {
        if !valid_unit_id(d.unit_id) {
            return Err(ServiceError::InvalidUnitId(d.unit_id));
        }
        self.kb.read(|kb| {
            if !kb.contains(&d.device_type) || !kb.in_taxonomy(&d.device_type) {
                return Err(ServiceError::UnknownDeviceType(d.device_type.clone()));
            }
            if !kb.contains(&d.native_unit) {
                return Err(ServiceError::UnknownUnitTerm(d.native_unit.clone()));
            }
            Ok(())
        })?;
        let mut m = self.mappings.write().unwrap_or_else(|e| e.into_inner());
        Ok(m.insert(d.unit_id, d).is_some())
    }

    pub fn mapping(&self, unit_id: u8) -> Option<DeviceDescriptor> {
        self.mappings.read().unwrap_or_else(|e| e.into_inner()).get(&unit_id).cloned()
    }

    pub fn query_expected(&self, unit_id: u8, actual_type: &str) -> Result<Expectation, ServiceError> {
        let expected = self
            .mapping(unit_id)
            .ok_or(ServiceError::NoMappingRegistered(unit_id))?;
        let type_match = if self.subtype_matching {
            self.kb
                .read(|kb| kb.is_subtype(actual_type, &expected.device_type))
                .unwrap_or(false)
        } else {
            actual_type == expected.device_type
        };
        Ok(Expectation { expected, type_match })
    }

    pub fn request_converter(&self, source: &str, target: &str) -> Result<(ConverterChain, Vec<OntologyTriple>), ServiceError> {
        let chain = self.registry.read(|r| r.find_chain(source, target)).map_err(|e| match e {
            UnitsError::UnknownUnit(u) => ServiceError::UnknownUnit(u),
            _ => ServiceError::NoConverterPath {
                from: source.to_string(),
                to: target.to_string(),
            },
        })?;
        let triples = chain_to_triples(&chain);
        Ok((chain, triples))
    }

    /// Handles one request line. Replies are never requests.
    pub fn handle(&self, msg: &ServiceMessage) -> ServiceMessage {
        self.dispatch(msg).unwrap_or_else(|e| e.to_message())
    }

    fn dispatch(&self, msg: &ServiceMessage) -> Result<ServiceMessage, ServiceError> {
        match msg.verb {
            Verb::RegisterMapping => {
                let d = DeviceDescriptor {
                    unit_id: msg.parse_field("unit_id")?,
                    device_type: msg.require("device_type")?.to_string(),
                    native_unit: msg.require("native_unit")?.to_string(),
                    register_base: match msg.get("register_base") {
                        Some(_) => msg.parse_field("register_base")?,
                        None => 0,
                    },
                };
                let unit = d.unit_id;
                let overwritten = self.register_mapping(d)?;
                Ok(ServiceMessage::new(Verb::Ok)
                    .with("unit_id", unit)
                    .with("overwrite", overwritten))
            }
            Verb::QueryExpected => {
                let unit: u8 = msg.parse_field("unit_id")?;
                let e = self.query_expected(unit, msg.require("device_type")?)?;
                Ok(ServiceMessage::new(Verb::Expected)
                    .with("unit_id", unit)
                    .with("device_type", &e.expected.device_type)
                    .with("native_unit", &e.expected.native_unit)
                    .with("register_base", e.expected.register_base)
                    .with("type_match", e.type_match))
            }
            Verb::RequestConverter => {
                let (chain, triples) = self.request_converter(msg.require("source")?, msg.require("target")?)?;
                Ok(encode_chain(&chain, &triples))
            }
            v => Err(ServiceError::BadRequest(format!("{v} is a reply, not a request"))),
        }
    }
}

/// `CHAIN` reply: the serialized triples plus the definitions of the
/// converters they name, so the receiver can rebuild the chain locally.
pub fn encode_chain(chain: &ConverterChain, triples: &[OntologyTriple]) -> ServiceMessage {
    let mut m = ServiceMessage::new(Verb::Chain)
        .with("schema", CHAIN_SCHEMA)
        .with("triples", triples.len());
    for (i, t) in triples.iter().enumerate() {
        m = m.with(&format!("t{i}"), format!("{}\t{}\t{}", t.subject, t.relation, t.object));
    }
    m = m.with("converters", chain.steps.len());
    for (i, c) in chain.steps.iter().enumerate() {
        m = m.with(
            &format!("c{i}"),
            format!("{}\t{}\t{}\t{}\t{}", c.id, c.source, c.target, c.scale, c.offset),
        );
    }
    m
}

pub fn decode_chain(msg: &ServiceMessage) -> Result<ConverterChain, BusError> {
    let bad = |m: String| BusError::UnexpectedReply(m);
    if msg.verb != Verb::Chain {
        return Err(bad(format!("expected CHAIN, got {}", msg.verb)));
    }
    if msg.require("schema")? != CHAIN_SCHEMA {
        return Err(bad(format!("unsupported chain schema {}", msg.require("schema")?)));
    }
    let n: usize = msg.parse_field("triples")?;
    let mut triples = Vec::with_capacity(n.min(64));
    for i in 0..n {
        let v = msg.require(&format!("t{i}"))?;
        let parts: Vec<&str> = v.split('\t').collect();
        let [s, r, o] = parts.as_slice() else {
            return Err(bad(format!("triple t{i} has {} parts", parts.len())));
        };
        triples.push(OntologyTriple::new(*s, *r, *o));
    }
    let m: usize = msg.parse_field("converters")?;
    let mut local = ConverterRegistry::new();
    for i in 0..m {
        let v = msg.require(&format!("c{i}"))?;
        let parts: Vec<&str> = v.split('\t').collect();
        let [id, src, dst, scale, offset] = parts.as_slice() else {
            return Err(bad(format!("converter c{i} has {} parts", parts.len())));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("converter c{i}: bad number `{s}`")));
        local
            .register_converter(Converter::new(id, src, dst, num(scale)?, num(offset)?))
            .map_err(|e| bad(e.to_string()))?;
    }
    triples_to_chain(&triples, &local).map_err(|e| bad(e.to_string()))
}

/// Request/reply access to the service.
pub trait ServiceClient {
    fn call(&mut self, msg: &ServiceMessage) -> Result<ServiceMessage, BusError>;
}

/// In-process client, used for deterministic single-threaded runs.
#[derive(Debug, Clone)]
pub struct LocalServiceClient {
    service: Arc<I40Service>,
}

impl LocalServiceClient {
    pub fn new(service: Arc<I40Service>) -> Self {
        Self { service }
    }
}

impl ServiceClient for LocalServiceClient {
    fn call(&mut self, msg: &ServiceMessage) -> Result<ServiceMessage, BusError> {
        // go through the wire format so both transports see the same bytes
        let req = ServiceMessage::decode(&msg.encode())?;
        let reply = self.service.handle(&req);
        Ok(ServiceMessage::decode(&reply.encode())?)
    }
}

#[derive(Debug)]
pub struct TcpServiceClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl TcpServiceClient {
    pub fn connect(addr: SocketAddr, timeout: Duration) -> Result<Self, BusError> {
        let unreachable = |e: std::io::Error| BusError::ServiceUnreachable(format!("{addr}: {e}"));
        let s = TcpStream::connect_timeout(&addr, timeout).map_err(unreachable)?;
        s.set_read_timeout(Some(timeout)).map_err(unreachable)?;
        s.set_write_timeout(Some(timeout)).map_err(unreachable)?;
        s.set_nodelay(true).ok();
        let reader = BufReader::new(s.try_clone().map_err(unreachable)?);
        Ok(Self { reader, writer: s })
    }
}

impl ServiceClient for TcpServiceClient {
    fn call(&mut self, msg: &ServiceMessage) -> Result<ServiceMessage, BusError> {
        let mut line = msg.encode();
        line.push('\n');
        self.writer.write_all(line.as_bytes()).map_err(BusError::from_io)?;
        let mut reply = String::new();
        let n = self.reader.read_line(&mut reply).map_err(BusError::from_io)?;
        if n == 0 {
            return Err(BusError::ServiceUnreachable("connection closed".into()));
        }
        Ok(ServiceMessage::decode(&reply)?)
    }
}

/// Logs every request and reply under `actor`.
#[derive(Debug)]
pub struct TracedClient<C> {
    inner: C,
    trace: Trace,
    actor: String,
}

impl<C: ServiceClient> TracedClient<C> {
    pub fn new(inner: C, trace: Trace, actor: &str) -> Self {
        Self {
            inner,
            trace,
            actor: actor.to_string(),
        }
    }
}

impl<C: ServiceClient> ServiceClient for TracedClient<C> {
    fn call(&mut self, msg: &ServiceMessage) -> Result<ServiceMessage, BusError> {
        self.trace.push(&self.actor, format!("> {msg}"));
        let r = self.inner.call(msg);
        match &r {
            Ok(reply) => self.trace.push(&self.actor, format!("< {reply}")),
            Err(e) => self.trace.push(&self.actor, format!("! {e}")),
        }
        r
    }
}

impl<C: ServiceClient + ?Sized> ServiceClient for Box<C> {
    fn call(&mut self, msg: &ServiceMessage) -> Result<ServiceMessage, BusError> {
        (**self).call(msg)
    }
}

/// Serves one connection: a reply line per request line until EOF.
pub fn serve_connection(service: &I40Service, stream: TcpStream) -> std::io::Result<()> {
    let mut writer = stream.try_clone()?;
    let reader = BufReader::new(stream);
    for line in reader.lines() {
        let line = line?;
        let reply = match ServiceMessage::decode(&line) {
            Ok(m) => service.handle(&m),
            Err(e) => ServiceError::from(e).to_message(),
        };
        writer.write_all(reply.encode().as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
