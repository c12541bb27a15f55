//! Scenario runner: boots the service, the bus gateway and the master,
//! registers the expected devices, plugs the slaves and polls them.

use std::net::{SocketAddr, TcpListener};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Deserialize;

use super::bus::{Bus, LocalTransport, Master, TcpTransport, Transport};
use super::message::{ServiceMessage, Verb};
use super::net::Server;
use super::service::{
    serve_connection, DeviceDescriptor, I40Service, LocalServiceClient, ServiceClient, TcpServiceClient,
    TracedClient,
};
use super::slave::{Lifecycle, Slave, SlaveState};
use super::trace::Trace;
use super::{BusError, REQUEST_TIMEOUT};
use crate::semstore::KnowledgeBase;
use crate::units::{approx_eq, ConverterRegistry, Quantity};

pub const DEFAULT_SERVICE_PORT: u16 = 15020;
pub const DEFAULT_BUS_PORT: u16 = 1502;

const BUNDLED_KB: &str = include_str!("../../data/plant.kb");
const BUNDLED_CONVERTERS: &str = include_str!("../../data/converters.tsv");
const BUNDLED_SCENARIO: &str = include_str!("../../data/plug_and_sense.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Loopback TCP for both planes.
    Tcp,
    /// In-process calls, single thread.
    Local,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    knowledge: Option<String>,
    converters: Option<String>,
    #[serde(default)]
    service: RawService,
    #[serde(default)]
    bus: RawBus,
    #[serde(default)]
    mapping: Vec<RawMapping>,
    #[serde(default)]
    slave: Vec<RawSlave>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawService {
    listen: Option<String>,
    #[serde(default = "yes")]
    subtype_matching: bool,
}

impl Default for RawService {
    fn default() -> Self {
        Self {
            listen: None,
            subtype_matching: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBus {
    listen: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMapping {
    unit_id: u8,
    device_type: String,
    native_unit: String,
    #[serde(default)]
    register_base: u16,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlave {
    unit_id: u8,
    device_type: String,
    native_unit: String,
    #[serde(default)]
    register_base: u16,
    sample: f64,
    expect_lifecycle: Option<String>,
    expect_chain: Option<Vec<String>>,
    expect_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SlaveSpec {
    pub descriptor: DeviceDescriptor,
    pub sample: f64,
    pub expect_lifecycle: Option<Lifecycle>,
    pub expect_chain: Option<Vec<String>>,
    pub expect_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub knowledge: KnowledgeBase,
    pub registry: ConverterRegistry,
    pub service_addr: SocketAddr,
    pub bus_addr: SocketAddr,
    pub subtype_matching: bool,
    pub mappings: Vec<DeviceDescriptor>,
    pub slaves: Vec<SlaveSpec>,
}

fn addr(s: Option<&str>, default_port: u16) -> Result<SocketAddr, BusError> {
    match s {
        Some(s) => s
            .parse()
            .map_err(|_| BusError::Config(format!("invalid socket address `{s}`"))),
        None => Ok(SocketAddr::from(([127, 0, 0, 1], default_port))),
    }
}

impl ScenarioConfig {
    /// The bundled three-slave scenario, on OS-assigned ports.
    pub fn bundled() -> ScenarioConfig {
        ScenarioConfig::parse(BUNDLED_SCENARIO, None).expect("bundled scenario parses")
    }

    pub fn bundled_text() -> &'static str {
        BUNDLED_SCENARIO
    }

    pub fn bundled_knowledge() -> KnowledgeBase {
        KnowledgeBase::parse(BUNDLED_KB).expect("bundled knowledge base parses")
    }

    pub fn bundled_converters() -> ConverterRegistry {
        ConverterRegistry::parse(BUNDLED_CONVERTERS).expect("bundled converters parse")
    }

    pub fn load(path: &Path) -> Result<ScenarioConfig, BusError> {
        let text = std::fs::read_to_string(path).map_err(|e| BusError::Config(format!("{}: {e}", path.display())))?;
        ScenarioConfig::parse(&text, path.parent())
    }

    /// `knowledge` and `converters` paths are resolved against `base`;
    /// when absent the bundled files are used.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<ScenarioConfig, BusError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| BusError::Config(e.to_string()))?;
        let read = |p: &str| {
            let full = base.map(|b| b.join(p)).unwrap_or_else(|| p.into());
            std::fs::read_to_string(&full).map_err(|e| BusError::Config(format!("{}: {e}", full.display())))
        };
        let knowledge = match &raw.knowledge {
            Some(p) => KnowledgeBase::parse(&read(p)?).map_err(|e| BusError::Config(e.to_string()))?,
            None => Self::bundled_knowledge(),
        };
        let registry = match &raw.converters {
            Some(p) => ConverterRegistry::parse(&read(p)?).map_err(|e| BusError::Config(e.to_string()))?,
            None => Self::bundled_converters(),
        };
        let mappings = raw
            .mapping
            .iter()
            .map(|m| DeviceDescriptor::new(m.unit_id, &m.device_type, &m.native_unit).at_register(m.register_base))
            .collect();
        let mut slaves: Vec<SlaveSpec> = Vec::new();
        for s in raw.slave {
            if slaves.iter().any(|o| o.descriptor.unit_id == s.unit_id) {
                return Err(BusError::Config(format!("two slaves with unit id {}", s.unit_id)));
            }
            slaves.push(SlaveSpec {
                descriptor: DeviceDescriptor::new(s.unit_id, &s.device_type, &s.native_unit)
                    .at_register(s.register_base),
                sample: s.sample,
                expect_lifecycle: s
                    .expect_lifecycle
                    .as_deref()
                    .map(str::parse)
                    .transpose()
                    .map_err(BusError::Config)?,
                expect_chain: s.expect_chain,
                expect_value: s.expect_value,
            });
        }
        Ok(ScenarioConfig {
            knowledge,
            registry,
            service_addr: addr(raw.service.listen.as_deref(), DEFAULT_SERVICE_PORT)?,
            bus_addr: addr(raw.bus.listen.as_deref(), DEFAULT_BUS_PORT)?,
            subtype_matching: raw.service.subtype_matching,
            mappings,
            slaves,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SlaveOutcome {
    pub unit_id: u8,
    pub state: SlaveState,
    pub delivered: Result<Quantity, BusError>,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub trace: Vec<String>,
    pub slaves: Vec<SlaveOutcome>,
    pub failures: Vec<String>,
    pub elapsed: Duration,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn trace_text(&self) -> String {
        let mut s = self.trace.join("\n");
        s.push('\n');
        s
    }

    pub fn slave(&self, unit_id: u8) -> Option<&SlaveOutcome> {
        self.slaves.iter().find(|s| s.unit_id == unit_id)
    }

    /// Responses to the master from `unit_id` that carried data, i.e. were
    /// not exception frames.
    pub fn data_responses(&self, unit_id: u8) -> usize {
        self.response_frames(unit_id)
            .iter()
            .filter(|f| f.get(7).is_some_and(|b| b & 0x80 == 0))
            .count()
    }

    /// Raw bytes of every response the master received from `unit_id`.
    pub fn response_frames(&self, unit_id: u8) -> Vec<Vec<u8>> {
        self.trace
            .iter()
            .filter_map(|l| l.strip_prefix("master\t< "))
            .map(|h| {
                h.split(' ')
                    .filter_map(|b| u8::from_str_radix(b, 16).ok())
                    .collect::<Vec<u8>>()
            })
            .filter(|f| f.get(6) == Some(&unit_id))
            .collect()
    }
}

/// Runs the scenario. Errors are reserved for harness failures (bind,
/// connect); scenario mismatches land in [`ScenarioReport::failures`].
pub fn run_plug_and_sense(config: &ScenarioConfig, mode: Mode) -> Result<ScenarioReport, BusError> {
    let started = Instant::now();
    let trace = Trace::new();
    let service = Arc::new(
        I40Service::new(config.knowledge.clone(), config.registry.clone())
            .with_subtype_matching(config.subtype_matching),
    );
    let bus = Arc::new(Bus::new());
    let io = |e: std::io::Error| BusError::Io(e.to_string());

    let mut servers = Vec::new();
    let (service_addr, bus_addr) = match mode {
        Mode::Local => (None, None),
        Mode::Tcp => {
            let svc = service.clone();
            let s = Server::spawn(TcpListener::bind(config.service_addr).map_err(io)?, move |c| {
                let _ = serve_connection(&svc, c);
            })
            .map_err(io)?;
            let b = bus.clone();
            let m = Server::spawn(TcpListener::bind(config.bus_addr).map_err(io)?, move |c| {
                b.serve_connection(c)
            })
            .map_err(io)?;
            let addrs = (Some(s.local_addr()), Some(m.local_addr()));
            servers.push(s);
            servers.push(m);
            addrs
        }
    };
    let client = |actor: &str| -> Result<TracedClient<Box<dyn ServiceClient>>, BusError> {
        let inner: Box<dyn ServiceClient> = match service_addr {
            Some(a) => Box::new(TcpServiceClient::connect(a, REQUEST_TIMEOUT)?),
            None => Box::new(LocalServiceClient::new(service.clone())),
        };
        Ok(TracedClient::new(inner, trace.clone(), actor))
    };

    let mut failures = Vec::new();

    let mut engineer = client("engineer")?;
    for m in &config.mappings {
        let msg = ServiceMessage::new(Verb::RegisterMapping)
            .with("unit_id", m.unit_id)
            .with("device_type", &m.device_type)
            .with("native_unit", &m.native_unit)
            .with("register_base", m.register_base);
        let reply = engineer.call(&msg)?;
        if reply.verb != Verb::Ok {
            failures.push(format!("mapping for unit {} refused: {reply}", m.unit_id));
        }
    }

    for spec in &config.slaves {
        let actor = format!("slave {}", spec.descriptor.unit_id);
        let mut slave = Slave::new(spec.descriptor.clone(), spec.sample);
        let mut c = client(&actor)?;
        let state = slave.plug(&mut c)?.clone();
        trace.push(&actor, state.to_string());
        bus.attach(slave);
    }

    let transport: Box<dyn Transport> = match bus_addr {
        Some(a) => Box::new(TcpTransport::connect(a, REQUEST_TIMEOUT)?),
        None => Box::new(LocalTransport::new(bus.clone())),
    };
    let mut master = Master::new(transport, trace.clone());
    for m in &config.mappings {
        master.expect(m.clone());
    }

    let mut outcomes = Vec::new();
    for spec in &config.slaves {
        let unit_id = spec.descriptor.unit_id;
        let delivered = master.read(unit_id);
        let state = bus
            .with_slave(unit_id, |s| s.state().clone())
            .unwrap_or_else(SlaveState::unvalidated);
        check(spec, &state, &delivered, &mut failures);
        outcomes.push(SlaveOutcome {
            unit_id,
            state,
            delivered,
        });
    }
    drop(master);
    for mut s in servers {
        s.shutdown();
    }

    let mut report = ScenarioReport {
        trace: trace.lines(),
        slaves: outcomes,
        failures,
        elapsed: started.elapsed(),
    };
    for o in &report.slaves {
        if !o.state.lifecycle().serves_data() && report.data_responses(o.unit_id) > 0 {
            let msg = format!("unit {} sent data while {}", o.unit_id, o.state.lifecycle());
            report.failures.push(msg);
        }
    }
    Ok(report)
}

fn check(spec: &SlaveSpec, state: &SlaveState, delivered: &Result<Quantity, BusError>, failures: &mut Vec<String>) {
    let unit = spec.descriptor.unit_id;
    if let Some(l) = spec.expect_lifecycle {
        if state.lifecycle() != l {
            failures.push(format!("unit {unit}: expected {l}, got {state}"));
        }
    }
    if let Some(ids) = &spec.expect_chain {
        let got: Vec<String> = state.effective_chain().ids().iter().map(|s| s.to_string()).collect();
        if &got != ids {
            failures.push(format!("unit {unit}: expected chain {ids:?}, got {got:?}"));
        }
    }
    if let Some(v) = spec.expect_value {
        match delivered {
            // float32 transport
            Ok(q) if approx_eq(q.magnitude, v) || (q.magnitude - v).abs() <= 1e-6 * v.abs().max(1.0) => {}
            Ok(q) => failures.push(format!("unit {unit}: expected {v}, delivered {q}")),
            Err(e) => failures.push(format!("unit {unit}: expected {v}, read failed: {e}")),
        }
    }
    if spec.expect_lifecycle == Some(Lifecycle::Rejected) && !matches!(delivered, Err(BusError::SlaveRejected(_))) {
        failures.push(format!("unit {unit}: rejected slave answered a read"));
    }
}
