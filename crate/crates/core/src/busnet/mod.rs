//! Plug-and-sense harness: a Modbus-TCP subset between a master and smart
//! slaves, and a line-protocol service that holds the expected device
//! mappings and hands out unit converter chains.
//!
//! A slave validates itself before serving data: it queries the service,
//! compares device type (taxonomy subtyping) and unit, and fetches a
//! converter chain when only the unit differs. Chains run in the slave.
//!
//! Everything can run over loopback TCP or in-process
//! ([`LocalServiceClient`], [`LocalTransport`]); both paths produce the
//! same trace.

mod bus;
mod frame;
mod message;
mod net;
mod scenario;
mod service;
mod slave;
mod trace;

pub use bus::{Bus, LocalTransport, Master, TcpTransport, Transport};
pub use frame::{
    f32_to_registers, hex, read_frame, registers_to_f32, FrameError, MbapFrame, Request, Response,
    EX_DEVICE_FAILURE, EX_GATEWAY_TARGET, EX_ILLEGAL_ADDRESS, EX_ILLEGAL_FUNCTION, EX_ILLEGAL_VALUE,
    FC_READ_HOLDING, FC_WRITE_MULTIPLE, MAX_LENGTH_FIELD,
};
pub use message::{MessageError, ServiceMessage, Verb};
pub use net::Server;
pub use scenario::{
    run_plug_and_sense, Mode, ScenarioConfig, ScenarioReport, SlaveOutcome, DEFAULT_BUS_PORT,
    DEFAULT_SERVICE_PORT,
};
pub use service::{
    decode_chain, encode_chain, serve_connection, valid_unit_id, DeviceDescriptor, Expectation, I40Service,
    LocalServiceClient, ServiceClient, ServiceError, TcpServiceClient, TracedClient,
};
pub use slave::{Lifecycle, Slave, SlaveState};
pub use trace::Trace;

use std::time::Duration;

/// Per-request timeout on the TCP transports.
pub const REQUEST_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BusError {
    #[error(transparent)]
    Frame(FrameError),
    #[error(transparent)]
    Message(#[from] MessageError),
    #[error("slave {0} rejected the request")]
    SlaveRejected(u8),
    #[error("unit {unit_id}: exception {code:#04x} on function {function:#04x}")]
    ModbusException { unit_id: u8, function: u8, code: u8 },
    #[error("unit {0} is not an expected device")]
    NotExpected(u8),
    #[error("request timed out")]
    Timeout,
    #[error("service unreachable: {0}")]
    ServiceUnreachable(String),
    #[error("unexpected reply: {0}")]
    UnexpectedReply(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("config: {0}")]
    Config(String),
}

impl From<FrameError> for BusError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::Io { kind, message } => BusError::from_io(std::io::Error::new(kind, message)),
            e => BusError::Frame(e),
        }
    }
}

impl BusError {
    pub fn from_io(e: std::io::Error) -> BusError {
        use std::io::ErrorKind::*;
        match e.kind() {
            WouldBlock | TimedOut => BusError::Timeout,
            _ => BusError::Io(e.to_string()),
        }
    }
}
