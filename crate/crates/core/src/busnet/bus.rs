use std::collections::BTreeMap;
use std::io::Write;
use std::net::{SocketAddr, TcpStream};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use super::frame::{
    hex, read_frame, registers_to_f32, MbapFrame, Request, Response, EXCEPTION_BIT, EX_DEVICE_FAILURE,
    EX_GATEWAY_TARGET,
};
use super::service::DeviceDescriptor;
use super::slave::Slave;
use super::trace::Trace;
use super::BusError;
use crate::units::Quantity;

/// Modbus gateway: routes request frames to slaves by unit id.
#[derive(Debug, Default)]
pub struct Bus {
    slaves: Mutex<BTreeMap<u8, Slave>>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Attaches a slave, replacing any slave with the same unit id.
    pub fn attach(&self, slave: Slave) -> Option<Slave> {
        let mut g = self.slaves.lock().unwrap_or_else(|e| e.into_inner());
        g.insert(slave.descriptor().unit_id, slave)
    }

    pub fn with_slave<R>(&self, unit_id: u8, f: impl FnOnce(&mut Slave) -> R) -> Option<R> {
        let mut g = self.slaves.lock().unwrap_or_else(|e| e.into_inner());
        g.get_mut(&unit_id).map(f)
    }

    pub fn handle(&self, frame: &MbapFrame) -> MbapFrame {
        self.with_slave(frame.unit_id, |s| s.handle(frame)).unwrap_or_else(|| {
            MbapFrame::new(
                frame.transaction_id,
                frame.unit_id,
                frame.function | EXCEPTION_BIT,
                vec![EX_GATEWAY_TARGET],
            )
        })
    }

    /// Serves one connection until EOF or a framing error.
    pub fn serve_connection(&self, mut stream: TcpStream) {
        let mut reader = match stream.try_clone() {
            Ok(r) => r,
            Err(_) => return,
        };
        while let Ok(req) = read_frame(&mut reader) {
            let resp = self.handle(&req);
            if stream.write_all(&resp.encode()).is_err() {
                break;
            }
        }
    }
}

pub trait Transport {
    fn exchange(&mut self, request: &MbapFrame) -> Result<MbapFrame, BusError>;
}

#[derive(Debug, Clone)]
pub struct LocalTransport {
    bus: Arc<Bus>,
}

impl LocalTransport {
    pub fn new(bus: Arc<Bus>) -> Self {
        Self { bus }
    }
}

impl Transport for LocalTransport {
    fn exchange(&mut self, request: &MbapFrame) -> Result<MbapFrame, BusError> {
        let req = MbapFrame::decode(&request.encode())?;
        let resp = self.bus.handle(&req);
        Ok(MbapFrame::decode(&resp.encode())?)
    }
}

#[derive(Debug)]
pub struct TcpTransport {
    stream: TcpStream,
}

impl TcpTransport {
    pub fn connect(addr: SocketAddr, timeout: Duration) -> Result<Self, BusError> {
        let stream = TcpStream::connect_timeout(&addr, timeout).map_err(BusError::from_io)?;
        stream.set_read_timeout(Some(timeout)).map_err(BusError::from_io)?;
        stream.set_write_timeout(Some(timeout)).map_err(BusError::from_io)?;
        stream.set_nodelay(true).ok();
        Ok(Self { stream })
    }
}

impl Transport for TcpTransport {
    fn exchange(&mut self, request: &MbapFrame) -> Result<MbapFrame, BusError> {
        self.stream.write_all(&request.encode()).map_err(BusError::from_io)?;
        Ok(read_frame(&mut self.stream)?)
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn exchange(&mut self, request: &MbapFrame) -> Result<MbapFrame, BusError> {
        (**self).exchange(request)
    }
}

/// The PLC side: knows the expected devices and polls them.
pub struct Master<T> {
    transport: T,
    expected: BTreeMap<u8, DeviceDescriptor>,
    next_transaction: u16,
    trace: Trace,
}

impl<T: Transport> Master<T> {
    pub fn new(transport: T, trace: Trace) -> Self {
        Self {
            transport,
            expected: BTreeMap::new(),
            next_transaction: 1,
            trace,
        }
    }

    pub fn expect(&mut self, d: DeviceDescriptor) {
        self.expected.insert(d.unit_id, d);
    }

    fn exchange(&mut self, unit_id: u8, req: Request) -> Result<Response, BusError> {
        let txn = self.next_transaction;
        self.next_transaction = self.next_transaction.wrapping_add(1);
        let frame = req.to_frame(txn, unit_id);
        self.trace.push("master", format!("> {}", hex(&frame.encode())));
        let resp = self.transport.exchange(&frame)?;
        self.trace.push("master", format!("< {}", hex(&resp.encode())));
        if resp.transaction_id != txn || resp.unit_id != unit_id {
            return Err(BusError::UnexpectedReply(format!(
                "reply for txn {} unit {}",
                resp.transaction_id, resp.unit_id
            )));
        }
        match Response::parse(&resp)? {
            Response::Exception { code: EX_DEVICE_FAILURE, .. } => Err(BusError::SlaveRejected(unit_id)),
            Response::Exception { function, code } => Err(BusError::ModbusException {
                unit_id,
                function,
                code,
            }),
            r if r.function() != req.function() => {
                Err(BusError::UnexpectedReply(format!("function {:#04x}", r.function())))
            }
            r => Ok(r),
        }
    }

    /// Reads the current value of `unit_id`, in the unit the mapping expects.
    pub fn read(&mut self, unit_id: u8) -> Result<Quantity, BusError> {
        let d = self
            .expected
            .get(&unit_id)
            .cloned()
            .ok_or(BusError::NotExpected(unit_id))?;
        let r = self.exchange(
            unit_id,
            Request::ReadHolding {
                address: d.register_base,
                quantity: 2,
            },
        );
        match r {
            Ok(Response::ReadHolding { values }) if values.len() == 2 => {
                let v = registers_to_f32([values[0], values[1]]);
                self.trace.push("master", format!("deliver {v} {}", d.native_unit));
                Ok(Quantity::new(v as f64, d.native_unit))
            }
            Ok(other) => Err(BusError::UnexpectedReply(format!("{other:?}"))),
            Err(e) => {
                self.trace.push("master", format!("unit {unit_id}: {e}"));
                Err(e)
            }
        }
    }

    /// Sets the raw sample of `unit_id` (simulation hook).
    pub fn write_sample(&mut self, unit_id: u8, raw: f32) -> Result<(), BusError> {
        let base = self.expected.get(&unit_id).map(|d| d.register_base).unwrap_or(0);
        let values = super::frame::f32_to_registers(raw).to_vec();
        self.exchange(unit_id, Request::WriteMultiple { address: base, values })
            .map(|_| ())
    }
}
