//! Modbus-TCP subset: MBAP header, read holding registers (0x03), write
//! multiple registers (0x10) and their exception responses.

use std::io::Read;

pub const FC_READ_HOLDING: u8 = 0x03;
pub const FC_WRITE_MULTIPLE: u8 = 0x10;
pub const EXCEPTION_BIT: u8 = 0x80;

pub const EX_ILLEGAL_FUNCTION: u8 = 0x01;
pub const EX_ILLEGAL_ADDRESS: u8 = 0x02;
pub const EX_ILLEGAL_VALUE: u8 = 0x03;
/// Used for every request addressed to a rejected or unvalidated slave.
pub const EX_DEVICE_FAILURE: u8 = 0x04;
pub const EX_GATEWAY_TARGET: u8 = 0x0B;

pub const MIN_FRAME_LEN: usize = 8;
/// Largest length field: unit id plus a 253-byte PDU.
pub const MAX_LENGTH_FIELD: usize = 254;
pub const MAX_READ_QTY: u16 = 125;
pub const MAX_WRITE_QTY: u16 = 123;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("frame too short: {0} bytes")]
    ShortFrame(usize),
    #[error("length field says {declared}, frame carries {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("protocol id {0:#06x} is not Modbus")]
    ProtocolId(u16),
    #[error("unsupported function code {0:#04x}")]
    UnsupportedFunction(u8),
    #[error("malformed pdu: {0}")]
    MalformedPdu(String),
    #[error("i/o: {message}")]
    Io { kind: std::io::ErrorKind, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MbapFrame {
    pub transaction_id: u16,
    pub unit_id: u8,
    pub function: u8,
    pub data: Vec<u8>,
}

impl MbapFrame {
    pub fn new(transaction_id: u16, unit_id: u8, function: u8, data: Vec<u8>) -> Self {
        Self {
            transaction_id,
            unit_id,
            function,
            data,
        }
    }

    /// Value of the MBAP length field: unit id, function code and data.
    pub fn length(&self) -> usize {
        2 + self.data.len()
    }

    pub fn is_exception(&self) -> bool {
        self.function & EXCEPTION_BIT != 0
    }

    /// Whether the function code belongs to the implemented subset.
    pub fn is_supported(&self) -> bool {
        matches!(self.function & !EXCEPTION_BIT, FC_READ_HOLDING | FC_WRITE_MULTIPLE)
    }

    /// Panics if the data cannot fit the 16-bit length field.
    pub fn encode(&self) -> Vec<u8> {
        let len = u16::try_from(self.length()).expect("pdu too long for an MBAP frame");
        let mut out = Vec::with_capacity(6 + self.length());
        out.extend_from_slice(&self.transaction_id.to_be_bytes());
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&len.to_be_bytes());
        out.push(self.unit_id);
        out.push(self.function);
        out.extend_from_slice(&self.data);
        out
    }

    /// Decodes exactly one frame. Function codes outside the subset decode
    /// fine; see [`MbapFrame::is_supported`].
    pub fn decode(bytes: &[u8]) -> Result<MbapFrame, FrameError> {
        if bytes.len() < MIN_FRAME_LEN {
            return Err(FrameError::ShortFrame(bytes.len()));
        }
        let protocol = u16::from_be_bytes([bytes[2], bytes[3]]);
        let declared = u16::from_be_bytes([bytes[4], bytes[5]]) as usize;
        let actual = bytes.len() - 6;
        if declared != actual || declared > MAX_LENGTH_FIELD {
            return Err(FrameError::LengthMismatch { declared, actual });
        }
        if protocol != 0 {
            return Err(FrameError::ProtocolId(protocol));
        }
        Ok(MbapFrame {
            transaction_id: u16::from_be_bytes([bytes[0], bytes[1]]),
            unit_id: bytes[6],
            function: bytes[7],
            data: bytes[8..].to_vec(),
        })
    }
}

/// Reads one frame from a stream, using the length field to find its end.
pub fn read_frame(r: &mut impl Read) -> Result<MbapFrame, FrameError> {
    let io = |e: std::io::Error| FrameError::Io {
        kind: e.kind(),
        message: e.to_string(),
    };
    let mut head = [0u8; 6];
    r.read_exact(&mut head).map_err(io)?;
    let declared = u16::from_be_bytes([head[4], head[5]]) as usize;
    if !(2..=MAX_LENGTH_FIELD).contains(&declared) {
        return Err(FrameError::LengthMismatch { declared, actual: 0 });
    }
    let mut buf = head.to_vec();
    buf.resize(6 + declared, 0);
    r.read_exact(&mut buf[6..]).map_err(io)?;
    MbapFrame::decode(&buf)
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02X}")).collect::<Vec<_>>().join(" ")
}

pub fn f32_to_registers(v: f32) -> [u16; 2] {
    let b = v.to_bits();
    [(b >> 16) as u16, b as u16]
}

pub fn registers_to_f32(r: [u16; 2]) -> f32 {
    f32::from_bits(((r[0] as u32) << 16) | r[1] as u32)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    ReadHolding { address: u16, quantity: u16 },
    WriteMultiple { address: u16, values: Vec<u16> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    ReadHolding { values: Vec<u16> },
    WriteMultiple { address: u16, quantity: u16 },
    Exception { function: u8, code: u8 },
}

fn word(d: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([d[at], d[at + 1]])
}

fn words(d: &[u8]) -> Vec<u16> {
    d.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
}

fn malformed(m: impl Into<String>) -> FrameError {
    FrameError::MalformedPdu(m.into())
}

impl Request {
    pub fn function(&self) -> u8 {
        match self {
            Request::ReadHolding { .. } => FC_READ_HOLDING,
            Request::WriteMultiple { .. } => FC_WRITE_MULTIPLE,
        }
    }

    pub fn data(&self) -> Vec<u8> {
        let mut d = Vec::new();
        match self {
            Request::ReadHolding { address, quantity } => {
                d.extend_from_slice(&address.to_be_bytes());
                d.extend_from_slice(&quantity.to_be_bytes());
            }
            Request::WriteMultiple { address, values } => {
                d.extend_from_slice(&address.to_be_bytes());
                d.extend_from_slice(&(values.len() as u16).to_be_bytes());
                d.push((values.len() * 2) as u8);
                for v in values {
                    d.extend_from_slice(&v.to_be_bytes());
                }
            }
        }
        d
    }

    pub fn to_frame(&self, transaction_id: u16, unit_id: u8) -> MbapFrame {
        MbapFrame::new(transaction_id, unit_id, self.function(), self.data())
    }

    pub fn parse(frame: &MbapFrame) -> Result<Request, FrameError> {
        let d = &frame.data;
        match frame.function {
            FC_READ_HOLDING => {
                if d.len() != 4 {
                    return Err(malformed(format!("read request needs 4 data bytes, got {}", d.len())));
                }
                let quantity = word(d, 2);
                if quantity == 0 || quantity > MAX_READ_QTY {
                    return Err(malformed(format!("read quantity {quantity} out of range")));
                }
                Ok(Request::ReadHolding {
                    address: word(d, 0),
                    quantity,
                })
            }
            FC_WRITE_MULTIPLE => {
                if d.len() < 5 {
                    return Err(malformed("write request header truncated"));
                }
                let quantity = word(d, 2);
                let count = d[4] as usize;
                if quantity == 0 || quantity > MAX_WRITE_QTY || count != quantity as usize * 2 || d.len() != 5 + count {
                    return Err(malformed("write request counts disagree"));
                }
                Ok(Request::WriteMultiple {
                    address: word(d, 0),
                    values: words(&d[5..]),
                })
            }
            f => Err(FrameError::UnsupportedFunction(f)),
        }
    }
}

impl Response {
    pub fn function(&self) -> u8 {
        match self {
            Response::ReadHolding { .. } => FC_READ_HOLDING,
            Response::WriteMultiple { .. } => FC_WRITE_MULTIPLE,
            Response::Exception { function, .. } => function | EXCEPTION_BIT,
        }
    }

    pub fn data(&self) -> Vec<u8> {
        let mut d = Vec::new();
        match self {
            Response::ReadHolding { values } => {
                d.push((values.len() * 2) as u8);
                for v in values {
                    d.extend_from_slice(&v.to_be_bytes());
                }
            }
            Response::WriteMultiple { address, quantity } => {
                d.extend_from_slice(&address.to_be_bytes());
                d.extend_from_slice(&quantity.to_be_bytes());
            }
            Response::Exception { code, .. } => d.push(*code),
        }
        d
    }

    pub fn to_frame(&self, transaction_id: u16, unit_id: u8) -> MbapFrame {
        MbapFrame::new(transaction_id, unit_id, self.function(), self.data())
    }

    pub fn parse(frame: &MbapFrame) -> Result<Response, FrameError> {
        let d = &frame.data;
        if !frame.is_supported() {
            return Err(FrameError::UnsupportedFunction(frame.function));
        }
        if frame.is_exception() {
            let [code] = d.as_slice() else {
                return Err(malformed("exception response carries one byte"));
            };
            return Ok(Response::Exception {
                function: frame.function & !EXCEPTION_BIT,
                code: *code,
            });
        }
        match frame.function {
            FC_READ_HOLDING => {
                let Some((&count, rest)) = d.split_first() else {
                    return Err(malformed("read response is empty"));
                };
                if count as usize != rest.len() || count % 2 != 0 || count == 0 {
                    return Err(malformed("read response byte count disagrees"));
                }
                Ok(Response::ReadHolding { values: words(rest) })
            }
            _ => {
                if d.len() != 4 {
                    return Err(malformed("write response needs 4 data bytes"));
                }
                Ok(Response::WriteMultiple {
                    address: word(d, 0),
                    quantity: word(d, 2),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bytes(s: &str) -> Vec<u8> {
        s.split_whitespace().map(|b| u8::from_str_radix(b, 16).unwrap()).collect()
    }

    #[test]
    fn read_request_bytes() {
        let f = Request::ReadHolding { address: 0, quantity: 2 }.to_frame(1, 1);
        assert_eq!(f.encode(), bytes("00 01 00 00 00 06 01 03 00 00 00 02"));
        assert_eq!(MbapFrame::decode(&f.encode()).unwrap(), f);
        assert_eq!(
            Request::parse(&f).unwrap(),
            Request::ReadHolding { address: 0, quantity: 2 }
        );
    }

    #[test]
    fn float_response_bytes() {
        assert_eq!(25.0f32.to_bits(), 0x41C8_0000);
        let regs = f32_to_registers(25.0);
        let f = Response::ReadHolding { values: regs.to_vec() }.to_frame(1, 1);
        assert_eq!(f.encode(), bytes("00 01 00 00 00 07 01 03 04 41 C8 00 00"));
        let Response::ReadHolding { values } = Response::parse(&f).unwrap() else { panic!() };
        assert_eq!(registers_to_f32([values[0], values[1]]), 25.0);
    }

    #[test]
    fn exception_bytes() {
        let f = Response::Exception { function: 3, code: EX_DEVICE_FAILURE }.to_frame(1, 1);
        assert_eq!(f.encode(), bytes("00 01 00 00 00 03 01 83 04"));
        assert_eq!(
            Response::parse(&MbapFrame::decode(&f.encode()).unwrap()).unwrap(),
            Response::Exception { function: 3, code: 4 }
        );
    }

    #[test]
    fn write_round_trip() {
        let req = Request::WriteMultiple { address: 10, values: vec![1, 0xBEEF] };
        let f = req.to_frame(9, 3);
        assert_eq!(f.encode(), bytes("00 09 00 00 00 0B 03 10 00 0A 00 02 04 00 01 BE EF"));
        assert_eq!(Request::parse(&f).unwrap(), req);
        let resp = Response::WriteMultiple { address: 10, quantity: 2 };
        assert_eq!(Response::parse(&resp.to_frame(9, 3)).unwrap(), resp);
    }

    #[test]
    fn decode_errors() {
        assert_eq!(MbapFrame::decode(&[0; 7]), Err(FrameError::ShortFrame(7)));
        assert_eq!(
            MbapFrame::decode(&bytes("00 01 00 00 00 07 01 03 00 00 00 02")),
            Err(FrameError::LengthMismatch { declared: 7, actual: 6 })
        );
        assert_eq!(
            MbapFrame::decode(&bytes("00 01 00 01 00 06 01 03 00 00 00 02")),
            Err(FrameError::ProtocolId(1))
        );
        let odd = MbapFrame::decode(&bytes("00 01 00 00 00 02 01 2B")).unwrap();
        assert!(!odd.is_supported());
        assert_eq!(Request::parse(&odd), Err(FrameError::UnsupportedFunction(0x2B)));
        assert_eq!(Response::parse(&odd), Err(FrameError::UnsupportedFunction(0x2B)));
        let zero_qty = Request::ReadHolding { address: 0, quantity: 0 }.to_frame(1, 1);
        assert!(matches!(Request::parse(&zero_qty), Err(FrameError::MalformedPdu(_))));
    }

    #[test]
    fn stream_reading() {
        let a = Request::ReadHolding { address: 0, quantity: 2 }.to_frame(1, 1);
        let b = Response::Exception { function: 3, code: 4 }.to_frame(2, 2);
        let mut wire = a.encode();
        wire.extend(b.encode());
        let mut cur = std::io::Cursor::new(wire);
        assert_eq!(read_frame(&mut cur).unwrap(), a);
        assert_eq!(read_frame(&mut cur).unwrap(), b);
        assert!(matches!(read_frame(&mut cur), Err(FrameError::Io { .. })));
        let mut bad = std::io::Cursor::new(bytes("00 01 00 00 00 01 01"));
        assert!(matches!(read_frame(&mut bad), Err(FrameError::LengthMismatch { .. })));
    }

    #[test]
    fn hex_format() {
        assert_eq!(hex(&[0, 0x83, 4]), "00 83 04");
    }
}
