use std::fmt;

use super::frame::{
    f32_to_registers, registers_to_f32, FrameError, MbapFrame, Request, Response, EX_DEVICE_FAILURE,
    EX_ILLEGAL_ADDRESS, EX_ILLEGAL_FUNCTION, EX_ILLEGAL_VALUE,
};
use super::message::{ServiceMessage, Verb};
use super::service::{decode_chain, DeviceDescriptor, ServiceClient};
use super::BusError;
use crate::units::ConverterChain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lifecycle {
    Unvalidated,
    Accepted,
    ConditionallyAccepted,
    Rejected,
}

impl Lifecycle {
    pub fn serves_data(self) -> bool {
        matches!(self, Lifecycle::Accepted | Lifecycle::ConditionallyAccepted)
    }
}

impl fmt::Display for Lifecycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lifecycle::Unvalidated => "Unvalidated",
            Lifecycle::Accepted => "Accepted",
            Lifecycle::ConditionallyAccepted => "ConditionallyAccepted",
            Lifecycle::Rejected => "Rejected",
        })
    }
}

impl std::str::FromStr for Lifecycle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            Lifecycle::Unvalidated,
            Lifecycle::Accepted,
            Lifecycle::ConditionallyAccepted,
            Lifecycle::Rejected,
        ]
        .into_iter()
        .find(|l| l.to_string() == s)
        .ok_or_else(|| format!("unknown lifecycle `{s}`"))
    }
}

/// `active_chain` is set exactly when the slave is conditionally accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaveState {
    lifecycle: Lifecycle,
    active_chain: Option<ConverterChain>,
    reason: Option<String>,
}

impl SlaveState {
    pub fn unvalidated() -> Self {
        Self {
            lifecycle: Lifecycle::Unvalidated,
            active_chain: None,
            reason: None,
        }
    }

    pub fn accepted() -> Self {
        Self {
            lifecycle: Lifecycle::Accepted,
            active_chain: None,
            reason: None,
        }
    }

    /// An identity chain means no conversion is needed, so this yields
    /// plain acceptance.
    pub fn conditionally_accepted(chain: ConverterChain) -> Self {
        if chain.is_identity() {
            return Self::accepted();
        }
        Self {
            lifecycle: Lifecycle::ConditionallyAccepted,
            active_chain: Some(chain),
            reason: None,
        }
    }

    pub fn rejected(reason: impl Into<String>) -> Self {
        Self {
            lifecycle: Lifecycle::Rejected,
            active_chain: None,
            reason: Some(reason.into()),
        }
    }

    pub fn lifecycle(&self) -> Lifecycle {
        self.lifecycle
    }

    pub fn active_chain(&self) -> Option<&ConverterChain> {
        self.active_chain.as_ref()
    }

    pub fn reason(&self) -> Option<&str> {
        self.reason.as_deref()
    }

    /// Chain applied to samples; identity unless conditionally accepted.
    pub fn effective_chain(&self) -> ConverterChain {
        self.active_chain.clone().unwrap_or_else(ConverterChain::identity)
    }
}

impl fmt::Display for SlaveState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lifecycle)?;
        match (&self.active_chain, &self.reason) {
            (Some(c), _) => write!(f, " {c}"),
            (None, Some(r)) => write!(f, ": {r}"),
            (None, None) if self.lifecycle == Lifecycle::Accepted => f.write_str(" identity"),
            _ => Ok(()),
        }
    }
}

/// A smart device: its own descriptor, a raw sample in its native unit,
/// and the outcome of validating itself against the service.
#[derive(Debug, Clone)]
pub struct Slave {
    descriptor: DeviceDescriptor,
    sample: f64,
    state: SlaveState,
}

impl Slave {
    pub fn new(descriptor: DeviceDescriptor, sample: f64) -> Self {
        Self {
            descriptor,
            sample,
            state: SlaveState::unvalidated(),
        }
    }

    pub fn descriptor(&self) -> &DeviceDescriptor {
        &self.descriptor
    }

    pub fn state(&self) -> &SlaveState {
        &self.state
    }

    pub fn sample(&self) -> f64 {
        self.sample
    }

    pub fn set_sample(&mut self, v: f64) {
        self.sample = v;
    }

    /// Asks the service what is expected at this unit id and, for a unit
    /// mismatch, for a converter chain. The outcome depends only on the
    /// service's replies.
    pub fn plug(&mut self, client: &mut impl ServiceClient) -> Result<&SlaveState, BusError> {
        let d = &self.descriptor;
        let query = ServiceMessage::new(Verb::QueryExpected)
            .with("unit_id", d.unit_id)
            .with("device_type", &d.device_type)
            .with("native_unit", &d.native_unit);
        let reply = client.call(&query)?;
        self.state = match reply.verb {
            Verb::Err => SlaveState::rejected(format!(
                "{}: {}",
                reply.get("code").unwrap_or("error"),
                reply.get("reason").unwrap_or("")
            )),
            Verb::Expected => {
                let expected_type = reply.require("device_type")?.to_string();
                let expected_unit = reply.require("native_unit")?.to_string();
                if !reply.parse_field::<bool>("type_match")? {
                    SlaveState::rejected(format!("{} is not a {}", d.device_type, expected_type))
                } else if expected_unit == d.native_unit {
                    SlaveState::accepted()
                } else {
                    let req = ServiceMessage::new(Verb::RequestConverter)
                        .with("source", &d.native_unit)
                        .with("target", &expected_unit);
                    let reply = client.call(&req)?;
                    match reply.verb {
                        Verb::Chain => SlaveState::conditionally_accepted(decode_chain(&reply)?),
                        Verb::Err => SlaveState::rejected(format!(
                            "{}: {}",
                            reply.get("code").unwrap_or("error"),
                            reply.get("reason").unwrap_or("")
                        )),
                        v => return Err(BusError::UnexpectedReply(format!("{v} to REQUEST_CONVERTER"))),
                    }
                }
            }
            v => return Err(BusError::UnexpectedReply(format!("{v} to QUERY_EXPECTED"))),
        };
        Ok(&self.state)
    }

    /// The sample as delivered: converted by the active chain, narrowed to
    /// the 32-bit transport type.
    pub fn delivered_value(&self) -> f32 {
        self.state.effective_chain().composed.apply(self.sample) as f32
    }

    /// Answers one request frame. Non-validated slaves answer every request
    /// with exception 0x04 and never send data.
    pub fn handle(&mut self, frame: &MbapFrame) -> MbapFrame {
        let exception = |code: u8| {
            MbapFrame::new(
                frame.transaction_id,
                frame.unit_id,
                frame.function | super::frame::EXCEPTION_BIT,
                vec![code],
            )
        };
        if !self.state.lifecycle().serves_data() {
            return exception(EX_DEVICE_FAILURE);
        }
        let base = self.descriptor.register_base;
        let resp = match Request::parse(frame) {
            Err(FrameError::UnsupportedFunction(_)) => return exception(EX_ILLEGAL_FUNCTION),
            Err(_) => return exception(EX_ILLEGAL_VALUE),
            Ok(Request::ReadHolding { address, quantity }) => {
                if address != base || quantity != 2 {
                    return exception(EX_ILLEGAL_ADDRESS);
                }
                Response::ReadHolding {
                    values: f32_to_registers(self.delivered_value()).to_vec(),
                }
            }
            Ok(Request::WriteMultiple { address, values }) => {
                // writes set the raw sample, in the native unit
                if address != base || values.len() != 2 {
                    return exception(EX_ILLEGAL_ADDRESS);
                }
                self.sample = registers_to_f32([values[0], values[1]]) as f64;
                Response::WriteMultiple { address, quantity: 2 }
            }
        };
        resp.to_frame(frame.transaction_id, frame.unit_id)
    }
}
