//! Discrete-event production line: machines as small state machines,
//! bounded buffers between neighbours holding item tokens, and speed
//! adaptation driven by downstream buffer fill.
//!
//! One [`LineModel::step`] is one tick:
//!
//! 1. every `Producing` machine, upstream first, accrues
//!    `rate * speed_fraction` and moves whole items from its upstream
//!    buffer (the head has unlimited supply) to its downstream buffer (the
//!    tail has an unlimited sink);
//! 2. flow holds: a producing machine with a full downstream buffer or an
//!    empty upstream buffer suspends itself, and self-suspended machines
//!    resume once the condition clears;
//! 3. timed states advance (`Starting` to `Producing`, `Resetting` to
//!    `Idle`);
//! 4. the clock moves on and events scheduled for the new tick fire.
//!
//! A machine only produces in ticks that begin with it in `Producing`.

mod parse;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};

pub use parse::{parse_line, parse_schedule, Schedule};

pub const CARTON_JAM_LINE: &str = include_str!("../../data/carton_jam.line");
pub const CARTON_JAM_SCHEDULE: &str = include_str!("../../data/carton_jam.schedule");
/// Long enough for the jam, the self-suspend and the restart.
pub const CARTON_JAM_TICKS: u64 = 12;

/// The bundled three-machine line with its jam schedule loaded, at tick 0.
pub fn carton_jam() -> LineModel {
    let mut l = parse_line(CARTON_JAM_LINE).expect("bundled line parses");
    l.schedule_all(&parse_schedule(CARTON_JAM_SCHEDULE).expect("bundled schedule parses"));
    l
}

pub type Rate = Ratio<u64>;
pub type MachineId = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuspendReason {
    /// External: material ran out.
    ResourceOut,
    /// Downstream buffer full.
    Blocked,
    /// Upstream buffer empty.
    Starved,
}

impl SuspendReason {
    pub fn is_flow_hold(self) -> bool {
        !matches!(self, SuspendReason::ResourceOut)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineState {
    Idle,
    Starting,
    Producing,
    Suspended(SuspendReason),
    Aborted,
    Resetting,
}

impl MachineState {
    pub fn name(self) -> &'static str {
        match self {
            MachineState::Idle => "Idle",
            MachineState::Starting => "Starting",
            MachineState::Producing => "Producing",
            MachineState::Suspended(_) => "Suspended",
            MachineState::Aborted => "Aborted",
            MachineState::Resetting => "Resetting",
        }
    }

    pub fn is_suspended(self) -> bool {
        matches!(self, MachineState::Suspended(_))
    }
}

impl fmt::Display for MachineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineState::Suspended(r) => write!(
                f,
                "Suspended({})",
                match r {
                    SuspendReason::ResourceOut => "resource-out",
                    SuspendReason::Blocked => "blocked",
                    SuspendReason::Starved => "starved",
                }
            ),
            s => f.write_str(s.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineEvent {
    ResourceOut,
    ResourceIn,
    Fault,
    ResetCmd,
    StartCmd,
}

impl MachineEvent {
    pub const ALL: [MachineEvent; 5] = [
        MachineEvent::ResourceOut,
        MachineEvent::ResourceIn,
        MachineEvent::Fault,
        MachineEvent::ResetCmd,
        MachineEvent::StartCmd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MachineEvent::ResourceOut => "ResourceOut",
            MachineEvent::ResourceIn => "ResourceIn",
            MachineEvent::Fault => "Fault",
            MachineEvent::ResetCmd => "ResetCmd",
            MachineEvent::StartCmd => "StartCmd",
        }
    }
}

impl fmt::Display for MachineEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MachineEvent {
    type Err = LineError;

    fn from_str(s: &str) -> Result<Self, LineError> {
        MachineEvent::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| LineError::Parse {
                line: 0,
                message: format!("unknown event `{s}`"),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LineError {
    #[error("unknown machine `{0}`")]
    UnknownMachine(String),
    #[error("{event} is illegal for {machine} in state {state}")]
    IllegalTransition {
        machine: String,
        state: MachineState,
        event: MachineEvent,
    },
    #[error("topology: {0}")]
    Topology(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("predicate not satisfied within {ticks} ticks")]
    BudgetExhausted { ticks: u64 },
}

/// How a machine's speed follows its downstream buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpeedPolicy {
    /// Always full speed; only flow holds stop a machine.
    Full,
    /// `free / capacity` of the downstream buffer.
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub id: MachineId,
    pub state: MachineState,
    pub rate: Rate,
    /// Progress toward the next item, always in `[0, 1)`.
    pub accumulator: Rate,
    pub emitted: u64,
    pub consumed: u64,
    /// Last known states of the adjacent machines.
    pub neighbours: BTreeMap<MachineId, MachineState>,
}

impl Machine {
    pub fn new(id: &str, rate: Rate, state: MachineState) -> Self {
        Self {
            id: id.to_string(),
            state,
            rate,
            accumulator: Rate::zero(),
            emitted: 0,
            consumed: 0,
            neighbours: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Buffer {
    pub id: String,
    pub upstream: MachineId,
    pub downstream: MachineId,
    pub capacity: u64,
    pub count: u64,
}

impl Buffer {
    pub fn new(id: &str, upstream: &str, downstream: &str, capacity: u64) -> Self {
        Self {
            id: id.to_string(),
            upstream: upstream.to_string(),
            downstream: downstream.to_string(),
            capacity,
            count: 0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.count >= self.capacity
    }

    pub fn free(&self) -> u64 {
        self.capacity - self.count
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogKind {
    Event(MachineEvent),
    Rejected { event: MachineEvent, reason: String },
    StateChange { from: MachineState, to: MachineState },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub tick: u64,
    pub machine: MachineId,
    pub kind: LogKind,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t", self.tick, self.machine)?;
        match &self.kind {
            LogKind::Event(e) => write!(f, "event {e}"),
            LogKind::Rejected { event, reason } => write!(f, "rejected {event}: {reason}"),
            LogKind::StateChange { from, to } => write!(f, "{from} -> {to}"),
        }
    }
}

/// A simple chain of machines with one buffer between each neighbour pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineModel {
    machines: Vec<Machine>,
    /// `buffers[k]` sits between `machines[k]` and `machines[k + 1]`.
    buffers: Vec<Buffer>,
    policy: SpeedPolicy,
    clock: u64,
    log: Vec<LogEntry>,
    trace: Vec<String>,
    pending: BTreeMap<u64, Vec<(MachineId, MachineEvent)>>,
}

impl LineModel {
    /// `buffers` may be given in any order but must link each adjacent
    /// machine pair exactly once, in the direction of flow.
    pub fn new(machines: Vec<Machine>, buffers: Vec<Buffer>) -> Result<LineModel, LineError> {
        if machines.is_empty() {
            return Err(LineError::Topology("a line needs at least one machine".into()));
        }
        for (i, m) in machines.iter().enumerate() {
            if machines[..i].iter().any(|o| o.id == m.id) {
                return Err(LineError::Topology(format!("duplicate machine `{}`", m.id)));
            }
        }
        if buffers.len() != machines.len() - 1 {
            return Err(LineError::Topology(format!(
                "{} machines need {} buffers, got {}",
                machines.len(),
                machines.len() - 1,
                buffers.len()
            )));
        }
        let mut ordered = Vec::with_capacity(buffers.len());
        for w in machines.windows(2) {
            let b = buffers
                .iter()
                .find(|b| b.upstream == w[0].id && b.downstream == w[1].id)
                .ok_or_else(|| LineError::Topology(format!("no buffer from {} to {}", w[0].id, w[1].id)))?;
            if ordered.iter().any(|o: &Buffer| o.id == b.id) {
                return Err(LineError::Topology(format!("duplicate buffer `{}`", b.id)));
            }
            if b.count > b.capacity {
                return Err(LineError::Topology(format!("buffer `{}` over capacity", b.id)));
            }
            ordered.push(b.clone());
        }
        let mut line = LineModel {
            machines,
            buffers: ordered,
            policy: SpeedPolicy::default(),
            clock: 0,
            log: Vec::new(),
            trace: Vec::new(),
            pending: BTreeMap::new(),
        };
        for k in 0..line.machines.len() {
            let s = line.machines[k].state;
            line.broadcast(k, s);
        }
        for k in 0..line.machines.len() {
            line.push_trace(k);
        }
        Ok(line)
    }

    pub fn with_policy(mut self, policy: SpeedPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn policy(&self) -> SpeedPolicy {
        self.policy
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    pub fn buffers(&self) -> &[Buffer] {
        &self.buffers
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    /// `tick<TAB>machine<TAB>state<TAB>buffer-counts` lines: the initial
    /// states, then one line per state change.
    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn trace_text(&self) -> String {
        let mut s = self.trace.join("\n");
        s.push('\n');
        s
    }

    fn index(&self, id: &str) -> Result<usize, LineError> {
        self.machines
            .iter()
            .position(|m| m.id == id)
            .ok_or_else(|| LineError::UnknownMachine(id.to_string()))
    }

    pub fn machine(&self, id: &str) -> Option<&Machine> {
        self.machines.iter().find(|m| m.id == id)
    }

    pub fn state(&self, id: &str) -> Option<MachineState> {
        self.machine(id).map(|m| m.state)
    }

    pub fn buffer(&self, id: &str) -> Option<&Buffer> {
        self.buffers.iter().find(|b| b.id == id)
    }

    pub fn buffer_counts(&self) -> String {
        self.buffers
            .iter()
            .map(|b| format!("{}={}/{}", b.id, b.count, b.capacity))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn push_trace(&mut self, k: usize) {
        let line = format!(
            "{}\t{}\t{}\t{}",
            self.clock,
            self.machines[k].id,
            self.machines[k].state,
            self.buffer_counts()
        );
        self.trace.push(line);
    }

    fn broadcast(&mut self, k: usize, state: MachineState) {
        let id = self.machines[k].id.clone();
        if k > 0 {
            self.machines[k - 1].neighbours.insert(id.clone(), state);
        }
        if k + 1 < self.machines.len() {
            self.machines[k + 1].neighbours.insert(id, state);
        }
    }

    fn set_state(&mut self, k: usize, to: MachineState) {
        let from = self.machines[k].state;
        if from == to {
            return;
        }
        self.machines[k].state = to;
        self.log.push(LogEntry {
            tick: self.clock,
            machine: self.machines[k].id.clone(),
            kind: LogKind::StateChange { from, to },
        });
        self.broadcast(k, to);
        self.push_trace(k);
    }

    fn upstream(&self, k: usize) -> Option<&Buffer> {
        k.checked_sub(1).map(|i| &self.buffers[i])
    }

    fn downstream(&self, k: usize) -> Option<&Buffer> {
        self.buffers.get(k)
    }

    /// Speed factor in `[0, 1]` for machine `id`. Machines without a
    /// downstream buffer always run at full speed.
    pub fn speed_fraction(&self, id: &str) -> Result<Rate, LineError> {
        let k = self.index(id)?;
        Ok(self.fraction_at(k))
    }

    fn fraction_at(&self, k: usize) -> Rate {
        match (self.policy, self.downstream(k)) {
            (SpeedPolicy::Full, _) | (_, None) => Rate::one(),
            (SpeedPolicy::Linear, Some(b)) if b.capacity == 0 => Rate::zero(),
            (SpeedPolicy::Linear, Some(b)) => Rate::new(b.free(), b.capacity),
        }
    }

    /// Applies `event` to `machine` right now.
    pub fn fire_event(&mut self, machine: &str, event: MachineEvent) -> Result<(), LineError> {
        let k = self.index(machine)?;
        let state = self.machines[k].state;
        use MachineEvent as E;
        use MachineState as S;
        let next = match (state, event) {
            (S::Aborted, E::Fault) => S::Aborted,
            (_, E::Fault) => S::Aborted,
            (S::Producing, E::ResourceOut) => S::Suspended(SuspendReason::ResourceOut),
            (S::Suspended(r), E::ResourceOut) if r.is_flow_hold() => S::Suspended(SuspendReason::ResourceOut),
            (S::Suspended(SuspendReason::ResourceOut), E::ResourceIn) => S::Producing,
            (S::Aborted, E::ResetCmd) => S::Resetting,
            (S::Idle, E::StartCmd) => S::Starting,
            _ => {
                return Err(LineError::IllegalTransition {
                    machine: machine.to_string(),
                    state,
                    event,
                })
            }
        };
        self.log.push(LogEntry {
            tick: self.clock,
            machine: machine.to_string(),
            kind: LogKind::Event(event),
        });
        if event == E::Fault && state != S::Aborted {
            // work in progress is scrapped
            self.machines[k].accumulator = Rate::zero();
        }
        self.set_state(k, next);
        Ok(())
    }

    /// Queues `event` for the end of tick `tick`. Events for the current
    /// tick fire immediately; events in the past are logged as rejected.
    pub fn schedule(&mut self, tick: u64, machine: &str, event: MachineEvent) {
        if tick < self.clock {
            self.log.push(LogEntry {
                tick: self.clock,
                machine: machine.to_string(),
                kind: LogKind::Rejected {
                    event,
                    reason: format!("scheduled for past tick {tick}"),
                },
            });
        } else if tick == self.clock {
            self.fire_logged(machine, event);
        } else {
            self.pending.entry(tick).or_default().push((machine.to_string(), event));
        }
    }

    pub fn schedule_all(&mut self, schedule: &Schedule) {
        for (tick, machine, event) in schedule {
            self.schedule(*tick, machine, *event);
        }
    }

    fn fire_logged(&mut self, machine: &str, event: MachineEvent) {
        if let Err(e) = self.fire_event(machine, event) {
            self.log.push(LogEntry {
                tick: self.clock,
                machine: machine.to_string(),
                kind: LogKind::Rejected {
                    event,
                    reason: e.to_string(),
                },
            });
        }
    }

    pub fn step(&mut self) {
        let t = self.clock + 1;
        let n = self.machines.len();
        let producing: Vec<bool> = self.machines.iter().map(|m| m.state == MachineState::Producing).collect();

        // 1. production, upstream first
        for k in 0..n {
            if !producing[k] {
                continue;
            }
            let gain = self.machines[k].rate * self.fraction_at(k);
            let mut acc = self.machines[k].accumulator + gain;
            while acc >= Rate::one() {
                let has_input = self.upstream(k).is_none_or(|b| b.count > 0);
                let has_room = self.downstream(k).is_none_or(|b| !b.is_full());
                if !has_input || !has_room {
                    break;
                }
                if k > 0 {
                    self.buffers[k - 1].count -= 1;
                    self.machines[k].consumed += 1;
                }
                if k < n - 1 {
                    self.buffers[k].count += 1;
                }
                self.machines[k].emitted += 1;
                acc -= Rate::one();
            }
            self.machines[k].accumulator = acc.fract();
        }

        self.clock = t;

        // 2. flow holds
        for k in 0..n {
            let blocked = self.downstream(k).is_some_and(Buffer::is_full);
            let starved = self.upstream(k).is_some_and(|b| b.count == 0);
            let hold = if blocked {
                Some(SuspendReason::Blocked)
            } else if starved {
                Some(SuspendReason::Starved)
            } else {
                None
            };
            match (self.machines[k].state, hold) {
                (MachineState::Producing, Some(r)) => self.set_state(k, MachineState::Suspended(r)),
                (MachineState::Suspended(cur), h) if cur.is_flow_hold() => {
                    let next = h.map_or(MachineState::Producing, MachineState::Suspended);
                    self.set_state(k, next);
                }
                _ => {}
            }
        }

        // 3. timed states
        for k in 0..n {
            match self.machines[k].state {
                MachineState::Starting => self.set_state(k, MachineState::Producing),
                MachineState::Resetting => self.set_state(k, MachineState::Idle),
                _ => {}
            }
        }

        // 4. scheduled events
        if let Some(events) = self.pending.remove(&t) {
            for (m, e) in events {
                self.fire_logged(&m, e);
            }
        }
    }

    /// Steps until `pred` holds, checking before each step. Returns the
    /// number of steps taken.
    pub fn run_until(&mut self, mut pred: impl FnMut(&LineModel) -> bool, max_ticks: u64) -> Result<u64, LineError> {
        for taken in 0..=max_ticks {
            if pred(self) {
                return Ok(taken);
            }
            if taken == max_ticks {
                break;
            }
            self.step();
        }
        Err(LineError::BudgetExhausted { ticks: max_ticks })
    }

    /// Place invariant per buffer: items emitted upstream equal items
    /// consumed downstream plus items in the buffer.
    pub fn tokens_conserved(&self) -> bool {
        self.buffers.iter().enumerate().all(|(k, b)| {
            self.machines[k].emitted == self.machines[k + 1].consumed + b.count && b.count <= b.capacity
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rate(n: u64) -> Rate {
        Rate::from_integer(n)
    }

    fn carton_line(policy: SpeedPolicy) -> LineModel {
        LineModel::new(
            vec![
                Machine::new("FFS", rate(1), MachineState::Producing),
                Machine::new("Packaging", rate(1), MachineState::Producing),
                Machine::new("Palletizer", rate(1), MachineState::Producing),
            ],
            vec![
                Buffer::new("B1", "FFS", "Packaging", 5),
                Buffer::new("B2", "Packaging", "Palletizer", 5),
            ],
        )
        .unwrap()
        .with_policy(policy)
    }

    #[test]
    fn fire_event_examples() {
        let mut l = carton_line(SpeedPolicy::Full);
        l.fire_event("Packaging", MachineEvent::ResourceOut).unwrap();
        assert_eq!(l.state("Packaging"), Some(MachineState::Suspended(SuspendReason::ResourceOut)));
        l.fire_event("Packaging", MachineEvent::ResourceIn).unwrap();
        assert_eq!(l.state("Packaging"), Some(MachineState::Producing));
        l.fire_event("Packaging", MachineEvent::Fault).unwrap();
        assert_eq!(
            l.fire_event("Packaging", MachineEvent::ResourceIn),
            Err(LineError::IllegalTransition {
                machine: "Packaging".into(),
                state: MachineState::Aborted,
                event: MachineEvent::ResourceIn
            })
        );
        l.fire_event("Packaging", MachineEvent::Fault).unwrap();
        assert!(matches!(
            l.fire_event("Nope", MachineEvent::Fault),
            Err(LineError::UnknownMachine(_))
        ));
    }

    #[test]
    fn neighbours_see_state_changes() {
        let mut l = carton_line(SpeedPolicy::Full);
        l.fire_event("Packaging", MachineEvent::ResourceOut).unwrap();
        let susp = MachineState::Suspended(SuspendReason::ResourceOut);
        assert_eq!(l.machine("FFS").unwrap().neighbours["Packaging"], susp);
        assert_eq!(l.machine("Palletizer").unwrap().neighbours["Packaging"], susp);
        assert!(!l.machine("FFS").unwrap().neighbours.contains_key("Palletizer"));
    }

    #[test]
    fn carton_jam_full_speed() {
        let mut l = carton_line(SpeedPolicy::Full);
        l.fire_event("Packaging", MachineEvent::ResourceOut).unwrap();
        l.schedule(7, "Packaging", MachineEvent::ResourceIn);
        let blocked = MachineState::Suspended(SuspendReason::Blocked);
        for t in 1..=5 {
            l.step();
            assert_eq!(l.machine("FFS").unwrap().emitted, t, "tick {t}");
        }
        assert_eq!(l.state("FFS"), Some(blocked));
        assert_eq!(l.buffer("B1").unwrap().count, 5);
        l.step();
        l.step();
        assert_eq!(l.clock(), 7);
        assert_eq!(l.state("FFS"), Some(blocked));
        assert_eq!(l.state("Packaging"), Some(MachineState::Producing));
        l.step();
        assert_eq!(l.state("FFS"), Some(MachineState::Producing));
        assert_eq!(l.buffer("B1").unwrap().count, 4);
        assert!(l.tokens_conserved());
    }

    #[test]
    fn linear_speed_trace() {
        // free/capacity slows FFS down as B1 fills: emissions at ticks
        // 1, 3, 4, 6 and 11, then blocked
        let mut l = carton_line(SpeedPolicy::Linear);
        l.fire_event("Packaging", MachineEvent::ResourceOut).unwrap();
        let mut emitted_at = Vec::new();
        for _ in 0..12 {
            let before = l.machine("FFS").unwrap().emitted;
            l.step();
            if l.machine("FFS").unwrap().emitted > before {
                emitted_at.push(l.clock());
            }
        }
        assert_eq!(emitted_at, vec![1, 3, 4, 6, 11]);
        assert_eq!(l.state("FFS"), Some(MachineState::Suspended(SuspendReason::Blocked)));
    }

    #[test]
    fn speed_fraction_examples() {
        let mut l = LineModel::new(
            vec![
                Machine::new("A", rate(1), MachineState::Idle),
                Machine::new("B", rate(1), MachineState::Idle),
            ],
            vec![Buffer { count: 2, ..Buffer::new("B1", "A", "B", 4) }],
        )
        .unwrap();
        assert_eq!(l.speed_fraction("A").unwrap(), Rate::new(1, 2));
        assert_eq!(l.speed_fraction("B").unwrap(), Rate::one());
        l.buffers[0].count = 0;
        assert_eq!(l.speed_fraction("A").unwrap(), Rate::one());
        l.buffers[0].count = 4;
        assert_eq!(l.speed_fraction("A").unwrap(), Rate::zero());
        assert_eq!(l.clone().with_policy(SpeedPolicy::Full).speed_fraction("A").unwrap(), Rate::one());
    }

    #[test]
    fn idle_line_only_ticks() {
        let mut l = LineModel::new(
            vec![
                Machine::new("A", rate(1), MachineState::Idle),
                Machine::new("B", rate(1), MachineState::Idle),
            ],
            vec![Buffer::new("B1", "A", "B", 4)],
        )
        .unwrap();
        let before = l.clone();
        l.step();
        assert_eq!(l.clock(), 1);
        assert_eq!(l.machines(), before.machines());
        assert_eq!(l.buffers(), before.buffers());
        assert_eq!(l.trace(), before.trace());
    }

    #[test]
    fn run_until_examples() {
        let mut l = carton_line(SpeedPolicy::Full);
        l.fire_event("Packaging", MachineEvent::ResourceOut).unwrap();
        let n = l
            .run_until(|l| l.state("FFS").is_some_and(MachineState::is_suspended), 100)
            .unwrap();
        assert_eq!(n, 5);
        assert_eq!(l.run_until(|_| true, 10), Ok(0));
        assert_eq!(l.run_until(|_| false, 3), Err(LineError::BudgetExhausted { ticks: 3 }));
        assert_eq!(l.clock(), 8);
    }

    #[test]
    fn reset_sequence() {
        let mut l = carton_line(SpeedPolicy::Full);
        l.step();
        l.fire_event("FFS", MachineEvent::Fault).unwrap();
        l.step();
        assert_eq!(l.machine("FFS").unwrap().emitted, 1);
        l.fire_event("FFS", MachineEvent::ResetCmd).unwrap();
        assert_eq!(l.state("FFS"), Some(MachineState::Resetting));
        l.step();
        assert_eq!(l.state("FFS"), Some(MachineState::Idle));
        assert!(l.fire_event("FFS", MachineEvent::ResetCmd).is_err());
        l.fire_event("FFS", MachineEvent::StartCmd).unwrap();
        l.step();
        assert_eq!(l.state("FFS"), Some(MachineState::Producing));
        assert_eq!(l.machine("FFS").unwrap().emitted, 1);
        l.step();
        assert_eq!(l.machine("FFS").unwrap().emitted, 2);
    }

    #[test]
    fn suspension_keeps_accumulator() {
        let mut l = LineModel::new(vec![Machine::new("A", Rate::new(1, 3), MachineState::Producing)], vec![]).unwrap();
        l.step();
        l.step();
        assert_eq!(l.machine("A").unwrap().accumulator, Rate::new(2, 3));
        l.fire_event("A", MachineEvent::ResourceOut).unwrap();
        l.step();
        l.fire_event("A", MachineEvent::ResourceIn).unwrap();
        assert_eq!(l.machine("A").unwrap().accumulator, Rate::new(2, 3));
        l.step();
        assert_eq!(l.machine("A").unwrap().emitted, 1);
    }

    #[test]
    fn scheduled_events() {
        let mut l = carton_line(SpeedPolicy::Full);
        l.schedule(0, "FFS", MachineEvent::ResourceOut);
        assert!(l.state("FFS").unwrap().is_suspended());
        l.schedule(2, "FFS", MachineEvent::StartCmd);
        l.step();
        l.step();
        assert!(matches!(l.log().last().unwrap().kind, LogKind::Rejected { .. }));
        l.schedule(1, "FFS", MachineEvent::ResourceIn);
        assert!(matches!(l.log().last().unwrap().kind, LogKind::Rejected { .. }));
        assert!(l.state("FFS").unwrap().is_suspended());
    }

    #[test]
    fn topology_errors() {
        let a = || Machine::new("A", rate(1), MachineState::Idle);
        let b = || Machine::new("B", rate(1), MachineState::Idle);
        assert!(matches!(LineModel::new(vec![], vec![]), Err(LineError::Topology(_))));
        assert!(LineModel::new(vec![a(), a()], vec![Buffer::new("X", "A", "A", 1)]).is_err());
        assert!(LineModel::new(vec![a(), b()], vec![]).is_err());
        assert!(LineModel::new(vec![a(), b()], vec![Buffer::new("X", "B", "A", 1)]).is_err());
        assert!(LineModel::new(vec![a(), b()], vec![Buffer { count: 3, ..Buffer::new("X", "A", "B", 1) }]).is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(MachineState::Suspended(SuspendReason::Blocked).to_string(), "Suspended(blocked)");
        assert_eq!("resourcein".parse::<MachineEvent>().unwrap(), MachineEvent::ResourceIn);
        let l = carton_line(SpeedPolicy::Full);
        assert_eq!(l.trace()[0], "0\tFFS\tProducing\tB1=0/5 B2=0/5");
    }
}
