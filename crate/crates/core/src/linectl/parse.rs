use super::{Buffer, LineError, LineModel, Machine, MachineEvent, MachineState, Rate, SpeedPolicy};

pub type Schedule = Vec<(u64, String, MachineEvent)>;

fn parse_rate(s: &str) -> Option<Rate> {
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d): (u64, u64) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
            (d != 0).then(|| Rate::new(n, d))
        }
        None => s.trim().parse().ok().map(Rate::from_integer),
    }
}

/// Line config, tab separated:
///
/// ```text
/// MACHINE  name  rate  [Idle|Producing|Aborted]
/// BUFFER   id    upstream  downstream  capacity
/// SPEED    full|linear
/// ```
///
/// Rates are integers or fractions such as `3/2`. Machines are listed in
/// flow order; the initial state defaults to `Producing`.
pub fn parse_line(text: &str) -> Result<LineModel, LineError> {
    let mut machines = Vec::new();
    let mut buffers = Vec::new();
    let mut policy = SpeedPolicy::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let err = |m: String| LineError::Parse { line, message: m };
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        match cols.as_slice() {
            ["MACHINE", name, rate, rest @ ..] if rest.len() <= 1 => {
                let rate = parse_rate(rate).ok_or_else(|| err(format!("invalid rate `{rate}`")))?;
                let state = match rest.first().copied().unwrap_or("Producing") {
                    "Producing" => MachineState::Producing,
                    "Idle" => MachineState::Idle,
                    "Aborted" => MachineState::Aborted,
                    other => return Err(err(format!("invalid initial state `{other}`"))),
                };
                machines.push(Machine::new(name, rate, state));
            }
            ["BUFFER", id, up, down, cap] => {
                let cap: u64 = cap.parse().map_err(|_| err(format!("invalid capacity `{cap}`")))?;
                buffers.push(Buffer::new(id, up, down, cap));
            }
            ["SPEED", p] => {
                policy = match *p {
                    "full" => SpeedPolicy::Full,
                    "linear" => SpeedPolicy::Linear,
                    other => return Err(err(format!("unknown speed policy `{other}`"))),
                }
            }
            _ => return Err(err(format!("unrecognised record `{raw}`"))),
        }
    }
    Ok(LineModel::new(machines, buffers)?.with_policy(policy))
}

/// `tick<TAB>machine<TAB>event` lines.
pub fn parse_schedule(text: &str) -> Result<Schedule, LineError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let err = |m: String| LineError::Parse { line, message: m };
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        let [tick, machine, event] = cols.as_slice() else {
            return Err(err(format!("expected 3 fields, got {}", cols.len())));
        };
        let tick: u64 = tick.parse().map_err(|_| err(format!("invalid tick `{tick}`")))?;
        let event: MachineEvent = event.parse().map_err(|_| err(format!("unknown event `{event}`")))?;
        out.push((tick, machine.to_string(), event));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round() {
        let l = parse_line("# line\nMACHINE\tA\t3/2\nMACHINE\tB\t1\tIdle\nBUFFER\tB1\tA\tB\t4\nSPEED\tfull\n").unwrap();
        assert_eq!(l.machines()[0].rate, Rate::new(3, 2));
        assert_eq!(l.machines()[1].state, MachineState::Idle);
        assert_eq!(l.policy(), SpeedPolicy::Full);
        assert_eq!(l.buffer("B1").unwrap().capacity, 4);
    }

    #[test]
    fn config_errors() {
        for (text, line) in [
            ("MACHINE\tA\tx\n", 1),
            ("MACHINE\tA\t1/0\n", 1),
            ("MACHINE\tA\t1\n\nMACHINE\tB\t1\tRunning\n", 3),
            ("BUFFER\tB1\tA\tB\n", 1),
            ("SPEED\tturbo\n", 1),
            ("MACHINE\tA\t1\nBUFFER\tB\tA\tB\t-1\n", 2),
        ] {
            match parse_line(text) {
                Err(LineError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(parse_line("MACHINE\tA\t1\nMACHINE\tB\t1\n"), Err(LineError::Topology(_))));
    }

    #[test]
    fn schedule_format() {
        let s = parse_schedule("0\tPackaging\tResourceOut\n7\tPackaging\tResourceIn\n").unwrap();
        assert_eq!(s[1], (7, "Packaging".to_string(), MachineEvent::ResourceIn));
        assert!(parse_schedule("x\tA\tFault\n").is_err());
        assert!(parse_schedule("1\tA\tExplode\n").is_err());
        assert!(parse_schedule("1\tA\n").is_err());
    }
}
