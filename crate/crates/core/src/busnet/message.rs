//! Line protocol of the service overlay: `VERB key=value ...`.
//!
//! Values made only of "plain" characters are written bare; anything else is
//! double-quoted, with `\\`, `\"`, `\n`, `\r` and `\t` escapes.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verb {
    RegisterMapping,
    QueryExpected,
    RequestConverter,
    Ok,
    Expected,
    Chain,
    Err,
}

impl Verb {
    pub const ALL: [Verb; 7] = [
        Verb::RegisterMapping,
        Verb::QueryExpected,
        Verb::RequestConverter,
        Verb::Ok,
        Verb::Expected,
        Verb::Chain,
        Verb::Err,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verb::RegisterMapping => "REGISTER_MAPPING",
            Verb::QueryExpected => "QUERY_EXPECTED",
            Verb::RequestConverter => "REQUEST_CONVERTER",
            Verb::Ok => "OK",
            Verb::Expected => "EXPECTED",
            Verb::Chain => "CHAIN",
            Verb::Err => "ERR",
        }
    }

    pub fn is_request(self) -> bool {
        matches!(self, Verb::RegisterMapping | Verb::QueryExpected | Verb::RequestConverter)
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verb {
    type Err = MessageError;

    fn from_str(s: &str) -> Result<Self, MessageError> {
        Verb::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| MessageError::UnknownVerb(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MessageError {
    #[error("empty message")]
    Empty,
    #[error("unknown verb `{0}`")]
    UnknownVerb(String),
    #[error("malformed field at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("invalid value for `{key}`: {value}")]
    InvalidValue { key: String, value: String },
}

/// One protocol line. Field order is kept as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceMessage {
    pub verb: Verb,
    fields: Vec<(String, String)>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
}

fn plain(c: char) -> bool {
    !c.is_control() && !c.is_whitespace() && c != '"' && c != '\\' && c != '='
}

fn quote(value: &str) -> String {
    if !value.is_empty() && value.chars().all(plain) {
        return value.to_string();
    }
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl ServiceMessage {
    pub fn new(verb: Verb) -> Self {
        Self { verb, fields: Vec::new() }
    }

    /// Adds a field. Panics on an invalid or repeated key, which is a
    /// programming error on the sending side.
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        assert!(valid_key(key), "invalid key `{key}`");
        assert!(self.get(key).is_none(), "duplicate key `{key}`");
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn error(code: &str, reason: impl ToString) -> Self {
        ServiceMessage::new(Verb::Err).with("code", code).with("reason", reason)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, MessageError> {
        self.get(key).ok_or_else(|| MessageError::MissingField(key.to_string()))
    }

    pub fn parse_field<T: FromStr>(&self, key: &str) -> Result<T, MessageError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| MessageError::InvalidValue {
            key: key.to_string(),
            value: v.to_string(),
        })
    }

    pub fn fields(&self) -> impl Iterator<Item = (&str, &str)> {
        self.fields.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Encodes without the trailing newline.
    pub fn encode(&self) -> String {
        let mut out = self.verb.as_str().to_string();
        for (k, v) in &self.fields {
            out.push(' ');
            out.push_str(k);
            out.push('=');
            out.push_str(&quote(v));
        }
        out
    }

    pub fn decode(line: &str) -> Result<ServiceMessage, MessageError> {
        let line = line.strip_suffix('\n').unwrap_or(line);
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            return Err(MessageError::Empty);
        }
        let (verb, mut rest, mut pos) = match line.find(' ') {
            Some(i) => (&line[..i], &line[i + 1..], i + 1),
            None => (line, "", line.len()),
        };
        let mut msg = ServiceMessage::new(verb.parse()?);
        let malformed = |offset: usize, m: &str| MessageError::Malformed {
            offset,
            message: m.to_string(),
        };
        if line.len() > verb.len() && rest.is_empty() {
            return Err(malformed(pos, "trailing space"));
        }
        while !rest.is_empty() {
            let eq = rest.find('=').ok_or_else(|| malformed(pos, "expected key=value"))?;
            let key = &rest[..eq];
            if !valid_key(key) {
                return Err(malformed(pos, "invalid key"));
            }
            let vstart = eq + 1;
            let bytes = &rest[vstart..];
            let (value, consumed) = if let Some(body) = bytes.strip_prefix('"') {
                let mut value = String::new();
                let mut chars = body.char_indices();
                let mut end = None;
                while let Some((i, c)) = chars.next() {
                    match c {
                        '"' => {
                            end = Some(i + 1);
                            break;
                        }
                        '\\' => {
                            let esc = match chars.next() {
                                Some((_, '"')) => '"',
                                Some((_, '\\')) => '\\',
                                Some((_, 'n')) => '\n',
                                Some((_, 'r')) => '\r',
                                Some((_, 't')) => '\t',
                                _ => return Err(malformed(pos + vstart + 1 + i, "invalid escape")),
                            };
                            value.push(esc);
                        }
                        c => value.push(c),
                    }
                }
                let end = end.ok_or_else(|| malformed(pos + vstart, "unterminated quote"))?;
                (value, 1 + end)
            } else {
                let end = bytes.find(' ').unwrap_or(bytes.len());
                let v = &bytes[..end];
                if v.is_empty() || !v.chars().all(plain) {
                    return Err(malformed(pos + vstart, "invalid bare value"));
                }
                (v.to_string(), end)
            };
            if msg.get(key).is_some() {
                return Err(MessageError::DuplicateKey(key.to_string()));
            }
            msg.fields.push((key.to_string(), value));
            let used = vstart + consumed;
            rest = &rest[used..];
            pos += used;
            if let Some(r) = rest.strip_prefix(' ') {
                if r.is_empty() {
                    return Err(malformed(pos, "trailing space"));
                }
                rest = r;
                pos += 1;
            } else if !rest.is_empty() {
                return Err(malformed(pos, "expected a space between fields"));
            }
        }
        Ok(msg)
    }
}

impl fmt::Display for ServiceMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}
