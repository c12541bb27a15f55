use std::sync::{Arc, Mutex};

/// Append-only protocol log shared by the harness components. Lines are
/// `actor<TAB>text`.
#[derive(Debug, Clone, Default)]
pub struct Trace(Arc<Mutex<Vec<String>>>);

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, actor: &str, text: impl AsRef<str>) {
        let mut g = self.0.lock().unwrap_or_else(|e| e.into_inner());
        g.push(format!("{actor}\t{}", text.as_ref()));
    }

    pub fn lines(&self) -> Vec<String> {
        self.0.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn text(&self) -> String {
        let mut s = self.lines().join("\n");
        s.push('\n');
        s
    }

    /// Index of the first line at or after `from` containing `needle`.
    pub fn find_from(&self, from: usize, needle: &str) -> Option<usize> {
        self.lines()
            .iter()
            .enumerate()
            .skip(from)
            .find(|(_, l)| l.contains(needle))
            .map(|(i, _)| i)
    }
}
