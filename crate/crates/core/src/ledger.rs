//! Elementary-operation accounting.
//!
//! Engines charge one unit per level change plus one unit per neighbor-list entry
//! touched while moving the node, so a level change of `y` at level `i` costs
//! exactly `1 + D_y(Z_i)` units.

use serde::Serialize;

#[derive(Debug, Clone, Default, Serialize)]
pub struct WorkLedger {
    total: u64,
    current: u64,
    event: u64,
    /// `(event index, units)` per update, kept only when enabled.
    per_update: Option<Vec<(u64, u64)>>,
}

impl WorkLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// A ledger that also records the per-update breakdown.
    pub fn recording() -> Self {
        Self {
            per_update: Some(Vec::new()),
            ..Self::default()
        }
    }

    #[inline]
    pub fn charge(&mut self, units: u64) {
        self.total += units;
        self.current += units;
    }

    /// Closes the current update and starts the next one.
    pub fn end_event(&mut self) {
        if let Some(log) = self.per_update.as_mut() {
            log.push((self.event, self.current));
        }
        self.current = 0;
        self.event += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn events(&self) -> u64 {
        self.event
    }

    pub fn per_update(&self) -> Option<&[(u64, u64)]> {
        self.per_update.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakdown_sums_to_total() {
        let mut l = WorkLedger::recording();
        l.charge(3);
        l.end_event();
        l.charge(1);
        l.charge(4);
        l.end_event();
        assert_eq!(l.total(), 8);
        assert_eq!(l.per_update().unwrap(), &[(0, 3), (1, 5)]);
        assert!(WorkLedger::new().per_update().is_none());
    }
}
