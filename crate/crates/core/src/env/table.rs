use serde::{Deserialize, Serialize};

use crate::stream::Stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub stream: Stream,
    /// Set once the stream has come back from a failed column solve.
    pub retried: bool,
    seq: u64,
}

/// Pending streams awaiting separation. Always yields the largest flow
/// first, ties broken by insertion order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StreamTable {
    entries: Vec<TableEntry>,
    next_seq: u64,
}

impl StreamTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Whether `stream` qualifies for the table: enough flow and not on spec.
    pub fn admits(stream: &Stream, min_flow: f64, purity_spec: f64) -> bool {
        stream.flow >= min_flow && stream.purity().1 < purity_spec
    }

    pub fn push(&mut self, stream: Stream, retried: bool) {
        self.entries.push(TableEntry {
            stream,
            retried,
            seq: self.next_seq,
        });
        self.next_seq += 1;
    }

    pub fn pop_largest(&mut self) -> Option<TableEntry> {
        let idx = self
            .entries
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.stream
                    .flow
                    .total_cmp(&b.stream.flow)
                    .then(b.seq.cmp(&a.seq))
            })?
            .0;
        Some(self.entries.remove(idx))
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.next_seq = 0;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TableEntry> {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(flow: f64) -> Stream {
        Stream::new(vec![0.5, 0.5], flow, 20.0, 1.0)
    }

    #[test]
    fn pops_largest_then_insertion_order() {
        let mut t = StreamTable::new();
        t.push(s(10.0), false);
        t.push(s(30.0), false);
        t.push(Stream::new(vec![0.4, 0.6], 30.0, 20.0, 1.0), false);
        t.push(s(5.0), false);
        assert_eq!(t.pop_largest().unwrap().stream.composition[0], 0.5);
        assert_eq!(t.pop_largest().unwrap().stream.composition[0], 0.4);
        assert_eq!(t.pop_largest().unwrap().stream.flow, 10.0);
        assert_eq!(t.pop_largest().unwrap().stream.flow, 5.0);
        assert!(t.pop_largest().is_none());
    }

    #[test]
    fn admission_rule() {
        assert!(StreamTable::admits(&s(3.6), 3.6, 0.95));
        assert!(!StreamTable::admits(&s(3.5), 3.6, 0.95));
        let pure = Stream::new(vec![0.95, 0.05], 100.0, 20.0, 1.0);
        assert!(!StreamTable::admits(&pure, 3.6, 0.95));
    }
}
