//! Shared fixtures for the criterion benchmarks.

use distrl::{ColumnSpec, EnvConfig, Stream};

/// The default flowsheet feed after renormalization.
pub fn feed() -> Stream {
    let cfg = EnvConfig::default();
    let bank = cfg.load_bank().expect("default bank");
    cfg.feed_stream(&bank).expect("default feed").0
}

/// A propane/isobutane split at mid-range settings.
pub fn first_column() -> ColumnSpec {
    ColumnSpec {
        n_stages: 30,
        feed_stage: 15,
        condenser_pressure: 17.2,
        reflux_ratio: 2.0,
        boilup_ratio: 3.0,
    }
}
