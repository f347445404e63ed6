use serde::{Deserialize, Serialize};

/// A process stream: mole fractions over the component bank, molar flow in
/// kmol/h, temperature in degrees Celsius and pressure in bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stream {
    pub composition: Vec<f64>,
    pub flow: f64,
    pub temperature: f64,
    pub pressure: f64,
}

impl Stream {
    pub fn new(composition: Vec<f64>, flow: f64, temperature: f64, pressure: f64) -> Self {
        Self {
            composition,
            flow,
            temperature,
            pressure,
        }
    }

    /// Build a stream from per-component molar flows (kmol/h).
    pub fn from_component_flows(flows: &[f64], temperature: f64, pressure: f64) -> Self {
        let total: f64 = flows.iter().sum();
        let composition = if total > 0.0 {
            flows.iter().map(|f| f / total).collect()
        } else {
            vec![0.0; flows.len()]
        };
        Self::new(composition, total, temperature, pressure)
    }

    /// Per-component molar flows, kmol/h.
    pub fn component_flows(&self) -> Vec<f64> {
        self.composition.iter().map(|x| x * self.flow).collect()
    }

    /// Largest mole fraction and its component index.
    pub fn purity(&self) -> (usize, f64) {
        self.composition
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, x)| {
                if x > best.1 {
                    (i, x)
                } else {
                    best
                }
            })
    }

    pub fn n_components(&self) -> usize {
        self.composition.len()
    }
}
