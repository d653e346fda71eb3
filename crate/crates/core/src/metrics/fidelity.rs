use std::fmt;

use serde::{Deserialize, Serialize};

use super::MetricError;

/// Three-way quality reading of a greedy-embedding F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityBand {
    Divergent,
    Adequate,
    Faithful,
}

impl FidelityBand {
    pub const FAITHFUL_MIN: f64 = 0.9;
    pub const DIVERGENT_MAX: f64 = 0.65;

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Faithful => "faithful",
            Self::Adequate => "adequate",
            Self::Divergent => "divergent",
        }
    }
}

impl fmt::Display for FidelityBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `[0.9, 1]` faithful, `(0.65, 0.9)` adequate, `[0, 0.65]` divergent.
/// The (0.65, 0.66) gap between the published bands falls to adequate.
pub fn classify_fidelity(f1: f64) -> Result<FidelityBand, MetricError> {
    if !(0.0..=1.0).contains(&f1) {
        return Err(MetricError::OutOfRange(f1));
    }
    Ok(if f1 >= FidelityBand::FAITHFUL_MIN {
        FidelityBand::Faithful
    } else if f1 > FidelityBand::DIVERGENT_MAX {
        FidelityBand::Adequate
    } else {
        FidelityBand::Divergent
    })
}
