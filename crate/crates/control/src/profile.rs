//! Risk profiles emitted by the sentinel.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RiskLevel {
    Low,
    Elevated,
    Critical,
}

/// Per-pass assessment: overall level, per-attack likelihoods and the
/// trust delta this pass contributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub level: RiskLevel,
    pub p_mia: f64,
    pub p_poi: f64,
    pub p_leak: f64,
    /// Trust score delta in [-0.1, 0.1] for this pass.
    pub delta: f64,
    pub rationale: String,
}

impl RiskProfile {
    /// Field-range validation used on controller replies.
    pub fn is_valid(&self) -> bool {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        prob(self.p_mia)
            && prob(self.p_poi)
            && prob(self.p_leak)
            && (-0.1..=0.1).contains(&self.delta)
    }

    pub fn max_probability(&self) -> f64 {
        self.p_mia.max(self.p_poi).max(self.p_leak)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_delta_is_invalid() {
        let profile = RiskProfile {
            level: RiskLevel::Low,
            p_mia: 0.05,
            p_poi: 0.05,
            p_leak: 0.05,
            delta: 0.5,
            rationale: String::new(),
        };
        assert!(!profile.is_valid());
    }

    #[test]
    fn levels_serialize_screaming() {
        assert_eq!(serde_json::to_string(&RiskLevel::Critical).unwrap(), "\"CRITICAL\"");
    }
}
