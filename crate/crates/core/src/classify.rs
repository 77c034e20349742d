//! Evidence and security categories.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Prognostic threshold.
    pub k_p: f64,
    /// Strong threshold.
    pub k_s: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { k_p: 4.0, k_s: 7.0 }
    }
}

impl Thresholds {
    pub fn new(k_p: f64, k_s: f64) -> Result<Self> {
        let t = Self { k_p, k_s };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_p > 0.0 && self.k_p < self.k_s && self.k_s.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("thresholds need 0 < k_p < k_s, got k_p = {}, k_s = {}", self.k_p, self.k_s)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvidenceCategory {
    StrongRef,
    PrognosticRef,
    Weak,
    PrognosticAlt,
    StrongAlt,
}

impl EvidenceCategory {
    pub fn is_strong(self) -> bool {
        matches!(self, Self::StrongRef | Self::StrongAlt)
    }

    pub fn is_prognostic(self) -> bool {
        matches!(self, Self::PrognosticRef | Self::PrognosticAlt)
    }
}

/// Security labels. The first six describe observed-data evidence, the rest
/// appear only in simulations where the true sign is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SecurityCategory {
    SV,
    SS,
    SI,
    PS,
    PI,
    WI,
    MS,
    CS,
    MI,
    CI,
    W,
}

impl SecurityCategory {
    pub fn code(self) -> &'static str {
        match self {
            Self::SV => "SV",
            Self::SS => "SS",
            Self::SI => "SI",
            Self::PS => "PS",
            Self::PI => "PI",
            Self::WI => "WI",
            Self::MS => "MS",
            Self::CS => "CS",
            Self::MI => "MI",
            Self::CI => "CI",
            Self::W => "W",
        }
    }

    /// Column used in simulation tables, where very secure counts as secure
    /// and weak evidence is not split by security.
    pub fn tabulated(self) -> SecurityCategory {
        match self {
            Self::SV => Self::SS,
            Self::WI => Self::W,
            c => c,
        }
    }
}

impl fmt::Display for SecurityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Columns of a simulation security table, in display order.
pub const SIMULATION_CATEGORIES: [SecurityCategory; 9] = [
    SecurityCategory::MS,
    SecurityCategory::CS,
    SecurityCategory::MI,
    SecurityCategory::CI,
    SecurityCategory::W,
    SecurityCategory::PI,
    SecurityCategory::SI,
    SecurityCategory::PS,
    SecurityCategory::SS,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Security {
    VerySecure,
    Secure,
    Insecure,
}

pub fn evidence_category(v: f64, t: &Thresholds) -> EvidenceCategory {
    if v > t.k_s {
        EvidenceCategory::StrongRef
    } else if v > t.k_p {
        EvidenceCategory::PrognosticRef
    } else if v >= -t.k_p {
        EvidenceCategory::Weak
    } else if v >= -t.k_s {
        EvidenceCategory::PrognosticAlt
    } else {
        EvidenceCategory::StrongAlt
    }
}

fn check_interval(point: f64, lower: f64, upper: f64) -> Result<f64> {
    if !(lower <= upper) {
        return Err(Error::InvalidInterval { lower, upper });
    }
    if point < lower || point > upper {
        log::debug!("point {point} outside interval [{lower}, {upper}]; clamped for labelling");
    }
    Ok(point.clamp(lower, upper))
}

fn security(point: f64, lower: f64, upper: f64, t: &Thresholds) -> Security {
    if lower <= 0.0 && upper >= 0.0 {
        return Security::Insecure;
    }
    let proximal = if point >= 0.0 { lower } else { -upper };
    if proximal > t.k_s {
        Security::VerySecure
    } else if proximal > t.k_p {
        Security::Secure
    } else {
        Security::Insecure
    }
}

fn label(category: EvidenceCategory, sec: Security) -> SecurityCategory {
    use SecurityCategory::*;
    if category.is_strong() {
        match sec {
            Security::VerySecure => SV,
            Security::Secure => SS,
            Security::Insecure => SI,
        }
    } else if category.is_prognostic() {
        match sec {
            Security::Insecure => PI,
            _ => PS,
        }
    } else {
        WI
    }
}

/// Observed-data label of a point estimate and its interval. A point outside
/// the interval is clamped into it before labelling.
pub fn security_category(point: f64, lower: f64, upper: f64, t: &Thresholds) -> Result<SecurityCategory> {
    let point = check_interval(point, lower, upper)?;
    Ok(label(evidence_category(point, t), security(point, lower, upper, t)))
}

/// Label when the sign of the true evidence is known. Evidence pointing the
/// wrong way is misleading when strong and confusing when prognostic.
pub fn simulation_category(point: f64, lower: f64, upper: f64, true_sign: i8, t: &Thresholds) -> Result<SecurityCategory> {
    use SecurityCategory::*;
    let point = check_interval(point, lower, upper)?;
    let category = evidence_category(point, t);
    let agrees = (point > 0.0) == (true_sign > 0);
    if category == EvidenceCategory::Weak {
        return Ok(W);
    }
    let sec = security(point, lower, upper, t);
    if agrees {
        return Ok(label(category, sec));
    }
    let secure = sec != Security::Insecure;
    Ok(match (category.is_strong(), secure) {
        (true, true) => MS,
        (true, false) => MI,
        (false, true) => CS,
        (false, false) => CI,
    })
}
