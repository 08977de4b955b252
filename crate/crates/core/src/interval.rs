use serde::{Deserialize, Serialize};

/// Lower/upper pair for a partially identified scalar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub up: f64,
}

impl Interval {
    pub const fn new(lo: f64, up: f64) -> Self {
        Interval { lo, up }
    }

    pub const fn point(x: f64) -> Self {
        Interval { lo: x, up: x }
    }

    pub fn width(&self) -> f64 {
        self.up - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.up)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.lo.is_finite() && self.up.is_finite() && self.lo <= self.up + tol
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.up + tol
    }

    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        self.lo - tol <= other.lo && other.up <= self.up + tol
    }

    pub fn covers_zero(&self) -> bool {
        self.lo <= 0.0 && self.up >= 0.0
    }

    /// Clamp both endpoints into `[min, max]`. Clamping is monotone, so a valid
    /// interval stays valid.
    pub fn clip(self, min: f64, max: f64) -> Self {
        Interval { lo: self.lo.clamp(min, max), up: self.up.clamp(min, max) }
    }

    pub fn clip_prob(self) -> Self {
        self.clip(0.0, 1.0)
    }

    pub fn clip_effect(self) -> Self {
        self.clip(-1.0, 1.0)
    }

    /// Distance the endpoints would move under clipping to `[min, max]`.
    pub fn clip_excess(&self, min: f64, max: f64) -> f64 {
        let c = self.clip(min, max);
        (c.lo - self.lo).abs().max((c.up - self.up).abs())
    }

    /// Interval of `x - y` for `x` in `self` and `y` in `other`.
    pub fn minus(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo - other.up, up: self.up - other.lo }
    }

    pub fn max_abs_diff(&self, other: &Interval) -> f64 {
        (self.lo - other.lo).abs().max((self.up - other.up).abs())
    }

    pub fn status(&self, tau: f64) -> IdentificationStatus {
        IdentificationStatus::of(*self, tau)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Identification {
    IdentifiedTreat,
    IdentifiedControl,
    Ambiguous,
}

impl Identification {
    pub fn is_identified(self) -> bool {
        self != Identification::Ambiguous
    }

    pub fn from_action(a: u8) -> Self {
        if a == 1 {
            Identification::IdentifiedTreat
        } else {
            Identification::IdentifiedControl
        }
    }

    /// Identified action, if any.
    pub fn action(self) -> Option<u8> {
        match self {
            Identification::IdentifiedTreat => Some(1),
            Identification::IdentifiedControl => Some(0),
            Identification::Ambiguous => None,
        }
    }
}

/// Sign classification of an effect interval with the interval as evidence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentificationStatus {
    pub kind: Identification,
    pub evidence: Interval,
}

impl IdentificationStatus {
    pub fn of(evidence: Interval, tau: f64) -> Self {
        let kind = if evidence.lo > tau {
            Identification::IdentifiedTreat
        } else if evidence.up < -tau {
            Identification::IdentifiedControl
        } else {
            Identification::Ambiguous
        };
        IdentificationStatus { kind, evidence }
    }

    pub fn is_identified(&self) -> bool {
        self.kind.is_identified()
    }
}
