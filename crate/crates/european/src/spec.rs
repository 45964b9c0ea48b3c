use serde::{Deserialize, Serialize};

use crate::EuropeanError;

/// Call or put.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Call,
    Put,
}

impl Side {
    /// `+1` for calls, `-1` for puts.
    pub fn sign(self) -> f64 {
        match self {
            Side::Call => 1.0,
            Side::Put => -1.0,
        }
    }

    /// Immediate exercise value at spot `s` for strike `k`.
    pub fn intrinsic(self, s: f64, k: f64) -> f64 {
        (self.sign() * (s - k)).max(0.0)
    }
}

/// Vanilla contract terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub side: Side,
    /// Strike, strictly positive.
    pub strike: f64,
    /// Terminal maturity in years, strictly positive.
    pub maturity: f64,
}

impl OptionSpec {
    pub fn new(side: Side, strike: f64, maturity: f64) -> Result<Self, EuropeanError> {
        let spec = Self {
            side,
            strike,
            maturity,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EuropeanError> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(EuropeanError::InvalidInput {
                name: "strike",
                value: self.strike,
                reason: "must be positive",
            });
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(EuropeanError::InvalidInput {
                name: "maturity",
                value: self.maturity,
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

/// Side of the spot on which the barrier sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierDirection {
    /// Knocked out once the spot falls to the barrier.
    DownAndOut,
    /// Knocked out once the spot rises to the barrier.
    UpAndOut,
}

/// Payment made at the moment the barrier is hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RebateRule {
    /// Nothing is paid.
    #[default]
    Zero,
    /// The intrinsic value at the barrier, `(K - L)+` for puts and `(L - K)+`
    /// for calls, paid immediately.
    IntrinsicAtBarrier,
}

/// Single knock-out barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    /// Barrier level, strictly positive.
    pub level: f64,
    pub direction: BarrierDirection,
    #[serde(default)]
    pub rebate: RebateRule,
}

impl BarrierSpec {
    /// Rebate amount paid at the hit for the given contract.
    pub fn rebate_amount(&self, spec: &OptionSpec) -> f64 {
        match self.rebate {
            RebateRule::Zero => 0.0,
            RebateRule::IntrinsicAtBarrier => spec.side.intrinsic(self.level, spec.strike),
        }
    }

    /// True when the spot is on the knocked-out side (the barrier itself included).
    pub fn is_knocked_out(&self, spot: f64) -> bool {
        match self.direction {
            BarrierDirection::DownAndOut => spot <= self.level,
            BarrierDirection::UpAndOut => spot >= self.level,
        }
    }

    /// True for in-the-money barriers: a down-and-out call with `L > K` or an
    /// up-and-out put with `L < K`.
    pub fn is_reverse(&self, spec: &OptionSpec) -> bool {
        match (spec.side, self.direction) {
            (Side::Call, BarrierDirection::DownAndOut) => self.level > spec.strike,
            (Side::Put, BarrierDirection::UpAndOut) => self.level < spec.strike,
            _ => false,
        }
    }

    /// Validates the level and, for down-and-out calls and up-and-out puts, the
    /// rule that reverse contracts pay the intrinsic value at the barrier.
    pub fn validate(&self, spec: &OptionSpec) -> Result<(), EuropeanError> {
        if !(self.level > 0.0 && self.level.is_finite()) {
            return Err(EuropeanError::InvalidInput {
                name: "barrier",
                value: self.level,
                reason: "must be positive",
            });
        }
        if self.is_reverse(spec) && self.rebate != RebateRule::IntrinsicAtBarrier {
            return Err(EuropeanError::InvalidBarrier(
                "an in-the-money knock-out barrier must pay the intrinsic value at the hit",
            ));
        }
        Ok(())
    }
}
