//! Normalised description of a knock-out contract for the premium solver.

use jumpwave_european::{BarrierDirection, BarrierSpec, OptionSpec, RebateRule, Side};
use jumpwave_vanilla::boundary::BracketScan;
use jumpwave_vanilla::PerturbationError;
use serde::Serialize;

/// Candidate boundaries of down-and-out calls stay below `50 K`.
const CALL_UPPER_LIMIT: f64 = 50.0;
/// Candidate boundaries of up-and-out puts stay above `1e-6 K`.
const PUT_LOWER_LIMIT: f64 = 1e-6;
/// Distance kept from the strike when the barrier is out of the money.
const STRIKE_MARGIN: f64 = 1e-9;
/// Distance kept from an in-the-money barrier. With the intrinsic value paid
/// at the hit, `b = L` solves the boundary equations trivially for every
/// order, so the search must not start on it.
const REVERSE_MARGIN: f64 = 1e-4;

/// A down-and-out call or up-and-out put expressed for a unit strike.
///
/// Both contracts share one algebraic template. The premium is a combination
/// of the `rho+` and `rho-` power families, vanishes at the barrier and meets
/// the payoff smoothly at the exercise boundary. Only the payoff sign, the
/// side of the knock-out region and the search window for the boundary
/// differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierProblem {
    pub side: Side,
    pub direction: BarrierDirection,
    /// Strike in currency; all other levels are divided by it.
    pub strike: f64,
    /// Barrier level for a unit strike.
    pub level: f64,
    pub rebate_rule: RebateRule,
    /// In-the-money barrier (`L > K` for calls, `L < K` for puts).
    pub reverse: bool,
}

impl BarrierProblem {
    /// Builds the problem for a down-and-out call or an up-and-out put.
    pub fn new(spec: &OptionSpec, barrier: &BarrierSpec) -> Result<Self, PerturbationError> {
        match (spec.side, barrier.direction) {
            (Side::Call, BarrierDirection::DownAndOut) => doc_problem(spec, barrier),
            (Side::Put, BarrierDirection::UpAndOut) => uop_transform(spec, barrier),
            _ => Err(PerturbationError::InvalidInput(
                "early exercise is supported for down-and-out calls and up-and-out puts only"
                    .into(),
            )),
        }
    }

    /// Sign of the payoff, `+1` for calls and `-1` for puts.
    pub fn sign(&self) -> f64 {
        self.side.sign()
    }

    /// Contract for a unit strike at maturity `t`.
    pub fn unit_spec(&self, t: f64) -> Result<OptionSpec, PerturbationError> {
        Ok(OptionSpec::new(self.side, 1.0, t)?)
    }

    /// Barrier for a unit strike.
    pub fn unit_barrier(&self) -> BarrierSpec {
        BarrierSpec {
            level: self.level,
            direction: self.direction,
            rebate: self.rebate_rule,
        }
    }

    /// Rebate paid at the hit for a unit strike.
    pub fn unit_rebate(&self) -> f64 {
        match self.rebate_rule {
            RebateRule::Zero => 0.0,
            RebateRule::IntrinsicAtBarrier => self.side.intrinsic(self.level, 1.0),
        }
    }

    /// True when the unit-strike spot `x` is on the knocked-out side.
    pub fn knocked_out(&self, x: f64) -> bool {
        self.unit_barrier().is_knocked_out(x)
    }

    /// True when the unit-strike spot `x` is in the exercise region of a
    /// boundary `b`.
    pub fn exercised(&self, x: f64, b: f64) -> bool {
        match self.side {
            Side::Call => x >= b,
            Side::Put => x <= b,
        }
    }

    /// Window and start of the boundary search.
    ///
    /// Calls search above `max(1, L)`, puts below `min(1, L)`. Without a
    /// previous boundary the search starts at the edge next to the strike or
    /// barrier.
    pub fn scan(&self, start: Option<f64>, xtol: f64) -> BracketScan {
        let margin = if self.reverse {
            REVERSE_MARGIN
        } else {
            STRIKE_MARGIN
        };
        let (lower, upper) = match self.side {
            Side::Call => (self.level.max(1.0) * (1.0 + margin), CALL_UPPER_LIMIT),
            Side::Put => (PUT_LOWER_LIMIT, self.level.min(1.0) * (1.0 - margin)),
        };
        let edge = match self.side {
            Side::Call => lower,
            Side::Put => upper,
        };
        BracketScan::new(start.unwrap_or(edge), lower, upper, xtol)
    }
}

fn checked(spec: &OptionSpec, barrier: &BarrierSpec) -> Result<(), PerturbationError> {
    spec.validate()?;
    barrier.validate(spec)?;
    Ok(())
}

/// Down-and-out call: knock-out below `L`, exercise above the boundary.
fn doc_problem(
    spec: &OptionSpec,
    barrier: &BarrierSpec,
) -> Result<BarrierProblem, PerturbationError> {
    checked(spec, barrier)?;
    Ok(BarrierProblem {
        side: Side::Call,
        direction: BarrierDirection::DownAndOut,
        strike: spec.strike,
        level: barrier.level / spec.strike,
        rebate_rule: barrier.rebate,
        reverse: barrier.is_reverse(spec),
    })
}

/// Maps an up-and-out put onto the down-and-out template.
///
/// The roles are mirrored: the knock-out region is `x >= L`, the exercise
/// region `x <= b` lies below `min(K, L)`, the payoff sign is negative, and
/// the barrier condition is imposed at the upper end of the continuation
/// region. The two power families enter exactly as for the call, so the
/// coefficient systems and the barrier condition are shared.
pub fn uop_transform(
    spec: &OptionSpec,
    barrier: &BarrierSpec,
) -> Result<BarrierProblem, PerturbationError> {
    if spec.side != Side::Put || barrier.direction != BarrierDirection::UpAndOut {
        return Err(PerturbationError::InvalidInput(
            "the up-and-out mapping applies to up-and-out puts".into(),
        ));
    }
    checked(spec, barrier)?;
    Ok(BarrierProblem {
        side: Side::Put,
        direction: BarrierDirection::UpAndOut,
        strike: spec.strike,
        level: barrier.level / spec.strike,
        rebate_rule: barrier.rebate,
        reverse: barrier.is_reverse(spec),
    })
}
