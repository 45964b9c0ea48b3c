//! Pricing output shared by the vanilla and barrier engines.

use serde::Serialize;

/// Early exercise premiums below this fraction of the strike are reported as
/// negligible, with the European price as best estimate.
pub const NEGLIGIBLE_PREMIUM: f64 = 1e-4;

/// Status flags of one price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PriceFlags {
    /// The spot is on the dead side of a barrier; the price is the rebate.
    pub knocked_out: bool,
    /// The premium is below `NEGLIGIBLE_PREMIUM * K` (or vanishes identically).
    pub premium_negligible: bool,
    /// The spot lies in the exercise region of the highest order.
    pub exercised: bool,
    /// Some order's boundary equation had no root at the pricing maturity and
    /// its closest approach was used instead.
    pub tangent_boundary: bool,
}

/// Price of one contract with its order-by-order breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceReport {
    /// Price of the highest requested order.
    pub price: f64,
    /// Matching European price.
    pub european: f64,
    /// Change of the price contributed by each order, starting from the
    /// European price, so that `european + sum = price`.
    pub premium_by_order: Vec<f64>,
    /// Exercise boundary of each order at the pricing maturity, in currency.
    pub boundary_by_order: Vec<f64>,
    /// Boundary of the highest order, if there is one.
    pub boundary: Option<f64>,
    /// `price`, or the European price when the premium is negligible.
    pub best_estimate: f64,
    pub flags: PriceFlags,
    /// Wall-clock time of the solve in seconds.
    pub wall_time_s: f64,
    /// Function evaluations spent on boundary searches.
    pub iterations: usize,
}

impl PriceReport {
    /// Report for a contract without any early exercise value: every order
    /// returns `value`.
    pub fn flat(value: f64, european: f64, max_order: usize) -> Self {
        let mut premium_by_order = vec![0.0; max_order + 1];
        premium_by_order[0] = value - european;
        Self {
            price: value,
            european,
            premium_by_order,
            boundary_by_order: Vec::new(),
            boundary: None,
            best_estimate: value,
            flags: PriceFlags::default(),
            wall_time_s: 0.0,
            iterations: 0,
        }
    }

    /// Report from the prices of orders `0..=N`.
    pub fn from_orders(european: f64, prices: &[f64], boundaries: Vec<f64>, strike: f64) -> Self {
        let mut prev = european;
        let premium_by_order = prices
            .iter()
            .map(|&p| {
                let d = p - prev;
                prev = p;
                d
            })
            .collect();
        let price = *prices.last().unwrap_or(&european);
        let negligible = price - european < NEGLIGIBLE_PREMIUM * strike;
        Self {
            price,
            european,
            premium_by_order,
            boundary: boundaries.last().copied(),
            boundary_by_order: boundaries,
            best_estimate: if negligible { european } else { price },
            flags: PriceFlags {
                premium_negligible: negligible,
                ..PriceFlags::default()
            },
            wall_time_s: 0.0,
            iterations: 0,
        }
    }

    /// Cumulative prices of orders `0..=N`.
    pub fn prices_by_order(&self) -> Vec<f64> {
        let mut acc = self.european;
        self.premium_by_order
            .iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect()
    }

    /// Price of order `k`, if it was computed.
    pub fn price_at_order(&self, k: usize) -> Option<f64> {
        self.prices_by_order().get(k).copied()
    }
}
