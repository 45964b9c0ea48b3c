//! Bracketed search for the early-exercise boundary.
//!
//! The boundary equations are smooth in the candidate boundary but may have
//! spurious roots far from the economically relevant one. The search walks
//! outwards from a start point (the previous order's boundary, or the strike)
//! in both directions with geometrically growing steps, stops at the first
//! sign change and polishes it with Brent's method.
//!
//! At short maturities without jumps the higher-order equations can lose
//! their root: two roots merge and disappear, leaving a residual that touches
//! but does not cross zero. [`closest_approach`] then locates the minimum of
//! the residual's magnitude, the continuation of the vanished double root.

use jumpwave_model::numerics::{brent, Root};

/// Relative size of the first step away from the start point.
pub const INITIAL_STEP: f64 = 5e-4;
/// Growth factor of the step between successive probes.
pub const STEP_GROWTH: f64 = 1.15;
/// Maximum number of probes per direction.
pub const MAX_PROBES: usize = 300;
const BRENT_MAX_ITER: usize = 200;

/// Search window and start point for one boundary solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketScan {
    /// Point where the search starts.
    pub start: f64,
    /// Exclusive lower limit for probes.
    pub lower: f64,
    /// Exclusive upper limit for probes.
    pub upper: f64,
    /// Absolute tolerance of the polished root.
    pub xtol: f64,
}

impl BracketScan {
    /// Scan over `(lower, upper)` starting from `start`, clamped into the window.
    pub fn new(start: f64, lower: f64, upper: f64, xtol: f64) -> Self {
        let start = start.clamp(lower, upper);
        Self {
            start,
            lower,
            upper,
            xtol,
        }
    }
}

/// Finds the root of `f` closest (in the scan order) to `scan.start`.
///
/// Probes are placed at `start (1 + e_k)` and `start (1 - e_k)` with
/// `e_k = INITIAL_STEP * STEP_GROWTH^k`, clamped to the window; a direction is
/// abandoned once it reaches its limit. Non-finite function values are
/// skipped. Returns `None` if no sign change is found.
pub fn find_boundary<F>(mut f: F, scan: &BracketScan) -> Option<Root>
where
    F: FnMut(f64) -> f64,
{
    let start = scan.start;
    let f0 = f(start);
    if f0 == 0.0 {
        return Some(Root {
            x: start,
            iterations: 0,
        });
    }
    let (mut up, mut f_up) = (start, f0);
    let (mut down, mut f_down) = (start, f0);
    let (mut up_open, mut down_open) = (start < scan.upper, start > scan.lower);
    let mut probes = 1;
    for k in 1..=MAX_PROBES {
        if !up_open && !down_open {
            break;
        }
        let e = INITIAL_STEP * STEP_GROWTH.powi(k as i32);
        if up_open {
            let x = (start * (1.0 + e)).min(scan.upper);
            up_open = x < scan.upper;
            let fx = f(x);
            probes += 1;
            if fx.is_finite() {
                if f_up.is_finite() && f_up * fx <= 0.0 {
                    return brent(&mut f, up, x, f_up, fx, scan.xtol, BRENT_MAX_ITER).map(|r| {
                        Root {
                            x: r.x,
                            iterations: r.iterations + probes,
                        }
                    });
                }
                up = x;
                f_up = fx;
            }
        }
        if down_open {
            let x = (start * (1.0 - e)).max(scan.lower);
            down_open = x > scan.lower;
            let fx = f(x);
            probes += 1;
            if fx.is_finite() {
                if f_down.is_finite() && f_down * fx <= 0.0 {
                    return brent(&mut f, x, down, fx, f_down, scan.xtol, BRENT_MAX_ITER).map(
                        |r| Root {
                            x: r.x,
                            iterations: r.iterations + probes,
                        },
                    );
                }
                down = x;
                f_down = fx;
            }
        }
    }
    None
}

/// Golden-section iterations for [`closest_approach`]; enough to shrink any
/// scan interval below `1e-13`.
const GOLDEN_MAX_ITER: usize = 200;

/// Locates the minimum of `|f|` nearest to `scan.start`.
///
/// Repeats the outward scan of [`find_boundary`] on `|f|`, stops in each
/// direction at the first probe where `|f|` grows again, and refines the
/// smaller of the two local minima by golden-section search between its
/// neighbouring probes. Returns `None` if `f` is nowhere finite.
pub fn closest_approach<F>(mut f: F, scan: &BracketScan) -> Option<Root>
where
    F: FnMut(f64) -> f64,
{
    let start = scan.start;
    let mut g = |x: f64| {
        let v = f(x).abs();
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let g0 = g(start);
    let mut probes = 1;
    // Best bracket `(left, centre, right, value)` found in each direction.
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for dir in [1.0, -1.0] {
        let (mut prev, mut centre, mut g_centre) = (start, start, g0);
        for k in 1..=MAX_PROBES {
            let e = INITIAL_STEP * STEP_GROWTH.powi(k as i32);
            let x = (start * (1.0 + dir * e)).clamp(scan.lower, scan.upper);
            let gx = g(x);
            probes += 1;
            if gx > g_centre || x == scan.lower || x == scan.upper {
                let (a, c) = if gx > g_centre {
                    (prev, x)
                } else {
                    (centre, x)
                };
                let (a, c) = if a < c { (a, c) } else { (c, a) };
                let (centre, value) = if gx > g_centre {
                    (centre, g_centre)
                } else {
                    (x, gx)
                };
                if best.map_or(true, |b| value < b.3) {
                    best = Some((a, centre, c, value));
                }
                break;
            }
            prev = centre;
            centre = x;
            g_centre = gx;
        }
    }
    let (mut a, _, mut c, value) = best?;
    if !value.is_finite() {
        return None;
    }
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = c - inv_phi * (c - a);
    let mut x2 = a + inv_phi * (c - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    let mut iterations = probes + 2;
    for _ in 0..GOLDEN_MAX_ITER {
        if c - a <= scan.xtol {
            break;
        }
        if g1 <= g2 {
            c = x2;
            x2 = x1;
            g2 = g1;
            x1 = c - inv_phi * (c - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + inv_phi * (c - a);
            g2 = g(x2);
        }
        iterations += 1;
    }
    let x = if g1 <= g2 { x1 } else { x2 };
    Some(Root { x, iterations })
}
