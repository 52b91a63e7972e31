//! One-dimensional maximization over the round duration `t`.
//!
//! The objectives (`F/t` for a probe or a bound) are smooth and unimodal
//! around their optimum but can be flat or oscillating far from it, so the
//! search brackets on a logarithmic grid first and refines with golden
//! section in `ln t`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Maximum {
    pub t: f64,
    pub value: f64,
}

const GRID_PER_DECADE: usize = 8;
const DECADES_BELOW: f64 = 7.0;
const MAX_EXPANSIONS: usize = 4;

/// Default upper end of the initial search interval.
pub(crate) fn default_t_max(gamma: f64, omega: f64) -> f64 {
    5.0 / (gamma + omega.abs() * 1e-3).max(1e-12)
}

/// Golden-section maximization of `f(e^u)` on `[lo, hi]` in `u = ln t`.
fn golden<F>(f: &mut F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1.exp())?;
    let mut f2 = f(x2.exp())?;
    while hi - lo > rel_tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1.exp())?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2.exp())?;
        }
    }
    Ok(if f1 >= f2 { Maximum { t: x1.exp(), value: f1 } } else { Maximum { t: x2.exp(), value: f2 } })
}

/// Walks geometrically from `hint` until the middle of three points is the largest.
fn bracket_from_hint<F>(f: &mut F, hint: f64, t_lo: f64) -> Result<Option<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let step = 1.5f64.ln();
    let mut mid = hint.ln();
    let (mut f_left, mut f_mid, mut f_right) =
        (f((mid - step).exp())?, f(mid.exp())?, f((mid + step).exp())?);
    for _ in 0..24 {
        if f_mid >= f_left && f_mid >= f_right {
            return Ok(Some((mid - step, mid + step)));
        }
        if f_left > f_right {
            mid -= step;
            if (mid - step).exp() < t_lo {
                return Ok(None);
            }
            f_right = f_mid;
            f_mid = f_left;
            f_left = f((mid - step).exp())?;
        } else {
            mid += step;
            f_left = f_mid;
            f_mid = f_right;
            f_right = f((mid + step).exp())?;
        }
    }
    Ok(None)
}

/// Maximizes `f(t)` over `t > 0`.
///
/// `t_max` sets the initial search range `[t_max · 1e-7, t_max]`; the upper
/// end is expanded geometrically a few times before giving up with
/// [`Error::NoInteriorMaximum`]. A `hint` (e.g. the optimum for a nearby
/// probe size) replaces the grid scan by a local bracket walk.
pub(crate) fn maximize_over_t<F>(
    mut f: F,
    t_max: f64,
    hint: Option<f64>,
    rel_tol: f64,
) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let t_lo = t_max * 10f64.powf(-DECADES_BELOW);
    if let Some(h) = hint.filter(|h| h.is_finite() && *h > 0.0) {
        if let Some((lo, hi)) = bracket_from_hint(&mut f, h, t_lo)? {
            return golden(&mut f, lo, hi, rel_tol);
        }
    }

    let n = (DECADES_BELOW as usize) * GRID_PER_DECADE + 1;
    let du = 10f64.ln() / GRID_PER_DECADE as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| t_lo.ln() + i as f64 * du).collect();
    // Points where `f` fails (e.g. an ill-conditioned bound at tiny `t`) drop out of the scan.
    let mut first_err = None;
    let mut values: Vec<f64> = grid
        .iter()
        .map(|&u| {
            f(u.exp()).unwrap_or_else(|e| {
                first_err.get_or_insert(e);
                f64::NEG_INFINITY
            })
        })
        .collect();
    if values.iter().all(|v| *v == f64::NEG_INFINITY) {
        return Err(first_err.expect("grid is non-empty"));
    }

    let mut expansions = 0;
    loop {
        let best = argmax(&values);
        if best == 0 || values[best - 1] == f64::NEG_INFINITY {
            return Err(Error::NoInteriorMaximum { t_lo: grid[0].exp(), t_hi: grid[grid.len() - 1].exp() });
        }
        if best + 1 < grid.len() {
            return golden(&mut f, grid[best - 1], grid[best + 1], rel_tol);
        }
        if expansions == MAX_EXPANSIONS {
            return Err(Error::NoInteriorMaximum { t_lo: grid[0].exp(), t_hi: grid[grid.len() - 1].exp() });
        }
        expansions += 1;
        for _ in 0..GRID_PER_DECADE {
            let u = grid[grid.len() - 1] + du;
            grid.push(u);
            values.push(f(u.exp())?);
        }
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_known_maximum() {
        // t e^{-2t} peaks at t = 1/2.
        let m = maximize_over_t(|t| Ok(t * (-2.0 * t).exp()), 5.0, None, 1e-10).unwrap();
        assert!((m.t - 0.5).abs() < 1e-8);
        let warm = maximize_over_t(|t| Ok(t * (-2.0 * t).exp()), 5.0, Some(0.05), 1e-10).unwrap();
        assert!((warm.t - 0.5).abs() < 1e-8);
    }

    #[test]
    fn expands_past_initial_range() {
        let m = maximize_over_t(|t| Ok(t * (-t / 30.0).exp()), 5.0, None, 1e-10).unwrap();
        assert!((m.t - 30.0).abs() < 1e-6);
    }

    #[test]
    fn failing_points_are_skipped() {
        let f = |t: f64| if t < 1e-3 { Err(Error::SdpInfeasible) } else { Ok(t * (-2.0 * t).exp()) };
        let m = maximize_over_t(f, 5.0, None, 1e-10).unwrap();
        assert!((m.t - 0.5).abs() < 1e-8);
        let err = maximize_over_t(|t| if t < 1e-3 { Err(Error::SdpInfeasible) } else { Ok(-t) }, 5.0, None, 1e-8);
        assert!(matches!(err, Err(Error::NoInteriorMaximum { .. })));
        let err = maximize_over_t(|_| Err::<f64, _>(Error::SdpInfeasible), 5.0, None, 1e-8);
        assert!(matches!(err, Err(Error::SdpInfeasible)));
    }

    #[test]
    fn monotone_objective_has_no_interior_maximum() {
        let err = maximize_over_t(|t| Ok(t), 1.0, None, 1e-8).unwrap_err();
        assert!(matches!(err, Error::NoInteriorMaximum { .. }));
        let err = maximize_over_t(|t| Ok(-t), 1.0, None, 1e-8).unwrap_err();
        assert!(matches!(err, Error::NoInteriorMaximum { .. }));
    }
}
