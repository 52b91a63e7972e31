//! Parameter sweeps over the probe size `N`.
//!
//! A sweep evaluates every requested method at every `N` of a log-spaced grid
//! and returns one [`SweepRecord`] per `(N, method)`, ordered `N`-major. Work
//! runs on the rayon pool; the `N` grid is cut into fixed-size chains that warm
//! start the `t` search from the previous `N`, so the output does not depend on
//! the number of threads.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    asymptote_intermediate, asymptote_transversal, ce_precision_with_hint, cs_factor, scaling_fit_with_error,
    sql_parallel, Axis, BoundResult, CeMode, CeProblem, ScalingFit,
};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::ghz::{ghz_precision_at, ghz_precision_with_hint, PrecisionResult};

/// Consecutive grid points sharing one warm-started `t` search.
const CHAIN_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepMethod {
    Ghz,
    CeFinite,
    CeAsymptotic,
    Sql,
    Cs,
    Asymptote,
}

impl SweepMethod {
    pub const ALL: [SweepMethod; 6] = [
        SweepMethod::Ghz,
        SweepMethod::CeFinite,
        SweepMethod::CeAsymptotic,
        SweepMethod::Sql,
        SweepMethod::Cs,
        SweepMethod::Asymptote,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SweepMethod::Ghz => "GHZ",
            SweepMethod::CeFinite => "CE_FINITE",
            SweepMethod::CeAsymptotic => "CE_ASYMPTOTIC",
            SweepMethod::Sql => "SQL",
            SweepMethod::Cs => "CS",
            SweepMethod::Asymptote => "ASYMPTOTE",
        }
    }
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SweepMethod {
    type Err = Error;

    /// Case-insensitive; `-` and `_` are interchangeable.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        SweepMethod::ALL
            .into_iter()
            .find(|m| m.tag() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// How the round duration `t` is chosen at each `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TMode {
    Optimize,
    Fixed(f64),
    /// The `t` that optimizes the single-qubit (`N = 1`) finite-`N` CE bound, used for every `N`.
    FixedSingleQubitOpt,
    /// Optimize, but never below `t_min`.
    Floor(f64),
}

/// Log-spaced integer grid `min..=max` with `count` points before deduplication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NGrid {
    pub min: usize,
    pub max: usize,
    pub count: usize,
}

impl NGrid {
    pub fn new(min: usize, max: usize, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter("N grid is empty".into()));
        }
        if self.min == 0 || self.max < self.min {
            return Err(Error::InvalidParameter(format!("need 1 ≤ n_min ≤ n_max, got {}..{}", self.min, self.max)));
        }
        if self.count > 1 && self.max == self.min {
            return Err(Error::InvalidParameter("several points requested on a single-valued grid".into()));
        }
        Ok(())
    }

    /// Grid values, rounded to integers; duplicates from rounding are dropped.
    pub fn values(&self) -> Result<Vec<usize>> {
        self.validate()?;
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let (lo, hi) = ((self.min as f64).ln(), (self.max as f64).ln());
        let step = (hi - lo) / (self.count - 1) as f64;
        let mut out: Vec<usize> = (0..self.count).map(|i| (lo + i as f64 * step).exp().round() as usize).collect();
        out[0] = self.min;
        out[self.count - 1] = self.max;
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub omega: f64,
    pub gamma: f64,
    pub alphas: [f64; 3],
    pub grid: NGrid,
    pub methods: Vec<SweepMethod>,
    pub t_mode: TMode,
}

impl SweepSpec {
    /// Mostly transversal noise `α_x = 1 - ε`, `α_z = ε`.
    pub fn tilted(gamma: f64, epsilon: f64, omega: f64, grid: NGrid, methods: Vec<SweepMethod>) -> Self {
        Self { omega, gamma, alphas: [1.0 - epsilon, 0.0, epsilon], grid, methods, t_mode: TMode::Optimize }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods requested".into()));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        ChannelParams::new(self.omega, self.gamma, self.alphas, 0.0)?;
        match self.t_mode {
            TMode::Fixed(t) | TMode::Floor(t) if !(t.is_finite() && t > 0.0) => {
                Err(Error::InvalidParameter(format!("t must be positive, got {t}")))
            }
            _ => Ok(()),
        }
    }

    fn params(&self, t: f64) -> Result<ChannelParams> {
        ChannelParams::new(self.omega, self.gamma, self.alphas, t)
    }
}

/// One `(N, method)` evaluation. Failed evaluations carry `error` and no values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub method: SweepMethod,
    /// Round duration used; absent for `t → 0` limits.
    pub t: Option<f64>,
    pub qfi_per_time: Option<f64>,
    /// Precision `δω √T`: achieved for GHZ, a lower bound for the bound methods.
    pub precision: Option<f64>,
    /// Seconds spent on this record.
    pub wall_time: f64,
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Copy)]
struct Value {
    t: Option<f64>,
    qfi_per_time: f64,
    precision: f64,
}

impl From<PrecisionResult> for Value {
    fn from(r: PrecisionResult) -> Self {
        Self { t: Some(r.t_opt), qfi_per_time: r.qfi_per_time, precision: r.precision }
    }
}

impl From<BoundResult> for Value {
    fn from(r: BoundResult) -> Self {
        Self { t: r.t_opt, qfi_per_time: r.qfi_upper, precision: r.precision_bound }
    }
}

/// State shared by every record of a sweep.
struct Context<'a> {
    spec: &'a SweepSpec,
    /// Fixed round duration, when the mode prescribes one.
    fixed_t: Option<std::result::Result<f64, String>>,
    /// Kraus data at the fixed `t`, reused across `N`.
    ce: Option<std::result::Result<CeProblem, String>>,
}

impl<'a> Context<'a> {
    fn new(spec: &'a SweepSpec) -> Self {
        let fixed_t = match spec.t_mode {
            TMode::Fixed(t) => Some(Ok(t)),
            TMode::FixedSingleQubitOpt => Some(
                ce_precision_with_hint(1, spec.omega, spec.gamma, spec.alphas, CeMode::FiniteN, None)
                    .and_then(|r| r.t_opt.ok_or_else(|| Error::DomainError("no optimal t".into())))
                    .map_err(|e| e.to_string()),
            ),
            TMode::Optimize | TMode::Floor(_) => None,
        };
        let needs_ce = spec.methods.iter().any(|m| matches!(m, SweepMethod::CeFinite | SweepMethod::CeAsymptotic));
        let ce = match &fixed_t {
            Some(Ok(t)) if needs_ce => {
                Some(spec.params(*t).and_then(|p| CeProblem::new(&p)).map_err(|e| e.to_string()))
            }
            Some(Err(e)) => Some(Err(e.clone())),
            _ => None,
        };
        Self { spec, fixed_t, ce }
    }

    fn fixed_t(&self) -> Result<Option<f64>> {
        match &self.fixed_t {
            None => Ok(None),
            Some(Ok(t)) => Ok(Some(*t)),
            Some(Err(e)) => Err(Error::DomainError(format!("single-qubit optimum unavailable: {e}"))),
        }
    }

    fn ce_fixed(&self, n: usize, mode: CeMode, t: f64) -> Result<Value> {
        let problem = match &self.ce {
            Some(Ok(p)) => p,
            Some(Err(e)) => return Err(Error::DomainError(e.clone())),
            None => unreachable!("CE data is prepared for fixed-t modes"),
        };
        let bound = problem.solve(n, mode)?.bound;
        Ok(Value { t: Some(t), qfi_per_time: bound / t, precision: (bound / t).powf(-0.5) })
    }

    /// Evaluates one record; `hint` carries the previous optimal `t` of the same method.
    fn evaluate(&self, n: usize, method: SweepMethod, hint: Option<f64>) -> Result<Value> {
        let s = self.spec;
        let fixed = self.fixed_t()?;
        match method {
            SweepMethod::Ghz => match fixed {
                Some(t) => Ok(ghz_precision_at(n, &s.params(t)?)?.into()),
                None => {
                    let best: Value = ghz_precision_with_hint(n, s.omega, s.gamma, s.alphas, hint)?.into();
                    self.floor(best, |t| Ok(ghz_precision_at(n, &s.params(t)?)?.into()))
                }
            },
            SweepMethod::CeFinite | SweepMethod::CeAsymptotic => {
                let mode = if method == SweepMethod::CeFinite { CeMode::FiniteN } else { CeMode::Asymptotic };
                match fixed {
                    Some(t) => self.ce_fixed(n, mode, t),
                    None => {
                        let best: Value = ce_precision_with_hint(n, s.omega, s.gamma, s.alphas, mode, hint)?.into();
                        self.floor(best, |t| {
                            let bound = CeProblem::new(&s.params(t)?)?.solve(n, mode)?.bound;
                            Ok(Value { t: Some(t), qfi_per_time: bound / t, precision: (bound / t).powf(-0.5) })
                        })
                    }
                }
            }
            SweepMethod::Sql => {
                let rate = s.gamma * s.alphas[2];
                if rate <= 0.0 {
                    return Err(Error::DomainError("SQL reference needs a parallel noise component".into()));
                }
                Ok(sql_parallel(n, rate)?.into())
            }
            SweepMethod::Cs => {
                let axis = match s.alphas {
                    [_, 0.0, 0.0] => Axis::Transversal,
                    [0.0, 0.0, _] => Axis::Parallel,
                    _ => return Err(Error::DomainError("CS factors are defined for pure x or z noise".into())),
                };
                let t = match (fixed, s.t_mode) {
                    (Some(t), _) => t,
                    // The CS bound improves monotonically as t → 0.
                    (None, TMode::Floor(t_min)) => t_min,
                    (None, _) => 0.0,
                };
                let mut v: Value = cs_factor(axis, s.gamma, s.omega, t)?.precision(n)?.into();
                if t == 0.0 {
                    v.t = None;
                }
                Ok(v)
            }
            SweepMethod::Asymptote => match s.alphas {
                [_, 0.0, 0.0] => Ok(asymptote_transversal(n, s.gamma, s.omega)?.into()),
                [_, _, eps] if eps > 0.0 => Ok(asymptote_intermediate(n, s.gamma, eps)?.into()),
                _ => Err(Error::DomainError("no closed-form asymptote for this noise".into())),
            },
        }
    }

    /// Re-evaluates at `t_min` when the optimum falls below the floor.
    fn floor(&self, best: Value, at: impl Fn(f64) -> Result<Value>) -> Result<Value> {
        match (self.spec.t_mode, best.t) {
            (TMode::Floor(t_min), Some(t)) if t < t_min => at(t_min),
            _ => Ok(best),
        }
    }
}

/// Runs the sweep. Per-record failures are reported in the records; only an
/// invalid spec is an error.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let ns = spec.grid.values()?;
    let ctx = Context::new(spec);
    let chains: Vec<(SweepMethod, &[usize])> =
        spec.methods.iter().flat_map(|&m| ns.chunks(CHAIN_LEN).map(move |c| (m, c))).collect();
    let mut records: Vec<SweepRecord> = chains
        .par_iter()
        .flat_map_iter(|&(method, chunk)| {
            let mut hint = None;
            chunk
                .iter()
                .map(|&n| {
                    let start = Instant::now();
                    let value = ctx.evaluate(n, method, hint);
                    let wall_time = start.elapsed().as_secs_f64();
                    match value {
                        Ok(v) => {
                            hint = v.t;
                            SweepRecord {
                                n,
                                method,
                                t: v.t,
                                qfi_per_time: Some(v.qfi_per_time),
                                precision: Some(v.precision),
                                wall_time,
                                error: None,
                            }
                        }
                        Err(e) => SweepRecord {
                            n,
                            method,
                            t: None,
                            qfi_per_time: None,
                            precision: None,
                            wall_time,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let order = |m: SweepMethod| spec.methods.iter().position(|&x| x == m).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (r.n, order(r.method)));
    Ok(records)
}

/// Slope fit per method over records with `n_min ≤ N ≤ n_max`, in order of first appearance.
pub fn fit_records(records: &[SweepRecord], n_min: usize, n_max: usize) -> Vec<(SweepMethod, Result<ScalingFit>)> {
    let mut methods: Vec<SweepMethod> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    methods
        .into_iter()
        .map(|m| {
            let mut series: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| r.method == m && r.n >= n_min && r.n <= n_max)
                .filter_map(|r| r.precision.map(|p| (r.n as f64, p)))
                .collect();
            series.sort_by(|a, b| a.0.total_cmp(&b.0));
            (m, scaling_fit_with_error(&series))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        assert_eq!(NGrid::new(10, 1000, 3).values().unwrap(), vec![10, 100, 1000]);
        assert_eq!(NGrid::new(1, 3, 10).values().unwrap(), vec![1, 2, 3]);
        assert_eq!(NGrid::new(7, 7, 1).values().unwrap(), vec![7]);
        assert!(NGrid::new(10, 100, 0).values().is_err());
        assert!(NGrid::new(100, 10, 5).values().is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in SweepMethod::ALL {
            assert_eq!(m.tag().parse::<SweepMethod>().unwrap(), m);
        }
        assert_eq!("ce-finite".parse::<SweepMethod>().unwrap(), SweepMethod::CeFinite);
        assert!("nope".parse::<SweepMethod>().is_err());
    }

    #[test]
    fn failures_stay_in_records() {
        let spec = SweepSpec {
            omega: 1.0,
            gamma: 1.0,
            alphas: [1.0, 0.0, 0.0],
            grid: NGrid::new(10, 100, 2),
            methods: vec![SweepMethod::Sql, SweepMethod::Asymptote],
            t_mode: TMode::Optimize,
        };
        let records = run_sweep(&spec).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records.iter().filter(|r| r.method == SweepMethod::Sql).all(|r| !r.is_ok()));
        assert!(records.iter().filter(|r| r.method == SweepMethod::Asymptote).all(|r| r.is_ok()));
    }
}
