//! Forward integration of the full nonlinear model with a first-order
//! conservative upwind scheme and a ring buffer holding the delay history.
//!
//! The time step is chosen once at start-up as the largest value that both
//! satisfies the CFL bound `dt <= cfl * ds / max gamma` and divides the
//! maximum delay exactly, so the recruitment integral uses stored history
//! levels with no interpolation in time. The CFL bound is re-checked every
//! step against the running maximum of `gamma` (growth may speed up as the
//! population changes) and the step refuses rather than producing an
//! unstable update.
//!
//! A simulation state has a single owner and stepping is sequential;
//! independent simulations can run concurrently.
//!
//! Boundary handling: the recruitment integral is assigned directly as the
//! density at `s = 0`, which relies on the normalisation `gamma(0, P) = 1`
//! (config validation warns when it does not hold). Mass reaching `s = m`
//! leaves through the right boundary; the survivorship factor makes that
//! mass negligible for the rate sets in the shipped presets.

use crate::numerics::{cumulative_trapezoid, trapezoid, NumericsError, SizeGrid};
use crate::ratedsl::{Bindings, EvalError, Expr, Var};
use crate::rates::{Rate, RateError, RateSet};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("history initialiser failed at s={s}, delta={delta}: {source}")]
    HistoryEval {
        s: f64,
        delta: f64,
        source: EvalError,
    },
    #[error("history value at s={s}, delta={delta} is {value}; must be finite and non-negative")]
    BadHistoryValue { s: f64, delta: f64, value: f64 },
    #[error("history profile length {got} does not match the grid ({want})")]
    HistoryLengthMismatch { got: usize, want: usize },
    #[error(
        "CFL violation at t={t}: dt={dt}, ds={ds}, max gamma={gamma_max} exceeds the bound \
         cfl={cfl}"
    )]
    CflViolation {
        t: f64,
        dt: f64,
        ds: f64,
        gamma_max: f64,
        cfl: f64,
    },
    #[error("density went negative beyond rounding at t={t}, s={s}: {value}")]
    NegativeDensity { t: f64, s: f64, value: f64 },
    #[error("cfl must lie in (0, 1], got {0}")]
    BadCfl(f64),
    #[error("t_end must be positive, got {0}")]
    BadTEnd(f64),
    #[error("output stride must be at least 1")]
    BadStride,
    #[error("recruitment feedback weight {0} is not a contraction; refine the grid")]
    RecruitmentFeedback(f64),
    #[error("fit window [{lo}, {hi}] selects fewer than 3 records")]
    FitWindowTooSmall { lo: f64, hi: f64 },
    #[error("fit window contains residuals below 1e-13; fit unreliable")]
    FitWindowUnreliable,
}

/// How the history segment over `[-theta, 0]` is filled at start-up.
#[derive(Debug, Clone)]
pub enum HistoryInit {
    /// An expression in `s` and `delta` evaluated at every node of every
    /// stored level.
    Expr(Rate),
    /// A fixed profile (constant in `delta`), e.g. a computed equilibrium.
    Profile(Vec<f64>),
}

impl HistoryInit {
    pub fn from_expr(e: Expr) -> HistoryInit {
        HistoryInit::Expr(Rate::new(e))
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub rates: RateSet,
    pub grid: SizeGrid,
    pub t_end: f64,
    /// CFL number in `(0, 1]`.
    pub cfl: f64,
    pub history: HistoryInit,
    /// Steps per time-series record.
    pub stride: usize,
}

// one stored history level: density plus the cached prefix integral of w*p
#[derive(Debug, Clone)]
struct Level {
    density: Vec<f64>,
    wcum: Vec<f64>,
}

impl Level {
    fn hierarchy_at(&self, i: usize, alpha: f64) -> f64 {
        let total = *self.wcum.last().unwrap();
        alpha * self.wcum[i] + (total - self.wcum[i])
    }
}

/// Simulation state: current time plus the ring buffer of density profiles
/// covering `[t - theta, t]` at spacing `dt`.
#[derive(Debug, Clone)]
pub struct SimState {
    time: f64,
    dt: f64,
    levels: VecDeque<Level>,
    w_samples: Vec<f64>,
}

impl SimState {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// Density profile at the current time.
    pub fn current(&self) -> &[f64] {
        &self.levels.back().unwrap().density
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    /// Total population `P(t)`.
    pub p_total: f64,
    /// Boundary density `p(0, t)`.
    pub recruitment: f64,
    /// L1 distance of the profile to the reference profile.
    pub dist: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    pub records: Vec<Record>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub series: TimeSeries,
    /// Profiles captured at the requested snapshot times (requested time,
    /// actual time, samples).
    pub snapshots: Vec<(f64, f64, Vec<f64>)>,
}

fn validate_cfg(cfg: &SimConfig) -> Result<(), SimError> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(SimError::BadCfl(cfg.cfl));
    }
    if !(cfg.t_end > 0.0) {
        return Err(SimError::BadTEnd(cfg.t_end));
    }
    if cfg.stride == 0 {
        return Err(SimError::BadStride);
    }
    Ok(())
}

fn max_gamma(cfg: &SimConfig, p: f64) -> Result<f64, SimError> {
    let mut gm = 0.0f64;
    for &s in cfg.grid.nodes() {
        gm = gm.max(cfg.rates.gamma_at(s, p)?);
    }
    Ok(gm)
}

fn level_from_density(cfg: &SimConfig, density: Vec<f64>) -> Result<Level, SimError> {
    let wp: Vec<f64> = cfg
        .grid
        .nodes()
        .iter()
        .zip(&density)
        .map(|(&s, &p)| Ok(cfg.rates.w_at(s)? * p))
        .collect::<Result<_, RateError>>()?;
    let wcum = cumulative_trapezoid(&wp, cfg.grid.spacing())?;
    Ok(Level { density, wcum })
}

/// Fill the history buffer from the configured initialiser.
///
/// The buffer holds `round(theta/dt) + 1` levels at spacing `dt`, where `dt`
/// is the largest step that satisfies the CFL bound at the initial state and
/// divides `theta` exactly.
pub fn init_state(cfg: &SimConfig) -> Result<SimState, SimError> {
    validate_cfg(cfg)?;
    let n = cfg.grid.len();

    // initial total population, for the CFL gamma bound
    let p0_profile = history_profile(cfg, 0.0)?;
    let p0 = trapezoid(&p0_profile, cfg.grid.spacing())?;
    let gm = max_gamma(cfg, p0)?.max(f64::MIN_POSITIVE);
    let bound = cfg.cfl * cfg.grid.spacing() / gm;
    let k = (cfg.rates.theta / bound).ceil().max(1.0) as usize;
    let dt = cfg.rates.theta / k as f64;
    let n_levels = k + 1;

    let mut levels = VecDeque::with_capacity(n_levels);
    for j in 0..n_levels {
        let delta = crate::numerics::lerp_node(-cfg.rates.theta, 0.0, j, n_levels);
        let density = history_profile(cfg, delta)?;
        debug_assert_eq!(density.len(), n);
        levels.push_back(level_from_density(cfg, density)?);
    }
    let w_samples: Vec<f64> = cfg
        .grid
        .nodes()
        .iter()
        .map(|&s| cfg.rates.w_at(s))
        .collect::<Result<_, _>>()?;
    Ok(SimState {
        time: 0.0,
        dt,
        levels,
        w_samples,
    })
}

fn history_profile(cfg: &SimConfig, delta: f64) -> Result<Vec<f64>, SimError> {
    match &cfg.history {
        HistoryInit::Profile(p) => {
            if p.len() != cfg.grid.len() {
                return Err(SimError::HistoryLengthMismatch {
                    got: p.len(),
                    want: cfg.grid.len(),
                });
            }
            for (&s, &v) in cfg.grid.nodes().iter().zip(p) {
                if !v.is_finite() || v < 0.0 {
                    return Err(SimError::BadHistoryValue { s, delta, value: v });
                }
            }
            Ok(p.clone())
        }
        HistoryInit::Expr(rate) => cfg
            .grid
            .nodes()
            .iter()
            .map(|&s| {
                let b = Bindings::new().with(Var::Size, s).with(Var::Delta, delta);
                let v =
                    rate.eval(&b)
                        .map_err(|source| SimError::HistoryEval { s, delta, source })?;
                if !v.is_finite() || v < 0.0 {
                    return Err(SimError::BadHistoryValue { s, delta, value: v });
                }
                Ok(v)
            })
            .collect(),
    }
}

/// Recruitment integral over the stored history window: the double
/// trapezoid of `beta(s, tau, Q(s, t+tau)) p(s, t+tau)` with `Q` read off
/// the per-level cached prefix integrals.
pub fn recruitment(state: &SimState, cfg: &SimConfig) -> Result<f64, SimError> {
    let n_levels = state.levels.len();
    let mut per_level = Vec::with_capacity(n_levels);
    let mut integrand = vec![0.0; cfg.grid.len()];
    for (j, level) in state.levels.iter().enumerate() {
        let tau = crate::numerics::lerp_node(-cfg.rates.theta, 0.0, j, n_levels);
        for (i, &s) in cfg.grid.nodes().iter().enumerate() {
            let q = level.hierarchy_at(i, cfg.rates.alpha);
            integrand[i] = cfg.rates.beta_at(s, tau, q)? * level.density[i];
        }
        per_level.push(trapezoid(&integrand, cfg.grid.spacing())?);
    }
    Ok(trapezoid(&per_level, state.dt)?)
}

/// Advance one step: conservative upwind update of the interior, boundary
/// density from the recruitment integral over the updated window, buffer
/// rotation, cache update.
pub fn step(state: &mut SimState, cfg: &SimConfig) -> Result<(), SimError> {
    let n = cfg.grid.len();
    let h = cfg.grid.spacing();
    let dt = state.dt;
    let current = &state.levels.back().unwrap().density;
    let p_total = trapezoid(current, h)?;

    let mut gamma = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let mut gmax = 0.0f64;
    for &s in cfg.grid.nodes() {
        let g = cfg.rates.gamma_at(s, p_total)?;
        gmax = gmax.max(g);
        gamma.push(g);
        mu.push(cfg.rates.mu_at(s, p_total)?);
    }
    if dt * gmax > cfg.cfl * h * (1.0 + 1e-12) {
        return Err(SimError::CflViolation {
            t: state.time,
            dt,
            ds: h,
            gamma_max: gmax,
            cfl: cfg.cfl,
        });
    }

    let scale = current.iter().fold(1.0f64, |m, &v| m.max(v.abs()));
    let neg_tol = 1e-12 * scale;
    let mut next = vec![0.0; n];
    for i in 1..n {
        let flux_diff = gamma[i] * current[i] - gamma[i - 1] * current[i - 1];
        let mut v = current[i] - (dt / h) * flux_diff - dt * mu[i] * current[i];
        if v < 0.0 {
            if v < -neg_tol {
                return Err(SimError::NegativeDensity {
                    t: state.time + dt,
                    s: cfg.grid.nodes()[i],
                    value: v,
                });
            }
            v = 0.0;
        }
        next[i] = v;
    }

    state.levels.pop_front();
    state.levels.push_back(level_from_density(cfg, next)?);
    state.time += dt;

    // boundary value from the updated window; the newest level enters its
    // own recruitment integral through the (tau = 0, s = 0) corner, a linear
    // feedback solved exactly
    let base = recruitment(state, cfg)?;
    let newest = state.levels.back().unwrap();
    let q0 = newest.hierarchy_at(0, cfg.rates.alpha);
    let corner = 0.5 * dt * 0.5 * h * cfg.rates.beta_at(0.0, 0.0, q0)?;
    if corner >= 0.5 {
        return Err(SimError::RecruitmentFeedback(corner));
    }
    let boundary = base / (1.0 - corner);

    let newest = state.levels.back_mut().unwrap();
    newest.density[0] = boundary;
    let wp: Vec<f64> = state
        .w_samples
        .iter()
        .zip(&newest.density)
        .map(|(&w, &p)| w * p)
        .collect();
    newest.wcum = cumulative_trapezoid(&wp, h)?;
    Ok(())
}

/// Integrate to `t_end`, recording every `stride` steps (plus the initial
/// and final states) and capturing profiles at the requested times.
pub fn run(
    cfg: &SimConfig,
    reference: Option<&[f64]>,
    snapshot_times: &[f64],
) -> Result<RunResult, SimError> {
    let mut state = init_state(cfg)?;
    let h = cfg.grid.spacing();
    let zero_ref;
    let reference = match reference {
        Some(r) => r,
        None => {
            zero_ref = vec![0.0; cfg.grid.len()];
            &zero_ref
        }
    };

    let mut pending: Vec<f64> = snapshot_times.to_vec();
    pending.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut snapshots = Vec::new();

    let mut series = TimeSeries::default();
    let record = |state: &SimState, series: &mut TimeSeries| -> Result<(), SimError> {
        let profile = state.current();
        let p_total = trapezoid(profile, h)?;
        let diff: Vec<f64> = profile
            .iter()
            .zip(reference)
            .map(|(&a, &b)| (a - b).abs())
            .collect();
        let dist = trapezoid(&diff, h)?;
        series.records.push(Record {
            t: state.time(),
            p_total,
            recruitment: profile[0],
            dist,
        });
        Ok(())
    };

    record(&state, &mut series)?;
    take_snapshots(&mut pending, &mut snapshots, &state);

    let n_steps = (cfg.t_end / state.dt() - 1e-9).ceil().max(1.0) as usize;
    for step_index in 1..=n_steps {
        step(&mut state, cfg)?;
        take_snapshots(&mut pending, &mut snapshots, &state);
        if step_index % cfg.stride == 0 || step_index == n_steps {
            record(&state, &mut series)?;
        }
    }
    Ok(RunResult { series, snapshots })
}

fn take_snapshots(pending: &mut Vec<f64>, out: &mut Vec<(f64, f64, Vec<f64>)>, state: &SimState) {
    while let Some(&t_req) = pending.first() {
        if state.time() + 1e-12 >= t_req {
            out.push((t_req, state.time(), state.current().to_vec()));
            pending.remove(0);
        } else {
            break;
        }
    }
}

/// Least-squares slope of `log |P(t) - p_ref|` over `[window.0, window.1]`.
pub fn growth_rate_fit(
    series: &TimeSeries,
    p_ref: f64,
    window: (f64, f64),
) -> Result<f64, SimError> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = series
        .records
        .iter()
        .filter(|r| r.t >= lo && r.t <= hi)
        .map(|r| (r.t, (r.p_total - p_ref).abs()))
        .collect();
    if pts.len() < 3 {
        return Err(SimError::FitWindowTooSmall { lo, hi });
    }
    if pts.iter().any(|&(_, d)| d < 1e-13) {
        return Err(SimError::FitWindowUnreliable);
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for &(t, d) in &pts {
        cov += (t - mean_t) * (d.ln() - mean_y);
        var += (t - mean_t) * (t - mean_t);
    }
    Ok(cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratedsl::parse_expr;

    fn cfg(rates: RateSet, ns: usize, t_end: f64, history: &str, stride: usize) -> SimConfig {
        let grid = SizeGrid::new(ns, rates.m).unwrap();
        SimConfig {
            rates,
            grid,
            t_end,
            cfl: 0.9,
            history: HistoryInit::from_expr(parse_expr(history).unwrap()),
            stride,
        }
    }

    fn simple_rates(gamma: &str, mu: &str, beta: &str, theta: f64) -> RateSet {
        RateSet::from_strs(gamma, mu, beta, "1", 0.5, theta, 8.0).unwrap()
    }

    #[test]
    fn init_fills_identical_levels_for_delta_free_history() {
        let c = cfg(
            simple_rates("1", "0", "0", 1.0),
            51,
            1.0,
            "12*sin(s)^2*(8-s)^2",
            1,
        );
        let state = init_state(&c).unwrap();
        assert_eq!(state.levels(), ((1.0f64 / state.dt()).round() as usize) + 1);
        let first = state.levels.front().unwrap();
        let last = state.levels.back().unwrap();
        assert_eq!(first.density, last.density);
    }

    #[test]
    fn init_rejects_negative_history() {
        let c = cfg(simple_rates("1", "0", "0", 1.0), 51, 1.0, "sin(s)", 1);
        assert!(matches!(
            init_state(&c),
            Err(SimError::BadHistoryValue { .. })
        ));
    }

    #[test]
    fn zero_state_stays_zero() {
        let c = cfg(
            simple_rates("1", "0.3", "exp(tau)*(1-Q)", 0.5),
            41,
            2.0,
            "0",
            5,
        );
        let out = run(&c, None, &[]).unwrap();
        assert!(out
            .series
            .records
            .iter()
            .all(|r| r.p_total == 0.0 && r.recruitment == 0.0 && r.dist == 0.0));
    }

    #[test]
    fn recruitment_with_constant_inputs() {
        // beta = b, p = c on all levels -> b * c * m * theta
        let rates = simple_rates("1", "0", "0.7", 1.5);
        let c = cfg(rates, 81, 1.0, "0.3", 1);
        let state = init_state(&c).unwrap();
        let got = recruitment(&state, &c).unwrap();
        let expect = 0.7 * 0.3 * 8.0 * 1.5;
        assert!((got - expect).abs() < 1e-10 * expect, "got {got}");
    }

    #[test]
    fn recruitment_zero_fertility() {
        let c = cfg(simple_rates("1", "0", "0", 1.0), 41, 1.0, "1", 1);
        let state = init_state(&c).unwrap();
        assert_eq!(recruitment(&state, &c).unwrap(), 0.0);
    }

    #[test]
    fn recruitment_at_equilibrium_history() {
        let rates = RateSet::from_strs(
            "1",
            "0.58",
            "exp(tau)*(1+1.8*s)*max(0,1-Q)",
            "1",
            0.6,
            0.5,
            8.0,
        )
        .unwrap();
        let grid = SizeGrid::new(401, rates.m).unwrap();
        let dgrid = crate::numerics::DelayGrid::new(101, rates.theta).unwrap();
        let eq = crate::equilibrium::solve_equilibrium(&rates, &grid, &dgrid, Some(10.0))
            .unwrap()
            .solution
            .unwrap();
        let c = SimConfig {
            rates,
            grid,
            t_end: 1.0,
            cfl: 0.9,
            history: HistoryInit::Profile(eq.density.clone()),
            stride: 1,
        };
        let state = init_state(&c).unwrap();
        let got = recruitment(&state, &c).unwrap();
        let expect = eq.density[0];
        let h = c.grid.spacing();
        let dt = state.dt();
        assert!(
            (got - expect).abs() <= 5.0 * (h * h + dt * dt) * expect,
            "got {got}, equilibrium boundary {expect}"
        );
    }

    #[test]
    fn pure_transport_conserves_mass() {
        // support in [0, m-T]: nothing reaches the outflow boundary by t=T
        let c = cfg(
            simple_rates("1", "0", "0", 0.5),
            401,
            2.0,
            "max(0, s*(5-s))^2",
            10,
        );
        let out = run(&c, None, &[]).unwrap();
        let p0 = out.series.records.first().unwrap().p_total;
        let pt = out.series.records.last().unwrap().p_total;
        assert!((pt - p0).abs() <= 1e-12 * p0, "P(0)={p0}, P(T)={pt}");
    }

    #[test]
    fn exponential_decay_closed_form() {
        let cdecay = 0.25;
        let c = cfg(
            simple_rates("1", "0.25", "0", 0.5),
            401,
            2.0,
            "max(0, s*(5-s))^2",
            10,
        );
        let out = run(&c, None, &[]).unwrap();
        let p0 = out.series.records.first().unwrap().p_total;
        let pt = out.series.records.last().unwrap().p_total;
        let expect = p0 * (-cdecay * 2.0f64).exp();
        assert!(
            ((pt - expect) / expect).abs() < 0.02,
            "P(T)={pt}, closed form {expect}"
        );
    }

    #[test]
    fn cfl_violation_refuses() {
        // growth accelerates with P while the step size was fixed at P(0)
        let rates = RateSet::from_strs("1+P", "0", "3*exp(tau)", "1", 0.5, 0.5, 8.0).unwrap();
        let c = cfg(rates, 101, 30.0, "0.05", 10);
        let err = run(&c, None, &[]).unwrap_err();
        assert!(matches!(err, SimError::CflViolation { .. }), "{err:?}");
    }

    #[test]
    fn grid_convergence_is_first_order() {
        let p_end = |ns: usize| {
            let c = cfg(
                simple_rates("1", "0.4", "0.8*exp(tau)*(1-Q)", 0.5),
                ns,
                3.0,
                "0.05*(1+sin(s)^2)",
                usize::MAX / 2,
            );
            run(&c, None, &[])
                .unwrap()
                .series
                .records
                .last()
                .unwrap()
                .p_total
        };
        let a = p_end(101);
        let b = p_end(201);
        let c_ = p_end(401);
        let coarse_change = (a - b).abs();
        let fine_change = (b - c_).abs();
        assert!(
            fine_change <= 0.8 * coarse_change,
            "changes {coarse_change} -> {fine_change}"
        );
    }

    #[test]
    fn discrete_mass_balance_per_step() {
        let rates = simple_rates("1", "0.4", "0.8*exp(tau)*(1-Q)", 0.5);
        let c = cfg(rates, 201, 1.0, "0.1*(1+sin(s)^2)", 1);
        let mut state = init_state(&c).unwrap();
        let h = c.grid.spacing();
        let dt = state.dt();
        let n_steps = (1.0 / dt).ceil() as usize;
        let mut worst = 0.0f64;
        for _ in 0..n_steps {
            let before = state.current().to_vec();
            let p_before = trapezoid(&before, h).unwrap();
            let gamma_m = c.rates.gamma_at(c.rates.m, p_before).unwrap();
            let mu_p: Vec<f64> = c
                .grid
                .nodes()
                .iter()
                .zip(&before)
                .map(|(&s, &p)| c.rates.mu_at(s, p_before).unwrap() * p)
                .collect();
            let sink = trapezoid(&mu_p, h).unwrap();
            step(&mut state, &c).unwrap();
            let after = state.current();
            let p_after = trapezoid(after, h).unwrap();
            let outflux = gamma_m * before.last().unwrap();
            let influx = after[0];
            let residual = (p_after - p_before) + dt * (outflux + sink - influx);
            worst = worst.max(residual.abs());
        }
        // first-order flux bookkeeping: the residual is O(dt (dt + ds))
        assert!(
            worst <= 5.0 * dt * (dt + h),
            "worst residual {worst}, budget {}",
            5.0 * dt * (dt + h)
        );
    }

    #[test]
    fn fit_recovers_synthetic_rates() {
        let mut series = TimeSeries::default();
        for i in 0..200 {
            let t = i as f64 * 0.1;
            series.records.push(Record {
                t,
                p_total: 2.0 + (-0.3 * t).exp(),
                recruitment: 0.0,
                dist: 0.0,
            });
        }
        let rate = growth_rate_fit(&series, 2.0, (0.0, 15.0)).unwrap();
        assert!((rate + 0.3).abs() < 1e-6, "got {rate}");

        let mut series = TimeSeries::default();
        for i in 0..200 {
            let t = i as f64 * 0.1;
            series.records.push(Record {
                t,
                p_total: 2.0 + 2.0 * (0.1 * t).exp(),
                recruitment: 0.0,
                dist: 0.0,
            });
        }
        let rate = growth_rate_fit(&series, 2.0, (0.0, 15.0)).unwrap();
        assert!((rate - 0.1).abs() < 1e-6, "got {rate}");
    }

    #[test]
    fn fit_rejects_noise_floor() {
        let mut series = TimeSeries::default();
        for i in 0..100 {
            let t = i as f64 * 0.5;
            series.records.push(Record {
                t,
                p_total: 2.0 + 1e-14,
                recruitment: 0.0,
                dist: 0.0,
            });
        }
        assert!(matches!(
            growth_rate_fit(&series, 2.0, (0.0, 40.0)),
            Err(SimError::FitWindowUnreliable)
        ));
    }

    #[test]
    fn snapshots_capture_requested_times() {
        let c = cfg(simple_rates("1", "0.1", "0", 0.5), 51, 1.0, "1", 5);
        let out = run(&c, None, &[0.0, 0.5]).unwrap();
        assert_eq!(out.snapshots.len(), 2);
        assert_eq!(out.snapshots[0].0, 0.0);
        assert!(out.snapshots[1].1 >= 0.5 - 1e-12);
    }
}
