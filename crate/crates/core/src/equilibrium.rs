//! Steady states of the model: survivorship, the basic reproduction
//! function, the hierarchy variable, and positive equilibria.
//!
//! A positive steady state is characterised by a scalar condition: the
//! candidate density for total population `P` is
//! `p(s) = P Pi(s,P) / int Pi(y,P) dy`, its hierarchy profile `Q[P]` follows,
//! and `P` is an equilibrium exactly when the reproduction number
//! `R(P, Q[P])` equals one. [`solve_equilibrium`] brackets that scalar
//! condition and refines each bracket.

use crate::numerics::{
    self, bracket_scan, cumulative_trapezoid, find_root_bracketed, trapezoid, DelayGrid,
    NumericsError, SizeGrid,
};
use crate::rates::{RateError, RateSet};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EquilibriumError {
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("gamma is not positive at s={s}, P={p}: {value}")]
    NonPositiveGamma { s: f64, p: f64, value: f64 },
    #[error("survivorship integral is degenerate (zero)")]
    DegenerateSurvivorship,
    #[error("search bound p_max must be positive, got {0}")]
    BadSearchBound(f64),
}

/// A computed steady state with its sampled profiles.
#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub grid: SizeGrid,
    /// Total population at the steady state; zero for the trivial state.
    pub p_star: f64,
    /// Density samples `p*(s)` (individuals per unit size).
    pub density: Vec<f64>,
    /// Hierarchy samples `Q*(s)`.
    pub hierarchy: Vec<f64>,
    /// Survivorship samples `Pi(s, P*)`.
    pub survivorship: Vec<f64>,
    pub trivial: bool,
}

/// Result of the equilibrium search: the selected solution (smallest
/// positive root) plus every root found, for diagnostics.
#[derive(Debug, Clone)]
pub struct EquilibriumOutcome {
    pub solution: Option<EquilibriumSolution>,
    pub roots: Vec<f64>,
}

/// Samples of `Pi(s, P) = exp(-int_0^s (mu + gamma_s)/gamma dy)`.
///
/// The integrand is accumulated with the prefix trapezoid, then mapped
/// through `exp`, so `Pi(0, P) = 1` exactly.
pub fn survivorship_profile(
    rates: &RateSet,
    p: f64,
    grid: &SizeGrid,
) -> Result<Vec<f64>, EquilibriumError> {
    let integrand = survivorship_integrand(rates, p, grid)?;
    let cum = cumulative_trapezoid(&integrand, grid.spacing())?;
    Ok(cum.iter().map(|c| (-c).exp()).collect())
}

pub(crate) fn survivorship_integrand(
    rates: &RateSet,
    p: f64,
    grid: &SizeGrid,
) -> Result<Vec<f64>, EquilibriumError> {
    grid.nodes()
        .iter()
        .map(|&s| {
            let g = rates.gamma_at(s, p)?;
            if !(g > 0.0) {
                return Err(EquilibriumError::NonPositiveGamma { s, p, value: g });
            }
            Ok((rates.mu_at(s, p)? + rates.gamma_s_at(s, p)?) / g)
        })
        .collect()
}

/// Hierarchy profile `Q(s) = alpha int_0^s w p dr + int_s^m w p dr`,
/// realised as `alpha W(s) + (W(m) - W(s))` with `W` the prefix integral of
/// `w p`.
pub fn hierarchy_weight(
    rates: &RateSet,
    density: &[f64],
    grid: &SizeGrid,
) -> Result<Vec<f64>, EquilibriumError> {
    let wp: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(density)
        .map(|(&s, &p)| Ok(rates.w_at(s)? * p))
        .collect::<Result<_, RateError>>()?;
    let cum = cumulative_trapezoid(&wp, grid.spacing())?;
    let total = *cum.last().unwrap();
    Ok(cum.iter().map(|&w| rates.alpha * w + (total - w)).collect())
}

/// Basic reproduction function
/// `R(P, Q) = int_0^m int_{-theta}^0 Pi(s,P) beta(s,tau,Q(s)) dtau ds`
/// by nested trapezoid (`tau` inner).
pub fn reproduction_number(
    rates: &RateSet,
    p: f64,
    hierarchy: &[f64],
    grid: &SizeGrid,
    dgrid: &DelayGrid,
) -> Result<f64, EquilibriumError> {
    let pi = survivorship_profile(rates, p, grid)?;
    reproduction_number_with_survivorship(rates, &pi, hierarchy, grid, dgrid)
}

pub(crate) fn reproduction_number_with_survivorship(
    rates: &RateSet,
    survivorship: &[f64],
    hierarchy: &[f64],
    grid: &SizeGrid,
    dgrid: &DelayGrid,
) -> Result<f64, EquilibriumError> {
    let mut outer = Vec::with_capacity(grid.len());
    let mut inner = vec![0.0; dgrid.len()];
    for (i, &s) in grid.nodes().iter().enumerate() {
        for (j, &tau) in dgrid.nodes().iter().enumerate() {
            inner[j] = rates.beta_at(s, tau, hierarchy[i])?;
        }
        outer.push(survivorship[i] * trapezoid(&inner, dgrid.spacing())?);
    }
    Ok(trapezoid(&outer, grid.spacing())?)
}

/// Candidate equilibrium density `p(s) = P Pi(s,P) / int_0^m Pi(y,P) dy`.
pub fn equilibrium_density(
    rates: &RateSet,
    p_star: f64,
    grid: &SizeGrid,
) -> Result<Vec<f64>, EquilibriumError> {
    let pi = survivorship_profile(rates, p_star, grid)?;
    let norm = trapezoid(&pi, grid.spacing())?;
    if norm <= 0.0 {
        return Err(EquilibriumError::DegenerateSurvivorship);
    }
    Ok(pi.iter().map(|&v| p_star * v / norm).collect())
}

/// The trivial steady state (`p* = 0`) with its profiles at `P = 0`.
pub fn trivial_state(
    rates: &RateSet,
    grid: &SizeGrid,
) -> Result<EquilibriumSolution, EquilibriumError> {
    let survivorship = survivorship_profile(rates, 0.0, grid)?;
    Ok(EquilibriumSolution {
        grid: grid.clone(),
        p_star: 0.0,
        density: vec![0.0; grid.len()],
        hierarchy: vec![0.0; grid.len()],
        survivorship,
        trivial: true,
    })
}

/// Crude default search bound: `10 m theta max(beta)` with the fertility
/// probed at a few hierarchy levels so that fertilities proportional to `Q`
/// still produce a usable bound.
pub fn default_p_max(
    rates: &RateSet,
    grid: &SizeGrid,
    dgrid: &DelayGrid,
) -> Result<f64, EquilibriumError> {
    let mut max_beta = 0.0f64;
    for &s in grid.nodes() {
        for &tau in dgrid.nodes() {
            for q in [0.0, 0.5, 1.0, 2.0] {
                max_beta = max_beta.max(rates.beta_at(s, tau, q)?);
            }
        }
    }
    let bound = 10.0 * rates.m * rates.theta * max_beta;
    if bound > 0.0 {
        Ok(bound)
    } else {
        Err(EquilibriumError::BadSearchBound(bound))
    }
}

const SCAN_SAMPLES: usize = 64;

/// Locate positive steady states on `(0, p_max]`.
///
/// Defines `g(P) = R(P, Q[P]) - 1` with `Q[P]` the hierarchy profile of the
/// candidate density, scans for sign changes (the scan includes `P = 0` as a
/// sample so that roots below the first positive sample still get bracketed;
/// a root at zero itself is the trivial state and is not reported), refines
/// each bracket, and selects the smallest positive root. Absence of any sign
/// change is a result (`solution: None`), not an error.
pub fn solve_equilibrium(
    rates: &RateSet,
    grid: &SizeGrid,
    dgrid: &DelayGrid,
    p_max: Option<f64>,
) -> Result<EquilibriumOutcome, EquilibriumError> {
    let p_max = match p_max {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(EquilibriumError::BadSearchBound(v)),
        None => default_p_max(rates, grid, dgrid)?,
    };

    let mut failure: Option<EquilibriumError> = None;
    let mut g = |p: f64| -> f64 {
        match excess_reproduction(rates, p, grid, dgrid) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };

    let brackets = match bracket_scan(&mut g, 0.0, p_max, SCAN_SAMPLES) {
        Ok(b) => b,
        Err(NumericsError::NanValue(_)) if failure.is_some() => {
            return Err(failure.unwrap());
        }
        Err(e) => return Err(e.into()),
    };

    let mut roots = Vec::new();
    for br in brackets {
        let root = if br.is_degenerate() {
            br.lo
        } else {
            match find_root_bracketed(&mut g, br.lo, br.hi, numerics::ROOT_TOL) {
                Ok(r) => r,
                Err(NumericsError::NanValue(_)) if failure.is_some() => {
                    return Err(failure.unwrap())
                }
                Err(e) => return Err(e.into()),
            }
        };
        if root > 1e-12 * p_max {
            roots.push(root);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let solution = match roots.first() {
        None => None,
        Some(&p_star) => {
            let density = equilibrium_density(rates, p_star, grid)?;
            let hierarchy = hierarchy_weight(rates, &density, grid)?;
            let survivorship = survivorship_profile(rates, p_star, grid)?;
            Some(EquilibriumSolution {
                grid: grid.clone(),
                p_star,
                density,
                hierarchy,
                survivorship,
                trivial: false,
            })
        }
    };
    Ok(EquilibriumOutcome { solution, roots })
}

// g(P) = R(P, Q[P]) - 1
fn excess_reproduction(
    rates: &RateSet,
    p: f64,
    grid: &SizeGrid,
    dgrid: &DelayGrid,
) -> Result<f64, EquilibriumError> {
    let pi = survivorship_profile(rates, p, grid)?;
    let (density, hierarchy);
    if p == 0.0 {
        hierarchy = vec![0.0; grid.len()];
    } else {
        let norm = trapezoid(&pi, grid.spacing())?;
        if norm <= 0.0 {
            return Err(EquilibriumError::DegenerateSurvivorship);
        }
        density = pi.iter().map(|&v| p * v / norm).collect::<Vec<_>>();
        hierarchy = hierarchy_weight(rates, &density, grid)?;
    }
    Ok(reproduction_number_with_survivorship(rates, &pi, &hierarchy, grid, dgrid)? - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grids(ns: usize, ntau: usize, theta: f64, m: f64) -> (SizeGrid, DelayGrid) {
        (
            SizeGrid::new(ns, m).unwrap(),
            DelayGrid::new(ntau, theta).unwrap(),
        )
    }

    fn example_71() -> RateSet {
        RateSet::from_strs(
            "1",
            "0.5",
            "0.5*exp(tau)*(0.7+sin(2*s)^2)*max(0,1-Q)",
            "1",
            0.5,
            1.5,
            8.0,
        )
        .unwrap()
    }

    fn example_72() -> RateSet {
        RateSet::from_strs(
            "1",
            "0.58",
            "exp(tau)*(1+1.8*s)*max(0,1-Q)",
            "1",
            0.6,
            0.5,
            8.0,
        )
        .unwrap()
    }

    #[test]
    fn survivorship_closed_forms() {
        let (grid, _) = grids(2001, 11, 1.5, 8.0);
        let r71 = example_71();
        let pi = survivorship_profile(&r71, 0.3, &grid).unwrap();
        assert_eq!(pi[0], 1.0);
        assert!((pi.last().unwrap() - (-4.0f64).exp()).abs() < 1e-9);

        let no_attrition = RateSet::from_strs("1", "0", "0", "1", 0.5, 1.0, 8.0).unwrap();
        let pi = survivorship_profile(&no_attrition, 0.0, &grid).unwrap();
        assert!(pi.iter().all(|&v| v == 1.0));

        let r72 = example_72();
        let pi = survivorship_profile(&r72, 1.0, &grid).unwrap();
        assert!((pi.last().unwrap() - (-4.64f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn survivorship_is_population_independent_for_constant_rates() {
        let (grid, _) = grids(301, 11, 1.5, 8.0);
        let r = example_71();
        let a = survivorship_profile(&r, 0.0, &grid).unwrap();
        let b = survivorship_profile(&r, 7.25, &grid).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn survivorship_rejects_non_positive_gamma() {
        let r = RateSet::from_strs("s-4", "0", "0", "1", 0.5, 1.0, 8.0).unwrap();
        let (grid, _) = grids(101, 11, 1.0, 8.0);
        assert!(matches!(
            survivorship_profile(&r, 0.0, &grid),
            Err(EquilibriumError::NonPositiveGamma { .. })
        ));
    }

    #[test]
    fn hierarchy_endpoints_and_monotonicity() {
        let (grid, _) = grids(501, 11, 1.0, 8.0);
        let r = RateSet::from_strs("1", "0", "0", "1", 0.25, 1.0, 8.0).unwrap();

        let zero = hierarchy_weight(&r, &vec![0.0; grid.len()], &grid).unwrap();
        assert!(zero.iter().all(|&q| q == 0.0));

        let c = 0.75;
        let q = hierarchy_weight(&r, &vec![c; grid.len()], &grid).unwrap();
        assert!((q[0] - c * 8.0).abs() < 1e-12);
        assert!((q.last().unwrap() - 0.25 * c * 8.0).abs() < 1e-12);
        assert!(q.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    }

    #[test]
    fn hierarchy_endpoint_identity_at_equilibrium() {
        let (grid, dgrid) = grids(801, 51, 0.5, 8.0);
        let r = example_72();
        let out = solve_equilibrium(&r, &grid, &dgrid, Some(10.0)).unwrap();
        let eq = out.solution.unwrap();
        let q0 = eq.hierarchy[0];
        let qm = *eq.hierarchy.last().unwrap();
        assert!((qm - r.alpha * q0).abs() < 1e-10 * q0.max(1.0));
        // the hierarchy at zero equals the candidate total population
        assert!((q0 - eq.p_star).abs() < 1e-10);
        assert!(q0 < 1.0, "clamp must be inactive at the equilibrium");
    }

    #[test]
    fn reproduction_number_matches_reported_values() {
        let (grid, dgrid) = grids(2001, 501, 1.5, 8.0);
        let zero_q = vec![0.0; grid.len()];
        let r = example_71();
        let r00 = reproduction_number(&r, 0.0, &zero_q, &grid, &dgrid).unwrap();
        assert!((r00 - 0.9088).abs() < 5e-4, "got {r00}");

        let r_mod = RateSet::from_strs(
            "1",
            "0.5",
            "0.55*exp(tau)*(1+cos(0.1*s)^2)*max(0,1-Q)",
            "1",
            0.5,
            1.5,
            8.0,
        )
        .unwrap();
        let r00 = reproduction_number(&r_mod, 0.0, &zero_q, &grid, &dgrid).unwrap();
        assert!((r00 - 1.6297).abs() < 5e-4, "got {r00}");
    }

    #[test]
    fn reproduction_number_zero_fertility() {
        let (grid, dgrid) = grids(101, 11, 1.0, 8.0);
        let r = RateSet::from_strs("1", "0.5", "0", "1", 0.5, 1.0, 8.0).unwrap();
        let zero_q = vec![0.0; grid.len()];
        assert_eq!(
            reproduction_number(&r, 0.0, &zero_q, &grid, &dgrid).unwrap(),
            0.0
        );
    }

    #[test]
    fn reproduction_number_is_linear_in_beta() {
        let (grid, dgrid) = grids(301, 41, 1.5, 8.0);
        let base = example_71();
        let scaled = RateSet::from_strs(
            "1",
            "0.5",
            "3*(0.5*exp(tau)*(0.7+sin(2*s)^2)*max(0,1-Q))",
            "1",
            0.5,
            1.5,
            8.0,
        )
        .unwrap();
        let q: Vec<f64> = grid.nodes().iter().map(|s| 0.05 * s).collect();
        let a = reproduction_number(&base, 0.0, &q, &grid, &dgrid).unwrap();
        let b = reproduction_number(&scaled, 0.0, &q, &grid, &dgrid).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-13 * b.abs());
    }

    #[test]
    fn reproduction_number_grid_refinement() {
        let zero = |g: &SizeGrid| vec![0.0; g.len()];
        let r = example_71();
        let (g1, d1) = grids(2001, 501, 1.5, 8.0);
        let (g2, d2) = grids(4001, 501, 1.5, 8.0);
        let a = reproduction_number(&r, 0.0, &zero(&g1), &g1, &d1).unwrap();
        let b = reproduction_number(&r, 0.0, &zero(&g2), &g2, &d2).unwrap();
        assert!((a - b).abs() <= 1e-5);
    }

    #[test]
    fn density_closed_forms() {
        let (grid, _) = grids(1001, 11, 1.0, 8.0);
        let flat = RateSet::from_strs("1", "0", "0", "1", 0.5, 1.0, 8.0).unwrap();
        let p = equilibrium_density(&flat, 4.0, &grid).unwrap();
        assert!(p.iter().all(|&v| (v - 0.5).abs() < 1e-12));

        let r72 = example_72();
        let p = equilibrium_density(&r72, 1.0, &grid).unwrap();
        let norm = (1.0 - (-4.64f64).exp()) / 0.58;
        for (i, &s) in grid.nodes().iter().enumerate() {
            let expect = (-0.58 * s).exp() / norm;
            assert!((p[i] - expect).abs() < 1e-5, "at s={s}");
        }
        // normalisation identity
        let total = trapezoid(&p, grid.spacing()).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_returns_none_without_feedback() {
        // beta independent of Q and P, R(0,0) != 1: g is constant
        let (grid, dgrid) = grids(201, 21, 1.0, 8.0);
        let r = RateSet::from_strs("1", "0.5", "0.1*exp(tau)", "1", 0.5, 1.0, 8.0).unwrap();
        let out = solve_equilibrium(&r, &grid, &dgrid, Some(5.0)).unwrap();
        assert!(out.solution.is_none());
        assert!(out.roots.is_empty());
    }

    #[test]
    fn solve_example_72_against_linear_condition() {
        let (grid, dgrid) = grids(2001, 501, 0.5, 8.0);
        let r = example_72();
        let out = solve_equilibrium(&r, &grid, &dgrid, Some(10.0)).unwrap();
        let eq = out.solution.unwrap();
        assert!((eq.p_star - 0.8585).abs() < 1e-3, "got {}", eq.p_star);

        // residual of the defining condition at the solver grid
        let rn = reproduction_number(&r, eq.p_star, &eq.hierarchy, &grid, &dgrid).unwrap();
        assert!((rn - 1.0).abs() <= 1e-8);

        // total population consistency of the returned profile
        let total = trapezoid(&eq.density, grid.spacing()).unwrap();
        assert!((total - eq.p_star).abs() < 1e-10);
    }

    #[test]
    fn solve_rejects_bad_bound() {
        let (grid, dgrid) = grids(101, 11, 0.5, 8.0);
        let r = example_72();
        assert!(matches!(
            solve_equilibrium(&r, &grid, &dgrid, Some(-1.0)),
            Err(EquilibriumError::BadSearchBound(_))
        ));
    }

    #[test]
    fn default_bound_handles_hierarchy_proportional_fertility() {
        let (grid, dgrid) = grids(101, 11, 0.5, 8.0);
        let r = RateSet::from_strs("1", "0.58", "0.5*exp(tau)*(1+0.1*s)*Q", "1", 0.6, 0.5, 8.0)
            .unwrap();
        let bound = default_p_max(&r, &grid, &dgrid).unwrap();
        assert!(bound > 0.0);
    }

    #[test]
    fn trivial_state_profiles() {
        let (grid, _) = grids(101, 11, 1.5, 8.0);
        let r = example_71();
        let eq = trivial_state(&r, &grid).unwrap();
        assert!(eq.trivial);
        assert_eq!(eq.p_star, 0.0);
        assert!(eq.density.iter().all(|&v| v == 0.0));
        assert_eq!(eq.survivorship[0], 1.0);
    }
}
