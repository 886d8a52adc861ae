//! Linearised stability analysis: coefficients of the linearised system, the
//! 3x3 characteristic matrix `A(lambda)` and its determinant `K(lambda)`,
//! the positivity condition that licenses restricting `K` to real `lambda`,
//! real-root location, and the stability classifier.
//!
//! `K(lambda)` is the determinant of the matrix acting on the boundary
//! unknowns `(H(0), H'(0), U)` of the linearised eigenvalue problem; its
//! zeros are the eigenvalues of the generator. When the positivity condition
//! holds, the spectral bound is a real dominant eigenvalue, so scanning `K`
//! on the real line decides stability. When it fails, complex eigenvalues
//! are unaccounted for and the classifier reports indeterminate rather than
//! guessing.
//!
//! Entry assembly for distinct `lambda` values shares a per-problem cache of
//! everything `lambda`-independent (fertility samples on the `(s, tau)`
//! grid, the prefix integrals of `1/gamma*` and `nu*/gamma*`), which brings
//! one determinant evaluation down to a few multiply-add passes.

use crate::equilibrium::{
    reproduction_number, trivial_state, EquilibriumError, EquilibriumSolution,
};
use crate::numerics::{
    self, bracket_scan, cumulative_trapezoid, find_root_bracketed, trapezoid, DelayGrid,
    NumericsError, SizeGrid,
};
use crate::rates::{RateError, RateSet};
use thiserror::Error;

/// Numeric threshold below which the sampled `eps*` profile counts as
/// identically zero (the symbolic partials may fold to non-literal zeros).
pub const EPS_STAR_ZERO_TOL: f64 = 1e-12;
/// Slack on the positivity margin.
pub const POSITIVITY_TOL: f64 = 1e-12;
/// Threshold for calling `K(0)` negative.
pub const DET_SIGN_TOL: f64 = 1e-9;
/// Width of the indeterminate band around `R(0,0) = 1`.
pub const REPRODUCTION_UNIT_TOL: f64 = 1e-8;
/// Default real-line scan range and sample count for root location.
pub const DEFAULT_LAMBDA_RANGE: (f64, f64) = (-5.0, 50.0);
pub const DEFAULT_LAMBDA_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("equilibrium computation failed: {0}")]
    Equilibrium(String),
    #[error("gamma* is not positive at node {index}: {value}")]
    NonPositiveGammaStar { index: usize, value: f64 },
    #[error(
        "positivity condition unverified (margin {margin}); real-root dominance cannot be \
         asserted"
    )]
    PositivityUnverified { margin: f64 },
}

impl From<EquilibriumError> for SpectrumError {
    fn from(e: EquilibriumError) -> Self {
        SpectrumError::Equilibrium(e.to_string())
    }
}

/// Sampled coefficients of the linearised transport equation.
#[derive(Debug, Clone)]
pub struct LinearCoefficients {
    /// `gamma*(s) = gamma(s, P*)`.
    pub gamma_star: Vec<f64>,
    /// `nu*(s) = mu(s, P*) + gamma_s(s, P*)`.
    pub nu_star: Vec<f64>,
    /// `eps*(s) = p*(mu_P + gamma_sP) + p*' gamma_P`, with `p*'` taken from
    /// the closed form `p*' = -p* nu*/gamma*` rather than differencing the
    /// sampled profile.
    pub eps_star: Vec<f64>,
}

impl LinearCoefficients {
    pub fn eps_star_max(&self) -> f64 {
        self.eps_star.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }
}

/// Evaluate the linearised coefficients at the given steady state (trivial
/// states are allowed; their `eps*` vanishes identically because `p* = 0`).
pub fn linear_coefficients(
    rates: &RateSet,
    eq: &EquilibriumSolution,
) -> Result<LinearCoefficients, SpectrumError> {
    let n = eq.grid.len();
    let mut gamma_star = Vec::with_capacity(n);
    let mut nu_star = Vec::with_capacity(n);
    let mut eps_star = Vec::with_capacity(n);
    for (i, &s) in eq.grid.nodes().iter().enumerate() {
        let g = rates.gamma_at(s, eq.p_star)?;
        if !(g > 0.0) {
            return Err(SpectrumError::NonPositiveGammaStar { index: i, value: g });
        }
        let nu = rates.mu_at(s, eq.p_star)? + rates.gamma_s_at(s, eq.p_star)?;
        let p = eq.density[i];
        let dp = -p * nu / g;
        let eps = p * (rates.mu_p_at(s, eq.p_star)? + rates.gamma_sp_at(s, eq.p_star)?)
            + dp * rates.gamma_p_at(s, eq.p_star)?;
        gamma_star.push(g);
        nu_star.push(nu);
        eps_star.push(eps);
    }
    Ok(LinearCoefficients {
        gamma_star,
        nu_star,
        eps_star,
    })
}

/// Samples of `pi*(lambda, s) = exp(-int_0^s (lambda + nu*)/gamma* da)`.
pub fn pi_star(
    lc: &LinearCoefficients,
    grid: &SizeGrid,
    lambda: f64,
) -> Result<Vec<f64>, SpectrumError> {
    let (cap_gamma, lnu) = transport_prefixes(lc, grid)?;
    Ok(cap_gamma
        .iter()
        .zip(&lnu)
        .map(|(&c, &l)| (-(l + lambda * c)).exp())
        .collect())
}

// prefix integrals of 1/gamma* and nu*/gamma*
fn transport_prefixes(
    lc: &LinearCoefficients,
    grid: &SizeGrid,
) -> Result<(Vec<f64>, Vec<f64>), SpectrumError> {
    let inv_gamma: Vec<f64> = lc.gamma_star.iter().map(|&g| 1.0 / g).collect();
    let nu_over_gamma: Vec<f64> = lc
        .nu_star
        .iter()
        .zip(&lc.gamma_star)
        .map(|(&nu, &g)| nu / g)
        .collect();
    let cap_gamma = cumulative_trapezoid(&inv_gamma, grid.spacing())?;
    let lnu = cumulative_trapezoid(&nu_over_gamma, grid.spacing())?;
    Ok((cap_gamma, lnu))
}

/// The characteristic matrix at one `lambda`.
///
/// `a[i][j]` holds the entry in row `i+1`, column `j+1` of the 3x3 system on
/// `(H(0), H'(0), U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharMatrix {
    pub lambda: f64,
    pub a: [[f64; 3]; 3],
}

impl CharMatrix {
    /// Determinant by direct cofactor expansion.
    pub fn det(&self) -> f64 {
        let a = &self.a;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }
}

/// Cached, `lambda`-independent state for characteristic-matrix assembly.
#[derive(Debug, Clone)]
pub struct CharProblem {
    spacing: f64,
    alpha: f64,
    w0: f64,
    w: Vec<f64>,
    pstar: Vec<f64>,
    /// `eps*(s)/gamma*(s)`.
    eps_over_gamma: Vec<f64>,
    eps_max: f64,
    cap_gamma: Vec<f64>,
    lnu: Vec<f64>,
    tau_nodes: Vec<f64>,
    tau_weights: Vec<f64>,
    /// `beta(s_i, tau_j, Q*(s_i))`, row-major over `i`.
    bmat: Vec<f64>,
    /// `beta_Q(s_i, tau_j, Q*(s_i))`, row-major over `i`.
    bqmat: Vec<f64>,
    n_s: usize,
    n_tau: usize,
}

impl CharProblem {
    pub fn assemble(
        rates: &RateSet,
        eq: &EquilibriumSolution,
        lc: &LinearCoefficients,
        dgrid: &DelayGrid,
    ) -> Result<CharProblem, SpectrumError> {
        let grid = &eq.grid;
        let n_s = grid.len();
        let n_tau = dgrid.len();
        let (cap_gamma, lnu) = transport_prefixes(lc, grid)?;
        let w: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&s| rates.w_at(s))
            .collect::<Result<_, _>>()?;
        let mut bmat = Vec::with_capacity(n_s * n_tau);
        let mut bqmat = Vec::with_capacity(n_s * n_tau);
        for (i, &s) in grid.nodes().iter().enumerate() {
            let q = eq.hierarchy[i];
            for &tau in dgrid.nodes() {
                bmat.push(rates.beta_at(s, tau, q)?);
                bqmat.push(rates.beta_q_at(s, tau, q)?);
            }
        }
        let h_tau = dgrid.spacing();
        let mut tau_weights = vec![h_tau; n_tau];
        tau_weights[0] = 0.5 * h_tau;
        tau_weights[n_tau - 1] = 0.5 * h_tau;
        let eps_over_gamma: Vec<f64> = lc
            .eps_star
            .iter()
            .zip(&lc.gamma_star)
            .map(|(&e, &g)| e / g)
            .collect();
        Ok(CharProblem {
            spacing: grid.spacing(),
            alpha: rates.alpha,
            w0: w[0],
            w,
            pstar: eq.density.clone(),
            eps_over_gamma,
            eps_max: lc.eps_star_max(),
            cap_gamma,
            lnu,
            tau_nodes: dgrid.nodes().to_vec(),
            tau_weights,
            bmat,
            bqmat,
            n_s,
            n_tau,
        })
    }

    /// Assemble the matrix `A(lambda)`.
    ///
    /// The `1/pi*` factors inside the `eps*` integrals are never formed
    /// directly: the product `pi*(lambda,s) E(s)` (with `E` the prefix
    /// integral of `eps*/(pi* gamma*)`) is carried by a recurrence in which
    /// only panel-local exponential differences appear, so nothing under- or
    /// overflows even when `pi*` itself does.
    pub fn matrix(&self, lambda: f64) -> CharMatrix {
        let n = self.n_s;
        let h = self.spacing;
        let alpha = self.alpha;
        let w0 = self.w0;

        // tau quadrature weights folded with e^{lambda tau}
        let ew: Vec<f64> = self
            .tau_nodes
            .iter()
            .zip(&self.tau_weights)
            .map(|(&t, &wt)| (lambda * t).exp() * wt)
            .collect();

        let mut bbar = vec![0.0; n];
        let mut bqbar = vec![0.0; n];
        for i in 0..n {
            let row = &self.bmat[i * self.n_tau..(i + 1) * self.n_tau];
            let qrow = &self.bqmat[i * self.n_tau..(i + 1) * self.n_tau];
            let mut acc = 0.0;
            let mut qacc = 0.0;
            for j in 0..self.n_tau {
                acc += ew[j] * row[j];
                qacc += ew[j] * qrow[j];
            }
            bbar[i] = acc;
            bqbar[i] = qacc;
        }

        // log pi*(lambda, s_i) = -(lnu_i + lambda cap_gamma_i)
        let logpi: Vec<f64> = self
            .lnu
            .iter()
            .zip(&self.cap_gamma)
            .map(|(&l, &c)| -(l + lambda * c))
            .collect();
        let pis: Vec<f64> = logpi.iter().map(|&lp| lp.exp()).collect();

        let wpi: Vec<f64> = self.w.iter().zip(&pis).map(|(&w, &p)| w * p).collect();
        let wpi_cum = cum(&wpi, h);
        let a22 = wpi_cum[n - 1] / w0;
        let ipi = trap_ref(&pis, h);

        let b_int = trap_zip(&bbar, &pis, h);
        let c_int = trap_zip(&bqbar, &self.pstar, h);
        let d_int = {
            let prod: Vec<f64> = (0..n)
                .map(|i| bqbar[i] * self.pstar[i] * wpi_cum[i])
                .collect();
            trap_ref(&prod, h)
        };

        let a11 = (1.0 - alpha) * w0 * c_int;
        let a12 = 1.0 - b_int + (1.0 - alpha) * d_int;
        let a21 = 1.0 - alpha;
        let a31 = ipi * c_int;
        let a32 = ipi * (b_int / (w0 * (alpha - 1.0)) + d_int / w0);

        let (a13, a23, a33);
        if self.eps_max <= EPS_STAR_ZERO_TOL {
            a13 = 0.0;
            a23 = 0.0;
            a33 = -1.0;
        } else {
            // pe_i = pi*(lambda, s_i) * int_0^{s_i} eps*/(pi* gamma*) dy
            let mut pe = vec![0.0; n];
            for i in 1..n {
                let r = (logpi[i] - logpi[i - 1]).exp();
                pe[i] = r * pe[i - 1]
                    + 0.5 * h * (self.eps_over_gamma[i - 1] * r + self.eps_over_gamma[i]);
            }
            let wpe: Vec<f64> = self.w.iter().zip(&pe).map(|(&w, &p)| w * p).collect();
            let f_cum = cum(&wpe, h);
            let g1 = trap_zip(&bbar, &pe, h);
            let g2 = {
                let prod: Vec<f64> = (0..n)
                    .map(|i| bqbar[i] * self.pstar[i] * f_cum[i])
                    .collect();
                trap_ref(&prod, h)
            };
            let g3 = trap_ref(&pe, h);
            a13 = w0 * (alpha - 1.0) * g1 + w0 * (1.0 - alpha) * (1.0 - alpha) * g2;
            a23 = (1.0 - alpha) * trap_ref(&wpe, h);
            a33 = ipi * (1.0 - alpha) * g2 - ipi * g1 - (1.0 + g3);
        }

        CharMatrix {
            lambda,
            a: [[a11, a12, a13], [a21, a22, a23], [a31, a32, a33]],
        }
    }

    /// `K(lambda)`: determinant of the characteristic matrix.
    pub fn det(&self, lambda: f64) -> f64 {
        self.matrix(lambda).det()
    }

    /// Largest real zero of `K` on `[lo, hi]` from an `n`-point scan, with
    /// no claim of spectral dominance attached. Sound as the spectral bound
    /// only under the positivity condition; see [`leading_root`].
    pub fn largest_real_root(
        &self,
        lo: f64,
        hi: f64,
        n: usize,
    ) -> Result<RealRootScan, SpectrumError> {
        let brackets = bracket_scan(|x| self.det(x), lo, hi, n)?;
        let mut best: Option<f64> = None;
        for br in brackets {
            let root = if br.is_degenerate() {
                br.lo
            } else {
                find_root_bracketed(|x| self.det(x), br.lo, br.hi, numerics::ROOT_TOL)?
            };
            best = Some(best.map_or(root, |b: f64| b.max(root)));
        }
        Ok(match best {
            Some(r) => RealRootScan::Root(r),
            None => RealRootScan::NoneFound,
        })
    }
}

fn cum(values: &[f64], h: f64) -> Vec<f64> {
    cumulative_trapezoid(values, h).expect("grid guarantees >= 3 nodes")
}

fn trap_ref(values: &[f64], h: f64) -> f64 {
    trapezoid(values, h).expect("grid guarantees >= 3 nodes")
}

fn trap_zip(a: &[f64], b: &[f64], h: f64) -> f64 {
    let prod: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x * y).collect();
    trap_ref(&prod, h)
}

/// One-shot assembly of `A(lambda)`; use [`CharProblem`] directly when
/// evaluating many `lambda` values.
pub fn char_matrix(
    rates: &RateSet,
    eq: &EquilibriumSolution,
    lc: &LinearCoefficients,
    dgrid: &DelayGrid,
    lambda: f64,
) -> Result<CharMatrix, SpectrumError> {
    Ok(CharProblem::assemble(rates, eq, lc, dgrid)?.matrix(lambda))
}

/// One-shot `K(lambda)`.
pub fn char_det(
    rates: &RateSet,
    eq: &EquilibriumSolution,
    lc: &LinearCoefficients,
    dgrid: &DelayGrid,
    lambda: f64,
) -> Result<f64, SpectrumError> {
    Ok(char_matrix(rates, eq, lc, dgrid, lambda)?.det())
}

/// Outcome of the positivity condition: the pointwise inequality on the
/// fertility response whose validity makes the linearised semigroup positive
/// and the spectral bound a real dominant eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityCheck {
    pub satisfied: bool,
    /// Worst-case (minimum over `s`) value of the left-hand side.
    pub margin: f64,
}

/// Evaluate the positivity condition at every grid node:
/// `int beta(s,.,Q*) dtau + w(s) (int_0^s g + alpha int_s^m g) >= 0` with
/// `g(y) = p*(y) int beta_Q(y,.,Q*(y)) dtau`.
pub fn positivity_check(
    rates: &RateSet,
    eq: &EquilibriumSolution,
    dgrid: &DelayGrid,
) -> Result<PositivityCheck, SpectrumError> {
    let grid = &eq.grid;
    let n = grid.len();
    let mut beta_tau = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut inner_b = vec![0.0; dgrid.len()];
    let mut inner_q = vec![0.0; dgrid.len()];
    for (i, &s) in grid.nodes().iter().enumerate() {
        let q = eq.hierarchy[i];
        for (j, &tau) in dgrid.nodes().iter().enumerate() {
            inner_b[j] = rates.beta_at(s, tau, q)?;
            inner_q[j] = rates.beta_q_at(s, tau, q)?;
        }
        beta_tau.push(trapezoid(&inner_b, dgrid.spacing())?);
        g.push(eq.density[i] * trapezoid(&inner_q, dgrid.spacing())?);
    }
    let g_cum = cumulative_trapezoid(&g, grid.spacing())?;
    let g_total = *g_cum.last().unwrap();
    let mut margin = f64::INFINITY;
    for i in 0..n {
        let w = rates.w_at(grid.nodes()[i])?;
        let lhs = beta_tau[i] + w * (g_cum[i] + rates.alpha * (g_total - g_cum[i]));
        margin = margin.min(lhs);
    }
    Ok(PositivityCheck {
        satisfied: margin >= -POSITIVITY_TOL,
        margin,
    })
}

/// Result of a real-line root scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealRootScan {
    Root(f64),
    NoneFound,
}

impl RealRootScan {
    pub fn root(&self) -> Option<f64> {
        match self {
            RealRootScan::Root(r) => Some(*r),
            RealRootScan::NoneFound => None,
        }
    }
}

/// Largest real root of `K`, asserted as the spectral bound.
///
/// Refuses unless the positivity condition has been verified, because only
/// then is the leading eigenvalue known to be real; callers that merely want
/// the real zeros of `K` use [`CharProblem::largest_real_root`].
pub fn leading_root(
    problem: &CharProblem,
    positivity: PositivityCheck,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<RealRootScan, SpectrumError> {
    if !positivity.satisfied {
        return Err(SpectrumError::PositivityUnverified {
            margin: positivity.margin,
        });
    }
    problem.largest_real_root(lo, hi, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Trivial,
    Positive,
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Target::Trivial => "trivial",
            Target::Positive => "positive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

/// The criterion that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictBasis {
    /// Trivial state, reproduction number below one.
    ReproductionBelowOne,
    /// Trivial state, reproduction number above one.
    ReproductionAboveOne,
    /// Trivial state, reproduction number within tolerance of one.
    ReproductionNearOne,
    /// Positive state, population-independent growth and mortality,
    /// positivity verified, fertility strictly decreasing in the hierarchy
    /// variable: no real root can cross zero.
    FertilityDampingMonotone,
    /// Positive state, population-independent growth and mortality,
    /// positivity verified, fertility non-decreasing in the hierarchy
    /// variable: a positive real root exists.
    FertilityGainPositiveRoot,
    /// Positive state, positivity verified and `K(0) < 0`: the determinant
    /// crosses zero on the positive half-line.
    DeterminantNegativeAtZero,
    /// The positivity condition could not be verified; complex spectrum is
    /// unaccounted for.
    PositivityUnverified,
    /// No stability criterion applied.
    HypothesesNotMet,
}

impl std::fmt::Display for VerdictBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictBasis::ReproductionBelowOne => "reproduction number below one",
            VerdictBasis::ReproductionAboveOne => "reproduction number above one",
            VerdictBasis::ReproductionNearOne => "reproduction number within tolerance of one",
            VerdictBasis::FertilityDampingMonotone => {
                "hierarchy-damped fertility with verified positivity"
            }
            VerdictBasis::FertilityGainPositiveRoot => {
                "hierarchy-amplified fertility with verified positivity"
            }
            VerdictBasis::DeterminantNegativeAtZero => {
                "negative characteristic determinant at zero"
            }
            VerdictBasis::PositivityUnverified => "positivity condition unverified",
            VerdictBasis::HypothesesNotMet => "no criterion hypotheses verified",
        })
    }
}

/// Pointwise sign of `beta_Q` on the `(s, tau)` grid at `Q = Q*(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaQSign {
    StrictlyNegative,
    NonNegative,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct VerdictDiagnostics {
    /// `R(0, 0)`.
    pub reproduction_at_zero: f64,
    /// `K(0)` for the analysed target.
    pub det_at_zero: f64,
    /// Largest real root of `K` found in the default scan range, if any.
    pub leading_root: Option<f64>,
    /// Whether that root is licensed as the spectral bound (true only under
    /// verified positivity).
    pub root_is_dominant: bool,
    pub positivity: PositivityCheck,
    pub eps_star_max: f64,
    pub beta_q_sign: BetaQSign,
}

#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub target: Target,
    pub verdict: Verdict,
    pub basis: VerdictBasis,
    pub diagnostics: VerdictDiagnostics,
}

/// Classify the stability of a steady state.
///
/// Trivial target: the reproduction number against one. Positive target:
/// the special-case criteria (population-independent growth/mortality with a
/// definite fertility-response sign) are tried first since they certify both
/// directions, then the determinant sign at zero for instability; anything
/// else is indeterminate. Verdicts other than indeterminate are only issued
/// when every hypothesis of the deciding criterion was verified numerically.
pub fn classify(
    rates: &RateSet,
    eq: &EquilibriumSolution,
    dgrid: &DelayGrid,
) -> Result<StabilityVerdict, SpectrumError> {
    let grid = &eq.grid;
    let zero_q = vec![0.0; grid.len()];
    let reproduction_at_zero = reproduction_number(rates, 0.0, &zero_q, grid, dgrid)?;

    let lc = linear_coefficients(rates, eq)?;
    let problem = CharProblem::assemble(rates, eq, &lc, dgrid)?;
    let positivity = positivity_check(rates, eq, dgrid)?;
    let det_at_zero = problem.det(0.0);
    let eps_star_max = lc.eps_star_max();
    let beta_q_sign = beta_q_sign_on_grid(rates, eq, dgrid)?;

    let (lo, hi) = DEFAULT_LAMBDA_RANGE;
    let scan = problem.largest_real_root(lo, hi, DEFAULT_LAMBDA_SAMPLES)?;
    let diagnostics = VerdictDiagnostics {
        reproduction_at_zero,
        det_at_zero,
        leading_root: scan.root(),
        root_is_dominant: positivity.satisfied,
        positivity,
        eps_star_max,
        beta_q_sign,
    };

    let (target, verdict, basis) = if eq.trivial {
        let r = reproduction_at_zero;
        if r < 1.0 - REPRODUCTION_UNIT_TOL {
            (
                Target::Trivial,
                Verdict::Stable,
                VerdictBasis::ReproductionBelowOne,
            )
        } else if r > 1.0 + REPRODUCTION_UNIT_TOL {
            (
                Target::Trivial,
                Verdict::Unstable,
                VerdictBasis::ReproductionAboveOne,
            )
        } else {
            (
                Target::Trivial,
                Verdict::Indeterminate,
                VerdictBasis::ReproductionNearOne,
            )
        }
    } else if !positivity.satisfied {
        (
            Target::Positive,
            Verdict::Indeterminate,
            VerdictBasis::PositivityUnverified,
        )
    } else if eps_star_max <= EPS_STAR_ZERO_TOL && beta_q_sign == BetaQSign::StrictlyNegative {
        (
            Target::Positive,
            Verdict::Stable,
            VerdictBasis::FertilityDampingMonotone,
        )
    } else if eps_star_max <= EPS_STAR_ZERO_TOL && beta_q_sign == BetaQSign::NonNegative {
        (
            Target::Positive,
            Verdict::Unstable,
            VerdictBasis::FertilityGainPositiveRoot,
        )
    } else if det_at_zero < -DET_SIGN_TOL {
        (
            Target::Positive,
            Verdict::Unstable,
            VerdictBasis::DeterminantNegativeAtZero,
        )
    } else {
        (
            Target::Positive,
            Verdict::Indeterminate,
            VerdictBasis::HypothesesNotMet,
        )
    };

    Ok(StabilityVerdict {
        target,
        verdict,
        basis,
        diagnostics,
    })
}

fn beta_q_sign_on_grid(
    rates: &RateSet,
    eq: &EquilibriumSolution,
    dgrid: &DelayGrid,
) -> Result<BetaQSign, SpectrumError> {
    let mut all_negative = true;
    let mut all_nonnegative = true;
    for (i, &s) in eq.grid.nodes().iter().enumerate() {
        let q = eq.hierarchy[i];
        for &tau in dgrid.nodes() {
            let bq = rates.beta_q_at(s, tau, q)?;
            if bq >= 0.0 {
                all_negative = false;
            }
            if bq < -POSITIVITY_TOL {
                all_nonnegative = false;
            }
        }
    }
    Ok(if all_negative {
        BetaQSign::StrictlyNegative
    } else if all_nonnegative {
        BetaQSign::NonNegative
    } else {
        BetaQSign::Mixed
    })
}

/// Convenience: classify the trivial state of a rate set.
pub fn classify_trivial(
    rates: &RateSet,
    grid: &SizeGrid,
    dgrid: &DelayGrid,
) -> Result<StabilityVerdict, SpectrumError> {
    let eq = trivial_state(rates, grid)?;
    classify(rates, &eq, dgrid)
}
