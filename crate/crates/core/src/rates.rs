//! The model's vital-rate bundle.
//!
//! A [`RateSet`] carries the four rate expressions (growth `gamma`, mortality
//! `mu`, fertility `beta`, hierarchy weight `w`), the scalars `alpha`
//! (hierarchy strength), `theta` (maximum delay) and `m` (maximum size), and
//! the precompiled partial derivatives the linearised analysis needs:
//! `gamma_s`, `gamma_P`, `gamma_sP`, `mu_P` and `beta_Q`.

use crate::numerics::{DelayGrid, SizeGrid};
use crate::ratedsl::{diff_expr, parse_expr, Bindings, Compiled, EvalError, Expr, ParseError, Var};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RateError {
    #[error("in rate '{name}': {source}")]
    Parse {
        name: &'static str,
        source: ParseError,
    },
    #[error("evaluating {name}({args}): {source}")]
    Eval {
        name: &'static str,
        args: String,
        source: EvalError,
    },
    #[error("alpha must lie in [0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("theta must be positive, got {0}")]
    ThetaNotPositive(f64),
    #[error("maximum size must be positive, got {0}")]
    MaxSizeNotPositive(f64),
    #[error("{rate} must be {requirement} on the sampled grid; found {value} at {at}")]
    SignViolation {
        rate: &'static str,
        requirement: &'static str,
        value: f64,
        at: String,
    },
}

/// One rate: source tree plus its compiled form.
#[derive(Debug, Clone)]
pub struct Rate {
    expr: Expr,
    compiled: Compiled,
}

impl Rate {
    pub fn new(expr: Expr) -> Rate {
        let compiled = Compiled::new(&expr);
        Rate { expr, compiled }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        self.compiled.eval(b)
    }
}

/// Vital rates plus scalars and precompiled partials.
#[derive(Debug, Clone)]
pub struct RateSet {
    pub gamma: Rate,
    pub mu: Rate,
    pub beta: Rate,
    pub w: Rate,
    pub gamma_s: Rate,
    pub gamma_p: Rate,
    pub gamma_sp: Rate,
    pub mu_p: Rate,
    pub beta_q: Rate,
    pub alpha: f64,
    pub theta: f64,
    pub m: f64,
}

impl RateSet {
    pub fn new(
        gamma: Expr,
        mu: Expr,
        beta: Expr,
        w: Expr,
        alpha: f64,
        theta: f64,
        m: f64,
    ) -> Result<RateSet, RateError> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(RateError::AlphaOutOfRange(alpha));
        }
        if !(theta > 0.0) {
            return Err(RateError::ThetaNotPositive(theta));
        }
        if !(m > 0.0) {
            return Err(RateError::MaxSizeNotPositive(m));
        }
        let gamma_s = diff_expr(&gamma, Var::Size);
        let gamma_p = diff_expr(&gamma, Var::Population);
        let gamma_sp = diff_expr(&gamma_s, Var::Population);
        let mu_p = diff_expr(&mu, Var::Population);
        let beta_q = diff_expr(&beta, Var::Hierarchy);
        Ok(RateSet {
            gamma: Rate::new(gamma),
            mu: Rate::new(mu),
            beta: Rate::new(beta),
            w: Rate::new(w),
            gamma_s: Rate::new(gamma_s),
            gamma_p: Rate::new(gamma_p),
            gamma_sp: Rate::new(gamma_sp),
            mu_p: Rate::new(mu_p),
            beta_q: Rate::new(beta_q),
            alpha,
            theta,
            m,
        })
    }

    pub fn from_strs(
        gamma: &str,
        mu: &str,
        beta: &str,
        w: &str,
        alpha: f64,
        theta: f64,
        m: f64,
    ) -> Result<RateSet, RateError> {
        let parse = |name: &'static str, text: &str| {
            parse_expr(text).map_err(|source| RateError::Parse { name, source })
        };
        RateSet::new(
            parse("gamma", gamma)?,
            parse("mu", mu)?,
            parse("beta", beta)?,
            parse("w", w)?,
            alpha,
            theta,
            m,
        )
    }

    fn eval_sp(&self, rate: &Rate, name: &'static str, s: f64, p: f64) -> Result<f64, RateError> {
        let b = Bindings::new().with(Var::Size, s).with(Var::Population, p);
        rate.eval(&b).map_err(|source| RateError::Eval {
            name,
            args: format!("s={s}, P={p}"),
            source,
        })
    }

    pub fn gamma_at(&self, s: f64, p: f64) -> Result<f64, RateError> {
        self.eval_sp(&self.gamma, "gamma", s, p)
    }

    pub fn mu_at(&self, s: f64, p: f64) -> Result<f64, RateError> {
        self.eval_sp(&self.mu, "mu", s, p)
    }

    pub fn gamma_s_at(&self, s: f64, p: f64) -> Result<f64, RateError> {
        self.eval_sp(&self.gamma_s, "gamma_s", s, p)
    }

    pub fn gamma_p_at(&self, s: f64, p: f64) -> Result<f64, RateError> {
        self.eval_sp(&self.gamma_p, "gamma_P", s, p)
    }

    pub fn gamma_sp_at(&self, s: f64, p: f64) -> Result<f64, RateError> {
        self.eval_sp(&self.gamma_sp, "gamma_sP", s, p)
    }

    pub fn mu_p_at(&self, s: f64, p: f64) -> Result<f64, RateError> {
        self.eval_sp(&self.mu_p, "mu_P", s, p)
    }

    pub fn w_at(&self, s: f64) -> Result<f64, RateError> {
        let b = Bindings::new().with(Var::Size, s);
        self.w.eval(&b).map_err(|source| RateError::Eval {
            name: "w",
            args: format!("s={s}"),
            source,
        })
    }

    pub fn beta_at(&self, s: f64, tau: f64, q: f64) -> Result<f64, RateError> {
        let b = Bindings::new()
            .with(Var::Size, s)
            .with(Var::Tau, tau)
            .with(Var::Hierarchy, q);
        self.beta.eval(&b).map_err(|source| RateError::Eval {
            name: "beta",
            args: format!("s={s}, tau={tau}, Q={q}"),
            source,
        })
    }

    pub fn beta_q_at(&self, s: f64, tau: f64, q: f64) -> Result<f64, RateError> {
        let b = Bindings::new()
            .with(Var::Size, s)
            .with(Var::Tau, tau)
            .with(Var::Hierarchy, q);
        self.beta_q.eval(&b).map_err(|source| RateError::Eval {
            name: "beta_Q",
            args: format!("s={s}, tau={tau}, Q={q}"),
            source,
        })
    }

    /// Sample-based sign validation: `w > 0` and `gamma > 0` for the probe
    /// population sizes, `mu >= 0` and `beta >= 0` at `Q = 0`. Returns
    /// warnings for soft issues (the boundary normalisation `gamma(0, P) = 1`
    /// the recruitment assignment relies on).
    pub fn validate_on_grid(
        &self,
        grid: &SizeGrid,
        dgrid: &DelayGrid,
        p_probes: &[f64],
    ) -> Result<Vec<String>, RateError> {
        let mut warnings = Vec::new();
        for &s in grid.nodes() {
            let w = self.w_at(s)?;
            if !(w > 0.0) {
                return Err(RateError::SignViolation {
                    rate: "w",
                    requirement: "strictly positive",
                    value: w,
                    at: format!("s={s}"),
                });
            }
            for &p in p_probes {
                let g = self.gamma_at(s, p)?;
                if !(g > 0.0) {
                    return Err(RateError::SignViolation {
                        rate: "gamma",
                        requirement: "strictly positive",
                        value: g,
                        at: format!("s={s}, P={p}"),
                    });
                }
                let mu = self.mu_at(s, p)?;
                if mu < 0.0 {
                    return Err(RateError::SignViolation {
                        rate: "mu",
                        requirement: "non-negative",
                        value: mu,
                        at: format!("s={s}, P={p}"),
                    });
                }
            }
            for &tau in dgrid.nodes() {
                let beta = self.beta_at(s, tau, 0.0)?;
                if beta < 0.0 {
                    return Err(RateError::SignViolation {
                        rate: "beta",
                        requirement: "non-negative",
                        value: beta,
                        at: format!("s={s}, tau={tau}, Q=0"),
                    });
                }
            }
        }
        for &p in p_probes {
            let g0 = self.gamma_at(0.0, p)?;
            if (g0 - 1.0).abs() > 1e-9 {
                warnings.push(format!(
                    "gamma(0, P={p}) = {g0}; the boundary condition assigns the recruitment \
                     integral directly as the density at s = 0, which assumes gamma(0, P) = 1"
                ));
                break;
            }
        }
        Ok(warnings)
    }
}
