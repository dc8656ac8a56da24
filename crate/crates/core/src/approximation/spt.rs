//! Odd-mesh construction for uniform-in-`s` accuracy when `B < ∞` and `α* > 0`.

use std::f64::consts::{E, LN_2};

use serde::Serialize;

use super::{card_bound, ApproxParams};
use crate::error::{Error, Result};
use crate::integration::{check_eps, GridRule, MAX_POINTS};
use crate::series::{power_tail, NeumaierSum};
use crate::weights::WeightSpec;

const GRID_POINTS: usize = 10_000;
const X_MAX: f64 = 1e12;
const MAX_DOUBLINGS: usize = 400;

/// Numerical constants of the construction for one `(β, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SptConstants {
    pub beta: f64,
    pub delta: f64,
    pub a1: f64,
    pub a2: f64,
    /// `A = 2 max(A₁, A₂)`.
    pub a: f64,
    pub j_star: usize,
    /// `sup_x √x γ̄(x)`.
    pub c: f64,
    /// `sup_x √x (1/x + card(x)(e-1) γ̄(x))`.
    pub d: f64,
}

fn resolve_beta_delta(
    spec: &WeightSpec,
    beta: Option<f64>,
    delta: Option<f64>,
) -> Result<(f64, f64)> {
    let alpha = spec.alpha_star();
    if !(alpha > 0.0) {
        return Err(Error::Classification("construction needs alpha* > 0".into()));
    }
    if !spec.b_total().is_finite() {
        return Err(Error::Classification("construction needs B < infinity".into()));
    }
    let beta = beta.unwrap_or(0.9);
    let delta = delta.unwrap_or(if alpha.is_finite() { 0.9 * alpha } else { 1.0 });
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Range(format!("beta must lie in (0,1), got {beta}")));
    }
    if !(delta > 0.0 && delta < alpha && delta.is_finite()) {
        return Err(Error::Range(format!("delta must lie in (0, {alpha}), got {delta}")));
    }
    Ok((beta, delta))
}

struct Gamma<'a> {
    spec: &'a WeightSpec,
    beta: f64,
    delta: f64,
    a: f64,
    j_star: usize,
}

impl Gamma<'_> {
    /// Index from which `n_j = 1` is guaranteed at `M = x`.
    fn cutoff(&self, x: f64) -> usize {
        let v = (x.ln().ln() - self.spec.ln_inv_omega().ln()) / (self.beta * self.delta);
        let j = if v > 0.0 { v.ceil() as usize } else { 0 };
        j.max(self.j_star)
    }

    /// `γ̄(x) = A (Σ_{j<J} x^{-a_j^{1-β}} + Σ_{j≥J} x^{-exp((1-β)δj)})`.
    fn gamma(&self, x: f64) -> f64 {
        let lx = x.ln();
        let jc = self.cutoff(x);
        let mut acc = NeumaierSum::new();
        for j in 1..jc {
            acc.add((-lx * ((1.0 - self.beta) * self.spec.ln_a(j)).exp()).exp());
        }
        let g = (1.0 - self.beta) * self.delta;
        let term = |j: usize| (-lx * (g * j as f64).exp()).exp();
        let mut j = jc.max(1);
        loop {
            let t = term(j);
            acc.add(t);
            let ratio = term(j + 1) / t;
            if t == 0.0 || (ratio <= 0.5 && t * ratio / (1.0 - ratio) <= 1e-17 * acc.value()) {
                acc.add(if t == 0.0 { 0.0 } else { t * ratio / (1.0 - ratio) });
                break;
            }
            j += 1;
        }
        self.a * acc.value()
    }

    /// Box bound on `|A(s, x)|` over all `j` with `a_j < ln x / ln(1/ω)`.
    fn card(&self, x: f64) -> f64 {
        let spec = self.spec;
        let lnl = spec.ln_inv_omega();
        let ln_t = x.ln().ln() - lnl.ln();
        let mut ln_card = 0.0;
        let mut j = 1;
        while spec.ln_a(j) < ln_t {
            ln_card += ((ln_t - spec.ln_a(j)) / spec.b(j)).exp().ln_1p();
            j += 1;
        }
        ln_card.exp()
    }
}

/// Certified supremum of `f` over `[lo, X_MAX]` on a log grid, with the
/// envelope `f_env(x_i, x_{i+1})` bounding `f` on each cell.
fn grid_sup(lo: f64, env: impl Fn(f64, f64) -> f64, what: &str) -> Result<f64> {
    if !(lo < X_MAX) {
        return Err(Error::Numerical(format!("{what}: search interval is empty")));
    }
    let step = (X_MAX / lo).ln() / (GRID_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..GRID_POINTS).map(|i| lo * (step * i as f64).exp()).collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..GRID_POINTS - 1 {
        let v = env(xs[i], xs[i + 1]);
        if v > best.0 {
            best = (v, i);
        }
    }
    if best.1 + 2 >= GRID_POINTS {
        return Err(Error::Numerical(format!("{what}: supremum not attained below {X_MAX:e}")));
    }
    Ok(best.0)
}

pub fn spt_constants(
    spec: &WeightSpec,
    beta: Option<f64>,
    delta: Option<f64>,
) -> Result<SptConstants> {
    let (beta, delta) = resolve_beta_delta(spec, beta, delta)?;
    let lnl = spec.ln_inv_omega().ln();
    let (a_star, b_star) = (spec.a_star(), spec.b_star());
    let t1 = power_tail(a_star.ln() + b_star * LN_2 + lnl, b_star, 1);
    let a1 = (t1.log_value + a_star * spec.ln_inv_omega()).exp();
    let a2 = power_tail(a_star.ln() + lnl, b_star, 1).normalized;
    let a = 2.0 * a1.max(a2);
    let j_star = spec.j_star(delta)?;
    let g = Gamma { spec, beta, delta, a, j_star };
    // √x is increasing, γ̄ nonincreasing and card nondecreasing in x
    let c = grid_sup(2.0, |x0, x1| x1.sqrt() * g.gamma(x0), "C")?;
    let d = grid_sup(
        (c * c).max(2.0),
        |x0, x1| x1.sqrt() * (1.0 / x0 + g.card(x1) * (E - 1.0) * g.gamma(x0)),
        "D",
    )?;
    Ok(SptConstants { beta, delta, a1, a2, a, j_star, c, d })
}

/// `n_j = 2 ⌈(ln M / (a_j^β ln(1/ω)))^{1/b_j}⌉ - 1`.
fn odd_mesh(spec: &WeightSpec, s: usize, m: f64, beta: f64) -> Result<GridRule> {
    let lnl = spec.ln_inv_omega().ln();
    let mut mesh = Vec::with_capacity(s);
    for j in 1..=s {
        let ln_base = m.ln().ln() - beta * spec.ln_a(j) - lnl;
        let v = ln_base / spec.b(j);
        if v > (MAX_POINTS as f64).ln() {
            return Err(Error::Overflow("n_j exceeds 2^53".into()));
        }
        let half = (v.exp().ceil() as u64).max(1);
        mesh.push(2 * half - 1);
    }
    GridRule::new(mesh)
}

/// `1/M + |A(s,M)| (exp(Σ_j ln(1 + A ω^{a_j ((n_j+1)/2)^{b_j}})) - 1)` and `Σ_j A ω^{…}`.
fn direct_chain(spec: &WeightSpec, s: usize, m: f64, mesh: &GridRule, a: f64) -> Result<(f64, f64)> {
    let lw = spec.ln_inv_omega();
    let mut logsum = NeumaierSum::new();
    let mut gamma = NeumaierSum::new();
    for (i, &nj) in mesh.mesh().iter().enumerate() {
        let j = i + 1;
        let half = (nj + 1) as f64 / 2.0;
        let e = (spec.ln_a(j) + spec.b(j) * half.ln()).exp();
        let t = a * (-e * lw).exp();
        gamma.add(t);
        logsum.add(t.ln_1p());
    }
    let card = card_bound(spec, s, m)?;
    Ok((1.0 / m + card * logsum.value().exp_m1(), gamma.value()))
}

/// Odd-mesh parameters with `M = max(C², D² ε^{-4}, 2)`, doubled until the
/// dimension-specific error chain is below `ε²`.
pub fn app_spt_params(
    spec: &WeightSpec,
    s: usize,
    eps: f64,
    beta: Option<f64>,
    delta: Option<f64>,
) -> Result<ApproxParams> {
    check_eps(eps)?;
    spec.check_dim(s)?;
    if s == 0 {
        return Err(Error::Domain("s must be positive".into()));
    }
    let k = spt_constants(spec, beta, delta)?;
    let mut m = (k.c * k.c).max(k.d * k.d / eps.powi(4)).max(2.0);
    for _ in 0..MAX_DOUBLINGS {
        let mesh = odd_mesh(spec, s, m, k.beta)?;
        let (chain, gamma) = direct_chain(spec, s, m, &mesh, k.a)?;
        if chain <= eps * eps && gamma <= 1.0 {
            return Ok(ApproxParams {
                mesh,
                m,
                eta: None,
                r: None,
                beta: Some(k.beta),
                delta: Some(k.delta),
            });
        }
        m *= 2.0;
    }
    Err(Error::Numerical("error chain did not reach eps within the doubling budget".into()))
}
