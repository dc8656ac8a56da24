//! Tractability verdicts, convergence-rate fits and information-complexity tables.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::approximation::{app_error_bound, app_exp_params, app_spt_params, index_set_len};
use crate::error::{Error, Result};
use crate::integration::{
    check_eps, exp_rule_params, min_error_search, spt_rule_params, wce_midpoint_exact,
};
use crate::weights::{SeqGen, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Integration,
    Approximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoClass {
    All,
    Std,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Integration => "integration",
            Problem::Approximation => "approximation",
        }
    }
}

impl InfoClass {
    pub fn as_str(self) -> &'static str {
        match self {
            InfoClass::All => "all",
            InfoClass::Std => "std",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ternary {
    Yes,
    No,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TractabilityVerdict {
    pub problem: Problem,
    pub info_class: InfoClass,
    pub exp: bool,
    pub uexp: bool,
    pub ec_wt: Ternary,
    pub ec_pt: bool,
    pub ec_spt: bool,
    /// `1/B(s)` for `s = 1, …, min(s_max, 16)`.
    pub p_star_s: Vec<RateAt>,
    pub p_star: Option<f64>,
    pub tau_star_bounds: Option<(f64, f64)>,
    pub b_total: Option<f64>,
    pub alpha_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateAt {
    pub s: usize,
    pub p_star: f64,
}

fn p_star_table(spec: &WeightSpec) -> Vec<RateAt> {
    (1..=spec.s_max().min(16))
        .map(|s| RateAt { s, p_star: 1.0 / spec.b_partial(s).expect("s within s_max") })
        .collect()
}

/// `lim a_j = ∞`, decided from the generator family.
pub fn a_unbounded(spec: &WeightSpec) -> bool {
    spec.a_gen().tends_to_infinity()
}

/// `lim a_j 2^{b_j} = ∞`. Supported generators either diverge or are
/// eventually constant, so this holds iff one of the two sequences diverges.
pub fn a_times_2b_unbounded(spec: &WeightSpec) -> bool {
    spec.a_gen().tends_to_infinity() || spec.b_gen().tends_to_infinity()
}

pub fn classify_integration(spec: &WeightSpec) -> TractabilityVerdict {
    let b = spec.b_total().finite();
    let ec_wt = if a_unbounded(spec) {
        Ternary::Yes
    } else if a_times_2b_unbounded(spec) {
        Ternary::Undetermined
    } else {
        Ternary::No
    };
    TractabilityVerdict {
        problem: Problem::Integration,
        info_class: InfoClass::Std,
        exp: true,
        uexp: b.is_some(),
        ec_wt,
        ec_pt: b.is_some(),
        ec_spt: b.is_some(),
        p_star_s: p_star_table(spec),
        p_star: b.map(|b| 1.0 / b),
        tau_star_bounds: b.map(|b| (b, b)),
        b_total: b,
        alpha_star: spec.alpha_star(),
    }
}

pub fn classify_approximation(spec: &WeightSpec, info: InfoClass) -> TractabilityVerdict {
    let b = spec.b_total().finite();
    let alpha = spec.alpha_star();
    let ec_spt = b.is_some() && alpha > 0.0;
    let nu = match info {
        InfoClass::All => LN_2,
        InfoClass::Std => 3f64.ln(),
    };
    let tau = b.filter(|_| ec_spt).map(|b| {
        if alpha.is_infinite() {
            (b, b)
        } else {
            (b.max(LN_2 / alpha), b + nu / alpha)
        }
    });
    TractabilityVerdict {
        problem: Problem::Approximation,
        info_class: info,
        exp: true,
        uexp: b.is_some(),
        ec_wt: if a_unbounded(spec) { Ternary::Yes } else { Ternary::No },
        ec_pt: ec_spt,
        ec_spt,
        p_star_s: p_star_table(spec),
        p_star: b.map(|b| 1.0 / b),
        tau_star_bounds: tau,
        b_total: b,
        alpha_star: alpha,
    }
}

/// Model used by [`fit_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateForm {
    /// `ln ln(1/e) = c + p ln n`.
    LogLog,
    /// `ln(1/e) = α + β n^p`.
    Offset,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub p: f64,
    /// Root-mean-square residual of the fitted model.
    pub residual: f64,
    pub rows_used: usize,
}

/// Noise floor below which errors are not used for fitting.
pub const FIT_FLOOR: f64 = 1e-14;

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icept - slope * a).powi(2)).sum();
    (slope, icept, (rss / n).sqrt())
}

/// Fit the exponent `p` in `e ≈ q^{n^p}` to a table of `(n, e)`.
/// Rows with `n < 2`, `e ≥ 1` or `e <` [`FIT_FLOOR`] are dropped.
pub fn fit_rate(table: &[(f64, f64)], form: RateForm) -> Result<RateFit> {
    let mut rows: Vec<(f64, f64)> = table.to_vec();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if rows.windows(2).any(|w| w[1].1 > w[0].1) {
        return Err(Error::Fit("errors increase with n".into()));
    }
    rows.retain(|&(n, e)| n >= 2.0 && e >= FIT_FLOOR && e < 1.0);
    // plateaus of a running minimum: keep the smallest n of each level
    rows.dedup_by(|later, first| later.1 == first.1);
    if rows.len() < 5 {
        return Err(Error::Fit(format!("{} usable rows, need at least 5", rows.len())));
    }
    let y: Vec<f64> = rows.iter().map(|&(_, e)| -e.ln()).collect();
    match form {
        RateForm::LogLog => {
            let x: Vec<f64> = rows.iter().map(|&(n, _)| n.ln()).collect();
            let yy: Vec<f64> = y.iter().map(|v| v.ln()).collect();
            let (p, _, residual) = ols(&x, &yy);
            Ok(RateFit { p, residual, rows_used: rows.len() })
        }
        RateForm::Offset => {
            let resid = |p: f64| {
                let x: Vec<f64> = rows.iter().map(|&(n, _)| n.powf(p)).collect();
                ols(&x, &y).2
            };
            let (lo_p, hi_p) = (0.01, 8.0);
            let steps = 800;
            let grid: Vec<f64> =
                (0..=steps).map(|i| lo_p * (hi_p / lo_p as f64).powf(i as f64 / steps as f64)).collect();
            let best = (0..grid.len())
                .min_by(|&a, &b| resid(grid[a]).total_cmp(&resid(grid[b])))
                .unwrap_or(0);
            let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(steps)]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..100 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if resid(c) < resid(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let p = 0.5 * (a + b);
            Ok(RateFit { p, residual: resid(p), rows_used: rows.len() })
        }
    }
}

/// One cell of a complexity table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub problem: Problem,
    pub class: InfoClass,
    pub s: usize,
    pub eps: f64,
    pub n: Option<u64>,
    pub construction: String,
    pub resolved: bool,
}

fn integration_cell(spec: &WeightSpec, s: usize, eps: f64, budget: u64) -> Option<(u64, String)> {
    let mut best: Option<(u64, String)> = None;
    let mut offer = |n: u64, name: &str| {
        if best.as_ref().is_none_or(|b| n < b.0) {
            best = Some((n, name.to_string()));
        }
    };
    if let Ok((_, rule)) = exp_rule_params(spec, s, eps) {
        if wce_midpoint_exact(spec, &rule).is_ok_and(|e| e <= eps) {
            offer(rule.n(), "exp_rule");
        }
    }
    if let Ok(rule) = spt_rule_params(spec, s, eps) {
        if wce_midpoint_exact(spec, &rule).is_ok_and(|e| e <= eps) {
            offer(rule.n(), "spt_rule");
        }
    }
    if budget > 0 {
        if let Ok(rows) = min_error_search(spec, s, budget) {
            if let Some(r) = rows.iter().find(|r| r.e_exact <= eps) {
                offer(r.mesh.iter().product(), "search");
            }
        }
    }
    best
}

fn std_cell(spec: &WeightSpec, s: usize, eps: f64) -> Option<(u64, String)> {
    let mut best: Option<(u64, String)> = None;
    if let Ok(p) = app_exp_params(spec, s, eps) {
        if app_error_bound(spec, s, &p.mesh, p.m).is_ok_and(|b| b <= eps) {
            best = Some((p.mesh.n(), "app_exp".to_string()));
        }
    }
    if let Ok(p) = app_spt_params(spec, s, eps, None, None) {
        if best.as_ref().is_none_or(|b| p.mesh.n() < b.0) {
            best = Some((p.mesh.n(), "app_spt".to_string()));
        }
    }
    best
}

/// Upper bounds on `n(ε, s)` for every `(s, ε)` cell, sorted by `(s, ε, n)`.
/// `budget` bounds the exhaustive mesh search used for integration.
pub fn complexity_table(
    spec: &WeightSpec,
    problem: Problem,
    info: InfoClass,
    eps_list: &[f64],
    s_list: &[usize],
    budget: u64,
) -> Result<Vec<ComplexityRow>> {
    for &eps in eps_list {
        check_eps(eps)?;
    }
    for &s in s_list {
        spec.check_dim(s)?;
        if s == 0 {
            return Err(Error::Domain("s must be positive".into()));
        }
    }
    let cells: Vec<(usize, f64)> =
        s_list.iter().flat_map(|&s| eps_list.iter().map(move |&e| (s, e))).collect();
    let mut rows: Vec<ComplexityRow> = cells
        .par_iter()
        .map(|&(s, eps)| {
            let found = match (problem, info) {
                (Problem::Integration, _) => integration_cell(spec, s, eps, budget),
                (Problem::Approximation, InfoClass::All) => {
                    index_set_len(spec, s, 1.0 / (eps * eps))
                        .ok()
                        .map(|n| (n as u64, "spectral".to_string()))
                }
                (Problem::Approximation, InfoClass::Std) => std_cell(spec, s, eps),
            };
            let class = if problem == Problem::Integration { InfoClass::Std } else { info };
            match found {
                Some((n, construction)) => {
                    ComplexityRow { problem, class, s, eps, n: Some(n), construction, resolved: true }
                }
                None => ComplexityRow {
                    problem,
                    class,
                    s,
                    eps,
                    n: None,
                    construction: "none".into(),
                    resolved: false,
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.s.cmp(&b.s)
            .then(a.eps.total_cmp(&b.eps))
            .then(a.n.unwrap_or(u64::MAX).cmp(&b.n.unwrap_or(u64::MAX)))
    });
    Ok(rows)
}

/// Short description of a generator, for reports.
pub fn describe(gen: &SeqGen) -> String {
    let params: Vec<String> = gen.params().iter().map(|v| format!("{v}")).collect();
    format!("{}({})", gen.kind(), params.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn spec(a: SeqGen, b: SeqGen) -> WeightSpec {
        WeightSpec::new(0.5, a, b, 10).unwrap()
    }

    #[test]
    fn integration_verdicts() {
        let v = classify_integration(&spec(SeqGen::Constant { c: 1.0 }, SeqGen::Exponential { c: 1.0, r: 2.0 }));
        assert!(v.uexp && v.ec_pt && v.ec_spt);
        assert_eq!(v.p_star, Some(1.0));
        assert_eq!(v.tau_star_bounds, Some((1.0, 1.0)));
        assert_eq!(v.ec_wt, Ternary::Undetermined);
        let v = classify_integration(&spec(SeqGen::Polynomial { c: 1.0, p: 1.0 }, SeqGen::Constant { c: 1.0 }));
        assert_eq!(v.ec_wt, Ternary::Yes);
        assert!(!v.uexp);
        let v = classify_integration(&spec(SeqGen::Constant { c: 1.0 }, SeqGen::Constant { c: 1.0 }));
        assert_eq!(v.ec_wt, Ternary::No);
        assert_eq!(v.p_star_s[2], RateAt { s: 3, p_star: 1.0 / 3.0 });
    }

    #[test]
    fn approximation_verdicts() {
        let v = classify_approximation(
            &spec(SeqGen::Exponential { c: 1.0, r: E }, SeqGen::Exponential { c: 1.0, r: 2.0 }),
            InfoClass::Std,
        );
        assert!(v.ec_spt);
        let (lo, hi) = v.tau_star_bounds.unwrap();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - (1.0 + 3f64.ln())).abs() < 1e-14);
        let v = classify_approximation(
            &spec(SeqGen::Polynomial { c: 1.0, p: 2.0 }, SeqGen::Exponential { c: 1.0, r: 2.0 }),
            InfoClass::All,
        );
        assert_eq!(v.ec_wt, Ternary::Yes);
        assert!(!v.ec_spt && v.tau_star_bounds.is_none());
        let v = classify_approximation(
            &spec(SeqGen::ExpQuadratic { c: 1.0, r: E }, SeqGen::Exponential { c: 1.0, r: 2.0 }),
            InfoClass::Std,
        );
        assert_eq!(v.tau_star_bounds, Some((1.0, 1.0)));
    }

    #[test]
    fn fit_recovers_planted_exponent() {
        let rows: Vec<(f64, f64)> = (2..60).map(|n| (n as f64, 0.9f64.powf((n as f64).powf(0.5)))).collect();
        let f = fit_rate(&rows, RateForm::LogLog).unwrap();
        assert!((f.p - 0.5).abs() < 0.01, "{}", f.p);
        let f = fit_rate(&rows, RateForm::Offset).unwrap();
        assert!((f.p - 0.5).abs() < 0.01, "{}", f.p);
    }

    #[test]
    fn fit_rejects_bad_tables() {
        let rows = vec![(2.0, 0.1), (3.0, 0.2), (4.0, 0.01), (5.0, 0.001), (6.0, 1e-4)];
        assert!(matches!(fit_rate(&rows, RateForm::LogLog), Err(Error::Fit(_))));
        assert!(matches!(fit_rate(&rows[..3], RateForm::LogLog), Err(Error::Fit(_))));
    }

    #[test]
    fn spectral_complexity() {
        let sp = spec(SeqGen::Constant { c: 1.0 }, SeqGen::Constant { c: 1.0 });
        let eps: Vec<f64> = (1..12).map(|m| 2f64.powf(-(m as f64) / 2.0) * (1.0 - 1e-9)).collect();
        let rows = complexity_table(&sp, Problem::Approximation, InfoClass::All, &eps, &[1], 0).unwrap();
        for r in rows {
            let m = (-2.0 * r.eps.log2()).floor() as u64;
            assert_eq!(r.n, Some(m + 1));
        }
    }
}
