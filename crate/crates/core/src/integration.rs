//! Tensor-product midpoint rules and their worst-case integration errors.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::cosine_space::check_point;
use crate::error::{Error, Result};
use crate::series::NeumaierSum;
use crate::weights::WeightSpec;

/// Largest mesh product handled exactly.
pub const MAX_POINTS: u64 = 1 << 53;

/// The centered regular grid with `n_j` midpoints in coordinate `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GridRule {
    mesh: Vec<u64>,
    n: u64,
}

impl GridRule {
    pub fn new(mesh: Vec<u64>) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::Domain("mesh must have at least one coordinate".into()));
        }
        if mesh.contains(&0) {
            return Err(Error::Domain("mesh entries must be positive".into()));
        }
        let n = mesh
            .iter()
            .try_fold(1u64, |acc, &m| acc.checked_mul(m))
            .filter(|&n| n <= MAX_POINTS)
            .ok_or_else(|| Error::Overflow(format!("mesh {mesh:?} has too many points")))?;
        Ok(GridRule { mesh, n })
    }

    pub fn mesh(&self) -> &[u64] {
        &self.mesh
    }

    /// `n = Π n_j`.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mesh.len()
    }

    /// Points `((2i_1+1)/(2n_1), …)` in lexicographic order of `(i_1, …, i_s)`.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let s = self.mesh.len();
        let mut idx = vec![0u64; s];
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let p = idx
                .iter()
                .zip(&self.mesh)
                .map(|(&i, &m)| (2 * i + 1) as f64 / (2 * m) as f64)
                .collect();
            done = true;
            for j in (0..s).rev() {
                idx[j] += 1;
                if idx[j] < self.mesh[j] {
                    done = false;
                    break;
                }
                idx[j] = 0;
            }
            Some(p)
        })
    }

    /// Mesh written as `n1xn2x...`.
    pub fn label(&self) -> String {
        self.mesh.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("x")
    }
}

pub fn midpoint_rule(mesh: &[u64]) -> Result<GridRule> {
    GridRule::new(mesh.to_vec())
}

/// `(1/n) Σ_{j<n} cos(π l (2j+1) / (2n))`, with the angle reduced exactly
/// modulo `2π` before evaluation.
pub fn midpoint_cosine_sum(l: u64, n: u64) -> f64 {
    assert!(n >= 1);
    let period = 4 * n as u128;
    let mut acc = NeumaierSum::new();
    for j in 0..n as u128 {
        let r = (l as u128 * (2 * j + 1)) % period;
        acc.add((PI * r as f64 / (2 * n) as f64).cos());
    }
    acc.value() / n as f64
}

/// Closed form of [`midpoint_cosine_sum`]: `(-1)^t` when `l = 2tn`, else `0`.
pub fn midpoint_cosine_sign(l: u64, n: u64) -> i32 {
    if l % (2 * n) == 0 {
        if (l / (2 * n)) % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

fn check_rule(spec: &WeightSpec, rule: &GridRule) -> Result<()> {
    spec.check_dim(rule.dim())
}

/// `ln(1 + 2 Σ_{t≥1} ω^{a_j (2 t n_j)^{b_j}})` for each coordinate.
fn exact_log_factors(spec: &WeightSpec, mesh: &[u64]) -> Vec<f64> {
    mesh.iter()
        .enumerate()
        .map(|(i, &m)| (2.0 * spec.coord_tail(i + 1, 2.0 * m as f64).value).ln_1p())
        .collect()
}

/// Squared worst-case error of the midpoint product rule.
pub fn wce_midpoint_exact_sq(spec: &WeightSpec, rule: &GridRule) -> Result<f64> {
    check_rule(spec, rule)?;
    let sum: NeumaierSum = exact_log_factors(spec, rule.mesh()).into_iter().collect();
    Ok(sum.value().exp_m1())
}

/// `e(T_n) = (-1 + Π_j (1 + 2 Σ_t ω^{a_j (2 t n_j)^{b_j}}))^{1/2}`.
pub fn wce_midpoint_exact(spec: &WeightSpec, rule: &GridRule) -> Result<f64> {
    Ok(wce_midpoint_exact_sq(spec, rule)?.sqrt())
}

/// `(-1 + Π_j (1 + ω^{a_j (2 n_j)^{b_j}} C(a_*, b_*)))^{1/2}`.
pub fn wce_upper_bound(spec: &WeightSpec, rule: &GridRule) -> Result<f64> {
    check_rule(spec, rule)?;
    let c = spec.c_star();
    let lw = spec.ln_inv_omega();
    let sum: NeumaierSum = rule
        .mesh()
        .iter()
        .enumerate()
        .map(|(i, &m)| (c * (-spec.exponent_1d(i + 1, 2 * m as usize) * lw).exp()).ln_1p())
        .collect();
    Ok(sum.value().exp_m1().sqrt())
}

/// Per-coordinate matrix of `ln(1 + 2 S_j(x, y))` on the distinct values of one coordinate.
struct UnivariateCache {
    index: Vec<usize>,
    log1p_2s: Vec<f64>,
    size: usize,
}

impl UnivariateCache {
    fn new(spec: &WeightSpec, j: usize, values: impl Iterator<Item = f64>) -> Self {
        let mut lookup: HashMap<u64, usize> = HashMap::new();
        let mut distinct = Vec::new();
        let index = values
            .map(|v| {
                *lookup.entry(v.to_bits()).or_insert_with(|| {
                    distinct.push(v);
                    distinct.len() - 1
                })
            })
            .collect();
        let size = distinct.len();
        let weights = oracle_weights(spec, j);
        let mut cos_sums: HashMap<u64, f64> = HashMap::new();
        let mut c = |z: f64| *cos_sums.entry(z.to_bits()).or_insert_with(|| cosine_sum(&weights, z));
        let mut log1p_2s = vec![0.0; size * size];
        for a in 0..size {
            for b in a..size {
                // cos(πkx) cos(πky) = (cos(πk(x-y)) + cos(πk(x+y))) / 2
                let (x, y) = (distinct[a], distinct[b]);
                let v = (c((x - y).abs()) + c(x + y)).ln_1p();
                log1p_2s[a * size + b] = v;
                log1p_2s[b * size + a] = v;
            }
        }
        UnivariateCache { index, log1p_2s, size }
    }

    fn get(&self, p: usize, q: usize) -> f64 {
        self.log1p_2s[self.index[p] * self.size + self.index[q]]
    }
}

/// `ω^{a_j k^{b_j}}` for `k ≥ 1` until the weights fall below `1e-30` (at
/// least as far as the certified truncation point).
fn oracle_weights(spec: &WeightSpec, j: usize) -> Vec<f64> {
    const FLOOR: f64 = 1e-30;
    const CAP: usize = 1_000_000;
    let certified = spec.coord_tail(j, 1.0).terms_used as usize;
    let lw = spec.ln_inv_omega();
    let mut out = Vec::new();
    for k in 1..=CAP {
        let w = (-spec.exponent_1d(j, k) * lw).exp();
        if (w < FLOOR && k > certified) || w == 0.0 {
            break;
        }
        out.push(w);
    }
    out
}

/// `Σ_k w_k cos(πkz)`. Cosines follow a rotation recurrence, resynchronised
/// every 32 terms.
fn cosine_sum(weights: &[f64], z: f64) -> f64 {
    let (st, ct) = (PI * z).sin_cos();
    let mut acc = NeumaierSum::new();
    let (mut c, mut s) = (1.0, 0.0);
    for (i, &w) in weights.iter().enumerate() {
        let k = i + 1;
        if k % 32 == 0 {
            (s, c) = (PI * k as f64 * z).sin_cos();
        } else {
            (c, s) = (c * ct - s * st, s * ct + c * st);
        }
        acc.add(w * c);
    }
    acc.value()
}

/// Worst-case error of the linear rule `Σ_k α_k f(x_k)` computed from the
/// kernel double sum
/// `e² = (1 - Σα)² + Σ_k Σ_l α_k α_l (K(x_k, x_l) - 1)`.
pub fn wce_pointset(spec: &WeightSpec, points: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    if points.len() != weights.len() {
        return Err(Error::Domain(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    if points.is_empty() {
        return Ok(1.0);
    }
    let s = points[0].len();
    spec.check_dim(s)?;
    for p in points {
        if p.len() != s {
            return Err(Error::Domain("points differ in dimension".into()));
        }
        check_point(p)?;
    }
    let caches: Vec<UnivariateCache> = (0..s)
        .map(|j| UnivariateCache::new(spec, j + 1, points.iter().map(|p| p[j])))
        .collect();
    let n = points.len();
    let rows: Vec<NeumaierSum> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut acc = NeumaierSum::new();
            for q in 0..n {
                let lsum: f64 = caches.iter().map(|c| c.get(p, q)).sum();
                acc.add(weights[p] * weights[q] * lsum.exp_m1());
            }
            acc
        })
        .collect();
    let mut total = NeumaierSum::new();
    for r in rows {
        total.add(r.value());
    }
    let defect = 1.0 - weights.iter().copied().collect::<NeumaierSum>().value();
    total.add(defect * defect);
    Ok(total.value().max(0.0).sqrt())
}

/// `ω^{Σ a_j (2t_j)^{b_j}} Π_j (5(1+t_j))^{-1}`, valid for `1 ≤ n ≤ Π(1+t_j)`.
pub fn wce_lower_bound(spec: &WeightSpec, t: &[u64], n: u64) -> Result<f64> {
    spec.check_dim(t.len())?;
    if t.is_empty() || t.contains(&0) {
        return Err(Error::Domain("t must be a nonempty list of positive integers".into()));
    }
    let cap = t.iter().fold(1u128, |acc, &tj| acc.saturating_mul(1 + tj as u128));
    if n == 0 || n as u128 > cap {
        return Err(Error::Range(format!("n = {n} outside [1, {cap}]")));
    }
    Ok(lower_bound_log(spec, t).exp())
}

fn lower_bound_log(spec: &WeightSpec, t: &[u64]) -> f64 {
    let lw = spec.ln_inv_omega();
    let mut acc = NeumaierSum::new();
    for (i, &tj) in t.iter().enumerate() {
        acc.add(-spec.exponent_1d(i + 1, 2 * tj as usize) * lw);
        acc.add(-(5.0 * (1 + tj) as f64).ln());
    }
    acc.value()
}

/// A feasible `t` for the lower bound at `n`, grown greedily from `(1,…,1)`
/// by the increment that costs the least.
pub fn lower_bound_for_n(spec: &WeightSpec, s: usize, n: u64) -> Result<(Vec<u64>, f64)> {
    spec.check_dim(s)?;
    if s == 0 || n == 0 {
        return Err(Error::Domain("lower bound needs s ≥ 1 and n ≥ 1".into()));
    }
    let mut t = vec![1u64; s];
    let mut cap = 1u128 << s.min(100);
    while cap < n as u128 {
        let base = lower_bound_log(spec, &t);
        let mut best = (f64::NEG_INFINITY, 0);
        for j in 0..s {
            t[j] += 1;
            let v = lower_bound_log(spec, &t) - base;
            t[j] -= 1;
            if v > best.0 {
                best = (v, j);
            }
        }
        let j = best.1;
        cap = cap / (1 + t[j] as u128) * (2 + t[j] as u128);
        t[j] += 1;
    }
    let v = wce_lower_bound(spec, &t, n)?;
    Ok((t, v))
}

/// Exact, upper and lower error values of one rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub s: usize,
    pub mesh: String,
    pub n: u64,
    pub e_exact: Option<f64>,
    pub e_upper: f64,
    pub e_lower: Option<f64>,
    pub eps_target: Option<f64>,
    pub construction: String,
}

pub fn error_report(
    spec: &WeightSpec,
    rule: &GridRule,
    eps_target: Option<f64>,
    construction: &str,
) -> Result<ErrorReport> {
    let e_lower = lower_bound_for_n(spec, rule.dim(), rule.n()).ok().map(|(_, v)| v);
    Ok(ErrorReport {
        s: rule.dim(),
        mesh: rule.label(),
        n: rule.n(),
        e_exact: Some(wce_midpoint_exact(spec, rule)?),
        e_upper: wce_upper_bound(spec, rule)?,
        e_lower,
        eps_target,
        construction: construction.to_string(),
    })
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Range(format!("eps must lie in (0,1), got {eps}")))
    }
}

/// Largest `k ≥ 1` with `k^p ≤ m`, exact for integer-valued roots.
pub(crate) fn floor_root(ln_m: f64, p: f64) -> u64 {
    let fits = |k: u64| p * (k as f64).ln() <= ln_m + 1e-12;
    let mut k = ((ln_m / p).exp().floor() as u64).max(1);
    while fits(k + 1) {
        k += 1;
    }
    while k > 1 && !fits(k) {
        k -= 1;
    }
    k
}

fn to_count(ln_v: f64, what: &str) -> Result<u64> {
    if ln_v > (MAX_POINTS as f64).ln() {
        return Err(Error::Overflow(format!("{what} exceeds 2^53")));
    }
    Ok((ln_v.exp().ceil() as u64).max(1))
}

/// Construction with `m = max_j ⌈((1/a_j) ln(C s / ln(1+ε²)) / ln(1/ω))^{B(s)}⌉`
/// and `n_j = ⌊m^{1/(B(s) b_j)}⌋`.
pub fn exp_rule_params(spec: &WeightSpec, s: usize, eps: f64) -> Result<(u64, GridRule)> {
    check_eps(eps)?;
    spec.check_dim(s)?;
    if s == 0 {
        return Err(Error::Domain("s must be positive".into()));
    }
    let bs = spec.b_partial(s)?;
    let big_l = (spec.c_star() * s as f64 / eps.powi(2).ln_1p()).ln();
    let mut m = 1u64;
    if big_l > 0.0 {
        for j in 1..=s {
            let ln_base = big_l.ln() - spec.ln_a(j) - spec.ln_inv_omega().ln();
            m = m.max(to_count(bs * ln_base, "m")?);
        }
    }
    let ln_m = (m as f64).ln();
    let mesh = (1..=s).map(|j| floor_root(ln_m, bs * spec.b(j))).collect();
    Ok((m, GridRule::new(mesh)?))
}

/// Construction with `n_j = ⌈(ln(C π² j² / (6 ln(1+ε²))) / (a_j 2^{b_j} ln(1/ω)))^{1/b_j}⌉`.
pub fn spt_rule_params(spec: &WeightSpec, s: usize, eps: f64) -> Result<GridRule> {
    check_eps(eps)?;
    spec.check_dim(s)?;
    if s == 0 {
        return Err(Error::Domain("s must be positive".into()));
    }
    let c = spec.c_star();
    let denom = 6.0 * eps.powi(2).ln_1p();
    let mut mesh = Vec::with_capacity(s);
    for j in 1..=s {
        let num = (c * PI * PI * (j * j) as f64 / denom).ln();
        let bj = spec.b(j);
        let nj = if num <= 0.0 {
            1
        } else {
            let ln_base =
                num.ln() - spec.ln_a(j) - bj * std::f64::consts::LN_2 - spec.ln_inv_omega().ln();
            to_count(ln_base / bj, "n_j")?
        };
        mesh.push(nj);
    }
    GridRule::new(mesh)
}

/// One row of [`min_error_search`]: the best mesh using at most `n` points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRow {
    pub n: u64,
    pub mesh: Vec<u64>,
    pub e_exact: f64,
}

/// Upper limit on the search budget.
pub const MAX_BUDGET: u64 = 10_000_000;

/// For every `n ≤ budget`, the midpoint product rule with at most `n` points
/// and least exact error. All ordered factorizations are scanned; ties go to
/// the lexicographically smallest mesh.
pub fn min_error_search(spec: &WeightSpec, s: usize, budget: u64) -> Result<Vec<SearchRow>> {
    spec.check_dim(s)?;
    if s == 0 || budget == 0 {
        return Err(Error::Domain("min_error_search needs s ≥ 1 and budget ≥ 1".into()));
    }
    if budget > MAX_BUDGET {
        return Err(Error::Range(format!("budget {budget} exceeds {MAX_BUDGET}")));
    }
    let nb = budget as usize;
    // factors[j][m] = ln(1 + 2 tail_j(2m))
    let factors: Vec<Vec<f64>> = (1..=s)
        .into_par_iter()
        .map(|j| {
            let mut v = vec![0.0; nb + 1];
            for (m, slot) in v.iter_mut().enumerate().skip(1) {
                *slot = (2.0 * spec.coord_tail(j, 2.0 * m as f64).value).ln_1p();
            }
            v
        })
        .collect();

    type Best = Vec<Option<(f64, Vec<u64>)>>;
    fn better(a: &(f64, Vec<u64>), b: &(f64, Vec<u64>)) -> bool {
        a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
    }
    fn offer(best: &mut Best, n: usize, cand: (f64, &[u64])) {
        let replace = match &best[n] {
            None => true,
            Some(cur) => cand.0 < cur.0 || (cand.0 == cur.0 && cand.1 < cur.1.as_slice()),
        };
        if replace {
            best[n] = Some((cand.0, cand.1.to_vec()));
        }
    }
    fn descend(
        factors: &[Vec<f64>],
        budget: usize,
        mesh: &mut Vec<u64>,
        prod: usize,
        logsum: f64,
        best: &mut Best,
    ) {
        let j = mesh.len();
        if j == factors.len() {
            offer(best, prod, (logsum, mesh));
            return;
        }
        for m in 1..=budget / prod {
            mesh.push(m as u64);
            descend(factors, budget, mesh, prod * m, logsum + factors[j][m], best);
            mesh.pop();
        }
    }

    let merge = |mut a: Best, b: Best| -> Best {
        for (slot, cand) in a.iter_mut().zip(b) {
            if let Some(c) = cand {
                if slot.as_ref().is_none_or(|cur| better(&c, cur)) {
                    *slot = Some(c);
                }
            }
        }
        a
    };
    let best: Best = (1..=nb)
        .into_par_iter()
        .fold(
            || vec![None; nb + 1],
            |mut best, m1| {
                let mut mesh = vec![m1 as u64];
                descend(&factors, nb, &mut mesh, m1, factors[0][m1], &mut best);
                best
            },
        )
        .reduce(|| vec![None; nb + 1], merge);

    let mut rows = Vec::with_capacity(nb);
    let mut running: Option<(f64, Vec<u64>)> = None;
    for (n, cand) in best.into_iter().enumerate().skip(1) {
        if let Some(c) = cand {
            if running.as_ref().is_none_or(|r| better(&c, r)) {
                running = Some(c);
            }
        }
        let (logsum, mesh) = running.clone().expect("n = 1 always has the mesh (1,…,1)");
        rows.push(SearchRow { n: n as u64, mesh, e_exact: logsum.exp_m1().sqrt() });
    }
    Ok(rows)
}
