//! L2-approximation by sampled cosine coefficients on the index set
//! `A(s,M) = {k : ω_k^{-1} < M}`.

mod oracle;
mod spt;

pub use oracle::{auto_box, wce_app_oracle, OracleResult};
pub use spt::{app_spt_params, spt_constants, SptConstants};

use std::f64::consts::{LN_2, SQRT_2};

use serde::Serialize;

use crate::cosine_space::CosinePolynomial;
use crate::error::{Error, Result};
use crate::integration::{check_eps, floor_root, midpoint_cosine_sign, GridRule, MAX_POINTS};
use crate::series::{power_tail, NeumaierSum};
use crate::weights::{MultiIndex, WeightSpec};

/// Enumeration limit for index sets.
pub const MAX_MEMBERS: usize = 50_000_000;

/// `A(s, M)` together with its defining threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSet {
    pub dim: usize,
    pub m: f64,
    /// `T = ln M / ln(1/ω)`; members satisfy `Σ a_j k_j^{b_j} < T`.
    pub threshold_log: f64,
    #[serde(skip)]
    pub members: Vec<MultiIndex>,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        self.members.binary_search(k).is_ok()
    }
}

fn threshold(spec: &WeightSpec, m: f64) -> Result<(f64, f64)> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::Domain(format!("M must be a finite number > 1, got {m}")));
    }
    let t = m.ln() / spec.ln_inv_omega();
    // exponent sums this close to T are treated as ties and excluded
    Ok((t, t - 1e-12 * t.max(1.0)))
}

/// Depth-first walk over `{k : Σ a_j k_j^{b_j} < limit}` in lexicographic order.
fn walk(
    spec: &WeightSpec,
    s: usize,
    limit: f64,
    cap: usize,
    visit: &mut dyn FnMut(&[usize]),
) -> Result<usize> {
    fn rec(
        spec: &WeightSpec,
        coords: &mut Vec<usize>,
        s: usize,
        partial: f64,
        limit: f64,
        count: &mut usize,
        cap: usize,
        visit: &mut dyn FnMut(&[usize]),
    ) -> Result<()> {
        let j = coords.len();
        if j == s {
            *count += 1;
            if *count > cap {
                return Err(Error::Overflow(format!("index set exceeds {cap} members")));
            }
            visit(coords);
            return Ok(());
        }
        let mut k = 0;
        loop {
            let e = partial + spec.exponent_1d(j + 1, k);
            if k > 0 && !(e < limit) {
                break;
            }
            coords.push(k);
            rec(spec, coords, s, e, limit, count, cap, visit)?;
            coords.pop();
            k += 1;
        }
        Ok(())
    }
    let mut count = 0;
    rec(spec, &mut Vec::with_capacity(s), s, 0.0, limit, &mut count, cap, visit)?;
    Ok(count)
}

/// Enumerate `A(s, M)`, members sorted lexicographically.
pub fn index_set(spec: &WeightSpec, s: usize, m: f64) -> Result<IndexSet> {
    spec.check_dim(s)?;
    let (t, limit) = threshold(spec, m)?;
    let mut members = Vec::new();
    walk(spec, s, limit, MAX_MEMBERS, &mut |k| members.push(MultiIndex::new(k.to_vec())))?;
    Ok(IndexSet { dim: s, m, threshold_log: t, members })
}

/// `|A(s, M)|` without storing the members.
pub fn index_set_len(spec: &WeightSpec, s: usize, m: f64) -> Result<usize> {
    spec.check_dim(s)?;
    let (_, limit) = threshold(spec, m)?;
    walk(spec, s, limit, 20 * MAX_MEMBERS, &mut |_| {})
}

/// `Π_j (1 + (ln M / (a_j ln(1/ω)))^{1/b_j})`.
pub fn card_bound(spec: &WeightSpec, s: usize, m: f64) -> Result<f64> {
    spec.check_dim(s)?;
    if !(m > 1.0) {
        return Err(Error::Domain(format!("M must be > 1, got {m}")));
    }
    let lnln = m.ln().ln() - spec.ln_inv_omega().ln();
    Ok((1..=s)
        .map(|j| (((lnln - spec.ln_a(j)) / spec.b(j)).exp()).ln_1p())
        .sum::<f64>()
        .exp())
}

/// `e(n, APP; Λ^all)`: square root of the `(n+1)`-st largest weight.
pub fn wce_all_minimal(spec: &WeightSpec, s: usize, n: usize) -> Result<f64> {
    spec.check_dim(s)?;
    if n == 0 {
        return Ok(1.0);
    }
    let sorted = largest_log_weights(spec, s, n + 1)?;
    Ok((0.5 * sorted[n].0).exp())
}

/// The `count` largest weights as `(ln ω_k, k)`, descending with
/// lexicographic tie-break.
pub fn largest_log_weights(
    spec: &WeightSpec,
    s: usize,
    count: usize,
) -> Result<Vec<(f64, MultiIndex)>> {
    spec.check_dim(s)?;
    // grow the exponent limit directly; M = ω^{-limit} may overflow
    let mut limit = 1.0;
    loop {
        let mut members = Vec::new();
        walk(spec, s, limit, MAX_MEMBERS, &mut |k| members.push(MultiIndex::new(k.to_vec())))?;
        if members.len() >= count {
            let mut w = members
                .into_iter()
                .map(|k| Ok((spec.log_weight(&k)?, k)))
                .collect::<Result<Vec<_>>>()?;
            w.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            w.truncate(count);
            return Ok(w);
        }
        limit *= 2.0;
    }
}

/// Coordinate `j` of `h (±)_u l`: `h_j + l_j` for `j ∈ u`, `|h_j - l_j|` otherwise.
pub fn alias_expand(h: &MultiIndex, l: &MultiIndex, u: &[bool]) -> MultiIndex {
    assert!(h.dim() == l.dim() && h.dim() == u.len(), "alias_expand: dimension mismatch");
    MultiIndex::new(
        h.coords()
            .iter()
            .zip(l.coords())
            .zip(u)
            .map(|((&hj, &lj), &plus)| if plus { hj + lj } else { hj.abs_diff(lj) })
            .collect(),
    )
}

/// `(1/n) Σ_i c_h(x_i) c_k(x_i)` for the univariate orthonormal cosines
/// `c_0 = 1`, `c_k = √2 cos(πk·)` on the `n`-point midpoint grid; exact.
pub fn aliasing_gram_1d(h: usize, k: usize, n: u64) -> f64 {
    let m = |l: usize| midpoint_cosine_sign(l as u64, n) as f64;
    match (h, k) {
        (0, 0) => 1.0,
        (0, k) => SQRT_2 * m(k),
        (h, 0) => SQRT_2 * m(h),
        (h, k) => m(h + k) + m(h.abs_diff(k)),
    }
}

/// `S(h, k) = Π_j` [`aliasing_gram_1d`]: the sampled coefficient at `h` of the basis function `k`.
pub fn aliasing_gram(h: &MultiIndex, k: &MultiIndex, mesh: &[u64]) -> f64 {
    let mut v = 1.0;
    for ((&hj, &kj), &n) in h.coords().iter().zip(k.coords()).zip(mesh) {
        v *= aliasing_gram_1d(hj, kj, n);
        if v == 0.0 {
            break;
        }
    }
    v
}

/// Sampled coefficient at `h` predicted by the aliasing identity.
pub fn alias_coefficient(f: &CosinePolynomial, h: &MultiIndex, mesh: &[u64]) -> f64 {
    f.iter().map(|(k, c)| c * aliasing_gram(h, k, mesh)).collect::<NeumaierSum>().value()
}

/// Parameters of the sampled algorithm `A_{n,s,M}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxParams {
    pub mesh: GridRule,
    pub m: f64,
    pub eta: Option<f64>,
    pub r: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
}

impl ApproxParams {
    pub fn new(mesh: GridRule, m: f64) -> Result<Self> {
        if !(m > 1.0) {
            return Err(Error::Domain(format!("M must be > 1, got {m}")));
        }
        Ok(ApproxParams { mesh, m, eta: None, r: None, beta: None, delta: None })
    }
}

/// `√2 cos(π h (2i+1) / (2n))` (or `1` for `h = 0`) for `i < n`, angles reduced exactly.
fn cos_table(h: usize, n: u64) -> Vec<f64> {
    if h == 0 {
        return vec![1.0; n as usize];
    }
    let period = 4 * n as u128;
    (0..n as u128)
        .map(|i| {
            let r = (h as u128 * (2 * i + 1)) % period;
            SQRT_2 * (std::f64::consts::PI * r as f64 / (2 * n) as f64).cos()
        })
        .collect()
}

/// `A_{n,s,M} f`: sampled coefficients `(1/n) Σ_i f(x_i) 2^{|h|_*/2} Π cos(π h_j x_{i,j})`
/// for every `h ∈ A(s, M)`.
pub fn apply_algorithm(
    spec: &WeightSpec,
    f: &CosinePolynomial,
    params: &ApproxParams,
) -> Result<CosinePolynomial> {
    let s = f.dim();
    if params.mesh.dim() != s {
        return Err(Error::Domain(format!(
            "mesh has dimension {}, function has {s}",
            params.mesh.dim()
        )));
    }
    if params.mesh.n() > 1 << 24 {
        return Err(Error::Overflow(format!("{} sample points", params.mesh.n())));
    }
    let set = index_set(spec, s, params.m)?;
    let samples: Vec<f64> = params.mesh.points().map(|x| f.eval(&x)).collect::<Result<_>>()?;
    let mesh = params.mesh.mesh();
    let n = params.mesh.n() as f64;
    let mut out = CosinePolynomial::zero(s);
    for h in &set.members {
        let tables: Vec<Vec<f64>> =
            h.coords().iter().zip(mesh).map(|(&hj, &nj)| cos_table(hj, nj)).collect();
        let mut acc = NeumaierSum::new();
        let mut idx = vec![0usize; s];
        for &v in &samples {
            let b: f64 = idx.iter().zip(&tables).map(|(&i, t)| t[i]).product();
            acc.add(v * b);
            for j in (0..s).rev() {
                idx[j] += 1;
                if idx[j] < mesh[j] as usize {
                    break;
                }
                idx[j] = 0;
            }
        }
        out.insert(h.clone(), acc.value() / n)?;
    }
    Ok(out)
}

/// `F_n = -1 + Π_j (1 + Σ_{t≥1} ω^{a_j (t n_j)^{b_j}})`.
pub fn f_n(spec: &WeightSpec, mesh: &GridRule) -> Result<f64> {
    spec.check_dim(mesh.dim())?;
    Ok(ln_one_plus_f_n(spec, mesh.mesh()).exp_m1())
}

fn ln_one_plus_f_n(spec: &WeightSpec, mesh: &[u64]) -> f64 {
    mesh.iter()
        .enumerate()
        .map(|(i, &m)| spec.coord_tail(i + 1, m as f64).value.ln_1p())
        .collect::<NeumaierSum>()
        .value()
}

/// `ln D(s, ω, b)` with `D = 6^s Π_j (1 + ln(1/ω)^{-1/b_j})`.
pub fn ln_d_const(spec: &WeightSpec, s: usize) -> Result<f64> {
    spec.check_dim(s)?;
    let lnl = spec.ln_inv_omega().ln();
    Ok(s as f64 * 6f64.ln() + (1..=s).map(|j| (-lnl / spec.b(j)).exp().ln_1p()).sum::<f64>())
}

/// `(1/M + M^{B(s)+1} D(s,ω,b) F_n)^{1/2}`.
pub fn app_error_bound(spec: &WeightSpec, s: usize, mesh: &GridRule, m: f64) -> Result<f64> {
    if mesh.dim() != s {
        return Err(Error::Domain(format!("mesh has dimension {}, expected {s}", mesh.dim())));
    }
    if !(m >= 1.0) {
        return Err(Error::Domain(format!("M must be >= 1, got {m}")));
    }
    let bs = spec.b_partial(s)?;
    let fnv = f_n(spec, mesh)?;
    let second = if fnv == 0.0 {
        0.0
    } else {
        ((bs + 1.0) * m.ln() + ln_d_const(spec, s)? + fnv.ln()).exp()
    };
    Ok((1.0 / m + second).sqrt())
}

/// Construction with `η = (ε² / (2 D^{1/(B(s)+2)}))^{(B(s)+2)/2}`,
/// `m = max_j ⌈((2^{b_j}/a_j) ln(1 + sR/ln(1+η²)) / ln(1/ω))^{B(s)}⌉`,
/// `n_j = ⌊m^{1/(B(s) b_j)}⌋` and `M = 2/ε²`.
pub fn app_exp_params(spec: &WeightSpec, s: usize, eps: f64) -> Result<ApproxParams> {
    check_eps(eps)?;
    spec.check_dim(s)?;
    if s == 0 {
        return Err(Error::Domain("s must be positive".into()));
    }
    let bs = spec.b_partial(s)?;
    let ln_d = ln_d_const(spec, s)?;
    let ln_eta = 0.5 * (bs + 2.0) * (2.0 * eps.ln() - LN_2 - ln_d / (bs + 2.0));
    let eta = ln_eta.exp();
    let lnl = spec.ln_inv_omega().ln();
    let r = (1..=s)
        .map(|j| power_tail(spec.ln_a(j) - spec.b(j) * LN_2 + lnl, spec.b(j), 1).normalized)
        .fold(1.0, f64::max);
    // ln(1 + sR / ln(1+η²)) without underflow in η²
    let ln_log1p_eta2 = if 2.0 * ln_eta < -30.0 { 2.0 * ln_eta } else { (2.0 * ln_eta).exp().ln_1p().ln() };
    let ln_ratio = (s as f64 * r).ln() - ln_log1p_eta2;
    let big_l = ln_ratio.max(0.0) + (-ln_ratio.abs()).exp().ln_1p();
    let mut ln_m: f64 = 0.0;
    for j in 1..=s {
        let ln_base = spec.b(j) * LN_2 - spec.ln_a(j) + big_l.ln() - lnl;
        ln_m = ln_m.max(bs * ln_base);
    }
    if ln_m > (MAX_POINTS as f64).ln() {
        return Err(Error::Overflow("m exceeds 2^53".into()));
    }
    let m_int = (ln_m.exp().ceil() as u64).max(1);
    let ln_mi = (m_int as f64).ln();
    let mesh = GridRule::new((1..=s).map(|j| floor_root(ln_mi, bs * spec.b(j))).collect())?;
    Ok(ApproxParams { mesh, m: 2.0 / (eps * eps), eta: Some(eta), r: Some(r), beta: None, delta: None })
}

/// One row of an approximation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub s: usize,
    pub m: f64,
    pub cardinality: usize,
    pub mesh: String,
    pub n: u64,
    pub f_n: f64,
    pub bound: f64,
    pub oracle: Option<f64>,
    pub eps_target: Option<f64>,
    pub construction: String,
}

pub fn approx_report(
    spec: &WeightSpec,
    params: &ApproxParams,
    with_oracle: bool,
    eps_target: Option<f64>,
    construction: &str,
) -> Result<ApproxReport> {
    let s = params.mesh.dim();
    let oracle = if with_oracle {
        let set = index_set(spec, s, params.m)?;
        let bx = auto_box(spec, &params.mesh, &set)?;
        Some(wce_app_oracle(spec, &params.mesh, params.m, &bx)?.value)
    } else {
        None
    };
    Ok(ApproxReport {
        s,
        m: params.m,
        cardinality: index_set_len(spec, s, params.m)?,
        mesh: params.mesh.label(),
        n: params.mesh.n(),
        f_n: f_n(spec, &params.mesh)?,
        bound: app_error_bound(spec, s, &params.mesh, params.m)?,
        oracle,
        eps_target,
        construction: construction.to_string(),
    })
}
