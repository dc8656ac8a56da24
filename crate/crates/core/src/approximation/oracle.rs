//! Exact worst-case L2 error of `A_{n,s,M}` on a truncation box.
//!
//! With `g = ω^{-1/2} f̃` ranging over the Euclidean unit ball, the error map is
//! `G = E diag(ω^{1/2})` and `GᵀG = Λ' + U Uᵀ`, where `Λ'` holds `ω_c` for
//! `c ∉ A` (zero on `A`) and column `h ∈ A` of `U` is `ω^{1/2} ⊙ (e_h - S(h,·))`.
//! The top eigenvalue solves the secular equation `λ_max(W(λ)) = 1`,
//! `W(λ) = Σ_c u_c u_cᵀ / (λ - Λ'_c)`, which is an `|A| × |A|` problem.

use std::collections::BTreeSet;

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{alias_expand, aliasing_gram, index_set, IndexSet};
use crate::error::{Error, Result};
use crate::integration::GridRule;
use crate::series::power_tail;
use crate::weights::{MultiIndex, WeightSpec};

const CERT_REL: f64 = 1e-10;

/// Oracle value with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// Worst-case L2 error.
    pub value: f64,
    /// Top eigenvalue of the aliasing part `Λ' + UUᵀ` on the alias columns.
    pub lambda_alias: f64,
    /// `max_{k∉A} ω_k`.
    pub max_outside: f64,
    /// Number of alias columns assembled.
    pub columns: usize,
    /// Upper bound on the error contribution of frequencies outside the box.
    pub truncation: f64,
}

/// `max_{k ∉ A} ω_k`, attained on the outer boundary `{h + e_j}` of the downward closed `A`.
fn max_outside(spec: &WeightSpec, set: &IndexSet) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for h in &set.members {
        for j in 0..set.dim {
            let mut c = h.coords().to_vec();
            c[j] += 1;
            let k = MultiIndex::new(c);
            if !set.contains(&k) {
                best = best.max(spec.log_weight(&k)?);
            }
        }
    }
    Ok(best.exp())
}

/// Certified bound on `Σ_{k outside box} ω_k`.
fn mass_outside(spec: &WeightSpec, bx: &MultiIndex) -> f64 {
    let lnl = spec.ln_inv_omega().ln();
    let s = bx.dim();
    let full: Vec<f64> = (1..=s).map(|j| 1.0 + spec.coord_tail(j, 1.0).upper()).collect();
    let mut total = 0.0;
    for j in 1..=s {
        let beyond = power_tail(spec.ln_a(j) + lnl, spec.b(j), bx.coords()[j - 1] as u64 + 1).upper();
        let others: f64 = (1..=s).filter(|&i| i != j).map(|i| full[i - 1]).product();
        total += beyond * others;
    }
    total
}

fn truncation_term(spec: &WeightSpec, bx: &MultiIndex, card: usize) -> f64 {
    let s = bx.dim() as i32;
    (1.0 + (card as f64).sqrt() * 2f64.powi(s)) * mass_outside(spec, bx).sqrt()
}

/// Smallest box found by doubling that contains `A` and passes the
/// truncation certificate.
pub fn auto_box(spec: &WeightSpec, mesh: &GridRule, set: &IndexSet) -> Result<MultiIndex> {
    let s = set.dim;
    let lower = max_outside(spec, set)?.sqrt();
    let mut k: Vec<usize> = (0..s)
        .map(|j| {
            let hmax = set.members.iter().map(|h| h.coords()[j]).max().unwrap_or(0);
            hmax + 2 * mesh.mesh()[j] as usize
        })
        .collect();
    for _ in 0..400 {
        let bx = MultiIndex::new(k.clone());
        if truncation_term(spec, &bx, set.len()) <= CERT_REL * lower {
            return Ok(bx);
        }
        // grow the coordinate with the heaviest neglected tail
        let lnl = spec.ln_inv_omega().ln();
        let j = (0..s)
            .max_by(|&a, &b| {
                let ta = power_tail(spec.ln_a(a + 1) + lnl, spec.b(a + 1), k[a] as u64 + 1).upper();
                let tb = power_tail(spec.ln_a(b + 1) + lnl, spec.b(b + 1), k[b] as u64 + 1).upper();
                ta.total_cmp(&tb)
            })
            .unwrap_or(0);
        k[j] += (k[j] / 2).max(1);
        if k[j] > 1 << 24 {
            break;
        }
    }
    Err(Error::BoxTooSmall("no box of manageable size passes the truncation certificate".into()))
}

/// Worst-case L2 error of `A_{n,s,M}` (largest singular value of the error map),
/// certified up to the neglected mass outside `truncation_box`.
pub fn wce_app_oracle(
    spec: &WeightSpec,
    mesh: &GridRule,
    m: f64,
    truncation_box: &MultiIndex,
) -> Result<OracleResult> {
    let s = mesh.dim();
    if truncation_box.dim() != s {
        return Err(Error::Domain("truncation box and mesh differ in dimension".into()));
    }
    let set = index_set(spec, s, m)?;
    if set.members.iter().any(|h| !h.le_coordwise(truncation_box)) {
        return Err(Error::BoxTooSmall("box does not contain A(s,M)".into()));
    }
    let outside = max_outside(spec, &set)?;
    let truncation = truncation_term(spec, truncation_box, set.len());
    if truncation > CERT_REL * outside.sqrt() {
        return Err(Error::BoxTooSmall(format!(
            "neglected mass bound {truncation:e} exceeds {CERT_REL:e} of the result"
        )));
    }
    let (lambda_alias, columns) = alias_eigenvalue(spec, mesh, &set, truncation_box)?;
    Ok(OracleResult {
        value: lambda_alias.max(outside).sqrt(),
        lambda_alias,
        max_outside: outside,
        columns,
        truncation,
    })
}

/// Top eigenvalue of `Λ' + UUᵀ` restricted to the alias columns inside the box.
pub(crate) fn alias_eigenvalue(
    spec: &WeightSpec,
    mesh: &GridRule,
    set: &IndexSet,
    truncation_box: &MultiIndex,
) -> Result<(f64, usize)> {
    let s = set.dim;
    // alias columns: h (±)_u l for l in the dual grid, inside the box
    let nm: Vec<usize> = mesh.mesh().iter().map(|&v| v as usize).collect();
    let kb = truncation_box.coords();
    let columns: BTreeSet<MultiIndex> = set
        .members
        .par_iter()
        .map(|h| {
            let mut out = BTreeSet::new();
            let tmax: Vec<usize> = (0..s).map(|j| (kb[j] + h.coords()[j]) / (2 * nm[j])).collect();
            let mut t = vec![0usize; s];
            loop {
                let l = MultiIndex::new((0..s).map(|j| 2 * t[j] * nm[j]).collect());
                for mask in 0..(1u32 << s) {
                    let u: Vec<bool> = (0..s).map(|j| mask >> j & 1 == 1).collect();
                    let c = alias_expand(h, &l, &u);
                    if c.le_coordwise(truncation_box) {
                        out.insert(c);
                    }
                }
                let mut j = 0;
                while j < s {
                    t[j] += 1;
                    if t[j] <= tmax[j] {
                        break;
                    }
                    t[j] = 0;
                    j += 1;
                }
                if j == s {
                    break;
                }
            }
            out
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });

    let na = set.len();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut lams: Vec<f64> = Vec::new();
    for c in &columns {
        let lw = spec.log_weight(c)?;
        if lw.exp() == 0.0 {
            continue;
        }
        let sw = (0.5 * lw).exp();
        let u = DVector::from_iterator(
            na,
            set.members.iter().map(|h| {
                let delta = if h == c { 1.0 } else { 0.0 };
                sw * (delta - aliasing_gram(h, c, mesh.mesh()))
            }),
        );
        if u.norm_squared() == 0.0 {
            continue;
        }
        lams.push(if set.contains(c) { 0.0 } else { lw.exp() });
        cols.push(u);
    }

    let lambda_alias = if cols.is_empty() {
        0.0
    } else {
        let u = DMatrix::from_columns(&cols);
        let frob = u.norm_squared();
        let pole = lams.iter().copied().fold(0.0, f64::max);
        // I - W(λ) is positive definite exactly when λ exceeds the top eigenvalue
        let below_top = |lambda: f64| {
            let mut scaled = u.clone();
            for (mut col, &lam) in scaled.column_iter_mut().zip(&lams) {
                col *= 1.0 / (lambda - lam).sqrt();
            }
            let w = &scaled * scaled.transpose();
            Cholesky::new(DMatrix::<f64>::identity(na, na) - w).is_none()
        };
        let mut lo = pole;
        let mut hi = pole + frob * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        while below_top(hi) {
            hi *= 2.0;
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
                break;
            }
            if below_top(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    Ok((lambda_alias, columns.len()))
}
