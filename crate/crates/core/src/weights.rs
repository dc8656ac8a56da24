//! Weight sequences `a`, `b`, the base `ω` and the product weights
//! `ω_k = ω^{Σ_j a_j k_j^{b_j}}`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{compensated_sum, tail_series_ln, NeumaierSum, SeriesSum};

/// Generator for an infinite positive sequence `v_1, v_2, ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeqGen {
    /// `v_j = c`
    Constant { c: f64 },
    /// `v_j = c·j^p`
    Polynomial { c: f64, p: f64 },
    /// `v_j = c·r^j`
    Exponential { c: f64, r: f64 },
    /// `v_j = c·r^{j²}`
    ExpQuadratic { c: f64, r: f64 },
    /// Explicit prefix; the last value repeats forever.
    List { values: Vec<f64> },
}

/// Limit of a series that may diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesLimit {
    Finite(f64),
    Divergent,
}

impl SeriesLimit {
    pub fn finite(self) -> Option<f64> {
        match self {
            SeriesLimit::Finite(v) => Some(v),
            SeriesLimit::Divergent => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, SeriesLimit::Finite(_))
    }
}

/// Riemann zeta for real `p > 1` (Euler–Maclaurin with 64 explicit terms).
pub(crate) fn zeta(p: f64) -> f64 {
    const N: f64 = 64.0;
    // B_2k / (2k)!
    const COEF: [f64; 5] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
    ];
    let head = compensated_sum((1..64).map(|j| (j as f64).powf(-p)));
    let mut acc = NeumaierSum::new();
    acc.add(head);
    acc.add(N.powf(1.0 - p) / (p - 1.0));
    acc.add(0.5 * N.powf(-p));
    // rising factorial p (p+1) ... (p+2k-2)
    let mut rising = p;
    let mut power = N.powf(-p - 1.0);
    for (k, c) in COEF.iter().enumerate() {
        acc.add(c * rising * power);
        let m = 2.0 * k as f64;
        rising *= (p + m + 1.0) * (p + m + 2.0);
        power /= N * N;
    }
    acc.value()
}

impl SeqGen {
    pub fn kind(&self) -> &'static str {
        match self {
            SeqGen::Constant { .. } => "constant",
            SeqGen::Polynomial { .. } => "polynomial",
            SeqGen::Exponential { .. } => "exponential",
            SeqGen::ExpQuadratic { .. } => "exp-quadratic",
            SeqGen::List { .. } => "list",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            SeqGen::Constant { c } => vec![*c],
            SeqGen::Polynomial { c, p } => vec![*c, *p],
            SeqGen::Exponential { c, r } | SeqGen::ExpQuadratic { c, r } => vec![*c, *r],
            SeqGen::List { values } => values.clone(),
        }
    }

    pub fn from_kind(kind: &str, params: &[f64]) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "sequence kind '{kind}' takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        Ok(match kind {
            "constant" => {
                want(1)?;
                SeqGen::Constant { c: params[0] }
            }
            "polynomial" => {
                want(2)?;
                SeqGen::Polynomial { c: params[0], p: params[1] }
            }
            "exponential" => {
                want(2)?;
                SeqGen::Exponential { c: params[0], r: params[1] }
            }
            "exp-quadratic" => {
                want(2)?;
                SeqGen::ExpQuadratic { c: params[0], r: params[1] }
            }
            "list" => {
                if params.is_empty() {
                    return Err(Error::InvalidSpec("list sequence needs at least one value".into()));
                }
                SeqGen::List { values: params.to_vec() }
            }
            other => return Err(Error::InvalidSpec(format!("unknown sequence kind '{other}'"))),
        })
    }

    fn check_params(&self, name: &str) -> Result<()> {
        let ps = self.params();
        if ps.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("{name}: parameters must be finite")));
        }
        let positive_c = match self {
            SeqGen::List { values } => values.iter().all(|&v| v > 0.0),
            _ => ps[0] > 0.0,
        };
        if !positive_c {
            return Err(Error::InvalidSpec(format!("{name}: values must be positive")));
        }
        Ok(())
    }

    /// `v_j` for `j ≥ 1`; may be `+inf` for fast-growing generators.
    pub fn value(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        let jf = j as f64;
        match self {
            SeqGen::Constant { c } => *c,
            SeqGen::Polynomial { c, p } => c * jf.powf(*p),
            SeqGen::Exponential { c, r } => c * r.powf(jf),
            SeqGen::ExpQuadratic { .. } => self.ln_value(j).exp(),
            SeqGen::List { values } => values[(j - 1).min(values.len() - 1)],
        }
    }

    /// `ln v_j`, finite even where `v_j` overflows.
    pub fn ln_value(&self, j: usize) -> f64 {
        let jf = j as f64;
        match self {
            SeqGen::Constant { c } => c.ln(),
            SeqGen::Polynomial { c, p } => c.ln() + p * jf.ln(),
            SeqGen::Exponential { c, r } => c.ln() + jf * r.ln(),
            SeqGen::ExpQuadratic { c, r } => c.ln() + jf * jf * r.ln(),
            SeqGen::List { .. } => self.value(j).ln(),
        }
    }

    /// `inf_j v_j`.
    pub fn infimum(&self) -> f64 {
        match self {
            SeqGen::Constant { c } => *c,
            SeqGen::Polynomial { c, p } => {
                if *p >= 0.0 {
                    *c
                } else {
                    0.0
                }
            }
            SeqGen::Exponential { c, r } | SeqGen::ExpQuadratic { c, r } => {
                if *r >= 1.0 {
                    c * r
                } else {
                    0.0
                }
            }
            SeqGen::List { values } => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        match self {
            SeqGen::Constant { .. } => true,
            SeqGen::Polynomial { p, .. } => *p >= 0.0,
            SeqGen::Exponential { r, .. } | SeqGen::ExpQuadratic { r, .. } => *r >= 1.0,
            SeqGen::List { values } => values.windows(2).all(|w| w[0] <= w[1]),
        }
    }

    /// Whether `v_j → ∞`. Every supported generator either diverges to
    /// infinity or is eventually constant.
    pub fn tends_to_infinity(&self) -> bool {
        match self {
            SeqGen::Constant { .. } | SeqGen::List { .. } => false,
            SeqGen::Polynomial { p, .. } => *p > 0.0,
            SeqGen::Exponential { r, .. } | SeqGen::ExpQuadratic { r, .. } => *r > 1.0,
        }
    }

    /// `Σ_j 1/v_j`.
    pub fn reciprocal_sum(&self) -> SeriesLimit {
        match self {
            SeqGen::Constant { .. } | SeqGen::List { .. } => SeriesLimit::Divergent,
            SeqGen::Polynomial { c, p } => {
                if *p > 1.0 {
                    SeriesLimit::Finite(zeta(*p) / c)
                } else {
                    SeriesLimit::Divergent
                }
            }
            SeqGen::Exponential { c, r } => {
                if *r > 1.0 {
                    SeriesLimit::Finite(1.0 / (c * (r - 1.0)))
                } else {
                    SeriesLimit::Divergent
                }
            }
            SeqGen::ExpQuadratic { r, .. } => {
                if *r > 1.0 {
                    let mut acc = NeumaierSum::new();
                    for j in 1.. {
                        let t = (-self.ln_value(j)).exp();
                        acc.add(t);
                        // terms shrink super-geometrically once j² ln r dominates
                        if t < 1e-18 * acc.value() && (2 * j + 1) as f64 * r.ln() > 1.0 {
                            break;
                        }
                    }
                    SeriesLimit::Finite(acc.value())
                } else {
                    SeriesLimit::Divergent
                }
            }
        }
    }

    /// `liminf_j ln(v_j) / j`.
    pub fn log_growth_rate(&self) -> f64 {
        match self {
            SeqGen::Constant { .. } | SeqGen::Polynomial { .. } | SeqGen::List { .. } => 0.0,
            SeqGen::Exponential { r, .. } => r.ln().max(0.0),
            SeqGen::ExpQuadratic { r, .. } => {
                if *r > 1.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}

/// A multi-index `k ∈ N_0^s` with its count of nonzero coordinates cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    coords: Vec<usize>,
    nnz: usize,
}

impl MultiIndex {
    pub fn new(coords: Vec<usize>) -> Self {
        let nnz = coords.iter().filter(|&&c| c != 0).count();
        MultiIndex { coords, nnz }
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex { coords: vec![0; dim], nnz: 0 }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// `|k|_*`, the number of nonzero coordinates.
    pub fn nonzero_count(&self) -> usize {
        self.nnz
    }

    pub fn is_zero(&self) -> bool {
        self.nnz == 0
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le_coordwise(&self, other: &MultiIndex) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.coords.cmp(&other.coords)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex::new(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Domain(format!("bad multi-index '{s}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiIndex::new(coords))
    }
}

/// Weight specification `(a, b, ω)` with a dimension cap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSpec {
    omega: f64,
    a: SeqGen,
    b: SeqGen,
    s_max: usize,
}

impl WeightSpec {
    pub fn new(omega: f64, a: SeqGen, b: SeqGen, s_max: usize) -> Result<Self> {
        if !(omega > 0.0 && omega < 1.0) {
            return Err(Error::InvalidSpec(format!("omega must lie in (0,1), got {omega}")));
        }
        if s_max == 0 {
            return Err(Error::InvalidSpec("s_max must be positive".into()));
        }
        a.check_params("a")?;
        b.check_params("b")?;
        if !a.is_nondecreasing() {
            return Err(Error::InvalidSpec("a must be nondecreasing".into()));
        }
        if !(b.infimum() > 0.0) {
            return Err(Error::InvalidSpec("inf_j b_j must be positive".into()));
        }
        let spec = WeightSpec { omega, a, b, s_max };
        for j in 1..=s_max {
            let bj = spec.b(j);
            if !bj.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "b_{j} overflows f64; lower s_max below {j}"
                )));
            }
        }
        Ok(spec)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `ln(1/ω) > 0`.
    pub fn ln_inv_omega(&self) -> f64 {
        -self.omega.ln()
    }

    pub fn a_gen(&self) -> &SeqGen {
        &self.a
    }

    pub fn b_gen(&self) -> &SeqGen {
        &self.b
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    /// `a_j`, 1-based.
    pub fn a(&self, j: usize) -> f64 {
        self.a.value(j)
    }

    pub fn ln_a(&self, j: usize) -> f64 {
        self.a.ln_value(j)
    }

    /// `b_j`, 1-based.
    pub fn b(&self, j: usize) -> f64 {
        self.b.value(j)
    }

    /// `a_* = a_1`.
    pub fn a_star(&self) -> f64 {
        self.a(1)
    }

    /// `b_* = inf_j b_j`.
    pub fn b_star(&self) -> f64 {
        self.b.infimum()
    }

    /// Non-fatal remarks about the spec.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.a_star() < 1.0 {
            w.push(format!("a_1 = {} < 1 (several bounds assume a_* >= 1)", self.a_star()));
        }
        w
    }

    pub fn check_dim(&self, s: usize) -> Result<()> {
        if s > self.s_max {
            Err(Error::DimensionTooLarge { dim: s, s_max: self.s_max })
        } else {
            Ok(())
        }
    }

    /// `a_j k^{b_j}` for a single coordinate (`0` at `k = 0`).
    pub fn exponent_1d(&self, j: usize, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            (self.ln_a(j) + self.b(j) * (k as f64).ln()).exp()
        }
    }

    /// `Σ_j a_j k_j^{b_j}`.
    pub fn exponent(&self, k: &MultiIndex) -> Result<f64> {
        self.check_dim(k.dim())?;
        Ok(compensated_sum(
            k.coords().iter().enumerate().map(|(i, &kj)| self.exponent_1d(i + 1, kj)),
        ))
    }

    /// `ln ω_k`; `-inf` when the weight is exactly zero in the limit.
    pub fn log_weight(&self, k: &MultiIndex) -> Result<f64> {
        let e = self.exponent(k)?;
        Ok(if e == 0.0 { 0.0 } else { -e * self.ln_inv_omega() })
    }

    /// `ω_k`, flushing to zero below the representable range.
    pub fn weight(&self, k: &MultiIndex) -> Result<f64> {
        Ok(self.log_weight(k)?.exp())
    }

    /// `Σ_{l≥1} ω^{a_j (scale·l)^{b_j}}` for coordinate `j`.
    pub fn coord_tail(&self, j: usize, scale: f64) -> SeriesSum {
        tail_series_ln(self.ln_a(j), self.b(j), self.omega, scale)
    }

    /// `C(a_*, b_*) = 2 ω^{-a_*} Σ_{l≥1} ω^{a_* l^{b_*}}`.
    pub fn c_star(&self) -> f64 {
        let t = tail_series_ln(self.a_star().ln(), self.b_star(), self.omega, 1.0);
        // the normalized sum is exactly ω^{-a_*} times the series
        2.0 * t.normalized
    }

    /// `B(s) = Σ_{j≤s} 1/b_j`.
    pub fn b_partial(&self, s: usize) -> Result<f64> {
        self.check_dim(s)?;
        Ok(compensated_sum((1..=s).map(|j| 1.0 / self.b(j))))
    }

    /// `B = Σ_j 1/b_j`.
    pub fn b_total(&self) -> SeriesLimit {
        self.b.reciprocal_sum()
    }

    /// `α* = liminf_j ln(a_j)/j`.
    pub fn alpha_star(&self) -> f64 {
        self.a.log_growth_rate()
    }

    /// Smallest `j0` with `a_j ≥ e^{δ j}` for every `j ≥ j0`; closed form per
    /// generator family. Fails unless `0 < δ < α*`.
    pub fn j_star(&self, delta: f64) -> Result<usize> {
        let alpha = self.alpha_star();
        if !(delta > 0.0 && delta < alpha) {
            return Err(Error::Classification(format!(
                "j*_delta needs 0 < delta < alpha* (delta = {delta}, alpha* = {alpha})"
            )));
        }
        let holds = |j: usize| self.ln_a(j) >= delta * j as f64;
        match &self.a {
            SeqGen::Exponential { c, r } => {
                // ln c + j ln r ≥ δ j  ⇔  j ≥ -ln c / (ln r - δ)
                let slope = r.ln() - delta;
                let mut j0 = if c.ln() >= 0.0 {
                    1
                } else {
                    ((-c.ln() / slope).ceil() as usize).max(1)
                };
                while !holds(j0) {
                    j0 += 1;
                }
                while j0 > 1 && holds(j0 - 1) {
                    j0 -= 1;
                }
                Ok(j0)
            }
            SeqGen::ExpQuadratic { r, .. } => {
                // f(j) = ln a_j - δ j is convex; past the vertex it only grows
                let lr = r.ln();
                let vertex = ((delta / lr - 1.0) / 2.0).ceil().max(1.0) as usize;
                let mut j0 = 1;
                let mut j = 1;
                loop {
                    if !holds(j) {
                        j0 = j + 1;
                    } else if j >= vertex {
                        break;
                    }
                    j += 1;
                }
                Ok(j0)
            }
            _ => Err(Error::Classification("alpha* = 0 for this generator".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    fn spec(omega: f64, a: SeqGen, b: SeqGen) -> WeightSpec {
        WeightSpec::new(omega, a, b, 16).unwrap()
    }

    fn list(v: &[f64]) -> SeqGen {
        SeqGen::List { values: v.to_vec() }
    }

    #[test]
    fn weight_examples() {
        let s = spec(0.5, list(&[1.0, 2.0]), list(&[1.0, 1.0]));
        assert_eq!(s.log_weight(&MultiIndex::zeros(2)).unwrap(), 0.0);
        assert_eq!(s.weight(&MultiIndex::zeros(2)).unwrap(), 1.0);
        assert_relative_eq!(s.weight(&vec![1, 1].into()).unwrap(), 0.125, max_relative = 1e-15);
        let s = spec(0.5, SeqGen::Constant { c: 1.0 }, SeqGen::Constant { c: 2.0 });
        assert_relative_eq!(s.weight(&vec![3].into()).unwrap(), 1.0 / 512.0, max_relative = 1e-15);
    }

    #[test]
    fn dimension_cap() {
        let s = WeightSpec::new(0.5, SeqGen::Constant { c: 1.0 }, SeqGen::Constant { c: 1.0 }, 2)
            .unwrap();
        assert!(matches!(
            s.log_weight(&MultiIndex::zeros(3)),
            Err(Error::DimensionTooLarge { dim: 3, s_max: 2 })
        ));
    }

    #[test]
    fn weight_flushes_to_zero() {
        let s = spec(0.5, SeqGen::ExpQuadratic { c: 1.0, r: E }, SeqGen::Constant { c: 3.0 });
        let w = s.weight(&vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 7].into()).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn c_star_examples() {
        let one = SeqGen::Constant { c: 1.0 };
        assert_relative_eq!(spec(0.5, one.clone(), one.clone()).c_star(), 4.0, max_relative = 1e-14);
        let s = spec(0.5, SeqGen::Constant { c: 2.0 }, one.clone());
        assert_relative_eq!(s.c_star(), 8.0 / 3.0, max_relative = 1e-14);
        let s = spec(0.5, one, SeqGen::Constant { c: 2.0 });
        let oracle = 4.0 * compensated_sum((1..=8).map(|l: i32| 2f64.powi(-l * l)));
        assert_relative_eq!(s.c_star(), oracle, max_relative = 1e-14);
        assert!((s.c_star() - 2.2578737).abs() < 1e-6);
    }

    #[test]
    fn b_partial_examples() {
        let one = SeqGen::Constant { c: 1.0 };
        assert_eq!(spec(0.5, one.clone(), one.clone()).b_partial(3).unwrap(), 3.0);
        let s = spec(0.5, one.clone(), SeqGen::Exponential { c: 1.0, r: 2.0 });
        assert_relative_eq!(s.b_partial(2).unwrap(), 0.75, max_relative = 1e-15);
        let s = spec(0.5, one, SeqGen::Polynomial { c: 1.0, p: 1.0 });
        assert_relative_eq!(s.b_partial(4).unwrap(), 25.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn b_total_examples() {
        let one = SeqGen::Constant { c: 1.0 };
        let s = spec(0.5, one.clone(), SeqGen::Exponential { c: 1.0, r: 2.0 });
        assert_eq!(s.b_total(), SeriesLimit::Finite(1.0));
        assert_eq!(spec(0.5, one.clone(), one.clone()).b_total(), SeriesLimit::Divergent);
        let s = spec(0.5, one.clone(), SeqGen::Polynomial { c: 1.0, p: 2.0 });
        assert_relative_eq!(s.b_total().finite().unwrap(), PI * PI / 6.0, max_relative = 1e-14);
        let s = spec(0.5, one, list(&[1.0, 2.0]));
        assert_eq!(s.b_total(), SeriesLimit::Divergent);
    }

    #[test]
    fn zeta_bracketed_by_partial_sum_and_integral_tail() {
        // Σ_{j≤N} j^{-p} + ∫_{N+1}^∞ ≤ ζ(p) ≤ Σ_{j≤N} j^{-p} + ∫_N^∞
        for &p in &[1.1, 1.5, 2.0, 3.7] {
            let n = 200_000u64;
            let head = compensated_sum((1..=n).map(|j| (j as f64).powf(-p)));
            let lo = head + ((n + 1) as f64).powf(1.0 - p) / (p - 1.0);
            let hi = head + (n as f64).powf(1.0 - p) / (p - 1.0);
            let z = zeta(p);
            assert!(z >= lo * (1.0 - 1e-13) && z <= hi * (1.0 + 1e-13), "p={p}: {lo} {z} {hi}");
        }
    }

    #[test]
    fn alpha_star_examples() {
        let one = SeqGen::Constant { c: 1.0 };
        let s = spec(0.5, SeqGen::Exponential { c: 1.0, r: E }, one.clone());
        assert_relative_eq!(s.alpha_star(), 1.0, max_relative = 1e-15);
        let s = spec(0.5, SeqGen::Polynomial { c: 1.0, p: 1.0 }, one.clone());
        assert_eq!(s.alpha_star(), 0.0);
        let s = spec(0.5, SeqGen::Exponential { c: 1.0, r: 4.0 }, one.clone());
        assert_relative_eq!(s.alpha_star(), 4f64.ln(), max_relative = 1e-15);
        let s = spec(0.5, SeqGen::ExpQuadratic { c: 1.0, r: E }, one);
        assert_eq!(s.alpha_star(), f64::INFINITY);
    }

    #[test]
    fn validation() {
        let one = SeqGen::Constant { c: 1.0 };
        assert!(WeightSpec::new(1.0, one.clone(), one.clone(), 4).is_err());
        assert!(WeightSpec::new(0.0, one.clone(), one.clone(), 4).is_err());
        assert!(WeightSpec::new(0.5, list(&[2.0, 1.0]), one.clone(), 4).is_err());
        assert!(WeightSpec::new(0.5, one.clone(), SeqGen::Exponential { c: 1.0, r: 0.5 }, 4).is_err());
        assert!(WeightSpec::new(0.5, one.clone(), SeqGen::Constant { c: -1.0 }, 4).is_err());
        let s = WeightSpec::new(0.5, SeqGen::Constant { c: 0.5 }, one.clone(), 4).unwrap();
        assert_eq!(s.warnings().len(), 1);
        assert!(WeightSpec::new(0.5, one, SeqGen::Exponential { c: 1.0, r: 2.0 }, 2000).is_err());
    }

    #[test]
    fn j_star_closed_forms() {
        let one = SeqGen::Constant { c: 1.0 };
        let s = spec(0.5, SeqGen::Exponential { c: 1.0, r: E }, one.clone());
        assert_eq!(s.j_star(0.9).unwrap(), 1);
        let s = spec(0.5, SeqGen::Exponential { c: 0.01, r: E }, one.clone());
        let j0 = s.j_star(0.5).unwrap();
        // brute-force scan over a long range
        let first_good = (1..10_000).find(|&j| (j..10_000).all(|i| s.ln_a(i) >= 0.5 * i as f64));
        assert_eq!(Some(j0), first_good);
        let s = spec(0.5, SeqGen::ExpQuadratic { c: 1e-6, r: 1.1 }, one.clone());
        let j0 = s.j_star(3.0).unwrap();
        let first_good = (1..2000).find(|&j| (j..2000).all(|i| s.ln_a(i) >= 3.0 * i as f64));
        assert_eq!(Some(j0), first_good);
        let s = spec(0.5, SeqGen::Polynomial { c: 1.0, p: 2.0 }, one);
        assert!(s.j_star(0.1).is_err());
    }

    #[test]
    fn multi_index_basics() {
        let k: MultiIndex = "(1,0,3)".parse().unwrap();
        assert_eq!(k.nonzero_count(), 2);
        assert_eq!(k.to_string(), "(1,0,3)");
        assert!(MultiIndex::new(vec![0, 2]) < MultiIndex::new(vec![1, 0]));
        assert!(MultiIndex::new(vec![0, 2]).le_coordwise(&MultiIndex::new(vec![1, 2])));
    }
}
