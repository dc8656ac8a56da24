//! The half-period cosine space: reproducing kernel, finite cosine
//! polynomials, norms and a sparse text format.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::NeumaierSum;
use crate::weights::{MultiIndex, WeightSpec};

pub(crate) fn check_point(x: &[f64]) -> Result<()> {
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("point coordinate {v} outside [0,1]")));
    }
    Ok(())
}

/// `Σ_{k≥1} ω^{a_j k^{b_j}} cos(πk x) cos(πk y)`, truncated where the weight
/// series of coordinate `j` is certified.
pub fn kernel_series_1d(spec: &WeightSpec, j: usize, x: f64, y: f64) -> f64 {
    let terms = spec.coord_tail(j, 1.0).terms_used;
    let lw = spec.ln_inv_omega();
    let mut acc = NeumaierSum::new();
    for k in 1..=terms {
        let w = (-spec.exponent_1d(j, k as usize) * lw).exp();
        if w == 0.0 {
            break;
        }
        let kf = k as f64;
        acc.add(w * (PI * kf * x).cos() * (PI * kf * y).cos());
    }
    acc.value()
}

/// `K(x,y) = Π_j (1 + 2 Σ_{k≥1} ω^{a_j k^{b_j}} cos(πk x_j) cos(πk y_j))`.
pub fn kernel_eval(spec: &WeightSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain("kernel arguments differ in dimension".into()));
    }
    spec.check_dim(x.len())?;
    check_point(x)?;
    check_point(y)?;
    Ok(x
        .iter()
        .zip(y)
        .enumerate()
        .map(|(i, (&xi, &yi))| 1.0 + 2.0 * kernel_series_1d(spec, i + 1, xi, yi))
        .product())
}

/// `2^{|k|_*/2} Π_j cos(π k_j x_j)`.
pub fn basis_value(k: &MultiIndex, x: &[f64]) -> f64 {
    let mut v = 1.0;
    for (&kj, &xj) in k.coords().iter().zip(x) {
        if kj != 0 {
            v *= SQRT_2 * (PI * kj as f64 * xj).cos();
        }
    }
    v
}

/// A function with finitely many nonzero cosine coefficients `f̃(k)`
/// relative to the L2-orthonormal system `2^{|k|_*/2} Π cos(π k_j x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosinePolynomial {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl CosinePolynomial {
    pub fn zero(dim: usize) -> Self {
        CosinePolynomial { dim, coeffs: BTreeMap::new() }
    }

    pub fn from_coeffs<I>(dim: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut f = CosinePolynomial::zero(dim);
        for (k, c) in coeffs {
            f.insert(k, c)?;
        }
        Ok(f)
    }

    /// Set a coefficient; zero coefficients are dropped from the map.
    pub fn insert(&mut self, k: MultiIndex, c: f64) -> Result<()> {
        if k.dim() != self.dim {
            return Err(Error::Domain(format!(
                "index {k} has dimension {}, polynomial has {}",
                k.dim(),
                self.dim
            )));
        }
        if !c.is_finite() {
            return Err(Error::Domain(format!("non-finite coefficient at {k}")));
        }
        if c == 0.0 {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero coefficients in lexicographic order of the index.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(k, &c)| (k, c))
    }

    /// `f̃(k)`, zero outside the support.
    pub fn coeff(&self, k: &MultiIndex) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// `Σ_k f̃(k) 2^{|k|_*/2} Π cos(π k_j x_j)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!(
                "point has dimension {}, polynomial has {}",
                x.len(),
                self.dim
            )));
        }
        check_point(x)?;
        let mut acc = NeumaierSum::new();
        for (k, c) in self.iter() {
            acc.add(c * basis_value(k, x));
        }
        Ok(acc.value())
    }

    /// `‖f‖_{L2}`, the Euclidean norm of the coefficients.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).collect::<NeumaierSum>().value().sqrt()
    }

    /// `f - g`.
    pub fn sub(&self, g: &CosinePolynomial) -> Result<CosinePolynomial> {
        if g.dim != self.dim {
            return Err(Error::Domain("dimension mismatch".into()));
        }
        let mut out = self.clone();
        for (k, c) in g.iter() {
            out.insert(k.clone(), self.coeff(k) - c)?;
        }
        Ok(out)
    }

    /// Sparse text form: a `# dim=s` header, then one line per index with the
    /// coordinates followed by the coefficient.
    pub fn to_text(&self) -> String {
        let mut out = format!("# dim={}\n", self.dim);
        for (k, c) in self.iter() {
            for kj in k.coords() {
                let _ = write!(out, "{kj} ");
            }
            let _ = writeln!(out, "{c:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut f = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(d) = rest.trim().strip_prefix("dim=") {
                    let d = d.trim().parse::<usize>().map_err(|e| Error::Parse {
                        line: line_no,
                        msg: format!("bad dim: {e}"),
                    })?;
                    dim = Some(d);
                    f = Some(CosinePolynomial::zero(d));
                }
                continue;
            }
            let (Some(d), Some(poly)) = (dim, f.as_mut()) else {
                return Err(Error::Parse { line: line_no, msg: "missing '# dim=' header".into() });
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != d + 1 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {} fields, found {}", d + 1, toks.len()),
                });
            }
            let coords = toks[..d]
                .iter()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: line_no, msg: format!("bad index: {e}") })?;
            let c = toks[d]
                .parse::<f64>()
                .map_err(|e| Error::Parse { line: line_no, msg: format!("bad coefficient: {e}") })?;
            poly.insert(MultiIndex::new(coords), c)
                .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
        }
        f.ok_or(Error::Parse { line: 0, msg: "empty document".into() })
    }
}

/// The orthonormal basis function `e_k` of the space: coefficient `ω_k^{1/2}` at `k`.
pub fn basis(spec: &WeightSpec, k: &MultiIndex) -> Result<CosinePolynomial> {
    let c = (0.5 * spec.log_weight(k)?).exp();
    CosinePolynomial::from_coeffs(k.dim(), [(k.clone(), c)])
}

/// `‖f‖ = (Σ_k f̃(k)² / ω_k)^{1/2}`, each term formed in the log domain.
pub fn space_norm(spec: &WeightSpec, f: &CosinePolynomial) -> Result<f64> {
    spec.check_dim(f.dim())?;
    let mut acc = NeumaierSum::new();
    for (k, c) in f.iter() {
        acc.add((2.0 * c.abs().ln() - spec.log_weight(k)?).exp());
    }
    Ok(acc.value().sqrt())
}

/// Random polynomial on `support` with space norm one, deterministic in `seed`.
pub fn sample_unit_ball(
    spec: &WeightSpec,
    support: &[MultiIndex],
    seed: u64,
) -> Result<CosinePolynomial> {
    let Some(first) = support.first() else {
        return Err(Error::Domain("sample_unit_ball needs a nonempty support".into()));
    };
    let dim = first.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = CosinePolynomial::zero(dim);
    for k in support {
        let mut c = 0.0;
        while c == 0.0 {
            c = rng.random_range(-1.0..=1.0);
        }
        f.insert(k.clone(), c)?;
    }
    let norm = space_norm(spec, &f)?;
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Numerical(format!("cannot normalize sample (norm {norm})")));
    }
    let scaled = f.iter().map(|(k, c)| (k.clone(), c / norm)).collect::<Vec<_>>();
    CosinePolynomial::from_coeffs(dim, scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::SeqGen;
    use approx::assert_relative_eq;

    fn unit_spec(s_max: usize) -> WeightSpec {
        WeightSpec::new(0.5, SeqGen::Constant { c: 1.0 }, SeqGen::Constant { c: 1.0 }, s_max).unwrap()
    }

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn kernel_closed_forms() {
        let s = unit_spec(2);
        assert_relative_eq!(kernel_eval(&s, &[0.0], &[0.0]).unwrap(), 3.0, max_relative = 1e-14);
        assert_relative_eq!(kernel_eval(&s, &[0.5], &[0.5]).unwrap(), 5.0 / 3.0, max_relative = 1e-14);
        assert!(kernel_eval(&s, &[1.5], &[0.5]).is_err());
        assert!(kernel_eval(&s, &[0.1, 0.2, 0.3], &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn kernel_double_integral_is_one() {
        // the midpoint rule with 64 nodes integrates every cos(πk·) with k < 128 exactly
        let s = WeightSpec::new(0.3, SeqGen::Constant { c: 1.0 }, SeqGen::Constant { c: 1.5 }, 1).unwrap();
        let n = 64;
        let pts: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64 / (2 * n) as f64).collect();
        let mut acc = NeumaierSum::new();
        for &x in &pts {
            for &y in &pts {
                acc.add(kernel_eval(&s, &[x], &[y]).unwrap());
            }
        }
        assert_relative_eq!(acc.value() / (n * n) as f64, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn coefficients_and_norms() {
        let s = unit_spec(2);
        let f = CosinePolynomial::from_coeffs(1, [(mi(&[0]), 3.5)]).unwrap();
        assert_eq!(f.coeff(&mi(&[0])), 3.5);
        assert_eq!(f.coeff(&mi(&[7])), 0.0);
        assert_relative_eq!(space_norm(&s, &f).unwrap(), 3.5);
        let e = basis(&s, &mi(&[1, 2])).unwrap();
        assert_relative_eq!(e.coeff(&mi(&[1, 2])), 0.125f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(space_norm(&s, &e).unwrap(), 1.0, max_relative = 1e-15);
        let g = CosinePolynomial::from_coeffs(1, [(mi(&[1]), 1.0)]).unwrap();
        assert_relative_eq!(space_norm(&s, &g).unwrap(), SQRT_2, max_relative = 1e-15);
    }

    #[test]
    fn evaluation() {
        let one = CosinePolynomial::from_coeffs(1, [(mi(&[0]), 1.0)]).unwrap();
        assert_eq!(one.eval(&[0.37]).unwrap(), 1.0);
        let f = CosinePolynomial::from_coeffs(1, [(mi(&[1]), 1.0)]).unwrap();
        assert_relative_eq!(f.eval(&[0.0]).unwrap(), SQRT_2);
        let f = CosinePolynomial::from_coeffs(1, [(mi(&[2]), 1.0)]).unwrap();
        assert_relative_eq!(f.eval(&[0.5]).unwrap(), -SQRT_2, max_relative = 1e-15);
        assert!(f.eval(&[-0.1]).is_err());
    }

    #[test]
    fn reproducing_property() {
        // <e_k, K(.,x)> = ω_k^{-1/2} K_x~(k) with K_x~(k) taken by quadrature
        let s = WeightSpec::new(0.6, SeqGen::Constant { c: 1.0 }, SeqGen::Constant { c: 1.0 }, 2).unwrap();
        let x = [0.3, 0.85];
        let n = 128;
        let nodes: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64 / (2 * n) as f64).collect();
        let mut grid = Vec::with_capacity(n * n);
        for &y1 in &nodes {
            for &y2 in &nodes {
                grid.push(([y1, y2], kernel_eval(&s, &x, &[y1, y2]).unwrap()));
            }
        }
        for k1 in 0..=6 {
            for k2 in 0..=6 {
                let k = mi(&[k1, k2]);
                let e = basis(&s, &k).unwrap();
                let kx: f64 = grid.iter().map(|(y, v)| v * basis_value(&k, y)).sum::<f64>() / (n * n) as f64;
                let inner = e.coeff(&k) * kx / s.weight(&k).unwrap();
                assert_relative_eq!(inner, e.eval(&x).unwrap(), max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_normalized_and_deterministic() {
        let s = unit_spec(2);
        let f = sample_unit_ball(&s, &[mi(&[0])], 9).unwrap();
        assert_eq!(f.coeff(&mi(&[0])).abs(), 1.0);
        let supp = vec![mi(&[0, 0]), mi(&[1, 0]), mi(&[2, 3])];
        let a = sample_unit_ball(&s, &supp, 42).unwrap();
        let b = sample_unit_ball(&s, &supp, 42).unwrap();
        assert_eq!(a, b);
        assert!((space_norm(&s, &a).unwrap() - 1.0).abs() <= 1e-12);
        assert!(sample_unit_ball(&s, &[], 1).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = CosinePolynomial::from_coeffs(
            2,
            [(mi(&[0, 0]), 0.1), (mi(&[3, 1]), -1.0 / 3.0), (mi(&[1, 0]), 1e-300)],
        )
        .unwrap();
        let text = f.to_text();
        assert!(text.starts_with("# dim=2\n"));
        assert_eq!(CosinePolynomial::from_text(&text).unwrap(), f);
        assert!(matches!(
            CosinePolynomial::from_text("# dim=2\n1 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
