//! Certified summation of the one-dimensional series `Σ_{l ≥ l0} exp(-c·l^b)`.
//!
//! Every weight series in the crate reduces to this form. Terms are summed
//! relative to the first one (so huge `c` never underflows the running sum)
//! with Neumaier compensation, and truncation stops only once a rigorous
//! upper bound on the remainder is below [`REL_TOL`] of the partial sum.
//!
//! Remainder bounds:
//! * `b ≥ 1`: convexity gives `l^b ≥ L^b + b·L^(b-1)·(l - L)`, so the tail is
//!   dominated by a geometric series with ratio `exp(-c·b·L^(b-1))`.
//! * `0 < b < 1`: condensation blocks `Σ_{l=2^i L+1}^{2^{i+1} L} t_l ≤ 2^i L·t_{2^i L}`;
//!   their ratios decrease, so the block series is closed by a geometric tail.

/// Relative truncation tolerance certified for every [`SeriesSum`].
pub const REL_TOL: f64 = 1e-14;
const TERM_TOL: f64 = 1e-16;
const MAX_TERMS: u64 = 50_000_000;

/// Compensated (Neumaier) accumulator for sums of floating point values.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// A truncated series of positive terms together with a certified remainder bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    /// Sum of the series (the truncated sum; the true value lies in
    /// `[value, value + tail_bound]` up to rounding).
    pub value: f64,
    /// Natural log of `value`; `-inf` for an empty (all-zero) series.
    pub log_value: f64,
    /// Number of terms summed.
    pub terms_used: u64,
    /// Certified upper bound on the neglected remainder.
    pub tail_bound: f64,
    /// The sum divided by its first term (always `≥ 1`).
    pub normalized: f64,
    /// Natural log of the first term.
    pub log_first: f64,
}

impl SeriesSum {
    fn empty() -> Self {
        SeriesSum {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
            terms_used: 1,
            tail_bound: 0.0,
            normalized: 1.0,
            log_first: f64::NEG_INFINITY,
        }
    }

    /// Upper bound on the exact (infinite) sum.
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// `c·(x^b - l0^b)` for `x ≥ l0`, with `first = c·l0^b`.
#[inline]
fn rel_exponent(ln_c: f64, b: f64, first: f64, x: f64, l0: f64) -> f64 {
    let e = b * (x / l0).ln();
    if e > 700.0 {
        // l0^b is negligible next to x^b
        (ln_c + b * x.ln()).exp()
    } else {
        first * e.exp_m1()
    }
}

/// Certified sum of `Σ_{l ≥ start} exp(-c·l^b)` where `c = exp(ln_c)`.
///
/// `ln_c = +inf` yields the empty series. `b` must be positive and finite and
/// `start ≥ 1`.
pub fn power_tail(ln_c: f64, b: f64, start: u64) -> SeriesSum {
    assert!(start >= 1, "power_tail starts at l >= 1");
    assert!(b > 0.0 && b.is_finite(), "power_tail needs a finite positive exponent");
    assert!(!ln_c.is_nan(), "power_tail: NaN scale");
    if ln_c == f64::INFINITY {
        return SeriesSum::empty();
    }
    let l0 = start as f64;
    let first = if start == 1 { ln_c.exp() } else { (ln_c + b * l0.ln()).exp() };
    if first.is_infinite() {
        return SeriesSum::empty();
    }
    let rel = |x: f64| (-rel_exponent(ln_c, b, first, x, l0)).exp();

    let tail_rel = |l: u64, last: f64| -> f64 {
        if last == 0.0 {
            return 0.0;
        }
        let lf = l as f64;
        if b >= 1.0 {
            // ratio exp(-c b L^(b-1))
            let rate = (ln_c + b.ln() + (b - 1.0) * lf.ln()).exp();
            if rate.is_infinite() {
                return 0.0;
            }
            last / rate.exp_m1()
        } else {
            let mut total = 0.0;
            let mut x = lf;
            let mut block = x * rel(x);
            for _ in 0..64 {
                total += block;
                let nx = 2.0 * x;
                let nblock = nx * rel(nx);
                if nblock == 0.0 {
                    return total;
                }
                let ratio = nblock / block;
                if ratio <= 0.5 {
                    return total + nblock + nblock * ratio / (1.0 - ratio);
                }
                x = nx;
                block = nblock;
            }
            f64::INFINITY
        }
    };

    let mut acc = NeumaierSum::new();
    acc.add(1.0);
    let mut l = start;
    let mut last = 1.0;
    let mut terms = 1u64;
    let mut next_check = start;
    let tail = loop {
        let s = acc.value();
        if last < TERM_TOL * s && l >= next_check {
            let tb = tail_rel(l, last);
            if tb <= REL_TOL * s {
                break tb;
            }
            next_check = if b >= 1.0 { l + 1 } else { l.saturating_mul(2) };
        }
        if terms >= MAX_TERMS {
            break tail_rel(l, last);
        }
        l += 1;
        last = rel(l as f64);
        acc.add(last);
        terms += 1;
    };
    let normalized = acc.value();
    let log_first = -first;
    let log_value = log_first + normalized.ln();
    let sum = SeriesSum {
        value: log_value.exp(),
        log_value,
        terms_used: terms,
        tail_bound: log_first.exp() * tail,
        normalized,
        log_first,
    };
    debug_assert!(sum.value.is_finite() && sum.normalized.is_finite());
    sum
}

/// `Σ_{l ≥ 1} ω^{a·(scale·l)^b}` given `ln a` (so that `a` may exceed the f64 range).
pub fn tail_series_ln(ln_a: f64, b: f64, omega: f64, scale: f64) -> SeriesSum {
    let ln_c = ln_a + b * scale.ln() + (-omega.ln()).ln();
    power_tail(ln_c, b, 1)
}

/// `Σ_{l ≥ 1} ω^{a·(scale·l)^b}` with certified truncation.
pub fn tail_series(a: f64, b: f64, omega: f64, scale: f64) -> SeriesSum {
    tail_series_ln(a.ln(), b, omega, scale)
}
