//! The symplectic/unitary rank distribution `D_q^ε`, its moments, and the
//! tridiagonal Markov operator `M_ε` it is stationary for.

use crate::error::{Error, Result};
use crate::gfq::FieldParams;

pub const DEFAULT_R_MAX: usize = 64;

/// Infinite products stop once a factor is this close to one.
const PRODUCT_CUTOFF: f64 = 1e-16;

/// `∏_{i≥0} f(q^{-i-ε})`, truncated at [`PRODUCT_CUTOFF`].
fn product_over_eps_powers(field: &FieldParams, factor: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 1.0;
    for i in 0.. {
        let t = 1.0 / field.q_pow_plus_eps(i);
        let f = factor(t);
        if (f - 1.0).abs() < PRODUCT_CUTOFF {
            break;
        }
        acc *= f;
    }
    acc
}

/// `D_q^ε(0) = ∏_{i≥0} (1 + q^{-i-ε})^{-1}`.
pub fn dist_zero(field: &FieldParams) -> f64 {
    product_over_eps_powers(field, |t| 1.0 / (1.0 + t))
}

/// `D(r) / D(r-1) = q^{1-ε} / (q^r - 1)` for `r ≥ 1`.
pub fn successive_ratio(field: &FieldParams, r: usize) -> f64 {
    field.q_one_minus_eps() / (field.q_pow(r as i32) - 1.0)
}

pub fn dist_value(field: &FieldParams, r: usize) -> f64 {
    (1..=r).fold(dist_zero(field), |acc, i| acc * successive_ratio(field, i))
}

/// `Σ_{r≥0} r·D(r)` via the series `Σ_{i≥0} 1/(1 + q^{i+ε})`.
pub fn expected_rank(field: &FieldParams) -> f64 {
    let mut acc = 0.0;
    for i in 0.. {
        let term = 1.0 / (1.0 + field.q_pow_plus_eps(i));
        if term < 1e-20 {
            break;
        }
        acc += term;
    }
    acc
}

/// `Σ_{r≥0} q^r·D(r) = 1 + q^{1-ε}` in closed form.
pub fn qr_moment(field: &FieldParams) -> f64 {
    1.0 + field.q_one_minus_eps()
}

/// `β^ε = ∏_{i≥0} (1 - q^{-i-ε}) / (1 + q^{-i-ε})`.
pub fn beta(field: &FieldParams) -> f64 {
    product_over_eps_powers(field, |t| (1.0 - t) / (1.0 + t))
}

/// Mass of odd ranks, `(1 - β^ε)/2`.
pub fn odd_mass(field: &FieldParams) -> f64 {
    (1.0 - beta(field)) / 2.0
}

/// Truncated probability vector on ranks `0..=r_max`, with a bound on the
/// mass that lives above `r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    field: FieldParams,
    probs: Vec<f64>,
    tail_bound: f64,
}

impl RankDistribution {
    /// `D_q^ε` on `0..=r_max` with a certified geometric tail bound.
    pub fn stationary(field: FieldParams, r_max: usize) -> Self {
        let mut probs = Vec::with_capacity(r_max + 1);
        let mut value = dist_zero(&field);
        probs.push(value);
        for r in 1..=r_max {
            value *= successive_ratio(&field, r);
            probs.push(value);
        }
        // D(r+1)/D(r) is decreasing in r, so the ratio at r_max+1 bounds
        // every later ratio.
        let rho = successive_ratio(&field, r_max + 1);
        let tail_bound = if rho < 1.0 {
            (value * rho / (1.0 - rho)).min(1.0)
        } else {
            1.0
        };
        RankDistribution {
            field,
            probs,
            tail_bound,
        }
    }

    pub fn point_mass(field: FieldParams, rank: usize, r_max: usize) -> Result<Self> {
        if rank > r_max {
            return Err(Error::IndexOutOfRange {
                index: rank as u64,
                len: r_max as u64 + 1,
            });
        }
        let mut probs = vec![0.0; r_max + 1];
        probs[rank] = 1.0;
        Ok(RankDistribution {
            field,
            probs,
            tail_bound: 0.0,
        })
    }

    pub fn from_probs(field: FieldParams, probs: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty probability vector".into()));
        }
        if probs.iter().any(|&x| !x.is_finite() || x < 0.0)
            || tail_bound.is_nan()
            || tail_bound < 0.0
        {
            return Err(Error::InvalidParameter(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        Ok(RankDistribution {
            field,
            probs,
            tail_bound,
        })
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn r_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn get(&self, r: usize) -> f64 {
        self.probs.get(r).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(r, &x)| r as f64 * x)
            .sum()
    }

    pub fn odd_mass(&self) -> f64 {
        self.probs.iter().skip(1).step_by(2).sum()
    }

    /// `Σ_{r ≤ r_max} q^r·μ(r)`.
    pub fn qr_moment(&self) -> f64 {
        let q = self.field.q() as f64;
        let mut weight = 1.0;
        let mut acc = 0.0;
        for &x in &self.probs {
            acc += weight * x;
            weight *= q;
        }
        acc
    }

    /// Moves all mass up by `r0`: `μ'(r) = μ(r - r0)`.
    pub fn shift(&self, r0: usize) -> Self {
        let mut probs = vec![0.0; r0];
        probs.extend_from_slice(&self.probs);
        RankDistribution {
            field: self.field,
            probs,
            tail_bound: self.tail_bound,
        }
    }

    /// `Σ |μ(r) - ν(r)|` over the union of supports.
    pub fn l1_distance(&self, other: &RankDistribution) -> f64 {
        l1_distance(&self.probs, &other.probs)
    }

    pub fn tv_distance(&self, other: &RankDistribution) -> f64 {
        0.5 * self.l1_distance(other)
    }
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs())
        .sum()
}

pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * l1_distance(a, b)
}

/// The rank-transition operator `M_ε = [m(r, s)]`, truncated at `r_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovOperator {
    field: FieldParams,
    r_max: usize,
}

impl MarkovOperator {
    pub fn new(field: FieldParams, r_max: usize) -> Self {
        MarkovOperator { field, r_max }
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    /// `m(r, s)`: down with `1 - q^{-r}`, stay with `(1 - q^{-ε})q^{-r}`,
    /// up with `q^{-r-ε}`.
    pub fn entry(&self, r: usize, s: usize) -> f64 {
        markov_entry(&self.field, r, s)
    }

    pub fn apply(&self, dist: &RankDistribution) -> Result<RankDistribution> {
        if dist.field != self.field {
            return Err(Error::FieldMismatch);
        }
        if dist.probs.len() > self.r_max + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.r_max + 1,
                found: dist.probs.len(),
            });
        }
        let mut out = vec![0.0; self.r_max + 1];
        let mut tail = dist.tail_bound;
        for (r, &mass) in dist.probs.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            if r > 0 {
                out[r - 1] += mass * self.entry(r, r - 1);
            }
            out[r] += mass * self.entry(r, r);
            let up = mass * self.entry(r, r + 1);
            if r < self.r_max {
                out[r + 1] += up;
            } else {
                tail += up;
            }
        }
        Ok(RankDistribution {
            field: self.field,
            probs: out,
            tail_bound: tail,
        })
    }

    /// `initial · M^k`, recording the total-variation distance to
    /// `reference` after every step.
    pub fn power_iterate(
        &self,
        initial: &RankDistribution,
        k: usize,
        reference: &RankDistribution,
    ) -> Result<PowerIteration> {
        let mut dist = initial.clone();
        let mut tv = Vec::with_capacity(k + 1);
        tv.push(dist.tv_distance(reference));
        for _ in 0..k {
            dist = self.apply(&dist)?;
            tv.push(dist.tv_distance(reference));
        }
        Ok(PowerIteration { dist, tv })
    }
}

pub fn markov_entry(field: &FieldParams, r: usize, s: usize) -> f64 {
    let q_neg_r = field.q_pow(-(r as i32));
    if s + 1 == r {
        1.0 - q_neg_r
    } else if s == r {
        (1.0 - 1.0 / field.p() as f64) * q_neg_r
    } else if s == r + 1 {
        1.0 / field.q_pow_plus_eps(r as i32)
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct PowerIteration {
    pub dist: RankDistribution,
    /// `tv[j]` is the distance after `j` steps; `tv[0]` is the initial one.
    pub tv: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfq::Flavor;

    fn table_fields() -> Vec<FieldParams> {
        [2u64, 3, 5, 7, 11, 13]
            .iter()
            .flat_map(|&p| {
                [
                    FieldParams::symplectic(p).unwrap(),
                    FieldParams::unitary(p).unwrap(),
                ]
            })
            .collect()
    }

    fn sym(p: u64) -> FieldParams {
        FieldParams::symplectic(p).unwrap()
    }

    fn uni(p: u64) -> FieldParams {
        FieldParams::unitary(p).unwrap()
    }

    /// The printed four-digit values are truncations of the exact ones.
    fn in_printed_cell(value: f64, printed: f64) -> bool {
        value >= printed - 1e-12 && value < printed + 1e-4
    }

    #[test]
    fn dist_zero_matches_printed_values() {
        assert!(in_printed_cell(dist_value(&sym(2), 0), 0.4194));
        assert!(in_printed_cell(dist_value(&uni(2), 0), 0.5686));
        assert!(in_printed_cell(dist_value(&sym(3), 0), 0.6390));
    }

    #[test]
    fn moments_match_printed_values() {
        assert!(in_printed_cell(expected_rank(&sym(2)), 0.7644));
        assert_eq!(qr_moment(&sym(2)), 2.0);
        assert!(in_printed_cell(odd_mass(&uni(13)), 0.0718));
    }

    #[test]
    fn markov_entries() {
        let f = sym(2);
        assert_eq!(markov_entry(&f, 0, 0), 0.5);
        assert_eq!(markov_entry(&f, 0, 1), 0.5);
        assert_eq!(markov_entry(&f, 2, 1), 0.75);
        assert_eq!(markov_entry(&f, 2, 2), 0.125);
        assert_eq!(markov_entry(&f, 2, 3), 0.125);
        assert_eq!(markov_entry(&f, 2, 0), 0.0);
        let f = uni(2);
        assert_eq!(markov_entry(&f, 1, 0), 0.75);
        assert_eq!(markov_entry(&f, 1, 1), 0.125);
        assert_eq!(markov_entry(&f, 1, 2), 0.125);
        assert_eq!(markov_entry(&f, 1, 4), 0.0);
    }

    #[test]
    fn rows_are_stochastic() {
        for f in table_fields() {
            for r in 0..=DEFAULT_R_MAX {
                let row: f64 = (r.saturating_sub(1)..=r + 1)
                    .map(|s| markov_entry(&f, r, s))
                    .sum();
                assert!((row - 1.0).abs() <= 1e-15, "{f:?} r={r}: {row}");
            }
        }
    }

    #[test]
    fn normalization_and_tail() {
        for f in table_fields() {
            let d = RankDistribution::stationary(f, DEFAULT_R_MAX);
            assert!((d.total_mass() + d.tail_bound() - 1.0).abs() <= 1e-12);
            // short truncations: the bound must cover the omitted mass
            for r_max in 1..6 {
                let short = RankDistribution::stationary(f, r_max);
                let omitted = 1.0 - short.total_mass();
                assert!(short.tail_bound() + 1e-15 >= omitted, "{f:?} r_max={r_max}");
            }
        }
    }

    #[test]
    fn stationarity() {
        for f in table_fields() {
            let d = RankDistribution::stationary(f, DEFAULT_R_MAX);
            let op = MarkovOperator::new(f, DEFAULT_R_MAX);
            let next = op.apply(&d).unwrap();
            assert!(next.l1_distance(&d) < 1e-10, "{f:?}");
        }
    }

    #[test]
    fn single_step_from_zero() {
        let f = sym(2);
        let op = MarkovOperator::new(f, 8);
        let delta = RankDistribution::point_mass(f, 0, 8).unwrap();
        let next = op.apply(&delta).unwrap();
        assert_eq!(&next.probs()[..3], &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn apply_preserves_mass_including_tail() {
        let f = sym(2);
        let op = MarkovOperator::new(f, 3);
        let mu = RankDistribution::from_probs(f, vec![0.1, 0.2, 0.3, 0.4], 0.0).unwrap();
        let next = op.apply(&mu).unwrap();
        assert!((next.total_mass() + next.tail_bound() - 1.0).abs() < 1e-15);
        assert!((next.tail_bound() - 0.4 * markov_entry(&f, 3, 4)).abs() < 1e-15);
    }

    #[test]
    fn apply_rejects_mismatches() {
        let op = MarkovOperator::new(sym(2), 4);
        let other = RankDistribution::point_mass(sym(3), 0, 4).unwrap();
        assert_eq!(op.apply(&other).unwrap_err(), Error::FieldMismatch);
        let long = RankDistribution::point_mass(sym(2), 0, 9).unwrap();
        assert!(matches!(
            op.apply(&long),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_iteration_converges() {
        for (f, start) in [(sym(2), 0), (uni(3), 5)] {
            let op = MarkovOperator::new(f, DEFAULT_R_MAX);
            let target = RankDistribution::stationary(f, DEFAULT_R_MAX);
            let init = RankDistribution::point_mass(f, start, DEFAULT_R_MAX).unwrap();
            let zero = op.power_iterate(&init, 0, &target).unwrap();
            assert_eq!(zero.dist, init);
            let run = op.power_iterate(&init, 60, &target).unwrap();
            assert!(*run.tv.last().unwrap() < 1e-6, "{f:?}: {:?}", run.tv.last());
        }
    }

    #[test]
    fn tv_is_non_increasing() {
        for f in [sym(2), uni(2), sym(5)] {
            let op = MarkovOperator::new(f, DEFAULT_R_MAX);
            let target = RankDistribution::stationary(f, DEFAULT_R_MAX);
            for r in 0..=10 {
                let init = RankDistribution::point_mass(f, r, DEFAULT_R_MAX).unwrap();
                let run = op.power_iterate(&init, 100, &target).unwrap();
                for w in run.tv[1..].windows(2) {
                    assert!(w[1] <= w[0] + 1e-15, "{f:?} r={r}: {w:?}");
                }
            }
        }
    }

    #[test]
    fn shift_moves_mass() {
        let d = RankDistribution::stationary(sym(2), 10);
        assert_eq!(d.shift(0), d);
        let s = d.shift(1);
        assert_eq!(s.get(0), 0.0);
        assert!(in_printed_cell(s.get(1), 0.4194));
        assert!((s.total_mass() - d.total_mass()).abs() < 1e-15);
    }

    #[test]
    fn moment_cross_checks() {
        for f in table_fields() {
            let d = RankDistribution::stationary(f, DEFAULT_R_MAX);
            assert!((d.qr_moment() - qr_moment(&f)).abs() < 1e-8, "{f:?}");
            assert!((d.mean() - expected_rank(&f)).abs() < 1e-9, "{f:?}");
            assert!((d.odd_mass() - odd_mass(&f)).abs() < 1e-8, "{f:?}");
        }
    }

    #[test]
    fn unitary_uses_square_of_p() {
        let f = uni(3);
        assert_eq!(f.flavor(), Flavor::Unitary);
        // q^{-ε} = 1/3 when q = 9
        assert!((markov_entry(&f, 0, 1) - 1.0 / 3.0).abs() < 1e-16);
    }
}
