//! Headline densities and bounds downstream of `D_q^ε`.
//!
//! The products here are written in the `i ≥ 1` form with exponent `-i`
//! where that is how the statements are usually given, and are evaluated
//! independently of [`crate::rankdist`]; tests compare the two routes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfq::{FieldParams, Flavor};
use crate::rankdist;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub p: u32,
    pub flavor: Flavor,
    pub value: f64,
    pub formula: String,
}

fn product_from_one(p: u32, factor: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 1.0;
    let mut t = 1.0;
    loop {
        t /= p as f64;
        let f = factor(t);
        if (f - 1.0).abs() < 1e-17 {
            return acc;
        }
        acc *= f;
    }
}

/// `∏_{i≥1} (1 + p^{-i})^{-1}`, a lower bound for the density of twists
/// for which the Fermat-type equation has no nontrivial solution.
pub fn fermat_unsolvable_density(p: u64) -> Result<f64> {
    if p < 3 {
        return Err(Error::InvalidParameter(format!(
            "the Fermat density needs p >= 3, got {p}"
        )));
    }
    let field = FieldParams::symplectic(p)?;
    Ok(product_from_one(field.p(), |t| 1.0 / (1.0 + t)))
}

/// `β^sym = ∏_{i≥1} (1 - p^{-i}) / (1 + p^{-i})`.
pub fn beta_symplectic(p: u64) -> Result<f64> {
    let field = FieldParams::symplectic(p)?;
    Ok(product_from_one(field.p(), |t| (1.0 - t) / (1.0 + t)))
}

/// Proportion of symplectic twists with odd rank, `(1 - β^sym)/2`.
pub fn odd_rank_proportion(p: u64) -> Result<f64> {
    Ok((1.0 - beta_symplectic(p)?) / 2.0)
}

/// `1 - q^{1-ε}/(q - 1)`, which `D_q^ε(0)` strictly exceeds.
pub fn rank_zero_lower_bound(field: &FieldParams) -> f64 {
    1.0 - field.q_one_minus_eps() / (field.q() as f64 - 1.0)
}

/// Density of rank-zero twists, `D_q^ε(0)`, after checking it against
/// [`rank_zero_lower_bound`].
pub fn rank_zero_density_bound(field: &FieldParams) -> Result<f64> {
    let value = rankdist::dist_zero(field);
    let lower = rank_zero_lower_bound(field);
    if value <= lower {
        return Err(Error::InvalidParameter(format!(
            "D(0) = {value} does not exceed {lower}"
        )));
    }
    Ok(value)
}

/// Upper bound on the average Mordell–Weil rank, `[K:Q] · Σ_{i≥0} 1/(1+q^{i+ε})`.
pub fn avg_rank_bound(field: &FieldParams, deg_k: u32) -> Result<f64> {
    if deg_k == 0 {
        return Err(Error::InvalidParameter("[K:Q] must be at least 1".into()));
    }
    Ok(deg_k as f64 * rankdist::expected_rank(field))
}

/// Lower bound on the proportion of degree-`p` extensions without rank
/// growth: `D(0)` for `p = 2`, else `max(0, (p-1)(D(0) - (p-2)/(p-1)))`.
pub fn no_growth_proportion_bound(p: u64, field: &FieldParams) -> Result<f64> {
    if p != field.p() as u64 {
        return Err(Error::FieldMismatch);
    }
    let d0 = rankdist::dist_zero(field);
    if p == 2 {
        return Ok(d0);
    }
    let pm1 = (p - 1) as f64;
    Ok((pm1 * (d0 - (p - 2) as f64 / pm1)).max(0.0))
}

/// Every bound for one `(p, flavor)`.
pub fn reports(field: &FieldParams, deg_k: u32) -> Result<Vec<BoundReport>> {
    let p = field.p();
    let flavor = field.flavor();
    let report = |name: &str, value: f64, formula: &str| BoundReport {
        name: name.to_string(),
        p,
        flavor,
        value,
        formula: formula.to_string(),
    };
    let mut out = vec![
        report(
            "rank_zero_density",
            rank_zero_density_bound(field)?,
            "D(0) = prod_{i>=0} (1+q^(-i-eps))^(-1)",
        ),
        report(
            "rank_zero_lower_bound",
            rank_zero_lower_bound(field).max(0.0),
            "max(0, 1 - q^(1-eps)/(q-1))",
        ),
        report(
            "avg_rank_bound",
            avg_rank_bound(field, deg_k)?,
            "[K:Q] * sum_{i>=0} 1/(1+q^(i+eps))",
        ),
        report(
            "no_growth_proportion",
            no_growth_proportion_bound(p as u64, field)?,
            if p == 2 {
                "D(0)"
            } else {
                "max(0, (p-1)(D(0) - (p-2)/(p-1)))"
            },
        ),
    ];
    if flavor == Flavor::Symplectic {
        if p >= 3 {
            out.push(report(
                "fermat_unsolvable_density",
                fermat_unsolvable_density(p as u64)?,
                "prod_{i>=1} (1+p^(-i))^(-1)",
            ));
        }
        out.push(report(
            "odd_rank_proportion",
            odd_rank_proportion(p as u64)?,
            "(1 - prod_{i>=1} (1-p^(-i))/(1+p^(-i)))/2",
        ));
    }
    Ok(out)
}
