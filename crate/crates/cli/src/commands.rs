//! One function per subcommand, each producing an [`OutputRecord`].

use std::fmt::Write as _;

use anyhow::{bail, Result};
use cmtwist::bounds;
use cmtwist::isospace::{character_count, fiber_size};
use cmtwist::output::{format_truncated, OutputRecord};
use cmtwist::rankdist::{self, RankDistribution};
use cmtwist::twistsim::{self, FanLadder, PlaceModel, SimConfig};
use cmtwist::{FieldParams, Flavor, LocalPlane};

use crate::config::{format_initial, format_shift, format_y};

pub const TABLE_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

const FLAVORS: [Flavor; 2] = [Flavor::Symplectic, Flavor::Unitary];

/// The three quantities tabulated per `(p, flavor)`.
const TABLE_QUANTITIES: [(&str, &str); 3] = [("D0", "D(0)"), ("odd", "odd"), ("mean", "E[r]")];

fn table_value(field: &FieldParams, quantity: &str) -> f64 {
    match quantity {
        "D0" => rankdist::dist_zero(field),
        "odd" => rankdist::odd_mass(field),
        "mean" => rankdist::expected_rank(field),
        _ => unreachable!("unknown table quantity {quantity}"),
    }
}

pub fn table(primes: &[u64]) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new("table");
    let list: Vec<String> = primes.iter().map(u64::to_string).collect();
    rec.param("p", list.join(","));
    rec.param("digits", "4 (truncated)");
    for (quantity, _) in TABLE_QUANTITIES {
        for flavor in FLAVORS {
            for &p in primes {
                let field = FieldParams::new(p, flavor)?;
                let value = format_truncated(table_value(&field, quantity), 4);
                rec.row(format!("{quantity}.{flavor}.{p}"), value);
            }
        }
    }
    Ok(rec)
}

/// Grid layout of [`table`]: one column per prime.
pub fn render_table_grid(rec: &OutputRecord) -> Result<String> {
    let primes: Vec<&str> = rec
        .params
        .get("p")
        .map(|s| s.split(',').collect())
        .unwrap_or_default();
    let mut out = String::new();
    write!(out, "{:<10} {:<4}", "p", "")?;
    for p in &primes {
        write!(out, " {p:>7}")?;
    }
    out.push('\n');
    for (quantity, title) in TABLE_QUANTITIES {
        for (i, flavor) in FLAVORS.iter().enumerate() {
            let head = if i == 0 { title } else { "" };
            write!(out, "{head:<10} {flavor:<4}")?;
            for p in &primes {
                let Some(v) = rec.value(&format!("{quantity}.{flavor}.{p}")) else {
                    bail!("table record lacks {quantity}.{flavor}.{p}");
                };
                write!(out, " {v:>7}")?;
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn dist(field: FieldParams, r_max: usize) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new("dist");
    rec.param("p", field.p())
        .param("flavor", field.flavor())
        .param("q", field.q())
        .param("epsilon", field.epsilon())
        .param("rmax", r_max);
    let d = RankDistribution::stationary(field, r_max);
    for (r, value) in d.probs().iter().enumerate() {
        rec.row(format!("D({r})"), value);
    }
    rec.row("tail_bound", d.tail_bound());
    Ok(rec)
}

pub fn moments(field: FieldParams) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new("moments");
    rec.param("p", field.p())
        .param("flavor", field.flavor())
        .param("q", field.q())
        .param("epsilon", field.epsilon());
    let d = RankDistribution::stationary(field, rankdist::DEFAULT_R_MAX);
    rec.row("D(0)", rankdist::dist_zero(&field))
        .row("expected_rank", rankdist::expected_rank(&field))
        .row("expected_rank_summed", d.mean())
        .row("qr_moment", rankdist::qr_moment(&field))
        .row("qr_moment_summed", d.qr_moment())
        .row("beta", rankdist::beta(&field))
        .row("odd_mass", rankdist::odd_mass(&field))
        .row("odd_mass_summed", d.odd_mass());
    Ok(rec)
}

pub fn bounds(p: u64, flavors: &[Flavor], deg_k: u32) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new("bounds");
    rec.param("p", p).param("degK", deg_k);
    for &flavor in flavors {
        let field = FieldParams::new(p, flavor)?;
        for report in bounds::reports(&field, deg_k)? {
            rec.row(format!("{flavor}.{}", report.name), report.value);
            rec.row(format!("{flavor}.{}.formula", report.name), report.formula);
        }
    }
    Ok(rec)
}

pub fn simulate(config: &SimConfig) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new("simulate");
    rec.param("p", config.field.p())
        .param("flavor", config.field.flavor())
        .param("n", config.n)
        .param("k", config.k)
        .param("samples", config.samples)
        .param("seed", config.seed)
        .param("shift", format_shift(config.shift_mode))
        .param("y", format_y(config.chebotarev))
        .param("initial", format_initial(&config.initial))
        .param(
            "step",
            match config.step_model {
                twistsim::StepModel::ClosedForm => "closed",
                twistsim::StepModel::MicroModel => "micro",
            },
        );
    let emp = twistsim::simulate(config)?;
    let reference = config.reference_law()?;
    let freqs = emp.frequencies();
    let shown = reference
        .probs()
        .iter()
        .rposition(|&x| x >= 1e-12)
        .map_or(0, |i| i + 1)
        .max(freqs.len());
    for r in 0..shown {
        rec.row(
            format!("count[{r}]"),
            emp.counts.get(r).copied().unwrap_or(0),
        );
        rec.row(
            format!("empirical[{r}]"),
            freqs.get(r).copied().unwrap_or(0.0),
        );
        rec.row(format!("reference[{r}]"), reference.get(r));
    }
    let chi = emp.chi_square(reference.probs());
    rec.row("total", emp.total)
        .row("tv_distance", emp.tv_distance(reference.probs()))
        .row("chi2", chi.statistic)
        .row("chi2_dof", chi.dof)
        .row("chi2_p_value", chi.p_value);
    Ok(rec)
}

pub fn isotropic(field: FieldParams, n: u32) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new("isotropic");
    rec.param("p", field.p())
        .param("flavor", field.flavor())
        .param("q", field.q())
        .param("n", n);
    if let Some(m) = field.modulus() {
        rec.param("modulus", m);
    }
    let plane = LocalPlane::build(field);
    rec.row(
        "line[0]",
        format!("{} unramified", plane.unramified_line().format(&field)),
    );
    for (i, line) in plane.ramified_lines().iter().enumerate() {
        rec.row(
            format!("line[{}]", i + 1),
            format!("{} ramified", line.format(&field)),
        );
    }
    let p = field.p() as u64;
    rec.row("isotropic_lines", plane.ramified_lines().len() + 1)
        .row("ramified_lines", plane.ramified_lines().len())
        .row("characters", character_count(p, n)?)
        .row("fiber_size", fiber_size(p, n)?);
    Ok(rec)
}

pub struct LadderArgs {
    pub x: f64,
    pub exponent: f64,
    pub k: usize,
    pub density: f64,
    pub seed: u64,
    pub doublings: usize,
    pub horizon: f64,
    pub cap: u128,
}

pub fn ladder(args: &LadderArgs) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new("ladder");
    rec.param("x", args.x)
        .param("exponent", args.exponent)
        .param("k", args.k)
        .param("density", args.density)
        .param("seed", args.seed)
        .param("doublings", args.doublings)
        .param("horizon", args.horizon);
    let ladder = FanLadder::new(args.exponent)?;
    let model = PlaceModel::build(args.horizon, args.density, args.seed)?;
    for (i, level) in ladder.levels(args.x, args.k + 1).iter().enumerate() {
        rec.row(format!("L_{}", i + 1), level);
    }
    let mut x = args.x;
    for _ in 0..=args.doublings {
        let lower = twistsim::stratum_size(&model, &ladder, args.k, x, args.cap)?;
        let upper = twistsim::stratum_size(&model, &ladder, args.k + 1, x, args.cap)?;
        rec.row(format!("D_{}({x})", args.k), lower);
        rec.row(format!("D_{}({x})", args.k + 1), upper);
        rec.row(
            format!("ratio({x})"),
            twistsim::strata_cardinality_ratio(&model, &ladder, args.k, x, args.cap)?,
        );
        x *= 2.0;
    }
    Ok(rec)
}
