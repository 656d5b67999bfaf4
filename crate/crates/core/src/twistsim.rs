//! Stochastic model of the fan-structure twisting process.
//!
//! Ranks evolve by adding one ramified split place at a time. Each step
//! first tosses the localization coin (`t = 0` with probability `q^{-r}`),
//! then compares the Kummer line of a uniformly drawn character with the
//! line `V` cut out by the Selmer group: the rank drops when `t = 1`, rises
//! when the lines coincide, and stays put otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::gfq::FieldParams;
use crate::isospace::{character_count, LocalPlane};
use crate::rankdist::{MarkovOperator, RankDistribution, DEFAULT_R_MAX};

// ---------------------------------------------------------------------------
// Places

/// Number of leading places put in the bad set `B` by default.
pub const DEFAULT_BAD_PLACES: usize = 1;

/// Largest bound handed to the exact prime counter.
pub const MAX_COUNTING_BOUND: f64 = 1e12;

pub const DEFAULT_STRATUM_CAP: u128 = 1_000_000_000_000_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlaceClass {
    /// Bad places: archimedean, above `p`, or of bad reduction.
    B,
    /// Not split in the relevant extension.
    P0,
    /// Split; the places where twisting moves the rank.
    P1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Place {
    pub norm: u64,
    pub class: PlaceClass,
}

/// Synthetic places of norm `≤ horizon`, one per rational prime.
#[derive(Debug, Clone)]
pub struct PlaceModel {
    places: Vec<Place>,
    p1_density: f64,
    seed: u64,
    horizon: u64,
}

/// Primes `≤ n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `π(n)` by the Lucy–Hedgehog recursion, `O(n^{3/4})`.
pub fn prime_count(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    let root = isqrt(n);
    // S(v) for v in {n / i} ∪ {1..root}, starting as v - 1.
    let mut small: Vec<u64> = (0..=root).map(|v| v.saturating_sub(1)).collect();
    let mut large: Vec<u64> = (0..=root)
        .map(|i| if i == 0 { 0 } else { n / i - 1 })
        .collect();
    for p in 2..=root {
        if small[p as usize] == small[p as usize - 1] {
            continue;
        }
        let below = small[p as usize - 1];
        let p2 = p * p;
        let lim = root.min(n / p2);
        for i in 1..=lim {
            let d = i * p;
            let s = if d <= root {
                large[d as usize]
            } else {
                small[(n / d) as usize]
            };
            large[i as usize] -= s - below;
        }
        if p2 <= root {
            for v in (p2..=root).rev() {
                small[v as usize] -= small[(v / p) as usize] - below;
            }
        }
    }
    large[1]
}

impl PlaceModel {
    pub fn build(x: f64, p1_density: f64, seed: u64) -> Result<Self> {
        Self::with_bad_places(x, p1_density, seed, DEFAULT_BAD_PLACES)
    }

    pub fn with_bad_places(x: f64, p1_density: f64, seed: u64, bad: usize) -> Result<Self> {
        if !(x >= 2.0) || !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "X must be at least 2, got {x}"
            )));
        }
        if !(p1_density > 0.0 && p1_density <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "P1 density must lie in (0, 1], got {p1_density}"
            )));
        }
        let horizon = x.floor() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let places = primes_up_to(horizon)
            .into_iter()
            .enumerate()
            .map(|(i, norm)| {
                let class = if i < bad {
                    PlaceClass::B
                } else if rng.random_bool(p1_density) {
                    PlaceClass::P1
                } else {
                    PlaceClass::P0
                };
                Place { norm, class }
            })
            .collect();
        Ok(PlaceModel {
            places,
            p1_density,
            seed,
            horizon,
        })
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn p1_density(&self) -> f64 {
        self.p1_density
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn p1_places(&self) -> impl Iterator<Item = &Place> {
        self.places.iter().filter(|pl| pl.class == PlaceClass::P1)
    }

    pub fn class_count(&self, class: PlaceClass) -> usize {
        self.places.iter().filter(|pl| pl.class == class).count()
    }

    /// Number of `P1` places with norm strictly below `bound`.
    ///
    /// Past the horizon this is only known when every good place is in `P1`;
    /// the count then comes from `π`.
    pub fn p1_count_below(&self, bound: f64) -> Result<u64> {
        if bound.is_nan() {
            return Err(Error::InvalidParameter("NaN norm bound".into()));
        }
        if bound <= 2.0 {
            return Ok(0);
        }
        // largest integer strictly below bound
        let last = if bound.fract() == 0.0 {
            bound - 1.0
        } else {
            bound.floor()
        };
        if last <= self.horizon as f64 {
            let last = last as u64;
            return Ok(self.p1_places().take_while(|pl| pl.norm <= last).count() as u64);
        }
        if self.p1_density < 1.0 || last > MAX_COUNTING_BOUND {
            return Err(Error::BeyondHorizon {
                bound,
                horizon: self.horizon,
            });
        }
        let bad = self.class_count(PlaceClass::B) as u64;
        Ok(prime_count(last as u64) - bad)
    }
}

// ---------------------------------------------------------------------------
// Fan ladder

/// The norm ladder `L_1(X) ≤ L_2(X) ≤ …`, driven by the stand-in rate
/// `L(Y) = Y^a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanLadder {
    stand_in_exponent: f64,
}

impl FanLadder {
    pub fn new(stand_in_exponent: f64) -> Result<Self> {
        if !(stand_in_exponent >= 1.0) || !stand_in_exponent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ladder exponent must be at least 1, got {stand_in_exponent}"
            )));
        }
        Ok(FanLadder { stand_in_exponent })
    }

    pub fn stand_in_exponent(&self) -> f64 {
        self.stand_in_exponent
    }

    pub fn rate(&self, y: f64) -> f64 {
        y.powf(self.stand_in_exponent)
    }

    /// `[L_1(X), …, L_count(X)]`.
    pub fn levels(&self, x: f64, count: usize) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(count);
        let mut product = 1.0;
        for i in 0..count {
            let next = if i == 0 {
                self.rate(x)
            } else {
                self.rate(product).max(x * out[i - 1])
            };
            product *= next;
            out.push(next);
        }
        out
    }

    pub fn level(&self, i: usize, x: f64) -> f64 {
        assert!(i >= 1, "ladder levels start at 1");
        self.levels(x, i)[i - 1]
    }
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `|D_k(X)|`: sets of `k` distinct `P1` places whose sorted norms satisfy
/// `N(v_i) < L_i(X)`.
pub fn stratum_size(
    model: &PlaceModel,
    ladder: &FanLadder,
    k: usize,
    x: f64,
    cap: u128,
) -> Result<u128> {
    if k == 0 {
        return Ok(1);
    }
    let levels = ladder.levels(x, k);
    let counts = levels
        .iter()
        .map(|&l| model.p1_count_below(l))
        .collect::<Result<Vec<u64>>>()?;
    let too_big = |count: String| Error::CountCapExceeded { count, cap };
    // ways[m]: choices so far with m places taken from the segments seen.
    let mut ways = vec![0u128; k + 1];
    ways[0] = 1;
    let mut prev = 0u64;
    for (i, &c) in counts.iter().enumerate() {
        let seg = c - prev;
        prev = c;
        let mut next = vec![0u128; k + 1];
        for m in 0..=k {
            if ways[m] == 0 {
                continue;
            }
            for a in 0..=(k - m) {
                let b = binomial(seg, a as u64).ok_or_else(|| too_big("overflow".into()))?;
                let add = ways[m]
                    .checked_mul(b)
                    .ok_or_else(|| too_big("overflow".into()))?;
                next[m + a] = next[m + a]
                    .checked_add(add)
                    .ok_or_else(|| too_big("overflow".into()))?;
            }
        }
        // at least i+1 places must already sit below L_{i+1}(X)
        for (m, w) in next.iter_mut().enumerate() {
            if m < i + 1 {
                *w = 0;
            }
        }
        ways = next;
    }
    let total = ways[k];
    if total > cap {
        return Err(too_big(total.to_string()));
    }
    Ok(total)
}

/// `|D_k(X)| / |D_{k+1}(X)|`.
pub fn strata_cardinality_ratio(
    model: &PlaceModel,
    ladder: &FanLadder,
    k: usize,
    x: f64,
    cap: u128,
) -> Result<f64> {
    let lower = stratum_size(model, ladder, k, x, cap)?;
    let upper = stratum_size(model, ladder, k + 1, x, cap)?;
    if upper == 0 {
        return Err(Error::InvalidParameter(format!(
            "stratum {} is empty at X = {x}",
            k + 1
        )));
    }
    Ok(lower as f64 / upper as f64)
}

// ---------------------------------------------------------------------------
// Rank steps

/// How the localization probability `c_0 = q^{-r}` is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Chebotarev {
    Exact,
    /// Each step uses a probability drawn uniformly from
    /// `[q^{-r} - 1/Y, q^{-r} + 1/Y] ∩ [0, 1]`.
    Bounded(f64),
}

/// Probability of `t = 0` at rank `r` for this step.
fn localization_probability<R: Rng + ?Sized>(
    r: usize,
    field: &FieldParams,
    chebotarev: Chebotarev,
    rng: &mut R,
) -> f64 {
    if r == 0 {
        return 1.0;
    }
    let exact = field.q_pow(-(r as i32));
    match chebotarev {
        Chebotarev::Exact => exact,
        Chebotarev::Bounded(y) => {
            let w = 1.0 / y;
            (exact + rng.random_range(-w..=w)).clamp(0.0, 1.0)
        }
    }
}

pub fn step_rank_closed_form<R: Rng + ?Sized>(
    r: usize,
    field: &FieldParams,
    chebotarev: Chebotarev,
    rng: &mut R,
) -> usize {
    let c0 = localization_probability(r, field, chebotarev, rng);
    if rng.random::<f64>() < c0 {
        if rng.random_range(0..field.p()) == 0 {
            r + 1
        } else {
            r
        }
    } else {
        r - 1
    }
}

/// One step through the explicit local plane: `V` is the unramified line
/// when `t = 1` and a uniform ramified line when `t = 0`; `K` is the Kummer
/// line of a uniform totally ramified character of order `p^n`.
pub fn step_rank_micro_model<R: Rng + ?Sized>(
    r: usize,
    plane: &LocalPlane,
    n: u32,
    chebotarev: Chebotarev,
    rng: &mut R,
) -> Result<usize> {
    let field = *plane.field();
    let c0 = localization_probability(r, &field, chebotarev, rng);
    let t_zero = rng.random::<f64>() < c0;
    let fiber = rng.random_range(0..character_count(field.p() as u64, n)?);
    let kummer = plane.kummer_line_of_character(fiber, n)?;
    if !t_zero {
        debug_assert_eq!(
            plane
                .unramified_line()
                .intersection(&field, kummer)
                .map(|s| s.dim()),
            Ok(0)
        );
        return Ok(r - 1);
    }
    let v = &plane.ramified_lines()[rng.random_range(0..plane.ramified_lines().len())];
    Ok(if v == kummer { r + 1 } else { r })
}

/// Exact one-step law `[P(r-1), P(r), P(r+1)]` of the micro-model, found by
/// enumerating every `(t, V, character)` outcome and measuring `dim(V ∩ K)`.
pub fn micro_model_law(plane: &LocalPlane, n: u32, r: usize) -> Result<[f64; 3]> {
    let field = *plane.field();
    let chars = character_count(field.p() as u64, n)?;
    let c0 = if r == 0 {
        1.0
    } else {
        field.q_pow(-(r as i32))
    };
    let mut law = [0.0; 3];
    // t = 1: V is the unramified line
    if r > 0 {
        for fiber in 0..chars {
            let k = plane.kummer_line_of_character(fiber, n)?;
            if plane.unramified_line().intersection(&field, k)?.dim() != 0 {
                return Err(Error::InvalidParameter(
                    "a ramified Kummer line meets the unramified line".into(),
                ));
            }
            law[0] += (1.0 - c0) / chars as f64;
        }
    }
    // t = 0: V is a ramified line
    let lines = plane.ramified_lines();
    let weight = c0 / (lines.len() as u64 * chars) as f64;
    for v in lines {
        for fiber in 0..chars {
            let k = plane.kummer_line_of_character(fiber, n)?;
            let meet = v.intersection(&field, k)?.dim();
            law[1 + meet] += weight;
        }
    }
    Ok(law)
}

// ---------------------------------------------------------------------------
// Simulation

/// Additive rank shift between the incoherent and the global Selmer ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftMode {
    /// `F ≠ F_d`: shift by the constant `r_γ`.
    NotFd(usize),
    /// `F = F_d`: shift by one.
    EqualsFd,
}

impl ShiftMode {
    pub fn amount(self) -> usize {
        match self {
            ShiftMode::NotFd(r) => r,
            ShiftMode::EqualsFd => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepModel {
    ClosedForm,
    MicroModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialLaw {
    PointMass(usize),
    /// Unnormalized weights on ranks `0, 1, …`.
    Weights(Vec<f64>),
}

pub const DEFAULT_CHUNK_SIZE: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub field: FieldParams,
    pub n: u32,
    pub k: usize,
    pub samples: u64,
    pub seed: u64,
    pub shift_mode: ShiftMode,
    pub chebotarev: Chebotarev,
    pub initial: InitialLaw,
    pub step_model: StepModel,
    pub chunk_size: u64,
}

impl SimConfig {
    pub fn new(field: FieldParams, k: usize, samples: u64, seed: u64) -> Self {
        SimConfig {
            field,
            n: 1,
            k,
            samples,
            seed,
            shift_mode: ShiftMode::NotFd(0),
            chebotarev: Chebotarev::Exact,
            initial: InitialLaw::PointMass(0),
            step_model: StepModel::ClosedForm,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidParameter(
                "chunk size must be positive".into(),
            ));
        }
        if let Chebotarev::Bounded(y) = self.chebotarev {
            if !(y > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "Y must be positive, got {y}"
                )));
            }
        }
        if let InitialLaw::Weights(w) = &self.initial {
            if w.is_empty() || w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidParameter(
                    "initial weights must be non-negative".into(),
                ));
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidParameter(
                    "initial weights sum to zero".into(),
                ));
            }
        }
        character_count(self.field.p() as u64, self.n)?;
        Ok(())
    }

    /// The law the simulation should approach: `E_1 · M^k`, shifted.
    pub fn reference_law(&self) -> Result<RankDistribution> {
        let start_max = match &self.initial {
            InitialLaw::PointMass(r) => *r,
            InitialLaw::Weights(w) => w.len() - 1,
        };
        let r_max = DEFAULT_R_MAX.max(start_max + self.k + 1);
        let initial = match &self.initial {
            InitialLaw::PointMass(r) => RankDistribution::point_mass(self.field, *r, r_max)?,
            InitialLaw::Weights(w) => {
                let total: f64 = w.iter().sum();
                let mut probs: Vec<f64> = w.iter().map(|x| x / total).collect();
                probs.resize(r_max + 1, 0.0);
                RankDistribution::from_probs(self.field, probs, 0.0)?
            }
        };
        let op = MarkovOperator::new(self.field, r_max);
        let mut dist = initial;
        for _ in 0..self.k {
            dist = op.apply(&dist)?;
        }
        Ok(dist.shift(self.shift_mode.amount()))
    }
}

/// Rank counts from a simulation run.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub counts: Vec<u64>,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl EmpiricalDistribution {
    pub fn record(&mut self, rank: usize) {
        if rank >= self.counts.len() {
            self.counts.resize(rank + 1, 0);
        }
        self.counts[rank] += 1;
        self.total += 1;
    }

    pub fn merge(mut self, other: EmpiricalDistribution) -> Self {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }

    pub fn tv_distance(&self, reference: &[f64]) -> f64 {
        crate::rankdist::tv_distance(&self.frequencies(), reference)
    }

    /// Pearson goodness-of-fit against `reference`. Adjacent ranks are
    /// pooled until every bin expects at least five observations; the last
    /// bin absorbs all higher ranks.
    pub fn chi_square(&self, reference: &[f64]) -> ChiSquareTest {
        let n = self.total as f64;
        let len = self.counts.len().max(reference.len());
        let mut bins: Vec<(f64, f64)> = Vec::new();
        let (mut exp_acc, mut obs_acc) = (0.0, 0.0);
        for r in 0..len {
            exp_acc += n * reference.get(r).copied().unwrap_or(0.0);
            obs_acc += self.counts.get(r).copied().unwrap_or(0) as f64;
            if exp_acc >= 5.0 {
                bins.push((obs_acc, exp_acc));
                exp_acc = 0.0;
                obs_acc = 0.0;
            }
        }
        // leftover mass goes into the last bin
        let leftover_exp = (n - bins.iter().map(|b| b.1).sum::<f64>()).max(0.0);
        let leftover_obs = obs_acc;
        match bins.last_mut() {
            Some(last) if leftover_exp < 5.0 => {
                last.0 += leftover_obs;
                last.1 += leftover_exp;
            }
            _ => bins.push((leftover_obs, leftover_exp)),
        }
        let statistic: f64 = bins
            .iter()
            .filter(|b| b.1 > 0.0)
            .map(|&(o, e)| (o - e) * (o - e) / e)
            .sum();
        let dof = bins.len().saturating_sub(1);
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64)
                .expect("positive degrees of freedom")
                .sf(statistic)
        };
        ChiSquareTest {
            statistic,
            dof,
            p_value,
        }
    }
}

fn draw_initial<R: Rng + ?Sized>(initial: &InitialLaw, cdf: &[f64], rng: &mut R) -> usize {
    match initial {
        InitialLaw::PointMass(r) => *r,
        InitialLaw::Weights(_) => {
            let u = rng.random::<f64>() * cdf[cdf.len() - 1];
            cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
        }
    }
}

/// Runs one chunk. Chunk `i` draws from stream `i` of the ChaCha generator
/// keyed by the seed, so results do not depend on scheduling.
fn simulate_chunk(
    config: &SimConfig,
    plane: Option<&LocalPlane>,
    cdf: &[f64],
    chunk: u64,
    mut on_sample: impl FnMut(usize),
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chunk);
    let start = chunk * config.chunk_size;
    let len = config.chunk_size.min(config.samples - start);
    let shift = config.shift_mode.amount();
    for _ in 0..len {
        let mut r = draw_initial(&config.initial, cdf, &mut rng);
        for _ in 0..config.k {
            r = match plane {
                None => step_rank_closed_form(r, &config.field, config.chebotarev, &mut rng),
                Some(plane) => {
                    step_rank_micro_model(r, plane, config.n, config.chebotarev, &mut rng)?
                }
            };
        }
        on_sample(r + shift);
    }
    Ok(())
}

struct Prepared {
    plane: Option<LocalPlane>,
    cdf: Vec<f64>,
    chunks: u64,
}

fn prepare(config: &SimConfig) -> Result<Prepared> {
    config.validate()?;
    let plane = match config.step_model {
        StepModel::ClosedForm => None,
        StepModel::MicroModel => Some(LocalPlane::build(config.field)),
    };
    let cdf = match &config.initial {
        InitialLaw::PointMass(_) => Vec::new(),
        InitialLaw::Weights(w) => w
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect(),
    };
    Ok(Prepared {
        plane,
        cdf,
        chunks: config.samples.div_ceil(config.chunk_size),
    })
}

/// Runs `config.samples` independent twisting paths of `k` steps on the
/// current rayon pool. The result is independent of the pool size.
pub fn simulate(config: &SimConfig) -> Result<EmpiricalDistribution> {
    let prep = prepare(config)?;
    (0..prep.chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut dist = EmpiricalDistribution::default();
            simulate_chunk(config, prep.plane.as_ref(), &prep.cdf, chunk, |r| {
                dist.record(r)
            })?;
            Ok(dist)
        })
        .try_reduce(EmpiricalDistribution::default, |a, b| Ok(a.merge(b)))
}

/// Final rank of every sample, in sample order. Single-threaded.
pub fn simulate_paths(config: &SimConfig) -> Result<Vec<usize>> {
    let prep = prepare(config)?;
    let mut out = Vec::with_capacity(config.samples as usize);
    for chunk in 0..prep.chunks {
        simulate_chunk(config, prep.plane.as_ref(), &prep.cdf, chunk, |r| {
            out.push(r)
        })?;
    }
    Ok(out)
}
