//! The point process `Prob_n` with density `|VDM_n^Q|^2` against `ν^{⊗d_n}`
//! on mesh tuples: exact enumeration at tiny scale, Metropolis chains
//! otherwise.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PptError, Result};
use crate::fekete::{fekete_points, FeketeOptions, WeightedColumns};
use crate::linalg::LogSumExp;
use crate::measure::GridMeasure;
use crate::mesh::WeightedMesh;
use crate::polytope::MonomialBasis;
use crate::vdm::Configuration;

/// Default cap on `m^{d_n}` for exhaustive enumeration.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Chains whose acceptance rate falls below this are flagged.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

/// Tuple budget from `PPT_BUDGET`, else [`DEFAULT_BUDGET`].
pub fn budget_from_env() -> u64 {
    std::env::var("PPT_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

fn check_shapes(mesh: &WeightedMesh, basis: &MonomialBasis) -> Result<()> {
    if mesh.dim() != basis.dim {
        return Err(PptError::DimensionMismatch {
            expected: basis.dim,
            got: mesh.dim(),
        });
    }
    Ok(())
}

fn check_budget(mesh: &WeightedMesh, basis: &MonomialBasis, budget: u64) -> Result<()> {
    let tuples = (mesh.len() as f64).powi(basis.d_n as i32);
    if tuples > budget as f64 {
        return Err(PptError::BudgetExceeded { tuples, budget });
    }
    Ok(())
}

/// Calls `f(tuple, log weight)` for every tuple whose first index is
/// `first`, in odometer order. The weight is `|VDM^Q|^2 Π ν`.
fn scan_prefix(
    cols: &WeightedColumns,
    log_nu: &[f64],
    d_n: usize,
    first: usize,
    mut f: impl FnMut(&[usize], f64),
) {
    let m = log_nu.len();
    let mut idx = vec![0usize; d_n];
    idx[0] = first;
    loop {
        let lw = cols.log_wvdm(&idx);
        let w = if lw == f64::NEG_INFINITY {
            lw
        } else {
            2.0 * lw + idx.iter().map(|&k| log_nu[k]).sum::<f64>()
        };
        f(&idx, w);
        let mut i = d_n;
        loop {
            if i == 1 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < m {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Runs `fold` over all `m^{d_n}` tuples, splitting on the first index across
/// threads; partial results are combined in mesh order.
fn enumerate<T: Send>(
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    budget: u64,
    init: impl Fn() -> T + Sync,
    fold: impl Fn(&mut T, &[usize], f64) + Sync,
) -> Result<Vec<T>> {
    check_shapes(mesh, basis)?;
    check_budget(mesh, basis, budget)?;
    let cols = WeightedColumns::new(mesh, basis);
    let log_nu: Vec<f64> = mesh.nu().iter().map(|v| v.ln()).collect();
    let d_n = basis.d_n;
    Ok((0..mesh.len())
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            scan_prefix(&cols, &log_nu, d_n, first, |idx, w| fold(&mut acc, idx, w));
            acc
        })
        .collect())
}

fn merge(parts: Vec<LogSumExp>) -> f64 {
    let mut total = LogSumExp::default();
    for p in parts {
        total.add(p.value());
    }
    total.value()
}

/// Exact `log Z_n = log Σ_tuples |VDM_n^Q|^2 Π ν(x_i)`.
pub fn brute_force_log_z(mesh: &WeightedMesh, basis: &MonomialBasis, budget: u64) -> Result<f64> {
    let parts = enumerate(mesh, basis, budget, LogSumExp::default, |acc, _, w| acc.add(w))?;
    Ok(merge(parts))
}

/// `(log Z_n, log ∫_event |VDM_n^Q|^2 dν^{⊗d_n})` by enumeration, with the
/// event given on mesh-index tuples.
pub fn exact_log_masses(
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    budget: u64,
    event: &(dyn Fn(&[usize]) -> bool + Sync),
) -> Result<(f64, f64)> {
    let parts = enumerate(
        mesh,
        basis,
        budget,
        || (LogSumExp::default(), LogSumExp::default()),
        |acc, idx, w| {
            acc.0.add(w);
            if w > f64::NEG_INFINITY && event(idx) {
                acc.1.add(w);
            }
        },
    )?;
    let (all, hit): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    Ok((merge(all), merge(hit)))
}

/// Exact `log Prob_n(event)` with the event given on mesh-index tuples.
pub fn exact_log_probability(
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    budget: u64,
    event: &(dyn Fn(&[usize]) -> bool + Sync),
) -> Result<f64> {
    let (log_z, log_event) = exact_log_masses(mesh, basis, budget, event)?;
    if log_z == f64::NEG_INFINITY {
        return Err(PptError::DegenerateMesh("Z_n = 0: every tuple has VDM^Q = 0".into()));
    }
    Ok(log_event - log_z)
}

/// Exact `Prob_n` of each unordered state (sorted index tuple) with nonzero density.
pub fn exact_state_probabilities(
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    budget: u64,
) -> Result<BTreeMap<Vec<usize>, f64>> {
    let log_z = brute_force_log_z(mesh, basis, budget)?;
    if log_z == f64::NEG_INFINITY {
        return Err(PptError::DegenerateMesh("Z_n = 0: every tuple has VDM^Q = 0".into()));
    }
    let parts = enumerate(mesh, basis, budget, BTreeMap::new, |acc: &mut BTreeMap<Vec<usize>, f64>, idx, w| {
        if w > f64::NEG_INFINITY {
            let mut key = idx.to_vec();
            key.sort_unstable();
            *acc.entry(key).or_insert(0.0) += (w - log_z).exp();
        }
    })?;
    let mut out = BTreeMap::new();
    for part in parts {
        for (k, p) in part {
            *out.entry(k).or_insert(0.0) += p;
        }
    }
    Ok(out)
}

/// Chain settings. `None` burn-in/thinning use `10·d_n·m` and `d_n·m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    pub chains: usize,
    /// Retained samples per chain.
    pub steps: usize,
    pub seed: u64,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
}

impl SamplerOptions {
    pub fn new(chains: usize, steps: usize, seed: u64) -> Self {
        SamplerOptions {
            chains,
            steps,
            seed,
            burn_in: None,
            thin: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub chain: usize,
    pub proposals: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub burn_in: u64,
    pub thin: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub chain: usize,
    pub step: usize,
    pub indices: Vec<usize>,
    pub log_wvdm: f64,
}

/// Retained chain states, chain-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    pub n: u32,
    pub d_n: usize,
    pub l_n: u64,
    pub seed: u64,
    pub records: Vec<SampleRecord>,
    pub chain_meta: Vec<ChainMeta>,
    /// Some chain accepted fewer than [`MIN_ACCEPTANCE`] of its proposals.
    pub low_acceptance: bool,
}

impl EnsembleSample {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn config(&self, mesh: &WeightedMesh, basis: &MonomialBasis, i: usize) -> Result<Configuration> {
        Configuration::from_mesh(mesh, basis, &self.records[i].indices)
    }

    /// Counts of each unordered state (sorted indices).
    pub fn state_counts(&self) -> BTreeMap<Vec<usize>, u64> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            let mut key = r.indices.clone();
            key.sort_unstable();
            *out.entry(key).or_insert(0) += 1;
        }
        out
    }

    /// Per-chain means of `f` over retained records, in chain order.
    fn chain_means(&self, f: impl Fn(&SampleRecord) -> f64) -> Vec<(f64, usize)> {
        let mut sums = vec![(0.0, 0usize); self.chain_meta.len()];
        for r in &self.records {
            sums[r.chain].0 += f(r);
            sums[r.chain].1 += 1;
        }
        sums.into_iter()
            .map(|(s, c)| (if c > 0 { s / c as f64 } else { 0.0 }, c))
            .collect()
    }
}

struct Chain<'a> {
    cols: &'a WeightedColumns,
    proposal: &'a WeightedIndex<f64>,
    state: Vec<usize>,
    log_wvdm: f64,
    proposals: u64,
    accepted: u64,
}

impl Chain<'_> {
    fn step(&mut self, rng: &mut ChaCha20Rng) {
        let j = rng.random_range(0..self.state.len());
        let k = self.proposal.sample(rng);
        let u: f64 = rng.random();
        self.proposals += 1;
        let old = self.state[j];
        if k == old {
            self.accepted += 1;
            return;
        }
        self.state[j] = k;
        let candidate = self.cols.log_wvdm(&self.state);
        let delta = candidate - self.log_wvdm;
        if candidate > f64::NEG_INFINITY && u.ln() < 2.0 * delta {
            self.log_wvdm = candidate;
            self.accepted += 1;
        } else {
            self.state[j] = old;
        }
    }
}

/// Metropolis single-site chains targeting `Prob_n`, started at the mesh
/// Fekete configuration. Chain `c` draws from ChaCha20 stream `c` of the
/// master seed, so output does not depend on thread scheduling.
pub fn mcmc_sample(mesh: &WeightedMesh, basis: &MonomialBasis, opts: &SamplerOptions) -> Result<EnsembleSample> {
    check_shapes(mesh, basis)?;
    if opts.chains == 0 {
        return Err(PptError::InvalidArgument("at least one chain is required".into()));
    }
    let fekete = fekete_points(mesh, basis, &FeketeOptions::default())?;
    let start = fekete.indices().to_vec();
    let cols = WeightedColumns::new(mesh, basis);
    let proposal = WeightedIndex::new(mesh.nu())
        .map_err(|e| PptError::InvalidMesh(format!("reference masses: {e}")))?;
    let sweep = (basis.d_n * mesh.len()) as u64;
    let burn_in = opts.burn_in.unwrap_or(10 * sweep);
    let thin = opts.thin.unwrap_or(sweep).max(1);
    let start_log = cols.log_wvdm(&start);

    let runs: Vec<(Vec<SampleRecord>, ChainMeta)> = (0..opts.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
            rng.set_stream(c as u64);
            let mut chain = Chain {
                cols: &cols,
                proposal: &proposal,
                state: start.clone(),
                log_wvdm: start_log,
                proposals: 0,
                accepted: 0,
            };
            for _ in 0..burn_in {
                chain.step(&mut rng);
            }
            let mut records = Vec::with_capacity(opts.steps);
            for step in 0..opts.steps {
                for _ in 0..thin {
                    chain.step(&mut rng);
                }
                records.push(SampleRecord {
                    chain: c,
                    step,
                    indices: chain.state.clone(),
                    log_wvdm: chain.log_wvdm,
                });
            }
            let rate = if chain.proposals > 0 {
                chain.accepted as f64 / chain.proposals as f64
            } else {
                1.0
            };
            let meta = ChainMeta {
                chain: c,
                proposals: chain.proposals,
                accepted: chain.accepted,
                acceptance_rate: rate,
                burn_in,
                thin,
            };
            (records, meta)
        })
        .collect();

    let mut records = Vec::with_capacity(opts.chains * opts.steps);
    let mut chain_meta = Vec::with_capacity(opts.chains);
    for (r, m) in runs {
        records.extend(r);
        chain_meta.push(m);
    }
    let low_acceptance = chain_meta.iter().any(|m| m.proposals > 0 && m.acceptance_rate < MIN_ACCEPTANCE);
    Ok(EnsembleSample {
        n: basis.n,
        d_n: basis.d_n,
        l_n: basis.l_n,
        seed: opts.seed,
        records,
        chain_meta,
        low_acceptance,
    })
}

/// `(γ_d/d_n) Σ δ_{x_j}` for a sampled configuration.
pub fn empirical_measure(config: &Configuration, gamma_d: f64) -> GridMeasure {
    let mut mu = GridMeasure::uniform(config.points.clone(), gamma_d);
    mu.mesh_index = config.mesh_indices.clone();
    mu
}

/// Average of the empirical measures of all records, as mesh masses summing to `γ_d`.
pub fn average_measure(sample: &EnsembleSample, mesh: &WeightedMesh, gamma_d: f64) -> Result<GridMeasure> {
    if sample.is_empty() {
        return Err(PptError::InvalidArgument("empty sample".into()));
    }
    let mut masses = vec![0.0; mesh.len()];
    let w = gamma_d / (sample.d_n * sample.len()) as f64;
    for r in &sample.records {
        for &k in &r.indices {
            masses[k] += w;
        }
    }
    GridMeasure::from_mesh_masses(mesh, &masses)
}

/// A Monte Carlo frequency with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub value: f64,
    /// Larger of the binomial and between-chain standard errors.
    pub stderr: f64,
    pub hits: u64,
    pub trials: u64,
}

fn frequency(sample: &EnsembleSample, hit: impl Fn(&SampleRecord) -> bool) -> Frequency {
    let trials = sample.len() as u64;
    let hits = sample.records.iter().filter(|r| hit(r)).count() as u64;
    let p = if trials > 0 { hits as f64 / trials as f64 } else { 0.0 };
    let binomial = if trials > 0 { (p * (1.0 - p) / trials as f64).sqrt() } else { f64::INFINITY };
    let means = sample.chain_means(|r| if hit(r) { 1.0 } else { 0.0 });
    let batch = if means.len() >= 2 {
        let c = means.len() as f64;
        let var = means.iter().map(|(m, _)| (m - p).powi(2)).sum::<f64>() / (c - 1.0);
        (var / c).sqrt()
    } else {
        0.0
    };
    Frequency {
        value: p,
        stderr: binomial.max(batch),
        hits,
        trials,
    }
}

/// Fraction of records below the tail threshold `l_n·log(δ̂ − η)`.
pub fn tail_fraction(sample: &EnsembleSample, delta_hat: f64, eta: f64) -> Result<Frequency> {
    if !(eta > 0.0 && eta < delta_hat) {
        return Err(PptError::InvalidArgument(format!("need 0 < eta < delta_hat, got eta = {eta}")));
    }
    let threshold = tail_threshold(sample.l_n, delta_hat, eta);
    Ok(frequency(sample, |r| r.log_wvdm < threshold))
}

/// `l_n·log(δ̂ − η)`: tuples with smaller `log|VDM^Q|` lie outside `A_{n,η}`.
pub fn tail_threshold(l_n: u64, delta_hat: f64, eta: f64) -> f64 {
    l_n as f64 * (delta_hat - eta).ln()
}

/// The large-deviation bound `(1 − η/(2δ̂))^{2 l_n}` on the tail probability.
pub fn tail_bound(l_n: u64, delta_hat: f64, eta: f64) -> f64 {
    (1.0 - eta / (2.0 * delta_hat)).powf(2.0 * l_n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventMethod {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventProbability {
    pub log_probability: f64,
    pub method: EventMethod,
    /// Set when no sampled state hit the event; `log_probability` is then
    /// the rule-of-three upper bound `log(3/N)`.
    pub upper_bound_only: bool,
    pub frequency: Option<Frequency>,
}

/// `log σ_n(B)` for an event on empirical measures (mass `γ_d`). Exact by
/// enumeration when within `budget`, otherwise estimated from `sample`.
pub fn event_log_probability(
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    gamma_d: f64,
    event: &(dyn Fn(&GridMeasure) -> bool + Sync),
    budget: u64,
    sample: Option<&EnsembleSample>,
) -> Result<EventProbability> {
    let on_tuple = |idx: &[usize]| event(&GridMeasure::from_indices(mesh, idx, gamma_d));
    match exact_log_probability(mesh, basis, budget, &on_tuple) {
        Ok(lp) => Ok(EventProbability {
            log_probability: lp,
            method: EventMethod::Exact,
            upper_bound_only: false,
            frequency: None,
        }),
        Err(PptError::BudgetExceeded { tuples, budget }) => {
            let Some(sample) = sample else {
                return Err(PptError::BudgetExceeded { tuples, budget });
            };
            let f = frequency(sample, |r| on_tuple(&r.indices));
            let (log_probability, upper_bound_only) = if f.hits == 0 {
                ((3.0 / f.trials.max(1) as f64).ln(), true)
            } else {
                (f.value.ln(), false)
            };
            Ok(EventProbability {
                log_probability,
                method: EventMethod::Sampled,
                upper_bound_only,
                frequency: Some(f),
            })
        }
        Err(e) => Err(e),
    }
}
