//! Evaluation statistics: two-sample KS distance with bootstrap spread,
//! validity rates, the exact-edge-count random baseline, and the combined
//! evaluation summary.

use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::graph::Graph;
use crate::rigidity::{self, DOD_MIN_SIZE};
use crate::rng::derive_rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("bootstrap needs at least 100 replicates")]
    TooFewReplicates,
    #[error("graph {index} has {n} nodes, above the decomposability limit {max} (no skip policy)")]
    DodIntractable { index: usize, n: usize, max: usize },
}

/// Two-sample KS distance plus its bootstrap mean and standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct KsReport {
    pub statistic: f64,
    pub bootstrap_mean: f64,
    pub bootstrap_se: f64,
    pub reps: usize,
}

/// Supremum distance between the two empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        let gap = fmath::abs(i as f64 / na - j as f64 / nb);
        if gap > d {
            d = gap;
        }
    }
    Ok(d)
}

/// Bootstraps the KS distance by resampling both sides with replacement.
pub fn bootstrap_ks<R: Rng>(a: &[f64], b: &[f64], reps: usize, rng: &mut R) -> Result<KsReport, StatsError> {
    if reps < 100 {
        return Err(StatsError::TooFewReplicates);
    }
    let statistic = ks_statistic(a, b)?;
    let mut values = Vec::with_capacity(reps);
    let mut ra = Vec::with_capacity(a.len());
    let mut rb = Vec::with_capacity(b.len());
    for _ in 0..reps {
        ra.clear();
        rb.clear();
        for _ in 0..a.len() {
            ra.push(a[rng.gen_range(0..a.len())]);
        }
        for _ in 0..b.len() {
            rb.push(b[rng.gen_range(0..b.len())]);
        }
        values.push(ks_statistic(&ra, &rb)?);
    }
    let (mean, se) = mean_and_sd(&values);
    Ok(KsReport { statistic, bootstrap_mean: mean, bootstrap_se: se, reps })
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, fmath::sqrt(var))
}

/// Percentage of Laman graphs with a bootstrapped standard deviation, both
/// in percent. Graphs too small for the check count as invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub percent: f64,
    pub bootstrap_sd: f64,
    pub valid: usize,
    pub total: usize,
}

pub fn validity_rate<R: Rng>(graphs: &[Graph], reps: usize, rng: &mut R) -> Result<ValidityReport, StatsError> {
    if graphs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if reps < 100 {
        return Err(StatsError::TooFewReplicates);
    }
    let flags: Vec<bool> = graphs
        .iter()
        .map(|g| rigidity::is_laman(g).unwrap_or(false))
        .collect();
    let valid = flags.iter().filter(|&&b| b).count();
    let mut percents = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut hits = 0usize;
        for _ in 0..flags.len() {
            if flags[rng.gen_range(0..flags.len())] {
                hits += 1;
            }
        }
        percents.push(100.0 * hits as f64 / flags.len() as f64);
    }
    let (_, sd) = mean_and_sd(&percents);
    Ok(ValidityReport {
        percent: 100.0 * valid as f64 / flags.len() as f64,
        bootstrap_sd: sd,
        valid,
        total: flags.len(),
    })
}

/// Uniform random graph on `n` nodes with exactly `2n - 3` edges, so the
/// total-count condition holds by construction and validity failures
/// isolate the subgraph condition.
pub fn er_graph<R: Rng>(n: u32, rng: &mut R) -> Graph {
    assert!(n >= 3, "the exact edge count needs n >= 3");
    let mut pairs: Vec<(u32, u32)> = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).collect();
    let m = 2 * n as usize - 3;
    // Partial Fisher-Yates: the first m slots end up a uniform m-subset.
    for i in 0..m {
        let j = rng.gen_range(i..pairs.len());
        pairs.swap(i, j);
    }
    Graph::from_edge_list(n, &pairs[..m]).expect("sampled pairs are distinct and in range")
}

/// One baseline graph per requested node count.
pub fn er_baseline<R: Rng>(n_values: &[u32], rng: &mut R) -> Vec<Graph> {
    n_values.iter().map(|&n| er_graph(n, rng)).collect()
}

/// Decomposability values for a set of graphs. Oversized graphs either
/// error or, with `skip_oversize`, are dropped (their count is returned).
pub fn dod_values(
    graphs: &[Graph],
    min_size: usize,
    max_n: usize,
    skip_oversize: bool,
) -> Result<(Vec<f64>, usize), StatsError> {
    let mut values = Vec::with_capacity(graphs.len());
    let mut skipped = 0usize;
    for (index, g) in graphs.iter().enumerate() {
        if g.node_count() > max_n {
            if skip_oversize {
                skipped += 1;
                continue;
            }
            return Err(StatsError::DodIntractable { index, n: g.node_count(), max: max_n });
        }
        let r = rigidity::count_well_constrained_subgraphs(g, min_size, max_n)
            .expect("size was checked above");
        values.push(r.dod);
    }
    Ok((values, skipped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub reps: usize,
    pub dod_min_size: usize,
    pub dod_max_n: usize,
    pub skip_oversize: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { reps: 1000, dod_min_size: DOD_MIN_SIZE, dod_max_n: 16, skip_oversize: false }
    }
}

/// All the numbers behind an evaluation report. The baseline is generated
/// here with node counts drawn from the reference set, so baseline and
/// reference share the same size distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub sample_count: usize,
    pub reference_count: usize,
    pub baseline_count: usize,
    pub samples_skipped: usize,
    pub reference_skipped: usize,
    pub baseline_skipped: usize,
    pub dod_samples: Vec<f64>,
    pub dod_reference: Vec<f64>,
    pub dod_baseline: Vec<f64>,
    pub ks_samples_vs_reference: KsReport,
    pub ks_baseline_vs_reference: KsReport,
    pub validity_samples: ValidityReport,
    pub validity_baseline: ValidityReport,
}

/// Runs the full evaluation with streams derived from `seed`.
pub fn evaluate(
    samples: &[Graph],
    reference: &[Graph],
    cfg: &EvalConfig,
    seed: u64,
) -> Result<EvalSummary, StatsError> {
    if samples.is_empty() || reference.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let reference_sizes: Vec<u32> = reference.iter().map(|g| g.node_count() as u32).collect();
    let mut er_rng: ChaCha8Rng = derive_rng(seed, "eval-er", 0);
    let baseline_sizes: Vec<u32> = (0..samples.len())
        .map(|_| reference_sizes[er_rng.gen_range(0..reference_sizes.len())].max(3))
        .collect();
    let baseline = er_baseline(&baseline_sizes, &mut er_rng);

    let (dod_samples, samples_skipped) =
        dod_values(samples, cfg.dod_min_size, cfg.dod_max_n, cfg.skip_oversize)?;
    let (dod_reference, reference_skipped) =
        dod_values(reference, cfg.dod_min_size, cfg.dod_max_n, cfg.skip_oversize)?;
    let (dod_baseline, baseline_skipped) =
        dod_values(&baseline, cfg.dod_min_size, cfg.dod_max_n, cfg.skip_oversize)?;

    let mut ks_rng = derive_rng(seed, "eval-ks", 0);
    let ks_samples_vs_reference = bootstrap_ks(&dod_samples, &dod_reference, cfg.reps, &mut ks_rng)?;
    let ks_baseline_vs_reference = bootstrap_ks(&dod_baseline, &dod_reference, cfg.reps, &mut ks_rng)?;

    let mut validity_rng = derive_rng(seed, "eval-validity", 0);
    let validity_samples = validity_rate(samples, cfg.reps, &mut validity_rng)?;
    let validity_baseline = validity_rate(&baseline, cfg.reps, &mut validity_rng)?;

    Ok(EvalSummary {
        sample_count: samples.len(),
        reference_count: reference.len(),
        baseline_count: baseline.len(),
        samples_skipped,
        reference_skipped,
        baseline_skipped,
        dod_samples,
        dod_reference,
        dod_baseline,
        ks_samples_vs_reference,
        ks_baseline_vs_reference,
        validity_samples,
        validity_baseline,
    })
}
