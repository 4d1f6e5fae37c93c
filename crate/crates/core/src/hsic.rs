//! HSIC independence test: the biased statistic HSIC_b = (1/n²)Tr(KHLH),
//! a gamma approximation of its null distribution, and a permutation test
//! used as the model-free oracle.
//!
//! Under independence, n·HSIC_b is well approximated by a gamma law whose
//! shape u = (E HSIC_b)²/Var HSIC_b and scale v = n·Var HSIC_b/E HSIC_b
//! are estimated from the Gram matrices, following the moment expressions
//! of the kernel independence test of Gretton et al. (NIPS 2007). Because
//! those estimators are transcribed from the literature, the permutation
//! test here doubles as an in-repo cross-check of the gamma null.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dist::SeedScheme;
use crate::error::{Error, Result};
use crate::kernel::{center_gram, gram_matrix, KernelSpec, Sample};
use crate::special::{gamma_quantile, reg_gamma_pair, GammaParams, LogNormalParams};

/// Two samples observed jointly, row i of X paired with row i of Y.
#[derive(Debug, Clone)]
pub struct PairedSample {
    x: Sample,
    y: Sample,
}

impl PairedSample {
    pub fn new(x: Sample, y: Sample) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::Shape(format!(
                "paired samples need equal row counts, got {} and {}",
                x.n(),
                y.n()
            )));
        }
        if x.n() < 2 {
            return Err(Error::InsufficientData(
                "paired sample needs at least 2 rows".into(),
            ));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &Sample {
        &self.x
    }

    pub fn y(&self) -> &Sample {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }
}

/// Null-distribution parameters attached to a test outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum NullParams {
    Gamma(GammaParams),
    LogNormal(LogNormalParams),
    Permutation { shuffles: usize },
}

/// Result of a hypothesis test.
///
/// Invariants: `reject == (statistic > threshold)` exactly, and whenever a
/// p-value is present, `reject == (p_value < alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub reject: bool,
    pub alpha: f64,
    pub null: NullParams,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )))
    }
}

// Gram matrices of both marginals, raw (k, l) and double-centered (kc, lc).
struct Grams {
    k: Array2<f64>,
    l: Array2<f64>,
    kc: Array2<f64>,
    lc: Array2<f64>,
}

fn build_grams(pair: &PairedSample, kx: &KernelSpec, ky: &KernelSpec) -> Result<Grams> {
    let k = gram_matrix(pair.x(), kx)?;
    let l = gram_matrix(pair.y(), ky)?;
    let kc = center_gram(&k)?;
    let lc = center_gram(&l)?;
    Ok(Grams { k, l, kc, lc })
}

// (1/n²) Σ_ij (HKH)_ij (HLH)_ij, clamped at zero. Equals (1/n²)Tr(KHLH)
// because H is idempotent and the centered matrices are symmetric.
fn stat_from_centered(kc: &Array2<f64>, lc: &Array2<f64>) -> f64 {
    let n = kc.nrows() as f64;
    let s: f64 = kc.iter().zip(lc.iter()).map(|(a, b)| a * b).sum();
    (s / (n * n)).max(0.0)
}

/// Biased HSIC estimator of the dependence between the two marginals.
///
/// Median-heuristic bandwidths are resolved per marginal.
pub fn hsic_b(pair: &PairedSample, kx: &KernelSpec, ky: &KernelSpec) -> Result<f64> {
    let grams = build_grams(pair, kx, ky)?;
    Ok(stat_from_centered(&grams.kc, &grams.lc))
}

/// Gamma parameters of the null distribution of n·HSIC_b, estimated from
/// the (uncentered) Gram matrices.
pub fn gamma_null_params(k: &Array2<f64>, l: &Array2<f64>) -> Result<GammaParams> {
    if k.nrows() != k.ncols() || l.nrows() != l.ncols() || k.dim() != l.dim() {
        return Err(Error::Shape(format!(
            "Gram matrices must be square and equally sized, got {:?} and {:?}",
            k.dim(),
            l.dim()
        )));
    }
    let kc = center_gram(k)?;
    let lc = center_gram(l)?;
    gamma_params_from(k, l, &kc, &lc)
}

fn gamma_params_from(
    k: &Array2<f64>,
    l: &Array2<f64>,
    kc: &Array2<f64>,
    lc: &Array2<f64>,
) -> Result<GammaParams> {
    let n = k.nrows();
    if n < 6 {
        return Err(Error::InsufficientData(format!(
            "gamma null needs at least 6 paired observations, got {n}"
        )));
    }
    let nf = n as f64;

    // off-diagonal means of the raw Gram matrices
    let off_mean = |m: &Array2<f64>| (m.sum() - m.diag().sum()) / (nf * (nf - 1.0));
    let mu_x = off_mean(k);
    let mu_y = off_mean(l);
    let mean = (1.0 + mu_x * mu_y - mu_x - mu_y) / nf;

    // off-diagonal sum of ((HKH) ∘ (HLH))²
    let full: f64 = kc
        .iter()
        .zip(lc.iter())
        .map(|(a, b)| {
            let t = a * b;
            t * t
        })
        .sum();
    let diag: f64 = kc
        .diag()
        .iter()
        .zip(lc.diag().iter())
        .map(|(a, b)| {
            let t = a * b;
            t * t
        })
        .sum();
    let b_sum = full - diag;

    let variance = 2.0 * (nf - 4.0) * (nf - 5.0) / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
        * b_sum
        / (nf * (nf - 1.0));

    if !(mean > 0.0) || !(variance > 0.0) {
        return Err(Error::DegenerateNull(format!(
            "estimated null mean {mean} and variance {variance} must both be positive"
        )));
    }
    GammaParams::new(mean * mean / variance, nf * variance / mean)
}

/// HSIC independence test with the gamma-approximated null.
///
/// The test statistic is n·HSIC_b; the null is accepted when it stays at
/// or below the 1−α gamma quantile.
pub fn hsic_independence_test(
    pair: &PairedSample,
    alpha: f64,
    kx: &KernelSpec,
    ky: &KernelSpec,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let grams = build_grams(pair, kx, ky)?;
    let n = pair.n() as f64;
    let statistic = n * stat_from_centered(&grams.kc, &grams.lc);
    let params = gamma_params_from(&grams.k, &grams.l, &grams.kc, &grams.lc)?;
    let threshold = gamma_quantile(&params, 1.0 - alpha)?;
    let (_, q) = reg_gamma_pair(params.shape, statistic / params.scale)?;
    Ok(TestOutcome {
        statistic,
        threshold,
        p_value: Some(q),
        reject: statistic > threshold,
        alpha,
        null: NullParams::Gamma(params),
    })
}

/// HSIC independence test with a permutation null: Y rows are reshuffled
/// `shuffles` times while X stays fixed.
///
/// The p-value is (1 + #{permuted ≥ observed}) / (shuffles + 1). Each
/// shuffle derives its own stream from `seed`, so the outcome is
/// deterministic and independent of the parallelism degree.
pub fn permutation_independence_test(
    pair: &PairedSample,
    alpha: f64,
    kx: &KernelSpec,
    ky: &KernelSpec,
    shuffles: usize,
    seed: u64,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    if shuffles < 100 {
        return Err(Error::InvalidParameter(format!(
            "permutation test needs at least 100 shuffles, got {shuffles}"
        )));
    }
    let grams = build_grams(pair, kx, ky)?;
    let (kc, lc) = (&grams.kc, &grams.lc);
    let n = pair.n();
    let nf = n as f64;
    let observed = nf * stat_from_centered(kc, lc);

    // Permuting Y conjugates its Gram matrix, and conjugation commutes
    // with centering, so each shuffle reuses the centered matrices.
    let scheme = SeedScheme::new(seed);
    let perm_stats: Vec<f64> = (0..shuffles)
        .into_par_iter()
        .map(|s| {
            let mut rng = scheme.stream(s as u64);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut acc = 0.0;
            for i in 0..n {
                let k_row = kc.row(i);
                let k_row = k_row.as_slice().expect("standard layout");
                let l_row = lc.row(idx[i]);
                let l_row = l_row.as_slice().expect("standard layout");
                for (kv, &pj) in k_row.iter().zip(idx.iter()) {
                    acc += kv * l_row[pj];
                }
            }
            (acc / nf).max(0.0)
        })
        .collect();

    let exceed = perm_stats.iter().filter(|&&t| t >= observed).count();
    let p_value = (1 + exceed) as f64 / (shuffles + 1) as f64;
    let threshold = permutation_threshold(&perm_stats, alpha);
    Ok(TestOutcome {
        statistic: observed,
        threshold,
        p_value: Some(p_value),
        reject: observed > threshold,
        alpha,
        null: NullParams::Permutation { shuffles },
    })
}

// Order statistic chosen so that `observed > threshold` coincides exactly
// with `(1 + #{permuted >= observed}) / (shuffles + 1) < alpha`.
fn permutation_threshold(perm_stats: &[f64], alpha: f64) -> f64 {
    let s = perm_stats.len();
    let sp1 = (s + 1) as f64;
    // largest exceedance count c that still rejects
    let mut c = (alpha * sp1 - 1.0).ceil() as i64 - 1;
    while c >= 0 && (1 + c) as f64 / sp1 >= alpha {
        c -= 1;
    }
    while (2 + c) as f64 / sp1 < alpha {
        c += 1;
    }
    if c < 0 {
        return f64::INFINITY;
    }
    let c = c as usize;
    if c >= s {
        return f64::NEG_INFINITY;
    }
    let mut sorted = perm_stats.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    sorted[c]
}
