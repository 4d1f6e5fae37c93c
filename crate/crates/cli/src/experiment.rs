//! Monte-Carlo experiment engine: empirical significance level and power
//! over a grid of (test, distribution, size, dimension) cells.
//!
//! Each (distribution, size, dimension, repetition) draws one fresh
//! sample and runs every selected test on it. The per-repetition RNG
//! stream is derived by hashing the cell content together with the master
//! seed, so results are independent of the parallelism degree and of
//! which other cells appear in the configuration.

use std::fmt;
use std::str::FromStr;

use mvnt::dist::{sample, DistributionSpec, Law};
use mvnt::hz::hz_normality_test;
use mvnt::kb::{kb_normality_test, KbOptions};
use mvnt::Sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Kb,
    Hz,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestKind::Kb => write!(f, "kb"),
            TestKind::Hz => write!(f, "hz"),
        }
    }
}

impl FromStr for TestKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "kb" => Ok(TestKind::Kb),
            "hz" => Ok(TestKind::Hz),
            other => Err(format!("unknown test '{other}' (expected 'kb' or 'hz')")),
        }
    }
}

/// How the configured sizes map onto drawn rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeConvention {
    /// A size of n draws 2n rows; the normality split sees n per half.
    PerHalf,
    /// A size of n draws exactly n rows.
    Total,
}

impl fmt::Display for SizeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeConvention::PerHalf => write!(f, "per_half"),
            SizeConvention::Total => write!(f, "total"),
        }
    }
}

impl FromStr for SizeConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "per_half" => Ok(SizeConvention::PerHalf),
            "total" => Ok(SizeConvention::Total),
            other => Err(format!(
                "unknown size convention '{other}' (expected 'per_half' or 'total')"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub tests: Vec<TestKind>,
    pub distributions: Vec<Law>,
    pub sizes: Vec<usize>,
    pub dims: Vec<usize>,
    pub alpha: f64,
    pub repetitions: usize,
    pub master_seed: u64,
    pub size_convention: SizeConvention,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.tests.is_empty() {
            return Err("at least one test must be selected".into());
        }
        if self.distributions.is_empty() {
            return Err("at least one distribution must be listed".into());
        }
        if self.sizes.is_empty() || self.dims.is_empty() {
            return Err("sizes and dims must be non-empty".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            ));
        }
        if self.repetitions == 0 {
            return Err("repetitions must be >= 1".into());
        }
        for law in &self.distributions {
            law.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    fn rows_for(&self, size: usize) -> usize {
        match self.size_convention {
            SizeConvention::PerHalf => 2 * size,
            SizeConvention::Total => size,
        }
    }
}

/// One flat record per (test, distribution, size, dimension) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub test: TestKind,
    pub distribution: String,
    pub size: usize,
    pub dim: usize,
    pub alpha: f64,
    pub repetitions: usize,
    pub reject_rate: Option<f64>,
    pub std_dev: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Normal,
    NonNormal,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Normal => write!(f, "normal"),
            Group::NonNormal => write!(f, "nonnormal"),
        }
    }
}

/// Plot-ready aggregate: for the normal group the value is the average of
/// 1 − rejection rate (empirical acceptance under H0), for the non-normal
/// group the average rejection rate (empirical power).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub test: TestKind,
    pub group: Group,
    pub size: usize,
    pub dim: usize,
    pub value: f64,
    pub distributions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerReport {
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
}

// Content-addressed stream per (law, rows, dim, repetition): removing a
// distribution or resizing the grid never shifts another cell's draws.
fn rep_rng(master_seed: u64, law: &Law, rows: usize, dim: usize, rep: usize) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"mvnt.experiment.v1\0");
    hasher.update(master_seed.to_le_bytes());
    hasher.update(law.to_string().as_bytes());
    hasher.update([0u8]);
    hasher.update((rows as u64).to_le_bytes());
    hasher.update((dim as u64).to_le_bytes());
    hasher.update((rep as u64).to_le_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

fn run_one(test: TestKind, data: &Sample, alpha: f64) -> Result<bool, String> {
    let outcome = match test {
        TestKind::Kb => kb_normality_test(data, alpha, &KbOptions::default()),
        TestKind::Hz => hz_normality_test(data, alpha),
    };
    outcome.map(|o| o.reject).map_err(|e| e.to_string())
}

// Sample standard deviation of n 0/1 indicators with k ones.
fn indicator_std_dev(k: usize, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    (nf * p * (1.0 - p) / (nf - 1.0)).sqrt()
}

/// Runs the full grid. Repetitions execute in parallel; the reduction
/// walks them in index order, so the report is reproducible byte for
/// byte given the same configuration and master seed.
pub fn run_experiment(config: &ExperimentConfig) -> PowerReport {
    let sample_cells: Vec<(Law, usize, usize)> = config
        .distributions
        .iter()
        .flat_map(|law| {
            config.sizes.iter().flat_map(move |&size| {
                config.dims.iter().map(move |&dim| (*law, size, dim))
            })
        })
        .collect();

    let tasks: Vec<(usize, usize)> = (0..sample_cells.len())
        .flat_map(|ci| (0..config.repetitions).map(move |rep| (ci, rep)))
        .collect();

    // per task: one drawn sample, one indicator per selected test
    let raw: Vec<Vec<Result<bool, String>>> = tasks
        .par_iter()
        .map(|&(ci, rep)| {
            let (law, size, dim) = sample_cells[ci];
            let rows = config.rows_for(size);
            let spec = match DistributionSpec::new(law, dim) {
                Ok(s) => s,
                Err(e) => return vec![Err(e.to_string()); config.tests.len()],
            };
            let mut rng = rep_rng(config.master_seed, &law, rows, dim, rep);
            let data = match sample(&spec, rows, &mut rng) {
                Ok(s) => s,
                Err(e) => return vec![Err(e.to_string()); config.tests.len()],
            };
            config
                .tests
                .iter()
                .map(|&t| run_one(t, &data, config.alpha))
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for (ti, &test) in config.tests.iter().enumerate() {
        for (ci, &(law, size, dim)) in sample_cells.iter().enumerate() {
            let base = ci * config.repetitions;
            let mut rejects = 0usize;
            let mut failure: Option<String> = None;
            for rep in 0..config.repetitions {
                match &raw[base + rep][ti] {
                    Ok(true) => rejects += 1,
                    Ok(false) => {}
                    Err(e) => {
                        failure.get_or_insert_with(|| e.clone());
                    }
                }
            }
            let (reject_rate, std_dev, status) = match failure {
                Some(reason) => (None, None, format!("inapplicable: {reason}")),
                None => (
                    Some(rejects as f64 / config.repetitions as f64),
                    Some(indicator_std_dev(rejects, config.repetitions)),
                    "ok".to_string(),
                ),
            };
            cells.push(CellResult {
                test,
                distribution: law.to_string(),
                size,
                dim,
                alpha: config.alpha,
                repetitions: config.repetitions,
                reject_rate,
                std_dev,
                status,
            });
        }
    }

    let summary = summarize(config, &cells);
    PowerReport { cells, summary }
}

fn summarize(config: &ExperimentConfig, cells: &[CellResult]) -> Vec<SummaryRow> {
    let mut summary = Vec::new();
    for &test in &config.tests {
        for &size in &config.sizes {
            for &dim in &config.dims {
                for group in [Group::Normal, Group::NonNormal] {
                    let mut total = 0.0;
                    let mut count = 0usize;
                    for law in &config.distributions {
                        let wanted_group = if law.is_normal_family() {
                            Group::Normal
                        } else {
                            Group::NonNormal
                        };
                        if wanted_group != group {
                            continue;
                        }
                        let tag = law.to_string();
                        let cell = cells.iter().find(|c| {
                            c.test == test
                                && c.size == size
                                && c.dim == dim
                                && c.distribution == tag
                        });
                        if let Some(rate) = cell.and_then(|c| c.reject_rate) {
                            total += match group {
                                Group::Normal => 1.0 - rate,
                                Group::NonNormal => rate,
                            };
                            count += 1;
                        }
                    }
                    if count > 0 {
                        summary.push(SummaryRow {
                            test,
                            group,
                            size,
                            dim,
                            value: total / count as f64,
                            distributions: count,
                        });
                    }
                }
            }
        }
    }
    summary
}
