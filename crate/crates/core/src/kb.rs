//! Normality testing through independence of sums and differences.
//!
//! By the Kac-Bernstein characterization, two i.i.d. random vectors X, Y
//! satisfy X−Y ⊥ X+Y exactly when their common distribution is normal.
//! The test therefore splits the input into two halves, forms row-wise
//! differences and sums, and hands the pair to an independence test:
//! rejecting independence rejects normality at the same level.

use rand::seq::SliceRandom;

use crate::dist::SeedScheme;
use crate::error::{Error, Result};
use crate::hsic::{
    hsic_b, hsic_independence_test, permutation_independence_test, PairedSample, TestOutcome,
};
use crate::kernel::{KernelSpec, Sample};

/// The two halves of a split sample.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub first: Sample,
    pub second: Sample,
    /// 1 when an odd trailing observation was discarded, else 0.
    pub dropped_tail: usize,
}

/// Null model for the independence test underneath the normality test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NullMode {
    /// Gamma approximation of the HSIC null (the default).
    Gamma,
    /// Permutation null with the given shuffle count and seed.
    Permutation { shuffles: usize, seed: u64 },
}

/// Options for the normality test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KbOptions {
    /// Kernel policy applied to both the difference and the sum samples
    /// (median-heuristic bandwidths resolve independently per marginal).
    pub kernel: KernelSpec,
    pub null: NullMode,
    /// When set, rows are shuffled with this seed before the split. Off by
    /// default: the order-based split keeps the test fully deterministic.
    pub shuffle_seed: Option<u64>,
}

impl Default for KbOptions {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::median_heuristic(),
            null: NullMode::Gamma,
            shuffle_seed: None,
        }
    }
}

/// Splits a sample into its first and second half, in input order.
///
/// An odd final row is dropped and recorded in `dropped_tail`.
pub fn kb_split(sample: &Sample) -> Result<SplitPair> {
    let m = sample.n();
    if m < 4 {
        return Err(Error::InsufficientData(format!(
            "splitting needs at least 4 rows, got {m}"
        )));
    }
    let half = m / 2;
    let rows = |range: std::ops::Range<usize>| -> Sample {
        let rows: Vec<Vec<f64>> = range.map(|i| sample.row(i).to_vec()).collect();
        Sample::from_rows(&rows).expect("validated rows")
    };
    Ok(SplitPair {
        first: rows(0..half),
        second: rows(half..2 * half),
        dropped_tail: m - 2 * half,
    })
}

/// Row-wise differences (X) and sums (Y) of the two halves.
pub fn sums_and_differences(pair: &SplitPair) -> Result<PairedSample> {
    if pair.first.n() != pair.second.n() || pair.first.d() != pair.second.d() {
        return Err(Error::Shape(format!(
            "halves must have equal shape, got {}x{} and {}x{}",
            pair.first.n(),
            pair.first.d(),
            pair.second.n(),
            pair.second.d()
        )));
    }
    let diff = Sample::new(pair.first.data() - pair.second.data())?;
    let sum = Sample::new(pair.first.data() + pair.second.data())?;
    PairedSample::new(diff, sum)
}

fn shuffled_rows(sample: &Sample, seed: u64) -> Sample {
    let mut order: Vec<usize> = (0..sample.n()).collect();
    order.shuffle(&mut SeedScheme::new(seed).stream(0));
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| sample.row(i).to_vec()).collect();
    Sample::from_rows(&rows).expect("validated rows")
}

/// Normality test at level alpha: rejects when the differences and sums
/// of the two half-samples are found dependent.
pub fn kb_normality_test(sample: &Sample, alpha: f64, opts: &KbOptions) -> Result<TestOutcome> {
    if sample.n() < 12 {
        return Err(Error::InsufficientData(format!(
            "normality test needs at least 12 rows (6 per half), got {}",
            sample.n()
        )));
    }
    let working;
    let input = match opts.shuffle_seed {
        Some(seed) => {
            working = shuffled_rows(sample, seed);
            &working
        }
        None => sample,
    };
    let pair = sums_and_differences(&kb_split(input)?)?;
    match opts.null {
        NullMode::Gamma => hsic_independence_test(&pair, alpha, &opts.kernel, &opts.kernel),
        NullMode::Permutation { shuffles, seed } => {
            permutation_independence_test(&pair, alpha, &opts.kernel, &opts.kernel, shuffles, seed)
        }
    }
}

/// Raw non-normality score n·HSIC_b on the sums/differences pair; larger
/// means less normal. No inferential claim is attached.
pub fn kb_normality_score(sample: &Sample, kernel: &KernelSpec) -> Result<f64> {
    let pair = sums_and_differences(&kb_split(sample)?)?;
    Ok(pair.n() as f64 * hsic_b(&pair, kernel, kernel)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{sample, DistributionSpec, Law, SeedScheme};
    use crate::hsic::NullParams;

    fn draw(law: Law, d: usize, n: usize, seed: u64) -> Sample {
        let spec = DistributionSpec::new(law, d).unwrap();
        sample(&spec, n, &mut SeedScheme::new(seed).stream(0)).unwrap()
    }

    #[test]
    fn split_hand_cases() {
        let s = Sample::from_rows(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]]).unwrap();
        let split = kb_split(&s).unwrap();
        assert_eq!(split.first.data().column(0).to_vec(), vec![1.0, 2.0]);
        assert_eq!(split.second.data().column(0).to_vec(), vec![3.0, 4.0]);
        assert_eq!(split.dropped_tail, 0);

        let s5 = Sample::from_rows(&[
            vec![1.0],
            vec![2.0],
            vec![3.0],
            vec![4.0],
            vec![5.0],
        ])
        .unwrap();
        let split = kb_split(&s5).unwrap();
        assert_eq!(split.first.n(), 2);
        assert_eq!(split.second.n(), 2);
        assert_eq!(split.dropped_tail, 1);

        let s3 = Sample::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(matches!(kb_split(&s3), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn split_reconstructs_input() {
        let s = draw(Law::NormalStdIso, 3, 17, 5);
        let split = kb_split(&s).unwrap();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for i in 0..split.first.n() {
            rows.push(split.first.row(i).to_vec());
        }
        for i in 0..split.second.n() {
            rows.push(split.second.row(i).to_vec());
        }
        for i in (s.n() - split.dropped_tail)..s.n() {
            rows.push(s.row(i).to_vec());
        }
        let rebuilt = Sample::from_rows(&rows).unwrap();
        assert_eq!(rebuilt.data(), s.data());
    }

    #[test]
    fn sums_and_differences_hand_case() {
        let s = Sample::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0], vec![3.0, -1.0], vec![
            0.0, 0.0,
        ]])
        .unwrap();
        let pair = sums_and_differences(&kb_split(&s).unwrap()).unwrap();
        // first rows: (1,2) and (0,0); second rows: (3,-1) and (0,0)
        assert_eq!(pair.x().row(0).to_vec(), vec![-2.0, 3.0]);
        assert_eq!(pair.y().row(0).to_vec(), vec![4.0, 1.0]);

        // exact reconstruction of the halves
        let first = (pair.x().data() + pair.y().data()) / 2.0;
        let second = (pair.y().data() - pair.x().data()) / 2.0;
        let split = kb_split(&s).unwrap();
        assert_eq!(&first, split.first.data());
        assert_eq!(&second, split.second.data());
    }

    #[test]
    fn equal_halves_give_zero_differences() {
        let s = Sample::from_rows(&[vec![1.0], vec![2.0], vec![1.0], vec![2.0]]).unwrap();
        let pair = sums_and_differences(&kb_split(&s).unwrap()).unwrap();
        assert!(pair.x().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn test_is_deterministic() {
        let s = draw(Law::ChiSq { k: 1 }, 2, 60, 31);
        let opts = KbOptions::default();
        let a = kb_normality_test(&s, 0.05, &opts).unwrap();
        let b = kb_normality_test(&s, 0.05, &opts).unwrap();
        assert_eq!(a, b);

        let opts = KbOptions {
            null: NullMode::Permutation {
                shuffles: 150,
                seed: 9,
            },
            ..KbOptions::default()
        };
        let a = kb_normality_test(&s, 0.05, &opts).unwrap();
        let b = kb_normality_test(&s, 0.05, &opts).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a.null, NullParams::Permutation { shuffles: 150 }));
    }

    #[test]
    fn shuffle_option_changes_split_not_determinism() {
        let s = draw(Law::NormalStdIso, 2, 40, 11);
        let opts = KbOptions {
            shuffle_seed: Some(4),
            ..KbOptions::default()
        };
        let a = kb_normality_test(&s, 0.05, &opts).unwrap();
        let b = kb_normality_test(&s, 0.05, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn test_preconditions() {
        let s = draw(Law::NormalStdIso, 2, 11, 1);
        assert!(matches!(
            kb_normality_test(&s, 0.05, &KbOptions::default()),
            Err(Error::InsufficientData(_))
        ));
        let constant = Sample::from_rows(&vec![vec![2.0, 2.0]; 20]).unwrap();
        assert!(matches!(
            kb_normality_test(&constant, 0.05, &KbOptions::default()),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn score_is_nonnegative_and_ranks_skewed_above_normal() {
        let kernel = KernelSpec::median_heuristic();
        let mut chi_scores = Vec::new();
        let mut normal_scores = Vec::new();
        for rep in 0..20 {
            let chi = draw(Law::ChiSq { k: 1 }, 1, 200, 100 + rep);
            let norm = draw(Law::NormalStdIso, 1, 200, 200 + rep);
            let a = kb_normality_score(&chi, &kernel).unwrap();
            let b = kb_normality_score(&norm, &kernel).unwrap();
            assert!(a >= 0.0 && b >= 0.0);
            chi_scores.push(a);
            normal_scores.push(b);
        }
        let median = |v: &mut Vec<f64>| {
            v.sort_unstable_by(|a, b| a.total_cmp(b));
            v[v.len() / 2]
        };
        assert!(
            median(&mut chi_scores) > median(&mut normal_scores),
            "skewed data must score higher"
        );
    }

    #[test]
    fn score_invariant_under_within_half_permutation() {
        let s = draw(Law::NormalStdIso, 2, 24, 3);
        let kernel = KernelSpec::median_heuristic();
        let base = kb_normality_score(&s, &kernel).unwrap();

        // permute rows within each half in the original sample
        let order: Vec<usize> = vec![5, 2, 0, 9, 4, 3, 11, 1, 10, 7, 6, 8];
        let mut rows: Vec<Vec<f64>> = order.iter().map(|&i| s.row(i).to_vec()).collect();
        rows.extend((12..24).map(|i| s.row(order[i - 12] + 12).to_vec()));
        let permuted = Sample::from_rows(&rows).unwrap();
        let v = kb_normality_score(&permuted, &kernel).unwrap();
        assert!((v - base).abs() <= 1e-12, "{v} vs {base}");
    }
}
