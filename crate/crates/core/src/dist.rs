//! Seeded samplers for the power-study distributions: four multivariate
//! normal families plus the i.i.d.-component non-normal laws, and the
//! seed-derivation scheme that gives every repetition its own stream.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma as GammaDist, Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::kernel::Sample;

/// A sampling law, nameable in harness configs by its `Display` tag,
/// e.g. `ChiSq(1)`, `Uniform(-1,1)`, `NormalMixture`.
///
/// The normal families draw their mean/covariance-factor parameters from
/// the provided RNG at sampling time, so each repetition sees a fresh
/// (μ, C = UUᵀ) pair; the component laws fill each coordinate i.i.d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    /// N(0, I)
    NormalStdIso,
    /// N(0, UUᵀ) with U entries i.i.d. uniform on [0, 1]
    NormalCov,
    /// N(μ, I) with μ entries i.i.d. uniform on [−1, 1]
    NormalMeanIso,
    /// N(μ, UUᵀ) with μ, U as above
    NormalMeanCov,
    /// χ²(k) components, sampled as sums of k squared standard normals
    ChiSq { k: u32 },
    /// Uniform components on [lo, hi)
    Uniform { lo: f64, hi: f64 },
    /// Laplace components via inverse CDF
    Laplace { loc: f64, scale: f64 },
    /// Logistic components via inverse CDF
    Logistic { loc: f64, scale: f64 },
    /// Power-function components: density k·x^(k−1) on [0, 1]
    Power { exponent: f64 },
    /// Cauchy components via the tangent transform
    Cauchy { loc: f64, scale: f64 },
    /// Beta components via two gamma draws
    Beta { a: f64, b: f64 },
    /// Two-component scalar normal mixture with common σ
    NormalMixture {
        weight: f64,
        mu1: f64,
        mu2: f64,
        sigma: f64,
    },
}

impl Law {
    /// Whether samples from this law are multivariate normal.
    pub fn is_normal_family(&self) -> bool {
        matches!(
            self,
            Law::NormalStdIso | Law::NormalCov | Law::NormalMeanIso | Law::NormalMeanCov
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Law::ChiSq { k: 0 } => bad("ChiSq needs k >= 1".into()),
            Law::Uniform { lo, hi } if !(lo < hi) => {
                bad(format!("Uniform needs lo < hi, got ({lo}, {hi})"))
            }
            Law::Laplace { scale, .. } | Law::Logistic { scale, .. } | Law::Cauchy { scale, .. }
                if !(scale > 0.0) =>
            {
                bad(format!("scale must be positive, got {scale}"))
            }
            Law::Power { exponent } if !(exponent > 0.0) => {
                bad(format!("Power needs a positive exponent, got {exponent}"))
            }
            Law::Beta { a, b } if !(a > 0.0 && b > 0.0) => {
                bad(format!("Beta needs positive shapes, got ({a}, {b})"))
            }
            Law::NormalMixture { weight, .. } if !(weight > 0.0 && weight < 1.0) => {
                bad(format!("mixture weight must lie in (0, 1), got {weight}"))
            }
            Law::NormalMixture { sigma, .. } if !(sigma > 0.0) => {
                bad(format!("mixture sigma must be positive, got {sigma}"))
            }
            _ => Ok(()),
        }
    }

    /// The four normal families used by the power study.
    pub fn normal_suite() -> Vec<Law> {
        vec![
            Law::NormalStdIso,
            Law::NormalCov,
            Law::NormalMeanIso,
            Law::NormalMeanCov,
        ]
    }

    /// The thirteen non-normal component laws used by the power study.
    pub fn nonnormal_suite() -> Vec<Law> {
        vec![
            Law::ChiSq { k: 1 },
            Law::ChiSq { k: 2 },
            Law::Uniform { lo: 0.0, hi: 1.0 },
            Law::Uniform { lo: -1.0, hi: 1.0 },
            Law::Laplace {
                loc: 0.0,
                scale: 1.0,
            },
            Law::Logistic {
                loc: 0.0,
                scale: 1.0,
            },
            Law::Logistic {
                loc: 0.0,
                scale: 2.0,
            },
            Law::Power { exponent: 2.0 },
            Law::Cauchy {
                loc: 0.0,
                scale: 1.0,
            },
            Law::Beta { a: 5.0, b: 5.0 },
            Law::Beta { a: 8.0, b: 2.0 },
            Law::Beta { a: 2.0, b: 8.0 },
            Law::NormalMixture {
                weight: 0.5,
                mu1: 0.0,
                mu2: 0.5,
                sigma: 1.0,
            },
        ]
    }

    // One scalar draw for the i.i.d.-component laws. Must not be called on
    // the normal families, which have cross-coordinate structure.
    fn sample_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Law::ChiSq { k } => (0..k)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    z * z
                })
                .sum(),
            Law::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Law::Laplace { loc, scale } => {
                let u: f64 = rng.sample(Open01);
                let c = u - 0.5;
                loc - scale * c.signum() * (1.0 - 2.0 * c.abs()).ln()
            }
            Law::Logistic { loc, scale } => {
                let u: f64 = rng.sample(Open01);
                loc + scale * (u / (1.0 - u)).ln()
            }
            Law::Power { exponent } => {
                let u: f64 = rng.random();
                u.powf(1.0 / exponent)
            }
            Law::Cauchy { loc, scale } => {
                let u: f64 = rng.sample(Open01);
                loc + scale * (std::f64::consts::PI * (u - 0.5)).tan()
            }
            Law::Beta { a, b } => {
                // parameters validated before sampling
                let x = GammaDist::new(a, 1.0).expect("validated").sample(rng);
                let y = GammaDist::new(b, 1.0).expect("validated").sample(rng);
                x / (x + y)
            }
            Law::NormalMixture {
                weight,
                mu1,
                mu2,
                sigma,
            } => {
                let mu = if rng.random::<f64>() < weight {
                    mu1
                } else {
                    mu2
                };
                let z: f64 = rng.sample(StandardNormal);
                mu + sigma * z
            }
            Law::NormalStdIso | Law::NormalCov | Law::NormalMeanIso | Law::NormalMeanCov => {
                unreachable!("normal families are sampled row-wise")
            }
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Law::NormalStdIso => write!(f, "NormalStdIso"),
            Law::NormalCov => write!(f, "NormalCov"),
            Law::NormalMeanIso => write!(f, "NormalMeanIso"),
            Law::NormalMeanCov => write!(f, "NormalMeanCov"),
            Law::ChiSq { k } => write!(f, "ChiSq({k})"),
            Law::Uniform { lo, hi } => write!(f, "Uniform({lo},{hi})"),
            Law::Laplace { loc, scale } => write!(f, "Laplace({loc},{scale})"),
            Law::Logistic { loc, scale } => write!(f, "Logistic({loc},{scale})"),
            Law::Power { exponent } => write!(f, "Power({exponent})"),
            Law::Cauchy { loc, scale } => write!(f, "Cauchy({loc},{scale})"),
            Law::Beta { a, b } => write!(f, "Beta({a},{b})"),
            Law::NormalMixture {
                weight,
                mu1,
                mu2,
                sigma,
            } => write!(f, "NormalMixture({weight},{mu1},{mu2},{sigma})"),
        }
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) => {
                let close = s
                    .rfind(')')
                    .ok_or_else(|| Error::InvalidParameter(format!("unbalanced '(' in '{s}'")))?;
                let inner = &s[open + 1..close];
                let args: Vec<f64> = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|t| {
                            t.trim().parse::<f64>().map_err(|_| {
                                Error::InvalidParameter(format!(
                                    "cannot parse '{}' as a number in '{s}'",
                                    t.trim()
                                ))
                            })
                        })
                        .collect::<Result<_>>()?
                };
                (&s[..open], args)
            }
            None => (s, Vec::new()),
        };

        let expect = |want: usize, args: &[f64]| -> Result<()> {
            if args.len() == want {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "'{name}' takes {want} argument(s), got {}",
                    args.len()
                )))
            }
        };

        let law = match name {
            "NormalStdIso" => {
                expect(0, &args)?;
                Law::NormalStdIso
            }
            "NormalCov" => {
                expect(0, &args)?;
                Law::NormalCov
            }
            "NormalMeanIso" => {
                expect(0, &args)?;
                Law::NormalMeanIso
            }
            "NormalMeanCov" => {
                expect(0, &args)?;
                Law::NormalMeanCov
            }
            "ChiSq" => {
                expect(1, &args)?;
                if args[0].fract() != 0.0 || args[0] < 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "ChiSq needs a positive integer k, got {}",
                        args[0]
                    )));
                }
                Law::ChiSq { k: args[0] as u32 }
            }
            "Uniform" => {
                expect(2, &args)?;
                Law::Uniform {
                    lo: args[0],
                    hi: args[1],
                }
            }
            "Laplace" => {
                expect(2, &args)?;
                Law::Laplace {
                    loc: args[0],
                    scale: args[1],
                }
            }
            "Logistic" => {
                expect(2, &args)?;
                Law::Logistic {
                    loc: args[0],
                    scale: args[1],
                }
            }
            "Power" => {
                expect(1, &args)?;
                Law::Power { exponent: args[0] }
            }
            "Cauchy" => {
                expect(2, &args)?;
                Law::Cauchy {
                    loc: args[0],
                    scale: args[1],
                }
            }
            "Beta" => {
                expect(2, &args)?;
                Law::Beta {
                    a: args[0],
                    b: args[1],
                }
            }
            "NormalMixture" => {
                if args.is_empty() {
                    Law::NormalMixture {
                        weight: 0.5,
                        mu1: 0.0,
                        mu2: 0.5,
                        sigma: 1.0,
                    }
                } else {
                    expect(4, &args)?;
                    Law::NormalMixture {
                        weight: args[0],
                        mu1: args[1],
                        mu2: args[2],
                        sigma: args[3],
                    }
                }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown distribution '{other}'"
                )))
            }
        };
        law.validate()?;
        Ok(law)
    }
}

/// A law together with the dimension to sample in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    pub law: Law,
    pub d: usize,
}

impl DistributionSpec {
    pub fn new(law: Law, d: usize) -> Result<Self> {
        law.validate()?;
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(Self { law, d })
    }
}

/// Draws the random mean/covariance-factor pair used by the normal
/// families: μ entries i.i.d. uniform on [−1, 1], then U entries i.i.d.
/// uniform on [0, 1] in row-major order. The implied covariance is UUᵀ.
pub fn random_mean_and_cov_factor<R: Rng + ?Sized>(
    d: usize,
    rng: &mut R,
) -> (Array1<f64>, Array2<f64>) {
    let mut mu = Array1::zeros(d);
    for v in mu.iter_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    let mut u = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            u[[i, j]] = rng.random::<f64>();
        }
    }
    (mu, u)
}

/// Draws an n×d sample from the given distribution.
///
/// Normal families are sampled as x = μ + Uz with z i.i.d. standard
/// normal, so the covariance is exactly UUᵀ without any factorization.
pub fn sample<R: Rng + ?Sized>(spec: &DistributionSpec, n: usize, rng: &mut R) -> Result<Sample> {
    spec.law.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be >= 1".into(),
        ));
    }
    let d = spec.d;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }

    let data = match spec.law {
        Law::NormalStdIso => normal_rows(n, d, None, None, rng),
        Law::NormalMeanIso => {
            let mut mu = Array1::zeros(d);
            for v in mu.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
            normal_rows(n, d, Some(&mu), None, rng)
        }
        Law::NormalCov => {
            let mut u = Array2::zeros((d, d));
            for i in 0..d {
                for j in 0..d {
                    u[[i, j]] = rng.random::<f64>();
                }
            }
            normal_rows(n, d, None, Some(&u), rng)
        }
        Law::NormalMeanCov => {
            let (mu, u) = random_mean_and_cov_factor(d, rng);
            normal_rows(n, d, Some(&mu), Some(&u), rng)
        }
        law => {
            let mut data = Array2::zeros((n, d));
            for i in 0..n {
                for j in 0..d {
                    data[[i, j]] = law.sample_scalar(rng);
                }
            }
            data
        }
    };
    Sample::new(data)
}

fn normal_rows<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    mu: Option<&Array1<f64>>,
    factor: Option<&Array2<f64>>,
    rng: &mut R,
) -> Array2<f64> {
    let mut data = Array2::zeros((n, d));
    let mut z = vec![0.0; d];
    for i in 0..n {
        for zj in z.iter_mut() {
            *zj = rng.sample(StandardNormal);
        }
        for j in 0..d {
            let v = match factor {
                Some(u) => {
                    let mut acc = 0.0;
                    for (k, zk) in z.iter().enumerate() {
                        acc += u[[j, k]] * zk;
                    }
                    acc
                }
                None => z[j],
            };
            data[[i, j]] = v + mu.map_or(0.0, |m| m[j]);
        }
    }
    data
}

/// Derives independent seeded streams from one master seed.
///
/// The derivation is a pure function of (master, index); distinct indices
/// give distinct stream seeds (the mixing is bijective in the index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedScheme {
    pub master_seed: u64,
}

impl SeedScheme {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Stream seed for a repetition index.
    pub fn stream_seed(&self, index: u64) -> u64 {
        splitmix64(self.master_seed ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
    }

    /// A ChaCha stream for a repetition index.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.stream_seed(index))
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
