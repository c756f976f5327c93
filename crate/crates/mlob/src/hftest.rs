//! Bucketed quadratic-covariation test for instantaneous adverse selection.
//!
//! The trade clock is split into equal-count buckets. Per bucket the
//! covariation estimator and its variance proxy are
//!
//! ```text
//! C = Σ_{n=1..m}   Δ_n p Δ_n L
//! V = N · Σ_{n=1..m−1} ( (Δ_n p Δ_{n+1} L)² + Δ_n p Δ_n L Δ_{n+1} p Δ_{n+1} L )
//! ```
//!
//! with `m` increments and `N = m + 1` grid points in the bucket, and the
//! normalized statistic `Z = C / sqrt(V / N)` is asymptotically standard
//! normal when the diffusions driving prices and inventories are locally
//! uncorrelated. The per-bucket rejection probability of the null "some
//! ρ_t > 0" is `π = Φ(−Z)`; the overall probability multiplies the buckets.

use thiserror::Error;

use crate::stats::{normal_cdf, pearson};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HfTestError {
    #[error("bucket {bucket} has {increments} increments, need at least 3")]
    BucketTooSmall { bucket: usize, increments: usize },
    #[error("a correlated series has zero variance")]
    ZeroVariance,
}

/// Which variance proxy to use: the cross-index form above, or the
/// symmetric one that squares `Δ_n p Δ_n L` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceKind {
    #[default]
    AsPrinted,
    Symmetric,
}

/// Raw per-bucket sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketStat {
    pub index: usize,
    /// Σ Δp·ΔL over the bucket.
    pub c: f64,
    /// Variance proxy, including the grid-point prefactor.
    pub v: f64,
    /// Grid points in the bucket (increments + 1).
    pub grid_points: usize,
}

impl BucketStat {
    /// `C / sqrt(V/N)`; `None` when the variance proxy is not positive.
    pub fn z(&self) -> Option<f64> {
        if self.v > 0.0 {
            Some(self.c / (self.v / self.grid_points as f64).sqrt())
        } else {
            None
        }
    }
}

/// Splits the increment pairs into `buckets` runs of equal trade counts
/// (remainder to the last) and computes the per-bucket sums.
pub fn bucket_stats(
    pairs: &[(f64, f64)],
    buckets: usize,
    kind: VarianceKind,
) -> Result<Vec<BucketStat>, HfTestError> {
    assert!(buckets > 0, "bucket count must be positive");
    let per = pairs.len() / buckets;
    let mut out = Vec::with_capacity(buckets);
    for k in 0..buckets {
        let start = k * per;
        let end = if k + 1 == buckets {
            pairs.len()
        } else {
            (k + 1) * per
        };
        let chunk = &pairs[start..end.max(start)];
        if chunk.len() < 3 {
            return Err(HfTestError::BucketTooSmall {
                bucket: k,
                increments: chunk.len(),
            });
        }
        let c: f64 = chunk.iter().map(|(dp, dl)| dp * dl).sum();
        let grid_points = chunk.len() + 1;
        let inner: f64 = chunk
            .windows(2)
            .map(|w| {
                let (dp0, dl0) = w[0];
                let (dp1, dl1) = w[1];
                let sq = match kind {
                    VarianceKind::AsPrinted => (dp0 * dl1) * (dp0 * dl1),
                    VarianceKind::Symmetric => (dp0 * dl0) * (dp0 * dl0),
                };
                sq + dp0 * dl0 * dp1 * dl1
            })
            .sum();
        out.push(BucketStat {
            index: k,
            c,
            v: grid_points as f64 * inner,
            grid_points,
        });
    }
    Ok(out)
}

/// One bucket's test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketTestResult {
    pub stat: BucketStat,
    pub z: Option<f64>,
    /// `Φ(−Z)`, absent for degenerate buckets.
    pub pi: Option<f64>,
}

/// Whole-tape outcome: degenerate buckets (V ≤ 0) are flagged and excluded
/// from the product, never silently patched.
#[derive(Debug, Clone, PartialEq)]
pub struct AdverseSelectionTest {
    pub buckets: Vec<BucketTestResult>,
    /// Product of the valid per-bucket rejection probabilities; `None`
    /// when every bucket is degenerate.
    pub overall: Option<f64>,
    pub degenerate_buckets: usize,
}

pub fn rejection_probabilities(stats: &[BucketStat]) -> AdverseSelectionTest {
    let mut results = Vec::with_capacity(stats.len());
    let mut overall: Option<f64> = None;
    let mut degenerate = 0usize;
    for stat in stats {
        let z = stat.z();
        let pi = z.map(|z| normal_cdf(-z));
        match pi {
            Some(p) => overall = Some(overall.unwrap_or(1.0) * p),
            None => degenerate += 1,
        }
        results.push(BucketTestResult { stat: *stat, z, pi });
    }
    AdverseSelectionTest {
        buckets: results,
        overall,
        degenerate_buckets: degenerate,
    }
}

/// Convenience: bucket statistics and rejection probabilities in one pass.
pub fn run_test(
    pairs: &[(f64, f64)],
    buckets: usize,
    kind: VarianceKind,
) -> Result<AdverseSelectionTest, HfTestError> {
    Ok(rejection_probabilities(&bucket_stats(pairs, buckets, kind)?))
}

/// Pearson correlation of the `(Δ_n p, Δ_n L)` increments over the window.
pub fn sample_correlation(pairs: &[(f64, f64)]) -> Result<f64, HfTestError> {
    let dps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let dls: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    pearson(&dps, &dls).ok_or(HfTestError::ZeroVariance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{diffusion_increments, DiffusionConfig};
    use crate::stats::median;

    #[test]
    fn hand_evaluated_single_bucket() {
        // Δp = [1,−1,1], ΔL = [−1,1,−1]: C = −3, V = 4·(2+2) = 16, Z = −3/2
        let pairs = [(1.0, -1.0), (-1.0, 1.0), (1.0, -1.0)];
        let stats = bucket_stats(&pairs, 1, VarianceKind::AsPrinted).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].c, -3.0);
        assert_eq!(stats[0].v, 16.0);
        assert_eq!(stats[0].grid_points, 4);
        assert_eq!(stats[0].z(), Some(-1.5));
    }

    #[test]
    fn zero_inventory_changes_are_degenerate() {
        let pairs = [(1.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (0.5, 0.0)];
        let stats = bucket_stats(&pairs, 1, VarianceKind::AsPrinted).unwrap();
        assert_eq!(stats[0].c, 0.0);
        assert_eq!(stats[0].v, 0.0);
        assert_eq!(stats[0].z(), None);
        let test = rejection_probabilities(&stats);
        assert_eq!(test.degenerate_buckets, 1);
        assert_eq!(test.overall, None);
    }

    #[test]
    fn bucket_too_small() {
        let pairs = [(1.0, 1.0); 5];
        assert_eq!(
            bucket_stats(&pairs, 2, VarianceKind::AsPrinted),
            Err(HfTestError::BucketTooSmall {
                bucket: 0,
                increments: 2
            })
        );
    }

    #[test]
    fn pi_of_zero_z_is_half_and_product_matches_cdf_oracle() {
        let stats = [
            BucketStat {
                index: 0,
                c: 0.0,
                v: 4.0,
                grid_points: 4,
            };
            1
        ];
        let t = rejection_probabilities(&stats);
        assert_eq!(t.buckets[0].pi, Some(0.5));

        // Z = [−3,−3,−3] -> overall = Φ(3)³ ≈ 0.99596
        let z3 = BucketStat {
            index: 0,
            c: -3.0,
            v: 4.0, // grid 4 -> sqrt(V/N) = 1 -> Z = −3
            grid_points: 4,
        };
        let t = rejection_probabilities(&[z3, z3, z3]);
        let overall = t.overall.unwrap();
        assert!((overall - normal_cdf(3.0).powi(3)).abs() < 1e-12);
        assert!((overall - 0.99596).abs() < 5e-5);
    }

    #[test]
    fn pi_monotone_decreasing_in_z_and_order_invariant() {
        let mk = |c: f64| BucketStat {
            index: 0,
            c,
            v: 4.0,
            grid_points: 4,
        };
        let pis: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&c| rejection_probabilities(&[mk(c)]).overall.unwrap())
            .collect();
        assert!(pis.windows(2).all(|w| w[0] > w[1]));

        let a = rejection_probabilities(&[mk(-1.0), mk(2.0), mk(0.3)]);
        let b = rejection_probabilities(&[mk(0.3), mk(-1.0), mk(2.0)]);
        assert!((a.overall.unwrap() - b.overall.unwrap()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_variance_variant() {
        // Δp = [1,−1,1], ΔL = [−1,1,−1]: symmetric inner terms are
        // (Δ_n p Δ_n L)² + cross = 1 + 1 per pair, same as printed here;
        // distinguish with an asymmetric series
        let pairs = [(1.0, 2.0), (-1.0, 1.0), (0.5, -1.0)];
        let printed = bucket_stats(&pairs, 1, VarianceKind::AsPrinted).unwrap()[0].v;
        let symmetric = bucket_stats(&pairs, 1, VarianceKind::Symmetric).unwrap()[0].v;
        // printed: 4·[(1·1)² + 2·(−1) + (−1·−1)² + (−1)(−0.5)] = 4·(1−2+1+0.5)
        assert!((printed - 4.0 * 0.5).abs() < 1e-12);
        // symmetric: 4·[(2)² + 2·(−1) + (−1)² + (−1)(−0.5)] = 4·(4−2+1+0.5)
        assert!((symmetric - 4.0 * 3.5).abs() < 1e-12);
    }

    #[test]
    fn correlation_trivial_and_degenerate() {
        let pairs: Vec<(f64, f64)> = [0.5, -1.0, 2.0, 0.25]
            .iter()
            .map(|&dp| (dp, -dp))
            .collect();
        assert!((sample_correlation(&pairs).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(
            sample_correlation(&[(1.0, 0.0), (2.0, 0.0)]),
            Err(HfTestError::ZeroVariance)
        );
    }

    #[test]
    fn independent_increments_have_small_correlation() {
        let n = 10_000;
        let pairs = diffusion_increments(&DiffusionConfig {
            n,
            rho: 0.0,
            sigma: 1.0,
            vol_l: 1.0,
            horizon: 1.0,
            seed: 7,
        })
        .unwrap();
        let rho = sample_correlation(&pairs).unwrap();
        assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "rho = {rho}");
    }

    #[test]
    fn target_correlation_recovered() {
        let pairs = diffusion_increments(&DiffusionConfig {
            n: 10_000,
            rho: -0.3,
            sigma: 1.0,
            vol_l: 1.0,
            horizon: 1.0,
            seed: 11,
        })
        .unwrap();
        let rho = sample_correlation(&pairs).unwrap();
        assert!((rho + 0.3).abs() < 0.05, "rho = {rho}");
    }

    #[test]
    fn z_is_empirically_standard_normal_under_rho_zero() {
        // modest replication count here; the acceptance suite runs the full one
        let mut zs = Vec::new();
        for seed in 0..400u64 {
            let pairs = diffusion_increments(&DiffusionConfig {
                n: 1024,
                rho: 0.0,
                sigma: 1.0,
                vol_l: 1.0,
                horizon: 1.0,
                seed: 1000 + seed,
            })
            .unwrap();
            let stats = bucket_stats(&pairs, 1, VarianceKind::AsPrinted).unwrap();
            zs.push(stats[0].z().unwrap());
        }
        let d = crate::stats::ks_distance_standard_normal(&zs);
        assert!(d < 0.07, "ks distance {d}");
    }

    #[test]
    fn median_z_diverges_under_negative_rho() {
        let mut medians = Vec::new();
        for &n in &[256usize, 1024, 4096] {
            let mut zs = Vec::new();
            for rep in 0..100u64 {
                let pairs = diffusion_increments(&DiffusionConfig {
                    n,
                    rho: -0.4,
                    sigma: 1.0,
                    vol_l: 1.0,
                    horizon: 1.0,
                    seed: 5000 + rep,
                })
                .unwrap();
                let stats = bucket_stats(&pairs, 1, VarianceKind::AsPrinted).unwrap();
                zs.push(stats[0].z().unwrap());
            }
            medians.push(median(&zs));
        }
        assert!(
            medians[0] > medians[1] && medians[1] > medians[2],
            "medians not decreasing: {medians:?}"
        );
        assert!(medians[2] < -10.0);
    }
}
