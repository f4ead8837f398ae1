//! Synthetic two-class dataset generation and principal-component
//! projection.
//!
//! The generator places one Gaussian cluster per class at distinct vertices
//! of a hypercube, mixes the informative coordinates through a random
//! invertible map, derives redundant features as random linear combinations
//! of the informative ones, pads with pure-noise features, and finally
//! flips a configurable fraction of labels. Everything is a pure function
//! of the parameter block, including its seed.

use ndarray::{s, Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::rng;

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n_samples: usize,
    /// Class fractions `[minority, majority]`; must sum to 1.
    pub weights: [f64; 2],
    /// Half-side of the hypercube holding the cluster centroids.
    pub class_sep: f64,
    pub n_features: usize,
    pub n_informative: usize,
    pub n_redundant: usize,
    pub n_clusters_per_class: usize,
    /// Fraction of points whose label is flipped, chosen uniformly.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_samples: 10_000,
            weights: [0.1, 0.9],
            class_sep: 1.2,
            n_features: 5,
            n_informative: 3,
            n_redundant: 1,
            n_clusters_per_class: 1,
            label_noise: 0.01,
            seed: 0,
        }
    }
}

impl GenParams {
    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::parameter("n_samples must be positive"));
        }
        if (self.weights[0] + self.weights[1] - 1.0).abs() > 1e-9 {
            return Err(Error::parameter("weights must sum to 1"));
        }
        if self.weights.iter().any(|w| *w <= 0.0 || *w >= 1.0) {
            return Err(Error::parameter("each weight must lie in (0, 1)"));
        }
        if self.weights[0] > self.weights[1] {
            return Err(Error::parameter(
                "weights are [minority, majority]; minority fraction must not exceed majority",
            ));
        }
        if self.class_sep <= 0.0 {
            return Err(Error::parameter("class_sep must be positive"));
        }
        if self.n_informative == 0 {
            return Err(Error::parameter("n_informative must be positive"));
        }
        if self.n_informative + self.n_redundant > self.n_features {
            return Err(Error::parameter(format!(
                "n_informative + n_redundant = {} exceeds n_features = {}",
                self.n_informative + self.n_redundant,
                self.n_features
            )));
        }
        if self.n_clusters_per_class != 1 {
            return Err(Error::parameter(
                "n_clusters_per_class > 1 is not supported",
            ));
        }
        if !(0.0..1.0).contains(&self.label_noise) {
            return Err(Error::parameter("label_noise must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Picks a pair of opposite vertices of the `{-sep, +sep}^dim` hypercube
/// by seeded shuffle of the vertex codes. Opposite vertices keep the
/// centroid distance, and with it the difficulty of the problem, identical
/// across seeds. Vertex bit b of the code sets coordinate b positive.
fn pick_centroids(dim: usize, sep: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng::stream(seed, "datagen.vertices");
    let code = if dim <= 10 {
        let mut codes: Vec<u64> = (0..(1u64 << dim)).collect();
        codes.shuffle(&mut rng);
        codes[0]
    } else {
        let mask = if dim >= 64 { u64::MAX } else { (1u64 << dim) - 1 };
        rng.random::<u64>() & mask
    };
    let vertex = |code: u64| -> Vec<f64> {
        (0..dim)
            .map(|b| if code >> b & 1 == 1 { sep } else { -sep })
            .collect()
    };
    let antipode = vertex(code).iter().map(|v| -v).collect();
    (vertex(code), antipode)
}

/// Class cloud shape along and across the inter-centroid axis. The
/// majority cloud is stretched toward the minority so that its thinning
/// tail floods the minority region; the minority cloud is mildly
/// elongated the same way, which keeps the local density ratio changing
/// slowly across the overlap band.
struct CloudShape {
    /// Axis and cross-axis deviations of the majority core.
    majority_along: f64,
    majority_perp: f64,
    minority_along: f64,
    minority_perp: f64,
    /// Fraction of majority points interleaved around the minority
    /// centroid.
    co_fraction: f64,
    /// Isotropic standard deviation of the interleaved component.
    co_scale: f64,
    /// Fraction of majority points packed against the minority cloud from
    /// the majority side.
    door_fraction: f64,
    /// Gap between the minority centroid and the packed band, in minority
    /// deviations.
    door_reach: f64,
    /// Axial depth of the packed band.
    door_depth: f64,
}

const CLOUD_SHAPE: CloudShape = CloudShape {
    majority_along: 1.9,
    majority_perp: 1.0,
    minority_along: 1.0,
    minority_perp: 1.0,
    co_fraction: 0.07,
    co_scale: 1.0,
    door_fraction: 0.06,
    door_reach: 1.6,
    door_depth: 1.0,
};

/// Generates the synthetic dataset. Deterministic in `params.seed`.
pub fn generate(params: &GenParams) -> Result<Dataset> {
    generate_shaped(params, &CLOUD_SHAPE)
}

/// Calibration hook for experimenting with cloud shapes; not part of the
/// supported interface.
#[doc(hidden)]
#[allow(clippy::too_many_arguments)]
pub fn generate_with_shape(
    params: &GenParams,
    majority_along: f64,
    majority_perp: f64,
    co_fraction: f64,
    co_scale: f64,
    door_fraction: f64,
    door_reach: f64,
    door_depth: f64,
) -> Result<Dataset> {
    generate_shaped(
        params,
        &CloudShape {
            majority_along,
            majority_perp,
            minority_along: 1.0,
            minority_perp: 1.0,
            co_fraction,
            co_scale,
            door_fraction,
            door_reach,
            door_depth,
        },
    )
}

fn generate_shaped(params: &GenParams, shape: &CloudShape) -> Result<Dataset> {
    params.validate()?;
    let n = params.n_samples;
    let d = params.n_features;
    let n_inf = params.n_informative;
    let n_red = params.n_redundant;
    let n_noise = d - n_inf - n_red;

    let n_minority = (params.weights[0] * n as f64).round() as usize;
    let n_majority = n - n_minority;
    if n_minority == 0 || n_majority == 0 {
        return Err(Error::parameter(
            "class fractions leave one class without points",
        ));
    }

    let (centroid_maj, centroid_min) =
        pick_centroids(n_inf, params.class_sep, params.seed);
    let axis: Array1<f64> = {
        let diff: Array1<f64> = (0..n_inf)
            .map(|j| centroid_min[j] - centroid_maj[j])
            .collect();
        let norm = diff.dot(&diff).sqrt();
        diff / norm
    };

    // Coefficients expressing each redundant feature over the informative
    // block.
    let mut red_rng = rng::stream(params.seed, "datagen.redundant");
    let combination =
        Array2::from_shape_fn((n_red, n_inf), |_| red_rng.random_range(-1.0..1.0));

    let mut point_rng = rng::stream(params.seed, "datagen.points");
    let mut features = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    let co_count = (shape.co_fraction * n_majority as f64).round() as usize;
    let door_count = (shape.door_fraction * n_majority as f64).round() as usize;
    for i in 0..n {
        let deviation: Array1<f64> =
            (0..n_inf).map(|_| point_rng.sample::<f64, _>(StandardNormal)).collect();
        let axial = deviation.dot(&axis);
        let (informative, label) = if i < n_majority {
            let mut v = deviation;
            if i < co_count {
                for (j, x) in v.iter_mut().enumerate() {
                    *x = shape.co_scale * *x + centroid_min[j];
                }
            } else if i < co_count + door_count {
                // One-sided band pressed against the minority cloud: the
                // axial deviation is folded to the majority side and offset
                // by the reach gap.
                let offset = shape.door_reach + shape.door_depth * axial.abs();
                for (j, x) in v.iter_mut().enumerate() {
                    *x = (*x - axial * axis[j]) - offset * axis[j] + centroid_min[j];
                }
            } else {
                let (along, perp) = (shape.majority_along, shape.majority_perp);
                for (j, x) in v.iter_mut().enumerate() {
                    *x = perp * *x + (along - perp) * axial * axis[j] + centroid_maj[j];
                }
            }
            (v, ClassLabel::Majority)
        } else {
            let (along, perp) = (shape.minority_along, shape.minority_perp);
            let mut v = deviation;
            for (j, x) in v.iter_mut().enumerate() {
                *x = perp * *x + (along - perp) * axial * axis[j] + centroid_min[j];
            }
            (v, ClassLabel::Minority)
        };
        let redundant = combination.dot(&informative);
        features.slice_mut(s![i, ..n_inf]).assign(&informative);
        features.slice_mut(s![i, n_inf..n_inf + n_red]).assign(&redundant);
        for j in 0..n_noise {
            features[[i, n_inf + n_red + j]] = point_rng.sample(StandardNormal);
        }
        labels.push(label);
    }

    // Flip labels on a uniformly chosen fraction of the points.
    let n_flips = (params.label_noise * n as f64).round() as usize;
    if n_flips > 0 {
        let mut flip_rng = rng::stream(params.seed, "datagen.flips");
        let mut indices: Vec<usize> = (0..n).collect();
        let (flipped, _) = indices.partial_shuffle(&mut flip_rng, n_flips);
        for &i in flipped.iter() {
            labels[i] = labels[i].other();
        }
    }

    Dataset::new(features, labels)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue;
/// eigenvectors are columns. Intended for small matrices (covariances of
/// at most a few dozen features).
pub(crate) fn jacobi_eigh(matrix: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let d = matrix.nrows();
    assert_eq!(d, matrix.ncols());
    let mut a = matrix.clone();
    let mut v = Array2::eye(d);
    let frob = matrix.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-12 * frob.max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a[[p, q]].abs());
            }
        }
        if off < tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[[p, q]];
                if apq.abs() < tol * 1e-3 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..d {
                    let (aip, aiq) = (a[[i, p]], a[[i, q]]);
                    a[[i, p]] = c * aip - s * aiq;
                    a[[i, q]] = s * aip + c * aiq;
                }
                for j in 0..d {
                    let (apj, aqj) = (a[[p, j]], a[[q, j]]);
                    a[[p, j]] = c * apj - s * aqj;
                    a[[q, j]] = s * apj + c * aqj;
                }
                for i in 0..d {
                    let (vip, viq) = (v[[i, p]], v[[i, q]]);
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[[j, j]].total_cmp(&a[[i, i]]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[[i, i]]).collect();
    let mut eigenvectors = Array2::zeros((d, d));
    for (col, &i) in order.iter().enumerate() {
        for row in 0..d {
            eigenvectors[[row, col]] = v[[row, i]];
        }
    }
    (eigenvalues, eigenvectors)
}

/// Sample covariance matrix of the (centered) feature columns.
fn covariance(centered: &Array2<f64>) -> Array2<f64> {
    let n = centered.nrows();
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    centered.t().dot(centered) / denom
}

/// Projects onto the `k` leading principal components of the sample
/// covariance. Columns are ordered by descending eigenvalue and each
/// component's largest-magnitude loading is made positive. Labels pass
/// through unchanged.
pub fn pca_project(dataset: &Dataset, k: usize) -> Result<Dataset> {
    let d = dataset.d();
    if k == 0 || k > d {
        return Err(Error::parameter(format!(
            "cannot project {d}-dimensional data onto {k} components"
        )));
    }
    if dataset.n() < 2 {
        return Err(Error::parameter("PCA needs at least 2 points"));
    }

    let means: Array1<f64> = dataset
        .features()
        .mean_axis(ndarray::Axis(0))
        .expect("non-empty dataset");
    let centered = &dataset.features() - &means;
    let (_, mut vectors) = jacobi_eigh(&covariance(&centered));

    // Sign convention: the largest-magnitude loading of each component is
    // positive.
    for col in 0..k {
        let mut lead = 0usize;
        for row in 1..d {
            if vectors[[row, col]].abs() > vectors[[lead, col]].abs() {
                lead = row;
            }
        }
        if vectors[[lead, col]] < 0.0 {
            for row in 0..d {
                vectors[[row, col]] = -vectors[[row, col]];
            }
        }
    }

    let projected = centered.dot(&vectors.slice(s![.., ..k]));
    Dataset::new(projected, dataset.labels().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn small_params() -> GenParams {
        GenParams {
            n_samples: 400,
            weights: [0.25, 0.75],
            label_noise: 0.0,
            seed: 7,
            ..GenParams::default()
        }
    }

    #[test]
    fn symmetric_split_is_exact() {
        let params = GenParams {
            n_samples: 10_000,
            weights: [0.5, 0.5],
            label_noise: 0.0,
            seed: 3,
            ..GenParams::default()
        };
        let d = generate(&params).unwrap();
        let (majority, minority) = d.label_counts();
        assert_eq!((majority, minority), (5000, 5000));
    }

    #[test]
    fn same_seed_same_dataset() {
        let params = small_params();
        let a = generate(&params).unwrap();
        let b = generate(&params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seed_different_dataset() {
        let a = generate(&small_params()).unwrap();
        let b = generate(&GenParams { seed: 8, ..small_params() }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn default_parameters_give_expected_minority_range() {
        let params = GenParams { seed: 1, ..GenParams::default() };
        let d = generate(&params).unwrap();
        assert_eq!(d.n(), 10_000);
        assert_eq!(d.d(), 5);
        let (_, minority) = d.label_counts();
        assert!((900..=1100).contains(&minority), "minority = {minority}");
    }

    #[test]
    fn inconsistent_feature_counts_rejected() {
        let params = GenParams { n_features: 3, ..GenParams::default() };
        assert!(generate(&params).is_err());
        let params = GenParams { n_clusters_per_class: 2, ..GenParams::default() };
        assert!(generate(&params).is_err());
        let params = GenParams { weights: [0.4, 0.7], ..GenParams::default() };
        assert!(generate(&params).is_err());
    }

    #[test]
    fn jacobi_recovers_known_eigenpairs() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1 with eigenvectors along
        // (1,1) and (1,-1).
        let m = array![[2.0, 1.0], [1.0, 2.0]];
        let (values, vectors) = jacobi_eigh(&m);
        assert_relative_eq!(values[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(values[1], 1.0, epsilon = 1e-12);
        let ratio = vectors[[0, 0]] / vectors[[1, 0]];
        assert_relative_eq!(ratio, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn full_projection_diagonalizes_covariance() {
        let d = generate(&small_params()).unwrap();
        let p = pca_project(&d, d.d()).unwrap();
        let means = p.features().mean_axis(ndarray::Axis(0)).unwrap();
        let centered = &p.features() - &means;
        let cov = covariance(&centered);
        let scale = (0..cov.nrows()).map(|i| cov[[i, i]]).fold(0.0f64, f64::max);
        for i in 0..cov.nrows() {
            for j in 0..cov.ncols() {
                if i != j {
                    assert!(cov[[i, j]].abs() < 1e-9 * scale, "off-diagonal {}", cov[[i, j]]);
                }
            }
            if i > 0 {
                assert!(cov[[i, i]] <= cov[[i - 1, i - 1]] + 1e-12 * scale);
            }
        }
    }

    #[test]
    fn line_dataset_keeps_all_variance_on_first_component() {
        // Points on y = x; oracle: closed-form eigendecomposition of the
        // 2x2 covariance [[v, v], [v, v]] -> leading eigenvalue 2v.
        let xs = [-2.0, -1.0, 0.0, 0.5, 2.5];
        let features = Array2::from_shape_fn((5, 2), |(i, _)| xs[i]);
        let labels = vec![ClassLabel::Majority; 5];
        let d = Dataset::new(features, labels).unwrap();

        let mean = xs.iter().sum::<f64>() / 5.0;
        let v = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        let total_variance = 2.0 * v;

        let p = pca_project(&d, 1).unwrap();
        let second_moment = p
            .features()
            .column(0)
            .iter()
            .map(|y| y * y)
            .sum::<f64>()
            / 4.0;
        assert_relative_eq!(second_moment, total_variance, epsilon = 1e-9);
    }

    #[test]
    fn projected_variance_matches_leading_eigenvalues() {
        let d = generate(&small_params()).unwrap();
        let means = d.features().mean_axis(ndarray::Axis(0)).unwrap();
        let centered = &d.features() - &means;
        let (eigenvalues, _) = jacobi_eigh(&covariance(&centered));
        for k in 1..=d.d() {
            let p = pca_project(&d, k).unwrap();
            let var: f64 = (0..k)
                .map(|j| {
                    let col = p.features().column(j).to_owned();
                    col.iter().map(|y| y * y).sum::<f64>() / (d.n() - 1) as f64
                })
                .sum();
            let expected: f64 = eigenvalues[..k].iter().sum();
            assert_relative_eq!(var, expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn k_larger_than_dimension_rejected() {
        let d = generate(&small_params()).unwrap();
        assert!(pca_project(&d, d.d() + 1).is_err());
    }
}
