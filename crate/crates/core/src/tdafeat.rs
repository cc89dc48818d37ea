//! K-means descriptors of persistence diagrams.
//!
//! Each diagram is clustered in `(birth, death)` coordinates, the clusters
//! are ranked by mean lifespan into less / moderately / highly persistent,
//! and each cluster contributes its share of the points and the distance of
//! its centroid from the diagonal. Two diagrams give the 12-entry vector.

use alloc::vec::Vec;

use rand::Rng as _;

use crate::persistence::{PersistenceDiagram, PersistencePoint, PointFilter};
use crate::rng;

pub const DEFAULT_K: usize = 3;
pub const MAX_ITERATIONS: usize = 100;
pub const CENTROID_TOL: f64 = 1e-6;

/// Column names of [`TopoFeatureVector`], in order.
pub const FEATURE_NAMES: [&str; 12] = [
    "dg0_frac_less",
    "dg0_frac_moderate",
    "dg0_frac_high",
    "dg0_dist_less",
    "dg0_dist_moderate",
    "dg0_dist_high",
    "exdg1_frac_less",
    "exdg1_frac_moderate",
    "exdg1_frac_high",
    "exdg1_dist_less",
    "exdg1_dist_moderate",
    "exdg1_dist_high",
];

pub type Point2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PersistenceLabel {
    Less,
    Moderate,
    High,
}

impl PersistenceLabel {
    pub const ALL: [PersistenceLabel; 3] = [PersistenceLabel::Less, PersistenceLabel::Moderate, PersistenceLabel::High];
}

/// Result of [`kmeans`], optionally labeled by [`label_clusters_by_persistence`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredDiagram {
    pub points: Vec<Point2>,
    pub assignment: Vec<usize>,
    pub centroids: Vec<Point2>,
    /// Label per cluster index; `None` for unlabeled or empty clusters.
    pub labels: Vec<Option<PersistenceLabel>>,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

impl ClusteredDiagram {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn cluster_with_label(&self, label: PersistenceLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == Some(label))
    }
}

fn sq_dist(a: &Point2, b: &Point2) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

fn nearest(p: &Point2, centroids: &[Point2]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// k-means++ seeding: the first centre uniformly, the rest with probability
/// proportional to squared distance. Stops early once every point coincides
/// with a chosen centre, so at most `min(k, distinct points)` centres.
fn plus_plus_seeds(points: &[Point2], k: usize, rng: &mut rng::Rng) -> Vec<Point2> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        if !(total > 0.0) {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        let c = points[pick.expect("total > 0 implies a positive weight")];
        centroids.push(c);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
    }
    centroids
}

fn assign(points: &[Point2], centroids: &[Point2], assignment: &mut [usize]) -> (bool, f64) {
    let mut changed = false;
    let mut inertia = 0.0;
    for (p, a) in points.iter().zip(assignment.iter_mut()) {
        let (i, d) = nearest(p, centroids);
        if *a != i {
            *a = i;
            changed = true;
        }
        inertia += d;
    }
    (changed, inertia)
}

/// Lloyd's algorithm from k-means++ seeds. Returns `None` for an empty input.
///
/// Iterates until the assignment no longer changes and the largest centroid
/// shift is below [`CENTROID_TOL`], or [`MAX_ITERATIONS`] updates. Ties go to
/// the lower cluster index; empty clusters keep their previous centroid.
pub fn kmeans(points: &[Point2], k: usize, seed: u64) -> Option<ClusteredDiagram> {
    if points.is_empty() || k == 0 {
        return None;
    }
    let mut rng = rng::seeded(seed);
    let mut centroids = plus_plus_seeds(points, k, &mut rng);
    let mut assignment = alloc::vec![usize::MAX; points.len()];
    let (_, inertia) = assign(points, &centroids, &mut assignment);
    let mut inertia_history = alloc::vec![inertia];

    for _ in 0..MAX_ITERATIONS {
        let mut sums = alloc::vec![[0.0f64; 2]; centroids.len()];
        let mut counts = alloc::vec![0usize; centroids.len()];
        for (p, &a) in points.iter().zip(&assignment) {
            sums[a][0] += p[0];
            sums[a][1] += p[1];
            counts[a] += 1;
        }
        let mut shift = 0.0f64;
        for ((c, s), &n) in centroids.iter_mut().zip(&sums).zip(&counts) {
            if n == 0 {
                continue;
            }
            let next = [s[0] / n as f64, s[1] / n as f64];
            shift = shift.max(libm::sqrt(sq_dist(c, &next)));
            *c = next;
        }
        let (changed, inertia) = assign(points, &centroids, &mut assignment);
        inertia_history.push(inertia);
        if !changed && shift < CENTROID_TOL {
            break;
        }
    }
    let labels = alloc::vec![None; centroids.len()];
    Some(ClusteredDiagram {
        points: points.to_vec(),
        assignment,
        centroids,
        labels,
        inertia_history,
    })
}

/// Ranks non-empty clusters by mean lifespan `|death − birth|` of their
/// members: shortest gets `Less`, then `Moderate`, then `High`. Equal means
/// keep cluster-index order. With fewer than three clusters the higher
/// labels are absent.
pub fn label_clusters_by_persistence(mut clustered: ClusteredDiagram) -> ClusteredDiagram {
    let k = clustered.k();
    let mut sum = alloc::vec![0.0f64; k];
    let mut count = alloc::vec![0usize; k];
    for (p, &a) in clustered.points.iter().zip(&clustered.assignment) {
        sum[a] += (p[1] - p[0]).abs();
        count[a] += 1;
    }
    let mut ranked: Vec<(usize, f64)> = (0..k)
        .filter(|&i| count[i] > 0)
        .map(|i| (i, sum[i] / count[i] as f64))
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    clustered.labels = alloc::vec![None; k];
    for ((cluster, _), label) in ranked.iter().zip(PersistenceLabel::ALL) {
        clustered.labels[*cluster] = Some(label);
    }
    clustered
}

/// Perpendicular distance of `(birth, death)` from the diagonal.
pub fn diagonal_distance(p: &Point2) -> f64 {
    (p[1] - p[0]).abs() / core::f64::consts::SQRT_2
}

/// Six descriptors of one diagram: cluster fractions then centroid
/// distances, each ordered less / moderate / high. Absent labels and empty
/// diagrams contribute zeros.
pub fn diagram_features(points: &[Point2], k: usize, seed: u64) -> [f64; 6] {
    let mut out = [0.0; 6];
    let Some(clustered) = kmeans(points, k, seed) else {
        return out;
    };
    let clustered = label_clusters_by_persistence(clustered);
    let sizes = clustered.cluster_sizes();
    let total = points.len() as f64;
    for (slot, label) in PersistenceLabel::ALL.iter().enumerate() {
        if let Some(c) = clustered.cluster_with_label(*label) {
            out[slot] = sizes[c] as f64 / total;
            out[3 + slot] = diagonal_distance(&clustered.centroids[c]);
        }
    }
    out
}

/// How essential (infinite-death) dimension-0 points enter the clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EssentialHandling {
    Exclude,
    /// Replace `∞` by this value (typically the largest filtration value).
    Cap(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureOptions {
    pub k: usize,
    pub keep_diagonal: bool,
    pub essential: EssentialHandling,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            keep_diagonal: false,
            essential: EssentialHandling::Exclude,
        }
    }
}

/// The 12 descriptors in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopoFeatureVector(pub [f64; 12]);

impl TopoFeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Points of a diagram after applying the feature options.
pub fn clustering_points(points: &[PersistencePoint], options: &FeatureOptions) -> Vec<Point2> {
    let filter = PointFilter {
        keep_diagonal: options.keep_diagonal,
        keep_essential: true,
    };
    let view = PersistenceDiagram {
        dim0: points.to_vec(),
        dim1: Vec::new(),
    }
    .filtered(filter);
    view.dim0
        .iter()
        .filter_map(|p| {
            if p.essential {
                match options.essential {
                    EssentialHandling::Exclude => None,
                    EssentialHandling::Cap(cap) => Some([p.birth, cap]),
                }
            } else {
                Some([p.birth, p.death])
            }
        })
        .collect()
}

/// Concatenated descriptors of `Dg0` and `ExDg1`.
pub fn topo_feature_vector(
    dg0: &[PersistencePoint],
    exdg1: &[PersistencePoint],
    options: &FeatureOptions,
    seed: u64,
) -> TopoFeatureVector {
    let a = diagram_features(&clustering_points(dg0, options), options.k, seed);
    let b = diagram_features(&clustering_points(exdg1, options), options.k, seed);
    let mut out = [0.0; 12];
    out[..6].copy_from_slice(&a);
    out[6..].copy_from_slice(&b);
    TopoFeatureVector(out)
}
