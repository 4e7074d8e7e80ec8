//! Land, sea and shore losses on per-segment features.
//!
//! The gradient of a Euclidean norm at zero is taken as zero.

use ndarray::{Array1, Array2, ArrayView2};

use super::{PatchPartition, Span};

fn mean_rows(features: ArrayView2<'_, f64>, rows: impl Iterator<Item = usize>) -> (Array1<f64>, usize) {
    let mut sum = Array1::zeros(features.ncols());
    let mut count = 0;
    for t in rows {
        sum += &features.row(t);
        count += 1;
    }
    (sum / count.max(1) as f64, count)
}

/// Direction of `v` and its norm; zero direction at the origin.
fn unit(v: Array1<f64>) -> (Array1<f64>, f64) {
    let norm = v.dot(&v).sqrt();
    if norm > 0.0 {
        (v / norm, norm)
    } else {
        (v, 0.0)
    }
}

/// Mean over patches of length ≥ 2 of the distance between the means of
/// the first `⌊len/2⌋` rows and the remaining rows.
fn half_split_grad(features: ArrayView2<'_, f64>, patches: &[Span]) -> (f64, Array2<f64>) {
    let mut grad = Array2::zeros(features.raw_dim());
    let eligible: Vec<&Span> = patches.iter().filter(|p| p.len() >= 2).collect();
    if eligible.is_empty() {
        return (0.0, grad);
    }
    let scale = 1.0 / eligible.len() as f64;
    let mut total = 0.0;
    for p in eligible {
        let mid = p.start + p.len() / 2;
        let (first, n1) = mean_rows(features, p.start..mid);
        let (second, n2) = mean_rows(features, mid..=p.end);
        let (dir, dist) = unit(first - second);
        total += dist;
        for t in p.start..mid {
            grad.row_mut(t).scaled_add(scale / n1 as f64, &dir);
        }
        for t in mid..=p.end {
            grad.row_mut(t).scaled_add(-scale / n2 as f64, &dir);
        }
    }
    (total * scale, grad)
}

pub fn land_loss_grad(features: ArrayView2<'_, f64>, partition: &PatchPartition) -> (f64, Array2<f64>) {
    half_split_grad(features, &partition.lands)
}

pub fn land_loss(features: ArrayView2<'_, f64>, partition: &PatchPartition) -> f64 {
    land_loss_grad(features, partition).0
}

pub fn sea_loss_grad(features: ArrayView2<'_, f64>, partition: &PatchPartition) -> (f64, Array2<f64>) {
    half_split_grad(features, &partition.seas)
}

pub fn sea_loss(features: ArrayView2<'_, f64>, partition: &PatchPartition) -> f64 {
    sea_loss_grad(features, partition).0
}

/// Triplet hinge per shore: anchor is the shore row, positive the mean of
/// the rest of its land, negative the mean of the adjacent sea.
pub fn shore_loss_grad(features: ArrayView2<'_, f64>, partition: &PatchPartition, margin: f64) -> (f64, Array2<f64>) {
    let mut grad = Array2::zeros(features.raw_dim());
    let eligible: Vec<_> = partition.shores.iter().filter(|s| s.land.len() >= 2).collect();
    if eligible.is_empty() {
        return (0.0, grad);
    }
    let scale = 1.0 / eligible.len() as f64;
    let mut total = 0.0;
    for shore in eligible {
        let anchor = features.row(shore.index).to_owned();
        let (land, n_land) = mean_rows(features, shore.land.indices().filter(|&t| t != shore.index));
        let (sea, n_sea) = mean_rows(features, shore.sea.indices());
        let (to_land, d_land) = unit(&anchor - &land);
        let (to_sea, d_sea) = unit(&anchor - &sea);
        let hinge = d_land - d_sea + margin;
        if hinge <= 0.0 {
            continue;
        }
        total += hinge;
        let mut g_anchor = grad.row_mut(shore.index);
        g_anchor.scaled_add(scale, &to_land);
        g_anchor.scaled_add(-scale, &to_sea);
        for t in shore.land.indices().filter(|&t| t != shore.index) {
            grad.row_mut(t).scaled_add(-scale / n_land as f64, &to_land);
        }
        for t in shore.sea.indices() {
            grad.row_mut(t).scaled_add(scale / n_sea as f64, &to_sea);
        }
    }
    (total * scale, grad)
}

pub fn shore_loss(features: ArrayView2<'_, f64>, partition: &PatchPartition, margin: f64) -> f64 {
    shore_loss_grad(features, partition, margin).0
}

/// Land + sea + shore.
pub fn lss_loss_grad(features: ArrayView2<'_, f64>, partition: &PatchPartition, margin: f64) -> (f64, Array2<f64>) {
    let (land, mut grad) = land_loss_grad(features, partition);
    let (sea, g_sea) = sea_loss_grad(features, partition);
    let (shore, g_shore) = shore_loss_grad(features, partition, margin);
    grad += &g_sea;
    grad += &g_shore;
    (land + sea + shore, grad)
}

pub fn lss_loss(features: ArrayView2<'_, f64>, partition: &PatchPartition, margin: f64) -> f64 {
    lss_loss_grad(features, partition, margin).0
}
