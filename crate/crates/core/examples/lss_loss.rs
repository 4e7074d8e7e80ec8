//! Patch partition of a label sequence and the land, sea and shore losses
//! on a feature sequence.
//!
//! cargo run --example lss_loss

use avel::losses::{land_loss, lss_loss_grad, partition_patches, sea_loss, shore_loss};
use ndarray::Array2;

fn main() {
    const BG: usize = 28;
    let labels = [BG, BG, 7, 7, 7, 7, BG, BG, BG, BG];
    let p = partition_patches(&labels, BG);
    println!("lands  {:?}", p.lands);
    println!("seas   {:?}", p.seas);
    for s in &p.shores {
        println!("shore  t={} land {:?} sea {:?}", s.index, s.land, s.sea);
    }

    // Two feature dimensions: the event drifts along the first one.
    let feats = Array2::from_shape_fn((10, 2), |(t, i)| {
        let fg = labels[t] != BG;
        match (fg, i) {
            (true, 0) => 1.0 + 0.25 * t as f64,
            (true, _) => 1.0,
            (false, 0) => -1.0,
            (false, _) => 0.1 * t as f64,
        }
    });
    let margin = 4.0;
    println!("land  {:.4}", land_loss(feats.view(), &p));
    println!("sea   {:.4}", sea_loss(feats.view(), &p));
    println!("shore {:.4}", shore_loss(feats.view(), &p, margin));
    let (total, grad) = lss_loss_grad(feats.view(), &p, margin);
    println!(
        "lss   {total:.4}, gradient norm {:.4}",
        grad.mapv(|g| g * g).sum().sqrt()
    );
}
