//! Bag-to-instance label correction of hard segment predictions.
//!
//! cargo run --example label_correction

use avel::b2ilc::{correct, form_bags, witness_rate, PredictionSequence};

fn main() {
    const BG: usize = 28;
    let (a, b, c) = (0, 1, 2);
    let preds = PredictionSequence::from_hard(vec![BG, a, a, b, a, BG, a, c, a, BG]);
    for bag in form_bags(&preds.hard, BG) {
        let (dominant, wr) = witness_rate(&bag);
        println!(
            "bag {:?}: counts {:?}, dominant {dominant:?}, wr {wr:.3}",
            bag.span, bag.counts
        );
    }
    println!("before {:?}", preds.hard);
    println!("after  {:?}", correct(&preds, 0.5, BG).hard);

    let tie = PredictionSequence::from_hard(vec![BG, a, b, BG]);
    println!("tie    {:?} -> {:?}", tie.hard, correct(&tie, 0.5, BG).hard);
}
