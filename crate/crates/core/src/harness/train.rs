use ndarray::Zip;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, HarnessError, Objective, Target, Task, TrainConfig};
use crate::avedata::{Dataset, VideoRecord};
use crate::edrnet::{EdrConfig, ModelInput, ModelParams};
use crate::smbfuse::augment_dataset;

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean per-video loss over the epoch, summed in dataset order.
    pub train_loss: f64,
    /// Segment accuracy on the validation set; absent without one.
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch, or the last epoch without
    /// validation data.
    pub params: ModelParams,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub augmented: usize,
}

/// First and second moment estimates.
#[derive(Debug, Clone)]
pub struct Adam {
    m: ModelParams,
    v: ModelParams,
    step: i32,
}

impl Adam {
    pub fn new(params: &ModelParams) -> Self {
        Adam {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }

    /// One update. Parameters are rounded to `f32` afterwards so they stay
    /// exactly representable in checkpoints.
    pub fn update(&mut self, params: &mut ModelParams, grads: &ModelParams, lr: f64, cfg: &super::OptimizerConfig) {
        self.step += 1;
        let (b1, b2, eps, wd) = (cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let mut p = params.tensors_mut();
        let mut m = self.m.tensors_mut();
        let mut v = self.v.tensors_mut();
        let g = grads.tensors();
        for (((p, m), v), g) in p.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(&g) {
            Zip::from(&mut p.1)
                .and(&mut m.1)
                .and(&mut v.1)
                .and(&g.1)
                .for_each(|p, m, v, &g| {
                    let g = g + wd * *p;
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    let step = lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                    *p = ((*p - step) as f32) as f64;
                });
        }
    }
}

fn objective(tcfg: &TrainConfig) -> Objective {
    match tcfg.task {
        Task::Sel => Objective::Sel(tcfg.loss),
        Task::Wsel => Objective::Wsel,
    }
}

fn video_grad(
    record: &VideoRecord,
    obj: &Objective,
    cfg: &EdrConfig,
    params: &ModelParams,
) -> Result<(f64, ModelParams), HarnessError> {
    let target = Target {
        seg_labels: &record.seg_labels,
        video_label: record.video_label,
    };
    Ok(obj.loss_and_grad(&ModelInput::from(record), target, cfg, params)?)
}

/// Mean loss and gradient of a batch. Contributions are computed in parallel
/// and summed in batch order, so the result does not depend on scheduling.
pub fn batch_loss_and_grad(
    batch: &[&VideoRecord],
    obj: &Objective,
    cfg: &EdrConfig,
    params: &ModelParams,
) -> Result<(Vec<f64>, ModelParams), HarnessError> {
    let parts: Vec<(f64, ModelParams)> = batch
        .par_iter()
        .map(|r| video_grad(r, obj, cfg, params))
        .collect::<Result<_, _>>()?;
    let mut total = params.zeros_like();
    let mut losses = Vec::with_capacity(parts.len());
    for (loss, g) in &parts {
        losses.push(*loss);
        total.add_assign(g);
    }
    total.scale(1.0 / batch.len() as f64);
    Ok((losses, total))
}

pub fn train(
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &EdrConfig,
    tcfg: &TrainConfig,
) -> Result<TrainOutcome, HarnessError> {
    train_with_observer(train_set, val_set, cfg, tcfg, |_| Ok(()))
}

/// Trains from a fresh initialisation, calling `observe` after every epoch.
pub fn train_with_observer<F>(
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &EdrConfig,
    tcfg: &TrainConfig,
    observe: F,
) -> Result<TrainOutcome, HarnessError>
where
    F: FnMut(&EpochLog) -> Result<(), HarnessError>,
{
    cfg.validate()?;
    tcfg.validate()?;
    let params = ModelParams::init(cfg)?;
    train_from(params, train_set, val_set, cfg, tcfg, observe)
}

/// Continues training from the given parameters.
pub fn train_from<F>(
    mut params: ModelParams,
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &EdrConfig,
    tcfg: &TrainConfig,
    mut observe: F,
) -> Result<TrainOutcome, HarnessError>
where
    F: FnMut(&EpochLog) -> Result<(), HarnessError>,
{
    cfg.validate()?;
    tcfg.validate()?;
    if train_set.is_empty() {
        return Err(HarnessError::Config("training set is empty".into()));
    }

    let fused = if tcfg.augment.enabled {
        let aug = augment_dataset(train_set, tcfg.augment.per_class, tcfg.seed);
        log::info!(
            "augmented {} videos ({} classes skipped)",
            aug.dataset.len(),
            aug.skipped.len()
        );
        aug.dataset.records
    } else {
        Vec::new()
    };
    let pool: Vec<&VideoRecord> = train_set.records.iter().chain(&fused).collect();

    let obj = objective(tcfg);
    let mut adam = Adam::new(&params);
    let mut shuffle = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut log = Vec::new();
    let mut best: Option<(f64, usize, ModelParams)> = None;

    for epoch in 0..tcfg.epochs {
        let lr = tcfg.lr_decay.lr_at(tcfg.optimizer.lr, epoch);
        order.shuffle(&mut shuffle);
        let mut video_loss = vec![0.0; pool.len()];
        for (step, chunk) in order.chunks(tcfg.batch_size).enumerate() {
            let batch: Vec<&VideoRecord> = chunk.iter().map(|&i| pool[i]).collect();
            let (losses, grads) = batch_loss_and_grad(&batch, &obj, cfg, &params)?;
            if let Some(i) = losses.iter().position(|l| !l.is_finite()) {
                return Err(HarnessError::NonFiniteLoss {
                    epoch,
                    step,
                    video: batch[i].id.clone(),
                    value: losses[i],
                });
            }
            if !grads.is_finite() {
                return Err(HarnessError::NonFiniteLoss {
                    epoch,
                    step,
                    video: "<batch gradient>".into(),
                    value: f64::NAN,
                });
            }
            for (&i, &l) in chunk.iter().zip(&losses) {
                video_loss[i] = l;
            }
            adam.update(&mut params, &grads, lr, &tcfg.optimizer);
        }

        let val_acc = if val_set.is_empty() {
            None
        } else {
            Some(evaluate(val_set, &params, cfg, tcfg.b2ilc.threshold())?.segment_accuracy)
        };
        let entry = EpochLog {
            epoch,
            train_loss: video_loss.iter().sum::<f64>() / pool.len() as f64,
            val_acc,
        };
        log::debug!("epoch {epoch}: loss {:.5} val {:?}", entry.train_loss, entry.val_acc);
        observe(&entry)?;
        log.push(entry);

        let score = val_acc.unwrap_or(f64::NEG_INFINITY);
        match &best {
            Some((b, _, _)) if score <= *b && val_acc.is_some() => {}
            _ => best = Some((score, epoch, params.clone())),
        }
        let best_epoch = best.as_ref().map_or(epoch, |b| b.1);
        if tcfg.patience > 0 && val_acc.is_some() && epoch - best_epoch >= tcfg.patience {
            log::info!("early stop at epoch {epoch}, best epoch {best_epoch}");
            break;
        }
    }

    let (best_epoch, params) = match best {
        Some((_, e, p)) => (e, p),
        None => (0, params),
    };
    Ok(TrainOutcome {
        params,
        log,
        best_epoch,
        augmented: fused.len(),
    })
}
