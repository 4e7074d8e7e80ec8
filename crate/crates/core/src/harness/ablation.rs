use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{evaluate, evaluate_head, train, EvalReport, HarnessError, Head, RunConfig, Task};
use crate::avedata::Dataset;
use crate::edrnet::{max_layers, Branch, Branches, ModelParams};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AblationSuite {
    /// EDRNet, then B2ILC, LSS and fusion added cumulatively (SEL), and
    /// EDRNet with and without B2ILC (WSEL).
    Components,
    /// Every combination of decomposition branches with A, V and gated
    /// accuracies.
    Branches,
    /// `k` in `2..=5`, each paired with its maximal layer count.
    Kernel,
    /// `L` from 1 to the maximum for the base kernel.
    Layers,
    Width(Vec<usize>),
    /// Fused videos per class; 0 disables fusion.
    Augmentation(Vec<usize>),
    PositionalEncoding,
}

impl AblationSuite {
    pub fn name(&self) -> &'static str {
        match self {
            AblationSuite::Components => "components",
            AblationSuite::Branches => "branches",
            AblationSuite::Kernel => "k",
            AblationSuite::Layers => "L",
            AblationSuite::Width(_) => "d",
            AblationSuite::Augmentation(_) => "augment",
            AblationSuite::PositionalEncoding => "pe",
        }
    }
}

impl FromStr for AblationSuite {
    type Err = String;

    /// `components`, `branches`, `k`, `L`, `pe`, `d:256,512`, `augment:0,100`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, list) = s.split_once(':').unwrap_or((s, ""));
        let values = || -> Result<Vec<usize>, String> {
            list.split(',')
                .filter(|v| !v.trim().is_empty())
                .map(|v| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}")))
                .collect()
        };
        match head {
            "components" => Ok(AblationSuite::Components),
            "branches" => Ok(AblationSuite::Branches),
            "k" => Ok(AblationSuite::Kernel),
            "L" => Ok(AblationSuite::Layers),
            "pe" => Ok(AblationSuite::PositionalEncoding),
            "d" => {
                let v = values()?;
                Ok(AblationSuite::Width(if v.is_empty() {
                    (1..=6).map(|i| 256 * i).collect()
                } else {
                    v
                }))
            }
            "augment" => {
                let v = values()?;
                Ok(AblationSuite::Augmentation(if v.is_empty() {
                    vec![0, 50, 100, 250]
                } else {
                    v
                }))
            }
            other => Err(format!(
                "unknown suite {other:?}; expected components, branches, k, L, d[:list], augment[:list] or pe"
            )),
        }
    }
}

/// One configuration of a suite. `base` indexes the reference row and
/// `toggled` lists the config sections that differ from it.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationVariant {
    pub name: String,
    pub config: RunConfig,
    pub base: Option<usize>,
    pub toggled: Vec<&'static str>,
}

pub const SECTIONS: [&str; 7] = ["task", "model", "optimizer", "loss", "augment", "b2ilc", "seed"];

fn hash_json(value: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(&bytes))[..16].to_string()
}

/// Short hash of each config section.
pub fn fingerprint(cfg: &RunConfig) -> BTreeMap<String, String> {
    let t = &cfg.train;
    let mut model = cfg.model.clone();
    model.seed = 0;
    let sections = [
        hash_json(&t.task),
        hash_json(&model),
        hash_json(&(&t.optimizer, t.batch_size, t.epochs, t.lr_decay, t.patience)),
        hash_json(&t.loss),
        hash_json(&t.augment),
        hash_json(&t.b2ilc),
        hash_json(&t.seed),
    ];
    SECTIONS.iter().map(|s| s.to_string()).zip(sections).collect()
}

fn training_key(fp: &BTreeMap<String, String>) -> String {
    fp.iter()
        .filter(|(k, _)| k.as_str() != "b2ilc")
        .map(|(_, v)| v.as_str())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn plan_ablation(suite: &AblationSuite, base: &RunConfig) -> Result<Vec<AblationVariant>, HarnessError> {
    let variant = |name: String, config: RunConfig, base: Option<usize>, toggled: Vec<&'static str>| AblationVariant {
        name,
        config,
        base,
        toggled,
    };
    let mut rows = Vec::new();
    match suite {
        AblationSuite::Components => {
            let lss_weight = if base.train.loss.lambda2 > 0.0 {
                base.train.loss.lambda2
            } else {
                0.1
            };
            let per_class = base.train.augment.per_class;
            let mut plain = base.clone();
            plain.train.task = Task::Sel;
            plain.train.loss.lambda2 = 0.0;
            plain.train.augment.enabled = false;
            plain.train.b2ilc.enabled = false;

            let mut b2ilc = plain.clone();
            b2ilc.train.b2ilc.enabled = true;
            let mut lss = b2ilc.clone();
            lss.train.loss.lambda2 = lss_weight;
            let mut fusion = lss.clone();
            fusion.train.augment = super::AugmentConfig {
                enabled: true,
                per_class,
            };
            let mut wsel = plain.clone();
            wsel.train.task = Task::Wsel;
            let mut wsel_b2ilc = wsel.clone();
            wsel_b2ilc.train.b2ilc.enabled = true;

            rows.push(variant("SEL EDRNet".into(), plain, None, vec![]));
            rows.push(variant("SEL +B2ILC".into(), b2ilc, Some(0), vec!["b2ilc"]));
            rows.push(variant("SEL +B2ILC +LSS".into(), lss, Some(0), vec!["loss", "b2ilc"]));
            rows.push(variant(
                "SEL +B2ILC +LSS +SMBVF".into(),
                fusion,
                Some(0),
                vec!["loss", "augment", "b2ilc"],
            ));
            rows.push(variant("WSEL EDRNet".into(), wsel, None, vec![]));
            rows.push(variant("WSEL +B2ILC".into(), wsel_b2ilc, Some(4), vec!["b2ilc"]));
        }
        AblationSuite::Branches => {
            let combos = [
                ("A only", Branches::new(true, false, false)),
                ("V only", Branches::new(false, true, false)),
                ("A + dual-phase fusion", Branches::new(true, false, true)),
                ("V + dual-phase fusion", Branches::new(false, true, true)),
                ("A + V late fusion", Branches::new(true, true, false)),
                ("A + V + dual-phase fusion", Branches::ALL),
            ];
            for (i, (name, branches)) in combos.into_iter().enumerate() {
                let mut c = base.clone();
                c.model.branches = branches;
                let reference = (i != 5).then_some(5);
                let toggled = if i == 5 { vec![] } else { vec!["model"] };
                rows.push(variant(name.into(), c, reference, toggled));
            }
        }
        AblationSuite::Kernel => {
            for k in 2..=5 {
                let mut c = base.clone();
                c.model.kernel = k;
                c.model.layers = max_layers(k, c.model.segments)?;
                rows.push(variant(format!("k={k} L={}", c.model.layers), c, None, vec![]));
            }
        }
        AblationSuite::Layers => {
            for l in 1..=max_layers(base.model.kernel, base.model.segments)? {
                let mut c = base.clone();
                c.model.layers = l;
                rows.push(variant(format!("L={l}"), c, None, vec![]));
            }
        }
        AblationSuite::Width(widths) => {
            for &d in widths {
                let mut c = base.clone();
                c.model.width = d;
                rows.push(variant(format!("d={d}"), c, None, vec![]));
            }
        }
        AblationSuite::Augmentation(sizes) => {
            for &n in sizes {
                let mut c = base.clone();
                c.train.task = Task::Sel;
                c.train.augment = super::AugmentConfig {
                    enabled: n > 0,
                    per_class: n,
                };
                rows.push(variant(format!("fused/class={n}"), c, None, vec![]));
            }
        }
        AblationSuite::PositionalEncoding => {
            let mut on = base.clone();
            on.model.positional_encoding = true;
            let mut off = base.clone();
            off.model.positional_encoding = false;
            rows.push(variant("PE on".into(), on, None, vec![]));
            rows.push(variant("PE off".into(), off, Some(0), vec!["model"]));
        }
    }
    // Sweep rows reference the row equal to the base configuration.
    if rows.iter().all(|r| r.base.is_none() && r.toggled.is_empty()) && rows.len() > 1 {
        if let Some(b) = rows.iter().position(|r| r.config == *base) {
            for (i, r) in rows.iter_mut().enumerate() {
                if i != b {
                    r.base = Some(b);
                    r.toggled = fingerprint(&r.config)
                        .iter()
                        .zip(fingerprint(base).iter())
                        .filter(|(x, y)| x.1 != y.1)
                        .map(|(x, _)| *SECTIONS.iter().find(|s| **s == x.0).expect("known section"))
                        .collect();
                }
            }
        }
    }
    for r in &rows {
        r.config.validate()?;
    }
    Ok(rows)
}

/// Accuracies of the modal heads and the gated output; absent where the
/// configuration lacks the path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BranchAccuracy {
    pub audio: Option<f64>,
    pub visual: Option<f64>,
    pub gated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub name: String,
    pub fingerprint: BTreeMap<String, String>,
    pub param_count: usize,
    pub accuracy: f64,
    pub branches: BranchAccuracy,
    pub best_epoch: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub suite: String,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn render(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |a| format!("{:.2}", 100.0 * a));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<28} {:>8} {:>8} {:>8} {:>8} {:>10}",
            self.suite, "acc %", "A %", "V %", "gated %", "params"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<28} {:>8} {:>8} {:>8} {:>8} {:>10}",
                r.name,
                pct(Some(r.accuracy)),
                pct(r.branches.audio),
                pct(r.branches.visual),
                pct(r.branches.gated),
                r.param_count
            );
        }
        out
    }
}

/// Trains every variant of `suite` on `train_set`, selects on `val_set` and
/// scores on `test_set`. Variants that differ only in label correction share
/// one training run.
pub fn run_ablation(
    suite: &AblationSuite,
    base: &RunConfig,
    train_set: &Dataset,
    val_set: &Dataset,
    test_set: &Dataset,
) -> Result<AblationTable, HarnessError> {
    let plan = plan_ablation(suite, base)?;
    let mut trained: HashMap<String, (ModelParams, usize)> = HashMap::new();
    let mut rows = Vec::with_capacity(plan.len());
    for v in plan {
        let fp = fingerprint(&v.config);
        let key = training_key(&fp);
        if !trained.contains_key(&key) {
            log::info!("ablation {}: training {}", suite.name(), v.name);
            let out = train(train_set, val_set, &v.config.model, &v.config.train)?;
            trained.insert(key.clone(), (out.params, out.best_epoch));
        }
        let (params, best_epoch) = &trained[&key];
        let cfg = &v.config.model;
        let wr = v.config.train.b2ilc.threshold();
        let report = evaluate(test_set, params, cfg, wr)?;
        let head = |b: Branch| -> Result<Option<f64>, HarnessError> {
            if !cfg.branches.enabled(b) {
                return Ok(None);
            }
            Ok(Some(
                evaluate_head(test_set, params, cfg, Head::Branch(b), wr)?.segment_accuracy,
            ))
        };
        let branches = BranchAccuracy {
            audio: head(Branch::Audio)?,
            visual: head(Branch::Visual)?,
            gated: cfg.branches.gated().then_some(report.segment_accuracy),
        };
        rows.push(AblationRow {
            name: v.name,
            fingerprint: fp,
            param_count: params.param_count(),
            accuracy: report.segment_accuracy,
            branches,
            best_epoch: *best_epoch,
            report,
        });
    }
    Ok(AblationTable {
        suite: suite.name().to_string(),
        rows,
    })
}
