//! Acceptance criteria runner: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use avel::avedata::{split_dataset, synth_dataset, validate_record, Dataset, SplitFractions, SynthConfig, BACKGROUND};
use avel::b2ilc::{correct_in_place, form_bags, witness_rate};
use avel::edrnet::{
    decompose, forward, gate, max_layers, positional_encoding, recompose, spatial_encode, Branch, Branches, EdrConfig,
    ModelParams,
};
use avel::gradcheck::{check_gradients, GradCheckConfig};
use avel::harness::{evaluate_predictions, predict_dataset, train, Head, Objective, Target, Task, TrainConfig};
use avel::losses::{land_loss, partition_patches, sea_loss, seg_ce_loss, shore_loss, LossWeights, PatchPartition};
use avel::smbfuse::{build_databases, fuse_video, generate_state_sequence, State, StateMachine};
use common::*;
use ndarray::{array, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gradient_oracle() -> Outcome {
    let cfg = EdrConfig {
        seed: 11,
        ..tiny_cfg(Branches::ALL)
    };
    let params = ModelParams::init(&cfg).unwrap();
    let x = random_input(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
    let bg = cfg.background();
    let labels = [bg, bg, 2, 2, 2, 2, 2, bg, bg, bg];
    let target = Target {
        seg_labels: &labels,
        video_label: 2,
    };
    let mut worst_fraction: f64 = 1.0;
    for obj in [
        Objective::SegCe,
        Objective::Land,
        Objective::Sea,
        Objective::Shore { margin: 5.0 },
        Objective::Sel(LossWeights {
            lambda1: 1.0,
            lambda2: 0.5,
            margin: 5.0,
        }),
        Objective::Wsel,
    ] {
        let (_, grads) = obj.loss_and_grad(&x, target, &cfg, &params).unwrap();
        let report = check_gradients(
            &params,
            &grads,
            |p| obj.loss(&x, target, &cfg, p).unwrap(),
            &GradCheckConfig {
                samples: 500,
                ..Default::default()
            },
        );
        ensure(report.checks.len() == 500, || {
            format!("{} coordinates checked", report.checks.len())
        })?;
        let f = report.pass_fraction();
        ensure(f >= 0.99, || {
            format!("{obj:?}: pass fraction {f:.3}, worst {:?}", report.worst())
        })?;
        worst_fraction = worst_fraction.min(f);
    }
    Ok(format!(
        "6 objectives x 500 coordinates, min pass fraction {worst_fraction:.3}"
    ))
}

fn random_cfg(rng: &mut ChaCha8Rng) -> EdrConfig {
    let k = rng.random_range(2..=5);
    let side = rng.random_range(1..=3);
    EdrConfig {
        kernel: k,
        layers: rng.random_range(1..=max_layers(k, 10).unwrap()),
        width: rng.random_range(2..=5),
        classes: 4,
        audio_dim: rng.random_range(1..=4),
        visual_dim: rng.random_range(1..=4),
        spatial: side * side,
        spatial_kernel: [1, 3][rng.random_range(0..2)],
        positional_encoding: rng.random_bool(0.5),
        branches: Branches::ALL,
        ..EdrConfig::default()
    }
}

fn convolution_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let cfg = random_cfg(&mut rng);
        let params = random_params(&cfg, case);
        let x = random_input(&cfg, &mut rng);

        let (maps, pooled) = spatial_encode(x.visual.view(), &cfg, &params).unwrap();
        let (omaps, opooled) = spatial(&x.visual, &params.spatial, cfg.spatial_kernel);
        worst = worst
            .max(max_abs_diff(&omaps, &maps))
            .max(max_abs_diff(&opooled, &pooled));

        let mut dec = avel::edrnet::PerBranch::default();
        for b in Branch::ALL {
            let raw: Array2<f64> = match b {
                Branch::Audio => x.audio.clone(),
                Branch::Visual => pooled.clone(),
                Branch::AudioVisual => ndarray::concatenate(Axis(1), &[x.audio.view(), pooled.view()]).unwrap(),
            };
            let mut x0 = raw.clone();
            if cfg.positional_encoding {
                x0 += &positional_encoding(cfg.segments, x0.ncols());
            }
            let got = decompose(x0, b, &cfg, &params).unwrap();
            let want = common::decompose(
                &to_mat(&raw),
                params.decomposition.get(b).unwrap(),
                cfg.kernel,
                cfg.positional_encoding,
            );
            for (w, g) in want.iter().zip(&got) {
                worst = worst.max(max_abs_diff(w, g));
            }
            dec.set(b, got);
        }

        let rec = recompose(&dec, &cfg, &params).unwrap();
        let av: Vec<Mat> = dec.audio_visual.as_ref().unwrap().iter().map(to_mat).collect();
        for b in Branch::MODAL {
            let d: Vec<Mat> = dec.get(b).unwrap().iter().map(to_mat).collect();
            let want = common::recompose(&d, Some(&av), params.recomposition.get(b).unwrap(), cfg.kernel);
            let got = &rec.get(b).unwrap().outputs;
            ensure(got.last().unwrap().nrows() == cfg.segments, || {
                "recomposition length".into()
            })?;
            for (w, g) in want.iter().zip(got) {
                worst = worst.max(max_abs_diff(w, g));
            }
        }

        let ra = rec.audio.as_ref().unwrap().last().clone();
        let rv = rec.visual.as_ref().unwrap().last().clone();
        let g = gate(ra.view(), rv.view(), &cfg, &params).unwrap();
        let want = common::gate(&to_mat(&ra), &to_mat(&rv), params.gate.as_ref().unwrap(), cfg.kernel);
        worst = worst.max(max_abs_diff(&want, &g));
    }
    ensure(worst < 1e-5, || format!("max abs diff {worst:e}"))?;
    Ok(format!("100 random configs x 4 ops, max abs diff {worst:.1e}"))
}

fn shape_law() -> Outcome {
    let l_max: Vec<usize> = (2..=5).map(|k| max_layers(k, 10).unwrap()).collect();
    ensure(l_max == vec![9, 4, 3, 2], || format!("L_max = {l_max:?}"))?;
    for (k, &l) in (2..=5).zip(&l_max) {
        let cfg = EdrConfig {
            kernel: k,
            layers: l,
            width: 3,
            ..tiny_cfg(Branches::ALL)
        };
        let acts = forward(
            &random_input(&cfg, &mut ChaCha8Rng::seed_from_u64(k as u64)),
            &cfg,
            &ModelParams::init(&cfg).unwrap(),
        )
        .unwrap();
        for b in Branch::ALL {
            let lens: Vec<usize> = acts.decomposition.get(b).unwrap().iter().map(|d| d.nrows()).collect();
            let mut want = vec![10];
            for _ in 0..l {
                want.push(want.last().unwrap() - k + 1);
            }
            ensure(lens == want, || format!("k={k} {b:?}: {lens:?} != {want:?}"))?;
            ensure(*want.last().unwrap() > 0 && *want.last().unwrap() < k, || {
                format!("k={k}: not maximal")
            })?;
        }
        for b in Branch::MODAL {
            let r = acts.recomposition.get(b).unwrap();
            ensure(r.last().nrows() == 10, || {
                format!("k={k} {b:?}: recomposed to {}", r.last().nrows())
            })?;
        }
        ensure(acts.probs.nrows() == 10, || "prediction length".into())?;
    }
    Ok(format!(
        "L_max(2..5) = {l_max:?}, decomposition and recomposition lengths exact"
    ))
}

fn b2ilc_exhaustive() -> Outcome {
    const BG: usize = BACKGROUND;
    let alphabet = [BG, 0, 1, 2];
    let mut changed = 0;
    for code in 0..4usize.pow(8) {
        let hard: Vec<usize> = (0..8).map(|i| alphabet[(code >> (2 * i)) & 3]).collect();
        let mut once = hard.clone();
        correct_in_place(&mut once, 0.5, BG);
        let want = strict_majority_relabel(&hard, BG);
        ensure(once == want, || format!("{hard:?}: {once:?} != {want:?}"))?;
        let mut twice = once.clone();
        correct_in_place(&mut twice, 0.5, BG);
        ensure(twice == once, || format!("{hard:?}: not idempotent"))?;
        changed += usize::from(once != hard);
    }
    Ok(format!(
        "65536 sequences match the brute-force relabeler ({changed} corrected), idempotent"
    ))
}

fn patch_oracle() -> Outcome {
    const FG: usize = 3;
    let span = |s: &avel::losses::Span| (s.start, s.end);
    let mut shores = 0;
    for mask in 0..1u32 << 10 {
        let fg: Vec<bool> = (0..10).map(|i| mask >> i & 1 == 1).collect();
        let labels: Vec<usize> = fg.iter().map(|&f| if f { FG } else { BACKGROUND }).collect();
        let p: PatchPartition = partition_patches(&labels, BACKGROUND);
        let (lands, seas, sh) = scan_patches(&fg);
        ensure(p.lands.iter().map(span).collect::<Vec<_>>() == lands, || {
            format!("lands of {fg:?}")
        })?;
        ensure(p.seas.iter().map(span).collect::<Vec<_>>() == seas, || {
            format!("seas of {fg:?}")
        })?;
        let got: Vec<_> = p
            .shores
            .iter()
            .map(|s| (s.index, span(&s.land), span(&s.sea)))
            .collect();
        ensure(got == sh, || format!("shores of {fg:?}: {got:?} != {sh:?}"))?;
        shores += got.len();
    }
    Ok(format!("1024 masks, {shores} shores, all match the run-length scan"))
}

fn smb_validity() -> Outcome {
    let machine = StateMachine::standard();
    let data = synth_dataset(&SynthConfig {
        classes: 2,
        videos_per_class: 12,
        background_videos: 0,
        audio_dim: 3,
        visual_dim: 2,
        spatial: 4,
        separation: 1.0,
        seed: 6,
    })
    .unwrap();
    let dbs = build_databases(&data, 1, BACKGROUND);
    let full: Vec<State> = dbs.available();
    ensure(full.len() == 8, || format!("synthetic class populates only {full:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut generated, mut subset_runs, mut attempts) = (0, 0, 0);
    while generated < 10_000 {
        attempts += 1;
        let available: Vec<State> = if attempts % 2 == 0 {
            full.clone()
        } else {
            full.iter().copied().filter(|_| rng.random_bool(0.7)).collect()
        };
        let seq = match generate_state_sequence(&machine, 10, &available, 1, &mut rng) {
            Ok(s) => s,
            Err(e) => {
                ensure(available.len() < 8, || format!("full state set failed: {e}"))?;
                continue;
            }
        };
        subset_runs += usize::from(available.len() < 8);
        ensure(seq.states.iter().all(|s| available.contains(s)), || {
            "unavailable state used".into()
        })?;
        let mask = validate_sequence(&seq.states, 10).map_err(|e| format!("{:?}: {e}", seq.states))?;

        let (record, prov) =
            fuse_video(&seq, &dbs, &mut rng, format!("fused_{generated}"), BACKGROUND).map_err(|e| e.to_string())?;
        ensure(validate_record(&record).is_empty(), || {
            format!("{:?}", validate_record(&record))
        })?;
        let labels: Vec<usize> = mask.iter().map(|&f| if f { 1 } else { BACKGROUND }).collect();
        ensure(record.seg_labels == labels, || {
            "labels differ from the state patterns".into()
        })?;
        let mut t = 0;
        for p in &prov {
            let src = data.records.iter().find(|r| r.id == p.source_video).unwrap();
            for s in p.seg_range.indices() {
                let a = record
                    .audio
                    .row(t)
                    .iter()
                    .zip(src.audio.row(s))
                    .all(|(x, y)| x.to_bits() == y.to_bits());
                let v = record
                    .visual
                    .index_axis(Axis(0), t)
                    .iter()
                    .zip(src.visual.index_axis(Axis(0), s))
                    .all(|(x, y)| x.to_bits() == y.to_bits());
                ensure(a && v, || format!("segment {t} not byte-identical to {}[{s}]", src.id))?;
                t += 1;
            }
        }
        ensure(t == 10, || format!("provenance covers {t} segments"))?;
        generated += 1;
    }
    Ok(format!(
        "10000 sequences ({subset_runs} from reduced state sets) valid, fused and traced"
    ))
}

fn lss_analytic() -> Outcome {
    const BG: usize = BACKGROUND;
    const FG: usize = 4;
    let feats = |v: &[f64]| Array2::from_shape_vec((v.len(), 1), v.to_vec()).unwrap();
    let part = |l: &[usize]| partition_patches(l, BG);
    let close =
        |name: &str, got: f64, want: f64| ensure((got - want).abs() < 1e-6, || format!("{name}: {got} != {want}"));

    close(
        "land [1,1,3,3]",
        land_loss(feats(&[1., 1., 3., 3.]).view(), &part(&[FG; 4])),
        2.0,
    )?;
    close(
        "land [0,0,2,2,2]",
        land_loss(feats(&[0., 0., 2., 2., 2.]).view(), &part(&[FG; 5])),
        2.0,
    )?;
    close(
        "land constant",
        land_loss(feats(&[1.5; 6]).view(), &part(&[FG; 6])),
        0.0,
    )?;

    close("sea [4,0]", sea_loss(feats(&[4., 0.]).view(), &part(&[BG, BG])), 4.0)?;
    close("sea constant", sea_loss(feats(&[-2.0; 5]).view(), &part(&[BG; 5])), 0.0)?;
    close("no sea", sea_loss(feats(&[1., 2., 3.]).view(), &part(&[FG; 3])), 0.0)?;

    let shore = part(&[FG, FG, BG]);
    close(
        "shore inactive",
        shore_loss(feats(&[0., 0., 5.]).view(), &shore, 2.0),
        0.0,
    )?;
    close("shore hinge", shore_loss(feats(&[0., 0., 1.]).view(), &shore, 2.0), 1.0)?;
    close(
        "shore equidistant",
        shore_loss(feats(&[0., 1., 2.]).view(), &shore, 0.3),
        0.3,
    )?;

    let uniform = Array2::from_elem((10, 29), 1.0 / 29.0);
    close("CE uniform", seg_ce_loss(uniform.view(), &[3; 10]), 29f64.ln())?;
    let mut onehot = Array2::zeros((10, 29));
    for t in 0..10 {
        onehot[[t, t]] = 1.0;
    }
    close(
        "CE one-hot",
        seg_ce_loss(onehot.view(), &(0..10).collect::<Vec<_>>()),
        0.0,
    )?;
    close("CE half", seg_ce_loss(array![[0.5, 0.5]].view(), &[0]), 2f64.ln())?;
    Ok("12 hand values reproduced to 1e-6 (ln 29 = 3.3673)".into())
}

struct Learnability {
    train: Dataset,
    val: Dataset,
    test: Dataset,
    cfg: EdrConfig,
}

fn learnability_setup() -> Learnability {
    let data = synth_dataset(&SynthConfig {
        classes: 5,
        videos_per_class: 40,
        background_videos: 40,
        audio_dim: 8,
        visual_dim: 16,
        spatial: 4,
        separation: 3.0,
        seed: 1,
    })
    .unwrap();
    let (train, val, test) = split_dataset(&data, SplitFractions::default(), 1).unwrap();
    // A short receptive field keeps weak supervision from spreading the video
    // label over every segment.
    let cfg = EdrConfig {
        kernel: 2,
        layers: 1,
        width: 16,
        audio_dim: 8,
        visual_dim: 16,
        spatial: 4,
        seed: 3,
        ..EdrConfig::default()
    };
    Learnability { train, val, test, cfg }
}

/// Nearest class mean over concatenated audio and pooled visual segment
/// features; a separability check of the data itself.
fn probe_accuracy(l: &Learnability) -> f64 {
    let feat = |r: &avel::VideoRecord, t: usize| -> Vec<f64> {
        let mut f: Vec<f64> = r.audio.row(t).iter().map(|&v| f64::from(v)).collect();
        let v = r
            .visual
            .index_axis(Axis(0), t)
            .mapv(f64::from)
            .mean_axis(Axis(0))
            .unwrap();
        f.extend(v.iter());
        f
    };
    let mut sums: std::collections::BTreeMap<usize, (Vec<f64>, f64)> = Default::default();
    for r in &l.train.records {
        for (t, &y) in r.seg_labels.iter().enumerate() {
            let f = feat(r, t);
            let e = sums.entry(y).or_insert((vec![0.0; f.len()], 0.0));
            e.0.iter_mut().zip(&f).for_each(|(a, b)| *a += b);
            e.1 += 1.0;
        }
    }
    let (mut right, mut total) = (0, 0);
    for r in &l.test.records {
        for (t, &y) in r.seg_labels.iter().enumerate() {
            let f = feat(r, t);
            let pred = sums
                .iter()
                .map(|(c, (s, n))| (c, s.iter().zip(&f).map(|(a, b)| (a / n - b).powi(2)).sum::<f64>()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0;
            right += usize::from(*pred == y);
            total += 1;
        }
    }
    right as f64 / total as f64
}

/// Accuracy over segments inside bags (of `preds`) with a strict-majority
/// class, before and after correction.
fn bag_accuracy(data: &Dataset, preds: &[Vec<usize>]) -> (f64, f64) {
    let (mut before, mut after, mut n) = (0, 0, 0);
    for (r, p) in data.records.iter().zip(preds) {
        let mut c = p.clone();
        correct_in_place(&mut c, 0.5, BACKGROUND);
        for bag in form_bags(p, BACKGROUND) {
            if let (Some(_), wr) = witness_rate(&bag) {
                if wr > 0.5 {
                    for t in bag.span.indices() {
                        before += usize::from(p[t] == r.seg_labels[t]);
                        after += usize::from(c[t] == r.seg_labels[t]);
                        n += 1;
                    }
                }
            }
        }
    }
    let n = n.max(1) as f64;
    (before as f64 / n, after as f64 / n)
}

fn learnability() -> Outcome {
    let l = learnability_setup();
    let probe = probe_accuracy(&l);
    let tcfg = TrainConfig {
        epochs: 50,
        batch_size: 16,
        patience: 0,
        optimizer: avel::harness::OptimizerConfig {
            lr: 3e-3,
            ..Default::default()
        },
        seed: 3,
        ..TrainConfig::default()
    };
    let sel = train(&l.train, &l.val, &l.cfg, &tcfg).map_err(|e| e.to_string())?;
    let sel_preds: Vec<Vec<usize>> = predict_dataset(&l.test, &sel.params, &l.cfg, Head::Fused)
        .unwrap()
        .into_iter()
        .map(|p| p.hard)
        .collect();
    let sel_acc = evaluate_predictions(&l.test, &sel_preds, 29, None)
        .unwrap()
        .segment_accuracy;
    ensure(sel_acc >= 0.90, || {
        format!("SEL test accuracy {sel_acc:.3} (probe {probe:.3})")
    })?;

    let wsel = train(
        &l.train,
        &l.val,
        &l.cfg,
        &TrainConfig {
            task: Task::Wsel,
            ..tcfg.clone()
        },
    )
    .map_err(|e| e.to_string())?;
    let wsel_preds: Vec<Vec<usize>> = predict_dataset(&l.test, &wsel.params, &l.cfg, Head::Fused)
        .unwrap()
        .into_iter()
        .map(|p| p.hard)
        .collect();
    let wsel_acc = evaluate_predictions(&l.test, &wsel_preds, 29, None)
        .unwrap()
        .segment_accuracy;
    ensure(wsel_acc >= 0.75, || format!("WSEL test accuracy {wsel_acc:.3}"))?;

    for (name, preds) in [("SEL", &sel_preds), ("WSEL", &wsel_preds)] {
        let (b, a) = bag_accuracy(&l.test, preds);
        ensure(a >= b, || {
            format!("{name}: correction lowered bag accuracy {b:.3} -> {a:.3}")
        })?;
    }

    // Ground truth with a minority of each event's segments flipped to
    // another foreground class.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let corrupted: Vec<Vec<usize>> = l
        .test
        .records
        .iter()
        .map(|r| {
            let mut p = r.seg_labels.clone();
            let fg: Vec<usize> = (0..p.len()).filter(|&t| p[t] != BACKGROUND).collect();
            let flips = fg.len().saturating_sub(1) / 2;
            for &t in fg.iter().take(flips) {
                p[t] = (p[t] + 1 + rng.random_range(0..4)) % 5;
                if p[t] == r.seg_labels[t] {
                    p[t] = (p[t] + 1) % 5;
                }
            }
            p
        })
        .collect();
    let (b, a) = bag_accuracy(&l.test, &corrupted);
    ensure(a > b, || format!("corrupted fixture: {b:.3} -> {a:.3}"))?;
    let plain = evaluate_predictions(&l.test, &corrupted, 29, None)
        .unwrap()
        .segment_accuracy;
    let fixed = evaluate_predictions(&l.test, &corrupted, 29, Some(0.5))
        .unwrap()
        .segment_accuracy;
    ensure(fixed > plain, || {
        format!("corrupted fixture overall: {plain:.3} -> {fixed:.3}")
    })?;
    Ok(format!(
        "probe {probe:.3}, SEL {sel_acc:.3}, WSEL {wsel_acc:.3}, corrupted bags {b:.3} -> {a:.3}"
    ))
}

fn ablation_wiring() -> Outcome {
    let mut checked = Vec::new();
    for (d, da, dv, k, l) in [(8, 4, 4, 3, 4), (16, 8, 16, 2, 9), (32, 5, 7, 5, 2)] {
        let cfg = EdrConfig {
            width: d,
            audio_dim: da,
            visual_dim: dv,
            kernel: k,
            layers: l,
            ..tiny_cfg(Branches::ALL)
        };
        let no_av = EdrConfig {
            branches: Branches::new(true, true, false),
            ..cfg.clone()
        };
        let diff = ModelParams::init(&cfg).unwrap().param_count() - ModelParams::init(&no_av).unwrap().param_count();
        let analytic = (k * (da + dv) * d + d) + (l - 1) * (k * d * d + d);
        ensure(diff == analytic, || format!("d={d} k={k} L={l}: {diff} != {analytic}"))?;
        checked.push(analytic);
    }

    let on = EdrConfig {
        seed: 4,
        ..tiny_cfg(Branches::ALL)
    };
    let off = EdrConfig {
        positional_encoding: false,
        ..on.clone()
    };
    let params = ModelParams::init(&on).unwrap();
    let x = random_input(&on, &mut ChaCha8Rng::seed_from_u64(12));
    let a_on = forward(&x, &on, &params).unwrap();
    let a_off = forward(&x, &off, &params).unwrap();
    ensure(
        a_on.visual_maps == a_off.visual_maps && a_on.visual_pooled == a_off.visual_pooled,
        || "spatial stage depends on PE".into(),
    )?;
    let mut dec = avel::edrnet::PerBranch::default();
    for b in Branch::ALL {
        let d0_off = &a_off.decomposition.get(b).unwrap()[0];
        let d0_on = &a_on.decomposition.get(b).unwrap()[0];
        let pe = positional_encoding(on.segments, d0_on.ncols());
        let shift = &(d0_on - d0_off) - &pe;
        ensure(shift.iter().all(|v| v.abs() < 1e-12), || {
            format!("{b:?}: D^0 differs by more than the encoding")
        })?;
        // With the encoding added by hand, the PE-off network reproduces the PE-on run.
        let replay = decompose(d0_off + &pe, b, &off, &params).unwrap();
        ensure(&replay == a_on.decomposition.get(b).unwrap(), || {
            format!("{b:?}: decomposition differs")
        })?;
        dec.set(b, replay);
    }
    let rec = recompose(&dec, &off, &params).unwrap();
    ensure(rec == a_on.recomposition, || "recomposition differs".into())?;
    Ok(format!("AV branch sizes {checked:?} exact; PE toggle only shifts D^0"))
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("gradient oracle", gradient_oracle),
        ("convolution oracles", convolution_oracles),
        ("shape law", shape_law),
        ("B2ILC exhaustive oracle", b2ilc_exhaustive),
        ("patch partitioner oracle", patch_oracle),
        ("SMB validity", smb_validity),
        ("LSS analytic cases", lss_analytic),
        ("end-to-end learnability", learnability),
        ("ablation wiring", ablation_wiring),
    ];
    let filter: BTreeSet<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("criterion 10 SKIP  full-dataset accuracy: needs the released AVE features");
    if failed > 0 {
        std::process::exit(1);
    }
}
