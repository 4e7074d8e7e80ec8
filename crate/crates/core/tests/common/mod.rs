//! Reference implementations written from the definitions with plain loops,
//! shared by the integration tests and the acceptance runner.
#![allow(dead_code, clippy::needless_range_loop)]

use avel::edrnet::{Affine, Branches, EdrConfig, ModelInput, ModelParams};
use avel::smbfuse::State;
use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn to_mat(a: &Array2<f64>) -> Mat {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn max_abs_diff(a: &Mat, b: &Array2<f64>) -> f64 {
    assert_eq!((a.len(), a.first().map_or(0, Vec::len)), b.dim(), "shape");
    let mut worst: f64 = 0.0;
    for (t, row) in a.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            worst = worst.max((v - b[[t, i]]).abs());
        }
    }
    worst
}

fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// `y[t][o] = b[o] + Σ_j Σ_i x[t + j][i] · W[j·in + i][o]`
pub fn valid_conv(x: &Mat, layer: &Affine, k: usize) -> Mat {
    let cin = x[0].len();
    let cout = layer.bias.len();
    let out_len = x.len() + 1 - k;
    let mut y = vec![vec![0.0; cout]; out_len];
    for t in 0..out_len {
        for o in 0..cout {
            let mut acc = layer.bias[o];
            for j in 0..k {
                for i in 0..cin {
                    acc += x[t + j][i] * layer.weight[[j * cin + i, o]];
                }
            }
            y[t][o] = acc;
        }
    }
    y
}

/// Zero-padded, `(k - 1) / 2` steps on the left.
pub fn same_conv(x: &Mat, layer: &Affine, k: usize) -> Mat {
    let cin = x[0].len();
    let cout = layer.bias.len();
    let left = (k - 1) / 2;
    let mut y = vec![vec![0.0; cout]; x.len()];
    for t in 0..x.len() {
        for o in 0..cout {
            let mut acc = layer.bias[o];
            for j in 0..k {
                let src = t as isize + j as isize - left as isize;
                if src < 0 || src >= x.len() as isize {
                    continue;
                }
                for i in 0..cin {
                    acc += x[src as usize][i] * layer.weight[[j * cin + i, o]];
                }
            }
            y[t][o] = acc;
        }
    }
    y
}

/// Every input step scatters a `k`-step stamp: `y[t + j][o] += x[t][i] · W[i][j·out + o]`.
pub fn transpose_conv(x: &Mat, layer: &Affine, k: usize) -> Mat {
    let cin = x[0].len();
    let cout = layer.bias.len();
    let mut y = vec![layer.bias.to_vec(); x.len() + k - 1];
    for t in 0..x.len() {
        for j in 0..k {
            for o in 0..cout {
                for i in 0..cin {
                    y[t + j][o] += x[t][i] * layer.weight[[i, j * cout + o]];
                }
            }
        }
    }
    y
}

pub fn positional(n: usize, d: usize) -> Mat {
    (1..=n)
        .map(|t| {
            (0..d)
                .map(|i| {
                    let freq = 10f64.powf(-8.0 * (i / 2) as f64 / d as f64);
                    let arg = freq * t as f64;
                    if i % 2 == 0 {
                        arg.sin()
                    } else {
                        arg.cos()
                    }
                })
                .collect()
        })
        .collect()
}

/// Same-padded `ks × ks` convolution of each segment's `side × side` map,
/// ReLU, then the mean over positions. Returns `(maps, pooled)`, maps as
/// `(N·S) × d_v` rows.
pub fn spatial(visual: &Array3<f64>, layer: &Affine, ks: usize) -> (Mat, Mat) {
    let (n, s, c) = visual.dim();
    let side = (s as f64).sqrt() as usize;
    let off = (ks / 2) as isize;
    let mut maps = Vec::new();
    let mut pooled = vec![vec![0.0; c]; n];
    for t in 0..n {
        for r in 0..side {
            for q in 0..side {
                let mut out = vec![0.0; c];
                for (o, slot) in out.iter_mut().enumerate() {
                    let mut acc = layer.bias[o];
                    for u in 0..ks {
                        for v in 0..ks {
                            let rr = r as isize + u as isize - off;
                            let qq = q as isize + v as isize - off;
                            if rr < 0 || qq < 0 || rr >= side as isize || qq >= side as isize {
                                continue;
                            }
                            let pos = rr as usize * side + qq as usize;
                            for i in 0..c {
                                acc += visual[[t, pos, i]] * layer.weight[[(u * ks + v) * c + i, o]];
                            }
                        }
                    }
                    *slot = relu(acc);
                    pooled[t][o] += *slot / s as f64;
                }
                maps.push(out);
            }
        }
    }
    (maps, pooled)
}

/// `D^0 = x0 (+ PE)`, `D^l = ReLU(valid_conv(D^{l-1}))`.
pub fn decompose(x0: &Mat, layers: &[Affine], k: usize, pe: bool) -> Vec<Mat> {
    let mut d0 = x0.clone();
    if pe {
        let p = positional(x0.len(), x0[0].len());
        for (row, prow) in d0.iter_mut().zip(&p) {
            for (v, e) in row.iter_mut().zip(prow) {
                *v += e;
            }
        }
    }
    let mut out = vec![d0];
    for layer in layers {
        let z = valid_conv(out.last().unwrap(), layer, k);
        out.push(z.into_iter().map(|r| r.into_iter().map(relu).collect()).collect());
    }
    out
}

fn add(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

/// Layer 1 reads `D^L (+ D_AV^L)`; layer `l` reads
/// `R^{l-1} + D^{L+1-l} (+ D_AV^{L+1-l})`.
pub fn recompose(dec: &[Mat], dec_av: Option<&[Mat]>, layers: &[Affine], k: usize) -> Vec<Mat> {
    let big_l = layers.len();
    let mut outs: Vec<Mat> = Vec::new();
    for l in 1..=big_l {
        let depth = if l == 1 { big_l } else { big_l + 1 - l };
        let mut input = if l == 1 {
            dec[big_l].clone()
        } else {
            add(&outs[l - 2], &dec[depth])
        };
        if let Some(av) = dec_av {
            input = add(&input, &av[depth]);
        }
        let z = transpose_conv(&input, &layers[l - 1], k);
        outs.push(z.into_iter().map(|r| r.into_iter().map(relu).collect()).collect());
    }
    outs
}

pub fn gate(ra: &Mat, rv: &Mat, layer: &Affine, k: usize) -> Mat {
    let cat: Mat = ra
        .iter()
        .zip(rv)
        .map(|(a, v)| a.iter().chain(v).copied().collect())
        .collect();
    same_conv(&cat, layer, k)
        .into_iter()
        .map(|r| r.into_iter().map(|z| 1.0 / (1.0 + (-z).exp())).collect())
        .collect()
}

/// Relabels each maximal non-background run to its class when that class
/// holds strictly more than half of the run.
pub fn strict_majority_relabel(hard: &[usize], bg: usize) -> Vec<usize> {
    let mut out = hard.to_vec();
    let mut start = 0;
    while start < hard.len() {
        if hard[start] == bg {
            start += 1;
            continue;
        }
        let mut end = start;
        while end < hard.len() && hard[end] != bg {
            end += 1;
        }
        let run = &hard[start..end];
        for &candidate in run {
            let count = run.iter().filter(|&&c| c == candidate).count();
            if 2 * count > run.len() {
                out[start..end].iter_mut().for_each(|v| *v = candidate);
                break;
            }
        }
        start = end;
    }
    out
}

pub type SpanT = (usize, usize);
pub type ShoreT = (usize, SpanT, SpanT);

/// `(lands, seas, shores)` with shores as `(index, land, sea)` for every
/// foreground index with a background neighbour, left neighbour first.
pub fn scan_patches(fg: &[bool]) -> (Vec<SpanT>, Vec<SpanT>, Vec<ShoreT>) {
    let n = fg.len();
    let run_of = |t: usize| {
        let mut a = t;
        while a > 0 && fg[a - 1] == fg[t] {
            a -= 1;
        }
        let mut b = t;
        while b + 1 < n && fg[b + 1] == fg[t] {
            b += 1;
        }
        (a, b)
    };
    let mut lands = Vec::new();
    let mut seas = Vec::new();
    let mut shores = Vec::new();
    for t in 0..n {
        if t == 0 || fg[t - 1] != fg[t] {
            if fg[t] {
                lands.push(run_of(t));
            } else {
                seas.push(run_of(t));
            }
        }
        if fg[t] {
            if t > 0 && !fg[t - 1] {
                shores.push((t, run_of(t), run_of(t - 1)));
            }
            if t + 1 < n && !fg[t + 1] {
                shores.push((t, run_of(t), run_of(t + 1)));
            }
        }
    }
    (lands, seas, shores)
}

fn state_mask(s: State) -> &'static [bool] {
    match s {
        State::BG_1 => &[false],
        State::BG_2 => &[false, false],
        State::START_1 | State::CONTINUE_1 | State::END_1 => &[true],
        State::START_2 => &[false, true],
        State::CONTINUE_2 => &[true, true],
        State::END_2 => &[true, false],
    }
}

/// Expanded foreground mask of a state sequence, checked for length `n`,
/// a single event of at least two segments that opens with a start state,
/// closes with an end state and has only continue states inside, and
/// `START_1`/`END_1` only at the sequence ends.
pub fn validate_sequence(states: &[State], n: usize) -> Result<Vec<bool>, String> {
    let mask: Vec<bool> = states.iter().flat_map(|&s| state_mask(s).iter().copied()).collect();
    if mask.len() != n {
        return Err(format!("length {} != {n}", mask.len()));
    }
    let runs = mask.windows(2).filter(|w| !w[0] && w[1]).count() + usize::from(mask[0]);
    if runs != 1 {
        return Err(format!("{runs} foreground runs"));
    }
    if mask.iter().filter(|&&f| f).count() < 2 {
        return Err("event shorter than 2".into());
    }
    let fg_states: Vec<(usize, State)> = states
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, s)| state_mask(*s).contains(&true))
        .collect();
    let (first, last) = (fg_states[0], fg_states[fg_states.len() - 1]);
    if !matches!(first.1, State::START_1 | State::START_2) {
        return Err(format!("event opens with {}", first.1));
    }
    if !matches!(last.1, State::END_1 | State::END_2) || first.0 == last.0 {
        return Err(format!("event closes with {}", last.1));
    }
    if let Some(bad) = fg_states[1..fg_states.len() - 1]
        .iter()
        .find(|(_, s)| !matches!(s, State::CONTINUE_1 | State::CONTINUE_2))
    {
        return Err(format!("{} inside the event", bad.1));
    }
    if states.iter().skip(1).any(|&s| s == State::START_1) {
        return Err("START_1 after position 0".into());
    }
    if states[..states.len() - 1].contains(&State::END_1) {
        return Err("END_1 before the last state".into());
    }
    Ok(mask)
}

pub fn tiny_cfg(branches: Branches) -> EdrConfig {
    EdrConfig {
        kernel: 3,
        layers: 4,
        width: 8,
        segments: 10,
        classes: 5,
        audio_dim: 4,
        visual_dim: 4,
        spatial: 4,
        branches,
        ..EdrConfig::default()
    }
}

pub fn random_input(cfg: &EdrConfig, rng: &mut ChaCha8Rng) -> ModelInput {
    ModelInput {
        audio: Array2::from_shape_fn((cfg.segments, cfg.audio_dim), |_| rng.random_range(-1.0..1.0)),
        visual: Array3::from_shape_fn((cfg.segments, cfg.spatial, cfg.visual_dim), |_| {
            rng.random_range(-1.0..1.0)
        }),
    }
}

/// Initialised parameters with random biases so they take part in checks.
pub fn random_params(cfg: &EdrConfig, seed: u64) -> ModelParams {
    let mut params = ModelParams::init(&EdrConfig { seed, ..cfg.clone() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for (_, a) in params.affines_mut() {
        a.bias = Array1::from_shape_fn(a.bias.len(), |_| rng.random_range(-0.2..0.2));
    }
    params
}
