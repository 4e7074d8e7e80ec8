//! Convolution primitives and their gradients.
//!
//! Sequences are `T × channels` matrices. Kernels are stored unrolled so
//! every convolution is a single matrix product:
//!
//! * temporal convolution: weight `(k·in) × out`, row `j·in + i` is tap `j`
//!   of input channel `i`;
//! * transpose temporal convolution: weight `in × (k·out)`, column
//!   `j·out + o` scatters into output step `t + j`;
//! * spatial convolution: weight `(s·s·in) × out`, row `(u·s + v)·in + i`.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use super::Affine;

/// Rows `t` of the result hold `x[t..t+k]` flattened tap-major.
pub fn im2col(x: ArrayView2<'_, f64>, k: usize) -> Array2<f64> {
    let (len, ch) = x.dim();
    let out_len = len + 1 - k;
    let mut cols = Array2::zeros((out_len, k * ch));
    for t in 0..out_len {
        for j in 0..k {
            cols.slice_mut(s![t, j * ch..(j + 1) * ch]).assign(&x.row(t + j));
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatter-adds rows back onto a `len`-step sequence.
pub fn col2im(cols: ArrayView2<'_, f64>, k: usize, len: usize) -> Array2<f64> {
    let ch = cols.ncols() / k;
    let mut x = Array2::zeros((len, ch));
    for t in 0..cols.nrows() {
        for j in 0..k {
            let mut row = x.row_mut(t + j);
            row += &cols.slice(s![t, j * ch..(j + 1) * ch]);
        }
    }
    x
}

fn add_bias(mut y: Array2<f64>, bias: &Array1<f64>) -> Array2<f64> {
    y += &bias.view().insert_axis(Axis(0));
    y
}

/// Stride-1, unpadded temporal convolution; output length `T - k + 1`.
pub fn conv1d_valid(x: ArrayView2<'_, f64>, layer: &Affine, k: usize) -> Array2<f64> {
    add_bias(im2col(x, k).dot(&layer.weight), &layer.bias)
}

/// Returns `(dx, dlayer)` for [`conv1d_valid`].
pub fn conv1d_valid_backward(
    x: ArrayView2<'_, f64>,
    layer: &Affine,
    k: usize,
    dy: ArrayView2<'_, f64>,
) -> (Array2<f64>, Affine) {
    let cols = im2col(x, k);
    let grad = Affine {
        weight: cols.t().dot(&dy),
        bias: dy.sum_axis(Axis(0)),
    };
    let dcols = dy.dot(&layer.weight.t());
    (col2im(dcols.view(), k, x.nrows()), grad)
}

/// Stride-1, unpadded transpose temporal convolution; output length `T + k - 1`.
pub fn conv1d_transpose(x: ArrayView2<'_, f64>, layer: &Affine, k: usize) -> Array2<f64> {
    let z = x.dot(&layer.weight);
    add_bias(col2im(z.view(), k, x.nrows() + k - 1), &layer.bias)
}

pub fn conv1d_transpose_backward(
    x: ArrayView2<'_, f64>,
    layer: &Affine,
    k: usize,
    dy: ArrayView2<'_, f64>,
) -> (Array2<f64>, Affine) {
    let dz = im2col(dy, k);
    let grad = Affine {
        weight: x.t().dot(&dz),
        bias: dy.sum_axis(Axis(0)),
    };
    (dz.dot(&layer.weight.t()), grad)
}

fn same_pad(k: usize) -> usize {
    (k - 1) / 2
}

fn pad_time(x: ArrayView2<'_, f64>, k: usize) -> Array2<f64> {
    let (len, ch) = x.dim();
    let left = same_pad(k);
    let mut padded = Array2::zeros((len + k - 1, ch));
    padded.slice_mut(s![left..left + len, ..]).assign(&x);
    padded
}

/// Length-preserving temporal convolution, `(k-1)/2` zeros on the left and
/// the remainder on the right.
pub fn conv1d_same(x: ArrayView2<'_, f64>, layer: &Affine, k: usize) -> Array2<f64> {
    conv1d_valid(pad_time(x, k).view(), layer, k)
}

pub fn conv1d_same_backward(
    x: ArrayView2<'_, f64>,
    layer: &Affine,
    k: usize,
    dy: ArrayView2<'_, f64>,
) -> (Array2<f64>, Affine) {
    let padded = pad_time(x, k);
    let (dpadded, grad) = conv1d_valid_backward(padded.view(), layer, k, dy);
    let left = same_pad(k);
    (dpadded.slice(s![left..left + x.nrows(), ..]).to_owned(), grad)
}

/// Zero-padded patches of a stack of `side × side` maps. `maps` has one row
/// per (segment, position) with positions row-major; the result has the
/// same rows and `s·s·ch` columns.
pub fn spatial_im2col(maps: ArrayView2<'_, f64>, side: usize, ks: usize) -> Array2<f64> {
    let ch = maps.ncols();
    let area = side * side;
    let frames = maps.nrows() / area;
    let off = (ks / 2) as isize;
    let mut cols = Array2::zeros((maps.nrows(), ks * ks * ch));
    for f in 0..frames {
        for r in 0..side {
            for c in 0..side {
                let row = f * area + r * side + c;
                for u in 0..ks {
                    for v in 0..ks {
                        let rr = r as isize + u as isize - off;
                        let cc = c as isize + v as isize - off;
                        if rr < 0 || cc < 0 || rr >= side as isize || cc >= side as isize {
                            continue;
                        }
                        let src = f * area + rr as usize * side + cc as usize;
                        let start = (u * ks + v) * ch;
                        cols.slice_mut(s![row, start..start + ch]).assign(&maps.row(src));
                    }
                }
            }
        }
    }
    cols
}

pub fn relu(x: Array2<f64>) -> Array2<f64> {
    x.mapv_into(|v| v.max(0.0))
}

/// Masks `dy` where the ReLU output was zero.
pub fn relu_backward(out: ArrayView2<'_, f64>, dy: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut dx = dy.to_owned();
    dx.zip_mut_with(&out, |g, &o| {
        if o <= 0.0 {
            *g = 0.0
        }
    });
    dx
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Row-wise numerically stable softmax.
pub fn softmax_rows(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

/// Pulls a gradient w.r.t. softmax outputs back to the logits.
pub fn softmax_backward(probs: ArrayView2<'_, f64>, dprobs: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros(probs.raw_dim());
    for ((p, g), mut o) in probs.rows().into_iter().zip(dprobs.rows()).zip(out.rows_mut()) {
        let inner = p.dot(&g);
        o.assign(&(&p * &(&g - inner)));
    }
    out
}
