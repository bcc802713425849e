//! Parameter containers for the reconstruction model.
//!
//! Everything is plain row-major `f64` storage with named access so the
//! optimizer, the gradient check, and the checkpoint format can walk the
//! same flat list of tensors.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::fmath;
use crate::rng::derive_rng;

use super::ModelError;

/// Row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out = A x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(r), x);
        }
    }

    /// `out += A[:, off..off+len(x)] x` for a column block.
    pub fn matvec_block_add(&self, off: usize, x: &[f64], out: &mut [f64]) {
        debug_assert!(off + x.len() <= self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            *o += dot(&self.row(r)[off..off + x.len()], x);
        }
    }

    /// `out += A[:, off..off+len(out_block)]^T y` for a column block.
    pub fn tr_matvec_block_add(&self, off: usize, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                axpy(yr, &self.row(r)[off..off + out.len()], out);
            }
        }
    }

    /// `A[:, off..off+len(x)] += y x^T` for a column block.
    pub fn add_outer_block(&mut self, off: usize, y: &[f64], x: &[f64]) {
        debug_assert_eq!(y.len(), self.rows);
        let cols = self.cols;
        debug_assert!(off + x.len() <= cols);
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                axpy(yr, x, &mut self.data[r * cols + off..r * cols + off + x.len()]);
            }
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y = W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl Linear {
    fn zeros(rows: usize, cols: usize) -> Self {
        Linear { w: Matrix::zeros(rows, cols), b: vec![0.0; rows] }
    }

    pub fn forward(&self, x: &[f64], out: &mut [f64]) {
        self.w.matvec(x, out);
        for (o, b) in out.iter_mut().zip(&self.b) {
            *o += b;
        }
    }
}

/// Two affine layers with a tanh between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp2 {
    pub l0: Linear,
    pub l1: Linear,
}

impl Mlp2 {
    fn zeros(out_dim: usize, hidden: usize, in_dim: usize) -> Self {
        Mlp2 { l0: Linear::zeros(hidden, in_dim), l1: Linear::zeros(out_dim, hidden) }
    }
}

/// One synchronous message-passing round:
/// `h_v <- tanh(w_self h_v + w_neigh sum_{u in N(v)} h_u + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpRound {
    pub w_self: Matrix,
    pub w_neigh: Matrix,
    pub b: Vec<f64>,
}

/// Architecture constants. The Fourier frequencies are fixed encoder
/// settings, not trained parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    pub hidden: usize,
    pub rounds: usize,
    pub fourier_freqs: Vec<f64>,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper { hidden: 64, rounds: 5, fourier_freqs: default_fourier_freqs() }
    }
}

/// Frequencies `pi / 2^j` for `j = 0..8`, separating degrees up to ~256.
pub fn default_fourier_freqs() -> Vec<f64> {
    (0..8).map(|j| core::f64::consts::PI / f64::from(1u32 << j)).collect()
}

impl Hyper {
    pub fn feature_dim(&self) -> usize {
        2 * self.fourier_freqs.len()
    }

    pub fn graph_emb_dim(&self) -> usize {
        2 * self.hidden
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.hidden == 0 || self.rounds == 0 || self.fourier_freqs.is_empty() {
            return Err(ModelError::InvalidConfig("hidden, rounds, and fourier_freqs must be non-empty"));
        }
        Ok(())
    }
}

/// All weights of the reconstruction model.
///
/// Head input layouts (column blocks of each head's first layer):
/// - stop: `[graph_emb]`
/// - delete type I: `[h_target | graph_emb]`
/// - delete type II: `[h_target | h_a + h_b | graph_emb]`
/// - insert type I: `[h_u + h_v | graph_emb]`
/// - insert type II: `[h_u + h_v | h_w | graph_emb]`
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub hyper: Hyper,
    pub embed: Linear,
    pub mp: Vec<MpRound>,
    pub readout: Mlp2,
    pub head_stop: Mlp2,
    pub head_delete_i: Mlp2,
    pub head_delete_ii: Mlp2,
    pub head_insert_i: Mlp2,
    pub head_insert_ii: Mlp2,
}

impl ModelParams {
    /// Zero-valued parameters with the shapes demanded by `hyper`.
    pub fn zeros(hyper: Hyper) -> Self {
        let h = hyper.hidden;
        let f = hyper.feature_dim();
        let ge = hyper.graph_emb_dim();
        ModelParams {
            embed: Linear::zeros(h, f),
            mp: (0..hyper.rounds)
                .map(|_| MpRound {
                    w_self: Matrix::zeros(h, h),
                    w_neigh: Matrix::zeros(h, h),
                    b: vec![0.0; h],
                })
                .collect(),
            readout: Mlp2::zeros(h, h, h),
            head_stop: Mlp2::zeros(1, h, ge),
            head_delete_i: Mlp2::zeros(1, h, h + ge),
            head_delete_ii: Mlp2::zeros(1, h, 2 * h + ge),
            head_insert_i: Mlp2::zeros(1, h, h + ge),
            head_insert_ii: Mlp2::zeros(1, h, 2 * h + ge),
            hyper,
        }
    }

    /// Seeded uniform initialization scaled per layer fan.
    pub fn init(hyper: Hyper, seed: u64) -> Self {
        let mut params = Self::zeros(hyper);
        let mut rng = derive_rng(seed, "model-init", 0);
        for t in params.named_tensors_mut() {
            if t.shape.len() == 2 {
                let scale = fmath::sqrt(6.0 / (t.shape[0] + t.shape[1]) as f64);
                for w in t.data.iter_mut() {
                    *w = (2.0 * rng.gen::<f64>() - 1.0) * scale;
                }
            }
            // Biases stay zero.
        }
        params
    }

    /// Zero parameters of the same shapes; used for gradients and optimizer
    /// moments.
    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.hyper.clone())
    }

    pub fn named_tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::new();
        push_linear(&mut out, "embed", &self.embed);
        for (i, r) in self.mp.iter().enumerate() {
            out.push(TensorRef::matrix(format2("mp", i, "w_self"), &r.w_self));
            out.push(TensorRef::matrix(format2("mp", i, "w_neigh"), &r.w_neigh));
            out.push(TensorRef::vector(format2("mp", i, "b"), &r.b));
        }
        push_mlp(&mut out, "readout", &self.readout);
        push_mlp(&mut out, "head_stop", &self.head_stop);
        push_mlp(&mut out, "head_delete_i", &self.head_delete_i);
        push_mlp(&mut out, "head_delete_ii", &self.head_delete_ii);
        push_mlp(&mut out, "head_insert_i", &self.head_insert_i);
        push_mlp(&mut out, "head_insert_ii", &self.head_insert_ii);
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = Vec::new();
        push_linear_mut(&mut out, "embed", &mut self.embed);
        for (i, r) in self.mp.iter_mut().enumerate() {
            out.push(TensorMut::matrix(format2("mp", i, "w_self"), &mut r.w_self));
            out.push(TensorMut::matrix(format2("mp", i, "w_neigh"), &mut r.w_neigh));
            out.push(TensorMut::vector(format2("mp", i, "b"), &mut r.b));
        }
        push_mlp_mut(&mut out, "readout", &mut self.readout);
        push_mlp_mut(&mut out, "head_stop", &mut self.head_stop);
        push_mlp_mut(&mut out, "head_delete_i", &mut self.head_delete_i);
        push_mlp_mut(&mut out, "head_delete_ii", &mut self.head_delete_ii);
        push_mlp_mut(&mut out, "head_insert_i", &mut self.head_insert_i);
        push_mlp_mut(&mut out, "head_insert_ii", &mut self.head_insert_ii);
        out
    }

    /// Fails when any stored value is not finite.
    pub fn check_finite(&self) -> Result<(), ModelError> {
        for t in self.named_tensors() {
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite("parameter tensor contains a non-finite value"));
            }
        }
        Ok(())
    }
}

/// Named read-only view of one tensor.
pub struct TensorRef<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

impl<'a> TensorRef<'a> {
    fn matrix(name: String, m: &'a Matrix) -> Self {
        TensorRef { name, shape: vec![m.rows, m.cols], data: &m.data }
    }

    fn vector(name: String, v: &'a [f64]) -> Self {
        TensorRef { name, shape: vec![v.len()], data: v }
    }
}

/// Named mutable view of one tensor.
pub struct TensorMut<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a mut [f64],
}

impl<'a> TensorMut<'a> {
    fn matrix(name: String, m: &'a mut Matrix) -> Self {
        TensorMut { name, shape: vec![m.rows, m.cols], data: &mut m.data }
    }

    fn vector(name: String, v: &'a mut [f64]) -> Self {
        TensorMut { name, shape: vec![v.len()], data: v }
    }
}

fn format2(group: &str, i: usize, leaf: &str) -> String {
    alloc::format!("{group}.{i}.{leaf}")
}

fn format1(group: &str, leaf: &str) -> String {
    alloc::format!("{group}.{leaf}")
}

fn push_linear<'a>(out: &mut Vec<TensorRef<'a>>, name: &str, l: &'a Linear) {
    out.push(TensorRef::matrix(format1(name, "w"), &l.w));
    out.push(TensorRef::vector(format1(name, "b"), &l.b));
}

fn push_linear_mut<'a>(out: &mut Vec<TensorMut<'a>>, name: &str, l: &'a mut Linear) {
    out.push(TensorMut::matrix(format1(name, "w"), &mut l.w));
    out.push(TensorMut::vector(format1(name, "b"), &mut l.b));
}

fn push_mlp<'a>(out: &mut Vec<TensorRef<'a>>, name: &str, m: &'a Mlp2) {
    out.push(TensorRef::matrix(format2(name, 0, "w"), &m.l0.w));
    out.push(TensorRef::vector(format2(name, 0, "b"), &m.l0.b));
    out.push(TensorRef::matrix(format2(name, 1, "w"), &m.l1.w));
    out.push(TensorRef::vector(format2(name, 1, "b"), &m.l1.b));
}

fn push_mlp_mut<'a>(out: &mut Vec<TensorMut<'a>>, name: &str, m: &'a mut Mlp2) {
    out.push(TensorMut::matrix(format2(name, 0, "w"), &mut m.l0.w));
    out.push(TensorMut::vector(format2(name, 0, "b"), &mut m.l0.b));
    out.push(TensorMut::matrix(format2(name, 1, "w"), &mut m.l1.w));
    out.push(TensorMut::vector(format2(name, 1, "b"), &mut m.l1.b));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_names_are_stable_and_disjoint() {
        let p = ModelParams::zeros(Hyper { hidden: 4, rounds: 2, fourier_freqs: vec![1.0] });
        let names: Vec<String> = p.named_tensors().into_iter().map(|t| t.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len(), "duplicate tensor names");
        assert!(names.contains(&String::from("embed.w")));
        assert!(names.contains(&String::from("mp.1.w_neigh")));
        assert!(names.contains(&String::from("head_insert_ii.0.w")));
    }

    #[test]
    fn init_is_seed_deterministic() {
        let h = Hyper { hidden: 8, rounds: 2, fourier_freqs: default_fourier_freqs() };
        assert_eq!(ModelParams::init(h.clone(), 7), ModelParams::init(h, 7));
    }

    #[test]
    fn matvec_blocks_agree_with_full() {
        let mut m = Matrix::zeros(2, 4);
        m.data.copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let x = [1.0, -1.0, 2.0, 0.5];
        let mut full = [0.0; 2];
        m.matvec(&x, &mut full);
        let mut blocks = [0.0; 2];
        m.matvec_block_add(0, &x[0..2], &mut blocks);
        m.matvec_block_add(2, &x[2..4], &mut blocks);
        assert_eq!(full, blocks);
    }
}
