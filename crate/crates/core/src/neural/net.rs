//! Linear + ReLU embedding, bidirectional LSTM, dense + ReLU, linear head.
//!
//! Inputs are sequences laid out time-major, `[t * input + feature]`, oldest
//! slot first. The forward LSTM runs oldest to newest, the backward one newest
//! to oldest, and their final hidden states are concatenated.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kernels::{col_sum_acc, fill_rows, gemm_acc, matmul_acc, Layout as Op};
use super::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("expected {expected} input values, got {got}")]
    InputShape { expected: usize, got: usize },
    #[error("expected {expected} output gradients, got {got}")]
    GradShape { expected: usize, got: usize },
    #[error("backward called without a recorded forward pass")]
    NoForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetShape {
    /// Features per time step.
    pub input: usize,
    pub seq_len: usize,
    pub embed: usize,
    /// Hidden units per LSTM direction.
    pub hidden: usize,
    pub dense: usize,
    pub outputs: usize,
}

impl NetShape {
    /// Actor over a 3 x W observation with a two-way action head.
    pub fn actor(lookback: usize) -> Self {
        Self { input: 3, seq_len: lookback, embed: 64, hidden: 64, dense: 128, outputs: 2 }
    }

    /// Critic over the N x W global state.
    pub fn critic(terminals: usize, lookback: usize) -> Self {
        Self { input: terminals, seq_len: lookback, embed: 64, hidden: 64, dense: 128, outputs: 1 }
    }

    pub fn sample_len(&self) -> usize {
        self.input * self.seq_len
    }

    pub fn param_count(&self) -> usize {
        Layout::new(self).total
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LstmLayout {
    pub wx: Range<usize>,
    pub wh: Range<usize>,
    pub b: Range<usize>,
}

/// Where each tensor lives in the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub w1: Range<usize>,
    pub b1: Range<usize>,
    pub fwd: LstmLayout,
    pub bwd: LstmLayout,
    pub w2: Range<usize>,
    pub b2: Range<usize>,
    pub w3: Range<usize>,
    pub b3: Range<usize>,
    pub total: usize,
}

impl Layout {
    pub fn new(s: &NetShape) -> Self {
        let mut at = 0;
        let mut take = |len: usize| {
            let r = at..at + len;
            at += len;
            r
        };
        let g = 4 * s.hidden;
        let w1 = take(s.input * s.embed);
        let b1 = take(s.embed);
        let fwd = LstmLayout { wx: take(s.embed * g), wh: take(s.hidden * g), b: take(g) };
        let bwd = LstmLayout { wx: take(s.embed * g), wh: take(s.hidden * g), b: take(g) };
        let w2 = take(2 * s.hidden * s.dense);
        let b2 = take(s.dense);
        let w3 = take(s.dense * s.outputs);
        let b3 = take(s.outputs);
        Self { w1, b1, fwd, bwd, w2, b2, w3, b3, total: at }
    }
}

/// Activations of one LSTM direction, indexed by processing step.
#[derive(Debug, Clone, Default)]
struct DirTape<F> {
    /// Activated gates `[i f g o]`, `[step][batch][4H]`.
    gates: Vec<F>,
    c: Vec<F>,
    tanh_c: Vec<F>,
    h: Vec<F>,
}

/// Cached activations of a forward pass plus scratch for the backward one.
#[derive(Debug, Clone, Default)]
pub struct Tape<F> {
    batch: usize,
    recorded: bool,
    /// Input, `[t][batch][input]`.
    x: Vec<F>,
    /// Embedding after ReLU, `[t][batch][embed]`.
    e: Vec<F>,
    fwd: DirTape<F>,
    bwd: DirTape<F>,
    /// Concatenated final hidden states, `[batch][2H]`.
    hcat: Vec<F>,
    a2: Vec<F>,
    out: Vec<F>,
    // Scratch.
    zx: Vec<F>,
    dzx: Vec<F>,
    de: Vec<F>,
    dz: Vec<F>,
    dh: Vec<F>,
    dc: Vec<F>,
    dx: Vec<F>,
    ex: Vec<F>,
}

impl<F: Scalar> Tape<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn outputs(&self) -> &[F] {
        &self.out
    }

    /// Concatenated final LSTM states of the last forward pass.
    pub fn recurrent_features(&self) -> &[F] {
        &self.hcat
    }

    /// Dense-layer activations of the last forward pass.
    pub fn dense_features(&self) -> &[F] {
        &self.a2
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Gradient with respect to the input from the last backward pass, in
    /// the caller's `[sample][t][feature]` layout.
    pub fn input_gradient(&self, input: usize, seq_len: usize) -> Vec<F> {
        let b = self.batch;
        let mut out = vec![F::zero(); self.dx.len()];
        for s in 0..b {
            for t in 0..seq_len {
                out[(s * seq_len + t) * input..][..input].copy_from_slice(&self.dx[(t * b + s) * input..][..input]);
            }
        }
        out
    }

    /// ReLU activity pattern of the last forward pass.
    pub fn relu_mask(&self) -> Vec<bool> {
        self.e.iter().chain(&self.a2).map(|&v| v > F::zero()).collect()
    }
}

/// Applies sigmoid to the `i`, `f`, `o` blocks and tanh to the `g` block of
/// every `[i f g o]` row of `z`.
fn activate_gates<F: Scalar>(z: &mut [F], h: usize, ex: &mut Vec<F>) {
    let g = 4 * h;
    resize(ex, z.len());
    for (zr, er) in z.chunks_exact(g).zip(ex.chunks_exact_mut(g)) {
        for (e, &v) in er.iter_mut().zip(zr) {
            *e = -v;
        }
        for (e, &v) in er[2 * h..3 * h].iter_mut().zip(&zr[2 * h..3 * h]) {
            *e = -(v + v).abs();
        }
    }
    F::exp_in_place(ex);
    for (zr, er) in z.chunks_exact_mut(g).zip(ex.chunks_exact(g)) {
        let (sig, rest) = zr.split_at_mut(2 * h);
        let (tanh, out) = rest.split_at_mut(h);
        for (v, &e) in sig.iter_mut().zip(&er[..2 * h]).chain(out.iter_mut().zip(&er[3 * h..])) {
            *v = F::one() / (F::one() + e);
        }
        for (v, &e) in tanh.iter_mut().zip(&er[2 * h..3 * h]) {
            *v = signed_tanh(*v, e);
        }
    }
}

/// `tanh(x)` given `e = exp(-2|x|)`.
#[inline(always)]
fn signed_tanh<F: Scalar>(x: F, e: F) -> F {
    let t = (F::one() - e) / (F::one() + e);
    if x < F::zero() {
        -t
    } else {
        t
    }
}

fn tanh_into<F: Scalar>(x: &[F], out: &mut [F], ex: &mut Vec<F>) {
    ex.clear();
    ex.extend(x.iter().map(|&v| -(v + v).abs()));
    F::exp_in_place(ex);
    for ((o, &v), &e) in out.iter_mut().zip(x).zip(ex.iter()) {
        *o = signed_tanh(v, e);
    }
}

fn resize<F: Scalar>(v: &mut Vec<F>, len: usize) {
    v.clear();
    v.resize(len, F::zero());
}

/// Network parameters in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Net<F> {
    shape: NetShape,
    layout: Layout,
    pub params: Vec<F>,
}

impl<F: Scalar> Net<F> {
    pub fn zeros(shape: NetShape) -> Self {
        let layout = Layout::new(&shape);
        Self { params: vec![F::zero(); layout.total], layout, shape }
    }

    /// Uniform `±1/sqrt(fan_in)` for dense layers and `±1/sqrt(H)` for the LSTM.
    pub fn init<R: Rng>(shape: NetShape, rng: &mut R) -> Self {
        let mut net = Self::zeros(shape);
        let l = net.layout.clone();
        let s = shape;
        let mut fill = |r: Range<usize>, bound: f64, p: &mut [F]| {
            for x in &mut p[r] {
                *x = F::from_f64(rng.gen_range(-bound..=bound));
            }
        };
        let lin = |fan_in: usize| 1.0 / (fan_in as f64).sqrt();
        let rec = 1.0 / (s.hidden as f64).sqrt();
        let p = &mut net.params;
        fill(l.w1.clone(), lin(s.input), p);
        fill(l.b1.clone(), lin(s.input), p);
        for d in [&l.fwd, &l.bwd] {
            fill(d.wx.clone(), rec, p);
            fill(d.wh.clone(), rec, p);
            fill(d.b.clone(), rec, p);
        }
        fill(l.w2.clone(), lin(2 * s.hidden), p);
        fill(l.b2.clone(), lin(2 * s.hidden), p);
        fill(l.w3.clone(), lin(s.dense), p);
        fill(l.b3.clone(), lin(s.dense), p);
        net
    }

    pub fn from_params(shape: NetShape, params: Vec<F>) -> Self {
        let layout = Layout::new(&shape);
        assert_eq!(params.len(), layout.total);
        Self { shape, layout, params }
    }

    pub fn shape(&self) -> &NetShape {
        &self.shape
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    /// Converts to another precision.
    pub fn cast<G: Scalar>(&self) -> Net<G> {
        Net::from_params(self.shape, self.params.iter().map(|x| G::from_f64(x.as_f64())).collect())
    }

    /// Runs `batch` samples of `sample_len()` values each; outputs land in
    /// `tape.outputs()` as `[batch][outputs]`.
    pub fn forward<'t>(&self, input: &[F], batch: usize, tape: &'t mut Tape<F>) -> Result<&'t [F], NetError> {
        let s = &self.shape;
        let expected = batch * s.sample_len();
        if input.len() != expected {
            return Err(NetError::InputShape { expected, got: input.len() });
        }
        let (w, h, g) = (s.seq_len, s.hidden, 4 * s.hidden);
        let p = &self.params;
        let l = &self.layout;
        tape.batch = batch;

        // Time-major input so each step's rows are contiguous.
        resize(&mut tape.x, expected);
        for b in 0..batch {
            for t in 0..w {
                let src = &input[(b * w + t) * s.input..][..s.input];
                tape.x[(t * batch + b) * s.input..][..s.input].copy_from_slice(src);
            }
        }

        resize(&mut tape.e, w * batch * s.embed);
        fill_rows(&mut tape.e, &p[l.b1.clone()]);
        gemm_acc(&tape.x, Op::Plain, &p[l.w1.clone()], Op::Plain, &mut tape.e, w * batch, s.input, s.embed);
        tape.e.iter_mut().for_each(|v| *v = v.max(F::zero()));

        for (dir, reverse) in [(&l.fwd, false), (&l.bwd, true)] {
            resize(&mut tape.zx, w * batch * g);
            fill_rows(&mut tape.zx, &p[dir.b.clone()]);
            gemm_acc(&tape.e, Op::Plain, &p[dir.wx.clone()], Op::Plain, &mut tape.zx, w * batch, s.embed, g);
            let dt = if reverse { &mut tape.bwd } else { &mut tape.fwd };
            resize(&mut dt.gates, w * batch * g);
            resize(&mut dt.c, w * batch * h);
            resize(&mut dt.tanh_c, w * batch * h);
            resize(&mut dt.h, w * batch * h);
            let wh = &p[dir.wh.clone()];
            for step in 0..w {
                let t = if reverse { w - 1 - step } else { step };
                let z = &mut dt.gates[step * batch * g..][..batch * g];
                z.copy_from_slice(&tape.zx[t * batch * g..][..batch * g]);
                if step > 0 {
                    let h_prev = &dt.h[(step - 1) * batch * h..][..batch * h];
                    matmul_acc(h_prev, wh, z, batch, h, g);
                }
                activate_gates(z, h, &mut tape.ex);
                let base = step * batch * h;
                let c_prev = if step > 0 { Some(base - batch * h) } else { None };
                for b in 0..batch {
                    let zr = &z[b * g..][..g];
                    for k in 0..h {
                        let cp = c_prev.map_or(F::zero(), |at| dt.c[at + b * h + k]);
                        dt.c[base + b * h + k] = zr[h + k] * cp + zr[k] * zr[2 * h + k];
                    }
                }
                let (c, tc) = (&dt.c[base..][..batch * h], &mut dt.tanh_c[base..][..batch * h]);
                tanh_into(c, tc, &mut tape.ex);
                for b in 0..batch {
                    let zr = &z[b * g..][..g];
                    for k in 0..h {
                        dt.h[base + b * h + k] = zr[3 * h + k] * tc[b * h + k];
                    }
                }
            }
        }

        resize(&mut tape.hcat, batch * 2 * h);
        let last = (w - 1) * batch * h;
        for b in 0..batch {
            let row = &mut tape.hcat[b * 2 * h..][..2 * h];
            row[..h].copy_from_slice(&tape.fwd.h[last + b * h..][..h]);
            row[h..].copy_from_slice(&tape.bwd.h[last + b * h..][..h]);
        }

        resize(&mut tape.a2, batch * s.dense);
        fill_rows(&mut tape.a2, &p[l.b2.clone()]);
        gemm_acc(&tape.hcat, Op::Plain, &p[l.w2.clone()], Op::Plain, &mut tape.a2, batch, 2 * h, s.dense);
        tape.a2.iter_mut().for_each(|v| *v = v.max(F::zero()));

        resize(&mut tape.out, batch * s.outputs);
        fill_rows(&mut tape.out, &p[l.b3.clone()]);
        gemm_acc(&tape.a2, Op::Plain, &p[l.w3.clone()], Op::Plain, &mut tape.out, batch, s.dense, s.outputs);
        tape.recorded = true;
        Ok(&tape.out)
    }

    /// Accumulates parameter gradients of `sum(d_out * outputs)` into `grads`.
    pub fn backward(&self, tape: &mut Tape<F>, d_out: &[F], grads: &mut [F]) -> Result<(), NetError> {
        if !tape.recorded {
            return Err(NetError::NoForward);
        }
        let s = &self.shape;
        let batch = tape.batch;
        if d_out.len() != batch * s.outputs {
            return Err(NetError::GradShape { expected: batch * s.outputs, got: d_out.len() });
        }
        assert_eq!(grads.len(), self.layout.total);
        let (w, h, g) = (s.seq_len, s.hidden, 4 * s.hidden);
        let p = &self.params;
        let l = &self.layout;

        // Head.
        gemm_acc(&tape.a2, Op::Transposed, d_out, Op::Plain, &mut grads[l.w3.clone()], s.dense, batch, s.outputs);
        col_sum_acc(d_out, &mut grads[l.b3.clone()]);
        let mut dz2 = vec![F::zero(); batch * s.dense];
        gemm_acc(d_out, Op::Plain, &p[l.w3.clone()], Op::Transposed, &mut dz2, batch, s.outputs, s.dense);
        for (d, &a) in dz2.iter_mut().zip(&tape.a2) {
            if a <= F::zero() {
                *d = F::zero();
            }
        }
        gemm_acc(&tape.hcat, Op::Transposed, &dz2, Op::Plain, &mut grads[l.w2.clone()], 2 * h, batch, s.dense);
        col_sum_acc(&dz2, &mut grads[l.b2.clone()]);
        let mut dhcat = vec![F::zero(); batch * 2 * h];
        gemm_acc(&dz2, Op::Plain, &p[l.w2.clone()], Op::Transposed, &mut dhcat, batch, s.dense, 2 * h);

        resize(&mut tape.de, w * batch * s.embed);
        for (dir, reverse) in [(&l.fwd, false), (&l.bwd, true)] {
            let dt = if reverse { &tape.bwd } else { &tape.fwd };
            resize(&mut tape.dh, batch * h);
            resize(&mut tape.dc, batch * h);
            resize(&mut tape.dz, batch * g);
            resize(&mut tape.dzx, w * batch * g);
            let off = if reverse { h } else { 0 };
            for b in 0..batch {
                tape.dh[b * h..][..h].copy_from_slice(&dhcat[b * 2 * h + off..][..h]);
            }
            let gwh = dir.wh.clone();
            for step in (0..w).rev() {
                let t = if reverse { w - 1 - step } else { step };
                for b in 0..batch {
                    let base = (step * batch + b) * h;
                    let gates = &dt.gates[(step * batch + b) * g..][..g];
                    let dz = &mut tape.dz[b * g..][..g];
                    for k in 0..h {
                        let (i, f, gg, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
                        let tc = dt.tanh_c[base + k];
                        let dh = tape.dh[b * h + k];
                        let mut dc = tape.dc[b * h + k] + dh * o * (F::one() - tc * tc);
                        let c_prev = if step > 0 { dt.c[base - batch * h + k] } else { F::zero() };
                        dz[k] = dc * gg * i * (F::one() - i);
                        dz[h + k] = dc * c_prev * f * (F::one() - f);
                        dz[2 * h + k] = dc * i * (F::one() - gg * gg);
                        dz[3 * h + k] = dh * tc * o * (F::one() - o);
                        dc *= f;
                        tape.dc[b * h + k] = dc;
                    }
                }
                tape.dzx[t * batch * g..][..batch * g].copy_from_slice(&tape.dz);
                if step > 0 {
                    let h_prev = &dt.h[(step - 1) * batch * h..][..batch * h];
                    gemm_acc(h_prev, Op::Transposed, &tape.dz, Op::Plain, &mut grads[gwh.clone()], h, batch, g);
                    tape.dh.iter_mut().for_each(|x| *x = F::zero());
                    gemm_acc(&tape.dz, Op::Plain, &p[dir.wh.clone()], Op::Transposed, &mut tape.dh, batch, g, h);
                }
            }
            gemm_acc(&tape.e, Op::Transposed, &tape.dzx, Op::Plain, &mut grads[dir.wx.clone()], s.embed, w * batch, g);
            col_sum_acc(&tape.dzx, &mut grads[dir.b.clone()]);
            gemm_acc(&tape.dzx, Op::Plain, &p[dir.wx.clone()], Op::Transposed, &mut tape.de, w * batch, g, s.embed);
        }

        for (d, &e) in tape.de.iter_mut().zip(&tape.e) {
            if e <= F::zero() {
                *d = F::zero();
            }
        }
        gemm_acc(&tape.x, Op::Transposed, &tape.de, Op::Plain, &mut grads[l.w1.clone()], s.input, w * batch, s.embed);
        col_sum_acc(&tape.de, &mut grads[l.b1.clone()]);
        resize(&mut tape.dx, w * batch * s.input);
        gemm_acc(&tape.de, Op::Plain, &p[l.w1.clone()], Op::Transposed, &mut tape.dx, w * batch, s.embed, s.input);
        Ok(())
    }

    /// Single-sample forward pass.
    pub fn eval(&self, input: &[F], tape: &mut Tape<F>) -> Result<Vec<F>, NetError> {
        self.forward(input, 1, tape).map(|o| o.to_vec())
    }

    /// Zeroes the output layer so every output starts at 0.
    pub fn zero_head(&mut self) {
        let (w3, b3) = (self.layout.w3.clone(), self.layout.b3.clone());
        self.params[w3].iter_mut().for_each(|x| *x = F::zero());
        self.params[b3].iter_mut().for_each(|x| *x = F::zero());
    }
}

/// Numerically stable softmax of a row of logits.
pub fn softmax<F: Scalar>(logits: &[F], out: &mut [F]) {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let mut sum = F::zero();
    for (o, &z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o = *o / sum);
}

/// `log softmax(logits)[k]`.
pub fn log_softmax_at<F: Scalar>(logits: &[F], k: usize) -> F {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let sum = logits.iter().fold(F::zero(), |acc, &z| acc + (z - max).exp());
    logits[k] - max - sum.ln()
}
