//! Feed-forward policy network over the two construction actions.
//!
//! ReLU hidden layers, two output logits, softmax cross-entropy loss and
//! Adam updates. Parameters live in one flat vector: for each layer the
//! weights (input-major, so the weights leaving one input are contiguous)
//! followed by the biases.

use std::io::{Read, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::pair_count;

pub const DEFAULT_HIDDEN: [usize; 2] = [72, 12];
pub const DEFAULT_LEARNING_RATE: f64 = 0.003;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

const MAGIC: &[u8; 8] = b"CEMGPNET";
const VERSION: u32 = 1;

/// Probability of choosing action 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionDistribution {
    pub p1: f64,
}

impl ActionDistribution {
    pub fn from_logits(z: [f64; 2]) -> Self {
        let m = z[0].max(z[1]);
        let e0 = (z[0] - m).exp();
        let e1 = (z[1] - m).exp();
        ActionDistribution { p1: e1 / (e0 + e1) }
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }
}

/// With probability `act_rndness` a fair coin, otherwise a draw from `dist`.
pub fn sample_action<R: Rng + ?Sized>(dist: ActionDistribution, rng: &mut R, act_rndness: f64) -> u8 {
    if rng.random::<f64>() < act_rndness {
        rng.random::<bool>() as u8
    } else {
        (rng.random::<f64>() < dist.p1) as u8
    }
}

/// `−log p_action` from raw logits, via log-sum-exp.
fn cross_entropy(z: [f64; 2], action: u8) -> f64 {
    let m = z[0].max(z[1]);
    let lse = m + ((z[0] - m).exp() + (z[1] - m).exp()).ln();
    lse - z[action as usize]
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    sizes: Vec<usize>,
    params: Vec<f64>,
    // start of each layer's weights; its biases follow at + inputs * outputs
    offsets: Vec<usize>,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl PolicyNet {
    /// Network with the given layer sizes (input first, 2 outputs last),
    /// weights uniform in ±√(6/(fan_in+fan_out)) and zero biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = PolicyNet::zeroed(sizes)?;
        for l in 0..net.layers() {
            let limit = (6.0 / (sizes[l] + sizes[l + 1]) as f64).sqrt();
            let (w, _) = net.layer_params_mut(l);
            for x in w {
                *x = rng.random_range(-limit..=limit);
            }
        }
        Ok(net)
    }

    /// Network for graphs of order `n`: `n(n−1)` inputs, `hidden` layers, 2 outputs.
    pub fn for_order<R: Rng + ?Sized>(n: usize, hidden: &[usize], rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("graph order must be at least 2, got {n}")));
        }
        let mut sizes = vec![2 * pair_count(n)];
        sizes.extend_from_slice(hidden);
        sizes.push(2);
        PolicyNet::new(&sizes, rng)
    }

    fn zeroed(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) || sizes[sizes.len() - 1] != 2 {
            return Err(Error::InvalidInput(format!(
                "layer sizes must be positive and end with 2 outputs, got {sizes:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(sizes.len() - 1);
        let mut total = 0;
        for pair in sizes.windows(2) {
            offsets.push(total);
            total += pair[0] * pair[1] + pair[1];
        }
        Ok(PolicyNet {
            sizes: sizes.to_vec(),
            params: vec![0.0; total],
            offsets,
            m: vec![0.0; total],
            v: vec![0.0; total],
            step: 0,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Number of optimizer steps taken.
    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    fn layer_params(&self, l: usize) -> (&[f64], &[f64]) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offsets[l];
        let (w, b) = self.params[start..start + i * o + o].split_at(i * o);
        (w, b)
    }

    /// Weights (input-major, `inputs × outputs`) and biases of layer `l`.
    pub fn layer_params_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offsets[l];
        self.params[start..start + i * o + o].split_at_mut(i * o)
    }

    fn check_width(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_width() {
            return Err(Error::InvalidInput(format!(
                "observation width {} does not match network input width {}",
                x.len(),
                self.input_width()
            )));
        }
        Ok(())
    }

    /// Raw output scores for one input.
    pub fn logits(&self, x: &[f64]) -> Result<[f64; 2]> {
        self.check_width(x)?;
        let mut s = Scratch::new(self);
        self.first_preactivation(x, &mut s.z1);
        Ok(self.forward_tail(&mut s))
    }

    pub fn forward<X: AsRef<[f64]>>(&self, batch: &[X]) -> Result<Vec<ActionDistribution>> {
        let mut s = Scratch::new(self);
        batch
            .iter()
            .map(|x| {
                let x = x.as_ref();
                self.check_width(x)?;
                self.first_preactivation(x, &mut s.z1);
                Ok(ActionDistribution::from_logits(self.forward_tail(&mut s)))
            })
            .collect()
    }

    /// Mean cross-entropy over `pairs` and its gradient in parameter order.
    pub fn loss_and_gradient<X: AsRef<[f64]>>(&self, pairs: &[(X, u8)]) -> Result<(f64, Vec<f64>)> {
        if pairs.is_empty() {
            return Err(Error::InvalidInput("training batch is empty".into()));
        }
        let scale = 1.0 / pairs.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut s = Scratch::new(self);
        let mut loss = 0.0;
        for (x, action) in pairs {
            let x = x.as_ref();
            self.check_width(x)?;
            check_action(*action)?;
            self.first_preactivation(x, &mut s.z1);
            loss += self.sample_backward(*action, scale, &mut s, &mut grad);
            let h = self.sizes[1];
            let (gw, gb) = grad[..h * x.len() + h].split_at_mut(h * x.len());
            for (i, &xi) in x.iter().enumerate() {
                if xi != 0.0 {
                    for (g, d) in gw[i * h..(i + 1) * h].iter_mut().zip(&s.dz1) {
                        *g += xi * d;
                    }
                }
            }
            for (g, d) in gb.iter_mut().zip(&s.dz1) {
                *g += d;
            }
        }
        Ok((loss * scale, grad))
    }

    /// One Adam step on the mean cross-entropy of `pairs`; returns the
    /// loss before the step.
    pub fn train_step<X: AsRef<[f64]>>(&mut self, pairs: &[(X, u8)], learning_rate: f64) -> Result<f64> {
        let (loss, grad) = self.loss_and_gradient(pairs)?;
        self.apply_gradient(loss, &grad, learning_rate)?;
        Ok(loss)
    }

    /// Same loss and gradient as [`loss_and_gradient`](Self::loss_and_gradient)
    /// over every (observation, action) pair of the given construction
    /// episodes, each a full row-wise action sequence.
    ///
    /// Consecutive observations differ in one edge bit and the cursor, so
    /// the first layer is updated incrementally, and the gradient of an
    /// edge input's weights is a suffix sum of later steps' gradients.
    pub fn episodes_loss_and_gradient<A: AsRef<[u8]>>(&self, episodes: &[A]) -> Result<(f64, Vec<f64>)> {
        let c = self.input_width() / 2;
        if self.input_width() % 2 != 0 || episodes.is_empty() {
            return Err(Error::InvalidInput(
                "episode training needs a construction network and at least one episode".into(),
            ));
        }
        let h = self.sizes[1];
        let scale = 1.0 / (episodes.len() * c) as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut s = Scratch::new(self);
        let mut dz1 = vec![0.0; c * h];
        let mut loss = 0.0;
        for actions in episodes {
            let actions = actions.as_ref();
            if actions.len() != c {
                return Err(Error::InvalidInput(format!(
                    "episode has {} actions, network expects {c}",
                    actions.len()
                )));
            }
            let mut z = self.initial_preactivation();
            for (t, &a) in actions.iter().enumerate() {
                check_action(a)?;
                s.z1.copy_from_slice(&z);
                loss += self.sample_backward(a, scale, &mut s, &mut grad);
                dz1[t * h..(t + 1) * h].copy_from_slice(&s.dz1);
                self.advance_preactivation(&mut z, t, a);
            }
            let (gw, gb) = grad[..2 * c * h + h].split_at_mut(2 * c * h);
            let mut later = vec![0.0; h];
            for t in (0..c).rev() {
                let d = &dz1[t * h..(t + 1) * h];
                if actions[t] == 1 {
                    for (g, l) in gw[t * h..(t + 1) * h].iter_mut().zip(&later) {
                        *g += l;
                    }
                }
                for (g, x) in gw[(c + t) * h..(c + t + 1) * h].iter_mut().zip(d) {
                    *g += x;
                }
                for ((g, l), x) in gb.iter_mut().zip(&mut later).zip(d) {
                    *g += x;
                    *l += x;
                }
            }
        }
        Ok((loss * scale, grad))
    }

    /// Adam update with gradient `grad`; `loss` is only checked for finiteness.
    pub fn apply_gradient(&mut self, loss: f64, grad: &[f64], learning_rate: f64) -> Result<()> {
        if grad.len() != self.params.len() {
            return Err(Error::InvalidInput("gradient length mismatch".into()));
        }
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NumericalFailure("non-finite loss or gradient".into()));
        }
        self.step += 1;
        let c1 = 1.0 - BETA1.powf(self.step as f64);
        let c2 = 1.0 - BETA2.powf(self.step as f64);
        for (((p, m), v), g) in self.params.iter_mut().zip(&mut self.m).zip(&mut self.v).zip(grad) {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *p -= learning_rate * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NumericalFailure("parameters became non-finite".into()));
        }
        Ok(())
    }

    fn first_preactivation(&self, x: &[f64], z1: &mut [f64]) {
        let (w, b) = self.layer_params(0);
        let h = b.len();
        z1.copy_from_slice(b);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (z, wi) in z1.iter_mut().zip(&w[i * h..(i + 1) * h]) {
                    *z += xi * wi;
                }
            }
        }
    }

    /// First-layer pre-activation of an initial construction observation.
    pub(crate) fn initial_preactivation(&self) -> Vec<f64> {
        let c = self.input_width() / 2;
        let (w, b) = self.layer_params(0);
        let h = b.len();
        b.iter().zip(&w[c * h..(c + 1) * h]).map(|(b, w)| b + w).collect()
    }

    /// Moves a first-layer pre-activation past step `t` taken with `action`.
    pub(crate) fn advance_preactivation(&self, z: &mut [f64], t: usize, action: u8) {
        let c = self.input_width() / 2;
        let (w, b) = self.layer_params(0);
        let h = b.len();
        let row = |k: usize| &w[k * h..(k + 1) * h];
        if action == 1 {
            z.iter_mut().zip(row(t)).for_each(|(z, w)| *z += w);
        }
        z.iter_mut().zip(row(c + t)).for_each(|(z, w)| *z -= w);
        if t + 1 < c {
            z.iter_mut().zip(row(c + t + 1)).for_each(|(z, w)| *z += w);
        }
    }

    /// Logits from a first-layer pre-activation.
    pub(crate) fn logits_from_preactivation(&self, z1: &[f64], s: &mut Scratch) -> [f64; 2] {
        s.z1.copy_from_slice(z1);
        self.forward_tail(s)
    }

    /// Layers past the first, starting from `s.z1`.
    fn forward_tail(&self, s: &mut Scratch) -> [f64; 2] {
        let last = self.layers() - 1;
        s.acts[0].copy_from_slice(&s.z1);
        if last > 0 {
            relu(&mut s.acts[0]);
        }
        for l in 1..=last {
            let (w, b) = self.layer_params(l);
            let o = b.len();
            let (prev, rest) = s.acts.split_at_mut(l);
            let out = &mut rest[0];
            out.copy_from_slice(b);
            for (i, &a) in prev[l - 1].iter().enumerate() {
                if a != 0.0 {
                    for (y, wi) in out.iter_mut().zip(&w[i * o..(i + 1) * o]) {
                        *y += a * wi;
                    }
                }
            }
            if l < last {
                relu(out);
            }
        }
        [s.acts[last][0], s.acts[last][1]]
    }

    /// Forward and backward for one sample with `s.z1` already set; adds the
    /// gradients of every layer but the first (scaled) to `grad`, leaves
    /// the first layer's pre-activation gradient in `s.dz1`, returns the loss.
    fn sample_backward(&self, action: u8, scale: f64, s: &mut Scratch, grad: &mut [f64]) -> f64 {
        let z = self.forward_tail(s);
        let p = ActionDistribution::from_logits(z);
        let mut delta = vec![p.p0() * scale, p.p1 * scale];
        delta[action as usize] -= scale;
        for l in (1..self.layers()).rev() {
            let (i_n, o) = (self.sizes[l], self.sizes[l + 1]);
            let start = self.offsets[l];
            let (w, _) = self.layer_params(l);
            let (gw, gb) = grad[start..start + i_n * o + o].split_at_mut(i_n * o);
            let input = &s.acts[l - 1];
            let mut back = vec![0.0; i_n];
            for i in 0..i_n {
                let a = input[i];
                if a > 0.0 {
                    let wi = &w[i * o..(i + 1) * o];
                    let gi = &mut gw[i * o..(i + 1) * o];
                    let mut sum = 0.0;
                    for k in 0..o {
                        gi[k] += a * delta[k];
                        sum += wi[k] * delta[k];
                    }
                    back[i] = sum;
                }
            }
            for (g, d) in gb.iter_mut().zip(&delta) {
                *g += d;
            }
            delta = back;
        }
        s.dz1.copy_from_slice(&delta);
        cross_entropy(z, action)
    }

    /// Writes the checkpoint: magic, version, layer sizes, then every
    /// parameter as little-endian f64 in layer order, weights before biases.
    /// Optimizer moments are not stored.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(self.sizes.len() as u32).to_le_bytes())?;
        for &s in &self.sizes {
            out.write_all(&(s as u32).to_le_bytes())?;
        }
        for p in &self.params {
            out.write_all(&p.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load<R: Read>(mut input: R) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidInput(format!("bad policy checkpoint: {msg}"));
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("wrong magic"));
        }
        let mut word = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word))
        };
        let version = read_u32(&mut input)?;
        if version != VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let count = read_u32(&mut input)? as usize;
        if !(2..=64).contains(&count) {
            return Err(bad("implausible layer count"));
        }
        let sizes = (0..count)
            .map(|_| read_u32(&mut input).map(|s| s as usize))
            .collect::<Result<Vec<_>>>()?;
        let mut net = PolicyNet::zeroed(&sizes)?;
        let mut buf = [0u8; 8];
        for p in &mut net.params {
            input.read_exact(&mut buf)?;
            *p = f64::from_le_bytes(buf);
            if !p.is_finite() {
                return Err(bad("non-finite parameter"));
            }
        }
        if input.read(&mut buf)? != 0 {
            return Err(bad("trailing bytes"));
        }
        Ok(net)
    }
}

/// Per-thread buffers for forward and backward passes.
pub(crate) struct Scratch {
    z1: Vec<f64>,
    dz1: Vec<f64>,
    acts: Vec<Vec<f64>>,
}

impl Scratch {
    pub(crate) fn new(net: &PolicyNet) -> Scratch {
        Scratch {
            z1: vec![0.0; net.sizes[1]],
            dz1: vec![0.0; net.sizes[1]],
            acts: net.sizes[1..].iter().map(|&s| vec![0.0; s]).collect(),
        }
    }
}

fn relu(xs: &mut [f64]) {
    for x in xs {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn check_action(action: u8) -> Result<()> {
    if action > 1 {
        return Err(Error::InvalidInput(format!("action must be 0 or 1, got {action}")));
    }
    Ok(())
}
