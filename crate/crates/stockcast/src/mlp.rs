//! Feedforward multilayer perceptron with sigmoid activations.
//!
//! The network is topology-parametric (default 5:21:21:1), trained by plain
//! stochastic gradient descent with error backpropagation, and serializable
//! to a line-oriented text format.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The logistic function, mapping any real to (0,1).
///
/// Computed with a branch-free, table-free exponential rather than libm's
/// `exp`: the training loop spends most of its time here, and this version
/// is substantially faster (it auto-vectorizes across a layer's units),
/// bit-identical across libm versions, and accurate to ~2 ulp. Arguments
/// are clamped to +-708 first — the logistic is already flat to within
/// ~1e-307 there — which keeps the exponential away from overflow and
/// subnormal slow paths.
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + exp_clamped(-x))
}

/// Applies the logistic function to every element. Same arithmetic as
/// [`sigmoid`] (identical results bit for bit), processed four lanes at a
/// time so the lane-wise exponential vectorizes across a layer's units.
#[inline]
fn sigmoid_slice(values: &mut [f64]) {
    let mut chunks = values.chunks_exact_mut(4);
    for chunk in &mut chunks {
        let quad = exp_clamped4([-chunk[0], -chunk[1], -chunk[2], -chunk[3]]);
        for (v, e) in chunk.iter_mut().zip(quad) {
            *v = 1.0 / (1.0 + e);
        }
    }
    for v in chunks.into_remainder() {
        *v = 1.0 / (1.0 + exp_clamped(-*v));
    }
}

/// Four-lane [`exp_clamped`]: the same operations in the same order on
/// fixed-size arrays, which the compiler turns into packed SIMD.
#[inline]
fn exp_clamped4(x: [f64; 4]) -> [f64; 4] {
    const SHIFT: f64 = 1.5 * (1u64 << 52) as f64;
    let mut kd = [0.0f64; 4];
    let mut r = [0.0f64; 4];
    let mut scale = [0.0f64; 4];
    let mut p = [0.0f64; 4];
    let mut x = x;
    for l in 0..4 {
        x[l] = x[l].clamp(-708.0, 708.0);
        kd[l] = x[l].mul_add(EXP_INV_LN2, SHIFT);
    }
    for l in 0..4 {
        let k = i64::from(kd[l].to_bits() as u32 as i32);
        scale[l] = f64::from_bits(((k + 1023) as u64) << 52);
        kd[l] -= SHIFT;
    }
    for l in 0..4 {
        r[l] = (-kd[l]).mul_add(EXP_LN2_HI, x[l]);
        r[l] = (-kd[l]).mul_add(EXP_LN2_LO, r[l]);
    }
    for c in EXP_POLY {
        for l in 0..4 {
            p[l] = r[l].mul_add(p[l], c);
        }
    }
    for l in 0..4 {
        p[l] *= scale[l];
    }
    p
}

/// e^x with x clamped to [-708, 708], so the result always stays in the
/// normal range. Argument reduction x = k*ln2 + r with |r| <= ln2/2, then
/// e^x = 2^k * e^r with a degree-13 Taylor polynomial for e^r (remainder
/// r^14/14! < 5e-18). Every operation is lane-wise — no tables, no
/// branches — so slice-mapped calls vectorize.
const EXP_INV_LN2: f64 = std::f64::consts::LOG2_E; // 1 / ln 2
const EXP_LN2_HI: f64 = f64::from_bits(0x3FE62E42FEE00000); // ln 2 head
const EXP_LN2_LO: f64 = f64::from_bits(0x3DEA39EF35793C76); // ln 2 - head
/// Taylor coefficients 1/13! .. 1/0! of e^r, Horner order.
const EXP_POLY: [f64; 14] = [
    1.0 / 6_227_020_800.0,
    1.0 / 479_001_600.0,
    1.0 / 39_916_800.0,
    1.0 / 3_628_800.0,
    1.0 / 362_880.0,
    1.0 / 40_320.0,
    1.0 / 5_040.0,
    1.0 / 720.0,
    1.0 / 120.0,
    1.0 / 24.0,
    1.0 / 6.0,
    0.5,
    1.0,
    1.0,
];

#[inline]
fn exp_clamped(x: f64) -> f64 {
    const SHIFT: f64 = 1.5 * (1u64 << 52) as f64; // round-to-int bias trick

    let x = x.clamp(-708.0, 708.0);
    let kd = x.mul_add(EXP_INV_LN2, SHIFT);
    // Low 32 mantissa bits of kd now hold k = round(x / ln 2) in two's
    // complement (|k| <= 1022, exactly representable).
    let k = i64::from(kd.to_bits() as u32 as i32);
    let kd = kd - SHIFT;
    let r = (-kd).mul_add(EXP_LN2_HI, x);
    let r = (-kd).mul_add(EXP_LN2_LO, r);

    let scale = f64::from_bits(((k + 1023) as u64) << 52); // 2^k

    // e^r = sum r^n / n! for n in 0..=13, |r| <= ln2/2.
    let mut p = 0.0;
    for c in EXP_POLY {
        p = r.mul_add(p, c);
    }
    scale * p
}

/// Layer sizes, input first, output last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    layer_sizes: Vec<usize>,
}

impl Topology {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Topology(format!(
                "need at least 2 layers, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Topology("every layer size must be >= 1".into()));
        }
        Ok(Topology { layer_sizes })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of non-input layers.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }
}

impl Default for Topology {
    fn default() -> Self {
        Topology {
            layer_sizes: vec![5, 21, 21, 1],
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.layer_sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(":"))
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sizes: std::result::Result<Vec<usize>, _> =
            s.split(':').map(|p| p.trim().parse::<usize>()).collect();
        match sizes {
            Ok(v) => Topology::new(v),
            Err(_) => Err(Error::Topology(format!("cannot parse topology '{s}'"))),
        }
    }
}

/// One scaled training observation: a window of inputs and the next value.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub input: Vec<f64>,
    pub target: f64,
}

// Dot product with four independent accumulators so the compiler can keep
// the lanes in parallel. Both forward() and the fused training step go
// through here; they must agree bit-for-bit.
#[inline(always)]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] = x[0].mul_add(y[0], acc[0]);
        acc[1] = x[1].mul_add(y[1], acc[1]);
        acc[2] = x[2].mul_add(y[2], acc[2]);
        acc[3] = x[3].mul_add(y[3], acc[3]);
    }
    let mut tail = 0.0;
    for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
        tail = x.mul_add(y, tail);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

// z[u] += a_i * w[i*units + u] for every input i, in input order — the
// input-major forward accumulation. Shared by forward() and the fused
// training step; they must agree bit-for-bit. Written iterator-only so
// the inner loop carries no bounds checks and vectorizes.
#[inline(always)]
fn accumulate_columns(out: &mut [f64], prev: &[f64], weights: &[f64], units: usize) {
    for (&a, col) in prev.iter().zip(weights.chunks_exact(units)) {
        // Four explicit independent lanes; the unit axis is data-parallel,
        // so this keeps each out[u]'s accumulation chain unchanged while
        // compiling to packed FMA.
        let mut oc = out.chunks_exact_mut(4);
        let mut wc = col.chunks_exact(4);
        for (z, w) in (&mut oc).zip(&mut wc) {
            z[0] = w[0].mul_add(a, z[0]);
            z[1] = w[1].mul_add(a, z[1]);
            z[2] = w[2].mul_add(a, z[2]);
            z[3] = w[3].mul_add(a, z[3]);
        }
        for (z, &w) in oc.into_remainder().iter_mut().zip(wc.remainder()) {
            *z = w.mul_add(a, *z);
        }
    }
}

// In-place gradient-descent update of one input-major weight matrix:
// w[i*units + u] -= learning_rate * prev[i] * delta[u]. Shared by both
// training step variants; they must agree bit-for-bit.
#[inline(always)]
fn update_columns(weights: &mut [f64], prev: &[f64], delta: &[f64], learning_rate: f64) {
    let units = delta.len();
    for (&a, col) in prev.iter().zip(weights.chunks_exact_mut(units)) {
        let step = learning_rate * a;
        // Same explicit 4-lane layout as accumulate_columns, for packed FMA.
        let mut wc = col.chunks_exact_mut(4);
        let mut dc = delta.chunks_exact(4);
        for (w, d) in (&mut wc).zip(&mut dc) {
            w[0] = (-step).mul_add(d[0], w[0]);
            w[1] = (-step).mul_add(d[1], w[1]);
            w[2] = (-step).mul_add(d[2], w[2]);
            w[3] = (-step).mul_add(d[3], w[3]);
        }
        for (w, &d) in wc.into_remainder().iter_mut().zip(dc.remainder()) {
            *w = (-step).mul_add(d, *w);
        }
    }
}

#[inline]
fn update_bias(biases: &mut [f64], delta: &[f64], learning_rate: f64) {
    for (b, &d) in biases.iter_mut().zip(delta) {
        *b = (-learning_rate).mul_add(d, *b);
    }
}

// Reusable training buffers: per-layer activations (input included) and
// per-non-input-layer deltas.
struct Scratch {
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

/// Fully connected sigmoid network.
///
/// For non-input layer `l`, `weights[l]` is stored input-major as
/// `fan_in x units` (index `input * units + unit`, i.e. one contiguous
/// column per input) so that the forward and update passes are plain
/// element-wise loops over the unit axis. `biases[l]` holds one bias per
/// unit. The serialized form and the public accessors stay unit-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl Network {
    /// All weights and biases drawn i.i.d. uniform on [-0.5, 0.5] from a
    /// ChaCha stream keyed by `seed`. Identical (topology, seed) pairs yield
    /// bit-identical networks on every platform.
    pub fn random(topology: Topology, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(topology.depth());
        let mut biases = Vec::with_capacity(topology.depth());
        for l in 1..topology.layer_sizes.len() {
            let fan_in = topology.layer_sizes[l - 1];
            let units = topology.layer_sizes[l];
            // Draw order is unit-major (all of unit 0's fan-in, then unit 1's,
            // ...); transpose into the input-major storage afterwards.
            let drawn: Vec<f64> = (0..units * fan_in)
                .map(|_| rng.random::<f64>() - 0.5)
                .collect();
            let mut w = vec![0.0; units * fan_in];
            for u in 0..units {
                for i in 0..fan_in {
                    w[i * units + u] = drawn[u * fan_in + i];
                }
            }
            let b: Vec<f64> = (0..units).map(|_| rng.random::<f64>() - 0.5).collect();
            weights.push(w);
            biases.push(b);
        }
        Network {
            topology,
            weights,
            biases,
        }
    }

    /// All parameters zero; forward output is sigma(0) = 0.5 everywhere.
    pub fn zeroed(topology: Topology) -> Self {
        let weights = (1..topology.layer_sizes.len())
            .map(|l| vec![0.0; topology.layer_sizes[l] * topology.layer_sizes[l - 1]])
            .collect();
        let biases = (1..topology.layer_sizes.len())
            .map(|l| vec![0.0; topology.layer_sizes[l]])
            .collect();
        Network {
            topology,
            weights,
            biases,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn weight(&self, layer: usize, unit: usize, input: usize) -> f64 {
        let units = self.topology.layer_sizes[layer + 1];
        self.weights[layer][input * units + unit]
    }

    pub fn set_weight(&mut self, layer: usize, unit: usize, input: usize, value: f64) {
        let units = self.topology.layer_sizes[layer + 1];
        self.weights[layer][input * units + unit] = value;
    }

    pub fn bias(&self, layer: usize, unit: usize) -> f64 {
        self.biases[layer][unit]
    }

    pub fn set_bias(&mut self, layer: usize, unit: usize, value: f64) {
        self.biases[layer][unit] = value;
    }

    /// Per-layer activations, layer 0 being the input itself.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        if input.len() != self.topology.input_size() {
            return Err(Error::Shape {
                expected: self.topology.input_size(),
                got: input.len(),
            });
        }
        let mut activations = Vec::with_capacity(self.topology.layer_sizes.len());
        activations.push(input.to_vec());
        for l in 0..self.topology.depth() {
            let units = self.topology.layer_sizes[l + 1];
            let prev = &activations[l];
            let mut out = self.biases[l].clone();
            accumulate_columns(&mut out, prev, &self.weights[l], units);
            sigmoid_slice(&mut out);
            activations.push(out);
        }
        Ok(activations)
    }

    /// Scalar output of a single-output network.
    pub fn predict(&self, input: &[f64]) -> Result<f64> {
        let activations = self.forward(input)?;
        Ok(activations.last().unwrap()[0])
    }

    /// Gradients of the loss L = 1/2 (output - target)^2 with respect to
    /// every weight and bias, in the same layout as the parameters.
    pub fn gradients(&self, sample: &TrainSample) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let activations = self.forward(&sample.input)?;
        let depth = self.topology.depth();

        // delta[l] = dL/dz for non-input layer l
        let mut deltas: Vec<Vec<f64>> = vec![Vec::new(); depth];
        let output = &activations[depth];
        deltas[depth - 1] = output
            .iter()
            .map(|&o| (o - sample.target) * o * (1.0 - o))
            .collect();
        for l in (0..depth - 1).rev() {
            let units = self.topology.layer_sizes[l + 1];
            let next_units = self.topology.layer_sizes[l + 2];
            let act = &activations[l + 1];
            let mut delta = Vec::with_capacity(units);
            for u in 0..units {
                let row = &self.weights[l + 1][u * next_units..(u + 1) * next_units];
                let sum = dot(row, &deltas[l + 1]);
                delta.push(sum * act[u] * (1.0 - act[u]));
            }
            deltas[l] = delta;
        }

        let mut grad_w = Vec::with_capacity(depth);
        let mut grad_b = Vec::with_capacity(depth);
        for l in 0..depth {
            let fan_in = self.topology.layer_sizes[l];
            let units = self.topology.layer_sizes[l + 1];
            let prev = &activations[l];
            let mut gw = vec![0.0; units * fan_in];
            for u in 0..units {
                for i in 0..fan_in {
                    gw[u * fan_in + i] = deltas[l][u] * prev[i];
                }
            }
            grad_w.push(gw);
            grad_b.push(deltas[l].clone());
        }
        Ok((grad_w, grad_b))
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            acts: self
                .topology
                .layer_sizes
                .iter()
                .map(|&s| vec![0.0; s])
                .collect(),
            deltas: self.topology.layer_sizes[1..]
                .iter()
                .map(|&s| vec![0.0; s])
                .collect(),
        }
    }

    // Fused forward + backprop + in-place update; the hot path of training.
    // Same arithmetic as forward()/gradients(), without per-step allocation.
    fn step_with(&mut self, sample: &TrainSample, learning_rate: f64, scratch: &mut Scratch) -> Result<f64> {
        if sample.input.len() != self.topology.input_size() {
            return Err(Error::Shape {
                expected: self.topology.input_size(),
                got: sample.input.len(),
            });
        }
        let depth = self.topology.depth();
        scratch.acts[0].copy_from_slice(&sample.input);
        for l in 0..depth {
            let units = self.topology.layer_sizes[l + 1];
            let (prev, rest) = scratch.acts.split_at_mut(l + 1);
            let prev = &prev[l];
            let out = &mut rest[0];
            out.copy_from_slice(&self.biases[l]);
            accumulate_columns(out, prev, &self.weights[l], units);
            sigmoid_slice(out);
        }
        let output = scratch.acts[depth][0];
        let squared_error = (output - sample.target) * (output - sample.target);
        if !squared_error.is_finite() {
            return Err(Error::NonFinite("train_step"));
        }

        scratch.deltas[depth - 1][0] = (output - sample.target) * output * (1.0 - output);
        for l in (0..depth - 1).rev() {
            let next_units = self.topology.layer_sizes[l + 2];
            let (lower, upper) = scratch.deltas.split_at_mut(l + 1);
            let delta = &mut lower[l];
            let next_delta = &upper[0];
            let act = &scratch.acts[l + 1];
            let next_weights = &self.weights[l + 1];
            for ((d, &a), row) in delta
                .iter_mut()
                .zip(act.iter())
                .zip(next_weights.chunks_exact(next_units))
            {
                *d = dot(row, next_delta) * a * (1.0 - a);
            }
        }

        for l in 0..depth {
            let prev = &scratch.acts[l];
            let delta = &scratch.deltas[l];
            update_columns(&mut self.weights[l], prev, delta, learning_rate);
            update_bias(&mut self.biases[l], delta, learning_rate);
        }
        Ok(squared_error)
    }

    // Monomorphized copy of step_with() for IN:H:H:1 networks, the shape of
    // the default topology. Constant trip counts let the compiler unroll
    // and vectorize every loop and keep the scratch on the stack. The
    // arithmetic (operations and their order) mirrors step_with() exactly,
    // via the shared accumulate_columns/sigmoid_slice/dot helpers, so both
    // paths produce bit-identical networks; train_epoch() asserts the
    // layer sizes before dispatching here.
    fn step_fixed<const IN: usize, const H: usize>(
        &mut self,
        sample: &TrainSample,
        learning_rate: f64,
    ) -> Result<f64> {
        if sample.input.len() != IN {
            return Err(Error::Shape {
                expected: IN,
                got: sample.input.len(),
            });
        }
        let input: &[f64; IN] = sample.input[..].try_into().expect("length checked");

        let mut a1 = [0.0f64; H];
        let mut a2 = [0.0f64; H];
        a1.copy_from_slice(&self.biases[0]);
        accumulate_columns(&mut a1, input, &self.weights[0][..IN * H], H);
        sigmoid_slice(&mut a1);
        a2.copy_from_slice(&self.biases[1]);
        accumulate_columns(&mut a2, &a1, &self.weights[1][..H * H], H);
        sigmoid_slice(&mut a2);
        let mut out = [self.biases[2][0]];
        accumulate_columns(&mut out, &a2, &self.weights[2][..H], 1);
        sigmoid_slice(&mut out);
        let output = out[0];

        let squared_error = (output - sample.target) * (output - sample.target);
        if !squared_error.is_finite() {
            return Err(Error::NonFinite("train_step"));
        }

        let d_out = [(output - sample.target) * output * (1.0 - output)];
        // Each delta element is independent, so the loops below process four
        // units per iteration. That makes the stores to d2/d1 full-width
        // vector stores, which the immediately following vector loads (the
        // next backward stage and the weight update) can forward from
        // without stalling. Per-element arithmetic is unchanged.
        let mut d2 = [0.0f64; H];
        let w2 = &self.weights[2][..H];
        {
            let mut dc = d2.chunks_exact_mut(4);
            let mut wc = w2.chunks_exact(4);
            let mut ac = a2.chunks_exact(4);
            for ((d, w), a) in (&mut dc).zip(&mut wc).zip(&mut ac) {
                d[0] = dot(&w[0..1], &d_out) * a[0] * (1.0 - a[0]);
                d[1] = dot(&w[1..2], &d_out) * a[1] * (1.0 - a[1]);
                d[2] = dot(&w[2..3], &d_out) * a[2] * (1.0 - a[2]);
                d[3] = dot(&w[3..4], &d_out) * a[3] * (1.0 - a[3]);
            }
            for ((d, w), &a) in dc
                .into_remainder()
                .iter_mut()
                .zip(wc.remainder().chunks(1))
                .zip(ac.remainder())
            {
                *d = dot(w, &d_out) * a * (1.0 - a);
            }
        }
        let mut d1 = [0.0f64; H];
        let w1 = &self.weights[1][..H * H];
        {
            let mut dc = d1.chunks_exact_mut(4);
            let mut ac = a1.chunks_exact(4);
            let mut u = 0;
            for (d, a) in (&mut dc).zip(&mut ac) {
                d[0] = dot(&w1[u * H..(u + 1) * H], &d2) * a[0] * (1.0 - a[0]);
                d[1] = dot(&w1[(u + 1) * H..(u + 2) * H], &d2) * a[1] * (1.0 - a[1]);
                d[2] = dot(&w1[(u + 2) * H..(u + 3) * H], &d2) * a[2] * (1.0 - a[2]);
                d[3] = dot(&w1[(u + 3) * H..(u + 4) * H], &d2) * a[3] * (1.0 - a[3]);
                u += 4;
            }
            for (d, &a) in dc.into_remainder().iter_mut().zip(ac.remainder()) {
                *d = dot(&w1[u * H..(u + 1) * H], &d2) * a * (1.0 - a);
                u += 1;
            }
        }

        update_columns(&mut self.weights[0][..IN * H], input, &d1, learning_rate);
        update_bias(&mut self.biases[0], &d1, learning_rate);
        update_columns(&mut self.weights[1][..H * H], &a1, &d2, learning_rate);
        update_bias(&mut self.biases[1], &d2, learning_rate);
        update_columns(&mut self.weights[2][..H], &a2, &d_out, learning_rate);
        update_bias(&mut self.biases[2], &d_out, learning_rate);
        Ok(squared_error)
    }

    /// One stochastic-gradient step. Returns the pre-update squared error
    /// (output - target)^2.
    pub fn train_step(&mut self, sample: &TrainSample, learning_rate: f64) -> Result<f64> {
        let mut scratch = self.scratch();
        let squared_error = self.step_with(sample, learning_rate, &mut scratch)?;
        if self.weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("train_step"));
        }
        Ok(squared_error)
    }

    /// One pass over `samples` in the given order. Returns the mean of the
    /// per-sample pre-update squared errors.
    pub fn train_epoch(&mut self, samples: &[TrainSample], learning_rate: f64) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut total = 0.0;
        if self.topology.layer_sizes == [5, 21, 21, 1] {
            // Specialized step for the default topology; bit-identical
            // arithmetic, constant loop bounds.
            for sample in samples {
                total += self.step_fixed::<5, 21>(sample, learning_rate)?;
            }
        } else {
            let mut scratch = self.scratch();
            for sample in samples {
                total += self.step_with(sample, learning_rate, &mut scratch)?;
            }
        }
        Ok(total / samples.len() as f64)
    }

    /// Line-oriented text form. `{:?}` floats round-trip f64 exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("mlpnet v1\n");
        out.push_str(&format!("{}\n", self.topology));
        for l in 0..self.topology.depth() {
            let fan_in = self.topology.layer_sizes[l];
            let units = self.topology.layer_sizes[l + 1];
            out.push_str(&format!("layer {}\n", l + 1));
            for u in 0..units {
                let mut parts: Vec<String> = (0..fan_in)
                    .map(|i| format!("{:?}", self.weight(l, u, i)))
                    .collect();
                parts.push(format!("{:?}", self.biases[l][u]));
                out.push_str(&parts.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn deserialize(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (n, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        if header.trim() != "mlpnet v1" {
            return Err(Error::Parse {
                line: n + 1,
                msg: format!("expected 'mlpnet v1' header, got '{header}'"),
            });
        }
        let (n, topo_line) = lines.next().ok_or(Error::Parse {
            line: 2,
            msg: "missing topology line".into(),
        })?;
        let topology: Topology = topo_line.trim().parse().map_err(|e| Error::Parse {
            line: n + 1,
            msg: format!("{e}"),
        })?;

        let mut net = Network::zeroed(topology.clone());
        for l in 0..topology.depth() {
            let fan_in = topology.layer_sizes[l];
            let units = topology.layer_sizes[l + 1];
            let (n, marker) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("missing 'layer {}' marker", l + 1),
            })?;
            if marker.trim() != format!("layer {}", l + 1) {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: format!("expected 'layer {}', got '{marker}'", l + 1),
                });
            }
            for u in 0..units {
                let (n, row) = lines.next().ok_or(Error::Parse {
                    line: 0,
                    msg: format!("missing unit row {} of layer {}", u + 1, l + 1),
                })?;
                let values: std::result::Result<Vec<f64>, _> =
                    row.split_whitespace().map(f64::from_str).collect();
                let values = values.map_err(|e| Error::Parse {
                    line: n + 1,
                    msg: format!("non-numeric token: {e}"),
                })?;
                if values.len() != fan_in + 1 {
                    return Err(Error::Parse {
                        line: n + 1,
                        msg: format!(
                            "expected {} values (fan-in + bias), got {}",
                            fan_in + 1,
                            values.len()
                        ),
                    });
                }
                for (i, v) in values[..fan_in].iter().enumerate() {
                    net.set_weight(l, u, i, *v);
                }
                net.biases[l][u] = values[fan_in];
            }
        }
        if let Some((n, extra)) = lines.find(|(_, s)| !s.trim().is_empty()) {
            return Err(Error::Parse {
                line: n + 1,
                msg: format!("trailing garbage '{extra}'"),
            });
        }
        Ok(net)
    }
}
