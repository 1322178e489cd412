//! Minimal reverse-mode tape over [`Tensor`] values.
//!
//! Shapes follow a channel-first batch convention: `[batch, channels, ...spatial]`
//! with one (`W`), two (`H, W`) or three (`D, H, W`) spatial axes. Convolutions
//! use stride 1 and zero "same" padding with odd kernels.

use hd_core::{Scalar, Tensor};

use crate::error::{HarnessError, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// How `reduce_depth` collapses the depth axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DepthReduce {
    Avg,
    Max,
    /// Learnable `D×1×1` kernel shared by all channels.
    Conv,
}

enum Op<T> {
    Leaf,
    Conv { x: Var, w: Var, b: Var },
    Relu(Var),
    AvgPool2(Var),
    Gap(Var),
    Linear { x: Var, w: Var, b: Var },
    SoftmaxCe { logits: Var, labels: Vec<usize>, probs: Tensor<T> },
    Mul(Var, Var),
    Add(Var, Var),
    Scale(Var, T),
    Sum(Var),
    Reshape(Var),
    /// `[B, C, D, H, W] → [B, C, H, W]`; `argmax` holds the chosen depth for `Max`.
    ReduceDepth { x: Var, mode: DepthReduce, w: Option<Var>, argmax: Vec<usize> },
    /// Scalar-valued op whose local gradients were computed alongside its value.
    Custom { inputs: Vec<Var>, grads: Vec<Tensor<T>> },
}

struct Node<T> {
    value: Tensor<T>,
    op: Op<T>,
}

/// Gradients from one backward pass, indexed by [`Var`].
pub struct Grads<T> {
    grads: Vec<Option<Tensor<T>>>,
}

impl<T: Scalar> Grads<T> {
    pub fn get(&self, v: Var) -> Option<&Tensor<T>> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor<T>> {
        self.grads.get_mut(v.0).and_then(|g| g.take())
    }
}

#[derive(Default)]
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

/// Conv geometry with 2D maps promoted to depth 1.
#[derive(Clone, Copy)]
struct Geom {
    b: usize,
    ci: usize,
    co: usize,
    d: usize,
    h: usize,
    w: usize,
    kd: usize,
    kh: usize,
    kw: usize,
}

fn spatial3(shape: &[usize]) -> (usize, usize, usize) {
    match shape.len() {
        3 => (1, 1, shape[2]),
        4 => (1, shape[2], shape[3]),
        5 => (shape[2], shape[3], shape[4]),
        _ => unreachable!("checked by caller"),
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf)
    }

    fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn shape_err(&self, op: &'static str, detail: String) -> HarnessError {
        HarnessError::Shape(format!("{op}: {detail}"))
    }

    fn geom(&self, x: Var, w: Var, b: Var) -> Result<Geom> {
        let xs = self.shape(x);
        let ws = self.shape(w);
        if !(3..=5).contains(&xs.len()) || ws.len() != xs.len() {
            return Err(self.shape_err("conv", format!("input {xs:?} with kernel {ws:?}")));
        }
        let (d, h, wd) = spatial3(xs);
        let (kd, kh, kw) = spatial3(ws);
        if ws[1] != xs[1] || self.shape(b) != [ws[0]] || kd % 2 == 0 || kh % 2 == 0 || kw % 2 == 0 {
            return Err(self.shape_err("conv", format!("input {xs:?}, kernel {ws:?}, bias {:?}", self.shape(b))));
        }
        Ok(Geom {
            b: xs[0],
            ci: xs[1],
            co: ws[0],
            d,
            h,
            w: wd,
            kd,
            kh,
            kw,
        })
    }

    /// Same-padded, stride-1 convolution over 1, 2 or 3 spatial axes.
    pub fn conv(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let g = self.geom(x, w, b)?;
        let mut shape = self.shape(x).to_vec();
        shape[1] = g.co;
        let mut out = vec![T::zero(); shape.iter().product()];
        {
            let xv = self.value(x).data();
            let wv = self.value(w).data();
            let bv = self.value(b).data();
            let vol = g.d * g.h * g.w;
            for bi in 0..g.b {
                for o in 0..g.co {
                    let dst = &mut out[(bi * g.co + o) * vol..(bi * g.co + o + 1) * vol];
                    dst.iter_mut().for_each(|v| *v = bv[o]);
                    for c in 0..g.ci {
                        let src = &xv[(bi * g.ci + c) * vol..(bi * g.ci + c + 1) * vol];
                        let kern = &wv[(o * g.ci + c) * g.kd * g.kh * g.kw..][..g.kd * g.kh * g.kw];
                        conv_accumulate(&g, src, kern, dst);
                    }
                }
            }
        }
        let value = Tensor::from_vec(&shape, out).expect("shape computed above");
        Ok(self.push(value, Op::Conv { x, w, b }))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let v = self.value(x).map(|a| if a > T::zero() { a } else { T::zero() });
        self.push(v, Op::Relu(x))
    }

    /// 2× average pooling over every spatial axis; extents must be even.
    pub fn avg_pool2(&mut self, x: Var) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        if !(3..=5).contains(&xs.len()) || xs[2..].iter().any(|e| e % 2 != 0) {
            return Err(self.shape_err("avg_pool2", format!("input {xs:?}")));
        }
        let mut os = xs.clone();
        for e in &mut os[2..] {
            *e /= 2;
        }
        let k = T::lit(1.0 / (1usize << (xs.len() - 2)) as f64);
        let mut out = vec![T::zero(); os.iter().product()];
        let xv = self.value(x).data();
        for_each_pool(&xs, |src, dst| out[dst] = out[dst] + xv[src] * k);
        let value = Tensor::from_vec(&os, out).expect("pooled shape");
        Ok(self.push(value, Op::AvgPool2(x)))
    }

    /// Global average pool: `[B, C, ...] → [B, C]`.
    pub fn gap(&mut self, x: Var) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        if xs.len() < 3 {
            return Err(self.shape_err("gap", format!("input {xs:?}")));
        }
        let vol: usize = xs[2..].iter().product();
        let k = T::one() / T::lit(vol as f64);
        let out: Vec<T> = self
            .value(x)
            .data()
            .chunks(vol)
            .map(|c| c.iter().copied().sum::<T>() * k)
            .collect();
        let value = Tensor::from_vec(&xs[..2], out).expect("gap shape");
        Ok(self.push(value, Op::Gap(x)))
    }

    /// `y = x·Wᵀ + b` with `x: [B, I]`, `W: [O, I]`, `b: [O]`.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (xs, ws, bs) = (self.shape(x), self.shape(w), self.shape(b));
        if xs.len() != 2 || ws.len() != 2 || ws[1] != xs[1] || bs != [ws[0]] {
            return Err(self.shape_err("linear", format!("x {xs:?}, w {ws:?}, b {bs:?}")));
        }
        let (bn, i, o) = (xs[0], xs[1], ws[0]);
        let (xv, wv, bv) = (self.value(x).data(), self.value(w).data(), self.value(b).data());
        let mut out = vec![T::zero(); bn * o];
        for r in 0..bn {
            for c in 0..o {
                out[r * o + c] = bv[c] + (0..i).map(|k| xv[r * i + k] * wv[c * i + k]).sum::<T>();
            }
        }
        let value = Tensor::from_vec(&[bn, o], out).expect("linear shape");
        Ok(self.push(value, Op::Linear { x, w, b }))
    }

    /// Mean softmax cross-entropy of `[B, K]` logits against class labels.
    pub fn softmax_ce(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let ls = self.shape(logits).to_vec();
        if ls.len() != 2 || ls[0] != labels.len() || labels.iter().any(|&l| l >= ls[1]) {
            return Err(self.shape_err("softmax_ce", format!("logits {ls:?} with {} labels", labels.len())));
        }
        let (bn, k) = (ls[0], ls[1]);
        let lv = self.value(logits).data();
        let mut probs = vec![T::zero(); bn * k];
        let mut loss = T::zero();
        for r in 0..bn {
            let row = &lv[r * k..(r + 1) * k];
            let m = row.iter().copied().fold(T::neg_infinity(), T::max);
            let z: T = row.iter().map(|&v| (v - m).exp()).sum();
            for c in 0..k {
                probs[r * k + c] = (row[c] - m).exp() / z;
            }
            loss = loss - (row[labels[r]] - m - z.ln());
        }
        let loss = loss / T::lit(bn as f64);
        let probs = Tensor::from_vec(&ls, probs).expect("probs shape");
        Ok(self.push(
            Tensor::from_vec(&[1], vec![loss]).expect("scalar"),
            Op::SoftmaxCe {
                logits,
                labels: labels.to_vec(),
                probs,
            },
        ))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).zip_map(self.value(b), |x, y| x * y)?;
        Ok(self.push(v, Op::Mul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).zip_map(self.value(b), |x, y| x + y)?;
        Ok(self.push(v, Op::Add(a, b)))
    }

    pub fn scale(&mut self, a: Var, k: T) -> Var {
        let v = self.value(a).scale(k);
        self.push(v, Op::Scale(a, k))
    }

    /// Sum of all elements, shape `[1]`.
    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).sum();
        self.push(Tensor::from_vec(&[1], vec![s]).expect("scalar"), Op::Sum(a))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let v = self.value(a).clone().reshape(shape)?;
        Ok(self.push(v, Op::Reshape(a)))
    }

    /// Collapses the depth axis of `[B, C, D, H, W]`. `w` (shape `[D]`) is
    /// required for [`DepthReduce::Conv`] and ignored otherwise.
    pub fn reduce_depth(&mut self, x: Var, mode: DepthReduce, w: Option<Var>) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        if xs.len() != 5 {
            return Err(self.shape_err("reduce_depth", format!("input {xs:?}")));
        }
        let (outer, d, plane) = (xs[0] * xs[1], xs[2], xs[3] * xs[4]);
        let w = match (mode, w) {
            (DepthReduce::Conv, Some(w)) if self.shape(w) == [d] => Some(w),
            (DepthReduce::Conv, _) => {
                return Err(self.shape_err("reduce_depth", format!("conv mode needs a [{d}] kernel")))
            }
            _ => None,
        };
        let xv = self.value(x).data();
        let mut out = vec![T::zero(); outer * plane];
        let mut argmax = Vec::new();
        match mode {
            DepthReduce::Avg => {
                let k = T::one() / T::lit(d as f64);
                for o in 0..outer {
                    for z in 0..d {
                        for p in 0..plane {
                            out[o * plane + p] = out[o * plane + p] + xv[(o * d + z) * plane + p] * k;
                        }
                    }
                }
            }
            DepthReduce::Max => {
                argmax = vec![0; outer * plane];
                for o in 0..outer {
                    for p in 0..plane {
                        let mut best = 0;
                        for z in 1..d {
                            if xv[(o * d + z) * plane + p] > xv[(o * d + best) * plane + p] {
                                best = z;
                            }
                        }
                        argmax[o * plane + p] = best;
                        out[o * plane + p] = xv[(o * d + best) * plane + p];
                    }
                }
            }
            DepthReduce::Conv => {
                let wv = self.value(w.expect("checked")).data();
                for o in 0..outer {
                    for z in 0..d {
                        for p in 0..plane {
                            out[o * plane + p] = out[o * plane + p] + xv[(o * d + z) * plane + p] * wv[z];
                        }
                    }
                }
            }
        }
        let value = Tensor::from_vec(&[xs[0], xs[1], xs[3], xs[4]], out).expect("reduced shape");
        Ok(self.push(value, Op::ReduceDepth { x, mode, w, argmax }))
    }

    /// Records a scalar op evaluated outside the tape: `grads[i]` is the
    /// derivative of `value` with respect to `inputs[i]`.
    pub fn custom(&mut self, value: T, inputs: &[Var], grads: Vec<Tensor<T>>) -> Result<Var> {
        if inputs.len() != grads.len() {
            return Err(self.shape_err("custom", format!("{} inputs, {} gradients", inputs.len(), grads.len())));
        }
        for (&v, g) in inputs.iter().zip(&grads) {
            if self.shape(v) != g.shape() {
                return Err(self.shape_err("custom", format!("gradient {:?} for input {:?}", g.shape(), self.shape(v))));
            }
        }
        Ok(self.push(
            Tensor::from_vec(&[1], vec![value]).expect("scalar"),
            Op::Custom {
                inputs: inputs.to_vec(),
                grads,
            },
        ))
    }

    /// Backward pass from a scalar output.
    pub fn backward(&self, out: Var) -> Result<Grads<T>> {
        if self.value(out).len() != 1 {
            return Err(self.shape_err("backward", format!("non-scalar output {:?}", self.shape(out))));
        }
        self.backward_from(out, Tensor::filled(self.shape(out), T::one()), 0)
    }

    /// Backward pass seeded with `seed` at `out`, skipping nodes below `floor`
    /// (their gradients are left unset).
    pub fn backward_from(&self, out: Var, seed: Tensor<T>, floor: usize) -> Result<Grads<T>> {
        if seed.shape() != self.shape(out) {
            return Err(self.shape_err("backward", format!("seed {:?} for output {:?}", seed.shape(), self.shape(out))));
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[out.0] = Some(seed);
        for i in (floor..=out.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.node_backward(i, &g, &mut grads, floor);
            grads[i] = Some(g);
        }
        if grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(HarnessError::NonFinite("gradient".into()));
        }
        Ok(Grads { grads })
    }

    fn node_backward(&self, i: usize, g: &Tensor<T>, grads: &mut [Option<Tensor<T>>], floor: usize) {
        let mut acc = |v: Var, d: Tensor<T>| {
            if v.0 < floor {
                return;
            }
            match &mut grads[v.0] {
                Some(e) => e.add_scaled(&d, T::one()).expect("gradient shape"),
                slot => *slot = Some(d),
            }
        };
        let gd = g.data();
        match &self.nodes[i].op {
            Op::Leaf => {}
            Op::Conv { x, w, b } => {
                let geo = self.geom(*x, *w, *b).expect("validated on record");
                let xv = self.value(*x).data();
                let wv = self.value(*w).data();
                let vol = geo.d * geo.h * geo.w;
                let ksz = geo.kd * geo.kh * geo.kw;
                let mut dx = vec![T::zero(); xv.len()];
                let mut dw = vec![T::zero(); wv.len()];
                let mut db = vec![T::zero(); geo.co];
                for bi in 0..geo.b {
                    for o in 0..geo.co {
                        let go = &gd[(bi * geo.co + o) * vol..(bi * geo.co + o + 1) * vol];
                        db[o] = db[o] + go.iter().copied().sum::<T>();
                        for c in 0..geo.ci {
                            let xs = &xv[(bi * geo.ci + c) * vol..(bi * geo.ci + c + 1) * vol];
                            let base = (o * geo.ci + c) * ksz;
                            conv_backward(
                                &geo,
                                xs,
                                &wv[base..base + ksz],
                                go,
                                &mut dx[(bi * geo.ci + c) * vol..(bi * geo.ci + c + 1) * vol],
                                &mut dw[base..base + ksz],
                            );
                        }
                    }
                }
                acc(*x, Tensor::from_vec(self.shape(*x), dx).expect("shape"));
                acc(*w, Tensor::from_vec(self.shape(*w), dw).expect("shape"));
                acc(*b, Tensor::from_vec(self.shape(*b), db).expect("shape"));
            }
            Op::Relu(x) => {
                let d = g.zip_map(self.value(*x), |gv, xv| if xv > T::zero() { gv } else { T::zero() });
                acc(*x, d.expect("shape"));
            }
            Op::AvgPool2(x) => {
                let xs = self.shape(*x).to_vec();
                let k = T::lit(1.0 / (1usize << (xs.len() - 2)) as f64);
                let mut dx = vec![T::zero(); xs.iter().product()];
                for_each_pool(&xs, |src, dst| dx[src] = gd[dst] * k);
                acc(*x, Tensor::from_vec(&xs, dx).expect("shape"));
            }
            Op::Gap(x) => {
                let xs = self.shape(*x).to_vec();
                let vol: usize = xs[2..].iter().product();
                let k = T::one() / T::lit(vol as f64);
                let dx = (0..xs.iter().product::<usize>()).map(|j| gd[j / vol] * k).collect();
                acc(*x, Tensor::from_vec(&xs, dx).expect("shape"));
            }
            Op::Linear { x, w, b } => {
                let (xs, ws) = (self.shape(*x).to_vec(), self.shape(*w).to_vec());
                let (bn, ni, no) = (xs[0], xs[1], ws[0]);
                let (xv, wv) = (self.value(*x).data(), self.value(*w).data());
                let mut dx = vec![T::zero(); bn * ni];
                let mut dw = vec![T::zero(); no * ni];
                let mut db = vec![T::zero(); no];
                for r in 0..bn {
                    for c in 0..no {
                        let gv = gd[r * no + c];
                        db[c] = db[c] + gv;
                        for k in 0..ni {
                            dx[r * ni + k] = dx[r * ni + k] + gv * wv[c * ni + k];
                            dw[c * ni + k] = dw[c * ni + k] + gv * xv[r * ni + k];
                        }
                    }
                }
                acc(*x, Tensor::from_vec(&xs, dx).expect("shape"));
                acc(*w, Tensor::from_vec(&ws, dw).expect("shape"));
                acc(*b, Tensor::from_vec(&[no], db).expect("shape"));
            }
            Op::SoftmaxCe { logits, labels, probs } => {
                let k = probs.shape()[1];
                let scale = gd[0] / T::lit(labels.len() as f64);
                let mut d = probs.data().to_vec();
                for (r, &l) in labels.iter().enumerate() {
                    d[r * k + l] = d[r * k + l] - T::one();
                }
                d.iter_mut().for_each(|v| *v = *v * scale);
                acc(*logits, Tensor::from_vec(probs.shape(), d).expect("shape"));
            }
            Op::Mul(a, b) => {
                acc(*a, g.zip_map(self.value(*b), |x, y| x * y).expect("shape"));
                acc(*b, g.zip_map(self.value(*a), |x, y| x * y).expect("shape"));
            }
            Op::Add(a, b) => {
                acc(*a, g.clone());
                acc(*b, g.clone());
            }
            Op::Scale(a, k) => acc(*a, g.scale(*k)),
            Op::Sum(a) => acc(*a, Tensor::filled(self.shape(*a), gd[0])),
            Op::Reshape(a) => acc(*a, g.clone().reshape(self.shape(*a)).expect("same length")),
            Op::ReduceDepth { x, mode, w, argmax } => {
                let xs = self.shape(*x).to_vec();
                let (outer, d, plane) = (xs[0] * xs[1], xs[2], xs[3] * xs[4]);
                let mut dx = vec![T::zero(); xs.iter().product()];
                match mode {
                    DepthReduce::Avg => {
                        let k = T::one() / T::lit(d as f64);
                        for o in 0..outer {
                            for z in 0..d {
                                for p in 0..plane {
                                    dx[(o * d + z) * plane + p] = gd[o * plane + p] * k;
                                }
                            }
                        }
                    }
                    DepthReduce::Max => {
                        for o in 0..outer {
                            for p in 0..plane {
                                dx[(o * d + argmax[o * plane + p]) * plane + p] = gd[o * plane + p];
                            }
                        }
                    }
                    DepthReduce::Conv => {
                        let wv_var = w.expect("conv kernel");
                        let wv = self.value(wv_var).data();
                        let xv = self.value(*x).data();
                        let mut dw = vec![T::zero(); d];
                        for o in 0..outer {
                            for z in 0..d {
                                for p in 0..plane {
                                    let gv = gd[o * plane + p];
                                    dx[(o * d + z) * plane + p] = gv * wv[z];
                                    dw[z] = dw[z] + gv * xv[(o * d + z) * plane + p];
                                }
                            }
                        }
                        acc(wv_var, Tensor::from_vec(&[d], dw).expect("shape"));
                    }
                }
                acc(*x, Tensor::from_vec(&xs, dx).expect("shape"));
            }
            Op::Custom { inputs, grads: local } => {
                for (&v, lg) in inputs.iter().zip(local) {
                    acc(v, lg.scale(gd[0]));
                }
            }
        }
    }
}

/// Visits `(input offset, pooled offset)` for 2× pooling over the spatial axes.
fn for_each_pool(xs: &[usize], mut f: impl FnMut(usize, usize)) {
    let (d, h, w) = spatial3(xs);
    let pd = if xs.len() == 5 { 2 } else { 1 };
    let ph = if xs.len() >= 4 { 2 } else { 1 };
    let (od, oh, ow) = (d / pd, h / ph, w / 2);
    for bc in 0..xs[0] * xs[1] {
        for z in 0..d {
            for y in 0..h {
                for x in 0..w {
                    let src = ((bc * d + z) * h + y) * w + x;
                    let dst = ((bc * od + z / pd) * oh + y / ph) * ow + x / 2;
                    f(src, dst);
                }
            }
        }
    }
}

/// Valid output range along one axis for kernel tap `k` with half-width `r`.
#[inline]
fn tap_range(k: usize, r: usize, n: usize) -> (usize, usize) {
    // Output o reads input o + k - r.
    let lo = r.saturating_sub(k);
    let hi = (n + r).saturating_sub(k).min(n);
    (lo, hi.max(lo))
}

fn conv_accumulate<T: Scalar>(g: &Geom, src: &[T], kern: &[T], dst: &mut [T]) {
    let (rd, rh, rw) = (g.kd / 2, g.kh / 2, g.kw / 2);
    for a in 0..g.kd {
        let (z0, z1) = tap_range(a, rd, g.d);
        for bb in 0..g.kh {
            let (y0, y1) = tap_range(bb, rh, g.h);
            for c in 0..g.kw {
                let (x0, x1) = tap_range(c, rw, g.w);
                let wv = kern[(a * g.kh + bb) * g.kw + c];
                for z in z0..z1 {
                    let zi = z + a - rd;
                    for y in y0..y1 {
                        let yi = y + bb - rh;
                        let o = (z * g.h + y) * g.w;
                        let s = (zi * g.h + yi) * g.w + c;
                        let (drow, srow) = (&mut dst[o + x0..o + x1], &src[s + x0 - rw..s + x1 - rw]);
                        for (dv, &sv) in drow.iter_mut().zip(srow) {
                            *dv = *dv + wv * sv;
                        }
                    }
                }
            }
        }
    }
}

fn conv_backward<T: Scalar>(g: &Geom, src: &[T], kern: &[T], go: &[T], dsrc: &mut [T], dkern: &mut [T]) {
    let (rd, rh, rw) = (g.kd / 2, g.kh / 2, g.kw / 2);
    for a in 0..g.kd {
        let (z0, z1) = tap_range(a, rd, g.d);
        for bb in 0..g.kh {
            let (y0, y1) = tap_range(bb, rh, g.h);
            for c in 0..g.kw {
                let (x0, x1) = tap_range(c, rw, g.w);
                let ki = (a * g.kh + bb) * g.kw + c;
                let wv = kern[ki];
                let mut dwv = T::zero();
                for z in z0..z1 {
                    let zi = z + a - rd;
                    for y in y0..y1 {
                        let yi = y + bb - rh;
                        let o = (z * g.h + y) * g.w;
                        let s = (zi * g.h + yi) * g.w + c;
                        let grow = &go[o + x0..o + x1];
                        let srow = &src[s + x0 - rw..s + x1 - rw];
                        for (&gv, &sv) in grow.iter().zip(srow) {
                            dwv = dwv + gv * sv;
                        }
                        for (dv, &gv) in dsrc[s + x0 - rw..s + x1 - rw].iter_mut().zip(grow) {
                            *dv = *dv + gv * wv;
                        }
                    }
                }
                dkern[ki] = dkern[ki] + dwv;
            }
        }
    }
}
