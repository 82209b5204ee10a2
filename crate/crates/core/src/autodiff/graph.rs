use super::{AutodiffError, Tensor};

/// Handle to a node on a [`Graph`]. Only meaningful for the graph that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    Conv2d { input: Var, kernel: Var, bias: Option<Var>, stride: usize, pad: usize },
    MaxPool2d { input: Var, argmax: Vec<usize> },
    Relu { input: Var },
    Linear { input: Var, weight: Var, bias: Var },
    Flatten { input: Var },
    Concat { inputs: Vec<Var>, axis: usize },
    Add { a: Var, b: Var },
    UpsampleNearest { input: Var, factor: usize },
    SoftmaxCrossEntropy { logits: Var, labels: Vec<usize>, probs: Vec<f64> },
    PixelSoftmaxCrossEntropy { logits: Var, labels: Vec<usize>, probs: Vec<f64> },
    WeightedSum { input: Var, weights: Vec<f64> },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    grad: Option<Vec<f64>>,
    op: Op,
}

/// Operation tape. Execution order is the topological order.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

fn shape_err(msg: String) -> AutodiffError {
    AutodiffError::Shape(msg)
}

/// Output positions `o` in `[lo, hi)` for which `o*stride + offset - pad` lands inside `[0, len)`.
fn valid_range(offset: usize, pad: usize, stride: usize, len: usize, out_len: usize) -> (usize, usize) {
    let lo = if pad > offset { (pad - offset).div_ceil(stride) } else { 0 };
    let hi = if len + pad > offset { ((len + pad - offset - 1) / stride + 1).min(out_len) } else { 0 };
    (lo, hi.max(lo))
}

fn add_into(dst: &mut Option<Vec<f64>>, len: usize) -> &mut Vec<f64> {
    dst.get_or_insert_with(|| vec![0.0; len])
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, name: &'static str) -> Result<Var, AutodiffError> {
        if !value.is_finite() {
            return Err(AutodiffError::NonFinite(name));
        }
        self.nodes.push(Node { value, grad: None, op });
        Ok(Var(self.nodes.len() - 1))
    }

    /// Records a leaf (input or parameter).
    pub fn input(&mut self, value: Tensor) -> Result<Var, AutodiffError> {
        self.push(value, Op::Leaf, "input")
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Accumulated gradient of the last loss(es) w.r.t. `v`; `None` if `v` never received one.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.nodes[v.0].grad.as_deref()
    }

    pub fn zero_grad(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn expect_rank(&self, v: Var, rank: usize, what: &str) -> Result<(), AutodiffError> {
        if self.shape(v).len() != rank {
            return Err(shape_err(format!("{what} expects rank {rank}, got {:?}", self.shape(v))));
        }
        Ok(())
    }

    /// Cross-correlation with zero padding. `input` N×C×H×W, `kernel` F×C×kh×kw, `bias` F.
    pub fn conv2d(
        &mut self,
        input: Var,
        kernel: Var,
        bias: Option<Var>,
        stride: usize,
        pad: usize,
    ) -> Result<Var, AutodiffError> {
        self.expect_rank(input, 4, "conv2d input")?;
        self.expect_rank(kernel, 4, "conv2d kernel")?;
        let (n, c, h, w) = dims4(self.shape(input));
        let (f, kc, kh, kw) = dims4(self.shape(kernel));
        if kc != c {
            return Err(shape_err(format!("conv2d: input has {c} channels, kernel expects {kc}")));
        }
        if let Some(b) = bias {
            if self.shape(b) != [f] {
                return Err(shape_err(format!("conv2d bias shape {:?}, expected [{f}]", self.shape(b))));
            }
        }
        if stride == 0 || h + 2 * pad < kh || w + 2 * pad < kw {
            return Err(shape_err(format!("conv2d: kernel {kh}x{kw} stride {stride} does not fit {h}x{w} pad {pad}")));
        }
        let oh = (h + 2 * pad - kh) / stride + 1;
        let ow = (w + 2 * pad - kw) / stride + 1;
        let x = self.value(input).data();
        let k = self.value(kernel).data();
        let mut out = vec![0.0; n * f * oh * ow];
        for ni in 0..n {
            for fi in 0..f {
                let plane = &mut out[(ni * f + fi) * oh * ow..][..oh * ow];
                if let Some(b) = bias {
                    plane.fill(self.nodes[b.0].value.data()[fi]);
                }
                for ci in 0..c {
                    let xin = &x[(ni * c + ci) * h * w..][..h * w];
                    for ki in 0..kh {
                        let (r0, r1) = valid_range(ki, pad, stride, h, oh);
                        for kj in 0..kw {
                            let wv = k[((fi * c + ci) * kh + ki) * kw + kj];
                            let (c0, c1) = valid_range(kj, pad, stride, w, ow);
                            for orow in r0..r1 {
                                let irow = orow * stride + ki - pad;
                                let src = &xin[irow * w..][..w];
                                let dst = &mut plane[orow * ow..][..ow];
                                for ocol in c0..c1 {
                                    dst[ocol] += wv * src[ocol * stride + kj - pad];
                                }
                            }
                        }
                    }
                }
            }
        }
        let value = Tensor::new(vec![n, f, oh, ow], out)?;
        self.push(value, Op::Conv2d { input, kernel, bias, stride, pad }, "conv2d")
    }

    /// Max over `window`×`window` patches. Ties go to the first position in row-major order.
    pub fn maxpool2d(&mut self, input: Var, window: usize, stride: usize) -> Result<Var, AutodiffError> {
        self.expect_rank(input, 4, "maxpool2d input")?;
        let (n, c, h, w) = dims4(self.shape(input));
        if window == 0 || stride == 0 || h < window || w < window {
            return Err(shape_err(format!("maxpool2d: window {window} stride {stride} does not fit {h}x{w}")));
        }
        let oh = (h - window) / stride + 1;
        let ow = (w - window) / stride + 1;
        let x = self.value(input).data();
        let mut out = Vec::with_capacity(n * c * oh * ow);
        let mut argmax = Vec::with_capacity(n * c * oh * ow);
        for plane in 0..n * c {
            let base = plane * h * w;
            for orow in 0..oh {
                for ocol in 0..ow {
                    let mut best = base + orow * stride * w + ocol * stride;
                    for di in 0..window {
                        for dj in 0..window {
                            let idx = base + (orow * stride + di) * w + ocol * stride + dj;
                            if x[idx] > x[best] {
                                best = idx;
                            }
                        }
                    }
                    out.push(x[best]);
                    argmax.push(best);
                }
            }
        }
        let value = Tensor::new(vec![n, c, oh, ow], out)?;
        self.push(value, Op::MaxPool2d { input, argmax }, "maxpool2d")
    }

    pub fn relu(&mut self, input: Var) -> Result<Var, AutodiffError> {
        let t = self.value(input);
        let value = Tensor::new(t.shape().to_vec(), t.data().iter().map(|v| v.max(0.0)).collect())?;
        self.push(value, Op::Relu { input }, "relu")
    }

    /// `input` N×D times `weight` D×M plus `bias` M.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var, AutodiffError> {
        self.expect_rank(input, 2, "linear input")?;
        self.expect_rank(weight, 2, "linear weight")?;
        let (n, d) = (self.shape(input)[0], self.shape(input)[1]);
        let (wd, m) = (self.shape(weight)[0], self.shape(weight)[1]);
        if wd != d || self.shape(bias) != [m] {
            return Err(shape_err(format!(
                "linear: input {:?}, weight {:?}, bias {:?}",
                self.shape(input),
                self.shape(weight),
                self.shape(bias)
            )));
        }
        let x = self.value(input).data();
        let wt = self.value(weight).data();
        let b = self.value(bias).data();
        let mut out = Vec::with_capacity(n * m);
        for ni in 0..n {
            out.extend_from_slice(b);
            let row = &mut out[ni * m..];
            for (di, xv) in x[ni * d..(ni + 1) * d].iter().enumerate() {
                for (o, wv) in row.iter_mut().zip(&wt[di * m..(di + 1) * m]) {
                    *o += xv * wv;
                }
            }
        }
        let value = Tensor::new(vec![n, m], out)?;
        self.push(value, Op::Linear { input, weight, bias }, "linear")
    }

    /// Collapses every axis after the first.
    pub fn flatten(&mut self, input: Var) -> Result<Var, AutodiffError> {
        let t = self.value(input);
        let n = t.shape()[0];
        let value = t.clone().reshape(vec![n, t.numel() / n])?;
        self.push(value, Op::Flatten { input }, "flatten")
    }

    /// Joins tensors along `axis`; every other dimension must agree.
    pub fn concat(&mut self, inputs: &[Var], axis: usize) -> Result<Var, AutodiffError> {
        let Some(first) = inputs.first() else {
            return Err(shape_err("concat of zero tensors".into()));
        };
        let base = self.shape(*first).to_vec();
        if axis >= base.len() {
            return Err(shape_err(format!("concat axis {axis} out of range for {base:?}")));
        }
        let mut total = 0;
        for v in inputs {
            let s = self.shape(*v);
            let agree = s.len() == base.len() && s.iter().zip(&base).enumerate().all(|(i, (a, b))| i == axis || a == b);
            if !agree {
                return Err(shape_err(format!("concat: {s:?} incompatible with {base:?} on axis {axis}")));
            }
            total += s[axis];
        }
        let outer: usize = base[..axis].iter().product();
        let inner: usize = base[axis + 1..].iter().product();
        let mut out = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for v in inputs {
                let block = self.shape(*v)[axis] * inner;
                out.extend_from_slice(&self.value(*v).data()[o * block..][..block]);
            }
        }
        let mut shape = base;
        shape[axis] = total;
        let value = Tensor::new(shape, out)?;
        self.push(value, Op::Concat { inputs: inputs.to_vec(), axis }, "concat")
    }

    /// Elementwise sum of equal-shape tensors.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        if self.shape(a) != self.shape(b) {
            return Err(shape_err(format!("add: {:?} vs {:?}", self.shape(a), self.shape(b))));
        }
        let (x, y) = (self.value(a), self.value(b));
        let value = Tensor::new(x.shape().to_vec(), x.data().iter().zip(y.data()).map(|(p, q)| p + q).collect())?;
        self.push(value, Op::Add { a, b }, "add")
    }

    /// Repeats every pixel of an N×C×H×W tensor into a `factor`×`factor` block.
    pub fn upsample_nearest(&mut self, input: Var, factor: usize) -> Result<Var, AutodiffError> {
        self.expect_rank(input, 4, "upsample input")?;
        if factor == 0 {
            return Err(shape_err("upsample factor 0".into()));
        }
        let (n, c, h, w) = dims4(self.shape(input));
        let (oh, ow) = (h * factor, w * factor);
        let x = self.value(input).data();
        let mut out = Vec::with_capacity(n * c * oh * ow);
        for plane in 0..n * c {
            for orow in 0..oh {
                let src = &x[plane * h * w + (orow / factor) * w..][..w];
                out.extend((0..ow).map(|ocol| src[ocol / factor]));
            }
        }
        let value = Tensor::new(vec![n, c, oh, ow], out)?;
        self.push(value, Op::UpsampleNearest { input, factor }, "upsample_nearest")
    }

    /// Mean cross-entropy of softmax(`logits`) (N×K) against class indices.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var, AutodiffError> {
        self.expect_rank(logits, 2, "softmax_cross_entropy logits")?;
        let (n, k) = (self.shape(logits)[0], self.shape(logits)[1]);
        if labels.len() != n {
            return Err(shape_err(format!("{} labels for {n} rows", labels.len())));
        }
        let z = self.value(logits).data();
        let mut probs = vec![0.0; n * k];
        let mut loss = 0.0;
        for (i, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(AutodiffError::Label { label, classes: k });
            }
            loss += softmax_row(&z[i * k..(i + 1) * k], k, 1, &mut probs[i * k..(i + 1) * k], label);
        }
        let value = Tensor::scalar(loss / n as f64);
        self.push(value, Op::SoftmaxCrossEntropy { logits, labels: labels.to_vec(), probs }, "softmax_cross_entropy")
    }

    /// Mean per-pixel cross-entropy. `logits` N×K×H×W, `labels` N·H·W class indices in row-major order.
    pub fn pixel_softmax_cross_entropy(&mut self, logits: Var, labels: &[usize]) -> Result<Var, AutodiffError> {
        self.expect_rank(logits, 4, "pixel_softmax_cross_entropy logits")?;
        let (n, k, h, w) = dims4(self.shape(logits));
        let hw = h * w;
        if labels.len() != n * hw {
            return Err(shape_err(format!("{} labels for {} pixels", labels.len(), n * hw)));
        }
        let z = self.value(logits).data();
        let mut probs = vec![0.0; z.len()];
        let mut loss = 0.0;
        for ni in 0..n {
            let zs = &z[ni * k * hw..][..k * hw];
            let ps = &mut probs[ni * k * hw..][..k * hw];
            for p in 0..hw {
                let label = labels[ni * hw + p];
                if label >= k {
                    return Err(AutodiffError::Label { label, classes: k });
                }
                loss += softmax_row(&zs[p..], k, hw, &mut ps[p..], label);
            }
        }
        let value = Tensor::scalar(loss / (n * hw) as f64);
        self.push(
            value,
            Op::PixelSoftmaxCrossEntropy { logits, labels: labels.to_vec(), probs },
            "pixel_softmax_cross_entropy",
        )
    }

    /// `sum(input * weights)` for constant weights; reduces any tensor to a scalar.
    pub fn weighted_sum(&mut self, input: Var, weights: &[f64]) -> Result<Var, AutodiffError> {
        let x = self.value(input).data();
        if x.len() != weights.len() {
            return Err(shape_err(format!("weighted_sum: {} weights for {} values", weights.len(), x.len())));
        }
        let s = x.iter().zip(weights).map(|(a, b)| a * b).sum();
        self.push(Tensor::scalar(s), Op::WeightedSum { input, weights: weights.to_vec() }, "weighted_sum")
    }

    /// Adds d`loss`/d(node) into every contributing node's gradient buffer.
    pub fn backward(&mut self, loss: Var) -> Result<(), AutodiffError> {
        if self.value(loss).numel() != 1 {
            return Err(AutodiffError::NonScalarLoss(self.shape(loss).to_vec()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads);
            if g.iter().any(|v| !v.is_finite()) {
                return Err(AutodiffError::NonFinite("backward"));
            }
            let node = &mut self.nodes[i];
            match &mut node.grad {
                Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
                None => node.grad = Some(g),
            }
        }
        Ok(())
    }

    fn propagate(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let numel = |v: Var| self.nodes[v.0].value.numel();
        match &self.nodes[i].op {
            Op::Leaf => {}
            Op::Conv2d { input, kernel, bias, stride, pad } => {
                let (stride, pad) = (*stride, *pad);
                let (n, c, h, w) = dims4(self.shape(*input));
                let (f, _, kh, kw) = dims4(self.shape(*kernel));
                let (_, _, oh, ow) = dims4(self.nodes[i].value.shape());
                let x = self.value(*input).data();
                let k = self.value(*kernel).data();
                let mut dx = vec![0.0; x.len()];
                let mut dk = vec![0.0; k.len()];
                for ni in 0..n {
                    for fi in 0..f {
                        let gp = &g[(ni * f + fi) * oh * ow..][..oh * ow];
                        for ci in 0..c {
                            let xin = &x[(ni * c + ci) * h * w..][..h * w];
                            let dxin = &mut dx[(ni * c + ci) * h * w..][..h * w];
                            for ki in 0..kh {
                                let (r0, r1) = valid_range(ki, pad, stride, h, oh);
                                for kj in 0..kw {
                                    let kidx = ((fi * c + ci) * kh + ki) * kw + kj;
                                    let wv = k[kidx];
                                    let (c0, c1) = valid_range(kj, pad, stride, w, ow);
                                    let mut acc = 0.0;
                                    for orow in r0..r1 {
                                        let irow = orow * stride + ki - pad;
                                        for ocol in c0..c1 {
                                            let go = gp[orow * ow + ocol];
                                            let xi = irow * w + ocol * stride + kj - pad;
                                            acc += go * xin[xi];
                                            dxin[xi] += go * wv;
                                        }
                                    }
                                    dk[kidx] += acc;
                                }
                            }
                        }
                    }
                }
                accumulate(grads, *input, &dx);
                accumulate(grads, *kernel, &dk);
                if let Some(b) = bias {
                    let mut db = vec![0.0; f];
                    for ni in 0..n {
                        for (fi, d) in db.iter_mut().enumerate() {
                            *d += g[(ni * f + fi) * oh * ow..][..oh * ow].iter().sum::<f64>();
                        }
                    }
                    accumulate(grads, *b, &db);
                }
            }
            Op::MaxPool2d { input, argmax } => {
                let dst = add_into(&mut grads[input.0], numel(*input));
                for (gv, &idx) in g.iter().zip(argmax) {
                    dst[idx] += gv;
                }
            }
            Op::Relu { input } => {
                let x = self.value(*input).data();
                let dst = add_into(&mut grads[input.0], x.len());
                for ((d, gv), xv) in dst.iter_mut().zip(g).zip(x) {
                    if *xv > 0.0 {
                        *d += gv;
                    }
                }
            }
            Op::Linear { input, weight, bias } => {
                let (n, d) = (self.shape(*input)[0], self.shape(*input)[1]);
                let m = self.shape(*weight)[1];
                let x = self.value(*input).data();
                let wt = self.value(*weight).data();
                let mut dx = vec![0.0; n * d];
                let mut dw = vec![0.0; d * m];
                let mut db = vec![0.0; m];
                for ni in 0..n {
                    let gr = &g[ni * m..(ni + 1) * m];
                    for (a, b) in db.iter_mut().zip(gr) {
                        *a += b;
                    }
                    for di in 0..d {
                        let wr = &wt[di * m..(di + 1) * m];
                        dx[ni * d + di] = gr.iter().zip(wr).map(|(a, b)| a * b).sum();
                        let xv = x[ni * d + di];
                        for (dwv, gv) in dw[di * m..(di + 1) * m].iter_mut().zip(gr) {
                            *dwv += xv * gv;
                        }
                    }
                }
                accumulate(grads, *input, &dx);
                accumulate(grads, *weight, &dw);
                accumulate(grads, *bias, &db);
            }
            Op::Flatten { input } => accumulate(grads, *input, g),
            Op::Concat { inputs, axis } => {
                let shape = self.nodes[i].value.shape();
                let outer: usize = shape[..*axis].iter().product();
                let inner: usize = shape[axis + 1..].iter().product();
                let mut offset = 0;
                for o in 0..outer {
                    for v in inputs {
                        let block = self.shape(*v)[*axis] * inner;
                        let dst = add_into(&mut grads[v.0], numel(*v));
                        for (d, s) in dst[o * block..][..block].iter_mut().zip(&g[offset..offset + block]) {
                            *d += s;
                        }
                        offset += block;
                    }
                }
            }
            Op::Add { a, b } => {
                accumulate(grads, *a, g);
                accumulate(grads, *b, g);
            }
            Op::UpsampleNearest { input, factor } => {
                let (n, c, h, w) = dims4(self.shape(*input));
                let (oh, ow) = (h * factor, w * factor);
                let dst = add_into(&mut grads[input.0], n * c * h * w);
                for plane in 0..n * c {
                    for orow in 0..oh {
                        let src = &g[(plane * oh + orow) * ow..][..ow];
                        let row = &mut dst[plane * h * w + (orow / factor) * w..][..w];
                        for (ocol, gv) in src.iter().enumerate() {
                            row[ocol / factor] += gv;
                        }
                    }
                }
            }
            Op::SoftmaxCrossEntropy { logits, labels, probs } => {
                let k = self.shape(*logits)[1];
                let scale = g[0] / labels.len() as f64;
                let mut d: Vec<f64> = probs.iter().map(|p| p * scale).collect();
                for (row, &label) in labels.iter().enumerate() {
                    d[row * k + label] -= scale;
                }
                accumulate(grads, *logits, &d);
            }
            Op::PixelSoftmaxCrossEntropy { logits, labels, probs } => {
                let (_, k, h, w) = dims4(self.shape(*logits));
                let hw = h * w;
                let scale = g[0] / labels.len() as f64;
                let mut d: Vec<f64> = probs.iter().map(|p| p * scale).collect();
                for (pix, &label) in labels.iter().enumerate() {
                    let (ni, p) = (pix / hw, pix % hw);
                    d[(ni * k + label) * hw + p] -= scale;
                }
                accumulate(grads, *logits, &d);
            }
            Op::WeightedSum { input, weights } => {
                let dst = add_into(&mut grads[input.0], weights.len());
                for (d, wv) in dst.iter_mut().zip(weights) {
                    *d += g[0] * wv;
                }
            }
        }
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], v: Var, g: &[f64]) {
    let dst = add_into(&mut grads[v.0], g.len());
    for (d, s) in dst.iter_mut().zip(g) {
        *d += s;
    }
}

fn dims4(s: &[usize]) -> (usize, usize, usize, usize) {
    (s[0], s[1], s[2], s[3])
}

/// Softmax over `k` entries of `z` spaced `stride` apart, written into `probs` at the same
/// positions; returns `-log p[label]`.
fn softmax_row(z: &[f64], k: usize, stride: usize, probs: &mut [f64], label: usize) -> f64 {
    let at = |j: usize| z[j * stride];
    let max = (0..k).map(at).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = (0..k).map(|j| (at(j) - max).exp()).sum();
    let log_sum = sum.ln() + max;
    for j in 0..k {
        probs[j * stride] = (at(j) - log_sum).exp();
    }
    log_sum - at(label)
}
