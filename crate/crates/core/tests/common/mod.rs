#![allow(dead_code)]

use dmk_core::autodiff::{grad_check, AutodiffError, Graph, Tensor, Var};
use dmk_core::rng::XorShift64Star;

pub const EPS: f64 = 1e-5;
pub const KINK: f64 = 1e-3;

fn random_tensor(rng: &mut XorShift64Star, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap()
}

/// Random tensor with every entry at least `KINK` away from zero.
fn away_from_zero(rng: &mut XorShift64Star, shape: &[usize]) -> Tensor {
    loop {
        let t = random_tensor(rng, shape);
        if t.data().iter().all(|v| v.abs() >= KINK) {
            return t;
        }
    }
}

/// True if some pooling window has its two largest entries within `KINK`.
fn pool_has_tie(t: &Tensor, window: usize, stride: usize) -> bool {
    let s = t.shape();
    let (h, w) = (s[2], s[3]);
    let (oh, ow) = ((h - window) / stride + 1, (w - window) / stride + 1);
    for plane in t.data().chunks_exact(h * w) {
        for r in 0..oh {
            for c in 0..ow {
                let mut vals: Vec<f64> = (0..window * window)
                    .map(|k| plane[(r * stride + k / window) * w + c * stride + k % window])
                    .collect();
                vals.sort_by(|a, b| b.total_cmp(a));
                if vals[0] - vals[1] < KINK {
                    return true;
                }
            }
        }
    }
    false
}

type OpFn = Box<dyn Fn(&mut Graph, &[Var]) -> Result<Var, AutodiffError>>;

/// One random instance of an op: inputs and the closure applying it.
fn case(op: &str, rng: &mut XorShift64Star) -> (Vec<Tensor>, OpFn) {
    let mut dim = |lo: u32, hi: u32| rng.range_inclusive(lo, hi) as usize;
    match op {
        "conv2d" => {
            let (n, c, f, kh, kw) = (dim(1, 2), dim(1, 3), dim(1, 3), dim(1, 3), dim(1, 3));
            let (stride, pad) = (dim(1, 2), dim(0, 2));
            let (h, w) = (dim(kh as u32, 6), dim(kw as u32, 6));
            let x = random_tensor(rng, &[n, c, h, w]);
            let k = random_tensor(rng, &[f, c, kh, kw]);
            let b = random_tensor(rng, &[f]);
            (vec![x, k, b], Box::new(move |g, v| g.conv2d(v[0], v[1], Some(v[2]), stride, pad)))
        }
        "maxpool2d" => {
            let (window, stride) = (dim(1, 3), dim(1, 3));
            let shape = [dim(1, 2), dim(1, 2), dim(window as u32, 7), dim(window as u32, 7)];
            let x = loop {
                let t = random_tensor(rng, &shape);
                if window == 1 || !pool_has_tie(&t, window, stride) {
                    break t;
                }
            };
            (vec![x], Box::new(move |g, v| g.maxpool2d(v[0], window, stride)))
        }
        "relu" => {
            let shape = [dim(1, 3), dim(1, 10)];
            (vec![away_from_zero(rng, &shape)], Box::new(|g, v| g.relu(v[0])))
        }
        "linear" => {
            let (n, d, m) = (dim(1, 4), dim(1, 6), dim(1, 5));
            let ts = vec![random_tensor(rng, &[n, d]), random_tensor(rng, &[d, m]), random_tensor(rng, &[m])];
            (ts, Box::new(|g, v| g.linear(v[0], v[1], v[2])))
        }
        "flatten" => {
            let shape = [dim(1, 3), dim(1, 3), dim(1, 3), dim(1, 3)];
            (vec![random_tensor(rng, &shape)], Box::new(|g, v| g.flatten(v[0])))
        }
        "concat" => {
            let rank = dim(1, 3);
            let axis = dim(0, rank as u32 - 1);
            let base: Vec<usize> = (0..rank).map(|_| dim(1, 3)).collect();
            let parts = dim(1, 3);
            let sizes: Vec<usize> = (0..parts).map(|_| dim(1, 4)).collect();
            let ts = sizes
                .iter()
                .map(|n| {
                    let mut s = base.clone();
                    s[axis] = *n;
                    random_tensor(rng, &s)
                })
                .collect();
            (ts, Box::new(move |g, v| g.concat(v, axis)))
        }
        "add" => {
            let shape = [dim(1, 3), dim(1, 5)];
            let ts = vec![random_tensor(rng, &shape), random_tensor(rng, &shape)];
            (ts, Box::new(|g, v| g.add(v[0], v[1])))
        }
        "upsample_nearest" => {
            let factor = dim(1, 3);
            let shape = [dim(1, 2), dim(1, 2), dim(1, 3), dim(1, 3)];
            (vec![random_tensor(rng, &shape)], Box::new(move |g, v| g.upsample_nearest(v[0], factor)))
        }
        "softmax_cross_entropy" => {
            let (n, k) = (dim(1, 5), dim(2, 6));
            let labels: Vec<usize> = (0..n).map(|_| dim(0, k as u32 - 1)).collect();
            let z = random_tensor(rng, &[n, k]);
            (vec![z], Box::new(move |g, v| g.softmax_cross_entropy(v[0], &labels)))
        }
        "pixel_softmax_cross_entropy" => {
            let (n, k, h, w) = (dim(1, 2), dim(2, 5), dim(1, 4), dim(1, 4));
            let labels: Vec<usize> = (0..n * h * w).map(|_| dim(0, k as u32 - 1)).collect();
            let z = random_tensor(rng, &[n, k, h, w]);
            (vec![z], Box::new(move |g, v| g.pixel_softmax_cross_entropy(v[0], &labels)))
        }
        "weighted_sum" => {
            let n = dim(1, 12);
            let w: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
            (vec![random_tensor(rng, &[n])], Box::new(move |g, v| g.weighted_sum(v[0], &w)))
        }
        other => panic!("no grad-check case for {other}"),
    }
}

pub const OPS: &[&str] = &[
    "conv2d",
    "maxpool2d",
    "relu",
    "linear",
    "flatten",
    "concat",
    "add",
    "upsample_nearest",
    "softmax_cross_entropy",
    "pixel_softmax_cross_entropy",
    "weighted_sum",
];

/// Worst relative error of `op` over `trials` random instances.
pub fn op_grad_error(op: &str, trials: usize, seed: u64) -> f64 {
    let mut rng = XorShift64Star::substream(seed, op);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let (inputs, f) = case(op, &mut rng);
        let e = grad_check(&inputs, EPS, seed.wrapping_add(t as u64), |g, v| f(g, v)).unwrap();
        worst = worst.max(e);
    }
    worst
}
