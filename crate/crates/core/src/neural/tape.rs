//! Reverse-mode automatic differentiation over vectors.
//!
//! Every node holds a vector value. Parameters are never copied into the
//! tape as matrices: `MatVec` and `Row` refer to parameter tensors by id and
//! accumulate straight into a parameter-shaped gradient buffer.

use alloc::vec;
use alloc::vec::Vec;

use super::tensor::Params;

pub type NodeId = usize;

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param(usize),
    Row(usize, usize),
    MatVec(usize, NodeId),
    Add(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Tanh(NodeId),
    Sigmoid(NodeId),
    Concat(Vec<NodeId>),
    Slice(NodeId, usize),
    Softmax(NodeId),
    WeightedSum(NodeId, Vec<NodeId>),
    Mean(Vec<NodeId>),
    Nll(NodeId, usize),
    Sum(Vec<NodeId>),
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

pub struct Tape<'p> {
    params: &'p Params,
    nodes: Vec<Node>,
}

pub(crate) fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|v| libm::exp(v - max)).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

pub(crate) fn log_softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lz = max + libm::log(x.iter().map(|v| libm::exp(v - max)).sum::<f64>());
    x.iter().map(|v| v - lz).collect()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p Params) -> Self {
        Self { params, nodes: Vec::new() }
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        self.nodes.len() - 1
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id].value
    }

    pub fn input(&mut self, value: Vec<f64>) -> NodeId {
        self.push(value, Op::Input)
    }

    pub fn param(&mut self, pid: usize) -> NodeId {
        let v = self.params.get(pid).values.clone();
        self.push(v, Op::Param(pid))
    }

    pub fn row(&mut self, pid: usize, r: usize) -> NodeId {
        let v = self.params.get(pid).row(r).to_vec();
        self.push(v, Op::Row(pid, r))
    }

    pub fn matvec(&mut self, pid: usize, x: NodeId) -> NodeId {
        let w = self.params.get(pid);
        let (m, n) = (w.rows(), w.cols());
        let xv = &self.nodes[x].value;
        debug_assert_eq!(xv.len(), n, "matvec shape mismatch for {}", self.params.name(pid));
        let out = (0..m).map(|i| w.values[i * n..(i + 1) * n].iter().zip(xv).map(|(a, b)| a * b).sum()).collect();
        self.push(out, Op::MatVec(pid, x))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.nodes[a].value.iter().zip(&self.nodes[b].value).map(|(x, y)| x + y).collect();
        self.push(v, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.nodes[a].value.iter().zip(&self.nodes[b].value).map(|(x, y)| x * y).collect();
        self.push(v, Op::Mul(a, b))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let v = self.nodes[a].value.iter().map(|x| libm::tanh(*x)).collect();
        self.push(v, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let v = self.nodes[a].value.iter().map(|x| sigmoid(*x)).collect();
        self.push(v, Op::Sigmoid(a))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let v = parts.iter().flat_map(|p| self.nodes[*p].value.iter().copied()).collect();
        self.push(v, Op::Concat(parts.to_vec()))
    }

    pub fn slice(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let v = self.nodes[a].value[start..start + len].to_vec();
        self.push(v, Op::Slice(a, start))
    }

    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let v = softmax(&self.nodes[a].value);
        self.push(v, Op::Softmax(a))
    }

    /// `Σ_i w[i] · x_i`.
    pub fn weighted_sum(&mut self, w: NodeId, xs: &[NodeId]) -> NodeId {
        let n = self.nodes[xs[0]].value.len();
        let mut v = vec![0.0; n];
        for (wi, x) in self.nodes[w].value.iter().zip(xs) {
            for (o, xv) in v.iter_mut().zip(&self.nodes[*x].value) {
                *o += wi * xv;
            }
        }
        self.push(v, Op::WeightedSum(w, xs.to_vec()))
    }

    pub fn mean(&mut self, xs: &[NodeId]) -> NodeId {
        let n = self.nodes[xs[0]].value.len();
        let mut v = vec![0.0; n];
        for x in xs {
            for (o, xv) in v.iter_mut().zip(&self.nodes[*x].value) {
                *o += xv;
            }
        }
        let k = xs.len() as f64;
        v.iter_mut().for_each(|o| *o /= k);
        self.push(v, Op::Mean(xs.to_vec()))
    }

    /// `-log softmax(logits)[target]` as a one-element node.
    pub fn nll(&mut self, logits: NodeId, target: usize) -> NodeId {
        let v = -log_softmax(&self.nodes[logits].value)[target];
        self.push(vec![v], Op::Nll(logits, target))
    }

    pub fn sum(&mut self, xs: &[NodeId]) -> NodeId {
        let n = self.nodes[xs[0]].value.len();
        let mut v = vec![0.0; n];
        for x in xs {
            for (o, xv) in v.iter_mut().zip(&self.nodes[*x].value) {
                *o += xv;
            }
        }
        self.push(v, Op::Sum(xs.to_vec()))
    }

    /// Backpropagates `seed · ∂out` and adds parameter gradients to `grads`.
    pub fn backward(&self, out: NodeId, seed: f64, grads: &mut [Vec<f64>]) {
        let mut g: Vec<Vec<f64>> = vec![Vec::new(); out + 1];
        g[out] = vec![seed; self.nodes[out].value.len()];
        fn acc(g: &mut [Vec<f64>], id: NodeId, len: usize) -> &mut Vec<f64> {
            if g[id].is_empty() {
                g[id] = vec![0.0; len];
            }
            &mut g[id]
        }
        for id in (0..=out).rev() {
            if g[id].is_empty() {
                continue;
            }
            let gi = core::mem::take(&mut g[id]);
            let node = &self.nodes[id];
            match &node.op {
                Op::Input => {}
                Op::Param(pid) => {
                    for (a, b) in grads[*pid].iter_mut().zip(&gi) {
                        *a += b;
                    }
                }
                Op::Row(pid, r) => {
                    let c = gi.len();
                    for (a, b) in grads[*pid][r * c..(r + 1) * c].iter_mut().zip(&gi) {
                        *a += b;
                    }
                }
                Op::MatVec(pid, x) => {
                    let w = self.params.get(*pid);
                    let n = w.cols();
                    let xv = &self.nodes[*x].value;
                    let gw = &mut grads[*pid];
                    for (i, gv) in gi.iter().enumerate() {
                        if *gv != 0.0 {
                            for (a, b) in gw[i * n..(i + 1) * n].iter_mut().zip(xv) {
                                *a += gv * b;
                            }
                        }
                    }
                    let gx = acc(&mut g, *x, n);
                    for (i, gv) in gi.iter().enumerate() {
                        if *gv != 0.0 {
                            for (a, b) in gx.iter_mut().zip(&w.values[i * n..(i + 1) * n]) {
                                *a += gv * b;
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    for p in [*a, *b] {
                        let ga = acc(&mut g, p, gi.len());
                        for (x, y) in ga.iter_mut().zip(&gi) {
                            *x += y;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    let ga = acc(&mut g, *a, gi.len());
                    for ((x, y), v) in ga.iter_mut().zip(&gi).zip(vb) {
                        *x += y * v;
                    }
                    let gb = acc(&mut g, *b, gi.len());
                    for ((x, y), v) in gb.iter_mut().zip(&gi).zip(va) {
                        *x += y * v;
                    }
                }
                Op::Tanh(a) => {
                    let ga = acc(&mut g, *a, gi.len());
                    for ((x, y), t) in ga.iter_mut().zip(&gi).zip(&node.value) {
                        *x += y * (1.0 - t * t);
                    }
                }
                Op::Sigmoid(a) => {
                    let ga = acc(&mut g, *a, gi.len());
                    for ((x, y), s) in ga.iter_mut().zip(&gi).zip(&node.value) {
                        *x += y * s * (1.0 - s);
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let n = self.nodes[*p].value.len();
                        let gp = acc(&mut g, *p, n);
                        for (x, y) in gp.iter_mut().zip(&gi[off..off + n]) {
                            *x += y;
                        }
                        off += n;
                    }
                }
                Op::Slice(a, start) => {
                    let n = self.nodes[*a].value.len();
                    let ga = acc(&mut g, *a, n);
                    for (x, y) in ga[*start..*start + gi.len()].iter_mut().zip(&gi) {
                        *x += y;
                    }
                }
                Op::Softmax(a) => {
                    let s = &node.value;
                    let dot: f64 = gi.iter().zip(s).map(|(x, y)| x * y).sum();
                    let ga = acc(&mut g, *a, gi.len());
                    for ((x, y), sv) in ga.iter_mut().zip(&gi).zip(s) {
                        *x += sv * (y - dot);
                    }
                }
                Op::WeightedSum(w, xs) => {
                    let wv = self.nodes[*w].value.clone();
                    let gw: Vec<f64> = xs
                        .iter()
                        .map(|x| self.nodes[*x].value.iter().zip(&gi).map(|(a, b)| a * b).sum())
                        .collect();
                    let gwn = acc(&mut g, *w, wv.len());
                    for (a, b) in gwn.iter_mut().zip(&gw) {
                        *a += b;
                    }
                    for (x, wi) in xs.iter().zip(&wv) {
                        let gx = acc(&mut g, *x, gi.len());
                        for (a, b) in gx.iter_mut().zip(&gi) {
                            *a += wi * b;
                        }
                    }
                }
                Op::Mean(xs) => {
                    let k = xs.len() as f64;
                    for x in xs {
                        let gx = acc(&mut g, *x, gi.len());
                        for (a, b) in gx.iter_mut().zip(&gi) {
                            *a += b / k;
                        }
                    }
                }
                Op::Sum(xs) => {
                    for x in xs {
                        let gx = acc(&mut g, *x, gi.len());
                        for (a, b) in gx.iter_mut().zip(&gi) {
                            *a += b;
                        }
                    }
                }
                Op::Nll(logits, target) => {
                    let p = softmax(&self.nodes[*logits].value);
                    let gl = acc(&mut g, *logits, p.len());
                    for (i, (a, pi)) in gl.iter_mut().zip(&p).enumerate() {
                        let t = if i == *target { 1.0 } else { 0.0 };
                        *a += gi[0] * (pi - t);
                    }
                }
            }
        }
    }
}
