use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tape::{log_softmax, softmax, NodeId, Tape};
use super::tensor::{Params, Tensor};
use super::vocab::BOS;
use super::{EncoderKind, Hyperparams, NeuralError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LstmIds {
    w: usize,
    b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EncoderIds {
    Bilstm { fwd: LstmIds, bwd: LstmIds },
    Pooling { pos: usize, w: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Ids {
    src_emb: usize,
    tgt_emb: usize,
    encoder: EncoderIds,
    bridge_w: usize,
    bridge_b: usize,
    att_wh: usize,
    att_ws: usize,
    att_v: usize,
    decoder: Vec<LstmIds>,
    out_w: usize,
    out_b: usize,
}

/// Names and shapes of every tensor, in storage order.
fn layout(h: &Hyperparams) -> Vec<(String, Vec<usize>)> {
    let (e, he, d, a, c) = (h.embed_dim, h.encoder_hidden, h.decoder_hidden, h.attention_dim, h.context_dim());
    let mut out = vec![("src_emb".into(), vec![h.src_vocab_size, e]), ("tgt_emb".into(), vec![h.tgt_vocab_size, e])];
    match h.encoder {
        EncoderKind::Bilstm => {
            for dir in ["fwd", "bwd"] {
                out.push((format!("enc_{dir}_w"), vec![4 * he, e + he]));
                out.push((format!("enc_{dir}_b"), vec![4 * he]));
            }
        }
        EncoderKind::CnnPooling => {
            out.push(("enc_pos_emb".into(), vec![h.max_positions, e]));
            out.push(("enc_proj_w".into(), vec![c, e]));
            out.push(("enc_proj_b".into(), vec![c]));
        }
    }
    out.push(("bridge_w".into(), vec![d, c]));
    out.push(("bridge_b".into(), vec![d]));
    out.push(("att_wh".into(), vec![a, c]));
    out.push(("att_ws".into(), vec![a, d]));
    out.push(("att_v".into(), vec![1, a]));
    for l in 0..h.decoder_layers {
        let input = if l == 0 { e + c } else { d };
        out.push((format!("dec{l}_w"), vec![4 * d, input + d]));
        out.push((format!("dec{l}_b"), vec![4 * d]));
    }
    out.push(("out_w".into(), vec![h.tgt_vocab_size, d + c + e]));
    out.push(("out_b".into(), vec![h.tgt_vocab_size]));
    out
}

fn resolve(h: &Hyperparams, p: &Params) -> Result<Ids, NeuralError> {
    let id = |n: &str| p.id(n).ok_or_else(|| NeuralError::MissingTensor(n.into()));
    let encoder = match h.encoder {
        EncoderKind::Bilstm => EncoderIds::Bilstm {
            fwd: LstmIds { w: id("enc_fwd_w")?, b: id("enc_fwd_b")? },
            bwd: LstmIds { w: id("enc_bwd_w")?, b: id("enc_bwd_b")? },
        },
        EncoderKind::CnnPooling => {
            EncoderIds::Pooling { pos: id("enc_pos_emb")?, w: id("enc_proj_w")?, b: id("enc_proj_b")? }
        }
    };
    let decoder = (0..h.decoder_layers)
        .map(|l| Ok(LstmIds { w: id(&format!("dec{l}_w"))?, b: id(&format!("dec{l}_b"))? }))
        .collect::<Result<_, NeuralError>>()?;
    Ok(Ids {
        src_emb: id("src_emb")?,
        tgt_emb: id("tgt_emb")?,
        encoder,
        bridge_w: id("bridge_w")?,
        bridge_b: id("bridge_b")?,
        att_wh: id("att_wh")?,
        att_ws: id("att_ws")?,
        att_v: id("att_v")?,
        decoder,
        out_w: id("out_w")?,
        out_b: id("out_b")?,
    })
}

/// Encoder states `h_1..h_L`, plus cached attention projections.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    pub h: Vec<Vec<f64>>,
    proj: Vec<Vec<f64>>,
    init: Vec<f64>,
}

impl EncoderOutput {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    /// `(hidden, cell)` per layer; the last layer is `s_t`.
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
    /// Context vector of the last step.
    pub q: Vec<f64>,
    pub t: usize,
    pub prev_token: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2Seq {
    hyper: Hyperparams,
    params: Params,
    ids: Ids,
}

struct StepNodes {
    logits: NodeId,
    state: Vec<(NodeId, NodeId)>,
    alpha: NodeId,
    q: NodeId,
}

impl Seq2Seq {
    /// Randomly initialized model: uniform weights in `±init_scale`, forget
    /// gate biases set to 1.
    pub fn new(hyper: Hyperparams) -> Result<Self, NeuralError> {
        hyper.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let mut params = Params::new();
        for (name, shape) in layout(&hyper) {
            let mut t = Tensor::uniform(&shape, hyper.init_scale, &mut rng);
            if name.ends_with("_b") && (name.starts_with("enc_fwd") || name.starts_with("enc_bwd") || name.starts_with("dec")) {
                let h = shape[0] / 4;
                t.values.iter_mut().for_each(|v| *v = 0.0);
                t.values[h..2 * h].iter_mut().for_each(|v| *v = 1.0);
            }
            params.push(name, t);
        }
        let ids = resolve(&hyper, &params)?;
        Ok(Self { hyper, params, ids })
    }

    /// Wraps existing tensors, checking them against the hyperparameters.
    pub fn from_params(hyper: Hyperparams, params: Params) -> Result<Self, NeuralError> {
        hyper.validate()?;
        for (name, shape) in layout(&hyper) {
            let id = params.id(&name).ok_or_else(|| NeuralError::MissingTensor(name.clone()))?;
            let found = &params.get(id).shape;
            if *found != shape {
                return Err(NeuralError::ShapeMismatch { name, expected: shape, found: found.clone() });
            }
        }
        let ids = resolve(&hyper, &params)?;
        Ok(Self { hyper, params, ids })
    }

    /// Expected tensor names and shapes for `hyper`.
    pub fn layout(hyper: &Hyperparams) -> Vec<(String, Vec<usize>)> {
        layout(hyper)
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn set_length_penalty(&mut self, alpha: f64) {
        self.hyper.length_penalty = alpha;
    }

    fn clamp_src(&self, id: usize) -> usize {
        if id < self.hyper.src_vocab_size { id } else { super::vocab::UNK }
    }

    fn lstm(&self, t: &mut Tape, ids: LstmIds, x: NodeId, h: NodeId, c: NodeId) -> (NodeId, NodeId) {
        let n = t.value(h).len();
        let xh = t.concat(&[x, h]);
        let z = t.matvec(ids.w, xh);
        let b = t.param(ids.b);
        let z = t.add(z, b);
        let (i, f, g, o) = (t.slice(z, 0, n), t.slice(z, n, n), t.slice(z, 2 * n, n), t.slice(z, 3 * n, n));
        let (i, f, g, o) = (t.sigmoid(i), t.sigmoid(f), t.tanh(g), t.sigmoid(o));
        let fc = t.mul(f, c);
        let ig = t.mul(i, g);
        let c2 = t.add(fc, ig);
        let tc = t.tanh(c2);
        let h2 = t.mul(o, tc);
        (h2, c2)
    }

    fn encode_nodes(&self, t: &mut Tape, src: &[usize]) -> Vec<NodeId> {
        let emb: Vec<NodeId> = src.iter().map(|&s| t.row(self.ids.src_emb, self.clamp_src(s))).collect();
        match self.ids.encoder {
            EncoderIds::Bilstm { fwd, bwd } => {
                let hd = self.hyper.encoder_hidden;
                let run = |t: &mut Tape, ids: LstmIds, order: &mut dyn Iterator<Item = usize>| {
                    let mut out = vec![0; emb.len()];
                    let (mut h, mut c) = (t.input(vec![0.0; hd]), t.input(vec![0.0; hd]));
                    for i in order {
                        (h, c) = self.lstm(t, ids, emb[i], h, c);
                        out[i] = h;
                    }
                    out
                };
                let f = run(t, fwd, &mut (0..emb.len()));
                let b = run(t, bwd, &mut (0..emb.len()).rev());
                f.into_iter().zip(b).map(|(x, y)| t.concat(&[x, y])).collect()
            }
            EncoderIds::Pooling { pos, w, b } => {
                let with_pos: Vec<NodeId> = emb
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| {
                        let p = t.row(pos, i.min(self.hyper.max_positions - 1));
                        t.add(e, p)
                    })
                    .collect();
                (0..with_pos.len())
                    .map(|i| {
                        let lo = i.saturating_sub(1);
                        let hi = (i + 2).min(with_pos.len());
                        let m = t.mean(&with_pos[lo..hi]);
                        let z = t.matvec(w, m);
                        let bias = t.param(b);
                        let z = t.add(z, bias);
                        t.tanh(z)
                    })
                    .collect()
            }
        }
    }

    fn bridge_nodes(&self, t: &mut Tape, hs: &[NodeId]) -> NodeId {
        let m = t.mean(hs);
        let z = t.matvec(self.ids.bridge_w, m);
        let b = t.param(self.ids.bridge_b);
        let z = t.add(z, b);
        t.tanh(z)
    }

    fn attend_nodes(&self, t: &mut Tape, s_top: NodeId, hs: &[NodeId], proj: &[NodeId]) -> (NodeId, NodeId) {
        let sp = t.matvec(self.ids.att_ws, s_top);
        let scores: Vec<NodeId> = proj
            .iter()
            .map(|&p| {
                let a = t.add(p, sp);
                let a = t.tanh(a);
                t.matvec(self.ids.att_v, a)
            })
            .collect();
        let e = t.concat(&scores);
        let alpha = t.softmax(e);
        let q = t.weighted_sum(alpha, hs);
        (alpha, q)
    }

    fn step_nodes(&self, t: &mut Tape, prev: usize, state: &[(NodeId, NodeId)], hs: &[NodeId], proj: &[NodeId]) -> StepNodes {
        let top = state.last().expect("decoder has layers").0;
        let (alpha, q) = self.attend_nodes(t, top, hs, proj);
        let prev = if prev < self.hyper.tgt_vocab_size { prev } else { super::vocab::UNK };
        let emb = t.row(self.ids.tgt_emb, prev);
        let mut x = t.concat(&[emb, q]);
        let mut next = Vec::with_capacity(state.len());
        for (ids, &(h, c)) in self.ids.decoder.iter().zip(state) {
            let (h2, c2) = self.lstm(t, *ids, x, h, c);
            next.push((h2, c2));
            x = h2;
        }
        let o = t.concat(&[x, q, emb]);
        let z = t.matvec(self.ids.out_w, o);
        let b = t.param(self.ids.out_b);
        let logits = t.add(z, b);
        StepNodes { logits, state: next, alpha, q }
    }

    pub fn encode(&self, src: &[usize]) -> Result<EncoderOutput, NeuralError> {
        if src.is_empty() {
            return Err(NeuralError::EmptySource);
        }
        let mut t = Tape::new(&self.params);
        let hs = self.encode_nodes(&mut t, src);
        let proj: Vec<NodeId> = hs.iter().map(|&h| t.matvec(self.ids.att_wh, h)).collect();
        let init = self.bridge_nodes(&mut t, &hs);
        Ok(EncoderOutput {
            h: hs.iter().map(|&h| t.value(h).to_vec()).collect(),
            proj: proj.iter().map(|&p| t.value(p).to_vec()).collect(),
            init: t.value(init).to_vec(),
        })
    }

    pub fn initial_state(&self, enc: &EncoderOutput) -> DecoderState {
        let d = self.hyper.decoder_hidden;
        DecoderState {
            layers: (0..self.hyper.decoder_layers).map(|_| (enc.init.clone(), vec![0.0; d])).collect(),
            q: vec![0.0; self.hyper.context_dim()],
            t: 0,
            prev_token: BOS,
        }
    }

    fn load(&self, t: &mut Tape, state: &DecoderState, enc: &EncoderOutput) -> (Vec<(NodeId, NodeId)>, Vec<NodeId>, Vec<NodeId>) {
        let st = state.layers.iter().map(|(h, c)| (t.input(h.clone()), t.input(c.clone()))).collect();
        let hs = enc.h.iter().map(|h| t.input(h.clone())).collect();
        let proj = enc.proj.iter().map(|p| t.input(p.clone())).collect();
        (st, hs, proj)
    }

    /// Attention of the next step: weights over `h_i` and the context `q_t`.
    pub fn attend(&self, state: &DecoderState, enc: &EncoderOutput) -> (AttentionWeights, Vec<f64>) {
        let mut t = Tape::new(&self.params);
        let (st, hs, proj) = self.load(&mut t, state, enc);
        let (alpha, q) = self.attend_nodes(&mut t, st.last().expect("decoder has layers").0, &hs, &proj);
        (AttentionWeights(t.value(alpha).to_vec()), t.value(q).to_vec())
    }

    fn step_logits(&self, u_prev: usize, state: &DecoderState, enc: &EncoderOutput) -> (Vec<f64>, DecoderState) {
        let mut t = Tape::new(&self.params);
        let (st, hs, proj) = self.load(&mut t, state, enc);
        let out = self.step_nodes(&mut t, u_prev, &st, &hs, &proj);
        let next = DecoderState {
            layers: out.state.iter().map(|&(h, c)| (t.value(h).to_vec(), t.value(c).to_vec())).collect(),
            q: t.value(out.q).to_vec(),
            t: state.t + 1,
            prev_token: u_prev,
        };
        debug_assert!((t.value(out.alpha).iter().sum::<f64>() - 1.0).abs() < 1e-6);
        (t.value(out.logits).to_vec(), next)
    }

    /// Distribution over the target vocabulary after feeding `u_prev`.
    pub fn decode_step(&self, u_prev: usize, state: &DecoderState, enc: &EncoderOutput) -> (Vec<f64>, DecoderState) {
        let (logits, next) = self.step_logits(u_prev, state, enc);
        (softmax(&logits), next)
    }

    pub fn decode_step_log(&self, u_prev: usize, state: &DecoderState, enc: &EncoderOutput) -> (Vec<f64>, DecoderState) {
        let (logits, next) = self.step_logits(u_prev, state, enc);
        (log_softmax(&logits), next)
    }

    /// Summed negative log-likelihood of `tgt` given `src` under teacher
    /// forcing. When `grads` is given, adds `scale · ∂loss` to it.
    pub fn sequence_loss(&self, src: &[usize], tgt: &[usize], grads: Option<(&mut [Vec<f64>], f64)>) -> Result<f64, NeuralError> {
        if src.is_empty() {
            return Err(NeuralError::EmptySource);
        }
        if tgt.is_empty() {
            return Ok(0.0);
        }
        let mut t = Tape::new(&self.params);
        let hs = self.encode_nodes(&mut t, src);
        let proj: Vec<NodeId> = hs.iter().map(|&h| t.matvec(self.ids.att_wh, h)).collect();
        let init = self.bridge_nodes(&mut t, &hs);
        let zero = t.input(vec![0.0; self.hyper.decoder_hidden]);
        let mut state: Vec<(NodeId, NodeId)> = (0..self.hyper.decoder_layers).map(|_| (init, zero)).collect();
        let mut prev = BOS;
        let mut losses = Vec::with_capacity(tgt.len());
        for &y in tgt {
            let out = self.step_nodes(&mut t, prev, &state, &hs, &proj);
            let y = if y < self.hyper.tgt_vocab_size { y } else { super::vocab::UNK };
            losses.push(t.nll(out.logits, y));
            state = out.state;
            prev = y;
        }
        let total = t.sum(&losses);
        if let Some((g, scale)) = grads {
            t.backward(total, scale, g);
        }
        Ok(t.value(total)[0])
    }
}
