//! Forward and backward passes of the reconstruction model.
//!
//! The network embeds a Fourier encoding of each node's degree, runs a few
//! synchronous message-passing rounds, pools a graph embedding, and scores
//! stop plus every legal move with per-category heads joined by one softmax.
//! Head inputs are sums of node embeddings plus the graph embedding, so the
//! first layer is evaluated block-wise: per-node tables and a per-category
//! graph part are computed once and reused by every action, forward and
//! backward.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::graph::{Graph, NodeId};
use crate::moves::{self, Move};

use super::params::{axpy, dot, Matrix, Mlp2, ModelParams};
use super::{Action, ModelError};

/// Fourier degree features in ascending node order: for each frequency `w`,
/// the pair `[sin(w d), cos(w d)]`.
pub fn featurize(g: &Graph, fourier_freqs: &[f64]) -> Vec<Vec<f64>> {
    g.nodes()
        .map(|v| {
            let d = g.degree(v) as f64;
            let mut f = Vec::with_capacity(2 * fourier_freqs.len());
            for &w in fourier_freqs {
                f.push(fmath::sin(w * d));
                f.push(fmath::cos(w * d));
            }
            f
        })
        .collect()
}

/// Everything the encoder computes for one graph, cached for backward.
pub(crate) struct Encoding {
    pub ids: Vec<NodeId>,
    pub idx_of: BTreeMap<NodeId, usize>,
    pub adj: Vec<Vec<usize>>,
    pub feats: Vec<Vec<f64>>,
    /// `levels[0]` is the embedded input; `levels[t+1]` is round `t` output.
    pub levels: Vec<Vec<Vec<f64>>>,
    pub readout_hidden: Vec<Vec<f64>>,
    /// Node index supplying each max-pool coordinate (first winner on ties).
    pub argmax: Vec<usize>,
    /// `[avg-pool | max-pool]` of the read-out node vectors.
    pub graph_emb: Vec<f64>,
}

impl Encoding {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn final_level(&self) -> &Vec<Vec<f64>> {
        self.levels.last().expect("at least the embed level exists")
    }

    fn idx(&self, v: NodeId) -> usize {
        self.idx_of[&v]
    }
}

pub(crate) fn encode_with_features(
    g: &Graph,
    feats: &[Vec<f64>],
    params: &ModelParams,
) -> Result<Encoding, ModelError> {
    params.hyper.validate()?;
    let h = params.hyper.hidden;
    let n = g.node_count();
    if feats.len() != n {
        return Err(ModelError::ShapeMismatch("one feature vector per node required"));
    }
    if feats.iter().any(|f| f.len() != params.embed.w.cols) {
        return Err(ModelError::ShapeMismatch("feature width does not match the embed layer"));
    }
    let ids: Vec<NodeId> = g.nodes().collect();
    let idx_of: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = ids
        .iter()
        .map(|&v| g.neighbors(v).map(|u| idx_of[&u]).collect())
        .collect();

    let mut levels = Vec::with_capacity(params.mp.len() + 1);
    let mut h0 = vec![vec![0.0; h]; n];
    for (hv, f) in h0.iter_mut().zip(feats) {
        params.embed.forward(f, hv);
    }
    levels.push(h0);

    let mut neigh_sum = vec![0.0; h];
    for round in &params.mp {
        let prev = levels.last().unwrap();
        let mut next = vec![vec![0.0; h]; n];
        for v in 0..n {
            neigh_sum.fill(0.0);
            for &u in &adj[v] {
                axpy(1.0, &prev[u], &mut neigh_sum);
            }
            let out = &mut next[v];
            round.w_self.matvec(&prev[v], out);
            round.w_neigh.matvec_block_add(0, &neigh_sum, out);
            for (o, b) in out.iter_mut().zip(&round.b) {
                *o = fmath::tanh(*o + b);
            }
        }
        levels.push(next);
    }

    let last = levels.last().unwrap();
    let mut readout_hidden = vec![vec![0.0; h]; n];
    let mut readout_out = vec![vec![0.0; h]; n];
    for v in 0..n {
        params.readout.l0.forward(&last[v], &mut readout_hidden[v]);
        for x in readout_hidden[v].iter_mut() {
            *x = fmath::tanh(*x);
        }
        params.readout.l1.forward(&readout_hidden[v], &mut readout_out[v]);
    }

    let mut graph_emb = vec![0.0; 2 * h];
    let (avg, maxv) = graph_emb.split_at_mut(h);
    let mut argmax = vec![0usize; h];
    for v in 0..n {
        for i in 0..h {
            let x = readout_out[v][i];
            avg[i] += x;
            if v == 0 || x > maxv[i] {
                maxv[i] = x;
                argmax[i] = v;
            }
        }
    }
    for a in avg.iter_mut() {
        *a /= n as f64;
    }

    Ok(Encoding { ids, idx_of, adj, feats: feats.to_vec(), levels, readout_hidden, argmax, graph_emb })
}

/// Runs the message-passing encoder on explicit features and returns the
/// final node embeddings (ascending node order) plus the graph embedding.
pub fn message_pass(
    g: &Graph,
    feats: &[Vec<f64>],
    params: &ModelParams,
) -> Result<(Vec<Vec<f64>>, Vec<f64>), ModelError> {
    let enc = encode_with_features(g, feats, params)?;
    let nodes = enc.final_level().clone();
    Ok((nodes, enc.graph_emb))
}

/// Forward state of one scoring pass: the encoding, the action list, and
/// per-action head activations.
pub(crate) struct Forward {
    pub enc: Encoding,
    pub actions: Vec<Action>,
    pub act_hidden: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    /// `log sum exp` of the logits; `log p_i = logits[i] - log_norm`.
    pub log_norm: f64,
}

impl Forward {
    pub fn target_index(&self, target: &Action) -> Option<usize> {
        self.actions.iter().position(|a| a == target)
    }

    pub fn log_prob(&self, index: usize) -> f64 {
        self.logits[index] - self.log_norm
    }
}

/// Category indices used for per-category accumulators.
const CAT_STOP: usize = 0;
const CAT_DEL1: usize = 1;
const CAT_DEL2: usize = 2;
const CAT_INS1: usize = 3;
const CAT_INS2: usize = 4;

fn category(action: &Action) -> usize {
    match action {
        Action::Stop => CAT_STOP,
        Action::Apply(Move::DeleteI { .. }) => CAT_DEL1,
        Action::Apply(Move::DeleteII { .. }) => CAT_DEL2,
        Action::Apply(Move::InsertI { .. }) => CAT_INS1,
        Action::Apply(Move::InsertII { .. }) => CAT_INS2,
    }
}

fn head_of(params: &ModelParams, cat: usize) -> &Mlp2 {
    match cat {
        CAT_STOP => &params.head_stop,
        CAT_DEL1 => &params.head_delete_i,
        CAT_DEL2 => &params.head_delete_ii,
        CAT_INS1 => &params.head_insert_i,
        CAT_INS2 => &params.head_insert_ii,
        _ => unreachable!(),
    }
}

fn head_of_mut(params: &mut ModelParams, cat: usize) -> &mut Mlp2 {
    match cat {
        CAT_STOP => &mut params.head_stop,
        CAT_DEL1 => &mut params.head_delete_i,
        CAT_DEL2 => &mut params.head_delete_ii,
        CAT_INS1 => &mut params.head_insert_i,
        CAT_INS2 => &mut params.head_insert_ii,
        _ => unreachable!(),
    }
}

/// Column offset of the graph-embedding block in each head's first layer.
fn graph_block_offset(hidden: usize, cat: usize) -> usize {
    match cat {
        CAT_STOP => 0,
        CAT_DEL1 | CAT_INS1 => hidden,
        CAT_DEL2 | CAT_INS2 => 2 * hidden,
        _ => unreachable!(),
    }
}

/// `W[:, off..off+H] h_v` for every node, computed once per (head, block).
fn node_table(w: &Matrix, off: usize, nodes: &[Vec<f64>], hidden: usize) -> Vec<Vec<f64>> {
    nodes
        .iter()
        .map(|hv| {
            let mut out = vec![0.0; hidden];
            w.matvec_block_add(off, hv, &mut out);
            out
        })
        .collect()
}

pub(crate) fn forward(
    g: &Graph,
    params: &ModelParams,
    size_min: u32,
    size_max: u32,
) -> Result<Forward, ModelError> {
    let legal = moves::enumerate_legal(g, size_min, size_max).map_err(|e| match e {
        moves::MoveError::NotLaman => ModelError::NotLaman,
        _ => ModelError::NotLaman,
    })?;
    let feats = featurize(g, &params.hyper.fourier_freqs);
    let enc = encode_with_features(g, &feats, params)?;
    let h = params.hyper.hidden;
    let nodes = enc.final_level();

    let mut actions = Vec::with_capacity(legal.len() + 1);
    actions.push(Action::Stop);
    actions.extend(legal.into_iter().map(Action::Apply));

    let mut present = [false; 5];
    for a in &actions {
        present[category(a)] = true;
    }

    // Per-category graph parts: l0 bias plus the graph-embedding block.
    let mut gparts: [Vec<f64>; 5] = Default::default();
    for cat in 0..5 {
        if present[cat] {
            let head = head_of(params, cat);
            let mut gp = head.l0.b.clone();
            head.l0.w.matvec_block_add(graph_block_offset(h, cat), &enc.graph_emb, &mut gp);
            gparts[cat] = gp;
        }
    }
    // Per-node tables for the location blocks that are actually needed.
    let t_del1 = present[CAT_DEL1].then(|| node_table(&params.head_delete_i.l0.w, 0, nodes, h));
    let t_del2_loc = present[CAT_DEL2].then(|| node_table(&params.head_delete_ii.l0.w, 0, nodes, h));
    let t_del2_pair = present[CAT_DEL2].then(|| node_table(&params.head_delete_ii.l0.w, h, nodes, h));
    let t_ins1 = present[CAT_INS1].then(|| node_table(&params.head_insert_i.l0.w, 0, nodes, h));
    let t_ins2_pair = present[CAT_INS2].then(|| node_table(&params.head_insert_ii.l0.w, 0, nodes, h));
    let t_ins2_third = present[CAT_INS2].then(|| node_table(&params.head_insert_ii.l0.w, h, nodes, h));

    let mut act_hidden = Vec::with_capacity(actions.len());
    let mut logits = Vec::with_capacity(actions.len());
    for action in &actions {
        let cat = category(action);
        let mut pre = gparts[cat].clone();
        match *action {
            Action::Stop => {}
            Action::Apply(Move::DeleteI { v }) => {
                axpy(1.0, &t_del1.as_ref().unwrap()[enc.idx(v)], &mut pre);
            }
            Action::Apply(Move::DeleteII { v, new_edge: (a, b) }) => {
                axpy(1.0, &t_del2_loc.as_ref().unwrap()[enc.idx(v)], &mut pre);
                let pair = t_del2_pair.as_ref().unwrap();
                axpy(1.0, &pair[enc.idx(a)], &mut pre);
                axpy(1.0, &pair[enc.idx(b)], &mut pre);
            }
            Action::Apply(Move::InsertI { u, v }) => {
                let t = t_ins1.as_ref().unwrap();
                axpy(1.0, &t[enc.idx(u)], &mut pre);
                axpy(1.0, &t[enc.idx(v)], &mut pre);
            }
            Action::Apply(Move::InsertII { edge: (u, v), w }) => {
                let pair = t_ins2_pair.as_ref().unwrap();
                axpy(1.0, &pair[enc.idx(u)], &mut pre);
                axpy(1.0, &pair[enc.idx(v)], &mut pre);
                axpy(1.0, &t_ins2_third.as_ref().unwrap()[enc.idx(w)], &mut pre);
            }
        }
        for x in pre.iter_mut() {
            *x = fmath::tanh(*x);
        }
        let head = head_of(params, cat);
        let logit = dot(head.l1.w.row(0), &pre) + head.l1.b[0];
        act_hidden.push(pre);
        logits.push(logit);
    }

    let mx = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logits.iter().map(|&l| fmath::exp(l - mx)).collect();
    let sum: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= sum;
    }
    let log_norm = mx + fmath::ln(sum);
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);

    Ok(Forward { enc, actions, act_hidden, logits, probs, log_norm })
}

/// Accumulates the gradient of `sum_i dlogits[i] * logit_i` into `grads`.
/// With `dlogits = scale * (probs - onehot(target))` this is the gradient of
/// the scaled negative log-likelihood.
pub(crate) fn backward(params: &ModelParams, fwd: &Forward, dlogits: &[f64], grads: &mut ModelParams) {
    let h = params.hyper.hidden;
    let enc = &fwd.enc;
    let n = enc.node_count();
    let nodes = enc.final_level();

    let mut dgraph = vec![0.0; 2 * h];
    let mut dnode = vec![vec![0.0; h]; n];
    let mut dpre_sums: [Vec<f64>; 5] = Default::default();
    for dp in dpre_sums.iter_mut() {
        *dp = vec![0.0; h];
    }
    let mut present = [false; 5];

    let mut scratch = vec![0.0; h];
    let mut pair_sum = vec![0.0; h];
    for (ai, action) in fwd.actions.iter().enumerate() {
        let dl = dlogits[ai];
        let cat = category(action);
        present[cat] = true;
        let head = head_of(params, cat);
        let hidden = &fwd.act_hidden[ai];

        // Second layer gradients and the delta at the first layer's output.
        {
            let ghead = head_of_mut(grads, cat);
            axpy(dl, hidden, ghead.l1.w.row_mut(0));
            ghead.l1.b[0] += dl;
        }
        let mut dpre: Vec<f64> = head.l1.w.row(0).iter().map(|w| w * dl).collect();
        for (d, y) in dpre.iter_mut().zip(hidden) {
            *d *= 1.0 - y * y;
        }
        axpy(1.0, &dpre, &mut dpre_sums[cat]);

        // Location blocks: weight gradient plus backprop into node vectors.
        match *action {
            Action::Stop => {}
            Action::Apply(Move::DeleteI { v }) => {
                let vi = enc.idx(v);
                head_of_mut(grads, cat).l0.w.add_outer_block(0, &dpre, &nodes[vi]);
                scratch.fill(0.0);
                head.l0.w.tr_matvec_block_add(0, &dpre, &mut scratch);
                axpy(1.0, &scratch, &mut dnode[vi]);
            }
            Action::Apply(Move::DeleteII { v, new_edge: (a, b) }) => {
                let (vi, ai_, bi) = (enc.idx(v), enc.idx(a), enc.idx(b));
                {
                    let gw = &mut head_of_mut(grads, cat).l0.w;
                    gw.add_outer_block(0, &dpre, &nodes[vi]);
                    pair_sum.copy_from_slice(&nodes[ai_]);
                    axpy(1.0, &nodes[bi], &mut pair_sum);
                    gw.add_outer_block(h, &dpre, &pair_sum);
                }
                scratch.fill(0.0);
                head.l0.w.tr_matvec_block_add(0, &dpre, &mut scratch);
                axpy(1.0, &scratch, &mut dnode[vi]);
                scratch.fill(0.0);
                head.l0.w.tr_matvec_block_add(h, &dpre, &mut scratch);
                axpy(1.0, &scratch, &mut dnode[ai_]);
                axpy(1.0, &scratch, &mut dnode[bi]);
            }
            Action::Apply(Move::InsertI { u, v }) => {
                let (ui, vi) = (enc.idx(u), enc.idx(v));
                pair_sum.copy_from_slice(&nodes[ui]);
                axpy(1.0, &nodes[vi], &mut pair_sum);
                head_of_mut(grads, cat).l0.w.add_outer_block(0, &dpre, &pair_sum);
                scratch.fill(0.0);
                head.l0.w.tr_matvec_block_add(0, &dpre, &mut scratch);
                axpy(1.0, &scratch, &mut dnode[ui]);
                axpy(1.0, &scratch, &mut dnode[vi]);
            }
            Action::Apply(Move::InsertII { edge: (u, v), w }) => {
                let (ui, vi, wi) = (enc.idx(u), enc.idx(v), enc.idx(w));
                {
                    let gw = &mut head_of_mut(grads, cat).l0.w;
                    pair_sum.copy_from_slice(&nodes[ui]);
                    axpy(1.0, &nodes[vi], &mut pair_sum);
                    gw.add_outer_block(0, &dpre, &pair_sum);
                    gw.add_outer_block(h, &dpre, &nodes[wi]);
                }
                scratch.fill(0.0);
                head.l0.w.tr_matvec_block_add(0, &dpre, &mut scratch);
                axpy(1.0, &scratch, &mut dnode[ui]);
                axpy(1.0, &scratch, &mut dnode[vi]);
                scratch.fill(0.0);
                head.l0.w.tr_matvec_block_add(h, &dpre, &mut scratch);
                axpy(1.0, &scratch, &mut dnode[wi]);
            }
        }
    }

    // Graph-embedding block and first-layer bias, once per category.
    for cat in 0..5 {
        if !present[cat] {
            continue;
        }
        let off = graph_block_offset(h, cat);
        let dsum = &dpre_sums[cat];
        {
            let ghead = head_of_mut(grads, cat);
            ghead.l0.w.add_outer_block(off, dsum, &enc.graph_emb);
            axpy(1.0, dsum, &mut ghead.l0.b);
        }
        head_of(params, cat).l0.w.tr_matvec_block_add(off, dsum, &mut dgraph);
    }

    // Pooling: average spreads evenly, max routes to the recorded winner.
    let (davg, dmax) = dgraph.split_at(h);
    let mut dr = vec![vec![0.0; h]; n];
    for drv in dr.iter_mut() {
        axpy(1.0 / n as f64, davg, drv);
    }
    for i in 0..h {
        dr[enc.argmax[i]][i] += dmax[i];
    }

    // Read-out layers.
    for v in 0..n {
        grads.readout.l1.w.add_outer_block(0, &dr[v], &enc.readout_hidden[v]);
        axpy(1.0, &dr[v], &mut grads.readout.l1.b);
        scratch.fill(0.0);
        params.readout.l1.w.tr_matvec_block_add(0, &dr[v], &mut scratch);
        for (d, y) in scratch.iter_mut().zip(&enc.readout_hidden[v]) {
            *d *= 1.0 - y * y;
        }
        grads.readout.l0.w.add_outer_block(0, &scratch, &nodes[v]);
        axpy(1.0, &scratch, &mut grads.readout.l0.b);
        params.readout.l0.w.tr_matvec_block_add(0, &scratch, &mut dnode[v]);
    }

    // Message-passing rounds, last to first.
    let mut dcur = dnode;
    let mut neigh_sum = vec![0.0; h];
    let mut tneigh = vec![0.0; h];
    for t in (0..params.mp.len()).rev() {
        let prev = &enc.levels[t];
        let out = &enc.levels[t + 1];
        let round = &params.mp[t];
        let ground = &mut grads.mp[t];
        let mut dprev = vec![vec![0.0; h]; n];
        for v in 0..n {
            scratch.copy_from_slice(&dcur[v]);
            for (d, y) in scratch.iter_mut().zip(&out[v]) {
                *d *= 1.0 - y * y;
            }
            axpy(1.0, &scratch, &mut ground.b);
            ground.w_self.add_outer_block(0, &scratch, &prev[v]);
            neigh_sum.fill(0.0);
            for &u in &enc.adj[v] {
                axpy(1.0, &prev[u], &mut neigh_sum);
            }
            ground.w_neigh.add_outer_block(0, &scratch, &neigh_sum);
            round.w_self.tr_matvec_block_add(0, &scratch, &mut dprev[v]);
            tneigh.fill(0.0);
            round.w_neigh.tr_matvec_block_add(0, &scratch, &mut tneigh);
            for &u in &enc.adj[v] {
                axpy(1.0, &tneigh, &mut dprev[u]);
            }
        }
        dcur = dprev;
    }

    // Input embedding (linear, no activation).
    for v in 0..n {
        grads.embed.w.add_outer_block(0, &dcur[v], &enc.feats[v]);
        axpy(1.0, &dcur[v], &mut grads.embed.b);
    }
}
