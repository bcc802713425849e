//! File formats: JSON Lines graph files, move and trace records, model
//! checkpoints, and the CSV training log.
//!
//! Graph files hold one object per line, `{"id": ..., "n": ..., "edges":
//! [[u, v], ...]}` with `0 <= u < v < n` and edges sorted lexicographically.
//! Writers always emit that canonical form (node ids compacted by rank);
//! readers enforce the bounds but tolerate unsorted lines.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ric_core::graph::{Graph, NodeId};
use ric_core::model::{EpochLog, Hyper, ModelParams};
use ric_core::moves::Move;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

impl FormatError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io { path: path.to_path_buf(), source }
    }

    fn malformed(path: &Path, line: usize, message: impl Into<String>) -> Self {
        FormatError::Malformed { path: path.to_path_buf(), line, message: message.into() }
    }

    fn invalid(path: &Path, message: impl Into<String>) -> Self {
        FormatError::Invalid { path: path.to_path_buf(), message: message.into() }
    }
}

// ---------------------------------------------------------------------------
// Graph records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub n: u32,
    pub edges: Vec<[u32; 2]>,
}

impl GraphRecord {
    /// Canonical record: ids compacted to `0..n-1` by rank, edges sorted.
    pub fn from_graph(id: Option<String>, g: &Graph) -> Self {
        let c = g.compact_ids();
        GraphRecord {
            id,
            n: c.node_count() as u32,
            edges: c.edges().map(|(u, v)| [u.0, v.0]).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph, String> {
        for e in &self.edges {
            if e[0] >= e[1] {
                return Err(format!("edge [{}, {}] must satisfy u < v", e[0], e[1]));
            }
        }
        let pairs: Vec<(u32, u32)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edge_list(self.n, &pairs).map_err(|e| e.to_string())
    }
}

pub fn read_graphs(path: &Path) -> Result<Vec<(Option<String>, Graph)>, FormatError> {
    let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: GraphRecord = serde_json::from_str(&line)
            .map_err(|e| FormatError::malformed(path, i + 1, e.to_string()))?;
        let graph = record
            .to_graph()
            .map_err(|m| FormatError::malformed(path, i + 1, m))?;
        out.push((record.id, graph));
    }
    if out.is_empty() {
        return Err(FormatError::invalid(path, "no graphs in file"));
    }
    Ok(out)
}

pub fn write_graphs<'a, I>(path: &Path, items: I) -> Result<(), FormatError>
where
    I: IntoIterator<Item = (Option<String>, &'a Graph)>,
{
    let file = File::create(path).map_err(|e| FormatError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, g) in items {
        write_json_line(&mut w, path, &GraphRecord::from_graph(id, g))?;
    }
    w.flush().map_err(|e| FormatError::io(path, e))
}

pub fn write_json_line<W: Write, T: Serialize>(w: &mut W, path: &Path, value: &T) -> Result<(), FormatError> {
    serde_json::to_writer(&mut *w, value)
        .map_err(|e| FormatError::invalid(path, e.to_string()))?;
    w.write_all(b"\n").map_err(|e| FormatError::io(path, e))
}

// ---------------------------------------------------------------------------
// Moves and trace records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum MoveDto {
    #[serde(rename = "I")]
    InsertI { u: u32, v: u32 },
    #[serde(rename = "II")]
    InsertII { edge: [u32; 2], w: u32 },
    #[serde(rename = "DI")]
    DeleteI { v: u32 },
    #[serde(rename = "DII")]
    DeleteII { v: u32, new_edge: [u32; 2] },
}

impl From<&Move> for MoveDto {
    fn from(m: &Move) -> Self {
        match *m {
            Move::InsertI { u, v } => MoveDto::InsertI { u: u.0, v: v.0 },
            Move::InsertII { edge: (u, v), w } => MoveDto::InsertII { edge: [u.0, v.0], w: w.0 },
            Move::DeleteI { v } => MoveDto::DeleteI { v: v.0 },
            Move::DeleteII { v, new_edge: (a, b) } => {
                MoveDto::DeleteII { v: v.0, new_edge: [a.0, b.0] }
            }
        }
    }
}

impl From<&MoveDto> for Move {
    fn from(m: &MoveDto) -> Self {
        match *m {
            MoveDto::InsertI { u, v } => Move::insert_i(NodeId(u), NodeId(v)),
            MoveDto::InsertII { edge, w } => {
                Move::insert_ii(NodeId(edge[0]), NodeId(edge[1]), NodeId(w))
            }
            MoveDto::DeleteI { v } => Move::delete_i(NodeId(v)),
            MoveDto::DeleteII { v, new_edge } => {
                Move::delete_ii(NodeId(v), NodeId(new_edge[0]), NodeId(new_edge[1]))
            }
        }
    }
}

/// Graph with its raw (possibly non-contiguous) node ids, used inside trace
/// records where ids must line up with recorded moves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawGraphDto {
    pub nodes: Vec<u32>,
    pub edges: Vec<[u32; 2]>,
}

impl RawGraphDto {
    pub fn from_graph(g: &Graph) -> Self {
        RawGraphDto {
            nodes: g.nodes().map(|v| v.0).collect(),
            edges: g.edges().map(|(u, v)| [u.0, v.0]).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph, String> {
        let pairs: Vec<(u32, u32)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_node_and_edge_sets(&self.nodes, &pairs).map_err(|e| e.to_string())
    }
}

/// One corruption trace as emitted by the `corrupt` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorruptionTraceDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub k: usize,
    pub start: RawGraphDto,
    pub moves: Vec<MoveDto>,
    pub states: Vec<RawGraphDto>,
}

/// Construction recipe of one generated dataset graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatagenTraceDto {
    pub id: String,
    pub n: u32,
    pub p: f64,
    pub moves: Vec<MoveDto>,
}

/// One chain transition in the `sample` trace sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRecordDto {
    pub chain: usize,
    pub index: usize,
    pub corruption_len: usize,
    pub corrupted: RawGraphDto,
    pub reconstructed: RawGraphDto,
    pub reconstruction_len: usize,
    pub resampled: bool,
    pub hit_max_steps: bool,
}

// ---------------------------------------------------------------------------
// Model checkpoints
// ---------------------------------------------------------------------------

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct HyperDto {
    pub hidden: usize,
    pub rounds: usize,
    pub fourier_freqs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TensorDto {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckpointDto {
    pub version: u32,
    pub hyper: HyperDto,
    pub params: BTreeMap<String, TensorDto>,
}

pub fn save_model(path: &Path, params: &ModelParams) -> Result<(), FormatError> {
    let dto = CheckpointDto {
        version: CHECKPOINT_VERSION,
        hyper: HyperDto {
            hidden: params.hyper.hidden,
            rounds: params.hyper.rounds,
            fourier_freqs: params.hyper.fourier_freqs.clone(),
        },
        params: params
            .named_tensors()
            .into_iter()
            .map(|t| (t.name, TensorDto { shape: t.shape, data: t.data.to_vec() }))
            .collect(),
    };
    let file = File::create(path).map_err(|e| FormatError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &dto).map_err(|e| FormatError::invalid(path, e.to_string()))?;
    w.write_all(b"\n").map_err(|e| FormatError::io(path, e))?;
    w.flush().map_err(|e| FormatError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelParams, FormatError> {
    let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
    let dto: CheckpointDto = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| FormatError::invalid(path, e.to_string()))?;
    if dto.version != CHECKPOINT_VERSION {
        return Err(FormatError::invalid(
            path,
            format!("unsupported checkpoint version {}", dto.version),
        ));
    }
    let hyper = Hyper {
        hidden: dto.hyper.hidden,
        rounds: dto.hyper.rounds,
        fourier_freqs: dto.hyper.fourier_freqs.clone(),
    };
    let mut params = ModelParams::zeros(hyper);
    let mut used = 0usize;
    for t in params.named_tensors_mut() {
        let stored = dto
            .params
            .get(&t.name)
            .ok_or_else(|| FormatError::invalid(path, format!("missing tensor {}", t.name)))?;
        if stored.shape != t.shape || stored.data.len() != t.data.len() {
            return Err(FormatError::invalid(
                path,
                format!("tensor {} has shape {:?}, expected {:?}", t.name, stored.shape, t.shape),
            ));
        }
        t.data.copy_from_slice(&stored.data);
        used += 1;
    }
    if used != dto.params.len() {
        return Err(FormatError::invalid(path, "checkpoint contains unknown tensors"));
    }
    params
        .check_finite()
        .map_err(|e| FormatError::invalid(path, e.to_string()))?;
    Ok(params)
}

// ---------------------------------------------------------------------------
// Training log
// ---------------------------------------------------------------------------

pub fn write_train_log(path: &Path, log: &[EpochLog]) -> Result<(), FormatError> {
    let file = File::create(path).map_err(|e| FormatError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = |s: String| w.write_all(s.as_bytes()).map_err(|e| FormatError::io(path, e));
    emit("epoch,loss,step_size\n".to_string())?;
    for e in log {
        emit(format!("{},{},{}\n", e.epoch, e.mean_loss, e.step_size))?;
    }
    w.flush().map_err(|e| FormatError::io(path, e))
}
