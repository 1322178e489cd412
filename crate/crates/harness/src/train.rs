//! Teacher and student training loops.

use std::path::Path;

use hd_core::{
    activation_map, activation_mask, build_mapping, channel_weights, hd_loss, hd_loss_maps, vhd_loss, CurveSpec,
    Error as CoreError, FeatureStack, GradientStack, Layout, LinearCode, LossOptions, MappingTable, Sampling, Tensor,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Sample, SynthConfig, SynthDataset, CLASSES};
use crate::error::{HarnessError, Result};
use crate::nets::{batch, Forward, Net};
use crate::tape::{DepthReduce, Tape, Var};

const STREAM_TEACHER_INIT: u64 = 1;
const STREAM_STUDENT_INIT: u64 = 2;
const STREAM_TEACHER_ORDER: u64 = 3;
const STREAM_STUDENT_ORDER: u64 = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Cross-entropy only: the control arm.
    #[default]
    None,
    Hd,
    Vhd,
    Avg,
    Max,
    Conv,
}

impl LossKind {
    pub const ALL: [LossKind; 6] = [
        LossKind::None,
        LossKind::Hd,
        LossKind::Vhd,
        LossKind::Avg,
        LossKind::Max,
        LossKind::Conv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::None => "none",
            LossKind::Hd => "hd",
            LossKind::Vhd => "vhd",
            LossKind::Avg => "avg",
            LossKind::Max => "max",
            LossKind::Conv => "conv",
        }
    }

    fn reducer(self) -> Option<DepthReduce> {
        match self {
            LossKind::Avg => Some(DepthReduce::Avg),
            LossKind::Max => Some(DepthReduce::Max),
            LossKind::Conv => Some(DepthReduce::Conv),
            _ => None,
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Config {
                key: "loss_kind".into(),
                reason: format!("unknown kind {s:?} (expected none, hd, vhd, avg, max or conv)"),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    /// Distillation weight.
    pub alpha: f64,
    /// Activation threshold on sigmoid(AM).
    pub theta: f64,
    /// 1 or 2: the conv block whose output is distilled.
    pub distill_layer: usize,
    /// Leading feature maps of the layer used for distillation.
    pub channels: usize,
    pub widths: [usize; 2],
    pub lr: f64,
    pub epochs: usize,
    pub teacher_lr: f64,
    pub teacher_epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub loss_kind: LossKind,
    pub sampling: Sampling,
    pub layout: Layout,
    pub data: SynthConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            theta: 0.5,
            distill_layer: 2,
            channels: 8,
            widths: [4, 8],
            lr: 0.3,
            epochs: 20,
            teacher_lr: 0.2,
            teacher_epochs: 20,
            batch: 8,
            seed: 0,
            loss_kind: LossKind::None,
            sampling: Sampling::Left,
            layout: Layout::Compacted,
            data: SynthConfig::default(),
        }
    }
}

fn bad(key: &str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(bad("alpha", format!("must be finite and non-negative, got {}", self.alpha)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(bad("theta", format!("must lie in (0, 1), got {}", self.theta)));
        }
        if !(1..=2).contains(&self.distill_layer) {
            return Err(bad("distill_layer", format!("must be 1 or 2, got {}", self.distill_layer)));
        }
        if self.widths.contains(&0) {
            return Err(bad("widths", "every block needs at least one channel"));
        }
        let width = self.widths[self.distill_layer - 1];
        if self.channels == 0 || self.channels > width {
            return Err(bad("channels", format!("must lie in 1..={width} for layer {}", self.distill_layer)));
        }
        for (key, v) in [("lr", self.lr), ("teacher_lr", self.teacher_lr)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(key, format!("must be a positive number, got {v}")));
            }
        }
        if self.batch == 0 {
            return Err(bad("batch", "must be at least 1"));
        }
        if self.data.side % 4 != 0 || !(self.data.side / 2).is_power_of_two() || self.data.side < 8 {
            return Err(bad("data.side", format!("must be 8, 16, 32, ... got {}", self.data.side)));
        }
        Ok(())
    }

    /// Parses JSON or TOML text; the format is picked by `ext` (`json` or `toml`).
    pub fn parse(text: &str, ext: &str) -> Result<Self> {
        Ok(Self::parse_arms(text, ext)?.0)
    }

    /// Like [`HarnessConfig::parse`], but `loss_kind` may also be a list of
    /// kinds, one student arm each. The returned config carries the first.
    pub fn parse_arms(text: &str, ext: &str) -> Result<(Self, Vec<LossKind>)> {
        let mut value: serde_json::Value = match ext {
            "json" => serde_json::from_str(text).map_err(|e| bad("config", e.to_string()))?,
            "toml" => {
                let v: toml::Value = toml::from_str(text).map_err(|e| bad("config", e.message().to_string()))?;
                serde_json::to_value(v).map_err(|e| bad("config", e.to_string()))?
            }
            other => return Err(bad("config", format!("unsupported config extension {other:?}"))),
        };
        let mut kinds = Vec::new();
        if let Some(obj) = value.as_object_mut() {
            if let Some(serde_json::Value::Array(list)) = obj.get("loss_kind").cloned() {
                for (i, k) in list.iter().enumerate() {
                    let name = k.as_str().ok_or_else(|| bad(&format!("loss_kind[{i}]"), "expected a string"))?;
                    kinds.push(name.parse::<LossKind>()?);
                }
                let first = kinds.first().ok_or_else(|| bad("loss_kind", "empty list"))?;
                obj.insert("loss_kind".into(), serde_json::Value::String(first.name().into()));
            }
        }
        let cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let key = match path.as_str() {
                "." | "?" => json_key(&e.inner().to_string()),
                _ => path,
            };
            bad(&key, e.inner().to_string())
        })?;
        cfg.validate()?;
        if kinds.is_empty() {
            kinds.push(cfg.loss_kind);
        }
        Ok((cfg, kinds))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::arms_from_file(path)?.0)
    }

    pub fn arms_from_file(path: impl AsRef<Path>) -> Result<(Self, Vec<LossKind>)> {
        let path = path.as_ref();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        Self::parse_arms(&std::fs::read_to_string(path)?, &ext)
    }

    fn options(&self) -> LossOptions {
        LossOptions {
            sampling: self.sampling,
            layout: self.layout,
        }
    }
}

/// Pulls the offending key out of a serde message such as "unknown field `x`".
fn json_key(msg: &str) -> String {
    msg.split('`').nth(1).unwrap_or("config").to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// `teacher` or `student`.
    pub role: String,
    pub loss_kind: LossKind,
    pub seed: u64,
    /// Mean total loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// Mean unweighted distillation term per epoch; empty for the control arm.
    pub epoch_distill: Vec<f64>,
    /// Percent.
    pub train_accuracy: f64,
    /// Percent.
    pub test_accuracy: f64,
    /// Channel pairs left out because one side had a zero-norm code.
    pub skipped_pairs: usize,
    /// Mean fraction of student cells above θ (VHD only).
    pub active_fraction: Option<f64>,
    pub config: HarnessConfig,
}

pub struct Teacher {
    pub net: Net<f32>,
    pub report: RunReport,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn input(s: &Sample, dims: usize) -> &Tensor<f32> {
    if dims == 3 {
        &s.volume
    } else {
        &s.slice
    }
}

/// Percent of samples whose arg-max logit matches the label.
pub fn accuracy(net: &Net<f32>, samples: &[Sample], chunk: usize) -> Result<f64> {
    if samples.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for part in samples.chunks(chunk.max(1)) {
        let mut tape = Tape::new();
        let xs: Vec<&Tensor<f32>> = part.iter().map(|s| input(s, net.dims)).collect();
        let x = tape.leaf(batch(&xs)?);
        let fwd = net.forward(&mut tape, x)?;
        let logits = tape.value(fwd.logits);
        let k = logits.shape()[1];
        for (r, s) in part.iter().enumerate() {
            let row = &logits.data()[r * k..(r + 1) * k];
            let best = (1..k).fold(0, |b, c| if row[c] > row[b] { c } else { b });
            hits += usize::from(best == s.label);
        }
    }
    Ok(hits as f64 * 100.0 / samples.len() as f64)
}

/// Per-sample activation maps of `block`, from gradients of every class score.
fn activation_maps(tape: &Tape<f32>, fwd: &Forward, block: Var) -> Result<Vec<Tensor<f32>>> {
    let logits = tape.value(fwd.logits);
    let (bn, k) = (logits.shape()[0], logits.shape()[1]);
    let mut per_class = Vec::with_capacity(k);
    for c in 0..k {
        let seed = Tensor::from_fn(&[bn, k], |i| if i[1] == c { 1.0 } else { 0.0 });
        let mut g = tape.backward_from(fwd.logits, seed, block.index())?;
        per_class.push(g.take(block).ok_or_else(|| HarnessError::Shape("no gradient at the distillation layer".into()))?);
    }
    let feats = tape.value(block);
    (0..bn)
        .map(|b| {
            let grads: Vec<Tensor<f32>> = per_class.iter().map(|g| g.index_axis0(b)).collect();
            let gamma = channel_weights(&GradientStack::new(Tensor::stack(&grads)?)?)?;
            Ok(activation_map(&FeatureStack::new(feats.index_axis0(b))?, &gamma)?)
        })
        .collect()
}

/// Leading `keep` entries along axis 0.
fn leading(t: &Tensor<f32>, keep: usize) -> Tensor<f32> {
    let inner: usize = t.shape()[1..].iter().product();
    let mut shape = t.shape().to_vec();
    shape[0] = keep;
    Tensor::from_vec(&shape, t.data()[..keep * inner].to_vec()).expect("prefix shape")
}

/// Frozen teacher outputs at the distillation layer for every training sample.
struct TeacherCache {
    /// `[channels, D, H, W]` per sample.
    maps: Vec<Tensor<f32>>,
    /// `[D, H, W]` per sample.
    ams: Vec<Tensor<f32>>,
}

fn teacher_cache(teacher: &Net<f32>, samples: &[Sample], cfg: &HarnessConfig) -> Result<TeacherCache> {
    let mut cache = TeacherCache {
        maps: Vec::with_capacity(samples.len()),
        ams: Vec::with_capacity(samples.len()),
    };
    for part in samples.chunks(cfg.batch) {
        let mut tape = Tape::new();
        let xs: Vec<&Tensor<f32>> = part.iter().map(|s| &s.volume).collect();
        let x = tape.leaf(batch(&xs)?);
        let fwd = teacher.forward(&mut tape, x)?;
        let block = fwd.blocks[cfg.distill_layer - 1];
        let ams = activation_maps(&tape, &fwd, block)?;
        let feats = tape.value(block);
        for (b, am) in ams.into_iter().enumerate() {
            cache.maps.push(leading(&feats.index_axis0(b), cfg.channels));
            cache.ams.push(am);
        }
    }
    Ok(cache)
}

fn table(n: usize, side: usize, layout: Layout) -> Result<MappingTable> {
    let spec = CurveSpec::new(n, side.trailing_zeros())?;
    Ok(build_mapping(spec, &spec.full_region(), layout)?)
}

fn is_degenerate(e: &HarnessError) -> bool {
    matches!(e, HarnessError::Core(CoreError::DegenerateInput(_)))
}

/// Accumulates a per-pair loss into the batch mean, skipping zero-norm pairs.
struct PairMean {
    value: f64,
    pairs: usize,
    skipped: usize,
}

impl PairMean {
    fn record<R>(&mut self, r: std::result::Result<R, CoreError>) -> Result<Option<R>> {
        self.pairs += 1;
        match r.map_err(HarnessError::from) {
            Ok(v) => Ok(Some(v)),
            Err(e) if is_degenerate(&e) => {
                self.skipped += 1;
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}

pub fn train_teacher(data: &SynthDataset, cfg: &HarnessConfig) -> Result<Teacher> {
    cfg.validate()?;
    if data.train.is_empty() {
        return Err(HarnessError::Shape("empty training split".into()));
    }
    let mut net = Net::<f32>::new(3, cfg.widths, CLASSES, &mut rng(cfg.seed, STREAM_TEACHER_INIT))?;
    let mut order_rng = rng(cfg.seed, STREAM_TEACHER_ORDER);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.teacher_epochs);
    for epoch in 0..cfg.teacher_epochs {
        order.shuffle(&mut order_rng);
        let mut total = 0.0;
        let mut steps = 0usize;
        for idx in order.chunks(cfg.batch) {
            let mut tape = Tape::new();
            let xs: Vec<&Tensor<f32>> = idx.iter().map(|&i| &data.train[i].volume).collect();
            let labels: Vec<usize> = idx.iter().map(|&i| data.train[i].label).collect();
            let x = tape.leaf(batch(&xs)?);
            let fwd = net.forward(&mut tape, x)?;
            let ce = tape.softmax_ce(fwd.logits, &labels)?;
            let loss = tape.value(ce).data()[0];
            if !loss.is_finite() {
                return Err(HarnessError::NonFinite(format!("teacher loss at epoch {epoch}")));
            }
            let grads = tape.backward(ce)?;
            let g: Vec<Option<&Tensor<f32>>> = fwd.params.iter().map(|&p| grads.get(p)).collect();
            net.sgd(&g, cfg.teacher_lr as f32)?;
            total += f64::from(loss);
            steps += 1;
        }
        epoch_losses.push(total / steps as f64);
    }
    if !net.is_finite() {
        return Err(HarnessError::NonFinite("teacher parameters".into()));
    }
    let report = RunReport {
        role: "teacher".into(),
        loss_kind: LossKind::None,
        seed: cfg.seed,
        epoch_losses,
        epoch_distill: Vec::new(),
        train_accuracy: accuracy(&net, &data.train, 64)?,
        test_accuracy: accuracy(&net, &data.test, 64)?,
        skipped_pairs: 0,
        active_fraction: None,
        config: cfg.clone(),
    };
    Ok(Teacher { net, report })
}

/// Trains a fresh 2D student on middle slices. The teacher is read only.
pub fn train_student(data: &SynthDataset, teacher: Option<&Net<f32>>, cfg: &HarnessConfig) -> Result<RunReport> {
    cfg.validate()?;
    if data.train.is_empty() {
        return Err(HarnessError::Shape("empty training split".into()));
    }
    let distill = cfg.loss_kind != LossKind::None && cfg.alpha > 0.0;
    let mut student = Net::<f32>::new(2, cfg.widths, CLASSES, &mut rng(cfg.seed, STREAM_STUDENT_INIT))?;
    let cache = match (distill, teacher) {
        (false, _) => None,
        (true, Some(t)) => {
            if t.dims != 3 || t.widths() != cfg.widths {
                return Err(HarnessError::Shape(format!(
                    "teacher widths {:?} (dims {}) do not match config widths {:?}",
                    t.widths(),
                    t.dims,
                    cfg.widths
                )));
            }
            Some(teacher_cache(t, &data.train, cfg)?)
        }
        (true, None) => return Err(bad("loss_kind", format!("{} needs a trained teacher", cfg.loss_kind.name()))),
    };
    let side = cfg.data.side >> cfg.distill_layer;
    let (table_t, table_s) = if distill {
        (table(3, side, cfg.layout)?, table(2, side, cfg.layout)?)
    } else {
        (table(2, 2, cfg.layout)?, table(2, 2, cfg.layout)?)
    };
    let opts = cfg.options();
    let mut reducer = Tensor::filled(&[side], 1.0 / side as f32);
    // 1×1 conv from the student layer onto the distilled channels, trained jointly.
    let width = cfg.widths[cfg.distill_layer - 1];
    let mut adapter = [
        Tensor::from_fn(&[cfg.channels, width, 1, 1], |i| if i[0] == i[1] { 1.0 } else { 0.0 }),
        Tensor::zeros(&[cfg.channels]),
    ];
    let mut order_rng = rng(cfg.seed, STREAM_STUDENT_ORDER);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut epoch_distill = Vec::new();
    let mut skipped_pairs = 0usize;
    let mut active = (0.0f64, 0usize);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut order_rng);
        let (mut total, mut dsum, mut steps) = (0.0f64, 0.0f64, 0usize);
        for idx in order.chunks(cfg.batch) {
            let mut tape = Tape::new();
            let xs: Vec<&Tensor<f32>> = idx.iter().map(|&i| &data.train[i].slice).collect();
            let labels: Vec<usize> = idx.iter().map(|&i| data.train[i].label).collect();
            let x = tape.leaf(batch(&xs)?);
            let fwd = student.forward(&mut tape, x)?;
            let ce = tape.softmax_ce(fwd.logits, &labels)?;
            let mut objective = ce;
            let mut reducer_var = None;
            let mut adapter_vars = None;
            if let Some(cache) = &cache {
                let layer = fwd.blocks[cfg.distill_layer - 1];
                let (aw, ab) = (tape.leaf(adapter[0].clone()), tape.leaf(adapter[1].clone()));
                adapter_vars = Some([aw, ab]);
                let block = tape.conv(layer, aw, ab)?;
                let mut acc = PairMean {
                    value: 0.0,
                    pairs: 0,
                    skipped: 0,
                };
                let term = match cfg.loss_kind.reducer() {
                    None => {
                        let ams_s = if cfg.loss_kind == LossKind::Vhd {
                            let ams = activation_maps(&tape, &fwd, layer)?;
                            for am in &ams {
                                active.0 += activation_mask(am, cfg.theta)?.active_fraction();
                                active.1 += 1;
                            }
                            Some(ams)
                        } else {
                            None
                        };
                        let feats = tape.value(block).clone();
                        let mut grad = Tensor::<f32>::zeros(feats.shape());
                        for (b, &i) in idx.iter().enumerate() {
                            let fs = feats.index_axis0(b);
                            for ch in 0..cfg.channels {
                                let (et, es) = (cache.maps[i].index_axis0(ch), fs.index_axis0(ch));
                                let r = match &ams_s {
                                    None => hd_loss_maps(&et, &table_t, &es, &table_s, &opts),
                                    Some(ams) => vhd_loss(&et, &cache.ams[i], &table_t, &es, &ams[b], &table_s, &opts),
                                };
                                if let Some(r) = acc.record(r)? {
                                    acc.value += f64::from(r.value);
                                    write_block(&mut grad, &[b, ch], r.grad_student.data());
                                }
                            }
                        }
                        let inv = 1.0 / acc.pairs as f32;
                        tape.custom(acc.value as f32 * inv, &[block], vec![grad.scale(inv)])?
                    }
                    Some(mode) => {
                        let maps: Vec<Tensor<f32>> = idx.iter().map(|&i| cache.maps[i].clone()).collect();
                        let tv = tape.leaf(Tensor::stack(&maps)?);
                        let w = (mode == DepthReduce::Conv).then(|| tape.leaf(reducer.clone()));
                        reducer_var = w;
                        let reduced = tape.reduce_depth(tv, mode, w)?;
                        let (rv, sv) = (tape.value(reduced).clone(), tape.value(block).clone());
                        let mut g_s = Tensor::<f32>::zeros(sv.shape());
                        let mut g_r = Tensor::<f32>::zeros(rv.shape());
                        for b in 0..idx.len() {
                            for ch in 0..cfg.channels {
                                let ct = LinearCode::dense(rv.index_axis0(b).index_axis0(ch).into_vec());
                                let cs = LinearCode::dense(sv.index_axis0(b).index_axis0(ch).into_vec());
                                if let Some(r) = acc.record(hd_loss(&ct, &cs, cfg.sampling))? {
                                    acc.value += f64::from(r.value);
                                    write_block(&mut g_s, &[b, ch], &r.grad_student);
                                    write_block(&mut g_r, &[b, ch], &r.grad_teacher);
                                }
                            }
                        }
                        let inv = 1.0 / acc.pairs as f32;
                        tape.custom(acc.value as f32 * inv, &[block, reduced], vec![g_s.scale(inv), g_r.scale(inv)])?
                    }
                };
                skipped_pairs += acc.skipped;
                dsum += f64::from(tape.value(term).data()[0]);
                let weighted = tape.scale(term, cfg.alpha as f32);
                objective = tape.add(ce, weighted)?;
            }
            let loss = tape.value(objective).data()[0];
            if !loss.is_finite() {
                return Err(HarnessError::NonFinite(format!("student loss at epoch {epoch}")));
            }
            let grads = tape.backward(objective)?;
            let g: Vec<Option<&Tensor<f32>>> = fwd.params.iter().map(|&p| grads.get(p)).collect();
            student.sgd(&g, cfg.lr as f32)?;
            if let Some(gw) = reducer_var.and_then(|w| grads.get(w)) {
                reducer.add_scaled(gw, -(cfg.lr as f32))?;
            }
            for (p, v) in adapter.iter_mut().zip(adapter_vars.into_iter().flatten()) {
                if let Some(g) = grads.get(v) {
                    p.add_scaled(g, -(cfg.lr as f32))?;
                }
            }
            total += f64::from(loss);
            steps += 1;
        }
        epoch_losses.push(total / steps as f64);
        if cache.is_some() {
            epoch_distill.push(dsum / steps as f64);
        }
    }
    if !student.is_finite() {
        return Err(HarnessError::NonFinite("student parameters".into()));
    }
    Ok(RunReport {
        role: "student".into(),
        loss_kind: cfg.loss_kind,
        seed: cfg.seed,
        epoch_losses,
        epoch_distill,
        train_accuracy: accuracy(&student, &data.train, 64)?,
        test_accuracy: accuracy(&student, &data.test, 64)?,
        skipped_pairs,
        active_fraction: (active.1 > 0).then(|| active.0 / active.1 as f64),
        config: cfg.clone(),
    })
}

/// Copies `src` into the contiguous block of `t` addressed by a leading index prefix.
fn write_block(t: &mut Tensor<f32>, prefix: &[usize], src: &[f32]) {
    let mut idx = prefix.to_vec();
    idx.resize(t.ndim(), 0);
    let start = t.offset(&idx);
    t.data_mut()[start..start + src.len()].copy_from_slice(src);
}

/// Teacher plus one student per loss kind, all from the same seed.
pub fn run_arms(cfg: &HarnessConfig, kinds: &[LossKind]) -> Result<(Option<RunReport>, Vec<RunReport>)> {
    cfg.validate()?;
    let data = crate::data::make_synthetic(&cfg.data, cfg.seed)?;
    let teacher = if kinds.iter().any(|&k| k != LossKind::None) {
        Some(train_teacher(&data, cfg)?)
    } else {
        None
    };
    let students = kinds
        .iter()
        .map(|&k| {
            let arm = HarnessConfig {
                loss_kind: k,
                ..cfg.clone()
            };
            train_student(&data, teacher.as_ref().map(|t| &t.net), &arm)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((teacher.map(|t| t.report), students))
}
