use std::fmt::Write as _;
use std::path::Path;

use super::{argmax, Bound, ClassifierModel, ClassifierSample, DisasterClassifier, DisasterSample, ModelError, SegNet, SegSample, TrainConfig};
use crate::autodiff::{sgd_step, AutodiffError, Graph, ParamStore, Var};
use crate::rng::XorShift64Star;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean loss over the epoch's batches, weighted by batch size.
    pub train_loss: f64,
    /// Fraction correct on the training batches as they were seen.
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    /// `epoch,train_loss,train_acc,val_acc`; `val_acc` is empty without a validation set.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,train_acc,val_acc\n");
        for r in &self.epochs {
            let val = r.val_acc.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{}", r.epoch, r.train_loss, r.train_acc, val);
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_csv()).map_err(|e| ModelError::io(path, e))
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

/// A model that [`fit`] can optimize.
pub trait Trainable {
    type Sample;

    fn store(&self) -> &ParamStore;
    fn store_mut(&mut self) -> &mut ParamStore;
    /// Records the forward pass and returns logits.
    fn logits(&self, g: &mut Graph, p: &Bound, batch: &[&Self::Sample]) -> Result<Var, ModelError>;
    /// Scalar loss on top of `logits`.
    fn loss(&self, g: &mut Graph, logits: Var, batch: &[&Self::Sample]) -> Result<Var, ModelError>;
    /// (correct, counted) predictions.
    fn hits(&self, g: &Graph, logits: Var, batch: &[&Self::Sample]) -> (usize, usize);
}

fn row_hits(g: &Graph, logits: Var, labels: impl Iterator<Item = usize>) -> (usize, usize) {
    let t = g.value(logits);
    let k = t.shape()[1];
    let mut n = 0;
    let correct = t.data().chunks_exact(k).zip(labels).filter(|(row, l)| {
        n += 1;
        argmax(row) == *l
    });
    let c = correct.count();
    (c, n)
}

impl Trainable for ClassifierModel {
    type Sample = ClassifierSample;

    fn store(&self) -> &ParamStore {
        self.params()
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        self.params_mut()
    }

    fn logits(&self, g: &mut Graph, p: &Bound, batch: &[&ClassifierSample]) -> Result<Var, ModelError> {
        self.forward(g, p, batch)
    }

    fn loss(&self, g: &mut Graph, logits: Var, batch: &[&ClassifierSample]) -> Result<Var, ModelError> {
        let labels: Vec<usize> = batch.iter().map(|s| usize::from(s.label.ordinal())).collect();
        Ok(g.softmax_cross_entropy(logits, &labels)?)
    }

    fn hits(&self, g: &Graph, logits: Var, batch: &[&ClassifierSample]) -> (usize, usize) {
        row_hits(g, logits, batch.iter().map(|s| usize::from(s.label.ordinal())))
    }
}

impl Trainable for DisasterClassifier {
    type Sample = DisasterSample;

    fn store(&self) -> &ParamStore {
        self.params()
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        self.params_mut()
    }

    fn logits(&self, g: &mut Graph, p: &Bound, batch: &[&DisasterSample]) -> Result<Var, ModelError> {
        if let Some(s) = batch.iter().find(|s| s.label >= self.config().num_disasters) {
            return Err(ModelError::Input(format!("disaster label {} out of range", s.label)));
        }
        self.forward(g, p, batch)
    }

    fn loss(&self, g: &mut Graph, logits: Var, batch: &[&DisasterSample]) -> Result<Var, ModelError> {
        let labels: Vec<usize> = batch.iter().map(|s| s.label).collect();
        Ok(g.softmax_cross_entropy(logits, &labels)?)
    }

    fn hits(&self, g: &Graph, logits: Var, batch: &[&DisasterSample]) -> (usize, usize) {
        row_hits(g, logits, batch.iter().map(|s| s.label))
    }
}

impl Trainable for SegNet {
    type Sample = SegSample;

    fn store(&self) -> &ParamStore {
        self.params()
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        self.params_mut()
    }

    fn logits(&self, g: &mut Graph, p: &Bound, batch: &[&SegSample]) -> Result<Var, ModelError> {
        self.forward(g, p, batch)
    }

    fn loss(&self, g: &mut Graph, logits: Var, batch: &[&SegSample]) -> Result<Var, ModelError> {
        let labels: Vec<usize> = batch.iter().flat_map(|s| s.labels.iter().copied()).collect();
        Ok(g.pixel_softmax_cross_entropy(logits, &labels)?)
    }

    fn hits(&self, g: &Graph, logits: Var, batch: &[&SegSample]) -> (usize, usize) {
        let t = g.value(logits);
        let (k, hw) = (t.shape()[1], t.shape()[2] * t.shape()[3]);
        let z = t.data();
        let mut correct = 0;
        let mut total = 0;
        for (n, s) in batch.iter().enumerate() {
            let zs = &z[n * k * hw..][..k * hw];
            for (px, &label) in s.labels.iter().enumerate() {
                let mut best = 0;
                for c in 1..k {
                    if zs[c * hw + px] > zs[best * hw + px] {
                        best = c;
                    }
                }
                correct += usize::from(best == label);
                total += 1;
            }
        }
        (correct, total)
    }
}

/// Fraction of correct predictions (rows or pixels) over `samples`, evaluated in chunks of `batch`.
pub fn accuracy<M: Trainable>(model: &M, samples: &[M::Sample], batch: usize) -> Result<f64, ModelError> {
    let (mut hit, mut total) = (0, 0);
    for chunk in samples.chunks(batch.max(1)) {
        let refs: Vec<&M::Sample> = chunk.iter().collect();
        let mut g = Graph::new();
        let p = Bound::new(model.store(), &mut g)?;
        let logits = model.logits(&mut g, &p, &refs)?;
        let (h, t) = model.hits(&g, logits, &refs);
        hit += h;
        total += t;
    }
    Ok(if total == 0 { 0.0 } else { hit as f64 / total as f64 })
}

/// Minibatch SGD. Batches are drawn from a shuffle seeded by `cfg.seed`, so
/// identical inputs give an identical history and identical weights.
pub fn fit<M: Trainable>(
    model: &mut M,
    train: &[M::Sample],
    val: &[M::Sample],
    cfg: &TrainConfig,
) -> Result<History, ModelError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let mut rng = XorShift64Star::substream(cfg.seed, "batches");
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = History::default();
    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        let (mut loss_sum, mut hit, mut total) = (0.0, 0, 0);
        for (bi, chunk) in order.chunks(cfg.batch).enumerate() {
            let batch: Vec<&M::Sample> = chunk.iter().map(|&i| &train[i]).collect();
            let step = |model: &mut M| -> Result<(f64, usize, usize), ModelError> {
                let mut g = Graph::new();
                let p = Bound::new(model.store(), &mut g)?;
                let logits = model.logits(&mut g, &p, &batch)?;
                let loss = model.loss(&mut g, logits, &batch)?;
                let l = g.value(loss).data()[0];
                let (h, t) = model.hits(&g, logits, &batch);
                g.backward(loss)?;
                let vars = p.vars().to_vec();
                let store = model.store_mut();
                store.zero_grad();
                store.accumulate_grads(&g, &vars);
                sgd_step(store, cfg.lr)?;
                Ok((l, h, t))
            };
            let (l, h, t) = step(model).map_err(|e| match e {
                ModelError::Autodiff(AutodiffError::NonFinite(_)) => ModelError::NonFiniteLoss { epoch, batch: bi },
                e => e,
            })?;
            loss_sum += l * batch.len() as f64;
            hit += h;
            total += t;
        }
        let val_acc = if val.is_empty() { None } else { Some(accuracy(model, val, cfg.batch)?) };
        let rec = EpochRecord { epoch, train_loss: loss_sum / train.len() as f64, train_acc: hit as f64 / total as f64, val_acc };
        log::debug!("epoch {epoch}: loss {:.5} train_acc {:.4} val_acc {:?}", rec.train_loss, rec.train_acc, rec.val_acc);
        history.epochs.push(rec);
    }
    Ok(history)
}

pub fn train_classifier(
    model: &mut ClassifierModel,
    train: &[ClassifierSample],
    val: &[ClassifierSample],
    cfg: &TrainConfig,
) -> Result<History, ModelError> {
    fit(model, train, val, cfg)
}

pub fn train_disaster_classifier(
    model: &mut DisasterClassifier,
    train: &[DisasterSample],
    val: &[DisasterSample],
    cfg: &TrainConfig,
) -> Result<History, ModelError> {
    fit(model, train, val, cfg)
}

pub fn train_segmenter(
    model: &mut SegNet,
    train: &[SegSample],
    val: &[SegSample],
    cfg: &TrainConfig,
) -> Result<History, ModelError> {
    fit(model, train, val, cfg)
}
