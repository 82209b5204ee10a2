use std::io::{Read, Write};

use super::{read_checkpoint, write_checkpoint, AutodiffError, Graph, Tensor, Var};
use crate::rng::XorShift64Star;

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Vec<f64>,
}

/// Named, ordered learnable tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    params: Vec<Parameter>,
}

/// Half-width of the Glorot uniform range.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a parameter and returns its index. Names must be unique.
    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> usize {
        let name = name.into();
        assert!(self.index_of(&name).is_none(), "duplicate parameter {name}");
        let grad = vec![0.0; value.numel()];
        self.params.push(Parameter { name, value, grad });
        self.params.len() - 1
    }

    /// Adds a tensor drawn uniformly from `±sqrt(6 / (fan_in + fan_out))`.
    pub fn add_glorot(
        &mut self,
        name: impl Into<String>,
        shape: Vec<usize>,
        fan_in: usize,
        fan_out: usize,
        rng: &mut XorShift64Star,
    ) -> usize {
        let a = glorot_limit(fan_in, fan_out);
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| rng.uniform(-a, a)).collect();
        self.add(name, Tensor::new(shape, data).expect("shape and data agree"))
    }

    pub fn add_zeros(&mut self, name: impl Into<String>, shape: Vec<usize>) -> usize {
        self.add(name, Tensor::zeros(shape))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter> {
        self.params.iter_mut()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Parameter> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Parameter> {
        self.params.iter_mut().find(|p| p.name == name)
    }

    pub fn total_values(&self) -> usize {
        self.params.iter().map(|p| p.value.numel()).sum()
    }

    /// Records every parameter as a leaf on `g`, in store order.
    pub fn bind(&self, g: &mut Graph) -> Result<Vec<Var>, AutodiffError> {
        self.params.iter().map(|p| g.input(p.value.clone())).collect()
    }

    /// Adds the gradients `g` holds for `vars` (from [`bind`](Self::bind)) into the stored buffers.
    pub fn accumulate_grads(&mut self, g: &Graph, vars: &[Var]) {
        for (p, v) in self.params.iter_mut().zip(vars) {
            if let Some(gr) = g.grad(*v) {
                for (a, b) in p.grad.iter_mut().zip(gr) {
                    *a += b;
                }
            }
        }
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad.fill(0.0);
        }
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), AutodiffError> {
        let records: Vec<(&str, &Tensor)> = self.params.iter().map(|p| (p.name.as_str(), &p.value)).collect();
        write_checkpoint(w, &records)
    }

    /// Overwrites values from a checkpoint. Every stored parameter must be present with the same shape.
    pub fn read_from<R: Read>(&mut self, r: R) -> Result<(), AutodiffError> {
        let records = read_checkpoint(r)?;
        for p in &self.params {
            if !records.iter().any(|(n, _)| *n == p.name) {
                return Err(AutodiffError::Checkpoint(format!("missing parameter {:?}", p.name)));
            }
        }
        for (name, value) in records {
            let p = self.get_mut(&name).ok_or(AutodiffError::UnknownParameter(name.clone()))?;
            if p.value.shape() != value.shape() {
                return Err(AutodiffError::Checkpoint(format!(
                    "{name}: shape {:?} in file, {:?} in model",
                    value.shape(),
                    p.value.shape()
                )));
            }
            p.value = value;
        }
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), AutodiffError> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(&mut self, path: &std::path::Path) -> Result<(), AutodiffError> {
        let f = std::fs::File::open(path)?;
        self.read_from(std::io::BufReader::new(f))
    }
}

/// Plain gradient descent: `value -= lr * grad`. Gradients are left in place.
pub fn sgd_step(params: &mut ParamStore, learning_rate: f64) -> Result<(), AutodiffError> {
    if params.iter().any(|p| p.grad.iter().any(|g| !g.is_finite())) {
        return Err(AutodiffError::NonFinite("sgd_step"));
    }
    for p in params.iter_mut() {
        for (v, g) in p.value.data_mut().iter_mut().zip(&p.grad) {
            *v -= learning_rate * g;
        }
    }
    Ok(())
}
