use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LayerSpec, Network};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// JSON checkpoint: the layer list followed by every stored array in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub spec: Vec<LayerSpec>,
    pub arrays: Vec<NamedArray>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))
    }
}

impl<T: Scalar> Network<T> {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            spec: self.spec.clone(),
            arrays: self
                .params
                .named_arrays()
                .into_iter()
                .map(|(name, shape, data)| NamedArray {
                    name,
                    shape,
                    data: data.iter().map(|x| x.to_f64_lossy()).collect(),
                })
                .collect(),
        }
    }

    /// Overwrites the parameters from a checkpoint of the same architecture.
    pub fn restore(&mut self, ckpt: &Checkpoint) -> Result<()> {
        if ckpt.spec != self.spec {
            return Err(Error::Checkpoint("layer list differs from this network".into()));
        }
        let expected: Vec<(String, Vec<usize>)> = self
            .params
            .named_arrays()
            .into_iter()
            .map(|(n, s, _)| (n, s))
            .collect();
        if expected.len() != ckpt.arrays.len() {
            return Err(Error::Checkpoint("array count differs".into()));
        }
        for ((name, shape), a) in expected.iter().zip(&ckpt.arrays) {
            if *name != a.name || *shape != a.shape || a.data.len() != shape.iter().product::<usize>() {
                return Err(Error::Checkpoint(format!("array {} does not match {name}", a.name)));
            }
        }
        for (dst, a) in self.params.arrays_mut().into_iter().zip(&ckpt.arrays) {
            for (d, &s) in dst.iter_mut().zip(&a.data) {
                *d = T::lit(s);
            }
        }
        self.params.bump();
        Ok(())
    }
}
