//! The growable network: Fourier encoder, hidden layer, task heads, optimizer
//! and checkpointing.

mod encoder;
mod network;
mod optim;
mod params;

pub use encoder::{pad_raw, FourierEncoder, InputPath};
pub use network::{loss_and_grad, sigmoid, ForwardTrace, GrowableNet, LossKind, TaskSlot};
pub use optim::Adam;
pub use params::{Gradients, HeadParams, Params};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// A serialised network plus the input path (with its encoder seed) that feeds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub input: InputPath,
    pub net: GrowableNet,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
