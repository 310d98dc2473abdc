use serde::{Deserialize, Serialize};

use super::TaskDataset;
use crate::error::{Error, Result};
use crate::net::InputPath;
use crate::stats::{column_mean, cosine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub entries: Vec<Vec<f64>>,
    /// Mean over unordered distinct pairs.
    pub mean: f64,
}

/// Cosine similarity of the tasks' mean encoded inputs.
pub fn task_similarity_matrix(tasks: &[TaskDataset], input: &InputPath) -> Result<SimilarityMatrix> {
    if tasks.len() < 2 {
        return Err(Error::InvalidConfig("similarity needs at least two tasks".into()));
    }
    let means = tasks
        .iter()
        .map(|t| Ok(column_mean(&input.encode_all(&t.inputs)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(similarity_of_means(&means))
}

pub(crate) fn similarity_of_means(means: &[Vec<f64>]) -> SimilarityMatrix {
    let n = means.len();
    let mut entries = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        entries[i][i] = 1.0;
        for j in i + 1..n {
            let s = cosine(&means[i], &means[j]);
            entries[i][j] = s;
            entries[j][i] = s;
            total += s;
            pairs += 1;
        }
    }
    SimilarityMatrix {
        entries,
        mean: if pairs == 0 { 0.0 } else { total / pairs as f64 },
    }
}
