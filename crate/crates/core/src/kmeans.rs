//! Cluster-based mini-batches.
//!
//! The input Gram matrix is close to block diagonal once samples are grouped
//! by cluster, so each Lloyd cluster becomes one training batch.

use faer::MatRef;

use crate::error::{Error, Result};
use crate::rng::{streams, RandomStream};

pub const MAX_ITERATIONS: usize = 100;

/// Ordered index sets partitioning `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    pub batches: Vec<Vec<usize>>,
}

impl BatchPlan {
    pub fn full(n: usize) -> Self {
        Self {
            batches: vec![(0..n).collect()],
        }
    }

    /// True if the batches are non-empty, disjoint and cover `0..n`.
    pub fn is_partition_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for batch in &self.batches {
            if batch.is_empty() {
                return false;
            }
            for &i in batch {
                if i >= n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

fn dist2(x: MatRef<'_, f64>, i: usize, center: &[f64]) -> f64 {
    center
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let d = x.read(i, j) - c;
            d * d
        })
        .sum()
}

fn row(x: MatRef<'_, f64>, i: usize) -> Vec<f64> {
    (0..x.ncols()).map(|j| x.read(i, j)).collect()
}

fn nearest(x: MatRef<'_, f64>, i: usize, centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centers.iter().enumerate() {
        let d = dist2(x, i, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// k-means++ seeding followed by Lloyd iterations.
pub fn kmeans(x: MatRef<'_, f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = x.nrows();
    if k == 0 || k > n {
        return Err(Error::usage(format!("cluster count {k} must lie in 1..={n}")));
    }
    let mut rng = RandomStream::new(seed, streams::KMEANS);
    let mut centers = vec![row(x, rng.index(n))];
    let mut d2: Vec<f64> = (0..n).map(|i| dist2(x, i, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.index(n)
        };
        let c = row(x, pick);
        for (i, v) in d2.iter_mut().enumerate() {
            *v = v.min(dist2(x, i, &c));
        }
        centers.push(c);
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        let mut cost = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest(x, i, &centers);
            cost[i] = d;
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
        }
        // Re-seed empty clusters from the point farthest from its center.
        loop {
            let mut counts = vec![0usize; k];
            for &a in &assign {
                counts[a] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let far = (0..n)
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(b.cmp(&a)))
                .ok_or_else(|| Error::Internal("no point available to re-seed a cluster".into()))?;
            centers[empty] = row(x, far);
            assign[far] = empty;
            cost[far] = 0.0;
            changed = true;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assign[i] == c).collect();
            for (j, v) in center.iter_mut().enumerate() {
                *v = members.iter().map(|&i| x.read(i, j)).sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(assign)
}

/// One batch per k-means cluster, ordered by cluster index, indices ascending.
pub fn precluster_minibatches(x: MatRef<'_, f64>, k: usize, seed: u64) -> Result<BatchPlan> {
    let assign = kmeans(x, k, seed)?;
    let mut batches = vec![Vec::new(); k];
    for (i, c) in assign.into_iter().enumerate() {
        batches[c].push(i);
    }
    Ok(BatchPlan { batches })
}
