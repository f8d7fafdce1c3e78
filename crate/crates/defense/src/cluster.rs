//! Deterministic 2-means over embedding vectors.
//!
//! Lloyd's iteration with a fixed initialization: the two seeds are the
//! input pair at maximal Euclidean distance (ties resolved by the lowest
//! index pair). Assignment ties go to cluster 0. An emptied cluster is
//! re-seeded with the point farthest from the surviving centroid (ties to
//! the lowest index). Iteration stops at an assignment fixpoint or after
//! `max_iters` rounds. No randomness anywhere, so cluster memberships are
//! a pure function of the input.

use ragward_core::EmbeddingVector;

use crate::config::DefenseError;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean_of(vectors: &[EmbeddingVector], members: &[usize], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for &i in members {
        for (o, v) in out.iter_mut().zip(&vectors[i].values) {
            *o += v;
        }
    }
    let n = members.len() as f64;
    for o in &mut out {
        *o /= n;
    }
    out
}

/// Cluster `vectors` into two groups. Returns the per-vector assignment
/// (0 or 1) and the two final centroids.
pub fn kmeans2(
    vectors: &[EmbeddingVector],
    max_iters: usize,
) -> Result<(Vec<usize>, [Vec<f64>; 2]), DefenseError> {
    let n = vectors.len();
    if n < 2 {
        return Err(DefenseError::TooFewVectors(n));
    }
    let dim = vectors[0].dim();

    // Seed with the farthest pair, lowest index pair on ties.
    let (mut seed_a, mut seed_b, mut best) = (0usize, 1usize, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let d = dist2(&vectors[i].values, &vectors[j].values);
            if d > best {
                best = d;
                seed_a = i;
                seed_b = j;
            }
        }
    }
    let mut centroids = [vectors[seed_a].values.clone(), vectors[seed_b].values.clone()];

    let mut assignment: Vec<usize> = vec![0; n];
    let mut prev: Option<Vec<usize>> = None;
    for _ in 0..max_iters.max(1) {
        for (i, v) in vectors.iter().enumerate() {
            let d0 = dist2(&v.values, &centroids[0]);
            let d1 = dist2(&v.values, &centroids[1]);
            assignment[i] = usize::from(d1 < d0);
        }
        // Re-seed an emptied cluster with the point farthest from the
        // surviving centroid.
        for empty in 0..2 {
            if assignment.iter().all(|&a| a != empty) {
                let full = 1 - empty;
                let far = (0..n)
                    .max_by(|&i, &j| {
                        dist2(&vectors[i].values, &centroids[full])
                            .partial_cmp(&dist2(&vectors[j].values, &centroids[full]))
                            .unwrap()
                            .then(j.cmp(&i))
                    })
                    .unwrap();
                assignment[far] = empty;
            }
        }
        if prev.as_deref() == Some(assignment.as_slice()) {
            break;
        }
        prev = Some(assignment.clone());
        for cluster in 0..2 {
            let members: Vec<usize> =
                (0..n).filter(|&i| assignment[i] == cluster).collect();
            centroids[cluster] = mean_of(vectors, &members, dim);
        }
    }

    for cluster in 0..2 {
        let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == cluster).collect();
        if !members.is_empty() {
            centroids[cluster] = mean_of(vectors, &members, dim);
        }
    }
    Ok((assignment, centroids))
}
