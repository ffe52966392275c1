//! Leader-follower communication topology.
//!
//! Followers are indexed `0..n` inside the matrices (agent `i + 1` in user
//! facing output); the leader is not part of any `n x n` matrix and its
//! links live only in the pinning diagonal. `a(i, j) > 0` means follower `i`
//! receives information from follower `j`.

use std::collections::VecDeque;

use thiserror::Error;

use crate::numeric::{self, Complex64, DenseMatrix, NumericError};

/// Absolute tolerance for the balancedness test.
pub const BALANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("topology needs at least one follower")]
    Empty,
    #[error("adjacency row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("pinning vector has {len} entries, expected {expected}")]
    PinningLength { len: usize, expected: usize },
    #[error("adjacency[{row}][{col}] = {value}: self-loops are not allowed")]
    SelfLoop { row: usize, col: usize, value: f64 },
    #[error("adjacency[{row}][{col}] = {value}: weights must be finite and nonnegative")]
    BadWeight { row: usize, col: usize, value: f64 },
    #[error("pinning[{index}] = {value}: entries must be 0 or 1")]
    BadPinning { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyMatrices {
    pub n_followers: usize,
    pub adjacency: DenseMatrix,
    pub pinning: DenseMatrix,
    pub degree: DenseMatrix,
    pub laplacian: DenseMatrix,
    pub grounded: DenseMatrix,
}

pub fn build_topology<R: AsRef<[f64]>>(
    adjacency: &[R],
    pinning_diag: &[f64],
) -> Result<TopologyMatrices, GraphError> {
    let n = adjacency.len();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    for (row, r) in adjacency.iter().enumerate() {
        let r = r.as_ref();
        if r.len() != n {
            return Err(GraphError::NotSquare {
                row,
                len: r.len(),
                expected: n,
            });
        }
        for (col, &value) in r.iter().enumerate() {
            if row == col && value != 0.0 {
                return Err(GraphError::SelfLoop { row, col, value });
            }
            if !value.is_finite() || value < 0.0 {
                return Err(GraphError::BadWeight { row, col, value });
            }
        }
    }
    if pinning_diag.len() != n {
        return Err(GraphError::PinningLength {
            len: pinning_diag.len(),
            expected: n,
        });
    }
    if let Some((index, &value)) = pinning_diag
        .iter()
        .enumerate()
        .find(|(_, v)| **v != 0.0 && **v != 1.0)
    {
        return Err(GraphError::BadPinning { index, value });
    }

    let adjacency = DenseMatrix::from_rows(adjacency).expect("validated above");
    let degrees: Vec<f64> = (0..n).map(|i| adjacency.row(i).iter().sum()).collect();
    let degree = DenseMatrix::diagonal(&degrees);
    let pinning = DenseMatrix::diagonal(pinning_diag);
    let laplacian = degree.sub(&adjacency).expect("same shape");
    let grounded = laplacian.add(&pinning).expect("same shape");

    Ok(TopologyMatrices {
        n_followers: n,
        adjacency,
        pinning,
        degree,
        laplacian,
        grounded,
    })
}

impl TopologyMatrices {
    /// Followers that follower `i` listens to.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n_followers)
            .filter(|&j| self.adjacency[(i, j)] > 0.0)
            .collect()
    }

    pub fn pinned(&self, i: usize) -> bool {
        self.pinning[(i, i)] > 0.0
    }

    /// True iff every follower is reachable from the leader along
    /// information-flow arcs (`j -> i` whenever `a(i, j) > 0`).
    pub fn has_leader_rooted_spanning_tree(&self) -> bool {
        let n = self.n_followers;
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| self.pinned(i)).collect();
        for &i in &queue {
            seen[i] = true;
        }
        while let Some(j) = queue.pop_front() {
            for i in 0..n {
                if !seen[i] && self.adjacency[(i, j)] > 0.0 {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `L·1 = 0` and `1ᵀ·L = 0` within [`BALANCE_TOL`].
    pub fn is_balanced(&self) -> bool {
        let n = self.n_followers;
        let l = &self.laplacian;
        (0..n).all(|i| {
            let row: f64 = (0..n).map(|j| l[(i, j)]).sum();
            let col: f64 = (0..n).map(|j| l[(j, i)]).sum();
            row.abs() <= BALANCE_TOL && col.abs() <= BALANCE_TOL
        })
    }

    pub fn laplacian_eigenvalues(&self) -> Result<Vec<Complex64>, NumericError> {
        numeric::eigenvalues(&self.laplacian)
    }

    /// Real part of the second smallest Laplacian eigenvalue, if there is one.
    pub fn lambda2(&self) -> Result<Option<f64>, NumericError> {
        Ok(self.laplacian_eigenvalues()?.get(1).map(|c| c.re))
    }

    pub fn grounded_inverse(&self) -> Result<DenseMatrix, NumericError> {
        numeric::invert(&self.grounded)
    }
}

pub fn has_leader_rooted_spanning_tree(topology: &TopologyMatrices) -> bool {
    topology.has_leader_rooted_spanning_tree()
}

pub fn is_balanced(topology: &TopologyMatrices) -> bool {
    topology.is_balanced()
}

/// Adjacency and pinning of the four-follower example network.
pub fn paper_example() -> (Vec<Vec<f64>>, Vec<f64>) {
    (
        vec![
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ],
        vec![1.0, 1.0, 0.0, 0.0],
    )
}
