//! Restricted inner problem: `max ⟨c, x⟩` subject to `‖A_F x‖₂ ≤ 1` for each
//! family `F` in a finite set, solved as a second-order cone program.
//!
//! With slack `s_F = (1, A_F x)` in a second-order cone, the conic dual
//! multipliers `z_F = (z₀, z̄)` satisfy `Σ_F A_Fᵀ(-z̄_F) = c`, so `y_F = -z̄_F`
//! is a decomposition of `c` with cost `Σ ‖y_F‖ ≤ Σ z₀`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::{Error, Result};
use crate::tree::{SegmentFamily, Tree};

#[derive(Clone, Debug)]
pub struct InnerSolution {
    /// Optimal value of the restricted problem (solver precision).
    pub value: f64,
    /// Primal maximizer indexed by node id.
    pub x: Vec<f64>,
    /// One weight vector per family, one entry per segment.
    pub weights: Vec<Vec<f64>>,
    pub status_reduced: bool,
}

/// Solves the restricted problem on `tree` with dense objective `c`
/// (indexed by node id).
pub fn solve_inner(tree: &Tree, c: &[f64], families: &[SegmentFamily]) -> Result<InnerSolution> {
    let n = tree.len();
    if c.len() != n {
        return Err(Error::InvalidArgument(format!(
            "objective has {} entries for {} nodes",
            c.len(),
            n
        )));
    }
    if n == 0 {
        return Ok(InnerSolution {
            value: 0.0,
            x: Vec::new(),
            weights: vec![Vec::new(); families.len()],
            status_reduced: false,
        });
    }

    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut b = Vec::new();
    let mut cones = Vec::new();
    let mut row = 0;
    for fam in families {
        b.push(1.0);
        row += 1;
        for seg in fam.segments() {
            for t in seg.nodes(tree) {
                rows.push(row);
                cols.push(t.0);
                vals.push(-1.0);
            }
            b.push(0.0);
            row += 1;
        }
        cones.push(SupportedConeT::SecondOrderConeT(fam.len() + 1));
    }
    let m = row;
    let a = CscMatrix::new_from_triplets(m, n, rows, cols, vals);
    let p = CscMatrix::<f64>::zeros((n, n));
    let q: Vec<f64> = c.iter().map(|v| -v).collect();

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(300)
        .tol_gap_abs(1e-11)
        .tol_gap_rel(1e-11)
        .tol_feas(1e-11)
        .tol_ktratio(1e-9)
        .build()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
        .map_err(|e| Error::Solver(e.to_string()))?;
    solver.solve();

    let sol = &solver.solution;
    let status_reduced = match sol.status {
        SolverStatus::Solved => false,
        SolverStatus::AlmostSolved
        | SolverStatus::MaxIterations
        | SolverStatus::InsufficientProgress => true,
        other => return Err(Error::Solver(format!("{other:?}"))),
    };
    if sol.x.iter().chain(&sol.z).any(|v| !v.is_finite()) {
        return Err(Error::Solver("non-finite iterate".into()));
    }

    let mut weights = Vec::with_capacity(families.len());
    let mut offset = 0;
    for fam in families {
        let k = fam.len();
        weights.push(
            sol.z[offset + 1..offset + 1 + k]
                .iter()
                .map(|z| -z)
                .collect(),
        );
        offset += k + 1;
    }
    let value = c.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
    Ok(InnerSolution {
        value,
        x: sol.x.clone(),
        weights,
        status_reduced,
    })
}
