//! Chain definition and validation: state values, generator matrix,
//! probability vectors, and the stationary distribution.
//!
//! A generator matrix `Q` has nonnegative off-diagonal rates and zero row
//! sums; `exp(Q*tau)` is then the transition-probability matrix over lag
//! `tau`. Validation rejects bad input outright, it never repairs or
//! renormalizes: a row sum of -0.5 is a modeling error, not noise.
//!
//! All types here are immutable after construction and every operation is a
//! pure function, so values can be shared freely across threads.

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::Solve;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for generator row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Absolute tolerance for probability vectors summing to one.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Per-component residual bound on `pi * Q = 0` for the stationary solve.
pub const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;

/// Ordered list of the numeric values the process takes in each state.
///
/// Values are arbitrary distinct finite reals so the same code path serves
/// unit chains (`{+1, -1}`), positive spaces (`{1, 2, ..., N}`), and
/// symmetric spaces (`{-N, ..., -1, +1, ..., +N}`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    values: Vec<f64>,
}

impl StateSpace {
    /// Validates `N >= 2`, finiteness, and pairwise distinctness.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidStateSpace(format!(
                "need at least 2 states, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidStateSpace(format!("non-finite value {v}")));
        }
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                if values[i] == values[j] {
                    return Err(Error::InvalidStateSpace(format!(
                        "duplicate value {} at indices {i} and {j}",
                        values[i]
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    /// The two-state `{+1, -1}` space.
    pub fn unit() -> Self {
        Self {
            values: vec![1.0, -1.0],
        }
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// State values in index order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_array(&self) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.values)
    }
}

/// A probability distribution over the state indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    /// Validates entries in `[0, 1]` and total mass 1 within [`PROB_SUM_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidProbVector(format!(
                "need at least 2 entries, got {}",
                probs.len()
            )));
        }
        for (i, p) in probs.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                return Err(Error::InvalidProbVector(format!(
                    "entry {i} = {p} outside [0, 1]"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidProbVector(format!(
                "entries sum to {sum} (residual {:e})",
                sum - 1.0
            )));
        }
        Ok(Self { probs })
    }

    /// The uniform distribution on `n` states.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub(crate) fn as_array(&self) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.probs)
    }
}

/// A validated generator (rate) matrix together with its state values.
///
/// Invariants enforced at construction:
/// - square, dimension matching the state space;
/// - off-diagonal entries nonnegative, diagonal nonpositive;
/// - row sums zero within [`ROW_SUM_TOL`] (absolute);
/// - irreducible: the directed graph with an edge `i -> j` wherever
///   `q_ij > 0` is strongly connected.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    entries: Array2<f64>,
    states: StateSpace,
}

impl GeneratorMatrix {
    /// Validates a raw rate matrix against every generator invariant.
    pub fn new(raw: Array2<f64>, states: StateSpace) -> Result<Self> {
        let (rows, cols) = raw.dim();
        if rows != cols {
            return Err(Error::NonSquare { rows, cols });
        }
        if rows != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: rows,
            });
        }
        for ((i, j), &v) in raw.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite rate q[{i}][{j}] = {v}"
                )));
            }
            if i != j && v < 0.0 {
                return Err(Error::NegativeOffDiagonal {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
        // Report the worst offending row, not the first.
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..rows {
            let residual: f64 = raw.row(i).sum();
            if residual.abs() > ROW_SUM_TOL {
                match worst {
                    Some((_, r)) if r.abs() >= residual.abs() => {}
                    _ => worst = Some((i, residual)),
                }
            }
        }
        if let Some((row, residual)) = worst {
            return Err(Error::RowSumNonZero { row, residual });
        }
        check_strongly_connected(&raw)?;
        Ok(Self {
            entries: raw,
            states,
        })
    }

    /// The two-state chain with generator `[[-alpha, alpha], [beta, -beta]]`
    /// over state values `{+1, -1}`.
    pub fn unit(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "unit chain rates must be positive finite, got alpha={alpha}, beta={beta}"
            )));
        }
        Self::new(
            ndarray::array![[-alpha, alpha], [beta, -beta]],
            StateSpace::unit(),
        )
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    /// Exit rate `|q_ii|` of a state.
    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.entries[[i, i]]
    }

    /// Largest exit rate, `max_i |q_ii|`.
    pub fn max_exit_rate(&self) -> f64 {
        (0..self.n()).map(|i| self.exit_rate(i)).fold(0.0, f64::max)
    }
}

/// Strong connectivity of the positive-rate digraph, checked structurally:
/// every state must be reachable from state 0 and state 0 from every state.
fn check_strongly_connected(q: &Array2<f64>) -> Result<()> {
    let n = q.nrows();
    let forward = reach_from(q, 0, false);
    if let Some(v) = (0..n).find(|&v| !forward[v]) {
        return Err(Error::NotIrreducible { from: 0, to: v });
    }
    let backward = reach_from(q, 0, true);
    if let Some(v) = (0..n).find(|&v| !backward[v]) {
        return Err(Error::NotIrreducible { from: v, to: 0 });
    }
    Ok(())
}

fn reach_from(q: &Array2<f64>, start: usize, reversed: bool) -> Vec<bool> {
    let n = q.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            let rate = if reversed { q[[v, u]] } else { q[[u, v]] };
            if u != v && rate > 0.0 && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Solves `pi * Q = 0`, `sum(pi) = 1` for the unique stationary distribution.
///
/// One row of the transposed system is replaced by the all-ones normalization
/// equation, which is nonsingular for an irreducible generator. The solution
/// is verified: residual per component at most [`STATIONARY_RESIDUAL_TOL`]
/// and every entry strictly positive.
pub fn stationary_distribution(q: &GeneratorMatrix) -> Result<ProbVector> {
    let n = q.n();
    let mut system = q.entries().t().to_owned();
    for j in 0..n {
        system[[n - 1, j]] = 1.0;
    }
    let mut rhs = Array1::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = system
        .solve(&rhs)
        .map_err(|e| Error::SingularSystem(e.to_string()))?;

    if pi.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::SingularSystem(format!(
            "nonpositive component in solution {pi}"
        )));
    }
    let residual = pi.dot(q.entries());
    let max_residual = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if max_residual > STATIONARY_RESIDUAL_TOL {
        return Err(Error::SingularSystem(format!(
            "pi*Q residual {max_residual:e} exceeds {STATIONARY_RESIDUAL_TOL:e}"
        )));
    }
    ProbVector::new(pi.to_vec()).map_err(|e| Error::SingularSystem(e.to_string()))
}

/// Mean of the state values under a distribution, `sum_i s_i * p_i`.
pub fn mean_value(dist: &ProbVector, states: &StateSpace) -> Result<f64> {
    if dist.len() != states.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            got: dist.len(),
        });
    }
    Ok(dist
        .probs()
        .iter()
        .zip(states.values())
        .map(|(p, s)| p * s)
        .sum())
}

/// How a model file picks the initial distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialSpec {
    /// Start in equilibrium (the default when the key is absent).
    #[default]
    Stationary,
    /// Uniform over states.
    Uniform,
    /// Explicit probabilities, one per state.
    #[serde(untagged)]
    Probs(Vec<f64>),
}

/// On-disk model description.
///
/// ```json
/// {"states": [1.0, -1.0], "Q": [[-1.0, 1.0], [3.0, -3.0]], "initial": "stationary"}
/// ```
///
/// `initial` may be an explicit probability array, `"stationary"`, or
/// `"uniform"`; it defaults to `"stationary"` when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub states: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(default)]
    pub initial: InitialSpec,
}

impl ModelFile {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::ModelParse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    /// Validates the matrix and resolves the initial distribution.
    pub fn build(&self) -> Result<(GeneratorMatrix, ProbVector)> {
        let n = self.states.len();
        let states = StateSpace::new(self.states.clone())?;
        if self.q.len() != n || self.q.iter().any(|row| row.len() != n) {
            let rows = self.q.len();
            let cols = self.q.first().map_or(0, Vec::len);
            if rows != cols || self.q.iter().any(|row| row.len() != cols) {
                return Err(Error::NonSquare { rows, cols });
            }
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rows,
            });
        }
        let mut raw = Array2::<f64>::zeros((n, n));
        for (i, row) in self.q.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                raw[[i, j]] = v;
            }
        }
        let q = GeneratorMatrix::new(raw, states)?;
        let initial = match &self.initial {
            InitialSpec::Stationary => stationary_distribution(&q)?,
            InitialSpec::Uniform => ProbVector::uniform(n)?,
            InitialSpec::Probs(p) => {
                if p.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: p.len(),
                    });
                }
                ProbVector::new(p.clone())?
            }
        };
        Ok((q, initial))
    }

    /// Rebuilds the file form of a model, with an explicit initial vector.
    pub fn from_parts(q: &GeneratorMatrix, initial: &InitialSpec) -> Self {
        Self {
            states: q.states().values().to_vec(),
            q: q.entries()
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
            initial: initial.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn circulant3() -> GeneratorMatrix {
        GeneratorMatrix::new(
            array![[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]],
            StateSpace::new(vec![1.0, 2.0, 3.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn unit_chain_validates() {
        let q = GeneratorMatrix::unit(1.0, 3.0).unwrap();
        assert_eq!(q.n(), 2);
        assert_eq!(q.states().values(), &[1.0, -1.0]);
        assert_eq!(q.max_exit_rate(), 3.0);
    }

    #[test]
    fn zero_matrix_is_not_irreducible() {
        let err = GeneratorMatrix::new(Array2::zeros((2, 2)), StateSpace::unit()).unwrap_err();
        assert!(matches!(err, Error::NotIrreducible { .. }));
    }

    #[test]
    fn row_sum_violation_reports_worst_row_and_residual() {
        let err = GeneratorMatrix::new(array![[-1.0, 0.5], [3.0, -3.0]], StateSpace::unit())
            .unwrap_err();
        match err {
            Error::RowSumNonZero { row, residual } => {
                assert_eq!(row, 0);
                assert_abs_diff_eq!(residual, -0.5, epsilon = 1e-15);
            }
            other => panic!("expected RowSumNonZero, got {other:?}"),
        }
    }

    #[test]
    fn negative_off_diagonal_rejected() {
        let err = GeneratorMatrix::new(array![[1.0, -1.0], [3.0, -3.0]], StateSpace::unit())
            .unwrap_err();
        assert!(matches!(
            err,
            Error::NegativeOffDiagonal { row: 0, col: 1, .. }
        ));
    }

    #[test]
    fn non_square_rejected() {
        let raw = Array2::<f64>::zeros((2, 3));
        let err = GeneratorMatrix::new(raw, StateSpace::unit()).unwrap_err();
        assert!(matches!(err, Error::NonSquare { rows: 2, cols: 3 }));
    }

    #[test]
    fn one_way_chain_reports_unreachable_pair() {
        // 0 -> 1 only; nothing returns to 0.
        let err = GeneratorMatrix::new(
            array![[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [0.0, 1.0, -1.0]],
            StateSpace::new(vec![1.0, 2.0, 3.0]).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotIrreducible { to: 0, .. }));
    }

    #[test]
    fn state_space_rejects_duplicates_and_non_finite() {
        assert!(StateSpace::new(vec![1.0, 1.0]).is_err());
        assert!(StateSpace::new(vec![1.0, f64::NAN]).is_err());
        assert!(StateSpace::new(vec![1.0]).is_err());
    }

    #[test]
    fn prob_vector_rejects_bad_mass() {
        assert!(ProbVector::new(vec![0.6, 0.6]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbVector::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn stationary_unit_chain() {
        // alpha=1, beta=3: solving the 2x2 system by hand gives
        // pi = (beta, alpha) / (alpha + beta) = (0.75, 0.25).
        let q = GeneratorMatrix::unit(1.0, 3.0).unwrap();
        let pi = stationary_distribution(&q).unwrap();
        assert_abs_diff_eq!(pi.probs()[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.probs()[1], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn stationary_symmetric_unit_chain() {
        let q = GeneratorMatrix::unit(2.0, 2.0).unwrap();
        let pi = stationary_distribution(&q).unwrap();
        assert_abs_diff_eq!(pi.probs()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.probs()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn stationary_circulant_is_uniform() {
        let q = circulant3();
        let pi = stationary_distribution(&q).unwrap();
        for &p in pi.probs() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-12);
        }
        // Verify by direct multiplication that pi * Q = 0.
        let residual = pi.as_array().dot(q.entries());
        for r in residual.iter() {
            assert!(r.abs() <= 1e-12);
        }
    }

    #[test]
    fn mean_values() {
        let unit = StateSpace::unit();
        let skew = ProbVector::new(vec![0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(mean_value(&skew, &unit).unwrap(), 0.5, epsilon = 1e-15);

        let fair = ProbVector::new(vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(mean_value(&fair, &unit).unwrap(), 0.0, epsilon = 1e-15);

        let three = StateSpace::new(vec![1.0, 2.0, 3.0]).unwrap();
        let third = ProbVector::uniform(3).unwrap();
        assert_abs_diff_eq!(mean_value(&third, &three).unwrap(), 2.0, epsilon = 1e-15);

        assert!(mean_value(&fair, &three).is_err());
    }

    #[test]
    fn model_file_roundtrip_and_defaults() {
        let json = r#"{"states": [1.0, -1.0], "Q": [[-1.0, 1.0], [3.0, -3.0]]}"#;
        let file = ModelFile::from_json(json).unwrap();
        assert_eq!(file.initial, InitialSpec::Stationary);
        let (q, pi0) = file.build().unwrap();
        assert_eq!(q.n(), 2);
        assert_abs_diff_eq!(pi0.probs()[0], 0.75, epsilon = 1e-12);

        let echoed = ModelFile::from_json(&file.to_json()).unwrap();
        assert_eq!(file, echoed);
    }

    #[test]
    fn model_file_explicit_and_named_initials() {
        let json = r#"{"states": [1.0, -1.0], "Q": [[-1.0, 1.0], [3.0, -3.0]], "initial": [0.9, 0.1]}"#;
        let (_, pi0) = ModelFile::from_json(json).unwrap().build().unwrap();
        assert_eq!(pi0.probs(), &[0.9, 0.1]);

        let json = r#"{"states": [1.0, -1.0], "Q": [[-1.0, 1.0], [3.0, -3.0]], "initial": "uniform"}"#;
        let (_, pi0) = ModelFile::from_json(json).unwrap().build().unwrap();
        assert_eq!(pi0.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn model_file_bad_initial_length() {
        let json =
            r#"{"states": [1.0, -1.0], "Q": [[-1.0, 1.0], [3.0, -3.0]], "initial": [1.0]}"#;
        assert!(ModelFile::from_json(json).unwrap().build().is_err());
    }
}
