//! Autocorrelation analysis for finite-state continuous-time Markov chains.

use ndarray::{array, Array1, Array2};
use ndarray_linalg::{c64, Eig};

/// Probe: eigendecomposition of a 2-state generator.
pub fn probe() -> (f64, f64) {
    let q: Array2<f64> = array![[-1.0, 1.0], [3.0, -3.0]];
    let (vals, _vecs): (Array1<c64>, Array2<c64>) = q.eig().unwrap();
    let mut re: Vec<f64> = vals.iter().map(|z| z.re).collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (re[0], re[1])
}
