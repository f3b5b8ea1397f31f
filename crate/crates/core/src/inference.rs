//! Machine pipeline: lexicon-count expressed-emotion probabilities, a
//! similarity-normalized likelihood matrix, the forward model t = L·x, and
//! recovery of experienced-emotion probabilities by least squares on the
//! probability simplex.
//!
//! The solver is a primal active-set method for
//! min ||Lx - t||^2 s.t. 1'x = 1, x >= 0: solve the equality-constrained
//! subproblem on the current support, step to the nearest bound when the
//! subproblem leaves the feasible set, and release the active coordinate
//! with the most negative multiplier. Termination is certified by the KKT
//! system 2L'(Lx - t) + lambda·1 - mu = 0, mu >= 0, mu_i x_i = 0, with the
//! residuals reported in [`SolverDiagnostics`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::LabelSet;

const SIMPLEX_TOL: f64 = 1e-9;
const SVD_EPS: f64 = 1e-12;
const FEAS_EPS: f64 = 1e-12;

/// Word lists signalling each expressed emotion. Word sets are disjoint:
/// a word indicates exactly one emotion.
#[derive(Debug, Clone)]
pub struct Lexicon {
    expressed: LabelSet,
    word_to_label: HashMap<String, usize>,
}

impl Lexicon {
    pub fn new<I, S, W>(entries: I, expressed: &LabelSet) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<W>)>,
        S: AsRef<str>,
        W: AsRef<str>,
    {
        let mut word_to_label: HashMap<String, usize> = HashMap::new();
        for (label, words) in entries {
            let idx = expressed.require(label.as_ref())?;
            if words.is_empty() {
                return Err(Error::EmptySynset(label.as_ref().to_string()));
            }
            for w in words {
                let w = w.as_ref().to_lowercase();
                if let Some(&other) = word_to_label.get(&w) {
                    if other != idx {
                        return Err(Error::AmbiguousWord {
                            word: w,
                            first: expressed.label(other).to_string(),
                            second: label.as_ref().to_string(),
                        });
                    }
                } else {
                    word_to_label.insert(w, idx);
                }
            }
        }
        Ok(Lexicon {
            expressed: expressed.clone(),
            word_to_label,
        })
    }

    pub fn expressed_space(&self) -> &LabelSet {
        &self.expressed
    }
}

/// Nonnegative vector summing to 1 over a label space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexVector {
    p: Vec<f64>,
    labels: LabelSet,
}

impl SimplexVector {
    pub fn new(p: Vec<f64>, labels: LabelSet) -> Result<Self> {
        if p.len() != labels.len() {
            return Err(Error::LabelSetMismatch {
                left: p.len(),
                right: labels.len(),
            });
        }
        for (i, &v) in p.iter().enumerate() {
            if v < -SIMPLEX_TOL {
                return Err(Error::NegativeEntry { index: i, value: v });
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotSimplex(sum));
        }
        let p = p.into_iter().map(|v| v.max(0.0)).collect();
        Ok(SimplexVector { p, labels })
    }

    pub fn uniform(labels: LabelSet) -> Self {
        let n = labels.len();
        SimplexVector {
            p: vec![1.0 / n as f64; n],
            labels,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn label_space(&self) -> &LabelSet {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Raw relatedness r\[expressed j\]\[experienced i\], rows = expressed.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    expressed: LabelSet,
    experienced: LabelSet,
    r: DMatrix<f64>,
}

impl SimilarityMatrix {
    /// `rows` is row-major with one row per expressed label.
    pub fn new(rows: Vec<Vec<f64>>, expressed: LabelSet, experienced: LabelSet) -> Result<Self> {
        let m = expressed.len();
        let n = experienced.len();
        if rows.len() != m || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch {
                rows: rows.len(),
                cols: rows.first().map_or(0, |r| r.len()),
                expected_rows: m,
                expected_cols: n,
            });
        }
        for (j, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        index: j * n + i,
                        value: v,
                    });
                }
            }
        }
        let r = DMatrix::from_fn(m, n, |j, i| rows[j][i]);
        for i in 0..n {
            if r.column(i).iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroColumn(experienced.label(i).to_string()));
            }
        }
        Ok(SimilarityMatrix {
            expressed,
            experienced,
            r,
        })
    }

    pub fn expressed_space(&self) -> &LabelSet {
        &self.expressed
    }

    pub fn experienced_space(&self) -> &LabelSet {
        &self.experienced
    }
}

/// Column-stochastic matrix L\[j\]\[i\] = P(expressed j | experienced i).
#[derive(Debug, Clone)]
pub struct LikelihoodMatrix {
    expressed: LabelSet,
    experienced: LabelSet,
    l: DMatrix<f64>,
}

impl LikelihoodMatrix {
    pub fn new(rows: Vec<Vec<f64>>, expressed: LabelSet, experienced: LabelSet) -> Result<Self> {
        let s = SimilarityMatrix::new(rows, expressed, experienced)?;
        for i in 0..s.experienced.len() {
            let sum: f64 = s.r.column(i).sum();
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::NotSimplex(sum));
            }
        }
        Ok(LikelihoodMatrix {
            expressed: s.expressed,
            experienced: s.experienced,
            l: s.r,
        })
    }

    pub fn identity(labels: LabelSet) -> Self {
        let n = labels.len();
        LikelihoodMatrix {
            expressed: labels.clone(),
            experienced: labels,
            l: DMatrix::identity(n, n),
        }
    }

    pub fn expressed_space(&self) -> &LabelSet {
        &self.expressed
    }

    pub fn experienced_space(&self) -> &LabelSet {
        &self.experienced
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn entry(&self, expressed_j: usize, experienced_i: usize) -> f64 {
        self.l[(expressed_j, experienced_i)]
    }
}

/// KKT certificate attached to every solution of [`solve_experienced`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub objective: f64,
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub stationarity_residual: f64,
    pub complementarity_residual: f64,
    pub iterations: usize,
}

/// Word-count expressed-emotion probabilities with additive smoothing.
/// Tokenization is case-folding plus splitting on non-alphanumeric runs.
pub fn expressed_probs(text: &str, lex: &Lexicon, smoothing_alpha: f64) -> Result<SimplexVector> {
    if smoothing_alpha < 0.0 {
        return Err(Error::InvalidConfig {
            field: "smoothing_alpha",
            message: format!("must be nonnegative, got {smoothing_alpha}"),
        });
    }
    let m = lex.expressed.len();
    let mut counts = vec![0.0f64; m];
    let mut tokens = 0usize;
    for token in text
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        tokens += 1;
        if let Some(&idx) = lex.word_to_label.get(token) {
            counts[idx] += 1.0;
        }
    }
    if tokens == 0 {
        return Err(Error::EmptyInput("transcript"));
    }
    let raw: f64 = counts.iter().sum();
    if raw == 0.0 && smoothing_alpha == 0.0 {
        return Err(Error::NoSignal);
    }
    let total = raw + smoothing_alpha * m as f64;
    let p = counts
        .iter()
        .map(|&c| (c + smoothing_alpha) / total)
        .collect();
    SimplexVector::new(p, lex.expressed.clone())
}

/// Normalize each experienced column of the similarity matrix over the
/// expressed labels, yielding P(expressed | experienced).
pub fn likelihood_from_similarity(s: &SimilarityMatrix) -> Result<LikelihoodMatrix> {
    let mut l = s.r.clone();
    for i in 0..s.experienced.len() {
        let sum: f64 = l.column(i).sum();
        if sum == 0.0 {
            return Err(Error::ZeroColumn(s.experienced.label(i).to_string()));
        }
        for j in 0..s.expressed.len() {
            l[(j, i)] /= sum;
        }
    }
    Ok(LikelihoodMatrix {
        expressed: s.expressed.clone(),
        experienced: s.experienced.clone(),
        l,
    })
}

/// Total-probability forward model t = L·x.
pub fn forward_model(l: &LikelihoodMatrix, x: &SimplexVector) -> Result<SimplexVector> {
    if x.labels != l.experienced {
        return Err(Error::LabelSetMismatch {
            left: x.len(),
            right: l.experienced.len(),
        });
    }
    let xv = DVector::from_column_slice(&x.p);
    let t = &l.l * xv;
    SimplexVector::new(t.iter().copied().collect(), l.expressed.clone())
}

/// Recover the experienced distribution from an expressed one:
/// min ||Lx - t||^2 over the simplex, with KKT residuals certified at `tol`.
pub fn solve_experienced(
    l: &LikelihoodMatrix,
    t: &SimplexVector,
    tol: f64,
) -> Result<(SimplexVector, SolverDiagnostics)> {
    if t.labels != l.expressed {
        return Err(Error::LabelSetMismatch {
            left: t.len(),
            right: l.expressed.len(),
        });
    }
    if tol <= 0.0 {
        return Err(Error::InvalidConfig {
            field: "tol",
            message: format!("must be positive, got {tol}"),
        });
    }
    let a = &l.l;
    let n = a.ncols();
    let tv = DVector::from_column_slice(&t.p);
    let cap = 10 * n * n;

    let mut free: Vec<usize> = (0..n).collect();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut iterations = 0usize;

    loop {
        iterations += 1;
        if iterations > cap {
            let diag = kkt_diagnostics(a, &tv, &x, 0.0, &free, iterations);
            return Err(Error::SolverFailure {
                iterations,
                diagnostics: Box::new(diag),
            });
        }

        // Equality-constrained subproblem on the free support, solved in
        // bordered-KKT form; SVD gives the minimum-norm solution when the
        // system is singular.
        let f = free.len();
        let af = a.select_columns(free.iter());
        let gram = 2.0 * af.transpose() * &af;
        let mut m = DMatrix::zeros(f + 1, f + 1);
        m.view_mut((0, 0), (f, f)).copy_from(&gram);
        for i in 0..f {
            m[(i, f)] = 1.0;
            m[(f, i)] = 1.0;
        }
        let mut rhs = DVector::zeros(f + 1);
        rhs.rows_mut(0, f)
            .copy_from(&(2.0 * af.transpose() * &tv));
        rhs[f] = 1.0;
        let svd = m.svd(true, true);
        let sol = svd
            .solve(&rhs, SVD_EPS)
            .map_err(|msg| Error::InvalidConfig {
                field: "solver",
                message: msg.to_string(),
            })?;
        let xf: Vec<f64> = (0..f).map(|i| sol[i]).collect();
        let lambda = sol[f];

        if xf.iter().all(|&v| v >= -FEAS_EPS) {
            // Feasible subproblem solution: adopt it and check multipliers.
            let mut xn = DVector::zeros(n);
            for (i, &idx) in free.iter().enumerate() {
                xn[idx] = xf[i].max(0.0);
            }
            x = xn;
            let diag = kkt_diagnostics(a, &tv, &x, lambda, &free, iterations);
            let blocked: Vec<usize> = (0..n).filter(|i| !free.contains(i)).collect();
            let mut release: Option<(usize, f64)> = None;
            for &i in &blocked {
                let mu_i = diag.mu[i];
                if mu_i < -tol {
                    match release {
                        Some((_, best)) if mu_i >= best => {}
                        _ => release = Some((i, mu_i)),
                    }
                }
            }
            match release {
                None => {
                    let x = SimplexVector::new(x.iter().copied().collect(), l.experienced.clone())?;
                    return Ok((x, diag));
                }
                Some((i, _)) => {
                    free.push(i);
                    free.sort_unstable();
                }
            }
        } else {
            // Step from the current iterate toward the subproblem solution
            // until the first coordinate hits zero; block it.
            let mut alpha = 1.0f64;
            let mut blocker = 0usize;
            for (i, &idx) in free.iter().enumerate() {
                if xf[i] < -FEAS_EPS {
                    let cur = x[idx];
                    let step = if cur - xf[i] > 0.0 {
                        cur / (cur - xf[i])
                    } else {
                        0.0
                    };
                    if step < alpha {
                        alpha = step;
                        blocker = i;
                    }
                }
            }
            for (i, &idx) in free.iter().enumerate() {
                x[idx] += alpha * (xf[i] - x[idx]);
            }
            let idx = free[blocker];
            x[idx] = 0.0;
            free.remove(blocker);
        }
    }
}

/// Assemble the KKT certificate at x: mu vanishes on the free set and picks
/// up the stationarity gap on active coordinates.
fn kkt_diagnostics(
    a: &DMatrix<f64>,
    t: &DVector<f64>,
    x: &DVector<f64>,
    lambda: f64,
    free: &[usize],
    iterations: usize,
) -> SolverDiagnostics {
    let n = a.ncols();
    let residual = a * x - t;
    let objective = residual.norm_squared();
    let grad = 2.0 * a.transpose() * residual;
    let mut mu = vec![0.0f64; n];
    for i in 0..n {
        if !free.contains(&i) {
            mu[i] = grad[i] + lambda;
        }
    }
    let stationarity_residual = (0..n)
        .map(|i| (grad[i] + lambda - mu[i]).abs())
        .fold(0.0f64, f64::max);
    let complementarity_residual = (0..n)
        .map(|i| (mu[i] * x[i]).abs())
        .fold(0.0f64, f64::max);
    SolverDiagnostics {
        objective,
        lambda,
        mu,
        stationarity_residual,
        complementarity_residual,
        iterations,
    }
}

/// Labels by descending probability, ties lexicographic by label index.
pub fn experienced_top_k(x: &SimplexVector, k: usize) -> Result<Vec<usize>> {
    let n = x.len();
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        x.p[b]
            .partial_cmp(&x.p[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    Ok(idx)
}

/// Number of entries above `eps`.
pub fn support_size(x: &SimplexVector, eps: f64) -> usize {
    x.p.iter().filter(|&&v| v > eps).count()
}
