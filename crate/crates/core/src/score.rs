//! Decomposable Gaussian network scores computed from sufficient statistics.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::ingest::ResponseTable;

/// Ridge added to a singular parent covariance block before giving up.
pub const RIDGE: f64 = 1e-8;

/// Sample size, means and ML covariance (denominator n).
#[derive(Clone, Debug)]
pub struct SufficientStats {
    n: usize,
    mean: Vec<f64>,
    cov: DMatrix<f64>,
}

impl SufficientStats {
    /// Two-pass mean and covariance over the table rows.
    pub fn from_table(table: &ResponseTable) -> Result<Self> {
        let idx: Vec<usize> = (0..table.n_rows()).collect();
        SufficientStats::from_rows_of(table, &idx)
    }

    /// Statistics of the rows at `rows` (duplicates count repeatedly).
    pub fn from_rows_of(table: &ResponseTable, rows: &[usize]) -> Result<Self> {
        let n = rows.len();
        let m = table.n_items();
        if n < 2 {
            return Err(Error::pre(format!("need at least 2 rows, got {n}")));
        }
        let mut mean = vec![0.0; m];
        for &i in rows {
            let r = table.row(i);
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::pre(format!("row {i} has missing values")));
            }
            for (acc, v) in mean.iter_mut().zip(r) {
                *acc += v;
            }
        }
        let nf = n as f64;
        mean.iter_mut().for_each(|v| *v /= nf);

        let mut cov = DMatrix::<f64>::zeros(m, m);
        let mut centered = vec![0.0; m];
        for &i in rows {
            for ((c, v), mu) in centered.iter_mut().zip(table.row(i)).zip(&mean) {
                *c = v - mu;
            }
            for a in 0..m {
                let ca = centered[a];
                for b in a..m {
                    cov[(a, b)] += ca * centered[b];
                }
            }
        }
        for a in 0..m {
            for b in a..m {
                let v = cov[(a, b)] / nf;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        Ok(SufficientStats { n, mean, cov })
    }

    pub fn from_parts(n: usize, mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::pre("covariance shape does not match mean length"));
        }
        Ok(SufficientStats { n, mean, cov })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }
}

/// Result of regressing one column on a set of others through the covariance.
#[derive(Clone, Debug)]
pub(crate) struct Regression {
    pub beta: Vec<f64>,
    /// ML residual variance (denominator n).
    pub residual_var: f64,
    pub ridged: bool,
}

/// Solves `cov[P,P] beta = cov[P,v]`. With `ridge`, a singular block is
/// retried once with [`RIDGE`] on the diagonal; `None` means still singular.
pub(crate) fn regress(cov: &DMatrix<f64>, node: usize, parents: &[usize], ridge: bool) -> Option<Regression> {
    let var = cov[(node, node)];
    if parents.is_empty() {
        return Some(Regression {
            beta: Vec::new(),
            residual_var: var.max(0.0),
            ridged: false,
        });
    }
    let k = parents.len();
    let block = DMatrix::from_fn(k, k, |a, b| cov[(parents[a], parents[b])]);
    let rhs = DVector::from_fn(k, |a, _| cov[(parents[a], node)]);
    let scale = (0..k).map(|a| block[(a, a)]).fold(0.0f64, f64::max).max(1.0);

    let solve = |m: DMatrix<f64>| -> Option<DVector<f64>> {
        // Cholesky accepts nearly singular blocks with vanishing pivots; treat
        // those as singular too.
        let chol = m.cholesky()?;
        let l = chol.l_dirty();
        let min_pivot = (0..k).map(|a| l[(a, a)] * l[(a, a)]).fold(f64::INFINITY, f64::min);
        if min_pivot.is_nan() || min_pivot <= 1e-12 * scale {
            return None;
        }
        Some(chol.solve(&rhs))
    };

    let (beta, ridged) = match solve(block.clone()) {
        Some(b) => (b, false),
        None if ridge => {
            let mut r = block;
            for a in 0..k {
                r[(a, a)] += RIDGE;
            }
            let b = r.cholesky()?.solve(&rhs);
            (b, true)
        }
        None => return None,
    };
    let explained = beta.dot(&rhs);
    Some(Regression {
        residual_var: (var - explained).max(0.0),
        beta: beta.iter().copied().collect(),
        ridged,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    #[default]
    Bic,
    Aic,
    LogLik,
}

/// Scores parent sets of single nodes against fixed statistics.
#[derive(Clone, Copy, Debug)]
pub struct Scorer<'a> {
    stats: &'a SufficientStats,
    kind: ScoreKind,
    ridge_fallback: bool,
}

impl<'a> Scorer<'a> {
    /// BIC with ridge fallback enabled.
    pub fn new(stats: &'a SufficientStats) -> Self {
        Scorer {
            stats,
            kind: ScoreKind::Bic,
            ridge_fallback: true,
        }
    }

    pub fn with_kind(mut self, kind: ScoreKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_ridge_fallback(mut self, on: bool) -> Self {
        self.ridge_fallback = on;
        self
    }

    pub fn stats(&self) -> &SufficientStats {
        self.stats
    }

    /// Maximised Gaussian log-likelihood of `node` given `parents`, minus the
    /// penalty for `parents.len() + 2` free parameters. Returns `-inf` when
    /// the parent block stays singular after the ridge retry.
    pub fn local(&self, node: usize, parents: &[usize]) -> Result<f64> {
        if parents.contains(&node) {
            return Err(Error::pre("a node cannot be its own parent"));
        }
        let reg = match regress(self.stats.cov(), node, parents, self.ridge_fallback) {
            Some(r) => r,
            None if self.ridge_fallback => return Ok(f64::NEG_INFINITY),
            None => return Err(Error::Numeric("singular parent covariance block".into())),
        };
        Ok(self.penalised(reg.residual_var, parents.len()))
    }

    pub(crate) fn penalised(&self, residual_var: f64, n_parents: usize) -> f64 {
        let n = self.stats.n() as f64;
        let var = residual_var.max(f64::MIN_POSITIVE);
        let loglik = -0.5 * n * ((2.0 * PI * var).ln() + 1.0);
        let params = n_parents as f64 + 2.0;
        match self.kind {
            ScoreKind::Bic => loglik - 0.5 * params * n.ln(),
            ScoreKind::Aic => loglik - params,
            ScoreKind::LogLik => loglik,
        }
    }

    /// Sum of local scores over every node of `dag`.
    pub fn graph(&self, dag: &Dag) -> Result<f64> {
        if dag.len() != self.stats.dim() {
            return Err(Error::pre("graph and statistics have different node counts"));
        }
        (0..dag.len()).map(|v| self.local(v, dag.parents(v))).sum()
    }
}

pub fn sufficient_stats(table: &ResponseTable) -> Result<SufficientStats> {
    SufficientStats::from_table(table)
}

/// Name-based BIC local score.
pub fn local_score(node: &str, parents: &[&str], stats: &SufficientStats, items: &[String]) -> Result<f64> {
    let find = |s: &str| {
        items
            .iter()
            .position(|i| i == s)
            .ok_or_else(|| Error::UnknownNode(s.to_string()))
    };
    let v = find(node)?;
    let ps = parents.iter().map(|p| find(p)).collect::<Result<Vec<_>>>()?;
    Scorer::new(stats).local(v, &ps)
}

pub fn graph_score(dag: &Dag, stats: &SufficientStats) -> Result<f64> {
    Scorer::new(stats).graph(dag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("X{i}")).collect()
    }

    fn table(rows: Vec<Vec<f64>>) -> ResponseTable {
        let k = rows[0].len();
        ResponseTable::from_rows(names(k), rows).unwrap()
    }

    #[test]
    fn identical_rows_have_zero_covariance() {
        let s = sufficient_stats(&table(vec![vec![2.0, 3.0], vec![2.0, 3.0]])).unwrap();
        assert!(s.cov().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_covariance() {
        let s = sufficient_stats(&table(vec![vec![0.0, 0.0], vec![1.0, 1.0]])).unwrap();
        for v in s.cov().iter() {
            assert_relative_eq!(*v, 0.25);
        }
        assert_eq!(s.mean(), [0.5, 0.5]);
    }

    #[test]
    fn covariance_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let s = sufficient_stats(&table(rows.clone())).unwrap();
        // Oracle: E[xy] - E[x]E[y] evaluated directly.
        for a in 0..3 {
            for b in 0..3 {
                let exy: f64 = rows.iter().map(|r| r[a] * r[b]).sum::<f64>() / 5.0;
                let ea: f64 = rows.iter().map(|r| r[a]).sum::<f64>() / 5.0;
                let eb: f64 = rows.iter().map(|r| r[b]).sum::<f64>() / 5.0;
                assert_relative_eq!(s.cov()[(a, b)], exy - ea * eb, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn too_few_rows() {
        assert!(sufficient_stats(&table(vec![vec![1.0]])).is_err());
    }

    #[test]
    fn empty_parent_set_closed_form() {
        let s = sufficient_stats(&table(vec![vec![1.0], vec![2.0], vec![4.0], vec![7.0]])).unwrap();
        let n = 4.0f64;
        let var = s.cov()[(0, 0)];
        let expected = n / 2.0 * (-(2.0 * PI * var).ln() - 1.0) - n.ln();
        assert_relative_eq!(Scorer::new(&s).local(0, &[]).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn singular_block_without_fallback_is_an_error() {
        // Column 1 duplicates column 0, so {0, 1} is singular as a parent set.
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let x = i as f64;
                vec![x, x, (x * 1.7).sin()]
            })
            .collect();
        let s = sufficient_stats(&table(rows)).unwrap();
        let strict = Scorer::new(&s).with_ridge_fallback(false);
        assert!(matches!(strict.local(2, &[0, 1]), Err(Error::Numeric(_))));
        let lenient = Scorer::new(&s).local(2, &[0, 1]).unwrap();
        assert!(lenient.is_finite() || lenient == f64::NEG_INFINITY);
    }

    #[test]
    fn own_parent_rejected() {
        let s = sufficient_stats(&table(vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]])).unwrap();
        assert!(Scorer::new(&s).local(0, &[0]).is_err());
    }
}
