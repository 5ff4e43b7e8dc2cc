use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::FeatureMatrix;
use crate::{Error, Result, FEATURE_NAMES, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test, two-sided.
pub fn group_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Degenerate("each group needs at least two values".into()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("non-finite value".into()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let sa = va / a.len() as f64;
    let sb = vb / b.len() as f64;
    let se2 = sa + sb;
    if se2 <= 0.0 {
        return Err(Error::Degenerate("both groups have zero variance".into()));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Degenerate(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, df, p })
}

/// Pearson correlation matrix of the columns; `None` for zero-variance
/// columns.
pub fn feature_correlation(rows: &[[f64; N_FEATURES]]) -> Result<Vec<Vec<Option<f64>>>> {
    if rows.len() < 2 {
        return Err(Error::Degenerate("correlation needs at least two rows".into()));
    }
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..N_FEATURES)
        .map(|f| rows.iter().map(|r| r[f]).sum::<f64>() / n)
        .collect();
    let centered: Vec<Vec<f64>> = (0..N_FEATURES)
        .map(|f| rows.iter().map(|r| r[f] - means[f]).collect())
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut out = vec![vec![None; N_FEATURES]; N_FEATURES];
    for i in 0..N_FEATURES {
        if norms[i] == 0.0 {
            continue;
        }
        out[i][i] = Some(1.0);
        for j in i + 1..N_FEATURES {
            if norms[j] == 0.0 {
                continue;
            }
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(x, y)| x * y).sum();
            let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            out[i][j] = Some(r);
            out[j][i] = Some(r);
        }
    }
    Ok(out)
}

/// Mean feature values of transferred vs non-transferred concepts with the
/// t-test between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub feature: String,
    pub mean_transferred: f64,
    pub mean_non_transferred: f64,
    pub ttest: Option<TTest>,
}

/// Each concept is summarized by its mean over the years from `from[c]`
/// (usually emergence) through the end of the matrix.
pub fn group_comparison(
    matrix: &FeatureMatrix,
    from: &[i32],
    transferred: &[bool],
) -> Vec<GroupComparison> {
    let summaries: Vec<[f64; N_FEATURES]> = matrix
        .rows
        .iter()
        .enumerate()
        .map(|(c, series)| {
            let first = (from[c].max(matrix.start_year) - matrix.start_year) as usize;
            let active = &series[first.min(series.len())..];
            let mut m = [0.0; N_FEATURES];
            if !active.is_empty() {
                for row in active {
                    for (acc, v) in m.iter_mut().zip(row) {
                        *acc += v;
                    }
                }
                m.iter_mut().for_each(|v| *v /= active.len() as f64);
            }
            m
        })
        .collect();
    (0..N_FEATURES)
        .map(|f| {
            let (a, b): (Vec<f64>, Vec<f64>) = {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for (s, &t) in summaries.iter().zip(transferred) {
                    if t {
                        a.push(s[f]);
                    } else {
                        b.push(s[f]);
                    }
                }
                (a, b)
            };
            let mean = |xs: &[f64]| {
                if xs.is_empty() {
                    0.0
                } else {
                    xs.iter().sum::<f64>() / xs.len() as f64
                }
            };
            GroupComparison {
                feature: FEATURE_NAMES[f].to_string(),
                mean_transferred: mean(&a),
                mean_non_transferred: mean(&b),
                ttest: group_ttest(&a, &b).ok(),
            }
        })
        .collect()
}
