use crate::{Error, Result};

/// Rank-based (Mann-Whitney) AUC with average ranks for ties.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass(format!("auc needs both classes ({n_pos} positive, {n_neg} negative)")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Ranks are 1-based; tied runs share their mean rank. Twice the rank sum
    // stays an integer, so the result is exact for any tie pattern.
    let mut twice_rank_sum_pos: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let twice_avg = (i + 1 + j + 1) as u64;
        let pos_in_run = order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u64;
        twice_rank_sum_pos += twice_avg * pos_in_run;
        i = j + 1;
    }
    let np = n_pos as u64;
    let twice_u = twice_rank_sum_pos - np * (np + 1);
    Ok(twice_u as f64 / (2 * np * n_neg as u64) as f64)
}
