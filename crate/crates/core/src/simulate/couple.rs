use crate::error::{Error, Result};

/// Replaces each standardized increment by the observed return of the same
/// rank. Ties in `std_increments` are broken by time index, earlier first.
pub fn rank_couple(std_increments: &[f64], observed_returns: &[f64]) -> Result<Vec<f64>> {
    if std_increments.len() != observed_returns.len() {
        return Err(Error::validation(
            "simulate",
            format!(
                "rank coupling needs equal lengths, got {} and {}",
                std_increments.len(),
                observed_returns.len()
            ),
        ));
    }
    if std_increments.iter().chain(observed_returns).any(|v| v.is_nan()) {
        return Err(Error::validation("simulate", "rank coupling input contains NaN"));
    }
    let mut order: Vec<usize> = (0..std_increments.len()).collect();
    // Stable sort keeps the time order among ties.
    order.sort_by(|&a, &b| std_increments[a].total_cmp(&std_increments[b]));
    let mut sorted = observed_returns.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = vec![0.0; std_increments.len()];
    for (rank, &t) in order.iter().enumerate() {
        out[t] = sorted[rank];
    }
    Ok(out)
}
