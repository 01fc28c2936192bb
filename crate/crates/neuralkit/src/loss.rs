use crate::error::{NnError, Result};

/// Cyclic mean-square error on angles (radians).
///
/// `err_i = atan2(sin Δψ_i, cos Δψ_i)` with `Δψ_i = pred_i − target_i`;
/// `loss = λ · mean(err²)`. The gradient treats the wrap as locally identity,
/// `∂loss/∂pred_i = 2λ err_i / N`.
pub fn cmse_loss(pred: &[f64], target: &[f64], scale: f64) -> Result<(f64, Vec<f64>)> {
    if pred.is_empty() || pred.len() != target.len() {
        return Err(NnError::Shape(format!(
            "CMSE needs equal non-empty inputs, got {} predictions and {} targets",
            pred.len(),
            target.len()
        )));
    }
    let n = pred.len() as f64;
    let err: Vec<f64> = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            d.sin().atan2(d.cos())
        })
        .collect();
    let loss = scale * err.iter().map(|e| e * e).sum::<f64>() / n;
    let grad = err.iter().map(|e| 2.0 * scale * e / n).collect();
    Ok((loss, grad))
}
