use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Probabilities are clamped here before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Mean negative log-likelihood of `labels` under row-wise `probs`.
///
/// Returns the loss and its gradient with respect to the softmax input,
/// `(probs - onehot) / batch`.
pub fn cross_entropy(probs: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    let batch = probs.rows();
    if labels.len() != batch || batch == 0 {
        return Err(Error::Shape(format!(
            "{} labels for {batch} rows",
            labels.len()
        )));
    }
    let classes = probs.cols();
    let mut grad = probs.clone();
    let mut loss = 0.0;
    for (b, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::InvalidArgument(format!(
                "label {label} outside [0, {classes})"
            )));
        }
        let row = probs.row(b);
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "row {b} sums to {total}, not 1"
            )));
        }
        loss -= row[label].max(PROB_FLOOR).ln();
        let g = grad.row_mut(b);
        g[label] -= 1.0;
        g.iter_mut().for_each(|v| *v /= batch as f64);
    }
    Ok((loss / batch as f64, grad))
}

/// Fraction of rows whose arg-max equals the label.
pub fn accuracy(outputs: &Matrix, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = outputs
        .iter_rows()
        .zip(labels)
        .filter(|(row, &label)| argmax(row) == label)
        .count();
    hits as f64 / labels.len() as f64
}

pub fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn onehot_has_zero_loss() {
        let probs = Matrix::from_rows(&[[0.0, 1.0, 0.0]]).unwrap();
        let (loss, grad) = cross_entropy(&probs, &[1]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn uniform_is_ln_classes() {
        let probs = Matrix::from_vec(2, 10, vec![0.1; 20]).unwrap();
        let (loss, _) = cross_entropy(&probs, &[3, 9]).unwrap();
        assert!((loss - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn clamps_and_validates() {
        let probs = Matrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let (loss, _) = cross_entropy(&probs, &[1]).unwrap();
        assert!((loss - 12.0 * 10f64.ln()).abs() < 1e-9);
        assert!(cross_entropy(&probs, &[2]).is_err());
        assert!(cross_entropy(&probs, &[0, 1]).is_err());
        let bad = Matrix::from_rows(&[[0.5, 0.4]]).unwrap();
        assert!(cross_entropy(&bad, &[0]).is_err());
    }

    #[test]
    fn argmax_and_accuracy() {
        let out = Matrix::from_rows(&[[0.1, 0.7, 0.2], [0.5, 0.2, 0.3]]).unwrap();
        assert_eq!(argmax(out.row(0)), 1);
        assert_eq!(accuracy(&out, &[1, 2]), 0.5);
    }
}
