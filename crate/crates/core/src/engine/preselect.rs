use alloc::vec::Vec;

use crate::data::Dataset;

/// Marginal screening: the `q` predictors with the largest absolute pooled
/// correlation with the target, returned in ascending index order.
///
/// Constant columns rank last; ties break on the column index.
pub fn preselect(d: &Dataset, q: usize) -> Vec<usize> {
    let y = d.y();
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let mut scored: Vec<(bool, f64, usize)> = (0..d.p())
        .map(|j| {
            let x = d.x().col(j);
            let mx = x.iter().sum::<f64>() / n;
            let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
            if sxx == 0.0 {
                return (true, 0.0, j);
            }
            let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
            let r = if syy == 0.0 { 0.0 } else { libm::fabs(sxy) / libm::sqrt(sxx * syy) };
            (false, r, j)
        })
        .collect();
    scored.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
    let mut out: Vec<usize> = scored.into_iter().take(q).map(|s| s.2).collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn ranks_constant_last_and_keeps_all_for_q_eq_p() {
        let x = Matrix::from_columns(5, &[vec![2.0; 5], vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.5, -0.1, 0.3, 0.0, 0.2]])
            .unwrap();
        let d = Dataset::new(
            x,
            vec![1.1, 2.0, 3.2, 3.9, 5.1],
            vec![0; 5],
            vec!["c".to_string(), "a".to_string(), "b".to_string()],
            "y".into(),
        )
        .unwrap();
        assert_eq!(preselect(&d, 3), vec![0, 1, 2]);
        assert_eq!(preselect(&d, 2), vec![1, 2]);
        assert_eq!(preselect(&d, 1), vec![1]);
    }
}
