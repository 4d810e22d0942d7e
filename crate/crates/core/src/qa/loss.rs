use std::collections::BTreeMap;

use super::QaError;
use crate::domain::{FeedbackBundle, Metric};

/// `(L_m, L_u)`: weighted deficits `w_k (1 - g_k)` over model-sourced and
/// user-sourced metrics. Weights are renormalized over the metrics that are
/// both measured and weighted; if those weights are all zero they count equally.
pub fn loss_split(g: &FeedbackBundle, weights: &BTreeMap<Metric, f64>) -> Result<(f64, f64), QaError> {
    let present: Vec<(Metric, f64, f64)> = Metric::ALL
        .into_iter()
        .filter_map(|m| Some((m, g.metric(m)?, *weights.get(&m)?)))
        .collect();
    if present.is_empty() {
        return Err(QaError::NoMetricsPresent);
    }
    let total: f64 = present.iter().map(|p| p.2).sum();
    let (mut lm, mut lu) = (0.0, 0.0);
    for (m, v, w) in &present {
        let w = if total > 0.0 { w / total } else { 1.0 / present.len() as f64 };
        let deficit = w * (1.0 - v);
        if g.user_fields.contains(m) {
            lu += deficit;
        } else {
            lm += deficit;
        }
    }
    Ok((lm, lu))
}

pub fn compute_loss(g: &FeedbackBundle, weights: &BTreeMap<Metric, f64>) -> Result<f64, QaError> {
    let (lm, lu) = loss_split(g, weights)?;
    Ok(lm + lu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(pairs: &[(Metric, f64)]) -> BTreeMap<Metric, f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn perfect_and_worst() {
        let all = w(&[(Metric::Consistency, 0.5), (Metric::Quality, 0.3), (Metric::Glyph, 0.2)]);
        let g = FeedbackBundle::model(1.0, 1.0, Some(1.0), vec![]).unwrap();
        assert_eq!(compute_loss(&g, &all).unwrap(), 0.0);
        let g = FeedbackBundle::model(0.0, 0.0, Some(0.0), vec![]).unwrap();
        assert!((compute_loss(&g, &all).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_metric() {
        let g = FeedbackBundle::model(0.75, 0.1, None, vec![]).unwrap();
        assert_eq!(compute_loss(&g, &w(&[(Metric::Consistency, 1.0)])).unwrap(), 0.25);
    }

    #[test]
    fn absent_glyph_renormalizes() {
        let g = FeedbackBundle::model(0.5, 1.0, None, vec![]).unwrap();
        let l = compute_loss(&g, &w(&[(Metric::Consistency, 0.5), (Metric::Quality, 0.3), (Metric::Glyph, 0.2)])).unwrap();
        assert!((l - 0.5 * 0.5 / 0.8).abs() < 1e-12);
    }

    #[test]
    fn nothing_weighted() {
        let g = FeedbackBundle::model(0.5, 0.5, None, vec![]).unwrap();
        assert_eq!(compute_loss(&g, &w(&[(Metric::Glyph, 1.0)])), Err(QaError::NoMetricsPresent));
    }

    #[test]
    fn user_share() {
        let mut g = FeedbackBundle::model(0.5, 0.5, None, vec![]).unwrap();
        g.user_fields.insert(Metric::Quality);
        let (lm, lu) = loss_split(&g, &w(&[(Metric::Consistency, 1.0), (Metric::Quality, 1.0)])).unwrap();
        assert_eq!((lm, lu), (0.25, 0.25));
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(
            cos in 0.0f64..=1.0, qua in 0.0f64..=1.0, gly in 0.0f64..=1.0,
            drop in 0.0f64..=1.0, which in 0usize..3,
            ws in proptest::collection::vec(0.0f64..5.0, 3),
        ) {
            let weights = w(&[(Metric::Consistency, ws[0]), (Metric::Quality, ws[1]), (Metric::Glyph, ws[2])]);
            let g = FeedbackBundle::model(cos, qua, Some(gly), vec![]).unwrap();
            let mut worse = g.clone();
            match which {
                0 => worse.g_cos *= drop,
                1 => worse.g_qua *= drop,
                _ => worse.g_gly = Some(gly * drop),
            }
            let (a, b) = (compute_loss(&g, &weights).unwrap(), compute_loss(&worse, &weights).unwrap());
            prop_assert!(b >= a - 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
        }
    }
}
