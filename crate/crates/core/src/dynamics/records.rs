use crate::error::{Error, Result};
use crate::graphs::VertexId;
use crate::scales::ScaleSet;

use super::TraceSummary;

/// Record structure of a trace with `J` deep events.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordView {
    /// `ln m_n(j)` for `j = 1..=J+1`: `m_n(1) = S_n(d_n(1))`, then running
    /// maxima of the scores. The last entry uses the open final score.
    pub log_m: Vec<f64>,
    /// Ordinals (1-based) of scores strictly above every earlier score.
    pub q: Vec<u64>,
    /// `k_n(j) = d_n(q_n(j))`.
    pub k: Vec<u64>,
    /// `V_n(j) = U_n(q_n(j))`.
    pub v: Vec<VertexId>,
}

impl RecordView {
    /// Builds the view from `ln S_n(d_n(1))` and per-event data.
    pub fn from_scores(log_first_clock: f64, log_scores: &[f64], steps: &[u64], vertices: &[VertexId]) -> Result<Self> {
        if log_scores.is_empty() {
            return Err(Error::NoDeepEvents);
        }
        let mut log_m = Vec::with_capacity(log_scores.len() + 1);
        log_m.push(log_first_clock);
        let (mut q, mut k, mut v) = (Vec::new(), Vec::new(), Vec::new());
        let mut best = f64::NEG_INFINITY;
        for (i, &s) in log_scores.iter().enumerate() {
            if i == 0 || s > best {
                q.push(i as u64 + 1);
                k.push(steps[i]);
                v.push(vertices[i]);
            }
            best = best.max(s);
            log_m.push(best);
        }
        Ok(Self { log_m, q, k, v })
    }

    /// `(m_n(j) / t_n)^alpha`, optionally without the special first entry.
    pub fn rescaled(&self, s: &ScaleSet, include_first: bool) -> Vec<f64> {
        let skip = usize::from(!include_first);
        self.log_m.iter().skip(skip).map(|&l| s.rescale_log_clock(l)).collect()
    }

    /// Some record vertex occurs twice.
    pub fn repeats_vertex(&self) -> bool {
        let mut seen = self.v.clone();
        seen.sort_unstable();
        seen.windows(2).any(|w| w[0] == w[1])
    }

    /// Whether the record range avoids `[a, b]`, once the trace decides it.
    /// A record inside `[a, b]` gives `Some(false)`, a record above `b` with
    /// none inside gives `Some(true)`, and records all below `a` give `None`.
    pub fn gap_outcome(&self, s: &ScaleSet, a: f64, b: f64, include_first: bool) -> Option<bool> {
        let values = self.rescaled(s, include_first);
        if values.iter().any(|&x| a <= x && x <= b) {
            Some(false)
        } else if values.iter().any(|&x| x > b) {
            Some(true)
        } else {
            None
        }
    }
}

pub fn record_view(trace: &TraceSummary) -> Result<RecordView> {
    let events = &trace.deep_events;
    let first = events.first().ok_or(Error::NoDeepEvents)?;
    let scores: Vec<f64> = events.iter().map(|e| e.log_score).collect();
    let steps: Vec<u64> = events.iter().map(|e| e.step).collect();
    let vertices: Vec<VertexId> = events.iter().map(|e| e.vertex).collect();
    RecordView::from_scores(first.log_clock_at_found, &scores, &steps, &vertices)
}

/// True iff no rescaled record value `(m_n(j)/t_n)^alpha` lies in `[a, b]`.
pub fn record_gap_hit(view: &RecordView, s: &ScaleSet, a: f64, b: f64) -> bool {
    !view.rescaled(s, true).iter().any(|&x| a <= x && x <= b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(scores: &[f64]) -> RecordView {
        let logs: Vec<f64> = scores.iter().map(|s| s.ln()).collect();
        let steps: Vec<u64> = (1..=scores.len() as u64).collect();
        let vertices: Vec<VertexId> = steps.iter().map(|&s| VertexId(s % 2)).collect();
        RecordView::from_scores(0.5f64.ln(), &logs, &steps, &vertices).unwrap()
    }

    #[test]
    fn record_examples() {
        let v = view(&[3.0, 1.0, 5.0]);
        let m: Vec<f64> = v.log_m.iter().map(|l| l.exp()).collect();
        assert_eq!(m.len(), 4);
        assert!((m[0] - 0.5).abs() < 1e-15);
        for (x, y) in m[1..].iter().zip([3.0, 3.0, 5.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(view(&[3.0, 1.0, 5.0, 2.0, 7.0]).q, vec![1, 3, 5]);
        let single = view(&[2.0]);
        assert_eq!((single.q.clone(), single.v.clone(), single.k.clone()), (vec![1], vec![VertexId(1)], vec![1]));
        // Ties are not records.
        assert_eq!(view(&[2.0, 2.0, 3.0]).q, vec![1, 3]);
        assert_eq!(RecordView::from_scores(0.0, &[], &[], &[]), Err(Error::NoDeepEvents));
    }

    #[test]
    fn gap_examples() {
        // alpha = 1, t = 1: rescaled values are the raw values.
        let s = ScaleSet::new(1.0 - 1e-12, 1.0, 0.5, 1.0).unwrap();
        let mk = |m: &[f64]| RecordView {
            log_m: m.iter().map(|x| x.ln()).collect(),
            q: vec![1],
            k: vec![1],
            v: vec![VertexId(0)],
        };
        assert!(record_gap_hit(&mk(&[0.3, 2.5]), &s, 1.0, 2.0));
        assert!(!record_gap_hit(&mk(&[1.5]), &s, 1.0, 2.0));
        assert_eq!(mk(&[0.3, 2.5]).gap_outcome(&s, 1.0, 2.0, true), Some(true));
        assert_eq!(mk(&[0.3, 1.5]).gap_outcome(&s, 1.0, 2.0, true), Some(false));
        assert_eq!(mk(&[0.3, 0.7]).gap_outcome(&s, 1.0, 2.0, true), None);
        assert_eq!(mk(&[1.5, 3.0]).gap_outcome(&s, 1.0, 2.0, false), Some(true));
    }

    #[test]
    fn repeated_record_sites() {
        let mk =
            |v: Vec<u64>| RecordView { log_m: vec![], q: vec![], k: vec![], v: v.into_iter().map(VertexId).collect() };
        assert!(mk(vec![3, 1, 3]).repeats_vertex());
        assert!(!mk(vec![3, 1, 2]).repeats_vertex());
    }
}
