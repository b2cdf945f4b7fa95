//! Per-sample verdicts and their aggregation into an accuracy report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

use super::difficulty::Difficulty;
use crate::pipeline::StageTimings;

/// Published accuracies of trained systems, shown for context only; nothing
/// here reproduces them.
pub const REFERENCE_ACCURACIES: [(&str, f64); 5] = [
    ("prior system A", 0.535),
    ("prior system B", 0.599),
    ("prior system C", 0.626),
    ("trained, full value pipeline", 0.62),
    ("trained, ground-truth value options", 0.67),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleVerdict {
    pub id: usize,
    pub db_id: String,
    pub question: String,
    pub gold_sql: String,
    pub predicted_sql: Option<String>,
    pub difficulty: Difficulty,
    /// The gold SQL did not parse and the bucket is the fallback.
    pub difficulty_unparsed: bool,
    pub equivalent: bool,
    /// Why the sample could not be scored as equivalent, when known.
    pub failure: Option<String>,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketAccuracy {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl BucketAccuracy {
    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
        self.accuracy = self.correct as f64 / self.total as f64;
    }
}

/// Milliseconds by stage, plus the total.
pub type StageStats = BTreeMap<String, f64>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub mean: StageStats,
    pub std: StageStats,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall_accuracy: f64,
    pub total: usize,
    pub correct: usize,
    pub by_difficulty: BTreeMap<Difficulty, BucketAccuracy>,
    pub stage_timing_ms: TimingSummary,
    pub samples: Vec<SampleVerdict>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EvalReport {
    /// Samples are kept in id order.
    pub fn from_verdicts(mut samples: Vec<SampleVerdict>) -> Self {
        samples.sort_by_key(|s| s.id);
        let mut by_difficulty: BTreeMap<Difficulty, BucketAccuracy> = Difficulty::ALL
            .iter()
            .map(|d| (*d, BucketAccuracy::default()))
            .collect();
        for s in &samples {
            by_difficulty
                .entry(s.difficulty)
                .or_default()
                .add(s.equivalent);
        }
        let correct = samples.iter().filter(|s| s.equivalent).count();
        let mut timing = TimingSummary::default();
        let columns: Vec<(&str, Vec<f64>)> = StageTimings::STAGES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                (
                    *name,
                    samples.iter().map(|s| s.timings.stages()[i]).collect(),
                )
            })
            .chain(std::iter::once((
                "total",
                samples.iter().map(|s| s.timings.total).collect(),
            )))
            .collect();
        for (name, xs) in columns {
            let (m, sd) = mean_std(&xs);
            timing.mean.insert(name.to_string(), m);
            timing.std.insert(name.to_string(), sd);
        }
        EvalReport {
            overall_accuracy: if samples.is_empty() {
                0.0
            } else {
                correct as f64 / samples.len() as f64
            },
            total: samples.len(),
            correct,
            by_difficulty,
            stage_timing_ms: timing,
            samples,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Accuracy by difficulty and mean/std stage timings as plain text.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>7} {:>7} {:>9}",
            "bucket", "count", "correct", "accuracy"
        );
        for (d, b) in &self.by_difficulty {
            let _ = writeln!(
                out,
                "{:<10} {:>7} {:>7} {:>8.1}%",
                d.as_str(),
                b.total,
                b.correct,
                100.0 * b.accuracy
            );
        }
        let _ = writeln!(
            out,
            "{:<10} {:>7} {:>7} {:>8.1}%",
            "all",
            self.total,
            self.correct,
            100.0 * self.overall_accuracy
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<15} {:>10} {:>10}", "stage", "mean ms", "std ms");
        for name in StageTimings::STAGES.iter().chain(std::iter::once(&"total")) {
            let m = self.stage_timing_ms.mean.get(*name).copied().unwrap_or(0.0);
            let s = self.stage_timing_ms.std.get(*name).copied().unwrap_or(0.0);
            let _ = writeln!(out, "{name:<15} {m:>10.2} {s:>10.2}");
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "reference accuracies of trained systems (not reproduced):"
        );
        for (name, acc) in REFERENCE_ACCURACIES {
            let _ = writeln!(out, "  {name:<38} {:>5.1}%", 100.0 * acc);
        }
        out
    }

    /// One row per sample.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "id",
            "db_id",
            "difficulty",
            "equivalent",
            "failure",
            "question",
            "gold_sql",
            "predicted_sql",
            "total_ms",
        ])?;
        for s in &self.samples {
            wr.write_record([
                s.id.to_string(),
                s.db_id.clone(),
                s.difficulty.as_str().to_string(),
                s.equivalent.to_string(),
                s.failure.clone().unwrap_or_default(),
                s.question.clone(),
                s.gold_sql.clone(),
                s.predicted_sql.clone().unwrap_or_default(),
                format!("{:.3}", s.timings.total),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verdict(id: usize, d: Difficulty, ok: bool, total: f64) -> SampleVerdict {
        SampleVerdict {
            id,
            db_id: "db".into(),
            question: "q".into(),
            gold_sql: "SELECT 1".into(),
            predicted_sql: None,
            difficulty: d,
            difficulty_unparsed: false,
            equivalent: ok,
            failure: None,
            timings: StageTimings {
                total,
                synthesis: total,
                ..Default::default()
            },
        }
    }

    #[test]
    fn aggregates_buckets_and_timings() {
        let r = EvalReport::from_verdicts(vec![
            verdict(2, Difficulty::Hard, false, 3.0),
            verdict(0, Difficulty::Easy, true, 1.0),
            verdict(1, Difficulty::Easy, false, 2.0),
        ]);
        assert_eq!(
            r.samples.iter().map(|s| s.id).collect::<Vec<_>>(),
            [0, 1, 2]
        );
        assert_eq!(
            r.by_difficulty.values().map(|b| b.total).sum::<usize>(),
            r.total
        );
        assert!((r.overall_accuracy - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.by_difficulty[&Difficulty::Easy].correct, 1);
        assert!((r.stage_timing_ms.mean["total"] - 2.0).abs() < 1e-12);
        assert!((r.stage_timing_ms.std["synthesis"] - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in [
            "overall_accuracy",
            "by_difficulty",
            "stage_timing_ms",
            "samples",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["by_difficulty"].get("extra").is_some());
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 4);
    }

    #[test]
    fn empty_report() {
        let r = EvalReport::from_verdicts(Vec::new());
        assert_eq!(r.total, 0);
        assert_eq!(r.overall_accuracy, 0.0);
        assert!(r.to_table().contains("all"));
    }
}
