use std::fmt::Write as _;

use crate::mlp::CLASSES;

/// Confusion matrix over the ten digit classes; rows are true labels,
/// columns predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub confusion: [[u64; CLASSES]; CLASSES],
}

impl EvalReport {
    pub fn from_predictions(labels: &[u8], predictions: &[u8]) -> Self {
        assert_eq!(labels.len(), predictions.len());
        let mut confusion = [[0u64; CLASSES]; CLASSES];
        for (&t, &p) in labels.iter().zip(predictions) {
            confusion[t as usize][p as usize] += 1;
        }
        Self { confusion }
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..CLASSES).map(|c| self.confusion[c][c]).sum()
    }

    pub fn class_count(&self, class: usize) -> u64 {
        self.confusion[class].iter().sum()
    }

    /// Overall accuracy in percent; 0 for an empty report.
    pub fn accuracy(&self) -> f64 {
        percent(self.correct(), self.total())
    }

    /// Per-class accuracy (recall) in percent; `None` when the class is absent.
    pub fn class_accuracy(&self, class: usize) -> Option<f64> {
        let n = self.class_count(class);
        (n > 0).then(|| percent(self.confusion[class][class], n))
    }

    /// `key: value` text report followed by per-class lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "samples: {}", self.total());
        let _ = writeln!(s, "correct: {}", self.correct());
        let _ = writeln!(s, "accuracy_percent: {:.4}", self.accuracy());
        for c in 0..CLASSES {
            let acc = self.class_accuracy(c).map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"));
            let _ = writeln!(s, "class {c}: count {} correct {} accuracy_percent {acc}", self.class_count(c), self.confusion[c][c]);
        }
        s
    }

    /// Comma-separated matrix with a `true\pred` header row.
    pub fn confusion_csv(&self) -> String {
        let mut s = String::from("true\\pred");
        for c in 0..CLASSES {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
        for (t, row) in self.confusion.iter().enumerate() {
            let _ = write!(s, "{t}");
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

fn percent(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}
