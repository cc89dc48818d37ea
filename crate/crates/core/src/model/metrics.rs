use alloc::vec::Vec;

/// Binary confusion counts with `+1` as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_predictions(truth: &[i8], predicted: &[i8]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t == 1, p == 1) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Counts with the roles of the two classes swapped.
    pub fn swapped(&self) -> Self {
        Confusion {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn class_metrics(c: &Confusion) -> ClassMetrics {
    let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
    let (f1, f1_undefined) = if precision + recall > 0.0 {
        (2.0 * precision * recall / (precision + recall), false)
    } else {
        (0.0, true)
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        precision_undefined,
        recall_undefined,
        f1_undefined,
    }
}

/// Per-class precision, recall, F1 and overall accuracy. Zero
/// denominators give 0 with the matching flag set.
pub fn compute_metrics(c: &Confusion) -> Metrics {
    let (accuracy, _) = ratio(c.tp + c.tn, c.total());
    Metrics {
        positive: class_metrics(c),
        negative: class_metrics(&c.swapped()),
        accuracy,
    }
}

/// Mean and sample standard deviation (0 for fewer than two values).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len();
    if n == 0 {
        return MeanStd::default();
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
    } else {
        0.0
    };
    MeanStd { mean, std }
}

/// Mean ± std of every metric over repeated runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsSummary {
    pub positive_precision: MeanStd,
    pub positive_recall: MeanStd,
    pub positive_f1: MeanStd,
    pub negative_precision: MeanStd,
    pub negative_recall: MeanStd,
    pub negative_f1: MeanStd,
    pub accuracy: MeanStd,
}

pub fn summarize(runs: &[Metrics]) -> MetricsSummary {
    let col = |f: fn(&Metrics) -> f64| mean_std(&runs.iter().map(f).collect::<Vec<_>>());
    MetricsSummary {
        positive_precision: col(|m| m.positive.precision),
        positive_recall: col(|m| m.positive.recall),
        positive_f1: col(|m| m.positive.f1),
        negative_precision: col(|m| m.negative.precision),
        negative_recall: col(|m| m.negative.recall),
        negative_f1: col(|m| m.negative.f1),
        accuracy: col(|m| m.accuracy),
    }
}
