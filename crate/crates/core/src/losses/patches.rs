use serde::{Deserialize, Serialize};

/// Inclusive index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

/// A land endpoint that borders a sea.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shore {
    pub index: usize,
    pub land: Span,
    pub sea: Span,
}

/// Foreground runs (lands), background runs (seas) and their borders (shores).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PatchPartition {
    pub lands: Vec<Span>,
    pub seas: Vec<Span>,
    pub shores: Vec<Shore>,
}

/// Splits a label sequence into maximal same-class foreground runs and
/// maximal background runs. Shores are listed left to right; a land between
/// two seas yields two.
pub fn partition_patches(labels: &[usize], background: usize) -> PatchPartition {
    let mut runs: Vec<(Span, bool)> = Vec::new();
    let mut t = 0;
    while t < labels.len() {
        let start = t;
        while t + 1 < labels.len() && labels[t + 1] == labels[start] {
            t += 1;
        }
        runs.push((Span::new(start, t), labels[start] == background));
        t += 1;
    }

    let mut out = PatchPartition::default();
    for (i, &(span, is_sea)) in runs.iter().enumerate() {
        if is_sea {
            out.seas.push(span);
            continue;
        }
        out.lands.push(span);
        if i > 0 && runs[i - 1].1 {
            out.shores.push(Shore {
                index: span.start,
                land: span,
                sea: runs[i - 1].0,
            });
        }
        if i + 1 < runs.len() && runs[i + 1].1 {
            out.shores.push(Shore {
                index: span.end,
                land: span,
                sea: runs[i + 1].0,
            });
        }
    }
    out
}
