//! Running observation normalization (Welford accumulation).

/// Per-dimension running mean/variance. During training each observation
/// first updates the statistics and is then normalized; at evaluation time
/// the statistics are frozen and only [`RunningNorm::normalize`] is used.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningNorm {
    pub mean: Vec<f64>,
    /// Sum of squared deviations from the running mean.
    pub m2: Vec<f64>,
    pub count: f64,
}

const CLIP: f64 = 10.0;
const VAR_FLOOR: f64 = 1e-8;

impl RunningNorm {
    pub fn new(dim: usize) -> RunningNorm {
        RunningNorm {
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
            count: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Fold one observation into the running statistics.
    pub fn update(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim());
        self.count += 1.0;
        for i in 0..x.len() {
            let delta = x[i] - self.mean[i];
            self.mean[i] += delta / self.count;
            self.m2[i] += delta * (x[i] - self.mean[i]);
        }
    }

    /// `(x − mean)/√(var + 1e-8)` clipped to ±10. Before any update this is
    /// the identity map (clipped).
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        if self.count < 1.0 {
            return x.iter().map(|v| v.clamp(-CLIP, CLIP)).collect();
        }
        (0..x.len())
            .map(|i| {
                let var = self.m2[i] / self.count;
                ((x[i] - self.mean[i]) / (var + VAR_FLOOR).sqrt()).clamp(-CLIP, CLIP)
            })
            .collect()
    }

    pub fn update_then_normalize(&mut self, x: &[f64]) -> Vec<f64> {
        self.update(x);
        self.normalize(x)
    }
}
