use statrs::distribution::{ContinuousCDF, Normal};

/// Lower bound, sampled upper bound and its confidence interval.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundEstimate {
    pub lower_bound: f64,
    pub upper_mean: f64,
    pub upper_sd: f64,
    pub samples: usize,
    pub ci: (f64, f64),
}

/// Two-sided standard normal quantile `z_{1 - alpha/2}`.
pub fn z_quantile(alpha: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(1.0 - alpha / 2.0)
}

impl BoundEstimate {
    /// Estimate from path costs `f_l` with equal weights.
    pub fn from_costs(lower_bound: f64, costs: &[f64], alpha: f64) -> Self {
        let l = costs.len();
        let mean = costs.iter().sum::<f64>() / l.max(1) as f64;
        let sd = if l > 1 {
            (costs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (l - 1) as f64).sqrt()
        } else {
            0.0
        };
        let half = z_quantile(alpha) * sd / (l.max(1) as f64).sqrt();
        Self { lower_bound, upper_mean: mean, upper_sd: sd, samples: l, ci: (mean - half, mean + half) }
    }

    /// `lower_bound` inside the interval, widened by `tol` relative to the
    /// upper mean.
    pub fn lower_in_ci(&self, tol: f64) -> bool {
        let slack = tol * (1.0 + self.upper_mean.abs());
        self.ci.0 - slack <= self.lower_bound && self.lower_bound <= self.ci.1 + slack
    }
}
