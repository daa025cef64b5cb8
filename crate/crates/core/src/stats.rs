//! Empirical distribution summaries shared by the statistics modules.

/// Empirical CDF of a real-valued sample (sorted on construction).
#[derive(Clone, Debug)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Self {
        assert!(
            samples.iter().all(|x| x.is_finite()),
            "samples must be finite"
        );
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        EmpiricalCdf { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// F(x) = (1/N) #{ samples <= x }.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&s| s <= x);
        k as f64 / self.sorted.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    /// sup_x |F(x) - G(x)|, evaluated at the jump points of both CDFs.
    pub fn sup_distance(&self, other: &EmpiricalCdf) -> f64 {
        let mut sup = 0.0f64;
        for &x in self.sorted.iter().chain(other.sorted.iter()) {
            sup = sup.max((self.cdf(x) - other.cdf(x)).abs());
        }
        sup
    }

    /// CDF sampled on a fixed grid (for CSV output and golden fixtures).
    pub fn on_grid(&self, grid: &[f64]) -> Vec<(f64, f64)> {
        grid.iter().map(|&x| (x, self.cdf(x))).collect()
    }
}

/// Empirical law of a non-negative integer count, with per-bin standard errors.
#[derive(Clone, Debug)]
pub struct CountDistribution {
    counts: Vec<u64>,
    n: u64,
    /// Boundary coincidences observed while counting (half-open cap ties).
    pub ties: u64,
}

impl CountDistribution {
    pub fn from_counts(observations: &[u64]) -> Self {
        let max = observations.iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![0u64; max + 1];
        for &r in observations {
            counts[r as usize] += 1;
        }
        CountDistribution {
            counts,
            n: observations.len() as u64,
            ties: 0,
        }
    }

    pub fn sample_size(&self) -> u64 {
        self.n
    }

    pub fn max_count(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn prob(&self, r: u64) -> f64 {
        let c = self.counts.get(r as usize).copied().unwrap_or(0);
        c as f64 / self.n as f64
    }

    /// Binomial standard error of the bin frequency.
    pub fn stderr(&self, r: u64) -> f64 {
        let p = self.prob(r);
        (p * (1.0 - p) / self.n as f64).sqrt()
    }

    pub fn mean(&self) -> f64 {
        let total: u64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(r, &c)| r as u64 * c)
            .sum();
        total as f64 / self.n as f64
    }

    /// Largest |p_self(r) - p_other(r)| over r in [0, r_max].
    pub fn sup_prob_distance(&self, other: &CountDistribution, r_max: u64) -> f64 {
        (0..=r_max)
            .map(|r| (self.prob(r) - other.prob(r)).abs())
            .fold(0.0, f64::max)
    }
}

/// Survival function on a fixed grid, with standard errors and the fraction
/// of censored observations.
#[derive(Clone, Debug)]
pub struct SurvivalCurve {
    pub xi: Vec<f64>,
    pub survival: Vec<f64>,
    pub stderr: Vec<f64>,
    pub censored_frac: f64,
    pub n: u64,
}

impl SurvivalCurve {
    /// Builds F(xi) = #{ values >= xi } / n from per-observation values;
    /// `None` marks a censored observation (exceeded every grid point).
    pub fn from_values(grid: &[f64], values: &[Option<f64>]) -> Self {
        let n = values.len() as u64;
        let mut survival = Vec::with_capacity(grid.len());
        let mut stderr = Vec::with_capacity(grid.len());
        for &xi in grid {
            let alive = values.iter().filter(|v| v.is_none_or(|t| t >= xi)).count();
            let p = alive as f64 / n as f64;
            survival.push(p);
            stderr.push((p * (1.0 - p) / n as f64).sqrt());
        }
        let censored = values.iter().filter(|v| v.is_none()).count();
        SurvivalCurve {
            xi: grid.to_vec(),
            survival,
            stderr,
            censored_frac: censored as f64 / n as f64,
            n,
        }
    }

    pub fn value_at(&self, xi: f64) -> Option<f64> {
        self.xi
            .iter()
            .position(|&x| x == xi)
            .map(|i| self.survival[i])
    }

    pub fn sup_distance(&self, other: &SurvivalCurve) -> f64 {
        assert_eq!(self.xi, other.xi, "curves must share a grid");
        self.survival
            .iter()
            .zip(&other.survival)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_basics() {
        let cdf = EmpiricalCdf::from_samples(vec![3.0, 1.0, 2.0, 2.0]);
        assert_eq!(cdf.cdf(0.5), 0.0);
        assert_eq!(cdf.cdf(1.0), 0.25);
        assert_eq!(cdf.cdf(2.0), 0.75);
        assert_eq!(cdf.cdf(10.0), 1.0);
        assert_eq!(cdf.mean(), 2.0);
    }

    #[test]
    fn sup_distance_symmetry() {
        let a = EmpiricalCdf::from_samples(vec![0.0, 1.0]);
        let b = EmpiricalCdf::from_samples(vec![0.5, 1.0, 1.5]);
        let d = a.sup_distance(&b);
        assert_eq!(d, b.sup_distance(&a));
        assert!(d > 0.0 && d <= 1.0);
    }

    #[test]
    fn count_distribution_mean_and_mass() {
        let d = CountDistribution::from_counts(&[0, 1, 1, 2]);
        assert_eq!(d.mean(), 1.0);
        let total: f64 = (0..=d.max_count()).map(|r| d.prob(r)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn survival_counts_censored_as_alive() {
        let curve = SurvivalCurve::from_values(&[0.0, 1.0, 2.0], &[Some(0.5), Some(1.5), None]);
        assert_eq!(curve.survival, vec![1.0, 2.0 / 3.0, 1.0 / 3.0]);
        assert!((curve.censored_frac - 1.0 / 3.0).abs() < 1e-15);
    }
}
