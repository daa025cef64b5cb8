//! Direction statistics of a point batch: radial projections with
//! multiplicity, local counts in shrinking spherical discs, their law over a
//! random disc centre, and (d = 2) the normalized gap distribution.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::pointset::{unit_ball_volume, PointBatch};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::{CountDistribution, EmpiricalCdf};

#[derive(Debug, Error)]
pub enum DirectionsError {
    #[error("zero vector in batch; exclude the origin before projecting")]
    ZeroVector,
    #[error("gap distribution requires dimension 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("need at least two directions, got {0}")]
    TooFewDirections(usize),
    #[error("cap area {area} exceeds the sphere area {sphere}")]
    CapTooLarge { area: f64, sphere: f64 },
    #[error("cap geometry implemented for dimensions 2..=4, got {0}")]
    CapDimension(usize),
}

/// Whether coinciding directions stay as separate entries (the paper counts
/// directions with multiplicity) or are merged into one weighted entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Multiplicity {
    #[default]
    Keep,
    Collapse,
}

/// Radial projections of a point batch. For d = 2 directions are angles in
/// turns, sorted; for d >= 3 they are unit vectors sorted lexicographically.
#[derive(Clone, Debug)]
pub struct DirectionSample {
    dimension: usize,
    /// d = 2: sorted angles in [0, 1).
    angles: Vec<f64>,
    /// d >= 3: flat row-major unit vectors.
    vectors: Vec<f64>,
    multiplicities: Vec<u64>,
    /// Cumulative multiplicity, multiplicities[..i] summed.
    cumulative: Vec<u64>,
    total: u64,
}

/// A disc count together with any boundary coincidences observed
/// (half-open caps; ties have measure zero under an a.c. law).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscCount {
    pub count: u64,
    pub boundary_ties: u64,
}

impl DirectionSample {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Total multiplicity (the number of projected points).
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn from_angles(angles: Vec<f64>) -> Self {
        let entries: Vec<(f64, u64)> = angles.into_iter().map(|a| (a.rem_euclid(1.0), 1)).collect();
        Self::from_angle_entries(entries, Multiplicity::Keep)
    }

    fn from_angle_entries(mut entries: Vec<(f64, u64)>, mode: Multiplicity) -> Self {
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if mode == Multiplicity::Collapse {
            let mut merged: Vec<(f64, u64)> = Vec::with_capacity(entries.len());
            for (a, m) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == a => last.1 += m,
                    _ => merged.push((a, m)),
                }
            }
            entries = merged;
        }
        let total = entries.iter().map(|e| e.1).sum();
        let mut cumulative = Vec::with_capacity(entries.len() + 1);
        cumulative.push(0);
        for e in &entries {
            cumulative.push(cumulative.last().unwrap() + e.1);
        }
        DirectionSample {
            dimension: 2,
            angles: entries.iter().map(|e| e.0).collect(),
            vectors: Vec::new(),
            multiplicities: entries.into_iter().map(|e| e.1).collect(),
            cumulative,
            total,
        }
    }

    /// Multiplicity-weighted count of angles in the half-open arc
    /// [start, start + length) on the circle, in turns.
    pub fn count_in_arc(&self, start: f64, length: f64) -> DiscCount {
        assert_eq!(self.dimension, 2);
        let lo = start.rem_euclid(1.0);
        if length >= 1.0 {
            return DiscCount {
                count: self.total,
                boundary_ties: 0,
            };
        }
        let hi = (lo + length).rem_euclid(1.0);
        let weight_below = |x: f64| self.cumulative[self.angles.partition_point(|&a| a < x)];
        let weight_at = |x: f64| {
            let lo_idx = self.angles.partition_point(|&a| a < x);
            let hi_idx = self.angles.partition_point(|&a| a <= x);
            self.cumulative[hi_idx] - self.cumulative[lo_idx]
        };
        let count = if lo <= hi {
            weight_below(hi) - weight_below(lo)
        } else {
            self.total - weight_below(lo) + weight_below(hi)
        };
        DiscCount {
            count,
            boundary_ties: weight_at(lo) + weight_at(hi),
        }
    }

    fn unit_vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dimension)
    }
}

/// Projects every point of the batch to its direction x / |x|.
pub fn project_directions(
    batch: &PointBatch,
    mode: Multiplicity,
) -> Result<DirectionSample, DirectionsError> {
    let d = batch.dimension;
    if d == 2 {
        let mut entries = Vec::with_capacity(batch.count());
        for p in batch.iter_points() {
            if p[0] == 0.0 && p[1] == 0.0 {
                return Err(DirectionsError::ZeroVector);
            }
            let turns = (p[1].atan2(p[0]) / std::f64::consts::TAU).rem_euclid(1.0);
            entries.push((turns, 1));
        }
        return Ok(DirectionSample::from_angle_entries(entries, mode));
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(batch.count());
    for p in batch.iter_points() {
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(DirectionsError::ZeroVector);
        }
        rows.push(p.iter().map(|x| x / norm).collect());
    }
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut vectors = Vec::with_capacity(rows.len() * d);
    let mut multiplicities = Vec::with_capacity(rows.len());
    for row in rows {
        match mode {
            Multiplicity::Collapse
                if vectors.len() >= d && vectors[vectors.len() - d..] == row[..] =>
            {
                *multiplicities.last_mut().unwrap() += 1;
            }
            _ => {
                vectors.extend_from_slice(&row);
                multiplicities.push(1);
            }
        }
    }
    let total = multiplicities.iter().sum();
    let mut cumulative = vec![0];
    for &m in &multiplicities {
        cumulative.push(cumulative.last().unwrap() + m);
    }
    Ok(DirectionSample {
        dimension: d,
        angles: Vec::new(),
        vectors,
        multiplicities,
        cumulative,
        total,
    })
}

/// Surface area of the unit sphere S^(d-1).
pub fn sphere_area(dimension: usize) -> f64 {
    dimension as f64 * unit_ball_volume(dimension)
}

/// Disc area prescribed by the local-statistics normalization:
/// sigma * d / ((1 - c^d) m_f(W) T^d), so that the expected count is sigma.
pub fn disc_area(
    sigma: f64,
    annulus_inner: f64,
    radius: f64,
    window_measure: f64,
    dimension: usize,
) -> f64 {
    let d = dimension as i32;
    sigma * dimension as f64 / ((1.0 - annulus_inner.powi(d)) * window_measure * radius.powi(d))
}

/// Geodesic radius of a spherical cap of the given surface area, by exact
/// cap-area inversion; implemented for d <= 4.
pub fn cap_geodesic_radius(dimension: usize, area: f64) -> Result<f64, DirectionsError> {
    let sphere = sphere_area(dimension);
    if area > sphere {
        return Err(DirectionsError::CapTooLarge { area, sphere });
    }
    match dimension {
        // A cap of geodesic radius t on the circle is an arc of length 2t.
        2 => Ok(area / 2.0),
        // Area 2 pi (1 - cos t) on S^2.
        3 => Ok((1.0 - area / (2.0 * std::f64::consts::PI)).acos()),
        // Area 2 pi (t - sin t cos t) on S^3; invert by Newton from the
        // small-angle start, where the area grows like (4 pi / 3) t^3.
        4 => {
            let target = area / (2.0 * std::f64::consts::PI);
            let mut t = (3.0 * target / 2.0).cbrt().min(std::f64::consts::PI);
            for _ in 0..60 {
                let f = t - t.sin() * t.cos() - target;
                let df = 2.0 * t.sin() * t.sin();
                if df == 0.0 {
                    break;
                }
                let next = (t - f / df).clamp(0.0, std::f64::consts::PI);
                if (next - t).abs() < 1e-15 {
                    t = next;
                    break;
                }
                t = next;
            }
            Ok(t)
        }
        d => Err(DirectionsError::CapDimension(d)),
    }
}

/// Number of directions inside the spherical disc of the prescribed area
/// centred at `centre` (a unit vector).
pub fn disc_count(
    sample: &DirectionSample,
    centre: &[f64],
    sigma: f64,
    annulus_inner: f64,
    radius: f64,
    window_measure: f64,
) -> Result<DiscCount, DirectionsError> {
    let area = disc_area(
        sigma,
        annulus_inner,
        radius,
        window_measure,
        sample.dimension,
    );
    let geo = cap_geodesic_radius(sample.dimension, area)?;
    if sample.dimension == 2 {
        let centre_turns = (centre[1].atan2(centre[0]) / std::f64::consts::TAU).rem_euclid(1.0);
        let len_turns = 2.0 * geo / std::f64::consts::TAU;
        Ok(sample.count_in_arc(centre_turns - len_turns / 2.0, len_turns))
    } else {
        let cos_t = geo.cos();
        let mut count = 0;
        let mut ties = 0;
        for (v, &m) in sample.unit_vectors().zip(&sample.multiplicities) {
            let dot: f64 = v.iter().zip(centre).map(|(a, b)| a * b).sum();
            if dot > cos_t {
                count += m;
            } else if dot == cos_t {
                ties += m;
            }
        }
        Ok(DiscCount {
            count,
            boundary_ties: ties,
        })
    }
}

/// User-supplied density on the sphere (w.r.t. the uniform measure).
pub type SphereDensity = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Law of the disc centre for local statistics.
#[derive(Clone)]
pub enum DirectionLaw {
    Uniform,
    /// Rejection sampling against the uniform law: `density` is a probability
    /// density w.r.t. the uniform measure on the sphere, bounded by `bound`.
    Rejection {
        density: SphereDensity,
        bound: f64,
    },
}

impl DirectionLaw {
    fn sample(&self, rng: &mut impl Rng, dimension: usize) -> Vec<f64> {
        loop {
            let v = random_unit_vector(rng, dimension);
            match self {
                DirectionLaw::Uniform => return v,
                DirectionLaw::Rejection { density, bound } => {
                    if rng.random::<f64>() * bound <= density(&v) {
                        return v;
                    }
                }
            }
        }
    }
}

/// Uniform direction on S^(d-1): angle parametrization for d = 2,
/// normalized Gaussian vector otherwise.
pub fn random_unit_vector(rng: &mut impl Rng, dimension: usize) -> Vec<f64> {
    if dimension == 2 {
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        return vec![theta.cos(), theta.sin()];
    }
    // Normalized Gaussian vector.
    loop {
        let v: Vec<f64> = (0..dimension)
            .map(|_| rng.sample(rand_distr::StandardNormal))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Empirical law of the disc count over `n_draws` independent centres drawn
/// from `law`. Per-draw RNG streams are indexed by the draw number, so the
/// result does not depend on the worker count.
#[allow(clippy::too_many_arguments)]
pub fn local_statistics(
    sample: &DirectionSample,
    sigma: f64,
    annulus_inner: f64,
    radius: f64,
    window_measure: f64,
    law: &DirectionLaw,
    n_draws: u64,
    seed: u64,
) -> Result<CountDistribution, DirectionsError> {
    // Validate the cap geometry once before the parallel loop.
    let area = disc_area(
        sigma,
        annulus_inner,
        radius,
        window_measure,
        sample.dimension,
    );
    cap_geodesic_radius(sample.dimension, area)?;
    let stream_seed = derive_seed(seed, "directions.local_statistics");
    let outcomes: Vec<(u64, u64)> = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(stream_seed, i);
            let v = law.sample(&mut rng, sample.dimension);
            let dc = disc_count(sample, &v, sigma, annulus_inner, radius, window_measure)
                .expect("cap checked above");
            (dc.count, dc.boundary_ties)
        })
        .collect();
    let counts: Vec<u64> = outcomes.iter().map(|o| o.0).collect();
    let mut dist = CountDistribution::from_counts(&counts);
    dist.ties = outcomes.iter().map(|o| o.1).sum();
    Ok(dist)
}

/// Normalized gap distribution of the directions (d = 2): the empirical CDF
/// of N * (consecutive circular differences) of the sorted angles, including
/// the wraparound gap.
pub fn gap_distribution(sample: &DirectionSample) -> Result<EmpiricalCdf, DirectionsError> {
    if sample.dimension != 2 {
        return Err(DirectionsError::UnsupportedDimension(sample.dimension));
    }
    let n = sample.total;
    if n < 2 {
        return Err(DirectionsError::TooFewDirections(n as usize));
    }
    let mut gaps = Vec::with_capacity(n as usize);
    let scale = n as f64;
    let mut prev: Option<f64> = None;
    let mut first = 0.0;
    for (&a, &m) in sample.angles.iter().zip(&sample.multiplicities) {
        match prev {
            None => first = a,
            Some(p) => gaps.push(scale * (a - p)),
        }
        // Coinciding directions contribute zero gaps.
        gaps.extend(std::iter::repeat_n(0.0, m as usize - 1));
        prev = Some(a);
    }
    gaps.push(scale * (first + 1.0 - prev.unwrap()));
    Ok(EmpiricalCdf::from_samples(gaps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::{enumerate, PointConfig, Shift};
    use crate::window::CongruenceWindow;
    use proptest::prelude::*;

    fn batch_from(points: &[[f64; 2]]) -> PointBatch {
        PointBatch {
            dimension: 2,
            points: points.iter().flatten().copied().collect(),
            meta: crate::pointset::BatchMeta {
                config_hash: 0,
                wall_time_s: 0.0,
                peak_rss_bytes: None,
                annulus_slack: 0.0,
            },
        }
    }

    #[test]
    fn collinear_points_aggregate_multiplicity() {
        let batch = batch_from(&[[1.0, 0.0], [2.0, 0.0]]);
        let kept = project_directions(&batch, Multiplicity::Keep).unwrap();
        assert_eq!(kept.total(), 2);
        assert_eq!(kept.angles(), &[0.0, 0.0]);
        let collapsed = project_directions(&batch, Multiplicity::Collapse).unwrap();
        assert_eq!(collapsed.total(), 2);
        assert_eq!(collapsed.angles(), &[0.0]);
        assert_eq!(collapsed.multiplicities, vec![2]);
    }

    #[test]
    fn diagonal_direction() {
        let batch = batch_from(&[[1.0, 1.0]]);
        let s = project_directions(&batch, Multiplicity::Keep).unwrap();
        assert!((s.angles()[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_rejected() {
        let batch = batch_from(&[[0.0, 0.0]]);
        assert!(matches!(
            project_directions(&batch, Multiplicity::Keep),
            Err(DirectionsError::ZeroVector)
        ));
    }

    #[test]
    fn eight_visible_points_project_to_eighths() {
        let cfg = PointConfig::new(
            CongruenceWindow::primitive_exact(2).unwrap(),
            Shift::zero(2),
            0.0,
            1.5,
        )
        .unwrap();
        let sample = project_directions(&enumerate(&cfg).unwrap(), Multiplicity::Keep).unwrap();
        assert_eq!(sample.total(), 8);
        for (i, &a) in sample.angles().iter().enumerate() {
            assert!((a - i as f64 / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn arc_counts_with_wraparound() {
        let s = DirectionSample::from_angles(vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(s.count_in_arc(0.9, 0.2).count, 1); // wraps over 0.0
        assert_eq!(s.count_in_arc(0.0, 0.26).count, 2); // half-open right end
        assert_eq!(s.count_in_arc(0.0, 0.25).count, 1);
        assert_eq!(s.count_in_arc(0.7, 1.0).count, 4); // full circle
    }

    #[test]
    fn arc_partition_recovers_total() {
        let cfg = PointConfig::new(
            CongruenceWindow::primitive_exact(2).unwrap(),
            Shift::zero(2),
            0.0,
            60.0,
        )
        .unwrap();
        let s = project_directions(&enumerate(&cfg).unwrap(), Multiplicity::Keep).unwrap();
        for parts in [7u32, 16, 97] {
            let len = 1.0 / parts as f64;
            let total: u64 = (0..parts)
                .map(|k| s.count_in_arc(k as f64 * len, len).count)
                .sum();
            assert_eq!(total, s.total(), "partition into {parts}");
        }
    }

    #[test]
    fn tiny_cap_is_empty() {
        let s = DirectionSample::from_angles(vec![0.1, 0.4, 0.9]);
        let dc = disc_count(&s, &[1.0, 0.0], 1e-300, 0.0, 100.0, 0.6).unwrap();
        assert_eq!(dc.count, 0);
    }

    #[test]
    fn disc_arc_length_formula_matches_spec_constant() {
        // d = 2, c = 0, primitive window: arc length sigma pi^2 / (3 T^2).
        let m_f = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let sigma = 1.7;
        let t = 250.0;
        let area = disc_area(sigma, 0.0, t, m_f, 2);
        let expected = sigma * std::f64::consts::PI.powi(2) / (3.0 * t * t);
        assert!((area - expected).abs() < 1e-15 * expected);
    }

    #[test]
    fn cap_radius_inversions_match_area() {
        for d in 2..=4usize {
            for frac in [1e-6, 1e-3, 0.1, 0.5, 0.99] {
                let area = frac * sphere_area(d);
                let t = cap_geodesic_radius(d, area).unwrap();
                // Re-integrate the cap area numerically as an oracle.
                let n = 400_000;
                let mut integral = 0.0;
                for i in 0..n {
                    let phi = (i as f64 + 0.5) * t / n as f64;
                    integral += phi.sin().powi(d as i32 - 2) * t / n as f64;
                }
                let recovered = integral * sphere_area(d - 1).max(2.0);
                let recovered = if d == 2 { 2.0 * t } else { recovered };
                assert!(
                    (recovered - area).abs() < 1e-4 * sphere_area(d),
                    "d = {d}, frac = {frac}: {recovered} vs {area}"
                );
            }
        }
        assert!(matches!(
            cap_geodesic_radius(2, 100.0),
            Err(DirectionsError::CapTooLarge { .. })
        ));
        assert!(matches!(
            cap_geodesic_radius(5, 0.1),
            Err(DirectionsError::CapDimension(5))
        ));
    }

    #[test]
    fn whole_circle_cap_gives_point_mass_at_n() {
        let s = DirectionSample::from_angles(vec![0.0, 0.3, 0.6]);
        // sigma chosen so the disc area equals the full circle.
        let m_f = 1.0;
        let t: f64 = 2.0;
        let sigma = std::f64::consts::TAU * m_f * t * t / 2.0;
        let dist =
            local_statistics(&s, sigma, 0.0, t, m_f, &DirectionLaw::Uniform, 200, 9).unwrap();
        assert_eq!(dist.prob(3), 1.0);
        assert_eq!(dist.mean(), 3.0);
    }

    #[test]
    fn local_statistics_mean_approaches_sigma() {
        let m_f = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let mut means = Vec::new();
        for t in [250.0, 500.0] {
            let cfg = PointConfig::new(
                CongruenceWindow::primitive_exact(2).unwrap(),
                Shift::Irrational(vec![
                    crate::pointset::IrrationalCoord {
                        label: "sqrt(2)".into(),
                        value: 2f64.sqrt(),
                    },
                    crate::pointset::IrrationalCoord {
                        label: "sqrt(3)".into(),
                        value: 3f64.sqrt(),
                    },
                ]),
                0.0,
                t,
            )
            .unwrap();
            let s = project_directions(&enumerate(&cfg).unwrap(), Multiplicity::Keep).unwrap();
            let dist =
                local_statistics(&s, 1.0, 0.0, t, m_f, &DirectionLaw::Uniform, 10_000, 42).unwrap();
            means.push(dist.mean());
        }
        for m in &means {
            assert!((m - 1.0).abs() < 0.05, "means = {means:?}");
        }
    }

    #[test]
    fn rational_and_irrational_shifts_have_distinct_local_laws() {
        let m_f = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let t = 500.0;
        let window = CongruenceWindow::primitive_exact(2).unwrap();
        let rational = PointConfig::new(
            window.clone(),
            Shift::Rational(vec![
                num_rational::Rational64::new(1, 2),
                num_rational::Rational64::new(1, 2),
            ]),
            0.0,
            t,
        )
        .unwrap();
        let irrational = PointConfig::new(
            window,
            Shift::Irrational(vec![
                crate::pointset::IrrationalCoord {
                    label: "sqrt(2)".into(),
                    value: 2f64.sqrt(),
                },
                crate::pointset::IrrationalCoord {
                    label: "sqrt(3)".into(),
                    value: 3f64.sqrt(),
                },
            ]),
            0.0,
            t,
        )
        .unwrap();
        let n_draws = 10_000;
        let dists: Vec<CountDistribution> = [rational, irrational]
            .iter()
            .map(|cfg| {
                let s = project_directions(&enumerate(cfg).unwrap(), Multiplicity::Keep).unwrap();
                local_statistics(&s, 1.0, 0.0, t, m_f, &DirectionLaw::Uniform, n_draws, 7).unwrap()
            })
            .collect();
        let separated = (0..=6u64).any(|r| {
            let gap = (dists[0].prob(r) - dists[1].prob(r)).abs();
            let se = (dists[0].stderr(r).powi(2) + dists[1].stderr(r).powi(2)).sqrt();
            gap > 3.0 * se
        });
        assert!(
            separated,
            "laws should differ by > 3 combined standard errors in some bin"
        );
    }

    #[test]
    fn equally_spaced_angles_gap_cdf_is_step_at_one() {
        let n = 64;
        let s = DirectionSample::from_angles((0..n).map(|k| k as f64 / n as f64).collect());
        let cdf = gap_distribution(&s).unwrap();
        assert_eq!(cdf.cdf(1.0 - 1e-12), 0.0);
        assert_eq!(cdf.cdf(1.0), 1.0);
        assert!((cdf.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_mean_is_one_for_visible_points() {
        let cfg = PointConfig::new(
            CongruenceWindow::primitive_exact(2).unwrap(),
            Shift::Rational(vec![
                num_rational::Rational64::new(1, 2),
                num_rational::Rational64::new(1, 2),
            ]),
            0.0,
            200.0,
        )
        .unwrap();
        let s = project_directions(&enumerate(&cfg).unwrap(), Multiplicity::Keep).unwrap();
        let cdf = gap_distribution(&s).unwrap();
        assert!((cdf.mean() - 1.0).abs() < 1e-10, "mean = {}", cdf.mean());
    }

    #[test]
    fn gap_distribution_rotation_invariant() {
        let cfg = PointConfig::new(
            CongruenceWindow::primitive_exact(2).unwrap(),
            Shift::zero(2),
            0.0,
            80.0,
        )
        .unwrap();
        let batch = enumerate(&cfg).unwrap();
        let phi = 0.7f64;
        let rotated = PointBatch {
            dimension: 2,
            points: batch
                .iter_points()
                .flat_map(|p| {
                    [
                        p[0] * phi.cos() - p[1] * phi.sin(),
                        p[0] * phi.sin() + p[1] * phi.cos(),
                    ]
                })
                .collect(),
            meta: batch.meta.clone(),
        };
        let g1 =
            gap_distribution(&project_directions(&batch, Multiplicity::Keep).unwrap()).unwrap();
        let g2 =
            gap_distribution(&project_directions(&rotated, Multiplicity::Keep).unwrap()).unwrap();
        for (a, b) in g1.samples().iter().zip(g2.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gap_requires_two_directions_and_dimension_two() {
        let s = DirectionSample::from_angles(vec![0.5]);
        assert!(matches!(
            gap_distribution(&s),
            Err(DirectionsError::TooFewDirections(1))
        ));
        let batch3 = PointBatch {
            dimension: 3,
            points: vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0],
            meta: crate::pointset::BatchMeta {
                config_hash: 0,
                wall_time_s: 0.0,
                peak_rss_bytes: None,
                annulus_slack: 0.0,
            },
        };
        let s3 = project_directions(&batch3, Multiplicity::Keep).unwrap();
        assert!(matches!(
            gap_distribution(&s3),
            Err(DirectionsError::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn three_dimensional_disc_count() {
        let batch3 = PointBatch {
            dimension: 3,
            points: vec![3.0, 0.0, 0.0, 0.0, 5.0, 0.0, -2.0, 0.0, 0.0],
            meta: crate::pointset::BatchMeta {
                config_hash: 0,
                wall_time_s: 0.0,
                peak_rss_bytes: None,
                annulus_slack: 0.0,
            },
        };
        let s = project_directions(&batch3, Multiplicity::Keep).unwrap();
        // A cap of a quarter of the sphere around +x holds exactly (1,0,0).
        let sigma_area = sphere_area(3) / 4.0;
        let t = 1.0;
        let m_f = 1.0;
        let sigma = sigma_area * m_f * t / 3.0;
        let dc = disc_count(&s, &[1.0, 0.0, 0.0], sigma, 0.0, t, m_f).unwrap();
        assert_eq!(dc.count, 1);
    }

    proptest! {
        #[test]
        fn gap_mean_always_one(angles in prop::collection::vec(0.0f64..1.0, 2..400)) {
            let s = DirectionSample::from_angles(angles);
            let cdf = gap_distribution(&s).unwrap();
            prop_assert!((cdf.mean() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn arc_counts_never_exceed_total(
            angles in prop::collection::vec(0.0f64..1.0, 1..100),
            start in 0.0f64..1.0,
            len in 0.0f64..1.0,
        ) {
            let s = DirectionSample::from_angles(angles);
            let dc = s.count_in_arc(start, len);
            prop_assert!(dc.count <= s.total());
        }
    }
}
