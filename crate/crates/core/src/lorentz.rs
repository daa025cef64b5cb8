//! Lorentz-gas free path lengths against a field of ρ-balls centred at the
//! points of a cut-and-project set, and the empirical Boltzmann–Grad
//! distribution of ρ^(d-1) τ over random directions.

use rayon::prelude::*;
use thiserror::Error;

use crate::pointset::Shift;
use crate::rng::{derive_seed, stream_rng};
use crate::stats::SurvivalCurve;
use crate::window::CongruenceWindow;

#[derive(Debug, Error)]
pub enum LorentzError {
    #[error("scatterer radius must satisfy 0 < rho < 1/2 (non-overlap), got {0}")]
    BadRadius(f64),
    #[error("direction must be a unit vector")]
    BadDirection,
    #[error("t_max must be positive and finite")]
    BadHorizon,
    #[error("initial point lies strictly inside the scatterer at {0:?}")]
    InsideScatterer(Vec<i64>),
    #[error("excluded centre {0:?} is not a point of the set")]
    ExcludedNotInSet(Vec<i64>),
    #[error("dimension mismatch between field and query")]
    DimensionMismatch,
    #[error("xi grid must be nonempty and strictly increasing")]
    BadGrid,
}

/// Scatterer configuration: balls of radius ρ at every window point m + α.
/// Membership is a lazy predicate; the set is never enumerated up front.
#[derive(Clone, Debug)]
pub struct ScattererField {
    pub window: CongruenceWindow,
    pub shift: Shift,
    pub rho: f64,
    /// Ball to leave out, as its lattice vector (the §-rule for q in the set).
    pub excluded: Option<Vec<i64>>,
}

impl ScattererField {
    pub fn new(
        window: CongruenceWindow,
        shift: Shift,
        rho: f64,
        excluded: Option<Vec<i64>>,
    ) -> Result<Self, LorentzError> {
        if !(rho > 0.0 && rho < 0.5) {
            return Err(LorentzError::BadRadius(rho));
        }
        if let Some(m) = &excluded {
            if m.len() != window.dimension() || !window.contains(m) {
                return Err(LorentzError::ExcludedNotInSet(m.clone()));
            }
        }
        Ok(ScattererField {
            window,
            shift,
            rho,
            excluded,
        })
    }

    pub fn dimension(&self) -> usize {
        self.window.dimension()
    }

    #[inline]
    fn accepts(&self, m: &[i64]) -> bool {
        if let Some(e) = &self.excluded {
            if e == m {
                return false;
            }
        }
        self.window.contains(m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlightOutcome {
    /// First hit: the entry time and the lattice vector of the hit scatterer.
    Hit { tau: f64, point: Vec<i64> },
    /// No hit up to the horizon.
    Censored,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlightResult {
    pub outcome: FlightOutcome,
    /// Slabs traversed by the walker (performance metric).
    pub slabs: u64,
}

impl FlightResult {
    pub fn tau(&self) -> Option<f64> {
        match &self.outcome {
            FlightOutcome::Hit { tau, .. } => Some(*tau),
            FlightOutcome::Censored => None,
        }
    }
}

/// An integer point within perpendicular distance ρ of the ray segment.
#[derive(Clone, Debug, PartialEq)]
pub struct RayCandidate {
    pub point: Vec<i64>,
    /// Along-ray coordinate of the centre projection.
    pub along: f64,
    /// Squared perpendicular distance from the centre to the ray line.
    pub perp2: f64,
}

struct RayWalk<'a> {
    field: &'a ScattererField,
    q: &'a [f64],
    v: &'a [f64],
    alpha: Vec<f64>,
    slab_dt: f64,
    slabs: u64,
}

impl<'a> RayWalk<'a> {
    fn new(
        field: &'a ScattererField,
        q: &'a [f64],
        v: &'a [f64],
        t_max: f64,
    ) -> Result<Self, LorentzError> {
        let d = field.dimension();
        if q.len() != d || v.len() != d {
            return Err(LorentzError::DimensionMismatch);
        }
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        if (norm2 - 1.0).abs() > 1e-9 {
            return Err(LorentzError::BadDirection);
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(LorentzError::BadHorizon);
        }
        let dominant = (0..d)
            .max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()))
            .unwrap();
        Ok(RayWalk {
            field,
            q,
            v,
            alpha: field.shift.as_f64(),
            // One unit of the dominant coordinate per slab.
            slab_dt: 1.0 / v[dominant].abs(),
            slabs: 0,
        })
    }

    /// Calls `visit(m, centre, along, perp2)` for every accepted centre whose
    /// coordinates are compatible with the slab `[t0, t1]` inflated by the
    /// candidate radius; duplicates across adjacent slabs are possible.
    fn visit_slab<F: FnMut(&[i64], &[f64], f64, f64)>(
        &mut self,
        t0: f64,
        t1: f64,
        margin: f64,
        visit: &mut F,
    ) {
        self.slabs += 1;
        let d = self.field.dimension();
        let mut ranges = Vec::with_capacity(d);
        for i in 0..d {
            let a = self.q[i] + t0 * self.v[i];
            let b = self.q[i] + t1 * self.v[i];
            let lo = (a.min(b) - margin - self.alpha[i]).ceil() as i64;
            let hi = (a.max(b) + margin - self.alpha[i]).floor() as i64;
            ranges.push((lo, hi));
        }
        let mut m = ranges.iter().map(|r| r.0).collect::<Vec<i64>>();
        if m.iter().zip(&ranges).any(|(mi, r)| *mi > r.1) {
            return;
        }
        let mut centre = vec![0f64; d];
        'outer: loop {
            if self.field.accepts(&m) {
                let mut along = 0.0;
                let mut dist2 = 0.0;
                for i in 0..d {
                    centre[i] = m[i] as f64 + self.alpha[i];
                    let rel = centre[i] - self.q[i];
                    along += rel * self.v[i];
                    dist2 += rel * rel;
                }
                let perp2 = (dist2 - along * along).max(0.0);
                visit(&m, &centre, along, perp2);
            }
            // Mixed-radix increment over the candidate box.
            for i in (0..d).rev() {
                if m[i] < ranges[i].1 {
                    m[i] += 1;
                    continue 'outer;
                }
                m[i] = ranges[i].0;
            }
            break;
        }
    }
}

/// Exact first-hit time of the ray against the scatterer field: the smallest
/// t in (0, t_max] with |q + t v - centre| <= ρ, computed per candidate as
/// t = s - sqrt(ρ² - h²) with s the along-ray projection and h the
/// perpendicular distance. Tangential hits (h = ρ) count as hits.
pub fn free_path(
    field: &ScattererField,
    q: &[f64],
    v: &[f64],
    t_max: f64,
) -> Result<FlightResult, LorentzError> {
    let mut walk = RayWalk::new(field, q, v, t_max)?;
    check_not_inside(field, q)?;
    let rho = field.rho;
    let rho2 = rho * rho;
    let d = field.dimension();
    // A centre first reachable in a later slab cannot undercut a hit that
    // precedes the slab start by more than 2ρ√d.
    let lookback = 2.0 * rho * (d as f64).sqrt();
    let mut best: Option<(f64, Vec<i64>)> = None;
    let mut t0 = 0.0;
    while t0 < t_max {
        if let Some((bt, _)) = &best {
            if t0 - lookback > *bt {
                break;
            }
        }
        let t1 = (t0 + walk.slab_dt).min(t_max);
        let mut local: Option<(f64, Vec<i64>)> = None;
        walk.visit_slab(t0, t1, rho, &mut |m, _, along, perp2| {
            if along <= 0.0 || perp2 > rho2 {
                return;
            }
            let t = along - (rho2 - perp2).sqrt();
            if t > 0.0 && t <= t_max {
                let better = match &local {
                    None => true,
                    Some((bt, bm)) => t < *bt || (t == *bt && m < bm.as_slice()),
                };
                if better {
                    local = Some((t, m.to_vec()));
                }
            }
        });
        if let Some((t, m)) = local {
            let better = match &best {
                None => true,
                Some((bt, bm)) => t < *bt || (t == *bt && m < *bm),
            };
            if better {
                best = Some((t, m));
            }
        }
        t0 = t1;
    }
    let slabs = walk.slabs;
    Ok(FlightResult {
        outcome: match best {
            Some((tau, point)) => FlightOutcome::Hit { tau, point },
            None => FlightOutcome::Censored,
        },
        slabs,
    })
}

fn check_not_inside(field: &ScattererField, q: &[f64]) -> Result<(), LorentzError> {
    let d = field.dimension();
    let alpha = field.shift.as_f64();
    let mut ranges = Vec::with_capacity(d);
    for i in 0..d {
        let lo = (q[i] - field.rho - alpha[i]).ceil() as i64;
        let hi = (q[i] + field.rho - alpha[i]).floor() as i64;
        ranges.push((lo, hi));
    }
    let mut m: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if m.iter().zip(&ranges).any(|(mi, r)| *mi > r.1) {
        return Ok(());
    }
    'outer: loop {
        if field.accepts(&m) {
            let dist2: f64 = (0..d)
                .map(|i| {
                    let rel = m[i] as f64 + alpha[i] - q[i];
                    rel * rel
                })
                .sum();
            // Boundary starts (dist == rho) are treated as outside.
            if dist2 < field.rho * field.rho {
                return Err(LorentzError::InsideScatterer(m));
            }
        }
        for i in (0..d).rev() {
            if m[i] < ranges[i].1 {
                m[i] += 1;
                continue 'outer;
            }
            m[i] = ranges[i].0;
        }
        break;
    }
    Ok(())
}

/// Set points within perpendicular distance ρ of the segment
/// [q, q + t_max v], in increasing along-ray order (membership applied
/// lazily during the slab walk).
pub fn ray_candidates(
    field: &ScattererField,
    q: &[f64],
    v: &[f64],
    t_max: f64,
) -> Result<Vec<RayCandidate>, LorentzError> {
    let mut walk = RayWalk::new(field, q, v, t_max)?;
    let rho2 = field.rho * field.rho;
    let mut out: Vec<RayCandidate> = Vec::new();
    let mut t0 = 0.0;
    while t0 < t_max {
        let t1 = (t0 + walk.slab_dt).min(t_max);
        walk.visit_slab(t0, t1, field.rho, &mut |m, _, along, perp2| {
            if perp2 <= rho2 && (0.0..=t_max).contains(&along) {
                out.push(RayCandidate {
                    point: m.to_vec(),
                    along,
                    perp2,
                });
            }
        });
        t0 = t1;
    }
    out.sort_by(|a, b| {
        a.along
            .total_cmp(&b.along)
            .then_with(|| a.point.cmp(&b.point))
    });
    out.dedup_by(|a, b| a.point == b.point);
    Ok(out)
}

/// Count of set points in the open cylinder of the given radius about the
/// segment [origin, length * axis] (used by the cylinder-count invariants).
pub fn cylinder_count(
    field: &ScattererField,
    axis: &[f64],
    length: f64,
    radius: f64,
) -> Result<u64, LorentzError> {
    let d = field.dimension();
    let q = vec![0.0; d];
    // The walker only reads the field's membership predicate; the cylinder
    // radius enters as the candidate margin.
    let mut walk = RayWalk::new(field, &q, axis, length)?;
    let rho2 = radius * radius;
    let mut seen: std::collections::HashSet<Vec<i64>> = std::collections::HashSet::new();
    let mut t0 = 0.0;
    while t0 < length {
        let t1 = (t0 + walk.slab_dt).min(length);
        walk.visit_slab(t0, t1, radius, &mut |m, _, along, perp2| {
            if perp2 < rho2 && along > 0.0 && along < length {
                seen.insert(m.to_vec());
            }
        });
        t0 = t1;
    }
    Ok(seen.len() as u64)
}

/// Per-ρ empirical survival function of ρ^(d-1) τ over `n_dirs` random
/// directions. Flights with no hit up to the horizon (ξ_max + 1) ρ^(1-d)
/// are censored: they count as >= ξ at every grid point and their fraction
/// is reported on the curve.
#[allow(clippy::too_many_arguments)]
pub fn fpl_distribution(
    window: &CongruenceWindow,
    shift: &Shift,
    excluded: Option<Vec<i64>>,
    q: &[f64],
    rhos: &[f64],
    xi_grid: &[f64],
    n_dirs: u64,
    seed: u64,
) -> Result<Vec<(f64, SurvivalCurve)>, LorentzError> {
    if xi_grid.is_empty() || xi_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LorentzError::BadGrid);
    }
    let xi_max = *xi_grid.last().unwrap();
    let d = window.dimension();
    let mut out = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let field = ScattererField::new(window.clone(), shift.clone(), rho, excluded.clone())?;
        check_not_inside(&field, q)?;
        let t_max = (xi_max + 1.0) * rho.powi(1 - d as i32);
        let scale = rho.powi(d as i32 - 1);
        let stream_seed = derive_seed(seed, &format!("lorentz.fpl.rho={rho:.17e}"));
        let values: Vec<Option<f64>> = (0..n_dirs)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(stream_seed, i);
                let v = crate::directions::random_unit_vector(&mut rng, d);
                let flight = free_path(&field, q, &v, t_max).expect("start checked above");
                flight.tau().map(|tau| scale * tau)
            })
            .collect();
        out.push((rho, SurvivalCurve::from_values(xi_grid, &values)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn visible_field(rho: f64) -> ScattererField {
        ScattererField::new(
            CongruenceWindow::primitive_exact(2).unwrap(),
            Shift::zero(2),
            rho,
            None,
        )
        .unwrap()
    }

    #[test]
    fn axis_ray_hits_nearest_visible_point() {
        let field = visible_field(0.1);
        let flight = free_path(&field, &[0.0, 0.0], &[1.0, 0.0], 50.0).unwrap();
        match flight.outcome {
            FlightOutcome::Hit { tau, point } => {
                assert!((tau - 0.9).abs() < 1e-12);
                assert_eq!(point, vec![1, 0]);
            }
            FlightOutcome::Censored => panic!("expected a hit"),
        }
    }

    #[test]
    fn channel_ray_is_censored() {
        // y = 0.5 stays at distance 0.5 from every integer row.
        let field = visible_field(0.1);
        let flight = free_path(&field, &[0.3, 0.5], &[1.0, 0.0], 500.0).unwrap();
        assert_eq!(flight.outcome, FlightOutcome::Censored);
    }

    #[test]
    fn tangential_hit_counts() {
        // Ray along x from (0, 0.75) with rho = 0.25: the centre (1, 1) sits
        // at h = 0.25 = rho exactly (binary-exact), a discriminant-zero hit
        // at t equal to the along-ray projection s = 1.
        let field = visible_field(0.25);
        let hit = free_path(&field, &[0.0, 0.75], &[1.0, 0.0], 1.5).unwrap();
        match hit.outcome {
            FlightOutcome::Hit { tau, point } => {
                assert_eq!(point, vec![1, 1]);
                assert_eq!(tau, 1.0);
            }
            _ => panic!("expected tangential hit"),
        }
        // With that centre excluded the next axis-parallel candidate (2, 1)
        // lies beyond the horizon, so the flight is censored.
        let field = ScattererField::new(
            CongruenceWindow::primitive_exact(2).unwrap(),
            Shift::zero(2),
            0.25,
            Some(vec![1, 1]),
        )
        .unwrap();
        let clear = free_path(&field, &[0.0, 0.75], &[1.0, 0.0], 1.5).unwrap();
        assert_eq!(clear.outcome, FlightOutcome::Censored);
    }

    #[test]
    fn excluded_centre_is_skipped() {
        // Trivial window (scatterers at every integer point): starting at a
        // set point with its own ball excluded, the ray hits the neighbour.
        let field = ScattererField::new(
            CongruenceWindow::trivial(2).unwrap(),
            Shift::zero(2),
            0.1,
            Some(vec![0, 0]),
        )
        .unwrap();
        let flight = free_path(&field, &[0.0, 0.0], &[1.0, 0.0], 5.0).unwrap();
        match flight.outcome {
            FlightOutcome::Hit { tau, point } => {
                assert_eq!(point, vec![1, 0]);
                assert!((tau - 0.9).abs() < 1e-12);
            }
            _ => panic!("expected hit"),
        }
        // A non-origin exclusion skips to the next centre down the ray.
        let field = ScattererField::new(
            CongruenceWindow::trivial(2).unwrap(),
            Shift::zero(2),
            0.1,
            Some(vec![1, 0]),
        )
        .unwrap();
        let flight = free_path(&field, &[0.5, 0.0], &[1.0, 0.0], 5.0).unwrap();
        match flight.outcome {
            FlightOutcome::Hit { tau, point } => {
                assert_eq!(point, vec![2, 0]);
                assert!((tau - 1.4).abs() < 1e-12);
            }
            _ => panic!("expected hit"),
        }
    }

    #[test]
    fn inside_scatterer_is_an_error() {
        let field = visible_field(0.25);
        let err = free_path(&field, &[1.05, 0.0], &[0.0, 1.0], 5.0).unwrap_err();
        assert!(matches!(err, LorentzError::InsideScatterer(p) if p == vec![1, 0]));
        // Boundary start (distance exactly rho, binary-exact) is outside.
        assert!(free_path(&field, &[1.25, 0.0], &[0.0, 1.0], 5.0).is_ok());
    }

    #[test]
    fn field_validation() {
        assert!(matches!(
            ScattererField::new(
                CongruenceWindow::primitive_exact(2).unwrap(),
                Shift::zero(2),
                0.5,
                None
            ),
            Err(LorentzError::BadRadius(_))
        ));
        assert!(matches!(
            ScattererField::new(
                CongruenceWindow::primitive_exact(2).unwrap(),
                Shift::zero(2),
                0.1,
                Some(vec![2, 4]),
            ),
            Err(LorentzError::ExcludedNotInSet(_))
        ));
    }

    #[test]
    fn axis_candidates_lie_on_the_axis() {
        // Geometric walk over the trivial window: every (k, 0), k = 1..5.
        let field = ScattererField::new(
            CongruenceWindow::trivial(2).unwrap(),
            Shift::zero(2),
            0.1,
            None,
        )
        .unwrap();
        let cands = ray_candidates(&field, &[0.0, 0.0], &[1.0, 0.0], 5.0).unwrap();
        let points: Vec<Vec<i64>> = cands.iter().map(|c| c.point.clone()).collect();
        let expected: Vec<Vec<i64>> = (0..=5).map(|k| vec![k, 0]).collect();
        assert_eq!(points, expected);
        assert!(cands.windows(2).all(|w| w[0].along <= w[1].along));
        // Lazy membership: under the visible-point window only (1, 0) stays.
        let cands = ray_candidates(&visible_field(0.1), &[0.0, 0.0], &[1.0, 0.0], 5.0).unwrap();
        let points: Vec<Vec<i64>> = cands.iter().map(|c| c.point.clone()).collect();
        assert_eq!(points, vec![vec![1, 0]]);
    }

    #[test]
    fn candidates_match_brute_force_on_random_rays() {
        let field = visible_field(0.25);
        let mut rng = crate::rng::stream_rng(crate::rng::derive_seed(3, "rays"), 0);
        for _ in 0..100 {
            let q = [
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            ];
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            let v = [theta.cos(), theta.sin()];
            let t_max = 20.0;
            let walked = ray_candidates(&field, &q, &v, t_max).unwrap();
            // Brute force over the bounding box of the inflated segment.
            let mut brute = Vec::new();
            for mx in -25i64..=25 {
                for my in -25i64..=25 {
                    let m = [mx, my];
                    if !field.accepts(&m) {
                        continue;
                    }
                    let rel = [mx as f64 - q[0], my as f64 - q[1]];
                    let s = rel[0] * v[0] + rel[1] * v[1];
                    let h2 = (rel[0] * rel[0] + rel[1] * rel[1] - s * s).max(0.0);
                    if h2 <= field.rho * field.rho && (0.0..=t_max).contains(&s) {
                        brute.push((s, vec![mx, my]));
                    }
                }
            }
            brute.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            let brute_points: Vec<Vec<i64>> = brute.into_iter().map(|b| b.1).collect();
            let walked_points: Vec<Vec<i64>> = walked.into_iter().map(|c| c.point).collect();
            assert_eq!(walked_points, brute_points, "q = {q:?}, v = {v:?}");
        }
    }

    /// Independent oracle: scan every set point in the ball of radius
    /// t_max + rho and apply the entry-time formula directly.
    fn brute_force_free_path(
        field: &ScattererField,
        q: &[f64],
        v: &[f64],
        t_max: f64,
    ) -> FlightOutcome {
        let rho2 = field.rho * field.rho;
        let r = t_max + field.rho + 1.0;
        let mut best: Option<(f64, Vec<i64>)> = None;
        let lo = [(q[0] - r).floor() as i64, (q[1] - r).floor() as i64];
        let hi = [(q[0] + r).ceil() as i64, (q[1] + r).ceil() as i64];
        for mx in lo[0]..=hi[0] {
            for my in lo[1]..=hi[1] {
                let m = [mx, my];
                if !field.accepts(&m) {
                    continue;
                }
                let rel = [mx as f64 - q[0], my as f64 - q[1]];
                let s = rel[0] * v[0] + rel[1] * v[1];
                if s <= 0.0 {
                    continue;
                }
                let h2 = rel[0] * rel[0] + rel[1] * rel[1] - s * s;
                if h2 > rho2 {
                    continue;
                }
                let t = s - (rho2 - h2).sqrt();
                if t > 0.0 && t <= t_max {
                    let better = match &best {
                        None => true,
                        Some((bt, bm)) => t < *bt || (t == *bt && m.to_vec() < *bm),
                    };
                    if better {
                        best = Some((t, m.to_vec()));
                    }
                }
            }
        }
        match best {
            Some((tau, point)) => FlightOutcome::Hit { tau, point },
            None => FlightOutcome::Censored,
        }
    }

    #[test]
    fn free_path_matches_brute_force_oracle() {
        let seed = crate::rng::derive_seed(17, "fpl-oracle");
        for i in 0..200 {
            let mut rng = crate::rng::stream_rng(seed, i);
            let rho = 0.02 + 0.4 * rng.random::<f64>();
            let field = visible_field(rho);
            let q = [
                rng.random::<f64>() * 4.0 - 2.0,
                rng.random::<f64>() * 4.0 - 2.0,
            ];
            if check_not_inside(&field, &q).is_err() {
                continue;
            }
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            let v = [theta.cos(), theta.sin()];
            let walked = free_path(&field, &q, &v, 30.0).unwrap();
            let oracle = brute_force_free_path(&field, &q, &v, 30.0);
            assert_eq!(walked.outcome, oracle, "i = {i}, q = {q:?}, rho = {rho}");
        }
    }

    #[test]
    fn candidate_sets_nest_as_rho_grows() {
        // The slab walk derives its candidate margins from rho on every
        // call: shrinking rho can only shrink the candidate set.
        let mut rng = crate::rng::stream_rng(crate::rng::derive_seed(29, "rho-scaling"), 0);
        for _ in 0..50 {
            let q = [
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            ];
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            let v = [theta.cos(), theta.sin()];
            let rho = 0.05 + 0.15 * rng.random::<f64>();
            let small = ray_candidates(&visible_field(rho), &q, &v, 15.0).unwrap();
            let large = ray_candidates(&visible_field(2.0 * rho), &q, &v, 15.0).unwrap();
            let large_set: std::collections::HashSet<Vec<i64>> =
                large.into_iter().map(|c| c.point).collect();
            for c in small {
                assert!(large_set.contains(&c.point), "candidate lost at 2x rho");
            }
        }
    }

    #[test]
    fn three_dimensional_free_path_matches_brute_force() {
        let window = CongruenceWindow::primitive_exact(3).unwrap();
        let field = ScattererField::new(window, Shift::zero(3), 0.3, None).unwrap();
        let seed = crate::rng::derive_seed(31, "fpl-3d");
        let t_max = 12.0;
        let mut checked = 0;
        let mut stream = 0;
        while checked < 60 {
            let mut rng = crate::rng::stream_rng(seed, stream);
            stream += 1;
            let q: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let v = crate::directions::random_unit_vector(&mut rng, 3);
            let Ok(walked) = free_path(&field, &q, &v, t_max) else {
                continue;
            };
            // Exhaustive scan over the covering box.
            let rho2 = field.rho * field.rho;
            let r = t_max + field.rho + 1.0;
            let mut best: Option<(f64, Vec<i64>)> = None;
            for mx in (q[0] - r).floor() as i64..=(q[0] + r).ceil() as i64 {
                for my in (q[1] - r).floor() as i64..=(q[1] + r).ceil() as i64 {
                    for mz in (q[2] - r).floor() as i64..=(q[2] + r).ceil() as i64 {
                        let m = [mx, my, mz];
                        if !field.accepts(&m) {
                            continue;
                        }
                        let rel: Vec<f64> =
                            m.iter().zip(&q).map(|(&mi, qi)| mi as f64 - qi).collect();
                        let s: f64 = rel.iter().zip(&v).map(|(a, b)| a * b).sum();
                        if s <= 0.0 {
                            continue;
                        }
                        let h2 = rel.iter().map(|x| x * x).sum::<f64>() - s * s;
                        if h2 > rho2 {
                            continue;
                        }
                        let t = s - (rho2 - h2).sqrt();
                        if t > 0.0 && t <= t_max {
                            let better = match &best {
                                None => true,
                                Some((bt, bm)) => t < *bt || (t == *bt && m.to_vec() < *bm),
                            };
                            if better {
                                best = Some((t, m.to_vec()));
                            }
                        }
                    }
                }
            }
            let oracle = match best {
                Some((tau, point)) => FlightOutcome::Hit { tau, point },
                None => FlightOutcome::Censored,
            };
            assert_eq!(walked.outcome, oracle, "q = {q:?}, v = {v:?}");
            checked += 1;
        }
    }

    #[test]
    fn survival_curve_shape() {
        let window = CongruenceWindow::primitive_exact(2).unwrap();
        let shift = Shift::zero(2);
        let q = [2f64.sqrt() / 10.0, 3f64.sqrt() / 10.0];
        let grid: Vec<f64> = (0..=20).map(|k| 0.2 * k as f64).collect();
        let curves = fpl_distribution(&window, &shift, None, &q, &[0.05], &grid, 2000, 5).unwrap();
        let (_, curve) = &curves[0];
        assert_eq!(curve.survival[0], 1.0, "F(0) = 1 since tau > 0");
        assert!(
            curve.survival.windows(2).all(|w| w[0] >= w[1]),
            "nonincreasing"
        );
        assert!(curve.censored_frac < 0.2);
    }

    #[test]
    fn boltzmann_grad_scaling_is_cauchy() {
        let window = CongruenceWindow::primitive_exact(2).unwrap();
        let shift = Shift::zero(2);
        let q = [2f64.sqrt() / 10.0, 3f64.sqrt() / 10.0];
        let grid: Vec<f64> = (0..=16).map(|k| 0.25 * k as f64).collect();
        let curves =
            fpl_distribution(&window, &shift, None, &q, &[0.04, 0.02], &grid, 4000, 7).unwrap();
        let sup = curves[0].1.sup_distance(&curves[1].1);
        assert!(sup <= 0.05, "sup distance {sup}");
    }

    #[test]
    fn cylinder_counts_stay_bounded_along_the_flow() {
        // Count set points in C_xi Phi^{-t} K(v): a cylinder of length
        // xi e^t and radius e^{-t} along a uniform direction. The bounded-
        // expectation lemma caps the mean by a constant of scale
        // 2 vol(B_R) m_f with R^2 = xi^2 + 1.
        let field = ScattererField::new(
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
            0.1,
            None,
        )
        .unwrap();
        let xi = 2.0f64;
        let m_f = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let bound = 2.0 * std::f64::consts::PI * (xi * xi + 1.0) * m_f;
        let seed = crate::rng::derive_seed(23, "cylinder-mean");
        for t in [2.0f64, 4.0, 6.0] {
            let len = xi * t.exp();
            let rad = (-t).exp();
            let mean: f64 = (0..400u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = crate::rng::stream_rng(seed, i);
                    let theta = rng.random::<f64>() * std::f64::consts::TAU;
                    cylinder_count(&field, &[theta.cos(), theta.sin()], len, rad).unwrap() as f64
                })
                .sum::<f64>()
                / 400.0;
            assert!(mean <= bound, "t = {t}: mean {mean} > bound {bound}");
            assert!(mean > 0.1, "t = {t}: degenerate mean {mean}");
        }
    }
}
