//! Enumeration of realized cut-and-project point sets.
//!
//! A configuration fixes a window, a real shift alpha (tagged rational or
//! irrational — the tag, not floating-point detection, decides which limit
//! formula applies downstream), an integer unimodular basis and an annulus
//! c*T <= |x| < T. Enumeration sieves the bounding box row by row; output
//! order is lexicographic in the lattice vector regardless of worker count.

use num_rational::Rational64;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::fnv1a;
use crate::window::{CongruenceWindow, WindowError};

#[derive(Debug, Error)]
pub enum PointsetError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("expected point count {estimate:.3e} exceeds the bound {bound:.1e}")]
    CountBound { estimate: f64, bound: f64 },
    #[error("windows are not nested (truncated must contain exact)")]
    NotNested,
    #[error(transparent)]
    Window(#[from] WindowError),
}

/// One real shift coordinate with a symbolic name, e.g. `sqrt(2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrationalCoord {
    pub label: String,
    pub value: f64,
}

/// The shift alpha with its rationality tag.
#[derive(Clone, Debug, PartialEq)]
pub enum Shift {
    Rational(Vec<Rational64>),
    Irrational(Vec<IrrationalCoord>),
}

impl Shift {
    pub fn zero(dimension: usize) -> Self {
        Shift::Rational(vec![Rational64::new(0, 1); dimension])
    }

    pub fn dimension(&self) -> usize {
        match self {
            Shift::Rational(v) => v.len(),
            Shift::Irrational(v) => v.len(),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Shift::Rational(_))
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            Shift::Rational(v) => v
                .iter()
                .map(|r| *r.numer() as f64 / *r.denom() as f64)
                .collect(),
            Shift::Irrational(v) => v.iter().map(|c| c.value).collect(),
        }
    }

    /// Common denominator of a rational shift (1 for integral ones).
    pub fn common_denominator(&self) -> Option<u64> {
        match self {
            Shift::Rational(v) => Some(crate::window::shift_denominator(v)),
            Shift::Irrational(_) => None,
        }
    }
}

/// Configuration of a realized point set P(L, W) + alpha inside an annulus.
#[derive(Clone, Debug)]
pub struct PointConfig {
    pub dimension: usize,
    pub window: CongruenceWindow,
    pub shift: Shift,
    /// Row-major integer basis of the base lattice; must be unimodular.
    pub basis: Vec<Vec<i64>>,
    pub annulus_inner: f64,
    pub radius: f64,
    pub exclude_origin: bool,
}

impl PointConfig {
    pub fn new(
        window: CongruenceWindow,
        shift: Shift,
        annulus_inner: f64,
        radius: f64,
    ) -> Result<Self, PointsetError> {
        let dimension = window.dimension();
        let basis = (0..dimension)
            .map(|i| (0..dimension).map(|j| i64::from(i == j)).collect())
            .collect();
        let cfg = PointConfig {
            dimension,
            window,
            shift,
            basis,
            annulus_inner,
            radius,
            exclude_origin: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_basis(mut self, basis: Vec<Vec<i64>>) -> Result<Self, PointsetError> {
        self.basis = basis;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), PointsetError> {
        let bad = |m: &str| Err(PointsetError::BadConfig(m.to_string()));
        if self.dimension < 2 {
            return bad("dimension must be at least 2");
        }
        if self.window.dimension() != self.dimension {
            return bad("window dimension mismatch");
        }
        if self.shift.dimension() != self.dimension {
            return bad("shift dimension mismatch");
        }
        if !(0.0..1.0).contains(&self.annulus_inner) {
            return bad("annulus parameter c must lie in [0, 1)");
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("radius T must be positive and finite");
        }
        if self.basis.len() != self.dimension
            || self.basis.iter().any(|row| row.len() != self.dimension)
        {
            return bad("basis must be a d x d integer matrix");
        }
        if det_integer(&self.basis).abs() != 1 {
            return bad("basis must be unimodular (det = +-1)");
        }
        Ok(())
    }

    /// Stable hash of every field that affects the generated set.
    pub fn config_hash(&self) -> u64 {
        let mut repr = format!(
            "d={};c={:.17e};T={:.17e};origin={};basis={:?};window={:?};",
            self.dimension,
            self.annulus_inner,
            self.radius,
            self.exclude_origin,
            self.basis,
            self.window,
        );
        match &self.shift {
            Shift::Rational(v) => repr.push_str(&format!("shift=rational{v:?}")),
            Shift::Irrational(v) => {
                for c in v {
                    repr.push_str(&format!("shift=irr({},{:.17e})", c.label, c.value));
                }
            }
        }
        fnv1a(repr.as_bytes())
    }

    /// Expected number of points, from the annulus volume and window measure.
    pub fn expected_count(&self) -> f64 {
        let d = self.dimension as i32;
        let vol = unit_ball_volume(self.dimension)
            * self.radius.powi(d)
            * (1.0 - self.annulus_inner.powi(d));
        vol * self.window.measure().as_float()
    }
}

/// A realized batch of points, flat row-major, with generation metadata.
#[derive(Clone, Debug)]
pub struct PointBatch {
    pub dimension: usize,
    pub points: Vec<f64>,
    pub meta: BatchMeta,
}

#[derive(Clone, Debug)]
pub struct BatchMeta {
    pub config_hash: u64,
    pub wall_time_s: f64,
    pub peak_rss_bytes: Option<u64>,
    /// Numerical slack of the float annulus test (0 when the test was exact).
    pub annulus_slack: f64,
}

impl PointBatch {
    pub fn count(&self) -> usize {
        self.points.len() / self.dimension
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dimension)
    }
}

/// Volume of the d-dimensional Euclidean unit ball.
pub fn unit_ball_volume(dimension: usize) -> f64 {
    let mut vol = [1.0, 2.0][dimension % 2];
    let mut d = dimension % 2;
    while d < dimension {
        d += 2;
        vol *= 2.0 * std::f64::consts::PI / d as f64;
    }
    vol
}

const COUNT_BOUND: f64 = 1e8;

enum AnnulusTest {
    /// |b v + a|^2 compared against integer-exact squared bounds.
    ScaledInteger {
        denom: i64,
        numer: Vec<i64>,
        lo2: f64,
        hi2: f64,
    },
    /// Plain f64 test on x = v + alpha.
    Float { alpha: Vec<f64>, lo2: f64, hi2: f64 },
}

impl AnnulusTest {
    fn new(cfg: &PointConfig) -> AnnulusTest {
        let (lo, hi) = (cfg.annulus_inner * cfg.radius, cfg.radius);
        match &cfg.shift {
            Shift::Rational(alpha) => {
                let denom = crate::window::shift_denominator(alpha) as i64;
                let numer = alpha
                    .iter()
                    .map(|r| {
                        let r = r.reduced();
                        *r.numer() * (denom / *r.denom())
                    })
                    .collect();
                // Squared thresholds are compared against exact integers; the
                // only ambiguity is an integer within one ulp of (T*b)^2.
                AnnulusTest::ScaledInteger {
                    denom,
                    numer,
                    lo2: (lo * denom as f64) * (lo * denom as f64),
                    hi2: (hi * denom as f64) * (hi * denom as f64),
                }
            }
            Shift::Irrational(alpha) => AnnulusTest::Float {
                alpha: alpha.iter().map(|c| c.value).collect(),
                lo2: lo * lo,
                hi2: hi * hi,
            },
        }
    }

    #[inline]
    fn accepts(&self, v: &[i64]) -> bool {
        match self {
            AnnulusTest::ScaledInteger {
                denom,
                numer,
                lo2,
                hi2,
            } => {
                let n: i128 = v
                    .iter()
                    .zip(numer)
                    .map(|(&vi, &ai)| {
                        let s = *denom as i128 * vi as i128 + ai as i128;
                        s * s
                    })
                    .sum();
                let n = n as f64;
                n >= *lo2 && n < *hi2
            }
            AnnulusTest::Float { alpha, lo2, hi2 } => {
                let n: f64 = v
                    .iter()
                    .zip(alpha)
                    .map(|(&vi, &ai)| {
                        let x = vi as f64 + ai;
                        x * x
                    })
                    .sum();
                n >= *lo2 && n < *hi2
            }
        }
    }
}

/// Streams the lattice vectors v (in the basis-transformed representation)
/// of every point of the configured set, in lexicographic order, calling
/// `visit(v, x)` with the shifted point x = v + alpha.
pub fn for_each_point<F: FnMut(&[i64], &[f64])>(
    cfg: &PointConfig,
    mut visit: F,
) -> Result<(), PointsetError> {
    cfg.validate()?;
    let (rows, bounds) = sieve_bounds(cfg);
    let test = AnnulusTest::new(cfg);
    let alpha = cfg.shift.as_f64();
    let origin = origin_vector(cfg);
    let mut v = vec![0i64; cfg.dimension];
    let mut x = vec![0f64; cfg.dimension];
    for row in rows.0..=rows.1 {
        v[0] = row;
        visit_row(
            cfg, &bounds, &test, &alpha, &origin, &mut v, &mut x, 1, &mut visit,
        );
    }
    Ok(())
}

/// The lattice vector that would land on the origin, when integral.
fn origin_vector(cfg: &PointConfig) -> Option<Vec<i64>> {
    if !cfg.exclude_origin {
        return None;
    }
    match &cfg.shift {
        Shift::Rational(alpha) => alpha
            .iter()
            .map(|r| {
                let r = r.reduced();
                (*r.denom() == 1).then_some(-*r.numer())
            })
            .collect(),
        Shift::Irrational(_) => None,
    }
}

fn sieve_bounds(cfg: &PointConfig) -> ((i64, i64), Vec<(i64, i64)>) {
    let alpha = cfg.shift.as_f64();
    let bounds: Vec<(i64, i64)> = alpha
        .iter()
        .map(|a| {
            let lo = (-a - cfg.radius).floor() as i64;
            let hi = (-a + cfg.radius).ceil() as i64;
            (lo, hi)
        })
        .collect();
    (bounds[0], bounds)
}

#[allow(clippy::too_many_arguments)]
fn visit_row<F: FnMut(&[i64], &[f64])>(
    cfg: &PointConfig,
    bounds: &[(i64, i64)],
    test: &AnnulusTest,
    alpha: &[f64],
    origin: &Option<Vec<i64>>,
    v: &mut Vec<i64>,
    x: &mut Vec<f64>,
    depth: usize,
    visit: &mut F,
) {
    if depth == cfg.dimension {
        if !test.accepts(v) {
            return;
        }
        if let Some(o) = origin {
            if v == o {
                return;
            }
        }
        if !cfg.window.contains(v) {
            return;
        }
        for i in 0..cfg.dimension {
            x[i] = v[i] as f64 + alpha[i];
        }
        visit(v, x);
    } else {
        for value in bounds[depth].0..=bounds[depth].1 {
            v[depth] = value;
            visit_row(cfg, bounds, test, alpha, origin, v, x, depth + 1, visit);
        }
    }
}

/// Enumerates the configured point set. Rows (fixed first coordinate) are
/// sieved in parallel and merged in order, so the output is identical for
/// any worker count.
pub fn enumerate(cfg: &PointConfig) -> Result<PointBatch, PointsetError> {
    cfg.validate()?;
    let estimate = cfg.expected_count();
    if estimate > COUNT_BOUND {
        return Err(PointsetError::CountBound {
            estimate,
            bound: COUNT_BOUND,
        });
    }
    let start = std::time::Instant::now();
    let (rows, bounds) = sieve_bounds(cfg);
    let test = AnnulusTest::new(cfg);
    let alpha = cfg.shift.as_f64();
    let origin = origin_vector(cfg);
    let row_points: Vec<Vec<f64>> = (rows.0..=rows.1)
        .into_par_iter()
        .map(|row| {
            let mut out = Vec::new();
            let mut v = vec![0i64; cfg.dimension];
            let mut x = vec![0f64; cfg.dimension];
            v[0] = row;
            visit_row(
                cfg,
                &bounds,
                &test,
                &alpha,
                &origin,
                &mut v,
                &mut x,
                1,
                &mut |_, x| out.extend_from_slice(x),
            );
            out
        })
        .collect();
    let points: Vec<f64> = row_points.concat();
    let meta = BatchMeta {
        config_hash: cfg.config_hash(),
        wall_time_s: start.elapsed().as_secs_f64(),
        peak_rss_bytes: peak_rss_bytes(),
        annulus_slack: match cfg.shift {
            Shift::Rational(_) => 0.0,
            Shift::Irrational(_) => 1e-12 * cfg.radius,
        },
    };
    Ok(PointBatch {
        dimension: cfg.dimension,
        points,
        meta,
    })
}

/// Number of points without materializing them (row-parallel).
pub fn count(cfg: &PointConfig) -> Result<u64, PointsetError> {
    cfg.validate()?;
    let (rows, bounds) = sieve_bounds(cfg);
    let test = AnnulusTest::new(cfg);
    let alpha = cfg.shift.as_f64();
    let origin = origin_vector(cfg);
    let total = (rows.0..=rows.1)
        .into_par_iter()
        .map(|row| {
            let mut n = 0u64;
            let mut v = vec![0i64; cfg.dimension];
            let mut x = vec![0f64; cfg.dimension];
            v[0] = row;
            visit_row(
                cfg,
                &bounds,
                &test,
                &alpha,
                &origin,
                &mut v,
                &mut x,
                1,
                &mut |_, _| n += 1,
            );
            n
        })
        .sum();
    Ok(total)
}

/// Point-count-to-volume ratios #(P intersect B_T) / vol(B_T) over an
/// increasing radius sweep; one sieve pass at the largest radius is reused.
pub fn density_ratio(cfg: &PointConfig, radii: &[f64]) -> Result<Vec<(f64, f64)>, PointsetError> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PointsetError::BadConfig(
            "radii must be strictly increasing".into(),
        ));
    }
    let t_max = *radii.last().unwrap();
    let mut full = cfg.clone();
    full.annulus_inner = 0.0;
    full.radius = t_max;
    full.validate()?;
    if full.expected_count() > COUNT_BOUND {
        return Err(PointsetError::CountBound {
            estimate: full.expected_count(),
            bound: COUNT_BOUND,
        });
    }
    let mut norms: Vec<f64> = Vec::new();
    for_each_point(&full, |_, x| {
        norms.push(x.iter().map(|xi| xi * xi).sum::<f64>().sqrt());
    })?;
    norms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = cfg.dimension as i32;
    Ok(radii
        .iter()
        .map(|&t| {
            let count = norms.partition_point(|&n| n < t);
            (
                t,
                count as f64 / (unit_ball_volume(cfg.dimension) * t.powi(d)),
            )
        })
        .collect())
}

/// Whether every vector accepted by `exact` is accepted by `truncated`,
/// decided per prime by expanding both local rules at a common prime power.
pub fn windows_nested(exact: &CongruenceWindow, truncated: &CongruenceWindow) -> bool {
    if exact.dimension() != truncated.dimension() || truncated.has_exact_tail() {
        return false;
    }
    let d = exact.dimension();
    for cond_t in truncated.conditions() {
        let p = cond_t.prime;
        let exact_cond = match exact.tail() {
            Some(family) => Some(family.local_condition(p)),
            None => exact.conditions().iter().find(|c| c.prime == p).cloned(),
        };
        let Some(cond_e) = exact_cond else {
            // Exact accepts everything at p; truncated must too, but a
            // condition at p always excludes something.
            return false;
        };
        let q = cond_t.modulus().max(cond_e.modulus());
        let mut v = vec![0i64; d];
        for idx in 0..(q as u128).pow(d as u32) {
            let mut rest = idx;
            for slot in v.iter_mut() {
                *slot = (rest % q as u128) as i64;
                rest /= q as u128;
            }
            if cond_e.accepts(&v) && !cond_t.accepts(&v) {
                return false;
            }
        }
    }
    true
}

/// Points accepted by the truncated window but not the exact one, inside the
/// ball of radius T: the truncation excess count and its density.
pub fn truncation_excess(
    exact_cfg: &PointConfig,
    truncated_cfg: &PointConfig,
    radius: f64,
) -> Result<(u64, f64), PointsetError> {
    if exact_cfg.dimension != truncated_cfg.dimension || exact_cfg.shift != truncated_cfg.shift {
        return Err(PointsetError::BadConfig(
            "configs must share dimension and shift".into(),
        ));
    }
    if !windows_nested(&exact_cfg.window, &truncated_cfg.window) {
        return Err(PointsetError::NotNested);
    }
    let mut sweep = truncated_cfg.clone();
    sweep.annulus_inner = 0.0;
    sweep.radius = radius;
    sweep.validate()?;
    let exact_window = exact_cfg.window.clone();
    let mut excess = 0u64;
    for_each_point(&sweep, |v, _| {
        if !exact_window.contains(v) {
            excess += 1;
        }
    })?;
    let d = truncated_cfg.dimension as i32;
    let density = excess as f64 / (unit_ball_volume(truncated_cfg.dimension) * radius.powi(d));
    Ok((excess, density))
}

fn det_integer(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0] as i128;
    }
    // Laplace expansion along the first row; fine at desk-scale dimensions.
    let mut det = 0i128;
    for j in 0..n {
        if m[0][j] == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != j)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        det += sign * m[0][j] as i128 * det_integer(&minor);
    }
    det
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
