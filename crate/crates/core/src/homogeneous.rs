//! Haar-random marked (affine) lattices at level N for d = 2, and Monte
//! Carlo evaluation of the limit laws living on those spaces.
//!
//! A marked lattice is a real unimodular lattice together with its level-N
//! data: the real part is sampled from the standard fundamental domain via
//! the Iwasawa coordinates, the mark U uniformly from SL2(Z/N) (by full
//! enumeration of unimodular first rows), and the affine variant adds a real
//! translation u in [0,1)^2 with finite translation data w in (Z/N)^2. The
//! per-prime window events only depend on this level-N data, so the product
//! of the component measures is the Haar measure of the level-N quotient.
//!
//! Counting functionals (row-vector convention, lattice basis = matrix rows):
//! * linear:  #{ m in Z^2 \ {0} : (m U mod N) in W_N, m M in A }
//! * affine:  #{ m in Z^2 : (m U + w mod N) in W_N, (m + u) M in A }
//! * rational shift alpha = a/b: the points are n/b with
//!   #{ n in Z^2 \ {0} : (n U mod bN) in W#, n M in b A }, where W# is the
//!   level-bN realization of the shifted window W - beta, beta = -alpha.

use num_rational::Rational64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::{derive_seed, stream_rng};
use crate::stats::{CountDistribution, SurvivalCurve};
use crate::window::{RationalShiftedWindow, ResidueWindow, WindowError};

/// Enumeration bound for SL2(Z/N).
pub const MAX_LEVEL: u64 = 1000;

#[derive(Debug, Error)]
pub enum HomogeneousError {
    #[error("level {0} exceeds the enumeration bound {MAX_LEVEL}")]
    LevelTooLarge(u64),
    #[error("level mismatch: mark is mod {mark}, window is mod {window}")]
    LevelMismatch { mark: u64, window: u64 },
    #[error("shift has dimension {0}, expected 2")]
    BadShift(usize),
    #[error("xi grid must be nonempty and strictly increasing")]
    BadGrid,
    #[error("region parameter out of range: {0}")]
    BadRegion(String),
    #[error(transparent)]
    Window(#[from] WindowError),
}

/// Iwasawa coordinates of a point in the standard fundamental domain:
/// |x| <= 1/2, y >= sqrt(3)/2, x^2 + y^2 >= 1, with a rotation angle.
#[derive(Clone, Copy, Debug)]
pub struct ModularSample {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Haar sample w.r.t. dx dy / y^2 on the fundamental domain: x uniform on
/// [-1/2, 1/2], y = (sqrt(3)/2) / (1 - u) with u uniform (density 1/y^2 on
/// the strip), accepted iff x^2 + y^2 >= 1; theta uniform on [0, 2 pi).
/// Returns the sample and the number of proposals drawn.
pub fn sample_modular_counted(rng: &mut impl Rng) -> (ModularSample, u64) {
    let mut proposals = 0;
    let (x, y) = loop {
        proposals += 1;
        let x = rng.random::<f64>() - 0.5;
        let y = (3f64.sqrt() / 2.0) / (1.0 - rng.random::<f64>());
        if x * x + y * y >= 1.0 {
            break (x, y);
        }
    };
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    (ModularSample { x, y, theta }, proposals)
}

pub fn sample_modular(rng: &mut impl Rng) -> ModularSample {
    sample_modular_counted(rng).0
}

/// Row-major 2x2 real matrix; a lattice's basis vectors are the rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub fn rotation(theta: f64) -> Mat2 {
        let (s, c) = theta.sin_cos();
        Mat2([[c, s], [-s, c]])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &other.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    /// Row vector times matrix: v M.
    pub fn apply_row(&self, v: [f64; 2]) -> [f64; 2] {
        [
            v[0] * self.0[0][0] + v[1] * self.0[1][0],
            v[0] * self.0[0][1] + v[1] * self.0[1][1],
        ]
    }

    pub fn inverse(&self) -> Mat2 {
        let det = self.det();
        Mat2([
            [self.0[1][1] / det, -self.0[0][1] / det],
            [-self.0[1][0] / det, self.0[0][0] / det],
        ])
    }
}

/// Iwasawa factorization of the sample into a lattice basis:
/// M = [[1/sqrt(y), 0], [x/sqrt(y), sqrt(y)]] R(theta), det M = 1.
pub fn lattice_matrix(s: &ModularSample) -> Mat2 {
    let sq = s.y.sqrt();
    Mat2([[1.0 / sq, 0.0], [s.x / sq, sq]]).mul(&Mat2::rotation(s.theta))
}

/// 2x2 matrix over Z/N with det = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatModN {
    pub modulus: u64,
    /// Row-major entries [[a, b], [c, d]].
    pub m: [[u64; 2]; 2],
}

impl MatModN {
    pub fn identity(modulus: u64) -> MatModN {
        MatModN {
            modulus,
            m: [[1 % modulus, 0], [0, 1 % modulus]],
        }
    }

    pub fn det_mod(&self) -> u64 {
        let n = self.modulus;
        let ad = self.m[0][0] * self.m[1][1] % n;
        let bc = self.m[0][1] * self.m[1][0] % n;
        (ad + n - bc) % n
    }

    /// (v U) mod N for an integer row vector v.
    #[inline]
    pub fn apply_row(&self, v: [i64; 2]) -> [u64; 2] {
        let n = self.modulus;
        let v0 = v[0].rem_euclid(n as i64) as u64;
        let v1 = v[1].rem_euclid(n as i64) as u64;
        [
            (v0 * self.m[0][0] + v1 * self.m[1][0]) % n,
            (v0 * self.m[0][1] + v1 * self.m[1][1]) % n,
        ]
    }
}

/// Enumeration of SL2(Z/N) by unimodular first rows: each row (a, b) with
/// gcd(a, b, N) = 1 admits exactly N completions (c, d) = (c0, d0) + t (a, b),
/// so uniform (row, t) is uniform over the group. Built once, immutable.
pub struct Sl2Table {
    modulus: u64,
    /// (a, b, c0, d0) per unimodular row.
    rows: Vec<[u64; 4]>,
}

impl Sl2Table {
    pub fn new(modulus: u64) -> Result<Sl2Table, HomogeneousError> {
        if modulus == 0 || modulus > MAX_LEVEL {
            return Err(HomogeneousError::LevelTooLarge(modulus));
        }
        let n = modulus as i64;
        let mut rows = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let g = num_integer::gcd(num_integer::gcd(a, b), n);
                if g != 1 {
                    continue;
                }
                // Solve a d - b c = 1 mod N via Bezout over the integers:
                // a s + b t = h = gcd(a, b), h invertible mod N.
                let (h, s, t) = extended_gcd(a, b);
                let h_inv = mod_inverse(h, n).expect("gcd(h, N) divides gcd(a, b, N) = 1");
                let d0 = (s % n * h_inv).rem_euclid(n);
                let c0 = (-t % n * h_inv).rem_euclid(n);
                debug_assert_eq!((a * d0 - b * c0).rem_euclid(n), 1 % n);
                rows.push([a as u64, b as u64, c0 as u64, d0 as u64]);
            }
        }
        Ok(Sl2Table { modulus, rows })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// |SL2(Z/N)| = N^3 prod_{p | N} (1 - p^{-2}).
    pub fn order(&self) -> u64 {
        self.rows.len() as u64 * self.modulus
    }

    /// Uniform group element together with its enumeration cell index
    /// (row index * N + t), for frequency tests.
    pub fn sample_indexed(&self, rng: &mut impl Rng) -> (u64, MatModN) {
        let row_idx = rng.random_range(0..self.rows.len() as u64);
        let t = rng.random_range(0..self.modulus);
        let [a, b, c0, d0] = self.rows[row_idx as usize];
        let n = self.modulus;
        let mat = MatModN {
            modulus: n,
            m: [[a, b], [(c0 + t * a) % n, (d0 + t * b) % n]],
        };
        (row_idx * n + t, mat)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> MatModN {
        self.sample_indexed(rng).1
    }
}

fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return (a.abs(), a.signum(), 0);
    }
    let (g, s, t) = extended_gcd(b, a % b);
    (g, t, s - (a / b) * t)
}

fn mod_inverse(a: i64, n: i64) -> Option<i64> {
    let (g, s, _) = extended_gcd(a.rem_euclid(n), n);
    (g == 1).then(|| s.rem_euclid(n))
}

/// Level-N surrogate for an adelic lattice: real unimodular part plus the
/// SL2(Z/N) coset data.
#[derive(Clone, Copy, Debug)]
pub struct MarkedLattice {
    pub real: Mat2,
    pub mark: MatModN,
}

/// Marked lattice with translation: u in lattice coordinates (mod 1) at the
/// real place, w mod N at the finite places.
#[derive(Clone, Copy, Debug)]
pub struct MarkedAffineLattice {
    pub lattice: MarkedLattice,
    pub translation_real: [f64; 2],
    pub translation_finite: [u64; 2],
}

pub fn sample_marked(table: &Sl2Table, rng: &mut impl Rng) -> MarkedLattice {
    let real = lattice_matrix(&sample_modular(rng));
    MarkedLattice {
        real,
        mark: table.sample(rng),
    }
}

pub fn sample_marked_affine(table: &Sl2Table, rng: &mut impl Rng) -> MarkedAffineLattice {
    let lattice = sample_marked(table, rng);
    let translation_real = [rng.random::<f64>(), rng.random::<f64>()];
    let n = table.modulus();
    let translation_finite = [rng.random_range(0..n), rng.random_range(0..n)];
    MarkedAffineLattice {
        lattice,
        translation_real,
        translation_finite,
    }
}

/// A Jordan-measurable test body in the plane with exact volume.
#[derive(Clone, Copy, Debug)]
pub enum Region {
    /// 0 < x1 < xi, |x2| < 1 — volume xi * vol(B^1) = 2 xi.
    Cylinder { xi: f64 },
    /// c < x1 < 1, |x2| <= slope * x1 — volume slope (1 - c^2) = sigma / m_f
    /// when the slope comes from the direction-statistics radius formula.
    Cone { c: f64, slope: f64 },
    /// Closed axis-aligned box.
    Box { lo: [f64; 2], hi: [f64; 2] },
    /// Open ball centred at the origin.
    Ball { radius: f64 },
}

impl Region {
    pub fn cylinder(xi: f64) -> Result<Region, HomogeneousError> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(HomogeneousError::BadRegion(format!("cylinder length {xi}")));
        }
        Ok(Region::Cylinder { xi })
    }

    /// The direction-statistics cone: the transverse radius at x1 is
    /// (sigma d / ((1 - c^d) m_f vol(B^{d-1})))^{1/(d-1)} x1 at d = 2.
    pub fn cone(c: f64, sigma: f64, window_measure: f64) -> Result<Region, HomogeneousError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(0.0..1.0).contains(&c) || !positive(sigma) || !positive(window_measure) {
            return Err(HomogeneousError::BadRegion(format!(
                "cone parameters c = {c}, sigma = {sigma}, m_f = {window_measure}"
            )));
        }
        let slope = sigma / ((1.0 - c * c) * window_measure);
        Ok(Region::Cone { c, slope })
    }

    pub fn volume(&self) -> f64 {
        match self {
            Region::Cylinder { xi } => 2.0 * xi,
            Region::Cone { c, slope } => slope * (1.0 - c * c),
            Region::Box { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Region::Ball { radius } => std::f64::consts::PI * radius * radius,
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        match self {
            Region::Cylinder { xi } => x[0] > 0.0 && x[0] < *xi && x[1].abs() < 1.0,
            Region::Cone { c, slope } => x[0] > *c && x[0] < 1.0 && x[1].abs() <= slope * x[0],
            Region::Box { lo, hi } => {
                x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1]
            }
            Region::Ball { radius } => x[0] * x[0] + x[1] * x[1] < radius * radius,
        }
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Region::Cylinder { xi } => ([0.0, -1.0], [*xi, 1.0]),
            Region::Cone { c, slope } => ([*c, -slope], [1.0, *slope]),
            Region::Box { lo, hi } => (*lo, *hi),
            Region::Ball { radius } => ([-radius, -radius], [*radius, *radius]),
        }
    }
}

/// Visits every integer m with (m + offset) M inside the region, by scanning
/// integer rows of the preimage of the region's bounding box.
fn for_each_point_in_region<F: FnMut([i64; 2], [f64; 2])>(
    matrix: &Mat2,
    offset: [f64; 2],
    region: &Region,
    mut visit: F,
) {
    let (lo, hi) = region.bounding_box();
    let inv = matrix.inverse();
    let corners = [
        inv.apply_row([lo[0], lo[1]]),
        inv.apply_row([lo[0], hi[1]]),
        inv.apply_row([hi[0], lo[1]]),
        inv.apply_row([hi[0], hi[1]]),
    ];
    // Inflation scaled to the preimage coordinates: cusp lattices put the
    // corners at ~sqrt(y) magnitudes where absolute 1e-9 would drown in
    // rounding. False positives are filtered by the exact contains test.
    let scale = corners
        .iter()
        .flat_map(|c| c.iter())
        .fold(1.0f64, |acc, &v| acc.max(v.abs()));
    let eps = 1e-12 * scale.max(1.0) + 1e-9;
    let m1_min = corners.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min) - offset[1];
    let m1_max = corners
        .iter()
        .map(|c| c[1])
        .fold(f64::NEG_INFINITY, f64::max)
        - offset[1];
    let row_lo = (m1_min - eps).ceil() as i64;
    let row_hi = (m1_max + eps).floor() as i64;
    let b = &matrix.0;
    for m1 in row_lo..=row_hi {
        // x_j = m0 b[0][j] + base_j, linear in the inner index m0.
        let base = [
            (m1 as f64 + offset[1]) * b[1][0] + offset[0] * b[0][0],
            (m1 as f64 + offset[1]) * b[1][1] + offset[0] * b[0][1],
        ];
        let mut lo_t = f64::NEG_INFINITY;
        let mut hi_t = f64::INFINITY;
        let mut feasible = true;
        for j in 0..2 {
            let coef = b[0][j];
            if coef.abs() < 1e-300 {
                if base[j] < lo[j] - eps || base[j] > hi[j] + eps {
                    feasible = false;
                    break;
                }
            } else {
                let t0 = (lo[j] - base[j]) / coef;
                let t1 = (hi[j] - base[j]) / coef;
                lo_t = lo_t.max(t0.min(t1));
                hi_t = hi_t.min(t0.max(t1));
            }
        }
        if !feasible || lo_t > hi_t {
            continue;
        }
        let m0_lo = (lo_t - eps).ceil() as i64;
        let m0_hi = (hi_t + eps).floor() as i64;
        for m0 in m0_lo..=m0_hi {
            let x = [m0 as f64 * b[0][0] + base[0], m0 as f64 * b[0][1] + base[1]];
            if region.contains(x) {
                visit([m0, m1], x);
            }
        }
    }
}

fn check_level(mark: &MatModN, window: &ResidueWindow) -> Result<(), HomogeneousError> {
    if mark.modulus != window.modulus() {
        return Err(HomogeneousError::LevelMismatch {
            mark: mark.modulus,
            window: window.modulus(),
        });
    }
    Ok(())
}

/// Linear counting functional: marked points of the lattice in the region,
/// the zero vector excluded.
pub fn marked_points_in_region(
    g: &MarkedLattice,
    window: &ResidueWindow,
    region: &Region,
) -> Result<u64, HomogeneousError> {
    check_level(&g.mark, window)?;
    let mut count = 0;
    for_each_point_in_region(&g.real, [0.0, 0.0], region, |m, _| {
        if m == [0, 0] {
            return;
        }
        let r = g.mark.apply_row(m);
        if window.contains(&[r[0] as i64, r[1] as i64]) {
            count += 1;
        }
    });
    Ok(count)
}

/// Affine counting functional: (m U + w mod N) in W_N and (m + u) M in A.
pub fn marked_affine_points_in_region(
    g: &MarkedAffineLattice,
    window: &ResidueWindow,
    region: &Region,
) -> Result<u64, HomogeneousError> {
    check_level(&g.lattice.mark, window)?;
    let n = g.lattice.mark.modulus;
    let w = g.translation_finite;
    let mut count = 0;
    for_each_point_in_region(
        &g.lattice.real,
        [g.translation_real[0], g.translation_real[1]],
        region,
        |m, _| {
            let r = g.lattice.mark.apply_row(m);
            let shifted = [((r[0] + w[0]) % n) as i64, ((r[1] + w[1]) % n) as i64];
            if window.contains(&shifted) {
                count += 1;
            }
        },
    );
    Ok(count)
}

/// Which limit formula the Monte Carlo realizes: the affine space for
/// irrational shifts, the linear space with the shifted window for rational
/// shifts alpha (where beta = -alpha translates the window).
#[derive(Clone, Debug)]
pub enum ShiftMode {
    Irrational,
    Rational(Vec<Rational64>),
}

struct RationalSetup {
    table: Sl2Table,
    window: ResidueWindow,
    denominator: u64,
}

fn rational_setup(
    window: &ResidueWindow,
    alpha: &[Rational64],
) -> Result<RationalSetup, HomogeneousError> {
    if alpha.len() != 2 {
        return Err(HomogeneousError::BadShift(alpha.len()));
    }
    let beta: Vec<Rational64> = alpha.iter().map(|a| -a).collect();
    let shifted = RationalShiftedWindow::new(window, &beta)?;
    let table = Sl2Table::new(shifted.window.modulus())?;
    Ok(RationalSetup {
        table,
        window: shifted.window,
        denominator: shifted.denominator,
    })
}

/// Monte Carlo estimate of the free-path limit law F(xi) = P(no marked point
/// in the cylinder C_xi x W), on the given xi grid.
pub fn limit_fpl_mc(
    xi_grid: &[f64],
    window: &ResidueWindow,
    mode: &ShiftMode,
    n_samples: u64,
    seed: u64,
) -> Result<SurvivalCurve, HomogeneousError> {
    if xi_grid.is_empty() || xi_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HomogeneousError::BadGrid);
    }
    let xi_max = *xi_grid.last().unwrap();
    let stream_seed = derive_seed(seed, "homogeneous.limit_fpl_mc");
    // Per sample: the smallest x1 of a marked point in the full cylinder
    // C_{xi_max}; the sample then survives exactly the grid points xi <= x1*.
    let first_entry: Vec<Option<f64>> = match mode {
        ShiftMode::Irrational => {
            let table = Sl2Table::new(window.modulus())?;
            let region = Region::cylinder(xi_max)?;
            (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(stream_seed, i);
                    let g = sample_marked_affine(&table, &mut rng);
                    let n = g.lattice.mark.modulus;
                    let w = g.translation_finite;
                    let mut min_x1: Option<f64> = None;
                    for_each_point_in_region(
                        &g.lattice.real,
                        [g.translation_real[0], g.translation_real[1]],
                        &region,
                        |m, x| {
                            let r = g.lattice.mark.apply_row(m);
                            let s = [((r[0] + w[0]) % n) as i64, ((r[1] + w[1]) % n) as i64];
                            if window.contains(&s) && min_x1.is_none_or(|cur| x[0] < cur) {
                                min_x1 = Some(x[0]);
                            }
                        },
                    );
                    min_x1
                })
                .collect()
        }
        ShiftMode::Rational(alpha) => {
            let setup = rational_setup(window, alpha)?;
            let b = setup.denominator as f64;
            // n M in b C_xi with the points at (n / b) M.
            let region = Region::Box {
                lo: [0.0, -b],
                hi: [b * xi_max, b],
            };
            (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(stream_seed, i);
                    let g = sample_marked(&setup.table, &mut rng);
                    // Minimum tracked in the scaled coordinate n M; divided
                    // back to the (n / b) M scale at the end.
                    let mut min_scaled: Option<f64> = None;
                    for_each_point_in_region(&g.real, [0.0, 0.0], &region, |m, x| {
                        // Open cylinder boundaries, scaled by b.
                        if m == [0, 0] || x[0] <= 0.0 || x[0] >= b * xi_max || x[1].abs() >= b {
                            return;
                        }
                        let r = g.mark.apply_row(m);
                        if setup.window.contains(&[r[0] as i64, r[1] as i64])
                            && min_scaled.is_none_or(|cur| x[0] < cur)
                        {
                            min_scaled = Some(x[0]);
                        }
                    });
                    min_scaled.map(|v| v / b)
                })
                .collect()
        }
    };
    Ok(SurvivalCurve::from_values(xi_grid, &first_entry))
}

/// Monte Carlo estimate of the direction-statistics limit law: the law of
/// the marked point count in the cone K_{c, sigma}.
pub fn limit_dir_mc(
    sigma: f64,
    annulus_inner: f64,
    window: &ResidueWindow,
    mode: &ShiftMode,
    n_samples: u64,
    seed: u64,
) -> Result<CountDistribution, HomogeneousError> {
    let d = window.dimension();
    let m_f = window.cardinality() as f64 / (window.modulus() as f64).powi(d as i32);
    let stream_seed = derive_seed(seed, "homogeneous.limit_dir_mc");
    let counts: Vec<u64> = match mode {
        ShiftMode::Irrational => {
            let table = Sl2Table::new(window.modulus())?;
            let region = Region::cone(annulus_inner, sigma, m_f)?;
            (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(stream_seed, i);
                    let g = sample_marked_affine(&table, &mut rng);
                    marked_affine_points_in_region(&g, window, &region).expect("levels checked")
                })
                .collect()
        }
        ShiftMode::Rational(alpha) => {
            let setup = rational_setup(window, alpha)?;
            let b = setup.denominator as f64;
            let base = Region::cone(annulus_inner, sigma, m_f)?;
            let Region::Cone { c, slope } = base else {
                unreachable!()
            };
            let shifted_window = setup.window;
            (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(stream_seed, i);
                    let g = sample_marked(&setup.table, &mut rng);
                    let mut count = 0u64;
                    // b K_{c,sigma}: same slope, radial extent scaled by b.
                    let probe = Region::Box {
                        lo: [c * b, -slope * b],
                        hi: [b, slope * b],
                    };
                    for_each_point_in_region(&g.real, [0.0, 0.0], &probe, |m, x| {
                        if m == [0, 0] {
                            return;
                        }
                        if !(x[0] > c * b && x[0] < b && x[1].abs() <= slope * x[0]) {
                            return;
                        }
                        let r = g.mark.apply_row(m);
                        if shifted_window.contains(&[r[0] as i64, r[1] as i64]) {
                            count += 1;
                        }
                    });
                    count
                })
                .collect()
        }
    };
    Ok(CountDistribution::from_counts(&counts))
}

/// One Siegel / Siegel–Weil mean-value check: the empirical mean of the
/// counting functional against vol(A) |W_N| / N^2.
#[derive(Clone, Debug)]
pub struct MeanValueCheck {
    pub expected: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub zscore: f64,
}

pub fn mean_value_check(
    window: &ResidueWindow,
    region: &Region,
    affine: bool,
    n_samples: u64,
    seed: u64,
) -> Result<MeanValueCheck, HomogeneousError> {
    let table = Sl2Table::new(window.modulus())?;
    let label = if affine {
        "homogeneous.siegel.affine"
    } else {
        "homogeneous.siegel.linear"
    };
    let stream_seed = derive_seed(seed, label);
    let counts: Vec<u64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(stream_seed, i);
            if affine {
                let g = sample_marked_affine(&table, &mut rng);
                marked_affine_points_in_region(&g, window, region).expect("levels checked")
            } else {
                let g = sample_marked(&table, &mut rng);
                marked_points_in_region(&g, window, region).expect("levels checked")
            }
        })
        .collect();
    let n = n_samples as f64;
    let sum: u64 = counts.iter().sum();
    let empirical = sum as f64 / n;
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - empirical;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0);
    let stderr = (var / n).sqrt();
    let d = window.dimension() as i32;
    let expected =
        region.volume() * window.cardinality() as f64 / (window.modulus() as f64).powi(d);
    let zscore = if stderr > 0.0 {
        (empirical - expected) / stderr
    } else {
        0.0
    };
    Ok(MeanValueCheck {
        expected,
        empirical,
        stderr,
        zscore,
    })
}
