use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, Aabb, Point, Support};
use crate::linalg::perron;
use crate::quadrature::{integrate_box, integrate_interval, integrate_polygon};
use crate::tiling::SubstitutionRule;

/// Building block of a tile profile. Every shape except `Constant` vanishes
/// on the tile boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// 1 on the closed tile. Used for indicator blends and calibration.
    Constant,
    /// Piecewise-linear peak of height 1 at the tile center.
    Hat,
    /// Smooth compactly supported bump of height 1.
    Bump,
    /// Σ c[a][b] x^a y^b (puncture-relative coordinates) times the hat.
    Polynomial { coefficients: Vec<Vec<f64>> },
}

/// Linear combination Σ cₖ·shapeₖ on one prototile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub terms: Vec<(f64, Shape)>,
}

impl Profile {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(coefficient: f64, shape: Shape) -> Self {
        Self { terms: vec![(coefficient, shape)] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| *c == 0.0)
    }
}

/// Tile geometry in puncture-relative coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
struct Frame {
    support: Support,
    /// Axis-aligned box (always true for intervals).
    is_box: bool,
    lo: Point,
    hi: Point,
    center: Point,
    half: Point,
    inradius: f64,
}

impl Frame {
    fn new(support: &Support) -> Self {
        let b = support.bbox();
        let is_box = support.dim == 1
            || (support.vertices.len() == 4
                && support.vertices.iter().all(|v| {
                    (v[0] == b.lo[0] || v[0] == b.hi[0]) && (v[1] == b.lo[1] || v[1] == b.hi[1])
                }));
        let center = [(b.lo[0] + b.hi[0]) / 2.0, (b.lo[1] + b.hi[1]) / 2.0];
        let half = [(b.hi[0] - b.lo[0]) / 2.0, (b.hi[1] - b.lo[1]) / 2.0];
        Self { support: support.clone(), is_box, lo: b.lo, hi: b.hi, center, half, inradius: support.inradius() }
    }

    fn dim(&self) -> usize {
        self.support.dim
    }

    fn hat(&self, p: Point) -> f64 {
        if self.is_box {
            (0..self.dim()).map(|k| (1.0 - (p[k] - self.center[k]).abs() / self.half[k]).max(0.0)).product()
        } else {
            (self.support.margin(p) / self.inradius).max(0.0)
        }
    }

    fn bump(&self, p: Point) -> f64 {
        if self.is_box {
            (0..self.dim()).map(|k| bump_1d((p[k] - self.center[k]) / self.half[k])).product()
        } else {
            bump_1d(1.0 - self.support.margin(p) / self.inradius)
        }
    }

    fn shape(&self, shape: &Shape, p: Point) -> f64 {
        match shape {
            Shape::Constant => {
                if self.support.margin(p) >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Hat => self.hat(p),
            Shape::Bump => self.bump(p),
            Shape::Polynomial { coefficients } => {
                let h = self.hat(p);
                if h == 0.0 {
                    return 0.0;
                }
                let mut acc = 0.0;
                for (a, row) in coefficients.iter().enumerate() {
                    for (b, c) in row.iter().enumerate() {
                        acc += c * p[0].powi(a as i32) * p[1].powi(b as i32);
                    }
                }
                acc * h
            }
        }
    }

    /// Kink coordinates per axis, relative to the puncture.
    fn breaks(&self) -> [Vec<f64>; 2] {
        [vec![self.center[0]], vec![self.center[1]]]
    }
}

fn bump_1d(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// An order-zero cylindrical function f(X) = ψ_i(s) when the tile T_i + x
/// of X contains the origin and s = −x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylindricalFunction {
    pub dim: usize,
    pub profiles: Vec<Profile>,
    pub sup_norm: f64,
    /// ‖f‖_∞ plus the largest within-tile Lipschitz constant (sampled).
    pub lipschitz_norm: f64,
    frames: Vec<Frame>,
}

const NORM_GRID: usize = 64;

impl CylindricalFunction {
    pub fn new(rule: &SubstitutionRule, profiles: Vec<Profile>) -> Result<Self> {
        if profiles.len() != rule.type_count() {
            return Err(Error::Dimension(format!(
                "{} profiles for {} prototiles",
                profiles.len(),
                rule.type_count()
            )));
        }
        for p in &profiles {
            for (c, shape) in &p.terms {
                if !c.is_finite() {
                    return Err(Error::Domain("profile coefficients must be finite".into()));
                }
                if let Shape::Polynomial { coefficients } = shape {
                    if rule.dim == 1 && coefficients.iter().any(|row| row.iter().skip(1).any(|&c| c != 0.0)) {
                        return Err(Error::Dimension("interval profiles cannot depend on y".into()));
                    }
                }
            }
        }
        let frames: Vec<Frame> = rule.prototiles.iter().map(|p| Frame::new(&p.support)).collect();
        let mut f = Self { dim: rule.dim, profiles, sup_norm: 0.0, lipschitz_norm: 0.0, frames };
        let (sup, lip) = f.sampled_norms();
        f.sup_norm = sup;
        f.lipschitz_norm = sup + lip;
        Ok(f)
    }

    pub fn zero(rule: &SubstitutionRule) -> Self {
        Self::new(rule, vec![Profile::zero(); rule.type_count()]).expect("shape matches rule")
    }

    /// The constant function `value`, i.e. the all-indicator blend.
    pub fn constant(rule: &SubstitutionRule, value: f64) -> Self {
        Self::new(rule, vec![Profile::single(value, Shape::Constant); rule.type_count()]).expect("shape matches rule")
    }

    /// Hat profiles with the given peak per type.
    pub fn hats(rule: &SubstitutionRule, peaks: &[f64]) -> Result<Self> {
        Self::new(rule, peaks.iter().map(|&c| Profile::single(c, Shape::Hat)).collect())
    }

    /// A hat of height `peak` on one type, zero elsewhere.
    pub fn hat_on(rule: &SubstitutionRule, kind: usize, peak: f64) -> Result<Self> {
        let mut peaks = vec![0.0; rule.type_count()];
        *peaks.get_mut(kind).ok_or_else(|| Error::Domain(format!("no prototile {kind}")))? = peak;
        Self::hats(rule, &peaks)
    }

    pub fn type_count(&self) -> usize {
        self.profiles.len()
    }

    /// ψ_kind at a puncture-relative point.
    pub fn profile_value(&self, kind: usize, p: Point) -> f64 {
        let frame = &self.frames[kind];
        self.profiles[kind].terms.iter().map(|(c, s)| c * frame.shape(s, p)).sum()
    }

    pub fn support(&self, kind: usize) -> &Support {
        &self.frames[kind].support
    }

    fn sampled_norms(&self) -> (f64, f64) {
        let mut sup: f64 = 0.0;
        let mut lip: f64 = 0.0;
        for (kind, frame) in self.frames.iter().enumerate() {
            if self.profiles[kind].is_zero() {
                continue;
            }
            let n = NORM_GRID;
            let ny = if self.dim == 1 { 1 } else { n };
            let step = [(frame.hi[0] - frame.lo[0]) / n as f64, (frame.hi[1] - frame.lo[1]) / ny as f64];
            let at = |i: usize, j: usize| {
                [frame.lo[0] + (i as f64 + 0.5) * step[0], if self.dim == 1 { 0.0 } else { frame.lo[1] + (j as f64 + 0.5) * step[1] }]
            };
            for i in 0..n {
                for j in 0..ny {
                    let p = at(i, j);
                    if frame.support.margin(p) <= 0.0 {
                        continue;
                    }
                    let v = self.profile_value(kind, p);
                    sup = sup.max(v.abs());
                    let mut neighbours = vec![(i + 1, j)];
                    if self.dim == 2 {
                        neighbours.push((i, j + 1));
                    }
                    for (a, b) in neighbours {
                        if a >= n || b >= ny {
                            continue;
                        }
                        let q = at(a, b);
                        if frame.support.margin(q) <= 0.0 {
                            continue;
                        }
                        let dist = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                        lip = lip.max((self.profile_value(kind, q) - v).abs() / dist);
                    }
                }
            }
        }
        (sup, lip)
    }

    /// ∫ e[ω·(p + shift)]ψ_kind(p) dp over the tile support clipped to
    /// `clip − shift` (in absolute coordinates when `shift` is a puncture).
    pub fn twisted_tile_integral(&self, kind: usize, shift: Point, omega: Point, clip: Option<&Aabb>) -> Result<Complex64> {
        if self.profiles[kind].is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let frame = &self.frames[kind];
        let g = |p: Point| {
            let v = self.profile_value(kind, p);
            if v == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                crate::cocycle::expi(dot(omega, [p[0] + shift[0], p[1] + shift[1]])) * v
            }
        };
        let local_clip = clip.map(|c| c.translate([-shift[0], -shift[1]]));
        if frame.is_box {
            let (mut lo, mut hi) = (frame.lo, frame.hi);
            if let Some(c) = &local_clip {
                for k in 0..self.dim {
                    lo[k] = lo[k].max(c.lo[k]);
                    hi[k] = hi[k].min(c.hi[k]);
                }
            }
            let breaks = frame.breaks();
            if self.dim == 1 {
                integrate_interval(lo[0], hi[0], &breaks[0], omega[0].abs(), |x| g([x, 0.0]))
            } else {
                integrate_box(&Aabb { lo, hi }, [&breaks[0], &breaks[1]], [omega[0].abs(), omega[1].abs()], g)
            }
        } else {
            let region = match &local_clip {
                Some(c) => match frame.support.clip_to_box(c) {
                    Some(s) => s,
                    None => return Ok(Complex64::new(0.0, 0.0)),
                },
                None => frame.support.clone(),
            };
            integrate_polygon(&region, omega[0].hypot(omega[1]), g)
        }
    }

    /// ψ̂_kind(ω) = ∫_{supp T_kind} e[ω·s]ψ_kind(s) ds.
    pub fn psi_hat(&self, kind: usize, omega: Point) -> Result<Complex64> {
        self.twisted_tile_integral(kind, [0.0, 0.0], omega, None)
    }

    pub fn psi_hats(&self, omega: Point) -> Result<Vec<Complex64>> {
        (0..self.type_count()).map(|k| self.psi_hat(k, omega)).collect()
    }
}

/// Frequencies per unit volume: the Perron right eigenvector of 𝒮 scaled
/// so that Σ freq_i·vol(T_i) = 1.
pub fn type_frequencies(rule: &SubstitutionRule) -> Result<Vec<f64>> {
    let p = perron(&rule.substitution_matrix().to_f64())?;
    let total: f64 = p.right.iter().zip(&rule.prototiles).map(|(f, t)| f * t.volume).sum();
    Ok(p.right.iter().map(|f| f / total).collect())
}

/// μ(f) = Σ_i freq_i ∫ψ_i for the unique invariant measure.
pub fn mean(f: &CylindricalFunction, rule: &SubstitutionRule) -> Result<Complex64> {
    let freq = type_frequencies(rule)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, w) in freq.iter().enumerate() {
        acc += f.psi_hat(k, [0.0, 0.0])? * *w;
    }
    Ok(acc)
}

/// f − μ(f)·h where h is the hat blend with μ(h) = 1, so the result stays
/// cylindrical and boundary-vanishing whenever f is.
pub fn zero_mean_project(f: &CylindricalFunction, rule: &SubstitutionRule) -> Result<CylindricalFunction> {
    let mu = mean(f, rule)?.re;
    let hats = CylindricalFunction::hats(rule, &vec![1.0; rule.type_count()])?;
    let hat_mean = mean(&hats, rule)?.re;
    let scale = mu / hat_mean;
    let profiles = f
        .profiles
        .iter()
        .map(|p| {
            let mut p = p.clone();
            if scale != 0.0 {
                p.terms.push((-scale, Shape::Hat));
            }
            p
        })
        .collect();
    CylindricalFunction::new(rule, profiles)
}

/// One-dimensional Fejér kernel (1/R)(sin(πRy)/(πy))², equal to R at y = 0.
pub fn fejer_1d(radius: f64, y: f64) -> f64 {
    let a = std::f64::consts::PI * y;
    if a.abs() < 1e-300 {
        return radius;
    }
    // sin² has period π, so the phase Ry can be reduced mod 1.
    let phase = radius * y;
    let s = (std::f64::consts::PI * (phase - phase.round())).sin();
    s * s / (a * a * radius)
}

/// 𝔉^d_R(y) = ∏ 𝔉_R(y_i).
pub fn fejer(dim: usize, radius: f64, y: Point) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("Fejér kernel needs R > 0, got {radius}")));
    }
    if !(1..=2).contains(&dim) {
        return Err(Error::Dimension(format!("dimension {dim}")));
    }
    Ok((0..dim).map(|k| fejer_1d(radius, y[k])).product())
}
