use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{add, sub, Aabb, Point, Support};
use crate::linalg::LinearMap;

use super::rule::SubstitutionRule;

/// A tile of a patch: prototile index and translation (= puncture).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlacedTile {
    pub kind: usize,
    pub translation: Point,
}

/// Supertile ancestry of the tiles of a patch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Genealogy {
    /// `levels[k - 1]` holds the order-k supertiles, k = 1..=order.
    pub levels: Vec<Vec<PlacedTile>>,
    /// `parents[k][i]` is the index in order k + 1 of the supertile holding
    /// node i of order k (order 0 being the patch tiles).
    pub parents: Vec<Vec<usize>>,
}

impl Genealogy {
    pub fn order(&self) -> usize {
        self.levels.len()
    }
}

/// A finite collection of placed tiles, optionally annotated with genealogy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Patch {
    pub dim: usize,
    pub tiles: Vec<PlacedTile>,
    pub genealogy: Option<Genealogy>,
}

impl Patch {
    pub fn single(dim: usize, kind: usize) -> Self {
        Self { dim, tiles: vec![PlacedTile { kind, translation: [0.0, 0.0] }], genealogy: None }
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn translate(&self, t: Point) -> Self {
        let mv = |p: &PlacedTile| PlacedTile { kind: p.kind, translation: add(p.translation, t) };
        Self {
            dim: self.dim,
            tiles: self.tiles.iter().map(mv).collect(),
            genealogy: self.genealogy.as_ref().map(|g| Genealogy {
                levels: g.levels.iter().map(|l| l.iter().map(mv).collect()).collect(),
                parents: g.parents.clone(),
            }),
        }
    }

    /// Keeps the tiles selected by `keep`, preserving genealogy.
    pub fn retain(&self, mut keep: impl FnMut(usize, &PlacedTile) -> bool) -> Self {
        let mut tiles = Vec::new();
        let mut parents0 = Vec::new();
        for (i, t) in self.tiles.iter().enumerate() {
            if keep(i, t) {
                tiles.push(*t);
                if let Some(g) = &self.genealogy {
                    if let Some(p) = g.parents.first() {
                        parents0.push(p[i]);
                    }
                }
            }
        }
        let genealogy = self.genealogy.as_ref().map(|g| {
            let mut parents = g.parents.clone();
            if !parents.is_empty() {
                parents[0] = parents0;
            }
            Genealogy { levels: g.levels.clone(), parents }
        });
        Self { dim: self.dim, tiles, genealogy }
    }

    /// Patch without tile `index`.
    pub fn without(&self, index: usize) -> Self {
        self.retain(|i, _| i != index)
    }

    pub fn count_by_type(&self, types: usize) -> Vec<usize> {
        let mut c = vec![0; types];
        for t in &self.tiles {
            c[t.kind] += 1;
        }
        c
    }

    pub fn total_volume(&self, rule: &SubstitutionRule) -> f64 {
        self.tiles.iter().map(|t| rule.prototiles[t.kind].volume).sum()
    }

    pub fn support_of(&self, rule: &SubstitutionRule, i: usize) -> Support {
        let t = self.tiles[i];
        rule.prototiles[t.kind].support.translate(t.translation)
    }

    /// Largest coordinate magnitude of any translation, for tolerances.
    pub fn extent(&self) -> f64 {
        self.tiles
            .iter()
            .map(|t| t.translation[0].abs().max(t.translation[1].abs()))
            .fold(1.0, f64::max)
    }
}

/// Memory budget for supertile generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationLimits {
    pub max_tiles: usize,
}

impl Default for GenerationLimits {
    fn default() -> Self {
        Self { max_tiles: 20_000_000 }
    }
}

/// The order-n supertile ζⁿ(T_j) placed at the origin, with genealogy.
pub fn supertile(rule: &SubstitutionRule, j: usize, n: usize) -> Result<Patch> {
    supertile_with(rule, j, n, &GenerationLimits::default(), true)
}

pub fn supertile_with(
    rule: &SubstitutionRule,
    j: usize,
    n: usize,
    limits: &GenerationLimits,
    genealogy: bool,
) -> Result<Patch> {
    if j >= rule.type_count() {
        return Err(Error::Domain(format!("prototile {j} does not exist")));
    }
    let s = rule.substitution_matrix().pow(n);
    let count: BigInt = (0..rule.type_count()).map(|i| s[(i, j)].clone()).sum();
    if count.to_usize().is_none_or(|c| c > limits.max_tiles) {
        return Err(Error::Resource(format!(
            "supertile of order {n} has {count} tiles, budget is {}",
            limits.max_tiles
        )));
    }
    Generator::new(rule, n).run(j, [0.0, 0.0], None, limits, genealogy)
}

/// Top-down supertile expansion with optional pruning against a region.
struct Generator<'a> {
    rule: &'a SubstitutionRule,
    /// `displacements[k][j][l]` = L^k s_l(j).
    displacements: Vec<Vec<Vec<Point>>>,
    /// `boxes[k][j]` = bounding box of L^k supp(T_j).
    boxes: Vec<Vec<Aabb>>,
}

impl<'a> Generator<'a> {
    fn new(rule: &'a SubstitutionRule, n: usize) -> Self {
        let mut power = LinearMap::identity(rule.dim);
        let mut displacements = Vec::with_capacity(n + 1);
        let mut boxes = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            displacements.push(
                rule.children
                    .iter()
                    .map(|list| list.iter().map(|c| power.apply(c.displacement)).collect())
                    .collect(),
            );
            boxes.push(rule.prototiles.iter().map(|p| p.support.transform(&power).bbox()).collect());
            power = power.compose(&rule.expansion);
        }
        Self { rule, displacements, boxes }
    }

    fn order(&self) -> usize {
        self.boxes.len() - 1
    }

    fn run(
        &self,
        kind: usize,
        root: Point,
        region: Option<&Aabb>,
        limits: &GenerationLimits,
        keep_genealogy: bool,
    ) -> Result<Patch> {
        let n = self.order();
        let dim = self.rule.dim;
        let hit = |k: usize, node: &PlacedTile| match region {
            None => true,
            Some(r) => {
                let b = self.boxes[k][node.kind].translate(node.translation);
                let tol = 1e-9 * (1.0 + r.hi[0].abs().max(r.lo[0].abs()));
                b.intersects(r, tol)
            }
        };
        let top = PlacedTile { kind, translation: root };
        if !hit(n, &top) {
            return Ok(Patch { dim, tiles: Vec::new(), genealogy: keep_genealogy.then(|| empty_genealogy(n)) });
        }
        let mut current = vec![top];
        let mut levels: Vec<Vec<PlacedTile>> = Vec::new();
        let mut parents: Vec<Vec<usize>> = Vec::new();
        let mut produced = 1usize;
        for k in (1..=n).rev() {
            let mut next = Vec::new();
            let mut next_parents = Vec::new();
            for (pi, node) in current.iter().enumerate() {
                for (l, child) in self.rule.children[node.kind].iter().enumerate() {
                    let t = add(node.translation, self.displacements[k - 1][node.kind][l]);
                    let c = PlacedTile { kind: child.kind, translation: t };
                    if hit(k - 1, &c) {
                        next.push(c);
                        next_parents.push(pi);
                    }
                }
            }
            produced += next.len();
            if produced > limits.max_tiles {
                return Err(Error::Resource(format!(
                    "generation produced more than {} nodes",
                    limits.max_tiles
                )));
            }
            if keep_genealogy {
                levels.push(std::mem::take(&mut current));
                parents.push(next_parents);
            }
            current = next;
        }
        let genealogy = keep_genealogy.then(|| {
            levels.reverse();
            parents.reverse();
            Genealogy { levels, parents }
        });
        Ok(Patch { dim, tiles: current, genealogy })
    }
}

fn empty_genealogy(n: usize) -> Genealogy {
    Genealogy { levels: vec![Vec::new(); n], parents: vec![Vec::new(); n] }
}

/// A tile T_seed + offset with ζ^period(T_seed + offset) ⊇ T_seed + offset,
/// so the nested supertiles grow into a fixed-point tiling of ζ^period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub period: usize,
    pub offset: Point,
    /// Distance from the origin to the boundary of the seed tile.
    pub margin: f64,
}

/// Finds the self-nested seed placement whose tile holds the origin deepest
/// in its interior, preferring small periods.
pub fn fixed_point(rule: &SubstitutionRule) -> Result<FixedPoint> {
    let seed = rule.seed;
    let support = &rule.prototiles[seed].support;
    let inradius = support.inradius();
    let mut best: Option<FixedPoint> = None;
    for period in 1..=4 {
        let lp = rule.expansion.pow(period as u32);
        let shift = LinearMap::identity(rule.dim).add(&lp.scale(-1.0)).inverse()?;
        let patch = supertile_with(rule, seed, period, &GenerationLimits::default(), false)?;
        for t in patch.tiles.iter().filter(|t| t.kind == seed) {
            let offset = shift.apply(t.translation);
            let margin = support.margin(sub([0.0, 0.0], offset));
            if best.is_none_or(|b| margin > b.margin + 1e-12) {
                best = Some(FixedPoint { period, offset, margin });
            }
        }
        if best.is_some_and(|b| b.margin >= 0.1 * inradius) {
            break;
        }
    }
    match best {
        Some(b) if b.margin > 0.0 => Ok(b),
        _ => Err(Error::Precondition(
            "no self-nested seed placement keeps the origin in a tile interior".into(),
        )),
    }
}

/// Which tiles of the fixed-point tiling a region query returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Tiles whose supports lie inside the region.
    Inside,
    /// Tiles whose supports meet the region.
    Intersecting,
}

/// Restrictions of the fixed-point tiling to boxes.
#[derive(Debug, Clone)]
pub struct FixedPointTiling<'a> {
    rule: &'a SubstitutionRule,
    pub anchor: FixedPoint,
    pub limits: GenerationLimits,
}

const MAX_ORDER: usize = 400;

impl<'a> FixedPointTiling<'a> {
    pub fn new(rule: &'a SubstitutionRule) -> Result<Self> {
        Ok(Self { rule, anchor: fixed_point(rule)?, limits: GenerationLimits::default() })
    }

    pub fn rule(&self) -> &SubstitutionRule {
        self.rule
    }

    /// Smallest multiple of the period that is ≥ n.
    pub fn round_order(&self, n: usize) -> usize {
        n.div_ceil(self.anchor.period) * self.anchor.period
    }

    fn seed_support(&self, n: usize) -> Support {
        let ln = self.rule.expansion.pow(n as u32);
        self.rule.prototiles[self.rule.seed]
            .support
            .translate(self.anchor.offset)
            .transform(&ln)
    }

    /// Whether the order-n supertile around the origin covers `region`.
    pub fn covers(&self, n: usize, region: &Aabb) -> bool {
        let s = self.seed_support(n);
        corners(self.rule.dim, region).iter().all(|&c| s.contains(c, 0.0))
    }

    /// Smallest admissible order whose supertile covers `region`.
    pub fn minimal_order(&self, region: &Aabb) -> Result<usize> {
        let mut n = self.anchor.period;
        while n <= MAX_ORDER {
            if self.covers(n, region) {
                return Ok(n);
            }
            n += self.anchor.period;
        }
        Err(Error::Coverage { message: format!("no order up to {MAX_ORDER} covers the region"), minimal_order: None })
    }

    /// Tiles of the fixed-point tiling selected against `region`, generated
    /// from the order-n supertile (n rounded up to a multiple of the period).
    pub fn patch(&self, n: usize, region: &Aabb, selection: Selection) -> Result<Patch> {
        let n = self.round_order(n.max(1));
        if !self.covers(n, region) {
            let minimal = self.minimal_order(region).ok();
            return Err(Error::Coverage {
                message: format!("order {n} supertile does not cover the region"),
                minimal_order: minimal,
            });
        }
        let root = self.rule.expansion.pow(n as u32).apply(self.anchor.offset);
        let generated = Generator::new(self.rule, n).run(self.rule.seed, root, Some(region), &self.limits, true)?;
        let scale = 1.0 + region.lo.iter().chain(region.hi.iter()).fold(0.0_f64, |m, x| m.max(x.abs()));
        let tol = 1e-9 * scale;
        let rule = self.rule;
        Ok(generated.retain(|_, t| {
            let s = rule.prototiles[t.kind].support.translate(t.translation);
            match selection {
                Selection::Inside => region_contains(rule.dim, region, &s, tol),
                Selection::Intersecting => intersects_box(&s, region),
            }
        }))
    }

    /// Like [`Self::patch`] with the smallest covering order.
    pub fn covering_patch(&self, region: &Aabb, selection: Selection) -> Result<(Patch, usize)> {
        let n = self.minimal_order(region)?;
        Ok((self.patch(n, region, selection)?, n))
    }
}

fn corners(dim: usize, r: &Aabb) -> Vec<Point> {
    if dim == 1 {
        vec![r.lo, r.hi]
    } else {
        vec![r.lo, [r.hi[0], r.lo[1]], r.hi, [r.lo[0], r.hi[1]]]
    }
}

fn region_contains(dim: usize, region: &Aabb, s: &Support, tol: f64) -> bool {
    s.vertices.iter().all(|v| (0..dim).all(|k| v[k] >= region.lo[k] - tol && v[k] <= region.hi[k] + tol))
}

/// Whether the support meets the box in a set with nonempty interior.
fn intersects_box(s: &Support, region: &Aabb) -> bool {
    s.bbox().intersects(region, 0.0) && s.clip_to_box(region).is_some()
}

/// The tiles of the fixed-point tiling fully inside C_R = [−R, R]^d,
/// generated from the order-n supertile around the origin.
pub fn patch_in_cube(rule: &SubstitutionRule, n: usize, r: f64) -> Result<Patch> {
    FixedPointTiling::new(rule)?.patch(n, &Aabb::cube(rule.dim, r), Selection::Inside)
}

/// [`patch_in_cube`] at the smallest order covering the cube; also returns
/// the order used.
pub fn patch_covering_cube(rule: &SubstitutionRule, r: f64) -> Result<(Patch, usize)> {
    FixedPointTiling::new(rule)?.covering_patch(&Aabb::cube(rule.dim, r), Selection::Inside)
}

/// Grid hash for locating the tile that contains a point.
#[derive(Debug, Clone)]
pub struct PatchIndex<'a> {
    rule: &'a SubstitutionRule,
    patch: &'a Patch,
    cell: f64,
    cells: HashMap<(i64, i64), Vec<u32>>,
    tol: f64,
}

impl<'a> PatchIndex<'a> {
    pub fn new(rule: &'a SubstitutionRule, patch: &'a Patch) -> Self {
        let cell = rule
            .prototiles
            .iter()
            .map(|p| {
                let b = p.support.bbox();
                (b.hi[0] - b.lo[0]).max(b.hi[1] - b.lo[1])
            })
            .fold(0.0, f64::max)
            .max(1e-9);
        let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, t) in patch.tiles.iter().enumerate() {
            let b = rule.prototiles[t.kind].support.bbox().translate(t.translation);
            let (x0, y0) = key(b.lo, cell);
            let (x1, y1) = key(b.hi, cell);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    cells.entry((x, y)).or_default().push(i as u32);
                }
            }
        }
        let tol = 1e-12 * patch.extent();
        Self { rule, patch, cell, cells, tol }
    }

    /// Lowest-index tile whose closed support contains `p`.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let candidates = self.cells.get(&key(p, self.cell))?;
        candidates
            .iter()
            .map(|&i| i as usize)
            .filter(|&i| {
                let t = self.patch.tiles[i];
                self.rule.prototiles[t.kind].support.contains(sub(p, t.translation), self.tol)
            })
            .min()
    }

    /// Indices of tiles whose bounding boxes meet the box.
    pub fn query(&self, region: &Aabb) -> Vec<usize> {
        let (x0, y0) = key(region.lo, self.cell);
        let (x1, y1) = key(region.hi, self.cell);
        let mut out = Vec::new();
        for x in x0..=x1 {
            for y in y0..=y1 {
                if let Some(v) = self.cells.get(&(x, y)) {
                    out.extend(v.iter().map(|&i| i as usize));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|&i| {
            let t = self.patch.tiles[i];
            self.rule.prototiles[t.kind].support.bbox().translate(t.translation).intersects(region, self.tol)
        });
        out
    }
}

fn key(p: Point, cell: f64) -> (i64, i64) {
    ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
}
