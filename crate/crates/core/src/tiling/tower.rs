use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};

use super::patch::{Patch, PlacedTile};
use super::rule::SubstitutionRule;

/// One maximal supertile of the decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TowerBlock {
    pub order: usize,
    pub supertile: PlacedTile,
    /// Indices of the patch tiles making up this supertile.
    pub tiles: Vec<usize>,
}

/// Partition of a patch into maximal complete supertiles; `layers[k]` is R^k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tower {
    pub layers: Vec<Vec<TowerBlock>>,
}

impl Tower {
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    /// All tile indices, each exactly once, sorted.
    pub fn tile_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.layers.iter().flatten().flat_map(|b| b.tiles.iter().copied()).collect();
        v.sort_unstable();
        v
    }
}

/// Splits a patch with genealogy into R^n, …, R^0: a supertile of order k is
/// kept when all its tiles are in the patch and its parent's are not.
pub fn tower_decompose(rule: &SubstitutionRule, patch: &Patch) -> Result<Tower> {
    let genealogy = patch
        .genealogy
        .as_ref()
        .ok_or_else(|| Error::Annotation("patch carries no supertile genealogy".into()))?;
    let order = genealogy.order();
    if genealogy.parents.len() != order || genealogy.parents.first().is_some_and(|p| p.len() != patch.len()) {
        return Err(Error::Annotation("genealogy does not match the patch".into()));
    }
    // Expected tile counts of complete supertiles: column sums of 𝒮^k.
    let m = rule.type_count();
    let s = rule.substitution_matrix();
    let mut power = crate::algebraic::IntMatrix::identity(m);
    let mut expected: Vec<Vec<usize>> = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        expected.push(
            (0..m)
                .map(|j| (0..m).map(|i| power[(i, j)].to_usize().unwrap_or(usize::MAX)).sum())
                .collect(),
        );
        power = &s * &power;
    }
    // members[k][node] = patch tiles below that node.
    let mut members: Vec<Vec<Vec<usize>>> = vec![(0..patch.len()).map(|i| vec![i]).collect()];
    for k in 0..order {
        let mut up = vec![Vec::new(); genealogy.levels[k].len()];
        for (i, tiles) in members[k].iter().enumerate() {
            up[genealogy.parents[k][i]].extend(tiles.iter().copied());
        }
        members.push(up);
    }
    let node = |k: usize, i: usize| if k == 0 { patch.tiles[i] } else { genealogy.levels[k - 1][i] };
    let complete = |k: usize, i: usize| members[k][i].len() == expected[k][node(k, i).kind];
    let mut layers = vec![Vec::new(); order + 1];
    for k in (0..=order).rev() {
        for i in 0..members[k].len() {
            if members[k][i].is_empty() || !complete(k, i) {
                continue;
            }
            let parent_complete = k < order && complete(k + 1, genealogy.parents[k][i]);
            if !parent_complete {
                let mut tiles = members[k][i].clone();
                tiles.sort_unstable();
                layers[k].push(TowerBlock { order: k, supertile: node(k, i), tiles });
            }
        }
    }
    Ok(Tower { layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::{fixtures, patch::supertile};

    #[test]
    fn exact_supertile_is_one_block() {
        let rule = fixtures::np13();
        let p = supertile(&rule, 0, 2).unwrap();
        let t = tower_decompose(&rule, &p).unwrap();
        assert_eq!(t.layer_sizes(), vec![0, 0, 1]);
        assert_eq!(t.tile_indices(), (0..p.len()).collect::<Vec<_>>());
    }

    #[test]
    fn removing_a_boundary_tile_breaks_the_top() {
        let rule = fixtures::np13();
        let full = supertile(&rule, 0, 2).unwrap();
        let p = full.without(full.len() - 1);
        let t = tower_decompose(&rule, &p).unwrap();
        let sizes = t.layer_sizes();
        assert_eq!(sizes[2], 0);
        assert!(sizes[0] + sizes[1] > 0);
        assert_eq!(t.tile_indices(), (0..p.len()).collect::<Vec<_>>());
    }

    #[test]
    fn single_tile_patch() {
        let rule = fixtures::np13();
        let p = supertile(&rule, 1, 0).unwrap();
        let t = tower_decompose(&rule, &p).unwrap();
        assert_eq!(t.layer_sizes(), vec![1]);
    }

    #[test]
    fn missing_genealogy_is_an_error() {
        let rule = fixtures::np13();
        let p = Patch::single(1, 0);
        assert!(matches!(tower_decompose(&rule, &p), Err(Error::Annotation(_))));
    }
}
