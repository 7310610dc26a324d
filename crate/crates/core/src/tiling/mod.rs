//! Self-affine substitution tilings: rules, supertiles, fixed-point patches,
//! tower decompositions and return-vector generators.

pub mod fixtures;
pub mod generators;
pub mod io;
pub mod patch;
pub mod rule;
pub mod tower;

pub use generators::{
    adjacency_differences, default_generators, generator_data, generator_projections, good_return_vectors,
    GeneratorData, GoodReturnVector,
};
pub use io::{rule_from_path, rule_from_str, rule_from_value, rule_to_value};
pub use patch::{
    fixed_point, patch_covering_cube, patch_in_cube, supertile, supertile_with, FixedPoint, FixedPointTiling,
    GenerationLimits, Genealogy, Patch, PatchIndex, PlacedTile, Selection,
};
pub use rule::{
    control_points, is_primitive, rule_power, validate, Child, GeometryStats, Primitivity, Prototile, RawPrototile,
    SubstitutionRule,
};
pub use tower::{tower_decompose, Tower, TowerBlock};
