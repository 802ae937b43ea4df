use num_traits::Zero;

use super::metric::{continuity_radius, AtomicLaw, Backend, MetricSpaceModel};
use crate::error::Result;
use crate::rational::{self, Rational};

/// Open ball `{x : d(center, x) < radius}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub center: usize,
    pub radius: Rational,
}

/// One cell `A_{i^k}` of a level of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    /// Index tuple `i^k` with entries `>= 1`; entry `1` marks a residual.
    pub index: Vec<u32>,
    /// Position of the parent cell in the previous level.
    pub parent: Option<usize>,
    /// Point indices in model order.
    pub members: Vec<usize>,
    pub diameter: Rational,
    /// Ball this cell was cut from; `None` for residual cells.
    pub ball: Option<Ball>,
    /// P-mass of the sphere of `ball` (zero by choice of radius).
    pub sphere_mass: Rational,
    /// Upper bound on the P-mass of the cell boundary: the sphere masses of
    /// every ball used to carve the cell, its earlier siblings and its
    /// ancestors. Zero certifies a P-continuity set.
    pub boundary_mass: Rational,
    pub mass: Rational,
}

impl Cell {
    /// Cells whose index contains `1` lie inside a residual and carry no
    /// limit mass; all others have diameter `< 1/k`.
    pub fn is_residual(&self) -> bool {
        self.index.contains(&1)
    }

    pub fn child_index(&self) -> u32 {
        *self.index.last().expect("cells below the root have non-empty index")
    }
}

/// Nested partitions of the model points, one level per depth `k = 1..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTree {
    pub depth: usize,
    pub backend: Backend,
    /// `levels[k - 1]` partitions all points at resolution `1/k`.
    pub levels: Vec<Vec<Cell>>,
}

impl PartitionTree {
    pub fn level(&self, k: usize) -> &[Cell] {
        &self.levels[k - 1]
    }

    /// Position of the level-`k` cell containing point `x`.
    pub fn locate(&self, k: usize, x: usize) -> Option<usize> {
        self.level(k).iter().position(|c| c.members.contains(&x))
    }

    /// Largest child index used at level `k`; the level-`k` digit alphabet.
    pub fn alphabet_size(&self, k: usize) -> usize {
        self.level(k).iter().map(|c| c.child_index() as usize).max().unwrap_or(1)
    }

    /// Digit path `(i_1, ..., i_K)` of point `x`.
    pub fn path(&self, x: usize) -> Option<Vec<u32>> {
        (1..=self.depth)
            .map(|k| self.locate(k, x).map(|c| self.level(k)[c].child_index()))
            .collect()
    }
}

/// Parent position, index, members, boundary mass and residual flag.
type ParentView = (Option<usize>, Vec<u32>, Vec<usize>, Rational, bool);

/// Greedy nested covering by continuity balls.
///
/// At level `k` each non-residual parent is processed independently: the
/// first uncovered point of `E_0` (in model order) becomes a center, the ball
/// of continuity radius below `1/k` is tried first and, if the carved cell
/// has diameter `>= 1/k`, the radius below `1/(2k)` is used instead, which
/// always works. Carved cells take child indices `2, 3, ...`; what remains
/// (points outside `E_0` only) becomes child `1`. A residual parent has
/// itself as its single child `1`.
pub fn build_partition_tree(
    model: &MetricSpaceModel,
    law: &AtomicLaw,
    depth: usize,
) -> Result<PartitionTree> {
    model.require_separable(law)?;
    let mass_of = |members: &[usize]| -> Rational {
        members
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + law.mass(&model.atom(i)))
    };
    let sphere = |ball: &Ball| -> Rational {
        match model.backend() {
            Backend::Linf => model.sphere_mass(ball.center, &ball.radius, law),
            Backend::Table => Rational::zero(),
        }
    };

    let root_members: Vec<usize> = (0..model.len()).collect();
    let mut levels: Vec<Vec<Cell>> = Vec::with_capacity(depth);
    for k in 1..=depth {
        let cap = rational::ratio(1, k as i64);
        let half_cap = rational::ratio(1, 2 * k as i64);
        let parents: Vec<ParentView> = if k == 1 {
            vec![(None, vec![], root_members.clone(), Rational::zero(), false)]
        } else {
            levels[k - 2]
                .iter()
                .enumerate()
                .map(|(i, c)| (Some(i), c.index.clone(), c.members.clone(), c.boundary_mass.clone(), c.is_residual()))
                .collect()
        };

        let mut cells = Vec::new();
        for (parent, index, members, parent_boundary, residual) in parents {
            let with_child = |child: u32| {
                let mut i = index.clone();
                i.push(child);
                i
            };
            if residual {
                cells.push(Cell {
                    index: with_child(1),
                    parent,
                    diameter: model.diameter(&members),
                    mass: mass_of(&members),
                    members,
                    ball: None,
                    sphere_mass: Rational::zero(),
                    boundary_mass: parent_boundary,
                });
                continue;
            }

            let mut uncovered = members;
            let mut boundary = parent_boundary;
            let mut child = 2u32;
            while let Some(&center) = uncovered.iter().find(|&&x| model.in_separable_support(x)) {
                let carve = |radius: &Rational| -> Vec<usize> {
                    uncovered
                        .iter()
                        .copied()
                        .filter(|&x| model.dist(center, x) < radius)
                        .collect()
                };
                let mut radius = continuity_radius(model, center, &cap, law);
                let mut cell_members = carve(&radius);
                if model.diameter(&cell_members) >= cap {
                    radius = continuity_radius(model, center, &half_cap, law);
                    cell_members = carve(&radius);
                }
                let ball = Ball { center, radius };
                let sphere_mass = sphere(&ball);
                boundary += &sphere_mass;
                uncovered.retain(|x| !cell_members.contains(x));
                cells.push(Cell {
                    index: with_child(child),
                    parent,
                    diameter: model.diameter(&cell_members),
                    mass: mass_of(&cell_members),
                    members: cell_members,
                    ball: Some(ball),
                    sphere_mass,
                    boundary_mass: boundary.clone(),
                });
                child += 1;
            }
            if !uncovered.is_empty() {
                cells.push(Cell {
                    index: with_child(1),
                    parent,
                    diameter: model.diameter(&uncovered),
                    mass: mass_of(&uncovered),
                    members: uncovered,
                    ball: None,
                    sphere_mass: Rational::zero(),
                    boundary_mass: boundary,
                });
            }
        }
        levels.push(cells);
    }
    Ok(PartitionTree {
        depth,
        backend: model.backend(),
        levels,
    })
}
