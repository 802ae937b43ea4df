use crate::error::{Error, Result};
use crate::measure::{Alphabet, MassFunction, Point, ProcessSequenceSpec, ProductSpace};

use super::metric::MetricSpaceModel;
use super::partition::PartitionTree;

/// Digit-process space: coordinate `k <= K` carries the level-`k` child
/// index (labels `"1"`, `"2"`, ...), and the terminal coordinate carries the
/// point label itself.
pub fn digit_space(model: &MetricSpaceModel, tree: &PartitionTree) -> Result<std::sync::Arc<ProductSpace>> {
    let mut coords = (1..=tree.depth)
        .map(|k| Alphabet::numbered(tree.alphabet_size(k)))
        .collect::<Result<Vec<_>>>()?;
    coords.push(model.point_space().coordinates()[0].clone());
    Ok(ProductSpace::new(coords))
}

/// Digit encoding `(i_1 - 1, ..., i_K - 1, x)` of point `x`.
pub fn encode(tree: &PartitionTree, x: usize) -> Result<Point> {
    let path = tree
        .path(x)
        .ok_or_else(|| Error::Internal(format!("point {x} is not in any cell")))?;
    let mut coords: Vec<u32> = path.into_iter().map(|i| i - 1).collect();
    coords.push(x as u32);
    Ok(Point(coords))
}

/// Terminal coordinate of a digit point: the model point it encodes.
pub fn decode(point: &Point) -> usize {
    *point.coords().last().expect("digit points are non-empty") as usize
}

fn digitize_law(
    law: &MassFunction,
    space: &std::sync::Arc<ProductSpace>,
    tree: &PartitionTree,
) -> Result<MassFunction> {
    let entries = law
        .iter()
        .map(|(p, m)| Ok((encode(tree, p.coords()[0] as usize)?, m.clone())))
        .collect::<Result<Vec<_>>>()?;
    MassFunction::new(space.clone(), entries)
}

/// Pushes every law of a point-space sequence forward to its digit process.
pub fn digitize(
    model: &MetricSpaceModel,
    laws: &ProcessSequenceSpec,
    tree: &PartitionTree,
) -> Result<ProcessSequenceSpec> {
    if laws.space() != model.point_space() {
        return Err(Error::SpaceMismatch("laws are not on the model's points".into()));
    }
    let space = digit_space(model, tree)?;
    let members = laws
        .members()
        .iter()
        .map(|law| digitize_law(law, &space, tree))
        .collect::<Result<Vec<_>>>()?;
    let limit = digitize_law(laws.limit(), &space, tree)?;
    ProcessSequenceSpec::new(space, members, limit, laws.tail())
}
