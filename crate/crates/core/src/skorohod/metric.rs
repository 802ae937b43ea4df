use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::{Alphabet, MassFunction, Point, ProductSpace};
use crate::rational::{self, Rational};

/// Atomic law on the points of a [`MetricSpaceModel`]: a mass function on
/// the model's one-coordinate point space.
pub type AtomicLaw = MassFunction;

/// How boundaries of cells are understood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Explicit distance table over a finite (hence discrete) space: every
    /// boundary is empty and continuity certificates are vacuous.
    Table,
    /// Rational coordinates in `R^d` under the max-metric; boundaries are
    /// taken in the ambient space, so sphere masses are real constraints.
    Linf,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Table => "table",
            Backend::Linf => "linf",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "table" => Ok(Backend::Table),
            "linf" => Ok(Backend::Linf),
            other => Err(Error::InvalidMetric(format!("unknown backend {other:?}"))),
        }
    }
}

/// Finite metric model with exact rational distances and a flagged
/// separable subset `E_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSpaceModel {
    space: Arc<ProductSpace>,
    dist: Vec<Vec<Rational>>,
    separable_support: Vec<bool>,
    coords: Option<Vec<Vec<Rational>>>,
    backend: Backend,
}

impl MetricSpaceModel {
    pub fn from_table(
        labels: Vec<String>,
        dist: Vec<Vec<Rational>>,
        separable_support: Option<Vec<bool>>,
    ) -> Result<Self> {
        let n = labels.len();
        let space = ProductSpace::new(vec![Alphabet::new(labels)?]);
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMetric(format!("distance table must be {n}x{n}")));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::InvalidMetric(format!("d({i},{i}) is not zero")));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) is not symmetric")));
                }
                if i != j && !dist[i][j].is_positive() {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) must be positive")));
                }
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        let separable_support = Self::check_support(separable_support, n)?;
        Ok(Self {
            space,
            dist,
            separable_support,
            coords: None,
            backend: Backend::Table,
        })
    }

    /// Points in `R^d` with `d(x, y) = max_i |x_i - y_i|`.
    pub fn from_coords(
        labels: Vec<String>,
        coords: Vec<Vec<Rational>>,
        separable_support: Option<Vec<bool>>,
    ) -> Result<Self> {
        let n = labels.len();
        if coords.len() != n {
            return Err(Error::InvalidMetric(format!("{n} labels but {} coordinate rows", coords.len())));
        }
        let dim = coords.first().map_or(0, Vec::len);
        if dim == 0 || coords.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidMetric("coordinates need a common positive dimension".into()));
        }
        let space = ProductSpace::new(vec![Alphabet::new(labels)?]);
        let dist: Vec<Vec<Rational>> = coords
            .iter()
            .map(|x| coords.iter().map(|y| linf(x, y)).collect())
            .collect();
        for (i, row) in dist.iter().enumerate() {
            if let Some(j) = row[..i].iter().position(Zero::is_zero) {
                return Err(Error::InvalidMetric(format!("points {j} and {i} coincide")));
            }
        }
        let separable_support = Self::check_support(separable_support, n)?;
        Ok(Self {
            space,
            dist,
            separable_support,
            coords: Some(coords),
            backend: Backend::Linf,
        })
    }

    fn check_support(flags: Option<Vec<bool>>, n: usize) -> Result<Vec<bool>> {
        let flags = flags.unwrap_or_else(|| vec![true; n]);
        if flags.len() != n {
            return Err(Error::InvalidMetric(format!("separable_support needs {n} flags")));
        }
        Ok(flags)
    }

    /// Reinterprets the model under another backend. `Linf` needs coordinates.
    pub fn with_backend(mut self, backend: Backend) -> Result<Self> {
        if backend == Backend::Linf && self.coords.is_none() {
            return Err(Error::InvalidMetric("linf backend needs coordinates".into()));
        }
        self.backend = backend;
        Ok(self)
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        self.space.coordinates()[0].symbols()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels()[i]
    }

    pub fn coords(&self) -> Option<&[Vec<Rational>]> {
        self.coords.as_deref()
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn table(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn in_separable_support(&self, i: usize) -> bool {
        self.separable_support[i]
    }

    pub fn separable_support(&self) -> &[bool] {
        &self.separable_support
    }

    /// One-coordinate space whose alphabet is the point labels.
    pub fn point_space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn atom(&self, i: usize) -> Point {
        Point(vec![i as u32])
    }

    /// Largest pairwise distance among `members` (0 for fewer than two).
    pub fn diameter(&self, members: &[usize]) -> Rational {
        let mut best = Rational::zero();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if self.dist[i][j] > best {
                    best = self.dist[i][j].clone();
                }
            }
        }
        best
    }

    /// `P(E \ E_0)`.
    pub fn mass_outside_support(&self, law: &AtomicLaw) -> Rational {
        law.iter()
            .filter(|(p, _)| !self.separable_support[p.coords()[0] as usize])
            .fold(Rational::zero(), |acc, (_, m)| acc + m)
    }

    pub fn require_separable(&self, law: &AtomicLaw) -> Result<()> {
        let outside = self.mass_outside_support(law);
        if outside.is_zero() {
            Ok(())
        } else {
            Err(Error::SeparabilityViolation {
                outside: rational::format(&outside),
            })
        }
    }

    /// P-mass of the sphere `{x : d(center, x) = radius}`.
    pub fn sphere_mass(&self, center: usize, radius: &Rational, law: &AtomicLaw) -> Rational {
        law.iter()
            .filter(|(p, _)| self.dist[center][p.coords()[0] as usize] == *radius)
            .fold(Rational::zero(), |acc, (_, m)| acc + m)
    }
}

fn linf(x: &[Rational], y: &[Rational]) -> Rational {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Radius `r <= proposed` whose sphere around `center` avoids the support of
/// `law`, so the open ball is a `law`-continuity set.
///
/// Only finitely many distances are realized, so `proposed` itself works
/// unless it is one of them; otherwise the midpoint of the gap below it is
/// used (or `proposed / 2` when no realized distance lies below).
pub fn continuity_radius(
    model: &MetricSpaceModel,
    center: usize,
    proposed: &Rational,
    law: &AtomicLaw,
) -> Rational {
    assert!(proposed.is_positive(), "proposed radius must be positive");
    let realized: Vec<&Rational> = law
        .support()
        .map(|p| model.dist(center, p.coords()[0] as usize))
        .collect();
    if !realized.contains(&proposed) {
        return proposed.clone();
    }
    let below = realized.iter().filter(|d| **d < proposed).max();
    match below {
        Some(lower) => (*lower + proposed) / rational::int(2),
        None => proposed / rational::int(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn line_model() -> MetricSpaceModel {
        MetricSpaceModel::from_coords(
            vec!["0".into(), "0.5".into(), "1".into()],
            vec![vec![ratio(0, 1)], vec![ratio(1, 2)], vec![ratio(1, 1)]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn continuity_radius_examples() {
        let model = line_model();
        let uniform = MassFunction::uniform(model.point_space().clone()).unwrap();
        assert_eq!(continuity_radius(&model, 0, &ratio(1, 2), &uniform), ratio(1, 4));
        assert_eq!(continuity_radius(&model, 0, &ratio(1, 3), &uniform), ratio(1, 3));

        let at_center = MassFunction::point_mass(model.point_space().clone(), model.atom(0)).unwrap();
        assert_eq!(continuity_radius(&model, 0, &ratio(1, 1), &at_center), ratio(1, 1));

        let far = MassFunction::point_mass(model.point_space().clone(), model.atom(1)).unwrap();
        assert_eq!(continuity_radius(&model, 0, &ratio(1, 2), &far), ratio(1, 4));
        for (c, r) in [(0, ratio(1, 2)), (1, ratio(1, 2)), (2, ratio(1, 1))] {
            let radius = continuity_radius(&model, c, &r, &uniform);
            assert!(radius <= r);
            assert!(model.sphere_mass(c, &radius, &uniform).is_zero());
        }
    }

    #[test]
    fn table_validation() {
        let d = |rows: &[[i64; 3]]| -> Vec<Vec<Rational>> {
            rows.iter().map(|r| r.iter().map(|&x| rational::int(x)).collect()).collect()
        };
        let labels = || vec!["a".to_string(), "b".into(), "c".into()];
        assert!(MetricSpaceModel::from_table(labels(), d(&[[0, 1, 2], [1, 0, 1], [2, 1, 0]]), None).is_ok());
        assert!(MetricSpaceModel::from_table(labels(), d(&[[0, 1, 3], [1, 0, 1], [3, 1, 0]]), None).is_err());
        assert!(MetricSpaceModel::from_table(labels(), d(&[[0, 1, 2], [2, 0, 1], [2, 1, 0]]), None).is_err());
        assert!(MetricSpaceModel::from_table(labels(), d(&[[1, 1, 2], [1, 0, 1], [2, 1, 0]]), None).is_err());
        assert!(MetricSpaceModel::from_table(labels(), d(&[[0, 0, 2], [0, 0, 1], [2, 1, 0]]), None).is_err());
        assert!(MetricSpaceModel::from_table(labels(), d(&[[0, 1, 2], [1, 0, 1], [2, 1, 0]]), Some(vec![true])).is_err());
    }

    #[test]
    fn linf_distances() {
        let m = MetricSpaceModel::from_coords(
            vec!["p".into(), "q".into()],
            vec![vec![ratio(0, 1), ratio(1, 3)], vec![ratio(1, 4), ratio(0, 1)]],
            None,
        )
        .unwrap();
        assert_eq!(*m.dist(0, 1), ratio(1, 3));
        assert!(MetricSpaceModel::from_coords(
            vec!["p".into(), "q".into()],
            vec![vec![ratio(1, 2)], vec![ratio(1, 2)]],
            None
        )
        .is_err());
        assert_eq!(m.clone().with_backend(Backend::Table).unwrap().backend(), Backend::Table);
    }
}
