use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::space::{Point, ProductSpace};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Exact (sub-)probability mass function on a finite product space.
///
/// Only strictly positive masses are stored, so structural equality is
/// equality of measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MassFunction {
    space: Arc<ProductSpace>,
    masses: BTreeMap<Point, Rational>,
}

impl MassFunction {
    /// Validates membership, non-negativity and total mass `<= 1`. Repeated
    /// points are summed.
    pub fn new(
        space: Arc<ProductSpace>,
        masses: impl IntoIterator<Item = (Point, Rational)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Point, Rational> = BTreeMap::new();
        for (point, mass) in masses {
            if !space.contains(&point) {
                return Err(Error::PointOutsideSpace {
                    point: format!("{:?}", point.coords()),
                });
            }
            if mass.is_negative() {
                return Err(Error::NegativeMass {
                    point: space.format_point(&point),
                    mass: rational::format(&mass),
                });
            }
            *map.entry(point).or_insert_with(Rational::zero) += mass;
        }
        map.retain(|_, m| !m.is_zero());
        let out = Self { space, masses: map };
        let total = out.total();
        if total > Rational::one() {
            return Err(Error::MassExceedsOne {
                total: rational::format(&total),
            });
        }
        Ok(out)
    }

    /// Parses `label,label,...` keys against `space`.
    pub fn from_labels<S: AsRef<str>>(
        space: Arc<ProductSpace>,
        entries: &[(S, Rational)],
    ) -> Result<Self> {
        let parsed = entries
            .iter()
            .map(|(k, m)| Ok((space.parse_point(k.as_ref())?, m.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, parsed)
    }

    pub fn zero(space: Arc<ProductSpace>) -> Self {
        Self {
            space,
            masses: BTreeMap::new(),
        }
    }

    pub fn point_mass(space: Arc<ProductSpace>, point: Point) -> Result<Self> {
        Self::new(space, [(point, Rational::one())])
    }

    /// Uniform law over the whole space.
    pub fn uniform(space: Arc<ProductSpace>) -> Result<Self> {
        let count = space.point_count();
        let each = Rational::new(1.into(), count.into());
        let points: Vec<Point> = space.points().collect();
        Self::new(space, points.into_iter().map(|p| (p, each.clone())))
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn mass(&self, point: &Point) -> Rational {
        self.masses.get(point).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, &Rational)> {
        self.masses.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Point> {
        self.masses.keys()
    }

    pub fn support_len(&self) -> usize {
        self.masses.len()
    }

    pub fn total(&self) -> Rational {
        self.masses.values().fold(Rational::zero(), |acc, m| acc + m)
    }

    pub fn is_probability(&self) -> bool {
        self.total().is_one()
    }

    /// Errors unless the total mass is exactly one.
    pub fn require_probability(&self, what: &str) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::NotProbability {
                what: what.to_string(),
                total: rational::format(&self.total()),
            })
        }
    }

    pub fn format_point(&self, point: &Point) -> String {
        self.space.format_point(point)
    }

    /// Exact pushforward onto the first `k` coordinates.
    pub fn window_marginal(&self, k: usize) -> Result<MassFunction> {
        let target = self.space.prefix(k)?;
        let mut map: BTreeMap<Point, Rational> = BTreeMap::new();
        for (p, m) in &self.masses {
            *map.entry(p.prefix(k)).or_insert_with(Rational::zero) += m;
        }
        Ok(Self {
            space: target,
            masses: map,
        })
    }

    /// Pushforward along an arbitrary map into `target`.
    pub fn pushforward(
        &self,
        target: Arc<ProductSpace>,
        map: impl Fn(&Point) -> Point,
    ) -> Result<MassFunction> {
        Self::new(target, self.masses.iter().map(|(p, m)| (map(p), m.clone())))
    }

    fn require_same_space(&self, other: &MassFunction) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!("{} vs {}", self.space, other.space)))
        }
    }

    pub fn pointwise_min(&self, other: &MassFunction) -> Result<MassFunction> {
        self.require_same_space(other)?;
        let masses = self
            .masses
            .iter()
            .filter_map(|(p, m)| other.masses.get(p).map(|o| (p.clone(), m.min(o).clone())))
            .collect();
        Ok(Self {
            space: self.space.clone(),
            masses,
        })
    }

    /// `self - other`; errors with the offending point if negative anywhere.
    pub fn checked_sub(&self, other: &MassFunction) -> Result<MassFunction> {
        self.require_same_space(other)?;
        if let Some(p) = other.first_excess_over(self) {
            return Err(Error::NegativeMass {
                point: self.format_point(&p),
                mass: rational::format(&(self.mass(&p) - other.mass(&p))),
            });
        }
        let mut masses = self.masses.clone();
        for (p, m) in &other.masses {
            if let Some(slot) = masses.get_mut(p) {
                *slot -= m;
            }
        }
        masses.retain(|_, m| !m.is_zero());
        Ok(Self {
            space: self.space.clone(),
            masses,
        })
    }

    /// `self + other`, subject to the total-mass bound.
    pub fn checked_add(&self, other: &MassFunction) -> Result<MassFunction> {
        self.require_same_space(other)?;
        Self::new(
            self.space.clone(),
            self.masses
                .iter()
                .chain(other.masses.iter())
                .map(|(p, m)| (p.clone(), m.clone())),
        )
    }

    /// `factor * self`, subject to the total-mass bound.
    pub fn scale(&self, factor: &Rational) -> Result<MassFunction> {
        Self::new(
            self.space.clone(),
            self.masses.iter().map(|(p, m)| (p.clone(), m * factor)),
        )
    }

    /// First point (in order) where `self > other`, if any.
    pub fn first_excess_over(&self, other: &MassFunction) -> Option<Point> {
        self.masses
            .iter()
            .find(|(p, m)| **m > other.mass(p))
            .map(|(p, _)| p.clone())
    }

    pub fn is_dominated_by(&self, other: &MassFunction) -> bool {
        self.space == other.space && self.first_excess_over(other).is_none()
    }

    /// First point where the two measures differ.
    pub fn first_difference(&self, other: &MassFunction) -> Option<Point> {
        self.masses
            .keys()
            .chain(other.masses.keys())
            .filter(|p| self.mass(p) != other.mass(p))
            .min()
            .cloned()
    }
}

/// `(1/2) * sum |p - q|` for two probability laws on the same space.
pub fn total_variation(p: &MassFunction, q: &MassFunction) -> Result<Rational> {
    p.require_same_space(q)?;
    p.require_probability("first argument")?;
    q.require_probability("second argument")?;
    let mut sum = Rational::zero();
    for (point, m) in p.iter() {
        sum += (m - q.mass(point)).abs();
    }
    for (point, m) in q.iter() {
        if !p.masses.contains_key(point) {
            sum += m;
        }
    }
    Ok(sum / rational::int(2))
}
