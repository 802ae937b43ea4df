use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered finite label set for one coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            // Labels are comma-joined in the text encoding of points.
            if s.is_empty() || s.contains(',') {
                return Err(Error::InvalidAlphabet(format!(
                    "label {s:?} must be non-empty and free of commas"
                )));
            }
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAlphabet(format!("duplicate label {s:?}")));
            }
        }
        Ok(Self { symbols })
    }

    /// Labels `"1"`, `"2"`, ..., `"size"`.
    pub fn numbered(size: usize) -> Result<Self> {
        Self::new((1..=size).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn label(&self, index: u32) -> Option<&str> {
        self.symbols.get(index as usize).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<u32> {
        self.symbols.iter().position(|s| s == label).map(|i| i as u32)
    }
}

/// A point of a product space: one label index per coordinate.
///
/// Window prefixes of a point are tuple prefixes, so marginalizing onto the
/// first `k` coordinates is a grouping by `point.prefix(k)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Point(pub Vec<u32>);

impl Point {
    pub fn empty() -> Self {
        Point(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, k: usize) -> Point {
        Point(self.0[..k].to_vec())
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn concat(&self, other: &Point) -> Point {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Point(v)
    }
}

impl From<Vec<u32>> for Point {
    fn from(v: Vec<u32>) -> Self {
        Point(v)
    }
}

/// Finite product of alphabets. The last coordinate of a process space plays
/// the role of the terminal (time-infinity) coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductSpace {
    coordinates: Vec<Alphabet>,
}

impl ProductSpace {
    pub fn new(coordinates: Vec<Alphabet>) -> Arc<Self> {
        Arc::new(Self { coordinates })
    }

    pub fn from_labels<S: AsRef<str>>(coords: &[&[S]]) -> Result<Arc<Self>> {
        let coordinates = coords
            .iter()
            .map(|c| Alphabet::new(c.iter().map(|s| s.as_ref().to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coordinates))
    }

    pub fn len(&self) -> usize {
        self.coordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.is_empty()
    }

    pub fn coordinates(&self) -> &[Alphabet] {
        &self.coordinates
    }

    /// Space of the first `k` coordinates; `k == 0` is the one-point space of
    /// the empty tuple.
    pub fn prefix(&self, k: usize) -> Result<Arc<ProductSpace>> {
        if k > self.len() {
            return Err(Error::WindowOutOfRange {
                window: k,
                coordinates: self.len(),
            });
        }
        Ok(Self::new(self.coordinates[..k].to_vec()))
    }

    pub fn concat(&self, other: &ProductSpace) -> Arc<ProductSpace> {
        let mut coordinates = self.coordinates.clone();
        coordinates.extend(other.coordinates.iter().cloned());
        Self::new(coordinates)
    }

    /// Number of points, saturating at `u128::MAX`.
    pub fn point_count(&self) -> u128 {
        self.coordinates
            .iter()
            .fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128))
    }

    pub fn contains(&self, point: &Point) -> bool {
        point.len() == self.len()
            && point
                .0
                .iter()
                .zip(&self.coordinates)
                .all(|(&i, a)| (i as usize) < a.len())
    }

    /// Comma-joined labels; the empty tuple renders as `""`.
    pub fn format_point(&self, point: &Point) -> String {
        point
            .0
            .iter()
            .zip(&self.coordinates)
            .map(|(&i, a)| a.label(i).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_point(&self, text: &str) -> Result<Point> {
        if self.is_empty() {
            return if text.is_empty() {
                Ok(Point::empty())
            } else {
                Err(Error::PointOutsideSpace { point: text.into() })
            };
        }
        let labels: Vec<&str> = text.split(',').collect();
        if labels.len() != self.len() {
            return Err(Error::PointOutsideSpace { point: text.into() });
        }
        labels
            .iter()
            .zip(&self.coordinates)
            .map(|(l, a)| {
                a.index_of(l.trim())
                    .ok_or_else(|| Error::PointOutsideSpace { point: text.into() })
            })
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }

    /// Every point in lexicographic order. Only sensible for small spaces.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let total = self.point_count();
        (0..total).map(move |mut code| {
            let mut coords = vec![0u32; self.len()];
            for (slot, a) in coords.iter_mut().zip(&self.coordinates).rev() {
                let size = a.len() as u128;
                *slot = (code % size) as u32;
                code /= size;
            }
            Point(coords)
        })
    }
}

impl fmt::Display for ProductSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.coordinates.iter().map(|a| a.len().to_string()).collect();
        write!(f, "[{}]", sizes.join("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_rejects_bad_labels() {
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(["a,b"]).is_err());
        assert!(Alphabet::new([""]).is_err());
        assert_eq!(Alphabet::numbered(3).unwrap().symbols(), ["1", "2", "3"]);
    }

    #[test]
    fn point_text_round_trip() {
        let space = ProductSpace::from_labels(&[&["a", "b"], &["x", "y", "z"]]).unwrap();
        let p = space.parse_point("b,z").unwrap();
        assert_eq!(p, Point(vec![1, 2]));
        assert_eq!(space.format_point(&p), "b,z");
        assert!(space.parse_point("b").is_err());
        assert!(space.parse_point("c,x").is_err());
        let empty = space.prefix(0).unwrap();
        assert_eq!(empty.parse_point("").unwrap(), Point::empty());
        assert_eq!(empty.format_point(&Point::empty()), "");
    }

    #[test]
    fn enumerates_points_in_order() {
        let space = ProductSpace::from_labels(&[&["a", "b"], &["x", "y"]]).unwrap();
        let pts: Vec<_> = space.points().collect();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[1], Point(vec![0, 1]));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(space.prefix(0).unwrap().points().count(), 1);
        assert!(space.prefix(3).is_err());
    }
}
