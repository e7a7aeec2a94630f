use serde::{Deserialize, Serialize};

use crate::diagram::{cmp_pair, PersistenceDiagram};
use crate::error::{Error, Result};

/// A weighted atom of a discrete persistence measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub birth: f64,
    pub death: f64,
    pub mass: f64,
}

impl Atom {
    pub fn coords(&self) -> (f64, f64) {
        (self.birth, self.death)
    }
}

/// A finite, non-negative atomic measure on the open half-plane
/// `{birth < death}`. Atoms are sorted by location, coincident atoms merged
/// and zero-mass atoms dropped.
///
/// JSON form: `{"dimension": k, "atoms": [[b, d, mass], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct PersistenceMeasure {
    dimension: usize,
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    dimension: usize,
    atoms: Vec<[f64; 3]>,
}

impl TryFrom<MeasureRepr> for PersistenceMeasure {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        PersistenceMeasure::new(
            r.dimension,
            r.atoms.into_iter().map(|[birth, death, mass]| Atom { birth, death, mass }),
        )
    }
}

impl From<PersistenceMeasure> for MeasureRepr {
    fn from(m: PersistenceMeasure) -> Self {
        MeasureRepr { dimension: m.dimension, atoms: m.atoms.iter().map(|a| [a.birth, a.death, a.mass]).collect() }
    }
}

impl PersistenceMeasure {
    pub fn empty(dimension: usize) -> Self {
        Self { dimension, atoms: Vec::new() }
    }

    pub fn new(dimension: usize, atoms: impl IntoIterator<Item = Atom>) -> Result<Self> {
        let mut v: Vec<Atom> = Vec::new();
        for a in atoms {
            if !a.birth.is_finite() || !a.death.is_finite() || a.birth >= a.death {
                return Err(Error::input(format!("atom location ({}, {}) is not above the diagonal", a.birth, a.death)));
            }
            if !(a.mass >= 0.0 && a.mass.is_finite()) {
                return Err(Error::input(format!("atom mass {} must be finite and non-negative", a.mass)));
            }
            if a.mass > 0.0 {
                v.push(a);
            }
        }
        Ok(Self { dimension, atoms: merge_sorted(v) })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Multiplies every mass by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::arg("mass scale factor must be positive"));
        }
        Ok(Self {
            dimension: self.dimension,
            atoms: self.atoms.iter().map(|a| Atom { mass: a.mass * factor, ..*a }).collect(),
        })
    }
}

pub(crate) fn merge_sorted(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| cmp_pair(&a.coords(), &b.coords()));
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match merged.last_mut() {
            Some(last) if last.birth == a.birth && last.death == a.death => last.mass += a.mass,
            _ => merged.push(a),
        }
    }
    merged
}

/// The counting measure of a diagram: one atom per distinct point with mass
/// equal to its multiplicity.
pub fn diagram_to_measure(d: &PersistenceDiagram) -> PersistenceMeasure {
    PersistenceMeasure {
        dimension: d.dimension(),
        atoms: d
            .points()
            .iter()
            .map(|p| Atom { birth: p.birth, death: p.death, mass: p.multiplicity as f64 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_diagram_gives_empty_measure() {
        assert!(diagram_to_measure(&PersistenceDiagram::empty(1)).is_empty());
    }

    #[test]
    fn multiplicity_becomes_mass() {
        let d = PersistenceDiagram::new(1, [(0.0, 2.0), (0.0, 2.0)]).unwrap();
        let m = diagram_to_measure(&d);
        assert_eq!(m.atoms(), &[Atom { birth: 0.0, death: 2.0, mass: 2.0 }]);
    }

    #[test]
    fn zero_mass_atoms_dropped_and_duplicates_merged() {
        let m = PersistenceMeasure::new(
            0,
            [
                Atom { birth: 0.0, death: 1.0, mass: 0.0 },
                Atom { birth: 0.0, death: 2.0, mass: 0.25 },
                Atom { birth: 0.0, death: 2.0, mass: 0.5 },
            ],
        )
        .unwrap();
        assert_eq!(m.atoms(), &[Atom { birth: 0.0, death: 2.0, mass: 0.75 }]);
        assert!(PersistenceMeasure::new(0, [Atom { birth: 1.0, death: 0.5, mass: 1.0 }]).is_err());
        assert!(PersistenceMeasure::new(0, [Atom { birth: 0.0, death: 0.5, mass: -1.0 }]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = PersistenceMeasure::new(1, [Atom { birth: 0.5, death: 2.0, mass: 0.125 }]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dimension":1,"atoms":[[0.5,2.0,0.125]]}"#);
        assert_eq!(serde_json::from_str::<PersistenceMeasure>(&s).unwrap(), m);
    }
}
