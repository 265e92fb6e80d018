//! Finite universes, bitmask set rings and numerical submeasures.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::report::{Verdict, Witness};
use crate::{Error, Result};

pub const MAX_UNIVERSE: usize = 16;

/// A fixed non-empty universe of at most 16 labelled elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    labels: Vec<String>,
}

impl Universe {
    pub fn new(labels: Vec<String>) -> Result<Universe> {
        if labels.is_empty() {
            return Err(Error::input("universe must not be empty".to_string()));
        }
        if labels.len() > MAX_UNIVERSE {
            return Err(Error::input(format!(
                "universe capped at {MAX_UNIVERSE} elements, got {}",
                labels.len()
            )));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::input("universe labels must be distinct".to_string()));
        }
        Ok(Universe { labels })
    }

    pub fn named(labels: &[&str]) -> Result<Universe> {
        Universe::new(labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn full(&self) -> SetBits {
        SetBits((1u32 << self.size()) - 1)
    }

    /// Bitmask for a list of element labels.
    pub fn set_of(&self, members: &[&str]) -> Result<SetBits> {
        let mut mask = 0u32;
        for m in members {
            let pos = self
                .labels
                .iter()
                .position(|l| l == m)
                .ok_or_else(|| Error::input(format!("unknown element {m:?}")))?;
            mask |= 1 << pos;
        }
        Ok(SetBits(mask))
    }

    /// Comma-joined sorted labels; the empty set renders as the empty string.
    pub fn label_of(&self, set: SetBits) -> String {
        let mut parts: Vec<&str> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| set.0 & (1 << i) != 0)
            .map(|(_, l)| l.as_str())
            .collect();
        parts.sort_unstable();
        parts.join(",")
    }

    /// Parse a comma-joined label back into a bitmask.
    pub fn set_from_label(&self, label: &str) -> Result<SetBits> {
        if label.is_empty() {
            return Ok(SetBits::EMPTY);
        }
        let parts: Vec<&str> = label.split(',').map(str::trim).collect();
        self.set_of(&parts)
    }
}

/// A subset of the universe, encoded as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SetBits(pub u32);

impl SetBits {
    pub const EMPTY: SetBits = SetBits(0);

    pub fn union(self, other: SetBits) -> SetBits {
        SetBits(self.0 | other.0)
    }

    pub fn inter(self, other: SetBits) -> SetBits {
        SetBits(self.0 & other.0)
    }

    pub fn diff(self, other: SetBits) -> SetBits {
        SetBits(self.0 & !other.0)
    }

    pub fn symdiff(self, other: SetBits) -> SetBits {
        SetBits(self.0 ^ other.0)
    }

    pub fn is_subset_of(self, other: SetBits) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn card(self) -> u32 {
        self.0.count_ones()
    }
}

/// A ring of sets: contains the empty set and is closed under union and
/// difference (hence under intersection and symmetric difference).
#[derive(Clone, Debug, PartialEq)]
pub struct Ring {
    universe: Universe,
    members: Vec<SetBits>,
}

impl Ring {
    /// Least ring containing the generators: fixed-point closure under
    /// union and difference.
    pub fn generate(universe: Universe, generators: &[SetBits]) -> Result<Ring> {
        let full = universe.full();
        for g in generators {
            if !g.is_subset_of(full) {
                return Err(Error::input(format!(
                    "generator mask {:#x} has bits outside the universe",
                    g.0
                )));
            }
        }
        let mut members: BTreeSet<SetBits> = generators.iter().copied().collect();
        members.insert(SetBits::EMPTY);
        loop {
            let snapshot: Vec<SetBits> = members.iter().copied().collect();
            let before = members.len();
            for &x in &snapshot {
                for &y in &snapshot {
                    members.insert(x.union(y));
                    members.insert(x.diff(y));
                }
            }
            if members.len() == before {
                break;
            }
        }
        Ok(Ring {
            universe,
            members: members.into_iter().collect(),
        })
    }

    pub fn powerset(universe: Universe) -> Ring {
        let members: Vec<SetBits> = (0..(1u32 << universe.size())).map(SetBits).collect();
        Ring { universe, members }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn members(&self) -> &[SetBits] {
        &self.members
    }

    pub fn contains(&self, set: SetBits) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    /// Closure verification, used by tests and the scenario loader.
    pub fn verify_closed(&self) -> Result<()> {
        if !self.contains(SetBits::EMPTY) {
            return Err(Error::input("ring must contain the empty set".to_string()));
        }
        for &x in &self.members {
            for &y in &self.members {
                if !self.contains(x.union(y)) || !self.contains(x.diff(y)) {
                    return Err(Error::input(format!(
                        "ring is not closed at masks {:#x}, {:#x}",
                        x.0, y.0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A numerical submeasure candidate: an explicit finite table on the ring.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericalSubmeasure {
    values: Vec<(SetBits, f64)>,
}

impl NumericalSubmeasure {
    /// Total table over the ring from a function of the member mask.
    pub fn from_fn(ring: &Ring, f: impl Fn(SetBits) -> f64) -> Result<NumericalSubmeasure> {
        let mut values = Vec::with_capacity(ring.members().len());
        for &m in ring.members() {
            let v = f(m);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::input(format!(
                    "submeasure value at mask {:#x} must be a finite non-negative real, got {v}",
                    m.0
                )));
            }
            values.push((m, v));
        }
        Ok(NumericalSubmeasure { values })
    }

    pub fn cardinality(ring: &Ring) -> NumericalSubmeasure {
        NumericalSubmeasure::from_fn(ring, |m| m.card() as f64).unwrap()
    }

    /// Table from explicit `(set, value)` pairs; must cover the whole ring.
    pub fn from_table(ring: &Ring, table: &[(SetBits, f64)]) -> Result<NumericalSubmeasure> {
        NumericalSubmeasure::from_fn(ring, |m| {
            table
                .iter()
                .find(|(s, _)| *s == m)
                .map(|(_, v)| *v)
                .unwrap_or(f64::NAN)
        })
        .map_err(|_| {
            Error::input("eta table is missing a ring member or holds a bad value".to_string())
        })
    }

    pub fn get(&self, set: SetBits) -> Option<f64> {
        self.values
            .binary_search_by_key(&set, |(s, _)| *s)
            .ok()
            .map(|i| self.values[i].1)
    }

    pub fn value(&self, set: SetBits) -> Result<f64> {
        self.get(set)
            .ok_or_else(|| Error::input(format!("missing submeasure value for mask {:#x}", set.0)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (SetBits, f64)> + '_ {
        self.values.iter().copied()
    }
}

/// Exhaustive verdicts for the numerical submeasure axioms.
#[derive(Debug, Clone, Serialize)]
pub struct NumericalReport {
    pub pass: bool,
    pub tol: f64,
    pub empty_is_zero: Verdict,
    pub monotone: Verdict,
    pub subadditive: Verdict,
}

/// Exhaustive check of the three axioms over the whole ring (`O(|ring|^2)`).
pub fn check_numerical(
    eta: &NumericalSubmeasure,
    ring: &Ring,
    tol: f64,
) -> Result<NumericalReport> {
    let u = ring.universe();
    let witness = |e: SetBits, f: SetBits, lhs: f64, rhs: f64| Witness {
        e: u.label_of(e),
        f: u.label_of(f),
        x: 0.0,
        y: 0.0,
        lhs,
        rhs,
    };

    let v0 = eta.value(SetBits::EMPTY)?;
    let empty_is_zero = if v0.abs() <= tol {
        Verdict::passing(1)
    } else {
        Verdict {
            pass: false,
            checked: 1,
            violations: 1,
            witnesses: vec![witness(SetBits::EMPTY, SetBits::EMPTY, v0, 0.0)],
        }
    };

    let mut monotone = Verdict::passing(0);
    let mut subadditive = Verdict::passing(0);
    for &e in ring.members() {
        let ve = eta.value(e)?;
        for &f in ring.members() {
            let vf = eta.value(f)?;
            if e.is_subset_of(f) {
                monotone.checked += 1;
                if ve > vf + tol {
                    monotone.pass = false;
                    monotone.violations += 1;
                    if monotone.witnesses.len() < 8 {
                        monotone.witnesses.push(witness(e, f, ve, vf));
                    }
                }
            }
            subadditive.checked += 1;
            let vu = eta.value(e.union(f))?;
            if vu > ve + vf + tol {
                subadditive.pass = false;
                subadditive.violations += 1;
                if subadditive.witnesses.len() < 8 {
                    subadditive.witnesses.push(witness(e, f, vu, ve + vf));
                }
            }
        }
    }

    Ok(NumericalReport {
        pass: empty_is_zero.pass && monotone.pass && subadditive.pass,
        tol,
        empty_is_zero,
        monotone,
        subadditive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn universe3() -> Universe {
        Universe::named(&["a", "b", "c"]).unwrap()
    }

    #[test]
    fn universe_validation() {
        assert!(Universe::named(&[]).is_err());
        assert!(Universe::named(&["a", "a"]).is_err());
        let many: Vec<String> = (0..17).map(|i| format!("e{i}")).collect();
        assert!(Universe::new(many).is_err());
        assert_eq!(universe3().full(), SetBits(0b111));
    }

    #[test]
    fn labels_round_trip() {
        let u = universe3();
        let s = u.set_of(&["c", "a"]).unwrap();
        assert_eq!(u.label_of(s), "a,c");
        assert_eq!(u.set_from_label("a,c").unwrap(), s);
        assert_eq!(u.set_from_label("").unwrap(), SetBits::EMPTY);
        assert!(u.set_of(&["z"]).is_err());
    }

    #[test]
    fn ring_generation_examples() {
        let u = Universe::named(&["a", "b"]).unwrap();
        let trivial = Ring::generate(u.clone(), &[]).unwrap();
        assert_eq!(trivial.members(), &[SetBits::EMPTY]);

        let a = u.set_of(&["a"]).unwrap();
        let b = u.set_of(&["b"]).unwrap();
        let ring = Ring::generate(u, &[a, b]).unwrap();
        assert_eq!(ring.members().len(), 4);

        let u3 = universe3();
        let singles: Vec<SetBits> = (0..3).map(|i| SetBits(1 << i)).collect();
        let full = Ring::generate(u3.clone(), &singles).unwrap();
        assert_eq!(full.members().len(), 8);
        assert_eq!(full, Ring::powerset(u3));
    }

    #[test]
    fn generated_rings_are_closed() {
        let u = Universe::named(&["a", "b", "c", "d"]).unwrap();
        let g1 = u.set_of(&["a", "b"]).unwrap();
        let g2 = u.set_of(&["b", "c"]).unwrap();
        let ring = Ring::generate(u, &[g1, g2]).unwrap();
        ring.verify_closed().unwrap();
    }

    #[test]
    fn counting_measure_passes() {
        let ring = Ring::powerset(Universe::named(&["a", "b", "c", "d"]).unwrap());
        let eta = NumericalSubmeasure::cardinality(&ring);
        let r = check_numerical(&eta, &ring, 1e-9).unwrap();
        assert!(r.pass);
        assert_eq!(r.subadditive.checked, 256);
    }

    #[test]
    fn sqrt_of_cardinality_passes() {
        let ring = Ring::powerset(Universe::named(&["a", "b", "c", "d"]).unwrap());
        let eta = NumericalSubmeasure::from_fn(&ring, |m| (m.card() as f64).sqrt()).unwrap();
        assert!(check_numerical(&eta, &ring, 1e-9).unwrap().pass);
    }

    #[test]
    fn squared_cardinality_fails_subadditivity() {
        let ring = Ring::powerset(universe3());
        let eta = NumericalSubmeasure::from_fn(&ring, |m| (m.card() as f64).powi(2)).unwrap();
        let r = check_numerical(&eta, &ring, 1e-9).unwrap();
        assert!(!r.pass);
        assert!(!r.subadditive.pass);
        // disjoint singletons witness: 4 > 1 + 1
        let w = r
            .subadditive
            .witnesses
            .iter()
            .find(|w| w.lhs == 4.0 && w.rhs == 2.0)
            .expect("disjoint singleton witness");
        assert_ne!(w.e, w.f);
    }

    #[test]
    fn verdict_is_invariant_under_relabeling() {
        let forms: [fn(SetBits) -> f64; 2] =
            [|m| (m.card() as f64).sqrt(), |m| (m.card() as f64).powi(2)];
        for f in forms {
            let r1 = {
                let ring = Ring::powerset(Universe::named(&["a", "b", "c"]).unwrap());
                let eta = NumericalSubmeasure::from_fn(&ring, f).unwrap();
                check_numerical(&eta, &ring, 1e-9).unwrap().pass
            };
            let r2 = {
                let ring = Ring::powerset(Universe::named(&["z", "q", "m"]).unwrap());
                let eta = NumericalSubmeasure::from_fn(&ring, f).unwrap();
                check_numerical(&eta, &ring, 1e-9).unwrap().pass
            };
            assert_eq!(r1, r2);
        }
    }

    #[test]
    fn missing_table_entry_is_an_input_error() {
        let ring = Ring::powerset(Universe::named(&["a", "b"]).unwrap());
        let partial = [(SetBits::EMPTY, 0.0), (SetBits(0b01), 1.0)];
        assert!(NumericalSubmeasure::from_table(&ring, &partial).is_err());
        assert!(NumericalSubmeasure::from_fn(&ring, |_| -1.0).is_err());
        assert!(NumericalSubmeasure::from_fn(&ring, |_| f64::INFINITY).is_err());
    }
}
