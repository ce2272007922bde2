//! Exhaustive ground truth over all `2^n` sensor sets.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::LogDetObjective;
use crate::system::SensorSet;

/// Largest `n` accepted by [`enumerate_all`].
pub const MAX_ORACLE_N: usize = 20;
/// Slack for the exhaustive monotonicity and supermodularity checks.
pub const PROPERTY_SLACK: f64 = 1e-9;

/// Log-det error of every subset, indexed by bitmask (bit `i` = 0-based sensor `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    n: usize,
    values: Vec<f64>,
}

/// A failed diminishing-returns inequality
/// `h(S) - h(S ∪ {a}) >= h(S') - h(S' ∪ {a})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupermodularityViolation {
    pub subset: u64,
    pub superset: u64,
    pub element: usize,
    /// Amount by which the inequality fails.
    pub excess: f64,
}

/// A failed `h(S ∪ {a}) <= h(S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityViolation {
    pub set: u64,
    pub element: usize,
    pub excess: f64,
}

/// Evaluates every subset in ascending bitmask order.
pub fn enumerate_all(obj: &LogDetObjective) -> Result<OracleTable> {
    let n = obj.n();
    if n > MAX_ORACLE_N {
        return Err(Error::TooLarge { n, cap: MAX_ORACLE_N });
    }
    let values = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| obj.value(&SensorSet::from_mask(mask)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(OracleTable { n, values })
}

impl OracleTable {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1usize << n {
            return Err(Error::DimensionMismatch(format!("table has {} entries, expected 2^{n}", values.len())));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn get(&self, set: &SensorSet) -> f64 {
        self.value(set.mask())
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.values.iter().enumerate().map(|(m, &v)| (m as u64, v))
    }

    /// Minimum-cardinality subset with value `<= budget`; smallest bitmask among equals.
    pub fn optimal_p1(&self, budget: f64) -> Result<SensorSet> {
        self.iter()
            .filter(|&(_, v)| v <= budget)
            .min_by_key(|&(m, _)| (m.count_ones(), m))
            .map(|(m, _)| SensorSet::from_mask(m))
            .ok_or(Error::Infeasible(budget))
    }

    /// Value-minimizing subset with at most `r` sensors; smallest bitmask among equals.
    pub fn optimal_p2(&self, r: usize) -> SensorSet {
        self.best_by(|m| m.count_ones() as usize <= r)
    }

    /// Value-minimizing subset with exactly `r` sensors.
    pub fn optimal_exact(&self, r: usize) -> SensorSet {
        self.best_by(|m| m.count_ones() as usize == r)
    }

    fn best_by(&self, admissible: impl Fn(u64) -> bool) -> SensorSet {
        let (mask, _) = self.iter().filter(|&(m, _)| admissible(m)).fold((u64::MAX, f64::INFINITY), |best, (m, v)| {
            if v < best.1 {
                (m, v)
            } else {
                best
            }
        });
        SensorSet::from_mask(if mask == u64::MAX { 0 } else { mask })
    }

    /// Checks every `(S ⊆ S', a ∉ S')` triple.
    pub fn verify_supermodularity(&self) -> Vec<SupermodularityViolation> {
        let full = (1u64 << self.n) - 1;
        (0..=full)
            .into_par_iter()
            .flat_map_iter(|sup| {
                let mut out = Vec::new();
                for a in (0..self.n).filter(|a| sup >> a & 1 == 0) {
                    let bit = 1u64 << a;
                    let drop_sup = self.value(sup) - self.value(sup | bit);
                    // Enumerate submasks of `sup`.
                    let mut sub = sup;
                    loop {
                        let drop_sub = self.value(sub) - self.value(sub | bit);
                        let excess = drop_sup - drop_sub;
                        if excess > PROPERTY_SLACK {
                            out.push(SupermodularityViolation { subset: sub, superset: sup, element: a, excess });
                        }
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & sup;
                    }
                }
                out
            })
            .collect()
    }

    /// Checks `h(S ∪ {a}) <= h(S)` for every `S` and `a ∉ S`.
    pub fn verify_monotonicity(&self) -> Vec<MonotonicityViolation> {
        let mut out = Vec::new();
        for (set, v) in self.iter() {
            for a in (0..self.n).filter(|a| set >> a & 1 == 0) {
                let excess = self.value(set | 1 << a) - v;
                if excess > PROPERTY_SLACK {
                    out.push(MonotonicityViolation { set, element: a, excess });
                }
            }
        }
        out
    }

    /// `bitmask,logdet` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bitmask,logdet\n");
        for (m, v) in self.iter() {
            s.push_str(&format!("{m},{}\n", crate::format::sig12(v)));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::integrator_chain;
    use crate::system::LtvSystem;
    use nalgebra::DMatrix;

    #[test]
    fn single_state_table() {
        let s = LtvSystem::with_identity_covariances(DMatrix::from_element(1, 1, 0.5), 0).unwrap();
        let obj = LogDetObjective::new(&s).unwrap();
        let t = enumerate_all(&obj).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.value(0).abs() < 1e-15);
        assert!((t.value(1) - 0.5f64.ln()).abs() < 1e-14);
        assert!(t.verify_supermodularity().is_empty());
    }

    #[test]
    fn chain_table() {
        let s = LtvSystem::with_identity_covariances(integrator_chain(5), 5).unwrap();
        let t = enumerate_all(&LogDetObjective::new(&s).unwrap()).unwrap();
        assert_eq!(t.len(), 32);
        assert!((t.value(31) + 31.0).abs() < 0.5);
        assert!(t.verify_supermodularity().is_empty());
        assert!(t.verify_monotonicity().is_empty());

        assert_eq!(t.optimal_p2(2).one_based(), vec![3, 5]);
        assert_eq!(t.optimal_p2(0), SensorSet::empty());
        assert_eq!(t.optimal_p2(5), SensorSet::full(5));

        let budget = t.get(&SensorSet::from_one_based(&[2, 4], 5).unwrap());
        assert_eq!(t.optimal_p1(budget).unwrap().len(), 2);
        assert_eq!(t.optimal_p1(t.value(0)).unwrap(), SensorSet::empty());
        assert!(matches!(t.optimal_p1(t.value(31) - 1.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn oversize_rejected() {
        let s = LtvSystem::with_identity_covariances(DMatrix::identity(21, 21) * 0.5, 0).unwrap();
        let err = enumerate_all(&LogDetObjective::new(&s).unwrap()).unwrap_err();
        assert_eq!(err, Error::TooLarge { n: 21, cap: 20 });
    }

    #[test]
    fn detects_planted_violation() {
        // h(∅)=0, h({1})=-1, h({2})=-1, h({1,2})=-3: the second sensor helps more later.
        let t = OracleTable::from_values(2, vec![0.0, -1.0, -1.0, -3.0]).unwrap();
        assert!(!t.verify_supermodularity().is_empty());
        let m = OracleTable::from_values(1, vec![0.0, 1.0]).unwrap();
        assert_eq!(m.verify_monotonicity().len(), 1);
    }

    #[test]
    fn csv_header() {
        let t = OracleTable::from_values(1, vec![0.0, -0.5]).unwrap();
        assert_eq!(t.to_csv(), "bitmask,logdet\n0,0.0\n1,-0.5\n");
    }
}
