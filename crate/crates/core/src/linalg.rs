//! Exact sparse Gaussian elimination over the rationals.
//!
//! Columns are sparse vectors indexed by an ordered row key. Pivots are
//! chosen as the smallest row key of each reduced column, so results are
//! deterministic for a fixed column order.

use std::collections::BTreeMap;

use crate::scalar::Rational;

pub type SparseVec<R> = BTreeMap<R, Rational>;

fn axpy<K: Ord + Clone>(y: &mut BTreeMap<K, Rational>, a: &Rational, x: &BTreeMap<K, Rational>) {
    for (k, v) in x {
        let entry = y.entry(k.clone()).or_insert_with(Rational::zero);
        *entry += &(a * v);
        if entry.is_zero() {
            y.remove(k);
        }
    }
}

struct Pivot<R> {
    vec: SparseVec<R>,
    /// The pivot vector as a combination of input columns.
    combo: BTreeMap<usize, Rational>,
}

/// Incremental echelon form of a set of columns.
pub struct Echelon<R> {
    pivots: BTreeMap<R, Pivot<R>>,
    columns: usize,
}

impl<R: Ord + Clone> Default for Echelon<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Ord + Clone> Echelon<R> {
    pub fn new() -> Self {
        Echelon {
            pivots: BTreeMap::new(),
            columns: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    /// Reduces `v` against the pivots; returns the remainder and the
    /// combination of columns subtracted.
    fn reduce(&self, mut v: SparseVec<R>) -> (SparseVec<R>, BTreeMap<usize, Rational>) {
        let mut combo = BTreeMap::new();
        let mut floor: Option<R> = None;
        loop {
            let lead = match &floor {
                None => v.keys().next().cloned(),
                Some(f) => v
                    .range((std::ops::Bound::Excluded(f.clone()), std::ops::Bound::Unbounded))
                    .next()
                    .map(|(k, _)| k.clone()),
            };
            let Some(lead) = lead else { break };
            match self.pivots.get(&lead) {
                Some(p) => {
                    let a = -(&v[&lead] / &p.vec[&lead]);
                    axpy(&mut v, &a, &p.vec);
                    axpy(&mut combo, &a, &p.combo);
                }
                None => floor = Some(lead),
            }
        }
        (v, combo)
    }

    /// Adds a column; returns whether it raised the rank.
    pub fn push(&mut self, col: SparseVec<R>) -> bool {
        let index = self.columns;
        self.columns += 1;
        let (v, mut combo) = self.reduce(col);
        let Some(lead) = v.keys().next().cloned() else {
            return false;
        };
        combo.insert(index, Rational::one());
        self.pivots.insert(lead, Pivot { vec: v, combo });
        true
    }

    /// A solution `c` of `Σ c_j col_j = target`, with free variables zero
    /// in the pivot basis, or `None` if `target` is outside the span.
    pub fn solve(&self, target: &SparseVec<R>) -> Option<Vec<Rational>> {
        let (rest, combo) = self.reduce(target.clone());
        if !rest.is_empty() {
            return None;
        }
        let mut x = vec![Rational::zero(); self.columns];
        for (j, c) in combo {
            x[j] = -c;
        }
        Some(x)
    }
}

/// Solves `Σ c_j columns[j] = target` exactly.
pub fn solve<R: Ord + Clone>(columns: Vec<SparseVec<R>>, target: &SparseVec<R>) -> Option<Vec<Rational>> {
    let mut e = Echelon::new();
    for c in columns {
        e.push(c);
    }
    e.solve(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[(u32, i64)]) -> SparseVec<u32> {
        entries.iter().map(|(k, x)| (*k, Rational::int(*x))).collect()
    }

    #[test]
    fn solves_small_system() {
        // columns (1,1) and (1,-1); target (3,1) = 2*c0 + 1*c1
        let cols = vec![v(&[(0, 1), (1, 1)]), v(&[(0, 1), (1, -1)])];
        let x = solve(cols, &v(&[(0, 3), (1, 1)])).unwrap();
        assert_eq!(x, vec![Rational::int(2), Rational::int(1)]);
    }

    #[test]
    fn detects_inconsistency() {
        let cols = vec![v(&[(0, 1), (1, 1)]), v(&[(0, 2), (1, 2)])];
        assert!(solve(cols, &v(&[(0, 1)])).is_none());
    }

    #[test]
    fn dependent_columns_give_valid_solution() {
        let cols = vec![v(&[(0, 2)]), v(&[(0, 4), (1, 1)]), v(&[(1, 3)])];
        let target = v(&[(0, 2), (1, 5)]);
        let x = solve(cols.clone(), &target).unwrap();
        let mut acc = SparseVec::new();
        for (c, col) in x.iter().zip(&cols) {
            axpy(&mut acc, c, col);
        }
        assert_eq!(acc, target);
    }
}
