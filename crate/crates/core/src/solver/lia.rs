//! Integer feasibility of conjunctions of linear constraints.
//!
//! Equalities are eliminated first by unimodular substitution, then the
//! remaining inequalities go to simplex with branch and bound.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::simplex::{Row, Simplex, Q};
use super::{Budget, SolverError};

/// `Σ coeffs[i]·x_i + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct LinExpr {
    pub coeffs: BTreeMap<usize, BigInt>,
    pub constant: BigInt,
}

impl LinExpr {
    pub fn var(i: usize) -> LinExpr {
        let mut e = LinExpr::default();
        e.coeffs.insert(i, BigInt::one());
        e
    }

    pub fn constant(c: BigInt) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn add_scaled(&mut self, o: &LinExpr, k: &BigInt) {
        self.constant += &o.constant * k;
        for (v, c) in &o.coeffs {
            let e = self.coeffs.entry(*v).or_insert_with(BigInt::zero);
            *e += c * k;
            if e.is_zero() {
                self.coeffs.remove(v);
            }
        }
    }

    pub fn negated(&self) -> LinExpr {
        let mut e = LinExpr::default();
        e.add_scaled(self, &BigInt::from(-1));
        e
    }

    fn substitute(&mut self, v: usize, def: &LinExpr) {
        if let Some(c) = self.coeffs.remove(&v) {
            self.add_scaled(def, &c);
        }
    }

    pub fn eval(&self, vals: &[BigInt]) -> BigInt {
        let mut s = self.constant.clone();
        for (v, c) in &self.coeffs {
            s += c * &vals[*v];
        }
        s
    }
}

/// A model for the constraints `e ≤ 0`, over variables `0..nvars`.
pub(crate) fn feasible(
    constraints: &[LinExpr],
    nvars: usize,
    budget: &mut Budget,
) -> Result<Option<Vec<BigInt>>, SolverError> {
    let mut cons: Vec<LinExpr> = constraints.to_vec();
    let mut next_var = nvars;
    let mut defs: Vec<(usize, LinExpr)> = Vec::new();

    let rows = loop {
        budget.spend(1)?;
        let Some(groups) = group(&cons) else {
            return Ok(None);
        };
        let eq = groups
            .iter()
            .find(|(_, (lo, hi))| lo.is_some() && lo == hi)
            .map(|(q, (lo, _))| (q.clone(), lo.clone().expect("bound")));
        let Some((q, rhs)) = eq else {
            break groups;
        };
        // q·x = rhs, with gcd(q) = 1 after grouping.
        let (v, def) = match q.iter().find(|(_, c)| c.abs().is_one()) {
            Some((i, ci)) => {
                let mut def = LinExpr::constant(ci * &rhs);
                for (j, cj) in &q {
                    if j != i {
                        def.coeffs.insert(*j, -(ci * cj));
                    }
                }
                (*i, def)
            }
            None => {
                let (i, a) = q
                    .iter()
                    .min_by(|x, y| x.1.abs().cmp(&y.1.abs()))
                    .map(|(i, a)| (*i, a.clone()))
                    .expect("nonconstant equality");
                let sigma = next_var;
                next_var += 1;
                let mut def = LinExpr::var(sigma);
                for (j, cj) in &q {
                    if *j != i {
                        def.coeffs.insert(*j, -cj.div_floor(&a));
                    }
                }
                (i, def)
            }
        };
        for c in cons.iter_mut() {
            c.substitute(v, &def);
        }
        for (_, d) in defs.iter_mut() {
            d.substitute(v, &def);
        }
        defs.push((v, def));
    };

    let mut present: Vec<usize> = rows
        .keys()
        .flat_map(|q| q.keys().copied())
        .collect();
    present.sort_unstable();
    present.dedup();
    let index: BTreeMap<usize, usize> = present.iter().enumerate().map(|(d, v)| (*v, d)).collect();
    let simplex_rows: Vec<Row> = rows
        .into_iter()
        .map(|(q, (lo, hi))| Row {
            coeffs: q.into_iter().map(|(v, c)| (index[&v], c)).collect(),
            lo,
            hi,
        })
        .collect();
    let simplex = Simplex::new(present.len(), &simplex_rows);
    let Some(sol) = branch_and_bound(simplex, budget)? else {
        return Ok(None);
    };
    let mut vals = vec![BigInt::zero(); next_var];
    for (d, v) in present.iter().enumerate() {
        vals[*v] = sol[d].clone();
    }
    for (v, def) in defs.iter() {
        vals[*v] = def.eval(&vals);
    }
    vals.truncate(nvars);
    Ok(Some(vals))
}

type Groups = BTreeMap<BTreeMap<usize, BigInt>, (Option<BigInt>, Option<BigInt>)>;

/// Merge constraints by their primitive coefficient vector into
/// `lo ≤ q·x ≤ hi` rows. `None` if some row is empty or a constant fails.
fn group(cons: &[LinExpr]) -> Option<Groups> {
    let mut groups: Groups = BTreeMap::new();
    for c in cons {
        if c.coeffs.is_empty() {
            if c.constant.is_positive() {
                return None;
            }
            continue;
        }
        let g = c.coeffs.values().fold(BigInt::zero(), |g, x| g.gcd(x));
        let lead_neg = c.coeffs.values().next().is_some_and(|x| x.is_negative());
        let sg = if lead_neg { -&g } else { g.clone() };
        let q: BTreeMap<usize, BigInt> = c.coeffs.iter().map(|(v, x)| (*v, x / &sg)).collect();
        // q·x·sg + k ≤ 0
        let entry = groups.entry(q).or_insert((None, None));
        if lead_neg {
            // -|g|·q·x + k ≤ 0  ⇒  q·x ≥ ceil(k/|g|)
            let lo = c.constant.div_ceil(&g);
            if entry.0.as_ref().is_none_or(|l| lo > *l) {
                entry.0 = Some(lo);
            }
        } else {
            // g·q·x + k ≤ 0  ⇒  q·x ≤ floor(-k/g)
            let hi = (-&c.constant).div_floor(&g);
            if entry.1.as_ref().is_none_or(|h| hi < *h) {
                entry.1 = Some(hi);
            }
        }
        if let (Some(lo), Some(hi)) = (&entry.0, &entry.1) {
            if lo > hi {
                return None;
            }
        }
    }
    Some(groups)
}

fn branch_and_bound(mut s: Simplex, budget: &mut Budget) -> Result<Option<Vec<BigInt>>, SolverError> {
    budget.spend(1)?;
    if !s.check(budget)? {
        return Ok(None);
    }
    let frac = (0..s.structural()).find(|&j| !s.value(j).is_integer());
    let Some(j) = frac else {
        return Ok(Some(
            (0..s.structural())
                .map(|j| s.value(j).to_integer())
                .collect(),
        ));
    };
    let f = s.value(j).floor();
    let mut down = s.clone();
    down.set_upper(j, f.clone());
    if let Some(m) = branch_and_bound(down, budget)? {
        return Ok(Some(m));
    }
    s.set_lower(j, f + Q::one());
    branch_and_bound(s, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(coeffs: &[(usize, i64)], k: i64) -> LinExpr {
        LinExpr {
            coeffs: coeffs.iter().map(|(v, c)| (*v, BigInt::from(*c))).collect(),
            constant: BigInt::from(k),
        }
    }

    fn solve(cons: &[LinExpr], n: usize) -> Option<Vec<BigInt>> {
        feasible(cons, n, &mut Budget::new(100_000)).unwrap()
    }

    fn holds(cons: &[LinExpr], m: &[BigInt]) -> bool {
        cons.iter().all(|c| !c.eval(m).is_positive())
    }

    #[test]
    fn rational_but_not_integer() {
        // 1 ≤ 2x ≤ 1
        let cons = [e(&[(0, 2)], -1), e(&[(0, -2)], 1)];
        assert!(solve(&cons, 1).is_none());
        // 2x + 2y = 1 via two inequalities, with x, y otherwise free
        let cons = [e(&[(0, 2), (1, 2)], -1), e(&[(0, -2), (1, -2)], 1)];
        assert!(solve(&cons, 2).is_none());
    }

    #[test]
    fn non_unit_equality() {
        // 3x + 5y = 7, 0 ≤ x ≤ 10
        let cons = [
            e(&[(0, 3), (1, 5)], -7),
            e(&[(0, -3), (1, -5)], 7),
            e(&[(0, -1)], 0),
            e(&[(0, 1)], -10),
        ];
        let m = solve(&cons, 2).expect("sat");
        assert!(holds(&cons, &m), "{m:?}");
    }

    #[test]
    fn branch_and_bound_finds_lattice_point() {
        // 2x - 2y ≥ 1 is x - y ≥ 1 over integers; with x + y ≤ 3, x ≥ 0, y ≥ 0
        let cons = [
            e(&[(0, -2), (1, 2)], 1),
            e(&[(0, 1), (1, 1)], -3),
            e(&[(0, -1)], 0),
            e(&[(1, -1)], 0),
            e(&[(0, 3), (1, -3)], -2),
        ];
        let m = solve(&cons, 2);
        assert!(m.is_none() || holds(&cons, m.as_ref().unwrap()));
        let cons = [e(&[(0, 4), (1, 6)], -9), e(&[(0, -4), (1, -6)], 7)];
        let m = solve(&cons, 2).expect("4x+6y=8 is solvable");
        assert!(holds(&cons, &m));
    }

    #[test]
    fn contradictory_bounds() {
        let cons = [e(&[(0, 1)], -1), e(&[(0, -1)], 2)];
        assert!(solve(&cons, 1).is_none());
    }
}
