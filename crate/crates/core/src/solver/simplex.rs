//! Bounded simplex over the rationals with Bland's rule.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{Budget, SolverError};

pub(crate) type Q = BigRational;

#[derive(Clone, Debug)]
pub(crate) struct Simplex {
    /// `rows[r]` expresses `basic[r]` as a combination of nonbasic variables.
    rows: Vec<Vec<Q>>,
    basic: Vec<usize>,
    row_of: Vec<Option<usize>>,
    lower: Vec<Option<Q>>,
    upper: Vec<Option<Q>>,
    value: Vec<Q>,
    structural: usize,
}

/// One constraint `lo ≤ Σ coeffs ≤ hi` over structural variables.
pub(crate) struct Row {
    pub coeffs: Vec<(usize, BigInt)>,
    pub lo: Option<BigInt>,
    pub hi: Option<BigInt>,
}

impl Simplex {
    pub fn new(structural: usize, rows: &[Row]) -> Simplex {
        let n = structural + rows.len();
        let mut s = Simplex {
            rows: Vec::with_capacity(rows.len()),
            basic: Vec::with_capacity(rows.len()),
            row_of: vec![None; n],
            lower: vec![None; n],
            upper: vec![None; n],
            value: vec![Q::zero(); n],
            structural,
        };
        for (i, r) in rows.iter().enumerate() {
            let slack = structural + i;
            let mut dense = vec![Q::zero(); n];
            for (j, c) in &r.coeffs {
                dense[*j] = Q::from_integer(c.clone());
            }
            s.rows.push(dense);
            s.basic.push(slack);
            s.row_of[slack] = Some(i);
            s.lower[slack] = r.lo.clone().map(Q::from_integer);
            s.upper[slack] = r.hi.clone().map(Q::from_integer);
        }
        s
    }

    pub fn value(&self, j: usize) -> &Q {
        &self.value[j]
    }

    pub fn structural(&self) -> usize {
        self.structural
    }

    pub fn set_lower(&mut self, j: usize, v: Q) {
        self.lower[j] = Some(v.clone());
        if self.row_of[j].is_none() && self.value[j] < v {
            self.update_nonbasic(j, v);
        }
    }

    pub fn set_upper(&mut self, j: usize, v: Q) {
        self.upper[j] = Some(v.clone());
        if self.row_of[j].is_none() && self.value[j] > v {
            self.update_nonbasic(j, v);
        }
    }

    fn update_nonbasic(&mut self, j: usize, v: Q) {
        let delta = &v - &self.value[j];
        for (r, row) in self.rows.iter().enumerate() {
            if !row[j].is_zero() {
                let b = self.basic[r];
                self.value[b] += &row[j] * &delta;
            }
        }
        self.value[j] = v;
    }

    fn below(&self, j: usize) -> bool {
        self.lower[j].as_ref().is_some_and(|l| self.value[j] < *l)
    }

    fn above(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_some_and(|u| self.value[j] > *u)
    }

    fn can_increase(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_none_or(|u| self.value[j] < *u)
    }

    fn can_decrease(&self, j: usize) -> bool {
        self.lower[j].as_ref().is_none_or(|l| self.value[j] > *l)
    }

    /// Find an assignment within all bounds. Returns false if none exists.
    pub fn check(&mut self, budget: &mut Budget) -> Result<bool, SolverError> {
        loop {
            budget.spend(1)?;
            let violated = (0..self.value.len())
                .filter(|&j| self.row_of[j].is_some())
                .find(|&j| self.below(j) || self.above(j));
            let Some(xi) = violated else {
                return Ok(true);
            };
            let r = self.row_of[xi].expect("basic");
            let raise = self.below(xi);
            let target = if raise {
                self.lower[xi].clone().expect("lower bound")
            } else {
                self.upper[xi].clone().expect("upper bound")
            };
            let entering = (0..self.value.len()).find(|&j| {
                let a = &self.rows[r][j];
                if self.row_of[j].is_some() || a.is_zero() {
                    return false;
                }
                if raise == a.is_positive() {
                    self.can_increase(j)
                } else {
                    self.can_decrease(j)
                }
            });
            let Some(xj) = entering else {
                return Ok(false);
            };
            self.pivot_and_update(r, xi, xj, target);
        }
    }

    fn pivot_and_update(&mut self, r: usize, xi: usize, xj: usize, v: Q) {
        let a = self.rows[r][xj].clone();
        let theta = (&v - &self.value[xi]) / &a;
        self.value[xi] = v;
        self.value[xj] += &theta;
        for (k, row) in self.rows.iter().enumerate() {
            if k != r && !row[xj].is_zero() {
                let b = self.basic[k];
                self.value[b] += &row[xj] * &theta;
            }
        }
        self.pivot(r, xi, xj);
    }

    fn pivot(&mut self, r: usize, xi: usize, xj: usize) {
        let a = self.rows[r][xj].clone();
        let mut new_row: Vec<Q> = self.rows[r].iter().map(|c| -c / &a).collect();
        new_row[xj] = Q::zero();
        new_row[xi] = Q::from_integer(BigInt::from(1)) / &a;
        for k in 0..self.rows.len() {
            if k == r {
                continue;
            }
            let c = self.rows[k][xj].clone();
            if c.is_zero() {
                continue;
            }
            let row = &mut self.rows[k];
            row[xj] = Q::zero();
            for (l, nl) in new_row.iter().enumerate() {
                if !nl.is_zero() {
                    row[l] += &c * nl;
                }
            }
        }
        self.rows[r] = new_row;
        self.basic[r] = xj;
        self.row_of[xj] = Some(r);
        self.row_of[xi] = None;
    }
}
