//! Exact rational linear algebra: null spaces and a phase-one simplex for
//! feasibility of `A x = b, x >= 0`. Also finds simplest rationals in
//! intervals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type Q = BigRational;

pub(crate) fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Basis of the right null space of `m` (rows of equal length `cols`).
pub(crate) fn null_space(m: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let mut a: Vec<Vec<Q>> = m.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..a.len() {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot = a[row].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Scales a rational vector to coprime integers, keeping signs.
pub(crate) fn to_coprime_integers(v: &[Q]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Finds `x >= 0` with `a x = b`, or `None` if infeasible. Phase-one
/// simplex with Bland's rule on exact rationals.
pub(crate) fn feasible_nonnegative(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    for i in 0..m {
        let neg = b[i].is_negative();
        let mut row: Vec<Q> = Vec::with_capacity(width);
        row.extend(
            a[i].iter()
                .take(n)
                .map(|x| if neg { -x.clone() } else { x.clone() }),
        );
        for k in 0..m {
            row.push(if k == i { Q::one() } else { Q::zero() });
        }
        row.push(if neg { -b[i].clone() } else { b[i].clone() });
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of "minimise the sum of artificials".
    let mut cost: Vec<Q> = vec![Q::zero(); width];
    for c in &mut cost[n..n + m] {
        *c = Q::one();
    }
    for row in &t {
        for (c, x) in cost.iter_mut().zip(row) {
            *c -= x;
        }
    }
    while let Some(enter) = (0..n + m).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (pr, _) = leave.expect("phase-one objective is bounded below");
        let inv = t[pr][enter].recip();
        for x in t[pr].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = t[pr].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != pr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for j in 0..width {
                    row[j] -= &f * &pivot_row[j];
                }
            }
        }
        let f = cost[enter].clone();
        for j in 0..width {
            cost[j] -= &f * &pivot_row[j];
        }
        basis[pr] = enter;
    }
    let mut x = vec![Q::zero(); n + m];
    for (i, &bj) in basis.iter().enumerate() {
        x[bj] = t[i][width - 1].clone();
    }
    if x[n..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    x.truncate(n);
    Some(x)
}

/// One end of an interval of the rational line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Bound {
    pub value: Q,
    pub strict: bool,
}

impl Bound {
    fn admits_above(&self, x: &Q) -> bool {
        if self.strict {
            *x > self.value
        } else {
            *x >= self.value
        }
    }

    fn admits_below(&self, x: &Q) -> bool {
        if self.strict {
            *x < self.value
        } else {
            *x <= self.value
        }
    }
}

/// The rational with the smallest denominator (then the smallest value)
/// inside the interval, or `None` when the interval is empty.
pub(crate) fn simplest_in(lower: &Bound, upper: Option<&Bound>) -> Option<Q> {
    if let Some(u) = upper {
        let empty = if lower.strict || u.strict {
            lower.value >= u.value
        } else {
            lower.value > u.value
        };
        if empty {
            return None;
        }
    }
    let mut den = BigInt::one();
    loop {
        let d = Q::from_integer(den.clone());
        // Smallest numerator p with p/den admitted by the lower bound.
        let scaled = &lower.value * &d;
        let mut p = scaled.floor().to_integer();
        while !lower.admits_above(&Q::new(p.clone(), den.clone())) {
            p += 1;
        }
        let cand = Q::new(p, den.clone());
        if upper.is_none_or(|u| u.admits_below(&cand)) {
            return Some(cand);
        }
        den += 1;
    }
}
