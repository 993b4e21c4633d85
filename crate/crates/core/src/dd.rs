//! Double-double arithmetic (about 32 significant digits).
//!
//! Canonical polynomials are combined with orthonormal-basis coefficients
//! that reach `1e13` and alternate in sign, so the combinations lose most of
//! their digits in plain `f64`. The table and those combinations are carried
//! in this type and rounded once at the end.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// Exact product of two doubles.
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }

    /// `self * b` with `b` a double.
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = self.lo.mul_add(b, e);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = self.hi.mul_add(b.lo, self.lo.mul_add(b.hi, e));
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        // long division: two correction steps on the f64 quotient
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

/// Inverse of a small dense matrix by Gauss-Jordan elimination with
/// partial pivoting; `None` if a pivot is exactly zero.
pub fn invert(a: &[Vec<Dd>]) -> Option<Vec<Vec<Dd>>> {
    let n = a.len();
    let mut m: Vec<Vec<Dd>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| Dd::from(if i == j { 1.0 } else { 0.0 })));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().hi.total_cmp(&m[y][c].abs().hi))?;
        if m[p][c].is_zero() {
            return None;
        }
        m.swap(c, p);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v = *v / piv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c];
                for k in 0..2 * n {
                    let d = f * m[c][k];
                    m[r][k] = m[r][k] - d;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `a x = b` by Gaussian elimination with full pivoting after
/// scaling rows and columns by powers of two to unit max-norm. Returns `x`
/// and the smallest pivot of the scaled system relative to its largest
/// entry (`0` for an exactly singular matrix).
pub fn solve(a: &[Vec<Dd>], b: &[Dd]) -> (Vec<Dd>, f64) {
    let n = b.len();
    if n == 0 {
        return (Vec::new(), 1.0);
    }
    let pow2 = |x: f64| if x > 0.0 { 2f64.powi(-x.log2().round() as i32) } else { 1.0 };
    let mut m: Vec<Vec<Dd>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut col_scale = vec![1.0; n];
    for _ in 0..2 {
        for (row, r) in m.iter_mut().zip(rhs.iter_mut()) {
            let s = pow2(row.iter().fold(0.0f64, |acc, x| acc.max(x.hi.abs())));
            row.iter_mut().for_each(|x| *x = x.mul_f64(s));
            *r = r.mul_f64(s);
        }
        for c in 0..n {
            let s = pow2(m.iter().fold(0.0f64, |acc, row| acc.max(row[c].hi.abs())));
            m.iter_mut().for_each(|row| row[c] = row[c].mul_f64(s));
            col_scale[c] *= s;
        }
    }
    let amax = m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.hi.abs()));
    if amax == 0.0 {
        return (vec![Dd::ZERO; n], 0.0);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, -1.0);
        for (r, row) in m.iter().enumerate().skip(k) {
            for (c, x) in row.iter().enumerate().skip(k) {
                if x.hi.abs() > best {
                    (pr, pc, best) = (r, c, x.hi.abs());
                }
            }
        }
        min_pivot = min_pivot.min(best / amax);
        if best == 0.0 {
            return (vec![Dd::ZERO; n], 0.0);
        }
        m.swap(k, pr);
        rhs.swap(k, pr);
        for row in m.iter_mut() {
            row.swap(k, pc);
        }
        perm.swap(k, pc);
        let piv = m[k][k];
        for r in (k + 1)..n {
            if m[r][k].is_zero() {
                continue;
            }
            let f = m[r][k] / piv;
            for c in k..n {
                let d = f * m[k][c];
                m[r][c] = m[r][c] - d;
            }
            let d = f * rhs[k];
            rhs[r] = rhs[r] - d;
        }
    }
    let mut y = vec![Dd::ZERO; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for c in (k + 1)..n {
            s = s - m[k][c] * y[c];
        }
        y[k] = s / m[k][k];
    }
    let mut x = vec![Dd::ZERO; n];
    for k in 0..n {
        x[perm[k]] = y[k].mul_f64(col_scale[perm[k]]);
    }
    (x, min_pivot)
}
