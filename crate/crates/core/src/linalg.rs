//! Exact Gaussian elimination over Gaussian rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::expr::CRat;

/// Reduce `rows` (each of length `ncols`) to reduced row echelon form in
/// place and return the pivot columns. Pivots are chosen per column as the
/// entry of smallest bit size, ties going to the lowest row.
pub fn rref(rows: &mut Vec<Vec<CRat>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let best = (r..rows.len())
            .filter(|&i| !rows[i][c].is_zero())
            .min_by_key(|&i| (rows[i][c].size(), i));
        let Some(p) = best else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].inv().unwrap();
        for v in rows[r].iter_mut().skip(c) {
            *v = &*v * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (k, pv) in pivot_row.iter().enumerate().skip(c) {
                if !pv.is_zero() {
                    row[k] = &row[k] - &(&f * pv);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Basis of `{v : A v = 0}` in reduced echelon form (leading entries one,
/// ordered by leading column).
pub fn nullspace(rows: &[Vec<CRat>], ncols: usize) -> Vec<Vec<CRat>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![CRat::zero(); ncols];
        v[free] = CRat::one();
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = -&row[free];
        }
        basis.push(v);
    }
    rref(&mut basis, ncols);
    basis
}

/// Solve `A x = b` exactly; `None` when inconsistent. Free variables are
/// set to zero.
pub fn solve(rows: &[Vec<CRat>], b: &[CRat], ncols: usize) -> Option<Vec<CRat>> {
    let mut aug: Vec<Vec<CRat>> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut v = r.clone();
            v.push(bi.clone());
            v
        })
        .collect();
    let pivots = rref(&mut aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![CRat::zero(); ncols];
    for (row, &pc) in aug.iter().zip(&pivots) {
        x[pc] = row[ncols].clone();
    }
    Some(x)
}

/// Scale to integer entries with unit content and a positive leading entry.
pub fn primitive_integer(v: &[CRat]) -> Vec<CRat> {
    let mut den = BigInt::one();
    for c in v {
        den = den.lcm(&c.denom_lcm());
    }
    let scaled: Vec<(BigInt, BigInt)> = v
        .iter()
        .map(|c| {
            let re = &c.re * BigRational::from_integer(den.clone());
            let im = &c.im * BigRational::from_integer(den.clone());
            (re.to_integer(), im.to_integer())
        })
        .collect();
    let mut g = BigInt::zero();
    for (a, b) in &scaled {
        g = g.gcd(a).gcd(b);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    let lead = scaled.iter().find(|(a, b)| !a.is_zero() || !b.is_zero()).unwrap();
    if lead.0.is_negative() || (lead.0.is_zero() && lead.1.is_negative()) {
        g = -g;
    }
    scaled
        .into_iter()
        .map(|(a, b)| CRat::new(BigRational::from_integer(a / &g), BigRational::from_integer(b / &g)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[i64]) -> Vec<CRat> {
        v.iter().map(|&n| CRat::from_int(n)).collect()
    }

    #[test]
    fn nullspace_of_rank_one() {
        let ns = nullspace(&[row(&[1, 2, 3])], 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let dot = v.iter().zip(row(&[1, 2, 3])).fold(CRat::zero(), |acc, (a, b)| &acc + &(a * &b));
            assert!(dot.is_zero());
        }
        assert_eq!(ns[0], vec![CRat::one(), CRat::zero(), CRat::ratio(-1, 3)]);
        assert_eq!(ns[1], vec![CRat::zero(), CRat::one(), CRat::ratio(-2, 3)]);
    }

    #[test]
    fn solve_and_inconsistency() {
        let a = vec![row(&[1, 1]), row(&[1, -1])];
        assert_eq!(solve(&a, &row(&[3, 1]), 2).unwrap(), row(&[2, 1]));
        let b = vec![row(&[1, 1]), row(&[2, 2])];
        assert!(solve(&b, &row(&[1, 3]), 2).is_none());
    }

    #[test]
    fn primitive_scaling() {
        let v = vec![CRat::zero(), CRat::ratio(-1, 2), CRat::ratio(3, 4)];
        assert_eq!(primitive_integer(&v), row(&[0, 2, -3]));
    }
}
