//! Dense Gaussian elimination over a tower field.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::{Fe, FieldTower};

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref(t: &FieldTower, mut rows: Vec<Vec<Fe>>) -> (Vec<Vec<Fe>>, Vec<usize>) {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(found) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, found);
        let inv = t.inv(rows[r][col]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = t.mul(*x, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x = t.sub(*x, t.mul(f, y));
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(t: &FieldTower, rows: Vec<Vec<Fe>>) -> usize {
    rref(t, rows).1.len()
}

/// Basis of {v : M v = 0} for a matrix with `ncols` columns.
pub fn nullspace(t: &FieldTower, rows: Vec<Vec<Fe>>, ncols: usize) -> Vec<Vec<Fe>> {
    let (red, pivots) = rref(t, rows);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Fe::ZERO; ncols];
        v[free] = Fe::ONE;
        for (row, &pc) in red.iter().zip(&pivots) {
            v[pc] = t.neg(row[free]);
        }
        out.push(v);
    }
    out
}

pub fn det(t: &FieldTower, mut m: Vec<Vec<Fe>>) -> Fe {
    let n = m.len();
    let mut acc = Fe::ONE;
    for col in 0..n {
        let Some(found) = (col..n).find(|&i| !m[i][col].is_zero()) else {
            return Fe::ZERO;
        };
        if found != col {
            m.swap(found, col);
            acc = t.neg(acc);
        }
        let piv = m[col][col];
        acc = t.mul(acc, piv);
        let inv = t.inv(piv).expect("pivot is nonzero");
        for i in col + 1..n {
            if m[i][col].is_zero() {
                continue;
            }
            let f = t.mul(m[i][col], inv);
            for j in col..n {
                let v = t.mul(f, m[col][j]);
                m[i][j] = t.sub(m[i][j], v);
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_is_annihilated() {
        let t = FieldTower::new(3, 1, 2).unwrap();
        let g = t.generator();
        let rows = vec![
            vec![Fe::ONE, g, Fe::ZERO, t.mul(g, g)],
            vec![g, Fe::ONE, Fe::ONE, Fe::ZERO],
        ];
        let ns = nullspace(&t, rows.clone(), 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for r in &rows {
                let s = r.iter().zip(v).fold(Fe::ZERO, |a, (&x, &y)| t.add(a, t.mul(x, y)));
                assert!(s.is_zero());
            }
        }
    }
}
