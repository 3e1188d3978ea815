//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use super::Rat;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rat>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (x, p) in r.iter_mut().zip(&pivot_row) {
                *x -= &factor * p;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Basis of `{v : A v = 0}` for the `rows × ncols` matrix `A`, one vector per
/// free column, each normalised so its first nonzero entry is 1.
pub fn nullspace(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free = (0..ncols).filter(|c| !pivots.contains(c));
    free.map(|fc| {
        let mut v = vec![Rat::zero(); ncols];
        v[fc] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][fc].clone();
        }
        normalise(&mut v);
        v
    })
    .collect()
}

pub fn rank(rows: &[Vec<Rat>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

pub(crate) fn normalise(v: &mut [Rat]) {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        let inv = lead.recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter().map(|r| r.iter().map(|&x| Rat::from_integer(x.into())).collect()).collect()
    }

    fn apply(a: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
        a.iter().map(|r| r.iter().zip(v).fold(Rat::zero(), |acc, (x, y)| acc + x * y)).collect()
    }

    #[test]
    fn kernel_of_rank_deficient_matrix() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let k = nullspace(&a, 3);
        assert_eq!(k.len(), 1);
        assert!(apply(&a, &k[0]).iter().all(Zero::is_zero));
        assert_eq!(k[0][0], Rat::one());
        assert_eq!(rank(&a, 3), 2);
    }

    #[test]
    fn full_rank_and_zero_matrices() {
        assert!(nullspace(&m(&[&[1, 0], &[0, 3]]), 2).is_empty());
        assert_eq!(nullspace(&m(&[&[0, 0]]), 2).len(), 2);
        assert_eq!(nullspace(&[], 3).len(), 3);
    }
}
