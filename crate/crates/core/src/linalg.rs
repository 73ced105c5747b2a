//! Small dense linear algebra over the rationals.

use num_traits::{One, Zero};

use nalgebra::{DMatrix, DVector};

use crate::scalar::{ratio_to_f64, Rational};

pub type RatMatrix = Vec<Vec<Rational>>;

/// Reduces `rows` to reduced row echelon form in place and returns the pivot
/// columns. Pivots are searched among the first `ncols` columns; any further
/// (augmented) columns are carried along. Zero rows are dropped.
pub fn rref(rows: &mut RatMatrix, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][col];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for j in col..rows[r].len() {
                    let delta = &factor * &rows[r][j];
                    rows[i][j] -= delta;
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
    pivots
}

pub fn rank(m: &RatMatrix, ncols: usize) -> usize {
    let mut a = m.clone();
    rref(&mut a, ncols).len()
}

/// Basis of `{x : M x = 0}` for an `m × ncols` matrix, one vector per free
/// column, returned in reduced echelon form.
pub fn null_space(m: &RatMatrix, ncols: usize) -> RatMatrix {
    let mut a = m.clone();
    let pivots = rref(&mut a, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis: RatMatrix = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &pc) in a.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect();
    rref(&mut basis, ncols);
    basis
}

/// Basis of `{y : yᵀ M = 0}`.
pub fn left_null_space(m: &RatMatrix, nrows: usize, ncols: usize) -> RatMatrix {
    let transposed: RatMatrix = (0..ncols)
        .map(|j| (0..nrows).map(|i| m[i][j].clone()).collect())
        .collect();
    null_space(&transposed, nrows)
}

/// Solves the square system `A x = b`; `None` when `A` is singular.
pub fn solve(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    let mut aug: RatMatrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if pivots.len() < n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

/// Squared norm of the component of `w` in the span of the (independent)
/// rows of `basis`: `‖P w‖² = (Bw)ᵀ (B Bᵀ)⁻¹ (Bw)`.
pub fn projected_norm_sq(basis: &RatMatrix, w: &[Rational]) -> Rational {
    if basis.is_empty() {
        return Rational::zero();
    }
    let dot = |a: &[Rational], b: &[Rational]| -> Rational {
        a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
    };
    let bw: Vec<Rational> = basis.iter().map(|r| dot(r, w)).collect();
    if bw.iter().all(Zero::is_zero) {
        return Rational::zero();
    }
    let gram: RatMatrix = basis
        .iter()
        .map(|ri| basis.iter().map(|rj| dot(ri, rj)).collect())
        .collect();
    let x = solve(&gram, &bw).expect("basis rows are independent");
    dot(&bw, &x)
}

/// `‖w − P w‖²` where `P` projects onto the column space of `m`, whose exact
/// rank is known. Uses a column-pivoted QR in double precision.
pub fn lstsq_residual_sq(m: &RatMatrix, rank: usize, w: &[f64]) -> f64 {
    let nrows = w.len();
    let ncols = m.first().map_or(0, Vec::len);
    if rank == 0 || ncols == 0 {
        return w.iter().map(|x| x * x).sum();
    }
    let a = DMatrix::from_fn(nrows, ncols, |i, j| ratio_to_f64(&m[i][j]));
    let q = a.col_piv_qr().q();
    let q = q.columns(0, rank);
    let wv = DVector::from_column_slice(w);
    let proj = q * (q.transpose() * &wv);
    (wv - proj).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn mat(rows: &[&[i64]]) -> RatMatrix {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn null_space_of_rank_deficient_matrix() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = null_space(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &m {
                let s = row.iter().zip(v).fold(Rational::zero(), |a, (x, y)| a + x * y);
                assert!(s.is_zero());
            }
        }
        assert_eq!(rank(&m, 3), 1);
    }

    #[test]
    fn left_null_space_of_triplet_system() {
        // columns e_A + e_B, e_B + e_C, e_A - e_C
        let m = mat(&[&[1, 0, 1], &[1, 1, 0], &[0, 1, -1]]);
        let ln = left_null_space(&m, 3, 3);
        assert_eq!(ln, vec![vec![int(1), int(-1), int(1)]]);
    }

    #[test]
    fn projection_norm() {
        let basis = vec![vec![int(1), int(1)]];
        let w = vec![int(1), int(0)];
        assert_eq!(projected_norm_sq(&basis, &w), rat(1, 2));
    }

    #[test]
    fn float_least_squares_residual() {
        let m = mat(&[&[1, 0, 1], &[1, 1, 0], &[0, 1, -1]]);
        let w = [1.0, 0.0, 1.0];
        // residual is the projection onto (1, -1, 1) / √3
        let r = lstsq_residual_sq(&m, 2, &w);
        assert!((r - 4.0 / 3.0).abs() < 1e-14, "{r}");
        let consistent = [1.0, 1.0, 0.0];
        assert!(lstsq_residual_sq(&m, 2, &consistent) < 1e-28);
    }

    #[test]
    fn singular_solve() {
        assert!(solve(&mat(&[&[1, 1], &[1, 1]]), &[int(1), int(2)]).is_none());
        assert_eq!(
            solve(&mat(&[&[2, 0], &[0, 4]]), &[int(1), int(1)]),
            Some(vec![rat(1, 2), rat(1, 4)])
        );
        assert_eq!(
            solve(&mat(&[&[1, 1, 0], &[1, -1, 2], &[0, 3, 1]]), &[int(3), int(3), int(4)]),
            Some(vec![int(2), int(1), int(1)])
        );
    }

    #[test]
    fn projection_onto_skew_basis() {
        // span{(1, 1, 0), (1, 2, 1)} has normal (1, −1, 1)
        let basis = mat(&[&[1, 1, 0], &[1, 2, 1]]);
        let w = [int(1), int(0), int(0)];
        assert_eq!(projected_norm_sq(&basis, &w), rat(2, 3));
    }
}
