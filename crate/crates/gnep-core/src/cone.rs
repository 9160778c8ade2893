//! Polyhedral-cone triviality and extreme-ray enumeration for the small
//! homogeneous systems that arise in the regularity checks and the LCP
//! solvability certificate.
//!
//! Every cone here has the shape {z : Az = 0, Bz ≥ 0}. Dimensions in scope
//! are tiny (a few dozen unknowns, enumeration dimension ≤ ~12), so instead
//! of embedding an LP solver we restrict to the null space of A and
//! enumerate candidate extreme rays from (d−1)-row active sets.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative eigenvalue cutoff (on AᵀA, i.e. squared singular values) for the
/// numerical rank decision.
const NULL_EIG_REL_TOL: f64 = 1e-14;

/// Sign-feasibility slack for normalized (‖v‖_∞ = 1) ray candidates.
const RAY_FEAS_TOL: f64 = 1e-10;

/// Orthonormal basis of the null space of `a` (columns). For a 0-row matrix
/// this is the identity.
pub(crate) fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return DMatrix::identity(n, n);
    }
    let ata = a.transpose() * a;
    let eig = SymmetricEigen::new(ata);
    let max_ev = eig.eigenvalues.amax().max(1.0);
    let tol = max_ev * NULL_EIG_REL_TOL;
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= tol)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Visit every subset of {0..n} of size k. `f` returns false to stop early.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        // advance to the next lexicographic combination
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Candidate extreme rays of the pointed cone {v : Bv ≥ 0} in R^d (caller
/// guarantees null(B) = {0}). Returns normalized (‖v‖_∞ = 1) feasible
/// candidates; the zero cone yields an empty list.
pub(crate) fn pointed_cone_rays(b: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let d = b.ncols();
    let r = b.nrows();
    let mut rays = Vec::new();
    if d == 0 {
        return rays;
    }
    let feas_tol = RAY_FEAS_TOL * b.amax().max(1.0);
    let push_if_feasible = |v: &DVector<f64>, rays: &mut Vec<DVector<f64>>| {
        let scale = v.amax();
        if scale <= 0.0 {
            return;
        }
        let v = v / scale;
        for sign in [1.0, -1.0] {
            let cand = sign * &v;
            let bv = b * &cand;
            if bv.iter().all(|&t| t >= -feas_tol)
                && !rays.iter().any(|r2: &DVector<f64>| (r2 - &cand).amax() <= 1e-8)
            {
                rays.push(cand);
            }
        }
    };
    if d == 1 {
        let v = DVector::from_element(1, 1.0);
        push_if_feasible(&v, &mut rays);
        return rays;
    }
    for_each_combination(r, d - 1, |subset| {
        let mut bt = DMatrix::zeros(d - 1, d);
        for (row, &i) in subset.iter().enumerate() {
            bt.row_mut(row).copy_from(&b.row(i));
        }
        let ns = null_space(&bt);
        if ns.ncols() == 1 {
            let v = ns.column(0).into_owned();
            push_if_feasible(&v, &mut rays);
        }
        true
    });
    rays
}

/// Decide whether {z : Az = 0, Bz ≥ 0} = {0}. Returns `None` when trivial,
/// otherwise a nonzero ray witnessing nontriviality (satisfying all
/// constraints up to the feasibility slack).
pub(crate) fn cone_nontrivial_ray(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DVector<f64>> {
    assert_eq!(a.ncols(), b.ncols(), "equality/inequality column mismatch");
    let basis = null_space(a);
    let d = basis.ncols();
    if d == 0 {
        return None;
    }
    let b_red = b * &basis;
    // Rows that vanish on the null space impose nothing.
    let row_tol = 1e-12 * b_red.amax().max(1.0);
    let kept: Vec<usize> = (0..b_red.nrows())
        .filter(|&i| b_red.row(i).amax() > row_tol)
        .collect();
    if kept.is_empty() {
        return Some(basis.column(0).into_owned());
    }
    let mut b_kept = DMatrix::zeros(kept.len(), d);
    for (row, &i) in kept.iter().enumerate() {
        b_kept.row_mut(row).copy_from(&b_red.row(i));
    }
    // A line inside the cone: v with B̃v = 0.
    let lineality = null_space(&b_kept);
    if lineality.ncols() > 0 {
        return Some(&basis * lineality.column(0));
    }
    let rays = pointed_cone_rays(&b_kept);
    rays.first().map(|v| &basis * v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_rank_equalities_give_trivial_cone() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 1.0]);
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert!(cone_nontrivial_ray(&a, &b).is_none());
    }

    #[test]
    fn known_ray_is_exhibited() {
        // z1 = z2, z1 >= 0: the ray (1,1).
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let ray = cone_nontrivial_ray(&a, &b).expect("nontrivial");
        assert!(ray.amax() > 0.0);
        assert!((a * &ray).amax() <= 1e-10);
        assert!((b * &ray)[0] >= -1e-10);
    }

    #[test]
    fn opposing_inequalities_pin_to_zero() {
        // v1 >= 0, -v1 >= 0, v2 >= 0, -v2 >= 0 in R^2.
        let a = DMatrix::zeros(0, 2);
        let b = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        assert!(cone_nontrivial_ray(&a, &b).is_none());
    }

    #[test]
    fn low_dimensional_face_ray_found() {
        // v1 = 0 forced by +-rows, v2 free nonnegative.
        let a = DMatrix::zeros(0, 2);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0]);
        let ray = cone_nontrivial_ray(&a, &b).expect("nontrivial");
        assert!(ray[0].abs() <= 1e-10);
        assert!(ray[1].abs() > 1e-6);
    }

    #[test]
    fn orthant_rays_enumerated() {
        let b = DMatrix::identity(3, 3);
        let rays = pointed_cone_rays(&b);
        assert_eq!(rays.len(), 3);
        for ray in &rays {
            assert!(ray.iter().all(|&t| t >= -1e-10));
            assert!((ray.amax() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn null_space_of_wide_matrix() {
        // 1x3 row: null space has dimension 2 despite the thin shape.
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let ns = null_space(&a);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).amax() <= 1e-10);
    }
}
