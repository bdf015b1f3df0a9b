//! Small dense linear algebra: 3-vectors, 3x3 matrices, least-squares
//! solves for the modest design matrices used by the regression models,
//! and an analytic 3x3 eigendecomposition for sensor sharpening.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative ridge used to stabilize normal equations: eps = RIDGE_RELATIVE * trace(F'F) / d.
pub const RIDGE_RELATIVE: f64 = 1e-8;

/// Iterative-refinement rounds against the unridged normal equations.
/// Each round shrinks the ridge bias by a factor eps/lambda_min, so a few
/// rounds recover the exact least-squares solution on well-posed systems.
const REFINE_STEPS: usize = 3;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

pub fn dot3<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3<T: Scalar>(v: &Vec3<T>) -> T {
    dot3(v, v).sqrt()
}

/// Unit-l2 normalization. Errors on the zero vector.
pub fn normalize3<T: Scalar>(v: &Vec3<T>) -> Result<Vec3<T>> {
    let n = norm3(v);
    if n <= T::zero() || !n.is_finite() {
        return Err(Error::Validation(
            "cannot normalize zero or non-finite vector".into(),
        ));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

pub fn mat3_identity<T: Scalar>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

pub fn mat3_vec<T: Scalar>(m: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    [dot3(&m[0], v), dot3(&m[1], v), dot3(&m[2], v)]
}

pub fn mat3_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        }
    }
    out
}

pub fn mat3_transpose<T: Scalar>(m: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = m[c][r];
        }
    }
    out
}

pub fn mat3_det<T: Scalar>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse via the adjugate. Errors when the determinant vanishes.
pub fn mat3_inverse<T: Scalar>(m: &Mat3<T>) -> Result<Mat3<T>> {
    let det = mat3_det(m);
    if det.abs() <= T::epsilon() * T::cast(1e-3) || !det.is_finite() {
        return Err(Error::RankDeficient("3x3 matrix is singular".into()));
    }
    let inv_det = T::one() / det;
    let mut out = [[T::zero(); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            // cofactor of (c, r), transposed placement
            let (r1, r2) = match c {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c1, c2) = match r {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
            let sign = if (r + c) % 2 == 0 { T::one() } else { -T::one() };
            out[r][c] = sign * minor * inv_det;
        }
    }
    Ok(out)
}

pub fn mat3_frobenius<T: Scalar>(m: &Mat3<T>) -> T {
    let mut s = T::zero();
    for row in m {
        for &v in row {
            s += v * v;
        }
    }
    s.sqrt()
}

// ---------------------------------------------------------------------------
// Dense LU for the small normal-equation systems (d <= a few dozen).
// ---------------------------------------------------------------------------

struct Lu<T> {
    n: usize,
    a: Vec<T>,
    piv: Vec<usize>,
}

fn lu_factor<T: Scalar>(n: usize, mut a: Vec<T>) -> Result<Lu<T>> {
    let mut piv: Vec<usize> = (0..n).collect();
    let scale = a
        .iter()
        .fold(T::zero(), |acc, &v| if v.abs() > acc { v.abs() } else { acc });
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for r in (k + 1)..n {
            let v = a[r * n + k].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best <= scale * T::epsilon() || !best.is_finite() {
            return Err(Error::RankDeficient(format!(
                "pivot {k} of {n}x{n} system vanished"
            )));
        }
        if p != k {
            piv.swap(k, p);
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
        }
        let pivot = a[k * n + k];
        for r in (k + 1)..n {
            let factor = a[r * n + k] / pivot;
            a[r * n + k] = factor;
            for c in (k + 1)..n {
                let delta = factor * a[k * n + c];
                a[r * n + c] -= delta;
            }
        }
    }
    Ok(Lu { n, a, piv })
}

impl<T: Scalar> Lu<T> {
    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for r in 1..n {
            for c in 0..r {
                let delta = self.a[r * n + c] * x[c];
                x[r] -= delta;
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                let delta = self.a[r * n + c] * x[c];
                x[r] -= delta;
            }
        }
        for r in 0..n {
            x[r] /= self.a[r * n + r];
        }
        x
    }
}

/// Solve min_X ||F X - Y||_F for X (d x 3) given F (n x d) and Y (n x 3).
///
/// Ridge-regularized normal equations (eps = [`RIDGE_RELATIVE`] * trace(F'F)/d)
/// followed by iterative refinement against the unridged system, so the
/// result matches the exact least-squares solution on well-conditioned data
/// while staying stable on nearly collinear designs.
pub fn lms_solve<T: Scalar>(rows: &[Vec<T>], targets: &[[T; 3]]) -> Result<Vec<[T; 3]>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Underdetermined("no training rows".into()));
    }
    if targets.len() != n {
        return Err(Error::Validation(format!(
            "feature rows ({n}) and targets ({}) differ in length",
            targets.len()
        )));
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::Validation("zero-length feature rows".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Validation(format!(
                "feature row {i} has length {} (expected {d})",
                row.len()
            )));
        }
    }

    // Gram matrix G = F'F and right-hand side B = F'Y.
    let mut gram = vec![T::zero(); d * d];
    let mut rhs = vec![[T::zero(); 3]; d];
    for (row, t) in rows.iter().zip(targets) {
        for i in 0..d {
            let fi = row[i];
            for j in i..d {
                gram[i * d + j] += fi * row[j];
            }
            for k in 0..3 {
                rhs[i][k] += fi * t[k];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            gram[i * d + j] = gram[j * d + i];
        }
    }

    let trace = (0..d).map(|i| gram[i * d + i]).sum::<T>();
    let ridge = trace / T::cast(d as f64) * T::cast(RIDGE_RELATIVE);
    let mut ridged = gram.clone();
    for i in 0..d {
        ridged[i * d + i] += ridge;
    }
    let lu = lu_factor(d, ridged)?;

    let mut x = vec![[T::zero(); 3]; d];
    for k in 0..3 {
        let b: Vec<T> = rhs.iter().map(|r| r[k]).collect();
        let mut col = lu.solve(&b);
        for _ in 0..REFINE_STEPS {
            // residual of the *unridged* system: r = B - G x
            let mut resid = b.clone();
            for i in 0..d {
                for j in 0..d {
                    let delta = gram[i * d + j] * col[j];
                    resid[i] -= delta;
                }
            }
            let update = lu.solve(&resid);
            for i in 0..d {
                col[i] += update[i];
            }
        }
        for i in 0..d {
            x[i][k] = col[i];
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Analytic symmetric 3x3 eigenvalues and condition number (f64 workspace).
// ---------------------------------------------------------------------------

/// Eigenvalues of a symmetric 3x3 matrix, descending.
pub fn sym3_eigenvalues(a: &Mat3<f64>) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0f64; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            b[r][c] = (a[r][c] - if r == c { q } else { 0.0 }) / p;
        }
    }
    let r = (mat3_det(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut d = [e1, e2, e3];
    d.sort_by(|x, y| y.partial_cmp(x).unwrap());
    d
}

/// 2-norm condition number via the singular values of a 3x3 matrix.
/// Returns infinity for singular input.
pub fn cond3(m: &Mat3<f64>) -> f64 {
    let mt = mat3_transpose(m);
    let mtm = mat3_mul(&mt, m);
    let eig = sym3_eigenvalues(&mtm);
    let floor = eig[0].abs() * 1e-300;
    if eig[2] <= floor || eig[0] <= 0.0 {
        return f64::INFINITY;
    }
    (eig[0] / eig[2]).sqrt()
}

// ---------------------------------------------------------------------------
// General real 3x3 eigendecomposition (f64 workspace).
// ---------------------------------------------------------------------------

/// Real eigendecomposition of a general 3x3 matrix.
///
/// Returns eigenvalues (descending) and the matrix whose *columns* are the
/// matching eigenvectors (unit norm). Errors when the spectrum has a complex
/// pair or the matrix is defective (not diagonalizable over the reals).
pub fn eigen3_real(m: &Mat3<f64>) -> Result<([f64; 3], Mat3<f64>)> {
    let c2 = m[0][0] + m[1][1] + m[2][2];
    let c1 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let c0 = mat3_det(m);

    // depressed cubic t^3 + p t + q with lambda = t + c2/3
    let p = c1 - c2 * c2 / 3.0;
    let q = -2.0 * c2.powi(3) / 27.0 + c1 * c2 / 3.0 - c0;

    let scale = mat3_frobenius(m).max(1.0);
    let disc = 4.0 * p.powi(3) + 27.0 * q * q;
    if disc > 1e-9 * scale.powi(6) {
        return Err(Error::NoRealSharpening(
            "matrix has a complex eigenvalue pair".into(),
        ));
    }

    let shift = c2 / 3.0;
    let mut eig = if p.abs() <= 1e-12 * scale * scale && q.abs() <= 1e-18 * scale.powi(3) {
        [shift; 3]
    } else if p >= 0.0 {
        // disc <= 0 with p >= 0 only happens at the degenerate boundary
        [shift; 3]
    } else {
        let a = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (a * p)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        [
            shift + a * phi.cos(),
            shift + a * (phi - two_pi_3).cos(),
            shift + a * (phi - 2.0 * two_pi_3).cos(),
        ]
    };
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());

    // Group (numerically) repeated eigenvalues and pull null-space bases.
    let eq_tol = 1e-7 * scale;
    let mut vectors: Vec<Vec3<f64>> = Vec::with_capacity(3);
    let mut i = 0;
    while i < 3 {
        let mut j = i + 1;
        while j < 3 && (eig[j] - eig[i]).abs() <= eq_tol {
            j += 1;
        }
        let multiplicity = j - i;
        let basis = null_space_basis(m, eig[i], scale)?;
        if basis.len() < multiplicity {
            return Err(Error::NoRealSharpening(format!(
                "eigenvalue {:.6} is defective (multiplicity {} > null space {})",
                eig[i],
                multiplicity,
                basis.len()
            )));
        }
        vectors.extend_from_slice(&basis[..multiplicity]);
        i = j;
    }

    let mut p_mat = [[0.0f64; 3]; 3];
    for (c, v) in vectors.iter().enumerate() {
        for r in 0..3 {
            p_mat[r][c] = v[r];
        }
    }
    Ok((eig, p_mat))
}

fn cross3(a: &Vec3<f64>, b: &Vec3<f64>) -> Vec3<f64> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal basis of the null space of (M - lambda I), sized by numeric rank.
fn null_space_basis(m: &Mat3<f64>, lambda: f64, scale: f64) -> Result<Vec<Vec3<f64>>> {
    let mut b = *m;
    for k in 0..3 {
        b[k][k] -= lambda;
    }
    let rows = [b[0], b[1], b[2]];
    let tol = 1e-7 * scale;

    let crosses = [
        cross3(&rows[0], &rows[1]),
        cross3(&rows[0], &rows[2]),
        cross3(&rows[1], &rows[2]),
    ];
    let best = crosses
        .iter()
        .max_by(|a, b| norm3(a).partial_cmp(&norm3(b)).unwrap())
        .unwrap();
    if norm3(best) > tol * tol {
        // rank 2: one-dimensional null space
        return Ok(vec![normalize3(best)?]);
    }

    let longest = rows
        .iter()
        .max_by(|a, b| norm3(a).partial_cmp(&norm3(b)).unwrap())
        .unwrap();
    if norm3(longest) > tol {
        // rank 1: null space is the plane orthogonal to the surviving row
        let r = normalize3(longest)?;
        let axis = pick_least_aligned_axis(&r);
        let d = dot3(&axis, &r);
        let v1 = normalize3(&[axis[0] - d * r[0], axis[1] - d * r[1], axis[2] - d * r[2]])?;
        let v2 = cross3(&r, &v1);
        return Ok(vec![v1, v2]);
    }

    // rank 0: every vector is an eigenvector; use the standard basis
    Ok(vec![
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
}

fn pick_least_aligned_axis(r: &Vec3<f64>) -> Vec3<f64> {
    let abs = [r[0].abs(), r[1].abs(), r[2].abs()];
    let mut idx = 0;
    if abs[1] < abs[idx] {
        idx = 1;
    }
    if abs[2] < abs[idx] {
        idx = 2;
    }
    let mut axis = [0.0; 3];
    axis[idx] = 1.0;
    axis
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lms_recovers_exact_linear_map() {
        // targets constructed from a known coefficient matrix
        let l0 = [[0.3, -0.2, 1.1], [0.7, 0.4, -0.5], [0.1, 0.9, 0.2], [-0.4, 0.6, 0.8]];
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        let mut v = 0.13f64;
        for _ in 0..40 {
            let row: Vec<f64> = (0..4)
                .map(|_| {
                    v = (v * 97.31).fract();
                    v * 2.0 - 0.5
                })
                .collect();
            let mut t = [0.0f64; 3];
            for k in 0..3 {
                for (j, l) in l0.iter().enumerate() {
                    t[k] += row[j] * l[k];
                }
            }
            rows.push(row);
            targets.push(t);
        }
        let x = lms_solve(&rows, &targets).unwrap();
        for i in 0..4 {
            for k in 0..3 {
                assert_relative_eq!(x[i][k], l0[i][k], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn lms_identity_design_returns_targets() {
        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let targets = [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]];
        let x = lms_solve(&rows, &targets).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                assert_relative_eq!(x[i][k], targets[i][k], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn lms_rejects_empty() {
        assert!(matches!(
            lms_solve::<f64>(&[], &[]),
            Err(Error::Underdetermined(_))
        ));
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = [[2.0, 1.0, 0.5], [-0.3, 1.5, 0.2], [0.1, -0.7, 3.0]];
        let inv = mat3_inverse(&m).unwrap();
        let prod = mat3_mul(&inv, &m);
        let id = mat3_identity::<f64>();
        for r in 0..3 {
            for c in 0..3 {
                assert_relative_eq!(prod[r][c], id[r][c], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sym3_eigenvalues_diagonal() {
        let d = sym3_eigenvalues(&[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(d, [3.0, 2.0, 1.0]);
    }

    #[test]
    fn cond3_identity_is_one() {
        assert_relative_eq!(cond3(&mat3_identity()), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn cond3_singular_is_infinite() {
        let m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(cond3(&m).is_infinite());
    }

    #[test]
    fn eigen3_identity_gives_standard_basis() {
        let (eig, p) = eigen3_real(&mat3_identity()).unwrap();
        assert_eq!(eig, [1.0, 1.0, 1.0]);
        for r in 0..3 {
            for c in 0..3 {
                assert_relative_eq!(p[r][c], if r == c { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn eigen3_distinct_diagonal() {
        let m = [[5.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]];
        let (eig, p) = eigen3_real(&m).unwrap();
        assert_relative_eq!(eig[0], 5.0, epsilon = 1e-12);
        assert_relative_eq!(eig[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(eig[2], -1.0, epsilon = 1e-12);
        // eigenvector for 5.0 is +-e0, for 2.0 is +-e2, for -1.0 is +-e1
        assert_relative_eq!(p[0][0].abs(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(p[2][1].abs(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(p[1][2].abs(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn eigen3_reconstructs_general_matrix() {
        // P D P^-1 with a hand-picked well-conditioned P
        let p_true = [[1.0, 0.3, -0.2], [0.1, 1.0, 0.4], [-0.3, 0.2, 1.0]];
        let d_true = [[4.0, 0.0, 0.0], [0.0, 1.5, 0.0], [0.0, 0.0, -0.5]];
        let m = mat3_mul(&mat3_mul(&p_true, &d_true), &mat3_inverse(&p_true).unwrap());
        let (eig, p) = eigen3_real(&m).unwrap();
        assert_relative_eq!(eig[0], 4.0, epsilon = 1e-9);
        assert_relative_eq!(eig[1], 1.5, epsilon = 1e-9);
        assert_relative_eq!(eig[2], -0.5, epsilon = 1e-9);
        // M v = lambda v for each recovered column
        for (k, &lambda) in eig.iter().enumerate() {
            let v = [p[0][k], p[1][k], p[2][k]];
            let mv = mat3_vec(&m, &v);
            for r in 0..3 {
                assert_relative_eq!(mv[r], lambda * v[r], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn eigen3_rejects_rotation() {
        // rotation by 90 degrees in the xy plane has a complex pair
        let m = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            eigen3_real(&m),
            Err(Error::NoRealSharpening(_))
        ));
    }
}
