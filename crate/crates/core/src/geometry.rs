//! Rotation algebra: frames as rotation matrices, unit quaternions,
//! geodesics on S³, Rodrigues rotations and rotation means.
//!
//! A [`Rotation`] stores a frame column-wise: the first column is the
//! tangent `t`, the second the major-axis direction, the third the
//! minor-axis direction. Quaternions are kept in canonical sign
//! (`w ≥ 0`, or the first nonzero component positive when `w = 0`), so
//! `q` and `-q` compare equal after construction.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector2, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on ‖RᵀR − I‖ and |det R − 1|.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Tolerance on |‖q‖ − 1|.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Cutoff for antipodal vectors and near-π geodesics.
pub const ANTIPODAL_TOL: f64 = 1e-8;
/// Relative gap below which the leading eigenvalue of the quaternion
/// scatter matrix is considered repeated.
pub const EIGEN_GAP_TOL: f64 = 1e-10;

/// Axis tolerance used by [`rotate_about_axis`].
const AXIS_NORM_TOL: f64 = 1e-9;

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// An element of SO(3); columns are the frame axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Checks orthonormality and orientation before wrapping `m`.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let err = (m.transpose() * m - Matrix3::identity()).amax();
        if !err.is_finite() || err > ORTHONORMAL_TOL {
            return Err(Error::Validation(format!(
                "matrix is not orthonormal (max |RᵀR − I| = {err:e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::Validation(format!(
                "matrix is not a proper rotation (det = {det})"
            )));
        }
        Ok(Rotation(m))
    }

    /// Wraps `m` without checks. Callers guarantee `m ∈ SO(3)`.
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    /// Builds a frame from its three axes.
    pub fn from_columns(t: Vec3, a: Vec3, b: Vec3) -> Result<Self> {
        Rotation::new(Matrix3::from_columns(&[t, a, b]))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn column(&self, i: usize) -> Vec3 {
        self.0.column(i).into_owned()
    }

    /// Tangent axis (first column).
    pub fn tangent(&self) -> Vec3 {
        self.column(0)
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Largest absolute entry-wise difference to `other`.
    pub fn max_abs_diff(&self, other: &Rotation) -> f64 {
        (self.0 - other.0).amax()
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

/// A unit quaternion `(w, x, y, z)` in canonical sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes and canonicalizes `(w, x, y, z)`.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector4::new(w, x, y, z);
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::Validation("quaternion has zero or non-finite norm".into()));
        }
        Ok(Self::from_vector_raw(v / norm).canonical())
    }

    /// Accepts `(w, x, y, z)` only if it is already unit within [`UNIT_NORM_TOL`].
    pub fn from_unit(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = Vector4::new(w, x, y, z).norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::Validation(format!("quaternion norm {norm} is not 1")));
        }
        Ok(UnitQuaternion { w, x, y, z }.canonical())
    }

    fn from_vector_raw(v: Vector4<f64>) -> Self {
        UnitQuaternion {
            w: v[0],
            x: v[1],
            y: v[2],
            z: v[3],
        }
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.w, self.x, self.y, self.z)
    }

    pub fn dot(&self, other: &UnitQuaternion) -> f64 {
        self.to_vector().dot(&other.to_vector())
    }

    pub fn neg(&self) -> UnitQuaternion {
        UnitQuaternion {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Representative with `w ≥ 0`; when `w` vanishes the first nonzero
    /// imaginary component is made positive.
    pub fn canonical(&self) -> UnitQuaternion {
        const ZERO: f64 = 1e-15;
        let flip = if self.w.abs() > ZERO {
            self.w < 0.0
        } else {
            [self.x, self.y, self.z]
                .into_iter()
                .find(|c| c.abs() > ZERO)
                .is_some_and(|c| c < 0.0)
        };
        if flip {
            self.neg()
        } else {
            *self
        }
    }
}

/// Converts a rotation matrix to its canonical unit quaternion (Shepperd's method).
pub fn quat_from_rotation(r: &Rotation) -> Result<UnitQuaternion> {
    let r = Rotation::new(*r.matrix())?;
    let m = r.matrix();
    let trace = m.trace();
    let (w, x, y, z);
    if trace > m[(0, 0)] && trace > m[(1, 1)] && trace > m[(2, 2)] {
        let s = 2.0 * (1.0 + trace).sqrt();
        w = 0.25 * s;
        x = (m[(2, 1)] - m[(1, 2)]) / s;
        y = (m[(0, 2)] - m[(2, 0)]) / s;
        z = (m[(1, 0)] - m[(0, 1)]) / s;
    } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
        let s = 2.0 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
        w = (m[(2, 1)] - m[(1, 2)]) / s;
        x = 0.25 * s;
        y = (m[(0, 1)] + m[(1, 0)]) / s;
        z = (m[(0, 2)] + m[(2, 0)]) / s;
    } else if m[(1, 1)] >= m[(2, 2)] {
        let s = 2.0 * (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt();
        w = (m[(0, 2)] - m[(2, 0)]) / s;
        x = (m[(0, 1)] + m[(1, 0)]) / s;
        y = 0.25 * s;
        z = (m[(1, 2)] + m[(2, 1)]) / s;
    } else {
        let s = 2.0 * (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt();
        w = (m[(1, 0)] - m[(0, 1)]) / s;
        x = (m[(0, 2)] + m[(2, 0)]) / s;
        y = (m[(1, 2)] + m[(2, 1)]) / s;
        z = 0.25 * s;
    }
    UnitQuaternion::new(w, x, y, z)
}

pub fn rotation_from_quat(q: &UnitQuaternion) -> Rotation {
    let UnitQuaternion { w, x, y, z } = *q;
    let m = Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    );
    Rotation::from_matrix_unchecked(m)
}

/// Returns `q` or `-q`, whichever has a nonnegative inner product with `reference`.
pub fn align_sign(reference: &UnitQuaternion, q: &UnitQuaternion) -> UnitQuaternion {
    if reference.dot(q) < 0.0 {
        q.neg()
    } else {
        *q
    }
}

/// Angle between `p` and `q` on S³ after sign alignment, in `[0, π/2]`.
///
/// Evaluated as `atan2(‖q − (p·q)p‖, |p·q|)`, which equals
/// `arccos(|p·q|)` but stays accurate for nearby points.
pub fn geodesic_distance(p: &UnitQuaternion, q: &UnitQuaternion) -> f64 {
    let p = p.to_vector();
    let q = q.to_vector();
    let c = p.dot(&q);
    let q = if c < 0.0 { -q } else { q };
    let c = c.abs().min(1.0);
    let s = (q - p * c).norm();
    s.atan2(c)
}

/// Great-circle interpolation from `p` (γ = 0) to `q` (γ = 1).
pub fn slerp(p: &UnitQuaternion, q: &UnitQuaternion, gamma: f64) -> Result<UnitQuaternion> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("interpolation parameter {gamma} outside [0, 1]")));
    }
    let pv = p.to_vector();
    let qv = align_sign(p, q).to_vector();
    let xi = geodesic_distance(p, q);
    if xi == 0.0 {
        return Ok(*p);
    }
    if (std::f64::consts::PI - xi).abs() < ANTIPODAL_TOL {
        return Err(Error::Degenerate(
            "geodesic between antipodal quaternions is undefined".into(),
        ));
    }
    let s = xi.sin();
    let v = pv * ((xi * (1.0 - gamma)).sin() / s) + qv * ((xi * gamma).sin() / s);
    UnitQuaternion::new(v[0], v[1], v[2], v[3])
}

/// Skew-symmetric cross-product matrix `[t]×`.
pub fn cross_matrix(t: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0)
}

/// Right-handed rotation by `theta` about the unit axis `t`:
/// `I + sinθ [t]× + (1 − cosθ)(t tᵀ − I)`.
pub fn rotate_about_axis(t: &Vec3, theta: f64) -> Result<Rotation> {
    let norm = t.norm();
    if (norm - 1.0).abs() > AXIS_NORM_TOL {
        return Err(Error::Validation(format!("rotation axis has norm {norm}, expected 1")));
    }
    let m = Matrix3::identity()
        + cross_matrix(t) * theta.sin()
        + (t * t.transpose() - Matrix3::identity()) * (1.0 - theta.cos());
    Ok(Rotation::from_matrix_unchecked(m))
}

/// Smallest rotation carrying the unit vector `from` onto `to`.
pub fn minimal_rotation(from: &Vec3, to: &Vec3) -> Result<Rotation> {
    for (name, v) in [("from", from), ("to", to)] {
        if (v.norm() - 1.0).abs() > AXIS_NORM_TOL {
            return Err(Error::Validation(format!("`{name}` is not a unit vector")));
        }
    }
    let axis = from.cross(to);
    let s = axis.norm();
    let c = from.dot(to);
    if c < 0.0 && s < ANTIPODAL_TOL {
        return Err(Error::Degenerate(
            "antipodal vectors: minimal rotation axis is undefined".into(),
        ));
    }
    if s == 0.0 {
        return Ok(Rotation::identity());
    }
    rotate_about_axis(&(axis / s), s.atan2(c))
}

/// Riemannian log map on S³ at `base`; `q` must already be sign-aligned.
fn sphere_log(base: &Vector4<f64>, q: &Vector4<f64>) -> Vector4<f64> {
    let c = base.dot(q);
    let w = q - base * c;
    let s = w.norm();
    if s < 1e-300 {
        return Vector4::zeros();
    }
    w * (s.atan2(c) / s)
}

fn sphere_exp(base: &Vector4<f64>, v: &Vector4<f64>) -> Vector4<f64> {
    let t = v.norm();
    if t < 1e-300 {
        return *base;
    }
    (base * t.cos() + v * (t.sin() / t)).normalize()
}

/// Fréchet mean of rotations given as unit quaternions.
///
/// The principal eigenvector of `Σ qⱼqⱼᵀ` (signs aligned to the first
/// sample) seeds a fixed-point Karcher iteration that minimizes
/// `Σ d_g(μ, qⱼ)²`. The result is invariant to per-sample sign flips.
pub fn frechet_mean_rotations(qs: &[UnitQuaternion]) -> Result<UnitQuaternion> {
    let first = qs
        .first()
        .ok_or_else(|| Error::Empty("rotation mean of an empty list".into()))?;
    let aligned: Vec<Vector4<f64>> = qs.iter().map(|q| align_sign(first, q).to_vector()).collect();

    let mut scatter = Matrix4::<f64>::zeros();
    for q in &aligned {
        scatter += q * q.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let (l0, l1) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if l0 - l1 <= EIGEN_GAP_TOL * l0.abs().max(1.0) {
        return Err(Error::Degenerate(format!(
            "rotation mean is ambiguous: leading eigenvalues {l0} and {l1} coincide"
        )));
    }
    let mut mu: Vector4<f64> = eig.eigenvectors.column(order[0]).into_owned().normalize();

    let m = aligned.len() as f64;
    for _ in 0..200 {
        let mut step = Vector4::zeros();
        for q in &aligned {
            let q = if mu.dot(q) < 0.0 { -q } else { *q };
            step += sphere_log(&mu, &q);
        }
        step /= m;
        mu = sphere_exp(&mu, &step);
        if step.norm() < 1e-15 {
            break;
        }
    }
    UnitQuaternion::new(mu[0], mu[1], mu[2], mu[3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn e(i: usize) -> Vec3 {
        let mut v = Vec3::zeros();
        v[i] = 1.0;
        v
    }

    fn random_unit(rng: &mut impl Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    fn random_quat(rng: &mut impl Rng) -> UnitQuaternion {
        loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = Vector4::from(v).norm();
            if n > 0.1 && n <= 1.0 {
                return UnitQuaternion::new(v[0], v[1], v[2], v[3]).unwrap();
            }
        }
    }

    #[test]
    fn identity_quaternion() {
        let q = quat_from_rotation(&Rotation::identity()).unwrap();
        assert_eq!(q, UnitQuaternion::IDENTITY);
    }

    #[test]
    fn half_turn_about_z() {
        let r = rotate_about_axis(&e(2), PI).unwrap();
        let q = quat_from_rotation(&r).unwrap();
        assert_relative_eq!(q.to_vector(), Vector4::new(0.0, 0.0, 0.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn quaternion_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let r = rotation_from_quat(&random_quat(&mut rng));
            let back = rotation_from_quat(&quat_from_rotation(&r).unwrap());
            assert!(back.max_abs_diff(&r) < 1e-10);
            let q = quat_from_rotation(&r).unwrap();
            assert!(q.w >= 0.0);
        }
    }

    #[test]
    fn rejects_non_orthonormal() {
        let m = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(matches!(Rotation::new(m), Err(Error::Validation(_))));
        let reflection = Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(Rotation::new(reflection).is_err());
    }

    #[test]
    fn geodesic_distance_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = random_quat(&mut rng);
        assert_eq!(geodesic_distance(&q, &q), 0.0);
        assert_eq!(geodesic_distance(&q, &q.neg()), 0.0);
        let p = UnitQuaternion::IDENTITY;
        let r = UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(geodesic_distance(&p, &r), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn geodesic_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, b, c) = (random_quat(&mut rng), random_quat(&mut rng), random_quat(&mut rng));
            let ab = geodesic_distance(&a, &b);
            let bc = geodesic_distance(&b, &c);
            let ac = geodesic_distance(&a, &c);
            assert!(ac <= ab + bc + 1e-12);
            assert_relative_eq!(ab, geodesic_distance(&b, &a), epsilon = 1e-15);
        }
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let p = UnitQuaternion::IDENTITY;
        let q = UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(slerp(&p, &q, 0.0).unwrap(), p);
        assert_relative_eq!(slerp(&p, &q, 1.0).unwrap().to_vector(), q.to_vector(), epsilon = 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(
            slerp(&p, &q, 0.5).unwrap().to_vector(),
            Vector4::new(h, h, 0.0, 0.0),
            epsilon = 1e-15
        );
        assert_eq!(slerp(&p, &p, 0.3).unwrap(), p);
        assert!(slerp(&p, &q, 1.5).is_err());
    }

    #[test]
    fn slerp_constant_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let p = random_quat(&mut rng);
            let q = random_quat(&mut rng);
            let g: f64 = rng.gen();
            let s = slerp(&p, &q, g).unwrap();
            assert_relative_eq!(
                geodesic_distance(&s, &p),
                g * geodesic_distance(&p, &q),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn rodrigues_right_hand_rule() {
        let r = rotate_about_axis(&e(0), FRAC_PI_2).unwrap();
        assert_relative_eq!(r.apply(&e(1)), e(2), epsilon = 1e-15);
        assert!(rotate_about_axis(&Vec3::new(1.0, 1.0, 0.0), 0.3).is_err());
    }

    #[test]
    fn rodrigues_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let t = random_unit(&mut rng);
            let a = rng.gen_range(-PI..PI);
            let b = rng.gen_range(-PI..PI);
            assert!(rotate_about_axis(&t, 0.0).unwrap().max_abs_diff(&Rotation::identity()) < 1e-15);
            let r = rotate_about_axis(&t, a).unwrap();
            assert_relative_eq!(r.apply(&t), t, epsilon = 1e-12);
            let composed = r * rotate_about_axis(&t, b).unwrap();
            assert!(composed.max_abs_diff(&rotate_about_axis(&t, a + b).unwrap()) < 1e-10);
            assert!(Rotation::new(*r.matrix()).is_ok());
        }
    }

    #[test]
    fn minimal_rotation_cases() {
        assert_eq!(minimal_rotation(&e(0), &e(0)).unwrap(), Rotation::identity());
        let r = minimal_rotation(&e(0), &e(1)).unwrap();
        let expected = rotate_about_axis(&e(2), FRAC_PI_2).unwrap();
        assert!(r.max_abs_diff(&expected) < 1e-15);
        assert!(matches!(minimal_rotation(&e(0), &(-e(0))), Err(Error::Degenerate(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let a = random_unit(&mut rng);
            let b = random_unit(&mut rng);
            if a.dot(&b) < -0.99 {
                continue;
            }
            let r = minimal_rotation(&a, &b).unwrap();
            assert_relative_eq!(r.apply(&a), b, epsilon = 1e-12);
            // the common normal is left untouched
            let n = a.cross(&b).normalize();
            assert_relative_eq!(r.apply(&n), n, epsilon = 1e-12);
        }
    }

    #[test]
    fn frechet_mean_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = random_quat(&mut rng);
        let m = frechet_mean_rotations(&[q, q, q]).unwrap();
        assert!(geodesic_distance(&m, &q) < 1e-12);
        let m = frechet_mean_rotations(&[q, q.neg()]).unwrap();
        assert!(geodesic_distance(&m, &q) < 1e-12);
        assert!(matches!(frechet_mean_rotations(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn frechet_mean_of_identity_and_quarter_turn() {
        let a = UnitQuaternion::IDENTITY;
        let b = quat_from_rotation(&rotate_about_axis(&e(2), FRAC_PI_2).unwrap()).unwrap();
        let m = frechet_mean_rotations(&[a, b]).unwrap();
        let expected = quat_from_rotation(&rotate_about_axis(&e(2), FRAC_PI_4).unwrap()).unwrap();
        assert!(geodesic_distance(&m, &expected) < 1e-12);
    }

    #[test]
    fn frechet_mean_ambiguous() {
        // two orthogonal quaternions: the scatter matrix has a doubled top eigenvalue
        let a = UnitQuaternion::IDENTITY;
        let b = UnitQuaternion::new(0.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(frechet_mean_rotations(&[a, b]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn frechet_mean_sign_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = random_quat(&mut rng);
        let qs: Vec<_> = (0..5)
            .map(|_| {
                let axis = random_unit(&mut rng);
                let r = rotation_from_quat(&base) * rotate_about_axis(&axis, rng.gen_range(0.0..0.5)).unwrap();
                quat_from_rotation(&r).unwrap()
            })
            .collect();
        let flipped: Vec<_> = qs
            .iter()
            .enumerate()
            .map(|(i, q)| if i % 2 == 1 { q.neg() } else { *q })
            .collect();
        let a = frechet_mean_rotations(&qs).unwrap();
        let b = frechet_mean_rotations(&flipped).unwrap();
        assert!(geodesic_distance(&a, &b) < 1e-12);
        assert!(a.w >= 0.0);
    }
}
