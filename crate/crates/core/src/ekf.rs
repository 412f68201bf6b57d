//! Continuous-discrete extended Kalman filter over the vehicle pose and the
//! positions of dropped landmarks, plus the position-uncertainty metrics.

use nalgebra::{DMatrix, DVector, Dyn, Matrix2, Matrix3, OMatrix, Vector2, Vector3, U3};
use serde::{Deserialize, Serialize};

use crate::error::{param, NavError, Result};
use crate::geometry::Point;
use crate::vehicle::{
    control_jacobian, state_jacobian, vehicle_derivative, wrap_angle, ControlInput, NoiseParams, VehicleState,
};

/// Eigenvalue floor below which a covariance is considered indefinite.
pub const PSD_TOL: f64 = 1e-9;
/// Innovation variances below this are treated as informationless.
const MIN_INNOVATION_VAR: f64 = 1e-18;
/// Predicted ranges below this make the measurement gradient singular.
const MIN_PREDICTED_RANGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LandmarkId {
    /// First landmark known exactly at the start.
    KnownA,
    /// Second landmark known exactly at the start.
    KnownB,
    /// Landmark dropped during the mission, numbered in drop order.
    Dropped(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeMeasurement {
    pub id: LandmarkId,
    pub range: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub id: usize,
    pub drop_time: f64,
}

/// Filter mean and covariance. The state vector is `[x, y, psi]` followed by
/// one `(x, y)` pair per registered dropped landmark.
#[derive(Debug, Clone)]
pub struct EkfState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    known: [Point; 2],
    registry: Vec<RegistryEntry>,
    next_id: usize,
    noise: NoiseParams,
}

/// Smallest eigenvalue of a symmetric 2x2 matrix.
fn min_eig2(m: &Matrix2<f64>) -> f64 {
    let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let d = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    half_tr - (d * d + m[(0, 1)] * m[(0, 1)]).sqrt()
}

fn check_psd3(m: &Matrix3<f64>) -> Result<()> {
    if (m - m.transpose()).amax() > PSD_TOL {
        return Err(NavError::NotPsd("initial covariance is not symmetric".into()));
    }
    let eig = m.symmetric_eigenvalues();
    if eig.min() < -PSD_TOL || eig.iter().any(|e| !e.is_finite()) {
        return Err(NavError::NotPsd(format!(
            "initial covariance has eigenvalue {}",
            eig.min()
        )));
    }
    Ok(())
}

fn check_psd2(m: &Matrix2<f64>, what: &str) -> Result<()> {
    if (m[(0, 1)] - m[(1, 0)]).abs() > PSD_TOL || min_eig2(m) < -PSD_TOL || !m.iter().all(|v| v.is_finite()) {
        return Err(NavError::NotPsd(format!("{what} is not symmetric PSD")));
    }
    Ok(())
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

impl EkfState {
    pub fn init(pose: VehicleState, pose_cov: Matrix3<f64>, known: [Point; 2], noise: NoiseParams) -> Result<Self> {
        check_psd3(&pose_cov)?;
        noise.validate()?;
        if (known[0] - known[1]).norm() <= 1e-9 {
            return Err(param("known_landmarks", "the two known landmarks coincide"));
        }
        let mut cov = DMatrix::zeros(3, 3);
        cov.copy_from(&pose_cov);
        Ok(EkfState {
            mean: DVector::from_column_slice(&[pose.x, pose.y, pose.psi]),
            cov,
            known,
            registry: Vec::new(),
            next_id: 0,
            noise,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn noise(&self) -> &NoiseParams {
        &self.noise
    }

    pub fn known_landmarks(&self) -> &[Point; 2] {
        &self.known
    }

    pub fn registry(&self) -> &[RegistryEntry] {
        &self.registry
    }

    pub fn pose(&self) -> VehicleState {
        VehicleState::new(self.mean[0], self.mean[1], self.mean[2])
    }

    /// Vehicle position block of the covariance.
    pub fn position_cov(&self) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(0, 0).into_owned()
    }

    fn slot(&self, id: usize) -> Option<usize> {
        self.registry
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|k| 3 + 2 * k)
    }

    /// Current position estimate of a landmark.
    pub fn landmark_estimate(&self, id: LandmarkId) -> Result<Point> {
        match id {
            LandmarkId::KnownA => Ok(self.known[0]),
            LandmarkId::KnownB => Ok(self.known[1]),
            LandmarkId::Dropped(i) => self
                .slot(i)
                .map(|k| Point::new(self.mean[k], self.mean[k + 1]))
                .ok_or_else(|| NavError::UnknownLandmark(format!("{id:?}"))),
        }
    }

    /// Propagates mean and covariance over `dt` with fixed-step RK4.
    ///
    /// Only the vehicle block and the vehicle/landmark cross block evolve; the
    /// landmark blocks are constant.
    pub fn predict(&mut self, u: &ControlInput, dt: f64, substeps: usize) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(param("dt", format!("must be positive, got {dt}")));
        }
        if substeps == 0 {
            return Err(param("substeps", "must be at least 1"));
        }
        let m = self.dim() - 3;
        let q = Matrix2::new(self.noise.sigma_v.powi(2), 0.0, 0.0, self.noise.sigma_omega.powi(2));
        let h = dt / substeps as f64;

        let mut x: Vector3<f64> = self.mean.fixed_rows::<3>(0).into_owned();
        let mut a: Matrix3<f64> = self.cov.fixed_view::<3, 3>(0, 0).into_owned();
        let mut b: OMatrix<f64, U3, Dyn> = self.cov.view((0, 3), (3, m)).fixed_rows::<3>(0).into_owned();

        let deriv = |x: &Vector3<f64>, a: &Matrix3<f64>, b: &OMatrix<f64, U3, Dyn>| {
            let s = VehicleState::from_vector(x);
            let f = state_jacobian(&s, u);
            let g = control_jacobian(&s);
            let dx = vehicle_derivative(&s, u);
            let da = f * a + a * f.transpose() + g * q * g.transpose();
            let db = f * b;
            (dx, da, db)
        };

        for _ in 0..substeps {
            let (k1x, k1a, k1b) = deriv(&x, &a, &b);
            let (k2x, k2a, k2b) = deriv(&(x + k1x * (0.5 * h)), &(a + k1a * (0.5 * h)), &(&b + &k1b * (0.5 * h)));
            let (k3x, k3a, k3b) = deriv(&(x + k2x * (0.5 * h)), &(a + k2a * (0.5 * h)), &(&b + &k2b * (0.5 * h)));
            let (k4x, k4a, k4b) = deriv(&(x + k3x * h), &(a + k3a * h), &(&b + &k3b * h));
            x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
            a += (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (h / 6.0);
            b += (k1b + k2b * 2.0 + k3b * 2.0 + k4b) * (h / 6.0);
        }
        x[2] = wrap_angle(x[2]);
        a = 0.5 * (a + a.transpose());

        self.mean.fixed_rows_mut::<3>(0).copy_from(&x);
        self.cov.fixed_view_mut::<3, 3>(0, 0).copy_from(&a);
        self.cov.view_mut((0, 3), (3, m)).copy_from(&b);
        self.cov.view_mut((3, 0), (m, 3)).copy_from(&b.transpose());
        Ok(())
    }

    /// Predicted range to a landmark and the sparse measurement gradient:
    /// `(range, d_range/d_position, landmark slot)`.
    fn range_model(&self, id: LandmarkId) -> Result<(f64, Vector2<f64>, Option<usize>)> {
        let p = Point::new(self.mean[0], self.mean[1]);
        let (lm, slot) = match id {
            LandmarkId::KnownA => (self.known[0], None),
            LandmarkId::KnownB => (self.known[1], None),
            LandmarkId::Dropped(i) => {
                let k = self
                    .slot(i)
                    .ok_or_else(|| NavError::UnknownLandmark(format!("{id:?}")))?;
                (Point::new(self.mean[k], self.mean[k + 1]), Some(k))
            }
        };
        let diff = p - lm;
        let r = diff.norm();
        let grad = if r > 0.0 { diff / r } else { Vector2::zeros() };
        Ok((r, grad, slot))
    }

    /// Measurement Jacobian row for a range to `id`, as a dense vector.
    pub fn range_jacobian(&self, id: LandmarkId) -> Result<DVector<f64>> {
        let (_, g, slot) = self.range_model(id)?;
        let mut h = DVector::zeros(self.dim());
        h[0] = g.x;
        h[1] = g.y;
        if let Some(k) = slot {
            h[k] = -g.x;
            h[k + 1] = -g.y;
        }
        Ok(h)
    }

    /// Predicted range to `id` from the current estimate.
    pub fn predicted_range(&self, id: LandmarkId) -> Result<f64> {
        Ok(self.range_model(id)?.0)
    }

    /// Scalar range update. Returns `false` when the update was skipped
    /// because the predicted range or innovation variance is degenerate.
    pub fn update_range(&mut self, z: &RangeMeasurement) -> Result<bool> {
        let (r_hat, g, slot) = self.range_model(z.id)?;
        if r_hat < MIN_PREDICTED_RANGE {
            return Ok(false);
        }
        let n = self.dim();
        let mut k = self.cov.column(0) * g.x + self.cov.column(1) * g.y;
        if let Some(j) = slot {
            k -= self.cov.column(j) * g.x + self.cov.column(j + 1) * g.y;
        }
        let mut hk = g.x * k[0] + g.y * k[1];
        if let Some(j) = slot {
            hk -= g.x * k[j] + g.y * k[j + 1];
        }
        let s = hk + self.noise.sigma_range.powi(2);
        if !(s >= MIN_INNOVATION_VAR) {
            return Ok(false);
        }
        let innovation = z.range - r_hat;
        self.mean.axpy(innovation / s, &k, 1.0);
        self.cov.ger(-1.0 / s, &k, &k, 1.0);
        symmetrize(&mut self.cov);
        debug_assert_eq!(self.cov.nrows(), n);
        Ok(true)
    }

    /// Appends a dropped landmark at `estimate` whose placement error relative
    /// to the estimated vehicle position has covariance `drop_cov`. Returns the
    /// new landmark number.
    pub fn augment_landmark(&mut self, estimate: Point, drop_cov: &Matrix2<f64>, t: f64) -> Result<usize> {
        self.augment_landmark_with_lever(estimate, &Vector2::zeros(), drop_cov, t)
    }

    /// Like [`EkfState::augment_landmark`] for a landmark dropped at a
    /// heading-dependent offset from the vehicle: `lever` is the derivative of
    /// the drop point with respect to the heading.
    pub fn augment_landmark_with_lever(
        &mut self,
        estimate: Point,
        lever: &Vector2<f64>,
        drop_cov: &Matrix2<f64>,
        t: f64,
    ) -> Result<usize> {
        check_psd2(drop_cov, "drop covariance")?;
        let n = self.dim();
        let mut mean = DVector::zeros(n + 2);
        mean.rows_mut(0, n).copy_from(&self.mean);
        mean[n] = estimate.x;
        mean[n + 1] = estimate.y;

        // Jacobian of the drop point with respect to the vehicle pose.
        let j = nalgebra::Matrix2x3::new(1.0, 0.0, lever.x, 0.0, 1.0, lever.y);
        let rows = j * self.cov.rows(0, 3);
        let vv: Matrix3<f64> = self.cov.fixed_view::<3, 3>(0, 0).into_owned();
        let block = j * vv * j.transpose() + drop_cov;

        let mut cov = DMatrix::zeros(n + 2, n + 2);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        cov.view_mut((n, 0), (2, n)).copy_from(&rows);
        cov.view_mut((0, n), (n, 2)).copy_from(&rows.transpose());
        cov.view_mut((n, n), (2, 2)).copy_from(&block);
        symmetrize(&mut cov);

        let id = self.next_id;
        self.next_id += 1;
        self.registry.push(RegistryEntry { id, drop_time: t });
        self.mean = mean;
        self.cov = cov;
        Ok(id)
    }

    /// Marginalizes a dropped landmark out of the state. Exact for the
    /// remaining states; used for landmarks that can no longer be observed.
    pub fn remove_landmark(&mut self, id: usize) -> Result<()> {
        let k = self
            .slot(id)
            .ok_or_else(|| NavError::UnknownLandmark(format!("Dropped({id})")))?;
        let pos = (k - 3) / 2;
        self.registry.remove(pos);
        self.mean = std::mem::replace(&mut self.mean, DVector::zeros(0)).remove_rows(k, 2);
        let cov = std::mem::replace(&mut self.cov, DMatrix::zeros(0, 0));
        self.cov = cov.remove_rows(k, 2).remove_columns(k, 2);
        Ok(())
    }

    /// Lateral pseudo-measurement `normal . (p - anchor) = value` with variance
    /// `var`, used by the optional estimator-side wall update.
    pub fn update_linear_position(&mut self, normal: &Vector2<f64>, anchor: &Point, value: f64, var: f64) -> bool {
        let k = self.cov.column(0) * normal.x + self.cov.column(1) * normal.y;
        let s = normal.x * k[0] + normal.y * k[1] + var;
        if !(s >= MIN_INNOVATION_VAR) {
            return false;
        }
        let pred = normal.dot(&(Point::new(self.mean[0], self.mean[1]) - anchor));
        self.mean.axpy((value - pred) / s, &k, 1.0);
        self.cov.ger(-1.0 / s, &k, &k, 1.0);
        symmetrize(&mut self.cov);
        true
    }

    /// Instantaneous position uncertainty of the current estimate.
    pub fn position_uncertainty(&self) -> Result<f64> {
        position_uncertainty(&self.position_cov())
    }
}

/// Trace of the matrix square root of a 2x2 position covariance.
pub fn position_uncertainty(sp: &Matrix2<f64>) -> Result<f64> {
    let (tr, det) = checked_tr_det(sp)?;
    Ok((tr + 2.0 * det.sqrt()).sqrt())
}

fn checked_tr_det(sp: &Matrix2<f64>) -> Result<(f64, f64)> {
    if !sp.iter().all(|v| v.is_finite()) {
        return Err(NavError::NotPsd("non-finite position covariance".into()));
    }
    if (sp[(0, 1)] - sp[(1, 0)]).abs() > PSD_TOL * (1.0 + sp.amax()) {
        return Err(NavError::NotPsd("position covariance is not symmetric".into()));
    }
    let min_eig = min_eig2(sp);
    if min_eig < -PSD_TOL {
        return Err(NavError::NotPsd(format!(
            "position covariance has eigenvalue {min_eig}"
        )));
    }
    let tr = (sp[(0, 0)] + sp[(1, 1)]).max(0.0);
    let det = (sp[(0, 0)] * sp[(1, 1)] - sp[(0, 1)] * sp[(1, 0)]).max(0.0);
    Ok((tr, det))
}

/// Principal square root of a symmetric PSD 2x2 matrix in closed form.
pub fn sqrtm2(sp: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let (tr, det) = checked_tr_det(sp)?;
    let sd = det.sqrt();
    let t = (tr + 2.0 * sd).sqrt();
    if t == 0.0 {
        return Ok(Matrix2::zeros());
    }
    Ok((sp + Matrix2::identity() * sd) / t)
}

/// Position error uncertainty along the unit vector `dir`.
pub fn directional_uncertainty(sp: &Matrix2<f64>, dir: &Vector2<f64>) -> Result<f64> {
    if (dir.norm() - 1.0).abs() > 1e-9 {
        return Err(param(
            "direction",
            format!("must be a unit vector, norm {}", dir.norm()),
        ));
    }
    let s = sqrtm2(sp)?;
    Ok(dir.dot(&(s * dir)))
}

/// Sampled `P(t)` with its running maximum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyTrace {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub running_max: Vec<f64>,
}

impl UncertaintyTrace {
    pub fn push(&mut self, t: f64, p: f64) {
        let m = self.running_max.last().map_or(p, |&m| m.max(p));
        self.t.push(t);
        self.p.push(p);
        self.running_max.push(m);
    }

    /// Maximum of `P(t)` over the whole trace (0 for an empty trace).
    pub fn p_max(&self) -> f64 {
        self.running_max.last().copied().unwrap_or(0.0)
    }
}
