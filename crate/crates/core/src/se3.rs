//! Rigid-body poses, pose-error metrics and the board region grid.
//!
//! Every pose in the benchmark is expressed in the layout (board) frame: the
//! origin sits at the board corner, x runs along the 594 mm edge, y along the
//! 420 mm edge and z points up, away from the table.

use std::fmt;

use nalgebra::{Matrix3, Matrix4, Rotation3, Unit, Vector2, Vector3};
use thiserror::Error;

/// Orthonormality tolerance applied to every rotation entering the engine.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

/// Points within this distance of a region boundary belong to every adjacent region.
pub const REGION_BOUNDARY_TOLERANCE: f64 = 1e-3;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PoseInvalid {
    #[error("position has non-finite components")]
    NonFinitePosition,
    #[error("rotation is not orthonormal (max |RᵀR - I| = {0:.3e})")]
    NotOrthonormal(f64),
    #[error("rotation determinant is {0:.6}, expected 1")]
    BadDeterminant(f64),
    #[error("homogeneous matrix last row is not (0, 0, 0, 1)")]
    BadHomogeneousRow,
}

/// Position (meters) plus rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vector3::zeros(),
            rotation: Matrix3::identity(),
        }
    }

    /// Builds a pose after checking that `rotation` is a proper rotation.
    pub fn new(position: Vector3<f64>, rotation: Matrix3<f64>) -> Result<Self, PoseInvalid> {
        if !position.iter().all(|v| v.is_finite()) {
            return Err(PoseInvalid::NonFinitePosition);
        }
        let dev = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if !(dev <= ROTATION_TOLERANCE) {
            return Err(PoseInvalid::NotOrthonormal(dev));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(PoseInvalid::BadDeterminant(det));
        }
        Ok(Self { position, rotation })
    }

    /// Trusted constructor for values produced by composing valid poses.
    pub fn from_parts(position: Vector3<f64>, rotation: Matrix3<f64>) -> Self {
        Self { position, rotation }
    }

    pub fn from_translation(position: Vector3<f64>) -> Self {
        Self {
            position,
            rotation: Matrix3::identity(),
        }
    }

    pub fn from_rotation(rotation: Matrix3<f64>) -> Self {
        Self {
            position: Vector3::zeros(),
            rotation,
        }
    }

    /// Parses a row-major homogeneous 4×4 matrix.
    pub fn from_row_major(values: &[f64; 16]) -> Result<Self, PoseInvalid> {
        let last = [values[12], values[13], values[14], values[15]];
        if last[0].abs() > 1e-9 || last[1].abs() > 1e-9 || last[2].abs() > 1e-9 || (last[3] - 1.0).abs() > 1e-9 {
            return Err(PoseInvalid::BadHomogeneousRow);
        }
        let rotation = Matrix3::new(
            values[0], values[1], values[2], values[4], values[5], values[6], values[8], values[9], values[10],
        );
        let position = Vector3::new(values[3], values[7], values[11]);
        Self::new(position, rotation)
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let r = &self.rotation;
        let p = &self.position;
        [
            r[(0, 0)], r[(0, 1)], r[(0, 2)], p.x,
            r[(1, 0)], r[(1, 1)], r[(1, 2)], p.y,
            r[(2, 0)], r[(2, 1)], r[(2, 2)], p.z,
            0.0, 0.0, 0.0, 1.0,
        ]
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        Matrix4::from_row_slice(&self.to_row_major())
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.rotation * other.position,
            rotation: self.rotation * other.rotation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            position: -(rt * self.position),
            rotation: rt,
        }
    }

    pub fn transform_point(&self, point: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * point + self.position
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }
}

impl std::ops::Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

/// Rotation of `angle` radians about `axis` (normalized internally).
pub fn axis_angle(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle).into_inner()
}

pub fn rot_x(angle: f64) -> Matrix3<f64> {
    axis_angle(&Vector3::x(), angle)
}

pub fn rot_y(angle: f64) -> Matrix3<f64> {
    axis_angle(&Vector3::y(), angle)
}

pub fn rot_z(angle: f64) -> Matrix3<f64> {
    axis_angle(&Vector3::z(), angle)
}

/// Angle of the equivalent axis-angle representation of `r`, in `[0, π]`.
///
/// Uses `atan2(|axial|, (tr - 1)/2)`, which matches the clamped arccos of the
/// trace but stays accurate near 0 and π.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let axial = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    ) * 0.5;
    axial.norm().atan2(cos)
}

/// Position and orientation error between a desired and a reached pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseError {
    /// Euclidean position error, meters.
    pub position: f64,
    /// Geodesic angle between the two orientations, radians in `[0, π]`.
    pub angle: f64,
    /// `sin(angle)`, saturated to 1 past π/2.
    pub orientation: f64,
    /// `R_desiredᵀ · R_reached`.
    pub relative_rotation: Matrix3<f64>,
}

pub fn position_error(desired: &Pose, reached: &Pose) -> f64 {
    (reached.position - desired.position).norm()
}

pub fn orientation_error(desired: &Pose, reached: &Pose) -> PoseError {
    let relative_rotation = desired.rotation.transpose() * reached.rotation;
    let angle = rotation_angle(&relative_rotation);
    let orientation = if angle > std::f64::consts::FRAC_PI_2 { 1.0 } else { angle.sin() };
    PoseError {
        position: position_error(desired, reached),
        angle,
        orientation,
        relative_rotation,
    }
}

/// Position/orientation gate. Both comparisons are inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub position: f64,
    pub angle: f64,
}

impl Thresholds {
    pub fn new(position: f64, angle: f64) -> Self {
        Self { position, angle }
    }

    pub fn accepts(&self, err: &PoseError) -> bool {
        err.position <= self.position && err.angle <= self.angle
    }
}

pub fn is_reached(desired: &Pose, reached: &Pose, thresholds: Thresholds) -> bool {
    thresholds.accepts(&orientation_error(desired, reached))
}

#[derive(Error, Debug, Clone, PartialEq)]
#[error("point ({x:.4}, {y:.4}) lies outside the board")]
pub struct OutOfBoard {
    pub x: f64,
    pub y: f64,
}

/// Region identifier, 1-based, numbered row-major from the board origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionId(pub u8);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Partition of the board rectangle into `rows × cols` equal cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionGrid {
    pub width: f64,
    pub height: f64,
    pub rows: usize,
    pub cols: usize,
}

impl Default for RegionGrid {
    fn default() -> Self {
        Self::graspa()
    }
}

impl RegionGrid {
    /// A2 board, 3 columns × 2 rows.
    pub fn graspa() -> Self {
        Self {
            width: 0.594,
            height: 0.420,
            rows: 2,
            cols: 3,
        }
    }

    pub fn cell_width(&self) -> f64 {
        self.width / self.cols as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.height / self.rows as f64
    }

    pub fn region_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn region_ids(&self) -> impl Iterator<Item = RegionId> {
        (1..=self.region_count() as u8).map(RegionId)
    }

    pub fn region_id(&self, row: usize, col: usize) -> RegionId {
        RegionId((row * self.cols + col + 1) as u8)
    }

    /// Rectangle `(x0, y0, x1, y1)` of a region.
    pub fn cell_bounds(&self, id: RegionId) -> (f64, f64, f64, f64) {
        let idx = id.0 as usize - 1;
        let (row, col) = (idx / self.cols, idx % self.cols);
        let (w, h) = (self.cell_width(), self.cell_height());
        (col as f64 * w, row as f64 * h, (col + 1) as f64 * w, (row + 1) as f64 * h)
    }

    pub fn contains(&self, xy: &Vector2<f64>) -> bool {
        let t = REGION_BOUNDARY_TOLERANCE;
        xy.x >= -t && xy.x <= self.width + t && xy.y >= -t && xy.y <= self.height + t
    }

    /// Regions containing `xy`, sorted. Boundary points belong to every
    /// adjacent cell.
    pub fn regions_of_point(&self, xy: &Vector2<f64>) -> Result<Vec<RegionId>, OutOfBoard> {
        if !self.contains(xy) {
            return Err(OutOfBoard { x: xy.x, y: xy.y });
        }
        let t = REGION_BOUNDARY_TOLERANCE;
        let x = xy.x.clamp(0.0, self.width);
        let y = xy.y.clamp(0.0, self.height);
        let (w, h) = (self.cell_width(), self.cell_height());
        let cols: Vec<usize> = (0..self.cols)
            .filter(|&c| x >= c as f64 * w - t && x <= (c + 1) as f64 * w + t)
            .collect();
        let rows: Vec<usize> = (0..self.rows)
            .filter(|&r| y >= r as f64 * h - t && y <= (r + 1) as f64 * h + t)
            .collect();
        let mut ids: Vec<RegionId> = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
            .map(|(r, c)| self.region_id(r, c))
            .collect();
        ids.sort();
        Ok(ids)
    }
}
