//! Crystal-frame geometry: maps lab-frame magnetic field vectors into the
//! defect's symmetry frame for any of the four ⟨111⟩ orientation classes.
//!
//! The defect z-axis is its ⟨111⟩ high-symmetry axis. The in-plane x-axis
//! follows a fixed ⟨112̄⟩-type convention (see [`DefectOrientation::x_reference`])
//! so that eigenvectors downstream are reproducible; manifold eigenvalues do
//! not depend on this choice.

use std::fmt;

/// A vector in the cubic crystal frame (`[100]`, `[010]`, `[001]`).
///
/// Components are either dimensionless direction cosines or Tesla, depending
/// on context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LabVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// `[001]`, the out-of-plane direction for a (001)-cut chip.
    pub const Z: Self = Self::new(0.0, 0.0, 1.0);

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector in the same direction. `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self.scaled(1.0 / n))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl fmt::Display for LabVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// One of the four ⟨111⟩ orientation classes a split-vacancy defect can
/// occupy in the diamond lattice.
///
/// The defect is inversion-symmetric, so an orientation is a line rather
/// than a signed direction: ±n label the same physical defect. The
/// canonical axis vector of every class is chosen with positive `[001]`
/// component, which makes all four classes resolve an out-of-plane field
/// identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefectOrientation {
    /// Symmetry axis along `[111]`.
    Axis111,
    /// Symmetry axis along `[1̄11]`.
    AxisM111,
    /// Symmetry axis along `[11̄1]`.
    Axis1M11,
    /// Symmetry axis along `[111̄]`; canonical vector `[1̄1̄1]`/√3.
    Axis11M1,
}

impl DefectOrientation {
    pub const ALL: [Self; 4] = [
        Self::Axis111,
        Self::AxisM111,
        Self::Axis1M11,
        Self::Axis11M1,
    ];

    /// Sign pattern (s1, s2, s3) of the canonical axis vector [s1 s2 s3].
    fn signs(self) -> (f64, f64, f64) {
        match self {
            Self::Axis111 => (1.0, 1.0, 1.0),
            Self::AxisM111 => (-1.0, 1.0, 1.0),
            Self::Axis1M11 => (1.0, -1.0, 1.0),
            // [111̄] and [1̄1̄1] are the same line; the latter keeps s3 > 0.
            Self::Axis11M1 => (-1.0, -1.0, 1.0),
        }
    }

    /// Unit vector along the defect symmetry axis (the defect z-axis),
    /// expressed in the crystal frame.
    pub fn axis(self) -> LabVector {
        let (s1, s2, s3) = self.signs();
        let n = 3.0_f64.sqrt();
        LabVector::new(s1 / n, s2 / n, s3 / n)
    }

    /// Unit vector defining the defect x-axis, expressed in the crystal
    /// frame. For axis `[s1 s2 s3]` this is the ⟨112̄⟩-type direction
    /// `[s1 s2 −2s3]`/√6, which is orthogonal to the axis for every class.
    pub fn x_reference(self) -> LabVector {
        let (s1, s2, s3) = self.signs();
        let n = 6.0_f64.sqrt();
        LabVector::new(s1 / n, s2 / n, -2.0 * s3 / n)
    }

    /// Config/CLI token, e.g. `111`, `-111`, `1-11`, `11-1`.
    pub fn token(self) -> &'static str {
        match self {
            Self::Axis111 => "111",
            Self::AxisM111 => "-111",
            Self::Axis1M11 => "1-11",
            Self::Axis11M1 => "11-1",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        match s.trim() {
            "111" => Some(Self::Axis111),
            "-111" => Some(Self::AxisM111),
            "1-11" => Some(Self::Axis1M11),
            "11-1" => Some(Self::Axis11M1),
            _ => None,
        }
    }
}

impl fmt::Display for DefectOrientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Proper orthogonal rotation with rows = defect (x, y, z) axes expressed in
/// the crystal frame. Applying it takes crystal-frame components to
/// defect-frame components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    rows: [LabVector; 3],
}

impl Rotation {
    pub fn rows(&self) -> &[LabVector; 3] {
        &self.rows
    }

    pub fn apply(&self, v: &LabVector) -> (f64, f64, f64) {
        (
            self.rows[0].dot(v),
            self.rows[1].dot(v),
            self.rows[2].dot(v),
        )
    }
}

/// Rotation from the crystal frame onto the defect frame of `orientation`.
///
/// Rows are (x, y, z) defect axes: z along the symmetry axis, x along the
/// documented ⟨112̄⟩-type reference, y = z × x completing a right-handed
/// frame (det = +1).
pub fn defect_rotation(orientation: DefectOrientation) -> Rotation {
    let z = orientation.axis();
    let x = orientation.x_reference();
    let y = LabVector::new(
        z.y * x.z - z.z * x.y,
        z.z * x.x - z.x * x.z,
        z.x * x.y - z.y * x.x,
    );
    Rotation { rows: [x, y, z] }
}

/// Magnetic field resolved in the defect frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectFrameField {
    /// Component along the defect symmetry axis, Tesla.
    pub b_z: f64,
    /// Magnitude of the transverse component, Tesla. Always ≥ 0.
    pub b_perp: f64,
    /// Azimuth of the transverse component about the axis, radians.
    /// Zero by convention when `b_perp` is zero.
    pub phi: f64,
}

impl DefectFrameField {
    /// Purely axial field.
    pub const fn axial(b_z: f64) -> Self {
        Self {
            b_z,
            b_perp: 0.0,
            phi: 0.0,
        }
    }

    pub const ZERO: Self = Self::axial(0.0);

    pub fn magnitude(&self) -> f64 {
        self.b_z.hypot(self.b_perp)
    }

    /// Cartesian defect-frame components (Bx, By, Bz).
    pub fn components(&self) -> (f64, f64, f64) {
        (
            self.b_perp * self.phi.cos(),
            self.b_perp * self.phi.sin(),
            self.b_z,
        )
    }
}

/// Resolve a lab-frame field in the defect frame of `orientation`.
///
/// The magnitude is preserved exactly: |B_lab|² = B_z² + B_perp².
pub fn field_in_defect_frame(
    b_lab: &LabVector,
    orientation: DefectOrientation,
) -> DefectFrameField {
    let r = defect_rotation(orientation);
    let (bx, by, bz) = r.apply(b_lab);
    let b_perp = bx.hypot(by);
    let phi = if b_perp == 0.0 { 0.0 } else { by.atan2(bx) };
    DefectFrameField {
        b_z: bz,
        b_perp,
        phi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn axis_111_is_third_row() {
        let r = defect_rotation(DefectOrientation::Axis111);
        let z = r.rows()[2];
        let c = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(z.x, c, max_relative = 1e-15);
        assert_relative_eq!(z.y, c, max_relative = 1e-15);
        assert_relative_eq!(z.z, c, max_relative = 1e-15);
    }

    #[test]
    fn x_reference_convention_for_111() {
        // For axis [111] the documented x convention is [11-2]/sqrt(6);
        // it is already orthogonal to the axis, so Gram-Schmidt is the
        // identity here.
        let r = defect_rotation(DefectOrientation::Axis111);
        let x = r.rows()[0];
        let c = 1.0 / 6.0_f64.sqrt();
        assert_relative_eq!(x.x, c, max_relative = 1e-15);
        assert_relative_eq!(x.y, c, max_relative = 1e-15);
        assert_relative_eq!(x.z, -2.0 * c, max_relative = 1e-15);
    }

    #[test]
    fn rotations_are_proper_orthogonal() {
        for orientation in DefectOrientation::ALL {
            let r = defect_rotation(orientation);
            let rows = r.rows();
            for i in 0..3 {
                for j in 0..3 {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (rows[i].dot(&rows[j]) - expected).abs() < 1e-12,
                        "R R^T != I for {orientation} at ({i},{j})"
                    );
                }
            }
            // det(R) = x . (y × z) with rows (x, y, z)
            let (x, y, z) = (rows[0], rows[1], rows[2]);
            let cross = LabVector::new(
                y.y * z.z - y.z * z.y,
                y.z * z.x - y.x * z.z,
                y.x * z.y - y.y * z.x,
            );
            assert_relative_eq!(x.dot(&cross), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn field_along_001_for_axis_111() {
        let b = field_in_defect_frame(&LabVector::new(0.0, 0.0, 1.0), DefectOrientation::Axis111);
        assert_relative_eq!(b.b_z, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(b.b_perp, (2.0 / 3.0_f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn field_along_axis_is_purely_axial() {
        let c = 1.0 / 3.0_f64.sqrt();
        let b = field_in_defect_frame(&LabVector::new(c, c, c), DefectOrientation::Axis111);
        assert_relative_eq!(b.b_z, 1.0, epsilon = 1e-12);
        assert!(b.b_perp.abs() < 1e-12);
    }

    #[test]
    fn orientation_classes_equivalent_under_001_field() {
        let lab = LabVector::new(0.0, 0.0, 9.0);
        let reference = field_in_defect_frame(&lab, DefectOrientation::Axis111);
        for orientation in DefectOrientation::ALL {
            let b = field_in_defect_frame(&lab, orientation);
            assert_relative_eq!(b.b_z, reference.b_z, epsilon = 1e-12);
            assert_relative_eq!(b.b_perp, reference.b_perp, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_field_maps_to_zero_with_zero_phi() {
        let b = field_in_defect_frame(&LabVector::new(0.0, 0.0, 0.0), DefectOrientation::Axis111);
        assert_eq!(b.b_z, 0.0);
        assert_eq!(b.b_perp, 0.0);
        assert_eq!(b.phi, 0.0);
    }

    #[test]
    fn magnitude_preserved() {
        let v = LabVector::new(0.3, -1.7, 4.2);
        for orientation in DefectOrientation::ALL {
            let b = field_in_defect_frame(&v, orientation);
            assert_relative_eq!(b.magnitude(), v.norm(), max_relative = 1e-12);
        }
    }

    #[test]
    fn orientation_tokens_round_trip() {
        for orientation in DefectOrientation::ALL {
            assert_eq!(
                DefectOrientation::from_token(orientation.token()),
                Some(orientation)
            );
        }
        assert_eq!(DefectOrientation::from_token("110"), None);
    }
}
