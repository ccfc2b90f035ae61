//! Small fixed-size linear algebra: 2×2 complex matrices with closed-form
//! inverses, and a pivoted 4×4 real solver for the commutator system.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub aa: Complex64,
    pub ab: Complex64,
    pub ba: Complex64,
    pub bb: Complex64,
}

impl Mat2 {
    pub const fn new(aa: Complex64, ab: Complex64, ba: Complex64, bb: Complex64) -> Self {
        Mat2 { aa, ab, ba, bb }
    }

    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Mat2::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        Mat2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn diagonal(aa: Complex64, bb: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Mat2::new(aa, z, z, bb)
    }

    pub fn det(&self) -> Complex64 {
        self.aa * self.bb - self.ab * self.ba
    }

    /// Closed-form inverse via the adjugate; no iterative linear algebra.
    pub fn inverse(&self) -> Result<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 {
            return Err(Error::pole("singular 2x2 matrix (zero determinant)"));
        }
        Ok(Mat2::new(self.bb / d, -self.ab / d, -self.ba / d, self.aa / d))
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.aa * rhs.aa + self.ab * rhs.ba,
            self.aa * rhs.ab + self.ab * rhs.bb,
            self.ba * rhs.aa + self.bb * rhs.ba,
            self.ba * rhs.ab + self.bb * rhs.bb,
        )
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.aa - rhs.aa,
            self.ab - rhs.ab,
            self.ba - rhs.ba,
            self.bb - rhs.bb,
        )
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.aa, self.ab, self.ba, self.bb]
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        self.entries().iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Entrywise distance scaled by the larger of the two matrix max-norms.
    /// Returns 0 when both matrices vanish.
    pub fn relative_distance(&self, other: &Mat2) -> f64 {
        let scale = self.max_norm().max(other.max_norm());
        if scale == 0.0 {
            return 0.0;
        }
        self.sub(other).max_norm() / scale
    }
}

/// Relative distance between two complex scalars, scaled by the larger
/// magnitude; 0 when both vanish.
pub fn relative_error(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        return 0.0;
    }
    (a - b).norm() / scale
}

/// Solution of a 4×4 real linear system together with a condition estimate.
#[derive(Debug, Clone)]
pub struct Solve4 {
    pub x: [f64; 4],
    /// 1-norm condition estimate ‖A‖₁·‖A⁻¹‖₁.
    pub condition: f64,
}

/// Gaussian elimination with partial pivoting on a 4×4 real system.
///
/// The inverse is accumulated column by column so the 1-norm condition
/// number comes for free; callers use it to decide whether the solution
/// is trustworthy.
pub fn solve4(a: &[[f64; 4]; 4], rhs: &[f64; 4]) -> Result<Solve4> {
    // Augment with rhs and the identity (for the inverse).
    let mut m = [[0.0f64; 9]; 4];
    for i in 0..4 {
        m[i][..4].copy_from_slice(&a[i]);
        m[i][4] = rhs[i];
        m[i][5 + i] = 1.0;
    }

    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    for col in 0..4 {
        let pivot_row = (col..4)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() <= 1e-14 * scale {
            return Err(Error::numerical(format!(
                "singular 4x4 commutator system (pivot {:.3e} at column {col})",
                m[pivot_row][col].abs()
            )));
        }
        m.swap(col, pivot_row);
        let pivot = m[col][col];
        let pivot_row_values = m[col];
        for (row, data) in m.iter_mut().enumerate() {
            if row == col {
                continue;
            }
            let factor = data[col] / pivot;
            for (target, source) in data[col..].iter_mut().zip(&pivot_row_values[col..]) {
                *target -= factor * source;
            }
        }
    }

    let mut x = [0.0f64; 4];
    let mut inv = [[0.0f64; 4]; 4];
    for i in 0..4 {
        x[i] = m[i][4] / m[i][i];
        for j in 0..4 {
            inv[i][j] = m[i][5 + j] / m[i][i];
        }
    }

    let norm1 = |mat: &[[f64; 4]; 4]| -> f64 {
        (0..4)
            .map(|j| (0..4).map(|i| mat[i][j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let condition = norm1(a) * norm1(&inv);

    Ok(Solve4 { x, condition })
}
