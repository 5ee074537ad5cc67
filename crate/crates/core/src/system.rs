//! Piecewise-smooth systems with the switching surface `x1 = 0`.
//!
//! The left piece applies where `x1 < 0`, the right piece where `x1 > 0`.
//! On the surface the Filippov convention is used: crossing where both
//! pieces push the same way, sliding with the convex combination that is
//! tangent to the surface where they oppose.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{norm, Matrix};
use crate::parser::{DomainError, FieldExpression};

/// Relative width of the switching surface used when snapping states onto it.
pub const SURFACE_TOL: f64 = 1e-10;
/// Relative threshold below which a normal velocity component counts as zero.
pub const SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("component {component} of the {side} piece: {source}")]
    Evaluation {
        side: Side,
        component: usize,
        source: DomainError,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("two-fold point: both pieces are tangent to the surface, sliding field undefined")]
    TwoFold,
    #[error("point lies in a crossing region, no sliding motion exists there")]
    Crossing,
    #[error("degenerate reduced system: c1 = 0")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// One smooth piece of the vector field.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorFieldSpec {
    /// `x ↦ M x + b`
    Affine { matrix: Matrix, offset: Vec<f64> },
    /// One expression per component.
    Expression(Vec<FieldExpression>),
}

impl VectorFieldSpec {
    pub fn affine(matrix: Matrix, offset: Vec<f64>) -> Self {
        VectorFieldSpec::Affine { matrix, offset }
    }

    /// The constant field `x ↦ b`.
    pub fn constant(offset: Vec<f64>) -> Self {
        let n = offset.len();
        VectorFieldSpec::Affine {
            matrix: Matrix::zeros(n, n),
            offset,
        }
    }

    /// The linear field `x ↦ M x`.
    pub fn linear(matrix: Matrix) -> Self {
        let n = matrix.rows();
        VectorFieldSpec::Affine {
            matrix,
            offset: vec![0.0; n],
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            VectorFieldSpec::Affine { offset, .. } => offset.len(),
            VectorFieldSpec::Expression(e) => e.len(),
        }
    }

    fn check(&self, n: usize) -> Result<(), SystemError> {
        let ok = match self {
            VectorFieldSpec::Affine { matrix, offset } => {
                matrix.rows() == n && matrix.cols() == n && offset.len() == n
            }
            VectorFieldSpec::Expression(e) => e.len() == n && e.iter().all(|c| c.dimension() == n),
        };
        if ok {
            Ok(())
        } else {
            Err(SystemError::Dimension {
                expected: n,
                got: self.dimension(),
            })
        }
    }

    fn eval_into(&self, side: Side, x: &[f64], out: &mut [f64]) -> Result<(), SystemError> {
        match self {
            VectorFieldSpec::Affine { matrix, offset } => {
                matrix.mul_vec_into(x, out);
                for (o, b) in out.iter_mut().zip(offset) {
                    *o += b;
                }
                Ok(())
            }
            VectorFieldSpec::Expression(exprs) => {
                for (component, (o, e)) in out.iter_mut().zip(exprs).enumerate() {
                    *o = e.eval(x).map_err(|source| SystemError::Evaluation {
                        side,
                        component,
                        source,
                    })?;
                }
                Ok(())
            }
        }
    }
}

/// Analytic Jacobian of the left piece.
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// A Filippov system on `R^n` with switching surface `x1 = 0`.
#[derive(Clone)]
pub struct PiecewiseSystem {
    dimension: usize,
    left: VectorFieldSpec,
    right: VectorFieldSpec,
    left_jacobian: Option<JacobianFn>,
}

impl fmt::Debug for PiecewiseSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseSystem")
            .field("dimension", &self.dimension)
            .field("left", &self.left)
            .field("right", &self.right)
            .field("left_jacobian", &self.left_jacobian.is_some())
            .finish()
    }
}

impl PiecewiseSystem {
    pub fn new(left: VectorFieldSpec, right: VectorFieldSpec) -> Result<Self, SystemError> {
        let dimension = left.dimension();
        if dimension == 0 {
            return Err(SystemError::Dimension {
                expected: 1,
                got: 0,
            });
        }
        left.check(dimension)?;
        right.check(dimension)?;
        Ok(Self {
            dimension,
            left,
            right,
            left_jacobian: None,
        })
    }

    pub fn with_left_jacobian(mut self, jacobian: JacobianFn) -> Self {
        self.left_jacobian = Some(jacobian);
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn piece(&self, side: Side) -> &VectorFieldSpec {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn left_jacobian(&self) -> Option<&JacobianFn> {
        self.left_jacobian.as_ref()
    }

    /// Same system with the right piece multiplied by `factor`.
    pub fn with_right_scaled(&self, factor: f64) -> Self {
        let right = match &self.right {
            VectorFieldSpec::Affine { matrix, offset } => VectorFieldSpec::Affine {
                matrix: matrix.scale(factor),
                offset: offset.iter().map(|v| v * factor).collect(),
            },
            VectorFieldSpec::Expression(exprs) => {
                VectorFieldSpec::Expression(exprs.iter().map(|e| e.scaled(factor)).collect())
            }
        };
        Self {
            right,
            ..self.clone()
        }
    }

    pub fn eval_into(&self, side: Side, x: &[f64], out: &mut [f64]) -> Result<(), SystemError> {
        self.piece(side).eval_into(side, x, out)
    }

    /// Evaluates `f^L(x)` or `f^R(x)`.
    pub fn eval_field(&self, side: Side, x: &[f64]) -> Result<Vec<f64>, SystemError> {
        if x.len() != self.dimension {
            return Err(SystemError::Dimension {
                expected: self.dimension,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.dimension];
        self.eval_into(side, x, &mut out)?;
        Ok(out)
    }

    /// Classifies a point of the switching surface. `x1` is snapped to zero
    /// before evaluation.
    pub fn classify_boundary_point(&self, x: &[f64]) -> Result<BoundaryPointClass, SystemError> {
        let (fl, fr, z) = self.surface_fields(x)?;
        Ok(BoundaryPointClass::from_normal_components(
            fl[0],
            fr[0],
            sign_threshold(&z),
        ))
    }

    /// Convex weight and sliding velocity at a surface point.
    pub fn sliding_data(&self, x: &[f64]) -> Result<SlidingData, SystemError> {
        let (fl, fr, z) = self.surface_fields(x)?;
        let class = BoundaryPointClass::from_normal_components(fl[0], fr[0], sign_threshold(&z));
        match class {
            BoundaryPointClass::Crossing => Err(SystemError::Crossing),
            BoundaryPointClass::TwoFold => Err(SystemError::TwoFold),
            BoundaryPointClass::TangencyLeft => {
                let mut f_s = fl;
                f_s[0] = 0.0;
                Ok(SlidingData { lambda: 0.0, f_s })
            }
            BoundaryPointClass::TangencyRight => {
                let mut f_s = fr;
                f_s[0] = 0.0;
                Ok(SlidingData { lambda: 1.0, f_s })
            }
            BoundaryPointClass::AttractingSliding | BoundaryPointClass::RepellingSliding => {
                let lambda = (fl[0] / (fl[0] - fr[0])).clamp(0.0, 1.0);
                Ok(SlidingData {
                    lambda,
                    f_s: sliding_combination(&fl, &fr),
                })
            }
        }
    }

    fn surface_fields(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), SystemError> {
        if x.len() != self.dimension {
            return Err(SystemError::Dimension {
                expected: self.dimension,
                got: x.len(),
            });
        }
        let mut z = x.to_vec();
        z[0] = 0.0;
        let fl = self.eval_field(Side::Left, &z)?;
        let fr = self.eval_field(Side::Right, &z)?;
        Ok((fl, fr, z))
    }
}

/// `(f^L_1 f^R − f^R_1 f^L) / (f^L_1 − f^R_1)`, the unclamped sliding field.
/// The first component is exactly zero.
pub fn sliding_combination(fl: &[f64], fr: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; fl.len()];
    sliding_combination_into(fl, fr, &mut out);
    out
}

pub(crate) fn sliding_combination_into(fl: &[f64], fr: &[f64], out: &mut [f64]) {
    let (a, b) = (fl[0], fr[0]);
    let denom = a - b;
    for ((o, l), r) in out.iter_mut().zip(fl).zip(fr) {
        *o = (a * r - b * l) / denom;
    }
    out[0] = 0.0;
}

/// Threshold for treating a normal velocity component as zero at `x`.
pub fn sign_threshold(x: &[f64]) -> f64 {
    SIGN_TOL * (1.0 + norm(x))
}

/// Whether `x` lies on the switching surface.
pub fn on_surface(x: &[f64]) -> bool {
    x[0].abs() <= SURFACE_TOL * (1.0 + norm(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryPointClass {
    Crossing,
    AttractingSliding,
    RepellingSliding,
    /// `f^L_1 = 0`, `f^R_1 ≠ 0`
    TangencyLeft,
    /// `f^R_1 = 0`, `f^L_1 ≠ 0`
    TangencyRight,
    TwoFold,
}

impl BoundaryPointClass {
    /// Total classification by the signs of the normal components; values
    /// within `zero_tol` of zero count as zero.
    pub fn from_normal_components(left: f64, right: f64, zero_tol: f64) -> Self {
        let sign = |v: f64| {
            if v.abs() <= zero_tol {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        };
        match (sign(left), sign(right)) {
            (0, 0) => BoundaryPointClass::TwoFold,
            (0, _) => BoundaryPointClass::TangencyLeft,
            (_, 0) => BoundaryPointClass::TangencyRight,
            (l, r) if l == r => BoundaryPointClass::Crossing,
            (1, _) => BoundaryPointClass::AttractingSliding,
            _ => BoundaryPointClass::RepellingSliding,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlidingData {
    pub lambda: f64,
    pub f_s: Vec<f64>,
}

/// Leading-order system at a boundary equilibrium: `A x` on the left,
/// the constant `c` on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    a: Matrix,
    c: Vec<f64>,
}

impl ReducedSystem {
    pub fn new(a: Matrix, c: Vec<f64>) -> Result<Self, SystemError> {
        if !a.is_square() || a.rows() != c.len() || c.is_empty() {
            return Err(SystemError::Dimension {
                expected: a.rows(),
                got: c.len(),
            });
        }
        Ok(Self { a, c })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn c1(&self) -> f64 {
        self.c[0]
    }

    pub fn dimension(&self) -> usize {
        self.c.len()
    }

    pub fn to_system(&self) -> PiecewiseSystem {
        let a = self.a.clone();
        PiecewiseSystem::new(
            VectorFieldSpec::linear(self.a.clone()),
            VectorFieldSpec::constant(self.c.clone()),
        )
        .expect("reduced system dimensions are validated on construction")
        .with_left_jacobian(Arc::new(move |_| a.clone()))
    }

    /// `C = (I − c e1ᵀ / c1) A`; sliding motion of the reduced system is a
    /// positive multiple of `C x`.
    pub fn reduced_sliding_matrix(&self) -> Result<Matrix, SystemError> {
        reduced_sliding_matrix(self)
    }
}

pub fn reduced_sliding_matrix(rs: &ReducedSystem) -> Result<Matrix, SystemError> {
    let c1 = rs.c1();
    if c1 == 0.0 {
        return Err(SystemError::Degenerate);
    }
    let n = rs.dimension();
    let mut out = rs.a.clone();
    for i in 0..n {
        let w = rs.c[i] / c1;
        for j in 0..n {
            out[(i, j)] = rs.a[(i, j)] - w * rs.a[(0, j)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn four_dim_field_values() {
        let sys = builtin::paper_4d().to_system();
        assert_eq!(
            sys.eval_field(Side::Left, &[0.0, 1.0, 0.0, 0.0]).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            sys.eval_field(Side::Right, &[3.0, -2.0, 7.0, 1.0]).unwrap(),
            vec![-1.0, 0.4, -0.2, -0.04]
        );
        let lin = PiecewiseSystem::new(
            VectorFieldSpec::linear(Matrix::identity(3)),
            VectorFieldSpec::constant(vec![1.0, 2.0, 3.0]),
        )
        .unwrap();
        assert_eq!(lin.eval_field(Side::Left, &[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!(matches!(
            lin.eval_field(Side::Left, &[0.0; 2]),
            Err(SystemError::Dimension { .. })
        ));
    }

    #[test]
    fn four_dim_classification() {
        let sys = builtin::paper_4d().to_system();
        let class = |x: [f64; 4]| sys.classify_boundary_point(&x).unwrap();
        assert_eq!(class([0.0, 1.0, 0.0, 0.0]), BoundaryPointClass::AttractingSliding);
        assert_eq!(class([0.0, -1.0, 0.0, 0.0]), BoundaryPointClass::Crossing);
        assert_eq!(class([0.0, 0.0, -1.0, 0.0]), BoundaryPointClass::TangencyLeft);
    }

    #[test]
    fn classification_table() {
        use BoundaryPointClass::*;
        let c = |l, r| BoundaryPointClass::from_normal_components(l, r, 1e-12);
        assert_eq!(c(1.0, 2.0), Crossing);
        assert_eq!(c(-1.0, -2.0), Crossing);
        assert_eq!(c(1.0, -2.0), AttractingSliding);
        assert_eq!(c(-1.0, 2.0), RepellingSliding);
        assert_eq!(c(0.0, 2.0), TangencyLeft);
        assert_eq!(c(1.0, 1e-13), TangencyRight);
        assert_eq!(c(1e-13, -1e-13), TwoFold);
    }

    #[test]
    fn sliding_data_examples() {
        let sys = builtin::paper_4d().to_system();
        let s = sys.sliding_data(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.lambda, 0.5);
        let expected = [0.0, 0.2, -0.1, -0.02];
        for (a, b) in s.f_s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }

        let s = sys.sliding_data(&[0.0, 0.0, -1.0, 0.0]).unwrap();
        assert_eq!(s.lambda, 0.0);
        assert_eq!(s.f_s, vec![0.0, -1.0, 0.0, 0.0]);

        assert_eq!(
            sys.sliding_data(&[0.0, -1.0, 0.0, 0.0]),
            Err(SystemError::Crossing)
        );

        // f^R_1 = 0 with f^L_1 > 0
        let tr = PiecewiseSystem::new(
            VectorFieldSpec::constant(vec![1.0, 0.0]),
            VectorFieldSpec::constant(vec![0.0, 3.0]),
        )
        .unwrap();
        let s = tr.sliding_data(&[0.0, 5.0]).unwrap();
        assert_eq!(s.lambda, 1.0);
        assert_eq!(s.f_s, vec![0.0, 3.0]);

        let two_fold = PiecewiseSystem::new(
            VectorFieldSpec::constant(vec![0.0, 1.0]),
            VectorFieldSpec::constant(vec![0.0, 3.0]),
        )
        .unwrap();
        assert_eq!(two_fold.sliding_data(&[0.0, 0.0]), Err(SystemError::TwoFold));
    }

    #[test]
    fn sliding_matrix_small_case() {
        let rs = ReducedSystem::new(Matrix::identity(2), vec![-1.0, 0.0]).unwrap();
        let c = rs.reduced_sliding_matrix().unwrap();
        assert_eq!(c, Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap());

        let degenerate = ReducedSystem::new(Matrix::identity(2), vec![0.0, 1.0]).unwrap();
        assert_eq!(degenerate.reduced_sliding_matrix(), Err(SystemError::Degenerate));
    }

    #[test]
    fn scaled_right_piece() {
        let sys = builtin::paper_4d().to_system().with_right_scaled(2.0);
        assert_eq!(
            sys.eval_field(Side::Right, &[0.0; 4]).unwrap(),
            vec![-2.0, 0.8, -0.4, -0.08]
        );
        let expr = builtin::paper_planar_c10(0.2).with_right_scaled(0.5);
        assert_eq!(expr.eval_field(Side::Right, &[0.0, 2.0]).unwrap(), vec![1.0, -0.5]);
    }
}
