//! Hard-coded example systems.

use crate::linalg::Matrix;
use crate::system::{PiecewiseSystem, ReducedSystem, VectorFieldSpec};

pub const PAPER_4D: &str = "paper-4d";
pub const PAPER_PLANAR_C10: &str = "paper-planar-c10";
pub const PAPER_PLANAR_C10_REDUCED: &str = "paper-planar-c10-reduced";

pub const NAMES: [&str; 3] = [PAPER_4D, PAPER_PLANAR_C10, PAPER_PLANAR_C10_REDUCED];

/// Default damping of the planar counterexample.
pub const DEFAULT_NU: f64 = 0.2;

/// Four-dimensional reduced system whose orbits converge to the origin
/// through chaotic excursions.
pub fn paper_4d() -> ReducedSystem {
    let a = Matrix::from_rows(&[
        vec![-0.1, 1.0, 0.0, 0.0],
        vec![-9.0, 0.0, 1.0, 0.0],
        vec![-4.0, 0.0, 0.0, 1.0],
        vec![-0.4, 0.0, 0.0, 0.0],
    ])
    .unwrap();
    ReducedSystem::new(a, vec![-1.0, 0.4, -0.2, -0.04]).unwrap()
}

fn planar_left(nu: f64) -> Matrix {
    Matrix::from_rows(&[vec![-nu, 1.0], vec![-1.0, -nu]]).unwrap()
}

/// Planar system with `c1 = 0`: exponentially stable, while its reduction
/// is not asymptotically stable.
pub fn paper_planar_c10(nu: f64) -> PiecewiseSystem {
    PiecewiseSystem::new(
        VectorFieldSpec::linear(planar_left(nu)),
        VectorFieldSpec::affine(
            Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            vec![0.0, -1.0],
        ),
    )
    .unwrap()
}

/// Reduction of [`paper_planar_c10`]: `x2` replaced by zero in the right piece.
pub fn paper_planar_c10_reduced(nu: f64) -> ReducedSystem {
    ReducedSystem::new(planar_left(nu), vec![0.0, -1.0]).unwrap()
}

/// A builtin system, either given in full or already in reduced form.
#[derive(Debug, Clone)]
pub enum Builtin {
    Full(PiecewiseSystem),
    Reduced(ReducedSystem),
}

impl Builtin {
    pub fn system(&self) -> PiecewiseSystem {
        match self {
            Builtin::Full(s) => s.clone(),
            Builtin::Reduced(r) => r.to_system(),
        }
    }
}

pub fn lookup(name: &str, nu: f64) -> Option<Builtin> {
    match name {
        PAPER_4D => Some(Builtin::Reduced(paper_4d())),
        PAPER_PLANAR_C10 => Some(Builtin::Full(paper_planar_c10(nu))),
        PAPER_PLANAR_C10_REDUCED => Some(Builtin::Reduced(paper_planar_c10_reduced(nu))),
        _ => None,
    }
}
