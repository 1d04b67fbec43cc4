//! Bilinear quadrilateral: shape functions, 2x2 Gauss rule, strain-displacement operator.

use nalgebra::SMatrix;

use crate::error::{Error, Result};

/// Strain-displacement operator: 8 element dofs to the Voigt strain.
pub type StrainOperator = SMatrix<f64, 4, 8>;

/// Reference coordinates of the four nodes, counter-clockwise.
pub const NODE_XI: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// 2x2 Gauss points (unit weights).
pub fn gauss_points() -> [[f64; 2]; 4] {
    let g = 1.0 / 3f64.sqrt();
    [[-g, -g], [g, -g], [g, g], [-g, g]]
}

/// Shape function values and reference gradients at `xi`.
pub fn shape_eval(xi: [f64; 2]) -> ([f64; 4], [[f64; 2]; 4]) {
    let mut n = [0.0; 4];
    let mut dn = [[0.0; 2]; 4];
    for (a, p) in NODE_XI.iter().enumerate() {
        let sx = 1.0 + p[0] * xi[0];
        let sy = 1.0 + p[1] * xi[1];
        n[a] = 0.25 * sx * sy;
        dn[a] = [0.25 * p[0] * sy, 0.25 * p[1] * sx];
    }
    (n, dn)
}

/// Physical position of reference point `xi`.
pub fn map_point(coords: &[[f64; 2]; 4], xi: [f64; 2]) -> [f64; 2] {
    let (n, _) = shape_eval(xi);
    let mut x = [0.0; 2];
    for a in 0..4 {
        x[0] += n[a] * coords[a][0];
        x[1] += n[a] * coords[a][1];
    }
    x
}

/// Returns `B` and the Jacobian determinant at `xi`. `element` is only used for error reporting.
pub fn strain_operator(coords: &[[f64; 2]; 4], xi: [f64; 2], element: usize) -> Result<(StrainOperator, f64)> {
    let (_, dn) = shape_eval(xi);
    let mut j = [[0.0; 2]; 2];
    for a in 0..4 {
        for r in 0..2 {
            for c in 0..2 {
                j[r][c] += dn[a][r] * coords[a][c];
            }
        }
    }
    let det_j = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    if !(det_j > 1e-14 * scale * scale) {
        return Err(Error::DegenerateElement { element, det_j });
    }
    let inv = [[j[1][1] / det_j, -j[0][1] / det_j], [-j[1][0] / det_j, j[0][0] / det_j]];
    let mut b = StrainOperator::zeros();
    for a in 0..4 {
        let dx = inv[0][0] * dn[a][0] + inv[0][1] * dn[a][1];
        let dy = inv[1][0] * dn[a][0] + inv[1][1] * dn[a][1];
        b[(0, 2 * a)] = dx;
        b[(1, 2 * a + 1)] = dy;
        b[(3, 2 * a)] = dy;
        b[(3, 2 * a + 1)] = dx;
    }
    Ok((b, det_j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SVector;
    use proptest::prelude::*;

    const UNIT: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

    fn nodal(f: impl Fn(f64, f64) -> [f64; 2]) -> SVector<f64, 8> {
        let mut u = SVector::<f64, 8>::zeros();
        for a in 0..4 {
            let v = f(UNIT[a][0], UNIT[a][1]);
            u[2 * a] = v[0];
            u[2 * a + 1] = v[1];
        }
        u
    }

    #[test]
    fn center_and_corner_values() {
        assert_eq!(shape_eval([0.0, 0.0]).0, [0.25; 4]);
        assert_eq!(shape_eval([-1.0, -1.0]).0, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rigid_translation_has_no_strain() {
        let (b, _) = strain_operator(&UNIT, [0.3, -0.2], 0).unwrap();
        let eps = b * nodal(|_, _| [0.7, -1.3]);
        assert!(eps.norm() < 1e-15);
    }

    #[test]
    fn uniform_stretch() {
        let (b, _) = strain_operator(&UNIT, [0.1, 0.4], 0).unwrap();
        let eps = b * nodal(|x, _| [x, 0.0]);
        assert!((eps - nalgebra::Vector4::new(1.0, 0.0, 0.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pure_shear() {
        // u_x = y: du_x/dy = 1, so the engineering shear is 1.
        let (b, _) = strain_operator(&UNIT, [-0.5, 0.5], 0).unwrap();
        let eps = b * nodal(|_, y| [y, 0.0]);
        assert!((eps - nalgebra::Vector4::new(0.0, 0.0, 0.0, 1.0)).norm() < 1e-14);
        assert!(eps[2] == 0.0);
    }

    #[test]
    fn collapsed_element_is_rejected() {
        let bad = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 0.0]];
        assert!(matches!(strain_operator(&bad, [0.0, 0.0], 7), Err(Error::DegenerateElement { element: 7, .. })));
    }

    proptest! {
        #[test]
        fn partition_of_unity(x in -1.0f64..=1.0, y in -1.0f64..=1.0) {
            let (n, dn) = shape_eval([x, y]);
            prop_assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let gx: f64 = dn.iter().map(|d| d[0]).sum();
            let gy: f64 = dn.iter().map(|d| d[1]).sum();
            prop_assert!(gx.abs() < 1e-15 && gy.abs() < 1e-15);
        }
    }
}
