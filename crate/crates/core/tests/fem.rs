use approx::assert_relative_eq;
use mtpgd_core::element::{gauss_points, strain_operator};
use mtpgd_core::mesh::DirichletSet;
use mtpgd_core::{assemble_stiffness, Error, Material, Mesh, Voigt};
use nalgebra::{DMatrix, DVector, SMatrix};

fn clamp(mesh: &mut Mesh, name: &str, nodes: Vec<usize>) {
    mesh.add_dirichlet(DirichletSet { name: name.into(), nodes, mask: [true, true], lift: [0.0, 0.0] });
}

/// Stiffness of an axis-aligned `a x b` rectangle written out by hand:
/// shape function derivatives are `±(1 ± eta)/(2a)` and `±(1 ± xi)/(2b)`.
fn rectangle_stiffness(a: f64, b: f64, c: &nalgebra::Matrix4<f64>) -> SMatrix<f64, 8, 8> {
    let signs = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let g = 1.0 / 3f64.sqrt();
    let mut k = SMatrix::<f64, 8, 8>::zeros();
    for (xi, eta) in [(-g, -g), (g, -g), (g, g), (-g, g)] {
        let mut bm = SMatrix::<f64, 4, 8>::zeros();
        for (n, (sx, sy)) in signs.iter().enumerate() {
            let dx = sx * (1.0 + sy * eta) / (2.0 * a);
            let dy = sy * (1.0 + sx * xi) / (2.0 * b);
            bm[(0, 2 * n)] = dx;
            bm[(1, 2 * n + 1)] = dy;
            bm[(3, 2 * n)] = dy;
            bm[(3, 2 * n + 1)] = dx;
        }
        k += bm.transpose() * c * bm * (a * b / 4.0);
    }
    k
}

#[test]
fn single_element_matches_hand_assembly() {
    let mesh = Mesh::rectangle(1, 1, [0.0, 0.0], [2.0, 0.5]);
    let mut fixed = mesh.clone();
    clamp(&mut fixed, "left", vec![0, 2]);
    let sys = assemble_stiffness(&fixed, &Material::steel()).unwrap();
    let expected = rectangle_stiffness(2.0, 0.5, &sys.elastic);
    let el = mesh.elements[0];
    let dof = |r: usize| 2 * el[r / 2] + r % 2;
    for r in 0..8 {
        for s in 0..8 {
            assert_relative_eq!(sys.k_full()[(dof(r), dof(s))], expected[(r, s)], epsilon = 1e-9, max_relative = 1e-12);
        }
    }
}

#[test]
fn gauss_weights_integrate_the_area() {
    let coords = [[0.0, 0.0], [3.0, 0.2], [2.5, 2.0], [-0.5, 1.5]];
    let area: f64 = gauss_points().iter().map(|&xi| strain_operator(&coords, xi, 0).unwrap().1).sum();
    // shoelace formula
    let shoelace = 0.5
        * (0..4)
            .map(|i| {
                let (p, q) = (coords[i], coords[(i + 1) % 4]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum::<f64>();
    assert_relative_eq!(area, shoelace, max_relative = 1e-14);
}

#[test]
fn inverted_element_is_reported() {
    let mesh = Mesh::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2, 3]]);
    let mut m = mesh;
    clamp(&mut m, "a", vec![0, 1]);
    match assemble_stiffness(&m, &Material::steel()) {
        Err(Error::DegenerateElement { element, .. }) => assert_eq!(element, 0),
        other => panic!("unexpected {:?}", other.err()),
    }
}

/// Linear displacement field used by the patch test.
fn linear_field(p: [f64; 2]) -> [f64; 2] {
    [1e-3 + 2e-3 * p[0] - 5e-4 * p[1], -2e-4 + 7e-4 * p[0] + 1.5e-3 * p[1]]
}

#[test]
fn patch_test_with_distorted_interior_node() {
    let mut mesh = Mesh::rectangle(2, 2, [0.0, 0.0], [2.0, 2.0]);
    mesh.nodes[4] = [1.13, 0.78];
    for n in mesh.boundary_nodes() {
        let lift = linear_field(mesh.nodes[n]);
        mesh.add_dirichlet(DirichletSet { name: format!("n{n}"), nodes: vec![n], mask: [true, true], lift });
    }
    let sys = assemble_stiffness(&mesh, &Material::steel()).unwrap();
    assert_eq!(sys.n_free(), 2);
    let u = sys.static_solve(1.0, None);
    let exact = linear_field(mesh.nodes[4]);
    assert_relative_eq!(u[8], exact[0], max_relative = 1e-10);
    assert_relative_eq!(u[9], exact[1], max_relative = 1e-10);
    let eps = Voigt::new(2e-3, 1.5e-3, 0.0, -5e-4 + 7e-4);
    for e in sys.gauss_strains(u.as_slice()) {
        assert!((e - eps).norm() <= 1e-10 * eps.norm(), "{e:?}");
    }
}

#[test]
fn rigid_modes_are_annihilated() {
    let mut mesh = Mesh::rectangle(3, 2, [0.0, 0.0], [3.0, 2.0]);
    mesh.nodes[5] = [1.2, 0.9];
    let mut fixed = mesh.clone();
    clamp(&mut fixed, "left", vec![0, 4, 8]);
    let sys = assemble_stiffness(&fixed, &Material::steel()).unwrap();
    let k = sys.k_full();
    let n = mesh.n_nodes();
    let modes = [
        DVector::from_fn(2 * n, |d, _| if d % 2 == 0 { 1.0 } else { 0.0 }),
        DVector::from_fn(2 * n, |d, _| if d % 2 == 1 { 1.0 } else { 0.0 }),
        DVector::from_fn(2 * n, |d, _| {
            let p = mesh.nodes[d / 2];
            if d % 2 == 0 {
                -p[1]
            } else {
                p[0]
            }
        }),
    ];
    for m in &modes {
        assert!((k * m).norm() <= 1e-10 * k.norm() * m.norm());
    }
    let eig = k.clone().symmetric_eigen();
    let vmax = eig.eigenvalues.amax();
    assert_eq!(eig.eigenvalues.iter().filter(|v| v.abs() < 1e-10 * vmax).count(), 3);
}

#[test]
fn uniform_plastic_strain_loads_only_the_boundary() {
    let mut mesh = Mesh::rectangle(3, 3, [0.0, 0.0], [3.0, 3.0]);
    mesh.nodes[5] = [1.1, 0.95];
    mesh.nodes[10] = [1.9, 2.1];
    let boundary: Vec<usize> = mesh.boundary_nodes().into_iter().collect();
    clamp(&mut mesh, "boundary", boundary);
    let sys = assemble_stiffness(&mesh, &Material::steel()).unwrap();
    assert_eq!(sys.n_free(), 8);
    let ep = Voigt::new(1e-3, -4e-4, -6e-4, 3e-4);
    let f = sys.internal_force_from_state(&vec![ep; sys.n_gauss()]).unwrap();
    // one Gauss point contribution sets the scale
    let g = &sys.gauss[0];
    let scale = (g.b.transpose() * (sys.elastic * ep) * g.weight).norm();
    assert!(f.norm() <= 1e-10 * scale, "{}", f.norm());
}

#[test]
fn single_gauss_point_force() {
    let mut mesh = Mesh::rectangle(2, 1, [0.0, 0.0], [2.0, 1.0]);
    clamp(&mut mesh, "left", vec![0, 3]);
    let sys = assemble_stiffness(&mesh, &Material::steel()).unwrap();
    let target = 6;
    let ep = Voigt::new(2e-3, -1e-3, -1e-3, 5e-4);
    let mut state = vec![Voigt::zeros(); sys.n_gauss()];
    state[target] = ep;
    let f = sys.internal_force_from_state(&state).unwrap();
    let g = &sys.gauss[target];
    let fe = g.b.transpose() * (sys.elastic * ep) * g.weight;
    let mut expected = DVector::zeros(sys.n_free());
    for (r, &d) in sys.element_dofs[g.element].iter().enumerate() {
        if let Some(i) = sys.dof_index[d] {
            expected[i] += fe[r];
        }
    }
    assert_eq!(f, expected);
    assert!(sys.internal_force_from_state(&state[1..]).is_err());
}

#[test]
fn lifting_and_load_vector_are_consistent() {
    let mut mesh = Mesh::rectangle(4, 2, [0.0, 0.0], [4.0, 1.0]);
    mesh.add_dirichlet(DirichletSet { name: "left".into(), nodes: vec![0, 5, 10], mask: [true, true], lift: [-1.0, 0.0] });
    mesh.add_dirichlet(DirichletSet { name: "right".into(), nodes: vec![4, 9, 14], mask: [true, true], lift: [1.0, 0.0] });
    let sys = assemble_stiffness(&mesh, &Material::steel()).unwrap();
    let u = sys.static_solve(0.01, None);
    // full residual vanishes on the free dofs
    let r: DMatrix<f64> = sys.k_full() * DMatrix::from_column_slice(u.len(), 1, u.as_slice());
    for &d in &sys.free_dofs {
        assert!(r[d].abs() <= 1e-9 * sys.k_full().amax() * 0.01);
    }
    assert_eq!(u[0], -0.01);
    assert_eq!(u[8], 0.01);
    // symmetric stretch: the middle column does not move in x
    assert!(u[4].abs() < 1e-14 && u[14].abs() < 1e-14 && u[24].abs() < 1e-14);
}
