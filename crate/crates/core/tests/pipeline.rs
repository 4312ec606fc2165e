use eshelby_core::ferrers::newtonian_ellipsoid;
use eshelby_core::fit::quadratic_fit;
use eshelby_core::inverse::ellipsoid_from_hessian;
use eshelby_core::linalg::rotation_from_euler_deg;
use eshelby_core::materials::{classify_eigenstress, material_constants, LameMaterial};
use eshelby_core::shape::Ellipsoid;
use eshelby_core::{Mat3, Vec3};

// closed-form potential → sampled → fitted → inverted back to the same shape
#[test]
fn ellipsoid_survives_fit_and_inversion() {
    let rot = rotation_from_euler_deg([20.0, 35.0, -10.0]);
    let e = Ellipsoid::new(Vec3::new(0.1, -0.2, 0.3), Vec3::new(1.0, 0.7, 0.4), rot).unwrap();
    let n = newtonian_ellipsoid(&e).unwrap();

    let mut pts = Vec::new();
    for i in -3..=3 {
        for j in -3..=3 {
            for k in -3..=3 {
                let local = Vec3::new(i as f64 * 0.12, j as f64 * 0.09, k as f64 * 0.05);
                pts.push(e.center + rot * local);
            }
        }
    }
    let vals: Vec<f64> = pts.iter().map(|x| n.eval(x)).collect();
    let fit = quadratic_fit(&pts, &vals).unwrap();
    assert!(fit.fit_rms < 1e-9, "{}", fit.fit_rms);
    assert!((fit.laplacian() - 1.0).abs() < 1e-9);

    let back = ellipsoid_from_hessian(&fit.hessian(), e.center, 1.0).unwrap();
    assert!((back.semi_axes - e.semi_axes).amax() < 1e-6, "{:?}", back.semi_axes);
    let frame_err = (back.rotation.transpose() * rot).abs() - Mat3::identity();
    assert!(frame_err.amax() < 1e-6);
}

#[test]
fn classified_eigenstress_feeds_material_constants() {
    let rot = rotation_from_euler_deg([10.0, 50.0, 80.0]);
    let sigma = rot * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 2.0)) * rot.transpose();
    let es = classify_eigenstress(&sigma, 1e-9).unwrap();
    let (k1, k3) = es.two_equal().unwrap();
    let k3_axis = es.principal_frame.column(2).into_owned();
    assert!((rot.column(2).dot(&k3_axis).abs() - 1.0).abs() < 1e-9);
    let m = LameMaterial::new(1.0, 1.0).unwrap();
    let c = material_constants(&m, k1, k3).unwrap();
    assert!((c.alpha - 0.5).abs() < 1e-12);
    assert!((c.beta - 2.0).abs() < 1e-12);
    assert!(c.gamma.abs() < 1e-12);
    assert!((c.eta + 3.0).abs() < 1e-12);
}
