//! Invariance of node invariants under changes of coordinates.

use nalgebra::{Matrix2, Matrix4};
use proptest::prelude::*;
use umbilic_core::invariants::{index_hyperbonode, rho_ellipnode, rho_hyperbonode};
use umbilic_core::{ExtendedReal, MongeJet, PrenormalForm, ProjectiveMap};

fn finite(r: umbilic_core::Result<ExtendedReal>) -> f64 {
    match r.unwrap() {
        ExtendedReal::Finite(v) => v,
        ExtendedReal::Infinite => panic!("unexpected infinite rho"),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn generic(h: &PrenormalForm) -> bool {
    (h.i * h.j).abs() > 0.05 && (h.i * h.j - h.a * h.b).abs() > 1e-3
}

fn param() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rotation_and_scaling_preserve_rho_and_index(
        a in param(), b in param(), i in param(), j in param(),
        angle in 0.0..std::f64::consts::TAU, s in 0.3..3.0f64, z in 0.3..3.0f64,
    ) {
        let h = PrenormalForm::new(a, b, i, j);
        prop_assume!(generic(&h));
        let jet = h.jet();
        let (c, sn) = (angle.cos(), angle.sin());
        let m = Matrix2::new(s * c, -s * sn, s * sn, s * c);
        let moved = jet.linear_change(&m, z).unwrap();
        prop_assert!(close(finite(rho_hyperbonode(&jet, 0.0, 0.0)), finite(rho_hyperbonode(&moved, 0.0, 0.0)), 1e-8));
        prop_assert_eq!(index_hyperbonode(&jet, 0.0, 0.0).unwrap(), index_hyperbonode(&moved, 0.0, 0.0).unwrap());
    }

    #[test]
    fn orientation_reversal_preserves_rho_and_index(a in param(), b in param(), i in param(), j in param()) {
        let h = PrenormalForm::new(a, b, i, j);
        prop_assume!(generic(&h));
        let jet = h.jet();
        for image in [jet.swapped(), jet.negated()] {
            prop_assert!(close(finite(rho_hyperbonode(&jet, 0.0, 0.0)), finite(rho_hyperbonode(&image, 0.0, 0.0)), 1e-9));
            prop_assert_eq!(index_hyperbonode(&jet, 0.0, 0.0).unwrap(), index_hyperbonode(&image, 0.0, 0.0).unwrap());
        }
    }

    #[test]
    fn translated_node_keeps_rho(a in param(), b in param(), i in param(), j in param(), x0 in -0.5..0.5f64, y0 in -0.5..0.5f64) {
        let h = PrenormalForm::new(a, b, i, j);
        prop_assume!(generic(&h));
        let jet = h.jet();
        // g(x, y) = f(x - x0, y - y0) has the node at (x0, y0).
        let moved = jet.translate_regraph(-x0, -y0);
        let expected = 1.0 - a * b / (i * j);
        prop_assert!(close(finite(rho_hyperbonode(&moved, x0, y0)), expected, 1e-8));
    }

    #[test]
    fn projective_maps_preserve_rho(
        a in param(), b in param(), i in param(), j in param(),
        entries in proptest::collection::vec(-0.3..0.3f64, 12),
    ) {
        let h = PrenormalForm::new(a, b, i, j);
        prop_assume!(generic(&h));
        let mut m = Matrix4::identity();
        for (k, e) in entries.iter().enumerate() {
            m[(k / 3, k % 3)] += e;
        }
        let Ok(map) = ProjectiveMap::new(m) else { return Ok(()) };
        let jet = h.jet();
        let image = jet.project_regraph(&map).unwrap();
        prop_assert!(close(finite(rho_hyperbonode(&jet, 0.0, 0.0)), finite(rho_hyperbonode(&image, 0.0, 0.0)), 1e-7));
        prop_assert_eq!(index_hyperbonode(&jet, 0.0, 0.0).unwrap(), index_hyperbonode(&image, 0.0, 0.0).unwrap());
    }

    #[test]
    fn ellipnode_rho_is_chart_independent(
        f31 in param(), f40 in 0.5..2.0f64, f04 in 0.5..2.0f64,
        angle in 0.0..std::f64::consts::TAU, s in 0.5..2.0f64,
    ) {
        let jet = MongeJet::from_derivatives(
            5,
            &[(2, 0, 1.0), (0, 2, 1.0), (4, 0, f40), (3, 1, f31), (0, 4, f04)],
        ).unwrap();
        let (c, sn) = (angle.cos(), angle.sin());
        let moved = jet.linear_change(&Matrix2::new(s * c, -s * sn, s * sn, s * c), 1.0).unwrap();
        let before = rho_ellipnode(&jet, 0.0, 0.0).unwrap();
        let after = rho_ellipnode(&moved, 0.0, 0.0).unwrap();
        prop_assert!(close(before, after, 1e-9), "{} vs {}", before, after);
    }
}
