use syz_core::monge::{
    hessian_duality_check, hessian_duality_check_within, involution_error, legendre, ma_residual, observed_orders,
    ConvexGridFunction, GridBox, MongeError,
};
use syz_core::rational::{q, qi, Q};

fn gb(lo: &[Q], hi: &[Q], h: Q) -> GridBox {
    GridBox::new(lo.to_vec(), hi.to_vec(), h).unwrap()
}

fn quartic(h: Q) -> ConvexGridFunction {
    ConvexGridFunction::sample(gb(&[q(1, 2)], &[qi(1)], h), |x| x[0].powi(4) / 4.0).unwrap()
}

fn ma_solution(h: Q) -> ConvexGridFunction {
    ConvexGridFunction::sample(gb(&[q(-1, 2), qi(1)], &[q(1, 2), qi(2)], h), |x| x[0] * x[0] / (2.0 * x[1]) + x[1].powi(3) / 6.0)
        .unwrap()
}

#[test]
fn quartic_conjugate_matches_closed_form() {
    let h = q(1, 32);
    let kh = legendre(&quartic(h.clone()), &gb(&[q(1, 4)], &[q(7, 8)], h)).unwrap();
    for i in kh.interior_nodes() {
        let y = kh.node(&i)[0];
        assert!((kh.value(&i) - 0.75 * y.powf(4.0 / 3.0)).abs() < 1e-10);
    }
}

#[test]
fn quartic_involution_and_duality_converge() {
    let mut inv = Vec::new();
    let mut dets = Vec::new();
    for s in 0..3 {
        let h = q(1, 16 << s);
        let hf = 1.0 / (16 << s) as f64;
        let k = quartic(h.clone());
        let e = involution_error(&k, &gb(&[q(1, 4)], &[q(7, 8)], h.clone()), &gb(&[q(11, 16)], &[q(15, 16)], h.clone())).unwrap();
        let kh = legendre(&k, &gb(&[q(1, 4)], &[q(7, 8)], h)).unwrap();
        let d = hessian_duality_check_within(&k, &kh, &[0.68], &[0.93]).unwrap();
        assert!(e <= hf * hf && d.det_error <= hf * hf, "h = {hf}: {e} {}", d.det_error);
        inv.push(e);
        dets.push(d.det_error);
    }
    for o in observed_orders(&inv).into_iter().chain(observed_orders(&dets)) {
        assert!(o >= 1.8, "orders {:?} {:?}", observed_orders(&inv), observed_orders(&dets));
    }
}

#[test]
fn quadratic_families_are_exact_to_roundoff() {
    let k = ConvexGridFunction::sample(gb(&[qi(-1), qi(-1)], &[qi(1), qi(1)], q(1, 16)), |x| x[0] * x[0] + 0.25 * x[1] * x[1]).unwrap();
    let dual = gb(&[qi(-1), q(-1, 4)], &[qi(1), q(1, 4)], q(1, 16));
    let e = involution_error(&k, &dual, &gb(&[q(-3, 8), q(-3, 8)], &[q(3, 8), q(3, 8)], q(1, 16))).unwrap();
    assert!(e < 1e-12);
    let kh = legendre(&k, &dual).unwrap();
    let r = hessian_duality_check(&k, &kh).unwrap();
    assert!(r.det_error < 1e-10 && r.metric_error < 1e-10);
    assert!(ma_residual(&k) < 1e-10 && ma_residual(&kh) < 1e-10);
    // ½x₁² + φ(x₂) with φ'' ≡ 3.
    let p = ConvexGridFunction::sample(gb(&[qi(0), qi(0)], &[qi(1), qi(1)], q(1, 16)), |x| 0.5 * x[0] * x[0] + 1.5 * x[1] * x[1] - x[1]).unwrap();
    assert!(ma_residual(&p) < 1e-9);
}

#[test]
fn dual_of_ma_solution_solves_ma() {
    let mut res = Vec::new();
    for s in 0..3 {
        let h = q(1, 8 << s);
        let hf = 1.0 / (8 << s) as f64;
        let k = ma_solution(h.clone());
        assert!(ma_residual(&k) <= hf * hf);
        let kh = legendre(&k, &gb(&[q(-1, 4), q(3, 4)], &[q(1, 4), q(3, 2)], h)).unwrap();
        let r = ma_residual(&kh);
        assert!(r <= 10.0 * hf * hf, "h = {hf}: {r}");
        let d = hessian_duality_check_within(&k, &kh, &[-0.15, 1.35], &[0.15, 1.6]).unwrap();
        assert!(d.det_error <= hf * hf);
        res.push(d.det_error);
    }
    assert!(observed_orders(&res).iter().all(|&o| o >= 1.8), "{:?}", observed_orders(&res));
}

#[test]
fn conjugation_reverses_order() {
    let grid = gb(&[qi(-1)], &[qi(1)], q(1, 32));
    let dual = gb(&[q(-1, 2)], &[q(1, 2)], q(1, 32));
    let small = ConvexGridFunction::sample(grid.clone(), |x| 0.5 * x[0] * x[0]).unwrap();
    let big = ConvexGridFunction::sample(grid, |x| 0.5 * x[0] * x[0] + 0.1 * x[0].powi(4) + 0.05).unwrap();
    let (a, b) = (legendre(&small, &dual).unwrap(), legendre(&big, &dual).unwrap());
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| x >= y));
}

#[test]
fn nonconvex_and_outside_range_rejected() {
    let bad = ConvexGridFunction::sample(gb(&[qi(0)], &[qi(1)], q(1, 16)), |x| (6.0 * x[0]).sin());
    assert!(matches!(bad, Err(MongeError::NotConvex(..))));
    let k = quartic(q(1, 16));
    assert!(matches!(legendre(&k, &gb(&[qi(0)], &[qi(1)], q(1, 16))), Err(MongeError::DualBoxOutsideGradientRange(..))));
    let e = involution_error(&k, &gb(&[q(1, 4)], &[q(7, 8)], q(1, 16)), &gb(&[q(11, 16)], &[q(15, 16)], q(1, 48)));
    assert!(matches!(e, Err(MongeError::DomainMismatch(_))));
}
