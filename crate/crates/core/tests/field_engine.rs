use std::f64::consts::PI;

use proptest::prelude::*;
use ris_core::field::{
    incident_field, path_factor, propagate_chain, scatter_to_point, scatter_to_surface, ComplexFieldMap,
};
use ris_core::geometry::{build_grid, direction_between, to_cartesian};
use ris_core::*;

fn lam() -> Wavelength {
    Wavelength::from_frequency(3.4e9).unwrap()
}

/// `e^{-jkr}/r` written out independently of the engine.
fn green(a: Point3, b: Point3, k: f64) -> Complex64 {
    let r = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
    Complex64::new((k * r).cos(), -(k * r).sin()) / r
}

/// Two-hop matrix chain `g_rxᵀ Φ₂ G₂₁ Φ₁ e_inc`, with τ folded into Φ.
fn two_hop_matrix(sc: &Scenario, w1: &PhaseProfile, w2: &PhaseProfile) -> Complex64 {
    let k = sc.wavelength.wavenumber();
    let (b1, b2) = (&sc.chain[0], &sc.chain[1]);
    let e: Vec<Complex64> = b1.grid.positions().iter().map(|&p| sc.source.amplitude * green(sc.source.position, p, k)).collect();
    let phi1: Vec<Complex64> = w1.omegas().iter().map(|&w| Complex64::from_polar(b1.tau, w)).collect();
    let phi2: Vec<Complex64> = w2.omegas().iter().map(|&w| Complex64::from_polar(b2.tau, w)).collect();
    let g21: Vec<Vec<Complex64>> = b2
        .grid
        .positions()
        .iter()
        .map(|&m| b1.grid.positions().iter().map(|&n| green(n, m, k)).collect())
        .collect();
    let g_rx: Vec<Complex64> = b2.grid.positions().iter().map(|&m| green(m, sc.receiver, k)).collect();
    let x1: Vec<Complex64> = e.iter().zip(&phi1).map(|(a, b)| a * b).collect();
    let x2: Vec<Complex64> = g21.iter().map(|row| row.iter().zip(&x1).map(|(g, x)| g * x).sum()).collect();
    x2.iter().zip(&phi2).zip(&g_rx).map(|((x, p), g)| x * p * g).sum()
}

fn board(rows: usize, cols: usize, d: f64, at: Point3, frame: Frame) -> UnitGrid {
    build_grid(rows, cols, d, at, frame, Anchor::Center).unwrap()
}

prop_compose! {
    fn two_hop()(
        (r1, c1, r2, c2) in (1usize..=8, 1usize..=8, 1usize..=8, 1usize..=8),
        d in 0.02f64..0.08,
        off in (-2.0f64..2.0, -2.0f64..2.0, 0.6f64..3.0),
        src in (-1.0f64..1.0, -1.0f64..1.0, 1.0f64..4.0),
        rx in (-3.0f64..3.0, -3.0f64..3.0, -2.0f64..0.3),
        amp in (0.1f64..2.0, 0.0f64..6.3),
        tau in (0.2f64..1.0, 0.2f64..1.0),
        seed in any::<u64>(),
    ) -> (Scenario, PhaseProfile, PhaseProfile) {
        let g1 = board(r1, c1, d, Point3::ORIGIN, Frame::XY);
        let g2 = board(r2, c2, d, Point3::new(off.0, off.1, off.2), Frame::XY_DOWN);
        let source = SourceSpec::isotropic(Point3::new(src.0, src.1, src.2), Complex64::from_polar(amp.0, amp.1));
        let sc = Scenario::new(lam(), source, vec![RisNode::new(g1, tau.0), RisNode::new(g2, tau.1)], Point3::new(rx.0, rx.1, rx.2));
        let mut s = seed;
        let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * PI };
        let w1 = PhaseProfile::new((0..r1 * c1).map(|_| next()).collect());
        let w2 = PhaseProfile::new((0..r2 * c2).map(|_| next()).collect());
        (sc, w1, w2)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn iterative_chain_equals_matrix_form((sc, w1, w2) in two_hop()) {
        let got = propagate_chain(&sc, &[w1.clone(), w2.clone()]).unwrap().receiver;
        let want = two_hop_matrix(&sc, &w1, &w2);
        prop_assert!((got - want).norm() <= 1e-10 * want.norm().max(1e-300), "{got} vs {want}");
    }

    #[test]
    fn receiver_is_linear_in_source((sc, w1, w2) in two_hop(), c in (0.01f64..5.0, -PI..PI)) {
        let c = Complex64::from_polar(c.0, c.1);
        let base = propagate_chain(&sc, &[w1.clone(), w2.clone()]).unwrap().receiver;
        let mut scaled = sc.clone();
        scaled.source.amplitude *= c;
        let got = propagate_chain(&scaled, &[w1, w2]).unwrap().receiver;
        prop_assert!((got - base * c).norm() <= 1e-12 * (base * c).norm());
    }

    #[test]
    fn global_phase_on_one_board((sc, w1, w2) in two_hop(), delta in -PI..PI, which in 0usize..2) {
        let base = propagate_chain(&sc, &[w1.clone(), w2.clone()]).unwrap();
        let shifted = if which == 0 { vec![w1.shifted(delta), w2] } else { vec![w1, w2.shifted(delta)] };
        let got = propagate_chain(&sc, &shifted).unwrap();
        let want = base.receiver * Complex64::from_polar(1.0, delta);
        prop_assert!((got.receiver - want).norm() <= 1e-10 * want.norm());
        prop_assert!((got.received_power() - base.received_power()).abs() <= 1e-10 * base.received_power());
    }

    #[test]
    fn path_length_is_reciprocal(a in (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), b in (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0)) {
        let (a, b) = (Point3::new(a.0, a.1, a.2), Point3::new(b.0, b.1, b.2));
        prop_assume!(a.distance(b) > 1e-6);
        prop_assert_eq!(a.distance(b), b.distance(a));
        let k = lam().wavenumber();
        prop_assert_eq!(path_factor(a.distance(b), k), path_factor(b.distance(a), k));
    }

    #[test]
    fn spherical_round_trip(p in (-9.0f64..9.0, -9.0f64..9.0, -9.0f64..9.0), n in (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.0)) {
        let to = Point3::new(p.0, p.1, p.2);
        prop_assume!(to.norm() > 1e-3);
        let frame = Frame::new(Point3::new(n.0, n.1, n.2), Point3::new(1.0, 0.3, -0.2)).unwrap();
        let from = Point3::new(0.3, -0.1, 0.2);
        let (r, dir) = direction_between(from, to, &frame).unwrap();
        let back = to_cartesian(from, r, dir, &frame);
        prop_assert!((back - to).norm() <= 1e-12 * (to - from).norm().max(1.0));
    }

    #[test]
    fn anchor_moves_phase_not_positions(rows in 1usize..6, cols in 1usize..6, d in 0.01f64..0.2) {
        let c = board(rows, cols, d, Point3::new(0.4, 0.2, 0.0), Frame::XY);
        let f = c.with_anchor(Anchor::FirstUnit);
        for (a, b) in c.positions().iter().zip(f.positions()) {
            prop_assert!((*a - *b).norm() < 1e-12);
        }
    }

    #[test]
    fn chain_of_single_units_decays_as_product(r in (0.5f64..5.0, 0.5f64..5.0, 0.5f64..5.0)) {
        let g1 = board(1, 1, 0.04, Point3::ORIGIN, Frame::XY);
        let g2 = board(1, 1, 0.04, Point3::new(r.1, 0.0, 0.0), Frame::XY);
        let g3 = board(1, 1, 0.04, Point3::new(r.1, r.2, 0.0), Frame::XY);
        let src = SourceSpec::isotropic(Point3::new(0.0, 0.0, r.0), Complex64::new(1.0, 0.0));
        let rx = Point3::new(r.1, r.2, 1.0);
        let sc = Scenario::new(lam(), src, vec![RisNode::new(g1, 1.0), RisNode::new(g2, 1.0), RisNode::new(g3, 1.0)], rx);
        let z = || PhaseProfile::zeros(1);
        let e = propagate_chain(&sc, &[z(), z(), z()]).unwrap().receiver;
        prop_assert!((e.norm() - 1.0 / (r.0 * r.1 * r.2 * 1.0)).abs() < 1e-12 * e.norm());
    }
}

#[test]
fn four_by_four_two_hop_matches_matrix() {
    let g1 = board(4, 4, lam().half(), Point3::ORIGIN, Frame::XY);
    let g2 = board(4, 4, lam().half(), Point3::new(1.2, -0.3, 1.5), Frame::XY_DOWN);
    let src = SourceSpec::isotropic(Point3::new(-0.5, 0.2, 2.0), Complex64::new(0.3, 0.9));
    let sc = Scenario::new(lam(), src, vec![RisNode::new(g1, 0.9), RisNode::new(g2, 0.7)], Point3::new(2.5, 1.0, 0.0));
    let w1 = PhaseProfile::new((0..16).map(|i| (i as f64 * 1.7).sin() * 3.0).collect());
    let w2 = PhaseProfile::new((0..16).map(|i| (i as f64 * 0.37).cos() * 5.0).collect());
    let got = propagate_chain(&sc, &[w1.clone(), w2.clone()]).unwrap().receiver;
    let want = two_hop_matrix(&sc, &w1, &w2);
    assert!((got - want).norm() <= 1e-12 * want.norm());
}

#[test]
fn single_hop_chain_is_single_reflection() {
    let g = board(3, 5, lam().half(), Point3::ORIGIN, Frame::XY);
    let src = SourceSpec::isotropic(Point3::new(0.2, 0.1, 2.0), Complex64::new(1.0, 0.0));
    let rx = Point3::new(2.0, -1.0, 3.0);
    let w = PhaseProfile::new((0..15).map(|i| i as f64 * 0.4).collect());
    let sc = Scenario::new(lam(), src, vec![RisNode::new(g.clone(), 0.8)], rx);
    let chain = propagate_chain(&sc, std::slice::from_ref(&w)).unwrap().receiver;
    let k = lam().wavenumber();
    let direct: Complex64 = g
        .positions()
        .iter()
        .zip(w.omegas())
        .map(|(&p, &om)| Complex64::from_polar(0.8, om) * green(src.position, p, k) * green(p, rx, k))
        .sum();
    assert!((chain - direct).norm() <= 1e-12 * direct.norm());
}

#[test]
fn random_four_unit_term_by_term() {
    let g = board(2, 2, 0.05, Point3::new(0.1, 0.2, 0.0), Frame::XY);
    let inc = ComplexFieldMap::for_grid(
        &g,
        vec![Complex64::new(0.3, -0.4), Complex64::new(-1.1, 0.2), Complex64::new(0.05, 0.9), Complex64::new(0.7, 0.7)],
    )
    .unwrap();
    let w = PhaseProfile::new(vec![0.1, 2.3, 4.4, 5.9]);
    let obs = Point3::new(-0.7, 1.3, 2.2);
    let e = scatter_to_point(&inc, &w, 0.6, &g, obs, lam()).unwrap();
    let k = lam().wavenumber();
    let mut want = Complex64::new(0.0, 0.0);
    for n in 0..4 {
        let p = g.positions()[n];
        let r = p.distance(obs);
        let phase = w.omegas()[n] - k * r;
        want += inc.values()[n] * 0.6 * Complex64::new(phase.cos(), phase.sin()) / r;
    }
    assert!((e - want).norm() <= 1e-12 * want.norm());
}

#[test]
fn conjugate_profile_adds_magnitudes() {
    let g = board(4, 4, lam().half(), Point3::ORIGIN, Frame::XY);
    let src = SourceSpec::isotropic(Point3::new(0.3, 0.0, 1.5), Complex64::new(1.0, 0.0));
    let obs = Point3::new(-1.0, 0.5, 2.0);
    let k = lam().wavenumber();
    let w = PhaseProfile::new(g.positions().iter().map(|p| k * (p.distance(src.position) + p.distance(obs))).collect());
    let inc = incident_field(&src, &g, lam()).unwrap();
    let e = scatter_to_point(&inc, &w, 0.5, &g, obs, lam()).unwrap();
    let want: f64 = g.positions().iter().map(|p| 0.5 / (p.distance(src.position) * p.distance(obs))).sum();
    assert!((e.norm() - want).abs() < 1e-12 * want);
}

#[test]
fn one_unit_surface_equals_point() {
    let g = board(3, 3, 0.05, Point3::ORIGIN, Frame::XY);
    let next = board(1, 1, 0.05, Point3::new(0.4, 0.3, 1.1), Frame::XY_DOWN);
    let src = SourceSpec::isotropic(Point3::new(0.0, 0.0, 1.0), Complex64::new(1.0, 0.0));
    let inc = incident_field(&src, &g, lam()).unwrap();
    let w = PhaseProfile::new((0..9).map(|i| i as f64).collect());
    let s = scatter_to_surface(&inc, &w, 0.9, &g, &next, lam()).unwrap();
    let p = scatter_to_point(&inc, &w, 0.9, &g, next.positions()[0], lam()).unwrap();
    assert_eq!(s.values()[0], p);
}
