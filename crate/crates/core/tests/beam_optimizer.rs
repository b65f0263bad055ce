use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_core::beam::*;
use ris_core::field::{incident_field, propagate_chain, scatter_to_point, scatter_to_surface, ComplexFieldMap};
use ris_core::geometry::build_grid;
use ris_core::aperture::illumination_efficiency;
use ris_core::*;

fn lam() -> Wavelength {
    Wavelength::from_frequency(3.4e9).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_channels(r: &mut ChaCha8Rng, z: usize, n: usize) -> MaxMinProblem {
    let ch = (0..z)
        .map(|_| (0..n).map(|_| Complex64::from_polar(r.gen_range(0.2..1.0), r.gen_range(0.0..2.0 * PI))).collect())
        .collect();
    MaxMinProblem::new(ch).unwrap()
}

/// Best minimum power over all `4^n` two-bit profiles.
fn exhaustive_two_bit(p: &MaxMinProblem) -> f64 {
    let n = p.units();
    let levels: Vec<Complex64> = (0..4).map(|q| Complex64::from_polar(1.0, q as f64 * PI / 2.0)).collect();
    let mut best = 0.0f64;
    let mut code = vec![0usize; n];
    loop {
        let m = p
            .channels()
            .iter()
            .map(|h| h.iter().zip(&code).map(|(c, &q)| c * levels[q]).sum::<Complex64>().norm_sqr())
            .fold(f64::INFINITY, f64::min);
        best = best.max(m);
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            code[i] += 1;
            if code[i] < 4 {
                break;
            }
            code[i] = 0;
            i += 1;
        }
    }
}

fn random_board(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> UnitGrid {
    build_grid(rows, cols, lam().half(), Point3::new(r.gen_range(-0.2..0.2), r.gen_range(-0.2..0.2), 0.0), Frame::XY, Anchor::Center).unwrap()
}

fn random_point(r: &mut ChaCha8Rng) -> Point3 {
    Point3::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(0.5..3.0))
}

#[test]
fn single_beam_sums_term_magnitudes() {
    let mut r = rng(11);
    for _ in 0..20 {
        let g = random_board(&mut r, 2, 3);
        let src = SourceSpec::isotropic(random_point(&mut r), Complex64::from_polar(1.3, r.gen_range(0.0..6.0)));
        let target = random_point(&mut r);
        let inc = incident_field(&src, &g, lam()).unwrap();
        let w = single_beam_phases(src.position, target, &g, lam()).unwrap();
        let e = scatter_to_point(&inc, &w, 0.7, &g, target, lam()).unwrap();
        let want: f64 = inc.values().iter().zip(g.positions()).map(|(c, p)| 0.7 * c.norm() / p.distance(target)).sum();
        assert!((e.norm() - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn quantized_conjugate_is_near_best_two_bit_profile() {
    let mut r = rng(12);
    for _ in 0..10 {
        let g = random_board(&mut r, 2, 3);
        let src = SourceSpec::isotropic(random_point(&mut r), Complex64::new(1.0, 0.0));
        let target = random_point(&mut r);
        let inc = incident_field(&src, &g, lam()).unwrap();
        let w = single_beam_phases(src.position, target, &g, lam()).unwrap();
        let problem = MaxMinProblem::from_incident(&inc, 1.0, &g, &[target], lam()).unwrap();
        let cont = problem.min_power(w.omegas());
        let quant = problem.min_power(quantize(&w, 2).unwrap().omegas());
        let best = exhaustive_two_bit(&problem);
        assert!(best <= cont * (1.0 + 1e-12));
        assert!(quant <= best * (1.0 + 1e-12));
        assert!(10.0 * (best / quant).log10() < 1.0, "{quant} vs {best}");
    }
}

#[test]
fn last_board_co_phases_arbitrary_field() {
    let mut r = rng(13);
    let g = random_board(&mut r, 2, 2);
    let inc = ComplexFieldMap::for_grid(&g, (0..4).map(|_| Complex64::from_polar(r.gen_range(0.1..2.0), r.gen_range(0.0..6.3))).collect()).unwrap();
    let ue = random_point(&mut r);
    let w = last_ris_phases(&inc, ue, &g, lam()).unwrap();
    let e = scatter_to_point(&inc, &w, 0.9, &g, ue, lam()).unwrap();
    let want: f64 = inc.values().iter().zip(g.positions()).map(|(c, p)| 0.9 * c.norm() / p.distance(ue)).sum();
    assert!((e.norm() - want).abs() <= 1e-12 * want);
}

#[test]
fn last_board_beats_every_two_bit_profile() {
    let mut r = rng(14);
    let g = random_board(&mut r, 2, 3);
    let inc = ComplexFieldMap::for_grid(&g, (0..6).map(|_| Complex64::from_polar(r.gen_range(0.1..2.0), r.gen_range(0.0..6.3))).collect()).unwrap();
    let ue = random_point(&mut r);
    let w = last_ris_phases(&inc, ue, &g, lam()).unwrap();
    let problem = MaxMinProblem::from_incident(&inc, 1.0, &g, &[ue], lam()).unwrap();
    assert!(exhaustive_two_bit(&problem) <= problem.min_power(w.omegas()) * (1.0 + 1e-12));
}

#[test]
fn uniform_field_reduces_to_path_conjugation() {
    let g = build_grid(3, 3, lam().half(), Point3::ORIGIN, Frame::XY, Anchor::Center).unwrap();
    let c = Complex64::from_polar(0.5, 1.1);
    let inc = ComplexFieldMap::for_grid(&g, vec![c; 9]).unwrap();
    let ue = Point3::new(1.0, 0.5, 2.0);
    let w = last_ris_phases(&inc, ue, &g, lam()).unwrap();
    let k = lam().wavenumber();
    let base = ris_core::geometry::wrap_angle(w.omegas()[0] - k * g.positions()[0].distance(ue));
    for (om, p) in w.omegas().iter().zip(g.positions()) {
        let d = ris_core::geometry::wrap_angle(om - k * p.distance(ue) - base);
        assert!(d.min(2.0 * PI - d) < 1e-9);
    }
}

#[test]
fn one_target_recovers_conjugate_power() {
    let mut r = rng(15);
    for _ in 0..10 {
        let p = random_channels(&mut r, 1, 32);
        let conj: f64 = p.channels()[0].iter().map(|c| c.norm()).sum::<f64>().powi(2);
        let res = solve_max_min(&p, &SolverConfig::default());
        assert!(res.min_power >= conj * (1.0 - 1e-3));
        assert!(res.converged);
    }
}

#[test]
fn max_min_dominates_exhaustive_two_bit() {
    let mut r = rng(16);
    let cfg = SolverConfig::default();
    for i in 0..10 {
        let p = random_channels(&mut r, 3, 8);
        let res = solve_max_min(&p, &cfg);
        let best = exhaustive_two_bit(&p);
        assert!(res.min_power >= best, "instance {i}: {} < {best}", res.min_power);
        let m = p.min_power(res.phases.omegas());
        assert!((m - res.min_power).abs() <= 1e-12 * m);
        assert!(res.powers.iter().all(|&v| v >= res.min_power));
    }
}

#[test]
fn trace_is_non_decreasing_and_seeded_runs_repeat() {
    let mut r = rng(17);
    let p = random_channels(&mut r, 5, 24);
    let cfg = SolverConfig { restarts: 4, ..SolverConfig::default() };
    let a = solve_max_min(&p, &cfg);
    let b = solve_max_min(&p, &cfg);
    assert!(a.trace.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(a.phases.omegas(), b.phases.omegas());
    assert_eq!(a, b);
    for k in 0..cfg.restarts {
        let o = solve_restart(&p, &cfg, k);
        assert!(o.trace.windows(2).all(|w| w[1] >= w[0]));
        let last = *o.trace.last().unwrap();
        assert!((last - o.min_power).abs() <= 1e-12 * last, "{last} vs {}", o.min_power);
    }
}

#[test]
fn merge_is_independent_of_completion_order() {
    let mut r = rng(18);
    let p = random_channels(&mut r, 4, 16);
    let cfg = SolverConfig { restarts: 5, ..SolverConfig::default() };
    let serial = solve_max_min(&p, &cfg);
    let reversed: Vec<_> = (0..cfg.restarts).rev().map(|k| solve_restart(&p, &cfg, k)).collect();
    assert_eq!(merge_restarts(&p, &cfg, reversed).unwrap(), serial);
}

#[test]
fn one_bit_loss_bound() {
    let mut r = rng(19);
    let g = build_grid(8, 8, lam().half(), Point3::ORIGIN, Frame::XY, Anchor::Center).unwrap();
    for _ in 0..5 {
        let src = SourceSpec::isotropic(random_point(&mut r), Complex64::new(1.0, 0.0));
        let target = random_point(&mut r);
        let inc = incident_field(&src, &g, lam()).unwrap();
        let w = last_ris_phases(&inc, target, &g, lam()).unwrap();
        let p = MaxMinProblem::from_incident(&inc, 1.0, &g, &[target], lam()).unwrap();
        let cont = p.min_power(w.omegas());
        // Received power ignores a common phase; pick the best one before snapping.
        let best = (0..64)
            .map(|i| p.min_power(quantize(&w.shifted(i as f64 * PI / 32.0), 1).unwrap().omegas()))
            .fold(0.0f64, f64::max);
        let loss = 10.0 * (cont / best).log10();
        assert!(loss <= 3.92, "{loss}");
    }
}

#[test]
fn two_bit_end_to_end_loss_within_one_db() {
    let mut r = rng(20);
    for n in [8usize, 10, 12, 16] {
        let g = build_grid(n, n, lam().half(), Point3::ORIGIN, Frame::XY, Anchor::Center).unwrap();
        for _ in 0..3 {
            let src = SourceSpec::isotropic(random_point(&mut r), Complex64::new(1.0, 0.0));
            let rx = random_point(&mut r);
            let node = RisNode::new(g.clone(), 1.0);
            let sc = Scenario::new(lam(), src, vec![node.clone()], rx);
            let cont = propagate_chain(&sc, &configure_chain(&sc).unwrap().profiles).unwrap().received_power();
            let sq = Scenario::new(lam(), src, vec![node.with_bits(Some(2))], rx);
            let prof = configure_chain(&sq).unwrap().profiles;
            assert_eq!(prof[0].quantization_bits(), Some(2));
            let q = propagate_chain(&sq, &prof).unwrap().received_power();
            let loss = 10.0 * (cont / q).log10();
            assert!((0.0..=1.0).contains(&loss), "{n}×{n}: {loss} dB");
        }
    }
}

fn two_boards(n: usize, at: Point3) -> (UnitGrid, UnitGrid) {
    let l = lam();
    (
        build_grid(n, n, l.half(), Point3::ORIGIN, Frame::XY, Anchor::Center).unwrap(),
        build_grid(n, n, l.half(), at, Frame::XY_DOWN, Anchor::Center).unwrap(),
    )
}

#[test]
fn one_hop_chain_uses_last_board_rule() {
    let g = build_grid(4, 4, lam().half(), Point3::ORIGIN, Frame::XY, Anchor::Center).unwrap();
    let src = SourceSpec::isotropic(Point3::new(0.0, 0.0, 2.0), Complex64::new(1.0, 0.0));
    let rx = Point3::new(1.0, 0.0, 1.0);
    let sc = Scenario::new(lam(), src, vec![RisNode::new(g.clone(), 1.0)], rx);
    let cfg = configure_chain(&sc).unwrap();
    let inc = incident_field(&src, &g, lam()).unwrap();
    assert_eq!(cfg.profiles, vec![last_ris_phases(&inc, rx, &g, lam()).unwrap()]);
    assert_eq!(cfg.hops[0].strategy, HopStrategy::Receiver);
}

#[test]
fn over_illuminated_hop_is_single_beam() {
    let (g1, g2) = two_boards(16, Point3::new(5.0, 0.0, 5.0));
    let src = SourceSpec::isotropic(Point3::new(0.0, 0.0, 3.0), Complex64::new(1.0, 0.0));
    let sc = Scenario::new(lam(), src, vec![RisNode::new(g1.clone(), 1.0), RisNode::new(g2.clone(), 1.0)], Point3::new(5.0, 0.0, 0.0));
    let cfg = configure_chain(&sc).unwrap();
    assert_eq!(cfg.hops[0].link.unwrap().primary.class.kind, Illumination::Over);
    assert_eq!(cfg.hops[0].strategy, HopStrategy::SingleBeam);
    assert_eq!(cfg.profiles[0], single_beam_phases(src.position, g2.center(), &g1, lam()).unwrap());
}

/// 16×16 boards 0.71 m apart: strongly partial in both cuts.
fn partial_scenario(mode: BeamMode) -> Scenario {
    let (g1, g2) = two_boards(16, Point3::new(0.5, 0.0, 0.5));
    let src = SourceSpec::isotropic(Point3::new(0.0, 0.0, 3.0), Complex64::new(1.0, 0.0));
    let mut sc = Scenario::new(lam(), src, vec![RisNode::new(g1, 1.0), RisNode::new(g2, 1.0)], Point3::new(4.0, 0.0, 0.0)).with_mode(mode);
    sc.solver.restarts = 4;
    sc
}

#[test]
fn partial_hop_is_fairer_and_more_uniform() {
    let multi = partial_scenario(BeamMode::MultiBeam);
    let single = partial_scenario(BeamMode::SingleBeam);
    let cm = configure_chain(&multi).unwrap();
    let cs = configure_chain(&single).unwrap();
    let hop = &cm.hops[0];
    assert_eq!(hop.strategy, HopStrategy::MultiBeam);
    let plan = hop.plan.as_ref().unwrap();
    assert!(plan.z_primary >= 3);

    let (g1, g2) = (&multi.chain[0].grid, &multi.chain[1].grid);
    let inc = incident_field(&multi.source, g1, lam()).unwrap();
    let problem = MaxMinProblem::from_incident(&inc, 1.0, g1, &plan.points, lam()).unwrap();
    assert!(problem.min_power(cm.profiles[0].omegas()) >= problem.min_power(cs.profiles[0].omegas()));

    let er = |p: &PhaseProfile| illumination_efficiency(&scatter_to_surface(&inc, p, 1.0, g1, g2, lam()).unwrap()).unwrap();
    assert!(er(&cm.profiles[0]) >= er(&cs.profiles[0]));

    let pm = propagate_chain(&multi, &cm.profiles).unwrap().received_power();
    let ps = propagate_chain(&single, &cs.profiles).unwrap().received_power();
    let pu = propagate_chain(&multi, &configure_chain(&partial_scenario(BeamMode::Unconfigured)).unwrap().profiles)
        .unwrap()
        .received_power();
    assert!(pm >= ps, "{pm} < {ps}");
    assert!(pm > pu);
}

#[test]
fn hop_errors_are_annotated() {
    let (g1, g2) = two_boards(4, Point3::new(0.05, 0.0, 0.0));
    let src = SourceSpec::isotropic(Point3::new(0.0, 0.0, 3.0), Complex64::new(1.0, 0.0));
    let sc = Scenario::new(lam(), src, vec![RisNode::new(g1, 1.0), RisNode::new(g2, 1.0)], Point3::new(1.0, 0.0, 1.0));
    let err = configure_chain(&sc).unwrap_err();
    assert_eq!(err.hop, 1);
    assert!(err.to_string().starts_with("hop 1: "));
}
