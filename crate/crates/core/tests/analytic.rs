mod common;

use common::*;
use wsndct::deployment::{deploy, squared_distance, AreaGeometry, Position};
use wsndct::energy::{e_d2_disk, e_d2_square, EnergyModel, MultihopCost};
use wsndct::rng::SimRng;
use wsndct::routing::{expected_hops_chandler, HopCdf};
use wsndct::Error;

fn grid() -> Vec<(usize, usize, f64, f64, f64)> {
    // (n, n_c, L, Li, R0)
    let mut g = Vec::new();
    for (i, &side) in [10.0, 50.0, 100.0, 250.0, 1000.0].iter().enumerate() {
        for (j, &li_frac) in [0.0, 0.25, 0.5, 1.0, 3.0, 7.5, 0.9, 2.0, 1.5, 0.1]
            .iter()
            .enumerate()
        {
            let n = 100 + 500 * i + 37 * j;
            let n_c = 1 + (7 * i + 13 * j) % 60;
            g.push((n, n_c, side, li_frac * side, side / 2.0 + j as f64));
        }
    }
    g
}

#[test]
fn quadrature_oracle_converged() {
    let unit = disk_mean(|_, _| 1.0, 3.0);
    assert!(rel(unit, 1.0) < 1e-8, "{unit}");
    assert!(rel(e_d2_disk_by_quadrature(50.0), 1250.0) < 1e-8);
}

#[test]
fn closed_form_constants() {
    assert_eq!(e_d2_square(100.0, 50.0).unwrap(), 100.0 * 100.0 / 6.0);
    assert_eq!(e_d2_disk(50.0).unwrap(), 50.0 * 50.0 / 2.0);
    let m = EnergyModel::default();
    assert_eq!(m.intra_square(2000, 2000, 100.0).unwrap(), 0.0);
    assert_eq!(m.intra_disk(2000, 2000, 50.0).unwrap(), 0.0);
}

#[test]
fn closed_forms_match_quadrature_on_grid() {
    let m = EnergyModel::default();
    let g = grid();
    assert_eq!(g.len(), 50);
    for (n, n_c, side, li, r0) in g {
        let checks = [
            (
                m.intra_square(n, n_c, side).unwrap(),
                intra_by_quadrature(n, n_c, side * side),
            ),
            (
                m.intra_disk(n, n_c, r0).unwrap(),
                intra_by_quadrature(n, n_c, std::f64::consts::PI * r0 * r0),
            ),
            (
                e_d2_square(side, li).unwrap(),
                e_d2_square_by_quadrature(side, li),
            ),
            (e_d2_disk(r0).unwrap(), e_d2_disk_by_quadrature(r0)),
            (
                m.total_direct_square(n, n_c, side, li, 200).unwrap(),
                intra_by_quadrature(n, n_c, side * side)
                    + 200.0 * e_d2_square_by_quadrature(side, li),
            ),
            (
                m.total_direct_disk(n, n_c, r0, 200).unwrap(),
                intra_by_quadrature(n, n_c, std::f64::consts::PI * r0 * r0)
                    + 200.0 * e_d2_disk_by_quadrature(r0),
            ),
        ];
        for (i, (got, want)) in checks.iter().enumerate() {
            let tol = 1e-6 * want.abs().max(1e-9);
            assert!(
                (got - want).abs() <= tol,
                "check {i} at {n},{n_c},{side},{li},{r0}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn multihop_composition() {
    let m = EnergyModel::default();
    assert_eq!(
        m.total_multihop(23_750.0, 2.5, 18.0, 200).unwrap(),
        185_750.0
    );
    assert_eq!(m.total_multihop(1000.0, 1.0, 50.0, 0).unwrap(), 1000.0);
    let a = m.to_bs_multihop(2.2, 25.0, 200).unwrap();
    assert_eq!(m.to_bs_multihop(2.2, 25.0, 400).unwrap(), 2.0 * a);
}

#[test]
fn alpha_four_rejected_by_closed_forms() {
    let m = EnergyModel::new(4, MultihopCost::FixedRange).unwrap();
    assert!(matches!(
        m.intra_square(10, 2, 1.0),
        Err(Error::UnsupportedModel(_))
    ));
    assert!(matches!(
        m.to_bs_multihop(1.0, 1.0, 1),
        Err(Error::UnsupportedModel(_))
    ));
    assert!(EnergyModel::new(3, MultihopCost::FixedRange).is_err());
}

#[test]
fn square_bs_distance_monte_carlo() {
    for li in [0.0, 50.0, 100.0, 300.0] {
        let dep = deploy(AreaGeometry::Square { side: 100.0 }, 100_000, Some(li), 11).unwrap();
        let mean = dep
            .nodes
            .iter()
            .map(|&p| squared_distance(p, dep.bs))
            .sum::<f64>()
            / dep.len() as f64;
        let want = e_d2_square(100.0, li).unwrap();
        assert!(rel(mean, want) < 0.01, "Li={li}: {mean} vs {want}");
    }
}

#[test]
fn disk_centre_distance_monte_carlo() {
    let dep = deploy(AreaGeometry::Disk { radius: 50.0 }, 100_000, None, 12).unwrap();
    let mean = dep
        .nodes
        .iter()
        .map(|&p| squared_distance(p, Position::new(0.0, 0.0)))
        .sum::<f64>()
        / dep.len() as f64;
    assert!(rel(mean, 1250.0) < 0.01);
}

#[test]
fn chandler_matches_distribution_mean() {
    let mut rng = SimRng::new(5);
    for _ in 0..1000 {
        let len = 1 + (rng.uniform() * 12.0) as usize;
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (0..len)
            .map(|_| {
                acc += rng.uniform();
                acc
            })
            .collect();
        // Scale so P_max is anywhere in (0, 1].
        let top = acc / (0.05 + 0.95 * rng.uniform());
        cdf.iter_mut().for_each(|p| *p /= top);
        let got = expected_hops_chandler(&HopCdf::new(cdf.clone()).unwrap()).unwrap();
        let want = hop_distribution_mean(&cdf);
        assert!(
            (got - want).abs() <= 1e-12 * want.max(1.0),
            "{cdf:?}: {got} vs {want}"
        );
    }
}

#[test]
fn chandler_examples() {
    for (cdf, want) in [
        (vec![1.0], 1.0),
        (vec![0.2, 0.7, 1.0], 2.1),
        (vec![0.5, 1.0], 1.5),
    ] {
        let got = expected_hops_chandler(&HopCdf::new(cdf).unwrap()).unwrap();
        assert!((got - want).abs() < 1e-12);
    }
    assert!(HopCdf::new(vec![0.0, 0.0]).is_err());
    assert!(HopCdf::new(vec![0.6, 0.4]).is_err());
}
