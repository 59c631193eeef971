mod common;

use manakov_core::export::{write_orbit_csv, OrbitSummary};
use manakov_core::heteroclinic::{necessary_condition, VerifyOptions};
use manakov_core::so4::{j_from_lambda, LambdaSpec};
use manakov_core::stability::{block_decompose_cartan, classify_equilibrium, BlockKind, ClassifyOptions, Verdict};
use manakov_core::{build_general, build_so4, enumerate_equilibria, is_equilibrium, verify_orbit, CartanElement};

fn no_flow() -> VerifyOptions {
    VerifyOptions {
        flow: false,
        ..VerifyOptions::default()
    }
}

#[test]
fn n6_block_orbit_moves_only_its_rows() {
    let mut rng = common::rng(21);
    let mut checked = 0;
    while checked < 3 {
        let (j, x) = common::random_spec(&mut rng, 6);
        let blocks = block_decompose_cartan(&j, &x).unwrap();
        for block in blocks.iter().filter(|b| !b.real_positive_eigenvalues().is_empty()) {
            let orbit = build_general(&j, &x, block, 0).unwrap();
            let outside: Vec<(usize, usize)> = (0..6)
                .flat_map(|a| (a + 1..6).map(move |b| (a, b)))
                .filter(|(a, b)| !(block.rows.contains(a) && block.rows.contains(b)))
                .collect();
            for k in 1..20 {
                let g = orbit.point_exact(orbit.s_end() * k as f64 / 20.0);
                for &(a, b) in &outside {
                    assert!((g.get(a, b) - orbit.x0.get(a, b)).abs() < 1e-12);
                }
            }
            assert!(is_equilibrium(&j, &orbit.x1).unwrap().0);
            assert!(verify_orbit(&j, &orbit, 50, &no_flow()).unwrap().passed);
            assert!(orbit.reduction_residual.unwrap() < 1e-10);
            checked += 1;
        }
    }
}

#[test]
fn n5_so3_block_orbits_verify_with_flow() {
    let mut rng = common::rng(22);
    let mut checked = 0;
    while checked < 2 {
        let (j, x) = common::random_spec(&mut rng, 5);
        for block in block_decompose_cartan(&j, &x).unwrap() {
            if !matches!(block.kind, BlockKind::So3Block { .. }) || block.real_positive_eigenvalues().is_empty() {
                continue;
            }
            let orbit = build_general(&j, &x, &block, 0).unwrap();
            let rep = verify_orbit(&j, &orbit, 100, &VerifyOptions::default()).unwrap();
            let flow = rep.flow.as_ref().unwrap();
            assert!(flow.max_match_error < 1e-5, "{rep:?}");
            checked += 1;
        }
    }
}

#[test]
fn unstable_equilibria_have_a_hyperbolic_block() {
    let mut rng = common::rng(23);
    let (j, x) = common::random_spec(&mut rng, 5);
    for eq in enumerate_equilibria(&x, &j).unwrap().iter().take(20) {
        let report = classify_equilibrium(&j, &x, eq, &ClassifyOptions::default()).unwrap();
        let hyperbolic = report.blocks.iter().any(|b| !b.all_imaginary());
        if hyperbolic {
            assert_eq!(report.verdict, Verdict::Unstable);
        } else {
            assert_ne!(report.verdict, Verdict::Unstable, "{:?}", report.message);
        }
    }
}

#[test]
fn stable_instance_refuses_construction() {
    let lam = LambdaSpec::new([-3.0, 5.0, 9.0]).unwrap();
    assert!(build_so4(&lam, 2.0).is_err());
    let j = manakov_core::InertiaSpec::new(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
    let x = CartanElement::new(4, vec![1.0, 2.0]).unwrap();
    let blocks = block_decompose_cartan(&j, &x).unwrap();
    if blocks[0].real_positive_eigenvalues().is_empty() {
        assert!(build_general(&j, &x, &blocks[0], 0).is_err());
    }
}

#[test]
fn second_real_eigenvalue_gives_second_orbit() {
    // Both roots real: Lambda_3^2 between the other two squares and c2 < 0 region.
    let mut rng = common::rng(24);
    let mut found = false;
    for _ in 0..2000 {
        let (lam, a) = common::random_lambda_a(&mut rng);
        let Ok(first) = build_so4(&lam, a) else { continue };
        let Ok(second) = manakov_core::heteroclinic::build_so4_indexed(&lam, a, 1) else { continue };
        assert!(second.z < first.z);
        let j = j_from_lambda(&lam).unwrap();
        for orbit in [&first, &second] {
            let (ok, z) = necessary_condition(&j, &orbit.x0, &orbit.generator).unwrap();
            assert!(ok && (z - orbit.z).abs() < 1e-8 * z.abs().max(1.0));
            assert!(verify_orbit(&j, orbit, 50, &no_flow()).unwrap().passed);
        }
        found = true;
        break;
    }
    assert!(found);
}

#[test]
fn orbit_export_round_trip() {
    let lam = LambdaSpec::new([1.0, 9.0, 5.0]).unwrap();
    let orbit = build_so4(&lam, 1.0).unwrap();
    let j = j_from_lambda(&lam).unwrap();
    let rep = verify_orbit(&j, &orbit, 50, &no_flow()).unwrap();
    let summary = OrbitSummary::new(&orbit, rep);
    let text = serde_json::to_string(&summary).unwrap();
    let back: OrbitSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(back, summary);
    let mut buf = Vec::new();
    write_orbit_csv(&orbit, 30, &mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 30);
    let t: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[0] < w[1]));
}
