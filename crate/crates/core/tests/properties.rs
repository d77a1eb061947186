use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rcsim::bloch::{
    bloch_to_density, density_to_bloch, BlochVector, DensityMatrix, TransferMatrix4,
};
use rcsim::dephasing::{
    analytic_fields, beta_of, branch_angles, coherence_factor, dilation_build, dilation_channel,
    evolve_with_angles, synthesize, transfer_from_angles, unwrap_phases, DecoherenceTrace,
    KrausSet,
};
use rcsim::depolarize::{analytic_nz, kraus_depolarize};
use rcsim::linalg::{self, eigenphases, haar_random_unitary, max_diff, trace_distance};
use rcsim::models::CentralSpinParams;
use rcsim::multiqubit::{check_transitivity, gamma_matrix, pauli_commutes, PauliString};

fn polar() -> impl Strategy<Value = (f64, f64)> {
    (1e-6f64..=1.0, -std::f64::consts::PI..std::f64::consts::PI)
        .prop_map(|(r, a)| (r * a.cos(), r * a.sin()))
}

fn bloch_ball() -> impl Strategy<Value = [f64; 3]> {
    (0.0f64..=1.0, -1.0f64..=1.0, 0.0..2.0 * std::f64::consts::PI).prop_map(|(r, z, phi)| {
        let rho = (1.0 - z * z).sqrt();
        [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
    })
}

proptest! {
    #[test]
    fn convex_combination_reconstructs_dephasing((c, s) in polar()) {
        let (p1, p2) = branch_angles(c, s).unwrap();
        let got = transfer_from_angles(p1, p2);
        let want = TransferMatrix4::dephasing(c, s);
        prop_assert!((got.0 - want.0).abs().max() < 1e-12);
        let d = coherence_factor(p1, p2);
        prop_assert!((d.re - c).abs() < 1e-12 && (d.im + s).abs() < 1e-12);
    }

    #[test]
    fn beta_is_real_and_bounded((c, s) in polar()) {
        let beta = beta_of(c, s).unwrap();
        let r2 = c * c + s * s;
        prop_assert!(beta >= 0.0);
        prop_assert!((beta * beta * r2 - (1.0 - r2)).abs() < 1e-9 * (1.0 + beta * beta));
    }

    #[test]
    fn bloch_round_trip(v in bloch_ball()) {
        let b = BlochVector::new(v[0], v[1], v[2]).unwrap();
        let rho = bloch_to_density(&b).unwrap();
        let back = density_to_bloch(&rho).unwrap();
        for k in 0..4 {
            prop_assert!((back.0[k] - b.0[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn dephasing_preserves_populations_and_shrinks_coherence(v in bloch_ball(), (c, s) in polar()) {
        let rho = bloch_to_density(&BlochVector::new(v[0], v[1], v[2]).unwrap()).unwrap();
        let (p1, p2) = branch_angles(c, s).unwrap();
        let out = evolve_with_angles(&rho, p1, p2).unwrap();
        prop_assert_eq!(out.matrix()[(0, 0)], rho.matrix()[(0, 0)]);
        prop_assert!(out.matrix()[(0, 1)].norm() <= rho.matrix()[(0, 1)].norm() + 1e-15);
    }

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DensityMatrix::random(3, &mut rng);
        let b = DensityMatrix::random(3, &mut rng);
        let m = DensityMatrix::random(3, &mut rng);
        let ab = trace_distance(a.matrix(), b.matrix());
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - trace_distance(b.matrix(), a.matrix())).abs() < 1e-12);
        prop_assert!(trace_distance(a.matrix(), a.matrix()) < 1e-12);
        let tri = trace_distance(a.matrix(), m.matrix()) + trace_distance(m.matrix(), b.matrix());
        prop_assert!(ab <= tri + 1e-12);
    }

    #[test]
    fn haar_unitaries_are_special_unitary(seed in any::<u64>(), n in 2usize..6) {
        let u = haar_random_unitary(n, seed).unwrap();
        let m = u.matrix();
        prop_assert!(max_diff(&(m * m.adjoint()), &linalg::identity(n)) < 1e-12);
        prop_assert!((m.determinant() - linalg::c(1.0, 0.0)).norm() < 1e-10);
        let (phases, _) = eigenphases(&u).unwrap();
        prop_assert!(phases.iter().all(|p| *p > -std::f64::consts::PI && *p <= std::f64::consts::PI));
    }

    #[test]
    fn unwrapping_removes_jumps(steps in prop::collection::vec(-3.0f64..3.0, 2..40)) {
        let mut acc = 0.0;
        let truth: Vec<f64> = steps.iter().map(|d| { acc += d; acc }).collect();
        let wrapped: Vec<f64> = truth.iter().map(|x| x.sin().atan2(x.cos())).collect();
        let un = unwrap_phases(&wrapped);
        let offset = un[0] - truth[0];
        for (u, t) in un.iter().zip(&truth) {
            prop_assert!((u - t - offset).abs() < 1e-9);
        }
    }

    #[test]
    fn central_spin_fields_match_closed_form(alpha in 0.1f64..3.0, b in -2.0f64..2.0) {
        let params = CentralSpinParams { alpha, b };
        let t_max = 1.0 / alpha;
        let times: Vec<f64> = (0..400).map(|k| t_max * k as f64 / 399.0).collect();
        let fd = synthesize(&rcsim::models::central_spin_trace(&params, &times).unwrap()).unwrap();
        let an = analytic_fields(&params, &times).unwrap();
        for (k, t) in times.iter().enumerate() {
            let want = 2.0 * alpha / (1.0 + alpha * alpha * t * t);
            prop_assert!((an.h1[k] - want).abs() < 1e-9 * want);
            prop_assert!((fd.h1[k] - want).abs() < 1e-3 * want);
            prop_assert!(an.h2[k].abs() < 1e-8);
        }
    }

    #[test]
    fn synthesized_angles_reproduce_trace(
        r in prop::collection::vec(0.05f64..1.0, 5..30),
        dphi in prop::collection::vec(-0.5f64..0.5, 5..30),
    ) {
        let n = r.len().min(dphi.len());
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 0.1).collect();
        let mut radii = r[..n].to_vec();
        radii[0] = 1.0;
        let mut phase = vec![0.0; n];
        for k in 1..n {
            phase[k] = phase[k - 1] + dphi[k];
        }
        let trace = DecoherenceTrace::from_polar(times, &radii, &phase).unwrap();
        let fields = synthesize(&trace).unwrap();
        for k in 0..n {
            let d = coherence_factor(fields.phi1[k], fields.phi2[k]);
            prop_assert!((d.re - trace.c()[k]).abs() < 1e-12);
            prop_assert!((d.im + trace.s()[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_is_convex(seed in any::<u64>(), p in 0.0f64..=1.0, n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::random(n, &mut rng);
        let out = kraus_depolarize(&rho, p).unwrap();
        let want = rho.matrix() * linalg::c(1.0 - p, 0.0)
            + linalg::identity(n) * linalg::c(p / n as f64, 0.0);
        prop_assert!(max_diff(out.matrix(), &want) < 1e-13);
    }

    #[test]
    fn nz_is_bounded(t in 0.0f64..20.0) {
        let nz = analytic_nz(t);
        prop_assert!((-1.0 / 3.0..=1.0 + 1e-12).contains(&nz));
    }

    #[test]
    fn theta_differences_are_transitive(theta in prop::collection::vec(-50.0f64..50.0, 2..9)) {
        let report = check_transitivity(&gamma_matrix(&theta)).unwrap();
        prop_assert!(report.transitive);
    }

    #[test]
    fn symplectic_commutation_matches_matrices(a in 0usize..16, b in 0usize..16) {
        let letters = ["I", "X", "Y", "Z"];
        let pa: PauliString = format!("{}{}", letters[a & 3], letters[a >> 2]).parse().unwrap();
        let pb: PauliString = format!("{}{}", letters[b & 3], letters[b >> 2]).parse().unwrap();
        let (ma, mb) = (pa.matrix(), pb.matrix());
        let comm = &ma * &mb - &mb * &ma;
        prop_assert_eq!(pauli_commutes(&pa, &pb).unwrap(), linalg::max_norm(&comm) < 1e-12);
    }

    #[test]
    fn dilation_reproduces_channel(seed in any::<u64>(), s in 1usize..4, d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kraus = KrausSet::random(s, d, &mut rng).unwrap();
        let u = dilation_build(&kraus).unwrap();
        let rho = DensityMatrix::random(s, &mut rng);
        let a = dilation_channel(&u, &rho, d).unwrap();
        prop_assert!(max_diff(a.matrix(), kraus.apply(&rho).unwrap().matrix()) < 1e-10);
    }
}
