use dirac_hardy::bounds::{certify_delta_bound, delta_lower_bound};
use dirac_hardy::extension::{roundtrip_residual, solve_with_form, symmetry_with_form};
use dirac_hardy::probe::ProfileSampler;
use dirac_hardy::{ChannelOperator, Form, Grid, MeshScheme, OriginClosure, Potential};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(1e-6, 60.0, 400, MeshScheme::LogUniform).unwrap()
}

fn kappa() -> impl Strategy<Value = i32> {
    prop_oneof![Just(-2), Just(-1), Just(1), Just(2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjoint_identity(seed in any::<u64>(), kappa in kappa()) {
        let g = grid();
        let d = ChannelOperator::new(kappa, &g).unwrap();
        let mut s = ProfileSampler::new(seed);
        let f = s.node_noise(&g);
        let y = s.cell_noise(&g);
        let lhs = g.cell_dot(&d.apply(&f), &y);
        let rhs = g.dot(&f, &d.adjoint_apply(&y));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn form_decreases_in_shift(
        seed in any::<u64>(),
        nu in 0.05f64..1.0,
        kappa in kappa(),
        a in 0.01f64..0.95,
        b in 0.01f64..0.95,
    ) {
        prop_assume!((a - b).abs() > 1e-3);
        let g = grid();
        let v = Potential::coulomb(nu).unwrap();
        let c = (1.0 - nu * nu).sqrt();
        let (lo, hi) = (a.min(b) * (1.0 + c), a.max(b) * (1.0 + c));
        let u = ProfileSampler::new(seed).node_profile(&g);
        prop_assume!(g.norm_sq(&u) > 0.0);
        let f_lo = Form::assemble(&v, lo, kappa, &g, OriginClosure::Regular).unwrap();
        let f_hi = Form::assemble(&v, hi, kappa, &g, OriginClosure::Regular).unwrap();
        prop_assert!(f_lo.value(&u) > f_hi.value(&u));
    }

    #[test]
    fn delta_bound_holds(seed in any::<u64>(), nu in 0.1f64..0.95, frac in 0.05f64..0.95, kappa in kappa()) {
        let g = grid();
        let v = Potential::coulomb(nu).unwrap();
        let c = (1.0 - nu * nu).sqrt();
        let gamma = frac * (1.0 + c);
        let delta = delta_lower_bound(v.sup(), gamma, c).unwrap();
        let f = Form::assemble(&v, gamma, kappa, &g, OriginClosure::Regular).unwrap();
        let u = ProfileSampler::new(seed).node_profile(&g);
        let cert = certify_delta_bound(&u, &f, delta).unwrap();
        prop_assert!(cert.holds, "{} < {} * {}", cert.form_value, delta, cert.graph_norm_sq);
    }

    #[test]
    fn resolvent_inverts_shifted_operator(seed in any::<u64>(), nu in 0.1f64..0.95, gamma in 1.05f64..1.3) {
        let g = grid();
        let v = Potential::coulomb(nu).unwrap();
        let f = Form::assemble(&v, gamma, -1, &g, OriginClosure::Regular).unwrap();
        let mut s = ProfileSampler::new(seed);
        let f1 = s.node_profile(&g);
        let f2 = s.cell_profile(&g);
        let p = solve_with_form(&f1, &f2, &f).unwrap();
        prop_assert!(roundtrip_residual(&p, &f1, &f2, &f) <= 1e-9);
    }

    #[test]
    fn extension_is_symmetric(seed in any::<u64>(), nu in 0.1f64..=1.0, kappa in kappa()) {
        let g = grid();
        let v = Potential::coulomb(nu).unwrap();
        let c = if nu >= 1.0 { 0.0 } else { (1.0 - nu * nu).sqrt() };
        let f = Form::assemble(&v, 0.5 * (1.0 + c), kappa, &g, OriginClosure::Regular).unwrap();
        let mut s = ProfileSampler::new(seed);
        let p = solve_with_form(&s.node_profile(&g), &s.cell_profile(&g), &f).unwrap();
        let q = solve_with_form(&s.node_profile(&g), &s.cell_profile(&g), &f).unwrap();
        let rep = symmetry_with_form(&p, &q, &f);
        prop_assert!(rep.defect <= 1e-10, "defect {}", rep.defect);
    }
}
