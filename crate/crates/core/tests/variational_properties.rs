use graphpde::calculus::OperatorContext;
use graphpde::graph::{Domain, VertexFunction};
use graphpde::variational::{
    minimize_on_ball, sobolev_constant, BallOptions, EnergyFunctional, FreeSpace, Nonlinearity, SobolevOptions,
};
use graphpde::verify::{oracle_sobolev_constant, random_domain, InstanceParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn domain_with_order(seed: u64, m: usize) -> Option<(Domain, FreeSpace, ChaCha8Rng)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = random_domain(&mut rng, &InstanceParams::default()).ok()?;
    let space = FreeSpace::new(&OperatorContext::zero_extend(d.clone()), m).ok()?;
    Some((d, space, rng))
}

fn random_member(space: &FreeSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let c: Vec<f64> = (0..space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    space.embed(&c)
}

fn yamabe(d: &Domain, rng: &mut ChaCha8Rng, p: f64) -> Nonlinearity {
    let omega = d.omega();
    let a: VertexFunction = omega.iter().map(|&x| (x, rng.random_range(0.5..2.0))).collect();
    let b: VertexFunction = omega.iter().map(|&x| (x, rng.random_range(0.5..2.0))).collect();
    Nonlinearity::yamabe(d, &a, &b, p - 1.0 + rng.random_range(0.0..2.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn embedding_inequality(seed in any::<u64>(), m in 1usize..=2, pi in 0usize..2, qi in 0usize..3) {
        let p = [2.0, 3.0][pi];
        let q = [1.0, 2.0, f64::INFINITY][qi];
        let Some((d, space, mut rng)) = domain_with_order(seed, m) else { return Ok(()) };
        let ctx = OperatorContext::zero_extend(d.clone());
        let c = sobolev_constant(&d, m, p, q, &SobolevOptions::default()).unwrap().value;
        for _ in 0..200 {
            let u = random_member(&space, &mut rng);
            let lhs = ctx.lp_norm_dense(&u, q);
            let rhs = c * ctx.sobolev0_norm_dense(&u, m, p);
            prop_assert!(lhs <= rhs + 1e-9 * rhs, "‖u‖_q = {lhs} > C‖∇^m u‖_p = {rhs}");
        }
        let lower = oracle_sobolev_constant(&d, m, p, q, 300, seed).unwrap();
        prop_assert!(lower <= c + 1e-9);
    }

    #[test]
    fn energy_gradient_matches_finite_differences(seed in any::<u64>(), m in 1usize..=2, pi in 0usize..2) {
        let p = [2.0, 3.0][pi];
        let Some((d, space, mut rng)) = domain_with_order(seed, m) else { return Ok(()) };
        let f = yamabe(&d, &mut rng, p);
        let ef = EnergyFunctional::with_space(OperatorContext::zero_extend(d.clone()), space, m, p, 0.3, f).unwrap();
        let c: Vec<f64> = (0..ef.space().dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = ef.gradient_coords(&c).unwrap();
        for j in 0..c.len() {
            let h = 1e-6;
            let mut cp = c.clone();
            let mut cm = c.clone();
            cp[j] += h;
            cm[j] -= h;
            let fd = (ef.value_coords(&cp).unwrap() - ef.value_coords(&cm).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1.0), "coord {j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn ball_minimizer_beats_random_feasible_points(seed in any::<u64>(), pi in 0usize..2) {
        let p = [2.0, 3.0][pi];
        let Some((d, space, mut rng)) = domain_with_order(seed, 1) else { return Ok(()) };
        let f = yamabe(&d, &mut rng, p);
        let ef = EnergyFunctional::with_space(OperatorContext::zero_extend(d.clone()), space, 1, p, 0.2, f).unwrap();
        let rho = 2.0;
        let best = minimize_on_ball(&ef, rho, &BallOptions { seed, ..BallOptions::default() }).unwrap();
        prop_assert!(best.phi <= rho * (1.0 + 1e-12));
        for _ in 0..200 {
            let mut c: Vec<f64> = (0..ef.space().dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let phi = ef.phi(&c);
            if phi > rho {
                for v in &mut c {
                    *v *= rho / phi;
                }
            }
            prop_assert!(best.energy <= ef.value_coords(&c).unwrap() + 1e-12);
        }
        prop_assert!(best.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
