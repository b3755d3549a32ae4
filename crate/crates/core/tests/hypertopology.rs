use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcflow::hypertopology::*;

fn random_polytope(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Polytope {
    Polytope::from_points((0..count).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()).unwrap()
}

#[test]
fn frank_wolfe_agrees_with_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..15 {
        let dim = rng.random_range(1..=4);
        let (c1, c2) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let k1 = random_polytope(&mut rng, dim, c1);
        let k2 = random_polytope(&mut rng, dim, c2);
        let basis = MetricBasis::standard(dim);
        let lp = hausdorff_d(&k1, &k2, &basis, 1e-10).unwrap();
        let fw = hausdorff_d_with(&k1, &k2, &basis, 1e-8, InnerSolver::FrankWolfe { max_iter: 50_000 }).unwrap();
        assert!((lp - fw).abs() <= 2e-8, "lp {lp} fw {fw}");
        // vertex sets only over-estimate
        assert!(vertex_hausdorff(&k1, &k2, &basis).unwrap() >= lp - 1e-12);
    }
}

#[test]
fn complex_basis_cutting_planes_agree_with_frank_wolfe() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..10 {
        let dim = rng.random_range(2..=3);
        let vectors: Vec<PredualVector> = (0..3)
            .map(|_| {
                let re: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
                let im: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
                let v = PredualVector::new(re, im).unwrap();
                let n = v.norm();
                if n > 1.0 { v.scale(1.0 / n) } else { v }
            })
            .collect();
        let basis = MetricBasis::new(vectors).unwrap();
        let (c1, c2) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let k1 = random_polytope(&mut rng, dim, c1);
        let k2 = random_polytope(&mut rng, dim, c2);
        let cp = hausdorff_d(&k1, &k2, &basis, 1e-10).unwrap();
        let fw = hausdorff_d_with(&k1, &k2, &basis, 1e-8, InnerSolver::FrankWolfe { max_iter: 50_000 }).unwrap();
        assert!((cp - fw).abs() <= 2e-8, "cutting planes {cp} fw {fw}");
    }
}

#[test]
fn square_against_inscribed_triangle() {
    let square = Polytope::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let tri = Polytope::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let basis = MetricBasis::standard(2);
    // (0,1) is at weighted-L1 distance 1/2·½ + 1/4·½ from the diagonal
    let d = hausdorff_d(&square, &tri, &basis, 1e-12).unwrap();
    assert!((d - 0.25).abs() < 1e-9, "{d}");
    let sep = separating_vector(&square, &tri).unwrap().expect("hulls differ");
    assert!(dh_a(&square, &tri, &sep).unwrap() > 0.0);
    assert!(separating_vector(&square, &square.with_points([square.barycenter()]).unwrap()).unwrap().is_none());
}

#[test]
fn poulsen_prefixes_increase_to_the_final_polytope() {
    let k0 = Polytope::from_points(vec![vec![0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, -0.4, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0]])
        .unwrap();
    let trace = poulsen_construct(&k0, 0.5, 5, 1.0, 9).unwrap();
    assert_eq!(trace.steps.len(), 5);
    for s in &trace.steps {
        assert_eq!(s.lambda, poulsen_lambda(s.n, 0.5, 1.0));
        assert!(s.min_gap() >= GAP_TOL);
    }
    let prefixes = trace.prefixes();
    let basis = MetricBasis::standard(trace.ambient_dim);
    let report = monotone_limit_check(&prefixes, &trace.current, &basis, 1e-9).unwrap();
    assert!(report.passed(), "{:?}", report.distances);
    let drift = hausdorff_d(&trace.reference, &trace.current, &basis, 1e-10).unwrap();
    assert!(drift <= trace.drift_bound() + 1e-9, "{drift} > {}", trace.drift_bound());
}

#[test]
fn poulsen_is_deterministic_in_the_seed() {
    let k0 = Polytope::from_points(vec![vec![0.1, 0.2, 0.0, 0.0, 0.0, 0.0], vec![-0.2, 0.1, 0.0, 0.0, 0.0, 0.0]]).unwrap();
    let a = poulsen_construct(&k0, 0.2, 3, 1.0, 4).unwrap().log_json();
    let b = poulsen_construct(&k0, 0.2, 3, 1.0, 4).unwrap().log_json();
    assert_eq!(a, b);
}

#[test]
fn exposure_of_hull_points() {
    let square = [vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.5, 0.5]];
    let k = Polytope::from_points(square.to_vec()).unwrap();
    let reduced = convex_hull_reduce(k.vertices()).unwrap();
    assert_eq!(reduced.len(), 4);
    let corner = &reduced.vertices()[2];
    let cert = is_exposed(&reduced, corner, &PredualVector::real(vec![1.0, 1.0]), GAP_TOL).unwrap();
    assert!(cert.exposed && (cert.gap - 1.0).abs() < 1e-12, "{cert:?}");
    assert!(!is_exposed(&reduced, corner, &PredualVector::real(vec![1.0, 0.0]), GAP_TOL).unwrap().exposed);
}
